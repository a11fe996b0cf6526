//! Fourier-transform evaluators for the Moran measure mu = nu_1 * nu_2 * ...
//! and its truncations and tails, plus the tail-transform lower bounds.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::Zero;
use thiserror::Error;

use crate::exact::{rational_to_f64, unit_phase_neg, ExactFrequency};
use crate::scalar::{Scalar, C};
use crate::tower::{Tower, TowerError};

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error("stage {0} is not structured; zero-set arithmetic needs the gap K")]
    NotStructured(usize),
    #[error(
        "tail product for frequency {freq} did not reach tolerance within depth {depth}; \
         the frequency is too large for this level"
    )]
    TailTooDeep { freq: String, depth: usize },
    #[error("frequency budget exceeded: level {level} needs {needed} > {budget} evaluations")]
    BudgetExceeded {
        level: usize,
        needed: usize,
        budget: usize,
    },
    #[error(transparent)]
    Level(#[from] crate::level::LevelError),
}

/// Default cap on the tail-product truncation depth.
pub const DEFAULT_TAIL_DEPTH: usize = 512;

/// Fourier transform of the single stage measure nu_j at frequency xi:
/// (1/M) sum_{b in B_j} e^{-2 pi i b xi / (N_1...N_j)}.
///
/// For structured stages the Dirichlet-kernel degenerate branch
/// xi in (1/c_j) Z is decided exactly in rational arithmetic (the closed form
/// is 0/0 there), in which case the value is exactly 1.
pub fn nu_hat<F: Scalar>(
    tower: &Tower,
    j: usize,
    xi: &ExactFrequency,
) -> Result<C<F>, MeasureError> {
    let stage = tower.stage(j)?;
    if let Some(c) = tower.c_ratio(j)? {
        if (&c * xi.value()).is_integer() {
            return Ok(C::new(F::one(), F::zero()));
        }
    }
    let product = tower.base_product(j)?;
    let m = stage.digit_count();
    let mut acc = C::<F>::zero();
    for b in &stage.b {
        let phase = BigRational::new(b * xi.value().numer(), &product * xi.value().denom());
        acc += unit_phase_neg::<F>(&phase);
    }
    Ok(acc / F::from_f64(m as f64))
}

/// Truncated evaluation of the tail transform mu_hat_{>n}(lambda) with a
/// certified error bound.
#[derive(Debug, Clone)]
pub struct TailValue<F: Scalar> {
    pub value: C<F>,
    /// Certified bound on |value - mu_hat_{>n}(lambda)|.
    pub error_bound: f64,
    /// Number of explicit factors multiplied.
    pub depth: usize,
}

/// Evaluate prod_{j>=1} nu_hat_{n+j}(lambda), truncating once the remaining
/// factors are certified to deviate from 1 by at most `tail_tol` in total.
///
/// The per-factor magnitude bound is (pi c M lambda)^2 / 6 (from
/// sin x >= x - x^3/6); the phase of the structured Dirichlet form adds at
/// most pi c (M-1) |lambda|, so the full per-factor distance from 1 is at
/// most e_j + sqrt(6 e_j). Both shrink at least geometrically because the
/// base product doubles every stage.
pub fn mu_tail_hat<F: Scalar>(
    tower: &Tower,
    n: usize,
    lambda: &ExactFrequency,
    tail_tol: f64,
) -> Result<TailValue<F>, MeasureError> {
    assert!(tail_tol > 0.0, "tail_tol must be positive");
    if lambda.value().is_zero() {
        return Ok(TailValue {
            value: C::new(F::one(), F::zero()),
            error_bound: 0.0,
            depth: 0,
        });
    }
    let mut value = C::new(F::one(), F::zero());
    let mut depth = 0usize;
    loop {
        let j = n + depth + 1;
        if let Some(limit) = tower.stage_limit() {
            // Finite tower: the tail product simply ends.
            if j > limit {
                return Ok(TailValue {
                    value,
                    error_bound: 0.0,
                    depth,
                });
            }
        }
        if depth >= DEFAULT_TAIL_DEPTH {
            return Err(MeasureError::TailTooDeep {
                freq: lambda.value().to_string(),
                depth,
            });
        }
        // Certified bound on the distance of ALL remaining factors from 1.
        if let Some(f_next) = factor_distance_bound(tower, j, lambda)? {
            if f_next.is_finite() {
                // Ratio between consecutive bounds is at most 1/2 (base
                // product at least doubles, e_j scales by >= 1/4 and the
                // sqrt term by >= 1/2), so sum_{i >= j} f_i <= 2 f_next.
                let tail_sum = 2.0 * f_next;
                if tail_sum <= 0.25 && tail_sum * (1.0 + tail_sum) <= tail_tol {
                    return Ok(TailValue {
                        value,
                        error_bound: tail_sum * (1.0 + tail_sum),
                        depth,
                    });
                }
            }
        }
        value *= nu_hat::<F>(tower, j, lambda)?;
        depth += 1;
    }
}

/// Bound on |nu_hat_j(lambda) - 1| for a structured stage, None when the
/// stage is unstructured (explicit towers fall back to exhausting the list).
fn factor_distance_bound(
    tower: &Tower,
    j: usize,
    lambda: &ExactFrequency,
) -> Result<Option<f64>, MeasureError> {
    let c = match tower.c_ratio(j)? {
        Some(c) => c,
        None => return Ok(None),
    };
    let stage = tower.stage(j)?;
    let m = stage.digit_count() as f64;
    let cl = rational_to_f64(&(&c * lambda.value())).abs();
    let x = std::f64::consts::PI * m * cl;
    let e = x * x / 6.0;
    Ok(Some(e + (6.0 * e).sqrt()))
}

/// Witness that a frequency lies in the zero set of mu_hat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroWitness {
    /// Least stage index j with xi * K_j M_j / (N_1...N_j) in Z \ M_j Z.
    pub j: usize,
    /// The integer xi * K_j M_j / (N_1...N_j).
    pub t: BigInt,
}

/// Exact membership test for the zero set
/// Z(mu_hat) = union_j (N_1...N_j / (K_j M_j)) (Z \ M_j Z), truncated at
/// `j_max`. Returns the least witness level, or None when no level <= j_max
/// certifies membership.
pub fn zero_set_member(
    tower: &Tower,
    xi: &ExactFrequency,
    j_max: usize,
) -> Result<Option<ZeroWitness>, MeasureError> {
    for j in 1..=j_max {
        if let Some(limit) = tower.stage_limit() {
            if j > limit {
                break;
            }
        }
        let stage = tower.stage(j)?;
        let params = stage
            .structured
            .as_ref()
            .ok_or(MeasureError::NotStructured(j))?;
        let m = BigInt::from(params.m);
        let product = tower.base_product(j)?;
        // t = xi * K_j M_j / (N_1...N_j)
        let t = xi.value() * BigRational::new(&params.k * &m, product);
        if t.is_integer() {
            let t = t.to_integer();
            if !(&t % &m).is_zero() {
                return Ok(Some(ZeroWitness { j, t }));
            }
        }
    }
    Ok(None)
}

/// The universal analytic tail floor c_0 = prod_{j>=1} (1 - pi^2/(6*4^j))^2
/// with a certified truncation error below 1e-12.
#[derive(Debug, Clone)]
pub struct TailFloor {
    pub value: f64,
    pub depth: usize,
    pub tail_bound: f64,
    pub partial_products: Vec<f64>,
}

pub fn delta_lower_bound() -> TailFloor {
    let mut value = 1.0f64;
    let mut partial_products = Vec::new();
    let mut depth = 0usize;
    loop {
        depth += 1;
        let x = std::f64::consts::PI.powi(2) / 6.0 / 4f64.powi(depth as i32);
        value *= (1.0 - x) * (1.0 - x);
        partial_products.push(value);
        // Remaining log mass: sum_{j>depth} 2|log(1-x_j)| <= 2 * x_next/(1-x_next) * 4/3.
        let x_next = x / 4.0;
        let tail_log = 2.0 * x_next / (1.0 - x_next) * (4.0 / 3.0);
        if tail_log < 1e-12 {
            return TailFloor {
                value,
                depth,
                tail_bound: tail_log, // |value - c_0| <= value * tail_log
                partial_products,
            };
        }
    }
}

/// Empirical delta: the minimum of |mu_hat_{>k}(lambda)|^2 over k <= k_max
/// and lambda in L_k.
#[derive(Debug, Clone)]
pub struct DeltaEmpirical {
    pub min: f64,
    pub argmin_level: usize,
    pub argmin_freq: BigInt,
    /// Per-level minima, index 0 is level 1.
    pub per_level: Vec<f64>,
}

pub fn delta_empirical<F: Scalar>(
    tower: &Tower,
    k_max: usize,
    tail_tol: f64,
    budget: usize,
) -> Result<DeltaEmpirical, MeasureError> {
    let mut min = 1.0f64;
    let mut argmin_level = 0usize;
    let mut argmin_freq = BigInt::zero();
    let mut per_level = Vec::with_capacity(k_max);
    let mut total = 0usize;
    for k in 1..=k_max {
        let level = crate::level::build_level(tower, k, budget)?;
        total += level.freqs.len();
        if total > budget {
            return Err(MeasureError::BudgetExceeded {
                level: k,
                needed: total,
                budget,
            });
        }
        let mut level_min = f64::INFINITY;
        for freq in &level.freqs {
            let lam = ExactFrequency(BigRational::from_integer(freq.clone()));
            let tail = mu_tail_hat::<F>(tower, k, &lam, tail_tol)?;
            let v = tail.value.norm().as_f64().powi(2);
            if v < level_min {
                level_min = v;
            }
            if v < min {
                min = v;
                argmin_level = k;
                argmin_freq = freq.clone();
            }
        }
        per_level.push(level_min);
    }
    Ok(DeltaEmpirical {
        min,
        argmin_level,
        argmin_freq,
        per_level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{big, ratio};
    use crate::scalar::CReal;
    use crate::tower::{Family, Tower};

    fn p7() -> Tower {
        Tower::new(Family::Nonspectral4k3 { p: 7 }).unwrap()
    }

    fn quarter() -> Tower {
        Tower::new(Family::QuarterCantor).unwrap()
    }

    #[test]
    fn nu_hat_at_zero_is_one() {
        let t = p7();
        let one: CReal = nu_hat(&t, 1, &ExactFrequency::from_int(0)).unwrap();
        assert!((one - CReal::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn nu_hat_smallest_zero_of_stage_one() {
        // xi = 7/6: e^{-2 pi i 3 (7/6)/7} = e^{-pi i} = -1, so the 2-term sum
        // vanishes.
        let t = p7();
        let z: CReal = nu_hat(&t, 1, &ExactFrequency::new(7, 6)).unwrap();
        assert!(z.norm() < 1e-15);
    }

    #[test]
    fn nu_hat_degenerate_branch_is_exactly_one() {
        // c_1 = 3/7, xi = 7/3 is in (1/c_1) Z.
        let t = p7();
        let z: CReal = nu_hat(&t, 1, &ExactFrequency::new(7, 3)).unwrap();
        assert_eq!(z, CReal::new(1.0, 0.0));
    }

    #[test]
    fn tail_at_zero_is_exact() {
        let t = p7();
        let tail = mu_tail_hat::<f64>(&t, 3, &ExactFrequency::from_int(0), 1e-12).unwrap();
        assert_eq!(tail.value, CReal::new(1.0, 0.0));
        assert_eq!(tail.error_bound, 0.0);
    }

    #[test]
    fn tail_truncation_is_stable_in_depth() {
        // Evaluating at two tolerances (hence depths) must agree within the
        // coarser certified bound.
        let t = p7();
        let lam = ExactFrequency::from_int(1);
        let coarse = mu_tail_hat::<f64>(&t, 1, &lam, 1e-6).unwrap();
        let fine = mu_tail_hat::<f64>(&t, 1, &lam, 1e-13).unwrap();
        assert!(fine.depth >= coarse.depth);
        assert!((coarse.value - fine.value).norm() <= coarse.error_bound + 1e-13);
        // And the value is well above the universal floor.
        assert!(fine.value.norm_sqr() >= 0.2604 - 1e-9);
    }

    #[test]
    fn quarter_cantor_tail_matches_atomic_approximation() {
        // Oracle: finite atomic approximation of mu_{>1} at depth 12, i.e.
        // nu_2 * ... * nu_13 evaluated as an exact finite sum of atoms.
        let t = quarter();
        let lam = ExactFrequency::from_int(1);
        let tail = mu_tail_hat::<f64>(&t, 1, &lam, 1e-12).unwrap();

        let depth = 12usize;
        let mut atoms: Vec<BigRational> = vec![BigRational::zero()];
        for j in 2..=(1 + depth) {
            let stage = t.stage(j).unwrap();
            let product = t.base_product(j).unwrap();
            let mut next = Vec::with_capacity(atoms.len() * 2);
            for a in &atoms {
                for b in &stage.b {
                    next.push(a + BigRational::new(b.clone(), product.clone()));
                }
            }
            atoms = next;
        }
        let mut acc = CReal::new(0.0, 0.0);
        for a in &atoms {
            acc += unit_phase_neg::<f64>(&(a * lam.value()));
        }
        acc /= atoms.len() as f64;
        assert!((tail.value - acc).norm() < 1e-6);
    }

    #[test]
    fn zero_set_membership_examples() {
        let t = p7();
        // 7/6 * 6/7 = 1, odd -> member with witness 1.
        let w = zero_set_member(&t, &ExactFrequency::new(7, 6), 4)
            .unwrap()
            .unwrap();
        assert_eq!(w.j, 1);
        assert_eq!(w.t, big(1));
        // 7/3 * 6/7 = 2 even; higher j give non-integers.
        assert!(zero_set_member(&t, &ExactFrequency::new(7, 3), 6)
            .unwrap()
            .is_none());
        // Quarter Cantor: Z(nu_hat_1) is the odd integers.
        let q = quarter();
        let w = zero_set_member(&q, &ExactFrequency::from_int(1), 4)
            .unwrap()
            .unwrap();
        assert_eq!(w.j, 1);
        let z: CReal = nu_hat(&q, 1, &ExactFrequency::from_int(1)).unwrap();
        assert!(z.norm() < 1e-15);
    }

    #[test]
    fn zero_witness_is_consistent_with_nu_hat() {
        let t = p7();
        for q in -3i64..=3 {
            let xi = ExactFrequency(ratio(7, 6) * ratio(2 * q + 1, 1));
            let w = zero_set_member(&t, &xi, 3).unwrap().unwrap();
            let z: CReal = nu_hat(&t, w.j, &xi).unwrap();
            assert!(z.norm() < 1e-10);
        }
    }

    #[test]
    fn tail_floor_value() {
        let floor = delta_lower_bound();
        assert!((floor.value - 0.2604).abs() < 1e-4);
        // First factor alone.
        let first = (1.0 - std::f64::consts::PI.powi(2) / 24.0).powi(2);
        assert!((floor.partial_products[0] - first).abs() < 1e-15);
        assert!((first - 0.34664).abs() < 1e-4);
        // Partial products strictly decrease and stay above 0.26.
        for w in floor.partial_products.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(floor.value > 0.26);
    }

    #[test]
    fn delta_empirical_p7_dominates_floor() {
        let t = p7();
        let floor = delta_lower_bound();
        let emp = delta_empirical::<f64>(&t, 3, 1e-12, 4096).unwrap();
        assert!(emp.min >= floor.value - 1e-9);
        assert!(emp.min <= 1.0 + 1e-12);
    }

    #[test]
    fn delta_empirical_budget() {
        let t = p7();
        assert!(matches!(
            delta_empirical::<f64>(&t, 4, 1e-10, 8),
            Err(MeasureError::BudgetExceeded { .. })
        ));
    }
}
