//! Level-n atom and frequency sets, the level analysis operator, and frame
//! bound certification.
//!
//! Atoms and frequencies are kept in digit order: the stage-1 digit is the
//! fastest index, so the first M_1...M_{n-1} entries of level n reproduce
//! level n-1 exactly.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, Zero};
use std::collections::HashSet;
use thiserror::Error;

use crate::exact::{unit_phase_neg, ExactFrequency};
use crate::matrix::{CMatrix, MatrixError, EIG_TOL};
use crate::measure::{mu_tail_hat, MeasureError};
use crate::scalar::{Scalar, C};
use crate::stage::{build_stage_matrices, StageError, DEFAULT_STAGE_CAP};
use crate::tower::{Tower, TowerError};

pub const DEFAULT_LEVEL_BUDGET: usize = 4096;

#[derive(Debug, Error)]
pub enum LevelError {
    #[error("level {n} needs {needed} atoms, over the budget {budget}")]
    BudgetExceeded {
        n: usize,
        needed: usize,
        budget: usize,
    },
    #[error("level {n} atom/frequency collision detected")]
    Collision { n: usize },
    #[error("level {n} frequency {freq} is not below N_1...N_n")]
    FreqOutOfRange { n: usize, freq: BigInt },
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Stage(#[from] StageError),
    #[error("measure evaluation failed: {0}")]
    Measure(String),
}

impl From<MeasureError> for LevelError {
    fn from(e: MeasureError) -> Self {
        LevelError::Measure(e.to_string())
    }
}

/// The exact level-n data: atoms B_n (rationals in [0, 1)), frequencies
/// L_n (non-negative integers), and digit tuples for both.
#[derive(Debug, Clone)]
pub struct SpectrumLevel {
    pub n: usize,
    pub atoms: Vec<BigRational>,
    pub freqs: Vec<BigInt>,
    /// Digit tuple (b-index per stage) of each atom, stage 1 first.
    pub atom_digits: Vec<Vec<usize>>,
    /// Digit tuple (l-index per stage) of each frequency.
    pub freq_digits: Vec<Vec<usize>>,
}

impl SpectrumLevel {
    pub fn size(&self) -> usize {
        self.atoms.len()
    }
}

/// Construct level n exactly:
/// B_n = B_1/N_1 + B_2/(N_1 N_2) + ... , L_n = L_1 + N_1 L_2 + ...
/// Collision-freeness and the frequency range bound lambda < N_1...N_n are
/// verified exactly.
pub fn build_level(tower: &Tower, n: usize, budget: usize) -> Result<SpectrumLevel, LevelError> {
    assert!(n >= 1, "level must be >= 1");
    let mut size = 1usize;
    for j in 1..=n {
        let m = tower.stage(j)?.digit_count();
        size = size.saturating_mul(m);
        if size > budget {
            return Err(LevelError::BudgetExceeded {
                n,
                needed: size,
                budget,
            });
        }
    }

    let mut atoms = vec![BigRational::zero()];
    let mut freqs = vec![BigInt::zero()];
    let mut atom_digits = vec![Vec::new()];
    let mut freq_digits = vec![Vec::new()];
    for j in 1..=n {
        let stage = tower.stage(j)?;
        let product = tower.base_product(j)?;
        let prev_product = tower.base_product(j - 1)?;
        let mut next_atoms = Vec::with_capacity(atoms.len() * stage.digit_count());
        let mut next_freqs = Vec::with_capacity(next_atoms.capacity());
        let mut next_ad = Vec::with_capacity(next_atoms.capacity());
        let mut next_fd = Vec::with_capacity(next_atoms.capacity());
        // Stage-j digit is the slow index: prefix order is preserved.
        for (di, (b, l)) in stage.b.iter().zip(&stage.l).enumerate() {
            let shift_atom = BigRational::new(b.clone(), product.clone());
            let shift_freq = l * &prev_product;
            for (ai, a) in atoms.iter().enumerate() {
                next_atoms.push(a + &shift_atom);
                let mut d = atom_digits[ai].clone();
                d.push(di);
                next_ad.push(d);
            }
            for (fi, f) in freqs.iter().enumerate() {
                next_freqs.push(f + &shift_freq);
                let mut d = freq_digits[fi].clone();
                d.push(di);
                next_fd.push(d);
            }
        }
        atoms = next_atoms;
        freqs = next_freqs;
        atom_digits = next_ad;
        freq_digits = next_fd;
    }

    let atom_set: HashSet<_> = atoms.iter().collect();
    let freq_set: HashSet<_> = freqs.iter().collect();
    if atom_set.len() != atoms.len() || freq_set.len() != freqs.len() {
        return Err(LevelError::Collision { n });
    }
    let bound = tower.base_product(n)?;
    for f in &freqs {
        if f.is_negative() || f >= &bound {
            return Err(LevelError::FreqOutOfRange {
                n,
                freq: f.clone(),
            });
        }
    }
    Ok(SpectrumLevel {
        n,
        atoms,
        freqs,
        atom_digits,
        freq_digits,
    })
}

/// The level-n analysis data: E has entries e^{-2 pi i b lambda}/sqrt(M_n)
/// (rows lambda, columns b); D is the diagonal of tail factors
/// mu_hat_{>n}(lambda).
#[derive(Debug, Clone)]
pub struct LevelOperator<F: Scalar> {
    pub level: SpectrumLevel,
    pub e: CMatrix<F>,
    pub d: Vec<C<F>>,
    pub d_error_bounds: Vec<f64>,
}

pub fn build_level_operator<F: Scalar>(
    tower: &Tower,
    n: usize,
    tail_tol: f64,
    budget: usize,
) -> Result<LevelOperator<F>, LevelError> {
    let level = build_level(tower, n, budget)?;
    let m = level.size();
    let scale = F::one() / F::from_f64(m as f64).sqrt();
    let e = CMatrix::from_fn(m, m, |row, col| {
        let phase = &level.atoms[col] * &level.freqs[row];
        unit_phase_neg::<F>(&phase) * scale
    });
    let mut d = Vec::with_capacity(m);
    let mut d_error_bounds = Vec::with_capacity(m);
    for freq in &level.freqs {
        let lam = ExactFrequency(BigRational::from_integer(freq.clone()));
        let tail = mu_tail_hat::<F>(tower, n, &lam, tail_tol)?;
        d.push(tail.value);
        d_error_bounds.push(tail.error_bound);
    }
    Ok(LevelOperator {
        level,
        e,
        d,
        d_error_bounds,
    })
}

impl<F: Scalar> LevelOperator<F> {
    /// The weighted operator G = D E.
    pub fn weighted(&self) -> CMatrix<F> {
        let m = self.level.size();
        CMatrix::from_fn(m, m, |row, col| self.d[row] * self.e[(row, col)])
    }
}

/// Extreme eigenvalues (A_n, B_n) of the level Gram matrix: E^H E when
/// unweighted, (DE)^H (DE) when weighted.
pub fn level_frame_bounds<F: Scalar>(
    tower: &Tower,
    n: usize,
    weighted: bool,
    tail_tol: f64,
    budget: usize,
) -> Result<(F, F), LevelError> {
    let op = build_level_operator::<F>(tower, n, tail_tol, budget)?;
    let matrix = if weighted { op.weighted() } else { op.e };
    let eig = matrix.gram().hermitian_eigenvalues(F::from_f64(EIG_TOL))?;
    Ok((
        *eig.first().expect("non-empty level"),
        *eig.last().expect("non-empty level"),
    ))
}

/// A level-n step function, represented by its cylinder weights.
#[derive(Debug, Clone)]
pub struct StepFunction<F: Scalar> {
    pub n: usize,
    pub weights: Vec<C<F>>,
}

impl<F: Scalar> StepFunction<F> {
    pub fn constant_one(level_size: usize, n: usize) -> Self {
        StepFunction {
            n,
            weights: vec![C::new(F::one(), F::zero()); level_size],
        }
    }

    /// Exact L^2(mu) norm squared: (1/M_n) sum |w_b|^2.
    pub fn norm_sqr(&self) -> F {
        let sum: F = self
            .weights
            .iter()
            .map(|w| w.norm_sqr())
            .fold(F::zero(), |a, b| a + b);
        sum / F::from_f64(self.weights.len() as f64)
    }
}

/// Frame coefficient of a step function:
/// (1/M_n) mu_hat_{>n}(lambda) sum_b w_b e^{-2 pi i b lambda}, with the tail
/// factor's certified error propagated to the result.
pub fn step_coefficient<F: Scalar>(
    tower: &Tower,
    level: &SpectrumLevel,
    f: &StepFunction<F>,
    lambda: &BigInt,
    tail_tol: f64,
) -> Result<(C<F>, f64), LevelError> {
    assert_eq!(f.weights.len(), level.size(), "weight vector length");
    let m = F::from_f64(level.size() as f64);
    let mut sum = C::<F>::zero();
    for (w, b) in f.weights.iter().zip(&level.atoms) {
        sum += *w * unit_phase_neg::<F>(&(b * lambda));
    }
    sum /= m;
    let lam = ExactFrequency(BigRational::from_integer(lambda.clone()));
    let tail = mu_tail_hat::<F>(tower, level.n, &lam, tail_tol)?;
    let err = tail.error_bound * sum.norm().as_f64();
    Ok((tail.value * sum, err))
}

/// One certified level in a frame certification run.
#[derive(Debug, Clone)]
pub struct LevelCertificate {
    pub n: usize,
    /// Extreme eigenvalues of the unweighted Gram E^H E.
    pub a_unweighted: f64,
    pub b_unweighted: f64,
    /// Extreme eigenvalues of the weighted Gram (DE)^H (DE); these are the
    /// frame bounds on level-n step functions.
    pub a_weighted: f64,
    pub b_weighted: f64,
    /// min over lambda in L_n of |mu_hat_{>n}(lambda)|^2.
    pub delta_emp: f64,
    /// Measured per-stage deviations up to this level.
    pub eps_measured: Vec<f64>,
    /// Certification window [delta_emp * prod(1-eps)^2, prod(1+eps)^2].
    pub window_lo: f64,
    pub window_hi: f64,
    /// Lower window collapsed to <= 0 (some eps >= 1).
    pub degenerate: bool,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct FrameCertification {
    pub levels: Vec<LevelCertificate>,
    pub c0: f64,
    pub tol: f64,
    pub tail_tol: f64,
    pub pass: bool,
    /// First failing (level, frequency-index) if any.
    pub failure: Option<(usize, usize)>,
}

/// Certify frame bounds for each level n <= n_max: the weighted extreme
/// eigenvalues must land in the window
/// [delta_emp * prod(1-eps_hat)^2 - tol, prod(1+eps_hat)^2 + tol].
pub fn certify_frame<F: Scalar>(
    tower: &Tower,
    n_max: usize,
    tail_tol: f64,
    tol: f64,
    budget: usize,
) -> Result<FrameCertification, LevelError> {
    // Fail fast if any requested level is over budget, before the expensive
    // eigensolves on the smaller levels start.
    let mut size = 1usize;
    for j in 1..=n_max {
        size = size.saturating_mul(tower.stage(j)?.digit_count());
        if size > budget {
            return Err(LevelError::BudgetExceeded {
                n: j,
                needed: size,
                budget,
            });
        }
    }
    let mut levels = Vec::with_capacity(n_max);
    let mut all_pass = true;
    let mut failure = None;
    let mut prod_lo = 1.0f64;
    let mut prod_hi = 1.0f64;
    let mut eps_list: Vec<f64> = Vec::new();
    for n in 1..=n_max {
        let stage = tower.stage(n)?;
        let sm = build_stage_matrices::<f64>(&stage, DEFAULT_STAGE_CAP)?;
        let eps = sm.eps_measured;
        eps_list.push(eps);
        let lo_factor = 1.0 - eps;
        prod_lo *= lo_factor * lo_factor;
        prod_hi *= (1.0 + eps) * (1.0 + eps);

        let op = build_level_operator::<F>(tower, n, tail_tol, budget)?;
        let eig_u = op.e.gram().hermitian_eigenvalues(F::from_f64(EIG_TOL))?;
        let eig_w = op
            .weighted()
            .gram()
            .hermitian_eigenvalues(F::from_f64(EIG_TOL))?;
        let a_unweighted = eig_u.first().unwrap().as_f64();
        let b_unweighted = eig_u.last().unwrap().as_f64();
        let a_weighted = eig_w.first().unwrap().as_f64();
        let b_weighted = eig_w.last().unwrap().as_f64();
        let mut delta_emp = f64::INFINITY;
        let mut delta_idx = 0usize;
        for (i, z) in op.d.iter().enumerate() {
            let v = z.norm_sqr().as_f64();
            if v < delta_emp {
                delta_emp = v;
                delta_idx = i;
            }
        }
        let window_lo = delta_emp * prod_lo;
        // A lower window at or below the additive tolerance certifies
        // nothing; flag it instead of pretending to check it.
        let degenerate = lo_factor < 0.0 || window_lo <= tol;
        let window_hi = prod_hi;
        let pass = if degenerate {
            // Lower window carries no information; only the upper bound is
            // checkable.
            b_weighted <= window_hi + tol
        } else {
            window_lo - tol <= a_weighted && b_weighted <= window_hi + tol
        };
        if !pass && all_pass {
            failure = Some((n, delta_idx));
        }
        all_pass &= pass;
        levels.push(LevelCertificate {
            n,
            a_unweighted,
            b_unweighted,
            a_weighted,
            b_weighted,
            delta_emp,
            eps_measured: eps_list.clone(),
            window_lo,
            window_hi,
            degenerate,
            pass,
        });
    }
    Ok(FrameCertification {
        levels,
        c0: crate::measure::delta_lower_bound().value,
        tol,
        tail_tol,
        pass: all_pass,
        failure,
    })
}
