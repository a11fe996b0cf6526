//! Stage matrices F and H, unitarity checks, and singular-value deviation
//! measurement.
//!
//! F carries the true base N in its phases, H the rounded base M*K. Their
//! operator-norm distance controls how far F is from an isometry.

use num::rational::BigRational;
use thiserror::Error;

use crate::exact::unit_phase;
use crate::matrix::{CMatrix, MatrixError, EIG_TOL};
use crate::scalar::Scalar;
use crate::tower::{TowerError, TowerStage};

pub const DEFAULT_STAGE_CAP: usize = 256;

#[derive(Debug, Error)]
pub enum StageError {
    #[error("stage {0} is not structured (no gap parameter K)")]
    NotStructured(usize),
    #[error("stage digit count {m} exceeds the dense eigensolve cap {cap}")]
    CapExceeded { m: usize, cap: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Tower(#[from] TowerError),
}

/// Measured data for one stage: the matrices themselves plus singular-value
/// and deviation summaries.
#[derive(Debug, Clone)]
pub struct StageMatrices<F: Scalar> {
    pub f: CMatrix<F>,
    pub h: CMatrix<F>,
    pub sigma_min: F,
    pub sigma_max: F,
    pub dev_op: F,
    pub dev_frob: F,
    /// max(1 - sigma_min, sigma_max - 1).
    pub eps_measured: F,
}

/// Build F = [e^{2 pi i b l / N}]/sqrt(M) and H = [e^{2 pi i b l / MK}]/sqrt(M)
/// (rows indexed by L, columns by B) and measure their deviation.
///
/// All phases are reduced mod 1 in exact rational arithmetic first.
pub fn build_stage_matrices<F: Scalar>(
    stage: &TowerStage,
    cap: usize,
) -> Result<StageMatrices<F>, StageError> {
    let params = stage
        .structured
        .as_ref()
        .ok_or(StageError::NotStructured(0))?;
    let m = stage.digit_count();
    if m > cap {
        return Err(StageError::CapExceeded { m, cap });
    }
    let scale = F::one() / F::from_f64(m as f64).sqrt();
    let n_den = stage.n.clone();
    let mk_den = &params.k * params.m;
    let f = CMatrix::from_fn(m, m, |row, col| {
        let phase = BigRational::new(&stage.b[col] * &stage.l[row], n_den.clone());
        unit_phase::<F>(&phase) * scale
    });
    let h = CMatrix::from_fn(m, m, |row, col| {
        let phase = BigRational::new(&stage.b[col] * &stage.l[row], mk_den.clone());
        unit_phase::<F>(&phase) * scale
    });
    let tol = F::from_f64(EIG_TOL);
    let (sigma_min, sigma_max) = f.singular_extremes(tol)?;
    let diff = f.sub(&h);
    let dev_frob = diff.frobenius_norm();
    let dev_op = diff.operator_norm(tol)?;
    let eps_measured = (F::one() - sigma_min).max(sigma_max - F::one()).max(F::zero());
    Ok(StageMatrices {
        f,
        h,
        sigma_min,
        sigma_max,
        dev_op,
        dev_frob,
        eps_measured,
    })
}

#[derive(Debug, Clone)]
pub struct UnitaryCheck<F: Scalar> {
    pub max_deviation: F,
    pub tol: F,
    pub pass: bool,
}

/// Max entrywise |H^H H - I|, pass iff <= tol.
pub fn verify_unitary<F: Scalar>(h: &CMatrix<F>, tol: F) -> UnitaryCheck<F> {
    let max_deviation = h.unitary_deviation();
    UnitaryCheck {
        max_deviation,
        tol,
        pass: max_deviation <= tol,
    }
}

#[derive(Debug, Clone)]
pub struct DeviationCheck<F: Scalar> {
    /// dev_op <= dev_frob (Cauchy-Schwarz).
    pub op_le_frob: bool,
    /// dev_frob^2 <= 4 pi^2 M^3 alpha^2 / N^2.
    pub frob_sq_bound: F,
    pub frob_sq_pass: bool,
    /// dev_op <= 2 pi alpha sqrt(M) / K.
    pub op_bound: F,
    pub op_pass: bool,
    pub tol: F,
    pub pass: bool,
}

/// Check the measured deviations against the analytic chain
/// dev_op <= dev_frob, dev_frob^2 <= 4 pi^2 M^3 alpha^2/N^2,
/// dev_op <= 2 pi alpha sqrt(M)/K, each with additive tolerance.
pub fn verify_deviation_bound<F: Scalar>(
    sm: &StageMatrices<F>,
    stage: &TowerStage,
    tol: F,
) -> Result<DeviationCheck<F>, StageError> {
    let params = stage
        .structured
        .as_ref()
        .ok_or(StageError::NotStructured(0))?;
    let m = F::from_f64(params.m as f64);
    let alpha = F::from_f64(params.alpha as f64);
    let n = F::from_f64(crate::exact::rational_to_f64(&BigRational::from_integer(
        stage.n.clone(),
    )));
    let two_pi = F::TAU();
    let op_le_frob = sm.dev_op <= sm.dev_frob + tol;
    let frob_sq_bound = two_pi * two_pi * m * m * m * alpha * alpha / (n * n);
    let frob_sq_pass = sm.dev_frob * sm.dev_frob <= frob_sq_bound + tol;
    let op_bound = F::from_f64(params.eps_analytic());
    let op_pass = sm.dev_op <= op_bound + tol;
    let pass = op_le_frob && frob_sq_pass && op_pass;
    Ok(DeviationCheck {
        op_le_frob,
        frob_sq_bound,
        frob_sq_pass,
        op_bound,
        op_pass,
        tol,
        pass,
    })
}

/// The explicit double sum of the squared Frobenius deviation:
/// (1/M) sum_b sum_l |e^{2 pi i b l/N} - e^{2 pi i b l/MK}|^2.
pub fn frob_deviation_double_sum<F: Scalar>(stage: &TowerStage) -> Result<F, StageError> {
    let params = stage
        .structured
        .as_ref()
        .ok_or(StageError::NotStructured(0))?;
    let mk_den = &params.k * params.m;
    let mut acc = F::zero();
    for b in &stage.b {
        for l in &stage.l {
            let pf = BigRational::new(b * l, stage.n.clone());
            let ph = BigRational::new(b * l, mk_den.clone());
            let d = unit_phase::<F>(&pf) - unit_phase::<F>(&ph);
            acc += d.norm_sqr();
        }
    }
    Ok(acc / F::from_f64(stage.digit_count() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C;
    use crate::tower::{build_structured_stage, StructuredParams};

    fn stage(m: u64, k: i64, alpha: u64) -> TowerStage {
        build_structured_stage(&StructuredParams::new(m, k, alpha).unwrap())
    }

    #[test]
    fn hadamard_case_has_zero_deviation() {
        // (M=2, K=2, alpha=0): F = H = Hadamard / sqrt(2).
        let sm = build_stage_matrices::<f64>(&stage(2, 2, 0), DEFAULT_STAGE_CAP).unwrap();
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        for (i, j, re) in [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)] {
            assert!((sm.f[(i, j)] - C::new(re * inv_sqrt2, 0.0)).norm() < 1e-15);
        }
        assert!(sm.dev_op < 1e-14);
        assert!(sm.eps_measured < 1e-14);
    }

    #[test]
    fn stage_7_anchor_values() {
        // (M=2, K=3, alpha=1): single nonzero entry in F - H, closed forms
        // dev_op = sqrt(2) sin(pi/14), sigma^2 = 1 +/- cos(3 pi/7).
        let sm = build_stage_matrices::<f64>(&stage(2, 3, 1), DEFAULT_STAGE_CAP).unwrap();
        let dev_expected = 2f64.sqrt() * (std::f64::consts::PI / 14.0).sin();
        assert!((sm.dev_op - dev_expected).abs() < 1e-12);
        assert!((sm.dev_op - 0.31469).abs() < 1e-4);
        let cos37 = (3.0 * std::f64::consts::PI / 7.0).cos();
        assert!((sm.sigma_max.powi(2) - (1.0 + cos37)).abs() < 1e-12);
        assert!((sm.sigma_min.powi(2) - (1.0 - cos37)).abs() < 1e-12);
        assert!((sm.sigma_max.powi(2) - 1.22252).abs() < 1e-4);
        assert!((sm.sigma_min.powi(2) - 0.77748).abs() < 1e-4);
        assert!((sm.eps_measured - 0.11823).abs() < 1e-4);
    }

    #[test]
    fn h_is_dft_matrix() {
        // M=8, K=5, alpha=0: H is the order-8 DFT matrix / sqrt(8).
        let sm = build_stage_matrices::<f64>(&stage(8, 5, 0), DEFAULT_STAGE_CAP).unwrap();
        let check = verify_unitary(&sm.h, 1e-12);
        assert!(check.pass, "deviation {}", check.max_deviation);
    }

    #[test]
    fn perturbed_h_fails_unitarity() {
        let mut h = build_stage_matrices::<f64>(&stage(2, 3, 1), DEFAULT_STAGE_CAP)
            .unwrap()
            .h;
        h[(0, 0)] *= 1.01;
        assert!(!verify_unitary(&h, 1e-12).pass);
    }

    #[test]
    fn deviation_bound_chain_holds() {
        for (m, k, alpha) in [(2, 3, 1), (2, 2, 0), (3, 7, 2), (5, 11, 4), (8, 64, 3)] {
            let st = stage(m, k, alpha);
            let sm = build_stage_matrices::<f64>(&st, DEFAULT_STAGE_CAP).unwrap();
            let check = verify_deviation_bound(&sm, &st, 1e-9).unwrap();
            assert!(check.pass, "chain failed for M={m} K={k} alpha={alpha}");
        }
    }

    #[test]
    fn frob_double_sum_matches_norm() {
        for (m, k, alpha) in [(2, 3, 1), (4, 9, 3), (6, 25, 5)] {
            let st = stage(m, k, alpha);
            let sm = build_stage_matrices::<f64>(&st, DEFAULT_STAGE_CAP).unwrap();
            let direct: f64 = frob_deviation_double_sum(&st).unwrap();
            assert!((sm.dev_frob.powi(2) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn sandwich_by_measured_eps() {
        let st = stage(2, 3, 1);
        let sm = build_stage_matrices::<f64>(&st, DEFAULT_STAGE_CAP).unwrap();
        assert!(1.0 - sm.eps_measured <= sm.sigma_min + 1e-15);
        assert!(sm.sigma_max <= 1.0 + sm.eps_measured + 1e-15);
        // Triangle inequality against the operator deviation.
        assert!(sm.sigma_max <= 1.0 + sm.dev_op + 1e-12);
        assert!(sm.sigma_min >= 1.0 - sm.dev_op - 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let st = stage(8, 11, 0);
        assert!(matches!(
            build_stage_matrices::<f64>(&st, 4),
            Err(StageError::CapExceeded { .. })
        ));
    }
}
