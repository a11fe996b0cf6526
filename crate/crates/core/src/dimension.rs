//! Hausdorff-dimension partial quotients of the attractor support:
//! q_j = log(M_1...M_j) / log(N_1...N_j).
//!
//! Logs accumulate per stage from exact integers; the cumulative products
//! themselves are never converted to floating point, so towers whose bases
//! overflow f64 within a few stages still trace correctly.

use thiserror::Error;

use crate::exact::log_big;
use crate::tower::{Family, Tower, TowerError};

#[derive(Debug, Error)]
pub enum DimensionError {
    #[error("window {window} must satisfy 1 <= window <= j_max = {j_max}")]
    BadWindow { window: usize, j_max: usize },
    #[error(transparent)]
    Tower(#[from] TowerError),
}

#[derive(Debug, Clone)]
pub struct DimensionTrace {
    /// q_j for j = 1..=j_max.
    pub quotients: Vec<f64>,
    /// Cumulative log(M_1...M_j), same indexing.
    pub log_m_cum: Vec<f64>,
    /// Cumulative log(N_1...N_j).
    pub log_n_cum: Vec<f64>,
    /// Minimum over the last `window` quotients.
    pub liminf_estimate: f64,
    pub window: usize,
    /// Exact limit when the family admits one in closed form.
    pub closed_form_limit: Option<f64>,
}

pub fn dimension_trace(
    tower: &Tower,
    j_max: usize,
    window: usize,
) -> Result<DimensionTrace, DimensionError> {
    if window < 1 || window > j_max {
        return Err(DimensionError::BadWindow { window, j_max });
    }
    let mut quotients = Vec::with_capacity(j_max);
    let mut log_m_cum = Vec::with_capacity(j_max);
    let mut log_n_cum = Vec::with_capacity(j_max);
    let mut lm = 0.0f64;
    let mut ln = 0.0f64;
    for j in 1..=j_max {
        let stage = tower.stage(j)?;
        lm += (stage.digit_count() as f64).ln();
        ln += log_big(&stage.n);
        log_m_cum.push(lm);
        log_n_cum.push(ln);
        quotients.push(lm / ln);
    }
    let liminf_estimate = quotients[j_max - window..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    // The prime families have N_j -> infinity with M fixed, so the quotient
    // tends to 0; the quarter Cantor tower is exactly constant.
    let closed_form_limit = match tower.family() {
        Family::OddPrimePower { .. } | Family::Nonspectral4k3 { .. } => Some(0.0),
        Family::QuarterCantor => Some(0.5),
        _ => None,
    };
    Ok(DimensionTrace {
        quotients,
        log_m_cum,
        log_n_cum,
        liminf_estimate,
        window,
        closed_form_limit,
    })
}

/// Closed-form quotient for the N_j = p^j, M = 2 family:
/// q_j = 2 j ln 2 / (j (j + 1) ln p).
pub fn odd_prime_power_quotient(p: u64, j: usize) -> f64 {
    let j = j as f64;
    2.0 * j * std::f64::consts::LN_2 / (j * (j + 1.0) * (p as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::{Family, StructuredParams, Tower};

    #[test]
    fn p7_matches_closed_form() {
        let t = Tower::new(Family::OddPrimePower { p: 7 }).unwrap();
        let trace = dimension_trace(&t, 25, 5).unwrap();
        for (i, &q) in trace.quotients.iter().enumerate() {
            let expect = odd_prime_power_quotient(7, i + 1);
            assert!((q - expect).abs() < 1e-12, "j = {}", i + 1);
        }
        assert!((trace.quotients[0] - 0.35621).abs() < 1e-5);
        assert!((trace.quotients[19] - 0.03393).abs() < 1e-5);
        // Strictly decreasing, so the trailing window min is the last entry.
        for w in trace.quotients.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert_eq!(trace.liminf_estimate, *trace.quotients.last().unwrap());
        assert_eq!(trace.closed_form_limit, Some(0.0));
    }

    #[test]
    fn quarter_cantor_is_half() {
        let t = Tower::new(Family::QuarterCantor).unwrap();
        let trace = dimension_trace(&t, 12, 3).unwrap();
        for &q in &trace.quotients {
            assert!((q - 0.5).abs() < 1e-14);
        }
        assert!((trace.liminf_estimate - 0.5).abs() < 1e-14);
    }

    #[test]
    fn quotients_lie_in_unit_interval() {
        let t = Tower::new(Family::Nonspectral4k3 { p: 11 }).unwrap();
        let trace = dimension_trace(&t, 30, 10).unwrap();
        for &q in &trace.quotients {
            assert!(q > 0.0 && q <= 1.0);
        }
    }

    #[test]
    fn deep_trace_survives_huge_bases() {
        // By j = 50 the cumulative base of the nonspectral p=7 family has
        // j^2 = 2500 factors of 7, far past f64 range.
        let t = Tower::new(Family::Nonspectral4k3 { p: 7 }).unwrap();
        let trace = dimension_trace(&t, 50, 5).unwrap();
        let expect = 50.0 * std::f64::consts::LN_2 / (2500.0 * 7f64.ln());
        assert!((trace.quotients[49] - expect).abs() < 1e-10);
    }

    #[test]
    fn growing_digit_count_keeps_quotient_positive() {
        // M_j ~ K_j^(1/2) style family: quotient stays bounded away from 0.
        let mut params = Vec::new();
        for j in 1..=20u32 {
            let k = 4u64.pow(j);
            let m = 2u64.pow(j);
            params.push(StructuredParams::new(m, k, 0).unwrap());
        }
        let t = Tower::new(Family::StructuredList(params)).unwrap();
        let trace = dimension_trace(&t, 20, 5).unwrap();
        assert!(trace.liminf_estimate > 0.3);
    }

    #[test]
    fn window_validation() {
        let t = Tower::new(Family::QuarterCantor).unwrap();
        assert!(dimension_trace(&t, 5, 0).is_err());
        assert!(dimension_trace(&t, 5, 6).is_err());
    }
}
