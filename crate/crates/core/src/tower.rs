//! Tower construction: structured stages, named example families, and the
//! JSON configuration surface.

use std::sync::{Arc, Mutex};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::Deserialize;
use thiserror::Error;

use crate::exact::{is_prime_u64, parse_big_int};

#[derive(Debug, Error)]
pub enum TowerError {
    #[error("digit count M must be at least 2 (got {0})")]
    DigitCountTooSmall(u64),
    #[error("gap K must be at least 1 (got {0})")]
    GapTooSmall(BigInt),
    #[error("remainder alpha = {alpha} must satisfy 0 <= alpha < M = {m}")]
    RemainderOutOfRange { alpha: u64, m: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not congruent to 3 mod 4")]
    NotThreeMod4(u64),
    #[error("stage index {j} out of range: tower has {len} stages")]
    StageOutOfRange { j: usize, len: usize },
    #[error("stage index must be >= 1")]
    StageIndexZero,
    #[error("explicit stage invalid: {0}")]
    BadExplicitStage(String),
    #[error("config error: {0}")]
    Config(String),
}

/// Parameters of one structured stage: N = M*K + alpha with 0 <= alpha < M.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredParams {
    pub m: u64,
    pub k: BigInt,
    pub alpha: u64,
}

impl StructuredParams {
    pub fn new(m: u64, k: impl Into<BigInt>, alpha: u64) -> Result<Self, TowerError> {
        let k = k.into();
        if m < 2 {
            return Err(TowerError::DigitCountTooSmall(m));
        }
        if k < BigInt::one() {
            return Err(TowerError::GapTooSmall(k));
        }
        if alpha >= m {
            return Err(TowerError::RemainderOutOfRange { alpha, m });
        }
        Ok(StructuredParams { m, k, alpha })
    }

    pub fn base(&self) -> BigInt {
        &self.k * self.m + self.alpha
    }

    /// Analytic deviation bound 2 pi alpha sqrt(M) / K.
    pub fn eps_analytic(&self) -> f64 {
        let k = self.k.to_f64().unwrap_or(f64::INFINITY);
        2.0 * std::f64::consts::PI * self.alpha as f64 * (self.m as f64).sqrt() / k
    }
}

/// One tower level: base N, digit set B, pre-spectrum set L.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerStage {
    pub n: BigInt,
    pub b: Vec<BigInt>,
    pub l: Vec<BigInt>,
    pub structured: Option<StructuredParams>,
}

impl TowerStage {
    pub fn digit_count(&self) -> usize {
        self.b.len()
    }

    pub fn eps_analytic(&self) -> Option<f64> {
        self.structured.as_ref().map(|p| p.eps_analytic())
    }

    fn validate(&self) -> Result<(), TowerError> {
        let bad = |msg: String| Err(TowerError::BadExplicitStage(msg));
        if self.n < BigInt::from(2) {
            return bad(format!("base N = {} must be >= 2", self.n));
        }
        if self.b.len() != self.l.len() {
            return bad(format!("|B| = {} != |L| = {}", self.b.len(), self.l.len()));
        }
        if self.b.len() < 2 {
            return bad("digit set must have at least 2 elements".into());
        }
        if !self.b.contains(&BigInt::zero()) || !self.l.contains(&BigInt::zero()) {
            return bad("both B and L must contain 0".into());
        }
        for b in &self.b {
            if b.is_negative() || b >= &self.n {
                return bad(format!("digit {} outside [0, {})", b, self.n));
            }
        }
        let mut sorted_b = self.b.clone();
        sorted_b.sort();
        sorted_b.dedup();
        if sorted_b.len() != self.b.len() {
            return bad("digit set has duplicates".into());
        }
        let mut sorted_l = self.l.clone();
        sorted_l.sort();
        sorted_l.dedup();
        if sorted_l.len() != self.l.len() {
            return bad("pre-spectrum set has duplicates".into());
        }
        Ok(())
    }
}

/// Build the structured stage of a given (M, K, alpha):
/// B = {0, K, ..., (M-1)K}, L = {0, 1, ..., M-1}.
pub fn build_structured_stage(params: &StructuredParams) -> TowerStage {
    let b = (0..params.m).map(|i| &params.k * i).collect();
    let l = (0..params.m).map(BigInt::from).collect();
    TowerStage {
        n: params.base(),
        b,
        l,
        structured: Some(params.clone()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// Finite list of explicit structured parameters.
    StructuredList(Vec<StructuredParams>),
    /// N_j = p^j, M = 2, K_j = (p^j - 1)/2, alpha = 1 for an odd prime p.
    OddPrimePower { p: u64 },
    /// N_j = p^(2j-1), M = 2, K_j odd, alpha = 1 for a prime p = 3 mod 4.
    Nonspectral4k3 { p: u64 },
    /// N = 4, B = {0, 2}, L = {0, 1} at every stage (spectral control).
    QuarterCantor,
    /// Finite list of fully explicit stages.
    Explicit(Vec<TowerStage>),
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::StructuredList(_) => "structured-list",
            Family::OddPrimePower { .. } => "odd-prime-power",
            Family::Nonspectral4k3 { .. } => "nonspectral-4k3",
            Family::QuarterCantor => "quarter-cantor",
            Family::Explicit(_) => "explicit",
        }
    }
}

/// A deterministic, lazily memoized stage generator. Stages are indexed from
/// j = 1 and immutable once produced.
pub struct Tower {
    family: Family,
    description: String,
    cache: Mutex<Vec<Arc<TowerStage>>>,
    /// Cumulative products N_1...N_j, same indexing as the stage cache.
    products: Mutex<Vec<BigInt>>,
}

impl std::fmt::Debug for Tower {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tower")
            .field("family", &self.family.tag())
            .field("description", &self.description)
            .finish()
    }
}

impl Tower {
    pub fn new(family: Family) -> Result<Self, TowerError> {
        let description = match &family {
            Family::StructuredList(list) => {
                if list.is_empty() {
                    return Err(TowerError::Config("structured-list needs stages".into()));
                }
                format!("structured-list with {} stages", list.len())
            }
            Family::OddPrimePower { p } => {
                if !is_prime_u64(*p) {
                    return Err(TowerError::NotPrime(*p));
                }
                if *p == 2 {
                    return Err(TowerError::Config("p must be an odd prime".into()));
                }
                format!("odd-prime-power tower, p = {p}")
            }
            Family::Nonspectral4k3 { p } => {
                if !is_prime_u64(*p) {
                    return Err(TowerError::NotPrime(*p));
                }
                if p % 4 != 3 {
                    return Err(TowerError::NotThreeMod4(*p));
                }
                format!("nonspectral tower, p = {p} (p = 3 mod 4)")
            }
            Family::QuarterCantor => "quarter Cantor tower (N = 4, B = {0,2})".to_string(),
            Family::Explicit(list) => {
                if list.is_empty() {
                    return Err(TowerError::Config("explicit tower needs stages".into()));
                }
                for stage in list {
                    stage.validate()?;
                }
                format!("explicit tower with {} stages", list.len())
            }
        };
        Ok(Tower {
            family,
            description,
            cache: Mutex::new(Vec::new()),
            products: Mutex::new(Vec::new()),
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Number of stages for finite families.
    pub fn stage_limit(&self) -> Option<usize> {
        match &self.family {
            Family::StructuredList(list) => Some(list.len()),
            Family::Explicit(list) => Some(list.len()),
            _ => None,
        }
    }

    fn generate_stage(&self, j: usize) -> Result<TowerStage, TowerError> {
        debug_assert!(j >= 1);
        match &self.family {
            Family::StructuredList(list) => list
                .get(j - 1)
                .map(build_structured_stage)
                .ok_or(TowerError::StageOutOfRange { j, len: list.len() }),
            Family::Explicit(list) => list
                .get(j - 1)
                .cloned()
                .ok_or(TowerError::StageOutOfRange { j, len: list.len() }),
            Family::OddPrimePower { p } => {
                let n = BigInt::from(*p).pow(j as u32);
                let k = (&n - 1) / 2;
                Ok(build_structured_stage(&StructuredParams::new(2, k, 1)?))
            }
            Family::Nonspectral4k3 { p } => {
                let n = BigInt::from(*p).pow((2 * j - 1) as u32);
                let k = (&n - 1) / 2;
                Ok(build_structured_stage(&StructuredParams::new(2, k, 1)?))
            }
            Family::QuarterCantor => {
                Ok(build_structured_stage(&StructuredParams::new(2, 2, 0)?))
            }
        }
    }

    /// Stage j (1-based), memoized.
    pub fn stage(&self, j: usize) -> Result<Arc<TowerStage>, TowerError> {
        if j == 0 {
            return Err(TowerError::StageIndexZero);
        }
        let mut cache = self.cache.lock().expect("stage cache poisoned");
        while cache.len() < j {
            let next = self.generate_stage(cache.len() + 1)?;
            cache.push(Arc::new(next));
        }
        Ok(cache[j - 1].clone())
    }

    /// Cumulative base product N_1...N_j; j = 0 gives 1.
    pub fn base_product(&self, j: usize) -> Result<BigInt, TowerError> {
        if j == 0 {
            return Ok(BigInt::one());
        }
        let mut products = self.products.lock().expect("product cache poisoned");
        while products.len() < j {
            let idx = products.len() + 1;
            let stage = self.stage(idx)?;
            let prev = if idx == 1 {
                BigInt::one()
            } else {
                products[idx - 2].clone()
            };
            products.push(prev * &stage.n);
        }
        Ok(products[j - 1].clone())
    }

    /// c_j = K_j / (N_1...N_j) for a structured stage.
    pub fn c_ratio(&self, j: usize) -> Result<Option<BigRational>, TowerError> {
        let stage = self.stage(j)?;
        match &stage.structured {
            Some(p) => Ok(Some(BigRational::new(p.k.clone(), self.base_product(j)?))),
            None => Ok(None),
        }
    }
}

pub fn make_family_tower(family: Family) -> Result<Tower, TowerError> {
    Tower::new(family)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummabilityMode {
    Analytic,
    Measured,
}

#[derive(Debug, Clone)]
pub struct SummabilityReport {
    pub mode: SummabilityMode,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Stage indices (1-based) whose deviation is >= 1.
    pub flagged: Vec<usize>,
    /// Closed-form geometric bound on the tail beyond j_max, when the family
    /// admits one (prime-power families): sum_{j>J} 2 sqrt(2)/(p^e(j) - 1)
    /// bounded by the geometric series with ratio 1/p (odd-prime-power) or
    /// 1/p^2 (nonspectral family).
    pub tail_bound: Option<f64>,
}

/// Partial sums of the per-stage deviations up to `j_max`.
///
/// `Analytic` uses the closed-form bound 2 pi alpha sqrt(M)/K; `Measured`
/// uses the singular-value deviation of the stage matrices.
pub fn summability_report(
    tower: &Tower,
    j_max: usize,
    mode: SummabilityMode,
) -> Result<SummabilityReport, crate::stage::StageError> {
    let mut terms = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let stage = tower.stage(j).map_err(crate::stage::StageError::Tower)?;
        let eps = match mode {
            SummabilityMode::Analytic => stage
                .eps_analytic()
                .ok_or(crate::stage::StageError::NotStructured(j))?,
            SummabilityMode::Measured => {
                crate::stage::build_stage_matrices::<f64>(&stage, crate::stage::DEFAULT_STAGE_CAP)?
                    .eps_measured
            }
        };
        terms.push(eps);
    }
    let mut partial_sums = Vec::with_capacity(j_max);
    let mut acc = 0.0;
    for t in &terms {
        acc += t;
        partial_sums.push(acc);
    }
    let flagged = terms
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= 1.0)
        .map(|(i, _)| i + 1)
        .collect();
    let tail_bound = match tower.family() {
        Family::OddPrimePower { p } => {
            // term_j = 2 sqrt(2)/(p^j - 1) <= 4 sqrt(2)/p^j for p^j >= 2.
            let p = *p as f64;
            Some(4.0 * 2f64.sqrt() / p.powi(j_max as i32 + 1) * p / (p - 1.0))
        }
        Family::Nonspectral4k3 { p } => {
            let p = *p as f64;
            let first = 4.0 * 2f64.sqrt() / p.powi(2 * (j_max as i32 + 1) - 1);
            Some(first / (1.0 - 1.0 / (p * p)))
        }
        Family::QuarterCantor => Some(0.0),
        _ => None,
    };
    Ok(SummabilityReport {
        mode,
        terms,
        partial_sums,
        flagged,
        tail_bound,
    })
}

// ---------------------------------------------------------------------------
// Configuration file surface.
// ---------------------------------------------------------------------------

/// Integer field accepting either a JSON number or a decimal string, so big
/// values survive the trip through JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum IntField {
    Num(i64),
    Str(String),
}

impl IntField {
    pub fn to_big(&self) -> Result<BigInt, TowerError> {
        match self {
            IntField::Num(v) => Ok(BigInt::from(*v)),
            IntField::Str(s) => parse_big_int(s)
                .ok_or_else(|| TowerError::Config(format!("invalid integer string {s:?}"))),
        }
    }

    pub fn to_u64(&self, field: &str) -> Result<u64, TowerError> {
        self.to_big()?
            .to_u64()
            .ok_or_else(|| TowerError::Config(format!("field {field:?} out of range")))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageConfig {
    #[serde(rename = "M")]
    m: IntField,
    #[serde(rename = "K")]
    k: IntField,
    alpha: IntField,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitStageConfig {
    #[serde(rename = "N")]
    n: IntField,
    #[serde(rename = "B")]
    b: Vec<IntField>,
    #[serde(rename = "L")]
    l: Vec<IntField>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerConfig {
    family: String,
    p: Option<IntField>,
    stages: Option<Vec<StageConfig>>,
    explicit_stages: Option<Vec<ExplicitStageConfig>>,
}

impl TowerConfig {
    pub fn from_json(text: &str) -> Result<Self, TowerError> {
        serde_json::from_str(text).map_err(|e| TowerError::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<Tower, TowerError> {
        let need_p = || {
            self.p
                .as_ref()
                .ok_or_else(|| TowerError::Config("family requires field \"p\"".into()))?
                .to_u64("p")
        };
        let family = match self.family.as_str() {
            "odd-prime-power" => Family::OddPrimePower { p: need_p()? },
            "nonspectral-4k3" => Family::Nonspectral4k3 { p: need_p()? },
            "quarter-cantor" => Family::QuarterCantor,
            "structured-list" => {
                let stages = self
                    .stages
                    .as_ref()
                    .ok_or_else(|| TowerError::Config("structured-list requires \"stages\"".into()))?;
                let mut params = Vec::with_capacity(stages.len());
                for s in stages {
                    params.push(StructuredParams::new(
                        s.m.to_u64("M")?,
                        s.k.to_big()?,
                        s.alpha.to_u64("alpha")?,
                    )?);
                }
                Family::StructuredList(params)
            }
            "explicit" => {
                let stages = self.explicit_stages.as_ref().ok_or_else(|| {
                    TowerError::Config("explicit family requires \"explicit_stages\"".into())
                })?;
                let mut list = Vec::with_capacity(stages.len());
                for s in stages {
                    let stage = TowerStage {
                        n: s.n.to_big()?,
                        b: s.b.iter().map(|v| v.to_big()).collect::<Result<_, _>>()?,
                        l: s.l.iter().map(|v| v.to_big()).collect::<Result<_, _>>()?,
                        structured: None,
                    };
                    stage.validate()?;
                    list.push(stage);
                }
                Family::Explicit(list)
            }
            other => {
                return Err(TowerError::Config(format!("unknown family {other:?}")));
            }
        };
        Tower::new(family)
    }
}

/// Parse a config file and build the tower in one step.
pub fn tower_from_json(text: &str) -> Result<Tower, TowerError> {
    TowerConfig::from_json(text)?.build()
}
