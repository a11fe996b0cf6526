//! Machine-readable certification reports.
//!
//! Every floating value is serialized as a decimal string with 17
//! significant digits, enough to round-trip an f64 exactly. Reports carry no
//! timestamps, so identical inputs produce byte-identical output.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::dimension::DimensionTrace;
use crate::level::FrameCertification;
use crate::measure::{DeltaEmpirical, TailFloor};
use crate::ortho::{OrthogonalSearch, TripleAudit};

/// 17-significant-digit decimal string for an f64.
pub fn sig17(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct CertReport {
    pub version: String,
    pub command: String,
    pub tower: String,
    /// Tolerances and bounds echoed from the invocation, values as decimal
    /// strings.
    pub tolerances: Map<String, Value>,
    pub payload: Value,
    pub pass: bool,
}

impl CertReport {
    pub fn new(command: &str, tower: &str, payload: Value, pass: bool) -> Self {
        CertReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            tower: tower.to_string(),
            tolerances: Map::new(),
            payload,
            pass,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.tolerances.insert(key.to_string(), value.into());
        self
    }

    /// Canonical JSON: pretty-printed with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}

/// One row of the per-stage verification table.
#[derive(Debug, Clone)]
pub struct StageRow {
    pub j: usize,
    pub n: String,
    pub m: u64,
    pub k: String,
    pub alpha: u64,
    pub eps_analytic: f64,
    pub eps_measured: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub dev_op: f64,
    pub dev_frob: f64,
    pub unitary_max_dev: f64,
    pub pass: bool,
}

pub fn stage_payload(rows: &[StageRow]) -> Value {
    let stages: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "j": r.j,
                "N": r.n,
                "M": r.m,
                "K": r.k,
                "alpha": r.alpha,
                "eps_analytic": sig17(r.eps_analytic),
                "eps_measured": sig17(r.eps_measured),
                "sigma_min": sig17(r.sigma_min),
                "sigma_max": sig17(r.sigma_max),
                "dev_op": sig17(r.dev_op),
                "dev_frob": sig17(r.dev_frob),
                "unitary_max_dev": sig17(r.unitary_max_dev),
                "pass": r.pass,
            })
        })
        .collect();
    json!({ "stages": stages })
}

pub fn stage_csv(rows: &[StageRow]) -> String {
    let mut out = String::from(
        "j,N,M,K,alpha,eps_analytic,eps_measured,sigma_min,sigma_max,dev_op,dev_frob,unitary_max_dev,pass\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.j,
            r.n,
            r.m,
            r.k,
            r.alpha,
            sig17(r.eps_analytic),
            sig17(r.eps_measured),
            sig17(r.sigma_min),
            sig17(r.sigma_max),
            sig17(r.dev_op),
            sig17(r.dev_frob),
            sig17(r.unitary_max_dev),
            r.pass
        ));
    }
    out
}

pub fn frame_payload(cert: &FrameCertification) -> Value {
    let levels: Vec<Value> = cert
        .levels
        .iter()
        .map(|lc| {
            json!({
                "level": lc.n,
                "A": sig17(lc.a_weighted),
                "B": sig17(lc.b_weighted),
                "A_unweighted": sig17(lc.a_unweighted),
                "B_unweighted": sig17(lc.b_unweighted),
                "window": [sig17(lc.window_lo), sig17(lc.window_hi)],
                "delta_emp": sig17(lc.delta_emp),
                "eps_measured": lc.eps_measured.iter().map(|&e| sig17(e)).collect::<Vec<_>>(),
                "degenerate": lc.degenerate,
                "pass": lc.pass,
            })
        })
        .collect();
    json!({
        "levels": levels,
        "c0": sig17(cert.c0),
        "pass": cert.pass,
    })
}

pub fn delta_payload(floor: &TailFloor, emp: &DeltaEmpirical) -> Value {
    json!({
        "c0": sig17(floor.value),
        "c0_depth": floor.depth,
        "c0_tail_bound": sig17(floor.tail_bound),
        "empirical_min": sig17(emp.min),
        "argmin_level": emp.argmin_level,
        "argmin_freq": emp.argmin_freq.to_string(),
        "per_level": emp.per_level.iter().map(|&v| sig17(v)).collect::<Vec<_>>(),
        "gap": sig17(emp.min - floor.value),
    })
}

pub fn ortho_payload(search: &OrthogonalSearch, audit: Option<&TripleAudit>) -> Value {
    let cliques: Vec<Value> = search
        .maximum_cliques
        .iter()
        .map(|c| {
            Value::Array(
                c.iter()
                    .map(|&i| Value::String(search.pool[i].to_string()))
                    .collect(),
            )
        })
        .collect();
    let mut obj = json!({
        "pool_size": search.pool.len(),
        "j_max": search.j_max,
        "max_clique_size": search.max_clique_size,
        "maximum_cliques": cliques,
        "truncated_at_max_size": search.truncated_at_max_size,
    });
    if let Some(a) = audit {
        obj["triple_audit"] = json!({
            "triples_scanned": a.triples_scanned,
            "full_triples": a.full_triples.len(),
            "near_misses": a.near_misses,
            "parity_certified": a.certified,
        });
    }
    obj
}

pub fn dim_payload(trace: &DimensionTrace) -> Value {
    json!({
        "quotients": trace.quotients.iter().map(|&q| sig17(q)).collect::<Vec<_>>(),
        "liminf_estimate": sig17(trace.liminf_estimate),
        "window": trace.window,
        "closed_form_limit": trace.closed_form_limit.map(sig17),
    })
}

pub fn dim_csv(trace: &DimensionTrace) -> String {
    let mut out = String::from("j,logM_cum,logN_cum,q_j\n");
    for (i, &q) in trace.quotients.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            sig17(trace.log_m_cum[i]),
            sig17(trace.log_n_cum[i]),
            sig17(q)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::dimension_trace;
    use crate::tower::{Family, Tower};

    #[test]
    fn sig17_round_trips() {
        for x in [
            0.0,
            1.0,
            -1.0,
            std::f64::consts::PI,
            0.26036457985974294,
            1e-300,
            1e300,
            f64::MIN_POSITIVE,
        ] {
            let s = sig17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
        assert_eq!(sig17(f64::NAN), "NaN");
        assert_eq!(sig17(f64::INFINITY), "inf");
    }

    #[test]
    fn report_json_is_deterministic() {
        let make = || {
            CertReport::new("dim", "test tower", json!({"x": sig17(0.5)}), true)
                .with_param("jmax", "20")
                .to_json()
        };
        assert_eq!(make(), make());
        assert!(make().ends_with('\n'));
    }

    #[test]
    fn dim_csv_shape() {
        let t = Tower::new(Family::QuarterCantor).unwrap();
        let trace = dimension_trace(&t, 3, 1).unwrap();
        let csv = dim_csv(&trace);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "j,logM_cum,logN_cum,q_j");
        assert!(lines[1].starts_with("1,"));
        let q: f64 = lines[3].rsplit(',').next().unwrap().parse().unwrap();
        assert!((q - 0.5).abs() < 1e-14);
    }
}
