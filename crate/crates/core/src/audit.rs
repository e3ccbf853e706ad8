//! Reporting rows comparing `p_c` with the cover threshold `q`.

use serde::Serialize;

use crate::config::AuditConfig;
use crate::cover::{q_star, q_threshold};
use crate::error::Result;
use crate::family::MonotoneFamily;
use crate::measure::Analyzer;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapAuditRow {
    pub id: String,
    pub n: usize,
    pub p_c: f64,
    pub q: f64,
    pub q_star: Option<f64>,
    /// `p_c / q`, at least 1 up to rounding.
    pub ratio: f64,
    /// `p_c / (q ln n)`; absent for `n = 1`.
    pub normalized_gap_ln: Option<f64>,
    pub normalized_gap_log2: Option<f64>,
    pub k_gap: f64,
    /// `K ln n − ratio`; negative means the ratio exceeds `K ln n`.
    pub margin: Option<f64>,
    pub exceeds_k_ln_n: bool,
    pub log_base: &'static str,
}

/// Computes one audit row. `q*` is included when requested and the ground
/// set is within the automorphism cap.
pub fn gap_audit(
    id: &str,
    f: &MonotoneFamily,
    cfg: &AuditConfig,
    with_star: bool,
) -> Result<GapAuditRow> {
    cfg.validate()?;
    let analyzer = Analyzer::new(f, &cfg.caps)?;
    let p_c = analyzer.critical_probability(cfg.tol_root);
    let q = q_threshold(f, cfg.tol_root, &cfg.caps)?.q;
    let q_star = if with_star && f.n() <= cfg.caps.aut_cap {
        Some(q_star(f, cfg.tol_root, &cfg.caps)?.q)
    } else {
        None
    };
    let ratio = p_c / q;
    let n = f.n();
    let ln_n = (n as f64).ln();
    let (normalized_gap_ln, normalized_gap_log2, margin) = if n >= 2 {
        (
            Some(ratio / ln_n),
            Some(ratio / (n as f64).log2()),
            Some(cfg.k_gap * ln_n - ratio),
        )
    } else {
        (None, None, None)
    };
    Ok(GapAuditRow {
        id: id.to_string(),
        n,
        p_c,
        q,
        q_star,
        ratio,
        normalized_gap_ln,
        normalized_gap_log2,
        k_gap: cfg.k_gap,
        margin,
        exceeds_k_ln_n: margin.is_some_and(|m| m < 0.0),
        log_base: "e",
    })
}
