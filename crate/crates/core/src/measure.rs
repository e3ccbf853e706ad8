//! Product-measure analysis of monotone families: `μ_p`, its derivative,
//! critical probabilities, influences, the edge-isoperimetric gap and the
//! `(C, p)`-optimality ratio.
//!
//! All exact quantities are polynomials in `p` whose coefficients are subset
//! counts gathered once by full enumeration; see [`Analyzer`].

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use serde::Serialize;

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::family::{MonotoneFamily, SetFamily};
use crate::subset::Subset;

/// Measures below this (or above one minus this) make `log_p m` meaningless.
pub const DEGENERACY: f64 = 1e-12;

/// Maximum bisection steps for the critical probability.
const PC_MAX_ITERS: usize = 200;

/// Evaluates `Σ_k c_k p^k (1-p)^(deg-k)` with non-negative-ratio Horner steps.
pub fn bernstein_sum(coeffs: &[f64], p: f64) -> f64 {
    let deg = coeffs.len() - 1;
    if p <= 0.5 {
        let q = 1.0 - p;
        let r = p / q;
        let acc = coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c);
        acc * q.powi(deg as i32)
    } else {
        let s = (1.0 - p) / p;
        let acc = coeffs.iter().fold(0.0, |acc, &c| acc * s + c);
        acc * p.powi(deg as i32)
    }
}

/// Base-independent `log_p x`.
pub fn log_base(p: f64, x: f64) -> f64 {
    x.ln() / p.ln()
}

fn is_degenerate(m: f64) -> bool {
    !(m > DEGENERACY && m < 1.0 - DEGENERACY)
}

/// Precomputed exact counts for one family.
#[derive(Debug, Clone)]
pub struct Analyzer {
    n: usize,
    /// `a_k`: members of size `k`.
    level: Vec<u64>,
    /// `d_j = (j+1) a_{j+1} - (n-j) a_j`: the lower-boundary count, i.e. the
    /// number of pairs `(T, i)` with `|T| = j`, `i ∉ T`, `T ∉ F`, `T+i ∈ F`.
    boundary: Vec<u64>,
    /// Same count split per coordinate.
    pivotal: Vec<Vec<u64>>,
}

impl Analyzer {
    pub fn new(family: &MonotoneFamily, caps: &Caps) -> Result<Analyzer> {
        let membership = family.membership(caps)?;
        let n = family.n();
        let mut level = vec![0u64; n + 1];
        let mut pivotal = vec![vec![0u64; n.max(1)]; n];
        for s in membership.members() {
            level[s.count_ones() as usize] += 1;
            let size = s.count_ones() as usize;
            for i in Subset(s).iter() {
                if !membership.contains(s & !(1u64 << i)) {
                    pivotal[i][size - 1] += 1;
                }
            }
        }
        let boundary = (0..n)
            .map(|j| pivotal.iter().map(|row| row[j]).sum())
            .collect();
        Ok(Analyzer {
            n,
            level,
            boundary,
            pivotal,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level_counts(&self) -> &[u64] {
        &self.level
    }

    pub fn mu(&self, p: f64) -> f64 {
        let c: Vec<f64> = self.level.iter().map(|&a| a as f64).collect();
        bernstein_sum(&c, p)
    }

    /// Analytic derivative of [`mu`](Self::mu).
    pub fn mu_derivative(&self, p: f64) -> f64 {
        // d/dp Σ a_k p^k (1-p)^(n-k) = Σ_j ((j+1) a_{j+1} - (n-j) a_j) p^j (1-p)^(n-1-j)
        let n = self.n as i128;
        let c: Vec<f64> = (0..self.n)
            .map(|j| {
                let j = j as i128;
                ((j + 1) * self.level[(j + 1) as usize] as i128
                    - (n - j) * self.level[j as usize] as i128) as f64
            })
            .collect();
        bernstein_sum(&c, p)
    }

    /// Total and per-coordinate influence from the pivotality counts.
    pub fn influence(&self, p: f64) -> (f64, Vec<f64>) {
        let per: Vec<f64> = self
            .pivotal
            .iter()
            .map(|row| {
                let c: Vec<f64> = row.iter().map(|&x| x as f64).collect();
                bernstein_sum(&c, p)
            })
            .collect();
        (per.iter().sum(), per)
    }

    pub fn total_influence(&self, p: f64) -> f64 {
        let c: Vec<f64> = self.boundary.iter().map(|&x| x as f64).collect();
        bernstein_sum(&c, p)
    }

    pub fn critical_probability(&self, tol: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..PC_MAX_ITERS {
            if hi - lo < tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.mu(mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `p·I_p(F) - m·log_p m`.
    pub fn iso_gap(&self, p: f64) -> Result<f64> {
        let m = self.mu(p);
        if is_degenerate(m) || !(p > 0.0 && p < 1.0) {
            return Err(Error::DegenerateMeasure(m));
        }
        Ok(p * self.total_influence(p) - m * log_base(p, m))
    }

    /// `p·m'(p) / (m·log_p m)`; at least one by the isoperimetric inequality.
    pub fn optimality_ratio(&self, p: f64) -> Result<f64> {
        let m = self.mu(p);
        if is_degenerate(m) || !(p > 0.0 && p < 1.0) {
            return Err(Error::DegenerateMeasure(m));
        }
        Ok(p * self.mu_derivative(p) / (m * log_base(p, m)))
    }

    pub fn report(&self, p: f64) -> AnalysisReport {
        let m = self.mu(p);
        AnalysisReport {
            p,
            m,
            m_prime: self.mu_derivative(p),
            influence: self.total_influence(p),
            iso_gap: self.iso_gap(p).ok(),
            optimality_ratio: self.optimality_ratio(p).ok(),
        }
    }
}

/// One row of a p-grid analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub p: f64,
    pub m: f64,
    pub m_prime: f64,
    pub influence: f64,
    /// `None` where the measure is degenerate.
    pub iso_gap: Option<f64>,
    pub optimality_ratio: Option<f64>,
}

pub const SWEEP_CSV_HEADER: &str = "p,m,dm_dp,influence,iso_gap,optimality_ratio";

/// Formats like C's `%.12g`.
pub fn format_sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_zeros(&fixed)
    } else {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

impl AnalysisReport {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(format_sig12).unwrap_or_else(|| "nan".into());
        format!(
            "{},{},{},{},{},{}",
            format_sig12(self.p),
            format_sig12(self.m),
            format_sig12(self.m_prime),
            format_sig12(self.influence),
            opt(self.iso_gap),
            opt(self.optimality_ratio)
        )
    }
}

/// Renders rows as CSV with the fixed header.
pub fn sweep_csv(rows: &[AnalysisReport]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::DomainError(format!("p = {p} not in [0, 1]")));
    }
    Ok(())
}

pub fn mu(family: &MonotoneFamily, p: f64, caps: &Caps) -> Result<f64> {
    check_p(p)?;
    Ok(Analyzer::new(family, caps)?.mu(p))
}

pub fn mu_derivative(family: &MonotoneFamily, p: f64, caps: &Caps) -> Result<f64> {
    check_p(p)?;
    Ok(Analyzer::new(family, caps)?.mu_derivative(p))
}

/// Exact `μ_p(F)` in rational arithmetic, for cross-checking the float path.
pub fn mu_exact(family: &MonotoneFamily, p: &BigRational, caps: &Caps) -> Result<BigRational> {
    let profile = family.level_profile(caps)?;
    let n = profile.n();
    let q = BigRational::one() - p;
    let mut total = BigRational::zero();
    for (k, &a) in profile.counts.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let term = num::pow(p.clone(), k) * num::pow(q.clone(), n - k);
        total += term * BigRational::from_integer(BigInt::from(a));
    }
    Ok(total)
}

/// Converts a float probability into an exact rational.
pub fn exact_probability(p: f64) -> BigRational {
    BigRational::from_float(p).expect("finite probability")
}

pub fn critical_probability(family: &MonotoneFamily, tol: f64, caps: &Caps) -> Result<f64> {
    Ok(Analyzer::new(family, caps)?.critical_probability(tol))
}

pub fn influence(family: &MonotoneFamily, p: f64, caps: &Caps) -> Result<(f64, Vec<f64>)> {
    check_p(p)?;
    Ok(Analyzer::new(family, caps)?.influence(p))
}

/// `|I_p(F) - m'(p)|`, which vanishes for monotone families.
pub fn russo_check(family: &MonotoneFamily, p: f64, caps: &Caps) -> Result<f64> {
    check_p(p)?;
    let a = Analyzer::new(family, caps)?;
    Ok((a.influence(p).0 - a.mu_derivative(p)).abs())
}

pub fn iso_gap(family: &MonotoneFamily, p: f64, caps: &Caps) -> Result<f64> {
    Analyzer::new(family, caps)?.iso_gap(p)
}

pub fn optimality_ratio(family: &MonotoneFamily, p: f64, caps: &Caps) -> Result<f64> {
    Analyzer::new(family, caps)?.optimality_ratio(p)
}

/// Whether `p·m'(p) ≤ C·m·log_p m`.
pub fn is_c_p_optimal(family: &MonotoneFamily, p: f64, c: f64, caps: &Caps) -> Result<bool> {
    Ok(optimality_ratio(family, p, caps)? <= c)
}

/// `Σ_{S ∈ F} μ_p(S) · |{i ∈ S : S \ i ∉ F}|`, summed subset by subset.
pub fn boundary_sum(family: &MonotoneFamily, p: f64, caps: &Caps) -> Result<f64> {
    check_p(p)?;
    let membership = family.membership(caps)?;
    let n = family.n() as i32;
    let mut total = 0.0;
    for s in membership.members() {
        let size = s.count_ones() as i32;
        let lower = Subset(s)
            .iter()
            .filter(|&i| !membership.contains(s & !(1u64 << i)))
            .count();
        total += lower as f64 * p.powi(size) * (1.0 - p).powi(n - size);
    }
    Ok(total)
}

/// Witness for the near-optimality sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepWitness {
    pub p: f64,
    /// The constant `C`; the bound checked is `C·log2(1/p)`.
    pub c_used: f64,
    pub ratio: f64,
    pub bound: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Number of geometric grid points scanned by the sweeps.
pub const SWEEP_POINTS: usize = 1000;

/// Geometric grid from `upper` down to `lower`, both endpoints included.
pub fn geometric_grid(lower: f64, upper: f64, points: usize) -> Vec<f64> {
    if points <= 1 || lower >= upper {
        return vec![upper];
    }
    let ratio = (lower / upper).ln() / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i == points - 1 {
                lower
            } else {
                upper * (ratio * i as f64).exp()
            }
        })
        .collect()
}

fn scan_for_optimal(a: &Analyzer, lower: f64, upper: f64, c: f64) -> Option<SweepWitness> {
    geometric_grid(lower, upper, SWEEP_POINTS)
        .into_iter()
        .find_map(|p| {
            let ratio = a.optimality_ratio(p).ok()?;
            let bound = c * (1.0 / p).log2();
            (ratio <= bound).then_some(SweepWitness {
                p,
                c_used: c,
                ratio,
                bound,
                lower,
                upper,
            })
        })
}

/// The optimality constant used by [`optimal_p_sweep`]: `2 / (eps·ln 2)`.
pub fn sweep_constant(eps: f64) -> f64 {
    2.0 / (eps * std::f64::consts::LN_2)
}

/// Finds `p ∈ [n^-eps·p_c, p_c]` at which the family is
/// `(C·log2(1/p), p)`-optimal with `C = 2/(eps·ln 2)`.
///
/// The scan runs downward from `p_c`, so the largest qualifying grid point is
/// returned. Such a point always exists; failure indicates a bug.
pub fn optimal_p_sweep(a: &Analyzer, eps: f64, tol: f64) -> Result<SweepWitness> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::DomainError(format!("eps = {eps} not in (0, 1]")));
    }
    let pc = a.critical_probability(tol);
    let lower = (a.n() as f64).powf(-eps) * pc;
    let c = sweep_constant(eps);
    scan_for_optimal(a, lower, pc, c).ok_or_else(|| {
        Error::SweepFailed(format!(
            "no p in [{lower}, {pc}] satisfies R(p) <= {c}·log2(1/p)"
        ))
    })
}

/// Report of the scan over `[eps·p_c / log2 n, p_c]` with a user constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WideScanReport {
    pub lower: f64,
    pub upper: f64,
    pub c: f64,
    pub witness: Option<SweepWitness>,
}

pub fn wide_optimality_scan(a: &Analyzer, eps: f64, c: f64, tol: f64) -> WideScanReport {
    let pc = a.critical_probability(tol);
    let log_n = (a.n().max(2) as f64).log2();
    let lower = (eps * pc / log_n).min(pc);
    WideScanReport {
        lower,
        upper: pc,
        c,
        witness: scan_for_optimal(a, lower, pc, c),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Conditioning {
    /// Condition on `S ⊇ R`.
    Superset,
    /// Condition on `S ∩ R = ∅`.
    Disjoint,
}

/// `μ_p(S ∈ F | S ⊇ R)` or `μ_p(S ∈ F | S ∩ R = ∅)` by enumeration.
pub fn conditional_mu(
    family: &MonotoneFamily,
    p: f64,
    r: Subset,
    mode: Conditioning,
    caps: &Caps,
) -> Result<f64> {
    check_p(p)?;
    let n = family.n();
    if !r.is_subset_of(Subset::full(n)) {
        return Err(Error::DomainError(
            "conditioning set outside ground set".into(),
        ));
    }
    if !r.is_empty() {
        let zero_prob = match mode {
            Conditioning::Superset => p == 0.0,
            Conditioning::Disjoint => p == 1.0,
        };
        if zero_prob {
            return Err(Error::DomainError(
                "conditioning event has probability zero".into(),
            ));
        }
    }
    let membership = family.membership(caps)?;
    let free = r.complement(n);
    let base = match mode {
        Conditioning::Superset => r.bits(),
        Conditioning::Disjoint => 0,
    };
    let mut counts = vec![0.0f64; free.len() + 1];
    let mut t = 0u64;
    loop {
        if membership.contains(base | t) {
            counts[t.count_ones() as usize] += 1.0;
        }
        if t == free.bits() {
            break;
        }
        t = (t.wrapping_sub(free.bits())) & free.bits();
    }
    Ok(bernstein_sum(&counts, p))
}

/// Residuals of `μ_{1-p}(F*) = 1 - μ_p(F)` and `I_{1-p}(F*) = I_p(F)`.
pub fn duality_identities(family: &MonotoneFamily, p: f64, caps: &Caps) -> Result<(f64, f64)> {
    check_p(p)?;
    let dual = family.dual(caps)?;
    let a = Analyzer::new(family, caps)?;
    let d = Analyzer::new(&dual, caps)?;
    let res_mu = (d.mu(1.0 - p) - (1.0 - a.mu(p))).abs();
    let res_inf = (d.total_influence(1.0 - p) - a.total_influence(p)).abs();
    Ok((res_mu, res_inf))
}

/// `μ_p(F △ ⟨G⟩) / μ_p(F)` for a user-supplied generator.
pub fn symmetric_difference_ratio(
    family: &MonotoneFamily,
    g: &SetFamily,
    p: f64,
    caps: &Caps,
) -> Result<f64> {
    check_p(p)?;
    if g.n() != family.n() {
        return Err(Error::BadParameter("ground sets differ".into()));
    }
    let f = family.membership(caps)?;
    let n = family.n();
    let mut counts = vec![0.0f64; n + 1];
    for s in 0..(1u64 << n) {
        let in_g = g.sets().iter().any(|a| a.bits() & !s == 0);
        if f.contains(s) != in_g {
            counts[s.count_ones() as usize] += 1.0;
        }
    }
    let m = bernstein_sum(
        &f.level_profile()
            .counts
            .iter()
            .map(|&c| c as f64)
            .collect::<Vec<_>>(),
        p,
    );
    Ok(bernstein_sum(&counts, p) / m)
}

/// Left side minus right side of the two-point inequality at the heart of
/// the inductive proof of `p·I ≥ m·log_p m`:
///
/// `(1-p)α log_p α + pβ log_p β + p(β-α) - ((1-p)α + pβ) log_p((1-p)α + pβ)`.
pub fn iso_lemma_gap(alpha: f64, beta: f64, p: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= beta && beta <= 1.0) {
        return Err(Error::DomainError(format!(
            "need 0 < alpha <= beta <= 1, got alpha = {alpha}, beta = {beta}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DomainError(format!("p = {p} not in (0, 1)")));
    }
    let mix = (1.0 - p) * alpha + p * beta;
    Ok(
        (1.0 - p) * alpha * log_base(p, alpha) + p * beta * log_base(p, beta) + p * (beta - alpha)
            - mix * log_base(p, mix),
    )
}

/// Lossy conversion used by reports.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(e: &[usize]) -> Subset {
        Subset::from_elems(e.iter().copied())
    }

    fn fam(n: usize, sets: &[&[usize]]) -> MonotoneFamily {
        MonotoneFamily::from_sets(n, sets.iter().map(|e| s(e))).unwrap()
    }

    fn majority3() -> MonotoneFamily {
        fam(3, &[&[0, 1], &[0, 2], &[1, 2]])
    }

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn mu_examples() {
        assert!((mu(&majority3(), 0.5, &caps()).unwrap() - 0.5).abs() < 1e-15);
        for n in [2, 5, 9] {
            let cube = fam(n, &[&[0, 1]]);
            assert!((mu(&cube, 0.3, &caps()).unwrap() - 0.09).abs() < 1e-15);
        }
        let f = fam(3, &[&[0], &[1, 2]]);
        assert!((mu(&f, 0.5, &caps()).unwrap() - 0.625).abs() < 1e-15);
        let a = Analyzer::new(&f, &caps()).unwrap();
        assert_eq!(a.mu(0.0), 0.0);
        assert_eq!(a.mu(1.0), 1.0);
    }

    #[test]
    fn mu_matches_exact_rational() {
        let f = fam(7, &[&[0, 1, 2], &[3, 4], &[1, 5, 6]]);
        for p in [0.05, 0.3, 0.5, 0.77, 0.99] {
            let exact = mu_exact(&f, &exact_probability(p), &caps()).unwrap();
            let float = mu(&f, p, &caps()).unwrap();
            assert!((rational_to_f64(&exact) - float).abs() < 1e-15, "p = {p}");
        }
    }

    #[test]
    fn derivative_examples() {
        assert!((mu_derivative(&majority3(), 0.5, &caps()).unwrap() - 1.5).abs() < 1e-14);
        let cube = fam(4, &[&[0, 1]]);
        assert!((mu_derivative(&cube, 0.3, &caps()).unwrap() - 0.6).abs() < 1e-14);
        let f = fam(6, &[&[0, 1], &[2, 3, 4], &[1, 5]]);
        let a = Analyzer::new(&f, &caps()).unwrap();
        let h = 1e-6;
        for p in [0.1, 0.4, 0.8] {
            let fd = (a.mu(p + h) - a.mu(p - h)) / (2.0 * h);
            assert!((fd - a.mu_derivative(p)).abs() < 1e-4);
        }
    }

    #[test]
    fn critical_probability_examples() {
        let tol = 1e-12;
        assert!((critical_probability(&majority3(), tol, &caps()).unwrap() - 0.5).abs() < 1e-9);
        let cube = fam(2, &[&[0, 1]]);
        let pc = critical_probability(&cube, tol, &caps()).unwrap();
        assert!((pc - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        // dual tribes with blocks {0,1}, {2,3}
        let tribes = fam(4, &[&[0, 2], &[0, 3], &[1, 2], &[1, 3]]);
        let pc = critical_probability(&tribes, tol, &caps()).unwrap();
        assert!((pc - 0.458_803_899_853_803).abs() < 1e-9);
    }

    #[test]
    fn influence_examples() {
        let (total, per) = influence(&majority3(), 0.5, &caps()).unwrap();
        assert!((total - 1.5).abs() < 1e-15);
        assert!(per.iter().all(|&x| (x - 0.5).abs() < 1e-15));
        let dict = fam(4, &[&[0]]);
        let (total, per) = influence(&dict, 0.37, &caps()).unwrap();
        assert!((total - 1.0).abs() < 1e-15);
        assert_eq!(per[1..], [0.0, 0.0, 0.0]);
        let cube = fam(5, &[&[0, 1]]);
        assert!((influence(&cube, 0.3, &caps()).unwrap().0 - 0.6).abs() < 1e-15);
    }

    #[test]
    fn russo_examples() {
        assert!(russo_check(&majority3(), 0.5, &caps()).unwrap() < 1e-15);
        assert!(russo_check(&fam(3, &[&[0]]), 0.7, &caps()).unwrap() < 1e-15);
    }

    #[test]
    fn iso_gap_examples() {
        let cube = fam(4, &[&[0, 1]]);
        assert!(iso_gap(&cube, 0.4, &caps()).unwrap().abs() < 1e-15);
        assert!(iso_gap(&fam(3, &[&[0]]), 0.5, &caps()).unwrap().abs() < 1e-15);
        assert!((iso_gap(&majority3(), 0.5, &caps()).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(
            iso_gap(&cube, 1e-7, &caps()),
            Err(Error::DegenerateMeasure(_))
        ));
    }

    #[test]
    fn optimality_ratio_examples() {
        let cube = fam(5, &[&[1, 3, 4]]);
        for p in [0.1, 0.5, 0.9] {
            assert!((optimality_ratio(&cube, p, &caps()).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((optimality_ratio(&majority3(), 0.5, &caps()).unwrap() - 1.5).abs() < 1e-14);
        assert!(is_c_p_optimal(&majority3(), 0.5, 1.5 + 1e-12, &caps()).unwrap());
        assert!(!is_c_p_optimal(&majority3(), 0.5, 1.4, &caps()).unwrap());
    }

    #[test]
    fn sweep_examples() {
        let dict = fam(3, &[&[0]]);
        let a = Analyzer::new(&dict, &caps()).unwrap();
        let w = optimal_p_sweep(&a, 0.5, 1e-12).unwrap();
        assert!((w.p - 0.5).abs() < 1e-9);
        let maj = Analyzer::new(&majority3(), &caps()).unwrap();
        let w = optimal_p_sweep(&maj, 0.5, 1e-12).unwrap();
        assert!(w.p >= 3f64.powf(-0.5) * 0.5 - 1e-12 && w.p <= 0.5 + 1e-9);
        assert!(w.ratio <= w.c_used * (1.0 / w.p).log2());
        assert!(optimal_p_sweep(&maj, 0.0, 1e-12).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = geometric_grid(0.1, 0.5, 1000);
        assert_eq!(g.len(), 1000);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[999], 0.1);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn conditional_examples() {
        let dict = fam(3, &[&[0]]);
        for p in [0.2, 0.6] {
            let v = conditional_mu(&dict, p, s(&[0]), Conditioning::Superset, &caps()).unwrap();
            assert!((v - 1.0).abs() < 1e-15);
        }
        let maj = majority3();
        let sup = conditional_mu(&maj, 0.5, s(&[0]), Conditioning::Superset, &caps()).unwrap();
        assert!((sup - 0.75).abs() < 1e-15);
        let dis = conditional_mu(&maj, 0.5, s(&[0]), Conditioning::Disjoint, &caps()).unwrap();
        assert!((dis - 0.25).abs() < 1e-15);
        let none =
            conditional_mu(&maj, 0.3, Subset::EMPTY, Conditioning::Disjoint, &caps()).unwrap();
        assert!((none - mu(&maj, 0.3, &caps()).unwrap()).abs() < 1e-15);
        assert!(conditional_mu(&maj, 0.0, s(&[0]), Conditioning::Superset, &caps()).is_err());
    }

    #[test]
    fn duality_examples() {
        let (a, b) = duality_identities(&majority3(), 0.3, &caps()).unwrap();
        assert!(a < 1e-15 && b < 1e-15);
        let (a, b) = duality_identities(&fam(2, &[&[0, 1]]), 0.4, &caps()).unwrap();
        assert!(a < 1e-15 && b < 1e-15);
    }

    #[test]
    fn symmetric_difference_of_self_is_zero() {
        let maj = majority3();
        let r = symmetric_difference_ratio(&maj, &maj.as_set_family(), 0.4, &caps()).unwrap();
        assert_eq!(r, 0.0);
        let g = SetFamily::new(3, [s(&[0])]).unwrap();
        // F △ ⟨{0}⟩ = {{0}, {1,2}}
        let r = symmetric_difference_ratio(&maj, &g, 0.5, &caps()).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lemma_examples() {
        assert!(iso_lemma_gap(0.3, 0.3, 0.5).unwrap().abs() < 1e-15);
        for p in [0.1, 0.5, 0.9] {
            assert!(iso_lemma_gap(1.0, 1.0, p).unwrap().abs() < 1e-15);
        }
        // mpmath at 40 digits: 0.16096404744368118287...
        let v = iso_lemma_gap(0.2, 0.8, 0.5).unwrap();
        assert!((v - 0.160_964_047_443_681_18).abs() < 1e-14);
        assert!(iso_lemma_gap(0.5, 0.4, 0.5).is_err());
        assert!(iso_lemma_gap(0.2, 0.4, 1.0).is_err());
    }

    #[test]
    fn boundary_identity_for_majority() {
        let maj = majority3();
        let p = 0.37;
        let b = boundary_sum(&maj, p, &caps()).unwrap();
        let a = Analyzer::new(&maj, &caps()).unwrap();
        assert!((b - p * a.total_influence(p)).abs() < 1e-15);
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(format_sig12(0.5), "0.5");
        assert_eq!(format_sig12(1.5), "1.5");
        assert_eq!(format_sig12(0.0), "0");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(2.0f64.sqrt() * 1e-7), "1.41421356237e-07");
        assert_eq!(format_sig12(-0.25), "-0.25");
        assert_eq!(format_sig12(123456.0), "123456");
    }

    #[test]
    fn csv_has_exact_header() {
        let a = Analyzer::new(&majority3(), &caps()).unwrap();
        let csv = sweep_csv(&[a.report(0.5)]);
        assert_eq!(
            csv,
            "p,m,dm_dp,influence,iso_gap,optimality_ratio\n0.5,0.5,1.5,1.5,0.25,1.5\n"
        );
    }
}
