//! Constructors for standard families and the dual-tribes closed forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::MonotoneFamily;
use crate::subset::{binomial, Subset};

/// Largest number of minimal sets a generated family may have.
pub const MAX_GENERATED_MINIMAL: usize = 1 << 20;

/// Partition of `{0, .., n-1}` into `n / k` consecutive blocks of size `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TribesParams {
    n: usize,
    k: usize,
}

impl TribesParams {
    pub fn new(n: usize, k: usize) -> Result<TribesParams> {
        if k == 0 || n == 0 || !n.is_multiple_of(k) {
            return Err(Error::BadParameter(format!(
                "block size {k} must be positive and divide n = {n}"
            )));
        }
        Ok(TribesParams { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> usize {
        self.n / self.k
    }
}

/// `{S : S ⊇ R}`.
pub fn subcube(n: usize, r: Subset) -> Result<MonotoneFamily> {
    if r.is_empty() {
        return Err(Error::TrivialFamily("subcube of the empty set is 2^X"));
    }
    MonotoneFamily::from_sets(n, [r])
}

/// All sets meeting every block: minimal sets pick one element per block.
pub fn dual_tribes(params: TribesParams) -> Result<MonotoneFamily> {
    let (k, blocks) = (params.k, params.blocks());
    let count = (k as u128).checked_pow(blocks as u32).unwrap_or(u128::MAX);
    if count > MAX_GENERATED_MINIMAL as u128 || params.n > 64 {
        return Err(Error::TooManyMinimalSets {
            count: count.min(usize::MAX as u128) as usize,
            cap: MAX_GENERATED_MINIMAL,
        });
    }
    let mut sets = vec![Subset::EMPTY];
    for b in 0..blocks {
        sets = sets
            .into_iter()
            .flat_map(|s| (0..k).map(move |j| s.insert(b * k + j)))
            .collect();
    }
    MonotoneFamily::from_sets(params.n, sets)
}

/// Closed forms for dual tribes, with `blocks` allowed to be any positive
/// number of size-`k` blocks (the ground set is `k·blocks`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TribesClosedForms {
    pub m: f64,
    pub m_prime: f64,
    pub p_c: f64,
}

pub fn tribes_closed_form_blocks(blocks: usize, k: usize, p: f64) -> TribesClosedForms {
    let b = blocks as f64;
    let kf = k as f64;
    let hit = 1.0 - (1.0 - p).powi(k as i32);
    TribesClosedForms {
        m: hit.powf(b),
        m_prime: b * kf * hit.powf(b - 1.0) * (1.0 - p).powi(k as i32 - 1),
        p_c: 1.0 - (1.0 - 2f64.powf(-1.0 / b)).powf(1.0 / kf),
    }
}

/// `m(p) = (1-(1-p)^k)^(n/k)`, `m'(p) = n(1-(1-p)^k)^(n/k-1)(1-p)^(k-1)` and
/// `p_c = 1 - (1 - 2^(-k/n))^(1/k)`.
pub fn tribes_closed_forms(params: TribesParams, p: f64) -> TribesClosedForms {
    tribes_closed_form_blocks(params.blocks(), params.k, p)
}

/// Minimal sets are all subsets of size `(n+1)/2`.
pub fn majority(n: usize) -> Result<MonotoneFamily> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::BadParameter(format!(
            "majority needs odd n >= 3, got {n}"
        )));
    }
    if n > 64 || binomial(n, n.div_ceil(2)) > MAX_GENERATED_MINIMAL as u64 {
        return Err(Error::TooManyMinimalSets {
            count: binomial(n.min(64), n.div_ceil(2)).min(usize::MAX as u64) as usize,
            cap: MAX_GENERATED_MINIMAL,
        });
    }
    let k = n.div_ceil(2);
    let sets = (0..1u64 << n)
        .filter(|s| s.count_ones() as usize == k)
        .map(Subset);
    MonotoneFamily::from_sets(n, sets)
}

/// Options for [`random_monotone`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomFamilyOptions {
    /// Each drawn set has `Binomial(n, size_p)` elements (zero is redrawn).
    pub size_p: f64,
    pub max_attempts: usize,
}

impl Default for RandomFamilyOptions {
    fn default() -> Self {
        RandomFamilyOptions {
            size_p: 0.4,
            max_attempts: 10_000,
        }
    }
}

/// Draws `target` random sets and returns the family they generate.
///
/// Deterministic per seed; the result may have fewer minimal sets than
/// `target` once supersets are absorbed.
pub fn random_monotone(n: usize, target: usize, seed: u64) -> Result<MonotoneFamily> {
    random_monotone_with(n, target, seed, RandomFamilyOptions::default())
}

pub fn random_monotone_with(
    n: usize,
    target: usize,
    seed: u64,
    opts: RandomFamilyOptions,
) -> Result<MonotoneFamily> {
    if n == 0 || n > 64 {
        return Err(Error::BadParameter(format!("n = {n} not in 1..=64")));
    }
    if target == 0 {
        return Err(Error::BadParameter(
            "target minimal count must be positive".into(),
        ));
    }
    let sizes = Binomial::new(n as u64, opts.size_p)
        .map_err(|e| Error::BadParameter(format!("size distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets = Vec::with_capacity(target);
    let mut attempts = 0;
    while sets.len() < target {
        attempts += 1;
        if attempts > opts.max_attempts {
            return Err(Error::GenerationFailed(opts.max_attempts));
        }
        let size = sizes.sample(&mut rng) as usize;
        if size == 0 {
            continue;
        }
        sets.push(random_subset_of_size(&mut rng, n, size));
    }
    MonotoneFamily::from_sets(n, sets)
}

fn random_subset_of_size<R: Rng>(rng: &mut R, n: usize, size: usize) -> Subset {
    let picked = rand::seq::index::sample(rng, n, size);
    Subset::from_elems(picked.iter())
}

/// One evaluation point of the dual-tribes regime table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimePoint {
    pub p: f64,
    pub m: f64,
    /// `R(p) / log2(1/p)`, absent where the measure is degenerate.
    pub ratio_over_log: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TribesRegimeReport {
    pub n: usize,
    pub k: usize,
    pub blocks: usize,
    pub p_c: f64,
    pub p_c_in_range: bool,
    pub points: Vec<RegimePoint>,
}

/// Block size `round(log2 n - log2 log2 n)`.
pub fn regime_block_size(n: usize) -> usize {
    let l = (n as f64).log2();
    ((l - l.log2()).round() as usize).max(1)
}

/// Closed-form dual-tribes table at `k = round(log2 n - log2 log2 n)` with
/// `floor(n / k)` blocks, evaluated at `p = (log2 n)^-j` for `j = 1, 2, 3`.
pub fn tribes_regime_report(n: usize) -> Result<TribesRegimeReport> {
    if n < 4 {
        return Err(Error::BadParameter(format!(
            "regime report needs n >= 4, got {n}"
        )));
    }
    let k = regime_block_size(n);
    let blocks = n / k;
    let p_c = tribes_closed_form_blocks(blocks, k, 0.5).p_c;
    let log_n = (n as f64).log2();
    let points = (1..=3)
        .map(|j| {
            let p = log_n.powi(-j);
            let cf = tribes_closed_form_blocks(blocks, k, p);
            let ratio_over_log = (cf.m > 1e-12 && cf.m < 1.0 - 1e-12).then(|| {
                let r = p * cf.m_prime / (cf.m * (cf.m.ln() / p.ln()));
                r / (1.0 / p).log2()
            });
            RegimePoint {
                p,
                m: cf.m,
                ratio_over_log,
            }
        })
        .collect();
    Ok(TribesRegimeReport {
        n,
        k,
        blocks,
        p_c,
        p_c_in_range: p_c > 0.01 && p_c < 0.99,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Caps;
    use crate::measure::Analyzer;

    fn s(e: &[usize]) -> Subset {
        Subset::from_elems(e.iter().copied())
    }

    #[test]
    fn subcube_examples() {
        assert_eq!(
            subcube(4, s(&[0, 1])).unwrap().minimal_sets(),
            &[s(&[0, 1])]
        );
        assert_eq!(subcube(3, s(&[2])).unwrap().minimal_sets(), &[s(&[2])]);
        assert_eq!(
            subcube(2, s(&[0, 1])).unwrap().minimal_sets(),
            &[s(&[0, 1])]
        );
        assert!(matches!(
            subcube(3, Subset::EMPTY),
            Err(Error::TrivialFamily(_))
        ));
    }

    #[test]
    fn dual_tribes_examples() {
        let f = dual_tribes(TribesParams::new(4, 2).unwrap()).unwrap();
        assert_eq!(
            f.minimal_sets(),
            &[s(&[0, 2]), s(&[1, 2]), s(&[0, 3]), s(&[1, 3])]
        );
        let f = dual_tribes(TribesParams::new(2, 1).unwrap()).unwrap();
        assert_eq!(f.minimal_sets(), &[s(&[0, 1])]);
        let f = dual_tribes(TribesParams::new(3, 3).unwrap()).unwrap();
        assert_eq!(f.minimal_sets(), &[s(&[0]), s(&[1]), s(&[2])]);
        assert!(TribesParams::new(5, 2).is_err());
        assert!(matches!(
            dual_tribes(TribesParams::new(64, 2).unwrap()),
            Err(Error::TooManyMinimalSets { .. })
        ));
    }

    #[test]
    fn closed_form_examples() {
        let t = TribesParams::new(4, 2).unwrap();
        let cf = tribes_closed_forms(t, 0.5);
        assert!((cf.m - 0.5625).abs() < 1e-15);
        // mpmath: 1 - (1 - 2^(-1/2))^(1/2) = 0.45880389985380301560...
        assert!((cf.p_c - 0.458_803_899_853_803).abs() < 1e-14);
        assert!(tribes_closed_forms(t, 1e-9).m < 1e-15);
        let a = Analyzer::new(&dual_tribes(t).unwrap(), &Caps::default()).unwrap();
        assert!((a.critical_probability(1e-13) - cf.p_c).abs() < 1e-9);
    }

    #[test]
    fn majority_examples() {
        assert_eq!(majority(3).unwrap().minimal_sets().len(), 3);
        let m5 = majority(5).unwrap();
        assert_eq!(m5.minimal_sets().len(), 10);
        assert!(m5.minimal_sets().iter().all(|m| m.len() == 3));
        for n in [3, 5, 7, 9] {
            let a = Analyzer::new(&majority(n).unwrap(), &Caps::default()).unwrap();
            assert!((a.critical_probability(1e-12) - 0.5).abs() < 1e-9);
        }
        assert!(majority(4).is_err());
        assert!(majority(1).is_err());
    }

    #[test]
    fn random_family_is_deterministic() {
        let a = random_monotone(6, 4, 1).unwrap();
        let b = random_monotone(6, 4, 1).unwrap();
        assert_eq!(a, b);
        let single = random_monotone(3, 1, 9).unwrap();
        assert_eq!(single.minimal_sets().len(), 1);
        assert!(random_monotone(3, 0, 9).is_err());
    }

    #[test]
    fn regime_block_sizes() {
        assert_eq!(regime_block_size(16), 2);
        assert_eq!(regime_block_size(64), 3);
        assert_eq!(regime_block_size(256), 5);
        assert_eq!(regime_block_size(1024), 7);
    }

    #[test]
    fn regime_report_n16() {
        let r = tribes_regime_report(16).unwrap();
        assert_eq!((r.k, r.blocks), (2, 8));
        // mpmath: 1 - (1 - 2^(-1/8))^(1/2) = 0.71190981135184633...
        assert!((r.p_c - 0.711_909_811_351_846_3).abs() < 1e-13);
        assert!(r.p_c_in_range);
        let exact = Analyzer::new(
            &dual_tribes(TribesParams::new(16, 2).unwrap()).unwrap(),
            &Caps::default(),
        )
        .unwrap();
        assert!((exact.critical_probability(1e-13) - r.p_c).abs() < 1e-9);
    }
}
