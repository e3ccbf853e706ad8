use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard ceiling for any operation that enumerates all `2^n` subsets.
pub const HARD_ENUM_CAP: usize = 30;

/// Size limits for the exact (exponential) algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    /// Ground-set cap for full subset enumeration (level profile, influence).
    pub enum_cap: usize,
    /// Ground-set cap for dualization.
    pub dual_cap: usize,
    /// Cap on the number of minimal sets handed to the exact cover solver.
    pub cover_cap: usize,
    /// Ground-set cap for the brute-force automorphism search.
    pub aut_cap: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            enum_cap: 24,
            dual_cap: 20,
            cover_cap: 64,
            aut_cap: 10,
        }
    }
}

impl Caps {
    /// Returns the effective enumeration cap, never above [`HARD_ENUM_CAP`].
    pub fn enumeration(&self) -> usize {
        self.enum_cap.min(HARD_ENUM_CAP)
    }

    pub(crate) fn check_enum(&self, n: usize) -> Result<()> {
        let cap = self.enumeration();
        if n > cap {
            return Err(Error::GroundSetTooLarge { n, cap });
        }
        Ok(())
    }
}

/// Free constants and tolerances used by the audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    /// Width parameter of the near-optimality sweep, in `(0, 1]`.
    pub eps: f64,
    /// Optimality constant `C`.
    pub c_opt: f64,
    /// Constant `K` in the `p_c < K·q·ln n` gap comparison.
    pub k_gap: f64,
    /// Boost `delta` for conditional-measure probes.
    pub delta: f64,
    /// Constants of the tree bracket.
    pub k1: f64,
    pub k2: f64,
    /// Bisection tolerance on `p`.
    pub tol_root: f64,
    pub caps: Caps,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            eps: 0.5,
            c_opt: 1.0,
            k_gap: 1.0,
            delta: 0.1,
            k1: 1.0,
            k2: 1.0,
            tol_root: 1e-9,
            caps: Caps::default(),
            seed: 0,
        }
    }
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::BadParameter(format!(
                "eps = {} not in (0, 1]",
                self.eps
            )));
        }
        for (name, v) in [
            ("c_opt", self.c_opt),
            ("k_gap", self.k_gap),
            ("delta", self.delta),
            ("k1", self.k1),
            ("k2", self.k2),
            ("tol_root", self.tol_root),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::BadParameter(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        Ok(())
    }
}
