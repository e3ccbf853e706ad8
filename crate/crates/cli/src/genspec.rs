//! Generator specs such as `dual-tribes:8:2` accepted by `gen` and `audit`.

use std::str::FromStr;

use monothresh::generators::{dual_tribes, majority, random_monotone, subcube, TribesParams};
use monothresh::{Error, MonotoneFamily, Result, Subset};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenSpec {
    Subcube {
        n: usize,
        r: Vec<usize>,
    },
    DualTribes {
        n: usize,
        k: usize,
    },
    Majority {
        n: usize,
    },
    /// Seed comes from the spec if given, else from `--seed`.
    Random {
        n: usize,
        size: usize,
        seed: Option<u64>,
    },
}

fn bad(spec: &str) -> Error {
    Error::BadParameter(format!(
        "unrecognized generator spec {spec:?}; expected subcube:N:I,J,..  dual-tribes:N:K  \
         majority:N  random:N:SIZE[:SEED]"
    ))
}

fn num<T: FromStr>(s: &str, spec: &str) -> Result<T> {
    s.trim().parse().map_err(|_| bad(spec))
}

impl FromStr for GenSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<GenSpec> {
        let parts: Vec<&str> = spec.split(':').collect();
        match parts.as_slice() {
            ["subcube", n, r] => Ok(GenSpec::Subcube {
                n: num(n, spec)?,
                r: r.split(',').map(|x| num(x, spec)).collect::<Result<_>>()?,
            }),
            ["dual-tribes", n, k] => Ok(GenSpec::DualTribes {
                n: num(n, spec)?,
                k: num(k, spec)?,
            }),
            ["majority", n] => Ok(GenSpec::Majority { n: num(n, spec)? }),
            ["random", n, size] => Ok(GenSpec::Random {
                n: num(n, spec)?,
                size: num(size, spec)?,
                seed: None,
            }),
            ["random", n, size, seed] => Ok(GenSpec::Random {
                n: num(n, spec)?,
                size: num(size, spec)?,
                seed: Some(num(seed, spec)?),
            }),
            _ => Err(bad(spec)),
        }
    }
}

impl GenSpec {
    pub fn build(&self, default_seed: u64) -> Result<MonotoneFamily> {
        match self {
            GenSpec::Subcube { n, r } => {
                if let Some(&x) = r.iter().find(|&&x| x >= *n || x >= 64) {
                    return Err(Error::BadParameter(format!(
                        "index {x} out of range for n = {n}"
                    )));
                }
                subcube(*n, Subset::from_elems(r.iter().copied()))
            }
            GenSpec::DualTribes { n, k } => dual_tribes(TribesParams::new(*n, *k)?),
            GenSpec::Majority { n } => majority(*n),
            GenSpec::Random { n, size, seed } => {
                random_monotone(*n, *size, seed.unwrap_or(default_seed))
            }
        }
    }
}
