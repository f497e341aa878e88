//! The named checks and the registry tying each to the statement it tests.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Tame,
    Admissible,
    Doubling,
    Midpoint,
    Cubes,
    Chains,
    Isoperimetry,
    Bmo,
    Sharp,
    Jn,
    H1,
    Glue,
    Rdi,
    Fs,
    Kernel,
}

/// One registry entry: a stable anchor id and a plain statement of what the
/// check certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Anchor {
    pub check: Check,
    pub id: &'static str,
    pub statement: &'static str,
}

pub const REGISTRY: &[Anchor] = &[
    Anchor {
        check: Check::Tame,
        id: "tame-weight",
        statement: "the conformal factor is comparable on Euclidean balls of fixed radius",
    },
    Anchor {
        check: Check::Admissible,
        id: "admissible-weight",
        statement: "the weight is tame, its gradient diverges, the Hessian is small against the squared gradient \
                    and the gradient points outward far from the origin",
    },
    Anchor {
        check: Check::Doubling,
        id: "local-doubling",
        statement: "the measure is doubling on balls of radius at most b",
    },
    Anchor {
        check: Check::Midpoint,
        id: "approximate-midpoint",
        statement: "every pair at distance above R0 has a point within beta times their distance of both",
    },
    Anchor {
        check: Check::Cubes,
        id: "dyadic-cube-axioms",
        statement: "the cube levels are nested partitions with inner balls of radius a0 delta^k \
                    and diameters at most C1 delta^k",
    },
    Anchor {
        check: Check::Chains,
        id: "chain-length-bound",
        statement: "net centers are joined by ball chains of length at most 4 (2d/b)^(1/(1 - log2(1 + beta))) + 1",
    },
    Anchor {
        check: Check::Isoperimetry,
        id: "complementary-isoperimetry",
        statement: "sets away from B0 have boundary layers of mass at least a fixed multiple of the layer width, \
                    giving layer growth and exponential decay of ball complements",
    },
    Anchor {
        check: Check::Bmo,
        id: "bmo-scale-independence",
        statement: "the local BMO norms at two admissible scales are comparable and monotone in the scale",
    },
    Anchor {
        check: Check::Sharp,
        id: "sharp-function-supremum",
        statement: "the supremum of the local sharp function is the local BMO norm with exponent 1",
    },
    Anchor {
        check: Check::Jn,
        id: "john-nirenberg-decay",
        statement: "the distribution of a BMO function about its ball mean decays exponentially",
    },
    Anchor {
        check: Check::H1,
        id: "atomic-duality",
        statement: "integrable mean-zero functions split into atoms, and pairing with BMO is bounded by \
                    the BMO norm times the atomic coefficient sum",
    },
    Anchor {
        check: Check::Glue,
        id: "local-gluing",
        statement: "local representatives consistent up to constants glue into one function, \
                    with corrections controlled by chain length",
    },
    Anchor {
        check: Check::Rdi,
        id: "relative-distributional-inequality",
        statement: "the level sets of the dyadic maximal function where the sharp function is small \
                    are a fixed fraction of a wider level set",
    },
    Anchor {
        check: Check::Fs,
        id: "sharp-maximal-lower-bound",
        statement: "the L^p norm is controlled by the L^1 norm plus the L^p norm of the sharp function",
    },
    Anchor {
        check: Check::Kernel,
        id: "singular-integral-atoms",
        statement: "kernels with finite Hormander-type constants map atoms to uniformly integrable functions",
    },
];

impl Check {
    pub const ALL: [Check; 15] = [
        Check::Tame,
        Check::Admissible,
        Check::Doubling,
        Check::Midpoint,
        Check::Cubes,
        Check::Chains,
        Check::Isoperimetry,
        Check::Bmo,
        Check::Sharp,
        Check::Jn,
        Check::H1,
        Check::Glue,
        Check::Rdi,
        Check::Fs,
        Check::Kernel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Tame => "tame",
            Check::Admissible => "admissible",
            Check::Doubling => "doubling",
            Check::Midpoint => "midpoint",
            Check::Cubes => "cubes",
            Check::Chains => "chains",
            Check::Isoperimetry => "isoperimetry",
            Check::Bmo => "bmo",
            Check::Sharp => "sharp",
            Check::Jn => "jn",
            Check::H1 => "h1",
            Check::Glue => "glue",
            Check::Rdi => "rdi",
            Check::Fs => "fs",
            Check::Kernel => "kernel",
        }
    }

    pub fn anchor(self) -> &'static Anchor {
        REGISTRY.iter().find(|a| a.check == self).unwrap()
    }

    /// Needs the weight itself, not only the discretized space.
    pub fn needs_weight(self) -> bool {
        matches!(self, Check::Tame | Check::Admissible)
    }

    /// Needs the nets and the cube tree.
    pub fn needs_cubes(self) -> bool {
        matches!(
            self,
            Check::Cubes | Check::Chains | Check::H1 | Check::Glue | Check::Rdi | Check::Fs
        )
    }

    /// Needs the isoperimetric constant.
    pub fn needs_isoperimetry(self) -> bool {
        matches!(self, Check::Isoperimetry | Check::Rdi)
    }

    /// Salt mixed into the seed so each check draws its own stream.
    pub(crate) fn salt(self) -> u64 {
        Check::ALL.iter().position(|&c| c == self).unwrap() as u64 + 1
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Check::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Check::ALL.iter().map(|c| c.name()).collect();
                Error::Configuration(format!("unknown check {s:?}; known: {}", known.join(", ")))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn every_check_has_one_anchor() {
        assert_eq!(REGISTRY.len(), Check::ALL.len());
        let ids: HashSet<&str> = REGISTRY.iter().map(|a| a.id).collect();
        assert_eq!(ids.len(), REGISTRY.len());
        for c in Check::ALL {
            assert_eq!(c.anchor().check, c);
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.name()));
        }
        assert!("nope".parse::<Check>().is_err());
    }
}
