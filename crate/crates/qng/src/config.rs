//! Serializable run configurations. Every command line is first turned into
//! a [`RunConfig`]; a stored config replays to identical output.

use std::fmt;
use std::path::PathBuf;

use qng_core::cores::HierarchySpec;
use qng_core::decoherence::DepthConfig;
use qng_core::measures::{CoherenceId, ProbObservable};
use qng_core::opt::SearchConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Hierarchy selector without its order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    N,
    L,
    Fock,
    Gauss,
    Stellar,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "N" | "n" => Ok(Self::N),
            "L" | "l" => Ok(Self::L),
            "fock" => Ok(Self::Fock),
            "gauss" => Ok(Self::Gauss),
            "stellar" => Ok(Self::Stellar),
            _ => Err(CliError::Usage(format!(
                "unknown hierarchy {s:?} (N, L, fock, gauss, stellar)"
            ))),
        }
    }

    pub fn is_ordered(self) -> bool {
        matches!(self, Self::N | Self::L)
    }

    /// Orders that can still be beaten for `id`; a single pseudo-order 0 for
    /// the unordered families.
    pub fn beatable_orders(self, id: CoherenceId) -> Vec<usize> {
        match self {
            Self::N => (1..=id.n()).collect(),
            Self::L => (1..=id.separation()).collect(),
            _ => vec![0],
        }
    }

    pub fn spec(self, order: usize) -> Result<HierarchySpec> {
        if self.is_ordered() && order == 0 {
            return Err(CliError::Usage(format!(
                "hierarchy {self} needs an order >= 1"
            )));
        }
        Ok(match self {
            Self::N => HierarchySpec::NHierarchy(order),
            Self::L => HierarchySpec::LHierarchy(order),
            Self::Fock => HierarchySpec::FockFamily,
            Self::Gauss => HierarchySpec::GaussianVacuum,
            Self::Stellar => HierarchySpec::Stellar,
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::N => "N",
            Self::L => "L",
            Self::Fock => "fock",
            Self::Gauss => "gauss",
            Self::Stellar => "stellar",
        })
    }
}

/// Probability named relative to the measured pair `(m, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    Pm,
    Pn,
    Pe,
}

impl Observable {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "Pm" => Ok(Self::Pm),
            "Pn" => Ok(Self::Pn),
            "Pe" => Ok(Self::Pe),
            other => Err(CliError::Usage(format!(
                "unknown observable {other:?} (Pm, Pn, Pe)"
            ))),
        }
    }

    pub fn resolve(self, id: CoherenceId) -> ProbObservable {
        match self {
            Self::Pm => ProbObservable::FockProb(id.m()),
            Self::Pn => ProbObservable::FockProb(id.n()),
            Self::Pe => ProbObservable::ErrorProb(id.n()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    pub lambda: Vec<f64>,
    pub p: Vec<f64>,
    /// λ₂ and `Pe` grids of a surface.
    pub lambda2: Vec<f64>,
    pub pe: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DepthTarget {
    Threshold(f64),
    Hierarchy { family: Family, orders: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CertifyInput {
    State {
        path: PathBuf,
    },
    Measured {
        c: f64,
        pm: Option<f64>,
        pn: Option<f64>,
        pe: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Command {
    Thresholds {
        id: CoherenceId,
        family: Family,
        orders: Vec<usize>,
    },
    Curve {
        id: CoherenceId,
        spec: HierarchySpec,
        observables: Vec<Observable>,
        grids: Grids,
    },
    Depth {
        id: CoherenceId,
        target: DepthTarget,
        boundary_sweep: Option<Vec<f64>>,
        depth: DepthConfig,
    },
    Certify {
        id: CoherenceId,
        input: CertifyInput,
        families: Vec<Family>,
        /// Explicit orders for ordered families; all beatable orders when absent.
        orders: Option<Vec<usize>>,
        grids: Grids,
    },
    Converge {
        id: CoherenceId,
        excluded: usize,
        n_range: Vec<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Thresholds { .. } => "thresholds",
            Self::Curve { .. } => "curve",
            Self::Depth { .. } => "depth",
            Self::Certify { .. } => "certify",
            Self::Converge { .. } => "converge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub search: SearchConfig,
    pub command: Command,
    pub format: Format,
    /// Artifact destination; standard output when absent.
    pub out: Option<PathBuf>,
    /// Cache directory; `None` falls back to the environment and default.
    pub cache_dir: Option<PathBuf>,
    pub use_cache: bool,
    /// Worker threads; `None` uses every core. Does not affect results.
    pub threads: Option<usize>,
}

impl RunConfig {
    /// SHA-256 over everything that can change a number: the search
    /// settings and the command with its parameters.
    pub fn hash(&self) -> String {
        let canonical =
            serde_json::to_string(&(&self.search, &self.command)).expect("config serializes");
        format!("{:x}", Sha256::digest(canonical.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> RunConfig {
        RunConfig {
            search: SearchConfig::default(),
            command: Command::Converge {
                id: CoherenceId::new(0, 8).unwrap(),
                excluded: 0,
                n_range: vec![10, 12],
            },
            format: Format::Json,
            out: None,
            cache_dir: None,
            use_cache: true,
            threads: None,
        }
    }

    #[test]
    fn hash_ignores_presentation_but_not_numbers() {
        let a = config();
        let mut b = a.clone();
        b.format = Format::Csv;
        b.threads = Some(3);
        b.out = Some("x.csv".into());
        assert_eq!(a.hash(), b.hash());
        b.search.seed = 2;
        assert_ne!(a.hash(), b.hash());
        let mut c = a.clone();
        c.search.dim_report = 41;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn config_round_trips() {
        let a = config();
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), a);
    }

    #[test]
    fn families() {
        let id = CoherenceId::new(3, 4).unwrap();
        assert_eq!(Family::N.beatable_orders(id), vec![1, 2, 3, 4]);
        assert_eq!(Family::L.beatable_orders(id), vec![1]);
        assert!(Family::N.spec(0).is_err());
        assert_eq!(
            Family::parse("fock").unwrap().spec(0).unwrap(),
            HierarchySpec::FockFamily
        );
        assert!(Family::parse("X").is_err());
    }
}
