//! Core-state families: the Fock-index subspaces whose Gaussian images are
//! rejected by a certification context.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fock::{FockSpace, StateVector};
use crate::measures::{coherence_element, CoherenceId};
use crate::{Error, Result};

/// Which states count as free (non-certifiable) for a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HierarchySpec {
    /// Gaussian images of the vacuum.
    GaussianVacuum,
    /// Gaussian images of any single Fock state.
    FockFamily,
    /// Gaussian images of superpositions below `|n⟩`.
    Stellar,
    /// Superpositions of `|0⟩..|k−1⟩` together with all single Fock states.
    NHierarchy(usize),
    /// Superpositions within any window of `r` consecutive Fock states.
    LHierarchy(usize),
    /// Superpositions of `|0⟩..|N⟩` with `|excluded⟩` removed.
    MissingOne { n_max: usize, excluded: usize },
}

impl HierarchySpec {
    /// Hierarchical order, where the family is ordered.
    pub fn order(&self) -> Option<usize> {
        match *self {
            Self::NHierarchy(k) | Self::LHierarchy(k) => Some(k),
            _ => None,
        }
    }

    pub fn with_order(&self, order: usize) -> Self {
        match *self {
            Self::NHierarchy(_) => Self::NHierarchy(order),
            Self::LHierarchy(_) => Self::LHierarchy(order),
            other => other,
        }
    }
}

impl fmt::Display for HierarchySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GaussianVacuum => f.write_str("gauss"),
            Self::FockFamily => f.write_str("fock"),
            Self::Stellar => f.write_str("stellar"),
            Self::NHierarchy(k) => write!(f, "N{k}"),
            Self::LHierarchy(r) => write!(f, "L{r}"),
            Self::MissingOne { n_max, excluded } => write!(f, "missing({n_max},{excluded})"),
        }
    }
}

/// Sorted, distinct Fock indices spanning a core subspace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoreSubspace {
    indices: Vec<usize>,
}

impl CoreSubspace {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(Error::Spec("core subspace is empty".into()));
        }
        Ok(Self { indices })
    }

    pub fn range(start: usize, len: usize) -> Self {
        Self {
            indices: (start..start + len).collect(),
        }
    }

    pub fn singleton(j: usize) -> Self {
        Self { indices: vec![j] }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    pub fn max_index(&self) -> usize {
        *self.indices.last().expect("nonempty")
    }
}

/// Core subspaces of a family.
///
/// `head` subspaces are always evaluated. `sweep` holds an ordered run of
/// subspaces (single Fock states or sliding windows) along which an optimizer
/// may stop once the objective keeps decreasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreFamily {
    pub head: Vec<CoreSubspace>,
    pub sweep: Vec<CoreSubspace>,
}

impl CoreFamily {
    pub fn iter(&self) -> impl Iterator<Item = &CoreSubspace> {
        self.head.iter().chain(self.sweep.iter())
    }

    pub fn len(&self) -> usize {
        self.head.len() + self.sweep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when some core subspace holds both `|m⟩` and `|n⟩`, so the
    /// balanced superposition itself is free and the threshold is 1.
    pub fn saturates(&self, id: CoherenceId) -> bool {
        self.iter()
            .any(|s| s.contains(id.m()) && s.contains(id.n()))
    }
}

/// Enumerates the core subspaces of `spec` within the reporting dimension.
pub fn core_subspaces(
    spec: HierarchySpec,
    id: CoherenceId,
    space: &FockSpace,
) -> Result<CoreFamily> {
    let dim = space.dim();
    let too_big = |what: &str, v: usize| {
        Err(Error::Spec(format!(
            "{what} {v} exceeds the reporting dimension {dim}"
        )))
    };
    let singletons = || (0..dim).map(CoreSubspace::singleton).collect::<Vec<_>>();
    let family = match spec {
        HierarchySpec::GaussianVacuum => CoreFamily {
            head: vec![CoreSubspace::singleton(0)],
            sweep: Vec::new(),
        },
        HierarchySpec::FockFamily => CoreFamily {
            head: Vec::new(),
            sweep: singletons(),
        },
        HierarchySpec::Stellar => {
            if id.n() > dim {
                return too_big("stellar rank", id.n());
            }
            CoreFamily {
                head: vec![CoreSubspace::range(0, id.n())],
                sweep: Vec::new(),
            }
        }
        HierarchySpec::NHierarchy(k) => {
            if k == 0 {
                return Err(Error::Spec("hierarchy order must be at least 1".into()));
            }
            if k > dim {
                return too_big("order", k);
            }
            CoreFamily {
                head: vec![CoreSubspace::range(0, k)],
                sweep: singletons(),
            }
        }
        HierarchySpec::LHierarchy(r) => {
            if r == 0 {
                return Err(Error::Spec("hierarchy order must be at least 1".into()));
            }
            if r > dim {
                return too_big("order", r);
            }
            CoreFamily {
                head: Vec::new(),
                sweep: (0..=dim - r).map(|s| CoreSubspace::range(s, r)).collect(),
            }
        }
        HierarchySpec::MissingOne { n_max, excluded } => {
            if n_max >= dim {
                return too_big("cutoff", n_max);
            }
            if excluded > n_max || n_max == 0 {
                return Err(Error::Spec(format!(
                    "excluded index {excluded} must lie in 0..={n_max} with n_max >= 1"
                )));
            }
            let idx = (0..=n_max).filter(|&k| k != excluded).collect();
            CoreFamily {
                head: vec![CoreSubspace::new(idx)?],
                sweep: Vec::new(),
            }
        }
    };
    Ok(family)
}

/// Coherences that every core state of `spec` must leave at zero.
pub fn vanishing_measures(spec: HierarchySpec, id: CoherenceId, dim: usize) -> Vec<CoherenceId> {
    let pairs = (0..dim).flat_map(|a| (a + 1..dim).map(move |b| (a, b)));
    let keep = |&(a, b): &(usize, usize)| match spec {
        HierarchySpec::GaussianVacuum | HierarchySpec::FockFamily => true,
        HierarchySpec::Stellar => b >= id.n(),
        HierarchySpec::NHierarchy(k) => b >= k,
        HierarchySpec::LHierarchy(r) => b - a >= r,
        HierarchySpec::MissingOne { excluded, .. } => a == excluded || b == excluded,
    };
    pairs
        .filter(keep)
        .map(|(a, b)| CoherenceId::new(a, b).expect("a < b"))
        .collect()
}

/// Draws Haar-random unit vectors inside every core subspace and checks
/// that each measure returned by [`vanishing_measures`] is zero to 1e-12.
pub fn verify_core_property(
    spec: HierarchySpec,
    id: CoherenceId,
    space: &FockSpace,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    let family = core_subspaces(spec, id, space)?;
    let measures = vanishing_measures(spec, id, space.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for sub in family.iter() {
        for _ in 0..samples {
            let rho = random_state_in(sub, space.dim(), &mut rng)?.to_density();
            for &c in &measures {
                if coherence_element(&rho, c)? > 1e-12 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Haar-random unit vector supported on `sub`.
pub fn random_state_in<R: Rng + ?Sized>(
    sub: &CoreSubspace,
    dim: usize,
    rng: &mut R,
) -> Result<StateVector> {
    if sub.max_index() >= dim {
        return Err(Error::Index {
            index: sub.max_index(),
            dim,
        });
    }
    let mut amp = vec![Complex64::new(0.0, 0.0); dim];
    for &k in sub.indices() {
        amp[k] = Complex64::new(standard_normal(rng), standard_normal(rng));
    }
    StateVector::normalized(amp)
}

/// Box–Muller standard normal deviate.
pub(crate) fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}
