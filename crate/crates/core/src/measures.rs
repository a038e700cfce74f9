//! Coherence measures, photon-number probabilities and the phase-scan
//! measurement model.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::DensityMatrix;
use crate::{Error, Result};

/// Minimum number of phases accepted by [`coherence_from_scan`].
pub const MIN_SCAN_PHASES: usize = 8;

/// Index pair `(m, n)` with `m < n` selecting the coherence `C_{m,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(usize, usize)", into = "(usize, usize)")]
pub struct CoherenceId {
    m: usize,
    n: usize,
}

impl CoherenceId {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m >= n {
            return Err(Error::Spec(format!(
                "coherence indices need m < n, got ({m},{n})"
            )));
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Fock separation `n − m`.
    pub fn separation(&self) -> usize {
        self.n - self.m
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if self.n >= dim {
            return Err(Error::Index { index: self.n, dim });
        }
        Ok(())
    }
}

impl TryFrom<(usize, usize)> for CoherenceId {
    type Error = Error;
    fn try_from((m, n): (usize, usize)) -> Result<Self> {
        Self::new(m, n)
    }
}

impl From<CoherenceId> for (usize, usize) {
    fn from(id: CoherenceId) -> Self {
        (id.m, id.n)
    }
}

impl fmt::Display for CoherenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C[{},{}]", self.m, self.n)
    }
}

/// A diagonal projector whose expectation is a photon-number probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProbObservable {
    /// `P_k = ⟨k|ρ|k⟩`.
    FockProb(usize),
    /// `P_{e,n} = 1 − Σ_{k≤n} P_k`.
    ErrorProb(usize),
}

impl ProbObservable {
    /// Whether `|j⟩⟨j|` belongs to the projector.
    #[inline]
    pub fn contains(&self, j: usize) -> bool {
        match *self {
            Self::FockProb(k) => j == k,
            Self::ErrorProb(n) => j > n,
        }
    }
}

impl fmt::Display for ProbObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FockProb(k) => write!(f, "P{k}"),
            Self::ErrorProb(n) => write!(f, "Pe{n}"),
        }
    }
}

/// Values of `Tr[ρ X_{m,n}(φ)]` on a list of phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseScan {
    pub phases: Vec<f64>,
    pub values: Vec<f64>,
}

/// `G` uniformly spaced phases `2πi/G` on `[0, 2π)`.
pub fn uniform_phases(count: usize) -> Vec<f64> {
    (0..count).map(|i| TAU * i as f64 / count as f64).collect()
}

/// `C_{m,n} = 2|⟨m|ρ|n⟩|`.
pub fn coherence_element(rho: &DensityMatrix, id: CoherenceId) -> Result<f64> {
    id.check(rho.dim())?;
    Ok(2.0 * rho.element(id.m, id.n).norm())
}

/// Expectations `2 Re(⟨m|ρ|n⟩ e^{iφ})` of the phase-dependent observable.
pub fn phase_scan(rho: &DensityMatrix, id: CoherenceId, phases: &[f64]) -> Result<PhaseScan> {
    id.check(rho.dim())?;
    if phases.is_empty() {
        return Err(Error::Grid("phase list is empty".into()));
    }
    let z = rho.element(id.m, id.n);
    let values = phases
        .iter()
        .map(|&phi| 2.0 * (z * Complex64::from_polar(1.0, phi)).re)
        .collect();
    Ok(PhaseScan {
        phases: phases.to_vec(),
        values,
    })
}

/// Half the peak-to-peak span of a scan on a uniform grid.
///
/// With `G` phases the estimate undershoots `2|ρ_mn|` by at most
/// `2|ρ_mn|(1 − cos(π/G))`.
pub fn coherence_from_scan(scan: &PhaseScan) -> Result<f64> {
    let g = scan.phases.len();
    if g < MIN_SCAN_PHASES {
        return Err(Error::Grid(format!(
            "{g} phases, need at least {MIN_SCAN_PHASES}"
        )));
    }
    if scan.values.len() != g {
        return Err(Error::Grid("phase and value lists differ in length".into()));
    }
    let step = TAU / g as f64;
    for w in scan.phases.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 {
            return Err(Error::Grid(
                "phases are not uniformly spaced over [0, 2π)".into(),
            ));
        }
    }
    if !(0.0..step + 1e-9).contains(&scan.phases[0]) {
        return Err(Error::Grid(
            "phase grid does not start in its first cell".into(),
        ));
    }
    let (lo, hi) = scan
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    Ok((hi - lo) / 2.0)
}

/// Expectation of a photon-number observable.
pub fn probability(rho: &DensityMatrix, obs: ProbObservable) -> f64 {
    match obs {
        ProbObservable::FockProb(k) if k < rho.dim() => rho.element(k, k).re,
        ProbObservable::FockProb(_) => 0.0,
        ProbObservable::ErrorProb(n) => {
            1.0 - (0..=n.min(rho.dim() - 1))
                .map(|k| rho.element(k, k).re)
                .sum::<f64>()
        }
    }
}
