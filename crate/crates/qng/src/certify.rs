//! Certification reports: measured coherence against absolute thresholds
//! and, when probabilities are known, against relative criteria.

use std::fmt;

use qng_core::fock::DensityMatrix;
use qng_core::measures::{coherence_element, probability, CoherenceId, ProbObservable};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Slack allowed when comparing inputs against physical bounds.
pub const PHYSICAL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Measured {
    pub c: f64,
    pub pm: Option<f64>,
    pub pn: Option<f64>,
    pub pe: Option<f64>,
}

impl Measured {
    pub fn from_state(rho: &DensityMatrix, id: CoherenceId) -> Result<Self> {
        Ok(Self {
            c: coherence_element(rho, id)?,
            pm: Some(probability(rho, ProbObservable::FockProb(id.m()))),
            pn: Some(probability(rho, ProbObservable::FockProb(id.n()))),
            pe: Some(probability(rho, ProbObservable::ErrorProb(id.n()))),
        })
    }

    /// Largest coherence any state with these probabilities can have.
    pub fn physical_bound(&self) -> f64 {
        let mut bound: f64 = 1.0;
        if let (Some(pm), Some(pn)) = (self.pm, self.pn) {
            bound = bound.min(2.0 * (pm * pn).max(0.0).sqrt());
        }
        if let Some(pn) = self.pn {
            // P_m can hold at most what is left after P_n and, if known, P_e
            let rest = 1.0 - pn - self.pe.unwrap_or(0.0);
            bound = bound.min(2.0 * (pn * rest).max(0.0).sqrt());
        }
        bound
    }

    /// Rejects probabilities outside `[0, 1]` and coherences no state can have.
    pub fn check_physical(&self) -> Result<()> {
        let probs = [("Pm", self.pm), ("Pn", self.pn), ("Pe", self.pe)];
        for (name, p) in probs {
            if let Some(p) = p {
                if !(-PHYSICAL_SLACK..=1.0 + PHYSICAL_SLACK).contains(&p) {
                    return Err(CliError::Unphysical(format!(
                        "{name} = {p} is not a probability"
                    )));
                }
            }
        }
        let total: f64 = probs.iter().filter_map(|(_, p)| *p).sum();
        if total > 1.0 + PHYSICAL_SLACK {
            return Err(CliError::Unphysical(format!(
                "probabilities sum to {total}"
            )));
        }
        if self.c.is_nan() || self.c < 0.0 {
            return Err(CliError::Unphysical(format!("C = {} is negative", self.c)));
        }
        let bound = self.physical_bound();
        if self.c > bound + PHYSICAL_SLACK {
            return Err(CliError::Unphysical(format!(
                "C = {} exceeds the physical boundary {bound} at the given probabilities",
                self.c
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    Absolute,
    /// Relative criterion conditioned on `P_n`.
    Relative2d,
    /// Relative criterion conditioned on `P_n` and `P_e`.
    Relative3d,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Absolute => "absolute",
            Self::Relative2d => "relative-2d",
            Self::Relative3d => "relative-3d",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub hierarchy: String,
    /// 0 for families without an order.
    pub order: usize,
    pub criterion: Criterion,
    pub threshold: f64,
    pub pass: bool,
    pub margin: f64,
}

impl Verdict {
    pub fn new(
        hierarchy: String,
        order: usize,
        criterion: Criterion,
        threshold: f64,
        c: f64,
    ) -> Self {
        Self {
            hierarchy,
            order,
            criterion,
            threshold,
            pass: c > threshold,
            margin: c - threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub hierarchy: String,
    /// Highest order passed by any criterion.
    pub max_certified: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub id: CoherenceId,
    /// State file the measurements were taken from, if any.
    pub state: Option<String>,
    pub measured: Measured,
    pub verdicts: Vec<Verdict>,
    pub summary: Vec<FamilySummary>,
}

impl CertificationReport {
    pub fn new(
        id: CoherenceId,
        state: Option<String>,
        measured: Measured,
        verdicts: Vec<Verdict>,
    ) -> Self {
        let mut summary: Vec<FamilySummary> = Vec::new();
        for v in &verdicts {
            let entry = match summary.iter_mut().find(|s| s.hierarchy == v.hierarchy) {
                Some(e) => e,
                None => {
                    summary.push(FamilySummary {
                        hierarchy: v.hierarchy.clone(),
                        max_certified: None,
                    });
                    summary.last_mut().expect("just pushed")
                }
            };
            if v.pass {
                entry.max_certified = Some(entry.max_certified.map_or(v.order, |o| o.max(v.order)));
            }
        }
        Self {
            id,
            state,
            measured,
            verdicts,
            summary,
        }
    }

    pub fn any_certified(&self) -> bool {
        self.verdicts.iter().any(|v| v.pass)
    }
}
