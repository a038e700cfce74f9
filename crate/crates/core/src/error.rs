use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("truncation defect {defect:.3e} exceeds tolerance {tolerance:.3e} (working dimension {dim_work})")]
    Truncation {
        defect: f64,
        tolerance: f64,
        dim_work: usize,
    },
    #[error("Fock index {index} out of range for dimension {dim}")]
    Index { index: usize, dim: usize },
    #[error("phase grid: {0}")]
    Grid(String),
    #[error("invalid hierarchy specification: {0}")]
    Spec(String),
    #[error("complex-parameter sample exceeds the search maximum by {excess:.3e}")]
    Validation { excess: f64 },
    #[error("envelope: {0}")]
    Envelope(String),
    #[error("noise model outside the perturbative region (loss {loss}, nbar {nbar})")]
    ModelValidity { loss: f64, nbar: f64 },
    #[error("the noiseless state does not beat threshold {threshold}")]
    NoDepth { threshold: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}
