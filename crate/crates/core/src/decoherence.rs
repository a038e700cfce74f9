//! Decohered superpositions and how much loss or thermal noise they tolerate
//! before falling below a threshold.
//!
//! [`perturbed_state`] is the first-order model
//! `ρ ∝ |ψ⟩⟨ψ| + γ a|ψ⟩⟨ψ|a† + n̄ (a ρ a† + a† ρ a − {a†a + ½, ρ})` for
//! `|ψ⟩ = (|m⟩ + |n⟩)/√2`. [`exact_channel`] is the full thermal attenuator,
//! used as its reference.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::{DensityMatrix, FockSpace, StateVector};
use crate::measures::{coherence_element, CoherenceId};
use crate::{linalg, CMatrix, Error, Result};

/// Loss above which the first-order model is refused without override.
pub const MAX_PERTURBATIVE_LOSS: f64 = 0.3;
/// Thermal occupation above which the model is refused without override.
pub const MAX_PERTURBATIVE_NBAR: f64 = 0.15;
const CLIP: f64 = -1e-12;
const KRAUS_RESIDUAL: f64 = 1e-14;

/// Coefficient of the `a|ψ⟩⟨ψ|a†` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LossReading {
    /// `γ = 1 − η`, vanishing without loss.
    #[default]
    LossProbability,
    /// The transmission `η = 1 − γ` itself.
    Transmission,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyStateModel {
    pub id: CoherenceId,
    /// Loss probability `γ = 1 − η`.
    pub loss: f64,
    pub nbar: f64,
    pub reading: LossReading,
    /// Accept parameters outside the perturbative region.
    pub allow_nonperturbative: bool,
}

impl NoisyStateModel {
    pub fn new(id: CoherenceId, loss: f64, nbar: f64) -> Self {
        Self {
            id,
            loss,
            nbar,
            reading: LossReading::default(),
            allow_nonperturbative: false,
        }
    }

    pub fn is_perturbative(&self) -> bool {
        self.loss <= MAX_PERTURBATIVE_LOSS && self.nbar <= MAX_PERTURBATIVE_NBAR
    }

    fn check(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.loss) || self.nbar < 0.0 || !self.nbar.is_finite() {
            return Err(Error::Spec(format!(
                "loss must lie in [0, 1) and nbar be nonnegative, got ({}, {})",
                self.loss, self.nbar
            )));
        }
        if !self.allow_nonperturbative && !self.is_perturbative() {
            return Err(Error::ModelValidity {
                loss: self.loss,
                nbar: self.nbar,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedState {
    pub rho: DensityMatrix,
    /// Total weight of the negative eigenvalues removed before normalizing.
    pub clipped_weight: f64,
}

fn ladder(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        a[(k - 1, k)] = Complex64::new(libm::sqrt(k as f64), 0.0);
    }
    a
}

/// First-order decohered state of `(|m⟩ + |n⟩)/√2` in the reporting space.
pub fn perturbed_state(model: &NoisyStateModel, space: &FockSpace) -> Result<PerturbedState> {
    model.check()?;
    let dim = space.dim();
    let id = model.id;
    // a† must not push |n⟩ past the cutoff
    if id.n() + 1 >= dim {
        return Err(Error::Index {
            index: id.n() + 1,
            dim,
        });
    }
    let p = StateVector::balanced(id.m(), id.n(), dim)?
        .to_density()
        .matrix()
        .clone();
    let a = ladder(dim);
    let ad = a.adjoint();
    let number = &ad * &a;
    let half = CMatrix::identity(dim, dim) * Complex64::new(0.5, 0.0);
    let lowered = &a * &p * &ad;
    let raised = &ad * &p * &a;
    let shifted = &number + &half;
    let anti = &shifted * &p + &p * &shifted;
    let coeff = match model.reading {
        LossReading::LossProbability => model.loss,
        LossReading::Transmission => 1.0 - model.loss,
    };
    let nb = Complex64::new(model.nbar, 0.0);
    let mut rho = &p + &lowered * Complex64::new(coeff, 0.0) + (&lowered + &raised - anti) * nb;
    rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);

    let (vals, vecs) = linalg::hermitian_eigen(&rho);
    let mut clipped_weight = 0.0;
    if vals.iter().any(|&v| v < CLIP) {
        let mut rebuilt = CMatrix::zeros(dim, dim);
        for (k, &v) in vals.iter().enumerate() {
            if v < CLIP {
                clipped_weight += -v;
                continue;
            }
            let col = vecs.column(k);
            rebuilt += col * col.adjoint() * Complex64::new(v, 0.0);
        }
        rho = rebuilt;
    }
    let trace = rho.trace().re;
    rho /= Complex64::new(trace, 0.0);
    Ok(PerturbedState {
        rho: DensityMatrix::new(rho)?,
        clipped_weight,
    })
}

fn ln_binom(n: usize, k: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// `x^e` with `0^0 = 1`, evaluated in log space.
fn ln_pow(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        0.0
    } else if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        e * libm::log(x)
    }
}

fn pure_loss(rho: &CMatrix, tau: f64) -> CMatrix {
    let d = rho.nrows();
    let mut out = CMatrix::zeros(d, d);
    // A_l = Σ_n √C(n,l) τ^{(n−l)/2} (1−τ)^{l/2} |n−l⟩⟨n|
    let coef = |l: usize, n: usize| {
        libm::exp(
            0.5 * ln_binom(n, l)
                + ln_pow(tau, (n - l) as f64 / 2.0)
                + ln_pow(1.0 - tau, l as f64 / 2.0),
        )
    };
    for l in 0..d {
        for i in 0..d - l {
            let ci = coef(l, i + l);
            if ci == 0.0 {
                continue;
            }
            for j in 0..d - l {
                out[(i, j)] += rho[(i + l, j + l)] * (ci * coef(l, j + l));
            }
        }
    }
    out
}

/// Quantum-limited amplifier of gain `g` into a `dim_out` space. Returns the
/// output and the weight that landed above the cutoff.
fn amplifier(rho: &CMatrix, g: f64, dim_out: usize) -> Result<(CMatrix, f64)> {
    let d = rho.nrows();
    let mut out = CMatrix::zeros(dim_out, dim_out);
    if g == 1.0 {
        out.view_mut((0, 0), (d, d)).copy_from(rho);
        return Ok((out, 0.0));
    }
    // B_k = G^{-1/2} Σ_n √C(n+k,k) (1−1/G)^{k/2} G^{−n/2} |n+k⟩⟨n|
    let coef = |k: usize, n: usize| {
        libm::exp(
            -0.5 * libm::log(g) + 0.5 * ln_binom(n + k, k) + ln_pow(1.0 - 1.0 / g, k as f64 / 2.0)
                - 0.5 * n as f64 * libm::log(g),
        )
    };
    let mut weight = 0.0;
    let mut leaked = 0.0;
    let max_terms = 100_000;
    for k in 0..max_terms {
        let c: Vec<f64> = (0..d).map(|n| coef(k, n)).collect();
        let term: f64 = (0..d).map(|n| c[n] * c[n] * rho[(n, n)].re).sum();
        weight += term;
        for i in 0..d {
            for j in 0..d {
                let (oi, oj) = (i + k, j + k);
                let v = rho[(i, j)] * (c[i] * c[j]);
                if oi < dim_out && oj < dim_out {
                    out[(oi, oj)] += v;
                } else if oi == oj {
                    leaked += v.re;
                }
            }
        }
        if 1.0 - weight < KRAUS_RESIDUAL {
            return Ok((out, leaked + (1.0 - weight).max(0.0)));
        }
    }
    Err(Error::Truncation {
        defect: 1.0 - weight,
        tolerance: KRAUS_RESIDUAL,
        dim_work: dim_out,
    })
}

/// Thermal attenuator with transmission `eta` and environment occupation
/// `nbar_env`, realized as pure loss followed by a quantum-limited amplifier.
///
/// The output is built in the working dimension and cut to the reporting
/// dimension; weight lost above it beyond the space tolerance is a
/// [`Error::Truncation`].
pub fn exact_channel(
    rho: &DensityMatrix,
    eta: f64,
    nbar_env: f64,
    space: &FockSpace,
) -> Result<DensityMatrix> {
    if !(eta > 0.0 && eta <= 1.0) || nbar_env < 0.0 || !nbar_env.is_finite() {
        return Err(Error::Spec(format!(
            "need 0 < eta <= 1 and nbar_env >= 0, got ({eta}, {nbar_env})"
        )));
    }
    let d = space.dim();
    if rho.dim() > d {
        return Err(Error::Config(format!(
            "state dimension {} exceeds space dimension {d}",
            rho.dim()
        )));
    }
    let mut input = CMatrix::zeros(d, d);
    input
        .view_mut((0, 0), (rho.dim(), rho.dim()))
        .copy_from(rho.matrix());
    let g = 1.0 + (1.0 - eta) * nbar_env;
    let tau = eta / g;
    let lossy = pure_loss(&input, tau);
    let (amplified, leaked_work) = amplifier(&lossy, g, space.dim_work())?;
    let block = amplified.view((0, 0), (d, d)).into_owned();
    let lost = 1.0 - block.trace().re;
    if lost > space.tolerance() {
        return Err(Error::Truncation {
            defect: lost.max(leaked_work),
            tolerance: space.tolerance(),
            dim_work: space.dim_work(),
        });
    }
    DensityMatrix::new(block)
}

/// Largest element-wise difference between the first-order model and the
/// exact channel with `η = 1 − γ`, `N = n̄ / γ`.
pub fn channel_discrepancy(model: &NoisyStateModel, space: &FockSpace) -> Result<f64> {
    let approx = perturbed_state(model, space)?;
    let eta = 1.0 - model.loss;
    let nbar_env = if model.loss > 0.0 {
        model.nbar / model.loss
    } else {
        0.0
    };
    if model.loss == 0.0 && model.nbar > 0.0 {
        return Err(Error::Spec(
            "the channel mapping needs loss > 0 when nbar > 0".into(),
        ));
    }
    let ideal = StateVector::balanced(model.id.m(), model.id.n(), space.dim())?.to_density();
    let exact = exact_channel(&ideal, eta, nbar_env, space)?;
    Ok((approx.rho.matrix() - exact.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepthKind {
    /// Largest tolerable `1 − η` at `n̄ = 0`.
    Loss,
    /// Largest tolerable `n̄` at `η = 1`.
    Thermal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthConfig {
    /// Bracket width at which bisection stops.
    pub tolerance: f64,
    pub reading: LossReading,
    pub allow_nonperturbative: bool,
}

impl Default for DepthConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            reading: LossReading::default(),
            allow_nonperturbative: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthResult {
    pub kind: DepthKind,
    /// Lower end of the final bracket, where the threshold is still beaten.
    pub value: f64,
    pub threshold_used: f64,
    pub iterations: usize,
    pub bracket_width: f64,
    /// The threshold is still beaten at the end of the admissible range.
    pub saturated: bool,
}

/// Coherence of the first-order model with the given noise.
pub fn model_coherence(id: CoherenceId, loss: f64, nbar: f64, cfg: &DepthConfig) -> Result<f64> {
    let model = NoisyStateModel {
        id,
        loss,
        nbar,
        reading: cfg.reading,
        allow_nonperturbative: cfg.allow_nonperturbative,
    };
    // the model lives on |0⟩..|n+1⟩, so this dimension is exact
    let space = FockSpace::new(id.n() + 2)?;
    coherence_element(&perturbed_state(&model, &space)?.rho, id)
}

struct Bisection {
    value: f64,
    iterations: usize,
    width: f64,
    saturated: bool,
}

/// Largest `x` in `[0, hi]` with `beats(x)`, for `beats` true at 0 and
/// switching once.
fn bisect(beats: impl Fn(f64) -> Result<bool>, hi: f64, tol: f64) -> Result<Bisection> {
    if beats(hi)? {
        return Ok(Bisection {
            value: hi,
            iterations: 0,
            width: 0.0,
            saturated: true,
        });
    }
    let (mut lo, mut hi) = (0.0, hi);
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if beats(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(Bisection {
        value: lo,
        iterations,
        width: hi - lo,
        saturated: false,
    })
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold >= 1.0 {
        return Err(Error::NoDepth { threshold });
    }
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::Spec(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    Ok(())
}

fn loss_ceiling(cfg: &DepthConfig) -> f64 {
    if cfg.allow_nonperturbative {
        1.0 - 1e-9
    } else {
        MAX_PERTURBATIVE_LOSS
    }
}

/// Largest loss `1 − η` at which the model still exceeds `threshold`.
pub fn loss_depth(id: CoherenceId, threshold: f64, cfg: &DepthConfig) -> Result<DepthResult> {
    check_threshold(threshold)?;
    let b = bisect(
        |g| Ok(model_coherence(id, g, 0.0, cfg)? > threshold),
        loss_ceiling(cfg),
        cfg.tolerance,
    )?;
    Ok(DepthResult {
        kind: DepthKind::Loss,
        value: b.value,
        threshold_used: threshold,
        iterations: b.iterations,
        bracket_width: b.width,
        saturated: b.saturated,
    })
}

/// Largest thermal occupation at which the model still exceeds `threshold`.
pub fn thermal_depth(id: CoherenceId, threshold: f64, cfg: &DepthConfig) -> Result<DepthResult> {
    check_threshold(threshold)?;
    let beats = |n: f64| Ok(model_coherence(id, 0.0, n, cfg)? > threshold);
    let mut hi = MAX_PERTURBATIVE_NBAR;
    if cfg.allow_nonperturbative {
        while beats(hi)? && hi < 1e3 {
            hi *= 2.0;
        }
    }
    let b = bisect(beats, hi, cfg.tolerance)?;
    Ok(DepthResult {
        kind: DepthKind::Thermal,
        value: b.value,
        threshold_used: threshold,
        iterations: b.iterations,
        bracket_width: b.width,
        saturated: b.saturated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub nbar: f64,
    /// Largest tolerable loss at this `n̄`; `None` when noise alone already
    /// defeats the threshold.
    pub max_loss: Option<f64>,
    pub saturated: bool,
}

/// Tolerable loss as a function of thermal occupation.
pub fn boundary_sweep(
    id: CoherenceId,
    threshold: f64,
    nbar_values: &[f64],
    cfg: &DepthConfig,
) -> Result<Vec<BoundaryPoint>> {
    check_threshold(threshold)?;
    let mut points = Vec::with_capacity(nbar_values.len());
    for &nbar in nbar_values {
        if model_coherence(id, 0.0, nbar, cfg)? <= threshold {
            points.push(BoundaryPoint {
                nbar,
                max_loss: None,
                saturated: false,
            });
            continue;
        }
        let b = bisect(
            |g| Ok(model_coherence(id, g, nbar, cfg)? > threshold),
            loss_ceiling(cfg),
            cfg.tolerance,
        )?;
        points.push(BoundaryPoint {
            nbar,
            max_loss: Some(b.value),
            saturated: b.saturated,
        });
    }
    Ok(points)
}

/// Depths of `(|m⟩ + |n⟩)/√2` against several thresholds.
pub fn depth_table(
    id: CoherenceId,
    thresholds: &[f64],
    cfg: &DepthConfig,
) -> Result<Vec<(DepthResult, DepthResult)>> {
    thresholds
        .iter()
        .map(|&t| Ok((loss_depth(id, t, cfg)?, thermal_depth(id, t, cfg)?)))
        .collect()
}
