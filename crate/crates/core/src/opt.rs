//! Maximization of coherence objectives over Gaussian images of core states.
//!
//! For fixed Gaussian parameters the best core state is the top eigenvector
//! of the observable compressed onto the core subspace ([`inner_max`]). The
//! outer search ([`outer_maximize`]) screens seeded random parameters in each
//! subspace, polishes the most promising ones with a simplex search, and then
//! checks the winner against random fully complex parameter draws.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cores::{core_subspaces, CoreSubspace, HierarchySpec};
use crate::exec::Executor;
use crate::fock::{FockSpace, GaussianElements, GaussianParams};
use crate::measures::{CoherenceId, ProbObservable};
use crate::neldermead::{self, Options};
use crate::{linalg, CMatrix, CVector, Error, Result};

/// Consecutive strict decreases along a sweep after which it is cut short.
pub const SWEEP_PATIENCE: usize = 5;
/// Sweep subspaces are searched in blocks of this size, so the early stop
/// does not depend on how many threads evaluate a block.
const SWEEP_BLOCK: usize = 8;
const GOLDEN_TOL: f64 = 1e-10;

/// One `λ · P` term added to the coherence objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaTerm {
    pub observable: ProbObservable,
    pub weight: f64,
}

/// The functional `C_{m,n} + Σ λ_i P_i` to be maximized over free states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub id: CoherenceId,
    pub lambda_terms: Vec<LambdaTerm>,
}

impl ObjectiveSpec {
    pub fn coherence(id: CoherenceId) -> Self {
        Self {
            id,
            lambda_terms: Vec::new(),
        }
    }

    pub fn with_term(mut self, observable: ProbObservable, weight: f64) -> Self {
        self.lambda_terms.push(LambdaTerm { observable, weight });
        self
    }

    pub fn is_lambda_free(&self) -> bool {
        self.lambda_terms.iter().all(|t| t.weight == 0.0)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        self.id.check(dim)?;
        for t in &self.lambda_terms {
            if !t.weight.is_finite() {
                return Err(Error::Spec(format!(
                    "weight of {} is not finite",
                    t.observable
                )));
            }
            let k = match t.observable {
                ProbObservable::FockProb(k) | ProbObservable::ErrorProb(k) => k,
            };
            if k >= dim {
                return Err(Error::Index { index: k, dim });
            }
        }
        Ok(())
    }

    /// Number of leading rows of `S(ξ)D(α)` the objective depends on.
    fn rows(&self) -> usize {
        let obs = self.lambda_terms.iter().map(|t| match t.observable {
            ProbObservable::FockProb(k) | ProbObservable::ErrorProb(k) => k,
        });
        obs.fold(self.id.n(), usize::max) + 1
    }
}

/// Search protocol for [`outer_maximize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Fock cutoff bounding the singleton and window sweeps.
    pub dim_report: usize,
    /// Local refinements per subspace.
    pub starts: usize,
    /// Random parameter draws screened per subspace before refinement.
    pub screen: usize,
    pub seed: u64,
    pub xi_max: f64,
    pub alpha_max: f64,
    /// Phase grid for λ-weighted inner maximization.
    pub phi_grid: usize,
    /// Simplex tolerance, also the slack allowed to validation samples.
    pub tolerance: f64,
    pub validation_samples: usize,
    /// Evaluate every sweep subspace instead of stopping on a decreasing tail.
    pub strict: bool,
    /// Search complex `(ξ, α)` from the start.
    pub complex_search: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            dim_report: 40,
            starts: 8,
            screen: 400,
            seed: 1,
            xi_max: 1.0,
            alpha_max: 3.0,
            phi_grid: 64,
            tolerance: 1e-9,
            validation_samples: 2000,
            strict: false,
            complex_search: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("invalid search config: {what}")));
        if self.starts == 0 {
            return bad("starts must be at least 1");
        }
        if self.screen == 0 {
            return bad("screen must be at least 1");
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return bad("tolerance must be positive");
        }
        if !(self.xi_max > 0.0 && self.alpha_max > 0.0) {
            return bad("parameter bounds must be positive");
        }
        if self.phi_grid < 4 {
            return bad("phi grid needs at least 4 points");
        }
        FockSpace::new(self.dim_report).map(|_| ())
    }

    pub fn space(&self) -> Result<FockSpace> {
        FockSpace::new(self.dim_report)
    }
}

/// Maximizing free state: `S(ξ)D(α)` applied to `Σ_a coeffs[a] |subspace[a]⟩`,
/// tested at phase `phi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Argmax {
    pub params: GaussianParams,
    pub phi: f64,
    pub subspace: CoreSubspace,
    pub coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchDiagnostics {
    pub starts: usize,
    /// Start index of the winning refinement within its subspace.
    pub best_start: usize,
    /// Spread of the five best local maxima over all subspaces.
    pub top5_spread: f64,
    /// Winner minus the best validation sample (negative means violated).
    pub validation_margin: f64,
    pub subspaces_evaluated: usize,
    pub subspaces_total: usize,
    pub complex_search: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub value: f64,
    pub argmax: Option<Argmax>,
    pub diagnostics: SearchDiagnostics,
}

impl ThresholdResult {
    /// Threshold 1 for a family that already contains the balanced
    /// superposition of the measured pair.
    pub fn sentinel(note: impl Into<String>) -> Self {
        Self {
            value: 1.0,
            argmax: None,
            diagnostics: SearchDiagnostics {
                starts: 0,
                best_start: 0,
                top5_spread: 0.0,
                validation_margin: 0.0,
                subspaces_evaluated: 0,
                subspaces_total: 0,
                complex_search: false,
                note: Some(note.into()),
            },
        }
    }

    pub fn is_sentinel(&self) -> bool {
        self.argmax.is_none()
    }
}

/// Largest eigenvalue over the phase and the matching core coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerMax {
    pub value: f64,
    pub phi: f64,
    pub coeffs: Vec<Complex64>,
}

/// Rows `w_k = P_V U† |k⟩` for the rows the objective touches.
struct Projection {
    d: usize,
    w: Vec<Complex64>,
}

impl Projection {
    fn new(params: &GaussianParams, sub: &CoreSubspace, rows: usize) -> Self {
        let g = GaussianElements::new(params, rows, sub.max_index() + 1);
        let d = sub.len();
        let mut w = Vec::with_capacity(rows * d);
        for k in 0..rows {
            w.extend(sub.indices().iter().map(|&v| g.get(k, v).conj()));
        }
        Self { d, w }
    }

    fn row(&self, k: usize) -> &[Complex64] {
        &self.w[k * self.d..(k + 1) * self.d]
    }
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[Complex64]) -> f64 {
    libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum())
}

/// `Σ λ_i P_V U† Π_i U P_V`, the phase-independent part of the operator.
fn weights_part(objective: &ObjectiveSpec, proj: &Projection) -> CMatrix {
    let d = proj.d;
    let mut s = CMatrix::zeros(d, d);
    let mut add_outer = |k: usize, c: f64| {
        let w = proj.row(k);
        for i in 0..d {
            for j in 0..d {
                s[(i, j)] += w[i] * w[j].conj() * c;
            }
        }
    };
    for t in objective.lambda_terms.iter().filter(|t| t.weight != 0.0) {
        match t.observable {
            ProbObservable::FockProb(k) => add_outer(k, t.weight),
            ProbObservable::ErrorProb(n) => {
                for k in 0..=n {
                    add_outer(k, -t.weight);
                }
            }
        }
    }
    for t in objective.lambda_terms.iter().filter(|t| t.weight != 0.0) {
        if let ProbObservable::ErrorProb(_) = t.observable {
            for i in 0..d {
                s[(i, i)] += Complex64::new(t.weight, 0.0);
            }
        }
    }
    s
}

fn compressed(static_part: &CMatrix, a: &[Complex64], b: &[Complex64], phi: f64) -> CMatrix {
    let e = Complex64::from_polar(1.0, phi);
    let d = a.len();
    CMatrix::from_fn(d, d, |i, j| {
        static_part[(i, j)] + e * b[i] * a[j].conj() + e.conj() * a[i] * b[j].conj()
    })
}

fn top_eigenvalue(h: &CMatrix) -> f64 {
    match h.nrows() {
        1 => h[(0, 0)].re,
        2 => {
            let (p, q) = (h[(0, 0)].re, h[(1, 1)].re);
            let half = (p - q) / 2.0;
            (p + q) / 2.0 + libm::sqrt(half * half + h[(0, 1)].norm_sqr())
        }
        _ => linalg::max_eigenvalue(h),
    }
}

fn check_subspace(sub: &CoreSubspace, space: &FockSpace) -> Result<()> {
    if sub.max_index() >= space.dim() {
        return Err(Error::Index {
            index: sub.max_index(),
            dim: space.dim(),
        });
    }
    Ok(())
}

/// `P_V U† M U P_V` on the core subspace, with `U = S(ξ)D(α)` and
/// `M = X_{m,n}(φ) + Σ λ_i Π_i`, where `⟨X_{m,n}(φ)⟩ = 2 Re(ρ_mn e^{iφ})`.
pub fn compressed_operator(
    params: &GaussianParams,
    phi: f64,
    objective: &ObjectiveSpec,
    sub: &CoreSubspace,
    space: &FockSpace,
) -> Result<CMatrix> {
    objective.validate(space.dim())?;
    check_subspace(sub, space)?;
    let proj = Projection::new(params, sub, objective.rows());
    let s = weights_part(objective, &proj);
    Ok(compressed(
        &s,
        proj.row(objective.id.m()),
        proj.row(objective.id.n()),
        phi,
    ))
}

/// Maximum over `φ` of the top eigenvalue of [`compressed_operator`].
///
/// Without λ terms the operator is rank two and the maximum is
/// `‖a‖‖b‖ + |⟨a|b⟩|` with `a = P_V U†|m⟩`, `b = P_V U†|n⟩`. Otherwise the
/// phase is located on a grid and polished by golden-section search.
pub fn inner_max(
    params: &GaussianParams,
    objective: &ObjectiveSpec,
    sub: &CoreSubspace,
    space: &FockSpace,
    phi_grid: usize,
) -> Result<InnerMax> {
    objective.validate(space.dim())?;
    check_subspace(sub, space)?;
    Ok(inner_unchecked(params, objective, sub, phi_grid, true))
}

fn inner_unchecked(
    params: &GaussianParams,
    objective: &ObjectiveSpec,
    sub: &CoreSubspace,
    phi_grid: usize,
    want_coeffs: bool,
) -> InnerMax {
    let proj = Projection::new(params, sub, objective.rows());
    let a = proj.row(objective.id.m());
    let b = proj.row(objective.id.n());
    let ab = dot(a, b);
    let phi_closed = wrap_phase(-ab.arg());

    if objective.is_lambda_free() {
        let (na, nb) = (norm(a), norm(b));
        let value = na * nb + ab.norm();
        let coeffs = if want_coeffs {
            let e = Complex64::from_polar(1.0, phi_closed);
            let v: Vec<Complex64> = a
                .iter()
                .zip(b)
                .map(|(&ai, &bi)| e * bi * nb + ai * na)
                .collect();
            unit_or_first(v)
        } else {
            Vec::new()
        };
        return InnerMax {
            value,
            phi: phi_closed,
            coeffs,
        };
    }

    let s = weights_part(objective, &proj);
    if proj.d == 1 {
        // X contributes 2 Re(e^{iφ} b a*), maximal at the closed-form phase
        let value = s[(0, 0)].re + 2.0 * ab.norm();
        return InnerMax {
            value,
            phi: phi_closed,
            coeffs: vec![Complex64::new(1.0, 0.0)],
        };
    }

    let g = |phi: f64| top_eigenvalue(&compressed(&s, a, b, phi));
    let step = TAU / phi_grid as f64;
    let (mut best_phi, mut best) = (0.0, f64::NEG_INFINITY);
    for i in 0..phi_grid {
        let phi = step * i as f64;
        let v = g(phi);
        if v > best {
            best = v;
            best_phi = phi;
        }
    }
    let (phi, v) = golden_max(&g, best_phi - step, best_phi + step);
    if v > best {
        best = v;
        best_phi = phi;
    }
    let phi = wrap_phase(best_phi);
    let coeffs = if want_coeffs {
        let (_, vec) = linalg::max_eigenpair(&compressed(&s, a, b, phi));
        vec.iter().copied().collect()
    } else {
        Vec::new()
    };
    InnerMax {
        value: best,
        phi,
        coeffs,
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let r = libm::fmod(phi, TAU);
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

fn unit_or_first(v: Vec<Complex64>) -> Vec<Complex64> {
    let n = norm(&v);
    let mut out = CVector::from_vec(v);
    if n > 1e-150 {
        out /= Complex64::new(n, 0.0);
    } else {
        out.fill(Complex64::new(0.0, 0.0));
        out[0] = Complex64::new(1.0, 0.0);
    }
    linalg::fix_phase(&mut out);
    out.iter().copied().collect()
}

fn golden_max(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    while hi - lo > GOLDEN_TOL {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = g(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Best free state found inside one core subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceMax {
    /// Position of the subspace in its family.
    pub index: usize,
    pub argmax: Argmax,
    pub value: f64,
    pub best_start: usize,
    pub local_maxima: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Bounds {
    xi: f64,
    alpha: f64,
    complex: bool,
}

impl Bounds {
    fn dim(&self) -> usize {
        if self.complex {
            4
        } else {
            2
        }
    }

    fn params(&self, x: &[f64]) -> GaussianParams {
        if self.complex {
            let clamp = |z: Complex64, max: f64| {
                let r = z.norm();
                if r > max {
                    z * (max / r)
                } else {
                    z
                }
            };
            GaussianParams::new(
                clamp(Complex64::new(x[0], x[1]), self.xi),
                clamp(Complex64::new(x[2], x[3]), self.alpha),
            )
        } else {
            GaussianParams::real(
                x[0].clamp(-self.xi, self.xi),
                x[1].clamp(-self.alpha, self.alpha),
            )
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut u = |m: f64| m * (2.0 * rng.gen::<f64>() - 1.0);
        if self.complex {
            vec![u(self.xi), u(self.xi), u(self.alpha), u(self.alpha)]
        } else {
            vec![u(self.xi), u(self.alpha)]
        }
    }

    fn steps(&self) -> Vec<f64> {
        let (s, a) = (0.05 * self.xi, 0.05 * self.alpha);
        if self.complex {
            vec![s, s, a, a]
        } else {
            vec![s, a]
        }
    }
}

fn subspace_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn search_subspace(
    objective: &ObjectiveSpec,
    sub: &CoreSubspace,
    index: usize,
    cfg: &SearchConfig,
    complex: bool,
    seeds: &[GaussianParams],
) -> SubspaceMax {
    let bounds = Bounds {
        xi: cfg.xi_max,
        alpha: cfg.alpha_max,
        complex,
    };
    let f =
        |x: &[f64]| inner_unchecked(&bounds.params(x), objective, sub, cfg.phi_grid, false).value;

    let mut rng = subspace_rng(cfg.seed, index as u64 + 1);
    let mut points = Vec::with_capacity(cfg.screen);
    points.push(vec![0.0; bounds.dim()]);
    while points.len() < cfg.screen {
        points.push(bounds.sample(&mut rng));
    }
    let values: Vec<f64> = points.iter().map(|p| f(p)).collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));

    let opts = Options {
        xtol: cfg.tolerance,
        ..Options::default()
    };
    let steps = bounds.steps();
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    let mut local_maxima = Vec::with_capacity(cfg.starts);
    for (start, &i) in order.iter().take(cfg.starts).enumerate() {
        let m = neldermead::minimize(|x| -f(x), &points[i], &steps, opts);
        let v = -m.f;
        local_maxima.push(v);
        if best.as_ref().is_none_or(|(bv, _, _)| v > *bv) {
            best = Some((v, m.x, start));
        }
    }
    let (mut value, x, best_start) = best.expect("at least one start");
    let mut params = bounds.params(&x);
    for seed in seeds {
        let v = inner_unchecked(seed, objective, sub, cfg.phi_grid, false).value;
        if v > value {
            value = v;
            params = *seed;
        }
    }
    let inner = inner_unchecked(&params, objective, sub, cfg.phi_grid, true);
    SubspaceMax {
        index,
        argmax: Argmax {
            params,
            phi: inner.phi,
            subspace: sub.clone(),
            coeffs: inner.coeffs,
        },
        value: value.max(inner.value),
        best_start,
        local_maxima,
    }
}

fn prepare(
    objective: &ObjectiveSpec,
    spec: HierarchySpec,
    cfg: &SearchConfig,
) -> Result<crate::cores::CoreFamily> {
    cfg.validate()?;
    let space = cfg.space()?;
    objective.validate(space.dim())?;
    core_subspaces(spec, objective.id, &space)
}

/// Per-subspace maxima over every subspace of the family, without the
/// early stop. Each `(subspace, params)` seed is evaluated as an extra
/// candidate in its subspace.
pub fn subspace_maxima<E: Executor>(
    objective: &ObjectiveSpec,
    spec: HierarchySpec,
    cfg: &SearchConfig,
    exec: &E,
    seeds: &[(CoreSubspace, GaussianParams)],
) -> Result<Vec<SubspaceMax>> {
    let family = prepare(objective, spec, cfg)?;
    let subs: Vec<&CoreSubspace> = family.iter().collect();
    Ok(exec.map(subs.len(), |i| {
        let own: Vec<GaussianParams> = seeds
            .iter()
            .filter(|(s, _)| s == subs[i])
            .map(|(_, p)| *p)
            .collect();
        search_subspace(objective, subs[i], i, cfg, cfg.complex_search, &own)
    }))
}

fn sweep_exhausted(values: &[f64]) -> bool {
    let mut streak = 0;
    for w in values.windows(2) {
        streak = if w[1] < w[0] { streak + 1 } else { 0 };
        if streak >= SWEEP_PATIENCE {
            return true;
        }
    }
    false
}

fn search_family<E: Executor>(
    objective: &ObjectiveSpec,
    family: &crate::cores::CoreFamily,
    cfg: &SearchConfig,
    exec: &E,
    complex: bool,
) -> Vec<SubspaceMax> {
    let head = family.head.len();
    let mut found = exec.map(head, |i| {
        search_subspace(objective, &family.head[i], i, cfg, complex, &[])
    });
    let mut sweep_values = Vec::new();
    let mut next = 0;
    while next < family.sweep.len() {
        let end = (next + SWEEP_BLOCK).min(family.sweep.len());
        let block = exec.map(end - next, |i| {
            search_subspace(
                objective,
                &family.sweep[next + i],
                head + next + i,
                cfg,
                complex,
                &[],
            )
        });
        sweep_values.extend(block.iter().map(|r| r.value));
        found.extend(block);
        next = end;
        if !cfg.strict && sweep_exhausted(&sweep_values) {
            break;
        }
    }
    found
}

fn reduce(found: &[SubspaceMax]) -> &SubspaceMax {
    let mut best = &found[0];
    for r in &found[1..] {
        let better =
            r.value > best.value || (r.value == best.value && r.best_start < best.best_start);
        if better {
            best = r;
        }
    }
    best
}

/// Largest objective value among random complex-parameter samples drawn in
/// the searched subspaces.
fn validation_max(objective: &ObjectiveSpec, found: &[SubspaceMax], cfg: &SearchConfig) -> f64 {
    let mut rng = subspace_rng(cfg.seed, 0);
    let disk = |max: f64, rng: &mut ChaCha8Rng| {
        let r = max * libm::sqrt(rng.gen::<f64>());
        Complex64::from_polar(r, TAU * rng.gen::<f64>())
    };
    let mut best = f64::NEG_INFINITY;
    for _ in 0..cfg.validation_samples {
        let k = rng.gen_range(0..found.len());
        let xi = disk(cfg.xi_max, &mut rng);
        let alpha = disk(cfg.alpha_max, &mut rng);
        let sub = &found[k].argmax.subspace;
        let v = inner_unchecked(
            &GaussianParams::new(xi, alpha),
            objective,
            sub,
            cfg.phi_grid,
            false,
        )
        .value;
        best = best.max(v);
    }
    best
}

/// Maximum of the objective over Gaussian images of the family's core states.
///
/// Real `(ξ, α)` are searched first. If a random complex sample beats that
/// result by more than the tolerance, the search is repeated over complex
/// parameters; a second violation is reported as [`Error::Validation`].
pub fn outer_maximize<E: Executor>(
    objective: &ObjectiveSpec,
    spec: HierarchySpec,
    cfg: &SearchConfig,
    exec: &E,
) -> Result<ThresholdResult> {
    let family = prepare(objective, spec, cfg)?;
    let mut complex = cfg.complex_search;
    loop {
        let found = search_family(objective, &family, cfg, exec, complex);
        let best = reduce(&found);
        let check = if cfg.validation_samples > 0 {
            validation_max(objective, &found, cfg)
        } else {
            f64::NEG_INFINITY
        };
        let margin = best.value - check;
        if margin < -cfg.tolerance {
            if complex {
                return Err(Error::Validation { excess: -margin });
            }
            complex = true;
            continue;
        }
        let mut maxima: Vec<f64> = found
            .iter()
            .flat_map(|r| r.local_maxima.iter().copied())
            .collect();
        maxima.sort_by(|a, b| b.total_cmp(a));
        let top = &maxima[..maxima.len().min(5)];
        let spread = top.first().copied().unwrap_or(0.0) - top.last().copied().unwrap_or(0.0);
        return Ok(ThresholdResult {
            value: best.value,
            argmax: Some(best.argmax.clone()),
            diagnostics: SearchDiagnostics {
                starts: cfg.starts,
                best_start: best.best_start,
                top5_spread: spread,
                validation_margin: if cfg.validation_samples > 0 {
                    margin
                } else {
                    f64::INFINITY
                },
                subspaces_evaluated: found.len(),
                subspaces_total: family.len(),
                complex_search: complex,
                note: None,
            },
        });
    }
}

/// Objective value of a given free state `S(ξ)D(α)|ψ⟩`, `|ψ⟩` supported on
/// `sub` with the given coefficients, at its best phase.
pub fn free_state_value(
    objective: &ObjectiveSpec,
    params: &GaussianParams,
    sub: &CoreSubspace,
    coeffs: &[Complex64],
) -> f64 {
    let proj = Projection::new(params, sub, objective.rows());
    // ⟨k|U|ψ⟩ = Σ_a c_a U[k, V_a], and the rows hold conj(U[k, V_a])
    let amp = |k: usize| dot(coeffs, proj.row(k)).conj();
    let rho_mn = amp(objective.id.m()) * amp(objective.id.n()).conj();
    let mut value = 2.0 * rho_mn.norm();
    for t in &objective.lambda_terms {
        let p = match t.observable {
            ProbObservable::FockProb(k) => amp(k).norm_sqr(),
            ProbObservable::ErrorProb(n) => 1.0 - (0..=n).map(|k| amp(k).norm_sqr()).sum::<f64>(),
        };
        value += t.weight * p;
    }
    value
}
