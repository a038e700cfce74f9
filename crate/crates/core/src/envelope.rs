//! Relative criteria: lower envelopes `min_λ [F(λ) − λP]` of the maximal
//! penalized coherence `F(λ) = max (C + λP)` over free states, and the same
//! construction over all physical states.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::cores::{CoreSubspace, HierarchySpec};
use crate::exec::Executor;
use crate::fock::GaussianParams;
use crate::measures::{CoherenceId, ProbObservable};
use crate::opt::{
    free_state_value, inner_max, outer_maximize, subspace_maxima, Argmax, ObjectiveSpec,
    SearchConfig,
};
use crate::{Error, Result};

/// Refinement stops once no curve point moves by more than this.
pub const REFINE_TOL: f64 = 1e-3;
const MAX_REFINE_ROUNDS: usize = 8;
const GOLDEN_TOL: f64 = 1e-10;

/// `per_sign` log-spaced magnitudes in `[lo, hi]` with both signs, plus 0,
/// in ascending order.
pub fn log_lambda_grid(per_sign: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mags: Vec<f64> = (0..per_sign)
        .map(|i| {
            let t = if per_sign == 1 {
                0.0
            } else {
                i as f64 / (per_sign - 1) as f64
            };
            libm::pow(
                10.0,
                libm::log10(lo) + t * (libm::log10(hi) - libm::log10(lo)),
            )
        })
        .collect();
    let mut grid: Vec<f64> = mags.iter().rev().map(|m| -m).collect();
    grid.push(0.0);
    grid.extend(mags);
    grid
}

/// 61 magnitudes per sign in `[1e-3, 1e3]` plus 0.
pub fn default_lambda_grid() -> Vec<f64> {
    log_lambda_grid(61, 1e-3, 1e3)
}

fn checked_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.iter().any(|l| !l.is_finite()) {
        return Err(Error::Grid("λ grid has non-finite entries".into()));
    }
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    let has = |f: fn(&f64) -> bool| g.iter().any(f);
    if !(has(|l| *l < 0.0) && has(|l| *l == 0.0) && has(|l| *l > 0.0)) {
        return Err(Error::Grid(
            "λ grid must contain negative values, 0 and positive values".into(),
        ));
    }
    Ok(g)
}

fn checked_probs(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() || grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Grid(
            "probability grid must be nonempty and lie in [0, 1]".into(),
        ));
    }
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(g)
}

/// Family whose free states define a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CurveKind {
    Free(HierarchySpec),
    /// All states of the reporting space.
    Physical {
        dim: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    /// Envelope clipped to `[0, 1]`.
    pub c_threshold: f64,
    /// Envelope before clipping.
    pub raw: f64,
    /// Minimizing `λ`.
    pub lambda: f64,
}

/// Minimal certifiable `C_{m,n}` as a function of one probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionCurve {
    pub id: CoherenceId,
    pub observable: ProbObservable,
    pub kind: CurveKind,
    pub lambda_grid: Vec<f64>,
    /// `F(λ)` on `lambda_grid`.
    pub f_values: Vec<f64>,
    pub points: Vec<CurvePoint>,
    /// `F(0)`, the absolute threshold of the family.
    pub absolute: f64,
    /// Probability of the `λ = 0` maximizer, where the curve touches `absolute`.
    pub touching_p: f64,
    pub refinements: usize,
    /// Maximizer of `F` at each grid `λ` (empty for physical curves).
    #[serde(default)]
    pub maximizers: Vec<Argmax>,
}

impl CriterionCurve {
    /// Unclipped envelope and minimizing `λ` at probability `p`.
    pub fn raw_at(&self, p: f64) -> (f64, f64) {
        match self.kind {
            CurveKind::Free(_) => grid_envelope(&self.lambda_grid, &self.f_values, p),
            CurveKind::Physical { dim } => {
                physical_min_1d(self.id, self.observable, dim, p, self.lambda_span())
            }
        }
    }

    pub fn threshold_at(&self, p: f64) -> f64 {
        self.raw_at(p).0.clamp(0.0, 1.0)
    }

    fn lambda_span(&self) -> f64 {
        self.lambda_grid
            .iter()
            .fold(0.0, |m: f64, l| m.max(l.abs()))
    }
}

fn grid_envelope(lambdas: &[f64], f: &[f64], p: f64) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    for (l, v) in lambdas.iter().zip(f) {
        let c = v - l * p;
        if c < best.0 {
            best = (c, *l);
        }
    }
    best
}

/// Whether `ys` over increasing `xs` is concave within `tol`.
pub fn is_concave(xs: &[f64], ys: &[f64], tol: f64) -> bool {
    (1..xs.len().saturating_sub(1)).all(|i| {
        let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
        let chord = ys[i - 1] + (ys[i + 1] - ys[i - 1]) * (x1 - x0) / (x2 - x0);
        ys[i] >= chord - tol
    })
}

/// `F(λ)` on a growing λ grid with the maximizer of each λ.
struct Dual<'a, E: Executor> {
    id: CoherenceId,
    observable: ProbObservable,
    spec: HierarchySpec,
    cfg: &'a SearchConfig,
    exec: &'a E,
    lambdas: Vec<f64>,
    f: Vec<f64>,
    arg: Vec<Argmax>,
    pool: Vec<(CoreSubspace, GaussianParams)>,
}

impl<'a, E: Executor> Dual<'a, E> {
    fn objective(&self, lambda: f64) -> ObjectiveSpec {
        ObjectiveSpec::coherence(self.id).with_term(self.observable, lambda)
    }

    /// Searches the new λ values, then lets every maximizer found so far
    /// compete at every λ. `F` is then a maximum of convex functions of λ
    /// sampled on the grid.
    fn add(&mut self, new: &[f64]) -> Result<()> {
        let found = self.exec.map(new.len(), |i| {
            outer_maximize(&self.objective(new[i]), self.spec, self.cfg, self.exec)
        });
        let old_lambdas = self.lambdas.len();
        let old_pool = self.pool.len();
        for (l, r) in new.iter().zip(found) {
            let a = r?.argmax.expect("search returns a maximizer");
            self.lambdas.push(*l);
            self.f.push(f64::NEG_INFINITY);
            if !self
                .pool
                .iter()
                .any(|(s, p)| *s == a.subspace && *p == a.params)
            {
                self.pool.push((a.subspace.clone(), a.params));
            }
            self.arg.push(a);
        }
        let space = self.cfg.space()?;
        let pairs: Vec<(usize, usize)> = (0..self.lambdas.len())
            .flat_map(|i| (0..self.pool.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| i >= old_lambdas || j >= old_pool)
            .collect();
        let vals = self.exec.map(pairs.len(), |q| {
            let (i, j) = pairs[q];
            let (sub, params) = &self.pool[j];
            inner_max(
                params,
                &self.objective(self.lambdas[i]),
                sub,
                &space,
                self.cfg.phi_grid,
            )
        });
        for (&(i, j), v) in pairs.iter().zip(vals) {
            let v = v?;
            if v.value > self.f[i] {
                self.f[i] = v.value;
                self.arg[i] = Argmax {
                    params: self.pool[j].1,
                    phi: v.phi,
                    subspace: self.pool[j].0.clone(),
                    coeffs: v.coeffs,
                };
            }
        }
        let n = self.lambdas.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.lambdas[a].total_cmp(&self.lambdas[b]));
        self.lambdas = order.iter().map(|&k| self.lambdas[k]).collect();
        self.f = order.iter().map(|&k| self.f[k]).collect();
        self.arg = order.iter().map(|&k| self.arg[k].clone()).collect();
        Ok(())
    }

    fn check_convex(&self) -> Result<()> {
        for i in 1..self.lambdas.len().saturating_sub(1) {
            let (l0, l1, l2) = (self.lambdas[i - 1], self.lambdas[i], self.lambdas[i + 1]);
            let chord = self.f[i - 1] + (self.f[i + 1] - self.f[i - 1]) * (l1 - l0) / (l2 - l0);
            if self.f[i] > chord + 1e-7 * (1.0 + self.f[i].abs()) {
                return Err(Error::Envelope(format!(
                    "F is not convex at λ = {l1}: {} exceeds the chord {chord}",
                    self.f[i]
                )));
            }
        }
        Ok(())
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    if a * b > 0.0 {
        a.signum() * libm::sqrt(a * b)
    } else {
        (a + b) / 2.0
    }
}

fn envelope_points(lambdas: &[f64], f: &[f64], p_grid: &[f64]) -> Vec<CurvePoint> {
    p_grid
        .iter()
        .map(|&p| {
            let (raw, lambda) = grid_envelope(lambdas, f, p);
            CurvePoint {
                p,
                c_threshold: raw.clamp(0.0, 1.0),
                raw,
                lambda,
            }
        })
        .collect()
}

/// Probability of `obs` in the free state described by `arg`.
pub fn free_state_probability(id: CoherenceId, obs: ProbObservable, arg: &Argmax) -> f64 {
    let base = ObjectiveSpec::coherence(id);
    let with = base.clone().with_term(obs, 1.0);
    free_state_value(&with, &arg.params, &arg.subspace, &arg.coeffs)
        - free_state_value(&base, &arg.params, &arg.subspace, &arg.coeffs)
}

/// Relative criterion for `C_{m,n}` given one measured probability.
pub fn relative_curve_2d<E: Executor>(
    id: CoherenceId,
    observable: ProbObservable,
    spec: HierarchySpec,
    lambda_grid: &[f64],
    p_grid: &[f64],
    cfg: &SearchConfig,
    exec: &E,
) -> Result<CriterionCurve> {
    let grid = checked_grid(lambda_grid)?;
    let probs = checked_probs(p_grid)?;
    let mut dual = Dual {
        id,
        observable,
        spec,
        cfg,
        exec,
        lambdas: Vec::new(),
        f: Vec::new(),
        arg: Vec::new(),
        pool: Vec::new(),
    };
    dual.add(&grid)?;
    let mut points = envelope_points(&dual.lambdas, &dual.f, &probs);
    let mut refinements = 0;
    for _ in 0..MAX_REFINE_ROUNDS {
        let mut fresh: Vec<f64> = Vec::new();
        for pt in &points {
            let i = dual
                .lambdas
                .iter()
                .position(|l| *l == pt.lambda)
                .expect("active λ on grid");
            let mut cand = Vec::new();
            if i > 0 {
                cand.push(midpoint(dual.lambdas[i - 1], dual.lambdas[i]));
            }
            if i + 1 < dual.lambdas.len() {
                cand.push(midpoint(dual.lambdas[i], dual.lambdas[i + 1]));
            }
            for c in cand {
                if !dual.lambdas.contains(&c) && !fresh.contains(&c) {
                    fresh.push(c);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        fresh.sort_by(f64::total_cmp);
        dual.add(&fresh)?;
        refinements += 1;
        let next = envelope_points(&dual.lambdas, &dual.f, &probs);
        let moved = points
            .iter()
            .zip(&next)
            .map(|(a, b)| (a.raw - b.raw).abs())
            .fold(0.0, f64::max);
        points = next;
        if moved <= REFINE_TOL {
            break;
        }
    }
    dual.check_convex()?;
    let zero = dual
        .lambdas
        .iter()
        .position(|l| *l == 0.0)
        .expect("0 is on the grid");
    Ok(CriterionCurve {
        id,
        observable,
        kind: CurveKind::Free(spec),
        touching_p: free_state_probability(id, observable, &dual.arg[zero]),
        absolute: dual.f[zero],
        lambda_grid: dual.lambdas,
        f_values: dual.f,
        points,
        refinements,
        maximizers: dual.arg,
    })
}

/// How the envelope minimum over `λ₁` is attained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinimumKind {
    /// One core subspace dominates around the minimizing `λ₁`.
    Stationary,
    /// The dominating core subspace changes at the minimizing `λ₁`.
    Crossing,
    /// Physical boundary, minimized continuously.
    Physical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub pn: f64,
    pub pe: f64,
    pub c_threshold: f64,
    pub raw: f64,
    pub lambda1: f64,
    pub minimum: MinimumKind,
}

/// Minimal certifiable `C_{m,n}` given two measured probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSurface {
    pub id: CoherenceId,
    pub observables: [ProbObservable; 2],
    pub kind: CurveKind,
    pub lambda1_grid: Vec<f64>,
    pub lambda2_grid: Vec<f64>,
    pub pn_grid: Vec<f64>,
    pub pe_grid: Vec<f64>,
    pub points: Vec<SurfacePoint>,
    /// Per-subspace maxima, `f_tilde[k][i1 * lambda2_grid.len() + i2]`.
    #[serde(default)]
    pub f_tilde: Vec<Vec<f64>>,
    /// `F(λ₁)` of the matching single-probability curve; bounds `H` from above.
    #[serde(default)]
    pub cap: Vec<f64>,
    /// Number of `λ₁` where the per-subspace data exceeded `cap` by more than 1e-9.
    pub cap_active: usize,
}

impl CriterionSurface {
    /// Unclipped envelope, minimizing `λ₁` and the kind of minimum.
    pub fn raw_at(&self, pn: f64, pe: f64) -> (f64, f64, MinimumKind) {
        if let CurveKind::Physical { dim } = self.kind {
            let span = self
                .lambda1_grid
                .iter()
                .fold(0.0, |m: f64, l| m.max(l.abs()));
            let (v, l1) = physical_min_2d(self.id, self.observables, dim, pn, pe, span);
            return (v, l1, MinimumKind::Physical);
        }
        let n2 = self.lambda2_grid.len();
        let h_tilde = |k: usize, i1: usize| {
            let row = &self.f_tilde[k][i1 * n2..(i1 + 1) * n2];
            row.iter()
                .zip(&self.lambda2_grid)
                .map(|(f, l2)| f - l2 * pe)
                .fold(f64::INFINITY, f64::min)
        };
        let dominant: Vec<(f64, usize)> = (0..self.lambda1_grid.len())
            .map(|i1| {
                let mut best = (f64::NEG_INFINITY, 0);
                for k in 0..self.f_tilde.len() {
                    let h = h_tilde(k, i1);
                    if h > best.0 {
                        best = (h, k);
                    }
                }
                (best.0.min(self.cap[i1]), best.1)
            })
            .collect();
        let mut best = (f64::INFINITY, 0usize);
        for (i1, l1) in self.lambda1_grid.iter().enumerate() {
            let v = dominant[i1].0 - l1 * pn;
            if v < best.0 {
                best = (v, i1);
            }
        }
        let i = best.1;
        let k = dominant[i].1;
        let switches =
            (i > 0 && dominant[i - 1].1 != k) || (i + 1 < dominant.len() && dominant[i + 1].1 != k);
        let kind = if switches {
            MinimumKind::Crossing
        } else {
            MinimumKind::Stationary
        };
        (best.0, self.lambda1_grid[i], kind)
    }

    pub fn threshold_at(&self, pn: f64, pe: f64) -> f64 {
        self.raw_at(pn, pe).0.clamp(0.0, 1.0)
    }

    fn tabulate(&mut self) {
        let mut points = Vec::with_capacity(self.pn_grid.len() * self.pe_grid.len());
        for &pe in &self.pe_grid {
            for &pn in &self.pn_grid {
                let (raw, lambda1, minimum) = self.raw_at(pn, pe);
                points.push(SurfacePoint {
                    pn,
                    pe,
                    c_threshold: raw.clamp(0.0, 1.0),
                    raw,
                    lambda1,
                    minimum,
                });
            }
        }
        self.points = points;
    }
}

/// Relative criterion given two probabilities, built per core subspace.
///
/// For each core subspace `k`, `F̃_k(λ₁, λ₂)` is maximized; then
/// `H(λ₁, Pe) = max_k min_λ₂ [F̃_k − λ₂ Pe]` and the surface is
/// `min_λ₁ [H − λ₁ Pn]`. The `λ₁` grid and the seeds come from `curve`,
/// the single-probability curve for `observables[0]` of the same family, and
/// `H` is capped by its `F(λ₁)`.
#[allow(clippy::too_many_arguments)]
pub fn relative_surface_3d<E: Executor>(
    curve: &CriterionCurve,
    pe_observable: ProbObservable,
    lambda2_grid: &[f64],
    pn_grid: &[f64],
    pe_grid: &[f64],
    cfg: &SearchConfig,
    exec: &E,
) -> Result<CriterionSurface> {
    let CurveKind::Free(spec) = curve.kind else {
        return Err(Error::Spec(
            "surface needs a curve of a free-state family".into(),
        ));
    };
    let l2 = checked_grid(lambda2_grid)?;
    let pn = checked_probs(pn_grid)?;
    let pe = checked_probs(pe_grid)?;
    let l1 = curve.lambda_grid.clone();
    let id = curve.id;
    let pn_obs = curve.observable;

    // maximizers of the curve, evaluated again as candidates in their subspace
    let mut seeds: Vec<(CoreSubspace, GaussianParams)> = Vec::new();
    for a in &curve.maximizers {
        if !seeds
            .iter()
            .any(|(s, p)| *s == a.subspace && *p == a.params)
        {
            seeds.push((a.subspace.clone(), a.params));
        }
    }

    let n1 = l1.len();
    let n2 = l2.len();
    let per_pair = exec.map(n1 * n2, |q| {
        let (i1, i2) = (q / n2, q % n2);
        let obj = ObjectiveSpec::coherence(id)
            .with_term(pn_obs, l1[i1])
            .with_term(pe_observable, l2[i2]);
        subspace_maxima(&obj, spec, cfg, &crate::exec::Serial, &seeds)
    });
    let mut f_tilde: Vec<Vec<f64>> = Vec::new();
    for (q, res) in per_pair.into_iter().enumerate() {
        let res = res?;
        if f_tilde.is_empty() {
            f_tilde = vec![vec![0.0; n1 * n2]; res.len()];
        }
        for r in res {
            f_tilde[r.index][q] = r.value;
        }
    }
    let mut cap_active = 0;
    for i1 in 0..n1 {
        let at_zero = l2.iter().position(|l| *l == 0.0).expect("0 on grid");
        let m = f_tilde
            .iter()
            .map(|row| row[i1 * n2 + at_zero])
            .fold(f64::NEG_INFINITY, f64::max);
        if m > curve.f_values[i1] + 1e-9 {
            cap_active += 1;
        }
    }
    let mut surface = CriterionSurface {
        id,
        observables: [pn_obs, pe_observable],
        kind: curve.kind,
        lambda1_grid: l1,
        lambda2_grid: l2,
        pn_grid: pn,
        pe_grid: pe,
        points: Vec::new(),
        f_tilde,
        cap: curve.f_values.clone(),
        cap_active,
    };
    surface.tabulate();
    Ok(surface)
}

/// `F(λ)` over all states: the top eigenvalue of `X_{m,n}(0) + Σ λ_i Π_i`.
///
/// Every term is diagonal in the Fock basis except the `{m, n}` block, so
/// the top eigenvalue is the larger of that 2×2 block's and of the other
/// diagonal entries.
pub fn physical_f(id: CoherenceId, terms: &[(ProbObservable, f64)], dim: usize) -> f64 {
    let diag = |j: usize| -> f64 {
        terms
            .iter()
            .filter(|(o, _)| o.contains(j))
            .map(|(_, w)| w)
            .sum()
    };
    let (dm, dn) = (diag(id.m()), diag(id.n()));
    let half = (dm - dn) / 2.0;
    let block = (dm + dn) / 2.0 + libm::sqrt(half * half + 1.0);
    (0..dim)
        .filter(|&j| j != id.m() && j != id.n())
        .map(diag)
        .fold(block, f64::max)
}

fn golden_min(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    while hi - lo > GOLDEN_TOL * (1.0 + lo.abs().max(hi.abs())) {
        if f1 <= f2 {
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
    // the ends matter when the minimizer sits on the boundary
    let mut best = if f1 <= f2 { (f1, x1) } else { (f2, x2) };
    for x in [lo, hi] {
        let v = g(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best
}

fn physical_min_1d(
    id: CoherenceId,
    obs: ProbObservable,
    dim: usize,
    p: f64,
    span: f64,
) -> (f64, f64) {
    golden_min(|l| physical_f(id, &[(obs, l)], dim) - l * p, -span, span)
}

fn physical_min_2d(
    id: CoherenceId,
    obs: [ProbObservable; 2],
    dim: usize,
    pn: f64,
    pe: f64,
    span: f64,
) -> (f64, f64) {
    let inner = |l1: f64| {
        golden_min(
            |l2| physical_f(id, &[(obs[0], l1), (obs[1], l2)], dim) - l1 * pn - l2 * pe,
            -span,
            span,
        )
        .0
    };
    golden_min(inner, -span, span)
}

/// Largest `C_{m,n}` of any state with the given probability, as a curve
/// over `p_grid`. `λ` is restricted to the span of `lambda_grid`, like the
/// free-state curves it bounds.
pub fn physical_boundary(
    id: CoherenceId,
    observable: ProbObservable,
    lambda_grid: &[f64],
    p_grid: &[f64],
    dim: usize,
) -> Result<CriterionCurve> {
    id.check(dim)?;
    let grid = checked_grid(lambda_grid)?;
    let probs = checked_probs(p_grid)?;
    let span = grid.iter().fold(0.0, |m: f64, l| m.max(l.abs()));
    let f_values: Vec<f64> = grid
        .iter()
        .map(|&l| physical_f(id, &[(observable, l)], dim))
        .collect();
    let points = probs
        .iter()
        .map(|&p| {
            let (raw, lambda) = physical_min_1d(id, observable, dim, p, span);
            CurvePoint {
                p,
                c_threshold: raw.clamp(0.0, 1.0),
                raw,
                lambda,
            }
        })
        .collect();
    let absolute = physical_f(id, &[], dim);
    Ok(CriterionCurve {
        id,
        observable,
        kind: CurveKind::Physical { dim },
        lambda_grid: grid,
        f_values,
        points,
        absolute,
        touching_p: 0.5,
        refinements: 0,
        maximizers: Vec::new(),
    })
}

/// Physical boundary given two probabilities.
pub fn physical_boundary_2d(
    id: CoherenceId,
    observables: [ProbObservable; 2],
    lambda_grid: &[f64],
    pn_grid: &[f64],
    pe_grid: &[f64],
    dim: usize,
) -> Result<CriterionSurface> {
    id.check(dim)?;
    let grid = checked_grid(lambda_grid)?;
    let mut surface = CriterionSurface {
        id,
        observables,
        kind: CurveKind::Physical { dim },
        lambda1_grid: grid.clone(),
        lambda2_grid: grid,
        pn_grid: checked_probs(pn_grid)?,
        pe_grid: checked_probs(pe_grid)?,
        points: Vec::new(),
        f_tilde: Vec::new(),
        cap: Vec::new(),
        cap_active: 0,
    };
    surface.tabulate();
    Ok(surface)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id01() -> CoherenceId {
        CoherenceId::new(0, 1).unwrap()
    }

    #[test]
    fn default_grid_shape() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 123);
        assert_eq!(g[61], 0.0);
        assert!((g[0] + 1e3).abs() < 1e-9 && (g[122] - 1e3).abs() < 1e-9);
        assert!((g[62] - 1e-3).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_needs_both_signs_and_zero() {
        assert!(checked_grid(&[0.0, 1.0]).is_err());
        assert!(checked_grid(&[-1.0, 1.0]).is_err());
        assert!(checked_grid(&[-1.0, 0.0, 1.0]).is_ok());
    }

    #[test]
    fn physical_f_matches_dense_eigenvalue() {
        use crate::{linalg, CMatrix};
        use num_complex::Complex64;
        let id = CoherenceId::new(1, 3).unwrap();
        let terms = [
            (ProbObservable::FockProb(3), -0.4),
            (ProbObservable::ErrorProb(2), 0.9),
        ];
        let dim = 7;
        let mut h = CMatrix::zeros(dim, dim);
        h[(1, 3)] = Complex64::new(1.0, 0.0);
        h[(3, 1)] = Complex64::new(1.0, 0.0);
        for j in 0..dim {
            let d: f64 = terms
                .iter()
                .filter(|(o, _)| o.contains(j))
                .map(|(_, w)| w)
                .sum();
            h[(j, j)] += Complex64::new(d, 0.0);
        }
        assert!((physical_f(id, &terms, dim) - linalg::max_eigenvalue(&h)).abs() < 1e-12);
    }

    #[test]
    fn physical_boundary_closed_forms() {
        let grid = default_lambda_grid();
        let c = physical_boundary(
            id01(),
            ProbObservable::FockProb(1),
            &grid,
            &[0.2, 0.5, 0.7],
            10,
        )
        .unwrap();
        for pt in &c.points {
            let exact = 2.0 * libm::sqrt(pt.p * (1.0 - pt.p));
            assert!((pt.raw - exact).abs() < 1e-7, "{} {}", pt.raw, exact);
        }
        assert!((c.points[0].c_threshold - 0.8).abs() < 1e-7);
        assert!((c.points[1].c_threshold - 1.0).abs() < 1e-7);

        let obs = [ProbObservable::FockProb(1), ProbObservable::ErrorProb(1)];
        let s = physical_boundary_2d(id01(), obs, &grid, &[0.3, 0.45], &[0.0, 0.1], 10).unwrap();
        for pt in &s.points {
            let exact = 2.0 * libm::sqrt(pt.pn * (1.0 - pt.pn - pt.pe));
            assert!((pt.raw - exact).abs() < 1e-6, "{} {}", pt.raw, exact);
        }
        let pe = physical_boundary(id01(), ProbObservable::ErrorProb(1), &grid, &[0.1, 0.4], 10)
            .unwrap();
        for pt in &pe.points {
            assert!((pt.raw - (1.0 - pt.p)).abs() < 1e-7);
        }
    }

    #[test]
    fn concavity_helper() {
        assert!(is_concave(&[0.0, 1.0, 2.0], &[0.0, 1.0, 1.5], 0.0));
        assert!(!is_concave(&[0.0, 1.0, 2.0], &[0.0, 0.2, 1.5], 0.0));
    }
}
