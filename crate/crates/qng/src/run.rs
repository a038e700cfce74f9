//! Executes a [`RunConfig`] and produces its artifact.

use std::fmt::Write as _;
use std::fs;

use qng_core::cores::HierarchySpec;
use qng_core::decoherence::{boundary_sweep, loss_depth, thermal_depth, DepthConfig};
use qng_core::envelope::{
    physical_boundary, physical_boundary_2d, relative_curve_2d, relative_surface_3d, CriterionCurve,
};
use qng_core::measures::{CoherenceId, ProbObservable};
use qng_core::opt::{SearchConfig, ThresholdResult};
use qng_core::thresholds::{
    absolute_threshold, convergence_study, threshold_table, TableRow, ThresholdCache,
};

use crate::artifact::{
    Artifact, BoundarySweep, ConvergenceArtifact, CurveArtifact, DepthArtifact, DepthRow, Payload,
    SurfaceArtifact, ThresholdTable,
};
use crate::cache::DiskCache;
use crate::certify::{CertificationReport, Criterion, Measured, Verdict};
use crate::config::{CertifyInput, Command, DepthTarget, Family, Grids, Observable, RunConfig};
use crate::error::{CliError, ExitCode, Result};
use crate::exec::{with_threads, Rayon};
use crate::state_file::read_state;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifact: Artifact,
    pub exit: ExitCode,
    /// Human-readable digest for the terminal.
    pub summary: String,
}

impl Outcome {
    /// Writes the artifact to `cfg.out`, or returns it for standard output.
    pub fn emit(&self, cfg: &RunConfig) -> Result<Option<String>> {
        let text = self.artifact.render(cfg.format)?;
        match &cfg.out {
            Some(path) => {
                fs::write(path, text).map_err(|e| CliError::io(path, e))?;
                Ok(None)
            }
            None => Ok(Some(text)),
        }
    }
}

struct Context<'a> {
    search: &'a SearchConfig,
    cache: Option<DiskCache>,
}

impl Context<'_> {
    fn threshold_cache(&self) -> Option<&dyn ThresholdCache> {
        self.cache.as_ref().map(|c| c as &dyn ThresholdCache)
    }

    fn threshold(&self, id: CoherenceId, spec: HierarchySpec) -> Result<ThresholdResult> {
        Ok(absolute_threshold(
            id,
            spec,
            self.search,
            &Rayon,
            self.threshold_cache(),
        )?)
    }

    fn cached<T, F>(&self, command: &str, key: &str, compute: F) -> Result<T>
    where
        T: serde::Serialize + serde::de::DeserializeOwned,
        F: FnOnce() -> Result<T>,
    {
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.load(command, key)) {
            return Ok(hit);
        }
        let value = compute()?;
        if let Some(c) = &self.cache {
            c.store(command, key, &value)?;
        }
        Ok(value)
    }

    fn curve(
        &self,
        id: CoherenceId,
        spec: HierarchySpec,
        obs: ProbObservable,
        grids: &Grids,
    ) -> Result<CurveArtifact> {
        let key = format!(
            "curve|{id:?}|{spec:?}|{obs:?}|{:?}|{:?}|{:?}",
            grids.lambda, grids.p, self.search
        );
        self.cached("curve", &key, || {
            let curve =
                relative_curve_2d(id, obs, spec, &grids.lambda, &grids.p, self.search, &Rayon)?;
            let physical =
                physical_boundary(id, obs, &grids.lambda, &grids.p, self.search.dim_report)?;
            Ok(CurveArtifact { curve, physical })
        })
    }

    fn surface(
        &self,
        id: CoherenceId,
        spec: HierarchySpec,
        obs: [ProbObservable; 2],
        grids: &Grids,
    ) -> Result<SurfaceArtifact> {
        let key = format!(
            "surface|{id:?}|{spec:?}|{obs:?}|{grids:?}|{:?}",
            self.search
        );
        self.cached("surface", &key, || {
            let curve: CriterionCurve = self.curve(id, spec, obs[0], grids)?.curve;
            let surface = relative_surface_3d(
                &curve,
                obs[1],
                &grids.lambda2,
                &grids.p,
                &grids.pe,
                self.search,
                &Rayon,
            )?;
            let physical = physical_boundary_2d(
                id,
                obs,
                &grids.lambda,
                &grids.p,
                &grids.pe,
                self.search.dim_report,
            )?;
            Ok(SurfaceArtifact {
                curve,
                surface,
                physical,
            })
        })
    }
}

/// Runs the configured command on a thread pool of the requested size.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    with_threads(cfg.threads, || execute_here(cfg))
}

fn execute_here(cfg: &RunConfig) -> Result<Outcome> {
    let ctx = Context {
        search: &cfg.search,
        cache: cfg
            .use_cache
            .then(|| DiskCache::resolve(cfg.cache_dir.as_deref())),
    };
    let hash = cfg.hash();
    let mut summary = String::new();
    let (payload, exit) = match &cfg.command {
        Command::Thresholds { id, family, orders } => {
            let rows = if family.is_ordered() {
                let kind = family.spec(1)?;
                threshold_table(
                    *id,
                    kind,
                    orders,
                    &cfg.search,
                    &Rayon,
                    ctx.threshold_cache(),
                )?
            } else {
                let spec = family.spec(0)?;
                vec![TableRow {
                    order: 0,
                    spec,
                    result: ctx.threshold(*id, spec)?,
                }]
            };
            for r in &rows {
                let _ = writeln!(
                    summary,
                    "{id} {:<8} T = {:.6}",
                    r.spec.to_string(),
                    r.result.value
                );
            }
            let table = ThresholdTable {
                id: *id,
                family: family.to_string(),
                rows,
            };
            (Payload::ThresholdTable(table), ExitCode::Success)
        }
        Command::Curve {
            id,
            spec,
            observables,
            grids,
        } => match observables.as_slice() {
            [one] => {
                let c = ctx.curve(*id, *spec, one.resolve(*id), grids)?;
                let _ = writeln!(
                    summary,
                    "{id} {spec} curve: absolute {:.6}, touching at P = {:.6}, {} points",
                    c.curve.absolute,
                    c.curve.touching_p,
                    c.curve.points.len()
                );
                (Payload::Curve(c), ExitCode::Success)
            }
            [a, b] if a != b => {
                let s = ctx.surface(*id, *spec, [a.resolve(*id), b.resolve(*id)], grids)?;
                let _ = writeln!(
                    summary,
                    "{id} {spec} surface: {} points, cap active at {} of {} λ₁ values",
                    s.surface.points.len(),
                    s.surface.cap_active,
                    s.surface.lambda1_grid.len()
                );
                (Payload::Surface(s), ExitCode::Success)
            }
            _ => {
                return Err(CliError::Usage(
                    "--observable takes one probability or two distinct ones".into(),
                ))
            }
        },
        Command::Depth {
            id,
            target,
            boundary_sweep: sweep,
            depth,
        } => {
            let d = depth_command(&ctx, *id, target, sweep.as_deref(), depth)?;
            for r in &d.rows {
                let show = |x: Option<f64>| x.map_or("-".to_owned(), |v| format!("{v:.6}"));
                let _ = writeln!(
                    summary,
                    "{id} {} {} T = {:.6}: loss depth {}, thermal depth {}",
                    r.hierarchy,
                    r.order,
                    r.threshold,
                    show(r.loss.map(|x| x.value)),
                    show(r.thermal.map(|x| x.value))
                );
            }
            (Payload::Depth(d), ExitCode::Success)
        }
        Command::Certify {
            id,
            input,
            families,
            orders,
            grids,
        } => {
            let report = certify_command(&ctx, *id, input, families, orders.as_deref(), grids)?;
            for v in &report.verdicts {
                let _ = writeln!(
                    summary,
                    "{:<7} {} {:<11} threshold {:.6} margin {:+.6} {}",
                    v.hierarchy,
                    v.order,
                    v.criterion,
                    v.threshold,
                    v.margin,
                    if v.pass { "PASS" } else { "fail" }
                );
            }
            let exit = if report.any_certified() {
                ExitCode::Success
            } else {
                ExitCode::NotCertified
            };
            (Payload::Certification(report), exit)
        }
        Command::Converge {
            id,
            excluded,
            n_range,
        } => {
            let rows = convergence_study(
                *id,
                n_range,
                *excluded,
                &cfg.search,
                &Rayon,
                ctx.threshold_cache(),
            )?;
            for r in &rows {
                let _ = writeln!(
                    summary,
                    "{id} N = {:>3} excluded {}: 1 - T = {:.4e}",
                    r.n_max, r.excluded, r.one_minus_t
                );
            }
            (
                Payload::Convergence(ConvergenceArtifact { id: *id, rows }),
                ExitCode::Success,
            )
        }
    };
    Ok(Outcome {
        artifact: Artifact::new(hash, payload),
        exit,
        summary,
    })
}

fn depth_command(
    ctx: &Context<'_>,
    id: CoherenceId,
    target: &DepthTarget,
    sweep: Option<&[f64]>,
    depth: &DepthConfig,
) -> Result<DepthArtifact> {
    let targets: Vec<(String, usize, f64)> = match target {
        DepthTarget::Threshold(t) => vec![("threshold".to_owned(), 0, *t)],
        DepthTarget::Hierarchy { family, orders } => orders
            .iter()
            .map(|&o| {
                let spec = family.spec(o)?;
                Ok((spec.to_string(), o, ctx.threshold(id, spec)?.value))
            })
            .collect::<Result<_>>()?,
    };
    let explicit = matches!(target, DepthTarget::Threshold(_));
    let mut rows = Vec::with_capacity(targets.len());
    let mut sweeps = Vec::new();
    for (hierarchy, order, threshold) in targets {
        // an unbeatable hierarchy row has no depth; an explicit threshold must have one
        let has_depth = threshold < 1.0 || explicit;
        let (loss, thermal) = if has_depth {
            (
                Some(loss_depth(id, threshold, depth)?),
                Some(thermal_depth(id, threshold, depth)?),
            )
        } else {
            (None, None)
        };
        if let (Some(nbars), true) = (sweep, has_depth) {
            sweeps.push(BoundarySweep {
                hierarchy: hierarchy.clone(),
                order,
                threshold,
                points: boundary_sweep(id, threshold, nbars, depth)?,
            });
        }
        rows.push(DepthRow {
            hierarchy,
            order,
            threshold,
            loss,
            thermal,
        });
    }
    if rows.iter().all(|r| r.loss.is_none()) {
        return Err(qng_core::Error::NoDepth { threshold: 1.0 }.into());
    }
    Ok(DepthArtifact { id, rows, sweeps })
}

fn certify_command(
    ctx: &Context<'_>,
    id: CoherenceId,
    input: &CertifyInput,
    families: &[Family],
    orders: Option<&[usize]>,
    grids: &Grids,
) -> Result<CertificationReport> {
    let (state, measured) = match input {
        CertifyInput::State { path } => {
            let rho = read_state(path)?;
            id.check(rho.dim())?;
            (
                Some(path.display().to_string()),
                Measured::from_state(&rho, id)?,
            )
        }
        CertifyInput::Measured { c, pm, pn, pe } => (
            None,
            Measured {
                c: *c,
                pm: *pm,
                pn: *pn,
                pe: *pe,
            },
        ),
    };
    measured.check_physical()?;
    // relative criteria need explicitly supplied probabilities
    let relative = matches!(input, CertifyInput::Measured { .. });
    let c = measured.c;
    let mut verdicts = Vec::new();
    for &family in families {
        let list = match (family.is_ordered(), orders) {
            (true, Some(o)) => o.to_vec(),
            _ => family.beatable_orders(id),
        };
        for order in list {
            let spec = family.spec(order)?;
            let name = family.to_string();
            let t = ctx.threshold(id, spec)?;
            verdicts.push(Verdict::new(
                name.clone(),
                order,
                Criterion::Absolute,
                t.value,
                c,
            ));
            if t.is_sentinel() || !relative {
                continue;
            }
            let Some(pn) = measured.pn else { continue };
            let pn_obs = Observable::Pn.resolve(id);
            match measured.pe {
                Some(pe) => {
                    let s = ctx.surface(id, spec, [pn_obs, Observable::Pe.resolve(id)], grids)?;
                    let curve_t = s.curve.threshold_at(pn);
                    verdicts.push(Verdict::new(
                        name.clone(),
                        order,
                        Criterion::Relative2d,
                        curve_t,
                        c,
                    ));
                    let surf_t = s.surface.threshold_at(pn, pe);
                    verdicts.push(Verdict::new(name, order, Criterion::Relative3d, surf_t, c));
                }
                None => {
                    let curve = ctx.curve(id, spec, pn_obs, grids)?;
                    let curve_t = curve.curve.threshold_at(pn);
                    verdicts.push(Verdict::new(name, order, Criterion::Relative2d, curve_t, c));
                }
            }
        }
    }
    Ok(CertificationReport::new(id, state, measured, verdicts))
}
