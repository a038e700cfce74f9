//! Acceptance suite. Each test prints one `criterion N [PASS|FAIL]` line
//! and fails when its criterion is not met. Tolerances are pinned below.

use std::io::Write;
use std::sync::OnceLock;

use num_complex::Complex64;
use qng::config::{Command, Family, Format, RunConfig};
use qng::exec::{with_threads, Rayon};
use qng::run::execute;
use qng_core::cores::{CoreSubspace, HierarchySpec};
use qng_core::decoherence::{
    channel_discrepancy, loss_depth, thermal_depth, DepthConfig, NoisyStateModel,
};
use qng_core::envelope::{
    is_concave, log_lambda_grid, physical_boundary, relative_curve_2d, relative_surface_3d,
    CriterionCurve, REFINE_TOL,
};
use qng_core::fock::{FockSpace, GaussianParams};
use qng_core::measures::{CoherenceId, ProbObservable};
use qng_core::opt::{
    compressed_operator, free_state_value, inner_max, ObjectiveSpec, SearchConfig,
};
use qng_core::thresholds::{absolute_threshold, convergence_study, ConvergenceRow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Absolute tolerance on published threshold values.
const VALUE_TOL: f64 = 0.01;
/// Depth ratios must lie within this fraction of 7.
const RATIO_TOL: f64 = 0.25;
/// Largest change of any acceptance number under a 50% larger cutoff.
const CUTOFF_TOL: f64 = 0.005;
/// Required error reduction when the noise strength is halved.
const SHRINK_RATIO: f64 = 3.5;
const EIGEN_TOL: f64 = 1e-9;
const DIM: usize = 40;

fn id(m: usize, n: usize) -> CoherenceId {
    CoherenceId::new(m, n).unwrap()
}

fn cfg(dim: usize) -> SearchConfig {
    SearchConfig {
        dim_report: dim,
        ..SearchConfig::default()
    }
}

fn t(pair: CoherenceId, spec: HierarchySpec, dim: usize) -> f64 {
    absolute_threshold(pair, spec, &cfg(dim), &Rayon, None)
        .unwrap()
        .value
}

/// Writes past the test harness's output capture, so the line shows for
/// passing criteria too.
fn line(text: &str) {
    let _ = writeln!(std::io::stderr(), "{text}");
}

fn report(n: u32, ok: bool, text: &str) {
    line(&format!(
        "criterion {n} [{}] {text}",
        if ok { "PASS" } else { "FAIL" }
    ));
}

fn near(x: f64, target: f64) -> bool {
    (x - target).abs() <= VALUE_TOL
}

/// Every number the value criteria check, at one cutoff.
#[derive(Debug, Clone)]
struct Numbers {
    fock: [f64; 4],
    gauss: [f64; 4],
    n2_04: f64,
    l2_04: f64,
    n4_04: f64,
    l4_04: f64,
    l1_34: f64,
    l2_34: f64,
    n_top_34: f64,
    n_over_34: f64,
    c01: f64,
    n1_12: f64,
    n2_12: f64,
    l1_12: f64,
    l2_12: f64,
    convergence: Vec<ConvergenceRow>,
}

impl Numbers {
    fn compute(dim: usize) -> Self {
        use HierarchySpec::*;
        let fock = [1, 2, 3, 4].map(|n| t(id(0, n), FockFamily, dim));
        let gauss = [1, 2, 3, 4].map(|n| t(id(0, n), GaussianVacuum, dim));
        let convergence: Vec<ConvergenceRow> = convergence_study(
            id(0, 8),
            &(5..=20).collect::<Vec<_>>(),
            0,
            &cfg(dim),
            &Rayon,
            None,
        )
        .unwrap();
        Self {
            fock,
            gauss,
            n2_04: t(id(0, 4), NHierarchy(2), dim),
            l2_04: t(id(0, 4), LHierarchy(2), dim),
            n4_04: t(id(0, 4), NHierarchy(4), dim),
            l4_04: t(id(0, 4), LHierarchy(4), dim),
            l1_34: t(id(3, 4), LHierarchy(1), dim),
            l2_34: t(id(3, 4), LHierarchy(2), dim),
            n_top_34: t(id(3, 4), NHierarchy(4), dim),
            n_over_34: t(id(3, 4), NHierarchy(5), dim),
            c01: t(id(0, 1), FockFamily, dim),
            n1_12: t(id(1, 2), NHierarchy(1), dim),
            n2_12: t(id(1, 2), NHierarchy(2), dim),
            l1_12: t(id(1, 2), LHierarchy(1), dim),
            l2_12: t(id(1, 2), LHierarchy(2), dim),
            convergence,
        }
    }

    /// Values compared across cutoffs. The N = 20 convergence row is
    /// compared relatively, since it is checked to a factor of two.
    fn scalars(&self) -> Vec<(String, f64)> {
        let mut v: Vec<(String, f64)> = Vec::new();
        for (i, x) in self.fock.iter().enumerate() {
            v.push((format!("t_0{}", i + 1), *x));
        }
        for (i, x) in self.gauss.iter().enumerate() {
            v.push((format!("gauss_0{}", i + 1), *x));
        }
        v.extend([
            ("N2(0,4)".into(), self.n2_04),
            ("L2(0,4)".into(), self.l2_04),
            ("N4(0,4)".into(), self.n4_04),
            ("L4(0,4)".into(), self.l4_04),
            ("L1(3,4)".into(), self.l1_34),
            ("N4(3,4)".into(), self.n_top_34),
            ("fock(0,1)".into(), self.c01),
            ("N1(1,2)".into(), self.n1_12),
            ("N2(1,2)".into(), self.n2_12),
            ("1-T(10)".into(), self.one_minus_t(10)),
        ]);
        v
    }

    fn one_minus_t(&self, n_max: usize) -> f64 {
        self.convergence
            .iter()
            .find(|r| r.n_max == n_max)
            .unwrap()
            .one_minus_t
    }
}

fn at_default_cutoff() -> &'static Numbers {
    static CELL: OnceLock<Numbers> = OnceLock::new();
    CELL.get_or_init(|| Numbers::compute(DIM))
}

#[test]
fn criterion_1_fock_family_thresholds() {
    let x = at_default_cutoff();
    let target = [0.93, 0.71, 0.63, 0.55];
    let ok = x.fock.iter().zip(target).all(|(v, t)| near(*v, t));
    report(
        1,
        ok,
        &format!("t_0n, n=1..4: {:.4?} vs {target:?} ±{VALUE_TOL}", x.fock),
    );
    assert!(ok);
}

#[test]
fn criterion_2_gaussian_vacuum_thresholds() {
    let x = at_default_cutoff();
    let target = [0.93, 0.71, 0.50, 0.46];
    let values_ok = x.gauss.iter().zip(target).all(|(v, t)| near(*v, t));
    let order_ok = (0..4).all(|i| x.fock[i] >= x.gauss[i] - 1e-9)
        && x.fock[2] > x.gauss[2]
        && x.fock[3] > x.gauss[3];
    report(
        2,
        values_ok && order_ok,
        &format!(
            "gauss t_0n, n=1..4: {:.4?} vs {target:?} ±{VALUE_TOL}; fock >= gauss, strict at n=3,4: {order_ok}",
            x.gauss
        ),
    );
    assert!(order_ok, "Fock family must dominate the Gaussian vacuum");
    assert!(
        values_ok,
        "Gaussian-vacuum values {:?} outside ±{VALUE_TOL} of {target:?}",
        x.gauss
    );
}

#[test]
fn criterion_3_hierarchy_comparison() {
    let x = at_default_cutoff();
    let checks = [
        ("N2(0,4)", x.n2_04, 0.55),
        ("L2(0,4)", x.l2_04, 0.62),
        ("N4(0,4)", x.n4_04, 0.80),
        ("L4(0,4)", x.l4_04, 0.80),
        ("L1(3,4)", x.l1_34, 0.80),
        ("top N(3,4)", x.n_top_34, 0.96),
    ];
    let values_ok = checks.iter().all(|(_, v, t)| near(*v, *t));
    // order 4 is the highest beatable N order for C_{3,4}; order 5 and L2 are sentinels
    let sentinels_ok = x.n_over_34 == 1.0 && x.l2_34 == 1.0 && x.n_top_34 < 1.0;
    let text: Vec<String> = checks
        .iter()
        .map(|(n, v, t)| format!("{n}={v:.4}/{t}"))
        .collect();
    report(
        3,
        values_ok && sentinels_ok,
        &format!(
            "{}; sentinels above top order: {sentinels_ok}",
            text.join(" ")
        ),
    );
    assert!(values_ok && sentinels_ok);
}

#[test]
fn criterion_4_anchor_values() {
    let x = at_default_cutoff();
    let values_ok = near(x.c01, 0.93) && near(x.n1_12, 0.84) && near(x.n2_12, 0.96);
    let l_ok = x.l1_12 < 1.0 && x.l2_12 == 1.0;
    report(
        4,
        values_ok && l_ok,
        &format!(
            "C01 fock {:.4}/0.93, C12 N1 {:.4}/0.84, N2 {:.4}/0.96; C12 L exposes only order 1 (L1 {:.4}, L2 {}): {l_ok}",
            x.c01, x.n1_12, x.n2_12, x.l1_12, x.l2_12
        ),
    );
    assert!(values_ok && l_ok);
}

#[test]
fn criterion_5_missing_one_convergence() {
    let x = at_default_cutoff();
    let at10 = x.one_minus_t(10);
    let at20 = x.one_minus_t(20);
    let ten_ok = (at10 - 0.264).abs() <= VALUE_TOL;
    let twenty_ok = (1e-4..=4e-4).contains(&at20);
    let monotone = x
        .convergence
        .windows(2)
        .all(|w| w[1].raw_one_minus_t <= w[0].raw_one_minus_t);
    let ok = ten_ok && twenty_ok && monotone;
    // diagnostic only: the same N = 10 search restricted to real parameters
    let real_only = SearchConfig {
        validation_samples: 0,
        ..cfg(DIM)
    };
    let spec = HierarchySpec::MissingOne {
        n_max: 10,
        excluded: 0,
    };
    let real = 1.0
        - absolute_threshold(id(0, 8), spec, &real_only, &Rayon, None)
            .unwrap()
            .value;
    report(
        5,
        ok,
        &format!(
            "1-T(N=10) = {at10:.4}/0.264 ±{VALUE_TOL} (real-parameter search alone: {real:.4}), \
             1-T(N=20) = {at20:.3e}/2e-4 (x2), searched values nonincreasing over N=5..20: {monotone}"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_6_depth_ratios() {
    let x = at_default_cutoff();
    let pair = id(3, 4);
    let dc = DepthConfig::default();
    let loss = loss_depth(pair, x.l1_34, &dc).unwrap().value
        / loss_depth(pair, x.n_top_34, &dc).unwrap().value;
    let thermal = thermal_depth(pair, x.l1_34, &dc).unwrap().value
        / thermal_depth(pair, x.n_top_34, &dc).unwrap().value;
    let in_band = |r: f64| (r - 7.0).abs() <= 7.0 * RATIO_TOL;
    let ok = in_band(loss) && in_band(thermal);
    report(
        6,
        ok,
        &format!(
            "C34 depth ratios L1 / top N: loss {loss:.3}, thermal {thermal:.3} vs 7 ±{}%",
            RATIO_TOL * 100.0
        ),
    );
    assert!(ok);
}

fn inner_dominates_sampling() -> bool {
    let dim = 10;
    let space = FockSpace::new(dim).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let m = rng.gen_range(0..dim - 1);
        let n = rng.gen_range(m + 1..dim);
        let mut obj = ObjectiveSpec::coherence(id(m, n));
        if rng.gen_bool(0.5) {
            obj = obj
                .with_term(ProbObservable::FockProb(n), rng.gen_range(-3.0..3.0))
                .with_term(ProbObservable::ErrorProb(n), rng.gen_range(-3.0..3.0));
        }
        let size = rng.gen_range(1..=4);
        let mut idx: Vec<usize> = (0..dim).collect();
        for i in 0..size {
            let j = rng.gen_range(i..dim);
            idx.swap(i, j);
        }
        let sub = CoreSubspace::new(idx[..size].to_vec()).unwrap();
        let c = |r: &mut ChaCha8Rng, s: f64| Complex64::new(r.gen_range(-s..s), r.gen_range(-s..s));
        let params = GaussianParams::new(c(&mut rng, 0.6), c(&mut rng, 1.5));
        let best = inner_max(&params, &obj, &sub, &space, 64).unwrap().value;
        for _ in 0..10_000 {
            let mut v: Vec<Complex64> = (0..size).map(|_| c(&mut rng, 1.0)).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= norm);
            if free_state_value(&obj, &params, &sub, &v) > best + EIGEN_TOL {
                return false;
            }
        }
    }
    true
}

fn closed_form_matches_eigensolve() -> bool {
    let dim = 10;
    let space = FockSpace::new(dim).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    (0..200).all(|_| {
        let m = rng.gen_range(0..dim - 1);
        let n = rng.gen_range(m + 1..dim);
        let obj = ObjectiveSpec::coherence(id(m, n));
        let a = rng.gen_range(0..dim);
        let b = rng.gen_range(0..dim);
        let sub = CoreSubspace::new(vec![a, b, (a + 3) % dim]).unwrap();
        let params = GaussianParams::new(
            Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)),
            Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)),
        );
        let best = inner_max(&params, &obj, &sub, &space, 64).unwrap();
        let top = |phi: f64| {
            let h = compressed_operator(&params, phi, &obj, &sub, &space).unwrap();
            h.symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let scan_max = (0..720)
            .map(|k| top(k as f64 * std::f64::consts::TAU / 720.0))
            .fold(f64::NEG_INFINITY, f64::max);
        (top(best.phi) - best.value).abs() < EIGEN_TOL && scan_max <= best.value + EIGEN_TOL
    })
}

struct CurveCheck {
    name: String,
    concave: bool,
    below_absolute: bool,
    below_physical: bool,
    touches: bool,
}

fn check_curve(curve: &CriterionCurve, absolute: f64, grid: &[f64], p_grid: &[f64]) -> CurveCheck {
    let physical = physical_boundary(curve.id, curve.observable, grid, p_grid, DIM).unwrap();
    let ps: Vec<f64> = curve.points.iter().map(|p| p.p).collect();
    let raw: Vec<f64> = curve.points.iter().map(|p| p.raw).collect();
    CurveCheck {
        name: format!("{} vs {}", curve.id, curve.observable),
        concave: is_concave(&ps, &raw, 1e-9),
        below_absolute: curve
            .points
            .iter()
            .all(|p| p.c_threshold <= absolute + 1e-9),
        below_physical: curve
            .points
            .iter()
            .all(|p| p.c_threshold <= physical.threshold_at(p.p) + REFINE_TOL),
        touches: (curve.threshold_at(curve.touching_p) - absolute).abs() <= REFINE_TOL,
    }
}

#[test]
fn criterion_7_property_suites() {
    let mut items: Vec<(String, bool)> = Vec::new();

    items.push((
        "inner maximum dominates 1e4 samples on 100 instances".into(),
        inner_dominates_sampling(),
    ));
    items.push((
        "closed form equals eigensolve to 1e-9".into(),
        closed_form_matches_eigensolve(),
    ));

    // relative curves
    let grid = log_lambda_grid(15, 1e-2, 1e2);
    let p_grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
    let base = cfg(DIM);
    let c01 = id(0, 1);
    let abs01 = t(c01, HierarchySpec::FockFamily, DIM);
    let mut curves = Vec::new();
    for obs in [ProbObservable::FockProb(1), ProbObservable::ErrorProb(1)] {
        let curve = relative_curve_2d(
            c01,
            obs,
            HierarchySpec::FockFamily,
            &grid,
            &p_grid,
            &base,
            &Rayon,
        )
        .unwrap();
        curves.push(check_curve(&curve, abs01, &grid, &p_grid));
    }
    let c12 = id(1, 2);
    let abs12 = t(c12, HierarchySpec::NHierarchy(1), DIM);
    let curve12 = relative_curve_2d(
        c12,
        ProbObservable::FockProb(2),
        HierarchySpec::NHierarchy(1),
        &grid,
        &p_grid,
        &base,
        &Rayon,
    )
    .unwrap();
    curves.push(check_curve(&curve12, abs12, &grid, &p_grid));
    for c in &curves {
        items.push((
            format!(
                "curve {}: concave {} <= absolute {} <= physical {} touches {}",
                c.name, c.concave, c.below_absolute, c.below_physical, c.touches
            ),
            c.concave && c.below_absolute && c.below_physical && c.touches,
        ));
    }

    // surface against its single-probability curve, on a compact grid
    let small = SearchConfig {
        dim_report: 20,
        ..SearchConfig::default()
    };
    let s_grid = log_lambda_grid(7, 1e-2, 1e2);
    let pn_grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let pe_grid = vec![0.0, 0.02, 0.05, 0.1];
    let curve = relative_curve_2d(
        c01,
        ProbObservable::FockProb(1),
        HierarchySpec::FockFamily,
        &s_grid,
        &pn_grid,
        &small,
        &Rayon,
    )
    .unwrap();
    let surface = relative_surface_3d(
        &curve,
        ProbObservable::ErrorProb(1),
        &log_lambda_grid(5, 1e-2, 1e2),
        &pn_grid,
        &pe_grid,
        &small,
        &Rayon,
    )
    .unwrap();
    let below = surface
        .points
        .iter()
        .all(|p| p.c_threshold <= curve.threshold_at(p.pn) + 1e-9);
    items.push((
        format!(
            "3-D surface <= 2-D curve at all {} points, Pe in {pe_grid:?}",
            surface.points.len()
        ),
        below,
    ));

    // first-order model against the exact channel
    let space = FockSpace::with_work(8, 200).unwrap();
    let errs: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&e| {
            let mut m = NoisyStateModel::new(c01, e, 0.5 * e);
            m.allow_nonperturbative = true;
            channel_discrepancy(&m, &space).unwrap()
        })
        .collect();
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    items.push((
        format!("model vs exact channel error shrinks >= {SHRINK_RATIO}x per halving: ratios {:.3} {:.3}", ratios[0], ratios[1]),
        ratios.iter().all(|r| *r >= SHRINK_RATIO),
    ));

    // cutoff independence
    let lo = at_default_cutoff().scalars();
    let hi = Numbers::compute(DIM * 3 / 2).scalars();
    let worst = lo
        .iter()
        .zip(&hi)
        .map(|((name, a), (_, b))| (name.clone(), (a - b).abs()))
        .reduce(|w, x| if x.1 > w.1 { x } else { w })
        .unwrap();
    items.push((
        format!(
            "dim {DIM} -> {}: largest change {:.2e} ({}) < {CUTOFF_TOL}",
            DIM * 3 / 2,
            worst.1,
            worst.0
        ),
        worst.1 < CUTOFF_TOL,
    ));

    // determinism across repeats and thread counts
    let run = |threads: usize| {
        let cfg = RunConfig {
            search: cfg(DIM),
            command: Command::Thresholds {
                id: id(0, 4),
                family: Family::N,
                orders: vec![1, 2, 3, 4],
            },
            format: Format::Json,
            out: None,
            cache_dir: None,
            use_cache: false,
            threads: Some(threads),
        };
        execute(&cfg)
            .unwrap()
            .artifact
            .render(Format::Json)
            .unwrap()
    };
    let serial = run(1);
    let identical =
        serial == run(1) && serial == run(4) && with_threads(Some(2), || run(3)) == serial;
    items.push((
        "seeded runs byte-identical under 1, 3 and 4 threads".into(),
        identical,
    ));

    let ok = items.iter().all(|(_, pass)| *pass);
    let failed: Vec<&str> = items
        .iter()
        .filter(|(_, p)| !*p)
        .map(|(n, _)| n.as_str())
        .collect();
    report(
        7,
        ok,
        &format!(
            "{} of {} property checks hold",
            items.len() - failed.len(),
            items.len()
        ),
    );
    for (name, pass) in &items {
        line(&format!(
            "    [{}] {name}",
            if *pass { "ok" } else { "FAIL" }
        ));
    }
    assert!(ok, "failing property checks: {failed:?}");
}
