//! Downhill simplex minimization with one restart from the converged vertex.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Options {
    pub xtol: f64,
    pub ftol: f64,
    pub max_evals: usize,
    pub restarts: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            xtol: 1e-9,
            ftol: 1e-13,
            max_evals: 2000,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
}

/// Minimizes `f` from `x0` with initial simplex edges `step`.
pub(crate) fn minimize<F>(f: F, x0: &[f64], step: &[f64], opts: Options) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let mut best = run(&f, x0, step, &opts, 0);
    for _ in 0..opts.restarts {
        if best.evals >= opts.max_evals {
            break;
        }
        let next = run(&f, &best.x, step, &opts, best.evals);
        let improved = next.f < best.f;
        let evals = next.evals;
        if improved {
            best = next;
        }
        best.evals = evals;
        if !improved {
            break;
        }
    }
    best
}

fn run<F>(f: &F, x0: &[f64], step: &[f64], opts: &Options, used: usize) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let d = x0.len();
    let evals = Cell::new(used);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    simplex.push(x0.to_vec());
    for i in 0..d {
        let mut v = x0.to_vec();
        v[i] += step[i];
        simplex.push(v);
    }
    let mut fv: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();

    let mut centroid = vec![0.0; d];
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(ci, wi)| ci + t * (wi - ci)).collect()
    };

    loop {
        // order vertices; ties keep their previous relative order
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| fv[a].total_cmp(&fv[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        fv = order.iter().map(|&i| fv[i]).collect();

        let xspread = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let fspread = fv[1..]
            .iter()
            .map(|v| (v - fv[0]).abs())
            .fold(0.0, f64::max);
        if (xspread <= opts.xtol && fspread <= opts.ftol) || evals.get() >= opts.max_evals {
            break;
        }

        for (j, c) in centroid.iter_mut().enumerate() {
            *c = simplex[..d].iter().map(|v| v[j]).sum::<f64>() / d as f64;
        }
        let worst = &simplex[d];
        let xr = point(&centroid, worst, -1.0);
        let fr = eval(&xr);
        if fr < fv[0] {
            let xe = point(&centroid, worst, -2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[d] = xe;
                fv[d] = fe;
            } else {
                simplex[d] = xr;
                fv[d] = fr;
            }
            continue;
        }
        if fr < fv[d - 1] {
            simplex[d] = xr;
            fv[d] = fr;
            continue;
        }
        let (xc, fc) = if fr < fv[d] {
            let xc = point(&centroid, worst, -0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = point(&centroid, worst, 0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < fv[d].min(fr) {
            simplex[d] = xc;
            fv[d] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=d {
            simplex[i] = point(&best, &simplex[i], 0.5);
            fv[i] = eval(&simplex[i]);
        }
    }
    Minimum {
        x: simplex.swap_remove(0),
        f: fv[0],
        evals: evals.get(),
    }
}
