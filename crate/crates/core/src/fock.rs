//! Truncated Fock-space linear algebra: states, ladder operators and Gaussian
//! unitaries `S(ξ)D(α)`.
//!
//! Two routes to the Gaussian unitary are provided. [`displacement_unitary`]
//! and [`squeezing_unitary`] exponentiate the truncated generators at a
//! working dimension above the reporting dimension and keep the top-left
//! block. [`GaussianElements`] evaluates the matrix elements
//! `⟨j|S(ξ)D(α)|k⟩` of the untruncated operator by a three-term recurrence
//! and is what the optimizer uses.
//!
//! Conventions: `D(α) = exp(α a† − α* a)` and `S(ξ) = exp(ξ a†² − ξ* a²)`,
//! without the customary factor 1/2, so the usual squeeze amplitude is
//! `r = 2|ξ|`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{linalg, CMatrix, CVector, Error, Result};

pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Reporting and working dimensions of a truncated single-mode Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockSpace {
    dim_report: usize,
    dim_work: usize,
    tolerance: f64,
}

impl FockSpace {
    /// Space with the default working dimension `4 · dim_report`.
    pub fn new(dim_report: usize) -> Result<Self> {
        Self::with_work(dim_report, 4 * dim_report)
    }

    pub fn with_work(dim_report: usize, dim_work: usize) -> Result<Self> {
        if dim_report < 2 {
            return Err(Error::Config(format!(
                "dim_report must be at least 2, got {dim_report}"
            )));
        }
        if dim_work < dim_report {
            return Err(Error::Config(format!(
                "dim_work {dim_work} is smaller than dim_report {dim_report}"
            )));
        }
        Ok(Self {
            dim_report,
            dim_work,
            tolerance: DEFAULT_TRUNCATION_TOL,
        })
    }

    /// Working dimension from the guard-band rule
    /// `max(4·d, d + ⌈16(|α|² + sinh²(2|ξ|))⌉)`.
    pub fn sized_for(dim_report: usize, params: &GaussianParams) -> Result<Self> {
        let sh = libm::sinh(2.0 * params.xi.norm());
        let spread = 16.0 * (params.alpha.norm_sqr() + sh * sh);
        let guarded = dim_report + libm::ceil(spread) as usize;
        Self::with_work(dim_report, guarded.max(4 * dim_report))
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim_report
    }

    pub fn dim_work(&self) -> usize {
        self.dim_work
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

/// Squeezing `ξ` and displacement `α` of the free operation `S(ξ)D(α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub xi: Complex64,
    pub alpha: Complex64,
}

impl GaussianParams {
    pub const IDENTITY: Self = Self {
        xi: ZERO,
        alpha: ZERO,
    };

    pub fn new(xi: Complex64, alpha: Complex64) -> Self {
        Self { xi, alpha }
    }

    pub fn real(xi: f64, alpha: f64) -> Self {
        Self::new(Complex64::new(xi, 0.0), Complex64::new(alpha, 0.0))
    }

    pub fn within(&self, xi_max: f64, alpha_max: f64) -> bool {
        self.xi.norm() <= xi_max && self.alpha.norm() <= alpha_max
    }
}

/// Normalized pure state in the reporting dimension; entry `k` is `⟨k|ψ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let v = CVector::from_vec(amplitudes);
        let norm2 = v.norm_squared();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "squared norm {norm2} is not 1"
            )));
        }
        Ok(Self { amplitudes: v })
    }

    /// Normalizes the amplitudes; fails on the zero vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut v = CVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        v /= Complex64::new(norm, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn fock(k: usize, dim: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::Index { index: k, dim });
        }
        let mut v = vec![ZERO; dim];
        v[k] = ONE;
        Ok(Self {
            amplitudes: CVector::from_vec(v),
        })
    }

    /// The balanced superposition `(|m⟩ + |n⟩)/√2`.
    pub fn balanced(m: usize, n: usize, dim: usize) -> Result<Self> {
        if m == n {
            return Err(Error::InvalidState(
                "balanced superposition needs m != n".into(),
            ));
        }
        let top = m.max(n);
        if top >= dim {
            return Err(Error::Index { index: top, dim });
        }
        let mut v = vec![ZERO; dim];
        v[m] = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[n] = v[m];
        Ok(Self {
            amplitudes: CVector::from_vec(v),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        let rho = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix { elements: rho }
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix on the reporting space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elements: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), trace (1e-10) and positivity (−1e-10).
    pub fn new(elements: CMatrix) -> Result<Self> {
        Self::validated(elements, HERMITIAN_TOL, TRACE_TOL)
    }

    /// Same checks with a caller-chosen tolerance for Hermiticity and trace,
    /// as used when loading measured matrices from files.
    pub fn with_tolerance(elements: CMatrix, tolerance: f64) -> Result<Self> {
        Self::validated(elements, tolerance, tolerance)
    }

    fn validated(elements: CMatrix, herm_tol: f64, trace_tol: f64) -> Result<Self> {
        let d = elements.nrows();
        if d != elements.ncols() || d < 2 {
            return Err(Error::InvalidState(format!(
                "density matrix must be square with dimension >= 2, got {}x{}",
                d,
                elements.ncols()
            )));
        }
        let mut asym: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                asym = asym.max((elements[(i, j)] - elements[(j, i)].conj()).norm());
            }
        }
        if asym > herm_tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {asym:.3e})"
            )));
        }
        let trace = elements.trace();
        if (trace.re - 1.0).abs() > trace_tol || trace.im.abs() > trace_tol {
            return Err(Error::InvalidState(format!(
                "trace {} differs from 1",
                trace.re
            )));
        }
        // symmetrize so downstream eigen-solvers see an exactly Hermitian matrix
        let herm = (&elements + elements.adjoint()) * Complex64::new(0.5, 0.0);
        let (vals, _) = linalg::hermitian_eigen(&herm);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -EIGEN_TOL.max(herm_tol) {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { elements: herm })
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn element(&self, m: usize, n: usize) -> Complex64 {
        self.elements[(m, n)]
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.elements
    }
}

/// Ladder operator on the working space: `⟨k−1|a|k⟩ = √k`.
pub fn annihilation_matrix(space: &FockSpace) -> CMatrix {
    annihilation(space.dim_work)
}

fn annihilation(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        a[(k - 1, k)] = Complex64::new(libm::sqrt(k as f64), 0.0);
    }
    a
}

fn displacement_generator(alpha: Complex64, dim: usize) -> CMatrix {
    let a = annihilation(dim);
    a.adjoint() * alpha - a * alpha.conj()
}

fn squeezing_generator(xi: Complex64, dim: usize) -> CMatrix {
    let a = annihilation(dim);
    let a2 = &a * &a;
    a2.adjoint() * xi - a2 * xi.conj()
}

/// Builds `exp(generator)` at the working dimension, returns the reporting
/// block, and checks that the block has converged by repeating the
/// construction with a 50% larger working space.
fn truncated_exponential(build: impl Fn(usize) -> CMatrix, space: &FockSpace) -> Result<CMatrix> {
    let d = space.dim_report;
    let block = |dim: usize| linalg::expm(&build(dim)).view((0, 0), (d, d)).into_owned();
    let coarse = block(space.dim_work);
    let fine = block(space.dim_work + (space.dim_work / 2).max(8));
    let defect = (&coarse - &fine)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if defect > space.tolerance {
        return Err(Error::Truncation {
            defect,
            tolerance: space.tolerance,
            dim_work: space.dim_work,
        });
    }
    Ok(fine)
}

/// Top-left reporting block of `D(α)`.
pub fn displacement_unitary(alpha: Complex64, space: &FockSpace) -> Result<CMatrix> {
    truncated_exponential(|dim| displacement_generator(alpha, dim), space)
}

/// Top-left reporting block of `S(ξ) = exp(ξ a†² − ξ* a²)`.
pub fn squeezing_unitary(xi: Complex64, space: &FockSpace) -> Result<CMatrix> {
    truncated_exponential(|dim| squeezing_generator(xi, dim), space)
}

/// Result of [`apply_gaussian`]: the renormalized state and the norm that
/// leaked out of the reporting space before renormalization.
#[derive(Debug, Clone)]
pub struct AppliedGaussian {
    pub state: StateVector,
    pub norm_loss: f64,
}

/// `S(ξ)D(α)|ψ⟩` truncated to the reporting dimension and renormalized.
pub fn apply_gaussian(
    params: &GaussianParams,
    psi: &StateVector,
    space: &FockSpace,
) -> Result<AppliedGaussian> {
    let ops = [
        displacement_generator(params.alpha, space.dim_work),
        squeezing_generator(params.xi, space.dim_work),
    ];
    evolve(&ops, psi, space)
}

/// Applies the inverse `D(−α)S(−ξ)` of [`apply_gaussian`].
pub fn apply_gaussian_inverse(
    params: &GaussianParams,
    psi: &StateVector,
    space: &FockSpace,
) -> Result<AppliedGaussian> {
    let ops = [
        squeezing_generator(-params.xi, space.dim_work),
        displacement_generator(-params.alpha, space.dim_work),
    ];
    evolve(&ops, psi, space)
}

fn evolve(generators: &[CMatrix], psi: &StateVector, space: &FockSpace) -> Result<AppliedGaussian> {
    if psi.dim() != space.dim_report {
        return Err(Error::Config(format!(
            "state dimension {} does not match space dimension {}",
            psi.dim(),
            space.dim_report
        )));
    }
    let mut v = CVector::zeros(space.dim_work);
    v.rows_mut(0, space.dim_report).copy_from(psi.amplitudes());
    for g in generators {
        v = linalg::expm(g) * v;
    }
    let kept: Vec<Complex64> = v.rows(0, space.dim_report).iter().copied().collect();
    let kept_norm2: f64 = kept.iter().map(|z| z.norm_sqr()).sum();
    let norm_loss = (1.0 - kept_norm2).max(0.0);
    if norm_loss > space.tolerance {
        return Err(Error::Truncation {
            defect: norm_loss,
            tolerance: space.tolerance,
            dim_work: space.dim_work,
        });
    }
    Ok(AppliedGaussian {
        state: StateVector::normalized(kept)?,
        norm_loss,
    })
}

/// `max_j |1 − ‖U e_j‖²|` over the columns of `u`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    (0..u.ncols())
        .map(|j| (1.0 - u.column(j).norm_squared()).abs())
        .fold(0.0, f64::max)
}

/// Exact matrix elements `⟨j|S(ξ)D(α)|k⟩` for `j < rows`, `k < cols`.
///
/// With `c = cosh 2|ξ|`, `s = sinh 2|ξ|` and `u = ξ/|ξ|`, conjugating the
/// ladder operator gives `U a U† = c a − u s a† − α`, which yields
///
/// ```text
/// c √(j+1) U[j+1,k] = √k U[j,k−1] + u s √j U[j−1,k] + α U[j,k]
/// √(k+1) U[0,k+1]   = −u* s U[1,k] − α* U[0,k]
/// U[0,0]            = c^(−1/2) exp(−|α|²/2 − u* tanh(2|ξ|) α²/2)
/// ```
///
/// Only rows `0..rows` are ever touched, so the cost is `O(rows · cols)`.
#[derive(Debug, Clone)]
pub struct GaussianElements {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl GaussianElements {
    pub fn new(params: &GaussianParams, rows: usize, cols: usize) -> Self {
        // row 1 is needed to step row 0 across columns
        let r = rows.max(2);
        let cols = cols.max(1);
        let mut data = vec![ZERO; r * cols];
        let idx = |j: usize, k: usize| k * r + j;

        let mag = params.xi.norm();
        let rr = 2.0 * mag;
        let u = if mag > 0.0 { params.xi / mag } else { ONE };
        let (c, s, t) = (libm::cosh(rr), libm::sinh(rr), libm::tanh(rr));
        let alpha = params.alpha;

        let sqrt: Vec<f64> = (0..=r.max(cols)).map(|k| libm::sqrt(k as f64)).collect();
        data[idx(0, 0)] =
            (-(alpha.norm_sqr() / 2.0) - u.conj() * t * alpha * alpha / 2.0).exp() / libm::sqrt(c);
        for k in 0..cols {
            for j in 0..r - 1 {
                let mut v = alpha * data[idx(j, k)];
                if j > 0 {
                    v += u * s * sqrt[j] * data[idx(j - 1, k)];
                }
                if k > 0 {
                    v += sqrt[k] * data[idx(j, k - 1)];
                }
                data[idx(j + 1, k)] = v / (c * sqrt[j + 1]);
            }
            if k + 1 < cols {
                data[idx(0, k + 1)] = (-u.conj() * s * data[idx(1, k)]
                    - alpha.conj() * data[idx(0, k)])
                    / sqrt[k + 1];
            }
        }
        Self {
            rows: r,
            cols,
            data,
        }
    }

    /// `⟨j|S(ξ)D(α)|k⟩`.
    #[inline]
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        debug_assert!(j < self.rows && k < self.cols);
        self.data[k * self.rows + j]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |j, k| self.get(j, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn annihilation_entries() {
        let a = annihilation_matrix(&FockSpace::with_work(2, 3).unwrap());
        assert_eq!(a[(0, 1)], c(1.0, 0.0));
        assert!((a[(1, 2)].re - core::f64::consts::SQRT_2).abs() < 1e-8);
        for k in 0..3 {
            assert_eq!(a[(k, k)], ZERO);
        }
        let a2 = annihilation_matrix(&FockSpace::with_work(2, 2).unwrap());
        assert!((&a2 * &a2).iter().all(|z| *z == ZERO));
    }

    #[test]
    fn space_rejects_bad_dimensions() {
        assert!(FockSpace::new(1).is_err());
        assert!(FockSpace::with_work(10, 9).is_err());
        let s = FockSpace::sized_for(10, &GaussianParams::real(0.0, 2.0)).unwrap();
        assert_eq!(s.dim_work(), 74);
    }

    #[test]
    fn zero_parameters_give_identity() {
        let space = FockSpace::new(6).unwrap();
        let id = CMatrix::identity(6, 6);
        assert!((displacement_unitary(ZERO, &space).unwrap() - &id).norm() < 1e-14);
        assert!((squeezing_unitary(ZERO, &space).unwrap() - &id).norm() < 1e-14);
    }

    #[test]
    fn displacement_vacuum_column_matches_coherent_amplitudes() {
        let space = FockSpace::sized_for(8, &GaussianParams::real(0.0, 1.0)).unwrap();
        let d = displacement_unitary(c(1.0, 0.0), &space).unwrap();
        assert!((d[(0, 0)].norm() - 0.606531).abs() < 1e-6);
        assert!((d[(1, 0)].norm() - 0.606531).abs() < 1e-6);
        let e = libm::exp(-0.5);
        for n in 0..8 {
            let expected = e / libm::sqrt(factorial(n));
            assert!((d[(n, 0)].norm() - expected).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn squeezing_vacuum_overlap_and_parity() {
        let space = FockSpace::with_work(12, 80).unwrap();
        let s = squeezing_unitary(c(0.25, 0.0), &space).unwrap();
        assert!((s[(0, 0)].norm() - 1.0 / libm::sqrt(libm::cosh(0.5))).abs() < 1e-12);
        assert!((s[(0, 0)].norm() - 0.941713).abs() < 1e-5);
        for k in 0..6 {
            assert!(s[(2 * k + 1, 0)].norm() < 1e-15);
        }
    }

    #[test]
    fn truncated_block_of_large_displacement_is_far_from_unitary() {
        let big = FockSpace::with_work(8, 160).unwrap();
        let d = displacement_unitary(c(3.0, 0.0), &big).unwrap();
        assert!(unitarity_defect(&d) > 1e-3);
        assert!(unitarity_defect(&CMatrix::identity(5, 5)) == 0.0);
    }

    #[test]
    fn undersized_working_space_is_reported() {
        let tight = FockSpace::with_work(6, 8).unwrap();
        assert!(matches!(
            displacement_unitary(c(3.0, 0.0), &tight),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn recurrence_matches_dense_exponential() {
        for &(xi, alpha) in &[
            (c(0.3, 0.1), c(0.7, -0.4)),
            (c(-0.5, 0.0), c(1.2, 0.0)),
            (c(0.0, 0.4), c(0.0, -1.0)),
            (ZERO, c(2.0, 0.5)),
        ] {
            let params = GaussianParams::new(xi, alpha);
            let space = FockSpace::with_work(10, 140).unwrap();
            let s = squeezing_unitary(xi, &space).unwrap();
            let d = displacement_unitary(alpha, &space).unwrap();
            // the product of reporting blocks is not the block of the product,
            // so compare against the full working-space product instead
            let dim = 140;
            let u = linalg::expm(&squeezing_generator(xi, dim))
                * linalg::expm(&displacement_generator(alpha, dim));
            let g = GaussianElements::new(&params, 10, 10);
            for j in 0..10 {
                for k in 0..10 {
                    assert!((u[(j, k)] - g.get(j, k)).norm() < 1e-10, "{j},{k}");
                }
            }
            assert!(s.nrows() == 10 && d.nrows() == 10);
        }
    }

    #[test]
    fn apply_gaussian_identity_and_coherent_state() {
        let space = FockSpace::new(30).unwrap();
        let psi = StateVector::balanced(1, 3, 30).unwrap();
        let out = apply_gaussian(&GaussianParams::IDENTITY, &psi, &space).unwrap();
        assert!((out.state.amplitudes() - psi.amplitudes()).norm() < 1e-14);

        let alpha = c(0.8, -0.6);
        let vac = StateVector::fock(0, 30).unwrap();
        let out = apply_gaussian(&GaussianParams::new(ZERO, alpha), &vac, &space).unwrap();
        for n in 0..30 {
            let expected = libm::exp(-alpha.norm_sqr() / 2.0) * alpha.norm().powi(n as i32)
                / libm::sqrt(factorial(n));
            assert!((out.state.amplitudes()[n].norm() - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn apply_gaussian_squeezed_vacuum_has_even_support() {
        let space = FockSpace::new(40).unwrap();
        let vac = StateVector::fock(0, 40).unwrap();
        let out = apply_gaussian(&GaussianParams::new(c(0.2, 0.1), ZERO), &vac, &space).unwrap();
        for k in 0..20 {
            assert!(out.state.amplitudes()[2 * k + 1].norm() < 1e-15);
        }
    }

    #[test]
    fn apply_gaussian_leak_is_a_truncation_error() {
        let space = FockSpace::new(6).unwrap();
        let vac = StateVector::fock(0, 6).unwrap();
        let r = apply_gaussian(&GaussianParams::real(0.0, 2.0), &vac, &space);
        assert!(matches!(r, Err(Error::Truncation { .. })));
    }

    #[test]
    fn density_matrix_validation() {
        let psi = StateVector::balanced(0, 1, 3).unwrap();
        let rho = psi.to_density();
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
        let mut bad = rho.matrix().clone();
        bad[(0, 1)] += c(0.1, 0.0);
        assert!(DensityMatrix::new(bad).is_err());
        let not_psd = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(DensityMatrix::new(not_psd).is_err());
        assert!((rho.element(0, 1).re - 0.5).abs() < 1e-15);
        assert!((psi.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
    }
}
