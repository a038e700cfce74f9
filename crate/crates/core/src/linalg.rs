//! Small dense helpers on top of nalgebra.

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{CMatrix, CVector};

/// Largest eigenvalue of a Hermitian matrix.
pub(crate) fn max_eigenvalue(h: &CMatrix) -> f64 {
    if h.nrows() == 1 {
        return h[(0, 0)].re;
    }
    h.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest eigenvalue of a Hermitian matrix with a unit eigenvector. The
/// eigenvector phase is fixed so that its first entry of largest modulus is
/// real and positive.
pub(crate) fn max_eigenpair(h: &CMatrix) -> (f64, CVector) {
    let n = h.nrows();
    if n == 1 {
        return (
            h[(0, 0)].re,
            CVector::from_element(1, Complex64::new(1.0, 0.0)),
        );
    }
    let eig = h.clone().symmetric_eigen();
    let mut best = 0;
    for i in 1..n {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    let mut v: CVector = eig.eigenvectors.column(best).into_owned();
    fix_phase(&mut v);
    (eig.eigenvalues[best], v)
}

pub(crate) fn fix_phase(v: &mut CVector) {
    let mut pivot = 0;
    let mut pivot_abs = 0.0;
    for (i, z) in v.iter().enumerate() {
        // small slack so near-ties resolve to the lowest index
        if z.norm() > pivot_abs * (1.0 + 1e-9) {
            pivot = i;
            pivot_abs = z.norm();
        }
    }
    if pivot_abs > 0.0 {
        let phase = v[pivot].conj() / pivot_abs;
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
    let norm = v.norm();
    if norm > 0.0 {
        *v /= Complex64::new(norm, 0.0);
    }
}

/// Eigen-decomposition of a Hermitian matrix: (eigenvalues, eigenvectors as columns).
pub(crate) fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = h.clone().symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn one_norm(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub(crate) fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        libm::ceil(libm::log2(norm / THETA13)) as u32
    } else {
        0
    };
    let scale = Complex64::new(libm::ldexp(1.0, -(squarings as i32)), 0.0);
    let a = a * scale;
    let b = |k: usize| Complex64::new(PADE13[k], 0.0);
    let id = DMatrix::<Complex64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = &a * (inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let inner_v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8));
    let v = inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_diagonal_matches_scalar_exponentials() {
        let d = [
            Complex64::new(0.3, 1.0),
            Complex64::new(-2.0, 0.5),
            Complex64::new(7.0, -3.0),
        ];
        let m = CMatrix::from_diagonal(&CVector::from_column_slice(&d));
        let e = expm(&m);
        for (i, z) in d.iter().enumerate() {
            assert!((e[(i, i)] - z.exp()).norm() < 1e-10 * z.exp().norm());
        }
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp([[0, -t], [t, 0]]) is a rotation by t
        let t = 12.5;
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(-t, 0.0),
                Complex64::new(t, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let e = expm(&m);
        assert!((e[(0, 0)].re - libm::cos(t)).abs() < 1e-12);
        assert!((e[(1, 0)].re - libm::sin(t)).abs() < 1e-12);
    }

    #[test]
    fn eigenpair_of_pauli_x() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let x = CMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
        let (val, vec) = max_eigenpair(&x);
        assert!((val - 1.0).abs() < 1e-14);
        assert!((vec[0].re - vec[1].re).abs() < 1e-12);
        assert!(vec[0].re > 0.0);
    }
}
