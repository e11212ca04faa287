//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use subtrace::model::TrueBases;
use subtrace::numkit::orthonormalize;
use subtrace::rng::gaussian_matrix;
use subtrace::{CMatrix, Mode, C64};

/// `A·Aᴴ`, formed entry by entry.
pub fn outer_projector(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut p = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..a.cols() {
                s += a.get(i, k) * a.get(j, k).conj();
            }
            p.set(i, j, s);
        }
    }
    p
}

/// `‖P_ref − WWᴴ‖_F²` from explicit `N × N` projectors.
pub fn explicit_projection_error(w: &CMatrix, truth: &TrueBases, mode: Mode) -> f64 {
    let n = w.rows();
    let pv = outer_projector(&truth.signal_basis);
    let p_ref = match mode {
        Mode::Signal => pv,
        Mode::Noise => CMatrix::identity(n).sub(&pv).unwrap(),
    };
    p_ref.sub(&outer_projector(w)).unwrap().frobenius_norm_sqr()
}

/// `‖P_A − P_B‖_F²` from explicit projectors of the orthonormalized inputs.
pub fn explicit_span_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let pa = outer_projector(&orthonormalize(a).unwrap());
    let pb = outer_projector(&orthonormalize(b).unwrap());
    pa.sub(&pb).unwrap().frobenius_norm_sqr()
}

pub fn random_unitary<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    orthonormalize(&gaussian_matrix(rng, n, n, 1.0)).unwrap()
}

pub fn random_orthonormal<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, l: usize) -> CMatrix {
    orthonormalize(&gaussian_matrix(rng, n, l, 1.0)).unwrap()
}
