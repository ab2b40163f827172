#![allow(dead_code)]

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use otoc_lab::OperatorMatrix;

/// Dense `exp(A)` by scaling and squaring of a Taylor series.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let norm = a.rows().into_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a.mapv(|z| z / 2f64.powi(s));
    let mut term = Array2::<C64>::eye(n);
    let mut sum = Array2::<C64>::eye(n);
    for k in 1..40 {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = sum.dot(&sum);
    }
    sum
}

/// `exp(−iHt)` from the dense Hamiltonian.
pub fn propagator(h: &OperatorMatrix, t: f64) -> Array2<C64> {
    expm(&h.to_complex().mapv(|z| z * C64::new(0.0, -t)))
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn inner(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Deterministic unnormalized vector with entries spread over the unit disc.
pub fn scrambled_vector(len: usize, seed: f64) -> Array1<C64> {
    Array1::from_iter((0..len).map(|k| {
        let x = (k as f64 + 1.0) * seed;
        C64::new((x * 12.9898).sin(), (x * 78.233).cos())
    }))
}
