//! Seeded random ensembles for tests, examples and self-checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, CMat, CVec, HermOp};

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = complex_gaussian(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random isometry `C^d_in → C^d_out` (`d_out ≥ d_in`).
pub fn isometry<R: Rng + ?Sized>(d_in: usize, d_out: usize, rng: &mut R) -> CMat {
    let u = unitary(d_out, rng);
    u.columns(0, d_in).into_owned()
}

/// Full-rank density operator drawn from the Hilbert–Schmidt ensemble.
pub fn density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermOp {
    density_of_rank(d, d, rng)
}

/// Density operator of rank `r` (Ginibre `d × r`).
pub fn density_of_rank<R: Rng + ?Sized>(d: usize, r: usize, rng: &mut R) -> HermOp {
    let g = complex_gaussian(d, r, rng);
    let w = &g * g.adjoint();
    let tr: f64 = (0..d).map(|i| w[(i, i)].re).sum();
    HermOp::from_mat_unchecked(w.map(|z| z / tr))
}

pub fn pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let g = complex_gaussian(d, 1, rng);
    let n = g.norm();
    CVec::from_fn(d, |i, _| g[(i, 0)] / n)
}

/// GUE-like Hermitian operator.
pub fn hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermOp {
    let g = complex_gaussian(d, d, rng);
    HermOp::from_mat_unchecked(&g + g.adjoint())
}

pub fn traceless_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermOp {
    let h = hermitian(d, rng);
    let t = h.trace() / d as f64;
    h.shift(-t)
}

/// Kraus operators of a random channel `C^d_in → C^d_out` with `k` Kraus terms,
/// obtained by slicing a random isometry into `C^d_out ⊗ C^k`. `k` is raised to
/// `⌈d_in/d_out⌉` when smaller, the fewest terms a channel of these dimensions needs.
pub fn kraus_channel<R: Rng + ?Sized>(d_in: usize, d_out: usize, k: usize, rng: &mut R) -> Vec<CMat> {
    let k = k.max(d_in.div_ceil(d_out));
    let v = isometry(d_in, d_out * k, rng);
    (0..k)
        .map(|j| CMat::from_fn(d_out, d_in, |o, i| v[(o * k + j, i)]))
        .collect()
}
