//! Seeded sampling of complex matrices.

use nalgebra::Dyn;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, zeros, CMatrix};

/// The generator used for every seeded computation in the crate.
pub type DiscRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> DiscRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian (`E|z|² = 1`).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let mut m = zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    if n == 0 {
        return zeros(0, 0);
    }
    let qr = gaussian_matrix(rng, n, n).qr();
    let r = qr.r();
    let mut q: nalgebra::OMatrix<Complex64, Dyn, Dyn> = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random invertible matrix with condition number bounded by about 3:
/// `W (I + ½ diag(t)) V` with Haar `W, V` and `t ∈ [0, 2]`.
pub fn well_conditioned<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let w = haar_unitary(rng, n);
    let v = haar_unitary(rng, n);
    let mut d = zeros(n, n);
    for i in 0..n {
        d[(i, i)] = c64(1.0 + rng.random_range(0.0..1.0), 0.0);
    }
    w * d * v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitary_defect;

    #[test]
    fn haar_is_unitary() {
        let mut rng = rng_from_seed(3);
        for n in 1..6 {
            assert!(unitary_defect(&haar_unitary(&mut rng, n)) < 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        let a = gaussian_matrix(&mut rng_from_seed(9), 3, 2);
        let b = gaussian_matrix(&mut rng_from_seed(9), 3, 2);
        assert_eq!(a, b);
    }
}
