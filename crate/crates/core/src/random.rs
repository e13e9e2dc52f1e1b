//! Seeded random test objects.

use nalgebra::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::closedform::BlochVector;
use crate::linalg::{ComplexMatrix, DensityMatrix, HermitianMatrix};

pub use rand_chacha::ChaCha8Rng as Rng64;
pub use rand::SeedableRng;

pub fn rng(seed: u64) -> Rng64 {
    Rng64::seed_from_u64(seed)
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Hermitian matrix with independent Gaussian entries.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianMatrix {
    let g = ginibre(rng, dim, dim);
    HermitianMatrix::new((&g + g.adjoint()).scale(0.5)).expect("symmetrized matrix is Hermitian")
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let qr = ginibre(rng, dim, dim).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = ComplexMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            let d = r[(i, i)];
            if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) }
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    q * phases
}

/// Random mixed state `G G* / tr(G G*)` from a square Ginibre matrix.
pub fn density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = ginibre(rng, dim, dim);
    let h = HermitianMatrix::new(&g * g.adjoint()).expect("Gram matrix is Hermitian");
    DensityMatrix::normalized(h).expect("Gram matrix is positive")
}

/// Bloch vector uniform in the ball of radius `max_radius`.
pub fn bloch<R: Rng + ?Sized>(rng: &mut R, max_radius: f64) -> BlochVector {
    loop {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        if norm2 <= 1.0 {
            let r = [v[0] * max_radius, v[1] * max_radius, v[2] * max_radius];
            return BlochVector::new(r).expect("vector inside the unit ball");
        }
    }
}
