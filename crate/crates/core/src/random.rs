//! Samplers for random states, observables and unitaries.
//!
//! Vectors are drawn from the unitarily invariant (Haar) measure, mixed states
//! from the Hilbert–Schmidt ensemble, unitaries by QR of a Ginibre matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::operator::{
    ComplexMatrix, DensityMatrix, HermitianOperator, Projector, StateVector, Unitary,
};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn state_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> StateVector {
    let amps: Vec<Complex64> = (0..d).map(|_| gaussian(rng)).collect();
    StateVector::normalized(amps).expect("gaussian vector is nonzero")
}

/// A random density matrix of the given rank (`rank = d` is full rank).
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> DensityMatrix {
    let g = ginibre(rng, d, rank.max(1));
    let mut m = &g * g.adjoint();
    let trace = m.trace();
    m /= trace;
    DensityMatrix::from_matrix(ComplexMatrix::from_nalgebra(m).expect("finite"))
        .expect("G G† / Tr is a density matrix")
}

pub fn mixed_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    density_matrix(rng, d, d)
}

pub fn pure_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    state_vector(rng, d).density()
}

/// Hermitian matrix with standard-normal entries (GUE up to scale).
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianOperator {
    let g = ginibre(rng, d, d);
    let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    HermitianOperator::new(ComplexMatrix::from_nalgebra(h).expect("finite")).expect("hermitian")
}

pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Unitary {
    let qr = ginibre(rng, d, d).qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix the phases of R's diagonal so Q is Haar distributed.
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Unitary::new(ComplexMatrix::from_nalgebra(q * phases).expect("finite")).expect("unitary")
}

/// Projector of the given rank onto a random subspace.
pub fn projector<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> Projector {
    let u = unitary(rng, d);
    let diag: Vec<f64> = (0..d).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
    u.conjugate_projector(
        &Projector::from_matrix(ComplexMatrix::diagonal(&diag)).expect("diagonal"),
    )
    .expect("same dimension")
}

/// Uniform point on the unit sphere.
pub fn unit_vector3<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}
