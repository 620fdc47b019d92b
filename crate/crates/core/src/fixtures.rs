//! Named states, observables and power families.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, DensityMatrix, HermitianOperator, StateVector};
use crate::tolerance;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hermitian(entries: [Complex64; 4]) -> HermitianOperator {
    HermitianOperator::new(ComplexMatrix::from_row_major(2, 2, &entries).expect("2x2"))
        .expect("Pauli matrices are hermitian")
}

pub fn sigma_x() -> HermitianOperator {
    hermitian([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn sigma_y() -> HermitianOperator {
    hermitian([c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn sigma_z() -> HermitianOperator {
    hermitian([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// `n·σ` for a unit vector `n` on the Bloch sphere.
pub fn spin_along(direction: [f64; 3]) -> Result<HermitianOperator> {
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > tolerance::NORM {
        return Err(Error::NotUnitDirection { norm });
    }
    let [x, y, z] = direction;
    Ok(hermitian([c(z, 0.0), c(x, -y), c(x, y), c(-z, 0.0)]))
}

pub fn ket0() -> StateVector {
    StateVector::basis(2, 0).expect("qubit basis")
}

pub fn ket1() -> StateVector {
    StateVector::basis(2, 1).expect("qubit basis")
}

/// `(|0⟩ + |1⟩)/√2`.
pub fn ket_plus() -> StateVector {
    StateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).expect("unit")
}

/// `(|0⟩ - |1⟩)/√2`.
pub fn ket_minus() -> StateVector {
    StateVector::from_real(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]).expect("unit")
}

/// `(|0⟩ + i|1⟩)/√2`.
pub fn ket_plus_i() -> StateVector {
    StateVector::new(vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]).expect("unit")
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell_phi_plus() -> StateVector {
    StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).expect("unit")
}

/// `(|00⟩ - |11⟩)/√2`.
pub fn bell_phi_minus() -> StateVector {
    StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, -FRAC_1_SQRT_2]).expect("unit")
}

/// `(|01⟩ + |10⟩)/√2`.
pub fn bell_psi_plus() -> StateVector {
    StateVector::from_real(&[0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]).expect("unit")
}

/// The singlet `(|01⟩ - |10⟩)/√2`.
pub fn singlet() -> StateVector {
    StateVector::from_real(&[0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0]).expect("unit")
}

/// `p·|Ψ⁻⟩⟨Ψ⁻| + (1 - p)·I/4` for `p ∈ [0, 1]`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidWeights(format!(
            "Werner parameter {p} outside [0, 1]"
        )));
    }
    let noise = DensityMatrix::maximally_mixed(4)?;
    let op = singlet()
        .density()
        .operator()
        .combine(p, noise.operator(), 1.0 - p)?;
    DensityMatrix::new(op)
}

/// Eigenbasis of the `d`-dimensional discrete Fourier transform. For `d = 2`
/// this is `{|+⟩, |−⟩}`.
pub fn fourier_basis(d: usize) -> Result<Vec<StateVector>> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let norm = (d as f64).sqrt().recip();
    (0..d)
        .map(|k| {
            StateVector::normalized(
                (0..d)
                    .map(|j| {
                        let angle = 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64;
                        Complex64::from_polar(norm, angle)
                    })
                    .collect(),
            )
        })
        .collect()
}

pub fn computational_basis(d: usize) -> Result<Vec<StateVector>> {
    (0..d).map(|i| StateVector::basis(d, i)).collect()
}
