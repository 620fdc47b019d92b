//! Bipartite composition and separability.
//!
//! Pure states are classified by Schmidt rank. Mixed states are tested with
//! the partial transpose, which witnesses entanglement in every dimension but
//! certifies separability only for `2×2` and `2×3` systems; elsewhere a
//! positive partial transpose yields [`SeparabilityStatus::Undecided`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixtures;
use crate::operator::{
    expectation, partial_trace, ComplexMatrix, DensityMatrix, Factor, HermitianOperator,
    QuantumState, State, StateVector,
};
use crate::tolerance;

/// A state on `ℂ^{d1} ⊗ ℂ^{d2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    d1: usize,
    d2: usize,
    state: State,
    provenance: Option<SeparableMixture>,
}

impl BipartiteState {
    pub fn new(state: State, d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::ZeroDimension);
        }
        let dim = d1.saturating_mul(d2);
        if state.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: "bipartite state",
                expected: dim,
                found: state.dim(),
            });
        }
        Ok(BipartiteState {
            d1,
            d2,
            state,
            provenance: None,
        })
    }

    pub fn pure(v: StateVector, d1: usize, d2: usize) -> Result<Self> {
        Self::new(State::Pure(v), d1, d2)
    }

    pub fn mixed(rho: DensityMatrix, d1: usize, d2: usize) -> Result<Self> {
        Self::new(State::Mixed(rho), d1, d2)
    }

    /// `|u⟩ ⊗ |v⟩`.
    pub fn product_pure(u: &StateVector, v: &StateVector) -> Result<Self> {
        Self::pure(u.tensor(v)?, u.dim(), v.dim())
    }

    /// `ρ ⊗ ρ′`.
    pub fn product_mixed(a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        Self::mixed(a.tensor(b)?, a.dim(), b.dim())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.state, State::Pure(_))
    }

    pub fn density(&self) -> DensityMatrix {
        self.state.to_density()
    }

    /// Reduced state of one factor.
    pub fn marginal(&self, keep: Factor) -> Result<DensityMatrix> {
        partial_trace(&self.density(), self.dims(), keep)
    }

    /// The mixture this state was built from, if it came from [`mix_separable`].
    pub fn provenance(&self) -> Option<&SeparableMixture> {
        self.provenance.as_ref()
    }

    fn require_pure(&self) -> Result<&StateVector> {
        match &self.state {
            State::Pure(v) => Ok(v),
            State::Mixed(_) => Err(Error::MixedStateInput),
        }
    }
}

/// `|φ⟩ = Σ_k c_k |u_k⟩ ⊗ |v_k⟩` with `c_k` non-increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<StateVector>,
    pub right_vectors: Vec<StateVector>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// `Σ_k c_k |u_k⟩ ⊗ |v_k⟩` as raw amplitudes.
    pub fn reassemble(&self) -> Vec<Complex64> {
        let d1 = self.left_vectors.first().map_or(0, StateVector::dim);
        let d2 = self.right_vectors.first().map_or(0, StateVector::dim);
        let mut out = vec![Complex64::new(0.0, 0.0); d1 * d2];
        for ((c, u), v) in self
            .coefficients
            .iter()
            .zip(&self.left_vectors)
            .zip(&self.right_vectors)
        {
            for (i, ui) in u.amplitudes().iter().enumerate() {
                for (j, vj) in v.amplitudes().iter().enumerate() {
                    out[i * d2 + j] += ui * vj * *c;
                }
            }
        }
        out
    }
}

/// Singular value decomposition of the `d1 × d2` amplitude matrix.
pub fn schmidt_decompose(s: &BipartiteState) -> Result<SchmidtDecomposition> {
    let v = s.require_pure()?;
    let (d1, d2) = s.dims();
    let amps = v.amplitudes();
    let m = DMatrix::from_fn(d1, d2, |i, j| amps[i * d2 + j]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");

    let mut order: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > tolerance::SCHMIDT)
        .collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut out = SchmidtDecomposition {
        coefficients: Vec::with_capacity(order.len()),
        left_vectors: Vec::with_capacity(order.len()),
        right_vectors: Vec::with_capacity(order.len()),
    };
    for k in order {
        let left = StateVector::normalized(u.column(k).iter().copied().collect())?;
        let canonical = left.with_canonical_phase();
        // Compensate the phase chosen for the left vector on the right one.
        let phase = left.inner(&canonical)?.conj();
        let right = StateVector::normalized(v_t.row(k).iter().map(|z| z * phase).collect())?;
        out.coefficients.push(svd.singular_values[k]);
        out.left_vectors.push(canonical);
        out.right_vectors.push(right);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SeparabilityStatus {
    Product,
    Separable,
    Entangled,
    Undecided,
}

/// Evidence backing a verdict.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    SchmidtCoefficients(Vec<f64>),
    NegativePartialTranspose(f64),
    Mixture(SeparableMixture),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparabilityVerdict {
    pub status: SeparabilityStatus,
    pub witness: Option<Witness>,
    pub schmidt: Option<Vec<f64>>,
    pub ppt_min_eigenvalue: Option<f64>,
}

/// Product iff Schmidt rank one.
pub fn classify_pure(s: &BipartiteState) -> Result<SeparabilityVerdict> {
    let decomposition = schmidt_decompose(s)?;
    let coefficients = decomposition.coefficients;
    let status = if coefficients.len() == 1 {
        SeparabilityStatus::Product
    } else {
        SeparabilityStatus::Entangled
    };
    Ok(SeparabilityVerdict {
        status,
        witness: Some(Witness::SchmidtCoefficients(coefficients.clone())),
        schmidt: Some(coefficients),
        ppt_min_eigenvalue: None,
    })
}

/// Transposes the indices of one factor of an operator on `ℂ^{d1} ⊗ ℂ^{d2}`.
pub fn partial_transpose_operator(
    op: &HermitianOperator,
    dims: (usize, usize),
    factor: Factor,
) -> Result<HermitianOperator> {
    let (d1, d2) = dims;
    if d1 * d2 != op.dim() {
        return Err(Error::DimensionMismatch {
            context: "partial transpose",
            expected: d1 * d2,
            found: op.dim(),
        });
    }
    let a = op.matrix().as_nalgebra();
    let n = d1 * d2;
    let out = DMatrix::from_fn(n, n, |r, c| {
        let (i, k) = (r / d2, r % d2);
        let (j, l) = (c / d2, c % d2);
        match factor {
            Factor::First => a[(j * d2 + k, i * d2 + l)],
            Factor::Second => a[(i * d2 + l, j * d2 + k)],
        }
    });
    HermitianOperator::new(ComplexMatrix::from_nalgebra(out)?)
}

pub fn partial_transpose(s: &BipartiteState, factor: Factor) -> Result<HermitianOperator> {
    partial_transpose_operator(s.density().operator(), s.dims(), factor)
}

/// Smallest eigenvalue of the partial transpose on the second factor.
pub fn ppt_min_eigenvalue(s: &BipartiteState) -> Result<f64> {
    partial_transpose(s, Factor::Second)?.min_eigenvalue()
}

fn ppt_is_sufficient(dims: (usize, usize)) -> bool {
    matches!(dims, (2, 2) | (2, 3) | (3, 2))
}

pub fn classify_mixed(s: &BipartiteState) -> Result<SeparabilityVerdict> {
    if s.is_pure() {
        return Err(Error::PureStateInput);
    }
    let min = ppt_min_eigenvalue(s)?;
    let (status, witness) = if min < -tolerance::PSD {
        (
            SeparabilityStatus::Entangled,
            Some(Witness::NegativePartialTranspose(min)),
        )
    } else if let Some(mixture) = s.provenance() {
        (
            SeparabilityStatus::Separable,
            Some(Witness::Mixture(mixture.clone())),
        )
    } else if ppt_is_sufficient(s.dims()) {
        (SeparabilityStatus::Separable, None)
    } else {
        (SeparabilityStatus::Undecided, None)
    };
    Ok(SeparabilityVerdict {
        status,
        witness,
        schmidt: None,
        ppt_min_eigenvalue: Some(min),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub first: DensityMatrix,
    pub second: DensityMatrix,
}

/// `ϱ = Σ_i p_i ρ_i ⊗ ρ′_i` with `p` a probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableMixture {
    components: Vec<MixtureComponent>,
}

impl SeparableMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidWeights("mixture has no components".into()))?;
        let (d1, d2) = (first.first.dim(), first.second.dim());
        let mut total = 0.0;
        for c in &components {
            if !c.weight.is_finite() || c.weight < 0.0 {
                return Err(Error::InvalidWeights(format!(
                    "weight {} is negative",
                    c.weight
                )));
            }
            if c.first.dim() != d1 || c.second.dim() != d2 {
                return Err(Error::DimensionMismatch {
                    context: "separable mixture",
                    expected: d1 * d2,
                    found: c.first.dim() * c.second.dim(),
                });
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > tolerance::TRACE {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        Ok(SeparableMixture { components })
    }

    /// Skips all validation, for exercising the identity check on bad input.
    pub fn new_unchecked(components: Vec<MixtureComponent>) -> Self {
        SeparableMixture { components }
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.components
            .first()
            .map_or((0, 0), |c| (c.first.dim(), c.second.dim()))
    }

    fn raw_sum(&self) -> Result<ComplexMatrix> {
        let (d1, d2) = self.dims();
        let mut acc = ComplexMatrix::zeros(d1 * d2, d1 * d2);
        for c in &self.components {
            let term = crate::operator::tensor(c.first.matrix(), c.second.matrix())?
                .scale(Complex64::new(c.weight, 0.0));
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }
}

pub fn mix_separable(m: &SeparableMixture) -> Result<BipartiteState> {
    let (d1, d2) = m.dims();
    let rho = DensityMatrix::from_matrix(m.raw_sum()?)?;
    let mut s = BipartiteState::mixed(rho, d1, d2)?;
    s.provenance = Some(m.clone());
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Correlation {
    pub joint: f64,
    pub product_of_marginals: f64,
    pub correlation: f64,
}

/// `Tr(ϱ A⊗B)` against `Tr(ϱ A⊗I)·Tr(ϱ I⊗B)`.
pub fn correlation(
    s: &BipartiteState,
    a: &HermitianOperator,
    b: &HermitianOperator,
) -> Result<Correlation> {
    let (d1, d2) = s.dims();
    for (op, d) in [(a, d1), (b, d2)] {
        if op.dim() != d {
            return Err(Error::DimensionMismatch {
                context: "local observable",
                expected: d,
                found: op.dim(),
            });
        }
    }
    let rho = s.density();
    let joint = expectation(&rho, &a.tensor(b)?)?;
    let ea = expectation(&rho, &a.tensor(&HermitianOperator::identity(d2))?)?;
    let eb = expectation(&rho, &HermitianOperator::identity(d1).tensor(b)?)?;
    let product_of_marginals = ea * eb;
    Ok(Correlation {
        joint,
        product_of_marginals,
        correlation: joint - product_of_marginals,
    })
}

/// Whether `Tr(ϱ A⊗B) = Σ_i p_i Tr(ρ_i A) Tr(ρ′_i B)` holds within `1e-9`
/// with the `p_i` forming a probability vector.
pub fn classical_mixture_identity_check(
    m: &SeparableMixture,
    a: &HermitianOperator,
    b: &HermitianOperator,
) -> bool {
    const TOL: f64 = 1e-9;
    let weights = m.weights();
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > TOL {
        return false;
    }
    let check = || -> Result<bool> {
        let rho = m.raw_sum()?;
        let joint = rho.matmul(a.tensor(b)?.matrix())?.trace().re;
        let mut classical = 0.0;
        for c in m.components() {
            classical += c.weight * expectation(&c.first, a)? * expectation(&c.second, b)?;
        }
        Ok((joint - classical).abs() <= TOL)
    };
    check().unwrap_or(false)
}

/// Measurement directions for the CHSH combination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshSettings {
    pub a: [f64; 3],
    pub a_prime: [f64; 3],
    pub b: [f64; 3],
    pub b_prime: [f64; 3],
}

impl ChshSettings {
    /// `a = z`, `a′ = x`, `b = (z+x)/√2`, `b′ = (z−x)/√2`.
    pub fn standard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ChshSettings {
            a: [0.0, 0.0, 1.0],
            a_prime: [1.0, 0.0, 0.0],
            b: [h, 0.0, h],
            b_prime: [-h, 0.0, h],
        }
    }
}

/// `|E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)|` with `E(x,y) = Tr(ϱ σ_x ⊗ σ_y)`.
pub fn chsh_value(s: &BipartiteState, settings: &ChshSettings) -> Result<f64> {
    let (d1, d2) = s.dims();
    if (d1, d2) != (2, 2) {
        return Err(Error::NotQubitPair { d1, d2 });
    }
    let rho = s.density();
    let e = |x: [f64; 3], y: [f64; 3]| -> Result<f64> {
        let obs = fixtures::spin_along(x)?.tensor(&fixtures::spin_along(y)?)?;
        expectation(&rho, &obs)
    };
    let total = e(settings.a, settings.b)?
        + e(settings.a, settings.b_prime)?
        + e(settings.a_prime, settings.b)?
        - e(settings.a_prime, settings.b_prime)?;
    Ok(total.abs())
}

/// JSON shape of a separability verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictReport {
    pub status: SeparabilityStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schmidt: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ppt_min_eigenvalue: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessReport {
    SchmidtCoefficients { values: Vec<f64> },
    NegativePartialTranspose { min_eigenvalue: f64 },
    SeparableMixture { weights: Vec<f64> },
}

impl From<&SeparabilityVerdict> for VerdictReport {
    fn from(v: &SeparabilityVerdict) -> Self {
        VerdictReport {
            status: v.status,
            witness: v.witness.as_ref().map(|w| match w {
                Witness::SchmidtCoefficients(c) => {
                    WitnessReport::SchmidtCoefficients { values: c.clone() }
                }
                Witness::NegativePartialTranspose(e) => {
                    WitnessReport::NegativePartialTranspose { min_eigenvalue: *e }
                }
                Witness::Mixture(m) => WitnessReport::SeparableMixture {
                    weights: m.weights(),
                },
            }),
            schmidt: v.schmidt.clone(),
            ppt_min_eigenvalue: v.ppt_min_eigenvalue,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn pure(v: StateVector) -> BipartiteState {
        BipartiteState::pure(v, 2, 2).unwrap()
    }

    /// Singular values of a 2×2 matrix from `σ² = (t ± √(t² − 4|det|²))/2`, `t = ‖M‖_F²`.
    fn singular_values_2x2(m: [Complex64; 4]) -> [f64; 2] {
        let t: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        let det = (m[0] * m[3] - m[1] * m[2]).norm();
        let disc = (t * t - 4.0 * det * det).max(0.0).sqrt();
        [((t + disc) / 2.0).sqrt(), ((t - disc) / 2.0).sqrt()]
    }

    #[test]
    fn schmidt_examples() {
        let product =
            schmidt_decompose(&BipartiteState::product_pure(&ket0(), &ket1()).unwrap()).unwrap();
        assert_eq!(product.rank(), 1);
        assert_abs_diff_eq!(product.coefficients[0], 1.0, epsilon = 1e-12);

        for v in [bell_phi_plus(), singlet()] {
            let a = v.amplitudes();
            let oracle = singular_values_2x2([a[0], a[1], a[2], a[3]]);
            assert_abs_diff_eq!(oracle[0], FRAC_1_SQRT_2, epsilon = 1e-12);
            assert_abs_diff_eq!(oracle[1], FRAC_1_SQRT_2, epsilon = 1e-12);
            let sd = schmidt_decompose(&pure(v.clone())).unwrap();
            assert_eq!(sd.rank(), 2);
            for (c, o) in sd.coefficients.iter().zip(oracle) {
                assert_abs_diff_eq!(*c, o, epsilon = 1e-12);
            }
            let back = sd.reassemble();
            for (x, y) in back.iter().zip(v.amplitudes()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn schmidt_rejects_mixed_input() {
        let s = BipartiteState::mixed(werner(0.5).unwrap(), 2, 2).unwrap();
        assert_eq!(schmidt_decompose(&s).unwrap_err(), Error::MixedStateInput);
        assert_eq!(classify_pure(&s).unwrap_err(), Error::MixedStateInput);
    }

    #[test]
    fn classify_pure_examples() {
        let pm = BipartiteState::product_pure(&ket_plus(), &ket_minus()).unwrap();
        assert_eq!(
            classify_pure(&pm).unwrap().status,
            SeparabilityStatus::Product
        );

        let v = classify_pure(&pure(bell_phi_plus())).unwrap();
        assert_eq!(v.status, SeparabilityStatus::Entangled);
        match v.witness {
            Some(Witness::SchmidtCoefficients(c)) => {
                assert_eq!(c.len(), 2);
                assert_abs_diff_eq!(c[0], FRAC_1_SQRT_2, epsilon = 1e-12);
            }
            other => panic!("unexpected witness {other:?}"),
        }

        let theta: f64 = 0.0;
        let v = StateVector::from_real(&[theta.cos(), 0.0, 0.0, theta.sin()]).unwrap();
        assert_eq!(
            classify_pure(&pure(v)).unwrap().status,
            SeparabilityStatus::Product
        );
    }

    #[test]
    fn partial_transpose_examples() {
        let a = DensityMatrix::diagonal(&[0.2, 0.8]).unwrap();
        let b = ket_plus_i().density();
        let s = BipartiteState::product_mixed(&a, &b).unwrap();
        let pt = partial_transpose(&s, Factor::Second).unwrap();
        let expected = a.matrix().kron_unchecked(&b.matrix().transpose());
        assert!(pt.matrix().max_abs_diff(&expected) < 1e-15);
        assert!(pt.min_eigenvalue().unwrap() > -1e-12);

        // oracle: PT of |Φ⁺⟩⟨Φ⁺| is the swap matrix / 2, eigenvalues {½,½,½,−½}.
        let phi = pure(bell_phi_plus());
        let pt = partial_transpose(&phi, Factor::Second).unwrap();
        let swap = ComplexMatrix::from_real(
            4,
            4,
            &[
                1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.,
            ],
        )
        .unwrap()
        .scale(Complex64::new(0.5, 0.0));
        assert!(pt.matrix().max_abs_diff(&swap) < 1e-15);
        assert_abs_diff_eq!(pt.min_eigenvalue().unwrap(), -0.5, epsilon = 1e-12);

        let w = werner(0.7).unwrap();
        for factor in [Factor::First, Factor::Second] {
            let once = partial_transpose_operator(w.operator(), (2, 2), factor).unwrap();
            let twice = partial_transpose_operator(&once, (2, 2), factor).unwrap();
            assert!(twice.matrix().max_abs_diff(w.matrix()) < 1e-12);
        }
        assert!(partial_transpose_operator(w.operator(), (2, 3), Factor::First).is_err());
    }

    #[test]
    fn classify_mixed_examples() {
        let w = |p| BipartiteState::mixed(werner(p).unwrap(), 2, 2).unwrap();
        // oracle: λ_min(PT W(p)) = (1 − 3p)/4
        for p in [0.2, 0.5] {
            assert_abs_diff_eq!(
                ppt_min_eigenvalue(&w(p)).unwrap(),
                (1.0 - 3.0 * p) / 4.0,
                epsilon = 1e-12
            );
        }
        let v = classify_mixed(&w(0.5)).unwrap();
        assert_eq!(v.status, SeparabilityStatus::Entangled);
        assert!(matches!(v.witness, Some(Witness::NegativePartialTranspose(e)) if e < 0.0));
        assert_eq!(
            classify_mixed(&w(0.2)).unwrap().status,
            SeparabilityStatus::Separable
        );

        let mm = BipartiteState::mixed(DensityMatrix::maximally_mixed(4).unwrap(), 2, 2).unwrap();
        assert_eq!(
            classify_mixed(&mm).unwrap().status,
            SeparabilityStatus::Separable
        );

        let big = BipartiteState::mixed(DensityMatrix::maximally_mixed(9).unwrap(), 3, 3).unwrap();
        assert_eq!(
            classify_mixed(&big).unwrap().status,
            SeparabilityStatus::Undecided
        );

        assert_eq!(
            classify_mixed(&pure(singlet())).unwrap_err(),
            Error::PureStateInput
        );
    }

    fn classical_zz() -> SeparableMixture {
        SeparableMixture::new(vec![
            MixtureComponent {
                weight: 0.5,
                first: ket0().density(),
                second: ket0().density(),
            },
            MixtureComponent {
                weight: 0.5,
                first: ket1().density(),
                second: ket1().density(),
            },
        ])
        .unwrap()
    }

    #[test]
    fn mixtures() {
        let rho = DensityMatrix::diagonal(&[0.4, 0.6]).unwrap();
        let single = SeparableMixture::new(vec![MixtureComponent {
            weight: 1.0,
            first: rho.clone(),
            second: ket_plus().density(),
        }])
        .unwrap();
        let s = mix_separable(&single).unwrap();
        assert!(
            s.density()
                .matrix()
                .max_abs_diff(rho.tensor(&ket_plus().density()).unwrap().matrix())
                < 1e-15
        );

        let s = mix_separable(&classical_zz()).unwrap();
        assert!(
            s.density()
                .matrix()
                .max_abs_diff(&ComplexMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5]))
                < 1e-15
        );
        let v = classify_mixed(&s).unwrap();
        assert_eq!(v.status, SeparabilityStatus::Separable);
        assert!(matches!(v.witness, Some(Witness::Mixture(_))));

        // Mixture provenance is honoured beyond PPT-sufficient dimensions.
        let big = SeparableMixture::new(vec![MixtureComponent {
            weight: 1.0,
            first: DensityMatrix::maximally_mixed(3).unwrap(),
            second: DensityMatrix::maximally_mixed(3).unwrap(),
        }])
        .unwrap();
        assert_eq!(
            classify_mixed(&mix_separable(&big).unwrap())
                .unwrap()
                .status,
            SeparabilityStatus::Separable
        );

        let bad = SeparableMixture::new(vec![MixtureComponent {
            weight: 0.7,
            first: rho.clone(),
            second: rho.clone(),
        }]);
        assert!(matches!(bad, Err(Error::InvalidWeights(_))));
        let negative = SeparableMixture::new(vec![
            MixtureComponent {
                weight: 1.5,
                first: rho.clone(),
                second: rho.clone(),
            },
            MixtureComponent {
                weight: -0.5,
                first: rho.clone(),
                second: rho.clone(),
            },
        ]);
        assert!(matches!(negative, Err(Error::InvalidWeights(_))));
    }

    #[test]
    fn correlation_examples() {
        let rho = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        let prod = BipartiteState::product_mixed(&rho, &ket_plus().density()).unwrap();
        let c = correlation(&prod, &sigma_z(), &sigma_x()).unwrap();
        assert_abs_diff_eq!(c.correlation, 0.0, epsilon = 1e-15);

        let cl = mix_separable(&classical_zz()).unwrap();
        let c = correlation(&cl, &sigma_z(), &sigma_z()).unwrap();
        assert_abs_diff_eq!(c.joint, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.product_of_marginals, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.correlation, 1.0, epsilon = 1e-15);

        let c = correlation(&pure(singlet()), &sigma_z(), &sigma_z()).unwrap();
        assert_abs_diff_eq!(c.joint, -1.0, epsilon = 1e-15);

        assert!(correlation(&cl, &HermitianOperator::identity(3), &sigma_z()).is_err());
    }

    #[test]
    fn identity_check_examples() {
        assert!(classical_mixture_identity_check(
            &classical_zz(),
            &sigma_x(),
            &sigma_z()
        ));
        let single = SeparableMixture::new(vec![MixtureComponent {
            weight: 1.0,
            first: ket_plus().density(),
            second: ket1().density(),
        }])
        .unwrap();
        assert!(classical_mixture_identity_check(
            &single,
            &sigma_x(),
            &sigma_y()
        ));

        let corrupted = SeparableMixture::new_unchecked(vec![MixtureComponent {
            weight: 0.6,
            first: ket_plus().density(),
            second: ket1().density(),
        }]);
        assert!(!classical_mixture_identity_check(
            &corrupted,
            &sigma_x(),
            &sigma_z()
        ));
    }

    #[test]
    fn chsh_examples() {
        let s = pure(singlet());
        // oracle: E(x, y) = −x·y for the singlet; here each term is ∓1/√2.
        let st = ChshSettings::standard();
        let dot = |x: [f64; 3], y: [f64; 3]| -(x[0] * y[0] + x[1] * y[1] + x[2] * y[2]);
        let oracle = (dot(st.a, st.b) + dot(st.a, st.b_prime) + dot(st.a_prime, st.b)
            - dot(st.a_prime, st.b_prime))
        .abs();
        assert_abs_diff_eq!(oracle, 2.0 * 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(chsh_value(&s, &st).unwrap(), oracle, epsilon = 1e-12);

        let degenerate = ChshSettings {
            a_prime: st.a,
            b_prime: st.b,
            ..st
        };
        assert!(chsh_value(&s, &degenerate).unwrap() <= 2.0 + 1e-12);

        let bad = BipartiteState::mixed(DensityMatrix::maximally_mixed(6).unwrap(), 2, 3).unwrap();
        assert!(matches!(
            chsh_value(&bad, &st),
            Err(Error::NotQubitPair { .. })
        ));
    }

    #[test]
    fn verdict_report_shape() {
        let v =
            classify_mixed(&BipartiteState::mixed(werner(1.0).unwrap(), 2, 2).unwrap()).unwrap();
        let json = serde_json::to_value(VerdictReport::from(&v)).unwrap();
        assert_eq!(json["status"], "ENTANGLED");
        assert_eq!(json["witness"]["kind"], "negative_partial_transpose");
        assert!(json.get("schmidt").is_none());
    }
}
