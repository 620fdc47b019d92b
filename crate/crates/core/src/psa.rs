//! Potential states of affairs: Born-rule valuations over a power graph, the
//! certainty classification of their entries, and reconstruction of the
//! density matrix from a valuation.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{PowerGraph, PowerNode};
use crate::operator::{
    born_rule, eigh, hermitian_eigen, ComplexMatrix, DensityMatrix, HermitianOperator,
    QuantumState, StateVector,
};
use crate::tolerance;

/// A total map from the powers of a graph to potentia values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialStateOfAffairs {
    graph: Arc<PowerGraph>,
    // Indexed like graph.nodes().
    values: Vec<f64>,
}

impl PotentialStateOfAffairs {
    /// Builds a valuation from explicit entries, in any order. Every node
    /// needs exactly one entry and every value must lie in `[0, 1]`.
    pub fn from_entries<I, S>(graph: Arc<PowerGraph>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut values = vec![None; graph.len()];
        for (id, value) in entries {
            let id = id.as_ref();
            let k = graph
                .position(id)
                .ok_or_else(|| Error::UnknownId(id.to_string()))?;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::PotentiaOutOfRange {
                    id: id.to_string(),
                    value,
                });
            }
            if values[k].replace(value).is_some() {
                return Err(Error::DuplicateId(id.to_string()));
            }
        }
        let values = values
            .into_iter()
            .zip(graph.ids())
            .map(|(v, id)| v.ok_or_else(|| Error::MissingEntry(id.to_string())))
            .collect::<Result<Vec<f64>>>()?;
        Ok(PotentialStateOfAffairs { graph, values })
    }

    pub fn graph(&self) -> &PowerGraph {
        &self.graph
    }

    pub fn shared_graph(&self) -> Arc<PowerGraph> {
        Arc::clone(&self.graph)
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.graph.position(id).map(|k| self.values[k])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(id, potentia)` in graph node order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.graph.ids().zip(self.values.iter().copied())
    }

    /// Sum of potentia over the given ids.
    pub fn total<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<f64> {
        ids.into_iter()
            .map(|id| self.get(id).ok_or_else(|| Error::UnknownId(id.to_string())))
            .sum()
    }
}

/// Applies the Born rule to every power of `g`.
pub fn evaluate_psa<S: QuantumState + ?Sized>(
    state: &S,
    g: Arc<PowerGraph>,
) -> Result<PotentialStateOfAffairs> {
    if let Some(d) = g.dim() {
        if d != state.dim() {
            return Err(Error::DimensionMismatch {
                context: "potential state of affairs",
                expected: d,
                found: state.dim(),
            });
        }
    }
    let values = g
        .nodes()
        .iter()
        .map(|n| born_rule(state, &n.projector))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PotentialStateOfAffairs { graph: g, values })
}

/// Certain and impossible powers alongside the full valuation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealityReport {
    pub epr_elements: BTreeSet<String>,
    pub epr_null: BTreeSet<String>,
    pub generalized_elements: BTreeMap<String, f64>,
}

pub fn classify_reality(psa: &PotentialStateOfAffairs, eps_real: f64) -> RealityReport {
    let mut report = RealityReport {
        epr_elements: BTreeSet::new(),
        epr_null: BTreeSet::new(),
        generalized_elements: BTreeMap::new(),
    };
    for (id, p) in psa.entries() {
        if p >= 1.0 - eps_real {
            report.epr_elements.insert(id.to_string());
        }
        if p <= eps_real {
            report.epr_null.insert(id.to_string());
        }
        report.generalized_elements.insert(id.to_string(), p);
    }
    report
}

/// `d²` rank-one powers whose real span is every hermitian operator on `ℂ^d`:
/// `Z{i} = |i⟩⟨i|`, and for `i < j` the projectors `R{i}_{j}` onto
/// `(|i⟩+|j⟩)/√2` and `I{i}_{j}` onto `(|i⟩+i|j⟩)/√2`.
pub fn informationally_complete_family(d: usize) -> Result<PowerGraph> {
    let max = tolerance::max_dim();
    if d < 2 || d > max {
        return Err(Error::DimensionOutOfRange {
            dim: d,
            min: 2,
            max,
        });
    }
    let mut nodes = Vec::with_capacity(d * d);
    for i in 0..d {
        nodes.push(PowerNode::new(
            format!("Z{i}"),
            StateVector::basis(d, i)?.projector(),
        ));
    }
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    for i in 0..d {
        for j in i + 1..d {
            for (label, phase) in [
                ("R", Complex64::new(FRAC_1_SQRT_2, 0.0)),
                ("I", Complex64::new(0.0, FRAC_1_SQRT_2)),
            ] {
                let mut amps = vec![Complex64::new(0.0, 0.0); d];
                amps[i] = h;
                amps[j] = phase;
                nodes.push(PowerNode::new(
                    format!("{label}{i}_{j}"),
                    StateVector::new(amps)?.projector(),
                ));
            }
        }
    }
    let g = PowerGraph::new(nodes)?;
    let rank = numerical_rank(&measurement_matrix(&g, d));
    if rank != d * d {
        return Err(Error::Internal(format!(
            "family spans rank {rank}, expected {}",
            d * d
        )));
    }
    Ok(g)
}

/// Rows `k` map the real parameters of a hermitian `ρ` to `Tr(P_k ρ)`.
///
/// Parameters: the `d` diagonal entries, then for each `i < j` the real and
/// imaginary parts of `ρ_ij`. With `P_ij = p + iq` and `ρ_ij = a + ib`,
/// `Tr(Pρ) = Σ P_ii ρ_ii + Σ_{i<j} 2(p a + q b)`.
fn measurement_matrix(g: &PowerGraph, d: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(g.len(), d * d);
    for (k, node) in g.nodes().iter().enumerate() {
        let p = node.projector.matrix();
        for i in 0..d {
            a[(k, i)] = p.get(i, i).re;
        }
        let mut col = d;
        for i in 0..d {
            for j in i + 1..d {
                let z = p.get(i, j);
                a[(k, col)] = 2.0 * z.re;
                a[(k, col + 1)] = 2.0 * z.im;
                col += 2;
            }
        }
    }
    a
}

fn hermitian_from_params(x: &DVector<f64>, d: usize) -> ComplexMatrix {
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = Complex64::new(x[i], 0.0);
    }
    let mut col = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = Complex64::new(x[col], x[col + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            col += 2;
        }
    }
    ComplexMatrix::from_nalgebra(m).expect("finite parameters")
}

fn rank_cutoff(singular: &DVector<f64>, rows: usize, cols: usize) -> f64 {
    let max = singular.iter().copied().fold(0.0, f64::max);
    max * rows.max(cols) as f64 * f64::EPSILON * 16.0
}

fn numerical_rank(a: &DMatrix<f64>) -> usize {
    let s = a.clone().svd(false, false).singular_values;
    let cut = rank_cutoff(&s, a.nrows(), a.ncols());
    s.iter().filter(|&&v| v > cut).count()
}

/// Outcome of inverting a valuation.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionResult {
    pub rho_hat: DensityMatrix,
    /// `max_k |Tr(P_k ρ̂) − Ψ(P_k)|`.
    pub residual: f64,
    /// Ratio of the largest to the smallest retained singular value.
    pub condition_indicator: f64,
    /// Rank of the vectorized family.
    pub rank: usize,
    pub complete: bool,
}

impl ReconstructionResult {
    /// Largest eigenvalue of `ρ̂` with its phase-fixed eigenvector. For a
    /// valuation that came from a pure state this recovers the vector.
    pub fn dominant_vector(&self) -> Result<(f64, StateVector)> {
        let eig = hermitian_eigen(self.rho_hat.operator())?;
        let last = eig.values.len() - 1;
        Ok((eig.values[last], eig.vectors[last].clone()))
    }
}

/// Solves `Tr(P_k ρ) = Ψ(P_k)` for hermitian `ρ` by least squares, then
/// clips negative eigenvalues and renormalizes the trace.
pub fn reconstruct_density(psa: &PotentialStateOfAffairs) -> Result<ReconstructionResult> {
    let g = psa.graph();
    let d = g.dim().ok_or(Error::EmptyPsa)?;
    let a = measurement_matrix(g, d);
    let b = DVector::from_vec(psa.values.clone());

    let svd = a.clone().svd(true, true);
    let cut = rank_cutoff(&svd.singular_values, a.nrows(), a.ncols());
    let retained: Vec<f64> = svd
        .singular_values
        .iter()
        .copied()
        .filter(|&s| s > cut)
        .collect();
    let rank = retained.len();
    if rank == 0 {
        return Err(Error::EmptyPsa);
    }
    let condition_indicator = retained.iter().copied().fold(0.0, f64::max)
        / retained.iter().copied().fold(f64::INFINITY, f64::min);
    let x = svd
        .solve(&b, cut)
        .map_err(|e| Error::Internal(format!("least squares failed: {e}")))?;

    let raw = hermitian_from_params(&x, d);
    let rho_hat = project_to_density(&raw)?;

    let residual = g
        .nodes()
        .iter()
        .zip(&psa.values)
        .map(|(n, &target)| Ok((rho_hat.expect(n.projector.operator())? - target).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let full_rank = rank == d * d;
    if full_rank && residual > tolerance::INCONSISTENCY {
        return Err(Error::InconsistentPsa { residual });
    }
    Ok(ReconstructionResult {
        rho_hat,
        residual,
        condition_indicator,
        rank,
        complete: full_rank && residual <= tolerance::RECONSTRUCTION,
    })
}

/// Nearest-in-spectrum density matrix: negative eigenvalues set to zero,
/// then the trace rescaled to one.
fn project_to_density(raw: &ComplexMatrix) -> Result<DensityMatrix> {
    let (values, vectors) = eigh(raw)?;
    let clipped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= f64::EPSILON {
        return Err(Error::InconsistentPsa {
            residual: values.iter().copied().fold(0.0, |m, v| m.max(v.abs())),
        });
    }
    let d = raw.rows();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for (w, v) in clipped.iter().zip(&vectors) {
        if *w > 0.0 {
            m += (v * v.adjoint()) * Complex64::new(w / total, 0.0);
        }
    }
    DensityMatrix::new(HermitianOperator::new(ComplexMatrix::from_nalgebra(m)?)?)
}

/// JSON shape of a valuation report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsaReport {
    pub state_label: String,
    pub entries: Vec<PsaEntry>,
    pub epr_elements: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<ReconstructionSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsaEntry {
    pub power: String,
    pub potentia: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReconstructionSummary {
    pub residual: f64,
    pub complete: bool,
    pub rank: usize,
    pub condition_indicator: f64,
    pub rho_hat: ComplexMatrix,
}

impl From<&ReconstructionResult> for ReconstructionSummary {
    fn from(r: &ReconstructionResult) -> Self {
        ReconstructionSummary {
            residual: r.residual,
            complete: r.complete,
            rank: r.rank,
            condition_indicator: r.condition_indicator,
            rho_hat: r.rho_hat.matrix().clone(),
        }
    }
}

impl PsaReport {
    pub fn new(
        state_label: impl Into<String>,
        psa: &PotentialStateOfAffairs,
        reconstruction: Option<&ReconstructionResult>,
    ) -> Self {
        let reality = classify_reality(psa, tolerance::REALITY);
        PsaReport {
            state_label: state_label.into(),
            entries: psa
                .entries()
                .map(|(id, p)| PsaEntry {
                    power: id.to_string(),
                    potentia: p,
                })
                .collect(),
            epr_elements: psa
                .entries()
                .map(|(id, _)| id)
                .filter(|id| reality.epr_elements.contains(*id))
                .map(str::to_string)
                .collect(),
            reconstruction: reconstruction.map(ReconstructionSummary::from),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{ket0, ket_plus};
    use crate::graph::{x_basis_family, z_basis_family};
    use crate::operator::Projector;
    use approx::assert_abs_diff_eq;

    fn zx() -> Arc<PowerGraph> {
        let mut nodes = z_basis_family(2).unwrap();
        nodes.extend(x_basis_family(2).unwrap());
        Arc::new(PowerGraph::new(nodes).unwrap())
    }

    #[test]
    fn evaluate_examples() {
        let z = Arc::new(PowerGraph::new(z_basis_family(2).unwrap()).unwrap());
        let psa = evaluate_psa(&ket0(), z).unwrap();
        assert_eq!(psa.get("Z0"), Some(1.0));
        assert_eq!(psa.get("Z1"), Some(0.0));

        let mixed = evaluate_psa(&DensityMatrix::maximally_mixed(2).unwrap(), zx()).unwrap();
        for (_, p) in mixed.entries() {
            assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
        }

        // oracle: |⟨0|+⟩|² = |⟨1|+⟩|² = 1/2, ⟨+|+⟩ = 1, ⟨-|+⟩ = 0
        let plus = evaluate_psa(&ket_plus(), zx()).unwrap();
        let expected = [("Z0", 0.5), ("Z1", 0.5), ("X+", 1.0), ("X-", 0.0)];
        for (id, p) in expected {
            assert_abs_diff_eq!(plus.get(id).unwrap(), p, epsilon = 1e-15);
        }
        assert!(evaluate_psa(&StateVector::basis(3, 0).unwrap(), zx()).is_err());
    }

    #[test]
    fn classify_examples() {
        let z = Arc::new(PowerGraph::new(z_basis_family(2).unwrap()).unwrap());
        let r = classify_reality(&evaluate_psa(&ket0(), z).unwrap(), tolerance::REALITY);
        assert_eq!(r.epr_elements, BTreeSet::from(["Z0".to_string()]));
        assert_eq!(r.epr_null, BTreeSet::from(["Z1".to_string()]));

        let half = PotentialStateOfAffairs::from_entries(
            zx(),
            [("Z0", 0.5), ("Z1", 0.5), ("X+", 0.5), ("X-", 0.5)],
        )
        .unwrap();
        let r = classify_reality(&half, tolerance::REALITY);
        assert!(r.epr_elements.is_empty());
        assert_eq!(r.generalized_elements.len(), 4);

        let r = classify_reality(
            &evaluate_psa(&ket_plus(), zx()).unwrap(),
            tolerance::REALITY,
        );
        assert_eq!(r.epr_elements, BTreeSet::from(["X+".to_string()]));
        assert_eq!(r.epr_null, BTreeSet::from(["X-".to_string()]));
        assert_abs_diff_eq!(r.generalized_elements["Z0"], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn from_entries_validation() {
        let g = zx();
        assert!(matches!(
            PotentialStateOfAffairs::from_entries(g.clone(), [("Z0", 0.5)]),
            Err(Error::MissingEntry(_))
        ));
        assert!(matches!(
            PotentialStateOfAffairs::from_entries(g.clone(), [("Q", 0.5)]),
            Err(Error::UnknownId(_))
        ));
        assert!(matches!(
            PotentialStateOfAffairs::from_entries(g.clone(), [("Z0", 1.5)]),
            Err(Error::PotentiaOutOfRange { .. })
        ));
        assert!(matches!(
            PotentialStateOfAffairs::from_entries(g, [("Z0", 0.5), ("Z0", 0.5)]),
            Err(Error::DuplicateId(_))
        ));
    }

    #[test]
    fn qubit_family_spans_paulis() {
        let g = informationally_complete_family(2).unwrap();
        let ids: Vec<&str> = g.ids().collect();
        assert_eq!(ids, ["Z0", "Z1", "R0_1", "I0_1"]);
        assert!(
            g.node("R0_1")
                .unwrap()
                .projector
                .matrix()
                .max_abs_diff(ket_plus().projector().matrix())
                < 1e-15
        );
        // Solve σ = Σ c_k P_k; σ_x = 2R - Z0 - Z1, σ_y = 2I - Z0 - Z1, σ_z = Z0 - Z1, 1 = Z0 + Z1.
        let p: Vec<&ComplexMatrix> = g.nodes().iter().map(|n| n.projector.matrix()).collect();
        let combo = |coeffs: [f64; 4]| {
            let mut m = ComplexMatrix::zeros(2, 2);
            for (c, pk) in coeffs.iter().zip(&p) {
                m = m.add(&pk.scale(Complex64::new(*c, 0.0))).unwrap();
            }
            m
        };
        use crate::fixtures::{sigma_x, sigma_y, sigma_z};
        assert!(combo([-1.0, -1.0, 2.0, 0.0]).max_abs_diff(sigma_x().matrix()) < 1e-15);
        assert!(combo([-1.0, -1.0, 0.0, 2.0]).max_abs_diff(sigma_y().matrix()) < 1e-15);
        assert!(combo([1.0, -1.0, 0.0, 0.0]).max_abs_diff(sigma_z().matrix()) < 1e-15);
        assert!(combo([1.0, 1.0, 0.0, 0.0]).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        assert_eq!(numerical_rank(&measurement_matrix(&g, 2)), 4);
    }

    #[test]
    fn family_sizes_and_range() {
        assert_eq!(informationally_complete_family(3).unwrap().len(), 9);
        assert_eq!(informationally_complete_family(4).unwrap().len(), 16);
        assert!(informationally_complete_family(1).is_err());
        assert!(informationally_complete_family(65).is_err());
    }

    #[test]
    fn reconstruct_diagonal_state() {
        let rho = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
        let g = Arc::new(informationally_complete_family(2).unwrap());
        let r = reconstruct_density(&evaluate_psa(&rho, g).unwrap()).unwrap();
        assert!(r.complete);
        assert!(r.rho_hat.matrix().max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn reconstruct_pure_plus() {
        let g = Arc::new(informationally_complete_family(2).unwrap());
        let r = reconstruct_density(&evaluate_psa(&ket_plus(), g).unwrap()).unwrap();
        let (lambda, v) = r.dominant_vector().unwrap();
        assert_abs_diff_eq!(lambda, 1.0, epsilon = 1e-9);
        assert!(v.phase_distance(&ket_plus()).unwrap() < 1e-9);
        // canonical phase picks the real-positive representative
        assert!(v.amplitudes()[0].re > 0.0);
    }

    #[test]
    fn reconstruct_incomplete_family() {
        let g =
            Arc::new(PowerGraph::new(vec![PowerNode::new("I", Projector::identity(2))]).unwrap());
        let psa = evaluate_psa(&ket0(), g).unwrap();
        let r = reconstruct_density(&psa).unwrap();
        assert!(!r.complete);
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn reconstruct_rejects_empty_and_inconsistent() {
        let empty = Arc::new(PowerGraph::new(Vec::new()).unwrap());
        let psa = PotentialStateOfAffairs::from_entries(empty, Vec::<(&str, f64)>::new()).unwrap();
        assert_eq!(reconstruct_density(&psa).unwrap_err(), Error::EmptyPsa);

        // Z0 and Z1 both certain is not a quantum valuation.
        let g = Arc::new(informationally_complete_family(2).unwrap());
        let bad = PotentialStateOfAffairs::from_entries(
            g,
            [("Z0", 1.0), ("Z1", 1.0), ("R0_1", 0.5), ("I0_1", 0.5)],
        )
        .unwrap();
        assert!(matches!(
            reconstruct_density(&bad),
            Err(Error::InconsistentPsa { .. })
        ));
    }

    #[test]
    fn report_shape() {
        let psa = evaluate_psa(
            &ket0(),
            Arc::new(PowerGraph::new(z_basis_family(2).unwrap()).unwrap()),
        )
        .unwrap();
        let json = serde_json::to_string(&PsaReport::new("ket0", &psa, None)).unwrap();
        assert_eq!(
            json,
            r#"{"state_label":"ket0","entries":[{"power":"Z0","potentia":1.0},{"power":"Z1","potentia":0.0}],"epr_elements":["Z0"]}"#
        );
    }
}
