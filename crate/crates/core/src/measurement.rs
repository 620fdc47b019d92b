//! Projective measurement with and without state update, and EPR runs.
//!
//! Collapse mode applies the Lüders rule `ρ ↦ PρP / Tr(Pρ)` for the
//! eigenprojector `P` of the selected outcome. Non-collapse mode reports the
//! Born-rule valuation of a power graph and leaves the state untouched.

use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::entanglement::BipartiteState;
use crate::error::{Error, Result};
use crate::graph::PowerGraph;
use crate::operator::{
    born_rule, partial_trace, partial_trace_matrix, spectral_decompose, ComplexMatrix,
    DensityMatrix, Factor, HermitianOperator, QuantumState, SpectralComponent,
};
use crate::psa::{evaluate_psa, PotentialStateOfAffairs};
use crate::tolerance;

/// A hermitian operator with a display label.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub label: String,
    pub op: HermitianOperator,
}

impl Observable {
    pub fn new(label: impl Into<String>, op: HermitianOperator) -> Self {
        Observable {
            label: label.into(),
            op,
        }
    }
}

/// How the outcome of a collapse measurement is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutcomeSelector {
    /// Index into the eigenvalues in ascending order.
    Index(usize),
    /// The eigenvalue within [`tolerance::DEGENERACY`] of this value.
    Eigenvalue(f64),
    /// A draw from the Born distribution seeded with this value.
    Seeded(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MeasurementMode {
    Collapse,
    NonCollapse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub observable_label: String,
    pub outcome_index: usize,
    pub outcome_value: f64,
    pub outcome_probability: f64,
    pub pre_state: DensityMatrix,
    pub post_state: DensityMatrix,
    pub mode: MeasurementMode,
    /// Seed for a follow-up random draw; `None` for deterministic selectors.
    pub next_seed: Option<u64>,
}

fn outcome_probabilities(rho: &DensityMatrix, parts: &[SpectralComponent]) -> Result<Vec<f64>> {
    parts.iter().map(|c| born_rule(rho, &c.projector)).collect()
}

fn select(
    selector: OutcomeSelector,
    parts: &[SpectralComponent],
    probabilities: &[f64],
) -> Result<(usize, Option<u64>)> {
    match selector {
        OutcomeSelector::Index(index) => {
            if index >= parts.len() {
                return Err(Error::OutcomeOutOfRange {
                    index,
                    count: parts.len(),
                });
            }
            Ok((index, None))
        }
        OutcomeSelector::Eigenvalue(value) => parts
            .iter()
            .position(|c| (c.eigenvalue - value).abs() < tolerance::DEGENERACY)
            .map(|k| (k, None))
            .ok_or(Error::NoSuchEigenvalue(value)),
        OutcomeSelector::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let total: f64 = probabilities.iter().sum();
            let u: f64 = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (k, &p) in probabilities.iter().enumerate() {
                if p <= tolerance::PROBABILITY {
                    continue;
                }
                chosen = Some(k);
                acc += p;
                if u < acc {
                    break;
                }
            }
            let k = chosen.ok_or(Error::ZeroProbabilityOutcome { probability: 0.0 })?;
            Ok((k, Some(rng.next_u64())))
        }
    }
}

/// Lüders update for one eigenprojector; `None` when the outcome is impossible.
fn luders(
    rho: &DensityMatrix,
    p: &ComplexMatrix,
    probability: f64,
) -> Result<Option<DensityMatrix>> {
    if probability <= tolerance::PROBABILITY {
        return Ok(None);
    }
    let post = p
        .matmul(rho.matrix())?
        .matmul(p)?
        .scale(num_complex::Complex64::new(1.0 / probability, 0.0));
    Ok(Some(DensityMatrix::from_matrix(post)?))
}

/// Measures `obs` and updates the state by the projection postulate.
pub fn measure_collapse(
    rho: &DensityMatrix,
    obs: &Observable,
    selector: OutcomeSelector,
) -> Result<MeasurementRecord> {
    if obs.op.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "measurement",
            expected: rho.dim(),
            found: obs.op.dim(),
        });
    }
    let parts = spectral_decompose(&obs.op)?;
    let probabilities = outcome_probabilities(rho, &parts)?;
    let (k, next_seed) = select(selector, &parts, &probabilities)?;
    let probability = probabilities[k];
    let post_state = luders(rho, parts[k].projector.matrix(), probability)?
        .ok_or(Error::ZeroProbabilityOutcome { probability })?;
    Ok(MeasurementRecord {
        observable_label: obs.label.clone(),
        outcome_index: k,
        outcome_value: parts[k].eigenvalue,
        outcome_probability: probability,
        pre_state: rho.clone(),
        post_state,
        mode: MeasurementMode::Collapse,
        next_seed,
    })
}

/// The non-collapse description: a valuation of every power, with the state
/// returned as it was given.
#[derive(Clone, Debug, PartialEq)]
pub struct NonCollapseReport {
    pub psa: PotentialStateOfAffairs,
    pub state: DensityMatrix,
    pub mode: MeasurementMode,
}

pub fn measure_non_collapse(rho: &DensityMatrix, g: Arc<PowerGraph>) -> Result<NonCollapseReport> {
    Ok(NonCollapseReport {
        psa: evaluate_psa(rho, g)?,
        state: rho.clone(),
        mode: MeasurementMode::NonCollapse,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationEntry {
    pub setting: String,
    pub expectation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EprRun {
    pub initial: BipartiteState,
    pub first_measurement: MeasurementRecord,
    pub conditional_distant_state: DensityMatrix,
    pub correlation_table: Vec<CorrelationEntry>,
}

fn local_on_first(s: &BipartiteState, local: &Observable) -> Result<Observable> {
    let (d1, d2) = s.dims();
    if local.op.dim() != d1 {
        return Err(Error::DimensionMismatch {
            context: "local observable",
            expected: d1,
            found: local.op.dim(),
        });
    }
    Ok(Observable::new(
        local.label.clone(),
        local.op.tensor(&HermitianOperator::identity(d2))?,
    ))
}

/// Measures `local_obs ⊗ I` with collapse, then reads off the distant factor.
pub fn epr_run(
    s: &BipartiteState,
    local_obs: &Observable,
    distant_obs: &Observable,
    selector: OutcomeSelector,
) -> Result<EprRun> {
    let (d1, d2) = s.dims();
    if distant_obs.op.dim() != d2 {
        return Err(Error::DimensionMismatch {
            context: "distant observable",
            expected: d2,
            found: distant_obs.op.dim(),
        });
    }
    let joint_obs = local_on_first(s, local_obs)?;
    let record = measure_collapse(&s.density(), &joint_obs, selector)?;
    let conditional_distant_state = partial_trace(&record.post_state, (d1, d2), Factor::Second)?;
    let correlation_table = spectral_decompose(&distant_obs.op)?
        .iter()
        .map(|q| {
            let lifted = HermitianOperator::identity(d1).tensor(q.projector.operator())?;
            Ok(CorrelationEntry {
                setting: format!(
                    "{}={};{}={}",
                    local_obs.label,
                    setting_value(record.outcome_value),
                    distant_obs.label,
                    setting_value(q.eigenvalue)
                ),
                expectation: record.post_state.expect(&lifted)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EprRun {
        initial: s.clone(),
        first_measurement: record,
        conditional_distant_state,
        correlation_table,
    })
}

/// Eigenvalue rounded to 12 decimals for labels, so `0.9999999999999998` prints as `1`.
fn setting_value(x: f64) -> String {
    let rounded = (x * 1e12).round() / 1e12 + 0.0;
    format!("{rounded}")
}

/// `Σ_λ p_λ Tr₁(post_λ)` over all outcomes of `local_obs ⊗ I`.
pub fn outcome_averaged_distant_state(
    s: &BipartiteState,
    local_obs: &Observable,
) -> Result<DensityMatrix> {
    let joint_obs = local_on_first(s, local_obs)?;
    let rho = s.density();
    let parts = spectral_decompose(&joint_obs.op)?;
    let probabilities = outcome_probabilities(&rho, &parts)?;
    let d2 = s.dims().1;
    let mut acc = ComplexMatrix::zeros(d2, d2);
    for (part, &p) in parts.iter().zip(&probabilities) {
        if let Some(post) = luders(&rho, part.projector.matrix(), p)? {
            let reduced = partial_trace_matrix(post.matrix(), s.dims(), Factor::Second)?;
            acc = acc.add(&reduced.scale(num_complex::Complex64::new(p, 0.0)))?;
        }
    }
    DensityMatrix::from_matrix(acc)
}

/// Collapse and non-collapse descriptions of the same run, side by side.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeComparison {
    pub collapse: EprRun,
    pub non_collapse: NonCollapseReport,
    /// `Tr₁ ρ` of the unmeasured state, shared by every non-collapse description.
    pub non_collapse_distant_marginal: DensityMatrix,
    /// The non-collapse half never depends on the outcome selector.
    pub non_collapse_observer_independent: bool,
}

pub fn compare_modes(
    s: &BipartiteState,
    g: Arc<PowerGraph>,
    local_obs: &Observable,
    distant_obs: &Observable,
    selector: OutcomeSelector,
) -> Result<ModeComparison> {
    let collapse = epr_run(s, local_obs, distant_obs, selector)?;
    let rho = s.density();
    let non_collapse = measure_non_collapse(&rho, g)?;
    Ok(ModeComparison {
        collapse,
        non_collapse,
        non_collapse_distant_marginal: s.marginal(Factor::Second)?,
        non_collapse_observer_independent: true,
    })
}

/// JSON shape of an EPR run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EprReport {
    pub mode: MeasurementMode,
    pub outcome: OutcomeReport,
    pub distant_state: ComplexMatrix,
    pub correlations: Vec<CorrelationEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeReport {
    pub value: f64,
    pub probability: f64,
}

impl From<&EprRun> for EprReport {
    fn from(run: &EprRun) -> Self {
        EprReport {
            mode: run.first_measurement.mode,
            outcome: OutcomeReport {
                value: run.first_measurement.outcome_value,
                probability: run.first_measurement.outcome_probability,
            },
            distant_state: run.conditional_distant_state.matrix().clone(),
            correlations: run.correlation_table.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::graph::{x_basis_family, z_basis_family};
    use approx::assert_abs_diff_eq;

    fn sz() -> Observable {
        Observable::new("sigma_z", sigma_z())
    }

    fn sx() -> Observable {
        Observable::new("sigma_x", sigma_x())
    }

    fn zx() -> Arc<PowerGraph> {
        let mut nodes = z_basis_family(2).unwrap();
        nodes.extend(x_basis_family(2).unwrap());
        Arc::new(PowerGraph::new(nodes).unwrap())
    }

    #[test]
    fn collapse_on_eigenstate_is_trivial() {
        let rho = ket0().density();
        let r = measure_collapse(&rho, &sz(), OutcomeSelector::Eigenvalue(1.0)).unwrap();
        assert_abs_diff_eq!(r.outcome_probability, 1.0, epsilon = 1e-15);
        assert!(r.post_state.matrix().max_abs_diff(rho.matrix()) < 1e-15);
        assert_eq!(r.outcome_index, 1);
        assert_eq!(r.mode, MeasurementMode::Collapse);
    }

    #[test]
    fn collapse_of_plus_and_repeatability() {
        let rho = ket_plus().density();
        let r = measure_collapse(&rho, &sz(), OutcomeSelector::Eigenvalue(1.0)).unwrap();
        // oracle: P₊ρP₊ = ½|0⟩⟨0|, Tr = ½
        assert_abs_diff_eq!(r.outcome_probability, 0.5, epsilon = 1e-15);
        assert!(
            r.post_state
                .matrix()
                .max_abs_diff(ket0().density().matrix())
                < 1e-15
        );
        let again = measure_collapse(
            &r.post_state,
            &sz(),
            OutcomeSelector::Index(r.outcome_index),
        )
        .unwrap();
        assert_abs_diff_eq!(again.outcome_probability, 1.0, epsilon = 1e-12);
        assert_eq!(again.outcome_value, r.outcome_value);
    }

    #[test]
    fn collapse_errors() {
        let rho = ket0().density();
        assert!(matches!(
            measure_collapse(&rho, &sz(), OutcomeSelector::Eigenvalue(-1.0)),
            Err(Error::ZeroProbabilityOutcome { .. })
        ));
        assert!(matches!(
            measure_collapse(&rho, &sz(), OutcomeSelector::Index(2)),
            Err(Error::OutcomeOutOfRange { index: 2, count: 2 })
        ));
        assert!(matches!(
            measure_collapse(&rho, &sz(), OutcomeSelector::Eigenvalue(0.3)),
            Err(Error::NoSuchEigenvalue(_))
        ));
        let big = DensityMatrix::maximally_mixed(3).unwrap();
        assert!(matches!(
            measure_collapse(&big, &sz(), OutcomeSelector::Index(0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn seeded_selection_is_reproducible_and_skips_impossible_outcomes() {
        let rho = ket_plus().density();
        let a = measure_collapse(&rho, &sz(), OutcomeSelector::Seeded(42)).unwrap();
        let b = measure_collapse(&rho, &sz(), OutcomeSelector::Seeded(42)).unwrap();
        assert_eq!(a, b);
        assert!(a.next_seed.is_some());
        let mut seen = [false; 2];
        for seed in 0..64 {
            let r = measure_collapse(&rho, &sz(), OutcomeSelector::Seeded(seed)).unwrap();
            seen[r.outcome_index] = true;
        }
        assert_eq!(seen, [true, true]);
        for seed in 0..32 {
            let r =
                measure_collapse(&ket0().density(), &sz(), OutcomeSelector::Seeded(seed)).unwrap();
            assert_eq!(r.outcome_value, 1.0);
        }
    }

    #[test]
    fn non_collapse_leaves_state_alone() {
        let rho = ket_plus().density();
        let a = measure_non_collapse(&rho, zx()).unwrap();
        assert_eq!(a.state, rho);
        let expected = [("Z0", 0.5), ("Z1", 0.5), ("X+", 1.0), ("X-", 0.0)];
        for (id, p) in expected {
            assert_abs_diff_eq!(a.psa.get(id).unwrap(), p, epsilon = 1e-15);
        }
        let b = measure_non_collapse(&rho, zx()).unwrap();
        assert_eq!(a, b);
        assert!(measure_non_collapse(&DensityMatrix::maximally_mixed(3).unwrap(), zx()).is_err());
    }

    #[test]
    fn singlet_z_z_is_perfectly_anticorrelated() {
        let s = BipartiteState::pure(singlet(), 2, 2).unwrap();
        let run = epr_run(&s, &sz(), &sz(), OutcomeSelector::Eigenvalue(1.0)).unwrap();
        assert!(
            run.conditional_distant_state
                .matrix()
                .max_abs_diff(ket1().density().matrix())
                < 1e-12
        );
        // table is in ascending distant eigenvalue: −1 first
        assert_eq!(run.correlation_table[0].setting, "sigma_z=1;sigma_z=-1");
        assert_abs_diff_eq!(run.correlation_table[0].expectation, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(run.correlation_table[1].expectation, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn product_state_distant_factor_unchanged() {
        let far = DensityMatrix::diagonal(&[0.25, 0.75]).unwrap();
        let s = BipartiteState::product_mixed(&ket_plus().density(), &far).unwrap();
        let run = epr_run(&s, &sz(), &sx(), OutcomeSelector::Index(0)).unwrap();
        assert!(
            run.conditional_distant_state
                .matrix()
                .max_abs_diff(far.matrix())
                < 1e-12
        );
    }

    #[test]
    fn singlet_z_x_is_uncorrelated() {
        let s = BipartiteState::pure(singlet(), 2, 2).unwrap();
        let run = epr_run(&s, &sz(), &sx(), OutcomeSelector::Index(1)).unwrap();
        for entry in &run.correlation_table {
            assert_abs_diff_eq!(entry.expectation, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn averaged_distant_state_matches_marginal() {
        let s = BipartiteState::pure(singlet(), 2, 2).unwrap();
        let avg = outcome_averaged_distant_state(&s, &sx()).unwrap();
        assert!(
            avg.matrix()
                .max_abs_diff(s.marginal(Factor::Second).unwrap().matrix())
                < 1e-12
        );
    }

    #[test]
    fn compare_modes_examples() {
        let s = BipartiteState::pure(singlet(), 2, 2).unwrap();
        let mut nodes =
            crate::graph::basis_family("B", &crate::fixtures::computational_basis(4).unwrap());
        nodes.push(crate::graph::PowerNode::new("S", singlet().projector()));
        let g = Arc::new(PowerGraph::new(nodes).unwrap());
        let a = compare_modes(&s, g.clone(), &sz(), &sz(), OutcomeSelector::Index(0)).unwrap();
        let b = compare_modes(&s, g.clone(), &sz(), &sz(), OutcomeSelector::Index(1)).unwrap();
        assert_eq!(a.non_collapse, b.non_collapse);
        assert!(a.non_collapse_observer_independent);
        assert!(
            a.collapse
                .conditional_distant_state
                .matrix()
                .max_abs_diff(b.collapse.conditional_distant_state.matrix())
                > 0.5
        );

        let far = DensityMatrix::diagonal(&[0.4, 0.6]).unwrap();
        let p = BipartiteState::product_mixed(&ket_plus().density(), &far).unwrap();
        let c = compare_modes(&p, g, &sz(), &sz(), OutcomeSelector::Index(0)).unwrap();
        assert!(
            c.collapse
                .conditional_distant_state
                .matrix()
                .max_abs_diff(c.non_collapse_distant_marginal.matrix())
                < 1e-12
        );
    }

    #[test]
    fn epr_report_shape() {
        let s = BipartiteState::pure(singlet(), 2, 2).unwrap();
        let run = epr_run(&s, &sz(), &sz(), OutcomeSelector::Index(0)).unwrap();
        let json = serde_json::to_value(EprReport::from(&run)).unwrap();
        assert_eq!(json["mode"], "COLLAPSE");
        assert_eq!(json["outcome"]["value"], -1.0);
        assert_eq!(json["distant_state"]["rows"], 2);
        assert_eq!(json["correlations"].as_array().unwrap().len(), 2);
    }
}
