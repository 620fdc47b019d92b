use serde::Serialize;
use serde_json::{json, Value};

use super::parse::{OutcomeChoice, Scenario, Task};
use crate::entanglement::{
    chsh_value, classify_mixed, classify_pure, correlation, partial_transpose, schmidt_decompose,
    BipartiteState, VerdictReport,
};
use crate::error::{Error, Result};
use crate::graph::{demonstrate_nontransitivity, enumerate_contexts, GraphReport};
use crate::measurement::{
    compare_modes, epr_run, measure_collapse, measure_non_collapse, EprReport, OutcomeSelector,
};
use crate::operator::{partial_trace, Factor, QuantumState};
use crate::psa::{classify_reality, evaluate_psa, reconstruct_density, PsaReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Ok,
    Error,
}

/// One task's result, or the error that stopped it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaskOutcome {
    pub index: usize,
    pub kind: &'static str,
    pub status: TaskStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub scenario_name: String,
    pub tool_version: String,
    pub state_label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tasks: Vec<TaskOutcome>,
    /// Only filled in on request; it would break byte-identical reruns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl Report {
    pub fn failed(&self) -> impl Iterator<Item = &TaskOutcome> {
        self.tasks.iter().filter(|t| t.status == TaskStatus::Error)
    }

    pub fn all_ok(&self) -> bool {
        self.failed().next().is_none()
    }
}

fn factor_index(f: Factor) -> u8 {
    match f {
        Factor::First => 1,
        Factor::Second => 2,
    }
}

fn value<T: Serialize>(x: T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Internal(e.to_string()))
}

struct Runner<'a> {
    scenario: &'a Scenario,
    bipartite: Option<BipartiteState>,
    seed: Option<u64>,
}

impl Runner<'_> {
    fn bipartite(&self) -> Result<&BipartiteState> {
        self.bipartite
            .as_ref()
            .ok_or_else(|| Error::Internal("task needs a bipartite state".into()))
    }

    fn family(&self) -> Result<std::sync::Arc<crate::graph::PowerGraph>> {
        self.scenario
            .family
            .clone()
            .ok_or_else(|| Error::Internal("task needs a power family".into()))
    }

    fn selector(&self, choice: OutcomeChoice) -> Result<OutcomeSelector> {
        Ok(match choice {
            OutcomeChoice::Index(i) => OutcomeSelector::Index(i),
            OutcomeChoice::Eigenvalue(v) => OutcomeSelector::Eigenvalue(v),
            OutcomeChoice::Random => OutcomeSelector::Seeded(
                self.seed
                    .ok_or_else(|| Error::Internal("random outcome without a seed".into()))?,
            ),
        })
    }

    fn advance(&mut self, next: Option<u64>) {
        if next.is_some() {
            self.seed = next;
        }
    }

    fn run(&mut self, task: &Task) -> Result<Value> {
        let state = &self.scenario.state;
        let label = &self.scenario.state_label;
        match task {
            Task::Psa => {
                let psa = evaluate_psa(state, self.family()?)?;
                value(PsaReport::new(label, &psa, None))
            }
            Task::ClassifyReality { epsilon } => {
                let psa = evaluate_psa(state, self.family()?)?;
                value(classify_reality(&psa, *epsilon))
            }
            Task::Reconstruct => {
                let psa = evaluate_psa(state, self.family()?)?;
                let rec = reconstruct_density(&psa)?;
                value(PsaReport::new(label, &psa, Some(&rec)))
            }
            Task::Graph => {
                let g = self.family()?;
                let contexts = enumerate_contexts(&g)?;
                let mut v = value(GraphReport::new(&g, &contexts))?;
                v["transitive"] = Value::Bool(g.is_transitive());
                Ok(v)
            }
            Task::Nontransitivity => {
                let g = self.family()?;
                let witness = demonstrate_nontransitivity(&g).map(|(a, b, c)| [a, b, c]);
                Ok(json!({ "transitive": witness.is_none(), "witness": witness }))
            }
            Task::Schmidt => {
                let d = schmidt_decompose(self.bipartite()?)?;
                let columns = |vs: &[crate::operator::StateVector]| {
                    vs.iter().map(|v| v.to_column()).collect::<Vec<_>>()
                };
                Ok(json!({
                    "coefficients": d.coefficients,
                    "rank": d.rank(),
                    "left_vectors": value(columns(&d.left_vectors))?,
                    "right_vectors": value(columns(&d.right_vectors))?,
                }))
            }
            Task::ClassifyPure => value(VerdictReport::from(&classify_pure(self.bipartite()?)?)),
            Task::ClassifyMixed => value(VerdictReport::from(&classify_mixed(self.bipartite()?)?)),
            Task::PartialTrace { keep } => {
                let s = self.bipartite()?;
                let reduced = partial_trace(&s.density(), s.dims(), *keep)?;
                Ok(json!({ "keep": factor_index(*keep), "reduced": value(reduced.matrix())? }))
            }
            Task::PartialTranspose { factor } => {
                let pt = partial_transpose(self.bipartite()?, *factor)?;
                Ok(json!({
                    "factor": factor_index(*factor),
                    "matrix": value(pt.matrix())?,
                    "min_eigenvalue": pt.min_eigenvalue()?,
                }))
            }
            Task::Correlation { a, b } => {
                let c = correlation(self.bipartite()?, &a.op, &b.op)?;
                Ok(json!({
                    "a": a.label,
                    "b": b.label,
                    "joint": c.joint,
                    "product_of_marginals": c.product_of_marginals,
                    "correlation": c.correlation,
                }))
            }
            Task::Chsh { settings } => Ok(json!({
                "settings": value(settings)?,
                "value": chsh_value(self.bipartite()?, settings)?,
            })),
            Task::Measure {
                observable,
                outcome,
            } => {
                let record =
                    measure_collapse(&state.to_density(), observable, self.selector(*outcome)?)?;
                self.advance(record.next_seed);
                Ok(json!({
                    "observable": record.observable_label,
                    "mode": value(record.mode)?,
                    "outcome_index": record.outcome_index,
                    "outcome_value": record.outcome_value,
                    "outcome_probability": record.outcome_probability,
                    "post_state": value(record.post_state.matrix())?,
                }))
            }
            Task::MeasureNonCollapse => {
                let report = measure_non_collapse(&state.to_density(), self.family()?)?;
                Ok(json!({
                    "mode": value(report.mode)?,
                    "psa": value(PsaReport::new(label, &report.psa, None))?,
                    "state": value(report.state.matrix())?,
                }))
            }
            Task::EprRun {
                local_obs,
                distant_obs,
                outcome,
            } => {
                let selector = self.selector(*outcome)?;
                let run = epr_run(self.bipartite()?, local_obs, distant_obs, selector)?;
                self.advance(run.first_measurement.next_seed);
                value(EprReport::from(&run))
            }
            Task::CompareModes {
                local_obs,
                distant_obs,
                outcome,
            } => {
                let selector = self.selector(*outcome)?;
                let cmp = compare_modes(
                    self.bipartite()?,
                    self.family()?,
                    local_obs,
                    distant_obs,
                    selector,
                )?;
                self.advance(cmp.collapse.first_measurement.next_seed);
                Ok(json!({
                    "collapse": value(EprReport::from(&cmp.collapse))?,
                    "non_collapse": {
                        "mode": value(cmp.non_collapse.mode)?,
                        "psa": value(PsaReport::new(label, &cmp.non_collapse.psa, None))?,
                        "distant_marginal": value(cmp.non_collapse_distant_marginal.matrix())?,
                    },
                    "non_collapse_observer_independent": cmp.non_collapse_observer_independent,
                }))
            }
        }
    }
}

/// Runs every task in order. A failing task is recorded and the rest still run.
pub fn run_scenario(scenario: &Scenario) -> Report {
    let bipartite = scenario
        .dims
        .and_then(|(d1, d2)| BipartiteState::new(scenario.state.clone(), d1, d2).ok());
    let mut runner = Runner {
        scenario,
        bipartite,
        seed: scenario.seed,
    };
    let tasks = scenario
        .tasks
        .iter()
        .enumerate()
        .map(|(index, task)| match runner.run(task) {
            Ok(result) => TaskOutcome {
                index,
                kind: task.kind(),
                status: TaskStatus::Ok,
                result: Some(result),
                error: None,
            },
            Err(e) => TaskOutcome {
                index,
                kind: task.kind(),
                status: TaskStatus::Error,
                result: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Report {
        scenario_name: scenario.name.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        state_label: scenario.state_label.clone(),
        seed: scenario.seed,
        tasks,
        wall_time_ms: None,
    }
}
