use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::entanglement::ChshSettings;
use crate::error::Error as CoreError;
use crate::fixtures;
use crate::graph::{x_basis_family, z_basis_family, PowerGraph, PowerNode};
use crate::measurement::Observable;
use crate::operator::{
    ComplexMatrix, DensityMatrix, Factor, HermitianOperator, MatrixObject, Projector, State,
    StateVector,
};
use crate::psa::informationally_complete_family;
use crate::tolerance;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("malformed scenario at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("invalid value at `{path}`: {source}")]
    Invariant {
        path: String,
        #[source]
        source: CoreError,
    },
    #[error("{0}")]
    Unresolvable(String),
}

fn invariant(path: impl Into<String>) -> impl FnOnce(CoreError) -> ScenarioError {
    let path = path.into();
    move |source| ScenarioError::Invariant { path, source }
}

// ---- wire format -------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    state_spec: NamedOrMatrix,
    #[serde(default)]
    dims: Option<[usize; 2]>,
    #[serde(default)]
    power_family: Option<FamilySpec>,
    tasks: Vec<TaskSpec>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NamedOrMatrix {
    Named(String),
    Matrix(MatrixObject),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FamilySpec {
    Named(String),
    Explicit(Vec<PowerSpec>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerSpec {
    id: String,
    projector: MatrixObject,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OutcomeSpec {
    Index(usize),
    Keyword(String),
    Eigenvalue(EigenvalueSpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EigenvalueSpec {
    eigenvalue: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TaskSpec {
    Psa {},
    ClassifyReality {
        #[serde(default)]
        epsilon: Option<f64>,
    },
    Reconstruct {},
    Graph {},
    Nontransitivity {},
    Schmidt {},
    ClassifyPure {},
    ClassifyMixed {},
    PartialTrace {
        keep: u8,
    },
    PartialTranspose {
        factor: u8,
    },
    Correlation {
        a: NamedOrMatrix,
        b: NamedOrMatrix,
    },
    Chsh {
        #[serde(default)]
        settings: Option<ChshSettings>,
    },
    Measure {
        observable: NamedOrMatrix,
        outcome: OutcomeSpec,
    },
    MeasureNonCollapse {},
    EprRun {
        local_obs: NamedOrMatrix,
        distant_obs: NamedOrMatrix,
        outcome: OutcomeSpec,
    },
    CompareModes {
        local_obs: NamedOrMatrix,
        distant_obs: NamedOrMatrix,
        outcome: OutcomeSpec,
    },
}

// ---- resolved form -----------------------------------------------------

/// How a task picks its measurement outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutcomeChoice {
    Index(usize),
    Eigenvalue(f64),
    /// Drawn from the scenario's seed stream.
    Random,
}

/// A validated task with every observable resolved.
#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    Psa,
    ClassifyReality {
        epsilon: f64,
    },
    Reconstruct,
    Graph,
    Nontransitivity,
    Schmidt,
    ClassifyPure,
    ClassifyMixed,
    PartialTrace {
        keep: Factor,
    },
    PartialTranspose {
        factor: Factor,
    },
    Correlation {
        a: Observable,
        b: Observable,
    },
    Chsh {
        settings: ChshSettings,
    },
    Measure {
        observable: Observable,
        outcome: OutcomeChoice,
    },
    MeasureNonCollapse,
    EprRun {
        local_obs: Observable,
        distant_obs: Observable,
        outcome: OutcomeChoice,
    },
    CompareModes {
        local_obs: Observable,
        distant_obs: Observable,
        outcome: OutcomeChoice,
    },
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Psa => "psa",
            Task::ClassifyReality { .. } => "classify_reality",
            Task::Reconstruct => "reconstruct",
            Task::Graph => "graph",
            Task::Nontransitivity => "nontransitivity",
            Task::Schmidt => "schmidt",
            Task::ClassifyPure => "classify_pure",
            Task::ClassifyMixed => "classify_mixed",
            Task::PartialTrace { .. } => "partial_trace",
            Task::PartialTranspose { .. } => "partial_transpose",
            Task::Correlation { .. } => "correlation",
            Task::Chsh { .. } => "chsh",
            Task::Measure { .. } => "measure",
            Task::MeasureNonCollapse => "measure_non_collapse",
            Task::EprRun { .. } => "epr_run",
            Task::CompareModes { .. } => "compare_modes",
        }
    }

    fn needs_family(&self) -> bool {
        matches!(
            self,
            Task::Psa
                | Task::ClassifyReality { .. }
                | Task::Reconstruct
                | Task::Graph
                | Task::Nontransitivity
                | Task::MeasureNonCollapse
                | Task::CompareModes { .. }
        )
    }

    fn needs_dims(&self) -> bool {
        matches!(
            self,
            Task::Schmidt
                | Task::ClassifyPure
                | Task::ClassifyMixed
                | Task::PartialTrace { .. }
                | Task::PartialTranspose { .. }
                | Task::Correlation { .. }
                | Task::Chsh { .. }
                | Task::EprRun { .. }
                | Task::CompareModes { .. }
        )
    }

    fn outcome(&self) -> Option<OutcomeChoice> {
        match self {
            Task::Measure { outcome, .. }
            | Task::EprRun { outcome, .. }
            | Task::CompareModes { outcome, .. } => Some(*outcome),
            _ => None,
        }
    }
}

/// A fully validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub state_label: String,
    pub state: State,
    pub dims: Option<(usize, usize)>,
    pub family: Option<Arc<PowerGraph>>,
    pub tasks: Vec<Task>,
    pub seed: Option<u64>,
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    parse_scenario_with_seed(text, None)
}

/// As [`parse_scenario`], with `seed` (when given) replacing the file's seed.
pub fn parse_scenario_with_seed(text: &str, seed: Option<u64>) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile =
        serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    resolve(file, seed)
}

fn resolve(file: ScenarioFile, seed_override: Option<u64>) -> Result<Scenario, ScenarioError> {
    let (state_label, state, implied_dims) = resolve_state(&file.state_spec)?;
    let dim = crate::operator::QuantumState::dim(&state);
    let dims = match (file.dims, implied_dims) {
        (Some([d1, d2]), _) => {
            if d1 == 0 || d2 == 0 || d1 * d2 != dim {
                return Err(ScenarioError::Invariant {
                    path: "dims".into(),
                    source: CoreError::DimensionMismatch {
                        context: "scenario dims",
                        expected: dim,
                        found: d1 * d2,
                    },
                });
            }
            Some((d1, d2))
        }
        (None, implied) => implied,
    };
    let family = match &file.power_family {
        Some(spec) => Some(Arc::new(resolve_family(spec, dim)?)),
        None => None,
    };
    let seed = seed_override.or(file.seed);

    let mut tasks = Vec::with_capacity(file.tasks.len());
    for (i, spec) in file.tasks.iter().enumerate() {
        let path = format!("tasks[{i}]");
        let task = resolve_task(spec, &path, dims)?;
        if task.needs_family() && family.is_none() {
            return Err(ScenarioError::Unresolvable(format!(
                "{path} ({}) needs a power_family",
                task.kind()
            )));
        }
        if task.needs_dims() && dims.is_none() {
            return Err(ScenarioError::Unresolvable(format!(
                "{path} ({}) needs dims",
                task.kind()
            )));
        }
        if let Task::Measure { observable, .. } = &task {
            check_obs_dim(observable, dim, &format!("{path}.observable"))?;
        }
        if let Task::Chsh { .. } = &task {
            if dims != Some((2, 2)) {
                let (d1, d2) = dims.unwrap_or((0, 0));
                return Err(invariant(path)(CoreError::NotQubitPair { d1, d2 }));
            }
        }
        if task.outcome() == Some(OutcomeChoice::Random) && seed.is_none() {
            return Err(ScenarioError::Unresolvable(format!(
                "{path} draws a random outcome but the scenario has no seed"
            )));
        }
        tasks.push(task);
    }
    Ok(Scenario {
        name: file.name,
        state_label,
        state,
        dims,
        family,
        tasks,
        seed,
    })
}

fn check_obs_dim(obs: &Observable, dim: usize, path: &str) -> Result<(), ScenarioError> {
    if obs.op.dim() != dim {
        return Err(invariant(path)(CoreError::DimensionMismatch {
            context: "observable",
            expected: dim,
            found: obs.op.dim(),
        }));
    }
    Ok(())
}

fn matrix(obj: &MatrixObject, path: &str) -> Result<ComplexMatrix, ScenarioError> {
    let m = ComplexMatrix::try_from(obj.clone()).map_err(invariant(path))?;
    let max = tolerance::max_dim();
    if m.rows() > max {
        return Err(invariant(path)(CoreError::DimensionTooLarge {
            dim: m.rows(),
            max,
        }));
    }
    Ok(m)
}

/// Label, state and the bipartite dims the fixture implies.
type ResolvedState = (String, State, Option<(usize, usize)>);

fn resolve_state(spec: &NamedOrMatrix) -> Result<ResolvedState, ScenarioError> {
    match spec {
        NamedOrMatrix::Matrix(obj) => {
            let m = matrix(obj, "state_spec")?;
            let state = if m.cols() == 1 {
                let amps = m.row_major();
                State::Pure(StateVector::new(amps).map_err(invariant("state_spec"))?)
            } else {
                State::Mixed(DensityMatrix::from_matrix(m).map_err(invariant("state_spec"))?)
            };
            Ok(("explicit".into(), state, None))
        }
        NamedOrMatrix::Named(name) => {
            let (state, dims) = named_state(name)?;
            Ok((name.clone(), state, dims))
        }
    }
}

fn qubit_ket(name: &str) -> Option<StateVector> {
    Some(match name {
        "ket0" => fixtures::ket0(),
        "ket1" => fixtures::ket1(),
        "plus" => fixtures::ket_plus(),
        "minus" => fixtures::ket_minus(),
        "plus_i" => fixtures::ket_plus_i(),
        _ => return None,
    })
}

fn parse_number<T: std::str::FromStr>(text: &str, whole: &str) -> Result<T, ScenarioError> {
    text.trim()
        .parse()
        .map_err(|_| ScenarioError::UnknownFixture(whole.to_string()))
}

fn named_state(name: &str) -> Result<(State, Option<(usize, usize)>), ScenarioError> {
    let two = Some((2, 2));
    if let Some(v) = qubit_ket(name) {
        return Ok((State::Pure(v), None));
    }
    let pure = |v: StateVector| Ok((State::Pure(v), two));
    match name {
        "bell_phi_plus" => return pure(fixtures::bell_phi_plus()),
        "bell_phi_minus" => return pure(fixtures::bell_phi_minus()),
        "bell_psi_plus" => return pure(fixtures::bell_psi_plus()),
        "singlet" | "bell_psi_minus" => return pure(fixtures::singlet()),
        _ => {}
    }
    let (head, arg) = name
        .split_once(':')
        .ok_or_else(|| ScenarioError::UnknownFixture(name.to_string()))?;
    match head {
        "werner" => {
            let p: f64 = parse_number(arg, name)?;
            let rho = fixtures::werner(p).map_err(invariant("state_spec"))?;
            Ok((State::Mixed(rho), two))
        }
        "maximally_mixed" => {
            let d: usize = parse_number(arg, name)?;
            if d == 0 || d > tolerance::max_dim() {
                return Err(invariant("state_spec")(CoreError::DimensionOutOfRange {
                    dim: d,
                    min: 1,
                    max: tolerance::max_dim(),
                }));
            }
            let rho = DensityMatrix::maximally_mixed(d).map_err(invariant("state_spec"))?;
            Ok((State::Mixed(rho), None))
        }
        "product" => {
            let (a, b) = arg
                .split_once(',')
                .ok_or_else(|| ScenarioError::UnknownFixture(name.to_string()))?;
            let (a, b) = match (qubit_ket(a.trim()), qubit_ket(b.trim())) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(ScenarioError::UnknownFixture(name.to_string())),
            };
            let v = a.tensor(&b).map_err(invariant("state_spec"))?;
            Ok((State::Pure(v), two))
        }
        _ => Err(ScenarioError::UnknownFixture(name.to_string())),
    }
}

fn resolve_family(spec: &FamilySpec, dim: usize) -> Result<PowerGraph, ScenarioError> {
    let nodes = match spec {
        FamilySpec::Explicit(list) => list
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let path = format!("power_family[{i}].projector");
                let m = matrix(&p.projector, &path)?;
                let proj = Projector::from_matrix(m).map_err(invariant(path))?;
                Ok(PowerNode::new(p.id.clone(), proj))
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?,
        FamilySpec::Named(names) => {
            let mut nodes = Vec::new();
            for name in names.split('+').map(str::trim) {
                nodes.extend(named_family(name, dim)?);
            }
            nodes
        }
    };
    let g = PowerGraph::new(nodes).map_err(invariant("power_family"))?;
    if let Some(d) = g.dim() {
        if d != dim {
            return Err(invariant("power_family")(CoreError::DimensionMismatch {
                context: "power family",
                expected: dim,
                found: d,
            }));
        }
    }
    Ok(g)
}

fn named_family(name: &str, dim: usize) -> Result<Vec<PowerNode>, ScenarioError> {
    let path = "power_family";
    match name {
        "z_basis" => z_basis_family(dim).map_err(invariant(path)),
        "x_basis" => x_basis_family(dim).map_err(invariant(path)),
        "identity" => Ok(vec![PowerNode::new("I", Projector::identity(dim))]),
        _ => match name.split_once(':') {
            Some(("ic", d)) => {
                let d: usize = parse_number(d, name)?;
                let g = informationally_complete_family(d).map_err(invariant(path))?;
                Ok(g.nodes().to_vec())
            }
            _ => Err(ScenarioError::UnknownFixture(name.to_string())),
        },
    }
}

fn named_observable(name: &str) -> Result<Observable, ScenarioError> {
    let op = match name {
        "sigma_x" => fixtures::sigma_x(),
        "sigma_y" => fixtures::sigma_y(),
        "sigma_z" => fixtures::sigma_z(),
        _ => match name.split_once(':') {
            Some(("identity", d)) => {
                let d: usize = parse_number(d, name)?;
                if d == 0 || d > tolerance::max_dim() {
                    return Err(ScenarioError::UnknownFixture(name.to_string()));
                }
                HermitianOperator::identity(d)
            }
            Some(("spin", v)) => {
                let parts: Vec<f64> = v
                    .split(',')
                    .map(|x| parse_number(x, name))
                    .collect::<Result<_, _>>()?;
                let direction: [f64; 3] = parts
                    .try_into()
                    .map_err(|_| ScenarioError::UnknownFixture(name.to_string()))?;
                fixtures::spin_along(direction).map_err(invariant("observable"))?
            }
            _ => return Err(ScenarioError::UnknownFixture(name.to_string())),
        },
    };
    Ok(Observable::new(name, op))
}

fn observable(spec: &NamedOrMatrix, path: &str) -> Result<Observable, ScenarioError> {
    match spec {
        NamedOrMatrix::Named(name) => named_observable(name),
        NamedOrMatrix::Matrix(obj) => {
            let op = HermitianOperator::new(matrix(obj, path)?).map_err(invariant(path))?;
            Ok(Observable::new("explicit", op))
        }
    }
}

fn outcome(spec: &OutcomeSpec, path: &str) -> Result<OutcomeChoice, ScenarioError> {
    match spec {
        OutcomeSpec::Index(i) => Ok(OutcomeChoice::Index(*i)),
        OutcomeSpec::Eigenvalue(e) => Ok(OutcomeChoice::Eigenvalue(e.eigenvalue)),
        OutcomeSpec::Keyword(k) if k == "random" => Ok(OutcomeChoice::Random),
        OutcomeSpec::Keyword(k) => Err(ScenarioError::Schema {
            path: path.to_string(),
            message: format!(
                "outcome must be an index, \"random\" or {{\"eigenvalue\": x}}, got \"{k}\""
            ),
        }),
    }
}

fn factor(index: u8, path: &str) -> Result<Factor, ScenarioError> {
    match index {
        1 => Ok(Factor::First),
        2 => Ok(Factor::Second),
        other => Err(ScenarioError::Schema {
            path: path.to_string(),
            message: format!("factor must be 1 or 2, got {other}"),
        }),
    }
}

fn bipartite_pair(
    a: &NamedOrMatrix,
    b: &NamedOrMatrix,
    names: (&str, &str),
    path: &str,
    dims: Option<(usize, usize)>,
) -> Result<(Observable, Observable), ScenarioError> {
    let pa = format!("{path}.{}", names.0);
    let pb = format!("{path}.{}", names.1);
    let a = observable(a, &pa)?;
    let b = observable(b, &pb)?;
    if let Some((d1, d2)) = dims {
        check_obs_dim(&a, d1, &pa)?;
        check_obs_dim(&b, d2, &pb)?;
    }
    Ok((a, b))
}

fn resolve_task(
    spec: &TaskSpec,
    path: &str,
    dims: Option<(usize, usize)>,
) -> Result<Task, ScenarioError> {
    Ok(match spec {
        TaskSpec::Psa {} => Task::Psa,
        TaskSpec::ClassifyReality { epsilon } => Task::ClassifyReality {
            epsilon: epsilon.unwrap_or(tolerance::REALITY),
        },
        TaskSpec::Reconstruct {} => Task::Reconstruct,
        TaskSpec::Graph {} => Task::Graph,
        TaskSpec::Nontransitivity {} => Task::Nontransitivity,
        TaskSpec::Schmidt {} => Task::Schmidt,
        TaskSpec::ClassifyPure {} => Task::ClassifyPure,
        TaskSpec::ClassifyMixed {} => Task::ClassifyMixed,
        TaskSpec::PartialTrace { keep } => Task::PartialTrace {
            keep: factor(*keep, &format!("{path}.keep"))?,
        },
        TaskSpec::PartialTranspose { factor: f } => Task::PartialTranspose {
            factor: factor(*f, &format!("{path}.factor"))?,
        },
        TaskSpec::Correlation { a, b } => {
            let (a, b) = bipartite_pair(a, b, ("a", "b"), path, dims)?;
            Task::Correlation { a, b }
        }
        TaskSpec::Chsh { settings } => {
            let settings = settings.unwrap_or_else(ChshSettings::standard);
            for v in [settings.a, settings.a_prime, settings.b, settings.b_prime] {
                fixtures::spin_along(v).map_err(invariant(format!("{path}.settings")))?;
            }
            Task::Chsh { settings }
        }
        TaskSpec::Measure {
            observable: o,
            outcome: out,
        } => Task::Measure {
            observable: observable(o, &format!("{path}.observable"))?,
            outcome: outcome(out, &format!("{path}.outcome"))?,
        },
        TaskSpec::MeasureNonCollapse {} => Task::MeasureNonCollapse,
        TaskSpec::EprRun {
            local_obs,
            distant_obs,
            outcome: out,
        } => {
            let (local_obs, distant_obs) = bipartite_pair(
                local_obs,
                distant_obs,
                ("local_obs", "distant_obs"),
                path,
                dims,
            )?;
            Task::EprRun {
                local_obs,
                distant_obs,
                outcome: outcome(out, &format!("{path}.outcome"))?,
            }
        }
        TaskSpec::CompareModes {
            local_obs,
            distant_obs,
            outcome: out,
        } => {
            let (local_obs, distant_obs) = bipartite_pair(
                local_obs,
                distant_obs,
                ("local_obs", "distant_obs"),
                path,
                dims,
            )?;
            Task::CompareModes {
                local_obs,
                distant_obs,
                outcome: outcome(out, &format!("{path}.outcome"))?,
            }
        }
    })
}

/// Named fixtures accepted in scenario files, with a short description.
pub fn fixture_catalogue() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        (
            "state",
            "ket0, ket1",
            "computational basis states of a qubit",
        ),
        (
            "state",
            "plus, minus, plus_i",
            "sigma_x and sigma_y eigenstates (|0>+|1>)/sqrt2, (|0>-|1>)/sqrt2, (|0>+i|1>)/sqrt2",
        ),
        (
            "state",
            "bell_phi_plus, bell_phi_minus, bell_psi_plus",
            "Bell states on 2x2",
        ),
        (
            "state",
            "singlet (alias bell_psi_minus)",
            "(|01>-|10>)/sqrt2 on 2x2",
        ),
        (
            "state",
            "werner:p",
            "p|singlet><singlet| + (1-p) I/4, 0 <= p <= 1",
        ),
        ("state", "maximally_mixed:d", "I/d"),
        (
            "state",
            "product:a,b",
            "|a>|b> for two named qubit states, e.g. product:plus,ket1",
        ),
        (
            "family",
            "z_basis",
            "computational-basis projectors Z0..Z{d-1}",
        ),
        (
            "family",
            "x_basis",
            "Fourier-basis projectors (X+, X- for a qubit)",
        ),
        (
            "family",
            "ic:d",
            "d^2 informationally complete rank-one projectors",
        ),
        ("family", "identity", "the single power I"),
        (
            "family",
            "a+b",
            "union of named families, e.g. z_basis+x_basis",
        ),
        (
            "observable",
            "sigma_x, sigma_y, sigma_z",
            "Pauli observables",
        ),
        ("observable", "spin:x,y,z", "spin along a unit Bloch vector"),
        ("observable", "identity:d", "identity on C^d"),
    ]
}
