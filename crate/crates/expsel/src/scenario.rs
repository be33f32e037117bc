//! Versioned JSON scenario documents for the CLI front end.
//!
//! A document declares the labeled factor space, the boundary operators, the
//! unitary steps (explicit matrices or named gates), the projector events
//! (explicit labeled matrices or named sets), and the prescription to
//! evaluate. Complex numbers are `[re, im]` pairs. The schema is published in
//! `docs/scenario-schema.json` and pinned at version 1; every matrix is
//! validated (unitarity and projector structure at 1e-9) before any
//! computation runs.

use serde::{Deserialize, Serialize};

use crate::compile::evaluate_on_lattice;
use crate::error::{Error, Result};
use crate::experience::{EventKind, EvolutionSchedule, ProjectorEvent, ScheduleStep};
use crate::hilbert::{
    embed, tensor, CompositeSpace, DensityOperator, OperatorMatrix, StateVector, C64,
};
use crate::pathsum::EngineConfig;
use crate::prescriptions::{evaluate, PrescriptionKind, PrescriptionSpec};
use crate::table::ProbabilityTable;
use crate::wignerfriend;

/// Schema version accepted by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioDocument {
    pub version: u32,
    pub space: Vec<FactorDoc>,
    pub boundary: BoundaryDoc,
    pub steps: Vec<StepDoc>,
    pub events: Vec<EventDoc>,
    pub prescription: PrescriptionDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorDoc {
    pub label: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryDoc {
    pub rho_i: RhoDoc,
    pub rho_f: RhoDoc,
}

/// Boundary operator: the keyword `"identity"`, a pure state vector, or a
/// dense matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoDoc {
    Keyword(String),
    Pure { pure: Vec<[f64; 2]> },
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepDoc {
    pub t_a: i64,
    pub t_b: i64,
    #[serde(flatten)]
    pub gate: GateDoc,
}

/// A unitary step: an explicit matrix or a named gate (`"controlled_copy"`,
/// or `"wf_V"` with `theta`/`phi`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateDoc {
    Named {
        named: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        phi: Option<f64>,
    },
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventDoc {
    pub time: i64,
    pub kind: String,
    #[serde(flatten)]
    pub projectors: ProjectorsDoc,
}

/// Projectors of an event: explicit labeled matrices, or a named set
/// (`"basis_W"` with optional `theta`/`phi`, `"basis_F"`, `"phi_test"`).
/// Condition events pick one member of a named set with `label`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProjectorsDoc {
    Named {
        named: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        phi: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Explicit { projectors: Vec<ProjectorDoc> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectorDoc {
    pub label: String,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrescriptionDoc {
    pub kind: String,
    /// Index into `events` of the designated experience event.
    pub designated: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub auxiliary: Vec<AuxiliaryDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuxiliaryDoc {
    /// Index into `events` of an auxiliary experience event.
    pub event: usize,
    /// Chosen outcome label; required by the joint prescription.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Scenario { field: field.into(), message: message.into() }
}

impl ScenarioDocument {
    pub fn from_str(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| field_err("document", format!("not a valid scenario JSON: {e}")))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Validates every field and assembles the engine inputs.
    pub fn build(&self) -> Result<BuiltScenario> {
        if self.version != SCHEMA_VERSION {
            return Err(field_err(
                "version",
                format!("expected {SCHEMA_VERSION}, got {}", self.version),
            ));
        }
        let space = self.build_space()?;
        let dim = space.total_dim();
        let rho_i = build_rho(&self.boundary.rho_i, dim, "boundary.rho_i")?;
        let rho_f = build_rho(&self.boundary.rho_f, dim, "boundary.rho_f")?;
        let steps = self.build_steps(&space)?;
        let schedule = EvolutionSchedule::new(space, steps, rho_i, rho_f).map_err(|e| match e {
            Error::NonUnitaryStep { index, defect } => field_err(
                format!("steps[{index}]"),
                format!("step {index} is not unitary (defect {defect:.3e})"),
            ),
            Error::InvalidArgument(msg) => field_err("steps", msg),
            other => other,
        })?;
        let events = self.build_events(&schedule)?;
        let (condition, condition_index) = self.pick_condition(&schedule, &events)?;
        let prescription = self.build_prescription(&events, condition_index)?;
        Ok(BuiltScenario { schedule, events, condition, prescription_doc: prescription })
    }

    fn build_space(&self) -> Result<CompositeSpace> {
        if self.space.is_empty() {
            return Err(field_err("space", "needs at least one factor"));
        }
        for (i, f) in self.space.iter().enumerate() {
            if f.dim == 0 {
                return Err(field_err(format!("space[{i}].dim"), "must be positive"));
            }
        }
        CompositeSpace::new(self.space.iter().map(|f| (f.label.clone(), f.dim)).collect())
            .map_err(|e| field_err("space", e.to_string()))
    }

    fn build_steps(&self, space: &CompositeSpace) -> Result<Vec<ScheduleStep>> {
        if self.steps.is_empty() {
            return Err(field_err("steps", "needs at least one step"));
        }
        let mut out = Vec::with_capacity(self.steps.len());
        for (i, step) in self.steps.iter().enumerate() {
            let u = match &step.gate {
                GateDoc::Matrix { matrix } => {
                    parse_matrix(matrix, space.total_dim(), &format!("steps[{i}].matrix"))?
                }
                GateDoc::Named { named, theta, phi } => named_gate(named, *theta, *phi, space, i)?,
            };
            out.push(ScheduleStep::new(step.t_a, step.t_b, u));
        }
        Ok(out)
    }

    fn build_events(&self, schedule: &EvolutionSchedule) -> Result<Vec<ProjectorEvent>> {
        if self.events.is_empty() {
            return Err(field_err("events", "needs at least one event"));
        }
        let mut out = Vec::with_capacity(self.events.len());
        for (i, ev) in self.events.iter().enumerate() {
            let kind = match ev.kind.as_str() {
                "condition" => EventKind::Condition,
                "experience" => EventKind::Experience,
                other => {
                    return Err(field_err(
                        format!("events[{i}].kind"),
                        format!("unknown kind {other:?} (condition | experience)"),
                    ))
                }
            };
            if ev.time < schedule.t_initial() || ev.time > schedule.t_final() {
                return Err(field_err(
                    format!("events[{i}].time"),
                    format!(
                        "time {} outside the schedule range [{}, {}]",
                        ev.time,
                        schedule.t_initial(),
                        schedule.t_final()
                    ),
                ));
            }
            let projectors = build_projectors(&ev.projectors, kind, schedule, i)?;
            let event = ProjectorEvent::new(ev.time, kind, projectors)
                .map_err(|e| field_err(format!("events[{i}]"), e.to_string()))?;
            out.push(event);
        }
        Ok(out)
    }

    fn pick_condition(
        &self,
        schedule: &EvolutionSchedule,
        events: &[ProjectorEvent],
    ) -> Result<(ProjectorEvent, Option<usize>)> {
        let indices: Vec<usize> = events
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind() == EventKind::Condition)
            .map(|(i, _)| i)
            .collect();
        match indices.as_slice() {
            [] => Ok((
                ProjectorEvent::identity_condition(schedule.t_initial(), schedule.dim()),
                None,
            )),
            [i] => Ok((events[*i].clone(), Some(*i))),
            more => Err(field_err(
                "events",
                format!("at most one condition event is allowed, found {}", more.len()),
            )),
        }
    }

    fn build_prescription(
        &self,
        events: &[ProjectorEvent],
        condition_index: Option<usize>,
    ) -> Result<PrescriptionDoc> {
        let p = &self.prescription;
        match p.kind.as_str() {
            "minimal" | "joint" | "coherent_sum" | "incoherent_sum" => {}
            other => {
                return Err(field_err(
                    "prescription.kind",
                    format!(
                        "unknown kind {other:?} (minimal | joint | coherent_sum | incoherent_sum)"
                    ),
                ))
            }
        }
        let designated = events.get(p.designated).ok_or_else(|| {
            field_err(
                "prescription.designated",
                format!("event index {} out of range", p.designated),
            )
        })?;
        if designated.kind() != EventKind::Experience {
            return Err(field_err("prescription.designated", "must reference an experience event"));
        }
        for (j, aux) in p.auxiliary.iter().enumerate() {
            let event = events.get(aux.event).ok_or_else(|| {
                field_err(
                    format!("prescription.auxiliary[{j}].event"),
                    format!("event index {} out of range", aux.event),
                )
            })?;
            if event.kind() != EventKind::Experience {
                return Err(field_err(
                    format!("prescription.auxiliary[{j}].event"),
                    "must reference an experience event",
                ));
            }
            if aux.event == p.designated {
                return Err(field_err(
                    format!("prescription.auxiliary[{j}].event"),
                    "must differ from the designated event",
                ));
            }
            if Some(aux.event) == condition_index {
                return Err(field_err(
                    format!("prescription.auxiliary[{j}].event"),
                    "must not reference the condition event",
                ));
            }
            if let Some(outcome) = &aux.outcome {
                if event.projector_for(outcome).is_none() {
                    return Err(field_err(
                        format!("prescription.auxiliary[{j}].outcome"),
                        format!("label {outcome:?} does not exist in event {}", aux.event),
                    ));
                }
            }
        }
        Ok(p.clone())
    }
}

/// A validated document assembled into engine inputs.
pub struct BuiltScenario {
    pub schedule: EvolutionSchedule,
    pub events: Vec<ProjectorEvent>,
    pub condition: ProjectorEvent,
    prescription_doc: PrescriptionDoc,
}

/// Which engine evaluates a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Operator,
    Pathsum,
}

impl EngineChoice {
    pub fn name(self) -> &'static str {
        match self {
            EngineChoice::Operator => "operator",
            EngineChoice::Pathsum => "pathsum",
        }
    }
}

impl BuiltScenario {
    /// The document's own prescription.
    pub fn prescription(&self) -> Result<PrescriptionSpec> {
        let kind = self.prescription_doc.kind.clone();
        self.prescription_named(&kind)
    }

    pub fn prescription_kind(&self) -> &str {
        &self.prescription_doc.kind
    }

    /// The document's designated event under a different prescription kind,
    /// reusing the document's auxiliary references. The joint kind requires
    /// an outcome label on every auxiliary entry.
    pub fn prescription_named(&self, kind: &str) -> Result<PrescriptionSpec> {
        let designated = self.events[self.prescription_doc.designated].clone();
        let aux_events: Vec<(ProjectorEvent, Option<String>)> = self
            .prescription_doc
            .auxiliary
            .iter()
            .map(|a| (self.events[a.event].clone(), a.outcome.clone()))
            .collect();
        let kind = match kind {
            "minimal" => PrescriptionKind::Minimal,
            "joint" => {
                if aux_events.is_empty() {
                    return Err(Error::AuxiliaryRequired {
                        label: "auxiliary events with outcomes".into(),
                    });
                }
                let mut outcomes = Vec::with_capacity(aux_events.len());
                for (event, outcome) in aux_events {
                    let Some(outcome) = outcome else {
                        return Err(Error::AuxiliaryRequired { label: "outcome".into() });
                    };
                    outcomes.push((event, outcome));
                }
                PrescriptionKind::Joint(outcomes)
            }
            "coherent_sum" => {
                PrescriptionKind::CoherentSum(aux_events.into_iter().map(|(e, _)| e).collect())
            }
            "incoherent_sum" => {
                PrescriptionKind::IncoherentSum(aux_events.into_iter().map(|(e, _)| e).collect())
            }
            other => {
                return Err(Error::InvalidArgument(format!("unknown prescription kind {other:?}")))
            }
        };
        Ok(PrescriptionSpec { designated, kind })
    }

    /// Evaluates a prescription on the chosen engine.
    pub fn run(
        &self,
        spec: &PrescriptionSpec,
        engine: EngineChoice,
        cfg: &EngineConfig,
    ) -> Result<ProbabilityTable> {
        match engine {
            EngineChoice::Operator => evaluate(&self.schedule, &self.condition, spec),
            EngineChoice::Pathsum => evaluate_on_lattice(&self.schedule, &self.condition, spec, cfg),
        }
    }
}

fn parse_complex(pair: [f64; 2]) -> C64 {
    C64::new(pair[0], pair[1])
}

fn parse_matrix(rows: &[Vec<[f64; 2]>], dim: usize, field: &str) -> Result<OperatorMatrix> {
    if rows.len() != dim {
        return Err(field_err(field, format!("expected {dim} rows, got {}", rows.len())));
    }
    let mut out = Vec::with_capacity(dim);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(field_err(
                field,
                format!("row {i}: expected {dim} entries, got {}", row.len()),
            ));
        }
        out.push(row.iter().map(|&p| parse_complex(p)).collect());
    }
    OperatorMatrix::from_rows(out).map_err(|e| field_err(field, e.to_string()))
}

fn build_rho(doc: &RhoDoc, dim: usize, field: &str) -> Result<DensityOperator> {
    match doc {
        RhoDoc::Keyword(word) if word == "identity" => Ok(DensityOperator::identity(dim)),
        RhoDoc::Keyword(word) => {
            Err(field_err(field, format!("unknown keyword {word:?} (only \"identity\")")))
        }
        RhoDoc::Pure { pure } => {
            if pure.len() != dim {
                return Err(field_err(
                    field,
                    format!("pure state needs {dim} amplitudes, got {}", pure.len()),
                ));
            }
            let psi = StateVector::new(pure.iter().map(|&p| parse_complex(p)).collect())
                .map_err(|e| field_err(field, e.to_string()))?;
            DensityOperator::from_pure(&psi).map_err(|e| field_err(field, e.to_string()))
        }
        RhoDoc::Matrix { matrix } => {
            let m = parse_matrix(matrix, dim, field)?;
            DensityOperator::new(m).map_err(|e| field_err(field, e.to_string()))
        }
    }
}

fn require_wigner_space(space: &CompositeSpace, field: &str) -> Result<()> {
    let dims: Vec<usize> = space.factors().iter().map(|(_, d)| *d).collect();
    if dims != [2, 2, 2] {
        return Err(field_err(field, "this named item needs a three-factor space with dims (2, 2, 2)"));
    }
    Ok(())
}

fn named_gate(
    name: &str,
    theta: Option<f64>,
    phi: Option<f64>,
    space: &CompositeSpace,
    index: usize,
) -> Result<OperatorMatrix> {
    let field = format!("steps[{index}].named");
    match name {
        "controlled_copy" => {
            require_wigner_space(space, &field)?;
            Ok(wignerfriend::controlled_copy())
        }
        "wf_V" => {
            require_wigner_space(space, &field)?;
            let theta =
                theta.ok_or_else(|| field_err(format!("steps[{index}].theta"), "required by wf_V"))?;
            let phi =
                phi.ok_or_else(|| field_err(format!("steps[{index}].phi"), "required by wf_V"))?;
            wignerfriend::observer_unitary(theta, phi, &wignerfriend::default_completion())
                .map_err(|e| field_err(&field, e.to_string()))
        }
        other => Err(field_err(field, format!("unknown gate {other:?} (controlled_copy | wf_V)"))),
    }
}

fn named_projector_set(
    name: &str,
    theta: Option<f64>,
    phi: Option<f64>,
    schedule: &EvolutionSchedule,
    index: usize,
) -> Result<Vec<(String, OperatorMatrix)>> {
    let field = format!("events[{index}].named");
    let space = schedule.space();
    match name {
        "basis_W" => {
            require_wigner_space(space, &field)?;
            let theta = theta.unwrap_or(0.0);
            let phi = phi.unwrap_or(0.0);
            let mut out = Vec::new();
            for i in 0..2 {
                let ket = wignerfriend::observer_basis_state(theta, phi, i);
                out.push((i.to_string(), embed(&ket.projector(), "W", space)?));
            }
            Ok(out)
        }
        "basis_F" => {
            require_wigner_space(space, &field)?;
            let mut out = Vec::new();
            for i in 0..2 {
                let p = StateVector::basis(2, i).projector();
                out.push((i.to_string(), embed(&p, "F", space)?));
            }
            Ok(out)
        }
        "phi_test" => {
            require_wigner_space(space, &field)?;
            let pair = wignerfriend::pair_state().projector();
            let p_phi = tensor(&pair, &OperatorMatrix::identity(2));
            let p_perp = &OperatorMatrix::identity(8) - &p_phi;
            Ok(vec![("phi".into(), p_phi), ("perp".into(), p_perp)])
        }
        other => {
            Err(field_err(field, format!("unknown set {other:?} (basis_W | basis_F | phi_test)")))
        }
    }
}

fn build_projectors(
    doc: &ProjectorsDoc,
    kind: EventKind,
    schedule: &EvolutionSchedule,
    index: usize,
) -> Result<Vec<(String, OperatorMatrix)>> {
    match doc {
        ProjectorsDoc::Explicit { projectors } => {
            if projectors.is_empty() {
                return Err(field_err(format!("events[{index}].projectors"), "must not be empty"));
            }
            let mut out = Vec::with_capacity(projectors.len());
            for (k, p) in projectors.iter().enumerate() {
                let m = parse_matrix(
                    &p.matrix,
                    schedule.dim(),
                    &format!("events[{index}].projectors[{k}].matrix"),
                )?;
                out.push((p.label.clone(), m));
            }
            Ok(out)
        }
        ProjectorsDoc::Named { named, theta, phi, label } => {
            let full = named_projector_set(named, *theta, *phi, schedule, index)?;
            match (kind, label) {
                (EventKind::Condition, Some(wanted)) => {
                    let chosen = full.into_iter().find(|(l, _)| l == wanted).ok_or_else(|| {
                        field_err(
                            format!("events[{index}].label"),
                            format!("label {wanted:?} not in set {named:?}"),
                        )
                    })?;
                    Ok(vec![chosen])
                }
                (EventKind::Condition, None) => Err(field_err(
                    format!("events[{index}].label"),
                    "condition events must pick one member of a named set",
                )),
                (EventKind::Experience, None) => Ok(full),
                (EventKind::Experience, Some(_)) => Err(field_err(
                    format!("events[{index}].label"),
                    "experience events take the whole named set",
                )),
            }
        }
    }
}
