//! Executable renderings of the candidate selection rules: minimal
//! (designated experience only), joint (fixed extra outcomes), coherent sum
//! over auxiliary outcomes (amplitude-level, provably equal to minimal for
//! complete sets), and incoherent sum over auxiliary outcomes (probability
//! level, a decohering insertion that generally differs).

use crate::error::{Error, Result};
use crate::experience::{
    probability_heisenberg, EventKind, EvolutionSchedule, ProjectorEvent,
};
use crate::hilbert::{OperatorMatrix, C64, VALIDATION_TOL};
use crate::table::ProbabilityTable;

/// Which rule to apply, together with the auxiliary data it needs.
#[derive(Debug, Clone)]
pub enum PrescriptionKind {
    /// Select only the designated experience.
    Minimal,
    /// Additionally select one fixed outcome per auxiliary event.
    Joint(Vec<(ProjectorEvent, String)>),
    /// Sum each auxiliary set inside the amplitude; requires complete sets.
    CoherentSum(Vec<ProjectorEvent>),
    /// Sum probabilities over auxiliary outcome tuples; requires complete sets.
    IncoherentSum(Vec<ProjectorEvent>),
}

impl PrescriptionKind {
    pub fn name(&self) -> &'static str {
        match self {
            PrescriptionKind::Minimal => "minimal",
            PrescriptionKind::Joint(_) => "joint",
            PrescriptionKind::CoherentSum(_) => "coherent_sum",
            PrescriptionKind::IncoherentSum(_) => "incoherent_sum",
        }
    }
}

/// The experience under consideration plus the selection rule.
#[derive(Debug, Clone)]
pub struct PrescriptionSpec {
    pub designated: ProjectorEvent,
    pub kind: PrescriptionKind,
}

impl PrescriptionSpec {
    pub fn minimal(designated: ProjectorEvent) -> Self {
        PrescriptionSpec { designated, kind: PrescriptionKind::Minimal }
    }
}

/// Divergence between two probability tables over the same labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub max_abs_diff: f64,
    /// ½ Σ |p_A − p_B|.
    pub total_variation: f64,
    pub per_label: Vec<(String, f64, f64)>,
}

/// Evaluates the designated experience's probability table under the given
/// selection rule.
pub fn evaluate(
    schedule: &EvolutionSchedule,
    condition: &ProjectorEvent,
    spec: &PrescriptionSpec,
) -> Result<ProbabilityTable> {
    match &spec.kind {
        PrescriptionKind::Minimal => probability_heisenberg(schedule, condition, &spec.designated),
        _ => {
            let weights = evaluate_weights(schedule, condition, spec)?;
            ProbabilityTable::from_weights(weights)
        }
    }
}

/// Raw (unnormalized) weights per designated label under the given rule.
pub fn evaluate_weights(
    schedule: &EvolutionSchedule,
    condition: &ProjectorEvent,
    spec: &PrescriptionSpec,
) -> Result<Vec<(String, C64)>> {
    validate_spec(condition, spec)?;

    let t0 = schedule.t_initial();
    let cond_h = schedule.heisenberg_operator(condition.single(), condition.time(), t0)?;
    let rho_f_h = schedule.heisenberg_operator(schedule.rho_final().op(), schedule.t_final(), t0)?;
    let rho_i = schedule.rho_initial().op();

    // Transported chain insertions besides the designated projector. The
    // condition sorts first at a shared stamp so it stays innermost.
    let mut fixed: Vec<(i64, u8, OperatorMatrix)> = vec![(condition.time(), 0, cond_h)];
    let weight_of = |chain_ops: &[(i64, u8, OperatorMatrix)], q_h: &OperatorMatrix, q_time: i64| {
        let mut ordered: Vec<(i64, u8, &OperatorMatrix)> =
            chain_ops.iter().map(|(t, p, op)| (*t, *p, op)).collect();
        ordered.push((q_time, 1, q_h));
        ordered.sort_by_key(|(t, p, _)| (*t, *p));
        let mut chain = OperatorMatrix::identity(schedule.dim());
        for (_, _, op) in &ordered {
            chain = *op * &chain;
        }
        (&(&(&chain * rho_i) * &chain.adjoint()) * &rho_f_h).trace()
    };

    match &spec.kind {
        PrescriptionKind::Minimal => {
            let mut weights = Vec::new();
            for (label, q) in spec.designated.projectors() {
                let q_h = schedule.heisenberg_operator(q, spec.designated.time(), t0)?;
                weights.push((label.clone(), weight_of(&fixed, &q_h, spec.designated.time())));
            }
            Ok(weights)
        }
        PrescriptionKind::Joint(outcomes) => {
            for (event, label) in outcomes {
                let chosen = event
                    .projector_for(label)
                    .ok_or_else(|| Error::AuxiliaryRequired { label: label.clone() })?;
                let op_h = schedule.heisenberg_operator(chosen, event.time(), t0)?;
                fixed.push((event.time(), 1, op_h));
            }
            let mut weights = Vec::new();
            for (label, q) in spec.designated.projectors() {
                let q_h = schedule.heisenberg_operator(q, spec.designated.time(), t0)?;
                weights.push((label.clone(), weight_of(&fixed, &q_h, spec.designated.time())));
            }
            Ok(weights)
        }
        PrescriptionKind::CoherentSum(auxiliary) => {
            // Replace each auxiliary set by the sum of its members inside the
            // amplitude; by completeness the insertion is the identity.
            for event in auxiliary {
                let mut sum = OperatorMatrix::zeros(schedule.dim());
                for (_, op) in event.projectors() {
                    let op_h = schedule.heisenberg_operator(op, event.time(), t0)?;
                    sum = &sum + &op_h;
                }
                fixed.push((event.time(), 1, sum));
            }
            let mut weights = Vec::new();
            for (label, q) in spec.designated.projectors() {
                let q_h = schedule.heisenberg_operator(q, spec.designated.time(), t0)?;
                weights.push((label.clone(), weight_of(&fixed, &q_h, spec.designated.time())));
            }
            Ok(weights)
        }
        PrescriptionKind::IncoherentSum(auxiliary) => {
            // Transported projectors per auxiliary event, then a sum of joint
            // weights over outcome tuples in lexicographic tuple order.
            let mut transported: Vec<Vec<(i64, OperatorMatrix)>> = Vec::new();
            for event in auxiliary {
                let mut ops = Vec::new();
                for (_, op) in event.projectors() {
                    ops.push((event.time(), schedule.heisenberg_operator(op, event.time(), t0)?));
                }
                transported.push(ops);
            }
            let mut weights = Vec::new();
            for (label, q) in spec.designated.projectors() {
                let q_h = schedule.heisenberg_operator(q, spec.designated.time(), t0)?;
                let mut total = C64::new(0.0, 0.0);
                let mut tuple = vec![0usize; transported.len()];
                loop {
                    let mut chain_ops = fixed.clone();
                    for (event_idx, &outcome) in tuple.iter().enumerate() {
                        let (time, op) = &transported[event_idx][outcome];
                        chain_ops.push((*time, 1, op.clone()));
                    }
                    total += weight_of(&chain_ops, &q_h, spec.designated.time());
                    // Advance the outcome tuple, last event fastest.
                    let mut k = transported.len();
                    loop {
                        if k == 0 {
                            tuple.clear();
                            break;
                        }
                        k -= 1;
                        tuple[k] += 1;
                        if tuple[k] < transported[k].len() {
                            break;
                        }
                        tuple[k] = 0;
                    }
                    if tuple.is_empty() {
                        break;
                    }
                }
                weights.push((label.clone(), total));
            }
            Ok(weights)
        }
    }
}

/// Structural checks shared by the operator and lattice evaluators.
pub(crate) fn validate_spec(condition: &ProjectorEvent, spec: &PrescriptionSpec) -> Result<()> {
    if condition.kind() != EventKind::Condition {
        return Err(Error::InvalidArgument("condition event has the wrong kind".into()));
    }
    if spec.designated.kind() != EventKind::Experience {
        return Err(Error::InvalidArgument("designated event has the wrong kind".into()));
    }
    if condition.time() > spec.designated.time() {
        return Err(Error::EventOrdering {
            detail: format!(
                "condition at {} must not follow the designated experience at {}",
                condition.time(),
                spec.designated.time()
            ),
        });
    }
    validate_auxiliary(&spec.kind, &spec.designated)
}

fn validate_auxiliary(kind: &PrescriptionKind, designated: &ProjectorEvent) -> Result<()> {
    let events: Vec<&ProjectorEvent> = match kind {
        PrescriptionKind::Minimal => Vec::new(),
        PrescriptionKind::Joint(outcomes) => {
            if outcomes.is_empty() {
                return Err(Error::InvalidArgument(
                    "joint selection needs at least one auxiliary outcome".into(),
                ));
            }
            outcomes.iter().map(|(e, _)| e).collect()
        }
        PrescriptionKind::CoherentSum(aux) | PrescriptionKind::IncoherentSum(aux) => {
            for (index, event) in aux.iter().enumerate() {
                let mut sum = OperatorMatrix::zeros(event.dim());
                for (_, op) in event.projectors() {
                    sum = &sum + op;
                }
                let defect = (&sum - &OperatorMatrix::identity(event.dim())).max_abs();
                if defect >= VALIDATION_TOL {
                    return Err(Error::IncompleteAuxiliary { index, defect });
                }
            }
            aux.iter().collect()
        }
    };
    for event in &events {
        if event.kind() != EventKind::Experience {
            return Err(Error::InvalidArgument("auxiliary events must be experience sets".into()));
        }
        if event.time() == designated.time() {
            return Err(Error::CoincidentEventTimes { time: event.time() });
        }
    }
    for (i, a) in events.iter().enumerate() {
        for b in &events[i + 1..] {
            if a.time() == b.time() {
                return Err(Error::CoincidentEventTimes { time: a.time() });
            }
        }
    }
    Ok(())
}

/// Entrywise and total-variation divergence between two tables carrying the
/// same labels in the same order.
pub fn compare(a: &ProbabilityTable, b: &ProbabilityTable) -> Result<DivergenceReport> {
    if a.len() != b.len()
        || a.entries()
            .iter()
            .zip(b.entries().iter())
            .any(|((la, _), (lb, _))| la != lb)
    {
        return Err(Error::LabelMismatch);
    }
    let mut max_abs_diff = 0.0f64;
    let mut total_variation = 0.0f64;
    let mut per_label = Vec::with_capacity(a.len());
    for ((label, pa), (_, pb)) in a.entries().iter().zip(b.entries().iter()) {
        let d = (pa - pb).abs();
        max_abs_diff = max_abs_diff.max(d);
        total_variation += d;
        per_label.push((label.clone(), *pa, *pb));
    }
    Ok(DivergenceReport { max_abs_diff, total_variation: 0.5 * total_variation, per_label })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experience::ScheduleStep;
    use crate::hilbert::{cr, embed, CompositeSpace, DensityOperator, StateVector};

    fn basis_set(space: &CompositeSpace, factor: &str, time: i64) -> ProjectorEvent {
        let p0 = OperatorMatrix::diagonal(&[cr(1.0), cr(0.0)]);
        let p1 = OperatorMatrix::diagonal(&[cr(0.0), cr(1.0)]);
        ProjectorEvent::experience(
            time,
            vec![
                ("0".into(), embed(&p0, factor, space).unwrap()),
                ("1".into(), embed(&p1, factor, space).unwrap()),
            ],
        )
        .unwrap()
    }

    fn two_qubit_setup() -> (EvolutionSchedule, ProjectorEvent) {
        let space = CompositeSpace::new(vec![("A", 2), ("B", 2)]).unwrap();
        // A rotation on factor A only; factor B idles.
        let angle: f64 = 0.7;
        let rot = OperatorMatrix::from_rows(vec![
            vec![cr(angle.cos()), cr(-angle.sin())],
            vec![cr(angle.sin()), cr(angle.cos())],
        ])
        .unwrap();
        let u = embed(&rot, "A", &space).unwrap();
        let psi = StateVector::new(vec![cr(0.5), cr(0.5), cr(0.5), cr(0.5)]).unwrap();
        let schedule = EvolutionSchedule::new(
            space.clone(),
            vec![
                ScheduleStep::new(0, 1, u.clone()),
                ScheduleStep::new(1, 2, u),
            ],
            DensityOperator::from_pure(&psi).unwrap(),
            DensityOperator::identity(4),
        )
        .unwrap();
        let condition = ProjectorEvent::identity_condition(0, 4);
        (schedule, condition)
    }

    #[test]
    fn coherent_sum_reproduces_minimal() {
        let (schedule, condition) = two_qubit_setup();
        let designated = basis_set(schedule.space(), "A", 2);
        let auxiliary = vec![basis_set(schedule.space(), "B", 1)];
        let minimal = evaluate(&schedule, &condition, &PrescriptionSpec::minimal(designated.clone()))
            .unwrap();
        let coherent = evaluate(
            &schedule,
            &condition,
            &PrescriptionSpec {
                designated,
                kind: PrescriptionKind::CoherentSum(auxiliary),
            },
        )
        .unwrap();
        let report = compare(&minimal, &coherent).unwrap();
        assert!(report.total_variation < 1e-10);
    }

    #[test]
    fn commuting_incoherent_insertions_collapse_to_minimal() {
        // The auxiliary basis lives on factor B, which idles under the
        // dynamics, so its insertions commute with everything later.
        let (schedule, condition) = two_qubit_setup();
        let designated = basis_set(schedule.space(), "A", 2);
        let auxiliary = vec![basis_set(schedule.space(), "B", 1)];
        let minimal = evaluate(&schedule, &condition, &PrescriptionSpec::minimal(designated.clone()))
            .unwrap();
        let incoherent = evaluate(
            &schedule,
            &condition,
            &PrescriptionSpec {
                designated,
                kind: PrescriptionKind::IncoherentSum(auxiliary),
            },
        )
        .unwrap();
        let report = compare(&minimal, &incoherent).unwrap();
        assert!(report.total_variation < 1e-10);
    }

    #[test]
    fn joint_weights_marginalize_to_incoherent_weights() {
        let (schedule, condition) = two_qubit_setup();
        let designated = basis_set(schedule.space(), "A", 2);
        let aux_event = basis_set(schedule.space(), "B", 1);

        let incoherent = evaluate_weights(
            &schedule,
            &condition,
            &PrescriptionSpec {
                designated: designated.clone(),
                kind: PrescriptionKind::IncoherentSum(vec![aux_event.clone()]),
            },
        )
        .unwrap();

        let mut summed: Vec<C64> = vec![C64::new(0.0, 0.0); 2];
        for outcome in ["0", "1"] {
            let joint = evaluate_weights(
                &schedule,
                &condition,
                &PrescriptionSpec {
                    designated: designated.clone(),
                    kind: PrescriptionKind::Joint(vec![(aux_event.clone(), outcome.into())]),
                },
            )
            .unwrap();
            for (i, (_, w)) in joint.iter().enumerate() {
                summed[i] += w;
            }
        }
        for ((_, w_inc), w_joint) in incoherent.iter().zip(summed.iter()) {
            assert!((w_inc - w_joint).norm() < 1e-10);
        }
    }

    #[test]
    fn incomplete_auxiliary_is_rejected_for_sums() {
        let (schedule, condition) = two_qubit_setup();
        let designated = basis_set(schedule.space(), "A", 2);
        let p0 = embed(
            &OperatorMatrix::diagonal(&[cr(1.0), cr(0.0)]),
            "B",
            schedule.space(),
        )
        .unwrap();
        let partial = ProjectorEvent::experience(1, vec![("0".into(), p0)]).unwrap();
        let r = evaluate(
            &schedule,
            &condition,
            &PrescriptionSpec {
                designated,
                kind: PrescriptionKind::IncoherentSum(vec![partial]),
            },
        );
        assert!(matches!(r, Err(Error::IncompleteAuxiliary { .. })));
    }

    #[test]
    fn coincident_auxiliary_times_are_rejected() {
        let (schedule, condition) = two_qubit_setup();
        let designated = basis_set(schedule.space(), "A", 2);
        let auxiliary = vec![basis_set(schedule.space(), "B", 2)];
        let r = evaluate(
            &schedule,
            &condition,
            &PrescriptionSpec {
                designated,
                kind: PrescriptionKind::IncoherentSum(auxiliary),
            },
        );
        assert!(matches!(r, Err(Error::CoincidentEventTimes { time: 2 })));
    }

    #[test]
    fn compare_reports_divergence() {
        let a = ProbabilityTable::from_real_weights(vec![("x".into(), 1.0), ("y".into(), 0.0)])
            .unwrap();
        let b = ProbabilityTable::from_real_weights(vec![("x".into(), 0.5), ("y".into(), 0.5)])
            .unwrap();
        let same = compare(&a, &a).unwrap();
        assert_eq!(same.max_abs_diff, 0.0);
        assert_eq!(same.total_variation, 0.0);

        let report = compare(&a, &b).unwrap();
        assert!((report.max_abs_diff - 0.5).abs() < 1e-15);
        assert!((report.total_variation - 0.5).abs() < 1e-15);

        let c = ProbabilityTable::from_real_weights(vec![("z".into(), 1.0)]).unwrap();
        assert!(matches!(compare(&a, &c), Err(Error::LabelMismatch)));
    }
}
