//! Operator engine: probabilities of experiences given conditions under
//! unitary schedules, in both the state-evolution and the
//! operator-evolution picture, with memory-encoded conditioning and chained
//! experiences.
//!
//! A [`ProjectorEvent`] stamps a validated projector family onto an abstract
//! integer time. Probabilities come from sandwiching the initial boundary
//! operator with the time-ordered projector chain and tracing against the
//! final boundary operator; the normalization constant is fixed by requiring
//! the table to sum to one.

use crate::error::{Error, Result};
use crate::hilbert::{
    validate_projector_set, CompositeSpace, DensityOperator, OperatorMatrix, StateVector,
    VALIDATION_TOL,
};
use crate::table::ProbabilityTable;

/// Role of a projector event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Enables a set of experiences; carries exactly one projector.
    Condition,
    /// The experiences themselves; carries one projector per label.
    Experience,
}

/// A time-stamped, validated set of labeled projectors.
#[derive(Debug, Clone)]
pub struct ProjectorEvent {
    time: i64,
    kind: EventKind,
    projectors: Vec<(String, OperatorMatrix)>,
    complete: bool,
}

impl ProjectorEvent {
    /// A condition event holding a single projector.
    pub fn condition(time: i64, label: impl Into<String>, op: OperatorMatrix) -> Result<Self> {
        ProjectorEvent::new(time, EventKind::Condition, vec![(label.into(), op)])
    }

    /// An experience event holding one projector per label.
    pub fn experience(time: i64, projectors: Vec<(String, OperatorMatrix)>) -> Result<Self> {
        ProjectorEvent::new(time, EventKind::Experience, projectors)
    }

    pub fn new(
        time: i64,
        kind: EventKind,
        projectors: Vec<(String, OperatorMatrix)>,
    ) -> Result<Self> {
        if kind == EventKind::Condition && projectors.len() != 1 {
            return Err(Error::InvalidProjectorSet {
                detail: format!("condition events carry exactly one projector, got {}", projectors.len()),
            });
        }
        let ops: Vec<OperatorMatrix> = projectors.iter().map(|(_, p)| p.clone()).collect();
        let check = validate_projector_set(&ops, VALIDATION_TOL)?;
        if !check.valid {
            return Err(Error::InvalidProjectorSet {
                detail: format!(
                    "set at time {time} violates projector structure (defect {:.3e})",
                    check.max_defect
                ),
            });
        }
        for (i, (label, _)) in projectors.iter().enumerate() {
            if projectors[..i].iter().any(|(other, _)| other == label) {
                return Err(Error::InvalidProjectorSet {
                    detail: format!("duplicate projector label {label:?}"),
                });
            }
        }
        Ok(ProjectorEvent { time, kind, projectors, complete: check.complete })
    }

    /// The trivial condition (identity projector).
    pub fn identity_condition(time: i64, dim: usize) -> Self {
        ProjectorEvent {
            time,
            kind: EventKind::Condition,
            projectors: vec![("any".into(), OperatorMatrix::identity(dim))],
            complete: true,
        }
    }

    pub fn time(&self) -> i64 {
        self.time
    }

    pub fn kind(&self) -> EventKind {
        self.kind
    }

    pub fn projectors(&self) -> &[(String, OperatorMatrix)] {
        &self.projectors
    }

    /// Whether the set sums to the identity.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// The sole projector of a condition event.
    pub fn single(&self) -> &OperatorMatrix {
        debug_assert_eq!(self.kind, EventKind::Condition);
        &self.projectors[0].1
    }

    pub fn projector_for(&self, label: &str) -> Option<&OperatorMatrix> {
        self.projectors.iter().find(|(l, _)| l == label).map(|(_, p)| p)
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].1.dim()
    }
}

/// One unitary step of a schedule over the interval [t_start, t_end].
#[derive(Debug, Clone)]
pub struct ScheduleStep {
    pub t_start: i64,
    pub t_end: i64,
    pub unitary: OperatorMatrix,
}

impl ScheduleStep {
    pub fn new(t_start: i64, t_end: i64, unitary: OperatorMatrix) -> Self {
        ScheduleStep { t_start, t_end, unitary }
    }
}

/// A piecewise-unitary evolution over [t_initial, t_final] with factorized
/// boundary operators. Steps must tile the interval exactly and each step
/// must be unitary within 1e-9.
#[derive(Debug, Clone)]
pub struct EvolutionSchedule {
    space: CompositeSpace,
    t_initial: i64,
    t_final: i64,
    steps: Vec<ScheduleStep>,
    rho_initial: DensityOperator,
    rho_final: DensityOperator,
}

impl EvolutionSchedule {
    pub fn new(
        space: CompositeSpace,
        steps: Vec<ScheduleStep>,
        rho_initial: DensityOperator,
        rho_final: DensityOperator,
    ) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidArgument("schedule needs at least one step".into()));
        }
        let dim = space.total_dim();
        let mut steps = steps;
        steps.sort_by_key(|s| s.t_start);
        for (i, step) in steps.iter().enumerate() {
            if step.t_end <= step.t_start {
                return Err(Error::InvalidInterval { t_a: step.t_start, t_b: step.t_end });
            }
            if step.unitary.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: format!("unitary of step {i}"),
                    expected: dim,
                    got: step.unitary.dim(),
                });
            }
            let defect = step.unitary.unitary_defect();
            if defect >= VALIDATION_TOL {
                return Err(Error::NonUnitaryStep { index: i, defect });
            }
            if i > 0 && steps[i - 1].t_end != step.t_start {
                return Err(Error::InvalidArgument(format!(
                    "steps do not tile the schedule: step {} ends at {} but step {i} starts at {}",
                    i - 1,
                    steps[i - 1].t_end,
                    step.t_start
                )));
            }
        }
        let t_initial = steps[0].t_start;
        let t_final = steps[steps.len() - 1].t_end;
        for (role, rho) in [("initial", &rho_initial), ("final", &rho_final)] {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: format!("{role} boundary operator"),
                    expected: dim,
                    got: rho.dim(),
                });
            }
        }
        Ok(EvolutionSchedule { space, t_initial, t_final, steps, rho_initial, rho_final })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn t_initial(&self) -> i64 {
        self.t_initial
    }

    pub fn t_final(&self) -> i64 {
        self.t_final
    }

    pub fn steps(&self) -> &[ScheduleStep] {
        &self.steps
    }

    pub fn rho_initial(&self) -> &DensityOperator {
        &self.rho_initial
    }

    pub fn rho_final(&self) -> &DensityOperator {
        &self.rho_final
    }

    /// Same schedule with the initial boundary operator replaced.
    pub fn with_rho_initial(&self, rho: DensityOperator) -> Result<Self> {
        EvolutionSchedule::new(self.space.clone(), self.steps.clone(), rho, self.rho_final.clone())
    }

    fn check_time(&self, t: i64) -> Result<()> {
        if t < self.t_initial || t > self.t_final {
            return Err(Error::TimeOutOfRange { t, lo: self.t_initial, hi: self.t_final });
        }
        Ok(())
    }

    /// Ordered product of the step unitaries spanning [t_a, t_b]; the result
    /// maps states at t_a to states at t_b. Identity when t_a == t_b. Both
    /// stamps must land on step boundaries.
    pub fn evolve(&self, t_a: i64, t_b: i64) -> Result<OperatorMatrix> {
        self.check_time(t_a)?;
        self.check_time(t_b)?;
        if t_a > t_b {
            return Err(Error::InvalidInterval { t_a, t_b });
        }
        let mut acc = OperatorMatrix::identity(self.dim());
        if t_a == t_b {
            return Ok(acc);
        }
        let mut cursor = t_a;
        while cursor < t_b {
            let step = self
                .steps
                .iter()
                .find(|s| s.t_start == cursor)
                .ok_or(Error::TimeNotOnStepBoundary { t: cursor })?;
            if step.t_end > t_b {
                return Err(Error::TimeNotOnStepBoundary { t: t_b });
            }
            acc = &step.unitary * &acc;
            cursor = step.t_end;
        }
        Ok(acc)
    }

    /// Transported operator U†(t, t0) · op · U(t, t0); transport runs
    /// backwards when t < t0.
    pub fn heisenberg_operator(&self, op: &OperatorMatrix, t: i64, t0: i64) -> Result<OperatorMatrix> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "operator to transport".into(),
                expected: self.dim(),
                got: op.dim(),
            });
        }
        if t >= t0 {
            let u = self.evolve(t0, t)?;
            Ok(&(&u.adjoint() * op) * &u)
        } else {
            let w = self.evolve(t, t0)?;
            Ok(&(&w * op) * &w.adjoint())
        }
    }
}

fn require_kind(event: &ProjectorEvent, kind: EventKind, role: &str) -> Result<()> {
    if event.kind() != kind {
        return Err(Error::InvalidArgument(format!("{role} event has the wrong kind")));
    }
    Ok(())
}

/// Probability table over the experience labels, computed by evolving the
/// initial boundary operator through condition and experience projectors.
///
/// The weight of label i is
/// Tr[ρ_F · U(t_F,t₁) Qᵢ U(t₁,t₁′) P U(t₁′,t_I) ρ_I (…)†],
/// normalized over i. When condition and experiences share a time stamp the
/// condition applies first.
pub fn probability_schrodinger(
    schedule: &EvolutionSchedule,
    condition: &ProjectorEvent,
    experiences: &ProjectorEvent,
) -> Result<ProbabilityTable> {
    require_kind(condition, EventKind::Condition, "condition")?;
    require_kind(experiences, EventKind::Experience, "experiences")?;
    check_event_dims(schedule, &[condition, experiences])?;
    if condition.time() > experiences.time() {
        return Err(Error::EventOrdering {
            detail: format!(
                "condition at {} must not follow experiences at {}",
                condition.time(),
                experiences.time()
            ),
        });
    }
    let u_early = schedule.evolve(schedule.t_initial(), condition.time())?;
    let u_mid = schedule.evolve(condition.time(), experiences.time())?;
    let u_late = schedule.evolve(experiences.time(), schedule.t_final())?;
    let lead = &(&u_mid * condition.single()) * &u_early;
    let rho_i = schedule.rho_initial().op();
    let rho_f = schedule.rho_final().op();
    let mut weights = Vec::with_capacity(experiences.projectors().len());
    for (label, q) in experiences.projectors() {
        let a = &(&u_late * q) * &lead;
        let w = (&(&(&a * rho_i) * &a.adjoint()) * rho_f).trace();
        weights.push((label.clone(), w));
    }
    ProbabilityTable::from_weights(weights)
}

/// Same contract as [`probability_schrodinger`], computed from transported
/// operators with reference time t_I.
pub fn probability_heisenberg(
    schedule: &EvolutionSchedule,
    condition: &ProjectorEvent,
    experiences: &ProjectorEvent,
) -> Result<ProbabilityTable> {
    require_kind(condition, EventKind::Condition, "condition")?;
    require_kind(experiences, EventKind::Experience, "experiences")?;
    check_event_dims(schedule, &[condition, experiences])?;
    if condition.time() > experiences.time() {
        return Err(Error::EventOrdering {
            detail: format!(
                "condition at {} must not follow experiences at {}",
                condition.time(),
                experiences.time()
            ),
        });
    }
    let t0 = schedule.t_initial();
    let p_h = schedule.heisenberg_operator(condition.single(), condition.time(), t0)?;
    let rho_f_h = schedule.heisenberg_operator(schedule.rho_final().op(), schedule.t_final(), t0)?;
    let rho_i = schedule.rho_initial().op();
    let mut weights = Vec::with_capacity(experiences.projectors().len());
    for (label, q) in experiences.projectors() {
        let q_h = schedule.heisenberg_operator(q, experiences.time(), t0)?;
        let chain = &q_h * &p_h;
        let w = (&(&(&chain * rho_i) * &chain.adjoint()) * &rho_f_h).trace();
        weights.push((label.clone(), w));
    }
    ProbabilityTable::from_weights(weights)
}

fn check_event_dims(schedule: &EvolutionSchedule, events: &[&ProjectorEvent]) -> Result<()> {
    for ev in events {
        if ev.dim() != schedule.dim() {
            return Err(Error::DimensionMismatch {
                context: format!("projector event at time {}", ev.time()),
                expected: schedule.dim(),
                got: ev.dim(),
            });
        }
    }
    Ok(())
}

/// The unnormalized memory-conditioned vector
/// P″(t₂′) · Q_j(t₁) · P(t₁′) |ψ⟩, all operators transported to the
/// reference time t_I. A zero vector is a legal return and signals an
/// impossible memory chain.
pub fn memory_condition(
    schedule: &EvolutionSchedule,
    psi: &StateVector,
    condition: &ProjectorEvent,
    experienced: (&ProjectorEvent, &str),
    further: &ProjectorEvent,
) -> Result<StateVector> {
    require_kind(condition, EventKind::Condition, "condition")?;
    require_kind(further, EventKind::Condition, "further condition")?;
    let (event, label) = experienced;
    require_kind(event, EventKind::Experience, "experienced")?;
    if psi.dim() != schedule.dim() {
        return Err(Error::DimensionMismatch {
            context: "memory chain state".into(),
            expected: schedule.dim(),
            got: psi.dim(),
        });
    }
    if !(condition.time() <= event.time() && event.time() <= further.time()) {
        return Err(Error::EventOrdering {
            detail: format!(
                "memory chain needs t({}) <= t({}) <= t({})",
                condition.time(),
                event.time(),
                further.time()
            ),
        });
    }
    let q = event
        .projector_for(label)
        .ok_or_else(|| Error::AuxiliaryRequired { label: label.to_string() })?;
    let t0 = schedule.t_initial();
    let p_h = schedule.heisenberg_operator(condition.single(), condition.time(), t0)?;
    let q_h = schedule.heisenberg_operator(q, event.time(), t0)?;
    let p2_h = schedule.heisenberg_operator(further.single(), further.time(), t0)?;
    Ok(p2_h.apply(&q_h.apply(&p_h.apply(psi))))
}

/// Probability table for a later experience set conditioned on an earlier
/// chain (condition, experienced outcome, further conditioning), normalized
/// over the later labels.
pub fn chained_probability(
    schedule: &EvolutionSchedule,
    prior_condition: &ProjectorEvent,
    prior_experience: (&ProjectorEvent, &str),
    further_condition: &ProjectorEvent,
    experiences: &ProjectorEvent,
) -> Result<ProbabilityTable> {
    require_kind(prior_condition, EventKind::Condition, "prior condition")?;
    require_kind(further_condition, EventKind::Condition, "further condition")?;
    require_kind(experiences, EventKind::Experience, "experiences")?;
    let (event, label) = prior_experience;
    require_kind(event, EventKind::Experience, "prior experience")?;
    check_event_dims(schedule, &[prior_condition, event, further_condition, experiences])?;
    let ordered = prior_condition.time() <= event.time()
        && event.time() <= further_condition.time()
        && further_condition.time() <= experiences.time();
    if !ordered {
        return Err(Error::EventOrdering {
            detail: "chained events must be ordered t1' <= t1 <= t2' <= t2".into(),
        });
    }
    let q_prior = event
        .projector_for(label)
        .ok_or_else(|| Error::AuxiliaryRequired { label: label.to_string() })?;
    let t0 = schedule.t_initial();
    let p_h = schedule.heisenberg_operator(prior_condition.single(), prior_condition.time(), t0)?;
    let qj_h = schedule.heisenberg_operator(q_prior, event.time(), t0)?;
    let p2_h = schedule.heisenberg_operator(further_condition.single(), further_condition.time(), t0)?;
    let rho_f_h = schedule.heisenberg_operator(schedule.rho_final().op(), schedule.t_final(), t0)?;
    let rho_i = schedule.rho_initial().op();
    let inner = &(&p2_h * &qj_h) * &p_h;
    let mut weights = Vec::with_capacity(experiences.projectors().len());
    for (label_i, q_i) in experiences.projectors() {
        let q_h = schedule.heisenberg_operator(q_i, experiences.time(), t0)?;
        let chain = &q_h * &inner;
        let w = (&(&(&chain * rho_i) * &chain.adjoint()) * &rho_f_h).trace();
        weights.push((label_i.clone(), w));
    }
    ProbabilityTable::from_weights(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::cr;

    fn qubit_space() -> CompositeSpace {
        CompositeSpace::new(vec![("Q", 2)]).unwrap()
    }

    fn plus_state() -> StateVector {
        StateVector::new(vec![cr(1.0 / 2f64.sqrt()), cr(1.0 / 2f64.sqrt())]).unwrap()
    }

    fn basis_projectors() -> Vec<(String, OperatorMatrix)> {
        vec![
            ("0".into(), OperatorMatrix::diagonal(&[cr(1.0), cr(0.0)])),
            ("1".into(), OperatorMatrix::diagonal(&[cr(0.0), cr(1.0)])),
        ]
    }

    fn identity_schedule() -> EvolutionSchedule {
        EvolutionSchedule::new(
            qubit_space(),
            vec![ScheduleStep::new(0, 1, OperatorMatrix::identity(2))],
            DensityOperator::from_pure(&plus_state()).unwrap(),
            DensityOperator::identity(2),
        )
        .unwrap()
    }

    fn rotation(angle: f64) -> OperatorMatrix {
        OperatorMatrix::from_rows(vec![
            vec![cr(angle.cos()), cr(-angle.sin())],
            vec![cr(angle.sin()), cr(angle.cos())],
        ])
        .unwrap()
    }

    #[test]
    fn evolve_composes_in_order() {
        let u = rotation(0.3);
        let v = rotation(0.9);
        let schedule = EvolutionSchedule::new(
            qubit_space(),
            vec![ScheduleStep::new(0, 1, u.clone()), ScheduleStep::new(1, 2, v.clone())],
            DensityOperator::from_pure(&plus_state()).unwrap(),
            DensityOperator::identity(2),
        )
        .unwrap();
        assert!(schedule.evolve(0, 0).unwrap().approx_eq(&OperatorMatrix::identity(2), 1e-15));
        assert!(schedule.evolve(0, 1).unwrap().approx_eq(&u, 1e-15));
        // Two steps compose as second-after-first.
        assert!(schedule.evolve(0, 2).unwrap().approx_eq(&(&v * &u), 1e-12));
        assert!(matches!(schedule.evolve(0, 3), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn schedule_rejects_gaps_and_non_unitaries() {
        let r = EvolutionSchedule::new(
            qubit_space(),
            vec![
                ScheduleStep::new(0, 1, OperatorMatrix::identity(2)),
                ScheduleStep::new(2, 3, OperatorMatrix::identity(2)),
            ],
            DensityOperator::identity(2),
            DensityOperator::identity(2),
        );
        assert!(r.is_err());

        let r = EvolutionSchedule::new(
            qubit_space(),
            vec![ScheduleStep::new(0, 1, OperatorMatrix::diagonal(&[cr(1.0), cr(0.0)]))],
            DensityOperator::identity(2),
            DensityOperator::identity(2),
        );
        assert!(matches!(r, Err(Error::NonUnitaryStep { index: 0, .. })));
    }

    #[test]
    fn heisenberg_transport_basics() {
        let schedule = EvolutionSchedule::new(
            qubit_space(),
            vec![ScheduleStep::new(0, 1, rotation(0.7))],
            DensityOperator::from_pure(&plus_state()).unwrap(),
            DensityOperator::identity(2),
        )
        .unwrap();
        let p = OperatorMatrix::diagonal(&[cr(1.0), cr(0.0)]);
        // t == t0 leaves the operator unchanged.
        assert!(schedule.heisenberg_operator(&p, 0, 0).unwrap().approx_eq(&p, 1e-15));
        // The identity is fixed for every time.
        let id = OperatorMatrix::identity(2);
        assert!(schedule.heisenberg_operator(&id, 1, 0).unwrap().approx_eq(&id, 1e-12));
        // Transport preserves projector structure.
        let moved = schedule.heisenberg_operator(&p, 1, 0).unwrap();
        let check = validate_projector_set(std::slice::from_ref(&moved), 1e-9).unwrap();
        assert!(check.valid);
        // Backward transport inverts forward transport.
        let roundtrip = schedule.heisenberg_operator(&moved, 0, 1).unwrap();
        assert!(roundtrip.approx_eq(&p, 1e-12));
    }

    #[test]
    fn born_weights_for_plus_state() {
        // Identity evolution, identity condition: the complete basis family
        // reproduces the Born weights of |+⟩, i.e. one half each.
        let schedule = identity_schedule();
        let condition = ProjectorEvent::identity_condition(0, 2);
        let experiences = ProjectorEvent::experience(1, basis_projectors()).unwrap();
        let table = probability_schrodinger(&schedule, &condition, &experiences).unwrap();
        assert!((table.probability("0").unwrap() - 0.5).abs() < 1e-12);
        assert!((table.probability("1").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_identity_experience_normalizes_to_one() {
        let schedule = identity_schedule();
        let condition = ProjectorEvent::identity_condition(0, 2);
        let experiences = ProjectorEvent::experience(
            1,
            vec![("all".into(), OperatorMatrix::identity(2))],
        )
        .unwrap();
        let table = probability_schrodinger(&schedule, &condition, &experiences).unwrap();
        assert!((table.probability("all").unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pictures_agree_on_identity_schedule() {
        let schedule = identity_schedule();
        let condition = ProjectorEvent::identity_condition(0, 2);
        let experiences = ProjectorEvent::experience(1, basis_projectors()).unwrap();
        let s = probability_schrodinger(&schedule, &condition, &experiences).unwrap();
        let h = probability_heisenberg(&schedule, &condition, &experiences).unwrap();
        for ((_, ps), (_, ph)) in s.entries().iter().zip(h.entries().iter()) {
            assert!((ps - ph).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_condition_is_unreachable() {
        let schedule = identity_schedule();
        let condition =
            ProjectorEvent::condition(0, "never", OperatorMatrix::zeros(2)).unwrap();
        let experiences = ProjectorEvent::experience(1, basis_projectors()).unwrap();
        let r = probability_schrodinger(&schedule, &condition, &experiences);
        assert!(matches!(r, Err(Error::ConditionUnreachable { .. })));
    }

    #[test]
    fn condition_must_not_follow_experiences() {
        let schedule = identity_schedule();
        let condition = ProjectorEvent::identity_condition(1, 2);
        let experiences = ProjectorEvent::experience(0, basis_projectors()).unwrap();
        assert!(matches!(
            probability_schrodinger(&schedule, &condition, &experiences),
            Err(Error::EventOrdering { .. })
        ));
    }

    #[test]
    fn memory_chain_identity_and_annihilation() {
        let schedule = identity_schedule();
        let psi = plus_state();
        let id_cond = ProjectorEvent::identity_condition(0, 2);
        let id_cond_late = ProjectorEvent::identity_condition(1, 2);
        let experiences = ProjectorEvent::experience(1, basis_projectors()).unwrap();

        // All-identity chain returns the state unchanged.
        let all_id = ProjectorEvent::experience(
            1,
            vec![("all".into(), OperatorMatrix::identity(2))],
        )
        .unwrap();
        let kept = memory_condition(&schedule, &psi, &id_cond, (&all_id, "all"), &id_cond_late)
            .unwrap();
        assert!((kept.amplitude(0) - psi.amplitude(0)).norm() < 1e-15);
        assert!((kept.amplitude(1) - psi.amplitude(1)).norm() < 1e-15);

        // An orthogonal chain annihilates the state.
        let zero_state = StateVector::basis(2, 0);
        let killed = memory_condition(
            &schedule,
            &zero_state,
            &id_cond,
            (&experiences, "1"),
            &id_cond_late,
        )
        .unwrap();
        assert!(killed.norm() < 1e-15);
    }

    #[test]
    fn trivial_chain_reduces_to_plain_probability() {
        let u = rotation(0.6);
        let schedule = EvolutionSchedule::new(
            qubit_space(),
            vec![ScheduleStep::new(0, 1, u.clone()), ScheduleStep::new(1, 2, rotation(-0.2))],
            DensityOperator::from_pure(&plus_state()).unwrap(),
            DensityOperator::identity(2),
        )
        .unwrap();
        let id0 = ProjectorEvent::identity_condition(0, 2);
        let id1 = ProjectorEvent::identity_condition(1, 2);
        let prior_all = ProjectorEvent::experience(
            0,
            vec![("all".into(), OperatorMatrix::identity(2))],
        )
        .unwrap();
        let experiences = ProjectorEvent::experience(2, basis_projectors()).unwrap();
        let chained =
            chained_probability(&schedule, &id0, (&prior_all, "all"), &id1, &experiences).unwrap();
        let plain = probability_heisenberg(&schedule, &id1, &experiences).unwrap();
        for ((_, a), (_, b)) in chained.entries().iter().zip(plain.entries().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn chained_equals_memory_substitution_when_further_is_identity() {
        let schedule = EvolutionSchedule::new(
            qubit_space(),
            vec![ScheduleStep::new(0, 1, rotation(0.9)), ScheduleStep::new(1, 2, rotation(0.4))],
            DensityOperator::from_pure(&plus_state()).unwrap(),
            DensityOperator::identity(2),
        )
        .unwrap();
        let p = ProjectorEvent::identity_condition(0, 2);
        let prior = ProjectorEvent::experience(1, basis_projectors()).unwrap();
        let p2 = ProjectorEvent::identity_condition(1, 2);
        let later = ProjectorEvent::experience(2, basis_projectors()).unwrap();

        let direct = chained_probability(&schedule, &p, (&prior, "0"), &p2, &later).unwrap();

        let psi_j = memory_condition(&schedule, &plus_state(), &p, (&prior, "0"), &p2).unwrap();
        let replaced = schedule
            .with_rho_initial(DensityOperator::from_pure(&psi_j).unwrap())
            .unwrap();
        let substituted =
            probability_heisenberg(&replaced, &ProjectorEvent::identity_condition(1, 2), &later)
                .unwrap();
        for ((_, a), (_, b)) in direct.entries().iter().zip(substituted.entries().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
