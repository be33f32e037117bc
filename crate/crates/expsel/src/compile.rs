//! Lowers operator scenarios onto configuration lattices so the path-sum
//! engine can recompute their probability tables term by term.
//!
//! Each projector event becomes a lattice slice in the basis that
//! diagonalizes its projector family; the unitaries between events, composed
//! with the basis changes, become the transfer matrices; projectors become
//! sharp 0/1 selections. When the final boundary operator is a multiple of
//! the identity, everything after the last event is dropped (the trailing
//! unitaries cancel inside the trace), which keeps path counts small.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::experience::{EventKind, EvolutionSchedule, ProjectorEvent};
use crate::hilbert::{cr, orthonormalize, DensityOperator, OperatorMatrix, C64};
use crate::pathsum::{
    double_path_functional, merge_selections, minimal_probability, BoundaryCondition,
    EngineConfig, LatticeModel, SelectionEvent,
};
use crate::prescriptions::{validate_spec, PrescriptionKind, PrescriptionSpec};
use crate::table::ProbabilityTable;

/// A scenario lowered onto a lattice. Event indices refer to the event list
/// passed to [`compile`].
pub struct CompiledLattice {
    model: LatticeModel,
    boundary: BoundaryCondition,
    event_slices: Vec<Option<usize>>,
    masks: Vec<Vec<(String, Vec<f64>)>>,
}

impl CompiledLattice {
    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    pub fn boundary(&self) -> &BoundaryCondition {
        &self.boundary
    }

    /// The sharp selection realizing one labeled projector of an event, or
    /// `None` for an event that was compiled away as trivial.
    pub fn selection(&self, event_index: usize, label: &str) -> Result<Option<SelectionEvent>> {
        let Some(slice) = self.event_slices[event_index] else {
            return Ok(None);
        };
        let mask = self.masks[event_index]
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::AuxiliaryRequired { label: label.to_string() })?;
        Ok(Some(SelectionEvent::from_reals(slice, mask)))
    }

    /// The pointwise sum of all labeled masks of an event (the amplitude-level
    /// sum over its outcomes).
    pub fn summed_selection(&self, event_index: usize) -> Option<SelectionEvent> {
        let slice = self.event_slices[event_index]?;
        let len = self.masks[event_index][0].1.len();
        let mut weights = vec![0.0f64; len];
        for (_, mask) in &self.masks[event_index] {
            for (w, m) in weights.iter_mut().zip(mask.iter()) {
                *w += m;
            }
        }
        Some(SelectionEvent::from_reals(slice, &weights))
    }
}

/// Builds the lattice for a schedule and its projector events. Events may
/// share a time stamp only when a condition precedes a non-condition there.
pub fn compile(schedule: &EvolutionSchedule, events: &[&ProjectorEvent]) -> Result<CompiledLattice> {
    let d = schedule.dim();
    for ev in events {
        if ev.dim() != d {
            return Err(Error::DimensionMismatch {
                context: format!("event at time {}", ev.time()),
                expected: d,
                got: ev.dim(),
            });
        }
    }

    // Stable order: by time, conditions before experience sets.
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by_key(|&i| {
        (events[i].time(), u8::from(events[i].kind() != EventKind::Condition), i)
    });
    for pair in order.windows(2) {
        let (a, b) = (events[pair[0]], events[pair[1]]);
        if a.time() == b.time() && (a.kind() == b.kind() || a.kind() == EventKind::Experience) {
            return Err(Error::CoincidentEventTimes { time: a.time() });
        }
    }

    let mut event_slices: Vec<Option<usize>> = vec![None; events.len()];
    let mut masks: Vec<Vec<(String, Vec<f64>)>> = vec![Vec::new(); events.len()];
    let mut steps: Vec<Array2<C64>> = Vec::new();
    let mut prev_basis = OperatorMatrix::identity(d);
    let mut prev_time = schedule.t_initial();
    let mut slice_count = 1usize;

    for &idx in &order {
        let event = events[idx];
        masks[idx] = trivial_masks(event);
        if !masks[idx].is_empty() {
            continue; // identity event: no slice, no selection
        }
        let (basis, event_masks) = projector_basis(event)?;
        let u = schedule.evolve(prev_time, event.time())?;
        let step = &basis.adjoint() * &(&u * &prev_basis);
        steps.push(step.into_array());
        event_slices[idx] = Some(slice_count);
        masks[idx] = event_masks;
        slice_count += 1;
        prev_basis = basis;
        prev_time = event.time();
    }

    // Tail: fold a scalar-identity final boundary into the last event slice;
    // otherwise close with an explicit final slice in the computational basis.
    let rho_f = schedule.rho_final();
    let final_density = match rho_f.op().scalar_identity(1e-12) {
        Some(c) if steps.len() >= 1 => {
            DensityOperator::new(OperatorMatrix::identity(d).scaled(cr(c.re)))?
        }
        _ => {
            let u = schedule.evolve(prev_time, schedule.t_final())?;
            let step = &u * &prev_basis;
            steps.push(step.into_array());
            slice_count += 1;
            rho_f.clone()
        }
    };

    let labels: Vec<String> = (0..d).map(|i| i.to_string()).collect();
    let slices: Vec<Vec<String>> = vec![labels; slice_count];
    let model = LatticeModel::from_transfer_matrices(slices, steps)?;
    let boundary = BoundaryCondition::new(schedule.rho_initial().clone(), final_density);
    Ok(CompiledLattice { model, boundary, event_slices, masks })
}

/// For an event holding a single identity projector, the all-pass masks;
/// empty otherwise.
fn trivial_masks(event: &ProjectorEvent) -> Vec<(String, Vec<f64>)> {
    if event.projectors().len() == 1 {
        let (label, p) = &event.projectors()[0];
        if (p - &OperatorMatrix::identity(p.dim())).max_abs() < 1e-12 {
            return vec![(label.clone(), vec![1.0; p.dim()])];
        }
    }
    Vec::new()
}

/// Common eigenbasis of an orthogonal projector family plus 0/1 masks: the
/// columns span each projector's range in turn, then an orthonormal
/// completion of the remainder.
fn projector_basis(event: &ProjectorEvent) -> Result<(OperatorMatrix, Vec<(String, Vec<f64>)>)> {
    let d = event.dim();
    let mut columns: Vec<Array1<C64>> = Vec::with_capacity(d);
    let mut ranges: Vec<(String, usize, usize)> = Vec::new();
    for (label, p) in event.projectors() {
        let rank = p.trace().re.round() as usize;
        let start = columns.len();
        if rank > 0 {
            let p_cols: Vec<Array1<C64>> = (0..d).map(|j| p.array().column(j).to_owned()).collect();
            let mut range = orthonormalize(&p_cols, 1e-6);
            if range.len() != rank {
                return Err(Error::NotCompilable {
                    time: event.time(),
                    detail: format!(
                        "projector {label:?} has trace {rank} but its columns span {} directions",
                        range.len()
                    ),
                });
            }
            columns.append(&mut range);
        }
        ranges.push((label.clone(), start, columns.len()));
    }
    if columns.len() > d {
        return Err(Error::NotCompilable {
            time: event.time(),
            detail: "projector ranges overflow the space".into(),
        });
    }
    // Clean up cross-label drift, then complete with computational vectors.
    let mut basis = orthonormalize(&columns, 1e-6);
    if basis.len() != columns.len() {
        return Err(Error::NotCompilable {
            time: event.time(),
            detail: "projector ranges are not mutually orthogonal".into(),
        });
    }
    for k in 0..d {
        if basis.len() == d {
            break;
        }
        let mut e = Array1::<C64>::zeros(d);
        e[k] = cr(1.0);
        let extended = orthonormalize(&[basis.clone(), vec![e]].concat(), 1e-6);
        basis = extended;
    }
    if basis.len() != d {
        return Err(Error::NotCompilable {
            time: event.time(),
            detail: "could not complete the event basis".into(),
        });
    }
    let b = OperatorMatrix::from_fn(d, |i, j| basis[j][i]);
    let mut masks = Vec::with_capacity(ranges.len());
    for (label, start, end) in ranges {
        let mut mask = vec![0.0f64; d];
        for slot in mask.iter_mut().take(end).skip(start) {
            *slot = 1.0;
        }
        // The reconstruction must reproduce the projector.
        let diag =
            OperatorMatrix::diagonal(&mask.iter().map(|&m| cr(m)).collect::<Vec<_>>());
        let recon = &(&b * &diag) * &b.adjoint();
        let p = event.projector_for(&label).expect("label comes from the event");
        if !recon.approx_eq(p, 1e-8) {
            return Err(Error::NotCompilable {
                time: event.time(),
                detail: format!("basis reconstruction defect for {label:?} exceeds 1e-8"),
            });
        }
        masks.push((label, mask));
    }
    Ok((b, masks))
}

/// Evaluates a prescription through the path-sum engine: compile to a
/// lattice, realize every projector insertion as a sharp selection, run the
/// doubled sums, and normalize exactly as the operator engine does.
pub fn evaluate_on_lattice(
    schedule: &EvolutionSchedule,
    condition: &ProjectorEvent,
    spec: &PrescriptionSpec,
    cfg: &EngineConfig,
) -> Result<ProbabilityTable> {
    validate_spec(condition, spec)?;
    let aux_events: Vec<&ProjectorEvent> = match &spec.kind {
        PrescriptionKind::Minimal => Vec::new(),
        PrescriptionKind::Joint(outcomes) => outcomes.iter().map(|(e, _)| e).collect(),
        PrescriptionKind::CoherentSum(aux) | PrescriptionKind::IncoherentSum(aux) => {
            aux.iter().collect()
        }
    };
    let mut events: Vec<&ProjectorEvent> = vec![condition, &spec.designated];
    events.extend(aux_events.iter().copied());
    let compiled = compile(schedule, &events)?;

    let mut base: Vec<SelectionEvent> = Vec::new();
    let cond_label = &condition.projectors()[0].0;
    if let Some(sel) = compiled.selection(0, cond_label)? {
        base.push(sel);
    }

    match &spec.kind {
        PrescriptionKind::Minimal => {
            let experiences = designated_selections(&compiled, spec)?;
            minimal_probability(compiled.model(), compiled.boundary(), &base, &experiences, cfg)
        }
        PrescriptionKind::Joint(outcomes) => {
            for (k, (_, label)) in outcomes.iter().enumerate() {
                if let Some(sel) = compiled.selection(2 + k, label)? {
                    base.push(sel);
                }
            }
            let experiences = designated_selections(&compiled, spec)?;
            minimal_probability(compiled.model(), compiled.boundary(), &base, &experiences, cfg)
        }
        PrescriptionKind::CoherentSum(aux) => {
            for k in 0..aux.len() {
                if let Some(sel) = compiled.summed_selection(2 + k) {
                    base.push(sel);
                }
            }
            let experiences = designated_selections(&compiled, spec)?;
            minimal_probability(compiled.model(), compiled.boundary(), &base, &experiences, cfg)
        }
        PrescriptionKind::IncoherentSum(aux) => {
            // Outcome labels per auxiliary event, in document order.
            let outcome_labels: Vec<Vec<String>> = aux
                .iter()
                .map(|e| e.projectors().iter().map(|(l, _)| l.clone()).collect())
                .collect();
            let mut weights = Vec::new();
            for (label, _) in spec.designated.projectors() {
                let designated_sel = compiled.selection(1, label)?;
                let mut total = C64::new(0.0, 0.0);
                let mut tuple = vec![0usize; aux.len()];
                loop {
                    let mut sels = base.clone();
                    if let Some(s) = &designated_sel {
                        sels = merge_selections(&sels, std::slice::from_ref(s));
                    }
                    for (k, &o) in tuple.iter().enumerate() {
                        if let Some(s) = compiled.selection(2 + k, &outcome_labels[k][o])? {
                            sels = merge_selections(&sels, std::slice::from_ref(&s));
                        }
                    }
                    total += double_path_functional(
                        compiled.model(),
                        compiled.boundary(),
                        &sels,
                        cfg,
                    )?;
                    let mut k = aux.len();
                    loop {
                        if k == 0 {
                            tuple.clear();
                            break;
                        }
                        k -= 1;
                        tuple[k] += 1;
                        if tuple[k] < outcome_labels[k].len() {
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
            ProbabilityTable::from_weights(weights)
        }
    }
}

fn designated_selections(
    compiled: &CompiledLattice,
    spec: &PrescriptionSpec,
) -> Result<Vec<(String, Vec<SelectionEvent>)>> {
    let mut out = Vec::new();
    for (label, _) in spec.designated.projectors() {
        let sels = match compiled.selection(1, label)? {
            Some(s) => vec![s],
            None => Vec::new(),
        };
        out.push((label.clone(), sels));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experience::{probability_heisenberg, ScheduleStep};
    use crate::hilbert::{CompositeSpace, StateVector};
    use crate::prescriptions::compare;
    use crate::wignerfriend::{build_scenario, collapse_comparator, wigner_table};

    #[test]
    fn lattice_reproduces_a_plain_qubit_table() {
        let space = CompositeSpace::new(vec![("Q", 2)]).unwrap();
        let angle: f64 = 0.6;
        let u = OperatorMatrix::from_rows(vec![
            vec![cr(angle.cos()), cr(-angle.sin())],
            vec![cr(angle.sin()), cr(angle.cos())],
        ])
        .unwrap();
        let psi = StateVector::new(vec![cr(1.0), cr(0.0)]).unwrap();
        let schedule = EvolutionSchedule::new(
            space,
            vec![ScheduleStep::new(0, 1, u)],
            DensityOperator::from_pure(&psi).unwrap(),
            DensityOperator::identity(2),
        )
        .unwrap();
        let condition = ProjectorEvent::identity_condition(0, 2);
        let experiences = ProjectorEvent::experience(
            1,
            vec![
                ("0".into(), StateVector::basis(2, 0).projector()),
                ("1".into(), StateVector::basis(2, 1).projector()),
            ],
        )
        .unwrap();
        let operator_table = probability_heisenberg(&schedule, &condition, &experiences).unwrap();
        let lattice_table = evaluate_on_lattice(
            &schedule,
            &condition,
            &PrescriptionSpec::minimal(experiences),
            &EngineConfig::default(),
        )
        .unwrap();
        let report = compare(&operator_table, &lattice_table).unwrap();
        assert!(report.max_abs_diff < 1e-9, "diff {}", report.max_abs_diff);
    }

    #[test]
    fn lattice_reproduces_observer_tables() {
        let cfg = EngineConfig::default();
        let s = build_scenario(0.5, 0.8);
        for (t, prior) in [(1u8, 0usize), (1, 1), (2, 0), (2, 1)] {
            let operator_table = wigner_table(&s, t, prior).unwrap();
            let condition = ProjectorEvent::condition(
                i64::from(t) - 1,
                format!("memory-{prior}"),
                s.observer_projector(prior),
            )
            .unwrap();
            let experiences = ProjectorEvent::experience(
                i64::from(t),
                vec![
                    ("0".into(), s.observer_projector(0)),
                    ("1".into(), s.observer_projector(1)),
                ],
            )
            .unwrap();
            let lattice_table = evaluate_on_lattice(
                s.schedule(),
                &condition,
                &PrescriptionSpec::minimal(experiences),
                &cfg,
            )
            .unwrap();
            let report = compare(&operator_table, &lattice_table).unwrap();
            assert!(
                report.max_abs_diff < 1e-9,
                "stage {t} prior {prior}: diff {}",
                report.max_abs_diff
            );
        }
    }

    #[test]
    fn lattice_reproduces_the_comparator() {
        let cfg = EngineConfig::default();
        let s = build_scenario(0.35, 0.8);
        let (minimal_op, collapsed_op) = collapse_comparator(&s).unwrap();

        let designated = ProjectorEvent::experience(
            2,
            vec![
                ("phi".into(), s.pair_test_projector()),
                ("perp".into(), &OperatorMatrix::identity(8) - &s.pair_test_projector()),
            ],
        )
        .unwrap();
        let condition = ProjectorEvent::identity_condition(0, 8);
        let friend_basis = ProjectorEvent::experience(
            1,
            vec![
                ("0".into(), s.friend_projector(0)),
                ("1".into(), s.friend_projector(1)),
            ],
        )
        .unwrap();

        let minimal_lat = evaluate_on_lattice(
            s.schedule(),
            &condition,
            &PrescriptionSpec::minimal(designated.clone()),
            &cfg,
        )
        .unwrap();
        let collapsed_lat = evaluate_on_lattice(
            s.schedule(),
            &condition,
            &PrescriptionSpec {
                designated,
                kind: PrescriptionKind::IncoherentSum(vec![friend_basis]),
            },
            &cfg,
        )
        .unwrap();
        assert!(compare(&minimal_op, &minimal_lat).unwrap().max_abs_diff < 1e-9);
        assert!(compare(&collapsed_op, &collapsed_lat).unwrap().max_abs_diff < 1e-9);
    }

    #[test]
    fn general_final_boundary_keeps_the_tail() {
        // A non-identity final boundary must not be folded away.
        let space = CompositeSpace::new(vec![("Q", 2)]).unwrap();
        let angle: f64 = 0.4;
        let u = OperatorMatrix::from_rows(vec![
            vec![cr(angle.cos()), cr(-angle.sin())],
            vec![cr(angle.sin()), cr(angle.cos())],
        ])
        .unwrap();
        let rho_f = DensityOperator::new(OperatorMatrix::diagonal(&[cr(0.9), cr(0.1)])).unwrap();
        let psi = StateVector::new(vec![cr(0.8), cr(0.6)]).unwrap();
        let schedule = EvolutionSchedule::new(
            space,
            vec![ScheduleStep::new(0, 1, u.clone()), ScheduleStep::new(1, 2, u)],
            DensityOperator::from_pure(&psi).unwrap(),
            rho_f,
        )
        .unwrap();
        let condition = ProjectorEvent::identity_condition(0, 2);
        let experiences = ProjectorEvent::experience(
            1,
            vec![
                ("0".into(), StateVector::basis(2, 0).projector()),
                ("1".into(), StateVector::basis(2, 1).projector()),
            ],
        )
        .unwrap();
        let op = probability_heisenberg(&schedule, &condition, &experiences).unwrap();
        let lat = evaluate_on_lattice(
            &schedule,
            &condition,
            &PrescriptionSpec::minimal(experiences),
            &EngineConfig::default(),
        )
        .unwrap();
        assert!(compare(&op, &lat).unwrap().max_abs_diff < 1e-9);
    }
}
