//! Brute-force discrete path-sum engine.
//!
//! A [`LatticeModel`] is a finite configuration space per time slice plus a
//! per-step complex amplitude rule (the already-exponentiated action weight;
//! any ħ or measure factor is folded into the rule by the caller). On top of
//! it this module provides exhaustive path enumeration, selected propagators,
//! the doubled configuration-pair sum with a boundary operator, and the
//! smallest-selection probability rule that normalizes doubled sums over a
//! labeled family of experience selections.
//!
//! Sums are exact finite sums — no sampling, no truncation. Enumeration is
//! refused (never silently cut short) when the path space exceeds the
//! configured cap. Partial sums are reduced in ascending partition order so
//! results are bit-identical for any worker count.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::hilbert::{C64, DensityOperator};
use crate::table::ProbabilityTable;

/// Default cap on the number of summed terms, for single and doubled sums.
pub const DEFAULT_PATH_CAP: u64 = 10_000_000;

/// Execution knobs shared by the sum routines.
#[derive(Debug, Clone, Copy)]
pub struct EngineConfig {
    /// Maximum number of summed terms. Single-path sums compare the path
    /// count against this cap; doubled sums compare the squared path count.
    pub path_cap: u64,
    /// Worker threads for partitioned sums. Results do not depend on this.
    pub workers: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { path_cap: DEFAULT_PATH_CAP, workers: 1 }
    }
}

impl EngineConfig {
    pub fn with_workers(workers: usize) -> Self {
        EngineConfig { workers: workers.max(1), ..Default::default() }
    }
}

/// A finite lattice of configurations: one labeled configuration list per
/// time slice and one complex transfer matrix per step.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    slices: Vec<Vec<String>>,
    /// steps[t][[to, from]] maps slice t to slice t+1.
    steps: Vec<Array2<C64>>,
}

impl LatticeModel {
    /// Builds the model by sampling `rule(t, from, to)` over every step and
    /// configuration pair. Errors if any amplitude is non-finite.
    pub fn from_rule(
        slices: Vec<Vec<String>>,
        mut rule: impl FnMut(usize, usize, usize) -> C64,
    ) -> Result<Self> {
        validate_slices(&slices)?;
        let mut steps = Vec::with_capacity(slices.len() - 1);
        for t in 0..slices.len() - 1 {
            let (n_from, n_to) = (slices[t].len(), slices[t + 1].len());
            let mut m = Array2::zeros((n_to, n_from));
            for from in 0..n_from {
                for to in 0..n_to {
                    let z = rule(t, from, to);
                    if !z.re.is_finite() || !z.im.is_finite() {
                        return Err(Error::NonFiniteAmplitude { step: t, from, to });
                    }
                    m[[to, from]] = z;
                }
            }
            steps.push(m);
        }
        Ok(LatticeModel { slices, steps })
    }

    /// Builds the model from explicit per-step transfer matrices, indexed
    /// `[to, from]`.
    pub fn from_transfer_matrices(slices: Vec<Vec<String>>, steps: Vec<Array2<C64>>) -> Result<Self> {
        validate_slices(&slices)?;
        if steps.len() != slices.len() - 1 {
            return Err(Error::DimensionMismatch {
                context: "transfer matrix count".into(),
                expected: slices.len() - 1,
                got: steps.len(),
            });
        }
        for (t, m) in steps.iter().enumerate() {
            if m.nrows() != slices[t + 1].len() || m.ncols() != slices[t].len() {
                return Err(Error::DimensionMismatch {
                    context: format!("transfer matrix at step {t}"),
                    expected: slices[t + 1].len() * slices[t].len(),
                    got: m.nrows() * m.ncols(),
                });
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFiniteAmplitude { step: t, from: 0, to: 0 });
            }
        }
        Ok(LatticeModel { slices, steps })
    }

    /// Number of steps T; slices run 0..=T.
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn slice_len(&self, t: usize) -> usize {
        self.slices[t].len()
    }

    pub fn slice_labels(&self, t: usize) -> &[String] {
        &self.slices[t]
    }

    pub fn transfer_matrix(&self, t: usize) -> &Array2<C64> {
        &self.steps[t]
    }

    pub fn step_amplitude(&self, t: usize, from: usize, to: usize) -> C64 {
        self.steps[t][[to, from]]
    }

    /// Product of slice sizes.
    pub fn path_count(&self) -> u128 {
        self.slices.iter().map(|s| s.len() as u128).product()
    }

    /// Ordered product of all transfer matrices: the no-selection propagator
    /// computed by matrix multiplication instead of path enumeration.
    pub fn transfer_product(&self) -> Array2<C64> {
        let mut acc = Array2::eye(self.slice_len(0));
        for m in &self.steps {
            acc = m.dot(&acc);
        }
        acc
    }
}

fn validate_slices(slices: &[Vec<String>]) -> Result<()> {
    if slices.len() < 2 {
        return Err(Error::InvalidArgument("lattice needs at least two slices (T >= 1)".into()));
    }
    for (t, s) in slices.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::InvalidArgument(format!("slice {t} has no configurations")));
        }
    }
    Ok(())
}

/// One configuration per slice, stored as indices into the slice lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    configs: Vec<usize>,
}

impl Path {
    pub fn new(configs: Vec<usize>) -> Self {
        Path { configs }
    }

    pub fn configs(&self) -> &[usize] {
        &self.configs
    }

    pub fn labels<'m>(&self, model: &'m LatticeModel) -> Vec<&'m str> {
        self.configs
            .iter()
            .enumerate()
            .map(|(t, &i)| model.slice_labels(t)[i].as_str())
            .collect()
    }
}

/// A time-stamped selection weight: one complex factor per configuration of
/// the stamped slice. The `sharp` flag records that every weight is exactly
/// 0 or 1.
#[derive(Debug, Clone)]
pub struct SelectionEvent {
    time: usize,
    weights: Vec<C64>,
    sharp: bool,
}

impl SelectionEvent {
    /// Sharp selection keeping exactly the flagged configurations.
    pub fn sharp(time: usize, keep: Vec<bool>) -> Self {
        let weights = keep
            .into_iter()
            .map(|k| if k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
            .collect();
        SelectionEvent { time, weights, sharp: true }
    }

    /// Sharp selection keeping a single configuration.
    pub fn keep_one(time: usize, index: usize, slice_len: usize) -> Self {
        SelectionEvent::sharp(time, (0..slice_len).map(|i| i == index).collect())
    }

    /// General complex weighting. The sharp flag is set iff every weight is
    /// exactly 0 or 1.
    pub fn unsharp(time: usize, weights: Vec<C64>) -> Self {
        let sharp = weights
            .iter()
            .all(|w| w.im == 0.0 && (w.re == 0.0 || w.re == 1.0));
        SelectionEvent { time, weights, sharp }
    }

    /// Real diagonal weights (e.g. 0/1 masks produced by a compiler).
    pub fn from_reals(time: usize, weights: &[f64]) -> Self {
        SelectionEvent::unsharp(time, weights.iter().map(|&w| C64::new(w, 0.0)).collect())
    }

    pub fn all_ones(time: usize, slice_len: usize) -> Self {
        SelectionEvent::sharp(time, vec![true; slice_len])
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    pub fn is_sharp(&self) -> bool {
        self.sharp
    }
}

/// Pointwise product of two selection lists; events sharing a time stamp are
/// combined by multiplying their weights.
pub fn merge_selections(a: &[SelectionEvent], b: &[SelectionEvent]) -> Vec<SelectionEvent> {
    let mut out: Vec<SelectionEvent> = a.to_vec();
    for ev in b {
        if let Some(existing) = out.iter_mut().find(|e| e.time == ev.time) {
            assert_eq!(
                existing.weights.len(),
                ev.weights.len(),
                "selection weight lengths differ at shared slice"
            );
            for (w, v) in existing.weights.iter_mut().zip(ev.weights.iter()) {
                *w *= *v;
            }
            existing.sharp = existing
                .weights
                .iter()
                .all(|w| w.im == 0.0 && (w.re == 0.0 || w.re == 1.0));
        } else {
            out.push(ev.clone());
        }
    }
    out.sort_by_key(|e| e.time);
    out
}

fn validate_selections(model: &LatticeModel, selections: &[SelectionEvent]) -> Result<()> {
    for sel in selections {
        if sel.time > model.step_count() {
            return Err(Error::InvalidArgument(format!(
                "selection at slice {} but lattice has slices 0..={}",
                sel.time,
                model.step_count()
            )));
        }
        if sel.weights.len() != model.slice_len(sel.time) {
            return Err(Error::DimensionMismatch {
                context: format!("selection weights at slice {}", sel.time),
                expected: model.slice_len(sel.time),
                got: sel.weights.len(),
            });
        }
    }
    Ok(())
}

/// Iterator over every path of the model in lexicographic order of
/// configuration indices (slice 0 most significant).
#[derive(Debug)]
pub struct Paths<'m> {
    model: &'m LatticeModel,
    next: Option<Vec<usize>>,
}

impl Iterator for Paths<'_> {
    type Item = Path;

    fn next(&mut self) -> Option<Path> {
        let current = self.next.take()?;
        let out = Path::new(current.clone());
        let mut digits = current;
        // Odometer increment, last slice fastest.
        let mut t = digits.len();
        loop {
            if t == 0 {
                self.next = None;
                break;
            }
            t -= 1;
            digits[t] += 1;
            if digits[t] < self.model.slice_len(t) {
                self.next = Some(digits);
                break;
            }
            digits[t] = 0;
        }
        Some(out)
    }
}

/// Enumerates every path exactly once, or refuses with a size report when the
/// path count exceeds the cap.
pub fn enumerate_paths<'m>(model: &'m LatticeModel, cfg: &EngineConfig) -> Result<Paths<'m>> {
    let paths = model.path_count();
    if paths > cfg.path_cap as u128 {
        return Err(Error::PathCapExceeded { paths, terms: paths, cap: cfg.path_cap });
    }
    Ok(Paths { model, next: Some(vec![0; model.step_count() + 1]) })
}

/// Product of step amplitudes along the path.
pub fn path_amplitude(model: &LatticeModel, path: &Path) -> C64 {
    assert_eq!(path.configs.len(), model.step_count() + 1, "path length mismatch");
    let mut amp = C64::new(1.0, 0.0);
    for t in 0..model.step_count() {
        amp *= model.step_amplitude(t, path.configs[t], path.configs[t + 1]);
    }
    amp
}

/// Walks every path with configs[0] fixed to `q0`, calling `f(configs, amp)`
/// with the weighted amplitude (step amplitudes times selection weights).
fn visit_paths_from(
    model: &LatticeModel,
    selections: &[SelectionEvent],
    q0: usize,
    f: &mut impl FnMut(&[usize], C64),
) {
    let t_max = model.step_count();
    let mut configs = vec![0usize; t_max + 1];
    configs[0] = q0;
    // amps[t] is the weighted amplitude of the prefix ending at slice t.
    let mut amps = vec![C64::new(1.0, 0.0); t_max + 1];
    amps[0] = selection_factor(selections, 0, q0);

    let mut t = 1;
    configs[1..].fill(0);
    loop {
        // Fill forward from slice t to the last slice.
        while t <= t_max {
            let q = configs[t];
            amps[t] = amps[t - 1]
                * model.step_amplitude(t - 1, configs[t - 1], q)
                * selection_factor(selections, t, q);
            t += 1;
        }
        f(&configs, amps[t_max]);
        // Advance the odometer over slices 1..=t_max, last slice fastest.
        let mut s = t_max;
        loop {
            configs[s] += 1;
            if configs[s] < model.slice_len(s) {
                t = s;
                break;
            }
            configs[s] = 0;
            if s == 1 {
                return;
            }
            s -= 1;
        }
    }
}

fn selection_factor(selections: &[SelectionEvent], time: usize, config: usize) -> C64 {
    let mut w = C64::new(1.0, 0.0);
    for sel in selections {
        if sel.time == time {
            w *= sel.weights[config];
        }
    }
    w
}

/// Runs `per_partition` for each slice-0 configuration on a small worker pool
/// and returns the results in partition order. Each partition is computed in
/// a fixed internal iteration order, and the caller folds the returned vector
/// sequentially, so results are bit-identical for any worker count.
fn run_partitioned<T: Send>(
    n_partitions: usize,
    workers: usize,
    per_partition: impl Fn(usize) -> T + Sync,
) -> Vec<T> {
    let workers = workers.max(1).min(n_partitions.max(1));
    if workers <= 1 {
        return (0..n_partitions).map(per_partition).collect();
    }
    let slots: Vec<std::sync::Mutex<Option<T>>> =
        (0..n_partitions).map(|_| std::sync::Mutex::new(None)).collect();
    let counter = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let p = counter.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if p >= n_partitions {
                    break;
                }
                let value = per_partition(p);
                *slots[p].lock().unwrap() = Some(value);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("partition computed"))
        .collect()
}

/// Sum over all paths of the weighted amplitude, grouped by endpoints:
/// `K[[q_T, q_0]]` holds the selected sum over paths from `q_0` to `q_T`.
/// With no selections this is the plain sum-over-paths propagator.
pub fn propagator(
    model: &LatticeModel,
    selections: &[SelectionEvent],
    cfg: &EngineConfig,
) -> Result<Array2<C64>> {
    validate_selections(model, selections)?;
    let paths = model.path_count();
    if paths > cfg.path_cap as u128 {
        return Err(Error::PathCapExceeded { paths, terms: paths, cap: cfg.path_cap });
    }
    let (n0, nt) = (model.slice_len(0), model.slice_len(model.step_count()));
    let columns = run_partitioned(n0, cfg.workers, |q0| {
        let mut col = vec![C64::new(0.0, 0.0); nt];
        visit_paths_from(model, selections, q0, &mut |configs, amp| {
            col[configs[configs.len() - 1]] += amp;
        });
        col
    });
    let mut k = Array2::zeros((nt, n0));
    for (q0, col) in columns.into_iter().enumerate() {
        for (qt, z) in col.into_iter().enumerate() {
            k[[qt, q0]] = z;
        }
    }
    Ok(k)
}

/// The doubled sum over configuration-pair paths (q, q′):
///
/// Σ amp(q) · conj(amp(q′)) · Πw(q) · Π conj(w(q′)) · ρ_I(q_0, q′_0) · ρ_F(q′_T, q_T)
///
/// Selections are applied identically to both branches. The boundary
/// operator factorizes into the initial and final members of `boundary`.
pub fn double_path_functional(
    model: &LatticeModel,
    boundary: &BoundaryCondition,
    selections: &[SelectionEvent],
    cfg: &EngineConfig,
) -> Result<C64> {
    validate_selections(model, selections)?;
    boundary.check_dims(model)?;
    let paths = model.path_count();
    let terms = paths.saturating_mul(paths);
    if terms > cfg.path_cap as u128 {
        return Err(Error::PathCapExceeded { paths, terms, cap: cfg.path_cap });
    }

    // One record per path: slice-0 config, slice-T config, weighted amplitude.
    let mut records: Vec<(usize, usize, C64)> = Vec::with_capacity(paths as usize);
    for q0 in 0..model.slice_len(0) {
        visit_paths_from(model, selections, q0, &mut |configs, amp| {
            records.push((q0, configs[configs.len() - 1], amp));
        });
    }
    // Records are sorted by slice-0 config; partition the outer branch on it.
    let mut bounds = vec![0usize; model.slice_len(0) + 1];
    for &(q0, _, _) in &records {
        bounds[q0 + 1] += 1;
    }
    for i in 0..model.slice_len(0) {
        bounds[i + 1] += bounds[i];
    }

    let rho_i = boundary.initial().op();
    let rho_f = boundary.final_op().op();
    let partials = run_partitioned(model.slice_len(0), cfg.workers, |p| {
        let mut acc = C64::new(0.0, 0.0);
        for q in &records[bounds[p]..bounds[p + 1]] {
            for q_prime in &records {
                acc += q.2
                    * q_prime.2.conj()
                    * rho_i.entry(q.0, q_prime.0)
                    * rho_f.entry(q_prime.1, q.1);
            }
        }
        acc
    });
    Ok(partials.into_iter().sum())
}

/// Boundary operator in factorized form: an initial density over slice-0
/// configurations and a final one over slice-T configurations (the identity
/// is the customary final choice).
#[derive(Debug, Clone)]
pub struct BoundaryCondition {
    initial: DensityOperator,
    final_op: DensityOperator,
}

impl BoundaryCondition {
    pub fn new(initial: DensityOperator, final_op: DensityOperator) -> Self {
        BoundaryCondition { initial, final_op }
    }

    /// Pure initial state with the identity as the final boundary.
    pub fn pure_identity(psi: &crate::hilbert::StateVector) -> Result<Self> {
        Ok(BoundaryCondition {
            initial: DensityOperator::from_pure(psi)?,
            final_op: DensityOperator::identity(psi.dim()),
        })
    }

    pub fn initial(&self) -> &DensityOperator {
        &self.initial
    }

    pub fn final_op(&self) -> &DensityOperator {
        &self.final_op
    }

    fn check_dims(&self, model: &LatticeModel) -> Result<()> {
        if self.initial.dim() != model.slice_len(0) {
            return Err(Error::DimensionMismatch {
                context: "initial boundary operator".into(),
                expected: model.slice_len(0),
                got: self.initial.dim(),
            });
        }
        let last = model.slice_len(model.step_count());
        if self.final_op.dim() != last {
            return Err(Error::DimensionMismatch {
                context: "final boundary operator".into(),
                expected: last,
                got: self.final_op.dim(),
            });
        }
        Ok(())
    }
}

/// The smallest-selection probability rule: for each labeled experience, the
/// doubled sum is evaluated with the condition and that experience's
/// selections composed (pointwise products at shared slices), and the
/// resulting weights are normalized to a probability table.
pub fn minimal_probability(
    model: &LatticeModel,
    boundary: &BoundaryCondition,
    condition: &[SelectionEvent],
    experiences: &[(String, Vec<SelectionEvent>)],
    cfg: &EngineConfig,
) -> Result<ProbabilityTable> {
    if experiences.is_empty() {
        return Err(Error::InvalidArgument("at least one experience label is required".into()));
    }
    let mut weights = Vec::with_capacity(experiences.len());
    for (label, sels) in experiences {
        let merged = merge_selections(condition, sels);
        let w = double_path_functional(model, boundary, &merged, cfg)?;
        weights.push((label.clone(), w));
    }
    ProbabilityTable::from_weights(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{cr, OperatorMatrix, StateVector};

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn two_by_two(rule: impl FnMut(usize, usize, usize) -> C64) -> LatticeModel {
        LatticeModel::from_rule(vec![labels(&["a", "b"]), labels(&["a", "b"])], rule).unwrap()
    }

    #[test]
    fn counts_paths_for_small_lattices() {
        let m = two_by_two(|_, _, _| cr(1.0));
        let cfg = EngineConfig::default();
        assert_eq!(enumerate_paths(&m, &cfg).unwrap().count(), 4);

        let m = LatticeModel::from_rule(
            vec![labels(&["0", "1"]), labels(&["0", "1", "2"]), labels(&["0", "1"])],
            |_, _, _| cr(1.0),
        )
        .unwrap();
        assert_eq!(enumerate_paths(&m, &cfg).unwrap().count(), 12);
        // Measure of path space: constant amplitude 1 sums to the path count.
        let total: C64 = enumerate_paths(&m, &cfg)
            .unwrap()
            .map(|p| path_amplitude(&m, &p))
            .sum();
        assert!((total - cr(12.0)).norm() < 1e-12);
    }

    #[test]
    fn enumeration_is_lexicographic_and_exact() {
        let m = two_by_two(|_, _, _| cr(1.0));
        let cfg = EngineConfig::default();
        let got: Vec<Vec<usize>> = enumerate_paths(&m, &cfg)
            .unwrap()
            .map(|p| p.configs().to_vec())
            .collect();
        assert_eq!(got, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn cap_refuses_with_size_report() {
        let m = LatticeModel::from_rule(
            vec![labels(&["0", "1", "2", "3"]); 4],
            |_, _, _| cr(1.0),
        )
        .unwrap();
        let cfg = EngineConfig { path_cap: 100, workers: 1 };
        match enumerate_paths(&m, &cfg) {
            Err(Error::PathCapExceeded { paths, cap, .. }) => {
                assert_eq!(paths, 256);
                assert_eq!(cap, 100);
            }
            Ok(_) => panic!("expected cap error"),
            Err(other) => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn phase_additivity_along_a_path() {
        let th1 = 0.3;
        let th2 = -1.1;
        let m = LatticeModel::from_rule(
            vec![labels(&["x"]), labels(&["x"]), labels(&["x"])],
            |t, _, _| C64::from_polar(1.0, if t == 0 { th1 } else { th2 }),
        )
        .unwrap();
        let p = Path::new(vec![0, 0, 0]);
        let amp = path_amplitude(&m, &p);
        assert!((amp - C64::from_polar(1.0, th1 + th2)).norm() < 1e-12);
    }

    #[test]
    fn amplitude_matches_transfer_entries() {
        let m = LatticeModel::from_rule(vec![labels(&["0", "1"]); 4], |t, from, to| {
            C64::new(0.1 + t as f64 + from as f64, 0.7 * to as f64 - 0.2)
        })
        .unwrap();
        let p = Path::new(vec![1, 0, 1, 1]);
        let want = m.step_amplitude(0, 1, 0) * m.step_amplitude(1, 0, 1) * m.step_amplitude(2, 1, 1);
        assert!((path_amplitude(&m, &p) - want).norm() < 1e-12);
    }

    #[test]
    fn identity_steps_give_identity_propagator() {
        let m = two_by_two(|_, from, to| if from == to { cr(1.0) } else { cr(0.0) });
        let k = propagator(&m, &[], &EngineConfig::default()).unwrap();
        assert!((k[[0, 0]] - cr(1.0)).norm() < 1e-15);
        assert!((k[[1, 1]] - cr(1.0)).norm() < 1e-15);
        assert!(k[[0, 1]].norm() < 1e-15 && k[[1, 0]].norm() < 1e-15);
    }

    #[test]
    fn propagator_equals_transfer_product() {
        let m = LatticeModel::from_rule(
            vec![labels(&["0", "1"]), labels(&["0", "1", "2"]), labels(&["0", "1"])],
            |t, from, to| C64::new(0.3 * (t + 1) as f64 - 0.2 * from as f64, 0.1 * to as f64),
        )
        .unwrap();
        let brute = propagator(&m, &[], &EngineConfig::default()).unwrap();
        let oracle = m.transfer_product();
        for (b, o) in brute.iter().zip(oracle.iter()) {
            assert!((b - o).norm() < 1e-9);
        }
    }

    #[test]
    fn sharp_selection_is_projector_insertion() {
        let m = LatticeModel::from_rule(vec![labels(&["0", "1", "2"]); 3], |t, from, to| {
            C64::new(
                (t as f64 + 1.0) * 0.2 + from as f64 * 0.1,
                to as f64 * 0.15 - 0.1,
            )
        })
        .unwrap();
        let keep = 1usize;
        let sel = SelectionEvent::keep_one(1, keep, 3);
        let brute = propagator(&m, &[sel], &EngineConfig::default()).unwrap();
        // Oracle: M_late · |q*⟩⟨q*| · M_early.
        let mut mask = Array2::<C64>::zeros((3, 3));
        mask[[keep, keep]] = cr(1.0);
        let oracle = m.transfer_matrix(1).dot(&mask).dot(m.transfer_matrix(0));
        for (b, o) in brute.iter().zip(oracle.iter()) {
            assert!((b - o).norm() < 1e-9);
        }
    }

    fn haar_ish_unitary() -> Array2<C64> {
        // A fixed 2x2 unitary with nontrivial phases.
        let c = cr(0.6);
        let s = cr(0.8);
        let ph = C64::from_polar(1.0, 0.7);
        let mut u = Array2::zeros((2, 2));
        u[[0, 0]] = c;
        u[[0, 1]] = s * ph;
        u[[1, 0]] = -s * ph.conj();
        u[[1, 1]] = c;
        u
    }

    #[test]
    fn unitary_steps_preserve_trace_of_pure_boundary() {
        let u = haar_ish_unitary();
        let m = LatticeModel::from_transfer_matrices(
            vec![labels(&["0", "1"]); 3],
            vec![u.clone(), u],
        )
        .unwrap();
        let psi = StateVector::new(vec![cr(0.6), cr(0.8)]).unwrap();
        let boundary = BoundaryCondition::pure_identity(&psi).unwrap();
        let d = double_path_functional(&m, &boundary, &[], &EngineConfig::default()).unwrap();
        assert!((d - cr(1.0)).norm() < 1e-10);
    }

    #[test]
    fn all_ones_selection_changes_nothing() {
        let m = two_by_two(|t, from, to| C64::new(0.2 * t as f64 + 0.3, 0.1 * (from + to) as f64));
        let psi = StateVector::new(vec![cr(0.6), cr(0.8)]).unwrap();
        let boundary = BoundaryCondition::pure_identity(&psi).unwrap();
        let cfg = EngineConfig::default();
        let plain = double_path_functional(&m, &boundary, &[], &cfg).unwrap();
        let ones = double_path_functional(&m, &boundary, &[SelectionEvent::all_ones(1, 2)], &cfg).unwrap();
        assert!((plain - ones).norm() < 1e-12);
    }

    #[test]
    fn doubled_sum_matches_operator_form_with_selections() {
        let m = LatticeModel::from_rule(vec![labels(&["0", "1", "2"]); 3], |t, from, to| {
            C64::new(
                0.25 + 0.15 * t as f64 - 0.1 * from as f64,
                0.2 * to as f64 - 0.15,
            )
        })
        .unwrap();
        let rho_i = DensityOperator::new(
            OperatorMatrix::from_rows(vec![
                vec![cr(0.5), C64::new(0.1, 0.05), cr(0.0)],
                vec![C64::new(0.1, -0.05), cr(0.3), cr(0.0)],
                vec![cr(0.0), cr(0.0), cr(0.2)],
            ])
            .unwrap(),
        )
        .unwrap();
        let boundary = BoundaryCondition::new(rho_i.clone(), DensityOperator::identity(3));
        let sel = SelectionEvent::sharp(1, vec![true, false, true]);
        let cfg = EngineConfig::default();
        let d = double_path_functional(&m, &boundary, &[sel.clone()], &cfg).unwrap();
        // Operator oracle: Tr[ρ_F · K_sel · ρ_I · K_sel†].
        let k = propagator(&m, &[sel], &cfg).unwrap();
        let k_dag = k.t().mapv(|z| z.conj());
        let prod = k.dot(rho_i.op().array()).dot(&k_dag);
        let tr: C64 = prod.diag().sum();
        assert!((d - tr).norm() < 1e-10);
    }

    #[test]
    fn minimal_probability_trivial_and_born_cases() {
        let cfg = EngineConfig::default();
        // Single all-ones experience normalizes to probability 1.
        let m = two_by_two(|_, from, to| if from == to { cr(1.0) } else { cr(0.0) });
        let psi = StateVector::new(vec![cr(0.6), cr(0.8)]).unwrap();
        let boundary = BoundaryCondition::pure_identity(&psi).unwrap();
        let table = minimal_probability(
            &m,
            &boundary,
            &[],
            &[("only".into(), vec![SelectionEvent::all_ones(1, 2)])],
            &cfg,
        )
        .unwrap();
        assert!((table.probability("only").unwrap() - 1.0).abs() < 1e-12);

        // Two sharp experiences partitioning a slice behind a diagonal step
        // reproduce the diagonal weights of the initial boundary.
        let phases = two_by_two(|_, from, to| {
            if from == to {
                C64::from_polar(1.0, 0.4 + from as f64)
            } else {
                cr(0.0)
            }
        });
        let rho = DensityOperator::new(
            OperatorMatrix::from_rows(vec![
                vec![cr(0.7), C64::new(0.2, 0.1)],
                vec![C64::new(0.2, -0.1), cr(0.3)],
            ])
            .unwrap(),
        )
        .unwrap();
        let boundary = BoundaryCondition::new(rho, DensityOperator::identity(2));
        let table = minimal_probability(
            &phases,
            &boundary,
            &[],
            &[
                ("a".into(), vec![SelectionEvent::keep_one(1, 0, 2)]),
                ("b".into(), vec![SelectionEvent::keep_one(1, 1, 2)]),
            ],
            &cfg,
        )
        .unwrap();
        assert!((table.probability("a").unwrap() - 0.7).abs() < 1e-12);
        assert!((table.probability("b").unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_condition_is_unreachable() {
        let m = two_by_two(|_, from, to| if from == to { cr(1.0) } else { cr(0.0) });
        let psi = StateVector::new(vec![cr(1.0), cr(0.0)]).unwrap();
        let boundary = BoundaryCondition::pure_identity(&psi).unwrap();
        let cfg = EngineConfig::default();
        // Selecting only the unoccupied configuration leaves zero weight.
        let r = minimal_probability(
            &m,
            &boundary,
            &[],
            &[("dead".into(), vec![SelectionEvent::keep_one(0, 1, 2)])],
            &cfg,
        );
        assert!(matches!(r, Err(Error::ConditionUnreachable { .. })));
    }

    #[test]
    fn unsharp_complex_weights_still_give_real_totals() {
        // With positive-semidefinite boundaries and identical selections on
        // both branches, the doubled sum stays real and nonnegative even for
        // complex weighting functions.
        let m = two_by_two(|_, _, _| cr(0.5));
        let plus = StateVector::new(vec![cr(0.6), cr(0.8)]).unwrap();
        let boundary = BoundaryCondition::pure_identity(&plus).unwrap();
        let sel = SelectionEvent::unsharp(1, vec![cr(1.0), C64::new(0.3, 0.9)]);
        let d = double_path_functional(&m, &boundary, &[sel], &EngineConfig::default()).unwrap();
        assert!(d.im.abs() < 1e-12);
        assert!(d.re >= 0.0);
    }

    #[test]
    fn merge_multiplies_shared_slices() {
        let a = vec![SelectionEvent::sharp(1, vec![true, false])];
        let b = vec![
            SelectionEvent::sharp(1, vec![true, true]),
            SelectionEvent::unsharp(0, vec![cr(0.5), cr(0.5)]),
        ];
        let merged = merge_selections(&a, &b);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].time(), 0);
        assert_eq!(merged[1].time(), 1);
        assert!(merged[1].is_sharp());
        assert_eq!(merged[1].weights()[0], cr(1.0));
        assert_eq!(merged[1].weights()[1], cr(0.0));
    }

    #[test]
    fn workers_do_not_change_results() {
        let m = LatticeModel::from_rule(vec![labels(&["0", "1", "2"]); 4], |t, from, to| {
            C64::new(
                0.21 * (t + 1) as f64 - 0.13 * from as f64,
                0.17 * to as f64 - 0.1,
            )
        })
        .unwrap();
        let psi = StateVector::new(vec![cr(1.0), cr(1.0), cr(1.0)]).unwrap();
        let boundary = BoundaryCondition::pure_identity(&psi.unit().unwrap()).unwrap();
        let base = double_path_functional(&m, &boundary, &[], &EngineConfig::default()).unwrap();
        for workers in [2, 4, 8] {
            let cfg = EngineConfig::with_workers(workers);
            let got = double_path_functional(&m, &boundary, &[], &cfg).unwrap();
            assert_eq!(base, got, "bitwise equality across worker counts");
        }
    }
}
