//! Observer-and-friend scenario builders and their closed-form probability
//! tables.
//!
//! The scenario couples a two-level system S to a friend register F through a
//! controlled copy, then couples the S⊗F pair to an outside observer register
//! W through a unitary that writes "entangled or not" into W. The observer's
//! experience basis {|0⟩_W, |1⟩_W} is parametrized by two angles against the
//! computational basis {|w⟩, |w⊥⟩}:
//!
//!   |0⟩_W = cosθ |w⟩ + e^{iφ} sinθ |w⊥⟩
//!   |1⟩_W = −e^{−iφ} sinθ |w⟩ + cosθ |w⊥⟩
//!
//! so α_0 = cosθ, β_0 = e^{iφ} sinθ, α_1 = −e^{−iφ} sinθ, β_1 = cosθ.

use crate::error::{Error, Result};
use crate::experience::{
    probability_heisenberg, EvolutionSchedule, ProjectorEvent, ScheduleStep,
};
use crate::hilbert::{cr, embed, CompositeSpace, DensityOperator, OperatorMatrix, StateVector, C64};
use crate::prescriptions::{evaluate, PrescriptionKind, PrescriptionSpec};
use crate::table::ProbabilityTable;

/// A fully built observer-and-friend scenario on S⊗F⊗W with dims (2,2,2).
#[derive(Debug, Clone)]
pub struct WignerFriendScenario {
    theta: f64,
    phi: f64,
    space: CompositeSpace,
    schedule: EvolutionSchedule,
    psi0: StateVector,
}

/// The maximally entangled pair state (|00⟩ + |11⟩)/√2 on S⊗F.
pub fn pair_state() -> StateVector {
    let r = 1.0 / 2f64.sqrt();
    StateVector::new(vec![cr(r), cr(0.0), cr(0.0), cr(r)]).unwrap()
}

/// Default orthonormal completion of the pair state within S⊗F.
pub fn default_completion() -> [StateVector; 3] {
    let r = 1.0 / 2f64.sqrt();
    [
        StateVector::new(vec![cr(0.0), cr(r), cr(r), cr(0.0)]).unwrap(),
        StateVector::new(vec![cr(0.0), cr(r), cr(-r), cr(0.0)]).unwrap(),
        StateVector::new(vec![cr(r), cr(0.0), cr(0.0), cr(-r)]).unwrap(),
    ]
}

/// The controlled copy S→F extended by the identity on W:
/// |s, f, w⟩ ↦ |s, f⊕s, w⟩.
pub fn controlled_copy() -> OperatorMatrix {
    OperatorMatrix::from_fn(8, |row, col| {
        let (s, f, w) = ((col >> 2) & 1, (col >> 1) & 1, col & 1);
        let target = (s << 2) | ((f ^ s) << 1) | w;
        if row == target {
            cr(1.0)
        } else {
            cr(0.0)
        }
    })
}

/// The observer premeasurement unitary: on the span of the pair state it
/// writes the experience basis vector |0⟩_W for |w⟩ and |1⟩_W for |w⊥⟩; on
/// the orthogonal complement of the pair state it writes the opposite pair.
pub fn observer_unitary(theta: f64, phi: f64, completion: &[StateVector; 3]) -> Result<OperatorMatrix> {
    let phi_sf = pair_state();
    let w_vec = StateVector::basis(2, 0);
    let w_perp = StateVector::basis(2, 1);
    let zero_w = observer_basis_state(theta, phi, 0);
    let one_w = observer_basis_state(theta, phi, 1);

    let mut sf_basis: Vec<&StateVector> = vec![&phi_sf];
    sf_basis.extend(completion.iter());
    for (i, a) in sf_basis.iter().enumerate() {
        if a.dim() != 4 || (a.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "completion vector {i} is not a unit vector on the pair space"
            )));
        }
        for b in &sf_basis[..i] {
            if b.inner(a).norm() > 1e-10 {
                return Err(Error::InvalidArgument(
                    "completion vectors must be orthonormal to the pair state".into(),
                ));
            }
        }
    }

    let mut v = OperatorMatrix::zeros(8);
    for (k, sf) in sf_basis.iter().enumerate() {
        let (img_w, img_wperp) = if k == 0 {
            (&zero_w, &one_w)
        } else {
            (&one_w, &zero_w)
        };
        for (src_w, img) in [(&w_vec, img_w), (&w_perp, img_wperp)] {
            let source = sf.kron(src_w);
            let image = sf.kron(img);
            let outer = OperatorMatrix::from_fn(8, |i, j| {
                image.amplitude(i) * source.amplitude(j).conj()
            });
            v = &v + &outer;
        }
    }
    Ok(v)
}

/// The observer experience basis vector |i⟩_W in (|w⟩, |w⊥⟩) coordinates.
pub fn observer_basis_state(theta: f64, phi: f64, i: usize) -> StateVector {
    let (alpha, beta) = observer_amplitudes(theta, phi, i);
    StateVector::new(vec![alpha, beta]).unwrap()
}

/// (α_i, β_i) of the parametrization.
pub fn observer_amplitudes(theta: f64, phi: f64, i: usize) -> (C64, C64) {
    assert!(i < 2, "observer basis label must be 0 or 1");
    if i == 0 {
        (cr(theta.cos()), C64::from_polar(theta.sin(), phi))
    } else {
        (-C64::from_polar(theta.sin(), -phi), cr(theta.cos()))
    }
}

/// Builds the scenario with the default completion of the pair basis.
pub fn build_scenario(theta: f64, phi: f64) -> WignerFriendScenario {
    build_scenario_with_completion(theta, phi, &default_completion())
        .expect("default completion is orthonormal")
}

/// Builds the scenario with a caller-supplied orthonormal completion. The
/// resulting tables must not depend on this choice.
pub fn build_scenario_with_completion(
    theta: f64,
    phi: f64,
    completion: &[StateVector; 3],
) -> Result<WignerFriendScenario> {
    let space = CompositeSpace::new(vec![("S", 2), ("F", 2), ("W", 2)])?;
    let u = controlled_copy();
    let v = observer_unitary(theta, phi, completion)?;
    debug_assert!(u.unitary_defect() < 1e-10);
    debug_assert!(v.unitary_defect() < 1e-10);

    let s_plus = StateVector::new(vec![cr(1.0 / 2f64.sqrt()), cr(1.0 / 2f64.sqrt())]).unwrap();
    let psi0 = s_plus.kron(&StateVector::basis(2, 0)).kron(&StateVector::basis(2, 0));
    let schedule = EvolutionSchedule::new(
        space.clone(),
        vec![ScheduleStep::new(0, 1, u), ScheduleStep::new(1, 2, v)],
        DensityOperator::from_pure(&psi0)?,
        DensityOperator::identity(8),
    )?;
    Ok(WignerFriendScenario { theta, phi, space, schedule, psi0 })
}

impl WignerFriendScenario {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn schedule(&self) -> &EvolutionSchedule {
        &self.schedule
    }

    pub fn psi0(&self) -> &StateVector {
        &self.psi0
    }

    pub fn alpha(&self, i: usize) -> C64 {
        observer_amplitudes(self.theta, self.phi, i).0
    }

    pub fn beta(&self, i: usize) -> C64 {
        observer_amplitudes(self.theta, self.phi, i).1
    }

    /// 1_SF ⊗ |i⟩⟨i|_W in the parametrized experience basis.
    pub fn observer_projector(&self, i: usize) -> OperatorMatrix {
        let ket = observer_basis_state(self.theta, self.phi, i);
        embed(&ket.projector(), "W", &self.space).expect("W factor exists")
    }

    /// 1_SW ⊗ |i⟩⟨i|_F in the computational basis of F.
    pub fn friend_projector(&self, i: usize) -> OperatorMatrix {
        let p = StateVector::basis(2, i).projector();
        embed(&p, "F", &self.space).expect("F factor exists")
    }

    /// |Φ⟩⟨Φ| ⊗ 1_W with Φ the pair state on S⊗F.
    pub fn pair_test_projector(&self) -> OperatorMatrix {
        crate::hilbert::tensor(&pair_state().projector(), &OperatorMatrix::identity(2))
    }

    fn observer_events(&self, time: i64) -> ProjectorEvent {
        ProjectorEvent::experience(
            time,
            vec![
                ("0".into(), self.observer_projector(0)),
                ("1".into(), self.observer_projector(1)),
            ],
        )
        .expect("observer basis projectors are valid")
    }

    fn friend_events(&self, time: i64) -> ProjectorEvent {
        ProjectorEvent::experience(
            time,
            vec![
                ("0".into(), self.friend_projector(0)),
                ("1".into(), self.friend_projector(1)),
            ],
        )
        .expect("friend basis projectors are valid")
    }
}

/// Observer table at stage t ∈ {1, 2}, conditioned on the most recent memory
/// of the prior experience label i: the condition is the prior-label
/// projector stamped one stage earlier.
pub fn wigner_table(scenario: &WignerFriendScenario, t: u8, prior: usize) -> Result<ProbabilityTable> {
    if !(t == 1 || t == 2) {
        return Err(Error::InvalidArgument(format!("stage must be 1 or 2, got {t}")));
    }
    if prior > 1 {
        return Err(Error::InvalidArgument(format!("prior label must be 0 or 1, got {prior}")));
    }
    let (t_cond, t_exp) = (i64::from(t) - 1, i64::from(t));
    let condition = ProjectorEvent::condition(
        t_cond,
        format!("memory-{prior}"),
        scenario.observer_projector(prior),
    )?;
    let experiences = scenario.observer_events(t_exp);
    probability_heisenberg(scenario.schedule(), &condition, &experiences)
}

/// Friend table at stage t ∈ {1, 2}. At stage 1 the condition is the friend's
/// initial register state (no prior label); at stage 2 it is the prior-label
/// projector at stage 1.
pub fn friend_table(
    scenario: &WignerFriendScenario,
    t: u8,
    prior: Option<usize>,
) -> Result<ProbabilityTable> {
    let (condition, t_exp) = match (t, prior) {
        (1, None) => {
            let cond = ProjectorEvent::condition(0, "initial-f", scenario.friend_projector(0))?;
            (cond, 1)
        }
        (2, Some(j)) if j <= 1 => {
            let cond =
                ProjectorEvent::condition(1, format!("memory-{j}"), scenario.friend_projector(j))?;
            (cond, 2)
        }
        (1, Some(_)) => {
            return Err(Error::InvalidArgument(
                "stage 1 takes no prior label; the condition is the initial register state".into(),
            ))
        }
        (2, _) => {
            return Err(Error::InvalidArgument("stage 2 needs a prior label of 0 or 1".into()))
        }
        _ => return Err(Error::InvalidArgument(format!("stage must be 1 or 2, got {t}"))),
    };
    let experiences = scenario.friend_events(t_exp);
    probability_heisenberg(scenario.schedule(), &condition, &experiences)
}

/// The smallest-selection table and the decohering-insertion table for the
/// observer's pair-test measurement, evaluated on the same scenario. The
/// first comes out (1, 0); the second (½, ½).
pub fn collapse_comparator(
    scenario: &WignerFriendScenario,
) -> Result<(ProbabilityTable, ProbabilityTable)> {
    let designated = ProjectorEvent::experience(
        2,
        vec![
            ("phi".into(), scenario.pair_test_projector()),
            (
                "perp".into(),
                &OperatorMatrix::identity(8) - &scenario.pair_test_projector(),
            ),
        ],
    )?;
    let condition = ProjectorEvent::identity_condition(0, 8);
    let minimal = evaluate(
        scenario.schedule(),
        &condition,
        &PrescriptionSpec::minimal(designated.clone()),
    )?;
    let collapsed = evaluate(
        scenario.schedule(),
        &condition,
        &PrescriptionSpec {
            designated,
            kind: PrescriptionKind::IncoherentSum(vec![scenario.friend_events(1)]),
        },
    )?;
    Ok((minimal, collapsed))
}

/// Grid sweep of observer stage-2 tables against the analytic targets
/// |α_i|², |β_i|². Rows are in row-major grid order.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub theta: f64,
    pub phi: f64,
    /// p(j|i) indexed [i][j]; None where the conditioning weight vanishes.
    pub p: [[Option<f64>; 2]; 2],
    pub alpha_sq: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub max_deviation: f64,
}

/// θ runs over `theta_steps` points on [0, π/2] (inclusive); φ over
/// `phi_steps` points on [0, 2π) (exclusive end).
pub fn sweep_grid(theta_steps: usize, phi_steps: usize) -> Result<SweepResult> {
    if theta_steps == 0 || phi_steps == 0 {
        return Err(Error::InvalidArgument("sweep needs at least one step per axis".into()));
    }
    let mut rows = Vec::with_capacity(theta_steps * phi_steps);
    let mut max_deviation = 0.0f64;
    for a in 0..theta_steps {
        let theta = if theta_steps == 1 {
            0.0
        } else {
            (a as f64) * (std::f64::consts::FRAC_PI_2) / ((theta_steps - 1) as f64)
        };
        for b in 0..phi_steps {
            let phi = (b as f64) * std::f64::consts::TAU / (phi_steps as f64);
            let scenario = build_scenario(theta, phi);
            let mut p = [[None; 2]; 2];
            let mut alpha_sq = [0.0; 2];
            for i in 0..2 {
                alpha_sq[i] = scenario.alpha(i).norm_sqr();
                match wigner_table(&scenario, 2, i) {
                    Ok(table) => {
                        let p0 = table.probability("0").unwrap();
                        let p1 = table.probability("1").unwrap();
                        p[i][0] = Some(p0);
                        p[i][1] = Some(p1);
                        let beta_sq = scenario.beta(i).norm_sqr();
                        max_deviation = max_deviation
                            .max((p0 - alpha_sq[i]).abs())
                            .max((p1 - beta_sq).abs());
                    }
                    Err(Error::ConditionUnreachable { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            rows.push(SweepRow { theta, phi, p, alpha_sq });
        }
    }
    Ok(SweepResult { rows, max_deviation })
}
