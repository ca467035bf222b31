//! Closed-loop rollouts of the plant under the FIR law and under its dynamic
//! controller form.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matlib::Matrix;
use crate::sysmodel::{to_dynamic, DynamicController, FirGains, StateSpaceSystem};

/// Rollouts stop once `‖x(k)‖` exceeds this multiple of `‖x(0)‖`.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

/// States `x(0..=K)`, inputs and outputs `u(0..K)`, `y(0..K)`.
///
/// A diverged rollout is truncated: `diverged_at = Some(k)` means `x(k)` is
/// the last stored state and the first one past the guard.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
    pub diverged_at: Option<usize>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds at least x(0)")
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn check_start(sys: &StateSpaceSystem, x0: &[f64], steps: usize) -> Result<()> {
    if x0.len() != sys.states() {
        return Err(Error::Dimension(format!("x0 has length {}, plant has {} states", x0.len(), sys.states())));
    }
    if steps == 0 {
        return Err(Error::Precondition("at least one step is required".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state"));
    }
    Ok(())
}

/// Shared recursion: `u(k) = D y(k) + E ξ(k)`, `ξ(k+1) = H ξ(k) + G y(k)`.
fn rollout(sys: &StateSpaceSystem, ctl: &DynamicController, x0: &[f64], xi0: &[f64], steps: usize) -> Trajectory {
    let guard = DIVERGENCE_FACTOR * norm(x0);
    let mut x = x0.to_vec();
    let mut xi = xi0.to_vec();
    let mut traj = Trajectory {
        states: vec![x.clone()],
        inputs: Vec::with_capacity(steps),
        outputs: Vec::with_capacity(steps),
        diverged_at: None,
    };
    for k in 0..steps {
        let y = sys.c().mul_vec(&x);
        let u = add(&ctl.d().mul_vec(&y), &ctl.e().mul_vec(&xi));
        xi = add(&ctl.h().mul_vec(&xi), &ctl.g().mul_vec(&y));
        x = add(&sys.a().mul_vec(&x), &sys.b().mul_vec(&u));
        traj.outputs.push(y);
        traj.inputs.push(u);
        let nx = norm(&x);
        traj.states.push(x.clone());
        if nx > guard || !nx.is_finite() {
            traj.diverged_at = Some(k + 1);
            break;
        }
    }
    traj
}

/// Plant in closed loop with `u(k) = Σ Fᵢ y(k-i)`; outputs before time zero
/// are zero.
pub fn simulate_fir(sys: &StateSpaceSystem, f: &FirGains, x0: &[f64], steps: usize) -> Result<Trajectory> {
    check_start(sys, x0, steps)?;
    if f.inputs() != sys.inputs() || f.outputs() != sys.outputs() {
        return Err(Error::Dimension(format!(
            "gains are {}x{}, plant needs {}x{}",
            f.inputs(),
            f.outputs(),
            sys.inputs(),
            sys.outputs()
        )));
    }
    let ctl = to_dynamic(f);
    Ok(rollout(sys, &ctl, x0, &vec![0.0; ctl.controller_states()], steps))
}

pub fn simulate_dynamic(
    sys: &StateSpaceSystem,
    ctl: &DynamicController,
    x0: &[f64],
    xi0: &[f64],
    steps: usize,
) -> Result<Trajectory> {
    check_start(sys, x0, steps)?;
    if ctl.inputs() != sys.inputs() || ctl.outputs() != sys.outputs() {
        return Err(Error::Dimension(format!(
            "controller maps {} outputs to {} inputs, plant has {} outputs and {} inputs",
            ctl.outputs(),
            ctl.inputs(),
            sys.outputs(),
            sys.inputs()
        )));
    }
    if xi0.len() != ctl.controller_states() {
        return Err(Error::Dimension(format!(
            "controller state has length {}, expected {}",
            xi0.len(),
            ctl.controller_states()
        )));
    }
    Ok(rollout(sys, ctl, x0, xi0, steps))
}

/// Rollout of `x(k+1) = Φ x(k)`; inputs and outputs are empty vectors.
pub fn simulate_autonomous(phi: &Matrix, x0: &[f64], steps: usize) -> Result<Trajectory> {
    if !phi.is_square() || phi.rows() != x0.len() {
        return Err(Error::Dimension(format!("Φ is {:?}, x0 has length {}", phi.shape(), x0.len())));
    }
    let guard = DIVERGENCE_FACTOR * norm(x0);
    let mut traj = Trajectory { states: vec![x0.to_vec()], inputs: Vec::new(), outputs: Vec::new(), diverged_at: None };
    let mut x = x0.to_vec();
    for k in 0..steps {
        x = phi.mul_vec(&x);
        traj.inputs.push(Vec::new());
        traj.outputs.push(Vec::new());
        let nx = norm(&x);
        traj.states.push(x.clone());
        if nx > guard || !nx.is_finite() {
            traj.diverged_at = Some(k + 1);
            break;
        }
    }
    Ok(traj)
}

/// `‖x(K)‖ ≤ ratio·‖x(0)‖`; diverged trajectories fail.
pub fn decay_check(t: &Trajectory, ratio_threshold: f64) -> bool {
    if t.is_diverged() {
        return false;
    }
    norm(t.final_state()) <= ratio_threshold * norm(&t.states[0])
}

/// Standard-normal initial states from a seeded stream.
pub fn random_initial_states(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).collect()
}

/// [`decay_check`] of the FIR loop from `trials` random initial states.
pub fn random_decay_check(
    sys: &StateSpaceSystem,
    f: &FirGains,
    trials: usize,
    steps: usize,
    ratio_threshold: f64,
    seed: u64,
) -> Result<bool> {
    for x0 in random_initial_states(sys.states(), trials, seed) {
        if !decay_check(&simulate_fir(sys, f, &x0, steps)?, ratio_threshold) {
            return Ok(false);
        }
    }
    Ok(true)
}
