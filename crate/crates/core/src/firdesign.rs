//! Non-convex FIR synthesis by spectral-radius minimization with multi-start
//! and order warm starts, and rectangular-window FIR approximation of stable
//! dynamic controllers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lmi::lyapunov_verify;
use crate::matlib::{singular_values, spectral_radius, spectral_radius_undeflated, Matrix};
use crate::sim::random_decay_check;
use crate::sysmodel::{closed_loop, DynamicController, FirGains, StateSpaceSystem};

/// Allowed increase of the best spectral radius from one order to the next.
pub const TAU_MONO: f64 = 1e-9;
/// Pattern-search step size at which a run is considered converged.
pub const STEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Compass pattern search with randomly rotated fallback polls.
    DirectSearch,
    /// `(5 + 10)` evolution strategy with self-adaptive step size.
    Evolutionary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub runs_per_order: usize,
    /// `None` means `20000 ×` the number of gain entries.
    pub max_evals_per_run: Option<usize>,
    /// Standard deviation of random initial gains.
    pub init_scale: f64,
    pub seed: u64,
    /// A design counts as stabilizing when `ρ < 1 - stability_margin`.
    pub stability_margin: f64,
    pub method: Method,
    /// Worker threads for parallel runs; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            runs_per_order: 10,
            max_evals_per_run: None,
            init_scale: 1.0,
            seed: 0,
            stability_margin: 0.0,
            method: Method::DirectSearch,
            workers: None,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.runs_per_order == 0 || self.max_evals_per_run == Some(0) {
            return Err(Error::Precondition("runs and evaluation budget must be positive".into()));
        }
        if !(self.init_scale > 0.0) || !(self.stability_margin >= 0.0) {
            return Err(Error::Precondition("init_scale must be positive and the margin nonnegative".into()));
        }
        Ok(())
    }

    fn budget(&self, dimension: usize) -> usize {
        self.max_evals_per_run.unwrap_or(20_000 * dimension.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOutcome {
    pub order: usize,
    pub best_gains: FirGains,
    pub best_rho: f64,
    pub per_run_rhos: Vec<f64>,
    pub median_rho: f64,
    pub evals_used: usize,
}

impl DesignOutcome {
    pub fn worst_rho(&self) -> f64 {
        self.per_run_rhos.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_stabilizing(&self, margin: f64) -> bool {
        self.best_rho < 1.0 - margin
    }
}

/// Spectral radius of the closed loop for a flattened gain vector
/// (`F₀` first, each gain row-major).
pub fn objective(sys: &StateSpaceSystem, order: usize, gains: &[f64]) -> Result<f64> {
    let f = FirGains::from_vector(order, sys.inputs(), sys.outputs(), gains)?;
    spectral_radius(&closed_loop(sys, &f)?)
}

struct Evaluator<'a> {
    sys: &'a StateSpaceSystem,
    order: usize,
    evals: usize,
    budget: usize,
}

impl Evaluator<'_> {
    fn exhausted(&self) -> bool {
        self.evals >= self.budget
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        FirGains::from_vector(self.order, self.sys.inputs(), self.sys.outputs(), x)
            .and_then(|f| closed_loop(self.sys, &f))
            .and_then(|phi| spectral_radius_undeflated(&phi))
            .unwrap_or(f64::INFINITY)
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random orthonormal basis via Gram–Schmidt on Gaussian vectors.
fn random_basis(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Polls `x ± Δ·d` for each direction; returns the first improvement.
fn poll(ev: &mut Evaluator, x: &[f64], fx: f64, step: f64, dirs: &[Vec<f64>]) -> Option<(Vec<f64>, f64)> {
    for d in dirs {
        for sign in [1.0, -1.0] {
            if ev.exhausted() {
                return None;
            }
            let y: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + sign * step * di).collect();
            let fy = ev.eval(&y);
            if fy < fx {
                return Some((y, fy));
            }
        }
    }
    None
}

fn direct_search(ev: &mut Evaluator, x0: Vec<f64>, init_step: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let d = x0.len();
    let compass: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut fx = ev.eval(&x0);
    let mut x = x0;
    let mut step = init_step;
    while step > STEP_TOL && !ev.exhausted() {
        let found = poll(ev, &x, fx, step, &compass).or_else(|| {
            let rotated = random_basis(d, rng);
            poll(ev, &x, fx, step, &rotated)
        });
        match found {
            Some((y, fy)) => {
                x = y;
                fx = fy;
                step *= 2.0;
            }
            None => step *= 0.5,
        }
    }
    (x, fx)
}

fn evolution_strategy(ev: &mut Evaluator, x0: Vec<f64>, init_step: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    const MU: usize = 5;
    const LAMBDA: usize = 10;
    let d = x0.len();
    let tau = 1.0 / (2.0 * d as f64).sqrt();
    let mut parents: Vec<(Vec<f64>, f64, f64)> = Vec::with_capacity(MU + LAMBDA);
    let f0 = ev.eval(&x0);
    parents.push((x0.clone(), init_step, f0));
    while parents.len() < MU && !ev.exhausted() {
        let y: Vec<f64> = x0.iter().map(|xi| xi + init_step * gaussian(rng)).collect();
        let fy = ev.eval(&y);
        parents.push((y, init_step, fy));
    }
    while !ev.exhausted() && parents.iter().any(|p| p.1 > STEP_TOL) {
        let mut pool = parents.clone();
        for _ in 0..LAMBDA {
            if ev.exhausted() {
                break;
            }
            let (px, ps, _) = &parents[rng.random_range(0..parents.len())];
            let s = ps * (tau * gaussian(rng)).exp();
            let y: Vec<f64> = px.iter().map(|xi| xi + s * gaussian(rng)).collect();
            let fy = ev.eval(&y);
            pool.push((y, s, fy));
        }
        // Stable sort keeps earlier (parent) entries first on ties.
        pool.sort_by(|a, b| a.2.total_cmp(&b.2));
        pool.truncate(MU);
        parents = pool;
    }
    let best = parents.into_iter().next().expect("population is nonempty");
    (best.0, best.2)
}

fn run_stream(seed: u64, order: usize, run: usize) -> ChaCha8Rng {
    let mut h = seed ^ 0x243F_6A88_85A3_08D3;
    for v in [order as u64, run as u64] {
        h = (h ^ v).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        h ^= h >> 31;
    }
    ChaCha8Rng::seed_from_u64(h)
}

struct RunResult {
    x: Vec<f64>,
    rho: f64,
    evals: usize,
}

fn single_run(
    sys: &StateSpaceSystem,
    order: usize,
    cfg: &OptimizerConfig,
    warm: Option<&[f64]>,
    run: usize,
) -> RunResult {
    let dim = sys.inputs() * sys.outputs() * (order + 1);
    let mut rng = run_stream(cfg.seed, order, run);
    let perturbed_runs = cfg.runs_per_order.saturating_sub(1) / 2;
    let start: Vec<f64> = match warm {
        Some(w) if run == 0 => w.to_vec(),
        Some(w) if run <= perturbed_runs => w.iter().map(|wi| wi + 0.1 * cfg.init_scale * gaussian(&mut rng)).collect(),
        _ => (0..dim).map(|_| cfg.init_scale * gaussian(&mut rng)).collect(),
    };
    let mut ev = Evaluator { sys, order, evals: 0, budget: cfg.budget(dim) };
    let init_step = 0.5 * cfg.init_scale;
    let (x, _) = match cfg.method {
        Method::DirectSearch => direct_search(&mut ev, start, init_step, &mut rng),
        Method::Evolutionary => evolution_strategy(&mut ev, start, init_step, &mut rng),
    };
    let rho = objective(sys, order, &x).unwrap_or(f64::INFINITY);
    RunResult { x, rho, evals: ev.evals }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs `cfg.runs_per_order` independent local searches at one order.
///
/// With a warm start of order `ℓ - 1`, run 0 starts from the zero-padded warm
/// gains, the next half of the runs from perturbations of it, and the rest
/// from fresh random points.
pub fn optimize_order(
    sys: &StateSpaceSystem,
    order: usize,
    cfg: &OptimizerConfig,
    warm: Option<&FirGains>,
) -> Result<DesignOutcome> {
    cfg.validate()?;
    let warm_vec = match warm {
        Some(w) => {
            if w.order() + 1 != order || w.inputs() != sys.inputs() || w.outputs() != sys.outputs() {
                return Err(Error::Precondition(format!(
                    "warm start of order {} ({}x{}) does not fit order {order} on a {}x{} plant",
                    w.order(),
                    w.inputs(),
                    w.outputs(),
                    sys.inputs(),
                    sys.outputs()
                )));
            }
            Some(w.padded().to_vector())
        }
        None => None,
    };
    let results: Vec<RunResult> = with_workers(cfg.workers, || {
        (0..cfg.runs_per_order)
            .into_par_iter()
            .map(|run| single_run(sys, order, cfg, warm_vec.as_deref(), run))
            .collect()
    })?;

    let per_run_rhos: Vec<f64> = results.iter().map(|r| r.rho).collect();
    let best_idx = per_run_rhos
        .iter()
        .enumerate()
        .fold(0, |best, (i, r)| if r.total_cmp(&per_run_rhos[best]).is_lt() { i } else { best });
    let best_gains = FirGains::from_vector(order, sys.inputs(), sys.outputs(), &results[best_idx].x)?;
    let best_rho = spectral_radius(&closed_loop(sys, &best_gains)?)?;
    Ok(DesignOutcome {
        order,
        best_gains,
        best_rho,
        median_rho: median(&per_run_rhos),
        per_run_rhos,
        evals_used: results.iter().map(|r| r.evals).sum(),
    })
}

/// Optimizes orders `0..=max_order` in sequence, warm-starting each order
/// from the previous order's best gains.
pub fn order_sweep(sys: &StateSpaceSystem, max_order: usize, cfg: &OptimizerConfig) -> Result<Vec<DesignOutcome>> {
    let mut out: Vec<DesignOutcome> = Vec::with_capacity(max_order + 1);
    for order in 0..=max_order {
        let warm = out.last().map(|o| &o.best_gains);
        out.push(optimize_order(sys, order, cfg, warm)?);
    }
    Ok(out)
}

/// `best_rho(ℓ + 1) ≤ best_rho(ℓ) + TAU_MONO` along a sweep.
pub fn is_monotone(sweep: &[DesignOutcome]) -> bool {
    sweep.windows(2).all(|w| w[1].best_rho <= w[0].best_rho + TAU_MONO)
}

fn require_schur(ctl: &DynamicController) -> Result<()> {
    if ctl.controller_states() > 0 {
        let rho = spectral_radius(ctl.h())?;
        if rho >= 1.0 {
            return Err(Error::Precondition(format!("controller state matrix is not Schur (ρ = {rho})")));
        }
    }
    Ok(())
}

/// Rectangular-window truncation: `F₀ = D`, `Fᵢ = E Hⁱ⁻¹ G`.
pub fn fir_approximate(ctl: &DynamicController, order: usize) -> Result<FirGains> {
    require_schur(ctl)?;
    let mut gains = Vec::with_capacity(order + 1);
    gains.push(ctl.d().clone());
    let mut hg = ctl.g().clone();
    for _ in 1..=order {
        gains.push(ctl.e().try_mul(&hg)?);
        hg = ctl.h().try_mul(&hg)?;
    }
    FirGains::new(gains)
}

fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        singular_values(m)[0]
    }
}

const TAIL_MAX_TERMS: usize = 1_000_000;

/// Upper bound on `Σ_{i ≥ ℓ} ‖E Hⁱ G‖₂`, the weight of the impulse response
/// discarded by truncating at order `ℓ`.
///
/// Terms are summed from `i = 0` until a geometric bound on the remainder
/// drops below `1e-14` of the partial sum; the bound is then added to every
/// partial tail, so the result is non-increasing in `ℓ`.
pub fn approximation_tail(ctl: &DynamicController, order: usize) -> Result<f64> {
    require_schur(ctl)?;
    let nh = ctl.controller_states();
    if nh == 0 {
        return Ok(0.0);
    }
    let h = ctl.h();
    // Find j with ‖Hʲ‖_F ≤ 1/2 and c = Σ_{r<j} ‖Hʳ‖_F.
    let mut power = Matrix::identity(nh);
    let mut c = 0.0;
    let q = loop {
        c += power.norm_fro();
        power = power.try_mul(h)?;
        let norm = power.norm_fro();
        if norm <= 0.5 {
            break norm;
        }
        if c > 1e300 {
            return Err(Error::Convergence { iterations: 0, residual: norm });
        }
    };
    let scale = ctl.e().norm_fro() * c / (1.0 - q);

    let mut terms = Vec::new();
    let mut partial = 0.0;
    let mut hg = ctl.g().clone();
    let remainder = loop {
        let bound = scale * hg.norm_fro();
        if hg.is_zero() || bound <= 1e-14 * partial {
            break bound;
        }
        if terms.len() >= TAIL_MAX_TERMS {
            return Err(Error::Convergence { iterations: terms.len(), residual: bound });
        }
        let t = spectral_norm(&ctl.e().try_mul(&hg)?);
        terms.push(t);
        partial += t;
        hg = h.try_mul(&hg)?;
    };
    Ok(terms.iter().skip(order).sum::<f64>() + remainder)
}

/// Independent confirmation of a stabilizing design.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub rho: f64,
    pub lyapunov_certified: bool,
    pub decay_passed: bool,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.rho < 1.0 && self.lyapunov_certified && self.decay_passed
    }
}

/// Spectral radius, a Lyapunov certificate, and a 500-step decay below
/// `1e-6` from 10 random initial states.
pub fn verify_stabilizing(sys: &StateSpaceSystem, gains: &FirGains, seed: u64) -> Result<Verification> {
    let phi = closed_loop(sys, gains)?;
    let rho = spectral_radius(&phi)?;
    let lyapunov_certified = match lyapunov_verify(&phi) {
        Ok(p) => p.is_some(),
        Err(Error::Singular { .. }) => false,
        Err(e) => return Err(e),
    };
    let decay_passed = random_decay_check(sys, gains, 10, 500, 1e-6, seed)?;
    Ok(Verification { rho, lyapunov_certified, decay_passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{system1, system2, system4};
    use crate::sysmodel::to_dynamic;

    fn quick(seed: u64) -> OptimizerConfig {
        OptimizerConfig { runs_per_order: 4, max_evals_per_run: Some(4000), seed, ..Default::default() }
    }

    fn scalar_ctl(h: f64, g: f64, e: f64, d: f64) -> DynamicController {
        DynamicController::new(Matrix::scalar(h), Matrix::scalar(g), Matrix::scalar(e), Matrix::scalar(d)).unwrap()
    }

    #[test]
    fn objective_examples() {
        let stable =
            StateSpaceSystem::new(Matrix::from_diag(&[0.5, -0.7]), Matrix::column(&[1.0, 0.0]), Matrix::row(&[1.0, 1.0]))
                .unwrap();
        assert!((objective(&stable, 0, &[0.0]).unwrap() - 0.7).abs() < 1e-14);
        let rho = objective(&system1(), 1, &[-5.6, -0.1]).unwrap();
        assert!((rho - 0.5f64.sqrt()).abs() < 1e-9);
        assert!(objective(&system1(), 1, &[1.0]).is_err());
    }

    #[test]
    fn system2_objective_never_below_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for order in 0..3 {
            for _ in 0..200 {
                let v: Vec<f64> = (0..=order).map(|_| 5.0 * gaussian(&mut rng)).collect();
                assert!(objective(&system2(), order, &v).unwrap() >= 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn outcome_invariants_hold() {
        for method in [Method::DirectSearch, Method::Evolutionary] {
            let cfg = OptimizerConfig { method, ..quick(5) };
            let o = optimize_order(&system4(), 0, &cfg, None).unwrap();
            assert!(o.best_rho < 1.0);
            let min = o.per_run_rhos.iter().copied().fold(f64::INFINITY, f64::min);
            assert!((o.best_rho - min).abs() < 1e-8);
            assert!(o.median_rho >= o.best_rho && o.median_rho <= o.worst_rho());
            assert_eq!(o.per_run_rhos.len(), 4);
        }
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let a = optimize_order(&system1(), 1, &OptimizerConfig { workers: Some(1), ..quick(11) }, None).unwrap();
        let b = optimize_order(&system1(), 1, &OptimizerConfig { workers: Some(3), ..quick(11) }, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn warm_start_never_hurts() {
        let cfg = quick(2);
        let base = optimize_order(&system1(), 0, &cfg, None).unwrap();
        let padded_rho = spectral_radius(&closed_loop(&system1(), &base.best_gains.padded()).unwrap()).unwrap();
        let next = optimize_order(&system1(), 1, &cfg, Some(&base.best_gains)).unwrap();
        assert!(next.best_rho <= padded_rho + 1e-8);
        let bad = optimize_order(&system1(), 2, &cfg, Some(&base.best_gains));
        assert!(matches!(bad, Err(Error::Precondition(_))));
    }

    #[test]
    fn sweep_on_stable_plant_stays_stable() {
        let stable =
            StateSpaceSystem::new(Matrix::from_diag(&[0.9, 0.2]), Matrix::column(&[1.0, 1.0]), Matrix::row(&[1.0, 0.0]))
                .unwrap();
        let sweep = order_sweep(&stable, 2, &quick(0)).unwrap();
        assert_eq!(sweep.len(), 3);
        assert!(sweep.iter().all(|o| o.best_rho < 1.0));
        assert!(is_monotone(&sweep));
    }

    #[test]
    fn approximation_examples() {
        let ctl = scalar_ctl(0.5, 1.0, 1.0, 0.0);
        let f = fir_approximate(&ctl, 3).unwrap();
        assert_eq!(f.to_vector(), vec![0.0, 1.0, 0.5, 0.25]);
        assert_eq!(fir_approximate(&ctl, 0).unwrap().to_vector(), vec![0.0]);
        assert!((approximation_tail(&ctl, 0).unwrap() - 2.0).abs() < 1e-12);
        assert!((approximation_tail(&ctl, 2).unwrap() - 0.5).abs() < 1e-12);
        assert!((approximation_tail(&ctl, 3).unwrap() - 0.25).abs() < 1e-12);
        let unstable = scalar_ctl(1.0, 1.0, 1.0, 0.0);
        assert!(matches!(fir_approximate(&unstable, 2), Err(Error::Precondition(_))));
        assert!(matches!(approximation_tail(&unstable, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn fir_source_is_reproduced_exactly() {
        let f = FirGains::new(vec![Matrix::scalar(0.4), Matrix::scalar(-1.5), Matrix::scalar(2.0)]).unwrap();
        let ctl = to_dynamic(&f);
        assert_eq!(fir_approximate(&ctl, 2).unwrap(), f);
        assert_eq!(approximation_tail(&ctl, 2).unwrap(), 0.0);
        assert_eq!(approximation_tail(&ctl, 3).unwrap(), 0.0);
    }

    #[test]
    fn verification_of_known_stabilizer() {
        let f = FirGains::new(vec![Matrix::scalar(-5.6), Matrix::scalar(-0.1)]).unwrap();
        let v = verify_stabilizing(&system1(), &f, 0).unwrap();
        assert!(v.passed());
        let v = verify_stabilizing(&system1(), &FirGains::zeros(1, 1, 1), 0).unwrap();
        assert!(!v.passed());
    }
}
