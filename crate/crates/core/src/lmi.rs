//! Affine matrix inequality feasibility and the convex design paths built on
//! it: Lyapunov verification, state-feedback synthesis and the convexified
//! static-output-feedback synthesis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matlib::{
    cholesky, cholesky_inverse, inverse, null_space, pinv, singular_values, spectral_radius, sym_eig_extremes,
    Lu, Matrix, TAU_SYM,
};
use crate::sysmodel::{augment, closed_loop, AugmentedPlant, FirGains, StateSpaceSystem};

/// Smallest singular value of `𝓜` relative to its norm below which the
/// reconstruction `𝓝 𝓜⁻¹` is refused.
pub const M_INVERTIBILITY_TOL: f64 = 1e-8;

/// Affine symmetric map `x ↦ F₀ + Σ xⱼ Fⱼ` together with linear equalities
/// `A_eq x = b_eq`.
#[derive(Debug, Clone)]
pub struct FeasibilityProblem {
    constant: Matrix,
    coefficients: Vec<Matrix>,
    eq_matrix: Matrix,
    eq_rhs: Vec<f64>,
    labels: Vec<String>,
}

impl FeasibilityProblem {
    pub fn new(constant: Matrix, coefficients: Vec<Matrix>, labels: Vec<String>) -> Result<Self> {
        let d = constant.rows();
        if !constant.is_square() || d == 0 {
            return Err(Error::Contract(format!("constant block must be square and nonempty, got {:?}", constant.shape())));
        }
        if labels.len() != coefficients.len() {
            return Err(Error::Contract(format!(
                "{} labels for {} decision variables",
                labels.len(),
                coefficients.len()
            )));
        }
        let check = |m: &Matrix, what: &str| -> Result<Matrix> {
            if m.shape() != (d, d) {
                return Err(Error::Contract(format!("{what} has shape {:?}, expected ({d}, {d})", m.shape())));
            }
            if m.asymmetry() > TAU_SYM * m.norm_fro() {
                return Err(Error::Contract(format!("{what} is not symmetric")));
            }
            Ok(m.symmetrize())
        };
        let constant = check(&constant, "constant block")?;
        let coefficients = coefficients
            .iter()
            .enumerate()
            .map(|(j, m)| check(m, &format!("coefficient block {j}")))
            .collect::<Result<Vec<_>>>()?;
        let dim = coefficients.len();
        Ok(Self { constant, coefficients, eq_matrix: Matrix::zeros(0, dim), eq_rhs: Vec::new(), labels })
    }

    /// Adds the equality constraints `a x = rhs`.
    pub fn with_equalities(mut self, a: Matrix, rhs: Vec<f64>) -> Result<Self> {
        if a.cols() != self.decision_dim() || a.rows() != rhs.len() {
            return Err(Error::Contract(format!(
                "equality block {:?} with {} right-hand sides for {} variables",
                a.shape(),
                rhs.len(),
                self.decision_dim()
            )));
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("equality right-hand side"));
        }
        self.eq_matrix = Matrix::vstack(&[&self.eq_matrix, &a])?;
        self.eq_rhs.extend(rhs);
        Ok(self)
    }

    /// Builds a problem from affine closures by probing them at the origin
    /// and at every unit vector.
    pub fn from_affine(
        labels: Vec<String>,
        map: impl Fn(&[f64]) -> Matrix,
        equalities: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let dim = labels.len();
        let mut x = vec![0.0; dim];
        let constant = map(&x);
        let eq0 = equalities(&x);
        let mut coefficients = Vec::with_capacity(dim);
        let mut a = Matrix::zeros(eq0.len(), dim);
        for j in 0..dim {
            x[j] = 1.0;
            coefficients.push(map(&x).try_sub(&constant)?);
            for (i, (v, v0)) in equalities(&x).iter().zip(&eq0).enumerate() {
                a[(i, j)] = v - v0;
            }
            x[j] = 0.0;
        }
        let rhs = eq0.iter().map(|v| -v).collect();
        Self::new(constant, coefficients, labels)?.with_equalities(a, rhs)
    }

    pub fn decision_dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn matrix_dim(&self) -> usize {
        self.constant.rows()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn constant(&self) -> &Matrix {
        &self.constant
    }

    pub fn equality_count(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn matrix_map(&self, x: &[f64]) -> Matrix {
        let mut m = self.constant.clone();
        for (xj, fj) in x.iter().zip(&self.coefficients) {
            if *xj != 0.0 {
                m = &m + &fj.scale(*xj);
            }
        }
        m
    }

    /// Euclidean norm of `A_eq x - b_eq`.
    pub fn equality_residual(&self, x: &[f64]) -> f64 {
        let ax = self.eq_matrix.mul_vec(x);
        ax.iter().zip(&self.eq_rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// Default strictness threshold `1e-6·(1 + ‖F₀‖)`.
    pub fn default_eps_feas(&self) -> f64 {
        1e-6 * (1.0 + self.constant.norm_fro())
    }

    fn default_eps_eq(&self) -> f64 {
        1e-9 * (1.0 + self.eq_rhs.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityStatus {
    Feasible,
    NumericallyInfeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityResult {
    pub status: FeasibilityStatus,
    /// Certified decision vector; present only when feasible.
    pub variables: Option<Vec<f64>>,
    /// Best `λ_min` of the map found over all restarts.
    pub achieved_margin: f64,
    pub equality_residual: f64,
    pub iterations: usize,
    pub restarts: usize,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Required `λ_min`; `None` uses [`FeasibilityProblem::default_eps_feas`].
    pub eps_feas: Option<f64>,
    /// Allowed equality residual; `None` uses `1e-9·(1 + ‖b_eq‖)`.
    pub eps_eq: Option<f64>,
    /// Total Newton iterations shared by all restarts.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { eps_feas: None, eps_eq: None, budget: 5000, restarts: 5, seed: 0 }
    }
}

/// The problem after eliminating equalities: `x = x_p + Z z`.
struct Reduced {
    xp: Vec<f64>,
    basis: Matrix,
    g0: Matrix,
    g: Vec<Matrix>,
}

fn reduce(p: &FeasibilityProblem, eps_eq: f64) -> Option<Reduced> {
    let dim = p.decision_dim();
    let (xp, basis) = if p.equality_count() == 0 {
        (vec![0.0; dim], Matrix::identity(dim))
    } else {
        let a = &p.eq_matrix;
        let xp = pinv(a, 1e-12).mul_vec(&p.eq_rhs);
        if p.equality_residual(&xp) > eps_eq {
            return None;
        }
        (xp, null_space(a, 1e-12))
    };
    let g0 = p.matrix_map(&xp);
    let g = (0..basis.cols())
        .map(|k| {
            let mut m = Matrix::zeros(p.matrix_dim(), p.matrix_dim());
            for j in 0..dim {
                let w = basis[(j, k)];
                if w != 0.0 {
                    m = &m + &p.coefficients[j].scale(w);
                }
            }
            m.symmetrize()
        })
        .collect();
    Some(Reduced { xp, basis, g0, g })
}

impl Reduced {
    fn lift(&self, z: &[f64]) -> Vec<f64> {
        let mut x = self.xp.clone();
        for (k, zk) in z.iter().enumerate() {
            for (j, xj) in x.iter_mut().enumerate() {
                *xj += self.basis[(j, k)] * zk;
            }
        }
        x
    }

    /// `G₀ + Σ zᵢ Gᵢ - t I`.
    fn slack(&self, z: &[f64], t: f64) -> Matrix {
        let mut s = self.g0.clone();
        for (zi, gi) in z.iter().zip(&self.g) {
            if *zi != 0.0 {
                s = &s + &gi.scale(*zi);
            }
        }
        for i in 0..s.rows() {
            s[(i, i)] -= t;
        }
        s
    }
}

struct BarrierOutcome {
    z: Vec<f64>,
    iterations: usize,
}

fn trace_product(a: &Matrix, b: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

fn log_det_from_cholesky(l: &Matrix) -> f64 {
    (0..l.rows()).map(|i| 2.0 * l[(i, i)].ln()).sum()
}

/// Maximizes `t` subject to `S(z, t) ≻ 0` and `‖z‖ < R` by a primal
/// log-barrier path-following method.
fn barrier_maximize(red: &Reduced, z0: Vec<f64>, eps_feas: f64, budget: usize) -> BarrierOutcome {
    let k = red.g.len();
    let d = red.g0.rows();
    let radius2 = 1e8 * (1.0 + z0.iter().map(|v| v * v).sum::<f64>());
    let barrier_terms = (d + 1) as f64;

    let lmin = sym_eigen_min(&red.slack(&z0, 0.0));
    let mut z = z0;
    let mut t = lmin - (1.0 + lmin.abs());
    let mut s = 1.0 / (1.0 + lmin.abs());
    let mut iterations = 0;

    let objective = |z: &[f64], t: f64, s: f64| -> Option<f64> {
        let r = radius2 - z.iter().map(|v| v * v).sum::<f64>();
        if r <= 0.0 {
            return None;
        }
        let l = cholesky(&red.slack(z, t))?;
        Some(-s * t - log_det_from_cholesky(&l) - r.ln())
    };

    while iterations < budget {
        iterations += 1;
        let slack = red.slack(&z, t);
        let Some(l) = cholesky(&slack) else { break };
        let sinv = cholesky_inverse(&l);
        let r = radius2 - z.iter().map(|v| v * v).sum::<f64>();
        let u: Vec<Matrix> = red.g.iter().map(|g| &sinv * g).collect();

        let nv = k + 1;
        let mut grad = vec![0.0; nv];
        let mut hess = Matrix::zeros(nv, nv);
        for i in 0..k {
            grad[i] = -u[i].trace() + 2.0 * z[i] / r;
            for j in 0..=i {
                let mut h = trace_product(&u[i], &u[j]) + 4.0 * z[i] * z[j] / (r * r);
                if i == j {
                    h += 2.0 / r;
                }
                hess[(i, j)] = h;
                hess[(j, i)] = h;
            }
            let h = -trace_product(&u[i], &sinv);
            hess[(i, k)] = h;
            hess[(k, i)] = h;
        }
        grad[k] = -s + sinv.trace();
        hess[(k, k)] = trace_product(&sinv, &sinv);

        let Some(step) = newton_step(&hess, &grad) else { break };
        let decrement: f64 = -grad.iter().zip(&step).map(|(g, d)| g * d).sum::<f64>();

        if decrement / 2.0 <= 1e-10 {
            let gap = barrier_terms / s;
            if gap <= 1e-8 * (1.0 + t.abs()) || t + gap < eps_feas {
                break;
            }
            s *= 8.0;
            continue;
        }

        let f0 = objective(&z, t, s).unwrap_or(f64::INFINITY);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let zn: Vec<f64> = z.iter().zip(&step).map(|(zi, di)| zi + alpha * di).collect();
            let tn = t + alpha * step[k];
            if let Some(f) = objective(&zn, tn, s) {
                if f <= f0 - 0.25 * alpha * decrement {
                    z = zn;
                    t = tn;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // No progress possible at this barrier weight.
            let gap = barrier_terms / s;
            if gap <= 1e-8 * (1.0 + t.abs()) {
                break;
            }
            s *= 8.0;
        }
    }
    BarrierOutcome { z, iterations }
}

fn sym_eigen_min(m: &Matrix) -> f64 {
    crate::matlib::sym_eigen(m).0[0]
}

fn newton_step(hess: &Matrix, grad: &[f64]) -> Option<Vec<f64>> {
    let rhs = Matrix::column(&grad.iter().map(|g| -g).collect::<Vec<_>>());
    let l = cholesky(hess).or_else(|| {
        let shift = 1e-12 * (1.0 + hess.trace().abs());
        let mut h = hess.clone();
        for i in 0..h.rows() {
            h[(i, i)] += shift;
        }
        cholesky(&h)
    })?;
    let n = grad.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut v = rhs[(i, 0)];
        for j in 0..i {
            v -= l[(i, j)] * y[j];
        }
        y[i] = v / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut v = y[i];
        for j in (i + 1)..n {
            v -= l[(j, i)] * y[j];
        }
        y[i] = v / l[(i, i)];
    }
    y.iter().all(|v| v.is_finite()).then_some(y)
}

/// Searches for `x` with `λ_min(F(x)) ≥ ε_feas` and `A_eq x = b_eq`.
///
/// A `Feasible` verdict is always certified by an independent eigenvalue
/// computation on the original map. `NumericallyInfeasible` is a heuristic
/// verdict after the budget or the duality bound rules out the threshold.
pub fn solve_feasibility(p: &FeasibilityProblem, opts: &SolverOptions) -> Result<FeasibilityResult> {
    let eps_feas = opts.eps_feas.unwrap_or_else(|| p.default_eps_feas());
    let eps_eq = opts.eps_eq.unwrap_or_else(|| p.default_eps_eq());
    let restarts = opts.restarts.max(1);
    let infeasible = |margin: f64, residual: f64, iterations: usize| FeasibilityResult {
        status: FeasibilityStatus::NumericallyInfeasible,
        variables: None,
        achieved_margin: margin,
        equality_residual: residual,
        iterations,
        restarts,
    };
    let Some(red) = reduce(p, eps_eq) else {
        return Ok(infeasible(f64::NEG_INFINITY, f64::INFINITY, 0));
    };
    let per_restart = (opts.budget / restarts).max(1);

    let outcomes: Vec<(Vec<f64>, f64, f64, usize)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(r as u64));
            let z0: Vec<f64> = (0..red.g.len()).map(|_| rng.random_range(-0.5..0.5)).collect();
            let out = barrier_maximize(&red, z0, eps_feas, per_restart);
            let x = red.lift(&out.z);
            let margin = sym_eig_extremes(&p.matrix_map(&x)).map(|(lo, _)| lo).unwrap_or(f64::NEG_INFINITY);
            let residual = p.equality_residual(&x);
            (x, margin, residual, out.iterations)
        })
        .collect();

    let iterations = outcomes.iter().map(|o| o.3).sum();
    let best = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.2 <= eps_eq)
        .fold(None::<(usize, f64)>, |acc, (i, o)| match acc {
            Some((_, m)) if m >= o.1 => acc,
            _ => Some((i, o.1)),
        });
    let best_margin = outcomes.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
    match best {
        Some((i, margin)) if margin >= eps_feas => Ok(FeasibilityResult {
            status: FeasibilityStatus::Feasible,
            variables: Some(outcomes[i].0.clone()),
            achieved_margin: margin,
            equality_residual: outcomes[i].2,
            iterations,
            restarts,
        }),
        _ => {
            let residual = outcomes.iter().map(|o| o.2).fold(f64::INFINITY, f64::min);
            Ok(infeasible(best_margin, residual, iterations))
        }
    }
}

/// Solves `ΦᵀPΦ - P = -I` and returns `P` when it is positive definite.
pub fn lyapunov_verify(phi: &Matrix) -> Result<Option<Matrix>> {
    if !phi.is_square() || phi.is_empty() {
        return Err(Error::Dimension(format!("expected a nonempty square matrix, got {:?}", phi.shape())));
    }
    let n = phi.rows();
    let nn = n * n;
    // Row-major vec: vec(ΦᵀPΦ)[(i,j)] = Σ_{a,b} Φ[a,i] Φ[b,j] P[a,b].
    let mut op = Matrix::zeros(nn, nn);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for a in 0..n {
                let pai = phi[(a, i)];
                if pai == 0.0 {
                    continue;
                }
                for b in 0..n {
                    op[(row, a * n + b)] += pai * phi[(b, j)];
                }
            }
            op[(row, row)] -= 1.0;
        }
    }
    let rhs = Matrix::new(nn, 1, Matrix::identity(n).scale(-1.0).into_vec())?;
    let v = Lu::factor(&op)?.solve(&rhs)?;
    let p = Matrix::new(n, n, v.into_vec())?.symmetrize();
    Ok(cholesky(&p).map(|_| p))
}

/// Checks `ΦᵀPΦ - P ≺ 0` for a given symmetric `P ≻ 0`.
pub fn lyapunov_certifies(phi: &Matrix, p: &Matrix) -> Result<bool> {
    if cholesky(p).is_none() {
        return Ok(false);
    }
    let q = (&(&phi.transpose() * p) * phi).try_sub(p)?.symmetrize();
    Ok(sym_eig_extremes(&q)?.1 < 0.0)
}

/// Index bookkeeping for structured decision variables.
#[derive(Default)]
struct Layout {
    labels: Vec<String>,
}

#[derive(Clone, Copy)]
struct SymVar {
    offset: usize,
    n: usize,
}

#[derive(Clone, Copy)]
struct FullVar {
    offset: usize,
    rows: usize,
    cols: usize,
}

impl Layout {
    fn sym(&mut self, name: &str, n: usize) -> SymVar {
        let offset = self.labels.len();
        for i in 0..n {
            for j in i..n {
                self.labels.push(format!("{name}[{i},{j}]"));
            }
        }
        SymVar { offset, n }
    }

    fn full(&mut self, name: &str, rows: usize, cols: usize) -> FullVar {
        let offset = self.labels.len();
        for i in 0..rows {
            for j in 0..cols {
                self.labels.push(format!("{name}[{i},{j}]"));
            }
        }
        FullVar { offset, rows, cols }
    }
}

impl SymVar {
    fn value(&self, x: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        let mut k = self.offset;
        for i in 0..self.n {
            for j in i..self.n {
                m[(i, j)] = x[k];
                m[(j, i)] = x[k];
                k += 1;
            }
        }
        m
    }
}

impl FullVar {
    fn value(&self, x: &[f64]) -> Matrix {
        Matrix::new(self.rows, self.cols, x[self.offset..self.offset + self.rows * self.cols].to_vec())
            .expect("slice length matches shape")
    }
}

/// `[[W, X], [Xᵀ, W]]`.
fn lyapunov_block(w: &Matrix, x: &Matrix) -> Matrix {
    let n = w.rows();
    let mut m = Matrix::zeros(2 * n, 2 * n);
    m.set_block(0, 0, w);
    m.set_block(0, n, x);
    m.set_block(n, 0, &x.transpose());
    m.set_block(n, n, w);
    m
}

/// Solves the state-feedback LMI in `(𝓦, 𝓛)` and returns `𝓚 = 𝓛 𝓦⁻¹`,
/// re-verified by spectral radius and by the Lyapunov inequality with
/// `𝓟 = 𝓦⁻¹`.
pub fn state_feedback_design(aug: &AugmentedPlant, opts: &SolverOptions) -> Result<Matrix> {
    let nx = aug.a.rows();
    let mu = aug.b.cols();
    let mut layout = Layout::default();
    let wv = layout.sym("W", nx);
    let lv = layout.full("L", mu, nx);
    let (a, b) = (&aug.a, &aug.b);
    let problem = FeasibilityProblem::from_affine(
        layout.labels,
        |x| {
            let w = wv.value(x);
            let off = &(a * &w) + &(b * &lv.value(x));
            lyapunov_block(&w, &off)
        },
        |x| vec![wv.value(x).trace() - nx as f64],
    )?;
    let result = solve_feasibility(&problem, opts)?;
    let Some(x) = result.variables.as_ref() else {
        return Err(Error::Convergence { iterations: result.iterations, residual: result.achieved_margin });
    };
    let w = wv.value(x);
    let k = lv.value(x).try_mul(&inverse(&w)?)?;
    let acl = a + &(b * &k);
    let p = inverse(&w)?.symmetrize();
    if spectral_radius(&acl)? >= 1.0 || !lyapunov_certifies(&acl, &p)? {
        return Err(Error::Degenerate(format!(
            "state-feedback solution failed re-verification (margin {:e})",
            result.achieved_margin
        )));
    }
    Ok(k)
}

/// Least-squares solution of `𝓕 𝓒 = 𝓚`, returned only if the residual is at
/// most `tol·‖𝓚‖`.
pub fn try_decompose(k: &Matrix, c: &Matrix, tol: f64) -> Result<Option<Matrix>> {
    if k.cols() != c.cols() {
        return Err(Error::Dimension(format!("K is {:?} but C is {:?}", k.shape(), c.shape())));
    }
    let f = k.try_mul(&pinv(c, 1e-12))?;
    let residual = f.try_mul(c)?.try_sub(k)?.norm_fro();
    Ok((residual <= tol * k.norm_fro()).then_some(f))
}

/// Full outcome of the convexified static-output-feedback design.
#[derive(Debug, Clone)]
pub struct SofConvexOutcome {
    /// Result of the plain LMI, which decides feasibility.
    pub feasibility: FeasibilityResult,
    pub gains: Option<FirGains>,
    /// `𝓟 = 𝓦⁻¹` certifying the closed loop when gains are present.
    pub certificate: Option<Matrix>,
    /// Smallest contraction rate `r` for which the rate-scaled LMI was found
    /// feasible; the returned loop has `ρ(Φ) < r`. `1` when infeasible.
    pub contraction_rate: f64,
}

/// Bisection steps over the contraction rate after a feasible verdict.
pub const RATE_BISECTION_STEPS: usize = 8;

/// Feasible point of the rate-scaled LMI `[[r𝓦, 𝓐𝓦 + 𝓑𝓝𝓒], [·ᵀ, r𝓦]] ≻ 0`
/// with the gains and certificate reconstructed from it.
fn sof_attempt(
    sys: &StateSpaceSystem,
    order: usize,
    rate: f64,
    opts: &SolverOptions,
) -> Result<(FeasibilityResult, Option<(FirGains, Matrix)>)> {
    let aug = augment(sys, order);
    let nx = aug.a.rows();
    let q = aug.c.rows();
    let mut layout = Layout::default();
    let wv = layout.sym("W", nx);
    let mv = layout.full("M", q, q);
    let nv = layout.full("N", aug.m, q);
    let (a, b, c) = (&aug.a, &aug.b, &aug.c);
    let problem = FeasibilityProblem::from_affine(
        layout.labels,
        |x| {
            let w = wv.value(x);
            let off = &(a * &w) + &(&(b * &nv.value(x)) * c);
            lyapunov_block(&w.scale(rate), &off)
        },
        |x| {
            let w = wv.value(x);
            let mut eq = (&(&mv.value(x) * c) - &(c * &w)).into_vec();
            eq.push(w.trace() - nx as f64);
            eq
        },
    )?;
    let feasibility = solve_feasibility(&problem, opts)?;
    let Some(x) = feasibility.variables.as_ref() else {
        return Ok((feasibility, None));
    };
    let m = mv.value(x);
    let sv = singular_values(&m);
    let (smax, smin) = (sv[0], sv[sv.len() - 1]);
    if smin < M_INVERTIBILITY_TOL * smax || smax == 0.0 {
        return Err(Error::Degenerate(format!("M is numerically singular (σ_min {smin:e}, σ_max {smax:e})")));
    }
    let f = nv.value(x).try_mul(&inverse(&m)?)?;
    let blocks = (0..=order).map(|i| f.block(0, i * aug.p, aug.m, aug.p)).collect();
    let gains = FirGains::new(blocks)?;
    let phi = closed_loop(sys, &gains)?;
    let p = inverse(&wv.value(x))?.symmetrize();
    if spectral_radius(&phi)? >= 1.0 || !lyapunov_certifies(&phi, &p)? {
        return Err(Error::Degenerate(format!(
            "feasible point failed closed-loop re-verification (margin {:e})",
            feasibility.achieved_margin
        )));
    }
    Ok((feasibility, Some((gains, p))))
}

/// Solves the convexified output-feedback LMI in `(𝓦, 𝓜, 𝓝)` with the
/// coupling constraint `𝓜 𝓒 = 𝓒 𝓦` and reconstructs `𝓕 = 𝓝 𝓜⁻¹`.
///
/// When feasible, the rate-scaled LMI is bisected over `r ∈ (0, 1)` and the
/// gains of the smallest feasible rate are returned. Every such point also
/// satisfies the plain LMI.
pub fn sof_convex_solve(sys: &StateSpaceSystem, order: usize, opts: &SolverOptions) -> Result<SofConvexOutcome> {
    let (feasibility, found) = sof_attempt(sys, order, 1.0, opts)?;
    let Some(mut best) = found else {
        return Ok(SofConvexOutcome { feasibility, gains: None, certificate: None, contraction_rate: 1.0 });
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..RATE_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        match sof_attempt(sys, order, mid, opts) {
            Ok((_, Some(found))) => {
                best = found;
                hi = mid;
            }
            Ok((_, None)) | Err(Error::Degenerate(_)) => lo = mid,
            Err(e) => return Err(e),
        }
    }
    let (gains, p) = best;
    Ok(SofConvexOutcome { feasibility, gains: Some(gains), certificate: Some(p), contraction_rate: hi })
}

/// Convexified output-feedback design; `None` when the LMI is numerically
/// infeasible.
pub fn sof_convex_design(sys: &StateSpaceSystem, order: usize, opts: &SolverOptions) -> Result<Option<FirGains>> {
    Ok(sof_convex_solve(sys, order, opts)?.gains)
}
