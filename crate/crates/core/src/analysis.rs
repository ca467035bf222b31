//! Existence and stability analysis: Schur stability, PBH rank tests, and
//! the parity interlacing property of SISO plants.

use crate::error::Result;
use crate::matlib::{eigenvalues, rank, spectral_radius, Complex, Matrix};
use crate::sysmodel::{augment, PlantModel, StateSpaceSystem, TransferFunctionSiso};

/// Default relative rank tolerance for PBH tests.
pub const PBH_TOL: f64 = 1e-9;
/// Eigenvalues with modulus at least `1 - UNIT_CIRCLE_SLACK` count as unstable
/// in PBH tests, so computed values like `0.9999999999999998` for an exact
/// unit-circle mode are not skipped.
pub const UNIT_CIRCLE_SLACK: f64 = 1e-12;
/// Distance above 1 a real pole or zero must exceed to count as unstable.
pub const PIP_TOL: f64 = 1e-9;
/// Imaginary parts below `REAL_TOL·(1 + |re|)` are treated as zero.
pub const REAL_TOL: f64 = 1e-8;
/// Numerator and denominator roots closer than this are cancelled.
pub const CANCEL_TOL: f64 = 1e-8;

/// `true` iff the spectral radius is strictly below `1 - margin`.
pub fn is_schur(m: &Matrix, margin: f64) -> Result<bool> {
    Ok(spectral_radius(m)? < 1.0 - margin)
}

/// `rank [λI - A, B]` over the complex field, via the real embedding
/// `[[Re, -Im], [Im, Re]]` whose rank is twice the complex rank.
fn hautus_rank(a: &Matrix, b: &Matrix, lambda: Complex, tol: f64) -> usize {
    let n = a.rows();
    let k = n + b.cols();
    let mut m = Matrix::zeros(2 * n, 2 * k);
    for i in 0..n {
        for j in 0..n {
            let re = if i == j { lambda.re } else { 0.0 } - a[(i, j)];
            let im = if i == j { lambda.im } else { 0.0 };
            m[(i, j)] = re;
            m[(i, k + j)] = -im;
            m[(n + i, j)] = im;
            m[(n + i, k + j)] = re;
        }
        for j in 0..b.cols() {
            m[(i, n + j)] = b[(i, j)];
            m[(n + i, k + n + j)] = b[(i, j)];
        }
    }
    rank(&m, tol) / 2
}

/// PBH test of `(a, b)`: full row rank of `[λI - a, b]` at every eigenvalue
/// of `a` on or outside the unit circle.
pub fn pbh_test(a: &Matrix, b: &Matrix, tol: f64) -> Result<bool> {
    let n = a.rows();
    for lambda in eigenvalues(a)? {
        if lambda.abs() >= 1.0 - UNIT_CIRCLE_SLACK && hautus_rank(a, b, lambda, tol) < n {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn pbh_stabilizable(sys: &StateSpaceSystem, tol: f64) -> Result<bool> {
    pbh_test(sys.a(), sys.b(), tol)
}

pub fn pbh_detectable(sys: &StateSpaceSystem, tol: f64) -> Result<bool> {
    pbh_test(&sys.a().transpose(), &sys.c().transpose(), tol)
}

/// PBH stabilizability of the augmented pair. Always agrees with
/// [`pbh_stabilizable`] on the base plant; kept as an independent cross-check.
pub fn augmented_stabilizable_check(sys: &StateSpaceSystem, order: usize, tol: f64) -> Result<bool> {
    let aug = augment(sys, order);
    pbh_test(&aug.a, &aug.b, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolesZeros {
    pub poles: Vec<Complex>,
    pub zeros: Vec<Complex>,
    pub zero_at_infinity: bool,
}

pub fn poles_zeros(tf: &TransferFunctionSiso) -> Result<PolesZeros> {
    let poles = if tf.den().degree() > 0 { tf.den().roots()? } else { Vec::new() };
    let zeros = if tf.num().degree() > 0 { tf.num().roots()? } else { Vec::new() };
    Ok(PolesZeros { poles, zeros, zero_at_infinity: tf.is_strictly_proper() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    Pole,
    Zero,
}

/// A pole or zero too close to the decision boundary to classify safely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Borderline {
    pub kind: RootKind,
    pub value: Complex,
}

/// Poles counted strictly between two consecutive unstable real zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalCount {
    pub lower: f64,
    /// `f64::INFINITY` for the zero at infinity.
    pub upper: f64,
    pub poles: usize,
}

/// Outcome of the parity interlacing test.
#[derive(Debug, Clone, PartialEq)]
pub struct PipReport {
    pub holds: bool,
    /// Ascending; ends with `f64::INFINITY` when the plant is strictly proper.
    pub unstable_real_zeros: Vec<f64>,
    pub interval_pole_counts: Vec<IntervalCount>,
    pub unstable_real_poles: Vec<f64>,
    /// Roots removed as common factors of numerator and denominator.
    pub cancellations: Vec<Complex>,
    pub borderline: Vec<Borderline>,
}

fn cancel_common(zeros: &[Complex], poles: &[Complex]) -> (Vec<Complex>, Vec<Complex>, Vec<Complex>) {
    let mut pole_used = vec![false; poles.len()];
    let mut kept_zeros = Vec::new();
    let mut cancelled = Vec::new();
    for z in zeros {
        let hit = poles
            .iter()
            .enumerate()
            .filter(|(j, p)| !pole_used[*j] && p.dist(*z) <= CANCEL_TOL)
            .min_by(|a, b| a.1.dist(*z).total_cmp(&b.1.dist(*z)))
            .map(|(j, _)| j);
        match hit {
            Some(j) => {
                pole_used[j] = true;
                cancelled.push(*z);
            }
            None => kept_zeros.push(*z),
        }
    }
    let kept_poles = poles.iter().zip(&pole_used).filter(|(_, u)| !**u).map(|(p, _)| *p).collect();
    (kept_zeros, kept_poles, cancelled)
}

fn classify(roots: &[Complex], kind: RootKind, tol: f64, borderline: &mut Vec<Borderline>) -> Vec<f64> {
    let mut out = Vec::new();
    for r in roots {
        let real = r.is_real_within(REAL_TOL);
        if real {
            if (r.re - 1.0).abs() <= tol {
                borderline.push(Borderline { kind, value: *r });
            } else if r.re > 1.0 + tol {
                out.push(r.re);
            }
        } else if r.re > 1.0 - tol && r.im.abs() <= 1e-6 * (1.0 + r.re.abs()) {
            // Nearly real but outside the realness tolerance.
            borderline.push(Borderline { kind, value: *r });
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Parity interlacing test: between every pair of consecutive positive real
/// unstable zeros (infinity included for strictly proper plants) the number
/// of positive real unstable poles must be even.
pub fn pip_check(tf: &TransferFunctionSiso, tol: f64) -> Result<PipReport> {
    let pz = poles_zeros(tf)?;
    let (zeros, poles, cancellations) = cancel_common(&pz.zeros, &pz.poles);
    let mut borderline = Vec::new();
    let mut unstable_real_zeros = classify(&zeros, RootKind::Zero, tol, &mut borderline);
    let unstable_real_poles = classify(&poles, RootKind::Pole, tol, &mut borderline);
    if pz.zero_at_infinity {
        unstable_real_zeros.push(f64::INFINITY);
    }
    let interval_pole_counts: Vec<IntervalCount> = unstable_real_zeros
        .windows(2)
        .map(|w| IntervalCount {
            lower: w[0],
            upper: w[1],
            poles: unstable_real_poles.iter().filter(|p| **p > w[0] && **p < w[1]).count(),
        })
        .collect();
    let holds = interval_pole_counts.iter().all(|c| c.poles % 2 == 0);
    Ok(PipReport {
        holds,
        unstable_real_zeros,
        interval_pole_counts,
        unstable_real_poles,
        cancellations,
        borderline,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateVerdict {
    /// The SISO plant has the parity interlacing property.
    NecessaryConditionHolds,
    /// Not strongly stabilizable, so no stabilizing FIR controller exists.
    Fails,
    /// No discrete-time MIMO test is available.
    NotApplicableMimo,
}

/// Strong stabilizability as a necessary condition for FIR stabilization.
pub fn strong_stabilizability_gate(model: &PlantModel, tol: f64) -> Result<GateVerdict> {
    if !model.is_siso() {
        return Ok(GateVerdict::NotApplicableMimo);
    }
    let report = pip_check(&model.to_transfer_function()?, tol)?;
    Ok(if report.holds { GateVerdict::NecessaryConditionHolds } else { GateVerdict::Fails })
}
