//! Plant and controller data model.
//!
//! The FIR law `u(k) = Σ F_i y(k-i)` over `i = 0..=ℓ` is a static output
//! feedback on an augmented plant whose state stacks `x(k)` with the last `ℓ`
//! outputs, and equivalently a dynamic controller with a nilpotent block
//! shift state matrix. All three views produce the same closed-loop matrix.

use crate::error::{Error, Result};
use crate::matlib::{characteristic_polynomial, Matrix, Polynomial};

/// Discrete-time plant `x(k+1) = A x(k) + B u(k)`, `y(k) = C x(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceSystem {
    a: Matrix,
    b: Matrix,
    c: Matrix,
}

impl StateSpaceSystem {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() || n == 0 {
            return Err(Error::Dimension(format!("A must be nonempty and square, got {:?}", a.shape())));
        }
        if b.rows() != n || b.cols() == 0 {
            return Err(Error::Dimension(format!("B must have {n} rows and at least one column, got {:?}", b.shape())));
        }
        if c.cols() != n || c.rows() == 0 {
            return Err(Error::Dimension(format!("C must have {n} columns and at least one row, got {:?}", c.shape())));
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    /// State dimension `n`.
    pub fn states(&self) -> usize {
        self.a.rows()
    }

    /// Input dimension `m`.
    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    /// Output dimension `p`.
    pub fn outputs(&self) -> usize {
        self.c.rows()
    }

    pub fn is_siso(&self) -> bool {
        self.inputs() == 1 && self.outputs() == 1
    }

    /// Transfer function `C (zI - A)⁻¹ B` of a SISO plant.
    ///
    /// Uses `det(zI - A + BC) = det(zI - A)·(1 + C (zI - A)⁻¹ B)`, so the
    /// numerator is the difference of two characteristic polynomials.
    pub fn to_transfer_function(&self) -> Result<TransferFunctionSiso> {
        if !self.is_siso() {
            return Err(Error::Domain("transfer function requested for a MIMO plant".into()));
        }
        let den = characteristic_polynomial(&self.a)?;
        let closed = &self.a - &(&self.b * &self.c);
        let shifted = characteristic_polynomial(&closed)?;
        let diff: Vec<f64> = shifted.coeffs().iter().zip(den.coeffs()).map(|(x, y)| x - y).collect();
        let scale = diff.iter().chain(den.coeffs()).fold(0.0f64, |m, v| m.max(v.abs()));
        let cleaned: Vec<f64> = diff.iter().map(|v| if v.abs() <= 1e-12 * scale { 0.0 } else { *v }).collect();
        let num = Polynomial::new(cleaned)
            .map_err(|_| Error::Domain("plant has an identically zero transfer function".into()))?;
        TransferFunctionSiso::new(num, den)
    }
}

/// Proper SISO transfer function `num(z)/den(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunctionSiso {
    num: Polynomial,
    den: Polynomial,
}

impl TransferFunctionSiso {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if num.degree() > den.degree() {
            return Err(Error::Domain(format!(
                "improper transfer function: numerator degree {} exceeds denominator degree {}",
                num.degree(),
                den.degree()
            )));
        }
        Ok(Self { num, den })
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::from_slice(num)?, Polynomial::from_slice(den)?)
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.degree() < self.den.degree()
    }
}

/// A plant given either as a state-space model or as a SISO transfer function.
#[derive(Debug, Clone, PartialEq)]
pub enum PlantModel {
    StateSpace(StateSpaceSystem),
    TransferFunction(TransferFunctionSiso),
}

impl PlantModel {
    pub fn is_siso(&self) -> bool {
        match self {
            PlantModel::StateSpace(s) => s.is_siso(),
            PlantModel::TransferFunction(_) => true,
        }
    }

    pub fn to_state_space(&self) -> Result<StateSpaceSystem> {
        match self {
            PlantModel::StateSpace(s) => Ok(s.clone()),
            PlantModel::TransferFunction(tf) => tf_to_ss(tf),
        }
    }

    pub fn to_transfer_function(&self) -> Result<TransferFunctionSiso> {
        match self {
            PlantModel::StateSpace(s) => s.to_transfer_function(),
            PlantModel::TransferFunction(tf) => Ok(tf.clone()),
        }
    }
}

/// Loop sign under which a transfer-function controller is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopSign {
    /// `u = C(z)[-y]`, the classical textbook loop.
    Negative,
    /// `u = C(z)[y]`, the native convention of the FIR law.
    Positive,
}

/// FIR controller gains `(F_0, …, F_ℓ)`, each `m × p`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirGains {
    gains: Vec<Matrix>,
}

impl FirGains {
    pub fn new(gains: Vec<Matrix>) -> Result<Self> {
        let first = gains.first().ok_or_else(|| Error::Dimension("FIR controller needs at least F_0".into()))?;
        let shape = first.shape();
        if shape.0 == 0 || shape.1 == 0 {
            return Err(Error::Dimension("FIR gains must be nonempty".into()));
        }
        if let Some(i) = gains.iter().position(|g| g.shape() != shape) {
            return Err(Error::Dimension(format!(
                "gain F_{i} has shape {:?}, expected {shape:?}",
                gains[i].shape()
            )));
        }
        Ok(Self { gains })
    }

    pub fn zeros(order: usize, inputs: usize, outputs: usize) -> Self {
        Self { gains: vec![Matrix::zeros(inputs, outputs); order + 1] }
    }

    /// Unstacks a flat vector: `F_0` first, each gain in row-major order.
    pub fn from_vector(order: usize, inputs: usize, outputs: usize, v: &[f64]) -> Result<Self> {
        let per = inputs * outputs;
        if v.len() != per * (order + 1) {
            return Err(Error::Dimension(format!(
                "gain vector has {} entries, expected {}",
                v.len(),
                per * (order + 1)
            )));
        }
        let gains = v
            .chunks(per)
            .map(|c| Matrix::new(inputs, outputs, c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(gains)
    }

    pub fn to_vector(&self) -> Vec<f64> {
        self.gains.iter().flat_map(|g| g.as_slice().iter().copied()).collect()
    }

    /// Reads an FIR transfer-function controller `(b_0 z^ℓ + … + b_ℓ)/z^ℓ`.
    ///
    /// Under [`LoopSign::Negative`] the gains are `F_i = -b_i`; under
    /// [`LoopSign::Positive`] they are `F_i = b_i`. Denominators other than a
    /// pure power of `z` are not FIR and are rejected.
    pub fn from_fir_transfer_function(tf: &TransferFunctionSiso, sign: LoopSign) -> Result<Self> {
        let den = tf.den();
        let order = den.degree();
        if den.coeffs()[1..].iter().any(|c| *c != 0.0) {
            return Err(Error::Domain("controller denominator is not a power of z; not an FIR controller".into()));
        }
        let lead = den.leading();
        let num = tf.num().coeffs();
        let mut b = vec![0.0; order + 1 - num.len()];
        b.extend(num.iter().map(|c| c / lead));
        let s = match sign {
            LoopSign::Negative => -1.0,
            LoopSign::Positive => 1.0,
        };
        Self::new(b.into_iter().map(|v| Matrix::scalar(s * v)).collect())
    }

    pub fn order(&self) -> usize {
        self.gains.len() - 1
    }

    pub fn gains(&self) -> &[Matrix] {
        &self.gains
    }

    pub fn gain(&self, i: usize) -> &Matrix {
        &self.gains[i]
    }

    pub fn inputs(&self) -> usize {
        self.gains[0].rows()
    }

    pub fn outputs(&self) -> usize {
        self.gains[0].cols()
    }

    /// Number of scalar parameters, `m·p·(ℓ+1)`.
    pub fn dimension(&self) -> usize {
        self.inputs() * self.outputs() * self.gains.len()
    }

    /// `(F_0, …, F_ℓ, 0)`: one order higher with identical closed-loop
    /// eigenvalues plus `p` at zero.
    pub fn padded(&self) -> Self {
        let mut gains = self.gains.clone();
        gains.push(Matrix::zeros(self.inputs(), self.outputs()));
        Self { gains }
    }

    fn check_against(&self, sys: &StateSpaceSystem) -> Result<()> {
        if self.inputs() != sys.inputs() || self.outputs() != sys.outputs() {
            return Err(Error::Dimension(format!(
                "gains are {}x{} but the plant has m={} inputs and p={} outputs",
                self.inputs(),
                self.outputs(),
                sys.inputs(),
                sys.outputs()
            )));
        }
        Ok(())
    }
}

/// Augmented plant whose state is `(x(k), y(k-1), …, y(k-ℓ))` and whose
/// output is `(y(k), …, y(k-ℓ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPlant {
    pub order: usize,
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub n: usize,
    pub m: usize,
    pub p: usize,
}

pub fn augment(sys: &StateSpaceSystem, order: usize) -> AugmentedPlant {
    let (n, m, p) = (sys.states(), sys.inputs(), sys.outputs());
    let na = n + order * p;
    let mut a = Matrix::zeros(na, na);
    a.set_block(0, 0, sys.a());
    if order >= 1 {
        a.set_block(n, 0, sys.c());
        for k in 1..order {
            for j in 0..p {
                a[(n + k * p + j, n + (k - 1) * p + j)] = 1.0;
            }
        }
    }
    let mut b = Matrix::zeros(na, m);
    b.set_block(0, 0, sys.b());
    let mut c = Matrix::zeros((order + 1) * p, na);
    c.set_block(0, 0, sys.c());
    for j in 0..order * p {
        c[(p + j, n + j)] = 1.0;
    }
    AugmentedPlant { order, a, b, c, n, m, p }
}

/// `(F_0 F_1 … F_ℓ)` as one `m × (ℓ+1)p` matrix.
pub fn stack_gains(f: &FirGains) -> Matrix {
    let parts: Vec<&Matrix> = f.gains().iter().collect();
    Matrix::hstack(&parts).expect("gains share a shape")
}

/// Linear dynamic controller `x̂(k+1) = H x̂ + G y`, `u = E x̂ + D y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicController {
    h: Matrix,
    g: Matrix,
    e: Matrix,
    d: Matrix,
}

impl DynamicController {
    pub fn new(h: Matrix, g: Matrix, e: Matrix, d: Matrix) -> Result<Self> {
        let q = h.rows();
        if !h.is_square() {
            return Err(Error::Dimension(format!("H must be square, got {:?}", h.shape())));
        }
        let (m, p) = d.shape();
        if m == 0 || p == 0 {
            return Err(Error::Dimension("D must be nonempty".into()));
        }
        if g.shape() != (q, p) {
            return Err(Error::Dimension(format!("G must be {q}x{p}, got {:?}", g.shape())));
        }
        if e.shape() != (m, q) {
            return Err(Error::Dimension(format!("E must be {m}x{q}, got {:?}", e.shape())));
        }
        Ok(Self { h, g, e, d })
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    pub fn e(&self) -> &Matrix {
        &self.e
    }

    pub fn d(&self) -> &Matrix {
        &self.d
    }

    pub fn controller_states(&self) -> usize {
        self.h.rows()
    }

    pub fn inputs(&self) -> usize {
        self.d.rows()
    }

    pub fn outputs(&self) -> usize {
        self.d.cols()
    }
}

/// Dynamic-controller form of an FIR law: block shift `H`, `G = (I_p; 0)`,
/// `E = (F_1 … F_ℓ)`, `D = F_0`.
pub fn to_dynamic(f: &FirGains) -> DynamicController {
    let (m, p, l) = (f.inputs(), f.outputs(), f.order());
    let q = l * p;
    let mut h = Matrix::zeros(q, q);
    for j in 0..q.saturating_sub(p) {
        h[(p + j, j)] = 1.0;
    }
    let mut g = Matrix::zeros(q, p);
    if l >= 1 {
        for j in 0..p {
            g[(j, j)] = 1.0;
        }
    }
    let e = if l >= 1 {
        let parts: Vec<&Matrix> = f.gains()[1..].iter().collect();
        Matrix::hstack(&parts).expect("gains share a shape")
    } else {
        Matrix::zeros(m, 0)
    };
    DynamicController { h, g, e, d: f.gain(0).clone() }
}

/// Closed-loop matrix `Φ_ℓ` of the plant under the FIR law.
pub fn closed_loop(sys: &StateSpaceSystem, f: &FirGains) -> Result<Matrix> {
    f.check_against(sys)?;
    let (n, p, l) = (sys.states(), sys.outputs(), f.order());
    let na = n + l * p;
    let mut phi = Matrix::zeros(na, na);
    let top_left = sys.a() + &(&(sys.b() * f.gain(0)) * sys.c());
    phi.set_block(0, 0, &top_left);
    for i in 1..=l {
        phi.set_block(0, n + (i - 1) * p, &(sys.b() * f.gain(i)));
    }
    if l >= 1 {
        phi.set_block(n, 0, sys.c());
        for k in 1..l {
            for j in 0..p {
                phi[(n + k * p + j, n + (k - 1) * p + j)] = 1.0;
            }
        }
    }
    Ok(phi)
}

/// `𝓐_ℓ + 𝓑_ℓ 𝓕_ℓ 𝓒_ℓ` assembled from the augmented plant by plain products.
pub fn closed_loop_augmented(aug: &AugmentedPlant, f: &FirGains) -> Result<Matrix> {
    if f.order() != aug.order || f.inputs() != aug.m || f.outputs() != aug.p {
        return Err(Error::Dimension("gains do not match the augmented plant".into()));
    }
    let bf = aug.b.try_mul(&stack_gains(f))?;
    aug.a.try_add(&bf.try_mul(&aug.c)?)
}

/// `[[A + B D C, B E], [G C, H]]`.
pub fn closed_loop_dynamic(sys: &StateSpaceSystem, ctl: &DynamicController) -> Result<Matrix> {
    if ctl.inputs() != sys.inputs() || ctl.outputs() != sys.outputs() {
        return Err(Error::Dimension(format!(
            "controller is {}x{} but the plant has m={} and p={}",
            ctl.inputs(),
            ctl.outputs(),
            sys.inputs(),
            sys.outputs()
        )));
    }
    let n = sys.states();
    let q = ctl.controller_states();
    let mut phi = Matrix::zeros(n + q, n + q);
    phi.set_block(0, 0, &(sys.a() + &(&(sys.b() * ctl.d()) * sys.c())));
    phi.set_block(0, n, &(sys.b() * ctl.e()));
    phi.set_block(n, 0, &(ctl.g() * sys.c()));
    phi.set_block(n, n, ctl.h());
    Ok(phi)
}

/// Controllable canonical realization plus direct feedthrough term.
pub fn tf_to_ss_with_feedthrough(tf: &TransferFunctionSiso) -> Result<(StateSpaceSystem, f64)> {
    let den = tf.den();
    let n = den.degree();
    if n == 0 {
        return Err(Error::Domain("transfer function has no dynamics to realize".into()));
    }
    let lead = den.leading();
    let a_coef: Vec<f64> = den.coeffs().iter().map(|c| c / lead).collect();
    let mut num = vec![0.0; n + 1 - tf.num().coeffs().len()];
    num.extend(tf.num().coeffs().iter().map(|c| c / lead));
    // num and a_coef both have n+1 entries; split off the direct term.
    let d = num[0];
    let c_row: Vec<f64> = (1..=n).map(|k| num[k] - d * a_coef[k]).collect();

    let mut a = Matrix::zeros(n, n);
    for j in 0..n {
        a[(0, j)] = -a_coef[j + 1];
    }
    for i in 1..n {
        a[(i, i - 1)] = 1.0;
    }
    let mut b = Matrix::zeros(n, 1);
    b[(0, 0)] = 1.0;
    let sys = StateSpaceSystem::new(a, b, Matrix::row(&c_row))?;
    Ok((sys, d))
}

/// Controllable canonical realization of a strictly proper transfer function.
pub fn tf_to_ss(tf: &TransferFunctionSiso) -> Result<StateSpaceSystem> {
    let (sys, d) = tf_to_ss_with_feedthrough(tf)?;
    if d != 0.0 {
        return Err(Error::Domain(
            "biproper transfer function has a direct feedthrough term, which plants may not carry".into(),
        ));
    }
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlib::{eigenvalues, inverse, match_multisets, Complex, TAU_EIG};

    fn g1() -> TransferFunctionSiso {
        TransferFunctionSiso::from_coeffs(&[1.0, -2.0], &[1.0, -7.0, 12.0]).unwrap()
    }

    fn g2() -> TransferFunctionSiso {
        TransferFunctionSiso::from_coeffs(&[1.0, -2.0], &[1.0, -3.0, 0.0]).unwrap()
    }

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn siso(a: f64, b: f64, c: f64) -> StateSpaceSystem {
        StateSpaceSystem::new(Matrix::scalar(a), Matrix::scalar(b), Matrix::scalar(c)).unwrap()
    }

    /// C (zI - A)^{-1} B evaluated with a real z, independent of tf_to_ss.
    fn frequency_response(sys: &StateSpaceSystem, z: f64) -> f64 {
        let n = sys.states();
        let zi_a = &Matrix::identity(n).scale(z) - sys.a();
        let x = &inverse(&zi_a).unwrap() * sys.b();
        (sys.c() * &x)[(0, 0)]
    }

    #[test]
    fn system_rejects_inconsistent_shapes() {
        assert!(StateSpaceSystem::new(Matrix::zeros(2, 2), Matrix::zeros(3, 1), Matrix::zeros(1, 2)).is_err());
        assert!(StateSpaceSystem::new(Matrix::zeros(2, 3), Matrix::zeros(2, 1), Matrix::zeros(1, 2)).is_err());
        assert!(StateSpaceSystem::new(Matrix::zeros(2, 2), Matrix::zeros(2, 1), Matrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn realizations_of_g1_g2_and_delay() {
        let s1 = tf_to_ss(&g1()).unwrap();
        assert_eq!(s1.a(), &m(&[&[7.0, -12.0], &[1.0, 0.0]]));
        assert_eq!(s1.b(), &m(&[&[1.0], &[0.0]]));
        assert_eq!(s1.c(), &m(&[&[1.0, -2.0]]));
        let s2 = tf_to_ss(&g2()).unwrap();
        assert_eq!(s2.a(), &m(&[&[3.0, 0.0], &[1.0, 0.0]]));
        assert_eq!(s2.c(), &m(&[&[1.0, -2.0]]));
        let delay = TransferFunctionSiso::from_coeffs(&[1.0], &[1.0, 0.0]).unwrap();
        let s = tf_to_ss(&delay).unwrap();
        assert_eq!((s.a()[(0, 0)], s.b()[(0, 0)], s.c()[(0, 0)]), (0.0, 1.0, 1.0));
    }

    #[test]
    fn realization_matches_transfer_function_pointwise() {
        for (tf, sys) in [(g1(), tf_to_ss(&g1()).unwrap()), (g2(), tf_to_ss(&g2()).unwrap())] {
            for z in [0.37, -1.9, 5.5, 2.2, 10.0] {
                let direct = tf.num().eval(Complex::real(z)).re / tf.den().eval(Complex::real(z)).re;
                assert!((frequency_response(&sys, z) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn biproper_realization_keeps_feedthrough() {
        let tf = TransferFunctionSiso::from_coeffs(&[2.0, -1.0], &[1.0, -0.2]).unwrap();
        let (sys, d) = tf_to_ss_with_feedthrough(&tf).unwrap();
        assert_eq!(d, 2.0);
        let z = 3.0;
        assert!((frequency_response(&sys, z) + d - 5.0 / 2.8).abs() < 1e-12);
        assert!(tf_to_ss(&tf).is_err());
        assert!(TransferFunctionSiso::from_coeffs(&[1.0, 0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn realization_poles_match_denominator_roots() {
        let sys = tf_to_ss(&g1()).unwrap();
        let poles = eigenvalues(sys.a()).unwrap();
        let roots = g1().den().roots().unwrap();
        assert!(match_multisets(&poles, &roots, TAU_EIG).is_some());
    }

    #[test]
    fn ss_to_tf_recovers_g1() {
        let tf = tf_to_ss(&g1()).unwrap().to_transfer_function().unwrap();
        assert_eq!(tf.num().degree(), 1);
        for (a, b) in tf.num().coeffs().iter().zip([1.0, -2.0]) {
            assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in tf.den().coeffs().iter().zip([1.0, -7.0, 12.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn augment_order_zero_is_identity() {
        let sys = tf_to_ss(&g1()).unwrap();
        let aug = augment(&sys, 0);
        assert_eq!((&aug.a, &aug.b, &aug.c), (sys.a(), sys.b(), sys.c()));
    }

    #[test]
    fn augment_places_shift_block() {
        let sys = tf_to_ss(&g1()).unwrap();
        let aug = augment(&sys, 2);
        assert_eq!(aug.a.shape(), (4, 4));
        assert_eq!(aug.a[(3, 2)], 1.0);
        assert_eq!(aug.a.block(2, 0, 1, 2), *sys.c());
        assert_eq!(aug.c.shape(), (3, 4));
        assert_eq!(aug.c.block(1, 2, 2, 2), Matrix::identity(2));
        assert!(aug.b.block(2, 0, 2, 1).is_zero());
    }

    #[test]
    fn stack_gains_examples() {
        let f = FirGains::new(vec![Matrix::scalar(5.6)]).unwrap();
        assert_eq!(stack_gains(&f), Matrix::scalar(5.6));
        let f = FirGains::new(vec![Matrix::scalar(5.6), Matrix::scalar(0.1)]).unwrap();
        assert_eq!(stack_gains(&f), Matrix::row(&[5.6, 0.1]));
        assert_eq!(stack_gains(&FirGains::zeros(2, 1, 1)), Matrix::zeros(1, 3));
    }

    #[test]
    fn to_dynamic_examples() {
        let f = FirGains::new(vec![Matrix::scalar(2.0), Matrix::scalar(3.0)]).unwrap();
        let d = to_dynamic(&f);
        assert_eq!(d.h(), &Matrix::zeros(1, 1));
        assert_eq!(d.g(), &Matrix::scalar(1.0));
        assert_eq!(d.e(), &Matrix::scalar(3.0));
        assert_eq!(d.d(), &Matrix::scalar(2.0));

        let d = to_dynamic(&FirGains::zeros(2, 1, 1));
        assert_eq!(d.h(), &m(&[&[0.0, 0.0], &[1.0, 0.0]]));
        assert_eq!(d.g(), &m(&[&[1.0], &[0.0]]));

        let d = to_dynamic(&FirGains::new(vec![Matrix::scalar(4.0)]).unwrap());
        assert_eq!(d.h().shape(), (0, 0));
        assert_eq!(d.g().shape(), (0, 1));
        assert_eq!(d.e().shape(), (1, 0));
        assert_eq!(d.d(), &Matrix::scalar(4.0));
    }

    #[test]
    fn shift_matrix_is_nilpotent() {
        for l in 1..5 {
            let f = FirGains::zeros(l, 2, 3);
            let h = to_dynamic(&f).h().clone();
            assert!(h.pow(l as u32).is_zero());
            assert!(!h.pow(l as u32 - 1).is_zero() || l == 1);
        }
    }

    #[test]
    fn closed_loop_of_g1_example() {
        let sys = tf_to_ss(&g1()).unwrap();
        let f = FirGains::from_vector(1, 1, 1, &[-5.6, -0.1]).unwrap();
        let phi = closed_loop(&sys, &f).unwrap();
        let want = m(&[&[1.4, -0.8, -0.1], &[1.0, 0.0, 0.0], &[1.0, -2.0, 0.0]]);
        assert!((&phi - &want).max_abs() < 1e-14);
    }

    #[test]
    fn closed_loop_degenerate_cases() {
        let sys = StateSpaceSystem::new(
            m(&[&[0.5, 1.0], &[0.0, -0.3]]),
            m(&[&[1.0], &[2.0]]),
            m(&[&[1.0, 1.0]]),
        )
        .unwrap();
        let phi = closed_loop(&sys, &FirGains::zeros(1, 1, 1)).unwrap();
        assert_eq!(phi.block(0, 0, 2, 2), *sys.a());
        assert_eq!(phi.block(2, 0, 1, 2), *sys.c());
        assert!(phi.block(0, 2, 3, 1).is_zero());

        let f0 = FirGains::new(vec![Matrix::scalar(0.7)]).unwrap();
        let phi = closed_loop(&sys, &f0).unwrap();
        let want = sys.a() + &(&(sys.b() * f0.gain(0)) * sys.c());
        assert_eq!(phi, want);

        let bad = FirGains::zeros(1, 2, 1);
        assert!(closed_loop(&sys, &bad).is_err());
    }

    #[test]
    fn closed_loop_dynamic_scalar_case() {
        let (a, b, c, d, e) = (0.9, 2.0, -1.5, 0.3, 0.7);
        let ctl = DynamicController::new(Matrix::scalar(0.0), Matrix::scalar(1.0), Matrix::scalar(e), Matrix::scalar(d))
            .unwrap();
        let phi = closed_loop_dynamic(&siso(a, b, c), &ctl).unwrap();
        assert_eq!(phi, m(&[&[a + b * d * c, b * e], &[c, 0.0]]));
    }

    #[test]
    fn closed_loop_dynamic_open_loop_when_e_d_zero() {
        let sys = siso(0.5, 1.0, 2.0);
        let ctl = DynamicController::new(Matrix::scalar(0.25), Matrix::scalar(1.0), Matrix::scalar(0.0), Matrix::scalar(0.0))
            .unwrap();
        let phi = closed_loop_dynamic(&sys, &ctl).unwrap();
        assert_eq!(phi, m(&[&[0.5, 0.0], &[2.0, 0.25]]));
    }

    #[test]
    fn fir_controller_from_transfer_function() {
        // (5.6 z + 0.1)/z
        let c1 = TransferFunctionSiso::from_coeffs(&[5.6, 0.1], &[1.0, 0.0]).unwrap();
        let neg = FirGains::from_fir_transfer_function(&c1, LoopSign::Negative).unwrap();
        assert_eq!(neg.to_vector(), vec![-5.6, -0.1]);
        let pos = FirGains::from_fir_transfer_function(&c1, LoopSign::Positive).unwrap();
        assert_eq!(pos.to_vector(), vec![5.6, 0.1]);
        let iir = TransferFunctionSiso::from_coeffs(&[39.0, 0.0], &[1.0, 4.0, -26.0]).unwrap();
        assert!(FirGains::from_fir_transfer_function(&iir, LoopSign::Negative).is_err());
        // 1/z^2 → (0, 0, 1)
        let d2 = TransferFunctionSiso::from_coeffs(&[1.0], &[1.0, 0.0, 0.0]).unwrap();
        let g = FirGains::from_fir_transfer_function(&d2, LoopSign::Positive).unwrap();
        assert_eq!(g.to_vector(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn gain_vector_roundtrip_and_validation() {
        let v: Vec<f64> = (0..12).map(|i| i as f64 * 0.5).collect();
        let f = FirGains::from_vector(2, 2, 2, &v).unwrap();
        assert_eq!(f.gain(1), &m(&[&[2.0, 2.5], &[3.0, 3.5]]));
        assert_eq!(f.to_vector(), v);
        assert!(FirGains::from_vector(2, 2, 2, &v[..11]).is_err());
        assert!(FirGains::new(vec![Matrix::zeros(1, 2), Matrix::zeros(2, 1)]).is_err());
    }
}
