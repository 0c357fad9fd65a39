//! Dense statevector simulation for circuits of one or two qubits.
//!
//! Basis ordering for two qubits is `|q0 q1⟩` with qubit 0 as the most
//! significant bit, so a 4×4 operator written in 2×2 blocks is indexed by
//! qubit 0 in its block row/column. Single-qubit gates on qubit 0 act as
//! `G ⊗ I`, on qubit 1 as `I ⊗ G`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::rng;
use crate::{Error, Result};

pub type Mat2 = Matrix2<Complex64>;
pub type Mat4 = Matrix4<Complex64>;

/// Amplitude of one basis state.
pub type ComplexAmp = Complex64;

/// Tolerance on the squared norm of a state.
pub const NORM_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A normalized pure state on one (dim 2) or two (dim 4) qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<ComplexAmp>,
}

impl StateVector {
    /// `|0…0⟩` on `width` qubits.
    pub fn zero(width: usize) -> Result<Self> {
        Self::basis(width, 0)
    }

    pub fn basis(width: usize, index: usize) -> Result<Self> {
        let dim = dim_of(width)?;
        if index >= dim {
            return Err(Error::Dimension(format!(
                "basis index {index} out of range for {width} qubit(s)"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { amps })
    }

    pub fn from_amps(amps: Vec<ComplexAmp>) -> Result<Self> {
        if amps.len() != 2 && amps.len() != 4 {
            return Err(Error::Dimension(format!(
                "state dimension must be 2 or 4, got {}",
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state is not normalized (norm² = {norm})"
            )));
        }
        Ok(Self { amps })
    }

    pub fn amps(&self) -> &[ComplexAmp] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn width(&self) -> usize {
        if self.amps.len() == 2 {
            1
        } else {
            2
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn apply(&self, gate: &GateOp) -> Result<StateVector> {
        apply(self, gate)
    }
}

fn dim_of(width: usize) -> Result<usize> {
    match width {
        1 => Ok(2),
        2 => Ok(4),
        _ => Err(Error::Dimension(format!(
            "only 1 or 2 qubits are supported, got {width}"
        ))),
    }
}

/// One instruction of a [`CircuitIR`]. Angles are in radians.
#[derive(Debug, Clone, PartialEq)]
pub enum GateOp {
    X {
        qubit: usize,
    },
    /// Square root of X, with the phase convention of `U(π/2, −π/2, π/2)`.
    Sx {
        qubit: usize,
    },
    Ry {
        angle: f64,
        qubit: usize,
    },
    Rz {
        angle: f64,
        qubit: usize,
    },
    U {
        theta: f64,
        phi: f64,
        lambda: f64,
        qubit: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    /// Arbitrary two-qubit unitary on `(q0, q1)`.
    Unitary2q(Box<Mat4>),
    Measure {
        qubit: usize,
    },
}

impl GateOp {
    pub fn x(qubit: usize) -> Self {
        GateOp::X { qubit }
    }

    pub fn sx(qubit: usize) -> Self {
        GateOp::Sx { qubit }
    }

    pub fn ry(angle: f64, qubit: usize) -> Self {
        GateOp::Ry { angle, qubit }
    }

    pub fn rz(angle: f64, qubit: usize) -> Self {
        GateOp::Rz { angle, qubit }
    }

    pub fn u(theta: f64, phi: f64, lambda: f64, qubit: usize) -> Self {
        GateOp::U {
            theta,
            phi,
            lambda,
            qubit,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        GateOp::Cnot { control, target }
    }

    pub fn measure(qubit: usize) -> Self {
        GateOp::Measure { qubit }
    }

    /// Wraps a 4×4 matrix after checking it is unitary to 1e-10.
    pub fn unitary2q(m: Mat4) -> Result<Self> {
        let dev = unitarity_deviation4(&m);
        if dev > 1e-10 {
            return Err(Error::InvalidGate(format!(
                "two-qubit matrix is not unitary (deviation {dev:e})"
            )));
        }
        Ok(GateOp::Unitary2q(Box::new(m)))
    }

    /// Qubits the op touches.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::X { qubit }
            | GateOp::Sx { qubit }
            | GateOp::Ry { qubit, .. }
            | GateOp::Rz { qubit, .. }
            | GateOp::U { qubit, .. }
            | GateOp::Measure { qubit } => vec![qubit],
            GateOp::Cnot { control, target } => vec![control, target],
            GateOp::Unitary2q(_) => vec![0, 1],
        }
    }

    pub fn is_measure(&self) -> bool {
        matches!(self, GateOp::Measure { .. })
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, GateOp::Cnot { .. } | GateOp::Unitary2q(_))
    }

    fn angles(&self) -> Vec<f64> {
        match self {
            GateOp::Ry { angle, .. } | GateOp::Rz { angle, .. } => vec![*angle],
            GateOp::U {
                theta, phi, lambda, ..
            } => vec![*theta, *phi, *lambda],
            GateOp::Unitary2q(m) => m.iter().flat_map(|z| [z.re, z.im]).collect(),
            _ => Vec::new(),
        }
    }
}

/// Matrix of a gate, sized by the gate's own arity.
#[derive(Debug, Clone, PartialEq)]
pub enum GateMatrix {
    Single(Mat2),
    Two(Mat4),
}

impl GateMatrix {
    pub fn dim(&self) -> usize {
        match self {
            GateMatrix::Single(_) => 2,
            GateMatrix::Two(_) => 4,
        }
    }
}

pub fn ry_matrix(angle: f64) -> Mat2 {
    let (s, c) = (angle / 2.0).sin_cos();
    Mat2::new(
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    )
}

pub fn rz_matrix(angle: f64) -> Mat2 {
    let half = angle / 2.0;
    Mat2::new(
        Complex64::from_polar(1.0, -half),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, half),
    )
}

/// The generic single-qubit gate
/// `[[cos Θ/2, −e^{iλ} sin Θ/2], [e^{iΦ} sin Θ/2, e^{i(Φ+λ)} cos Θ/2]]`.
pub fn u_matrix(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Mat2::new(
        Complex64::new(c, 0.0),
        -Complex64::from_polar(s, lambda),
        Complex64::from_polar(s, phi),
        Complex64::from_polar(c, phi + lambda),
    )
}

pub fn x_matrix() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sx_matrix() -> Mat2 {
    let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let b = Complex64::new(0.0, -FRAC_1_SQRT_2);
    Mat2::new(a, b, b, a)
}

fn cnot_matrix(control: usize, target: usize) -> Mat4 {
    // Permutation of basis indices 2*q0 + q1.
    let mut m = Mat4::zeros();
    for col in 0..4 {
        let bits = [(col >> 1) & 1, col & 1];
        let mut out = bits;
        if bits[control] == 1 {
            out[target] ^= 1;
        }
        m[(out[0] << 1 | out[1], col)] = ONE;
    }
    m
}

/// Exact matrix of a non-measurement gate.
pub fn gate_matrix(g: &GateOp) -> Result<GateMatrix> {
    if g.angles().iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidGate(format!("non-finite parameter in {g:?}")));
    }
    Ok(match g {
        GateOp::X { .. } => GateMatrix::Single(x_matrix()),
        GateOp::Sx { .. } => GateMatrix::Single(sx_matrix()),
        GateOp::Ry { angle, .. } => GateMatrix::Single(ry_matrix(*angle)),
        GateOp::Rz { angle, .. } => GateMatrix::Single(rz_matrix(*angle)),
        GateOp::U {
            theta, phi, lambda, ..
        } => GateMatrix::Single(u_matrix(*theta, *phi, *lambda)),
        GateOp::Cnot { control, target } => {
            if control == target || *control > 1 || *target > 1 {
                return Err(Error::InvalidGate(format!(
                    "CNOT needs distinct qubits in {{0, 1}}, got control {control}, target {target}"
                )));
            }
            GateMatrix::Two(cnot_matrix(*control, *target))
        }
        GateOp::Unitary2q(m) => GateMatrix::Two(**m),
        GateOp::Measure { .. } => {
            return Err(Error::InvalidGate(
                "measurement has no unitary matrix".into(),
            ))
        }
    })
}

/// Full-register matrix of `g` on a register of `width` qubits.
pub fn embed(g: &GateOp, width: usize) -> Result<GateMatrix> {
    dim_of(width)?;
    if let Some(&q) = g.qubits().iter().find(|&&q| q >= width) {
        return Err(Error::Dimension(format!(
            "qubit {q} out of range for a {width}-qubit register"
        )));
    }
    match (gate_matrix(g)?, width) {
        (GateMatrix::Single(m), 1) => Ok(GateMatrix::Single(m)),
        (GateMatrix::Single(m), _) => {
            let id = Mat2::identity();
            let full = if g.qubits()[0] == 0 {
                m.kronecker(&id)
            } else {
                id.kronecker(&m)
            };
            Ok(GateMatrix::Two(full))
        }
        (GateMatrix::Two(m), 2) => Ok(GateMatrix::Two(m)),
        (GateMatrix::Two(_), _) => Err(Error::Dimension(
            "two-qubit gate on a one-qubit register".into(),
        )),
    }
}

/// `matrix · state`, with single-qubit gates lifted to the register width.
pub fn apply(state: &StateVector, g: &GateOp) -> Result<StateVector> {
    let amps = match embed(g, state.width())? {
        GateMatrix::Single(m) => {
            let v = m * nalgebra::Vector2::from_column_slice(&state.amps);
            v.iter().copied().collect()
        }
        GateMatrix::Two(m) => {
            let v = m * nalgebra::Vector4::from_column_slice(&state.amps);
            v.iter().copied().collect()
        }
    };
    Ok(StateVector { amps })
}

/// Z-basis outcome probabilities `(p0, p1)` of one qubit.
pub fn probabilities(state: &StateVector, qubit: usize) -> Result<(f64, f64)> {
    if qubit >= state.width() {
        return Err(Error::Dimension(format!(
            "qubit {qubit} out of range for a {}-qubit state",
            state.width()
        )));
    }
    let shift = state.width() - 1 - qubit;
    let (mut p0, mut p1) = (0.0, 0.0);
    for (i, a) in state.amps.iter().enumerate() {
        if (i >> shift) & 1 == 0 {
            p0 += a.norm_sqr();
        } else {
            p1 += a.norm_sqr();
        }
    }
    Ok((p0, p1))
}

/// Outcome tallies from repeated Z-basis measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotResult {
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
    pub seed: u64,
}

impl ShotResult {
    pub fn count(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    /// Fraction of shots that produced `bits`.
    pub fn fraction(&self, bits: &str) -> f64 {
        self.count(bits) as f64 / self.shots as f64
    }
}

/// Draws `shots` Z-basis measurements of `qubit`. See [`crate::rng`] for
/// the generator and draw discipline.
pub fn sample(state: &StateVector, qubit: usize, shots: u64, seed: u64) -> Result<ShotResult> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let (p0, _) = probabilities(state, qubit)?;
    let mut rng = rng::sampling_rng(seed);
    let mut zeros = 0u64;
    for _ in 0..shots {
        if rng::uniform(&mut rng, 0.0, 1.0) < p0 {
            zeros += 1;
        }
    }
    let mut counts = BTreeMap::new();
    for (bits, n) in [("0", zeros), ("1", shots - zeros)] {
        if n > 0 {
            counts.insert(bits.to_string(), n);
        }
    }
    Ok(ShotResult {
        shots,
        counts,
        seed,
    })
}

/// Ordered gate list over one or two qubits. Measurements, if any, form the
/// tail of the list.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitIR {
    width: usize,
    ops: Vec<GateOp>,
}

impl CircuitIR {
    pub fn new(width: usize) -> Result<Self> {
        dim_of(width)?;
        Ok(Self {
            width,
            ops: Vec::new(),
        })
    }

    pub fn from_ops(width: usize, ops: impl IntoIterator<Item = GateOp>) -> Result<Self> {
        let mut c = Self::new(width)?;
        for op in ops {
            c.push(op)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, op: GateOp) -> Result<()> {
        if let Some(&q) = op.qubits().iter().find(|&&q| q >= self.width) {
            return Err(Error::Dimension(format!(
                "qubit {q} out of range for a {}-qubit circuit",
                self.width
            )));
        }
        if let GateOp::Cnot { control, target } = op {
            if control == target {
                return Err(Error::InvalidGate("CNOT control equals target".into()));
            }
        }
        if op.angles().iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidGate(format!(
                "non-finite parameter in {op:?}"
            )));
        }
        if !op.is_measure() && self.ops.last().is_some_and(GateOp::is_measure) {
            return Err(Error::InvalidGate(
                "gates after a measurement are not supported".into(),
            ));
        }
        self.ops.push(op);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn measured_qubits(&self) -> Vec<usize> {
        self.ops
            .iter()
            .filter_map(|op| match op {
                GateOp::Measure { qubit } => Some(*qubit),
                _ => None,
            })
            .collect()
    }

    /// Product of all non-measurement gates, in register width.
    pub fn unitary(&self) -> Result<GateMatrix> {
        let mut acc = match self.width {
            1 => GateMatrix::Single(Mat2::identity()),
            _ => GateMatrix::Two(Mat4::identity()),
        };
        for op in self.ops.iter().filter(|op| !op.is_measure()) {
            acc = match (acc, embed(op, self.width)?) {
                (GateMatrix::Single(a), GateMatrix::Single(g)) => GateMatrix::Single(g * a),
                (GateMatrix::Two(a), GateMatrix::Two(g)) => GateMatrix::Two(g * a),
                _ => unreachable!("embed returns register-width matrices"),
            };
        }
        Ok(acc)
    }

    /// Runs every non-measurement gate on `initial`.
    pub fn execute(&self, initial: &StateVector) -> Result<StateVector> {
        if initial.width() != self.width {
            return Err(Error::Dimension(format!(
                "{}-qubit state for a {}-qubit circuit",
                initial.width(),
                self.width
            )));
        }
        self.ops
            .iter()
            .filter(|op| !op.is_measure())
            .try_fold(initial.clone(), |s, op| apply(&s, op))
    }

    /// Final state starting from `|0…0⟩`.
    pub fn run(&self) -> Result<StateVector> {
        self.execute(&StateVector::zero(self.width)?)
    }

    /// The single measured qubit, or qubit 0 if the circuit has no
    /// measurement.
    pub fn readout_qubit(&self) -> Result<usize> {
        match self.measured_qubits().as_slice() {
            [] => Ok(0),
            [q] => Ok(*q),
            more => Err(Error::Unsupported {
                pass: "readout",
                reason: format!("{} measured qubits; expected one", more.len()),
            }),
        }
    }

    /// Exact outcome-0 probability of the readout qubit and a seeded shot
    /// sample of it.
    pub fn run_and_sample(&self, shots: u64, seed: u64) -> Result<(f64, ShotResult)> {
        let state = self.run()?;
        let q = self.readout_qubit()?;
        let (p0, _) = probabilities(&state, q)?;
        Ok((p0, sample(&state, q, shots, seed)?))
    }
}

impl fmt::Display for CircuitIR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::compile::dump_circuit(self))
    }
}

/// Max-entry deviation of `m·m†` from the identity.
pub fn unitarity_deviation2(m: &Mat2) -> f64 {
    (m * m.adjoint() - Mat2::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn unitarity_deviation4(m: &Mat4) -> f64 {
    (m * m.adjoint() - Mat4::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Largest entry-wise deviation between `a` and `e^{iγ} b` for the global
/// phase `γ` that best aligns them. Works for any pair of equally sized
/// complex slices (matrices in column order, or states).
pub fn phase_aligned_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let overlap: Complex64 = b.iter().zip(a).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}

pub fn equal_up_to_phase(a: &GateMatrix, b: &GateMatrix, tol: f64) -> bool {
    match (a, b) {
        (GateMatrix::Single(x), GateMatrix::Single(y)) => {
            phase_aligned_distance(x.as_slice(), y.as_slice()) <= tol
        }
        (GateMatrix::Two(x), GateMatrix::Two(y)) => {
            phase_aligned_distance(x.as_slice(), y.as_slice()) <= tol
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn max_diff(a: &Mat2, b: &Mat2) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn u_pi_is_ry_pi() {
        let GateMatrix::Single(m) = gate_matrix(&GateOp::u(PI, 0.0, 0.0, 0)).unwrap() else {
            panic!()
        };
        let expected = Mat2::new(c(0.0), c(-1.0), c(1.0), c(0.0));
        assert!(max_diff(&m, &expected) < 1e-15);
    }

    #[test]
    fn rz_zero_is_identity() {
        let GateMatrix::Single(m) = gate_matrix(&GateOp::rz(0.0, 0)).unwrap() else {
            panic!()
        };
        assert_eq!(m, Mat2::identity());
    }

    #[test]
    fn u_with_zero_phases_is_ry() {
        let theta_m: f64 = 0.3;
        let u = u_matrix(2.0 * theta_m, 0.0, 0.0);
        let ry = ry_matrix(2.0 * theta_m);
        assert!(max_diff(&u, &ry) < 1e-15);
        // Closed form of the mixing rotation.
        assert!((u[(0, 0)].re - theta_m.cos()).abs() < 1e-15);
        assert!((u[(1, 0)].re - theta_m.sin()).abs() < 1e-15);
    }

    #[test]
    fn measure_has_no_matrix() {
        assert!(matches!(
            gate_matrix(&GateOp::measure(0)),
            Err(Error::InvalidGate(_))
        ));
    }

    #[test]
    fn x_flips_zero() {
        let s = StateVector::zero(1).unwrap().apply(&GateOp::x(0)).unwrap();
        assert_eq!(s.amps(), &[c(0.0), c(1.0)]);
    }

    #[test]
    fn ry_on_zero_gives_cos_sin() {
        let theta: f64 = 0.42;
        let s = StateVector::zero(1)
            .unwrap()
            .apply(&GateOp::ry(2.0 * theta, 0))
            .unwrap();
        assert!((s.amps()[0].re - theta.cos()).abs() < 1e-15);
        assert!((s.amps()[1].re - theta.sin()).abs() < 1e-15);
    }

    #[test]
    fn apply_rejects_out_of_range_qubit() {
        let s = StateVector::zero(1).unwrap();
        assert!(matches!(s.apply(&GateOp::x(1)), Err(Error::Dimension(_))));
        assert!(matches!(
            s.apply(&GateOp::cnot(0, 1)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn probabilities_of_basis_and_plus() {
        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(probabilities(&one, 0).unwrap(), (0.0, 1.0));
        let plus = StateVector::from_amps(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        let (p0, p1) = probabilities(&plus, 0).unwrap();
        assert!((p0 - 0.5).abs() < 1e-15 && (p1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_qubit_ordering_is_msb_first() {
        // X on qubit 0 of |00⟩ gives |10⟩, basis index 2.
        let s = StateVector::zero(2).unwrap().apply(&GateOp::x(0)).unwrap();
        assert_eq!(s.amps()[2], ONE);
        assert_eq!(probabilities(&s, 0).unwrap(), (0.0, 1.0));
        assert_eq!(probabilities(&s, 1).unwrap(), (1.0, 0.0));
        // CNOT(0 -> 1) then flips qubit 1: |11⟩.
        let s = s.apply(&GateOp::cnot(0, 1)).unwrap();
        assert_eq!(s.amps()[3], ONE);
        let s = s.apply(&GateOp::cnot(1, 0)).unwrap();
        assert_eq!(s.amps()[1], ONE);
    }

    #[test]
    fn from_amps_validates() {
        assert!(StateVector::from_amps(vec![c(1.0), c(1.0)]).is_err());
        assert!(StateVector::from_amps(vec![c(1.0); 3]).is_err());
        assert!(StateVector::from_amps(vec![c(f64::NAN), c(0.0)]).is_err());
    }

    #[test]
    fn deterministic_outcome_sampling() {
        let zero = StateVector::zero(1).unwrap();
        for seed in [0, 1, 99, u64::MAX] {
            let r = sample(&zero, 0, 4096, seed).unwrap();
            assert_eq!(r.counts.len(), 1);
            assert_eq!(r.count("0"), 4096);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let plus = StateVector::from_amps(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        let a = sample(&plus, 0, 4096, 17).unwrap();
        let b = sample(&plus, 0, 4096, 17).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.count("0") + a.count("1"), 4096);
    }

    #[test]
    fn balanced_sampling_stays_within_five_sigma() {
        // 5σ of Binomial(4096, 1/2) is 160 counts.
        let plus = StateVector::from_amps(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        for seed in 0..200 {
            let r = sample(&plus, 0, 4096, seed).unwrap();
            assert!((r.count("0") as i64 - 2048).abs() <= 160, "seed {seed}");
        }
    }

    #[test]
    fn zero_shots_is_an_error() {
        let zero = StateVector::zero(1).unwrap();
        assert!(matches!(
            sample(&zero, 0, 0, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn circuit_rejects_gates_after_measure() {
        let mut c = CircuitIR::new(1).unwrap();
        c.push(GateOp::measure(0)).unwrap();
        assert!(c.push(GateOp::x(0)).is_err());
        assert!(CircuitIR::from_ops(2, [GateOp::cnot(1, 1)]).is_err());
        assert!(CircuitIR::from_ops(1, [GateOp::ry(f64::INFINITY, 0)]).is_err());
        assert!(CircuitIR::new(3).is_err());
    }

    #[test]
    fn circuit_unitary_matches_execution() {
        let c = CircuitIR::from_ops(
            2,
            [
                GateOp::ry(0.3, 0),
                GateOp::ry(-1.1, 1),
                GateOp::cnot(0, 1),
                GateOp::rz(FRAC_PI_2, 1),
                GateOp::measure(1),
            ],
        )
        .unwrap();
        let GateMatrix::Two(u) = c.unitary().unwrap() else {
            panic!()
        };
        let run = c.run().unwrap();
        for i in 0..4 {
            assert!((run.amps()[i] - u[(i, 0)]).norm() < 1e-15);
        }
        assert_eq!(c.readout_qubit().unwrap(), 1);
    }

    #[test]
    fn unitary2q_requires_unitarity() {
        assert!(GateOp::unitary2q(Mat4::identity() * c(2.0)).is_err());
        assert!(GateOp::unitary2q(Mat4::identity()).is_ok());
    }

    #[test]
    fn phase_alignment_ignores_global_phase_only() {
        let a = ry_matrix(0.7);
        let b = a * Complex64::from_polar(1.0, 1.3);
        assert!(phase_aligned_distance(a.as_slice(), b.as_slice()) < 1e-15);
        let other = ry_matrix(0.71);
        assert!(phase_aligned_distance(a.as_slice(), other.as_slice()) > 1e-3);
    }
}
