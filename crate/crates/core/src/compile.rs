//! Single-qubit circuit rewriting.
//!
//! [`virtual_z_pass`] removes every `RZ` by carrying its angle as a frame
//! offset `Λ` that is absorbed into the phases of later rotations:
//! `RY(Θ)·RZ(Λ) = RZ(Λ)·U(Θ, −Λ, Λ)` up to global phase. The offset left at
//! the end is either emitted as one trailing `RZ(Λ)` or, when a Z-basis
//! measurement follows, dropped.
//!
//! [`lower_to_native`] rewrites every gate into `{RZ, SX, X}`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::qsim::{equal_up_to_phase, gate_matrix, CircuitIR, GateMatrix, GateOp, Mat2, Mat4};
use crate::{Error, Result};

/// Angles within this distance of a special value are treated as equal to
/// it when collapsing lowering patterns.
const ANGLE_EPS: f64 = 1e-14;

/// A drive pulse of area `theta` and phase `phi`: rotation about the
/// equatorial axis `(sin Φ, cos Φ, 0)`, equal to `U(Θ, −Φ, Φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseGate {
    pub theta: f64,
    pub phi: f64,
}

impl PulseGate {
    pub fn to_gate(self, qubit: usize) -> GateOp {
        GateOp::u(self.theta, -self.phi, self.phi, qubit)
    }

    /// `exp(−i Θ/2 · n̂·σ)` with `n̂ = (sin Φ, cos Φ, 0)`.
    pub fn rotation_matrix(self) -> Mat2 {
        let (s, c) = (self.theta / 2.0).sin_cos();
        let i = Complex64::i();
        // n̂·σ = [[0, −i e^{iΦ}], [i e^{−iΦ}, 0]]
        let off = Complex64::from_polar(1.0, self.phi);
        Mat2::new(
            Complex64::new(c, 0.0),
            -i * s * (-i * off),
            -i * s * (i * off.conj()),
            Complex64::new(c, 0.0),
        )
    }
}

/// Gate and pulse accounting for one compilation.
#[derive(Debug, Clone, PartialEq)]
pub struct CompileReport {
    /// Non-measurement ops in the input.
    pub input_gate_count: usize,
    /// Non-measurement ops in the output.
    pub output_gate_count: usize,
    /// Pulses the input needs when every `RZ` is a physical pulse.
    pub input_pulse_count: usize,
    /// Pulses the output needs (`RZ` are free frame changes).
    pub physical_pulse_count: usize,
    pub folded_rz_count: usize,
    /// Accumulated offset at the end of the circuit, unwrapped.
    pub residual_rz: f64,
    /// Whether the trailing `RZ(residual_rz)` was dropped before a
    /// measurement.
    pub residual_elided: bool,
}

/// Gates needing a physical pulse when `RZ` is implemented virtually:
/// everything except `RZ` and measurements.
pub fn pulse_count(c: &CircuitIR) -> usize {
    c.ops()
        .iter()
        .filter(|op| !matches!(op, GateOp::Rz { .. } | GateOp::Measure { .. }))
        .count()
}

/// Gates needing a physical pulse on hardware without virtual `Z`:
/// everything except measurements.
pub fn pulse_count_physical_z(c: &CircuitIR) -> usize {
    c.ops().iter().filter(|op| !op.is_measure()).count()
}

fn single_qubit_only(c: &CircuitIR, pass: &'static str) -> Result<()> {
    if c.width() != 1 {
        return Err(Error::Unsupported {
            pass,
            reason: format!("{}-qubit circuit", c.width()),
        });
    }
    if let Some(op) = c.ops().iter().find(|op| op.is_two_qubit()) {
        return Err(Error::Unsupported {
            pass,
            reason: format!("two-qubit gate {op:?}"),
        });
    }
    Ok(())
}

/// Folds every `RZ` into the phases of the following rotations.
pub fn virtual_z_pass(c: &CircuitIR) -> Result<(CircuitIR, CompileReport)> {
    single_qubit_only(c, "virtual-Z pass")?;
    let mut out = CircuitIR::new(1)?;
    let mut offset = 0.0_f64;
    let mut folded = 0usize;
    let mut elided = false;

    for op in c.ops() {
        match *op {
            GateOp::Rz { angle, .. } => {
                offset += angle;
                folded += 1;
            }
            GateOp::Ry { angle, qubit } => {
                if offset == 0.0 {
                    out.push(GateOp::ry(angle, qubit))?;
                } else {
                    out.push(GateOp::u(angle, -offset, offset, qubit))?;
                }
            }
            GateOp::U {
                theta,
                phi,
                lambda,
                qubit,
            } => {
                offset += lambda;
                out.push(GateOp::u(theta, -offset, offset, qubit))?;
                offset += phi;
            }
            GateOp::Sx { qubit } => {
                offset += FRAC_PI_2;
                out.push(GateOp::u(FRAC_PI_2, -offset, offset, qubit))?;
                offset -= FRAC_PI_2;
            }
            GateOp::X { qubit } => {
                // X·RZ(Λ) = RZ(−Λ)·X
                out.push(GateOp::x(qubit))?;
                offset = -offset;
            }
            GateOp::Measure { qubit } => {
                if !out.ops().last().is_some_and(GateOp::is_measure) && offset != 0.0 {
                    elided = true;
                }
                out.push(GateOp::measure(qubit))?;
            }
            GateOp::Cnot { .. } | GateOp::Unitary2q(_) => unreachable!("checked above"),
        }
    }
    if offset != 0.0 && c.measured_qubits().is_empty() {
        out.push(GateOp::rz(offset, 0))?;
    }

    let report = CompileReport {
        input_gate_count: pulse_count_physical_z(c),
        output_gate_count: pulse_count_physical_z(&out),
        input_pulse_count: pulse_count_physical_z(c),
        physical_pulse_count: pulse_count(&out),
        folded_rz_count: folded,
        residual_rz: offset,
        residual_elided: elided,
    };
    Ok((out, report))
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Wraps every phase angle (`RZ` angles, `Φ`, `λ` of `U`) into `(−π, π]`.
/// `U` is 2π-periodic in `Φ` and `λ`; `RZ` picks up at most a sign, so the
/// circuit unitary is unchanged up to global phase.
pub fn normalize_phases(c: &CircuitIR) -> Result<CircuitIR> {
    let ops = c.ops().iter().map(|op| match *op {
        GateOp::Rz { angle, qubit } => GateOp::rz(wrap_angle(angle), qubit),
        GateOp::U {
            theta,
            phi,
            lambda,
            qubit,
        } => GateOp::u(theta, wrap_angle(phi), wrap_angle(lambda), qubit),
        ref other => other.clone(),
    });
    CircuitIR::from_ops(c.width(), ops)
}

fn is_zero_mod_tau(a: f64) -> bool {
    wrap_angle(a).abs() <= ANGLE_EPS
}

fn near_mod_tau(a: f64, target: f64) -> bool {
    wrap_angle(a - target).abs() <= ANGLE_EPS
}

/// Native `{RZ, SX, X}` sequence (time order) for `U(Θ, Φ, λ)`.
///
/// General case: `RZ(λ), SX, RZ(Θ + π), SX, RZ(Φ + π)`. Special rotation
/// angles collapse to shorter forms; `RZ` by a multiple of 2π is dropped.
fn lower_u(theta: f64, phi: f64, lambda: f64, qubit: usize) -> Vec<GateOp> {
    let seq = if is_zero_mod_tau(theta) {
        vec![GateOp::rz(phi + lambda, qubit)]
    } else if near_mod_tau(theta, FRAC_PI_2) {
        vec![
            GateOp::rz(lambda - FRAC_PI_2, qubit),
            GateOp::sx(qubit),
            GateOp::rz(phi + FRAC_PI_2, qubit),
        ]
    } else if near_mod_tau(theta, PI) {
        vec![
            GateOp::rz(lambda + PI, qubit),
            GateOp::x(qubit),
            GateOp::rz(phi, qubit),
        ]
    } else {
        vec![
            GateOp::rz(lambda, qubit),
            GateOp::sx(qubit),
            GateOp::rz(theta + PI, qubit),
            GateOp::sx(qubit),
            GateOp::rz(phi + PI, qubit),
        ]
    };
    seq.into_iter()
        .filter(|op| !matches!(op, GateOp::Rz { angle, .. } if is_zero_mod_tau(*angle)))
        .collect()
}

fn product(seq: &[GateOp]) -> Mat2 {
    seq.iter()
        .fold(Mat2::identity(), |acc, op| match gate_matrix(op) {
            Ok(GateMatrix::Single(g)) => g * acc,
            _ => unreachable!("lowering emits single-qubit gates only"),
        })
}

/// Checks every lowering rule against `gate_matrix` on a fixed battery of
/// angles. Runs once per process before the first lowering.
pub fn verify_lowering_rules() -> Result<()> {
    static CHECK: OnceLock<std::result::Result<(), String>> = OnceLock::new();
    CHECK
        .get_or_init(|| {
            let thetas = [
                0.0,
                FRAC_PI_2,
                PI,
                -FRAC_PI_2,
                0.731,
                -2.9,
                5.0,
                TAU + FRAC_PI_2,
            ];
            let phases = [0.0, -FRAC_PI_2, FRAC_PI_2, 1.234, -3.0, 7.5];
            for &t in &thetas {
                for &p in &phases {
                    for &l in &phases {
                        let want =
                            gate_matrix(&GateOp::u(t, p, l, 0)).map_err(|e| e.to_string())?;
                        let got = GateMatrix::Single(product(&lower_u(t, p, l, 0)));
                        if !equal_up_to_phase(&want, &got, 1e-12) {
                            return Err(format!("U({t}, {p}, {l}) lowers incorrectly"));
                        }
                    }
                }
            }
            Ok(())
        })
        .clone()
        .map_err(Error::Domain)
}

/// Rewrites a single-qubit circuit into `RZ`, `SX` and `X` only.
pub fn lower_to_native(c: &CircuitIR) -> Result<CircuitIR> {
    single_qubit_only(c, "native lowering")?;
    verify_lowering_rules()?;
    let mut out = CircuitIR::new(1)?;
    for op in c.ops() {
        match *op {
            GateOp::Rz { .. } | GateOp::Sx { .. } | GateOp::X { .. } | GateOp::Measure { .. } => {
                out.push(op.clone())?
            }
            GateOp::Ry { angle, qubit } => {
                for g in lower_u(angle, 0.0, 0.0, qubit) {
                    out.push(g)?;
                }
            }
            GateOp::U {
                theta,
                phi,
                lambda,
                qubit,
            } => {
                for g in lower_u(theta, phi, lambda, qubit) {
                    out.push(g)?;
                }
            }
            GateOp::Cnot { .. } | GateOp::Unitary2q(_) => unreachable!("checked above"),
        }
    }
    Ok(out)
}

/// Text form, one op per line, preceded by `qubits <width>`:
///
/// ```text
/// qubits 1
/// x 0
/// ry -0.5 0
/// u 1 -0.25 0.25 0
/// measure 0
/// ```
///
/// Angles use Rust's shortest round-trip formatting. `unitary2q` lists the
/// 16 entries column-major as `re im` pairs.
pub fn dump_circuit(c: &CircuitIR) -> String {
    let mut s = format!("qubits {}\n", c.width());
    for op in c.ops() {
        let _ = match op {
            GateOp::X { qubit } => writeln!(s, "x {qubit}"),
            GateOp::Sx { qubit } => writeln!(s, "sx {qubit}"),
            GateOp::Ry { angle, qubit } => writeln!(s, "ry {angle:?} {qubit}"),
            GateOp::Rz { angle, qubit } => writeln!(s, "rz {angle:?} {qubit}"),
            GateOp::U {
                theta,
                phi,
                lambda,
                qubit,
            } => {
                writeln!(s, "u {theta:?} {phi:?} {lambda:?} {qubit}")
            }
            GateOp::Cnot { control, target } => writeln!(s, "cx {control} {target}"),
            GateOp::Unitary2q(m) => {
                s.push_str("unitary2q");
                for z in m.iter() {
                    let _ = write!(s, " {:?} {:?}", z.re, z.im);
                }
                writeln!(s, " 0 1")
            }
            GateOp::Measure { qubit } => writeln!(s, "measure {qubit}"),
        };
    }
    s
}

/// Inverse of [`dump_circuit`]. Blank lines and `#` comments are skipped.
pub fn parse_circuit(text: &str) -> Result<CircuitIR> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (n, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing `qubits` header".into(),
    })?;
    let width = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["qubits", w] => w.parse().map_err(|_| Error::Parse {
            line: n,
            message: format!("bad width `{w}`"),
        })?,
        _ => {
            return Err(Error::Parse {
                line: n,
                message: "expected `qubits <width>`".into(),
            })
        }
    };
    let mut c = CircuitIR::new(width)?;

    for (n, line) in lines {
        let err = |message: String| Error::Parse { line: n, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let nums = |range: std::ops::Range<usize>| -> Result<Vec<f64>> {
            fields
                .get(range.clone())
                .ok_or_else(|| err(format!("expected {} operands", range.len())))?
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| err(format!("bad number `{f}`")))
                })
                .collect()
        };
        let qubit = |i: usize| -> Result<usize> {
            fields
                .get(i)
                .ok_or_else(|| err("missing qubit index".into()))?
                .parse()
                .map_err(|_| err(format!("bad qubit index `{}`", fields[i])))
        };
        let arity = |k: usize| -> Result<()> {
            if fields.len() == k {
                Ok(())
            } else {
                Err(err(format!("`{}` takes {} operands", fields[0], k - 1)))
            }
        };
        let op = match fields[0] {
            "x" => {
                arity(2)?;
                GateOp::x(qubit(1)?)
            }
            "sx" => {
                arity(2)?;
                GateOp::sx(qubit(1)?)
            }
            "ry" => {
                arity(3)?;
                GateOp::ry(nums(1..2)?[0], qubit(2)?)
            }
            "rz" => {
                arity(3)?;
                GateOp::rz(nums(1..2)?[0], qubit(2)?)
            }
            "u" => {
                arity(5)?;
                let a = nums(1..4)?;
                GateOp::u(a[0], a[1], a[2], qubit(4)?)
            }
            "cx" => {
                arity(3)?;
                GateOp::cnot(qubit(1)?, qubit(2)?)
            }
            "unitary2q" => {
                arity(35)?;
                let v = nums(1..33)?;
                let m = Mat4::from_iterator(v.chunks(2).map(|p| Complex64::new(p[0], p[1])));
                GateOp::unitary2q(m)?
            }
            "measure" => {
                arity(2)?;
                GateOp::measure(qubit(1)?)
            }
            other => return Err(err(format!("unknown gate `{other}`"))),
        };
        c.push(op).map_err(|e| err(e.to_string()))?;
    }
    Ok(c)
}
