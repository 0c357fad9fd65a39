//! Circuit builders for the slab, Earth and MSW scenarios.
//!
//! Slab circuits start from `|0⟩`, apply `X` to prepare `ν_μ`, then for each
//! layer `RY(−2θ_m), RZ(φ), RY(2θ_m)`, and measure. Outcome 0 is `ν_e`.
//!
//! The MSW circuit acts on `(q_A, q_B) = (qubit 0, qubit 1)`; `q_B` carries
//! the flavor and is the one measured.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::compile::virtual_z_pass;
use crate::physics::{
    effective_params, layer_evolutions, LayerEvolution, MatterLayer, MixingModel, OscParams,
    SlabProfile,
};
use crate::qsim::{CircuitIR, GateOp, Mat4};
use crate::{Error, Result};

/// Qubit indices in the MSW circuit.
pub const ANCILLA: usize = 0;
pub const ENCODED: usize = 1;

/// Slab circuit for explicit per-layer angles and phases.
pub fn slab_circuit_from_evolutions(layers: &[LayerEvolution], compile: bool) -> Result<CircuitIR> {
    let mut ops = vec![GateOp::x(0)];
    for ev in layers {
        ops.push(GateOp::ry(-2.0 * ev.theta_m, 0));
        ops.push(GateOp::rz(ev.phi, 0));
        ops.push(GateOp::ry(2.0 * ev.theta_m, 0));
    }
    ops.push(GateOp::measure(0));
    let c = CircuitIR::from_ops(1, ops)?;
    if compile {
        Ok(virtual_z_pass(&c)?.0)
    } else {
        Ok(c)
    }
}

pub fn build_slab_circuit(
    p: &OscParams,
    model: MixingModel,
    profile: &SlabProfile,
    energy_gev: f64,
    compile: bool,
) -> Result<CircuitIR> {
    slab_circuit_from_evolutions(&layer_evolutions(p, model, profile, energy_gev)?, compile)
}

/// Slab circuit through the mantle–core–mantle Earth model.
pub fn build_earth_circuit(
    p: &OscParams,
    model: MixingModel,
    ye: f64,
    energy_gev: f64,
    compile: bool,
) -> Result<CircuitIR> {
    build_slab_circuit(p, model, &SlabProfile::earth(ye)?, energy_gev, compile)
}

/// The matrices that dilate the non-unitary MSW map `Q` into a two-qubit
/// unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationSet {
    pub w_vac: Matrix2<f64>,
    pub w_mat: Matrix2<f64>,
    pub q: Matrix2<f64>,
    pub u2q: Matrix4<f64>,
}

fn mixing_weights(theta: f64) -> Matrix2<f64> {
    let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
    Matrix2::new(c2, s2, s2, c2)
}

impl DilationSet {
    /// Builds `W_vac`, `W_mat`, `Q = W_vac·W_mat` and
    /// `U₂q = [[Q, √(I−Q²)], [√(I−Q²), −Q]]` for the vacuum angle `theta`
    /// and production-point angle `theta_m`.
    pub fn from_angles(theta: f64, theta_m: f64) -> Result<Self> {
        let w_vac = mixing_weights(theta);
        let w_mat = mixing_weights(theta_m);
        let q = w_vac * w_mat;

        // Both W are doubly stochastic with eigenvectors (1, ±1)/√2, so Q
        // shares that eigenbasis with eigenvalues 1 and cos 2θ·cos 2θ_m; the
        // root block vanishes on the first.
        let minus = nalgebra::Vector2::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
        let eig_minus = (2.0 * theta).cos() * (2.0 * theta_m).cos();
        let root = |e: f64| -> Result<f64> {
            if e.is_nan() || e.abs() > 1.0 {
                return Err(Error::Domain(format!(
                    "eigenvalue {e} of Q exceeds 1 in magnitude"
                )));
            }
            Ok(((1.0 - e) * (1.0 + e)).max(0.0).sqrt())
        };
        let s = minus * minus.transpose() * root(eig_minus)?;

        let mut u2q = Matrix4::zeros();
        u2q.fixed_view_mut::<2, 2>(0, 0).copy_from(&q);
        u2q.fixed_view_mut::<2, 2>(0, 2).copy_from(&s);
        u2q.fixed_view_mut::<2, 2>(2, 0).copy_from(&s);
        u2q.fixed_view_mut::<2, 2>(2, 2).copy_from(&(-q));

        let dev = (u2q * u2q.transpose() - Matrix4::identity()).abs().max();
        if dev > 1e-12 {
            return Err(Error::Domain(format!(
                "dilation is not orthogonal (deviation {dev:e})"
            )));
        }
        Ok(Self {
            w_vac,
            w_mat,
            q,
            u2q,
        })
    }

    pub fn u2q_complex(&self) -> Mat4 {
        self.u2q.map(|x| Complex64::new(x, 0.0))
    }

    /// `√(I − Q²)`, the off-diagonal block.
    pub fn sqrt_block(&self) -> Matrix2<f64> {
        self.u2q.fixed_view::<2, 2>(0, 2).into_owned()
    }
}

pub fn build_dilation(
    p: &OscParams,
    production_layer: &MatterLayer,
    energy_gev: f64,
) -> Result<DilationSet> {
    let eff = effective_params(p, production_layer, energy_gev)?;
    DilationSet::from_angles(p.theta, eff.theta_m)
}

/// Angles of the two-CNOT ansatz: `alpha` on the ancilla, `beta` on the
/// encoded qubit, one pair per single-qubit layer.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SynthesisParams {
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
}

impl SynthesisParams {
    /// Flat order `[α₁, β₁, α₂, β₂, α₃, β₃]`.
    pub fn to_array(self) -> [f64; 6] {
        let (a, b) = (self.alpha, self.beta);
        [a[0], b[0], a[1], b[1], a[2], b[2]]
    }

    pub fn from_array(x: [f64; 6]) -> Self {
        Self {
            alpha: [x[0], x[2], x[4]],
            beta: [x[1], x[3], x[5]],
        }
    }
}

/// `(RY(α₃)⊗RY(β₃))·CX·(RY(α₂)⊗RY(β₂))·CX·(RY(α₁)⊗RY(β₁))`, then a
/// measurement of the encoded qubit.
pub fn build_msw_circuit(sp: &SynthesisParams) -> Result<CircuitIR> {
    let mut ops = Vec::with_capacity(9);
    for layer in 0..3 {
        if layer > 0 {
            ops.push(GateOp::cnot(ANCILLA, ENCODED));
        }
        ops.push(GateOp::ry(sp.alpha[layer], ANCILLA));
        ops.push(GateOp::ry(sp.beta[layer], ENCODED));
    }
    ops.push(GateOp::measure(ENCODED));
    CircuitIR::from_ops(2, ops)
}

/// Applies `U₂q` directly as one two-qubit gate, then measures the encoded
/// qubit.
pub fn msw_exact_circuit(d: &DilationSet) -> Result<CircuitIR> {
    CircuitIR::from_ops(
        2,
        [
            GateOp::unitary2q(d.u2q_complex())?,
            GateOp::measure(ENCODED),
        ],
    )
}

fn ry_real(a: f64) -> Matrix2<f64> {
    let (s, c) = (a / 2.0).sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Real 4×4 matrix of the ansatz, computed without the circuit machinery.
pub fn ansatz_unitary(sp: &SynthesisParams) -> Matrix4<f64> {
    let cx = Matrix4::new(
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, 1.0, 0.0,
    );
    let layer = |i: usize| ry_real(sp.alpha[i]).kronecker(&ry_real(sp.beta[i]));
    layer(2) * cx * layer(1) * cx * layer(0)
}
