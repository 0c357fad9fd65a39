//! Two-flavor oscillation probabilities in matter.
//!
//! Units: angles in radians, mass splittings and the matter potential `A`
//! in eV², energies in GeV, lengths in km, densities in g/cm³.
//!
//! Flavor basis: `ν_e = (1, 0)ᵀ`, `ν_μ = (0, 1)ᵀ`. The mixing matrix is
//! `𝒰(θ) = [[cos θ, sin θ], [−sin θ, cos θ]]` and a constant-density layer
//! evolves the flavor amplitudes by `𝒰(θ_m)·diag(e^{−iφ/2}, e^{iφ/2})·𝒰†(θ_m)`.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qsim::Mat2;
use crate::{Error, Result};

/// Fermi constant, GeV⁻².
pub const FERMI_CONSTANT: f64 = 1.1663787e-5;
/// Nucleon mass in grams (atomic mass unit).
pub const NUCLEON_MASS_G: f64 = 1.660_539_066_60e-24;
/// ħc in GeV·cm.
pub const HBAR_C_GEV_CM: f64 = 1.973_269_804e-14;

/// `A / (Yₑ ρ E)` in eV² per (g/cm³ · GeV): `2√2 G_F (ħc)³ / mₙ`, times 1e18
/// to go from GeV² to eV².
pub const MATTER_FACTOR: f64 =
    2.0 * SQRT_2 * FERMI_CONSTANT * (HBAR_C_GEV_CM * HBAR_C_GEV_CM * HBAR_C_GEV_CM)
        / NUCLEON_MASS_G
        * 1e18;

/// `φ / (Δm² Δx / E)` in rad·GeV/(eV²·km): `Δm² L / 2E` with
/// `1 km = 1e5 cm / ħc` and `1 GeV = 1e9 eV`.
pub const PHASE_FACTOR: f64 = 1e5 / (HBAR_C_GEV_CM * 1e9) / (2.0 * 1e9);

// Compile-time guard on the unit algebra.
const _: () = {
    assert!(MATTER_FACTOR > 1.525e-4 && MATTER_FACTOR < 1.528e-4);
    assert!(PHASE_FACTOR > 2.5337 && PHASE_FACTOR < 2.5340);
};

/// Physical constants and the two conversion factors derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysConstants {
    pub gf: f64,
    pub mn: f64,
    pub hbar_c: f64,
    pub phase_factor: f64,
    pub matter_factor: f64,
}

pub const CONSTANTS: PhysConstants = PhysConstants {
    gf: FERMI_CONSTANT,
    mn: NUCLEON_MASS_G,
    hbar_c: HBAR_C_GEV_CM,
    phase_factor: PHASE_FACTOR,
    matter_factor: MATTER_FACTOR,
};

/// Vacuum mixing angle and mass-squared splitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscParams {
    pub theta: f64,
    pub dm2: f64,
}

impl OscParams {
    pub fn new(theta: f64, dm2: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "mixing angle {theta} outside [0, π/2]"
            )));
        }
        if !(dm2 > 0.0 && dm2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Δm² must be positive, got {dm2}"
            )));
        }
        Ok(Self { theta, dm2 })
    }

    pub fn from_degrees(theta_deg: f64, dm2: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), dm2)
    }
}

/// A layer of constant density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatterLayer {
    pub rho: f64,
    pub ye: f64,
    pub length_km: f64,
}

impl MatterLayer {
    pub fn new(rho: f64, ye: f64, length_km: f64) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("density {rho} must be ≥ 0")));
        }
        if !(ye > 0.0 && ye <= 1.0) {
            return Err(Error::InvalidArgument(format!("Yₑ {ye} outside (0, 1]")));
        }
        if !(length_km >= 0.0 && length_km.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "layer length {length_km} must be ≥ 0"
            )));
        }
        Ok(Self { rho, ye, length_km })
    }

    pub fn vacuum(length_km: f64) -> Result<Self> {
        Self::new(0.0, 0.5, length_km)
    }
}

/// Piecewise-constant density profile, in propagation order.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabProfile {
    layers: Vec<MatterLayer>,
    period_count: Option<usize>,
}

impl SlabProfile {
    pub fn new(layers: Vec<MatterLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("profile has no layers".into()));
        }
        Ok(Self {
            layers,
            period_count: None,
        })
    }

    /// `periods` repetitions of `period` (an even number of layers).
    pub fn periodic(period: Vec<MatterLayer>, periods: usize) -> Result<Self> {
        if period.is_empty() || !period.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "a period needs an even, nonzero number of layers, got {}",
                period.len()
            )));
        }
        if periods == 0 {
            return Err(Error::InvalidArgument("period count must be ≥ 1".into()));
        }
        Ok(Self {
            layers: period,
            period_count: Some(periods),
        })
    }

    /// Mantle–core–mantle model through the Earth's center.
    pub fn earth(ye: f64) -> Result<Self> {
        let mantle = MatterLayer::new(5.0, ye, 5000.0)?;
        let core = MatterLayer::new(10.0, ye, 2500.0)?;
        Self::new(vec![mantle, core, mantle])
    }

    pub fn period_count(&self) -> Option<usize> {
        self.period_count
    }

    /// All layers in order, with periods unrolled.
    pub fn layers(&self) -> Vec<MatterLayer> {
        let reps = self.period_count.unwrap_or(1);
        self.layers
            .iter()
            .copied()
            .cycle()
            .take(self.layers.len() * reps)
            .collect()
    }

    pub fn total_length_km(&self) -> f64 {
        self.layers().iter().map(|l| l.length_km).sum()
    }
}

/// Mixing angle and splitting of the matter Hamiltonian in one layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub theta_m: f64,
    pub dm2_m: f64,
    pub beta: f64,
    pub a_ev2: f64,
}

impl EffectiveParams {
    pub fn sin_2theta_m(&self) -> f64 {
        (2.0 * self.theta_m).sin()
    }

    pub fn cos_2theta_m(&self) -> f64 {
        (2.0 * self.theta_m).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    Electron,
    Muon,
}

impl Flavor {
    pub fn amplitudes(self) -> [Complex64; 2] {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        match self {
            Flavor::Electron => [one, zero],
            Flavor::Muon => [zero, one],
        }
    }
}

fn check_energy(energy_gev: f64) -> Result<()> {
    if energy_gev > 0.0 && energy_gev.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "energy must be positive, got {energy_gev} GeV"
        )))
    }
}

/// Matter potential `A = 2√2 G_F Yₑ ρ E / mₙ` in eV².
pub fn matter_potential(layer: &MatterLayer, energy_gev: f64) -> Result<f64> {
    check_energy(energy_gev)?;
    Ok(MATTER_FACTOR * layer.ye * layer.rho * energy_gev)
}

/// Effective parameters for a given `β = A/Δm²`.
///
/// `θ_m = ½ atan2(sin 2θ, cos 2θ − β)`, which keeps `θ_m ∈ [0, π/2]` with
/// `cos 2θ_m` carrying the sign of `cos 2θ − β`.
pub fn effective_params_from_beta(p: &OscParams, beta: f64) -> Result<EffectiveParams> {
    let (s2, c2) = (2.0 * p.theta).sin_cos();
    let x = c2 - beta;
    let d = x.hypot(s2);
    if d == 0.0 {
        return Err(Error::Domain(format!(
            "mixing angle undefined at β = cos 2θ = {c2} with sin 2θ = 0"
        )));
    }
    Ok(EffectiveParams {
        theta_m: 0.5 * s2.atan2(x),
        dm2_m: p.dm2 * d,
        beta,
        a_ev2: beta * p.dm2,
    })
}

pub fn effective_params(
    p: &OscParams,
    layer: &MatterLayer,
    energy_gev: f64,
) -> Result<EffectiveParams> {
    let a = matter_potential(layer, energy_gev)?;
    effective_params_from_beta(p, a / p.dm2)
}

/// Propagation phase `φ = Δm²_m Δx / 2E` (natural units) in radians.
pub fn phase(dm2_m: f64, length_km: f64, energy_gev: f64) -> Result<f64> {
    check_energy(energy_gev)?;
    Ok(PHASE_FACTOR * dm2_m * length_km / energy_gev)
}

/// `P(ν_μ → ν_e) = sin² 2θ_m · sin²(φ/2)` across one layer.
pub fn prob_constant_density(p: &OscParams, layer: &MatterLayer, energy_gev: f64) -> Result<f64> {
    let eff = effective_params(p, layer, energy_gev)?;
    let phi = phase(eff.dm2_m, layer.length_km, energy_gev)?;
    Ok((eff.sin_2theta_m() * (phi / 2.0).sin()).powi(2))
}

/// `θ_m = asin(sin θ₂₃ · sin 2θ₁₃ₘ)`.
pub fn atmospheric_effective_angle(theta23: f64, theta13_m: f64) -> f64 {
    (theta23.sin() * (2.0 * theta13_m).sin())
        .clamp(-1.0, 1.0)
        .asin()
}

/// How a layer's propagator angle is obtained from the matter parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MixingModel {
    /// `θ_m` from the matter-modified mixing of `OscParams::theta`.
    TwoFlavor,
    /// `OscParams::theta` is θ₁₃; each layer uses
    /// [`atmospheric_effective_angle`] of the matter-modified θ₁₃ₘ.
    Atmospheric { theta23: f64 },
}

/// Rotation angle and phase of one layer's propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerEvolution {
    pub theta_m: f64,
    pub phi: f64,
}

pub fn layer_evolution(
    p: &OscParams,
    model: MixingModel,
    layer: &MatterLayer,
    energy_gev: f64,
) -> Result<LayerEvolution> {
    let eff = effective_params(p, layer, energy_gev)?;
    let theta_m = match model {
        MixingModel::TwoFlavor => eff.theta_m,
        MixingModel::Atmospheric { theta23 } => atmospheric_effective_angle(theta23, eff.theta_m),
    };
    Ok(LayerEvolution {
        theta_m,
        phi: phase(eff.dm2_m, layer.length_km, energy_gev)?,
    })
}

pub fn layer_evolutions(
    p: &OscParams,
    model: MixingModel,
    profile: &SlabProfile,
    energy_gev: f64,
) -> Result<Vec<LayerEvolution>> {
    profile
        .layers()
        .iter()
        .map(|l| layer_evolution(p, model, l, energy_gev))
        .collect()
}

/// `𝒰(θ)`.
pub fn mixing_matrix(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::new(c.into(), s.into(), (-s).into(), c.into())
}

/// `diag(e^{−iφ/2}, e^{iφ/2})`.
pub fn phase_matrix(phi: f64) -> Mat2 {
    let z = Complex64::new(0.0, 0.0);
    Mat2::new(
        Complex64::from_polar(1.0, -phi / 2.0),
        z,
        z,
        Complex64::from_polar(1.0, phi / 2.0),
    )
}

/// `𝒰(θ_m)·diag(e^{−iφ/2}, e^{iφ/2})·𝒰†(θ_m)`.
pub fn layer_propagator(ev: LayerEvolution) -> Mat2 {
    let u = mixing_matrix(ev.theta_m);
    u * phase_matrix(ev.phi) * u.adjoint()
}

/// Ordered product of layer propagators, first layer rightmost.
pub fn slab_propagator(evolutions: &[LayerEvolution]) -> Mat2 {
    evolutions
        .iter()
        .fold(Mat2::identity(), |acc, &ev| layer_propagator(ev) * acc)
}

/// Flavor amplitudes after crossing `profile`, starting in `initial`.
pub fn slab_amplitudes(
    p: &OscParams,
    model: MixingModel,
    profile: &SlabProfile,
    energy_gev: f64,
    initial: Flavor,
) -> Result<[Complex64; 2]> {
    let m = slab_propagator(&layer_evolutions(p, model, profile, energy_gev)?);
    let [a, b] = initial.amplitudes();
    Ok([m[(0, 0)] * a + m[(0, 1)] * b, m[(1, 0)] * a + m[(1, 1)] * b])
}

/// `P(initial → ν_e)` across a slab profile with two-flavor mixing.
pub fn prob_slab(
    p: &OscParams,
    profile: &SlabProfile,
    energy_gev: f64,
    initial: Flavor,
) -> Result<f64> {
    prob_slab_with(p, MixingModel::TwoFlavor, profile, energy_gev, initial)
}

pub fn prob_slab_with(
    p: &OscParams,
    model: MixingModel,
    profile: &SlabProfile,
    energy_gev: f64,
    initial: Flavor,
) -> Result<f64> {
    let [e, _] = slab_amplitudes(p, model, profile, energy_gev, initial)?;
    Ok(e.norm_sqr())
}

/// Adiabatic MSW survival and conversion `(P_ee, P_eμ)` for a neutrino
/// produced in `production_layer`:
/// `P_ee = ½(1 + cos 2θ · cos 2θ_m)`.
pub fn prob_msw_adiabatic(
    p: &OscParams,
    production_layer: &MatterLayer,
    energy_gev: f64,
) -> Result<(f64, f64)> {
    let eff = effective_params(p, production_layer, energy_gev)?;
    Ok(msw_from_angles(p.theta, eff.theta_m))
}

/// `(P_ee, P_eμ)` from the vacuum and production-point mixing angles.
pub fn msw_from_angles(theta: f64, theta_m: f64) -> (f64, f64) {
    let pee = 0.5 * (1.0 + (2.0 * theta).cos() * (2.0 * theta_m).cos());
    (pee, 1.0 - pee)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// V = √2 G_F Nₑ computed in eV with Nₑ from Avogadro's number;
    /// A = 2 V E. Independent of the GeV/cm route used in the crate.
    fn potential_oracle(rho: f64, ye: f64, e_gev: f64) -> f64 {
        let gf_ev = 1.1663787e-23; // eV⁻²
        let hbarc_ev_cm: f64 = 1.973269804e-5;
        let avogadro = 6.02214076e23;
        let v = 2f64.sqrt() * gf_ev * hbarc_ev_cm.powi(3) * avogadro * ye * rho;
        2.0 * v * e_gev * 1e9
    }

    #[test]
    fn derived_factors() {
        assert!(close(
            CONSTANTS.matter_factor / potential_oracle(1.0, 1.0, 1.0),
            1.0,
            1e-6
        ));
        // 1 km / ħc in eV⁻¹, over 2·1e9 eV.
        let oracle = 1e3 / 1.973269804e-7 / 2e9;
        assert!(close(CONSTANTS.phase_factor, oracle, 1e-12));
        assert!(close(CONSTANTS.phase_factor, 2.534, 1e-3));
    }

    #[test]
    fn matter_potential_values() {
        let vac = MatterLayer::vacuum(100.0).unwrap();
        assert_eq!(matter_potential(&vac, 3.0).unwrap(), 0.0);
        let l = MatterLayer::new(5.0, 0.5, 0.0).unwrap();
        let a = matter_potential(&l, 10.0).unwrap();
        // Frozen from the oracle: 3.8162331e-3 eV².
        assert!(close(a, 3.816_233_1e-3, 1e-9), "{a}");
        // The oracle takes the nucleon mass as 1/N_A grams, which differs from
        // the atomic mass unit in the tenth digit.
        let o = potential_oracle(5.0, 0.5, 10.0);
        assert!(close(a / o, 1.0, 1e-8), "{a} vs {o}");
        assert_eq!(matter_potential(&l, 20.0).unwrap(), 2.0 * a);
        assert!(matches!(
            matter_potential(&l, 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn vacuum_limit() {
        let p = OscParams::new(0.3, 2.5e-3).unwrap();
        let e = effective_params_from_beta(&p, 0.0).unwrap();
        assert!(close(e.theta_m, 0.3, 1e-15));
        assert!(close(e.dm2_m, 2.5e-3, 1e-18));
    }

    #[test]
    fn resonance() {
        let p = OscParams::from_degrees(9.0, 2.5e-3).unwrap();
        let beta = (2.0 * p.theta).cos();
        let e = effective_params_from_beta(&p, beta).unwrap();
        assert_eq!(e.sin_2theta_m(), 1.0);
        assert_eq!(e.theta_m, FRAC_PI_4);
        assert!(close(e.dm2_m, p.dm2 * (2.0 * p.theta).sin(), 1e-18));
    }

    #[test]
    fn above_resonance_angle_exceeds_quarter_pi() {
        // At β = 2 cos 2θ the discriminant is exactly 1 and θ_m = π/2 − θ.
        let p = OscParams::from_degrees(9.0, 2.5e-3).unwrap();
        let e = effective_params_from_beta(&p, 2.0 * (2.0 * p.theta).cos()).unwrap();
        assert!(e.theta_m > FRAC_PI_4);
        assert!(close(e.theta_m, 1.413_716_694_115_407, 1e-14));
        assert!(close(e.sin_2theta_m(), 0.309_016_994_374_947_45, 1e-14));
        assert!(close(e.dm2_m, p.dm2, 1e-17));
    }

    #[test]
    fn degenerate_point_is_an_error() {
        let p = OscParams::new(0.0, 1e-3).unwrap();
        assert!(matches!(
            effective_params_from_beta(&p, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn phase_values() {
        assert_eq!(phase(2.5e-3, 0.0, 5.0).unwrap(), 0.0);
        let phi = phase(2.5e-3, 500.0, 5.0).unwrap();
        assert!(close(phi, 0.633_466_339_709_924_5, 1e-12), "{phi}");
        assert!(close(phase(2.5e-3, 1000.0, 5.0).unwrap(), 2.0 * phi, 1e-15));
        assert!(close(phase(2.5e-3, 500.0, 10.0).unwrap(), phi / 2.0, 1e-15));
        assert!(phase(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn constant_density_limits() {
        let p = OscParams::new(0.5, 2.5e-3).unwrap();
        let empty = MatterLayer::new(3.0, 0.5, 0.0).unwrap();
        assert_eq!(prob_constant_density(&p, &empty, 2.0).unwrap(), 0.0);
        // Maximal mixing in vacuum, length chosen so φ = π.
        let p = OscParams::new(FRAC_PI_4, 2.5e-3).unwrap();
        let l = PI / (PHASE_FACTOR * 2.5e-3 / 1.0);
        let layer = MatterLayer::vacuum(l).unwrap();
        assert!(close(
            prob_constant_density(&p, &layer, 1.0).unwrap(),
            1.0,
            1e-15
        ));
    }

    #[test]
    fn one_layer_slab_equals_constant_density() {
        let p = OscParams::new(0.6, 2.5e-3).unwrap();
        let layer = MatterLayer::new(7.0, 0.5, 3200.0).unwrap();
        let profile = SlabProfile::new(vec![layer]).unwrap();
        let a = prob_slab(&p, &profile, 4.0, Flavor::Muon).unwrap();
        let b = prob_constant_density(&p, &layer, 4.0).unwrap();
        assert!(close(a, b, 1e-12));
    }

    #[test]
    fn vacuum_layers_concatenate() {
        let p = OscParams::new(0.4, 2.5e-3).unwrap();
        let lengths = [300.0, 1200.0, 50.0, 2000.0];
        let layers = lengths
            .iter()
            .map(|&l| MatterLayer::vacuum(l).unwrap())
            .collect();
        let profile = SlabProfile::new(layers).unwrap();
        let e = 3.3;
        let phi = phase(p.dm2, lengths.iter().sum(), e).unwrap();
        let expect = ((2.0 * p.theta).sin() * (phi / 2.0).sin()).powi(2);
        assert!(close(
            prob_slab(&p, &profile, e, Flavor::Muon).unwrap(),
            expect,
            1e-12
        ));
    }

    #[test]
    fn periodic_profile_unrolls() {
        let a = MatterLayer::new(5.0, 0.5, 500.0).unwrap();
        let b = MatterLayer::new(10.0, 0.5, 1000.0).unwrap();
        let prof = SlabProfile::periodic(vec![a, b], 5).unwrap();
        assert_eq!(prof.layers().len(), 10);
        assert_eq!(prof.layers()[9], b);
        assert_eq!(prof.total_length_km(), 7500.0);
        assert!(SlabProfile::periodic(vec![a], 5).is_err());
        assert!(SlabProfile::periodic(vec![a, b], 0).is_err());
        assert!(SlabProfile::new(vec![]).is_err());
    }

    #[test]
    fn msw_limits() {
        let p = OscParams::from_degrees(33.5, 7.5e-5).unwrap();
        let vac = MatterLayer::vacuum(0.0).unwrap();
        let (pee, pem) = prob_msw_adiabatic(&p, &vac, 0.01).unwrap();
        let c2 = (2.0 * p.theta).cos();
        assert!(close(pee, 0.5 * (1.0 + c2 * c2), 1e-15));
        assert!(close(pee + pem, 1.0, 1e-15));
        // θ_m → π/2: P_ee → sin²θ.
        let (pee_inf, _) = msw_from_angles(p.theta, FRAC_PI_2);
        assert!(close(pee_inf, 0.304_634_435_755_363_1, 1e-15));
        let dense = MatterLayer::new(1e9, 0.5, 0.0).unwrap();
        let (pee_dense, _) = prob_msw_adiabatic(&p, &dense, 10.0).unwrap();
        assert!(close(pee_dense, p.theta.sin().powi(2), 1e-9));
    }

    #[test]
    fn atmospheric_angle() {
        let q = FRAC_PI_4;
        assert!(close(atmospheric_effective_angle(q, q), q, 1e-15));
        assert_eq!(atmospheric_effective_angle(q, 0.0), 0.0);
        // At the θ₁₃ resonance energy sin 2θ₁₃ₘ = 1.
        let p = OscParams::from_degrees(9.0, 2.5e-3).unwrap();
        let layer = MatterLayer::new(5.0, 0.5, 0.0).unwrap();
        let e_res = (2.0 * p.theta).cos() * p.dm2 / (MATTER_FACTOR * 0.5 * 5.0);
        let eff = effective_params(&p, &layer, e_res).unwrap();
        assert!(close(eff.sin_2theta_m(), 1.0, 1e-12));
        assert!(close(atmospheric_effective_angle(q, eff.theta_m), q, 1e-6));
    }

    #[test]
    fn input_validation() {
        assert!(OscParams::new(-0.1, 1.0).is_err());
        assert!(OscParams::new(0.1, 0.0).is_err());
        assert!(MatterLayer::new(-1.0, 0.5, 1.0).is_err());
        assert!(MatterLayer::new(1.0, 0.0, 1.0).is_err());
        assert!(MatterLayer::new(1.0, 0.5, -1.0).is_err());
    }
}
