//! Energy scans: configuration, evaluation, CSV and SVG output.
//!
//! Each grid point builds the scenario circuit, executes it exactly, draws
//! `shots` samples from the stream of that point (see [`crate::rng`]) and
//! evaluates the matching analytic probability. Points run in parallel;
//! output order follows the grid.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{
    build_dilation, build_msw_circuit, build_slab_circuit, msw_exact_circuit, ENCODED,
};
use crate::compile::{virtual_z_pass, CompileReport};
use crate::optim::{optimize, FidelityProblem};
use crate::physics::{
    prob_msw_adiabatic, prob_slab_with, Flavor, MatterLayer, MixingModel, OscParams, SlabProfile,
};
use crate::qsim::CircuitIR;
use crate::rng::point_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Slab,
    Earth,
    Msw,
}

/// How the MSW dilation is put on the device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Synthesis {
    /// `U₂q` applied as one two-qubit gate.
    #[default]
    Exact,
    /// Two-CNOT ansatz fitted per grid point.
    Optimized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mixing {
    /// θ₁₃ in matter combined with θ₂₃ into one effective angle per layer.
    #[default]
    Atmospheric,
    /// Plain two-flavor mixing with θ₁₃.
    TwoFlavor,
}

/// Linearly spaced energies, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl EnergyGrid {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n)
                .map(|i| {
                    if i == n - 1 {
                        self.max
                    } else {
                        self.min + (self.max - self.min) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::config(
                "energies",
                "energies must be positive and finite",
            ));
        }
        if self.points == 0 {
            return Err(Error::config("energies.points", "need at least one point"));
        }
        if self.points > 1 && self.max <= self.min {
            return Err(Error::config("energies", "max must exceed min"));
        }
        Ok(())
    }
}

impl FromStr for EnergyGrid {
    type Err = String;

    /// `min:max:points`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, points] = parts.as_slice() else {
            return Err(format!("expected min:max:points, got `{s}`"));
        };
        Ok(EnergyGrid {
            min: min
                .trim()
                .parse()
                .map_err(|_| format!("bad minimum `{min}`"))?,
            max: max
                .trim()
                .parse()
                .map_err(|_| format!("bad maximum `{max}`"))?,
            points: points
                .trim()
                .parse()
                .map_err(|_| format!("bad point count `{points}`"))?,
        })
    }
}

/// Physics fields that a config file may override.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsOverrides {
    pub theta12_deg: Option<f64>,
    pub theta13_deg: Option<f64>,
    pub theta23_deg: Option<f64>,
    /// Atmospheric splitting Δm²₃₁, eV².
    pub dm2_31: Option<f64>,
    /// Solar splitting Δm²₂₁, eV².
    pub dm2_21: Option<f64>,
    pub ye: Option<f64>,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub dx1_km: Option<f64>,
    pub dx2_km: Option<f64>,
    pub periods: Option<usize>,
    /// Density at the MSW production point, g/cm³.
    pub solar_rho: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerOverrides {
    pub restarts: Option<usize>,
    pub tol_infidelity: Option<f64>,
}

/// On-disk JSON configuration. Every field is optional.
///
/// ```json
/// {
///   "scenario": "earth",
///   "energies": { "min": 1.0, "max": 25.0, "points": 50 },
///   "shots": 4096,
///   "seed": 0,
///   "compile": true,
///   "mixing": "atmospheric",
///   "synthesis": "exact",
///   "physics": { "theta13_deg": 9.0, "theta23_deg": 45.0, "dm2_31": 0.0025 },
///   "optimizer": { "restarts": 1000, "tol_infidelity": 1e-9 },
///   "csv": "earth.csv",
///   "svg": "earth.svg"
/// }
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<Scenario>,
    pub energies: Option<EnergyGrid>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub compile: Option<bool>,
    pub synthesis: Option<Synthesis>,
    pub mixing: Option<Mixing>,
    #[serde(default)]
    pub physics: PhysicsOverrides,
    #[serde(default)]
    pub optimizer: OptimizerOverrides,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::config(
                "config",
                format!("line {}, column {}: {e}", e.line(), e.column()),
            )
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config { field, message } => Error::Config {
                field,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })
    }
}

/// Command-line overrides; any `Some` wins over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub scenario: Option<Scenario>,
    pub energies: Option<EnergyGrid>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub compile: Option<bool>,
    pub synthesis: Option<Synthesis>,
    pub mixing: Option<Mixing>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

/// Fully resolved physics inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioPhysics {
    pub theta12_deg: f64,
    pub theta13_deg: f64,
    pub theta23_deg: f64,
    pub dm2_31: f64,
    pub dm2_21: f64,
    pub ye: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub dx1_km: f64,
    pub dx2_km: f64,
    pub periods: usize,
    pub solar_rho: f64,
}

impl ScenarioPhysics {
    /// Defaults: Δm²₃₁ = 2.5e-3 eV², Δm²₂₁ = 7.5e-5 eV², Yₑ = 0.5, solar
    /// production density 150 g/cm³; slab layers 5 and 10 g/cm³ over 500 and
    /// 1000 km for five periods; Earth mantle 5 g/cm³ × 5000 km and core
    /// 10 g/cm³ × 2500 km.
    pub fn defaults(scenario: Scenario) -> Self {
        let (dx1, dx2) = match scenario {
            Scenario::Earth => (5000.0, 2500.0),
            _ => (500.0, 1000.0),
        };
        Self {
            theta12_deg: 33.5,
            theta13_deg: 9.0,
            theta23_deg: 45.0,
            dm2_31: 2.5e-3,
            dm2_21: 7.5e-5,
            ye: 0.5,
            rho1: 5.0,
            rho2: 10.0,
            dx1_km: dx1,
            dx2_km: dx2,
            periods: 5,
            solar_rho: 150.0,
        }
    }

    fn apply(&mut self, o: &PhysicsOverrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { self.$f = v; } )* };
        }
        take!(
            theta12_deg,
            theta13_deg,
            theta23_deg,
            dm2_31,
            dm2_21,
            ye,
            rho1,
            rho2,
            dx1_km,
            dx2_km,
            periods,
            solar_rho
        );
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("physics.theta12_deg", self.theta12_deg),
            ("physics.theta13_deg", self.theta13_deg),
            ("physics.theta23_deg", self.theta23_deg),
        ] {
            if !(0.0..=90.0).contains(&v) {
                return Err(Error::config(name, format!("{v} outside [0, 90] degrees")));
            }
        }
        for (name, v) in [
            ("physics.dm2_31", self.dm2_31),
            ("physics.dm2_21", self.dm2_21),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("{v} must be positive")));
            }
        }
        if !(self.ye > 0.0 && self.ye <= 1.0) {
            return Err(Error::config(
                "physics.ye",
                format!("{} outside (0, 1]", self.ye),
            ));
        }
        for (name, v) in [
            ("physics.rho1", self.rho1),
            ("physics.rho2", self.rho2),
            ("physics.dx1_km", self.dx1_km),
            ("physics.dx2_km", self.dx2_km),
            ("physics.solar_rho", self.solar_rho),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("{v} must be ≥ 0")));
            }
        }
        if self.periods == 0 {
            return Err(Error::config("physics.periods", "must be ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub tol_infidelity: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            restarts: 1000,
            tol_infidelity: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub scenario: Scenario,
    pub energies: EnergyGrid,
    pub shots: u64,
    pub seed: u64,
    pub compile: bool,
    pub synthesis: Synthesis,
    pub mixing: Mixing,
    pub physics: ScenarioPhysics,
    pub optimizer: OptimizerSettings,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl ScanConfig {
    /// Defaults for a scenario: 50-point grid over 1–25 GeV (slab, Earth)
    /// or 1–50 MeV (MSW), 4096 shots, seed 0.
    pub fn defaults(scenario: Scenario) -> Self {
        let energies = match scenario {
            Scenario::Msw => EnergyGrid {
                min: 0.001,
                max: 0.05,
                points: 50,
            },
            _ => EnergyGrid {
                min: 1.0,
                max: 25.0,
                points: 50,
            },
        };
        Self {
            scenario,
            energies,
            shots: 4096,
            seed: 0,
            compile: false,
            synthesis: Synthesis::default(),
            mixing: Mixing::default(),
            physics: ScenarioPhysics::defaults(scenario),
            optimizer: OptimizerSettings::default(),
            csv: None,
            svg: None,
        }
    }

    /// Merges defaults, then the file, then the flags.
    pub fn resolve(file: ConfigFile, flags: ConfigOverrides) -> Result<Self> {
        let scenario = flags
            .scenario
            .or(file.scenario)
            .ok_or_else(|| Error::config("scenario", "no scenario given (slab, earth or msw)"))?;
        let mut cfg = Self::defaults(scenario);
        cfg.physics.apply(&file.physics);
        if let Some(r) = file.optimizer.restarts {
            cfg.optimizer.restarts = r;
        }
        if let Some(t) = file.optimizer.tol_infidelity {
            cfg.optimizer.tol_infidelity = t;
        }
        cfg.energies = flags.energies.or(file.energies).unwrap_or(cfg.energies);
        cfg.shots = flags.shots.or(file.shots).unwrap_or(cfg.shots);
        cfg.seed = flags.seed.or(file.seed).unwrap_or(cfg.seed);
        cfg.compile = flags.compile.or(file.compile).unwrap_or(cfg.compile);
        cfg.synthesis = flags.synthesis.or(file.synthesis).unwrap_or(cfg.synthesis);
        cfg.mixing = flags.mixing.or(file.mixing).unwrap_or(cfg.mixing);
        cfg.csv = flags.csv.or(file.csv);
        cfg.svg = flags.svg.or(file.svg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.energies.validate()?;
        if self.shots == 0 {
            return Err(Error::config("shots", "must be ≥ 1"));
        }
        self.physics.validate()?;
        if self.optimizer.restarts == 0 {
            return Err(Error::config("optimizer.restarts", "must be ≥ 1"));
        }
        if self.optimizer.tol_infidelity.is_nan() || self.optimizer.tol_infidelity <= 0.0 {
            return Err(Error::config(
                "optimizer.tol_infidelity",
                "must be positive",
            ));
        }
        Ok(())
    }

    /// Mixing parameters for the scenario (θ₁₃ and Δm²₃₁ for slab/Earth,
    /// θ₁₂ and Δm²₂₁ for MSW).
    pub fn osc_params(&self) -> Result<OscParams> {
        let ph = &self.physics;
        match self.scenario {
            Scenario::Msw => OscParams::from_degrees(ph.theta12_deg, ph.dm2_21),
            _ => OscParams::from_degrees(ph.theta13_deg, ph.dm2_31),
        }
    }

    pub fn mixing_model(&self) -> MixingModel {
        match self.mixing {
            Mixing::Atmospheric => MixingModel::Atmospheric {
                theta23: self.physics.theta23_deg.to_radians(),
            },
            Mixing::TwoFlavor => MixingModel::TwoFlavor,
        }
    }

    /// Density profile of the slab or Earth scenario.
    pub fn profile(&self) -> Result<SlabProfile> {
        let ph = &self.physics;
        let first = MatterLayer::new(ph.rho1, ph.ye, ph.dx1_km)?;
        let second = MatterLayer::new(ph.rho2, ph.ye, ph.dx2_km)?;
        match self.scenario {
            Scenario::Earth => SlabProfile::new(vec![first, second, first]),
            _ => SlabProfile::periodic(vec![first, second], ph.periods),
        }
    }

    pub fn production_layer(&self) -> Result<MatterLayer> {
        MatterLayer::new(self.physics.solar_rho, self.physics.ye, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// ν_e → ν_e.
    Ee,
    /// ν_e → ν_μ.
    Emu,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Ee => "ee",
            Channel::Emu => "emu",
        }
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ee" => Ok(Channel::Ee),
            "emu" => Ok(Channel::Emu),
            other => Err(format!("unknown channel `{other}`")),
        }
    }
}

/// One probability at one energy. `channel` is set only for MSW scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub energy_gev: f64,
    pub channel: Option<Channel>,
    pub p_theory: f64,
    pub p_exact: f64,
    pub p_sampled: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
}

/// Per-point information not written to the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDiagnostics {
    pub energy_gev: f64,
    pub pulse_count: usize,
    pub compile: Option<CompileReport>,
    pub infidelity: Option<f64>,
    pub restarts_used: Option<usize>,
}

/// The circuit executed at one grid point.
#[derive(Debug, Clone)]
pub struct PointCircuit {
    pub circuit: CircuitIR,
    pub diagnostics: PointDiagnostics,
}

/// Builds the circuit for grid point `index` at `energy_gev`.
pub fn point_circuit(cfg: &ScanConfig, index: usize, energy_gev: f64) -> Result<PointCircuit> {
    let p = cfg.osc_params()?;
    let mut diag = PointDiagnostics {
        energy_gev,
        pulse_count: 0,
        compile: None,
        infidelity: None,
        restarts_used: None,
    };
    let circuit = match cfg.scenario {
        Scenario::Slab | Scenario::Earth => {
            let raw =
                build_slab_circuit(&p, cfg.mixing_model(), &cfg.profile()?, energy_gev, false)?;
            if cfg.compile {
                let (c, report) = virtual_z_pass(&raw)?;
                diag.compile = Some(report);
                c
            } else {
                raw
            }
        }
        Scenario::Msw => {
            let d = build_dilation(&p, &cfg.production_layer()?, energy_gev)?;
            match cfg.synthesis {
                Synthesis::Exact => msw_exact_circuit(&d)?,
                Synthesis::Optimized => {
                    let problem = FidelityProblem::new(d.u2q_complex())?
                        .with_restarts(cfg.optimizer.restarts)
                        .with_tolerance(cfg.optimizer.tol_infidelity);
                    let r = optimize(&problem, point_seed(cfg.seed, index as u64))?;
                    diag.infidelity = Some(r.infidelity);
                    diag.restarts_used = Some(r.restarts_used);
                    build_msw_circuit(&r.params)?
                }
            }
        }
    };
    diag.pulse_count = crate::compile::pulse_count(&circuit);
    Ok(PointCircuit {
        circuit,
        diagnostics: diag,
    })
}

fn stderr_of(p: f64, shots: u64) -> f64 {
    (p * (1.0 - p) / shots as f64).max(0.0).sqrt()
}

fn eval_point(
    cfg: &ScanConfig,
    index: usize,
    energy: f64,
) -> Result<(Vec<ScanRow>, PointDiagnostics)> {
    let PointCircuit {
        circuit,
        diagnostics,
    } = point_circuit(cfg, index, energy)?;
    let seed = point_seed(cfg.seed, index as u64);
    let (p0, shots) = circuit.run_and_sample(cfg.shots, seed)?;
    let sampled = shots.fraction("0");
    let p = cfg.osc_params()?;

    let rows = match cfg.scenario {
        Scenario::Slab | Scenario::Earth => {
            let theory = prob_slab_with(
                &p,
                cfg.mixing_model(),
                &cfg.profile()?,
                energy,
                Flavor::Muon,
            )?;
            vec![ScanRow {
                energy_gev: energy,
                channel: None,
                p_theory: theory,
                p_exact: p0,
                p_sampled: sampled,
                stderr: stderr_of(sampled, cfg.shots),
            }]
        }
        Scenario::Msw => {
            debug_assert_eq!(circuit.readout_qubit()?, ENCODED);
            let (pee, pem) = prob_msw_adiabatic(&p, &cfg.production_layer()?, energy)?;
            let se = stderr_of(sampled, cfg.shots);
            vec![
                ScanRow {
                    energy_gev: energy,
                    channel: Some(Channel::Ee),
                    p_theory: pee,
                    p_exact: p0,
                    p_sampled: sampled,
                    stderr: se,
                },
                ScanRow {
                    energy_gev: energy,
                    channel: Some(Channel::Emu),
                    p_theory: pem,
                    p_exact: 1.0 - p0,
                    p_sampled: shots.fraction("1"),
                    stderr: se,
                },
            ]
        }
    };
    Ok((rows, diagnostics))
}

/// Runs the scan and returns rows plus per-point diagnostics.
pub fn run_scan_detailed(cfg: &ScanConfig) -> Result<(ScanResult, Vec<PointDiagnostics>)> {
    cfg.validate()?;
    let energies = cfg.energies.values();
    let per_point: Vec<(Vec<ScanRow>, PointDiagnostics)> = energies
        .par_iter()
        .enumerate()
        .map(|(i, &e)| eval_point(cfg, i, e))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut diags = Vec::with_capacity(per_point.len());
    for (r, d) in per_point {
        rows.extend(r);
        diags.push(d);
    }
    Ok((ScanResult { rows }, diags))
}

pub fn run_scan(cfg: &ScanConfig) -> Result<ScanResult> {
    Ok(run_scan_detailed(cfg)?.0)
}

const HEADER: [&str; 5] = ["energy_gev", "p_theory", "p_exact", "p_sampled", "stderr"];

/// CSV text: `energy_gev,p_theory,p_exact,p_sampled,stderr`, plus a
/// trailing `channel` column when the rows carry one. Floats are written in
/// shortest round-trip form.
pub fn csv_string(result: &ScanResult) -> String {
    let with_channel = result.rows.iter().any(|r| r.channel.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = HEADER.to_vec();
    if with_channel {
        header.push("channel");
    }
    w.write_record(&header).expect("in-memory write");
    for r in &result.rows {
        let mut rec = vec![
            format!("{:?}", r.energy_gev),
            format!("{:?}", r.p_theory),
            format!("{:?}", r.p_exact),
            format!("{:?}", r.p_sampled),
            format!("{:?}", r.stderr),
        ];
        if with_channel {
            rec.push(r.channel.map(Channel::as_str).unwrap_or("").to_string());
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

pub fn emit_csv(result: &ScanResult, path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(result)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses text produced by [`csv_string`].
pub fn parse_csv(text: &str) -> Result<ScanResult> {
    let bad = |line: usize, message: String| Error::Parse { line, message };
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    let with_channel = match header.iter().collect::<Vec<_>>().as_slice() {
        h if h == HEADER => false,
        [rest @ .., "channel"] if rest == HEADER => true,
        _ => return Err(bad(1, format!("unexpected header {header:?}"))),
    };
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| bad(line, "missing field".into()))?
                .parse()
                .map_err(|_| bad(line, format!("bad number in column {}", k + 1)))
        };
        let channel = if with_channel {
            Some(rec.get(5).unwrap_or("").parse().map_err(|e| bad(line, e))?)
        } else {
            None
        };
        rows.push(ScanRow {
            energy_gev: num(0)?,
            channel,
            p_theory: num(1)?,
            p_exact: num(2)?,
            p_sampled: num(3)?,
            stderr: num(4)?,
        });
    }
    Ok(ScanResult { rows })
}

const SVG_W: f64 = 720.0;
const SVG_H: f64 = 480.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 60.0;

fn series_style(channel: Option<Channel>) -> (&'static str, &'static str) {
    match channel {
        None => ("#1f4e9c", "P(νμ → νe)"),
        Some(Channel::Ee) => ("#1f4e9c", "P(νe → νe)"),
        Some(Channel::Emu) => ("#b8322a", "P(νe → νμ)"),
    }
}

/// Standalone SVG: theory as a line per channel, sampled points as markers
/// with ±1 stderr bars. The probability axis spans [0, 1].
pub fn svg_string(result: &ScanResult) -> Result<String> {
    let mut energies: Vec<f64> = result.rows.iter().map(|r| r.energy_gev).collect();
    energies.sort_by(f64::total_cmp);
    energies.dedup();
    if energies.len() < 2 {
        return Err(Error::InvalidArgument(
            "a plot needs at least two energy points".into(),
        ));
    }
    let (emin, emax) = (energies[0], energies[energies.len() - 1]);
    let pw = SVG_W - MARGIN_L - MARGIN_R;
    let ph = SVG_H - MARGIN_T - MARGIN_B;
    let x = |e: f64| MARGIN_L + (e - emin) / (emax - emin) * pw;
    let y = |p: f64| MARGIN_T + (1.0 - p.clamp(0.0, 1.0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_L:.2}" y="{MARGIN_T:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let p = k as f64 / 5.0;
        let yy = y(p);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{yy:.2}" x2="{MARGIN_L:.2}" y2="{yy:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{p:.1}</text>"#,
            MARGIN_L - 5.0,
            MARGIN_L - 8.0,
            yy + 4.0
        );
    }
    let bottom = MARGIN_T + ph;
    for k in 0..=5 {
        let e = emin + (emax - emin) * k as f64 / 5.0;
        let xx = x(e);
        let _ = writeln!(
            s,
            r#"<line x1="{xx:.2}" y1="{bottom:.2}" x2="{xx:.2}" y2="{:.2}" stroke="black"/><text x="{xx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 5.0,
            bottom + 20.0,
            format_tick(e)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Energy [GeV]</text>"#,
        MARGIN_L + pw / 2.0,
        SVG_H - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">Probability</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0
    );

    let mut channels: Vec<Option<Channel>> = Vec::new();
    for r in &result.rows {
        if !channels.contains(&r.channel) {
            channels.push(r.channel);
        }
    }
    for (i, &ch) in channels.iter().enumerate() {
        let (color, label) = series_style(ch);
        let mut rows: Vec<&ScanRow> = result.rows.iter().filter(|r| r.channel == ch).collect();
        rows.sort_by(|a, b| a.energy_gev.total_cmp(&b.energy_gev));
        let points: Vec<String> = rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", x(r.energy_gev), y(r.p_theory)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="theory" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(s, r#"<g class="sampled" stroke="{color}" fill="{color}">"#);
        for r in &rows {
            let (xx, yy) = (x(r.energy_gev), y(r.p_sampled));
            let _ = writeln!(
                s,
                r#"<line x1="{xx:.2}" y1="{:.2}" x2="{xx:.2}" y2="{:.2}"/><circle cx="{xx:.2}" cy="{yy:.2}" r="2.5"/>"#,
                y(r.p_sampled - r.stderr),
                y(r.p_sampled + r.stderr)
            );
        }
        let _ = writeln!(s, "</g>");
        let ly = MARGIN_T + 16.0 + 18.0 * i as f64;
        let lx = MARGIN_L + pw - 150.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"/><circle cx="{:.2}" cy="{ly:.2}" r="2.5" fill="{color}"/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            lx + 24.0,
            lx + 12.0,
            lx + 30.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn format_tick(v: f64) -> String {
    if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

pub fn emit_plot(result: &ScanResult, path: &Path) -> Result<()> {
    let svg = svg_string(result)?;
    std::fs::write(path, svg).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
