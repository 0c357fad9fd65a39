//! Fitting the two-CNOT ansatz to a target two-qubit unitary.
//!
//! The objective is the infidelity `1 − F` with
//! `F = |Tr(U_T† U_R)|² / 16`, minimized over the six `RY` angles inside a
//! box, from random starting points. The gradient is exact: each `RY(a)`
//! satisfies `d RY(a)/da = ½ RY(a + π)`, and the trace overlap is linear in
//! every gate, so `∂ Tr(U_T† U_R)/∂x_k = ½ Tr(U_T† U_R(x + π e_k))`.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::circuits::{ansatz_unitary, SynthesisParams};
use crate::qsim::{unitarity_deviation4, Mat4};
use crate::rng;
use crate::{Error, Result};

const N: usize = 6;
type Vec6 = SVector<f64, N>;
type Mat6 = SMatrix<f64, N, N>;

/// Local minimizer used inside each restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalMethod {
    /// BFGS on the box-projected gradient with a projected Armijo search.
    #[default]
    ProjectedBfgs,
    /// Derivative-free compass search.
    PatternSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityProblem {
    pub target: Mat4,
    pub bounds: (f64, f64),
    pub restarts: usize,
    pub init_range: (f64, f64),
    pub tol_infidelity: f64,
    pub method: LocalMethod,
}

impl FidelityProblem {
    /// Defaults: box `(−π, π)`, 1000 restarts, starts in `(−1, 1)`, stop at
    /// infidelity 1e-9.
    pub fn new(target: Mat4) -> Result<Self> {
        let dev = unitarity_deviation4(&target);
        if dev > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "target is not unitary (deviation {dev:e})"
            )));
        }
        Ok(Self {
            target,
            bounds: (-PI, PI),
            restarts: 1000,
            init_range: (-1.0, 1.0),
            tol_infidelity: 1e-9,
            method: LocalMethod::default(),
        })
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol_infidelity = tol;
        self
    }

    pub fn with_method(mut self, method: LocalMethod) -> Self {
        self.method = method;
        self
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds;
        if lo.partial_cmp(&hi) != Some(Ordering::Less) {
            return Err(Error::InvalidArgument(format!("empty box [{lo}, {hi}]")));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be ≥ 1".into()));
        }
        let (a, b) = self.init_range;
        if a.partial_cmp(&b) != Some(Ordering::Less) {
            return Err(Error::InvalidArgument("empty initial range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub params: SynthesisParams,
    pub infidelity: f64,
    pub restarts_used: usize,
    pub converged: bool,
}

fn params(x: &Vec6) -> SynthesisParams {
    SynthesisParams::from_array([x[0], x[1], x[2], x[3], x[4], x[5]])
}

fn overlap(target: &Mat4, x: &Vec6) -> Complex64 {
    let r = ansatz_unitary(&params(x));
    target
        .iter()
        .zip(r.iter())
        .map(|(t, &u)| t.conj() * u)
        .sum()
}

/// `F = |Tr(U_T† U_R)|² / 16`, clamped to `[0, 1]`.
pub fn fidelity(u_t: &Mat4, sp: &SynthesisParams) -> f64 {
    let x = Vec6::from(sp.to_array());
    (overlap(u_t, &x).norm_sqr() / 16.0).clamp(0.0, 1.0)
}

pub fn infidelity(u_t: &Mat4, sp: &SynthesisParams) -> f64 {
    1.0 - fidelity(u_t, sp)
}

/// Infidelity and its exact gradient with respect to `[α₁, β₁, α₂, β₂, α₃, β₃]`.
pub fn infidelity_gradient(u_t: &Mat4, sp: &SynthesisParams) -> (f64, [f64; 6]) {
    let (f, g) = value_and_gradient(u_t, &Vec6::from(sp.to_array()));
    (f, g.into())
}

fn value_and_gradient(target: &Mat4, x: &Vec6) -> (f64, Vec6) {
    let t = overlap(target, x);
    let f = 1.0 - (t.norm_sqr() / 16.0).min(1.0);
    let mut g = Vec6::zeros();
    for k in 0..N {
        let mut shifted = *x;
        shifted[k] += PI;
        let dt = 0.5 * overlap(target, &shifted);
        g[k] = -(t.conj() * dt).re / 8.0;
    }
    (f, g)
}

fn project(x: &Vec6, (lo, hi): (f64, f64)) -> Vec6 {
    x.map(|v| v.clamp(lo, hi))
}

/// Components pinned at a bound with the gradient pushing outward.
fn active_set(x: &Vec6, g: &Vec6, (lo, hi): (f64, f64)) -> [bool; N] {
    std::array::from_fn(|i| (x[i] <= lo && g[i] > 0.0) || (x[i] >= hi && g[i] < 0.0))
}

const MAX_ITER: usize = 300;
const F_FLOOR: f64 = 1e-15;

fn projected_bfgs(target: &Mat4, x0: Vec6, bounds: (f64, f64)) -> (Vec6, f64) {
    let mut x = project(&x0, bounds);
    let (mut f, mut g) = value_and_gradient(target, &x);
    let mut h = Mat6::identity();
    let mut fresh = true;

    for _ in 0..MAX_ITER {
        if f <= F_FLOOR {
            break;
        }
        let active = active_set(&x, &g, bounds);
        let mut pg = g;
        for i in 0..N {
            if active[i] {
                pg[i] = 0.0;
            }
        }
        if pg.amax() < 1e-13 {
            break;
        }
        let mut d = -(h * pg);
        for i in 0..N {
            if active[i] {
                d[i] = 0.0;
            }
        }
        if d.dot(&pg) >= 0.0 {
            h = Mat6::identity();
            fresh = true;
            d = -pg;
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let xn = project(&(x + d * step), bounds);
            let (fnew, gnew) = value_and_gradient(target, &xn);
            if fnew <= f + 1e-4 * g.dot(&(xn - x)) {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            if fresh {
                break;
            }
            h = Mat6::identity();
            fresh = true;
            continue;
        };

        let s = xn - x;
        let y = gnew - g;
        let sy = s.dot(&y);
        if sy > 1e-20 {
            if fresh {
                h = Mat6::identity() * (sy / y.dot(&y));
            }
            let rho = 1.0 / sy;
            let left = Mat6::identity() - s * y.transpose() * rho;
            h = left * h * left.transpose() + s * s.transpose() * rho;
            fresh = false;
        }
        let stalled = s.amax() < 1e-15;
        x = xn;
        f = fnew;
        g = gnew;
        if stalled {
            break;
        }
    }
    (x, f)
}

fn pattern_search(target: &Mat4, x0: Vec6, bounds: (f64, f64)) -> (Vec6, f64) {
    let value = |x: &Vec6| 1.0 - (overlap(target, x).norm_sqr() / 16.0).min(1.0);
    let mut x = project(&x0, bounds);
    let mut f = value(&x);
    let mut step = 0.5;
    let mut evals = 0usize;
    while step > 1e-11 && f > F_FLOOR && evals < 50_000 {
        let mut improved = false;
        for i in 0..N {
            for sign in [1.0, -1.0] {
                let mut trial = x;
                trial[i] = (trial[i] + sign * step).clamp(bounds.0, bounds.1);
                let ft = value(&trial);
                evals += 1;
                if ft < f {
                    x = trial;
                    f = ft;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, f)
}

/// Runs up to `problem.restarts` local minimizations from uniform random
/// starts and keeps the best; stops early once the tolerance is met.
pub fn optimize(problem: &FidelityProblem, seed: u64) -> Result<OptimResult> {
    problem.validate()?;
    let mut rng = rng::optimizer_rng(seed);
    let (lo, hi) = problem.init_range;
    let mut best: Option<(Vec6, f64)> = None;
    let mut used = 0;

    for _ in 0..problem.restarts {
        used += 1;
        let x0 = Vec6::from_fn(|_, _| rng::uniform(&mut rng, lo, hi));
        let (x, f) = match problem.method {
            LocalMethod::ProjectedBfgs => projected_bfgs(&problem.target, x0, problem.bounds),
            LocalMethod::PatternSearch => pattern_search(&problem.target, x0, problem.bounds),
        };
        if best.as_ref().is_none_or(|(_, bf)| f < *bf) {
            best = Some((x, f));
        }
        if f <= problem.tol_infidelity {
            break;
        }
    }

    let (x, f) = best.expect("at least one restart");
    let f = f.max(0.0);
    Ok(OptimResult {
        params: params(&x),
        infidelity: f,
        restarts_used: used,
        converged: f <= problem.tol_infidelity,
    })
}
