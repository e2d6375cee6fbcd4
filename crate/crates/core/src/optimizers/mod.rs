//! Classical minimizers behind one budgeted interface.
//!
//! Every method draws objective values and gradients through an
//! [`Evaluator`] that charges each value as one evaluation and each gradient
//! at its declared cost, refuses work beyond the budget, and tracks the
//! best point seen. Methods therefore return the incumbent, not the last
//! iterate.

mod adam;
mod cg;
mod line_search;
mod nelder_mead;
mod powell;
mod quasi_newton;
mod spsa;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use spsa::spsa_gradient_estimate;

/// Implemented optimization methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spsa,
    Adam,
    Amsgrad,
    NelderMead,
    Powell,
    Cg,
    Bfgs,
    Lbfgs,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Spsa,
        Method::Adam,
        Method::Amsgrad,
        Method::NelderMead,
        Method::Powell,
        Method::Cg,
        Method::Bfgs,
        Method::Lbfgs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Spsa => "spsa",
            Method::Adam => "adam",
            Method::Amsgrad => "amsgrad",
            Method::NelderMead => "nelder_mead",
            Method::Powell => "powell",
            Method::Cg => "cg",
            Method::Bfgs => "bfgs",
            Method::Lbfgs => "lbfgs",
        }
    }

    pub fn is_gradient_based(self) -> bool {
        matches!(
            self,
            Method::Adam | Method::Amsgrad | Method::Cg | Method::Bfgs | Method::Lbfgs
        )
    }

    pub fn valid_names() -> String {
        Method::ALL.map(Method::name).join(", ")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', ' '], "_");
        let key = match key.as_str() {
            "l_bfgs" => "lbfgs",
            "neldermead" => "nelder_mead",
            other => other,
        };
        if let Some(m) = Method::ALL.into_iter().find(|m| m.name() == key) {
            return Ok(m);
        }
        let hint = if matches!(key, "cobyla" | "slsqp") {
            format!("`{s}` is not implemented (constrained-optimization method); ")
        } else {
            format!("unknown optimizer `{s}`; ")
        };
        Err(Error::contract(format!(
            "{hint}valid methods are: {}",
            Method::valid_names()
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpsaParams {
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Stability constant as a fraction of the iteration count.
    pub stability_fraction: f64,
    /// Iterations between evaluations of the iterate itself.
    pub center_every: u64,
}

impl Default for SpsaParams {
    fn default() -> Self {
        Self {
            a: 0.2,
            c: 0.1,
            alpha: 0.602,
            gamma: 0.101,
            stability_fraction: 0.1,
            center_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NelderMeadParams {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    pub initial_step: f64,
    pub value_tol: f64,
    /// Largest vertex distance from the best vertex at convergence.
    pub point_tol: f64,
}

impl Default for NelderMeadParams {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.25,
            value_tol: 1e-8,
            point_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowellParams {
    pub line_tol: f64,
    pub value_tol: f64,
}

impl Default for PowellParams {
    fn default() -> Self {
        Self {
            line_tol: 1e-6,
            value_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CgParams {
    pub armijo: f64,
    pub grad_tol: f64,
}

impl Default for CgParams {
    fn default() -> Self {
        Self {
            armijo: 1e-4,
            grad_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuasiNewtonParams {
    pub c1: f64,
    pub c2: f64,
    /// L-BFGS history length.
    pub memory: usize,
    pub grad_tol: f64,
}

impl Default for QuasiNewtonParams {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            c2: 0.9,
            memory: 10,
            grad_tol: 1e-9,
        }
    }
}

/// Per-method hyperparameters, each overridable by name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub spsa: SpsaParams,
    pub adam: AdamParams,
    pub amsgrad: AdamParams,
    pub nelder_mead: NelderMeadParams,
    pub powell: PowellParams,
    pub cg: CgParams,
    pub bfgs: QuasiNewtonParams,
    pub lbfgs: QuasiNewtonParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Maximum objective evaluations; gradients count at their true cost.
    pub eval_budget: u64,
    pub hyper: Hyperparams,
    pub seed: u64,
    /// Standard deviation of objective noise, 0 for exact objectives. When
    /// positive, convergence tests use it as a floor and trigger restarts
    /// instead of termination, so the whole budget is spent.
    pub noise_level: f64,
}

impl OptimizerConfig {
    pub fn new(method: Method, eval_budget: u64, seed: u64) -> Self {
        Self {
            method,
            eval_budget,
            hyper: Hyperparams::default(),
            seed,
            noise_level: 0.0,
        }
    }

    pub fn with_noise_level(mut self, noise_level: f64) -> Self {
        self.noise_level = noise_level;
        self
    }

    pub(crate) fn is_noisy(&self) -> bool {
        self.noise_level > 0.0
    }

    /// Applies the noise floor to a base tolerance.
    pub(crate) fn tolerance(&self, base: f64) -> f64 {
        base.max(self.noise_level)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    /// `(evaluations used, incumbent value)` at each improvement.
    pub history: Vec<(u64, f64)>,
    pub evaluations_used: u64,
    /// Set when the objective returned a non-finite value.
    pub aborted: bool,
}

/// A gradient with a declared evaluation cost.
pub trait GradientOracle {
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Objective evaluations charged per call.
    fn cost(&self) -> u64;
}

/// Wraps a closure as a [`GradientOracle`].
pub struct FnGradient<F> {
    f: F,
    cost: u64,
}

impl<F: Fn(&[f64]) -> Vec<f64>> FnGradient<F> {
    pub fn new(f: F, cost: u64) -> Self {
        Self { f, cost }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64>> GradientOracle for FnGradient<F> {
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }

    fn cost(&self) -> u64 {
        self.cost
    }
}

/// Why a method stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stop {
    Budget,
    NonFinite,
}

pub(crate) type Step<T> = std::result::Result<T, Stop>;

pub(crate) struct Evaluator<'a> {
    f: &'a dyn Fn(&[f64]) -> f64,
    grad: Option<&'a dyn GradientOracle>,
    budget: u64,
    used: u64,
    best_x: Vec<f64>,
    best_f: f64,
    history: Vec<(u64, f64)>,
}

impl<'a> Evaluator<'a> {
    fn new(
        f: &'a dyn Fn(&[f64]) -> f64,
        grad: Option<&'a dyn GradientOracle>,
        budget: u64,
        x0: &[f64],
    ) -> Self {
        Self {
            f,
            grad,
            budget,
            used: 0,
            best_x: x0.to_vec(),
            best_f: f64::INFINITY,
            history: Vec::new(),
        }
    }

    pub(crate) fn value(&mut self, x: &[f64]) -> Step<f64> {
        if self.used >= self.budget {
            return Err(Stop::Budget);
        }
        self.used += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(Stop::NonFinite);
        }
        if v < self.best_f {
            self.best_f = v;
            self.best_x.copy_from_slice(x);
            self.history.push((self.used, v));
        }
        Ok(v)
    }

    /// Charged like [`Self::value`] but never becomes the incumbent. Used for
    /// the perturbed points of gradient estimators.
    pub(crate) fn probe(&mut self, x: &[f64]) -> Step<f64> {
        if self.used >= self.budget {
            return Err(Stop::Budget);
        }
        self.used += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(Stop::NonFinite);
        }
        Ok(v)
    }

    pub(crate) fn gradient(&mut self, x: &[f64]) -> Step<Vec<f64>> {
        let oracle = self.grad.expect("gradient presence checked in minimize");
        if self.used + oracle.cost() > self.budget {
            return Err(Stop::Budget);
        }
        self.used += oracle.cost();
        let g = oracle.gradient(x);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Stop::NonFinite);
        }
        Ok(g)
    }

    pub(crate) fn remaining(&self) -> u64 {
        self.budget - self.used
    }

    pub(crate) fn best(&self) -> (&[f64], f64) {
        (&self.best_x, self.best_f)
    }

    fn into_trace(self, stop: Option<Stop>) -> OptimizationTrace {
        OptimizationTrace {
            best_params: self.best_x,
            best_value: self.best_f,
            history: self.history,
            evaluations_used: self.used,
            aborted: stop == Some(Stop::NonFinite),
        }
    }
}

/// Runs `cfg.method` from `x0` within `cfg.eval_budget` evaluations.
///
/// `grad` must be supplied exactly when the method is gradient-based.
pub fn minimize(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    cfg: &OptimizerConfig,
    grad: Option<&dyn GradientOracle>,
) -> Result<OptimizationTrace> {
    let dim = x0.len() as u64;
    if dim == 0 {
        return Err(Error::contract("cannot optimize over zero parameters"));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::contract("initial point must be finite"));
    }
    if cfg.eval_budget < 2 * dim + 1 {
        return Err(Error::contract(format!(
            "evaluation budget {} below the minimum 2·{dim}+1",
            cfg.eval_budget
        )));
    }
    match (cfg.method.is_gradient_based(), grad.is_some()) {
        (true, false) => {
            return Err(Error::contract(format!("{} needs a gradient", cfg.method)))
        }
        (false, true) => {
            return Err(Error::contract(format!(
                "{} is gradient-free; do not pass a gradient",
                cfg.method
            )))
        }
        _ => {}
    }
    if let Some(g) = grad {
        if g.cost() + 1 > cfg.eval_budget {
            return Err(Error::contract(format!(
                "evaluation budget {} cannot afford one gradient of cost {}",
                cfg.eval_budget,
                g.cost()
            )));
        }
    }

    let mut ev = Evaluator::new(f, grad, cfg.eval_budget, x0);
    let outcome = match cfg.method {
        Method::Spsa => spsa::run(&mut ev, x0, cfg),
        Method::Adam => adam::run(&mut ev, x0, cfg, false),
        Method::Amsgrad => adam::run(&mut ev, x0, cfg, true),
        Method::NelderMead => nelder_mead::run(&mut ev, x0, cfg),
        Method::Powell => powell::run(&mut ev, x0, cfg),
        Method::Cg => cg::run(&mut ev, x0, cfg),
        Method::Bfgs => quasi_newton::run_bfgs(&mut ev, x0, cfg),
        Method::Lbfgs => quasi_newton::run_lbfgs(&mut ev, x0, cfg),
    };
    Ok(ev.into_trace(outcome.err()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `x + t·d`.
pub(crate) fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}
