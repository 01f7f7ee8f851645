//! Generalized universal gradient outer loop with γ_k = 2/(k+1).
//!
//! Each step forms `z_k = (1-γ_k) y_{k-1} + γ_k x_{k-1}`, approximately
//! minimizes `⟨∇f(z_k), u⟩ + (β_k/2)‖u - x_{k-1}‖²` to Wolfe gap `η_k`
//! starting from `x_{k-1}`, and averages `y_k = (1-γ_k) y_{k-1} + γ_k x_k`.
//! The three schedules differ only in `(β_k, η_k)` and the inner step rule.

use std::time::Instant;

use crate::error::{contract, Error, Result};
use crate::inner::{cgm_solve, AlphaRule, ProjSubproblem};
use crate::linalg::{combine, OracleCounters, Vector};
use crate::objectives::CountedObjective;
use crate::problem::ProblemInstance;
use crate::trace::{RunTrace, TraceRow};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GugRegime {
    /// Classical conditional gradient: `β_k = η_k = 0`, one LMO per step.
    Cg,
    /// `β_k = M γ_k^ν / D^{1-ν}`, `η_k = 6 β_k D²`; one inner step per outer step.
    CgEquiv { nu: f64, m_nu: f64 },
    /// `β_k = M k^{(1-3ν)/2} / D^{1-ν}`, `η_k = 6 β_k D² / k`.
    Sliding { nu: f64, m_nu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GugSchedule {
    pub regime: GugRegime,
    pub diameter: f64,
}

impl GugSchedule {
    pub fn new(regime: GugRegime, diameter: f64) -> Result<Self> {
        if !(diameter.is_finite() && diameter > 0.0) {
            return Err(contract("diameter must be positive"));
        }
        match regime {
            GugRegime::Cg => {}
            GugRegime::CgEquiv { nu, m_nu } => {
                if !(nu > 0.0 && nu <= 1.0) {
                    return Err(Error::Domain(format!("exponent must lie in (0, 1], got {nu}")));
                }
                check_constant(m_nu)?;
            }
            GugRegime::Sliding { nu, m_nu } => {
                if !(nu > 0.0 && nu < 1.0) {
                    return Err(Error::Domain(format!("sliding schedule needs exponent in (0, 1), got {nu}")));
                }
                check_constant(m_nu)?;
            }
        }
        Ok(Self { regime, diameter })
    }

    pub fn gamma(&self, k: usize) -> f64 {
        2.0 / (k as f64 + 1.0)
    }

    pub fn beta(&self, k: usize) -> f64 {
        let d = self.diameter;
        match self.regime {
            GugRegime::Cg => 0.0,
            GugRegime::CgEquiv { nu, m_nu } => m_nu * self.gamma(k).powf(nu) / d.powf(1.0 - nu),
            GugRegime::Sliding { nu, m_nu } => {
                m_nu * (k as f64).powf(0.5 * (1.0 - 3.0 * nu)) / d.powf(1.0 - nu)
            }
        }
    }

    pub fn eta(&self, k: usize) -> f64 {
        let d2 = self.diameter * self.diameter;
        match self.regime {
            GugRegime::Cg => 0.0,
            GugRegime::CgEquiv { .. } => 6.0 * self.beta(k) * d2,
            GugRegime::Sliding { .. } => 6.0 * self.beta(k) * d2 / k as f64,
        }
    }

    fn alpha_rule(&self) -> AlphaRule {
        match self.regime {
            GugRegime::Sliding { .. } => AlphaRule::OpenLoop,
            _ => AlphaRule::FirstStepFull,
        }
    }
}

fn check_constant(m_nu: f64) -> Result<()> {
    if !(m_nu.is_finite() && m_nu > 0.0) {
        return Err(contract(format!("Hölder constant must be positive, got {m_nu}")));
    }
    Ok(())
}

#[derive(Clone, Debug, Default)]
pub struct GugOptions {
    /// Keep per-step iterates in [`GugRun::steps`].
    pub record_steps: bool,
    /// Stop once `f(y_k) - f*` reaches this value (requires a known `f*`).
    pub target_gap: Option<f64>,
    /// Stop once the duality certificate reaches this value (`Cg` only).
    pub target_certified: Option<f64>,
    /// Stop before an outer step would start beyond this many LMO calls.
    pub max_lmo_calls: Option<u64>,
    /// Fill the `wall_ns` trace column.
    pub timing: bool,
}

/// Iterates of one outer step, kept when [`GugOptions::record_steps`] is set.
#[derive(Clone, Debug)]
pub struct GugStep {
    pub k: usize,
    pub gamma: f64,
    pub beta: f64,
    pub eta: f64,
    pub x_prev: Vector,
    pub x: Vector,
    pub y_prev: Vector,
    pub y: Vector,
    pub z: Vector,
    pub f_y_prev: f64,
    pub f_y: f64,
    pub inner_iterations: usize,
    pub inner_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StopReason {
    IterationLimit,
    TargetReached,
    LmoBudget,
}

#[derive(Clone, Debug)]
pub struct GugRun {
    pub trace: RunTrace,
    pub y_final: Vector,
    /// Iterate with the smallest objective value seen.
    pub y_best: Vector,
    pub f_best: f64,
    pub steps: Vec<GugStep>,
    pub stop: StopReason,
}

/// Runs up to `n` outer iterations.
pub fn gug_run(
    problem: &ProblemInstance,
    schedule: &GugSchedule,
    n: usize,
    options: &GugOptions,
    counters: &OracleCounters,
) -> Result<GugRun> {
    if n == 0 {
        return Err(contract("need at least one outer iteration"));
    }
    if !problem.set.contains(&problem.x0) {
        return Err(Error::InfeasibleStart);
    }
    if options.target_gap.is_some() && problem.fstar.is_none() {
        return Err(contract("target gap requires a known optimal value"));
    }
    if options.target_certified.is_some() && schedule.regime != GugRegime::Cg {
        return Err(contract("only the plain conditional gradient schedule carries a certificate"));
    }
    let f = CountedObjective::new(&problem.objective, counters);
    let set = &problem.set;
    let start = Instant::now();

    let mut x = problem.x0.clone();
    let mut y = problem.x0.clone();
    let mut f_y = f.value(&y);
    let mut best = (y.clone(), f_y);
    let mut trace = RunTrace::default();
    let mut steps = Vec::new();
    let mut stop = StopReason::IterationLimit;
    // best lower bound f(z) - ⟨∇f(z), z - x⟩ seen so far
    let mut lower = f64::NEG_INFINITY;

    for k in 1..=n {
        if let Some(cap) = options.max_lmo_calls {
            if counters.snapshot().lmo_calls >= cap {
                stop = StopReason::LmoBudget;
                break;
            }
        }
        let gamma = schedule.gamma(k);
        let beta = schedule.beta(k);
        let eta = schedule.eta(k);
        let z = combine(&y, &x, gamma);
        let g = f.gradient(&z);

        let (x_new, inner_iterations, inner_steps) = match schedule.regime {
            GugRegime::Cg => {
                let v = set.lmo_counted(&g, counters)?;
                lower = lower.max(f.value(&z) - g.dot(&z.sub(&v)));
                (v, 1, 1)
            }
            _ => {
                let sub = ProjSubproblem::new(g, beta, x.clone(), set, eta, 0.0)?;
                let r = cgm_solve(&sub, &x, schedule.alpha_rule(), counters)?;
                (r.u_plus, r.iterations, r.steps)
            }
        };
        let y_new = combine(&y, &x_new, gamma);
        let f_new = f.value(&y_new);

        let snap = counters.snapshot();
        trace.push(TraceRow {
            k: k as u64,
            f_y: f_new,
            true_gap: problem.fstar.map(|fs| f_new - fs),
            certified_gap: (schedule.regime == GugRegime::Cg).then(|| f_new - lower),
            l_k: None,
            gamma_k: gamma,
            beta_k: beta,
            eta_k: eta,
            inner_iters: inner_iterations as u64,
            lmo_calls_cum: snap.lmo_calls,
            grad_evals_cum: snap.grad_evals,
            grad_evals_with_retries_cum: snap.grad_evals,
            wall_ns: if options.timing { start.elapsed().as_nanos() as u64 } else { 0 },
        });
        if options.record_steps {
            steps.push(GugStep {
                k,
                gamma,
                beta,
                eta,
                x_prev: x.clone(),
                x: x_new.clone(),
                y_prev: y.clone(),
                y: y_new.clone(),
                z,
                f_y_prev: f_y,
                f_y: f_new,
                inner_iterations,
                inner_steps,
            });
        }
        x = x_new;
        y = y_new;
        f_y = f_new;
        if f_y < best.1 {
            best = (y.clone(), f_y);
        }
        if let (Some(target), Some(fs)) = (options.target_gap, problem.fstar) {
            if f_y - fs <= target {
                stop = StopReason::TargetReached;
                break;
            }
        }
        if let Some(target) = options.target_certified {
            if f_y - lower <= target {
                stop = StopReason::TargetReached;
                break;
            }
        }
    }
    Ok(GugRun { trace, y_final: y, y_best: best.0, f_best: best.1, steps, stop })
}

/// `ξ_k = (1-ν)/(2(1+ν)) · M^{2/(1-ν)} · (γ_k/β_k)^{(1+ν)/(1-ν)}`, the
/// Young's-inequality remainder of the outer recurrence.
pub fn xi_k(nu: f64, m_nu: f64, beta_k: f64, gamma_k: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::Domain(format!("remainder defined only for exponent in (0, 1), got {nu}")));
    }
    if !(beta_k > 0.0) {
        return Err(contract("beta_k must be positive"));
    }
    let e = (1.0 + nu) / (1.0 - nu);
    Ok((1.0 - nu) / (2.0 * (1.0 + nu)) * m_nu.powf(2.0 / (1.0 - nu)) * (gamma_k / beta_k).powf(e))
}

/// Nominal sliding complexities `(q^{2/(1+3ν)}, q^{4/(1+3ν)})` with
/// `q = M D^{1+ν} / ε`, constants dropped.
pub fn sliding_nominal_counts(nu: f64, m_nu: f64, diameter: f64, epsilon: f64) -> Result<(f64, f64)> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::Domain(format!("exponent must lie in (0, 1), got {nu}")));
    }
    let q = m_nu * diameter.powf(1.0 + nu) / epsilon;
    let grad = q.powf(2.0 / (1.0 + 3.0 * nu));
    Ok((grad, grad * grad))
}

/// Exponents `(2/(1+3ν), 4/(1+3ν))` of the sliding bounds.
pub fn sliding_exponents(nu: f64) -> (f64, f64) {
    let e = 2.0 / (1.0 + 3.0 * nu);
    (e, 2.0 * e)
}
