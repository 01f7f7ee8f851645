//! Universal conditional gradient sliding.
//!
//! The outer loop needs no smoothness information. At step `k` a trial
//! constant `L` fixes the weight `γ_k` through `Γ_k = L γ_k² / k` and
//! `Γ_k = (1 - γ_k) Γ_{k-1}` (with `γ_1 = 1`), the projection-type subproblem
//! with `β_k = L γ_k`, `η_k = L γ_k D² / k` is solved by the inexact
//! conditional gradient procedure, and the trial is accepted when
//!
//! ```text
//! f(y_k) ≤ f(z_k) + ⟨∇f(z_k), y_k - z_k⟩ + (L/2)‖y_k - z_k‖² + ε γ_k / 2.
//! ```
//!
//! Otherwise `L` doubles and the step is recomputed. Every accepted step
//! folds the tangent plane at `z_k` into an affine under-estimator `ℓ_k`,
//! and one extra LMO on `ℓ_k` certifies `f(y_k) - f* ≤ f(y_k) - min ℓ_k`.

use std::time::Instant;

use crate::error::{contract, Error, Result};
use crate::inner::{acgm_solve_guarded, iteration_cap, ProjSubproblem};
use crate::linalg::{combine, OracleCounters, Vector};
use crate::objectives::CountedObjective;
use crate::problem::ProblemInstance;
use crate::sets::{ApproxLmo, ErrorBudget, FeasibleSet};
use crate::trace::{RunTrace, TraceRow};

/// Positive root of `L γ² / k = (1 - γ) Γ_prev`.
pub fn gamma_from_l(gamma_prev: f64, l: f64, k: usize) -> f64 {
    let kg = k as f64 * gamma_prev;
    // rationalized form of (-kΓ + √(k²Γ² + 4LkΓ)) / (2L)
    2.0 * kg / (kg + (kg * kg + 4.0 * l * kg).sqrt())
}

/// Affine function `ℓ(x) = c + ⟨w, x⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerModel {
    pub c: f64,
    pub w: Vector,
    pub k: usize,
}

impl LowerModel {
    pub fn empty(n: usize) -> Self {
        Self { c: 0.0, w: Vector::zeros(n), k: 0 }
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        self.c + self.w.dot(x)
    }

    /// Blends in the tangent plane at `z` with weight `gamma`; `gamma = 1`
    /// discards the previous model.
    pub fn update(&self, gamma: f64, z: &Vector, fz: f64, gz: &Vector) -> LowerModel {
        let offset = fz - gz.dot(z);
        Self {
            c: (1.0 - gamma) * self.c + gamma * offset,
            w: combine(&self.w, gz, gamma),
            k: self.k + 1,
        }
    }
}

/// Free-function form of [`LowerModel::update`].
pub fn update_lower_model(model: &LowerModel, gamma: f64, z: &Vector, fz: f64, gz: &Vector) -> Result<LowerModel> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(contract(format!("model weight must lie in (0, 1], got {gamma}")));
    }
    z.check_dim(model.w.len())?;
    gz.check_dim(model.w.len())?;
    Ok(model.update(gamma, z, fz, gz))
}

/// Minimizes the model over the set up to additive `eps_k` and returns the
/// minimizer together with the certified bound `f(y) - ℓ(s) + eps_k`.
pub fn certify_gap(
    model: &LowerModel,
    f_y: f64,
    set: &FeasibleSet,
    eps_k: f64,
    counters: &OracleCounters,
) -> Result<(Vector, f64)> {
    if model.k == 0 {
        return Err(contract("lower model has no tangent planes yet"));
    }
    let lmo = ApproxLmo::new(set, ErrorBudget::Constant(eps_k))?;
    let s = lmo.solve_counted(&model.w, 1, counters)?;
    Ok((s.clone(), f_y - model.eval(&s) + eps_k))
}

/// `C_ν = ((1+2ν)/(1+3ν))^{(1+3ν)/(1+ν)} ((1-ν)/(1+ν))^{(1-ν)/(1+ν)} 2^{(4+10ν)/(1+ν)}`,
/// with the middle factor read as 1 at `ν = 1`.
pub fn c_nu(nu: f64) -> Result<f64> {
    check_exponent(nu)?;
    let a = ((1.0 + 2.0 * nu) / (1.0 + 3.0 * nu)).powf((1.0 + 3.0 * nu) / (1.0 + nu));
    let b = continuity_factor(nu);
    let c = 2f64.powf((4.0 + 10.0 * nu) / (1.0 + nu));
    Ok(a * b * c)
}

/// `((1-ν)/(1+ν))^{(1-ν)/(1+ν)}`, equal to 1 at `ν = 1`.
fn continuity_factor(nu: f64) -> f64 {
    if nu >= 1.0 {
        1.0
    } else {
        let r = (1.0 - nu) / (1.0 + nu);
        r.powf(r)
    }
}

fn check_exponent(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::Domain(format!("Hölder exponent must lie in (0, 1], got {nu}")));
    }
    Ok(())
}

/// Gradient-evaluation bound `⌈16((3+σ)^{(1+ν)/2} M D^{1+ν} / ε)^{2/(1+3ν)}⌉`.
pub fn grad_eval_bound(nu: f64, m_nu: f64, diameter: f64, epsilon: f64, sigma: f64) -> Result<u64> {
    check_exponent(nu)?;
    let q = (3.0 + sigma).powf(0.5 * (1.0 + nu)) * m_nu * diameter.powf(1.0 + nu) / epsilon;
    Ok((16.0 * q.powf(2.0 / (1.0 + 3.0 * nu))).ceil() as u64)
}

/// LMO bound `⌈(7σ/2 + 3) N² + (7σ/2 + 6) N⌉` for a gradient budget `N`.
pub fn lmo_bound(n_grad: u64, sigma: f64) -> u64 {
    let n = n_grad as f64;
    ((3.5 * sigma + 3.0) * n * n + (3.5 * sigma + 6.0) * n).ceil() as u64
}

/// Largest `L` the backtracking can accept at weight `gamma`:
/// `2((1-ν)/((1+ν) ε γ))^{(1-ν)/(1+ν)} M^{2/(1+ν)}`.
pub fn l_ceiling(nu: f64, m_nu: f64, epsilon: f64, gamma: f64) -> Result<f64> {
    check_exponent(nu)?;
    let m = m_nu.powf(2.0 / (1.0 + nu));
    if nu >= 1.0 {
        return Ok(2.0 * m);
    }
    let e = (1.0 - nu) / (1.0 + nu);
    Ok(2.0 * ((1.0 - nu) / ((1.0 + nu) * epsilon * gamma)).powf(e) * m)
}

/// Bound on `L_k γ_k²`: `C_ν M^{2/(1+ν)} / (k^{(1+3ν)/(1+ν)} ε^{(1-ν)/(1+ν)})`.
pub fn step_product_bound(nu: f64, m_nu: f64, epsilon: f64, k: usize) -> Result<f64> {
    let c = c_nu(nu)?;
    Ok(c * m_nu.powf(2.0 / (1.0 + nu))
        / ((k as f64).powf((1.0 + 3.0 * nu) / (1.0 + nu)) * epsilon.powf((1.0 - nu) / (1.0 + nu))))
}

#[derive(Clone, Debug)]
pub struct UcgsOptions {
    pub epsilon: f64,
    /// Inner LMO inexactness: `δ^t = σ β D² / t`.
    pub sigma: f64,
    /// Certificate LMO inexactness: `ε_k = σ_cert L γ² D² / 2`.
    pub sigma_cert: f64,
    pub l0: f64,
    pub l_min: f64,
    pub max_outer: usize,
    pub max_lmo_calls: Option<u64>,
    /// Multiplies every `η_k`; values below 1 are a fault-injection knob.
    pub eta_scale: f64,
    pub record_steps: bool,
    pub timing: bool,
}

impl UcgsOptions {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            sigma: 0.0,
            sigma_cert: 0.0,
            l0: 1.0,
            l_min: 1e-12,
            max_outer: 1_000_000,
            max_lmo_calls: None,
            eta_scale: 1.0,
            record_steps: false,
            timing: false,
        }
    }

    /// Sets both inexactness levels.
    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self.sigma_cert = sigma;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(contract(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.l0.is_finite() && self.l0 > 0.0 && self.l_min > 0.0) {
            return Err(contract("L0 and L_min must be positive"));
        }
        for (name, v) in [("sigma", self.sigma), ("sigma_cert", self.sigma_cert)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(contract(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if !(self.eta_scale.is_finite() && self.eta_scale > 0.0) {
            return Err(contract("eta_scale must be positive"));
        }
        Ok(())
    }

    /// Backtracking gives up once a trial exceeds this value.
    pub fn l_abort(&self) -> f64 {
        2f64.powi(60) * self.l0.max(self.l_min)
    }
}

/// State carried between accepted outer steps.
#[derive(Clone, Debug)]
pub struct UcgsState {
    /// Accepted steps so far.
    pub k: usize,
    pub l: f64,
    pub gamma: f64,
    pub big_gamma: f64,
    pub x: Vector,
    pub y: Vector,
    pub model: LowerModel,
}

impl UcgsState {
    pub fn new(problem: &ProblemInstance, l0: f64) -> Self {
        Self {
            k: 0,
            l: l0,
            gamma: 1.0,
            big_gamma: 1.0,
            x: problem.x0.clone(),
            y: problem.x0.clone(),
            model: LowerModel::empty(problem.set.dim()),
        }
    }
}

/// Result of one successful backtracking search.
#[derive(Clone, Debug)]
pub struct AcceptedStep {
    pub k: usize,
    pub l: f64,
    pub gamma: f64,
    pub big_gamma: f64,
    pub beta: f64,
    pub eta: f64,
    pub z: Vector,
    pub f_z: f64,
    pub g_z: Vector,
    pub x: Vector,
    pub y: Vector,
    pub f_y: f64,
    /// Inner iterations of the accepted trial.
    pub inner_iterations: usize,
    /// Inner iterations of every trial, accepted one last.
    pub trial_inner_iterations: Vec<usize>,
    pub trials: usize,
}

/// Backtracking search for the next outer step.
pub fn linesearch_step(
    state: &UcgsState,
    problem: &ProblemInstance,
    f: &CountedObjective<'_>,
    options: &UcgsOptions,
) -> Result<AcceptedStep> {
    let k = state.k + 1;
    let set = &problem.set;
    let d2 = set.diameter().powi(2);
    let counters = f.counters();
    let guard = iteration_cap(options.sigma, k as f64).saturating_mul(10);
    let ceiling = options.l_abort();

    let mut l = (state.l / 2.0).max(options.l_min);
    let mut trial_inner = Vec::new();
    loop {
        if l > ceiling {
            return Err(Error::LinesearchAbort { k, l_trial: l, ceiling });
        }
        let (gamma, big_gamma) = if k == 1 {
            (1.0, l)
        } else {
            let g = gamma_from_l(state.big_gamma, l, k);
            (g, l * g * g / k as f64)
        };
        let z = combine(&state.y, &state.x, gamma);
        let f_z = f.value(&z);
        let g_z = f.gradient(&z);
        let beta = l * gamma;
        let eta = l * gamma * d2 / k as f64 * options.eta_scale;
        let sub = ProjSubproblem::new(g_z.clone(), beta, state.x.clone(), set, eta, options.sigma)?;
        let inner = acgm_solve_guarded(&sub, &state.x, guard, counters)?;
        trial_inner.push(inner.iterations);
        let y = combine(&state.y, &inner.u_plus, gamma);
        let f_y = f.value(&y);
        let dy = y.sub(&z);
        let model = f_z + g_z.dot(&dy) + 0.5 * l * dy.norm_sq() + 0.5 * options.epsilon * gamma;
        if f_y <= model {
            return Ok(AcceptedStep {
                k,
                l,
                gamma,
                big_gamma,
                beta,
                eta,
                z,
                f_z,
                g_z,
                x: inner.u_plus,
                y,
                f_y,
                inner_iterations: inner.iterations,
                trials: trial_inner.len(),
                trial_inner_iterations: trial_inner,
            });
        }
        l *= 2.0;
    }
}

/// Per-step record kept when [`UcgsOptions::record_steps`] is set.
#[derive(Clone, Debug)]
pub struct UcgsStep {
    pub accepted: AcceptedStep,
    pub gamma_prev_big: f64,
    pub model: LowerModel,
    pub s: Vector,
    pub eps_k: f64,
    pub certified_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UcgsStatus {
    Converged,
    IterationLimit,
    LmoBudget,
}

#[derive(Clone, Debug)]
pub struct UcgsRun {
    pub y_final: Vector,
    pub f_final: f64,
    pub certified_gap: f64,
    pub status: UcgsStatus,
    pub outer_steps: usize,
    pub trace: RunTrace,
    pub steps: Vec<UcgsStep>,
    /// Largest inner iteration count over every trial, with its step index.
    pub max_inner: (usize, usize),
    pub l_max: f64,
    pub l_min_observed: f64,
}

/// Runs until the certified gap drops to `options.epsilon` or a budget is hit.
pub fn ucgs_run(problem: &ProblemInstance, options: &UcgsOptions, counters: &OracleCounters) -> Result<UcgsRun> {
    options.validate()?;
    if !problem.set.contains(&problem.x0) {
        return Err(Error::InfeasibleStart);
    }
    let f = CountedObjective::new(&problem.objective, counters);
    let d2 = problem.diameter().powi(2);
    let start = Instant::now();

    let mut state = UcgsState::new(problem, options.l0);
    let mut trace = RunTrace::default();
    let mut steps = Vec::new();
    let mut certified = f64::INFINITY;
    let mut f_final = f64::NAN;
    let mut status = UcgsStatus::IterationLimit;
    let mut max_inner = (0, 0);
    let (mut l_max, mut l_low) = (0.0f64, f64::INFINITY);

    while state.k < options.max_outer {
        if let Some(cap) = options.max_lmo_calls {
            if counters.snapshot().lmo_calls >= cap {
                status = UcgsStatus::LmoBudget;
                break;
            }
        }
        let step = linesearch_step(&state, problem, &f, options)?;
        let model = state.model.update(step.gamma, &step.z, step.f_z, &step.g_z);
        let eps_k = options.sigma_cert * step.l * step.gamma * step.gamma * d2 / 2.0;
        let (s, gap) = certify_gap(&model, step.f_y, &problem.set, eps_k, counters)?;

        for &it in &step.trial_inner_iterations {
            if it > max_inner.0 {
                max_inner = (it, step.k);
            }
        }
        l_max = l_max.max(step.l);
        l_low = l_low.min(step.l);
        let snap = counters.snapshot();
        trace.push(TraceRow {
            k: step.k as u64,
            f_y: step.f_y,
            true_gap: problem.fstar.map(|fs| step.f_y - fs),
            certified_gap: Some(gap),
            l_k: Some(step.l),
            gamma_k: step.gamma,
            beta_k: step.beta,
            eta_k: step.eta,
            inner_iters: step.inner_iterations as u64,
            lmo_calls_cum: snap.lmo_calls,
            grad_evals_cum: step.k as u64,
            grad_evals_with_retries_cum: snap.grad_evals,
            wall_ns: if options.timing { start.elapsed().as_nanos() as u64 } else { 0 },
        });

        let gamma_prev_big = state.big_gamma;
        state = UcgsState {
            k: step.k,
            l: step.l,
            gamma: step.gamma,
            big_gamma: step.big_gamma,
            x: step.x.clone(),
            y: step.y.clone(),
            model: model.clone(),
        };
        certified = gap;
        f_final = step.f_y;
        if options.record_steps {
            steps.push(UcgsStep { accepted: step, gamma_prev_big, model, s, eps_k, certified_gap: gap });
        }
        if gap <= options.epsilon {
            status = UcgsStatus::Converged;
            break;
        }
    }
    if state.k == 0 {
        f_final = f.value(&state.y);
    }
    Ok(UcgsRun {
        y_final: state.y,
        f_final,
        certified_gap: certified,
        status,
        outer_steps: state.k,
        trace,
        steps,
        max_inner,
        l_max,
        l_min_observed: l_low,
    })
}
