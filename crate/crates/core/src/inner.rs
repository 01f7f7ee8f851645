//! Frank-Wolfe procedures for the projection-type subproblem
//!
//! ```text
//! φ(u) = ⟨g, u⟩ + (β/2)‖u - anchor‖²
//! ```
//!
//! Each pass of the loop makes exactly one LMO call whose output serves both
//! the Wolfe-gap termination test and the next step. The procedure stops at
//! the first iterate whose certificate falls below `eta` and returns that
//! iterate, so `iterations` counts LMO calls (including the final one).

use crate::error::{contract, Error, Result};
use crate::linalg::{combine, OracleCounters, Vector};
use crate::sets::{ApproxLmo, ErrorBudget, FeasibleSet};

/// Quadratic model minimized (approximately) over the feasible set.
#[derive(Clone, Debug)]
pub struct ProjSubproblem<'a> {
    pub g: Vector,
    pub beta: f64,
    pub anchor: Vector,
    pub set: &'a FeasibleSet,
    /// Termination tolerance on the Wolfe gap of `φ`.
    pub eta: f64,
    /// Inexactness level: the LMO at pass `t` may be off by `σβD²/t`.
    pub sigma: f64,
}

impl<'a> ProjSubproblem<'a> {
    pub fn new(
        g: Vector,
        beta: f64,
        anchor: Vector,
        set: &'a FeasibleSet,
        eta: f64,
        sigma: f64,
    ) -> Result<Self> {
        g.check_dim(set.dim())?;
        anchor.check_dim(set.dim())?;
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(contract(format!("beta must be nonnegative, got {beta}")));
        }
        if !(eta >= 0.0) {
            return Err(contract(format!("eta must be nonnegative, got {eta}")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(contract(format!("sigma must be nonnegative, got {sigma}")));
        }
        Ok(Self { g, beta, anchor, set, eta, sigma })
    }

    pub fn phi(&self, u: &Vector) -> f64 {
        self.g.dot(u) + 0.5 * self.beta * u.dist_sq(&self.anchor)
    }

    /// `∇φ(u) = g + β(u - anchor)`
    pub fn phi_grad(&self, u: &Vector) -> Vector {
        let mut out = self.g.clone().into_inner();
        for ((o, ui), ai) in out.iter_mut().zip(u.iter()).zip(self.anchor.iter()) {
            *o += self.beta * (ui - ai);
        }
        Vector::from_raw(out)
    }

    /// Iteration bound `1 + ⌈(7σ + 6) β D² / η⌉`, saturating at `usize::MAX`.
    pub fn iteration_cap(&self) -> usize {
        iteration_cap(self.sigma, self.beta * self.set.diameter().powi(2) / self.eta)
    }

    fn budget(&self) -> ErrorBudget {
        ErrorBudget::Harmonic { scale: self.sigma * self.beta * self.set.diameter().powi(2) }
    }
}

/// `1 + ⌈(7σ + 6) · ratio⌉` where `ratio = βD²/η`.
pub fn iteration_cap(sigma: f64, ratio: f64) -> usize {
    if ratio.is_nan() {
        // β = 0 with η = 0: a single step already certifies
        return 1;
    }
    let extra = ((7.0 * sigma + 6.0) * ratio).ceil();
    if extra >= (usize::MAX - 1) as f64 {
        usize::MAX
    } else {
        1 + extra as usize
    }
}

/// Step size rules for the exact-LMO procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaRule {
    /// Exact minimization of `φ` along the segment.
    ExactLinesearch,
    /// `α^t = 2/(t + 1)`.
    OpenLoop,
    /// `α¹ = 1`, then exact linesearch.
    FirstStepFull,
}

#[derive(Clone, Debug)]
pub struct InnerResult {
    pub u_plus: Vector,
    /// Loop passes, equal to the LMO calls made.
    pub iterations: usize,
    /// Convex-combination steps taken (`iterations - 1` on normal exit).
    pub steps: usize,
    pub lmo_calls_used: usize,
    /// Upper bound on the exact Wolfe gap of `φ` at `u_plus`.
    pub final_certified_gap: f64,
}

/// Minimizer of `φ` on the segment `[u, v]`, as a fraction in `[0, 1]`.
pub fn exact_linesearch_alpha(u: &Vector, v: &Vector, sub: &ProjSubproblem<'_>) -> f64 {
    let d = v.sub(u);
    let dd = d.norm_sq();
    if dd == 0.0 {
        return 0.0;
    }
    let descent = -sub.phi_grad(u).dot(&d);
    if descent <= 0.0 {
        return 0.0;
    }
    let curvature = sub.beta * dd;
    if curvature == 0.0 || descent >= curvature {
        1.0
    } else {
        descent / curvature
    }
}

/// Exact-LMO conditional gradient procedure, warm started at `u0`.
pub fn cgm_solve(
    sub: &ProjSubproblem<'_>,
    u0: &Vector,
    rule: AlphaRule,
    counters: &OracleCounters,
) -> Result<InnerResult> {
    let exact = ProjSubproblem { sigma: 0.0, ..sub.clone() };
    let guard = exact.iteration_cap().saturating_mul(10);
    fw_loop(&exact, u0, rule, guard, counters)
}

/// Conditional gradient procedure with the approximate LMO at budget
/// `δ^t = σβD²/t` and exact linesearch.
pub fn acgm_solve(sub: &ProjSubproblem<'_>, u0: &Vector, counters: &OracleCounters) -> Result<InnerResult> {
    acgm_solve_guarded(sub, u0, sub.iteration_cap().saturating_mul(10), counters)
}

/// [`acgm_solve`] with an explicit iteration guard.
pub fn acgm_solve_guarded(
    sub: &ProjSubproblem<'_>,
    u0: &Vector,
    guard: usize,
    counters: &OracleCounters,
) -> Result<InnerResult> {
    fw_loop(sub, u0, AlphaRule::ExactLinesearch, guard, counters)
}

fn fw_loop(
    sub: &ProjSubproblem<'_>,
    u0: &Vector,
    rule: AlphaRule,
    guard: usize,
    counters: &OracleCounters,
) -> Result<InnerResult> {
    u0.check_dim(sub.set.dim())?;
    if sub.beta > 0.0 && !(sub.eta > 0.0) {
        return Err(contract("eta must be positive when beta > 0"));
    }
    let lmo = ApproxLmo::new(sub.set, sub.budget())?;
    let mut u = u0.clone();
    let mut last_gap = f64::INFINITY;
    let mut t = 1usize;
    loop {
        if t > guard {
            return Err(Error::InnerGuard { limit: guard, last_gap, eta: sub.eta });
        }
        let grad = sub.phi_grad(&u);
        let v = lmo.solve_counted(&grad, t, counters)?;
        let delta = lmo.budget.at(t);
        let gap = grad.dot(&u) - grad.dot(&v);
        last_gap = gap;
        if gap <= sub.eta - delta {
            return Ok(InnerResult {
                u_plus: u,
                iterations: t,
                steps: t - 1,
                lmo_calls_used: t,
                final_certified_gap: gap + delta,
            });
        }
        let alpha = step_size(rule, t, &u, &v, sub);
        u = combine(&u, &v, alpha);
        t += 1;
    }
}

fn step_size(rule: AlphaRule, t: usize, u: &Vector, v: &Vector, sub: &ProjSubproblem<'_>) -> f64 {
    match rule {
        AlphaRule::OpenLoop => 2.0 / (t as f64 + 1.0),
        AlphaRule::FirstStepFull if t == 1 => 1.0,
        AlphaRule::ExactLinesearch | AlphaRule::FirstStepFull => exact_linesearch_alpha(u, v, sub),
    }
}

/// Runs `steps` passes of the approximate procedure with termination
/// disabled and returns `u^0, …, u^steps` along with the LMO points
/// `v^1, …, v^steps`.
pub fn acgm_iterates(sub: &ProjSubproblem<'_>, u0: &Vector, steps: usize) -> Result<(Vec<Vector>, Vec<Vector>)> {
    u0.check_dim(sub.set.dim())?;
    let lmo = ApproxLmo::new(sub.set, sub.budget())?;
    let mut us = Vec::with_capacity(steps + 1);
    let mut vs = Vec::with_capacity(steps);
    us.push(u0.clone());
    for t in 1..=steps {
        let u = us.last().unwrap();
        let v = lmo.solve(&sub.phi_grad(u), t)?;
        let alpha = exact_linesearch_alpha(u, &v, sub);
        let next = combine(u, &v, alpha);
        vs.push(v);
        us.push(next);
    }
    Ok((us, vs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn phi_grad_cases() {
        let s = FeasibleSet::simplex(2).unwrap();
        let sub = ProjSubproblem::new(v(&[0.3, -0.1]), 4.0, v(&[0.2, 0.8]), &s, 1.0, 0.0).unwrap();
        assert_eq!(sub.phi_grad(&v(&[0.2, 0.8])), v(&[0.3, -0.1]));

        let sub = ProjSubproblem::new(v(&[0.0, 0.0]), 2.0, v(&[0.0, 0.0]), &s, 1.0, 0.0).unwrap();
        assert_eq!(sub.phi_grad(&v(&[1.0, 0.0])), v(&[2.0, 0.0]));

        let sub = ProjSubproblem::new(v(&[1.0, 1.0]), 1.0, v(&[1.0, 1.0]), &s, 1.0, 0.0).unwrap();
        assert_eq!(sub.phi_grad(&v(&[0.0, 0.0])), v(&[0.0, 0.0]));
    }

    #[test]
    fn strong_convexity_identity_is_exact() {
        let s = FeasibleSet::simplex(3).unwrap();
        let sub = ProjSubproblem::new(v(&[0.5, -1.0, 2.0]), 0.75, v(&[0.25, 0.25, 0.5]), &s, 1.0, 0.0)
            .unwrap();
        let x = v(&[0.0, 1.0, 0.0]);
        let u = v(&[0.5, 0.0, 0.5]);
        let lhs = 0.5 * sub.beta * x.dist_sq(&u);
        let rhs = sub.phi(&x) - sub.phi(&u) - sub.phi_grad(&u).dot(&x.sub(&u));
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn linesearch_alpha_cases() {
        let s = FeasibleSet::cube(v(&[0.0]), v(&[1.0])).unwrap();
        // minimize −λ + λ² on [0, 1]
        let sub = ProjSubproblem::new(v(&[-1.0]), 2.0, v(&[0.0]), &s, 1.0, 0.0).unwrap();
        assert!((exact_linesearch_alpha(&v(&[0.0]), &v(&[1.0]), &sub) - 0.5).abs() < 1e-15);
        // no descent along the segment
        let flat = ProjSubproblem::new(v(&[0.0]), 2.0, v(&[0.0]), &s, 1.0, 0.0).unwrap();
        assert_eq!(exact_linesearch_alpha(&v(&[0.0]), &v(&[1.0]), &flat), 0.0);
        // tiny curvature clamps to one
        let weak = ProjSubproblem::new(v(&[-1.0]), 1e-9, v(&[0.0]), &s, 1.0, 0.0).unwrap();
        assert_eq!(exact_linesearch_alpha(&v(&[0.0]), &v(&[1.0]), &weak), 1.0);
        // degenerate segment
        assert_eq!(exact_linesearch_alpha(&v(&[0.3]), &v(&[0.3]), &sub), 0.0);
    }

    #[test]
    fn linear_model_finishes_after_one_step() {
        let s = FeasibleSet::simplex(3).unwrap();
        let g = v(&[0.2, -0.7, 0.1]);
        let sub = ProjSubproblem::new(g.clone(), 0.0, v(&[1.0, 0.0, 0.0]), &s, 0.0, 0.0).unwrap();
        let c = OracleCounters::new();
        let r = cgm_solve(&sub, &v(&[1.0, 0.0, 0.0]), AlphaRule::FirstStepFull, &c).unwrap();
        assert_eq!(r.steps, 1);
        assert_eq!(r.u_plus, s.lmo(&g).unwrap());
        assert_eq!(c.snapshot().lmo_calls, r.lmo_calls_used as u64);
    }

    #[test]
    fn loose_tolerance_takes_at_most_one_step() {
        let s = FeasibleSet::simplex(4).unwrap();
        let beta = 3.0;
        let eta = 6.0 * beta * 2.0;
        let sub = ProjSubproblem::new(v(&[5.0, -4.0, 1.0, 0.0]), beta, v(&[1.0, 0.0, 0.0, 0.0]), &s, eta, 0.0)
            .unwrap();
        for rule in [AlphaRule::FirstStepFull, AlphaRule::OpenLoop, AlphaRule::ExactLinesearch] {
            let r = cgm_solve(&sub, &v(&[1.0, 0.0, 0.0, 0.0]), rule, &OracleCounters::new()).unwrap();
            assert!(r.steps <= 1, "{rule:?}");
            assert!(r.iterations <= sub.iteration_cap());
        }
    }

    #[test]
    fn already_optimal_start_returns_immediately() {
        let s = FeasibleSet::simplex(2).unwrap();
        let sub = ProjSubproblem::new(v(&[0.0, 1.0]), 1.0, v(&[1.0, 0.0]), &s, 0.1, 0.0).unwrap();
        let r = acgm_solve(&sub, &v(&[1.0, 0.0]), &OracleCounters::new()).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.u_plus, v(&[1.0, 0.0]));
    }

    #[test]
    fn zero_sigma_matches_exact_linesearch_cgm() {
        let s = FeasibleSet::l2_ball(Vector::zeros(3), 1.0).unwrap();
        let sub = ProjSubproblem::new(v(&[1.0, -2.0, 0.5]), 0.8, v(&[0.1, 0.2, 0.3]), &s, 1e-4, 0.0).unwrap();
        let u0 = v(&[0.0, 0.0, 1.0]);
        let a = acgm_solve(&sub, &u0, &OracleCounters::new()).unwrap();
        let b = cgm_solve(&sub, &u0, AlphaRule::ExactLinesearch, &OracleCounters::new()).unwrap();
        assert_eq!(a.u_plus, b.u_plus);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn iteration_cap_formula() {
        assert_eq!(iteration_cap(1.0, 2.0), 27);
        assert_eq!(iteration_cap(0.0, 1.0), 7);
        assert_eq!(iteration_cap(0.0, 0.0), 1);
        assert_eq!(iteration_cap(0.0, f64::NAN), 1);
        assert_eq!(iteration_cap(2.0, 1e300), usize::MAX);
    }

    #[test]
    fn guard_trips_on_impossible_budget() {
        let s = FeasibleSet::simplex(3).unwrap();
        let sub = ProjSubproblem::new(v(&[0.0, 0.0, 0.0]), 1.0, v(&[0.3, 0.3, 0.4]), &s, 1e-12, 0.0).unwrap();
        let err = acgm_solve_guarded(&sub, &v(&[1.0, 0.0, 0.0]), 3, &OracleCounters::new()).unwrap_err();
        assert!(matches!(err, Error::InnerGuard { limit: 3, .. }));
    }

    #[test]
    fn rejects_zero_eta_with_curvature() {
        let s = FeasibleSet::simplex(2).unwrap();
        let sub = ProjSubproblem::new(v(&[0.0, 1.0]), 1.0, v(&[1.0, 0.0]), &s, 0.0, 0.0).unwrap();
        assert!(acgm_solve(&sub, &v(&[0.0, 1.0]), &OracleCounters::new()).is_err());
    }
}
