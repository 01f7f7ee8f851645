//! Runtime checks of the solvers' guarantees on a configured instance.
//!
//! Each check is a family of inequalities `lhs ≤ rhs + tol`; the report
//! lists the number checked, the violations, and the tightest margin.

use std::fmt::Write as _;

use ucgs_core::gug::GugRun;
use ucgs_core::rng::seeded_rng;
use ucgs_core::ucgs::{grad_eval_bound, l_ceiling, lmo_bound, step_product_bound, UcgsOptions, UcgsRun};
use ucgs_core::{ProblemInstance, RunTrace, Vector};

use crate::config::{MethodKind, RunConfig};
use crate::run::{execute, Detail};
use crate::BenchError;

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Accumulates one family of inequalities.
#[derive(Clone, Debug)]
pub struct Tally {
    name: String,
    checked: usize,
    violations: usize,
    worst: f64,
    worst_at: u64,
}

impl Tally {
    pub fn new(name: &str) -> Self {
        Self { name: name.into(), checked: 0, violations: 0, worst: f64::INFINITY, worst_at: 0 }
    }

    /// Records `lhs ≤ rhs + tol` at step `k`.
    pub fn observe(&mut self, k: u64, lhs: f64, rhs: f64, tol: f64) {
        let margin = rhs - lhs;
        self.checked += 1;
        if !(margin >= -tol) {
            self.violations += 1;
        }
        if margin < self.worst || margin.is_nan() {
            self.worst = margin;
            self.worst_at = k;
        }
    }

    pub fn violations(&self) -> usize {
        self.violations
    }

    pub fn verdict(&self) -> Verdict {
        let detail = if self.checked == 0 {
            "nothing to check".to_string()
        } else {
            format!(
                "{} checked, {} violations, tightest margin {:.3e} at k={}",
                self.checked, self.violations, self.worst, self.worst_at
            )
        };
        Verdict { name: self.name.clone(), passed: self.violations == 0, detail }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CertifyReport {
    pub verdicts: Vec<Verdict>,
}

impl CertifyReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            let _ = writeln!(out, "{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
        }
        let failed = self.verdicts.iter().filter(|v| !v.passed).count();
        let _ = writeln!(out, "{} checks, {failed} failed", self.verdicts.len());
        out
    }
}

fn flag(name: &str, passed: bool, detail: String) -> Verdict {
    Verdict { name: name.into(), passed, detail }
}

/// `1 + ⌈(7σ + 6) k⌉`, the inner iteration budget at outer step `k`.
pub fn inner_cap(sigma: f64, k: usize) -> u64 {
    1 + ((7.0 * sigma + 6.0) * k as f64).ceil() as u64
}

/// Checks on a UCGS run recorded with `record_steps`.
pub fn ucgs_checks(
    problem: &ProblemInstance,
    options: &UcgsOptions,
    run: &UcgsRun,
    samples: usize,
    seed: u64,
) -> Vec<Verdict> {
    let eps = options.epsilon;
    let d = problem.diameter();
    let d2 = d * d;
    let sm = problem.objective.smoothness();
    let sigma = options.sigma.max(options.sigma_cert);
    let mut out = Vec::new();

    let converged = run.certified_gap <= eps;
    out.push(flag(
        "certified termination",
        converged,
        format!("certified gap {:.6e} vs epsilon {eps:.1e} after {} steps", run.certified_gap, run.outer_steps),
    ));
    if let Some(fs) = problem.fstar {
        let gap = run.f_final - fs;
        out.push(flag("true gap at termination", !converged || gap <= eps, format!("f(y) - f* = {gap:.6e}")));
    }
    out.push(trace_verdict(&run.trace));

    let mut big_gamma = Tally::new("gamma bookkeeping");
    let mut cap = Tally::new("inner iteration cap");
    let mut ceiling = Tally::new("L ceiling");
    let mut product = Tally::new("step product bound");
    let mut gap_model = Tally::new("gap-model inequality");
    let mut lower = Tally::new("lower model below f");

    let mut rng = seeded_rng(seed);
    let points: Vec<(Vector, f64)> = (0..samples)
        .map(|_| {
            let x = problem.set.sample(&mut rng);
            let fx = problem.objective.value(&x);
            (x, fx)
        })
        .collect();

    for st in &run.steps {
        let a = &st.accepted;
        let k = a.k as u64;
        let scale = a.big_gamma.abs().max(f64::MIN_POSITIVE);
        big_gamma.observe(k, (a.big_gamma - a.l * a.gamma * a.gamma / a.k as f64).abs(), 0.0, 1e-12 * scale);
        if a.k == 1 {
            big_gamma.observe(k, (a.gamma - 1.0).abs(), 0.0, 0.0);
        } else {
            big_gamma.observe(k, (a.big_gamma - (1.0 - a.gamma) * st.gamma_prev_big).abs(), 0.0, 1e-12 * scale);
        }
        for &it in &a.trial_inner_iterations {
            cap.observe(k, it as f64, inner_cap(options.sigma, a.k) as f64, 0.0);
        }
        if let Ok(bound) = l_ceiling(sm.nu, sm.m_nu, eps, a.gamma) {
            ceiling.observe(k, a.l, bound, 1e-9 * bound.max(1.0));
        }
        if let Ok(bound) = step_product_bound(sm.nu, sm.m_nu, eps, a.k) {
            product.observe(k, a.l * a.gamma * a.gamma, bound, 1e-12 * bound);
        }
        if let Some(xhat) = &problem.minimizer {
            let lhs = a.f_y - st.model.eval(xhat);
            gap_model.observe(k, lhs, eps / 2.0 + 1.5 * a.l * a.gamma * a.gamma * d2, 1e-8);
        }
        for (x, fx) in &points {
            lower.observe(k, st.model.eval(x), *fx, 1e-9);
        }
    }
    for t in [big_gamma, cap, ceiling, product, gap_model, lower] {
        out.push(t.verdict());
    }

    if let Ok(n_grad) = grad_eval_bound(sm.nu, sm.m_nu, d, eps, sigma) {
        let accepted = run.outer_steps as u64;
        let with_retries = run.trace.last().map_or(0, |r| r.grad_evals_with_retries_cum);
        let lmo = run.trace.last().map_or(0, |r| r.lmo_calls_cum);
        let factor = 2.0 + (run.l_max / run.l_min_observed).log2();
        out.push(flag(
            "gradient bound",
            accepted <= n_grad,
            format!("{accepted} accepted-step gradients vs bound {n_grad}"),
        ));
        out.push(flag(
            "gradient bound with retries",
            with_retries as f64 <= n_grad as f64 * factor,
            format!("{with_retries} gradients vs {:.0}", n_grad as f64 * factor),
        ));
        let lmo_cap = lmo_bound(n_grad, sigma);
        out.push(flag("LMO bound", lmo <= lmo_cap, format!("{lmo} LMO calls vs bound {lmo_cap}")));
    }
    out
}

/// Checks on a plain or sliding GUG run recorded with `record_steps`.
pub fn gug_checks(problem: &ProblemInstance, method: MethodKind, run: &GugRun) -> Vec<Verdict> {
    let mut out = vec![trace_verdict(&run.trace)];
    let mut feasible = Tally::new("iterates feasible");
    for st in &run.steps {
        let ok = problem.set.contains_within(&st.x, 1e-9) && problem.set.contains_within(&st.y, 1e-9);
        feasible.observe(st.k as u64, if ok { 0.0 } else { 1.0 }, 0.0, 0.0);
    }
    out.push(feasible.verdict());
    let mut lmo = Tally::new(match method {
        MethodKind::Cg => "one LMO per step",
        _ => "inner LMO calls per step",
    });
    let mut prev = 0u64;
    for r in &run.trace.rows {
        let used = r.lmo_calls_cum - prev;
        prev = r.lmo_calls_cum;
        match method {
            MethodKind::Cg => lmo.observe(r.k, (used as f64 - 1.0).abs(), 0.0, 0.0),
            _ => lmo.observe(r.k, used as f64, (r.k + 1) as f64, 0.0),
        }
    }
    out.push(lmo.verdict());
    if let Some(last) = run.trace.last() {
        if method == MethodKind::Cg {
            if let Some(c) = last.certified_gap {
                let ok = last.true_gap.is_none_or(|t| c >= t - 1e-9);
                out.push(flag("duality certificate", ok, format!("final certificate {c:.6e}")));
            }
        } else {
            let n = last.k;
            let total = n * (n + 3) / 2;
            out.push(flag(
                "total LMO calls",
                last.lmo_calls_cum <= total,
                format!("{} vs sum of (k+1) = {total}", last.lmo_calls_cum),
            ));
        }
    }
    out
}

fn trace_verdict(trace: &RunTrace) -> Verdict {
    match trace.check_invariants(1e-9) {
        Ok(()) => flag("trace invariants", true, format!("{} rows", trace.len())),
        Err(e) => flag("trace invariants", false, e.to_string()),
    }
}

/// Runs the configured method with full recording and every applicable check.
pub fn certify(cfg: &RunConfig) -> Result<CertifyReport, BenchError> {
    let problem = cfg.instance.build()?;
    let mut cfg = cfg.clone();
    cfg.timing = false;
    let outcome = execute(&cfg, &problem, true)?;
    let mut verdicts = match &outcome.detail {
        Detail::Ucgs(run) => {
            let options = UcgsOptions { record_steps: true, ..cfg.ucgs_options() };
            ucgs_checks(&problem, &options, run, cfg.certify_samples, cfg.instance.seed ^ 0x5eed)
        }
        Detail::Gug(run) => gug_checks(&problem, cfg.method, run),
    };
    let csv = outcome.trace().to_csv();
    let round_trip = RunTrace::from_csv(&csv).is_ok_and(|t| &t == outcome.trace());
    verdicts.push(flag("CSV round trip", round_trip, format!("{} bytes", csv.len())));
    let again = execute(&cfg, &problem, false)?;
    verdicts.push(flag(
        "deterministic rerun",
        again.trace().to_csv() == csv,
        "second run compared byte for byte".into(),
    ));
    Ok(CertifyReport { verdicts })
}
