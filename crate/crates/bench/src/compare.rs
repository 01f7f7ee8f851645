//! LMO cost of reaching each accuracy on a grid, per method, and the fitted
//! log-log slope of that cost against `1/ε`.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use ucgs_core::reference::fit_rate;
use ucgs_core::ProblemInstance;

use crate::config::{ConfigError, GapMetric, MethodKind, Origin, RunConfig};
use crate::run::execute;
use crate::BenchError;

/// Grids shorter than this are tabulated but never fitted.
pub const MIN_GRID: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct CompareCell {
    pub method: MethodKind,
    pub epsilon: f64,
    /// LMO calls when the gap first reached `epsilon`; `None` if censored.
    pub lmo_calls: Option<u64>,
    pub grad_evals: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodSlope {
    pub method: MethodKind,
    pub points: usize,
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub metric: GapMetric,
    pub budget: u64,
    pub cells: Vec<CompareCell>,
    pub slopes: Vec<MethodSlope>,
    pub fit_refused: bool,
}

impl CompareReport {
    pub fn cell(&self, method: MethodKind, epsilon: f64) -> Option<&CompareCell> {
        self.cells.iter().find(|c| c.method == method && c.epsilon == epsilon)
    }

    pub fn slope(&self, method: MethodKind) -> Option<f64> {
        self.slopes.iter().find(|s| s.method == method).and_then(|s| s.slope)
    }

    /// Whether the UCGS slope lies below the CG slope, when both were fitted.
    pub fn ucgs_below_cg(&self) -> Option<bool> {
        Some(self.slope(MethodKind::Ucgs)? < self.slope(MethodKind::Cg)?)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let metric = match self.metric {
            GapMetric::Certified => "certified",
            GapMetric::True => "true",
        };
        let _ = writeln!(out, "gap={metric} budget={}", self.budget);
        let _ = writeln!(out, "{:<12} {:>14} {:>12} {:>12}", "method", "epsilon", "lmo_calls", "grad_evals");
        for c in &self.cells {
            let lmo = c.lmo_calls.map(|v| v.to_string()).unwrap_or_else(|| "censored".into());
            let grad = c.grad_evals.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(out, "{:<12} {:>14.6e} {:>12} {:>12}", c.method.name(), c.epsilon, lmo, grad);
        }
        if self.fit_refused {
            let _ = writeln!(out, "fit skipped: grid has fewer than {MIN_GRID} values");
            return out;
        }
        for s in &self.slopes {
            match s.slope {
                Some(v) => {
                    let _ = writeln!(out, "slope {} = {v:.4} ({} points)", s.method.name(), s.points);
                }
                None => {
                    let _ = writeln!(out, "slope {} = n/a (only {} uncensored points)", s.method.name(), s.points);
                }
            }
        }
        if let Some(flag) = self.ucgs_below_cg() {
            let _ = writeln!(out, "ucgs slope below cg slope: {}", if flag { "yes" } else { "no" });
        }
        out
    }
}

fn check_grid(cfg: &RunConfig) -> Result<(), ConfigError> {
    let spec = &cfg.compare;
    let err = |message: &str| ConfigError { origin: Origin::Default, key: None, message: message.into() };
    if spec.methods.len() < 2 {
        return Err(err("compare needs at least two methods"));
    }
    if spec.metric == GapMetric::Certified && spec.methods.contains(&MethodKind::GugSliding) {
        return Err(err("gug-sliding has no certificate; use gap = true"));
    }
    let g = &spec.eps_grid;
    if g.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(err("eps_grid must be strictly decreasing"));
    }
    if g.len() >= 3 {
        let first = (g[0] / g[1]).ln();
        if g.windows(2).any(|w| ((w[0] / w[1]).ln() - first).abs() > 1e-6 * first.abs()) {
            return Err(err("eps_grid must be geometrically spaced"));
        }
    }
    Ok(())
}

fn run_cell(
    cfg: &RunConfig,
    problem: &ProblemInstance,
    method: MethodKind,
    epsilon: f64,
) -> ucgs_core::Result<CompareCell> {
    let budget = cfg.compare.budget;
    let metric = cfg.compare.metric;
    let mut c = cfg.clone();
    c.method = method;
    c.timing = false;
    c.params.max_lmo_calls = Some(budget);
    c.params.target_gap = None;
    c.params.target_certified = None;
    match method {
        MethodKind::Cg | MethodKind::GugSliding => {
            c.params.n = usize::try_from(budget).unwrap_or(usize::MAX).saturating_add(1);
            match metric {
                GapMetric::Certified => c.params.target_certified = Some(epsilon),
                GapMetric::True => c.params.target_gap = Some(epsilon),
            }
        }
        MethodKind::Ucgs => c.params.epsilon = epsilon,
    }
    let outcome = execute(&c, problem, false)?;
    let hit = outcome.trace().rows.iter().find(|r| {
        let gap = match metric {
            GapMetric::Certified => r.certified_gap,
            GapMetric::True => r.true_gap,
        };
        gap.is_some_and(|g| g <= epsilon)
    });
    let hit = hit.filter(|r| r.lmo_calls_cum <= budget);
    Ok(CompareCell {
        method,
        epsilon,
        lmo_calls: hit.map(|r| r.lmo_calls_cum),
        grad_evals: hit.map(|r| r.grad_evals_with_retries_cum),
    })
}

/// Runs every (method, ε) pair on up to `jobs` threads.
pub fn compare(cfg: &RunConfig, jobs: usize) -> Result<CompareReport, BenchError> {
    check_grid(cfg)?;
    let problem = cfg.instance.build()?;
    let tasks: Vec<(MethodKind, f64)> = cfg
        .compare
        .methods
        .iter()
        .flat_map(|m| cfg.compare.eps_grid.iter().map(move |e| (*m, *e)))
        .collect();
    let results: Mutex<Vec<Option<ucgs_core::Result<CompareCell>>>> =
        Mutex::new(tasks.iter().map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = jobs.clamp(1, tasks.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(method, eps)) = tasks.get(i) else { break };
                let cell = run_cell(cfg, &problem, method, eps);
                results.lock().expect("result slot poisoned")[i] = Some(cell);
            });
        }
    });
    let mut cells = Vec::with_capacity(tasks.len());
    for r in results.into_inner().expect("result slot poisoned") {
        cells.push(r.expect("every task ran")?);
    }

    let fit_refused = cfg.compare.eps_grid.len() < MIN_GRID;
    let mut slopes = Vec::new();
    if !fit_refused {
        for &method in &cfg.compare.methods {
            let (xs, ys): (Vec<f64>, Vec<f64>) = cells
                .iter()
                .filter(|c| c.method == method)
                .filter_map(|c| c.lmo_calls.map(|n| (1.0 / c.epsilon, n as f64)))
                .unzip();
            let slope = fit_rate(&xs, &ys, 1.0).ok();
            slopes.push(MethodSlope { method, points: xs.len(), slope });
        }
    }
    Ok(CompareReport { metric: cfg.compare.metric, budget: cfg.compare.budget, cells, slopes, fit_refused })
}
