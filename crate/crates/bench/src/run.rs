//! Executes one configured method on one instance.

use std::fmt::Write as _;

use ucgs_core::gug::{gug_run, GugOptions, GugRegime, GugRun, GugSchedule, StopReason};
use ucgs_core::ucgs::{ucgs_run, UcgsRun, UcgsStatus};
use ucgs_core::{CounterSnapshot, OracleCounters, ProblemInstance, RunTrace};

use crate::config::{MethodKind, RunConfig};

#[derive(Debug)]
pub enum Detail {
    Gug(GugRun),
    Ucgs(UcgsRun),
}

#[derive(Debug)]
pub struct RunOutcome {
    pub method: MethodKind,
    pub status: &'static str,
    pub counters: CounterSnapshot,
    pub detail: Detail,
}

impl RunOutcome {
    pub fn trace(&self) -> &RunTrace {
        match &self.detail {
            Detail::Gug(r) => &r.trace,
            Detail::Ucgs(r) => &r.trace,
        }
    }

    /// One line with the final gaps and oracle counters.
    pub fn summary(&self) -> String {
        let mut s = format!("method={} status={}", self.method.name(), self.status);
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into());
        match self.trace().last() {
            Some(row) => {
                let _ = write!(
                    s,
                    " k={} f_y={:.6e} true_gap={} certified_gap={}",
                    row.k,
                    row.f_y,
                    opt(row.true_gap),
                    opt(row.certified_gap)
                );
            }
            None => s.push_str(" k=0"),
        }
        let c = &self.counters;
        let _ = write!(
            s,
            " lmo_calls={} grad_evals={} grad_requests={} f_evals={}",
            c.lmo_calls, c.grad_evals, c.grad_requests, c.f_evals
        );
        s
    }
}

/// Smoothness for the sliding schedule: configured values first, the
/// instance's analytic ones otherwise.
pub fn sliding_smoothness(cfg: &RunConfig, problem: &ProblemInstance) -> (f64, f64) {
    let analytic = problem.objective.smoothness();
    (cfg.params.nu.unwrap_or(analytic.nu), cfg.params.m_nu.unwrap_or(analytic.m_nu))
}

pub fn execute(cfg: &RunConfig, problem: &ProblemInstance, record_steps: bool) -> ucgs_core::Result<RunOutcome> {
    let counters = OracleCounters::default();
    let p = &cfg.params;
    let (status, detail) = match cfg.method {
        MethodKind::Cg | MethodKind::GugSliding => {
            let regime = match cfg.method {
                MethodKind::Cg => GugRegime::Cg,
                _ => {
                    let (nu, m_nu) = sliding_smoothness(cfg, problem);
                    GugRegime::Sliding { nu, m_nu }
                }
            };
            let schedule = GugSchedule::new(regime, problem.diameter())?;
            let options = GugOptions {
                record_steps,
                target_gap: p.target_gap,
                target_certified: p.target_certified,
                max_lmo_calls: p.max_lmo_calls,
                timing: cfg.timing,
            };
            let run = gug_run(problem, &schedule, p.n, &options, &counters)?;
            let status = match run.stop {
                StopReason::IterationLimit => "iteration-limit",
                StopReason::TargetReached => "target-reached",
                StopReason::LmoBudget => "lmo-budget",
            };
            (status, Detail::Gug(run))
        }
        MethodKind::Ucgs => {
            let options = ucgs_core::ucgs::UcgsOptions { record_steps, ..cfg.ucgs_options() };
            let run = ucgs_run(problem, &options, &counters)?;
            let status = match run.status {
                UcgsStatus::Converged => "converged",
                UcgsStatus::IterationLimit => "iteration-limit",
                UcgsStatus::LmoBudget => "lmo-budget",
            };
            (status, Detail::Ucgs(run))
        }
    };
    Ok(RunOutcome { method: cfg.method, status, counters: counters.snapshot(), detail })
}
