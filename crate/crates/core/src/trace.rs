//! Per-outer-iteration run traces and their CSV form.
//!
//! Floats are written in scientific notation with 17 significant digits,
//! which round-trips every finite `f64` exactly. Absent values are empty
//! fields. Lines end with `\n`.

use std::fmt::Write as _;

use crate::error::{contract, Result};

pub const CSV_HEADER: &str = "k,f_y,true_gap,certified_gap,L_k,gamma_k,beta_k,eta_k,inner_iters,\
lmo_calls_cum,grad_evals_cum,grad_evals_with_retries_cum,wall_ns";

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub k: u64,
    pub f_y: f64,
    pub true_gap: Option<f64>,
    pub certified_gap: Option<f64>,
    pub l_k: Option<f64>,
    pub gamma_k: f64,
    pub beta_k: f64,
    pub eta_k: f64,
    pub inner_iters: u64,
    pub lmo_calls_cum: u64,
    /// Gradients charged to accepted outer steps.
    pub grad_evals_cum: u64,
    /// All distinct gradient evaluations, backtracking retries included.
    pub grad_evals_with_retries_cum: u64,
    pub wall_ns: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Checks that cumulative counter columns never decrease and that the
    /// certificate never undercuts the true gap by more than `tol`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        for w in self.rows.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if b.lmo_calls_cum < a.lmo_calls_cum
                || b.grad_evals_cum < a.grad_evals_cum
                || b.grad_evals_with_retries_cum < a.grad_evals_with_retries_cum
            {
                return Err(contract(format!("counter decreased between k={} and k={}", a.k, b.k)));
            }
        }
        for r in &self.rows {
            if let (Some(c), Some(t)) = (r.certified_gap, r.true_gap) {
                if c < t - tol {
                    return Err(contract(format!("certificate {c:e} below true gap {t:e} at k={}", r.k)));
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.k,
                fmt_f(r.f_y),
                fmt_opt(r.true_gap),
                fmt_opt(r.certified_gap),
                fmt_opt(r.l_k),
                fmt_f(r.gamma_k),
                fmt_f(r.beta_k),
                fmt_f(r.eta_k),
                r.inner_iters,
                r.lmo_calls_cum,
                r.grad_evals_cum,
                r.grad_evals_with_retries_cum,
                r.wall_ns,
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == CSV_HEADER => {}
            other => return Err(contract(format!("unexpected CSV header: {other:?}"))),
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 13 {
                return Err(contract(format!("line {}: expected 13 fields, got {}", i + 2, fields.len())));
            }
            let at = |j: usize| (i + 2, fields[j]);
            rows.push(TraceRow {
                k: parse_u(at(0))?,
                f_y: parse_f(at(1))?,
                true_gap: parse_opt(at(2))?,
                certified_gap: parse_opt(at(3))?,
                l_k: parse_opt(at(4))?,
                gamma_k: parse_f(at(5))?,
                beta_k: parse_f(at(6))?,
                eta_k: parse_f(at(7))?,
                inner_iters: parse_u(at(8))?,
                lmo_calls_cum: parse_u(at(9))?,
                grad_evals_cum: parse_u(at(10))?,
                grad_evals_with_retries_cum: parse_u(at(11))?,
                wall_ns: parse_u(at(12))?,
            });
        }
        Ok(Self { rows })
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

fn parse_f((line, s): (usize, &str)) -> Result<f64> {
    s.parse().map_err(|_| contract(format!("line {line}: bad number {s:?}")))
}

fn parse_u((line, s): (usize, &str)) -> Result<u64> {
    s.parse().map_err(|_| contract(format!("line {line}: bad integer {s:?}")))
}

fn parse_opt((line, s): (usize, &str)) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f((line, s)).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn finite() -> impl Strategy<Value = f64> {
        prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
    }

    prop_compose! {
        fn row()(k in 0u64..1_000_000, f_y in finite(), tg in prop::option::of(finite()),
                 cg in prop::option::of(finite()), l in prop::option::of(finite()),
                 g in finite(), b in finite(), e in finite(),
                 counts in prop::array::uniform5(any::<u64>())) -> TraceRow {
            TraceRow {
                k, f_y, true_gap: tg, certified_gap: cg, l_k: l, gamma_k: g, beta_k: b, eta_k: e,
                inner_iters: counts[0], lmo_calls_cum: counts[1], grad_evals_cum: counts[2],
                grad_evals_with_retries_cum: counts[3], wall_ns: counts[4],
            }
        }
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in prop::collection::vec(row(), 0..20)) {
            let t = RunTrace { rows };
            let text = t.to_csv();
            prop_assert!(!text.contains('\r'));
            prop_assert_eq!(RunTrace::from_csv(&text).unwrap(), t);
        }
    }

    #[test]
    fn rejects_bad_header_and_fields() {
        assert!(RunTrace::from_csv("k,f\n").is_err());
        let bad = format!("{CSV_HEADER}\n1,2\n");
        assert!(RunTrace::from_csv(&bad).is_err());
    }
}
