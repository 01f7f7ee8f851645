//! Compact convex sets with exact linear minimization oracles.
//!
//! Every oracle breaks ties deterministically (lowest index wins) so that
//! solver traces are bit-reproducible. A zero cost vector returns the set's
//! canonical center.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{contract, Result};
use crate::linalg::{combine, OracleCounters, Vector, MEMBERSHIP_TOL};

#[derive(Clone, Debug, PartialEq)]
pub enum FeasibleSet {
    /// Probability simplex `{x ≥ 0, Σ x = 1}`.
    Simplex { n: usize },
    L1Ball { center: Vector, radius: f64 },
    Box { lo: Vector, hi: Vector },
    L2Ball { center: Vector, radius: f64 },
}

impl FeasibleSet {
    pub fn simplex(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(contract("simplex needs dimension at least 2"));
        }
        Ok(Self::Simplex { n })
    }

    pub fn l1_ball(center: Vector, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self::L1Ball { center, radius })
    }

    pub fn l2_ball(center: Vector, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self::L2Ball { center, radius })
    }

    pub fn cube(lo: Vector, hi: Vector) -> Result<Self> {
        hi.check_dim(lo.len())?;
        if lo.is_empty() {
            return Err(contract("box must have positive dimension"));
        }
        if lo.iter().zip(hi.iter()).any(|(l, h)| l >= h) {
            return Err(contract("box bounds must satisfy lo < hi componentwise"));
        }
        Ok(Self::Box { lo, hi })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Simplex { n } => *n,
            Self::L1Ball { center, .. } | Self::L2Ball { center, .. } => center.len(),
            Self::Box { lo, .. } => lo.len(),
        }
    }

    /// Exact Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        match self {
            Self::Simplex { .. } => std::f64::consts::SQRT_2,
            Self::L1Ball { radius, .. } | Self::L2Ball { radius, .. } => 2.0 * radius,
            Self::Box { lo, hi } => hi.dist(lo),
        }
    }

    /// Barycenter, midpoint, or center.
    pub fn center(&self) -> Vector {
        match self {
            Self::Simplex { n } => Vector::filled(*n, 1.0 / *n as f64),
            Self::L1Ball { center, .. } | Self::L2Ball { center, .. } => center.clone(),
            Self::Box { lo, hi } => combine(lo, hi, 0.5),
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.contains_within(x, MEMBERSHIP_TOL)
    }

    pub fn contains_within(&self, x: &Vector, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Self::Simplex { .. } => {
                let sum: f64 = x.iter().sum();
                x.iter().all(|&v| v >= -tol) && (sum - 1.0).abs() <= tol
            }
            Self::L1Ball { center, radius } => {
                let d: f64 = x.iter().zip(center.iter()).map(|(a, c)| (a - c).abs()).sum();
                d <= radius + tol
            }
            Self::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol),
            Self::L2Ball { center, radius } => x.dist(center) <= radius + tol,
        }
    }

    /// Exact minimizer of `⟨c, x⟩` over the set.
    pub fn lmo(&self, c: &Vector) -> Result<Vector> {
        c.check_dim(self.dim())?;
        if c.is_zero() {
            return Ok(self.center());
        }
        Ok(match self {
            Self::Simplex { n } => Vector::basis(*n, argmin_lowest(c.iter().copied()), 1.0),
            Self::L1Ball { center, radius } => {
                let i = argmin_lowest(c.iter().map(|v| -v.abs()));
                let step = if c[i] > 0.0 { -radius } else { *radius };
                center.add(&Vector::basis(center.len(), i, step))
            }
            Self::Box { lo, hi } => Vector::from_raw(
                c.iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .map(|(ci, (l, h))| if *ci < 0.0 { *h } else { *l })
                    .collect(),
            ),
            Self::L2Ball { center, radius } => center.axpy(-radius / c.norm(), c),
        })
    }

    /// [`lmo`](Self::lmo) with the call recorded on `counters`.
    pub fn lmo_counted(&self, c: &Vector, counters: &OracleCounters) -> Result<Vector> {
        counters.add_lmo();
        self.lmo(c)
    }

    /// Wolfe gap `max_x ⟨g, u - x⟩` and the LMO point attaining it.
    pub fn wolfe_gap(&self, g: &Vector, u: &Vector) -> Result<(f64, Vector)> {
        u.check_dim(self.dim())?;
        let v = self.lmo(g)?;
        Ok((g.dot(u) - g.dot(&v), v))
    }

    pub fn wolfe_gap_counted(
        &self,
        g: &Vector,
        u: &Vector,
        counters: &OracleCounters,
    ) -> Result<(f64, Vector)> {
        counters.add_lmo();
        self.wolfe_gap(g, u)
    }

    /// Draws a feasible point. The distribution covers the whole set but is
    /// not uniform for every kind.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        match self {
            Self::Simplex { n } => dirichlet(*n, rng),
            Self::L1Ball { center, radius } => {
                // drop the slack coordinate of a Dirichlet draw on n + 1 points
                let w = dirichlet(center.len() + 1, rng);
                let mut out = center.clone().into_inner();
                for (o, wi) in out.iter_mut().zip(w.iter()) {
                    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    *o += sign * radius * wi;
                }
                Vector::from_raw(out)
            }
            Self::Box { lo, hi } => Vector::from_raw(
                lo.iter()
                    .zip(hi.iter())
                    .map(|(l, h)| l + (h - l) * rng.gen::<f64>())
                    .collect(),
            ),
            Self::L2Ball { center, radius } => {
                let n = center.len();
                let dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
                let dir = Vector::from_raw(dir);
                let norm = dir.norm();
                if norm == 0.0 {
                    return center.clone();
                }
                let r = radius * rng.gen::<f64>().powf(1.0 / n as f64);
                center.axpy(r / norm, &dir)
            }
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(contract(format!("radius must be positive and finite, got {radius}")));
    }
    Ok(())
}

fn argmin_lowest(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn dirichlet<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect::<Vec<f64>>();
    let total: f64 = draws.iter().sum();
    Vector::from_raw(draws.into_iter().map(|d| d / total).collect())
}

/// Additive error budget for an approximate LMO, as a function of the
/// 1-based call index `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorBudget {
    Constant(f64),
    /// `δ(t) = scale / t`
    Harmonic { scale: f64 },
}

impl ErrorBudget {
    pub fn at(&self, t: usize) -> f64 {
        match *self {
            Self::Constant(d) => d,
            Self::Harmonic { scale } => scale / t.max(1) as f64,
        }
    }
}

/// Approximate LMO that deliberately spends its whole error budget.
///
/// The returned point lies on the segment from the exact minimizer toward the
/// exact maximizer, placed so its linear suboptimality equals
/// `min(δ(t), range)`.
#[derive(Clone, Debug)]
pub struct ApproxLmo<'a> {
    pub base: &'a FeasibleSet,
    pub budget: ErrorBudget,
}

impl<'a> ApproxLmo<'a> {
    pub fn new(base: &'a FeasibleSet, budget: ErrorBudget) -> Result<Self> {
        let probe = budget.at(1);
        if !(probe.is_finite() && probe >= 0.0) {
            return Err(contract(format!("error budget must be nonnegative, got {probe}")));
        }
        Ok(Self { base, budget })
    }

    pub fn solve(&self, c: &Vector, t: usize) -> Result<Vector> {
        let delta = self.budget.at(t);
        let best = self.base.lmo(c)?;
        if delta <= 0.0 {
            return Ok(best);
        }
        let worst = self.base.lmo(&c.neg())?;
        let range = c.dot(&worst) - c.dot(&best);
        if range <= 0.0 {
            return Ok(best);
        }
        let theta = (delta / range).min(1.0);
        Ok(combine(&best, &worst, theta))
    }

    pub fn solve_counted(&self, c: &Vector, t: usize, counters: &OracleCounters) -> Result<Vector> {
        counters.add_lmo();
        self.solve(c, t)
    }
}

/// Approximate minimizer of `⟨c, x⟩` with additive error at most `δ(t)`.
pub fn approx_lmo(w: &ApproxLmo<'_>, c: &Vector, t: usize) -> Result<Vector> {
    w.solve(c, t)
}
