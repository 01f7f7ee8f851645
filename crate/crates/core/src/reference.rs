//! Slow, independent reference computations used to validate solver output.
//!
//! Nothing here shares step-size or termination code with the production
//! solvers. The subproblem oracle uses exact Euclidean projection, which the
//! solvers themselves never do.

use crate::error::{contract, Result};
use crate::inner::ProjSubproblem;
use crate::linalg::{combine, Vector};
use crate::problem::ProblemInstance;
use crate::sets::FeasibleSet;

#[derive(Clone, Debug)]
pub struct RefSolution {
    pub x: Vector,
    pub value: f64,
    /// Upper bound on `value - true optimum` (or on the distance between
    /// the reported lower bound and the best point found).
    pub accuracy_estimate: f64,
}

/// Euclidean projection onto the set.
pub fn project(set: &FeasibleSet, y: &Vector) -> Result<Vector> {
    y.check_dim(set.dim())?;
    Ok(match set {
        FeasibleSet::Simplex { .. } => Vector::new(project_simplex(y.as_slice(), 1.0))?,
        FeasibleSet::Box { lo, hi } => Vector::new(
            y.iter()
                .zip(lo.iter().zip(hi.iter()))
                .map(|(v, (l, h))| v.clamp(*l, *h))
                .collect(),
        )?,
        FeasibleSet::L2Ball { center, radius } => {
            let d = y.dist(center);
            if d <= *radius {
                y.clone()
            } else {
                center.axpy(radius / d, &y.sub(center))
            }
        }
        FeasibleSet::L1Ball { center, radius } => {
            let shifted = y.sub(center);
            let l1: f64 = shifted.iter().map(|v| v.abs()).sum();
            if l1 <= *radius {
                y.clone()
            } else {
                let mags: Vec<f64> = shifted.iter().map(|v| v.abs()).collect();
                let p = project_simplex(&mags, *radius);
                let out = shifted.iter().zip(&p).map(|(s, m)| m.copysign(*s));
                center.add(&Vector::new(out.collect())?)
            }
        }
    })
}

/// Projection onto `{x ≥ 0, Σx = total}` by sorting.
fn project_simplex(y: &[f64], total: f64) -> Vec<f64> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (i, s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - total) / (i as f64 + 1.0);
        if s - t > 0.0 {
            tau = t;
        }
    }
    y.iter().map(|v| (v - tau).max(0.0)).collect()
}

/// Minimizer of `φ` over the set.
///
/// For `β > 0` this is the projection of `anchor - g/β`; for `β = 0` the
/// model is linear and an exact LMO point is optimal.
pub fn ref_min_phi(sub: &ProjSubproblem<'_>) -> Result<RefSolution> {
    let x = if sub.beta > 0.0 {
        project(sub.set, &sub.anchor.axpy(-1.0 / sub.beta, &sub.g))?
    } else {
        sub.set.lmo(&sub.g)?
    };
    let (gap, _) = sub.set.wolfe_gap(&sub.phi_grad(&x), &x)?;
    Ok(RefSolution { value: sub.phi(&x), x, accuracy_estimate: gap.max(0.0) })
}

/// Optimal value of the problem.
///
/// Instances carrying a known optimum return it directly. Otherwise a plain
/// conditional gradient run with open-loop steps collects the lower bounds
/// `f(x_t) - gap_t`; `value` is the best lower bound and `x` the best point.
pub fn ref_fstar(problem: &ProblemInstance, max_iter: usize) -> Result<RefSolution> {
    if let (Some(fs), Some(x)) = (problem.fstar, problem.minimizer.as_ref()) {
        return Ok(RefSolution { x: x.clone(), value: fs, accuracy_estimate: 0.0 });
    }
    let obj = &problem.objective;
    let mut x = problem.x0.clone();
    let mut lower = f64::NEG_INFINITY;
    let mut best = (x.clone(), obj.value(&x));
    for t in 0..max_iter {
        let g = obj.gradient(&x);
        let v = problem.set.lmo(&g)?;
        let fx = obj.value(&x);
        let gap = g.dot(&x) - g.dot(&v);
        lower = lower.max(fx - gap);
        if fx < best.1 {
            best = (x.clone(), fx);
        }
        if best.1 - lower <= 1e-9 {
            break;
        }
        x = combine(&x, &v, 2.0 / (t as f64 + 2.0));
    }
    Ok(RefSolution { accuracy_estimate: best.1 - lower, x: best.0, value: lower })
}

/// Least-squares slope of `log y` against `log x` over the last
/// `tail_fraction` of the points.
pub fn fit_rate(xs: &[f64], ys: &[f64], tail_fraction: f64) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(contract("xs and ys differ in length"));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(contract(format!("tail fraction must lie in (0, 1], got {tail_fraction}")));
    }
    let keep = ((xs.len() as f64) * tail_fraction).ceil() as usize;
    let start = xs.len() - keep.min(xs.len());
    let (xs, ys) = (&xs[start..], &ys[start..]);
    if xs.len() < 10 {
        return Err(contract(format!("need at least 10 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(contract("rate fitting needs positive finite data"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(contract("abscissae are all equal"));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::Rng;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn interior_anchor_with_zero_gradient() {
        let s = FeasibleSet::simplex(3).unwrap();
        let anchor = v(&[0.2, 0.3, 0.5]);
        let sub = ProjSubproblem::new(Vector::zeros(3), 2.0, anchor.clone(), &s, 1.0, 0.0).unwrap();
        let r = ref_min_phi(&sub).unwrap();
        assert!(r.x.dist(&anchor) < 1e-15);
        assert!(r.value.abs() < 1e-15);
    }

    #[test]
    fn edge_case_matches_grid_scan() {
        let s = FeasibleSet::simplex(2).unwrap();
        let sub = ProjSubproblem::new(v(&[0.0, -1.0]), 1.0, v(&[1.0, 0.0]), &s, 1.0, 0.0).unwrap();
        let r = ref_min_phi(&sub).unwrap();
        // golden-section scan over λ ∈ [0, 1] on the edge (1-λ, λ)
        let phi = |l: f64| sub.phi(&v(&[1.0 - l, l]));
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - ratio * (b - a);
            let d = a + ratio * (b - a);
            if phi(c) < phi(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let scanned = phi(0.5 * (a + b));
        assert!((r.value - scanned).abs() < 1e-10, "{} vs {}", r.value, scanned);
        assert!((r.x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn huge_beta_stays_at_anchor() {
        let s = FeasibleSet::l1_ball(Vector::zeros(3), 1.0).unwrap();
        let anchor = v(&[0.5, -0.2, 0.1]);
        let sub = ProjSubproblem::new(v(&[1.0, 1.0, -1.0]), 1e12, anchor.clone(), &s, 1.0, 0.0).unwrap();
        assert!(ref_min_phi(&sub).unwrap().x.dist(&anchor) < 1e-11);
    }

    #[test]
    fn projection_is_optimal_against_samples() {
        let mut rng = seeded_rng(9);
        let sets = [
            FeasibleSet::simplex(4).unwrap(),
            FeasibleSet::l1_ball(v(&[0.1, 0.0, -0.2, 0.3]), 0.8).unwrap(),
            FeasibleSet::cube(Vector::filled(4, -0.5), Vector::filled(4, 1.0)).unwrap(),
            FeasibleSet::l2_ball(v(&[0.0, 1.0, 0.0, 0.0]), 0.6).unwrap(),
        ];
        for s in &sets {
            for _ in 0..50 {
                let y = Vector::new((0..4).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
                let p = project(s, &y).unwrap();
                assert!(s.contains_within(&p, 1e-12));
                let best = p.dist(&y);
                for _ in 0..200 {
                    assert!(s.sample(&mut rng).dist(&y) >= best - 1e-12);
                }
            }
        }
    }

    #[test]
    fn fit_rate_exact_power_laws() {
        let xs: Vec<f64> = (1..=50).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powi(-2)).collect();
        assert!((fit_rate(&xs, &ys, 1.0).unwrap() + 2.0).abs() < 1e-9);
        let ys: Vec<f64> = xs.iter().map(|x| 5.0 * x.powf(-0.5)).collect();
        assert!((fit_rate(&xs, &ys, 0.5).unwrap() + 0.5).abs() < 1e-9);
    }

    #[test]
    fn fit_rate_tolerates_noise() {
        let mut rng = seeded_rng(17);
        let xs: Vec<f64> = (1..=100).map(|i| 10f64.powf(i as f64 / 25.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(-1.3) * rng.gen_range(0.9..1.1)).collect();
        assert!((fit_rate(&xs, &ys, 1.0).unwrap() + 1.3).abs() < 0.1);
    }

    #[test]
    fn fit_rate_contract_errors() {
        let xs: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let mut ys = xs.clone();
        assert!(fit_rate(&xs, &ys, 0.3).is_err());
        ys[19] = 0.0;
        assert!(fit_rate(&xs, &ys, 1.0).is_err());
    }
}
