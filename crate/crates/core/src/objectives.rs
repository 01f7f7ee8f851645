//! Convex test objectives with known Hölder smoothness.
//!
//! Both families are residual based, `r = A x - b`:
//!
//! * `Quadratic`: `f(x) = ½‖r‖²`, gradient Lipschitz with `M₁ = ‖A‖₂²`.
//! * `PNormResidual`: `f(x) = (1/p) Σ |rᵢ|^p` for `p ∈ (1, 2)`, whose
//!   gradient is `(p-1)`-Hölder continuous.

use std::cell::RefCell;

use rand::Rng;

use crate::error::{contract, Error, Result};
use crate::linalg::{Matrix, OracleCounters, Vector};
use crate::sets::FeasibleSet;

#[derive(Clone, Debug, PartialEq)]
pub enum ObjectiveKind {
    Quadratic,
    PNormResidual { p: f64 },
}

/// Hölder exponent and constant of an objective's gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Smoothness {
    pub nu: f64,
    pub m_nu: f64,
}

#[derive(Clone, Debug)]
pub struct Objective {
    kind: ObjectiveKind,
    a: Matrix,
    b: Vector,
    smoothness: Smoothness,
}

impl Objective {
    pub fn quadratic(a: Matrix, b: Vector) -> Result<Self> {
        b.check_dim(a.rows())?;
        let norm = a.spectral_norm();
        Ok(Self {
            kind: ObjectiveKind::Quadratic,
            smoothness: Smoothness { nu: 1.0, m_nu: norm * norm },
            a,
            b,
        })
    }

    pub fn pnorm_residual(a: Matrix, b: Vector, p: f64) -> Result<Self> {
        b.check_dim(a.rows())?;
        if !(p > 1.0 && p < 2.0) {
            return Err(contract(format!("p must lie in (1, 2), got {p}")));
        }
        let nu = p - 1.0;
        Ok(Self {
            kind: ObjectiveKind::PNormResidual { p },
            smoothness: Smoothness { nu, m_nu: pnorm_holder_constant(&a, p) },
            a,
            b,
        })
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn rhs(&self) -> &Vector {
        &self.b
    }

    /// Analytic `(ν, M_ν)`.
    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn residual(&self, x: &Vector) -> Vector {
        self.a.mul_vec(x).sub(&self.b)
    }

    pub fn value(&self, x: &Vector) -> f64 {
        let r = self.residual(x);
        match self.kind {
            ObjectiveKind::Quadratic => 0.5 * r.norm_sq(),
            ObjectiveKind::PNormResidual { p } => r.iter().map(|v| v.abs().powf(p)).sum::<f64>() / p,
        }
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        let r = self.residual(x);
        match self.kind {
            ObjectiveKind::Quadratic => self.a.tr_mul_vec(&r),
            ObjectiveKind::PNormResidual { p } => {
                let s = Vector::new(r.iter().map(|v| v.abs().powf(p - 1.0).copysign(*v)).collect())
                    .expect("finite residual");
                self.a.tr_mul_vec(&s)
            }
        }
    }
}

/// `M_ν = 2^{1-ν} m^{(1-ν)/2} ‖A‖₂^{1+ν}` with `ν = p - 1` and `m` rows.
///
/// The scalar map `t ↦ |t|^ν sign(t)` is ν-Hölder with constant `2^{1-ν}`;
/// lifting it to `ℝ^m` costs `m^{(1-ν)/2}` through `Σ|dᵢ|^{2ν} ≤ m^{1-ν}‖d‖^{2ν}`.
pub fn pnorm_holder_constant(a: &Matrix, p: f64) -> f64 {
    let nu = p - 1.0;
    let m = a.rows() as f64;
    2f64.powf(1.0 - nu) * m.powf(0.5 * (1.0 - nu)) * a.spectral_norm().powf(1.0 + nu)
}

/// Objective wrapper that records oracle calls on a run's counters.
///
/// The most recent gradient is cached under the exact bit pattern of its
/// query point, so a repeated request at the identical point counts once.
pub struct CountedObjective<'a> {
    inner: &'a Objective,
    counters: &'a OracleCounters,
    cache: RefCell<Option<(Vec<u64>, Vector)>>,
}

impl<'a> CountedObjective<'a> {
    pub fn new(inner: &'a Objective, counters: &'a OracleCounters) -> Self {
        Self { inner, counters, cache: RefCell::new(None) }
    }

    pub fn objective(&self) -> &'a Objective {
        self.inner
    }

    pub fn counters(&self) -> &'a OracleCounters {
        self.counters
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.counters.add_f();
        self.inner.value(x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        let key = x.bits();
        if let Some((k, g)) = self.cache.borrow().as_ref() {
            if *k == key {
                self.counters.add_grad(false);
                return g.clone();
            }
        }
        self.counters.add_grad(true);
        let g = self.inner.gradient(x);
        *self.cache.borrow_mut() = Some((key, g.clone()));
        g
    }
}

/// Largest observed `‖∇f(x) - ∇f(y)‖ / ‖x - y‖^ν` over random feasible
/// pairs; a lower estimate of the true Hölder constant.
pub fn estimate_holder<R: Rng + ?Sized>(
    obj: &Objective,
    set: &FeasibleSet,
    nu: f64,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if samples < 2 {
        return Err(contract("need at least two samples"));
    }
    if obj.dim() != set.dim() {
        return Err(Error::DimensionMismatch { expected: set.dim(), got: obj.dim() });
    }
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let x = set.sample(rng);
        let y = set.sample(rng);
        let d = x.dist(&y);
        if d == 0.0 {
            continue;
        }
        let ratio = obj.gradient(&x).dist(&obj.gradient(&y)) / d.powf(nu);
        best = best.max(ratio);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn quadratic_values() {
        let f = Objective::quadratic(Matrix::identity(2), v(&[1.0, 1.0])).unwrap();
        assert_eq!(f.value(&v(&[0.0, 0.0])), 1.0);
        assert_eq!(f.gradient(&v(&[1.0, 1.0])), v(&[0.0, 0.0]));
        assert!((f.smoothness().m_nu - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pnorm_scalar_values() {
        let f = Objective::pnorm_residual(Matrix::identity(1), v(&[0.0]), 1.5).unwrap();
        assert!((f.value(&v(&[4.0])) - 16.0 / 3.0).abs() < 1e-12);
        assert!((f.gradient(&v(&[4.0]))[0] - 2.0).abs() < 1e-12);
        assert!((f.gradient(&v(&[-4.0]))[0] + 2.0).abs() < 1e-12);
        assert_eq!(f.smoothness().nu, 0.5);
    }

    #[test]
    fn rejects_out_of_range_p() {
        assert!(Objective::pnorm_residual(Matrix::identity(1), v(&[0.0]), 2.0).is_err());
        assert!(Objective::pnorm_residual(Matrix::identity(1), v(&[0.0]), 1.0).is_err());
    }

    #[test]
    fn gradient_cache_counts_duplicates_once() {
        let f = Objective::quadratic(Matrix::identity(2), v(&[1.0, 1.0])).unwrap();
        let counters = OracleCounters::new();
        let cf = CountedObjective::new(&f, &counters);
        let x = v(&[0.5, 0.25]);
        cf.gradient(&x);
        cf.gradient(&x);
        cf.gradient(&v(&[0.5, 0.0]));
        cf.value(&x);
        let s = counters.snapshot();
        assert_eq!((s.grad_evals, s.grad_requests, s.f_evals), (2, 3, 1));
    }

    #[test]
    fn holder_estimate_skips_coincident_pairs() {
        // a one-point-ish sampling regime still yields a finite value
        let f = Objective::quadratic(Matrix::identity(2), v(&[0.0, 0.0])).unwrap();
        let s = FeasibleSet::simplex(2).unwrap();
        let est = estimate_holder(&f, &s, 1.0, 10, &mut seeded_rng(1)).unwrap();
        assert!(est.is_finite());
        assert!(estimate_holder(&f, &s, 1.0, 1, &mut seeded_rng(1)).is_err());
    }
}
