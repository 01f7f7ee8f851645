//! Problem bundling and seeded generation of known-optimum instances.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{contract, Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::objectives::Objective;
use crate::rng::seeded_rng;
use crate::sets::FeasibleSet;

/// Objective, feasible set, feasible start, and (for verification only) the
/// optimal value and a known minimizer.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub objective: Objective,
    pub set: FeasibleSet,
    pub x0: Vector,
    pub fstar: Option<f64>,
    pub minimizer: Option<Vector>,
}

impl ProblemInstance {
    pub fn new(objective: Objective, set: FeasibleSet, x0: Vector) -> Result<Self> {
        if objective.dim() != set.dim() {
            return Err(Error::DimensionMismatch { expected: set.dim(), got: objective.dim() });
        }
        x0.check_dim(set.dim())?;
        if !set.contains(&x0) {
            return Err(Error::InfeasibleStart);
        }
        Ok(Self { objective, set, x0, fstar: None, minimizer: None })
    }

    pub fn with_optimum(mut self, minimizer: Vector, fstar: f64) -> Result<Self> {
        minimizer.check_dim(self.set.dim())?;
        if !self.set.contains(&minimizer) {
            return Err(contract("declared minimizer is infeasible"));
        }
        self.minimizer = Some(minimizer);
        self.fstar = Some(fstar);
        Ok(self)
    }

    pub fn diameter(&self) -> f64 {
        self.set.diameter()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObjectiveSpec {
    Quadratic,
    PNorm { p: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SetSpec {
    Simplex,
    L1Ball { radius: f64 },
    Box { lo: f64, hi: f64 },
    L2Ball { radius: f64 },
}

/// Parameters of a generated instance.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub objective: ObjectiveSpec,
    pub set: SetSpec,
    pub dim: usize,
    pub rows: usize,
    pub seed: u64,
}

impl InstanceSpec {
    /// Builds `A` with i.i.d. `N(0, 1/rows)` entries, samples `x̄` in the
    /// relative interior of the set and sets `b = A x̄`, so `f* = 0` at `x̄`.
    /// The start point is the LMO vertex for the all-ones direction.
    pub fn build(&self) -> Result<ProblemInstance> {
        if self.dim == 0 || self.rows == 0 {
            return Err(contract("dimension and rows must be positive"));
        }
        let n = self.dim;
        let set = match self.set {
            SetSpec::Simplex => FeasibleSet::simplex(n)?,
            SetSpec::L1Ball { radius } => FeasibleSet::l1_ball(Vector::zeros(n), radius)?,
            SetSpec::L2Ball { radius } => FeasibleSet::l2_ball(Vector::zeros(n), radius)?,
            SetSpec::Box { lo, hi } => FeasibleSet::cube(Vector::filled(n, lo), Vector::filled(n, hi))?,
        };
        let mut rng = seeded_rng(self.seed);
        let scale = 1.0 / (self.rows as f64).sqrt();
        let data: Vec<f64> = (0..self.rows * n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                scale * z
            })
            .collect();
        let a = Matrix::from_row_major(self.rows, n, data)?;
        // pull the draw toward the center so it stays strictly inside
        let xbar = crate::linalg::combine(&set.sample(&mut rng), &set.center(), 0.1);
        let b = a.mul_vec(&xbar);
        let objective = match self.objective {
            ObjectiveSpec::Quadratic => Objective::quadratic(a, b)?,
            ObjectiveSpec::PNorm { p } => Objective::pnorm_residual(a, b, p)?,
        };
        let x0 = set.lmo(&Vector::filled(n, 1.0))?;
        ProblemInstance::new(objective, set, x0)?.with_optimum(xbar, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_instance_has_zero_optimum() {
        for objective in [ObjectiveSpec::Quadratic, ObjectiveSpec::PNorm { p: 1.5 }] {
            for set in [
                SetSpec::Simplex,
                SetSpec::L1Ball { radius: 1.0 },
                SetSpec::Box { lo: -1.0, hi: 1.0 },
                SetSpec::L2Ball { radius: 2.0 },
            ] {
                let spec = InstanceSpec { objective: objective.clone(), set, dim: 8, rows: 12, seed: 5 };
                let p = spec.build().unwrap();
                let xbar = p.minimizer.as_ref().unwrap();
                assert!(p.set.contains(xbar));
                assert!(p.objective.value(xbar) < 1e-20);
                assert!(p.objective.value(&p.x0) > 0.0);
            }
        }
    }

    #[test]
    fn rejects_infeasible_start() {
        let f = Objective::quadratic(Matrix::identity(2), Vector::zeros(2)).unwrap();
        let s = FeasibleSet::simplex(2).unwrap();
        let bad = Vector::new(vec![0.7, 0.7]).unwrap();
        assert!(matches!(ProblemInstance::new(f, s, bad), Err(Error::InfeasibleStart)));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = InstanceSpec {
            objective: ObjectiveSpec::Quadratic,
            set: SetSpec::Simplex,
            dim: 5,
            rows: 7,
            seed: 42,
        };
        let a = spec.build().unwrap();
        let b = spec.build().unwrap();
        assert_eq!(a.objective.matrix(), b.objective.matrix());
        assert_eq!(a.minimizer, b.minimizer);
    }
}
