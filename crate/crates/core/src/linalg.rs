//! Dense vectors, a small row-major matrix, oracle counters and the
//! averaging-weight helpers shared by every solver.

use std::cell::Cell;
use std::fmt;
use std::ops::Index;

use crate::error::{contract, Error, Result};

/// Feasibility tolerance used by every membership check.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// A dense vector whose entries are always finite.
#[derive(Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting NaN and infinite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(index) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Self {
        assert!(value.is_finite());
        Self(vec![value; n])
    }

    pub fn basis(n: usize, i: usize, scale: f64) -> Self {
        let mut v = vec![0.0; n];
        v[i] = scale;
        Self(v)
    }

    /// Internal constructor for results of arithmetic on finite inputs.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        debug_assert!(entries.iter().all(|v| v.is_finite()), "non-finite entry");
        Self(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Self::from_raw(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Self::from_raw(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Vector {
        Self::from_raw(self.0.iter().map(|a| s * a).collect())
    }

    pub fn neg(&self) -> Vector {
        self.scale(-1.0)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Self::from_raw(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    pub fn dist_sq(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        self.dist_sq(other).sqrt()
    }

    /// Bit patterns of the entries, used as an exact cache key.
    pub(crate) fn bits(&self) -> Vec<u64> {
        self.0.iter().map(|v| v.to_bits()).collect()
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.len() });
        }
        Ok(())
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

/// Returns `(1 - gamma) * a + gamma * b`, evaluated entrywise in that order.
pub fn convex_combine(a: &Vector, b: &Vector, gamma: f64) -> Result<Vector> {
    b.check_dim(a.len())?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(contract(format!("convex weight {gamma} outside [0, 1]")));
    }
    Ok(combine(a, b, gamma))
}

pub(crate) fn combine(a: &Vector, b: &Vector, gamma: f64) -> Vector {
    let keep = 1.0 - gamma;
    Vector::from_raw(a.0.iter().zip(&b.0).map(|(x, y)| keep * x + gamma * y).collect())
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A x`
    pub fn mul_vec(&self, x: &Vector) -> Vector {
        debug_assert_eq!(x.len(), self.cols);
        Vector::from_raw(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// `Aᵀ r`
    pub fn tr_mul_vec(&self, r: &Vector) -> Vector {
        debug_assert_eq!(r.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let ri = r[i];
            if ri == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * ri;
            }
        }
        Vector::from_raw(out)
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        let m = nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data);
        m.singular_values().max()
    }
}

/// Oracle call counters for one solver run.
///
/// Interior mutability lets the objective wrapper and the LMO paths share
/// one set of counters inside a run; the type is deliberately `!Sync`.
#[derive(Debug, Default)]
pub struct OracleCounters {
    grad_evals: Cell<u64>,
    grad_requests: Cell<u64>,
    f_evals: Cell<u64>,
    lmo_calls: Cell<u64>,
}

/// Frozen copy of [`OracleCounters`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CounterSnapshot {
    /// Distinct gradient evaluations.
    pub grad_evals: u64,
    /// Gradient requests including cache hits.
    pub grad_requests: u64,
    pub f_evals: u64,
    pub lmo_calls: u64,
}

impl OracleCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            grad_evals: self.grad_evals.get(),
            grad_requests: self.grad_requests.get(),
            f_evals: self.f_evals.get(),
            lmo_calls: self.lmo_calls.get(),
        }
    }

    pub(crate) fn add_grad(&self, fresh: bool) {
        self.grad_requests.set(self.grad_requests.get() + 1);
        if fresh {
            self.grad_evals.set(self.grad_evals.get() + 1);
        }
    }

    pub(crate) fn add_f(&self) {
        self.f_evals.set(self.f_evals.get() + 1);
    }

    pub(crate) fn add_lmo(&self) {
        self.lmo_calls.set(self.lmo_calls.get() + 1);
    }
}

impl CounterSnapshot {
    /// True when no counter decreased relative to `earlier`.
    pub fn dominates(&self, earlier: &CounterSnapshot) -> bool {
        self.grad_evals >= earlier.grad_evals
            && self.grad_requests >= earlier.grad_requests
            && self.f_evals >= earlier.f_evals
            && self.lmo_calls >= earlier.lmo_calls
    }
}

/// Cumulative products `Γ_1 = 1`, `Γ_k = Γ_{k-1}(1 - γ_k)`.
pub fn gamma_sequence_product(gammas: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(gammas.len());
    let mut acc = 1.0;
    for (i, g) in gammas.iter().enumerate() {
        if i > 0 {
            acc *= 1.0 - g;
        }
        out.push(acc);
    }
    out
}

/// Upper bound `Γ_K Σ_i (γ_i / Γ_i) b_i` on `a_K` for any sequence obeying
/// `a_k ≤ (1 - γ_k) a_{k-1} + γ_k b_k` with `γ_1 = 1`.
///
/// Terms with `Γ_i = 0` contribute only through the last such index, so the
/// sum is accumulated in the recursive form `S_k = (1 - γ_k) S_{k-1} + γ_k b_k`
/// which equals the closed form whenever every `Γ_i > 0`.
pub fn telescoping_bound(bs: &[f64], gammas: &[f64]) -> Result<f64> {
    if bs.len() != gammas.len() {
        return Err(Error::DimensionMismatch { expected: gammas.len(), got: bs.len() });
    }
    match gammas.first() {
        None => return Err(contract("empty weight sequence")),
        Some(&g) if g != 1.0 => return Err(contract(format!("first weight must be 1, got {g}"))),
        _ => {}
    }
    if let Some(g) = gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(contract(format!("weight {g} outside [0, 1]")));
    }
    let big_gammas = gamma_sequence_product(gammas);
    if big_gammas.iter().all(|&g| g > 0.0) {
        let last = *big_gammas.last().unwrap();
        let sum: f64 = bs
            .iter()
            .zip(gammas)
            .zip(&big_gammas)
            .map(|((b, g), bg)| g / bg * b)
            .sum();
        Ok(last * sum)
    } else {
        Ok(bs.iter().zip(gammas).fold(0.0, |s, (b, g)| (1.0 - g) * s + g * b))
    }
}
