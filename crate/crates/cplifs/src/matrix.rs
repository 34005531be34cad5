//! Small dense nonnegative matrices and their Perron data.
//!
//! Pressure matrices downstream are small (vertex counts in the hundreds at
//! most), dense, and nonnegative, and everything hinges on the Perron root
//! being computed to near machine precision with deterministic results. A
//! hand-rolled power iteration with Collatz–Wielandt ratio bounds keeps the
//! enclosure explicit: iteration stops only when the smallest and largest
//! ratio agree to a relative spread of [`PERRON_RTOL`], which brackets the
//! true root between them.

use crate::{Error, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Relative Collatz–Wielandt spread at which the power iteration stops.
pub(crate) const PERRON_RTOL: f64 = 1e-14;

/// Iteration cap for the power method.
pub(crate) const PERRON_MAX_ITERS: usize = 100_000;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    /// Zero matrix of dimension `n`.
    pub(crate) fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub(crate) fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub(crate) fn transpose(&self) -> SquareMatrix {
        let mut t = SquareMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    fn min_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// `y = self * x`.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// Whether every vertex reaches every other along nonzero entries
    /// (strong connectivity of the support digraph; true for `n = 1`).
    pub(crate) fn is_irreducible(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let forward = |i: usize, j: usize| self.get(i, j) != 0.0;
        let backward = |i: usize, j: usize| self.get(j, i) != 0.0;
        self.reaches_all(forward) && self.reaches_all(backward)
    }

    fn reaches_all(&self, edge: impl Fn(usize, usize) -> bool) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for j in 0..self.n {
                if !seen[j] && edge(i, j) {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == self.n
    }
}

/// Perron root and its positive left and right eigenvectors, each
/// normalized to unit maximum entry.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PerronData {
    pub(crate) radius: f64,
    pub(crate) right: Vec<f64>,
    pub(crate) left: Vec<f64>,
}

/// Perron root of an irreducible nonnegative matrix.
///
/// Power-iterates the diagonally shifted matrix `M + sigma I` (shift: the
/// smallest row sum), which is primitive whenever `M` is irreducible, so
/// the Collatz–Wielandt ratios `y_i / x_i` converge to the shifted root
/// from both sides. Errors with [`Error::Reducible`] when the support
/// digraph is not strongly connected and with non-convergence if the
/// spread has not closed after [`PERRON_MAX_ITERS`] sweeps.
pub(crate) fn perron(m: &SquareMatrix) -> Result<PerronData> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::Invalid("matrix must be nonempty".into()));
    }
    for (k, &v) in m.data.iter().enumerate() {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Invalid(format!(
                "matrix entry ({}, {}) is {v}; entries must be finite and nonnegative",
                k / n,
                k % n
            )));
        }
    }
    if n == 1 {
        return Ok(PerronData {
            radius: m.get(0, 0),
            right: vec![1.0],
            left: vec![1.0],
        });
    }
    if !m.is_irreducible() {
        return Err(Error::Reducible);
    }
    let radius_right = shifted_power(m)?;
    let radius_left = shifted_power(&m.transpose())?;
    Ok(PerronData {
        radius: radius_right.0,
        right: radius_right.1,
        left: radius_left.1,
    })
}

/// One-sided power iteration; returns the root and the eigenvector.
fn shifted_power(m: &SquareMatrix) -> Result<(f64, Vec<f64>)> {
    let n = m.dim();
    let sigma = m.min_row_sum();
    let mut shifted = m.clone();
    for i in 0..n {
        shifted.add_to(i, i, sigma);
    }
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    for _ in 0..PERRON_MAX_ITERS {
        shifted.apply(&x, &mut y);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for (yi, xi) in y.iter().zip(&x) {
            let ratio = yi / xi;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        let max = y.iter().fold(0.0f64, |a, &b| a.max(b));
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / max;
        }
        if hi - lo <= PERRON_RTOL * hi {
            return Ok((0.5 * (lo + hi) - sigma, x));
        }
    }
    Err(Error::NonConvergence(format!(
        "power iteration spread still open after {PERRON_MAX_ITERS} sweeps"
    )))
}
