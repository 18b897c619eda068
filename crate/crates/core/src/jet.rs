//! Dense second-order jets: value, gradient and Hessian of a scalar.

use alloc::vec;
use alloc::vec::Vec;

/// Value, gradient and symmetric Hessian of a scalar at a point.
///
/// The Hessian is stored as its packed upper triangle, so it is symmetric by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    hess: Vec<f64>,
}

#[inline]
fn packed(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * n - a * (a + 1) / 2 + b
}

impl Jet2 {
    pub fn constant(n: usize, value: f64) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; n],
            hess: vec![0.0; n * (n + 1) / 2],
        }
    }

    /// Coordinate `index` seeded at `value`.
    pub fn variable(n: usize, index: usize, value: f64) -> Self {
        let mut j = Jet2::constant(n, value);
        j.grad[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    /// Second partial derivative with respect to coordinates `i` and `j`.
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[packed(self.dim(), i, j)]
    }

    pub fn hessian_rows(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.hess(i, j)).collect())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|v| v.is_finite())
            && self.hess.iter().all(|v| v.is_finite())
    }

    pub fn neg(mut self) -> Self {
        self.value = -self.value;
        self.grad.iter_mut().for_each(|v| *v = -*v);
        self.hess.iter_mut().for_each(|v| *v = -*v);
        self
    }

    pub fn add(&self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, rhs: &Jet2) -> Jet2 {
        let n = self.dim();
        let (u, v) = (self.value, rhs.value);
        let grad = (0..n).map(|i| self.grad[i] * v + u * rhs.grad[i]).collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..n {
            for j in i..n {
                let k = packed(n, i, j);
                hess.push(
                    self.hess[k] * v
                        + u * rhs.hess[k]
                        + self.grad[i] * rhs.grad[j]
                        + self.grad[j] * rhs.grad[i],
                );
            }
        }
        Jet2 {
            value: u * v,
            grad,
            hess,
        }
    }

    /// Compose with a scalar function whose value and first two derivatives
    /// at `self.value` are `f0`, `f1`, `f2`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let n = self.dim();
        let grad = self.grad.iter().map(|g| f1 * g).collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..n {
            for j in i..n {
                hess.push(f2 * self.grad[i] * self.grad[j] + f1 * self.hess[packed(n, i, j)]);
            }
        }
        Jet2 {
            value: f0,
            grad,
            hess,
        }
    }
}
