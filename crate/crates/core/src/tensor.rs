//! Tensor fields stored as grids of expressions, and index gymnastics on
//! their values at a point.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, EvalError, Result};
use crate::expr::Expr;
use crate::jet::Jet2;

/// Numbers of contravariant (upper) and covariant (lower) slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Valence {
    pub contravariant: usize,
    pub covariant: usize,
}

impl Valence {
    pub const SCALAR: Valence = Valence::new(0, 0);
    pub const VECTOR: Valence = Valence::new(1, 0);
    pub const COVECTOR: Valence = Valence::new(0, 1);
    pub const AFFINOR: Valence = Valence::new(1, 1);
    pub const BILINEAR: Valence = Valence::new(0, 2);

    pub const fn new(contravariant: usize, covariant: usize) -> Self {
        Valence {
            contravariant,
            covariant,
        }
    }

    pub fn rank(self) -> usize {
        self.contravariant + self.covariant
    }
}

/// Components over an `n`-dimensional chart, upper indices first, row-major.
///
/// Affinors store `φ^i_j` at `[i][j]`, so column `j` is the image of `∂_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    valence: Valence,
    dim: usize,
    components: Vec<Expr>,
}

impl TensorField {
    pub fn new(valence: Valence, dim: usize, components: Vec<Expr>) -> Result<Self> {
        let expected = dim.pow(valence.rank() as u32);
        if components.len() != expected {
            return Err(Error::Tensor(alloc::format!(
                "valence ({},{}) over dimension {} needs {} components, got {}",
                valence.contravariant,
                valence.covariant,
                dim,
                expected,
                components.len()
            )));
        }
        if let Some(m) = components.iter().filter_map(Expr::max_var).max() {
            if m >= dim {
                return Err(Error::Tensor(alloc::format!(
                    "component references coordinate {} of a {}-dimensional chart",
                    m,
                    dim
                )));
            }
        }
        Ok(TensorField {
            valence,
            dim,
            components,
        })
    }

    pub fn from_fn(valence: Valence, dim: usize, mut f: impl FnMut(&[usize]) -> Expr) -> Self {
        let rank = valence.rank();
        let total = dim.pow(rank as u32);
        let mut idx = alloc::vec![0usize; rank];
        let mut components = Vec::with_capacity(total);
        for flat in 0..total {
            let mut r = flat;
            for slot in (0..rank).rev() {
                idx[slot] = r % dim;
                r /= dim;
            }
            components.push(f(&idx));
        }
        TensorField {
            valence,
            dim,
            components,
        }
    }

    pub fn valence(&self) -> Valence {
        self.valence
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.valence.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.components[self.flat(idx)]
    }

    pub fn values(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.components.iter().map(|c| c.eval(point)).collect()
    }

    pub fn jets(&self, point: &[f64]) -> Result<Vec<Jet2>, EvalError> {
        self.components.iter().map(|c| c.jet(point)).collect()
    }

    /// Values of a two-slot tensor as a matrix.
    pub fn matrix(&self, point: &[f64]) -> Result<DMatrix<f64>, EvalError> {
        debug_assert_eq!(self.valence.rank(), 2);
        let v = self.values(point)?;
        Ok(DMatrix::from_row_slice(self.dim, self.dim, &v))
    }

    /// Values of a one-slot tensor as a vector.
    pub fn vector(&self, point: &[f64]) -> Result<DVector<f64>, EvalError> {
        debug_assert_eq!(self.valence.rank(), 1);
        Ok(DVector::from_vec(self.values(point)?))
    }

    /// Componentwise structural symmetry of a two-slot field; returns the
    /// first offending pair.
    pub fn asymmetric_entry(&self) -> Option<(usize, usize)> {
        debug_assert_eq!(self.valence.rank(), 2);
        for i in 0..self.dim {
            for j in 0..i {
                if self.get(&[i, j]) != self.get(&[j, i]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> TensorField {
        TensorField {
            valence: self.valence,
            dim: self.dim,
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn render<S: AsRef<str>>(&self, names: &[S]) -> Vec<String> {
        self.components.iter().map(|c| c.to_source(names)).collect()
    }
}

/// Values of a tensor at a point with their valence, for index gymnastics.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTensor {
    pub valence: Valence,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl PointTensor {
    pub fn new(valence: Valence, dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim.pow(valence.rank() as u32));
        PointTensor {
            valence,
            dim,
            data,
        }
    }

    pub fn vector(v: &DVector<f64>) -> Self {
        PointTensor::new(Valence::VECTOR, v.len(), v.as_slice().into())
    }

    pub fn covector(v: &DVector<f64>) -> Self {
        PointTensor::new(Valence::COVECTOR, v.len(), v.as_slice().into())
    }

    /// Two-slot tensor from a matrix whose `[i][j]` entry is component `ij`.
    pub fn from_matrix(valence: Valence, m: &DMatrix<f64>) -> Self {
        debug_assert_eq!(valence.rank(), 2);
        let n = m.nrows();
        let data = (0..n * n).map(|k| m[(k / n, k % n)]).collect();
        PointTensor::new(valence, n, data)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn rank(&self) -> usize {
        self.valence.rank()
    }

    fn strides(&self) -> Vec<usize> {
        let r = self.rank();
        (0..r).map(|s| self.dim.pow((r - 1 - s) as u32)).collect()
    }

    fn is_upper(&self, slot: usize) -> bool {
        slot < self.valence.contravariant
    }

    /// Apply `m` along `slot` (`new[.., a, ..] = Σ_b m[a][b] old[.., b, ..]`),
    /// toggling the slot kind and moving it to keep upper-before-lower order.
    fn transform_slot(&self, slot: usize, m: &DMatrix<f64>, to_upper: bool) -> PointTensor {
        let n = self.dim;
        let r = self.rank();
        let strides = self.strides();
        let mut applied = alloc::vec![0.0; self.data.len()];
        for (flat, out) in applied.iter_mut().enumerate() {
            let a = (flat / strides[slot]) % n;
            let base = flat - a * strides[slot];
            *out = (0..n)
                .map(|b| m[(a, b)] * self.data[base + b * strides[slot]])
                .sum();
        }
        // Reorder so the transformed slot sits at the end of its new group.
        let (up, down) = (self.valence.contravariant, self.valence.covariant);
        let valence = if to_upper {
            Valence::new(up + 1, down - 1)
        } else {
            Valence::new(up - 1, down + 1)
        };
        let mut order: Vec<usize> = (0..r).filter(|&s| s != slot).collect();
        let insert_at = if to_upper { up } else { up - 1 };
        order.insert(insert_at, slot);
        let out = PointTensor::new(valence, n, applied);
        out.permute_from(&strides, &order)
    }

    /// New tensor whose slot `k` is old slot `order[k]`.
    fn permute_from(self, old_strides: &[usize], order: &[usize]) -> PointTensor {
        let n = self.dim;
        let r = self.rank();
        let mut data = alloc::vec![0.0; self.data.len()];
        let new_strides = self.strides();
        for (flat, out) in data.iter_mut().enumerate() {
            let mut old = 0;
            for k in 0..r {
                let idx = (flat / new_strides[k]) % n;
                old += idx * old_strides[order[k]];
            }
            *out = self.data[old];
        }
        PointTensor {
            valence: self.valence,
            dim: n,
            data,
        }
    }

    /// Lower contravariant `slot` with the metric `g`.
    pub fn lower(&self, slot: usize, g: &DMatrix<f64>) -> Result<PointTensor> {
        if slot >= self.rank() || !self.is_upper(slot) {
            return Err(Error::Tensor(alloc::format!(
                "slot {} is not contravariant",
                slot
            )));
        }
        Ok(self.transform_slot(slot, g, false))
    }

    /// Raise covariant `slot` with the inverse metric `g_inv`.
    pub fn raise(&self, slot: usize, g_inv: &DMatrix<f64>) -> Result<PointTensor> {
        if slot >= self.rank() || self.is_upper(slot) {
            return Err(Error::Tensor(alloc::format!(
                "slot {} is not covariant",
                slot
            )));
        }
        Ok(self.transform_slot(slot, g_inv, true))
    }

    /// Contract contravariant slot `upper` with covariant slot `lower`.
    pub fn contract(&self, upper: usize, lower: usize) -> Result<PointTensor> {
        if upper >= self.rank() || lower >= self.rank() {
            return Err(Error::Tensor("contraction slot out of range".into()));
        }
        if !self.is_upper(upper) || self.is_upper(lower) {
            return Err(Error::Tensor(alloc::format!(
                "cannot contract slot {} with slot {}: need one upper and one lower",
                upper,
                lower
            )));
        }
        let n = self.dim;
        let r = self.rank();
        let strides = self.strides();
        let kept: Vec<usize> = (0..r).filter(|&s| s != upper && s != lower).collect();
        let valence = Valence::new(
            self.valence.contravariant - 1,
            self.valence.covariant - 1,
        );
        let total = n.pow(kept.len() as u32);
        let mut data = alloc::vec![0.0; total];
        for (flat, out) in data.iter_mut().enumerate() {
            let mut base = 0;
            let mut rem = flat;
            for &s in kept.iter().rev() {
                base += (rem % n) * strides[s];
                rem /= n;
            }
            *out = (0..n)
                .map(|a| self.data[base + a * (strides[upper] + strides[lower])])
                .sum();
        }
        Ok(PointTensor::new(valence, n, data))
    }

    /// Tensor product, slots of `self` first within each kind.
    pub fn outer(&self, other: &PointTensor) -> PointTensor {
        let n = self.dim;
        let raw: Vec<f64> = self
            .data
            .iter()
            .flat_map(|a| other.data.iter().map(move |b| a * b))
            .collect();
        let (u1, l1) = (self.valence.contravariant, self.valence.covariant);
        let (u2, l2) = (other.valence.contravariant, other.valence.covariant);
        let valence = Valence::new(u1 + u2, l1 + l2);
        // raw slot order: self-upper, self-lower, other-upper, other-lower
        let raw_t = PointTensor::new(valence, n, raw);
        let strides = raw_t.strides();
        let mut order: Vec<usize> = (0..u1).collect();
        order.extend(u1 + l1..u1 + l1 + u2);
        order.extend(u1..u1 + l1);
        order.extend(u1 + l1 + u2..u1 + l1 + u2 + l2);
        raw_t.permute_from(&strides, &order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn spd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let a = DMatrix::from_fn(n, n, |_, _| next());
        &a * a.transpose() + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn lower_then_raise_is_identity() {
        for seed in 0..20 {
            let g = spd(4, seed);
            let g_inv = g.clone().try_inverse().unwrap();
            let v = DVector::from_vec(vec![0.3, -1.2, 2.0, 0.7]);
            let t = PointTensor::vector(&v);
            let back = t.lower(0, &g).unwrap().raise(0, &g_inv).unwrap();
            for (a, b) in back.data.iter().zip(v.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn slot_kind_mismatch_is_an_error() {
        let v = PointTensor::vector(&DVector::from_vec(vec![1.0, 2.0]));
        let g = DMatrix::identity(2, 2);
        assert!(v.raise(0, &g).is_err());
        let phi = PointTensor::from_matrix(Valence::AFFINOR, &g);
        assert!(phi.contract(1, 0).is_err());
        assert!(phi.contract(0, 1).is_ok());
    }

    #[test]
    fn contracting_affinor_square_gives_matrix_product() {
        // flat cell: φ∂x = ∂y, φ∂y = -∂x in chart (t, x, y)
        let phi = DMatrix::from_row_slice(3, 3, &[0., 0., 0., 0., 0., -1., 0., 1., 0.]);
        let p = PointTensor::from_matrix(Valence::AFFINOR, &phi);
        // (φ⊗φ)^{a b}_{c d} contracted on c = b gives (φ²)^a_d
        let sq = p.outer(&p).contract(1, 2).unwrap();
        let expect = &phi * &phi;
        let xi = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let axiom = -DMatrix::identity(3, 3) + &xi * xi.transpose();
        assert_eq!(sq.to_matrix(), expect);
        assert_eq!(expect, axiom);
    }

    #[test]
    fn lowering_an_affinor_matches_matrix_product() {
        let g = spd(3, 7);
        let phi = DMatrix::from_fn(3, 3, |i, j| (i as f64) - 2.0 * (j as f64));
        let p = PointTensor::from_matrix(Valence::AFFINOR, &phi);
        let lowered = p.lower(0, &g).unwrap();
        assert_eq!(lowered.valence, Valence::BILINEAR);
        let expect = &g * &phi;
        for i in 0..3 {
            for j in 0..3 {
                assert!((lowered.data[i * 3 + j] - expect[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn from_fn_layout_is_row_major() {
        let t = TensorField::from_fn(Valence::AFFINOR, 3, |idx| {
            Expr::num((idx[0] * 10 + idx[1]) as f64)
        });
        assert_eq!(t.get(&[2, 1]), &Expr::Const(21.0));
        assert!(TensorField::new(Valence::VECTOR, 3, vec![Expr::zero()]).is_err());
    }
}
