use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

/// Dense cube of reals with `R` indices each ranging over `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cube<const R: usize> {
    n: usize,
    data: Vec<f64>,
}

impl<const R: usize> Cube<R> {
    pub fn zeros(n: usize) -> Self {
        Cube {
            n,
            data: vec![0.0; n.pow(R as u32)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, idx: [usize; R]) -> usize {
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.n);
            acc * self.n + i
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl<const R: usize> Index<[usize; R]> for Cube<R> {
    type Output = f64;

    fn index(&self, idx: [usize; R]) -> &f64 {
        &self.data[self.offset(idx)]
    }
}

impl<const R: usize> IndexMut<[usize; R]> for Cube<R> {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut f64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}
