//! Deterministic, seeded sampling of chart points.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::chart::{Chart, Relation};
use crate::error::{Error, Result};

/// Attempts allowed per accepted point before giving up.
pub const MAX_DRAWS: u64 = 10_000;

/// A point with the seed and draw index that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSample {
    pub coords: Vec<f64>,
    pub seed: u64,
    pub draw: u64,
}

/// Axis-aligned box points are drawn from before rejection.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SampleBox {
    /// `[-1, 1]` per coordinate, shifted into `(c + 0.1, c + 2.1)` for a
    /// constraint `x > c` and `(c - 2.1, c - 0.1)` for `x < c`.
    pub fn for_chart(chart: &Chart) -> Self {
        let n = chart.dim();
        let mut lower: Vec<Option<f64>> = alloc::vec![None; n];
        let mut upper: Vec<Option<f64>> = alloc::vec![None; n];
        for c in chart.constraints() {
            if let Some((i, bound, rel)) = c.coordinate_bound() {
                match rel {
                    Relation::Greater => {
                        lower[i] = Some(lower[i].map_or(bound, |b: f64| b.max(bound)))
                    }
                    Relation::Less => {
                        upper[i] = Some(upper[i].map_or(bound, |b: f64| b.min(bound)))
                    }
                }
            }
        }
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = match (lower[i], upper[i]) {
                (None, None) => (-1.0, 1.0),
                (Some(l), None) => (l + 0.1, l + 2.1),
                (None, Some(u)) => (u - 2.1, u - 0.1),
                (Some(l), Some(u)) => {
                    let (a, b) = (l + 0.1, (l + 2.1).min(u - 0.1));
                    if a < b {
                        (a, b)
                    } else {
                        let w = u - l;
                        (l + 0.1 * w, u - 0.1 * w)
                    }
                }
            };
            lo.push(a);
            hi.push(b);
        }
        SampleBox {
            lower: lo,
            upper: hi,
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
}

struct Sampler {
    rng: ChaCha8Rng,
    seed: u64,
    draws: u64,
}

impl Sampler {
    fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            draws: 0,
        }
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let unit = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        lo + (hi - lo) * unit
    }

    /// Draw until `chart` accepts; coordinates in `fixed` keep their value.
    fn accept(
        &mut self,
        chart: &Chart,
        bounds: &SampleBox,
        fixed: &[Option<f64>],
    ) -> Result<PointSample> {
        for _ in 0..MAX_DRAWS {
            let coords: Vec<f64> = (0..bounds.dim())
                .map(|i| match fixed.get(i).copied().flatten() {
                    Some(v) => v,
                    None => self.uniform(bounds.lower[i], bounds.upper[i]),
                })
                .collect();
            let draw = self.draws;
            self.draws += 1;
            if chart.contains(&coords) {
                return Ok(PointSample {
                    coords,
                    seed: self.seed,
                    draw,
                });
            }
        }
        Err(Error::Sampling(alloc::format!(
            "no point of {} accepted after {} draws",
            chart,
            MAX_DRAWS
        )))
    }
}

pub fn sample_points(chart: &Chart, count: usize, seed: u64) -> Result<Vec<PointSample>> {
    sample_points_in(chart, &SampleBox::for_chart(chart), count, seed)
}

pub fn sample_points_in(
    chart: &Chart,
    bounds: &SampleBox,
    count: usize,
    seed: u64,
) -> Result<Vec<PointSample>> {
    if count == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    if bounds.dim() != chart.dim() {
        return Err(Error::Precondition("sampling box dimension mismatch".into()));
    }
    let mut sampler = Sampler::new(seed);
    (0..count)
        .map(|_| sampler.accept(chart, bounds, &[]))
        .collect()
}

/// `groups` values of the adapted coordinate, each shared by `per_group`
/// points that differ only in the other coordinates. Groups are contiguous.
pub fn sample_leaf_groups(
    chart: &Chart,
    groups: usize,
    per_group: usize,
    seed: u64,
) -> Result<Vec<PointSample>> {
    let t = chart
        .adapted()
        .ok_or_else(|| Error::Precondition(alloc::format!("chart {} is not adapted", chart)))?;
    if groups == 0 || per_group == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    let bounds = SampleBox::for_chart(chart);
    let mut sampler = Sampler::new(seed);
    let mut out = Vec::with_capacity(groups * per_group);
    for _ in 0..groups {
        // Anchor the leaf with an accepted point, then vary the rest.
        let anchor = sampler.accept(chart, &bounds, &[])?;
        let mut fixed = alloc::vec![None; chart.dim()];
        fixed[t] = Some(anchor.coords[t]);
        out.push(anchor);
        for _ in 1..per_group {
            out.push(sampler.accept(chart, &bounds, &fixed)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_fixed_seed() {
        let chart = Chart::new(["t", "x", "y"]).unwrap();
        let a = sample_points(&chart, 5, 42).unwrap();
        let b = sample_points(&chart, 5, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_points(&chart, 5, 43).unwrap());
        assert!(a
            .iter()
            .all(|p| p.coords.iter().all(|&c| (-1.0..1.0).contains(&c))));
    }

    #[test]
    fn constraint_shifts_the_box() {
        let chart = Chart::new(["x", "y", "z"])
            .unwrap()
            .with_constraint("z > 0")
            .unwrap();
        let pts = sample_points(&chart, 100, 1).unwrap();
        assert!(pts.iter().all(|p| p.coords[2] > 0.1 && p.coords[2] < 2.1));
        // no rejections were needed for a box inside the domain
        assert_eq!(pts.last().unwrap().draw, 99);
    }

    #[test]
    fn count_zero_is_rejected() {
        let chart = Chart::new(["t"]).unwrap();
        assert!(matches!(
            sample_points(&chart, 0, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn thin_domain_fails_after_draw_budget() {
        let chart = Chart::new(["x", "y"])
            .unwrap()
            .with_constraint("x*x + y*y < 0.0000000001")
            .unwrap();
        assert!(matches!(
            sample_points(&chart, 1, 3),
            Err(Error::Sampling(_))
        ));
    }

    #[test]
    fn leaf_groups_share_the_adapted_value() {
        let chart = Chart::new(["x", "y", "z"])
            .unwrap()
            .with_constraint("z > 0")
            .unwrap()
            .with_adapted("z")
            .unwrap();
        let pts = sample_leaf_groups(&chart, 3, 4, 9).unwrap();
        assert_eq!(pts.len(), 12);
        for g in pts.chunks(4) {
            assert!(g.iter().all(|p| p.coords[2] == g[0].coords[2]));
            assert_ne!(g[0].coords[0], g[1].coords[0]);
        }
        assert_ne!(pts[0].coords[2], pts[4].coords[2]);
    }
}
