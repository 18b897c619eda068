//! Least-squares recovery of nullity coefficients from
//! `R(X,Y)ξ = κ(η(Y)X − η(X)Y) + μ(η(Y)hX − η(X)hY) + μ′(η(Y)h′X − η(X)h′Y)`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::LocalGeometry;
use crate::sample::PointSample;
use crate::structure::Structure;

/// Below this `‖h‖_∞` the `h` and `h′` columns are dropped from the fit.
pub const H_VANISHING_TOL: f64 = 1e-8;

/// Relative singular-value floor for the three-column fit.
const RANK_TOL: f64 = 1e-12;

/// Normalisation of `h′` in the fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NullityConvention {
    /// `h′ = h ∘ φ`.
    Raw,
    /// `h′ = (h ∘ φ)/α` for an almost α-Kenmotsu structure.
    Kenmotsu(f64),
}

impl NullityConvention {
    pub fn label(&self) -> &'static str {
        match self {
            NullityConvention::Raw => "raw",
            NullityConvention::Kenmotsu(_) => "kenmotsu",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullityFit {
    pub kappa: f64,
    pub mu: f64,
    pub mu_prime: f64,
    /// Euclidean norm of the fit residual over all coordinate pairs.
    pub residual: f64,
    pub h_norm: f64,
    /// `false` when `h` vanishes, so `μ` and `μ′` are reported as zero.
    pub mu_determined: bool,
    pub convention: NullityConvention,
}

/// `R(∂_a, ∂_b)ξ` stacked over `a, b` together with the three basis columns.
fn design(local: &LocalGeometry, convention: NullityConvention) -> Result<(DMatrix<f64>, DVector<f64>, f64)> {
    let n = local.dim();
    let h = local.h();
    let mut hp = &h * &local.phi;
    if let NullityConvention::Kenmotsu(alpha) = convention {
        if !(alpha.is_finite() && alpha != 0.0) {
            return Err(Error::Parameter(format!("kenmotsu convention needs alpha != 0, got {}", alpha)));
        }
        hp /= alpha;
    }
    let h_norm = h.amax();
    let eta = &local.eta;
    let rows = n * n * n;
    let mut a = DMatrix::zeros(rows, 3);
    let mut rhs = DVector::zeros(rows);
    for i in 0..n {
        for j in 0..n {
            let mut ei = DVector::zeros(n);
            ei[i] = 1.0;
            let mut ej = DVector::zeros(n);
            ej[j] = 1.0;
            let r = local.curvature_xi(&ei, &ej);
            for c in 0..n {
                let row = (i * n + j) * n + c;
                let k = eta[j] * ei[c] - eta[i] * ej[c];
                let m = eta[j] * h[(c, i)] - eta[i] * h[(c, j)];
                let mp = eta[j] * hp[(c, i)] - eta[i] * hp[(c, j)];
                a[(row, 0)] = k;
                a[(row, 1)] = m;
                a[(row, 2)] = mp;
                rhs[row] = r[c];
            }
        }
    }
    Ok((a, rhs, h_norm))
}

pub fn fit_nullity(structure: &Structure, point: &[f64], convention: NullityConvention) -> Result<NullityFit> {
    let local = LocalGeometry::at(structure, point)?;
    fit_nullity_local(&local, convention)
}

pub fn fit_nullity_local(local: &LocalGeometry, convention: NullityConvention) -> Result<NullityFit> {
    let (a, rhs, h_norm) = design(local, convention)?;
    if h_norm <= H_VANISHING_TOL {
        let col = a.column(0);
        let norm2 = col.norm_squared();
        if norm2 == 0.0 {
            return Err(Error::DegenerateFit("eta vanishes at the point".into()));
        }
        let kappa = col.dot(&rhs) / norm2;
        let residual = (&rhs - col * kappa).norm();
        return Ok(NullityFit {
            kappa,
            mu: 0.0,
            mu_prime: 0.0,
            residual,
            h_norm,
            mu_determined: false,
            convention,
        });
    }
    let singular = a.singular_values();
    let smax = singular.max();
    let smin = singular.min();
    if smin <= RANK_TOL * smax {
        return Err(Error::DegenerateFit(format!(
            "design matrix is rank deficient (singular values {} / {})",
            smin, smax
        )));
    }
    // Householder QR; the full SVD solve loses digits on these tall systems.
    let qr = a.clone().qr();
    let x = qr
        .r()
        .solve_upper_triangular(&(qr.q().transpose() * &rhs))
        .ok_or_else(|| Error::DegenerateFit("triangular factor is singular".into()))?;
    let residual = (&a * &x - &rhs).norm();
    Ok(NullityFit {
        kappa: x[0],
        mu: x[1],
        mu_prime: x[2],
        residual,
        h_norm,
        mu_determined: true,
        convention,
    })
}

/// Fits grouped by the adapted coordinate, testing whether the
/// coefficients depend on it alone.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedReport {
    pub fits: Vec<(PointSample, NullityFit)>,
    /// Number of leaves with at least two samples.
    pub leaves: usize,
    pub max_residual: f64,
    /// Largest within-leaf spread of `κ`, `μ`, `μ′`.
    pub leaf_spread: [f64; 3],
    /// Spread of each coefficient over all samples.
    pub global_spread: [f64; 3],
    pub constant_kappa: bool,
    pub constant_mu: bool,
    pub constant_mu_prime: bool,
    /// Coefficients agree on each leaf `t = const`.
    pub eta_aligned: bool,
    pub tolerance: f64,
}

impl GeneralizedReport {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance && self.eta_aligned
    }
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        0.0
    } else {
        hi - lo
    }
}

fn coefficients(f: &NullityFit) -> [f64; 3] {
    [f.kappa, f.mu, f.mu_prime]
}

/// Needs at least two samples on each of at least three leaves.
pub fn check_generalized(
    structure: &Structure,
    samples: &[PointSample],
    tol: f64,
    convention: NullityConvention,
) -> Result<GeneralizedReport> {
    let t = structure
        .chart()
        .adapted()
        .ok_or_else(|| Error::NotAdapted(structure.name().into()))?;
    let mut leaves: Vec<(u64, Vec<usize>)> = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        let key = s.coords[t].to_bits();
        match leaves.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(i),
            None => leaves.push((key, alloc::vec![i])),
        }
    }
    leaves.retain(|(_, v)| v.len() >= 2);
    if leaves.len() < 3 {
        return Err(Error::Precondition(format!(
            "need at least two samples on each of three leaves, found {} such leaves",
            leaves.len()
        )));
    }
    let fits: Vec<(PointSample, NullityFit)> = samples
        .iter()
        .map(|s| {
            fit_nullity(structure, &s.coords, convention)
                .map(|f| (s.clone(), f))
                .map_err(|e| match e {
                    Error::Eval(source) => Error::EvalAt {
                        draw: s.draw,
                        coords: s.coords.clone(),
                        source,
                    },
                    e => e,
                })
        })
        .collect::<Result<_>>()?;
    let max_residual = fits.iter().map(|(_, f)| f.residual).fold(0.0, f64::max);
    let mut leaf_spread = [0.0f64; 3];
    for (_, members) in &leaves {
        for (c, slot) in leaf_spread.iter_mut().enumerate() {
            *slot = slot.max(spread(members.iter().map(|&i| coefficients(&fits[i].1)[c])));
        }
    }
    let global_spread: [f64; 3] = core::array::from_fn(|c| spread(fits.iter().map(|(_, f)| coefficients(f)[c])));
    Ok(GeneralizedReport {
        leaves: leaves.len(),
        max_residual,
        leaf_spread,
        global_spread,
        constant_kappa: global_spread[0] <= tol,
        constant_mu: global_spread[1] <= tol,
        constant_mu_prime: global_spread[2] <= tol,
        eta_aligned: leaf_spread.iter().all(|s| *s <= tol),
        tolerance: tol,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{example3_cell, flat_cosymplectic_cell, kenmotsu_warped_cell, model_cosymplectic_cell};
    use crate::sample::{sample_leaf_groups, sample_points};

    fn fits_at(s: &Structure, convention: NullityConvention) -> Vec<NullityFit> {
        sample_points(s.chart(), 10, 21)
            .unwrap()
            .iter()
            .map(|p| fit_nullity(s, &p.coords, convention).unwrap())
            .collect()
    }

    #[test]
    fn flat_cell_has_zero_kappa_and_undetermined_mu() {
        for f in fits_at(&flat_cosymplectic_cell(), NullityConvention::Raw) {
            assert_eq!(f.kappa, 0.0);
            assert!(!f.mu_determined);
            assert_eq!(f.residual, 0.0);
        }
    }

    #[test]
    fn model_cell_recovers_minus_lambda_squared() {
        let s = model_cosymplectic_cell(0.8).unwrap();
        for f in fits_at(&s, NullityConvention::Raw) {
            assert!((f.kappa + 0.64).abs() < 1e-10);
            assert!(f.mu.abs() < 1e-10 && f.mu_prime.abs() < 1e-10);
            assert!(f.residual < 1e-10);
        }
    }

    #[test]
    fn kenmotsu_cell_in_both_conventions() {
        let s = kenmotsu_warped_cell(0.5, -1.0, 2.0, 0.5).unwrap();
        for f in fits_at(&s, NullityConvention::Kenmotsu(0.5)) {
            assert!((f.kappa + 1.0).abs() < 1e-9);
            assert!(f.mu.abs() < 1e-9);
            // μ′ = −2α²
            assert!((f.mu_prime + 0.5).abs() < 1e-9);
            assert!(f.residual < 1e-9);
        }
        for f in fits_at(&s, NullityConvention::Raw) {
            assert!((f.mu_prime + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn nonconstant_kappa_is_eta_aligned() {
        let s = example3_cell();
        let samples = sample_leaf_groups(s.chart(), 4, 3, 22).unwrap();
        let r = check_generalized(&s, &samples, 1e-8, NullityConvention::Kenmotsu(1.0)).unwrap();
        assert!(r.passed(), "{:?}", r.leaf_spread);
        assert!(!r.constant_kappa && r.constant_mu && r.constant_mu_prime);
        for (p, f) in &r.fits {
            let z = p.coords[2];
            assert!((f.kappa + 1.0 + (-4.0 * z).exp()).abs() < 1e-9);
            assert!(f.mu.abs() < 1e-9 && f.mu_prime.abs() < 1e-9);
        }
    }

    #[test]
    fn generalized_check_needs_leaf_structure() {
        let s = example3_cell();
        let samples = sample_points(s.chart(), 10, 23).unwrap();
        assert!(matches!(
            check_generalized(&s, &samples, 1e-8, NullityConvention::Raw),
            Err(Error::Precondition(_))
        ));
    }
}
