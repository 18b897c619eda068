//! Built-in cells with known structure constants.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::structure::{CellDefinition, Structure};

fn cell(
    name: String,
    chart: Chart,
    metric: [&str; 9],
    phi: [&str; 9],
    xi: [&str; 3],
    eta: [&str; 3],
) -> Result<CellDefinition> {
    CellDefinition::new(Structure::parse(name, chart, &metric, &phi, &xi, &eta)?)
}

fn txy() -> Chart {
    Chart::new(["t", "x", "y"])
        .and_then(|c| c.with_adapted("t"))
        .expect("static chart")
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(msg()))
    }
}

/// Euclidean `ℝ³` with `φ∂x = ∂y`, `φ∂y = −∂x`, `ξ = ∂t`.
pub fn flat_cosymplectic_cell() -> CellDefinition {
    cell(
        "flat_cosymplectic".into(),
        txy(),
        ["1", "0", "0", "0", "1", "0", "0", "0", "1"],
        ["0", "0", "0", "0", "0", "-1", "0", "1", "0"],
        ["1", "0", "0"],
        ["1", "0", "0"],
    )
    .expect("static cell")
}

/// `g = dt² + e^{2λt}dx² + e^{−2λt}dy²`, an almost cosymplectic
/// `(−λ², 0)`-space for `λ > 0`.
pub fn model_cosymplectic_cell(lambda: f64) -> Result<CellDefinition> {
    require(lambda.is_finite() && lambda > 0.0, || {
        format!("lambda must be positive and finite, got {}", lambda)
    })?;
    let up = format!("exp({}*t)", 2.0 * lambda);
    let down = format!("exp(-{}*t)", 2.0 * lambda);
    let neg_down = format!("-exp(-{}*t)", 2.0 * lambda);
    cell(
        format!("model_cosymplectic(lambda={})", lambda),
        txy(),
        ["1", "0", "0", "0", &up, "0", "0", "0", &down],
        ["0", "0", "0", "0", "0", &neg_down, "0", &up, "0"],
        ["1", "0", "0"],
        ["1", "0", "0"],
    )
}

/// Warped almost α-Kenmotsu cell `g = dt² + f²dx² + f′²dy²` with
/// `f = c e^{α(1+λ)t}`, `f′ = c′ e^{α(1−λ)t}` and `λ = √(−1 − κ₀/α²)`,
/// so that `κ = κ₀`, `μ = 0` and `μ′ = −2α²` with `h′ = hφ/α`.
pub fn kenmotsu_warped_cell(alpha: f64, kappa0: f64, c: f64, c_prime: f64) -> Result<CellDefinition> {
    require(alpha.is_finite() && alpha != 0.0, || {
        format!("alpha must be non-zero and finite, got {}", alpha)
    })?;
    require(kappa0.is_finite() && kappa0 < -alpha * alpha, || {
        format!("kappa0 must be below -alpha^2 = {}, got {}", -alpha * alpha, kappa0)
    })?;
    require(c.is_finite() && c > 0.0 && c_prime.is_finite() && c_prime > 0.0, || {
        format!("scales must be positive, got c={} c'={}", c, c_prime)
    })?;
    let lambda = libm::sqrt(-1.0 - kappa0 / (alpha * alpha));
    let gx = format!("{}*exp({}*t)", c * c, 2.0 * alpha * (1.0 + lambda));
    let gy = format!("{}*exp({}*t)", c_prime * c_prime, 2.0 * alpha * (1.0 - lambda));
    // φ∂x = (f/f′)∂y, φ∂y = −(f′/f)∂x
    let ratio = 2.0 * alpha * lambda;
    let phi_yx = format!("{}*exp({}*t)", c / c_prime, ratio);
    let phi_xy = format!("-{}*exp({}*t)", c_prime / c, -ratio);
    cell(
        format!(
            "kenmotsu_warped(alpha={}, kappa0={}, c={}, c'={})",
            alpha, kappa0, c, c_prime
        ),
        txy(),
        ["1", "0", "0", "0", &gx, "0", "0", "0", &gy],
        ["0", "0", "0", "0", "0", &phi_xy, "0", &phi_yx, "0"],
        ["1", "0", "0"],
        ["1", "0", "0"],
    )
}

/// Almost Kenmotsu cell on `z > 0` whose nullity function
/// `κ = −1 − e^{−4z}` is not constant.
pub fn example3_cell() -> CellDefinition {
    let a = "(x - y*exp(-2*z))";
    let b = "(y - x*exp(-2*z))";
    let g_xz = format!("-{}", a);
    let g_yz = format!("-{}", b);
    let g_zz = format!("1 + {}^2 + {}^2", a, b);
    let phi_xz = String::from(b);
    let phi_yz = format!("-{}", a);
    let chart = Chart::new(["x", "y", "z"])
        .and_then(|c| c.with_constraint("z > 0"))
        .and_then(|c| c.with_adapted("z"))
        .expect("static chart");
    cell(
        "nonconstant_kappa_kenmotsu".into(),
        chart,
        ["1", "0", &g_xz, "0", "1", &g_yz, &g_xz, &g_yz, &g_zz],
        ["0", "-1", &phi_xz, "1", "0", &phi_yz, "0", "0", "0"],
        [a, b, "1"],
        ["0", "0", "1"],
    )
    .expect("static cell")
}

/// Parameter of a catalog entry with its default value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameter {
    pub name: &'static str,
    pub default: f64,
    pub constraint: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub parameters: &'static [Parameter],
    build: fn(&[f64]) -> Result<CellDefinition>,
}

impl CatalogEntry {
    /// Build with `values` overriding defaults positionally.
    pub fn build(&self, values: &[f64]) -> Result<CellDefinition> {
        if values.len() > self.parameters.len() {
            return Err(Error::Parameter(format!(
                "{} takes {} parameters, got {}",
                self.name,
                self.parameters.len(),
                values.len()
            )));
        }
        let all: Vec<f64> = self
            .parameters
            .iter()
            .enumerate()
            .map(|(i, p)| values.get(i).copied().unwrap_or(p.default))
            .collect();
        (self.build)(&all)
    }

    pub fn build_default(&self) -> Result<CellDefinition> {
        self.build(&[])
    }
}

const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "flat_cosymplectic",
        summary: "Euclidean 3-space, cosymplectic, (0,0)-nullity",
        parameters: &[],
        build: |_| Ok(flat_cosymplectic_cell()),
    },
    CatalogEntry {
        name: "model_cosymplectic",
        summary: "almost cosymplectic (-lambda^2, 0)-space",
        parameters: &[Parameter {
            name: "lambda",
            default: 1.0,
            constraint: "lambda > 0",
        }],
        build: |p| model_cosymplectic_cell(p[0]),
    },
    CatalogEntry {
        name: "kenmotsu_warped",
        summary: "almost alpha-Kenmotsu (kappa0, -2 alpha^2)'-space",
        parameters: &[
            Parameter {
                name: "alpha",
                default: 1.0,
                constraint: "alpha != 0",
            },
            Parameter {
                name: "kappa0",
                default: -2.0,
                constraint: "kappa0 < -alpha^2",
            },
            Parameter {
                name: "c",
                default: 1.0,
                constraint: "c > 0",
            },
            Parameter {
                name: "c_prime",
                default: 1.0,
                constraint: "c_prime > 0",
            },
        ],
        build: |p| kenmotsu_warped_cell(p[0], p[1], p[2], p[3]),
    },
    CatalogEntry {
        name: "nonconstant_kappa_kenmotsu",
        summary: "almost Kenmotsu, kappa = -1 - exp(-4z) on z > 0",
        parameters: &[],
        build: |_| Ok(example3_cell()),
    },
];

pub fn catalog() -> &'static [CatalogEntry] {
    ENTRIES
}

pub fn lookup(name: &str) -> Option<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::sample_points;
    use crate::structure::validate_cell;

    #[test]
    fn every_entry_validates() {
        for e in catalog() {
            let c = e.build_default().unwrap();
            let s = sample_points(c.chart(), 10, 5).unwrap();
            let r = validate_cell(&c, &s, 1e-10).unwrap();
            assert!(r.passed(), "{}: {:?}", e.name, r);
            assert!(c.is_sewable());
        }
        let k = kenmotsu_warped_cell(0.5, -1.0, 2.0, 0.5).unwrap();
        let s = sample_points(k.chart(), 10, 5).unwrap();
        assert!(validate_cell(&k, &s, 1e-10).unwrap().passed());
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(model_cosymplectic_cell(0.0).is_err());
        assert!(model_cosymplectic_cell(f64::NAN).is_err());
        assert!(kenmotsu_warped_cell(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(kenmotsu_warped_cell(0.0, -2.0, 1.0, 1.0).is_err());
        assert!(kenmotsu_warped_cell(1.0, -2.0, -1.0, 1.0).is_err());
        assert!(lookup("model_cosymplectic").unwrap().build(&[1.0, 2.0]).is_err());
    }
}
