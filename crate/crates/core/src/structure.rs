//! Almost contact metric structures `(φ, ξ, η, g)` on a chart, and the
//! axiom validation shared by cells and sewn manifolds.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::chart::Chart;
use crate::error::{Error, EvalError, Result};
use crate::expr::Expr;
use crate::sample::PointSample;
use crate::tensor::{TensorField, Valence};

/// Positive-definiteness floor on the smallest metric eigenvalue.
pub const MIN_METRIC_EIGENVALUE: f64 = 1e-10;

/// Structure tensors of an almost contact metric manifold over one chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    name: String,
    chart: Chart,
    metric: TensorField,
    phi: TensorField,
    xi: TensorField,
    eta: TensorField,
}

impl Structure {
    pub fn new(
        name: impl Into<String>,
        chart: Chart,
        metric: TensorField,
        phi: TensorField,
        xi: TensorField,
        eta: TensorField,
    ) -> Result<Self> {
        let n = chart.dim();
        for (label, field, valence) in [
            ("metric", &metric, Valence::BILINEAR),
            ("phi", &phi, Valence::AFFINOR),
            ("xi", &xi, Valence::VECTOR),
            ("eta", &eta, Valence::COVECTOR),
        ] {
            if field.valence() != valence || field.dim() != n {
                return Err(Error::Tensor(alloc::format!(
                    "{} must have valence ({},{}) over dimension {}",
                    label,
                    valence.contravariant,
                    valence.covariant,
                    n
                )));
            }
        }
        if let Some((i, j)) = metric.asymmetric_entry() {
            return Err(Error::Tensor(alloc::format!(
                "metric entries g[{}][{}] and g[{}][{}] differ",
                chart.name(i),
                chart.name(j),
                chart.name(j),
                chart.name(i)
            )));
        }
        Ok(Structure {
            name: name.into(),
            chart,
            metric,
            phi,
            xi,
            eta,
        })
    }

    /// Build from expression strings: `metric` and `phi` row-major.
    pub fn parse(
        name: impl Into<String>,
        chart: Chart,
        metric: &[&str],
        phi: &[&str],
        xi: &[&str],
        eta: &[&str],
    ) -> Result<Self> {
        let n = chart.dim();
        let parse_all = |src: &[&str]| -> Result<Vec<Expr>> {
            src.iter()
                .map(|s| chart.parse(s).map_err(Error::from))
                .collect()
        };
        let metric = TensorField::new(Valence::BILINEAR, n, parse_all(metric)?)?;
        let phi = TensorField::new(Valence::AFFINOR, n, parse_all(phi)?)?;
        let xi = TensorField::new(Valence::VECTOR, n, parse_all(xi)?)?;
        let eta = TensorField::new(Valence::COVECTOR, n, parse_all(eta)?)?;
        Structure::new(name, chart, metric, phi, xi, eta)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn metric(&self) -> &TensorField {
        &self.metric
    }

    pub fn phi(&self) -> &TensorField {
        &self.phi
    }

    pub fn xi(&self) -> &TensorField {
        &self.xi
    }

    pub fn eta(&self) -> &TensorField {
        &self.eta
    }

    /// `c` when `η = c dt` holds componentwise for the adapted coordinate
    /// `t`: every other component is a literal zero and the `t` component
    /// has no coordinate dependence.
    pub fn adapted_eta_scale(&self) -> Option<f64> {
        let t = self.chart.adapted()?;
        for (i, c) in self.eta.components().iter().enumerate() {
            if i == t {
                if c.max_var().is_some() {
                    return None;
                }
            } else if !c.is_zero() {
                return None;
            }
        }
        self.eta.components()[t].eval(&[]).ok()
    }

    /// Symbolic fundamental form `Φ_ij = g_ik φ^k_j`.
    pub fn fundamental_form_field(&self) -> TensorField {
        let n = self.dim();
        TensorField::from_fn(Valence::BILINEAR, n, |idx| {
            (0..n).fold(Expr::zero(), |acc, k| {
                acc.add(
                    self.metric
                        .get(&[idx[0], k])
                        .clone()
                        .mul(self.phi.get(&[k, idx[1]]).clone()),
                )
            })
        })
    }

    /// Numeric values of `(g, φ, ξ, η)` at a point.
    pub fn values_at(&self, point: &[f64]) -> Result<StructureValues, EvalError> {
        if point.len() != self.dim() {
            return Err(EvalError::Dimension {
                expected: self.dim(),
                got: point.len(),
            });
        }
        Ok(StructureValues {
            g: self.metric.matrix(point)?,
            phi: self.phi.matrix(point)?,
            xi: self.xi.vector(point)?,
            eta: self.eta.vector(point)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureValues {
    pub g: DMatrix<f64>,
    pub phi: DMatrix<f64>,
    pub xi: DVector<f64>,
    pub eta: DVector<f64>,
}

/// A 3-dimensional almost contact metric structure with closed `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDefinition(Structure);

impl CellDefinition {
    pub fn new(structure: Structure) -> Result<Self> {
        if structure.dim() != 3 {
            return Err(Error::Precondition(alloc::format!(
                "a cell is 3-dimensional, `{}` has dimension {}",
                structure.name(),
                structure.dim()
            )));
        }
        Ok(CellDefinition(structure))
    }

    pub fn structure(&self) -> &Structure {
        &self.0
    }

    pub fn into_structure(self) -> Structure {
        self.0
    }

    pub fn name(&self) -> &str {
        self.0.name()
    }

    pub fn chart(&self) -> &Chart {
        self.0.chart()
    }

    /// Sewing needs `η = dt` literally in the adapted chart.
    pub fn is_sewable(&self) -> bool {
        self.0.adapted_eta_scale() == Some(1.0)
    }
}

impl core::ops::Deref for CellDefinition {
    type Target = Structure;

    fn deref(&self) -> &Structure {
        &self.0
    }
}

/// Max residual of each structure axiom over a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// `‖φ² + Id − η⊗ξ‖`
    pub phi_squared: f64,
    /// `|η(ξ) − 1|`
    pub eta_xi: f64,
    /// `‖g(φ·,φ·) − g + η⊗η‖`
    pub compatibility: f64,
    /// Smallest eigenvalue of `g` seen at any sample.
    pub min_metric_eigenvalue: f64,
    pub positive_definite: bool,
    /// `‖dη‖`
    pub d_eta: f64,
    /// `Some(ok)` when the chart is adapted: `η = c dt` componentwise.
    pub adapted_eta: Option<bool>,
    pub tolerance: f64,
    pub samples: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.positive_definite
            && self.adapted_eta != Some(false)
            && [self.phi_squared, self.eta_xi, self.compatibility, self.d_eta]
                .iter()
                .all(|r| *r <= self.tolerance)
    }

    /// `(name, residual)` pairs for reporting.
    pub fn checks(&self) -> [(&'static str, f64); 4] {
        [
            ("phi_squared", self.phi_squared),
            ("eta_xi", self.eta_xi),
            ("compatibility", self.compatibility),
            ("d_eta", self.d_eta),
        ]
    }
}

/// Per-point axiom residuals `(φ², η(ξ), compatibility, min eig g, dη)`.
pub struct AxiomResiduals {
    pub phi_squared: f64,
    pub eta_xi: f64,
    pub compatibility: f64,
    pub min_eigenvalue: f64,
    pub cholesky_ok: bool,
    pub d_eta: f64,
}

pub fn axiom_residuals(structure: &Structure, point: &[f64]) -> Result<AxiomResiduals, EvalError> {
    let n = structure.dim();
    let v = structure.values_at(point)?;
    let id = DMatrix::<f64>::identity(n, n);
    let phi_sq = &v.phi * &v.phi + &id - &v.xi * v.eta.transpose();
    let eta_xi = (v.eta.dot(&v.xi) - 1.0).abs();
    let compat = v.phi.transpose() * &v.g * &v.phi - &v.g + &v.eta * v.eta.transpose();
    let cholesky_ok = v.g.clone().cholesky().is_some();
    let min_eigenvalue = v.g.clone().symmetric_eigen().eigenvalues.min();
    let d_eta = crate::geometry::exterior_derivative(structure.eta(), point)
        .map_err(|e| match e {
            Error::Eval(e) => e,
            _ => EvalError::NonFinite,
        })?
        .data
        .iter()
        .map(|x| x * x)
        .sum::<f64>();
    Ok(AxiomResiduals {
        phi_squared: phi_sq.norm(),
        eta_xi,
        compatibility: compat.norm(),
        min_eigenvalue,
        cholesky_ok,
        d_eta: libm::sqrt(d_eta),
    })
}

/// Check the almost contact metric axioms and `dη = 0` at every sample.
pub fn validate_structure(
    structure: &Structure,
    samples: &[PointSample],
    tol: f64,
) -> Result<ValidationReport> {
    if samples.is_empty() {
        return Err(Error::Precondition("validation needs at least one sample".into()));
    }
    let mut report = ValidationReport {
        phi_squared: 0.0,
        eta_xi: 0.0,
        compatibility: 0.0,
        min_metric_eigenvalue: f64::INFINITY,
        positive_definite: true,
        d_eta: 0.0,
        adapted_eta: structure
            .chart()
            .adapted()
            .map(|_| structure.adapted_eta_scale().is_some_and(|c| c != 0.0)),
        tolerance: tol,
        samples: samples.len(),
    };
    for s in samples {
        let r = axiom_residuals(structure, &s.coords).map_err(|source| Error::EvalAt {
            draw: s.draw,
            coords: s.coords.clone(),
            source,
        })?;
        report.phi_squared = report.phi_squared.max(r.phi_squared);
        report.eta_xi = report.eta_xi.max(r.eta_xi);
        report.compatibility = report.compatibility.max(r.compatibility);
        report.d_eta = report.d_eta.max(r.d_eta);
        report.min_metric_eigenvalue = report.min_metric_eigenvalue.min(r.min_eigenvalue);
        if !r.cholesky_ok || r.min_eigenvalue < MIN_METRIC_EIGENVALUE {
            report.positive_definite = false;
        }
    }
    Ok(report)
}

/// [`validate_structure`] for a cell; adapted cells must have `η = dt`.
pub fn validate_cell(
    cell: &CellDefinition,
    samples: &[PointSample],
    tol: f64,
) -> Result<ValidationReport> {
    let mut report = validate_structure(cell.structure(), samples, tol)?;
    if report.adapted_eta.is_some() {
        report.adapted_eta = Some(cell.is_sewable());
    }
    Ok(report)
}

/// `Φ_ij = g_ik φ^k_j` at a point.
pub fn fundamental_form(structure: &Structure, point: &[f64]) -> Result<DMatrix<f64>> {
    let v = structure.values_at(point)?;
    Ok(&v.g * &v.phi)
}
