//! Levi-Civita connection, curvature and the structure tensors of an
//! almost contact metric manifold, all evaluated pointwise from jets.
//!
//! Conventions: `Γ^k_{ij}` is stored at `[k, i, j]`, `∂_l Γ^k_{ij}` at
//! `[l, k, i, j]`, and `R(∂_i, ∂_j)∂_k = R^l_{ijk} ∂_l` at `[l, i, j, k]` with
//! `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_{[X,Y]}`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::array::Cube;
use crate::error::{Error, Result};
use crate::sample::PointSample;
use crate::structure::Structure;
use crate::tensor::{PointTensor, TensorField, Valence};

/// Spread allowed between per-sample weights for a constant-α verdict.
pub const WEIGHT_SPREAD_TOL: f64 = 1e-7;

/// Metric value, inverse and first two derivatives at a point.
#[derive(Debug, Clone)]
pub struct MetricJets {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `∂_l g_ij` at `[l, i, j]`.
    pub dg: Cube<3>,
    /// `∂_l ∂_m g_ij` at `[l, m, i, j]`.
    pub ddg: Cube<4>,
}

impl MetricJets {
    pub fn at(metric: &TensorField, point: &[f64]) -> Result<Self> {
        let n = metric.dim();
        let jets = metric.jets(point)?;
        let mut g = DMatrix::zeros(n, n);
        let mut dg = Cube::zeros(n);
        let mut ddg = Cube::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let jet = &jets[i * n + j];
                g[(i, j)] = jet.value;
                for l in 0..n {
                    dg[[l, i, j]] = jet.grad[l];
                    for m in 0..n {
                        ddg[[l, m, i, j]] = jet.hess(l, m);
                    }
                }
            }
        }
        let g_inv = g
            .clone()
            .cholesky()
            .ok_or(Error::SingularMetric)?
            .inverse();
        Ok(MetricJets { g, g_inv, dg, ddg })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }
}

#[derive(Debug, Clone)]
pub struct ChristoffelAtPoint {
    pub gamma: Cube<3>,
    pub dgamma: Cube<4>,
}

impl ChristoffelAtPoint {
    pub fn from_jets(m: &MetricJets) -> Self {
        let n = m.dim();
        let mut first = Cube::<3>::zeros(n);
        let mut dfirst = Cube::<4>::zeros(n);
        for a in 0..n {
            for i in 0..n {
                for j in 0..n {
                    first[[a, i, j]] =
                        0.5 * (m.dg[[i, j, a]] + m.dg[[j, i, a]] - m.dg[[a, i, j]]);
                    for l in 0..n {
                        dfirst[[l, a, i, j]] = 0.5
                            * (m.ddg[[l, i, j, a]] + m.ddg[[l, j, i, a]] - m.ddg[[l, a, i, j]]);
                    }
                }
            }
        }
        // ∂_l g^{-1} = -g^{-1} (∂_l g) g^{-1}
        let mut dginv = Cube::<3>::zeros(n);
        for l in 0..n {
            let dgl = DMatrix::from_fn(n, n, |i, j| m.dg[[l, i, j]]);
            let d = -(&m.g_inv * dgl * &m.g_inv);
            for i in 0..n {
                for j in 0..n {
                    dginv[[l, i, j]] = d[(i, j)];
                }
            }
        }
        let mut gamma = Cube::<3>::zeros(n);
        let mut dgamma = Cube::<4>::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    gamma[[k, i, j]] = (0..n).map(|a| m.g_inv[(k, a)] * first[[a, i, j]]).sum();
                    for l in 0..n {
                        dgamma[[l, k, i, j]] = (0..n)
                            .map(|a| {
                                dginv[[l, k, a]] * first[[a, i, j]]
                                    + m.g_inv[(k, a)] * dfirst[[l, a, i, j]]
                            })
                            .sum();
                    }
                }
            }
        }
        ChristoffelAtPoint { gamma, dgamma }
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    /// `Γ(X, Y)^c = Γ^c_{ab} X^a Y^b`.
    pub fn contract(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        DVector::from_fn(n, |c, _| {
            let mut s = 0.0;
            for a in 0..n {
                if x[a] == 0.0 {
                    continue;
                }
                for b in 0..n {
                    s += self.gamma[[c, a, b]] * x[a] * y[b];
                }
            }
            s
        })
    }
}

pub fn christoffel(metric: &TensorField, point: &[f64]) -> Result<ChristoffelAtPoint> {
    Ok(ChristoffelAtPoint::from_jets(&MetricJets::at(metric, point)?))
}

#[derive(Debug, Clone)]
pub struct CurvatureAtPoint {
    pub riem: Cube<4>,
}

/// Largest violation of each algebraic curvature identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSymmetry {
    pub antisymmetry: f64,
    pub bianchi: f64,
    pub g_skew: f64,
}

impl CurvatureSymmetry {
    pub fn max(&self) -> f64 {
        self.antisymmetry.max(self.bianchi).max(self.g_skew)
    }

    pub fn join(self, other: CurvatureSymmetry) -> CurvatureSymmetry {
        CurvatureSymmetry {
            antisymmetry: self.antisymmetry.max(other.antisymmetry),
            bianchi: self.bianchi.max(other.bianchi),
            g_skew: self.g_skew.max(other.g_skew),
        }
    }
}

impl CurvatureAtPoint {
    pub fn from_connection(c: &ChristoffelAtPoint) -> Self {
        let n = c.dim();
        let mut riem = Cube::<4>::zeros(n);
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut v = c.dgamma[[i, l, j, k]] - c.dgamma[[j, l, i, k]];
                        for m in 0..n {
                            v += c.gamma[[l, i, m]] * c.gamma[[m, j, k]]
                                - c.gamma[[l, j, m]] * c.gamma[[m, i, k]];
                        }
                        riem[[l, i, j, k]] = v;
                    }
                }
            }
        }
        CurvatureAtPoint { riem }
    }

    pub fn dim(&self) -> usize {
        self.riem.dim()
    }

    /// `R(X, Y)Z`.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let w = xy * z[k];
                    if w == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        out[l] += self.riem[[l, i, j, k]] * w;
                    }
                }
            }
        }
        out
    }

    pub fn symmetry(&self, g: &DMatrix<f64>) -> CurvatureSymmetry {
        let n = self.dim();
        let lowered = |i: usize, j: usize, k: usize, w: usize| -> f64 {
            (0..n).map(|l| g[(w, l)] * self.riem[[l, i, j, k]]).sum()
        };
        let mut s = CurvatureSymmetry {
            antisymmetry: 0.0,
            bianchi: 0.0,
            g_skew: 0.0,
        };
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let r = &self.riem;
                        s.antisymmetry = s
                            .antisymmetry
                            .max((r[[l, i, j, k]] + r[[l, j, i, k]]).abs());
                        s.bianchi = s
                            .bianchi
                            .max((r[[l, i, j, k]] + r[[l, j, k, i]] + r[[l, k, i, j]]).abs());
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for w in 0..n {
                        s.g_skew = s
                            .g_skew
                            .max((lowered(i, j, k, w) + lowered(i, j, w, k)).abs());
                    }
                }
            }
        }
        s
    }
}

pub fn riemann(metric: &TensorField, point: &[f64]) -> Result<CurvatureAtPoint> {
    Ok(CurvatureAtPoint::from_connection(&christoffel(metric, point)?))
}

/// Components and first derivatives of a vector field: `dv[(l, i)] = ∂_l V^i`.
#[derive(Debug, Clone)]
pub struct VectorJet {
    pub v: DVector<f64>,
    pub dv: DMatrix<f64>,
}

impl VectorJet {
    pub fn at(field: &TensorField, point: &[f64]) -> Result<Self> {
        let n = field.dim();
        let jets = field.jets(point)?;
        Ok(VectorJet {
            v: DVector::from_fn(n, |i, _| jets[i].value),
            dv: DMatrix::from_fn(n, n, |l, i| jets[i].grad[l]),
        })
    }

    /// Constant-coefficient field.
    pub fn constant(v: DVector<f64>) -> Self {
        let n = v.len();
        VectorJet {
            v,
            dv: DMatrix::zeros(n, n),
        }
    }

    /// Directional derivative `X(V^i)`.
    pub fn derivative_along(&self, x: &DVector<f64>) -> DVector<f64> {
        self.dv.transpose() * x
    }

    /// `[self, other]`.
    pub fn bracket(&self, other: &VectorJet) -> DVector<f64> {
        other.derivative_along(&self.v) - self.derivative_along(&other.v)
    }
}

/// Everything pointwise computations on a structure need.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    pub point: Vec<f64>,
    pub metric: MetricJets,
    pub connection: ChristoffelAtPoint,
    pub curvature: CurvatureAtPoint,
    pub phi: DMatrix<f64>,
    /// `∂_l φ^i_j` at `[l, i, j]`.
    pub dphi: Cube<3>,
    pub xi: VectorJet,
    pub eta: DVector<f64>,
    /// `∂_l η_i` at `(l, i)`.
    pub deta: DMatrix<f64>,
}

impl LocalGeometry {
    pub fn at(structure: &Structure, point: &[f64]) -> Result<Self> {
        let n = structure.dim();
        let metric = MetricJets::at(structure.metric(), point)?;
        let connection = ChristoffelAtPoint::from_jets(&metric);
        let curvature = CurvatureAtPoint::from_connection(&connection);
        let phi_jets = structure.phi().jets(point)?;
        let mut phi = DMatrix::zeros(n, n);
        let mut dphi = Cube::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let jet = &phi_jets[i * n + j];
                phi[(i, j)] = jet.value;
                for l in 0..n {
                    dphi[[l, i, j]] = jet.grad[l];
                }
            }
        }
        let xi = VectorJet::at(structure.xi(), point)?;
        let eta_jet = VectorJet::at(structure.eta(), point)?;
        Ok(LocalGeometry {
            point: point.into(),
            metric,
            connection,
            curvature,
            phi,
            dphi,
            xi,
            eta: eta_jet.v,
            deta: eta_jet.dv,
        })
    }

    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.metric.g
    }

    /// `∇_X Y` for a vector field `Y` given with its first derivatives.
    pub fn nabla(&self, x: &DVector<f64>, y: &VectorJet) -> DVector<f64> {
        y.derivative_along(x) + self.connection.contract(x, &y.v)
    }

    /// The affinor field `φ ∂_j` as a vector jet.
    pub fn phi_column(&self, j: usize) -> VectorJet {
        let n = self.dim();
        VectorJet {
            v: self.phi.column(j).into_owned(),
            dv: DMatrix::from_fn(n, n, |l, i| self.dphi[[l, i, j]]),
        }
    }

    /// `(∇_i φ)^j_k` at `[i, j, k]`.
    pub fn nabla_phi(&self) -> Cube<3> {
        let n = self.dim();
        let gam = &self.connection.gamma;
        let mut out = Cube::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = self.dphi[[i, j, k]];
                    for m in 0..n {
                        v += gam[[j, i, m]] * self.phi[(m, k)] - gam[[m, i, k]] * self.phi[(j, m)];
                    }
                    out[[i, j, k]] = v;
                }
            }
        }
        out
    }

    /// `∇_ξ φ` as a matrix.
    pub fn nabla_xi_phi(&self) -> DMatrix<f64> {
        let n = self.dim();
        let np = self.nabla_phi();
        DMatrix::from_fn(n, n, |j, k| (0..n).map(|i| self.xi.v[i] * np[[i, j, k]]).sum())
    }

    pub fn nabla_xi_xi(&self) -> DVector<f64> {
        self.nabla(&self.xi.v, &self.xi)
    }

    /// `(L_ξ φ)^i_j = ξ^m ∂_m φ^i_j − φ^m_j ∂_m ξ^i + φ^i_m ∂_j ξ^m`.
    pub fn lie_xi_phi(&self) -> DMatrix<f64> {
        let n = self.dim();
        let xi = &self.xi;
        DMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|m| {
                    xi.v[m] * self.dphi[[m, i, j]] - self.phi[(m, j)] * xi.dv[(m, i)]
                        + self.phi[(i, m)] * xi.dv[(j, m)]
                })
                .sum()
        })
    }

    /// `h = ½ L_ξ φ`.
    pub fn h(&self) -> DMatrix<f64> {
        self.lie_xi_phi() * 0.5
    }

    /// `[φ,φ](∂_j, ∂_k)^i + (∂_j η_k − ∂_k η_j) ξ^i` at `[i, j, k]`.
    pub fn normality(&self) -> Cube<3> {
        let n = self.dim();
        let (phi, dphi) = (&self.phi, &self.dphi);
        let mut out = Cube::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = 0.0;
                    for m in 0..n {
                        v += phi[(m, j)] * dphi[[m, i, k]] - phi[(m, k)] * dphi[[m, i, j]]
                            + phi[(i, m)] * (dphi[[k, m, j]] - dphi[[j, m, k]]);
                    }
                    v += (self.deta[(j, k)] - self.deta[(k, j)]) * self.xi.v[i];
                    out[[i, j, k]] = v;
                }
            }
        }
        out
    }

    pub fn fundamental_form(&self) -> DMatrix<f64> {
        self.g() * &self.phi
    }

    /// `R(X, Y)ξ`.
    pub fn curvature_xi(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.curvature.apply(x, y, &self.xi.v)
    }

    pub fn structure_tensors(&self, alpha: Option<f64>) -> StructureTensorsAtPoint {
        let h = self.h();
        let hprime = &h * &self.phi;
        let kenmotsu_hprime = alpha.filter(|a| *a != 0.0).map(|a| &hprime / a);
        StructureTensorsAtPoint {
            h,
            hprime,
            nablaphi: self.nabla_phi(),
            kenmotsu_hprime,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StructureTensorsAtPoint {
    pub h: DMatrix<f64>,
    pub hprime: DMatrix<f64>,
    pub nablaphi: Cube<3>,
    pub kenmotsu_hprime: Option<DMatrix<f64>>,
}

/// Residuals of the algebraic identities `h` satisfies on a cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HIdentities {
    /// `‖g h − (g h)ᵀ‖`
    pub g_symmetry: f64,
    /// `‖h ξ‖`
    pub annihilates_xi: f64,
    /// `‖h φ + φ h‖`
    pub anticommutes_phi: f64,
    /// `|tr h|`
    pub trace: f64,
}

impl HIdentities {
    pub fn at(local: &LocalGeometry) -> Self {
        let h = local.h();
        let gh = local.g() * &h;
        HIdentities {
            g_symmetry: (&gh - gh.transpose()).norm(),
            annihilates_xi: (&h * &local.xi.v).norm(),
            anticommutes_phi: (&h * &local.phi + &local.phi * &h).norm(),
            trace: h.trace().abs(),
        }
    }

    pub fn max(&self) -> f64 {
        self.g_symmetry
            .max(self.annihilates_xi)
            .max(self.anticommutes_phi)
            .max(self.trace)
    }

    pub fn join(self, o: HIdentities) -> HIdentities {
        HIdentities {
            g_symmetry: self.g_symmetry.max(o.g_symmetry),
            annihilates_xi: self.annihilates_xi.max(o.annihilates_xi),
            anticommutes_phi: self.anticommutes_phi.max(o.anticommutes_phi),
            trace: self.trace.max(o.trace),
        }
    }
}

/// `∇φ` together with `‖∇_ξ φ‖` and `‖∇_ξ ξ‖`.
pub struct AffinorDerivative {
    pub nabla_phi: Cube<3>,
    pub nabla_xi_phi_norm: f64,
    pub nabla_xi_xi_norm: f64,
}

pub fn covariant_derivative_affinor(structure: &Structure, point: &[f64]) -> Result<AffinorDerivative> {
    let local = LocalGeometry::at(structure, point)?;
    Ok(AffinorDerivative {
        nabla_phi: local.nabla_phi(),
        nabla_xi_phi_norm: local.nabla_xi_phi().norm(),
        nabla_xi_xi_norm: local.nabla_xi_xi().norm(),
    })
}

pub fn h_tensor(
    structure: &Structure,
    point: &[f64],
    alpha: Option<f64>,
) -> Result<StructureTensorsAtPoint> {
    Ok(LocalGeometry::at(structure, point)?.structure_tensors(alpha))
}

pub fn normality_tensor(structure: &Structure, point: &[f64]) -> Result<Cube<3>> {
    Ok(LocalGeometry::at(structure, point)?.normality())
}

/// `dω` of a 1- or 2-form: `(dω)_{i0…ip} = Σ_a (−1)^a ∂_{i_a} ω_{…î_a…}`.
pub fn exterior_derivative(form: &TensorField, point: &[f64]) -> Result<PointTensor> {
    let n = form.dim();
    let jets = form.jets(point)?;
    match form.valence() {
        v if v == Valence::COVECTOR => {
            let mut data = alloc::vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    data[i * n + j] = jets[j].grad[i] - jets[i].grad[j];
                }
            }
            Ok(PointTensor::new(Valence::BILINEAR, n, data))
        }
        v if v == Valence::BILINEAR => {
            let w = |a: usize, b: usize, l: usize| jets[a * n + b].grad[l];
            let mut data = alloc::vec![0.0; n * n * n];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        data[(i * n + j) * n + k] = w(j, k, i) - w(i, k, j) + w(i, j, k);
                    }
                }
            }
            Ok(PointTensor::new(Valence::new(0, 3), n, data))
        }
        v => Err(Error::Tensor(alloc::format!(
            "exterior derivative needs a 1- or 2-form, got valence ({},{})",
            v.contravariant,
            v.covariant
        ))),
    }
}

/// `(η∧Φ)_{ijk} = η_i Φ_{jk} + η_j Φ_{ki} + η_k Φ_{ij}`.
pub fn wedge_one_two(eta: &DVector<f64>, form: &DMatrix<f64>) -> PointTensor {
    let n = eta.len();
    let mut data = alloc::vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                data[(i * n + j) * n + k] =
                    eta[i] * form[(j, k)] + eta[j] * form[(k, i)] + eta[k] * form[(i, j)];
            }
        }
    }
    PointTensor::new(Valence::new(0, 3), n, data)
}

/// Least-squares weight `λ` with `dΦ ≈ 2λ η∧Φ` at a point, and the residual
/// `‖dΦ − 2λ η∧Φ‖` over independent components.
pub fn weight_at(structure: &Structure, point: &[f64]) -> Result<(f64, f64)> {
    let n = structure.dim();
    let phi_form = structure.fundamental_form_field();
    let d_phi = exterior_derivative(&phi_form, point)?;
    let v = structure.values_at(point)?;
    let wedge = wedge_one_two(&v.eta, &(&v.g * &v.phi));
    let mut dot = 0.0;
    let mut norm2 = 0.0;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let o = (i * n + j) * n + k;
                let (a, b) = (d_phi.data[o], 2.0 * wedge.data[o]);
                dot += a * b;
                norm2 += b * b;
                pairs.push((a, b));
            }
        }
    }
    if norm2 == 0.0 {
        return Err(Error::Precondition("η∧Φ vanishes; structure is degenerate".into()));
    }
    let lambda = dot / norm2;
    let residual = libm::sqrt(pairs.iter().map(|(a, b)| { let r = a - lambda * b; r * r }).sum());
    Ok((lambda, residual))
}

#[derive(Debug, Clone, PartialEq)]
pub enum StructureClass {
    AlmostCosymplectic,
    AlmostAlphaKenmotsu(f64),
    /// Weight varies from sample to sample.
    WeightFunction(Vec<f64>),
    /// `dΦ` is not of the form `2λ η∧Φ` somewhere.
    Unclassified,
}

impl StructureClass {
    pub fn label(&self) -> &'static str {
        match self {
            StructureClass::AlmostCosymplectic => "almost cosymplectic",
            StructureClass::AlmostAlphaKenmotsu(_) => "almost alpha-Kenmotsu",
            StructureClass::WeightFunction(_) => "weight function",
            StructureClass::Unclassified => "unclassified",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            StructureClass::AlmostAlphaKenmotsu(a) => Some(*a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: StructureClass,
    pub is_cosymplectic: bool,
    pub weights: Vec<f64>,
    pub fit_residual: f64,
    pub max_nabla_phi: f64,
    pub weight_spread: f64,
}

pub fn classify(structure: &Structure, samples: &[PointSample], tol: f64) -> Result<Classification> {
    if samples.is_empty() {
        return Err(Error::Precondition("classification needs samples".into()));
    }
    let mut weights = Vec::with_capacity(samples.len());
    let mut fit_residual: f64 = 0.0;
    let mut max_nabla_phi: f64 = 0.0;
    for s in samples {
        let at = |e: Error| match e {
            Error::Eval(source) => Error::EvalAt {
                draw: s.draw,
                coords: s.coords.clone(),
                source,
            },
            e => e,
        };
        let (lambda, residual) = weight_at(structure, &s.coords).map_err(at)?;
        let local = LocalGeometry::at(structure, &s.coords).map_err(at)?;
        weights.push(lambda);
        fit_residual = fit_residual.max(residual);
        max_nabla_phi = max_nabla_phi.max(cube_norm(&local.nabla_phi()));
    }
    let (lo, hi) = weights
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &w| (a.min(w), b.max(w)));
    let spread = hi - lo;
    let class = if fit_residual > tol {
        StructureClass::Unclassified
    } else if weights.iter().all(|w| w.abs() <= tol) {
        StructureClass::AlmostCosymplectic
    } else if spread <= WEIGHT_SPREAD_TOL {
        // equal-weight mean; all samples share the value to within the spread
        StructureClass::AlmostAlphaKenmotsu(weights.iter().sum::<f64>() / weights.len() as f64)
    } else {
        StructureClass::WeightFunction(weights.clone())
    };
    Ok(Classification {
        class,
        is_cosymplectic: max_nabla_phi <= tol,
        weights,
        fit_residual,
        max_nabla_phi,
        weight_spread: spread,
    })
}

pub fn cube_norm<const R: usize>(c: &Cube<R>) -> f64 {
    libm::sqrt(c.as_slice().iter().map(|v| v * v).sum())
}

/// Lie brackets and covariant derivatives of a frame, in frame components.
#[derive(Debug, Clone)]
pub struct FrameTables {
    /// Component `c` of `[E_a, E_b]` at `[a, b, c]`.
    pub brackets: Cube<3>,
    /// Component `c` of `∇_{E_a} E_b` at `[a, b, c]`.
    pub nabla: Cube<3>,
}

/// Express brackets and covariant derivatives of the vector fields `frame`
/// (which must span the tangent space) back in the frame.
pub fn frame_tables(structure: &Structure, frame: &[TensorField], point: &[f64]) -> Result<FrameTables> {
    let n = structure.dim();
    if frame.len() != n {
        return Err(Error::Precondition(alloc::format!(
            "a frame needs {} fields, got {}",
            n,
            frame.len()
        )));
    }
    let local = LocalGeometry::at(structure, point)?;
    let jets: Vec<VectorJet> = frame
        .iter()
        .map(|f| VectorJet::at(f, point))
        .collect::<Result<_>>()?;
    let basis = DMatrix::from_fn(n, n, |i, a| jets[a].v[i]);
    let lu = basis.lu();
    let mut brackets = Cube::zeros(n);
    let mut nabla = Cube::zeros(n);
    for a in 0..n {
        for b in 0..n {
            let br = jets[a].bracket(&jets[b]);
            let nb = local.nabla(&jets[a].v, &jets[b]);
            let (br, nb) = match (lu.solve(&br), lu.solve(&nb)) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(Error::Precondition("frame is not a basis".into())),
            };
            for c in 0..n {
                brackets[[a, b, c]] = br[c];
                nabla[[a, b, c]] = nb[c];
            }
        }
    }
    Ok(FrameTables { brackets, nabla })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{example3_cell, flat_cosymplectic_cell, kenmotsu_warped_cell, model_cosymplectic_cell};
    use crate::sample::sample_points;
    use crate::chart::Chart;
    use crate::expr::Expr;
    use std::vec;

    const STEP: f64 = 1e-5;

    fn shifted(p: &[f64], l: usize, d: f64) -> Vec<f64> {
        let mut q = p.to_vec();
        q[l] += d;
        q
    }

    /// Central difference of a matrix-valued function along `l`.
    fn fd_matrix(f: &dyn Fn(&[f64]) -> DMatrix<f64>, p: &[f64], l: usize) -> DMatrix<f64> {
        (f(&shifted(p, l, STEP)) - f(&shifted(p, l, -STEP))) / (2.0 * STEP)
    }

    /// Koszul formula with finite-difference metric derivatives.
    fn koszul_oracle(s: &Structure, p: &[f64]) -> Cube<3> {
        let n = s.dim();
        let g = |q: &[f64]| s.metric().matrix(q).unwrap();
        let dg: Vec<DMatrix<f64>> = (0..n).map(|l| fd_matrix(&g, p, l)).collect();
        let g_inv = g(p).try_inverse().unwrap();
        let mut out = Cube::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[[k, i, j]] = (0..n)
                        .map(|m| {
                            0.5 * g_inv[(k, m)] * (dg[i][(j, m)] + dg[j][(i, m)] - dg[m][(i, j)])
                        })
                        .sum();
                }
            }
        }
        out
    }

    fn cells() -> Vec<Structure> {
        vec![
            flat_cosymplectic_cell().into_structure(),
            model_cosymplectic_cell(0.7).unwrap().into_structure(),
            kenmotsu_warped_cell(0.5, -1.0, 2.0, 0.5).unwrap().into_structure(),
            example3_cell().into_structure(),
        ]
    }

    #[test]
    fn christoffel_matches_koszul_oracle() {
        for s in cells() {
            for p in sample_points(s.chart(), 5, 11).unwrap() {
                let c = christoffel(s.metric(), &p.coords).unwrap();
                let o = koszul_oracle(&s, &p.coords);
                for (a, b) in c.gamma.as_slice().iter().zip(o.as_slice()) {
                    assert!((a - b).abs() < 1e-6, "{}: {} vs {}", s.name(), a, b);
                }
            }
        }
    }

    #[test]
    fn riemann_matches_differenced_connection() {
        for s in cells() {
            let n = s.dim();
            for p in sample_points(s.chart(), 3, 12).unwrap() {
                let x = &p.coords;
                let r = riemann(s.metric(), x).unwrap();
                let gam = |q: &[f64]| christoffel(s.metric(), q).unwrap().gamma;
                let g0 = gam(x);
                let dgam: Vec<Cube<3>> = (0..n)
                    .map(|l| {
                        let (a, b) = (gam(&shifted(x, l, STEP)), gam(&shifted(x, l, -STEP)));
                        let mut d = Cube::zeros(n);
                        for (o, (u, v)) in a.as_slice().iter().zip(b.as_slice()).enumerate() {
                            let idx = [o / (n * n), (o / n) % n, o % n];
                            d[idx] = (u - v) / (2.0 * STEP);
                        }
                        d
                    })
                    .collect();
                for l in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                let mut v = dgam[i][[l, j, k]] - dgam[j][[l, i, k]];
                                for m in 0..n {
                                    v += g0[[l, i, m]] * g0[[m, j, k]] - g0[[l, j, m]] * g0[[m, i, k]];
                                }
                                let got = r.riem[[l, i, j, k]];
                                assert!((got - v).abs() < 1e-5 * (1.0 + v.abs()), "{} vs {}", got, v);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn curvature_identities_hold() {
        for s in cells() {
            for p in sample_points(s.chart(), 5, 13).unwrap() {
                let local = LocalGeometry::at(&s, &p.coords).unwrap();
                let sym = local.curvature.symmetry(local.g());
                assert!(sym.max() < 1e-10, "{}: {:?}", s.name(), sym);
            }
        }
    }

    #[test]
    fn nabla_phi_matches_oracle() {
        for s in cells() {
            let n = s.dim();
            for p in sample_points(s.chart(), 3, 14).unwrap() {
                let x = &p.coords;
                let local = LocalGeometry::at(&s, x).unwrap();
                let got = local.nabla_phi();
                let phi = |q: &[f64]| s.phi().matrix(q).unwrap();
                let gam = koszul_oracle(&s, x);
                let p0 = phi(x);
                for i in 0..n {
                    let d = fd_matrix(&phi, x, i);
                    for j in 0..n {
                        for k in 0..n {
                            let mut v = d[(j, k)];
                            for m in 0..n {
                                v += gam[[j, i, m]] * p0[(m, k)] - gam[[m, i, k]] * p0[(j, m)];
                            }
                            assert!((got[[i, j, k]] - v).abs() < 1e-6);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn brackets_match_differenced_fields() {
        let s = example3_cell().into_structure();
        let n = 3;
        for p in sample_points(s.chart(), 3, 15).unwrap() {
            let x = &p.coords;
            let local = LocalGeometry::at(&s, x).unwrap();
            let (v, w) = (local.phi_column(2), local.xi.clone());
            let field_v = |q: &[f64]| s.phi().matrix(q).unwrap().column(2).into_owned();
            let field_w = |q: &[f64]| s.xi().vector(q).unwrap();
            let dir = |f: &dyn Fn(&[f64]) -> DVector<f64>, along: &DVector<f64>| {
                (0..n).fold(DVector::zeros(n), |acc, l| {
                    acc + (f(&shifted(x, l, STEP)) - f(&shifted(x, l, -STEP))) * (along[l] / (2.0 * STEP))
                })
            };
            let oracle = dir(&field_w, &v.v) - dir(&field_v, &w.v);
            assert!((v.bracket(&w) - oracle).norm() < 1e-6);
        }
    }

    #[test]
    fn model_cell_h_tensor() {
        let s = model_cosymplectic_cell(1.0).unwrap().into_structure();
        for p in sample_points(s.chart(), 5, 16).unwrap() {
            let t = p.coords[0];
            let h = LocalGeometry::at(&s, &p.coords).unwrap().h();
            let expected = DMatrix::from_row_slice(
                3,
                3,
                &[0.0, 0.0, 0.0, 0.0, 0.0, (-2.0 * t).exp(), 0.0, (2.0 * t).exp(), 0.0],
            );
            assert!((h - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn h_identities_and_normality() {
        for s in cells() {
            for p in sample_points(s.chart(), 5, 17).unwrap() {
                let local = LocalGeometry::at(&s, &p.coords).unwrap();
                assert!(HIdentities::at(&local).max() < 1e-10, "{}", s.name());
            }
        }
        let flat = flat_cosymplectic_cell().into_structure();
        assert!(normality_tensor(&flat, &[0.1, 0.2, 0.3]).unwrap().max_abs() == 0.0);
        let model = model_cosymplectic_cell(1.0).unwrap().into_structure();
        assert!(normality_tensor(&model, &[0.1, 0.2, 0.3]).unwrap().max_abs() > 0.1);
    }

    #[test]
    fn exterior_derivative_of_one_and_two_forms() {
        let chart = Chart::new(["x", "y", "z"]).unwrap();
        let p = |s: &str| chart.parse(s).unwrap();
        let w = TensorField::new(Valence::COVECTOR, 3, vec![p("y"), p("0"), p("0")]).unwrap();
        let d = exterior_derivative(&w, &[0.3, 0.4, 0.5]).unwrap().to_matrix();
        // d(y dx) = dy∧dx
        assert_eq!(d[(1, 0)], 1.0);
        assert_eq!(d[(0, 1)], -1.0);
        let form = TensorField::new(
            Valence::BILINEAR,
            3,
            vec![p("0"), p("z"), p("0"), p("-z"), p("0"), p("0"), p("0"), p("0"), p("0")],
        )
        .unwrap();
        let d = exterior_derivative(&form, &[0.0, 0.0, 0.0]).unwrap();
        // d(z dx∧dy) = dz∧dx∧dy, component xyz = 1
        assert_eq!(d.data[1 * 3 + 2], 1.0);
        assert!(exterior_derivative(&TensorField::from_fn(Valence::VECTOR, 3, |_| Expr::zero()), &[0.0; 3]).is_err());
    }

    #[test]
    fn classification_of_catalog_cells() {
        let cases: [(Structure, Option<f64>, bool); 5] = [
            (flat_cosymplectic_cell().into_structure(), None, true),
            (model_cosymplectic_cell(1.0).unwrap().into_structure(), None, false),
            (kenmotsu_warped_cell(1.0, -2.0, 1.0, 1.0).unwrap().into_structure(), Some(1.0), false),
            (kenmotsu_warped_cell(0.5, -1.0, 2.0, 0.5).unwrap().into_structure(), Some(0.5), false),
            (example3_cell().into_structure(), Some(1.0), false),
        ];
        for (s, alpha, cosymplectic) in cases {
            let samples = sample_points(s.chart(), 10, 18).unwrap();
            let c = classify(&s, &samples, 1e-8).unwrap();
            match alpha {
                None => assert_eq!(c.class, StructureClass::AlmostCosymplectic, "{}", s.name()),
                Some(a) => {
                    let got = c.class.alpha().unwrap();
                    assert!((got - a).abs() < 1e-9, "{}: {}", s.name(), got);
                }
            }
            assert_eq!(c.is_cosymplectic, cosymplectic, "{}", s.name());
        }
    }

    #[test]
    fn frame_tables_for_coordinate_frame_are_christoffels() {
        let s = model_cosymplectic_cell(1.0).unwrap().into_structure();
        let frame: Vec<TensorField> = (0..3)
            .map(|i| TensorField::from_fn(Valence::VECTOR, 3, |idx| if idx[0] == i { Expr::one() } else { Expr::zero() }))
            .collect();
        let x = [0.2, 0.1, -0.3];
        let t = frame_tables(&s, &frame, &x).unwrap();
        let c = christoffel(s.metric(), &x).unwrap();
        assert_eq!(t.brackets.max_abs(), 0.0);
        for a in 0..3 {
            for b in 0..3 {
                for k in 0..3 {
                    assert!((t.nabla[[a, b, k]] - c.gamma[[k, a, b]]).abs() < 1e-14);
                }
            }
        }
    }
}
