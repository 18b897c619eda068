//! Products of cells with their almost metric f-structure, and the sewn
//! manifold `N`: the diagonal `t₁ = … = t_k` with the structure induced by
//! the median field `ξ̄ = (ξ̄₁ + … + ξ̄_k)/√k`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::array::Cube;
use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::{Expr, Func};
use crate::geometry::{
    christoffel, classify, exterior_derivative, riemann, ChristoffelAtPoint, Classification,
    CurvatureAtPoint, LocalGeometry, MetricJets, StructureClass, VectorJet,
};
use crate::nullity::{check_generalized, fit_nullity_local, GeneralizedReport, NullityConvention, NullityFit};
use crate::sample::{sample_points, PointSample};
use crate::structure::{CellDefinition, Structure};
use crate::tensor::{TensorField, Valence};

/// Tolerance of the internal tangency checks run by [`sew`].
pub const TANGENCY_TOL: f64 = 1e-10;

/// Singular values below this (relative to the largest, or 1) count as kernel.
pub const KERNEL_RANK_TOL: f64 = 1e-8;

const SEW_CHECK_POINTS: usize = 8;
const SEW_CHECK_SEED: u64 = 0x5e3d;

fn sqrt_const(k: usize) -> Expr {
    Expr::call(Func::Sqrt, Expr::num(k as f64))
}

fn with_point<T>(s: &PointSample, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Eval(source) => Error::EvalAt {
            draw: s.draw,
            coords: s.coords.clone(),
            source,
        },
        e => e,
    })
}

/// `M = C₁ × … × C_k` with block-diagonal metric and `f`, framing and
/// coframing lifted from the cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDefinition {
    cells: Vec<CellDefinition>,
    offsets: Vec<usize>,
    chart: Chart,
    metric: TensorField,
    f: TensorField,
    framing: Vec<TensorField>,
    coframing: Vec<TensorField>,
    median: TensorField,
}

impl ProductDefinition {
    pub fn cells(&self) -> &[CellDefinition] {
        &self.cells
    }

    pub fn k(&self) -> usize {
        self.cells.len()
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn metric(&self) -> &TensorField {
        &self.metric
    }

    pub fn f(&self) -> &TensorField {
        &self.f
    }

    pub fn framing(&self) -> &[TensorField] {
        &self.framing
    }

    pub fn coframing(&self) -> &[TensorField] {
        &self.coframing
    }

    pub fn median(&self) -> &TensorField {
        &self.median
    }

    /// First product coordinate of cell `i`.
    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    /// Cell owning product coordinate `a`.
    pub fn block_of(&self, a: usize) -> usize {
        self.offsets.iter().rposition(|&o| o <= a).unwrap_or(0)
    }

    /// The cell-`i` coordinates of a product point.
    pub fn project(&self, i: usize, q: &[f64]) -> Vec<f64> {
        let o = self.offsets[i];
        q[o..o + self.cells[i].dim()].to_vec()
    }
}

pub fn build_product(cells: &[CellDefinition]) -> Result<ProductDefinition> {
    let k = cells.len();
    if k < 2 {
        return Err(Error::Precondition(format!("sewing needs at least two cells, got {}", k)));
    }
    let mut offsets = Vec::with_capacity(k);
    let mut names = Vec::new();
    let mut constraints = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        if c.chart().adapted().is_none() {
            return Err(Error::NotAdapted(c.name().into()));
        }
        let o = names.len();
        offsets.push(o);
        names.extend(c.chart().names().iter().map(|n| format!("{}_{}", n, i + 1)));
        constraints.extend(
            c.chart()
                .constraints()
                .iter()
                .map(|dc| dc.map_vars(&|v| Expr::var(o + v))),
        );
    }
    let chart = Chart::new(names)?.with_constraints(constraints)?;
    let n = chart.dim();
    let block = |a: usize| offsets.iter().rposition(|&o| o <= a).unwrap_or(0);
    let lift = |i: usize, e: &Expr| {
        let o = offsets[i];
        e.map_vars(&|v| Expr::var(o + v))
    };
    let metric = TensorField::from_fn(Valence::BILINEAR, n, |idx| {
        let (i, j) = (block(idx[0]), block(idx[1]));
        if i != j {
            return Expr::zero();
        }
        lift(i, cells[i].metric().get(&[idx[0] - offsets[i], idx[1] - offsets[i]]))
    });
    let f = TensorField::from_fn(Valence::AFFINOR, n, |idx| {
        let (i, j) = (block(idx[0]), block(idx[1]));
        if i != j {
            return Expr::zero();
        }
        lift(i, cells[i].phi().get(&[idx[0] - offsets[i], idx[1] - offsets[i]]))
    });
    let framing: Vec<TensorField> = (0..k)
        .map(|i| {
            TensorField::from_fn(Valence::VECTOR, n, |idx| {
                if block(idx[0]) == i {
                    lift(i, cells[i].xi().get(&[idx[0] - offsets[i]]))
                } else {
                    Expr::zero()
                }
            })
        })
        .collect();
    let coframing: Vec<TensorField> = (0..k)
        .map(|i| {
            TensorField::from_fn(Valence::COVECTOR, n, |idx| {
                if block(idx[0]) == i {
                    lift(i, cells[i].eta().get(&[idx[0] - offsets[i]]))
                } else {
                    Expr::zero()
                }
            })
        })
        .collect();
    let median = TensorField::from_fn(Valence::VECTOR, n, |idx| {
        let i = block(idx[0]);
        lift(i, cells[i].xi().get(&[idx[0] - offsets[i]])).div(sqrt_const(k))
    });
    Ok(ProductDefinition {
        cells: cells.to_vec(),
        offsets,
        chart,
        metric,
        f,
        framing,
        coframing,
        median,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FStructureReport {
    /// `‖f³ + f‖`
    pub f_cubed_plus_f: f64,
    /// `‖fᵀḡ + ḡf‖`
    pub skew: f64,
    /// `max ‖f ξ̄ᵢ‖`
    pub kills_framing: f64,
    /// `max |ḡ(ξ̄ᵢ, ξ̄ⱼ) − δᵢⱼ|` and `max |η̄ᵢ(ξ̄ⱼ) − δᵢⱼ|`
    pub framing_orthonormal: f64,
    /// `‖ḡ(ξ̄, ξ̄) − 1‖` for the median.
    pub median_unit: f64,
    /// `max ‖dη̄ᵢ‖`
    pub d_coframing: f64,
    pub kernel_dim_min: usize,
    pub kernel_dim_max: usize,
    /// Distance of each `ξ̄ᵢ` from the numerical kernel of `f`.
    pub kernel_span: f64,
    pub k: usize,
    pub tolerance: f64,
}

impl FStructureReport {
    pub fn kernel_matches(&self) -> bool {
        self.kernel_dim_min == self.k && self.kernel_dim_max == self.k
    }

    pub fn passed(&self) -> bool {
        self.kernel_matches()
            && [
                self.f_cubed_plus_f,
                self.skew,
                self.kills_framing,
                self.framing_orthonormal,
                self.median_unit,
                self.d_coframing,
                self.kernel_span,
            ]
            .iter()
            .all(|r| *r <= self.tolerance)
    }
}

/// Numerical kernel of a square matrix as orthonormal columns.
fn kernel_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let scale = svd.singular_values.max().max(1.0);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&r| svd.singular_values[r] <= KERNEL_RANK_TOL * scale)
        .map(|r| v_t.row(r).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

pub fn verify_f_structure(product: &ProductDefinition, samples: &[PointSample], tol: f64) -> Result<FStructureReport> {
    if samples.is_empty() {
        return Err(Error::Precondition("f-structure check needs samples".into()));
    }
    let k = product.k();
    let mut r = FStructureReport {
        f_cubed_plus_f: 0.0,
        skew: 0.0,
        kills_framing: 0.0,
        framing_orthonormal: 0.0,
        median_unit: 0.0,
        d_coframing: 0.0,
        kernel_dim_min: usize::MAX,
        kernel_dim_max: 0,
        kernel_span: 0.0,
        k,
        tolerance: tol,
    };
    for s in samples {
        let q = &s.coords;
        let mut eval = || -> Result<()> {
            let f = product.f.matrix(q)?;
            let g = product.metric.matrix(q)?;
            let xis: Vec<DVector<f64>> = product.framing.iter().map(|x| x.vector(q)).collect::<Result<_, _>>()?;
            let etas: Vec<DVector<f64>> = product.coframing.iter().map(|x| x.vector(q)).collect::<Result<_, _>>()?;
            r.f_cubed_plus_f = r.f_cubed_plus_f.max((&f * &f * &f + &f).norm());
            r.skew = r.skew.max((f.transpose() * &g + &g * &f).norm());
            for (i, xi) in xis.iter().enumerate() {
                r.kills_framing = r.kills_framing.max((&f * xi).norm());
                for (j, xj) in xis.iter().enumerate() {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    r.framing_orthonormal = r
                        .framing_orthonormal
                        .max((xi.dot(&(&g * xj)) - delta).abs())
                        .max((etas[i].dot(xj) - delta).abs());
                }
            }
            let median = product.median.vector(q)?;
            r.median_unit = r.median_unit.max((median.dot(&(&g * &median)) - 1.0).abs());
            for eta in &product.coframing {
                let d = exterior_derivative(eta, q)?;
                r.d_coframing = r.d_coframing.max(libm::sqrt(d.data.iter().map(|x| x * x).sum()));
            }
            let ker = kernel_basis(&f);
            r.kernel_dim_min = r.kernel_dim_min.min(ker.ncols());
            r.kernel_dim_max = r.kernel_dim_max.max(ker.ncols());
            for xi in &xis {
                let proj = &ker * (ker.transpose() * xi);
                r.kernel_span = r.kernel_span.max((xi - proj).norm());
            }
            Ok(())
        };
        with_point(s, eval())?;
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftLawReport {
    /// `∇̄` of coordinate fields of one block against the cell connection.
    pub connection_lift: f64,
    /// `max |Γ̄^c_{ab}|` over `a`, `b` in different blocks.
    pub connection_cross: f64,
    /// `R̄` on one block against the cell curvature.
    pub curvature_lift: f64,
    /// `max |R̄(∂_a, ∂_b)|` over `a`, `b` in different blocks.
    pub curvature_cross: f64,
    /// Normal component of brackets of a spanning set of `Im f ⊕ ℝξ̄`.
    pub involutivity: f64,
    pub tolerance: f64,
}

impl LiftLawReport {
    pub fn passed(&self) -> bool {
        [
            self.connection_lift,
            self.connection_cross,
            self.curvature_lift,
            self.curvature_cross,
            self.involutivity,
        ]
        .iter()
        .all(|r| *r <= self.tolerance)
    }
}

/// Median-adapted unit normals `u_l ∝ ξ̄₁ + … + ξ̄_{l−1} − (l−1)ξ̄_l`,
/// `l = 2…k`, as coefficient rows over the framing.
fn normal_coefficients(framing: &[DVector<f64>], g: &DMatrix<f64>) -> DMatrix<f64> {
    let k = framing.len();
    let mut c = DMatrix::zeros(k - 1, k);
    for l in 1..k {
        for j in 0..l {
            c[(l - 1, j)] = 1.0;
        }
        c[(l - 1, l)] = -(l as f64);
        let v = framing
            .iter()
            .enumerate()
            .fold(DVector::zeros(g.nrows()), |acc, (j, x)| acc + x * c[(l - 1, j)]);
        let norm = libm::sqrt(v.dot(&(g * &v)));
        for j in 0..k {
            c[(l - 1, j)] /= norm;
        }
    }
    c
}

fn combine(coeffs: &DMatrix<f64>, row: usize, vs: &[DVector<f64>]) -> DVector<f64> {
    vs.iter()
        .enumerate()
        .fold(DVector::zeros(vs[0].len()), |acc, (j, v)| acc + v * coeffs[(row, j)])
}

/// `f` and its first derivatives, column `c` as a vector jet.
fn affinor_columns(field: &TensorField, q: &[f64]) -> Result<Vec<VectorJet>> {
    let n = field.dim();
    let jets = field.jets(q)?;
    Ok((0..n)
        .map(|c| VectorJet {
            v: DVector::from_fn(n, |i, _| jets[i * n + c].value),
            dv: DMatrix::from_fn(n, n, |l, i| jets[i * n + c].grad[l]),
        })
        .collect())
}

pub fn verify_lift_laws(product: &ProductDefinition, samples: &[PointSample], tol: f64) -> Result<LiftLawReport> {
    if samples.is_empty() {
        return Err(Error::Precondition("lift-law check needs samples".into()));
    }
    let n = product.dim();
    let mut r = LiftLawReport {
        connection_lift: 0.0,
        connection_cross: 0.0,
        curvature_lift: 0.0,
        curvature_cross: 0.0,
        involutivity: 0.0,
        tolerance: tol,
    };
    for s in samples {
        let q = &s.coords;
        let mut eval = || -> Result<()> {
            let mj = MetricJets::at(&product.metric, q)?;
            let conn = ChristoffelAtPoint::from_jets(&mj);
            let curv = CurvatureAtPoint::from_connection(&conn);
            let cell_geo: Vec<(ChristoffelAtPoint, CurvatureAtPoint)> = (0..product.k())
                .map(|i| {
                    let p = product.project(i, q);
                    let metric = product.cells[i].metric();
                    Ok((christoffel(metric, &p)?, riemann(metric, &p)?))
                })
                .collect::<Result<_>>()?;
            let local = |a: usize| a - product.offsets[product.block_of(a)];
            for a in 0..n {
                let ba = product.block_of(a);
                for b in 0..n {
                    let bb = product.block_of(b);
                    for c in 0..n {
                        let got = conn.gamma[[c, a, b]];
                        if ba != bb {
                            r.connection_cross = r.connection_cross.max(got.abs());
                        } else {
                            let want = if product.block_of(c) == ba {
                                cell_geo[ba].0.gamma[[local(c), local(a), local(b)]]
                            } else {
                                0.0
                            };
                            r.connection_lift = r.connection_lift.max((got - want).abs());
                        }
                        for l in 0..n {
                            let got = curv.riem[[l, a, b, c]];
                            if ba != bb {
                                r.curvature_cross = r.curvature_cross.max(got.abs());
                                continue;
                            }
                            let same = product.block_of(c) == ba && product.block_of(l) == ba;
                            let want = if same {
                                cell_geo[ba].1.riem[[local(l), local(a), local(b), local(c)]]
                            } else {
                                0.0
                            };
                            r.curvature_lift = r.curvature_lift.max((got - want).abs());
                        }
                    }
                }
            }
            // brackets of {f∂_c} ∪ {ξ̄} against the normal frame
            let g = &mj.g;
            let framing: Vec<DVector<f64>> = product.framing.iter().map(|x| x.vector(q)).collect::<Result<_, _>>()?;
            let normals = normal_coefficients(&framing, g);
            let us: Vec<DVector<f64>> = (0..normals.nrows()).map(|a| combine(&normals, a, &framing)).collect();
            let mut fields = affinor_columns(&product.f, q)?;
            fields.push(VectorJet::at(&product.median, q)?);
            for i in 0..fields.len() {
                for j in i + 1..fields.len() {
                    let br = fields[i].bracket(&fields[j]);
                    for u in &us {
                        r.involutivity = r.involutivity.max(u.dot(&(g * &br)).abs());
                    }
                }
            }
            Ok(())
        };
        with_point(s, eval())?;
    }
    Ok(r)
}

/// Where each cell's coordinates land in the sewn chart.
#[derive(Debug, Clone, PartialEq)]
pub struct SewnBlock {
    /// Adapted coordinate of the cell.
    pub adapted: usize,
    /// Sewn-chart index of each cell coordinate; the adapted one maps to `s`.
    pub to_sewn: Vec<usize>,
}

/// `N = C₁ − … − C_k` in the chart `(s, u-coordinates of each cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SewnManifoldDefinition {
    structure: Structure,
    cells: Vec<CellDefinition>,
    blocks: Vec<SewnBlock>,
}

impl SewnManifoldDefinition {
    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn into_structure(self) -> Structure {
        self.structure
    }

    pub fn cells(&self) -> &[CellDefinition] {
        &self.cells
    }

    pub fn blocks(&self) -> &[SewnBlock] {
        &self.blocks
    }

    pub fn k(&self) -> usize {
        self.cells.len()
    }

    pub fn source_names(&self) -> Vec<String> {
        self.cells.iter().map(|c| c.name().into()).collect()
    }

    pub fn product(&self) -> Result<ProductDefinition> {
        build_product(&self.cells)
    }

    /// Cell-`i` point under the sewn point `p`.
    pub fn project(&self, i: usize, p: &[f64]) -> Vec<f64> {
        self.blocks[i].to_sewn.iter().map(|&a| p[a]).collect()
    }

    /// Image of `p` in the product chart.
    pub fn embed(&self, p: &[f64]) -> Vec<f64> {
        (0..self.k()).flat_map(|i| self.project(i, p)).collect()
    }

    /// Columns are `ι_* ∂_a` in product components.
    pub fn tangent_frame(&self) -> DMatrix<f64> {
        let total: usize = self.cells.iter().map(|c| c.dim()).sum();
        let mut j = DMatrix::zeros(total, self.structure.dim());
        let mut row = 0;
        for b in &self.blocks {
            for &a in &b.to_sewn {
                j[(row, a)] = 1.0;
                row += 1;
            }
        }
        j
    }
}

pub fn sew(cells: &[CellDefinition]) -> Result<SewnManifoldDefinition> {
    let k = cells.len();
    if k < 2 {
        return Err(Error::Precondition(format!("sewing needs at least two cells, got {}", k)));
    }
    let mut names = alloc::vec![String::from("s")];
    let mut blocks = Vec::with_capacity(k);
    for (i, c) in cells.iter().enumerate() {
        let t = c.chart().adapted().ok_or_else(|| Error::NotAdapted(c.name().into()))?;
        if !c.is_sewable() {
            return Err(Error::Precondition(format!(
                "cell `{}` must have eta = d{} in its adapted chart",
                c.name(),
                c.chart().name(t)
            )));
        }
        let mut to_sewn = Vec::with_capacity(c.dim());
        for (v, name) in c.chart().names().iter().enumerate() {
            if v == t {
                to_sewn.push(0);
            } else {
                to_sewn.push(names.len());
                names.push(format!("{}_{}", name, i + 1));
            }
        }
        blocks.push(SewnBlock { adapted: t, to_sewn });
    }
    let mapped = |i: usize, e: &Expr| {
        let m = &blocks[i].to_sewn;
        e.map_vars(&|v| Expr::var(m[v]))
    };
    let constraints = cells
        .iter()
        .enumerate()
        .flat_map(|(i, c)| {
            c.chart()
                .constraints()
                .iter()
                .map(|dc| dc.map_vars(&|v| Expr::var(blocks[i].to_sewn[v])))
                .collect::<Vec<_>>()
        })
        .collect();
    let chart = Chart::new(names)?.with_constraints(constraints)?.with_adapted_index(Some(0))?;
    let n = chart.dim();
    // owner[a] = (cell, local coordinate) for a ≥ 1
    let mut owner = alloc::vec![(0usize, 0usize); n];
    for (i, b) in blocks.iter().enumerate() {
        for (v, &a) in b.to_sewn.iter().enumerate() {
            if a != 0 {
                owner[a] = (i, v);
            }
        }
    }
    let metric = TensorField::from_fn(Valence::BILINEAR, n, |idx| match (idx[0], idx[1]) {
        (0, 0) => (0..k).fold(Expr::zero(), |acc, i| {
            let t = blocks[i].adapted;
            acc.add(mapped(i, cells[i].metric().get(&[t, t])))
        }),
        (0, b) => {
            let (i, v) = owner[b];
            mapped(i, cells[i].metric().get(&[blocks[i].adapted, v]))
        }
        (a, 0) => {
            let (i, v) = owner[a];
            mapped(i, cells[i].metric().get(&[v, blocks[i].adapted]))
        }
        (a, b) => {
            let ((i, v), (j, w)) = (owner[a], owner[b]);
            if i == j {
                mapped(i, cells[i].metric().get(&[v, w]))
            } else {
                Expr::zero()
            }
        }
    });
    // f-images have no t-components, so φ is read off the u-rows of the blocks
    let phi = TensorField::from_fn(Valence::AFFINOR, n, |idx| match (idx[0], idx[1]) {
        (0, _) => Expr::zero(),
        (a, 0) => {
            let (i, v) = owner[a];
            mapped(i, cells[i].phi().get(&[v, blocks[i].adapted]))
        }
        (a, b) => {
            let ((i, v), (j, w)) = (owner[a], owner[b]);
            if i == j {
                mapped(i, cells[i].phi().get(&[v, w]))
            } else {
                Expr::zero()
            }
        }
    });
    let xi = TensorField::from_fn(Valence::VECTOR, n, |idx| {
        let (i, v) = if idx[0] == 0 { (0, blocks[0].adapted) } else { owner[idx[0]] };
        mapped(i, cells[i].xi().get(&[v])).div(sqrt_const(k))
    });
    let eta = TensorField::from_fn(Valence::COVECTOR, n, |idx| {
        if idx[0] == 0 {
            sqrt_const(k)
        } else {
            Expr::zero()
        }
    });
    let name = format!(
        "sewn({})",
        cells.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ")
    );
    let structure = Structure::new(name, chart, metric, phi, xi, eta)?;
    let sewn = SewnManifoldDefinition {
        structure,
        cells: cells.to_vec(),
        blocks,
    };
    check_tangency(&sewn)?;
    Ok(sewn)
}

/// `ξ̄` must be tangent to the diagonal and `f` must not leave it.
fn check_tangency(sewn: &SewnManifoldDefinition) -> Result<()> {
    let samples = sample_points(sewn.structure.chart(), SEW_CHECK_POINTS, SEW_CHECK_SEED).map_err(|e| {
        Error::Sewing(format!("cells share no common adapted interval: {}", e))
    })?;
    for s in &samples {
        let mut first = None;
        for (i, cell) in sewn.cells.iter().enumerate() {
            let p = sewn.project(i, &s.coords);
            let t = sewn.blocks[i].adapted;
            let xt = with_point(s, cell.xi().vector(&p).map_err(Error::from))?[t];
            let d = (xt - *first.get_or_insert(xt)).abs();
            if d > TANGENCY_TOL {
                return Err(Error::Sewing(format!(
                    "median field leaves the diagonal at {:?} (t-components differ by {})",
                    s.coords, d
                )));
            }
            let phi = with_point(s, cell.phi().matrix(&p).map_err(Error::from))?;
            let leak = phi.row(t).amax();
            if leak > TANGENCY_TOL {
                return Err(Error::Sewing(format!(
                    "phi of cell `{}` has a t-component {} at {:?}",
                    cell.name(),
                    leak,
                    s.coords
                )));
            }
        }
    }
    Ok(())
}

/// Extrinsic quantities of `N ⊂ M` at one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrinsicSample {
    pub coords: Vec<f64>,
    /// `ḡ(∇̄_{e_a} e_b, u_α)` at `[α, a, b]`.
    pub second_fundamental_form: Cube<3>,
    /// Shape operators `S_α` in the sewn chart.
    pub weingarten: Vec<DMatrix<f64>>,
    pub residuals: ExtrinsicResiduals,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtrinsicResiduals {
    /// `ḡ(ι_*e_a, ι_*e_b)` against the sewn metric.
    pub induced_metric: f64,
    /// Tangential part of `∇̄_{e_a} e_b` against the sewn connection.
    pub gauss: f64,
    /// `max |ḡ(∇̄_X u_α, u_β)|`
    pub normal_connection: f64,
    /// `g(S_α X, Y) − ḡ(h(X,Y), u_α)`
    pub weingarten_symmetry: f64,
    /// `max ‖S_α ξ‖`
    pub shape_on_xi: f64,
    /// `ξ̄ − ι_*ξ`
    pub xi_tangency: f64,
    /// Tangential part of `R̄(X,Y)ξ̄` against the sewn `R(X,Y)ξ`.
    pub curvature_tangential: f64,
    /// Normal part of `R̄(X,Y)ξ̄`.
    pub curvature_normal: f64,
}

impl ExtrinsicResiduals {
    fn as_array(&self) -> [f64; 8] {
        [
            self.induced_metric,
            self.gauss,
            self.normal_connection,
            self.weingarten_symmetry,
            self.shape_on_xi,
            self.xi_tangency,
            self.curvature_tangential,
            self.curvature_normal,
        ]
    }

    pub fn max(&self) -> f64 {
        self.as_array().iter().fold(0.0, |a, b| a.max(*b))
    }

    pub fn join(self, o: ExtrinsicResiduals) -> ExtrinsicResiduals {
        ExtrinsicResiduals {
            induced_metric: self.induced_metric.max(o.induced_metric),
            gauss: self.gauss.max(o.gauss),
            normal_connection: self.normal_connection.max(o.normal_connection),
            weingarten_symmetry: self.weingarten_symmetry.max(o.weingarten_symmetry),
            shape_on_xi: self.shape_on_xi.max(o.shape_on_xi),
            xi_tangency: self.xi_tangency.max(o.xi_tangency),
            curvature_tangential: self.curvature_tangential.max(o.curvature_tangential),
            curvature_normal: self.curvature_normal.max(o.curvature_normal),
        }
    }

    pub fn checks(&self) -> [(&'static str, f64); 8] {
        let v = self.as_array();
        [
            ("induced_metric", v[0]),
            ("gauss", v[1]),
            ("normal_connection", v[2]),
            ("weingarten_symmetry", v[3]),
            ("shape_on_xi", v[4]),
            ("xi_tangency", v[5]),
            ("curvature_tangential", v[6]),
            ("curvature_normal", v[7]),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrinsicReport {
    pub samples: Vec<ExtrinsicSample>,
    pub max: ExtrinsicResiduals,
    pub max_second_fundamental_form: f64,
}

impl ExtrinsicReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max.max() <= tol
    }
}

/// Embedding of `N` at one point together with ambient geometry there.
struct Ambient {
    q: Vec<f64>,
    frame: DMatrix<f64>,
    g: DMatrix<f64>,
    connection: ChristoffelAtPoint,
    curvature: CurvatureAtPoint,
    gram_lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Ambient {
    fn at(sewn: &SewnManifoldDefinition, product: &ProductDefinition, p: &[f64]) -> Result<Self> {
        let q = sewn.embed(p);
        let frame = sewn.tangent_frame();
        let mj = MetricJets::at(product.metric(), &q)?;
        let connection = ChristoffelAtPoint::from_jets(&mj);
        let curvature = CurvatureAtPoint::from_connection(&connection);
        let gram = frame.transpose() * &mj.g * &frame;
        Ok(Ambient {
            q,
            gram_lu: gram.lu(),
            frame,
            g: mj.g,
            connection,
            curvature,
        })
    }

    /// Sewn-chart components of the tangential part of an ambient vector.
    fn tangential(&self, v: &DVector<f64>) -> DVector<f64> {
        let rhs = self.frame.transpose() * (&self.g * v);
        self.gram_lu.solve(&rhs).unwrap_or_else(|| DVector::from_element(rhs.len(), f64::NAN))
    }

    /// Ambient affinor restricted to `N`, with how far it leaves `N`.
    fn restrict(&self, a: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
        let n = self.frame.ncols();
        let mut out = DMatrix::zeros(n, n);
        let mut leak: f64 = 0.0;
        for c in 0..n {
            let img = a * self.frame.column(c);
            let t = self.tangential(&img);
            leak = leak.max((&self.frame * &t - img).amax());
            out.set_column(c, &t);
        }
        (out, leak)
    }
}

pub fn extrinsic_report(sewn: &SewnManifoldDefinition, samples: &[PointSample]) -> Result<ExtrinsicReport> {
    let product = sewn.product()?;
    let n = sewn.structure.dim();
    let k = sewn.k();
    let mut out = Vec::with_capacity(samples.len());
    let mut max = ExtrinsicResiduals::default();
    let mut max_sff: f64 = 0.0;
    for s in samples {
        let eval = || -> Result<ExtrinsicSample> {
            let amb = Ambient::at(sewn, &product, &s.coords)?;
            let local = LocalGeometry::at(&sewn.structure, &s.coords)?;
            let g = &amb.g;
            let framing: Vec<VectorJet> = product
                .framing()
                .iter()
                .map(|x| VectorJet::at(x, &amb.q))
                .collect::<Result<_>>()?;
            let values: Vec<DVector<f64>> = framing.iter().map(|x| x.v.clone()).collect();
            let normals = normal_coefficients(&values, g);
            let us: Vec<DVector<f64>> = (0..k - 1).map(|a| combine(&normals, a, &values)).collect();
            let mut r = ExtrinsicResiduals {
                induced_metric: (amb.frame.transpose() * g * &amb.frame - local.g()).amax(),
                ..Default::default()
            };
            let mut sff = Cube::<3>::zeros(n.max(k - 1));
            let mut weingarten = alloc::vec![DMatrix::zeros(n, n); k - 1];
            for a in 0..n {
                let ea = amb.frame.column(a).into_owned();
                for b in 0..n {
                    let eb = amb.frame.column(b).into_owned();
                    let v = amb.connection.contract(&ea, &eb);
                    let t = amb.tangential(&v);
                    for c in 0..n {
                        r.gauss = r.gauss.max((t[c] - local.connection.gamma[[c, a, b]]).abs());
                    }
                    for (al, u) in us.iter().enumerate() {
                        sff[[al, a, b]] = u.dot(&(g * &v));
                    }
                }
                let nabla_framing: Vec<DVector<f64>> = framing
                    .iter()
                    .map(|x| x.derivative_along(&ea) + amb.connection.contract(&ea, &x.v))
                    .collect();
                for al in 0..k - 1 {
                    let du = combine(&normals, al, &nabla_framing);
                    for u in &us {
                        r.normal_connection = r.normal_connection.max(u.dot(&(g * &du)).abs());
                    }
                    weingarten[al].set_column(a, &(-amb.tangential(&du)));
                }
            }
            let gn = local.g();
            for (al, sa) in weingarten.iter().enumerate() {
                let lowered = gn * sa;
                for a in 0..n {
                    for b in 0..n {
                        r.weingarten_symmetry =
                            r.weingarten_symmetry.max((lowered[(b, a)] - sff[[al, a, b]]).abs());
                    }
                }
                let sx = sa * &local.xi.v;
                r.shape_on_xi = r.shape_on_xi.max(libm::sqrt(sx.dot(&(gn * &sx))));
            }
            let median = product.median().vector(&amb.q)?;
            r.xi_tangency = (&median - &amb.frame * &local.xi.v).amax();
            for a in 0..n {
                let ea = amb.frame.column(a).into_owned();
                let mut na = DVector::zeros(n);
                na[a] = 1.0;
                for b in 0..n {
                    let eb = amb.frame.column(b).into_owned();
                    let mut nb = DVector::zeros(n);
                    nb[b] = 1.0;
                    let rb = amb.curvature.apply(&ea, &eb, &median);
                    let t = amb.tangential(&rb);
                    let intrinsic = local.curvature_xi(&na, &nb);
                    r.curvature_tangential = r.curvature_tangential.max((t - intrinsic).amax());
                    for u in &us {
                        r.curvature_normal = r.curvature_normal.max(u.dot(&(g * &rb)).abs());
                    }
                }
            }
            Ok(ExtrinsicSample {
                coords: s.coords.clone(),
                second_fundamental_form: sff,
                weingarten,
                residuals: r,
            })
        };
        let sample = with_point(s, eval())?;
        max = max.join(sample.residuals);
        max_sff = max_sff.max(sample.second_fundamental_form.max_abs());
        out.push(sample);
    }
    Ok(ExtrinsicReport {
        samples: out,
        max,
        max_second_fundamental_form: max_sff,
    })
}

/// Normalisation of `h′` used when comparing cell and sewn nullity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HPrimeNormalization {
    /// `h′ = hφ`; expect `(κ₀/k, μ₀/√k, μ′₀/√k)`.
    Raw,
    /// `h′ = hφ/α`; expect `(κ₀/k, μ₀/√k, μ′₀/k)`.
    Kenmotsu,
}

impl HPrimeNormalization {
    pub fn label(&self) -> &'static str {
        match self {
            HPrimeNormalization::Raw => "raw",
            HPrimeNormalization::Kenmotsu => "kenmotsu",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationTransfer {
    pub cells: Vec<Classification>,
    pub sewn: Classification,
    /// `None` when the cells do not share a common weight.
    pub expected: Option<StructureClass>,
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullityComparison {
    pub coords: Vec<f64>,
    pub cell: NullityFit,
    pub sewn: NullityFit,
    pub expected: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullityTransfer {
    pub normalization: HPrimeNormalization,
    pub comparisons: Vec<NullityComparison>,
    /// Largest `|sewn − expected|` for `κ`, `μ`, `μ′`.
    pub max_deviation: [f64; 3],
    pub max_sewn_residual: f64,
    pub passed: bool,
}

/// Operators `P`, `H₁`, `H₂` restricted to `N`, and the relations they obey.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OperatorRelations {
    /// `P̄`, `H̄ᵢ` leave `N` by at most this much.
    pub invariance: f64,
    pub symmetric: f64,
    /// `‖Pφ − φP‖`
    pub p_commutes_phi: f64,
    /// `‖Hᵢφ + φHᵢ‖`
    pub h_anticommute_phi: f64,
    /// `‖PHᵢ − HᵢP‖`
    pub p_commutes_h: f64,
    /// `‖Pξ‖`, `‖Hᵢξ‖`
    pub kill_xi: f64,
    /// `R(X,Y)ξ` against the operator form over coordinate pairs.
    pub curvature_identity: f64,
}

impl OperatorRelations {
    fn as_array(&self) -> [f64; 7] {
        [
            self.invariance,
            self.symmetric,
            self.p_commutes_phi,
            self.h_anticommute_phi,
            self.p_commutes_h,
            self.kill_xi,
            self.curvature_identity,
        ]
    }

    pub fn max(&self) -> f64 {
        self.as_array().iter().fold(0.0, |a, b| a.max(*b))
    }

    pub fn checks(&self) -> [(&'static str, f64); 7] {
        let v = self.as_array();
        [
            ("invariance", v[0]),
            ("symmetric", v[1]),
            ("p_commutes_phi", v[2]),
            ("h_anticommute_phi", v[3]),
            ("p_commutes_h", v[4]),
            ("kill_xi", v[5]),
            ("curvature_identity", v[6]),
        ]
    }

    fn join(self, o: OperatorRelations) -> OperatorRelations {
        let (a, b) = (self.as_array(), o.as_array());
        OperatorRelations {
            invariance: a[0].max(b[0]),
            symmetric: a[1].max(b[1]),
            p_commutes_phi: a[2].max(b[2]),
            h_anticommute_phi: a[3].max(b[3]),
            p_commutes_h: a[4].max(b[4]),
            kill_xi: a[5].max(b[5]),
            curvature_identity: a[6].max(b[6]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub classification: ClassificationTransfer,
    pub nullity: Option<NullityTransfer>,
    pub generalized: Option<GeneralizedReport>,
    pub operators: OperatorRelations,
    pub tolerance: f64,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.classification.passed != Some(false)
            && self.nullity.as_ref().is_none_or(|n| n.passed)
            && self.generalized.as_ref().is_none_or(|g| g.passed())
            && self.operators.max() <= self.tolerance
    }
}

/// Cell data at the projections of one sewn point.
struct CellData {
    local: LocalGeometry,
    raw: NullityFit,
}

fn cell_data(sewn: &SewnManifoldDefinition, p: &[f64]) -> Result<Vec<CellData>> {
    sewn.cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let local = LocalGeometry::at(c, &sewn.project(i, p))?;
            let raw = fit_nullity_local(&local, NullityConvention::Raw)?;
            Ok(CellData { local, raw })
        })
        .collect()
}

fn operator_relations(
    sewn: &SewnManifoldDefinition,
    product: &ProductDefinition,
    p: &[f64],
    cells: &[CellData],
) -> Result<OperatorRelations> {
    let k = sewn.k();
    let dim = product.dim();
    let amb = Ambient::at(sewn, product, p)?;
    let local = LocalGeometry::at(&sewn.structure, p)?;
    let mut pbar = DMatrix::zeros(dim, dim);
    let mut h1 = DMatrix::zeros(dim, dim);
    let mut h2 = DMatrix::zeros(dim, dim);
    for (i, c) in cells.iter().enumerate() {
        let o = product.offset(i);
        let m = c.local.dim();
        let phi = &c.local.phi;
        let h = c.local.h();
        let hp = &h * phi;
        let fit = &c.raw;
        let blocks = [
            (&mut pbar, -(phi * phi) * fit.kappa),
            (&mut h1, &h * fit.mu),
            (&mut h2, &hp * fit.mu_prime),
        ];
        for (target, block) in blocks {
            let mut view = target.view_mut((o, o), (m, m));
            view += block / k as f64;
        }
    }
    let (pn, l0) = amb.restrict(&pbar);
    let (h1n, l1) = amb.restrict(&h1);
    let (h2n, l2) = amb.restrict(&h2);
    let g = local.g();
    let phi = &local.phi;
    let xi = &local.xi.v;
    let sym = |a: &DMatrix<f64>| {
        let ga = g * a;
        (&ga - ga.transpose()).norm()
    };
    let mut r = OperatorRelations {
        invariance: l0.max(l1).max(l2),
        symmetric: sym(&pn).max(sym(&h1n)).max(sym(&h2n)),
        p_commutes_phi: (&pn * phi - phi * &pn).norm(),
        h_anticommute_phi: (&h1n * phi + phi * &h1n).norm().max((&h2n * phi + phi * &h2n).norm()),
        p_commutes_h: (&pn * &h1n - &h1n * &pn).norm().max((&pn * &h2n - &h2n * &pn).norm()),
        kill_xi: (&pn * xi).norm().max((&h1n * xi).norm()).max((&h2n * xi).norm()),
        curvature_identity: 0.0,
    };
    let n = local.dim();
    let total = &pn + &h1n + &h2n;
    let eta = &local.eta;
    for a in 0..n {
        let mut ea = DVector::zeros(n);
        ea[a] = 1.0;
        for b in 0..n {
            let mut eb = DVector::zeros(n);
            eb[b] = 1.0;
            let lhs = local.curvature_xi(&ea, &eb);
            let rhs = total.column(a) * eta[b] - total.column(b) * eta[a];
            r.curvature_identity = r.curvature_identity.max((lhs - rhs).amax());
        }
    }
    Ok(r)
}

fn classification_transfer(sewn: &SewnManifoldDefinition, samples: &[PointSample], tol: f64) -> Result<ClassificationTransfer> {
    let k = sewn.k() as f64;
    let cells: Vec<Classification> = sewn
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let projected: Vec<PointSample> = samples
                .iter()
                .map(|s| PointSample {
                    coords: sewn.project(i, &s.coords),
                    ..s.clone()
                })
                .collect();
            classify(c, &projected, tol)
        })
        .collect::<Result<_>>()?;
    let sewn_class = classify(&sewn.structure, samples, tol)?;
    let expected = if cells.iter().all(|c| c.class == StructureClass::AlmostCosymplectic) {
        Some(StructureClass::AlmostCosymplectic)
    } else {
        let alphas: Option<Vec<f64>> = cells.iter().map(|c| c.class.alpha()).collect();
        alphas
            .filter(|a| a.iter().all(|x| (x - a[0]).abs() <= tol))
            .map(|a| StructureClass::AlmostAlphaKenmotsu(a[0] / libm::sqrt(k)))
    };
    let passed = expected.as_ref().map(|e| match (e, &sewn_class.class) {
        (StructureClass::AlmostAlphaKenmotsu(a), StructureClass::AlmostAlphaKenmotsu(b)) => {
            (a - b).abs() <= tol && sewn_class.weight_spread <= tol
        }
        (a, b) => a == b,
    });
    Ok(ClassificationTransfer {
        cells,
        sewn: sewn_class,
        expected,
        passed,
    })
}

/// Check the classification, nullity-transfer and operator theorems on `N`.
///
/// Nullity transfer runs when `normalization` is given and needs identical
/// cells; the generalized check runs when the samples come in leaves.
pub fn verify_sewing_theorems(
    sewn: &SewnManifoldDefinition,
    samples: &[PointSample],
    tol: f64,
    normalization: Option<HPrimeNormalization>,
) -> Result<TheoremReport> {
    if samples.is_empty() {
        return Err(Error::Precondition("theorem checks need samples".into()));
    }
    let k = sewn.k() as f64;
    let copies = sewn.cells.iter().all(|c| *c == sewn.cells[0]);
    if normalization.is_some() && !copies {
        return Err(Error::Precondition(
            "nullity transfer needs identical copies of one cell".into(),
        ));
    }
    let classification = classification_transfer(sewn, samples, tol)?;
    let conventions = match normalization {
        None => None,
        Some(HPrimeNormalization::Raw) => Some((NullityConvention::Raw, NullityConvention::Raw)),
        Some(HPrimeNormalization::Kenmotsu) => {
            let alpha = classification.cells[0].class.alpha().ok_or_else(|| {
                Error::Precondition("kenmotsu normalization needs almost alpha-Kenmotsu cells".into())
            })?;
            Some((
                NullityConvention::Kenmotsu(alpha),
                NullityConvention::Kenmotsu(alpha / libm::sqrt(k)),
            ))
        }
    };
    let product = sewn.product()?;
    let mut operators = OperatorRelations::default();
    let mut comparisons = Vec::new();
    for s in samples {
        let mut eval = || -> Result<()> {
            let cells = cell_data(sewn, &s.coords)?;
            operators = operators.join(operator_relations(sewn, &product, &s.coords, &cells)?);
            if let Some((cell_conv, sewn_conv)) = conventions {
                let cell = fit_nullity_local(&cells[0].local, cell_conv)?;
                let local = LocalGeometry::at(&sewn.structure, &s.coords)?;
                let sewn_fit = fit_nullity_local(&local, sewn_conv)?;
                let last = match normalization {
                    Some(HPrimeNormalization::Kenmotsu) => cell.mu_prime / k,
                    _ => cell.mu_prime / libm::sqrt(k),
                };
                comparisons.push(NullityComparison {
                    coords: s.coords.clone(),
                    expected: [cell.kappa / k, cell.mu / libm::sqrt(k), last],
                    cell,
                    sewn: sewn_fit,
                });
            }
            Ok(())
        };
        with_point(s, eval())?;
    }
    let nullity = normalization.map(|normalization| {
        let mut max_deviation = [0.0f64; 3];
        let mut max_sewn_residual: f64 = 0.0;
        for c in &comparisons {
            let got = [c.sewn.kappa, c.sewn.mu, c.sewn.mu_prime];
            for (m, (g, e)) in max_deviation.iter_mut().zip(got.iter().zip(&c.expected)) {
                *m = m.max((g - e).abs());
            }
            max_sewn_residual = max_sewn_residual.max(c.sewn.residual);
        }
        NullityTransfer {
            normalization,
            passed: max_deviation.iter().all(|d| *d <= tol) && max_sewn_residual <= tol,
            comparisons,
            max_deviation,
            max_sewn_residual,
        }
    });
    let generalized = match conventions {
        Some((_, sewn_conv)) => match check_generalized(&sewn.structure, samples, tol, sewn_conv) {
            Ok(r) => Some(r),
            Err(Error::Precondition(_)) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    Ok(TheoremReport {
        classification,
        nullity,
        generalized,
        operators,
        tolerance: tol,
    })
}

/// `μ′` of cell and sewn manifold under both `h′` normalisations.
#[derive(Debug, Clone, PartialEq)]
pub struct ConventionComparison {
    pub cell_alpha: f64,
    pub sewn_alpha: f64,
    pub raw: (f64, f64),
    pub kenmotsu: (f64, f64),
    /// `μ′ = μ′₀/k` holds in the raw normalisation.
    pub raw_divides_by_k: bool,
    /// `μ′ = μ′₀/k` holds in the `h′/α` normalisation.
    pub kenmotsu_divides_by_k: bool,
}

/// Fit `μ′` on a cell and on `N` in both normalisations and record which
/// one gives the `1/k` scaling.
pub fn compare_hprime_conventions(
    sewn: &SewnManifoldDefinition,
    sample: &PointSample,
    tol: f64,
) -> Result<ConventionComparison> {
    let k = sewn.k() as f64;
    let cell = &sewn.cells[0];
    let cell_point = sewn.project(0, &sample.coords);
    let cls = classify(cell, core::slice::from_ref(&PointSample { coords: cell_point.clone(), ..sample.clone() }), tol)?;
    let cell_alpha = cls.class.alpha().ok_or_else(|| {
        Error::Precondition("convention comparison needs an almost alpha-Kenmotsu cell".into())
    })?;
    let sewn_alpha = cell_alpha / libm::sqrt(k);
    let cell_local = with_point(sample, LocalGeometry::at(cell, &cell_point))?;
    let sewn_local = with_point(sample, LocalGeometry::at(&sewn.structure, &sample.coords))?;
    let raw = (
        fit_nullity_local(&cell_local, NullityConvention::Raw)?.mu_prime,
        fit_nullity_local(&sewn_local, NullityConvention::Raw)?.mu_prime,
    );
    let kenmotsu = (
        fit_nullity_local(&cell_local, NullityConvention::Kenmotsu(cell_alpha))?.mu_prime,
        fit_nullity_local(&sewn_local, NullityConvention::Kenmotsu(sewn_alpha))?.mu_prime,
    );
    Ok(ConventionComparison {
        cell_alpha,
        sewn_alpha,
        raw_divides_by_k: (raw.1 - raw.0 / k).abs() <= tol,
        kenmotsu_divides_by_k: (kenmotsu.1 - kenmotsu.0 / k).abs() <= tol,
        raw,
        kenmotsu,
    })
}
