//! Oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use nalgebra::{DMatrix, DVector};
use sewcell_core::geometry::{frame_tables, LocalGeometry};
use sewcell_core::sewing::SewnManifoldDefinition;
use sewcell_core::{BinOp, Expr, Func, TensorField, Valence};

pub const FUZZ_DIM: usize = 3;

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
}

fn pick(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    rng.next_u64() % n
}

fn one_plus_square(e: Expr) -> Expr {
    Expr::binary(BinOp::Add, Expr::one(), Expr::pow(e, 2.0))
}

/// Random smooth expression over `FUZZ_DIM` variables whose value and
/// derivatives stay moderate on `[-1, 1]^3`.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || pick(rng, 10) < 2 {
        return if pick(rng, 3) == 0 {
            Expr::num(uniform(rng, -2.0, 2.0))
        } else {
            Expr::var(pick(rng, FUZZ_DIM as u64) as usize)
        };
    }
    let d = depth - 1;
    match pick(rng, 13) {
        0 => Expr::binary(BinOp::Add, random_expr(rng, d), random_expr(rng, d)),
        1 => Expr::binary(BinOp::Sub, random_expr(rng, d), random_expr(rng, d)),
        2 | 3 => Expr::binary(BinOp::Mul, random_expr(rng, d), random_expr(rng, d)),
        4 => Expr::binary(
            BinOp::Div,
            random_expr(rng, d),
            Expr::binary(BinOp::Add, Expr::num(2.0), Expr::call(Func::Sin, random_expr(rng, d))),
        ),
        5 => Expr::Neg(Box::new(random_expr(rng, d))),
        6 => Expr::pow(random_expr(rng, d), (2 + pick(rng, 2)) as f64),
        7 => Expr::pow(one_plus_square(random_expr(rng, d)), [0.5, -1.5, 1.0 / 3.0][pick(rng, 3) as usize]),
        8 => Expr::call(Func::Exp, Expr::call(Func::Sin, random_expr(rng, d))),
        9 => Expr::call(Func::Log, one_plus_square(random_expr(rng, d))),
        10 => Expr::call(Func::Sqrt, one_plus_square(random_expr(rng, d))),
        11 => Expr::call(
            [Func::Sin, Func::Cos][pick(rng, 2) as usize],
            random_expr(rng, d),
        ),
        _ => Expr::call(
            [Func::Sinh, Func::Cosh][pick(rng, 2) as usize],
            Expr::call(Func::Cos, random_expr(rng, d)),
        ),
    }
}

pub fn random_point(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..FUZZ_DIM).map(|_| uniform(rng, -1.0, 1.0)).collect()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Worst relative disagreement of jet gradient with differenced values and
/// of jet Hessian with differenced jet gradients.
pub fn jet_fd_errors(e: &Expr, p: &[f64]) -> (f64, f64) {
    const H1: f64 = 1e-6;
    const H2: f64 = 1e-5;
    let jet = e.jet(p).unwrap();
    let shifted = |i: usize, d: f64| {
        let mut q = p.to_vec();
        q[i] += d;
        q
    };
    let mut grad_err: f64 = 0.0;
    let mut hess_err: f64 = 0.0;
    for i in 0..p.len() {
        let fd = (e.eval(&shifted(i, H1)).unwrap() - e.eval(&shifted(i, -H1)).unwrap()) / (2.0 * H1);
        grad_err = grad_err.max((fd - jet.grad[i]).abs() / jet.grad[i].abs().max(1.0));
        let (up, down) = (e.jet(&shifted(i, H2)).unwrap(), e.jet(&shifted(i, -H2)).unwrap());
        for j in 0..p.len() {
            let fd = (up.grad[j] - down.grad[j]) / (2.0 * H2);
            hess_err = hess_err.max((fd - jet.hess(i, j)).abs() / jet.hess(i, j).abs().max(1.0));
        }
    }
    (grad_err, hess_err)
}

/// Residuals `(brackets, covariant derivatives, R(·,·)ξ)` of the sewn
/// nonconstant-κ pair against the closed-form tables in the frame
/// `X̄ᵢ = (∂xᵢ + ∂yᵢ)/√2`, `Ȳᵢ = (−∂xᵢ + ∂yᵢ)/√2`, `ξ`.
pub fn example3_frame_residuals(sewn: &SewnManifoldDefinition, p: &[f64]) -> (f64, f64, f64) {
    let s = sewn.structure();
    let n = s.dim();
    assert_eq!(n, 5);
    let r = 0.5f64.sqrt();
    let constant = |comps: [f64; 5]| {
        TensorField::from_fn(Valence::VECTOR, 5, |idx| Expr::num(comps[idx[0]]))
    };
    let frame = vec![
        constant([0.0, r, r, 0.0, 0.0]),
        constant([0.0, -r, r, 0.0, 0.0]),
        constant([0.0, 0.0, 0.0, r, r]),
        constant([0.0, 0.0, 0.0, -r, r]),
        s.xi().clone(),
    ];
    let t = frame_tables(s, &frame, p).unwrap();
    let es = (-2.0 * p[0]).exp();
    let a = (1.0 - es) / 2f64.sqrt();
    let b = (1.0 + es) / 2f64.sqrt();
    let rate = [a, b, a, b];
    let mut bracket_err: f64 = 0.0;
    let mut nabla_err: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            for c in 0..5 {
                let mut br = 0.0;
                let mut nb = 0.0;
                if i < 4 && j == 4 && c == i {
                    br = rate[i];
                    nb = rate[i];
                }
                if j < 4 && i == 4 && c == j {
                    br = -rate[j];
                }
                if i < 4 && j == i && c == 4 {
                    nb = -rate[i];
                }
                bracket_err = bracket_err.max((t.brackets[[i, j, c]] - br).abs());
                nabla_err = nabla_err.max((t.nabla[[i, j, c]] - nb).abs());
            }
        }
    }
    let local = LocalGeometry::at(s, p).unwrap();
    let values: Vec<DVector<f64>> = frame.iter().map(|f| f.vector(p).unwrap()).collect();
    let basis = DMatrix::from_columns(&values);
    let lu = basis.lu();
    let kappa = -(1.0 + (-4.0 * p[0]).exp()) / 2.0;
    let mut curvature_err: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            let rv = lu.solve(&local.curvature_xi(&values[i], &values[j])).unwrap();
            for c in 0..5 {
                let mut want = 0.0;
                if i < 4 && j == 4 && c == i {
                    want = kappa;
                }
                if j < 4 && i == 4 && c == j {
                    want = -kappa;
                }
                curvature_err = curvature_err.max((rv[c] - want).abs());
            }
        }
    }
    (bracket_err, nabla_err, curvature_err)
}

/// Christoffel symbols `Γ^k_ij` at `[k, i, j]` from central differences of
/// metric values and the Koszul formula.
pub fn koszul_oracle(metric: &TensorField, p: &[f64]) -> Vec<f64> {
    const H: f64 = 1e-5;
    let n = p.len();
    let g = metric.matrix(p).unwrap();
    let g_inv = g.clone().try_inverse().unwrap();
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|l| {
            let mut up = p.to_vec();
            let mut down = p.to_vec();
            up[l] += H;
            down[l] -= H;
            (metric.matrix(&up).unwrap() - metric.matrix(&down).unwrap()) / (2.0 * H)
        })
        .collect();
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                out[(k * n + i) * n + j] = 0.5
                    * (0..n)
                        .map(|l| g_inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                        .sum::<f64>();
            }
        }
    }
    out
}
