mod common;

use proptest::prelude::*;

use sewcell_core::catalog::{example3_cell, kenmotsu_warped_cell, model_cosymplectic_cell};
use sewcell_core::nullity::{fit_nullity, NullityConvention};
use sewcell_core::sewing::sew;
use sewcell_core::structure::fundamental_form;
use sewcell_core::{parse_expression, sample_points, Chart, Expr, Structure, TensorField};

const NAMES: [&str; 3] = ["x", "y", "z"];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Relabel coordinates so that new coordinate `i` is old coordinate `perm[i]`.
fn permuted(s: &Structure, perm: &[usize]) -> Structure {
    let n = s.dim();
    let mut inv = vec![0; n];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    let remap = |e: &Expr| e.map_vars(&|v| Expr::var(inv[v]));
    let field = |f: &TensorField| {
        TensorField::from_fn(f.valence(), n, |idx| {
            let old: Vec<usize> = idx.iter().map(|&i| perm[i]).collect();
            remap(f.get(&old))
        })
    };
    let chart = s.chart();
    let names: Vec<String> = perm.iter().map(|&p| chart.name(p).to_string()).collect();
    let constraints = chart
        .constraints()
        .iter()
        .map(|c| c.map_vars(&|v| Expr::var(inv[v])))
        .collect();
    let chart = Chart::new(names)
        .and_then(|c| c.with_adapted_index(chart.adapted().map(|t| inv[t])))
        .and_then(|c| c.with_constraints(constraints))
        .unwrap();
    Structure::new(
        s.name(),
        chart,
        field(s.metric()),
        field(s.phi()),
        field(s.xi()),
        field(s.eta()),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn jets_agree_with_finite_differences(seed in any::<u64>()) {
        let mut rng = common::seeded(seed);
        let e = common::random_expr(&mut rng, 4);
        let p = common::random_point(&mut rng);
        let (grad, hess) = common::jet_fd_errors(&e, &p);
        prop_assert!(grad <= 1e-6, "gradient {grad:e} for {}", e.to_source(&NAMES));
        prop_assert!(hess <= 1e-5, "hessian {hess:e} for {}", e.to_source(&NAMES));
    }

    #[test]
    fn jet_value_matches_eval(seed in any::<u64>()) {
        let mut rng = common::seeded(seed);
        let e = common::random_expr(&mut rng, 4);
        let p = common::random_point(&mut rng);
        prop_assert!(rel(e.jet(&p).unwrap().value, e.eval(&p).unwrap()) <= 1e-14);
    }

    #[test]
    fn parsing_is_total(src in "[xyz0-9a-h+*/^()., eE-]{0,48}") {
        if let Ok(e) = parse_expression(&src, &NAMES) {
            let _ = e.eval(&[0.3, -0.7, 1.1]);
            let _ = e.jet(&[0.3, -0.7, 1.1]);
        }
    }

    #[test]
    fn printed_source_parses_back(seed in any::<u64>()) {
        let mut rng = common::seeded(seed);
        let e = common::random_expr(&mut rng, 4);
        let p = common::random_point(&mut rng);
        let back = parse_expression(&e.to_source(&NAMES), &NAMES).unwrap();
        prop_assert!(rel(back.eval(&p).unwrap(), e.eval(&p).unwrap()) <= 1e-12);
    }

    #[test]
    fn substitution_commutes_with_eval(seed in any::<u64>(), var in 0usize..3) {
        let mut rng = common::seeded(seed);
        let e = common::random_expr(&mut rng, 3);
        let r = common::random_expr(&mut rng, 2);
        let p = common::random_point(&mut rng);
        let mut q = p.clone();
        q[var] = r.eval(&p).unwrap();
        let direct = e.eval(&q).unwrap();
        prop_assert!(rel(e.substitute(var, &r).eval(&p).unwrap(), direct) <= 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fundamental_form_is_skew(
        lambda in 0.2f64..2.0,
        alpha in 0.3f64..1.5,
        gap in 0.2f64..3.0,
        seed in any::<u64>(),
    ) {
        let cells = [
            model_cosymplectic_cell(lambda).unwrap(),
            kenmotsu_warped_cell(alpha, -alpha * alpha - gap, 1.3, 0.7).unwrap(),
            example3_cell(),
        ];
        for c in &cells {
            for p in sample_points(c.chart(), 4, seed).unwrap() {
                let f = fundamental_form(c.structure(), &p.coords).unwrap();
                prop_assert!((&f + f.transpose()).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn kenmotsu_convention_rescales_mu_prime(
        alpha in 0.3f64..2.0,
        gap in 0.2f64..3.0,
        seed in any::<u64>(),
    ) {
        let c = kenmotsu_warped_cell(alpha, -alpha * alpha - gap, 1.0, 1.0).unwrap();
        for p in sample_points(c.chart(), 3, seed).unwrap() {
            let raw = fit_nullity(c.structure(), &p.coords, NullityConvention::Raw).unwrap();
            let ken = fit_nullity(c.structure(), &p.coords, NullityConvention::Kenmotsu(alpha)).unwrap();
            prop_assert!((raw.kappa - ken.kappa).abs() <= 1e-8);
            prop_assert!((raw.mu - ken.mu).abs() <= 1e-8);
            prop_assert!(rel(ken.mu_prime, alpha * raw.mu_prime) <= 1e-8, "{:?} {:?}", raw, ken);
            prop_assert!(rel(ken.mu_prime, -2.0 * alpha * alpha) <= 1e-8);
        }
    }

    #[test]
    fn fits_ignore_order_of_non_adapted_coordinates(
        perm in Just(vec![1usize, 2, 3, 4]).prop_shuffle(),
        seed in any::<u64>(),
    ) {
        let sewn = sew(&[example3_cell(), kenmotsu_warped_cell(1.0, -3.0, 1.0, 2.0).unwrap()]).unwrap();
        let s = sewn.structure();
        let full: Vec<usize> = core::iter::once(0).chain(perm.iter().copied()).collect();
        let t = permuted(s, &full);
        for p in sample_points(s.chart(), 2, seed).unwrap() {
            let q: Vec<f64> = full.iter().map(|&i| p.coords[i]).collect();
            let a = fit_nullity(s, &p.coords, NullityConvention::Raw).unwrap();
            let b = fit_nullity(&t, &q, NullityConvention::Raw).unwrap();
            prop_assert!((a.kappa - b.kappa).abs() <= 1e-9);
            prop_assert!((a.mu - b.mu).abs() <= 1e-9);
            prop_assert!((a.mu_prime - b.mu_prime).abs() <= 1e-9, "{:?} {:?}", a, b);
            prop_assert!((a.residual - b.residual).abs() <= 1e-9);
        }
    }
}

#[test]
fn adapted_cells_have_unit_reeb_covector() {
    for c in [model_cosymplectic_cell(1.0).unwrap(), example3_cell()] {
        let t = c.chart().adapted().unwrap();
        for (i, e) in c.structure().eta().components().iter().enumerate() {
            assert_eq!(*e, Expr::num(if i == t { 1.0 } else { 0.0 }));
        }
    }
}
