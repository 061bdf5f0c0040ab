use std::sync::Arc;

use geodesible::checks::{cube_chart, random_form, RandomFormSpec};
use geodesible::expr::{BinOp, Expr, Func, ParsedExpr};
use geodesible::integrate::{integrate_form, ParametrizedChain, QuadratureSpec};
use geodesible::seifert::{chi_orb, euler_number, integrality_certificate, stb_invariants};
use geodesible::{ext_d, interior, pullback, wedge, ChartDomain, Jet, KForm, Orbifold2D, Point, SeifertData, SmoothMap, VectorFieldRepr};
use proptest::prelude::*;

fn max_diff(a: &KForm, b: &KForm, points: &[Point]) -> f64 {
    points
        .iter()
        .map(|p| {
            let (x, y) = (a.eval(p).unwrap(), b.eval(p).unwrap());
            x.coeffs.iter().zip(&y.coeffs).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn form(chart: &Arc<ChartDomain>, degree: usize, seed: u64) -> KForm {
    random_form(&RandomFormSpec::new(chart.dim(), degree, seed), chart).unwrap()
}

fn field(chart: &Arc<ChartDomain>, seed: u64) -> VectorFieldRepr {
    // components of a random 1-form read as a vector field
    let w = form(chart, 1, seed);
    VectorFieldRepr::from_values(chart, move |x| w.eval_at(x).unwrap().coeffs)
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(32)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn wedge_is_graded_commutative(k in 0usize..=2, l in 0usize..=2, s in any::<u64>()) {
        let c = cube_chart(4).unwrap();
        let (a, b) = (form(&c, k, s), form(&c, l, s ^ 0x9e37));
        let sign = if (k * l) % 2 == 0 { 1.0 } else { -1.0 };
        let pts = c.sample_points(5, s, 0.0);
        prop_assert!(max_diff(&wedge(&a, &b).unwrap(), &wedge(&b, &a).unwrap().scale(sign), &pts) < 1e-9);
    }

    #[test]
    fn d_is_a_graded_derivation(k in 0usize..=2, l in 0usize..=1, s in any::<u64>()) {
        let c = cube_chart(4).unwrap();
        let (a, b) = (form(&c, k, s), form(&c, l, s.wrapping_add(7)));
        let lhs = ext_d(&wedge(&a, &b).unwrap()).unwrap();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = wedge(&ext_d(&a).unwrap(), &b).unwrap().add(&wedge(&a, &ext_d(&b).unwrap()).unwrap().scale(sign)).unwrap();
        prop_assert!(max_diff(&lhs, &rhs, &c.sample_points(5, s, 0.0)) < 1e-9);
    }

    #[test]
    fn d_squared_vanishes(k in 0usize..=2, s in any::<u64>()) {
        let c = cube_chart(4).unwrap();
        let dd = ext_d(&ext_d(&form(&c, k, s)).unwrap()).unwrap();
        for p in c.sample_points(5, s, 0.0) {
            prop_assert!(dd.eval(&p).unwrap().max_abs() < 1e-10);
        }
    }

    #[test]
    fn pullback_commutes_with_d(k in 0usize..=2, s in any::<u64>()) {
        let c = cube_chart(3).unwrap();
        let f = SmoothMap::from_jets(&c, &c, |x| {
            (0..3).map(|i| &(&x[i] * 0.5) + &(&(&x[(i + 1) % 3] * &x[(i + 1) % 3]) * 0.25)).collect()
        });
        let w = form(&c, k, s);
        let lhs = pullback(&f, &ext_d(&w).unwrap()).unwrap();
        let rhs = ext_d(&pullback(&f, &w).unwrap()).unwrap();
        prop_assert!(max_diff(&lhs, &rhs, &c.sample_points(5, s, 0.0)) < 1e-9);
    }

    #[test]
    fn double_contraction_vanishes(k in 2usize..=3, s in any::<u64>()) {
        let c = cube_chart(4).unwrap();
        let x = field(&c, s.wrapping_mul(3));
        let w = form(&c, k, s);
        let ii = interior(&x, &interior(&x, &w).unwrap()).unwrap();
        for p in c.sample_points(5, s, 0.0) {
            prop_assert!(ii.eval(&p).unwrap().max_abs() < 1e-9);
        }
    }

    #[test]
    fn integration_is_additive_and_orientation_sensitive(s in any::<u64>(), cut in -0.9f64..0.9) {
        let c = cube_chart(2).unwrap();
        let w = form(&c, 2, s);
        let chain = ParametrizedChain::identity(&c, 1).unwrap();
        let spec = QuadratureSpec::GaussLegendre { order: 8 };
        let whole = integrate_form(&w, &chain, &spec).unwrap().value;
        let (a, b) = chain.split(0, cut).unwrap();
        let parts = integrate_form(&w, &a, &spec).unwrap().value + integrate_form(&w, &b, &spec).unwrap().value;
        prop_assert!((whole - parts).abs() < 1e-10 * (1.0 + whole.abs()));
        let rev = integrate_form(&w, &chain.reversed(), &spec).unwrap().value;
        prop_assert_eq!(rev, -whole);
    }

    #[test]
    fn unit_tangent_bundle_euler_is_chi_orb(g in 0i64..=5, cones in prop::collection::vec(2i64..=12, 0..=6)) {
        let o = Orbifold2D::new(g, cones).unwrap();
        prop_assert_eq!(euler_number(&stb_invariants(&o)), chi_orb(&o));
    }

    #[test]
    fn integrality_certificate_is_integral(g in 0i64..=3, raw in prop::collection::vec((1i64..=50, -200i64..=200), 1..=10)) {
        let pairs: Vec<(i64, i64)> = raw
            .into_iter()
            .map(|(a, b)| {
                let mut b = if b == 0 { 1 } else { b };
                while num_gcd(a, b) != 1 { b += 1; }
                (a, b)
            })
            .collect();
        let s = SeifertData::new(g, pairs).unwrap();
        let (_, product) = integrality_certificate(&s).unwrap();
        prop_assert!(product.is_integer());
    }
}

fn num_gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn expr_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..1000).prop_map(|v| Expr::Num(v as f64)),
        (0u32..1000).prop_map(|v| Expr::Num(v as f64 / 64.0)),
        Just(Expr::Var),
        Just(Expr::Pi),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Exp)], inner.clone())
                .prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
            (
                prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)],
                inner.clone(),
                inner
            )
                .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_then_parsing_is_identity(e in expr_tree(), var in prop_oneof![Just("u"), Just("r")]) {
        let parsed = ParsedExpr { var: var.to_string(), expr: e };
        let text = parsed.to_string();
        prop_assert_eq!(ParsedExpr::parse(&text, var).unwrap(), parsed, "{}", text);
    }

    #[test]
    fn jet_and_float_evaluation_agree(e in expr_tree(), x in 0.1f64..2.0) {
        let p = ParsedExpr { var: "u".into(), expr: e };
        let t = geodesible::jet::MonomialTable::get(1, 0);
        let (a, b) = (p.eval(x), p.eval_jet(&Jet::constant(&t, x)).value());
        prop_assert!(a == b || (a.is_nan() && b.is_nan()) || (a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} {} {}", p, a, b);
    }
}
