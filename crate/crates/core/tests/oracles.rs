//! Values computed independently (symbolic algebra, closed forms) and frozen here.

use geodesible::catalog::{
    beltrami_family, beltrami_pullback_metric, disc_volume, football_profile, gauss_bonnet_revolution, hopf_bundle,
    hopf_section, hopf_volume, quaternionic_coframe, s3_chain, DiscMethod, HProfile,
};
use geodesible::checks::cartan_alpha_form;
use geodesible::integrate::{gauss_legendre, integrate_form};
use geodesible::seifert::{chi_orb, euler_number, orbifold_index};
use geodesible::{ext_d, pullback, wedge, Orbifold2D, Point, QuadratureSpec, Quantity, RationalQ, SeifertData};

fn q(n: i64, d: i64) -> RationalQ {
    RationalQ::new(n, d).unwrap()
}

#[test]
fn seifert_values() {
    assert_eq!(euler_number(&SeifertData::new(0, vec![(1, 1)]).unwrap()), q(-1, 1));
    assert_eq!(euler_number(&SeifertData::new(0, vec![(2, 1), (3, 1), (5, 1)]).unwrap()), q(-31, 30));
    assert_eq!(chi_orb(&Orbifold2D::new(0, vec![2, 3, 5]).unwrap()), q(1, 30));
    assert_eq!(chi_orb(&Orbifold2D::new(0, vec![2, 3, 7]).unwrap()), q(-1, 42));
    assert_eq!(chi_orb(&Orbifold2D::new(2, vec![]).unwrap()), q(-2, 1));
    assert_eq!(orbifold_index(3, 0).unwrap(), q(1, 3));
    assert_eq!(orbifold_index(1, 0).unwrap(), q(1, 1));
}

#[test]
fn gauss_legendre_five_point_rule() {
    let (x, w) = gauss_legendre(5);
    let top = x.iter().cloned().fold(f64::MIN, f64::max);
    assert!((top - 0.906_179_845_938_664).abs() < 1e-15);
    let i = x.iter().position(|v| *v == top).unwrap();
    assert!((w[i] - 0.236_926_885_056_189_1).abs() < 1e-15);
}

#[test]
fn hopf_values() {
    assert!((hopf_volume(&QuadratureSpec::default()).unwrap().value - 1.0).abs() < 1e-12);
    let h = hopf_bundle();
    let density = pullback(&hopf_section(), &ext_d(&h.alpha).unwrap()).unwrap();
    let v = density.eval_at(&[2.0, 0.3]).unwrap().coeffs[0];
    assert!((v - 0.025_464_790_894_703_254).abs() < 1e-15);
}

#[test]
fn beltrami_pullback_at_a_point() {
    let f = beltrami_family(1.2, 0.8).unwrap();
    let p = Point::new(&f.chart, vec![0.7, 1.0, 2.0]).unwrap();
    let want = [0.750_711_810_398_766_8, 0.0, 0.0, 0.0, 0.760_276_475_704_130_2, 0.0, 0.0, 0.0, 0.239_723_524_295_869_8];
    let m = beltrami_pullback_metric(&f.chart, 1.2, 0.8).unwrap().matrix(&p).unwrap();
    let g = f.g.matrix(&p).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((m[(i, j)] - want[3 * i + j]).abs() < 1e-14, "{i}{j}");
            assert!((g[(i, j)] - want[3 * i + j]).abs() < 1e-14, "{i}{j}");
        }
    }
}

#[test]
fn disc_and_revolution_values() {
    let h = HProfile::polynomial(&[1.0, 0.0, 0.125]).unwrap();
    let v = disc_volume(&h, DiscMethod::Direct, &QuadratureSpec::default()).unwrap();
    assert!((v.value - 3.010_692_959_690_218_5).abs() < 1e-12);
    let r = gauss_bonnet_revolution(&football_profile(), &QuadratureSpec::default(), 1e-6).unwrap();
    assert!(r.computed.distance(&Quantity::real(5.235_987_755_982_988_7)) < 1e-12);
}

#[test]
fn cartan_contact_volume() {
    let c = quaternionic_coframe().unwrap();
    let alpha = cartan_alpha_form(&c.b, &c.c).unwrap();
    let vol = wedge(&alpha, &ext_d(&alpha).unwrap()).unwrap();
    let v = integrate_form(&vol, &s3_chain(&c.chart), &QuadratureSpec::GaussLegendre { order: 16 }).unwrap();
    assert!((v.value - 157.913_670_417_429_74).abs() < 1e-9, "{v:?}");
}
