use proptest::prelude::*;
use thindom::specfun::{bessel_j, bessel_j_deriv, bessel_j_zero, bessel_jy, j_sequence, y_sequence};

// mpmath, 30 digits
const ZEROS: &[(u32, u32, f64)] = &[
    (0, 1, 2.404825557695773),
    (0, 2, 5.520078110286311),
    (1, 1, 3.831705970207512),
    (2, 3, 11.61984117214906),
    (5, 1, 8.771483815959954),
    (3, 10, 35.218670738610115),
];

#[test]
fn zeros_match_reference() {
    for &(n, k, z) in ZEROS {
        let got = bessel_j_zero(n, k);
        assert!((got - z).abs() <= 1e-12 * z, "j_({n},{k}) = {got} vs {z}");
        assert!(bessel_j(n, got).abs() < 1e-12);
    }
}

#[test]
fn derivative_relations() {
    for x in [0.3, 2.0, 17.5, 90.0] {
        let e0 = bessel_jy(0, x).unwrap();
        let e1 = bessel_jy(1, x).unwrap();
        assert!((e0.jp + e1.j).abs() < 1e-15);
        assert!((e0.yp + e1.y).abs() < 1e-14 * e1.y.abs().max(1.0));
        let e3 = bessel_jy(3, x).unwrap();
        let e2 = bessel_jy(2, x).unwrap();
        let e4 = bessel_jy(4, x).unwrap();
        assert!((e3.jp - 0.5 * (e2.j - e4.j)).abs() < 1e-14);
        let (j, jp) = bessel_j_deriv(3, x);
        assert_eq!((j, jp), (e3.j, e3.jp));
    }
}

#[test]
fn sequences_agree_with_single_orders() {
    let x = 7.3;
    let js = j_sequence(12, x);
    let ys = y_sequence(12, x);
    for n in 0..=12u32 {
        let e = bessel_jy(n, x).unwrap();
        assert!((js[n as usize] - e.j).abs() < 1e-14, "J_{n}");
        assert!((ys[n as usize] - e.y).abs() < 1e-13 * e.y.abs().max(1.0), "Y_{n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn wronskian(n in 0u32..=10, x in 1e-3f64..200.0) {
        let e = bessel_jy(n, x).unwrap();
        prop_assert!(e.wronskian_defect().abs() <= 1e-9, "n={} x={} defect {:e}", n, x, e.wronskian_defect());
    }

    #[test]
    fn three_term_recurrence(n in 1u32..=10, x in 1e-3f64..200.0) {
        let (a, b, c) = (bessel_j(n - 1, x), bessel_j(n, x), bessel_j(n + 1, x));
        let rhs = 2.0 * f64::from(n) / x * b;
        let scale = a.abs().max(c.abs()).max(rhs.abs());
        prop_assert!((a + c - rhs).abs() <= 1e-10 * scale);
    }

    #[test]
    fn derivative_matches_central_difference(n in 0u32..=10, x in 0.5f64..50.0) {
        let d = 1e-5;
        let fd = (bessel_j(n, x + d) - bessel_j(n, x - d)) / (2.0 * d);
        let e = bessel_jy(n, x).unwrap();
        prop_assert!((e.jp - fd).abs() <= 1e-6);
        let fdy = (bessel_jy(n, x + d).unwrap().y - bessel_jy(n, x - d).unwrap().y) / (2.0 * d);
        prop_assert!((e.yp - fdy).abs() <= 1e-6 * e.yp.abs().max(1.0));
    }
}
