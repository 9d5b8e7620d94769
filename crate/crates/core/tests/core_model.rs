use std::sync::Arc;

use proptest::prelude::*;
use thindom::model::{AnnulusStackConfig, BoundaryCondition, BranchedGrid, BranchedRadialFunction, GridSpec, RadialGrid};
use thindom::quad;
use thindom::Error;

fn layout(h: [f64; 3], n1: usize, n2: usize) -> Arc<BranchedGrid> {
    let cfg = AnnulusStackConfig::with_grid(1.0, 2.0, h, BoundaryCondition::Neumann, GridSpec { n1, n2 }).unwrap();
    BranchedGrid::from_config(&cfg).unwrap()
}

#[test]
fn config_rejections_name_the_field() {
    let bad = |text: &str, field: &str| {
        let e = AnnulusStackConfig::from_json(text).unwrap_err();
        match &e {
            Error::InvalidConfig { field: f, .. } => assert_eq!(*f, field, "{e}"),
            other => panic!("{other}"),
        }
    };
    bad(r#"{"r": 2, "R": 1, "h": [1, 0.3, 0.3], "bc": "neumann"}"#, "R");
    bad(r#"{"r": -1, "R": 1, "h": [1, 0.3, 0.3], "bc": "neumann"}"#, "r");
    bad(r#"{"r": 1, "R": 2, "h": [1, 0.5, 0.5], "bc": "neumann"}"#, "h");
    bad(r#"{"r": 1, "R": 2, "h": [1, 0, 0.3], "bc": "neumann"}"#, "h[1]");
    bad(r#"{"r": 1, "R": 2, "h": [1, 0.3], "bc": "neumann"}"#, "h");
    bad(r#"{"r": 1, "R": 2, "h": [1, 0.3, 0.3], "bc": "robin"}"#, "bc");
    bad(r#"{"r": 1, "R": 2, "h": [1, 0.3, 0.3], "bc": "neumann", "grid": {"n1": 2}}"#, "grid.n1");
    let e = AnnulusStackConfig::from_json("{\"r\": 1,\n \"R\": }").unwrap_err();
    assert!(matches!(e, Error::ConfigParse { line: 2, .. }), "{e}");
}

#[test]
fn config_json_round_trip() {
    let text = r#"{"r": 0.5, "R": 1.5, "h": [2.5, 1, 1], "bc": "dirichlet_lateral", "grid": {"n1": 65, "n2": 33}}"#;
    let cfg = AnnulusStackConfig::from_json(text).unwrap();
    assert_eq!(cfg.bc, BoundaryCondition::DirichletLateral);
    assert_eq!(AnnulusStackConfig::from_json(&cfg.to_json()).unwrap(), cfg);
}

#[test]
fn unit_heights_closed_form() {
    let l = layout([1.0, 0.3, 0.3], 33, 17);
    let cfg = AnnulusStackConfig::new(1.0, 2.0, [1.0, 0.3, 0.3], BoundaryCondition::Neumann).unwrap();
    let one = BranchedRadialFunction::constant(l, [1.0; 3]);
    assert!((one.inner_product(&one).unwrap() - cfg.weighted_measure() / (2.0 * std::f64::consts::PI)).abs() < 1e-13);
    // h1 (R^2 - r^2)/2 + (h2 + h3) r^2/2
    let want = 1.5 + 0.3;
    assert!((one.inner_product(&one).unwrap() - want).abs() < 1e-13);
}

fn smooth(s: usize, x: f64, c: &[f64; 4]) -> f64 {
    match s {
        0 => c[0] * (2.0 * x).sin() + c[1] * x * x,
        1 => c[2] * (1.0 + x * x).ln() + 0.5,
        _ => c[3] * (3.0 * x).cos() - x,
    }
}

fn reference_product(h: [f64; 3], ca: &[f64; 4], cb: &[f64; 4]) -> f64 {
    let rule = quad::gauss_legendre(40);
    let spans = [(1.0, 2.0), (0.0, 1.0), (0.0, 1.0)];
    (0..3)
        .map(|s| {
            let (a, b) = spans[s];
            let pieces = 16;
            let w = (b - a) / pieces as f64;
            h[s] * (0..pieces)
                .map(|k| {
                    let lo = a + w * k as f64;
                    quad::integrate(&rule, lo, lo + w, |x| x * smooth(s, x, ca) * smooth(s, x, cb))
                })
                .sum::<f64>()
        })
        .sum()
}

#[test]
fn smooth_products_match_high_order_quadrature() {
    let h = [1.0, 0.3, 0.3];
    let l = layout(h, 512, 512);
    let ca = [0.7, -1.1, 0.4, 2.0];
    let cb = [-0.3, 0.5, 1.7, -0.9];
    let a = BranchedRadialFunction::sample(l.clone(), |s, x| smooth(s, x, &ca));
    let b = BranchedRadialFunction::sample(l, |s, x| smooth(s, x, &cb));
    let want = reference_product(h, &ca, &cb);
    let got = a.inner_product(&b).unwrap();
    assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "{got} vs {want}");
}

#[test]
fn quadrature_is_at_least_second_order() {
    let h = [1.0, 0.3, 0.3];
    let c = [1.0, 0.5, -0.8, 1.3];
    let want = reference_product(h, &c, &c);
    let err = |n: usize| {
        let f = BranchedRadialFunction::sample(layout(h, n, n), |s, x| smooth(s, x, &c));
        (f.inner_product(&f).unwrap() - want).abs()
    };
    let (e1, e2, e3) = (err(9), err(17), err(33));
    assert!(e1 / e2 >= 3.5 && e2 / e3 >= 3.5, "{e1:e} {e2:e} {e3:e}");
}

fn hat_layout() -> Arc<BranchedGrid> {
    let cfg = AnnulusStackConfig::new(1.0, 2.0, [1.0, 0.3, 0.3], BoundaryCondition::Neumann).unwrap();
    let g = [
        RadialGrid::from_nodes(vec![1.0, 1.25, 1.5, 2.0]).unwrap(),
        RadialGrid::from_nodes(vec![0.0, 0.2, 0.5, 1.0]).unwrap(),
        RadialGrid::from_nodes(vec![0.0, 0.4, 1.0]).unwrap(),
    ];
    BranchedGrid::new(&cfg, g).unwrap()
}

// int_a^b ((rho - a)/(b - a))^2 / rho and the mirrored slope
fn up(a: f64, b: f64) -> f64 {
    ((b * b - a * a) / 2.0 - 2.0 * a * (b - a) + a * a * (b / a).ln()) / (b - a).powi(2)
}

fn down(a: f64, b: f64) -> f64 {
    ((b * b - a * a) / 2.0 - 2.0 * b * (b - a) + b * b * (b / a).ln()) / (b - a).powi(2)
}

#[test]
fn hat_energy_matches_symbolic_integral() {
    let l = hat_layout();
    // hat at rho = 0.5 on the top disk, zero elsewhere
    let hat = BranchedRadialFunction::new(l, [vec![0.0; 4], vec![0.0, 0.0, 1.0, 0.0], vec![0.0; 3]]).unwrap();
    let h2 = 0.3;
    // int rho v'^2 on [0.2, 0.5] with slope 1/0.3 and on [0.5, 1] with slope -2
    let grad = (0.5f64.powi(2) - 0.2f64.powi(2)) / 2.0 / 0.09 + (1.0 - 0.25) / 2.0 * 4.0;
    let e0 = hat.energy_form(&hat, 0).unwrap();
    assert!((e0 - h2 * grad).abs() < 1e-8, "{e0} vs {}", h2 * grad);
    let angular = up(0.2, 0.5) + down(0.5, 1.0);
    let e2 = hat.energy_form(&hat, 2).unwrap();
    assert!((e2 - h2 * (grad + 4.0 * angular)).abs() < 1e-8, "{e2}");
}

fn arb_values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, len)
}

fn arb_function(l: Arc<BranchedGrid>, pinned_origin: bool) -> impl Strategy<Value = BranchedRadialFunction> {
    let lens = [l.grid(0).len(), l.grid(1).len(), l.grid(2).len()];
    (arb_values(lens[0]), arb_values(lens[1]), arb_values(lens[2])).prop_map(move |(a, mut b, mut c)| {
        if pinned_origin {
            b[0] = 0.0;
            c[0] = 0.0;
        }
        BranchedRadialFunction::new(l.clone(), [a, b, c]).unwrap()
    })
}

proptest! {
    #[test]
    fn inner_product_is_symmetric_bilinear_positive(
        (a, b, c) in {
            let l = layout([1.0, 0.3, 0.3], 21, 13);
            (arb_function(l.clone(), false), arb_function(l.clone(), false), arb_function(l, false))
        },
        k in -3.0f64..3.0,
    ) {
        let ab = a.inner_product(&b).unwrap();
        prop_assert!((ab - b.inner_product(&a).unwrap()).abs() <= 1e-12 * (1.0 + ab.abs()));
        let mut ka_c = a.clone();
        ka_c.scale(k);
        ka_c.axpy(1.0, &c).unwrap();
        let lhs = ka_c.inner_product(&b).unwrap();
        let rhs = k * ab + c.inner_product(&b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        if a.max_abs() > 0.0 {
            prop_assert!(a.inner_product(&a).unwrap() > 0.0);
        }
    }

    #[test]
    fn energy_is_nonnegative(
        a in arb_function(layout([1.0, 0.3, 0.3], 21, 13), true),
        n in 0u32..6,
    ) {
        prop_assert!(a.energy_form(&a, n).unwrap() >= 0.0);
    }

    #[test]
    fn energy_is_symmetric(
        (a, b) in {
            let l = layout([2.0, 0.5, 0.7], 17, 11);
            (arb_function(l.clone(), true), arb_function(l, true))
        },
        n in 0u32..4,
    ) {
        let ab = a.energy_form(&b, n).unwrap();
        let ba = b.energy_form(&a, n).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-10 * (1.0 + ab.abs()));
    }
}
