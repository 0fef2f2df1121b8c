mod common;

use common::*;
use contactlab_core::{
    eval_form, norm_of, sphere_grid, torus_grid, wrap, CEPoint, ContactForm, CotangentPoint,
    Direction, LabError, TorusPoint, Wave,
};
use proptest::prelude::*;

fn wavy(n: usize) -> ContactForm {
    let q_freq = (0..n as i64).map(|i| 1 - i).collect();
    ContactForm::trigonometric(
        n,
        1.0,
        vec![Wave {
            amp: 0.4,
            q_freq,
            dir: None,
            phase: 0.1,
        }],
    )
    .unwrap()
}

#[test]
fn norm_is_one_on_the_unit_section() {
    let mut r = rng(20);
    for n in [2, 3] {
        let form = wavy(n);
        for _ in 0..50 {
            let x = random_point(n, &mut r);
            let f = form.profile_at(&x);
            let p: Vec<f64> = x.u.u().iter().map(|u| u * f).collect();
            let z = CotangentPoint::new(&p, x.q).unwrap();
            assert!((norm_of(&z, &form).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn norm_rejects_zero_covectors_and_mismatched_forms() {
    let q = TorusPoint::new(&[0.1, 0.2]).unwrap();
    assert_eq!(
        CotangentPoint::new(&[0.0, 0.0], q).unwrap_err(),
        LabError::ZeroCovector
    );
    let z = CotangentPoint::new(&[1.0, 0.0], q).unwrap();
    assert!(norm_of(&z, &ContactForm::round(3)).is_err());
}

#[test]
fn form_annihilates_the_fiber_directions() {
    // lambda = F sum u_i dq_i has no component along the sphere
    let mut r = rng(21);
    for n in [2, 3] {
        let form = wavy(n);
        for _ in 0..20 {
            let x = random_point(n, &mut r);
            let c = eval_form(&form, &x);
            assert_eq!(c.len(), 2 * n - 1);
            assert!(c[..n - 1].iter().all(|&v| v == 0.0));
            let norm: f64 = c[n - 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - form.profile_at(&x)).abs() < 1e-12);
        }
    }
}

#[test]
fn catalog_forms_are_positive_on_grids() {
    let g = contactlab_core::FlatMetric::new(2, &[2.0, 0.3, 0.3, 1.0]).unwrap();
    let forms = [
        ContactForm::round(2),
        ContactForm::constant(2, 0.5).unwrap(),
        ContactForm::metric(g).unwrap(),
        wavy(2),
        wavy(2).sum(&ContactForm::round(2)).unwrap(),
        wavy(3),
    ];
    for form in &forms {
        let n = form.dim();
        for u in sphere_grid(n, 64).unwrap() {
            for q in torus_grid(n, 8) {
                assert!(form.profile_at(&CEPoint::new(u, q).unwrap()) > 0.0);
            }
        }
    }
    assert!(ContactForm::cosine(2, 1.0, &[(1.2, vec![1, 0])]).is_err());
    assert!(ContactForm::constant(2, 0.0).is_err());
}

#[test]
fn sphere_grids_have_unit_directions() {
    for (n, res) in [(2, 4), (2, 128), (3, 256)] {
        let g = sphere_grid(n, res).unwrap();
        assert_eq!(g.len(), res);
        for d in g {
            let s: f64 = d.u().iter().map(|x| x * x).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
    assert!(sphere_grid(2, 3).is_err());
    assert!(sphere_grid(4, 16).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn wrap_is_idempotent_and_in_range(a in -1e6f64..1e6, b in -1e6f64..1e6, c in -1e6f64..1e6) {
        let once = wrap(&[a, b, c]);
        prop_assert!(once.q().iter().all(|&x| (0.0..1.0).contains(&x)));
        prop_assert_eq!(wrap(once.q()), once);
    }

    #[test]
    fn norm_is_positively_homogeneous(
        p1 in -5.0f64..5.0, p2 in -5.0f64..5.0, q1 in 0.0f64..1.0, q2 in 0.0f64..1.0, t in 0.01f64..100.0
    ) {
        prop_assume!(p1.abs() + p2.abs() > 1e-3);
        let form = wavy(2);
        let q = TorusPoint::new(&[q1, q2]).unwrap();
        let z = CotangentPoint::new(&[p1, p2], q).unwrap();
        let tz = CotangentPoint::new(&[t * p1, t * p2], q).unwrap();
        let (a, b) = (norm_of(&z, &form).unwrap(), norm_of(&tz, &form).unwrap());
        prop_assert!((b - t * a).abs() <= 1e-12 * b.max(1.0));
    }

    #[test]
    fn directions_are_normalized(x in -3.0f64..3.0, y in -3.0f64..3.0, z in -3.0f64..3.0) {
        prop_assume!(x.abs() + y.abs() + z.abs() > 1e-6);
        let d = Direction::new(&[x, y, z]).unwrap();
        let s: f64 = d.u().iter().map(|v| v * v).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }
}
