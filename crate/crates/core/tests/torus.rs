use imlab::torus::*;
use imlab::*;
use proptest::prelude::*;

#[test]
fn normalize_examples() {
    let p = normalize(0.5, 0.25, 0.75).unwrap();
    assert_eq!(p.coords(), [0.5, 0.25, 0.75]);
    let p = normalize(1.5, -0.25, 2.0).unwrap();
    assert_eq!(p.coords(), [0.5, 0.75, 0.0]);
    assert!(normalize(f64::NAN, 0.0, 0.0).is_err());
    assert!(normalize(0.0, f64::INFINITY, 0.0).is_err());
}

#[test]
fn normalize_seam_rule() {
    // 1 - 1e-17 is 1.0 in binary64, and a tiny negative reduces to
    // 1 - tiny which also rounds to 1.0: both land on 0.0.
    let p = normalize(1.0 - 1e-17, 0.0, 0.0).unwrap();
    assert_eq!(p.base.x1, 0.0);
    assert_eq!(wrap(-1e-20_f64), 0.0);
    assert_eq!(wrap(1.0_f64), 0.0);
    let below = 1.0 - f64::EPSILON;
    assert_eq!(wrap(below), below);
    assert_eq!(wrap(-f64::EPSILON), 1.0 - f64::EPSILON);
}

#[test]
fn default_matrix_eigen_and_fixed_points() {
    let a = AnosovBase::<f64>::new(8, 7, 1, 1).unwrap();
    let expected = (9.0 + 77f64.sqrt()) / 2.0;
    assert!((a.lambda_u - expected).abs() < 1e-12);
    assert!((a.lambda_u - 8.887482).abs() < 1e-6);
    assert!((a.lambda_s * a.lambda_u - 1.0).abs() < 1e-14);
    assert_eq!(a.fixed_pts.len(), 7);
    for (j, p) in a.fixed_pts.iter().enumerate() {
        assert_eq!(p.x1, 0.0);
        assert!((p.x2 - j as f64 / 7.0).abs() < 1e-15);
    }
    let m = a.matrix();
    for (v, l) in [(a.v_u, a.lambda_u), (a.v_s, a.lambda_s)] {
        assert!(((v[0] * v[0] + v[1] * v[1]).sqrt() - 1.0).abs() < 1e-14);
        let av = [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ];
        assert!((av[0] - l * v[0]).abs() < 1e-12 && (av[1] - l * v[1]).abs() < 1e-12);
    }
}

#[test]
fn construction_errors_are_distinct() {
    assert!(matches!(
        AnosovBase::<f64>::new(2, 1, 1, 1),
        Err(Error::WeakExpansion(l)) if (l - 2.618034).abs() < 1e-6
    ));
    assert!(matches!(
        AnosovBase::<f64>::new(1, 0, 0, 1),
        Err(Error::WeakExpansion(_))
    ));
    assert!(matches!(
        AnosovBase::<f64>::new(2, 1, 1, 2),
        Err(Error::Determinant(3))
    ));
    // trace 7 gives |trace - 2| = 5 fixed points with lambda ≈ 6.854
    assert!(AnosovBase::<f64>::new(6, 5, 1, 1).is_ok());
    // trace -4: lambda ≈ -3.73 is too weak
    assert!(matches!(
        AnosovBase::<f64>::new(-2, 1, -1, -2).map(|_| ()),
        Err(Error::Determinant(_)) | Err(Error::WeakExpansion(_))
    ));
}

#[test]
fn small_matrix_fixed_points() {
    let f = enumerate_fixed_points(2, 1, 1, 1).unwrap();
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].num, [0, 0]);
}

#[test]
fn apply_base_examples() {
    let a = AnosovBase::<f64>::new(8, 7, 1, 1).unwrap();
    let o = a.apply(&Point2::new(0.0, 0.0));
    assert_eq!((o.x1, o.x2), (0.0, 0.0));
    let p = a.apply(&Point2::new(0.0, 1.0 / 7.0));
    assert!(p.dist(&Point2::new(0.0, 1.0 / 7.0)) < 1e-14);
    let h = a.apply(&Point2::new(0.5, 0.5));
    assert_eq!((h.x1, h.x2), (0.5, 0.0));
}

#[test]
fn distance_examples() {
    let o = Point3::new(0.0_f64, 0.0, 0.0);
    assert_eq!(torus_distance(&o, &o), 0.0);
    assert!((torus_distance(&o, &Point3::new(0.9, 0.0, 0.0)) - 0.1).abs() < 1e-15);
    let h = Point3::new(0.5, 0.5, 0.5);
    assert!((torus_distance(&o, &h) - 0.75f64.sqrt()).abs() < 1e-15);
    // exhaustive check over the 27 nearest deck translates
    let mut best = f64::MAX;
    for i in -1..=1 {
        for j in -1..=1 {
            for k in -1..=1 {
                let d = ((0.5 + i as f64).powi(2)
                    + (0.5 + j as f64).powi(2)
                    + (0.5 + k as f64).powi(2))
                .sqrt();
                best = best.min(d);
            }
        }
    }
    assert!((torus_distance(&o, &h) - best).abs() < 1e-15);
}

#[test]
fn chart_examples() {
    let a = AnosovBase::<f64>::new(8, 7, 1, 1).unwrap();
    let anchor = Point3::new(0.0, 2.0 / 7.0, 1.0 / 6.0);
    let ch = Chart::for_base(anchor, &a);
    assert_eq!(ch.local(&anchor).unwrap(), [0.0, 0.0, 0.0]);
    let p = anchor.offset([0.01 * a.v_u[0], 0.01 * a.v_u[1], 0.0]);
    let l = ch.local(&p).unwrap();
    assert!((l[0] - 0.01).abs() < 1e-14 && l[1].abs() < 1e-14 && l[2].abs() < 1e-14);
    assert!(ch.local(&Point3::new(0.5, 0.8, 0.6)).is_err());
}

proptest! {
    #[test]
    fn chart_round_trip(u in -0.1f64..0.1, s in -0.1f64..0.1, w in -0.1f64..0.1,
                        ax in 0.0f64..1.0, ay in 0.0f64..1.0, at in 0.0f64..1.0) {
        let a = AnosovBase::<f64>::new(8, 7, 1, 1).unwrap();
        let ch = Chart::for_base(Point3::new(ax, ay, at), &a);
        let p = ch.from_local(u, s, w);
        prop_assume!(torus_distance(&p, &ch.anchor) <= CHART_RADIUS);
        let l = ch.local(&p).unwrap();
        let q = ch.from_local(l[0], l[1], l[2]);
        prop_assert!(torus_distance(&p, &q) < 1e-12);
        prop_assert!((l[0] - u).abs() < 1e-12 && (l[1] - s).abs() < 1e-12 && (l[2] - w).abs() < 1e-12);
    }

    #[test]
    fn base_map_is_linear_mod_one(x1 in 0.0f64..1.0, x2 in 0.0f64..1.0, y1 in 0.0f64..1.0, y2 in 0.0f64..1.0) {
        let a = AnosovBase::<f64>::new(8, 7, 1, 1).unwrap();
        let x = Point2::new(x1, x2);
        let y = Point2::new(y1, y2);
        let sum = a.apply(&Point2::new(x1 + y1, x2 + y2));
        let ax = a.apply(&x);
        let ay = a.apply(&y);
        let r = Point2::new(sum.x1 - ax.x1 - ay.x1, sum.x2 - ax.x2 - ay.x2);
        prop_assert!(r.dist(&Point2::new(0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn distance_is_a_metric(p in proptest::array::uniform3(0.0f64..1.0),
                            q in proptest::array::uniform3(0.0f64..1.0),
                            r in proptest::array::uniform3(0.0f64..1.0)) {
        let (p, q, r) = (Point3::new(p[0], p[1], p[2]), Point3::new(q[0], q[1], q[2]), Point3::new(r[0], r[1], r[2]));
        prop_assert!((torus_distance(&p, &q) - torus_distance(&q, &p)).abs() < 1e-15);
        prop_assert!(torus_distance(&p, &r) <= torus_distance(&p, &q) + torus_distance(&q, &r) + 1e-12);
    }
}
