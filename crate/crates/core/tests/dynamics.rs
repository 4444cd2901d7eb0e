use imlab::dynamics::*;
use imlab::*;
use imlab::kan::{make_profile, ProfileParams, SkewMap};
use imlab::surgery::{make_layered, DAParams, PushParams};
use imlab::torus::AnosovBase;

fn map(stage: Stage) -> LayeredMap<f64> {
    let base = AnosovBase::new(8, 7, 1, 1).unwrap();
    let prof = make_profile(&base, &ProfileParams::default()).unwrap();
    let skew = SkewMap::new(base, prof).unwrap();
    make_layered(skew, Some(DAParams::default()), Some(PushParams::default()), stage).unwrap()
}

#[test]
fn orbit_of_zero_steps_is_identity() {
    let m = map(Stage::F);
    let p = Point3::new(0.3, 0.6, 0.51);
    assert_eq!(iterate_orbit(&m, &p, 0), p);
    assert_eq!(orbit(&m, &p, 3).len(), 4);
}

#[test]
fn fixed_point_exponents_at_f0() {
    let m = map(Stage::F0);
    let pr = &m.skew.profile;
    // q̂^1 = (0, 0) is exact in binary, so the orbit stays on it
    let p = Point3 {
        base: pr.q_hat(1),
        t: pr.circle(1),
    };
    assert_eq!((p.base.x1, p.base.x2), (0.0, 0.0));
    // only the alignment of the random initial frame biases the
    // estimate, by O(1/n)
    let e = lyapunov_spectrum(&m, &p, 20_000, 2, 1).unwrap();
    let lu = m.skew.base.lambda_u.ln();
    let want = [lu, -0.1, -lu];
    for c in 0..3 {
        assert!((e.exponents[c] - want[c]).abs() < 1e-3, "{e:?}");
    }
}

#[test]
fn lyapunov_preconditions() {
    let m = map(Stage::F0);
    let p = Point3::new(0.3, 0.6, 0.51);
    assert!(lyapunov_spectrum(&m, &p, 50, 10, 1).is_err());
    assert!(matches!(
        lyapunov_spectrum(&m, &p, 4000, 400, 1),
        Err(Error::Overflow(400))
    ));
}

#[test]
fn classify_params_validation() {
    assert!(ClassifyParams::default().validate(6).is_ok());
    let bad = ClassifyParams {
        t_tol: Some(0.1),
        ..ClassifyParams::default()
    };
    assert!(bad.validate(6).is_err());
    let bad = ClassifyParams {
        majority: 0.5,
        ..ClassifyParams::default()
    };
    assert!(bad.validate(6).is_err());
}

#[test]
fn point_in_invariant_torus_settles_there() {
    let m = map(Stage::F1);
    let p = Point3::new(0.5, 0.5, 2.0 / 6.0);
    let params = ClassifyParams {
        n_transient: 100,
        window: 200,
        n_max: 2000,
        ..ClassifyParams::default()
    };
    let l = classify_basin(&m, &p, &params);
    assert_eq!(l.tag, Label::Attractor(3));
    assert_eq!(l.settle_time, 300);
}
