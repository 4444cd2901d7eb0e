use imlab::surgery::*;
use imlab::*;
use imlab::kan::{make_profile, ProfileParams};
use imlab::torus::{torus_distance, AnosovBase};

fn skew() -> SkewMap<f64> {
    let base = AnosovBase::new(8, 7, 1, 1).unwrap();
    let prof = make_profile(&base, &ProfileParams::default()).unwrap();
    SkewMap::new(base, prof).unwrap()
}

fn layered(stage: Stage) -> LayeredMap<f64> {
    make_layered(skew(), Some(DAParams::default()), Some(PushParams::default()), stage).unwrap()
}

#[test]
fn default_parameters_are_valid() {
    let m = layered(Stage::F);
    let d = m.derived.unwrap();
    assert!((d.source_derivative - 1.462734).abs() < 1e-5);
    assert!(d.margin >= 0.1);
    assert!(d.support_radius < 0.02);
}

#[test]
fn weak_deformation_is_not_a_source() {
    let da = DAParams {
        delta_da: 5.0,
        ..DAParams::default()
    };
    match make_layered(skew(), Some(da), None, Stage::F1) {
        Err(Error::NotASource(v)) => assert!((v - 0.675).abs() < 1e-3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn stage_requirements() {
    assert!(matches!(
        make_layered(skew(), None, None, Stage::F1),
        Err(Error::Stage(..))
    ));
    assert!(matches!(
        make_layered(skew(), Some(DAParams::default()), None, Stage::F),
        Err(Error::Stage(..))
    ));
    assert!(make_layered(skew(), None, None, Stage::F0).is_ok());
}

#[test]
fn hole_fixed_at_f1_and_pushed_at_f() {
    let f1 = layered(Stage::F1);
    let f = layered(Stage::F);
    for h in &f1.holes {
        let a = f1.apply(&h.anchor);
        assert!(torus_distance(&a, &h.anchor) < 1e-14);
        let b = f.apply(&h.anchor);
        assert!(b.base.dist(&h.anchor.base) < 1e-14);
        assert!((crate::torus::wrap_delta(b.t - h.anchor.t) - 0.0025).abs() < 1e-14);
    }
}

#[test]
fn far_from_holes_all_stages_agree() {
    let f0 = layered(Stage::F0);
    let f = layered(Stage::F);
    let p = Point3::new(0.5, 0.5, 0.3);
    assert_eq!(f0.apply(&p), f.apply(&p));
}

#[test]
fn source_derivative_on_axis() {
    let f1 = layered(Stage::F1);
    for i in 0..6 {
        assert!((f1.axis_derivative(i, 0.0) - 13.0 * f1.skew.base.lambda_s).abs() < 1e-12);
    }
}
