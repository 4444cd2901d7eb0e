use imlab::certify::*;

#[test]
fn certificate_composition() {
    let c = CertificateReport::compose(2, 20, 11.0, 0.34);
    assert!(c.pass);
    assert!((c.product - 121.0 * 0.34f64.powi(20)).abs() < 1e-20);
    let c = CertificateReport::compose(8, 2, 15.0, 0.34);
    assert!(!c.pass);
    let c = CertificateReport::compose(0, 5, 0.169, 0.169);
    assert!(c.pass && (c.product - 0.169f64.powi(5)).abs() < 1e-15);
    assert!(!CertificateReport::compose(0, 5, 0.6, 0.6).pass);
}

#[test]
fn joining_length_at_default_aperture() {
    assert!((joining_length(6, 0.02, 0.2) - (1.0 / 6.0 - 0.04) * 1.04f64.sqrt() / 0.2).abs() < 1e-15);
}

mod common;

use imlab::surgery::{DAParams, LayeredMap, PushParams, Stage};
use imlab::Error;

#[test]
fn default_axis_scan() {
    let m = common::map(Stage::F1);
    for i in 0..6 {
        let scan = scan_saddle_structure(&m, i).unwrap();
        assert_eq!(scan.violation, None);
        assert_eq!(scan.points.len(), 3);
        assert!((scan.points[1].derivative - 13.0 * m.skew.base.lambda_s).abs() < 1e-9);
        assert!(scan.points[0].s < -0.01 && scan.points[2].s > 0.01);
    }
    assert!(matches!(scan_saddle_structure(&common::map(Stage::F), 0), Err(Error::Stage(..))));
}

#[test]
fn barely_expanding_source_adds_fixed_points() {
    let scan = |delta_da: f64| {
        let da = DAParams {
            delta_da,
            ..DAParams::default()
        };
        let m = LayeredMap::new(common::skew(), Some(da), Some(PushParams::default()), Stage::F1).unwrap();
        scan_saddle_structure(&m, 0).unwrap()
    };
    let s = scan(8.0);
    assert_eq!(s.points.len(), 7);
    assert!(s.violation.is_some());
    let s = scan(10.0);
    assert_eq!(s.violation, None);
    assert!((s.points[1].derivative - 11.0 * 0.112517806303939).abs() < 1e-9);
}

#[test]
fn validate_m_on_defaults() {
    let r = validate_m(&common::map(Stage::F1), 2000, 5).unwrap();
    assert!(r.pass(), "{r}");
    assert!(r.check("M5").unwrap().get("one_plus_xi").unwrap() > 1.0);
    assert!(validate_m(&common::map(Stage::F), 2000, 5).is_err());
}
