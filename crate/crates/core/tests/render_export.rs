mod common;

use imlab::basin::{BoxStats, IntermingleReport, LabelPlane, MeasureReport};
use imlab::*;

#[test]
fn two_pixel_ppm_bytes() {
    let plane = LabelPlane {
        width: 2,
        height: 1,
        labels: vec![Label::Attractor(1), Label::Unresolved],
        k: 1,
    };
    let p = Palette::new()
        .with(Label::Attractor(1), [255, 0, 0])
        .with(Label::Unresolved, [0, 0, 0]);
    let mut want = b"P6\n2 1\n255\n".to_vec();
    want.extend_from_slice(&[0xff, 0, 0, 0, 0, 0]);
    assert_eq!(render_plane(&plane, &p).unwrap(), want);
}

#[test]
fn palette_missing_a_label() {
    let plane = LabelPlane {
        width: 1,
        height: 1,
        labels: vec![Label::Attractor(1)],
        k: 6,
    };
    let mut p = Palette::hues(6);
    p.colors.remove(&Label::Attractor(3));
    assert_eq!(render_plane(&plane, &p), Err(Error::Palette(3)));
    assert_eq!(Palette::hues(6).colors.len(), 7);
    let distinct: std::collections::BTreeSet<[u8; 3]> = Palette::hues(6).colors.values().copied().collect();
    assert_eq!(distinct.len(), 7);
}

#[test]
fn golden_f0_raster() {
    let m = common::map(Stage::F0);
    let spec = SliceSpec::new(SliceKind::FixBase1, 0.5, (16, 16));
    let r = sweep_raster(&m, &spec, &ClassifyParams::default(), 1, 2024).unwrap();
    let bytes = render_ppm(&r, &Palette::hues(6)).unwrap();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/f0_x1_half_16.ppm");
    let want = std::fs::read(path).expect("golden file");
    assert_eq!(bytes, want);
}

#[test]
fn certificate_key_values() {
    let c = CertificateReport::compose(2, 4, 10.5, 0.3);
    let text = export_kv(&c);
    let keys: Vec<&str> = text.lines().map(|l| l.split('=').next().unwrap()).collect();
    assert_eq!(keys, ["N0", "N1", "max_dilatation", "outside_factor", "product", "pass"]);
    assert!(text.starts_with("N0=2\nN1=4\nmax_dilatation=10.5\n"));
    assert!(text.ends_with("pass=true\n"));
}

fn empty_intermingle() -> IntermingleReport {
    IntermingleReport {
        scales: vec![],
        min_fraction: 0.01,
        width: 0,
        height: 0,
        k: 6,
        boxes: vec![],
    }
}

#[test]
fn empty_reports_are_header_only() {
    assert_eq!(export_csv(&empty_intermingle()).unwrap(), "scale,box_i,box_j,label,fraction\n");
    assert_eq!(export_csv(&PropertyReport::default()).unwrap().lines().count(), 1);
    let m = MeasureReport {
        total: 0,
        fractions: vec![],
        unresolved: 0.0,
        mean_settle: vec![],
    };
    assert_eq!(export_csv(&m).unwrap(), "label,fraction,mean_settle\n");
}

#[test]
fn intermingle_rows_and_quoting() {
    let mut counts = vec![0; 7];
    counts[0] = 3;
    counts[6] = 1;
    let r = IntermingleReport {
        boxes: vec![BoxStats {
            scale: 1,
            index: (0, 0),
            cells: 4,
            counts,
            present: [Label::Attractor(1), Label::Unresolved].into(),
            significant: [Label::Attractor(1)].into(),
        }],
        scales: vec![1],
        ..empty_intermingle()
    };
    assert_eq!(
        export_csv(&r).unwrap(),
        "scale,box_i,box_j,label,fraction\n1,0,0,1,0.75\n1,0,0,U,0.25\n"
    );
    let p = PropertyReport {
        checks: vec![PropertyCheck::new("P1", 1.0).detail("a, \"b\"")],
    };
    assert!(export_csv(&p).unwrap().contains("\"a, \"\"b\"\"\""));
}
