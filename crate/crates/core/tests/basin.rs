mod common;

use imlab::basin::*;
use imlab::*;
use proptest::prelude::*;

use common::{map, quick_classify};

#[test]
fn slice_inside_invariant_torus_is_single_label() {
    let m = map(Stage::F1);
    let spec = SliceSpec::new(SliceKind::FixFiber, 2.0 / 6.0, (16, 16));
    let r = sweep_raster(&m, &spec, &ClassifyParams::default(), 1, 0).unwrap();
    assert!(r.labels.iter().all(|l| l.tag == Label::Attractor(3)));
    let rep = intermingle_report(&r.plane(), &[4, 16], 0.01).unwrap();
    assert!(rep.all_single(4) && rep.all_single(16));
}

#[test]
fn f0_bands_hold_only_adjacent_labels() {
    let m = map(Stage::F0);
    let spec = SliceSpec::new(SliceKind::FixBase1, 0.5, (24, 24));
    let r = sweep_raster(&m, &spec, &quick_classify(), 1, 0).unwrap();
    for row in 0..24 {
        let t = 1.0 - (row as f64 + 0.5) / 24.0;
        let c = (t * 6.0).floor() as usize;
        for col in 0..24 {
            match r.get(col, row).tag {
                Label::Attractor(a) => assert!(a == c + 1 || a == (c + 1) % 6 + 1, "t {t} label {a}"),
                Label::Unresolved => {}
            }
        }
    }
}

#[test]
fn raster_is_independent_of_worker_count() {
    let m = map(Stage::F);
    let mut spec = SliceSpec::new(SliceKind::BaseLine, 0.2, (16, 16));
    spec.jitter = true;
    let a = sweep_raster(&m, &spec, &quick_classify(), 1, 7).unwrap();
    let b = sweep_raster(&m, &spec, &quick_classify(), 4, 7).unwrap();
    assert_eq!(a, b);
    let p = Palette::hues(6);
    assert_eq!(render_ppm(&a, &p).unwrap(), render_ppm(&b, &p).unwrap());
    let c = sweep_raster(&m, &spec, &quick_classify(), 1, 8).unwrap();
    assert_ne!(a.labels, c.labels);
}

#[test]
fn slice_spec_validation() {
    assert!(SliceSpec::new(SliceKind::FixBase1, 0.5, (8, 16)).validate().is_err());
    let mut s = SliceSpec::new(SliceKind::FixBase1, 0.5, (16, 16));
    s.ranges[1] = (0.5, 1.2);
    assert!(s.validate().is_err());
    s.ranges[1] = (0.6, 0.6);
    assert!(s.validate().is_err());
}

#[test]
fn single_cell_box() {
    let m = map(Stage::F0);
    let g = sweep_box3(&m, (1, 1, 1), &quick_classify(), 1, 0).unwrap();
    assert_eq!(g.labels.len(), 1);
    assert!(matches!(sweep_box3(&m, (0, 1, 1), &quick_classify(), 1, 0), Err(Error::EmptyGrid)));
}

#[test]
fn fingerprint_tracks_parameters() {
    let a = map_fingerprint(&map(Stage::F));
    assert_eq!(a.len(), 64);
    assert_eq!(a, map_fingerprint(&map(Stage::F)));
    assert_ne!(a, map_fingerprint(&map(Stage::F1)));
}

#[test]
fn empty_measure_is_an_error() {
    assert!(matches!(measure_report(&[], 6), Err(Error::EmptyGrid)));
}

fn label_strategy(k: usize) -> impl Strategy<Value = Label> {
    prop_oneof![
        8 => (1..=k).prop_map(Label::Attractor),
        1 => Just(Label::Unresolved),
    ]
}

fn plane_strategy() -> impl Strategy<Value = LabelPlane> {
    (16usize..40, 16usize..40).prop_flat_map(|(w, h)| {
        prop::collection::vec(label_strategy(6), w * h).prop_map(move |labels| LabelPlane {
            width: w,
            height: h,
            labels,
            k: 6,
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn histograms_conserve_cells(plane in plane_strategy()) {
        let r = intermingle_report(&plane, &[1, 2, 4, 8], 0.01).unwrap();
        for &s in &r.scales {
            let mut total = 0;
            for b in r.at_scale(s) {
                prop_assert_eq!(b.counts.iter().sum::<usize>(), b.cells);
                total += b.cells;
            }
            prop_assert_eq!(total, plane.width * plane.height);
        }
    }

    #[test]
    fn finer_label_sets_union_to_parent(plane in plane_strategy()) {
        let r = intermingle_report(&plane, &[2, 4, 8], 0.01).unwrap();
        for (coarse, fine) in [(2usize, 4usize), (4, 8)] {
            let m = fine / coarse;
            for parent in r.at_scale(coarse) {
                let union: std::collections::BTreeSet<Label> = r
                    .at_scale(fine)
                    .filter(|b| b.index.0 / m == parent.index.0 && b.index.1 / m == parent.index.1)
                    .flat_map(|b| b.present.iter().copied())
                    .collect();
                prop_assert_eq!(&union, &parent.present);
            }
        }
    }

    #[test]
    fn fractions_sum_to_one(tags in prop::collection::vec(label_strategy(6), 1..500)) {
        let labels: Vec<BasinLabel> = tags.iter().map(|&tag| BasinLabel { tag, settle_time: 1 }).collect();
        let m = measure_report(&labels, 6).unwrap();
        let s: f64 = m.fractions.iter().sum::<f64>() + m.unresolved;
        prop_assert!((s - 1.0).abs() <= 1e-12);
    }
}
