//! Regenerates the golden F0 raster: `cargo run --release --example golden -- crates/core/tests/golden/f0_x1_half_16.ppm`.

use imlab::*;

fn main() {
    let path = std::env::args().nth(1).expect("usage: golden <out.ppm>");
    let base = AnosovBase64::new(8, 7, 1, 1).unwrap();
    let prof = make_profile(&base, &ProfileParams::default()).unwrap();
    let m = LayeredMap::new(SkewMap::new_unchecked(base, prof), None, None, Stage::F0).unwrap();
    let spec = SliceSpec::new(SliceKind::FixBase1, 0.5, (16, 16));
    let r = sweep_raster(&m, &spec, &ClassifyParams::default(), 1, 2024).unwrap();
    std::fs::write(path, render_ppm(&r, &Palette::hues(6)).unwrap()).unwrap();
}
