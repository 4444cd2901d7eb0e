//! Binary PPM (P6) rendering of label planes.

use std::collections::BTreeMap;

use crate::basin::{BasinRaster, LabelPlane};
use crate::dynamics::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Palette {
    pub colors: BTreeMap<Label, [u8; 3]>,
}

impl Palette {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, label: Label, rgb: [u8; 3]) -> Self {
        self.colors.insert(label, rgb);
        self
    }

    /// Evenly spaced hues for `1..=k`, black for unresolved.
    pub fn hues(k: usize) -> Self {
        let mut p = Self::new().with(Label::Unresolved, [0, 0, 0]);
        for c in 1..=k {
            let h = (c - 1) as f64 / k as f64 * 6.0;
            let x = 1.0 - (h % 2.0 - 1.0).abs();
            let (r, g, b) = match h as usize {
                0 => (1.0, x, 0.0),
                1 => (x, 1.0, 0.0),
                2 => (0.0, 1.0, x),
                3 => (0.0, x, 1.0),
                4 => (x, 0.0, 1.0),
                _ => (1.0, 0.0, x),
            };
            let q = |v: f64| (55.0 + 200.0 * v).round() as u8;
            p = p.with(Label::Attractor(c), [q(r), q(g), q(b)]);
        }
        p
    }
}

/// P6 bytes: header `P6\n{w} {h}\n255\n`, then RGB triples row by row from
/// the top. Fails with `Palette(c)` if label `c` (0 for unresolved) of
/// `1..=k` has no colour.
pub fn render_plane(plane: &LabelPlane, palette: &Palette) -> Result<Vec<u8>> {
    for c in 1..=plane.k {
        if !palette.colors.contains_key(&Label::Attractor(c)) {
            return Err(Error::Palette(c));
        }
    }
    if !palette.colors.contains_key(&Label::Unresolved) {
        return Err(Error::Palette(0));
    }
    let mut out = format!("P6\n{} {}\n255\n", plane.width, plane.height).into_bytes();
    out.reserve(3 * plane.labels.len());
    for l in &plane.labels {
        let rgb = palette.colors.get(l).ok_or(match l {
            Label::Attractor(c) => Error::Palette(*c),
            Label::Unresolved => Error::Palette(0),
        })?;
        out.extend_from_slice(rgb);
    }
    Ok(out)
}

pub fn render_ppm(raster: &BasinRaster, palette: &Palette) -> Result<Vec<u8>> {
    render_plane(&raster.plane(), palette)
}
