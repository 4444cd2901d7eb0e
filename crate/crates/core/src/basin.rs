//! Basin sweeps over slices and boxes of the 3-torus, plus intermingling and
//! measure statistics.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::dynamics::{classify_basin, BasinLabel, ClassifyParams, Label};
use crate::error::{Error, Result};
use crate::rng::sample_rng;
use crate::scalar::Real;
use crate::surgery::LayeredMap;
use crate::torus::{Point2, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceKind {
    /// `x1` fixed, axes `(x2, t)`.
    FixBase1,
    /// `x2` fixed, axes `(x1, t)`.
    FixBase2,
    /// `t` fixed, axes `(x1, x2)`.
    FixFiber,
    /// The `(v_u, t)` plane through `(fixed_value, 0)`; the first axis is
    /// arc length along `v_u`.
    BaseLine,
}

impl std::str::FromStr for SliceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FixBase1" | "x1" => Ok(Self::FixBase1),
            "FixBase2" | "x2" => Ok(Self::FixBase2),
            "FixFiber" | "t" => Ok(Self::FixFiber),
            "BaseLine" | "vu" => Ok(Self::BaseLine),
            _ => Err(Error::Precondition(format!("unknown slice kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceSpec {
    pub kind: SliceKind,
    pub fixed_value: f64,
    /// Horizontal then vertical axis range.
    pub ranges: [(f64, f64); 2],
    /// `(w, h)` in cells.
    pub resolution: (usize, usize),
    /// Sample a seeded random point of each cell instead of its centre.
    pub jitter: bool,
}

impl SliceSpec {
    pub fn new(kind: SliceKind, fixed_value: f64, resolution: (usize, usize)) -> Self {
        Self {
            kind,
            fixed_value,
            ranges: [(0.0, 1.0), (0.0, 1.0)],
            resolution,
            jitter: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (w, h) = self.resolution;
        if w < 16 || h < 16 {
            return Err(Error::Parameter {
                name: "resolution",
                value: w.min(h) as f64,
                reason: "must be at least 16x16",
            });
        }
        for &(lo, hi) in &self.ranges {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
                return Err(Error::Parameter {
                    name: "ranges",
                    value: if (0.0..=1.0).contains(&lo) { hi } else { lo },
                    reason: "must be increasing intervals within [0, 1]",
                });
            }
        }
        if !self.fixed_value.is_finite() {
            return Err(Error::NonFinite(self.fixed_value));
        }
        Ok(())
    }

    /// Point sampled for cell `(col, row)`; row 0 is the top of the image,
    /// i.e. the upper end of the vertical range.
    pub fn point<T: Real>(&self, map: &LayeredMap<T>, col: usize, row: usize, seed: u64) -> Point3<T> {
        let (w, h) = self.resolution;
        let (fx, fy) = if self.jitter {
            let mut rng = sample_rng(seed, 0xce11, (row * w + col) as u64);
            (rng.gen::<f64>(), rng.gen::<f64>())
        } else {
            (0.5, 0.5)
        };
        let [(a0, a1), (b0, b1)] = self.ranges;
        let a = a0 + (a1 - a0) * (col as f64 + fx) / w as f64;
        let b = b1 - (b1 - b0) * (row as f64 + fy) / h as f64;
        let c = self.fixed_value;
        let l = T::lit;
        let g = |x: f64| T::lit(generic(x));
        match self.kind {
            SliceKind::FixBase1 => Point3::new(g(c), g(a), l(b)),
            SliceKind::FixBase2 => Point3::new(g(a), g(c), l(b)),
            SliceKind::FixFiber => Point3::new(g(a), g(b), l(c)),
            SliceKind::BaseLine => {
                let v = map.skew.base.v_u;
                Point3 {
                    base: Point2::new(g(c) + l(a) * v[0], l(a) * v[1]),
                    t: crate::torus::wrap(l(b)),
                }
            }
        }
    }
}

/// Offset added to sampled base coordinates. Cell centres are dyadic
/// rationals with short denominators, which the integer base map sends to
/// short periodic orbits computed exactly; the offset gives every sampled
/// point a full-length mantissa.
pub const BASE_NUDGE: f64 = 0.618_033_988_749_894_8e-9;

#[inline]
pub fn generic(x: f64) -> f64 {
    x + BASE_NUDGE
}

/// SHA-256 over every parameter that determines the map, hex encoded.
pub fn map_fingerprint<T: Real>(map: &LayeredMap<T>) -> String {
    let b = &map.skew.base;
    let p = &map.skew.profile;
    let text = format!(
        "matrix={:?} stage={} k={} specials={:?} nu={:?} g_plus={:?} u_plus={:?} rho_b={:?} saddle_node={:?} windows={:?} da={:?} push={:?}",
        [b.a, b.b, b.c, b.d],
        map.stage,
        p.k,
        p.specials,
        p.nu.as_f64(),
        p.g_plus.as_f64(),
        p.u_plus.as_f64(),
        p.rho_b.as_f64(),
        p.saddle_node.as_f64(),
        p.windows,
        map.da,
        map.push,
    );
    hex(&Sha256::digest(text.as_bytes()))
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn run_pool<R: Send>(workers: usize, job: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinRaster {
    pub spec: SliceSpec,
    /// Row-major, row 0 at the top.
    pub labels: Vec<BasinLabel>,
    pub map_fingerprint: String,
    pub seed: u64,
    pub params: ClassifyParams,
    pub k: usize,
}

impl BasinRaster {
    pub fn width(&self) -> usize {
        self.spec.resolution.0
    }

    pub fn height(&self) -> usize {
        self.spec.resolution.1
    }

    pub fn get(&self, col: usize, row: usize) -> BasinLabel {
        self.labels[row * self.width() + col]
    }

    pub fn plane(&self) -> LabelPlane {
        LabelPlane {
            width: self.width(),
            height: self.height(),
            labels: self.labels.iter().map(|l| l.tag).collect(),
            k: self.k,
        }
    }
}

/// Classifies every cell of a slice. The output does not depend on
/// `workers`: cells are classified independently and placed by index.
pub fn sweep_raster<T: Real>(
    map: &LayeredMap<T>,
    spec: &SliceSpec,
    params: &ClassifyParams,
    workers: usize,
    seed: u64,
) -> Result<BasinRaster> {
    spec.validate()?;
    params.validate(map.k())?;
    let (w, h) = spec.resolution;
    let labels = run_pool(workers, || {
        (0..w * h)
            .into_par_iter()
            .map(|n| classify_basin(map, &spec.point(map, n % w, n / w, seed), params))
            .collect()
    })?;
    Ok(BasinRaster {
        spec: spec.clone(),
        labels,
        map_fingerprint: map_fingerprint(map),
        seed,
        params: params.clone(),
        k: map.k(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxGrid {
    pub dims: (usize, usize, usize),
    /// Index `(i1 * n2 + i2) * n3 + i3` for the cell centred at
    /// `((i1 + 1/2)/n1, (i2 + 1/2)/n2, (i3 + 1/2)/n3)`, base coordinates
    /// offset by [`BASE_NUDGE`].
    pub labels: Vec<BasinLabel>,
    pub map_fingerprint: String,
    pub seed: u64,
    pub params: ClassifyParams,
    pub k: usize,
}

impl BoxGrid {
    pub fn measure(&self) -> Result<MeasureReport> {
        measure_report(&self.labels, self.k)
    }

    /// The `(x2, t)` plane at `x1` index `i1`, with larger `t` on top.
    pub fn plane_x1(&self, i1: usize) -> LabelPlane {
        let (_, n2, n3) = self.dims;
        let mut labels = Vec::with_capacity(n2 * n3);
        for r in 0..n3 {
            for c in 0..n2 {
                labels.push(self.labels[(i1 * n2 + c) * n3 + (n3 - 1 - r)].tag);
            }
        }
        LabelPlane {
            width: n2,
            height: n3,
            labels,
            k: self.k,
        }
    }
}

/// Volume sweep over cell centres of an `n1 x n2 x n3` grid of the torus.
/// The seed only matters when it feeds a jittered slice; here it is recorded
/// for the manifest.
pub fn sweep_box3<T: Real>(
    map: &LayeredMap<T>,
    grid: (usize, usize, usize),
    params: &ClassifyParams,
    workers: usize,
    seed: u64,
) -> Result<BoxGrid> {
    params.validate(map.k())?;
    let (n1, n2, n3) = grid;
    if n1 * n2 * n3 == 0 {
        return Err(Error::EmptyGrid);
    }
    let c = |i: usize, n: usize| T::lit((i as f64 + 0.5) / n as f64);
    let labels = run_pool(workers, || {
        (0..n1 * n2 * n3)
            .into_par_iter()
            .map(|n| {
                let (i1, i2, i3) = (n / (n2 * n3), n / n3 % n2, n % n3);
                let g = |i: usize, n: usize| T::lit(generic((i as f64 + 0.5) / n as f64));
                let p = Point3::new(g(i1, n1), g(i2, n2), c(i3, n3));
                classify_basin(map, &p, params)
            })
            .collect()
    })?;
    Ok(BoxGrid {
        dims: grid,
        labels,
        map_fingerprint: map_fingerprint(map),
        seed,
        params: params.clone(),
        k: map.k(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub total: usize,
    /// Fraction per label `1..=k`.
    pub fractions: Vec<f64>,
    pub unresolved: f64,
    /// Mean settle time per label; `None` when the label does not occur.
    pub mean_settle: Vec<Option<f64>>,
}

pub fn measure_report(labels: &[BasinLabel], k: usize) -> Result<MeasureReport> {
    if labels.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut counts = vec![0usize; k];
    let mut settle = vec![0u128; k];
    let mut unresolved = 0usize;
    for l in labels {
        match l.tag {
            Label::Attractor(c) if (1..=k).contains(&c) => {
                counts[c - 1] += 1;
                settle[c - 1] += l.settle_time as u128;
            }
            _ => unresolved += 1,
        }
    }
    let n = labels.len() as f64;
    Ok(MeasureReport {
        total: labels.len(),
        fractions: counts.iter().map(|&c| c as f64 / n).collect(),
        unresolved: unresolved as f64 / n,
        mean_settle: counts
            .iter()
            .zip(&settle)
            .map(|(&c, &s)| (c > 0).then(|| s as f64 / c as f64))
            .collect(),
    })
}

/// Labels of a 2-D field, row-major with row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelPlane {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<Label>,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub scale: usize,
    /// Column then row of the box, row 0 at the top.
    pub index: (usize, usize),
    pub cells: usize,
    /// Counts per label `1..=k`, then unresolved.
    pub counts: Vec<usize>,
    /// Labels with at least one cell.
    pub present: BTreeSet<Label>,
    /// Attractor labels holding at least `min_fraction` of the box.
    pub significant: BTreeSet<Label>,
}

impl BoxStats {
    pub fn fraction(&self, label: Label) -> f64 {
        let k = self.counts.len() - 1;
        let n = match label {
            Label::Attractor(c) if (1..=k).contains(&c) => self.counts[c - 1],
            Label::Attractor(_) => 0,
            Label::Unresolved => self.counts[k],
        };
        n as f64 / self.cells as f64
    }

    /// Row range `[r0, r1)` of the plane covered by the box.
    pub fn rows(&self, height: usize) -> (usize, usize) {
        split(height, self.scale, self.index.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntermingleReport {
    pub scales: Vec<usize>,
    pub min_fraction: f64,
    pub width: usize,
    pub height: usize,
    pub k: usize,
    pub boxes: Vec<BoxStats>,
}

impl IntermingleReport {
    pub fn at_scale(&self, scale: usize) -> impl Iterator<Item = &BoxStats> {
        self.boxes.iter().filter(move |b| b.scale == scale)
    }

    /// Every box at `scale` has at least two significant labels.
    pub fn all_mixed(&self, scale: usize) -> bool {
        self.at_scale(scale).all(|b| b.significant.len() >= 2)
    }

    /// Every box at `scale` has one present label.
    pub fn all_single(&self, scale: usize) -> bool {
        self.at_scale(scale).all(|b| b.present.len() == 1)
    }
}

fn split(n: usize, parts: usize, i: usize) -> (usize, usize) {
    (i * n / parts, (i + 1) * n / parts)
}

/// Label histograms over `s x s` boxes for every `s` in `scales`. Boxes
/// split rows and columns at `floor(i n / s)`, so nested scales nest.
pub fn intermingle_report(plane: &LabelPlane, scales: &[usize], min_fraction: f64) -> Result<IntermingleReport> {
    if plane.labels.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let k = plane.k;
    let mut boxes = Vec::new();
    for &s in scales {
        if s == 0 || s > plane.width || s > plane.height {
            return Err(Error::Parameter {
                name: "scale",
                value: s as f64,
                reason: "must lie in 1..=min(width, height)",
            });
        }
        for bj in 0..s {
            let (r0, r1) = split(plane.height, s, bj);
            for bi in 0..s {
                let (c0, c1) = split(plane.width, s, bi);
                let mut counts = vec![0usize; k + 1];
                for r in r0..r1 {
                    for c in c0..c1 {
                        match plane.labels[r * plane.width + c] {
                            Label::Attractor(a) if (1..=k).contains(&a) => counts[a - 1] += 1,
                            _ => counts[k] += 1,
                        }
                    }
                }
                let cells = (r1 - r0) * (c1 - c0);
                let mut present = BTreeSet::new();
                let mut significant = BTreeSet::new();
                for (a, &n) in counts.iter().enumerate() {
                    let label = if a < k { Label::Attractor(a + 1) } else { Label::Unresolved };
                    if n > 0 {
                        present.insert(label);
                    }
                    if a < k && n as f64 >= min_fraction * cells as f64 && n > 0 {
                        significant.insert(label);
                    }
                }
                boxes.push(BoxStats {
                    scale: s,
                    index: (bi, bj),
                    cells,
                    counts,
                    present,
                    significant,
                });
            }
        }
    }
    Ok(IntermingleReport {
        scales: scales.to_vec(),
        min_fraction,
        width: plane.width,
        height: plane.height,
        k,
        boxes,
    })
}
