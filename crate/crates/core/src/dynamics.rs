//! Orbits, Lyapunov exponents, cone and area checks, unstable-disk probes and
//! basin classification of single points.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{mat_mul, orthonormalize, orthonormalize2, Mat2, Mat3};
use crate::rng::sample_rng;
use crate::scalar::Real;
use crate::surgery::{LayeredMap, Stage};
use crate::torus::{wrap_delta, Point3};

pub fn iterate_orbit<T: Real>(map: &LayeredMap<T>, p: &Point3<T>, n: usize) -> Point3<T> {
    let mut q = *p;
    for _ in 0..n {
        q = map.apply(&q);
    }
    q
}

/// `n + 1` points starting with `p`.
pub fn orbit<T: Real>(map: &LayeredMap<T>, p: &Point3<T>, n: usize) -> Vec<Point3<T>> {
    let mut out = Vec::with_capacity(n + 1);
    let mut q = *p;
    out.push(q);
    for _ in 0..n {
        q = map.apply(&q);
        out.push(q);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    /// Descending.
    pub exponents: [f64; 3],
    pub stderr: [f64; 3],
    pub iterations: usize,
}

const BATCHES: usize = 20;

fn batch_stats(sums: &[f64], weights: &[usize]) -> (f64, f64) {
    let total: usize = weights.iter().sum();
    let mean = sums.iter().sum::<f64>() / total as f64;
    let b = sums.len();
    if b < 2 {
        return (mean, f64::NAN);
    }
    let var = sums
        .iter()
        .zip(weights)
        .map(|(s, &w)| {
            let m = s / w as f64;
            (m - mean) * (m - mean)
        })
        .sum::<f64>()
        / (b - 1) as f64;
    (mean, (var / b as f64).sqrt())
}

/// Re-orthonormalised product of Jacobians along the orbit of `p`. The
/// starting frame is a random rotation drawn from `seed`; the standard errors
/// come from batch means over 20 consecutive blocks.
pub fn lyapunov_spectrum<T: Real>(
    map: &LayeredMap<T>,
    p: &Point3<T>,
    n: usize,
    reorth_period: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    if reorth_period == 0 || n < 10 * reorth_period {
        return Err(Error::Precondition(format!(
            "need n >= 10 * reorth_period (n = {n}, period = {reorth_period})"
        )));
    }
    let mut rng = sample_rng(seed, 0x1a9, 0);
    let mut q: Mat3<T> = [[T::zero(); 3]; 3];
    for row in q.iter_mut() {
        for v in row.iter_mut() {
            *v = T::lit(rng.gen_range(-1.0..1.0));
        }
    }
    orthonormalize(&mut q);

    let blocks = n / reorth_period;
    let per_batch = blocks.div_ceil(BATCHES);
    let mut sums = vec![[0.0f64; 3]; 0];
    let mut weights = Vec::new();
    let mut x = *p;
    let mut first = true;
    for b in 0..blocks {
        let mut m = q;
        for _ in 0..reorth_period {
            let (nx, j) = map.apply_jac(&x);
            m = mat_mul(&j, &m);
            x = nx;
        }
        if first && m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Overflow(reorth_period));
        }
        first = false;
        let diag = orthonormalize(&mut m);
        q = m;
        if b % per_batch == 0 {
            sums.push([0.0; 3]);
            weights.push(0);
        }
        let last = sums.len() - 1;
        for c in 0..3 {
            sums[last][c] += diag[c].as_f64().ln();
        }
        weights[last] += reorth_period;
    }
    let mut est: Vec<(f64, f64)> = (0..3)
        .map(|c| {
            let s: Vec<f64> = sums.iter().map(|v| v[c]).collect();
            batch_stats(&s, &weights)
        })
        .collect();
    est.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(LyapunovEstimate {
        exponents: [est[0].0, est[1].0, est[2].0],
        stderr: [est[0].1, est[1].1, est[2].1],
        iterations: blocks * reorth_period,
    })
}

/// Block of the frame Jacobian acting on `span(v_s, e_t)`.
pub fn cs_block<T: Real>(map: &LayeredMap<T>, jac: &Mat3<T>) -> Mat2<T> {
    let m = map.frame_jacobian(jac);
    [[m[1][1], m[1][2]], [m[2][1], m[2][2]]]
}

/// The two exponents of the in-plane cocycle along the orbit of `p`,
/// descending, with batch-means standard errors.
pub fn cs_exponents<T: Real>(
    map: &LayeredMap<T>,
    p: &Point3<T>,
    n: usize,
    reorth_period: usize,
) -> Result<([f64; 2], [f64; 2])> {
    if reorth_period == 0 || n < reorth_period {
        return Err(Error::Precondition(format!(
            "need n >= reorth_period >= 1 (n = {n}, period = {reorth_period})"
        )));
    }
    let blocks = n / reorth_period;
    let per_batch = blocks.div_ceil(BATCHES);
    let (o, z) = (T::one(), T::zero());
    let mut q: Mat2<T> = [[o, z], [z, o]];
    let mut sums: Vec<[f64; 2]> = Vec::new();
    let mut weights = Vec::new();
    let mut x = *p;
    for b in 0..blocks {
        let mut m = q;
        for _ in 0..reorth_period {
            let (nx, j) = map.apply_jac(&x);
            let c = cs_block(map, &j);
            m = crate::linalg::mat2_mul(&c, &m);
            x = nx;
        }
        let d = orthonormalize2(&mut m);
        q = m;
        if b % per_batch == 0 {
            sums.push([0.0; 2]);
            weights.push(0);
        }
        let last = sums.len() - 1;
        sums[last][0] += d[0].as_f64().ln();
        sums[last][1] += d[1].as_f64().ln();
        weights[last] += reorth_period;
    }
    let mut e: Vec<(f64, f64)> = (0..2)
        .map(|c| batch_stats(&sums.iter().map(|v| v[c]).collect::<Vec<_>>(), &weights))
        .collect();
    e.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(([e[0].0, e[1].0], [e[0].1, e[1].1]))
}

/// `|det|` of the Jacobian at `p` restricted to `span(v_s, e_t)`.
pub fn cs_area_jacobian<T: Real>(map: &LayeredMap<T>, p: &Point3<T>) -> T {
    map.cs_area(&map.apply_jac(p).1)
}

/// A point drawn uniformly half of the time and otherwise uniformly from the
/// `radius`-ball around a random hole.
pub fn sample_point<T: Real, R: Rng>(map: &LayeredMap<T>, rng: &mut R, radius: f64) -> Point3<T> {
    if radius <= 0.0 || map.holes.is_empty() || rng.gen_bool(0.5) {
        return Point3::new(T::lit(rng.gen()), T::lit(rng.gen()), T::lit(rng.gen()));
    }
    let hole = map.holes[rng.gen_range(0..map.holes.len())].anchor;
    sample_in_ball(&hole, radius, rng)
}

pub fn sample_in_ball<T: Real, R: Rng>(center: &Point3<T>, radius: f64, rng: &mut R) -> Point3<T> {
    loop {
        let d: [f64; 3] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        if d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= 1.0 {
            return center.offset(d.map(|v| T::lit(v * radius)));
        }
    }
}

/// Growth `|J v| / |v|` and image aperture `|cs part| / |v_u part|` of a
/// vector given in frame coordinates.
pub fn cone_image<T: Real>(map: &LayeredMap<T>, frame_jac: &Mat3<T>, v: [f64; 3]) -> (f64, f64) {
    let m = frame_jac;
    let vt = v.map(T::lit);
    let img: [f64; 3] = [0, 1, 2].map(|r| (m[r][0] * vt[0] + m[r][1] * vt[1] + m[r][2] * vt[2]).as_f64());
    let amb = |c: &[f64; 3]| {
        let b = &map.frame;
        let x: Vec<f64> = (0..3)
            .map(|r| {
                b[r][0].as_f64() * c[0] + b[r][1].as_f64() * c[1] + b[r][2].as_f64() * c[2]
            })
            .collect();
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    };
    let growth = amb(&img) / amb(&v);
    // v_s and e_t are orthonormal, so the cs part's length is Euclidean
    let cs = (img[1] * img[1] + img[2] * img[2]).sqrt();
    (growth, cs / img[0].abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeReport {
    pub aperture: f64,
    pub samples: usize,
    pub worst_growth: f64,
    pub growth_witness: Option<[f64; 3]>,
    /// Largest image aperture of a vector on the cone boundary; the cone is
    /// invariant on the samples when this is at most `aperture`.
    pub worst_aperture: f64,
    pub aperture_witness: Option<[f64; 3]>,
    pub growth_failures: usize,
}

impl ConeReport {
    pub fn growth_pass(&self, min_growth: f64) -> bool {
        self.worst_growth >= min_growth
    }

    pub fn invariant(&self) -> bool {
        self.worst_aperture <= self.aperture
    }
}

pub const MIN_CONE_GROWTH: f64 = 3.0;

/// Cone `{a v_u + w : w ∈ span(v_s, e_t), |w| <= aperture |a|}` checked on
/// `samples` points (half of them near holes) and 16 boundary directions each.
pub fn cone_check<T: Real>(map: &LayeredMap<T>, samples: usize, aperture: f64, seed: u64) -> Result<ConeReport> {
    if !(aperture > 0.0 && aperture < 1.0) {
        return Err(Error::Precondition(format!("aperture {aperture} not in (0, 1)")));
    }
    let radius = map.eps().unwrap_or(0.0);
    type Acc = (f64, Option<[f64; 3]>, f64, Option<[f64; 3]>, usize);
    let id: fn() -> Acc = || (f64::INFINITY, None, 0.0, None, 0);
    let acc = (0..samples)
        .into_par_iter()
        .map(|n| {
            let mut rng = sample_rng(seed, 0xc0, n as u64);
            let p = sample_point(map, &mut rng, radius);
            let fj = map.frame_jacobian(&map.apply_jac(&p).1);
            let at = Some(p.coords().map(|v| v.as_f64()));
            let mut a: Acc = (f64::INFINITY, at, 0.0, at, 0);
            for d in 0..16 {
                let th = std::f64::consts::TAU * d as f64 / 16.0;
                let v = [1.0, aperture * th.cos(), aperture * th.sin()];
                let (g, ap) = cone_image(map, &fj, v);
                a.0 = a.0.min(g);
                a.2 = a.2.max(ap);
                if g < MIN_CONE_GROWTH {
                    a.4 = 1;
                }
            }
            a
        })
        .reduce(id, |x, y| {
            let (g, gw) = if y.0 < x.0 { (y.0, y.1) } else { (x.0, x.1) };
            let (ap, aw) = if y.2 > x.2 { (y.2, y.3) } else { (x.2, x.3) };
            (g, gw, ap, aw, x.4 + y.4)
        });
    Ok(ConeReport {
        aperture,
        samples,
        worst_growth: acc.0,
        growth_witness: acc.1,
        worst_aperture: acc.2,
        aperture_witness: acc.3,
        growth_failures: acc.4,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub fraction_negative: f64,
    pub curve_length: f64,
    pub growth_iterations: usize,
    /// Top in-plane exponent per sampled point.
    pub exponents: Vec<f64>,
}

const PROBE_MAX_GROWTH: usize = 60;
const PROBE_SPACING: f64 = 5e-3;

fn polyline_length<T: Real>(pts: &[Point3<T>]) -> f64 {
    pts.windows(2)
        .map(|w| {
            let d = w[1].delta(&w[0]);
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt().as_f64()
        })
        .sum()
}

/// Grows a short `v_u`-segment through `seed_point` by iterating it until its
/// length reaches 1, samples `n_points` on it and returns the fraction whose
/// top in-plane exponent over `n_iters` steps is negative.
pub fn unstable_disk_probe<T: Real>(
    map: &LayeredMap<T>,
    seed_point: &Point3<T>,
    n_points: usize,
    n_iters: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if n_iters == 0 {
        return Err(Error::Precondition("n_iters must be positive".into()));
    }
    if n_points < 100 {
        return Err(Error::Precondition(format!("n_points = {n_points} < 100")));
    }
    let vu = map.skew.base.v_u;
    let len0 = 1e-3;
    let mut pts: Vec<Point3<T>> = (0..=8)
        .map(|j| {
            let s = T::lit(len0 * (j as f64 / 8.0 - 0.5));
            seed_point.offset([s * vu[0], s * vu[1], T::zero()])
        })
        .collect();
    let mut iters = 0;
    let mut length = polyline_length(&pts);
    while length < 1.0 {
        if iters >= PROBE_MAX_GROWTH {
            return Err(Error::CurveTooShort {
                target: 1.0,
                reached: length,
                iters,
            });
        }
        // refine the preimage so images stay resolved
        let mut fine = Vec::with_capacity(pts.len() * 2);
        for w in pts.windows(2) {
            fine.push(w[0]);
            let d = w[1].delta(&w[0]);
            let seg = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt().as_f64();
            let pieces = ((seg * 10.0 / PROBE_SPACING).ceil() as usize).max(1);
            for m in 1..pieces {
                let f = T::lit(m as f64 / pieces as f64);
                fine.push(w[0].offset([d[0] * f, d[1] * f, d[2] * f]));
            }
        }
        fine.push(*pts.last().expect("non-empty"));
        pts = fine.iter().map(|p| map.apply(p)).collect();
        iters += 1;
        length = polyline_length(&pts);
    }
    // arc-length parametrisation
    let mut cum = vec![0.0];
    for w in pts.windows(2) {
        let d = w[1].delta(&w[0]);
        let seg = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt().as_f64();
        cum.push(cum.last().expect("non-empty") + seg);
    }
    let starts: Vec<Point3<T>> = (0..n_points)
        .map(|n| {
            let mut rng = sample_rng(seed, 0xd15c, n as u64);
            let target = rng.gen::<f64>() * length;
            let j = cum.partition_point(|&c| c <= target).clamp(1, pts.len() - 1);
            let f = (target - cum[j - 1]) / (cum[j] - cum[j - 1]).max(f64::MIN_POSITIVE);
            let d = pts[j].delta(&pts[j - 1]);
            pts[j - 1].offset(d.map(|v| v * T::lit(f)))
        })
        .collect();
    let period = n_iters.clamp(1, 20);
    let exponents: Vec<f64> = starts
        .par_iter()
        .map(|p| cs_exponents(map, p, n_iters, period).map(|e| e.0[0]).unwrap_or(f64::NAN))
        .collect();
    let neg = exponents.iter().filter(|&&e| e < 0.0).count();
    Ok(ProbeReport {
        fraction_negative: neg as f64 / n_points as f64,
        curve_length: length,
        growth_iterations: iters,
        exponents,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// 1-based circle index.
    Attractor(usize),
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasinLabel {
    pub tag: Label,
    pub settle_time: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyParams {
    pub n_transient: usize,
    pub window: usize,
    pub majority: f64,
    /// `None` means `1 / (4k)`.
    pub t_tol: Option<f64>,
    pub n_max: usize,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        Self {
            n_transient: 20_000,
            window: 2_000,
            majority: 0.9,
            t_tol: None,
            n_max: 200_000,
        }
    }
}

impl ClassifyParams {
    pub fn tolerance(&self, k: usize) -> f64 {
        self.t_tol.unwrap_or(1.0 / (4.0 * k as f64))
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        let tol = self.tolerance(k);
        if !(tol > 0.0 && tol < 1.0 / (2.0 * k as f64)) {
            return Err(Error::Parameter {
                name: "t_tol",
                value: tol,
                reason: "must lie in (0, 1/(2k))",
            });
        }
        if !(self.majority > 0.5 && self.majority <= 1.0) {
            return Err(Error::Parameter {
                name: "majority",
                value: self.majority,
                reason: "must lie in (0.5, 1]",
            });
        }
        if self.window == 0 {
            return Err(Error::Parameter {
                name: "window",
                value: 0.0,
                reason: "must be positive",
            });
        }
        Ok(())
    }
}

/// Iterates `n_transient` steps, then tests consecutive windows: the label is
/// the first circle holding at least `majority` of a window's points within
/// `t_tol` while outside every hole's `eps`-ball. Deterministic.
pub fn classify_basin<T: Real>(map: &LayeredMap<T>, p: &Point3<T>, params: &ClassifyParams) -> BasinLabel {
    let k = map.k();
    let kf = T::from_i(k as i64);
    let tol = T::lit(params.tolerance(k));
    let eps = if map.stage == Stage::F0 {
        None
    } else {
        map.eps().map(T::lit)
    };
    let need = (params.majority * params.window as f64).ceil() as usize;
    let mut x = *p;
    let mut steps = 0usize;
    for _ in 0..params.n_transient.min(params.n_max) {
        x = map.apply(&x);
    }
    steps += params.n_transient.min(params.n_max);
    let mut counts = vec![0usize; k];
    while steps + params.window <= params.n_max {
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..params.window {
            x = map.apply(&x);
            let c = (x.t * kf).round().to_usize().unwrap_or(0) % k;
            let dt = wrap_delta(x.t - T::from_i(c as i64) / kf).abs();
            if dt <= tol {
                let inside = match eps {
                    Some(e) => map.hole_distance(&x).1 < e,
                    None => false,
                };
                if !inside {
                    counts[c] += 1;
                }
            }
        }
        steps += params.window;
        if let Some((c, _)) = counts.iter().enumerate().find(|(_, &n)| n >= need) {
            return BasinLabel {
                tag: Label::Attractor(c + 1),
                settle_time: steps as u64,
            };
        }
    }
    BasinLabel {
        tag: Label::Unresolved,
        settle_time: steps as u64,
    }
}
