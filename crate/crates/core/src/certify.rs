//! Validators for the modified maps: the in-torus saddle scan, (M1)-(M5) for
//! `f1`, (R1)/(R3) for `f`, and the volume-hyperbolicity certificate.

use rand::Rng;
use rayon::prelude::*;

use crate::dynamics::{cone_check, sample_in_ball, sample_point, MIN_CONE_GROWTH};
use crate::error::{Error, Result};
use crate::report::{PropertyCheck, PropertyReport, Worst};
use crate::rng::sample_rng;
use crate::scalar::Real;
use crate::surgery::{LayeredMap, Stage};
use crate::torus::{wrap_delta, Point2, Point3};

pub const CONE_APERTURE: f64 = 0.2;
/// Longest return time tried by [`return_search`] inside [`validate_r`].
pub const RETURN_SEARCH_DEPTH: u32 = 7;
const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    /// Derivative along the axis above 1.
    Source,
    /// Attracting along the axis; a saddle within the torus.
    Saddle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisFixedPoint {
    pub s: f64,
    pub derivative: f64,
    pub kind: AxisKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleScan {
    pub hole: usize,
    pub points: Vec<AxisFixedPoint>,
    /// Reason the (M4) picture is not met, if any.
    pub violation: Option<String>,
}

const SCAN_GRID: usize = 4001;

/// Fixed points of the map restricted to the stable axis `{(0, s, 0)}`
/// through hole `i`, `|s| <= eps`. Expects a source at `s = 0` and two
/// saddles outside `B_{eps/2}`.
pub fn scan_saddle_structure<T: Real>(map: &LayeredMap<T>, i: usize) -> Result<SaddleScan> {
    if map.stage != Stage::F1 {
        return Err(Error::Stage("saddle scan", "stage F1"));
    }
    if i >= map.k() {
        return Err(Error::Precondition(format!("hole {i} out of range")));
    }
    let eps = map.eps().expect("F1 has DA parameters");
    let g = |s: f64| map.axis_map(i, T::lit(s)).as_f64() - s;
    let grid: Vec<(f64, f64)> = (0..SCAN_GRID)
        .map(|j| {
            let s = eps * (2.0 * j as f64 / (SCAN_GRID - 1) as f64 - 1.0);
            (s, g(s))
        })
        .collect();
    let mut roots = Vec::new();
    for (j, &(s, v)) in grid.iter().enumerate() {
        if v == 0.0 {
            roots.push(s);
            continue;
        }
        if j == 0 {
            continue;
        }
        let (sp, vp) = grid[j - 1];
        if vp != 0.0 && (vp < 0.0) != (v < 0.0) {
            let (mut lo, mut hi, mut vlo) = (sp, s, vp);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let vm = g(mid);
                if vm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (vm < 0.0) == (vlo < 0.0) {
                    lo = mid;
                    vlo = vm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    let points: Vec<AxisFixedPoint> = roots
        .iter()
        .map(|&s| {
            let d = map.axis_derivative(i, T::lit(s)).as_f64();
            AxisFixedPoint {
                s,
                derivative: d,
                kind: if d.abs() > 1.0 {
                    AxisKind::Source
                } else {
                    AxisKind::Saddle
                },
            }
        })
        .collect();
    let violation = if points.len() != 3 {
        Some(format!("{} fixed points on the axis, expected 3", points.len()))
    } else if points[1].kind != AxisKind::Source || points[1].s.abs() > 1e-9 {
        Some("middle fixed point is not a source at the hole".to_string())
    } else if points[0].kind != AxisKind::Saddle || points[2].kind != AxisKind::Saddle {
        Some("outer fixed points are not saddles".to_string())
    } else if points[0].s.abs() <= eps / 2.0 || points[2].s.abs() <= eps / 2.0 {
        Some("a saddle lies inside B_{eps/2}".to_string())
    } else {
        None
    };
    Ok(SaddleScan {
        hole: i,
        points,
        violation,
    })
}

/// Largest `(u, s, w)`-chart u-leak of the modified map against `f0`, over
/// points sampled within `2 eps` of the holes.
fn u_leak<T: Real>(map: &LayeredMap<T>, samples: usize, seed: u64, stream: u64) -> Worst {
    let eps = map.eps().unwrap_or(0.02);
    (0..samples)
        .into_par_iter()
        .map(|n| {
            let mut rng = sample_rng(seed, stream, n as u64);
            let hole = map.holes[rng.gen_range(0..map.k())].anchor;
            let p = sample_in_ball(&hole, 2.0 * eps, &mut rng);
            let q0 = map.skew.apply(&p);
            let q1 = map.apply(&p);
            let d = q1.delta(&q0);
            let ch = &map.holes[map.nearest_hole(q0.t)].chart;
            let u = ch.from_delta(d)[0].abs().as_f64();
            // the Jacobian must keep span(v_s, e_t) as well
            let fj = map.frame_jacobian(&map.apply_jac(&p).1);
            let leak = fj[0][1].abs().max(fj[0][2].abs()).as_f64();
            let mut w = Worst::new();
            w.push(TOL - u.max(leak), p.coords().map(|v| v.as_f64()));
            w
        })
        .reduce(Worst::new, Worst::merge)
}

/// Length along `v_u` lines needed to meet `W^s(x, 2 eps) x S^1`, maximised
/// over sampled pairs: an empirical value for the constant `L` of (M3)(a).
pub fn estimate_crossing_length<T: Real>(map: &LayeredMap<T>, pairs: usize, seed: u64) -> f64 {
    let eps = map.eps().unwrap_or(0.02);
    let base = &map.skew.base;
    let vu = [base.v_u[0].as_f64(), base.v_u[1].as_f64()];
    let vs = [base.v_s[0].as_f64(), base.v_s[1].as_f64()];
    let det = vu[0] * vs[1] - vs[0] * vu[1];
    const L_MAX: f64 = 400.0;
    (0..pairs)
        .into_par_iter()
        .map(|n| {
            let mut rng = sample_rng(seed, 0x1e57, n as u64);
            let x: [f64; 2] = [rng.gen(), rng.gen()];
            let y: [f64; 2] = [rng.gen(), rng.gen()];
            let d0 = [x[0] - y[0], x[1] - y[1]];
            let mut best = f64::INFINITY;
            let r1 = (L_MAX * vu[0].abs()).ceil() as i64 + 2;
            let r2 = (L_MAX * vu[1].abs()).ceil() as i64 + 2;
            for n1 in -r1..=r1 {
                for n2 in -r2..=r2 {
                    let d = [d0[0] + n1 as f64, d0[1] + n2 as f64];
                    let a = (d[0] * vs[1] - vs[0] * d[1]) / det;
                    let b = (vu[0] * d[1] - d[0] * vu[1]) / det;
                    if a >= 0.0 && a < best && b.abs() <= 2.0 * eps {
                        best = a;
                    }
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Shortest cone-tangent curve joining `t_i + eps` to `t_{i+1} - eps`.
pub fn joining_length(k: usize, eps: f64, aperture: f64) -> f64 {
    (1.0 / k as f64 - 2.0 * eps) * (1.0 + aperture * aperture).sqrt() / aperture
}

/// Random search for a larger value of `f` around `start`; candidates must
/// satisfy `keep`.
fn refine_max<T: Real, F, K>(start: Point3<T>, value: f64, scale: f64, seed: u64, f: F, keep: K) -> (Point3<T>, f64)
where
    F: Fn(&Point3<T>) -> f64,
    K: Fn(&Point3<T>) -> bool,
{
    let mut rng = sample_rng(seed, 0x7e, 0);
    let (mut best, mut bv) = (start, value);
    let rounds = 600;
    for r in 0..rounds {
        let s = scale * 10f64.powf(-3.0 * r as f64 / rounds as f64);
        let d = [0, 1, 2].map(|_| T::lit(rng.gen_range(-s..s)));
        let c = best.offset(d);
        if !keep(&c) {
            continue;
        }
        let v = f(&c);
        if v > bv {
            best = c;
            bv = v;
        }
    }
    (best, bv)
}

/// `(sup inside any zeta-ball, sup outside all zeta-balls)` of the cs-area
/// Jacobian, with witnesses, from sampling plus local refinement.
pub fn area_extremes<T: Real>(map: &LayeredMap<T>, samples: usize, seed: u64) -> ((f64, [f64; 3]), (f64, [f64; 3])) {
    let zeta = map.zeta().unwrap_or(0.0);
    let eps = map.eps().unwrap_or(0.0);
    let inside = |p: &Point3<T>| zeta > 0.0 && map.hole_distance(p).1.as_f64() < zeta;
    let area = |p: &Point3<T>| map.cs_area(&map.apply_jac(p).1).as_f64();
    type Best<T> = (f64, Option<Point3<T>>);
    let pick = |a: Best<T>, b: Best<T>| -> Best<T> {
        match (a.1, b.1) {
            (_, None) => a,
            (None, _) => b,
            (Some(pa), Some(pb)) => {
                if b.0 > a.0 || (b.0 == a.0 && pb.coords() < pa.coords()) {
                    b
                } else {
                    a
                }
            }
        }
    };
    let (bi, bo) = (0..samples)
        .into_par_iter()
        .map(|n| {
            let mut rng = sample_rng(seed, 0xa5ea, n as u64);
            let p = match n % 3 {
                0 => sample_point(map, &mut rng, 0.0),
                1 if eps > 0.0 => {
                    let h = map.holes[rng.gen_range(0..map.k())].anchor;
                    sample_in_ball(&h, eps, &mut rng)
                }
                _ if zeta > 0.0 => {
                    let h = map.holes[rng.gen_range(0..map.k())].anchor;
                    sample_in_ball(&h, 1.5 * zeta, &mut rng)
                }
                _ => sample_point(map, &mut rng, 0.0),
            };
            let v = area(&p);
            if inside(&p) {
                ((v, Some(p)), (f64::NEG_INFINITY, None))
            } else {
                ((f64::NEG_INFINITY, None), (v, Some(p)))
            }
        })
        .reduce(
            || ((f64::NEG_INFINITY, None), (f64::NEG_INFINITY, None)),
            |a, b| (pick(a.0, b.0), pick(a.1, b.1)),
        );
    let c3 = |p: &Point3<T>| p.coords().map(|v| v.as_f64());
    let scale = if zeta > 0.0 { zeta / 4.0 } else { 0.01 };
    let inner = match bi.1 {
        Some(p) => {
            let (q, v) = refine_max(p, bi.0, scale, seed, area, inside);
            (v, c3(&q))
        }
        None => (0.0, [f64::NAN; 3]),
    };
    let outer = match bo.1 {
        Some(p) => {
            let (q, v) = refine_max(p, bo.0, scale, seed ^ 1, area, |q| !inside(q));
            (v, c3(&q))
        }
        None => (f64::NAN, [f64::NAN; 3]),
    };
    (inner, outer)
}

/// Sampled check of (M1)-(M5) for `f1`.
pub fn validate_m<T: Real>(map: &LayeredMap<T>, samples: usize, seed: u64) -> Result<PropertyReport> {
    if map.stage != Stage::F1 {
        return Err(Error::Stage("validate_M", "stage F1"));
    }
    let eps = map.eps().expect("F1 has DA parameters");
    let k = map.k();
    let pr = &map.skew.profile;
    let mut report = PropertyReport::default();

    // M1: the deformation moves points along v_s only
    let m1 = u_leak(map, samples, seed, 0x31);
    report
        .checks
        .push(PropertyCheck::new("M1", m1.margin).with_witness(m1.at));

    // M2: tori invariant; dynamics over the hole fibers unchanged
    let f0 = map.at_stage(Stage::F0)?;
    let m2 = (0..samples)
        .into_par_iter()
        .map(|n| {
            let mut rng = sample_rng(seed, 0x32, n as u64);
            let i = rng.gen_range(0..k);
            let ti = pr.circle(i);
            let x = if rng.gen_bool(0.5) {
                Point2::new(T::lit(rng.gen()), T::lit(rng.gen()))
            } else {
                let h = map.holes[i].anchor;
                sample_in_ball(&h, eps, &mut rng).base
            };
            let mut w = Worst::new();
            let img = map.apply(&Point3 { base: x, t: ti });
            let err = wrap_delta(img.t - ti).abs().as_f64();
            w.push(TOL - err, [x.x1.as_f64(), x.x2.as_f64(), ti.as_f64()]);
            let fiber = Point3 {
                base: map.holes[i].anchor.base,
                t: T::lit(rng.gen()),
            };
            let a = map.apply(&fiber);
            let b = f0.apply(&fiber);
            let err = crate::torus::torus_distance(&a, &b).as_f64();
            w.push(TOL - err, fiber.coords().map(|v| v.as_f64()));
            w
        })
        .reduce(Worst::new, Worst::merge);
    report
        .checks
        .push(PropertyCheck::new("M2", m2.margin).with_witness(m2.at));

    // M3: cone growth; invariance and the (a)/(b) lengths are reported
    let cone = cone_check(map, samples, CONE_APERTURE, seed ^ 0x33)?;
    let l_est = estimate_crossing_length(map, 256, seed);
    let join = joining_length(k, eps, CONE_APERTURE);
    let mut c3 = PropertyCheck::new("M3", cone.worst_growth - MIN_CONE_GROWTH)
        .with_witness(cone.growth_witness)
        .observe("worst_growth", cone.worst_growth)
        .observe("worst_image_aperture", cone.worst_aperture)
        .observe("L_est", l_est)
        .observe("joining_length", join)
        .detail(format!(
            "cone of aperture {CONE_APERTURE} {} on samples; L_est {} joining length",
            if cone.invariant() { "invariant" } else { "not invariant" },
            if l_est <= join { "<=" } else { ">" }
        ));
    c3.pass = cone.growth_pass(MIN_CONE_GROWTH);
    report.checks.push(c3);

    // M4: axis scan through every hole
    let scans: Vec<SaddleScan> = (0..k)
        .map(|i| scan_saddle_structure(map, i))
        .collect::<Result<_>>()?;
    let bad: Vec<String> = scans
        .iter()
        .filter_map(|s| s.violation.as_ref().map(|v| format!("hole {}: {v}", s.hole)))
        .collect();
    let min_saddle = scans
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|p| p.kind == AxisKind::Saddle)
        .map(|p| p.s.abs())
        .fold(f64::INFINITY, f64::min);
    let source = scans[0]
        .points
        .iter()
        .find(|p| p.kind == AxisKind::Source)
        .map(|p| p.derivative)
        .unwrap_or(f64::NAN);
    let mut c4 = PropertyCheck::new("M4", min_saddle - eps / 2.0)
        .observe("source_derivative", source)
        .observe("min_saddle_distance", min_saddle)
        .detail(bad.join("; "));
    c4.pass = bad.is_empty();
    report.checks.push(c4);

    // M5: area contraction outside the zeta-balls
    let ((inside, _), (outside, wo)) = area_extremes(map, samples, seed);
    let c5 = PropertyCheck::new("M5", 0.5 - outside)
        .with_witness(Some(wo))
        .observe("outside_factor", outside)
        .observe("one_plus_xi", inside.max(outside));
    report.checks.push(c5);

    Ok(report)
}

/// Longest stay in a `zeta`-ball over a grid of starts filling each ball.
pub fn residence_search<T: Real>(map: &LayeredMap<T>, grid: usize, max_iters: usize) -> Option<(usize, [f64; 3])> {
    let zeta = map.zeta()?;
    let zt = T::lit(zeta);
    let lin = |j: usize| zeta * (2.0 * j as f64 / (grid - 1).max(1) as f64 - 1.0);
    (0..map.k() * grid * grid * grid)
        .into_par_iter()
        .filter_map(|idx| {
            let (i, r) = (idx / (grid * grid * grid), idx % (grid * grid * grid));
            let d = [lin(r / (grid * grid)), lin(r / grid % grid), lin(r % grid)];
            let p = map.holes[i].anchor.offset(d.map(T::lit));
            if map.hole_distance(&p).1 >= zt {
                return None;
            }
            let mut x = p;
            let mut run = 1;
            while run < max_iters {
                x = map.apply(&x);
                if map.hole_distance(&x).1 >= zt {
                    break;
                }
                run += 1;
            }
            Some((run, p.coords().map(|v| v.as_f64())))
        })
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
}

/// Shortest observed gap between leaving a `zeta`-ball and re-entering one,
/// from orbits aimed at lattice translates lying near the unstable line
/// through each hole, for return times up to `n_max`.
pub fn return_search<T: Real>(map: &LayeredMap<T>, n_max: u32) -> Option<(usize, [f64; 3])> {
    let zeta = map.zeta()?;
    let zt = T::lit(zeta);
    let base = &map.skew.base;
    let vu = [base.v_u[0].as_f64(), base.v_u[1].as_f64()];
    let vs = [base.v_s[0].as_f64(), base.v_s[1].as_f64()];
    let lu = base.lambda_u.as_f64();
    let slope = vu[1] / vu[0];
    let mut cands = Vec::new();
    for n in 2..=n_max {
        let reach = lu.powi(n as i32) * zeta;
        let m1max = (reach * vu[0].abs()).ceil() as i64 + 1;
        for m1 in -m1max..=m1max {
            let c2 = (m1 as f64 * slope).round() as i64;
            for m2 in c2 - 1..=c2 + 1 {
                let m = [m1 as f64, m2 as f64];
                let c = m[0] * vu[0] + m[1] * vu[1];
                let perp = (m[0] - c * vu[0]).hypot(m[1] - c * vu[1]);
                if (m1, m2) != (0, 0) && perp < 2.0 * zeta && c.abs() < reach {
                    cands.push((n, c / lu.powi(n as i32)));
                }
            }
        }
    }
    const GRID: usize = 9;
    let lin = |j: usize| 2.0 * j as f64 / (GRID - 1) as f64 - 1.0;
    (0..map.k() * cands.len())
        .into_par_iter()
        .filter_map(|idx| {
            let (i, (n, du)) = (idx / cands.len(), cands[idx % cands.len()]);
            let anchor = map.holes[i].anchor;
            let mut best: Option<(usize, [f64; 3])> = None;
            for a in 0..GRID {
                for b in 0..GRID {
                    for g in 0..GRID {
                        let u = du * (1.0 + 0.05 * lin(a));
                        let s = zeta * lin(b);
                        let d = [u * vu[0] + s * vs[0], u * vu[1] + s * vs[1], zeta * lin(g)];
                        let p = anchor.offset(d.map(T::lit));
                        if map.hole_distance(&p).1 >= zt {
                            continue;
                        }
                        let mut x = p;
                        let mut gap: Option<usize> = None;
                        for _ in 0..n + 4 {
                            x = map.apply(&x);
                            let inside = map.hole_distance(&x).1 < zt;
                            match (gap, inside) {
                                (None, false) => gap = Some(1),
                                (Some(gp), false) => gap = Some(gp + 1),
                                (Some(gp), true) => {
                                    let w = p.coords().map(|v| v.as_f64());
                                    if best.map_or(true, |(bg, bw)| gp < bg || (gp == bg && w < bw)) {
                                        best = Some((gp, w));
                                    }
                                    break;
                                }
                                (None, true) => {}
                            }
                        }
                    }
                }
            }
            best
        })
        .reduce_with(|a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeReport {
    pub checks: PropertyReport,
    pub starts_per_hole: usize,
    pub max_iters: usize,
    /// Largest number of steps to leave `B_{eps/2}` over all starts.
    pub max_escape: usize,
    /// Longest consecutive stay in a `zeta`-ball.
    pub n0: usize,
    /// Shortest gap between leaving a `zeta`-ball and entering any one,
    /// the same ball included.
    pub n1: usize,
    /// No re-entry was observed, so `n1` is the horizon.
    pub n1_censored: bool,
    /// Start of the shortest aimed return, if one was found.
    pub n1_witness: Option<[f64; 3]>,
    /// Shortest sampled gap between leaving one ball and entering a
    /// different one; `None` if never observed.
    pub n1_distinct: Option<usize>,
}

/// (R1) re-checked on `f` and (R3) escape from every `B_{eps/2}(r0_i)`.
/// Orbits run `max_iters` steps, which also provides the residence and gap
/// statistics `N0`, `N1` of the certificate.
pub fn validate_r<T: Real>(map: &LayeredMap<T>, samples: usize, seed: u64, max_iters: usize) -> Result<EscapeReport> {
    if map.stage != Stage::F {
        return Err(Error::Stage("validate_R", "stage F"));
    }
    let eps = map.eps().expect("F has DA parameters");
    let zeta = T::lit(map.zeta().expect("F has DA parameters"));
    let half = T::lit(eps / 2.0);
    let k = map.k();
    let mut checks = PropertyReport::default();

    let leak = u_leak(map, samples, seed, 0x41);
    let cone = cone_check(map, samples, CONE_APERTURE, seed ^ 0x42)?;
    let mut r1 = PropertyCheck::new("R1", leak.margin.min(cone.worst_growth - MIN_CONE_GROWTH))
        .with_witness(leak.at)
        .observe("u_leak_margin", leak.margin)
        .observe("worst_growth", cone.worst_growth)
        .observe("worst_image_aperture", cone.worst_aperture);
    r1.pass = leak.margin >= 0.0 && cone.growth_pass(MIN_CONE_GROWTH);
    checks.checks.push(r1);

    #[derive(Clone, Copy)]
    struct Acc {
        escape: usize,
        stuck: Option<[f64; 3]>,
        stuck_count: usize,
        n0: usize,
        n1: usize,
        n1_distinct: usize,
    }
    let merge = |a: Acc, b: Acc| Acc {
        escape: a.escape.max(b.escape),
        stuck: match (a.stuck, b.stuck) {
            (Some(x), Some(y)) => Some(if y < x { y } else { x }),
            (x, y) => x.or(y),
        },
        stuck_count: a.stuck_count + b.stuck_count,
        n0: a.n0.max(b.n0),
        n1: a.n1.min(b.n1),
        n1_distinct: a.n1_distinct.min(b.n1_distinct),
    };
    let id = || Acc {
        escape: 0,
        stuck: None,
        stuck_count: 0,
        n0: 0,
        n1: usize::MAX,
        n1_distinct: usize::MAX,
    };
    let acc = (0..k * samples)
        .into_par_iter()
        .map(|n| {
            let i = n / samples;
            let mut rng = sample_rng(seed, 0x43, n as u64);
            let hole = map.holes[i].anchor;
            let p0 = sample_in_ball(&hole, eps / 2.0, &mut rng);
            let mut x = p0;
            let mut escaped = None;
            let mut run = 0usize;
            let mut n0 = 0usize;
            let mut n1 = usize::MAX;
            let mut n1_distinct = usize::MAX;
            let mut gap: Option<usize> = None;
            let (mut ball, d0) = map.hole_distance(&x);
            let mut inside = d0 < zeta;
            if inside {
                run = 1;
            }
            for step in 1..=max_iters {
                x = map.apply(&x);
                if escaped.is_none() {
                    let d = x.delta(&hole);
                    if (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() >= half {
                        escaped = Some(step);
                    }
                }
                let (j, dj) = map.hole_distance(&x);
                let now = dj < zeta;
                match (inside, now) {
                    (true, true) => run += 1,
                    (true, false) => {
                        n0 = n0.max(run);
                        gap = Some(0);
                    }
                    (false, true) => {
                        if let Some(g) = gap {
                            n1 = n1.min(g);
                            if j != ball {
                                n1_distinct = n1_distinct.min(g);
                            }
                        }
                        run = 1;
                        ball = j;
                    }
                    (false, false) => {}
                }
                if !now {
                    if let Some(g) = gap.as_mut() {
                        *g += 1;
                    }
                }
                inside = now;
            }
            if inside {
                n0 = n0.max(run);
            }
            Acc {
                escape: escaped.unwrap_or(0),
                stuck: if escaped.is_none() {
                    Some(p0.coords().map(|v| v.as_f64()))
                } else {
                    None
                },
                stuck_count: escaped.is_none() as usize,
                n0,
                n1,
                n1_distinct,
            }
        })
        .reduce(id, merge);
    let aimed = return_search(map, RETURN_SEARCH_DEPTH);
    let resident = residence_search(map, 25, max_iters);
    let n0 = resident.map_or(acc.n0, |(r, _)| r.max(acc.n0));
    let sampled = acc.n1;
    let n1_min = aimed.map_or(sampled, |(g, _)| g.min(sampled));
    let n1_censored = n1_min == usize::MAX;
    let n1 = if n1_censored { max_iters } else { n1_min };
    let mut r3 = PropertyCheck::new("R3", if acc.stuck_count == 0 { 1.0 } else { -(acc.stuck_count as f64) })
        .with_witness(acc.stuck)
        .observe("max_escape", acc.escape as f64)
        .observe("N0", n0 as f64)
        .observe("N1", n1 as f64)
        .observe("N1_sampled", if sampled == usize::MAX { f64::INFINITY } else { sampled as f64 })
        .observe(
            "N1_distinct",
            if acc.n1_distinct == usize::MAX { f64::INFINITY } else { acc.n1_distinct as f64 },
        );
    if acc.stuck_count > 0 {
        r3 = r3.detail(format!("{} starts did not leave B_eps/2 within {max_iters} steps", acc.stuck_count));
    }
    r3.pass = acc.stuck_count == 0;
    checks.checks.push(r3);
    Ok(EscapeReport {
        checks,
        starts_per_hole: samples,
        max_iters,
        max_escape: acc.escape,
        n0,
        n1,
        n1_censored,
        n1_witness: aimed.map(|a| a.1),
        n1_distinct: (acc.n1_distinct != usize::MAX).then_some(acc.n1_distinct),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub n0: usize,
    pub n1: usize,
    /// `1 + xi`: sup of the cs-area Jacobian.
    pub max_dilatation: f64,
    /// Sup of the cs-area Jacobian outside every `zeta`-ball.
    pub outside_factor: f64,
    pub product: f64,
    pub pass: bool,
}

impl CertificateReport {
    /// `pass` iff `(1 + xi)^N0 * outside^N1 < 1` and `outside <= 1/2`.
    pub fn compose(n0: usize, n1: usize, max_dilatation: f64, outside_factor: f64) -> Self {
        let product = max_dilatation.powi(n0 as i32) * outside_factor.powi(n1 as i32);
        Self {
            n0,
            n1,
            max_dilatation,
            outside_factor,
            product,
            pass: product < 1.0 && outside_factor <= 0.5,
        }
    }
}

/// Measures `1 + xi` and the outside factor and composes them with the
/// residence and gap counts from [`validate_r`].
pub fn volume_certificate<T: Real>(map: &LayeredMap<T>, escape: &EscapeReport, samples: usize, seed: u64) -> CertificateReport {
    let ((inside, _), (outside, _)) = area_extremes(map, samples, seed);
    let dil = if inside.is_finite() { inside.max(outside) } else { outside };
    CertificateReport::compose(escape.n0, escape.n1, dil, outside)
}
