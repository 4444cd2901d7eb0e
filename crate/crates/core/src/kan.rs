//! The glued-Kan skew product `f0(x, t) = (A x, phi_x(t))`.
//!
//! On the interval `[t_i, t_{i+1}]`, with `tau = k (t - t_i)`, the fiber map is
//! `phi_x(t) = t + Delta(x, t)` where
//!
//! ```text
//! Delta = mu_L(tau) [(e^{G_i} - 1)(t - t_i) + c b0_i (t - t_i)^2]
//!       + mu_R(tau) [(e^{G_{i+1}} - 1)(t - t_{i+1}) + c b0_{i+1} (t - t_{i+1})^2]
//!       + mu_M(tau) U_i
//! ```
//!
//! and `b0_i = beta(x - r0_i)`. The quadratic term with coefficient
//! `c = saddle_node` leaves every circle derivative unchanged; it makes the
//! fiber over `r0_i` a genuine saddle-node (drift upward on both sides)
//! instead of a segment of fixed points.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Mat3;
use crate::report::{PropertyCheck, PropertyReport, Worst};
use crate::rng::sample_rng;
use crate::scalar::Real;
use crate::smooth::{bump, ramp};
use crate::torus::{wrap, AnosovBase, Point2, Point3};

/// Ramp endpoints (in `tau`) of the three interpolation windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Windows {
    /// `mu_L = 1 - ramp(left)`.
    pub left: (f64, f64),
    /// `mu_M = ramp(mid_in) * (1 - ramp(mid_out))`.
    pub mid_in: (f64, f64),
    pub mid_out: (f64, f64),
    /// `mu_R = ramp(right)`.
    pub right: (f64, f64),
}

impl Default for Windows {
    fn default() -> Self {
        Self {
            left: (0.25, 0.4),
            mid_in: (0.2, 0.35),
            mid_out: (0.65, 0.8),
            right: (0.6, 0.75),
        }
    }
}

impl Windows {
    fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| 0.0 < lo && lo < hi && hi < 1.0;
        let all = [self.left, self.mid_in, self.mid_out, self.right];
        if !all.iter().all(|&w| ok(w))
            || self.mid_in.1 > self.mid_out.0
            // every tau in (0, 1) must lie under some window
            || self.mid_in.0 >= self.left.1
            || self.right.0 >= self.mid_out.1
        {
            return Err(Error::Parameter {
                name: "windows",
                value: self.left.1,
                reason: "windows must be ordered and cover (0, 1)",
            });
        }
        Ok(())
    }
}

/// Construction parameters for [`FiberProfile`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileParams {
    pub k: usize,
    /// Indices into the sorted fixed-point list: `a0, a1, b0, b1, b2`.
    pub specials: [usize; 5],
    pub nu: f64,
    pub g_plus: f64,
    pub u_plus: f64,
    pub rho_b: f64,
    pub saddle_node: f64,
    pub windows: Windows,
}

impl Default for ProfileParams {
    fn default() -> Self {
        Self {
            k: 6,
            specials: [0, 1, 2, 3, 4],
            nu: 0.1,
            g_plus: 0.05,
            u_plus: 0.002,
            rho_b: 0.04,
            saddle_node: 0.5,
            windows: Windows::default(),
        }
    }
}

/// Everything defining the fiber maps. Centres are stored once; the
/// per-circle roles follow from `i mod 2` and `i mod 3`.
#[derive(Debug, Clone)]
pub struct FiberProfile<T> {
    pub k: usize,
    pub specials: [usize; 5],
    /// `[a0, a1, b0, b1, b2]`.
    pub centers: [Point2<T>; 5],
    pub nu: T,
    pub g_plus: T,
    pub u_plus: T,
    pub rho_b: T,
    pub saddle_node: T,
    pub windows: Windows,
    win: [(T, T); 4],
    exp_neg_nu: T,
    kf: T,
}

/// Index into `centers` of p̂^i.
#[inline(always)]
pub fn p_index(i: usize) -> usize {
    i % 2
}
#[inline(always)]
pub fn q_index(i: usize) -> usize {
    (i + 1) % 2
}
#[inline(always)]
pub fn r1_index(i: usize) -> usize {
    2 + i % 3
}
#[inline(always)]
pub fn r0_index(i: usize) -> usize {
    2 + (i + 2) % 3
}
#[inline(always)]
pub fn rm1_index(i: usize) -> usize {
    2 + (i + 1) % 3
}

#[derive(Clone, Copy)]
struct Bumps<T> {
    v: [T; 5],
    g: [[T; 2]; 5],
}

pub fn make_profile<T: Real>(base: &AnosovBase<T>, p: &ProfileParams) -> Result<FiberProfile<T>> {
    if p.k == 0 || p.k % 6 != 0 {
        return Err(Error::CircleCount(p.k));
    }
    let n = base.fixed_pts.len();
    for &s in &p.specials {
        if s >= n {
            return Err(Error::SpecialIndex(s, n));
        }
    }
    for i in 0..5 {
        for j in i + 1..5 {
            if p.specials[i] == p.specials[j] {
                return Err(Error::DuplicateSpecial(p.specials[i], p.specials[j]));
            }
        }
    }
    for (name, v) in [
        ("nu", p.nu),
        ("g_plus", p.g_plus),
        ("u_plus", p.u_plus),
        ("rho_b", p.rho_b),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Parameter {
                name,
                value: v,
                reason: "must be positive",
            });
        }
    }
    if !(p.saddle_node >= 0.0 && p.saddle_node.is_finite()) {
        return Err(Error::Parameter {
            name: "saddle_node",
            value: p.saddle_node,
            reason: "must be non-negative",
        });
    }
    if p.g_plus > p.nu / 2.0 {
        return Err(Error::GPlus {
            g_plus: p.g_plus,
            limit: p.nu / 2.0,
        });
    }
    p.windows.validate()?;
    let centers = p.specials.map(|s| base.fixed_pts[s]);
    let limit = min_special_distance(&centers).as_f64() / 2.0;
    if p.rho_b >= limit {
        return Err(Error::BumpRadius {
            rho_b: p.rho_b,
            limit,
        });
    }
    let w = p.windows;
    let lit = |(a, b): (f64, f64)| (T::lit(a), T::lit(b));
    Ok(FiberProfile {
        k: p.k,
        specials: p.specials,
        centers,
        nu: T::lit(p.nu),
        g_plus: T::lit(p.g_plus),
        u_plus: T::lit(p.u_plus),
        rho_b: T::lit(p.rho_b),
        saddle_node: T::lit(p.saddle_node),
        windows: w,
        win: [lit(w.left), lit(w.mid_in), lit(w.mid_out), lit(w.right)],
        exp_neg_nu: (-T::lit(p.nu)).exp(),
        kf: T::from_i(p.k as i64),
    })
}

pub fn min_special_distance<T: Real>(centers: &[Point2<T>]) -> T {
    let mut best = T::infinity();
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            best = best.min(centers[i].dist(&centers[j]));
        }
    }
    best
}

impl<T: Real> FiberProfile<T> {
    /// `t_i = i / k`; `circle(k) = 1`.
    #[inline(always)]
    pub fn circle(&self, i: usize) -> T {
        T::from_i(i as i64) / self.kf
    }

    pub fn p_hat(&self, i: usize) -> Point2<T> {
        self.centers[p_index(i % self.k)]
    }
    pub fn q_hat(&self, i: usize) -> Point2<T> {
        self.centers[q_index(i % self.k)]
    }
    pub fn r_hat(&self, i: usize, j: i32) -> Point2<T> {
        let i = i % self.k;
        match j {
            -1 => self.centers[rm1_index(i)],
            0 => self.centers[r0_index(i)],
            _ => self.centers[r1_index(i)],
        }
    }

    /// Interval containing `t ∈ [0, 1)`.
    #[inline(always)]
    pub fn interval(&self, t: T) -> usize {
        let i = (t * self.kf).floor().to_usize().unwrap_or(0);
        i.min(self.k - 1)
    }

    #[inline(always)]
    fn bumps<const J: bool>(&self, x: &Point2<T>) -> Bumps<T> {
        let z = T::zero();
        let mut out = Bumps {
            v: [z; 5],
            g: [[z; 2]; 5],
        };
        let r2 = self.rho_b * self.rho_b;
        for (c, center) in self.centers.iter().enumerate() {
            let d = x.delta(center);
            let d2 = d[0] * d[0] + d[1] * d[1];
            if d2 < r2 {
                let (b, g) = bump(d2, self.rho_b);
                out.v[c] = b;
                if J {
                    out.g[c] = [g * d[0], g * d[1]];
                }
            }
        }
        out
    }

    /// `(G_i, grad G_i, e^{G_i})`.
    #[inline(always)]
    fn g_from(&self, i: usize, b: &Bumps<T>) -> (T, [T; 2], T) {
        let (p, r1, r0) = (p_index(i), r1_index(i), r0_index(i));
        let z = T::zero();
        if b.v[p] == z && b.v[r1] == z && b.v[r0] == z {
            return (-self.nu, [z, z], self.exp_neg_nu);
        }
        let hi = self.nu + self.g_plus;
        let g = -self.nu + hi * (b.v[p] + b.v[r1]) + self.nu * b.v[r0];
        let grad = [
            hi * (b.g[p][0] + b.g[r1][0]) + self.nu * b.g[r0][0],
            hi * (b.g[p][1] + b.g[r1][1]) + self.nu * b.g[r0][1],
        ];
        (g, grad, g.exp())
    }

    #[inline(always)]
    fn u_from(&self, i: usize, b: &Bumps<T>) -> (T, [T; 2]) {
        let (p, q, r1, r0) = (p_index(i), q_index(i), r1_index(i), r0_index(i));
        let u = self.u_plus * (b.v[p] + b.v[r0] + b.v[r1] - b.v[q]);
        let grad = [
            self.u_plus * (b.g[p][0] + b.g[r0][0] + b.g[r1][0] - b.g[q][0]),
            self.u_plus * (b.g[p][1] + b.g[r0][1] + b.g[r1][1] - b.g[q][1]),
        ];
        (u, grad)
    }

    /// Log-derivative field `G_i(x)`; the fiber derivative at `t_i` is `e^{G_i(x)}`.
    pub fn field_g(&self, i: usize, x: &Point2<T>) -> T {
        self.g_from(i % self.k, &self.bumps::<false>(x)).0
    }

    /// Mid-interval drift `U_i(x)`.
    pub fn field_u(&self, i: usize, x: &Point2<T>) -> T {
        self.u_from(i % self.k, &self.bumps::<false>(x)).0
    }

    /// `Delta(x, t)` and, when `J`, its gradient `(d/dx1, d/dx2, d/dt)`.
    #[inline(always)]
    fn eval<const J: bool>(&self, x: &Point2<T>, t: T) -> (T, [T; 3]) {
        let z = T::zero();
        let one = T::one();
        let two = T::lit(2.0);
        let i = self.interval(t);
        let h = t - self.circle(i);
        let hr = t - self.circle(i + 1);
        let tau = self.kf * h;
        let [wl, wmi, wmo, wr] = self.win;

        let (rl, drl) = ramp(tau, wl.0, wl.1);
        let (mu_r, dmu_r) = ramp(tau, wr.0, wr.1);
        let (m1, dm1) = ramp(tau, wmi.0, wmi.1);
        let (m2, dm2) = ramp(tau, wmo.0, wmo.1);
        let mu_l = one - rl;
        let mu_m = m1 * (one - m2);

        let b = self.bumps::<J>(x);
        let mut d = z;
        let mut g = [z; 3];

        if mu_l > z {
            let (_, grad, e) = self.g_from(i, &b);
            let r0 = r0_index(i);
            let sn = self.saddle_node * b.v[r0];
            let a = e - one;
            let inner = a * h + sn * h * h;
            d = d + mu_l * inner;
            if J {
                let dmu = -drl * self.kf;
                g[2] = g[2] + dmu * inner + mu_l * (a + two * sn * h);
                for c in 0..2 {
                    g[c] = g[c]
                        + mu_l * (e * grad[c] * h + self.saddle_node * b.g[r0][c] * h * h);
                }
            }
        }
        if mu_r > z {
            let j = (i + 1) % self.k;
            let (_, grad, e) = self.g_from(j, &b);
            let r0 = r0_index(j);
            let sn = self.saddle_node * b.v[r0];
            let a = e - one;
            let inner = a * hr + sn * hr * hr;
            d = d + mu_r * inner;
            if J {
                let dmu = dmu_r * self.kf;
                g[2] = g[2] + dmu * inner + mu_r * (a + two * sn * hr);
                for c in 0..2 {
                    g[c] = g[c]
                        + mu_r * (e * grad[c] * hr + self.saddle_node * b.g[r0][c] * hr * hr);
                }
            }
        }
        if mu_m > z {
            let (u, grad) = self.u_from(i, &b);
            d = d + mu_m * u;
            if J {
                let dmu = (dm1 * (one - m2) - m1 * dm2) * self.kf;
                g[2] = g[2] + dmu * u;
                g[0] = g[0] + mu_m * grad[0];
                g[1] = g[1] + mu_m * grad[1];
            }
        }
        (d, g)
    }

    /// Fiber displacement `Delta(x, t)` without derivatives.
    #[inline]
    pub fn delta(&self, x: &Point2<T>, t: T) -> T {
        self.eval::<false>(x, t).0
    }

    /// `Delta(x, t)` with its gradient `(d/dx1, d/dx2, d/dt)`.
    #[inline]
    pub fn delta_jac(&self, x: &Point2<T>, t: T) -> (T, [T; 3]) {
        self.eval::<true>(x, t)
    }
}

/// `f0`: the base map together with a validated fiber profile.
#[derive(Debug, Clone)]
pub struct SkewMap<T> {
    pub base: AnosovBase<T>,
    pub profile: FiberProfile<T>,
}

pub const DEFAULT_SAMPLES: usize = 10_000;
const VALIDATION_SEED: u64 = 0x5eed;

impl<T: Real> SkewMap<T> {
    /// Builds the map and runs [`validate_p`] at the default budget.
    pub fn new(base: AnosovBase<T>, profile: FiberProfile<T>) -> Result<Self> {
        let map = Self::new_unchecked(base, profile);
        let report = validate_p(&map, DEFAULT_SAMPLES, VALIDATION_SEED)?;
        if let Some(c) = report.failures().next() {
            return Err(Error::Property {
                property: c.name.clone(),
                detail: format!("margin {:.3e} at {:?}", c.margin, c.witness),
            });
        }
        Ok(map)
    }

    /// Skips validation; for exploring parameters that break the properties.
    pub fn new_unchecked(base: AnosovBase<T>, profile: FiberProfile<T>) -> Self {
        Self { base, profile }
    }

    #[inline]
    pub fn apply(&self, p: &Point3<T>) -> Point3<T> {
        let d = self.profile.delta(&p.base, p.t);
        Point3 {
            base: self.base.apply(&p.base),
            t: wrap(p.t + d),
        }
    }

    pub fn apply_jac(&self, p: &Point3<T>) -> (Point3<T>, Mat3<T>) {
        let (d, g) = self.profile.delta_jac(&p.base, p.t);
        let m = self.base.matrix();
        let z = T::zero();
        let jac = [
            [m[0][0], m[0][1], z],
            [m[1][0], m[1][1], z],
            [g[0], g[1], T::one() + g[2]],
        ];
        (
            Point3 {
                base: self.base.apply(&p.base),
                t: wrap(p.t + d),
            },
            jac,
        )
    }

    /// `log phi_x'(t)`.
    pub fn log_fiber_derivative(&self, x: &Point2<T>, t: T) -> T {
        (T::one() + self.profile.delta_jac(x, t).1[2]).ln()
    }
}

pub fn apply_f0<T: Real>(map: &SkewMap<T>, p: &Point3<T>, want_jacobian: bool) -> (Point3<T>, Option<Mat3<T>>) {
    if want_jacobian {
        let (q, j) = map.apply_jac(p);
        (q, Some(j))
    } else {
        (map.apply(p), None)
    }
}

fn f3<T: Real>(x: &Point2<T>, t: T) -> [f64; 3] {
    [x.x1.as_f64(), x.x2.as_f64(), t.as_f64()]
}

/// Uniform base point half of the time, otherwise a point within `1.2 rho_b`
/// of a random special centre, so bump interiors are well covered.
fn sample_base<T: Real, R: Rng>(profile: &FiberProfile<T>, rng: &mut R) -> Point2<T> {
    if rng.gen_bool(0.5) {
        Point2::new(T::lit(rng.gen()), T::lit(rng.gen()))
    } else {
        let c = profile.centers[rng.gen_range(0..5)];
        let r = 1.2 * profile.rho_b.as_f64() * rng.gen::<f64>().sqrt();
        let a = std::f64::consts::TAU * rng.gen::<f64>();
        Point2::new(c.x1 + T::lit(r * a.cos()), c.x2 + T::lit(r * a.sin()))
    }
}

const TOL: f64 = 1e-12;

/// Sampled check of (P1)-(P5). Each property gets `samples` draws; the report
/// carries the worst margin and the point where it occurred.
pub fn validate_p<T: Real>(map: &SkewMap<T>, samples: usize, seed: u64) -> Result<PropertyReport> {
    if samples < 1000 {
        return Err(Error::Precondition(format!(
            "validate_P needs at least 1000 samples, got {samples}"
        )));
    }
    let pr = &map.profile;
    let k = pr.k;
    let mut report = PropertyReport::default();

    // P1: every torus t = t_i is invariant
    let p1 = (0..samples)
        .into_par_iter()
        .map(|n| {
            let mut rng = sample_rng(seed, 1, n as u64);
            let x = sample_base(pr, &mut rng);
            let mut w = Worst::new();
            for i in 0..k {
                let ti = pr.circle(i);
                let img = map.apply(&Point3 { base: x, t: ti });
                let err = crate::torus::wrap_delta(img.t - ti).abs().as_f64();
                w.push(TOL - err, f3(&x, ti));
            }
            w
        })
        .reduce(Worst::new, Worst::merge);
    report
        .checks
        .push(PropertyCheck::new("P1", p1.margin).with_witness(p1.at));

    // P2: 1/2 < phi' < 3/2
    let (p2, lo, hi) = (0..samples)
        .into_par_iter()
        .map(|n| {
            let mut rng = sample_rng(seed, 2, n as u64);
            let x = sample_base(pr, &mut rng);
            let t = T::lit(rng.gen());
            let d = 1.0 + pr.delta_jac(&x, t).1[2].as_f64();
            let mut w = Worst::new();
            w.push((d - 0.5).min(1.5 - d), f3(&x, t));
            (w, d, d)
        })
        .reduce(
            || (Worst::new(), f64::INFINITY, f64::NEG_INFINITY),
            |a, b| (a.0.merge(b.0), a.1.min(b.1), a.2.max(b.2)),
        );
    let mut c2 = PropertyCheck::new("P2", p2.margin)
        .with_witness(p2.at)
        .observe("min", lo)
        .observe("max", hi);
    c2.pass = p2.margin > 0.0;
    report.checks.push(c2);

    // P3: sign pattern of log phi' at the named points of each circle
    let mut p3 = Worst::new();
    for i in 0..k {
        let ti = pr.circle(i);
        let lg = |x: Point2<T>| map.log_fiber_derivative(&x, ti).as_f64();
        for (x, sign) in [
            (pr.p_hat(i), 1.0),
            (pr.r_hat(i, 1), 1.0),
            (pr.q_hat(i), -1.0),
            (pr.r_hat(i, -1), -1.0),
        ] {
            p3.push(sign * lg(x), f3(&x, ti));
        }
        let x = pr.r_hat(i, 0);
        p3.push(TOL - lg(x).abs(), f3(&x, ti));
    }
    let mut c3 = PropertyCheck::new("P3", p3.margin).with_witness(p3.at);
    c3.pass = p3.margin > 0.0;
    report.checks.push(c3);

    // P4: monotone connections over the fixed special fibers
    let p4 = (0..samples)
        .into_par_iter()
        .map(|n| {
            let mut rng = sample_rng(seed, 4, n as u64);
            let s: f64 = match n % 3 {
                0 => rng.gen_range(1e-9..1.0 - 1e-9),
                1 => 10f64.powf(-rng.gen_range(1.0..12.0)),
                _ => 1.0 - 10f64.powf(-rng.gen_range(1.0..12.0)),
            };
            let mut w = Worst::new();
            for i in 0..k {
                let t = pr.circle(i) + T::lit(s) / pr.kf;
                for (x, sign) in [
                    (pr.p_hat(i), 1.0),
                    (pr.q_hat(i), -1.0),
                    (pr.r_hat(i, 0), 1.0),
                    (pr.r_hat(i, 1), 1.0),
                ] {
                    w.push(sign * pr.delta(&x, t).as_f64(), f3(&x, t));
                }
            }
            w
        })
        .reduce(Worst::new, Worst::merge);
    let mut c4 = PropertyCheck::new("P4", p4.margin).with_witness(p4.at);
    c4.pass = p4.margin > 0.0;
    report.checks.push(c4);

    // P5: contraction at the circles away from the expanding specials
    let nu = pr.nu.as_f64();
    let rho = pr.rho_b.as_f64();
    let (p5, out_max, in_max) = (0..samples)
        .into_par_iter()
        .map(|n| {
            let mut rng = sample_rng(seed, 5, n as u64);
            let x = sample_base(pr, &mut rng);
            let mut w = Worst::new();
            let (mut om, mut im) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for i in 0..k {
                let ti = pr.circle(i);
                let lg = map.log_fiber_derivative(&x, ti).as_f64();
                let near = [pr.p_hat(i), pr.r_hat(i, 1), pr.r_hat(i, 0)]
                    .iter()
                    .any(|c| x.dist(c).as_f64() < rho);
                if near {
                    im = im.max(lg);
                    w.push(nu / 2.0 - lg, f3(&x, ti));
                } else {
                    om = om.max(lg);
                    w.push(-nu - lg, f3(&x, ti));
                }
            }
            (w, om, im)
        })
        .reduce(
            || (Worst::new(), f64::NEG_INFINITY, f64::NEG_INFINITY),
            |a, b| (a.0.merge(b.0), a.1.max(b.1), a.2.max(b.2)),
        );
    let mut c5 = PropertyCheck::new("P5", p5.margin)
        .with_witness(p5.at)
        .observe("max_log_outside", out_max)
        .observe("max_log_inside", in_max);
    c5.pass = p5.margin >= -TOL;
    report.checks.push(c5);

    Ok(report)
}
