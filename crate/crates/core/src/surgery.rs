//! The two modifications of `f0`: a DA deformation `Psi` around every
//! saddle-node point `r0_i = (b_{i-1}, t_i)` (giving `f1 = Psi ∘ f0`) and a
//! vertical push `rho` (giving `f = rho ∘ f1`).
//!
//! `Psi` acts in the chart `(u, y, w)` of the hole, `y` being the stable
//! coordinate of the image point:
//!
//! ```text
//! y -> y + kappa(rho_c) Sigma(y),   rho_c = sqrt((u / a)^2 + w^2)
//! Sigma(y) = [s0 tanh(y / s0) + h sgn(y) S(|y| / y_c)] (1 - P(|y|))
//! ```
//!
//! `kappa` equals `delta_da` on a thin cylinder around the hole axis, so the
//! hole is a source along `v_s` with derivative `(1 + delta_da) lambda_s`.
//! The step term of height `h` places the two in-torus saddles at a chosen
//! distance `s*` from the hole; `P` is a slow plateau cutoff that keeps the
//! deformation monotone in `y`. The large expansion is confined to
//! `|y| < y_c = lambda_s * core`, whose preimage lies inside the `zeta`-ball.
//!
//! `rho` is the time-one flow of the vertical field `delta * eta * d/dt`,
//! `eta = 1` on `B_inner` and `0` off `B_outer`, integrated by RK4 with the
//! tangent map carried along so the Jacobian is exact for the discrete map.

use std::fmt;

use crate::error::{Error, Result};
use crate::kan::{min_special_distance, r0_index, SkewMap};
use crate::linalg::{identity, mat_mul, Mat3};
use crate::scalar::Real;
use crate::smooth::{plateau_max_slope, plateau_step, ramp, step};
use crate::torus::{Chart, Point2, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    F0,
    F1,
    F,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::F0 => "F0",
            Stage::F1 => "F1",
            Stage::F => "F",
        })
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "F0" | "f0" => Ok(Stage::F0),
            "F1" | "f1" => Ok(Stage::F1),
            "F" | "f" => Ok(Stage::F),
            _ => Err(Error::Precondition(format!("unknown stage {s:?}"))),
        }
    }
}

/// DA deformation data. Lengths are absolute.
#[derive(Debug, Clone, PartialEq)]
pub struct DAParams {
    pub eps: f64,
    pub delta_da: f64,
    /// Scale of the `tanh` core; `None` uses `y_c / 3`.
    pub s0: Option<f64>,
    /// Start and end of the cutoff `P` in `|y|`.
    pub theta_inner: f64,
    pub theta_outer: f64,
    pub zeta: f64,
    /// Stable coordinate of the in-torus saddles.
    pub saddle_s: f64,
    /// Semi-axis ratio `a` of the source cylinder in `u` versus `w`.
    pub aspect: f64,
}

impl DAParams {
    pub fn with_eps(eps: f64) -> Self {
        Self {
            eps,
            delta_da: 12.0,
            s0: None,
            theta_inner: 0.1 * eps,
            theta_outer: 0.8 * eps,
            zeta: eps / 8.0,
            saddle_s: 0.54 * eps,
            aspect: 3.0,
        }
    }
}

impl Default for DAParams {
    fn default() -> Self {
        Self::with_eps(0.02)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushParams {
    pub delta: f64,
    pub inner: f64,
    pub outer: f64,
}

impl PushParams {
    pub fn with_eps(eps: f64) -> Self {
        Self {
            delta: eps / 8.0,
            inner: eps / 4.0,
            outer: eps / 2.0,
        }
    }
}

impl Default for PushParams {
    fn default() -> Self {
        Self::with_eps(0.02)
    }
}

/// Quantities derived from [`DAParams`] at construction.
#[derive(Debug, Clone, Copy)]
pub struct DaDerived {
    pub core: f64,
    pub y_c: f64,
    pub s0: f64,
    pub h_amp: f64,
    /// `1 - delta_da (s0 + h) max P'`; lower bound of `1 + dD/dy`.
    pub margin: f64,
    /// Largest ambient distance from the hole reached by the support.
    pub support_radius: f64,
    pub source_derivative: f64,
}

const CUTOFF_ETA: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
struct DaEval<T> {
    delta: T,
    core: T,
    core_lo: T,
    aspect: T,
    u_max: T,
    y_c: T,
    s0: T,
    h: T,
    c_in: T,
    c_out: T,
    eta: T,
}

#[derive(Debug, Clone, Copy)]
struct PushEval<T> {
    delta: T,
    inner: T,
    outer: T,
}

#[derive(Debug, Clone, Copy)]
pub struct Hole<T> {
    pub anchor: Point3<T>,
    pub chart: Chart<T>,
}

/// `f0`, `f1` or `f`, evaluated with exact Jacobians.
#[derive(Debug, Clone)]
pub struct LayeredMap<T> {
    pub stage: Stage,
    pub skew: SkewMap<T>,
    pub da: Option<DAParams>,
    pub push: Option<PushParams>,
    pub derived: Option<DaDerived>,
    pub holes: Vec<Hole<T>>,
    /// Columns `(v_u, 0)`, `(v_s, 0)`, `e_t`.
    pub frame: Mat3<T>,
    pub frame_inv: Mat3<T>,
    da_eval: Option<DaEval<T>>,
    push_eval: Option<PushEval<T>>,
}

fn check_da(skew_lambda_s: f64, k: usize, centers_min: f64, da: &DAParams, vu_dot_vs: f64) -> Result<DaDerived> {
    let eps = da.eps;
    let limit = (1.0 / (2.0 * k as f64)).min(centers_min / 2.0);
    if !(eps > 0.0 && eps < limit) {
        return Err(Error::Parameter {
            name: "eps",
            value: eps,
            reason: "must lie in (0, min(1/(2k), half the minimum special-point distance))",
        });
    }
    let source = (1.0 + da.delta_da) * skew_lambda_s;
    if !(source > 1.0) {
        return Err(Error::NotASource(source));
    }
    if !(da.zeta > 0.0 && da.zeta <= eps / 8.0) {
        return Err(Error::Parameter {
            name: "zeta",
            value: da.zeta,
            reason: "must lie in (0, eps/8]",
        });
    }
    if !(da.aspect >= 1.0) {
        return Err(Error::Parameter {
            name: "aspect",
            value: da.aspect,
            reason: "must be at least 1",
        });
    }
    if !(da.saddle_s > eps / 2.0 && da.saddle_s < eps) {
        return Err(Error::Parameter {
            name: "saddle_s",
            value: da.saddle_s,
            reason: "saddles must lie in (eps/2, eps)",
        });
    }
    if !(0.0 < da.theta_inner && da.theta_inner < da.theta_outer) {
        return Err(Error::Parameter {
            name: "theta_inner",
            value: da.theta_inner,
            reason: "cutoff needs 0 < theta_inner < theta_outer",
        });
    }
    let core = 0.95 * da.zeta / 2f64.sqrt();
    let y_c = skew_lambda_s * core;
    let s0 = da.s0.unwrap_or(y_c / 3.0);
    if !(s0 > 0.0) {
        return Err(Error::Parameter {
            name: "s0",
            value: s0,
            reason: "must be positive",
        });
    }
    let y_star = skew_lambda_s * da.saddle_s;
    if !(y_star >= y_c && y_star <= da.theta_inner) {
        return Err(Error::Parameter {
            name: "saddle_s",
            value: da.saddle_s,
            reason: "image of the saddle must lie between y_c and theta_inner",
        });
    }
    let h_amp = (1.0 - skew_lambda_s) * da.saddle_s / da.delta_da - s0 * (y_star / s0).tanh();
    if h_amp < 0.0 {
        return Err(Error::Parameter {
            name: "delta_da",
            value: da.delta_da,
            reason: "too large to place the saddles at saddle_s with this s0",
        });
    }
    let p_max = plateau_max_slope(da.theta_inner, da.theta_outer, CUTOFF_ETA);
    let margin = 1.0 - da.delta_da * (s0 + h_amp) * p_max;
    if margin < 0.1 {
        return Err(Error::DiffeoMargin(margin));
    }
    // widest ambient extent of the box |u| <= a core, |y| <= c_out, |w| <= core
    let (uu, yy, ww) = (da.aspect * core, da.theta_outer, core);
    let support_radius = (uu * uu + yy * yy + 2.0 * uu * yy * vu_dot_vs.abs() + ww * ww).sqrt();
    if support_radius >= eps {
        return Err(Error::Overlap(format!(
            "DA support reaches distance {support_radius:.6} from the hole, eps = {eps}"
        )));
    }
    Ok(DaDerived {
        core,
        y_c,
        s0,
        h_amp,
        margin,
        support_radius,
        source_derivative: source,
    })
}

fn check_push(push: &PushParams, eps: f64) -> Result<()> {
    if !(push.delta > 0.0 && push.delta <= eps / 4.0) {
        return Err(Error::Parameter {
            name: "delta",
            value: push.delta,
            reason: "must lie in (0, eps/4]",
        });
    }
    if !(push.inner > 0.0 && push.inner < push.outer && push.outer <= eps / 2.0) {
        return Err(Error::Parameter {
            name: "push_outer",
            value: push.outer,
            reason: "need 0 < inner < outer <= eps/2",
        });
    }
    Ok(())
}

/// Builds the map for `stage`. `F1` needs `da`; `F` needs `da` and `push`.
pub fn make_layered<T: Real>(
    skew: SkewMap<T>,
    da: Option<DAParams>,
    push: Option<PushParams>,
    stage: Stage,
) -> Result<LayeredMap<T>> {
    LayeredMap::new(skew, da, push, stage)
}

impl<T: Real> LayeredMap<T> {
    pub fn new(skew: SkewMap<T>, da: Option<DAParams>, push: Option<PushParams>, stage: Stage) -> Result<Self> {
        if stage >= Stage::F1 && da.is_none() {
            return Err(Error::Stage("F1", "DA parameters"));
        }
        if stage == Stage::F && push.is_none() {
            return Err(Error::Stage("F", "push parameters"));
        }
        let base = &skew.base;
        let pr = &skew.profile;
        let holes: Vec<Hole<T>> = (0..pr.k)
            .map(|i| {
                let anchor = Point3 {
                    base: pr.centers[r0_index(i)],
                    t: pr.circle(i),
                };
                Hole {
                    anchor,
                    chart: Chart::for_base(anchor, base),
                }
            })
            .collect();
        let frame = holes[0].chart.basis();
        let frame_inv = holes[0].chart.basis_inv();
        let vu_dot_vs =
            (base.v_u[0] * base.v_s[0] + base.v_u[1] * base.v_s[1]).as_f64();

        let mut derived = None;
        let mut da_eval = None;
        if let Some(d) = &da {
            let centers_min = min_special_distance(&pr.centers).as_f64();
            let dd = check_da(base.lambda_s.as_f64().abs(), pr.k, centers_min, d, vu_dot_vs)?;
            // hole eps-balls must avoid the bumps centred at the other specials
            let rho_b = pr.rho_b.as_f64();
            for i in 0..pr.k {
                let hole = pr.centers[r0_index(i)];
                for (c, center) in pr.centers.iter().enumerate() {
                    if c == r0_index(i) {
                        continue;
                    }
                    let dist = hole.dist(center).as_f64();
                    if dist < d.eps + rho_b {
                        return Err(Error::Overlap(format!(
                            "eps-ball of hole {i} meets the bump of special point {c} \
                             (distance {dist:.6} < eps + rho_b)"
                        )));
                    }
                }
            }
            da_eval = Some(DaEval {
                delta: T::lit(d.delta_da),
                core: T::lit(dd.core),
                core_lo: T::lit(dd.core / 2.0),
                aspect: T::lit(d.aspect),
                u_max: T::lit(d.aspect * dd.core),
                y_c: T::lit(dd.y_c),
                s0: T::lit(dd.s0),
                h: T::lit(dd.h_amp),
                c_in: T::lit(d.theta_inner),
                c_out: T::lit(d.theta_outer),
                eta: T::lit(CUTOFF_ETA),
            });
            derived = Some(dd);
        }
        let mut push_eval = None;
        if let Some(p) = &push {
            let eps = da.as_ref().map(|d| d.eps).ok_or(Error::Stage("F", "DA parameters"))?;
            check_push(p, eps)?;
            push_eval = Some(PushEval {
                delta: T::lit(p.delta),
                inner: T::lit(p.inner),
                outer: T::lit(p.outer),
            });
        }
        Ok(Self {
            stage,
            skew,
            da,
            push,
            derived,
            holes,
            frame,
            frame_inv,
            da_eval,
            push_eval,
        })
    }

    /// Same data, different stage.
    pub fn at_stage(&self, stage: Stage) -> Result<Self> {
        Self::new(self.skew.clone(), self.da.clone(), self.push.clone(), stage)
    }

    pub fn k(&self) -> usize {
        self.skew.profile.k
    }

    pub fn eps(&self) -> Option<f64> {
        self.da.as_ref().map(|d| d.eps)
    }

    pub fn zeta(&self) -> Option<f64> {
        self.da.as_ref().map(|d| d.zeta)
    }

    /// Index of the hole on the circle nearest to `t`.
    #[inline(always)]
    pub fn nearest_hole(&self, t: T) -> usize {
        let k = self.k();
        let i = (t * T::from_i(k as i64)).round().to_usize().unwrap_or(0);
        i % k
    }

    /// `(hole index, ambient distance)` for the nearest hole.
    #[inline]
    pub fn hole_distance(&self, p: &Point3<T>) -> (usize, T) {
        let i = self.nearest_hole(p.t);
        let d = p.delta(&self.holes[i].anchor);
        (i, (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt())
    }

    #[inline]
    fn sigma(&self, e: &DaEval<T>, y: T) -> (T, T) {
        let one = T::one();
        let ay = y.abs();
        if ay >= e.c_out {
            return (T::zero(), T::zero());
        }
        let sg = if y < T::zero() { -one } else { one };
        let th = (y / e.s0).tanh();
        let (sv, sd) = step(ay / e.y_c);
        let v = e.s0 * th + e.h * sg * sv;
        let d = (one - th * th) + e.h * sd / e.y_c;
        if ay <= e.c_in {
            return (v, d);
        }
        let (p, pd) = plateau_step(ay, e.c_in, e.c_out, e.eta);
        (v * (one - p), d * (one - p) - v * pd * sg)
    }

    /// `Psi` at an image point; the Jacobian is `None` where `Psi` is the identity.
    #[inline]
    fn psi<const J: bool>(&self, q: Point3<T>) -> (Point3<T>, Option<Mat3<T>>) {
        let e = match &self.da_eval {
            Some(e) => e,
            None => return (q, None),
        };
        let hole = &self.holes[self.nearest_hole(q.t)];
        let [u, y, w] = hole.chart.coords(&q);
        if y.abs() >= e.c_out || w.abs() >= e.core || u.abs() >= e.u_max {
            return (q, None);
        }
        let ua = u / e.aspect;
        let rc2 = ua * ua + w * w;
        if rc2 >= e.core * e.core {
            return (q, None);
        }
        let rc = rc2.sqrt();
        let (r, rd) = ramp(rc, e.core_lo, e.core);
        let kappa = e.delta * (T::one() - r);
        let (s, sd) = self.sigma(e, y);
        let d = kappa * s;
        let vs = hole.chart.s_axis;
        let out = q.offset([d * vs[0], d * vs[1], T::zero()]);
        if !J {
            return (out, None);
        }
        let dk = -e.delta * rd;
        let (du, dw) = if rc > T::zero() && dk != T::zero() {
            (dk * (ua / e.aspect) / rc * s, dk * (w / rc) * s)
        } else {
            (T::zero(), T::zero())
        };
        let grad = [du, kappa * sd, dw];
        let bi = &self.frame_inv;
        let mut g = [T::zero(); 3];
        for (j, gj) in g.iter_mut().enumerate() {
            *gj = grad[0] * bi[0][j] + grad[1] * bi[1][j] + grad[2] * bi[2][j];
        }
        let mut jac = identity::<T>();
        for j in 0..3 {
            jac[0][j] = jac[0][j] + vs[0] * g[j];
            jac[1][j] = jac[1][j] + vs[1] * g[j];
        }
        (out, Some(jac))
    }

    /// `eta` and its ambient gradient at `(x, t)` for hole `i`.
    #[inline]
    fn eta(&self, e: &PushEval<T>, i: usize, x: &Point2<T>, t: T) -> (T, [T; 3]) {
        let z = T::zero();
        let d = Point3 { base: *x, t }.delta(&self.holes[i].anchor);
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        if r2 >= e.outer * e.outer {
            return (z, [z; 3]);
        }
        if r2 <= e.inner * e.inner {
            return (T::one(), [z; 3]);
        }
        let r = r2.sqrt();
        let (v, dv) = ramp(r, e.inner, e.outer);
        let c = -dv / r;
        (T::one() - v, [c * d[0], c * d[1], c * d[2]])
    }

    /// Time-one map of `delta * eta * d/dt`, RK4 with 8 substeps.
    #[inline]
    fn push_flow<const J: bool>(&self, p: Point3<T>) -> (Point3<T>, Option<Mat3<T>>) {
        let e = match &self.push_eval {
            Some(e) => e,
            None => return (p, None),
        };
        let i = self.nearest_hole(p.t);
        let d = p.delta(&self.holes[i].anchor);
        if d[0] * d[0] + d[1] * d[1] + d[2] * d[2] >= e.outer * e.outer {
            return (p, None);
        }
        const STEPS: usize = 8;
        let h = T::one() / T::from_i(STEPS as i64);
        let half = h / T::lit(2.0);
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        let x = p.base;
        let mut t = p.t;
        // derivative of t with respect to (x1, x2, t0)
        let mut dt = [T::zero(), T::zero(), T::one()];
        let field = |ts: T, dts: &[T; 3]| -> (T, [T; 3]) {
            let (v, g) = self.eta(e, i, &x, crate::torus::wrap(ts));
            let k = e.delta * v;
            if !J {
                return (k, [T::zero(); 3]);
            }
            (
                k,
                [
                    e.delta * (g[0] + g[2] * dts[0]),
                    e.delta * (g[1] + g[2] * dts[1]),
                    e.delta * g[2] * dts[2],
                ],
            )
        };
        let axpy = |a: &[T; 3], s: T, b: &[T; 3]| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
        for _ in 0..STEPS {
            let (k1, d1) = field(t, &dt);
            let (k2, d2) = field(t + half * k1, &axpy(&dt, half, &d1));
            let (k3, d3) = field(t + half * k2, &axpy(&dt, half, &d2));
            let (k4, d4) = field(t + h * k3, &axpy(&dt, h, &d3));
            t = t + sixth * (k1 + two * k2 + two * k3 + k4);
            if J {
                for c in 0..3 {
                    dt[c] = dt[c] + sixth * (d1[c] + two * d2[c] + two * d3[c] + d4[c]);
                }
            }
        }
        let out = Point3 {
            base: x,
            t: crate::torus::wrap(t),
        };
        if !J {
            return (out, None);
        }
        let mut jac = identity::<T>();
        jac[2] = dt;
        (out, Some(jac))
    }

    /// The map at its stage, without derivatives.
    #[inline]
    pub fn apply(&self, p: &Point3<T>) -> Point3<T> {
        let q = self.skew.apply(p);
        match self.stage {
            Stage::F0 => q,
            Stage::F1 => self.psi::<false>(q).0,
            Stage::F => self.push_flow::<false>(self.psi::<false>(q).0).0,
        }
    }

    /// The map with its exact Jacobian.
    pub fn apply_jac(&self, p: &Point3<T>) -> (Point3<T>, Mat3<T>) {
        let (q, mut jac) = self.skew.apply_jac(p);
        if self.stage == Stage::F0 {
            return (q, jac);
        }
        let (q, jp) = self.psi::<true>(q);
        if let Some(jp) = jp {
            jac = mat_mul(&jp, &jac);
        }
        if self.stage == Stage::F1 {
            return (q, jac);
        }
        let (q, jr) = self.push_flow::<true>(q);
        if let Some(jr) = jr {
            jac = mat_mul(&jr, &jac);
        }
        (q, jac)
    }

    /// Jacobian in the frame `(v_u, v_s, e_t)`.
    pub fn frame_jacobian(&self, jac: &Mat3<T>) -> Mat3<T> {
        mat_mul(&self.frame_inv, &mat_mul(jac, &self.frame))
    }

    /// `|det|` of the Jacobian restricted to `span(v_s, e_t)`.
    pub fn cs_area(&self, jac: &Mat3<T>) -> T {
        let m = self.frame_jacobian(jac);
        (m[1][1] * m[2][2] - m[1][2] * m[2][1]).abs()
    }

    /// The in-torus first-return of the stable axis through hole `i` is the
    /// map itself (the axis is invariant); returns the image `s`.
    pub fn axis_map(&self, i: usize, s: T) -> T {
        let hole = &self.holes[i];
        let p = hole.chart.from_local(T::zero(), s, T::zero());
        hole.chart.coords(&self.apply(&p))[1]
    }

    /// Derivative of [`axis_map`](Self::axis_map).
    pub fn axis_derivative(&self, i: usize, s: T) -> T {
        let hole = &self.holes[i];
        let p = hole.chart.from_local(T::zero(), s, T::zero());
        self.frame_jacobian(&self.apply_jac(&p).1)[1][1]
    }
}

pub fn apply_stage<T: Real>(map: &LayeredMap<T>, p: &Point3<T>, want_jacobian: bool) -> (Point3<T>, Option<Mat3<T>>) {
    if want_jacobian {
        let (q, j) = map.apply_jac(p);
        (q, Some(j))
    } else {
        (map.apply(p), None)
    }
}
