//! Geometry of the 2- and 3-torus, the linear Anosov base map and local
//! `(u, s, w)` charts adapted to its eigenframe.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::Mat3;
use crate::scalar::Real;

/// Reduces `x` into `[0, 1)`.
///
/// Seam rule: `x - floor(x)` is computed in floating point; when that rounds
/// to exactly `1.0` (e.g. for tiny negative inputs, or `1 - 1e-17` which is
/// already `1.0` as a double) the result is `0.0`.
#[inline(always)]
pub fn wrap<T: Real>(x: T) -> T {
    let r = x - x.floor();
    if r >= T::one() {
        T::zero()
    } else {
        r
    }
}

/// Shortest signed representative of a circle displacement, in `[-1/2, 1/2]`.
#[inline(always)]
pub fn wrap_delta<T: Real>(d: T) -> T {
    d - d.round()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2<T> {
    pub x1: T,
    pub x2: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x1: T, x2: T) -> Self {
        Self {
            x1: wrap(x1),
            x2: wrap(x2),
        }
    }

    /// Signed displacement `self - other` through the shortest deck translate.
    #[inline(always)]
    pub fn delta(&self, other: &Self) -> [T; 2] {
        [wrap_delta(self.x1 - other.x1), wrap_delta(self.x2 - other.x2)]
    }

    #[inline(always)]
    pub fn dist2(&self, other: &Self) -> T {
        let [a, b] = self.delta(other);
        a * a + b * b
    }

    pub fn dist(&self, other: &Self) -> T {
        self.dist2(other).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3<T> {
    pub base: Point2<T>,
    pub t: T,
}

impl<T: Real> Point3<T> {
    /// Builds a point, reducing every coordinate mod 1.
    pub fn new(x1: T, x2: T, t: T) -> Self {
        Self {
            base: Point2::new(x1, x2),
            t: wrap(t),
        }
    }

    pub fn coords(&self) -> [T; 3] {
        [self.base.x1, self.base.x2, self.t]
    }

    #[inline(always)]
    pub fn delta(&self, other: &Self) -> [T; 3] {
        let [a, b] = self.base.delta(&other.base);
        [a, b, wrap_delta(self.t - other.t)]
    }

    /// Adds an ambient displacement and reduces.
    pub fn offset(&self, d: [T; 3]) -> Self {
        Self::new(self.base.x1 + d[0], self.base.x2 + d[1], self.t + d[2])
    }
}

/// Reduces all three coordinates to `[0, 1)`; rejects NaN and infinities.
pub fn normalize<T: Real>(x1: T, x2: T, t: T) -> Result<Point3<T>> {
    for v in [x1, x2, t] {
        if !v.is_finite() {
            return Err(Error::NonFinite(v.as_f64()));
        }
    }
    Ok(Point3::new(x1, x2, t))
}

/// Minimum Euclidean distance over deck translates.
pub fn torus_distance<T: Real>(p: &Point3<T>, q: &Point3<T>) -> T {
    let [a, b, c] = p.delta(q);
    (a * a + b * b + c * c).sqrt()
}

/// A point of the 2-torus with rational coordinates `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint {
    pub num: [i64; 2],
    pub den: i64,
}

impl LatticePoint {
    pub fn to_point<T: Real>(self) -> Point2<T> {
        let d = T::from_i(self.den);
        Point2::new(T::from_i(self.num[0]) / d, T::from_i(self.num[1]) / d)
    }
}

/// Fixed points of `x -> A x mod 1`, enumerated exactly.
///
/// Fixed points are the classes `p = (A - I)^{-1} n`, `n ∈ Z²`; with
/// `D = det(A - I)` these are `adj(A - I) n / D`. Integer vectors `n` over a
/// `|D| x |D|` box cover every class, duplicates are removed exactly and the
/// result is sorted lexicographically.
pub fn enumerate_fixed_points(a: i64, b: i64, c: i64, d: i64) -> Result<Vec<LatticePoint>> {
    let (m00, m01, m10, m11) = (a - 1, b, c, d - 1);
    let det = m00 * m11 - m01 * m10;
    if det == 0 {
        return Err(Error::DegenerateFixedPoints);
    }
    let den = det.abs();
    let sign = det.signum();
    let mut out = BTreeSet::new();
    for n1 in 0..den {
        for n2 in 0..den {
            let p1 = (m11 * n1 - m01 * n2) * sign;
            let p2 = (-m10 * n1 + m00 * n2) * sign;
            out.insert(LatticePoint {
                num: [p1.rem_euclid(den), p2.rem_euclid(den)],
                den,
            });
        }
    }
    Ok(out.into_iter().collect())
}

/// The hyperbolic matrix `A ∈ SL(2, Z)` with its eigenframe and fixed points.
#[derive(Debug, Clone)]
pub struct AnosovBase<T> {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    /// Expanding eigenvalue (signed; `|lambda_u| > 5`).
    pub lambda_u: T,
    pub lambda_s: T,
    pub v_u: [T; 2],
    pub v_s: [T; 2],
    pub fixed_exact: Vec<LatticePoint>,
    pub fixed_pts: Vec<Point2<T>>,
}

fn eigenvector<T: Real>(a: i64, b: i64, c: i64, d: i64, lambda: T) -> [T; 2] {
    let c1 = [T::from_i(b), lambda - T::from_i(a)];
    let c2 = [lambda - T::from_i(d), T::from_i(c)];
    let n1 = (c1[0] * c1[0] + c1[1] * c1[1]).sqrt();
    let n2 = (c2[0] * c2[0] + c2[1] * c2[1]).sqrt();
    let (v, n) = if n1 >= n2 { (c1, n1) } else { (c2, n2) };
    let s = if v[0] < T::zero() || (v[0] == T::zero() && v[1] < T::zero()) {
        -T::one()
    } else {
        T::one()
    };
    [s * v[0] / n, s * v[1] / n]
}

impl<T: Real> AnosovBase<T> {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = a * d - b * c;
        if det != 1 {
            return Err(Error::Determinant(det));
        }
        let tr = a + d;
        let disc = tr * tr - 4;
        if disc <= 0 {
            return Err(Error::WeakExpansion((tr as f64 / 2.0).abs()));
        }
        let trf = T::from_i(tr);
        let root = T::from_i(disc).sqrt();
        let two = T::lit(2.0);
        let lambda_u = if tr > 0 {
            (trf + root) / two
        } else {
            (trf - root) / two
        };
        if lambda_u.abs() <= T::lit(5.0) {
            return Err(Error::WeakExpansion(lambda_u.abs().as_f64()));
        }
        let lambda_s = lambda_u.recip();
        let fixed_exact = enumerate_fixed_points(a, b, c, d)?;
        if fixed_exact.len() < 5 {
            return Err(Error::TooFewFixedPoints(fixed_exact.len()));
        }
        let fixed_pts = fixed_exact.iter().map(|p| p.to_point()).collect();
        Ok(Self {
            a,
            b,
            c,
            d,
            lambda_u,
            lambda_s,
            v_u: eigenvector(a, b, c, d, lambda_u),
            v_s: eigenvector(a, b, c, d, lambda_s),
            fixed_exact,
            fixed_pts,
        })
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    #[inline(always)]
    pub fn apply(&self, x: &Point2<T>) -> Point2<T> {
        let (a, b, c, d) = (
            T::from_i(self.a),
            T::from_i(self.b),
            T::from_i(self.c),
            T::from_i(self.d),
        );
        Point2::new(a * x.x1 + b * x.x2, c * x.x1 + d * x.x2)
    }

    pub fn matrix(&self) -> [[T; 2]; 2] {
        [
            [T::from_i(self.a), T::from_i(self.b)],
            [T::from_i(self.c), T::from_i(self.d)],
        ]
    }

    /// Splits a base vector into its `v_u` and `v_s` components.
    #[inline]
    pub fn split(&self, v: [T; 2]) -> (T, T) {
        let det = self.v_u[0] * self.v_s[1] - self.v_s[0] * self.v_u[1];
        let u = (v[0] * self.v_s[1] - self.v_s[0] * v[1]) / det;
        let s = (self.v_u[0] * v[1] - v[0] * self.v_u[1]) / det;
        (u, s)
    }
}

pub fn apply_base<T: Real>(base: &AnosovBase<T>, x: &Point2<T>) -> Point2<T> {
    base.apply(x)
}

pub fn base_fixed_points<T: Real>(base: &AnosovBase<T>) -> Vec<Point2<T>> {
    base.fixed_pts.clone()
}

/// Local affine coordinates `(u, s, w)` around an anchor: base displacement
/// in the `(v_u, v_s)` frame, fiber displacement `w`. The frame is not
/// orthogonal; decomposition solves the 2x2 system.
#[derive(Debug, Clone, Copy)]
pub struct Chart<T> {
    pub anchor: Point3<T>,
    pub u_axis: [T; 2],
    pub s_axis: [T; 2],
    inv: [[T; 2]; 2],
}

pub const CHART_RADIUS: f64 = 0.25;

impl<T: Real> Chart<T> {
    pub fn new(anchor: Point3<T>, u_axis: [T; 2], s_axis: [T; 2]) -> Self {
        let det = u_axis[0] * s_axis[1] - s_axis[0] * u_axis[1];
        let inv = [
            [s_axis[1] / det, -s_axis[0] / det],
            [-u_axis[1] / det, u_axis[0] / det],
        ];
        Self {
            anchor,
            u_axis,
            s_axis,
            inv,
        }
    }

    pub fn for_base(anchor: Point3<T>, base: &AnosovBase<T>) -> Self {
        Self::new(anchor, base.v_u, base.v_s)
    }

    /// Chart coordinates of a raw displacement from the anchor.
    #[inline(always)]
    pub fn from_delta(&self, d: [T; 3]) -> [T; 3] {
        [
            self.inv[0][0] * d[0] + self.inv[0][1] * d[1],
            self.inv[1][0] * d[0] + self.inv[1][1] * d[1],
            d[2],
        ]
    }

    /// Coordinates without the radius check.
    #[inline(always)]
    pub fn coords(&self, p: &Point3<T>) -> [T; 3] {
        self.from_delta(p.delta(&self.anchor))
    }

    pub fn local(&self, p: &Point3<T>) -> Result<[T; 3]> {
        let d = p.delta(&self.anchor);
        let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if dist > T::lit(CHART_RADIUS) {
            return Err(Error::OutsideChart {
                distance: dist.as_f64(),
                radius: CHART_RADIUS,
            });
        }
        Ok(self.from_delta(d))
    }

    pub fn to_delta(&self, u: T, s: T, w: T) -> [T; 3] {
        [
            u * self.u_axis[0] + s * self.s_axis[0],
            u * self.u_axis[1] + s * self.s_axis[1],
            w,
        ]
    }

    pub fn from_local(&self, u: T, s: T, w: T) -> Point3<T> {
        self.anchor.offset(self.to_delta(u, s, w))
    }

    /// Columns are the ambient images of the chart axes.
    pub fn basis(&self) -> Mat3<T> {
        let z = T::zero();
        [
            [self.u_axis[0], self.s_axis[0], z],
            [self.u_axis[1], self.s_axis[1], z],
            [z, z, T::one()],
        ]
    }

    pub fn basis_inv(&self) -> Mat3<T> {
        let z = T::zero();
        [
            [self.inv[0][0], self.inv[0][1], z],
            [self.inv[1][0], self.inv[1][1], z],
            [z, z, T::one()],
        ]
    }
}

pub fn local_chart<T: Real>(chart: &Chart<T>, p: &Point3<T>) -> Result<[T; 3]> {
    chart.local(p)
}

pub fn chart_from<T: Real>(chart: &Chart<T>, u: T, s: T, w: T) -> Point3<T> {
    chart.from_local(u, s, w)
}
