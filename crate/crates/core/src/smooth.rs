//! C^∞ building blocks: exponential smoothsteps, radial bumps and a
//! near-uniform-slope step. Every function returns its value together with
//! the exact derivative so the maps built from them carry analytic Jacobians.

use crate::scalar::Real;

#[inline(always)]
fn psi<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        (-x.recip()).exp()
    }
}

/// Exponential smoothstep on `[0, 1]`: 0 for `x <= 0`, 1 for `x >= 1`, with
/// every derivative vanishing at both ends. Returns `(S(x), S'(x))`.
#[inline]
pub fn step<T: Real>(x: T) -> (T, T) {
    let one = T::one();
    if x <= T::zero() {
        return (T::zero(), T::zero());
    }
    if x >= one {
        return (one, T::zero());
    }
    let y = one - x;
    let a = psi(x);
    let b = psi(y);
    let s = a + b;
    let da = a / (x * x);
    let db = b / (y * y);
    (a / s, (da * b + a * db) / (s * s))
}

/// Smoothstep rising from 0 at `lo` to 1 at `hi`. Returns value and
/// derivative with respect to `x`.
#[inline]
pub fn ramp<T: Real>(x: T, lo: T, hi: T) -> (T, T) {
    if x <= lo {
        return (T::zero(), T::zero());
    }
    if x >= hi {
        return (T::one(), T::zero());
    }
    let w = hi - lo;
    let (v, d) = step((x - lo) / w);
    (v, d / w)
}

/// Compactly supported radial bump `exp(1 - 1/(1 - q))`, `q = d2 / rho^2`,
/// with value 1 at the centre.
///
/// Takes the squared distance and returns `(beta, g)` where the gradient with
/// respect to the position is `g * displacement`.
#[inline]
pub fn bump<T: Real>(d2: T, rho: T) -> (T, T) {
    let r2 = rho * rho;
    if d2 >= r2 {
        return (T::zero(), T::zero());
    }
    let one = T::one();
    let q = d2 / r2;
    let inv = one / (one - q);
    let b = (one - inv).exp();
    (b, -b * inv * inv * T::lit(2.0) / r2)
}

const GL20: [(f64, f64); 10] = [
    (0.076_526_521_133_497_34, 0.152_753_387_130_725_78),
    (0.227_785_851_141_645_1, 0.149_172_986_472_603_66),
    (0.373_706_088_715_419_55, 0.142_096_109_318_381_87),
    (0.510_867_001_950_827_1, 0.131_688_638_449_176_53),
    (0.636_053_680_726_515, 0.118_194_531_961_518_25),
    (0.746_331_906_460_150_8, 0.101_930_119_817_240_26),
    (0.839_116_971_822_218_8, 0.083_276_741_576_704_67),
    (0.912_234_428_251_325_8, 0.062_672_048_334_109_44),
    (0.963_971_927_277_913_8, 0.040_601_429_800_386_22),
    (0.993_128_599_185_094_9, 0.017_614_007_139_153_273),
];

fn gl_panel<T: Real>(lo: T, hi: T) -> T {
    let half = (hi - lo) / T::lit(2.0);
    let mid = (hi + lo) / T::lit(2.0);
    let mut acc = T::zero();
    for &(x, w) in GL20.iter() {
        let dx = half * T::lit(x);
        acc = acc + T::lit(w) * (step(mid - dx).0 + step(mid + dx).0);
    }
    acc * half
}

/// `Q(y) = ∫_0^y S(z) dz` for `y` in `[0, 1]`, using `∫_0^1 S = 1/2` and the
/// reflection `S(z) + S(1 - z) = 1` so quadrature only runs on `[0, 1/2]`.
pub fn step_integral<T: Real>(y: T) -> T {
    let half = T::lit(0.5);
    let one = T::one();
    if y <= T::zero() {
        return T::zero();
    }
    if y >= one {
        return half + (y - one);
    }
    if y > half {
        let z = one - y;
        return half - z + step_integral(z);
    }
    gl_panel(T::zero(), y * half) + gl_panel(y * half, y)
}

/// Step from 0 at `lo` to 1 at `hi` whose derivative is a C^∞ plateau: the
/// slope ramps up over a fraction `eta` of the interval at each end and is
/// constant in between, so the peak slope is `1 / ((1 - eta) (hi - lo))`
/// instead of the `2 / (hi - lo)` of [`ramp`].
pub fn plateau_step<T: Real>(x: T, lo: T, hi: T, eta: T) -> (T, T) {
    if x <= lo {
        return (T::zero(), T::zero());
    }
    if x >= hi {
        return (T::one(), T::zero());
    }
    let one = T::one();
    let w = hi - lo;
    let tau = (x - lo) / w;
    let mass = one - eta;
    let density = step(tau / eta).0 * step((one - tau) / eta).0;
    let acc = if tau <= eta {
        eta * step_integral(tau / eta)
    } else if tau < one - eta {
        eta / T::lit(2.0) + (tau - eta)
    } else {
        mass - eta * step_integral((one - tau) / eta)
    };
    (acc / mass, density / (mass * w))
}

/// Largest slope of [`plateau_step`] over `[lo, hi]`.
pub fn plateau_max_slope<T: Real>(lo: T, hi: T, eta: T) -> T {
    T::one() / ((T::one() - eta) * (hi - lo))
}
