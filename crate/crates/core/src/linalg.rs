//! Fixed-size matrix helpers. Matrices are row-major arrays.

use crate::scalar::Real;

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];
pub type Mat2<T> = [[T; 2]; 2];

pub fn identity<T: Real>() -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    [[o, z, z], [z, o, z], [z, z, o]]
}

#[inline]
pub fn mat_mul<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

#[inline]
pub fn mat_vec<T: Real>(a: &Mat3<T>, v: &Vec3<T>) -> Vec3<T> {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

#[inline]
pub fn dot<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm<T: Real>(a: &Vec3<T>) -> T {
    dot(a, a).sqrt()
}

pub fn det2<T: Real>(m: &Mat2<T>) -> T {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Modified Gram–Schmidt on the columns of `q` in place. Returns the diagonal
/// of R (column norms after orthogonalisation).
pub fn orthonormalize<T: Real>(q: &mut Mat3<T>) -> [T; 3] {
    let mut diag = [T::zero(); 3];
    for j in 0..3 {
        for i in 0..j {
            let proj = q[0][i] * q[0][j] + q[1][i] * q[1][j] + q[2][i] * q[2][j];
            for r in 0..3 {
                q[r][j] = q[r][j] - proj * q[r][i];
            }
        }
        let n = (q[0][j] * q[0][j] + q[1][j] * q[1][j] + q[2][j] * q[2][j]).sqrt();
        diag[j] = n;
        if n > T::zero() {
            for r in 0..3 {
                q[r][j] = q[r][j] / n;
            }
        }
    }
    diag
}

/// Two-column version of [`orthonormalize`].
pub fn orthonormalize2<T: Real>(q: &mut Mat2<T>) -> [T; 2] {
    let n0 = (q[0][0] * q[0][0] + q[1][0] * q[1][0]).sqrt();
    q[0][0] = q[0][0] / n0;
    q[1][0] = q[1][0] / n0;
    let proj = q[0][0] * q[0][1] + q[1][0] * q[1][1];
    q[0][1] = q[0][1] - proj * q[0][0];
    q[1][1] = q[1][1] - proj * q[1][0];
    let n1 = (q[0][1] * q[0][1] + q[1][1] * q[1][1]).sqrt();
    q[0][1] = q[0][1] / n1;
    q[1][1] = q[1][1] / n1;
    [n0, n1]
}

pub fn mat2_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}
