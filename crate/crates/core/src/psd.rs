//! Closed-form spectral operations on symmetric 2x2 matrices.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// Symmetric 2x2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymMat2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

/// Eigenvalues `l1 >= l2` and the angle of the eigenvector belonging to `l1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eig2 {
    pub l1: f64,
    pub l2: f64,
    pub theta: f64,
}

impl SymMat2 {
    pub const ZERO: SymMat2 = SymMat2 {
        a11: 0.0,
        a12: 0.0,
        a22: 0.0,
    };
    pub const IDENTITY: SymMat2 = SymMat2 {
        a11: 1.0,
        a12: 0.0,
        a22: 1.0,
    };

    pub const fn new(a11: f64, a12: f64, a22: f64) -> Self {
        SymMat2 { a11, a12, a22 }
    }

    pub const fn diag(a11: f64, a22: f64) -> Self {
        SymMat2 { a11, a12: 0.0, a22 }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn frobenius(&self) -> f64 {
        (self.a11 * self.a11 + 2.0 * self.a12 * self.a12 + self.a22 * self.a22).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a22.is_finite()
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a12 * v[0] + self.a22 * v[1]]
    }

    /// `a . (self b)`
    pub fn bilinear(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let sb = self.apply(b);
        a[0] * sb[0] + a[1] * sb[1]
    }

    pub fn eig(&self) -> Eig2 {
        eig_sym2(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eig_sym2(self).l2
    }

    pub fn cofactor(&self) -> SymMat2 {
        cofactor(self)
    }

    pub fn project_psd(&self) -> SymMat2 {
        project_psd(self)
    }
}

impl Add for SymMat2 {
    type Output = SymMat2;
    fn add(self, o: SymMat2) -> SymMat2 {
        SymMat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a22 + o.a22)
    }
}

impl Sub for SymMat2 {
    type Output = SymMat2;
    fn sub(self, o: SymMat2) -> SymMat2 {
        SymMat2::new(self.a11 - o.a11, self.a12 - o.a12, self.a22 - o.a22)
    }
}

impl Mul<SymMat2> for f64 {
    type Output = SymMat2;
    fn mul(self, m: SymMat2) -> SymMat2 {
        SymMat2::new(self * m.a11, self * m.a12, self * m.a22)
    }
}

/// Spectral decomposition `A = R(theta) diag(l1, l2) R(theta)^T` with `l1 >= l2`.
///
/// The angle comes from `atan2`, which stays accurate as `a12 -> 0`; the fully
/// degenerate case (`a12 = 0`, `a11 = a22`) returns `theta = 0`.
pub fn eig_sym2(a: &SymMat2) -> Eig2 {
    let mean = 0.5 * (a.a11 + a.a22);
    let half_diff = 0.5 * (a.a11 - a.a22);
    let radius = half_diff.hypot(a.a12);
    let theta = if radius == 0.0 {
        0.0
    } else {
        0.5 * (2.0 * a.a12).atan2(a.a11 - a.a22)
    };
    Eig2 {
        l1: mean + radius,
        l2: mean - radius,
        theta,
    }
}

/// Rebuilds `R(theta) diag(l1, l2) R(theta)^T`.
pub fn compose_sym2(e: &Eig2) -> SymMat2 {
    let (s, c) = e.theta.sin_cos();
    SymMat2::new(
        e.l1 * c * c + e.l2 * s * s,
        (e.l1 - e.l2) * c * s,
        e.l1 * s * s + e.l2 * c * c,
    )
}

/// Nearest positive-semidefinite matrix in the Frobenius norm: negative
/// eigenvalues are clamped to zero. PSD input is returned bit-for-bit.
pub fn project_psd(a: &SymMat2) -> SymMat2 {
    let mean = 0.5 * (a.a11 + a.a22);
    let half_diff = 0.5 * (a.a11 - a.a22);
    let radius = half_diff.hypot(a.a12);
    let l1 = mean + radius;
    let l2 = mean - radius;
    if l2 >= 0.0 {
        return *a;
    }
    if l1 <= 0.0 {
        return SymMat2::ZERO;
    }
    // l1 * v v^T with v the top eigenvector; cos^2 = (1 + d/r)/2 etc.
    let k = l1 / (2.0 * radius);
    SymMat2::new(k * (radius + half_diff), k * a.a12, k * (radius - half_diff))
}

/// `cof([[a, b], [b, c]]) = [[c, -b], [-b, a]]`.
pub fn cofactor(a: &SymMat2) -> SymMat2 {
    SymMat2::new(a.a22, -a.a12, a.a11)
}
