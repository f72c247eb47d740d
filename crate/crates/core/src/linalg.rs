//! Small dense helpers: the real 2x2 matrices that carry the per-mode
//! dynamics, and the tridiagonal solver used by inverse iteration.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

/// Real 2x2 matrix `[[a11, a12], [a21, a22]]`, acting on a mode pair `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn diag(d1: f64, d2: f64) -> Self {
        Mat2::new(d1, 0.0, 0.0, d2)
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn scale(&self, k: f64) -> Mat2 {
        Mat2::new(k * self.a11, k * self.a12, k * self.a21, k * self.a22)
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 + o.a11,
            self.a12 + o.a12,
            self.a21 + o.a21,
            self.a22 + o.a22,
        )
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    /// `((a11 - a22)/2)^2 + a12 a21`, the discriminant of the characteristic
    /// polynomial divided by four, computed without the `tr^2 - 4 det` cancellation.
    fn half_discriminant(&self) -> f64 {
        let h = 0.5 * (self.a11 - self.a22);
        h * h + self.a12 * self.a21
    }

    /// Eigenvalues ordered by real part (ascending); a complex pair is
    /// returned as `(re - i im, re + i im)`.
    pub fn eigenvalues(&self) -> [Complex<f64>; 2] {
        let s = 0.5 * self.trace();
        let q2 = self.half_discriminant();
        if q2 >= 0.0 {
            let q = q2.sqrt();
            // Larger-magnitude root first, the other from the product to avoid cancellation.
            let big = if s >= 0.0 { s + q } else { s - q };
            let small = if big != 0.0 { self.det() / big } else { 0.0 };
            let (lo, hi) = if big <= small {
                (big, small)
            } else {
                (small, big)
            };
            [Complex::new(lo, 0.0), Complex::new(hi, 0.0)]
        } else {
            let w = (-q2).sqrt();
            [Complex::new(s, -w), Complex::new(s, w)]
        }
    }

    /// `exp(self)` via the Cayley-Hamilton closed form `c0 I + c1 (Z - sI)`.
    pub fn exp(&self) -> Mat2 {
        let s = 0.5 * self.trace();
        let q2 = self.half_discriminant();
        let (c0, c1) = if q2 >= 0.0 {
            let q = q2.sqrt();
            let up = (s + q).exp();
            let down = (s - q).exp();
            let c1 = if q < 1e-8 {
                up * (1.0 - q)
            } else {
                up * (-(-2.0 * q).exp_m1()) / (2.0 * q)
            };
            (0.5 * (up + down), c1)
        } else {
            let w = (-q2).sqrt();
            let es = s.exp();
            let sinc = if w < 1e-6 {
                1.0 - w * w / 6.0
            } else {
                w.sin() / w
            };
            (es * w.cos(), es * sinc)
        };
        let n = self.sub(&Mat2::IDENTITY.scale(s));
        Mat2::IDENTITY.scale(c0).add(&n.scale(c1))
    }

    /// Returns `(exp(h Z), int_0^h exp(sigma Z) d sigma)`.
    ///
    /// The integral is evaluated by a Taylor series on a scaled-down step and
    /// then doubled with `Phi(2t) = (I + exp(tZ)) Phi(t)`, so it stays accurate
    /// for singular `Z` (the kernel block) and for stiff modes alike.
    pub fn exp_and_integral(&self, h: f64) -> (Mat2, Mat2) {
        let z = self.scale(h);
        let norm = z.max_abs() * 2.0;
        let mut doublings = 0u32;
        let mut scaled = norm;
        while scaled > 0.25 {
            scaled *= 0.5;
            doublings += 1;
        }
        let tau = h * 0.5f64.powi(doublings as i32);
        let zt = self.scale(tau);
        // Phi(tau) = tau * sum_k (tau Z)^k / (k+1)!
        let mut term = Mat2::IDENTITY;
        let mut sum = Mat2::IDENTITY;
        let mut fact = 1.0;
        for k in 1..=20 {
            term = term.mul(&zt);
            fact *= (k + 1) as f64;
            sum = sum.add(&term.scale(1.0 / fact));
        }
        let mut phi = sum.scale(tau);
        let mut t = tau;
        for _ in 0..doublings {
            let e = self.scale(t).exp();
            phi = Mat2::IDENTITY.add(&e).mul(&phi);
            t *= 2.0;
        }
        (self.scale(h).exp(), phi)
    }

    /// Operator norm for the weighted norm `|x| w + |y|` on `R^2`.
    pub fn weighted_l1_norm(&self, w: f64) -> f64 {
        let s = self.weighted(w);
        (s.a11.abs() + s.a21.abs()).max(s.a12.abs() + s.a22.abs())
    }

    /// The matrix expressed in the scaled coordinates `(w x, y)`.
    pub fn weighted(&self, w: f64) -> Mat2 {
        Mat2::new(self.a11, self.a12 * w, self.a21 / w, self.a22)
    }
}

/// Upper bound for the operator norm of a block-diagonal map on
/// `E = X^alpha x X` with norm `||x||_alpha + ||y||`.
///
/// Each item is a block together with its weight `mu_i^alpha`. Writing the
/// blocks in scaled coordinates and taking entrywise maxima `(p, q, r, s)`
/// over all blocks, the map is bounded by `max(p + r, q + s)`.
pub fn joint_block_bound<I>(blocks: I) -> f64
where
    I: IntoIterator<Item = (Mat2, f64)>,
{
    let mut m = [0.0f64; 4];
    for (b, w) in blocks {
        let s = b.weighted(w);
        m[0] = m[0].max(s.a11.abs());
        m[1] = m[1].max(s.a12.abs());
        m[2] = m[2].max(s.a21.abs());
        m[3] = m[3].max(s.a22.abs());
    }
    (m[0] + m[2]).max(m[1] + m[3])
}

/// Solves `T x = b` for a general tridiagonal `T` (sub, diag, sup) using
/// Gaussian elimination with partial pivoting. Zero pivots are replaced by
/// `tiny` so the routine can serve inverse iteration on a singular shift.
pub fn solve_tridiagonal_pivoted(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    b: &[f64],
    tiny: f64,
) -> Vec<f64> {
    let n = diag.len();
    if n == 0 {
        return Vec::new();
    }
    // Row i of U holds (u0, u1, u2) at columns i, i+1, i+2.
    let mut u0 = diag.to_vec();
    let mut u1: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n { sup[i] } else { 0.0 })
        .collect();
    let mut u2 = vec![0.0; n];
    let mut rhs = b.to_vec();
    for i in 0..n.saturating_sub(1) {
        let l = sub[i];
        if l.abs() > u0[i].abs() {
            // swap rows i and i+1
            let (r0, r1, r2) = (l, u0[i + 1], if i + 2 < n { sup[i + 1] } else { 0.0 });
            let (s0, s1, s2) = (u0[i], u1[i], u2[i]);
            u0[i] = r0;
            u1[i] = r1;
            u2[i] = r2;
            rhs.swap(i, i + 1);
            let m = s0 / r0;
            u0[i + 1] = s1 - m * r1;
            u1[i + 1] = s2 - m * r2;
            rhs[i + 1] -= m * rhs[i];
        } else {
            if u0[i] == 0.0 {
                u0[i] = tiny;
            }
            let m = l / u0[i];
            u0[i + 1] -= m * u1[i];
            if i + 2 < n {
                u1[i + 1] = sup[i + 1] - m * u2[i];
            }
            rhs[i + 1] -= m * rhs[i];
        }
    }
    if u0[n - 1] == 0.0 {
        u0[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        if i + 1 < n {
            acc -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            acc -= u2[i] * x[i + 2];
        }
        x[i] = acc / u0[i];
    }
    x
}
