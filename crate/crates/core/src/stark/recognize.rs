use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_DEN: i64 = 10_000;
pub const DEFAULT_TOL: f64 = 1e-6;

/// x ≈ (p/q)·unit with the achieved residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recognition {
    pub p: i64,
    pub q: i64,
    pub residual: f64,
}

impl Recognition {
    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// First continued-fraction convergent p/q with q ≤ max_den and
/// |x − p/q| < tol·max(1, |x|).
pub fn recognize_rational(x: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    recognize(x, max_den, tol).map(|r| (r.p, r.q))
}

pub fn recognize(x: f64, max_den: i64, tol: f64) -> Option<Recognition> {
    if !x.is_finite() || max_den < 1 {
        return None;
    }
    let scale = x.abs().max(1.0);
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den as i128 {
            return None;
        }
        let err = (x - h2 as f64 / k2 as f64).abs();
        if err < tol * scale {
            return Some(Recognition {
                p: h2 as i64,
                q: k2 as i64,
                residual: err / scale,
            });
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

/// x ≈ (p/q)·root.
pub fn recognize_times_sqrt(x: f64, root: f64, max_den: i64, tol: f64) -> Option<Recognition> {
    recognize(x / root, max_den, tol)
}
