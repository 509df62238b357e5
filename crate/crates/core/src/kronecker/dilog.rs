use crate::C64;
use std::f64::consts::PI;

const ZETA2: f64 = PI * PI / 6.0;

// B_{2k} for k = 1..15.
const BERNOULLI_EVEN: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

fn power_series(z: C64) -> C64 {
    let mut term = z;
    let mut acc = C64::new(0.0, 0.0);
    for k in 1..200 {
        let t = term / (k * k) as f64;
        acc += t;
        if t.norm() < 1e-17 * acc.norm().max(1e-300) {
            break;
        }
        term *= z;
    }
    acc
}

/// Li₂(z) = Σ B_n u^{n+1}/(n+1)!, u = −log(1 − z); valid for |u| < 2π.
fn bernoulli_series(z: C64) -> C64 {
    let u = -(1.0 - z).ln();
    let u2 = u * u;
    let mut acc = u - u2 / 4.0;
    let mut pow = u; // u^{2k+1}
    let mut fact = 1.0; // (2k+1)!
    for (k, &b) in BERNOULLI_EVEN.iter().enumerate() {
        let n = 2 * k + 2;
        pow *= u2;
        fact *= (n * (n + 1)) as f64;
        let t = pow * (b / fact);
        acc += t;
        if t.norm() < 1e-17 * acc.norm() {
            break;
        }
    }
    acc
}

fn dilog_unit_disk(z: C64) -> C64 {
    if z.norm() <= 0.5 {
        power_series(z)
    } else if z.re <= 0.5 {
        bernoulli_series(z)
    } else {
        // Li₂(z) = ζ(2) − log z log(1−z) − Li₂(1−z)
        let w = 1.0 - z;
        let lw = if w.norm() <= 0.5 {
            power_series(w)
        } else {
            bernoulli_series(w)
        };
        ZETA2 - z.ln() * w.ln() - lw
    }
}

/// Principal dilogarithm; on the cut (1, ∞) the value from the upper side.
pub fn dilog(z: C64) -> C64 {
    if z == C64::new(0.0, 0.0) {
        return z;
    }
    if z == C64::new(1.0, 0.0) {
        return C64::new(ZETA2, 0.0);
    }
    if z.norm() <= 1.0 {
        return dilog_unit_disk(z);
    }
    // Li₂(z) = −ζ(2) − ½ log²(−z) − Li₂(1/z)
    let log_neg = if z.im == 0.0 && z.re > 1.0 {
        C64::new(z.re.ln(), -PI)
    } else {
        (-z).ln()
    };
    -ZETA2 - 0.5 * log_neg * log_neg - dilog_unit_disk(1.0 / z)
}

/// Bloch-Wigner D(z) = Im Li₂(z) + log|z| arg(1 − z).
pub fn bloch_wigner(z: C64) -> f64 {
    if z.im == 0.0 {
        return 0.0;
    }
    if z.norm() > 1.0 {
        // D(1/z) = −D(z) keeps the evaluation inside the disk.
        return -bloch_wigner(1.0 / z);
    }
    dilog_unit_disk(z).im + z.norm().ln() * (1.0 - z).arg()
}

/// B₃(t) = t³ − 3t²/2 + t/2.
pub fn bernoulli3(t: f64) -> f64 {
    t * (t * (t - 1.5) + 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CATALAN: f64 = 0.915_965_594_177_219;

    #[test]
    fn special_values() {
        assert_eq!(dilog(C64::new(0.0, 0.0)), C64::new(0.0, 0.0));
        let half = dilog(C64::new(0.5, 0.0));
        assert!((half.re - 0.582_240_526_465_012_5).abs() < 1e-15);
        assert!((dilog(C64::new(0.0, 1.0)).im - CATALAN).abs() < 1e-15);
        // Li₂(−1) = −π²/12
        assert!((dilog(C64::new(-1.0, 0.0)).re + PI * PI / 12.0).abs() < 1e-15);
        // Li₂(2 + i0) = π²/4 + iπ log 2
        let two = dilog(C64::new(2.0, 0.0));
        assert!((two.re - PI * PI / 4.0).abs() < 1e-14);
        assert!((two.im - PI * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn bloch_wigner_values() {
        assert_eq!(bloch_wigner(C64::new(0.7, 0.0)), 0.0);
        assert_eq!(bloch_wigner(C64::new(1.0, 0.0)), 0.0);
        let z = C64::new(0.3, 0.7);
        assert!((bloch_wigner(z) + bloch_wigner(z.conj())).abs() < 1e-15);
        assert!((bloch_wigner(C64::new(0.0, 1.0)) - CATALAN).abs() < 1e-15);
        // Maximum at e^{iπ/3}: 1.0149416064096536
        let m = bloch_wigner(C64::from_polar(1.0, PI / 3.0));
        assert!((m - 1.014_941_606_409_653_6).abs() < 1e-14);
    }

    #[test]
    fn bloch_wigner_five_term_relation() {
        let (x, y) = (C64::new(0.3, 0.4), C64::new(-0.2, 1.1));
        let one = C64::new(1.0, 0.0);
        let s = bloch_wigner(x)
            + bloch_wigner(y)
            + bloch_wigner((one - x) / (one - x * y))
            + bloch_wigner(one - x * y)
            + bloch_wigner((one - y) / (one - x * y));
        assert!(s.abs() < 1e-13, "{s}");
    }

    #[test]
    fn bernoulli_roots() {
        for t in [0.0, 0.5, 1.0] {
            assert_eq!(bernoulli3(t), 0.0);
        }
        assert!((bernoulli3(0.25) - 0.046875).abs() < 1e-16);
    }

    #[test]
    fn branches_agree_across_switches() {
        for z in [
            C64::new(0.5, 0.0001),
            C64::new(0.49, 0.1),
            C64::new(0.51, 0.1),
            C64::new(0.6, 0.8),
        ] {
            let direct = power_series_or_slow(z);
            assert!((dilog(z) - direct).norm() < 1e-12, "{z}");
        }
    }

    fn power_series_or_slow(z: C64) -> C64 {
        // Slow but safe reference: Li₂(z) = −∫₀^z log(1−t)/t dt by Gauss-Legendre.
        let mut acc = C64::new(0.0, 0.0);
        let panels = 400;
        for p in 0..panels {
            for &(x, w) in crate::numerics::gauss_legendre() {
                let t = (p as f64 + 0.5 + 0.5 * x) / panels as f64;
                let zt = z * t;
                acc += -(1.0 - zt).ln() / t * (w * 0.5 / panels as f64);
            }
        }
        acc
    }
}
