use super::dilog::{bernoulli3, bloch_wigner};
use super::EvalSettings;
use crate::error::{Error, Result};
use crate::C64;

/// Prefactor of the B₃ correction in J_q, calibrated against the Kronecker
/// series: J_q carries (1/3)(log|q|)² B₃(log|z|/log|q|).
pub const B3_PREFACTOR: f64 = 1.0 / 3.0;

/// The prefactor read off the printed formula, (2/3)(log|q|)², kept for
/// the calibration report.
pub const B3_PREFACTOR_PRINTED: f64 = 2.0 / 3.0;

fn check_nome(q: C64) -> Result<()> {
    let m = q.norm();
    if m >= 1.0 || m == 0.0 || !m.is_finite() {
        return Err(Error::NomeOutOfRange { modulus: m });
    }
    Ok(())
}

/// Rescales z by powers of q into |q| < |z| ≤ 1.
pub fn reduce_to_annulus(z: C64, q: C64) -> C64 {
    let lq = q.norm().ln();
    let m = (z.norm().ln() / lq).floor();
    let mut w = z * q.powf(-m);
    // Guard the boundaries against rounding in the exponent.
    if w.norm() > 1.0 + 1e-15 {
        w *= q;
    } else if w.norm() <= q.norm() {
        w /= q;
    }
    w
}

fn j_single(w: C64) -> f64 {
    w.norm().ln() * (1.0 - w).norm().ln()
}

/// Tail bound for Σ_{n ≥ k} of either symmetrized series, valid once both
/// arguments have modulus ≤ |q|^k.
fn tail_bound(k: usize, qa: f64) -> f64 {
    let l = -qa.ln();
    let g = 1.0 / (1.0 - qa);
    2.0 * qa.powi(k as i32) * g * g * (2.0 + 2.0 * l * (k as f64 + 2.0))
}

struct Sums {
    d: f64,
    j: f64,
    z: C64,
}

fn symmetric_sums(z: C64, q: C64, s: &EvalSettings) -> Result<Sums> {
    check_nome(q)?;
    if z.norm() == 0.0 || !z.is_finite() {
        return Err(Error::InvalidSettings(
            "z must be a nonzero finite number".into(),
        ));
    }
    let z = reduce_to_annulus(z, q);
    if (z - 1.0).norm() < 1e-14 {
        return Err(Error::SingularEntry {
            point: "z = 1".into(),
        });
    }
    let qa = q.norm();
    let zinv = 1.0 / z;
    let (mut d, mut j) = (
        crate::numerics::NeumaierSum::new(),
        crate::numerics::NeumaierSum::new(),
    );
    d.add(bloch_wigner(z));
    j.add(j_single(z));
    let mut qn = C64::new(1.0, 0.0);
    let mut n = 1;
    loop {
        qn *= q;
        let (a, b) = (z * qn, qn * zinv);
        d.add(bloch_wigner(a) - bloch_wigner(b));
        j.add(j_single(a) - j_single(b));
        if tail_bound(n, qa) < 0.25 * s.tol {
            break;
        }
        n += 1;
        if n > s.max_q_terms {
            return Err(Error::SeriesNotConverged {
                terms: s.max_q_terms,
            });
        }
    }
    Ok(Sums {
        d: d.value(),
        j: j.value(),
        z,
    })
}

/// D_q(z) = Σ_{n∈Z} D(z qⁿ).
pub fn elliptic_dilog_dq(z: C64, q: C64, s: &EvalSettings) -> Result<f64> {
    Ok(symmetric_sums(z, q, s)?.d)
}

fn jq_with(z: C64, q: C64, s: &EvalSettings, prefactor: f64) -> Result<f64> {
    let sums = symmetric_sums(z, q, s)?;
    let lq = q.norm().ln();
    Ok(sums.j + prefactor * lq * lq * bernoulli3(sums.z.norm().ln() / lq))
}

/// J_q(z) = Σ_{n≥0} J(zqⁿ) − Σ_{n≥1} J(qⁿ/z) + (1/3)(log|q|)² B₃(log|z|/log|q|).
pub fn jq(z: C64, q: C64, s: &EvalSettings) -> Result<f64> {
    jq_with(z, q, s, B3_PREFACTOR)
}

/// J_q with the printed (2/3) prefactor, for the calibration report only.
pub fn jq_printed(z: C64, q: C64, s: &EvalSettings) -> Result<f64> {
    jq_with(z, q, s, B3_PREFACTOR_PRINTED)
}

/// R_q(z) = D_q(z) − i J_q(z).
pub fn rq(z: C64, q: C64, s: &EvalSettings) -> Result<C64> {
    let sums = symmetric_sums(z, q, s)?;
    let lq = q.norm().ln();
    let j = sums.j + B3_PREFACTOR * lq * lq * bernoulli3(sums.z.norm().ln() / lq);
    Ok(C64::new(sums.d, -j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn settings() -> EvalSettings {
        EvalSettings::default()
    }

    #[test]
    fn real_arguments_vanish() {
        let v = elliptic_dilog_dq(C64::new(0.3, 0.0), C64::new(0.01, 0.0), &settings()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn antisymmetry_under_inversion() {
        let z = C64::from_polar(1.0, 2.0 * PI / 5.0);
        let q = C64::new((-2.0 * PI).exp(), 0.0);
        let a = elliptic_dilog_dq(z, q, &settings()).unwrap();
        let b = elliptic_dilog_dq(1.0 / z, q, &settings()).unwrap();
        assert!((a + b).abs() < 1e-15);
    }

    #[test]
    fn b3_term_vanishes_on_unit_circle() {
        let z = C64::from_polar(1.0, 0.7);
        let q = C64::new(0.05, 0.0);
        let a = jq(z, q, &settings()).unwrap();
        let b = jq_printed(z, q, &settings()).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn single_j_term() {
        assert!((j_single(C64::new(0.5, 0.0)) - 0.480_453_013_918_201_4).abs() < 1e-15);
    }

    #[test]
    fn bad_nome() {
        assert!(matches!(
            rq(C64::new(0.5, 0.5), C64::new(1.0, 0.0), &settings()),
            Err(Error::NomeOutOfRange { .. })
        ));
        assert!(matches!(
            rq(C64::new(0.5, 0.5), C64::new(0.0, 0.0), &settings()),
            Err(Error::NomeOutOfRange { .. })
        ));
    }

    #[test]
    fn invariant_under_q_shift() {
        let q = C64::new(0.0, 0.02);
        let z = C64::new(0.4, 0.3);
        let a = rq(z, q, &settings()).unwrap();
        let b = rq(z * q, q, &settings()).unwrap();
        assert!((a - b).norm() < 1e-13);
    }
}
