//! Dilogarithms, the elliptic regulator function R_q and the
//! Kronecker-Eisenstein-Lerch series
//!
//!   K_a(x, x₀, s, Λ) = Σ* ⟨x₀,ω⟩ (x̄+ω̄)^a / |x+ω|^{2s},
//!
//! (the star omits ω = −x when x ∈ Λ) with three evaluation routes:
//! q-series through R_q, the incomplete-gamma continuation, and direct
//! shell summation.
//!
//! J_q uses the B₃ correction (1/3)(log|q|)² B₃(log|z|/log|q|). This is the
//! value for which R_q(e^{2πiu}) = π A([1,τ])² K_{2,1}(u, [1,τ]) holds; the
//! reading (2/3)(log|q|)² is off by a factor of two in the correction term
//! and is kept only as `jq_printed` for the calibration check.

mod dilog;
mod elliptic;
mod series;

pub use dilog::{bernoulli3, bloch_wigner, dilog};
pub use elliptic::{
    elliptic_dilog_dq, jq, jq_printed, reduce_to_annulus, rq, B3_PREFACTOR, B3_PREFACTOR_PRINTED,
};
pub use series::{kronecker_continued, kronecker_direct};

use crate::error::{Error, Result};
use crate::json::Cx;
use crate::lattice::{ComplexLattice, TorsionCoord};
use crate::par::Execution;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    QSeries,
    Continued,
    DirectSum,
    #[default]
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSettings {
    pub tol: f64,
    pub max_q_terms: usize,
    pub shell_radius: f64,
    pub route: Route,
    /// Split point λ of the continued route, in units of A(Λ).
    pub split: f64,
    pub execution: Execution,
    /// Reject (rather than drop) divisor entries at the origin.
    pub strict: bool,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            max_q_terms: 400,
            shell_radius: 1500.0,
            route: Route::Auto,
            split: 1.0,
            execution: Execution::Parallel,
            strict: false,
        }
    }
}

impl EvalSettings {
    pub fn validate(&self) -> Result<()> {
        if !(1e-14..=1e-2).contains(&self.tol) {
            return Err(Error::InvalidSettings(format!(
                "tol = {} outside [1e-14, 1e-2]",
                self.tol
            )));
        }
        if self.max_q_terms < 8 {
            return Err(Error::InvalidSettings(format!(
                "max_q_terms = {} < 8",
                self.max_q_terms
            )));
        }
        if !self.shell_radius.is_finite() || self.shell_radius < 10.0 {
            return Err(Error::InvalidSettings(format!(
                "shell_radius = {} < 10",
                self.shell_radius
            )));
        }
        if !self.split.is_finite() || self.split <= 0.0 {
            return Err(Error::InvalidSettings(format!(
                "split = {} must be positive",
                self.split
            )));
        }
        Ok(())
    }

    pub fn with_route(&self, route: Route) -> Self {
        Self {
            route,
            ..self.clone()
        }
    }

    pub fn with_split(&self, split: f64) -> Self {
        Self {
            split,
            ..self.clone()
        }
    }

    pub fn with_shell_radius(&self, shell_radius: f64) -> Self {
        Self {
            shell_radius,
            ..self.clone()
        }
    }
}

/// |q| below which Auto uses the q-series.
pub fn qseries_threshold() -> f64 {
    (-PI).exp()
}

fn k21_qseries(u: C64, lat: &ComplexLattice, s: &EvalSettings) -> Result<C64> {
    let (a, b) = lat.coords(u);
    let w = C64::new(a - a.floor(), 0.0) + lat.tau() * (b - b.floor());
    let a0 = lat.tau().im / PI;
    let r = rq((C64::new(0.0, 2.0 * PI) * w).exp(), lat.q(), s)?;
    let w1 = lat.omega1();
    Ok(r / (PI * a0 * a0) * w1.conj() / w1.norm_sqr().powi(2))
}

/// K_{2,1}(u, Λ) = K₁(0, u, 2, Λ).
pub fn k21(u: C64, lat: &ComplexLattice, s: &EvalSettings) -> Result<C64> {
    s.validate()?;
    if lat.contains(u) {
        // ω ↦ −ω symmetry kills the sum.
        return Ok(C64::new(0.0, 0.0));
    }
    let zero = C64::new(0.0, 0.0);
    let two = C64::new(2.0, 0.0);
    match s.route {
        Route::QSeries => k21_qseries(u, lat, s),
        Route::Continued => kronecker_continued(1, zero, u, two, lat, s),
        Route::DirectSum => kronecker_direct(1, zero, u, two, lat, s),
        Route::Auto => {
            if lat.q().norm() < qseries_threshold() {
                k21_qseries(u, lat, s)
            } else {
                kronecker_continued(1, zero, u, two, lat, s)
            }
        }
    }
}

/// A([1,τ])² K_{2,1}(a + bτ, [1,τ]); the per-point regulator contribution.
pub fn regulator_term(t: &TorsionCoord, tau: C64, s: &EvalSettings) -> Result<C64> {
    let lat = ComplexLattice::from_tau(tau)?;
    let a0 = lat.area();
    Ok(k21(t.on_normalized(tau), &lat, s)? * (a0 * a0))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RouteResidual {
    pub pair: String,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct K21Crosscheck {
    pub u: Cx,
    pub qseries: Option<Cx>,
    pub qseries_error: Option<String>,
    pub continued: Cx,
    pub direct: Cx,
    pub shell_radius: f64,
    pub residuals: Vec<RouteResidual>,
}

impl K21Crosscheck {
    pub fn residual(&self, pair: &str) -> Option<f64> {
        self.residuals
            .iter()
            .find(|r| r.pair == pair)
            .map(|r| r.residual)
    }
}

pub fn k21_crosscheck(u: C64, lat: &ComplexLattice, s: &EvalSettings) -> Result<K21Crosscheck> {
    let qs = k21(u, lat, &s.with_route(Route::QSeries));
    let cont = k21(u, lat, &s.with_route(Route::Continued))?;
    let direct = k21(u, lat, &s.with_route(Route::DirectSum))?;
    let mut residuals = vec![];
    if let Ok(q) = &qs {
        residuals.push(RouteResidual {
            pair: "qseries-continued".into(),
            residual: (q - cont).norm(),
        });
        residuals.push(RouteResidual {
            pair: "qseries-direct".into(),
            residual: (q - direct).norm(),
        });
    }
    residuals.push(RouteResidual {
        pair: "continued-direct".into(),
        residual: (cont - direct).norm(),
    });
    Ok(K21Crosscheck {
        u: Cx(u),
        qseries_error: qs.as_ref().err().map(|e| e.to_string()),
        qseries: qs.ok().map(Cx),
        continued: Cx(cont),
        direct: Cx(direct),
        shell_radius: s.shell_radius,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn settings_bounds() {
        let mut s = EvalSettings::default();
        assert!(s.validate().is_ok());
        s.tol = 1e-15;
        assert!(s.validate().is_err());
        let s = EvalSettings {
            max_q_terms: 7,
            ..Default::default()
        };
        assert!(s.validate().is_err());
        let s = EvalSettings {
            shell_radius: 9.0,
            ..Default::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn qseries_matches_continued_on_seventh_torsion() {
        let lat = ComplexLattice::gaussian();
        let s = EvalSettings::default();
        let u = c(1.0, 2.0) / 7.0;
        let a = k21(u, &lat, &s.with_route(Route::QSeries)).unwrap();
        let b = k21(u, &lat, &s.with_route(Route::Continued)).unwrap();
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn continued_matches_direct_in_convergence_region() {
        let lat = ComplexLattice::from_tau(c(0.2, 1.1)).unwrap();
        let s = EvalSettings::default().with_shell_radius(400.0);
        let (x, x0, sv) = (c(0.13, 0.4), c(0.31, -0.2), c(2.5, 0.3));
        for a in [0, 1] {
            let d = kronecker_direct(a, x, x0, sv, &lat, &s).unwrap();
            let k = kronecker_continued(a, x, x0, sv, &lat, &s).unwrap();
            assert!((d - k).norm() < 1e-6, "a={a}: {d} vs {k}");
        }
    }

    #[test]
    fn continued_handles_lattice_arguments() {
        // x ∈ Λ and x₀ ∈ Λ exercise both omitted-term corrections.
        let lat = ComplexLattice::gaussian();
        let s = EvalSettings::default().with_shell_radius(400.0);
        for (x, x0) in [
            (c(1.0, 0.0), c(0.2, 0.3)),
            (c(0.2, 0.3), c(0.0, 1.0)),
            (c(0.0, 0.0), c(1.0, 1.0)),
        ] {
            let sv = c(2.6, 0.0);
            let d = kronecker_direct(0, x, x0, sv, &lat, &s).unwrap();
            let k = kronecker_continued(0, x, x0, sv, &lat, &s).unwrap();
            assert!((d - k).norm() < 1e-6, "{x} {x0}: {d} vs {k}");
        }
    }

    #[test]
    fn split_independence() {
        let lat = ComplexLattice::eisenstein();
        let s = EvalSettings::default();
        let (x, x0, sv) = (c(0.1, 0.05), c(0.3, 0.2), c(0.4, 1.0));
        let a = kronecker_continued(0, x, x0, sv, &lat, &s).unwrap();
        let b = kronecker_continued(0, x, x0, sv, &lat, &s.with_split(1.9)).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn pole_is_reported() {
        let lat = ComplexLattice::gaussian();
        let s = EvalSettings::default();
        let r = kronecker_continued(0, c(0.3, 0.1), c(0.0, 0.0), c(1.0, 0.0), &lat, &s);
        assert!(matches!(r, Err(Error::PoleEncountered { .. })));
    }

    #[test]
    fn direct_rejects_outside_region() {
        let lat = ComplexLattice::gaussian();
        let s = EvalSettings::default();
        let r = kronecker_direct(1, c(0.0, 0.0), c(0.5, 0.0), c(1.7, 0.0), &lat, &s);
        assert!(matches!(r, Err(Error::ConvergenceRegion { .. })));
    }

    #[test]
    fn two_torsion_vanishes() {
        let lat = ComplexLattice::gaussian();
        let s = EvalSettings::default();
        for u in [c(0.5, 0.0), c(0.0, 0.5), c(0.5, 0.5)] {
            assert!(k21(u, &lat, &s).unwrap().norm() < 1e-12);
        }
    }
}
