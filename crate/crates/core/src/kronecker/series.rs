use super::EvalSettings;
use crate::error::{Error, Result};
use crate::lattice::{pairing, ComplexLattice};
use crate::numerics::{rgamma, upper_g, ComplexSum};
use crate::par::map_range;
use crate::C64;
use std::f64::consts::PI;

#[inline]
fn cis(t: f64) -> C64 {
    let (s, c) = (2.0 * PI * t).sin_cos();
    C64::new(c, s)
}

/// r2^{-s}; exact special cases keep the hot loop cheap.
#[derive(Clone, Copy)]
enum Power {
    Two,
    Real(f64),
    Complex(C64),
}

impl Power {
    fn new(s: C64) -> Self {
        if s.im != 0.0 {
            Power::Complex(s)
        } else if s.re == 2.0 {
            Power::Two
        } else {
            Power::Real(s.re)
        }
    }

    #[inline]
    fn eval(self, r2: f64) -> C64 {
        match self {
            Power::Two => C64::new(1.0 / (r2 * r2), 0.0),
            Power::Real(s) => C64::new(r2.powf(-s), 0.0),
            Power::Complex(s) => (-s * r2.ln()).exp(),
        }
    }
}

struct DirectKernel {
    w1: C64,
    w2: C64,
    tau: C64,
    x: C64,
    a: u32,
    alpha0: f64,
    beta0: f64,
    skip: Option<(i64, i64)>,
    power: Power,
}

impl DirectKernel {
    fn shell(&self, r_in: f64, r_out: f64, last: bool) -> C64 {
        let w1n = self.w1.norm();
        let nmax = (r_out / (w1n * self.tau.im)).floor() as i64;
        let (in2, out2) = (r_in * r_in, r_out * r_out);
        let step = cis(-self.beta0);
        let mut acc = ComplexSum::new();
        for n in -nmax..=nmax {
            let c = -(n as f64) * self.tau.re;
            let h2 = (n as f64 * self.tau.im * w1n).powi(2);
            let outer = ((out2 - h2).max(0.0)).sqrt() / w1n;
            let inner = ((in2 - h2).max(0.0)).sqrt() / w1n;
            let lo = (c - outer).floor() as i64 - 1;
            let hi = (c + outer).ceil() as i64 + 1;
            // Integers strictly inside the inner disk are skipped wholesale.
            let hole_lo = (c - inner).ceil() as i64 + 1;
            let hole_hi = (c + inner).floor() as i64 - 1;
            let runs: [(i64, i64); 2] = if inner > 1.0 && hole_lo <= hole_hi {
                [(lo, hole_lo - 1), (hole_hi + 1, hi)]
            } else {
                [(lo, hi), (1, 0)]
            };
            for (m0, m1) in runs {
                if m0 > m1 {
                    continue;
                }
                let mut ph = cis(self.alpha0 * n as f64 - self.beta0 * m0 as f64);
                let row = self.w2 * n as f64;
                for m in m0..=m1 {
                    let omega = self.w1 * m as f64 + row;
                    let r2w = omega.norm_sqr();
                    let inside = r2w >= in2 && (r2w < out2 || (last && r2w <= out2));
                    if inside && self.skip != Some((m, n)) {
                        let y = self.x + omega;
                        let r2 = y.norm_sqr();
                        let mut t = ph * self.power.eval(r2);
                        if self.a > 0 {
                            t *= y.conj().powu(self.a);
                        }
                        acc.add(t);
                    }
                    ph *= step;
                }
            }
        }
        acc.value()
    }
}

/// Σ* ⟨x₀,ω⟩ (x̄+ω̄)^a |x+ω|^{-2s} over |ω| ≤ shell_radius, shell by shell.
pub fn kronecker_direct(
    a: u32,
    x: C64,
    x0: C64,
    s: C64,
    lat: &ComplexLattice,
    settings: &EvalSettings,
) -> Result<C64> {
    settings.validate()?;
    let bound = f64::from(a) / 2.0 + 1.25;
    if s.re <= bound {
        return Err(Error::ConvergenceRegion {
            s: format!("{s}"),
            bound,
        });
    }
    let (alpha0, beta0) = lat.coords(x0);
    let skip = lat.lattice_coords(x).map(|(m, n)| (-m, -n));
    let kernel = DirectKernel {
        w1: lat.omega1(),
        w2: lat.omega2(),
        tau: lat.tau(),
        x,
        a,
        alpha0: alpha0 - alpha0.floor(),
        beta0: beta0 - beta0.floor(),
        skip,
        power: Power::new(s),
    };
    let radius = settings.shell_radius;
    let shells = radius.ceil() as usize;
    let width = radius / shells as f64;
    let parts = map_range(settings.execution, shells, |k| {
        kernel.shell(k as f64 * width, (k + 1) as f64 * width, k + 1 == shells)
    });
    let mut acc = ComplexSum::new();
    for p in parts {
        acc.add(p);
    }
    Ok(acc.value())
}

/// Lattice points ω with |c + ω|² ≤ r2max, in (n, m) order.
fn points_near(lat: &ComplexLattice, c: C64, r2max: f64) -> Vec<C64> {
    let (ca, cb) = lat.coords(c);
    let w1n = lat.omega1().norm();
    let tau = lat.tau();
    let r = r2max.sqrt() / w1n;
    let nlo = (-cb - r / tau.im).floor() as i64 - 1;
    let nhi = (-cb + r / tau.im).ceil() as i64 + 1;
    let mut out = Vec::new();
    for n in nlo..=nhi {
        let centre = -ca - (n as f64 + cb) * tau.re;
        let mlo = (centre - r).floor() as i64 - 1;
        let mhi = (centre + r).ceil() as i64 + 1;
        for m in mlo..=mhi {
            let omega = lat.point(m as f64, n as f64);
            if (c + omega).norm_sqr() <= r2max {
                out.push(omega);
            }
        }
    }
    out
}

/// Analytic continuation by splitting the Mellin integral of the theta
/// kernel at t = λ (in units of A(Λ)); λ = `settings.split`.
///
/// ```text
/// Γ(s)K_a(x,x₀,s) = (λ/A)^s Σ*⟨x₀,ω⟩(x̄+ω̄)^a G(s, λ|x+ω|²/A)
///   + ⟨x,x₀⟩ A^{a+1−2s} (λA)^{−s′} Σ*⟨x,μ⟩(x̄₀+μ̄)^a G(s′, |x₀+μ|²/(λA))
///   − E (λ/A)^s / s − ⟨x,x₀⟩ E′ A^{−s} λ^{s−1−a} / s′,
/// ```
/// with s′ = a+1−s and E, E′ the omitted singular terms (a = 0 only).
pub fn kronecker_continued(
    a: u32,
    x: C64,
    x0: C64,
    s: C64,
    lat: &ComplexLattice,
    settings: &EvalSettings,
) -> Result<C64> {
    settings.validate()?;
    if a > 1 {
        return Err(Error::InvalidSettings(format!(
            "continued route supports a ∈ {{0, 1}}, got {a}"
        )));
    }
    let lam = settings.split;
    let area = lat.area();
    let sp = C64::new(f64::from(a) + 1.0, 0.0) - s;
    let pxx0 = pairing(x, x0, lat);
    let x_in = lat.contains(x);
    let x0_in = lat.contains(x0);
    let e_prime = if a == 0 && x0_in {
        pairing(x, -x0, lat)
    } else {
        C64::new(0.0, 0.0)
    };
    if e_prime.norm() > 0.0 && sp.norm() < 1e-13 {
        return Err(Error::PoleEncountered { s: format!("{s}") });
    }
    let zmax = 50.0 + 2.0 * s.norm().max(sp.norm());

    let theta = |centre: C64, phase_pt: C64, exponent: C64, scale: f64, skip_origin: bool| -> C64 {
        let mut acc = ComplexSum::new();
        for omega in points_near(lat, centre, zmax / scale) {
            let y = centre + omega;
            let r2 = y.norm_sqr();
            if skip_origin && r2 < 1e-12 * area {
                continue;
            }
            let mut t = pairing(phase_pt, omega, lat) * upper_g(exponent, scale * r2);
            if a > 0 {
                t *= y.conj().powu(a);
            }
            acc.add(t);
        }
        acc.value()
    };

    let u = (s * (lam / area).ln()).exp() * theta(x, x0, s, lam / area, x_in);
    let v = (-sp * (lam * area).ln()).exp() * theta(x0, x, sp, 1.0 / (lam * area), x0_in);
    let area_pow = ((C64::new(f64::from(a) + 1.0, 0.0) - 2.0 * s) * area.ln()).exp();
    let mut bracket = u + pxx0 * area_pow * v;
    if e_prime.norm() > 0.0 {
        let pw = (-s * area.ln()).exp() * ((s - 1.0 - f64::from(a)) * lam.ln()).exp();
        bracket -= pxx0 * e_prime * pw / sp;
    }
    let mut out = rgamma(s) * bracket;
    if a == 0 && x_in {
        let e = pairing(x0, -x, lat);
        out -= e * (s * (lam / area).ln()).exp() * rgamma(s + 1.0);
    }
    Ok(out)
}
