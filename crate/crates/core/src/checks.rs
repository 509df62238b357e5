//! Named invariant suites. Each one is seeded, deterministic and returns
//! its per-case residuals together with the tolerance it was judged by.

use crate::chartheory::{
    dedekind_det_matrix, dedekind_det_spectral, extensions_of, subgroup_characters, CosetSystem,
    FiniteAbelianGroup, Subgroup,
};
use crate::error::{Error, Result};
use crate::kronecker::{k21, kronecker_continued, EvalSettings, Route};
use crate::lattice::{elementary_divisors, kernel_cosets, pairing, ComplexLattice, TorsionCoord};
use crate::numerics::gamma;
use crate::stark::{laplace_block_check, KappaClass, QuadNumber};
use crate::symbols::{
    conjugate_pair, divisor_regulator, lambda_map, SymbolDivisorData, TorsionDivisor,
};
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const FNEQN_TOL: f64 = 1e-8;
pub const DISTRIBUTION_TOL: f64 = 1e-9;
pub const MULT_BY_D_TOL: f64 = 1e-6;
pub const DEDEKIND_TOL: f64 = 1e-10;
pub const LAPLACE_TOL: f64 = 1e-9;
pub const CONJUGATION_TOL: f64 = 1e-10;
pub const ODDNESS_TOL: f64 = 1e-9;
pub const PERIODICITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fneqn,
    Distribution,
    Dedekind,
    Laplace,
    Conjugation,
    Oddness,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Fneqn,
        Suite::Distribution,
        Suite::Dedekind,
        Suite::Laplace,
        Suite::Conjugation,
        Suite::Oddness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Fneqn => "fneqn",
            Suite::Distribution => "distribution",
            Suite::Dedekind => "dedekind",
            Suite::Laplace => "laplace",
            Suite::Conjugation => "conjugation",
            Suite::Oddness => "oddness",
        }
    }

    pub fn run(self, seed: u64, settings: &EvalSettings) -> Result<SuiteReport> {
        match self {
            Suite::Fneqn => fneqn(seed, settings),
            Suite::Distribution => distribution(seed, settings),
            Suite::Dedekind => dedekind(seed),
            Suite::Laplace => laplace(seed),
            Suite::Conjugation => conjugation(seed, settings),
            Suite::Oddness => oddness(seed, settings),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckCase {
    pub label: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub cases: Vec<CheckCase>,
    pub max_residual: f64,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64) -> Self {
        Self {
            suite,
            seed,
            cases: vec![],
            max_residual: 0.0,
            passed: true,
        }
    }

    fn push(&mut self, label: String, residual: f64, tolerance: f64) {
        // NaN never passes.
        let passed = residual <= tolerance;
        self.passed &= passed;
        self.max_residual = self.max_residual.max(if residual.is_nan() {
            f64::INFINITY
        } else {
            residual
        });
        self.cases.push(CheckCase {
            label,
            residual,
            tolerance,
            passed,
        });
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckCase> {
        self.cases.iter().filter(|c| !c.passed)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

pub fn test_lattices() -> Vec<(&'static str, ComplexLattice)> {
    let seven = ComplexLattice::from_tau(c(0.5, 7f64.sqrt() / 2.0)).expect("non-degenerate");
    vec![
        ("Z[i]", ComplexLattice::gaussian()),
        ("Z[rho]", ComplexLattice::eisenstein()),
        ("Z[(1+sqrt-7)/2]", seven),
    ]
}

fn random_point(r: &mut ChaCha8Rng, lat: &ComplexLattice, n: i64) -> C64 {
    // Numerators avoid 0 so the point never lies in Λ.
    let a = r.gen_range(1..n) as f64 / n as f64;
    let b = r.gen_range(1..n) as f64 / n as f64;
    lat.point(a, b)
}

/// Γ(s)K_a(x,x₀,s) = ⟨x,x₀⟩ A^{a+1−2s} Γ(a+1−s) K_a(x₀,x,a+1−s). The dual
/// side runs with a different split point so the identity is not a
/// tautology of the evaluation scheme.
pub fn fneqn_residual(
    a: u32,
    x: C64,
    x0: C64,
    s: C64,
    lat: &ComplexLattice,
    settings: &EvalSettings,
) -> Result<f64> {
    let sp = c(f64::from(a) + 1.0, 0.0) - s;
    let lhs = gamma(s) * kronecker_continued(a, x, x0, s, lat, settings)?;
    let dual = kronecker_continued(
        a,
        x0,
        x,
        sp,
        lat,
        &settings.with_split(settings.split * 1.7),
    )?;
    let area_pow = ((c(f64::from(a) + 1.0, 0.0) - 2.0 * s) * lat.area().ln()).exp();
    let rhs = pairing(x, x0, lat) * area_pow * gamma(sp) * dual;
    Ok(rel(lhs, rhs))
}

pub fn fneqn(seed: u64, settings: &EvalSettings) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let lats = test_lattices();
    let mut rep = SuiteReport::new(Suite::Fneqn, seed);
    let svals = [c(0.7, 0.0), c(1.3, 0.0), c(1.0, 0.5)];
    for k in 0..20 {
        let (name, lat) = &lats[k % lats.len()];
        let x = random_point(&mut r, lat, 5);
        let x0 = random_point(&mut r, lat, 7);
        let a = (k / lats.len() % 2) as u32;
        for s in svals {
            let res = fneqn_residual(a, x, x0, s, lat, settings)?;
            rep.push(
                format!("{name} a={a} s={s} x={x:.4} x0={x0:.4}"),
                res,
                FNEQN_TOL,
            );
        }
    }
    Ok(rep)
}

/// deg φ · Σ_{t ∈ φ⁻¹Λ/Λ} K_{2,1}(u+t, Λ) against φ·K_{2,1}(φu, Λ) for an
/// endomorphism φ of Λ.
pub fn distribution_residual(
    phi: C64,
    u: C64,
    lat: &ComplexLattice,
    settings: &EvalSettings,
) -> Result<f64> {
    let iso = elementary_divisors(phi, lat, lat)?;
    let mut lhs = c(0.0, 0.0);
    for t in kernel_cosets(&iso) {
        lhs += k21(u + t.to_complex(lat), lat, settings)?;
    }
    lhs *= iso.degree as f64;
    let rhs = phi * k21(phi * u, lat, settings)?;
    Ok(rel(lhs, rhs))
}

/// d^{2s−a} K_a(dx, y₀, s) = Σ_t ⟨y₀, dt⟩ K_a(x+t, dy₀, s) over
/// t = (iω₁+jω₂)/d, 0 ≤ i,j < d.
pub fn mult_by_d_residual(
    d: i64,
    a: u32,
    x: C64,
    y0: C64,
    s: C64,
    lat: &ComplexLattice,
    settings: &EvalSettings,
) -> Result<f64> {
    let df = d as f64;
    let scale = ((2.0 * s - f64::from(a)) * df.ln()).exp();
    let lhs = scale * kronecker_continued(a, df * x, y0, s, lat, settings)?;
    let mut rhs = c(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            let t = lat.point(i as f64 / df, j as f64 / df);
            rhs += pairing(y0, df * t, lat)
                * kronecker_continued(a, x + t, df * y0, s, lat, settings)?;
        }
    }
    Ok(rel(lhs, rhs))
}

pub fn distribution(seed: u64, settings: &EvalSettings) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let mut rep = SuiteReport::new(Suite::Distribution, seed);
    let gauss = ComplexLattice::gaussian();
    let eis = ComplexLattice::eisenstein();
    let cases = [
        ("Z[i]", &gauss, c(2.0, 0.0)),
        ("Z[i]", &gauss, c(1.0, 1.0)),
        ("Z[i]", &gauss, c(2.0, 1.0)),
        ("Z[rho]", &eis, c(2.0, 0.0)),
    ];
    for (name, lat, phi) in cases {
        for _ in 0..3 {
            let n = r.gen_range(3..=12);
            let u = random_point(&mut r, lat, n);
            let res = distribution_residual(phi, u, lat, settings)?;
            rep.push(format!("{name} phi={phi} u={u:.4}"), res, DISTRIBUTION_TOL);
        }
    }
    let s = c(2.5, 0.0);
    for (name, lat) in test_lattices() {
        for (d, a) in [(2, 0), (2, 1), (3, 1)] {
            let x = random_point(&mut r, &lat, 11);
            let y0 = random_point(&mut r, &lat, 13);
            let res = mult_by_d_residual(d, a, x, y0, s, &lat, settings)?;
            rep.push(format!("{name} d={d} a={a} s=2.5"), res, MULT_BY_D_TOL);
        }
    }
    Ok(rep)
}

/// (Γ orders, generators of G) for the six configurations.
pub fn dedekind_configurations() -> Vec<(Vec<i64>, Vec<Vec<i64>>)> {
    vec![
        (vec![2], vec![vec![0]]),
        (vec![4], vec![vec![2]]),
        (vec![6], vec![vec![3]]),
        (vec![2, 4], vec![vec![0, 2]]),
        (vec![3, 3], vec![vec![1, 0]]),
        (vec![2, 6], vec![vec![1, 2]]),
    ]
}

pub fn dedekind(seed: u64) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let mut rep = SuiteReport::new(Suite::Dedekind, seed);
    let configs = dedekind_configurations();
    let per = 100usize.div_ceil(configs.len());
    for (orders, gens) in configs {
        let group = FiniteAbelianGroup::new(orders.clone())?;
        let sub = Subgroup::generated(&group, &gens);
        let chars = subgroup_characters(&group, &sub);
        for k in 0..per {
            let chi = &chars[k % chars.len()];
            debug_assert_eq!(
                extensions_of(&group, &sub, chi)?.len(),
                group.order() / sub.order()
            );
            let f: Vec<C64> = (0..group.order())
                .map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
                .collect();
            let spectral = dedekind_det_spectral(&group, &sub, chi, &f)?;
            let fixed =
                dedekind_det_matrix(&group, &sub, chi, &f, &CosetSystem::new(&group, &sub)?);
            let moved = dedekind_det_matrix(
                &group,
                &sub,
                chi,
                &f,
                &CosetSystem::random(&group, &sub, &mut r)?,
            );
            let scale = spectral.norm().max(1.0);
            let label = format!("Gamma={orders:?} G={gens:?} #{k}");
            rep.push(
                format!("{label} matrix"),
                (spectral - fixed).norm() / scale,
                DEDEKIND_TOL,
            );
            rep.push(
                format!("{label} resampled"),
                (spectral - moved).norm() / scale,
                DEDEKIND_TOL,
            );
        }
    }
    Ok(rep)
}

pub fn laplace(seed: u64) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let mut rep = SuiteReport::new(Suite::Laplace, seed);
    let ds = [-3, -4, -7, -8, -11, -19];
    for h in 1..=3usize {
        for k in 0..50 {
            let d = ds[r.gen_range(0..ds.len())];
            let mut quad = || loop {
                let q = QuadNumber {
                    a: r.gen_range(-4..=4),
                    b: r.gen_range(-3..=3),
                };
                if q.a != 0 || q.b != 0 {
                    return q;
                }
            };
            let (pp, pm) = (quad(), quad());
            let m: Vec<Vec<C64>> = (0..h)
                .map(|_| {
                    (0..h)
                        .map(|_| c(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)))
                        .collect()
                })
                .collect();
            let chk = match laplace_block_check(&m, pp, pm, d) {
                Ok(chk) => chk,
                Err(Error::SingularR { .. }) => continue,
                Err(e) => return Err(e),
            };
            let want = if h % 2 == 0 {
                KappaClass::Rational
            } else {
                KappaClass::RationalTimesSqrtD
            };
            let label = format!("h={h} D={d} #{k}");
            rep.push(
                format!("{label} class"),
                if chk.class == want {
                    chk.class_residual
                } else {
                    f64::INFINITY
                },
                LAPLACE_TOL,
            );
            rep.push(
                format!("{label} closed form"),
                chk.closed_form_residual,
                LAPLACE_TOL,
            );
            let recognized = chk
                .recognized
                .as_ref()
                .map_or(f64::INFINITY, |x| x.residual);
            rep.push(format!("{label} recognition"), recognized, LAPLACE_TOL);
        }
    }
    Ok(rep)
}

fn random_torsion(r: &mut ChaCha8Rng, n: i64) -> TorsionCoord {
    loop {
        let t = TorsionCoord::from_level(r.gen_range(0..n), r.gen_range(0..n), n);
        if !t.is_zero() {
            return t;
        }
    }
}

fn random_divisor(r: &mut ChaCha8Rng, n: i64) -> TorsionDivisor {
    let mut d = TorsionDivisor::new();
    for _ in 0..r.gen_range(1..=3) {
        let m = r.gen_range(1..=3) * if r.gen_bool(0.5) { 1 } else { -1 };
        d.add_point(random_torsion(r, n), m);
    }
    d
}

pub fn conjugation(seed: u64, settings: &EvalSettings) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let mut rep = SuiteReport::new(Suite::Conjugation, seed);
    let lats = test_lattices();
    for k in 0..10 {
        let (name, lat) = &lats[k % lats.len()];
        let n = r.gen_range(3..=12);
        let sym = SymbolDivisorData::new(random_divisor(&mut r, n), random_divisor(&mut r, n));
        let emb = conjugate_pair("Phi1", lat);
        let v = lambda_map(&sym, &emb, settings)?;
        let direct =
            crate::symbols::regulator_at_embedding(&sym.conjugated(), &lat.conjugate(), settings)?;
        let phi = v.get("Phi1").unwrap_or_default();
        let res = (direct - phi.conj()).norm() / phi.norm().max(1.0);
        rep.push(format!("{name} level {n} #{k}"), res, CONJUGATION_TOL);
    }
    Ok(rep)
}

pub fn oddness(seed: u64, settings: &EvalSettings) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let mut rep = SuiteReport::new(Suite::Oddness, seed);
    for (name, lat) in test_lattices() {
        for (a, b) in [(1, 0), (0, 1), (1, 1)] {
            let u = lat.point(a as f64 / 2.0, b as f64 / 2.0);
            rep.push(
                format!("{name} 2-torsion {u:.3}"),
                k21(u, &lat, settings)?.norm(),
                ODDNESS_TOL,
            );
        }
        for _ in 0..4 {
            let n = r.gen_range(3..=12);
            let u = random_point(&mut r, &lat, n);
            let v = k21(u, &lat, settings)?;
            let odd = (k21(-u, &lat, settings)? + v).norm() / v.norm().max(1.0);
            rep.push(format!("{name} odd {u:.3}"), odd, PERIODICITY_TOL);
            let w = lat.point(r.gen_range(-3..=3) as f64, r.gen_range(-3..=3) as f64);
            let per = (k21(u + w, &lat, settings)? - v).norm() / v.norm().max(1.0);
            rep.push(
                format!("{name} period {u:.3} + {w:.1}"),
                per,
                PERIODICITY_TOL,
            );
        }
        for _ in 0..2 {
            let n = r.gen_range(3..=12);
            let d = random_divisor(&mut r, n);
            let sym = d.plus(&d.negated_points());
            let reg = divisor_regulator(&sym, &lat, settings)?;
            rep.push(format!("{name} symmetric divisor"), reg.norm(), ODDNESS_TOL);
        }
    }
    Ok(rep)
}

/// Route used by the suites when the caller leaves it on Auto.
pub fn default_settings() -> EvalSettings {
    EvalSettings {
        route: Route::Auto,
        ..EvalSettings::default()
    }
}
