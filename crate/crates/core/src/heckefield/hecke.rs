use super::field::{ImagQuadField, OkElem};
use super::ray::{RayClassGroupData, ResidueRing};
use crate::chartheory::{all_characters, angle_value, CharacterData};
use crate::error::{Error, Result};
use crate::kronecker::{k21, kronecker_continued, EvalSettings};
use crate::lattice::{make_lattice, ComplexLattice, IntMat2};
use crate::numerics::ComplexSum;
use crate::par::{map_range, Execution};
use crate::C64;
use num_rational::Rational64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// φ((λ)) = φ_fin(λ)·λ with φ_fin a character of (O_K/g)^× equal to u⁻¹ on
/// roots of unity.
#[derive(Clone, Debug, Serialize)]
pub struct HeckeCharData {
    #[serde(skip)]
    pub rc: Arc<RayClassGroupData>,
    pub phi_fin: CharacterData,
    pub index: usize,
}

impl HeckeCharData {
    pub fn field(&self) -> &ImagQuadField {
        &self.rc.field
    }

    pub fn modulus(&self) -> OkElem {
        self.rc.modulus
    }

    pub fn phi_fin_angle(&self, lambda: OkElem) -> Result<Rational64> {
        let v = self
            .rc
            .residue_units
            .log(lambda)
            .ok_or_else(|| Error::NotCoprime {
                elem: lambda.to_string(),
                modulus: self.rc.modulus.to_string(),
            })?;
        Ok(self.phi_fin.angle(&v))
    }

    pub fn phi_fin(&self, lambda: OkElem) -> Result<C64> {
        Ok(angle_value(self.phi_fin_angle(lambda)?))
    }

    /// φ((λ)).
    pub fn phi(&self, lambda: OkElem) -> Result<C64> {
        Ok(self.phi_fin(lambda)? * self.field().embed(lambda))
    }

    /// φ_fin(λ) as a root of unity of K, when it is one.
    pub fn phi_fin_unit(&self, lambda: OkElem) -> Result<Option<OkElem>> {
        let a = self.phi_fin_angle(lambda)?;
        let w = self.field().num_units() as i64;
        let k = a * Rational64::from_integer(w);
        Ok(k.is_integer()
            .then(|| self.field().units()[k.to_integer() as usize]))
    }

    /// Whether every value of φ_fin lies in K.
    pub fn is_k_valued(&self) -> bool {
        let w = self.field().num_units() as i64;
        self.rc
            .residue_units
            .residues()
            .into_iter()
            .all(|r| (self.phi_fin_angle(r).unwrap() * Rational64::from_integer(w)).is_integer())
    }

    /// Multiplier realizing the Galois action of the class of β on torsion:
    /// φ_fin(β)·β when that lies in O_K, otherwise β. The flag reports the
    /// fallback.
    pub fn galois_multiplier(&self, beta: OkElem) -> Result<(OkElem, bool)> {
        Ok(match self.phi_fin_unit(beta)? {
            Some(u) => (self.field().mul(u, beta), false),
            None => (beta, true),
        })
    }

    /// The same character read on a finer modulus gP through O/gP → O/g.
    pub fn pullback(&self, finer: Arc<RayClassGroupData>) -> Result<HeckeCharData> {
        let k = self.field();
        if !k.divides(self.modulus(), finer.modulus) {
            return Err(Error::InvalidSettings(format!(
                "{} does not divide {}",
                self.modulus(),
                finer.modulus
            )));
        }
        let residues = finer.residue_units.residues();
        let want: Vec<Rational64> = residues
            .iter()
            .map(|&r| self.phi_fin_angle(r))
            .collect::<Result<_>>()?;
        let grp = finer.residue_units.group();
        let phi_fin = all_characters(grp)
            .into_iter()
            .find(|c| {
                residues
                    .iter()
                    .zip(&want)
                    .all(|(&r, a)| c.angle(&finer.residue_units.log(r).unwrap()) == *a)
            })
            .ok_or_else(|| {
                Error::InconsistentCharacter(
                    "no character of the finer residue group matches".into(),
                )
            })?;
        Ok(HeckeCharData {
            rc: finer,
            phi_fin,
            index: self.index,
        })
    }
}

/// Every φ_fin with φ_fin(u) = u⁻¹ on the roots of unity, in enumeration order.
pub fn hecke_characters(rc: &Arc<RayClassGroupData>) -> Vec<HeckeCharData> {
    let k = &rc.field;
    let w = k.num_units() as i64;
    let unit_data: Vec<(Vec<i64>, Rational64)> = k
        .units()
        .iter()
        .enumerate()
        .map(|(e, &u)| {
            let a = Rational64::new(-(e as i64), w);
            (rc.residue_units.log(u).unwrap(), a - a.floor())
        })
        .collect();
    all_characters(rc.residue_units.group())
        .into_iter()
        .filter(|c| unit_data.iter().all(|(v, a)| c.angle(v) == *a))
        .enumerate()
        .map(|(index, phi_fin)| HeckeCharData {
            rc: rc.clone(),
            phi_fin,
            index,
        })
        .collect()
}

pub fn hecke_character(rc: &Arc<RayClassGroupData>, index: usize) -> Result<HeckeCharData> {
    let all = hecke_characters(rc);
    let available = all.len();
    all.into_iter()
        .nth(index)
        .ok_or(Error::NoHeckeCharacter { index, available })
}

/// L(s, φ̄, γ) when `conjugated`, L(s, φ, γ) otherwise.
#[derive(Clone, Debug, Serialize)]
pub struct PartialLSpec {
    pub hecke: HeckeCharData,
    pub class_index: usize,
    pub conjugated: bool,
}

const DIRECT_MARGIN: f64 = 0.05;

/// Σ φ̄(C) N(C)^{-s} over principal ideals C = (λ), N(C) ≤ bound, sorted
/// into ray classes. One generator per ideal via the canonical sector.
pub fn partial_l_direct_all(
    hecke: &HeckeCharData,
    conjugated: bool,
    s: C64,
    norm_bound: i64,
    exec: Execution,
) -> Result<Vec<C64>> {
    if s.re <= 1.5 + DIRECT_MARGIN {
        return Err(Error::ConvergenceRegion {
            s: s.to_string(),
            bound: 1.5 + DIRECT_MARGIN,
        });
    }
    let k = hecke.field();
    let rc = &hecke.rc;
    let ring = rc.residue_units.ring();
    let classes = rc.class_table();
    let phi_vals: Vec<Option<C64>> = (0..ring.size())
        .map(|i| hecke.phi_fin(ring.element(i)).ok())
        .collect();
    let nclass = rc.order();
    let rows = k.max_row(norm_bound) as usize + 1;
    let real_s = (s.im == 0.0).then_some(s.re);
    let partial = map_range(exec, rows, |y| {
        let mut sums = vec![ComplexSum::new(); nclass];
        for lam in k.row(y as i64, norm_bound) {
            if !k.in_sector(lam) {
                continue;
            }
            let idx = ring.index(lam);
            let Some(class) = classes[idx] else { continue };
            let n = k.norm(lam) as f64;
            let pw = match real_s {
                Some(2.0) => C64::new(1.0 / (n * n), 0.0),
                Some(r) => C64::new(n.powf(-r), 0.0),
                None => (-s * n.ln()).exp(),
            };
            let phi = phi_vals[idx].unwrap() * k.embed(lam);
            let v = if conjugated { phi.conj() } else { phi };
            sums[class].add(v * pw);
        }
        sums.into_iter().map(|c| c.value()).collect::<Vec<_>>()
    });
    let mut out = vec![ComplexSum::new(); nclass];
    for row in partial {
        for (o, v) in out.iter_mut().zip(row) {
            o.add(v);
        }
    }
    Ok(out.into_iter().map(|c| c.value()).collect())
}

pub fn partial_l_direct(
    spec: &PartialLSpec,
    s: C64,
    norm_bound: i64,
    exec: Execution,
) -> Result<C64> {
    Ok(partial_l_direct_all(&spec.hecke, spec.conjugated, s, norm_bound, exec)?[spec.class_index])
}

/// Λ = Ω·O_K.
pub fn omega_lattice(field: &ImagQuadField, omega: C64) -> Result<ComplexLattice> {
    make_lattice(omega, omega * field.w())
}

/// ν = Ω/g, a primitive g-torsion point of C/ΩO_K.
pub fn nu(hecke: &HeckeCharData, omega: C64) -> C64 {
    omega / hecke.field().embed(hecke.modulus())
}

fn class_rep_factor(hecke: &HeckeCharData, beta: OkElem) -> Result<C64> {
    Ok(hecke.phi_fin(beta)?.conj() / hecke.rc.units_congruent_to_one as f64)
}

/// L(s, φ̄, γ) from K₁(βν, 0, s, ΩO_K), β any generator with class γ:
/// conj φ_fin(β)/m_g · |ν|^{2s}/ν̄ · K₁(βν, 0, s).
pub fn partial_l_kronecker_at(
    hecke: &HeckeCharData,
    beta: OkElem,
    conjugated: bool,
    s: C64,
    omega: C64,
    settings: &EvalSettings,
) -> Result<C64> {
    let s_eval = if conjugated { s } else { s.conj() };
    let lat = omega_lattice(hecke.field(), omega)?;
    let nu = nu(hecke, omega);
    let x = hecke.field().embed(beta) * nu;
    let k1 = kronecker_continued(1, x, C64::new(0.0, 0.0), s_eval, &lat, settings)?;
    let v = class_rep_factor(hecke, beta)? * (s_eval * nu.norm_sqr().ln()).exp() / nu.conj() * k1;
    Ok(if conjugated { v } else { v.conj() })
}

pub fn partial_l_kronecker(
    spec: &PartialLSpec,
    s: C64,
    omega: C64,
    settings: &EvalSettings,
) -> Result<C64> {
    let beta = spec.hecke.rc.class_reps[spec.class_index];
    partial_l_kronecker_at(&spec.hecke, beta, spec.conjugated, s, omega, settings)
}

/// L′(0, φ̄, γ) = conj φ_fin(β)/m_g · A(ΩO_K)²/ν̄ · K_{2,1}(βν, ΩO_K).
pub fn partial_l_deriv0_at(
    hecke: &HeckeCharData,
    beta: OkElem,
    conjugated: bool,
    omega: C64,
    settings: &EvalSettings,
) -> Result<C64> {
    let lat = omega_lattice(hecke.field(), omega)?;
    let nu = nu(hecke, omega);
    let x = hecke.field().embed(beta) * nu;
    let a = lat.area();
    let v = class_rep_factor(hecke, beta)? * (a * a) / nu.conj() * k21(x, &lat, settings)?;
    Ok(if conjugated { v } else { v.conj() })
}

pub fn partial_l_deriv0(spec: &PartialLSpec, omega: C64, settings: &EvalSettings) -> Result<C64> {
    let beta = spec.hecke.rc.class_reps[spec.class_index];
    partial_l_deriv0_at(&spec.hecke, beta, spec.conjugated, omega, settings)
}

/// L′(0, φ̄, γ) for every class γ, in class order.
pub fn partial_l_deriv0_all(
    hecke: &HeckeCharData,
    conjugated: bool,
    omega: C64,
    settings: &EvalSettings,
) -> Result<Vec<C64>> {
    let reps = &hecke.rc.class_reps;
    map_range(settings.execution, reps.len(), |i| {
        partial_l_deriv0_at(hecke, reps[i], conjugated, omega, settings)
    })
    .into_iter()
    .collect()
}

/// π = 1 − φ̄((P))·χ([P]).
pub fn twist_factor(hecke: &HeckeCharData, chi: &CharacterData, p: OkElem) -> Result<C64> {
    let class = hecke.rc.artin_symbol(p)?;
    let chi_p = chi.value(&hecke.rc.group().element(class));
    let pi = C64::new(1.0, 0.0) - hecke.phi(p)?.conj() * chi_p;
    if pi.norm() < 1e-12 {
        return Err(Error::DegenerateTwist {
            prime: p.to_string(),
        });
    }
    Ok(pi)
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistIdentity {
    pub prime: OkElem,
    #[serde(with = "crate::json::complex")]
    pub pi: C64,
    #[serde(with = "crate::json::complex")]
    pub twisted: C64,
    #[serde(with = "crate::json::complex")]
    pub untwisted: C64,
    pub residual: f64,
}

/// L′_{gP}(0, φ̄, γ) for every class γ mod g: the sum over the classes
/// mod gP lying above γ, with φ_fin pulled back to gP.
pub fn deriv0_on_finer_modulus(
    hecke: &HeckeCharData,
    p: OkElem,
    omega: C64,
    settings: &EvalSettings,
) -> Result<Vec<C64>> {
    let k = hecke.field();
    let finer = Arc::new(RayClassGroupData::new(k, k.mul(hecke.modulus(), p))?);
    let h2 = hecke.pullback(finer.clone())?;
    let vals = partial_l_deriv0_all(&h2, true, omega, settings)?;
    let mut out = vec![C64::new(0.0, 0.0); hecke.rc.order()];
    for (rep, v) in finer.class_reps.iter().zip(vals) {
        out[hecke.rc.artin_symbol(*rep)?] += v;
    }
    Ok(out)
}

/// Σ_τ χ(τ)L′_{gP}(0,φ̄,γτ) against π·Σ_τ χ(τ)L′_g(0,φ̄,γτ).
pub fn twist_identity(
    hecke: &HeckeCharData,
    chi: &CharacterData,
    p: OkElem,
    gamma: usize,
    omega: C64,
    settings: &EvalSettings,
) -> Result<TwistIdentity> {
    if !super::ray::coprime(hecke.field(), p, hecke.modulus()) {
        return Err(Error::NotCoprime {
            elem: p.to_string(),
            modulus: hecke.modulus().to_string(),
        });
    }
    let pi = twist_factor(hecke, chi, p)?;
    let coarse = partial_l_deriv0_all(hecke, true, omega, settings)?;
    let fine = deriv0_on_finer_modulus(hecke, p, omega, settings)?;
    let grp = hecke.rc.group();
    let sum = |vals: &[C64]| -> C64 {
        (0..grp.order())
            .map(|t| chi.value(&grp.element(t)) * vals[grp.add_idx(gamma, t)])
            .sum()
    };
    let twisted = sum(&fine);
    let untwisted = sum(&coarse);
    let residual =
        (twisted - pi * untwisted).norm() / (pi * untwisted).norm().max(f64::MIN_POSITIVE);
    Ok(TwistIdentity {
        prime: p,
        pi,
        twisted,
        untwisted,
        residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeRWitness {
    pub lambda: OkElem,
    pub psi_value: OkElem,
    pub norm: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeRScan {
    pub witness: Option<TypeRWitness>,
    pub scanned: usize,
    /// Ideals where ψ((λ)) falls outside K, so the congruence is not tested.
    pub skipped_outside_k: usize,
    pub even_modulus: bool,
}

/// Search for (λ) with ψ((λ)) ≡ −1 mod N, N(λ) ≤ bound, in order of norm.
pub fn type_r_scan(hecke: &HeckeCharData, n: OkElem, norm_bound: i64) -> Result<TypeRScan> {
    let k = hecke.field();
    let even_modulus = k.divides(n, OkElem::int(2));
    let mut out = TypeRScan {
        witness: None,
        scanned: 0,
        skipped_outside_k: 0,
        even_modulus,
    };
    if n.is_zero() || k.is_unit(n) {
        return Ok(out);
    }
    let ring = ResidueRing::new(k, n)?;
    let mut cands: Vec<OkElem> = k
        .elements_with_norm_at_most(norm_bound)
        .into_iter()
        .filter(|&l| k.in_sector(l) && hecke.rc.artin_symbol(l).is_ok())
        .collect();
    cands.sort_by_key(|&l| (k.norm(l), l.y, l.x));
    for lam in cands {
        out.scanned += 1;
        let Some(u) = hecke.phi_fin_unit(lam)? else {
            out.skipped_outside_k += 1;
            continue;
        };
        let psi = k.mul(u, lam);
        if ring.is_zero(k.add(psi, OkElem::int(1))) {
            out.witness = Some(TypeRWitness {
                lambda: lam,
                psi_value: psi,
                norm: k.norm(lam),
            });
            break;
        }
    }
    Ok(out)
}

/// A(Λ_A) = |h·Ω|²·√|D| / (2π·N(A)).
pub fn area_of_class_lattice(field: &ImagQuadField, omega: C64, a: OkElem, h: C64) -> f64 {
    (h * omega).norm_sqr() * (-field.discriminant() as f64).sqrt()
        / (2.0 * PI * field.norm(a) as f64)
}

/// Integer matrix of multiplication by β on the coordinates of ΩO_K.
pub fn multiplier_matrix(field: &ImagQuadField, beta: OkElem) -> IntMat2 {
    let m = field.mul(beta, OkElem::new(0, 1));
    [[beta.x, m.x], [beta.y, m.y]]
}
