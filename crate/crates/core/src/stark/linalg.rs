//! Regulator matrices, the Laplace block lemma, and the coefficient
//! formulas for both embedding cases.

use super::recognize::{recognize, Recognition};
use crate::chartheory::{CharacterData, FiniteAbelianGroup};
use crate::error::{Error, Result};
use crate::json::Cx;
use crate::kronecker::EvalSettings;
use crate::lattice::{ComplexLattice, IntMat2};
use crate::numerics::det;
use crate::par::map_range;
use crate::symbols::{galois_act, regulator_at_embedding, Embedding, SymbolDivisorData};
use crate::C64;
use serde::{Deserialize, Serialize};

/// a + b√D.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadNumber {
    pub a: i64,
    pub b: i64,
}

impl QuadNumber {
    pub fn value(&self, d: i64) -> C64 {
        C64::new(self.a as f64, 0.0) + sqrt_d(d) * self.b as f64
    }
}

pub fn sqrt_d(d: i64) -> C64 {
    if d < 0 {
        C64::new(0.0, (-d as f64).sqrt())
    } else {
        C64::new((d as f64).sqrt(), 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaClass {
    Rational,
    RationalTimesSqrtD,
}

#[derive(Clone, Debug, Serialize)]
pub struct LaplaceCheck {
    pub h: usize,
    pub kappa: Cx,
    /// (π⁺π̄⁻ − π⁻π̄⁺)^h.
    pub closed_form: Cx,
    pub class: KappaClass,
    pub recognized: Option<Recognition>,
    /// Imaginary (resp. real) part left over after the class projection, relative.
    pub class_residual: f64,
    pub closed_form_residual: f64,
}

/// κ = det[[π⁺R, conj(π⁺R)], [π⁻R, conj(π⁻R)]] / (det R · det R̄) by brute
/// force, with the closed form (π⁺π̄⁻ − π⁻π̄⁺)^h.
pub fn laplace_kappa(r: &[Vec<C64>], pp: C64, pm: C64) -> Result<(C64, C64)> {
    let h = r.len();
    let dr = det(r);
    if dr.norm() < 1e-12 {
        return Err(Error::SingularR { det: dr.norm() });
    }
    let mut big = vec![vec![C64::new(0.0, 0.0); 2 * h]; 2 * h];
    for i in 0..h {
        for j in 0..h {
            big[i][j] = pp * r[i][j];
            big[i][j + h] = (pp * r[i][j]).conj();
            big[i + h][j] = pm * r[i][j];
            big[i + h][j + h] = (pm * r[i][j]).conj();
        }
    }
    let kappa = det(&big) / (dr * dr.conj());
    let closed = (pp * pm.conj() - pm * pp.conj()).powu(h as u32);
    Ok((kappa, closed))
}

pub fn laplace_block_check(
    r: &[Vec<C64>],
    pi_plus: QuadNumber,
    pi_minus: QuadNumber,
    d: i64,
) -> Result<LaplaceCheck> {
    let h = r.len();
    let (pp, pm) = (pi_plus.value(d), pi_minus.value(d));
    let (kappa, closed) = laplace_kappa(r, pp, pm)?;
    // κ can vanish (π⁺ ∥ π⁻), so measure against its natural size.
    let scale = (pp.norm() * pm.norm()).powi(h as i32).max(1e-12);
    let (class, x, off) = if h % 2 == 0 {
        (KappaClass::Rational, kappa.re, kappa.im)
    } else {
        let y = kappa / sqrt_d(d);
        (
            KappaClass::RationalTimesSqrtD,
            y.re,
            y.im * sqrt_d(d).norm(),
        )
    };
    Ok(LaplaceCheck {
        h,
        kappa: Cx(kappa),
        closed_form: Cx(closed),
        class,
        recognized: recognize(x, 1000, 1e-9),
        class_residual: off.abs() / scale,
        closed_form_residual: (kappa - closed).norm() / scale,
    })
}

pub fn expected_zero_order(n: usize, dim_v: usize) -> usize {
    n * dim_v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyCase {
    Big,
    Small,
}

/// Embeddings listed as Φ₁, Φ̄₁, Φ₂, Φ̄₂, …
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingFamily {
    pub case: FamilyCase,
    pub embeddings: Vec<Embedding>,
}

impl EmbeddingFamily {
    pub fn big(lattices: &[(String, ComplexLattice)]) -> Self {
        let embeddings = lattices
            .iter()
            .flat_map(|(label, lat)| crate::symbols::conjugate_pair(label, lat))
            .collect();
        Self {
            case: FamilyCase::Big,
            embeddings,
        }
    }

    pub fn labels(&self) -> Vec<String> {
        self.embeddings.iter().map(|e| e.label.clone()).collect()
    }

    /// Conjugation as a permutation of label indices.
    pub fn conjugation(&self) -> Vec<usize> {
        self.embeddings
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let partner = match &e.conjugate_of {
                    Some(p) => p.clone(),
                    None => format!("{}bar", e.label),
                };
                self.embeddings
                    .iter()
                    .position(|f| f.label == partner)
                    .unwrap_or(i)
            })
            .collect()
    }
}

/// Regulator of a symbol at one embedding; conjugate labels are evaluated
/// on the conjugate lattice with conjugated torsion coordinates.
pub fn regulator_at(
    sym: &SymbolDivisorData,
    e: &Embedding,
    settings: &EvalSettings,
) -> Result<C64> {
    if e.conjugate_of.is_some() {
        regulator_at_embedding(&sym.conjugated(), &e.lattice, settings)
    } else {
        regulator_at_embedding(sym, &e.lattice, settings)
    }
}

/// reg_M(τ) for every τ: rows ξ₁₊, ξ₁₋, ξ₂₊, …; columns in family order.
#[derive(Clone, Debug, Serialize)]
pub struct RegulatorBlocks {
    pub columns: Vec<String>,
    pub per_tau: Vec<Vec<Vec<Cx>>>,
    /// max |reg_Φ̄ − conj reg_Φ| over all entries.
    pub conjugation_residual: f64,
}

impl RegulatorBlocks {
    pub fn matrix(&self, tau: usize) -> Vec<Vec<C64>> {
        self.per_tau[tau]
            .iter()
            .map(|r| r.iter().map(|c| c.0).collect())
            .collect()
    }

    pub fn size(&self) -> usize {
        self.per_tau.first().map_or(0, |m| m.len())
    }
}

pub fn build_blocks(
    pairs: &[(SymbolDivisorData, SymbolDivisorData)],
    family: &EmbeddingFamily,
    galois: &[IntMat2],
    settings: &EvalSettings,
) -> Result<RegulatorBlocks> {
    let symbols: Vec<&SymbolDivisorData> = pairs.iter().flat_map(|(p, m)| [p, m]).collect();
    let per_tau_syms: Vec<Vec<SymbolDivisorData>> = galois
        .iter()
        .map(|g| {
            symbols
                .iter()
                .map(|s| galois_act(s, g))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    build_blocks_from(&per_tau_syms, family, settings)
}

/// Blocks from already-transported symbols: `per_tau[τ][i]` is ξᵢ^τ.
pub fn build_blocks_from(
    per_tau: &[Vec<SymbolDivisorData>],
    family: &EmbeddingFamily,
    settings: &EvalSettings,
) -> Result<RegulatorBlocks> {
    let nsym = per_tau.first().map_or(0, |v| v.len());
    let ncol = family.embeddings.len();
    let jobs = per_tau.len() * nsym * ncol;
    let vals = map_range(settings.execution, jobs, |k| {
        let (t, rest) = (k / (nsym * ncol), k % (nsym * ncol));
        let (i, j) = (rest / ncol, rest % ncol);
        regulator_at(&per_tau[t][i], &family.embeddings[j], settings)
    });
    let vals: Vec<C64> = vals.into_iter().collect::<Result<_>>()?;
    let conj = family.conjugation();
    let mut residual: f64 = 0.0;
    let mut out = vec![];
    for t in 0..per_tau.len() {
        let mut m = vec![];
        for i in 0..nsym {
            let row: Vec<C64> = (0..ncol).map(|j| vals[(t * nsym + i) * ncol + j]).collect();
            for (j, &cj) in conj.iter().enumerate() {
                residual = residual.max((row[j] - row[cj].conj()).norm());
            }
            m.push(row.into_iter().map(Cx).collect());
        }
        out.push(m);
    }
    Ok(RegulatorBlocks {
        columns: family.labels(),
        per_tau: out,
        conjugation_residual: residual,
    })
}

pub fn chi_values(chi: &CharacterData, group: &FiniteAbelianGroup) -> Vec<C64> {
    group.elements().iter().map(|e| chi.value(e)).collect()
}

/// Σ_τ χ(τ)·reg_M(τ).
pub fn chi_weighted(chi_vals: &[C64], blocks: &RegulatorBlocks) -> Vec<Vec<C64>> {
    let n = blocks.size();
    let ncol = blocks.columns.len();
    let mut m = vec![vec![C64::new(0.0, 0.0); ncol]; n];
    for (t, &c) in chi_vals.iter().enumerate() {
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += c * blocks.per_tau[t][i][j].0;
            }
        }
    }
    m
}

/// (−√D)^{n/2}·det(Σ_τ χ(τ)·reg_M(τ)) for a one-dimensional χ.
pub fn stark_regulator_case_big(chi_vals: &[C64], blocks: &RegulatorBlocks, d: i64) -> Result<C64> {
    let m = chi_weighted(chi_vals, blocks);
    if m.len() != blocks.columns.len() || m.len() % 2 != 0 {
        return Err(Error::InvalidSettings(format!(
            "regulator matrix must be square of even size, got {}×{}",
            m.len(),
            blocks.columns.len()
        )));
    }
    Ok((-sqrt_d(d)).powu((m.len() / 2) as u32) * det(&m))
}

/// Π over all characters of R(E, χ) against the regular-representation
/// determinant det(Σ_τ P_τ ⊗ reg_M(τ)).
#[derive(Clone, Debug, Serialize)]
pub struct FrobeniusCheck {
    pub product: Cx,
    pub regular: Cx,
    pub residual: f64,
}

pub fn frobenius_check(
    group: &FiniteAbelianGroup,
    blocks: &RegulatorBlocks,
    d: i64,
) -> Result<FrobeniusCheck> {
    let chars = crate::chartheory::all_characters(group);
    let mut product = C64::new(1.0, 0.0);
    for chi in &chars {
        product *= stark_regulator_case_big(&chi_values(chi, group), blocks, d)?;
    }
    let g = group.order();
    let n = blocks.size();
    let mut big = vec![vec![C64::new(0.0, 0.0); g * n]; g * n];
    for t in 0..g {
        let m = blocks.matrix(t);
        for s in 0..g {
            let row_blk = group.add_idx(s, t);
            for i in 0..n {
                for j in 0..n {
                    big[row_blk * n + i][s * n + j] += m[i][j];
                }
            }
        }
    }
    let regular = (-sqrt_d(d)).powu((g * n / 2) as u32) * det(&big);
    let residual = (product - regular).norm() / product.norm().max(f64::MIN_POSITIVE);
    Ok(FrobeniusCheck {
        product: Cx(product),
        regular: Cx(regular),
        residual,
    })
}

/// r real-type and s complex-type columns; needs r + s symbols and
/// r + 2s embedding pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaData {
    pub r: usize,
    pub s: usize,
}

/// `reg[τ][i][k] = (reg(ξᵢ^τ)_{Φ_k}, reg(ξᵢ^τ)_{Φ̄_k})`.
pub fn stark_coefficients_case_small(
    chi_vals: &[C64],
    reg: &[Vec<Vec<(C64, C64)>>],
    d: i64,
    gamma: Option<GammaData>,
) -> Result<(Vec<Vec<C64>>, C64)> {
    let gamma = gamma.ok_or(Error::MissingGammaData)?;
    let n = gamma.r + gamma.s;
    if reg
        .iter()
        .any(|t| t.len() != n || t.iter().any(|row| row.len() != gamma.r + 2 * gamma.s))
    {
        return Err(Error::MissingGammaData);
    }
    let sd = sqrt_d(d);
    let one = C64::new(1.0, 0.0);
    let mut m = vec![vec![C64::new(0.0, 0.0); n]; n];
    for (t, &c) in chi_vals.iter().enumerate() {
        for (i, row) in m.iter_mut().enumerate() {
            let r = &reg[t][i];
            for (j, v) in row.iter_mut().enumerate() {
                let coeff = if j < gamma.r {
                    (one - sd) * r[j].0 + (one + sd) * r[j].1
                } else {
                    let js = j + gamma.s;
                    r[j].0 + r[j].1 - sd * r[js].0 + sd * r[js].1
                };
                *v += c * coeff;
            }
        }
    }
    let dm = det(&m);
    Ok((m, dm))
}
