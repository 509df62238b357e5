//! Torsion-supported divisors standing in for K₂ symbols, their
//! convolution, regulators per embedding and the regulator map into
//! Minkowski space.

use crate::error::{Error, Result};
use crate::json::{self, Cx};
use crate::kronecker::{regulator_term, EvalSettings};
use crate::lattice::{kernel_cosets, preimage, ComplexLattice, IntMat2, IsogenyData, TorsionCoord};
use crate::numerics::{csum, gcd};
use crate::par::map_slice;
use crate::C64;
use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

/// Σ a_P (P) with distinct points and nonzero multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TorsionDivisor {
    entries: BTreeMap<TorsionCoord, i64>,
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    a: String,
    b: String,
    mult: i64,
}

impl Serialize for TorsionDivisor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<EntryRepr> = self
            .entries
            .iter()
            .map(|(p, &m)| EntryRepr {
                a: json::format_rational(&p.a()),
                b: json::format_rational(&p.b()),
                mult: m,
            })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TorsionDivisor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = Vec::<EntryRepr>::deserialize(d)?;
        let mut out = TorsionDivisor::new();
        for e in v {
            let a = json::parse_rational(&e.a).map_err(D::Error::custom)?;
            let b = json::parse_rational(&e.b).map_err(D::Error::custom)?;
            out.add_point(TorsionCoord::new(a, b), e.mult);
        }
        Ok(out)
    }
}

impl TorsionDivisor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (TorsionCoord, i64)>>(it: I) -> Self {
        let mut d = Self::new();
        for (p, m) in it {
            d.add_point(p, m);
        }
        d
    }

    /// (P) − (−P).
    pub fn antisymmetric_pair(p: TorsionCoord) -> Self {
        Self::from_entries([(p, 1), (p.neg(), -1)])
    }

    pub fn add_point(&mut self, p: TorsionCoord, m: i64) {
        if m == 0 {
            return;
        }
        let e = self.entries.entry(p).or_insert(0);
        *e += m;
        if *e == 0 {
            self.entries.remove(&p);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&TorsionCoord, &i64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.entries.values().sum()
    }

    pub fn multiplicity(&self, p: &TorsionCoord) -> i64 {
        self.entries.get(p).copied().unwrap_or(0)
    }

    /// Least common denominator of all coordinates.
    pub fn torsion_level(&self) -> i64 {
        self.entries
            .keys()
            .fold(1, |acc, p| num_integer::lcm(acc, p.level()))
    }

    pub fn map_points<F: Fn(&TorsionCoord) -> TorsionCoord>(&self, f: F) -> Self {
        Self::from_entries(self.entries.iter().map(|(p, &m)| (f(p), m)))
    }

    pub fn negated_points(&self) -> Self {
        self.map_points(|p| p.neg())
    }

    /// D = [−1]*D as multisets.
    pub fn is_negation_symmetric(&self) -> bool {
        *self == self.negated_points()
    }

    pub fn scaled(&self, k: i64) -> Self {
        Self::from_entries(self.entries.iter().map(|(p, &m)| (*p, m * k)))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut d = self.clone();
        for (p, &m) in &other.entries {
            d.add_point(*p, m);
        }
        d
    }

    /// Σ a_P·P in C/Λ, exact.
    pub fn point_sum(&self) -> TorsionCoord {
        let (mut a, mut b) = (Rational64::zero(), Rational64::zero());
        for (p, &m) in &self.entries {
            a += p.a() * m;
            b += p.b() * m;
        }
        TorsionCoord::new(a, b)
    }
}

/// Σ_{Q,Q′} ord_Q(f) ord_{Q′}(g) (Q − Q′).
pub fn convolve(f: &TorsionDivisor, g: &TorsionDivisor) -> TorsionDivisor {
    let mut out = TorsionDivisor::new();
    for (q, &a) in f.entries() {
        for (q2, &b) in g.entries() {
            out.add_point(q.sub(q2), a * b);
        }
    }
    out
}

/// Abel's criterion: degree zero and point sum zero in C/Λ.
pub fn is_principal(d: &TorsionDivisor) -> bool {
    d.degree() == 0 && d.point_sum().is_zero()
}

/// Divisor data of a symbol {f, g}: optionally the function divisors,
/// always their convolution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolDivisorData {
    pub f_div: Option<TorsionDivisor>,
    pub g_div: Option<TorsionDivisor>,
    pub convolution: TorsionDivisor,
}

impl SymbolDivisorData {
    pub fn new(f_div: TorsionDivisor, g_div: TorsionDivisor) -> Self {
        let convolution = convolve(&f_div, &g_div);
        Self {
            f_div: Some(f_div),
            g_div: Some(g_div),
            convolution,
        }
    }

    pub fn from_convolution(convolution: TorsionDivisor) -> Self {
        Self {
            f_div: None,
            g_div: None,
            convolution,
        }
    }

    /// True when the stored function divisors pass Abel's criterion.
    pub fn functions_principal(&self) -> bool {
        self.f_div.as_ref().is_none_or(is_principal) && self.g_div.as_ref().is_none_or(is_principal)
    }

    fn map_all<F: Fn(&TorsionCoord) -> TorsionCoord + Copy>(&self, f: F) -> Self {
        Self {
            f_div: self.f_div.as_ref().map(|d| d.map_points(f)),
            g_div: self.g_div.as_ref().map(|d| d.map_points(f)),
            convolution: self.convolution.map_points(f),
        }
    }

    /// The same symbol seen on the conjugate lattice (coordinates (a, −b)).
    pub fn conjugated(&self) -> Self {
        self.map_all(|p| p.conjugate())
    }

    /// Coordinates after `sl2_change(a, b, c, d)`.
    pub fn in_sl2_basis(&self, a: i64, b: i64, c: i64, d: i64) -> Self {
        self.map_all(move |p| p.in_sl2_basis(a, b, c, d))
    }

    pub fn torsion_level(&self) -> i64 {
        let mut n = self.convolution.torsion_level();
        for d in [&self.f_div, &self.g_div].into_iter().flatten() {
            n = num_integer::lcm(n, d.torsion_level());
        }
        n
    }
}

/// Σ_P a_P A([1,τ])² K_{2,1}(u_P/ω₁, [1,τ]).
pub fn regulator_at_embedding(
    sym: &SymbolDivisorData,
    lat: &ComplexLattice,
    settings: &EvalSettings,
) -> Result<C64> {
    divisor_regulator(&sym.convolution, lat, settings)
}

pub fn divisor_regulator(
    d: &TorsionDivisor,
    lat: &ComplexLattice,
    settings: &EvalSettings,
) -> Result<C64> {
    let mut pts = Vec::with_capacity(d.len());
    for (p, &m) in d.entries() {
        if p.is_zero() {
            if settings.strict {
                return Err(Error::SingularEntry {
                    point: p.to_string(),
                });
            }
            log::warn!("dropping convolution entry {m}·(0) at the origin");
            continue;
        }
        pts.push((*p, m));
    }
    let tau = lat.tau();
    let terms = map_slice(settings.execution, &pts, |(p, m)| {
        regulator_term(p, tau, settings).map(|v| v * *m as f64)
    });
    let terms: Result<Vec<C64>> = terms.into_iter().collect();
    Ok(csum(terms?))
}

/// Scales every torsion point by an endomorphism, given as its integer
/// matrix on lattice coordinates.
pub fn galois_act(sym: &SymbolDivisorData, multiplier: &IntMat2) -> Result<SymbolDivisorData> {
    let level = sym.torsion_level();
    let det = multiplier[0][0] * multiplier[1][1] - multiplier[0][1] * multiplier[1][0];
    if gcd(det, level) != 1 {
        return Err(Error::NonInvertibleMultiplier { level });
    }
    Ok(sym.map_all(|p| p.apply(multiplier)))
}

/// Σ_Q Σ_{T ∈ ker φ} ord_Q·(P − T) with φ(P) = Q, P the smallest preimage.
pub fn pullback_divisor(iso: &IsogenyData, d: &TorsionDivisor) -> TorsionDivisor {
    let ker = kernel_cosets(iso);
    let mut out = TorsionDivisor::new();
    for (q, &m) in d.entries() {
        let p = preimage(iso, q);
        for t in &ker {
            out.add_point(p.sub(t), m);
        }
    }
    out
}

/// φ*{f, g} = {φ*f, φ*g}; requires the function divisors.
pub fn pullback_symbol(iso: &IsogenyData, sym: &SymbolDivisorData) -> Option<SymbolDivisorData> {
    let f = pullback_divisor(iso, sym.f_div.as_ref()?);
    let g = pullback_divisor(iso, sym.g_div.as_ref()?);
    Some(SymbolDivisorData::new(f, g))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Embedding {
    pub label: String,
    pub lattice: ComplexLattice,
    /// For a conjugate label, the label whose value it mirrors.
    pub conjugate_of: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiVector {
    pub values: BTreeMap<String, Cx>,
}

impl MinkowskiVector {
    pub fn get(&self, label: &str) -> Option<C64> {
        self.values.get(label).map(|c| c.0)
    }

    /// max |z_Φ̄ − conj z_Φ| over the conjugate pairs in `embeddings`.
    pub fn conjugation_residual(&self, embeddings: &[Embedding]) -> f64 {
        embeddings
            .iter()
            .filter_map(|e| {
                let partner = e.conjugate_of.as_ref()?;
                Some((self.get(&e.label)? - self.get(partner)?.conj()).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Regulator map λ: primary labels are evaluated, conjugate labels mirror
/// their partner.
pub fn lambda_map(
    sym: &SymbolDivisorData,
    embeddings: &[Embedding],
    settings: &EvalSettings,
) -> Result<MinkowskiVector> {
    let labels: Vec<&str> = embeddings.iter().map(|e| e.label.as_str()).collect();
    for e in embeddings {
        if let Some(p) = &e.conjugate_of {
            if !labels.contains(&p.as_str()) {
                return Err(Error::InvalidSettings(format!(
                    "embedding {} pairs with unknown label {p}",
                    e.label
                )));
            }
        }
    }
    let primary: Vec<&Embedding> = embeddings
        .iter()
        .filter(|e| e.conjugate_of.is_none())
        .collect();
    let vals = map_slice(settings.execution, &primary, |e| {
        regulator_at_embedding(sym, &e.lattice, settings)
    });
    let mut out = MinkowskiVector::default();
    for (e, v) in primary.iter().zip(vals) {
        out.values.insert(e.label.clone(), Cx(v?));
    }
    for e in embeddings {
        if let Some(p) = &e.conjugate_of {
            let v = out.get(p).unwrap().conj();
            out.values.insert(e.label.clone(), Cx(v));
        }
    }
    Ok(out)
}

/// The embedding pair {Φ, Φ̄} attached to one lattice.
pub fn conjugate_pair(label: &str, lat: &ComplexLattice) -> Vec<Embedding> {
    vec![
        Embedding {
            label: label.to_string(),
            lattice: lat.clone(),
            conjugate_of: None,
        },
        Embedding {
            label: format!("{label}bar"),
            lattice: lat.conjugate(),
            conjugate_of: Some(label.to_string()),
        },
    ]
}
