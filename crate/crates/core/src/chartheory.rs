//! Finite abelian groups Z/n₁ ⊕ … ⊕ Z/n_k, their characters with exact
//! rational angles, and both sides of the Dedekind determinant relation for
//! Ind_G^Γ χ.

use crate::error::{Error, Result};
use crate::numerics::det;
use crate::C64;
use num_rational::Rational64;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    cyclic_orders: Vec<i64>,
}

impl FiniteAbelianGroup {
    pub fn new(cyclic_orders: Vec<i64>) -> Result<Self> {
        if cyclic_orders.iter().any(|&n| n < 1) {
            return Err(Error::InvalidSettings("cyclic orders must be ≥ 1".into()));
        }
        Ok(Self { cyclic_orders })
    }

    pub fn trivial() -> Self {
        Self {
            cyclic_orders: vec![],
        }
    }

    pub fn cyclic_orders(&self) -> &[i64] {
        &self.cyclic_orders
    }

    pub fn order(&self) -> usize {
        self.cyclic_orders.iter().product::<i64>() as usize
    }

    pub fn rank(&self) -> usize {
        self.cyclic_orders.len()
    }

    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        v.iter()
            .zip(&self.cyclic_orders)
            .map(|(x, n)| x.rem_euclid(*n))
            .collect()
    }

    pub fn identity(&self) -> Vec<i64> {
        vec![0; self.rank()]
    }

    /// Mixed-radix index; the last coordinate varies fastest, so indices
    /// follow lexicographic order of reduced vectors.
    pub fn index(&self, v: &[i64]) -> usize {
        let r = self.reduce(v);
        r.iter()
            .zip(&self.cyclic_orders)
            .fold(0usize, |acc, (x, n)| acc * *n as usize + *x as usize)
    }

    pub fn element(&self, mut idx: usize) -> Vec<i64> {
        let mut out = vec![0; self.rank()];
        for k in (0..self.rank()).rev() {
            let n = self.cyclic_orders[k] as usize;
            out[k] = (idx % n) as i64;
            idx /= n;
        }
        out
    }

    pub fn elements(&self) -> Vec<Vec<i64>> {
        (0..self.order()).map(|i| self.element(i)).collect()
    }

    pub fn add(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        self.reduce(&a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>())
    }

    pub fn neg(&self, a: &[i64]) -> Vec<i64> {
        self.reduce(&a.iter().map(|x| -x).collect::<Vec<_>>())
    }

    pub fn sub(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        self.add(a, &self.neg(b))
    }

    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        self.index(&self.add(&self.element(a), &self.element(b)))
    }

    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        self.index(&self.sub(&self.element(a), &self.element(b)))
    }

    pub fn element_order(&self, v: &[i64]) -> i64 {
        v.iter().zip(&self.cyclic_orders).fold(1, |acc, (x, n)| {
            num_integer::lcm(acc, n / num_integer::gcd(*x, *n))
        })
    }
}

/// A subgroup as a sorted list of element indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgroup {
    members: Vec<usize>,
}

impl Subgroup {
    pub fn generated(group: &FiniteAbelianGroup, gens: &[Vec<i64>]) -> Self {
        let mut seen = vec![false; group.order()];
        let id = group.index(&group.identity());
        seen[id] = true;
        let mut stack = vec![id];
        let gidx: Vec<usize> = gens.iter().map(|g| group.index(g)).collect();
        while let Some(x) = stack.pop() {
            for &g in &gidx {
                let y = group.add_idx(x, g);
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        Self {
            members: (0..group.order()).filter(|&i| seen[i]).collect(),
        }
    }

    pub fn from_members(group: &FiniteAbelianGroup, members: &[usize]) -> Result<Self> {
        let mut m: Vec<usize> = members.to_vec();
        m.sort_unstable();
        m.dedup();
        if m.iter().any(|&x| x >= group.order())
            || m.binary_search(&group.index(&group.identity())).is_err()
        {
            return Err(Error::NotASubgroup);
        }
        for &a in &m {
            for &b in &m {
                if m.binary_search(&group.sub_idx(a, b)).is_err() {
                    return Err(Error::NotASubgroup);
                }
            }
        }
        Ok(Self { members: m })
    }

    pub fn whole(group: &FiniteAbelianGroup) -> Self {
        Self {
            members: (0..group.order()).collect(),
        }
    }

    pub fn trivial(group: &FiniteAbelianGroup) -> Self {
        Self {
            members: vec![group.index(&group.identity())],
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.members.binary_search(&idx).is_ok()
    }
}

/// χ(x) = exp(2πi Σ e_k x_k / n_k), carried as an exact angle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharacterData {
    pub orders: Vec<i64>,
    pub exponents: Vec<i64>,
}

impl CharacterData {
    pub fn trivial(group: &FiniteAbelianGroup) -> Self {
        Self {
            orders: group.cyclic_orders.clone(),
            exponents: vec![0; group.rank()],
        }
    }

    pub fn new(group: &FiniteAbelianGroup, exponents: Vec<i64>) -> Result<Self> {
        if exponents.len() != group.rank() {
            return Err(Error::InconsistentCharacter(format!(
                "{} exponents for a group of rank {}",
                exponents.len(),
                group.rank()
            )));
        }
        Ok(Self {
            orders: group.cyclic_orders.clone(),
            exponents: group.reduce(&exponents),
        })
    }

    /// Angle in [0, 1).
    pub fn angle(&self, v: &[i64]) -> Rational64 {
        let mut a = Rational64::zero();
        for ((x, e), n) in v.iter().zip(&self.exponents).zip(&self.orders) {
            a += Rational64::new(x * e, *n);
        }
        a - a.floor()
    }

    pub fn value(&self, v: &[i64]) -> C64 {
        angle_value(self.angle(v))
    }

    pub fn conj(&self) -> Self {
        Self {
            orders: self.orders.clone(),
            exponents: self
                .exponents
                .iter()
                .zip(&self.orders)
                .map(|(e, n)| (-e).rem_euclid(*n))
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            orders: self.orders.clone(),
            exponents: self
                .exponents
                .iter()
                .zip(&o.exponents)
                .zip(&self.orders)
                .map(|((a, b), n)| (a + b).rem_euclid(*n))
                .collect(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// Exact order of the character.
    pub fn order(&self) -> i64 {
        self.exponents
            .iter()
            .zip(&self.orders)
            .fold(1, |acc, (e, n)| {
                num_integer::lcm(acc, n / num_integer::gcd(*e, *n))
            })
    }

    /// Agreement on a subgroup, checked on exact angles.
    pub fn agrees_on(&self, o: &Self, group: &FiniteAbelianGroup, sub: &Subgroup) -> bool {
        sub.members().iter().all(|&i| {
            let v = group.element(i);
            self.angle(&v) == o.angle(&v)
        })
    }
}

pub fn angle_value(a: Rational64) -> C64 {
    let t = 2.0 * PI * (*a.numer() as f64) / (*a.denom() as f64);
    C64::new(t.cos(), t.sin())
}

pub fn all_characters(group: &FiniteAbelianGroup) -> Vec<CharacterData> {
    group
        .elements()
        .into_iter()
        .map(|e| CharacterData {
            orders: group.cyclic_orders.clone(),
            exponents: e,
        })
        .collect()
}

/// One representative Γ-character per distinct restriction to `sub`.
pub fn subgroup_characters(group: &FiniteAbelianGroup, sub: &Subgroup) -> Vec<CharacterData> {
    let mut reps: Vec<CharacterData> = Vec::new();
    for chi in all_characters(group) {
        if !reps.iter().any(|r| r.agrees_on(&chi, group, sub)) {
            reps.push(chi);
        }
    }
    reps
}

/// ⟨χ, ψ⟩_G = |G|⁻¹ Σ_G χ ψ̄, exact: 1 if the restrictions agree, else 0.
pub fn inner_product(
    chi: &CharacterData,
    psi: &CharacterData,
    group: &FiniteAbelianGroup,
    sub: &Subgroup,
) -> Rational64 {
    let quotient = chi.mul(&psi.conj());
    // Σ over G of a root-of-unity-valued character: zero unless trivial on G.
    let trivial = sub
        .members()
        .iter()
        .all(|&i| quotient.angle(&group.element(i)).is_zero());
    Rational64::from_integer(i64::from(trivial))
}

pub fn inner_product_numeric(
    chi: &CharacterData,
    psi: &CharacterData,
    group: &FiniteAbelianGroup,
    sub: &Subgroup,
) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &i in sub.members() {
        let v = group.element(i);
        acc += chi.value(&v) * psi.value(&v).conj();
    }
    acc / sub.order() as f64
}

/// The [Γ:G] characters of Γ restricting to χ on G.
pub fn extensions_of(
    group: &FiniteAbelianGroup,
    sub: &Subgroup,
    chi: &CharacterData,
) -> Result<Vec<CharacterData>> {
    if chi.orders != group.cyclic_orders {
        return Err(Error::InconsistentCharacter(
            "character lives on a different group".into(),
        ));
    }
    Subgroup::from_members(group, sub.members())?;
    Ok(all_characters(group)
        .into_iter()
        .filter(|psi| psi.agrees_on(chi, group, sub))
        .collect())
}

/// A character of Γ with χ(g_k) = exp(2πi e_k / ord(g_k)) on the given
/// generators of G; it represents χ on G.
pub fn character_from_generator_values(
    group: &FiniteAbelianGroup,
    gens: &[Vec<i64>],
    exponents: &[i64],
) -> Result<CharacterData> {
    if gens.len() != exponents.len() {
        return Err(Error::InconsistentCharacter(
            "one exponent per subgroup generator expected".into(),
        ));
    }
    all_characters(group)
        .into_iter()
        .find(|psi| {
            gens.iter().zip(exponents).all(|(g, e)| {
                let ord = group.element_order(g);
                psi.angle(g) == {
                    let a = Rational64::new(*e, ord);
                    a - a.floor()
                }
            })
        })
        .ok_or_else(|| {
            Error::InconsistentCharacter("no character takes these values on the generators".into())
        })
}

/// Coset representatives S for G\Γ and the factor set
/// g(γ, γ′) = γ′ + γ″ − γ ∈ G, where γ″ ∈ S represents γ − γ′.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CosetSystem {
    reps: Vec<usize>,
    coset_of: Vec<usize>,
    /// factor[i][j] = (g(γ_i, γ_j) as element index, index of γ″ in reps).
    factor: Vec<Vec<(usize, usize)>>,
}

impl CosetSystem {
    /// Lexicographically smallest representatives.
    pub fn new(group: &FiniteAbelianGroup, sub: &Subgroup) -> Result<Self> {
        let mut coset_of = vec![usize::MAX; group.order()];
        let mut reps = vec![];
        for x in 0..group.order() {
            if coset_of[x] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(x);
            for &h in sub.members() {
                let y = group.add_idx(x, h);
                if coset_of[y] != usize::MAX {
                    return Err(Error::NotASubgroup);
                }
                coset_of[y] = c;
            }
        }
        Self::with_reps(group, sub, reps)
    }

    /// Custom representatives, one per coset.
    pub fn with_reps(group: &FiniteAbelianGroup, sub: &Subgroup, reps: Vec<usize>) -> Result<Self> {
        let mut coset_of = vec![usize::MAX; group.order()];
        for (c, &x) in reps.iter().enumerate() {
            for &h in sub.members() {
                let y = group.add_idx(x, h);
                if coset_of[y] != usize::MAX {
                    return Err(Error::NotASubgroup);
                }
                coset_of[y] = c;
            }
        }
        if coset_of.contains(&usize::MAX) {
            return Err(Error::NotASubgroup);
        }
        let n = reps.len();
        let mut factor = vec![vec![(0, 0); n]; n];
        for i in 0..n {
            for j in 0..n {
                let diff = group.sub_idx(reps[i], reps[j]);
                let k = coset_of[diff];
                let g = group.sub_idx(group.add_idx(reps[j], reps[k]), reps[i]);
                debug_assert!(sub.contains(g));
                factor[i][j] = (g, k);
            }
        }
        Ok(Self {
            reps,
            coset_of,
            factor,
        })
    }

    /// Each representative moved by a random element of G.
    pub fn random<R: Rng>(group: &FiniteAbelianGroup, sub: &Subgroup, rng: &mut R) -> Result<Self> {
        let base = Self::new(group, sub)?;
        let reps = base
            .reps
            .iter()
            .map(|&x| group.add_idx(x, sub.members()[rng.gen_range(0..sub.order())]))
            .collect();
        Self::with_reps(group, sub, reps)
    }

    pub fn reps(&self) -> &[usize] {
        &self.reps
    }

    pub fn index(&self) -> usize {
        self.reps.len()
    }

    pub fn coset_of(&self, idx: usize) -> usize {
        self.coset_of[idx]
    }

    pub fn factor(&self, i: usize, j: usize) -> (usize, usize) {
        self.factor[i][j]
    }
}

/// Π_{i} Σ_γ f(γ) χᵢ(γ) over the extensions χᵢ of χ.
pub fn dedekind_det_spectral(
    group: &FiniteAbelianGroup,
    sub: &Subgroup,
    chi: &CharacterData,
    f: &[C64],
) -> Result<C64> {
    let ext = extensions_of(group, sub, chi)?;
    let elems = group.elements();
    Ok(ext
        .iter()
        .map(|psi| {
            elems
                .iter()
                .zip(f)
                .map(|(e, v)| v * psi.value(e))
                .sum::<C64>()
        })
        .product())
}

/// The [Γ:G]×[Γ:G] matrix with entries Σ_{τ∈G} χ(τ) f(τ + γ′ − γ),
/// assembled through the factor set.
pub fn dedekind_matrix(
    group: &FiniteAbelianGroup,
    sub: &Subgroup,
    chi: &CharacterData,
    f: &[C64],
    cs: &CosetSystem,
) -> Vec<Vec<C64>> {
    let n = cs.index();
    // F(k) = Σ_{σ∈G} χ(σ) f(σ − γ_k)
    let big_f: Vec<C64> = cs
        .reps()
        .iter()
        .map(|&r| {
            sub.members()
                .iter()
                .map(|&s| chi.value(&group.element(s)) * f[group.sub_idx(s, r)])
                .sum()
        })
        .collect();
    let mut m = vec![vec![C64::new(0.0, 0.0); n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let (g, k) = cs.factor(i, j);
            // τ + γ′ − γ = (τ + g) − γ″  ⇒  entry = χ(−g) F(γ″).
            *cell = chi.value(&group.element(g)).conj() * big_f[k];
        }
    }
    m
}

pub fn dedekind_det_matrix(
    group: &FiniteAbelianGroup,
    sub: &Subgroup,
    chi: &CharacterData,
    f: &[C64],
    cs: &CosetSystem,
) -> C64 {
    det(&dedekind_matrix(group, sub, chi, f, cs))
}

/// (f ∗ g)(γ) = Σ_h f(h) g(γ − h).
pub fn group_convolution(group: &FiniteAbelianGroup, f: &[C64], g: &[C64]) -> Vec<C64> {
    let n = group.order();
    (0..n)
        .map(|x| (0..n).map(|h| f[h] * g[group.sub_idx(x, h)]).sum())
        .collect()
}
