use super::field::{ImagQuadField, OkElem};
use crate::chartheory::{FiniteAbelianGroup, Subgroup};
use crate::error::{Error, Result};
use crate::numerics::{gcd, smith_normal_form};
use serde::Serialize;
use std::collections::HashMap;

/// O_K/(g) with residues x + y·w, 0 ≤ x < a, 0 ≤ y < c, where the ideal
/// (g) has Hermite basis (a, 0), (b, c) in (x, y) coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueRing {
    modulus: OkElem,
    a: i64,
    b: i64,
    c: i64,
}

impl ResidueRing {
    pub fn new(field: &ImagQuadField, g: OkElem) -> Result<Self> {
        if g.is_zero() {
            return Err(Error::ZeroModulus);
        }
        let v1 = g;
        let v2 = field.mul(g, OkElem::new(0, 1));
        // u = al·v1 + be·v2 has y = c > 0; v is the combination with y = 0.
        let (c, al, be) = ext_gcd_signed(v1.y, v2.y);
        let ux = al * v1.x + be * v2.x;
        let a = ((v2.y / c) * v1.x - (v1.y / c) * v2.x).abs();
        if a == 0 {
            return Err(Error::ZeroModulus);
        }
        let b = ux.rem_euclid(a);
        Ok(Self {
            modulus: g,
            a,
            b,
            c,
        })
    }

    pub fn modulus(&self) -> OkElem {
        self.modulus
    }

    pub fn size(&self) -> usize {
        (self.a * self.c) as usize
    }

    pub fn reduce(&self, e: OkElem) -> OkElem {
        let j = e.y.div_euclid(self.c);
        let y = e.y - j * self.c;
        let x = (e.x - j * self.b).rem_euclid(self.a);
        OkElem::new(x, y)
    }

    pub fn index(&self, e: OkElem) -> usize {
        let r = self.reduce(e);
        (r.y * self.a + r.x) as usize
    }

    pub fn element(&self, idx: usize) -> OkElem {
        let idx = idx as i64;
        OkElem::new(idx % self.a, idx / self.a)
    }

    pub fn is_zero(&self, e: OkElem) -> bool {
        self.index(e) == 0
    }
}

fn ext_gcd_signed(a: i64, b: i64) -> (i64, i64, i64) {
    let (g, x, y) = crate::numerics::ext_gcd(a, b);
    if g < 0 {
        (-g, -x, -y)
    } else {
        (g, x, y)
    }
}

/// (r, g) = O_K iff the 2×2 minors of {r, rw, g, gw} have gcd 1.
pub fn coprime(field: &ImagQuadField, r: OkElem, g: OkElem) -> bool {
    let w = OkElem::new(0, 1);
    let v = [r, field.mul(r, w), g, field.mul(g, w)];
    let mut acc = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            acc = gcd(acc, v[i].x * v[j].y - v[i].y * v[j].x);
        }
    }
    acc == 1
}

/// Z^k modulo a full-rank relation lattice, put in Smith form.
#[derive(Clone, Debug, Serialize)]
pub struct AbelianPresentation {
    group: FiniteAbelianGroup,
    /// k × r projection matrix: v ↦ v·proj reduced by the cyclic orders.
    proj: Vec<Vec<i64>>,
}

impl AbelianPresentation {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn project(&self, v: &[i64]) -> Vec<i64> {
        let r = self.group.rank();
        let mut out = vec![0i64; r];
        for (vi, row) in v.iter().zip(&self.proj) {
            for ((o, p), n) in out.iter_mut().zip(row).zip(self.group.cyclic_orders()) {
                *o = (*o + vi.rem_euclid(*n) * p).rem_euclid(*n);
            }
        }
        self.group.reduce(&out)
    }
}

/// Z^k / ⟨relations⟩; the relation rows must span a full-rank lattice.
pub fn smith_quotient(k: usize, relations: &[Vec<i64>]) -> Result<AbelianPresentation> {
    let smith = smith_normal_form(relations, k);
    let mut diag: Vec<i64> = smith.diag.iter().map(|d| d.abs()).collect();
    diag.resize(k, 0);
    if diag.contains(&0) {
        return Err(Error::InvalidSettings(
            "relation lattice is not of full rank".into(),
        ));
    }
    let keep: Vec<usize> = (0..k).filter(|&i| diag[i] > 1).collect();
    let group = FiniteAbelianGroup::new(keep.iter().map(|&i| diag[i]).collect())?;
    let proj = (0..k)
        .map(|row| {
            keep.iter()
                .map(|&col| smith.q[row][col].rem_euclid(diag[col]))
                .collect()
        })
        .collect();
    Ok(AbelianPresentation { group, proj })
}

/// (O_K/g)^× with discrete logarithms.
#[derive(Clone, Debug, Serialize)]
pub struct ResidueUnitGroup {
    ring: ResidueRing,
    presentation: AbelianPresentation,
    /// Ring index ↦ group element index, for residues coprime to g.
    #[serde(skip)]
    dlog: Vec<Option<usize>>,
}

impl ResidueUnitGroup {
    pub fn new(field: &ImagQuadField, g: OkElem) -> Result<Self> {
        let ring = ResidueRing::new(field, g)?;
        let size = ring.size();
        let mulr = |a: usize, b: usize| ring.index(field.mul(ring.element(a), ring.element(b)));
        let one = ring.index(OkElem::int(1));
        // Incremental generators: exps[i] is the exponent vector of residue i.
        let mut exps: HashMap<usize, Vec<i64>> = HashMap::from([(one, vec![])]);
        let mut orders: Vec<i64> = vec![];
        let mut relations: Vec<Vec<i64>> = vec![];
        for r in 0..size {
            if exps.contains_key(&r) || !coprime(field, ring.element(r), g) {
                continue;
            }
            let mut cur = r;
            let mut m = 1;
            while !exps.contains_key(&cur) {
                cur = mulr(cur, r);
                m += 1;
            }
            let k = orders.len();
            let mut rel: Vec<i64> = exps[&cur].iter().map(|e| -e).collect();
            rel.push(m);
            relations.push(rel);
            orders.push(m);
            let old: Vec<(usize, Vec<i64>)> = exps.drain().collect();
            for (h, v) in old {
                let mut x = h;
                for j in 0..m {
                    let mut nv = v.clone();
                    nv.resize(k, 0);
                    nv.push(j);
                    exps.insert(x, nv);
                    x = mulr(x, r);
                }
            }
        }
        let k = orders.len();
        for rel in relations.iter_mut() {
            rel.resize(k, 0);
        }
        let presentation = if k == 0 {
            AbelianPresentation {
                group: FiniteAbelianGroup::trivial(),
                proj: vec![],
            }
        } else {
            smith_quotient(k, &relations)?
        };
        let mut dlog = vec![None; size];
        for (r, v) in &exps {
            let mut v = v.clone();
            v.resize(k, 0);
            dlog[*r] = Some(presentation.group.index(&presentation.project(&v)));
        }
        Ok(Self {
            ring,
            presentation,
            dlog,
        })
    }

    pub fn ring(&self) -> &ResidueRing {
        &self.ring
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        self.presentation.group()
    }

    pub fn order(&self) -> usize {
        self.group().order()
    }

    /// Group element index of λ mod g, if λ is a unit there.
    pub fn log_index(&self, e: OkElem) -> Option<usize> {
        self.dlog[self.ring.index(e)]
    }

    pub fn log(&self, e: OkElem) -> Option<Vec<i64>> {
        self.log_index(e).map(|i| self.group().element(i))
    }

    /// Residues coprime to g, in ring order.
    pub fn residues(&self) -> Vec<OkElem> {
        (0..self.ring.size())
            .filter(|&i| self.dlog[i].is_some())
            .map(|i| self.ring.element(i))
            .collect()
    }
}

/// The ray class group mod g for a class-number-one field: (O_K/g)^× modulo
/// the image of the roots of unity.
#[derive(Clone, Debug, Serialize)]
pub struct RayClassGroupData {
    pub field: ImagQuadField,
    pub modulus: OkElem,
    pub residue_units: ResidueUnitGroup,
    pub unit_image: Subgroup,
    quotient: AbelianPresentation,
    /// One representative per class, coprime to g; the identity class uses 1.
    pub class_reps: Vec<OkElem>,
    /// Number of roots of unity congruent to 1 mod g.
    pub units_congruent_to_one: usize,
}

impl RayClassGroupData {
    pub fn new(field: &ImagQuadField, g: OkElem) -> Result<Self> {
        if g.is_zero() || field.is_unit(g) {
            return Err(Error::ZeroModulus);
        }
        let ru = ResidueUnitGroup::new(field, g)?;
        let grp = ru.group().clone();
        let unit_logs: Vec<Vec<i64>> = field.units().iter().map(|&u| ru.log(u).unwrap()).collect();
        let unit_image = Subgroup::generated(&grp, &unit_logs);
        let units_congruent_to_one = field
            .units()
            .iter()
            .filter(|&&u| ru.ring().is_zero(field.sub(u, OkElem::int(1))))
            .count();
        let k = grp.rank();
        let mut relations: Vec<Vec<i64>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { grp.cyclic_orders()[i] } else { 0 })
                    .collect()
            })
            .collect();
        relations.extend(unit_logs.iter().cloned());
        let quotient = if k == 0 {
            AbelianPresentation {
                group: FiniteAbelianGroup::trivial(),
                proj: vec![],
            }
        } else {
            smith_quotient(k, &relations)?
        };
        let qn = quotient.group().order();
        let mut best: Vec<Option<(i64, OkElem)>> = vec![None; qn];
        for r in ru.residues() {
            let class = quotient
                .group()
                .index(&quotient.project(&ru.log(r).unwrap()));
            let key = if r == OkElem::int(1) {
                -1
            } else {
                field.norm(r)
            };
            if best[class].is_none_or(|(bk, be)| (key, r) < (bk, be)) {
                best[class] = Some((key, r));
            }
        }
        let class_reps = best.into_iter().map(|b| b.unwrap().1).collect();
        Ok(Self {
            field: field.clone(),
            modulus: g,
            residue_units: ru,
            unit_image,
            quotient,
            class_reps,
            units_congruent_to_one,
        })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        self.quotient.group()
    }

    pub fn order(&self) -> usize {
        self.group().order()
    }

    pub fn class_of_log(&self, v: &[i64]) -> usize {
        self.group().index(&self.quotient.project(v))
    }

    /// Class of the principal ideal (λ).
    pub fn artin_symbol(&self, lambda: OkElem) -> Result<usize> {
        let v = self
            .residue_units
            .log(lambda)
            .ok_or_else(|| Error::NotCoprime {
                elem: lambda.to_string(),
                modulus: self.modulus.to_string(),
            })?;
        Ok(self.class_of_log(&v))
    }

    /// Class index for every ring residue, None when not coprime.
    pub fn class_table(&self) -> Vec<Option<usize>> {
        let ring = self.residue_units.ring();
        (0..ring.size())
            .map(|i| {
                self.residue_units
                    .log(ring.element(i))
                    .map(|v| self.class_of_log(&v))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residue_counts() {
        let k = ImagQuadField::gaussian();
        for (g, size, units) in [
            ((3, 0), 9, 8),
            ((2, 1), 5, 4),
            ((-6, 6), 72, 32),
            ((1, 1), 2, 1),
        ] {
            let g = OkElem::new(g.0, g.1);
            let ru = ResidueUnitGroup::new(&k, g).unwrap();
            assert_eq!(ru.ring().size(), size);
            assert_eq!(ru.order(), units);
            assert_eq!(ru.residues().len(), units);
        }
    }

    #[test]
    fn reduction_respects_ideal() {
        let k = ImagQuadField::new(-7).unwrap();
        let g = OkElem::new(3, 2);
        let ring = ResidueRing::new(&k, g).unwrap();
        assert_eq!(ring.size() as i64, k.norm(g));
        for e in k.elements_with_norm_at_most(40) {
            let r = ring.reduce(e);
            assert!(k.divides(g, k.sub(e, r)), "{e} vs {r}");
            assert_eq!(ring.reduce(k.add(e, k.mul(g, OkElem::new(2, -1)))), r);
        }
    }

    #[test]
    fn coprimality_matches_norm_gcd_for_primes() {
        let k = ImagQuadField::gaussian();
        let g = OkElem::new(2, 1);
        for e in k.elements_with_norm_at_most(30) {
            let want = !k.divides(g, e);
            assert_eq!(coprime(&k, e, g), want, "{e}");
        }
    }

    #[test]
    fn dlog_is_a_homomorphism() {
        let k = ImagQuadField::gaussian();
        let ru = ResidueUnitGroup::new(&k, OkElem::new(-6, 6)).unwrap();
        let res = ru.residues();
        for &a in res.iter().step_by(3) {
            for &b in res.iter().step_by(5) {
                let lhs = ru.log(k.mul(a, b)).unwrap();
                let rhs = ru.group().add(&ru.log(a).unwrap(), &ru.log(b).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn ray_class_examples() {
        let k = ImagQuadField::gaussian();
        assert_eq!(
            RayClassGroupData::new(&k, OkElem::new(2, 1))
                .unwrap()
                .order(),
            1
        );
        let rc = RayClassGroupData::new(&k, OkElem::int(3)).unwrap();
        assert_eq!(rc.order(), 2);
        assert_eq!(rc.artin_symbol(OkElem::int(1)).unwrap(), 0);
        assert_eq!(rc.artin_symbol(OkElem::new(0, 1)).unwrap(), 0);
        assert_eq!(rc.artin_symbol(OkElem::new(1, 1)).unwrap(), 1);
        assert!(matches!(
            rc.artin_symbol(OkElem::int(3)),
            Err(Error::NotCoprime { .. })
        ));
        assert_eq!(rc.class_reps[0], OkElem::int(1));
        let e = ImagQuadField::eisenstein();
        assert_eq!(
            RayClassGroupData::new(&e, OkElem::int(2)).unwrap().order(),
            1
        );
        assert!(matches!(
            RayClassGroupData::new(&k, OkElem::new(0, 1)),
            Err(Error::ZeroModulus)
        ));
        assert!(matches!(
            RayClassGroupData::new(&k, OkElem::int(0)),
            Err(Error::ZeroModulus)
        ));
    }

    #[test]
    fn generator_independence() {
        let k = ImagQuadField::gaussian();
        let rc = RayClassGroupData::new(&k, OkElem::new(-6, 6)).unwrap();
        for e in k.elements_with_norm_at_most(50) {
            if let Ok(c) = rc.artin_symbol(e) {
                for &u in k.units() {
                    assert_eq!(rc.artin_symbol(k.mul(u, e)).unwrap(), c);
                }
            }
        }
    }
}
