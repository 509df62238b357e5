use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Discriminants of the imaginary quadratic fields of class number one.
pub const CLASS_NUMBER_ONE: [i64; 9] = [-3, -4, -7, -8, -11, -19, -43, -67, -163];

/// x + y·w in O_K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OkElem {
    pub x: i64,
    pub y: i64,
}

impl OkElem {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub const fn int(x: i64) -> Self {
        Self { x, y: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0 && self.y == 0
    }
}

impl fmt::Display for OkElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.x, self.y) {
            (x, 0) => write!(f, "{x}"),
            (0, y) => write!(f, "{y}w"),
            (x, y) if y < 0 => write!(f, "{x}{y}w"),
            (x, y) => write!(f, "{x}+{y}w"),
        }
    }
}

/// K = Q(√D) with O_K = Z[w], w² = t·w − n.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImagQuadField {
    d: i64,
    t: i64,
    n: i64,
    /// Roots of unity ordered by argument, starting at 1.
    units: Vec<OkElem>,
}

impl ImagQuadField {
    pub fn new(d: i64) -> Result<Self> {
        if !CLASS_NUMBER_ONE.contains(&d) {
            return Err(Error::UnsupportedDiscriminant(d));
        }
        let (t, n) = if d.rem_euclid(4) == 1 {
            (d, (d * d - d) / 4)
        } else {
            (0, -d / 4)
        };
        let mut f = Self {
            d,
            t,
            n,
            units: vec![],
        };
        let mut units = f.elements_with_norm_at_most(1);
        units.retain(|u| !u.is_zero());
        units.sort_by(|a, b| {
            let key = |u: &OkElem| f.embed(*u).arg().rem_euclid(2.0 * std::f64::consts::PI);
            key(a).partial_cmp(&key(b)).unwrap()
        });
        f.units = units;
        Ok(f)
    }

    pub fn gaussian() -> Self {
        Self::new(-4).unwrap()
    }

    pub fn eisenstein() -> Self {
        Self::new(-3).unwrap()
    }

    pub fn discriminant(&self) -> i64 {
        self.d
    }

    pub fn trace_w(&self) -> i64 {
        self.t
    }

    pub fn norm_w(&self) -> i64 {
        self.n
    }

    pub fn sqrt_d(&self) -> C64 {
        C64::new(0.0, (-self.d as f64).sqrt())
    }

    pub fn w(&self) -> C64 {
        C64::new(self.t as f64 / 2.0, (-self.d as f64).sqrt() / 2.0)
    }

    pub fn embed(&self, e: OkElem) -> C64 {
        C64::new(e.x as f64, 0.0) + self.w() * e.y as f64
    }

    pub fn add(&self, a: OkElem, b: OkElem) -> OkElem {
        OkElem::new(a.x + b.x, a.y + b.y)
    }

    pub fn sub(&self, a: OkElem, b: OkElem) -> OkElem {
        OkElem::new(a.x - b.x, a.y - b.y)
    }

    pub fn neg(&self, a: OkElem) -> OkElem {
        OkElem::new(-a.x, -a.y)
    }

    pub fn mul(&self, a: OkElem, b: OkElem) -> OkElem {
        OkElem::new(
            a.x * b.x - self.n * a.y * b.y,
            a.x * b.y + a.y * b.x + self.t * a.y * b.y,
        )
    }

    pub fn conj(&self, a: OkElem) -> OkElem {
        OkElem::new(a.x + self.t * a.y, -a.y)
    }

    pub fn norm(&self, a: OkElem) -> i64 {
        a.x * a.x + self.t * a.x * a.y + self.n * a.y * a.y
    }

    /// b / a when it lies in O_K.
    pub fn div_exact(&self, b: OkElem, a: OkElem) -> Option<OkElem> {
        let na = self.norm(a);
        if na == 0 {
            return None;
        }
        let p = self.mul(b, self.conj(a));
        (p.x % na == 0 && p.y % na == 0).then(|| OkElem::new(p.x / na, p.y / na))
    }

    pub fn divides(&self, a: OkElem, b: OkElem) -> bool {
        self.div_exact(b, a).is_some()
    }

    pub fn units(&self) -> &[OkElem] {
        &self.units
    }

    pub fn num_units(&self) -> usize {
        self.units.len()
    }

    /// Primitive root of unity of smallest positive argument.
    pub fn zeta(&self) -> OkElem {
        self.units[1]
    }

    /// k with u = ζᵏ.
    pub fn unit_exponent(&self, u: OkElem) -> Option<usize> {
        self.units.iter().position(|v| *v == u)
    }

    pub fn is_unit(&self, a: OkElem) -> bool {
        self.norm(a) == 1
    }

    /// The canonical sector: argument in [0, 2π/#units).
    pub fn in_sector(&self, a: OkElem) -> bool {
        if a.is_zero() {
            return false;
        }
        if self.num_units() == 2 {
            return a.y > 0 || (a.y == 0 && a.x > 0);
        }
        let z = self.zeta();
        a.y >= 0 && self.mul(a, self.conj(z)).y < 0
    }

    /// The associate of `a` in the canonical sector, with the unit u such
    /// that u·a is that associate.
    pub fn canonical_associate(&self, a: OkElem) -> Option<(OkElem, OkElem)> {
        self.units
            .iter()
            .map(|&u| (self.mul(u, a), u))
            .find(|(b, _)| self.in_sector(*b))
    }

    /// Exact inverse image of a complex number, if it is (numerically) in O_K.
    pub fn from_complex(&self, z: C64) -> Option<OkElem> {
        let w = self.w();
        let y = z.im / w.im;
        let x = z.re - y * w.re;
        let (rx, ry) = (x.round(), y.round());
        ((x - rx).abs() < 1e-9 && (y - ry).abs() < 1e-9)
            .then_some(OkElem::new(rx as i64, ry as i64))
    }

    pub fn parse_elem(&self, text: &str) -> Result<OkElem> {
        let z = crate::numerics::parse_complex(text)?;
        self.from_complex(z).ok_or_else(|| {
            Error::Parse(format!(
                "`{text}` is not an algebraic integer of Q(√{})",
                self.d
            ))
        })
    }

    /// Half-width of row y in the box N ≤ bound: the range of 2x + t·y.
    fn row_range(&self, y: i64, bound: i64) -> Option<(i64, i64)> {
        let rem = 4 * bound - (-self.d) * y * y;
        if rem < 0 {
            return None;
        }
        let r = isqrt(rem);
        let lo = (-r - self.t * y).div_euclid(2) + i64::from((-r - self.t * y).rem_euclid(2) != 0);
        let hi = (r - self.t * y).div_euclid(2);
        Some((lo, hi))
    }

    /// Largest |y| that can occur with N ≤ bound.
    pub fn max_row(&self, bound: i64) -> i64 {
        isqrt(4 * bound / -self.d)
    }

    /// All elements of row y with norm ≤ bound, in increasing x.
    pub fn row(&self, y: i64, bound: i64) -> Vec<OkElem> {
        match self.row_range(y, bound) {
            Some((lo, hi)) => (lo..=hi).map(|x| OkElem::new(x, y)).collect(),
            None => vec![],
        }
    }

    pub fn elements_with_norm_at_most(&self, bound: i64) -> Vec<OkElem> {
        let m = self.max_row(bound);
        (-m..=m).flat_map(|y| self.row(y, bound)).collect()
    }
}

pub(crate) fn isqrt(v: i64) -> i64 {
    if v <= 0 {
        return 0;
    }
    let mut r = (v as f64).sqrt() as i64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_matches_embedding() {
        for d in CLASS_NUMBER_ONE {
            let k = ImagQuadField::new(d).unwrap();
            let (a, b) = (OkElem::new(3, -2), OkElem::new(-1, 5));
            let p = k.embed(k.mul(a, b));
            assert!((p - k.embed(a) * k.embed(b)).norm() < 1e-9 * p.norm().max(1.0));
            assert!((k.norm(a) as f64 - k.embed(a).norm_sqr()).abs() < 1e-6);
            assert!((k.embed(k.conj(a)) - k.embed(a).conj()).norm() < 1e-9);
        }
    }

    #[test]
    fn unit_counts() {
        assert_eq!(ImagQuadField::gaussian().num_units(), 4);
        assert_eq!(ImagQuadField::eisenstein().num_units(), 6);
        assert_eq!(ImagQuadField::new(-7).unwrap().num_units(), 2);
        assert_eq!(ImagQuadField::gaussian().zeta(), OkElem::new(0, 1));
        assert!(ImagQuadField::new(-5).is_err());
    }

    #[test]
    fn sector_picks_one_associate() {
        for d in [-3, -4, -7] {
            let k = ImagQuadField::new(d).unwrap();
            for a in k.elements_with_norm_at_most(60) {
                if a.is_zero() {
                    continue;
                }
                let hits = k
                    .units()
                    .iter()
                    .filter(|&&u| k.in_sector(k.mul(u, a)))
                    .count();
                assert_eq!(hits, 1, "D = {d}, a = {a}");
            }
        }
    }

    #[test]
    fn norm_box_is_exact() {
        let k = ImagQuadField::eisenstein();
        let inside = k.elements_with_norm_at_most(50);
        let brute: Vec<OkElem> = (-20..=20)
            .flat_map(|y| (-40..=40).map(move |x| OkElem::new(x, y)))
            .filter(|&a| k.norm(a) <= 50)
            .collect();
        assert_eq!(inside.len(), brute.len());
    }

    #[test]
    fn parse_and_divide() {
        let k = ImagQuadField::gaussian();
        let g = k.parse_elem("-6+6i").unwrap();
        assert_eq!(g, OkElem::new(-6, 6));
        assert_eq!(k.div_exact(g, OkElem::new(1, 1)), Some(OkElem::new(0, 6)));
        assert!(!k.divides(OkElem::int(3), OkElem::new(1, 1)));
        assert!(k.parse_elem("0.5").is_err());
    }
}
