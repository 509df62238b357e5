//! Complex lattices, the Weil-type pairing, exact torsion coordinates and
//! isogenies in adapted bases.

use crate::error::{Error, Result};
use crate::json;
use crate::numerics::{smith_normal_form, unimodular_inverse, INTEGER_TOL};
use crate::C64;
use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Integer 2×2 matrix acting on column vectors of lattice coordinates.
pub type IntMat2 = [[i64; 2]; 2];

/// Λ = Zω₁ + Zω₂, normalized so that τ = ω₂/ω₁ has positive imaginary part.
/// `delta` remembers whether the caller's ω₂ was negated to get there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexLattice {
    #[serde(with = "json::complex")]
    omega1: C64,
    #[serde(with = "json::complex")]
    omega2: C64,
    delta: i8,
    #[serde(with = "json::complex")]
    tau: C64,
    #[serde(with = "json::complex")]
    q: C64,
    area: f64,
}

pub fn make_lattice(omega1: C64, omega2: C64) -> Result<ComplexLattice> {
    ComplexLattice::new(omega1, omega2)
}

impl ComplexLattice {
    pub fn new(omega1: C64, omega2: C64) -> Result<Self> {
        let degenerate = || Error::DegenerateLattice {
            ratio: format!("{}", omega2 / omega1),
        };
        if omega1.norm() == 0.0
            || omega2.norm() == 0.0
            || !omega1.is_finite()
            || !omega2.is_finite()
        {
            return Err(degenerate());
        }
        let ratio = omega2 / omega1;
        if ratio.im.abs() <= 1e-12 * ratio.norm() {
            return Err(degenerate());
        }
        let (delta, omega2) = if ratio.im > 0.0 {
            (1, omega2)
        } else {
            (-1, -omega2)
        };
        let tau = omega2 / omega1;
        Ok(Self {
            omega1,
            omega2,
            delta,
            tau,
            q: (C64::new(0.0, 2.0 * PI) * tau).exp(),
            area: omega1.norm_sqr() * tau.im / PI,
        })
    }

    /// [1, τ].
    pub fn from_tau(tau: C64) -> Result<Self> {
        Self::new(C64::new(1.0, 0.0), tau)
    }

    /// Z[i].
    pub fn gaussian() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 1.0)).unwrap()
    }

    /// Z[e^{2πi/3}].
    pub fn eisenstein() -> Self {
        Self::from_tau(C64::from_polar(1.0, 2.0 * PI / 3.0)).unwrap()
    }

    pub fn omega1(&self) -> C64 {
        self.omega1
    }
    pub fn omega2(&self) -> C64 {
        self.omega2
    }
    /// ω₂ as originally supplied, i.e. δ·ω₂.
    pub fn original_omega2(&self) -> C64 {
        self.omega2 * f64::from(self.delta)
    }
    pub fn delta(&self) -> i8 {
        self.delta
    }
    pub fn tau(&self) -> C64 {
        self.tau
    }
    pub fn q(&self) -> C64 {
        self.q
    }
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Real coordinates (a, b) with z = a ω₁ + b ω₂.
    pub fn coords(&self, z: C64) -> (f64, f64) {
        let w = z / self.omega1;
        let b = w.im / self.tau.im;
        (w.re - b * self.tau.re, b)
    }

    pub fn point(&self, a: f64, b: f64) -> C64 {
        self.omega1 * a + self.omega2 * b
    }

    /// Integer coordinates of z if z ∈ Λ (within the global tolerance).
    pub fn lattice_coords(&self, z: C64) -> Option<(i64, i64)> {
        let (a, b) = self.coords(z);
        let (ra, rb) = (a.round(), b.round());
        ((a - ra).abs() < INTEGER_TOL && (b - rb).abs() < INTEGER_TOL)
            .then_some((ra as i64, rb as i64))
    }

    pub fn contains(&self, z: C64) -> bool {
        self.lattice_coords(z).is_some()
    }

    /// The normalized lattice [1, τ] = ω₁⁻¹Λ.
    pub fn normalized(&self) -> Self {
        Self::from_tau(self.tau).unwrap()
    }

    pub fn scaled(&self, c: C64) -> Result<Self> {
        Self::new(c * self.omega1, c * self.omega2)
    }

    /// Complex conjugate lattice with basis (ω̄₁, −ω̄₂), so τ′ = −τ̄ and a
    /// point with coordinates (a, b) is carried to (a, −b).
    pub fn conjugate(&self) -> Self {
        Self::new(self.omega1.conj(), -self.omega2.conj()).unwrap()
    }

    /// Integer matrix of z ↦ αz on lattice coordinates, if αΛ ⊆ Λ.
    pub fn endo_matrix(&self, alpha: C64) -> Result<IntMat2> {
        matrix_between(alpha, self, self)
    }
}

/// ⟨x₀, ω⟩ = exp((x̄₀ω − x₀ω̄)/A(Λ)).
pub fn pairing(x0: C64, omega: C64, lat: &ComplexLattice) -> C64 {
    let phase = 2.0 * (x0.conj() * omega).im / lat.area();
    C64::from_polar(1.0, phase)
}

/// New basis (dω₁ + cω₂, bω₁ + aω₂); requires ad − bc = 1.
pub fn sl2_change(lat: &ComplexLattice, a: i64, b: i64, c: i64, d: i64) -> Result<ComplexLattice> {
    let det = a * d - b * c;
    if det != 1 {
        return Err(Error::NotUnimodular { det });
    }
    let (w1, w2) = (lat.omega1(), lat.omega2());
    ComplexLattice::new(w1 * d as f64 + w2 * c as f64, w1 * b as f64 + w2 * a as f64)
}

fn frac(r: Rational64) -> Rational64 {
    r - r.floor()
}

/// A torsion point (a ω₁ + b ω₂) mod Λ with exact rational coordinates in [0, 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TorsionCoord {
    #[serde(with = "json::rational")]
    a: Rational64,
    #[serde(with = "json::rational")]
    b: Rational64,
}

impl TorsionCoord {
    pub fn new(a: Rational64, b: Rational64) -> Self {
        Self {
            a: frac(a),
            b: frac(b),
        }
    }

    /// (a/n, b/n).
    pub fn from_level(a: i64, b: i64, n: i64) -> Self {
        Self::new(Rational64::new(a, n), Rational64::new(b, n))
    }

    pub fn zero() -> Self {
        Self::new(Rational64::zero(), Rational64::zero())
    }

    pub fn a(&self) -> Rational64 {
        self.a
    }
    pub fn b(&self) -> Rational64 {
        self.b
    }
    pub fn a_num(&self) -> i64 {
        *self.a.numer()
    }
    pub fn a_den(&self) -> i64 {
        *self.a.denom()
    }
    pub fn b_num(&self) -> i64 {
        *self.b.numer()
    }
    pub fn b_den(&self) -> i64 {
        *self.b.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Exact order of the point in C/Λ.
    pub fn level(&self) -> i64 {
        num_integer::lcm(*self.a.denom(), *self.b.denom())
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.a, -self.b)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b)
    }

    pub fn scale(&self, k: i64) -> Self {
        let k = Rational64::from_integer(k);
        Self::new(self.a * k, self.b * k)
    }

    /// Image under an integer matrix acting on coordinate columns.
    pub fn apply(&self, m: &IntMat2) -> Self {
        let r = |x: i64| Rational64::from_integer(x);
        Self::new(
            r(m[0][0]) * self.a + r(m[0][1]) * self.b,
            r(m[1][0]) * self.a + r(m[1][1]) * self.b,
        )
    }

    /// Coordinates with respect to the basis produced by `sl2_change(a,b,c,d)`.
    pub fn in_sl2_basis(&self, a: i64, b: i64, c: i64, d: i64) -> Self {
        self.apply(&[[a, -b], [-c, d]])
    }

    /// Coordinates of the complex-conjugate point on `ComplexLattice::conjugate`.
    pub fn conjugate(&self) -> Self {
        Self::new(self.a, -self.b)
    }

    pub fn to_complex(&self, lat: &ComplexLattice) -> C64 {
        lat.point(to_f64(self.a), to_f64(self.b))
    }

    /// The point as a complex number on the normalized lattice [1, τ].
    pub fn on_normalized(&self, tau: C64) -> C64 {
        C64::new(to_f64(self.a), 0.0) + tau * to_f64(self.b)
    }
}

impl fmt::Display for TorsionCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

pub fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// All points of d⁻¹Λ/Λ.
pub fn torsion_points(d: i64) -> Vec<TorsionCoord> {
    let mut out = Vec::with_capacity((d * d) as usize);
    for i in 0..d {
        for j in 0..d {
            out.push(TorsionCoord::from_level(i, j, d));
        }
    }
    out
}

fn matrix_between(phi: C64, source: &ComplexLattice, target: &ComplexLattice) -> Result<IntMat2> {
    let mut m = [[0i64; 2]; 2];
    let mut worst = 0.0f64;
    for (j, w) in [source.omega1(), source.omega2()].into_iter().enumerate() {
        let (a, b) = target.coords(phi * w);
        for (i, v) in [a, b].into_iter().enumerate() {
            let r = v.round();
            worst = worst.max((v - r).abs());
            m[i][j] = r as i64;
        }
    }
    if worst >= INTEGER_TOL || m[0][0] * m[1][1] - m[0][1] * m[1][0] == 0 {
        return Err(Error::NotAnIsogeny { residual: worst });
    }
    Ok(m)
}

/// z ↦ φz from Λ_source into Λ_target, with adapted bases
/// φe₁ = d₁f₁, φe₂ = d₂f₂ and d₁ | d₂.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsogenyData {
    #[serde(with = "json::complex")]
    pub scalar: C64,
    pub source: ComplexLattice,
    pub target: ComplexLattice,
    pub degree: i64,
    pub d1: i64,
    pub d2: i64,
    /// Matrix of φ from source coordinates to target coordinates.
    pub matrix: IntMat2,
    /// Columns: adapted source basis in source coordinates.
    pub source_change: IntMat2,
    /// Columns: adapted target basis in target coordinates.
    pub target_change: IntMat2,
}

impl IsogenyData {
    pub fn adapted_source_basis(&self) -> (C64, C64) {
        let q = &self.source_change;
        let s = &self.source;
        (
            s.point(q[0][0] as f64, q[1][0] as f64),
            s.point(q[0][1] as f64, q[1][1] as f64),
        )
    }

    pub fn adapted_target_basis(&self) -> (C64, C64) {
        let p = &self.target_change;
        let t = &self.target;
        (
            t.point(p[0][0] as f64, p[1][0] as f64),
            t.point(p[0][1] as f64, p[1][1] as f64),
        )
    }

    /// Image of a source torsion point, in target coordinates.
    pub fn image(&self, t: &TorsionCoord) -> TorsionCoord {
        t.apply(&self.matrix)
    }
}

pub fn elementary_divisors(
    phi: C64,
    source: &ComplexLattice,
    target: &ComplexLattice,
) -> Result<IsogenyData> {
    let m = matrix_between(phi, source, target)?;
    let sm = smith_normal_form(&[m[0].to_vec(), m[1].to_vec()], 2);
    let pinv = unimodular_inverse(&sm.p);
    let to2 = |v: &Vec<Vec<i64>>| -> IntMat2 { [[v[0][0], v[0][1]], [v[1][0], v[1][1]]] };
    Ok(IsogenyData {
        scalar: phi,
        source: source.clone(),
        target: target.clone(),
        degree: sm.diag[0] * sm.diag[1],
        d1: sm.diag[0],
        d2: sm.diag[1],
        matrix: m,
        source_change: to2(&sm.q),
        target_change: to2(&pinv),
    })
}

/// Coset representatives of φ⁻¹Λ_target / Λ_source, in source coordinates.
pub fn kernel_cosets(iso: &IsogenyData) -> Vec<TorsionCoord> {
    let q = &iso.source_change;
    let mut out = Vec::with_capacity(iso.degree as usize);
    for i in 0..iso.d1 {
        for j in 0..iso.d2 {
            let (x, y) = (Rational64::new(i, iso.d1), Rational64::new(j, iso.d2));
            let r = |v: i64| Rational64::from_integer(v);
            out.push(TorsionCoord::new(
                r(q[0][0]) * x + r(q[0][1]) * y,
                r(q[1][0]) * x + r(q[1][1]) * y,
            ));
        }
    }
    out.sort();
    out
}

/// A deterministic preimage of a target point: the lexicographically
/// smallest solution in the source fundamental domain.
pub fn preimage(iso: &IsogenyData, p: &TorsionCoord) -> TorsionCoord {
    let m = &iso.matrix;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = |x: i64| Rational64::new(x, det);
    // Solve M (a, b)ᵀ = (p.a, p.b)ᵀ over Q; then move to the smallest coset member.
    let a = inv(m[1][1]) * p.a() - inv(m[0][1]) * p.b();
    let b = -inv(m[1][0]) * p.a() + inv(m[0][0]) * p.b();
    let base = TorsionCoord::new(a, b);
    kernel_cosets(iso)
        .iter()
        .map(|t| base.add(t))
        .min()
        .unwrap_or(base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn areas() {
        let l = make_lattice(c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        assert!((l.area() - 1.0 / PI).abs() < 1e-15);
        assert_eq!(l.tau(), c(0.0, 1.0));
        assert_eq!(l.delta(), 1);
        let l = make_lattice(c(1.0, 0.0), c(0.0, 2.0)).unwrap();
        assert!((l.area() - 2.0 / PI).abs() < 1e-15);
        let k = c(3.0, 4.0);
        let l = make_lattice(k, k * c(0.0, 1.0)).unwrap();
        assert!((l.area() - 25.0 / PI).abs() < 1e-13);
    }

    #[test]
    fn negative_orientation_flips_delta() {
        let l = make_lattice(c(1.0, 0.0), c(0.3, -1.0)).unwrap();
        assert_eq!(l.delta(), -1);
        assert!(l.tau().im > 0.0);
        let w1 = l.omega1();
        let w2 = l.original_omega2();
        let lhs = w1 * w2.conj() - w1.conj() * w2;
        let rhs = c(0.0, -2.0 * PI * f64::from(l.delta()) * l.area());
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn degenerate_rejected() {
        assert!(matches!(
            make_lattice(c(1.0, 0.0), c(2.0, 0.0)),
            Err(Error::DegenerateLattice { .. })
        ));
    }

    #[test]
    fn pairing_on_lattice_is_trivial() {
        let l = ComplexLattice::gaussian();
        let p = pairing(l.omega1(), l.omega2(), &l);
        assert!((p - 1.0).norm() < 1e-13);
        let p = pairing(c(0.3, 0.1), c(2.0, 1.0), &l);
        assert!((p.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sl2_examples() {
        let l = ComplexLattice::gaussian();
        let same = sl2_change(&l, 1, 0, 0, 1).unwrap();
        assert_eq!(same.omega1(), l.omega1());
        let n = sl2_change(&l, 1, 1, 0, 1).unwrap();
        assert!((n.omega2() - c(1.0, 1.0)).norm() < 1e-15);
        assert!((n.area() - l.area()).abs() < 1e-15);
        assert!(matches!(
            sl2_change(&l, 2, 0, 0, 1),
            Err(Error::NotUnimodular { det: 2 })
        ));
    }

    #[test]
    fn isogeny_examples() {
        let l = ComplexLattice::gaussian();
        let iso = elementary_divisors(c(2.0, 0.0), &l, &l).unwrap();
        assert_eq!((iso.d1, iso.d2, iso.degree), (2, 2, 4));
        let ker = kernel_cosets(&iso);
        let want: Vec<_> = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(a, b)| TorsionCoord::from_level(a, b, 2))
            .collect();
        assert_eq!(ker, want);

        let iso = elementary_divisors(c(1.0, 1.0), &l, &l).unwrap();
        assert_eq!((iso.d1, iso.d2, iso.degree), (1, 2, 2));
        let ker = kernel_cosets(&iso);
        assert_eq!(
            ker,
            vec![TorsionCoord::zero(), TorsionCoord::from_level(1, 1, 2)]
        );
        let (e1, e2) = iso.adapted_source_basis();
        let (f1, f2) = iso.adapted_target_basis();
        assert!((c(1.0, 1.0) * e1 - f1 * iso.d1 as f64).norm() < 1e-12);
        assert!((c(1.0, 1.0) * e2 - f2 * iso.d2 as f64).norm() < 1e-12);
    }

    #[test]
    fn non_isogeny_rejected() {
        let l = ComplexLattice::gaussian();
        assert!(matches!(
            elementary_divisors(c(0.5, 0.0), &l, &l),
            Err(Error::NotAnIsogeny { .. })
        ));
    }

    #[test]
    fn torsion_normalization() {
        let t = TorsionCoord::from_level(-1, 9, 7);
        assert_eq!(t, TorsionCoord::from_level(6, 2, 7));
        assert_eq!(t.neg(), TorsionCoord::from_level(1, 5, 7));
        assert_eq!(t.level(), 7);
        assert!(t.add(&t.neg()).is_zero());
    }

    #[test]
    fn preimage_maps_back() {
        let l = ComplexLattice::gaussian();
        let iso = elementary_divisors(c(2.0, 1.0), &l, &l).unwrap();
        let p = TorsionCoord::from_level(1, 3, 7);
        let pre = preimage(&iso, &p);
        assert_eq!(iso.image(&pre), p);
    }
}
