//! Small numerical toolkit: compensated sums, complex gamma, the upper
//! incomplete gamma kernel, Gauss-Legendre nodes, LU determinants and the
//! Smith normal form over the integers.

use crate::error::{Error, Result};
use crate::C64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Threshold for recovering integers from floating coordinates.
pub const INTEGER_TOL: f64 = 1e-9;

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated complex accumulator (componentwise Neumaier).
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

pub fn csum<I: IntoIterator<Item = C64>>(it: I) -> C64 {
    let mut acc = ComplexSum::new();
    for z in it {
        acc.add(z);
    }
    acc.value()
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// log Γ(z) for Re z ≥ 1/2 (Lanczos, principal branch of the sum).
fn ln_gamma_right(z: C64) -> C64 {
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn is_nonpositive_integer(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Γ(z) for complex z; infinite at the poles.
pub fn gamma(z: C64) -> C64 {
    if is_nonpositive_integer(z) {
        return C64::new(f64::INFINITY, 0.0);
    }
    if z.re < 0.5 {
        PI / ((PI * z).sin() * gamma(1.0 - z))
    } else {
        ln_gamma_right(z).exp()
    }
}

/// 1/Γ(z), entire, exactly zero at the nonpositive integers.
pub fn rgamma(z: C64) -> C64 {
    if is_nonpositive_integer(z) {
        return C64::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        (PI * z).sin() * gamma(1.0 - z) / PI
    } else {
        (-ln_gamma_right(z)).exp()
    }
}

const GL_ORDER: usize = 24;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = GL_ORDER;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        out
    })
}

fn g_continued_fraction(s: C64, z: f64) -> C64 {
    // Lentz evaluation of the classical continued fraction for Γ(s, z);
    // G(s, z) = z^{-s} Γ(s, z) = e^{-z} h.
    let tiny = 1e-300;
    let mut b = C64::new(z + 1.0, 0.0) - s;
    let mut c = C64::new(1.0 / tiny, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..5000 {
        let fi = i as f64;
        let an = -fi * (C64::new(fi, 0.0) - s);
        b += 2.0;
        d = an * d + b;
        if d.norm() < tiny {
            d = C64::new(tiny, 0.0);
        }
        c = b + an / c;
        if c.norm() < tiny {
            c = C64::new(tiny, 0.0);
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (-z).exp() * h
}

/// G(s, z) = ∫₁^∞ e^{-zt} t^{s-1} dt = z^{-s} Γ(s, z), for z > 0 and any s.
pub fn upper_g(s: C64, z: f64) -> C64 {
    debug_assert!(z > 0.0);
    const SWITCH: f64 = 2.0;
    if z >= SWITCH {
        return g_continued_fraction(s, z);
    }
    let top = (SWITCH / z).ln();
    let width = 0.5 / (1.0 + s.norm() / 4.0);
    let panels = (top / width).ceil().max(1.0) as usize;
    let h = top / panels as f64;
    let mut acc = ComplexSum::new();
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for &(x, w) in gauss_legendre() {
            let v = mid + 0.5 * h * x;
            acc.add(w * 0.5 * h * (s * v - z * v.exp()).exp());
        }
    }
    acc.value() + (s * top).exp() * g_continued_fraction(s, SWITCH)
}

/// Determinant by LU with partial pivoting.
pub fn det(m: &[Vec<C64>]) -> C64 {
    let n = m.len();
    let mut a: Vec<Vec<C64>> = m.to_vec();
    let mut det = C64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm()))
            .unwrap();
        if a[p][k].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let piv = a[k][k];
        det *= piv;
        for i in k + 1..n {
            let f = a[i][k] / piv;
            if f.norm() == 0.0 {
                continue;
            }
            let (top, rest) = a.split_at_mut(i);
            for (dst, src) in rest[0][k..].iter_mut().zip(&top[k][k..]) {
                *dst -= f * src;
            }
        }
    }
    det
}

pub fn gcd(a: i64, b: i64) -> i64 {
    num_integer::Integer::gcd(&a, &b)
}

pub fn lcm(a: i64, b: i64) -> i64 {
    num_integer::Integer::lcm(&a, &b)
}

/// Extended gcd: returns (g, x, y) with a x + b y = g ≥ 0.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = num_integer::Integer::extended_gcd(&a, &b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Smith normal form `P · A · Q = D` of an m×n integer matrix.
#[derive(Clone, Debug)]
pub struct Smith {
    pub diag: Vec<i64>,
    pub p: Vec<Vec<i64>>,
    pub q: Vec<Vec<i64>>,
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

pub fn smith_normal_form(a: &[Vec<i64>], ncols: usize) -> Smith {
    let m = a.len();
    let n = ncols;
    let mut d: Vec<Vec<i128>> = a
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut p = identity(m);
    let mut q = identity(n);

    fn row_op(d: &mut [Vec<i128>], p: &mut [Vec<i128>], dst: usize, src: usize, f: i128) {
        for j in 0..d[dst].len() {
            let v = d[src][j];
            d[dst][j] -= f * v;
        }
        for j in 0..p[dst].len() {
            let v = p[src][j];
            p[dst][j] -= f * v;
        }
    }
    fn col_op(d: &mut [Vec<i128>], q: &mut [Vec<i128>], dst: usize, src: usize, f: i128) {
        for row in d.iter_mut() {
            let v = row[src];
            row[dst] -= f * v;
        }
        for row in q.iter_mut() {
            let v = row[src];
            row[dst] -= f * v;
        }
    }
    fn swap_cols(d: &mut [Vec<i128>], q: &mut [Vec<i128>], i: usize, j: usize) {
        for row in d.iter_mut() {
            row.swap(i, j);
        }
        for row in q.iter_mut() {
            row.swap(i, j);
        }
    }

    let mut diag = Vec::new();
    for t in 0..m.min(n) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if d[i][j] != 0 && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            d.swap(t, bi);
            p.swap(t, bi);
            swap_cols(&mut d, &mut q, t, bj);
            let mut clean = true;
            for i in t + 1..m {
                let f = d[i][t].div_euclid(d[t][t]);
                if f != 0 {
                    row_op(&mut d, &mut p, i, t, f);
                }
                if d[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let f = d[t][j].div_euclid(d[t][t]);
                if f != 0 {
                    col_op(&mut d, &mut q, j, t, f);
                }
                if d[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let piv = d[t][t];
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| d[i][j] % piv != 0));
            match bad {
                Some(i) => row_op(&mut d, &mut p, t, i, -1),
                None => break,
            }
        }
        if d[t][t] < 0 {
            for x in d[t].iter_mut() {
                *x = -*x;
            }
            for x in p[t].iter_mut() {
                *x = -*x;
            }
        }
        diag.push(d[t][t] as i64);
    }
    let cast = |v: Vec<Vec<i128>>| -> Vec<Vec<i64>> {
        v.into_iter()
            .map(|r| r.into_iter().map(|x| x as i64).collect())
            .collect()
    };
    Smith {
        diag,
        p: cast(p),
        q: cast(q),
    }
}

/// Inverse of a unimodular integer matrix (via exact rational elimination).
pub fn unimodular_inverse(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let mut m: Vec<Vec<i128>> = a
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut inv = identity(n);
    // Integer Gauss-Jordan works because every pivot can be made ±1 by
    // Euclidean row reduction for unimodular input.
    for k in 0..n {
        loop {
            let nz: Vec<usize> = (k..n).filter(|&i| m[i][k] != 0).collect();
            let piv = *nz.iter().min_by_key(|&&i| m[i][k].abs()).unwrap();
            m.swap(k, piv);
            inv.swap(k, piv);
            let mut done = true;
            for i in k + 1..n {
                if m[i][k] != 0 {
                    let f = m[i][k].div_euclid(m[k][k]);
                    for j in 0..n {
                        let (a1, b1) = (m[k][j], inv[k][j]);
                        m[i][j] -= f * a1;
                        inv[i][j] -= f * b1;
                    }
                    if m[i][k] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[k][k] < 0 {
            for j in 0..n {
                m[k][j] = -m[k][j];
                inv[k][j] = -inv[k][j];
            }
        }
        assert_eq!(m[k][k], 1, "matrix is not unimodular");
    }
    for k in (0..n).rev() {
        for i in 0..k {
            let f = m[i][k];
            if f != 0 {
                for j in 0..n {
                    let (a1, b1) = (m[k][j], inv[k][j]);
                    m[i][j] -= f * a1;
                    inv[i][j] -= f * b1;
                }
            }
        }
    }
    inv.into_iter()
        .map(|r| r.into_iter().map(|x| x as i64).collect())
        .collect()
}

/// Parses complex literals such as `0.5`, `1+2i`, `-i`, `3.5e-1-0.2i`.
pub fn parse_complex(text: &str) -> Result<C64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("malformed complex literal `{text}`"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s
            .parse::<f64>()
            .map(|x| C64::new(x, 0.0))
            .map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_txt, im_txt) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re_txt.is_empty() {
        0.0
    } else {
        re_txt.parse::<f64>().map_err(|_| bad())?
    };
    let im = match im_txt {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| bad())?,
    };
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(C64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancellation() {
        let mut s = NeumaierSum::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma(C64::new(5.0, 0.0)).re - 24.0).abs() < 1e-12);
        assert!((gamma(C64::new(0.5, 0.0)).re - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(C64::new(-0.5, 0.0)).re + 2.0 * PI.sqrt()).abs() < 1e-13);
        // |Γ(i)|² = π / sinh π
        let g = gamma(C64::new(0.0, 1.0));
        assert!((g.norm_sqr() - PI / PI.sinh()).abs() < 1e-14);
        assert_eq!(rgamma(C64::new(-3.0, 0.0)), C64::new(0.0, 0.0));
        let z = C64::new(0.3, 0.7);
        assert!((gamma(z) * rgamma(z) - 1.0).norm() < 1e-14);
    }

    #[test]
    fn upper_g_matches_closed_forms() {
        // G(1, z) = e^{-z}/z
        for z in [0.01, 0.7, 1.9, 2.1, 15.0] {
            let g = upper_g(C64::new(1.0, 0.0), z);
            let want = (-z).exp() / z;
            assert!((g.re - want).abs() < 1e-13 * want.max(1.0), "z={z}");
        }
        // G(2, z) = e^{-z}(1+z)/z²
        for z in [0.05, 1.0, 3.0] {
            let g = upper_g(C64::new(2.0, 0.0), z);
            let want = (-z).exp() * (1.0 + z) / (z * z);
            assert!((g.re - want).abs() < 1e-12 * want, "z={z}");
        }
        // G(0, z) = E1(z); E1(1) = 0.21938393439552029
        assert!((upper_g(C64::new(0.0, 0.0), 1.0).re - 0.219_383_934_395_520_3).abs() < 1e-14);
    }

    #[test]
    fn upper_g_is_continuous_across_switch() {
        let s = C64::new(-0.7, 1.3);
        let a = upper_g(s, 2.0 - 1e-12);
        let b = upper_g(s, 2.0 + 1e-12);
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn smith_of_multiplication_by_one_plus_i() {
        let sm = smith_normal_form(&[vec![1, -1], vec![1, 1]], 2);
        assert_eq!(sm.diag, vec![1, 2]);
    }

    #[test]
    fn unimodular_roundtrip() {
        let a = vec![vec![2, 3], vec![1, 2]];
        let b = unimodular_inverse(&a);
        assert_eq!(b, vec![vec![2, -3], vec![-1, 2]]);
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.5").unwrap(), C64::new(0.5, 0.0));
        assert_eq!(parse_complex("1+2i").unwrap(), C64::new(1.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-1-2e+0i").unwrap(), C64::new(0.1, -2.0));
        assert!(parse_complex("1+x").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn lu_determinant() {
        let m = vec![
            vec![C64::new(2.0, 0.0), C64::new(1.0, 1.0)],
            vec![C64::new(0.0, 1.0), C64::new(3.0, 0.0)],
        ];
        let want = C64::new(6.0, 0.0) - C64::new(1.0, 1.0) * C64::new(0.0, 1.0);
        assert!((det(&m) - want).norm() < 1e-15);
    }
}
