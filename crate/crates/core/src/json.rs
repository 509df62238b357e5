//! Serde adapters: complex numbers as `{"re": "...", "im": "..."}` decimal
//! strings, rationals as `"p/q"` strings.

use crate::C64;
use num_rational::Rational64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct Repr {
    re: String,
    im: String,
}

fn to_repr(z: &C64) -> Repr {
    Repr {
        re: format!("{:?}", z.re),
        im: format!("{:?}", z.im),
    }
}

fn from_repr<E: serde::de::Error>(r: Repr) -> Result<C64, E> {
    let re = r.re.parse::<f64>().map_err(E::custom)?;
    let im = r.im.parse::<f64>().map_err(E::custom)?;
    Ok(C64::new(re, im))
}

/// Newtype for complex values inside report structures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx(pub C64);

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        to_repr(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        from_repr(Repr::deserialize(d)?).map(Cx)
    }
}

pub fn cx_vec(v: &[C64]) -> Vec<Cx> {
    v.iter().copied().map(Cx).collect()
}

pub fn cx_mat(m: &[Vec<C64>]) -> Vec<Vec<Cx>> {
    m.iter().map(|r| cx_vec(r)).collect()
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }
}

pub fn format_rational(r: &Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(text: &str) -> Result<Rational64, String> {
    let t = text.trim();
    let (p, q) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let p: i64 = p.parse().map_err(|_| format!("bad rational `{text}`"))?;
    let q: i64 = q.parse().map_err(|_| format!("bad rational `{text}`"))?;
    if q == 0 {
        return Err(format!("zero denominator in `{text}`"));
    }
    Ok(Rational64::new(p, q))
}

pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        format_rational(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        let t = String::deserialize(d)?;
        parse_rational(&t).map_err(D::Error::custom)
    }
}
