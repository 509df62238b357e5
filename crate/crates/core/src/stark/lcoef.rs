use crate::chartheory::{
    dedekind_det_matrix, dedekind_det_spectral, CharacterData, CosetSystem, FiniteAbelianGroup,
    Subgroup,
};
use crate::error::{Error, Result};
use crate::json::Cx;
use crate::C64;
use serde::Serialize;

pub const DEDEKIND_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct DualRoute {
    pub matrix: Cx,
    pub spectral: Cx,
    pub residual: f64,
}

/// det[Σ_{τ∈G} χ(τ) f(τγ′γ⁻¹)] by both routes; errors if they disagree.
pub fn l_value_as_determinant(
    group: &FiniteAbelianGroup,
    sub: &Subgroup,
    chi: &CharacterData,
    f: &[C64],
    cosets: &CosetSystem,
) -> Result<DualRoute> {
    let m = dedekind_det_matrix(group, sub, chi, f, cosets);
    let s = dedekind_det_spectral(group, sub, chi, f)?;
    let residual = (m - s).norm() / m.norm().max(s.norm()).max(f64::MIN_POSITIVE);
    if residual > DEDEKIND_TOL {
        return Err(Error::RouteMismatch {
            what: "Dedekind determinant".into(),
            residual,
        });
    }
    Ok(DualRoute {
        matrix: Cx(m),
        spectral: Cx(s),
        residual,
    })
}

/// c(E,χ) = L^{(h)}(0, φ̄⊗χ)·L^{(h)}(0, φ⊗χ).
#[derive(Clone, Debug, Serialize)]
pub struct LeadingCoefficient {
    pub l_phibar: DualRoute,
    pub l_phi: DualRoute,
    pub c: Cx,
}

/// `deriv_phibar[γ]` = L′(0, φ̄, γ); the φ half uses the conjugate values.
pub fn leading_coefficient(
    group: &FiniteAbelianGroup,
    sub: &Subgroup,
    chi: &CharacterData,
    deriv_phibar: &[C64],
    cosets: &CosetSystem,
) -> Result<LeadingCoefficient> {
    let conj: Vec<C64> = deriv_phibar.iter().map(|z| z.conj()).collect();
    let l_phibar = l_value_as_determinant(group, sub, chi, deriv_phibar, cosets)?;
    let l_phi = l_value_as_determinant(group, sub, chi, &conj, cosets)?;
    let c = l_phibar.matrix.0 * l_phi.matrix.0;
    Ok(LeadingCoefficient {
        l_phibar,
        l_phi,
        c: Cx(c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_group_gives_modulus_squared() {
        let g = FiniteAbelianGroup::trivial();
        let sub = Subgroup::whole(&g);
        let chi = CharacterData::trivial(&g);
        let f = [C64::new(0.3, -0.7)];
        let cs = CosetSystem::new(&g, &sub).unwrap();
        let lc = leading_coefficient(&g, &sub, &chi, &f, &cs).unwrap();
        assert!((lc.c.0 - f[0].norm_sqr()).norm() < 1e-15);
    }

    #[test]
    fn two_element_group_and_conjugation() {
        let g = FiniteAbelianGroup::new(vec![2]).unwrap();
        let triv = Subgroup::trivial(&g);
        let chi = CharacterData::trivial(&g);
        let f = [C64::new(0.3, -0.7), C64::new(1.1, 0.2)];
        let cs = CosetSystem::new(&g, &triv).unwrap();
        let d = l_value_as_determinant(&g, &triv, &chi, &f, &cs).unwrap();
        assert!((d.matrix.0 - (f[0] + f[1]) * (f[0] - f[1])).norm() < 1e-14);

        let z4 = FiniteAbelianGroup::new(vec![4]).unwrap();
        let whole = Subgroup::whole(&z4);
        let cs = CosetSystem::new(&z4, &whole).unwrap();
        let f4: Vec<C64> = (0..4)
            .map(|k| C64::new(0.2 * k as f64 + 0.1, 0.5 - 0.3 * k as f64))
            .collect();
        let chi = CharacterData::new(&z4, vec![1]).unwrap();
        let a = leading_coefficient(&z4, &whole, &chi, &f4, &cs)
            .unwrap()
            .c
            .0;
        let b = leading_coefficient(&z4, &whole, &chi.conj(), &f4, &cs)
            .unwrap()
            .c
            .0;
        assert!((a - b.conj()).norm() < 1e-14);
    }
}
