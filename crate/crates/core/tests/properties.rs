use num_rational::Rational64;
use proptest::prelude::*;
use reglab::chartheory::{
    all_characters, dedekind_det_matrix, dedekind_det_spectral, inner_product, subgroup_characters,
    CosetSystem, FiniteAbelianGroup, Subgroup,
};
use reglab::heckefield::{ImagQuadField, OkElem, RayClassGroupData, CLASS_NUMBER_ONE};
use reglab::kronecker::{k21, EvalSettings};
use reglab::lattice::{pairing, sl2_change, ComplexLattice, TorsionCoord};
use reglab::numerics::gcd;
use reglab::stark::recognize;
use reglab::symbols::{convolve, divisor_regulator, TorsionDivisor};
use reglab::C64;

fn tau_strategy() -> impl Strategy<Value = C64> {
    // A slice of the fundamental domain away from the cusp.
    (-0.5f64..0.5, 0.9f64..1.6).prop_filter_map("outside |tau| >= 1", |(x, y)| {
        let t = C64::new(x, y);
        (t.norm() >= 1.0).then_some(t)
    })
}

fn torsion_strategy() -> impl Strategy<Value = TorsionCoord> {
    (3i64..=12)
        .prop_flat_map(|n| (0..n, 0..n, Just(n)))
        .prop_filter_map("zero point", |(a, b, n)| {
            let t = TorsionCoord::from_level(a, b, n);
            (!t.is_zero()).then_some(t)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pairing_is_a_character_on_the_lattice(tau in tau_strategy(), t in torsion_strategy(), m in -4i64..4, n in -4i64..4) {
        let lat = ComplexLattice::from_tau(tau).unwrap();
        let x0 = t.to_complex(&lat);
        let (w1, w2) = (lat.omega1(), lat.omega2());
        let lhs = pairing(x0, w1 * m as f64 + w2 * n as f64, &lat);
        let rhs = pairing(x0, w1, &lat).powi(m as i32) * pairing(x0, w2, &lat).powi(n as i32);
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert!((pairing(w1 * m as f64, w2 * n as f64, &lat) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn k21_is_odd_and_periodic(tau in tau_strategy(), t in torsion_strategy(), m in -3i64..3, n in -3i64..3) {
        let lat = ComplexLattice::from_tau(tau).unwrap();
        let s = EvalSettings::default();
        let u = t.to_complex(&lat);
        let v = k21(u, &lat, &s).unwrap();
        let scale = v.norm().max(1.0);
        prop_assert!((k21(-u, &lat, &s).unwrap() + v).norm() < 1e-10 * scale);
        let w = lat.omega1() * m as f64 + lat.omega2() * n as f64;
        prop_assert!((k21(u + w, &lat, &s).unwrap() - v).norm() < 1e-10 * scale);
    }

    #[test]
    fn basis_change_keeps_the_point(tau in tau_strategy(), t in torsion_strategy(), c in -3i64..=3, d in -3i64..=3) {
        prop_assume!(gcd(c, d) == 1);
        let (_, x, y) = reglab::numerics::ext_gcd(d, c);
        let (a, b) = (x, -y);
        let lat = ComplexLattice::from_tau(tau).unwrap();
        let moved = sl2_change(&lat, a, b, c, d).unwrap();
        let p = t.in_sl2_basis(a, b, c, d);
        let diff = p.to_complex(&moved) - t.to_complex(&lat);
        prop_assert!(lat.contains(diff), "{diff}");
    }

    #[test]
    fn symmetric_divisors_have_zero_regulator(t in torsion_strategy(), m in 1i64..4, tau in tau_strategy()) {
        let lat = ComplexLattice::from_tau(tau).unwrap();
        let d = TorsionDivisor::from_entries([(t, m), (t.neg(), m)]);
        let r = divisor_regulator(&d, &lat, &EvalSettings::default()).unwrap();
        prop_assert!(r.norm() < 1e-9);
    }

    #[test]
    fn convolution_multiplies_degrees(p in torsion_strategy(), q in torsion_strategy(), a in -3i64..=3, b in -3i64..=3) {
        prop_assume!(a != 0 && b != 0);
        let f = TorsionDivisor::from_entries([(p, a), (TorsionCoord::zero(), 1)]);
        let g = TorsionDivisor::from_entries([(q, b), (TorsionCoord::zero(), -1)]);
        prop_assert_eq!(convolve(&f, &g).degree(), f.degree() * g.degree());
    }

    #[test]
    fn recognize_recovers_rationals(p in -5000i64..5000, q in 1i64..2000) {
        let x = p as f64 / q as f64;
        let r = recognize(x, 10_000, 1e-12).unwrap();
        prop_assert_eq!(Rational64::new(r.p, r.q), Rational64::new(p, q));
    }

    #[test]
    fn field_norm_is_multiplicative(di in 0usize..CLASS_NUMBER_ONE.len(), a in -20i64..20, b in -20i64..20, c in -20i64..20, d in -20i64..20) {
        let k = ImagQuadField::new(CLASS_NUMBER_ONE[di]).unwrap();
        let (x, y) = (OkElem::new(a, b), OkElem::new(c, d));
        let xy = k.mul(x, y);
        prop_assert_eq!(k.norm(xy), k.norm(x) * k.norm(y));
        prop_assert!((k.embed(xy) - k.embed(x) * k.embed(y)).norm() < 1e-9);
        if !y.is_zero() {
            prop_assert_eq!(k.div_exact(xy, y), Some(x));
        }
    }

    #[test]
    fn artin_symbol_is_a_homomorphism(a in -30i64..30, b in -30i64..30, c in -30i64..30, d in -30i64..30) {
        let k = ImagQuadField::gaussian();
        let rc = RayClassGroupData::new(&k, OkElem::new(-6, 6)).unwrap();
        let (x, y) = (OkElem::new(a, b), OkElem::new(c, d));
        if let (Ok(sx), Ok(sy)) = (rc.artin_symbol(x), rc.artin_symbol(y)) {
            let sxy = rc.artin_symbol(k.mul(x, y)).unwrap();
            prop_assert_eq!(sxy, rc.group().add_idx(sx, sy));
        }
    }

    #[test]
    fn dedekind_routes_agree(seed in any::<u64>(), cfg in 0usize..4) {
        use rand::{Rng, SeedableRng};
        let (orders, gens): (Vec<i64>, Vec<Vec<i64>>) = [
            (vec![4], vec![vec![2]]),
            (vec![2, 2], vec![vec![1, 1]]),
            (vec![8], vec![vec![4]]),
            (vec![3, 6], vec![vec![0, 2]]),
        ][cfg].clone();
        let group = FiniteAbelianGroup::new(orders).unwrap();
        let sub = Subgroup::generated(&group, &gens);
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<C64> = (0..group.order()).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
        for chi in subgroup_characters(&group, &sub) {
            let s = dedekind_det_spectral(&group, &sub, &chi, &f).unwrap();
            let m = dedekind_det_matrix(&group, &sub, &chi, &f, &CosetSystem::random(&group, &sub, &mut r).unwrap());
            prop_assert!((s - m).norm() < 1e-10 * s.norm().max(1.0));
        }
    }
}

#[test]
fn characters_are_orthonormal() {
    for orders in [vec![6], vec![2, 4], vec![3, 3]] {
        let g = FiniteAbelianGroup::new(orders).unwrap();
        let whole = Subgroup::whole(&g);
        let chars = all_characters(&g);
        assert_eq!(chars.len(), g.order());
        for (i, a) in chars.iter().enumerate() {
            for (j, b) in chars.iter().enumerate() {
                let want = Rational64::from_integer(i64::from(i == j));
                assert_eq!(inner_product(a, b, &g, &whole), want);
            }
        }
    }
}
