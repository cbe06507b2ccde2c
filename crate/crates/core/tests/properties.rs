//! Randomized invariants.

mod common;

use std::sync::OnceLock;

use fermat_descent::arith::{self, PadicOrder, Triple};
use fermat_descent::cyclotomic::{self, CycInt};
use fermat_descent::density;
use fermat_descent::finite_field::{self, FqElt, FqField, PowerResidueChar};
use fermat_descent::local_field::LocalField;
use fermat_descent::parity::{self, TripleSelection};
use fermat_descent::root_number;
use fermat_descent::selmer;
use num_bigint::BigInt;
use proptest::prelude::*;

const PRIMES: [u64; 4] = [5, 7, 11, 13];

fn local_field(p: u64, m: u32) -> &'static LocalField {
    static FIELDS: OnceLock<Vec<((u64, u32), LocalField)>> = OnceLock::new();
    let fields = FIELDS.get_or_init(|| {
        [5u64, 7]
            .iter()
            .flat_map(|&p| [4u32, 5].map(|m| ((p, m), LocalField::new(p, m).unwrap())))
            .collect()
    });
    &fields.iter().find(|(k, _)| *k == (p, m)).unwrap().1
}

fn f_625() -> &'static (FqField, PowerResidueChar) {
    static FIELD: OnceLock<(FqField, PowerResidueChar)> = OnceLock::new();
    FIELD.get_or_init(|| {
        let field = finite_field::build_field(5, 4).unwrap();
        let chi = field.character(13).unwrap();
        (field, chi)
    })
}

fn triple_strategy() -> impl Strategy<Value = Triple> {
    prop::sample::select(vec![3u64, 5, 7, 11])
        .prop_flat_map(|p| (Just(p), 1..p - 1))
        .prop_flat_map(|(p, r)| (Just(p), Just(r), 1..p - r))
        .prop_map(|(p, r, s)| Triple::new(r, s, p - r - s, p).unwrap())
}

fn admissible(delta: i64, p: u64) -> bool {
    let red = arith::reduce_delta(delta, p).unwrap();
    red.delta == delta && red.ord_p(p) == 0 && red.all_inert
}

fn cyc_strategy(p: u64) -> impl Strategy<Value = CycInt> {
    prop::collection::vec(-20i64..20, p as usize - 1)
        .prop_map(move |c| CycInt::new(p, c.into_iter().map(BigInt::from).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn legendre_is_multiplicative(a in -10_000i64..10_000, b in -10_000i64..10_000,
                                  p in prop::sample::select(vec![3u64, 5, 7, 11, 13, 37, 101])) {
        prop_assume!(a % p as i64 != 0 && b % p as i64 != 0);
        let lab = arith::legendre(a * b, p).unwrap();
        prop_assert_eq!(lab, arith::legendre(a, p).unwrap() * arith::legendre(b, p).unwrap());
        prop_assert_eq!(lab, common::legendre_by_squares(a * b, p));
    }

    #[test]
    fn chi_is_additive(a in 1u128..625, b in 1u128..625) {
        let (field, chi) = f_625();
        let (x, y): (FqElt, FqElt) = (field.decode(a), field.decode(b));
        let ex = chi.exponent_of(field, &x).unwrap();
        let ey = chi.exponent_of(field, &y).unwrap();
        let exy = chi.exponent_of(field, &field.mul(&x, &y)).unwrap();
        prop_assert_eq!(exy, (ex + ey) % 13);
        prop_assert_eq!(chi.exponent_of(field, &field.pow(&x, 13)).unwrap(), 0);
    }

    #[test]
    fn root_number_is_orbit_invariant(t in triple_strategy(), delta in 1i64..2000) {
        let red = arith::reduce_delta(delta, t.p).unwrap();
        let eps = root_number::epsilon_global(&t, red.delta).unwrap().global;
        for (_, u) in t.orbit() {
            prop_assert_eq!(root_number::epsilon_global(&u, red.delta).unwrap().global, eps);
        }
    }

    #[test]
    fn root_number_factors_multiply(t in triple_strategy(), delta in 1i64..5000) {
        let red = arith::reduce_delta(delta, t.p).unwrap();
        let rep = root_number::epsilon_global(&t, red.delta).unwrap();
        let prod = rep.eps_inf * rep.eps_p * rep.eps_ell.iter().map(|(_, e)| e).product::<i8>();
        prop_assert_eq!(prod, rep.global);
        let at = root_number::alpha_tau(&t, red.delta).unwrap();
        let sign = if (at.alpha as u32 + at.tau) % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(sign, rep.global);
    }

    #[test]
    fn d_is_nonzero_when_u_is_one(t in triple_strategy(), delta in 1i64..5000) {
        let red = arith::reduce_delta(delta, t.p).unwrap();
        let x = arith::x_invariant(&t, red.delta).unwrap();
        if x.u <= 1 {
            let d = x.d.unwrap();
            prop_assert!(d != 0 && d < t.p);
        }
    }

    #[test]
    fn u_vanishes_iff_p_divides(delta in 1i64..100_000, p in prop::sample::select(vec![3u64, 5, 7])) {
        let red = arith::reduce_delta(delta, p).unwrap();
        let u = arith::u_invariant(red.delta, p).unwrap();
        prop_assert_eq!(u.u == PadicOrder::Finite(0), red.ord_p(p) != 0);
    }

    #[test]
    fn galois_action_is_a_ring_map(x in cyc_strategy(7), y in cyc_strategy(7), h in 1u64..7) {
        let s = |z: &CycInt| z.galois_apply(h).unwrap();
        prop_assert_eq!(s(&x.mul(&y)), s(&x).mul(&s(&y)));
        prop_assert_eq!(s(&x.add(&y)), s(&x).add(&s(&y)));
        prop_assert_eq!(x.conj(), x.galois_apply(6).unwrap());
        prop_assert_eq!(x.mul(&x.conj()).norm(), x.norm().pow(2));
    }

    #[test]
    fn local_image_sizes(p in prop::sample::select(PRIMES.to_vec()), r in 1u64..12, delta in 1i64..10_000) {
        prop_assume!(r <= p - 2 && delta % p as i64 != 0);
        let img = selmer::local_image_at_p(r, delta, p).unwrap();
        prop_assert_eq!(img.dimension(), (p as usize).div_ceil(2));
    }

    #[test]
    fn bound_dominates_dimension(p in prop::sample::select(PRIMES.to_vec()), r in 1u64..12, delta in 1i64..3000) {
        prop_assume!(r <= p - 2 && admissible(delta, p));
        let dim = selmer::selmer_closed_form(r, delta, p).unwrap().dimension as u64;
        prop_assert!(selmer::selmer_upper_bound(delta, p, None).unwrap() >= dim);
    }

    #[test]
    fn parity_merge_is_associative(a in 1i64..80, b in 1i64..80, c in 1i64..80) {
        let sel = TripleSelection::All;
        let x = parity::parity_scan_deltas(5, 1..=a, &sel).unwrap();
        let y = parity::parity_scan_deltas(5, a + 1..=a + b, &sel).unwrap();
        let z = parity::parity_scan_deltas(5, a + b + 1..=a + b + c, &sel).unwrap();
        let left = x.clone().merge(y.clone()).merge(z.clone());
        let right = x.merge(y.merge(z));
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(left, parity::parity_scan(5, (a + b + c) as u64, &sel).unwrap());
    }

    #[test]
    fn density_classes_reconstruct(x in 1u64..3000, t in triple_strategy()) {
        let rep = density::density_experiment(&t, x, false).unwrap();
        prop_assert!(rep.alpha_constant);
        prop_assert_eq!(rep.classes.iter().map(|c| c.n_plus).sum::<u64>(), rep.n_plus);
        prop_assert_eq!(rep.classes.iter().map(|c| c.n_total).sum::<u64>(), rep.n_total);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unit_class_round_trip(p in prop::sample::select(vec![5u64, 7]), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let k = local_field(p, 4);
        let e: Vec<u64> = (0..=p).map(|_| rng.gen_range(0..p)).collect();
        let x = common::product_of_generators(k, &e);
        prop_assert_eq!(&k.unit_class(&x).unwrap().0, &e);
        prop_assert_eq!(&k.unit_class_filtration(&x).unwrap().0, &e);
        prop_assert_eq!(k.is_pth_power(&x).unwrap(), e.iter().all(|&c| c == 0));
    }

    #[test]
    fn pth_powers_and_precision(p in prop::sample::select(vec![5u64, 7]), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (o, c) = common::random_integers(p, &mut rng);
        let (k4, k5) = (local_field(p, 4), local_field(p, 5));
        let (x4, x5) = (common::realize(k4, o, &c), common::realize(k5, o, &c));
        prop_assert!(k4.is_pth_power(&k4.pow(&x4, p)).unwrap());
        let class = k4.unit_class(&x4).unwrap();
        prop_assert_eq!(&class, &k5.unit_class(&x5).unwrap());
        prop_assert_eq!(k4.is_pth_power(&x4).unwrap(), class.is_zero());
        prop_assert_eq!(k4.is_pth_power(&x4).unwrap(), k5.is_pth_power(&x5).unwrap());
    }

    #[test]
    fn galois_scales_eigen_coordinates(p in prop::sample::select(vec![5u64, 7]), seed in any::<u64>(), h in 1u64..7) {
        use rand::SeedableRng;
        prop_assume!(h < p);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (o, c) = common::random_integers(p, &mut rng);
        let k = local_field(p, 4);
        let x = common::realize(k, o, &c);
        let before = k.unit_class(&x).unwrap().0;
        let after = k.unit_class(&k.galois_local(h, &x).unwrap()).unwrap().0;
        for (i, (&b, &a)) in before.iter().zip(&after).enumerate() {
            let weight = arith::pow_mod(h, i as u64 % (p - 1), p);
            prop_assert_eq!(a, b * weight % p, "coordinate {}", i);
        }
    }
}

#[test]
fn cyclotomic_units_scale_under_galois() {
    for p in [5u64, 7] {
        let k = local_field(p, 4);
        for (i, e) in cyclotomic::cyclotomic_units(p).unwrap() {
            let base = k.unit_class(&k.embed_cyclotomic(&e).unwrap()).unwrap().0;
            for h in 2..p {
                let moved = k
                    .unit_class(&k.embed_cyclotomic(&e.galois_apply(h).unwrap()).unwrap())
                    .unwrap()
                    .0;
                let w = arith::pow_mod(h, i, p);
                let expect: Vec<u64> = base.iter().map(|&b| b * w % p).collect();
                assert_eq!(moved, expect, "p={p} E_{i} h={h}");
            }
        }
    }
}
