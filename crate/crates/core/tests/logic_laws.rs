mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use topos_core::iso::hom;
use topos_core::logic::{
    char_map, exists_along, forall_along, omega, pullback_sub, sub_from_char, subobjects, Subobject,
};
use topos_core::presheaf::{NatTrans, Presheaf};
use topos_core::witness::random_presheaf;

use common::{random_sub, sites};

fn small_presheaf(rng: &mut StdRng, site_index: usize) -> Presheaf {
    let site = sites()[site_index % 3].clone();
    let max = if site.object_count() > 2 { 2 } else { 3 };
    random_presheaf(&site, max, rng)
}

/// A random map between random presheaves over one site.
fn random_map(rng: &mut StdRng, site_index: usize) -> NatTrans {
    loop {
        let a = small_presheaf(rng, site_index);
        let b = small_presheaf(rng, site_index);
        if let Some(alpha) = hom(&a, &b).choose(rng) {
            return alpha.clone();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn image_is_left_adjoint_to_pullback(seed in any::<u64>(), s in 0usize..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let alpha = random_map(&mut rng, s);
        let sa = random_sub(alpha.src(), &mut rng);
        let tb = random_sub(alpha.tgt(), &mut rng);
        let left = exists_along(&alpha, &sa).unwrap().le(&tb);
        let right = sa.le(&pullback_sub(&alpha, &tb).unwrap());
        prop_assert_eq!(left, right);
    }

    #[test]
    fn pullback_is_left_adjoint_to_forall(seed in any::<u64>(), s in 0usize..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let alpha = random_map(&mut rng, s);
        let sa = random_sub(alpha.src(), &mut rng);
        let tb = random_sub(alpha.tgt(), &mut rng);
        let left = pullback_sub(&alpha, &tb).unwrap().le(&sa);
        let right = tb.le(&forall_along(&alpha, &sa).unwrap());
        prop_assert_eq!(left, right);
    }

    #[test]
    fn frobenius(seed in any::<u64>(), s in 0usize..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let alpha = random_map(&mut rng, s);
        let sa = random_sub(alpha.src(), &mut rng);
        let tb = random_sub(alpha.tgt(), &mut rng);
        let lhs = exists_along(&alpha, &sa.meet(&pullback_sub(&alpha, &tb).unwrap()).unwrap()).unwrap();
        let rhs = exists_along(&alpha, &sa).unwrap().meet(&tb).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pullback_preserves_heyting_structure(seed in any::<u64>(), s in 0usize..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let alpha = random_map(&mut rng, s);
        let t1 = random_sub(alpha.tgt(), &mut rng);
        let t2 = random_sub(alpha.tgt(), &mut rng);
        let pb = |t: &Subobject| pullback_sub(&alpha, t).unwrap();
        prop_assert_eq!(pb(&t1.meet(&t2).unwrap()), pb(&t1).meet(&pb(&t2)).unwrap());
        prop_assert_eq!(pb(&t1.join(&t2).unwrap()), pb(&t1).join(&pb(&t2)).unwrap());
        prop_assert_eq!(pb(&t1.implies(&t2).unwrap()), pb(&t1).implies(&pb(&t2)).unwrap());
    }

    #[test]
    fn residuation(seed in any::<u64>(), s in 0usize..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = small_presheaf(&mut rng, s);
        let (x, y, z) = (random_sub(&a, &mut rng), random_sub(&a, &mut rng), random_sub(&a, &mut rng));
        prop_assert_eq!(x.meet(&y).unwrap().le(&z), x.le(&y.implies(&z).unwrap()));
        prop_assert_eq!(x.neg(), x.implies(&Subobject::bottom(&a)).unwrap());
        prop_assert!(x.le(&x.neg().neg()));
        prop_assert_eq!(x.neg(), x.neg().neg().neg());
    }

    #[test]
    fn classification_round_trip(seed in any::<u64>(), s in 0usize..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = small_presheaf(&mut rng, s);
        let sub = random_sub(&a, &mut rng);
        let chi = char_map(&sub);
        prop_assert_eq!(chi.tgt(), &omega(a.site()));
        prop_assert_eq!(sub_from_char(&chi).unwrap(), sub);
    }
}

#[test]
fn subobjects_are_counted_by_maps_into_omega() {
    let mut rng = StdRng::seed_from_u64(11);
    for (i, site) in sites().iter().enumerate() {
        let om = omega(site);
        for _ in 0..15 {
            let a = small_presheaf(&mut rng, i);
            let subs = subobjects(&a);
            let maps = hom(&a, &om);
            assert_eq!(subs.len(), maps.len());
            for chi in &maps {
                assert_eq!(&char_map(&sub_from_char(chi).unwrap()), chi);
            }
        }
    }
}
