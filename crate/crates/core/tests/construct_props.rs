use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ttp_core::construct::*;
use ttp_core::schedule::validate_tournament;
use ttp_core::Tournament;

fn revalidate(t: &Tournament) {
    validate_tournament(t.matches(), t.n()).expect("still a tournament");
}

#[test]
fn canonical_factorization_pairs_slots_k_and_k_plus_n_minus_1() {
    for n in [4, 6, 8, 10] {
        let f = canonical_factorization(n).unwrap();
        assert_eq!(f.matchings().len(), 2 * n - 2);
        for m in f.matchings() {
            assert!(m.is_perfect());
        }
        for (i, j) in all_edges(n) {
            let occ = f.occurrences(i, j);
            assert_eq!(occ.len(), 2, "n={n} edge {{{i},{j}}}");
            let (k, k2) = (occ[0], occ[1]);
            assert!(k < n, "n={n}: first occurrence {k} not in the first half");
            assert!((n..=2 * n - 2).contains(&k2));
            assert_eq!(k2, k + n - 1);
        }
    }
}

#[test]
fn every_orientation_of_the_canonical_factorization_is_a_tournament() {
    let f = canonical_factorization(4).unwrap();
    for bits in 0u32..64 {
        let choices: Vec<bool> = (0..6).map(|e| bits >> e & 1 == 1).collect();
        let t = orient_complementary(&f, &choices).unwrap();
        revalidate(&t);
    }
}

/// One random transformation step; returns `None` when the tournament has no
/// site for the chosen operation.
fn random_step(t: &Tournament, rng: &mut ChaCha8Rng) -> Option<(usize, Tournament)> {
    let op = rng.gen_range(0..4);
    let next = match op {
        0 => {
            let (k1, k2, i, j) = *home_away_swap_sites(t).choose(rng)?;
            Some(home_away_swap(t, k1, k2, i, j).unwrap())
        }
        1 => {
            let (k1, k2, i, j, i2, j2) = *partial_slot_swap_sites(t).choose(rng)?;
            Some(partial_slot_swap(t, k1, k2, i, j, i2, j2).unwrap())
        }
        2 => Some(cyclic_shift(t, rng.gen_range(-20..20))),
        _ => {
            let mut perm: Vec<usize> = (1..=t.n()).collect();
            perm.shuffle(rng);
            Some(relabel_teams(t, &perm))
        }
    };
    next.map(|t| (op, t))
}

#[test]
fn seeded_transformations_preserve_validity() {
    let mut applied = [0usize; 4];
    for case in 0..1000u64 {
        let n = [4, 6, 8][case as usize % 3];
        let mut rng = ChaCha8Rng::seed_from_u64(case);
        let mut t = random_tournament(n, case).unwrap();
        for _ in 0..3 {
            if let Some((op, next)) = random_step(&t, &mut rng) {
                revalidate(&next);
                assert_eq!(next.matches().len(), n * (n - 1));
                t = next;
                applied[op] += 1;
            }
        }
    }
    assert!(applied.iter().all(|&c| c >= 100), "steps per operation: {applied:?}");
}

#[test]
fn swaps_are_involutions_and_shift_composes() {
    for seed in 0..50 {
        let t = random_tournament(6, seed).unwrap();
        for (k1, k2, i, j) in home_away_swap_sites(&t) {
            let u = home_away_swap(&t, k1, k2, i, j).unwrap();
            assert_eq!(home_away_swap(&u, k1, k2, j, i).unwrap(), t);
        }
        for (k1, k2, i, j, i2, j2) in partial_slot_swap_sites(&t) {
            let u = partial_slot_swap(&t, k1, k2, i, j, i2, j2).unwrap();
            assert_eq!(partial_slot_swap(&u, k2, k1, i, j, i2, j2).unwrap(), t);
        }
        assert_eq!(cyclic_shift(&cyclic_shift(&t, 3), -3), t);
        assert_eq!(cyclic_shift(&t, 10), t);
    }
}

#[test]
fn exhaustive_four_team_transformations() {
    let all = all_tournaments(4).unwrap();
    assert_eq!(all.len(), 5760);
    let (mut ha, mut ps) = (0usize, 0usize);
    for t in &all {
        for (k1, k2, i, j) in home_away_swap_sites(t) {
            revalidate(&home_away_swap(t, k1, k2, i, j).unwrap());
            ha += 1;
        }
        for (k1, k2, i, j, i2, j2) in partial_slot_swap_sites(t) {
            revalidate(&partial_slot_swap(t, k1, k2, i, j, i2, j2).unwrap());
            ps += 1;
        }
        for s in 0..6 {
            revalidate(&cyclic_shift(t, s));
        }
    }
    // Every match has exactly one home-away swap site.
    assert_eq!(ha, 5760 * 12);
    assert!(ps > 0);
}

#[test]
fn swaps_reject_missing_matches() {
    let t = orient_complementary(&canonical_factorization(4).unwrap(), &default_orientation(4)).unwrap();
    let (k1, k2, i, j) = home_away_swap_sites(&t)[0];
    assert!(matches!(home_away_swap(&t, k1, k2, j, i), Err(ConstructError::MissingMatch(_))));
    assert!(matches!(partial_slot_swap(&t, 1, 2, 1, 1, 2, 3), Err(ConstructError::TeamsNotDistinct)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_walks_stay_valid(seed in any::<u64>(), half in 2usize..6, steps in 1usize..8) {
        let n = 2 * half;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = random_tournament(n, seed).unwrap();
        for _ in 0..steps {
            if let Some((_, next)) = random_step(&t, &mut rng) {
                t = next;
            }
        }
        prop_assert!(validate_tournament(t.matches(), n).is_ok());
        prop_assert_eq!(home_away_swap_sites(&t).len(), n * (n - 1));
    }
}
