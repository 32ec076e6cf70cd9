mod common;

use afsearch::programs_db::{self, IslandStore, ScoredProgram};
use afsearch::seeds;
use proptest::prelude::*;
use rand::Rng;

fn scored(rng: &mut rand_chacha::ChaCha8Rng) -> ScoredProgram {
    let p = common::random_program(rng);
    // Coarse scores so that clusters actually collect several programs.
    let sig = (0..2).map(|_| rng.random_range(0..5) as f64 / 2.0).collect();
    ScoredProgram::new(p, sig, 0, Vec::new()).unwrap()
}

fn ids(store: &IslandStore) -> Vec<(usize, String)> {
    store.programs().map(|(i, p)| (i, p.id.clone())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn best_is_monotone_and_reset_counts_hold(seed in any::<u64>(), half in 1usize..5, ops in 1usize..120) {
        let n = 2 * half;
        let mut rng = seeds::rng(seed);
        let mut store = IslandStore::init(n, scored(&mut rng)).unwrap();
        let mut best = store.best().unwrap().aggregate;
        for k in 0..ops {
            if rng.random_range(0..10) == 0 {
                let mut bests: Vec<(f64, usize)> = store
                    .islands()
                    .iter()
                    .enumerate()
                    .map(|(i, isl)| (isl.best().map_or(f64::NEG_INFINITY, |b| b.aggregate), i))
                    .collect();
                bests.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                let surviving: usize = bests[..half].iter().map(|&(_, i)| store.islands()[i].len()).sum();
                store.reset(seeds::derive(seed, &[k as u64]));
                prop_assert_eq!(store.len(), surviving + half);
            } else {
                let island = rng.random_range(0..n);
                store.insert(scored(&mut rng), island).unwrap();
            }
            let now = store.best().unwrap().aggregate;
            prop_assert!(now >= best, "best fell from {best} to {now}");
            best = now;
        }
    }

    #[test]
    fn archive_replay_rebuilds_the_store(seed in any::<u64>(), ops in 1usize..60) {
        let mut rng = seeds::rng(seed);
        let mut store = IslandStore::init(4, scored(&mut rng)).unwrap();
        for k in 0..ops {
            if k % 17 == 16 {
                store.reset(seeds::derive(seed, &[k as u64]));
            } else {
                store.insert(scored(&mut rng), rng.random_range(0..4)).unwrap();
            }
        }
        let mut buf = Vec::new();
        programs_db::write_archive(&mut buf, store.log()).unwrap();
        let records = programs_db::read_archive(&buf[..]).unwrap();
        prop_assert_eq!(&records[..], store.log());
        let replayed = IslandStore::replay(4, &records).unwrap();
        prop_assert_eq!(ids(&replayed), ids(&store));
        prop_assert_eq!(replayed.best().map(|b| &b.id), store.best().map(|b| &b.id));
    }

    #[test]
    fn higher_cluster_is_drawn_more_often(tau in 0.05f64..5.0) {
        let low = ScoredProgram::new(afsearch::afdsl::parse("argmax(VAR)").unwrap(), vec![1.0], 0, vec![]).unwrap();
        let high = ScoredProgram::new(afsearch::afdsl::parse("argmin(MEAN)").unwrap(), vec![2.0], 0, vec![]).unwrap();
        let mut store = IslandStore::init(2, low).unwrap();
        store.tau_score = tau;
        store.insert(high.clone(), 0).unwrap();
        store.insert(high, 1).unwrap();
        let mut hits = [0usize; 2];
        for k in 0..10_000u64 {
            let (a, b, _) = store.sample_pair(k).unwrap();
            for p in [a, b] {
                hits[usize::from(p.aggregate == 2.0)] += 1;
            }
        }
        prop_assert!(hits[1] > hits[0], "tau {tau}: {hits:?}");
    }
}

#[test]
fn clusters_group_by_exact_signature() {
    let mk = |t: &str, s: &[f64]| ScoredProgram::new(afsearch::afdsl::parse(t).unwrap(), s.to_vec(), 0, vec![]).unwrap();
    let mut store = IslandStore::init(2, mk("argmax(VAR)", &[0.5, 1.0])).unwrap();
    store.insert(mk("argmax(2 * VAR)", &[0.5, 1.0]), 0).unwrap();
    store.insert(mk("argmax(3 * VAR)", &[0.5, 1.0 + f64::EPSILON]), 0).unwrap();
    let island = &store.islands()[0];
    assert_eq!(island.clusters.len(), 2);
    assert_eq!(island.clusters[0].programs.len(), 2);
}

#[test]
fn shorter_programs_are_favoured_within_a_cluster() {
    let mk = |t: &str| ScoredProgram::new(afsearch::afdsl::parse(t).unwrap(), vec![1.0], 0, vec![]).unwrap();
    let short = mk("argmax(VAR)");
    let long = mk("argmax(VAR + 0 * (MEAN + MEAN + MEAN + MEAN + MEAN + MEAN + MEAN))");
    let mut store = IslandStore::init(2, long).unwrap();
    store.insert(short.clone(), 0).unwrap();
    store.insert(short.clone(), 1).unwrap();
    let n = 4000u64;
    let short_hits = (0..n).filter(|&k| store.sample_pair(k).unwrap().0.id == short.id).count();
    assert!(short_hits as f64 > 0.6 * n as f64, "{short_hits}");
}

#[test]
fn seed_survives_until_first_reset() {
    let mut rng = seeds::rng(11);
    let seed = scored(&mut rng);
    let mut store = IslandStore::init(4, seed.clone()).unwrap();
    for _ in 0..50 {
        store.insert(scored(&mut rng), rng.random_range(0..4)).unwrap();
    }
    for island in store.islands() {
        assert!(island.clusters.iter().any(|c| c.programs.iter().any(|p| p.id == seed.id)));
    }
}
