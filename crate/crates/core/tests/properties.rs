use bbc_core::biometric::{derive_key, BiometricTemplate, ScramblingKey};
use bbc_core::chainfile::{decode_chain, encode_chain, from_json, to_json};
use bbc_core::constants::DEFAULT_THRESHOLD;
use bbc_core::ledger::{merkle_root, Chain, Stage, SupplyChainEvent, Transaction};
use bbc_core::provenance::{audit_labels, build_index, trace_item, trace_item_scan, ViolationKind};
use bbc_core::workload::{chain_from_transactions, event, lifecycle, role_for, Cast};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn template() -> impl Strategy<Value = BiometricTemplate> {
    proptest::collection::vec(-32767i64..=32767, 64).prop_map(|v| BiometricTemplate::from_slice(&v).unwrap())
}

fn key() -> impl Strategy<Value = ScramblingKey> {
    (any::<u64>(), any::<u32>()).prop_map(|(seed, id)| derive_key(seed, id))
}

/// Attested transactions over a handful of items, in submission order.
fn random_chain(seed: u64, items: usize, txs: usize, per_block: usize) -> (Cast, Chain) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cast = Cast::generate(2, seed, &mut rng);
    let txs: Vec<Transaction> = (0..txs)
        .map(|i| {
            use rand::Rng;
            let item = format!("item-{}", rng.gen_range(0..items));
            let stage = Stage::ALL[rng.gen_range(0..4)];
            let mut e = event(&item, stage, i as u64);
            e.storage_temp = rng.gen_range(-500..500);
            let actors = cast.actors_with_role(role_for(stage));
            let actor = actors[rng.gen_range(0..actors.len())];
            cast.attest(e, actor, 0, DEFAULT_THRESHOLD, &mut rng).unwrap()
        })
        .collect();
    (cast, chain_from_transactions(txs, per_block))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn scrambling_preserves_distance(a in template(), b in template(), k in key()) {
        let sa = k.scramble(&a).unwrap();
        let sb = k.scramble(&b).unwrap();
        prop_assert_eq!(sa.distance(&sb).unwrap(), a.distance(&b));
    }

    #[test]
    fn key_json_round_trips(k in key()) {
        let back: ScramblingKey = serde_json::from_str(&serde_json::to_string(&k).unwrap()).unwrap();
        prop_assert_eq!(back, k);
    }

    #[test]
    fn arbitrary_bytes_decode_strictly(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
        let mut b = b"BBC1".to_vec();
        b.extend(bytes);
        if let Ok(chain) = decode_chain(&b) {
            prop_assert_eq!(encode_chain(&chain), b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reordering_transactions_changes_the_root(seed in any::<u64>(), n in 2usize..12, i in 0usize..12, j in 0usize..12) {
        let (_, chain) = random_chain(seed, 3, n, n);
        let txs = chain.blocks()[1].transactions.clone();
        let (i, j) = (i % n, j % n);
        prop_assume!(txs[i].tx_id != txs[j].tx_id);
        let mut swapped = txs.clone();
        swapped.swap(i, j);
        prop_assert_ne!(merkle_root(&swapped), merkle_root(&txs));
    }

    #[test]
    fn chain_round_trips(seed in any::<u64>(), txs in 0usize..40, per_block in 1usize..7) {
        let (_, chain) = random_chain(seed, 5, txs, per_block);
        let bytes = encode_chain(&chain);
        prop_assert_eq!(&decode_chain(&bytes).unwrap(), &chain);
        prop_assert_eq!(&from_json(&to_json(&chain)).unwrap(), &chain);
    }

    #[test]
    fn index_matches_linear_scan(seed in any::<u64>(), items in 1usize..20, txs in 0usize..200) {
        let (cast, chain) = random_chain(seed, items, txs, 5);
        let idx = build_index(&chain, &cast.registry, DEFAULT_THRESHOLD).unwrap();
        let mut covered = 0;
        for i in 0..items + 1 {
            let item = format!("item-{i}");
            let traced = trace_item(&idx, &chain, &item);
            covered += traced.len();
            prop_assert_eq!(traced, trace_item_scan(&chain, &item).0);
        }
        prop_assert_eq!(covered, chain.tx_count());
    }

    #[test]
    fn one_label_discrepancy_gives_one_violation(
        seed in any::<u64>(),
        extra in proptest::collection::btree_set("[a-z]{1,8}", 1..5),
        stage in 0usize..4,
        undeclared in any::<bool>(),
        which in any::<proptest::sample::Index>(),
    ) {
        let extra: Vec<&str> = extra.iter().map(String::as_str).filter(|s| *s != "kale").collect();
        prop_assume!(!extra.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cast = Cast::generate(1, seed, &mut rng);
        let build = |events: Vec<SupplyChainEvent>, rng: &mut ChaCha8Rng| {
            let txs = events
                .into_iter()
                .map(|e| {
                    let actor = cast.actors_with_role(role_for(e.stage))[0];
                    cast.attest(e, actor, 0, DEFAULT_THRESHOLD, rng).unwrap()
                })
                .collect();
            chain_from_transactions(txs, 3)
        };
        let clean = lifecycle("kale-1", 0, &extra);
        let chain = build(clean.clone(), &mut rng);
        let idx = build_index(&chain, &cast.registry, DEFAULT_THRESHOLD).unwrap();
        prop_assert_eq!(audit_labels(&idx, &chain, "kale-1").unwrap(), vec![]);

        let mut dirty = clean;
        let target = extra[which.index(extra.len())].to_string();
        let kind = if undeclared {
            dirty[3].declared_label.retain(|l| *l != target);
            // Also move the introduction to a random stage.
            for e in dirty.iter_mut() {
                e.ingredients_added.retain(|l| *l != target);
            }
            dirty[stage].ingredients_added.push(target.clone());
            ViolationKind::UndeclaredIngredient
        } else {
            for e in dirty.iter_mut() {
                e.ingredients_added.retain(|l| *l != target);
            }
            ViolationKind::PhantomIngredient
        };
        let chain = build(dirty, &mut rng);
        let idx = build_index(&chain, &cast.registry, DEFAULT_THRESHOLD).unwrap();
        let got = audit_labels(&idx, &chain, "kale-1").unwrap();
        prop_assert_eq!(got.len(), 1);
        prop_assert_eq!(got[0].kind, kind);
        prop_assert_eq!(&got[0].ingredient, &target);
        prop_assert_eq!(got[0].introduced_at.is_some(), undeclared);
    }
}
