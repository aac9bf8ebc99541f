use std::collections::BTreeSet;
use std::sync::Arc;

use bbc_core::consensus::Behavior;
use bbc_core::ledger::validate_chain;
use bbc_core::sim::Partition;
use bbc_core::sim::{SimConfig, SimError, Simulation, Step, Submission};
use bbc_core::workload::{lifecycle, submissions, Cast};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(items: usize, n: u32, seed: u64) -> (Cast, Vec<Submission>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cast = Cast::generate(2, seed, &mut rng);
    let events: Vec<_> = (0..items).flat_map(|i| lifecycle(&format!("lettuce-{i}"), 0, &[])).collect();
    let subs = submissions(&cast, &events, n, 1, 3, &mut rng);
    (cast, subs)
}

fn run(config: SimConfig, cast: &Cast, subs: Vec<Submission>, budget: u64) -> (Simulation, Result<u64, SimError>) {
    let mut sim = Simulation::new(config, Arc::new(cast.registry.clone()), subs).unwrap();
    let r = sim.run_until_quiet(budget);
    (sim, r)
}

fn committed_tx_ids(sim: &Simulation) -> BTreeSet<bbc_core::Hash32> {
    let node = sim.reference_node().unwrap();
    node.head().blocks().iter().flat_map(|b| b.transactions.iter().map(|t| t.tx_id)).collect()
}

#[test]
fn honest_nodes_commit_every_accepted_tx() {
    let (cast, subs) = setup(2, 4, 1);
    let (sim, r) = run(SimConfig::honest(4, 1), &cast, subs, 100_000);
    r.unwrap();
    assert!(sim.honest_heads_identical());
    assert_eq!(sim.accepted().len(), 8);
    let committed = committed_tx_ids(&sim);
    assert!(sim.accepted().iter().all(|(_, id)| committed.contains(id)));
    assert_eq!(committed.len(), 8);
    let head = sim.reference_node().unwrap().head();
    assert_eq!(validate_chain(head, &cast.registry, bbc_core::constants::DEFAULT_THRESHOLD), Ok(()));
}

#[test]
fn runs_are_deterministic() {
    let (cast, subs) = setup(2, 4, 2);
    let mut config = SimConfig::honest(4, 2);
    config.network.jitter = 3;
    config.network.drop_rate = 0.05;
    let (a, ra) = run(config.clone(), &cast, subs.clone(), 100_000);
    let (b, rb) = run(config, &cast, subs, 100_000);
    assert_eq!(ra, rb);
    assert_eq!(a.network().trace_jsonl(), b.network().trace_jsonl());
    assert_eq!(a.honest_heads(), b.honest_heads());
}

#[test]
fn crashed_proposer_triggers_view_change() {
    let (cast, subs) = setup(1, 4, 3);
    // Height 1 view 0 belongs to node 1; route every submission to node 0.
    let subs: Vec<_> = subs.into_iter().map(|s| Submission { node: 0, ..s }).collect();
    let mut config = SimConfig::honest(4, 3);
    config.behaviors[1] = Behavior::Crashed;
    let (sim, r) = run(config, &cast, subs, 100_000);
    r.unwrap();
    assert!(sim.honest_heads_identical());
    assert_eq!(committed_tx_ids(&sim).len(), 4);
}

#[test]
fn one_byzantine_node_cannot_split_honest_nodes() {
    for behavior in [Behavior::Equivocator, Behavior::Tamperer, Behavior::VoteFlipper, Behavior::Crashed] {
        for seed in 0..20 {
            let (cast, subs) = setup(2, 4, 100 + seed);
            let mut config = SimConfig::honest(4, seed);
            config.network.jitter = 2;
            config.behaviors[(seed % 4) as usize] = behavior;
            let subs: Vec<_> = subs
                .into_iter()
                .map(|s| Submission { node: if s.node == (seed % 4) as u32 { (s.node + 1) % 4 } else { s.node }, ..s })
                .collect();
            let (sim, r) = run(config, &cast, subs, 200_000);
            r.unwrap_or_else(|e| panic!("{behavior:?} seed {seed}: {e}"));
            assert!(sim.honest_commits_agree(), "{behavior:?} seed {seed}");
            assert!(sim.honest_heads_identical(), "{behavior:?} seed {seed}");
            assert_eq!(committed_tx_ids(&sim).len(), 8, "{behavior:?} seed {seed}");
        }
    }
}

#[test]
fn total_loss_exhausts_budget() {
    let (cast, subs) = setup(1, 4, 4);
    let mut config = SimConfig::honest(4, 4);
    config.network.drop_rate = 1.0;
    let (_, r) = run(config, &cast, subs, 2_000);
    assert!(matches!(r, Err(SimError::BudgetExceeded { max_ticks: 2_000, .. })));
}

#[test]
fn nodes_converge_after_partition_heals() {
    let (cast, subs) = setup(2, 4, 5);
    let mut config = SimConfig::honest(4, 5);
    config.network.partitions = vec![Partition { nodes: [3].into(), start: 0, end: 400 }];
    let (sim, r) = run(config, &cast, subs, 100_000);
    r.unwrap();
    assert!(sim.honest_heads_identical());
    assert_eq!(committed_tx_ids(&sim).len(), 8);
}

#[test]
fn message_accounting_balances_and_clock_is_monotone() {
    let (cast, subs) = setup(2, 4, 6);
    let mut config = SimConfig::honest(4, 6);
    config.network.drop_rate = 0.1;
    config.network.jitter = 4;
    let mut sim = Simulation::new(config, Arc::new(cast.registry.clone()), subs).unwrap();
    let mut last = 0;
    for _ in 0..500 {
        if let Step::Delivered(ev) = sim.step() {
            assert!(ev.deliver_at >= last, "clock went backwards");
            last = ev.deliver_at;
        }
        let s = sim.network().stats();
        assert_eq!(s.sent, s.delivered + s.dropped + s.partitioned + sim.network().in_flight() as u64);
    }
}

#[test]
fn impostor_submission_is_rejected_at_the_gateway() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cast = Cast::generate(1, 7, &mut rng);
    let events = lifecycle("kale-1", 0, &[]);
    let mut subs = submissions(&cast, &events, 4, 1, 3, &mut rng);
    subs[2].probe = cast.impostor_probe(subs[2].actor_id, &mut rng);
    let (sim, r) = run(SimConfig::honest(4, 7), &cast, subs, 100_000);
    r.unwrap();
    assert_eq!(sim.rejected().len(), 1);
    assert_eq!(sim.rejected()[0].submission, 2);
    assert_eq!(committed_tx_ids(&sim).len(), 3);
}

#[test]
fn handling_a_message_twice_equals_handling_it_once() {
    for (seed, behavior) in
        [(8, Behavior::Honest), (9, Behavior::Equivocator), (10, Behavior::Tamperer), (11, Behavior::VoteFlipper)]
    {
        let (cast, subs) = setup(2, 4, seed);
        let mut config = SimConfig::honest(4, seed);
        config.network.jitter = 2;
        config.behaviors[3] = behavior;
        let mut sim = Simulation::new(config, Arc::new(cast.registry.clone()), subs).unwrap();
        let mut checked = 0;
        loop {
            match sim.step() {
                Step::Idle => break,
                Step::Delivered(ev) => {
                    let once = &sim.nodes()[ev.msg.to as usize];
                    let mut twice = once.clone();
                    twice.on_message(&ev.msg, ev.deliver_at);
                    assert_eq!(&twice, once, "{behavior:?}: {:?}", ev.msg.payload.kind());
                    checked += 1;
                }
                _ => {}
            }
        }
        assert!(checked > 50);
    }
}

/// Runs to quiescence, tracking the highest view any honest node reaches.
fn max_view(sim: &mut Simulation) -> u32 {
    let mut max = 0;
    while sim.step() != Step::Idle {
        max = max.max(sim.honest_nodes().map(|n| n.view()).max().unwrap_or(0));
        assert!(sim.now() < 1_000_000, "no quiescence");
    }
    max
}

#[test]
fn two_crashed_proposers_cost_two_view_changes() {
    let (cast, subs) = setup(1, 7, 12);
    // Height 1 is proposed by node 1 in view 0 and node 2 in view 1.
    let subs: Vec<_> = subs.into_iter().take(1).map(|s| Submission { node: 0, ..s }).collect();
    let mut config = SimConfig::honest(7, 12);
    config.behaviors[1] = Behavior::Crashed;
    config.behaviors[2] = Behavior::Crashed;
    let mut sim = Simulation::new(config, Arc::new(cast.registry.clone()), subs).unwrap();
    assert_eq!(max_view(&mut sim), 2);
    assert!(sim.honest_heads_identical());
    assert_eq!(sim.reference_node().unwrap().head().blocks()[1].header.proposer_id, 3);
}

#[test]
fn crash_faults_up_to_f_commit_within_ten_view_changes() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..60u64 {
        use rand::seq::SliceRandom;
        use rand::Rng;
        let n: u32 = rng.gen_range(4..=10);
        let f = bbc_core::consensus::max_faulty(n);
        let mut ids: Vec<u32> = (0..n).collect();
        ids.shuffle(&mut rng);
        let crashed: BTreeSet<u32> = ids[..rng.gen_range(0..=f)].iter().copied().collect();
        let live: Vec<u32> = (0..n).filter(|i| !crashed.contains(i)).collect();
        let (cast, subs) = setup(2, n, 200 + trial);
        let subs: Vec<_> =
            subs.into_iter().enumerate().map(|(i, s)| Submission { node: live[i % live.len()], ..s }).collect();
        let mut config = SimConfig::honest(n, trial);
        config.network.jitter = 2;
        for &c in &crashed {
            config.behaviors[c as usize] = Behavior::Crashed;
        }
        let mut sim = Simulation::new(config, Arc::new(cast.registry.clone()), subs).unwrap();
        let views = max_view(&mut sim);
        assert!(views <= 10, "trial {trial}: {views} view changes");
        assert!(sim.honest_heads_identical());
        assert_eq!(committed_tx_ids(&sim).len(), 8, "trial {trial}");
    }
}
