//! Stable partitions against exhaustive search over all permutations.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stable_control::classic::{
    irving_stable_matching, partition_to_matching, tan_stable_partition,
    tan_stable_partition_with_order, validate_partition, StablePartition,
};
use stable_control::generators::random_sr;
use stable_control::stability::{enumerate_stable_matchings, is_stable};
use stable_control::{AgentId, RoommatesInstance};

/// Rank of `y` for `x`, with `x` itself ranked below every acceptable agent.
fn rank(inst: &RoommatesInstance, x: &AgentId, y: &AgentId) -> Option<usize> {
    let list = inst.prefs(x).unwrap();
    if x == y {
        Some(list.len())
    } else {
        list.iter().position(|z| z == y)
    }
}

/// The partition axioms, written out directly over a successor vector.
fn is_stable_partition(inst: &RoommatesInstance, ids: &[AgentId], succ: &[usize]) -> bool {
    let n = ids.len();
    let mut pred = vec![0; n];
    for (x, &s) in succ.iter().enumerate() {
        pred[s] = x;
    }
    for x in 0..n {
        let (sx, px) = (succ[x], pred[x]);
        if sx != x && rank(inst, &ids[x], &ids[sx]).is_none() {
            return false;
        }
        if sx != px && rank(inst, &ids[x], &ids[sx]) >= rank(inst, &ids[x], &ids[px]) {
            return false;
        }
    }
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let (Some(ry), Some(rx)) = (rank(inst, &ids[x], &ids[y]), rank(inst, &ids[y], &ids[x])) else {
                continue;
            };
            if ry < rank(inst, &ids[x], &ids[pred[x]]).unwrap()
                && rx < rank(inst, &ids[y], &ids[pred[y]]).unwrap()
            {
                return false;
            }
        }
    }
    true
}

fn odd_party_sets(p: &StablePartition) -> BTreeSet<BTreeSet<AgentId>> {
    p.odd_parties().iter().map(|q| q.agent_set()).collect()
}

fn from_vector(ids: &[AgentId], succ: &[usize]) -> StablePartition {
    StablePartition::from_successors(
        succ.iter()
            .enumerate()
            .map(|(x, &s)| (ids[x].clone(), ids[s].clone()))
            .collect(),
    )
}

#[test]
fn partitions_agree_with_exhaustive_search() {
    let mut checked = 0;
    for seed in 0..400u64 {
        let n = (seed % 6 + 1) as usize;
        let density = [0.4, 0.7, 1.0][(seed / 6 % 3) as usize];
        let inst = random_sr(n, density, seed).unwrap();
        let ids: Vec<AgentId> = inst.agents().cloned().collect();
        let tan = tan_stable_partition(&inst);
        let tan_vec: Vec<usize> = ids
            .iter()
            .map(|x| ids.iter().position(|y| y == tan.successor(x).unwrap()).unwrap())
            .collect();
        assert!(is_stable_partition(&inst, &ids, &tan_vec), "seed {seed}: {tan}");
        assert!(validate_partition(&inst, &tan).is_empty());

        let odd = odd_party_sets(&tan);
        for succ in (0..n).permutations(n) {
            let ours = is_stable_partition(&inst, &ids, &succ);
            let p = from_vector(&ids, &succ);
            assert_eq!(
                ours,
                validate_partition(&inst, &p).is_empty(),
                "seed {seed}: validator disagrees on {p}"
            );
            if ours {
                checked += 1;
                assert_eq!(odd_party_sets(&p), odd, "seed {seed}: odd parties differ from {p}");
            }
        }
    }
    assert!(checked > 400);
}

#[test]
fn odd_parties_do_not_depend_on_processing_order() {
    for seed in 0..300u64 {
        let n = (seed % 8 + 1) as usize;
        let inst = random_sr(n, 0.5 + (seed % 5) as f64 * 0.1, seed).unwrap();
        let base = odd_party_sets(&tan_stable_partition(&inst));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<AgentId> = inst.agents().cloned().collect();
        for _ in 0..6 {
            order.shuffle(&mut rng);
            let p = tan_stable_partition_with_order(&inst, &order).unwrap();
            assert!(validate_partition(&inst, &p).is_empty(), "seed {seed}");
            assert_eq!(odd_party_sets(&p), base, "seed {seed}");
        }
    }
}

#[test]
fn irving_agrees_with_enumeration() {
    for seed in 0..400u64 {
        let n = (seed % 8 + 1) as usize;
        let inst = random_sr(n, 0.6, seed).unwrap();
        let all = enumerate_stable_matchings(&inst, 28).unwrap();
        let irving = irving_stable_matching(&inst);
        assert_eq!(irving.is_some(), !all.is_empty(), "seed {seed}");
        if let Some(m) = &irving {
            assert!(is_stable(&inst, m).unwrap());
            assert!(all.contains(m));
        }
        let p = tan_stable_partition(&inst);
        assert_eq!(p.odd_parties().is_empty(), irving.is_some());
        let (deleted, m) = partition_to_matching(&inst, &p).unwrap();
        assert_eq!(deleted.len(), p.odd_parties().len());
        assert!(is_stable(&inst.delete_agents(&deleted).unwrap(), &m).unwrap());
    }
}
