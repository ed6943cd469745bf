//! Seeded random instances and queries for property tests.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::{ControlAction, ControlGoal, ControlQuery, GoalKind};
use crate::error::{Error, Result};
use crate::reductions::UndirectedGraph;
use crate::instance::{agent, AgentId, Kind, Matching, Pair, RoommatesInstance, Side};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_density(density: f64) -> Result<()> {
    if (0.0..=1.0).contains(&density) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("density {density} is outside [0, 1]")))
    }
}

fn names(prefix: &str, n: usize) -> Vec<AgentId> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| agent(&format!("{prefix}{i:0width$}"))).collect()
}

/// Fills in preference lists: each agent ranks its neighbours uniformly at
/// random.
fn build(
    kind: Kind,
    agents: &[(AgentId, Option<Side>)],
    edges: &[(usize, usize)],
    rng: &mut ChaCha8Rng,
) -> RoommatesInstance {
    let mut neighbours = vec![Vec::new(); agents.len()];
    for &(i, j) in edges {
        neighbours[i].push(agents[j].0.clone());
        neighbours[j].push(agents[i].0.clone());
    }
    let mut inst = RoommatesInstance::new(kind);
    for (id, side) in agents {
        inst.add_agent(id.clone(), *side, false).expect("fresh names");
    }
    for ((id, _), mut list) in agents.iter().zip(neighbours) {
        list.shuffle(rng);
        inst.set_prefs(id, list).expect("declared agent");
    }
    inst
}

/// Each unordered pair is acceptable with probability `density`.
pub fn random_sr(n: usize, density: f64, seed: u64) -> Result<RoommatesInstance> {
    check_density(density)?;
    let mut rng = rng(seed);
    let agents: Vec<(AgentId, Option<Side>)> = names("x", n).into_iter().map(|x| (x, None)).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    Ok(build(Kind::Roommates, &agents, &edges, &mut rng))
}

/// Marriage analogue of [`random_sr`]: `na` agents on side A named `m…`,
/// `nb` on side B named `w…`.
pub fn random_sm(na: usize, nb: usize, density: f64, seed: u64) -> Result<RoommatesInstance> {
    check_density(density)?;
    let mut rng = rng(seed);
    let mut agents: Vec<(AgentId, Option<Side>)> =
        names("m", na).into_iter().map(|x| (x, Some(Side::A))).collect();
    agents.extend(names("w", nb).into_iter().map(|x| (x, Some(Side::B))));
    let mut edges = Vec::new();
    for i in 0..na {
        for j in na..na + nb {
            if rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    Ok(build(Kind::Marriage, &agents, &edges, &mut rng))
}

/// Graph on `v1..vn` with each edge present with probability `density`.
pub fn random_graph(n: usize, density: f64, seed: u64) -> Result<UndirectedGraph> {
    check_density(density)?;
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    UndirectedGraph::indexed(n, &edges)
}

/// A random maximal matching over `pairs`.
fn random_maximal(pairs: &[Pair], rng: &mut ChaCha8Rng) -> Vec<Pair> {
    let mut order = pairs.to_vec();
    order.shuffle(rng);
    let mut used = BTreeSet::new();
    let mut out = Vec::new();
    for p in order {
        if !used.contains(p.first()) && !used.contains(p.second()) {
            used.insert(p.first().clone());
            used.insert(p.second().clone());
            out.push(p);
        }
    }
    out
}

/// A fresh id not used in `inst`.
fn filler_name(inst: &RoommatesInstance, base: &AgentId) -> AgentId {
    let mut k = 0usize;
    loop {
        let id = agent(&format!("f{k}_{base}"));
        if !inst.contains(&id) {
            return id;
        }
        k += 1;
    }
}

/// Generates a query for `action` and `goal` on (a possibly extended copy
/// of) `inst`.
///
/// For adding agents a random non-empty subset is marked addable, keeping
/// at least one original agent when there are two or more. Goals that need
/// a perfect target matching get filler agents: each agent left single by a
/// random maximal matching gains a fresh partner that lists only it.
pub fn random_query(
    inst: &RoommatesInstance,
    action: ControlAction,
    goal: GoalKind,
    seed: u64,
) -> Result<ControlQuery> {
    let mut rng = rng(seed);
    let mut inst = inst.clone();
    for x in inst.addable() {
        inst.set_addable(&x, false)?;
    }
    if action == ControlAction::AddAg {
        let ids: Vec<AgentId> = inst.agents().cloned().collect();
        if ids.is_empty() {
            return Err(Error::InvalidInput("cannot add agents to an empty instance".into()));
        }
        let mut chosen: Vec<usize> = (0..ids.len()).filter(|_| rng.gen_bool(0.5)).collect();
        if chosen.is_empty() {
            chosen.push(rng.gen_range(0..ids.len()));
        }
        if chosen.len() == ids.len() && ids.len() >= 2 {
            chosen.remove(rng.gen_range(0..chosen.len()));
        }
        for i in chosen {
            inst.set_addable(&ids[i], true)?;
        }
    }
    let original = inst.original();

    let goal = match goal {
        GoalKind::ExistsSm => ControlGoal::ExistsSm,
        GoalKind::ExistsPsm => ControlGoal::ExistsPsm,
        GoalKind::Ma => {
            let pool: Vec<&AgentId> = original.iter().collect();
            let x = pool
                .choose(&mut rng)
                .ok_or_else(|| Error::InvalidInput("no agent to target".into()))?;
            ControlGoal::Ma((*x).clone())
        }
        GoalKind::Mp => {
            let pool: Vec<Pair> = inst
                .acceptable_pairs()
                .into_iter()
                .filter(|p| original.contains(p.first()) && original.contains(p.second()))
                .collect();
            let p = pool
                .choose(&mut rng)
                .ok_or_else(|| Error::InvalidInput("no acceptable pair to target".into()))?;
            ControlGoal::Mp(p.clone())
        }
        GoalKind::Ms => {
            let pairs = random_maximal(&inst.acceptable_pairs(), &mut rng);
            if action != ControlAction::DelAcc {
                let covered: BTreeSet<AgentId> = pairs
                    .iter()
                    .flat_map(|p| [p.first().clone(), p.second().clone()])
                    .collect();
                let single: Vec<AgentId> =
                    inst.agents().filter(|x| !covered.contains(*x)).cloned().collect();
                let mut pairs = pairs;
                for x in single {
                    let f = filler_name(&inst, &x);
                    let side = inst.side(&x).map(Side::other);
                    inst.add_agent(f.clone(), side, inst.is_addable(&x))?;
                    inst.set_prefs(&f, vec![x.clone()])?;
                    let mut list = inst.prefs(&x).unwrap_or(&[]).to_vec();
                    list.push(f.clone());
                    inst.set_prefs(&x, list)?;
                    pairs.push(Pair::new(x, f)?);
                }
                ControlGoal::Ms(Matching::new(pairs)?)
            } else {
                ControlGoal::Ms(Matching::new(pairs)?)
            }
        }
    };
    let query = ControlQuery::new(inst, action, goal, 0);
    query.validate()?;
    Ok(query)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_extreme_densities() {
        assert!(random_sr(0, 0.5, 1).unwrap().is_empty());
        let full = random_sr(5, 1.0, 7).unwrap();
        assert!(full.agents().all(|x| full.prefs(x).unwrap().len() == 4));
        let none = random_sr(5, 0.0, 7).unwrap();
        assert_eq!(none.len(), 5);
        assert!(none.acceptable_pairs().is_empty());
        assert!(random_sr(3, 1.5, 0).is_err());
        assert!(random_sr(3, -0.1, 0).is_err());
    }

    #[test]
    fn marriage_generator() {
        let full = random_sm(2, 2, 1.0, 3).unwrap();
        assert_eq!(full.acceptable_pairs().len(), 4);
        assert!(full.validate().is_empty());
        let b_only = random_sm(0, 3, 0.5, 3).unwrap();
        assert_eq!(b_only.len(), 3);
        assert!(b_only.agents().all(|x| b_only.side(x) == Some(Side::B)));
        assert!(random_sm(3, 3, 0.0, 3).unwrap().acceptable_pairs().is_empty());
    }

    #[test]
    fn same_seed_same_instance() {
        assert_eq!(random_sr(8, 0.5, 42).unwrap(), random_sr(8, 0.5, 42).unwrap());
        assert_eq!(random_sm(4, 3, 0.5, 9).unwrap(), random_sm(4, 3, 0.5, 9).unwrap());
    }

    #[test]
    fn query_examples() {
        let pair = RoommatesInstance::roommates(&[("a", &["b"]), ("b", &["a"])]).unwrap();
        let q = random_query(&pair, ControlAction::DelAcc, GoalKind::Ms, 1).unwrap();
        match q.goal() {
            ControlGoal::Ms(m) => assert!(m.is_empty() || m == &Matching::of(&[("a", "b")])),
            other => panic!("{other:?}"),
        }
        let cycle = RoommatesInstance::roommates(&[
            ("a", &["b", "c"]),
            ("b", &["c", "a"]),
            ("c", &["a", "b"]),
        ])
        .unwrap();
        let q = random_query(&cycle, ControlAction::DelAg, GoalKind::Mp, 5).unwrap();
        assert!(matches!(q.goal(), ControlGoal::Mp(p) if cycle.is_acceptable(p)));
        let empty = RoommatesInstance::roommates(&[]).unwrap();
        assert!(random_query(&empty, ControlAction::DelAg, GoalKind::Ma, 0).is_err());
    }

    #[test]
    fn perfect_targets_get_fillers() {
        for seed in 0..20 {
            let inst = random_sr(5, 0.4, seed).unwrap();
            for action in [ControlAction::DelAg, ControlAction::AddAg] {
                let q = random_query(&inst, action, GoalKind::Ms, seed).unwrap();
                let ControlGoal::Ms(m) = q.goal() else { unreachable!() };
                assert!(crate::stability::is_perfect(q.instance(), m));
                assert!(q.instance().validate().is_empty());
            }
        }
    }
}
