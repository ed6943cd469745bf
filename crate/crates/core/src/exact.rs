//! Exhaustive search over action sets, smallest first.

use itertools::Itertools;
use rayon::prelude::*;

use crate::control::{
    goal_holds_with, ControlAction, ControlGoal, ControlOutcome, ControlQuery, GoalOracle, Witness,
};
use crate::error::{Error, Result};
use crate::instance::{AgentId, Pair, RoommatesInstance};

/// Default bound on the number of candidate actions.
pub const DEFAULT_CANDIDATE_CAP: usize = 20;

/// The actions a controller may take, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Candidates {
    Agents(Vec<AgentId>),
    Pairs(Vec<Pair>),
}

impl Candidates {
    pub fn len(&self) -> usize {
        match self {
            Candidates::Agents(v) => v.len(),
            Candidates::Pairs(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The witness made of the candidates at `positions`.
    pub fn select(&self, positions: &[usize]) -> Witness {
        match self {
            Candidates::Agents(v) => Witness::Agents(positions.iter().map(|&i| v[i].clone()).collect()),
            Candidates::Pairs(v) => Witness::Pairs(positions.iter().map(|&i| v[i].clone()).collect()),
        }
    }

    /// Whether every action of `w` is a candidate; `None` if the kinds differ.
    pub(crate) fn covers(&self, w: &Witness) -> Option<bool> {
        match (self, w) {
            (Candidates::Agents(v), Witness::Agents(s)) => Some(s.iter().all(|x| v.binary_search(x).is_ok())),
            (Candidates::Pairs(v), Witness::Pairs(s)) => Some(s.iter().all(|p| v.binary_search(p).is_ok())),
            _ => None,
        }
    }
}

pub fn candidate_actions(q: &ControlQuery) -> Candidates {
    let inst = q.instance();
    match q.action() {
        ControlAction::AddAg => Candidates::Agents(inst.addable().into_iter().collect()),
        ControlAction::DelAg => {
            let protected = q.goal().protected_agents();
            Candidates::Agents(inst.agents().filter(|x| !protected.contains(*x)).cloned().collect())
        }
        ControlAction::DelAcc => {
            let target = match q.goal() {
                ControlGoal::Mp(p) => Some(p),
                _ => None,
            };
            Candidates::Pairs(
                inst.acceptable_pairs()
                    .into_iter()
                    .filter(|p| Some(p) != target)
                    .collect(),
            )
        }
    }
}

/// Applies `w` without checking it against the candidates.
pub(crate) fn apply_unchecked(q: &ControlQuery, w: &Witness) -> Result<RoommatesInstance> {
    let inst = q.instance();
    match (q.action(), w) {
        (ControlAction::AddAg, Witness::Agents(s)) => inst.induce_with_added(s),
        (ControlAction::DelAg, Witness::Agents(s)) => Ok(inst.without_agents(s)),
        (ControlAction::DelAcc, Witness::Pairs(s)) => Ok(inst.without_pairs(s)),
        _ => Err(Error::InvalidQuery(format!(
            "witness kind does not fit action {}",
            q.action()
        ))),
    }
}

/// Decides the query by testing action sets in order of size, then
/// lexicographically, with the default goal oracle.
pub fn solve_exact(q: &ControlQuery, cap: usize) -> Result<ControlOutcome> {
    solve_exact_with(q, cap, GoalOracle::Polynomial)
}

pub fn solve_exact_with(q: &ControlQuery, cap: usize, oracle: GoalOracle) -> Result<ControlOutcome> {
    let found = search(q, cap, oracle)?;
    Ok(match found {
        Some(w) => ControlOutcome::from_optimum(q.budget(), Some(w.len()), Some(w)),
        None => ControlOutcome::from_optimum(q.budget(), None, None),
    })
}

/// Size of a smallest successful action set, ignoring the budget.
pub fn min_control_cost(q: &ControlQuery, cap: usize) -> Result<Option<usize>> {
    Ok(search(q, cap, GoalOracle::Polynomial)?.map(|w| w.len()))
}

/// The lexicographically first successful action set of minimum size.
fn search(q: &ControlQuery, cap: usize, oracle: GoalOracle) -> Result<Option<Witness>> {
    q.validate()?;
    let candidates = candidate_actions(q);
    let n = candidates.len();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "candidate actions",
            count: n,
            cap,
        });
    }
    let test = |w: &Witness| -> Result<bool> {
        let controlled = apply_unchecked(q, w)?;
        goal_holds_with(&controlled, q.goal(), q.action(), oracle)
    };
    for size in 0..=n {
        let subsets: Vec<Vec<usize>> = (0..n).combinations(size).collect();
        let hit = subsets
            .par_iter()
            .map(|positions| {
                let w = candidates.select(positions);
                test(&w).map(|ok| ok.then_some(w))
            })
            .find_first(|r| !matches!(r, Ok(None)));
        match hit {
            Some(Ok(w)) => return Ok(w),
            Some(Err(e)) => return Err(e),
            None => {}
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::goal_holds;
    use crate::instance::{agent, Matching};

    fn three_cycle() -> RoommatesInstance {
        RoommatesInstance::roommates(&[("a", &["b", "c"]), ("b", &["c", "a"]), ("c", &["a", "b"])])
            .unwrap()
    }

    #[test]
    fn candidate_examples() {
        let q = ControlQuery::new(three_cycle(), ControlAction::DelAg, ControlGoal::Ma(agent("a")), 0);
        assert_eq!(candidate_actions(&q), Candidates::Agents(vec![agent("b"), agent("c")]));

        let mut inst = RoommatesInstance::roommates(&[("x", &["z"]), ("y", &[]), ("z", &["x"])]).unwrap();
        inst.set_addable(&agent("y"), true).unwrap();
        inst.set_addable(&agent("x"), true).unwrap();
        let q = ControlQuery::new(inst, ControlAction::AddAg, ControlGoal::ExistsSm, 0);
        assert_eq!(candidate_actions(&q), Candidates::Agents(vec![agent("x"), agent("y")]));

        let q = ControlQuery::new(three_cycle(), ControlAction::DelAcc, ControlGoal::Mp(Pair::of("a", "b")), 0);
        assert_eq!(
            candidate_actions(&q),
            Candidates::Pairs(vec![Pair::of("a", "c"), Pair::of("b", "c")])
        );
    }

    #[test]
    fn zero_budget_is_the_plain_goal() {
        for goal in [ControlGoal::ExistsSm, ControlGoal::Mp(Pair::of("a", "b"))] {
            let q = ControlQuery::new(three_cycle(), ControlAction::DelAg, goal.clone(), 0);
            let out = solve_exact(&q, DEFAULT_CANDIDATE_CAP).unwrap();
            assert_eq!(out.verdict, goal_holds(&three_cycle(), &goal, ControlAction::DelAg).unwrap());
        }
    }

    #[test]
    fn first_single_deletion_wins() {
        let q = ControlQuery::new(three_cycle(), ControlAction::DelAg, ControlGoal::ExistsSm, 1);
        let out = solve_exact(&q, DEFAULT_CANDIDATE_CAP).unwrap();
        assert!(out.verdict);
        assert_eq!(out.witness, Some(Witness::Agents([agent("a")].into())));
    }

    #[test]
    fn min_cost_examples() {
        let q = ControlQuery::new(three_cycle(), ControlAction::DelAg, ControlGoal::Mp(Pair::of("a", "b")), 0);
        assert_eq!(min_control_cost(&q, DEFAULT_CANDIDATE_CAP).unwrap(), Some(1));

        let pair = RoommatesInstance::roommates(&[("a", &["b"]), ("b", &["a"]), ("c", &[])]).unwrap();
        let q = ControlQuery::new(pair.clone(), ControlAction::DelAcc, ControlGoal::Ms(Matching::of(&[("a", "b")])), 0);
        assert_eq!(min_control_cost(&q, DEFAULT_CANDIDATE_CAP).unwrap(), Some(0));

        let q = ControlQuery::new(pair, ControlAction::DelAg, ControlGoal::Ma(agent("c")), 3);
        assert_eq!(min_control_cost(&q, DEFAULT_CANDIDATE_CAP).unwrap(), None);
        let out = solve_exact(&q, DEFAULT_CANDIDATE_CAP).unwrap();
        assert!(!out.verdict && out.witness.is_none());
    }

    #[test]
    fn cap_is_enforced() {
        let q = ControlQuery::new(three_cycle(), ControlAction::DelAcc, ControlGoal::ExistsSm, 0);
        assert!(matches!(solve_exact(&q, 2), Err(Error::CapExceeded { count: 3, cap: 2, .. })));
    }
}
