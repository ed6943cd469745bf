//! Polynomial-time control: deleting agents to make a pair or an agent
//! matched, and deleting acceptability to make a matching stable.

use std::collections::BTreeSet;

use crate::classic::{partition_to_matching, tan_stable_partition, StablePartition};
use crate::control::{ControlAction, ControlGoal, ControlOutcome, ControlQuery, GoalKind, Problem, Witness};
use crate::error::{Error, Result};
use crate::instance::{AgentId, Matching, Pair, RoommatesInstance};
use crate::stability::{blocking_pairs, is_stable};

/// The instance obtained by removing every pair that would prevent `{a,b}`
/// from being each other's first choice in a stable matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixingContext {
    pub a: AgentId,
    pub b: AgentId,
    /// Agents `a` prefers to `b`.
    pub a_star: BTreeSet<AgentId>,
    /// Agents `b` prefers to `a`.
    pub b_star: BTreeSet<AgentId>,
    pub fixing_pairs: BTreeSet<Pair>,
    pub reduced: RoommatesInstance,
}

impl FixingContext {
    /// `A* ∪ B*`.
    pub fn preferred(&self) -> BTreeSet<AgentId> {
        self.a_star.union(&self.b_star).cloned().collect()
    }
}

/// Stable partition of the reduced instance and what it says about the
/// cheapest deletion set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionDiagnosis {
    pub partition: StablePartition,
    /// Number of odd parties of size at least three.
    pub odd_count_r: usize,
    /// Singleton parties whose agent lies in `A* ∪ B*`.
    pub forbidden_singletons: BTreeSet<AgentId>,
}

impl PartitionDiagnosis {
    pub fn optimum(&self) -> usize {
        self.odd_count_r + self.forbidden_singletons.len()
    }

    /// The smallest member of each odd party plus the forbidden singletons.
    pub fn witness(&self) -> BTreeSet<AgentId> {
        let mut out = self.forbidden_singletons.clone();
        for party in self.partition.odd_parties() {
            let smallest = party.members().iter().min().expect("odd party is non-empty");
            out.insert(smallest.clone());
        }
        out
    }
}

pub fn fixing_deletions(inst: &RoommatesInstance, a: &AgentId, b: &AgentId) -> Result<FixingContext> {
    let target = Pair::new(a.clone(), b.clone())?;
    if !inst.is_acceptable(&target) {
        return Err(Error::NotAcceptable(target));
    }
    let better_than = |x: &AgentId, y: &AgentId| -> BTreeSet<AgentId> {
        let list = inst.prefs(x).unwrap_or(&[]);
        list.iter().take_while(|z| *z != y).cloned().collect()
    };
    let a_star = better_than(a, b);
    let b_star = better_than(b, a);

    let mut fixing_pairs = BTreeSet::new();
    for (star, anchor) in [(&a_star, a), (&b_star, b)] {
        for x in star {
            let list = inst.prefs(x).unwrap_or(&[]);
            let at = list.iter().position(|y| y == anchor).unwrap_or(0);
            for y in &list[at..] {
                fixing_pairs.insert(Pair::new(x.clone(), y.clone())?);
            }
        }
    }
    let reduced = inst.without_pairs(&fixing_pairs);
    Ok(FixingContext {
        a: a.clone(),
        b: b.clone(),
        a_star,
        b_star,
        fixing_pairs,
        reduced,
    })
}

pub fn diagnose(ctx: &FixingContext) -> PartitionDiagnosis {
    let partition = tan_stable_partition(&ctx.reduced);
    let odd_count_r = partition.odd_parties().len();
    let preferred = ctx.preferred();
    let forbidden_singletons = partition
        .singletons()
        .into_iter()
        .filter(|x| preferred.contains(x))
        .collect();
    PartitionDiagnosis {
        partition,
        odd_count_r,
        forbidden_singletons,
    }
}

/// Whether some stable matching of `inst` contains `{a,b}`.
pub fn pair_in_some_stable_matching(inst: &RoommatesInstance, a: &AgentId, b: &AgentId) -> Result<bool> {
    Ok(diagnose(&fixing_deletions(inst, a, b)?).optimum() == 0)
}

/// Re-derives a stable matching containing the target after deleting `s`.
fn verify_deletion(inst: &RoommatesInstance, ctx: &FixingContext, s: &BTreeSet<AgentId>) -> Result<Matching> {
    let internal = |what: &str| Error::Internal(format!("deleting {{{}}}: {what}", join(s)));
    let reduced = ctx.reduced.without_agents(s);
    let partition = tan_stable_partition(&reduced);
    let (dropped, m) = partition_to_matching(&reduced, &partition)?;
    if !dropped.is_empty() {
        return Err(internal("reduced instance still has an odd party"));
    }
    let target = Pair::new(ctx.a.clone(), ctx.b.clone())?;
    if !m.contains(&target) {
        return Err(internal("target pair is not matched"));
    }
    if !is_stable(&inst.without_agents(s), &m)? {
        return Err(internal("matching is not stable"));
    }
    Ok(m)
}

fn join(s: &BTreeSet<AgentId>) -> String {
    s.iter().map(AgentId::as_str).collect::<Vec<_>>().join(",")
}

/// Fewest agent deletions after which some stable matching contains
/// `target`. Neither endpoint of `target` is ever deleted.
pub fn solve_delag_mp(inst: &RoommatesInstance, target: &Pair, budget: usize) -> Result<ControlOutcome> {
    inst.ensure_valid()?;
    let (optimum, witness) = delag_mp_optimum(inst, target)?;
    Ok(ControlOutcome::from_optimum(
        budget,
        Some(optimum),
        Some(Witness::Agents(witness)),
    ))
}

fn delag_mp_optimum(inst: &RoommatesInstance, target: &Pair) -> Result<(usize, BTreeSet<AgentId>)> {
    let ctx = fixing_deletions(inst, target.first(), target.second())?;
    let diagnosis = diagnose(&ctx);
    let witness = diagnosis.witness();
    if witness.len() != diagnosis.optimum() {
        return Err(Error::Internal("witness size differs from the optimum".into()));
    }
    verify_deletion(inst, &ctx, &witness)?;
    Ok((diagnosis.optimum(), witness))
}

/// Fewest agent deletions after which `target` is matched in some stable
/// matching: the best partner choice for [`solve_delag_mp`], ties broken by
/// partner id.
pub fn solve_delag_ma(inst: &RoommatesInstance, target: &AgentId, budget: usize) -> Result<ControlOutcome> {
    inst.ensure_valid()?;
    let list = inst.prefs(target).ok_or_else(|| Error::UnknownAgent(target.clone()))?;
    let mut best: Option<(usize, &AgentId, BTreeSet<AgentId>)> = None;
    for b in list {
        let (optimum, witness) = delag_mp_optimum(inst, &Pair::new(target.clone(), b.clone())?)?;
        let better = match &best {
            None => true,
            Some((o, partner, _)) => (optimum, b) < (*o, *partner),
        };
        if better {
            best = Some((optimum, b, witness));
        }
    }
    Ok(match best {
        Some((optimum, _, witness)) => {
            ControlOutcome::from_optimum(budget, Some(optimum), Some(Witness::Agents(witness)))
        }
        None => ControlOutcome::from_optimum(budget, None, None),
    })
}

/// Deleting exactly the blocking pairs of `m` is optimal.
pub fn solve_delacc_ms(inst: &RoommatesInstance, m: &Matching, budget: usize) -> Result<ControlOutcome> {
    let blocking = blocking_pairs(inst, m)?;
    Ok(ControlOutcome::from_optimum(
        budget,
        Some(blocking.len()),
        Some(Witness::Pairs(blocking)),
    ))
}

/// Problems with a polynomial-time solver here.
pub fn has_poly_solver(problem: Problem) -> bool {
    matches!(
        (problem.action, problem.goal),
        (ControlAction::DelAg, GoalKind::Mp)
            | (ControlAction::DelAg, GoalKind::Ma)
            | (ControlAction::DelAcc, GoalKind::Ms)
    )
}

pub fn solve_poly(q: &ControlQuery) -> Result<ControlOutcome> {
    q.validate()?;
    match (q.action(), q.goal()) {
        (ControlAction::DelAg, ControlGoal::Mp(p)) => solve_delag_mp(q.instance(), p, q.budget()),
        (ControlAction::DelAg, ControlGoal::Ma(x)) => solve_delag_ma(q.instance(), x, q.budget()),
        (ControlAction::DelAcc, ControlGoal::Ms(m)) => solve_delacc_ms(q.instance(), m, q.budget()),
        _ => Err(Error::InvalidQuery(format!(
            "no polynomial-time solver for {}",
            q.problem()
        ))),
    }
}
