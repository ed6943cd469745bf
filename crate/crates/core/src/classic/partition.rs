//! Stable partitions and the proposal/rotation engine that computes them.
//!
//! A stable partition is a permutation of the agents. Writing `succ` and
//! `pred` for the permutation and its inverse, it must satisfy
//!
//! * `succ(x) = x` or `succ(x)` is acceptable to `x`;
//! * if `succ(x) != pred(x)` then `x` prefers `succ(x)` to `pred(x)`;
//! * no two agents `x`, `y` each prefer the other to their own predecessor,
//!   where being one's own predecessor counts as worse than any partner.
//!
//! The cycles are called parties. An instance admits a stable matching iff
//! some (equivalently every) stable partition has no odd party of size at
//! least three.
//!
//! The engine runs the usual two phases on a preference table. Phase one is
//! the proposal sequence; phase two repeatedly exposes a rotation and
//! eliminates it. A rotation whose elimination would strip some agent of its
//! new first entry closes an odd party; its agents are then frozen with
//! their two remaining entries, which are exactly their successor and
//! predecessor.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::instance::{AgentId, Indexed, Matching, Pair, RoommatesInstance, NONE};
use crate::stability::is_stable_indexed;

/// One cycle of a stable partition, starting at its smallest member and
/// following successors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Party(Vec<AgentId>);

impl Party {
    pub fn members(&self) -> &[AgentId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.0.len() == 1
    }

    /// Odd with at least three members.
    pub fn is_odd_cycle(&self) -> bool {
        self.0.len() >= 3 && self.0.len() % 2 == 1
    }

    pub fn agent_set(&self) -> BTreeSet<AgentId> {
        self.0.iter().cloned().collect()
    }
}

impl fmt::Display for Party {
    /// `party (a b c) odd`, `party (d) single` or `party (a b)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|x| x.as_str()).collect();
        write!(f, "party ({})", names.join(" "))?;
        if self.is_odd_cycle() {
            f.write_str(" odd")?;
        } else if self.is_singleton() {
            f.write_str(" single")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StablePartition {
    successor: BTreeMap<AgentId, AgentId>,
}

impl StablePartition {
    /// Wraps a successor map without checking it; see [`validate_partition`].
    pub fn from_successors(successor: BTreeMap<AgentId, AgentId>) -> Self {
        StablePartition { successor }
    }

    /// From parties given as cyclic sequences.
    pub fn from_cycles(cycles: &[&[&str]]) -> Result<Self> {
        let mut successor = BTreeMap::new();
        for cycle in cycles {
            for (i, x) in cycle.iter().enumerate() {
                let y = cycle[(i + 1) % cycle.len()];
                if successor.insert(AgentId::new(*x)?, AgentId::new(y)?).is_some() {
                    return Err(Error::InvalidInput(format!("agent `{x}` in two parties")));
                }
            }
        }
        Ok(StablePartition { successor })
    }

    pub fn successor(&self, x: &AgentId) -> Option<&AgentId> {
        self.successor.get(x)
    }

    pub fn successors(&self) -> &BTreeMap<AgentId, AgentId> {
        &self.successor
    }

    /// The cycle decomposition, sorted by smallest member. Assumes the
    /// successor map is a permutation.
    pub fn parties(&self) -> Vec<Party> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for start in self.successor.keys() {
            if seen.contains(start) {
                continue;
            }
            let mut cycle = vec![start.clone()];
            seen.insert(start);
            let mut cur = &self.successor[start];
            while cur != start && seen.insert(cur) {
                cycle.push(cur.clone());
                match self.successor.get(cur) {
                    Some(next) => cur = next,
                    None => break,
                }
            }
            out.push(Party(cycle));
        }
        out
    }

    /// Odd parties of size at least three.
    pub fn odd_parties(&self) -> Vec<Party> {
        self.parties().into_iter().filter(Party::is_odd_cycle).collect()
    }

    pub fn singletons(&self) -> BTreeSet<AgentId> {
        self.successor
            .iter()
            .filter(|(x, y)| x == y)
            .map(|(x, _)| x.clone())
            .collect()
    }
}

impl fmt::Display for StablePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.parties() {
            writeln!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Lists every violated partition axiom; empty iff `p` is a stable
/// partition of `inst`.
pub fn validate_partition(inst: &RoommatesInstance, p: &StablePartition) -> Vec<String> {
    let mut out = Vec::new();
    let ix = inst.index();
    let n = ix.len();
    let mut succ = vec![usize::MAX; n];
    for (x, y) in p.successors() {
        match (ix.position(x), ix.position(y)) {
            (Some(i), Some(j)) => succ[i] = j,
            _ => out.push(format!("successor entry {x} -> {y} names an unknown agent")),
        }
    }
    if let Some(x) = (0..n).find(|&x| succ[x] == usize::MAX) {
        out.push(format!("agent `{}` has no successor", ix.ids[x]));
    }
    if !out.is_empty() {
        return out;
    }
    let mut pred = vec![usize::MAX; n];
    for x in 0..n {
        if pred[succ[x]] != usize::MAX {
            out.push(format!("agent `{}` is the successor of two agents", ix.ids[succ[x]]));
        }
        pred[succ[x]] = x;
    }
    if !out.is_empty() {
        return out;
    }
    for x in 0..n {
        let (s, q) = (succ[x], pred[x]);
        if s != x && ix.rank[x][s] == NONE {
            out.push(format!("`{}` is not acceptable to `{}`", ix.ids[s], ix.ids[x]));
        } else if s != q && !ix.prefers(x, s, Some(q)) {
            out.push(format!(
                "`{}` does not prefer its successor `{}` to its predecessor `{}`",
                ix.ids[x], ix.ids[s], ix.ids[q]
            ));
        }
    }
    let worse_than = |x: usize| (pred[x] != x).then_some(pred[x]);
    for x in 0..n {
        for &y in &ix.lists[x] {
            if x < y
                && ix.rank[y][x] != NONE
                && ix.prefers(x, y, worse_than(x))
                && ix.prefers(y, x, worse_than(y))
            {
                out.push(format!("{{{},{}}} blocks the partition", ix.ids[x], ix.ids[y]));
            }
        }
    }
    out
}

/// Computes a stable partition, processing agents in id order.
pub fn tan_stable_partition(inst: &RoommatesInstance) -> StablePartition {
    let ix = inst.index();
    let order: Vec<usize> = (0..ix.len()).collect();
    partition_indexed(&ix, &order)
}

/// Same as [`tan_stable_partition`] but with an explicit processing order,
/// which must list every agent exactly once. Different orders can give
/// different partitions; their odd parties are always the same.
pub fn tan_stable_partition_with_order(
    inst: &RoommatesInstance,
    order: &[AgentId],
) -> Result<StablePartition> {
    let ix = inst.index();
    let mut seen = vec![false; ix.len()];
    let mut idx = Vec::with_capacity(order.len());
    for x in order {
        let i = ix.position(x).ok_or_else(|| Error::UnknownAgent(x.clone()))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidInput(format!("agent `{x}` listed twice in order")));
        }
        idx.push(i);
    }
    if idx.len() != ix.len() {
        return Err(Error::InvalidInput("processing order misses agents".into()));
    }
    Ok(partition_indexed(&ix, &idx))
}

pub(crate) fn partition_indexed(ix: &Indexed, order: &[usize]) -> StablePartition {
    let succ = successor_indexed(ix, order);
    StablePartition {
        successor: succ
            .iter()
            .enumerate()
            .map(|(x, &s)| (ix.ids[x].clone(), ix.ids[s].clone()))
            .collect(),
    }
}

/// Reduced preference table: `alive[x][r]` says whether the `r`-th entry of
/// `x`'s original list is still present.
#[derive(Clone)]
struct Table<'a> {
    ix: &'a Indexed,
    alive: Vec<Vec<bool>>,
    len: Vec<usize>,
}

impl<'a> Table<'a> {
    fn new(ix: &'a Indexed) -> Self {
        // only mutually acceptable entries take part
        let alive: Vec<Vec<bool>> = (0..ix.len())
            .map(|x| ix.lists[x].iter().map(|&y| ix.rank[y][x] != NONE).collect())
            .collect();
        let len = alive.iter().map(|a| a.iter().filter(|b| **b).count()).collect();
        Table { ix, alive, len }
    }

    fn delete(&mut self, x: usize, y: usize) {
        for (u, v) in [(x, y), (y, x)] {
            let r = self.ix.rank[u][v] as usize;
            if std::mem::replace(&mut self.alive[u][r], false) {
                self.len[u] -= 1;
            }
        }
    }

    fn entries(&self, x: usize) -> impl DoubleEndedIterator<Item = usize> + '_ {
        self.ix.lists[x]
            .iter()
            .zip(&self.alive[x])
            .filter(|(_, a)| **a)
            .map(|(y, _)| *y)
    }

    fn first(&self, x: usize) -> Option<usize> {
        self.entries(x).next()
    }

    fn second(&self, x: usize) -> Option<usize> {
        self.entries(x).nth(1)
    }

    fn last(&self, x: usize) -> Option<usize> {
        self.entries(x).next_back()
    }

    /// `y` drops every entry it likes less than `x`.
    fn delete_after(&mut self, y: usize, x: usize) -> Vec<usize> {
        let r = self.ix.rank[y][x] as usize;
        let doomed: Vec<usize> = self.ix.lists[y][r + 1..]
            .iter()
            .zip(&self.alive[y][r + 1..])
            .filter(|(_, a)| **a)
            .map(|(w, _)| *w)
            .collect();
        for &w in &doomed {
            self.delete(y, w);
        }
        doomed
    }
}

fn successor_indexed(ix: &Indexed, order: &[usize]) -> Vec<usize> {
    let n = ix.len();
    let mut table = Table::new(ix);

    // phase one: proposals
    let mut holds: Vec<Option<usize>> = vec![None; n];
    let mut queue: VecDeque<usize> = order.iter().copied().collect();
    while let Some(x) = queue.pop_front() {
        let Some(y) = table.first(x) else { continue };
        let previous = holds[y].replace(x);
        for w in table.delete_after(y, x) {
            if previous == Some(w) {
                queue.push_back(w);
            }
        }
    }

    // phase two: rotations
    let mut frozen = vec![false; n];
    let mut seen_at = vec![usize::MAX; n];
    while let Some(&start) = order.iter().find(|&&x| !frozen[x] && table.len[x] >= 2) {
        let mut seq = Vec::new();
        let mut p = start;
        while seen_at[p] == usize::MAX {
            seen_at[p] = seq.len();
            seq.push(p);
            let q = table.second(p).expect("list of length two or more");
            p = table.last(q).expect("second choice holds a proposal");
        }
        let xs: Vec<usize> = seq[seen_at[p]..].to_vec();
        for &x in &seq {
            seen_at[x] = usize::MAX;
        }
        let ys: Vec<usize> = xs.iter().map(|&x| table.first(x).unwrap()).collect();
        let seconds: Vec<usize> = xs.iter().map(|&x| table.second(x).unwrap()).collect();

        let mut trial = table.clone();
        for (&x, &s) in xs.iter().zip(&seconds) {
            trial.delete_after(s, x);
        }
        let eliminated = xs
            .iter()
            .zip(&seconds)
            .all(|(&x, &s)| trial.first(x) == Some(s) && trial.last(s) == Some(x));
        if eliminated {
            table = trial;
            continue;
        }

        let xset: BTreeSet<usize> = xs.iter().copied().collect();
        let yset: BTreeSet<usize> = ys.iter().copied().collect();
        let closed = xset == yset && xs.iter().all(|&x| table.len[x] == 2);
        assert!(
            closed,
            "rotation {:?} can neither be eliminated nor closes an odd party",
            xs.iter().map(|&x| ix.ids[x].as_str()).collect::<Vec<_>>()
        );
        for &x in &xs {
            frozen[x] = true;
        }
    }

    (0..n).map(|x| table.first(x).unwrap_or(x)).collect()
}

/// Turns a stable partition into a stable matching of a reduced market.
///
/// The smallest member of every odd party of size three or more is deleted;
/// the rest of each party is paired along the cycle. The returned matching
/// is stable in `inst` minus the deleted agents.
pub fn partition_to_matching(
    inst: &RoommatesInstance,
    p: &StablePartition,
) -> Result<(BTreeSet<AgentId>, Matching)> {
    let violations = validate_partition(inst, p);
    if !violations.is_empty() {
        return Err(Error::InvalidInput(format!(
            "not a stable partition: {}",
            violations.join("; ")
        )));
    }
    let mut deleted = BTreeSet::new();
    let mut pairs = Vec::new();
    for party in p.parties() {
        let members = party.members();
        let rest = if party.is_odd_cycle() {
            deleted.insert(members[0].clone());
            &members[1..]
        } else if party.is_singleton() {
            continue;
        } else {
            members
        };
        for chunk in rest.chunks(2) {
            pairs.push(Pair::new(chunk[0].clone(), chunk[1].clone())?);
        }
    }
    Ok((deleted, Matching::new(pairs)?))
}

/// A stable matching if the instance has one.
pub fn irving_stable_matching(inst: &RoommatesInstance) -> Option<Matching> {
    let ix = inst.index();
    let order: Vec<usize> = (0..ix.len()).collect();
    matching_from_successor(&ix, &successor_indexed(&ix, &order))
        .map(|partner| ix.matching_from_partners(&partner))
}

/// Pairs up the parties when none is an odd cycle; `None` otherwise.
pub(crate) fn matching_from_successor(ix: &Indexed, succ: &[usize]) -> Option<Vec<Option<usize>>> {
    let n = ix.len();
    let mut partner = vec![None; n];
    let mut done = vec![false; n];
    for start in 0..n {
        if done[start] {
            continue;
        }
        let mut cycle = vec![start];
        done[start] = true;
        let mut cur = succ[start];
        while cur != start {
            cycle.push(cur);
            done[cur] = true;
            cur = succ[cur];
        }
        if cycle.len() % 2 == 1 && cycle.len() >= 3 {
            return None;
        }
        if cycle.len() >= 2 {
            for chunk in cycle.chunks(2) {
                partner[chunk[0]] = Some(chunk[1]);
                partner[chunk[1]] = Some(chunk[0]);
            }
        }
    }
    debug_assert!(is_stable_indexed(ix, &partner));
    Some(partner)
}
