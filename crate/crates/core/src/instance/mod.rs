//! Roommates and marriage instances, matchings, and the structural
//! operations on them (agent deletion, acceptability deletion, induction of
//! sub-markets).
//!
//! A marriage instance is a roommates instance whose agents carry side
//! labels; every algorithm in the crate works on both without distinction.

pub(crate) mod format;

pub use format::{parse_instance, parse_instance_unchecked, parse_matching, serialize_instance,
                 serialize_matching};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Opaque, case-sensitive agent identifier. Ordered by byte value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(String);

impl AgentId {
    /// Builds an identifier, rejecting empty tokens and tokens containing
    /// whitespace, `:`, `,`, `>` or `#`.
    pub fn new(token: impl Into<String>) -> Result<Self> {
        let token = token.into();
        if token.is_empty() {
            return Err(Error::InvalidInput("empty agent identifier".into()));
        }
        if let Some(c) = token
            .chars()
            .find(|c| c.is_whitespace() || matches!(c, ':' | ',' | '>' | '#'))
        {
            return Err(Error::InvalidInput(format!(
                "agent identifier `{token}` contains forbidden character {c:?}"
            )));
        }
        Ok(AgentId(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for AgentId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AgentId::new(s)
    }
}

/// Shorthand used heavily in tests and generators.
///
/// Panics on an invalid token.
pub fn agent(token: &str) -> AgentId {
    AgentId::new(token).expect("valid agent identifier")
}

/// Side of an agent in a marriage instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "a",
            Side::B => "b",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    /// Stable roommates: any two agents may be acceptable to each other.
    Roommates,
    /// Stable marriage: acceptable pairs always cross the two sides.
    Marriage,
}

/// An unordered pair of distinct agents, stored with the smaller id first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair(AgentId, AgentId);

impl Pair {
    pub fn new(x: AgentId, y: AgentId) -> Result<Self> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Ok(Pair(x, y)),
            std::cmp::Ordering::Greater => Ok(Pair(y, x)),
            std::cmp::Ordering::Equal => Err(Error::InvalidInput(format!(
                "pair endpoints must differ, got `{x}` twice"
            ))),
        }
    }

    /// Like [`Pair::new`] but panics on equal endpoints.
    pub fn of(x: &str, y: &str) -> Pair {
        Pair::new(agent(x), agent(y)).expect("distinct endpoints")
    }

    pub fn first(&self) -> &AgentId {
        &self.0
    }

    pub fn second(&self) -> &AgentId {
        &self.1
    }

    pub fn contains(&self, x: &AgentId) -> bool {
        &self.0 == x || &self.1 == x
    }

    /// The endpoint that is not `x`, if `x` is an endpoint.
    pub fn other(&self, x: &AgentId) -> Option<&AgentId> {
        if &self.0 == x {
            Some(&self.1)
        } else if &self.1 == x {
            Some(&self.0)
        } else {
            None
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

impl FromStr for Pair {
    type Err = Error;

    /// Parses `x,y`.
    fn from_str(s: &str) -> Result<Self> {
        let (x, y) = s
            .split_once(',')
            .ok_or_else(|| Error::InvalidInput(format!("expected `x,y`, got `{s}`")))?;
        Pair::new(AgentId::new(x.trim())?, AgentId::new(y.trim())?)
    }
}

/// A set of pairwise disjoint pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Matching {
    pairs: BTreeSet<Pair>,
}

impl Matching {
    pub fn empty() -> Self {
        Matching::default()
    }

    /// Fails if some agent appears in two pairs.
    pub fn new(pairs: impl IntoIterator<Item = Pair>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut set = BTreeSet::new();
        for p in pairs {
            if set.contains(&p) {
                continue;
            }
            for x in [p.first(), p.second()] {
                if !seen.insert(x.clone()) {
                    return Err(Error::NotAMatching(format!("agent `{x}` is in two pairs")));
                }
            }
            set.insert(p);
        }
        Ok(Matching { pairs: set })
    }

    /// Convenience constructor from string pairs; panics if not disjoint.
    pub fn of(pairs: &[(&str, &str)]) -> Self {
        Matching::new(pairs.iter().map(|(x, y)| Pair::of(x, y))).expect("disjoint pairs")
    }

    pub fn pairs(&self) -> &BTreeSet<Pair> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, p: &Pair) -> bool {
        self.pairs.contains(p)
    }

    /// `M(x)`; `None` when `x` is unmatched.
    pub fn partner(&self, x: &AgentId) -> Option<&AgentId> {
        self.pairs.iter().find_map(|p| p.other(x))
    }

    pub fn partner_map(&self) -> HashMap<&AgentId, &AgentId> {
        let mut map = HashMap::with_capacity(2 * self.pairs.len());
        for p in &self.pairs {
            map.insert(p.first(), p.second());
            map.insert(p.second(), p.first());
        }
        map
    }

    /// Keeps only the pairs accepted by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Pair) -> bool) -> Matching {
        Matching {
            pairs: self.pairs.iter().filter(|p| keep(p)).cloned().collect(),
        }
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct AgentData {
    prefs: Vec<AgentId>,
    side: Option<Side>,
    addable: bool,
}

/// A roommates (or marriage) instance.
///
/// Values are not guaranteed to be valid: use [`RoommatesInstance::validate`]
/// or build through [`parse_instance`], which rejects invalid input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoommatesInstance {
    kind: Kind,
    agents: BTreeMap<AgentId, AgentData>,
}

impl RoommatesInstance {
    pub fn new(kind: Kind) -> Self {
        RoommatesInstance {
            kind,
            agents: BTreeMap::new(),
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// Declares an agent with an empty preference list. Re-declaring an
    /// existing agent is an error.
    pub fn add_agent(&mut self, id: AgentId, side: Option<Side>, addable: bool) -> Result<()> {
        if self.agents.contains_key(&id) {
            return Err(Error::InvalidInput(format!("agent `{id}` declared twice")));
        }
        self.agents.insert(
            id,
            AgentData {
                prefs: Vec::new(),
                side,
                addable,
            },
        );
        Ok(())
    }

    /// Replaces the preference list of a declared agent.
    pub fn set_prefs(&mut self, id: &AgentId, prefs: Vec<AgentId>) -> Result<()> {
        let data = self
            .agents
            .get_mut(id)
            .ok_or_else(|| Error::UnknownAgent(id.clone()))?;
        data.prefs = prefs;
        Ok(())
    }

    pub fn set_addable(&mut self, id: &AgentId, addable: bool) -> Result<()> {
        let data = self
            .agents
            .get_mut(id)
            .ok_or_else(|| Error::UnknownAgent(id.clone()))?;
        data.addable = addable;
        Ok(())
    }

    /// Builds a roommates instance from `(agent, preference list)` rows.
    /// Every agent must have a row.
    pub fn roommates(rows: &[(&str, &[&str])]) -> Result<Self> {
        let mut inst = RoommatesInstance::new(Kind::Roommates);
        for (id, _) in rows {
            inst.add_agent(AgentId::new(*id)?, None, false)?;
        }
        for (id, prefs) in rows {
            let prefs = prefs.iter().map(|p| AgentId::new(*p)).collect::<Result<_>>()?;
            inst.set_prefs(&AgentId::new(*id)?, prefs)?;
        }
        inst.ensure_valid()?;
        Ok(inst)
    }

    /// Builds a marriage instance; `a_rows` are the side-A agents.
    pub fn marriage(a_rows: &[(&str, &[&str])], b_rows: &[(&str, &[&str])]) -> Result<Self> {
        let mut inst = RoommatesInstance::new(Kind::Marriage);
        for (side, rows) in [(Side::A, a_rows), (Side::B, b_rows)] {
            for (id, _) in rows {
                inst.add_agent(AgentId::new(*id)?, Some(side), false)?;
            }
        }
        for (id, prefs) in a_rows.iter().chain(b_rows) {
            let prefs = prefs.iter().map(|p| AgentId::new(*p)).collect::<Result<_>>()?;
            inst.set_prefs(&AgentId::new(*id)?, prefs)?;
        }
        inst.ensure_valid()?;
        Ok(inst)
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// All agents in id order.
    pub fn agents(&self) -> impl Iterator<Item = &AgentId> + '_ {
        self.agents.keys()
    }

    pub fn contains(&self, id: &AgentId) -> bool {
        self.agents.contains_key(id)
    }

    pub fn prefs(&self, id: &AgentId) -> Option<&[AgentId]> {
        self.agents.get(id).map(|d| d.prefs.as_slice())
    }

    pub fn side(&self, id: &AgentId) -> Option<Side> {
        self.agents.get(id).and_then(|d| d.side)
    }

    pub fn is_addable(&self, id: &AgentId) -> bool {
        self.agents.get(id).is_some_and(|d| d.addable)
    }

    /// The addable pool `U'`.
    pub fn addable(&self) -> BTreeSet<AgentId> {
        self.agents
            .iter()
            .filter(|(_, d)| d.addable)
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// The original agents `U` (everyone not addable).
    pub fn original(&self) -> BTreeSet<AgentId> {
        self.agents
            .iter()
            .filter(|(_, d)| !d.addable)
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// Position of `y` in `x`'s list, 0 being the favourite.
    pub fn rank(&self, x: &AgentId, y: &AgentId) -> Option<usize> {
        self.prefs(x)?.iter().position(|z| z == y)
    }

    /// Whether `x` strictly prefers `y` to `z`. An absent `z` (unmatched)
    /// is worse than any acceptable agent.
    pub fn prefers(&self, x: &AgentId, y: &AgentId, z: Option<&AgentId>) -> bool {
        match (self.rank(x, y), z.map(|z| self.rank(x, z))) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(_), Some(None)) => true,
            (Some(ry), Some(Some(rz))) => ry < rz,
        }
    }

    pub fn is_acceptable(&self, p: &Pair) -> bool {
        self.rank(p.first(), p.second()).is_some() && self.rank(p.second(), p.first()).is_some()
    }

    /// The acceptability graph's edge set, sorted.
    pub fn acceptable_pairs(&self) -> Vec<Pair> {
        let mut out = Vec::new();
        for (x, d) in &self.agents {
            for y in &d.prefs {
                if x < y && self.rank(y, x).is_some() {
                    out.push(Pair(x.clone(), y.clone()));
                }
            }
        }
        out.sort();
        out
    }

    /// Lists every invariant violation; empty iff the instance is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut same_side = BTreeSet::new();
        for (x, d) in &self.agents {
            match (self.kind, d.side) {
                (Kind::Marriage, None) => out.push(format!("agent `{x}` has no side")),
                (Kind::Roommates, Some(_)) => {
                    out.push(format!("agent `{x}` has a side in a roommates instance"))
                }
                _ => {}
            }
            let mut seen = BTreeSet::new();
            for y in &d.prefs {
                if y == x {
                    out.push(format!("agent `{x}` lists itself"));
                    continue;
                }
                if !seen.insert(y) {
                    out.push(format!("agent `{x}` lists `{y}` twice"));
                    continue;
                }
                let Some(other) = self.agents.get(y) else {
                    out.push(format!("agent `{x}` lists unknown agent `{y}`"));
                    continue;
                };
                let (lo, hi) = if x < y { (x, y) } else { (y, x) };
                if !other.prefs.contains(x) {
                    out.push(format!("symmetry violated for {{{lo},{hi}}}: `{y}` omits `{x}`"));
                }
                if self.kind == Kind::Marriage
                    && d.side.is_some()
                    && d.side == other.side
                    && same_side.insert((lo, hi))
                {
                    out.push(format!("bipartiteness violated: `{lo}` and `{hi}` share a side"));
                }
            }
        }
        out
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(v))
        }
    }

    /// `I - W`: removes the agents in `W` and restricts every list.
    pub fn delete_agents(&self, removed: &BTreeSet<AgentId>) -> Result<Self> {
        if let Some(x) = removed.iter().find(|x| !self.contains(x)) {
            return Err(Error::UnknownAgent(x.clone()));
        }
        Ok(self.without_agents(removed))
    }

    pub(crate) fn without_agents(&self, removed: &BTreeSet<AgentId>) -> Self {
        let agents = self
            .agents
            .iter()
            .filter(|(x, _)| !removed.contains(*x))
            .map(|(x, d)| {
                let prefs = d.prefs.iter().filter(|y| !removed.contains(*y)).cloned().collect();
                (x.clone(), AgentData { prefs, ..d.clone() })
            })
            .collect();
        RoommatesInstance {
            kind: self.kind,
            agents,
        }
    }

    /// `I - F`: removes the acceptability of every pair in `F`.
    pub fn delete_pairs(&self, removed: &BTreeSet<Pair>) -> Result<Self> {
        if let Some(p) = removed.iter().find(|p| !self.is_acceptable(p)) {
            return Err(Error::NotAcceptable(p.clone()));
        }
        Ok(self.without_pairs(removed))
    }

    pub(crate) fn without_pairs(&self, removed: &BTreeSet<Pair>) -> Self {
        if removed.is_empty() {
            return self.clone();
        }
        let agents = self
            .agents
            .iter()
            .map(|(x, d)| {
                let prefs = d
                    .prefs
                    .iter()
                    .filter(|y| {
                        let p = if x < *y {
                            Pair(x.clone(), (*y).clone())
                        } else {
                            Pair((*y).clone(), x.clone())
                        };
                        !removed.contains(&p)
                    })
                    .cloned()
                    .collect();
                (x.clone(), AgentData { prefs, ..d.clone() })
            })
            .collect();
        RoommatesInstance {
            kind: self.kind,
            agents,
        }
    }

    /// The market `I - (U' \ W)` obtained by adding the addable agents in
    /// `W`; the result has no addable agents left.
    pub fn induce_with_added(&self, added: &BTreeSet<AgentId>) -> Result<Self> {
        if let Some(x) = added.iter().find(|x| !self.is_addable(x)) {
            return Err(if self.contains(x) {
                Error::InvalidInput(format!("agent `{x}` is not addable"))
            } else {
                Error::UnknownAgent(x.clone())
            });
        }
        let dropped: BTreeSet<AgentId> = self.addable().difference(added).cloned().collect();
        let mut out = self.without_agents(&dropped);
        for d in out.agents.values_mut() {
            d.addable = false;
        }
        Ok(out)
    }

    /// Checks that `m` is a matching in this instance: every pair present
    /// and acceptable.
    pub fn check_matching(&self, m: &Matching) -> Result<()> {
        for p in m.pairs() {
            for x in [p.first(), p.second()] {
                if !self.contains(x) {
                    return Err(Error::NotAMatching(format!("agent `{x}` is not in the instance")));
                }
            }
            if !self.is_acceptable(p) {
                return Err(Error::NotAMatching(format!("pair {p} is not acceptable")));
            }
        }
        Ok(())
    }

    pub(crate) fn index(&self) -> Indexed {
        Indexed::new(self)
    }
}

/// Dense integer view of an instance used by the algorithms.
///
/// Agents are numbered in id order; `rank[x][y]` is `NONE` when `y` is not
/// on `x`'s list.
#[derive(Debug, Clone)]
pub(crate) struct Indexed {
    pub ids: Vec<AgentId>,
    pub lists: Vec<Vec<usize>>,
    pub rank: Vec<Vec<u32>>,
    pub side: Vec<Option<Side>>,
}

pub(crate) const NONE: u32 = u32::MAX;

impl Indexed {
    fn new(inst: &RoommatesInstance) -> Self {
        let ids: Vec<AgentId> = inst.agents.keys().cloned().collect();
        let pos: HashMap<&AgentId, usize> = ids.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let n = ids.len();
        let mut lists = Vec::with_capacity(n);
        let mut rank = vec![vec![NONE; n]; n];
        let mut side = Vec::with_capacity(n);
        for (i, d) in inst.agents.values().enumerate() {
            let list: Vec<usize> = d.prefs.iter().filter_map(|y| pos.get(y).copied()).collect();
            for (r, &y) in list.iter().enumerate() {
                rank[i][y] = r as u32;
            }
            lists.push(list);
            side.push(d.side);
        }
        Indexed {
            ids,
            lists,
            rank,
            side,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn position(&self, x: &AgentId) -> Option<usize> {
        self.ids.binary_search(x).ok()
    }

    /// Strict preference of `x` for `y` over `z`; `None` means unmatched.
    pub fn prefers(&self, x: usize, y: usize, z: Option<usize>) -> bool {
        let ry = self.rank[x][y];
        ry != NONE
            && match z {
                None => true,
                Some(z) => ry < self.rank[x][z],
            }
    }

    /// Partner array for a matching given by name.
    pub fn partners(&self, m: &Matching) -> Vec<Option<usize>> {
        let mut out = vec![None; self.len()];
        for p in m.pairs() {
            if let (Some(x), Some(y)) = (self.position(p.first()), self.position(p.second())) {
                out[x] = Some(y);
                out[y] = Some(x);
            }
        }
        out
    }

    pub fn pair(&self, x: usize, y: usize) -> Pair {
        if self.ids[x] < self.ids[y] {
            Pair(self.ids[x].clone(), self.ids[y].clone())
        } else {
            Pair(self.ids[y].clone(), self.ids[x].clone())
        }
    }

    pub fn matching_from_partners(&self, partner: &[Option<usize>]) -> Matching {
        let pairs = partner
            .iter()
            .enumerate()
            .filter_map(|(x, p)| p.filter(|&y| x < y).map(|y| self.pair(x, y)))
            .collect();
        Matching { pairs }
    }
}
