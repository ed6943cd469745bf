//! Control queries built from Clique and Independent Set instances, and
//! exhaustive solvers for the source problems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use itertools::Itertools;

use crate::control::{ControlAction, ControlGoal, ControlQuery, GoalKind};
use crate::error::{Error, Result};
use crate::instance::format::content_lines;
use crate::instance::{agent, AgentId, Kind, Matching, Pair, RoommatesInstance, Side};

/// Largest graph the brute-force source solvers accept.
pub const GRAPH_VERTEX_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UndirectedGraph {
    vertices: BTreeSet<AgentId>,
    edges: BTreeSet<Pair>,
}

impl UndirectedGraph {
    pub fn new(
        vertices: impl IntoIterator<Item = AgentId>,
        edges: impl IntoIterator<Item = Pair>,
    ) -> Result<Self> {
        let vertices: BTreeSet<AgentId> = vertices.into_iter().collect();
        let edges: BTreeSet<Pair> = edges.into_iter().collect();
        for e in &edges {
            for v in [e.first(), e.second()] {
                if !vertices.contains(v) {
                    return Err(Error::InvalidInput(format!("edge {e} uses unknown vertex `{v}`")));
                }
            }
        }
        Ok(UndirectedGraph { vertices, edges })
    }

    /// Vertices `v1..vn` with edges given by index pairs.
    pub fn indexed(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let name = |i: usize| agent(&format!("v{}", i + 1));
        let edges = edges
            .iter()
            .map(|&(i, j)| Pair::new(name(i), name(j)))
            .collect::<Result<Vec<_>>>()?;
        UndirectedGraph::new((0..n).map(name), edges)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
        UndirectedGraph::indexed(n, &edges).expect("well-formed")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        UndirectedGraph::indexed(n, &edges).expect("well-formed")
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        if n >= 3 {
            edges.push((n - 1, 0));
        }
        UndirectedGraph::indexed(n, &edges).expect("well-formed")
    }

    pub fn star(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
        UndirectedGraph::indexed(n, &edges).expect("well-formed")
    }

    pub fn vertices(&self) -> &BTreeSet<AgentId> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<Pair> {
        &self.edges
    }

    pub fn has_edge(&self, u: &AgentId, v: &AgentId) -> bool {
        Pair::new(u.clone(), v.clone()).is_ok_and(|p| self.edges.contains(&p))
    }

    pub fn neighbours(&self, v: &AgentId) -> BTreeSet<AgentId> {
        self.edges.iter().filter_map(|e| e.other(v).cloned()).collect()
    }
}

/// `<u>-<v>` for an edge.
pub fn edge_id(e: &Pair) -> String {
    format!("{}-{}", e.first(), e.second())
}

/// Reads `vertices v1 v2 ...` followed by `edge u v` lines.
pub fn parse_graph(text: &str) -> Result<UndirectedGraph> {
    let syntax = |line: usize, reason: String| Error::Parse { line, reason };
    let mut vertices: Option<Vec<AgentId>> = None;
    let mut edges = Vec::new();
    for (n, line) in content_lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["vertices", rest @ ..] if vertices.is_none() => {
                let ids = rest
                    .iter()
                    .map(|t| t.parse::<AgentId>())
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| syntax(n, e.to_string()))?;
                vertices = Some(ids);
            }
            ["edge", u, v] if vertices.is_some() => {
                let p = Pair::new(
                    u.parse().map_err(|e: Error| syntax(n, e.to_string()))?,
                    v.parse().map_err(|e: Error| syntax(n, e.to_string()))?,
                )
                .map_err(|e| syntax(n, e.to_string()))?;
                edges.push((n, p));
            }
            _ => return Err(syntax(n, format!("unexpected line `{line}`"))),
        }
    }
    let vertices = vertices.ok_or_else(|| syntax(1, "missing `vertices` line".into()))?;
    let known: BTreeSet<&AgentId> = vertices.iter().collect();
    let mut seen = BTreeSet::new();
    for (n, e) in &edges {
        for v in [e.first(), e.second()] {
            if !known.contains(v) {
                return Err(syntax(*n, format!("unknown vertex `{v}`")));
            }
        }
        if !seen.insert(e.clone()) {
            return Err(syntax(*n, format!("parallel edge {e}")));
        }
    }
    UndirectedGraph::new(vertices, edges.into_iter().map(|(_, e)| e))
}

pub fn serialize_graph(g: &UndirectedGraph) -> String {
    let mut out = String::from("vertices");
    for v in &g.vertices {
        out.push(' ');
        out.push_str(v.as_str());
    }
    out.push('\n');
    for e in &g.edges {
        let _ = writeln!(out, "edge {} {}", e.first(), e.second());
    }
    out
}

/// A generated query and the gadget role of each agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionResult {
    pub query: ControlQuery,
    /// Role (e.g. `w_v[3]`, `selector[1]`) to agent id.
    pub name_map: BTreeMap<String, AgentId>,
}

impl ReductionResult {
    /// One `# role = id` comment line per agent.
    pub fn name_map_comments(&self) -> String {
        let mut out = String::new();
        for (role, id) in &self.name_map {
            let _ = writeln!(out, "# {role} = {id}");
        }
        out
    }
}

struct Builder {
    inst: RoommatesInstance,
    names: BTreeMap<String, AgentId>,
}

impl Builder {
    fn new(kind: Kind) -> Self {
        Builder {
            inst: RoommatesInstance::new(kind),
            names: BTreeMap::new(),
        }
    }

    fn add(&mut self, role: String, id: String, side: Option<Side>, addable: bool) -> Result<AgentId> {
        let id: AgentId = id.parse()?;
        if self.inst.contains(&id) {
            return Err(Error::InvalidInput(format!("gadget name `{id}` is used twice")));
        }
        self.inst.add_agent(id.clone(), side, addable)?;
        self.names.insert(role, id.clone());
        Ok(id)
    }

    fn prefs(&mut self, id: &AgentId, list: Vec<AgentId>) {
        self.inst.set_prefs(id, list).expect("declared agent");
    }

    fn finish(self, action: ControlAction, goal: ControlGoal, budget: usize) -> Result<ReductionResult> {
        let query = ControlQuery::new(self.inst, action, goal, budget);
        query
            .validate()
            .map_err(|e| Error::Internal(format!("reduction produced an invalid query: {e}")))?;
        Ok(ReductionResult {
            query,
            name_map: self.names,
        })
    }
}

fn check_k(g: &UndirectedGraph, k: usize) -> Result<()> {
    if g.vertices.is_empty() {
        return Err(Error::InvalidInput("the graph has no vertices".into()));
    }
    if k > g.vertices.len() {
        return Err(Error::InvalidInput(format!(
            "k = {k} exceeds the {} vertices of the graph",
            g.vertices.len()
        )));
    }
    Ok(())
}

/// Edges keyed by their id, rejecting graphs whose ids collide.
fn edge_ids(g: &UndirectedGraph) -> Result<BTreeMap<String, Pair>> {
    let mut out = BTreeMap::new();
    for e in &g.edges {
        if out.insert(edge_id(e), e.clone()).is_some() {
            return Err(Error::InvalidInput(format!("edge id `{}` is ambiguous", edge_id(e))));
        }
    }
    Ok(out)
}

fn binom2(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Marriage instance where adding `k + C(k,2)` men lets `w*` be matched, or
/// makes a perfect stable matching exist, iff `g` has a `k`-clique.
///
/// `goal` is [`GoalKind::Ma`] (targeting `wstar`) or [`GoalKind::ExistsPsm`].
pub fn clique_to_csm_addag(g: &UndirectedGraph, k: usize, goal: GoalKind) -> Result<ReductionResult> {
    check_k(g, k)?;
    if !matches!(goal, GoalKind::Ma | GoalKind::ExistsPsm) {
        return Err(Error::InvalidInput(format!("clique reduction has no `{goal}` variant")));
    }
    let edges = edge_ids(g)?;
    let mut b = Builder::new(Kind::Marriage);
    let (men, women) = (Some(Side::A), Some(Side::B));

    let mut wv = BTreeMap::new();
    let mut mv = BTreeMap::new();
    for v in &g.vertices {
        wv.insert(v, b.add(format!("w_v[{v}]"), format!("wv_{v}"), women, false)?);
        mv.insert(v, b.add(format!("m'_v[{v}]"), format!("mv'_{v}"), men, true)?);
    }
    let mut we = BTreeMap::new();
    let mut me = BTreeMap::new();
    let mut me2 = BTreeMap::new();
    for id in edges.keys() {
        we.insert(id, b.add(format!("w_e[{id}]"), format!("we_{id}"), women, false)?);
        me.insert(id, b.add(format!("m_e[{id}]"), format!("me_{id}"), men, false)?);
        me2.insert(id, b.add(format!("m'_e[{id}]"), format!("me'_{id}"), men, true)?);
    }
    let selectors = (1..=binom2(k))
        .map(|i| b.add(format!("selector[{i}]"), format!("s_{i}"), women, false))
        .collect::<Result<Vec<_>>>()?;
    let dummies = (1..=g.vertices.len() - k)
        .map(|j| b.add(format!("dummy[{j}]"), format!("d_{j}"), men, false))
        .collect::<Result<Vec<_>>>()?;
    let wstar = b.add("w*".into(), "wstar".into(), women, false)?;
    let mstar = b.add("m*".into(), "mstar".into(), men, false)?;

    let mut list = selectors.clone();
    list.push(wstar.clone());
    b.prefs(&mstar, list);
    b.prefs(&wstar, vec![mstar.clone()]);
    for s in &selectors {
        let mut list: Vec<AgentId> = me.values().cloned().collect();
        list.push(mstar.clone());
        b.prefs(s, list);
    }
    for (id, e) in &edges {
        let mut list = vec![we[id].clone(), wv[e.first()].clone(), wv[e.second()].clone()];
        list.extend(selectors.iter().cloned());
        b.prefs(&me[id], list);
        b.prefs(&we[id], vec![me2[id].clone(), me[id].clone()]);
        b.prefs(&me2[id], vec![we[id].clone()]);
    }
    for v in &g.vertices {
        let mut list = vec![mv[v].clone()];
        list.extend(
            edges
                .iter()
                .filter(|(_, e)| e.contains(v))
                .map(|(id, _)| me[id].clone()),
        );
        list.extend(dummies.iter().cloned());
        b.prefs(&wv[v], list);
        b.prefs(&mv[v], vec![wv[v].clone()]);
    }
    for d in &dummies {
        b.prefs(d, wv.values().cloned().collect());
    }

    let goal = match goal {
        GoalKind::Ma => ControlGoal::Ma(wstar),
        _ => ControlGoal::ExistsPsm,
    };
    b.finish(ControlAction::AddAg, goal, k + binom2(k))
}

/// Roommates instance where adding `2|V| - k` copies makes a stable
/// matching inside the copy matching iff `g` has an independent set of
/// size `k`.
pub fn is_to_csr_addag_ms(g: &UndirectedGraph, k: usize) -> Result<ReductionResult> {
    check_k(g, k)?;
    let mut b = Builder::new(Kind::Roommates);
    let mut ids: BTreeMap<(&str, &AgentId), AgentId> = BTreeMap::new();
    for v in &g.vertices {
        for role in ["a", "b", "c"] {
            let plain = b.add(format!("{role}_v[{v}]"), format!("{role}_{v}"), None, false)?;
            let copy = b.add(format!("{role}'_v[{v}]"), format!("{role}'_{v}"), None, true)?;
            ids.insert((role, v), plain);
            ids.insert((copy_role(role), v), copy);
        }
    }
    let mut pairs = Vec::new();
    for v in &g.vertices {
        let id = |role: &str| ids[&(role, v)].clone();
        b.prefs(&id("a"), vec![id("a'"), id("b"), id("c")]);
        b.prefs(&id("b"), vec![id("b'"), id("a")]);
        b.prefs(&id("c"), vec![id("c'"), id("a")]);
        let mut list: Vec<AgentId> = g.neighbours(v).iter().map(|u| ids[&("a'", u)].clone()).collect();
        list.push(id("a"));
        b.prefs(&id("a'"), list);
        b.prefs(&id("b'"), vec![id("b")]);
        b.prefs(&id("c'"), vec![id("c")]);
        for role in ["a", "b", "c"] {
            pairs.push(Pair::new(id(role), id(copy_role(role)))?);
        }
    }
    let budget = 2 * g.vertices.len() - k;
    b.finish(ControlAction::AddAg, ControlGoal::Ms(Matching::new(pairs)?), budget)
}

fn copy_role(role: &str) -> &'static str {
    match role {
        "a" => "a'",
        "b" => "b'",
        _ => "c'",
    }
}

/// Roommates instance where adding `k` vertex agents makes a stable (and
/// then necessarily perfect) matching exist iff `g` has an independent set
/// of size `k`.
///
/// `goal` is [`GoalKind::ExistsSm`] or [`GoalKind::ExistsPsm`]; the
/// instance is the same for both.
pub fn is_to_csr_addag_existssm(g: &UndirectedGraph, k: usize, goal: GoalKind) -> Result<ReductionResult> {
    check_k(g, k)?;
    let goal = match goal {
        GoalKind::ExistsSm => ControlGoal::ExistsSm,
        GoalKind::ExistsPsm => ControlGoal::ExistsPsm,
        other => {
            return Err(Error::InvalidInput(format!(
                "independent set reduction has no `{other}` variant"
            )))
        }
    };
    let mut b = Builder::new(Kind::Roommates);
    for v in &g.vertices {
        b.add(format!("vertex[{v}]"), v.to_string(), None, true)?;
    }
    let mut gadgets = Vec::new();
    for i in 1..=k {
        let s = b.add(format!("selector[{i}]"), format!("s_{i}"), None, false)?;
        let ai = b.add(format!("a_i[{i}]"), format!("ai_{i}"), None, false)?;
        let bi = b.add(format!("b_i[{i}]"), format!("bi_{i}"), None, false)?;
        gadgets.push((s, ai, bi));
    }
    for v in &g.vertices {
        let mut list: Vec<AgentId> = g.neighbours(v).into_iter().collect();
        list.extend(gadgets.iter().map(|(s, _, _)| s.clone()));
        b.prefs(v, list);
    }
    for (s, ai, bi) in &gadgets {
        let mut list: Vec<AgentId> = g.vertices.iter().cloned().collect();
        list.extend([ai.clone(), bi.clone()]);
        b.prefs(s, list);
        b.prefs(ai, vec![bi.clone(), s.clone()]);
        b.prefs(bi, vec![s.clone(), ai.clone()]);
    }
    b.finish(ControlAction::AddAg, goal, k)
}

fn check_graph_cap(g: &UndirectedGraph) -> Result<()> {
    if g.vertices.len() > GRAPH_VERTEX_CAP {
        return Err(Error::CapExceeded {
            what: "graph",
            count: g.vertices.len(),
            cap: GRAPH_VERTEX_CAP,
        });
    }
    Ok(())
}

fn some_subset(g: &UndirectedGraph, k: usize, adjacent: bool) -> Result<bool> {
    check_graph_cap(g)?;
    if k > g.vertices.len() {
        return Ok(false);
    }
    Ok(g.vertices
        .iter()
        .combinations(k)
        .any(|set| set.iter().tuple_combinations().all(|(u, v)| g.has_edge(u, v) == adjacent)))
}

/// Whether `g` has a clique of at least `k` vertices.
pub fn brute_clique(g: &UndirectedGraph, k: usize) -> Result<bool> {
    some_subset(g, k, true)
}

/// Whether `g` has `k` pairwise non-adjacent vertices.
pub fn brute_independent_set(g: &UndirectedGraph, k: usize) -> Result<bool> {
    some_subset(g, k, false)
}
