//! Control problems: an action (adding agents, deleting agents, deleting
//! acceptability), a goal, a budget, and how a goal is evaluated on a
//! controlled instance.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::classic::irving_stable_matching;
use crate::error::{Error, Result};
use crate::exact::{apply_unchecked, candidate_actions};
use crate::instance::format::content_lines;
use crate::instance::{serialize_matching, AgentId, Matching, Pair, RoommatesInstance};
use crate::poly::pair_in_some_stable_matching;
use crate::stability::{
    covered_agents, enumerate_stable_matchings, is_perfect, is_stable, DEFAULT_ENUMERATION_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlAction {
    AddAg,
    DelAg,
    DelAcc,
}

impl fmt::Display for ControlAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlAction::AddAg => "addag",
            ControlAction::DelAg => "delag",
            ControlAction::DelAcc => "delacc",
        })
    }
}

impl FromStr for ControlAction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "addag" => Ok(ControlAction::AddAg),
            "delag" => Ok(ControlAction::DelAg),
            "delacc" => Ok(ControlAction::DelAcc),
            _ => Err(Error::InvalidQuery(format!("unknown action `{s}`"))),
        }
    }
}

/// Goal without its target, as written in problem names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GoalKind {
    Ma,
    Mp,
    Ms,
    ExistsSm,
    ExistsPsm,
}

impl fmt::Display for GoalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GoalKind::Ma => "ma",
            GoalKind::Mp => "mp",
            GoalKind::Ms => "ms",
            GoalKind::ExistsSm => "esm",
            GoalKind::ExistsPsm => "epsm",
        })
    }
}

impl FromStr for GoalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ma" => Ok(GoalKind::Ma),
            "mp" => Ok(GoalKind::Mp),
            "ms" => Ok(GoalKind::Ms),
            "esm" => Ok(GoalKind::ExistsSm),
            "epsm" => Ok(GoalKind::ExistsPsm),
            _ => Err(Error::InvalidQuery(format!("unknown goal `{s}`"))),
        }
    }
}

/// `<action>-<goal>`, e.g. `delag-mp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Problem {
    pub action: ControlAction,
    pub goal: GoalKind,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.action, self.goal)
    }
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, g) = s
            .split_once('-')
            .ok_or_else(|| Error::InvalidQuery(format!("expected <action>-<goal>, got `{s}`")))?;
        Ok(Problem {
            action: a.parse()?,
            goal: g.parse()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControlGoal {
    /// The agent is matched in some stable matching.
    Ma(AgentId),
    /// The pair belongs to some stable matching.
    Mp(Pair),
    /// The matching becomes stable. For adding and deleting agents this
    /// means some stable matching is contained in it.
    Ms(Matching),
    ExistsSm,
    ExistsPsm,
}

impl ControlGoal {
    pub fn kind(&self) -> GoalKind {
        match self {
            ControlGoal::Ma(_) => GoalKind::Ma,
            ControlGoal::Mp(_) => GoalKind::Mp,
            ControlGoal::Ms(_) => GoalKind::Ms,
            ControlGoal::ExistsSm => GoalKind::ExistsSm,
            ControlGoal::ExistsPsm => GoalKind::ExistsPsm,
        }
    }

    /// Agents that a deletion must never touch.
    pub(crate) fn protected_agents(&self) -> BTreeSet<AgentId> {
        match self {
            ControlGoal::Ma(x) => [x.clone()].into(),
            ControlGoal::Mp(p) => [p.first().clone(), p.second().clone()].into(),
            _ => BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlQuery {
    instance: RoommatesInstance,
    action: ControlAction,
    goal: ControlGoal,
    budget: usize,
}

impl ControlQuery {
    /// Unchecked constructor; see [`ControlQuery::validate`].
    pub fn new(
        instance: RoommatesInstance,
        action: ControlAction,
        goal: ControlGoal,
        budget: usize,
    ) -> Self {
        ControlQuery {
            instance,
            action,
            goal,
            budget,
        }
    }

    pub fn instance(&self) -> &RoommatesInstance {
        &self.instance
    }

    pub fn action(&self) -> ControlAction {
        self.action
    }

    pub fn goal(&self) -> &ControlGoal {
        &self.goal
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn problem(&self) -> Problem {
        Problem {
            action: self.action,
            goal: self.goal.kind(),
        }
    }

    pub fn with_budget(&self, budget: usize) -> Self {
        ControlQuery {
            budget,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let inst = &self.instance;
        let bad = |msg: String| Err(Error::InvalidQuery(msg));
        let violations = inst.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidInstance(violations));
        }
        let addable = inst.addable();
        match self.action {
            ControlAction::AddAg if addable.is_empty() => {
                return bad("adding agents needs at least one addable agent".into())
            }
            ControlAction::DelAg | ControlAction::DelAcc if !addable.is_empty() => {
                return bad(format!("{} queries must not mark agents addable", self.action))
            }
            _ => {}
        }
        let original = inst.original();
        match &self.goal {
            ControlGoal::Ma(x) if !original.contains(x) => {
                bad(format!("target agent `{x}` is not an original agent"))
            }
            ControlGoal::Mp(p) if !inst.is_acceptable(p) => {
                bad(format!("target pair {p} is not acceptable"))
            }
            ControlGoal::Mp(p)
                if !original.contains(p.first()) || !original.contains(p.second()) =>
            {
                bad(format!("target pair {p} must join two original agents"))
            }
            ControlGoal::Ms(m) => {
                inst.check_matching(m)
                    .map_err(|e| Error::InvalidQuery(format!("target matching: {e}")))?;
                if self.action != ControlAction::DelAcc && !is_perfect(inst, m) {
                    return bad(format!(
                        "{} needs a perfect target matching",
                        self.problem()
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// A set of control actions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Witness {
    Agents(BTreeSet<AgentId>),
    Pairs(BTreeSet<Pair>),
}

impl Witness {
    pub fn len(&self) -> usize {
        match self {
            Witness::Agents(s) => s.len(),
            Witness::Pairs(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn empty_for(action: ControlAction) -> Witness {
        match action {
            ControlAction::DelAcc => Witness::Pairs(BTreeSet::new()),
            _ => Witness::Agents(BTreeSet::new()),
        }
    }
}

impl fmt::Display for Witness {
    /// Space-separated, sorted; pairs as `x,y`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = match self {
            Witness::Agents(s) => s.iter().map(ToString::to_string).collect(),
            Witness::Pairs(s) => s.iter().map(ToString::to_string).collect(),
        };
        f.write_str(&items.join(" "))
    }
}

/// Result of solving a control query.
///
/// The witness is present exactly when the verdict is yes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlOutcome {
    pub verdict: bool,
    /// Minimum number of actions, when known to exist.
    pub optimum: Option<usize>,
    pub witness: Option<Witness>,
}

impl ControlOutcome {
    pub(crate) fn from_optimum(budget: usize, optimum: Option<usize>, witness: Option<Witness>) -> Self {
        let verdict = optimum.is_some_and(|o| o <= budget);
        ControlOutcome {
            verdict,
            optimum,
            witness: if verdict { witness } else { None },
        }
    }
}

/// How goals are decided on a controlled instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GoalOracle {
    /// Stable partitions and the rural-hospitals property; exact at any
    /// size.
    #[default]
    Polynomial,
    /// Exhaustive enumeration of matchings, refusing instances with more
    /// acceptable pairs than `cap`.
    Enumeration { cap: usize },
}

impl GoalOracle {
    pub fn enumeration() -> Self {
        GoalOracle::Enumeration {
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// The controlled instance after applying `actions`.
pub fn apply_actions(q: &ControlQuery, actions: &Witness) -> Result<RoommatesInstance> {
    match candidate_actions(q).covers(actions) {
        None => Err(Error::InvalidQuery(format!(
            "witness kind does not fit action {}",
            q.action
        ))),
        Some(false) => Err(Error::InvalidQuery(format!(
            "{{{actions}}} is not a set of candidates for {}",
            q.action
        ))),
        Some(true) => apply_unchecked(q, actions),
    }
}

/// Whether `goal` holds in `inst`, with `action` selecting the convention
/// for matching targets.
pub fn goal_holds(inst: &RoommatesInstance, goal: &ControlGoal, action: ControlAction) -> Result<bool> {
    goal_holds_with(inst, goal, action, GoalOracle::Polynomial)
}

pub fn goal_holds_with(
    inst: &RoommatesInstance,
    goal: &ControlGoal,
    action: ControlAction,
    oracle: GoalOracle,
) -> Result<bool> {
    if let ControlGoal::Ms(m) = goal {
        if action == ControlAction::DelAcc {
            return Ok(inst.check_matching(m).is_ok() && is_stable(inst, m)?);
        }
    }
    match oracle {
        GoalOracle::Polynomial => holds_polynomial(inst, goal),
        GoalOracle::Enumeration { cap } => holds_by_enumeration(inst, goal, cap),
    }
}

fn surviving(inst: &RoommatesInstance, m: &Matching) -> Matching {
    m.filter(|p| inst.contains(p.first()) && inst.contains(p.second()) && inst.is_acceptable(p))
}

fn holds_polynomial(inst: &RoommatesInstance, goal: &ControlGoal) -> Result<bool> {
    Ok(match goal {
        ControlGoal::Mp(p) => {
            inst.is_acceptable(p) && pair_in_some_stable_matching(inst, p.first(), p.second())?
        }
        ControlGoal::ExistsSm => irving_stable_matching(inst).is_some(),
        ControlGoal::ExistsPsm => irving_stable_matching(inst).is_some_and(|m| is_perfect(inst, &m)),
        ControlGoal::Ma(x) => {
            inst.contains(x) && irving_stable_matching(inst).is_some_and(|m| m.partner(x).is_some())
        }
        ControlGoal::Ms(m) => {
            // every stable matching covers the same agents, so the only
            // candidate inside `m` is the part of `m` touching them
            let Some(stable) = irving_stable_matching(inst) else {
                return Ok(false);
            };
            let covered = covered_agents(&stable);
            let candidate = surviving(inst, m)
                .filter(|p| covered.contains(p.first()) || covered.contains(p.second()));
            covered_agents(&candidate) == covered && is_stable(inst, &candidate)?
        }
    })
}

fn holds_by_enumeration(inst: &RoommatesInstance, goal: &ControlGoal, cap: usize) -> Result<bool> {
    if let ControlGoal::Ma(x) = goal {
        if !inst.contains(x) {
            return Ok(false);
        }
    }
    let all = enumerate_stable_matchings(inst, cap)?;
    Ok(match goal {
        ControlGoal::Ma(x) => all.iter().any(|m| m.partner(x).is_some()),
        ControlGoal::Mp(p) => all.iter().any(|m| m.contains(p)),
        ControlGoal::ExistsSm => !all.is_empty(),
        ControlGoal::ExistsPsm => all.iter().any(|m| is_perfect(inst, m)),
        ControlGoal::Ms(target) => all
            .iter()
            .any(|m| m.pairs().iter().all(|p| target.contains(p))),
    })
}

/// Query descriptor stored next to an instance file.
///
/// ```text
/// action addag
/// goal ma
/// budget 3
/// target wstar
/// ```
///
/// `target` takes an agent for `ma` and `x,y` for `mp`; `ms` lists its
/// matching as `match x y` lines.
pub fn serialize_query(q: &ControlQuery) -> String {
    let mut out = format!("action {}\ngoal {}\nbudget {}\n", q.action, q.goal.kind(), q.budget);
    match &q.goal {
        ControlGoal::Ma(x) => out.push_str(&format!("target {x}\n")),
        ControlGoal::Mp(p) => out.push_str(&format!("target {p}\n")),
        ControlGoal::Ms(m) => out.push_str(&serialize_matching(m)),
        ControlGoal::ExistsSm | ControlGoal::ExistsPsm => {}
    }
    out
}

/// Parses a query descriptor for `instance` and validates the result.
pub fn parse_query(text: &str, instance: RoommatesInstance) -> Result<ControlQuery> {
    let syntax = |line: usize, reason: String| Error::Parse { line, reason };
    let mut action = None;
    let mut goal = None;
    let mut budget = None;
    let mut target: Option<(usize, String)> = None;
    let mut pairs = Vec::new();
    for (n, line) in content_lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["action", a] => action = Some(a.parse::<ControlAction>().map_err(|e| syntax(n, e.to_string()))?),
            ["goal", g] => goal = Some(g.parse::<GoalKind>().map_err(|e| syntax(n, e.to_string()))?),
            ["budget", b] => {
                budget = Some(b.parse::<usize>().map_err(|_| syntax(n, format!("bad budget `{b}`")))?)
            }
            ["target", t] => target = Some((n, t.to_string())),
            ["match", x, y] => {
                let p = Pair::new(
                    x.parse().map_err(|e: Error| syntax(n, e.to_string()))?,
                    y.parse().map_err(|e: Error| syntax(n, e.to_string()))?,
                )
                .map_err(|e| syntax(n, e.to_string()))?;
                pairs.push(p);
            }
            _ => return Err(syntax(n, format!("unrecognised line `{line}`"))),
        }
    }
    let missing = |what: &str| Error::InvalidQuery(format!("descriptor has no `{what}` line"));
    let action = action.ok_or_else(|| missing("action"))?;
    let kind = goal.ok_or_else(|| missing("goal"))?;
    let budget = budget.ok_or_else(|| missing("budget"))?;
    let goal = match kind {
        GoalKind::Ma => {
            let (n, t) = target.ok_or_else(|| missing("target"))?;
            ControlGoal::Ma(t.parse().map_err(|e: Error| syntax(n, e.to_string()))?)
        }
        GoalKind::Mp => {
            let (n, t) = target.ok_or_else(|| missing("target"))?;
            ControlGoal::Mp(t.parse().map_err(|e: Error| syntax(n, e.to_string()))?)
        }
        GoalKind::Ms => ControlGoal::Ms(Matching::new(pairs)?),
        GoalKind::ExistsSm => ControlGoal::ExistsSm,
        GoalKind::ExistsPsm => ControlGoal::ExistsPsm,
    };
    let q = ControlQuery::new(instance, action, goal, budget);
    q.validate()?;
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::agent;

    fn three_cycle() -> RoommatesInstance {
        RoommatesInstance::roommates(&[("a", &["b", "c"]), ("b", &["c", "a"]), ("c", &["a", "b"])])
            .unwrap()
    }

    fn oracles() -> [GoalOracle; 2] {
        [GoalOracle::Polynomial, GoalOracle::enumeration()]
    }

    #[test]
    fn problem_names_round_trip() {
        for s in ["addag-ma", "delag-mp", "delacc-ms", "addag-esm", "delag-epsm"] {
            assert_eq!(s.parse::<Problem>().unwrap().to_string(), s);
        }
        assert!("delag".parse::<Problem>().is_err());
        assert!("swap-ma".parse::<Problem>().is_err());
    }

    #[test]
    fn apply_actions_examples() {
        let q = ControlQuery::new(three_cycle(), ControlAction::DelAg, ControlGoal::ExistsSm, 1);
        let out = apply_actions(&q, &Witness::Agents([agent("c")].into())).unwrap();
        assert_eq!(out, RoommatesInstance::roommates(&[("a", &["b"]), ("b", &["a"])]).unwrap());

        let mut inst = three_cycle();
        inst.set_addable(&agent("c"), true).unwrap();
        let q = ControlQuery::new(inst, ControlAction::AddAg, ControlGoal::ExistsSm, 1);
        let out = apply_actions(&q, &Witness::Agents(BTreeSet::new())).unwrap();
        assert_eq!(out.len(), 2);

        let q = ControlQuery::new(three_cycle(), ControlAction::DelAcc, ControlGoal::ExistsSm, 1);
        let out = apply_actions(&q, &Witness::Pairs([Pair::of("b", "c")].into())).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out.acceptable_pairs().len(), 2);
    }

    #[test]
    fn apply_actions_rejects_outside_universe() {
        let q = ControlQuery::new(
            three_cycle(),
            ControlAction::DelAg,
            ControlGoal::Ma(agent("a")),
            1,
        );
        assert!(apply_actions(&q, &Witness::Agents([agent("a")].into())).is_err());
        assert!(apply_actions(&q, &Witness::Pairs(BTreeSet::new())).is_err());
        let q = ControlQuery::new(
            three_cycle(),
            ControlAction::DelAcc,
            ControlGoal::Mp(Pair::of("a", "b")),
            1,
        );
        assert!(apply_actions(&q, &Witness::Pairs([Pair::of("a", "b")].into())).is_err());
    }

    #[test]
    fn goal_examples() {
        let pair = RoommatesInstance::roommates(&[("a", &["b"]), ("b", &["a"])]).unwrap();
        let sm = RoommatesInstance::marriage(
            &[("m1", &["w1", "w2"]), ("m2", &["w1", "w2"])],
            &[("w1", &["m2", "m1"]), ("w2", &["m2", "m1"])],
        )
        .unwrap();
        for o in oracles() {
            let d = ControlAction::DelAg;
            assert!(goal_holds_with(&pair, &ControlGoal::ExistsPsm, d, o).unwrap());
            assert!(!goal_holds_with(&three_cycle(), &ControlGoal::ExistsSm, d, o).unwrap());
            let mp = ControlGoal::Mp(Pair::of("m1", "w1"));
            assert!(!goal_holds_with(&sm, &mp, d, o).unwrap());
            let mp = ControlGoal::Mp(Pair::of("m1", "w2"));
            assert!(goal_holds_with(&sm, &mp, d, o).unwrap());
            assert!(!goal_holds_with(&pair, &ControlGoal::Ma(agent("z")), d, o).unwrap());
        }
    }

    #[test]
    fn matching_goal_conventions() {
        let pair = RoommatesInstance::roommates(&[("a", &["b"]), ("b", &["a"]), ("c", &[])])
            .unwrap();
        let m = Matching::of(&[("a", "b")]);
        for o in oracles() {
            assert!(goal_holds_with(&pair, &ControlGoal::Ms(m.clone()), ControlAction::DelAg, o).unwrap());
            assert!(goal_holds_with(&pair, &ControlGoal::Ms(m.clone()), ControlAction::DelAcc, o).unwrap());
            let none = ControlGoal::Ms(Matching::empty());
            assert!(!goal_holds_with(&pair, &none, ControlAction::DelAg, o).unwrap());
            assert!(!goal_holds_with(&pair, &none, ControlAction::DelAcc, o).unwrap());
        }
    }

    #[test]
    fn query_validation() {
        let q = ControlQuery::new(three_cycle(), ControlAction::AddAg, ControlGoal::ExistsSm, 0);
        assert!(q.validate().is_err());
        let q = ControlQuery::new(three_cycle(), ControlAction::DelAg, ControlGoal::Ma(agent("q")), 0);
        assert!(q.validate().is_err());
        let q = ControlQuery::new(
            three_cycle(),
            ControlAction::DelAg,
            ControlGoal::Ms(Matching::of(&[("a", "b")])),
            0,
        );
        assert!(q.validate().is_err(), "not perfect");
        let q = ControlQuery::new(
            three_cycle(),
            ControlAction::DelAcc,
            ControlGoal::Ms(Matching::of(&[("a", "b")])),
            0,
        );
        assert!(q.validate().is_ok());
    }

    #[test]
    fn query_descriptor_round_trip() {
        let mut inst = three_cycle();
        inst.set_addable(&agent("c"), true).unwrap();
        let q = ControlQuery::new(inst.clone(), ControlAction::AddAg, ControlGoal::Ma(agent("a")), 1);
        assert_eq!(parse_query(&serialize_query(&q), inst.clone()).unwrap(), q);

        let q = ControlQuery::new(three_cycle(), ControlAction::DelAcc, ControlGoal::Mp(Pair::of("a", "b")), 2);
        let text = serialize_query(&q);
        assert_eq!(text, "action delacc\ngoal mp\nbudget 2\ntarget a,b\n");
        assert_eq!(parse_query(&text, three_cycle()).unwrap(), q);

        let m = Matching::of(&[("a", "b")]);
        let q = ControlQuery::new(three_cycle(), ControlAction::DelAcc, ControlGoal::Ms(m), 0);
        assert_eq!(parse_query(&serialize_query(&q), three_cycle()).unwrap(), q);

        assert!(matches!(
            parse_query("action delag\nbudget x\n", three_cycle()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_query("action delag\ngoal ma\nbudget 1\n", three_cycle()).is_err());
    }
}
