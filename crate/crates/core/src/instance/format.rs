//! Line-oriented text formats for instances and matchings.
//!
//! Instance files:
//!
//! ```text
//! problem: sr            # or `problem: sm`
//! agent a                # `agent <id> [side=a|b] [addable]`
//! agent b
//! pref a: b              # `pref <id>: <id> > <id> > ...`, may be empty
//! pref b: a
//! ```
//!
//! `#` starts a comment and blank lines are ignored. Matching files hold one
//! `match <id> <id>` line per pair.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{AgentId, Kind, Matching, Pair, RoommatesInstance, Side};
use crate::error::{Error, Result};

/// Strips comments and surrounding whitespace, yielding `(line number, text)`
/// for the non-blank lines.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn syntax(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn ident(line: usize, token: &str) -> Result<AgentId> {
    AgentId::new(token).map_err(|e| syntax(line, e.to_string()))
}

/// Parses an instance and rejects it unless it passes validation.
pub fn parse_instance(text: &str) -> Result<RoommatesInstance> {
    let inst = parse_instance_unchecked(text)?;
    inst.ensure_valid()?;
    Ok(inst)
}

/// Parses an instance, checking syntax and references but not the
/// symmetry or bipartiteness invariants.
pub fn parse_instance_unchecked(text: &str) -> Result<RoommatesInstance> {
    let mut lines = content_lines(text);
    let kind = match lines.next() {
        None => return Err(syntax(1, "missing `problem:` header")),
        Some((n, line)) => match line.split_once(':') {
            Some((key, value)) if key.trim() == "problem" => match value.trim() {
                "sr" => Kind::Roommates,
                "sm" => Kind::Marriage,
                other => return Err(syntax(n, format!("unknown problem `{other}`"))),
            },
            _ => return Err(syntax(n, "expected `problem: sr` or `problem: sm`")),
        },
    };

    let mut inst = RoommatesInstance::new(kind);
    let mut prefs: BTreeMap<AgentId, (usize, Vec<(AgentId, usize)>)> = BTreeMap::new();
    let mut last_line = 1;

    for (n, line) in lines {
        last_line = n;
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match keyword {
            "agent" => {
                let mut tokens = rest.split_whitespace();
                let id = ident(n, tokens.next().ok_or_else(|| syntax(n, "missing agent id"))?)?;
                let mut side = None;
                let mut addable = false;
                for t in tokens {
                    match t {
                        "side=a" => side = Some(Side::A),
                        "side=b" => side = Some(Side::B),
                        "addable" => addable = true,
                        other => return Err(syntax(n, format!("unknown agent option `{other}`"))),
                    }
                }
                match (kind, side) {
                    (Kind::Marriage, None) => {
                        return Err(syntax(n, format!("agent `{id}` needs side=a or side=b")))
                    }
                    (Kind::Roommates, Some(_)) => {
                        return Err(syntax(n, "side= is only allowed in `problem: sm`"))
                    }
                    _ => {}
                }
                inst.add_agent(id, side, addable)
                    .map_err(|e| syntax(n, e.to_string()))?;
            }
            "pref" => {
                let (owner, list) = rest
                    .split_once(':')
                    .ok_or_else(|| syntax(n, "expected `pref <id>: ...`"))?;
                let owner = ident(n, owner.trim())?;
                let list = list.trim();
                let entries = if list.is_empty() {
                    Vec::new()
                } else {
                    list.split('>')
                        .map(|t| ident(n, t.trim()).map(|id| (id, n)))
                        .collect::<Result<Vec<_>>>()?
                };
                if prefs.insert(owner.clone(), (n, entries)).is_some() {
                    return Err(syntax(n, format!("second pref line for `{owner}`")));
                }
            }
            other => return Err(syntax(n, format!("unknown keyword `{other}`"))),
        }
    }

    for (owner, (n, entries)) in &prefs {
        if !inst.contains(owner) {
            return Err(syntax(*n, format!("pref line for undeclared agent `{owner}`")));
        }
        if let Some((y, ln)) = entries.iter().find(|(y, _)| !inst.contains(y)) {
            return Err(syntax(*ln, format!("`{owner}` lists undeclared agent `{y}`")));
        }
    }
    let declared: Vec<AgentId> = inst.agents().cloned().collect();
    for id in declared {
        let Some((_, entries)) = prefs.remove(&id) else {
            return Err(syntax(last_line, format!("no pref line for agent `{id}`")));
        };
        inst.set_prefs(&id, entries.into_iter().map(|(y, _)| y).collect())?;
    }
    Ok(inst)
}

/// Deterministic rendering: header, agent lines, then pref lines, each in
/// id order.
pub fn serialize_instance(inst: &RoommatesInstance) -> String {
    let mut out = String::new();
    out.push_str(match inst.kind() {
        Kind::Roommates => "problem: sr\n",
        Kind::Marriage => "problem: sm\n",
    });
    for id in inst.agents() {
        out.push_str("agent ");
        out.push_str(id.as_str());
        if let Some(side) = inst.side(id) {
            let _ = write!(out, " side={side}");
        }
        if inst.is_addable(id) {
            out.push_str(" addable");
        }
        out.push('\n');
    }
    for id in inst.agents() {
        let list: Vec<&str> = inst.prefs(id).unwrap_or(&[]).iter().map(|y| y.as_str()).collect();
        if list.is_empty() {
            let _ = writeln!(out, "pref {id}:");
        } else {
            let _ = writeln!(out, "pref {id}: {}", list.join(" > "));
        }
    }
    out
}

pub fn parse_matching(text: &str) -> Result<Matching> {
    let mut pairs = Vec::new();
    for (n, line) in content_lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["match", x, y] => {
                let p = Pair::new(ident(n, x)?, ident(n, y)?).map_err(|e| syntax(n, e.to_string()))?;
                pairs.push(p);
            }
            _ => return Err(syntax(n, "expected `match <id> <id>`")),
        }
    }
    Matching::new(pairs)
}

pub fn serialize_matching(m: &Matching) -> String {
    let mut out = String::new();
    for p in m.pairs() {
        let _ = writeln!(out, "match {} {}", p.first(), p.second());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::agent;

    #[test]
    fn minimal_mutual_pair() {
        let i = parse_instance("problem: sr\nagent a\nagent b\npref a: b\npref b: a\n").unwrap();
        assert_eq!(i.len(), 2);
        assert_eq!(i.acceptable_pairs(), vec![Pair::of("a", "b")]);
    }

    #[test]
    fn asymmetric_text_is_rejected() {
        let err = parse_instance("problem: sr\nagent a\nagent b\npref a: b\npref b:\n").unwrap_err();
        match err {
            Error::InvalidInstance(v) => assert!(v[0].contains("symmetry")),
            other => panic!("unexpected {other:?}"),
        }
        // syntax alone is fine
        assert!(parse_instance_unchecked("problem: sr\nagent a\nagent b\npref a: b\npref b:\n").is_ok());
    }

    #[test]
    fn comments_blank_lines_and_marriage_sides() {
        let text = "# a marriage\n\nproblem: sm\nagent m side=a\nagent w side=b addable  # pool\n\
                    pref m: w\npref w: m\n";
        let i = parse_instance(text).unwrap();
        assert_eq!(i.kind(), Kind::Marriage);
        assert_eq!(i.side(&agent("m")), Some(Side::A));
        assert!(i.is_addable(&agent("w")));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let cases = [
            ("agent a\n", 1),
            ("problem: sr\nagent a\nfoo\n", 3),
            ("problem: sr\nagent a\npref a: b\n", 3),
            ("problem: sr\nagent a\nagent a\npref a:\n", 3),
            ("problem: sm\nagent a\n", 2),
            ("problem: sr\nagent a side=a\n", 2),
            ("problem: sr\nagent a\npref a:\npref a:\n", 4),
            ("problem: sr\nagent a\nagent b\npref a:\n", 4),
        ];
        for (text, line) in cases {
            match parse_instance_unchecked(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn empty_instance_serializes_to_header() {
        let i = RoommatesInstance::new(Kind::Roommates);
        assert_eq!(serialize_instance(&i), "problem: sr\n");
        assert_eq!(parse_instance("problem: sr\n").unwrap(), i);
    }

    #[test]
    fn mutual_pair_serializes_in_id_order() {
        let i = RoommatesInstance::roommates(&[("b", &["a"]), ("a", &["b"])]).unwrap();
        assert_eq!(
            serialize_instance(&i),
            "problem: sr\nagent a\nagent b\npref a: b\npref b: a\n"
        );
    }

    #[test]
    fn matching_text() {
        let m = parse_matching("match b a\n# x\nmatch c d\n").unwrap();
        assert_eq!(m, Matching::of(&[("a", "b"), ("c", "d")]));
        assert_eq!(serialize_matching(&m), "match a b\nmatch c d\n");
        assert!(parse_matching("match a b\nmatch b c\n").is_err());
        assert!(matches!(parse_matching("pair a b\n"), Err(Error::Parse { line: 1, .. })));
    }
}
