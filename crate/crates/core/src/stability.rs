//! Blocking pairs, stability, and exhaustive matching enumeration.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::instance::{AgentId, Indexed, Matching, Pair, RoommatesInstance, NONE};

/// Default bound on the number of acceptable pairs for exhaustive
/// enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// All acceptable pairs `{u,v}` not in `m` where each endpoint is unmatched
/// or prefers the other to its partner.
pub fn blocking_pairs(inst: &RoommatesInstance, m: &Matching) -> Result<BTreeSet<Pair>> {
    inst.check_matching(m)?;
    let ix = inst.index();
    let partner = ix.partners(m);
    Ok(blocking_indexed(&ix, &partner)
        .map(|(x, y)| ix.pair(x, y))
        .collect())
}

pub(crate) fn blocking_indexed<'a>(
    ix: &'a Indexed,
    partner: &'a [Option<usize>],
) -> impl Iterator<Item = (usize, usize)> + 'a {
    (0..ix.len()).flat_map(move |x| {
        ix.lists[x].iter().filter_map(move |&y| {
            (x < y
                && partner[x] != Some(y)
                && ix.rank[y][x] != NONE
                && ix.prefers(x, y, partner[x])
                && ix.prefers(y, x, partner[y]))
            .then_some((x, y))
        })
    })
}

pub(crate) fn is_stable_indexed(ix: &Indexed, partner: &[Option<usize>]) -> bool {
    blocking_indexed(ix, partner).next().is_none()
}

pub fn is_stable(inst: &RoommatesInstance, m: &Matching) -> Result<bool> {
    inst.check_matching(m)?;
    let ix = inst.index();
    Ok(is_stable_indexed(&ix, &ix.partners(m)))
}

/// True iff `m` covers every agent of `inst`.
pub fn is_perfect(inst: &RoommatesInstance, m: &Matching) -> bool {
    let covered = covered_agents(m);
    inst.agents().all(|x| covered.contains(x))
}

pub fn covered_agents(m: &Matching) -> BTreeSet<AgentId> {
    m.pairs()
        .iter()
        .flat_map(|p| [p.first().clone(), p.second().clone()])
        .collect()
}

/// Lazily yields every matching of the acceptability graph exactly once.
///
/// Pairs are taken in sorted order and each is first excluded, then
/// included, so the empty matching always comes first.
pub struct Matchings {
    ix: Indexed,
    pairs: Vec<(usize, usize)>,
    stack: Vec<Frame>,
}

struct Frame {
    next: usize,
    chosen: Vec<usize>,
    used: Vec<bool>,
}

impl Iterator for Matchings {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        let mut frame = self.stack.pop()?;
        loop {
            if frame.next == self.pairs.len() {
                let mut partner = vec![None; self.ix.len()];
                for &k in &frame.chosen {
                    let (x, y) = self.pairs[k];
                    partner[x] = Some(y);
                    partner[y] = Some(x);
                }
                return Some(self.ix.matching_from_partners(&partner));
            }
            let k = frame.next;
            let (x, y) = self.pairs[k];
            frame.next += 1;
            if !frame.used[x] && !frame.used[y] {
                let mut with = Frame {
                    next: frame.next,
                    chosen: frame.chosen.clone(),
                    used: frame.used.clone(),
                };
                with.chosen.push(k);
                with.used[x] = true;
                with.used[y] = true;
                self.stack.push(with);
            }
        }
    }
}

pub fn enumerate_matchings(inst: &RoommatesInstance, cap: usize) -> Result<Matchings> {
    let ix = inst.index();
    let mut pairs: Vec<(usize, usize)> = inst
        .acceptable_pairs()
        .iter()
        .map(|p| (ix.position(p.first()).unwrap(), ix.position(p.second()).unwrap()))
        .collect();
    // ids are sorted, so index order is id order
    pairs.sort();
    if pairs.len() > cap {
        return Err(Error::CapExceeded {
            what: "acceptability graph",
            count: pairs.len(),
            cap,
        });
    }
    let n = ix.len();
    Ok(Matchings {
        ix,
        pairs,
        stack: vec![Frame {
            next: 0,
            chosen: Vec::new(),
            used: vec![false; n],
        }],
    })
}

/// Every stable matching, in enumeration order.
pub fn enumerate_stable_matchings(inst: &RoommatesInstance, cap: usize) -> Result<Vec<Matching>> {
    let ix = inst.index();
    Ok(enumerate_matchings(inst, cap)?
        .filter(|m| is_stable_indexed(&ix, &ix.partners(m)))
        .collect())
}
