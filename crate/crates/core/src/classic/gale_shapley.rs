use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::instance::{Kind, Matching, RoommatesInstance, Side};

/// Deferred acceptance with `proposing` as the proposing side.
///
/// Returns the proposer-optimal stable matching. Proposers are processed in
/// id order.
pub fn gale_shapley(inst: &RoommatesInstance, proposing: Side) -> Result<Matching> {
    if inst.kind() != Kind::Marriage {
        return Err(Error::InvalidInput("Gale-Shapley needs a marriage instance".into()));
    }
    inst.ensure_valid()?;
    let ix = inst.index();
    let n = ix.len();
    let mut next = vec![0usize; n];
    let mut held: Vec<Option<usize>> = vec![None; n];
    let mut free: VecDeque<usize> = (0..n).filter(|&x| ix.side[x] == Some(proposing)).collect();

    while let Some(x) = free.pop_front() {
        let Some(&y) = ix.lists[x].get(next[x]) else {
            continue;
        };
        next[x] += 1;
        match held[y] {
            None => held[y] = Some(x),
            Some(z) if ix.prefers(y, x, Some(z)) => {
                held[y] = Some(x);
                free.push_back(z);
            }
            Some(_) => free.push_back(x),
        }
    }

    let mut partner = vec![None; n];
    for (y, x) in held.iter().enumerate() {
        if let Some(x) = *x {
            partner[x] = Some(y);
            partner[y] = Some(x);
        }
    }
    Ok(ix.matching_from_partners(&partner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::{enumerate_stable_matchings, is_stable};

    #[test]
    fn empty_marriage() {
        let i = RoommatesInstance::marriage(&[], &[]).unwrap();
        assert!(gale_shapley(&i, Side::A).unwrap().is_empty());
    }

    #[test]
    fn mutual_first_choices_are_kept() {
        let i = RoommatesInstance::marriage(
            &[("m1", &["w1", "w2"]), ("m2", &["w2", "w1"])],
            &[("w1", &["m1", "m2"]), ("w2", &["m2", "m1"])],
        )
        .unwrap();
        let expect = Matching::of(&[("m1", "w1"), ("m2", "w2")]);
        assert_eq!(gale_shapley(&i, Side::A).unwrap(), expect);
        assert_eq!(gale_shapley(&i, Side::B).unwrap(), expect);
    }

    #[test]
    fn two_by_two_matches_brute_force() {
        let i = RoommatesInstance::marriage(
            &[("m1", &["w1", "w2"]), ("m2", &["w1", "w2"])],
            &[("w1", &["m2", "m1"]), ("w2", &["m2", "m1"])],
        )
        .unwrap();
        let all = enumerate_stable_matchings(&i, 24).unwrap();
        assert_eq!(all.len(), 1);
        let gs = gale_shapley(&i, Side::A).unwrap();
        assert_eq!(gs, all[0]);
        assert!(is_stable(&i, &gs).unwrap());
    }

    #[test]
    fn roommates_input_is_rejected() {
        let i = RoommatesInstance::roommates(&[("a", &["b"]), ("b", &["a"])]).unwrap();
        assert!(gale_shapley(&i, Side::A).is_err());
    }
}
