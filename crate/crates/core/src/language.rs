//! Comparison of generated languages.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::automaton::{Automaton, StateId, Word};
use crate::error::{Error, Result};
use crate::events::{EventId, EventMap};

type Pair = (StateId, StateId);

/// Outcome of [`language_equal`]. On inequality `witness` is a shortest
/// string (ties broken by event order) accepted by exactly one side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub equal: bool,
    pub witness: Option<Word>,
}

/// Shortest string of `L(a)` that is not in `L(b)`, if any. Events are
/// matched by name; both alphabets must declare the same events.
pub fn language_excess(a: &Automaton, b: &Automaton) -> Result<Option<Word>> {
    let diff = symmetric_walk(a, b, true)?;
    Ok(diff)
}

/// Whether `L(a) = L(b)`, with a witness when they differ.
pub fn language_equal(a: &Automaton, b: &Automaton) -> Result<Comparison> {
    let witness = symmetric_walk(a, b, false)?;
    Ok(Comparison { equal: witness.is_none(), witness })
}

/// `L(a) ⊆ L(b)`.
pub fn language_included(a: &Automaton, b: &Automaton) -> Result<bool> {
    Ok(language_excess(a, b)?.is_none())
}

fn symmetric_walk(a: &Automaton, b: &Automaton, one_sided: bool) -> Result<Option<Word>> {
    if !a.alphabet().same_events(b.alphabet()) {
        return Err(Error::AlphabetMismatch("language comparison needs identical alphabets".into()));
    }
    let to_b = EventMap::between(a.alphabet(), b.alphabet());
    let from_b = EventMap::between(b.alphabet(), a.alphabet());
    let (a0, b0) = match (a.initial(), b.initial()) {
        (None, None) => return Ok(None),
        (None, Some(_)) => return Ok(if one_sided { None } else { Some(Vec::new()) }),
        (Some(_), None) => return Ok(Some(Vec::new())),
        (Some(x), Some(y)) => (x, y),
    };
    // BFS over pairs with parent pointers; events explored in id order of `a`.
    let mut parent: HashMap<Pair, Option<(Pair, EventId)>> = HashMap::new();
    parent.insert((a0, b0), None);
    let mut queue = VecDeque::from([(a0, b0)]);
    while let Some((x, y)) = queue.pop_front() {
        let mut events: Vec<EventId> = a.edges(x).iter().map(|&(e, _)| e).collect();
        if !one_sided {
            events.extend(b.edges(y).iter().map(|&(e, _)| from_b.get(e).expect("same alphabets")));
            events.sort_unstable();
            events.dedup();
        }
        for e in events {
            let nx = a.delta(x, e);
            let ny = b.delta(y, to_b.get(e).expect("same alphabets"));
            match (nx, ny) {
                (Some(x2), Some(y2)) => {
                    if !parent.contains_key(&(x2, y2)) {
                        parent.insert((x2, y2), Some(((x, y), e)));
                        queue.push_back((x2, y2));
                    }
                }
                (None, None) => {}
                _ => {
                    let mut word = vec![e];
                    let mut cur = (x, y);
                    while let Some(Some((prev, ev))) = parent.get(&cur) {
                        word.push(*ev);
                        cur = *prev;
                    }
                    word.reverse();
                    return Ok(Some(word));
                }
            }
        }
    }
    Ok(None)
}

/// Structural isomorphism of the accessible parts, matching events by name
/// and ignoring state names.
pub fn isomorphic(a: &Automaton, b: &Automaton) -> bool {
    if !a.alphabet().same_events(b.alphabet()) {
        return false;
    }
    let (a, b) = (a.accessible(), b.accessible());
    if a.state_count() != b.state_count() || a.transition_count() != b.transition_count() {
        return false;
    }
    let (Some(a0), Some(b0)) = (a.initial(), b.initial()) else {
        return a.is_empty() && b.is_empty();
    };
    let to_b = EventMap::between(a.alphabet(), b.alphabet());
    let mut fwd = vec![None; a.state_count()];
    let mut bwd = vec![None; b.state_count()];
    fwd[a0.index()] = Some(b0);
    bwd[b0.index()] = Some(a0);
    let mut queue = VecDeque::from([a0]);
    while let Some(x) = queue.pop_front() {
        let y = fwd[x.index()].expect("mapped");
        if a.edges(x).len() != b.edges(y).len() {
            return false;
        }
        for &(e, x2) in a.edges(x) {
            let Some(y2) = to_b.get(e).and_then(|eb| b.delta(y, eb)) else {
                return false;
            };
            match (fwd[x2.index()], bwd[y2.index()]) {
                (None, None) => {
                    fwd[x2.index()] = Some(y2);
                    bwd[y2.index()] = Some(x2);
                    queue.push_back(x2);
                }
                (Some(m), Some(n)) if m == y2 && n == x2 => {}
                _ => return false,
            }
        }
    }
    true
}
