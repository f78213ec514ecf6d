//! Parallel composition and the observer (subset construction).

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::automaton::{closure, Automaton, AutomatonBuilder, StateId, StateSet};
use crate::error::{Error, Result};
use crate::events::{Alphabet, EventId, EventInfo, EventKind, EventMap, EventSet};

/// Union of two alphabets, `a`'s events first. Shared names must agree on
/// their flags.
pub fn merge_alphabets(a: &Alphabet, b: &Alphabet) -> Result<Alphabet> {
    let mut out = a.clone();
    for e in b.ids() {
        let info = b.info(e)?;
        match a.id(&info.name) {
            Some(x) => {
                let ai = a.info(x)?;
                if ai.controllable != info.controllable || ai.observable != info.observable {
                    return Err(Error::AlphabetMismatch(format!(
                        "event `{}` has different flags in the two alphabets",
                        info.name
                    )));
                }
            }
            None => {
                out.push(EventInfo { kind: EventKind::Legit, ..info.clone() })?;
            }
        }
    }
    // Second pass: decorations whose base only lives in `b`.
    for e in b.ids() {
        let kind = match b.kind(e) {
            EventKind::Inserted(x) => EventKind::Inserted(out.lookup(b.name(*x))?),
            EventKind::Deleted(x) => EventKind::Deleted(out.lookup(b.name(*x))?),
            _ => continue,
        };
        let id = out.lookup(b.name(e))?;
        if a.id(b.name(e)).is_none() {
            out.set_kind(id, kind);
        }
    }
    for e in b.compromised().iter() {
        let id = out.lookup(b.name(e))?;
        out.mark_compromised_unchecked(id);
    }
    Ok(out)
}

impl Alphabet {
    pub(crate) fn set_kind(&mut self, e: EventId, kind: EventKind) {
        self.info_mut(e).kind = kind;
    }

    /// Sub-alphabet with the events of `keep`, in order. Decorations whose
    /// base is dropped become legitimate events.
    pub fn subset(&self, keep: &EventSet) -> Alphabet {
        let mut out = Alphabet::new();
        for e in keep.iter() {
            let mut info = self.info(e).expect("event of this alphabet").clone();
            info.kind = match info.kind {
                EventKind::Inserted(b) if keep.contains(b) => EventKind::Inserted(b),
                EventKind::Deleted(b) if keep.contains(b) => EventKind::Deleted(b),
                EventKind::Inserted(_) | EventKind::Deleted(_) => EventKind::Legit,
                k => k,
            };
            out.push(info).expect("names are unique");
        }
        // Fix up base ids now that every kept event has its new id.
        for e in out.ids().collect::<Vec<_>>() {
            let kind = match out.kind(e).clone() {
                EventKind::Inserted(b) => EventKind::Inserted(out.lookup(self.name(b)).unwrap()),
                EventKind::Deleted(b) => EventKind::Deleted(out.lookup(self.name(b)).unwrap()),
                _ => continue,
            };
            out.set_kind(e, kind);
        }
        for e in self.compromised().iter() {
            if let Some(id) = out.id(self.name(e)) {
                out.mark_compromised_unchecked(id);
            }
        }
        out
    }
}

/// Result of a parallel composition; `pairs[s]` are the component states of
/// product state `s`.
#[derive(Clone, Debug)]
pub struct Product {
    pub automaton: Automaton,
    pub pairs: Vec<(StateId, StateId)>,
}

/// Parallel composition: shared events synchronize, private events
/// interleave. Only the accessible part is built. A product state is
/// critical when either component is.
pub fn compose_parallel(a: &Automaton, b: &Automaton) -> Result<Product> {
    let alphabet = Arc::new(merge_alphabets(a.alphabet(), b.alphabet())?);
    let a_to = EventMap::between(a.alphabet(), &alphabet);
    let b_from = EventMap::between(&alphabet, b.alphabet());
    let a_from = EventMap::between(&alphabet, a.alphabet());
    let mut builder = AutomatonBuilder::new(alphabet.clone());
    let mut pairs = Vec::new();
    let (Some(a0), Some(b0)) = (a.initial(), b.initial()) else {
        return Ok(Product { automaton: Automaton::empty(alphabet), pairs });
    };
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut intern =
        |x: StateId, y: StateId, builder: &mut AutomatonBuilder, queue: &mut VecDeque<_>, pairs: &mut Vec<_>| {
            *index.entry((x, y)).or_insert_with(|| {
                let id = builder.add_state(format!("({},{})", a.state_name(x), b.state_name(y)));
                if a.is_crit(x) || b.is_crit(y) {
                    builder.mark_crit(id);
                }
                pairs.push((x, y));
                queue.push_back(id);
                id
            })
        };
    let s0 = intern(a0, b0, &mut builder, &mut queue, &mut pairs);
    builder.set_initial(s0);
    while let Some(s) = queue.pop_front() {
        let (x, y) = pairs[s.index()];
        let mut moves: Vec<(EventId, StateId, StateId)> = Vec::new();
        for &(ea, xa) in a.edges(x) {
            let e = a_to.get(ea).expect("merged alphabet contains a");
            match b_from.get(e) {
                Some(eb) => {
                    if let Some(yb) = b.delta(y, eb) {
                        moves.push((e, xa, yb));
                    }
                }
                None => moves.push((e, xa, y)),
            }
        }
        for &(eb, yb) in b.edges(y) {
            let e = alphabet.lookup(b.alphabet().name(eb))?;
            if a_from.get(e).is_none() {
                moves.push((e, x, yb));
            }
        }
        for (e, x2, y2) in moves {
            let t = intern(x2, y2, &mut builder, &mut queue, &mut pairs);
            builder.add_transition(s, e, t)?;
        }
    }
    Ok(Product { automaton: builder.build()?, pairs })
}

/// Subset-construction observer; `subsets[s]` is the estimate carried by
/// observer state `s`.
#[derive(Clone, Debug)]
pub struct Observer {
    pub automaton: Automaton,
    pub subsets: Vec<StateSet>,
}

/// Observer of `aut` with respect to the unobservable events `unobs`. The
/// result is over the remaining events; its states are `unobs`-closed state
/// sets and its initial state is the closure of the initial state.
pub fn observer(aut: &Automaton, unobs: &EventSet) -> Result<Observer> {
    let all = aut.alphabet().all();
    if !unobs.is_subset(&all) {
        return Err(Error::AlphabetMismatch("unobservable set is not part of the alphabet".into()));
    }
    let visible = all.difference(unobs);
    let alphabet = Arc::new(aut.alphabet().subset(&visible));
    let to_sub = EventMap::between(aut.alphabet(), &alphabet);
    let mut builder = AutomatonBuilder::new(alphabet.clone());
    let mut subsets: Vec<StateSet> = Vec::new();
    let Some(x0) = aut.initial() else {
        return Ok(Observer { automaton: Automaton::empty(alphabet), subsets });
    };
    let mut index: HashMap<StateSet, StateId> = HashMap::new();
    let mut queue = VecDeque::new();
    let name = |set: &StateSet| -> String {
        let names: Vec<&str> = set.iter().map(|s| aut.state_name(s)).collect();
        format!("{{{}}}", names.join(","))
    };
    let init = closure(aut, [x0], unobs);
    let id0 = builder.add_state(name(&init));
    if init.iter().any(|s| aut.is_crit(s)) {
        builder.mark_crit(id0);
    }
    builder.set_initial(id0);
    index.insert(init.clone(), id0);
    subsets.push(init);
    queue.push_back(id0);
    while let Some(s) = queue.pop_front() {
        let mut succ: alloc::collections::BTreeMap<EventId, Vec<StateId>> = Default::default();
        for x in subsets[s.index()].iter() {
            for &(e, t) in aut.edges(x) {
                if visible.contains(e) {
                    succ.entry(e).or_default().push(t);
                }
            }
        }
        for (e, targets) in succ {
            let next = closure(aut, targets, unobs);
            let t = match index.get(&next) {
                Some(&t) => t,
                None => {
                    let t = builder.add_state(name(&next));
                    if next.iter().any(|x| aut.is_crit(x)) {
                        builder.mark_crit(t);
                    }
                    index.insert(next.clone(), t);
                    subsets.push(next);
                    queue.push_back(t);
                    t
                }
            };
            builder.add_transition(s, to_sub.get(e).expect("visible event"), t)?;
        }
    }
    Ok(Observer { automaton: builder.build()?, subsets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::tests::t1;
    use crate::language::{isomorphic, language_equal};

    fn single_state_loops(al: Arc<Alphabet>) -> Automaton {
        let mut b = AutomatonBuilder::new(al.clone()).with_states(1);
        b.set_initial(StateId(0));
        for e in al.ids() {
            b.add_transition(StateId(0), e, StateId(0)).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn neutral_element() {
        let t = t1();
        let one = single_state_loops(t.shared_alphabet());
        let p = compose_parallel(&t, &one).unwrap();
        assert!(isomorphic(&p.automaton, &t));
    }

    #[test]
    fn idempotent_on_deterministic() {
        let t = t1();
        let p = compose_parallel(&t, &t).unwrap();
        assert!(isomorphic(&p.automaton, &t));
        assert_eq!(p.pairs, vec![(StateId(0), StateId(0)), (StateId(2), StateId(2)), (StateId(1), StateId(1))]);
    }

    #[test]
    fn private_events_interleave() {
        let mut x = Alphabet::new();
        x.add_event("x", true, true).unwrap();
        let mut y = Alphabet::new();
        y.add_event("y", true, true).unwrap();
        let mut bx = AutomatonBuilder::new(x).with_states(2);
        bx.set_initial(StateId(0));
        let ax = bx.edge(0, "x", 1).unwrap().build().unwrap();
        let mut by = AutomatonBuilder::new(y).with_states(2);
        by.set_initial(StateId(0));
        let ay = by.edge(0, "y", 1).unwrap().build().unwrap();
        let p = compose_parallel(&ax, &ay).unwrap();
        assert_eq!(p.automaton.state_count(), 4);
        assert_eq!(p.automaton.transition_count(), 4);
    }

    #[test]
    fn flag_mismatch_is_rejected() {
        let t = t1();
        let mut al = Alphabet::new();
        al.add_event("a", false, true).unwrap();
        let mut b = AutomatonBuilder::new(al).with_states(1);
        b.set_initial(StateId(0));
        let other = b.build().unwrap();
        assert!(matches!(compose_parallel(&t, &other), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn observer_examples() {
        let t = t1();
        let none = observer(&t, &EventSet::new()).unwrap();
        assert!(isomorphic(&none.automaton, &t.accessible()));

        let u: EventSet = [t.alphabet().lookup("u").unwrap()].into_iter().collect();
        let obs = observer(&t, &u).unwrap();
        assert_eq!(obs.subsets[0], StateSet::from_vec(vec![StateId(0), StateId(1)]));
        let a = obs.automaton.alphabet().lookup("a").unwrap();
        let next = obs.automaton.delta(StateId(0), a).unwrap();
        assert_eq!(obs.subsets[next.index()], StateSet::singleton(StateId(2)));
        assert_eq!(obs.automaton.alphabet().len(), 1);
        assert!(language_equal(&obs.automaton, &obs.automaton).unwrap().equal);
    }
}
