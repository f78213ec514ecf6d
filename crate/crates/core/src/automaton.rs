//! Deterministic automata with a partial transition function, and the basic
//! reach operators over them.

use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::events::{Alphabet, EventId, EventSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A string of events.
pub type Word = Vec<EventId>;

/// A set of states kept sorted and deduplicated, so it can key maps.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateSet(Vec<StateId>);

impl StateSet {
    pub fn new() -> Self {
        StateSet(Vec::new())
    }

    pub fn singleton(s: StateId) -> Self {
        StateSet(vec![s])
    }

    pub fn from_vec(mut v: Vec<StateId>) -> Self {
        v.sort_unstable();
        v.dedup();
        StateSet(v)
    }

    pub fn as_slice(&self) -> &[StateId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.0.binary_search(&s).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.0.iter().all(|&s| other.contains(s))
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        StateSet::from_vec(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        self.0.iter().any(|&s| other.contains(s))
    }
}

impl FromIterator<StateId> for StateSet {
    fn from_iter<I: IntoIterator<Item = StateId>>(iter: I) -> Self {
        StateSet::from_vec(iter.into_iter().collect())
    }
}

/// Deterministic finite automaton with a partial transition function.
///
/// An automaton with no states is the distinguished empty automaton; its
/// generated language is empty (not even the empty string).
#[derive(Clone, Debug)]
pub struct Automaton {
    alphabet: Arc<Alphabet>,
    names: Vec<String>,
    /// Outgoing transitions per state, sorted by event.
    edges: Vec<Vec<(EventId, StateId)>>,
    initial: Option<StateId>,
    crit: Vec<bool>,
}

impl Automaton {
    pub fn empty(alphabet: impl Into<Arc<Alphabet>>) -> Self {
        Automaton { alphabet: alphabet.into(), names: Vec::new(), edges: Vec::new(), initial: None, crit: Vec::new() }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn shared_alphabet(&self) -> Arc<Alphabet> {
        self.alphabet.clone()
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.initial.is_none()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.names.len() as u32).map(StateId)
    }

    pub fn initial(&self) -> Option<StateId> {
        self.initial
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.names[s.index()]
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name).map(|i| StateId(i as u32))
    }

    pub fn check_state(&self, s: StateId) -> Result<()> {
        if s.index() < self.names.len() {
            Ok(())
        } else {
            Err(Error::UnknownState(s.0))
        }
    }

    #[inline]
    pub fn edges(&self, s: StateId) -> &[(EventId, StateId)] {
        &self.edges[s.index()]
    }

    #[inline]
    pub fn delta(&self, s: StateId, e: EventId) -> Option<StateId> {
        let edges = &self.edges[s.index()];
        edges.binary_search_by_key(&e, |&(ev, _)| ev).ok().map(|i| edges[i].1)
    }

    /// Extended transition function.
    pub fn run(&self, from: StateId, word: &[EventId]) -> Option<StateId> {
        word.iter().try_fold(from, |s, &e| self.delta(s, e))
    }

    /// Membership in the generated (prefix-closed) language.
    pub fn accepts(&self, word: &[EventId]) -> bool {
        self.initial.and_then(|x0| self.run(x0, word)).is_some()
    }

    /// Active events of a single state.
    pub fn active(&self, s: StateId) -> EventSet {
        self.edges[s.index()].iter().map(|&(e, _)| e).collect()
    }

    pub fn is_crit(&self, s: StateId) -> bool {
        self.crit[s.index()]
    }

    pub fn crit_states(&self) -> StateSet {
        self.states().filter(|&s| self.is_crit(s)).collect()
    }

    pub fn transition_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, EventId, StateId)> + '_ {
        self.states().flat_map(move |s| self.edges(s).iter().map(move |&(e, t)| (s, e, t)))
    }

    /// Same automaton with a different critical set.
    pub fn with_crit(mut self, crit: &StateSet) -> Self {
        for (i, c) in self.crit.iter_mut().enumerate() {
            *c = crit.contains(StateId(i as u32));
        }
        self
    }

    /// Keeps the states for which `keep` holds and that remain reachable from
    /// the initial state through kept states. Returns the new automaton and
    /// the old-to-new state map.
    pub fn restrict(&self, keep: impl Fn(StateId) -> bool) -> (Automaton, Vec<Option<StateId>>) {
        let mut map = vec![None; self.state_count()];
        let mut order = Vec::new();
        if let Some(x0) = self.initial.filter(|&x0| keep(x0)) {
            let mut queue = VecDeque::from([x0]);
            map[x0.index()] = Some(StateId(0));
            order.push(x0);
            while let Some(s) = queue.pop_front() {
                for &(_, t) in self.edges(s) {
                    if map[t.index()].is_none() && keep(t) {
                        map[t.index()] = Some(StateId(order.len() as u32));
                        order.push(t);
                        queue.push_back(t);
                    }
                }
            }
        }
        let edges = order
            .iter()
            .map(|&s| self.edges(s).iter().filter_map(|&(e, t)| map[t.index()].map(|t2| (e, t2))).collect())
            .collect();
        let out = Automaton {
            alphabet: self.alphabet.clone(),
            names: order.iter().map(|&s| self.names[s.index()].clone()).collect(),
            edges,
            initial: if order.is_empty() { None } else { Some(StateId(0)) },
            crit: order.iter().map(|&s| self.crit[s.index()]).collect(),
        };
        (out, map)
    }

    /// Accessible part.
    pub fn accessible(&self) -> Automaton {
        self.restrict(|_| true).0
    }

    /// Renames states `0, 1, ..` in their current order.
    pub fn renumbered(mut self) -> Self {
        for (i, n) in self.names.iter_mut().enumerate() {
            *n = i.to_string();
        }
        self
    }

    /// Replaces the alphabet by an equal-or-larger one in which every event
    /// of the current alphabet keeps its id.
    pub fn with_alphabet(mut self, alphabet: impl Into<Arc<Alphabet>>) -> Result<Self> {
        let alphabet = alphabet.into();
        for e in self.alphabet.ids() {
            if alphabet.id(self.alphabet.name(e)) != Some(e) {
                return Err(Error::AlphabetMismatch(self.alphabet.name(e).into()));
            }
        }
        self.alphabet = alphabet;
        Ok(self)
    }
}

/// Incremental construction of an [`Automaton`]; determinism is checked in
/// [`AutomatonBuilder::build`].
#[derive(Debug)]
pub struct AutomatonBuilder {
    alphabet: Arc<Alphabet>,
    names: Vec<String>,
    edges: Vec<Vec<(EventId, StateId)>>,
    initial: Option<StateId>,
    crit: Vec<bool>,
}

impl AutomatonBuilder {
    pub fn new(alphabet: impl Into<Arc<Alphabet>>) -> Self {
        AutomatonBuilder {
            alphabet: alphabet.into(),
            names: Vec::new(),
            edges: Vec::new(),
            initial: None,
            crit: Vec::new(),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        let id = StateId(self.names.len() as u32);
        self.names.push(name.into());
        self.edges.push(Vec::new());
        self.crit.push(false);
        id
    }

    /// Adds `count` states named `0..count`.
    pub fn with_states(mut self, count: usize) -> Self {
        for i in 0..count {
            self.add_state(i.to_string());
        }
        self
    }

    pub fn set_initial(&mut self, s: StateId) {
        self.initial = Some(s);
    }

    pub fn mark_crit(&mut self, s: StateId) {
        self.crit[s.index()] = true;
    }

    pub fn add_transition(&mut self, src: StateId, e: EventId, dst: StateId) -> Result<()> {
        if e.index() >= self.alphabet.len() {
            return Err(Error::UnknownEventId(e.0));
        }
        for s in [src, dst] {
            if s.index() >= self.names.len() {
                return Err(Error::UnknownState(s.0));
            }
        }
        self.edges[src.index()].push((e, dst));
        Ok(())
    }

    /// Convenience for hand-written fixtures: states by index, events by name.
    pub fn edge(mut self, src: u32, event: &str, dst: u32) -> Result<Self> {
        let e = self.alphabet.lookup(event)?;
        self.add_transition(StateId(src), e, StateId(dst))?;
        Ok(self)
    }

    pub fn build(mut self) -> Result<Automaton> {
        if !self.names.is_empty() && self.initial.is_none() {
            return Err(Error::Invalid("automaton has states but no initial state".into()));
        }
        for (s, edges) in self.edges.iter_mut().enumerate() {
            edges.sort_unstable();
            for w in edges.windows(2) {
                if w[0].0 == w[1].0 {
                    let state = self.names[s].clone();
                    let event = self.alphabet.name(w[0].0).into();
                    return Err(if w[0].1 == w[1].1 {
                        Error::DuplicateTransition { state, event }
                    } else {
                        Error::Nondeterministic {
                            state,
                            event,
                            first: self.names[w[0].1.index()].clone(),
                            second: self.names[w[1].1.index()].clone(),
                        }
                    });
                }
            }
        }
        Ok(Automaton {
            alphabet: self.alphabet,
            names: self.names,
            edges: self.edges,
            initial: self.initial,
            crit: self.crit,
        })
    }
}

/// Events active at some state of `q`.
pub fn active_events(aut: &Automaton, q: &[StateId]) -> Result<EventSet> {
    let mut out = EventSet::new();
    for &s in q {
        aut.check_state(s)?;
        for &(e, _) in aut.edges(s) {
            out.insert(e);
        }
    }
    Ok(out)
}

/// States reachable from `q` through unobservable events that `enabled`
/// allows.
pub fn unobservable_reach(aut: &Automaton, q: &[StateId], enabled: &EventSet) -> Result<StateSet> {
    for &s in q {
        aut.check_state(s)?;
    }
    let alphabet = aut.alphabet();
    let moves = enabled.difference(&alphabet.observable());
    Ok(closure(aut, q.iter().copied(), &moves))
}

/// Closure of `start` under the events in `moves`.
pub(crate) fn closure(aut: &Automaton, start: impl IntoIterator<Item = StateId>, moves: &EventSet) -> StateSet {
    let mut seen = vec![false; aut.state_count()];
    let mut stack: Vec<StateId> = Vec::new();
    for s in start {
        if !seen[s.index()] {
            seen[s.index()] = true;
            stack.push(s);
        }
    }
    let mut out = stack.clone();
    while let Some(s) = stack.pop() {
        for &(e, t) in aut.edges(s) {
            if moves.contains(e) && !seen[t.index()] {
                seen[t.index()] = true;
                stack.push(t);
                out.push(t);
            }
        }
    }
    StateSet::from_vec(out)
}

/// One-step image of `q` under the observable event `e`.
pub fn observable_reach(aut: &Automaton, q: &[StateId], e: EventId) -> Result<StateSet> {
    let info = aut.alphabet().info(e)?;
    if !info.observable {
        return Err(Error::NotObservable(info.name.clone()));
    }
    let mut out = Vec::with_capacity(q.len());
    for &s in q {
        aut.check_state(s)?;
        if let Some(t) = aut.delta(s, e) {
            out.push(t);
        }
    }
    Ok(StateSet::from_vec(out))
}

/// Deletes `kill` and returns the accessible part of what remains; the
/// empty automaton if the initial state is deleted.
pub fn trim_states(aut: &Automaton, kill: &StateSet) -> Automaton {
    aut.restrict(|s| !kill.contains(s)).0
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// T1: a controllable observable, u uncontrollable unobservable;
    /// 0 -u-> 1, 0 -a-> 2, 1 -a-> 2.
    pub(crate) fn t1() -> Automaton {
        let mut al = Alphabet::new();
        al.add_event("a", true, true).unwrap();
        al.add_event("u", false, false).unwrap();
        let mut b = AutomatonBuilder::new(al).with_states(3);
        b.set_initial(StateId(0));
        b.edge(0, "u", 1).unwrap().edge(0, "a", 2).unwrap().edge(1, "a", 2).unwrap().build().unwrap()
    }

    fn ids(v: &[u32]) -> Vec<StateId> {
        v.iter().map(|&i| StateId(i)).collect()
    }

    fn set(v: &[u32]) -> StateSet {
        StateSet::from_vec(ids(v))
    }

    fn ev(aut: &Automaton, names: &[&str]) -> EventSet {
        names.iter().map(|n| aut.alphabet().lookup(n).unwrap()).collect()
    }

    #[test]
    fn active_events_examples() {
        let t = t1();
        assert_eq!(active_events(&t, &ids(&[0])).unwrap(), ev(&t, &["a", "u"]));
        assert_eq!(active_events(&t, &[]).unwrap(), EventSet::new());
        assert_eq!(active_events(&t, &ids(&[0, 1])).unwrap(), ev(&t, &["a", "u"]));
        assert_eq!(active_events(&t, &ids(&[7])), Err(Error::UnknownState(7)));
    }

    #[test]
    fn unobservable_reach_examples() {
        let t = t1();
        assert_eq!(unobservable_reach(&t, &ids(&[0]), &ev(&t, &["u"])).unwrap(), set(&[0, 1]));
        assert_eq!(unobservable_reach(&t, &ids(&[2]), &ev(&t, &["a", "u"])).unwrap(), set(&[2]));
        assert_eq!(unobservable_reach(&t, &ids(&[0]), &ev(&t, &["a"])).unwrap(), set(&[0]));
    }

    #[test]
    fn observable_reach_examples() {
        let t = t1();
        let a = t.alphabet().lookup("a").unwrap();
        let u = t.alphabet().lookup("u").unwrap();
        assert_eq!(observable_reach(&t, &ids(&[0, 1]), a).unwrap(), set(&[2]));
        assert_eq!(observable_reach(&t, &ids(&[2]), a).unwrap(), set(&[]));
        assert_eq!(observable_reach(&t, &ids(&[0]), a).unwrap(), set(&[2]));
        assert!(matches!(observable_reach(&t, &ids(&[0]), u), Err(Error::NotObservable(_))));
    }

    #[test]
    fn trim_examples() {
        let t = t1();
        let same = trim_states(&t, &set(&[]));
        assert_eq!(same.state_count(), 3);
        assert_eq!(same.transition_count(), 3);
        assert!(trim_states(&t, &set(&[0])).is_empty());
        let cut = trim_states(&t, &set(&[1]));
        assert_eq!(cut.state_count(), 2);
        let a = t.alphabet().lookup("a").unwrap();
        assert_eq!(cut.transitions().collect::<Vec<_>>(), vec![(StateId(0), a, StateId(1))]);
        assert_eq!(cut.state_name(StateId(1)), "2");
    }

    #[test]
    fn builder_rejects_nondeterminism() {
        let t = t1();
        let b = AutomatonBuilder::new(t.shared_alphabet()).with_states(3);
        let mut b = b.edge(0, "a", 1).unwrap().edge(0, "a", 2).unwrap();
        b.set_initial(StateId(0));
        assert!(matches!(b.build(), Err(Error::Nondeterministic { .. })));
        let mut b = AutomatonBuilder::new(t.shared_alphabet()).with_states(2);
        b.set_initial(StateId(0));
        let b = b.edge(0, "a", 1).unwrap().edge(0, "a", 1).unwrap();
        assert!(matches!(b.build(), Err(Error::DuplicateTransition { .. })));
    }
}
