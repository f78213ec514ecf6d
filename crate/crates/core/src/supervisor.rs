//! Control decisions and supervisor realizations.

use core::ops::Deref;

use crate::automaton::{Automaton, StateId};
use crate::error::{Error, Result};
use crate::events::{Alphabet, EventId, EventSet};

/// Set of enabled events; always contains every uncontrollable event.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ControlDecision(EventSet);

impl ControlDecision {
    pub fn new(alphabet: &Alphabet, enabled: EventSet) -> Result<Self> {
        if let Some(e) = alphabet.uncontrollable().difference(&enabled).iter().next() {
            return Err(Error::Inadmissible(alphabet.name(e).into()));
        }
        Ok(ControlDecision(enabled))
    }

    /// The decision that enables only uncontrollable events.
    pub fn minimal(alphabet: &Alphabet) -> Self {
        ControlDecision(alphabet.uncontrollable())
    }

    pub fn events(&self) -> &EventSet {
        &self.0
    }

    pub fn into_events(self) -> EventSet {
        self.0
    }
}

impl Deref for ControlDecision {
    type Target = EventSet;

    fn deref(&self) -> &EventSet {
        &self.0
    }
}

/// An automaton over the plant alphabet whose active events at a state are
/// the control decision issued there. Enabled unobservable events are
/// self-loops.
#[derive(Clone, Debug)]
pub struct SupervisorRealization {
    automaton: Automaton,
}

impl SupervisorRealization {
    /// Checks admissibility and the self-loop convention.
    pub fn new(automaton: Automaton) -> Result<Self> {
        let alphabet = automaton.alphabet();
        if automaton.is_empty() {
            return Err(Error::EmptyAutomaton);
        }
        if !alphabet.edits().is_empty() || !alphabet.decisions().is_empty() {
            return Err(Error::AlphabetMismatch("a supervisor is defined over plant events only".into()));
        }
        let uncontrollable = alphabet.uncontrollable();
        for x in automaton.states() {
            if let Some(e) = uncontrollable.difference(&automaton.active(x)).iter().next() {
                return Err(Error::Inadmissible(alphabet.name(e).into()));
            }
            for &(e, y) in automaton.edges(x) {
                if !alphabet.is_observable(e) && y != x {
                    return Err(Error::Invalid(alloc::format!(
                        "unobservable event `{}` must be a self-loop at state `{}`",
                        alphabet.name(e),
                        automaton.state_name(x)
                    )));
                }
            }
        }
        Ok(SupervisorRealization { automaton })
    }

    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    pub fn into_automaton(self) -> Automaton {
        self.automaton
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.automaton.alphabet()
    }

    pub fn initial(&self) -> StateId {
        self.automaton.initial().expect("realizations are nonempty")
    }

    /// Control decision issued at `x`.
    pub fn decision(&self, x: StateId) -> ControlDecision {
        ControlDecision(self.automaton.active(x))
    }

    /// Transition function made complete on observable events by ignoring
    /// undefined ones.
    pub fn delta_complete(&self, x: StateId, e: EventId) -> Result<StateId> {
        self.automaton.check_state(x)?;
        let info = self.alphabet().info(e)?;
        if !info.observable {
            return Err(Error::NotObservable(info.name.clone()));
        }
        Ok(self.automaton.delta(x, e).unwrap_or(x))
    }

    pub fn delta_complete_word(&self, x: StateId, word: &[EventId]) -> Result<StateId> {
        word.iter().try_fold(x, |s, &e| self.delta_complete(s, e))
    }

    /// Control decision after observing `s`.
    pub fn control_for(&self, s: &[EventId]) -> Result<ControlDecision> {
        let x = self.delta_complete_word(self.initial(), s)?;
        Ok(self.decision(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::AutomatonBuilder;

    fn ab_u() -> Alphabet {
        let mut al = Alphabet::new();
        al.add_event("a", true, true).unwrap();
        al.add_event("b", true, true).unwrap();
        al.add_event("u", false, false).unwrap();
        al
    }

    fn r() -> SupervisorRealization {
        let mut b = AutomatonBuilder::new(ab_u()).with_states(2);
        b.set_initial(StateId(0));
        let b = b.edge(0, "a", 1).unwrap().edge(0, "u", 0).unwrap().edge(1, "u", 1).unwrap();
        SupervisorRealization::new(b.build().unwrap()).unwrap()
    }

    #[test]
    fn delta_complete_examples() {
        let r = r();
        let a = r.alphabet().lookup("a").unwrap();
        let b = r.alphabet().lookup("b").unwrap();
        let u = r.alphabet().lookup("u").unwrap();
        assert_eq!(r.delta_complete(StateId(0), a).unwrap(), StateId(1));
        assert_eq!(r.delta_complete(StateId(0), b).unwrap(), StateId(0));
        assert!(matches!(r.delta_complete(StateId(0), u), Err(Error::NotObservable(_))));
        assert_eq!(r.delta_complete_word(StateId(0), &[b, a, a]).unwrap(), StateId(1));
    }

    #[test]
    fn control_for_examples() {
        let r = r();
        let a = r.alphabet().lookup("a").unwrap();
        assert_eq!(r.control_for(&[]).unwrap(), r.decision(StateId(0)));
        assert_eq!(r.control_for(&[a]).unwrap().events(), &r.alphabet().uncontrollable());
    }

    #[test]
    fn inadmissible_realization_is_rejected() {
        let mut b = AutomatonBuilder::new(ab_u()).with_states(1);
        b.set_initial(StateId(0));
        let b = b.edge(0, "a", 0).unwrap();
        assert!(matches!(SupervisorRealization::new(b.build().unwrap()), Err(Error::Inadmissible(_))));
        assert!(ControlDecision::new(&ab_u(), EventSet::new()).is_err());
    }

    #[test]
    fn unobservable_moves_must_loop() {
        let mut b = AutomatonBuilder::new(ab_u()).with_states(2);
        b.set_initial(StateId(0));
        let b = b.edge(0, "u", 1).unwrap().edge(1, "u", 1).unwrap();
        assert!(matches!(SupervisorRealization::new(b.build().unwrap()), Err(Error::Invalid(_))));
    }
}
