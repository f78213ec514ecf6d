//! Robustness checking, state estimates of the attacked closed loop, and
//! embedding of supervisors in a solution arena.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::arena::SupArena;
use crate::attack::{closed_loop, AttackModel, ClosedLoop};
use crate::automaton::{closure, Automaton, StateId, StateSet, Word};
use crate::error::{Error, Result};
use crate::events::{Alphabet, EventId};
use crate::supervisor::SupervisorRealization;

type Pair = (StateId, StateId);

/// A run of the attacked closed loop ending in a critical plant state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    /// Decorated events over the attacked alphabet of the plant.
    pub trace: Word,
    /// Its plant projection, over the plant alphabet.
    pub plant: Word,
    /// What the supervisor observed, over the plant alphabet.
    pub observed: Word,
    pub state: StateId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Robustness {
    Robust,
    Unsafe(Counterexample),
}

impl Robustness {
    pub fn is_robust(&self) -> bool {
        matches!(self, Robustness::Robust)
    }
}

/// Breadth-first search for a critical state of `G_a || R_a || A`; among
/// shortest traces the one with the smallest events first is reported.
pub fn verify_robust(g: &Automaton, r: &SupervisorRealization, a: &AttackModel) -> Result<Robustness> {
    let cl = closed_loop(g, r, a)?;
    let aut = &cl.automaton;
    let Some(x0) = aut.initial() else {
        return Ok(Robustness::Robust);
    };
    let mut parent: Vec<Option<(StateId, EventId)>> = vec![None; aut.state_count()];
    let mut seen = vec![false; aut.state_count()];
    seen[x0.index()] = true;
    let mut queue = VecDeque::from([x0]);
    while let Some(x) = queue.pop_front() {
        if g.is_crit(cl.plant_state(x)) {
            let mut trace = Vec::new();
            let mut cur = x;
            while let Some((p, e)) = parent[cur.index()] {
                trace.push(e);
                cur = p;
            }
            trace.reverse();
            let al = aut.alphabet();
            let to_plant = |e: EventId| g.alphabet().lookup(al.name(e)).expect("plant event");
            let plant = trace.iter().filter_map(|&e| al.plant_projection(e)).map(to_plant).collect();
            let observed = trace
                .iter()
                .filter(|&&e| al.is_observable(e))
                .filter_map(|&e| al.supervisor_projection(e))
                .map(to_plant)
                .collect();
            return Ok(Robustness::Unsafe(Counterexample { trace, plant, observed, state: cl.plant_state(x) }));
        }
        for &(e, y) in aut.edges(x) {
            if !seen[y.index()] {
                seen[y.index()] = true;
                parent[y.index()] = Some((x, e));
                queue.push_back(y);
            }
        }
    }
    Ok(Robustness::Robust)
}

/// Plant states reached by closed-loop strings whose projection onto the
/// observable and edit events is `s` (a word over the attacked alphabet of
/// the plant), by search over the product.
pub fn re_by_search(cl: &ClosedLoop, s: &[EventId]) -> StateSet {
    let aut = &cl.automaton;
    let al = aut.alphabet();
    let Some(x0) = aut.initial() else {
        return StateSet::new();
    };
    let hidden = al.unobservable();
    let mut seen: hashbrown::HashSet<(StateId, usize)> = hashbrown::HashSet::new();
    let mut stack = vec![(x0, 0usize)];
    seen.insert((x0, 0));
    let mut out = Vec::new();
    while let Some((x, i)) = stack.pop() {
        if i == s.len() {
            out.push(cl.plant_state(x));
        }
        for &(e, y) in aut.edges(x) {
            let next = if hidden.contains(e) {
                i
            } else if i < s.len() && s[i] == e {
                i + 1
            } else {
                continue;
            };
            if seen.insert((y, next)) {
                stack.push((y, next));
            }
        }
    }
    StateSet::from_vec(out)
}

/// The same estimate as a left fold: each step applies the event to the
/// attacked plant and closes under the unobservable events the supervisor
/// enables after it.
pub fn re_by_fold(g: &Automaton, r: &SupervisorRealization, s: &[EventId], attacked: &Alphabet) -> Result<StateSet> {
    let ga = crate::attack::attacked_plant(g);
    let gal = ga.alphabet();
    let to_r = |e: EventId| r.alphabet().lookup(attacked.name(e));
    let enabled_uo = |x: StateId| -> Result<crate::events::EventSet> {
        let dec = r.decision(x);
        Ok(r.alphabet().translate_set(&dec, gal).intersection(&gal.unobservable()))
    };
    let mut rx = r.initial();
    let x0 = ga.initial().ok_or(Error::EmptyAutomaton)?;
    let mut est = closure(&ga, [x0], &enabled_uo(rx)?);
    for &e in s {
        let ge = gal.lookup(attacked.name(e))?;
        if let Some(seen) = attacked.supervisor_projection(e) {
            rx = r.delta_complete(rx, to_r(seen)?)?;
        }
        let moved: Vec<StateId> = est.iter().filter_map(|x| ga.delta(x, ge)).collect();
        est = closure(&ga, moved, &enabled_uo(rx)?);
    }
    Ok(est)
}

/// State estimate of the attacked plant after the decorated observation
/// `s`, computed both by product search and by the recursive fold; errors
/// if `s` is not an observation of the closed loop or the two disagree.
pub fn re_oracle(g: &Automaton, r: &SupervisorRealization, a: &AttackModel, s: &[EventId]) -> Result<StateSet> {
    let cl = closed_loop(g, r, a)?;
    let searched = re_by_search(&cl, s);
    if searched.is_empty() {
        return Err(Error::InfeasibleString);
    }
    let folded = re_by_fold(g, r, s, cl.automaton.alphabet())?;
    if folded != searched {
        return Err(Error::Invalid(format!("state estimates disagree: {searched:?} by search, {folded:?} by fold")));
    }
    Ok(searched)
}

/// Outcome of [`embeds`]; the witness is a shortest observation (over the
/// attacked alphabet of the plant) whose fold is undefined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub embedded: bool,
    pub witness: Option<Word>,
}

/// Whether every observation of the attacked closed loop, with the
/// supervisor's decisions, can be folded through `sup`.
pub fn embeds(sup: &SupArena, g: &Automaton, r: &SupervisorRealization, a: &AttackModel) -> Result<Embedding> {
    let cl = closed_loop(g, r, a)?;
    let aut = &cl.automaton;
    let al = aut.alphabet();
    let ctx = sup.context();
    let plant_al = ctx.plant().alphabet();
    let decision_of = |rx: StateId| -> Result<EventId> {
        let set = r.alphabet().translate_set(&r.decision(rx), plant_al);
        ctx.decision_event(&set).ok_or_else(|| {
            Error::Invalid(format!("decision {} is not admissible for the arena", plant_al.format_set(&set)))
        })
    };
    let meta: Vec<Option<EventId>> = al.ids().map(|e| ctx.meta().id(al.name(e))).collect();
    let fail = |w: Word| Ok(Embedding { embedded: false, witness: Some(w) });
    let Some(c0) = aut.initial() else {
        return Ok(Embedding { embedded: true, witness: None });
    };
    let gamma0 = decision_of(cl.supervisor[c0.index()])?;
    let Some(q0) = sup.initial().and_then(|q| sup.step(q, gamma0)) else {
        return fail(Vec::new());
    };
    // 0-1 breadth-first search: hidden moves cost nothing.
    let hidden = al.unobservable();
    let mut parent: HashMap<Pair, Option<(Pair, Option<EventId>)>> = HashMap::new();
    parent.insert((c0, q0), None);
    let mut deque = VecDeque::from([(c0, q0)]);
    let word_to = |mut cur: (StateId, StateId), parent: &HashMap<_, Option<(Pair, Option<EventId>)>>| {
        let mut w = Vec::new();
        while let Some(Some((p, e))) = parent.get(&cur) {
            if let Some(e) = e {
                w.push(*e);
            }
            cur = *p;
        }
        w.reverse();
        w
    };
    let mut done: hashbrown::HashSet<(StateId, StateId)> = hashbrown::HashSet::new();
    while let Some((c, q)) = deque.pop_front() {
        if !done.insert((c, q)) {
            continue;
        }
        for &(e, c2) in aut.edges(c) {
            if hidden.contains(e) {
                if let hashbrown::hash_map::Entry::Vacant(v) = parent.entry((c2, q)) {
                    v.insert(Some(((c, q), None)));
                    deque.push_front((c2, q));
                }
                continue;
            }
            let m = meta[e.index()]
                .ok_or_else(|| Error::AlphabetMismatch(format!("event `{}` unknown to the arena", al.name(e))))?;
            let gamma = decision_of(cl.supervisor[c2.index()])?;
            match sup.step_h2_big(q, m, gamma) {
                Some(q2) => {
                    if let hashbrown::hash_map::Entry::Vacant(v) = parent.entry((c2, q2)) {
                        v.insert(Some(((c, q), Some(e))));
                        deque.push_back((c2, q2));
                    }
                }
                None => {
                    let mut w = word_to((c, q), &parent);
                    w.push(e);
                    return fail(w);
                }
            }
        }
    }
    Ok(Embedding { embedded: true, witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::build_all_out;
    use crate::automaton::AutomatonBuilder;
    use crate::extraction::{extract_supervisor, ExtractionPolicy};
    use crate::synthesis::synthesize;

    /// a, b controllable observable, a compromised; 0 -a-> 1 -b-> 2 (crit),
    /// 0 -b-> 3 -a-> 4.
    fn plant() -> Automaton {
        let mut al = Alphabet::new();
        let a = al.add_event("a", true, true).unwrap();
        al.add_event("b", true, true).unwrap();
        al.set_compromised(a).unwrap();
        let mut bld = AutomatonBuilder::new(al).with_states(5);
        bld.set_initial(StateId(0));
        bld.mark_crit(StateId(2));
        bld.edge(0, "a", 1)
            .unwrap()
            .edge(1, "b", 2)
            .unwrap()
            .edge(0, "b", 3)
            .unwrap()
            .edge(3, "a", 4)
            .unwrap()
            .build()
            .unwrap()
    }

    /// Disables b after a; otherwise enables everything.
    fn naive(g: &Automaton) -> SupervisorRealization {
        let mut b = AutomatonBuilder::new(g.shared_alphabet()).with_states(2);
        b.set_initial(StateId(0));
        let b = b.edge(0, "a", 1).unwrap().edge(0, "b", 0).unwrap();
        SupervisorRealization::new(b.build().unwrap()).unwrap()
    }

    #[test]
    fn deletion_defeats_naive_supervisor() {
        let g = plant();
        let r = naive(&g);
        let none = crate::attack::build_bounded(g.alphabet(), 0, 0);
        assert!(verify_robust(&g, &r, &none).unwrap().is_robust());
        let a = build_all_out(g.alphabet());
        let Robustness::Unsafe(cx) = verify_robust(&g, &r, &a).unwrap() else { panic!("expected a counterexample") };
        assert_eq!(cx.state, StateId(2));
        let al = g.alphabet();
        // a deleted, then b is still enabled
        assert_eq!(al.format_word(&cx.plant), "a b");
        assert_eq!(al.format_word(&cx.observed), "b");
    }

    #[test]
    fn extracted_supervisor_is_robust_and_embedded() {
        let g = plant();
        let a = build_all_out(g.alphabet());
        let sup = synthesize(&g, &a).unwrap();
        assert!(!sup.is_empty());
        let r = extract_supervisor(&sup, &ExtractionPolicy::default()).unwrap();
        assert!(verify_robust(&g, &r, &a).unwrap().is_robust());
        assert!(embeds(&sup, &g, &r, &a).unwrap().embedded);
        let bad = embeds(&sup, &g, &naive(&g), &a).unwrap();
        assert!(!bad.embedded);
    }

    #[test]
    fn estimate_at_epsilon_and_infeasible() {
        let g = plant();
        let r = naive(&g);
        let a = build_all_out(g.alphabet());
        assert_eq!(re_oracle(&g, &r, &a, &[]).unwrap(), StateSet::singleton(StateId(0)));
        let cl = closed_loop(&g, &r, &a).unwrap();
        let al = cl.automaton.alphabet();
        let ins = al.lookup("a.ins").unwrap();
        let a_ev = al.lookup("a").unwrap();
        assert_eq!(re_oracle(&g, &r, &a, &[ins]).unwrap(), StateSet::singleton(StateId(0)));
        let del = al.lookup("a.del").unwrap();
        assert_eq!(re_oracle(&g, &r, &a, &[del]).unwrap(), StateSet::singleton(StateId(1)));
        assert!(matches!(re_oracle(&g, &r, &a, &[a_ev, a_ev]), Err(Error::InfeasibleString)));
    }
}
