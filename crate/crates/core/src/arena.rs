//! The bipartite game arena between the supervisor and the environment.
//!
//! Supervisor states (`Q1`) carry a plant state estimate and an attacker
//! state. Environment states (`Q2`) also carry the last control decision and
//! a pending inserted event. The arena is an ordinary [`Automaton`] over the
//! meta alphabet `E`: one event per admissible control decision, followed by
//! the observable and edit events.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::attack::AttackModel;
use crate::automaton::{closure, Automaton, AutomatonBuilder, StateId, StateSet};
use crate::error::{Error, Result};
use crate::events::{Alphabet, EventId, EventInfo, EventKind, EventSet};

/// Largest number of controllable events for which all decisions are
/// enumerated.
pub const MAX_CONTROLLABLE: usize = 20;

/// Information state of an arena node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    /// Supervisor to move: estimate and attacker state.
    Q1 { s1: StateSet, s2: StateId },
    /// Environment to move. `gamma` is the meta event of the last decision;
    /// `sigma` is the plant event of a pending insertion.
    Q2 { s1: StateSet, s2: StateId, gamma: EventId, sigma: Option<EventId> },
}

impl Node {
    /// Plant state estimate.
    pub fn i1(&self) -> &StateSet {
        match self {
            Node::Q1 { s1, .. } | Node::Q2 { s1, .. } => s1,
        }
    }

    /// Attacker state.
    pub fn i2(&self) -> StateId {
        match self {
            Node::Q1 { s2, .. } | Node::Q2 { s2, .. } => *s2,
        }
    }

    pub fn is_q1(&self) -> bool {
        matches!(self, Node::Q1 { .. })
    }
}

/// Deviations from the literal transition rules, used to study how the
/// reported state counts were obtained. The default is the literal rule set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArenaConfig {
    /// Allow an insertion of `e` only when the current decision enables `e`.
    pub insert_enabled_only: bool,
    /// Expand nodes whose estimate meets the critical states.
    pub expand_crit: bool,
}

impl Default for ArenaConfig {
    fn default() -> Self {
        ArenaConfig { insert_enabled_only: false, expand_crit: true }
    }
}

/// Everything an arena-shaped automaton needs to interpret its events and
/// labels.
#[derive(Debug)]
pub struct ArenaContext {
    plant: Automaton,
    attack: AttackModel,
    meta: Arc<Alphabet>,
    /// `decisions[i]` is the plant event set of meta event `i`.
    decisions: Vec<EventSet>,
    /// Plant event to meta event (observable legit events and edits keep
    /// their names).
    plant_to_meta: Vec<Option<EventId>>,
    /// Meta event to attacker event.
    meta_to_attack: Vec<Option<EventId>>,
    /// Meta event to plant event of its mask.
    meta_to_plant: Vec<Option<EventId>>,
}

impl ArenaContext {
    fn new(plant: &Automaton, attack: &AttackModel) -> Result<Self> {
        let al = plant.alphabet();
        if !attack.fits(al) {
            return Err(Error::AlphabetMismatch("attack model does not match the plant's edit alphabet".into()));
        }
        let controllable: Vec<EventId> = al.legit().intersection(&al.controllable()).iter().collect();
        if controllable.len() > MAX_CONTROLLABLE {
            return Err(Error::Invalid(format!(
                "{} controllable events exceed the supported maximum of {MAX_CONTROLLABLE}",
                controllable.len()
            )));
        }
        let uc = al.legit().intersection(&al.uncontrollable());
        let mut meta = Alphabet::new();
        let mut decisions = Vec::with_capacity(1 << controllable.len());
        for bits in 0u32..(1 << controllable.len()) {
            let mut set = uc.clone();
            for (j, &e) in controllable.iter().enumerate() {
                if bits & (1 << j) != 0 {
                    set.insert(e);
                }
            }
            meta.push(EventInfo {
                name: al.format_set(&set),
                controllable: bits != 0,
                observable: true,
                kind: EventKind::Decision(set.clone()),
            })?;
            decisions.push(set);
        }
        let edit = attack.alphabet();
        for e in edit.ids() {
            let info = edit.info(e)?;
            let kind = match info.kind {
                EventKind::Inserted(b) => EventKind::Inserted(meta.lookup(edit.name(b))?),
                EventKind::Deleted(b) => EventKind::Deleted(meta.lookup(edit.name(b))?),
                _ => EventKind::Legit,
            };
            let legit = kind == EventKind::Legit;
            let id = meta.push(EventInfo { name: info.name.clone(), controllable: false, observable: legit, kind })?;
            if edit.is_compromised(e) {
                meta.mark_compromised_unchecked(id);
            }
        }
        let plant_to_meta = al.ids().map(|e| meta.id(al.name(e))).collect();
        let meta_to_attack = meta.ids().map(|e| edit.id(meta.name(e))).collect();
        let meta_to_plant = meta.ids().map(|e| al.id(meta.name(meta.mask(e)))).collect();
        Ok(ArenaContext {
            plant: plant.clone(),
            attack: attack.clone(),
            meta: Arc::new(meta),
            decisions,
            plant_to_meta,
            meta_to_attack,
            meta_to_plant,
        })
    }

    pub fn plant(&self) -> &Automaton {
        &self.plant
    }

    pub fn attack(&self) -> &AttackModel {
        &self.attack
    }

    /// The meta alphabet `E`.
    pub fn meta(&self) -> &Arc<Alphabet> {
        &self.meta
    }

    /// Number of admissible control decisions.
    pub fn decision_count(&self) -> usize {
        self.decisions.len()
    }

    /// Meta events that are control decisions.
    pub fn decision_events(&self) -> impl Iterator<Item = EventId> {
        (0..self.decisions.len() as u32).map(EventId)
    }

    /// Plant event set of a decision meta event.
    pub fn decision_set(&self, d: EventId) -> Option<&EventSet> {
        self.decisions.get(d.index())
    }

    /// Meta event of the decision enabling exactly `set` (plant events).
    pub fn decision_event(&self, set: &EventSet) -> Option<EventId> {
        let name = self.plant.alphabet().format_set(set);
        self.meta.id(&name).filter(|e| e.index() < self.decisions.len())
    }

    /// The decision that enables only uncontrollable events.
    pub fn minimal_decision(&self) -> EventId {
        EventId(0)
    }

    /// Meta event of a plant event, if it is observable or an edit.
    pub fn meta_of_plant(&self, e: EventId) -> Option<EventId> {
        self.plant_to_meta.get(e.index()).copied().flatten()
    }

    /// Plant event behind a meta event with its decoration removed.
    pub fn plant_of_meta(&self, e: EventId) -> Option<EventId> {
        self.meta_to_plant.get(e.index()).copied().flatten()
    }

    /// Meta event with the name of `e` in `alphabet`.
    pub fn meta_of(&self, alphabet: &Alphabet, e: EventId) -> Option<EventId> {
        self.meta.id(alphabet.name(e))
    }

    /// Observable legitimate meta events.
    pub fn observations(&self) -> EventSet {
        self.meta.legit().intersection(&self.meta.observable())
    }

    /// Edit meta events.
    pub fn edits(&self) -> EventSet {
        self.meta.edits()
    }

    fn ur(&self, s1: &StateSet, gamma: &EventSet) -> StateSet {
        let moves = gamma.difference(&self.plant.alphabet().observable());
        closure(&self.plant, s1.iter(), &moves)
    }

    fn nx(&self, s1: &StateSet, e: EventId) -> StateSet {
        s1.iter().filter_map(|x| self.plant.delta(x, e)).collect()
    }

    fn estimate_is_crit(&self, s1: &StateSet) -> bool {
        s1.iter().any(|x| self.plant.is_crit(x))
    }

    /// Successors of `node` under the arena rules.
    fn expand(&self, node: &Node, config: &ArenaConfig) -> Vec<(EventId, Node)> {
        let mut out = Vec::new();
        if !config.expand_crit && self.estimate_is_crit(node.i1()) {
            return out;
        }
        let aut_a = self.attack.automaton();
        match node {
            Node::Q1 { s1, s2 } => {
                for (i, gamma) in self.decisions.iter().enumerate() {
                    let q = Node::Q2 { s1: self.ur(s1, gamma), s2: *s2, gamma: EventId(i as u32), sigma: None };
                    out.push((EventId(i as u32), q));
                }
            }
            Node::Q2 { s1, s2, sigma: Some(e), .. } => {
                let m = self.meta_of_plant(*e).expect("observable event");
                out.push((m, Node::Q1 { s1: s1.clone(), s2: *s2 }));
            }
            Node::Q2 { s1, s2, gamma, sigma: None } => {
                let gamma_set = &self.decisions[gamma.index()];
                let active = self.active(s1);
                for m in self.meta.ids().skip(self.decisions.len()) {
                    let Some(a_ev) = self.meta_to_attack[m.index()] else { continue };
                    let Some(s2n) = aut_a.delta(*s2, a_ev) else { continue };
                    let e = self.meta_to_plant[m.index()].expect("edit events have a plant base");
                    match self.meta.kind(m) {
                        EventKind::Legit => {
                            if active.contains(e) && gamma_set.contains(e) {
                                out.push((m, Node::Q1 { s1: self.nx(s1, e), s2: s2n }));
                            }
                        }
                        EventKind::Inserted(_) => {
                            if !config.insert_enabled_only || gamma_set.contains(e) {
                                let q = Node::Q2 { s1: s1.clone(), s2: s2n, gamma: *gamma, sigma: Some(e) };
                                out.push((m, q));
                            }
                        }
                        EventKind::Deleted(_) => {
                            if active.contains(e) && gamma_set.contains(e) {
                                let s1n = self.ur(&self.nx(s1, e), gamma_set);
                                out.push((m, Node::Q2 { s1: s1n, s2: s2n, gamma: *gamma, sigma: None }));
                            }
                        }
                        EventKind::Decision(_) => unreachable!("decisions are skipped"),
                    }
                }
            }
        }
        out
    }

    fn active(&self, s1: &StateSet) -> EventSet {
        let mut out = EventSet::new();
        for x in s1.iter() {
            for &(e, _) in self.plant.edges(x) {
                out.insert(e);
            }
        }
        out
    }

    /// Human-readable label, e.g. `({1},0)` or `({1},0,{a,b,c},b)`.
    pub fn node_name(&self, node: &Node) -> String {
        let g = &self.plant;
        let set = |s: &StateSet| {
            let names: Vec<&str> = s.iter().map(|x| g.state_name(x)).collect();
            format!("{{{}}}", names.join(","))
        };
        let att = self.attack.automaton();
        match node {
            Node::Q1 { s1, s2 } => format!("({},{})", set(s1), att.state_name(*s2)),
            Node::Q2 { s1, s2, gamma, sigma } => format!(
                "({},{},{},{})",
                set(s1),
                att.state_name(*s2),
                self.meta.name(*gamma),
                sigma.map_or("-", |e| g.alphabet().name(e))
            ),
        }
    }
}

/// An arena-shaped automaton: the full arena or a synthesized sub-arena.
/// Every state carries the arena node it stands for.
#[derive(Clone, Debug)]
pub struct Arena {
    automaton: Automaton,
    labels: Vec<Node>,
    ctx: Arc<ArenaContext>,
}

/// The supremal controllable and normal sub-arena; same representation as
/// the arena, several states may share a label.
pub type SupArena = Arena;

impl Arena {
    /// Assembles an arena-shaped automaton; `labels[s]` is the node of state
    /// `s`. Checks typing and that the alphabet is the context's.
    pub fn from_parts(automaton: Automaton, labels: Vec<Node>, ctx: Arc<ArenaContext>) -> Result<Self> {
        if labels.len() != automaton.state_count() {
            return Err(Error::Invalid("one label per state is required".into()));
        }
        if !Arc::ptr_eq(&automaton.shared_alphabet(), ctx.meta()) && !automaton.alphabet().same_events(ctx.meta()) {
            return Err(Error::AlphabetMismatch("arena automaton is not over the meta alphabet".into()));
        }
        let n = ctx.decision_count();
        for (x, e, _) in automaton.transitions() {
            let is_decision = e.index() < n;
            if is_decision != labels[x.index()].is_q1() {
                return Err(Error::Invalid(format!(
                    "state `{}` has a move on `{}` that breaks the bipartite typing",
                    automaton.state_name(x),
                    automaton.alphabet().name(e)
                )));
            }
        }
        Ok(Arena { automaton, labels, ctx })
    }

    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    pub fn into_automaton(self) -> Automaton {
        self.automaton
    }

    pub fn labels(&self) -> &[Node] {
        &self.labels
    }

    pub fn label(&self, q: StateId) -> &Node {
        &self.labels[q.index()]
    }

    pub fn context(&self) -> &Arc<ArenaContext> {
        &self.ctx
    }

    pub fn is_empty(&self) -> bool {
        self.automaton.is_empty()
    }

    pub fn initial(&self) -> Option<StateId> {
        self.automaton.initial()
    }

    pub fn state_count(&self) -> usize {
        self.automaton.state_count()
    }

    /// `h1` or `h2`: one arena move.
    pub fn step(&self, q: StateId, e: EventId) -> Option<StateId> {
        self.automaton.delta(q, e)
    }

    /// Big step from an environment state (`H2`). `e` is a meta event of the
    /// observable or edit kind; `gamma` is a decision meta event, unused for
    /// deletions.
    pub fn step_h2_big(&self, q: StateId, e: EventId, gamma: EventId) -> Option<StateId> {
        match self.ctx.meta.kind(e) {
            EventKind::Legit => self.step(self.step(q, e)?, gamma),
            EventKind::Deleted(_) => self.step(q, e),
            EventKind::Inserted(b) => {
                let b = *b;
                self.step(self.step(self.step(q, e)?, b)?, gamma)
            }
            EventKind::Decision(_) => None,
        }
    }

    /// Big step from a supervisor state (`H1`).
    pub fn step_h1_big(&self, q: StateId, e: EventId, gamma: EventId) -> Option<StateId> {
        match self.ctx.meta.kind(e) {
            EventKind::Legit => self.step(self.step(q, gamma)?, e),
            EventKind::Deleted(_) => Some(q),
            EventKind::Inserted(b) => {
                let b = *b;
                self.step(self.step(self.step(q, gamma)?, e)?, b)
            }
            EventKind::Decision(_) => None,
        }
    }

    /// Folds [`Arena::step_h2_big`] over `word`, starting from the initial
    /// state followed by `gammas[0]`. `gammas[i + 1]` is the decision after
    /// `word[i]`; it is ignored for deletions. Returns the state after each
    /// prefix, or the length of the longest defined prefix on failure.
    pub fn fold_h2(&self, word: &[EventId], gammas: &[EventId]) -> core::result::Result<Vec<StateId>, usize> {
        assert_eq!(gammas.len(), word.len() + 1, "one decision per prefix");
        let q0 = self.initial().ok_or(0usize)?;
        let mut q = self.step(q0, gammas[0]).ok_or(0usize)?;
        let mut out = Vec::with_capacity(word.len() + 1);
        out.push(q);
        for (i, &e) in word.iter().enumerate() {
            q = self.step_h2_big(q, e, gammas[i + 1]).ok_or(i)?;
            out.push(q);
        }
        Ok(out)
    }

    pub fn stats(&self) -> ArenaStats {
        arena_stats(self)
    }

    pub fn node_name(&self, q: StateId) -> String {
        self.ctx.node_name(self.label(q))
    }
}

/// Builds the arena for `g` (with its critical states) and attack model
/// `a` using the literal transition rules.
pub fn build_arena(g: &Automaton, a: &AttackModel) -> Result<Arena> {
    build_arena_with(g, a, ArenaConfig::default())
}

/// Breadth-first construction from `q0 = ({x0}, x0_A)`.
pub fn build_arena_with(g: &Automaton, a: &AttackModel, config: ArenaConfig) -> Result<Arena> {
    let ctx = Arc::new(ArenaContext::new(g, a)?);
    let mut builder = AutomatonBuilder::new(ctx.meta.clone());
    let Some(x0) = g.initial() else {
        // The empty plant has only the initial supervisor state with an empty
        // estimate; every decision leads to a dead environment state.
        let q0 = Node::Q1 { s1: StateSet::new(), s2: a.initial() };
        let mut labels = Vec::new();
        let s0 = builder.add_state(ctx.node_name(&q0));
        builder.set_initial(s0);
        labels.push(q0);
        for d in ctx.decision_events() {
            let q = Node::Q2 { s1: StateSet::new(), s2: a.initial(), gamma: d, sigma: None };
            let s = builder.add_state(ctx.node_name(&q));
            builder.add_transition(s0, d, s)?;
            labels.push(q);
        }
        return Arena::from_parts(builder.build()?, labels, ctx);
    };
    let q0 = Node::Q1 { s1: StateSet::singleton(x0), s2: a.initial() };
    let mut index: HashMap<Node, StateId> = HashMap::new();
    let mut labels: Vec<Node> = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern =
        |node: Node, builder: &mut AutomatonBuilder, labels: &mut Vec<Node>, queue: &mut VecDeque<StateId>| {
            if let Some(&s) = index.get(&node) {
                return s;
            }
            let s = builder.add_state(ctx.node_name(&node));
            if ctx.estimate_is_crit(node.i1()) {
                builder.mark_crit(s);
            }
            index.insert(node.clone(), s);
            labels.push(node);
            queue.push_back(s);
            s
        };
    let s0 = intern(q0, &mut builder, &mut labels, &mut queue);
    builder.set_initial(s0);
    while let Some(s) = queue.pop_front() {
        let node = labels[s.index()].clone();
        for (e, next) in ctx.expand(&node, &config) {
            debug_assert_eq!(e.index() < ctx.decision_count(), node.is_q1(), "bipartite typing");
            let t = intern(next, &mut builder, &mut labels, &mut queue);
            builder.add_transition(s, e, t)?;
        }
    }
    Arena::from_parts(builder.build()?, labels, ctx)
}

/// Size summary of an arena-shaped automaton.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArenaStats {
    pub states: usize,
    pub q1: usize,
    pub q2: usize,
    pub transitions: usize,
    /// Admissible control decisions.
    pub decisions: usize,
    /// Decisions that label at least one transition.
    pub decisions_used: usize,
    /// States whose estimate meets the critical states.
    pub crit: usize,
}

pub fn arena_stats(ar: &Arena) -> ArenaStats {
    let q1 = ar.labels.iter().filter(|n| n.is_q1()).count();
    let n = ar.ctx.decision_count();
    let used: EventSet = ar.automaton.transitions().map(|(_, e, _)| e).filter(|e| e.index() < n).collect();
    ArenaStats {
        states: ar.state_count(),
        q1,
        q2: ar.state_count() - q1,
        transitions: ar.automaton.transition_count(),
        decisions: n,
        decisions_used: used.len(),
        crit: ar.labels.iter().filter(|l| ar.ctx.estimate_is_crit(l.i1())).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::build_all_out;

    fn single(al: Alphabet) -> Automaton {
        let mut b = AutomatonBuilder::new(al).with_states(1);
        b.set_initial(StateId(0));
        b.build().unwrap()
    }

    #[test]
    fn single_state_plant_has_three_states() {
        let mut al = Alphabet::new();
        al.add_event("a", true, true).unwrap();
        let g = single(al.clone());
        let ar = build_arena(&g, &build_all_out(&al)).unwrap();
        let st = ar.stats();
        assert_eq!((st.states, st.q1, st.q2, st.decisions), (3, 1, 2, 2));
    }

    #[test]
    fn empty_plant_has_one_plus_decisions() {
        let mut al = Alphabet::new();
        al.add_event("a", true, true).unwrap();
        al.add_event("b", true, true).unwrap();
        let g = Automaton::empty(al.clone());
        let ar = build_arena(&g, &build_all_out(&al)).unwrap();
        assert_eq!(ar.stats().states, 1 + 4);
    }

    #[test]
    fn decisions_are_ordered_by_bits() {
        let mut al = Alphabet::new();
        al.add_event("a", true, true).unwrap();
        al.add_event("u", false, false).unwrap();
        al.add_event("b", true, true).unwrap();
        let g = single(al.clone());
        let ar = build_arena(&g, &build_all_out(&al)).unwrap();
        let names: Vec<&str> = ar.context().decision_events().map(|d| ar.context().meta().name(d)).collect();
        assert_eq!(names, ["{u}", "{a,u}", "{u,b}", "{a,u,b}"]);
        let set = al.parse_set("{a,u}").unwrap();
        assert_eq!(ar.context().decision_event(&set), Some(EventId(1)));
        assert!(!ar.context().meta().is_controllable(EventId(0)));
        assert!(ar.context().meta().is_controllable(EventId(3)));
    }

    #[test]
    fn insertion_waits_for_its_event() {
        let mut al = Alphabet::new();
        let b = al.add_event("b", true, true).unwrap();
        al.set_compromised(b).unwrap();
        let mut gb = AutomatonBuilder::new(al.clone()).with_states(2);
        gb.set_initial(StateId(0));
        let g = gb.edge(0, "b", 1).unwrap().build().unwrap();
        let ar = build_arena(&g, &build_all_out(&al)).unwrap();
        let ctx = ar.context().clone();
        let m = |n: &str| ctx.meta().lookup(n).unwrap();
        let q0 = ar.initial().unwrap();
        let q2 = ar.step(q0, m("{b}")).unwrap();
        let pending = ar.step(q2, m("b.ins")).unwrap();
        assert_eq!(ar.automaton().edges(pending).len(), 1);
        let back = ar.step(pending, m("b")).unwrap();
        assert_eq!(ar.label(back), &Node::Q1 { s1: StateSet::singleton(StateId(0)), s2: StateId(0) });
        // deletion moves the plant but keeps the environment to move
        let del = ar.step(q2, m("b.del")).unwrap();
        assert!(!ar.label(del).is_q1());
        assert_eq!(ar.label(del).i1(), &StateSet::singleton(StateId(1)));
        // H1 of a deletion is the identity
        assert_eq!(ar.step_h1_big(q0, m("b.del"), m("{}")), Some(q0));
        assert_eq!(ar.step_h1_big(q0, m("b.ins"), m("{b}")), Some(q0));
        // b disabled: no observable b, but the insertion is still possible
        let q2off = ar.step(q0, m("{}")).unwrap();
        assert_eq!(ar.step(q2off, m("b")), None);
        assert!(ar.step(q2off, m("b.ins")).is_some());
    }
}
