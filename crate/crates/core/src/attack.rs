//! Attack automata, the attacked plant and supervisor, and the attacked
//! closed loop.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::automaton::{Automaton, AutomatonBuilder, StateId, Word};
use crate::compose::compose_parallel;
use crate::error::{Error, Result};
use crate::events::{Alphabet, EventId, EventKind};
use crate::supervisor::SupervisorRealization;

/// Reason an automaton does not encode an attack function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// The event is neither observable and legitimate nor an edit of a
    /// compromised event.
    ForeignEvent(String),
    /// The state satisfies neither the completeness condition nor the
    /// insertion-only condition.
    State {
        state: String,
        /// Events whose absence breaks completeness; `e|e.del` when neither
        /// copy of a compromised `e` is defined.
        missing: Vec<String>,
        /// Observable or deletion events defined at the state, which rule out
        /// the insertion-only condition.
        defined: Vec<String>,
        has_insertion: bool,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ForeignEvent(e) => write!(f, "event `{e}` is not an observable or edit event"),
            Violation::State { state, missing, defined, has_insertion } => {
                write!(f, "state `{state}`: missing {{{}}}", missing.join(","))?;
                if *has_insertion {
                    write!(f, "; insertion-only rule broken by {{{}}}", defined.join(","))
                } else {
                    write!(f, "; no insertion defined")
                }
            }
        }
    }
}

/// Outcome of a successful [`validate`]: states that only satisfy the
/// insertion-only condition. Such states block the plant until the attacker
/// inserts something.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Validation {
    pub blocking: Vec<StateId>,
}

/// Checks that every state of `aut` is either complete (every observable
/// uncompromised event defined; for compromised `e`, `e` or `e.del`
/// defined) or insertion-only (no observable or deletion event, at least one
/// insertion). The sets are taken from `aut`'s own alphabet.
pub fn validate(aut: &Automaton) -> core::result::Result<Validation, Vec<Violation>> {
    let alphabet = aut.alphabet();
    let mut violations = Vec::new();
    for e in alphabet.ids() {
        let ok = match alphabet.kind(e) {
            EventKind::Legit => alphabet.is_observable(e),
            EventKind::Inserted(b) | EventKind::Deleted(b) => alphabet.is_compromised(*b),
            EventKind::Decision(_) => false,
        };
        if !ok {
            violations.push(Violation::ForeignEvent(alphabet.name(e).into()));
        }
    }
    if !violations.is_empty() {
        return Err(violations);
    }
    let mut blocking = Vec::new();
    for x in aut.states() {
        let active = aut.active(x);
        let mut missing = Vec::new();
        for e in alphabet.legit().iter() {
            if active.contains(e) {
                continue;
            }
            if alphabet.is_compromised(e) {
                let del = alphabet.deletion_of(e).expect("compromised events have deletions");
                if !active.contains(del) {
                    missing.push(format!("{}|{}", alphabet.name(e), alphabet.name(del)));
                }
            } else {
                missing.push(alphabet.name(e).into());
            }
        }
        if missing.is_empty() {
            continue;
        }
        let defined: Vec<String> = active
            .iter()
            .filter(|&e| !matches!(alphabet.kind(e), EventKind::Inserted(_)))
            .map(|e| alphabet.name(e).into())
            .collect();
        let has_insertion = !active.intersection(&alphabet.insertions()).is_empty();
        if defined.is_empty() && has_insertion {
            blocking.push(x);
        } else {
            violations.push(Violation::State { state: aut.state_name(x).into(), missing, defined, has_insertion });
        }
    }
    if violations.is_empty() {
        Ok(Validation { blocking })
    } else {
        Err(violations)
    }
}

/// A validated attack automaton over the edit alphabet of a plant alphabet.
#[derive(Clone, Debug)]
pub struct AttackModel {
    automaton: Automaton,
    blocking: Vec<StateId>,
}

impl AttackModel {
    /// Rebinds `aut` to the edit alphabet of `plant` (events matched by name)
    /// and validates it.
    pub fn new(aut: &Automaton, plant: &Alphabet) -> Result<Self> {
        let edit = Arc::new(plant.edit_alphabet());
        let mut foreign = Vec::new();
        let mut map = Vec::with_capacity(aut.alphabet().len());
        for e in aut.alphabet().ids() {
            let name = aut.alphabet().name(e);
            match edit.id(name) {
                Some(id) => {
                    let (a, b) = (aut.alphabet().info(e)?, edit.info(id)?);
                    if a.observable != b.observable || a.controllable != b.controllable {
                        return Err(Error::AlphabetMismatch(format!("event `{name}` has different flags")));
                    }
                    map.push(Some(id));
                }
                None => {
                    foreign.push(Violation::ForeignEvent(name.into()));
                    map.push(None);
                }
            }
        }
        if !foreign.is_empty() {
            return Err(Error::InvalidAttack(foreign));
        }
        let mut builder = AutomatonBuilder::new(edit);
        for x in aut.states() {
            builder.add_state(aut.state_name(x));
        }
        if let Some(x0) = aut.initial() {
            builder.set_initial(x0);
        }
        for (x, e, y) in aut.transitions() {
            builder.add_transition(x, map[e.index()].expect("checked above"), y)?;
        }
        Self::from_edit_automaton(builder.build()?)
    }

    fn from_edit_automaton(automaton: Automaton) -> Result<Self> {
        if automaton.is_empty() {
            return Err(Error::EmptyAutomaton);
        }
        let v = validate(&automaton).map_err(Error::InvalidAttack)?;
        Ok(AttackModel { automaton, blocking: v.blocking })
    }

    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.automaton.alphabet()
    }

    pub fn initial(&self) -> StateId {
        self.automaton.initial().expect("attack models are nonempty")
    }

    /// States accepted only through the insertion-only condition.
    pub fn blocking_states(&self) -> &[StateId] {
        &self.blocking
    }

    /// Whether this model is over the edit alphabet of `plant`.
    pub fn fits(&self, plant: &Alphabet) -> bool {
        let edit = plant.edit_alphabet();
        edit.same_events(self.alphabet())
            && edit
                .compromised()
                .iter()
                .all(|e| self.alphabet().id(edit.name(e)).is_some_and(|x| self.alphabet().is_compromised(x)))
    }
}

/// The all-out attacker: one state with a self-loop on every observable
/// event and every insertion and deletion.
pub fn build_all_out(plant: &Alphabet) -> AttackModel {
    let edit = Arc::new(plant.edit_alphabet());
    let mut b = AutomatonBuilder::new(edit.clone());
    let x = b.add_state("0");
    b.set_initial(x);
    for e in edit.ids() {
        b.add_transition(x, e, x).expect("valid ids");
    }
    AttackModel::from_edit_automaton(b.build().expect("deterministic")).expect("all-out is valid")
}

/// Attacker that behaves like the all-out one but performs at most
/// `max_ins` insertions and `max_del` deletions in total.
pub fn build_bounded(plant: &Alphabet, max_ins: usize, max_del: usize) -> AttackModel {
    let edit = Arc::new(plant.edit_alphabet());
    let mut b = AutomatonBuilder::new(edit.clone());
    let id = |i: usize, d: usize| StateId((i * (max_del + 1) + d) as u32);
    for i in 0..=max_ins {
        for d in 0..=max_del {
            b.add_state(format!("({i},{d})"));
        }
    }
    b.set_initial(id(0, 0));
    for i in 0..=max_ins {
        for d in 0..=max_del {
            let x = id(i, d);
            for e in edit.ids() {
                let target = match edit.kind(e) {
                    EventKind::Inserted(_) => (i < max_ins).then(|| id(i + 1, d)),
                    EventKind::Deleted(_) => (d < max_del).then(|| id(i, d + 1)),
                    _ => Some(x),
                };
                if let Some(y) = target {
                    b.add_transition(x, e, y).expect("valid ids");
                }
            }
        }
    }
    AttackModel::from_edit_automaton(b.build().expect("deterministic")).expect("bounded attacker is valid")
}

/// The edit function encoded by `a`: the replacements the attacker may
/// emit for observation `e` after the edited history `s`, with at most
/// `depth` trailing insertions. `e = None` stands for the empty
/// observation. `Ok(None)` means undefined (`s` is not in the language of
/// `a`). Words are over the alphabet of `a` and sorted.
pub fn fa_eval(a: &AttackModel, s: &[EventId], e: Option<EventId>, depth: usize) -> Result<Option<Vec<Word>>> {
    let aut = a.automaton();
    let alphabet = a.alphabet();
    if let Some(e) = e {
        let info = alphabet.info(e)?;
        if !(info.observable && info.kind == EventKind::Legit) {
            return Err(Error::NotObservable(info.name.clone()));
        }
    }
    let Some(x) = aut.run(a.initial(), s) else {
        return Ok(None);
    };
    let heads: Vec<(Word, StateId)> = match e {
        None if !s.is_empty() => return Ok(Some(vec![Vec::new()])),
        None => vec![(Vec::new(), x)],
        Some(e) => {
            let mut heads = Vec::new();
            for first in [Some(e), alphabet.deletion_of(e)].into_iter().flatten() {
                if let Some(y) = aut.delta(x, first) {
                    heads.push((vec![first], y));
                }
            }
            heads
        }
    };
    let insertions = alphabet.insertions();
    let mut out = BTreeSet::new();
    let mut queue: VecDeque<(Word, StateId, usize)> = heads.into_iter().map(|(w, y)| (w, y, 0)).collect();
    while let Some((w, y, n)) = queue.pop_front() {
        if n < depth {
            for &(ev, z) in aut.edges(y) {
                if insertions.contains(ev) {
                    let mut w2 = w.clone();
                    w2.push(ev);
                    queue.push_back((w2, z, n + 1));
                }
            }
        }
        out.insert(w);
    }
    Ok(Some(out.into_iter().collect()))
}

/// The attacked plant over the attacked alphabet: legitimate transitions
/// are kept, `e.del` copies the move on `e`, and every insertion is a
/// self-loop.
pub fn attacked_plant(g: &Automaton) -> Automaton {
    let alphabet = Arc::new(g.alphabet().attacked());
    let mut b = AutomatonBuilder::new(alphabet.clone());
    for x in g.states() {
        let id = b.add_state(g.state_name(x));
        if g.is_crit(x) {
            b.mark_crit(id);
        }
    }
    if let Some(x0) = g.initial() {
        b.set_initial(x0);
    }
    for x in g.states() {
        for e in alphabet.ids() {
            let target = match alphabet.plant_projection(e) {
                None => Some(x),
                Some(p) => g.delta(x, p),
            };
            if let Some(y) = target {
                b.add_transition(x, e, y).expect("valid ids");
            }
        }
    }
    b.build().expect("projection of a deterministic automaton")
}

/// The attacked supervisor over the attacked alphabet of `plant`. Edits of
/// enabled events act like their supervisor observation; insertions of
/// disabled events are ignored.
pub fn attacked_supervisor(r: &SupervisorRealization, plant: &Alphabet) -> Result<Automaton> {
    let aut = r.automaton();
    let alphabet = Arc::new(plant.attacked());
    let base = plant.base();
    if !base.same_events(r.alphabet()) {
        return Err(Error::AlphabetMismatch("supervisor and plant declare different events".into()));
    }
    let mut b = AutomatonBuilder::new(alphabet.clone());
    for x in aut.states() {
        b.add_state(aut.state_name(x));
    }
    b.set_initial(r.initial());
    let to_r: Vec<EventId> =
        alphabet.ids().map(|e| r.alphabet().lookup(alphabet.name(alphabet.mask(e)))).collect::<Result<_>>()?;
    for x in aut.states() {
        for e in alphabet.ids() {
            let masked = to_r[e.index()];
            let target = if aut.delta(x, masked).is_some() {
                match alphabet.supervisor_projection(e) {
                    None => Some(x),
                    Some(_) => aut.delta(x, masked),
                }
            } else if matches!(alphabet.kind(e), EventKind::Inserted(_)) {
                Some(x)
            } else {
                None
            };
            if let Some(y) = target {
                b.add_transition(x, e, y)?;
            }
        }
    }
    b.build()
}

/// `G_a || R_a || A` with the component states of every product state.
#[derive(Clone, Debug)]
pub struct ClosedLoop {
    pub automaton: Automaton,
    pub plant: Vec<StateId>,
    pub supervisor: Vec<StateId>,
    pub attacker: Vec<StateId>,
}

impl ClosedLoop {
    pub fn plant_state(&self, s: StateId) -> StateId {
        self.plant[s.index()]
    }
}

/// The attacked closed loop. Its alphabet is the attacked alphabet of the
/// plant; a product state is critical exactly when its plant component is.
pub fn closed_loop(g: &Automaton, r: &SupervisorRealization, a: &AttackModel) -> Result<ClosedLoop> {
    if !a.fits(g.alphabet()) {
        return Err(Error::AlphabetMismatch("attack model does not match the plant's edit alphabet".into()));
    }
    let ga = attacked_plant(g);
    let ra = attacked_supervisor(r, g.alphabet())?;
    let gr = compose_parallel(&ga, &ra)?;
    let full = compose_parallel(&gr.automaton, a.automaton())?;
    // The merged alphabet equals the attacked alphabet up to order; rebind so
    // event ids agree with `ga`.
    let automaton = rebind(&full.automaton, ga.shared_alphabet())?;
    let mut plant = Vec::with_capacity(full.pairs.len());
    let mut supervisor = Vec::with_capacity(full.pairs.len());
    let mut attacker = Vec::with_capacity(full.pairs.len());
    for &(p, y) in &full.pairs {
        let (x, s) = gr.pairs[p.index()];
        plant.push(x);
        supervisor.push(s);
        attacker.push(y);
    }
    Ok(ClosedLoop { automaton, plant, supervisor, attacker })
}

/// Copies `aut` onto an alphabet with the same event names.
pub(crate) fn rebind(aut: &Automaton, alphabet: Arc<Alphabet>) -> Result<Automaton> {
    if !aut.alphabet().same_events(&alphabet) {
        return Err(Error::AlphabetMismatch("alphabets declare different events".into()));
    }
    let map: Vec<EventId> =
        aut.alphabet().ids().map(|e| alphabet.lookup(aut.alphabet().name(e))).collect::<Result<_>>()?;
    let mut b = AutomatonBuilder::new(alphabet);
    for x in aut.states() {
        let id = b.add_state(aut.state_name(x));
        if aut.is_crit(x) {
            b.mark_crit(id);
        }
    }
    if let Some(x0) = aut.initial() {
        b.set_initial(x0);
    }
    for (x, e, y) in aut.transitions() {
        b.add_transition(x, map[e.index()], y)?;
    }
    b.build()
}
