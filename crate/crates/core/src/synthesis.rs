//! Meta-control: the safety specification on the arena and the supremal
//! controllable and normal sublanguage.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::arena::{build_arena_with, Arena, ArenaConfig, SupArena};
use crate::attack::AttackModel;
use crate::automaton::{Automaton, AutomatonBuilder, StateId, StateSet, Word};
use crate::compose::{compose_parallel, observer};
use crate::error::{Error, Result};
use crate::events::{EventId, EventSet};
use crate::language::{language_equal, language_excess};

type Pair = (StateId, StateId);

/// How the supremal controllable and normal sublanguage is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SupAlgorithm {
    /// Alternate the supremal controllable and supremal normal steps until
    /// neither removes anything; the result is reduced to the coarsest
    /// structure compatible with the plant states.
    #[default]
    Iterative,
    /// Work on the plant refined by its own observer, where normality is a
    /// condition on observer blocks, and prune states to a fixpoint. The
    /// result keeps the refined state structure.
    Partition,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SynthesisOptions {
    pub algorithm: SupAlgorithm,
    pub arena: ArenaConfig,
    /// Upper bound on the states of any intermediate structure.
    pub max_states: Option<usize>,
}

/// Output of [`sup_cn`]: the automaton and, for each of its states, the
/// plant state reached by the same strings.
#[derive(Clone, Debug)]
pub struct SupCn {
    pub automaton: Automaton,
    pub plant_states: Vec<StateId>,
}

/// Deletes the arena states whose estimate meets `xcrit` and keeps the
/// accessible part. Labels follow their states.
pub fn meta_trim(ar: &Arena, xcrit: &StateSet) -> Result<Arena> {
    let kill: Vec<bool> = ar.labels().iter().map(|n| n.i1().intersects(xcrit)).collect();
    let (aut, map) = ar.automaton().restrict(|q| !kill[q.index()]);
    let mut labels = vec![None; aut.state_count()];
    for (old, new) in map.iter().enumerate() {
        if let Some(n) = new {
            labels[n.index()] = Some(ar.labels()[old].clone());
        }
    }
    Arena::from_parts(aut, labels.into_iter().map(|l| l.expect("mapped")).collect(), ar.context().clone())
}

/// Lightweight deterministic graph used inside the fixpoints. State 0 is
/// initial; `origin[s]` is the plant state reached by the strings reaching
/// `s`.
#[derive(Clone, Debug)]
struct Graph {
    edges: Vec<Vec<(EventId, u32)>>,
    origin: Vec<u32>,
}

impl Graph {
    fn empty() -> Self {
        Graph { edges: Vec::new(), origin: Vec::new() }
    }

    fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    fn len(&self) -> usize {
        self.edges.len()
    }

    fn delta(&self, s: u32, e: EventId) -> Option<u32> {
        let edges = &self.edges[s as usize];
        edges.binary_search_by_key(&e, |&(ev, _)| ev).ok().map(|i| edges[i].1)
    }

    /// Accessible part of the states satisfying `keep`, renumbered in BFS
    /// order.
    fn restrict(&self, keep: impl Fn(u32) -> bool) -> Graph {
        if self.is_empty() || !keep(0) {
            return Graph::empty();
        }
        let mut map = vec![u32::MAX; self.len()];
        let mut order = vec![0u32];
        map[0] = 0;
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            i += 1;
            for &(_, t) in &self.edges[s as usize] {
                if map[t as usize] == u32::MAX && keep(t) {
                    map[t as usize] = order.len() as u32;
                    order.push(t);
                }
            }
        }
        let edges = order
            .iter()
            .map(|&s| {
                self.edges[s as usize]
                    .iter()
                    .filter(|&&(_, t)| map[t as usize] != u32::MAX)
                    .map(|&(e, t)| (e, map[t as usize]))
                    .collect()
            })
            .collect();
        let origin = order.iter().map(|&s| self.origin[s as usize]).collect();
        Graph { edges, origin }
    }

    /// Synchronous product of `spec` with `plant`; fails if `spec` generates
    /// a string the plant does not.
    fn from_spec(spec: &Automaton, plant: &Automaton) -> Result<Graph> {
        let (Some(k0), Some(p0)) = (spec.initial(), plant.initial()) else {
            if let Some(w) = language_excess(spec, plant)? {
                return Err(Error::NotSublanguage(spec.alphabet().format_word(&w)));
            }
            return Ok(Graph::empty());
        };
        let mut index: HashMap<(StateId, StateId), u32> = HashMap::new();
        let mut pairs = vec![(k0, p0)];
        index.insert((k0, p0), 0);
        let mut edges: Vec<Vec<(EventId, u32)>> = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (k, p) = pairs[i];
            i += 1;
            let mut out = Vec::with_capacity(spec.edges(k).len());
            for &(e, k2) in spec.edges(k) {
                let Some(p2) = plant.delta(p, e) else {
                    let w = language_excess(spec, plant)?.unwrap_or_default();
                    return Err(Error::NotSublanguage(spec.alphabet().format_word(&w)));
                };
                let n = pairs.len() as u32;
                let t = *index.entry((k2, p2)).or_insert_with(|| {
                    pairs.push((k2, p2));
                    n
                });
                out.push((e, t));
            }
            edges.push(out);
        }
        Ok(Graph { edges, origin: pairs.iter().map(|&(_, p)| p.0).collect() })
    }

    /// Supremal controllable step. Returns `None` when nothing is removed.
    fn sup_c(&self, plant: &Automaton, euc: &EventSet) -> Option<Graph> {
        let n = self.len();
        let mut bad = vec![false; n];
        let mut stack = Vec::new();
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (s, edges) in self.edges.iter().enumerate() {
            for &(e, t) in edges {
                if euc.contains(e) {
                    preds[t as usize].push(s as u32);
                }
            }
            let p = StateId(self.origin[s]);
            let missing = plant.edges(p).iter().any(|&(e, _)| euc.contains(e) && self.delta(s as u32, e).is_none());
            if missing {
                bad[s] = true;
                stack.push(s as u32);
            }
        }
        if stack.is_empty() {
            return None;
        }
        while let Some(t) = stack.pop() {
            for &s in &preds[t as usize] {
                if !bad[s as usize] {
                    bad[s as usize] = true;
                    stack.push(s);
                }
            }
        }
        Some(self.restrict(|s| !bad[s as usize]))
    }

    /// Supremal normal step: removes every string that looks like a string
    /// of the plant outside the current language. Returns `None` when
    /// nothing is removed.
    fn sup_n(&self, plant: &Automaton, euo: &EventSet, limit: usize) -> Result<Option<Graph>> {
        let n = self.len() as u32;
        // Completed automaton: states < n are ours, n + p is the dead copy
        // of plant state p.
        let step = |x: u32, e: EventId| -> Option<u32> {
            if x < n {
                if let Some(t) = self.delta(x, e) {
                    return Some(t);
                }
                plant.delta(StateId(self.origin[x as usize]), e).map(|p| n + p.0)
            } else {
                plant.delta(StateId(x - n), e).map(|p| n + p.0)
            }
        };
        let moves = |x: u32| -> Vec<EventId> {
            let p = if x < n { StateId(self.origin[x as usize]) } else { StateId(x - n) };
            plant.edges(p).iter().map(|&(e, _)| e).collect()
        };
        let close = |mut set: Vec<u32>| -> Vec<u32> {
            let mut i = 0;
            set.sort_unstable();
            set.dedup();
            let mut seen: hashbrown::HashSet<u32> = set.iter().copied().collect();
            while i < set.len() {
                let x = set[i];
                i += 1;
                for e in moves(x) {
                    if euo.contains(e) {
                        if let Some(y) = step(x, e) {
                            if seen.insert(y) {
                                set.push(y);
                            }
                        }
                    }
                }
            }
            set.sort_unstable();
            set
        };
        // Product of our graph with the observer, built on the fly.
        let mut obs_index: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut obs_sets: Vec<Vec<u32>> = Vec::new();
        let mut obs_succ: Vec<HashMap<EventId, u32>> = Vec::new();
        let mut intern_obs = |set: Vec<u32>, sets: &mut Vec<Vec<u32>>, succ: &mut Vec<HashMap<EventId, u32>>| -> u32 {
            if let Some(&o) = obs_index.get(&set) {
                return o;
            }
            let o = sets.len() as u32;
            obs_index.insert(set.clone(), o);
            sets.push(set);
            succ.push(HashMap::new());
            o
        };
        let o0 = intern_obs(close(vec![0]), &mut obs_sets, &mut obs_succ);
        let is_bad = |o: u32, sets: &Vec<Vec<u32>>| sets[o as usize].last().is_some_and(|&x| x >= n);
        if is_bad(o0, &obs_sets) {
            return Ok(Some(Graph::empty()));
        }
        let mut removed = false;
        let mut index: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs = vec![(0u32, o0)];
        index.insert((0, o0), 0);
        let mut edges: Vec<Vec<(EventId, u32)>> = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (k, o) = pairs[i];
            i += 1;
            let mut out = Vec::new();
            for &(e, k2) in &self.edges[k as usize] {
                let o2 = if euo.contains(e) {
                    o
                } else if let Some(&o2) = obs_succ[o as usize].get(&e) {
                    o2
                } else {
                    let targets: Vec<u32> = obs_sets[o as usize].iter().filter_map(|&x| step(x, e)).collect();
                    let o2 = intern_obs(close(targets), &mut obs_sets, &mut obs_succ);
                    obs_succ[o as usize].insert(e, o2);
                    o2
                };
                if is_bad(o2, &obs_sets) {
                    removed = true;
                    continue;
                }
                if pairs.len() + obs_sets.len() > limit {
                    return Err(Error::BudgetExceeded(limit));
                }
                let m = pairs.len() as u32;
                let t = *index.entry((k2, o2)).or_insert_with(|| {
                    pairs.push((k2, o2));
                    m
                });
                out.push((e, t));
            }
            edges.push(out);
        }
        if !removed {
            return Ok(None);
        }
        let origin = pairs.iter().map(|&(k, _)| self.origin[k as usize]).collect();
        Ok(Some(Graph { edges, origin }))
    }

    /// Coarsest partition compatible with the origins and the transitions.
    fn reduce(&self) -> Graph {
        let n = self.len();
        if n == 0 {
            return Graph::empty();
        }
        let mut class: Vec<u32> = {
            let mut ids: HashMap<u32, u32> = HashMap::new();
            self.origin
                .iter()
                .map(|&o| {
                    let k = ids.len() as u32;
                    *ids.entry(o).or_insert(k)
                })
                .collect()
        };
        let mut count = class.iter().copied().max().map_or(0, |m| m as usize + 1);
        loop {
            let mut ids: HashMap<(u32, Vec<(EventId, u32)>), u32> = HashMap::new();
            let next: Vec<u32> = (0..n)
                .map(|s| {
                    let sig: Vec<(EventId, u32)> = self.edges[s].iter().map(|&(e, t)| (e, class[t as usize])).collect();
                    let k = ids.len() as u32;
                    *ids.entry((class[s], sig)).or_insert(k)
                })
                .collect();
            let new_count = ids.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        // Renumber classes in BFS order from the initial state.
        let mut rep = vec![u32::MAX; count];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([0u32]);
        rep[class[0] as usize] = 0;
        order.push(0u32);
        while let Some(s) = queue.pop_front() {
            for &(_, t) in &self.edges[s as usize] {
                let c = class[t as usize] as usize;
                if rep[c] == u32::MAX {
                    rep[c] = order.len() as u32;
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        let edges = order
            .iter()
            .map(|&s| self.edges[s as usize].iter().map(|&(e, t)| (e, rep[class[t as usize] as usize])).collect())
            .collect();
        let origin = order.iter().map(|&s| self.origin[s as usize]).collect();
        Graph { edges, origin }
    }

    fn to_automaton(&self, alphabet: Arc<crate::events::Alphabet>, name: impl Fn(u32) -> String) -> Result<SupCn> {
        let mut b = AutomatonBuilder::new(alphabet.clone());
        if self.is_empty() {
            return Ok(SupCn { automaton: Automaton::empty(alphabet), plant_states: Vec::new() });
        }
        for s in 0..self.len() as u32 {
            b.add_state(name(s));
        }
        b.set_initial(StateId(0));
        for (s, out) in self.edges.iter().enumerate() {
            for &(e, t) in out {
                b.add_transition(StateId(s as u32), e, StateId(t))?;
            }
        }
        Ok(SupCn { automaton: b.build()?, plant_states: self.origin.iter().map(|&o| StateId(o)).collect() })
    }
}

fn check_inputs(spec: &Automaton, plant: &Automaton, ec: &EventSet, eo: &EventSet) -> Result<()> {
    if !spec.alphabet().same_events(plant.alphabet()) || spec.alphabet().len() != plant.alphabet().len() {
        return Err(Error::AlphabetMismatch("specification and plant declare different events".into()));
    }
    for e in spec.alphabet().ids() {
        if spec.alphabet().name(e) != plant.alphabet().name(e) {
            return Err(Error::AlphabetMismatch("specification and plant order events differently".into()));
        }
    }
    if !ec.is_subset(eo) {
        return Err(Error::ControllableUnobservable);
    }
    if !eo.is_subset(&plant.alphabet().all()) {
        return Err(Error::AlphabetMismatch("observable set is not part of the alphabet".into()));
    }
    Ok(())
}

/// Supremal prefix-closed sublanguage of `L(spec)` that is controllable
/// (uncontrollable events are those outside `ec`) and normal (observable
/// events are `eo`) with respect to `L(plant)`.
pub fn sup_cn(spec: &Automaton, plant: &Automaton, ec: &EventSet, eo: &EventSet) -> Result<SupCn> {
    sup_cn_with(spec, plant, ec, eo, SupAlgorithm::Iterative)
}

pub fn sup_cn_with(
    spec: &Automaton,
    plant: &Automaton,
    ec: &EventSet,
    eo: &EventSet,
    algorithm: SupAlgorithm,
) -> Result<SupCn> {
    sup_cn_limited(spec, plant, ec, eo, algorithm, None)
}

/// [`sup_cn_with`] that gives up with [`Error::BudgetExceeded`] once an
/// intermediate structure grows past `limit` states.
pub fn sup_cn_limited(
    spec: &Automaton,
    plant: &Automaton,
    ec: &EventSet,
    eo: &EventSet,
    algorithm: SupAlgorithm,
    limit: Option<usize>,
) -> Result<SupCn> {
    check_inputs(spec, plant, ec, eo)?;
    let limit = limit.unwrap_or(usize::MAX);
    let all = plant.alphabet().all();
    let euc = all.difference(ec);
    let euo = all.difference(eo);
    let k = Graph::from_spec(spec, plant)?;
    let out = match algorithm {
        SupAlgorithm::Iterative => iterate(k, plant, &euc, &euo, limit)?,
        SupAlgorithm::Partition => partition(&k, plant, &euc, &euo, limit)?,
    };
    let names: Vec<String> = out.origin.iter().map(|&o| plant.state_name(StateId(o)).into()).collect();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let unique: Vec<String> = names
        .iter()
        .map(|n| {
            let c = seen.entry(n.as_str()).or_insert(0);
            *c += 1;
            if *c == 1 {
                n.clone()
            } else {
                format!("{n}#{c}")
            }
        })
        .collect();
    out.to_automaton(plant.shared_alphabet(), |s| unique[s as usize].clone())
}

fn iterate(mut k: Graph, plant: &Automaton, euc: &EventSet, euo: &EventSet, limit: usize) -> Result<Graph> {
    loop {
        let mut changed = false;
        if let Some(next) = k.sup_c(plant, euc) {
            k = next;
            changed = true;
        }
        if k.is_empty() {
            return Ok(k);
        }
        if let Some(next) = k.sup_n(plant, euo, limit)? {
            k = next;
            changed = true;
        }
        if k.is_empty() {
            return Ok(k);
        }
        k = k.reduce();
        if !changed {
            return Ok(k);
        }
    }
}

/// Pruning on `plant || Obs(plant)`, which is a state partition automaton:
/// strings with the same observation reach states of the same observer
/// block. The specification must be a restriction of the plant to a set of
/// states.
fn partition(k: &Graph, plant: &Automaton, euc: &EventSet, euo: &EventSet, limit: usize) -> Result<Graph> {
    let Some(p0) = plant.initial() else {
        return Ok(Graph::empty());
    };
    if k.is_empty() {
        return Ok(Graph::empty());
    }
    let mut in_spec = vec![false; plant.state_count()];
    for &o in &k.origin {
        if core::mem::replace(&mut in_spec[o as usize], true) {
            return Err(Error::Invalid("the partition algorithm needs a state-based specification".into()));
        }
    }
    for (s, &o) in k.origin.iter().enumerate() {
        for &(e, t) in plant.edges(StateId(o)) {
            if in_spec[t.index()] && k.delta(s as u32, e).is_none() {
                return Err(Error::Invalid("the partition algorithm needs a state-based specification".into()));
            }
        }
    }
    let close = |mut set: Vec<StateId>| -> Vec<StateId> {
        set.sort_unstable();
        set.dedup();
        let mut seen: hashbrown::HashSet<StateId> = set.iter().copied().collect();
        let mut i = 0;
        while i < set.len() {
            let x = set[i];
            i += 1;
            for &(e, y) in plant.edges(x) {
                if euo.contains(e) && seen.insert(y) {
                    set.push(y);
                }
            }
        }
        set.sort_unstable();
        set
    };
    let mut blocks: HashMap<Vec<StateId>, u32> = HashMap::new();
    let mut block_sets: Vec<Vec<StateId>> = Vec::new();
    let mut block_succ: Vec<HashMap<EventId, u32>> = Vec::new();
    let b0 = close(vec![p0]);
    blocks.insert(b0.clone(), 0);
    block_sets.push(b0);
    block_succ.push(HashMap::new());
    let mut index: HashMap<(StateId, u32), u32> = HashMap::new();
    let mut pairs = vec![(p0, 0u32)];
    index.insert((p0, 0), 0);
    let mut edges: Vec<Vec<(EventId, u32)>> = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (x, b) = pairs[i];
        i += 1;
        let mut out = Vec::new();
        for &(e, y) in plant.edges(x) {
            let b2 = if euo.contains(e) {
                b
            } else if let Some(&b2) = block_succ[b as usize].get(&e) {
                b2
            } else {
                let targets: Vec<StateId> = block_sets[b as usize].iter().filter_map(|&z| plant.delta(z, e)).collect();
                let set = close(targets);
                let next = block_sets.len() as u32;
                let b2 = *blocks.entry(set.clone()).or_insert_with(|| {
                    block_sets.push(set);
                    block_succ.push(HashMap::new());
                    next
                });
                block_succ[b as usize].insert(e, b2);
                b2
            };
            if pairs.len() + block_sets.len() > limit {
                return Err(Error::BudgetExceeded(limit));
            }
            let m = pairs.len() as u32;
            let t = *index.entry((y, b2)).or_insert_with(|| {
                pairs.push((y, b2));
                m
            });
            out.push((e, t));
        }
        edges.push(out);
    }
    let refined = Graph { edges, origin: pairs.iter().map(|&(x, _)| x.0).collect() };
    let block_of: Vec<u32> = pairs.iter().map(|&(_, b)| b).collect();
    let n = refined.len();
    let mut kept: Vec<bool> = refined.origin.iter().map(|&o| in_spec[o as usize]).collect();
    loop {
        let mut changed = false;
        let mut acc = vec![false; n];
        if kept[0] {
            acc[0] = true;
            let mut stack = vec![0u32];
            while let Some(s) = stack.pop() {
                for &(_, t) in &refined.edges[s as usize] {
                    if kept[t as usize] && !acc[t as usize] {
                        acc[t as usize] = true;
                        stack.push(t);
                    }
                }
            }
        }
        for s in 0..n {
            let bad = !acc[s] || refined.edges[s].iter().any(|&(e, t)| euc.contains(e) && !kept[t as usize]);
            if kept[s] && bad {
                kept[s] = false;
                changed = true;
            }
        }
        let mut bad_block = vec![false; block_sets.len()];
        for s in 0..n {
            if !kept[s] {
                bad_block[block_of[s] as usize] = true;
            }
        }
        for s in 0..n {
            if kept[s] && bad_block[block_of[s] as usize] {
                kept[s] = false;
                changed = true;
            }
        }
        if !changed || !kept[0] {
            break;
        }
    }
    Ok(refined.restrict(|s| kept[s as usize]))
}

/// Runs the whole pipeline: arena, specification, supremal sublanguage.
pub fn synthesize(g: &Automaton, a: &AttackModel) -> Result<SupArena> {
    synthesize_with(g, a, SynthesisOptions::default())
}

pub fn synthesize_with(g: &Automaton, a: &AttackModel, options: SynthesisOptions) -> Result<SupArena> {
    let arena = build_arena_with(g, a, options.arena)?;
    synthesize_from_arena_with(&arena, &options)
}

/// Meta-synthesis on an already built arena.
pub fn synthesize_from_arena(arena: &Arena, algorithm: SupAlgorithm) -> Result<SupArena> {
    synthesize_from_arena_with(arena, &SynthesisOptions { algorithm, ..Default::default() })
}

/// As [`synthesize_from_arena`]; `options.arena` is ignored.
pub fn synthesize_from_arena_with(arena: &Arena, options: &SynthesisOptions) -> Result<SupArena> {
    let trimmed = meta_trim(arena, &arena.context().plant().crit_states())?;
    let (ec, eo) = meta_events(arena);
    let sup = sup_cn_limited(trimmed.automaton(), arena.automaton(), &ec, &eo, options.algorithm, options.max_states)?;
    let labels = sup.plant_states.iter().map(|&q| arena.label(q).clone()).collect();
    let automaton = sup.automaton;
    // Name states after their arena nodes.
    let mut b = AutomatonBuilder::new(arena.context().meta().clone());
    let mut counts: HashMap<StateId, usize> = HashMap::new();
    for (s, &q) in sup.plant_states.iter().enumerate() {
        let c = counts.entry(q).or_insert(0);
        *c += 1;
        let base = arena.node_name(q);
        let id = b.add_state(if *c == 1 { base } else { format!("{base}#{c}") });
        debug_assert_eq!(id.index(), s);
    }
    if let Some(x0) = automaton.initial() {
        b.set_initial(x0);
    }
    for (x, e, y) in automaton.transitions() {
        b.add_transition(x, e, y)?;
    }
    Arena::from_parts(b.build()?, labels, arena.context().clone())
}

/// Controllable and observable meta events: every decision except the one
/// enabling only uncontrollable events is controllable; edits are
/// unobservable.
pub fn meta_events(arena: &Arena) -> (EventSet, EventSet) {
    let ctx = arena.context();
    let ec: EventSet = ctx.decision_events().filter(|&d| d != ctx.minimal_decision()).collect();
    let eo = ctx.meta().all().difference(&ctx.edits());
    (ec, eo)
}

/// Whether some supervisor is robust against `a`.
pub fn exists_robust(g: &Automaton, a: &AttackModel) -> Result<bool> {
    Ok(!synthesize(g, a)?.is_empty())
}

/// Outcome of [`check_properties`]; `None` means the property holds,
/// otherwise the field holds a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyReport {
    /// A string `s·e` of `L(l)` outside `L(k)` with `s ∈ L(k)` and `e`
    /// uncontrollable.
    pub controllability: Option<Word>,
    /// A string of `P⁻¹(P(L(k))) ∩ L(l)` outside `L(k)`.
    pub normality: Option<Word>,
}

impl PropertyReport {
    pub fn holds(&self) -> bool {
        self.controllability.is_none() && self.normality.is_none()
    }
}

/// Decides controllability and normality of `L(k) ⊆ L(l)`.
pub fn check_properties(k: &Automaton, l: &Automaton, ec: &EventSet, eo: &EventSet) -> Result<PropertyReport> {
    check_inputs(k, l, ec, eo)?;
    if let Some(w) = language_excess(k, l)? {
        return Err(Error::NotSublanguage(k.alphabet().format_word(&w)));
    }
    let euc = l.alphabet().all().difference(ec);
    let mut controllability = None;
    if let (Some(k0), Some(l0)) = (k.initial(), l.initial()) {
        let mut parent: HashMap<Pair, Option<(Pair, EventId)>> = HashMap::new();
        parent.insert((k0, l0), None);
        let mut queue = VecDeque::from([(k0, l0)]);
        'bfs: while let Some((x, y)) = queue.pop_front() {
            for &(e, y2) in l.edges(y) {
                match k.delta(x, e) {
                    Some(x2) => {
                        if let hashbrown::hash_map::Entry::Vacant(v) = parent.entry((x2, y2)) {
                            v.insert(Some(((x, y), e)));
                            queue.push_back((x2, y2));
                        }
                    }
                    None if euc.contains(e) => {
                        let mut w = vec![e];
                        let mut cur = (x, y);
                        while let Some(Some((prev, ev))) = parent.get(&cur) {
                            w.push(*ev);
                            cur = *prev;
                        }
                        w.reverse();
                        controllability = Some(w);
                        break 'bfs;
                    }
                    None => {}
                }
            }
        }
    }
    let unobs = l.alphabet().all().difference(eo);
    let pk = observer(k, &unobs)?;
    let closure = compose_parallel(&pk.automaton, l)?;
    let rebound = crate::attack::rebind(&closure.automaton, l.shared_alphabet())?;
    let cmp = language_equal(&rebound, k)?;
    Ok(PropertyReport { controllability, normality: cmp.witness })
}
