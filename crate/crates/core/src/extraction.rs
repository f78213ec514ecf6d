//! Extraction of concrete supervisors from a solution arena.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use hashbrown::{HashMap, HashSet};

use crate::arena::SupArena;
use crate::automaton::{Automaton, AutomatonBuilder, StateId, StateSet};
use crate::compose::compose_parallel;
use crate::error::{Error, Result};
use crate::events::EventId;
use crate::supervisor::SupervisorRealization;

/// Which decision wins among the maximal ones at a state. Decisions are
/// ranked by cardinality, then by their bit encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    Highest,
    Lowest,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExtractionMode {
    #[default]
    Maximal,
    Reward,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtractionPolicy {
    pub mode: ExtractionMode,
    pub tie_break: TieBreak,
    pub enumerate: bool,
    pub reward_c: f64,
    /// Cap on the number of choice assignments examined.
    pub budget: usize,
}

impl Default for ExtractionPolicy {
    fn default() -> Self {
        ExtractionPolicy {
            mode: ExtractionMode::Maximal,
            tie_break: TieBreak::Highest,
            enumerate: false,
            reward_c: 1.0,
            budget: 100_000,
        }
    }
}

impl ExtractionPolicy {
    pub fn check(&self) -> Result<()> {
        if !(self.reward_c >= 0.0 && self.reward_c.is_finite()) {
            return Err(Error::Invalid(alloc::format!(
                "reward constant must be finite and nonnegative, got {}",
                self.reward_c
            )));
        }
        Ok(())
    }
}

/// Supervisor states of the arena that the same observation can lead to,
/// sorted. The walk works on these blocks: an observed event may stem from
/// a legitimate move or from an insertion, and the supervisor cannot tell.
type Block = Vec<StateId>;

/// Choice of decision per visited block.
type Assignment = BTreeMap<Block, EventId>;

fn rank(sup: &SupArena, mut avail: Vec<EventId>, tie_break: TieBreak) -> Vec<EventId> {
    let ctx = sup.context();
    let set = |d: EventId| ctx.decision_set(d).expect("decision");
    avail.retain(|e| ctx.decision_set(*e).is_some());
    let mut max: Vec<EventId> =
        avail.iter().copied().filter(|&d| !avail.iter().any(|&o| set(d).is_proper_subset(set(o)))).collect();
    max.sort_by_key(|&a| (set(a).len(), a));
    if tie_break == TieBreak::Highest {
        max.reverse();
    }
    max
}

/// Maximal decisions at an arena state, best first under `tie_break`.
pub fn maximal_decisions(sup: &SupArena, x: StateId, tie_break: TieBreak) -> Vec<EventId> {
    rank(sup, sup.automaton().edges(x).iter().map(|&(e, _)| e).collect(), tie_break)
}

/// Observation-level view of a solution arena with memoized closures.
struct Blocks<'a> {
    sup: &'a SupArena,
    closures: HashMap<(Block, EventId), Block>,
}

impl<'a> Blocks<'a> {
    fn new(sup: &'a SupArena) -> Self {
        Blocks { sup, closures: HashMap::new() }
    }

    /// States reachable from `start` through edits, sorted.
    fn hidden_closure(&self, start: Vec<StateId>) -> Block {
        let aut = self.sup.automaton();
        let edits = self.sup.context().edits();
        let mut seen: HashSet<StateId> = start.iter().copied().collect();
        let mut out: Block = seen.iter().copied().collect();
        let mut i = 0;
        while i < out.len() {
            for &(e, y) in aut.edges(out[i]) {
                if edits.contains(e) && seen.insert(y) {
                    out.push(y);
                }
            }
            i += 1;
        }
        out.sort_unstable();
        out
    }

    /// Block after issuing decision `d` in `block` and observing plant
    /// event `e`; empty if `e` cannot be observed.
    fn successor(&self, block: &[StateId], e: EventId, d: EventId) -> Block {
        let Some(m) = self.sup.context().meta_of_plant(e) else { return Vec::new() };
        let aut = self.sup.automaton();
        let env = self.hidden_closure(block.iter().filter_map(|&x| aut.delta(x, d)).collect());
        self.hidden_closure(env.iter().filter_map(|&q| aut.delta(q, m)).collect())
    }

    /// States the supervisor cannot tell apart from `block` while it
    /// issues `d`: observations of events outside `d` can only come from
    /// insertions, and the supervisor ignores them.
    fn ignored_closure(&mut self, block: &Block, d: EventId) -> Block {
        let key = (block.clone(), d);
        if let Some(c) = self.closures.get(&key) {
            return c.clone();
        }
        let ctx = self.sup.context();
        let plant = ctx.plant().alphabet();
        let ignored: Vec<EventId> = plant
            .legit()
            .intersection(&plant.observable())
            .difference(ctx.decision_set(d).expect("decision"))
            .iter()
            .collect();
        let mut all: HashSet<StateId> = block.iter().copied().collect();
        let mut frontier = block.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &e in &ignored {
                next.extend(self.successor(&frontier, e, d).into_iter().filter(|y| all.insert(*y)));
            }
            frontier = next;
        }
        let mut out: Block = all.into_iter().collect();
        out.sort_unstable();
        self.closures.insert(key, out.clone());
        out
    }

    /// Decisions that can be issued in `block`, best first: offered at
    /// every state the supervisor confuses with it, and maximal among those.
    fn decisions(&mut self, block: &Block, tie_break: TieBreak) -> Vec<EventId> {
        let aut = self.sup.automaton();
        let offered = |set: &[StateId], d: EventId| set.iter().all(|&x| aut.delta(x, d).is_some());
        let candidates: Vec<EventId> = aut
            .active(block[0])
            .iter()
            .filter(|&d| self.sup.context().decision_set(d).is_some() && offered(block, d))
            .collect();
        let usable = candidates.into_iter().filter(|&d| offered(&self.ignored_closure(block, d), d)).collect();
        rank(self.sup, usable, tie_break)
    }

    /// Block reached from `block` under `d` on the observation `e`.
    fn next(&mut self, block: &Block, e: EventId, d: EventId) -> Block {
        let closed = self.ignored_closure(block, d);
        self.successor(&closed, e, d)
    }
}

/// Depth-first walk choosing decisions with `choose`. Returns the visited
/// blocks in discovery order, their decisions, and the first block for
/// which `choose` gave nothing.
fn walk(
    blocks: &mut Blocks<'_>,
    mut choose: impl FnMut(&mut Blocks<'_>, &Block) -> Option<EventId>,
) -> (Vec<Block>, Vec<EventId>, Option<Block>) {
    let sup = blocks.sup;
    let plant = sup.context().plant().alphabet();
    let x0 = vec![sup.initial().expect("nonempty")];
    let mut order = Vec::new();
    let mut decisions = Vec::new();
    let mut seen: HashMap<Block, ()> = HashMap::new();
    let Some(d0) = choose(blocks, &x0) else {
        return (order, decisions, Some(x0));
    };
    seen.insert(x0.clone(), ());
    order.push(x0.clone());
    decisions.push(d0);
    // Explicit stack of (block, decision, remaining events) emulating the
    // recursive procedure.
    let events_of = |d: EventId| -> Vec<EventId> {
        sup.context().decision_set(d).expect("decision").iter().filter(|&e| plant.is_observable(e)).collect()
    };
    let mut stack = vec![(x0, d0, events_of(d0), 0usize)];
    while let Some(top) = stack.last_mut() {
        let (ref x, d, ref evs, ref mut i) = *top;
        if *i == evs.len() {
            stack.pop();
            continue;
        }
        let e = evs[*i];
        *i += 1;
        let x = x.clone();
        let y = blocks.next(&x, e, d);
        if y.is_empty() || seen.contains_key(&y) {
            continue;
        }
        let Some(dy) = choose(blocks, &y) else {
            return (order, decisions, Some(y));
        };
        seen.insert(y.clone(), ());
        order.push(y.clone());
        decisions.push(dy);
        stack.push((y, dy, events_of(dy), 0));
    }
    (order, decisions, None)
}

fn block_name(sup: &SupArena, block: &[StateId]) -> String {
    let names: Vec<&str> = block.iter().map(|&x| sup.automaton().state_name(x)).collect();
    names.join("+")
}

fn realize(blocks: &mut Blocks<'_>, order: &[Block], decisions: &[EventId]) -> Result<SupervisorRealization> {
    let sup = blocks.sup;
    let ctx = sup.context();
    let alphabet = ctx.plant().shared_alphabet();
    let index: HashMap<&Block, u32> = order.iter().enumerate().map(|(i, x)| (x, i as u32)).collect();
    let mut b = AutomatonBuilder::new(alphabet.clone());
    for x in order {
        b.add_state(block_name(sup, x));
    }
    b.set_initial(StateId(0));
    for (i, (x, &d)) in order.iter().zip(decisions).enumerate() {
        let src = StateId(i as u32);
        for e in ctx.decision_set(d).expect("decision").iter() {
            // An enabled event that cannot be observed from here gets a
            // self-loop so the active events stay equal to the decision.
            let dst = if alphabet.is_observable(e) {
                let y = blocks.next(x, e, d);
                if y.is_empty() {
                    src
                } else {
                    StateId(index[&y])
                }
            } else {
                src
            };
            b.add_transition(src, e, dst)?;
        }
    }
    SupervisorRealization::new(b.build()?)
}

/// One supervisor by the maximal-decision walk, choosing with the policy's
/// tie break.
pub fn extract_supervisor(sup: &SupArena, policy: &ExtractionPolicy) -> Result<SupervisorRealization> {
    policy.check()?;
    if sup.is_empty() {
        return Err(Error::NoRobustSupervisor);
    }
    let mut blocks = Blocks::new(sup);
    let (order, decisions, stuck) = walk(&mut blocks, |b, x| b.decisions(x, policy.tie_break).first().copied());
    if let Some(x) = stuck {
        return Err(Error::Invalid(alloc::format!("arena state `{}` offers no decision", block_name(sup, &x))));
    }
    realize(&mut blocks, &order, &decisions)
}

/// All supervisors obtainable by choosing one maximal decision at each
/// visited state, in tie-break order. The flag is false when the budget
/// cut the enumeration short.
pub fn enumerate_supervisors(sup: &SupArena, policy: &ExtractionPolicy) -> Result<(Vec<SupervisorRealization>, bool)> {
    policy.check()?;
    if sup.is_empty() {
        return Err(Error::NoRobustSupervisor);
    }
    let mut blocks = Blocks::new(sup);
    let mut out = Vec::new();
    let mut pending: Vec<Assignment> = vec![Assignment::new()];
    let mut complete = true;
    while let Some(assign) = pending.pop() {
        if out.len() >= policy.budget {
            complete = false;
            break;
        }
        // Blocks outside the assignment take their preferred decision; each
        // other choice becomes a pending assignment that fixes every
        // earlier default.
        let mut fixed = assign.clone();
        let mut alternatives = Vec::new();
        let (order, decisions, stuck) = walk(&mut blocks, |b, x| {
            if let Some(&d) = assign.get(x) {
                return Some(d);
            }
            let choices = b.decisions(x, policy.tie_break);
            let (&first, rest) = choices.split_first()?;
            for &d in rest.iter().rev() {
                let mut next = fixed.clone();
                next.insert(x.clone(), d);
                alternatives.push(next);
            }
            fixed.insert(x.clone(), first);
            Some(first)
        });
        if let Some(x) = stuck {
            return Err(Error::Invalid(alloc::format!("arena state `{}` offers no decision", block_name(sup, &x))));
        }
        out.push(realize(&mut blocks, &order, &decisions)?);
        pending.extend(alternatives);
    }
    Ok((out, complete))
}

/// Total reward: `-∞` absorbs every other term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reward {
    NegInf,
    Finite(f64),
}

impl PartialOrd for Reward {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Reward::NegInf, Reward::NegInf) => Some(Ordering::Equal),
            (Reward::NegInf, _) => Some(Ordering::Less),
            (_, Reward::NegInf) => Some(Ordering::Greater),
            (Reward::Finite(a), Reward::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for Reward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reward::NegInf => f.write_str("-inf"),
            Reward::Finite(v) => write!(f, "{v}"),
        }
    }
}

/// `G || R` with the plant component of each product state.
fn supervised(g: &Automaton, r: &SupervisorRealization) -> Result<(Automaton, Vec<StateId>)> {
    let p = compose_parallel(g, r.automaton())?;
    let plant = p.pairs.iter().map(|&(x, _)| x).collect();
    Ok((p.automaton, plant))
}

/// States of `G || R` that reach a deadlock through unobservable events.
pub fn x_dead(g: &Automaton, r: &SupervisorRealization) -> Result<StateSet> {
    let (gr, _) = supervised(g, r)?;
    Ok(dead_states(&gr))
}

fn dead_states(gr: &Automaton) -> StateSet {
    let al = gr.alphabet();
    let n = gr.state_count();
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    let mut dead = vec![false; n];
    let mut stack = Vec::new();
    for x in gr.states() {
        if gr.edges(x).is_empty() {
            dead[x.index()] = true;
            stack.push(x);
        }
        for &(e, y) in gr.edges(x) {
            if !al.is_observable(e) {
                preds[y.index()].push(x);
            }
        }
    }
    while let Some(y) = stack.pop() {
        for &x in &preds[y.index()] {
            if !dead[x.index()] {
                dead[x.index()] = true;
                stack.push(x);
            }
        }
    }
    StateSet::from_vec(gr.states().filter(|x| dead[x.index()]).collect())
}

/// Sum of the per-state rewards over `G || R`: `-∞` on critical plant
/// states, 0 on states that may deadlock unobservably, `c` elsewhere.
pub fn reward_total(g: &Automaton, r: &SupervisorRealization, c: f64) -> Result<Reward> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Invalid(alloc::format!("reward constant must be finite and nonnegative, got {c}")));
    }
    let (gr, plant) = supervised(g, r)?;
    let dead = dead_states(&gr);
    let mut total = 0.0;
    for x in gr.states() {
        if g.is_crit(plant[x.index()]) {
            return Ok(Reward::NegInf);
        }
        if !dead.contains(x) {
            total += c;
        }
    }
    Ok(Reward::Finite(total))
}

/// Result of [`extract_max_reward`].
#[derive(Clone, Debug)]
pub struct RewardChoice {
    pub supervisor: SupervisorRealization,
    pub reward: Reward,
    /// False when the search budget ran out before all choices were seen.
    pub complete: bool,
}

/// Among the maximal-decision extractions, one with the largest total
/// reward; earlier candidates in tie-break order win ties.
pub fn extract_max_reward(sup: &SupArena, g: &Automaton, policy: &ExtractionPolicy) -> Result<RewardChoice> {
    let (all, complete) = enumerate_supervisors(sup, policy)?;
    let mut best: Option<(SupervisorRealization, Reward)> = None;
    for r in all {
        let v = reward_total(g, &r, policy.reward_c)?;
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((r, v));
        }
    }
    let (supervisor, reward) = best.ok_or(Error::NoRobustSupervisor)?;
    Ok(RewardChoice { supervisor, reward, complete })
}

/// Dispatches on the policy mode.
pub fn extract(sup: &SupArena, g: &Automaton, policy: &ExtractionPolicy) -> Result<SupervisorRealization> {
    match policy.mode {
        ExtractionMode::Maximal => extract_supervisor(sup, policy),
        ExtractionMode::Reward => Ok(extract_max_reward(sup, g, policy)?.supervisor),
    }
}
