//! Random instances and the property checks shared by the integration
//! suites. Every check returns `Err` with a readable description of the
//! first violation.

#![allow(dead_code)]

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robsup_core::*;

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const NAMES: [&str; 4] = ["a", "b", "c", "d"];

/// Plant alphabet with 2..=4 events; controllable events are observable and
/// at least one observable event is compromised.
pub fn alphabet(rng: &mut impl Rng) -> Alphabet {
    let n = rng.gen_range(2..=4);
    let mut flags: Vec<(bool, bool)> = (0..n)
        .map(|_| {
            let o = rng.gen_bool(0.75);
            (o && rng.gen_bool(0.6), o)
        })
        .collect();
    let target = rng.gen_range(0..n);
    flags[target].1 = true;
    let mut al = Alphabet::new();
    let mut ids = Vec::new();
    for (i, &(c, o)) in flags.iter().enumerate() {
        ids.push(al.add_event(NAMES[i], c, o).unwrap());
    }
    al.set_compromised(ids[target]).unwrap();
    for (i, &(_, o)) in flags.iter().enumerate() {
        if i != target && o && rng.gen_bool(0.25) {
            al.set_compromised(ids[i]).unwrap();
        }
    }
    al
}

/// Random deterministic automaton on `n` states; each state defines each
/// event with probability `density`.
pub fn automaton(rng: &mut impl Rng, al: Arc<Alphabet>, n: usize, density: f64) -> AutomatonBuilder {
    let mut b = AutomatonBuilder::new(al.clone());
    for i in 0..n {
        b.add_state(i.to_string());
    }
    b.set_initial(StateId(0));
    for x in 0..n {
        for e in al.ids() {
            if rng.gen_bool(density) {
                let y = rng.gen_range(0..n);
                b.add_transition(StateId(x as u32), e, StateId(y as u32)).unwrap();
            }
        }
    }
    b
}

/// Plant with at most 6 states; non-initial states are critical with
/// probability 0.2.
pub fn plant(rng: &mut impl Rng) -> Automaton {
    let al = Arc::new(alphabet(rng));
    let n = rng.gen_range(1..=6);
    let mut b = automaton(rng, al, n, 0.5);
    for x in 1..n {
        if rng.gen_bool(0.2) {
            b.mark_crit(StateId(x as u32));
        }
    }
    b.build().unwrap()
}

/// Admissible supervisor with at most 3 states: every uncontrollable event
/// is enabled, observable events move to random states, unobservable ones
/// loop.
pub fn supervisor(rng: &mut impl Rng, al: Arc<Alphabet>) -> SupervisorRealization {
    let n = rng.gen_range(1..=3);
    let mut b = AutomatonBuilder::new(al.clone());
    for i in 0..n {
        b.add_state(i.to_string());
    }
    b.set_initial(StateId(0));
    for x in 0..n {
        let x = StateId(x as u32);
        for e in al.ids() {
            if al.is_controllable(e) && rng.gen_bool(0.4) {
                continue;
            }
            let y = if al.is_observable(e) { StateId(rng.gen_range(0..n) as u32) } else { x };
            b.add_transition(x, e, y).unwrap();
        }
    }
    SupervisorRealization::new(b.build().unwrap()).unwrap()
}

/// All-out, bounded, or a random automaton over the edit alphabet whose
/// states are each complete or insertion-only.
pub fn attack(rng: &mut impl Rng, plant: &Alphabet) -> AttackModel {
    match rng.gen_range(0..4) {
        0 => build_all_out(plant),
        1 => build_bounded(plant, rng.gen_range(0..=2), rng.gen_range(0..=2)),
        _ => random_attack(rng, plant),
    }
}

fn random_attack(rng: &mut impl Rng, plant: &Alphabet) -> AttackModel {
    let edit = Arc::new(plant.edit_alphabet());
    let n = rng.gen_range(1..=3);
    let mut b = AutomatonBuilder::new(edit.clone());
    for i in 0..n {
        b.add_state(i.to_string());
    }
    b.set_initial(StateId(0));
    let insertions: Vec<EventId> = edit.insertions().iter().collect();
    for x in 0..n {
        let x = StateId(x as u32);
        let to = |rng: &mut dyn rand::RngCore| StateId(rng.gen_range(0..n) as u32);
        let insertion_only = rng.gen_bool(0.2);
        if !insertion_only {
            for e in edit.legit().iter() {
                if edit.is_compromised(e) {
                    let del = edit.deletion_of(e).unwrap();
                    match rng.gen_range(0..3) {
                        0 => b.add_transition(x, e, to(rng)).unwrap(),
                        1 => b.add_transition(x, del, to(rng)).unwrap(),
                        _ => {
                            b.add_transition(x, e, to(rng)).unwrap();
                            b.add_transition(x, del, to(rng)).unwrap();
                        }
                    }
                } else {
                    b.add_transition(x, e, to(rng)).unwrap();
                }
            }
        }
        let mut any = false;
        for &i in &insertions {
            if rng.gen_bool(0.4) {
                b.add_transition(x, i, to(rng)).unwrap();
                any = true;
            }
        }
        if insertion_only && !any {
            let i = *insertions.choose(rng).unwrap();
            b.add_transition(x, i, to(rng)).unwrap();
        }
    }
    AttackModel::new(&b.build().unwrap(), plant).unwrap()
}

/// A plant, supervisor and attack drawn from `seed`.
pub fn triple(seed: u64) -> (Automaton, SupervisorRealization, AttackModel) {
    let mut r = rng(seed);
    let g = plant(&mut r);
    let sup = supervisor(&mut r, g.shared_alphabet());
    let a = attack(&mut r, g.alphabet());
    (g, sup, a)
}

/// Decorated observations of the attacked closed loop up to `max_len`
/// events. For each one, the arena fold must be defined, its estimate must
/// match the search and fold estimates, and its attacker component must be
/// the attacker state. Returns the number of strings checked.
pub fn prop1(g: &Automaton, r: &SupervisorRealization, a: &AttackModel, max_len: usize) -> Result<usize, String> {
    let cl = closed_loop(g, r, a).map_err(|e| e.to_string())?;
    let arena = build_arena(g, a).map_err(|e| e.to_string())?;
    let ga = attacked_plant(g);
    let ctx = arena.context().clone();
    let al = cl.automaton.alphabet();
    let hidden = al.unobservable();
    let attack_al = a.alphabet();
    let gamma_of = |rx: StateId| ctx.decision_event(r.decision(rx).events()).ok_or("decision outside the arena");
    let uo_of = |rx: StateId| -> EventSet { r.decision(rx).events().intersection(&g.alphabet().unobservable()) };
    let Some(c0) = cl.automaton.initial() else { return Ok(0) };

    struct Frame {
        word: Word,
        set: Vec<StateId>,
        est: StateSet,
        rx: StateId,
        gammas: Vec<EventId>,
    }
    let close = |start: Vec<StateId>| -> Vec<StateId> {
        let mut out = start;
        let mut i = 0;
        while i < out.len() {
            for &(e, y) in cl.automaton.edges(out[i]) {
                if hidden.contains(e) && !out.contains(&y) {
                    out.push(y);
                }
            }
            i += 1;
        }
        out.sort();
        out
    };
    let rx0 = r.initial();
    let est0 = unobservable_reach(&ga, &[ga.initial().unwrap()], &uo_of(rx0)).map_err(|e| e.to_string())?;
    let mut stack =
        vec![Frame { word: vec![], set: close(vec![c0]), est: est0, rx: rx0, gammas: vec![gamma_of(rx0)?] }];
    let mut checked = 0;
    while let Some(f) = stack.pop() {
        checked += 1;
        let show = || al.format_word(&f.word);
        let searched = StateSet::from_vec(f.set.iter().map(|&x| cl.plant_state(x)).collect());
        if searched != f.est {
            return Err(format!("{}: search gives {searched:?}, fold gives {:?}", show(), f.est));
        }
        if f.word.len() <= 3 {
            let lib_search = re_by_search(&cl, &f.word);
            let lib_fold = re_by_fold(g, r, &f.word, al).map_err(|e| e.to_string())?;
            if lib_search != searched || lib_fold != searched {
                return Err(format!("{}: estimate {searched:?}, library {lib_search:?} / {lib_fold:?}", show()));
            }
        }
        let meta: Vec<EventId> = f.word.iter().map(|&e| ctx.meta().lookup(al.name(e)).unwrap()).collect();
        let path =
            arena.fold_h2(&meta, &f.gammas).map_err(|i| format!("{}: fold undefined after {i} events", show()))?;
        let node = arena.label(*path.last().unwrap());
        if node.i1() != &searched {
            return Err(format!("{}: arena estimate {:?}, expected {searched:?}", show(), node.i1()));
        }
        let in_attack: Vec<EventId> = f.word.iter().map(|&e| attack_al.lookup(al.name(e)).unwrap()).collect();
        let xa = a.automaton().run(a.initial(), &in_attack).ok_or_else(|| format!("{}: attacker undefined", show()))?;
        if node.i2() != xa {
            return Err(format!("{}: arena attacker state {:?}, expected {xa:?}", show(), node.i2()));
        }
        if f.set.iter().any(|&x| cl.attacker[x.index()] != xa) {
            return Err(format!("{}: closed loop disagrees on the attacker state", show()));
        }
        if f.word.len() == max_len {
            continue;
        }
        let mut events: Vec<EventId> = f
            .set
            .iter()
            .flat_map(|&x| cl.automaton.edges(x).iter().map(|&(e, _)| e))
            .filter(|&e| !hidden.contains(e))
            .collect();
        events.sort();
        events.dedup();
        for e in events {
            let next: Vec<StateId> = f.set.iter().filter_map(|&x| cl.automaton.delta(x, e)).collect();
            let mut next = close(next);
            next.dedup();
            let rx = match al.supervisor_projection(e) {
                Some(seen) => r.delta_complete(f.rx, g.alphabet().lookup(al.name(seen)).unwrap()).unwrap(),
                None => f.rx,
            };
            let moved: Vec<StateId> = f.est.iter().filter_map(|x| ga.delta(x, e)).collect();
            let est = unobservable_reach(&ga, &moved, &uo_of(rx)).map_err(|e| e.to_string())?;
            let mut word = f.word.clone();
            word.push(e);
            let mut gammas = f.gammas.clone();
            gammas.push(gamma_of(rx)?);
            stack.push(Frame { word, set: next, est, rx, gammas });
        }
    }
    Ok(checked)
}

/// A random meta-style instance: plant `l`, a state-based specification
/// `k` over the same alphabet, controllable and observable sets with
/// `ec ⊆ eo`.
pub struct MetaInstance {
    pub l: Automaton,
    pub k: Automaton,
    pub ec: EventSet,
    pub eo: EventSet,
}

pub fn meta_instance(seed: u64) -> MetaInstance {
    let mut r = rng(seed);
    let n_events = r.gen_range(2..=4);
    let mut al = Alphabet::new();
    for name in &NAMES[..n_events] {
        let o = r.gen_bool(0.6);
        al.add_event(name, o && r.gen_bool(0.6), o).unwrap();
    }
    let al = Arc::new(al);
    let n = r.gen_range(2..=5);
    let l = automaton(&mut r, al.clone(), n, 0.65).build().unwrap();
    let bad: Vec<StateId> = (1..n).filter(|_| r.gen_bool(0.25)).map(|x| StateId(x as u32)).collect();
    let (k, _) = l.restrict(|x| !bad.contains(&x));
    let k = k.accessible();
    MetaInstance { ec: al.controllable(), eo: al.observable(), l, k }
}

/// Meta-instance cut out of a random arena: the arena is the plant and the
/// trimmed arena the specification.
pub fn arena_instance(seed: u64) -> Option<MetaInstance> {
    let mut r = rng(seed);
    let g = plant(&mut r);
    let a = attack(&mut r, g.alphabet());
    let arena = build_arena(&g, &a).ok()?;
    if arena.state_count() > 400 {
        return None;
    }
    let (ec, eo) = meta_events(&arena);
    let k = meta_trim(&arena, &g.crit_states()).ok()?.into_automaton();
    Some(MetaInstance { l: arena.into_automaton(), k, ec, eo })
}

/// Controllability, normality, inclusion in the specification, fixpoint and
/// agreement of the two algorithms.
pub fn sup_cn_sound(m: &MetaInstance) -> Check {
    let it = sup_cn_with(&m.k, &m.l, &m.ec, &m.eo, SupAlgorithm::Iterative).map_err(|e| e.to_string())?;
    let pa = sup_cn_with(&m.k, &m.l, &m.ec, &m.eo, SupAlgorithm::Partition).map_err(|e| e.to_string())?;
    for (name, s) in [("iterative", &it), ("partition", &pa)] {
        let report = check_properties(&s.automaton, &m.l, &m.ec, &m.eo).map_err(|e| format!("{name}: {e}"))?;
        if !report.holds() {
            return Err(format!("{name}: {report:?}"));
        }
        if !language_included(&s.automaton, &m.k).map_err(|e| e.to_string())? {
            return Err(format!("{name}: result leaves the specification"));
        }
        let again =
            sup_cn_with(&s.automaton, &m.l, &m.ec, &m.eo, SupAlgorithm::Iterative).map_err(|e| e.to_string())?;
        if !language_equal(&again.automaton, &s.automaton).map_err(|e| e.to_string())?.equal {
            return Err(format!("{name}: not a fixpoint"));
        }
        if s.plant_states.iter().any(|p| p.index() >= m.l.state_count()) {
            return Err(format!("{name}: plant state out of range"));
        }
    }
    if !language_equal(&it.automaton, &pa.automaton).map_err(|e| e.to_string())?.equal {
        return Err("iterative and partition results differ".into());
    }
    Ok(())
}

/// Refinement of the specification by the plant's observer: states are
/// pairs of a specification state and the set of plant states consistent
/// with the observation so far.
fn refine(m: &MetaInstance) -> Automaton {
    let al = m.l.shared_alphabet();
    let uo = al.all().difference(&m.eo);
    let mut b = AutomatonBuilder::new(al.clone());
    let (Some(k0), Some(l0)) = (m.k.initial(), m.l.initial()) else {
        return b.build().unwrap();
    };
    let block0 = unobservable_reach(&m.l, &[l0], &uo).unwrap();
    let mut index = std::collections::HashMap::new();
    let mut todo = vec![(k0, block0.clone())];
    index.insert((k0, block0), StateId(0));
    b.add_state("0");
    b.set_initial(StateId(0));
    while let Some((k, block)) = todo.pop() {
        let src = index[&(k, block.clone())];
        for &(e, k2) in m.k.edges(k) {
            let next = if uo.contains(e) {
                block.clone()
            } else {
                let moved: Vec<StateId> = block.iter().filter_map(|x| m.l.delta(x, e)).collect();
                unobservable_reach(&m.l, &moved, &uo).unwrap()
            };
            let key = (k2, next);
            let dst = match index.get(&key) {
                Some(&d) => d,
                None => {
                    let d = b.add_state(index.len().to_string());
                    index.insert(key.clone(), d);
                    todo.push(key);
                    d
                }
            };
            b.add_transition(src, e, dst).unwrap();
        }
    }
    b.build().unwrap()
}

/// Brute-force supremal controllable and normal sublanguage: the largest
/// language among the state subsets of the refined specification that are
/// controllable and normal. `None` when the refinement is too large.
pub fn brute_force_sup(m: &MetaInstance, max_states: usize) -> Option<Automaton> {
    let h = refine(m);
    let n = h.state_count();
    if n > max_states {
        return None;
    }
    let mut good: Vec<Automaton> = Vec::new();
    for mask in 0u32..(1 << n) {
        if n > 0 && mask & 1 == 0 {
            continue;
        }
        let (sub, _) = h.restrict(|x| mask & (1 << x.0) != 0);
        let sub = sub.accessible();
        if check_properties(&sub, &m.l, &m.ec, &m.eo).unwrap().holds() {
            good.push(sub);
        }
    }
    let mut best = Automaton::empty(m.l.shared_alphabet());
    for g in &good {
        if language_included(&best, g).unwrap() {
            best = g.clone();
        }
    }
    for g in &good {
        assert!(language_included(g, &best).unwrap(), "no largest controllable normal subset");
    }
    Some(best)
}

pub fn sup_cn_is_supremal(m: &MetaInstance) -> Result<bool, String> {
    let Some(best) = brute_force_sup(m, 14) else { return Ok(false) };
    for alg in [SupAlgorithm::Iterative, SupAlgorithm::Partition] {
        let s = sup_cn_with(&m.k, &m.l, &m.ec, &m.eo, alg).map_err(|e| e.to_string())?;
        let cmp = language_equal(&s.automaton, &best).map_err(|e| e.to_string())?;
        if !cmp.equal {
            return Err(format!("{alg:?} differs from brute force: {cmp:?}"));
        }
    }
    Ok(true)
}

/// Robustness and embedding agree for sampled supervisors; extractions are
/// robust; an empty solution means no sampled supervisor is robust.
/// Returns whether the solution was empty.
pub fn thm1(seed: u64, samples: usize) -> Result<bool, String> {
    let mut r = rng(seed);
    let g = plant(&mut r);
    let a = attack(&mut r, g.alphabet());
    let sup = synthesize(&g, &a).map_err(|e| e.to_string())?;
    for i in 0..samples {
        let sr = supervisor(&mut r, g.shared_alphabet());
        let robust = verify_robust(&g, &sr, &a).map_err(|e| e.to_string())?;
        let emb = embeds(&sup, &g, &sr, &a).map_err(|e| e.to_string())?;
        if robust.is_robust() != emb.embedded {
            return Err(format!("sample {i}: robust {} but embedded {}", robust.is_robust(), emb.embedded));
        }
        if sup.is_empty() && robust.is_robust() {
            return Err(format!("sample {i} is robust although the solution is empty"));
        }
        if let Robustness::Unsafe(cex) = robust {
            replay(&g, &sr, &a, &cex).map_err(|e| format!("sample {i}: {e}"))?;
        }
    }
    if sup.is_empty() {
        return Ok(true);
    }
    let policy = ExtractionPolicy { budget: 64, ..Default::default() };
    let mut extracted = enumerate_supervisors(&sup, &policy).map_err(|e| e.to_string())?.0;
    for tie_break in [TieBreak::Highest, TieBreak::Lowest] {
        extracted.push(extract_supervisor(&sup, &ExtractionPolicy { tie_break, ..policy }).map_err(|e| e.to_string())?);
    }
    for (i, sr) in extracted.iter().enumerate() {
        if !verify_robust(&g, sr, &a).map_err(|e| e.to_string())?.is_robust() {
            return Err(format!("extraction {i} is not robust"));
        }
        if !embeds(&sup, &g, sr, &a).map_err(|e| e.to_string())?.embedded {
            return Err(format!("extraction {i} does not embed"));
        }
    }
    Ok(false)
}

/// The observation of a counterexample leads to an estimate containing its
/// critical state, and the arena fold reaches that estimate.
pub fn replay(g: &Automaton, r: &SupervisorRealization, a: &AttackModel, cex: &Counterexample) -> Check {
    if !g.is_crit(cex.state) {
        return Err("counterexample ends outside the critical states".into());
    }
    if g.run(g.initial().unwrap(), &cex.plant) != Some(cex.state) {
        return Err("plant projection does not reach the reported state".into());
    }
    let al = Arc::new(g.alphabet().attacked());
    let s: Word = cex.trace.iter().copied().filter(|&e| al.is_observable(e)).collect();
    let est = re_oracle(g, r, a, &s).map_err(|e| e.to_string())?;
    if !est.contains(cex.state) {
        return Err(format!("estimate {est:?} misses {:?}", cex.state));
    }
    let arena = build_arena(g, a).map_err(|e| e.to_string())?;
    let ctx = arena.context();
    let mut rx = r.initial();
    let mut gammas = vec![ctx.decision_event(r.decision(rx).events()).unwrap()];
    for &e in &s {
        if let Some(seen) = al.supervisor_projection(e) {
            rx = r.delta_complete(rx, g.alphabet().lookup(al.name(seen)).unwrap()).unwrap();
        }
        gammas.push(ctx.decision_event(r.decision(rx).events()).unwrap());
    }
    let meta: Word = s.iter().map(|&e| ctx.meta().lookup(al.name(e)).unwrap()).collect();
    let path = arena.fold_h2(&meta, &gammas).map_err(|i| format!("fold undefined after {i} events"))?;
    if arena.label(*path.last().unwrap()).i1() != &est {
        return Err("arena estimate differs from the closed loop".into());
    }
    Ok(())
}
