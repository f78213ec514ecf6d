//! Events, event sets and alphabets.
//!
//! An [`Alphabet`] fixes an order on event names; every event set used by
//! the kernel is a bit set keyed by that order. Decorated alphabets (the
//! attacked alphabet with `e.ins` / `e.del` copies, the edit alphabet seen by
//! an attacker, and the meta alphabet of an arena) are ordinary alphabets
//! whose events carry an [`EventKind`] tag.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Suffix of inserted copies of compromised events.
pub const INS_SUFFIX: &str = ".ins";
/// Suffix of deleted copies of compromised events.
pub const DEL_SUFFIX: &str = ".del";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub u32);

impl EventId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A finite set of events stored as a bit vector.
///
/// Trailing zero words are never stored, so structurally equal sets compare
/// and hash equal regardless of how they were built.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventSet {
    words: Vec<u64>,
}

impl EventSet {
    pub const fn new() -> Self {
        EventSet { words: Vec::new() }
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        let mut s = EventSet::new();
        for i in 0..n {
            s.insert(EventId(i as u32));
        }
        s
    }

    pub fn from_bits(bits: u64) -> Self {
        let mut s = EventSet { words: alloc::vec![bits] };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn insert(&mut self, e: EventId) -> bool {
        let (w, b) = (e.index() / 64, e.index() % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        let had = self.words[w] & (1 << b) != 0;
        self.words[w] |= 1 << b;
        !had
    }

    pub fn remove(&mut self, e: EventId) -> bool {
        let (w, b) = (e.index() / 64, e.index() % 64);
        if w >= self.words.len() {
            return false;
        }
        let had = self.words[w] & (1 << b) != 0;
        self.words[w] &= !(1 << b);
        self.normalize();
        had
    }

    #[inline]
    pub fn contains(&self, e: EventId) -> bool {
        let (w, b) = (e.index() / 64, e.index() % 64);
        w < self.words.len() && self.words[w] & (1 << b) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union(&self, other: &EventSet) -> EventSet {
        let n = self.words.len().max(other.words.len());
        let words = (0..n)
            .map(|i| self.words.get(i).copied().unwrap_or(0) | other.words.get(i).copied().unwrap_or(0))
            .collect();
        EventSet { words }
    }

    pub fn intersection(&self, other: &EventSet) -> EventSet {
        let mut s = EventSet { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() };
        s.normalize();
        s
    }

    pub fn difference(&self, other: &EventSet) -> EventSet {
        let mut s = EventSet {
            words: self.words.iter().enumerate().map(|(i, a)| a & !other.words.get(i).copied().unwrap_or(0)).collect(),
        };
        s.normalize();
        s
    }

    pub fn is_subset(&self, other: &EventSet) -> bool {
        self.words.iter().enumerate().all(|(i, a)| a & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    /// Strict inclusion.
    pub fn is_proper_subset(&self, other: &EventSet) -> bool {
        self != other && self.is_subset(other)
    }

    pub fn iter(&self) -> impl Iterator<Item = EventId> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            core::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                Some(EventId(w as u32 * 64 + b))
            })
        })
    }
}

impl FromIterator<EventId> for EventSet {
    fn from_iter<I: IntoIterator<Item = EventId>>(iter: I) -> Self {
        let mut s = EventSet::new();
        for e in iter {
            s.insert(e);
        }
        s
    }
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|e| e.0)).finish()
    }
}

/// What an event of a (possibly decorated) alphabet stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// An event generated by the plant.
    Legit,
    /// Attacker insertion of the given legitimate event (same alphabet).
    Inserted(EventId),
    /// Attacker deletion of the given legitimate event (same alphabet).
    Deleted(EventId),
    /// A control decision used as a meta-event; the set is over the plant
    /// alphabet the arena was built from.
    Decision(EventSet),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventInfo {
    pub name: String,
    pub controllable: bool,
    pub observable: bool,
    pub kind: EventKind,
}

/// An ordered event set with controllability/observability flags and a
/// compromised subset.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    events: Vec<EventInfo>,
    compromised: EventSet,
    index: BTreeMap<String, EventId>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a legitimate plant event.
    pub fn add_event(&mut self, name: &str, controllable: bool, observable: bool) -> Result<EventId> {
        if name.ends_with(INS_SUFFIX) || name.ends_with(DEL_SUFFIX) {
            return Err(Error::ReservedName(name.into()));
        }
        self.push(EventInfo { name: name.into(), controllable, observable, kind: EventKind::Legit })
    }

    /// Adds an event with an explicit kind; used for decorated and meta alphabets.
    pub fn push(&mut self, info: EventInfo) -> Result<EventId> {
        if info.name.is_empty() || info.name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidName(info.name));
        }
        if self.index.contains_key(&info.name) {
            return Err(Error::DuplicateEvent(info.name));
        }
        let id = EventId(self.events.len() as u32);
        self.index.insert(info.name.clone(), id);
        self.events.push(info);
        Ok(id)
    }

    /// Declares a legitimate observable event as compromised.
    pub fn set_compromised(&mut self, e: EventId) -> Result<()> {
        let info = self.info(e)?;
        if info.kind != EventKind::Legit {
            return Err(Error::InvalidName(info.name.clone()));
        }
        if !info.observable {
            return Err(Error::UnobservableCompromised(info.name.clone()));
        }
        self.compromised.insert(e);
        Ok(())
    }

    pub(crate) fn info_mut(&mut self, e: EventId) -> &mut EventInfo {
        &mut self.events[e.index()]
    }

    pub(crate) fn mark_compromised_unchecked(&mut self, e: EventId) {
        self.compromised.insert(e);
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = EventId> + '_ {
        (0..self.events.len() as u32).map(EventId)
    }

    pub fn info(&self, e: EventId) -> Result<&EventInfo> {
        self.events.get(e.index()).ok_or(Error::UnknownEventId(e.0))
    }

    /// Panics on ids outside the alphabet.
    pub fn name(&self, e: EventId) -> &str {
        &self.events[e.index()].name
    }

    pub fn kind(&self, e: EventId) -> &EventKind {
        &self.events[e.index()].kind
    }

    pub fn id(&self, name: &str) -> Option<EventId> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<EventId> {
        self.id(name).ok_or_else(|| Error::UnknownEvent(name.into()))
    }

    pub fn is_controllable(&self, e: EventId) -> bool {
        self.events[e.index()].controllable
    }

    pub fn is_observable(&self, e: EventId) -> bool {
        self.events[e.index()].observable
    }

    pub fn is_compromised(&self, e: EventId) -> bool {
        self.compromised.contains(e)
    }

    pub fn is_legit(&self, e: EventId) -> bool {
        self.events[e.index()].kind == EventKind::Legit
    }

    fn select(&self, pred: impl Fn(&EventInfo) -> bool) -> EventSet {
        self.ids().filter(|e| pred(&self.events[e.index()])).collect()
    }

    pub fn all(&self) -> EventSet {
        EventSet::full(self.len())
    }

    pub fn controllable(&self) -> EventSet {
        self.select(|i| i.controllable)
    }

    pub fn uncontrollable(&self) -> EventSet {
        self.select(|i| !i.controllable)
    }

    pub fn observable(&self) -> EventSet {
        self.select(|i| i.observable)
    }

    pub fn unobservable(&self) -> EventSet {
        self.select(|i| !i.observable)
    }

    pub fn compromised(&self) -> &EventSet {
        &self.compromised
    }

    /// Legitimate events (plant events) of this alphabet.
    pub fn legit(&self) -> EventSet {
        self.select(|i| i.kind == EventKind::Legit)
    }

    /// Insertion events `e.ins`.
    pub fn insertions(&self) -> EventSet {
        self.select(|i| matches!(i.kind, EventKind::Inserted(_)))
    }

    /// Deletion events `e.del`.
    pub fn deletions(&self) -> EventSet {
        self.select(|i| matches!(i.kind, EventKind::Deleted(_)))
    }

    /// Insertions and deletions together.
    pub fn edits(&self) -> EventSet {
        self.insertions().union(&self.deletions())
    }

    pub fn decisions(&self) -> EventSet {
        self.select(|i| matches!(i.kind, EventKind::Decision(_)))
    }

    /// Mask: strips the insertion/deletion decoration.
    pub fn mask(&self, e: EventId) -> EventId {
        match self.events[e.index()].kind {
            EventKind::Inserted(b) | EventKind::Deleted(b) => b,
            _ => e,
        }
    }

    /// Effect on the plant: `None` stands for the empty string.
    pub fn plant_projection(&self, e: EventId) -> Option<EventId> {
        match self.events[e.index()].kind {
            EventKind::Inserted(_) => None,
            EventKind::Deleted(b) => Some(b),
            _ => Some(e),
        }
    }

    /// Observation by the supervisor: `None` stands for the empty string.
    pub fn supervisor_projection(&self, e: EventId) -> Option<EventId> {
        match self.events[e.index()].kind {
            EventKind::Deleted(_) => None,
            EventKind::Inserted(b) => Some(b),
            _ => Some(e),
        }
    }

    pub fn insertion_of(&self, e: EventId) -> Option<EventId> {
        self.id(&format!("{}{}", self.name(e), INS_SUFFIX))
    }

    pub fn deletion_of(&self, e: EventId) -> Option<EventId> {
        self.id(&format!("{}{}", self.name(e), DEL_SUFFIX))
    }

    /// The attacked alphabet: all events of `self` followed by `e.ins` and
    /// `e.del` for every compromised `e`. Legitimate ids are preserved.
    pub fn attacked(&self) -> Alphabet {
        let mut out = self.clone();
        out.add_decorations();
        out
    }

    /// The edit alphabet: observable legitimate events followed by the
    /// insertion and deletion copies of the compromised ones.
    pub fn edit_alphabet(&self) -> Alphabet {
        let mut out = Alphabet::new();
        for e in self.ids() {
            let info = &self.events[e.index()];
            if info.observable && info.kind == EventKind::Legit {
                let id = out.push(info.clone()).expect("names are unique");
                if self.is_compromised(e) {
                    out.compromised.insert(id);
                }
            }
        }
        out.add_decorations();
        out
    }

    fn add_decorations(&mut self) {
        let bases: Vec<EventId> = self.compromised.iter().collect();
        for (suffix, del) in [(INS_SUFFIX, false), (DEL_SUFFIX, true)] {
            for &b in &bases {
                let name = format!("{}{}", self.name(b), suffix);
                let kind = if del { EventKind::Deleted(b) } else { EventKind::Inserted(b) };
                self.push(EventInfo { name, controllable: false, observable: true, kind })
                    .expect("decorated names are disjoint from legitimate ones");
            }
        }
    }

    /// Legitimate part of the alphabet with the original flags; inverse of
    /// [`Alphabet::attacked`] up to event order.
    pub fn base(&self) -> Alphabet {
        let mut out = Alphabet::new();
        for e in self.ids() {
            let info = &self.events[e.index()];
            if info.kind == EventKind::Legit {
                let id = out.push(info.clone()).expect("names are unique");
                if self.is_compromised(e) {
                    out.compromised.insert(id);
                }
            }
        }
        out
    }

    /// Renders an event set as `{a,b}` in alphabet order.
    pub fn format_set(&self, set: &EventSet) -> String {
        let names: Vec<&str> = set.iter().map(|e| self.name(e)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Parses `{a,b}` (or a bare comma list) into a set over this alphabet.
    pub fn parse_set(&self, text: &str) -> Result<EventSet> {
        let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
        inner.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| self.lookup(s)).collect()
    }

    /// Translates a set of this alphabet into `other` by name; events that do
    /// not exist in `other` are dropped.
    pub fn translate_set(&self, set: &EventSet, other: &Alphabet) -> EventSet {
        set.iter().filter_map(|e| other.id(self.name(e))).collect()
    }

    /// Whether two alphabets declare the same names with the same flags,
    /// irrespective of order.
    pub fn same_events(&self, other: &Alphabet) -> bool {
        self.len() == other.len()
            && self.events.iter().all(|i| {
                other.id(&i.name).is_some_and(|o| {
                    let j = &other.events[o.index()];
                    j.controllable == i.controllable && j.observable == i.observable
                })
            })
    }

    pub fn format_word(&self, word: &[EventId]) -> String {
        let names: Vec<&str> = word.iter().map(|&e| self.name(e)).collect();
        names.join(" ")
    }
}

/// Index map from the events of one alphabet into another, by name.
#[derive(Clone, Debug)]
pub struct EventMap {
    map: Vec<Option<EventId>>,
}

impl EventMap {
    pub fn between(from: &Alphabet, to: &Alphabet) -> Self {
        EventMap { map: from.ids().map(|e| to.id(from.name(e))).collect() }
    }

    #[inline]
    pub fn get(&self, e: EventId) -> Option<EventId> {
        self.map.get(e.index()).copied().flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Alphabet {
        let mut a = Alphabet::new();
        a.add_event("a", true, true).unwrap();
        let b = a.add_event("b", true, true).unwrap();
        a.add_event("c", false, false).unwrap();
        a.set_compromised(b).unwrap();
        a
    }

    #[test]
    fn event_set_basics() {
        let mut s = EventSet::new();
        assert!(s.insert(EventId(3)));
        assert!(!s.insert(EventId(3)));
        s.insert(EventId(70));
        assert_eq!(s.len(), 2);
        assert!(s.contains(EventId(70)));
        s.remove(EventId(70));
        assert_eq!(s, EventSet::from_iter([EventId(3)]));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![EventId(3)]);
    }

    #[test]
    fn set_algebra_is_canonical() {
        let a: EventSet = [EventId(1), EventId(100)].into_iter().collect();
        let b: EventSet = [EventId(1)].into_iter().collect();
        assert_eq!(a.intersection(&b), b);
        assert_eq!(a.difference(&[EventId(100)].into_iter().collect()), b);
        assert!(b.is_proper_subset(&a));
        assert!(!a.is_subset(&b));
        assert_eq!(a.union(&b), a);
    }

    #[test]
    fn compromised_must_be_observable() {
        let mut a = Alphabet::new();
        let u = a.add_event("u", false, false).unwrap();
        assert!(matches!(a.set_compromised(u), Err(Error::UnobservableCompromised(_))));
    }

    #[test]
    fn decorations_are_disjoint() {
        let a = abc();
        let m = a.attacked();
        assert_eq!(m.len(), 5);
        let bi = m.lookup("b.ins").unwrap();
        let bd = m.lookup("b.del").unwrap();
        let b = m.lookup("b").unwrap();
        assert_eq!(m.mask(bi), b);
        assert_eq!(m.plant_projection(bi), None);
        assert_eq!(m.plant_projection(bd), Some(b));
        assert_eq!(m.supervisor_projection(bd), None);
        assert_eq!(m.supervisor_projection(bi), Some(b));
        assert!(matches!(a.clone().add_event("x.ins", true, true), Err(Error::ReservedName(_))));

        let oe = a.edit_alphabet();
        let names: Vec<&str> = oe.ids().map(|e| oe.name(e)).collect();
        assert_eq!(names, ["a", "b", "b.ins", "b.del"]);
        assert_eq!(m.base(), a);
    }

    #[test]
    fn set_round_trip() {
        let a = abc();
        let s = a.parse_set("{a,c}").unwrap();
        assert_eq!(a.format_set(&s), "{a,c}");
        assert_eq!(a.parse_set("{}").unwrap(), EventSet::new());
        assert!(a.parse_set("{z}").is_err());
    }
}
