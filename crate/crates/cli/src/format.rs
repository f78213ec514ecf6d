//! Automaton files.
//!
//! Text form, one declaration per line:
//!
//! ```text
//! name G
//! event a c o
//! event c u uo
//! compromised a
//! state 0 init
//! state 4 crit
//! trans 0 a 4
//! ```
//!
//! A token starting with `#` begins a comment. A new `name` line starts a new automaton, so one
//! file may hold several. Decorated events are written `a.ins` / `a.del` and
//! must follow the declaration of `a`. The JSON form uses the same keys.

use std::fmt::Write as _;
use std::sync::Arc;

use robsup_core::{Alphabet, Automaton, AutomatonBuilder, EventInfo, EventKind, StateId, DEL_SUFFIX, INS_SUFFIX};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected one automaton, found {0}")]
    Count(usize),
    #[error(transparent)]
    Model(#[from] robsup_core::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Control {
    C,
    U,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observe {
    O,
    Uo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventDecl {
    pub name: String,
    pub control: Control,
    pub observe: Observe,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDecl {
    pub id: String,
    #[serde(default, skip_serializing_if = "is_false")]
    pub init: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub crit: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransDecl {
    pub src: String,
    pub event: String,
    pub dst: String,
}

/// Declarative form of an automaton, as read from or written to a file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonFile {
    pub name: String,
    #[serde(default)]
    pub event: Vec<EventDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compromised: Vec<String>,
    #[serde(default)]
    pub state: Vec<StateDecl>,
    #[serde(default)]
    pub trans: Vec<TransDecl>,
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

/// Parses every automaton of a text file.
pub fn parse_text_many(src: &str) -> Result<Vec<AutomatonFile>, FormatError> {
    let mut out: Vec<AutomatonFile> = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let tok: Vec<&str> = raw.split_whitespace().take_while(|t| !t.starts_with('#')).collect();
        let Some(&kw) = tok.first() else { continue };
        if kw == "name" {
            let [_, id] = tok[..] else {
                return Err(syntax(line, "expected `name <id>`"));
            };
            out.push(AutomatonFile { name: id.into(), ..Default::default() });
            continue;
        }
        if out.is_empty() {
            // A file may omit the `name` line.
            out.push(AutomatonFile::default());
        }
        let cur = out.last_mut().expect("pushed above");
        match kw {
            "event" => {
                let [_, name, c, o] = tok[..] else {
                    return Err(syntax(line, "expected `event <name> <c|u> <o|uo>`"));
                };
                let control = match c {
                    "c" => Control::C,
                    "u" => Control::U,
                    _ => return Err(syntax(line, format!("controllability must be `c` or `u`, got `{c}`"))),
                };
                let observe = match o {
                    "o" => Observe::O,
                    "uo" => Observe::Uo,
                    _ => return Err(syntax(line, format!("observability must be `o` or `uo`, got `{o}`"))),
                };
                cur.event.push(EventDecl { name: name.into(), control, observe });
            }
            "compromised" => cur.compromised.extend(tok[1..].iter().map(|s| s.to_string())),
            "state" => {
                let Some(&id) = tok.get(1) else {
                    return Err(syntax(line, "expected `state <id> [init] [crit]`"));
                };
                let mut st = StateDecl { id: id.into(), init: false, crit: false };
                for &flag in &tok[2..] {
                    match flag {
                        "init" => st.init = true,
                        "crit" => st.crit = true,
                        _ => return Err(syntax(line, format!("unknown state flag `{flag}`"))),
                    }
                }
                cur.state.push(st);
            }
            "trans" => {
                let [_, src, event, dst] = tok[..] else {
                    return Err(syntax(line, "expected `trans <src> <event> <dst>`"));
                };
                cur.trans.push(TransDecl { src: src.into(), event: event.into(), dst: dst.into() });
            }
            _ => return Err(syntax(line, format!("unknown keyword `{kw}`"))),
        }
    }
    Ok(out)
}

/// Parses a file holding one automaton, text or JSON (detected by a leading
/// `{` or `[`).
pub fn parse(src: &str) -> Result<AutomatonFile, FormatError> {
    let mut all = parse_many(src)?;
    if all.len() != 1 {
        return Err(FormatError::Count(all.len()));
    }
    Ok(all.pop().expect("one element"))
}

pub fn parse_many(src: &str) -> Result<Vec<AutomatonFile>, FormatError> {
    match src.trim_start().chars().next() {
        Some('{') => Ok(vec![serde_json::from_str(src)?]),
        Some('[') => Ok(serde_json::from_str(src)?),
        _ => parse_text_many(src),
    }
}

impl AutomatonFile {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if !self.name.is_empty() {
            let _ = writeln!(s, "name {}", self.name);
        }
        for e in &self.event {
            let c = if e.control == Control::C { "c" } else { "u" };
            let o = if e.observe == Observe::O { "o" } else { "uo" };
            let _ = writeln!(s, "event {} {c} {o}", e.name);
        }
        if !self.compromised.is_empty() {
            let _ = writeln!(s, "compromised {}", self.compromised.join(" "));
        }
        for st in &self.state {
            let _ = write!(s, "state {}", st.id);
            if st.init {
                s.push_str(" init");
            }
            if st.crit {
                s.push_str(" crit");
            }
            s.push('\n');
        }
        for t in &self.trans {
            let _ = writeln!(s, "trans {} {} {}", t.src, t.event, t.dst);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    /// Declarations of `aut`, states and events in id order.
    pub fn from_automaton(name: &str, aut: &Automaton) -> Self {
        let al = aut.alphabet();
        let event = al
            .ids()
            .map(|e| EventDecl {
                name: al.name(e).into(),
                control: if al.is_controllable(e) { Control::C } else { Control::U },
                observe: if al.is_observable(e) { Observe::O } else { Observe::Uo },
            })
            .collect();
        let compromised = al.compromised().iter().map(|e| al.name(e).to_string()).collect();
        let state = aut
            .states()
            .map(|x| StateDecl { id: aut.state_name(x).into(), init: aut.initial() == Some(x), crit: aut.is_crit(x) })
            .collect();
        let trans = aut
            .transitions()
            .map(|(x, e, y)| TransDecl {
                src: aut.state_name(x).into(),
                event: al.name(e).into(),
                dst: aut.state_name(y).into(),
            })
            .collect();
        AutomatonFile { name: name.into(), event, compromised, state, trans }
    }

    /// The alphabet declared by the file. `x.ins` / `x.del` become decorated
    /// copies of an earlier `x`.
    pub fn alphabet(&self) -> Result<Alphabet, FormatError> {
        let mut al = Alphabet::new();
        for e in &self.event {
            let base = [(INS_SUFFIX, false), (DEL_SUFFIX, true)]
                .into_iter()
                .find_map(|(suffix, del)| e.name.strip_suffix(suffix).map(|b| (b, del)));
            let kind = match base {
                Some((b, del)) => {
                    let Some(id) = al.id(b) else {
                        return Err(robsup_core::Error::UnknownEvent(b.into()).into());
                    };
                    if del {
                        EventKind::Deleted(id)
                    } else {
                        EventKind::Inserted(id)
                    }
                }
                None => EventKind::Legit,
            };
            al.push(EventInfo {
                name: e.name.clone(),
                controllable: e.control == Control::C,
                observable: e.observe == Observe::O,
                kind,
            })?;
        }
        for c in &self.compromised {
            let e = al.lookup(c)?;
            al.set_compromised(e)?;
        }
        Ok(al)
    }

    /// Builds the automaton over the declared alphabet.
    pub fn to_automaton(&self) -> Result<Automaton, FormatError> {
        self.build_over(Arc::new(self.alphabet()?))
    }

    /// Builds the automaton over `alphabet`, matching events by name. Flags
    /// declared in the file are ignored; an empty event list is allowed.
    pub fn to_automaton_over(&self, alphabet: Arc<Alphabet>) -> Result<Automaton, FormatError> {
        for e in &self.event {
            alphabet.lookup(&e.name)?;
        }
        self.build_over(alphabet)
    }

    fn build_over(&self, alphabet: Arc<Alphabet>) -> Result<Automaton, FormatError> {
        let mut b = AutomatonBuilder::new(alphabet.clone());
        let mut ids = std::collections::HashMap::new();
        let mut init = None;
        for st in &self.state {
            let id = b.add_state(st.id.clone());
            if ids.insert(st.id.as_str(), id).is_some() {
                return Err(robsup_core::Error::DuplicateState(st.id.clone()).into());
            }
            if st.crit {
                b.mark_crit(id);
            }
            if st.init {
                if init.is_some() {
                    return Err(robsup_core::Error::Invalid(format!("second initial state `{}`", st.id)).into());
                }
                init = Some(id);
            }
        }
        if let Some(x0) = init {
            b.set_initial(x0);
        }
        let state = |name: &str| -> Result<StateId, FormatError> {
            ids.get(name).copied().ok_or_else(|| robsup_core::Error::UnknownStateName(name.into()).into())
        };
        for t in &self.trans {
            let e = alphabet.lookup(&t.event)?;
            b.add_transition(state(&t.src)?, e, state(&t.dst)?)?;
        }
        Ok(b.build()?)
    }
}

/// Rebuilds `aut` over `alphabet`, matching events by name.
pub fn rebind(aut: &Automaton, alphabet: Arc<Alphabet>) -> Result<Automaton, FormatError> {
    AutomatonFile::from_automaton("", aut).to_automaton_over(alphabet)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLANT: &str = "\
# two states
name G
event a c o
event b c o
event u u uo
compromised b
state 0 init
state 1 crit
trans 0 a 1   # edge
trans 1 u 1
";

    #[test]
    fn text_round_trip() {
        let f = parse(PLANT).unwrap();
        assert_eq!(f.event.len(), 3);
        assert_eq!(f.compromised, vec!["b"]);
        assert_eq!(parse(&f.to_text()).unwrap(), f);
        assert_eq!(parse(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn builds_automaton() {
        let g = parse(PLANT).unwrap().to_automaton().unwrap();
        assert_eq!(g.state_count(), 2);
        assert!(g.is_crit(StateId(1)));
        assert!(g.alphabet().is_compromised(g.alphabet().lookup("b").unwrap()));
        assert!(!g.alphabet().is_observable(g.alphabet().lookup("u").unwrap()));
        assert_eq!(AutomatonFile::from_automaton("G", &g), parse(PLANT).unwrap());
    }

    #[test]
    fn decorated_events() {
        let src =
            "name A\nevent b c o\nevent b.ins u o\nevent b.del u o\ncompromised b\nstate 0 init\ntrans 0 b.ins 0\n";
        let a = parse(src).unwrap().to_automaton().unwrap();
        let al = a.alphabet();
        assert_eq!(al.kind(al.lookup("b.del").unwrap()), &EventKind::Deleted(al.lookup("b").unwrap()));
        let bad = "event b.ins u o\n";
        assert!(parse(bad).unwrap().to_automaton().is_err());
    }

    #[test]
    fn rejects_bad_input() {
        let dup = format!("{PLANT}trans 0 a 1\n");
        assert!(matches!(
            parse(&dup).unwrap().to_automaton(),
            Err(FormatError::Model(robsup_core::Error::DuplicateTransition { .. }))
        ));
        assert!(matches!(parse("event a x o\n"), Err(FormatError::Syntax { line: 1, .. })));
        assert!(matches!(parse("name A\nfoo\n"), Err(FormatError::Syntax { line: 2, .. })));
        assert!(parse("trans 0 a 9\nstate 0 init\nevent a c o\n").unwrap().to_automaton().is_err());
        assert!(matches!(parse("name A\nname B\n"), Err(FormatError::Count(2))));
    }

    #[test]
    fn several_automata() {
        let two = format!("{PLANT}name H\nstate 0 init\n");
        let all = parse_many(&two).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[1].name, "H");
    }
}
