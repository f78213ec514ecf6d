//! Loading plants, attack models, supervisors and synthesized arenas.

use std::path::Path;

use clap::ValueEnum;
use robsup_core::{
    build_all_out, build_arena_with, Arena, ArenaConfig, AttackModel, Automaton, StateId, SupAlgorithm, SupArena,
    SupervisorRealization,
};
use serde::{Deserialize, Serialize};

use crate::format::{self, AutomatonFile};
use crate::CliError;

/// Arena transition rules.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    /// Insertions of any compromised event; environment states with a
    /// critical estimate are expanded.
    #[default]
    Literal,
    /// Insertions only of events the current decision enables; environment
    /// states with a critical estimate are not expanded.
    Tool,
}

impl Semantics {
    pub fn config(self) -> ArenaConfig {
        match self {
            Semantics::Literal => ArenaConfig::default(),
            Semantics::Tool => ArenaConfig { insert_enabled_only: true, expand_crit: false },
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    #[default]
    Default,
    Partition,
}

impl Algo {
    pub fn algorithm(self) -> SupAlgorithm {
        match self {
            Algo::Default => SupAlgorithm::Iterative,
            Algo::Partition => SupAlgorithm::Partition,
        }
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|x| x == "json")
}

/// Writes automata as JSON when the path ends in `.json`, as text otherwise.
pub fn write_automata(path: &Path, files: &[AutomatonFile]) -> Result<(), CliError> {
    let text = if is_json(path) {
        if let [one] = files {
            one.to_json()
        } else {
            serde_json::to_string_pretty(files).expect("plain data")
        }
    } else {
        files.iter().map(AutomatonFile::to_text).collect::<Vec<_>>().join("\n")
    };
    write(path, &text)
}

pub fn load_plant(path: &Path) -> Result<(AutomatonFile, Automaton), CliError> {
    let file = format::parse(&read(path)?).map_err(|e| CliError::in_file(path, e))?;
    let aut = file.to_automaton().map_err(|e| CliError::in_file(path, e))?;
    Ok((file, aut))
}

/// `allout` or a path to an attack automaton over the edit alphabet.
pub fn load_attack(arg: &str, plant: &Automaton) -> Result<(Option<AutomatonFile>, AttackModel), CliError> {
    if arg == "allout" {
        return Ok((None, build_all_out(plant.alphabet())));
    }
    let path = Path::new(arg);
    let file = format::parse(&read(path)?).map_err(|e| CliError::in_file(path, e))?;
    let model = attack_from_file(&file, plant).map_err(|e| CliError::in_file(path, e))?;
    Ok((Some(file), model))
}

/// Events are matched by name against the plant's edit alphabet; flags in
/// the file are not consulted.
fn attack_from_file(file: &AutomatonFile, plant: &Automaton) -> Result<AttackModel, CliError> {
    let aut = file.to_automaton_over(std::sync::Arc::new(plant.alphabet().edit_alphabet()))?;
    Ok(AttackModel::new(&aut, plant.alphabet())?)
}

/// Supervisors stored in `path`, rebound to the plant alphabet.
pub fn load_supervisors(path: &Path, plant: &Automaton) -> Result<Vec<(String, SupervisorRealization)>, CliError> {
    let files = format::parse_many(&read(path)?).map_err(|e| CliError::in_file(path, e))?;
    if files.is_empty() {
        return Err(CliError::in_file(path, format::FormatError::Count(0)));
    }
    files
        .into_iter()
        .map(|f| {
            let aut = f.to_automaton_over(plant.shared_alphabet()).map_err(|e| CliError::in_file(path, e))?;
            let r = SupervisorRealization::new(aut).map_err(|e| CliError::in_file(path, e))?;
            Ok((f.name, r))
        })
        .collect()
}

/// A synthesized arena together with what is needed to rebuild its context.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupArenaFile {
    pub semantics: Semantics,
    pub algorithm: Algo,
    pub plant: AutomatonFile,
    /// `None` stands for the all-out attacker.
    pub attack: Option<AutomatonFile>,
    pub sup: AutomatonFile,
}

impl SupArenaFile {
    pub fn new(
        semantics: Semantics,
        algorithm: Algo,
        plant: &Automaton,
        attack: Option<AutomatonFile>,
        sup: &SupArena,
    ) -> Self {
        SupArenaFile {
            semantics,
            algorithm,
            plant: AutomatonFile::from_automaton("plant", plant),
            attack,
            sup: AutomatonFile::from_automaton("sup", sup.automaton()),
        }
    }

    /// Rebuilds the arena and attaches its node labels to the stored states,
    /// whose names are arena node names (with `#k` on refined copies).
    pub fn load(&self) -> Result<(Automaton, AttackModel, SupArena), CliError> {
        let plant = self.plant.to_automaton()?;
        let attack = match &self.attack {
            None => build_all_out(plant.alphabet()),
            Some(f) => attack_from_file(f, &plant)?,
        };
        let arena = build_arena_with(&plant, &attack, self.semantics.config())?;
        let ctx = arena.context().clone();
        let aut = self.sup.to_automaton_over(ctx.meta().clone())?;
        let by_name: std::collections::HashMap<String, StateId> =
            arena.automaton().states().map(|q| (arena.node_name(q), q)).collect();
        let mut labels = Vec::with_capacity(aut.state_count());
        for x in aut.states() {
            let name = aut.state_name(x);
            let base = match name.rsplit_once('#') {
                Some((b, k)) if k.parse::<usize>().is_ok() => b,
                _ => name,
            };
            let q = by_name
                .get(base)
                .ok_or_else(|| CliError::Invalid(format!("state `{name}` is not a node of the rebuilt arena")))?;
            labels.push(arena.label(*q).clone());
        }
        let sup = Arena::from_parts(aut, labels, ctx)?;
        Ok((plant, attack, sup))
    }
}

pub fn load_sup_arena(path: &Path) -> Result<SupArenaFile, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::in_file(path, format::FormatError::Json(e)))
}
