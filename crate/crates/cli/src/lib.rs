//! Command-line front end for `robsup-core`: file formats, the grid-world
//! generator and the `robsup` subcommands.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 supervisor not
//! robust, 3 no robust supervisor exists.

pub mod files;
pub mod format;
pub mod grid;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use robsup_core::{
    arena_stats, build_arena_with, enumerate_supervisors, extract_max_reward, extract_supervisor, reward_total,
    synthesize_from_arena_with, verify_robust, Automaton, ExtractionMode, ExtractionPolicy, Robustness,
    SupervisorRealization, SynthesisOptions, TieBreak,
};
use serde::Serialize;
use thiserror::Error;

use files::{Algo, Semantics, SupArenaFile};
use format::{AutomatonFile, FormatError};
use grid::{GridError, GridSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_ROBUST: i32 = 2;
pub const EXIT_EMPTY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("{0}: {1}")]
    File(String, Box<CliError>),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Model(#[from] robsup_core::Error),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn in_file(path: &Path, e: impl Into<CliError>) -> Self {
        CliError::File(path.display().to_string(), Box::new(e.into()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "robsup", version, about = "Supervisors robust against sensor deception attacks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the arena of a plant and an attacker and print its size.
    Arena(ArenaArgs),
    /// Compute the supremal robust structure of the arena.
    Synth(SynthArgs),
    /// Extract supervisors from a synthesized arena.
    Extract(ExtractArgs),
    /// Check supervisors for robustness against an attacker.
    Verify(VerifyArgs),
    /// Deadlock-penalized reward of supervisors.
    Reward(RewardArgs),
    /// Generate a grid-world robot plant.
    Gridgen(GridgenArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Plant automaton file.
    #[arg(long)]
    pub plant: PathBuf,
    /// Attack automaton file, or `allout`.
    #[arg(long, default_value = "allout")]
    pub attack: String,
    #[arg(long, value_enum, default_value_t)]
    pub semantics: Semantics,
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ArenaArgs {
    #[command(flatten)]
    pub common: Common,
    /// Print the detailed breakdown.
    #[arg(long)]
    pub stats: bool,
    /// Write the arena automaton here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub algo: Algo,
    /// Give up once an intermediate structure exceeds this many states.
    #[arg(long)]
    pub max_states: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Maximal,
    Reward,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Tie {
    #[default]
    Highest,
    Lowest,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Output of `synth`.
    #[arg(long)]
    pub asup: PathBuf,
    #[arg(long, value_enum)]
    pub policy: Policy,
    /// Write every supervisor reachable through maximal choices.
    #[arg(long)]
    pub enumerate: bool,
    /// Deadlock weight of the reward.
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t)]
    pub tie_break: Tie,
    /// Cap on enumerated choice assignments.
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub plant: PathBuf,
    /// Supervisor file; every automaton in it is checked.
    #[arg(long)]
    pub sup: PathBuf,
    #[arg(long, default_value = "allout")]
    pub attack: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RewardArgs {
    #[arg(long)]
    pub plant: PathBuf,
    #[arg(long)]
    pub sup: PathBuf,
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GridgenArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    /// Cells `r,c` separated by `;`.
    #[arg(long, default_value = "")]
    pub obstacles: String,
    #[arg(long, default_value = "")]
    pub hostile: String,
    #[arg(long)]
    pub start: String,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let _ = write!(err, "{e}");
            return EXIT_ERROR;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Arena(a) => cmd_arena(&a, out),
        Command::Synth(a) => cmd_synth(&a, out, err),
        Command::Extract(a) => cmd_extract(&a, out, err),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Reward(a) => cmd_reward(&a, out),
        Command::Gridgen(a) => cmd_gridgen(&a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io("output".into(), e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data") + "\n"
}

#[derive(Serialize)]
struct ArenaReport {
    states: usize,
    transitions: usize,
    supervisor_states: usize,
    environment_states: usize,
    decisions: usize,
    decisions_used: usize,
    crit: usize,
}

pub fn cmd_arena(a: &ArenaArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (_, plant) = files::load_plant(&a.common.plant)?;
    let (_, attack) = files::load_attack(&a.common.attack, &plant)?;
    let arena = build_arena_with(&plant, &attack, a.common.semantics.config())?;
    let s = arena_stats(&arena);
    let report = ArenaReport {
        states: s.states,
        transitions: s.transitions,
        supervisor_states: s.q1,
        environment_states: s.q2,
        decisions: s.decisions,
        decisions_used: s.decisions_used,
        crit: s.crit,
    };
    if a.common.json {
        emit(out, &to_json(&report))?;
    } else {
        let mut text = format!("states: {}\ntransitions: {}\n", report.states, report.transitions);
        if a.stats {
            text += &format!(
                "supervisor states: {}\nenvironment states: {}\ndecisions: {}\ndecisions used: {}\ncritical: {}\n",
                report.supervisor_states,
                report.environment_states,
                report.decisions,
                report.decisions_used,
                report.crit
            );
        }
        emit(out, &text)?;
    }
    if let Some(path) = &a.out {
        files::write_automata(path, &[AutomatonFile::from_automaton("arena", arena.automaton())])?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let (_, plant) = files::load_plant(&a.common.plant)?;
    let (attack_file, attack) = files::load_attack(&a.common.attack, &plant)?;
    let arena = build_arena_with(&plant, &attack, a.common.semantics.config())?;
    let options = SynthesisOptions { algorithm: a.algo.algorithm(), max_states: a.max_states, ..Default::default() };
    let sup = synthesize_from_arena_with(&arena, &options)?;
    let file = SupArenaFile::new(a.common.semantics, a.algo, &plant, attack_file, &sup);
    files::write(&a.out, &to_json(&file))?;
    let (states, transitions) = (sup.state_count(), sup.automaton().transition_count());
    if a.common.json {
        emit(
            out,
            &to_json(&serde_json::json!({ "states": states, "transitions": transitions, "empty": sup.is_empty() })),
        )?;
    } else {
        emit(out, &format!("states: {states}\ntransitions: {transitions}\n"))?;
    }
    if sup.is_empty() {
        let _ = writeln!(err, "no robust supervisor exists");
        return Ok(EXIT_EMPTY);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ExtractReport {
    name: String,
    states: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    reward: Option<String>,
}

pub fn cmd_extract(a: &ExtractArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let stored = files::load_sup_arena(&a.asup)?;
    let (plant, _, sup) = stored.load().map_err(|e| CliError::in_file(&a.asup, e))?;
    if sup.is_empty() {
        let _ = writeln!(err, "no robust supervisor exists");
        return Ok(EXIT_EMPTY);
    }
    let policy = ExtractionPolicy {
        mode: match a.policy {
            Policy::Maximal => ExtractionMode::Maximal,
            Policy::Reward => ExtractionMode::Reward,
        },
        tie_break: match a.tie_break {
            Tie::Highest => TieBreak::Highest,
            Tie::Lowest => TieBreak::Lowest,
        },
        enumerate: a.enumerate,
        reward_c: a.c,
        budget: a.budget,
    };
    policy.check()?;
    let chosen: Vec<SupervisorRealization> = match (a.enumerate, a.policy) {
        (true, _) => {
            let (all, complete) = enumerate_supervisors(&sup, &policy)?;
            if !complete {
                let _ = writeln!(err, "warning: enumeration budget exhausted; the list is partial");
            }
            all
        }
        (false, Policy::Maximal) => vec![extract_supervisor(&sup, &policy)?],
        (false, Policy::Reward) => {
            let best = extract_max_reward(&sup, &plant, &policy)?;
            if !best.complete {
                let _ = writeln!(err, "warning: enumeration budget exhausted; the choice may not be optimal");
            }
            vec![best.supervisor]
        }
    };
    let mut reports = Vec::new();
    let mut docs = Vec::new();
    for (i, r) in chosen.iter().enumerate() {
        let name = format!("sup{}", i + 1);
        let reward = match a.policy {
            Policy::Reward => Some(reward_total(&plant, r, a.c)?.to_string()),
            Policy::Maximal => None,
        };
        docs.push(AutomatonFile::from_automaton(&name, r.automaton()));
        reports.push(ExtractReport { name, states: r.automaton().state_count(), reward });
    }
    files::write_automata(&a.out, &docs)?;
    if a.json {
        emit(out, &to_json(&reports))?;
    } else {
        for r in &reports {
            let mut line = format!("{}: {} states", r.name, r.states);
            if let Some(w) = &r.reward {
                line += &format!(", reward {w}");
            }
            emit(out, &(line + "\n"))?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyReport {
    name: String,
    robust: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<CounterexampleReport>,
}

#[derive(Serialize)]
struct CounterexampleReport {
    trace: String,
    plant: String,
    observed: String,
    state: String,
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (_, plant) = files::load_plant(&a.plant)?;
    let (_, attack) = files::load_attack(&a.attack, &plant)?;
    let sups = files::load_supervisors(&a.sup, &plant)?;
    let attacked = plant.alphabet().attacked();
    let mut reports = Vec::new();
    for (i, (name, r)) in sups.iter().enumerate() {
        let name = if name.is_empty() { format!("#{}", i + 1) } else { name.clone() };
        let counterexample = match verify_robust(&plant, r, &attack)? {
            Robustness::Robust => None,
            Robustness::Unsafe(cx) => Some(CounterexampleReport {
                trace: attacked.format_word(&cx.trace),
                plant: plant.alphabet().format_word(&cx.plant),
                observed: plant.alphabet().format_word(&cx.observed),
                state: plant.state_name(cx.state).into(),
            }),
        };
        reports.push(VerifyReport { name, robust: counterexample.is_none(), counterexample });
    }
    if a.json {
        emit(out, &to_json(&reports))?;
    } else {
        for r in &reports {
            match &r.counterexample {
                None => emit(out, &format!("{}: robust\n", r.name))?,
                Some(cx) => emit(
                    out,
                    &format!(
                        "{}: not robust\n  trace: {}\n  plant: {}\n  observed: {}\n  reaches: {}\n",
                        r.name, cx.trace, cx.plant, cx.observed, cx.state
                    ),
                )?,
            }
        }
    }
    Ok(if reports.iter().all(|r| r.robust) { EXIT_OK } else { EXIT_NOT_ROBUST })
}

pub fn cmd_reward(a: &RewardArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (_, plant) = files::load_plant(&a.plant)?;
    let sups = files::load_supervisors(&a.sup, &plant)?;
    let mut rows = Vec::new();
    for (i, (name, r)) in sups.iter().enumerate() {
        let name = if name.is_empty() { format!("#{}", i + 1) } else { name.clone() };
        rows.push((name, reward_total(&plant, r, a.c)?.to_string()));
    }
    if a.json {
        let v: Vec<_> = rows.iter().map(|(n, w)| serde_json::json!({ "name": n, "reward": w })).collect();
        emit(out, &to_json(&v))?;
    } else {
        for (n, w) in rows {
            emit(out, &format!("{n}: reward {w}\n"))?;
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_gridgen(a: &GridgenArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let spec = GridSpec {
        rows: a.rows,
        cols: a.cols,
        obstacles: grid::parse_cells(&a.obstacles)?,
        hostile: grid::parse_cells(&a.hostile)?,
        start: grid::parse_cell(&a.start)?,
    };
    let plant: Automaton = spec.plant()?;
    files::write_automata(&a.out, &[AutomatonFile::from_automaton("robot", &plant)])?;
    emit(out, &format!("states: {}\ntransitions: {}\n", plant.state_count(), plant.transition_count()))?;
    Ok(EXIT_OK)
}
