//! Synthesis of supervisors that stay safe under sensor deception attacks.
//!
//! The kernel is `no_std` (with `alloc`). Automata are deterministic with a
//! partial transition function; event sets are bit sets keyed by an
//! [`Alphabet`].

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod arena;
pub mod attack;
pub mod automaton;
pub mod compose;
pub mod error;
pub mod events;
pub mod extraction;
pub mod language;
pub mod supervisor;
pub mod synthesis;
pub mod verification;

pub use arena::{
    arena_stats, build_arena, build_arena_with, Arena, ArenaConfig, ArenaContext, ArenaStats, Node, SupArena,
};
pub use attack::{
    attacked_plant, attacked_supervisor, build_all_out, build_bounded, closed_loop, fa_eval, validate, AttackModel,
    ClosedLoop, Validation, Violation,
};
pub use automaton::{
    active_events, observable_reach, trim_states, unobservable_reach, Automaton, AutomatonBuilder, StateId, StateSet,
    Word,
};
pub use compose::{compose_parallel, merge_alphabets, observer, Observer, Product};
pub use error::{Error, Result};
pub use events::{Alphabet, EventId, EventInfo, EventKind, EventMap, EventSet, DEL_SUFFIX, INS_SUFFIX};
pub use extraction::{
    enumerate_supervisors, extract, extract_max_reward, extract_supervisor, maximal_decisions, reward_total, x_dead,
    ExtractionMode, ExtractionPolicy, Reward, RewardChoice, TieBreak,
};
pub use language::{isomorphic, language_equal, language_excess, language_included, Comparison};
pub use supervisor::{ControlDecision, SupervisorRealization};
pub use synthesis::{
    check_properties, exists_robust, meta_events, meta_trim, sup_cn, sup_cn_limited, sup_cn_with, synthesize,
    synthesize_from_arena, synthesize_from_arena_with, synthesize_with, PropertyReport, SupAlgorithm, SupCn,
    SynthesisOptions,
};
pub use verification::{
    embeds, re_by_fold, re_by_search, re_oracle, verify_robust, Counterexample, Embedding, Robustness,
};
