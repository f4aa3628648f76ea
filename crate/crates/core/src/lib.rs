//! Core library for dynamic-epistemic game solving.
//!
//! The crate models two-team turn-based games that are presented implicitly:
//! an epistemic model describes the initial situation, an action model
//! describes the available moves and how each agent perceives them, and the
//! induced (generally infinite) game arena is explored lazily. For
//! propositional and public action models the arena folds into a provably
//! equivalent finite one, on which winning strategies for epistemic temporal
//! objectives can be synthesized.
//!
//! The crate is `no_std` (it only needs `alloc`); all IO, file formats and
//! the command-line driver live in the companion `delgame-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod arena;
pub mod del;
pub mod fold;
pub mod formulas;
pub mod kripke;
pub mod solve;
pub mod symbols;
pub mod testgen;

pub use arena::{GameArena, History, LassoPlay, LazyArena, Verdict};
pub use del::{ActionModel, Presentation};
pub use formulas::{Formula, Fragment};
pub use kripke::{Agent, Atom, CanonicalKey, EpistemicModel, PointedModel, World};
pub use symbols::{AgentSet, Symbols, Team};
