//! Tracing interpreter, trace-directed program repair and live synchronization
//! for a small functional language that generates SVG.
//!
//! Every number computed by a program carries a trace of the literals and
//! primitive operations it came from. When an output number is changed, the
//! trace becomes an equation over the program's literals, and solving it for
//! one literal gives a local program update.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod action;
pub mod assign;
pub mod census;
pub mod corpus;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod program;
pub mod session;
pub mod solver;
pub mod subst;
pub mod svg;
pub mod syntax;
pub mod synthesis;
pub mod trace;
pub mod value;
pub mod zones;
