//! File handling, JSON encoding and the line-based message protocol used by
//! the `little` command.

pub mod protocol;
pub mod report;
pub mod stats;

use little_core::action::{ActionError, ActionOptions};
use little_core::assign::Heuristic;
use little_core::program::{FreezeOptions, Program, SourceError, PRELUDE};

/// Settings shared by every command.
#[derive(Debug, Clone, Default)]
pub struct Config {
    /// Replacement prelude text.
    pub prelude: Option<String>,
    pub freeze: FreezeOptions,
    pub heuristic: Heuristic,
    pub avoid_unsolvable: bool,
}

impl Config {
    pub fn prelude(&self) -> &str {
        self.prelude.as_deref().unwrap_or(PRELUDE)
    }

    pub fn parse(&self, source: &str) -> Result<Program, SourceError> {
        Program::parse_with_prelude(source, self.prelude())
    }

    pub fn action_options(&self) -> ActionOptions {
        ActionOptions {
            freeze: self.freeze,
            avoid_unsolvable: self.avoid_unsolvable,
        }
    }
}

/// Errors that end a command, grouped by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input to the command itself.
    #[error("{0}")]
    Usage(String),
    /// The program does not parse, run or render.
    #[error("{0}")]
    Program(String),
    /// The action cannot be carried out.
    #[error("{0}")]
    Action(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Program(_) | CliError::Io(_) => 1,
            CliError::Usage(_) | CliError::Action(_) => 2,
        }
    }
}

impl From<SourceError> for CliError {
    fn from(e: SourceError) -> Self {
        CliError::Program(e.to_string())
    }
}

impl From<ActionError> for CliError {
    fn from(e: ActionError) -> Self {
        match e {
            ActionError::Source(_) | ActionError::Canvas(_) => CliError::Program(e.to_string()),
            _ => CliError::Action(e.to_string()),
        }
    }
}

/// Runs `f` on a thread with a stack large enough for deeply recursive
/// programs.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(f)
        .expect("spawn worker thread")
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}
