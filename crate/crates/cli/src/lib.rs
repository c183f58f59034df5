//! `qe-verify`: problem files in, deterministic reports out.

use std::fmt;

pub mod commands;
pub mod problem;
pub mod report;

pub use problem::{Overrides, ProblemFile, Resolved};
pub use report::{Report, Verdict};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// A problem-file defect, located by a JSON pointer (`""` for the whole file).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputError {
    pub pointer: String,
    pub message: String,
}

impl InputError {
    pub fn new(pointer: &str, message: impl fmt::Display) -> Self {
        InputError { pointer: pointer.to_string(), message: message.to_string() }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pointer.as_str() {
            "" => f.write_str(&self.message),
            p => write!(f, "{p}: {}", self.message),
        }
    }
}

impl std::error::Error for InputError {}
