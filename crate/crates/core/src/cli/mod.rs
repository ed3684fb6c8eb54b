//! Plumbing behind the command-line tool that is worth testing on its own:
//! run configuration, counter reports, exit codes, update/query scripts,
//! the randomized self-test and the grid benchmark.

pub mod bench;
pub mod script;
pub mod selftest;

use std::fmt::Write as _;

/// Process exit status of the command-line tool.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Mismatch = 1,
    InputError = 2,
    Cap = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Settings shared by every command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub max_quantifier_depth: usize,
    pub max_templates: usize,
    pub max_d0: usize,
    pub counters: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 42, max_quantifier_depth: 6, max_templates: 4_096, max_d0: 4, counters: false }
    }
}

/// Named work counters, printed as one `name value` pair per line in
/// insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CounterReport {
    entries: Vec<(String, u64)>,
}

impl CounterReport {
    /// Adds `value` to the counter `name`, creating it at zero.
    pub fn add(&mut self, name: &str, value: u64) {
        match self.entries.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => *v += value,
            None => self.entries.push((name.to_string(), value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<u64> {
        self.entries.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, value) in &self.entries {
            let _ = writeln!(out, "{name} {value}");
        }
        out
    }
}
