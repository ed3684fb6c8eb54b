//! Update/query scripts for the Σ₁ index: `add <Rel> v1 … vt`,
//! `del <Rel> v1 … vt` and `ask <formula>`, one per line, `#` comments.

use thiserror::Error;

use crate::logic::Formula;
use crate::sigma1::{BEIndex, IndexError, UpdateReport};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Add(String, Vec<usize>),
    Del(String, Vec<usize>),
    Ask(Formula),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error("script line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("script line {line}: {source}")]
    Index { line: usize, source: IndexError },
}

impl ScriptError {
    pub fn is_cap(&self) -> bool {
        matches!(self, ScriptError::Index { source, .. } if source.is_cap())
    }
}

pub fn parse_script(text: &str) -> Result<Vec<(usize, Command)>, ScriptError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let syntax = |msg: String| ScriptError::Syntax { line, msg };
        let (op, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let command = match op {
            "ask" => Command::Ask(Formula::parse(rest).map_err(|e| syntax(e.to_string()))?),
            "add" | "del" => {
                let mut words = rest.split_whitespace();
                let rel = words.next().ok_or_else(|| syntax(format!("`{op}` needs a relation name")))?.to_string();
                let tuple = words
                    .map(|w| w.parse().map_err(|_| syntax(format!("bad element `{w}`"))))
                    .collect::<Result<Vec<usize>, _>>()?;
                if op == "add" {
                    Command::Add(rel, tuple)
                } else {
                    Command::Del(rel, tuple)
                }
            }
            _ => return Err(syntax(format!("unknown command `{op}`"))),
        };
        out.push((line, command));
    }
    Ok(out)
}

/// Outcome of one script step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Update(UpdateReport),
    /// Rendered answer and work units.
    Answer(String, u64),
}

/// Runs a script against the index, stopping at the first failing line.
pub fn run_script(index: &mut BEIndex, script: &[(usize, Command)]) -> Result<Vec<Step>, ScriptError> {
    let mut out = Vec::with_capacity(script.len());
    for (line, command) in script {
        let at = |source: IndexError| ScriptError::Index { line: *line, source };
        let step = match command {
            Command::Add(rel, tuple) => Step::Update(index.insert(rel, tuple).map_err(at)?),
            Command::Del(rel, tuple) => Step::Update(index.remove(rel, tuple).map_err(at)?),
            Command::Ask(phi) => {
                let answer = index.query(phi).map_err(at)?;
                Step::Answer(answer.render(), answer.work)
            }
        };
        out.push(step);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripts_parse_line_by_line() {
        let s = parse_script("# setup\nadd E 0 1\n\ndel P 3\nask E x. P(x)\nadd Z\n").unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s[0], (2, Command::Add("E".into(), vec![0, 1])));
        assert_eq!(s[1], (4, Command::Del("P".into(), vec![3])));
        assert!(matches!(&s[2], (5, Command::Ask(_))));
        assert_eq!(s[3], (6, Command::Add("Z".into(), vec![])));
    }

    #[test]
    fn bad_lines_are_reported_with_their_number() {
        for (text, line) in [("add E 0 x\n", 1), ("ask E x.\n", 1), ("\nmove E 1 2\n", 2), ("del\n", 1)] {
            match parse_script(text) {
                Err(ScriptError::Syntax { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
