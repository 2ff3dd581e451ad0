//! Adapter for an external RNAfold-compatible folding engine.
//!
//! The engine receives the sequence (RNA alphabet, one line) on standard
//! input and answers with two lines: the sequence echo, then
//! `STRUCTURE (ENERGY)`.

use std::io::Write;
use std::process::{Command, Stdio};

use super::{parse_dot_bracket, Folder, SecondaryStructure};
use crate::error::{Error, Result};
use crate::seq::NucleicSequence;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalFolder {
    program: String,
    args: Vec<String>,
}

impl ExternalFolder {
    /// Builds an adapter from a whitespace-separated command template, e.g.
    /// `RNAfold --noPS -T 37`. Options are passed through verbatim.
    pub fn from_template(template: &str) -> Result<Self> {
        let mut parts = template.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| Error::Config("empty external folding command".into()))?;
        Ok(ExternalFolder {
            program,
            args: parts.collect(),
        })
    }

    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        ExternalFolder {
            program: program.into(),
            args,
        }
    }

    fn command_line(&self) -> String {
        std::iter::once(self.program.as_str())
            .chain(self.args.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl Folder for ExternalFolder {
    fn fold(&self, seq: &NucleicSequence) -> Result<SecondaryStructure> {
        let launch = |source| Error::EngineLaunch {
            command: self.command_line(),
            source,
        };
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(launch)?;
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            let line = format!("{}\n", seq.rna_string());
            // an engine that exits early closes the pipe; its status is reported below
            let _ = stdin.write_all(line.as_bytes());
        }
        let output = child.wait_with_output().map_err(launch)?;
        if !output.status.success() {
            return Err(Error::EngineFailed {
                status: output.status.to_string(),
                stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
            });
        }
        let text = String::from_utf8_lossy(&output.stdout);
        parse_fold_output(&text, seq.len())
    }

    fn name(&self) -> &str {
        "external"
    }
}

/// Splits `STRUCTURE (ENERGY)` into the structure token and energy. Spaces
/// inside the parentheses are allowed. The structure token is not validated.
pub fn parse_energy_line(line: &str) -> Result<(String, f64)> {
    let line = line.trim_end();
    let body = line
        .strip_suffix(')')
        .ok_or_else(|| Error::MalformedOutput(format!("missing energy in {line:?}")))?;
    let open = body
        .rfind('(')
        .ok_or_else(|| Error::MalformedOutput(format!("missing energy in {line:?}")))?;
    let energy: f64 = body[open + 1..]
        .trim()
        .parse()
        .map_err(|_| Error::MalformedOutput(format!("bad energy in {line:?}")))?;
    let structure = body[..open].trim();
    if structure.is_empty() {
        return Err(Error::MalformedOutput(format!("missing structure in {line:?}")));
    }
    Ok((structure.to_string(), energy))
}

/// Parses engine output: `>` header lines and blank lines are skipped, the
/// first remaining line is the sequence echo and the second the structure
/// with its energy.
pub fn parse_fold_output(text: &str, expected_len: usize) -> Result<SecondaryStructure> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('>'));
    let echo = lines.next().ok_or_else(|| Error::MalformedOutput("no output".into()))?;
    let line = lines
        .next()
        .ok_or_else(|| Error::MalformedOutput("missing structure line".into()))?;
    let (structure, energy) = parse_energy_line(line)?;
    let parsed = parse_dot_bracket(&structure).map_err(|e| Error::MalformedOutput(e.to_string()))?;
    if parsed.len() != expected_len || echo.len() != expected_len {
        return Err(Error::MalformedOutput(format!(
            "structure length {} does not match sequence length {expected_len}",
            parsed.len()
        )));
    }
    Ok(parsed.with_energy(energy))
}

/// Renders a fold in the two-line engine format, e.g.
/// `GGGAAAACCC\n(((....))) (-1.20)\n`.
pub fn format_fold_output(seq: &NucleicSequence, structure: &SecondaryStructure) -> String {
    let mut energy = structure.energy().unwrap_or(0.0);
    if energy == 0.0 {
        energy = 0.0; // drops the sign of -0.0
    }
    format!("{}\n{} ({:.2})\n", seq.rna_string(), structure.dot_bracket(), energy)
}
