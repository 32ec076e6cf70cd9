//! Prompt assembly, candidate extraction and the two candidate generators.

mod local;
#[cfg(feature = "remote")]
mod remote;

pub use local::{LocalMutator, MutationKind};
#[cfg(feature = "remote")]
pub use remote::RemoteMutator;

use crate::afdsl::{self, Program};
use crate::programs_db::ScoredProgram;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

/// Template version embedded in every prompt.
pub const PROMPT_TEMPLATE_VERSION: u32 = 1;
const TEMPLATE: &str = include_str!("../../resources/prompt_v1.txt");

#[derive(Debug, Error)]
pub enum MutationError {
    #[error("mutator configuration: {0}")]
    Config(String),
    #[error("authentication rejected by the endpoint (HTTP {status})")]
    Auth { status: u16 },
    #[error("no response from the endpoint after retries: {0}")]
    Transport(String),
}

impl MutationError {
    /// Errors that must stop the search rather than skip a batch.
    pub fn is_fatal(&self) -> bool {
        matches!(self, MutationError::Config(_) | MutationError::Auth { .. })
    }
}

/// A prompt showing one or two programs in ascending score order and
/// requesting the next version.
#[derive(Clone, Debug, PartialEq)]
pub struct Prompt {
    /// Programs shown, lowest score first.
    pub programs: Vec<Program>,
    pub text: String,
}

impl Prompt {
    /// The highest-scoring program in the prompt.
    pub fn latest(&self) -> &Program {
        self.programs.last().expect("prompt holds a program")
    }

    /// The lowest-scoring program in the prompt.
    pub fn earliest(&self) -> &Program {
        &self.programs[0]
    }
}

fn order(a: &ScoredProgram, b: &ScoredProgram) -> Ordering {
    a.aggregate
        .total_cmp(&b.aggregate)
        .then(a.length.cmp(&b.length))
        .then_with(|| a.id.cmp(&b.id))
}

fn function_block(version: usize, program: Option<&Program>) -> String {
    let doc = match version {
        0 => "Returns the index of the point to collect.".to_string(),
        v if program.is_some() => format!("Improved version of `acquisition_function_v{}`.", v - 1),
        _ => "Improved version of the previous `acquisition_function`.".to_string(),
    };
    let mut s = format!("\n## acquisition_function_v{version}\n\"\"\"{doc}\"\"\"\n");
    if let Some(p) = program {
        s.push_str(&p.render());
        s.push('\n');
    }
    s
}

/// Builds the prompt for two sampled programs. The same program twice gives
/// the single-program form that requests `v1`.
pub fn build_prompt(a: &ScoredProgram, b: &ScoredProgram) -> Prompt {
    let programs: Vec<Program> = if a.id == b.id {
        vec![a.program.clone()]
    } else {
        let (lo, hi) = if order(a, b) == Ordering::Greater { (b, a) } else { (a, b) };
        vec![lo.program.clone(), hi.program.clone()]
    };
    let mut functions: String =
        programs.iter().enumerate().map(|(v, p)| function_block(v, Some(p))).collect();
    functions.push_str(&function_block(programs.len(), None));
    let text = TEMPLATE.replace("{{FUNCTIONS}}", &functions);
    Prompt { programs, text }
}

/// Produces candidate program texts for a prompt.
pub trait Mutator: Send + Sync {
    /// Up to `n` candidate texts. Texts that fail to parse are kept so the
    /// caller can count them as incorrect.
    fn propose(&self, prompt: &Prompt, seed: u64, n: usize) -> Result<Vec<String>, MutationError>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutatorKind {
    Local,
    Remote,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MutatorConfig {
    pub kind: MutatorKind,
    pub endpoint: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub samples_per_prompt: usize,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: f64,
    pub retries: u32,
    pub in_flight: usize,
}

impl Default for MutatorConfig {
    fn default() -> Self {
        Self {
            kind: MutatorKind::Local,
            endpoint: String::new(),
            api_key_env: "AFSEARCH_API_KEY".into(),
            samples_per_prompt: 12,
            temperature: 0.8,
            max_tokens: 1024,
            timeout_secs: 60.0,
            retries: 3,
            in_flight: 4,
        }
    }
}

impl MutatorConfig {
    pub fn validate(&self) -> Result<(), MutationError> {
        if self.samples_per_prompt == 0 {
            return Err(MutationError::Config("samples_per_prompt must be at least 1".into()));
        }
        if self.kind == MutatorKind::Remote {
            if self.endpoint.is_empty() {
                return Err(MutationError::Config("remote mutator needs an endpoint".into()));
            }
            if !(self.timeout_secs > 0.0) {
                return Err(MutationError::Config("timeout_secs must be positive".into()));
            }
            if self.in_flight == 0 {
                return Err(MutationError::Config("in_flight must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Instantiates the configured mutator.
    pub fn build(&self) -> Result<Box<dyn Mutator>, MutationError> {
        self.validate()?;
        match self.kind {
            MutatorKind::Local => Ok(Box::new(LocalMutator::default())),
            #[cfg(feature = "remote")]
            MutatorKind::Remote => Ok(Box::new(RemoteMutator::new(self.clone())?)),
            #[cfg(not(feature = "remote"))]
            MutatorKind::Remote => Err(MutationError::Config("built without remote support".into())),
        }
    }
}

/// First program found in a free-form response: fenced blocks first, then a
/// block under a function header, then any run of lines that parses.
pub fn extract_program(response: &str) -> Option<Program> {
    let lines: Vec<&str> = response.lines().collect();

    let mut i = 0;
    while i < lines.len() {
        if lines[i].trim_start().starts_with("```") {
            let start = i + 1;
            let mut end = start;
            while end < lines.len() && !lines[end].trim_start().starts_with("```") {
                end += 1;
            }
            if let Ok(p) = afdsl::parse(&lines[start..end].join("\n")) {
                return Some(p);
            }
            i = end + 1;
        } else {
            i += 1;
        }
    }

    for (i, line) in lines.iter().enumerate() {
        if line.trim_start().starts_with("## acquisition_function_v") {
            let end = (i + 1..lines.len())
                .find(|&j| lines[j].trim_start().starts_with("##"))
                .unwrap_or(lines.len());
            let body: Vec<&str> = lines[i + 1..end]
                .iter()
                .copied()
                .filter(|l| !l.trim_start().starts_with("\"\"\""))
                .collect();
            if let Ok(p) = afdsl::parse(&body.join("\n")) {
                return Some(p);
            }
        }
    }

    const WINDOW: usize = 40;
    for start in 0..lines.len() {
        let head = lines[start].trim_start();
        if !(head.starts_with("let ") || head.starts_with("argmax") || head.starts_with("argmin")) {
            continue;
        }
        for end in start + 1..=(start + WINDOW).min(lines.len()) {
            if let Ok(p) = afdsl::parse(&lines[start..end].join("\n")) {
                return Some(p);
            }
        }
    }
    None
}
