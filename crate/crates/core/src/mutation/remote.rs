use super::{extract_program, MutationError, Mutator, MutatorConfig, Prompt};
use crate::seeds;
use serde::{Deserialize, Serialize};
use std::thread;
use std::time::Duration;

#[derive(Serialize)]
struct Request<'a> {
    prompt: &'a str,
    temperature: f64,
    max_tokens: u32,
    seed: u64,
}

#[derive(Deserialize)]
struct Reply {
    text: String,
}

/// Candidate generator backed by an HTTP completion endpoint.
///
/// Each sample is one `POST {endpoint}` with a JSON body
/// `{prompt, temperature, max_tokens, seed}` answered by `{text}`.
pub struct RemoteMutator {
    config: MutatorConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl std::fmt::Debug for RemoteMutator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteMutator")
            .field("endpoint", &self.config.endpoint)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

enum Failure {
    Auth(u16),
    Retryable(String),
    Permanent(String),
}

impl RemoteMutator {
    /// Reads the key from `config.api_key_env`; an empty variable name means
    /// the endpoint needs no key.
    pub fn new(config: MutatorConfig) -> Result<Self, MutationError> {
        config.validate()?;
        let api_key = if config.api_key_env.is_empty() {
            None
        } else {
            Some(std::env::var(&config.api_key_env).map_err(|_| {
                MutationError::Config(format!("environment variable {} is not set", config.api_key_env))
            })?)
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Ok(Self { config, api_key, agent })
    }

    fn request_once(&self, prompt: &str, seed: u64) -> Result<String, Failure> {
        let body = Request {
            prompt,
            temperature: self.config.temperature,
            max_tokens: self.config.max_tokens,
            seed,
        };
        let mut req = self.agent.post(&self.config.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| Failure::Retryable(e.to_string()))?;
        let status = resp.status().as_u16();
        match status {
            200..=299 => resp
                .body_mut()
                .read_json::<Reply>()
                .map(|r| r.text)
                .map_err(|e| Failure::Permanent(format!("malformed reply: {e}"))),
            401 | 403 => Err(Failure::Auth(status)),
            429 | 500..=599 => Err(Failure::Retryable(format!("HTTP {status}"))),
            _ => Err(Failure::Permanent(format!("HTTP {status}"))),
        }
    }

    fn request(&self, prompt: &str, seed: u64) -> Result<String, Failure> {
        let mut last = Failure::Retryable("no attempt".into());
        for attempt in 0..=self.config.retries {
            if attempt > 0 {
                thread::sleep(Duration::from_millis(100 << attempt.min(6)));
            }
            match self.request_once(prompt, seed) {
                Err(Failure::Retryable(msg)) => {
                    log::warn!("mutator request failed (attempt {}): {msg}", attempt + 1);
                    last = Failure::Retryable(msg);
                }
                other => return other,
            }
        }
        Err(last)
    }
}

impl Mutator for RemoteMutator {
    fn propose(&self, prompt: &Prompt, seed: u64, n: usize) -> Result<Vec<String>, MutationError> {
        let mut results: Vec<Result<String, Failure>> = Vec::with_capacity(n);
        let seeds: Vec<u64> = (0..n as u64).map(|k| seeds::derive(seed, &[k])).collect();
        for chunk in seeds.chunks(self.config.in_flight) {
            let batch: Vec<_> = thread::scope(|s| {
                let handles: Vec<_> =
                    chunk.iter().map(|&sd| s.spawn(move || self.request(&prompt.text, sd))).collect();
                handles.into_iter().map(|h| h.join().expect("request thread panicked")).collect()
            });
            results.extend(batch);
        }

        let mut texts = Vec::with_capacity(n);
        let mut errors = Vec::new();
        for r in results {
            match r {
                Ok(raw) => texts.push(extract_program(&raw).map_or(raw, |p| p.render())),
                Err(Failure::Auth(status)) => return Err(MutationError::Auth { status }),
                Err(Failure::Retryable(m) | Failure::Permanent(m)) => errors.push(m),
            }
        }
        if texts.is_empty() && !errors.is_empty() {
            return Err(MutationError::Transport(errors.swap_remove(0)));
        }
        if !errors.is_empty() {
            log::warn!("{} of {n} mutator samples failed", errors.len());
        }
        Ok(texts)
    }
}
