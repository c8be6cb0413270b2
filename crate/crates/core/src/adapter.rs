//! External dependency parsers.
//!
//! An adapter turns raw text into CoNLL-U. Three kinds exist: a subprocess
//! (text on stdin, or substituted for a `{text}` argument), an HTTP endpoint
//! (text as the POST body) and a replay file of frozen parses looked up by
//! sentence text.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::{parse_conllu_str, ParsedSentence};
use crate::render::render;

pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;

#[derive(Debug, Error)]
#[error("{message}")]
pub struct AdapterError {
    pub message: String,
    /// Output captured from the parser (stderr, response body, ...).
    pub diagnostics: String,
}

impl AdapterError {
    fn new(message: impl Into<String>) -> Self {
        AdapterError {
            message: message.into(),
            diagnostics: String::new(),
        }
    }

    fn with_diagnostics(message: impl Into<String>, diagnostics: impl Into<String>) -> Self {
        AdapterError {
            message: message.into(),
            diagnostics: diagnostics.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdapterKind {
    Command,
    Http,
    File,
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_MS
}

/// Parser adapter settings, as written in the pipeline config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParserAdapterConfig {
    pub kind: AdapterKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
}

impl ParserAdapterConfig {
    pub fn file(path: impl Into<PathBuf>) -> Self {
        ParserAdapterConfig {
            kind: AdapterKind::File,
            command: None,
            url: None,
            path: Some(path.into()),
            timeout_ms: DEFAULT_TIMEOUT_MS,
        }
    }

    pub fn command<S: Into<String>>(argv: impl IntoIterator<Item = S>) -> Self {
        ParserAdapterConfig {
            kind: AdapterKind::Command,
            command: Some(argv.into_iter().map(Into::into).collect()),
            url: None,
            path: None,
            timeout_ms: DEFAULT_TIMEOUT_MS,
        }
    }

    pub fn http(url: impl Into<String>) -> Self {
        ParserAdapterConfig {
            kind: AdapterKind::Http,
            command: None,
            url: Some(url.into()),
            path: None,
            timeout_ms: DEFAULT_TIMEOUT_MS,
        }
    }

    /// Resolves a relative replay path against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(p) = &self.path {
            if p.is_relative() {
                self.path = Some(base.join(p));
            }
        }
    }
}

#[derive(Debug)]
pub enum ParserAdapter {
    Command { argv: Vec<String>, timeout: Duration },
    Http { url: String, timeout: Duration },
    File { path: PathBuf, by_text: HashMap<String, ParsedSentence> },
}

impl ParserAdapter {
    pub fn new(cfg: &ParserAdapterConfig) -> Result<Self, AdapterError> {
        let timeout = Duration::from_millis(cfg.timeout_ms);
        match cfg.kind {
            AdapterKind::Command => {
                let argv = cfg.command.clone().unwrap_or_default();
                if argv.is_empty() {
                    return Err(AdapterError::new("command adapter needs a nonempty `command`"));
                }
                Ok(ParserAdapter::Command { argv, timeout })
            }
            AdapterKind::Http => {
                let url = cfg
                    .url
                    .clone()
                    .ok_or_else(|| AdapterError::new("http adapter needs a `url`"))?;
                Ok(ParserAdapter::Http { url, timeout })
            }
            AdapterKind::File => {
                let path = cfg
                    .path
                    .clone()
                    .ok_or_else(|| AdapterError::new("file adapter needs a `path`"))?;
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    AdapterError::new(format!("cannot read replay file {}: {e}", path.display()))
                })?;
                let sentences = parse_conllu_str(&text).map_err(|e| {
                    AdapterError::new(format!("replay file {}: {e}", path.display()))
                })?;
                let mut by_text = HashMap::new();
                for s in sentences {
                    let keys = [
                        normalize(s.raw_text()),
                        normalize(&render(&s)),
                        normalize(
                            &s.tokens()
                                .iter()
                                .map(|t| t.surface.as_str())
                                .collect::<Vec<_>>()
                                .join(" "),
                        ),
                    ];
                    for key in keys {
                        by_text.entry(key).or_insert_with(|| s.clone());
                    }
                }
                Ok(ParserAdapter::File { path, by_text })
            }
        }
    }

    /// Parses one sentence of raw text.
    pub fn parse(&self, raw: &str) -> Result<ParsedSentence, AdapterError> {
        if raw.trim().is_empty() {
            return Err(AdapterError::new("empty parse: input text is empty"));
        }
        match self {
            ParserAdapter::File { path, by_text } => {
                by_text.get(&normalize(raw)).cloned().ok_or_else(|| {
                    AdapterError::new(format!(
                        "no frozen parse for `{}` in {}",
                        raw.trim(),
                        path.display()
                    ))
                })
            }
            ParserAdapter::Command { argv, timeout } => {
                let (output, stderr) = run_command(argv, raw, *timeout)?;
                first_sentence(&output, &stderr)
            }
            ParserAdapter::Http { url, timeout } => {
                let output = post_text(url, raw, *timeout)?;
                first_sentence(&output, "")
            }
        }
    }
}

/// Parses `raw` with a one-off adapter built from `cfg`.
pub fn parse_external(raw: &str, cfg: &ParserAdapterConfig) -> Result<ParsedSentence, AdapterError> {
    ParserAdapter::new(cfg)?.parse(raw)
}

fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn first_sentence(conllu: &str, stderr: &str) -> Result<ParsedSentence, AdapterError> {
    let mut diagnostics = stderr.to_string();
    diagnostics.push_str(conllu);
    let sentences = parse_conllu_str(conllu).map_err(|e| {
        AdapterError::with_diagnostics(format!("parser returned invalid CoNLL-U: {e}"), diagnostics.clone())
    })?;
    sentences
        .into_iter()
        .next()
        .ok_or_else(|| AdapterError::with_diagnostics("empty parse: parser returned no sentence", diagnostics))
}

/// Runs the parser once; returns its stdout and stderr.
fn run_command(argv: &[String], raw: &str, timeout: Duration) -> Result<(String, String), AdapterError> {
    let templated = argv.iter().any(|a| a.contains("{text}"));
    let args: Vec<String> = argv[1..].iter().map(|a| a.replace("{text}", raw)).collect();
    let mut child = Command::new(&argv[0])
        .args(&args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| AdapterError::new(format!("cannot start `{}`: {e}", argv[0])))?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let input = if templated { String::new() } else { format!("{raw}\n") };
    let writer = thread::spawn(move || {
        // A parser that exits without reading its input is not an error here.
        let _ = stdin.write_all(input.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");
    let out_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stdout.read_to_end(&mut buf);
        buf
    });
    let err_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stderr.read_to_end(&mut buf);
        buf
    });

    let start = Instant::now();
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if start.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                // Grandchildren may still hold the pipes open, so the reader
                // threads are left to finish on their own.
                return Err(AdapterError::new(format!(
                    "parser timed out after {} ms",
                    timeout.as_millis()
                )));
            }
            Ok(None) => thread::sleep(Duration::from_millis(2)),
            Err(e) => return Err(AdapterError::new(format!("waiting for parser failed: {e}"))),
        }
    };
    let _ = writer.join();
    let stdout = String::from_utf8_lossy(&out_reader.join().unwrap_or_default()).into_owned();
    let stderr = String::from_utf8_lossy(&err_reader.join().unwrap_or_default()).into_owned();
    if !status.success() {
        return Err(AdapterError::with_diagnostics(
            format!("parser exited with {status}"),
            stderr,
        ));
    }
    if stdout.trim().is_empty() {
        return Err(AdapterError::with_diagnostics("empty parse: parser produced no output", stderr));
    }
    Ok((stdout, stderr))
}

fn post_text(url: &str, raw: &str, timeout: Duration) -> Result<String, AdapterError> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let mut response = agent
        .post(url)
        .header("Content-Type", "text/plain; charset=utf-8")
        .send(raw)
        .map_err(|e| AdapterError::new(format!("request to {url} failed: {e}")))?;
    let status = response.status();
    let body = response
        .body_mut()
        .read_to_string()
        .map_err(|e| AdapterError::new(format!("reading response from {url} failed: {e}")))?;
    if !status.is_success() {
        return Err(AdapterError::with_diagnostics(
            format!("parser endpoint returned {status}"),
            body,
        ));
    }
    if body.trim().is_empty() {
        return Err(AdapterError::new("empty parse: endpoint returned no output"));
    }
    Ok(body)
}
