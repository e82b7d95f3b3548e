//! Hosting an analysis behind JSON messages, plus the share-link codec.
//!
//! A [`Worker`] runs each analysis on its own thread. The host sends
//! [`ToWorker`] messages and receives [`FromWorker`] messages; in
//! interactive mode the analysis blocks on `input-request` until the host
//! answers with `input`.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;
use std::thread::JoinHandle;

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{build_stack, list_options, parse_config_value, set_option, DomainStack, OptionMeta};
use crate::engine;
use crate::frontend::{self, TypedProgram};
use crate::interactive;
use crate::io::IoChannel;

pub const LANGUAGE: &str = "universal";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ToWorker {
    Start {
        program: String,
        language: String,
        config: Value,
        #[serde(default)]
        options: BTreeMap<String, Value>,
    },
    Input {
        data: String,
    },
    Interrupt {},
    QueryOptions {
        config: Value,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum FromWorker {
    Output { data: String },
    InputRequest { prompt: String },
    Done { status: i32, report: Value },
    OptionsMetadata { options: Vec<OptionMeta> },
    Error { message: String },
}

/// Option values arrive as JSON; the option parser takes text.
fn option_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn config_doc(v: &Value) -> Result<Value, String> {
    match v {
        Value::String(s) => serde_json::from_str(s).map_err(|e| format!("config: {e}")),
        other => Ok(other.clone()),
    }
}

/// Builds the domain stack for `config` with option overrides applied.
pub fn prepare_stack(config: &Value, options: &BTreeMap<String, Value>) -> Result<DomainStack, String> {
    let tree = parse_config_value(&config_doc(config)?).map_err(|e| format!("config: {e}"))?;
    let mut stack = build_stack(&tree);
    for (k, v) in options {
        set_option(&mut stack, k, &option_text(v)).map_err(|e| e.to_string())?;
    }
    Ok(stack)
}

/// Loads a program and checks that the stack can analyze it.
pub fn prepare_program(source: &str, filename: &str, stack: &DomainStack) -> Result<TypedProgram, String> {
    let prog = frontend::load(source, filename)
        .map_err(|ds| ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))?;
    stack
        .supports(prog.program.has_loops(), prog.program.has_user_calls())
        .map_err(|e| format!("config: {e}"))?;
    Ok(prog)
}

/// Runs the analysis selected by the `engine` option.
pub fn analyze(
    prog: &TypedProgram,
    stack: &DomainStack,
    io: &mut dyn IoChannel,
    cancel: Option<&AtomicBool>,
) -> engine::Report {
    if stack.str_option("engine") == Some("interactive") {
        interactive::run_session(prog, stack, io, cancel)
    } else {
        engine::run(prog, stack, io, cancel)
    }
}

struct WorkerIo {
    out: Sender<FromWorker>,
    input: Receiver<Option<String>>,
    awaiting: Arc<AtomicBool>,
}

impl IoChannel for WorkerIo {
    fn write(&mut self, text: &str) {
        if !text.is_empty() {
            let _ = self.out.send(FromWorker::Output { data: text.to_string() });
        }
    }

    fn read_line(&mut self, prompt: &str) -> Option<String> {
        self.awaiting.store(true, Ordering::SeqCst);
        let _ = self.out.send(FromWorker::InputRequest {
            prompt: prompt.to_string(),
        });
        self.input.recv().ok().flatten()
    }
}

struct Running {
    thread: JoinHandle<()>,
    cancel: Arc<AtomicBool>,
    input: Sender<Option<String>>,
    awaiting: Arc<AtomicBool>,
}

/// Host side of the protocol. Replies go to the receiver returned by
/// [`Worker::new`].
pub struct Worker {
    out: Sender<FromWorker>,
    running: Option<Running>,
}

impl Worker {
    pub fn new() -> (Worker, Receiver<FromWorker>) {
        let (tx, rx) = channel();
        (
            Worker {
                out: tx,
                running: None,
            },
            rx,
        )
    }

    fn reply(&self, m: FromWorker) {
        let _ = self.out.send(m);
    }

    fn error(&self, message: impl Into<String>) {
        self.reply(FromWorker::Error {
            message: message.into(),
        });
    }

    /// Whether an analysis thread is still running.
    pub fn is_running(&self) -> bool {
        self.running.as_ref().is_some_and(|r| !r.thread.is_finished())
    }

    /// Handles one message in wire format.
    pub fn handle_json(&mut self, text: &str) {
        match serde_json::from_str::<ToWorker>(text) {
            Ok(m) => self.handle(m),
            Err(e) => self.error(format!("malformed message: {e}")),
        }
    }

    pub fn handle(&mut self, msg: ToWorker) {
        if !self.is_running() {
            if let Some(r) = self.running.take() {
                let _ = r.thread.join();
            }
        }
        match msg {
            ToWorker::QueryOptions { config } => match prepare_stack(&config, &BTreeMap::new()) {
                Ok(stack) => self.reply(FromWorker::OptionsMetadata {
                    options: list_options(&stack),
                }),
                Err(e) => self.error(e),
            },
            ToWorker::Interrupt {} => match &self.running {
                Some(r) => {
                    r.cancel.store(true, Ordering::SeqCst);
                    let _ = r.input.send(None);
                }
                None => self.error("no analysis is running"),
            },
            ToWorker::Input { data } => match &self.running {
                Some(r) if r.awaiting.swap(false, Ordering::SeqCst) => {
                    let _ = r.input.send(Some(data));
                }
                Some(_) => self.error("no input was requested"),
                None => self.error("no analysis is running"),
            },
            ToWorker::Start {
                program,
                language,
                config,
                options,
            } => {
                if language != LANGUAGE {
                    return self.error(format!("unsupported language: {language}"));
                }
                let prepared = prepare_stack(&config, &options)
                    .and_then(|stack| prepare_program(&program, "program.u", &stack).map(|p| (p, stack)));
                let (prog, stack) = match prepared {
                    Ok(x) => x,
                    Err(e) => return self.error(e),
                };
                self.stop();
                self.spawn(prog, stack);
            }
        }
    }

    /// Interrupts the current analysis, if any, and waits for its `done`.
    pub fn stop(&mut self) {
        if let Some(r) = self.running.take() {
            r.cancel.store(true, Ordering::SeqCst);
            let _ = r.input.send(None);
            let _ = r.thread.join();
        }
    }

    fn spawn(&mut self, prog: TypedProgram, stack: DomainStack) {
        let cancel = Arc::new(AtomicBool::new(false));
        let awaiting = Arc::new(AtomicBool::new(false));
        let (itx, irx) = channel();
        let out = self.out.clone();
        let mut io = WorkerIo {
            out: out.clone(),
            input: irx,
            awaiting: awaiting.clone(),
        };
        let flag = cancel.clone();
        let thread = std::thread::spawn(move || {
            let report = analyze(&prog, &stack, &mut io, Some(&flag));
            let _ = out.send(FromWorker::Done {
                status: report.status(),
                report: report.to_json(),
            });
        });
        self.running = Some(Running {
            thread,
            cancel,
            input: itx,
            awaiting,
        });
    }
}

impl Drop for Worker {
    fn drop(&mut self) {
        self.stop();
    }
}

/// Serves the protocol over line-delimited JSON until `input` ends.
pub fn serve(input: impl std::io::BufRead, mut output: impl std::io::Write + Send + 'static) -> std::io::Result<()> {
    let (mut worker, rx) = Worker::new();
    let pump = std::thread::spawn(move || {
        for m in rx {
            let line = serde_json::to_string(&m).expect("messages serialize");
            if writeln!(output, "{line}").and_then(|_| output.flush()).is_err() {
                break;
            }
        }
    });
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            worker.handle_json(&line);
        }
    }
    // let a running analysis finish before closing the stream
    if let Some(r) = worker.running.take() {
        let _ = r.thread.join();
    }
    drop(worker);
    let _ = pump.join();
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharePayload {
    pub v: u32,
    pub language: String,
    pub program: String,
    pub config: Value,
    #[serde(default)]
    pub options: BTreeMap<String, Value>,
}

impl SharePayload {
    pub fn new(program: impl Into<String>, config: Value, options: BTreeMap<String, Value>) -> Self {
        SharePayload {
            v: 1,
            language: LANGUAGE.to_string(),
            program: program.into(),
            config,
            options,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShareError {
    #[error("share link must start with 's='")]
    Prefix,
    #[error("share link is not valid base64url")]
    Base64,
    #[error("share link does not hold valid JSON: {0}")]
    Json(String),
    #[error("unsupported share link version {0}")]
    Version(u32),
    #[error("unsupported language: {0}")]
    Language(String),
}

/// `s=` followed by unpadded base64url of the payload as sorted-key JSON.
pub fn encode_share(p: &SharePayload) -> String {
    // serde_json maps keep keys sorted
    let v = serde_json::to_value(p).expect("payload serializes");
    format!("s={}", URL_SAFE_NO_PAD.encode(v.to_string()))
}

/// Accepts the fragment with or without a leading `#`.
pub fn decode_share(fragment: &str) -> Result<SharePayload, ShareError> {
    let body = fragment
        .strip_prefix('#')
        .unwrap_or(fragment)
        .strip_prefix("s=")
        .ok_or(ShareError::Prefix)?;
    let bytes = URL_SAFE_NO_PAD.decode(body).map_err(|_| ShareError::Base64)?;
    let p: SharePayload = serde_json::from_slice(&bytes).map_err(|e| ShareError::Json(e.to_string()))?;
    if p.v != 1 {
        return Err(ShareError::Version(p.v));
    }
    if p.language != LANGUAGE {
        return Err(ShareError::Language(p.language));
    }
    Ok(p)
}
