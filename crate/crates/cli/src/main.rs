use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use unilab::config::list_options;
use unilab::io::StdIo;
use unilab::protocol::{self, encode_share, SharePayload};

#[derive(Parser)]
#[command(name = "unilab", version, about = "Abstract interpreter for the Universal language")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyze a program.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Set an analysis option, as key=value.
        #[arg(long = "option", value_name = "KEY=VALUE")]
        options: Vec<String>,
        /// Run under the abstract debugger.
        #[arg(long)]
        interactive: bool,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        no_color: bool,
        /// Print a share link fragment instead of analyzing.
        #[arg(long)]
        share_url: bool,
    },
    /// List the options of a configuration as JSON.
    Options {
        #[arg(long)]
        config: PathBuf,
    },
    /// Serve the worker protocol on standard input and output.
    Worker,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_config(path: &PathBuf) -> Result<Value, String> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Worker => match protocol::serve(std::io::stdin().lock(), std::io::stdout()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Cmd::Options { config } => {
            let stack = match read_config(&config).and_then(|c| protocol::prepare_stack(&c, &BTreeMap::new())) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let text = serde_json::to_string_pretty(&list_options(&stack)).expect("metadata serializes");
            println!("{text}");
            ExitCode::SUCCESS
        }
        Cmd::Analyze {
            file,
            config,
            options,
            interactive,
            format,
            no_color,
            share_url,
        } => {
            let source = match read(&file) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let config = match read_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let mut opts: BTreeMap<String, Value> = BTreeMap::new();
            for o in &options {
                match o.split_once('=') {
                    Some((k, v)) => {
                        opts.insert(k.trim().to_string(), Value::String(v.trim().to_string()));
                    }
                    None => return fail(format!("expected key=value, got '{o}'")),
                }
            }
            if share_url {
                println!("{}", encode_share(&SharePayload::new(source, config, opts)));
                return ExitCode::SUCCESS;
            }
            if interactive {
                opts.insert("engine".into(), Value::String("interactive".into()));
            }
            if let Some(f) = format {
                let name = match f {
                    Format::Text => "text",
                    Format::Json => "json",
                };
                opts.insert("format".into(), Value::String(name.into()));
            }
            if no_color || std::env::var_os("NO_COLOR").is_some() {
                opts.insert("no-color".into(), Value::Bool(true));
            }
            let stack = match protocol::prepare_stack(&config, &opts) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let prog = match protocol::prepare_program(&source, &file.to_string_lossy(), &stack) {
                Ok(p) => p,
                Err(e) => return fail(e),
            };
            let report = protocol::analyze(&prog, &stack, &mut StdIo, None);
            ExitCode::from(report.status() as u8)
        }
    }
}
