//! Text input and output of an analysis. The same engine runs behind a
//! terminal, a worker, or a test harness by swapping the channel.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

pub trait IoChannel {
    fn write(&mut self, text: &str);

    /// Blocks until a line is available. `None` means no more input.
    fn read_line(&mut self, prompt: &str) -> Option<String>;
}

/// Collects output in memory and replays scripted input.
#[derive(Debug, Default, Clone)]
pub struct BufferIo {
    pub output: String,
    pub input: VecDeque<String>,
    pub prompts: usize,
}

impl BufferIo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_input<I, S>(lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        BufferIo {
            input: lines.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }
}

impl IoChannel for BufferIo {
    fn write(&mut self, text: &str) {
        self.output.push_str(text);
    }

    fn read_line(&mut self, prompt: &str) -> Option<String> {
        self.prompts += 1;
        self.output.push_str(prompt);
        let l = self.input.pop_front();
        if let Some(l) = &l {
            self.output.push_str(l);
            self.output.push('\n');
        }
        l
    }
}

/// Process standard streams.
#[derive(Debug, Default)]
pub struct StdIo;

impl IoChannel for StdIo {
    fn write(&mut self, text: &str) {
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(text.as_bytes());
        let _ = out.flush();
    }

    fn read_line(&mut self, prompt: &str) -> Option<String> {
        self.write(prompt);
        let mut line = String::new();
        match std::io::stdin().lock().read_line(&mut line) {
            Ok(0) | Err(_) => None,
            Ok(_) => Some(line.trim_end_matches(['\n', '\r']).to_string()),
        }
    }
}

/// Discards output and has no input.
#[derive(Debug, Default)]
pub struct NullIo;

impl IoChannel for NullIo {
    fn write(&mut self, _: &str) {}

    fn read_line(&mut self, _: &str) -> Option<String> {
        None
    }
}
