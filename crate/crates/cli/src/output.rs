//! Buffered output written to stdout or a single `--out` file.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Jsonl,
}

pub struct Sink {
    pub format: Format,
    buf: String,
}

impl Sink {
    pub fn new(format: Format) -> Sink {
        Sink {
            format,
            buf: String::new(),
        }
    }

    /// One record: its JSON form in `jsonl` mode, otherwise the text line.
    pub fn record(&mut self, json: Value, text: impl FnOnce() -> String) {
        match self.format {
            Format::Jsonl => self.line(&json.to_string()),
            Format::Text => self.line(&text()),
        }
    }

    pub fn line(&mut self, s: &str) {
        self.buf.push_str(s);
        self.buf.push('\n');
    }

    /// Raw text, written as-is in either mode.
    pub fn raw(&mut self, s: &str) {
        self.buf.push_str(s);
        if !s.is_empty() && !s.ends_with('\n') {
            self.buf.push('\n');
        }
    }

    pub fn flush(self, out: Option<&Path>) -> std::io::Result<()> {
        match out {
            Some(path) => std::fs::write(path, self.buf),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(self.buf.as_bytes())?;
                stdout.flush()
            }
        }
    }
}
