//! DRAT proof logging.
//!
//! Lemmas are written in plain-text DRAT: one clause per line terminated by
//! `0`, deletions prefixed with `d `. Literal order follows the order of the
//! slice handed to the logger.

pub mod checker;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::cnf::{to_dimacs_vec, Lit};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofEvent {
    Add(Vec<i32>),
    Delete(Vec<i32>),
}

impl fmt::Display for ProofEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lits = match self {
            ProofEvent::Add(l) => l,
            ProofEvent::Delete(l) => {
                write!(f, "d ")?;
                l
            }
        };
        for l in lits {
            write!(f, "{l} ")?;
        }
        write!(f, "0")
    }
}

enum Sink {
    Disabled,
    Memory(Vec<ProofEvent>),
    Stream(BufWriter<Box<dyn Write + Send>>),
}

/// Destination for proof events. A failed write marks the proof incomplete
/// but never interrupts solving.
pub struct ProofLogger {
    sink: Sink,
    complete: bool,
}

impl Default for ProofLogger {
    fn default() -> Self {
        ProofLogger::disabled()
    }
}

impl fmt::Debug for ProofLogger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.sink {
            Sink::Disabled => "disabled",
            Sink::Memory(_) => "memory",
            Sink::Stream(_) => "stream",
        };
        f.debug_struct("ProofLogger")
            .field("sink", &kind)
            .field("complete", &self.complete)
            .finish()
    }
}

impl ProofLogger {
    pub fn disabled() -> ProofLogger {
        ProofLogger {
            sink: Sink::Disabled,
            complete: true,
        }
    }

    pub fn in_memory() -> ProofLogger {
        ProofLogger {
            sink: Sink::Memory(Vec::new()),
            complete: true,
        }
    }

    pub fn to_writer(out: Box<dyn Write + Send>) -> ProofLogger {
        ProofLogger {
            sink: Sink::Stream(BufWriter::new(out)),
            complete: true,
        }
    }

    pub fn to_file(path: &Path) -> io::Result<ProofLogger> {
        Ok(ProofLogger::to_writer(Box::new(File::create(path)?)))
    }

    pub fn is_enabled(&self) -> bool {
        !matches!(self.sink, Sink::Disabled)
    }

    /// False once any write has failed.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn log_learnt(&mut self, clause: &[Lit]) {
        self.emit(|| ProofEvent::Add(to_dimacs_vec(clause)));
    }

    /// Emits `add new` followed by `d old`.
    pub fn log_strengthen(&mut self, old: &[Lit], new: &[Lit]) {
        self.emit(|| ProofEvent::Add(to_dimacs_vec(new)));
        self.emit(|| ProofEvent::Delete(to_dimacs_vec(old)));
    }

    pub fn log_delete(&mut self, clause: &[Lit]) {
        self.emit(|| ProofEvent::Delete(to_dimacs_vec(clause)));
    }

    pub fn log_empty(&mut self) {
        self.emit(|| ProofEvent::Add(Vec::new()));
    }

    pub fn flush(&mut self) {
        if let Sink::Stream(w) = &mut self.sink {
            if w.flush().is_err() {
                self.complete = false;
            }
        }
    }

    /// Events recorded by an in-memory logger.
    pub fn events(&self) -> &[ProofEvent] {
        match &self.sink {
            Sink::Memory(events) => events,
            _ => &[],
        }
    }

    fn emit(&mut self, event: impl FnOnce() -> ProofEvent) {
        match &mut self.sink {
            Sink::Disabled => {}
            Sink::Memory(events) => events.push(event()),
            Sink::Stream(w) => {
                if self.complete && writeln!(w, "{}", event()).is_err() {
                    self.complete = false;
                }
            }
        }
    }
}

impl Drop for ProofLogger {
    fn drop(&mut self) {
        self.flush();
    }
}
