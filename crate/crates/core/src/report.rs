//! Verdicts shared by the case studies and the command line.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Proved,
    Refuted,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Proved => "PROVED",
            Status::Refuted => "REFUTED",
            Status::Unknown => "UNKNOWN",
        })
    }
}

/// One named finding, optionally with a counterexample or a proof summary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub name: String,
    pub status: Status,
    pub witness: Option<String>,
}

impl Finding {
    pub fn new(name: impl Into<String>, status: Status) -> Self {
        Finding {
            name: name.into(),
            status,
            witness: None,
        }
    }

    pub fn with_witness(mut self, w: impl Into<String>) -> Self {
        self.witness = Some(w.into());
        self
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.status)?;
        if let Some(w) = &self.witness {
            write!(f, " ({w})")?;
        }
        Ok(())
    }
}
