//! The report every subcommand prints.

use std::fmt;

use program_adverbs::report::{Finding, Status};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum VerdictStatus {
    Proved,
    Refuted,
    Unknown,
}

impl From<Status> for VerdictStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Proved => VerdictStatus::Proved,
            Status::Refuted => VerdictStatus::Refuted,
            Status::Unknown => VerdictStatus::Unknown,
        }
    }
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictStatus::Proved => "PROVED",
            VerdictStatus::Refuted => "REFUTED",
            VerdictStatus::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: VerdictStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// Unrolling bounds `[left, right]` of a bounded check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Verdict {
    pub fn new(name: impl Into<String>, status: impl Into<VerdictStatus>) -> Self {
        Verdict {
            name: name.into(),
            status: status.into(),
            witness: None,
            bounds: None,
            detail: None,
        }
    }

    pub fn witness(mut self, w: impl Into<String>) -> Self {
        self.witness = Some(w.into());
        self
    }

    pub fn bounds(mut self, l: usize, r: usize) -> Self {
        self.bounds = Some([l, r]);
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

impl From<Finding> for Verdict {
    fn from(f: Finding) -> Self {
        Verdict {
            name: f.name,
            status: f.status.into(),
            witness: f.witness,
            bounds: None,
            detail: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Vec<String>,
    pub verdicts: Vec<Verdict>,
    /// Named measurements of stats-only commands, in a fixed order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stats: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub traces: Vec<String>,
    pub timing: Timing,
}

impl Report {
    pub fn new(command: Vec<String>) -> Self {
        Report {
            command,
            verdicts: vec![],
            stats: vec![],
            traces: vec![],
            timing: Timing { elapsed_ms: 0.0 },
        }
    }

    pub fn stat(&mut self, name: &str, value: impl fmt::Display) {
        self.stats.push((name.to_string(), value.to_string()));
    }

    /// 0 when every verdict is PROVED (vacuously for stats-only commands).
    pub fn exit_code(&self) -> i32 {
        if self.verdicts.iter().all(|v| v.status == VerdictStatus::Proved) {
            0
        } else {
            1
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.stats {
            out.push_str(&format!("{k}: {v}\n"));
        }
        for t in &self.traces {
            out.push_str(t);
            out.push('\n');
        }
        for v in &self.verdicts {
            out.push_str(&format!("{}: {}", v.name, v.status));
            if let Some(d) = &v.detail {
                out.push_str(&format!(" [{d}]"));
            }
            if let Some(w) = &v.witness {
                out.push_str(&format!(" (witness: {w})"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trips() {
        let mut r = Report::new(vec!["server".into(), "verify".into()]);
        r.verdicts.push(Verdict::new("Impl ⊑ L1", Status::Proved).bounds(2, 4));
        r.verdicts.push(Verdict::new("Spec ⊑ Impl", Status::Refuted).witness("[accept()=0] => tt"));
        r.stat("rounds", 2);
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"status\":\"REFUTED\""));
        assert_eq!(serde_json::from_str::<Report>(&text).unwrap(), r);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn stats_only_reports_succeed() {
        assert_eq!(Report::new(vec![]).exit_code(), 0);
    }
}
