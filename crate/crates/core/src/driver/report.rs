use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use super::{Outcome, Verdict, VerifySummary};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// Machine-readable form of a verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    /// `YES`, `MAYBE` or `TIMEOUT`.
    pub verdict: String,
    pub reason: Option<String>,
    /// `linear` or `simple-mixed` for a `YES`.
    pub shape: Option<String>,
    pub interpretation: BTreeMap<String, SymbolReport>,
    pub relations: BTreeMap<String, RelationReport>,
    pub call_patterns: Vec<String>,
    pub stages: Vec<StageReport>,
    pub verification: Option<VerifySummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolReport {
    pub arity: usize,
    pub polynomial: String,
}

/// `input >= output` over the argument levels `X1..Xn`.
#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub input: String,
    pub output: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub name: String,
    pub millis: f64,
    pub result: String,
    pub unknowns: Option<usize>,
    pub constraints: Option<usize>,
}

impl Report {
    pub fn new(v: &Verdict) -> Report {
        let mut r = Report {
            verdict: v.outcome.label().to_string(),
            reason: None,
            shape: None,
            interpretation: BTreeMap::new(),
            relations: BTreeMap::new(),
            call_patterns: v.call_patterns.iter().map(|c| c.to_string()).collect(),
            stages: v
                .stages
                .iter()
                .map(|s| StageReport {
                    name: s.name.clone(),
                    millis: s.elapsed.as_secs_f64() * 1000.0,
                    result: s.result.to_string(),
                    unknowns: s.size.map(|x| x.0),
                    constraints: s.size.map(|x| x.1),
                })
                .collect(),
            verification: v.verification.clone(),
        };
        match &v.outcome {
            Outcome::Yes(w) => {
                r.shape = Some(w.shape.to_string());
                for (sym, arity, p) in w.interpretation.iter() {
                    r.interpretation.insert(
                        sym.to_string(),
                        SymbolReport { arity, polynomial: p.to_string() },
                    );
                }
                for (p, (i, o)) in &w.interargs {
                    r.relations.insert(
                        p.to_string(),
                        RelationReport { input: i.to_string(), output: o.to_string() },
                    );
                }
            }
            Outcome::Maybe(why) => r.reason = Some(why.clone()),
            Outcome::Timeout => {}
        }
        r
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.verdict);
        if let Some(why) = &self.reason {
            let _ = writeln!(out, "reason: {why}");
        }
        if let Some(shape) = &self.shape {
            let _ = writeln!(out, "shape: {shape}");
        }
        for (sym, s) in &self.interpretation {
            let _ = writeln!(out, "I({sym}) = {}", s.polynomial);
        }
        for (p, rel) in &self.relations {
            // relations fixed to 0 >= 0 carry no information
            if rel.input != "0" || rel.output != "0" {
                let _ = writeln!(out, "R({p}): {} >= {}", rel.input, rel.output);
            }
        }
        if !self.call_patterns.is_empty() {
            let _ = writeln!(out, "call patterns: {}", self.call_patterns.join(" "));
        }
        if let Some(v) = &self.verification {
            let how = if v.sampled { "sampled" } else { "all" };
            let _ = writeln!(
                out,
                "verified: {} critical paths, {} conditions, {how} valuations in 0..{}",
                v.critical_paths, v.conditions, v.bound
            );
        }
        for s in &self.stages {
            let _ = write!(out, "stage {}: {} in {:.1} ms", s.name, s.result, s.millis);
            if let (Some(u), Some(c)) = (s.unknowns, s.constraints) {
                let _ = write!(out, " ({u} unknowns, {c} constraints)");
            }
            out.push('\n');
        }
        out
    }
}

/// Renders `v`; text output starts with the verdict line.
pub fn report(v: &Verdict, format: Format) -> String {
    let r = Report::new(v);
    match format {
        Format::Text => r.to_text(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&r).expect("report serializes");
            s.push('\n');
            s
        }
    }
}
