//! The proof procedure: call set, linear stage, simple-mixed stage, verification.

mod report;
mod verify;

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use crate::callset::{approximate_call_set, build_call_graph, CallPattern};
use crate::congen::{assemble_system, template_interpretation, Assembled, SystemConfig};
use crate::diosolver::{solve, SolveOutcome};
use crate::frontend::{Program, QuerySpec, Symbol};
use crate::polyalg::{Assignment, Interpretation, Shape, VPoly};

pub use report::{report, Format, Report};
pub use verify::{verify_witness, VerifyFailure, VerifySummary};

/// Which function-symbol shapes to try.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ShapeChoice {
    /// Linear first, then simple-mixed.
    #[default]
    Auto,
    Only(Shape),
}

#[derive(Clone, Copy, Debug)]
pub struct Config {
    pub coeff_max: u64,
    pub timeout: Duration,
    pub verify_bound: u64,
    pub shape: ShapeChoice,
    /// Share of the timeout given to the linear stage under [`ShapeChoice::Auto`].
    pub linear_share: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            coeff_max: 2,
            timeout: Duration::from_secs(60),
            verify_bound: 5,
            shape: ShapeChoice::Auto,
            linear_share: 0.25,
        }
    }
}

/// A concrete certificate of termination.
#[derive(Clone, Debug)]
pub struct Witness {
    pub shape: Shape,
    pub interpretation: Interpretation,
    /// `(i_p, o_p)` per predicate.
    pub interargs: BTreeMap<Symbol, (VPoly, VPoly)>,
    /// `(prem, conc)` per conditional constraint of the solved system.
    pub premconc: Vec<(Option<VPoly>, VPoly)>,
}

impl Witness {
    pub fn from_assignment(a: &Assembled, shape: Shape, asg: &Assignment) -> Witness {
        Witness {
            shape,
            interpretation: template_interpretation(&a.templates).instantiate(asg),
            interargs: a
                .interargs
                .iter()
                .map(|(p, t)| (p.clone(), (t.i.instantiate(asg), t.o.instantiate(asg))))
                .collect(),
            premconc: a
                .premconc
                .iter()
                .map(|pc| (pc.prem.as_ref().map(|p| p.instantiate(asg)), pc.conc.instantiate(asg)))
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Yes(Box<Witness>),
    Maybe(String),
    Timeout,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Yes(_) => "YES",
            Outcome::Maybe(_) => "MAYBE",
            Outcome::Timeout => "TIMEOUT",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StageResult {
    Done,
    Sat,
    Unsat,
    Timeout,
    /// A solution that failed verification, or a generation error.
    Failed(String),
}

impl fmt::Display for StageResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StageResult::Done => f.write_str("done"),
            StageResult::Sat => f.write_str("sat"),
            StageResult::Unsat => f.write_str("unsat"),
            StageResult::Timeout => f.write_str("timeout"),
            StageResult::Failed(why) => write!(f, "failed: {why}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub name: String,
    pub elapsed: Duration,
    pub result: StageResult,
    /// Unknowns and constraints of the stage's system, if one was built.
    pub size: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stages: Vec<Stage>,
    pub call_patterns: Vec<CallPattern>,
    /// Result of checking the witness, for `Yes`.
    pub verification: Option<VerifySummary>,
}

/// Runs the proof procedure under `config`.
pub fn prove(program: &Program, queries: &QuerySpec, config: &Config) -> Verdict {
    let start = Instant::now();
    let mut stages = Vec::new();
    let calls = approximate_call_set(program, &queries.patterns, &queries.grammar);
    let graph = build_call_graph(program);
    stages.push(Stage {
        name: "callset".into(),
        elapsed: start.elapsed(),
        result: StageResult::Done,
        size: None,
    });

    let plan: Vec<(Shape, f64)> = match config.shape {
        ShapeChoice::Auto => {
            vec![(Shape::Linear, config.linear_share), (Shape::SimpleMixed, 1.0)]
        }
        ShapeChoice::Only(s) => vec![(s, 1.0)],
    };
    let mut last_failure = String::from("no stage ran");
    for (shape, share) in plan {
        let stage_start = Instant::now();
        let remaining = config.timeout.saturating_sub(start.elapsed());
        // a share of the whole budget, never more than what is left
        let budget = config.timeout.mul_f64(share).min(remaining);
        let sys_config = SystemConfig { shape, coeff_max: config.coeff_max };
        let mut stage = Stage {
            name: shape.to_string(),
            elapsed: Duration::ZERO,
            result: StageResult::Done,
            size: None,
        };
        let assembled = match assemble_system(program, &graph, &calls, &queries.grammar, sys_config)
        {
            Ok(a) => a,
            Err(e) => {
                stage.result = StageResult::Failed(e.to_string());
                last_failure = format!("{shape}: {e}");
                stage.elapsed = stage_start.elapsed();
                stages.push(stage);
                continue;
            }
        };
        stage.size = Some((assembled.system.domains.len(), assembled.system.constraints.len()));
        let outcome = match solve(&assembled.system, Some(budget)) {
            Ok(o) => o,
            Err(e) => {
                stage.result = StageResult::Failed(e.to_string());
                last_failure = format!("{shape}: {e}");
                stage.elapsed = stage_start.elapsed();
                stages.push(stage);
                continue;
            }
        };
        match outcome {
            SolveOutcome::Sat(asg) => {
                let w = Witness::from_assignment(&assembled, shape, &asg);
                match verify_witness(program, queries, &w, config.verify_bound) {
                    Ok(summary) => {
                        stage.result = StageResult::Sat;
                        stage.elapsed = stage_start.elapsed();
                        stages.push(stage);
                        return Verdict {
                            outcome: Outcome::Yes(Box::new(w)),
                            stages,
                            call_patterns: calls,
                            verification: Some(summary),
                        };
                    }
                    Err(f) => {
                        stage.result = StageResult::Failed(format!("witness rejected: {f}"));
                        last_failure = format!("{shape}: witness rejected: {f}");
                    }
                }
            }
            SolveOutcome::Unsat => {
                stage.result = StageResult::Unsat;
                last_failure = format!(
                    "{shape}: no solution with coefficients in 0..{}",
                    config.coeff_max
                );
            }
            SolveOutcome::Timeout(_) => {
                stage.result = StageResult::Timeout;
                last_failure = format!("{shape}: time limit reached");
            }
        }
        stage.elapsed = stage_start.elapsed();
        stages.push(stage);
    }
    // a later stage's exhaustive failure subsumes an earlier stage's timeout
    let timed_out = stages.last().is_some_and(|s| s.result == StageResult::Timeout);
    let outcome = if timed_out { Outcome::Timeout } else { Outcome::Maybe(last_failure) };
    Verdict { outcome, stages, call_patterns: calls, verification: None }
}

#[cfg(test)]
mod tests;
