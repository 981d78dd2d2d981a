//! End-to-end evaluation of one instance: greedy, optimum, unit split and
//! the lemma checks, in whichever arithmetic the instance calls for.

use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{check_lemmas, AnalysisError, LemmaOptions, LemmaReport, Tally};
use crate::greedy::{run_greedy, GreedyError, GreedyRun, TieBreak, UnfullHistory};
use crate::instance::{split_unit, Instance, InstanceError, SiteId, UnitSplit};
use crate::num::{Number, Rational, Scalar};
use crate::opt::{solve_opt, verify_certificate, OptError, OptSolution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Greedy(#[from] GreedyError),
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Debug, Clone)]
pub struct Verification<S: Scalar> {
    pub greedy: GreedyRun<S>,
    pub opt: OptSolution<S>,
    /// Why the optimality certificate was rejected, if it was.
    pub certificate_error: Option<String>,
    pub split: UnitSplit<S>,
    pub report: LemmaReport<S>,
}

impl<S: Scalar> Verification<S> {
    pub fn passed(&self) -> bool {
        self.certificate_error.is_none() && self.report.passed()
    }
}

pub fn verify_with<S: Scalar>(
    inst: &Instance,
    policy: TieBreak,
    options: &LemmaOptions,
) -> Result<Verification<S>, PipelineError> {
    if inst.k() < 3 {
        return Err(AnalysisError::KTooSmall(inst.k()).into());
    }
    let greedy = run_greedy::<S>(inst, policy)?;
    let opt = solve_opt::<S>(inst)?;
    let certificate_error = verify_certificate(inst, &opt).err().map(|e| e.to_string());
    let split = split_unit(inst, &greedy.assignment, &opt.assignment)?;
    let history = UnfullHistory::from_mapping(&split.instance, &split.online.mapping)?;
    let report = check_lemmas(&split.instance, &split.online, &split.adversary, &history, options)?;
    Ok(Verification { greedy, opt, certificate_error, split, report })
}

/// A verification in the arithmetic chosen by the instance: exact for line
/// and matrix metrics, floating point for the plane.
#[derive(Debug, Clone)]
pub enum Outcome {
    Exact(Box<Verification<Rational>>),
    Float(Box<Verification<f64>>),
}

pub fn verify_instance(inst: &Instance, policy: TieBreak, options: &LemmaOptions) -> Result<Outcome, PipelineError> {
    Ok(if inst.is_exact() {
        Outcome::Exact(Box::new(verify_with::<Rational>(inst, policy, options)?))
    } else {
        Outcome::Float(Box::new(verify_with::<f64>(inst, policy, options)?))
    })
}

macro_rules! both {
    ($self:expr, $v:ident => $body:expr) => {
        match $self {
            Outcome::Exact($v) => $body,
            Outcome::Float($v) => $body,
        }
    };
}

impl Outcome {
    pub fn k(&self) -> u32 {
        both!(self, v => v.report.k)
    }

    pub fn greedy_cost(&self) -> Number {
        both!(self, v => v.greedy.assignment.total_cost.to_number())
    }

    pub fn opt_cost(&self) -> Number {
        both!(self, v => v.opt.assignment.total_cost.to_number())
    }

    pub fn greedy_mapping(&self) -> &[SiteId] {
        both!(self, v => &v.greedy.assignment.mapping)
    }

    pub fn bound(&self) -> Number {
        both!(self, v => v.report.bound.to_number())
    }

    pub fn ratio(&self) -> Option<Number> {
        self.greedy_cost().ratio(&self.opt_cost())
    }

    pub fn passed(&self) -> bool {
        both!(self, v => v.passed())
    }

    /// Per-check tallies in [`crate::analysis::Check::ALL`] order.
    pub fn tallies(&self) -> [Tally; 9] {
        both!(self, v => v.report.tallies)
    }

    pub fn tree_count(&self) -> usize {
        both!(self, v => v.report.trees.len())
    }

    /// Every failure as a line of text: certificate first, then lemma witnesses.
    pub fn failure_lines(&self) -> Vec<String> {
        both!(self, v => {
            let mut lines: Vec<String> = v.certificate_error.iter().map(|e| format!("certificate: {e}")).collect();
            lines.extend(v.report.failures.iter().map(|f| {
                let tree = f.tree.map_or(String::new(), |t| format!(" tree {t}"));
                let req = f.request.map_or(String::new(), |r| format!(" request {r}"));
                format!("{}{tree}{req}: {}", f.check.name(), f.witness)
            }));
            let hidden = v.report.failure_count as usize - v.report.failures.len();
            if hidden > 0 {
                lines.push(format!("... and {hidden} more failures"));
            }
            lines
        })
    }

    pub fn to_json(&self, exact: bool) -> Value {
        let ratio = self.ratio().map(|r| r.to_json(exact));
        both!(self, v => json!({
            "greedy_cost": self.greedy_cost().to_json(exact),
            "opt_cost": self.opt_cost().to_json(exact),
            "ratio": ratio,
            "bound": self.bound().to_json(exact),
            "passed": self.passed(),
            "certificate": v.certificate_error.clone().unwrap_or_else(|| "verified".into()),
            "unit_sites": v.split.instance.site_count(),
            "lemmas": v.report.to_json(exact),
        }))
    }
}

/// Greedy and, optionally, the optimum without the analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub greedy_cost: Number,
    pub mapping: Vec<SiteId>,
    pub opt_cost: Option<Number>,
}

pub fn run_instance(inst: &Instance, policy: TieBreak, with_opt: bool) -> Result<RunSummary, PipelineError> {
    fn go<S: Scalar>(inst: &Instance, policy: TieBreak, with_opt: bool) -> Result<RunSummary, PipelineError> {
        let run = run_greedy::<S>(inst, policy)?;
        let opt_cost = if with_opt { Some(solve_opt::<S>(inst)?.assignment.total_cost.to_number()) } else { None };
        Ok(RunSummary { greedy_cost: run.assignment.total_cost.to_number(), mapping: run.assignment.mapping, opt_cost })
    }
    if inst.is_exact() {
        go::<Rational>(inst, policy, with_opt)
    } else {
        go::<f64>(inst, policy, with_opt)
    }
}
