//! A data-driven corpus of machine-checkable claims. Each claim names a
//! builder recipe (task, model, expected verdict or equality); the runner
//! executes it and reports pass/fail. All comparisons are exact.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closure::{
    closure, closure_beta, is_fixed_point, lower_bound_chain, speedup_transform, ChainStatus,
    ClosureError, ClosureOptions,
};
use crate::complex::{Bit, ChromaticComplex, ProcessId, Simplex, Value, Vertex};
use crate::executions::{enumerate_collect_matrices, filter_immediate, filter_snapshot, IdSet};
use crate::json::{model_from_dto, task_from_dto, JsonError, ModelDto, TaskDto};
use crate::model::{BcInputs, ModelSpec};
use crate::protocol::one_round;
use crate::rules::{
    halving_schedule, rule_map, run_rule, ts_consensus_rule, two_proc_schedule, DecisionRule,
    RuleError,
};
use crate::solver::{solve, verify_map, SolveError, SolveOptions};
use crate::task::TaskError;
use crate::view::View;

#[derive(Debug, Error)]
pub enum ClaimError {
    #[error("rule {0:?} does not apply to this task")]
    BadRule(String),
    #[error(transparent)]
    Json(#[from] JsonError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// One checkable claim: id, human-readable description, and the check recipe.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ClaimSpec {
    pub id: String,
    pub description: String,
    #[serde(flatten)]
    pub check: ClaimCheck,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "check")]
pub enum ClaimCheck {
    /// Vertex (and optionally facet) counts of the one-round complex of a
    /// full simplex on `n` processes.
    #[serde(rename = "protocol_counts")]
    ProtocolCounts {
        n: u32,
        model: ModelDto,
        rounds: u32,
        vertices: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        facets: Option<usize>,
    },
    /// One-round view assignments nest: immediate snapshot within snapshot
    /// within collect, strictly when `strict` is set.
    #[serde(rename = "containment")]
    Containment { n: u32, strict: bool },
    /// Solvability verdict of the solver.
    #[serde(rename = "solve")]
    Solve {
        task: TaskDto,
        model: ModelDto,
        rounds: u32,
        expect_solvable: bool,
    },
    /// The closure of the task equals the expected task.
    #[serde(rename = "closure_equals")]
    ClosureEquals {
        task: TaskDto,
        model: ModelDto,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<BTreeMap<String, u8>>,
        expected: TaskDto,
    },
    /// The task equals its own closure.
    #[serde(rename = "fixed_point")]
    FixedPoint {
        task: TaskDto,
        model: ModelDto,
        expect: bool,
    },
    /// The closure chain yields at least the stated round lower bound.
    #[serde(rename = "lower_bound")]
    LowerBound {
        task: TaskDto,
        model: ModelDto,
        max_steps: u32,
        expect_at_least: u32,
    },
    /// A named rule composition solves (or fails to solve) the task.
    #[serde(rename = "run_rule")]
    RunRule {
        rule: String,
        task: TaskDto,
        model: ModelDto,
        rounds: u32,
        expect: bool,
    },
    /// Constructive round reduction: a witness at `rounds` (from the solver,
    /// or from a named rule when given) transforms into a map passing
    /// verification against the closure task at `rounds - 1`.
    #[serde(rename = "speedup")]
    Speedup {
        task: TaskDto,
        model: ModelDto,
        rounds: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rule: Option<String>,
    },
    /// A binary-consensus box with uniform inputs yields a one-round complex
    /// isomorphic to plain immediate snapshot (equal after forgetting the
    /// box outputs).
    #[serde(rename = "bc_uniform_iso")]
    BcUniformIso { n: u32 },
}

/// The result of running one claim.
#[derive(Clone, Debug)]
pub struct ClaimOutcome {
    pub id: String,
    pub description: String,
    pub pass: bool,
    pub detail: String,
}

/// Builds the per-round rule schedule named by `rule` for the given task.
pub fn rule_schedule(
    rule: &str,
    task: &TaskDto,
    rounds: u32,
) -> Result<Vec<DecisionRule>, ClaimError> {
    match rule {
        "halving" => match task {
            TaskDto::Approx { m, eps_num, .. } | TaskDto::LiberalApprox { m, eps_num, .. } => {
                Ok(halving_schedule(*eps_num, *m, rounds))
            }
            _ => Err(ClaimError::BadRule(rule.to_string())),
        },
        "two_proc" => match task {
            TaskDto::Approx { m, eps_num, .. } | TaskDto::LiberalApprox { m, eps_num, .. } => {
                Ok(two_proc_schedule(*eps_num, *m, rounds))
            }
            _ => Err(ClaimError::BadRule(rule.to_string())),
        },
        "ts_consensus" => {
            if rounds != 1 {
                return Err(ClaimError::BadRule(rule.to_string()));
            }
            Ok(vec![ts_consensus_rule()])
        }
        other => Err(ClaimError::BadRule(other.to_string())),
    }
}

fn participants(n: u32) -> IdSet {
    (1..=n)
        .map(|k| ProcessId::new(k).expect("ids start at 1"))
        .collect()
}

fn symbolic_simplex(n: u32) -> Simplex {
    Simplex::new((1..=n).map(|k| {
        Vertex::new(
            ProcessId::new(k).expect("ids start at 1"),
            Value::symbol(format!("x{k}")),
        )
    }))
    .expect("distinct ids")
}

/// Forgets box outputs, exhibiting the canonical bijection onto the plain
/// complex.
fn strip_box_outputs(complex: &ChromaticComplex) -> ChromaticComplex {
    let facets = complex.facets().iter().map(|facet| {
        Simplex::new(facet.vertices().iter().map(|v| {
            let view = v.value.as_view();
            let seen = view.seen().expect("protocol vertices are round views");
            Vertex::new(v.id, Value::Nested(View::round(None, seen.clone())))
        }))
        .expect("chromatic")
    });
    ChromaticComplex::new(facets).expect("non-empty")
}

fn beta_map(
    raw: &BTreeMap<String, u8>,
    ids: impl IntoIterator<Item = ProcessId>,
) -> Result<BTreeMap<ProcessId, Bit>, ClaimError> {
    let text = serde_json::to_string(raw).expect("bit map serialization");
    Ok(crate::json::beta_from_json(&text, ids)?)
}

fn check_claim(check: &ClaimCheck) -> Result<(bool, String), ClaimError> {
    match check {
        ClaimCheck::ProtocolCounts {
            n,
            model,
            rounds,
            vertices,
            facets,
        } => {
            let model = model_from_dto(model)?;
            let complex = crate::protocol::carrier(&symbolic_simplex(*n), &model, *rounds)?;
            let got_vertices = complex.vertex_count();
            let got_facets = complex.facet_count();
            let mut pass = got_vertices == *vertices;
            if let Some(expected) = facets {
                pass &= got_facets == *expected;
            }
            Ok((
                pass,
                format!("{got_vertices} vertices, {got_facets} facets"),
            ))
        }
        ClaimCheck::Containment { n, strict } => {
            let ids = participants(*n);
            let collect = enumerate_collect_matrices(&ids);
            let snapshot = filter_snapshot(&collect);
            let collect_views: BTreeSet<_> =
                collect.iter().map(|m| m.view_assignment()).collect();
            let snapshot_views: BTreeSet<_> =
                snapshot.iter().map(|m| m.view_assignment()).collect();
            let immediate_views: BTreeSet<_> = filter_immediate(&collect)
                .iter()
                .map(|p| p.view_assignment())
                .collect();
            let mut pass = immediate_views.is_subset(&snapshot_views)
                && snapshot_views.is_subset(&collect_views);
            if *strict {
                pass &= immediate_views.len() < snapshot_views.len()
                    && snapshot_views.len() < collect_views.len();
            }
            Ok((
                pass,
                format!(
                    "iis {} <= snapshot {} <= collect {}",
                    immediate_views.len(),
                    snapshot_views.len(),
                    collect_views.len()
                ),
            ))
        }
        ClaimCheck::Solve {
            task,
            model,
            rounds,
            expect_solvable,
        } => {
            let built = task_from_dto(task)?;
            let model = model_from_dto(model)?;
            let verdict = solve(&built, &model, *rounds, SolveOptions::default())?;
            if let Some(witness) = verdict.witness() {
                if !verify_map(&built, &model, *rounds, witness)? {
                    return Ok((false, "witness failed verification".to_string()));
                }
            }
            Ok((
                verdict.is_solvable() == *expect_solvable,
                format!("{verdict}"),
            ))
        }
        ClaimCheck::ClosureEquals {
            task,
            model,
            beta,
            expected,
        } => {
            let built = task_from_dto(task)?;
            let expected = task_from_dto(expected)?;
            let closed = match beta {
                Some(raw) => {
                    let beta = beta_map(raw, built.inputs().ids())?;
                    closure_beta(&built, &beta, ClosureOptions::default())?
                }
                None => {
                    let model = model_from_dto(model)?;
                    closure(&built, &model, ClosureOptions::default())?
                }
            };
            let equal = crate::task::tasks_equal(&closed, &expected)?;
            Ok((equal, format!("closure equality: {equal}")))
        }
        ClaimCheck::FixedPoint {
            task,
            model,
            expect,
        } => {
            let built = task_from_dto(task)?;
            let model = model_from_dto(model)?;
            let fixed = is_fixed_point(&built, &model, ClosureOptions::default())?;
            Ok((fixed == *expect, format!("fixed point: {fixed}")))
        }
        ClaimCheck::LowerBound {
            task,
            model,
            max_steps,
            expect_at_least,
        } => {
            let built = task_from_dto(task)?;
            let model = model_from_dto(model)?;
            let transform =
                |t: &crate::task::Task| closure(t, &model, ClosureOptions::default());
            let report = lower_bound_chain(
                &built,
                &model,
                &transform,
                None,
                *max_steps,
                SolveOptions::default(),
            )?;
            let status = match report.status {
                ChainStatus::ZeroRoundSolvable => "exact chain bottom",
                ChainStatus::FixedPoint => "fixed point, unbounded within budget",
            };
            Ok((
                report.bound >= *expect_at_least,
                format!("lower bound {} ({status})", report.bound),
            ))
        }
        ClaimCheck::RunRule {
            rule,
            task,
            model,
            rounds,
            expect,
        } => {
            let rules = rule_schedule(rule, task, *rounds)?;
            let built = task_from_dto(task)?;
            let model = model_from_dto(model)?;
            let solved = run_rule(&built, &model, *rounds, &rules)?;
            Ok((solved == *expect, format!("rule solves: {solved}")))
        }
        ClaimCheck::Speedup {
            task,
            model,
            rounds,
            rule,
        } => {
            let built = task_from_dto(task)?;
            let model = model_from_dto(model)?;
            let witness = match rule {
                Some(rule) => {
                    let rules = rule_schedule(rule, task, *rounds)?;
                    rule_map(&built, &model, *rounds, &rules)?
                }
                None => {
                    let verdict = solve(&built, &model, *rounds, SolveOptions::default())?;
                    match verdict.witness() {
                        Some(map) => map.clone(),
                        None => return Ok((false, "instance is unsolvable".to_string())),
                    }
                }
            };
            let reduced = speedup_transform(&built, &model, *rounds, &witness)?;
            let closed = closure(&built, &model, ClosureOptions::default())?;
            let ok = verify_map(&closed, &model, *rounds - 1, &reduced)?;
            Ok((ok, format!("reduced map verifies at {} rounds: {ok}", rounds - 1)))
        }
        ClaimCheck::BcUniformIso { n } => {
            let sigma = symbolic_simplex(*n);
            let plain = one_round(&sigma, &ModelSpec::iis(), 1)?;
            let boxed = one_round(
                &sigma,
                &ModelSpec::iis_binary_consensus(BcInputs::uniform(Bit::ZERO)),
                1,
            )?;
            let same_counts = plain.facet_count() == boxed.facet_count()
                && plain.vertex_count() == boxed.vertex_count();
            let stripped = strip_box_outputs(&boxed);
            let pass = same_counts && crate::complex::complexes_equal(&stripped, &plain);
            Ok((
                pass,
                format!(
                    "facets {} vs {}, forgetting box outputs restores the subdivision: {pass}",
                    boxed.facet_count(),
                    plain.facet_count()
                ),
            ))
        }
    }
}

/// Runs one claim, converting errors into a failing outcome.
pub fn run_claim(spec: &ClaimSpec) -> ClaimOutcome {
    let (pass, detail) = match check_claim(&spec.check) {
        Ok((pass, detail)) => (pass, detail),
        Err(err) => (false, format!("error: {err}")),
    };
    ClaimOutcome {
        id: spec.id.clone(),
        description: spec.description.clone(),
        pass,
        detail,
    }
}

/// Glob matching with `*` wildcards, for claim filters.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    fn go(p: &[u8], t: &[u8]) -> bool {
        match (p.first(), t.first()) {
            (None, None) => true,
            (Some(b'*'), _) => go(&p[1..], t) || (!t.is_empty() && go(p, &t[1..])),
            (Some(c), Some(d)) if c == d => go(&p[1..], &t[1..]),
            _ => false,
        }
    }
    go(pattern.as_bytes(), text.as_bytes())
}

/// Runs the corpus, optionally filtered by an id glob, in corpus order.
pub fn run_claims(corpus: &[ClaimSpec], filter: Option<&str>) -> Vec<ClaimOutcome> {
    corpus
        .iter()
        .filter(|spec| filter.is_none_or(|pattern| glob_match(pattern, &spec.id)))
        .map(run_claim)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn globs() {
        assert!(glob_match("consensus-*", "consensus-fixed-point-2"));
        assert!(glob_match("*", "anything"));
        assert!(!glob_match("consensus-*", "approx-closure"));
        assert!(glob_match("a*c", "abc"));
        assert!(glob_match("a*c", "ac"));
        assert!(!glob_match("a*c", "acd"));
    }

    #[test]
    fn counts_claim_runs() {
        let spec = ClaimSpec {
            id: "counts".to_string(),
            description: "twelve vertex subdivision".to_string(),
            check: ClaimCheck::ProtocolCounts {
                n: 3,
                model: crate::json::model_to_dto(&ModelSpec::iis()),
                rounds: 1,
                vertices: 12,
                facets: Some(13),
            },
        };
        let outcome = run_claim(&spec);
        assert!(outcome.pass, "{}", outcome.detail);
    }
}
