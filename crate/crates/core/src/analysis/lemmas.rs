use bitvec::prelude::*;
use serde_json::{json, Value};

use super::{
    build_response_graph, decompose, edge_coefficients, leaf_distance, tree_costs, weighted_cost_closed_form,
    weighted_tree_cost, AnalysisError, ResponseGraph, ResponseTree,
};
use crate::greedy::UnfullHistory;
use crate::instance::{Assignment, Instance, RequestId};
use crate::num::Scalar;

/// The individual facts verified on every run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    /// `d(s_sigma(j), r_j) <= ld(r_j)` for every request.
    EdgeBound,
    /// `ld(r_j) <= W(r_j)` for every request.
    LeafBound,
    /// Recursive and level-sum forms of `W(root)` agree.
    ClosedForm,
    /// `ON(T) <= (1 + 2/(k-2)) OPT(T)` for every tree.
    TreeBound,
    /// Every adversary edge's coefficient in `sum of W` is at most the bound,
    /// and the expansion reproduces the sum.
    Coefficient,
    /// Greedy total against the bound times the adversary total.
    Global,
    /// Every edge is in exactly one tree, is a deleted root edge, or was excised.
    Conservation,
    /// Tree shape and agreement with the response graph.
    Structure,
    /// Every leaf was unfull when each request of its tree arrived.
    LeafWitness,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::EdgeBound,
        Check::LeafBound,
        Check::ClosedForm,
        Check::TreeBound,
        Check::Coefficient,
        Check::Global,
        Check::Conservation,
        Check::Structure,
        Check::LeafWitness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::EdgeBound => "edge_bound",
            Check::LeafBound => "leaf_distance_bound",
            Check::ClosedForm => "closed_form",
            Check::TreeBound => "tree_bound",
            Check::Coefficient => "coefficient_bound",
            Check::Global => "global_bound",
            Check::Conservation => "edge_conservation",
            Check::Structure => "structure",
            Check::LeafWitness => "leaf_witness",
        }
    }

    fn index(self) -> usize {
        Check::ALL.iter().position(|&c| c == self).unwrap()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub checked: u64,
    pub failed: u64,
}

#[derive(Debug, Clone)]
pub struct LemmaOptions {
    /// Keep every checked inequality, not just failures.
    pub detailed: bool,
    /// Failures kept with witnesses; later ones are only counted.
    pub max_failures: usize,
}

impl Default for LemmaOptions {
    fn default() -> Self {
        LemmaOptions { detailed: false, max_failures: 64 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inequality<S> {
    pub check: Check,
    pub tree: Option<usize>,
    pub request: Option<RequestId>,
    pub lhs: S,
    pub rhs: S,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub check: Check,
    pub tree: Option<usize>,
    pub request: Option<RequestId>,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeRecord<S> {
    pub tree_id: usize,
    pub root: RequestId,
    pub on_cost: S,
    pub opt_cost: S,
    pub bound_rhs: S,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct LemmaReport<S> {
    pub k: u32,
    pub bound: S,
    pub tallies: [Tally; 9],
    pub trees: Vec<TreeRecord<S>>,
    pub failures: Vec<Failure>,
    pub failure_count: u64,
    pub inequalities: Vec<Inequality<S>>,
    pub excised_pairs: usize,
    pub excised_mass: S,
    pub online_total: S,
    pub adversary_total: S,
}

impl<S: Scalar> LemmaReport<S> {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub fn tally(&self, check: Check) -> Tally {
        self.tallies[check.index()]
    }

    /// JSON view; exact values render as fractions when `exact` is set.
    pub fn to_json(&self, exact: bool) -> Value {
        let num = |v: &S| v.to_number().to_json(exact);
        let checks: serde_json::Map<String, Value> = Check::ALL
            .iter()
            .map(|&c| {
                let t = self.tally(c);
                (c.name().to_string(), json!({ "checked": t.checked, "failed": t.failed }))
            })
            .collect();
        let trees: Vec<Value> = self
            .trees
            .iter()
            .map(|t| {
                json!({
                    "tree_id": t.tree_id,
                    "root": t.root,
                    "on_cost": num(&t.on_cost),
                    "opt_cost": num(&t.opt_cost),
                    "bound_rhs": num(&t.bound_rhs),
                    "pass": t.pass,
                })
            })
            .collect();
        let failures: Vec<Value> = self
            .failures
            .iter()
            .map(|f| json!({ "check": f.check.name(), "tree": f.tree, "request": f.request, "witness": f.witness }))
            .collect();
        let mut out = json!({
            "k": self.k,
            "bound": num(&self.bound),
            "passed": self.passed(),
            "checks": checks,
            "trees": trees,
            "excised_pairs": self.excised_pairs,
            "excised_mass": num(&self.excised_mass),
            "online_total": num(&self.online_total),
            "adversary_total": num(&self.adversary_total),
            "failure_count": self.failure_count,
            "failures": failures,
        });
        if !self.inequalities.is_empty() {
            out["inequalities"] = self
                .inequalities
                .iter()
                .map(|i| {
                    json!({
                        "check": i.check.name(),
                        "tree": i.tree,
                        "request": i.request,
                        "lhs": num(&i.lhs),
                        "rhs": num(&i.rhs),
                        "holds": i.holds,
                    })
                })
                .collect();
        }
        out
    }
}

struct Recorder<'a, S> {
    options: &'a LemmaOptions,
    tallies: [Tally; 9],
    failures: Vec<Failure>,
    failure_count: u64,
    inequalities: Vec<Inequality<S>>,
}

impl<S: Scalar> Recorder<'_, S> {
    fn fact(
        &mut self,
        check: Check,
        tree: Option<usize>,
        request: Option<RequestId>,
        holds: bool,
        witness: impl FnOnce() -> String,
    ) {
        let t = &mut self.tallies[check.index()];
        t.checked += 1;
        if holds {
            return;
        }
        t.failed += 1;
        self.failure_count += 1;
        if self.failures.len() < self.options.max_failures {
            self.failures.push(Failure { check, tree, request, witness: witness() });
        }
    }

    fn le(&mut self, check: Check, tree: Option<usize>, request: Option<RequestId>, lhs: &S, rhs: &S) -> bool {
        self.compare(check, tree, request, lhs, rhs, "<=", lhs.le_tol(rhs))
    }

    fn eq(&mut self, check: Check, tree: Option<usize>, request: Option<RequestId>, lhs: &S, rhs: &S) -> bool {
        self.compare(check, tree, request, lhs, rhs, "=", lhs.eq_tol(rhs))
    }

    #[allow(clippy::too_many_arguments)]
    fn compare(
        &mut self,
        check: Check,
        tree: Option<usize>,
        request: Option<RequestId>,
        lhs: &S,
        rhs: &S,
        op: &str,
        holds: bool,
    ) -> bool {
        if self.options.detailed {
            self.inequalities.push(Inequality { check, tree, request, lhs: lhs.clone(), rhs: rhs.clone(), holds });
        }
        self.fact(check, tree, request, holds, || {
            format!("{} {op} {} does not hold", lhs.to_number(), rhs.to_number())
        });
        holds
    }
}

/// Builds the response graph of a unit instance, decomposes it and checks
/// every lemma on the result. Failed checks are reported, never skipped.
pub fn check_lemmas<S: Scalar>(
    unit: &Instance,
    online: &Assignment<S>,
    adversary: &Assignment<S>,
    history: &UnfullHistory,
    options: &LemmaOptions,
) -> Result<LemmaReport<S>, AnalysisError> {
    let k = unit.k();
    if k < 3 {
        return Err(AnalysisError::KTooSmall(k));
    }
    let graph = build_response_graph(unit, online, adversary, history)?;
    let bound = S::from_ratio(k as i64, k as i64 - 2);
    let mut rec = Recorder {
        options,
        tallies: [Tally::default(); 9],
        failures: Vec::new(),
        failure_count: 0,
        inequalities: Vec::new(),
    };

    let trees = match decompose(&graph) {
        Ok(trees) => trees,
        Err(e) => {
            rec.fact(Check::Structure, None, None, false, || e.to_string());
            Vec::new()
        }
    };

    let mut records = Vec::with_capacity(trees.len());
    let mut on_sum = S::zero();
    let mut opt_sum = S::zero();
    for tree in &trees {
        let before = rec.failure_count;
        check_structure(&mut rec, &graph, tree);
        check_tree(&mut rec, &graph, tree, &bound, &mut records);
        let record: &mut TreeRecord<S> = records.last_mut().unwrap();
        record.pass = rec.failure_count == before;
        on_sum = on_sum + record.on_cost.clone();
        opt_sum = opt_sum + record.opt_cost.clone();
    }

    let mut seen: BitVec = bitvec![0; graph.request_count()];
    let mut duplicate = None;
    for r in trees.iter().flat_map(|t| t.nodes.iter().map(|n| n.request)).chain(graph.excised().iter().copied()) {
        if seen.replace(r, true) && duplicate.is_none() {
            duplicate = Some(r);
        }
    }
    let missing = seen.first_zero();
    rec.fact(Check::Conservation, None, duplicate.or(missing), duplicate.is_none() && missing.is_none(), || {
        match duplicate {
            Some(r) => format!("request {r} appears twice"),
            None => format!("request {} is in no tree", missing.unwrap()),
        }
    });
    let excised = graph.excised_cost();
    rec.eq(Check::Conservation, None, None, &(on_sum + excised.clone()), &online.total_cost);
    rec.eq(Check::Conservation, None, None, &(opt_sum + excised), &adversary.total_cost);

    let rhs = bound.clone() * adversary.total_cost.clone();
    rec.le(Check::Global, None, None, &online.total_cost, &rhs);

    Ok(LemmaReport {
        k,
        bound,
        tallies: rec.tallies,
        trees: records,
        failures: rec.failures,
        failure_count: rec.failure_count,
        inequalities: rec.inequalities,
        excised_pairs: graph.excised().len(),
        excised_mass: graph.excised_mass(),
        online_total: online.total_cost.clone(),
        adversary_total: adversary.total_cost.clone(),
    })
}

fn check_structure<S: Scalar>(rec: &mut Recorder<'_, S>, graph: &ResponseGraph<S>, tree: &ResponseTree<S>) {
    let id = Some(tree.id);
    let k = tree.k as usize;
    let mut problem: Option<(RequestId, String)> = None;
    for (i, node) in tree.nodes.iter().enumerate() {
        let r = node.request;
        let issue = if (i == 0) != node.parent.is_none() {
            Some("only the root lacks a parent".to_string())
        } else if graph.is_excised(r) {
            Some("excised request inside a tree".to_string())
        } else if graph.adversary_site(r) != node.site {
            Some(format!("site {} is not the adversary site", node.site))
        } else if graph.online_site(r) != node.online_site {
            Some(format!("site {} is not the online site", node.online_site))
        } else if !node.children.is_empty() && node.children.len() != k {
            Some(format!("internal site {} has {} children", node.site, node.children.len()))
        } else {
            node.children
                .iter()
                .find(|&&c| c <= i || tree.nodes[c].parent != Some(i) || tree.nodes[c].online_site != node.site)
                .map(|&c| format!("node {c} is not a proper child"))
        };
        if let Some(msg) = issue {
            problem = Some((r, msg));
            break;
        }
    }
    let request = problem.as_ref().map(|(r, _)| *r);
    rec.fact(Check::Structure, id, request, problem.is_none(), || problem.unwrap().1);

    // Unfullness only shrinks over time, so the latest request is the binding one.
    let latest = tree.latest_request();
    for leaf in tree.leaves() {
        let unfull = graph.history().is_unfull_at(leaf, latest);
        rec.fact(Check::LeafWitness, id, Some(latest), unfull, || {
            format!("leaf site {leaf} was full when request {latest} arrived")
        });
    }
}

fn check_tree<S: Scalar>(
    rec: &mut Recorder<'_, S>,
    graph: &ResponseGraph<S>,
    tree: &ResponseTree<S>,
    bound: &S,
    records: &mut Vec<TreeRecord<S>>,
) {
    let id = Some(tree.id);
    let ld = leaf_distance(tree);
    let w = weighted_tree_cost(tree);
    for (i, node) in tree.nodes.iter().enumerate() {
        let r = Some(node.request);
        rec.le(Check::EdgeBound, id, r, graph.online_cost(node.request), &ld.requests[i]);
        rec.le(Check::LeafBound, id, r, &ld.requests[i], &w[i]);
    }
    rec.eq(Check::ClosedForm, id, Some(tree.root()), &w[0], &weighted_cost_closed_form(tree));

    let coef = edge_coefficients(tree);
    let mut expanded = S::zero();
    for (i, node) in tree.nodes.iter().enumerate() {
        rec.le(Check::Coefficient, id, Some(node.request), &coef[i], bound);
        expanded = expanded + coef[i].clone() * node.adversary_cost.clone();
    }
    let w_sum: S = w.into_iter().sum();
    rec.eq(Check::Coefficient, id, None, &w_sum, &expanded);

    let (on_cost, opt_cost) = tree_costs(tree);
    let bound_rhs = bound.clone() * opt_cost.clone();
    rec.le(Check::TreeBound, id, Some(tree.root()), &on_cost, &bound_rhs);
    records.push(TreeRecord { tree_id: tree.id, root: tree.root(), on_cost, opt_cost, bound_rhs, pass: true });
}
