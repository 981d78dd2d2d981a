//! The `GREEDY_k` online algorithm.

use bitvec::prelude::*;
use thiserror::Error;

use crate::instance::{Assignment, Instance, InstanceError, RequestId, Role, SiteId};
use crate::metric::MetricError;
use crate::num::{Key, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GreedyError {
    #[error("no unfull site when request {0} arrived")]
    NoUnfullSite(RequestId),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// How greedy orders sites at equal distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    LowestSiteIndex,
    HighestSiteIndex,
}

impl TieBreak {
    pub fn name(self) -> &'static str {
        match self {
            TieBreak::LowestSiteIndex => "lowest",
            TieBreak::HighestSiteIndex => "highest",
        }
    }
}

impl std::str::FromStr for TieBreak {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lowest" | "lowest_site_index" => Ok(TieBreak::LowestSiteIndex),
            "highest" | "highest_site_index" => Ok(TieBreak::HighestSiteIndex),
            other => Err(format!("unknown tie-break policy `{other}`")),
        }
    }
}

/// Per-site usage during a run. `used[j] <= capacity[j] = k * a_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyState {
    used: Vec<u64>,
    capacity: Vec<u64>,
}

impl OccupancyState {
    pub fn new(inst: &Instance) -> Self {
        OccupancyState {
            used: vec![0; inst.site_count()],
            capacity: (0..inst.site_count()).map(|j| inst.capacity(j, Role::Online)).collect(),
        }
    }

    pub fn is_unfull(&self, site: SiteId) -> bool {
        self.used[site] < self.capacity[site]
    }

    pub fn used(&self) -> &[u64] {
        &self.used
    }

    fn occupy(&mut self, site: SiteId) {
        debug_assert!(self.is_unfull(site));
        self.used[site] += 1;
    }
}

/// When each site became full, which answers "was site `s` unfull when
/// request `t` arrived" for any `(s, t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnfullHistory {
    filled_by: Vec<Option<RequestId>>,
}

impl UnfullHistory {
    /// Replays an online mapping against capacities `k * a_j`.
    pub fn from_mapping(inst: &Instance, mapping: &[SiteId]) -> Result<Self, InstanceError> {
        let mut occupancy = OccupancyState::new(inst);
        let mut filled_by = vec![None; inst.site_count()];
        for (r, &s) in mapping.iter().enumerate() {
            if s >= inst.site_count() {
                return Err(InstanceError::Domain(format!("request {r} mapped to unknown site {s}")));
            }
            if !occupancy.is_unfull(s) {
                return Err(InstanceError::Domain(format!("request {r} assigned to full site {s}")));
            }
            occupancy.occupy(s);
            if !occupancy.is_unfull(s) {
                filled_by[s] = Some(r);
            }
        }
        Ok(UnfullHistory { filled_by })
    }

    /// Site had a free online server when `request` arrived.
    pub fn is_unfull_at(&self, site: SiteId, request: RequestId) -> bool {
        self.filled_by[site].is_none_or(|f| f >= request)
    }

    /// Request whose assignment used the last free server of `site`.
    pub fn filled_by(&self, site: SiteId) -> Option<RequestId> {
        self.filled_by[site]
    }

    pub fn site_count(&self) -> usize {
        self.filled_by.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyStep {
    pub request: RequestId,
    pub site: SiteId,
    /// Sites unfull at the moment the request arrived.
    pub unfull: BitVec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
    pub history: UnfullHistory,
}

#[derive(Debug, Clone)]
pub struct GreedyRun<S> {
    pub assignment: Assignment<S>,
    pub trace: GreedyTrace,
}

/// Assigns each request, in arrival order, to the nearest unfull site.
pub fn run_greedy<S: Scalar>(inst: &Instance, policy: TieBreak) -> Result<GreedyRun<S>, GreedyError> {
    let kernel = S::kernel(inst.space())?;
    let mut occupancy = OccupancyState::new(inst);
    let mut steps = Vec::with_capacity(inst.request_count());
    let mut mapping = Vec::with_capacity(inst.request_count());
    let mut per_edge_cost = Vec::with_capacity(inst.request_count());
    let mut filled_by = vec![None; inst.site_count()];

    for req in inst.requests() {
        let mut unfull = bitvec![0; inst.site_count()];
        let mut best: Option<(SiteId, S::Key)> = None;
        for site in inst.sites() {
            if !occupancy.is_unfull(site.id) {
                continue;
            }
            unfull.set(site.id, true);
            let d = kernel.distance(site.point, req.point);
            let better = match best {
                None => true,
                Some((_, bd)) => d < bd || (d == bd && policy == TieBreak::HighestSiteIndex),
            };
            if better {
                best = Some((site.id, d));
            }
        }
        let (site, d) = best.ok_or(GreedyError::NoUnfullSite(req.id))?;
        occupancy.occupy(site);
        if !occupancy.is_unfull(site) {
            filled_by[site] = Some(req.id);
        }
        mapping.push(site);
        per_edge_cost.push(S::from_key(d, &kernel));
        steps.push(GreedyStep { request: req.id, site, unfull });
    }

    let total_cost = per_edge_cost.iter().cloned().sum();
    Ok(GreedyRun {
        assignment: Assignment { mapping, per_edge_cost, total_cost },
        trace: GreedyTrace { steps, history: UnfullHistory { filled_by } },
    })
}

/// Recomputes the cost of `assign` from the metric.
pub fn assignment_cost<S: Scalar>(inst: &Instance, assign: &Assignment<S>) -> Result<S, InstanceError> {
    Ok(Assignment::<S>::from_mapping(inst, assign.mapping.clone())?.total_cost)
}

/// Checks the greedy step property of an online mapping: every request went
/// to a site no farther than any site unfull at its arrival. Returns the first
/// offending request.
pub fn find_non_greedy_step<S: Scalar>(inst: &Instance, mapping: &[SiteId]) -> Result<Option<RequestId>, GreedyError> {
    let kernel = S::kernel(inst.space())?;
    let mut occupancy = OccupancyState::new(inst);
    for (req, &chosen) in inst.requests().iter().zip(mapping) {
        let d = kernel.distance(inst.sites()[chosen].point, req.point);
        let scale = d;
        let beaten = inst
            .sites()
            .iter()
            .filter(|s| occupancy.is_unfull(s.id))
            .any(|s| !d.le_within(kernel.distance(s.point, req.point), scale));
        if beaten || !occupancy.is_unfull(chosen) {
            return Ok(Some(req.id));
        }
        occupancy.occupy(chosen);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_lower_bound, Request, Site};
    use crate::metric::MetricSpace;
    use crate::num::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    #[test]
    fn lower_bound_k3_m2_with_highest_index_ties() {
        let inst = gen_lower_bound(3, 2, &q(0)).unwrap();
        let run = run_greedy::<Rational>(&inst, TieBreak::HighestSiteIndex).unwrap();
        assert_eq!(run.assignment.mapping, vec![1, 1, 1, 0]);
        assert_eq!(run.assignment.per_edge_cost, vec![q(1), q(1), q(1), q(2)]);
        assert_eq!(run.assignment.total_cost, q(5));
        assert_eq!(assignment_cost(&inst, &run.assignment).unwrap(), q(5));
        // Site 2 is full when the last request arrives.
        assert_eq!(run.trace.steps[3].unfull.iter_ones().collect::<Vec<_>>(), vec![0]);
        assert_eq!(run.trace.history.filled_by(1), Some(2));
        assert_eq!(run.trace.history.filled_by(0), None);
    }

    #[test]
    fn lowest_index_ties_go_the_other_way() {
        let inst = gen_lower_bound(3, 2, &q(0)).unwrap();
        let run = run_greedy::<Rational>(&inst, TieBreak::LowestSiteIndex).unwrap();
        assert_eq!(run.assignment.mapping, vec![0, 0, 0, 1]);
        assert_eq!(run.assignment.total_cost, q(3));
    }

    #[test]
    fn epsilon_makes_the_choice_strict() {
        let eps = Rational::new(1.into(), 1_000_000.into());
        let inst = gen_lower_bound(3, 2, &eps).unwrap();
        let reference =
            run_greedy::<Rational>(&gen_lower_bound(3, 2, &q(0)).unwrap(), TieBreak::HighestSiteIndex).unwrap();
        for policy in [TieBreak::LowestSiteIndex, TieBreak::HighestSiteIndex] {
            let run = run_greedy::<Rational>(&inst, policy).unwrap();
            assert_eq!(run.assignment.mapping, reference.assignment.mapping);
        }
    }

    #[test]
    fn co_located_request_costs_nothing() {
        let space = MetricSpace::line(vec![q(4)]).unwrap();
        let inst =
            Instance::new(space, vec![Site { id: 0, point: 0, capacity: 1 }], 3, vec![Request { id: 0, point: 0 }])
                .unwrap();
        let run = run_greedy::<Rational>(&inst, TieBreak::default()).unwrap();
        assert_eq!(run.assignment.total_cost, q(0));
        let run = run_greedy::<f64>(&inst, TieBreak::default()).unwrap();
        assert_eq!(run.assignment.total_cost, 0.0);
    }

    #[test]
    fn history_matches_replay() {
        let inst = gen_lower_bound(3, 3, &q(0)).unwrap();
        let run = run_greedy::<Rational>(&inst, TieBreak::HighestSiteIndex).unwrap();
        let replay = UnfullHistory::from_mapping(&inst, &run.assignment.mapping).unwrap();
        assert_eq!(replay, run.trace.history);
        for step in &run.trace.steps {
            for s in 0..inst.site_count() {
                assert_eq!(step.unfull[s], replay.is_unfull_at(s, step.request));
            }
        }
        assert_eq!(find_non_greedy_step::<Rational>(&inst, &run.assignment.mapping).unwrap(), None);
        let mut bad = run.assignment.mapping.clone();
        bad[0] = 2;
        assert_eq!(find_non_greedy_step::<Rational>(&inst, &bad).unwrap(), Some(0));
    }

    #[test]
    fn replay_rejects_overfull_sites() {
        let inst = gen_lower_bound(3, 1, &q(0)).unwrap();
        assert!(UnfullHistory::from_mapping(&inst, &[0]).is_ok());
        assert!(UnfullHistory::from_mapping(&inst, &[1]).is_err());
    }
}
