//! Exact offline optimum under adversary capacities `a_j`.

mod ssp;

use thiserror::Error;

use crate::instance::{Assignment, Instance, InstanceError, RequestId, Role, SiteId};
use crate::metric::{Kernel, MetricError};
use crate::num::{Key, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OptError {
    #[error("instance is infeasible: adversary capacity cannot absorb every request")]
    Infeasible,
    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Node potentials certifying optimality of a flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCertificate<K> {
    pub source: K,
    pub requests: Vec<K>,
    pub sites: Vec<K>,
    pub sink: K,
}

#[derive(Debug, Clone)]
pub struct OptSolution<S: Scalar> {
    pub assignment: Assignment<S>,
    pub certificate: FlowCertificate<S::Key>,
}

/// Minimum-cost assignment respecting adversary capacities.
pub fn solve_opt<S: Scalar>(inst: &Instance) -> Result<OptSolution<S>, OptError> {
    let kernel = S::kernel(inst.space())?;
    let result = ssp::successive_shortest_paths(inst, &kernel)?;
    let per_edge_cost: Vec<S> = result
        .mapping
        .iter()
        .zip(inst.requests())
        .map(|(&s, r)| S::from_key(kernel.distance(inst.sites()[s].point, r.point), &kernel))
        .collect();
    let total_cost = per_edge_cost.iter().cloned().sum();
    Ok(OptSolution {
        assignment: Assignment { mapping: result.mapping, per_edge_cost, total_cost },
        certificate: result.certificate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcKind {
    SourceToRequest(RequestId),
    RequestToSite(RequestId, SiteId),
    SiteToSink(SiteId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowArc<K> {
    pub kind: ArcKind,
    pub capacity: u64,
    pub cost: K,
    pub flow: u64,
}

/// The transportation network `source -> request -> site -> sink` carrying
/// the flow induced by an assignment. Arcs are produced on demand.
pub struct FlowNetwork<'a, K> {
    inst: &'a Instance,
    kernel: Kernel<K>,
    mapping: &'a [SiteId],
    load: Vec<u64>,
}

impl<'a, K: Key> FlowNetwork<'a, K> {
    pub fn new(inst: &'a Instance, kernel: Kernel<K>, mapping: &'a [SiteId]) -> Self {
        let mut load = vec![0u64; inst.site_count()];
        for &s in mapping {
            if s < load.len() {
                load[s] += 1;
            }
        }
        FlowNetwork { inst, kernel, mapping, load }
    }

    pub fn arcs(&self) -> impl Iterator<Item = FlowArc<K>> + '_ {
        let inst = self.inst;
        let source = (0..inst.request_count()).map(|r| FlowArc {
            kind: ArcKind::SourceToRequest(r),
            capacity: 1,
            cost: K::ZERO,
            flow: 1,
        });
        let middle = inst.requests().iter().flat_map(move |req| {
            inst.sites().iter().map(move |site| FlowArc {
                kind: ArcKind::RequestToSite(req.id, site.id),
                capacity: 1,
                cost: self.kernel.distance(req.point, site.point),
                flow: u64::from(self.mapping[req.id] == site.id),
            })
        });
        let sink = inst.sites().iter().map(move |site| FlowArc {
            kind: ArcKind::SiteToSink(site.id),
            capacity: site.capacity,
            cost: K::ZERO,
            flow: self.load[site.id],
        });
        source.chain(middle).chain(sink)
    }

    /// First arc violating complementary slackness under `cert`, with its
    /// reduced cost.
    pub fn first_slackness_violation(&self, cert: &FlowCertificate<K>) -> Option<(FlowArc<K>, K)> {
        self.arcs().find_map(|arc| {
            let (tail, head) = Self::potential(cert, arc.kind);
            let reduced = arc.cost + tail - head;
            let scale = magnitude(arc.cost, tail, head);
            let residual_ok = arc.flow >= arc.capacity || K::ZERO.le_within(reduced, scale);
            let flow_ok = arc.flow == 0 || reduced.le_within(K::ZERO, scale);
            (!(residual_ok && flow_ok)).then_some((arc, reduced))
        })
    }

    fn potential(cert: &FlowCertificate<K>, kind: ArcKind) -> (K, K) {
        match kind {
            ArcKind::SourceToRequest(r) => (cert.source, cert.requests[r]),
            ArcKind::RequestToSite(r, s) => (cert.requests[r], cert.sites[s]),
            ArcKind::SiteToSink(s) => (cert.sites[s], cert.sink),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertificateError {
    #[error("flow is not a feasible assignment: {0}")]
    Infeasible(String),
    #[error("potential vector has the wrong shape")]
    Shape,
    #[error("complementary slackness fails on {kind:?} (flow {flow}/{capacity}, reduced cost {reduced_cost})")]
    Slackness { kind: ArcKind, flow: u64, capacity: u64, reduced_cost: f64 },
}

/// Re-checks optimality of `solution` from scratch: the flow must route every
/// request within capacities, and under the certificate's potentials every
/// arc with residual capacity has reduced cost `>= 0` while every arc carrying
/// flow has reduced cost `<= 0` (so unsaturated arcs with flow sit at zero).
pub fn verify_certificate<S: Scalar>(inst: &Instance, solution: &OptSolution<S>) -> Result<(), CertificateError> {
    let cert = &solution.certificate;
    if cert.requests.len() != inst.request_count() || cert.sites.len() != inst.site_count() {
        return Err(CertificateError::Shape);
    }
    solution
        .assignment
        .check_feasible(inst, Role::Adversary)
        .map_err(|e| CertificateError::Infeasible(e.to_string()))?;
    let kernel = S::kernel(inst.space()).map_err(|e| CertificateError::Infeasible(e.to_string()))?;
    let network = FlowNetwork::new(inst, kernel, &solution.assignment.mapping);
    match network.first_slackness_violation(cert) {
        None => Ok(()),
        Some((arc, reduced)) => Err(CertificateError::Slackness {
            kind: arc.kind,
            flow: arc.flow,
            capacity: arc.capacity,
            reduced_cost: S::from_key(reduced, &network.kernel).to_f64(),
        }),
    }
}

fn magnitude<K: Key>(a: K, b: K, c: K) -> K {
    let mut m = a.abs();
    for v in [b.abs(), c.abs()] {
        if v > m {
            m = v;
        }
    }
    m
}

/// Largest `site_count^request_count` the enumerator accepts.
const BRUTE_FORCE_LIMIT: u128 = 20_000_000;

/// Optimum by exhaustive enumeration of capacity-respecting mappings.
pub fn brute_force_opt<S: Scalar>(inst: &Instance) -> Result<S, OptError> {
    let n = inst.request_count();
    let m = inst.site_count();
    if n > 8 {
        return Err(OptError::TooLarge(format!("{n} requests (limit 8)")));
    }
    if (m as u128).checked_pow(n as u32).is_none_or(|c| c > BRUTE_FORCE_LIMIT) {
        return Err(OptError::TooLarge(format!("{m}^{n} mappings")));
    }
    let kernel = S::kernel(inst.space())?;
    let table: Vec<Vec<S::Key>> = inst
        .requests()
        .iter()
        .map(|r| inst.sites().iter().map(|s| kernel.distance(s.point, r.point)).collect())
        .collect();
    let mut remaining: Vec<u64> = inst.sites().iter().map(|s| s.capacity).collect();
    let mut best: Option<S::Key> = None;
    enumerate(&table, 0, <S::Key as Key>::ZERO, &mut remaining, &mut best);
    best.map(|b| S::from_key(b, &kernel)).ok_or(OptError::Infeasible)
}

fn enumerate<K: Key>(table: &[Vec<K>], r: usize, acc: K, remaining: &mut [u64], best: &mut Option<K>) {
    if r == table.len() {
        if best.is_none_or(|b| acc < b) {
            *best = Some(acc);
        }
        return;
    }
    for s in 0..remaining.len() {
        if remaining[s] == 0 {
            continue;
        }
        remaining[s] -= 1;
        enumerate(table, r + 1, acc + table[r][s], remaining, best);
        remaining[s] += 1;
    }
}
