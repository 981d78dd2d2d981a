//! Problem instances and assignments.

mod format;
mod generate;
mod split;

pub use format::{parse_instance, serialize_instance, FORMAT_VERSION};
pub use generate::{gen_lower_bound, gen_random, lower_bound_greedy_cost, RandomParams};
pub use split::{split_unit, UnitSplit};

use thiserror::Error;

use crate::metric::{MetricError, MetricSpace, PointId};
use crate::num::Scalar;

pub type SiteId = usize;
pub type RequestId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("infeasible: total adversary capacity {capacity} < {requests} requests")]
    Infeasible { capacity: u128, requests: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{0}")]
    Domain(String),
}

impl InstanceError {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        InstanceError::Field { field: field.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Site {
    pub id: SiteId,
    pub point: PointId,
    /// Adversary capacity `a_j`; the online algorithm gets `k * a_j`.
    pub capacity: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Request {
    pub id: RequestId,
    pub point: PointId,
}

/// Sites with adversary capacities, an augmentation factor and an ordered
/// request sequence over a shared metric space.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    space: MetricSpace,
    sites: Vec<Site>,
    k: u32,
    requests: Vec<Request>,
}

impl Instance {
    /// Validates ids (`0..len` in order), point references, positive
    /// capacities, `k >= 1` and adversary feasibility.
    pub fn new(space: MetricSpace, sites: Vec<Site>, k: u32, requests: Vec<Request>) -> Result<Self, InstanceError> {
        if k == 0 {
            return Err(InstanceError::field("k", "augmentation factor must be at least 1"));
        }
        if sites.is_empty() {
            return Err(InstanceError::field("sites", "at least one site is required"));
        }
        let points = space.point_count();
        for (i, s) in sites.iter().enumerate() {
            if s.id != i {
                return Err(InstanceError::field(format!("sites[{i}].id"), format!("expected {i}, found {}", s.id)));
            }
            if s.point >= points {
                return Err(InstanceError::field(
                    format!("sites[{i}].point"),
                    format!("point {} out of range", s.point),
                ));
            }
            if s.capacity == 0 {
                return Err(InstanceError::field(format!("sites[{i}].capacity"), "capacity must be positive"));
            }
        }
        for (i, r) in requests.iter().enumerate() {
            if r.id != i {
                return Err(InstanceError::field(format!("requests[{i}].id"), format!("expected {i}, found {}", r.id)));
            }
            if r.point >= points {
                return Err(InstanceError::field(
                    format!("requests[{i}].point"),
                    format!("point {} out of range", r.point),
                ));
            }
        }
        let capacity: u128 = sites.iter().map(|s| s.capacity as u128).sum();
        if capacity < requests.len() as u128 {
            return Err(InstanceError::Infeasible { capacity, requests: requests.len() });
        }
        Ok(Instance { space, sites, k, requests })
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn request_count(&self) -> usize {
        self.requests.len()
    }

    pub fn capacity(&self, site: SiteId, role: Role) -> u64 {
        match role {
            Role::Adversary => self.sites[site].capacity,
            Role::Online => self.sites[site].capacity * self.k as u64,
        }
    }

    /// Every site has adversary capacity one.
    pub fn is_unit(&self) -> bool {
        self.sites.iter().all(|s| s.capacity == 1)
    }

    pub fn is_exact(&self) -> bool {
        self.space.is_exact()
    }

    pub fn distance<S: Scalar>(&self, site: SiteId, request: RequestId) -> Result<S, MetricError> {
        S::metric_distance(&self.space, self.sites[site].point, self.requests[request].point)
    }
}

/// Which capacity bound an assignment must respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Online,
    Adversary,
}

/// A request-to-site mapping with its per-request costs.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<S> {
    pub mapping: Vec<SiteId>,
    pub per_edge_cost: Vec<S>,
    pub total_cost: S,
}

impl<S: Scalar> Assignment<S> {
    /// Computes costs for `mapping` from the metric.
    pub fn from_mapping(inst: &Instance, mapping: Vec<SiteId>) -> Result<Self, InstanceError> {
        check_mapping(inst, &mapping)?;
        let per_edge_cost =
            mapping.iter().enumerate().map(|(r, &s)| inst.distance::<S>(s, r)).collect::<Result<Vec<S>, _>>()?;
        let total_cost = per_edge_cost.iter().cloned().sum();
        Ok(Assignment { mapping, per_edge_cost, total_cost })
    }

    /// Checks every request is mapped to a valid site and that no site
    /// exceeds its capacity for `role`.
    pub fn check_feasible(&self, inst: &Instance, role: Role) -> Result<(), InstanceError> {
        check_mapping(inst, &self.mapping)?;
        if self.per_edge_cost.len() != self.mapping.len() {
            return Err(InstanceError::Domain("per-edge cost list does not match mapping".into()));
        }
        let mut load = vec![0u64; inst.site_count()];
        for &s in &self.mapping {
            load[s] += 1;
        }
        for (s, &l) in load.iter().enumerate() {
            let cap = inst.capacity(s, role);
            if l > cap {
                return Err(InstanceError::Domain(format!(
                    "{role:?} assignment puts {l} requests on site {s} (capacity {cap})"
                )));
            }
        }
        Ok(())
    }
}

fn check_mapping(inst: &Instance, mapping: &[SiteId]) -> Result<(), InstanceError> {
    if mapping.len() != inst.request_count() {
        let first = mapping.len().min(inst.request_count());
        return Err(InstanceError::Domain(format!(
            "request {first} is unmapped (mapping has {} entries for {} requests)",
            mapping.len(),
            inst.request_count()
        )));
    }
    if let Some((r, &s)) = mapping.iter().enumerate().find(|(_, &s)| s >= inst.site_count()) {
        return Err(InstanceError::Domain(format!("request {r} mapped to unknown site {s}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Rational;

    fn line(xs: &[i64]) -> MetricSpace {
        MetricSpace::line(xs.iter().map(|&x| Rational::from_integer(x.into())).collect()).unwrap()
    }

    fn sites(caps: &[u64]) -> Vec<Site> {
        caps.iter().enumerate().map(|(i, &c)| Site { id: i, point: i, capacity: c }).collect()
    }

    fn requests(points: &[usize]) -> Vec<Request> {
        points.iter().enumerate().map(|(i, &p)| Request { id: i, point: p }).collect()
    }

    #[test]
    fn infeasible_instance_is_rejected() {
        let err = Instance::new(line(&[0, 1]), sites(&[1]), 3, requests(&[1, 1])).unwrap_err();
        assert_eq!(err, InstanceError::Infeasible { capacity: 1, requests: 2 });
        assert!(err.to_string().starts_with("infeasible"));
    }

    #[test]
    fn ids_must_follow_arrival_order() {
        let mut reqs = requests(&[0, 1]);
        reqs[1].id = 5;
        let err = Instance::new(line(&[0, 1]), sites(&[2]), 3, reqs).unwrap_err();
        assert!(matches!(err, InstanceError::Field { ref field, .. } if field == "requests[1].id"));
    }

    #[test]
    fn online_capacity_is_k_times_adversary() {
        let inst = Instance::new(line(&[0, 1]), sites(&[2, 1]), 3, requests(&[1])).unwrap();
        assert_eq!(inst.capacity(0, Role::Online), 6);
        assert_eq!(inst.capacity(0, Role::Adversary), 2);
        assert!(!inst.is_unit());
    }

    #[test]
    fn assignment_costs_come_from_metric() {
        let inst = Instance::new(line(&[-1, 2, 0]), sites(&[1, 1]), 3, requests(&[2, 2])).unwrap();
        let a = Assignment::<Rational>::from_mapping(&inst, vec![0, 1]).unwrap();
        assert_eq!(a.total_cost, Rational::from_integer(3.into()));
        a.check_feasible(&inst, Role::Adversary).unwrap();
        let b = Assignment::<Rational>::from_mapping(&inst, vec![1, 1]).unwrap();
        assert!(b.check_feasible(&inst, Role::Adversary).is_err());
        b.check_feasible(&inst, Role::Online).unwrap();
        assert!(Assignment::<Rational>::from_mapping(&inst, vec![0]).is_err());
        assert!(Assignment::<Rational>::from_mapping(&inst, vec![0, 7]).is_err());
    }
}
