//! Reduction of an instance to unit adversary capacities.

use super::{Assignment, Instance, InstanceError, Role, Site, SiteId};
use crate::num::Scalar;

/// A unit-capacity instance with both assignments carried over.
#[derive(Debug, Clone)]
pub struct UnitSplit<S> {
    pub instance: Instance,
    pub online: Assignment<S>,
    pub adversary: Assignment<S>,
    /// Original site of each unit site.
    pub origin: Vec<SiteId>,
}

/// Replaces each site `j` by `a_j` co-located copies with adversary
/// capacity 1 (online capacity `k`).
///
/// Copies of site `j` are numbered consecutively. The adversary's requests at
/// `j` go one per copy in arrival order; the online requests at `j` fill
/// copies in index order, `k` per copy, also in arrival order. Per-request
/// costs are unchanged because copies share the original point.
pub fn split_unit<S: Scalar>(
    inst: &Instance,
    online: &Assignment<S>,
    adversary: &Assignment<S>,
) -> Result<UnitSplit<S>, InstanceError> {
    online.check_feasible(inst, Role::Online)?;
    adversary.check_feasible(inst, Role::Adversary)?;

    let mut first_copy = Vec::with_capacity(inst.site_count());
    let mut sites = Vec::new();
    let mut origin = Vec::new();
    for s in inst.sites() {
        first_copy.push(sites.len());
        for _ in 0..s.capacity {
            sites.push(Site { id: sites.len(), point: s.point, capacity: 1 });
            origin.push(s.id);
        }
    }

    let k = inst.k() as usize;
    let mut online_seen = vec![0usize; inst.site_count()];
    let online_mapping = online
        .mapping
        .iter()
        .map(|&s| {
            let copy = first_copy[s] + online_seen[s] / k;
            online_seen[s] += 1;
            copy
        })
        .collect();
    let mut adversary_seen = vec![0usize; inst.site_count()];
    let adversary_mapping = adversary
        .mapping
        .iter()
        .map(|&s| {
            let copy = first_copy[s] + adversary_seen[s];
            adversary_seen[s] += 1;
            copy
        })
        .collect();

    let instance = Instance::new(inst.space().clone(), sites, inst.k(), inst.requests().to_vec())?;
    let online = Assignment {
        mapping: online_mapping,
        per_edge_cost: online.per_edge_cost.clone(),
        total_cost: online.total_cost.clone(),
    };
    let adversary = Assignment {
        mapping: adversary_mapping,
        per_edge_cost: adversary.per_edge_cost.clone(),
        total_cost: adversary.total_cost.clone(),
    };
    online.check_feasible(&instance, Role::Online)?;
    adversary.check_feasible(&instance, Role::Adversary)?;
    Ok(UnitSplit { instance, online, adversary, origin })
}
