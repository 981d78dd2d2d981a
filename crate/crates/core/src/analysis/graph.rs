use super::AnalysisError;
use crate::greedy::UnfullHistory;
use crate::instance::{Assignment, Instance, RequestId, Role, SiteId};
use crate::num::Scalar;

/// Bipartite multigraph of adversary edges `(r_i, s_i)` and online edges
/// `(s_sigma(i), r_i)` over a unit instance.
///
/// Requests served by the same site in both assignments form a doubled edge;
/// such pairs are excised up front and accounted for separately at ratio 1.
#[derive(Debug, Clone)]
pub struct ResponseGraph<S> {
    k: u32,
    adversary: Vec<SiteId>,
    adversary_cost: Vec<S>,
    online: Vec<SiteId>,
    online_cost: Vec<S>,
    site_online: Vec<Vec<RequestId>>,
    site_adversary: Vec<Option<RequestId>>,
    excised: Vec<RequestId>,
    history: UnfullHistory,
}

pub fn build_response_graph<S: Scalar>(
    unit: &Instance,
    online: &Assignment<S>,
    adversary: &Assignment<S>,
    history: &UnfullHistory,
) -> Result<ResponseGraph<S>, AnalysisError> {
    if let Some(s) = unit.sites().iter().find(|s| s.capacity != 1) {
        return Err(AnalysisError::NotUnit { site: s.id, capacity: s.capacity });
    }
    online.check_feasible(unit, Role::Online)?;
    adversary.check_feasible(unit, Role::Adversary)?;
    if UnfullHistory::from_mapping(unit, &online.mapping)? != *history {
        return Err(AnalysisError::HistoryMismatch);
    }

    let mut site_online = vec![Vec::new(); unit.site_count()];
    let mut site_adversary = vec![None; unit.site_count()];
    let mut excised = Vec::new();
    for r in 0..unit.request_count() {
        let (on, adv) = (online.mapping[r], adversary.mapping[r]);
        if on == adv {
            excised.push(r);
            continue;
        }
        site_online[on].push(r);
        site_adversary[adv] = Some(r);
    }
    Ok(ResponseGraph {
        k: unit.k(),
        adversary: adversary.mapping.clone(),
        adversary_cost: adversary.per_edge_cost.clone(),
        online: online.mapping.clone(),
        online_cost: online.per_edge_cost.clone(),
        site_online,
        site_adversary,
        excised,
        history: history.clone(),
    })
}

impl<S: Scalar> ResponseGraph<S> {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn request_count(&self) -> usize {
        self.adversary.len()
    }

    pub fn site_count(&self) -> usize {
        self.site_online.len()
    }

    pub fn adversary_site(&self, r: RequestId) -> SiteId {
        self.adversary[r]
    }

    pub fn adversary_cost(&self, r: RequestId) -> &S {
        &self.adversary_cost[r]
    }

    pub fn online_site(&self, r: RequestId) -> SiteId {
        self.online[r]
    }

    pub fn online_cost(&self, r: RequestId) -> &S {
        &self.online_cost[r]
    }

    /// Requests served online by `site` after excision, in arrival order.
    pub fn online_requests(&self, site: SiteId) -> &[RequestId] {
        &self.site_online[site]
    }

    pub fn adversary_request(&self, site: SiteId) -> Option<RequestId> {
        self.site_adversary[site]
    }

    /// Requests whose two edges coincided and were removed.
    pub fn excised(&self) -> &[RequestId] {
        &self.excised
    }

    pub fn is_excised(&self, r: RequestId) -> bool {
        self.online[r] == self.adversary[r]
    }

    /// Cost of one side of the excised pairs (both sides are equal).
    pub fn excised_cost(&self) -> S {
        self.excised.iter().map(|&r| self.adversary_cost[r].clone()).sum()
    }

    /// Total weight removed by excision, both edges counted.
    pub fn excised_mass(&self) -> S {
        let one = self.excised_cost();
        one.clone() + one
    }

    pub fn adversary_edge_count(&self) -> usize {
        self.adversary.len() - self.excised.len()
    }

    pub fn online_edge_count(&self) -> usize {
        self.online.len() - self.excised.len()
    }

    pub fn history(&self) -> &UnfullHistory {
        &self.history
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Request, Site};
    use crate::metric::MetricSpace;
    use crate::num::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn unit(xs: &[i64], site_points: &[usize], request_points: &[usize]) -> Instance {
        let space = MetricSpace::line(xs.iter().map(|&x| q(x)).collect()).unwrap();
        let sites = site_points.iter().enumerate().map(|(i, &p)| Site { id: i, point: p, capacity: 1 }).collect();
        let reqs = request_points.iter().enumerate().map(|(i, &p)| Request { id: i, point: p }).collect();
        Instance::new(space, sites, 3, reqs).unwrap()
    }

    fn graph(
        inst: &Instance,
        online: Vec<SiteId>,
        adversary: Vec<SiteId>,
    ) -> Result<ResponseGraph<Rational>, AnalysisError> {
        let on = Assignment::from_mapping(inst, online).unwrap();
        let adv = Assignment::from_mapping(inst, adversary).unwrap();
        let history = UnfullHistory::from_mapping(inst, &on.mapping).unwrap();
        build_response_graph(inst, &on, &adv, &history)
    }

    #[test]
    fn doubled_edge_is_excised() {
        let inst = unit(&[0, 5], &[0], &[1]);
        let g = graph(&inst, vec![0], vec![0]).unwrap();
        assert_eq!(g.excised(), &[0]);
        assert_eq!(g.adversary_edge_count() + g.online_edge_count(), 0);
        assert_eq!(g.excised_mass(), q(10));
        assert!(g.online_requests(0).is_empty());
        assert_eq!(g.adversary_request(0), None);
    }

    #[test]
    fn smallest_path() {
        let inst = unit(&[0, 1, 3], &[0, 2], &[1]);
        let g = graph(&inst, vec![0], vec![1]).unwrap();
        assert_eq!((g.adversary_edge_count(), g.online_edge_count()), (1, 1));
        assert_eq!(g.online_requests(0), &[0]);
        assert_eq!(g.adversary_request(1), Some(0));
        assert_eq!(g.excised_mass(), q(0));
    }

    #[test]
    fn non_unit_instances_are_refused() {
        let space = MetricSpace::line(vec![q(0)]).unwrap();
        let inst = Instance::new(space, vec![Site { id: 0, point: 0, capacity: 2 }], 3, vec![]).unwrap();
        let a = Assignment::<Rational>::from_mapping(&inst, vec![]).unwrap();
        let h = UnfullHistory::from_mapping(&inst, &[]).unwrap();
        assert_eq!(
            build_response_graph(&inst, &a, &a, &h).unwrap_err(),
            AnalysisError::NotUnit { site: 0, capacity: 2 }
        );
    }

    #[test]
    fn stale_history_is_refused() {
        let inst = unit(&[0, 1, 3], &[0, 2, 2], &[1, 1, 1]);
        let on = Assignment::<Rational>::from_mapping(&inst, vec![0, 0, 0]).unwrap();
        let adv = Assignment::<Rational>::from_mapping(&inst, vec![0, 1, 2]).unwrap();
        let other = UnfullHistory::from_mapping(&inst, &[1, 1, 1]).unwrap();
        assert_eq!(build_response_graph(&inst, &on, &adv, &other).unwrap_err(), AnalysisError::HistoryMismatch);
    }

    #[test]
    fn adversary_overload_is_refused() {
        let inst = unit(&[0, 1, 3], &[0, 2], &[1, 1]);
        assert!(matches!(graph(&inst, vec![0, 0], vec![1, 1]), Err(AnalysisError::Instance(_))));
    }
}
