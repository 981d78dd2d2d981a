use bitvec::prelude::*;

use super::{AnalysisError, ResponseGraph};
use crate::instance::{RequestId, SiteId};
use crate::num::Scalar;

/// One request of a response tree together with its adversary site.
///
/// Node `i` stands for the pair `(r_i, s_i)`: the request, its sole child
/// (the adversary site) and the edge between them. The request's parent is
/// the site that served it online; `children` lists the nodes whose requests
/// that site (`s_i`) served online. A node without children has a leaf site.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode<S> {
    pub request: RequestId,
    pub site: SiteId,
    pub adversary_cost: S,
    pub online_site: SiteId,
    pub online_cost: S,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// A rooted response tree. Node 0 is the root; parents precede children.
///
/// The root's online edge is the one deleted before growth; it is kept on
/// node 0 so the tree's online cost can include it.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseTree<S> {
    pub id: usize,
    pub k: u32,
    pub nodes: Vec<TreeNode<S>>,
}

impl<S: Scalar> ResponseTree<S> {
    pub fn root(&self) -> RequestId {
        self.nodes[0].request
    }

    pub fn root_server(&self) -> SiteId {
        self.nodes[0].online_site
    }

    pub fn root_online_cost(&self) -> &S {
        &self.nodes[0].online_cost
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.nodes[node].children.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = SiteId> + '_ {
        self.nodes.iter().filter(|n| n.children.is_empty()).map(|n| n.site)
    }

    /// Latest request in the tree.
    pub fn latest_request(&self) -> RequestId {
        self.nodes.iter().map(|n| n.request).max().expect("trees are nonempty")
    }

    /// Number of adversary edges on the longest root path.
    pub fn height(&self) -> usize {
        let mut depth = vec![1usize; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate().skip(1) {
            depth[i] = depth[n.parent.expect("non-root nodes have parents")] + 1;
        }
        depth.into_iter().max().unwrap_or(0)
    }
}

/// Assembles trees by hand, mainly for examples and tests.
#[derive(Debug, Clone)]
pub struct TreeBuilder<S> {
    tree: ResponseTree<S>,
}

impl<S: Scalar> TreeBuilder<S> {
    pub fn new(
        k: u32,
        root: RequestId,
        root_server: SiteId,
        root_online_cost: S,
        site: SiteId,
        adversary_cost: S,
    ) -> Self {
        let node = TreeNode {
            request: root,
            site,
            adversary_cost,
            online_site: root_server,
            online_cost: root_online_cost,
            parent: None,
            children: Vec::new(),
        };
        TreeBuilder { tree: ResponseTree { id: 0, k, nodes: vec![node] } }
    }

    /// Hangs `request` under the site of `parent`; returns the new node.
    pub fn attach(
        &mut self,
        parent: usize,
        request: RequestId,
        online_cost: S,
        site: SiteId,
        adversary_cost: S,
    ) -> usize {
        let index = self.tree.nodes.len();
        let online_site = self.tree.nodes[parent].site;
        self.tree.nodes[parent].children.push(index);
        self.tree.nodes.push(TreeNode {
            request,
            site,
            adversary_cost,
            online_site,
            online_cost,
            parent: Some(parent),
            children: Vec::new(),
        });
        index
    }

    /// Fails unless every internal site has exactly `k` children.
    pub fn build(self) -> Result<ResponseTree<S>, AnalysisError> {
        let k = self.tree.k as usize;
        if let Some(n) = self.tree.nodes.iter().find(|n| !n.children.is_empty() && n.children.len() != k) {
            return Err(AnalysisError::Malformed(format!(
                "site {} has {} children, expected 0 or {k}",
                n.site,
                n.children.len()
            )));
        }
        Ok(self.tree)
    }
}

/// Splits the graph into response trees.
///
/// Repeatedly takes the latest remaining request as a root, deletes its
/// online edge and grows level by level: a reached site with `k` remaining
/// online edges is internal and brings in those requests, any other site is a
/// leaf. Each growth step is cross-checked against the unfull history (a site
/// is internal exactly when it was full at the root's arrival) and against
/// the tree shape.
pub fn decompose<S: Scalar>(graph: &ResponseGraph<S>) -> Result<Vec<ResponseTree<S>>, AnalysisError> {
    let n = graph.request_count();
    let k = graph.k();
    let history = graph.history();
    let mut removed: BitVec = bitvec![0; n];
    for &r in graph.excised() {
        removed.set(r, true);
    }
    let mut reached: BitVec = bitvec![0; graph.site_count()];
    let mut trees = Vec::new();

    for root in (0..n).rev() {
        if removed[root] {
            continue;
        }
        removed.set(root, true);
        let mut nodes = vec![node(graph, root, None)];
        let mut next = 0;
        while next < nodes.len() {
            let site = nodes[next].site;
            if reached[site] {
                return Err(AnalysisError::Cycle { root, site });
            }
            reached.set(site, true);
            let remaining: Vec<RequestId> =
                graph.online_requests(site).iter().copied().filter(|&r| !removed[r]).collect();
            if remaining.len() > k as usize {
                return Err(AnalysisError::ChildCount { root, site, found: remaining.len(), k });
            }
            let internal = remaining.len() == k as usize;
            let unfull = history.is_unfull_at(site, root);
            if internal == unfull {
                return Err(AnalysisError::LeafRule { root, site, remaining: remaining.len(), unfull });
            }
            if internal {
                for r in remaining {
                    if r > root {
                        return Err(AnalysisError::Reused { root, request: r });
                    }
                    removed.set(r, true);
                    let index = nodes.len();
                    nodes[next].children.push(index);
                    nodes.push(node(graph, r, Some(next)));
                }
            }
            next += 1;
        }
        trees.push(ResponseTree { id: trees.len(), k, nodes });
    }
    Ok(trees)
}

fn node<S: Scalar>(graph: &ResponseGraph<S>, r: RequestId, parent: Option<usize>) -> TreeNode<S> {
    TreeNode {
        request: r,
        site: graph.adversary_site(r),
        adversary_cost: graph.adversary_cost(r).clone(),
        online_site: graph.online_site(r),
        online_cost: graph.online_cost(r).clone(),
        parent,
        children: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_response_graph;
    use crate::greedy::{run_greedy, TieBreak, UnfullHistory};
    use crate::instance::{gen_lower_bound, split_unit, Assignment, Instance, Request, Site};
    use crate::metric::MetricSpace;
    use crate::num::Rational;
    use crate::opt::solve_opt;

    fn q(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn lower_bound_graph(k: u32, m: u32) -> ResponseGraph<Rational> {
        let inst = gen_lower_bound(k, m, &q(0)).unwrap();
        let greedy = run_greedy::<Rational>(&inst, TieBreak::HighestSiteIndex).unwrap();
        let opt = solve_opt::<Rational>(&inst).unwrap();
        let split = split_unit(&inst, &greedy.assignment, &opt.assignment).unwrap();
        let history = UnfullHistory::from_mapping(&split.instance, &split.online.mapping).unwrap();
        build_response_graph(&split.instance, &split.online, &split.adversary, &history).unwrap()
    }

    #[test]
    fn lower_bound_k3_m2_is_one_tree() {
        let g = lower_bound_graph(3, 2);
        assert_eq!((g.request_count(), g.site_count()), (4, 4));
        assert_eq!(g.adversary_edge_count() + g.online_edge_count(), 8);
        let trees = decompose(&g).unwrap();
        assert_eq!(trees.len(), 1);
        let t = &trees[0];
        assert_eq!(t.root(), 3);
        // Batch-2 request was served online by the first copy of s_1.
        assert_eq!(t.root_server(), 0);
        assert_eq!(*t.root_online_cost(), q(2));
        assert_eq!(t.nodes.len(), 4);
        assert_eq!(t.nodes[0].children, vec![1, 2, 3]);
        assert_eq!(t.leaves().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(t.height(), 2);
    }

    #[test]
    fn single_path_has_one_leaf() {
        let space = MetricSpace::line(vec![q(0), q(1), q(3)]).unwrap();
        let sites = vec![Site { id: 0, point: 0, capacity: 1 }, Site { id: 1, point: 2, capacity: 1 }];
        let inst = Instance::new(space, sites, 3, vec![Request { id: 0, point: 1 }]).unwrap();
        let on = Assignment::<Rational>::from_mapping(&inst, vec![0]).unwrap();
        let adv = Assignment::<Rational>::from_mapping(&inst, vec![1]).unwrap();
        let h = UnfullHistory::from_mapping(&inst, &on.mapping).unwrap();
        let trees = decompose(&build_response_graph(&inst, &on, &adv, &h).unwrap()).unwrap();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].leaves().collect::<Vec<_>>(), vec![1]);
        assert_eq!((trees[0].root_server(), trees[0].root_online_cost().clone()), (0, q(1)));
    }

    #[test]
    fn empty_graph_has_no_trees() {
        let space = MetricSpace::line(vec![q(0)]).unwrap();
        let inst = Instance::new(space, vec![Site { id: 0, point: 0, capacity: 1 }], 3, vec![]).unwrap();
        let a = Assignment::<Rational>::from_mapping(&inst, vec![]).unwrap();
        let h = UnfullHistory::from_mapping(&inst, &[]).unwrap();
        assert!(decompose(&build_response_graph(&inst, &a, &a, &h).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn every_edge_lands_in_one_tree() {
        for (k, m) in [(3, 4), (4, 3), (5, 3)] {
            let g = lower_bound_graph(k, m);
            let trees = decompose(&g).unwrap();
            let nodes: usize = trees.iter().map(|t| t.nodes.len()).sum();
            assert_eq!(nodes + g.excised().len(), g.request_count());
        }
    }

    #[test]
    fn builder_rejects_partial_sites() {
        let mut b = TreeBuilder::new(3, 0, 0, q(1), 1, q(1));
        b.attach(0, 1, q(1), 2, q(0));
        assert!(b.build().is_err());
    }
}
