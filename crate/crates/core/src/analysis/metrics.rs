use super::ResponseTree;
use crate::num::Scalar;

/// Leaf distances over tree edge weights, indexed by node.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafDistances<S> {
    pub requests: Vec<S>,
    pub sites: Vec<S>,
    /// The root's online server, which sits above the root.
    pub root_server: S,
}

pub fn leaf_distance<S: Scalar>(tree: &ResponseTree<S>) -> LeafDistances<S> {
    let len = tree.nodes.len();
    let mut requests = vec![S::zero(); len];
    let mut sites = vec![S::zero(); len];
    for i in (0..len).rev() {
        let node = &tree.nodes[i];
        let mut best: Option<S> = None;
        for &c in &node.children {
            let v = tree.nodes[c].online_cost.clone() + requests[c].clone();
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
        sites[i] = best.unwrap_or_else(S::zero);
        requests[i] = node.adversary_cost.clone() + sites[i].clone();
    }
    let root_server = tree.nodes[0].online_cost.clone() + requests[0].clone();
    LeafDistances { requests, sites, root_server }
}

/// `W(r_j) = d(r_j, s_j) + (2/k) * sum of W over the requests under s_j`.
pub fn weighted_tree_cost<S: Scalar>(tree: &ResponseTree<S>) -> Vec<S> {
    let factor = S::from_ratio(2, tree.k as i64);
    let mut w = vec![S::zero(); tree.nodes.len()];
    for i in (0..tree.nodes.len()).rev() {
        let node = &tree.nodes[i];
        let below: S = node.children.iter().map(|&c| w[c].clone()).sum();
        w[i] = if node.children.is_empty() {
            node.adversary_cost.clone()
        } else {
            node.adversary_cost.clone() + factor.clone() * below
        };
    }
    w
}

/// Sum of adversary edge weights per level; entry `l - 1` holds level `l`,
/// the edges whose root path crosses `l` adversary edges.
pub fn adversary_levels<S: Scalar>(tree: &ResponseTree<S>) -> Vec<S> {
    let mut depth = vec![0usize; tree.nodes.len()];
    let mut levels: Vec<S> = Vec::new();
    for (i, node) in tree.nodes.iter().enumerate() {
        depth[i] = node.parent.map_or(0, |p| depth[p] + 1);
        if levels.len() <= depth[i] {
            levels.push(S::zero());
        }
        levels[depth[i]] = levels[depth[i]].clone() + node.adversary_cost.clone();
    }
    levels
}

/// `sum over levels l of (2/k)^(l-1) * (weight of level l)`.
pub fn weighted_cost_closed_form<S: Scalar>(tree: &ResponseTree<S>) -> S {
    let factor = S::from_ratio(2, tree.k as i64);
    let mut scale = S::one();
    let mut total = S::zero();
    for level in adversary_levels(tree) {
        total = total + scale.clone() * level;
        scale = scale * factor.clone();
    }
    total
}

/// Coefficient of each node's adversary edge in `sum over nodes of W`.
pub fn edge_coefficients<S: Scalar>(tree: &ResponseTree<S>) -> Vec<S> {
    let factor = S::from_ratio(2, tree.k as i64);
    let mut coef: Vec<S> = Vec::with_capacity(tree.nodes.len());
    for node in &tree.nodes {
        let c = match node.parent {
            None => S::one(),
            Some(p) => S::one() + factor.clone() * coef[p].clone(),
        };
        coef.push(c);
    }
    coef
}

/// `(ON(T), OPT(T))`; the online side includes the deleted root edge.
pub fn tree_costs<S: Scalar>(tree: &ResponseTree<S>) -> (S, S) {
    let on = tree.nodes.iter().map(|n| n.online_cost.clone()).sum();
    let opt = tree.nodes.iter().map(|n| n.adversary_cost.clone()).sum();
    (on, opt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::TreeBuilder;
    use crate::num::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn frac(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    /// Root edge 1, three online children at 1, their adversary edges 0.
    fn flat_tree() -> ResponseTree<Rational> {
        let mut b = TreeBuilder::new(3, 3, 9, q(2), 3, q(1));
        for r in 0..3 {
            b.attach(0, r, q(1), r, q(0));
        }
        b.build().unwrap()
    }

    #[test]
    fn leaf_sites_are_at_distance_zero() {
        let ld = leaf_distance(&flat_tree());
        assert_eq!(&ld.sites[1..], &[q(0), q(0), q(0)]);
        assert_eq!(ld.requests[0], q(2));
        assert_eq!(ld.sites[0], q(1));
        assert_eq!(ld.root_server, q(4));
    }

    #[test]
    fn single_hop_request() {
        let t = TreeBuilder::new(3, 0, 1, q(2), 0, q(4)).build().unwrap();
        assert_eq!(leaf_distance(&t).requests[0], q(4));
        assert_eq!(weighted_tree_cost(&t)[0], q(4));
        assert_eq!(weighted_cost_closed_form(&t), q(4));
        assert_eq!(tree_costs(&t), (q(2), q(4)));
    }

    #[test]
    fn leaf_base_case_of_weighted_cost() {
        let t = TreeBuilder::new(4, 0, 1, q(0), 0, q(7)).build().unwrap();
        assert_eq!(weighted_tree_cost(&t), vec![q(7)]);
    }

    #[test]
    fn flat_tree_values() {
        let t = flat_tree();
        assert_eq!(weighted_tree_cost(&t)[0], q(1));
        assert_eq!(weighted_cost_closed_form(&t), q(1));
        assert_eq!(adversary_levels(&t), vec![q(1), q(0)]);
        assert_eq!(tree_costs(&t), (q(5), q(1)));
    }

    #[test]
    fn one_recursion_step() {
        // Each grandchild has W = 3 through a leaf edge of weight 3.
        let mut b = TreeBuilder::new(3, 10, 20, q(0), 10, q(1));
        for r in 0..3 {
            b.attach(0, r, q(1), r, q(3));
        }
        let t = b.build().unwrap();
        assert_eq!(weighted_tree_cost(&t)[0], q(7));
        assert_eq!(adversary_levels(&t), vec![q(1), q(9)]);
        assert_eq!(weighted_cost_closed_form(&t), q(7));
        assert_eq!(edge_coefficients(&t), vec![q(1), frac(5, 3), frac(5, 3), frac(5, 3)]);
    }
}
