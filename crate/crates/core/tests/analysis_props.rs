use num_traits::Zero;
use otp_core::analysis::{
    adversary_levels, edge_coefficients, weighted_cost_closed_form, weighted_tree_cost, Check, LemmaOptions,
    ResponseTree, TreeBuilder,
};
use otp_core::greedy::TieBreak;
use otp_core::instance::{Instance, Request, Site};
use otp_core::metric::MetricSpace;
use otp_core::num::Rational;
use otp_core::pipeline::verify_with;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn random_tree(k: u32, seed: u64, max_nodes: usize) -> ResponseTree<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cost = |rng: &mut ChaCha8Rng| Rational::new(rng.gen_range(0..40).into(), rng.gen_range(1..5).into());
    let first = cost(&mut rng);
    let second = cost(&mut rng);
    let mut b = TreeBuilder::new(k, 0, 0, first, 1, second);
    let mut next_id = 1;
    let mut frontier = vec![0usize];
    while let Some(node) = frontier.pop() {
        if next_id + k as usize > max_nodes || !rng.gen_bool(0.6) {
            continue;
        }
        for _ in 0..k {
            let (on, adv) = (cost(&mut rng), cost(&mut rng));
            let child = b.attach(node, next_id, on, next_id + 1, adv);
            next_id += 1;
            frontier.push(child);
        }
    }
    b.build().unwrap()
}

proptest! {
    #[test]
    fn closed_form_matches_recursion(k in 3u32..7, seed in any::<u64>()) {
        let t = random_tree(k, seed, 60);
        let w = weighted_tree_cost(&t);
        prop_assert_eq!(&w[0], &weighted_cost_closed_form(&t));
        let bound = Rational::new(k.into(), (k - 2).into());
        let coef = edge_coefficients(&t);
        prop_assert!(coef.iter().all(|c| *c <= bound));
        let expanded: Rational = t.nodes.iter().zip(&coef).map(|(n, c)| c * &n.adversary_cost).sum();
        prop_assert_eq!(w.iter().sum::<Rational>(), expanded);
        let levels: Rational = adversary_levels(&t).into_iter().sum();
        prop_assert_eq!(levels, t.nodes.iter().map(|n| n.adversary_cost.clone()).sum::<Rational>());
    }
}

/// Few sites, tight capacity and requests piled near the sites, so greedy
/// fills sites and the trees get internal levels.
fn crowded(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(3..=5);
    let m = rng.gen_range(1..=4);
    let coords: Vec<i64> = (0..m).map(|_| rng.gen_range(-6..=6)).collect();
    let caps: Vec<u64> = (0..m).map(|_| rng.gen_range(1..=3)).collect();
    let n = caps.iter().sum::<u64>() as usize;
    let mut points: Vec<Rational> = coords.iter().map(|&x| q(x)).collect();
    let mut requests = Vec::new();
    for i in 0..n {
        let near = coords[rng.gen_range(0..m)] + rng.gen_range(-2..=2);
        points.push(q(near));
        requests.push(Request { id: i, point: m + i });
    }
    let sites = caps.iter().enumerate().map(|(j, &c)| Site { id: j, point: j, capacity: c }).collect();
    Instance::new(MetricSpace::line(points).unwrap(), sites, k, requests).unwrap()
}

#[test]
fn crowded_instances_pass_with_deep_trees() {
    let mut non_root = 0u64;
    for seed in 0..3000 {
        let inst = crowded(seed);
        for policy in [TieBreak::LowestSiteIndex, TieBreak::HighestSiteIndex] {
            let v = verify_with::<Rational>(&inst, policy, &LemmaOptions::default()).unwrap();
            assert!(v.passed(), "seed {seed}: {:?} {:?}", v.certificate_error, v.report.failures);
            let bound = Rational::new(inst.k().into(), (inst.k() - 2).into());
            assert!(v.greedy.assignment.total_cost <= bound * &v.opt.assignment.total_cost);
            non_root += v.report.tally(Check::EdgeBound).checked - v.report.trees.len() as u64;
        }
    }
    assert!(non_root > 0, "no tree ever had an internal site");
}

#[test]
fn zero_cost_optimum_means_zero_greedy() {
    // Every request on a site: greedy and the optimum both pay nothing.
    let space = MetricSpace::line(vec![q(0), q(3)]).unwrap();
    let sites = vec![Site { id: 0, point: 0, capacity: 2 }, Site { id: 1, point: 1, capacity: 1 }];
    let reqs = vec![Request { id: 0, point: 0 }, Request { id: 1, point: 1 }, Request { id: 2, point: 0 }];
    let inst = Instance::new(space, sites, 3, reqs).unwrap();
    let v = verify_with::<Rational>(&inst, TieBreak::default(), &LemmaOptions::default()).unwrap();
    assert!(v.passed());
    assert!(v.greedy.assignment.total_cost.is_zero());
    // The second request at site 0 shares its online copy but not its adversary copy.
    assert_eq!(v.report.excised_pairs, 2);
}
