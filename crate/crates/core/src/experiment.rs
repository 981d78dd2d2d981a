//! Experiment sweeps: the lower-bound family over a range of `m`, and seeded
//! random campaigns evaluated in parallel.

use std::ops::RangeInclusive;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{LemmaOptions, Tally};
use crate::greedy::TieBreak;
use crate::instance::{gen_lower_bound, gen_random, lower_bound_greedy_cost, InstanceError, RandomParams, SiteId};
use crate::metric::SpaceKind;
use crate::num::{Number, Rational};
use crate::pipeline::{verify_instance, Outcome, PipelineError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid range: {0}")]
    Range(String),
    #[error("instance {instance} (seed {seed}): {source}")]
    Instance { instance: usize, seed: u64, source: PipelineError },
    #[error(transparent)]
    Generate(#[from] InstanceError),
    #[error("lower bound k={k} m={m}: simulated {what} {found}, closed form {expected}")]
    ClosedForm { k: u32, m: u32, what: &'static str, found: String, expected: String },
    #[error("thread pool: {0}")]
    Threads(String),
}

/// One CSV line of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub instance_id: usize,
    pub k: u32,
    pub m_or_seed: u64,
    pub greedy_cost: Number,
    pub opt_cost: Number,
    /// Absent when the optimum is zero.
    pub ratio: Option<Number>,
    pub bound: Number,
    pub lemma_pass: bool,
}

impl ExperimentRow {
    pub const HEADER: [&'static str; 8] =
        ["instance_id", "k", "m_or_seed", "greedy_cost", "opt_cost", "ratio", "bound", "lemma_pass"];

    pub fn record(&self, exact: bool) -> [String; 8] {
        [
            self.instance_id.to_string(),
            self.k.to_string(),
            self.m_or_seed.to_string(),
            self.greedy_cost.render(exact),
            self.opt_cost.render(exact),
            self.ratio.as_ref().map_or(String::new(), |r| r.render(exact)),
            self.bound.render(exact),
            self.lemma_pass.to_string(),
        ]
    }

    fn from_outcome(instance_id: usize, m_or_seed: u64, out: &Outcome) -> Self {
        ExperimentRow {
            instance_id,
            k: out.k(),
            m_or_seed,
            greedy_cost: out.greedy_cost(),
            opt_cost: out.opt_cost(),
            ratio: out.ratio(),
            bound: out.bound(),
            lemma_pass: out.passed(),
        }
    }
}

/// Runs the lower-bound family for every `m` in `ms`. With `epsilon = 0`
/// and highest-index ties the simulated costs must equal the closed forms;
/// a mismatch is an error.
pub fn lower_bound_rows(
    k: u32,
    ms: RangeInclusive<u32>,
    policy: TieBreak,
    epsilon: &Rational,
) -> Result<Vec<ExperimentRow>, ExperimentError> {
    if ms.is_empty() || *ms.start() == 0 {
        return Err(ExperimentError::Range(format!(
            "m range {}..{} must be nonempty and start at 1",
            ms.start(),
            ms.end()
        )));
    }
    let checked = policy == TieBreak::HighestSiteIndex && num_traits::Zero::is_zero(epsilon);
    let mut rows = Vec::new();
    for (id, m) in ms.enumerate() {
        let inst = gen_lower_bound(k, m, epsilon)?;
        let out = verify_instance(&inst, policy, &LemmaOptions::default())
            .map_err(|source| ExperimentError::Instance { instance: id, seed: m as u64, source })?;
        if checked {
            let expect_greedy = Number::Exact(lower_bound_greedy_cost(k, m));
            let expect_opt =
                Number::Exact(Rational::from_integer(num_traits::pow(num_bigint::BigInt::from(k), (m - 1) as usize)));
            for (what, found, expected) in
                [("greedy", out.greedy_cost(), expect_greedy), ("opt", out.opt_cost(), expect_opt)]
            {
                if found != expected {
                    return Err(ExperimentError::ClosedForm {
                        k,
                        m,
                        what,
                        found: found.render(true),
                        expected: expected.render(true),
                    });
                }
            }
        }
        rows.push(ExperimentRow::from_outcome(id, m as u64, &out));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignParams {
    /// Instances per value of `k`.
    pub per_k: usize,
    pub ks: Vec<u32>,
    pub max_sites: usize,
    pub max_requests: usize,
    pub capacity_max: u64,
    /// Cycled through within each `k`.
    pub kinds: Vec<SpaceKind>,
    pub master_seed: u64,
    pub threads: usize,
    pub policy: TieBreak,
}

impl Default for CampaignParams {
    fn default() -> Self {
        CampaignParams {
            per_k: 500,
            ks: vec![3, 4, 5],
            max_sites: 50,
            max_requests: 200,
            capacity_max: 5,
            kinds: vec![SpaceKind::Line, SpaceKind::Plane],
            master_seed: 1,
            threads: 1,
            policy: TieBreak::default(),
        }
    }
}

/// A campaign row plus what is needed to replay it.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub row: ExperimentRow,
    pub params: RandomParams,
    pub greedy_mapping: Vec<SiteId>,
    pub tallies: [Tally; 9],
    pub failures: Vec<String>,
}

/// Seed of the `index`-th campaign instance.
pub fn derive_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// Generator parameters of the `index`-th campaign instance.
pub fn campaign_instance(p: &CampaignParams, index: usize) -> RandomParams {
    let seed = derive_seed(p.master_seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sites = rng.gen_range(1..=p.max_sites);
    let requests = rng.gen_range(0..=p.max_requests.min(sites * p.capacity_max as usize));
    RandomParams {
        sites,
        requests,
        k: p.ks[index / p.per_k],
        kind: p.kinds[(index % p.per_k) % p.kinds.len()],
        capacity_max: p.capacity_max,
        seed,
    }
}

/// Verifies `per_k * ks.len()` random instances on `threads` workers. Rows
/// come back in instance order whatever the thread count.
pub fn run_campaign(p: &CampaignParams) -> Result<Vec<CampaignResult>, ExperimentError> {
    if p.per_k == 0 || p.ks.is_empty() || p.kinds.is_empty() || p.max_sites == 0 || p.capacity_max == 0 {
        return Err(ExperimentError::Range("campaign needs instances, k values, kinds, sites and capacity".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(p.threads.max(1))
        .build()
        .map_err(|e| ExperimentError::Threads(e.to_string()))?;
    let total = p.per_k * p.ks.len();
    pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(|i| {
                let params = campaign_instance(p, i);
                let fail = |source: PipelineError| ExperimentError::Instance { instance: i, seed: params.seed, source };
                let inst = gen_random(&params).map_err(|e| fail(e.into()))?;
                let out = verify_instance(&inst, p.policy, &LemmaOptions::default()).map_err(fail)?;
                Ok(CampaignResult {
                    row: ExperimentRow::from_outcome(i, params.seed, &out),
                    params,
                    greedy_mapping: out.greedy_mapping().to_vec(),
                    tallies: out.tallies(),
                    failures: out.failure_lines(),
                })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero() -> Rational {
        Rational::from_integer(0.into())
    }

    #[test]
    fn lower_bound_ratios_for_k3() {
        let rows = lower_bound_rows(3, 1..=6, TieBreak::HighestSiteIndex, &zero()).unwrap();
        let ratios: Vec<String> = rows.iter().map(|r| r.ratio.as_ref().unwrap().render(true)).collect();
        assert_eq!(ratios, ["1", "5/3", "19/9", "65/27", "211/81", "665/243"]);
        assert!(rows.iter().all(|r| r.lemma_pass));
        assert_eq!(rows[1].record(true), ["1", "3", "2", "5", "3", "5/3", "3", "true"].map(String::from));
    }

    #[test]
    fn lowest_ties_are_not_held_to_the_closed_form() {
        let rows = lower_bound_rows(3, 2..=2, TieBreak::LowestSiteIndex, &zero()).unwrap();
        assert_eq!(rows[0].greedy_cost.render(true), "3");
    }

    #[test]
    fn empty_range_is_rejected() {
        #[allow(clippy::reversed_empty_ranges)]
        let r = lower_bound_rows(3, 4..=2, TieBreak::HighestSiteIndex, &zero());
        assert!(matches!(r, Err(ExperimentError::Range(_))));
    }

    #[test]
    fn seeds_follow_the_counter() {
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
        assert_ne!(derive_seed(7, 3), derive_seed(7, 4));
        assert_ne!(derive_seed(7, 3), derive_seed(8, 3));
    }

    #[test]
    fn small_campaign_passes() {
        let p = CampaignParams { per_k: 4, max_sites: 6, max_requests: 12, ..Default::default() };
        let results = run_campaign(&p).unwrap();
        assert_eq!(results.len(), 12);
        assert_eq!(results.iter().map(|r| r.row.instance_id).collect::<Vec<_>>(), (0..12).collect::<Vec<_>>());
        assert_eq!(results[4].row.k, 4);
        for r in &results {
            assert!(r.row.lemma_pass, "{:?}", r.failures);
        }
    }
}
