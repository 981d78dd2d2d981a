//! Instance generators: the tight lower-bound family and seeded random instances.

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, InstanceError, Request, Site};
use crate::metric::{MetricSpace, SpaceKind};
use crate::num::Rational;

/// Refuse lower-bound instances with more requests than this.
const MAX_LOWER_BOUND_REQUESTS: u128 = 20_000_000;

/// Random coordinates are multiples of `1 / COORD_GRID` in `[0, 1]`.
const COORD_GRID: i64 = 1_000_000;

/// The tight instance for `GREEDY_k` on the line.
///
/// Site 1 sits at -1 and site `i >= 2` at `2^(i-1) - 1`, with adversary
/// capacity `k^(m-i)`. Batch 1 is `k^(m-1)` requests at 0; batch `i >= 2` is
/// `k^(m-i)` requests on top of site `i`. A positive `epsilon` shifts every
/// request right so greedy's choice of the next site over site 1 is strict.
///
/// Points `0..m` are the sites, points `m..2m` the batch locations.
pub fn gen_lower_bound(k: u32, m: u32, epsilon: &Rational) -> Result<Instance, InstanceError> {
    if k < 3 {
        return Err(InstanceError::Domain(format!("lower-bound family needs k >= 3, got {k}")));
    }
    if m < 1 {
        return Err(InstanceError::Domain("lower-bound family needs m >= 1".into()));
    }
    if epsilon.is_negative() {
        return Err(InstanceError::Domain("epsilon must be nonnegative".into()));
    }
    let capacities: Vec<u128> =
        (1..=m).map(|i| (k as u128).checked_pow(m - i)).collect::<Option<_>>().ok_or_else(too_large)?;
    let total: u128 = capacities.iter().sum();
    if total > MAX_LOWER_BOUND_REQUESTS || m > 100 {
        return Err(too_large());
    }

    let site_coord = |i: u32| -> Rational {
        if i == 1 {
            -Rational::one()
        } else {
            Rational::from_integer((BigInt::one() << (i - 1) as usize) - 1)
        }
    };
    let mut coords: Vec<Rational> = (1..=m).map(site_coord).collect();
    for i in 1..=m {
        let base = if i == 1 { Rational::from_integer(0.into()) } else { site_coord(i) };
        coords.push(base + epsilon);
    }

    let sites = capacities.iter().enumerate().map(|(j, &a)| Site { id: j, point: j, capacity: a as u64 }).collect();
    let mut requests = Vec::with_capacity(total as usize);
    for (batch, &size) in capacities.iter().enumerate() {
        let point = m as usize + batch;
        for _ in 0..size {
            requests.push(Request { id: requests.len(), point });
        }
    }
    Instance::new(MetricSpace::line(coords)?, sites, k, requests)
}

fn too_large() -> InstanceError {
    InstanceError::Domain("lower-bound instance too large".into())
}

/// Closed-form greedy cost on the lower-bound family:
/// `k^(m-1) * (1 + 2/(k-2)) * (1 - (2/k)^m)`.
pub fn lower_bound_greedy_cost(k: u32, m: u32) -> Rational {
    let k = Rational::from_integer(k.into());
    let two = Rational::from_integer(2.into());
    let one = Rational::one();
    let lead = num_traits::pow(k.clone(), (m - 1) as usize);
    let bound = &one + &two / (&k - &two);
    let decay = one - num_traits::pow(two / k, m as usize);
    lead * bound * decay
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomParams {
    pub sites: usize,
    pub requests: usize,
    pub k: u32,
    pub kind: SpaceKind,
    pub capacity_max: u64,
    pub seed: u64,
}

/// Seeded random instance on the unit interval or unit square.
///
/// Capacities are uniform in `[1, capacity_max]`, then raised round-robin
/// (never past `capacity_max`) until they cover the requests. Every site and
/// every request gets its own point.
#[allow(clippy::needless_range_loop)]
pub fn gen_random(p: &RandomParams) -> Result<Instance, InstanceError> {
    if p.sites == 0 {
        return Err(InstanceError::Domain("site_count must be at least 1".into()));
    }
    if p.capacity_max == 0 {
        return Err(InstanceError::Domain("capacity_max must be at least 1".into()));
    }
    if p.k == 0 {
        return Err(InstanceError::Domain("k must be at least 1".into()));
    }
    if (p.sites as u128) * (p.capacity_max as u128) < p.requests as u128 {
        return Err(InstanceError::Domain(format!(
            "cannot repair feasibility: {} sites x capacity {} < {} requests",
            p.sites, p.capacity_max, p.requests
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut caps: Vec<u64> = (0..p.sites).map(|_| rng.gen_range(1..=p.capacity_max)).collect();
    let mut total: u128 = caps.iter().map(|&c| c as u128).sum();
    let mut j = 0;
    while total < p.requests as u128 {
        if caps[j] < p.capacity_max {
            caps[j] += 1;
            total += 1;
        }
        j = (j + 1) % p.sites;
    }

    let coord = |rng: &mut ChaCha8Rng| Rational::new(rng.gen_range(0..=COORD_GRID).into(), COORD_GRID.into());
    let points = p.sites + p.requests;
    let space = match p.kind {
        SpaceKind::Line => MetricSpace::line((0..points).map(|_| coord(&mut rng)).collect())?,
        SpaceKind::Plane => MetricSpace::plane((0..points).map(|_| [coord(&mut rng), coord(&mut rng)]).collect())?,
        SpaceKind::Matrix => {
            // Shortest-path closure of random integer weights is a metric.
            let mut d: Vec<Vec<i64>> = (0..points)
                .map(|a| (0..points).map(|b| if a == b { 0 } else { rng.gen_range(1..=100) }).collect())
                .collect();
            for a in 0..points {
                for b in 0..a {
                    d[a][b] = d[b][a];
                }
            }
            for via in 0..points {
                for a in 0..points {
                    for b in 0..points {
                        d[a][b] = d[a][b].min(d[a][via] + d[via][b]);
                    }
                }
            }
            MetricSpace::matrix(
                d.into_iter().map(|row| row.into_iter().map(|v| Rational::from_integer(v.into())).collect()).collect(),
            )?
        }
    };
    let sites = caps.iter().enumerate().map(|(j, &c)| Site { id: j, point: j, capacity: c }).collect();
    let requests = (0..p.requests).map(|i| Request { id: i, point: p.sites + i }).collect();
    Instance::new(space, sites, p.k, requests)
}
