//! Successive shortest augmenting paths with node potentials.
//!
//! Requests are inserted in arrival order. For each one, Dijkstra runs on
//! reduced costs over the residual network `source -> request -> site -> sink`.
//! A matched request has a single residual in-arc (the reverse of its site
//! arc), so its label is its site's label: the search can run on site nodes
//! only, where the arc `j -> l` costs `min over requests r on j of
//! d(r, l) - d(r, j)`. Requests sharing a point are interchangeable in that
//! minimum, so each site keeps its requests bucketed by point and caches its
//! outgoing arc costs until its set of occupied points changes.

use std::collections::BTreeMap;

use super::{FlowCertificate, OptError};
use crate::instance::{Instance, RequestId, SiteId};
use crate::metric::{Kernel, PointId};
use crate::num::Key;

pub(crate) struct SspResult<K> {
    pub mapping: Vec<SiteId>,
    pub certificate: FlowCertificate<K>,
}

#[derive(Clone, Copy)]
enum Via {
    Request,
    Site(SiteId),
}

pub(crate) fn successive_shortest_paths<K: Key>(inst: &Instance, kernel: &Kernel<K>) -> Result<SspResult<K>, OptError> {
    let m = inst.site_count();
    let n = inst.request_count();
    let sink = m;
    let sites = inst.sites();
    let site_point: Vec<PointId> = sites.iter().map(|s| s.point).collect();
    let cap: Vec<u64> = sites.iter().map(|s| s.capacity).collect();

    let mut assigned: Vec<Option<SiteId>> = vec![None; n];
    let mut load = vec![0u64; m];
    let mut buckets: Vec<BTreeMap<PointId, Vec<RequestId>>> = vec![BTreeMap::new(); m];
    // exchange[j][l]: cheapest d(r, l) - d(r, j) over requests on j, and its point.
    let mut exchange: Vec<Vec<Option<(K, PointId)>>> = vec![vec![None; m]; m];
    let mut stale = vec![false; m];
    let mut pi = vec![K::ZERO; m + 1];

    let mut dist: Vec<Option<K>> = vec![None; m + 1];
    let mut settled = vec![false; m + 1];
    let mut via = vec![Via::Request; m + 1];

    for (r, req) in inst.requests().iter().enumerate() {
        for j in 0..m {
            if stale[j] {
                refresh_row(j, &buckets[j], &site_point, kernel, &mut exchange[j]);
                stale[j] = false;
            }
        }

        // Potential of the new request: makes every first-hop reduced cost nonnegative.
        let to_site: Vec<K> = site_point.iter().map(|&p| kernel.distance(p, req.point)).collect();
        let mut offset = pi[0] - to_site[0];
        for l in 1..m {
            let v = pi[l] - to_site[l];
            if v > offset {
                offset = v;
            }
        }
        for l in 0..m {
            dist[l] = Some((to_site[l] + offset - pi[l]).clamp_nonneg());
            via[l] = Via::Request;
        }
        dist[sink] = None;
        settled.iter_mut().for_each(|s| *s = false);

        loop {
            let mut next: Option<usize> = None;
            for v in 0..=m {
                if settled[v] {
                    continue;
                }
                if let Some(d) = dist[v] {
                    if next.is_none_or(|u| d < dist[u].unwrap()) {
                        next = Some(v);
                    }
                }
            }
            let Some(u) = next else { break };
            settled[u] = true;
            if u == sink {
                break;
            }
            let du = dist[u].unwrap();
            if load[u] < cap[u] {
                let cand = du + (pi[u] - pi[sink]).clamp_nonneg();
                if dist[sink].is_none_or(|d| cand < d) {
                    dist[sink] = Some(cand);
                    via[sink] = Via::Site(u);
                }
            }
            for l in 0..m {
                if l == u || settled[l] {
                    continue;
                }
                if let Some((c, _)) = exchange[u][l] {
                    let cand = du + (c + pi[u] - pi[l]).clamp_nonneg();
                    if dist[l].is_none_or(|d| cand < d) {
                        dist[l] = Some(cand);
                        via[l] = Via::Site(u);
                    }
                }
            }
        }

        let reach = dist[sink].filter(|_| settled[sink]).ok_or(OptError::Infeasible)?;
        for v in 0..=m {
            let step = if settled[v] { dist[v].unwrap() } else { reach };
            pi[v] = pi[v] + step;
        }

        // Path as a site sequence: first site receives `r`, each later site
        // receives a request moved off its predecessor, the last absorbs flow.
        let mut path = Vec::new();
        let mut cur = sink;
        while let Via::Site(j) = via[cur] {
            path.push(j);
            cur = j;
        }
        path.reverse();

        let mut moves: Vec<(RequestId, SiteId)> = vec![(r, path[0])];
        for w in path.windows(2) {
            let (from, to) = (w[0], w[1]);
            let (_, point) = exchange[from][to].expect("path arcs exist");
            let bucket = buckets[from].get_mut(&point).expect("exchange point is occupied");
            let moved = bucket.pop().expect("bucket is nonempty");
            if bucket.is_empty() {
                buckets[from].remove(&point);
                stale[from] = true;
            }
            moves.push((moved, to));
        }
        for (req_id, to) in moves {
            let point = inst.requests()[req_id].point;
            let bucket = buckets[to].entry(point).or_default();
            if bucket.is_empty() {
                stale[to] = true;
            }
            bucket.push(req_id);
            assigned[req_id] = Some(to);
        }
        load[*path.last().unwrap()] += 1;
    }

    let mapping: Vec<SiteId> = assigned.into_iter().map(|s| s.expect("every request is matched")).collect();
    let site_potential = pi[..m].to_vec();
    let request_potential: Vec<K> = mapping
        .iter()
        .zip(inst.requests())
        .map(|(&s, req)| pi[s] - kernel.distance(site_point[s], req.point))
        .collect();
    let mut source = K::ZERO;
    for (i, &p) in request_potential.iter().enumerate() {
        if i == 0 || p < source {
            source = p;
        }
    }
    Ok(SspResult {
        mapping,
        certificate: FlowCertificate { source, requests: request_potential, sites: site_potential, sink: pi[sink] },
    })
}

fn refresh_row<K: Key>(
    j: usize,
    bucket: &BTreeMap<PointId, Vec<RequestId>>,
    site_point: &[PointId],
    kernel: &Kernel<K>,
    row: &mut [Option<(K, PointId)>],
) {
    for (l, slot) in row.iter_mut().enumerate() {
        *slot = None;
        if l == j {
            continue;
        }
        for &p in bucket.keys() {
            let c = kernel.distance(p, site_point[l]) - kernel.distance(p, site_point[j]);
            if slot.is_none_or(|(best, _)| c < best) {
                *slot = Some((c, p));
            }
        }
    }
}
