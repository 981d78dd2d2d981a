//! Versioned JSON instance documents.
//!
//! Numbers that carry coordinates or distances are decimal strings so that
//! documents round-trip exactly. The canonical form is pretty-printed JSON
//! with two-space indentation and a trailing newline.

use serde::{Deserialize, Serialize};

use super::{Instance, InstanceError, Request, Site};
use crate::metric::MetricSpace;
use crate::num::{format_decimal, parse_decimal, Rational};

pub const FORMAT_VERSION: &str = "otp-1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    version: String,
    metric: MetricDoc,
    k: u32,
    sites: Vec<SiteDoc>,
    requests: Vec<RequestDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum MetricDoc {
    Line { coordinates: Vec<String> },
    Plane { coordinates: Vec<[String; 2]> },
    Matrix { distances: Vec<Vec<String>> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteDoc {
    id: usize,
    point: usize,
    capacity: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequestDoc {
    id: usize,
    point: usize,
}

fn decimal(text: &str, field: impl FnOnce() -> String) -> Result<Rational, InstanceError> {
    parse_decimal(text).ok_or_else(|| InstanceError::field(field(), format!("`{text}` is not a decimal literal")))
}

fn render(v: &Rational) -> String {
    format_decimal(v).expect("metric values are decimal literals")
}

pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| InstanceError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.version != FORMAT_VERSION {
        return Err(InstanceError::field(
            "version",
            format!("unsupported version `{}` (expected `{FORMAT_VERSION}`)", doc.version),
        ));
    }
    let space = match &doc.metric {
        MetricDoc::Line { coordinates } => MetricSpace::line(
            coordinates
                .iter()
                .enumerate()
                .map(|(i, c)| decimal(c, || format!("metric.coordinates[{i}]")))
                .collect::<Result<_, _>>()?,
        )?,
        MetricDoc::Plane { coordinates } => MetricSpace::plane(
            coordinates
                .iter()
                .enumerate()
                .map(|(i, [x, y])| {
                    Ok([
                        decimal(x, || format!("metric.coordinates[{i}][0]"))?,
                        decimal(y, || format!("metric.coordinates[{i}][1]"))?,
                    ])
                })
                .collect::<Result<_, InstanceError>>()?,
        )?,
        MetricDoc::Matrix { distances } => MetricSpace::matrix(
            distances
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, v)| decimal(v, || format!("metric.distances[{i}][{j}]")))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<_, _>>()?,
        )?,
    };
    let sites = doc.sites.iter().map(|s| Site { id: s.id, point: s.point, capacity: s.capacity }).collect();
    let requests = doc.requests.iter().map(|r| Request { id: r.id, point: r.point }).collect();
    Instance::new(space, sites, doc.k, requests)
}

pub fn serialize_instance(inst: &Instance) -> String {
    let metric = match inst.space() {
        MetricSpace::Line(c) => MetricDoc::Line { coordinates: c.iter().map(render).collect() },
        MetricSpace::Plane(c) => {
            MetricDoc::Plane { coordinates: c.iter().map(|[x, y]| [render(x), render(y)]).collect() }
        }
        MetricSpace::Matrix(d) => {
            MetricDoc::Matrix { distances: d.iter().map(|row| row.iter().map(render).collect()).collect() }
        }
    };
    let doc = Document {
        version: FORMAT_VERSION.to_string(),
        metric,
        k: inst.k(),
        sites: inst.sites().iter().map(|s| SiteDoc { id: s.id, point: s.point, capacity: s.capacity }).collect(),
        requests: inst.requests().iter().map(|r| RequestDoc { id: r.id, point: r.point }).collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("instance documents always serialize");
    out.push('\n');
    out
}
