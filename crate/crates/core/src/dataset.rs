//! Region-grouped time series, their CSV form, and the JSON forms of
//! inferred networks and ground truths.
//!
//! Dataset CSV layout: a header `region,voxel,t1,...,tn` followed by one row
//! per voxel. Rows of the same region need not be contiguous; regions are
//! ordered by first appearance and voxels keep their row order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::atomic_write;

pub const NETWORK_SCHEMA: &str = "corrscreen-net/1";
pub const TRUTH_SCHEMA: &str = "corrscreen-truth/1";

/// Smallest admissible sample count.
pub const MIN_SAMPLES: usize = 5;

/// One region: `p` voxel series of `n` samples each, stored row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTimeSeries {
    pub region_id: String,
    pub voxel_ids: Vec<String>,
    pub values: Array2<f64>,
}

impl RegionTimeSeries {
    /// Wraps a `p x n` matrix, naming voxels `v1..vp`.
    pub fn new(region_id: impl Into<String>, values: Array2<f64>) -> Self {
        let voxel_ids = (1..=values.nrows()).map(|i| format!("v{i}")).collect();
        RegionTimeSeries {
            region_id: region_id.into(),
            voxel_ids,
            values,
        }
    }

    pub fn p(&self) -> usize {
        self.values.nrows()
    }

    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn voxel(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub(crate) fn voxel_location(&self, i: usize) -> String {
        let voxel = self.voxel_ids.get(i).map(String::as_str).unwrap_or("?");
        format!("region {}, voxel {}", self.region_id, voxel)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub regions: Vec<RegionTimeSeries>,
}

impl Dataset {
    /// Builds a dataset and rejects it unless [`validate_dataset`] passes.
    pub fn new(regions: Vec<RegionTimeSeries>) -> Result<Self> {
        let ds = Dataset { regions };
        let report = validate_dataset(&ds);
        if report.ok {
            Ok(ds)
        } else {
            Err(Error::Format(report.summary()))
        }
    }

    /// Shared sample count (taken from the first region).
    pub fn n(&self) -> usize {
        self.regions.first().map(|r| r.n()).unwrap_or(0)
    }

    pub fn region_ids(&self) -> Vec<String> {
        self.regions.iter().map(|r| r.region_id.clone()).collect()
    }

    pub fn region(&self, id: &str) -> Option<&RegionTimeSeries> {
        self.regions.iter().find(|r| r.region_id == id)
    }

    /// All unordered index pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let k = self.regions.len();
        (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSummary {
    pub region_id: String,
    pub p: usize,
    pub n: usize,
    pub constant_voxels: usize,
    pub nonfinite: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub regions: Vec<RegionSummary>,
    /// Shared sample count, when all regions agree.
    pub n: Option<usize>,
    pub mismatched_n: bool,
    pub too_few_samples: bool,
    pub empty_regions: Vec<String>,
    pub duplicate_ids: Vec<String>,
    pub constant_voxels: usize,
    pub nonfinite: usize,
    pub ok: bool,
}

impl ValidationReport {
    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        if self.mismatched_n {
            parts.push("regions have different sample counts".to_string());
        }
        if self.too_few_samples {
            parts.push(format!("fewer than {MIN_SAMPLES} samples"));
        }
        if !self.empty_regions.is_empty() {
            parts.push(format!("empty regions: {}", self.empty_regions.join(",")));
        }
        if !self.duplicate_ids.is_empty() {
            parts.push(format!("duplicate region ids: {}", self.duplicate_ids.join(",")));
        }
        if self.constant_voxels > 0 {
            parts.push(format!("{} constant voxel(s)", self.constant_voxels));
        }
        if self.nonfinite > 0 {
            parts.push(format!("{} non-finite value(s)", self.nonfinite));
        }
        if parts.is_empty() {
            "ok".to_string()
        } else {
            parts.join("; ")
        }
    }
}

fn is_constant(row: ArrayView1<'_, f64>) -> bool {
    let first = row[0];
    row.iter().all(|&v| v == first)
}

pub fn validate_dataset(ds: &Dataset) -> ValidationReport {
    let mut regions = Vec::with_capacity(ds.regions.len());
    let mut seen = HashSet::new();
    let mut duplicate_ids = Vec::new();
    let mut empty_regions = Vec::new();
    let mut constant_total = 0;
    let mut nonfinite_total = 0;

    for r in &ds.regions {
        if !seen.insert(r.region_id.as_str()) {
            duplicate_ids.push(r.region_id.clone());
        }
        if r.p() == 0 {
            empty_regions.push(r.region_id.clone());
        }
        let nonfinite = r.values.iter().filter(|v| !v.is_finite()).count();
        let constant_voxels = if r.n() == 0 {
            0
        } else {
            r.values.rows().into_iter().filter(|row| is_constant(*row)).count()
        };
        constant_total += constant_voxels;
        nonfinite_total += nonfinite;
        regions.push(RegionSummary {
            region_id: r.region_id.clone(),
            p: r.p(),
            n: r.n(),
            constant_voxels,
            nonfinite,
        });
    }

    let ns: HashSet<usize> = ds.regions.iter().map(|r| r.n()).collect();
    let mismatched_n = ns.len() > 1;
    let n = if ns.len() == 1 { ns.into_iter().next() } else { None };
    let too_few_samples = ds.regions.iter().any(|r| r.n() < MIN_SAMPLES);

    let ok = !mismatched_n
        && !too_few_samples
        && duplicate_ids.is_empty()
        && empty_regions.is_empty()
        && constant_total == 0
        && nonfinite_total == 0;

    ValidationReport {
        regions,
        n,
        mismatched_n,
        too_few_samples,
        empty_regions,
        duplicate_ids,
        constant_voxels: constant_total,
        nonfinite: nonfinite_total,
        ok,
    }
}

/// What [`load_dataset`] did besides parsing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub dropped: usize,
    /// `(region, voxel)` keys of dropped constant voxels.
    pub dropped_voxels: Vec<(String, String)>,
}

pub fn load_dataset(path: &Path, drop_constant: bool) -> Result<(Dataset, LoadReport)> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset_csv(&text, drop_constant)
}

pub fn parse_dataset_csv(text: &str, drop_constant: bool) -> Result<(Dataset, LoadReport)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty dataset file".into()))?;
    let header: Vec<&str> = header.split(',').map(str::trim).collect();
    if header.len() < 3 || header[0] != "region" || header[1] != "voxel" {
        return Err(Error::Format(
            "header must start with `region,voxel` followed by sample columns".into(),
        ));
    }
    let n = header.len() - 2;

    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, (Vec<String>, Vec<f64>)> = HashMap::new();
    let mut keys = HashSet::new();
    let mut report = LoadReport::default();

    for (lineno, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(Error::Format(format!(
                "line {lineno}: expected {} fields, found {}",
                header.len(),
                cells.len()
            )));
        }
        let region = cells[0].trim().to_string();
        let voxel = cells[1].trim().to_string();
        if region.is_empty() || voxel.is_empty() {
            return Err(Error::Format(format!("line {lineno}: empty region or voxel id")));
        }
        if !keys.insert((region.clone(), voxel.clone())) {
            return Err(Error::Format(format!(
                "line {lineno}: duplicate key ({region}, {voxel})"
            )));
        }
        let mut values = Vec::with_capacity(n);
        for (col, cell) in cells[2..].iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "line {lineno}, column {}: `{}` is not a number",
                    col + 3,
                    cell.trim()
                ))
            })?;
            values.push(v);
        }
        if values.iter().all(|&v| v == values[0]) {
            if drop_constant {
                report.dropped += 1;
                report.dropped_voxels.push((region, voxel));
                continue;
            }
            return Err(Error::degenerate(format!(
                "region {region}, voxel {voxel} (line {lineno})"
            )));
        }
        let entry = rows.entry(region.clone()).or_insert_with(|| {
            order.push(region.clone());
            (Vec::new(), Vec::new())
        });
        entry.0.push(voxel);
        entry.1.extend(values);
    }

    if report.dropped > 0 {
        log::warn!("dropped {} constant voxel(s)", report.dropped);
    }

    let mut regions = Vec::with_capacity(order.len());
    for id in order {
        let (voxel_ids, flat) = rows.remove(&id).expect("region recorded");
        let p = voxel_ids.len();
        let values = Array2::from_shape_vec((p, n), flat)
            .map_err(|e| Error::Format(format!("region {id}: {e}")))?;
        regions.push(RegionTimeSeries {
            region_id: id,
            voxel_ids,
            values,
        });
    }
    Ok((Dataset::new(regions)?, report))
}

/// Renders the dataset CSV. Values use the shortest representation that
/// parses back to the identical double.
pub fn dataset_to_csv(ds: &Dataset) -> String {
    let n = ds.n();
    let mut out = String::from("region,voxel");
    for t in 1..=n {
        write!(out, ",t{t}").unwrap();
    }
    out.push('\n');
    for r in &ds.regions {
        for (i, row) in r.values.rows().into_iter().enumerate() {
            out.push_str(&r.region_id);
            out.push(',');
            out.push_str(&r.voxel_ids[i]);
            for v in row.iter() {
                write!(out, ",{v:?}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    atomic_write(path, dataset_to_csv(ds).as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub threshold: f64,
    pub exceedance: f64,
    pub detected: bool,
}

/// Inferred region-level graph. Edges are keyed by region ids in dataset
/// order (`a` precedes `b`).
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryNetwork {
    pub region_ids: Vec<String>,
    pub exceedance_level: f64,
    pub edges: Vec<(String, String, EdgeRecord)>,
}

impl BinaryNetwork {
    pub fn detected_count(&self) -> usize {
        self.edges.iter().filter(|e| e.2.detected).count()
    }

    pub fn edge(&self, a: &str, b: &str) -> Option<&EdgeRecord> {
        self.edges
            .iter()
            .find(|(x, y, _)| (x == a && y == b) || (x == b && y == a))
            .map(|e| &e.2)
    }

    /// Edges keyed by the lexicographically sorted id pair.
    pub fn edge_map(&self) -> BTreeMap<(String, String), EdgeRecord> {
        self.edges
            .iter()
            .map(|(a, b, e)| (sorted_pair(a, b), *e))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = NetworkDoc {
            schema: NETWORK_SCHEMA.to_string(),
            exceedance_level: self.exceedance_level,
            regions: self.region_ids.clone(),
            edges: self
                .edges
                .iter()
                .map(|(a, b, e)| NetworkEdgeDoc {
                    a: a.clone(),
                    b: b.clone(),
                    threshold: e.threshold,
                    exceedance: e.exceedance,
                    detected: e.detected,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("network serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        check_schema(&value, NETWORK_SCHEMA)?;
        let doc: NetworkDoc =
            serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
        let known: HashSet<&str> = doc.regions.iter().map(String::as_str).collect();
        let mut edges = Vec::with_capacity(doc.edges.len());
        for e in doc.edges {
            if !known.contains(e.a.as_str()) || !known.contains(e.b.as_str()) || e.a == e.b {
                return Err(Error::Parse(format!("edge ({}, {}) is not a pair of listed regions", e.a, e.b)));
            }
            edges.push((
                e.a,
                e.b,
                EdgeRecord {
                    threshold: e.threshold,
                    exceedance: e.exceedance,
                    detected: e.detected,
                },
            ));
        }
        Ok(BinaryNetwork {
            region_ids: doc.regions,
            exceedance_level: doc.exceedance_level,
            edges,
        })
    }
}

pub fn save_network(net: &BinaryNetwork, path: &Path) -> Result<()> {
    atomic_write(path, net.to_json().as_bytes())
}

pub fn load_network(path: &Path) -> Result<BinaryNetwork> {
    BinaryNetwork::from_json(&std::fs::read_to_string(path)?)
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    schema: String,
    exceedance_level: f64,
    regions: Vec<String>,
    edges: Vec<NetworkEdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct NetworkEdgeDoc {
    a: String,
    b: String,
    threshold: f64,
    exceedance: f64,
    detected: bool,
}

fn check_schema(value: &serde_json::Value, expected: &str) -> Result<()> {
    match value.get("schema") {
        Some(serde_json::Value::String(s)) if s == expected => Ok(()),
        Some(serde_json::Value::String(s)) => Err(Error::Version(s.clone())),
        Some(_) => Err(Error::Parse("`schema` must be a string".into())),
        None => Err(Error::Parse("missing `schema`".into())),
    }
}

pub(crate) fn sorted_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthEdge {
    pub a: String,
    pub b: String,
    pub rho: f64,
}

impl TruthEdge {
    pub fn is_positive(&self) -> bool {
        self.rho != 0.0
    }
}

/// True inter-correlations for every unordered pair of regions; pairs with
/// `rho == 0` are the negatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthNetwork {
    pub region_ids: Vec<String>,
    pub edges: Vec<TruthEdge>,
}

impl GroundTruthNetwork {
    /// Completes `listed` to all pairs of `region_ids` (absent pairs get
    /// `rho = 0`), ordered by region position.
    pub fn new(region_ids: Vec<String>, listed: Vec<TruthEdge>) -> Result<Self> {
        let index: HashMap<&str, usize> = region_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        if index.len() != region_ids.len() {
            return Err(Error::Format("duplicate region id in truth".into()));
        }
        let mut rho = BTreeMap::new();
        for e in listed {
            let (Some(&i), Some(&j)) = (index.get(e.a.as_str()), index.get(e.b.as_str())) else {
                return Err(Error::Format(format!(
                    "truth edge ({}, {}) references an unknown region",
                    e.a, e.b
                )));
            };
            if i == j {
                return Err(Error::Format(format!("truth edge ({}, {}) is a self-loop", e.a, e.b)));
            }
            if !(-1.0..=1.0).contains(&e.rho) {
                return Err(Error::Format(format!("truth rho {} outside [-1, 1]", e.rho)));
            }
            if rho.insert((i.min(j), i.max(j)), e.rho).is_some() {
                return Err(Error::Format(format!("truth edge ({}, {}) listed twice", e.a, e.b)));
            }
        }
        let k = region_ids.len();
        let mut edges = Vec::with_capacity(k * k.saturating_sub(1) / 2);
        for i in 0..k {
            for j in i + 1..k {
                edges.push(TruthEdge {
                    a: region_ids[i].clone(),
                    b: region_ids[j].clone(),
                    rho: rho.get(&(i, j)).copied().unwrap_or(0.0),
                });
            }
        }
        Ok(GroundTruthNetwork { region_ids, edges })
    }

    pub fn positives(&self) -> usize {
        self.edges.iter().filter(|e| e.is_positive()).count()
    }

    pub fn negatives(&self) -> usize {
        self.edges.len() - self.positives()
    }

    pub fn to_json(&self) -> String {
        let doc = TruthDoc {
            schema: TRUTH_SCHEMA.to_string(),
            regions: self.region_ids.clone(),
            edges: self.edges.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("truth serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        check_schema(&value, TRUTH_SCHEMA)?;
        let doc: TruthDoc =
            serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
        GroundTruthNetwork::new(doc.regions, doc.edges)
    }
}

#[derive(Serialize, Deserialize)]
struct TruthDoc {
    schema: String,
    regions: Vec<String>,
    edges: Vec<TruthEdge>,
}

pub fn save_truth(truth: &GroundTruthNetwork, path: &Path) -> Result<()> {
    atomic_write(path, truth.to_json().as_bytes())
}

pub fn load_truth(path: &Path) -> Result<GroundTruthNetwork> {
    GroundTruthNetwork::from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    const WELL_FORMED: &str = "region,voxel,t1,t2,t3,t4,t5\n\
        a,v1,1,2,3,4,5\n\
        a,v2,2,1,4,3,5\n\
        b,v1,1e0,3,2,5,4\n\
        b,v2,0.5,-1.5,2.25,7,1\n";

    #[test]
    fn loads_well_formed_csv() {
        let (ds, report) = parse_dataset_csv(WELL_FORMED, false).unwrap();
        assert_eq!(ds.regions.len(), 2);
        assert_eq!(ds.n(), 5);
        assert_eq!(ds.regions[0].p(), 2);
        assert_eq!(ds.regions[1].p(), 2);
        assert_eq!(ds.regions[1].values[[1, 1]], -1.5);
        assert_eq!(report.dropped, 0);
    }

    #[test]
    fn ragged_row_is_format_error() {
        let text = "region,voxel,t1,t2,t3,t4,t5\na,v1,1,2,3,4\n";
        assert!(matches!(parse_dataset_csv(text, false), Err(Error::Format(_))));
    }

    #[test]
    fn non_numeric_cell_is_parse_error() {
        let text = "region,voxel,t1,t2,t3,t4,t5\na,v1,1,2,x,4,5\n";
        assert!(matches!(parse_dataset_csv(text, false), Err(Error::Parse(_))));
    }

    #[test]
    fn duplicate_key_is_format_error() {
        let text = "region,voxel,t1,t2,t3,t4,t5\na,v1,1,2,3,4,5\na,v1,2,1,3,4,5\n";
        assert!(matches!(parse_dataset_csv(text, false), Err(Error::Format(_))));
    }

    #[test]
    fn constant_voxel_handling() {
        let text = "region,voxel,t1,t2,t3,t4,t5\na,v1,1,2,3,4,5\na,v2,3,3,3,3,3\na,v3,5,1,2,4,3\n";
        assert!(matches!(
            parse_dataset_csv(text, false),
            Err(Error::DegenerateSeries { .. })
        ));
        let (ds, report) = parse_dataset_csv(text, true).unwrap();
        assert_eq!(report.dropped, 1);
        assert_eq!(report.dropped_voxels, vec![("a".to_string(), "v2".to_string())]);
        assert_eq!(ds.regions[0].voxel_ids, vec!["v1", "v3"]);
    }

    #[test]
    fn too_few_samples_rejected() {
        let text = "region,voxel,t1,t2,t3,t4\na,v1,1,2,3,4\n";
        assert!(parse_dataset_csv(text, false).is_err());
    }

    #[test]
    fn validation_reports() {
        let clean = Dataset {
            regions: vec![RegionTimeSeries::new(
                "a",
                array![[1.0, 2.0, 3.0, 4.0, 5.0], [2.0, 1.0, 0.0, 1.0, 2.0]],
            )],
        };
        let r = validate_dataset(&clean);
        assert!(r.ok);
        assert_eq!((r.constant_voxels, r.nonfinite), (0, 0));

        let mut dirty = clean.clone();
        dirty.regions[0].values[[0, 2]] = f64::NAN;
        let r = validate_dataset(&dirty);
        assert!(!r.ok);
        assert_eq!(r.nonfinite, 1);

        let mismatched = Dataset {
            regions: vec![
                RegionTimeSeries::new("a", Array2::from_shape_fn((2, 100), |(i, t)| (i + t * t) as f64)),
                RegionTimeSeries::new("b", Array2::from_shape_fn((2, 99), |(i, t)| (i * t) as f64 + 1.0 / (t as f64 + 1.0))),
            ],
        };
        let r = validate_dataset(&mismatched);
        assert!(!r.ok);
        assert!(r.mismatched_n);
        assert_eq!(r.n, None);
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let values = Array2::from_shape_fn((3, 6), |(i, t)| {
            ((i * 7 + t) as f64).sin() * 1e-3 + std::f64::consts::PI * t as f64
        });
        let ds = Dataset::new(vec![
            RegionTimeSeries::new("left", values.clone()),
            RegionTimeSeries::new("right", values.mapv(|v| -v / 3.0)),
        ])
        .unwrap();
        let (back, _) = parse_dataset_csv(&dataset_to_csv(&ds), false).unwrap();
        assert_eq!(back, ds);
    }

    fn sample_network(edges: usize) -> BinaryNetwork {
        let k = 10;
        let ids: Vec<String> = (1..=k).map(|i| format!("r{i}")).collect();
        let mut list = Vec::new();
        'outer: for i in 0..k {
            for j in i + 1..k {
                if list.len() == edges {
                    break 'outer;
                }
                let exceedance = ((i * 31 + j * 17) % 97) as f64 / 97.0;
                list.push((
                    ids[i].clone(),
                    ids[j].clone(),
                    EdgeRecord {
                        threshold: 0.1 + 1.0 / (3.0 + (i * j) as f64),
                        exceedance,
                        detected: exceedance > 0.05,
                    },
                ));
            }
        }
        BinaryNetwork {
            region_ids: ids,
            exceedance_level: 0.05,
            edges: list,
        }
    }

    #[test]
    fn network_json_roundtrip() {
        for count in [0, 45] {
            let net = sample_network(count);
            assert_eq!(net.edges.len(), count);
            let back = BinaryNetwork::from_json(&net.to_json()).unwrap();
            assert_eq!(back, net);
        }
    }

    #[test]
    fn network_json_errors() {
        let missing = r#"{"schema":"corrscreen-net/1","exceedance_level":0.05,"regions":[]}"#;
        assert!(matches!(BinaryNetwork::from_json(missing), Err(Error::Parse(_))));
        let version = r#"{"schema":"corrscreen-net/9","exceedance_level":0.05,"regions":[],"edges":[]}"#;
        assert!(matches!(BinaryNetwork::from_json(version), Err(Error::Version(_))));
        assert!(matches!(BinaryNetwork::from_json("{not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn truth_completion_and_roundtrip() {
        let ids: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let truth = GroundTruthNetwork::new(
            ids,
            vec![TruthEdge { a: "c".into(), b: "a".into(), rho: 0.2 }],
        )
        .unwrap();
        assert_eq!(truth.edges.len(), 3);
        assert_eq!(truth.positives(), 1);
        assert_eq!(truth.edges[1].rho, 0.2);
        let back = GroundTruthNetwork::from_json(&truth.to_json()).unwrap();
        assert_eq!(back, truth);

        let bad = r#"{"schema":"corrscreen-truth/1","regions":["a"],"edges":[{"a":"a","b":"z","rho":0.1}]}"#;
        assert!(GroundTruthNetwork::from_json(bad).is_err());
    }
}
