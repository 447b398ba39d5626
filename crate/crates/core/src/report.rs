//! Serialized reports: CSV for bulk series, JSON for summaries.
//!
//! Floats in CSV are written with 17 significant digits so that they
//! round-trip exactly. Every JSON report is wrapped in an [`Envelope`]
//! echoing the run configuration, seed, tolerance policy and version.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conjugation::DOrbit;
use crate::density::CoverageReport;
use crate::error::{Error, Result};
use crate::lipschitz::{Counterexample, GraphSample, StarVerdict};
use crate::numerics::{cvec_distance, CPoint, CVec, TolerancePolicy};
use crate::orbit::{Itinerary, OrbitRecord, Target};
use crate::packing::PackingResult;

pub const VERSION: &str = concat!("dol-core ", env!("CARGO_PKG_VERSION"));

/// Formats with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub m: usize,
    pub resolutions: Vec<f64>,
    pub seed: u64,
    pub policy: TolerancePolicy,
    pub input: Option<String>,
    pub out_dir: String,
    /// Subcommand-specific settings, sorted by key.
    pub extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub version: String,
    pub seed: u64,
    pub policy: TolerancePolicy,
    pub config: RunConfig,
    pub passed: bool,
    pub result: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(config: &RunConfig, passed: bool, result: T) -> Self {
        Envelope {
            version: VERSION.to_string(),
            seed: config.seed,
            policy: config.policy,
            config: config.clone(),
            passed,
            result,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn point_header(m: usize) -> Vec<String> {
    let mut h = vec!["n".to_string()];
    for i in 1..=m {
        h.push(format!("re_{i}"));
        h.push(format!("im_{i}"));
    }
    h
}

fn write_point_rows<W: Write>(w: W, points: &[CVec], last: &str, defects: &[f64]) -> Result<()> {
    let m = points.first().map_or(0, Vec::len);
    let mut wr = csv::Writer::from_writer(w);
    let mut header = point_header(m);
    header.push(last.to_string());
    wr.write_record(&header)?;
    for (n, p) in points.iter().enumerate() {
        let mut row = Vec::with_capacity(2 * m + 2);
        row.push(n.to_string());
        for z in p {
            row.push(fmt_f64(z.re));
            row.push(fmt_f64(z.im));
        }
        row.push(defects.get(n).map(|d| fmt_f64(*d)).unwrap_or_default());
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// `n,re_1,im_1,…,re_m,im_m,defect`.
pub fn write_orbit_csv<W: Write>(w: W, orbit: &OrbitRecord) -> Result<()> {
    write_point_rows(w, &orbit.points, "defect", &orbit.shadowing_defects)
}

/// `n,re_1,im_1,…,re_m,im_m,conj_defect`; a missing defect is an empty cell.
pub fn write_dorbit_csv<W: Write>(w: W, orbit: &DOrbit) -> Result<()> {
    write_point_rows(w, &orbit.points, "conj_defect", &orbit.conjugacy_defects)
}

/// Points and trailing defect column of an orbit or pushed-orbit CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTable {
    /// Name of the defect column (`defect` or `conj_defect`).
    pub defect_column: String,
    pub points: Vec<CVec>,
    pub defects: Vec<Option<f64>>,
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse {s:?} as a number")))
}

/// Reads a CSV written by [`write_orbit_csv`] or [`write_dorbit_csv`].
pub fn read_point_csv<R: Read>(r: R) -> Result<PointTable> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    let cols = header.len();
    if cols < 4 || cols % 2 != 0 || &header[0] != "n" {
        return Err(Error::Parse(format!(
            "expected header n,re_1,im_1,…,defect; got {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let m = (cols - 2) / 2;
    if point_header(m)
        .iter()
        .zip(header.iter())
        .any(|(a, b)| a != b)
    {
        return Err(Error::Parse(
            "coordinate columns must be re_i,im_i in order".into(),
        ));
    }
    let mut points = Vec::new();
    let mut defects = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        if rec.len() != cols {
            return Err(Error::Parse(format!("line {line}: expected {cols} fields")));
        }
        let p = (0..m)
            .map(|i| {
                Ok(CPoint::new(
                    parse_f64(&rec[1 + 2 * i], line)?,
                    parse_f64(&rec[2 + 2 * i], line)?,
                ))
            })
            .collect::<Result<CVec>>()?;
        let d = &rec[cols - 1];
        defects.push(if d.trim().is_empty() {
            None
        } else {
            Some(parse_f64(d, line)?)
        });
        points.push(p);
    }
    Ok(PointTable {
        defect_column: header[cols - 1].to_string(),
        points,
        defects,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRow {
    pub target: usize,
    pub level: usize,
    pub radius: f64,
    pub center: Vec<[f64; 2]>,
    pub perturbed: bool,
    pub time: usize,
    pub depth: usize,
    pub spacer: usize,
    pub hit_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub m: usize,
    pub itinerary_length: usize,
    pub orbit_points: usize,
    pub max_shadowing_defect: f64,
    pub eval_error_bound: f64,
    pub targets_hit: usize,
    pub checkpoints: Vec<CheckpointRow>,
}

/// Summary of a built orbit with the hit distance of every checkpoint.
pub fn orbit_summary(orbit: &OrbitRecord, it: &Itinerary, targets: &[Target]) -> OrbitSummary {
    let checkpoints = it
        .checkpoints
        .iter()
        .map(|c| {
            let t = &targets[c.target];
            let hit_distance = orbit
                .points
                .get(c.time)
                .map_or(f64::INFINITY, |p| cvec_distance(p, &t.center));
            CheckpointRow {
                target: c.target,
                level: t.level,
                radius: t.radius,
                center: t.center.iter().map(|z| [z.re, z.im]).collect(),
                perturbed: t.perturbed,
                time: c.time,
                depth: c.depth,
                spacer: c.spacer,
                hit_distance,
            }
        })
        .collect::<Vec<_>>();
    OrbitSummary {
        m: orbit.m(),
        itinerary_length: it.len(),
        orbit_points: orbit.len(),
        max_shadowing_defect: orbit.max_defect(),
        eval_error_bound: orbit.eval_error_bound,
        targets_hit: checkpoints
            .iter()
            .filter(|c| c.hit_distance < c.radius)
            .count(),
        checkpoints,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushSummary {
    pub m: usize,
    pub orbit_points: usize,
    pub max_conjugacy_defect: f64,
    pub conjugacy_rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub epsilon: f64,
    pub cells_total: usize,
    pub cells_hit: usize,
    pub coverage_fraction: f64,
    pub max_first_hit: Option<usize>,
}

impl From<&CoverageReport> for CoverageSummary {
    fn from(r: &CoverageReport) -> Self {
        CoverageSummary {
            epsilon: r.epsilon,
            cells_total: r.cells_total,
            cells_hit: r.cells_hit,
            coverage_fraction: r.coverage_fraction,
            max_first_hit: r.max_first_hit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingSummary {
    pub h: f64,
    pub cube_count: usize,
    pub ball_volume: f64,
    pub v_lower: f64,
    pub v_upper: f64,
    pub bound_ok: bool,
    pub inclusion: String,
}

impl From<&PackingResult> for PackingSummary {
    fn from(r: &PackingResult) -> Self {
        PackingSummary {
            h: r.h,
            cube_count: r.cubes.len(),
            ball_volume: r.total_ball_volume,
            v_lower: r.v_volume_lower,
            v_upper: r.v_volume_upper,
            bound_ok: r.bound_ok(),
            inclusion: r.inclusion.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSummary {
    pub m: usize,
    pub u_volume: f64,
    pub v0: f64,
    pub kappa: f64,
    pub target: f64,
    pub steps_to_99: usize,
    pub steps_estimate: f64,
}

/// `j,v` rows.
pub fn write_growth_csv<W: Write>(w: W, values: &[f64]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["j", "v"])?;
    for (j, v) in values.iter().enumerate() {
        wr.write_record([j.to_string(), fmt_f64(*v)])?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads graph samples `v,z_re_1,z_im_1,…,r`; `m` follows from the column
/// count.
pub fn read_graph_csv<R: Read>(r: R, claimed_c: f64) -> Result<GraphSample> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    let cols = header.len();
    if cols < 2 || cols % 2 != 0 || &header[0] != "v" || &header[cols - 1] != "r" {
        return Err(Error::Parse("expected header v,z_re_1,z_im_1,…,r".into()));
    }
    let m = (cols - 2) / 2 + 1;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        if rec.len() != cols {
            return Err(Error::Parse(format!("line {line}: expected {cols} fields")));
        }
        let row = rec
            .iter()
            .map(|s| parse_f64(s, line))
            .collect::<Result<Vec<_>>>()?;
        values.push(row[cols - 1]);
        points.push(row[..cols - 1].to_vec());
    }
    GraphSample::new(m, points, values, claimed_c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeViolation {
    pub i: usize,
    pub j: usize,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzSummary {
    pub m: usize,
    pub samples: usize,
    pub claimed_c: f64,
    pub estimate: f64,
    pub cone_violations: usize,
    pub first_violation: Option<ConeViolation>,
    pub star: Option<StarVerdict>,
}

impl LipschitzSummary {
    pub fn counterexample(&self) -> Option<&Counterexample> {
        self.star.as_ref().and_then(|s| s.counterexample.as_ref())
    }
}
