//! CSV output: one row per (point, seed) plus per-point aggregates.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::batch::RunRecord;
use crate::metrics::{aggregate, RunStatus};
use crate::preset::{Point, Preset};
use crate::scenario::{Failures, Scenario, WorkloadKind};
use crate::topology::check_capacity;

/// Bumped whenever a column is added, removed or reinterpreted.
pub const SCHEMA_VERSION: u32 = 1;

/// Resolved scenario fields shared by run and aggregate rows.
#[derive(Debug, Clone, Serialize)]
pub struct PointFields {
    pub schema_version: u32,
    pub scenario_hash: String,
    pub preset: String,
    pub point: String,
    pub k: usize,
    pub n_hosts: usize,
    pub link_gbps: f64,
    pub latency_ns: u64,
    pub buffer_bytes: u64,
    pub packet_bytes: u32,
    pub workload: &'static str,
    pub m: u32,
    pub flows_per_host: u32,
    pub message_packets: u32,
    pub lb: &'static str,
    pub subflows: u32,
    pub recovery: String,
    pub rate_coefficient: f64,
    pub failures: String,
    pub pfc: bool,
    /// Empty when the failure model has no static capacity answer.
    pub capacity_sufficient: Option<bool>,
    pub ideal_cct_ns: f64,
}

impl PointFields {
    pub fn new(preset: &str, point: &Point) -> PointFields {
        let sc = &point.scenario;
        let t = &sc.topology;
        PointFields {
            schema_version: SCHEMA_VERSION,
            scenario_hash: sc.fingerprint(),
            preset: preset.to_string(),
            point: point.label.clone(),
            k: t.k,
            n_hosts: t.n_hosts(),
            link_gbps: t.link_gbps,
            latency_ns: t.latency_ns,
            buffer_bytes: t.buffer_bytes,
            packet_bytes: t.packet_bytes,
            workload: match sc.workload.kind {
                WorkloadKind::AllToAll => "all_to_all",
                WorkloadKind::Permutations => "permutations",
            },
            m: match sc.workload.kind {
                WorkloadKind::AllToAll => 0,
                WorkloadKind::Permutations => sc.workload.m,
            },
            flows_per_host: sc.flows_per_host(),
            message_packets: sc.workload.message_packets,
            lb: sc.lb.name(),
            subflows: sc.subflow_count(),
            recovery: sc.recovery.name(),
            rate_coefficient: sc.rate_coefficient,
            failures: sc.failures.describe(),
            pfc: sc.pfc_enabled(),
            capacity_sufficient: capacity_sufficient(sc),
            ideal_cct_ns: sc.ideal_cct().as_ns_f64(),
        }
    }
}

pub fn capacity_sufficient(sc: &Scenario) -> Option<bool> {
    match sc.failures {
        Failures::None => Some(true),
        Failures::Static {
            links_per_pod,
            frac_lost,
        } => Some(check_capacity(sc.topology.k, links_per_pod, frac_lost)),
        Failures::Flaky { .. } => None,
    }
}

#[derive(Debug, Clone)]
pub struct RunRow {
    pub fields: PointFields,
    pub values: RunValues,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunValues {
    pub seed: u64,
    /// `complete`, `time_limit`, `livelock` or `error`.
    pub status: &'static str,
    pub cct_ns: Option<f64>,
    pub normalized_cct: Option<f64>,
    pub worst_flow_drops: Option<u64>,
    pub spurious_retx: Option<u64>,
    pub spurious_dupack: Option<u64>,
    pub retransmits: Option<u64>,
    pub timeouts: Option<u64>,
    pub total_drops: Option<u64>,
    pub wire_drops: Option<u64>,
    pub trims: Option<u64>,
    pub pfc_pauses: Option<u64>,
    pub events: Option<u64>,
    pub conservation_ok: Option<bool>,
    pub runtime_wall_ms: f64,
    pub error: String,
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Complete => "complete",
        RunStatus::TimeLimit => "time_limit",
        RunStatus::Livelock => "livelock",
    }
}

impl RunRow {
    pub fn new(fields: PointFields, rec: &RunRecord) -> RunRow {
        let mut row = RunValues {
            seed: rec.seed,
            status: "error",
            cct_ns: None,
            normalized_cct: None,
            worst_flow_drops: None,
            spurious_retx: None,
            spurious_dupack: None,
            retransmits: None,
            timeouts: None,
            total_drops: None,
            wire_drops: None,
            trims: None,
            pfc_pauses: None,
            events: None,
            conservation_ok: None,
            runtime_wall_ms: rec.wall_ms,
            error: String::new(),
        };
        match &rec.outcome {
            Ok(m) => {
                row.status = status_name(m.status);
                row.cct_ns = Some(m.cct.as_ns_f64());
                row.normalized_cct = Some(m.normalized_cct());
                row.worst_flow_drops = Some(m.worst_hit_flow());
                row.spurious_retx = Some(m.total_spurious());
                row.spurious_dupack = Some(m.spurious_dupack());
                row.retransmits = Some(m.total_retransmits());
                row.timeouts = Some(m.flows.iter().map(|f| f.timeouts).sum());
                row.total_drops = Some(m.network.data_drops);
                row.wire_drops = Some(m.network.wire_drops);
                row.trims = Some(m.network.trims);
                row.pfc_pauses = Some(m.network.pfc_pauses);
                row.events = Some(m.network.events);
                row.conservation_ok = Some(m.conservation_ok());
            }
            Err(e) => row.error = e.clone(),
        }
        RunRow { fields, values: row }
    }
}

/// Mean and SD over the complete runs of one point.
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub fields: PointFields,
    pub values: AggregateValues,
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateValues {
    pub n_runs: usize,
    pub n_complete: usize,
    pub normalized_cct_mean: Option<f64>,
    pub normalized_cct_sd: Option<f64>,
    pub normalized_cct_min: Option<f64>,
    pub normalized_cct_max: Option<f64>,
    pub cct_ns_mean: Option<f64>,
    pub cct_ns_sd: Option<f64>,
    pub worst_flow_drops_mean: Option<f64>,
    pub worst_flow_drops_sd: Option<f64>,
    pub spurious_retx_mean: Option<f64>,
    pub spurious_retx_sd: Option<f64>,
    pub total_drops_mean: Option<f64>,
    pub total_drops_sd: Option<f64>,
    pub trims_mean: Option<f64>,
    pub trims_sd: Option<f64>,
}

fn mean_sd(v: &[f64]) -> (Option<f64>, Option<f64>) {
    if v.is_empty() {
        (None, None)
    } else {
        let a = aggregate(v);
        (Some(a.mean), Some(a.sd))
    }
}

pub fn aggregate_rows(preset: &Preset, records: &[RunRecord]) -> Vec<AggregateRow> {
    let mut by_point: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_point.entry(r.point).or_default().push(r);
    }
    by_point
        .into_iter()
        .map(|(idx, recs)| {
            let done: Vec<_> = recs
                .iter()
                .filter_map(|r| r.outcome.as_ref().ok())
                .filter(|m| m.is_complete())
                .collect();
            let col = |f: &dyn Fn(&crate::metrics::RunMetrics) -> f64| -> Vec<f64> {
                done.iter().map(|m| f(m)).collect()
            };
            let norm = col(&|m| m.normalized_cct());
            let (nm, nsd) = mean_sd(&norm);
            let (cm, csd) = mean_sd(&col(&|m| m.cct.as_ns_f64()));
            let (wm, wsd) = mean_sd(&col(&|m| m.worst_hit_flow() as f64));
            let (sm, ssd) = mean_sd(&col(&|m| m.total_spurious() as f64));
            let (dm, dsd) = mean_sd(&col(&|m| m.network.data_drops as f64));
            let (tm, tsd) = mean_sd(&col(&|m| m.network.trims as f64));
            let values = AggregateValues {
                n_runs: recs.len(),
                n_complete: done.len(),
                normalized_cct_mean: nm,
                normalized_cct_sd: nsd,
                normalized_cct_min: norm.iter().copied().reduce(f64::min),
                normalized_cct_max: norm.iter().copied().reduce(f64::max),
                cct_ns_mean: cm,
                cct_ns_sd: csd,
                worst_flow_drops_mean: wm,
                worst_flow_drops_sd: wsd,
                spurious_retx_mean: sm,
                spurious_retx_sd: ssd,
                total_drops_mean: dm,
                total_drops_sd: dsd,
                trims_mean: tm,
                trims_sd: tsd,
            };
            AggregateRow {
                fields: PointFields::new(&preset.name, &preset.points[idx]),
                values,
            }
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Per-run CSV that is flushed after every row, so an interrupted batch
/// leaves everything finished so far on disk.
pub struct RunWriter {
    path: PathBuf,
    writer: csv::Writer<File>,
    preset: Preset,
}

impl RunWriter {
    pub fn create(path: &Path, preset: &Preset) -> Result<RunWriter, ReportError> {
        let file = File::create(path).map_err(io_err(path))?;
        Ok(RunWriter {
            path: path.to_path_buf(),
            writer: csv::Writer::from_writer(file),
            preset: preset.clone(),
        })
    }

    pub fn append(&mut self, rec: &RunRecord) -> Result<(), ReportError> {
        let row = RunRow::new(PointFields::new(&self.preset.name, &self.preset.points[rec.point]), rec);
        let path = &self.path;
        self.writer.serialize((&row.fields, &row.values)).map_err(|source| ReportError::Csv {
            path: path.clone(),
            source,
        })?;
        self.writer.flush().map_err(io_err(path))
    }
}

/// A row made of the point fields followed by per-row values.
pub trait CsvRow {
    type Values: Serialize;
    fn parts(&self) -> (&PointFields, &Self::Values);
}

impl CsvRow for RunRow {
    type Values = RunValues;
    fn parts(&self) -> (&PointFields, &RunValues) {
        (&self.fields, &self.values)
    }
}

impl CsvRow for AggregateRow {
    type Values = AggregateValues;
    fn parts(&self) -> (&PointFields, &AggregateValues) {
        (&self.fields, &self.values)
    }
}

pub fn write_rows<T: CsvRow>(path: &Path, rows: &[T]) -> Result<(), ReportError> {
    let csv_err = |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r.parts()).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))?;
    w.into_inner()
        .map_err(|e| io_err(path)(e.into_error()))?
        .flush()
        .map_err(io_err(path))
}

/// Paths of the run and aggregate CSVs for `preset` under `dir`.
pub fn output_paths(dir: &Path, preset: &str) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{preset}.csv")),
        dir.join(format!("{preset}_aggregate.csv")),
    )
}

/// Rewrites the run CSV in job order and writes the aggregate CSV.
pub fn finalize(dir: &Path, preset: &Preset, records: &[RunRecord]) -> Result<(), ReportError> {
    let (runs_path, agg_path) = output_paths(dir, &preset.name);
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    let order: BTreeMap<(usize, u64), usize> = crate::batch::jobs(&preset.points)
        .into_iter()
        .enumerate()
        .map(|(i, j)| (j, i))
        .collect();
    sorted.sort_by_key(|r| order.get(&(r.point, r.seed)).copied().unwrap_or(usize::MAX));
    let rows: Vec<RunRow> = sorted
        .iter()
        .map(|r| RunRow::new(PointFields::new(&preset.name, &preset.points[r.point]), r))
        .collect();
    write_rows(&runs_path, &rows)?;
    write_rows(&agg_path, &aggregate_rows(preset, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preset::preset;

    fn records(p: &Preset) -> Vec<RunRecord> {
        vec![
            crate::batch::run_one(&p.points, 0, 2),
            RunRecord {
                point: 0,
                seed: 1,
                outcome: Err("boom".into()),
                wall_ms: 0.0,
            },
        ]
    }

    #[test]
    fn writes_runs_and_aggregates() {
        let mut p = preset("smoke_k4").unwrap().with_seeds(&[1, 2]);
        p.points.truncate(1);
        p.points[0].scenario.workload.message_packets = 20;
        let dir = tempfile::tempdir().unwrap();
        let recs = records(&p);
        finalize(dir.path(), &p, &recs).unwrap();
        let (runs, agg) = output_paths(dir.path(), &p.name);
        let mut r = csv::Reader::from_path(&runs).unwrap();
        let headers = r.headers().unwrap().clone();
        for col in ["schema_version", "scenario_hash", "seed", "cct_ns", "normalized_cct",
            "worst_flow_drops", "spurious_retx", "total_drops", "trims", "runtime_wall_ms"] {
            assert!(headers.iter().any(|h| h == col), "missing {col}");
        }
        let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        let status = headers.iter().position(|h| h == "status").unwrap();
        let seed = headers.iter().position(|h| h == "seed").unwrap();
        // job order, not record order
        assert_eq!(&rows[0][seed], "1");
        assert_eq!(&rows[0][status], "error");
        assert_eq!(&rows[1][status], "complete");
        let mut a = csv::Reader::from_path(&agg).unwrap();
        let h = a.headers().unwrap().clone();
        let rows: Vec<_> = a.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), 1);
        let nc = h.iter().position(|x| x == "n_complete").unwrap();
        assert_eq!(&rows[0][nc], "1");
        let sd = h.iter().position(|x| x == "normalized_cct_sd").unwrap();
        assert_eq!(&rows[0][sd], "0.0");
    }

    #[test]
    fn streaming_writer_flushes_each_row() {
        let mut p = preset("smoke_k4").unwrap().with_seeds(&[1]);
        p.points.truncate(1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("partial.csv");
        let mut w = RunWriter::create(&path, &p).unwrap();
        w.append(&RunRecord {
            point: 0,
            seed: 1,
            outcome: Err("boom".into()),
            wall_ms: 1.0,
        })
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("boom"));
    }
}
