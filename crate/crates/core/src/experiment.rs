//! Convergence experiments over an `n` ladder and their markdown reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{self, check_format};
use crate::cutmetric::cut_distance_upper;
use crate::error::{Error, Result};
use crate::homdensity::{hom_density, motif_pattern, t_motif_mc, t_motif_step};
use crate::models::Model;
use crate::multiplex::Multiplex;
use crate::multiplexon::{discretize, AnalyticMultiplexon, Multiplexon, StepMultiplexon, DEFAULT_SUBSAMPLES};
use crate::netstats::{clustering, degree_convergence, limit_clustering, DegreeOptions, Distinctness};
use crate::rng::derive_seed;

pub const EXPERIMENT_FORMAT: &str = "experiment-v1";
pub const SCHEMA_FORMAT: &str = "experiment-schema-v1";
/// First line of every report; the only line that varies between identical runs.
pub const REPORT_HEADER_PREFIX: &str = "# Experiment report";

/// Confidence used for the motif concentration envelope column.
const ENVELOPE_FAILURE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Motif,
    Cutdist,
    Degree,
    Clustering,
}

/// A motif given by file path or inline multiplex document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MotifRef {
    Path(PathBuf),
    Inline(serde_json::Value),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// Strictly decreasing along the ladder.
    Decreasing,
    NonIncreasing,
    /// Every ladder value at most `value`.
    Below,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    #[default]
    Mean,
    Median,
}

/// A pass/fail assertion evaluated on a column's per-`n` statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub column: String,
    pub kind: CheckKind,
    #[serde(default)]
    pub statistic: Statistic,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub format: String,
    pub model: Model,
    #[serde(default)]
    pub motifs: Vec<MotifRef>,
    pub n_ladder: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<PathBuf>,
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub checks: Vec<Check>,
    /// Monte Carlo samples for limits without an exact step form.
    #[serde(default = "default_mc_samples")]
    pub mc_samples: u64,
    /// Annealing budget for cut distances.
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Cells used to discretize limits without an exact step form.
    #[serde(default = "default_cells")]
    pub cells: usize,
}

fn default_mc_samples() -> u64 {
    1 << 16
}

fn default_budget() -> usize {
    200
}

fn default_cells() -> usize {
    32
}

impl ExperimentConfig {
    pub fn new(model: Model, n_ladder: Vec<usize>, replications: usize, seed: u64, metrics: Vec<Metric>) -> Self {
        ExperimentConfig {
            format: EXPERIMENT_FORMAT.into(),
            model,
            motifs: Vec::new(),
            n_ladder,
            replications,
            seed,
            outputs: None,
            metrics,
            checks: Vec::new(),
            mc_samples: default_mc_samples(),
            budget: default_budget(),
            cells: default_cells(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        check_format(&value, EXPERIMENT_FORMAT)?;
        let cfg: ExperimentConfig = serde_json::from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config, resolving relative motif and output paths against its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&codec::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for m in &mut cfg.motifs {
            if let MotifRef::Path(p) = m {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        if let Some(out) = &mut cfg.outputs {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != EXPERIMENT_FORMAT {
            return Err(Error::FormatVersion { expected: EXPERIMENT_FORMAT.into(), found: self.format.clone() });
        }
        if self.n_ladder.is_empty() || self.n_ladder.windows(2).any(|w| w[0] >= w[1]) || self.n_ladder[0] == 0 {
            return Err(Error::InvalidParameter("n ladder must be nonempty, positive and strictly increasing".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter("need at least one replication".into()));
        }
        if self.mc_samples == 0 || self.cells == 0 {
            return Err(Error::InvalidParameter("mc_samples and cells must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    pub values: Vec<Option<f64>>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub model: String,
    /// Metric columns (the fixed `n, replication, seed, status, error` columns come first in CSV).
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
}

fn fixed_columns() -> Vec<Column> {
    [
        ("n", "vertex count of the sampled multiplex"),
        ("replication", "replication index, starting at 0"),
        ("seed", "row seed derived from the master seed, n and replication"),
        ("status", "ok, or error when a metric failed for this row"),
        ("error", "error message for failed rows, empty otherwise"),
    ]
    .into_iter()
    .map(|(n, d)| Column { name: n.into(), description: d.into() })
    .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ResultTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let names: Vec<String> = fixed_columns().into_iter().chain(self.columns.iter().cloned()).map(|c| c.name).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for row in &self.rows {
            let status = if row.error.is_some() { "error" } else { "ok" };
            let mut fields = vec![
                row.n.to_string(),
                row.replication.to_string(),
                row.seed.to_string(),
                status.into(),
                csv_field(row.error.as_deref().unwrap_or("")),
            ];
            fields.extend(row.values.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON sidecar documenting every CSV column.
    pub fn schema_json(&self) -> String {
        let columns: Vec<Column> = fixed_columns().into_iter().chain(self.columns.iter().cloned()).collect();
        let doc = serde_json::json!({ "format": SCHEMA_FORMAT, "model": self.model, "columns": columns });
        serde_json::to_string_pretty(&doc).expect("schema serializes")
    }

    /// Values of a column for one `n`, skipping failed rows.
    pub fn values_at(&self, column: usize, n: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.n == n).filter_map(|r| r.values[column]).collect()
    }

    pub fn ladder(&self) -> Vec<usize> {
        let mut ns: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        ns.dedup();
        ns
    }
}

/// Limit quantities computed once per experiment.
struct Limits {
    step: StepMultiplexon,
    analytic: AnalyticMultiplexon,
    /// Limit densities; failures are reported on every row.
    motifs: Vec<(Multiplex, std::result::Result<f64, String>)>,
    tau1: Option<f64>,
    tau2: Option<f64>,
}

fn load_motif(m: &MotifRef) -> Result<Multiplex> {
    match m {
        MotifRef::Path(p) => codec::read_multiplex(p),
        MotifRef::Inline(v) => codec::multiplex_from_json(&v.to_string()),
    }
}

fn limit_step(w: &AnalyticMultiplexon, cells: usize) -> Result<StepMultiplexon> {
    match w.as_step() {
        Some(s) => Ok(s),
        None => discretize(w, cells, DEFAULT_SUBSAMPLES),
    }
}

fn prepare(cfg: &ExperimentConfig) -> Result<Limits> {
    let analytic = cfg.model.limit()?;
    let step = limit_step(&analytic, cfg.cells)?;
    let exact = analytic.as_step();
    let mut motifs = Vec::new();
    for (i, m) in cfg.motifs.iter().enumerate() {
        let h = load_motif(m)?;
        let p = motif_pattern(&h);
        let t = match &exact {
            Some(s) => t_motif_step(&p, s),
            None => t_motif_mc(&p, &analytic, cfg.mc_samples, derive_seed(cfg.seed, &[u64::MAX, i as u64])),
        };
        motifs.push((h, t.map(|d| d.value).map_err(|e| e.to_string())));
    }
    let wants_clustering = cfg.metrics.contains(&Metric::Clustering);
    let tau = |variant: u8| -> Result<Option<f64>> {
        if !wants_clustering || analytic.r() < variant as usize + 1 {
            return Ok(None);
        }
        let seed = derive_seed(cfg.seed, &[u64::MAX - 1, variant as u64]);
        Ok(Some(limit_clustering(&analytic, variant, Distinctness::Pairwise, cfg.mc_samples, seed)?.global))
    };
    let (tau1, tau2) = (tau(1)?, tau(2)?);
    Ok(Limits { step, analytic, motifs, tau1, tau2 })
}

fn columns(cfg: &ExperimentConfig, limits: &Limits) -> Vec<Column> {
    let mut cols = Vec::new();
    let mut push = |name: String, description: String| cols.push(Column { name, description });
    let mut metrics = cfg.metrics.clone();
    metrics.sort();
    metrics.dedup();
    for m in metrics {
        match m {
            Metric::Motif => {
                for (i, (h, _)) in limits.motifs.iter().enumerate() {
                    push(format!("motif{i}_t"), format!("homomorphism density of motif {i} in the sample"));
                    push(format!("motif{i}_limit"), format!("density of motif {i} in the limit multiplexon"));
                    push(format!("motif{i}_abs_err"), format!("absolute gap between motif{i}_t and motif{i}_limit"));
                    push(
                        format!("motif{i}_envelope"),
                        format!(
                            "deviation exceeded with probability at most {ENVELOPE_FAILURE} by the concentration bound 2exp(-eps^2 n / (8 v)), v = {}",
                            h.n()
                        ),
                    );
                }
            }
            Metric::Cutdist => {
                push("cutdist_upper".into(), "upper estimate of the cut distance between the empirical and the limit multiplexon (an estimate from above, never the true distance)".into());
                push("cutdist_envelope".into(), "sampling envelope 32 R^(3/2) / sqrt(ln n), R = 2^r".into());
            }
            Metric::Degree => {
                push("degree_wass".into(), "1-Wasserstein distance (L1 ground metric) between the joint degree distribution and the limit degree law".into());
                push("degree_bound".into(), "2 R times the cut-distance upper estimate".into());
                push("degree_discretization".into(), "discretization error of the limit degree law".into());
            }
            Metric::Clustering => {
                if limits.tau1.is_some() {
                    push("clustering_tau1".into(), "global two-layer clustering coefficient of the sample".into());
                    push("clustering_tau1_limit".into(), "limit of the global two-layer clustering coefficient".into());
                }
                if limits.tau2.is_some() {
                    push("clustering_tau2".into(), "global three-layer clustering coefficient of the sample".into());
                    push("clustering_tau2_limit".into(), "limit of the global three-layer clustering coefficient".into());
                }
            }
        }
    }
    cols
}

fn row_values(cfg: &ExperimentConfig, limits: &Limits, cols: &[Column], n: usize, seed: u64) -> Result<Vec<Option<f64>>> {
    let g = cfg.model.sample(n, seed)?.multiplex;
    let r = g.r() as f64;
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    let wants = |m: Metric| cfg.metrics.contains(&m);
    if wants(Metric::Motif) {
        for (i, (h, limit)) in limits.motifs.iter().enumerate() {
            let Ok(limit) = limit else { continue };
            let t = hom_density(h, &g)?.t;
            out.insert(format!("motif{i}_t"), t);
            out.insert(format!("motif{i}_limit"), *limit);
            out.insert(format!("motif{i}_abs_err"), (t - limit).abs());
            let eps = (8.0 * h.n() as f64 * (2.0 / ENVELOPE_FAILURE).ln() / n as f64).sqrt();
            out.insert(format!("motif{i}_envelope"), eps);
        }
    }
    if wants(Metric::Cutdist) {
        let d = cut_distance_upper(&StepMultiplexon::empirical(&g), &limits.step, cfg.budget, seed)?;
        out.insert("cutdist_upper".into(), d.upper_bound);
        let envelope = if n > 1 { 32.0 * 2f64.powf(1.5 * r) / (n as f64).ln().sqrt() } else { f64::INFINITY };
        out.insert("cutdist_envelope".into(), envelope);
    }
    if wants(Metric::Degree) {
        let opts = DegreeOptions { cells: cfg.cells, budget: cfg.budget, seed };
        let c = degree_convergence(&g, &limits.analytic, &opts)?;
        out.insert("degree_wass".into(), c.wass);
        out.insert("degree_bound".into(), c.bound);
        out.insert("degree_discretization".into(), c.discretization_error);
    }
    if wants(Metric::Clustering) {
        for (variant, limit) in [(1u8, limits.tau1), (2, limits.tau2)] {
            if let Some(l) = limit {
                out.insert(format!("clustering_tau{variant}"), clustering(&g, variant)?.global);
                out.insert(format!("clustering_tau{variant}_limit"), l);
            }
        }
    }
    Ok(cols.iter().map(|c| out.get(&c.name).copied()).collect())
}

/// Runs every `(n, replication)` row. Failed rows carry their error and the run continues.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let limits = prepare(cfg)?;
    let cols = columns(cfg, &limits);
    let jobs: Vec<(usize, usize)> = cfg.n_ladder.iter().flat_map(|&n| (0..cfg.replications).map(move |rep| (n, rep))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, replication)| {
            let seed = derive_seed(cfg.seed, &[n as u64, replication as u64]);
            let limit_failure = limits.motifs.iter().enumerate().find_map(|(i, (_, t))| {
                t.as_ref().err().filter(|_| cfg.metrics.contains(&Metric::Motif)).map(|e| format!("limit of motif {i}: {e}"))
            });
            if let Some(error) = limit_failure {
                return Row { n, replication, seed, values: vec![None; cols.len()], error: Some(error) };
            }
            match row_values(cfg, &limits, &cols, n, seed) {
                Ok(values) => Row { n, replication, seed, values, error: None },
                Err(e) => Row { n, replication, seed, values: vec![None; cols.len()], error: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(ResultTable { model: cfg.model.name().into(), columns: cols, rows, checks: cfg.checks.clone() })
}

/// Writes `results.csv`, `results.schema.json` and `report.md` into `dir`.
pub fn write_outputs(table: &ResultTable, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("results.csv"), table.to_csv())?;
    std::fs::write(dir.join("results.schema.json"), table.schema_json())?;
    std::fs::write(dir.join("report.md"), emit_report(table)?)?;
    Ok(())
}

fn statistic(values: &[f64], stat: Statistic) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some(match stat {
        Statistic::Mean => values.iter().sum::<f64>() / values.len() as f64,
        Statistic::Median => median(values),
    })
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Outcome of one configured check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub check: Check,
    pub pass: bool,
    pub detail: String,
}

pub fn evaluate_checks(table: &ResultTable) -> Vec<CheckOutcome> {
    table
        .checks
        .iter()
        .map(|c| {
            let Some(col) = table.column_index(&c.column) else {
                return CheckOutcome { check: c.clone(), pass: false, detail: format!("unknown column {}", c.column) };
            };
            let series: Vec<Option<f64>> = table.ladder().iter().map(|&n| statistic(&table.values_at(col, n), c.statistic)).collect();
            if series.iter().any(Option::is_none) {
                return CheckOutcome { check: c.clone(), pass: false, detail: "missing values for some n".into() };
            }
            let s: Vec<f64> = series.into_iter().flatten().collect();
            let pass = match c.kind {
                CheckKind::Decreasing => s.windows(2).all(|w| w[1] < w[0]),
                CheckKind::NonIncreasing => s.windows(2).all(|w| w[1] <= w[0]),
                CheckKind::Below => c.value.is_some_and(|v| s.iter().all(|&x| x <= v)),
            };
            let shown: Vec<String> = s.iter().map(|x| format!("{x:.6}")).collect();
            CheckOutcome { check: c.clone(), pass, detail: shown.join(", ") }
        })
        .collect()
}

/// Everything in the report except the header line.
pub fn report_body(table: &ResultTable) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::InvalidParameter("cannot report on an empty table".into()));
    }
    let failed: Vec<&Row> = table.rows.iter().filter(|r| r.error.is_some()).collect();
    let status = if failed.is_empty() { "ok" } else { "partial" };
    let mut out = String::new();
    writeln!(out, "Model: `{}`. Rows: {}. Status: **{status}**.", table.model, table.rows.len()).unwrap();
    let ladder = table.ladder();
    for (ci, col) in table.columns.iter().enumerate() {
        writeln!(out, "\n## {}\n\n{}\n", col.name, col.description).unwrap();
        writeln!(out, "| n | rows | mean | median | min | max |").unwrap();
        writeln!(out, "|---|---|---|---|---|---|").unwrap();
        for &n in &ladder {
            let v = table.values_at(ci, n);
            if v.is_empty() {
                writeln!(out, "| {n} | 0 | - | - | - | - |").unwrap();
                continue;
            }
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            writeln!(out, "| {n} | {} | {mean:.6} | {:.6} | {min:.6} | {max:.6} |", v.len(), median(&v)).unwrap();
        }
    }
    let outcomes = evaluate_checks(table);
    if !outcomes.is_empty() {
        writeln!(out, "\n## Checks\n").unwrap();
        for o in outcomes {
            let verdict = if o.pass { "PASS" } else { "FAIL" };
            writeln!(out, "- {verdict}: {} {:?} ({:?}): {}", o.check.column, o.check.kind, o.check.statistic, o.detail).unwrap();
        }
    }
    if !failed.is_empty() {
        writeln!(out, "\n## Failed rows\n").unwrap();
        for r in failed {
            writeln!(out, "- n = {}, replication = {}: {}", r.n, r.replication, r.error.as_deref().unwrap_or("")).unwrap();
        }
    }
    Ok(out)
}

/// Markdown summary; the first line carries the generation time.
pub fn emit_report(table: &ResultTable) -> Result<String> {
    let body = report_body(table)?;
    let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Ok(format!("{REPORT_HEADER_PREFIX} (generated at unix time {secs})\n\n{body}"))
}
