use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use multiplexon::codec::{self, MULTIPLEX_FORMAT, STEP_FORMAT};
use multiplexon::cutmetric::{cut_distance_upper, layered_cut_norm, sandwich_check, CutMode};
use multiplexon::experiment::{emit_report, run_experiment, write_outputs, ExperimentConfig};
use multiplexon::homdensity::{hom_density, motif_pattern, t_motif_mc, t_motif_step};
use multiplexon::models::ModelDescriptor;
use multiplexon::multiplexon::{discretize, step_degree_profile, DEFAULT_SUBSAMPLES};
use multiplexon::netstats::{
    clustering_with, degree_convergence, joint_degrees, limit_clustering, DegreeOptions, Distinctness,
    DEFAULT_LIMIT_SAMPLES,
};
use multiplexon::{AnalyticMultiplexon, Error, Mode, Multiplex, Multiplexon, StepMultiplexon, Subset};

/// Dense multiplex network limits: sampling, densities, cut norms and statistics.
#[derive(Parser)]
#[command(name = "mplx", version)]
struct Cli {
    /// Seed for every random choice (overrides descriptor seeds).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for output files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Cumulative,
    Disjoint,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Cumulative => Mode::Cumulative,
            ModeArg::Disjoint => Mode::Disjoint,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TextFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stat {
    Degrees,
    Clustering,
    Convergence,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a multiplex from a model descriptor.
    Sample {
        model: PathBuf,
        #[arg(short)]
        n: Option<usize>,
    },
    /// Print the disjoint or cumulative decomposition of a multiplex.
    Decompose {
        multiplex: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Cumulative)]
        mode: ModeArg,
    },
    /// Homomorphism density of a pattern in a multiplex, step multiplexon or model limit.
    Homdensity {
        pattern: PathBuf,
        /// Multiplex, step multiplexon or model descriptor file.
        target: PathBuf,
        /// Monte Carlo samples for limits without a step form.
        #[arg(long, default_value_t = 1 << 20)]
        samples: u64,
    },
    /// Layered cut norm of the difference of two step multiplexons, multiplexes or model limits.
    Cutnorm {
        u: PathBuf,
        w: PathBuf,
        /// Force exact enumeration (at most 20 cells).
        #[arg(long, conflicts_with = "heuristic")]
        exact: bool,
        #[arg(long)]
        heuristic: bool,
        /// Also check the decomposition sandwich inequalities.
        #[arg(long)]
        sandwich: bool,
    },
    /// Upper estimate of the cut distance.
    Cutdist {
        u: PathBuf,
        w: PathBuf,
        #[arg(long, default_value_t = 200)]
        budget: usize,
    },
    /// Degree and clustering statistics of a multiplex.
    Stats {
        multiplex: PathBuf,
        #[arg(long, value_enum, default_value_t = Stat::Degrees)]
        stat: Stat,
        /// Clustering variant (1 or 2).
        #[arg(long, default_value_t = 1)]
        variant: u8,
        /// Require only consecutive layer indices to differ in variant 2.
        #[arg(long)]
        chain: bool,
        /// Limit (step multiplexon or model descriptor) for `convergence`.
        #[arg(long)]
        limit: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        cells: usize,
        #[arg(long, default_value_t = 200)]
        budget: usize,
    },
    /// Limit multiplexon of a model, with optional degree and clustering summaries.
    Limit {
        model: PathBuf,
        /// Cells for discretizing limits without an exact step form.
        #[arg(long, default_value_t = 32)]
        cells: usize,
        /// Report limit degrees instead of the multiplexon.
        #[arg(long)]
        degrees: bool,
        /// Report the limit clustering coefficient of this variant.
        #[arg(long)]
        clustering: Option<u8>,
        #[arg(long)]
        chain: bool,
        #[arg(long, default_value_t = DEFAULT_LIMIT_SAMPLES)]
        samples: u64,
    },
    /// Run a convergence experiment from a config file.
    Experiment { config: PathBuf },
    /// Convert a multiplex between JSON and text formats.
    Convert {
        input: PathBuf,
        #[arg(long, value_enum)]
        to: TextFormat,
    },
}

type Res<T> = Result<T, Error>;

/// A file holding a multiplex, a step multiplexon or a model descriptor.
enum Loaded {
    Multiplex(Multiplex),
    Step(StepMultiplexon),
    Model(ModelDescriptor),
}

fn load(path: &Path) -> Res<Loaded> {
    let text = codec::read_to_string(path)?;
    if !text.trim_start().starts_with('{') {
        return Ok(Loaded::Multiplex(codec::multiplex_from_text(&text)?));
    }
    let value: serde_json::Value = serde_json::from_str(&text)?;
    match value.get("format").and_then(|f| f.as_str()) {
        Some(MULTIPLEX_FORMAT) => Ok(Loaded::Multiplex(codec::multiplex_from_json(&text)?)),
        Some(STEP_FORMAT) => Ok(Loaded::Step(codec::step_from_json(&text)?)),
        Some(other) => Err(Error::FormatVersion { expected: format!("{MULTIPLEX_FORMAT} or {STEP_FORMAT}"), found: other.into() }),
        None if value.get("model").is_some() => Ok(Loaded::Model(serde_json::from_value(value)?)),
        None => Err(Error::Malformed(format!("{}: no \"format\" or \"model\" field", path.display()))),
    }
}

/// Cells used when a model limit without a step form must be discretized.
const LIMIT_CELLS: usize = 32;

fn load_step(path: &Path) -> Res<StepMultiplexon> {
    match load(path)? {
        Loaded::Multiplex(g) => Ok(StepMultiplexon::empirical(&g)),
        Loaded::Step(w) => Ok(w),
        Loaded::Model(d) => {
            let w = d.model.limit()?;
            match w.as_step() {
                Some(s) => Ok(s),
                None => discretize(&w, LIMIT_CELLS, DEFAULT_SUBSAMPLES),
            }
        }
    }
}

fn load_multiplex(path: &Path) -> Res<Multiplex> {
    match load(path)? {
        Loaded::Multiplex(g) => Ok(g),
        _ => Err(Error::InvalidParameter(format!("{}: expected a multiplex", path.display()))),
    }
}

fn load_model(path: &Path, seed: Option<u64>) -> Res<ModelDescriptor> {
    match load(path)? {
        Loaded::Model(mut d) => {
            if let Some(s) = seed {
                d.seed = s;
            }
            Ok(d)
        }
        _ => Err(Error::InvalidParameter(format!("{}: expected a model descriptor", path.display()))),
    }
}

fn load_limit(path: &Path) -> Res<AnalyticMultiplexon> {
    match load(path)? {
        Loaded::Step(w) => Ok(AnalyticMultiplexon::Step(w.to_mode(Mode::Cumulative, 1e-9)?)),
        Loaded::Model(d) => d.model.limit(),
        Loaded::Multiplex(g) => Ok(AnalyticMultiplexon::Step(StepMultiplexon::empirical(&g))),
    }
}

struct Output<'a> {
    cli: &'a Cli,
}

impl Output<'_> {
    /// Writes `body` to `<out>/<name>` or stdout.
    fn emit(&self, name: &str, body: &str) -> Res<()> {
        match &self.cli.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                fs::write(dir.join(name), body)?;
            }
            None => {
                print!("{body}");
                if !body.ends_with('\n') {
                    println!();
                }
            }
        }
        Ok(())
    }

    /// JSON or CSV by the global format flag.
    fn report(&self, stem: &str, value: &serde_json::Value, csv: impl FnOnce() -> String) -> Res<()> {
        match self.cli.format {
            Format::Json => self.emit(&format!("{stem}.json"), &serde_json::to_string_pretty(value)?),
            Format::Csv => self.emit(&format!("{stem}.csv"), &csv()),
        }
    }
}

fn kv_csv(pairs: &[(&str, String)]) -> String {
    let head: Vec<&str> = pairs.iter().map(|p| p.0).collect();
    let vals: Vec<&str> = pairs.iter().map(|p| p.1.as_str()).collect();
    format!("{}\n{}\n", head.join(","), vals.join(","))
}

fn run(cli: &Cli) -> Res<()> {
    let out = Output { cli };
    let seed = cli.seed;
    match &cli.command {
        Command::Sample { model, n } => {
            let d = load_model(model, seed)?;
            let n = n.or(d.n).ok_or_else(|| Error::InvalidParameter("vertex count missing: pass -n".into()))?;
            let rec = d.sample(n)?;
            match cli.format {
                Format::Json => out.emit("sample.json", &codec::multiplex_to_json(&rec.multiplex))?,
                Format::Csv => out.emit("sample.txt", &codec::multiplex_to_text(&rec.multiplex))?,
            }
            if rec.latents.is_some() || rec.labels.is_some() {
                let side = json!({ "format": "latents-v1", "seed": rec.seed, "latents": rec.latents, "labels": rec.labels });
                if cli.out.is_some() {
                    out.emit("sample.latents.json", &serde_json::to_string_pretty(&side)?)?;
                }
            }
        }
        Command::Decompose { multiplex, mode } => {
            let g = load_multiplex(multiplex)?;
            let d = g.decompose((*mode).into());
            let subsets: Vec<Subset> = Subset::nonempty(g.r()).collect();
            let mut layers = serde_json::Map::new();
            let mut csv = String::from("subset,i,j\n");
            for s in subsets {
                let edges = d.layer(s)?;
                for (i, j) in edges {
                    csv.push_str(&format!("\"{s}\",{i},{j}\n"));
                }
                layers.insert(s.to_string(), json!(edges));
            }
            let mode_name = if *mode == ModeArg::Cumulative { "cumulative" } else { "disjoint" };
            let value = json!({ "n": g.n(), "r": g.r(), "mode": mode_name, "layers": layers });
            out.report("decomposition", &value, || csv)?;
        }
        Command::Homdensity { pattern, target, samples } => {
            let h = load_multiplex(pattern)?;
            let p = motif_pattern(&h);
            let (value, csv) = match load(target)? {
                Loaded::Multiplex(g) => {
                    let d = hom_density(&h, &g)?;
                    let t_inj = d.t_inj.map(|x| x.to_string()).unwrap_or_default();
                    (serde_json::to_value(d)?, kv_csv(&[("t", d.t.to_string()), ("t_inj", t_inj), ("hom_count", d.hom_count.to_string())]))
                }
                Loaded::Step(w) => {
                    let w = w.to_mode(Mode::Cumulative, 1e-9)?;
                    let d = t_motif_step(&p, &w)?;
                    (serde_json::to_value(d)?, kv_csv(&[("t", d.value.to_string()), ("stderr", "0".into())]))
                }
                Loaded::Model(m) => {
                    let w = m.model.limit()?;
                    let d = match w.as_step() {
                        Some(s) => t_motif_step(&p, &s)?,
                        None => t_motif_mc(&p, &w, *samples, seed.unwrap_or(m.seed))?,
                    };
                    (serde_json::to_value(d)?, kv_csv(&[("t", d.value.to_string()), ("stderr", d.stderr.to_string())]))
                }
            };
            out.report("homdensity", &value, || csv)?;
        }
        Command::Cutnorm { u, w, exact, heuristic, sandwich } => {
            let (u, w) = (load_step(u)?, load_step(w)?);
            let seed = seed.unwrap_or(0);
            let mode = match (exact, heuristic) {
                (true, _) => CutMode::Exact,
                (_, true) => CutMode::Heuristic { seed },
                _ => CutMode::Auto { seed },
            };
            let cut = layered_cut_norm(&u, &w, mode)?;
            let mut value = serde_json::to_value(&cut)?;
            if *sandwich {
                value["sandwich"] = serde_json::to_value(sandwich_check(&u, &w)?)?;
            }
            let mut csv = String::from("subset,value,exact\n");
            for (s, c) in &cut.layers {
                csv.push_str(&format!("\"{s}\",{},{}\n", c.value, c.exact));
            }
            csv.push_str(&format!("total,{},{}\n", cut.total, cut.exact));
            out.report("cutnorm", &value, || csv)?;
        }
        Command::Cutdist { u, w, budget } => {
            let (u, w) = (load_step(u)?, load_step(w)?);
            let d = cut_distance_upper(&u, &w, *budget, seed.unwrap_or(0))?;
            let csv = kv_csv(&[
                ("upper_bound", d.upper_bound.to_string()),
                ("exact_search", d.exact_search.to_string()),
                ("norm_exact", d.norm_exact.to_string()),
                ("cells", d.cells.to_string()),
                ("coarsened", d.coarsened.to_string()),
            ]);
            out.report("cutdist", &serde_json::to_value(&d)?, || csv)?;
        }
        Command::Stats { multiplex, stat, variant, chain, limit, cells, budget } => {
            let g = load_multiplex(multiplex)?;
            match stat {
                Stat::Degrees => {
                    let d = joint_degrees(&g);
                    out.report("degrees", &serde_json::to_value(&d)?, || d.to_csv())?;
                }
                Stat::Clustering => {
                    let dist = if *chain { Distinctness::Chain } else { Distinctness::Pairwise };
                    let c = clustering_with(&g, *variant, dist)?;
                    out.report("clustering", &serde_json::to_value(&c)?, || c.to_csv())?;
                }
                Stat::Convergence => {
                    let path = limit.as_ref().ok_or_else(|| Error::InvalidParameter("--limit is required for convergence".into()))?;
                    let w = load_limit(path)?;
                    let opts = DegreeOptions { cells: *cells, budget: *budget, seed: seed.unwrap_or(0) };
                    let c = degree_convergence(&g, &w, &opts)?;
                    let csv = kv_csv(&[
                        ("wass", c.wass.to_string()),
                        ("bound", c.bound.to_string()),
                        ("discretization_error", c.discretization_error.to_string()),
                        ("cut_distance_upper", c.cut_distance.upper_bound.to_string()),
                    ]);
                    out.report("convergence", &serde_json::to_value(&c)?, || csv)?;
                }
            }
        }
        Command::Limit { model, cells, degrees, clustering, chain, samples } => {
            let d = load_model(model, seed)?;
            let w = d.model.limit()?;
            let exact = w.as_step();
            let step = match &exact {
                Some(s) => s.clone(),
                None => discretize(&w, *cells, DEFAULT_SUBSAMPLES)?,
            };
            if let Some(variant) = clustering {
                let dist = if *chain { Distinctness::Chain } else { Distinctness::Pairwise };
                let l = limit_clustering(&w, *variant, dist, *samples, d.seed)?;
                let csv = kv_csv(&[
                    ("average", l.average.to_string()),
                    ("global", l.global.to_string()),
                    ("average_stderr", l.average_stderr.to_string()),
                    ("global_stderr", l.global_stderr.to_string()),
                ]);
                out.report("limit_clustering", &serde_json::to_value(l)?, || csv)?;
            } else if *degrees {
                let p = step_degree_profile(&step);
                let mut csv = String::from("point,weight");
                for s in Subset::nonempty(w.r()) {
                    csv.push_str(&format!(",\"{s}\""));
                }
                csv.push('\n');
                for (i, x) in p.points.iter().enumerate() {
                    csv.push_str(&format!("{x},{}", p.weights[i]));
                    for v in &p.values[i][1..] {
                        csv.push_str(&format!(",{v}"));
                    }
                    csv.push('\n');
                }
                let value = json!({ "exact": exact.is_some(), "points": p.points, "weights": p.weights, "degrees": p.vectors() });
                out.report("limit_degrees", &value, || csv)?;
            } else {
                if cli.format == Format::Csv {
                    return Err(Error::InvalidParameter("multiplexons are written as JSON only".into()));
                }
                out.emit("limit.json", &codec::step_to_json(&step))?;
            }
        }
        Command::Experiment { config } => {
            let mut cfg = ExperimentConfig::from_file(config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let table = run_experiment(&cfg)?;
            match cli.out.clone().or(cfg.outputs.clone()) {
                Some(dir) => write_outputs(&table, &dir)?,
                None => match cli.format {
                    Format::Csv => print!("{}", table.to_csv()),
                    Format::Json => println!("{}", serde_json::to_string_pretty(&table)?),
                },
            }
            if cli.out.is_none() && cfg.outputs.is_none() {
                eprint!("{}", emit_report(&table)?);
            }
        }
        Command::Convert { input, to } => {
            let g = load_multiplex(input)?;
            match to {
                TextFormat::Json => out.emit("converted.json", &codec::multiplex_to_json(&g))?,
                TextFormat::Text => out.emit("converted.txt", &codec::multiplex_to_text(&g))?,
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_guard() {
        2
    } else if e.is_io() {
        3
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
