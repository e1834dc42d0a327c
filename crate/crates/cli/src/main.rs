//! `xjoin`: discover transformations that make two CSV columns joinable,
//! and join them.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use xjoin_core::config::{parse_unit_list, RunConfig};
use xjoin_core::coverage::{compare_records, greedy_min_cover};
use xjoin_core::io::{
    read_pairs, write_join_pairs, write_pairs, write_pairs_to, write_table,
    write_transformations, ColumnSelector,
};
use xjoin_core::joiner::evaluate_pairs;
use xjoin_core::oracle::{enumerate_all_transformations, exact_min_cover, OracleBudget};
use xjoin_core::pipeline::{load_tables, run_discover, run_join, TableSpec};
use xjoin_core::synthgen::{generate_benchmark, SynthParams};
use xjoin_core::table::pairs_from_ids;
use xjoin_core::{detection_probability, find_candidate_pairs, Normalization};

#[derive(Parser)]
#[command(name = "xjoin", version, about = "Discover string transformations that make two columns equi-joinable")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find candidate row pairs with the n-gram index.
    MatchRows {
        #[command(flatten)]
        tables: TableArgs,
        #[command(flatten)]
        config: ConfigArgs,
        /// Pair list destination (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Discover covering transformations and print a JSON report.
    Discover {
        #[command(flatten)]
        tables: TableArgs,
        #[command(flatten)]
        config: ConfigArgs,
        /// Golden `source_id,target_id` pairs used instead of row matching.
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Report destination (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the covering set, one transformation per line.
        #[arg(long, value_name = "PATH")]
        transformations_out: Option<PathBuf>,
    },
    /// Join two columns with a transformation file.
    Join {
        #[command(flatten)]
        tables: TableArgs,
        #[command(flatten)]
        config: ConfigArgs,
        /// Transformation file, one expression per line.
        #[arg(short, long)]
        transformations: PathBuf,
        /// Golden pairs; adds precision, recall and F1 to the report.
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Joined pairs destination as `source_id,target_id,witness` (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate a synthetic benchmark into a directory.
    GenSynth {
        #[arg(long, default_value_t = 50)]
        rows: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Longer source rows (40 to 70 characters instead of 20 to 35).
        #[arg(long)]
        long: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Score a pair list against golden pairs.
    Eval {
        /// Emitted pairs; only the first two columns are read.
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        golden: PathBuf,
    },
    /// Probability that a transformation with the given support appears at
    /// least twice in a uniform sample.
    Prob {
        /// Support of the transformation, in [0, 1].
        #[arg(long)]
        support: f64,
        /// Sample size.
        #[arg(long)]
        sample: u32,
    },
    /// Exhaustive search over small instances, for cross-checking.
    #[command(hide = true)]
    Oracle {
        #[command(flatten)]
        tables: TableArgs,
        #[arg(long)]
        golden: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_units: usize,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
    },
}

#[derive(Args)]
struct TableArgs {
    /// Source CSV file.
    #[arg(long)]
    source: PathBuf,
    /// Source column, by header name or 0-based index.
    #[arg(long, default_value = "0")]
    source_column: String,
    /// Target CSV file.
    #[arg(long)]
    target: PathBuf,
    /// Target column, by header name or 0-based index.
    #[arg(long, default_value = "0")]
    target_column: String,
}

impl TableArgs {
    fn specs(&self) -> (TableSpec<'_>, TableSpec<'_>) {
        (
            TableSpec {
                path: &self.source,
                column: ColumnSelector::parse(&self.source_column),
            },
            TableSpec {
                path: &self.target,
                column: ColumnSelector::parse(&self.target_column),
            },
        )
    }
}

/// Run settings; flags override values from `--config`.
#[derive(Args)]
struct ConfigArgs {
    /// TOML file with run settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n0: Option<usize>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    max_placeholders: Option<usize>,
    #[arg(long)]
    skeleton_cap: Option<usize>,
    #[arg(long)]
    min_placeholder_len: Option<usize>,
    /// Minimum coverage fraction for a transformation to be kept.
    #[arg(long)]
    min_support: Option<f64>,
    #[arg(long)]
    top_k: Option<usize>,
    /// Sample this many candidate pairs before generation.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `none` or `lowercase`.
    #[arg(long)]
    normalize: Option<Normalization>,
    /// Comma-separated unit kinds, e.g. `substr,split,literal`.
    #[arg(long)]
    units: Option<String>,
    /// Worker threads; 0 lets the runtime choose.
    #[arg(long)]
    workers: Option<usize>,
    /// Leave stage timings out of reports, making them reproducible byte for byte.
    #[arg(long)]
    no_timings: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path).map_err(|e| e.to_string())?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag.clone() { cfg.$field = v; })*
            };
        }
        set!(n0 => n0, nmax => n_max, max_placeholders => max_placeholders, skeleton_cap => skeleton_cap,
             min_placeholder_len => min_placeholder_len, min_support => min_support, top_k => top_k,
             seed => seed, normalize => normalize, workers => workers);
        if let Some(list) = &self.units {
            cfg.units = parse_unit_list(list)?;
        }
        if self.sample.is_some() {
            cfg.sample = self.sample;
        }
        if self.no_timings {
            cfg.timings = false;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Runs `f` on the file at `path`, or on stdout.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), String> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| format!("{}: {e}", p.display()))?;
            let mut w = BufWriter::new(file);
            f(&mut w).and_then(|_| w.flush()).map_err(|e| format!("{}: {e}", p.display()))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            match f(&mut lock).and_then(|_| lock.flush()) {
                // A closed pipe (as with `| head`) is not worth an error.
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(err),
            }
        }
    }
}

fn write_json(path: Option<&Path>, text: &str) -> Result<(), String> {
    with_output(path, |w| writeln!(w, "{text}"))
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::MatchRows { tables, config, output } => {
            let cfg = config.resolve()?;
            let (s, t) = tables.specs();
            let (src, tgt) = load_tables(&cfg, &s, &t).map_err(err)?;
            let pairs: BTreeSet<_> = find_candidate_pairs(&src, &tgt, cfg.n0, cfg.n_max)
                .iter()
                .map(|p| p.ids())
                .collect();
            with_output(output.as_deref(), |w| write_pairs_to(w, &pairs).map_err(io::Error::other))
        }
        Command::Discover {
            tables,
            config,
            golden,
            output,
            transformations_out,
        } => {
            let cfg = config.resolve()?;
            let (s, t) = tables.specs();
            let d = run_discover(&cfg, &s, &t, golden.as_deref()).map_err(err)?;
            if let Some(path) = &transformations_out {
                write_transformations(path, &d.report.cover_transformations()).map_err(err)?;
            }
            write_json(output.as_deref(), &d.report.to_json())
        }
        Command::Join {
            tables,
            config,
            transformations,
            golden,
            output,
            report,
        } => {
            let cfg = config.resolve()?;
            let (s, t) = tables.specs();
            let (result, rep) = run_join(&cfg, &s, &t, &transformations, golden.as_deref()).map_err(err)?;
            with_output(output.as_deref(), |w| {
                write_join_pairs(w, &result).map_err(io::Error::other)
            })?;
            match report {
                Some(path) => write_json(Some(&path), &rep.to_json()),
                None => Ok(()),
            }
        }
        Command::GenSynth {
            rows,
            seed,
            long,
            out_dir,
        } => {
            if rows == 0 {
                return Err("--rows must be at least 1".into());
            }
            let params = if long {
                SynthParams::synth_long(rows, seed)
            } else {
                SynthParams::synth(rows, seed)
            };
            let b = generate_benchmark(&params);
            std::fs::create_dir_all(&out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;
            write_table(&out_dir.join("source.csv"), "text", &b.source).map_err(err)?;
            write_table(&out_dir.join("target.csv"), "text", &b.target).map_err(err)?;
            write_pairs(&out_dir.join("golden.csv"), &b.golden_pairs.iter().copied().collect()).map_err(err)?;
            write_transformations(&out_dir.join("transformations.txt"), &b.golden_transformations).map_err(err)?;
            let summary = json!({
                "rows": rows,
                "seed": seed,
                "long": long,
                "files": ["source.csv", "target.csv", "golden.csv", "transformations.txt"],
            });
            write_json(None, &serde_json::to_string_pretty(&summary).map_err(err)?)
        }
        Command::Eval { pairs, golden } => {
            let emitted = read_pairs(&pairs).map_err(err)?;
            let golden = read_pairs(&golden).map_err(err)?;
            let m = evaluate_pairs(&emitted, &golden);
            write_json(None, &serde_json::to_string_pretty(&m).map_err(err)?)
        }
        Command::Prob { support, sample } => {
            if !(0.0..=1.0).contains(&support) {
                return Err("--support must be within [0, 1]".into());
            }
            write_json(None, &format!("{:.6}", detection_probability(support, sample)))
        }
        Command::Oracle {
            tables,
            golden,
            max_units,
            top_k,
        } => {
            let cfg = RunConfig::default();
            let (s, t) = tables.specs();
            let (src, tgt) = load_tables(&cfg, &s, &t).map_err(err)?;
            let ids = read_pairs(&golden).map_err(err)?;
            let pairs = pairs_from_ids(&src, &tgt, ids);
            let budget = OracleBudget {
                max_units,
                ..OracleBudget::default()
            };
            let mut records = enumerate_all_transformations(&pairs, &budget).map_err(err)?;
            records.sort_by(compare_records);
            let exact = exact_min_cover(&records).map_err(err)?;
            let greedy = greedy_min_cover(&records, pairs.len());
            let show = |t: &xjoin_core::Transformation| t.to_string();
            let out = json!({
                "pairs": pairs.len(),
                "transformations": records.len(),
                "top": records.iter().take(top_k).map(|r| json!({
                    "transformation": show(&r.transformation),
                    "covered_pairs": r.covered.len(),
                })).collect::<Vec<_>>(),
                "exact_cover": exact.iter().map(|r| show(&r.transformation)).collect::<Vec<_>>(),
                "greedy_cover": greedy.iter().map(|p| show(&p.record.transformation)).collect::<Vec<_>>(),
            });
            write_json(None, &serde_json::to_string_pretty(&out).map_err(err)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
