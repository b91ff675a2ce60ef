//! `demoivre` command-line tool.
//!
//! Exit codes: 0 on success, 1 on a validation error or a failed `verify`,
//! 2 when a computation runs out of budget.

#![allow(clippy::result_large_err)]

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use demoivre::approx::{self, ChebyshevCheckConfig, ContinuousSource};
use demoivre::dist::{self, convolve_power_exact, EXACT_ATOM_BUDGET};
use demoivre::normal::{self, BinomialSpec};
use demoivre::pipeline::{self, CltExperiment};
use demoivre::rational::parse_rational;
use demoivre::{decompose, verify, Error, FiniteDist, Mode, SumLaw};

#[derive(Parser)]
#[command(name = "demoivre", version, about = "Exact and numerical central limit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Split a mean-zero law into a mixture of two-valued laws.
    Decompose {
        #[arg(long, allow_hyphen_values = true)]
        dist: String,
        /// Shorthand for `--format json`.
        #[arg(long)]
        json: bool,
    },
    /// Law of the sum of `n` independent copies, or of two given laws.
    Convolve {
        #[arg(long, allow_hyphen_values = true)]
        dist: String,
        /// Convolve with this law instead of taking a power.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "n")]
        with: Option<String>,
        #[arg(long, default_value_t = 2)]
        n: u64,
        #[arg(long, default_value = "exact")]
        mode: String,
        /// Atom budget for exact mode.
        #[arg(long)]
        max_atoms: Option<u128>,
    },
    /// Sup-norm distance between the standardized sum and the normal CDF.
    CltTable {
        #[arg(long, allow_hyphen_values = true)]
        dist: String,
        #[arg(long)]
        n_list: String,
        /// `lo:hi:step`.
        #[arg(long, default_value = "-4:4:0.05", allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value = "lattice-float")]
        mode: String,
    },
    /// Binomial-to-normal Kolmogorov distance with the Stirling ratio.
    DmlTable {
        #[arg(long)]
        p: String,
        #[arg(long)]
        n_list: String,
    },
    /// `n! / (sqrt(2 pi n) (n/e)^n)`.
    Stirling {
        #[arg(long)]
        n_list: String,
    },
    /// Component frequencies of a sampled selector path.
    LlnCheck {
        #[arg(long, allow_hyphen_values = true)]
        dist: String,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
    },
    /// Simple approximation of a continuous source.
    Approx {
        #[arg(long)]
        family: String,
        #[arg(long)]
        eta: f64,
    },
    /// Monte Carlo check of the coupling bound.
    ChebyCheck {
        #[arg(long)]
        family: String,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x: f64,
    },
    /// Run the self-check suite.
    Verify,
}

/// A library error tagged with the command-line field it came from.
struct Failure {
    field: &'static str,
    error: Error,
}

trait Field<T> {
    fn field(self, name: &'static str) -> Result<T, Failure>;
}

impl<T> Field<T> for Result<T, Error> {
    fn field(self, name: &'static str) -> Result<T, Failure> {
        self.map_err(|error| Failure { field: name, error })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure { field, error }) => {
            let field = match &error {
                Error::Invalid { field, .. } => field.replace('_', "-"),
                _ => field.to_string(),
            };
            eprintln!("error: --{field}: {error}");
            ExitCode::from(if error.is_budget() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let Common { mut format, seed, out } = cli.common;
    let mut ok = true;
    let text = match cli.command {
        Command::Decompose { dist, json } => {
            if json {
                format = Format::Json;
            }
            let m = decompose(&parse_dist(&dist)?).field("dist")?;
            match format {
                Format::Json => to_json(&m),
                Format::Csv => {
                    let mut s = String::from("component,weight,a,b,p_pos,zero\n");
                    for (i, c) in m.components().iter().enumerate() {
                        let y = &c.dist;
                        if y.is_degenerate() {
                            s += &format!("{i},{},0,0,,true\n", c.weight);
                        } else {
                            s += &format!("{i},{},{},{},{},false\n", c.weight, y.pos(), y.neg(), y.prob_pos());
                        }
                    }
                    s
                }
            }
        }
        Command::Convolve { dist, with, n, mode, max_atoms } => {
            let d = parse_dist(&dist)?;
            let mode: Mode = mode.parse().field("mode")?;
            let law = match (with, mode) {
                (Some(other), _) => {
                    SumLaw::Exact(d.convolve(&parse_dist(&other).map_err(|f| Failure { field: "with", ..f })?))
                }
                (None, Mode::Exact) => {
                    SumLaw::Exact(convolve_power_exact(&d, n, max_atoms.unwrap_or(EXACT_ATOM_BUDGET)).field("n")?)
                }
                (None, Mode::LatticeFloat) => dist::convolve_power(&d, n, mode).field("n")?,
            };
            render_law(&law, format)
        }
        Command::CltTable { dist, n_list, grid, mode } => {
            let d = parse_dist(&dist)?;
            let n_list = parse_n_list(&n_list)?;
            let grid = pipeline::parse_grid(&grid).field("grid")?;
            let mode: Mode = mode.parse().field("mode")?;
            let e = CltExperiment::standardized(&d, n_list, grid, mode).field("dist")?;
            let rows: Vec<CltRow> = pipeline::run_clt_table(&e)
                .field("n-list")?
                .into_iter()
                .map(|r| CltRow { n: r.n, sup_abs_err: r.statistic })
                .collect();
            match format {
                Format::Json => to_json(&rows),
                Format::Csv => csv("n,sup_abs_err", rows.iter().map(|r| format!("{},{}", r.n, r.sup_abs_err))),
            }
        }
        Command::DmlTable { p, n_list } => {
            let p = parse_rational(&p).field("p")?;
            BinomialSpec::new(1, p.clone()).field("p")?;
            let rows = normal::dml_table(&p, &parse_n_list(&n_list)?).field("n-list")?;
            match format {
                Format::Json => to_json(&rows),
                Format::Csv => csv(
                    "n,p,d_k,stirling_ratio",
                    rows.iter().map(|r| format!("{},{},{},{}", r.n, r.p, r.d_k, r.stirling_ratio)),
                ),
            }
        }
        Command::Stirling { n_list } => {
            let rows: Vec<StirlingRow> = normal::stirling_rows(&parse_n_list(&n_list)?)
                .into_iter()
                .map(|r| StirlingRow { n: r.n, stirling_ratio: r.statistic })
                .collect();
            match format {
                Format::Json => to_json(&rows),
                Format::Csv => csv("n,stirling_ratio", rows.iter().map(|r| format!("{},{}", r.n, r.stirling_ratio))),
            }
        }
        Command::LlnCheck { dist, n } => {
            let m = decompose(&parse_dist(&dist)?).field("dist")?;
            let report = pipeline::verify_theta_lln(&m, n, seed).field("n")?;
            let rows = report.rows();
            match format {
                Format::Json => to_json(&LlnJson { n, seed, max_abs_freq_err: report.max_abs_freq_err, rows }),
                Format::Csv => csv(
                    "component,weight,emp_freq,abs_err",
                    rows.iter().map(|r| format!("{},{},{},{}", r.component, r.weight, r.emp_freq, r.abs_err)),
                ),
            }
        }
        Command::Approx { family, eta } => {
            let src: ContinuousSource = family.parse().field("family")?;
            let q = approx::quantize(&src, eta).field("eta")?;
            let report = ApproxReport {
                family: src.family(),
                eta_requested: q.eta_requested,
                eta_achieved: q.eta_achieved,
                cells: q.cells,
                boundaries: q.boundaries.clone(),
                schedule: q.schedule.clone(),
            };
            match format {
                Format::Json => to_json(&ApproxJson { dist: &q.simple, report }),
                Format::Csv => format!("{}\n{}", q.simple, to_json(&report)),
            }
        }
        Command::ChebyCheck { family, delta, epsilon, n, samples, x } => {
            let src: ContinuousSource = family.parse().field("family")?;
            let cfg = ChebyshevCheckConfig::new(delta, epsilon, n, samples, seed).field("delta")?.with_x(x);
            let r = approx::chebyshev_check(&src, &cfg).field("epsilon")?;
            match format {
                Format::Json => to_json(&r),
                Format::Csv => {
                    format!("bound,empirical,mc_band,pass\n{},{},{},{}\n", r.bound, r.empirical, r.mc_band, r.pass)
                }
            }
        }
        Command::Verify => {
            let outcomes = verify::run_suite(seed);
            ok = outcomes.iter().all(|o| o.pass);
            match format {
                Format::Json => to_json(&outcomes),
                Format::Csv => outcomes
                    .iter()
                    .map(|o| format!("{} {}: {}\n", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail))
                    .collect(),
            }
        }
    };
    emit(&text, out.as_ref())?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Serialize)]
struct CltRow {
    n: u64,
    sup_abs_err: f64,
}

#[derive(Serialize)]
struct StirlingRow {
    n: u64,
    stirling_ratio: f64,
}

#[derive(Serialize)]
struct LlnJson {
    n: u64,
    seed: u64,
    max_abs_freq_err: f64,
    rows: Vec<pipeline::LlnRow>,
}

#[derive(Serialize)]
struct ApproxReport {
    #[serde(flatten)]
    family: approx::Family,
    eta_requested: f64,
    eta_achieved: f64,
    cells: usize,
    boundaries: Vec<f64>,
    schedule: Vec<(usize, f64)>,
}

#[derive(Serialize)]
struct ApproxJson<'a> {
    dist: &'a FiniteDist,
    report: ApproxReport,
}

#[derive(Serialize)]
struct LatticeJson {
    offset: String,
    step: String,
    probs: Vec<f64>,
}

fn parse_dist(s: &str) -> Result<FiniteDist, Failure> {
    s.parse().field("dist")
}

fn parse_n_list(s: &str) -> Result<Vec<u64>, Failure> {
    let list = s
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| Error::Parse { input: t.to_string(), reason: e.to_string() }))
        .collect::<Result<Vec<u64>, Error>>()
        .field("n-list")?;
    pipeline::check_n_list(&list).field("n-list")?;
    Ok(list)
}

fn render_law(law: &SumLaw, format: Format) -> String {
    match (law, format) {
        (SumLaw::Exact(d), Format::Json) => to_json(d),
        (SumLaw::Exact(d), Format::Csv) => {
            csv("value,prob", d.atoms().iter().map(|a| format!("{},{}", a.value, a.prob)))
        }
        (SumLaw::Lattice(l), Format::Json) => to_json(&LatticeJson {
            offset: l.offset().to_string(),
            step: l.step().to_string(),
            probs: l.probs().to_vec(),
        }),
        (SumLaw::Lattice(l), Format::Csv) => {
            csv("value,prob", (0..l.len()).map(|k| format!("{},{}", l.value(k), l.probs()[k])))
        }
    }
}

fn csv(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s += &r;
        s.push('\n');
    }
    s
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    let written = match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    written.map_err(|e| Failure { field: "out", error: Error::Invalid { field: "out", reason: e.to_string() } })
}
