use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use alonlab::experiment::{
    campaign_csv, fit_rows, read_campaign_csv, run_campaign, scatter_svg, separation_check, spreader_check, ExperimentConfig,
};
use alonlab::models::{sample, ModelId};
use alonlab::selective::selective_trace;
use alonlab::spectrum::spectrum;
use alonlab::tangle::{automorphism_count, classify, count_occurrences, lambda2_certificate, planted_sample, tau_fund, Tangle};
use alonlab::trace::{trace_counts, verify_identities};
use alonlab::vlg::{lambda1_by_determinant, lambda1_vlg, realize, subdivide, to_labeled_graph, tree_d_norm, Vlg};
use alonlab::walks::{brute_force_expected_trace, exact_expected_trace, oracle_csv, parse_word, prob_walk, OracleRow};
use alonlab::{Error, LabeledGraph, ModelTag, Result};

#[derive(Parser)]
#[command(name = "alonlab", version, about = "Spectral laboratory for random regular graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Bisection,
    Determinant,
}

#[derive(Args)]
struct Output {
    /// Output file (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a seeded sample of a random model.
    Sample {
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        index: u64,
        /// Tangle to plant on the first vertices.
        #[arg(long)]
        plant: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Adjacency eigenvalues.
    Spectrum {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: Output,
    },
    /// Non-backtracking trace counts and identities.
    Trace {
        #[command(subcommand)]
        command: TraceCommand,
    },
    /// Tangle analysis.
    Tangle {
        #[command(subcommand)]
        command: TangleCommand,
    },
    /// Fundamental order of a model with a verified witness.
    Taufund {
        #[arg(long)]
        model: String,
        #[arg(long)]
        d: u32,
        /// Where to write the witness tangle.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral radius of the d-regular completion of a graph.
    Treed {
        graph: PathBuf,
        #[arg(long)]
        d: f64,
    },
    /// Variable-length graphs.
    Vlg {
        #[command(subcommand)]
        command: VlgCommand,
    },
    /// Exact walk probabilities and expected traces.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Monte Carlo campaigns.
    Experiment {
        #[command(subcommand)]
        command: ExperimentCommand,
    },
    /// Exhaustive expansion check, optionally with the eigenvalue separation bound.
    Spreader {
        graph: PathBuf,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        separation: bool,
    },
}

#[derive(Subcommand)]
enum TraceCommand {
    /// Checks the trace identities for k = 1..=kmax and prints the CSV report.
    Verify {
        graph: PathBuf,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Irreducible closed walks avoiding the given tangles in every window of s steps.
    Selective {
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        s: usize,
        #[arg(long = "tangle", required = true)]
        tangles: Vec<PathBuf>,
    },
    /// Irreducible and strongly irreducible closed walk counts.
    Count {
        graph: PathBuf,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum TangleCommand {
    /// Order, lambda_irred and criticality of a tangle at degree d.
    Classify {
        tangle: PathBuf,
        #[arg(long)]
        d: u32,
    },
    /// Label-preserving inclusions of a tangle in a graph.
    Occurrences {
        graph: PathBuf,
        tangle: PathBuf,
    },
    /// Label-preserving automorphisms of a tangle.
    Automorphisms {
        tangle: PathBuf,
    },
    /// Certified lower bound on lambda_2 of a graph containing the tangle.
    Certificate {
        graph: PathBuf,
        tangle: PathBuf,
        #[arg(long, default_value_t = 12)]
        radius: usize,
    },
}

#[derive(Subcommand)]
enum VlgCommand {
    /// Perron value of a variable-length graph.
    Lambda1 {
        vlg: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Bisection)]
        method: Method,
    },
    /// Replaces every edge by a beaded path of unit-length edges.
    Subdivide {
        vlg: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Walks between kept vertices avoiding them internally, as a VLG.
    Realize {
        /// A VLG file or a graph file.
        input: PathBuf,
        /// Kept vertices, 1-based, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        keep: Vec<usize>,
        #[arg(long, default_value_t = alonlab::vlg::DEFAULT_REALIZE_LIMIT)]
        max_len: u64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: u32,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Probability of one potential walk.
    Walk {
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: usize,
        /// Letters such as `s1,s2^-1,s1`.
        #[arg(long)]
        word: String,
        /// Visited vertices, 1-based, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<usize>,
    },
    /// Exact expected irreducible trace by class enumeration.
    Expected {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Expected irreducible trace by averaging over every instance.
    Brute {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Runs a campaign from a JSON config and writes the CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Fits the exceedance exponent of a campaign CSV.
    Fit {
        csv: PathBuf,
    },
}

fn emit(out: &Output, text: &str) -> Result<()> {
    match &out.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn model_tag(s: &str) -> Result<ModelTag> {
    ModelTag::parse(s)
}

fn load_graph(p: &Path) -> Result<LabeledGraph> {
    LabeledGraph::load(p)
}

fn one_based(v: &[usize], n: usize) -> Result<Vec<usize>> {
    v.iter()
        .map(|&x| if x == 0 || x > n { Err(Error::Invalid(format!("vertex {x} outside 1..={n}"))) } else { Ok(x - 1) })
        .collect()
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sample { model, n, d, seed, index, plant, out } => {
            let id = ModelId::new(model_tag(&model)?, d, n)?;
            let g = match plant {
                Some(p) => planted_sample(id, &Tangle::load(p)?, seed, index)?,
                None => sample(id, seed, index)?,
            };
            emit(&out, &(g.to_json_string() + "\n"))?;
        }
        Command::Spectrum { graph, format, out } => {
            let s = spectrum(&load_graph(&graph)?)?;
            let text = match format {
                Format::Json => serde_json::json!({ "eigenvalues": s.values, "complete": s.complete }).to_string() + "\n",
                Format::Csv => std::iter::once("i,eigenvalue".to_string())
                    .chain(s.values.iter().enumerate().map(|(i, x)| format!("{},{x}", i + 1)))
                    .collect::<Vec<_>>()
                    .join("\n")
                    + "\n",
            };
            emit(&out, &text)?;
        }
        Command::Trace { command } => match command {
            TraceCommand::Verify { graph, kmax, out } => {
                let report = verify_identities(&load_graph(&graph)?, kmax)?;
                emit(&out, &report.to_csv()?)?;
                if let Some(row) = report.first_failure() {
                    return Err(Error::Verification(format!("identity {} fails at k={}", row.identity, row.k)));
                }
            }
            TraceCommand::Selective { graph, k, s, tangles } => {
                let g = load_graph(&graph)?;
                let ts = tangles.iter().map(|p| load_graph(p)).collect::<Result<Vec<_>>>()?;
                println!("{}", selective_trace(&g, k, s, &ts)?);
            }
            TraceCommand::Count { graph, kmax, out } => {
                let c = trace_counts(&load_graph(&graph)?, kmax)?;
                let mut text = String::from("k,irred,strong\n");
                for k in 1..=kmax {
                    text += &format!("{k},{},{}\n", c.irred[k], c.strong[k]);
                }
                emit(&out, &text)?;
            }
        },
        Command::Tangle { command } => match command {
            TangleCommand::Classify { tangle, d } => {
                let c = classify(&Tangle::load(tangle)?, d)?;
                println!(
                    "{}",
                    serde_json::json!({
                        "criticality": c.criticality.as_str(),
                        "supercritical": c.criticality.is_supercritical(),
                        "lambda_irred": c.lambda_irred,
                        "threshold": c.threshold,
                        "order": c.order,
                        "exact": c.exact,
                    })
                );
            }
            TangleCommand::Occurrences { graph, tangle } => {
                println!("{}", count_occurrences(&load_graph(&graph)?, &Tangle::load(tangle)?)?);
            }
            TangleCommand::Automorphisms { tangle } => {
                println!("{}", automorphism_count(&Tangle::load(tangle)?)?);
            }
            TangleCommand::Certificate { graph, tangle, radius } => {
                let c = lambda2_certificate(&load_graph(&graph)?, &Tangle::load(tangle)?, radius)?;
                println!(
                    "{}",
                    serde_json::json!({
                        "bound": c.bound,
                        "radius": c.radius,
                        "inner": c.inner,
                        "outer": c.outer,
                        "ball_value": c.ball_value,
                    })
                );
            }
        },
        Command::Taufund { model, d, out } => {
            let (tau, witness) = tau_fund(model_tag(&model)?, d)?;
            println!("{tau}");
            match out {
                Some(p) => std::fs::write(p, witness.to_json_string() + "\n")?,
                None => println!("{}", witness.to_json_string()),
            }
        }
        Command::Treed { graph, d } => println!("{}", tree_d_norm(&load_graph(&graph)?, d)?),
        Command::Vlg { command } => match command {
            VlgCommand::Lambda1 { vlg, method } => {
                let g = Vlg::load(vlg)?;
                let value = match method {
                    Method::Bisection => lambda1_vlg(&g)?.value,
                    Method::Determinant => lambda1_by_determinant(&g)?,
                };
                println!("{value}");
            }
            VlgCommand::Subdivide { vlg, out } => {
                let s = subdivide(&Vlg::load(vlg)?)?;
                let text = if s.directed { s.to_json_string() } else { to_labeled_graph(&s)?.to_json_string() };
                emit(&out, &(text + "\n"))?;
            }
            VlgCommand::Realize { input, keep, max_len, out } => {
                let text = std::fs::read_to_string(&input)?;
                let g = match Vlg::from_json_str(&text) {
                    Ok(v) => v,
                    Err(_) => Vlg::from_graph(&LabeledGraph::from_json_str(&text)?),
                };
                let r = realize(&g, &one_based(&keep, g.n)?, max_len)?;
                if r.truncated {
                    eprintln!("warning: walks longer than {max_len} were dropped");
                }
                emit(&out, &(r.vlg.to_json_string() + "\n"))?;
            }
        },
        Command::Oracle { command } => match command {
            OracleCommand::Walk { model, n, word, t } => {
                let p = prob_walk(model_tag(&model)?, n, &parse_word(&word)?, &one_based(&t, n)?)?;
                println!("{p}");
            }
            OracleCommand::Expected { model, k, out } => {
                let id = ModelId::new(model_tag(&model.model)?, model.d, model.n)?;
                let value = exact_expected_trace(id, k)?;
                emit(&out, &oracle_csv(&[OracleRow { model: id.tag, n: id.n, d: id.d, k, method: "exact".into(), value }])?)?;
            }
            OracleCommand::Brute { model, k, out } => {
                let id = ModelId::new(model_tag(&model.model)?, model.d, model.n)?;
                let value = brute_force_expected_trace(id, k)?;
                emit(&out, &oracle_csv(&[OracleRow { model: id.tag, n: id.n, d: id.d, k, method: "brute".into(), value }])?)?;
            }
        },
        Command::Experiment { command } => match command {
            ExperimentCommand::Run { config, svg, out } => {
                let cfg = ExperimentConfig::load(config)?;
                let rows = run_campaign(&cfg)?;
                emit(&out, &campaign_csv(&rows)?)?;
                if let Some(p) = svg {
                    std::fs::write(p, scatter_svg(&rows, fit_rows(&rows).ok().as_ref()))?;
                }
            }
            ExperimentCommand::Fit { csv } => {
                let fit = fit_rows(&read_campaign_csv(&std::fs::read_to_string(csv)?)?)?;
                println!("{}", serde_json::json!({ "slope": fit.slope, "stderr": fit.stderr, "points": fit.points }));
            }
        },
        Command::Spreader { graph, gamma, separation } => {
            let g = load_graph(&graph)?;
            let r = spreader_check(&g, gamma)?;
            let mut obj = serde_json::json!({
                "gamma": gamma,
                "holds": r.holds,
                "worst_ratio": r.worst_ratio,
                "witness": r.witness.iter().map(|v| v + 1).collect::<Vec<_>>(),
            });
            if separation && r.holds {
                let s = separation_check(&g, gamma)?;
                obj["separation"] = serde_json::json!({ "bound": s.bound, "max_square": s.max_square, "holds": s.holds });
                if !s.holds {
                    println!("{obj}");
                    return Err(Error::Verification("separation bound violated".into()));
                }
            }
            println!("{obj}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonConvergence(_) => 3,
        Error::Budget(_) => 4,
        Error::Verification(_) => 1,
        _ => 2,
    }
}
