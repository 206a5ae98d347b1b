//! Command-line surface of the ERGM toolkit: fit, simulate, gof, enumerate,
//! scan, and mask subcommands over the text formats in `ergm::formats`.
//!
//! Reports are line-oriented `key<TAB>value` plus tab-separated tables.
//! Failures print one machine-readable line to stderr:
//! `<token><TAB><message>` with the token drawn from a closed vocabulary
//! (`parse-error`, `io-error`, `mle-nonexistent`, `ess-degenerate`,
//! `cap-exceeded`, `non-ignorable-design`).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ergm::estimate::{self, Network, NetworkData};
use ergm::formats;
use ergm::gof;
use ergm::graph::{BlockStructure, Graph, NodeAttributes};
use ergm::missing::{self, Design, Inclusion, ObservationMask};
use ergm::sampler::{self, McmcConfig, Proposal};
use ergm::{Error as ErgmError, exact};

/// Fixed default seed: runs are reproducible unless a seed is given.
const DEFAULT_SEED: u64 = 1729;

#[derive(Parser)]
#[command(name = "ergm", version, about = "Exponential-family random graph model toolkit")]
struct Cli {
    /// Cap on worker threads for internal parallelism. Results are
    /// identical for any value; chains draw from per-chain RNG streams.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate model parameters from observed networks.
    Fit(FitArgs),
    /// Simulate networks (or their statistics) from a model.
    Simulate(SimulateArgs),
    /// Goodness-of-fit envelopes for a fitted model.
    Gof(GofArgs),
    /// Exact enumeration: normalizer, moments, or maximum likelihood.
    Enumerate(EnumerateArgs),
    /// Long-run density summaries over a parameter grid.
    Scan(ScanArgs),
    /// Generate an observation mask from a sampling design.
    Mask(MaskArgs),
}

#[derive(Args)]
struct ChainArgs {
    /// RNG seed (fixed default keeps runs reproducible).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Burn-in steps; default scales with the dyad count.
    #[arg(long)]
    burnin: Option<u64>,
    /// Steps between retained draws; default is the dyad count.
    #[arg(long)]
    interval: Option<u64>,
    /// Retained draws per chain.
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long, value_enum, default_value_t = ProposalArg::Tnt)]
    proposal: ProposalArg,
    /// Probability of proposing an existing edge under the tie/no-tie
    /// proposal.
    #[arg(long, default_value_t = 0.5)]
    p_tie: f64,
}

impl ChainArgs {
    fn config(&self, n: usize) -> McmcConfig {
        let mut cfg = McmcConfig::for_nodes(n, self.seed);
        if let Some(b) = self.burnin {
            cfg.burnin = b;
        }
        if let Some(i) = self.interval {
            cfg.interval = i;
        }
        if let Some(d) = self.draws {
            cfg.draws = d;
        }
        cfg.proposal = match self.proposal {
            ProposalArg::Tnt => Proposal::TieNoTie { p_tie: self.p_tie },
            ProposalArg::Uniform => Proposal::UniformDyad,
        };
        cfg
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProposalArg {
    Tnt,
    Uniform,
}

#[derive(Args)]
struct FitArgs {
    /// Graph file (networks separated by `---`).
    #[arg(long)]
    graphs: PathBuf,
    /// Model configuration file.
    #[arg(long)]
    model: PathBuf,
    /// Node attribute table shared by all networks.
    #[arg(long)]
    attrs: Option<PathBuf>,
    /// Observation masks (sections aligned with the graph file); activates
    /// the incomplete-data fit.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Mcmle)]
    method: MethodArg,
    /// Starting value, comma-separated.
    #[arg(long)]
    theta0: Option<String>,
    #[command(flatten)]
    chain: ChainArgs,
    /// Output path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Mple,
    Mcmle,
    Sa,
    Exact,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Parameter vector, comma-separated.
    #[arg(long)]
    theta: String,
    /// Node count.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    attrs: Option<PathBuf>,
    /// Write one tab-separated statistic row per draw instead of graphs.
    #[arg(long)]
    stats_only: bool,
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GofArgs {
    /// Fit report produced by `fit`.
    #[arg(long)]
    fit_report: PathBuf,
    /// Observed networks the fit was based on.
    #[arg(long)]
    graphs: PathBuf,
    #[arg(long)]
    attrs: Option<PathBuf>,
    /// Simulated replicate sets.
    #[arg(long, default_value_t = 500)]
    draws: usize,
    /// Seed; defaults to the fit report's seed lineage.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    attrs: Option<PathBuf>,
    /// Report the log-normalizer (default).
    #[arg(long)]
    normalizer: bool,
    /// Report exact means and variances of all statistics.
    #[arg(long)]
    moments: bool,
    /// Report the exact maximum likelihood estimate for `--graphs`.
    #[arg(long)]
    mle: bool,
    #[arg(long)]
    graphs: Option<PathBuf>,
    /// Enumeration cap override.
    #[arg(long, default_value_t = exact::DEFAULT_ENUM_CAP)]
    cap: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    model: PathBuf,
    /// Grid file: one θ vector per line.
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    attrs: Option<PathBuf>,
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MaskArgs {
    /// Sampling design: ego, trace, subgraph, or mar.
    #[arg(long)]
    design: String,
    #[arg(long)]
    n: Option<usize>,
    /// Population graph (required for link-tracing; optional for ego).
    #[arg(long)]
    graphs: Option<PathBuf>,
    /// Uniform inclusion probability per node or block.
    #[arg(long)]
    prob: Option<f64>,
    /// Per-unit inclusion probabilities, comma-separated.
    #[arg(long)]
    probs: Option<String>,
    /// Link-tracing wave count.
    #[arg(long, default_value_t = 1)]
    waves: usize,
    /// Block assignment per node, comma-separated contiguous ids from 0.
    #[arg(long)]
    blocks: Option<String>,
    /// Per-dyad masking probability for the missing-at-random design.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads == 0 {
        eprintln!("parse-error\t--threads must be at least 1");
        return ExitCode::FAILURE;
    }
    let result = match cli.command {
        Command::Fit(args) => run_fit(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Gof(args) => run_gof(args),
        Command::Enumerate(args) => run_enumerate(args),
        Command::Scan(args) => run_scan(args),
        Command::Mask(args) => run_mask(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}\t{}", e.token(), e.message());
            ExitCode::FAILURE
        }
    }
}

enum CliError {
    Io(String),
    Model(ErgmError),
}

impl CliError {
    fn token(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io-error",
            CliError::Model(e) => match e {
                ErgmError::MleNonexistent(_)
                | ErgmError::Separation(_)
                | ErgmError::Diverged(_)
                | ErgmError::NonIdentifiable(_) => "mle-nonexistent",
                ErgmError::EssDegenerate(_) => "ess-degenerate",
                ErgmError::CapExceeded { .. } | ErgmError::TooManyMissing(_) => "cap-exceeded",
                ErgmError::NonIgnorableDesign(_) => "non-ignorable-design",
                _ => "parse-error",
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Io(m) => m.clone(),
            CliError::Model(e) => e.to_string(),
        }
    }
}

impl From<ErgmError> for CliError {
    fn from(e: ErgmError) -> Self {
        CliError::Model(e)
    }
}

type CliResult = Result<(), CliError>;

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Rounds to 12 significant digits so closed-form quantities print without
/// accumulation dust; fit reports keep full precision because their values
/// are read back by other subcommands.
fn fmt_num(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor();
    let scale = 10f64.powf(11.0 - mag);
    format!("{}", (v * scale).round() / scale)
}

fn write_output(path: &Option<PathBuf>, content: &str) -> CliResult {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_attrs(path: &Option<PathBuf>, n: usize) -> Result<Arc<NodeAttributes>, CliError> {
    match path {
        Some(p) => Ok(Arc::new(formats::parse_attributes(&read_file(p)?, n)?)),
        None => Ok(Arc::new(NodeAttributes::new(n))),
    }
}

fn load_data(
    graphs_path: &Path,
    model_path: &Path,
    attrs_path: &Option<PathBuf>,
    mask_path: &Option<PathBuf>,
) -> Result<(NetworkData, formats::ModelConfig), CliError> {
    let graphs = formats::parse_graphs(&read_file(graphs_path)?)?;
    let config = formats::parse_model_config(&read_file(model_path)?)?;
    let attrs = load_attrs(attrs_path, graphs[0].n())?;
    let specs = formats::instantiate_for_graphs(&config, &graphs, &attrs)?;
    let masks: Vec<Option<ObservationMask>> = match mask_path {
        Some(p) => {
            let sizes: Vec<usize> = graphs.iter().map(|g| g.n()).collect();
            formats::parse_masks(&read_file(p)?, &sizes)?
                .into_iter()
                .map(Some)
                .collect()
        }
        None => vec![None; graphs.len()],
    };
    let networks = graphs
        .into_iter()
        .zip(specs)
        .zip(masks)
        .map(|((graph, spec), mask)| Network {
            spec,
            graph,
            attrs: attrs.clone(),
            mask,
        })
        .collect();
    Ok((NetworkData::new(networks)?, config))
}

fn run_fit(args: FitArgs) -> CliResult {
    let (data, config) = load_data(&args.graphs, &args.model, &args.attrs, &args.mask)?;
    let cfg = args.chain.config(data.networks()[0].graph.n());
    let theta0 = match &args.theta0 {
        Some(s) => Some(formats::parse_theta(s)?),
        None => None,
    };
    let fit = if data.has_missing() {
        missing::incomplete_fit(&data, theta0.as_deref(), &cfg)?
    } else {
        match args.method {
            MethodArg::Mple => estimate::mple(&data)?,
            MethodArg::Mcmle => {
                estimate::mcmle(&data, theta0.as_deref(), &cfg, &Default::default())?
            }
            MethodArg::Sa => estimate::stochastic_approximation(
                &data,
                theta0.as_deref(),
                &cfg,
                &Default::default(),
            )?,
            MethodArg::Exact => estimate::exact_fit_from(&data, theta0.as_deref())?,
        }
    };
    let report = formats::write_fit_report(&fit, &config, data.networks().len());
    write_output(&args.output, &report)
}

fn run_simulate(args: SimulateArgs) -> CliResult {
    let config = formats::parse_model_config(&read_file(&args.model)?)?;
    let attrs = load_attrs(&args.attrs, args.n)?;
    let spec = config.instantiate(args.n, &attrs)?;
    let theta = formats::parse_theta(&args.theta)?;
    let cfg = args.chain.config(args.n);
    let draws = sampler::mh_sample(&spec, &attrs, &theta, &cfg)?;
    let out = if args.stats_only {
        let mut s = String::new();
        for (_, stats) in &draws {
            let row: Vec<String> = stats.iter().map(|v| v.to_string()).collect();
            writeln!(s, "{}", row.join("\t")).unwrap();
        }
        s
    } else {
        formats::write_graphs(&draws.iter().map(|(g, _)| g.clone()).collect::<Vec<_>>())
    };
    write_output(&args.output, &out)
}

fn run_gof(args: GofArgs) -> CliResult {
    let report = formats::parse_fit_report(&read_file(&args.fit_report)?)?;
    let theta = report.theta_hat()?;
    let config = report.model()?;
    let graphs = formats::parse_graphs(&read_file(&args.graphs)?)?;
    let attrs = load_attrs(&args.attrs, graphs[0].n())?;
    let specs = formats::instantiate_for_graphs(&config, &graphs, &attrs)?;
    let networks = graphs
        .into_iter()
        .zip(specs)
        .map(|(graph, spec)| Network {
            spec,
            graph,
            attrs: attrs.clone(),
            mask: None,
        })
        .collect();
    let data = NetworkData::new(networks)?;
    // reuse the fit's seed lineage so the report is reproducible from the
    // fit result alone
    let seed = match args.seed {
        Some(s) => s,
        None => report.seed()?,
    };
    let mut cfg = McmcConfig::for_nodes(data.networks()[0].graph.n(), seed);
    cfg.draws = args.draws;
    let gof_report = gof::gof_compare(&data, &theta, args.draws, &cfg)?;

    let mut out = String::new();
    writeln!(out, "command\tgof").unwrap();
    writeln!(out, "seed\t{seed}").unwrap();
    writeln!(out, "draws\t{}", gof_report.draws).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "family\tbin\tobserved\tq025\tq500\tq975\toutside").unwrap();
    for fam in &gof_report.families {
        for b in 0..fam.bins.len() {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                fam.family,
                fam.bins[b],
                fam.observed[b],
                fam.lower[b],
                fam.median[b],
                fam.upper[b],
                fam.outside[b]
            )
            .unwrap();
        }
    }
    write_output(&args.output, &out)
}

fn run_enumerate(args: EnumerateArgs) -> CliResult {
    let config = formats::parse_model_config(&read_file(&args.model)?)?;
    let attrs = load_attrs(&args.attrs, args.n)?;
    let spec = config.instantiate(args.n, &attrs)?;
    let mut out = String::new();
    writeln!(out, "command\tenumerate").unwrap();
    if args.mle {
        let graphs_path = args.graphs.as_ref().ok_or_else(|| {
            CliError::Model(ErgmError::Invalid("--mle needs --graphs".into()))
        })?;
        let graphs = formats::parse_graphs(&read_file(graphs_path)?)?;
        let specs = formats::instantiate_for_graphs(&config, &graphs, &attrs)?;
        let networks = graphs
            .into_iter()
            .zip(specs)
            .map(|(graph, spec)| Network {
                spec,
                graph,
                attrs: attrs.clone(),
                mask: None,
            })
            .collect();
        let data = NetworkData::new(networks)?;
        let fit = estimate::exact_fit(&data)?;
        writeln!(out, "log_lik_iterations\t{}", fit.diagnostics.iterations).unwrap();
        for (i, name) in fit.param_names.iter().enumerate() {
            writeln!(out, "theta_{name}\t{}", fmt_num(fit.theta_hat[i])).unwrap();
            writeln!(out, "se_{name}\t{}", fmt_num(fit.std_errors[i])).unwrap();
        }
    } else {
        let theta = formats::parse_theta(args.theta.as_deref().ok_or_else(|| {
            CliError::Model(ErgmError::Invalid("--theta required".into()))
        })?)?;
        if args.moments {
            let mom = exact::exact_moments_with_cap(&spec, &attrs, &theta, args.cap)?;
            writeln!(out, "log_normalizer\t{}", fmt_num(mom.log_normalizer)).unwrap();
            for (a, term) in spec.terms().iter().enumerate() {
                writeln!(out, "mean_{}\t{}", term.name(), fmt_num(mom.mean[a])).unwrap();
            }
            for (a, term) in spec.terms().iter().enumerate() {
                writeln!(out, "var_{}\t{}", term.name(), fmt_num(mom.covariance[(a, a)])).unwrap();
            }
        } else {
            let psi = exact::log_normalizer_with_cap(&spec, &attrs, &theta, args.cap)?;
            writeln!(out, "log_normalizer\t{}", fmt_num(psi)).unwrap();
        }
    }
    write_output(&args.output, &out)
}

fn run_scan(args: ScanArgs) -> CliResult {
    let config = formats::parse_model_config(&read_file(&args.model)?)?;
    let attrs = load_attrs(&args.attrs, args.n)?;
    let spec = config.instantiate(args.n, &attrs)?;
    let grid = formats::parse_grid(&read_file(&args.grid)?)?;
    let cfg = args.chain.config(args.n);
    let report = gof::degeneracy_scan(&spec, &attrs, &grid, &cfg)?;
    let mut out = String::new();
    writeln!(out, "command\tscan").unwrap();
    writeln!(out, "seed\t{}", report.seed).unwrap();
    writeln!(out, "draws_per_chain\t{}", report.draws_per_chain).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "theta\tmean_density\tsd_density\tmc_se\tbimodality_gap").unwrap();
    for row in &report.rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            formats::write_theta(&row.theta),
            row.mean_density,
            row.sd_density,
            row.mc_se_density,
            row.bimodality_gap
        )
        .unwrap();
    }
    write_output(&args.output, &out)
}

fn parse_inclusion(args: &MaskArgs, units: usize) -> Result<Inclusion, CliError> {
    match (&args.probs, args.prob) {
        (Some(list), _) => {
            let ps: Result<Vec<f64>, _> = list.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let ps = ps.map_err(|_| CliError::Model(ErgmError::Parse("bad --probs list".into())))?;
            if ps.len() != units {
                return Err(CliError::Model(ErgmError::Parse(format!(
                    "--probs has {} entries for {units} units",
                    ps.len()
                ))));
            }
            Ok(Inclusion::PerUnit(ps))
        }
        (None, Some(p)) => Ok(Inclusion::Uniform(p)),
        (None, None) => Err(CliError::Model(ErgmError::Invalid(
            "give --prob or --probs".into(),
        ))),
    }
}

fn run_mask(args: MaskArgs) -> CliResult {
    let design = args.design.as_str();
    let mask = match design {
        "ego" | "trace" => {
            let g = match &args.graphs {
                Some(p) => {
                    let graphs = formats::parse_graphs(&read_file(p)?)?;
                    graphs.into_iter().next().unwrap()
                }
                None => match (design, args.n) {
                    // ego-centric masks never read edges, so size suffices
                    ("ego", Some(n)) => Graph::empty(n).map_err(ErgmError::from)?,
                    ("trace", _) => {
                        return Err(CliError::Model(ErgmError::Invalid(
                            "link-tracing needs --graphs to find alters".into(),
                        )));
                    }
                    _ => {
                        return Err(CliError::Model(ErgmError::Invalid(
                            "give --n or --graphs".into(),
                        )));
                    }
                },
            };
            let incl = parse_inclusion(&args, g.n())?;
            if design == "ego" {
                missing::ego_sample(&g, &incl, args.seed)?
            } else {
                missing::link_trace(&g, &incl, args.waves, args.seed)?
            }
        }
        "subgraph" => {
            let blocks_arg = args.blocks.as_ref().ok_or_else(|| {
                CliError::Model(ErgmError::Invalid("subgraph design needs --blocks".into()))
            })?;
            let assignment: Result<Vec<u32>, _> =
                blocks_arg.split(',').map(|t| t.trim().parse::<u32>()).collect();
            let blocks = BlockStructure::new(
                assignment.map_err(|_| CliError::Model(ErgmError::Parse("bad --blocks".into())))?,
            )?;
            let incl = parse_inclusion(&args, blocks.num_blocks())?;
            missing::subgraph_sample(&blocks, &incl, args.seed)?
        }
        "mar" => {
            let n = args.n.ok_or_else(|| {
                CliError::Model(ErgmError::Invalid("mar design needs --n".into()))
            })?;
            let q = args.q.ok_or_else(|| {
                CliError::Model(ErgmError::Invalid("mar design needs --q".into()))
            })?;
            missing::mar_mask(n, q, args.seed)?
        }
        "rds" | "respondent-driven" => {
            return Err(CliError::Model(ErgmError::NonIgnorableDesign(
                "respondent-driven sampling violates ignorability and is not supported".into(),
            )));
        }
        other => {
            return Err(CliError::Model(ErgmError::Parse(format!(
                "unknown design `{other}` (ego, trace, subgraph, mar)"
            ))));
        }
    };
    // all constructible designs are ignorable; assert the invariant held
    debug_assert!(Design::Mar { q: 0.0 }.ignorable());
    let mut out = format!(
        "# design {} seed {} (unobserved dyads listed, 1-based)\n",
        design, args.seed
    );
    out.push_str(&formats::write_mask(&mask));
    write_output(&args.output, &out)
}
