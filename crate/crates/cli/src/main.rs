mod commands;
mod config;
mod error;
mod output;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use error::CliError;
use output::Outputs;

/// Exact-diagonalization OTOC analysis of N bosons in two modes coupled to an impurity qubit.
///
/// Energies and times are in units of the tunneling J (ħ = 1). Exit codes:
/// 0 success, 2 invalid arguments or input, 3 computation failure (including
/// partially failed sweeps, whose completed points are still written), 4 I/O failure.
#[derive(Parser, Debug)]
#[command(name = "otoc-lab", version, about, long_about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Number of bosons N (Hilbert-space dimension 2(N+1)).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Boson self-interaction U, in units of J.
    #[arg(long, global = true, conflicts_with_all = ["lambda", "big_lambda"])]
    u: Option<f64>,
    /// Reduced coupling λ = (Λ − Λ_c)/|Λ_c|, dimensionless; sets U.
    #[arg(long, global = true, allow_negative_numbers = true, conflicts_with = "big_lambda")]
    lambda: Option<f64>,
    /// Coupling Λ = UN/2J, dimensionless; sets U.
    #[arg(long = "big-lambda", global = true, allow_negative_numbers = true)]
    big_lambda: Option<f64>,
    /// Qubit tunneling Jᵃ, in units of J [default: 1].
    #[arg(long = "ja", global = true)]
    j_a: Option<f64>,
    /// Boson-qubit coupling W, in units of J [default: 1].
    #[arg(long, global = true, allow_negative_numbers = true)]
    w: Option<f64>,
    /// Output directory [default: otoc-lab-out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct TimeArgs {
    /// End of the time grid, in units of 1/J [default: 200].
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Number of time points, endpoints included [default: 4000].
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct AverageArgs {
    /// Horizon T of the finite-time variance, in units of 1/J [default: 5000].
    #[arg(long)]
    horizon: Option<f64>,
    /// Number of sampled times for the variance [default: 4000].
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Energies and parity labels of all 2(N+1) levels [default model: N=50, λ=2].
    Spectrum,
    /// F(t) for A = B = operator in a chosen state, plus its long-time average
    /// [default: N=50, λ=2, σ_x, ground state, t ∈ [0, 200] with 4000 points].
    Otoc {
        /// sigma_x, sigma_z or Sz_over_N [default: sigma_x].
        #[arg(long)]
        operator: Option<String>,
        /// ground, eigen:K, product (|ψ₀⟩_B ⊗ |+⟩_x) or cat [default: ground].
        #[arg(long)]
        state: Option<String>,
        #[command(flatten)]
        time: TimeArgs,
        #[command(flatten)]
        average: AverageArgs,
    },
    /// Ground-state F̄, participation ratio and optional variance over a λ grid
    /// for several N [default: λ ∈ [−4, 2] with 61 points, N ∈ {20, 50, 200}].
    Sweep {
        /// Lowest λ [default: −4].
        #[arg(long = "lambda-min", allow_negative_numbers = true)]
        lambda_min: Option<f64>,
        /// Highest λ [default: 2].
        #[arg(long = "lambda-max", allow_negative_numbers = true)]
        lambda_max: Option<f64>,
        /// Number of λ points [default: 61].
        #[arg(long = "lambda-points")]
        lambda_points: Option<usize>,
        /// Comma-separated system sizes [default: 20,50,200].
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
        /// Also compute the temporal variance of F(t).
        #[arg(long)]
        variance: bool,
        #[command(flatten)]
        average: AverageArgs,
    },
    /// C̄/2 = 1 − F̄ over a (Λ, W) grid [default: N=100, Λ ∈ [−4, 1] × W ∈ [0, 3], 60 × 60].
    PhaseDiagram {
        /// Lowest Λ [default: −4].
        #[arg(long = "big-lambda-min", allow_negative_numbers = true)]
        big_lambda_min: Option<f64>,
        /// Highest Λ [default: 1].
        #[arg(long = "big-lambda-max", allow_negative_numbers = true)]
        big_lambda_max: Option<f64>,
        /// Number of Λ points [default: 60].
        #[arg(long = "big-lambda-points")]
        big_lambda_points: Option<usize>,
        /// Lowest W, units of J [default: 0].
        #[arg(long = "w-min", allow_negative_numbers = true)]
        w_min: Option<f64>,
        /// Highest W, units of J [default: 3].
        #[arg(long = "w-max", allow_negative_numbers = true)]
        w_max: Option<f64>,
        /// Number of W points [default: 60].
        #[arg(long = "w-points")]
        w_points: Option<usize>,
    },
    /// Finite-size exponents at Λ = Λ_c: b (1 − F̄ᶜ ∼ N^−b), d (qubit t_min ∼ N^d)
    /// or z (Ŝ_z/N t_min) [default: b, N = 8 sizes geometric in [50, 1500]].
    Scaling {
        /// b, d or z [default: b].
        #[arg(long)]
        exponent: Option<String>,
        /// Comma-separated system sizes [default: 50,81,…,1500].
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
        /// Comma-separated W values for b, units of J [default: 0.5,1,2].
        #[arg(long, value_delimiter = ',')]
        ws: Option<Vec<f64>>,
        /// Qubit operator for d [default: both sigma_x and sigma_z].
        #[arg(long)]
        operator: Option<String>,
        /// For z: with, without or both [default: both].
        #[arg(long)]
        qubit: Option<String>,
    },
    /// Eigenstate F̄_n against E_n with parity labels [default: N=100, Λ=−10, σ_x].
    Esqpt {
        /// sigma_x, sigma_z or Sz_over_N [default: sigma_x].
        #[arg(long)]
        operator: Option<String>,
    },
    /// σ_x OTOC of |ψ₀⟩_B ⊗ |+⟩_x via the forward/backward echo [default: N=50, λ=−2].
    Echo {
        #[command(flatten)]
        time: TimeArgs,
    },
    /// One dataset per figure panel with the published parameters as defaults.
    Figures {
        /// Comma-separated subset, e.g. fig2,fig5 [default: fig1,…,fig6].
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        /// Run the participation-ratio figure at N=1000 instead of N=300.
        #[arg(long = "full-size")]
        full_size: bool,
        /// Shrink every figure to smoke-test sizes.
        #[arg(long)]
        quick: bool,
    },
    /// SVG plots of CSV files produced by the other subcommands.
    Render {
        /// CSV files to plot.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Otoc { .. } => "otoc",
            Command::Sweep { .. } => "sweep",
            Command::PhaseDiagram { .. } => "phase-diagram",
            Command::Scaling { .. } => "scaling",
            Command::Esqpt { .. } => "esqpt",
            Command::Echo { .. } => "echo",
            Command::Figures { .. } => "figures",
            Command::Render { .. } => "render",
        }
    }
}

fn time_into(c: &mut RunConfig, t: &TimeArgs) {
    c.time.t_max = t.t_max;
    c.time.points = t.points;
}

fn average_into(c: &mut RunConfig, a: &AverageArgs) {
    c.average.horizon = a.horizon;
    c.average.n_samples = a.samples;
}

/// The flags as a sparse config, to be laid over the config file.
fn flags_config(cli: &Cli) -> RunConfig {
    let mut c = RunConfig { subcommand: Some(cli.command.name().into()), ..Default::default() };
    let g = &cli.common;
    c.model.n = g.n;
    c.model.u = g.u;
    c.model.lambda = g.lambda;
    c.model.big_lambda = g.big_lambda;
    c.model.j_a = g.j_a;
    c.model.w = g.w;
    c.run.out = g.out.clone();
    c.run.workers = g.workers;
    match &cli.command {
        Command::Spectrum | Command::Render { .. } => {}
        Command::Otoc { operator, state, time, average } => {
            c.analysis.operator = operator.clone();
            c.analysis.state = state.clone();
            time_into(&mut c, time);
            average_into(&mut c, average);
        }
        Command::Sweep { lambda_min, lambda_max, lambda_points, ns, variance, average } => {
            c.sweep.lambda_min = *lambda_min;
            c.sweep.lambda_max = *lambda_max;
            c.sweep.lambda_points = *lambda_points;
            c.sweep.ns = ns.clone();
            c.sweep.variance = variance.then_some(true);
            average_into(&mut c, average);
        }
        Command::PhaseDiagram { big_lambda_min, big_lambda_max, big_lambda_points, w_min, w_max, w_points } => {
            c.sweep.big_lambda_min = *big_lambda_min;
            c.sweep.big_lambda_max = *big_lambda_max;
            c.sweep.big_lambda_points = *big_lambda_points;
            c.sweep.w_min = *w_min;
            c.sweep.w_max = *w_max;
            c.sweep.w_points = *w_points;
        }
        Command::Scaling { exponent, ns, ws, operator, qubit } => {
            c.analysis.exponent = exponent.clone();
            c.sweep.ns = ns.clone();
            c.sweep.ws = ws.clone();
            c.analysis.operator = operator.clone();
            c.analysis.qubit = qubit.clone();
        }
        Command::Esqpt { operator } => c.analysis.operator = operator.clone(),
        Command::Echo { time } => time_into(&mut c, time),
        Command::Figures { only, full_size, quick } => {
            c.analysis.figures = only.clone();
            c.analysis.full_size = full_size.then_some(true);
            c.analysis.quick = quick.then_some(true);
        }
    }
    c
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let name = cli.command.name();
    let mut c = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(s) = &c.subcommand {
        if s != name {
            return Err(CliError::BadArgs(format!("config is for '{s}', not '{name}'")));
        }
    }
    c.check_coupling()?;
    c.overlay(&flags_config(cli));
    if commands::GRID_COMMANDS.contains(&name) && c.has_coupling() {
        return Err(CliError::BadArgs(format!("'{name}' sets the coupling itself; drop --u/--lambda/--big-lambda")));
    }
    commands::apply_defaults(name, &mut c);
    if c.average.freq_tol != Some(otoc_lab::otoc::FREQUENCY_TOL) || c.average.deg_rel != Some(otoc_lab::spectral::DEGENERACY_REL) {
        return Err(CliError::BadArgs("freq_tol and deg_rel are fixed in this build; leave them at their recorded values".into()));
    }
    if c.run.workers == Some(0) {
        return Err(CliError::BadArgs("workers must be ≥ 1".into()));
    }
    Ok(c)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let config = resolve(&cli)?;
    if let Some(w) = config.run.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Compute(format!("thread pool: {e}")))?;
    }
    let outputs = match &cli.command {
        Command::Spectrum => commands::cmd_spectrum(&config)?,
        Command::Otoc { .. } => commands::cmd_otoc(&config)?,
        Command::Sweep { .. } => commands::cmd_sweep(&config)?,
        Command::PhaseDiagram { .. } => commands::cmd_phase_diagram(&config)?,
        Command::Scaling { .. } => commands::cmd_scaling(&config)?,
        Command::Esqpt { .. } => commands::cmd_esqpt(&config)?,
        Command::Echo { .. } => commands::cmd_echo(&config)?,
        Command::Figures { .. } => commands::cmd_figures(&config)?,
        Command::Render { inputs } => {
            let mut out = Outputs::default();
            for path in inputs {
                let (name, svg) = render::render_file(path)?;
                out.add(name, svg);
            }
            out
        }
    };
    let dir = config.out_dir();
    let manifest = output::commit(&dir, &config, &outputs, started)?;
    for name in outputs.names() {
        println!("{}", dir.join(name).display());
    }
    println!("{}", manifest.display());
    if !outputs.partial_failures.is_empty() {
        for f in &outputs.partial_failures {
            log::error!("failed point: {f}");
        }
        return Err(CliError::Compute(format!("{} points failed; completed points were written", outputs.partial_failures.len())));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("otoc-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
