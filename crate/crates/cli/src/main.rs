//! `cubic-mf`: equilibrium opinions, transitions and finite-size checks for
//! the cubic mean-field Ising model.

mod commands;
mod error;
mod output;
mod settings;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;
use crate::settings::{read_config, Settings};

/// Declares an option group whose fields are all optional flags, plus the
/// list of `(key, value)` pairs that overlays the config file.
macro_rules! flag_group {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty = $key:literal),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Default, Args)]
        pub struct $name {
            $($(#[$fm])* #[arg(long = $key, allow_negative_numbers = true)] pub $field: Option<$ty>,)*
        }

        impl $name {
            pub fn flags(&self) -> Vec<(&'static str, Option<String>)> {
                vec![$(($key, self.$field.as_ref().map(|v| v.to_string()))),*]
            }
        }
    };
}

flag_group!(ModelArgs {
    /// `one` or `two`.
    model: String = "model",
    /// Cubic coupling (one-component).
    k: f64 = "K",
    /// Pair coupling (one-component).
    j: f64 = "J",
    /// External field (one-component).
    h: f64 = "h",
    k111: f64 = "K111",
    k112: f64 = "K112",
    k122: f64 = "K122",
    k222: f64 = "K222",
    j11: f64 = "J11",
    j12: f64 = "J12",
    j22: f64 = "J22",
    h1: f64 = "h1",
    h2: f64 = "h2",
    /// Internal equilibrium of group 1, sets h1.
    m1star: f64 = "m1star",
    /// Internal equilibrium of group 2, sets h2.
    m2star: f64 = "m2star",
    /// Fraction of group 1 (AI agents).
    alpha: f64 = "alpha",
});

flag_group!(SolverArgs {
    fp_tol: f64 = "fp-tol",
    max_iter: usize = "max-iter",
    damping: f64 = "damping",
    n_starts: usize = "n-starts",
    dedup_tol: f64 = "dedup-tol",
    grid_resolution: f64 = "grid-resolution",
    residual_tol: f64 = "residual-tol",
    tie_tol: f64 = "tie-tol",
});

flag_group!(JumpArgs {
    /// Smallest change of the order parameter between rows flagged as a jump.
    jump_threshold: f64 = "jump-threshold",
    /// Final bracket width of a refined transition.
    transition_tol: f64 = "transition-tol",
});

flag_group!(SweepArgs {
    /// Parameter(s) to vary, comma-separated names move together.
    vary: String = "vary",
    from: f64 = "from",
    to: f64 = "to",
    steps: usize = "steps",
    /// Path of the jump table (default: `jumps.csv` next to --out).
    jumps: String = "jumps",
});

flag_group!(DiagramArgs {
    /// Horizontal axis, `name[,name]:from:to:steps`.
    x: String = "x",
    /// Vertical axis, `name[,name]:from:to:steps`.
    y: String = "y",
    /// Largest number of grid cells.
    max_cells: usize = "max-cells",
});

flag_group!(CriticalArgs {
    /// `K` or `alpha`.
    target: String = "target",
    /// Points of the coarse alpha scan.
    alpha_steps: usize = "alpha-steps",
    /// Scan range for K when no symmetric shortcut applies.
    from: f64 = "from",
    to: f64 = "to",
    steps: usize = "steps",
});

flag_group!(SizeArgs {
    /// Number of agents (one-component).
    n: u64 = "N",
    /// Number of group-1 agents.
    n1: u64 = "N1",
    /// Number of group-2 agents.
    n2: u64 = "N2",
});

flag_group!(ChainArgs {
    sweeps: u64 = "sweeps",
    burn_in: u64 = "burn-in",
    seed: u64 = "seed",
    /// Keep every n-th sweep after burn-in.
    thin: u64 = "thin",
});

#[derive(Debug, Parser)]
#[command(name = "cubic-mf", version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key = value` settings file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps and multi-start searches.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// `csv` or `csv+svg`.
    #[arg(long, global = true)]
    format: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// All stationary points and their stability.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Global solution along a parameter range, with refined jumps.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        jump: JumpArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Global solution on a two-parameter grid with transition lines.
    Diagram {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        jump: JumpArgs,
        #[command(flatten)]
        axes: DiagramArgs,
    },
    /// Critical cubic coupling or critical AI fraction.
    Critical {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        jump: JumpArgs,
        #[command(flatten)]
        critical: CriticalArgs,
    },
    /// Exact free energy and moments of a finite system.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        size: SizeArgs,
    },
    /// Metropolis estimate of the mean opinion of a finite system.
    Mc {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        size: SizeArgs,
        #[command(flatten)]
        chain: ChainArgs,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::Sweep { .. } => "sweep",
            Command::Diagram { .. } => "diagram",
            Command::Critical { .. } => "critical",
            Command::Oracle { .. } => "oracle",
            Command::Mc { .. } => "mc",
        }
    }

    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        match self {
            Command::Solve { model, solver } => [model.flags(), solver.flags()].concat(),
            Command::Sweep { model, solver, jump, sweep } => {
                [model.flags(), solver.flags(), jump.flags(), sweep.flags()].concat()
            }
            Command::Diagram { model, solver, jump, axes } => {
                [model.flags(), solver.flags(), jump.flags(), axes.flags()].concat()
            }
            Command::Critical { model, solver, jump, critical } => {
                [model.flags(), solver.flags(), jump.flags(), critical.flags()].concat()
            }
            Command::Oracle { model, size } => [model.flags(), size.flags()].concat(),
            Command::Mc { model, size, chain } => [model.flags(), size.flags(), chain.flags()].concat(),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => read_config(path)?,
        None => Default::default(),
    };
    let mut flags = cli.command.flags();
    flags.push(("out", cli.out.as_ref().map(|p| p.display().to_string())));
    flags.push(("threads", cli.threads.map(|n| n.to_string())));
    flags.push(("format", cli.format.clone()));
    let mut settings = Settings::merge(file, flags);

    if let Some(raw) = settings.raw("threads") {
        let n: usize = raw.parse().map_err(|_| CliError::Input(format!("invalid value `{raw}` for `threads`")))?;
        if n == 0 {
            return Err(CliError::Input("`threads` must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot start {n} threads: {e}")))?;
    }

    let output = commands::dispatch(cli.command.name(), &mut settings)?;
    output.commit()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
