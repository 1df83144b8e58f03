use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cavity_gates_cli::scenario::{Grid, SweepSpec};
use cavity_gates_cli::{run, validate, Format, Kind, Scenario, Violation};

/// Gate simulations for atomic ensembles coupled through cavity modes.
#[derive(Parser)]
#[command(name = "sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exchange gate of the common-cavity model.
    Iswap(Flags),
    /// Solve the elimination conditions over a (mu, n, k) grid.
    CdeSolve(Flags),
    /// Collective blockade of the doubly excited state.
    Blockade(Flags),
    /// Photon-number blockade of the controlled swap.
    Cswap(Flags),
    /// Compare the microscopic model with the five-state model.
    OracleCompare(Flags),
    /// Run one kind over a list of values of one parameter.
    Sweep(Flags),
    /// Check a scenario without running it.
    Validate {
        /// Kind to validate against; defaults to the config's.
        #[arg(long)]
        kind: Option<String>,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(clap::Args, Default)]
struct Flags {
    /// Scenario JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for artifacts; without it the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also emit the effective Hamiltonian as JSON.
    #[arg(long)]
    dump_hamiltonian: bool,

    #[arg(long)]
    n_atoms: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    omega_sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega_pi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    g_pi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long)]
    omega_k0: Option<f64>,
    /// Gate or end time.
    #[arg(long)]
    t: Option<f64>,
    /// Grid axes such as `mu=0,1 n=0..2 k=1..4` (ranges inclusive).
    #[arg(long, num_args = 1..)]
    grid: Vec<String>,
    /// Comma-separated |omega_pi| / (N omega_sigma) values.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    #[arg(long)]
    theta_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega_1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega_s: Option<f64>,
    /// Comma-separated photon numbers of the control mode.
    #[arg(long, value_delimiter = ',')]
    photons: Option<Vec<u32>>,
    #[arg(long)]
    cutoff: Option<u32>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    dimension_cap: Option<usize>,
    /// Qubit input for oracle-compare: uniform, 00, 10, 01 or 11.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    sweep_kind: Option<String>,
    #[arg(long)]
    sweep_param: Option<String>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    sweep_values: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_axis(spec: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        if let Some((a, b)) = part.split_once("..") {
            let a: u32 = a.trim().parse().map_err(|_| format!("bad range start `{a}`"))?;
            let b: u32 = b.trim().parse().map_err(|_| format!("bad range end `{b}`"))?;
            if b < a {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.trim().parse().map_err(|_| format!("bad value `{part}`"))?);
        }
    }
    Ok(out)
}

fn parse_grid(tokens: &[String], base: Option<Grid>) -> Result<Option<Grid>, Violation> {
    if tokens.is_empty() {
        return Ok(base);
    }
    let mut grid = base.unwrap_or_default();
    for tok in tokens {
        let (name, spec) = tok
            .split_once('=')
            .ok_or_else(|| Violation::new("params.grid", format!("expected axis=values, got `{tok}`")))?;
        let values = parse_axis(spec).map_err(|e| Violation::new(format!("params.grid.{name}"), e))?;
        match name {
            "mu" => grid.mu = Some(values),
            "n" => grid.n = Some(values),
            "k" => grid.k = Some(values),
            _ => return Err(Violation::new("params.grid", format!("unknown axis `{name}`"))),
        }
    }
    Ok(Some(grid))
}

/// Config file first, then flags on top.
fn assemble(kind: Option<&str>, f: Flags) -> Result<Scenario, Violation> {
    let mut s = match &f.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Violation::new("config", format!("cannot read {}: {e}", path.display())))?;
            Scenario::from_json(&text)?
        }
        None => Scenario::default(),
    };
    if let Some(k) = kind {
        s.kind = Some(k.to_string());
    }
    let p = &mut s.params;
    macro_rules! set {
        ($($field:ident),*) => {$( if f.$field.is_some() { p.$field = f.$field.clone(); } )*};
    }
    set!(
        n_atoms,
        omega_sigma,
        omega_pi,
        g,
        g_pi,
        delta,
        omega_k0,
        t,
        ratios,
        theta_max,
        omega_1,
        omega_s,
        photons,
        cutoff,
        samples,
        dimension_cap,
        input
    );
    p.grid = parse_grid(&f.grid, p.grid.take())?;
    if f.sweep_kind.is_some() || f.sweep_param.is_some() || f.sweep_values.is_some() {
        let mut sw =
            p.sweep.take().unwrap_or(SweepSpec { kind: String::new(), parameter: String::new(), values: Vec::new() });
        if let Some(k) = f.sweep_kind {
            sw.kind = k;
        }
        if let Some(name) = f.sweep_param {
            sw.parameter = name;
        }
        if let Some(v) = f.sweep_values {
            sw.values = v;
        }
        p.sweep = Some(sw);
    }
    if f.out.is_some() {
        s.output.dir = f.out;
    }
    if f.format.is_some() {
        s.output.format = f.format;
    }
    s.output.dump_hamiltonian |= f.dump_hamiltonian;
    if let Some(seed) = f.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn report_violations(v: &[Violation]) -> ExitCode {
    for x in v {
        eprintln!("{x}");
    }
    ExitCode::from(2)
}

fn execute(kind: Kind, flags: Flags) -> ExitCode {
    let scenario = match assemble(Some(kind.name()), flags) {
        Ok(s) => s,
        Err(v) => return report_violations(&[v]),
    };
    let outcome = match run(&scenario) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match &scenario.output.dir {
        Some(dir) => match outcome.write_to(dir) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error: writing {}: {e}", dir.display());
                return ExitCode::from(1);
            }
        },
        None => {
            let mut stdout = std::io::stdout().lock();
            for a in outcome.artifacts.iter().filter(|a| a == &&outcome.artifacts[0] || a.name == "hamiltonian.json") {
                if let Err(e) = stdout.write_all(a.contents.as_bytes()) {
                    if e.kind() == std::io::ErrorKind::BrokenPipe {
                        return ExitCode::SUCCESS;
                    }
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
        }
    }
    if outcome.all_infeasible {
        eprintln!("no feasible point in the grid");
    }
    ExitCode::from(outcome.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Iswap(f) => execute(Kind::Iswap, f),
        Command::CdeSolve(f) => execute(Kind::SqrtIswapCde, f),
        Command::Blockade(f) => execute(Kind::Blockade, f),
        Command::Cswap(f) => execute(Kind::Cswap, f),
        Command::OracleCompare(f) => execute(Kind::OracleCompare, f),
        Command::Sweep(f) => execute(Kind::Sweep, f),
        Command::Validate { kind, flags } => {
            let s = match assemble(kind.as_deref(), flags) {
                Ok(s) => s,
                Err(v) => return report_violations(&[v]),
            };
            let v = validate(&s);
            if v.is_empty() {
                println!("ok");
                ExitCode::SUCCESS
            } else {
                report_violations(&v)
            }
        }
    }
}
