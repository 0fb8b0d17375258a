//! Command-line front end: yields, expansions, SLD checks, sweeps and the
//! Fock-space scatter experiment.
//!
//! Exit codes: `0` success, `1` I/O failure, `2` usage error, `3` domain or
//! singular-parameter error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qfi_channel::fock::{
    max_entangled, qfi_gamma_fock, scatter_experiment, truncated_coherent, truncated_squeezed, truncated_tmsv,
    ScatterConfig,
};
use qfi_channel::sld::{commutator_expectation, qfi_matrix};
use qfi_channel::{
    high_energy_expansion, low_energy_expansion, make_probe, qfi, weighted_cr_bound, ChannelParamsF64, Parameter,
    ProbeClass, Regime, WeightMatrixF64,
};

#[derive(Debug, Parser)]
#[command(
    name = "qfi-channel",
    version,
    about = "Quantum Fisher information of a thermal-loss channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact yield of one probe class.
    Yield(YieldArgs),
    /// Yields of several classes over a grid of probe energies.
    Sweep(SweepArgs),
    /// Low- or high-energy expansion coefficients.
    Expand(ExpandArgs),
    /// tr[rho [L_gamma, L_N]] for the two-mode squeezed vacuum probe.
    Commute(CommuteArgs),
    /// Full 2x2 QFI matrix and weighted Cramér-Rao costs.
    QfiMatrix(QfiMatrixArgs),
    /// Haar-random scatter of the damping yield at zero temperature.
    Scatter(ScatterArgs),
    /// Damping QFI of a truncated Fock-space probe at zero temperature.
    FockQfi(FockQfiArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParamArg {
    Gamma,
    Nbar,
}

impl From<ParamArg> for Parameter {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::Gamma => Parameter::Gamma,
            ParamArg::Nbar => Parameter::Nbar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    Coherent,
    Thermal,
    Squeezed,
    TwoMode,
}

impl From<ClassArg> for ProbeClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Coherent => ProbeClass::Coherent,
            ClassArg::Thermal => ProbeClass::Thermal,
            ClassArg::Squeezed => ProbeClass::SingleModeSqueezed,
            ClassArg::TwoMode => ProbeClass::TwoModeSqueezedVacuum,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegimeArg {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum TextFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum TableFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FockProbe {
    Coherent,
    Squeezed,
    Tmsv,
    MaxEnt,
}

#[derive(Debug, Args)]
struct ChannelArgs {
    /// Damping exponent gamma >= 0.
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    /// Mean thermal photon number N >= 0.
    #[arg(long, allow_negative_numbers = true)]
    nbar: f64,
}

impl ChannelArgs {
    fn theta(&self) -> Result<ChannelParamsF64, CliError> {
        Ok(ChannelParamsF64::new(self.gamma, self.nbar)?)
    }
}

#[derive(Debug, Args)]
struct YieldArgs {
    #[arg(long, value_enum)]
    param: ParamArg,
    #[arg(long, value_enum)]
    class: ClassArg,
    /// Probe energy (mean photon number in the channel mode).
    #[arg(long, allow_negative_numbers = true)]
    n: f64,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_enum, default_value_t)]
    format: TextFormat,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    param: ParamArg,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, allow_negative_numbers = true)]
    n_min: f64,
    #[arg(long)]
    n_max: f64,
    #[arg(long)]
    points: usize,
    /// Geometric grid instead of a linear one.
    #[arg(long)]
    log: bool,
    /// Comma-separated subset of classes, in output column order.
    #[arg(long, value_enum, value_delimiter = ',')]
    classes: Option<Vec<ClassArg>>,
    #[arg(long, value_enum, default_value_t)]
    format: TableFormat,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExpandArgs {
    #[arg(long, value_enum)]
    param: ParamArg,
    #[arg(long, value_enum)]
    regime: RegimeArg,
    #[arg(long, value_enum)]
    class: ClassArg,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_enum, default_value_t)]
    format: TextFormat,
}

#[derive(Debug, Args)]
struct CommuteArgs {
    #[arg(long, allow_negative_numbers = true)]
    n: f64,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_enum, default_value_t)]
    format: TextFormat,
}

#[derive(Debug, Args)]
struct QfiMatrixArgs {
    #[arg(long, value_enum)]
    class: ClassArg,
    #[arg(long, allow_negative_numbers = true)]
    n: f64,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_enum, default_value_t)]
    format: TextFormat,
}

#[derive(Debug, Args)]
struct ScatterArgs {
    #[arg(long)]
    samples: usize,
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    /// Fock cutoff of both modes.
    #[arg(long)]
    dim: usize,
    /// Cutoff of the ancilla when it differs from --dim.
    #[arg(long)]
    dim_b: Option<usize>,
    /// Comma-separated dimensions of the maximally entangled reference states.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    max_ent_dims: Vec<usize>,
    #[arg(long)]
    seed: u64,
    /// Worker threads; output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FockQfiArgs {
    #[arg(long, value_enum)]
    state: FockProbe,
    #[arg(long, allow_negative_numbers = true)]
    n: f64,
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long)]
    cutoff: usize,
    #[arg(long, value_enum, default_value_t)]
    format: TextFormat,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Model(qfi_channel::Error),
    Io(io::Error),
}

impl From<qfi_channel::Error> for CliError {
    fn from(e: qfi_channel::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Model(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

/// Number format shared by every command: 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Yield(a) => cmd_yield(a, out),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Expand(a) => cmd_expand(a, out),
        Command::Commute(a) => cmd_commute(a, out),
        Command::QfiMatrix(a) => cmd_qfi_matrix(a, out),
        Command::Scatter(a) => cmd_scatter(a, out),
        Command::FockQfi(a) => cmd_fock_qfi(a, out),
    }
}

fn cmd_yield(a: YieldArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let theta = a.channel.theta()?;
    let param: Parameter = a.param.into();
    let class: ProbeClass = a.class.into();
    let j = qfi(param, class, a.n, &theta)?;
    match a.format {
        TextFormat::Text => {
            writeln!(
                out,
                "param={param} class={class} n={} gamma={} nbar={}",
                a.n, a.channel.gamma, a.channel.nbar
            )?;
            writeln!(out, "J={}", fmt_num(j))?;
        }
        TextFormat::Json => {
            let v = json!({
                "param": param.name(), "class": class.name(), "n": a.n,
                "gamma": a.channel.gamma, "nbar": a.channel.nbar, "J": j,
            });
            writeln!(out, "{v}")?;
        }
    }
    Ok(())
}

/// Linear or geometric grid whose end points are exactly `lo` and `hi`.
pub fn energy_grid(lo: f64, hi: f64, points: usize, log: bool) -> Vec<f64> {
    let last = points - 1;
    (0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == last {
                hi
            } else {
                let f = i as f64 / last as f64;
                if log {
                    lo * (hi / lo).powf(f)
                } else {
                    lo + (hi - lo) * f
                }
            }
        })
        .collect()
}

fn open_output<'a>(path: &Option<PathBuf>, out: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(out),
    })
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    if a.points < 2 {
        return Err(CliError::Usage("--points must be >= 2".into()));
    }
    if !(a.n_min >= 0.0) || !(a.n_min < a.n_max) || !a.n_max.is_finite() {
        return Err(CliError::Usage("need 0 <= --n-min < --n-max".into()));
    }
    if a.log && a.n_min <= 0.0 {
        return Err(CliError::Usage("--log requires --n-min > 0".into()));
    }
    let theta = a.channel.theta()?;
    let param: Parameter = a.param.into();
    let classes: Vec<ProbeClass> = match &a.classes {
        Some(c) => c.iter().map(|&c| c.into()).collect(),
        None => ProbeClass::ALL.to_vec(),
    };
    let grid = energy_grid(a.n_min, a.n_max, a.points, a.log);

    let mut warned = vec![false; classes.len()];
    let mut rows = Vec::with_capacity(grid.len());
    for &n in &grid {
        let mut row = Vec::with_capacity(classes.len());
        for (k, &class) in classes.iter().enumerate() {
            row.push(match qfi(param, class, n, &theta) {
                Ok(j) => j,
                Err(e) => {
                    if !warned[k] {
                        writeln!(err, "warning: {class} column set to nan: {e}")?;
                        warned[k] = true;
                    }
                    f64::NAN
                }
            });
        }
        rows.push(row);
    }

    let columns: Vec<String> = classes
        .iter()
        .map(|c| format!("J_{}", c.name().replace('-', "_")))
        .collect();
    let mut sink = open_output(&a.output, out)?;
    match a.format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            let mut header = vec!["n".to_string()];
            header.extend(columns.iter().cloned());
            w.write_record(&header)?;
            for (n, row) in grid.iter().zip(&rows) {
                let mut rec = vec![fmt_num(*n)];
                rec.extend(row.iter().map(|&x| fmt_num(x)));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
        TableFormat::Json => {
            for (n, row) in grid.iter().zip(&rows) {
                let mut obj = serde_json::Map::new();
                obj.insert("n".into(), json!(n));
                for (name, &x) in columns.iter().zip(row) {
                    obj.insert(
                        name.clone(),
                        if x.is_nan() { serde_json::Value::Null } else { json!(x) },
                    );
                }
                writeln!(sink, "{}", serde_json::Value::Object(obj))?;
            }
        }
    }
    sink.flush()?;
    Ok(())
}

fn cmd_expand(a: ExpandArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let theta = a.channel.theta()?;
    let param: Parameter = a.param.into();
    let class: ProbeClass = a.class.into();
    let c = match a.regime {
        RegimeArg::Low => low_energy_expansion(param, class, &theta)?,
        RegimeArg::High => high_energy_expansion(param, class, &theta)?,
    };
    // low: J0 + J1 n, high: J(-1) n + J0
    let (lead_name, lead, next_name, next) = match c.regime {
        Regime::LowEnergy => ("J(0)", c.constant, "J(1)", c.slope),
        Regime::HighEnergy => ("J(-1)", c.slope, "J(0)", c.constant),
    };
    match a.format {
        TextFormat::Text => {
            writeln!(out, "{lead_name}={}", fmt_num(lead))?;
            writeln!(out, "{next_name}={}", fmt_num(next))?;
        }
        TextFormat::Json => {
            let v = json!({
                "param": param.name(), "class": class.name(),
                "regime": match c.regime { Regime::LowEnergy => "low", Regime::HighEnergy => "high" },
                lead_name: lead, next_name: next,
            });
            writeln!(out, "{v}")?;
        }
    }
    Ok(())
}

fn cmd_commute(a: CommuteArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let theta = a.channel.theta()?;
    let probe = make_probe(ProbeClass::TwoModeSqueezedVacuum, a.n)?;
    let c = commutator_expectation(&probe, &theta)?;
    match a.format {
        TextFormat::Text => writeln!(out, "re={} im={}", fmt_num(c.re), fmt_num(c.im))?,
        TextFormat::Json => writeln!(out, "{}", json!({ "re": c.re, "im": c.im }))?,
    }
    Ok(())
}

fn cmd_qfi_matrix(a: QfiMatrixArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let theta = a.channel.theta()?;
    let probe = make_probe(a.class.into(), a.n)?;
    let j = qfi_matrix(&probe, &theta)?;
    let costs = [
        ("gamma", WeightMatrixF64::gamma_only()),
        ("nbar", WeightMatrixF64::nbar_only()),
        ("identity", WeightMatrixF64::identity()),
    ]
    .map(|(name, g)| (name, weighted_cr_bound(&g, j)));
    match a.format {
        TextFormat::Text => {
            writeln!(out, "J_gamma_gamma={}", fmt_num(j[0][0]))?;
            writeln!(out, "J_gamma_nbar={}", fmt_num(j[0][1]))?;
            writeln!(out, "J_nbar_nbar={}", fmt_num(j[1][1]))?;
            for (name, cost) in &costs {
                match cost {
                    Ok(v) => writeln!(out, "cost_{name}={}", fmt_num(*v))?,
                    Err(e) => writeln!(out, "cost_{name}=nan ({e})")?,
                }
            }
        }
        TextFormat::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("J_gamma_gamma".into(), json!(j[0][0]));
            obj.insert("J_gamma_nbar".into(), json!(j[0][1]));
            obj.insert("J_nbar_nbar".into(), json!(j[1][1]));
            for (name, cost) in &costs {
                obj.insert(
                    format!("cost_{name}"),
                    cost.as_ref().map_or(serde_json::Value::Null, |v| json!(v)),
                );
            }
            writeln!(out, "{}", serde_json::Value::Object(obj))?;
        }
    }
    Ok(())
}

fn cmd_scatter(a: ScatterArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = ScatterConfig {
        samples: a.samples,
        gamma: a.gamma,
        dim_a: a.dim,
        dim_b: a.dim_b.unwrap_or(a.dim),
        max_ent_dims: a.max_ent_dims.clone(),
        seed: a.seed,
    };
    let records = match a.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {t} threads: {e}")))?;
            pool.install(|| scatter_experiment(&config))?
        }
        None => scatter_experiment(&config)?,
    };
    let mut sink = open_output(&a.output, out)?;
    {
        let mut w = csv::Writer::from_writer(&mut sink);
        w.write_record(["index", "kind", "n_a", "J_gamma", "entropy", "efficiency"])?;
        for r in &records {
            w.write_record([
                r.index.to_string(),
                r.kind.label(),
                fmt_num(r.n_a),
                fmt_num(r.j_gamma),
                fmt_num(r.entropy),
                fmt_num(r.efficiency),
            ])?;
        }
        w.flush()?;
    }
    sink.flush()?;
    Ok(())
}

fn cmd_fock_qfi(a: FockQfiArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (state, tail) = match a.state {
        FockProbe::Coherent => truncated_coherent(a.n, a.cutoff)?,
        FockProbe::Squeezed => truncated_squeezed(a.n, a.cutoff)?,
        FockProbe::Tmsv => truncated_tmsv(a.n, a.cutoff)?,
        FockProbe::MaxEnt => {
            let d = 2.0 * a.n + 1.0;
            if !(d >= 1.0) || d.fract() != 0.0 {
                return Err(qfi_channel::Error::Domain(format!(
                    "max-ent needs 2n+1 to be a positive integer, got {d}"
                ))
                .into());
            }
            let d = d as usize;
            if d > a.cutoff {
                return Err(
                    qfi_channel::Error::Domain(format!("max-ent dimension {d} exceeds cutoff {}", a.cutoff)).into(),
                );
            }
            (max_entangled(d)?.padded(a.cutoff, a.cutoff)?, 0.0)
        }
    };
    let j = qfi_gamma_fock(&state, a.gamma)?;
    match a.format {
        TextFormat::Text => {
            writeln!(out, "J_gamma={}", fmt_num(j))?;
            writeln!(out, "tail_mass={}", fmt_num(tail))?;
        }
        TextFormat::Json => writeln!(
            out,
            "{}",
            json!({ "J_gamma": j, "tail_mass": tail, "n_a": state.mean_photons_a() })
        )?,
    }
    Ok(())
}
