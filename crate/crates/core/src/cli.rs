//! Command-line front end. Flags override values from the `--config` file,
//! which override built-in defaults.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage, config, or input error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cavity::{
    field_energy, mode_spectrum, oscillator_evolve, synthesize_first_solution, synthesize_second_solution, CavitySpec,
    ModeSet, ModeState,
};
use crate::duality::{dual_rotate, invariants, DualAngle};
use crate::export::Snapshot;
use crate::fock::{
    build_ladder, coherent_state, expectation_scan, field_operators, heisenberg_evolve, position_momentum_ops,
    FockSpec, OperatorLabel, OperatorSnapshot, DEFAULT_DIMENSION_CAP,
};
use crate::grid::GridSpec;
use crate::kinetics::{
    cavity_kgrid_exact, enumerate_channels, lattice_kgrid_exact, photon_flux, summarize, tuple_count, BroadenedDelta,
    ChannelSearch, DeltaKind, OccupationModel, PhononDispersion, DEFAULT_TUPLE_CAP,
};
use crate::lattice::{
    dynamical_eigenmodes, dynamical_matrix_from_force_constants, normal_modes, read_force_constants_csv, ChainSpec,
};
use crate::pairing::{attractive_channels, BandModel, PhononSample, DEFAULT_POLE_GUARD};
use crate::surd::Surd;
use crate::verify::{run_suite, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "phonoscope", version, about = "Cavity acoustic field simulator and verification toolkit")]
pub struct Cli {
    /// TOML config with sections named after subcommands.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path, `-` for standard output.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for parallel scans.
    #[arg(long, global = true, env = "PHONOSCOPE_WORKERS")]
    workers: Option<usize>,
    /// Seed for randomly drawn states and verification samples.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cavity mode spectrum.
    Modes(CavityArgs),
    /// Oscillator trajectories of every mode.
    Evolve(EvolveArgs),
    /// Field snapshot of a closed-form solution.
    Fields(FieldArgs),
    /// Pointwise field invariants, optionally after a dual rotation.
    Invariants(InvariantArgs),
    /// Truncated Fock-space operators or coherent-state expectation scans.
    Quantize(QuantizeArgs),
    /// Normal-mode dispersion of a chain or a force-constant matrix.
    Dispersion(DispersionArgs),
    /// Momentum- and energy-conserving electron-phonon channels.
    Scatter(ScatterArgs),
    /// Phonon-mediated effective interaction and its attractive window.
    Pairing(PairingArgs),
    /// Photon flux of a monochromatic beam.
    Flux(FluxArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct CavityArgs {
    /// Cavity length.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    length: Option<f64>,
    /// Cavity volume.
    #[arg(long = "V")]
    #[serde(rename = "V")]
    volume: Option<f64>,
    /// Sound speed.
    #[arg(long = "c")]
    c: Option<f64>,
    /// Number of modes.
    #[arg(long = "M")]
    #[serde(rename = "modes")]
    modes: Option<usize>,
    /// Mass shared by all modes.
    #[arg(long)]
    mass: Option<f64>,
    #[arg(skip)]
    #[serde(default)]
    mode: Vec<ModeEntry>,
}

/// Initial state of one mode: `q0, p0` or `B, phi`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeEntry {
    m: Option<f64>,
    q0: Option<f64>,
    p0: Option<f64>,
    #[serde(rename = "B")]
    amplitude: Option<f64>,
    phi: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvolveArgs {
    #[command(flatten)]
    #[serde(skip)]
    cavity: CavityArgs,
    /// Final time; defaults to one period of the lowest mode.
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Solution {
    First,
    Second,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldArgs {
    #[command(flatten)]
    #[serde(skip)]
    cavity: CavityArgs,
    /// Grid points along z.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, value_enum)]
    solution: Option<Solution>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct InvariantArgs {
    #[command(flatten)]
    #[serde(flatten)]
    fields: FieldArgs,
    /// Dual rotation angle applied before evaluating the invariants.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Operator {
    A,
    Adag,
    Q,
    P,
    Number,
    U1,
    U2,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuantizeArgs {
    #[command(flatten)]
    #[serde(skip)]
    cavity: CavityArgs,
    /// Highest retained occupation number.
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long, value_enum)]
    operator: Option<Operator>,
    /// Mode index α, starting at 1.
    #[arg(long)]
    mode: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    /// Position for field operators; defaults to L/2.
    #[arg(long)]
    z: Option<f64>,
    /// Coherent-state expectation scan instead of an operator snapshot.
    #[arg(long)]
    #[serde(default)]
    scan: bool,
    /// Coherent amplitude `re,im` for the scan.
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    nz: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dimension_cap: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct DispersionArgs {
    #[arg(long)]
    atoms: Option<usize>,
    #[arg(long)]
    mass: Option<f64>,
    /// Nearest-neighbour force constant.
    #[arg(long)]
    spring: Option<f64>,
    /// Free ends instead of a ring.
    #[arg(long)]
    #[serde(default)]
    free: bool,
    /// Headerless CSV force-constant matrix; replaces the chain model.
    #[arg(long)]
    force_constants: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScatterArgs {
    #[arg(long)]
    lattice_n: Option<usize>,
    /// Cavity length over lattice constant, exact: `p/q`, `x.y`, or `p/q*sqrt(d)`.
    /// Without it the phonon grid is the lattice grid.
    #[arg(long = "cavity-L")]
    #[serde(rename = "cavity_L")]
    cavity_length: Option<String>,
    /// Cavity modes; defaults to the number with k ≤ 2π.
    #[arg(long)]
    cavity_modes: Option<usize>,
    #[arg(long)]
    band: Option<String>,
    /// `constant:w=..`, `linear:c=..`, or `chain:alpha=..,m=..`.
    #[arg(long)]
    phonon: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    broadening: Option<String>,
    #[arg(long)]
    bmax: Option<u32>,
    /// Energy window; defaults to 3σ.
    #[arg(long)]
    energy_tol: Option<f64>,
    /// Momentum tolerance for grids without exact values.
    #[arg(long)]
    momentum_tol: Option<f64>,
    /// Fixed phonon occupation.
    #[arg(long, conflicts_with = "temperature")]
    occupation: Option<f64>,
    /// Bose-Einstein temperature (k_B = 1).
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    m2: Option<f64>,
    #[arg(long)]
    hbar: Option<f64>,
    #[arg(long)]
    tuple_cap: Option<u128>,
    /// Also write the summary JSON here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairingArgs {
    #[arg(long)]
    band: Option<String>,
    #[arg(long)]
    nk: Option<usize>,
    /// Phonon frequency shared by every q.
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    m2: Option<f64>,
    /// Keep entries with |Δε| ≤ ρħω.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    pole_guard: Option<f64>,
    #[arg(long)]
    hbar: Option<f64>,
    /// Also write the summary JSON here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct FluxArgs {
    /// Watts.
    #[arg(long)]
    power: Option<f64>,
    /// Hertz.
    #[arg(long)]
    freq: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyArgs {
    /// Reduced sample counts.
    #[arg(long)]
    #[serde(default)]
    quick: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    out: Option<String>,
    format: Option<Format>,
    workers: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    run: RunSection,
    cavity: CavityArgs,
    evolve: EvolveArgs,
    fields: FieldArgs,
    invariants: InvariantArgs,
    quantize: QuantizeArgs,
    dispersion: DispersionArgs,
    scatter: ScatterArgs,
    pairing: PairingArgs,
    flux: FluxArgs,
    verify: VerifyArgs,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    VerificationFailed,
}

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        Self::Usage(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Fills `None` fields of a flag struct from its config counterpart.
macro_rules! merge {
    ($flags:expr, $file:expr, [$($field:ident),* $(,)?]) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field.clone(); } )*
    };
}

struct Context {
    out: String,
    format: Format,
    seed: u64,
}

impl Context {
    fn writer(&self) -> Result<Box<dyn Write>, CliError> {
        open_output(&self.out)
    }
}

fn open_output(out: &str) -> Result<Box<dyn Write>, CliError> {
    if out == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let file = File::create(out).map_err(|e| usage(format!("cannot create {out}: {e}")))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::VerificationFailed) => EXIT_VERIFY,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let ctx = Context {
        out: cli.out.or(file.run.out.clone()).unwrap_or_else(|| "-".into()),
        format: cli.format.or(file.run.format).unwrap_or(Format::Csv),
        seed: cli.seed.or(file.run.seed).unwrap_or(DEFAULT_SEED),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers.or(file.run.workers) {
        if n == 0 {
            return Err(usage("--workers must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    pool.install(|| dispatch(cli.command, &file, &ctx))
}

fn dispatch(command: Command, file: &FileConfig, ctx: &Context) -> Result<(), CliError> {
    match command {
        Command::Modes(a) => cmd_modes(merge_cavity(a, &file.cavity), ctx),
        Command::Evolve(mut a) => {
            a.cavity = merge_cavity(a.cavity, &file.cavity);
            merge!(a, file.evolve, [t_end, steps]);
            cmd_evolve(a, ctx)
        }
        Command::Fields(mut a) => {
            a.cavity = merge_cavity(a.cavity, &file.cavity);
            merge!(a, file.fields, [points, t, solution]);
            cmd_fields(a, ctx)
        }
        Command::Invariants(mut a) => {
            a.fields.cavity = merge_cavity(a.fields.cavity, &file.cavity);
            merge!(a.fields, file.invariants.fields, [points, t, solution]);
            merge!(a.fields, file.fields, [points, t, solution]);
            merge!(a, file.invariants, [theta]);
            cmd_invariants(a, ctx)
        }
        Command::Quantize(mut a) => {
            a.cavity = merge_cavity(a.cavity, &file.cavity);
            merge!(a, file.quantize, [nmax, operator, mode, t, z, gamma, nz, nt, t_end, dimension_cap]);
            a.scan |= file.quantize.scan;
            cmd_quantize(a, ctx)
        }
        Command::Dispersion(mut a) => {
            merge!(a, file.dispersion, [atoms, mass, spring, force_constants]);
            a.free |= file.dispersion.free;
            cmd_dispersion(a, ctx)
        }
        Command::Scatter(mut a) => {
            merge!(
                a,
                file.scatter,
                [
                    lattice_n,
                    cavity_length,
                    cavity_modes,
                    band,
                    phonon,
                    sigma,
                    broadening,
                    bmax,
                    energy_tol,
                    momentum_tol,
                    occupation,
                    temperature,
                    m2,
                    hbar,
                    tuple_cap,
                    summary
                ]
            );
            cmd_scatter(a, ctx)
        }
        Command::Pairing(mut a) => {
            merge!(a, file.pairing, [band, nk, omega, m2, rho, pole_guard, hbar, summary]);
            cmd_pairing(a, ctx)
        }
        Command::Flux(mut a) => {
            merge!(a, file.flux, [power, freq]);
            cmd_flux(a, ctx)
        }
        Command::Verify(mut a) => {
            a.quick |= file.verify.quick;
            cmd_verify(a, ctx)
        }
    }
}

fn merge_cavity(mut a: CavityArgs, file: &CavityArgs) -> CavityArgs {
    merge!(a, file, [length, volume, c, modes, mass]);
    if a.mode.is_empty() {
        a.mode = file.mode.clone();
    }
    a
}

fn emit_rows<T: Serialize>(rows: &[T], ctx: &Context) -> Result<(), CliError> {
    let mut w = ctx.writer()?;
    match ctx.format {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut w);
            for row in rows {
                csv.serialize(row)?;
            }
            csv.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn emit_json<T: Serialize>(value: &T, w: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

struct Cavity {
    /// Physical spectrum, `ω = απc/L`.
    physical: ModeSet,
    /// Same cavity with `c = 1` for field synthesis.
    unit_speed: ModeSet,
    states: Vec<ModeState>,
    sound_speed: f64,
}

fn build_cavity(a: &CavityArgs, seed: u64) -> Result<Cavity, CliError> {
    let modes = a.modes.unwrap_or(3);
    let spec =
        CavitySpec::new(a.length.unwrap_or(std::f64::consts::PI), a.volume.unwrap_or(1.0), a.c.unwrap_or(1.0), modes)?;
    if !a.mode.is_empty() && a.mode.len() != modes {
        return Err(usage(format!("config lists {} mode entries for {modes} modes", a.mode.len())));
    }
    let shared = a.mass.unwrap_or(1.0);
    let masses: Vec<f64> = (0..modes).map(|i| a.mode.get(i).and_then(|e| e.m).unwrap_or(shared)).collect();
    let physical = mode_spectrum(&spec, &masses)?;
    let unit_speed = mode_spectrum(&spec.nondimensional(), &masses)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = unit_speed
        .modes()
        .iter()
        .enumerate()
        .map(|(i, mode)| match a.mode.get(i) {
            None => Ok(ModeState::from_canonical(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), mode)),
            Some(e) => match (e.q0, e.p0, e.amplitude, e.phi) {
                (q, p, None, None) => Ok(ModeState::from_canonical(q.unwrap_or(0.0), p.unwrap_or(0.0), mode)),
                (None, None, b, phi) => Ok(ModeState::from_amplitude_phase(b.unwrap_or(0.0), phi.unwrap_or(0.0), mode)),
                _ => Err(usage(format!("mode {} mixes q0/p0 with B/phi", i + 1))),
            },
        })
        .collect::<Result<_, _>>()?;
    Ok(Cavity { physical, unit_speed, states, sound_speed: spec.sound_speed })
}

#[derive(Serialize)]
struct ModeRow {
    alpha: usize,
    k: f64,
    omega: f64,
    mass: f64,
    amplitude: f64,
}

fn cmd_modes(a: CavityArgs, ctx: &Context) -> Result<(), CliError> {
    let cavity = build_cavity(&a, ctx.seed)?;
    let rows: Vec<ModeRow> = cavity
        .physical
        .modes()
        .iter()
        .map(|m| ModeRow { alpha: m.index, k: m.k, omega: m.omega, mass: m.mass, amplitude: m.amplitude })
        .collect();
    emit_rows(&rows, ctx)
}

#[derive(Serialize)]
struct EvolveRow {
    t: f64,
    alpha: usize,
    q: f64,
    p: f64,
    energy: f64,
}

fn cmd_evolve(a: EvolveArgs, ctx: &Context) -> Result<(), CliError> {
    let cavity = build_cavity(&a.cavity, ctx.seed)?;
    let modes = cavity.physical.modes();
    let t_end = a.t_end.unwrap_or(std::f64::consts::TAU / modes[0].omega);
    let steps = a.steps.unwrap_or(100);
    if steps == 0 || !t_end.is_finite() {
        return Err(usage("--steps must be positive and --t-end finite"));
    }
    // states were drawn for the unit-speed modes; rescale momenta to physical time
    let states: Vec<ModeState> = cavity
        .states
        .iter()
        .zip(modes)
        .map(|(s, m)| ModeState::from_canonical(s.q, s.p * cavity.sound_speed, m))
        .collect();
    let mut rows = Vec::with_capacity((steps + 1) * modes.len());
    for i in 0..=steps {
        let t = t_end * i as f64 / steps as f64;
        for (s, m) in states.iter().zip(modes) {
            let now = oscillator_evolve(s, m, t);
            rows.push(EvolveRow { t, alpha: m.index, q: now.q, p: now.p, energy: now.energy(m) });
        }
    }
    emit_rows(&rows, ctx)
}

fn synthesize(a: &FieldArgs, cavity: &Cavity) -> Result<crate::cavity::Synthesis, CliError> {
    let points = a.points.unwrap_or(1001);
    let grid = GridSpec::line(cavity.unit_speed.spec().length, points)?;
    let tau = a.t.unwrap_or(0.0) * cavity.sound_speed;
    let syn = match a.solution.unwrap_or(Solution::First) {
        Solution::First => synthesize_first_solution(&cavity.unit_speed, &cavity.states, &grid, tau)?,
        Solution::Second => synthesize_second_solution(&cavity.unit_speed, &cavity.states, &grid, tau)?,
    };
    let energy = field_energy(&syn.fields, &cavity.unit_speed)?;
    log::info!("field energy {:.12e} ({:.1} points per wavelength)", energy.energy, energy.points_per_wavelength);
    Ok(syn)
}

fn emit_snapshot(snapshot: &Snapshot, ctx: &Context) -> Result<(), CliError> {
    match ctx.format {
        Format::Csv => {
            let mut w = ctx.writer()?;
            snapshot.write_csv(&mut w)?;
            w.flush()?;
        }
        Format::Json if ctx.out == "-" => {
            let mut w = ctx.writer()?;
            snapshot.write_json_inline(&mut w)?;
            writeln!(w)?;
            w.flush()?;
        }
        Format::Json => {
            let data_path = Path::new(&ctx.out).with_extension("bin");
            let data_name = data_path.file_name().and_then(|n| n.to_str()).unwrap_or("data.bin").to_string();
            let mut header = ctx.writer()?;
            let mut data = open_output(&data_path.to_string_lossy())?;
            snapshot.write_binary(&mut header, &mut data, &data_name)?;
            writeln!(header)?;
            header.flush()?;
        }
    }
    Ok(())
}

fn cmd_fields(a: FieldArgs, ctx: &Context) -> Result<(), CliError> {
    let cavity = build_cavity(&a.cavity, ctx.seed)?;
    let syn = synthesize(&a, &cavity)?;
    emit_snapshot(&Snapshot::from_fields(&syn.fields), ctx)
}

fn cmd_invariants(a: InvariantArgs, ctx: &Context) -> Result<(), CliError> {
    let cavity = build_cavity(&a.fields.cavity, ctx.seed)?;
    let syn = synthesize(&a.fields, &cavity)?;
    let fields = match a.theta {
        Some(theta) => dual_rotate(&syn.fields, DualAngle::new(theta))?,
        None => syn.fields,
    };
    let map = invariants(&fields)?;
    log::info!("integrated invariants I1 = {:.12e}, I2 = {:.12e}", map.integrated.i1, map.integrated.i2);
    emit_snapshot(&Snapshot::from_invariants(fields.grid(), fields.time, &map)?, ctx)
}

#[derive(Serialize)]
struct MatrixEntry {
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

fn parse_gamma(s: &str) -> Result<Complex64, CliError> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let re: f64 = re.trim().parse().map_err(|_| usage(format!("bad --gamma {s:?}")))?;
    let im: f64 = im.trim().parse().map_err(|_| usage(format!("bad --gamma {s:?}")))?;
    Ok(Complex64::new(re, im))
}

fn cmd_quantize(a: QuantizeArgs, ctx: &Context) -> Result<(), CliError> {
    let cavity = build_cavity(&a.cavity, ctx.seed)?;
    let set = &cavity.unit_speed;
    let spec = FockSpec::from_mode_set(set, a.nmax.unwrap_or(8))?
        .with_dimension_cap(a.dimension_cap.unwrap_or(DEFAULT_DIMENSION_CAP));
    let t = a.t.unwrap_or(0.0) * cavity.sound_speed;
    let length = set.spec().length;

    if a.scan {
        if set.len() != 1 {
            return Err(usage("--scan needs a single-mode cavity (--M 1)"));
        }
        let gamma = parse_gamma(a.gamma.as_deref().unwrap_or("1,0"))?;
        let psi = coherent_state(gamma, spec.n_max());
        let (nz, nt) = (a.nz.unwrap_or(33), a.nt.unwrap_or(33));
        if nz < 2 || nt < 2 {
            return Err(usage("--nz and --nt must be at least 2"));
        }
        let t_end = a.t_end.unwrap_or(std::f64::consts::TAU / set.modes()[0].omega) * cavity.sound_speed;
        let zs: Vec<f64> =
            (0..nz).map(|i| if i + 1 == nz { length } else { length * i as f64 / (nz - 1) as f64 }).collect();
        let ts: Vec<f64> = (0..nt).map(|i| t_end * i as f64 / (nt - 1) as f64).collect();
        return emit_rows(&expectation_scan(set, &spec, &psi, &zs, &ts)?, ctx);
    }

    let operator = a.operator.unwrap_or(Operator::A);
    let alpha = a.mode.unwrap_or(1);
    if alpha == 0 || alpha > set.len() {
        return Err(usage(format!("--mode must lie in 1..={}", set.len())));
    }
    let single = FockSpec::new(spec.n_max(), spec.hbar(), vec![spec.modes()[alpha - 1]])?;
    let ladder = heisenberg_evolve(&build_ladder(&single)?, set.modes()[alpha - 1].omega, t);
    let matrix = match operator {
        Operator::A => ladder.a.clone(),
        Operator::Adag => ladder.a_dag.clone(),
        Operator::Number => &ladder.a_dag * &ladder.a,
        Operator::Q => position_momentum_ops(&ladder, &single, 0)?.0,
        Operator::P => position_momentum_ops(&ladder, &single, 0)?.1,
        Operator::U1 | Operator::U2 => {
            let ops = field_operators(set, &spec, a.z.unwrap_or(length / 2.0), t)?;
            if operator == Operator::U1 {
                ops.u1
            } else {
                ops.u2
            }
        }
    };
    let name = format!("{operator:?}").to_ascii_lowercase();
    let snapshot = OperatorSnapshot { matrix, label: OperatorLabel { operator: name, mode: alpha, time: t } };
    match ctx.format {
        Format::Json => emit_json(&snapshot.to_json(), &mut *ctx.writer()?),
        Format::Csv => {
            let m = &snapshot.matrix;
            let rows: Vec<MatrixEntry> = (0..m.nrows())
                .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
                .map(|(row, col)| MatrixEntry { row, col, re: m[(row, col)].re, im: m[(row, col)].im })
                .collect();
            emit_rows(&rows, ctx)
        }
    }
}

#[derive(Serialize)]
struct DispersionRow {
    k: f64,
    omega: f64,
}

#[derive(Serialize)]
struct EigenRow {
    index: usize,
    omega: f64,
}

fn cmd_dispersion(a: DispersionArgs, ctx: &Context) -> Result<(), CliError> {
    let mass = a.mass.unwrap_or(1.0);
    if let Some(path) = &a.force_constants {
        let file = File::open(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let d = dynamical_matrix_from_force_constants(&read_force_constants_csv(file)?, mass)?;
        let rows: Vec<EigenRow> =
            dynamical_eigenmodes(&d).iter().enumerate().map(|(index, m)| EigenRow { index, omega: m.omega }).collect();
        return emit_rows(&rows, ctx);
    }
    let spec = ChainSpec::new(a.atoms.unwrap_or(16), mass, a.spring.unwrap_or(1.0), !a.free)?;
    let mut rows: Vec<DispersionRow> =
        normal_modes(&spec)?.into_iter().map(|m| DispersionRow { k: m.k, omega: m.omega }).collect();
    rows.sort_by(|x, y| x.k.total_cmp(&y.k));
    emit_rows(&rows, ctx)
}

#[derive(Serialize)]
struct ScatterOutput<'a> {
    summary: &'a crate::kinetics::ChannelSummary,
    channels: &'a [crate::kinetics::ScatteringChannel],
}

fn cmd_scatter(a: ScatterArgs, ctx: &Context) -> Result<(), CliError> {
    let n = a.lattice_n.unwrap_or(64);
    if n == 0 {
        return Err(usage("--lattice-n must be positive"));
    }
    let lattice = lattice_kgrid_exact(n);
    let phonon = match &a.cavity_length {
        None => lattice.clone(),
        Some(text) => {
            let length: Surd = text.parse()?;
            let modes = match a.cavity_modes {
                Some(m) => m,
                None => (2.0 * length.to_f64()).floor().max(1.0) as usize,
            };
            cavity_kgrid_exact(&length, modes)?
        }
    };
    let band: BandModel = a.band.as_deref().unwrap_or("tightbinding:t=1,mu=0").parse()?;
    let dispersion: PhononDispersion = a.phonon.as_deref().unwrap_or("linear:c=0.1").parse()?;
    let kind: DeltaKind = a.broadening.as_deref().unwrap_or("gaussian").parse().map_err(usage)?;
    let hbar = a.hbar.unwrap_or(1.0);
    let sigma = match a.sigma {
        Some(s) => s,
        None => 0.01 * phonon.values().iter().map(|&q| hbar * dispersion.omega(q)).fold(0.0, f64::max),
    };
    let delta = BroadenedDelta::new(kind, sigma)?;
    let mut search = ChannelSearch::new(band, dispersion, delta);
    search.hbar = hbar;
    search.m2 = a.m2.unwrap_or(1.0);
    search.b_max = a.bmax.unwrap_or(1);
    search.energy_tol = a.energy_tol.unwrap_or(3.0 * sigma);
    search.momentum_tol = a.momentum_tol.unwrap_or(1e-9);
    search.tuple_cap = a.tuple_cap.unwrap_or(DEFAULT_TUPLE_CAP);
    search.occupation = match (a.occupation, a.temperature) {
        (_, Some(t)) => OccupationModel::Thermal(t),
        (n, None) => OccupationModel::Fixed(n.unwrap_or(0.0)),
    };
    let channels = enumerate_channels(&lattice, &phonon, &search)?;
    let summary = summarize(&channels, tuple_count(lattice.len(), phonon.len(), search.b_max));
    if let Some(path) = &a.summary {
        emit_json(&summary, &mut *open_output(&path.to_string_lossy())?)?;
    }
    match ctx.format {
        Format::Csv => emit_rows(&channels, ctx),
        Format::Json => emit_json(&ScatterOutput { summary: &summary, channels: &channels }, &mut *ctx.writer()?),
    }
}

fn cmd_pairing(a: PairingArgs, ctx: &Context) -> Result<(), CliError> {
    let band: BandModel = a.band.as_deref().unwrap_or("tightbinding:t=1,mu=0").parse()?;
    let nk = a.nk.unwrap_or(64);
    let hbar_omega = a.hbar.unwrap_or(1.0) * a.omega.unwrap_or(0.5);
    let m2 = a.m2.unwrap_or(1.0);
    let kgrid = crate::lattice::lattice_kgrid(nk);
    let phonons: Vec<PhononSample> = kgrid.iter().map(|&q| PhononSample { q, hbar_omega, m2 }).collect();
    let report =
        attractive_channels(&band, &kgrid, &phonons, a.rho.unwrap_or(0.5), a.pole_guard.unwrap_or(DEFAULT_POLE_GUARD))?;
    if let Some(path) = &a.summary {
        emit_json(&report.summary, &mut *open_output(&path.to_string_lossy())?)?;
    }
    match ctx.format {
        Format::Csv => emit_rows(&report.entries, ctx),
        Format::Json => emit_json(&report, &mut *ctx.writer()?),
    }
}

#[derive(Serialize)]
struct FluxOutput {
    power: f64,
    frequency: f64,
    photons_per_second: f64,
}

fn cmd_flux(a: FluxArgs, ctx: &Context) -> Result<(), CliError> {
    let power = a.power.ok_or_else(|| usage("--power is required"))?;
    let frequency = a.freq.ok_or_else(|| usage("--freq is required"))?;
    let flux = photon_flux(power, frequency)?;
    let mut w = ctx.writer()?;
    match ctx.format {
        Format::Csv => {
            writeln!(w, "{flux:.3e}")?;
            w.flush()?;
            Ok(())
        }
        Format::Json => emit_json(&FluxOutput { power, frequency, photons_per_second: flux }, &mut *w),
    }
}

fn cmd_verify(a: VerifyArgs, ctx: &Context) -> Result<(), CliError> {
    let report = run_suite(VerifyConfig { seed: ctx.seed, quick: a.quick });
    match (ctx.format, ctx.out.as_str()) {
        (Format::Csv, "-") => {
            let mut w = ctx.writer()?;
            report.write_table(&mut w)?;
            w.flush()?;
        }
        (Format::Csv, _) => {
            let mut w = ctx.writer()?;
            report.write_csv(&mut w)?;
            w.flush()?;
            report.write_table(io::stdout().lock())?;
        }
        (Format::Json, out) => {
            emit_json(&report, &mut *ctx.writer()?)?;
            if out != "-" {
                report.write_table(io::stdout().lock())?;
            }
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::VerificationFailed)
    }
}
