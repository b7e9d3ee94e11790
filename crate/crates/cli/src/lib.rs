//! `hamforge` command surface.
//!
//! Every run writes its outputs plus a [`RunManifest`] next to the primary
//! output (`<output>.manifest.json`, or `--manifest`). The manifest stores
//! the full argument vector, so replaying it reproduces the outputs byte for
//! byte.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use hamforge_core::fermion::{hf_circuit, one_body_observable, read_matrix_csv, FermionicOperator, Mapping, MolecularIntegrals};
use hamforge_core::pipeline::{sweep_to_csv, trajectory, truncation_sweep, Engine, TimeGrid, TrajectoryMatrix};
use hamforge_core::pls::{component_sweep, cross_validate, pls_fit};
use hamforge_core::reduction::{taper, truncate, TruncationConfig};
use hamforge_core::sim::{apply_circuit, expectation, sample_counts, StateVector};
use hamforge_core::synthesis::{trotter_circuit, SynthesisConfig, SynthesisMethod, TermOrder};
use hamforge_core::synthetic::trajectory_dataset;
use hamforge_core::transpile::{transpile_best_of, CouplingGraph};
use hamforge_core::{samples, Circuit, Gate, PauliSum};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "hamforge", version, about = "Hamiltonian reduction, Trotter circuit synthesis and trajectory regression")]
struct Cli {
    /// Seed for every random choice (routing, sampling, folds).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Manifest path (default: <output>.manifest.json).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Drop terms below eps / (2 tmax).
    Truncate(TruncateArgs),
    /// Remove qubits using Z2 symmetries.
    Taper(TaperArgs),
    /// Build a first-order Trotter circuit.
    Synth(SynthArgs),
    /// Route onto a coupling map and optimise, best of N seeds.
    Transpile(TranspileArgs),
    /// Run a circuit on the statevector simulator.
    Simulate(SimulateArgs),
    /// Sample an observable on a time grid.
    Trajectory(TrajectoryArgs),
    /// Trajectory error against the fraction of kept terms.
    Sweep(SweepArgs),
    /// PLS regression with k-fold cross-validation.
    Fit(FitArgs),
    /// Depth and two-qubit counts of the reduction options.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct HamiltonianInput {
    /// Pauli-sum JSON, molecular-integrals JSON or fermionic-operator JSON.
    input: PathBuf,
    /// Fermion-to-qubit mapping for integral or fermionic inputs.
    #[arg(long, default_value = "jw")]
    mapping: String,
    /// Initial basis state, qubit 0 first (default: Hartree-Fock for integral
    /// inputs, all zeros otherwise).
    #[arg(long)]
    init: Option<String>,
}

#[derive(Args, Debug)]
struct ObservableInput {
    /// Observable as Pauli-sum JSON.
    #[arg(long, conflicts_with = "h_eff")]
    observable: Option<PathBuf>,
    /// One-body weights `h_eff` (CSV); the observable is Σ h_rs a_s† a_r.
    #[arg(long)]
    h_eff: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, default_value_t = 14.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0.5)]
    dt: f64,
}

#[derive(Args, Debug)]
struct TruncateArgs {
    #[command(flatten)]
    ham: HamiltonianInput,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 14.0)]
    tmax: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TaperArgs {
    #[command(flatten)]
    ham: HamiltonianInput,
    /// Write only this sector's Hamiltonian.
    #[arg(long)]
    sector: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Default,
    Cdat,
    Greedy,
}

impl From<MethodArg> for SynthesisMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Default => SynthesisMethod::Default,
            MethodArg::Cdat => SynthesisMethod::Cdat,
            MethodArg::Greedy => SynthesisMethod::Greedy,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrderArg {
    Given,
    Descending,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    ham: HamiltonianInput,
    #[arg(long, value_enum, default_value_t = MethodArg::Default)]
    method: MethodArg,
    #[arg(long, default_value_t = 1)]
    steps: usize,
    #[arg(long, default_value_t = 14.0)]
    time: f64,
    #[arg(long, value_enum, default_value_t = OrderArg::Given)]
    order: OrderArg,
    /// Also write the circuit as QASM-style text.
    #[arg(long)]
    qasm: Option<PathBuf>,
    /// Also write the Clifford frame and transformed Hamiltonian.
    #[arg(long)]
    frame: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CouplingArgs {
    /// Edge-list file, or one of: complete, heavy-hex, ring, line.
    #[arg(long, default_value = "complete")]
    coupling: String,
    #[arg(long, default_value_t = 50)]
    trials: usize,
}

#[derive(Args, Debug)]
struct TranspileArgs {
    /// Circuit JSON.
    input: PathBuf,
    #[command(flatten)]
    coupling: CouplingArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Circuit JSON.
    input: PathBuf,
    #[arg(long)]
    observable: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    shots: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    Exact,
    Trotter,
}

#[derive(Args, Debug)]
struct TrajectoryArgs {
    #[command(flatten)]
    ham: HamiltonianInput,
    #[command(flatten)]
    obs: ObservableInput,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = EngineArg::Exact)]
    engine: EngineArg,
    #[arg(long, default_value_t = 64)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Default)]
    method: MethodArg,
    /// Row id in the output CSV (default: input file stem).
    #[arg(long)]
    id: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    ham: HamiltonianInput,
    #[command(flatten)]
    obs: ObservableInput,
    #[command(flatten)]
    grid: GridArgs,
    /// Kept-term percentages.
    #[arg(long, value_delimiter = ',', default_value = "100,90,80,70,60,50,40,30,20,10")]
    fractions: Vec<f64>,
    /// Adds the row kept by truncation at this error limit.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Trajectory CSV with a target column.
    #[arg(required_unless_present = "synthetic")]
    input: Option<PathBuf>,
    /// Generate this many synthetic molecules instead of reading a CSV.
    #[arg(long, conflicts_with = "input")]
    synthetic: Option<usize>,
    /// Fixed component count (default: best of 1..=max-components).
    #[arg(long)]
    components: Option<usize>,
    #[arg(long, default_value_t = 5)]
    max_components: usize,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Also write the model fitted on all samples.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Also write the synthetic dataset as CSV.
    #[arg(long, requires = "synthetic")]
    write_data: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[command(flatten)]
    ham: HamiltonianInput,
    /// Rows to include: default, truncation, cdat, rustiq (alias greedy).
    #[arg(long, value_delimiter = ',', default_value = "default,truncation,cdat,rustiq")]
    compare: Vec<String>,
    #[arg(long, default_value_t = 1)]
    steps: usize,
    #[arg(long, default_value_t = 14.0)]
    time: f64,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 14.0)]
    tmax: f64,
    #[command(flatten)]
    coupling: CouplingArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Record of one CLI invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name; `run` on these replays the run.
    pub argv: Vec<String>,
    pub inputs: Vec<String>,
    pub config: Value,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
    pub summary: Value,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn read(path: impl AsRef<Path>) -> anyhow::Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("{}", path.display()))
    }

    /// Full argument vector including a program name, ready for [`run`].
    pub fn replay_args(&self) -> Vec<String> {
        std::iter::once("hamforge".to_string()).chain(self.argv.iter().cloned()).collect()
    }
}

struct Ctx {
    seed: u64,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

impl Ctx {
    fn input(&mut self, p: &Path) {
        self.inputs.push(p.display().to_string());
    }

    fn write(&mut self, path: &Path, contents: &str) -> anyhow::Result<()> {
        std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Like `write`, but records the file first so the manifest is named after it.
    fn write_primary(&mut self, path: &Path, contents: &str) -> anyhow::Result<()> {
        self.write(path, contents)?;
        let p = self.outputs.pop().expect("just pushed");
        self.outputs.insert(0, p);
        Ok(())
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code: 0 on success, 1 on runtime errors, 2 on usage errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    // unlocked handles: worker threads may log to stderr while we run
    run_with_io(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with_io<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let recorded: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            return 1;
        }
    };
    match pool.install(|| execute(cli, recorded)) {
        Ok(summary) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&summary).expect("summary serialises"));
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

fn thread_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("HAMFORGE_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow!("HAMFORGE_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            bail!("HAMFORGE_THREADS must be a positive integer, got 0");
        }
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

fn default_output(input: Option<&Path>, suffix: &str) -> PathBuf {
    match input {
        Some(p) => {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
            p.with_file_name(format!("{stem}.{suffix}"))
        }
        None => PathBuf::from(format!("hamforge.{suffix}")),
    }
}

fn execute(cli: Cli, argv: Vec<String>) -> anyhow::Result<Value> {
    let start = Instant::now();
    let mut ctx = Ctx { seed: cli.seed, inputs: Vec::new(), outputs: Vec::new() };
    let (name, config, summary) = match cli.command {
        Command::Truncate(a) => ("truncate", json!({"eps": a.eps, "tmax": a.tmax, "mapping": a.ham.mapping}), cmd_truncate(&mut ctx, &a)?),
        Command::Taper(a) => ("taper", json!({"sector": a.sector, "mapping": a.ham.mapping}), cmd_taper(&mut ctx, &a)?),
        Command::Synth(a) => (
            "synth",
            json!({"method": format!("{:?}", a.method).to_lowercase(), "steps": a.steps, "time": a.time,
                   "order": format!("{:?}", a.order).to_lowercase(), "mapping": a.ham.mapping}),
            cmd_synth(&mut ctx, &a)?,
        ),
        Command::Transpile(a) => (
            "transpile",
            json!({"coupling": a.coupling.coupling, "trials": a.coupling.trials}),
            cmd_transpile(&mut ctx, &a)?,
        ),
        Command::Simulate(a) => ("simulate", json!({"shots": a.shots}), cmd_simulate(&mut ctx, &a)?),
        Command::Trajectory(a) => (
            "trajectory",
            json!({"t_end": a.grid.t_end, "dt": a.grid.dt, "engine": format!("{:?}", a.engine).to_lowercase(),
                   "steps": a.steps, "method": format!("{:?}", a.method).to_lowercase(), "mapping": a.ham.mapping}),
            cmd_trajectory(&mut ctx, &a)?,
        ),
        Command::Sweep(a) => (
            "sweep",
            json!({"t_end": a.grid.t_end, "dt": a.grid.dt, "fractions": a.fractions, "eps": a.eps, "mapping": a.ham.mapping}),
            cmd_sweep(&mut ctx, &a)?,
        ),
        Command::Fit(a) => (
            "fit",
            json!({"components": a.components, "max_components": a.max_components, "folds": a.folds, "synthetic": a.synthetic}),
            cmd_fit(&mut ctx, &a)?,
        ),
        Command::Report(a) => (
            "report",
            json!({"compare": a.compare, "steps": a.steps, "time": a.time, "eps": a.eps, "tmax": a.tmax,
                   "coupling": a.coupling.coupling, "trials": a.coupling.trials, "mapping": a.ham.mapping}),
            cmd_report(&mut ctx, &a)?,
        ),
    };
    let manifest_path = match (&cli.manifest, ctx.outputs.first()) {
        (Some(p), _) => p.clone(),
        (None, Some(o)) => PathBuf::from(format!("{o}.manifest.json")),
        (None, None) => PathBuf::from(format!("hamforge-{name}.manifest.json")),
    };
    let manifest = RunManifest {
        command: name.to_string(),
        argv,
        inputs: ctx.inputs,
        config,
        seed: ctx.seed,
        version: VERSION.to_string(),
        outputs: ctx.outputs,
        summary: summary.clone(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(&manifest_path, text).with_context(|| format!("writing {}", manifest_path.display()))?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// inputs

struct Problem {
    h: PauliSum,
    init: Circuit,
    mapping: Mapping,
    integrals: Option<MolecularIntegrals>,
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("{}", path.display()))
}

fn load_problem(ctx: &mut Ctx, a: &HamiltonianInput) -> anyhow::Result<Problem> {
    ctx.input(&a.input);
    let mapping: Mapping = a.mapping.parse()?;
    let text = read_text(&a.input)?;
    let at = |e: hamforge_core::Error| anyhow!("{}: {e}", a.input.display());
    let v: Value = serde_json::from_str(&text).map_err(|e| anyhow!("{}: line {}: {e}", a.input.display(), e.line()))?;
    let (h, integrals) = if v.get("one_body").is_some() {
        let ints = MolecularIntegrals::from_json_str(&text).map_err(at)?;
        let h = hamforge_core::fermion::map_operator(&ints.to_fermionic_operator().map_err(at)?, mapping).map_err(at)?;
        (h, Some(ints))
    } else if v.get("num_spin_orbitals").is_some() {
        let f = FermionicOperator::from_json_str(&text).map_err(at)?;
        (hamforge_core::fermion::map_operator(&f, mapping).map_err(at)?, None)
    } else {
        (PauliSum::from_json_str(&text).map_err(at)?, None)
    };
    let n = h.num_qubits();
    let init = match (&a.init, &integrals) {
        (Some(bits), _) => bits_circuit(bits, n)?,
        (None, Some(ints)) => hf_circuit(&ints.hartree_fock_state()?, mapping),
        (None, None) => Circuit::new(n),
    };
    Ok(Problem { h, init, mapping, integrals })
}

fn bits_circuit(bits: &str, n: usize) -> anyhow::Result<Circuit> {
    if bits.len() != n {
        bail!("--init has {} bits, Hamiltonian has {n} qubits", bits.len());
    }
    let mut c = Circuit::new(n);
    for (q, ch) in bits.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => c.push(Gate::X(q))?,
            other => bail!("--init must contain only 0 and 1, found {other:?}"),
        }
    }
    Ok(c)
}

/// Explicit observable, else the one-body observable of the integrals,
/// else the Hamiltonian itself.
fn load_observable(ctx: &mut Ctx, a: &ObservableInput, p: &Problem) -> anyhow::Result<PauliSum> {
    if let Some(path) = &a.observable {
        ctx.input(path);
        return Ok(PauliSum::read_json(path)?);
    }
    if let Some(path) = &a.h_eff {
        ctx.input(path);
        return Ok(one_body_observable(&read_matrix_csv(path)?, p.mapping)?);
    }
    match &p.integrals {
        Some(ints) => Ok(one_body_observable(&ints.one_body, p.mapping)?),
        None => Ok(p.h.clone()),
    }
}

fn load_coupling(ctx: &mut Ctx, spec: &str, n: usize) -> anyhow::Result<CouplingGraph> {
    Ok(match spec {
        "complete" => CouplingGraph::complete(n),
        "ring" => CouplingGraph::ring(n),
        "line" => CouplingGraph::line(n),
        "heavy-hex" => samples::heavy_hex_156(),
        path => {
            ctx.input(Path::new(path));
            CouplingGraph::read_file(path)?
        }
    })
}

fn json_value(text: &str) -> Value {
    serde_json::from_str(text).expect("library JSON is valid")
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("value serialises") + "\n"
}

// ---------------------------------------------------------------------------
// subcommands

fn cmd_truncate(ctx: &mut Ctx, a: &TruncateArgs) -> anyhow::Result<Value> {
    let p = load_problem(ctx, &a.ham)?;
    let res = truncate(&p.h, &TruncationConfig::new(a.eps, a.tmax)?);
    let out = a.output.clone().unwrap_or_else(|| default_output(Some(&a.ham.input), "truncated.json"));
    ctx.write_primary(&out, &(res.kept.to_json_string() + "\n"))?;
    Ok(json!({ "report": res.report() }))
}

fn cmd_taper(ctx: &mut Ctx, a: &TaperArgs) -> anyhow::Result<Value> {
    let p = load_problem(ctx, &a.ham)?;
    let res = taper(&p.h)?;
    let out = a.output.clone().unwrap_or_else(|| default_output(Some(&a.ham.input), "tapered.json"));
    let init_bits: Vec<bool> = {
        let psi = apply_circuit(&p.init, &StateVector::zero(p.h.num_qubits())?)?;
        let idx = psi.probabilities().iter().position(|&x| x > 0.5);
        match idx {
            Some(i) => (0..p.h.num_qubits()).map(|q| (i >> q) & 1 == 1).collect(),
            None => vec![false; p.h.num_qubits()],
        }
    };
    let init_sector = res.sector_of_bits(&init_bits)?;
    let sectors: Vec<Value> = res
        .sectors
        .iter()
        .enumerate()
        .map(|(i, s)| json!({"index": i, "signs": s.signs, "hamiltonian": json_value(&s.hamiltonian.to_json_string())}))
        .collect();
    match a.sector {
        Some(k) => {
            let s = res.sectors.get(k).ok_or_else(|| anyhow!("sector {k} out of range ({} sectors)", res.sectors.len()))?;
            ctx.write_primary(&out, &(s.hamiltonian.to_json_string() + "\n"))?;
        }
        None => {
            let doc = json!({
                "num_qubits": res.num_qubits,
                "symmetry_generators": res.symmetry_generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                "removed_qubits": res.removed_qubits,
                "sectors": sectors,
            });
            ctx.write_primary(&out, &pretty(&doc))?;
        }
    }
    Ok(json!({
        "num_qubits": res.num_qubits,
        "removed_qubits": res.removed_qubits,
        "symmetry_generators": res.symmetry_generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "num_sectors": res.sectors.len(),
        "initial_state_sector": init_sector,
    }))
}

fn synth_config(steps: usize, time: f64, method: SynthesisMethod) -> anyhow::Result<SynthesisConfig> {
    Ok(SynthesisConfig::new(steps, time, method)?)
}

fn cmd_synth(ctx: &mut Ctx, a: &SynthArgs) -> anyhow::Result<Value> {
    let p = load_problem(ctx, &a.ham)?;
    let mut cfg = synth_config(a.steps, a.time, a.method.into())?;
    cfg.order = match a.order {
        OrderArg::Given => TermOrder::Given,
        OrderArg::Descending => TermOrder::Descending,
    };
    let prog = trotter_circuit(&p.init, &p.h, std::slice::from_ref(&p.h), &cfg)?;
    let out = a.output.clone().unwrap_or_else(|| default_output(Some(&a.ham.input), "circuit.json"));
    ctx.write_primary(&out, &(prog.circuit.to_json_string() + "\n"))?;
    if let Some(q) = &a.qasm {
        ctx.write(q, &prog.circuit.to_qasm())?;
    }
    if let Some(f) = &a.frame {
        let doc = json!({
            "frame": serde_json::to_value(&prog.frame)?,
            "transformed_hamiltonian": json_value(&prog.transformed_observables[0].to_json_string()),
            "energy_offset": prog.energy_offset,
        });
        ctx.write(f, &pretty(&doc))?;
    }
    let m = prog.circuit.metrics();
    Ok(json!({
        "method": cfg.method.to_string(),
        "num_qubits": prog.circuit.num_qubits(),
        "depth": m.depth,
        "two_qubit_count": m.two_qubit_count,
        "total_gates": m.total_gates,
        "rz_count": m.rz_count,
        "frame_gates": prog.frame.gate_count(),
        "energy_offset": prog.energy_offset,
    }))
}

fn cmd_transpile(ctx: &mut Ctx, a: &TranspileArgs) -> anyhow::Result<Value> {
    ctx.input(&a.input);
    let c = Circuit::from_json_str(&read_text(&a.input)?).map_err(|e| anyhow!("{}: {e}", a.input.display()))?;
    let g = load_coupling(ctx, &a.coupling.coupling, c.num_qubits())?;
    let best = transpile_best_of(&c, &g, a.coupling.trials, ctx.seed)?;
    let out = a.output.clone().unwrap_or_else(|| default_output(Some(&a.input), "transpiled.json"));
    ctx.write_primary(&out, &(best.circuit.to_json_string() + "\n"))?;
    Ok(json!({ "report": best.report }))
}

fn cmd_simulate(ctx: &mut Ctx, a: &SimulateArgs) -> anyhow::Result<Value> {
    ctx.input(&a.input);
    let c = Circuit::from_json_str(&read_text(&a.input)?).map_err(|e| anyhow!("{}: {e}", a.input.display()))?;
    let psi = apply_circuit(&c, &StateVector::zero(c.num_qubits())?)?;
    let value = match &a.observable {
        Some(path) => {
            ctx.input(path);
            Some(expectation(&PauliSum::read_json(path)?, &psi)?)
        }
        None => None,
    };
    let counts = sample_counts(&psi, a.shots, ctx.seed);
    let doc = json!({
        "num_qubits": c.num_qubits(),
        "expectation": value,
        "shots": a.shots,
        "counts": counts,
        "probabilities": psi.probabilities(),
    });
    let out = a.output.clone().unwrap_or_else(|| default_output(Some(&a.input), "simulation.json"));
    ctx.write_primary(&out, &pretty(&doc))?;
    Ok(json!({"expectation": value, "shots": a.shots, "distinct_outcomes": counts.len()}))
}

fn engine_of(engine: EngineArg, steps: usize, method: MethodArg) -> Engine {
    match engine {
        EngineArg::Exact => Engine::Exact,
        EngineArg::Trotter => Engine::Trotter { steps, method: method.into() },
    }
}

fn cmd_trajectory(ctx: &mut Ctx, a: &TrajectoryArgs) -> anyhow::Result<Value> {
    let p = load_problem(ctx, &a.ham)?;
    let obs = load_observable(ctx, &a.obs, &p)?;
    let grid = TimeGrid::new(a.grid.t_end, a.grid.dt)?;
    let traj = trajectory(&p.h, &obs, &p.init, &grid, engine_of(a.engine, a.steps, a.method))?;
    let id = a.id.clone().unwrap_or_else(|| {
        a.ham.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sample".into())
    });
    let m = TrajectoryMatrix::new(vec![id], grid.points(), vec![traj.iter().map(|x| x.1).collect()], None)?;
    let out = a.output.clone().unwrap_or_else(|| default_output(Some(&a.ham.input), "trajectory.csv"));
    ctx.write_primary(&out, &m.to_csv_string()?)?;
    Ok(json!({"points": traj.len(), "first": traj[0].1, "last": traj[traj.len() - 1].1}))
}

fn cmd_sweep(ctx: &mut Ctx, a: &SweepArgs) -> anyhow::Result<Value> {
    let p = load_problem(ctx, &a.ham)?;
    let obs = load_observable(ctx, &a.obs, &p)?;
    let grid = TimeGrid::new(a.grid.t_end, a.grid.dt)?;
    let mut fractions = a.fractions.clone();
    let mut threshold = None;
    if let Some(eps) = a.eps {
        let res = truncate(&p.h, &TruncationConfig::new(eps, grid.t_max())?);
        let f = 100.0 * res.kept.len() as f64 / p.h.len().max(1) as f64;
        fractions.push(f);
        threshold = Some(json!({"eps": eps, "threshold": res.threshold, "fraction": f}));
    }
    let rows = truncation_sweep(&p.h, &obs, &p.init, &grid, &fractions)?;
    let out = a.output.clone().unwrap_or_else(|| default_output(Some(&a.ham.input), "sweep.csv"));
    ctx.write_primary(&out, &sweep_to_csv(&rows)?)?;
    Ok(json!({"rows": rows, "truncation": threshold}))
}

fn cmd_fit(ctx: &mut Ctx, a: &FitArgs) -> anyhow::Result<Value> {
    let data = match (&a.input, a.synthetic) {
        (Some(path), _) => {
            ctx.input(path);
            TrajectoryMatrix::read_csv(path)?
        }
        (None, Some(n)) => {
            let d = trajectory_dataset(n, 4, 12, &TimeGrid::new(14.0, 0.5)?, 0.01, ctx.seed)?;
            if let Some(w) = &a.write_data {
                ctx.write(w, &d.to_csv_string()?)?;
            }
            d
        }
        (None, None) => bail!("either a CSV input or --synthetic is required"),
    };
    let (scores, best_components) = match a.components {
        Some(k) => {
            let m = cross_validate(&data, k, a.folds, ctx.seed)?;
            (vec![json!({"n_components": k, "rmse": m.rmse, "r2": m.r2})], k)
        }
        None => {
            let (rows, best) = component_sweep(&data, a.max_components, a.folds, ctx.seed)?;
            let k = rows[best].n_components;
            (rows.iter().map(|r| serde_json::to_value(r).expect("row serialises")).collect(), k)
        }
    };
    let best = scores.iter().find(|s| s["n_components"] == best_components).cloned().unwrap_or(Value::Null);
    let doc = json!({
        "samples": data.num_samples(),
        "features": data.num_features(),
        "folds": a.folds,
        "scores": scores,
        "best": best,
    });
    let out = a.output.clone().unwrap_or_else(|| default_output(a.input.as_deref(), "metrics.json"));
    ctx.write_primary(&out, &pretty(&doc))?;
    if let Some(mp) = &a.model {
        let model = pls_fit(&data, best_components)?;
        ctx.write(mp, &(serde_json::to_string_pretty(&model)? + "\n"))?;
    }
    Ok(doc)
}

#[derive(Serialize)]
struct ReportRow {
    method: &'static str,
    depth: usize,
    two_qubit_count: usize,
    total_gates: usize,
    depth_reduction: f64,
    two_qubit_reduction: f64,
}

fn cmd_report(ctx: &mut Ctx, a: &ReportArgs) -> anyhow::Result<Value> {
    let p = load_problem(ctx, &a.ham)?;
    let n = p.h.num_qubits();
    let truncated = truncate(&p.h, &TruncationConfig::new(a.eps, a.tmax)?).kept;
    let g = load_coupling(ctx, &a.coupling.coupling, n)?;
    let measure = |h: &PauliSum, method: SynthesisMethod| -> anyhow::Result<(usize, usize, usize)> {
        let prog = trotter_circuit(&p.init, h, &[], &synth_config(a.steps, a.time, method)?)?;
        let best = transpile_best_of(&prog.circuit, &g, a.coupling.trials, ctx.seed)?;
        Ok((best.report.depth, best.report.two_qubit_count, best.report.total_gates))
    };
    let base = measure(&p.h, SynthesisMethod::Default)?;
    let mut rows = Vec::new();
    for label in &a.compare {
        let (name, metrics) = match label.to_ascii_lowercase().as_str() {
            "default" => ("Default", base),
            "truncation" => ("Truncation", measure(&truncated, SynthesisMethod::Default)?),
            "cdat" => ("CDAT", measure(&truncated, SynthesisMethod::Cdat)?),
            "rustiq" | "greedy" => ("Rustiq", measure(&truncated, SynthesisMethod::Greedy)?),
            other => bail!("unknown report row {other:?} (expected default, truncation, cdat, rustiq)"),
        };
        let ratio = |a: usize, b: usize| if b == 0 { f64::INFINITY } else { a as f64 / b as f64 };
        rows.push(ReportRow {
            method: name,
            depth: metrics.0,
            two_qubit_count: metrics.1,
            total_gates: metrics.2,
            depth_reduction: ratio(base.0, metrics.0),
            two_qubit_reduction: ratio(base.1, metrics.1),
        });
    }
    let mut csv = String::from("method,depth,two_qubit_count,total_gates,depth_reduction,two_qubit_reduction\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{:.2},{:.2}\n",
            r.method, r.depth, r.two_qubit_count, r.total_gates, r.depth_reduction, r.two_qubit_reduction
        ));
    }
    let out = a.output.clone().unwrap_or_else(|| default_output(Some(&a.ham.input), "report.csv"));
    ctx.write_primary(&out, &csv)?;
    Ok(json!({"rows": rows, "truncated_terms": truncated.len(), "full_terms": p.h.len()}))
}
