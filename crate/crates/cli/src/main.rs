use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use qetlab::eigensolve::{dump, ground_state, Method};
use qetlab::entanglement::{density_spectrum, entanglement_entropy, Bipartition, Keep, LogBase};
use qetlab::models::{check_commutator_condition, Boundary, FermionKind, ModelDescription, ModelKind};
use qetlab::pauli::{expectation, Axis};
use qetlab::qet::{analytic_identity_applies, evaluate, projector, rho_qet, Outcome, QetConfig};
use qetlab::sweep::{run_sweep, Metric, SweepSpec};
use qetlab::{table1, Error, GroundState, QetResult, SpinChainModel};

/// Quantum energy teleportation on short spin chains.
#[derive(Parser, Debug)]
#[command(name = "qetlab", version)]
struct Cli {
    /// Worker threads for sweeps and shot batches (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ground energy, gap and per-site offsets.
    Ground {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "auto")]
        method: Method,
        /// Also write the amplitudes in the binary dump format.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// One protocol evaluation as a CSV row.
    Qet {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        qet: QetArgs,
        #[arg(long, default_value = "auto")]
        method: Method,
    },
    /// Entanglement entropy of one cut.
    Entropy {
        #[command(flatten)]
        model: ModelArgs,
        /// Left block is sites 0..cut (default N/2).
        #[arg(long)]
        cut: Option<usize>,
        #[arg(long, default_value = "e", value_parser = parse_base)]
        base: LogBase,
        #[arg(long, default_value = "auto")]
        method: Method,
    },
    /// Coupling-plane heatmaps as CSV.
    Sweep(SweepArgs),
    /// Exact and sampled reproduction of the J1 scan.
    Table1 {
        #[arg(long, default_value_t = table1::DEFAULT_SHOTS)]
        shots: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Skip sampling.
        #[arg(long)]
        exact_only: bool,
    },
    /// Run the invariant suite on one model.
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        qet: QetArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// ising, cluster, cluster_zz, y_cluster or jw_mapped.
    #[arg(long, default_value = "cluster_zz")]
    model: ModelKind,
    #[arg(long = "N", default_value_t = 6)]
    n: usize,
    #[arg(long)]
    hx: Option<f64>,
    #[arg(long)]
    hz: Option<f64>,
    /// Ising coupling axis.
    #[arg(long, default_value = "X")]
    axis: Axis,
    #[arg(long = "J1")]
    j1: Option<f64>,
    #[arg(long = "J2")]
    j2: Option<f64>,
    /// Add the 1/2 ZZ bonds to the cluster model.
    #[arg(long)]
    zz: bool,
    #[arg(long)]
    hy: Option<f64>,
    #[arg(long = "Jy")]
    jy: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// ssh or kitaev (jw_mapped only).
    #[arg(long)]
    fermion: Option<FermionKind>,
    #[arg(long, default_value = "open")]
    boundary: Boundary,
}

#[derive(Args, Debug, Clone)]
struct QetArgs {
    #[arg(long = "nA", default_value_t = 1)]
    n_a: usize,
    #[arg(long = "nB", default_value_t = 4)]
    n_b: usize,
    #[arg(long = "axisA", default_value = "X")]
    axis_a: Axis,
    #[arg(long = "axisB", default_value = "Y")]
    axis_b: Axis,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// SweepSpec JSON; flags below are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    qet: QetArgs,
    #[arg(long)]
    x_param: Option<String>,
    #[arg(long)]
    y_param: Option<String>,
    #[arg(long, value_parser = parse_range)]
    x_range: Option<[f64; 2]>,
    #[arg(long, value_parser = parse_range)]
    y_range: Option<[f64; 2]>,
    #[arg(long, default_value_t = qetlab::sweep::DEFAULT_RESOLUTION)]
    resolution: usize,
    #[arg(long, default_value = "both")]
    metric: Metric,
    /// Record the wall-clock time in the metadata (breaks byte-identical reruns).
    #[arg(long)]
    timestamp: bool,
}

fn parse_base(s: &str) -> Result<LogBase, String> {
    match s {
        "e" | "natural" => Ok(LogBase::Natural),
        "2" => Ok(LogBase::Two),
        other => Err(format!("log base must be e or 2, got {other:?}")),
    }
}

fn parse_range(s: &str) -> Result<[f64; 2], String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok([parse(lo)?, parse(hi)?])
}

impl ModelArgs {
    fn kind(&self) -> ModelKind {
        match self.model {
            ModelKind::Cluster if self.zz => ModelKind::ClusterZz,
            kind => kind,
        }
    }

    fn description(&self) -> Result<ModelDescription, Error> {
        let kind = self.kind();
        let mut desc = ModelDescription::new(kind, self.n).with_boundary(self.boundary);
        let given = [
            ("h_x", self.hx),
            ("h_z", self.hz),
            ("J1", self.j1),
            ("J2", self.j2),
            ("h_y", self.hy),
            ("J_y", self.jy),
            ("lambda", self.lambda),
        ];
        for (name, value) in given {
            if let Some(v) = value {
                if !kind.coupling_names().contains(&name) {
                    return Err(Error::Invalid(format!("{kind} has no coupling {name}")));
                }
                desc = desc.with_coupling(name, v);
            }
        }
        if kind == ModelKind::Ising {
            desc = desc.with_axis(self.axis);
        }
        if let Some(f) = self.fermion {
            desc = desc.with_fermion(f);
        }
        Ok(desc)
    }

    fn build(&self) -> Result<SpinChainModel, Error> {
        self.description()?.build()
    }
}

impl QetArgs {
    fn config(&self) -> QetConfig {
        QetConfig::new(self.n_a, self.n_b, self.axis_a, self.axis_b)
    }
}

fn solve(model: &SpinChainModel, method: Method) -> Result<(SpinChainModel, GroundState), Error> {
    let ground = ground_state(model, method)?;
    if ground.degenerate {
        eprintln!("warning: ground state is degenerate; using the solver's eigenvector");
    }
    Ok((model.calibrate(&ground)?, ground))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_ground(model: &ModelArgs, method: Method, dump_path: Option<&Path>, out: Option<&Path>) -> Result<(), Error> {
    let (calibrated, ground) = solve(&model.build()?, method)?;
    if let Some(path) = dump_path {
        dump::save(path, ground.as_slice())?;
    }
    let report = serde_json::json!({
        "model": calibrated.describe(),
        "E0": ground.energy,
        "gap": ground.gap,
        "degenerate": ground.degenerate,
        "epsilon": calibrated.epsilon(),
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&report)?))
}

fn cmd_qet(model: &ModelArgs, qet: &QetArgs, method: Method, out: Option<&Path>) -> Result<(), Error> {
    let (calibrated, ground) = solve(&model.build()?, method)?;
    let config = qet.config();
    let result = evaluate(&ground, &calibrated, &config)?;
    if !result.support_disjoint && result.eta_imag.abs() > 1e-10 {
        eprintln!("warning: eta has imaginary part {:e}", result.eta_imag);
    }
    if !analytic_identity_applies(&calibrated, &config)? {
        eprintln!("note: n_A lies in the support of H_nB; the closed form need not equal the density-matrix energy");
    }
    emit(out, &format!("{}\n{}\n", QetResult::CSV_HEADER, result.csv_row()))
}

fn cmd_entropy(
    model: &ModelArgs,
    cut: Option<usize>,
    base: LogBase,
    method: Method,
    out: Option<&Path>,
) -> Result<(), Error> {
    let m = model.build()?;
    let ground = ground_state(&m, method)?;
    let part = Bipartition::new(m.n_sites(), cut.unwrap_or(m.n_sites() / 2))?;
    let s = entanglement_entropy(ground.as_slice(), &part, Keep::Right, base)?;
    emit(out, &format!("{s:.12e}\n"))
}

fn sweep_spec(args: &SweepArgs) -> Result<SweepSpec, Error> {
    if let Some(path) = &args.config {
        return SweepSpec::from_json(&fs::read_to_string(path)?);
    }
    let mut spec = SweepSpec::for_family(args.model.kind())?;
    spec.model = args.model.description()?;
    if let Some(p) = &args.x_param {
        spec.x_param = p.clone();
    }
    if let Some(p) = &args.y_param {
        spec.y_param = p.clone();
    }
    if let Some(r) = args.x_range {
        spec.x_range = r;
    }
    if let Some(r) = args.y_range {
        spec.y_range = r;
    }
    spec.resolution = args.resolution;
    spec.metric = args.metric;
    spec.qet = args.qet.config();
    spec.validate()?;
    Ok(spec)
}

/// `out.csv` becomes `out.entropy.csv` and `out.qet_energy.csv` when both
/// metrics are written.
fn metric_path(base: &Path, metric: Metric, several: bool) -> PathBuf {
    if !several {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}.{}.{ext}", metric.as_str()))
}

fn cmd_sweep(args: &SweepArgs, out: Option<&Path>) -> Result<(), Error> {
    let spec = sweep_spec(args)?;
    let output = run_sweep(&spec)?;
    if !output.degenerate_cells.is_empty() {
        eprintln!("note: {} cells have degenerate ground states", output.degenerate_cells.len());
    }
    let stamp = args
        .timestamp
        .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs().to_string()).unwrap_or_default());
    let target = out.map(Path::to_path_buf).or_else(|| spec.output.clone());
    let several = output.grids.len() > 1;
    for (metric, grid) in output.grids {
        let grid = match &stamp {
            Some(t) => grid.with_metadata("timestamp_unix", t.clone()),
            None => grid,
        };
        match &target {
            Some(path) => fs::write(metric_path(path, metric, several), grid.to_csv())?,
            None => print!("{}", grid.to_csv()),
        }
    }
    Ok(())
}

fn cmd_table1(shots: u64, seed: u64, exact_only: bool, out: Option<&Path>) -> Result<(), Error> {
    let points = if exact_only { table1::exact_table()? } else { table1::sampled_table(shots, seed)? };
    if !exact_only && shots < qetlab::shots::MIN_RELIABLE_SHOTS {
        eprintln!("warning: {shots} shots per observable; standard errors are unreliable");
    }
    emit(out, &table1::to_csv(&points))
}

struct Checks {
    lines: Vec<String>,
    failed: usize,
}

impl Checks {
    fn record(&mut self, name: &str, ok: bool, detail: String) {
        self.lines.push(format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" }));
        if !ok {
            self.failed += 1;
        }
    }
}

fn cmd_check(model: &ModelArgs, qet: &QetArgs, out: Option<&Path>) -> Result<bool, Error> {
    let bare = model.build()?;
    let n = bare.n_sites();
    let (calibrated, ground) = solve(&bare, Method::Auto)?;
    let config = qet.config();
    let mut checks = Checks { lines: Vec::new(), failed: 0 };

    let norm: f64 = ground.amplitudes.iter().map(|a| a.norm_sqr()).sum();
    checks.record("normalization", (norm - 1.0).abs() < 1e-10, format!("|psi|^2 - 1 = {:e}", norm - 1.0));
    let residual = qetlab::eigensolve::residual_inf(bare.bulk_terms(), ground.as_slice(), ground.energy)?;
    checks.record("eigen-residual", residual < 1e-8, format!("{residual:e}"));
    let worst_local = (0..n)
        .map(|s| Ok(expectation(ground.as_slice(), &calibrated.local_hamiltonian(s)?)?.re.abs()))
        .collect::<Result<Vec<f64>, Error>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.record("local zero point", worst_local < 1e-10, format!("max |<H_n>| = {worst_local:e}"));
    let condition = check_commutator_condition(&calibrated, config.n_b, config.axis_b)?;
    checks.record(
        "commutator condition",
        condition.holds,
        format!("{} residual terms", condition.residual.terms().len()),
    );

    let r = evaluate(&ground, &calibrated, &config)?;
    checks.record(
        "outcome probabilities",
        (r.p_plus + r.p_minus - 1.0).abs() < 1e-10,
        format!("p+ = {:.12}", r.p_plus),
    );
    checks.record("xi nonnegative", r.xi >= -1e-10, format!("xi = {:e}", r.xi));
    checks.record(
        "analytic energy sign",
        r.e_analytic <= 1e-12 && ((r.e_analytic < 0.0) == (r.eta.abs() > 1e-12)),
        format!("e = {:e}, eta = {:e}", r.e_analytic, r.eta),
    );
    if r.support_disjoint {
        checks.record("eta real", r.eta_imag.abs() < 1e-10, format!("Im eta = {:e}", r.eta_imag));
    }
    let p_plus = projector::<f64>(config.axis_a, config.n_a, Outcome::Plus, n)?;
    checks.record(
        "projector idempotent",
        p_plus.product(&p_plus)? == p_plus.canonicalize(),
        String::from("P(+)^2 = P(+)"),
    );
    if n <= qetlab::qet::RHO_DENSE_MAX {
        let rho = rho_qet(&ground, &config, r.theta)?;
        match density_spectrum(&rho) {
            Ok(spectrum) => {
                let min = spectrum.last().copied().unwrap_or(0.0);
                checks.record("rho_qet density matrix", true, format!("trace 1, Hermitian, min eigenvalue {min:e}"));
            }
            Err(e) => checks.record("rho_qet density matrix", false, e.to_string()),
        }
    }
    if analytic_identity_applies(&calibrated, &config)? {
        checks.record(
            "analytic = density matrix",
            r.identity_residual() < 1e-8,
            format!("{:e}", r.identity_residual()),
        );
    } else {
        checks.lines.push("SKIP analytic = density matrix: n_A lies in the support of H_nB".into());
    }
    if n >= 2 {
        let part = Bipartition::half_chain(n)?;
        let left = entanglement_entropy(ground.as_slice(), &part, Keep::Left, LogBase::Natural)?;
        let right = entanglement_entropy(ground.as_slice(), &part, Keep::Right, LogBase::Natural)?;
        checks.record("Schmidt symmetry", (left - right).abs() < 1e-10, format!("S_L - S_R = {:e}", left - right));
    }
    emit(out, &(checks.lines.join("\n") + "\n"))?;
    Ok(checks.failed == 0)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Invalid(_) | Error::OutOfRange(_) | Error::Partition(_) | Error::Unsupported(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Ground { model, method, dump } => cmd_ground(model, *method, dump.as_deref(), out)?,
        Command::Qet { model, qet, method } => cmd_qet(model, qet, *method, out)?,
        Command::Entropy { model, cut, base, method } => cmd_entropy(model, *cut, *base, *method, out)?,
        Command::Sweep(args) => cmd_sweep(args, out)?,
        Command::Table1 { shots, seed, exact_only } => cmd_table1(*shots, *seed, *exact_only, out)?,
        Command::Check { model, qet } => return cmd_check(model, qet, out),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(inner) = source {
                eprintln!("  caused by: {inner}");
                source = inner.source();
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
