//! Command-line front end: run configuration, presets and the `reach`,
//! `ilqr`, `verify` and `bench` subcommands.
//!
//! Every run writes into one output directory:
//!
//! | file                   | written by      | contents                                   |
//! |------------------------|-----------------|--------------------------------------------|
//! | `config.json`          | all             | the resolved [`RunConfig`]                 |
//! | `trajectory.json`      | reach, ilqr     | baseline (pure adjoint) tube               |
//! | `phi.csv`              | reach, ilqr     | `t,phi` of the baseline (reach) or best tube |
//! | `iterates.json`        | ilqr            | the full [`IterateLog`]                    |
//! | `cost.csv`             | ilqr            | `iteration,t_end,phi_terminal,cumulative_seconds` |
//! | `best_trajectory.json` | ilqr            | best iterate's tube                        |
//! | `phi_iter_<i>.csv`     | ilqr            | `t,phi` of snapshot iterate `i`            |
//! | `verify.json`          | verify          | [`VerifyReport`]                           |
//! | `samples.csv`          | verify          | Monte Carlo points (optional)              |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dynamics::{Ltv, RobotArm, System, VanDerPol, VectorField};
use crate::embedding::{Embedding, EmbeddingState, HypercontrolSchedule, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalVector, DEFAULT_CORNER_CAP};
use crate::normotope::{NormKind, Normotope};
use crate::reach_ilqr::{self, IlqrConfig, IterateLog, Phase};
use crate::verify::{self, ContainmentReport, LtvExactnessReport, PmpReport};

/// Which vector field to run, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    RobotArm {
        #[serde(default)]
        params: RobotArm,
    },
    Vanderpol {
        #[serde(default)]
        params: VanDerPol,
    },
    LtvRotation,
    /// Constant `ẋ = Ax`, `a` row-major.
    LtvConstant { a: Vec<f64> },
}

impl SystemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::RobotArm { .. } => "robot-arm",
            SystemSpec::Vanderpol { .. } => "vanderpol",
            SystemSpec::LtvRotation => "ltv-rotation",
            SystemSpec::LtvConstant { .. } => "ltv-constant",
        }
    }

    pub fn build(&self) -> Result<System> {
        Ok(match self {
            SystemSpec::RobotArm { params } => System::RobotArm(params.clone()),
            SystemSpec::Vanderpol { params } => System::VanDerPol(params.clone()),
            SystemSpec::LtvRotation => System::Ltv(Ltv::rotation()),
            SystemSpec::LtvConstant { a } => {
                let n = (a.len() as f64).sqrt().round() as usize;
                if n * n != a.len() || n == 0 {
                    return Err(Error::Config(format!("ltv-constant matrix has {} entries, not a square", a.len())));
                }
                System::Ltv(Ltv::constant(DMatrix::from_row_slice(n, n, a)))
            }
        })
    }
}

/// Initial normotope. Give either `shape` (row-major α₀) or `p_matrix`, in
/// which case `α₀ = P^{1/2} / p_radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSet {
    pub center: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_matrix: Option<Vec<f64>>,
    #[serde(default = "default_p_radius")]
    pub p_radius: f64,
    #[serde(default = "default_offset")]
    pub offset: f64,
}

fn default_p_radius() -> f64 {
    0.1
}

fn default_offset() -> f64 {
    1.0
}

fn square(data: &[f64], n: usize, what: &str) -> Result<DMatrix<f64>> {
    if data.len() != n * n {
        return Err(Error::Config(format!("{what} needs {} entries, found {}", n * n, data.len())));
    }
    Ok(DMatrix::from_row_slice(n, n, data))
}

impl InitialSet {
    pub fn shape_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.center.len();
        match (&self.shape, &self.p_matrix) {
            (Some(shape), None) => square(shape, n, "initial.shape"),
            (None, Some(p)) => {
                let p = square(p, n, "initial.p_matrix")?;
                if (&p - p.transpose()).amax() > 1e-12 * p.amax().max(1.0) {
                    return Err(Error::Config("initial.p_matrix must be symmetric".into()));
                }
                if !(self.p_radius > 0.0) {
                    return Err(Error::Config("initial.p_radius must be positive".into()));
                }
                let eig = SymmetricEigen::new(p);
                if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
                    return Err(Error::Config("initial.p_matrix must be positive definite".into()));
                }
                let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
                Ok(&eig.eigenvectors * sqrt * eig.eigenvectors.transpose() / self.p_radius)
            }
            _ => Err(Error::Config("initial set needs exactly one of `shape` or `p_matrix`".into())),
        }
    }

    pub fn normotope(&self, kind: NormKind) -> Result<Normotope> {
        Normotope::new(kind, DVector::from_column_slice(&self.center), self.shape_matrix()?, self.offset)
    }
}

/// Monte Carlo and oracle settings for `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySettings {
    pub samples: usize,
    pub tol: f64,
    pub pmp_trials: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            samples: 1000,
            tol: 1e-6,
            pmp_trials: 100,
        }
    }
}

/// Complete description of one run, as stored in `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub norm: NormKind,
    pub initial: InitialSet,
    #[serde(default)]
    pub t0: f64,
    pub tf: f64,
    pub h: f64,
    /// Disturbance box as `[lo, hi]` pairs; empty for undisturbed systems.
    #[serde(default)]
    pub disturbance: Vec<[f64; 2]>,
    #[serde(default = "default_corner_cap")]
    pub corner_cap: usize,
    #[serde(default)]
    pub ilqr: IlqrConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub verify: VerifySettings,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_corner_cap() -> usize {
    DEFAULT_CORNER_CAP
}

fn default_output() -> PathBuf {
    PathBuf::from("runs/latest")
}

impl RunConfig {
    /// Settings of the named benchmark.
    pub fn preset(system: &str) -> Result<Self> {
        let base = |system: SystemSpec, initial: InitialSet, tf: f64, ilqr: IlqrConfig| RunConfig {
            output: PathBuf::from("runs").join(system.name()),
            system,
            norm: NormKind::L2,
            initial,
            t0: 0.0,
            tf,
            h: 0.01,
            disturbance: Vec::new(),
            corner_cap: DEFAULT_CORNER_CAP,
            ilqr,
            seed: 0,
            verify: VerifySettings::default(),
        };
        match system {
            "robot-arm" => Ok(base(
                SystemSpec::RobotArm {
                    params: RobotArm::default(),
                },
                InitialSet {
                    center: vec![1.5, 1.5, 0.0, 0.0],
                    shape: None,
                    p_matrix: Some(DMatrix::<f64>::identity(4, 4).as_slice().to_vec()),
                    p_radius: 0.1,
                    offset: 1.0,
                },
                10.0,
                IlqrConfig {
                    snapshot_iterations: vec![1, 2, 5, 10, 20],
                    ..IlqrConfig::robot_arm()
                },
            )),
            "vanderpol" => Ok(base(
                SystemSpec::Vanderpol {
                    params: VanDerPol::default(),
                },
                InitialSet {
                    center: vec![-2.0, 0.0],
                    shape: Some(vec![80.0, 0.0, 0.0, 80.0]),
                    p_matrix: None,
                    p_radius: 0.1,
                    offset: 1.0,
                },
                7.0,
                IlqrConfig {
                    snapshot_iterations: vec![1, 10, 100, 500, 1000, 1500],
                    ..IlqrConfig::vanderpol()
                },
            )),
            "ltv-rotation" => Ok(RunConfig {
                h: 1e-3,
                ..base(
                    SystemSpec::LtvRotation,
                    InitialSet {
                        center: vec![1.0, 0.0],
                        shape: Some(vec![1.0, 0.0, 0.0, 1.0]),
                        p_matrix: None,
                        p_radius: 0.1,
                        offset: 1.0,
                    },
                    std::f64::consts::FRAC_PI_2,
                    IlqrConfig::default(),
                )
            }),
            other => Err(Error::Config(format!(
                "no preset for `{other}` (expected robot-arm, vanderpol or ltv-rotation)"
            ))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let sys = self.system.build()?;
        let n = sys.state_dim();
        if self.initial.center.len() != n {
            return Err(Error::Config(format!(
                "initial.center has {} entries but {} has dimension {n}",
                self.initial.center.len(),
                self.system.name()
            )));
        }
        self.initial.normotope(self.norm)?;
        if self.disturbance.len() != sys.disturbance_dim() {
            return Err(Error::Config(format!(
                "disturbance box has {} entries but {} has {} disturbance inputs",
                self.disturbance.len(),
                self.system.name(),
                sys.disturbance_dim()
            )));
        }
        self.disturbance_box()?;
        TimeGrid::new(self.t0, self.tf, self.h)?;
        if self.corner_cap == 0 {
            return Err(Error::Config("corner_cap must be positive".into()));
        }
        if !(self.verify.tol >= 0.0) {
            return Err(Error::Config("verify.tol must be non-negative".into()));
        }
        self.ilqr.validate()
    }

    pub fn disturbance_box(&self) -> Result<IntervalVector> {
        Ok(IntervalVector::new(
            self.disturbance
                .iter()
                .map(|&[lo, hi]| Interval::try_new(lo, hi))
                .collect::<Result<_>>()?,
        ))
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t0, self.tf, self.h)
    }

    pub fn initial_normotope(&self) -> Result<Normotope> {
        self.initial.normotope(self.norm)
    }

    /// Caps the total iteration count, shortening or dropping later phases.
    pub fn limit_iterations(&mut self, max: usize) {
        let mut left = max;
        let mut phases = Vec::new();
        for p in &self.ilqr.phases {
            if left == 0 {
                break;
            }
            let iterations = p.iterations.min(left);
            left -= iterations;
            phases.push(Phase { iterations, ..*p });
        }
        self.ilqr.phases = phases;
    }
}

/// Flags shared by `reach` and `ilqr`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration; flags below override its values.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Start from a preset: robot-arm, vanderpol or ltv-rotation.
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long)]
    pub norm: Option<NormKind>,
    #[arg(long)]
    pub tf: Option<f64>,
    /// Euler step.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub phi_max: Option<f64>,
    /// Cap on the total number of iLQR iterations.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Replace the phases with one phase at this regularization.
    #[arg(long)]
    pub regularization: Option<f64>,
    #[arg(long)]
    pub step_size: Option<f64>,
    /// `adjoint` or `raw`.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Log zero instead of elapsed seconds, for byte-identical cost CSVs.
    #[arg(long)]
    pub no_wall_time: bool,
}

impl RunArgs {
    /// Loads the config file or preset, then applies the flag overrides.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut config = match (&self.config, &self.system) {
            (Some(path), system) => {
                let config = RunConfig::load(path)?;
                if let Some(name) = system {
                    if name != config.system.name() {
                        return Err(Error::Config(format!(
                            "--system {name} contradicts the config's system {}",
                            config.system.name()
                        )));
                    }
                }
                config
            }
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => return Err(Error::Config("give --config <file> or --system <name>".into())),
        };
        if let Some(norm) = self.norm {
            config.norm = norm;
        }
        if let Some(tf) = self.tf {
            config.tf = tf;
        }
        if let Some(h) = self.h {
            config.h = h;
        }
        if let Some(phi_max) = self.phi_max {
            config.ilqr.phi_max = phi_max;
        }
        if let Some(r) = self.regularization {
            let total = config.ilqr.total_iterations();
            config.ilqr = config.ilqr.clone().single_phase(total, r);
        }
        if let Some(max) = self.max_iters {
            config.limit_iterations(max);
        }
        if let Some(step) = self.step_size {
            config.ilqr.step_size = step;
        }
        if let Some(policy) = &self.policy {
            config.ilqr.policy = serde_json::from_value(serde_json::Value::String(policy.clone()))
                .map_err(|_| Error::Config(format!("unknown policy `{policy}` (expected adjoint or raw)")))?;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output = out.clone();
        }
        if self.no_wall_time {
            config.ilqr.record_wall_time = false;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Run directory holding `config.json` and a trajectory.
    #[arg(long)]
    pub run_dir: Option<PathBuf>,
    /// Config file; defaults to `<run-dir>/config.json`.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Trajectory file; defaults to the run directory's best or baseline tube.
    #[arg(long, short)]
    pub trajectory: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the sampled points, every `stride`-th grid time, to `samples.csv`.
    #[arg(long)]
    pub write_samples: Option<usize>,
    /// Where to write `verify.json`; defaults to the trajectory's directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, short, default_value = "runs/bench")]
    pub out: PathBuf,
    /// Cap the iterations of each preset (for smoke runs).
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Monte Carlo samples for the robot-arm containment check.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long)]
    pub no_wall_time: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single forward pass of the embedding with zero feed-forward.
    Reach(RunArgs),
    /// Reach-iLQR hypercontrol optimization.
    Ilqr(RunArgs),
    /// Monte Carlo containment (plus LTV oracles) for a computed tube.
    Verify(VerifyArgs),
    /// Runs the robot-arm and Van der Pol presets end to end.
    Bench(BenchArgs),
}

#[derive(Debug, Parser)]
#[command(name = "normotope", version, about = "Normotope reachable tubes and Reach-iLQR")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Combined output of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub system: String,
    pub trajectory: PathBuf,
    pub t_end: f64,
    pub containment: ContainmentReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ltv_exactness: Option<LtvExactnessReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmp: Option<PmpReport>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// `t,phi` rows for one trajectory.
pub fn write_phi_csv<W: Write>(traj: &Trajectory, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["t", "phi"])?;
    for (t, phi) in traj.times.iter().zip(&traj.phi) {
        wtr.write_record([t.to_string(), phi.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

fn prepare_output(config: &RunConfig) -> Result<()> {
    fs::create_dir_all(&config.output)?;
    write_json(&config.output.join("config.json"), config)
}

/// Pure adjoint tube for the configuration.
pub fn baseline(config: &RunConfig) -> Result<Trajectory> {
    let sys = config.system.build()?;
    let emb = Embedding::new(&sys, config.norm)
        .with_disturbance(config.disturbance_box()?)
        .with_corner_cap(config.corner_cap);
    let x0 = EmbeddingState::from_normotope(&config.initial_normotope()?);
    let grid = config.grid()?;
    let schedule = HypercontrolSchedule::zeros(grid, sys.state_dim());
    emb.simulate(&x0, &schedule, config.ilqr.policy, config.ilqr.phi_max)
}

pub fn cmd_reach(config: &RunConfig) -> Result<Trajectory> {
    prepare_output(config)?;
    let traj = baseline(config)?;
    write_json(&config.output.join("trajectory.json"), &traj)?;
    write_phi_csv(&traj, fs::File::create(config.output.join("phi.csv"))?)?;
    Ok(traj)
}

pub fn cmd_ilqr(config: &RunConfig) -> Result<IterateLog> {
    prepare_output(config)?;
    let sys = config.system.build()?;
    let emb = Embedding::new(&sys, config.norm)
        .with_disturbance(config.disturbance_box()?)
        .with_corner_cap(config.corner_cap);
    let x0 = EmbeddingState::from_normotope(&config.initial_normotope()?);
    let log = reach_ilqr::run(&emb, &x0, config.grid()?, &config.ilqr)?;

    let out = &config.output;
    write_json(&out.join("iterates.json"), &log)?;
    write_json(&out.join("trajectory.json"), &log.initial_trajectory)?;
    write_json(&out.join("best_trajectory.json"), &log.best_trajectory)?;
    log.write_cost_csv(fs::File::create(out.join("cost.csv"))?)?;
    write_phi_csv(&log.best_trajectory, fs::File::create(out.join("phi.csv"))?)?;
    for snap in &log.snapshots {
        let path = out.join(format!("phi_iter_{}.csv", snap.iteration));
        write_phi_csv(&snap.trajectory, fs::File::create(path)?)?;
    }
    Ok(log)
}

/// Resolves the config and trajectory paths of a `verify` invocation.
fn verify_inputs(args: &VerifyArgs) -> Result<(PathBuf, PathBuf)> {
    let config = match (&args.config, &args.run_dir) {
        (Some(c), _) => c.clone(),
        (None, Some(dir)) => dir.join("config.json"),
        (None, None) => return Err(Error::Config("give --run-dir or --config".into())),
    };
    let trajectory = match (&args.trajectory, &args.run_dir) {
        (Some(t), _) => t.clone(),
        (None, Some(dir)) => {
            let best = dir.join("best_trajectory.json");
            if best.exists() {
                best
            } else {
                dir.join("trajectory.json")
            }
        }
        (None, None) => return Err(Error::Config("give --run-dir or --trajectory".into())),
    };
    Ok((config, trajectory))
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<VerifyReport> {
    let (config_path, traj_path) = verify_inputs(args)?;
    let config = RunConfig::load(&config_path)?;
    let traj: Trajectory = read_json(&traj_path)?;
    let sys = config.system.build()?;
    let n0 = config.initial_normotope()?;
    if traj.is_empty() || traj.states[0].dim() != sys.state_dim() {
        return Err(Error::Config(format!(
            "trajectory {} does not match the {} system",
            traj_path.display(),
            config.system.name()
        )));
    }
    let samples = args.samples.unwrap_or(config.verify.samples);
    let tol = args.tol.unwrap_or(config.verify.tol);
    let seed = args.seed.unwrap_or(config.seed);
    let w_box = config.disturbance_box()?;
    let containment = verify::mc_containment(&sys, &n0, &traj, &w_box, samples, seed, tol)?;

    let (ltv_exactness, pmp) = match &sys {
        System::Ltv(ltv) => {
            let exact = verify::ltv_exactness(ltv, &n0, config.tf, config.h)?;
            let pmp = if config.norm == NormKind::L2 {
                Some(verify::pmp_check(ltv, &n0, config.tf, config.h, config.verify.pmp_trials, seed)?)
            } else {
                None
            };
            (Some(exact), pmp)
        }
        _ => (None, None),
    };

    let out_dir = match &args.out {
        Some(p) => p.clone(),
        None => traj_path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    fs::create_dir_all(&out_dir)?;
    if let Some(stride) = args.write_samples {
        let paths = verify::sample_paths(&sys, &n0, &traj, &w_box, samples, seed)?;
        let mut wtr = csv::Writer::from_path(out_dir.join("samples.csv"))?;
        let n = sys.state_dim();
        let mut header = vec!["sample".to_string(), "t".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        wtr.write_record(&header)?;
        for (i, path) in paths.iter().enumerate() {
            for k in (0..path.len()).step_by(stride.max(1)) {
                let mut row = vec![i.to_string(), traj.times[k].to_string()];
                row.extend(path[k].iter().map(|v| v.to_string()));
                wtr.write_record(&row)?;
            }
        }
        wtr.flush()?;
    }
    let report = VerifyReport {
        system: config.system.name().to_string(),
        trajectory: traj_path,
        t_end: traj.t_end,
        containment,
        ltv_exactness,
        pmp,
    };
    write_json(&out_dir.join("verify.json"), &report)?;
    Ok(report)
}

/// Runs both benchmark presets and checks the robot-arm tube.
pub fn cmd_bench(args: &BenchArgs) -> Result<bool> {
    let mut ok = true;
    for name in ["robot-arm", "vanderpol"] {
        let mut config = RunConfig::preset(name)?;
        config.output = args.out.join(name);
        config.ilqr.record_wall_time = !args.no_wall_time;
        if let Some(max) = args.max_iters {
            config.limit_iterations(max);
        }
        let start = Instant::now();
        let log = cmd_ilqr(&config)?;
        let best = log.best();
        let reached = best.t_end >= config.tf - 1e-9;
        println!(
            "{name}: {} iterations in {:.1} s, best iteration {} reaches t = {:.2}{} with phi = {:.4}",
            log.iterates.len(),
            start.elapsed().as_secs_f64(),
            best.iteration,
            best.t_end,
            if reached { "" } else { " (short of t_f)" },
            best.phi_terminal,
        );
        if name == "robot-arm" {
            let report = cmd_verify(&VerifyArgs {
                run_dir: Some(config.output.clone()),
                config: None,
                trajectory: None,
                samples: Some(args.samples),
                tol: None,
                seed: None,
                write_samples: Some(10),
                out: None,
            })?;
            println!(
                "{name}: containment {} samples, {} violations, worst margin {:.3e}",
                report.containment.samples, report.containment.violations, report.containment.worst_margin
            );
            ok &= report.containment.passed();
        }
    }
    Ok(ok)
}

/// Exit code for a parsed command line.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Reach(args) => args.resolve().and_then(|c| {
            let traj = cmd_reach(&c)?;
            println!(
                "{}: t_end = {:.4}{}, phi = {:.6}, wrote {}",
                c.system.name(),
                traj.t_end,
                if traj.truncated { " (truncated)" } else { "" },
                traj.terminal_cost(),
                c.output.display()
            );
            Ok(0)
        }),
        Command::Ilqr(args) => args.resolve().and_then(|c| {
            let log = cmd_ilqr(&c)?;
            let best = log.best();
            println!(
                "{}: best iteration {} of {}, t_end = {:.4}, phi = {:.6} ({}), wrote {}",
                c.system.name(),
                best.iteration,
                log.iterates.len(),
                best.t_end,
                best.phi_terminal,
                log.stop_reason,
                c.output.display()
            );
            Ok(0)
        }),
        Command::Verify(args) => cmd_verify(args).map(|r| {
            println!(
                "{}: {} samples, {} violations, worst margin {:.3e} (tol {:.1e})",
                r.system, r.containment.samples, r.containment.violations, r.containment.worst_margin, r.containment.tol
            );
            if let Some(e) = &r.ltv_exactness {
                println!(
                    "ltv exactness: |y - y0| = {:.3e}, boundary deviation {:.3e}",
                    e.offset_deviation, e.boundary_deviation
                );
            }
            if let Some(p) = &r.pmp {
                println!(
                    "pmp: costate residual {:.3e}, min gap {:.3e}, identity residual {:.3e}",
                    p.costate_residual, p.min_gap, p.identity_residual
                );
            }
            i32::from(!r.containment.passed())
        }),
        Command::Bench(args) => cmd_bench(args).map(|ok| i32::from(!ok)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}\n\n{}", Cli::command().render_usage());
            2
        }
    }
}
