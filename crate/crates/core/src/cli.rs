//! Command-line workflow: run configuration, subcommands and their handlers.
//!
//! Each handler reads its inputs, computes everything, and only then writes
//! its outputs, so a failing command leaves no partial files behind. The
//! `pipeline` subcommand chains the same handlers through files.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::calibration::{solve_hand_eye, HandEyeSolution, MarkerObservation, DEFAULT_MIN_OBSERVATIONS};
use crate::error::{Error, Result};
use crate::io;
use crate::kinematics::{DhTable, JointConfig};
use crate::learning::{
    build_dataset, hyperparameter_search, mlp_train, Encoding, History, MlpModel, Role, SearchGrid, TrainConfig,
    DEFAULT_HIDDEN,
};
use crate::phystwin::{
    generate_trajectory_with, run_collection, run_collection_with_calibration, Collection, Trajectory,
    TrajectoryParams, TwinConfig, TwinParams,
};
use crate::pipeline::{compare, inject, ComparisonReport};

/// File names used by the `pipeline` subcommand inside its output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub trajectory: PathBuf,
    pub test_trajectory: PathBuf,
    pub dataset: PathBuf,
    pub test_dataset: PathBuf,
    pub calibration: PathBuf,
    pub nn1: PathBuf,
    pub nn2: PathBuf,
    pub injection: PathBuf,
    pub reports: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            trajectory: "trajectory.csv".into(),
            test_trajectory: "test_trajectory.csv".into(),
            dataset: "dataset.csv".into(),
            test_dataset: "test_dataset.csv".into(),
            calibration: "calibration.json".into(),
            nn1: "nn1.json".into(),
            nn2: "nn2.json".into(),
            injection: "injection.csv".into(),
            reports: "reports".into(),
        }
    }
}

/// Everything a run needs. `seed` drives the training trajectory and the
/// training shuffles; the held-out trajectory uses `test_seed`, or `seed + 1`
/// when unset. `twin.seed` picks the robot itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub test_seed: Option<u64>,
    pub twin: TwinParams,
    pub trajectory: TrajectoryParams,
    pub test_trajectory: TrajectoryParams,
    pub training: TrainConfig,
    pub hidden: Vec<usize>,
    pub nn1_encoding: Encoding,
    pub nn2_encoding: Encoding,
    pub search: SearchGrid,
    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        let seed = 1;
        Self {
            seed,
            test_seed: None,
            twin: TwinParams::default(),
            trajectory: TrajectoryParams::training(),
            test_trajectory: TrajectoryParams::test(),
            training: TrainConfig {
                seed,
                ..TrainConfig::default()
            },
            hidden: DEFAULT_HIDDEN.to_vec(),
            nn1_encoding: Encoding::CurrentPreviousEncoded,
            nn2_encoding: Encoding::CurrentPreviousEncoded,
            search: SearchGrid::default(),
            paths: Paths::default(),
        }
    }
}

impl RunConfig {
    /// Reads a config file, or the defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let cfg: RunConfig = match path {
            Some(p) => io::read_json(p)?,
            None => RunConfig::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets the run seed and the training seed together.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.training.seed = seed;
        self
    }

    pub fn test_seed(&self) -> u64 {
        self.test_seed.unwrap_or(self.seed.wrapping_add(1))
    }

    pub fn dh(&self) -> &DhTable {
        &self.twin.dh_nominal
    }

    pub fn validate(&self) -> Result<()> {
        self.trajectory.validate()?;
        self.test_trajectory.validate()?;
        self.training.validate()?;
        self.twin.build()?;
        if self.hidden.contains(&0) {
            return Err(Error::InvalidConfig("hidden layer widths must be positive".into()));
        }
        Ok(())
    }

    fn trajectory_for(&self, test: bool) -> (&TrajectoryParams, u64) {
        if test {
            (&self.test_trajectory, self.test_seed())
        } else {
            (&self.trajectory, self.seed)
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "errinject", version, about = "Learned error injection for simulated robots")]
pub struct Cli {
    /// Run configuration (JSON); defaults are used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the run seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print or write the default run configuration.
    DefaultConfig {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random setpoint trajectory.
    GenTraj {
        /// Use the held-out trajectory parameters and seed.
        #[arg(long)]
        test: bool,
        #[arg(long)]
        n_goals: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the physical twin over a trajectory.
    Simulate {
        #[arg(long)]
        trajectory: PathBuf,
        /// Use the held-out seed for the measurement noise.
        #[arg(long)]
        test: bool,
        /// Hand-eye calibration to apply; fitted on the run when omitted.
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Validation-only ground truth; defaults next to `--out`.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Fit the hand-eye calibration to a dataset.
    Calibrate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one error network.
    Train(TrainArgs),
    /// Inject learned errors into a setpoint trajectory.
    Inject {
        #[arg(long)]
        nn1: PathBuf,
        #[arg(long)]
        nn2: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a physical dataset with injection results.
    Evaluate {
        #[arg(long)]
        physical: PathBuf,
        #[arg(long)]
        injected: PathBuf,
        /// Report directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid search over the configured hyperparameters.
    Search {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_parser = parse_role)]
        role: Role,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full run from trajectory generation to the report.
    Pipeline {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_parser = parse_role)]
    pub role: Role,
    /// OC, CP or CPE; defaults to the configured encoding for the role.
    #[arg(long, value_parser = parse_encoding)]
    pub encoding: Option<Encoding>,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Loss history CSV; defaults next to `--out`.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

fn parse_role(s: &str) -> std::result::Result<Role, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_encoding(s: &str) -> std::result::Result<Encoding, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn write_all(files: &[(PathBuf, String)]) -> Result<()> {
    files.iter().try_for_each(|(p, c)| io::write_file(p, c))
}

pub fn gen_traj(cfg: &RunConfig, test: bool) -> Result<Trajectory> {
    let (params, seed) = cfg.trajectory_for(test);
    generate_trajectory_with(cfg.dh(), params, seed)
}

/// Twin run over `setpoints` with the noise stream of the training or
/// held-out seed.
pub fn simulate(
    cfg: &RunConfig,
    setpoints: Vec<JointConfig>,
    test: bool,
    calibration: Option<&HandEyeSolution>,
) -> Result<(TwinConfig, Collection)> {
    let twin = cfg.twin.build()?;
    let (params, seed) = cfg.trajectory_for(test);
    let traj = Trajectory {
        setpoints,
        seed,
        interpolation_step: params.interpolation_step,
    };
    let collection = match calibration {
        Some(c) => run_collection_with_calibration(&twin, &traj, c)?,
        None => run_collection(&twin, &traj)?,
    };
    Ok((twin, collection))
}

pub fn calibrate(dh: &DhTable, records: &[crate::phystwin::StepRecord]) -> Result<HandEyeSolution> {
    let obs: Vec<MarkerObservation> = records
        .iter()
        .map(|r| MarkerObservation {
            robot_gripper: dh.forward_unchecked(&r.measured_q),
            tracker_marker: r.tracker_marker,
        })
        .collect();
    solve_hand_eye(&obs, DEFAULT_MIN_OBSERVATIONS)
}

pub fn train(
    cfg: &RunConfig,
    records: &[crate::phystwin::StepRecord],
    role: Role,
    encoding: Encoding,
    hidden: &[usize],
    training: &TrainConfig,
) -> Result<(MlpModel, History)> {
    let ds = build_dataset(records, role, encoding, cfg.dh())?;
    mlp_train(&ds, hidden, training)
}

fn load_model(path: &Path, role: Role) -> Result<MlpModel> {
    let m: MlpModel = io::read_json(path)?;
    m.validate().map_err(|e| Error::parse(path, e))?;
    if m.role != role {
        return Err(Error::parse(path, format!("expected a {role} model, found {}", m.role)));
    }
    Ok(m)
}

/// Runs one subcommand. Progress goes to stdout.
pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    match cli.command {
        Command::DefaultConfig { out } => {
            let text = io::to_json(&cfg);
            match out {
                Some(p) => io::write_file(&p, &text)?,
                None => print!("{text}"),
            }
        }
        Command::GenTraj { test, n_goals, out } => cmd_gen_traj(&cfg, test, n_goals, &out)?,
        Command::Simulate {
            trajectory,
            test,
            calibration,
            out,
            truth,
        } => cmd_simulate(&cfg, &trajectory, test, calibration.as_deref(), &out, truth.as_deref())?,
        Command::Calibrate { dataset, out } => cmd_calibrate(&cfg, &dataset, &out)?,
        Command::Train(args) => cmd_train(&cfg, &args)?,
        Command::Inject {
            nn1,
            nn2,
            trajectory,
            out,
        } => cmd_inject(&cfg, &nn1, &nn2, &trajectory, &out)?,
        Command::Evaluate { physical, injected, out } => {
            cmd_evaluate(&cfg, &physical, &injected, &out)?;
        }
        Command::Search {
            dataset,
            role,
            workers,
            out,
        } => cmd_search(&cfg, &dataset, role, workers, &out)?,
        Command::Pipeline { out } => {
            cmd_pipeline(&cfg, &out)?;
        }
    }
    Ok(())
}

pub fn cmd_gen_traj(cfg: &RunConfig, test: bool, n_goals: Option<usize>, out: &Path) -> Result<()> {
    let mut cfg = cfg.clone();
    if let Some(n) = n_goals {
        if test {
            cfg.test_trajectory.n_goals = n;
        } else {
            cfg.trajectory.n_goals = n;
        }
    }
    let traj = gen_traj(&cfg, test)?;
    io::write_file(out, &io::trajectory_to_csv(&traj.setpoints))?;
    println!("trajectory: {} steps -> {}", traj.len(), out.display());
    Ok(())
}

pub fn cmd_simulate(
    cfg: &RunConfig,
    trajectory: &Path,
    test: bool,
    calibration: Option<&Path>,
    out: &Path,
    truth: Option<&Path>,
) -> Result<()> {
    let setpoints = io::read_trajectory(trajectory)?;
    let cal: Option<HandEyeSolution> = calibration.map(io::read_json).transpose()?;
    let (twin, col) = simulate(cfg, setpoints, test, cal.as_ref())?;
    let truth_path = truth.map(Path::to_path_buf).unwrap_or_else(|| sibling(out, ".truth.json"));
    let truth_doc = io::Truth::new(&twin.dh_true, &twin.handeye_true, &col.records);
    write_all(&[
        (out.to_path_buf(), io::dataset_to_csv(&col.records)),
        (truth_path, io::to_json(&truth_doc)),
    ])?;
    println!("dataset: {} steps -> {}", col.records.len(), out.display());
    Ok(())
}

pub fn cmd_calibrate(cfg: &RunConfig, dataset: &Path, out: &Path) -> Result<()> {
    let records = io::read_dataset(dataset, cfg.dh())?;
    let sol = calibrate(cfg.dh(), &records)?;
    io::write_file(out, &io::to_json(&sol))?;
    println!(
        "calibration: residual {:.4} deg / {:.4} mm -> {}",
        sol.residual_rot.to_degrees(),
        sol.residual_trans * 1e3,
        out.display()
    );
    Ok(())
}

pub fn cmd_train(cfg: &RunConfig, args: &TrainArgs) -> Result<()> {
    let records = io::read_dataset(&args.dataset, cfg.dh())?;
    let encoding = args.encoding.unwrap_or(match args.role {
        Role::Controller => cfg.nn1_encoding,
        Role::Mechanism => cfg.nn2_encoding,
    });
    let hidden = args.hidden.clone().unwrap_or_else(|| cfg.hidden.clone());
    let training = TrainConfig {
        batch_size: args.batch_size.unwrap_or(cfg.training.batch_size),
        learning_rate: args.learning_rate.unwrap_or(cfg.training.learning_rate),
        epochs: args.epochs.unwrap_or(cfg.training.epochs),
        ..cfg.training.clone()
    };
    let (model, history) = train(cfg, &records, args.role, encoding, &hidden, &training)?;
    let history_path = args.history.clone().unwrap_or_else(|| sibling(&args.out, ".loss.csv"));
    write_all(&[
        (args.out.clone(), io::to_json(&model)),
        (history_path, io::history_to_csv(&history)),
    ])?;
    println!(
        "{} {}: best val mse {:.6} at epoch {} -> {}",
        args.role,
        encoding,
        history.best_val_mse,
        history.best_epoch,
        args.out.display()
    );
    Ok(())
}

pub fn cmd_inject(cfg: &RunConfig, nn1: &Path, nn2: &Path, trajectory: &Path, out: &Path) -> Result<()> {
    let nn1 = load_model(nn1, Role::Controller)?;
    let nn2 = load_model(nn2, Role::Mechanism)?;
    let setpoints = io::read_trajectory(trajectory)?;
    let results = inject(&nn1, &nn2, cfg.dh(), &setpoints)?;
    io::write_file(out, &io::injection_to_csv(&results))?;
    let clamped = results.iter().filter(|r| r.clamped).count();
    println!("injection: {} steps ({clamped} clamped) -> {}", results.len(), out.display());
    Ok(())
}

pub fn cmd_evaluate(cfg: &RunConfig, physical: &Path, injected: &Path, out: &Path) -> Result<ComparisonReport> {
    let phys = io::read_dataset(physical, cfg.dh())?;
    let sim = io::read_injection(injected)?;
    let report = compare(cfg.dh(), &phys, &sim)?;
    let files: Vec<(PathBuf, String)> = io::report_files(&report)
        .into_iter()
        .map(|(name, text)| (out.join(name), text))
        .collect();
    write_all(&files)?;
    print!("{}", io::summary_table(&report));
    Ok(report)
}

pub fn cmd_search(cfg: &RunConfig, dataset: &Path, role: Role, workers: usize, out: &Path) -> Result<()> {
    let records = io::read_dataset(dataset, cfg.dh())?;
    let results = hyperparameter_search(&records, role, cfg.dh(), &cfg.search, &cfg.training, workers)?;
    write_all(&[
        (out.join("search_results.csv"), io::search_results_to_csv(&results)),
        (out.join("search_curves.csv"), io::search_curves_to_csv(&results)),
    ])?;
    if let Some(best) = results.first() {
        println!("search: {} cells, best {} ({:.6})", results.len(), best.cell.label(), best.best_val_mse());
    }
    Ok(())
}

/// gen-traj (training and held-out) -> simulate -> calibrate -> simulate the
/// held-out trajectory with that calibration -> train both networks ->
/// inject -> evaluate.
pub fn cmd_pipeline(cfg: &RunConfig, out: &Path) -> Result<ComparisonReport> {
    let p = |f: &Path| out.join(f);
    let paths = &cfg.paths;
    io::write_file(&out.join("config.json"), &io::to_json(cfg))?;
    cmd_gen_traj(cfg, false, None, &p(&paths.trajectory))?;
    cmd_gen_traj(cfg, true, None, &p(&paths.test_trajectory))?;
    cmd_simulate(cfg, &p(&paths.trajectory), false, None, &p(&paths.dataset), None)?;
    cmd_calibrate(cfg, &p(&paths.dataset), &p(&paths.calibration))?;
    cmd_simulate(
        cfg,
        &p(&paths.test_trajectory),
        true,
        Some(&p(&paths.calibration)),
        &p(&paths.test_dataset),
        None,
    )?;
    for (role, model) in [(Role::Controller, &paths.nn1), (Role::Mechanism, &paths.nn2)] {
        cmd_train(
            cfg,
            &TrainArgs {
                dataset: p(&paths.dataset),
                role,
                encoding: None,
                hidden: None,
                batch_size: None,
                learning_rate: None,
                epochs: None,
                out: p(model),
                history: None,
            },
        )?;
    }
    cmd_inject(cfg, &p(&paths.nn1), &p(&paths.nn2), &p(&paths.test_trajectory), &p(&paths.injection))?;
    cmd_evaluate(cfg, &p(&paths.test_dataset), &p(&paths.injection), &p(&paths.reports))
}

/// Exit code for an error: 2 for usage and configuration problems, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        "invalid_config" => 2,
        _ => 1,
    }
}

/// One-line machine-parsable error: `error kind=<kind> message=<json string>`.
pub fn error_line(err: &Error) -> String {
    let msg = serde_json::to_string(&err.to_string()).expect("string serializes");
    format!("error kind={} message={msg}", err.kind())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            exit_code(&e)
        }
    }
}
