//! `boussinesq`: run, verify and compare simulations of the diffusive Boussinesq system.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boussinesq_core::dynamics::{parse_override, run_to_dir, ChannelTable, RunConfig, DIAGNOSTICS_FILE};
use boussinesq_core::error::Error;
use boussinesq_core::estimates::{
    hard_failures, resolution_stability, stability_table, summary_table, twin_run_pair, verify_samples,
    verify_trajectory, write_report, EstimateReport, Perturbation, SampleOptions, Trajectory,
};
use clap::{Args, Parser, Subcommand};

/// Verification report written next to the diagnostics.
const REPORT_FILE: &str = "verification.json";
const TWIN_TABLE_FILE: &str = "twin.csv";
const TWIN_REPORT_FILE: &str = "twin_report.json";
const STABILITY_FILE: &str = "stability.json";

#[derive(Parser, Debug)]
#[command(name = "boussinesq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// Run configuration (JSON).
    #[arg(long, short)]
    config: PathBuf,
    /// Override a configuration entry, e.g. `--set n=256` or `--set omega0.radius=0.8`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output directory; defaults to a hashed name under `$BOUSSINESQ_OUT` (or `runs/`).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Root for default output directories.
    #[arg(long, env = "BOUSSINESQ_OUT", default_value = "runs")]
    out_root: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct SampleArgs {
    /// Skip the checks on random band-limited samples.
    #[arg(long)]
    no_samples: bool,
    /// Number of random samples.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Seed of the random samples.
    #[arg(long)]
    sample_seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one configuration and write its diagnostics.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the estimate suite on a configuration (after running it) or on a run directory.
    Verify {
        /// Run directory, or a configuration file to run first.
        target: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        samples: SampleArgs,
    },
    /// Run a configuration and a perturbed copy side by side.
    Twin {
        #[command(flatten)]
        config: ConfigArgs,
        /// Perturbation (JSON: `{"omega": <initial data>, "amplitude": <sup of δu₀>}`).
        #[arg(long, short)]
        perturbation: PathBuf,
        /// Configuration of the perturbed member; must match the base numerics.
        #[arg(long)]
        partner: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run and verify the cross product of override values, then compare constants.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// One axis of the grid, e.g. `--grid n=128,256`; axes with the same
        /// number of values can be zipped with `--zip`.
        #[arg(long = "grid", value_name = "KEY=V1,V2,...")]
        grid: Vec<String>,
        /// Pair the axes element-wise instead of taking their cross product.
        #[arg(long)]
        zip: bool,
        /// Runs executed concurrently.
        #[arg(long, default_value_t = 2)]
        jobs: usize,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        samples: SampleArgs,
    },
    /// Print the summary of a verification report.
    Report {
        /// Run directory or report file.
        target: PathBuf,
    },
    /// Export channels of a run as two-column `time,value` CSV files.
    PlotData {
        /// Run directory.
        dir: PathBuf,
        /// Channels to export (comma separated or repeated).
        #[arg(long, short, value_delimiter = ',', required = true)]
        channels: Vec<String>,
        /// Directory for the exported files; defaults to `<dir>/plot`.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

/// Failure of a subcommand, carrying its exit status.
#[derive(Debug)]
enum Failure {
    Core(Error),
    Verification(Vec<String>),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::CflViolation { .. } | Error::NonFinite { .. }) => 3,
            Failure::Core(Error::MissingChannels(_)) | Failure::Verification(_) => 4,
            Failure::Core(_) | Failure::Usage(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Verification(names) => format!("hard checks failed: {}", names.join(", ")),
            Failure::Usage(m) => m.clone(),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn load_config(path: &Path, overrides: &[String]) -> CliResult<RunConfig> {
    let base = RunConfig::from_path(path)?;
    let pairs = overrides
        .iter()
        .map(|o| parse_override(o))
        .collect::<Result<Vec<_>, _>>()?;
    let config = base.with_overrides(&pairs)?;
    config.validate()?;
    Ok(config)
}

fn output_dir(output: &OutputArgs, config_path: &Path, config: &RunConfig, prefix: &str) -> PathBuf {
    output.out.clone().unwrap_or_else(|| {
        let stem = config_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into());
        output
            .out_root
            .join(format!("{prefix}{stem}-{}", &config.config_hash()[..12]))
    })
}

fn sample_options(args: &SampleArgs) -> Option<SampleOptions> {
    if args.no_samples {
        return None;
    }
    let mut options = SampleOptions {
        count: args.samples,
        ..SampleOptions::default()
    };
    if let Some(seed) = args.sample_seed {
        options.seed = seed;
    }
    Some(options)
}

fn print_run_summary(dir: &Path, table: &ChannelTable) {
    println!("wrote {} rows to {}", table.len(), dir.join(DIAGNOSTICS_FILE).display());
    if let (Ok(t), Ok(theta), Ok(omega)) = (
        table.column("time"),
        table.column("theta_l2"),
        table.column("omega_linf"),
    ) {
        if let Some(i) = t.len().checked_sub(1) {
            println!(
                "t = {:.6}  |theta|_L2 = {:.6e}  |omega|_Linf = {:.6e}",
                t[i], theta[i], omega[i]
            );
        }
    }
}

fn cmd_run(config_args: &ConfigArgs, output: &OutputArgs) -> CliResult {
    let config = load_config(&config_args.config, &config_args.overrides)?;
    let dir = output_dir(output, &config_args.config, &config, "");
    let out = run_to_dir(&config, &dir)?;
    print_run_summary(&dir, &out.table);
    Ok(())
}

fn verify_dir(dir: &Path, samples: Option<&SampleOptions>) -> CliResult<Vec<EstimateReport>> {
    let traj = Trajectory::load(dir)?;
    let mut reports = verify_trajectory(&traj)?;
    if let Some(options) = samples {
        reports.extend(
            verify_samples(&traj.config, options)?
                .into_iter()
                .map(|r| r.with_hash(traj.hash())),
        );
    }
    write_report(&dir.join(REPORT_FILE), &reports)?;
    Ok(reports)
}

fn finish_verification(reports: &[EstimateReport]) -> CliResult {
    print!("{}", summary_table(reports));
    let failed: Vec<String> = hard_failures(reports).into_iter().map(str::to_owned).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failed))
    }
}

fn cmd_verify(target: &Path, overrides: &[String], output: &OutputArgs, samples: &SampleArgs) -> CliResult {
    let dir = if target.is_dir() {
        if !overrides.is_empty() {
            return Err(Failure::Usage("--set applies to configuration files, not run directories".into()));
        }
        target.to_path_buf()
    } else {
        let config = load_config(target, overrides)?;
        let dir = output_dir(output, target, &config, "");
        let out = run_to_dir(&config, &dir)?;
        print_run_summary(&dir, &out.table);
        dir
    };
    let reports = verify_dir(&dir, sample_options(samples).as_ref())?;
    println!("report: {}", dir.join(REPORT_FILE).display());
    finish_verification(&reports)
}

fn cmd_twin(
    config_args: &ConfigArgs,
    perturbation: &Path,
    partner: Option<&Path>,
    output: &OutputArgs,
) -> CliResult {
    let config = load_config(&config_args.config, &config_args.overrides)?;
    let partner = match partner {
        Some(p) => load_config(p, &config_args.overrides)?,
        None => config.clone(),
    };
    let perturbation = Perturbation::from_path(perturbation)?;
    let out = twin_run_pair(&config, &partner, &perturbation)?;
    let dir = output_dir(output, &config_args.config, &config, "twin-");
    std::fs::create_dir_all(&dir).map_err(Error::from)?;
    std::fs::write(dir.join("config.json"), config.to_json_pretty()).map_err(Error::from)?;
    out.table.write_csv(&dir.join(TWIN_TABLE_FILE))?;
    write_report(&dir.join(TWIN_REPORT_FILE), &out.reports)?;
    println!("wrote {}", dir.join(TWIN_TABLE_FILE).display());
    finish_verification(&out.reports)
}

/// Expands `key=v1,v2` axes into override lists.
fn expand_grid(axes: &[String], zip: bool) -> CliResult<Vec<Vec<(String, String)>>> {
    if axes.is_empty() {
        return Err(Failure::Usage("sweep needs at least one --grid axis".into()));
    }
    let mut parsed = Vec::new();
    for axis in axes {
        let (key, values) = parse_override(axis)?;
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_owned()).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            return Err(Failure::Usage(format!("grid axis `{key}` has no values")));
        }
        parsed.push((key, values));
    }
    if zip {
        let len = parsed[0].1.len();
        if parsed.iter().any(|(_, v)| v.len() != len) {
            return Err(Failure::Usage("--zip needs axes of equal length".into()));
        }
        return Ok((0..len)
            .map(|i| parsed.iter().map(|(k, v)| (k.clone(), v[i].clone())).collect())
            .collect());
    }
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in &parsed {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut next = c.clone();
                    next.push((key.clone(), v.clone()));
                    next
                })
            })
            .collect();
    }
    Ok(combos)
}

fn cmd_sweep(
    config_args: &ConfigArgs,
    axes: &[String],
    zip: bool,
    jobs: usize,
    output: &OutputArgs,
    samples: &SampleArgs,
) -> CliResult {
    let base = load_config(&config_args.config, &config_args.overrides)?;
    let combos = expand_grid(axes, zip)?;
    let configs = combos
        .iter()
        .map(|c| {
            let config = base.with_overrides(c)?;
            config.validate()?;
            Ok(config)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let root = output_dir(output, &config_args.config, &base, "sweep-");
    let options = sample_options(samples);
    let labels: Vec<String> = combos
        .iter()
        .map(|c| c.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join("_"))
        .collect();

    let jobs = jobs.max(1);
    let mut results: Vec<Option<CliResult<Vec<EstimateReport>>>> = (0..configs.len()).map(|_| None).collect();
    for chunk in (0..configs.len()).collect::<Vec<_>>().chunks(jobs) {
        let finished: Vec<(usize, CliResult<Vec<EstimateReport>>)> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&i| {
                    let dir = root.join(&labels[i]);
                    let config = &configs[i];
                    let options = options.as_ref();
                    (i, s.spawn(move || -> CliResult<Vec<EstimateReport>> {
                        run_to_dir(config, &dir)?;
                        verify_dir(&dir, options)
                    }))
                })
                .collect();
            handles
                .into_iter()
                .map(|(i, h)| (i, h.join().expect("sweep worker panicked")))
                .collect()
        });
        for (i, r) in finished {
            results[i] = Some(r);
        }
    }

    let mut all = Vec::new();
    let mut failed = Vec::new();
    for (label, result) in labels.iter().zip(results) {
        match result.expect("every run scheduled") {
            Ok(reports) => {
                let hard = hard_failures(&reports).len();
                println!("{label}: {} checks, {hard} hard failures", reports.len());
                failed.extend(hard_failures(&reports).iter().map(|n| format!("{label}/{n}")));
                all.push((label.clone(), reports));
            }
            Err(e) => {
                eprintln!("{label}: {}", e.message());
                return Err(e);
            }
        }
    }
    if let Some((first_label, first)) = all.first() {
        let mut stability = serde_json::Map::new();
        for (label, reports) in all.iter().skip(1) {
            let rows = resolution_stability(first, reports);
            println!("\nconstants: {first_label} vs {label}");
            print!("{}", stability_table(&rows));
            stability.insert(
                format!("{first_label} vs {label}"),
                serde_json::to_value(&rows).map_err(Error::from)?,
            );
        }
        std::fs::write(
            root.join(STABILITY_FILE),
            serde_json::to_string_pretty(&stability).map_err(Error::from)?,
        )
        .map_err(Error::from)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failed))
    }
}

fn format_number(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::Number(n) => format!("{:.4e}", n.as_f64().unwrap_or(f64::NAN)),
        serde_json::Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn cmd_report(target: &Path) -> CliResult {
    let path = if target.is_dir() {
        target.join(REPORT_FILE)
    } else {
        target.to_path_buf()
    };
    let text = std::fs::read_to_string(&path).map_err(Error::from)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
    let entries = value
        .as_array()
        .ok_or_else(|| Failure::Usage(format!("{} is not a report array", path.display())))?;
    let mut failed = Vec::new();
    for e in entries {
        let name = e["name"].as_str().unwrap_or("?");
        let pass = e["pass"].as_bool().unwrap_or(false);
        let class = e["class"].as_str().unwrap_or("?");
        let constant = if e["empirical_constant"].is_null() {
            &e["max_defect"]
        } else {
            &e["empirical_constant"]
        };
        println!(
            "{name:<40} {class:<20} {:<4} margin {:>12} constant {:>12}",
            if pass { "ok" } else { "FAIL" },
            format_number(&e["margin"]),
            format_number(constant)
        );
        if !pass && class != "empirical_constant" {
            failed.push(name.to_owned());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failed))
    }
}

fn cmd_plot_data(dir: &Path, channels: &[String], out: Option<&Path>) -> CliResult {
    let table = ChannelTable::read_csv(&dir.join(DIAGNOSTICS_FILE))?;
    let unknown: Vec<&str> = channels.iter().filter(|c| !table.has(c)).map(String::as_str).collect();
    if !unknown.is_empty() {
        return Err(Failure::Usage(format!(
            "unknown channels: {}; available: {}",
            unknown.join(", "),
            table.columns().join(", ")
        )));
    }
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| dir.join("plot"));
    std::fs::create_dir_all(&out).map_err(Error::from)?;
    let times = table.times()?;
    for channel in channels {
        let mut export = ChannelTable::new(vec!["time".into(), channel.clone()]);
        for (t, v) in times.iter().zip(table.column(channel)?) {
            export.push(vec![*t, v]);
        }
        let path = out.join(format!("{channel}.csv"));
        export.write_csv(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, output } => cmd_run(config, output),
        Command::Verify {
            target,
            overrides,
            output,
            samples,
        } => cmd_verify(target, overrides, output, samples),
        Command::Twin {
            config,
            perturbation,
            partner,
            output,
        } => cmd_twin(config, perturbation, partner.as_deref(), output),
        Command::Sweep {
            config,
            grid,
            zip,
            jobs,
            output,
            samples,
        } => cmd_sweep(config, grid, *zip, *jobs, output, samples),
        Command::Report { target } => cmd_report(target),
        Command::PlotData { dir, channels, out } => cmd_plot_data(dir, channels, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_expands_to_cross_product() {
        let combos = expand_grid(&["n=128,256".into(), "dt=1e-3,5e-4".into()], false).unwrap();
        assert_eq!(combos.len(), 4);
        assert_eq!(combos[1], vec![("n".into(), "128".into()), ("dt".into(), "5e-4".into())]);
        let zipped = expand_grid(&["n=128,256".into(), "dt=1e-3,5e-4".into()], true).unwrap();
        assert_eq!(zipped.len(), 2);
        assert_eq!(zipped[1], vec![("n".into(), "256".into()), ("dt".into(), "5e-4".into())]);
    }

    #[test]
    fn empty_grid_is_an_error() {
        assert!(matches!(expand_grid(&[], false), Err(Failure::Usage(_))));
        assert!(matches!(expand_grid(&["n=".into()], false), Err(Failure::Usage(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Core(Error::NonFinite { time: 0.0 }).exit_code(), 3);
        assert_eq!(Failure::Core(Error::MissingChannels(vec!["x".into()])).exit_code(), 4);
        assert_eq!(Failure::Core(Error::InvalidGrid { n: 100 }).exit_code(), 2);
        assert_eq!(Failure::Verification(vec![]).exit_code(), 4);
    }
}
