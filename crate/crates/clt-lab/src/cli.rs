//! Command-line surface binding the pipeline: instance ingestion,
//! analysis, certification, simulation, sweeps, self-test, and static
//! plot emission.
//!
//! Exit codes: 0 success, 2 validation failure (with a one-line error
//! JSON on standard error), 3 soundness violation (a certified bound
//! observed below a quantity it must dominate).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use clt_lab_core::bounds::{
    crude_bound_with_sigma, ks_upper_bound, ks_upper_bound_traced, rectangle_bound_with_sigma,
    BoundProbe,
};
use clt_lab_core::montecarlo::{mean, variance, variance_tolerance};
use clt_lab_core::summation::rho_window_bound;
use clt_lab_core::{
    dkw_margin, empirical_ks, epsilon_delta_certificate, exact_ks_iid_rademacher, fixtures,
    lp_norm, weights_fast, CoefficientArray, GroupedWeights, HClass, Histogram, InnovationModel,
    Region, SampleContext,
};

use crate::error::{LabError, Result};
use crate::instance::{instance_hash, InstanceFile};
use crate::parallel::sample_batch_parallel;
use crate::plot;
use crate::reports::{
    self, BoundsReportInputs, ManifestEntry, SimulationReportInputs, SweepRow, WindowRow,
};
use crate::selftest;

#[derive(Parser, Debug)]
#[command(
    name = "clt-lab",
    version,
    about = "Numerical lab for the normal approximation of 2-D linear-field sums"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// JSON reports only.
    Json,
    /// JSON reports plus the tabular artifact as CSV.
    Csv,
}

impl Format {
    fn label(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// a = delta at the origin, Gamma an n x n square: iid partial sums.
    Iid,
    /// Gamma a union of two disjoint congruent rectangles.
    TwoRect,
}

impl Family {
    fn label(self) -> &'static str {
        match self {
            Family::Iid => "iid",
            Family::TwoRect => "two-rect",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute the weight array and every bound for one instance.
    Analyze {
        /// Instance description (JSON with `a` and `gamma`).
        #[arg(long)]
        instance: PathBuf,
        /// Innovation law the smoothing-chain KS bound is evaluated for.
        #[arg(long, default_value = "normal")]
        dist: String,
        /// Directory for artifact files; without it the bound report
        /// prints to standard output and nothing is written.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Record every (T, eta, value) probe of the minimization grid.
        #[arg(long)]
        trace_bounds: bool,
    },
    /// Monte Carlo estimate of the Kolmogorov distance of S/sigma to the
    /// standard normal.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "normal")]
        dist: String,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// DKW confidence level for the reported margin.
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a histogram SVG (requires --out).
        #[arg(long)]
        emit_plots: bool,
    },
    /// Epsilon-delta certificate: the critical-ratio threshold under
    /// which every law in the class stays within epsilon of normal.
    Certify {
        #[arg(long)]
        epsilon: f64,
        /// Comma-separated class members, e.g. "rademacher" or
        /// "normal,uniform,exponential".
        #[arg(long, default_value = "normal")]
        class: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance estimates across a family with growing sigma / ||a||_2.
    Sweep {
        #[arg(long, value_enum, default_value_t = Family::Iid)]
        family: Family,
        /// Comma-separated square sides, e.g. "2,4,8,16,32".
        #[arg(long, default_value = "2,4,8,16,32")]
        sizes: String,
        #[arg(long, default_value = "rademacher")]
        dist: String,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Also write a log-log distance plot (requires --out).
        #[arg(long)]
        emit_plots: bool,
    },
    /// Re-run the oracle and inequality suites on random instances.
    Selftest {
        #[arg(long, default_value_t = 1000)]
        instances: u64,
    },
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", reports::error_json(e.kind(), &e.to_string()));
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Analyze {
            instance,
            dist,
            out,
            format,
            trace_bounds,
        } => cmd_analyze(&instance, &dist, out.as_deref(), format, trace_bounds),
        Command::Simulate {
            instance,
            dist,
            samples,
            seed,
            alpha,
            out,
            emit_plots,
        } => cmd_simulate(&instance, &dist, samples, seed, alpha, out.as_deref(), emit_plots),
        Command::Certify {
            epsilon,
            class,
            out,
        } => cmd_certify(epsilon, &class, out.as_deref()),
        Command::Sweep {
            family,
            sizes,
            dist,
            samples,
            seed,
            alpha,
            out,
            format,
            emit_plots,
        } => cmd_sweep(
            family,
            &sizes,
            &dist,
            samples,
            seed,
            alpha,
            out.as_deref(),
            format,
            emit_plots,
        ),
        Command::Selftest { instances } => selftest::run(instances),
    }
}

fn load_instance(path: &Path) -> Result<(CoefficientArray, Region, String)> {
    let text = fs::read_to_string(path).map_err(LabError::io(path))?;
    let file = InstanceFile::from_json(&text)?;
    let a = file.coefficients()?;
    let gamma = file.region()?;
    let hash = instance_hash(&a, &gamma);
    Ok((a, gamma, hash))
}

fn check_sampling_params(samples: u64, alpha: f64) -> Result<()> {
    if samples == 0 {
        return Err(LabError::Invalid("--samples must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LabError::Invalid(format!(
            "--alpha must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

fn check_plot_flag(emit_plots: bool, out: Option<&Path>) -> Result<()> {
    if emit_plots && out.is_none() {
        return Err(LabError::Invalid("--emit-plots needs --out".into()));
    }
    Ok(())
}

/// Prints `stdout_doc` when no output directory is given; otherwise
/// writes every artifact plus a manifest with their hashes.
fn deliver(
    out: Option<&Path>,
    stdout_doc: &str,
    command: &'static str,
    config: &[(&str, String)],
    inputs: &[(&str, String)],
    files: &[(&str, &str)],
) -> Result<()> {
    let Some(dir) = out else {
        print!("{stdout_doc}");
        return Ok(());
    };
    fs::create_dir_all(dir).map_err(LabError::io(dir))?;
    let mut entries = Vec::new();
    for (name, content) in files {
        let path = dir.join(name);
        fs::write(&path, content).map_err(LabError::io(path.clone()))?;
        entries.push(ManifestEntry {
            name: (*name).to_string(),
            sha256: reports::sha256_hex(content.as_bytes()),
            bytes: content.len() as u64,
        });
    }
    let manifest = reports::manifest(command, config, inputs, &entries);
    let path = dir.join("manifest.json");
    fs::write(&path, manifest).map_err(LabError::io(path))?;
    Ok(())
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Square-window sides the bound report tabulates.
const WINDOW_SIDES: [u64; 8] = [1, 2, 4, 8, 16, 32, 64, 128];

fn cmd_analyze(
    instance: &Path,
    dist: &str,
    out: Option<&Path>,
    format: Format,
    trace_bounds: bool,
) -> Result<()> {
    let (a, gamma, hash) = load_instance(instance)?;
    let law = InnovationModel::from_name(dist)?;
    let b = weights_fast(&a, &gamma)?;
    let rho = b.rho();

    let crude_p1 = crude_bound_with_sigma(&a, &gamma, 1.0, b.sigma())?;
    let crude_p2 = crude_bound_with_sigma(&a, &gamma, 2.0, b.sigma())?;
    let rectangle = if gamma.is_rect_union() {
        Some(rectangle_bound_with_sigma(&a, &gamma, b.sigma())?)
    } else {
        None
    };
    // These bounds are theorems; a violation means broken arithmetic and
    // must surface as the dedicated exit code, not as a quiet report row.
    for (name, value) in [("crude p=1", crude_p1), ("crude p=2", crude_p2)] {
        if value < rho - 1e-12 {
            return Err(LabError::Soundness(format!(
                "{name} bound {value} below rho {rho}"
            )));
        }
    }
    if let Some(rb) = &rectangle {
        if rb.value < rho - 1e-12 {
            return Err(LabError::Soundness(format!(
                "rectangle bound {} below rho {rho}",
                rb.value
            )));
        }
    }
    // The window table is audit data: rows may legitimately sit below
    // rho, so they are flagged rather than enforced.
    let window_grid: Vec<WindowRow> = WINDOW_SIDES
        .iter()
        .map(|&m| {
            let value = rho_window_bound(&b, m, m);
            WindowRow {
                m,
                n: m,
                value,
                below_rho: value < rho,
            }
        })
        .collect();

    let gw = GroupedWeights::from_weights(&b);
    let mut trace_rows: Vec<BoundProbe> = Vec::new();
    let ks_upper = if trace_bounds {
        ks_upper_bound_traced(&gw, &law, Some(&mut trace_rows))
    } else {
        ks_upper_bound(&gw, &law)
    };

    let weights_doc = reports::weights_report(&a, &gamma, &b, &hash);
    let bounds_doc = reports::bounds_report(&BoundsReportInputs {
        hash: &hash,
        b: &b,
        crude_p1,
        crude_p2,
        rectangle: rectangle.as_ref(),
        window_grid: &window_grid,
        law_name: law.name(),
        ks_upper: &ks_upper,
        trace: if trace_bounds {
            Some(trace_rows.as_slice())
        } else {
            None
        },
        generated_unix: unix_now(),
    });

    let csv;
    let mut files: Vec<(&str, &str)> =
        vec![("weights.json", &weights_doc), ("bounds.json", &bounds_doc)];
    if format == Format::Csv {
        csv = reports::weights_csv(&b);
        files.push(("weights.csv", &csv));
    }
    let config = [
        ("instance", instance.display().to_string()),
        ("dist", law.name().to_string()),
        ("format", format.label().to_string()),
        ("trace_bounds", trace_bounds.to_string()),
    ];
    let inputs = [("instance_sha256", hash.clone())];
    deliver(out, &bounds_doc, "analyze", &config, &inputs, &files)
}

fn cmd_simulate(
    instance: &Path,
    dist: &str,
    samples: u64,
    seed: u64,
    alpha: f64,
    out: Option<&Path>,
    emit_plots: bool,
) -> Result<()> {
    check_sampling_params(samples, alpha)?;
    check_plot_flag(emit_plots, out)?;
    let (a, gamma, hash) = load_instance(instance)?;
    let law = InnovationModel::from_name(dist)?;
    let b = weights_fast(&a, &gamma)?;
    let ctx = SampleContext::new(&b);
    let draws = sample_batch_parallel(&ctx, &law, seed, samples)?;
    let hist = Histogram::from_samples(&draws);
    let report = reports::simulation_report(&SimulationReportInputs {
        hash: &hash,
        law_name: law.name(),
        n_samples: samples,
        seed,
        alpha,
        ks_empirical: empirical_ks(&draws)?,
        dkw_margin: dkw_margin(samples, alpha),
        sample_mean: mean(&draws),
        sample_variance: variance(&draws),
        variance_tolerance: variance_tolerance(&b, &law, samples),
        histogram: &hist,
    });

    let svg;
    let mut files: Vec<(&str, &str)> = vec![("simulation.json", &report)];
    if emit_plots {
        svg = plot::histogram_svg(&hist, law.name());
        files.push(("histogram.svg", &svg));
    }
    let config = [
        ("instance", instance.display().to_string()),
        ("dist", law.name().to_string()),
        ("samples", samples.to_string()),
        ("seed", seed.to_string()),
        ("alpha", reports::fmt17(alpha)),
        ("emit_plots", emit_plots.to_string()),
    ];
    let inputs = [("instance_sha256", hash.clone())];
    deliver(out, &report, "simulate", &config, &inputs, &files)
}

fn cmd_certify(epsilon: f64, class: &str, out: Option<&Path>) -> Result<()> {
    let mut members = Vec::new();
    for name in class.split(',') {
        let name = name.trim();
        if name.is_empty() {
            continue;
        }
        members.push(InnovationModel::from_name(name)?);
    }
    let class_obj = HClass::new(members)?;
    let names: Vec<String> = class_obj
        .members()
        .iter()
        .map(|m| m.name().to_string())
        .collect();
    let cert = epsilon_delta_certificate(epsilon, &class_obj)?;
    let doc = reports::certificate_report(&cert, &names);
    let config = [
        ("epsilon", reports::fmt17(epsilon)),
        ("class", names.join(",")),
    ];
    deliver(
        out,
        &doc,
        "certify",
        &config,
        &[],
        &[("certificate.json", &doc)],
    )
}

fn parse_sizes(text: &str) -> Result<Vec<i64>> {
    let mut sizes = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let n: i64 = part
            .parse()
            .map_err(|_| LabError::Invalid(format!("bad size {part:?} in --sizes")))?;
        if n < 1 {
            return Err(LabError::Invalid(format!("size {n} must be at least 1")));
        }
        sizes.push(n);
    }
    if sizes.is_empty() {
        return Err(LabError::Invalid("--sizes lists no sizes".into()));
    }
    Ok(sizes)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    family: Family,
    sizes: &str,
    dist: &str,
    samples: u64,
    seed: u64,
    alpha: f64,
    out: Option<&Path>,
    format: Format,
    emit_plots: bool,
) -> Result<()> {
    check_sampling_params(samples, alpha)?;
    check_plot_flag(emit_plots, out)?;
    let law = InnovationModel::from_name(dist)?;
    let sizes = parse_sizes(sizes)?;

    let mut rows: Vec<SweepRow> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    for &n in &sizes {
        let (a, gamma) = match family {
            Family::Iid => fixtures::iid_delta(n),
            Family::TwoRect => fixtures::two_rect(n),
        };
        let b = match weights_fast(&a, &gamma) {
            Ok(b) => b,
            Err(clt_lab_core::Error::DegenerateVariance) => {
                warnings.push(format!("size {n}: degenerate variance, member skipped"));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let kappa = b.sigma() / lp_norm(&a, 2.0)?;
        let ell = gamma.rects().map(|r| r.len() as u64).unwrap_or(0);
        let ctx = SampleContext::new(&b);
        let draws = sample_batch_parallel(&ctx, &law, seed, samples)?;
        let ks_empirical = empirical_ks(&draws)?;
        let gw = GroupedWeights::from_weights(&b);
        let ks_upper = ks_upper_bound(&gw, &law).value;
        // Closed-form oracle exists only for iid squares with Rademacher
        // innovations (centered scaled binomial).
        let ks_exact = if family == Family::Iid && law == InnovationModel::Rademacher {
            exact_ks_iid_rademacher(n as u64).ok()
        } else {
            None
        };
        rows.push(SweepRow {
            kappa,
            rho: b.rho(),
            ks_empirical,
            ks_upper,
            n_samples: samples,
            seed,
            n,
            ell,
            ks_exact,
        });
    }
    // Writer contract: rows ascend in kappa.
    rows.sort_by(|p, q| p.kappa.total_cmp(&q.kappa));

    // When the certified bound is informative it must dominate the
    // empirical distance up to Monte Carlo noise.
    let margin = dkw_margin(samples, alpha);
    for r in &rows {
        if r.ks_upper < 1.0 && r.ks_empirical > r.ks_upper + margin {
            return Err(LabError::Soundness(format!(
                "empirical distance {} above certified bound {} + margin {} at kappa {}",
                r.ks_empirical, r.ks_upper, margin, r.kappa
            )));
        }
    }

    let json = reports::sweep_report(family.label(), law.name(), alpha, &rows, &warnings);
    let csv;
    let svg;
    let mut files: Vec<(&str, &str)> = vec![("sweep.json", &json)];
    if format == Format::Csv {
        csv = reports::sweep_csv(&rows);
        files.push(("sweep.csv", &csv));
    }
    if emit_plots {
        svg = plot::sweep_svg(&rows);
        files.push(("sweep.svg", &svg));
    }
    let sizes_text: Vec<String> = sizes.iter().map(|n| n.to_string()).collect();
    let config = [
        ("family", family.label().to_string()),
        ("sizes", sizes_text.join(",")),
        ("dist", law.name().to_string()),
        ("samples", samples.to_string()),
        ("seed", seed.to_string()),
        ("alpha", reports::fmt17(alpha)),
        ("format", format.label().to_string()),
        ("emit_plots", emit_plots.to_string()),
    ];
    deliver(out, &json, "sweep", &config, &[], &files)
}
