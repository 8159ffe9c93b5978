use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use csf::error::{Error, Result};
use csf::formats::{
    read_json, read_signal_csv, sidecar_path, write_csv, write_json, write_matrix_csv, write_signal_csv,
    AssessOutput, ClassifyOutput, DataSource, FeatureRecord, FeaturesReport, FilterMethod, FilterReport, Scenario,
    SimulationSidecar,
};
use csf::gradcheck::{run_gradcheck, GradcheckConfig};
use csf::ingest::{iterate_run_to_failure, IMS_SAMPLE_RATE_HZ};
use csf::pipeline::{
    assess, classify, csf_filtered, extract_branches, AssessConfig, ClassifyConfig, FeatureConfig,
};
use csf_core::features::{fault_frequencies, BearingGeometry, BlehnrMode, FaultFrequencies, FeatureVector};
use csf_core::health::SomConfig;
use csf_core::simulate::{
    gaussian_with_outlier, make_degradation_sequence, make_fault_taxonomy_dataset, simulate_parts, FaultMode,
    FaultSet, FaultSimConfig,
};
use csf_core::{fit_med, fit_simplified_csf, CsfConfig, InitScheme, Signal};

const DEFAULT_SAMPLE_RATE_HZ: f64 = 20_000.0;

#[derive(Parser)]
#[command(name = "csf", version, about = "Sparse-filter impulsive signature enhancement for vibration data")]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, env = "CSF_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a simulated bearing signal (CSV + JSON sidecar).
    Simulate(SimulateArgs),
    /// Learn a sparse (or MED) filter for a signal and write the output.
    Filter(FilterArgs),
    /// Extract the five health features from signal files.
    Features(FeaturesArgs),
    /// SOM-MQE health assessment of a run-to-failure sequence.
    Assess(AssessArgs),
    /// PCA, k-means and VAT on a labeled fault dataset.
    Classify(ClassifyArgs),
    /// Check the analytic gradient against finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Args, Clone)]
struct SimArgs {
    /// Comma-separated fault components (outer, inner, roller) or `normal`.
    #[arg(long, default_value = "outer")]
    fault: String,
    #[arg(long, default_value_t = -8.0, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 20480)]
    n_samples: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE_HZ)]
    sample_rate: f64,
    #[arg(long, default_value_t = 100.0)]
    outer_hz: f64,
    #[arg(long, default_value_t = 160.0)]
    inner_hz: f64,
    #[arg(long, default_value_t = 70.0)]
    roller_hz: f64,
    #[arg(long, default_value_t = 3000.0)]
    resonance_hz: f64,
    #[arg(long, default_value_t = 800.0)]
    damping_rate: f64,
    #[arg(long, default_value_t = 33.3)]
    shaft_hz: f64,
    #[arg(long, default_value_t = 0.01)]
    jitter: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SimArgs {
    fn config(&self) -> Result<FaultSimConfig> {
        Ok(FaultSimConfig {
            faults: parse_fault_set(&self.fault)?,
            outer_hz: self.outer_hz,
            inner_hz: self.inner_hz,
            roller_hz: self.roller_hz,
            resonance_hz: self.resonance_hz,
            damping_rate: self.damping_rate,
            shaft_hz: self.shaft_hz,
            snr_db: self.snr_db,
            n_samples: self.n_samples,
            sample_rate_hz: self.sample_rate,
            period_jitter_fraction: self.jitter,
            seed: self.seed,
        })
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Gaussian noise with one outlier of this many standard deviations
    /// instead of a bearing signal.
    #[arg(long)]
    outlier_sigma: Option<f64>,
    /// Output CSV path; defaults to `<out-dir>/simulated.csv`.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Center,
    Random,
}

#[derive(Args, Clone)]
struct CsfArgs {
    #[arg(long, default_value_t = 100)]
    filter_length: usize,
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-6)]
    gradient_tolerance: f64,
    #[arg(long, default_value_t = csf_core::sparse_filter::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "center")]
    init: InitArg,
    #[arg(long, default_value_t = 0)]
    init_seed: u64,
}

impl CsfArgs {
    fn config(&self) -> CsfConfig {
        CsfConfig {
            filter_length: self.filter_length,
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            init_scheme: match self.init {
                InitArg::Center => InitScheme::CenterSpike,
                InitArg::Random => InitScheme::SeededRandom,
            },
            seed: self.init_seed,
            ..CsfConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Csf,
    Med,
}

#[derive(Args)]
struct FilterArgs {
    /// Signal CSV (column `sample`).
    input: PathBuf,
    #[arg(long, value_enum, default_value = "csf")]
    method: MethodArg,
    /// Sample rate; read from the input's sidecar when omitted.
    #[arg(long)]
    sample_rate: Option<f64>,
    #[command(flatten)]
    csf: CsfArgs,
    /// Output CSV path; defaults to `<out-dir>/<input stem>_<method>.csv`.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
#[group(id = "explicit", multiple = true, conflicts_with = "geometry")]
struct ExplicitFaults {
    #[arg(long)]
    bpfo: Option<f64>,
    #[arg(long)]
    bpfi: Option<f64>,
    #[arg(long)]
    bsf: Option<f64>,
}

#[derive(Args, Clone)]
#[group(id = "geometry", multiple = true)]
struct GeometryFaults {
    #[arg(long)]
    rolling_elements: Option<u32>,
    #[arg(long)]
    roller_diameter: Option<f64>,
    #[arg(long)]
    pitch_diameter: Option<f64>,
    #[arg(long)]
    contact_angle_deg: Option<f64>,
    #[arg(long)]
    shaft_hz: Option<f64>,
}

#[derive(Args, Clone)]
struct FaultArgs {
    #[command(flatten)]
    explicit: ExplicitFaults,
    #[command(flatten)]
    geometry: GeometryFaults,
    /// Half-width of the BLEHNR lag band as a fraction of the fault period.
    #[arg(long, default_value_t = csf_core::features::DEFAULT_BAND_FRACTION)]
    band_fraction: f64,
    /// BLEHNR as the raw envelope-ACF peak r, or as the ratio r / (1 - r).
    #[arg(long, value_enum, default_value = "acf-peak")]
    blehnr_mode: BlehnrArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum BlehnrArg {
    AcfPeak,
    HarmonicToNoise,
}

impl FaultArgs {
    fn frequencies(&self) -> Result<FaultFrequencies> {
        let g = &self.geometry;
        if g.rolling_elements.is_some() || g.roller_diameter.is_some() || g.pitch_diameter.is_some() {
            let missing = || Error::Invalid("bearing geometry needs --rolling-elements, --roller-diameter, --pitch-diameter and --shaft-hz".into());
            let geometry = BearingGeometry {
                n_rolling_elements: g.rolling_elements.ok_or_else(missing)?,
                roller_diameter: g.roller_diameter.ok_or_else(missing)?,
                pitch_diameter: g.pitch_diameter.ok_or_else(missing)?,
                contact_angle_rad: g.contact_angle_deg.unwrap_or(0.0).to_radians(),
            };
            return Ok(fault_frequencies(&geometry, g.shaft_hz.ok_or_else(missing)?)?);
        }
        let d = FaultSimConfig::default();
        let e = &self.explicit;
        Ok(FaultFrequencies::new(
            e.bpfo.unwrap_or(d.outer_hz),
            e.bpfi.unwrap_or(d.inner_hz),
            e.bsf.unwrap_or(d.roller_hz),
        )?)
    }

    fn feature_config(&self) -> Result<FeatureConfig> {
        let blehnr_mode = match self.blehnr_mode {
            BlehnrArg::AcfPeak => BlehnrMode::AcfPeak,
            BlehnrArg::HarmonicToNoise => BlehnrMode::HarmonicToNoise,
        };
        Ok(FeatureConfig { band_fraction: self.band_fraction, blehnr_mode, ..FeatureConfig::new(self.frequencies()?) })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct FeaturesArgs {
    /// Signal CSV files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE_HZ)]
    sample_rate: f64,
    #[command(flatten)]
    faults: FaultArgs,
    /// Filter each signal with the sparse filter before extraction.
    #[arg(long)]
    filtered: bool,
    #[command(flatten)]
    csf: CsfArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output path; defaults to `<out-dir>/features.<format>`.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AssessArgs {
    /// Directory of IMS snapshot files.
    #[arg(long, conflicts_with = "simulate", required_unless_present = "simulate", requires = "channel")]
    dir: Option<PathBuf>,
    /// Zero-based channel (column) of the IMS files.
    #[arg(long)]
    channel: Option<usize>,
    #[arg(long, default_value_t = IMS_SAMPLE_RATE_HZ)]
    sample_rate: f64,
    /// Assess a simulated outer-race degradation run instead of files.
    #[arg(long)]
    simulate: bool,
    #[arg(long, default_value_t = 100)]
    n_files: usize,
    /// First faulty file (zero-based) of the simulated run.
    #[arg(long, default_value_t = 40)]
    onset: usize,
    /// SNR of the final simulated file.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 8192)]
    n_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    n_train: usize,
    #[arg(long, default_value_t = 6.0)]
    k_sigma: f64,
    #[command(flatten)]
    faults: FaultArgs,
    #[command(flatten)]
    csf: CsfArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Directory of signal CSVs; the label is the file-name prefix before
    /// the first `_`.
    #[arg(long, conflicts_with = "simulate", required_unless_present = "simulate")]
    dir: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE_HZ)]
    sample_rate: f64,
    /// Classify a simulated F1..F8 taxonomy dataset.
    #[arg(long)]
    simulate: bool,
    #[arg(long, default_value_t = 10)]
    per_class: usize,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 8192)]
    n_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    n_components: usize,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[command(flatten)]
    faults: FaultArgs,
    #[command(flatten)]
    csf: CsfArgs,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 32)]
    filter_length: usize,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    tolerance: f64,
    #[arg(long, default_value_t = 1e-6)]
    step: f64,
}

fn parse_fault_set(text: &str) -> Result<FaultSet> {
    let mut set = FaultSet::NORMAL;
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "outer" => set.outer = true,
            "inner" => set.inner = true,
            "roller" => set.roller = true,
            "normal" | "none" => {}
            other => return Err(Error::Invalid(format!("unknown fault component '{other}'"))),
        }
    }
    Ok(set)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_owned(), source: e })
}

fn output_path(explicit: &Option<PathBuf>, out_dir: &Path, default_name: &str) -> Result<PathBuf> {
    let path = explicit.clone().unwrap_or_else(|| out_dir.join(default_name));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    Ok(path)
}

fn cmd_simulate(args: &SimulateArgs, out_dir: &Path) -> Result<()> {
    let out = output_path(&args.output, out_dir, "simulated.csv")?;
    let config = args.sim.config()?;
    let (samples, sidecar) = match args.outlier_sigma {
        Some(sigma) => {
            let signal = gaussian_with_outlier(config.n_samples, sigma, config.seed)?;
            let sidecar = SimulationSidecar {
                generator: "csf simulate".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                scenario: Scenario::Outlier,
                seed: config.seed,
                sample_rate_hz: signal.sample_rate_hz(),
                n_samples: signal.len(),
                fault_config: None,
                outlier_sigma: Some(sigma),
                measured_snr_db: None,
            };
            (signal.into_samples(), sidecar)
        }
        None => {
            let parts = simulate_parts(&config)?;
            let snr = parts.measured_snr_db();
            let signal = parts.into_signal()?;
            let sidecar = SimulationSidecar {
                generator: "csf simulate".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                scenario: Scenario::Fault,
                seed: config.seed,
                sample_rate_hz: config.sample_rate_hz,
                n_samples: signal.len(),
                measured_snr_db: snr.is_finite().then_some(snr),
                fault_config: Some(config),
                outlier_sigma: None,
            };
            (signal.into_samples(), sidecar)
        }
    };
    write_signal_csv(&out, &samples)?;
    write_json(&sidecar_path(&out), &sidecar)?;
    println!("wrote {} ({} samples)", out.display(), samples.len());
    Ok(())
}

fn resolve_sample_rate(input: &Path, flag: Option<f64>) -> f64 {
    flag.or_else(|| {
        let sidecar = sidecar_path(input);
        sidecar.exists().then(|| read_json::<SimulationSidecar>(&sidecar).ok()).flatten().map(|s| s.sample_rate_hz)
    })
    .unwrap_or(DEFAULT_SAMPLE_RATE_HZ)
}

fn load_signal(input: &Path, sample_rate_hz: f64) -> Result<Signal> {
    Ok(Signal::new(read_signal_csv(input)?, sample_rate_hz)?)
}

fn file_stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("signal").to_owned()
}

fn cmd_filter(args: &FilterArgs, out_dir: &Path) -> Result<()> {
    let fs = resolve_sample_rate(&args.input, args.sample_rate);
    let signal = load_signal(&args.input, fs)?;
    let config = args.csf.config();
    let (method, name) = match args.method {
        MethodArg::Csf => (FilterMethod::Csf, "csf"),
        MethodArg::Med => (FilterMethod::Med, "med"),
    };
    let out = output_path(&args.output, out_dir, &format!("{}_{name}.csv", file_stem(&args.input)))?;

    let start = Instant::now();
    let result = match method {
        FilterMethod::Csf => fit_simplified_csf(&signal, &config)?,
        FilterMethod::Med => fit_med(&signal, &config)?,
    };
    let wall_time_s = start.elapsed().as_secs_f64();

    write_signal_csv(&out, &result.filtered)?;
    let report = FilterReport {
        method,
        input: args.input.display().to_string(),
        output: out.display().to_string(),
        sample_rate_hz: fs,
        initial_cost: result.initial_cost(),
        final_cost: result.final_cost(),
        converged: result.converged,
        iterations: result.iterations,
        wall_time_s,
        config,
        w: result.w,
        cost_history: result.cost_history,
    };
    write_json(&sidecar_path(&out), &report)?;
    println!(
        "{name}: cost {:.6} -> {:.6} in {} iterations ({:.3} s), wrote {}",
        report.initial_cost,
        report.final_cost,
        report.iterations,
        wall_time_s,
        out.display()
    );
    Ok(())
}

fn feature_row(name: &str, f: &FeatureVector) -> Vec<String> {
    let mut row = vec![name.to_owned()];
    row.extend(f.to_array().iter().map(f64::to_string));
    row
}

fn feature_header(first: &'static str) -> Vec<&'static str> {
    let mut header = vec![first];
    header.extend(FeatureVector::NAMES);
    header
}

fn cmd_features(args: &FeaturesArgs, out_dir: &Path) -> Result<()> {
    let features = args.faults.feature_config()?;
    let csf = args.csf.config();
    let mut records = Vec::with_capacity(args.inputs.len());
    for input in &args.inputs {
        let mut signal = load_signal(input, args.sample_rate)?;
        if args.filtered {
            signal = csf_filtered(&signal, &csf)?;
        }
        records.push(FeatureRecord { input: input.display().to_string(), features: features.extract(&signal)? });
    }
    let default_name = match args.format {
        FormatArg::Csv => "features.csv",
        FormatArg::Json => "features.json",
    };
    let out = output_path(&args.output, out_dir, default_name)?;
    let report = FeaturesReport {
        features,
        sample_rate_hz: args.sample_rate,
        filter: args.filtered.then_some(csf),
        records,
    };
    if let FormatArg::Csv = args.format {
        let rows = report.records.iter().map(|r| feature_row(&r.input, &r.features));
        write_csv(&out, &feature_header("input"), rows)?;
        write_json(&sidecar_path(&out), &report)?;
    } else {
        write_json(&out, &report)?;
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_assess(args: &AssessArgs, out_dir: &Path) -> Result<()> {
    let (source, names, signals): (DataSource, Vec<String>, Vec<Signal>) = if args.simulate {
        let base = FaultSimConfig { snr_db: args.snr_db, n_samples: args.n_samples, seed: args.seed, ..Default::default() };
        let signals = make_degradation_sequence(args.n_files, args.onset, &base)?;
        let names = (0..signals.len()).map(|i| format!("sim_{i:04}")).collect();
        (DataSource::Degradation { n_files: args.n_files, onset: args.onset, base }, names, signals)
    } else {
        let dir = args.dir.as_ref().expect("clap requires --dir without --simulate");
        let channel = args.channel.expect("clap requires --channel with --dir");
        let run = iterate_run_to_failure(dir, channel, args.sample_rate)?;
        for w in &run.warnings {
            eprintln!("warning: {w}");
        }
        for e in &run.errors {
            eprintln!("skipped {}: {}", e.path.display(), e.message);
        }
        let (names, signals) = run.snapshots.into_iter().map(|s| (file_stem(&s.path), s.signal)).unzip();
        let source =
            DataSource::ImsDirectory { path: dir.display().to_string(), channel, sample_rate_hz: args.sample_rate };
        (source, names, signals)
    };
    let config = AssessConfig {
        som: SomConfig { seed: args.seed, ..SomConfig::default() },
        n_train: args.n_train,
        k_sigma: args.k_sigma,
    };
    if signals.len() <= config.n_train {
        return Err(Error::Invalid(format!("assessment needs at least {} snapshots, got {}", config.n_train + 1, signals.len())));
    }
    let feature_config = args.faults.feature_config()?;
    let csf = args.csf.config();
    let features = extract_branches(&signals, &feature_config, &csf)?;
    let report = assess(&features, &config)?;
    for w in report.raw.warnings.iter().chain(&report.filtered.warnings) {
        eprintln!("warning: {w}");
    }

    create_dir(out_dir)?;
    let csv_path = out_dir.join("assess_mqe.csv");
    let rows = names.iter().enumerate().map(|(i, name)| {
        vec![i.to_string(), name.clone(), report.raw.mqe[i].to_string(), report.filtered.mqe[i].to_string()]
    });
    write_csv(&csv_path, &["index", "name", "raw_mqe", "filtered_mqe"], rows)?;
    let show = |a: Option<usize>| a.map_or("none".to_owned(), |i| i.to_string());
    println!(
        "alarm index: raw {}, filtered {}; wrote {}",
        show(report.raw.alarm_index),
        show(report.filtered.alarm_index),
        csv_path.display()
    );
    let output = AssessOutput { source, features: feature_config, filter: csf, names, report };
    write_json(&out_dir.join("assess.json"), &output)?;
    Ok(())
}

fn labeled_directory(dir: &Path, sample_rate: f64) -> Result<(Vec<String>, Vec<usize>, Vec<Signal>)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Io { path: dir.to_owned(), source: e })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Input(format!("{}: no .csv files", dir.display())));
    }
    let mut class_names: Vec<String> = Vec::new();
    let mut truth = Vec::new();
    let mut signals = Vec::new();
    for p in &paths {
        let stem = file_stem(p);
        let label = stem.split('_').next().unwrap_or(&stem).to_owned();
        let idx = class_names.iter().position(|c| *c == label).unwrap_or_else(|| {
            class_names.push(label);
            class_names.len() - 1
        });
        truth.push(idx);
        signals.push(load_signal(p, sample_rate)?);
    }
    Ok((class_names, truth, signals))
}

fn cmd_classify(args: &ClassifyArgs, out_dir: &Path) -> Result<()> {
    let (source, class_names, truth, signals) = if args.simulate {
        let base = FaultSimConfig { snr_db: args.snr_db, n_samples: args.n_samples, ..Default::default() };
        let data = make_fault_taxonomy_dataset(args.per_class, &base, args.seed)?;
        let names = FaultMode::ALL.iter().map(|m| m.label().to_owned()).collect();
        let truth = data.iter().map(|r| r.mode.index()).collect();
        let source = DataSource::Taxonomy { per_class: args.per_class, seed: args.seed, base };
        (source, names, truth, data.into_iter().map(|r| r.signal).collect::<Vec<_>>())
    } else {
        let dir = args.dir.as_ref().expect("clap requires --dir without --simulate");
        let (names, truth, signals) = labeled_directory(dir, args.sample_rate)?;
        let source = DataSource::LabeledDirectory { path: dir.display().to_string(), sample_rate_hz: args.sample_rate };
        (source, names, truth, signals)
    };
    let config = ClassifyConfig {
        n_components: args.n_components,
        n_clusters: None,
        n_restarts: args.restarts,
        seed: args.seed,
    };
    let feature_config = args.faults.feature_config()?;
    let csf = args.csf.config();
    let features = extract_branches(&signals, &feature_config, &csf)?;
    let report = classify(&features, &truth, &config)?;

    create_dir(out_dir)?;
    let mut header = vec!["branch".to_owned(), "index".into(), "class".into(), "cluster".into()];
    header.extend((1..=config.n_components).map(|k| format!("pc{k}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::new();
    for (branch, res) in [("raw", &report.raw), ("filtered", &report.filtered)] {
        for (i, score) in res.scores.iter().enumerate() {
            let mut row = vec![branch.to_owned(), i.to_string(), class_names[truth[i]].clone(), res.labels[i].to_string()];
            row.extend(score.iter().map(f64::to_string));
            rows.push(row);
        }
        write_matrix_csv(&out_dir.join(format!("classify_vat_{branch}.csv")), &res.vat_matrix)?;
    }
    write_csv(&out_dir.join("classify_scores.csv"), &header_refs, rows)?;
    println!("purity: raw {:.4}, filtered {:.4}", report.raw.purity, report.filtered.purity);
    let output = ClassifyOutput { source, features: feature_config, filter: csf, classes: class_names, report };
    write_json(&out_dir.join("classify.json"), &output)?;
    Ok(())
}

fn cmd_gradcheck(args: &GradcheckArgs, out_dir: &Path) -> Result<bool> {
    let config = GradcheckConfig {
        n: args.n,
        filter_length: args.filter_length,
        trials: args.trials,
        seed: args.seed,
        step: args.step,
        tolerance: args.tolerance,
        ..GradcheckConfig::default()
    };
    let report = run_gradcheck(&config)?;
    create_dir(out_dir)?;
    write_json(&out_dir.join("gradcheck.json"), &report)?;
    println!(
        "{} trials, max relative error {:.3e} (tolerance {:.1e}): {}",
        report.trials.len(),
        report.max_relative_error,
        config.tolerance,
        if report.passed { "ok" } else { "FAILED" }
    );
    Ok(report.passed)
}

fn run(cli: &Cli) -> Result<bool> {
    let out = &cli.out_dir;
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, out).map(|_| true),
        Command::Filter(a) => cmd_filter(a, out).map(|_| true),
        Command::Features(a) => cmd_features(a, out).map(|_| true),
        Command::Assess(a) => cmd_assess(a, out).map(|_| true),
        Command::Classify(a) => cmd_classify(a, out).map(|_| true),
        Command::Gradcheck(a) => cmd_gradcheck(a, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
