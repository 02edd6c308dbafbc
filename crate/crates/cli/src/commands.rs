use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use neurosim::dataio::{split_indices, synth_blobs, Dataset, DatasetManifest, PreprocessSpec, DEFAULT_TEST_FRACTION};
use neurosim::hw::{
    calibrate as fit, design_comparison, fixtures, perf_report, performance_table, utilization_table,
    CalibrationTargets, DesignPoint, PaperDesign, PlatformBudget, ResourceCostTable,
};
use neurosim::mixed_signal::{
    analog_loop, frames_to_bytes, frames_to_hex, spi_decode, AdcModel, DacModel,
};
use neurosim::snn::{network_forward, NetworkSpec};
use neurosim::training::{evaluate, history_csv, load_checkpoint, save_checkpoint, train as fit_network, TrainConfig};
use neurosim::Tensor;

use crate::config::{create_dir, require_input, resolve, seed_or_env, write_file, write_run_json};
use crate::exit::CliError;
use crate::{CalibrateArgs, CompareArgs, EvalArgs, Format, FrameFormat, MsrunArgs, ReportArgs, Split, SynthArgs, TrainArgs};

type Outcome = Result<(), CliError>;

fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::usage(format!("--{flag} is required (on the command line or in --config)")))
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializes");
    s.push('\n');
    s
}

/// A spec file, or one of the builtin names.
fn load_spec(name: &str) -> Result<NetworkSpec, CliError> {
    let path = Path::new(name);
    if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {name}: {e}")))?;
        return Ok(NetworkSpec::from_json(&text)?);
    }
    NetworkSpec::builtin(name).ok_or_else(|| {
        CliError::config(format!(
            "spec {name} is neither a file nor a builtin (bcu-mini, fcu-mini, bcu-ref, fcu-ref)"
        ))
    })
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, CliError> {
    require_input(path, what)?;
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{what} {}: {e}", path.display())))
}

/// Loads a dataset and preprocesses it to the spec's input geometry.
fn load_dataset(path: &Path, spec: &NetworkSpec) -> Result<Dataset, CliError> {
    require_input(path, "dataset")?;
    let manifest = DatasetManifest::read(path)?;
    let [c, h, w] = spec.input_shape;
    if manifest.channels != c {
        return Err(CliError::config(format!(
            "dataset has {} channels but spec {} expects {c}",
            manifest.channels, spec.name
        )));
    }
    let dataset = Dataset::load(&manifest)?;
    Ok(dataset.preprocessed(&PreprocessSpec::standard(c, h, w))?)
}

fn load_weights(path: &Path, spec: Option<&str>) -> Result<(neurosim::snn::WeightSet, NetworkSpec), CliError> {
    require_input(path, "checkpoint")?;
    let (weights, stored) = load_checkpoint(path)?;
    if let Some(name) = spec {
        let given = load_spec(name)?;
        if given != stored {
            return Err(CliError::config(format!(
                "checkpoint {} was trained for spec {}, which differs from --spec {name}",
                path.display(),
                stored.name
            )));
        }
    }
    Ok((weights, stored))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthRun {
    classes: Option<usize>,
    n: Option<usize>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    #[serde(default = "default_side")]
    height: usize,
    #[serde(default = "default_side")]
    width: usize,
    channels: Option<usize>,
}

fn default_side() -> usize {
    16
}

pub fn synth(args: &SynthArgs, config: Option<&Path>) -> Outcome {
    let mut run: SynthRun = resolve(args, config)?;
    let classes = required(run.classes, "classes")?;
    if classes != 2 && classes != 10 {
        return Err(CliError::usage(format!("{classes} is not a supported class count (2 or 10)")));
    }
    let n = required(run.n, "n")?;
    let out = required(run.out.clone(), "out")?;
    run.seed = Some(seed_or_env(run.seed)?);
    let channels = *run.channels.get_or_insert(if classes == 2 { 1 } else { 3 });
    if channels != 1 && channels != 3 {
        return Err(CliError::config(format!("images need 1 or 3 channels, not {channels}")));
    }
    let (_, dataset) = synth_blobs(n, classes, [channels, run.height, run.width], run.seed.unwrap())?;
    create_dir(&out)?;
    let manifest = dataset.save(&out)?;
    write_run_json(&out, "synth", &run)?;
    println!(
        "wrote {} images ({} classes) and {} to {}",
        manifest.entries.len(),
        classes,
        DatasetManifest::FILE_NAME,
        out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainRun {
    spec: Option<String>,
    data: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    lr: Option<f64>,
    eval_every: Option<usize>,
    test_fraction: Option<f64>,
}

pub const CHECKPOINT_FILE: &str = "model.nsnn";
pub const HISTORY_FILE: &str = "history.csv";

pub fn train(args: &TrainArgs, config: Option<&Path>) -> Outcome {
    let mut run: TrainRun = resolve(args, config)?;
    let spec_name = required(run.spec.clone(), "spec")?;
    let data = required(run.data.clone(), "data")?;
    let out = required(run.out.clone(), "out")?;
    let defaults = TrainConfig::default();
    let cfg = TrainConfig {
        epochs: *run.epochs.get_or_insert(defaults.epochs),
        batch_size: *run.batch_size.get_or_insert(defaults.batch_size),
        seed: *run.seed.insert(seed_or_env(run.seed)?),
        lr: *run.lr.get_or_insert(defaults.lr),
        eval_every: *run.eval_every.get_or_insert(defaults.eval_every),
        test_fraction: *run.test_fraction.get_or_insert(defaults.test_fraction),
        surrogate: defaults.surrogate,
    };
    if cfg.epochs == 0 {
        return Err(CliError::usage("--epochs must be at least 1"));
    }
    cfg.validate()?;

    let spec = load_spec(&spec_name)?;
    let dataset = load_dataset(&data, &spec)?;
    create_dir(&out)?;
    let outcome = fit_network(&spec, &dataset, &cfg)?;
    save_checkpoint(&outcome.weights, &spec, out.join(CHECKPOINT_FILE))?;
    write_file(&out.join(HISTORY_FILE), history_csv(&outcome.history))?;
    write_run_json(&out, "train", &run)?;

    let last = outcome.history.last().expect("at least one epoch");
    println!(
        "{}",
        serde_json::json!({
            "epochs": cfg.epochs,
            "train_loss": last.train_loss,
            "train_acc": last.train_acc,
            "test_acc": last.test_acc,
            "n_train": outcome.train_indices.len(),
            "n_test": outcome.test_indices.len(),
        })
    );
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalRun {
    spec: Option<String>,
    weights: Option<PathBuf>,
    data: Option<PathBuf>,
    split: Option<Split>,
    seed: Option<u64>,
    test_fraction: Option<f64>,
    out: Option<PathBuf>,
}

pub fn eval(args: &EvalArgs, config: Option<&Path>) -> Outcome {
    let mut run: EvalRun = resolve(args, config)?;
    let weights_path = required(run.weights.clone(), "weights")?;
    let data = required(run.data.clone(), "data")?;
    let split = *run.split.get_or_insert(Split::All);
    let (weights, spec) = load_weights(&weights_path, run.spec.as_deref())?;
    let dataset = load_dataset(&data, &spec)?;

    let indices = if split == Split::All {
        None
    } else {
        let seed = *run.seed.insert(seed_or_env(run.seed)?);
        let frac = *run.test_fraction.get_or_insert(DEFAULT_TEST_FRACTION);
        if !(0.0..1.0).contains(&frac) {
            return Err(CliError::config("test fraction must be in [0, 1)"));
        }
        let (tr, te) = split_indices(dataset.len(), frac, seed);
        Some(if split == Split::Train { tr } else { te })
    };
    if indices.as_ref().is_some_and(Vec::is_empty) {
        return Err(CliError::config("the selected split is empty"));
    }
    let ev = evaluate(&spec, &weights, &dataset, indices.as_deref())?;
    let text = json_line(&serde_json::json!({
        "accuracy": ev.accuracy,
        "n": ev.n,
        "correct": ev.correct,
        "split": split,
    }));
    print!("{text}");
    if let Some(out) = &run.out {
        create_dir(out)?;
        write_file(&out.join("eval.json"), &text)?;
        write_run_json(out, "eval", &run)?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MsrunRun {
    spec: Option<String>,
    weights: Option<PathBuf>,
    input: Option<PathBuf>,
    adc_bits: Option<u32>,
    dac_bits: Option<u32>,
    adc_vmin: Option<f64>,
    adc_vmax: Option<f64>,
    dac_vmin: Option<f64>,
    dac_vmax: Option<f64>,
    adc_noise: Option<f64>,
    seed: Option<u64>,
    frames_out: Option<PathBuf>,
    frames_format: Option<FrameFormat>,
    out: Option<PathBuf>,
}

/// PGM/PPM images are normalized to the spec geometry like training data;
/// `.json` files hold a tensor of input voltages used as-is.
fn load_input(path: &Path, spec: &NetworkSpec) -> Result<Tensor, CliError> {
    require_input(path, "input")?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let tensor = match ext.as_str() {
        "pgm" | "ppm" | "pnm" => {
            let [c, h, w] = spec.input_shape;
            let image = neurosim::dataio::read_pnm(path)?;
            PreprocessSpec::standard(c, h, w).apply(&image)?
        }
        "json" => load_json::<Tensor>(path, "input tensor")?,
        _ => {
            return Err(CliError::config(format!(
                "input {} must be .pgm, .ppm or .json",
                path.display()
            )))
        }
    };
    Ok(tensor)
}

pub fn msrun(args: &MsrunArgs, config: Option<&Path>) -> Outcome {
    let mut run: MsrunRun = resolve(args, config)?;
    let weights_path = required(run.weights.clone(), "weights")?;
    let input_path = required(run.input.clone(), "input")?;
    let adc_bits = *run.adc_bits.get_or_insert(12);
    let dac_bits = *run.dac_bits.get_or_insert(12);
    for (name, b) in [("adc-bits", adc_bits), ("dac-bits", dac_bits)] {
        if !(neurosim::mixed_signal::MIN_BITS..=neurosim::mixed_signal::MAX_BITS).contains(&b) {
            return Err(CliError::usage(format!("--{name} {b} is outside 4..=16")));
        }
    }
    let adc_range = (*run.adc_vmin.get_or_insert(-1.0), *run.adc_vmax.get_or_insert(1.0));
    let dac_range = (*run.dac_vmin.get_or_insert(-1.0), *run.dac_vmax.get_or_insert(1.0));
    let noise = *run.adc_noise.get_or_insert(0.0);
    let seed = *run.seed.insert(seed_or_env(run.seed)?);
    let format = *run.frames_format.get_or_insert(FrameFormat::Bin);

    let (weights, spec) = load_weights(&weights_path, run.spec.as_deref())?;
    let input = load_input(&input_path, &spec)?;
    let adc = AdcModel::new(adc_bits, adc_range.0, adc_range.1)?.with_noise(noise, seed)?;
    let dac = DacModel::new(dac_bits, dac_range.0, dac_range.1)?;
    let analog = analog_loop(&spec, &weights, &input, &adc, &dac)?;
    let digital = network_forward(&spec, &weights, &input)?;

    let words = analog.words();
    let crc_failures = words.iter().filter(|&&w| spi_decode(w).is_err()).count();
    let report = serde_json::json!({
        "design": spec.name,
        "adc_bits": adc_bits,
        "dac_bits": dac_bits,
        "logits": analog.logits.data(),
        "prediction": analog.logits.argmax(),
        "digital_logits": digital.logits.data(),
        "digital_prediction": digital.prediction(),
        "max_abs_dlogit": analog.logits.max_abs_diff(&digital.logits),
        "output_codes": analog.output_codes,
        "output_volts": analog.output_volts,
        "spike_counts": analog.spike_counts,
        "frames": words.len(),
        "crc_failures": crc_failures,
    });
    let text = json_line(&report);
    print!("{text}");

    let frame_bytes = match format {
        FrameFormat::Bin => frames_to_bytes(&words),
        FrameFormat::Hex => frames_to_hex(&words).into_bytes(),
    };
    let frames_path = run.frames_out.clone().or_else(|| {
        run.out.as_ref().map(|d| d.join(match format {
            FrameFormat::Bin => "frames.bin",
            FrameFormat::Hex => "frames.hex",
        }))
    });
    if let Some(out) = &run.out {
        create_dir(out)?;
        write_file(&out.join("msrun.json"), &text)?;
    }
    if let Some(path) = &frames_path {
        write_file(path, frame_bytes)?;
    }
    if let Some(out) = &run.out {
        write_run_json(out, "msrun", &run)?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportRun {
    spec: Option<String>,
    cost: Option<PathBuf>,
    budget: Option<PathBuf>,
    accuracy: Option<f64>,
    paper_fixtures: Option<String>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

fn paper_designs(which: &str) -> Result<Vec<PaperDesign>, CliError> {
    if which.eq_ignore_ascii_case("all") {
        return Ok(PaperDesign::ALL.to_vec());
    }
    PaperDesign::parse(which)
        .map(|d| vec![d])
        .ok_or_else(|| CliError::usage(format!("unknown reference design {which:?} (bcu, fcu or all)")))
}

pub fn report(args: &ReportArgs, config: Option<&Path>) -> Outcome {
    let mut run: ReportRun = resolve(args, config)?;
    let format = *run.format.get_or_insert(Format::Text);
    if format == Format::Csv {
        return Err(CliError::usage("report supports text or json output"));
    }
    let budget: PlatformBudget = match &run.budget {
        Some(p) => load_json(p, "budget")?,
        None => fixtures::budget(),
    };
    let (text, json) = if let Some(which) = &run.paper_fixtures {
        let designs = paper_designs(which)?;
        let reports = designs
            .iter()
            .map(|d| perf_report(&d.spec(), &d.cost(), &budget, d.targets().accuracy))
            .collect::<neurosim::Result<Vec<_>>>()?;
        let mut text = format!("Resource utilization\n{}\nPerformance\n{}", utilization_table(&reports), performance_table(&reports));
        let mut json = serde_json::json!({ "reports": reports });
        if designs.len() == PaperDesign::ALL.len() {
            let table = design_comparison(&fixtures::design_points())?;
            text.push_str(&format!("\nDesign comparison\n{}", table.to_text()));
            json["comparison"] = serde_json::to_value(&table).expect("serializes");
        }
        (text, json_line(&json))
    } else {
        let spec = load_spec(&required(run.spec.clone(), "spec")?)?;
        let cost_path = run
            .cost
            .clone()
            .ok_or_else(|| CliError::config("no cost table given (--cost FILE or --paper-fixtures)"))?;
        let cost: ResourceCostTable = load_json(&cost_path, "cost table")?;
        let report = perf_report(&spec, &cost, &budget, run.accuracy)?;
        (report.to_text(), json_line(&report))
    };
    let (body, file) = match format {
        Format::Json => (json, "report.json"),
        _ => (text, "report.txt"),
    };
    print!("{body}");
    if let Some(out) = &run.out {
        create_dir(out)?;
        write_file(&out.join(file), &body)?;
        write_run_json(out, "report", &run)?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareRun {
    #[serde(default)]
    designs: Vec<PathBuf>,
    #[serde(default)]
    paper_fixtures: bool,
    format: Option<Format>,
    out: Option<PathBuf>,
}

pub fn compare(args: &CompareArgs, config: Option<&Path>) -> Outcome {
    let mut run: CompareRun = resolve(args, config)?;
    let format = *run.format.get_or_insert(Format::Text);
    let mut designs: Vec<DesignPoint> = if run.paper_fixtures {
        fixtures::design_points()
    } else {
        Vec::new()
    };
    for p in &run.designs {
        designs.push(load_json(p, "design")?);
    }
    if designs.len() < 2 {
        return Err(CliError::usage(format!(
            "compare needs at least 2 designs, got {} (use --designs A B ... or --paper-fixtures)",
            designs.len()
        )));
    }
    let table = design_comparison(&designs)?;
    let (body, file) = match format {
        Format::Text => (table.to_text(), "comparison.txt"),
        Format::Json => (json_line(&table), "comparison.json"),
        Format::Csv => (table.to_csv(), "comparison.csv"),
    };
    print!("{body}");
    if let Some(out) = &run.out {
        create_dir(out)?;
        write_file(&out.join(file), &body)?;
        write_run_json(out, "compare", &run)?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrateRun {
    #[serde(default)]
    spec: Vec<String>,
    #[serde(default)]
    targets: Vec<PathBuf>,
    base: Option<PathBuf>,
    paper_fixtures: Option<String>,
    out: Option<PathBuf>,
}

pub fn calibrate(args: &CalibrateArgs, config: Option<&Path>) -> Outcome {
    let run: CalibrateRun = resolve(args, config)?;
    let mut observations: Vec<(NetworkSpec, CalibrationTargets)> = Vec::new();
    let mut base: Option<ResourceCostTable> = None;
    if let Some(which) = &run.paper_fixtures {
        let design = PaperDesign::parse(which)
            .ok_or_else(|| CliError::usage(format!("unknown reference design {which:?} (bcu or fcu)")))?;
        observations.push((design.spec(), design.targets()));
        base = Some(design.base_cost());
    }
    if run.spec.len() != run.targets.len() {
        return Err(CliError::usage(format!(
            "{} --spec values but {} --targets values; give one targets file per spec",
            run.spec.len(),
            run.targets.len()
        )));
    }
    for (s, t) in run.spec.iter().zip(&run.targets) {
        observations.push((load_spec(s)?, load_json(t, "targets")?));
    }
    if observations.is_empty() {
        return Err(CliError::usage("give --spec and --targets, or --paper-fixtures"));
    }
    if let Some(p) = &run.base {
        base = Some(load_json(p, "base cost table")?);
    }
    let cal = fit(&observations, &base.unwrap_or_default())?;
    let worst = cal.max_abs_rel_error();
    for r in &cal.residuals {
        eprintln!(
            "{:<12}{:<22} target {:>14.6} estimate {:>14.6} rel {:+.3e}",
            r.design, r.quantity, r.target, r.estimate, r.rel_error
        );
    }
    if worst > 1e-3 {
        eprintln!("warning: largest residual {:.3}% exceeds 0.1%", worst * 100.0);
    }
    let body = json_line(&cal);
    print!("{body}");
    if let Some(out) = &run.out {
        create_dir(out)?;
        write_file(&out.join("cost.json"), json_line(&cal.table))?;
        write_file(&out.join("calibration.json"), &body)?;
        write_run_json(out, "calibrate", &run)?;
    }
    Ok(())
}
