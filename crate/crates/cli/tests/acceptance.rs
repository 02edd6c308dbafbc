//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails or exceeds its time budget.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use serde_json::Value;

use common::{
    fd_gradient_check, instrumented_macs, naive_conv, naive_linear, random_spec, random_tensor, random_weights, rel_err,
    TwoNeuron,
};
use neurosim::hw::count_macs;
use neurosim::mixed_signal::{adc_quantize, crc8_payload, dac_reconstruct, spi_decode, spi_encode, AdcModel, DacModel, SpiFrame};
use neurosim::rng::SplitMix64;
use neurosim::snn::{conv2d_forward, lif_step, linear_forward, LayerSpec, LifParams, LifState};
use neurosim::training::{backward, SurrogateParams};
use neurosim::Tensor;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lif_closed_form(_: &Workdirs) -> Check {
    let p = LifParams::default();
    let input = Tensor::full(&[1], 0.2);
    let mut state = LifState::zeros(&[1]);
    let mut worst: f64 = 0.0;
    for t in 1..=50 {
        let (next, s) = lif_step(&state, &input, &p).map_err(|e| e.to_string())?;
        if s.data()[0] == 1.0 {
            ensure(t == 7, || format!("first spike at step {t}, expected 7"))?;
            return Ok(format!("first spike at step 7, max trace error {worst:.1e}"));
        }
        let closed = 0.2 * (1.0 - 0.9f64.powi(t)) / 0.1;
        worst = worst.max((next.v().data()[0] - closed).abs());
        ensure(worst <= 1e-12, || format!("step {t}: trace error {worst:e}"))?;
        state = next;
    }
    Err("no spike within 50 steps".into())
}

fn layer_oracles(_: &Workdirs) -> Check {
    let mut rng = SplitMix64::new(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c = 1 + rng.below(3) as usize;
        let h = 3 + rng.below(7) as usize;
        let w = 3 + rng.below(7) as usize;
        let o = 1 + rng.below(4) as usize;
        let k = 1 + rng.below(3) as usize;
        let stride = 1 + rng.below(3) as usize;
        let pad = rng.below(2) as usize;
        let x = random_tensor(&mut rng, &[c, h, w], -1.0, 1.0);
        let wt = random_tensor(&mut rng, &[o, c, k, k], -1.0, 1.0);
        let b = random_tensor(&mut rng, &[o], -1.0, 1.0);
        let got = conv2d_forward(&x, &wt, &b, &LayerSpec::conv2d(c, o, k, stride, pad)).map_err(|e| e.to_string())?;
        let (want, _, _) = naive_conv(x.data(), (c, h, w), wt.data(), b.data(), (o, k, stride, pad), &mut 0);
        ensure(got.len() == want.len(), || "conv output size differs".into())?;
        worst = got.data().iter().zip(&want).fold(worst, |m, (a, b)| m.max(rel_err(*a, *b)));

        let n = 1 + rng.below(32) as usize;
        let m = 1 + rng.below(10) as usize;
        let x = random_tensor(&mut rng, &[n], -1.0, 1.0);
        let wt = random_tensor(&mut rng, &[m, n], -1.0, 1.0);
        let b = random_tensor(&mut rng, &[m], -1.0, 1.0);
        let got = linear_forward(&x, &wt, &b).map_err(|e| e.to_string())?;
        let want = naive_linear(x.data(), wt.data(), b.data(), m, &mut 0);
        worst = got.data().iter().zip(&want).fold(worst, |m, (a, b)| m.max(rel_err(*a, *b)));
    }
    ensure(worst <= 1e-12, || format!("worst relative error {worst:e}"))?;
    Ok(format!("100 conv + 100 linear layers, worst rel err {worst:.1e}"))
}

fn gradient_checks(_: &Workdirs) -> Check {
    let mut rng = SplitMix64::new(31);
    let mut fd_worst: f64 = 0.0;
    for _ in 0..25 {
        let spec = random_spec(&mut rng, false);
        let w = random_weights(&spec, &mut rng, 0.5);
        let x = random_tensor(&mut rng, &spec.input_shape, -1.0, 1.0);
        let label = rng.below(spec.num_classes as u64) as usize;
        fd_worst = fd_worst.max(fd_gradient_check(&spec, &w, &x, label, 1e-5));
    }
    ensure(fd_worst <= 1e-5, || format!("finite differences: worst rel err {fd_worst:e}"))?;

    let case = TwoNeuron {
        x: 1.0,
        w1: 0.5,
        b1: 0.1,
        w2: [0.7, -0.4],
        b2: [0.05, -0.02],
        beta: 0.9,
        theta: 1.0,
    };
    let mut hand_worst: f64 = 0.0;
    for label in 0..2 {
        let (_, grads) = backward(&case.spec(), &case.weights(), &Tensor::full(&[1, 1, 1], case.x), label, &SurrogateParams::default())
            .map_err(|e| e.to_string())?;
        let (_, want) = case.oracle(label, 0.5);
        let got: Vec<f64> = grads.tensors().flat_map(|t| t.data().to_vec()).collect();
        hand_worst = got.iter().zip(want).fold(hand_worst, |m, (g, w)| m.max((g - w).abs()));
    }
    ensure(hand_worst <= 1e-10, || format!("2-neuron oracle: worst abs err {hand_worst:e}"))?;
    Ok(format!("fd worst {fd_worst:.1e}, 2-neuron worst {hand_worst:.1e}"))
}

/// Working directories of two independent runs of the CLI pipeline.
struct Workdirs {
    first: PathBuf,
    second: PathBuf,
    _tmp: tempfile::TempDir,
}

const TRAINING: &[&[&str]] = &[
    &["synth", "--classes", "2", "--n", "200", "--seed", "7", "--out", "bcu-data"],
    &["train", "--spec", "bcu-mini", "--data", "bcu-data", "--epochs", "20", "--seed", "7", "--out", "bcu-model"],
    &["synth", "--classes", "10", "--n", "100", "--seed", "7", "--out", "fcu-data"],
    &["train", "--spec", "fcu-mini", "--data", "fcu-data", "--epochs", "30", "--seed", "7", "--out", "fcu-model"],
];

const HARDWARE: &[&[&str]] = &[
    &["report", "--paper-fixtures", "--out", "report-text"],
    &["report", "--paper-fixtures", "--format", "json", "--out", "report-json"],
    &["compare", "--paper-fixtures", "--format", "json", "--out", "compare-json"],
    &["compare", "--paper-fixtures", "--format", "csv", "--out", "compare-csv"],
];

const MIXED: &[&[&str]] = &[
    &[
        "msrun", "--weights", "bcu-model/model.nsnn", "--input", "bcu-data/img_00003.pgm", "--adc-noise", "0.01",
        "--seed", "7", "--out", "msrun-bin",
    ],
    &[
        "msrun", "--weights", "fcu-model/model.nsnn", "--input", "fcu-data/img_00004.ppm", "--adc-bits", "8",
        "--frames-format", "hex", "--out", "msrun-hex",
    ],
];

fn run_cli(dir: &Path, args: &[&str]) -> Result<Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_neurosim"))
        .args(args)
        .current_dir(dir)
        .env_remove("NEUROSIM_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("neurosim {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()));
    }
    Ok(serde_json::from_slice(&out.stdout).unwrap_or(Value::Null))
}

fn training(dirs: &Workdirs) -> Check {
    let mut summaries = Vec::new();
    for args in TRAINING {
        summaries.push(run_cli(&dirs.first, args)?);
    }
    let acc = |v: &Value, k: &str| v[k].as_f64().unwrap_or(f64::NAN);
    let (bcu, fcu) = (&summaries[1], &summaries[3]);
    let (b_train, b_test, f_train) = (acc(bcu, "train_acc"), acc(bcu, "test_acc"), acc(fcu, "train_acc"));
    let detail = format!("BCU-mini train {b_train:.3} test {b_test:.3}; FCU-mini train {f_train:.3}");
    ensure(b_train >= 0.95 && b_test >= 0.90 && f_train >= 0.80, || detail.clone())?;
    Ok(detail)
}

fn mixed_signal(dirs: &Workdirs) -> Check {
    let mut rng = SplitMix64::new(1);
    let adc = AdcModel::new(12, -1.0, 1.0).map_err(|e| e.to_string())?;
    let dac = DacModel::new(12, -1.0, 1.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut samples: Vec<f64> = (0..100_000).map(|_| rng.uniform(-1.0, 1.0)).collect();
    for &v in &samples {
        let back = dac_reconstruct(&dac, adc_quantize(&adc, v)).map_err(|e| e.to_string())?;
        worst = worst.max((back - v).abs());
    }
    ensure(worst <= adc.lsb() / 2.0 * (1.0 + 1e-12), || format!("round trip error {worst:e} > LSB/2"))?;

    samples.sort_by(f64::total_cmp);
    let codes = adc.convert(&samples);
    ensure(codes.windows(2).all(|w| w[0] <= w[1]), || "quantizer not monotonic".into())?;

    let mut flips = 0u64;
    for _ in 0..10_000 {
        let f = SpiFrame::new(rng.below(16) as u8, rng.below(4) as u8, rng.below(1 << 16) as u16).map_err(|e| e.to_string())?;
        let word = spi_encode(&f).map_err(|e| e.to_string())?;
        ensure(spi_decode(word) == Ok(f), || format!("codec mismatch on {f:?}"))?;
        for bit in 0..32 {
            let [b0, b1, b2, crc] = (word ^ (1 << bit)).to_be_bytes();
            ensure(crc8_payload([b0, b1, b2]) != crc, || format!("undetected flip of bit {bit} in {word:08x}"))?;
            flips += 1;
        }
    }
    let mut crc_failures = 0;
    for args in MIXED {
        crc_failures += run_cli(&dirs.first, args)?["crc_failures"].as_u64().unwrap_or(u64::MAX);
    }
    ensure(crc_failures == 0, || format!("{crc_failures} CRC failures in msrun frame logs"))?;
    Ok(format!(
        "round trip {:.3} LSB, monotonic, 10^4 frames identical, {flips} flips detected",
        worst / adc.lsb()
    ))
}

fn paper_tables(dirs: &Workdirs) -> Check {
    let mut outputs = Vec::new();
    for args in HARDWARE {
        outputs.push(run_cli(&dirs.first, args)?);
    }
    let reports = outputs[1]["reports"].as_array().ok_or("report JSON lacks reports")?;
    let budget = [504_000.0, 38.0 * 1_048_576.0, 464.0, 1728.0];
    let expected = [
        ([151_200.0, 11.4, 139.0, 518.0], 1.35, 12.0, 20.0),
        ([140_000.0, 10.5, 130.0, 480.0], 1.2, 15.0, 18.5),
    ];
    for (r, (used, gop, ms, eff)) in reports.iter().zip(expected) {
        let rows = r["resources"].as_array().ok_or("report lacks resources")?;
        for (i, row) in rows.iter().enumerate() {
            let got = row["used"].as_f64().unwrap_or(f64::NAN);
            let shown = if i == 1 { format!("{:.1}", got / 1_048_576.0) } else { format!("{got:.0}") };
            let want = if i == 1 { format!("{:.1}", used[i]) } else { format!("{:.0}", used[i]) };
            ensure(shown == want, || format!("{}: resource {i} is {shown}, expected {want}", r["design"]))?;
            let avail = row["available"].as_f64().unwrap_or(f64::NAN);
            let pct = row["percent"].as_f64().unwrap_or(f64::NAN);
            ensure(avail == budget[i] && (pct - 100.0 * got / avail).abs() < 1e-9, || {
                format!("{}: percent column {pct} not computed from budget", r["design"])
            })?;
        }
        let within = |a: f64, b: f64| (a - b).abs() / b <= 0.02;
        let (g, l, e) = (
            r["mac_gop"].as_f64().unwrap_or(f64::NAN),
            r["latency_s"].as_f64().unwrap_or(f64::NAN) * 1e3,
            r["power_eff_gops_per_w"].as_f64().unwrap_or(f64::NAN),
        );
        ensure(within(g, gop) && within(l, ms) && within(e, eff), || {
            format!("{}: {g} GOP, {l} ms, {e} GOP/s/W", r["design"])
        })?;
    }

    let rows = outputs[2]["rows"].as_array().ok_or("comparison lacks rows")?;
    let field = |i: usize, k: &str| rows[i][k].as_f64().unwrap_or(f64::NAN);
    let published = [[321.0, 12.0, 0.28], [293.0, 0.75, 213.0]];
    for (i, p) in published.iter().enumerate() {
        let got = [field(i, "chip_area_mm2"), field(i, "latency_ms"), field(i, "ee_tops_per_w")];
        ensure(&got == p, || format!("comparison row {i} is {got:?}"))?;
    }
    let (speedup, gain) = (field(1, "speedup"), field(1, "ee_gain"));
    ensure(speedup == 16.0 && format!("{gain:.1}") == "760.7", || format!("ratios {speedup} / {gain}"))?;
    Ok(format!("LUT/Mem/IO/DSP exact, perf within 2%, speedup {speedup:.1}x, EE gain {gain:.1}x"))
}

fn mac_counter(_: &Workdirs) -> Check {
    let mut rng = SplitMix64::new(17);
    let mut total = 0u64;
    for i in 0..50 {
        let spec = random_spec(&mut rng, i % 2 == 0);
        let counted = count_macs(&spec).map_err(|e| e.to_string())?;
        let oracle = instrumented_macs(&spec);
        ensure(counted.per_layer == oracle, || format!("spec {i}: {:?} vs {oracle:?}", counted.per_layer))?;
        total += counted.total_macs;
    }
    Ok(format!("50 specs, {total} MACs counted identically"))
}

fn files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).into_iter().flatten().flatten() {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, fs::read(&path).unwrap_or_default());
            }
        }
    }
    out
}

fn reproducibility(dirs: &Workdirs) -> Check {
    for args in TRAINING.iter().chain(HARDWARE).chain(MIXED) {
        run_cli(&dirs.second, args)?;
    }
    let (a, b) = (files(&dirs.first), files(&dirs.second));
    ensure(a.keys().eq(b.keys()), || "runs produced different file sets".into())?;
    let differing: Vec<_> = a.iter().filter(|(k, v)| b[*k] != **v).map(|(k, _)| k.display().to_string()).collect();
    ensure(differing.is_empty(), || format!("differing artifacts: {}", differing.join(", ")))?;
    let count = |ext: &str| a.keys().filter(|k| k.extension().is_some_and(|e| e == ext)).count();
    Ok(format!(
        "{} artifacts identical ({} checkpoints, {} CSVs, {} frame logs)",
        a.len(),
        count("nsnn"),
        count("csv"),
        count("bin") + count("hex")
    ))
}

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Option<Duration>,
    run: fn(&Workdirs) -> Check,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "LIF closed form", budget: Some(Duration::from_secs(1)), run: lif_closed_form },
    Criterion { id: 2, name: "conv/linear oracle equivalence", budget: Some(Duration::from_secs(10)), run: layer_oracles },
    Criterion { id: 3, name: "gradient checks", budget: Some(Duration::from_secs(30)), run: gradient_checks },
    Criterion { id: 4, name: "desk-scale training", budget: Some(Duration::from_secs(300)), run: training },
    Criterion { id: 5, name: "mixed-signal properties", budget: Some(Duration::from_secs(10)), run: mixed_signal },
    Criterion { id: 6, name: "reference table reproduction", budget: Some(Duration::from_secs(1)), run: paper_tables },
    Criterion { id: 7, name: "MAC counter", budget: Some(Duration::from_secs(10)), run: mac_counter },
    Criterion { id: 8, name: "reproducibility", budget: None, run: reproducibility },
];

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("tempdir");
    let dirs = Workdirs {
        first: tmp.path().join("first"),
        second: tmp.path().join("second"),
        _tmp: tmp,
    };
    fs::create_dir_all(&dirs.first).expect("workdir");
    fs::create_dir_all(&dirs.second).expect("workdir");

    let mut failed = 0;
    for c in CRITERIA {
        let start = Instant::now();
        let result = std::panic::catch_unwind(|| (c.run)(&dirs)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let over = c.budget.is_some_and(|b| took > b);
        let (status, detail) = match result {
            Ok(d) if !over => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; exceeded {:?} budget", c.budget.unwrap())),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} criterion {}: {} [{:.2} s] {detail}", c.id, c.name, took.as_secs_f64());
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
