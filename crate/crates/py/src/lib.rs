//! Python bindings. Reports and tables cross the boundary as JSON strings.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use neurosim::hw::{self, PaperDesign};
use neurosim::mixed_signal::{self as ms, AdcModel, DacModel, SpiFrame};
use neurosim::snn::{network_forward, NetworkSpec, WeightSet};
use neurosim::training::{load_checkpoint, save_checkpoint};
use neurosim::Tensor;

fn py_err(e: neurosim::Error) -> PyErr {
    match e {
        neurosim::Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn frame_err(e: neurosim::FrameError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn spec_from(name_or_json: &str) -> PyResult<NetworkSpec> {
    if let Some(spec) = NetworkSpec::builtin(name_or_json) {
        return Ok(spec);
    }
    NetworkSpec::from_json(name_or_json).map_err(py_err)
}

/// A network spec with its weights.
#[pyclass(module = "neurosim")]
struct Network {
    spec: NetworkSpec,
    weights: WeightSet,
}

#[pymethods]
impl Network {
    /// `spec` is a builtin name or a spec JSON string.
    #[new]
    #[pyo3(signature = (spec, seed = 0))]
    fn new(spec: &str, seed: u64) -> PyResult<Self> {
        let spec = spec_from(spec)?;
        let weights = WeightSet::init(&spec, seed);
        Ok(Self { spec, weights })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let (weights, spec) = load_checkpoint(path).map_err(py_err)?;
        Ok(Self { spec, weights })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_checkpoint(&self.weights, &self.spec, path).map_err(py_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.spec.name.clone()
    }

    #[getter]
    fn input_shape(&self) -> (usize, usize, usize) {
        let [c, h, w] = self.spec.input_shape;
        (c, h, w)
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.spec.num_classes
    }

    #[getter]
    fn timesteps(&self) -> usize {
        self.spec.timesteps
    }

    fn spec_json(&self) -> String {
        self.spec.to_json_pretty()
    }

    /// Flat C-major input; returns `(logits, spike_counts)`.
    fn forward(&self, input: Vec<f64>) -> PyResult<(Vec<f64>, Vec<u64>)> {
        let x = Tensor::from_vec(self.spec.input_shape.to_vec(), input).map_err(py_err)?;
        let out = network_forward(&self.spec, &self.weights, &x).map_err(py_err)?;
        Ok((out.logits.into_data(), out.spike_counts))
    }

    fn predict(&self, input: Vec<f64>) -> PyResult<usize> {
        let (logits, _) = self.forward(input)?;
        Ok(Tensor::from_vec(vec![logits.len()], logits).map_err(py_err)?.argmax())
    }

    /// ADC -> network -> DAC; returns a dict-shaped JSON string with
    /// logits, output codes and volts, and the encoded frame words.
    #[pyo3(signature = (input, adc_bits = 12, dac_bits = 12, noise = 0.0, seed = 0))]
    fn analog_run(&self, input: Vec<f64>, adc_bits: u32, dac_bits: u32, noise: f64, seed: u64) -> PyResult<String> {
        let x = Tensor::from_vec(self.spec.input_shape.to_vec(), input).map_err(py_err)?;
        let adc = AdcModel::new(adc_bits, -1.0, 1.0)
            .and_then(|a| a.with_noise(noise, seed))
            .map_err(py_err)?;
        let dac = DacModel::new(dac_bits, -1.0, 1.0).map_err(py_err)?;
        let run = ms::analog_loop(&self.spec, &self.weights, &x, &adc, &dac).map_err(py_err)?;
        Ok(serde_json::json!({
            "logits": run.logits.data(),
            "spike_counts": run.spike_counts,
            "input_codes": run.input_codes,
            "output_codes": run.output_codes,
            "output_volts": run.output_volts,
            "frames": run.words(),
        })
        .to_string())
    }

    fn macs(&self) -> PyResult<u64> {
        Ok(hw::count_macs(&self.spec).map_err(py_err)?.macs_per_inference())
    }

    fn __repr__(&self) -> String {
        format!("Network({:?}, classes={}, T={})", self.spec.name, self.spec.num_classes, self.spec.timesteps)
    }
}

#[pyfunction]
#[pyo3(signature = (v, bits = 12, v_min = -1.0, v_max = 1.0))]
fn adc_quantize(v: f64, bits: u32, v_min: f64, v_max: f64) -> PyResult<u32> {
    Ok(ms::adc_quantize(&AdcModel::new(bits, v_min, v_max).map_err(py_err)?, v))
}

#[pyfunction]
#[pyo3(signature = (code, bits = 12, v_min = -1.0, v_max = 1.0))]
fn dac_reconstruct(code: u32, bits: u32, v_min: f64, v_max: f64) -> PyResult<f64> {
    ms::dac_reconstruct(&DacModel::new(bits, v_min, v_max).map_err(py_err)?, code).map_err(py_err)
}

#[pyfunction]
fn crc8(data: &[u8]) -> u8 {
    ms::crc8(data)
}

#[pyfunction]
fn spi_encode(channel: u8, flags: u8, sample: u16) -> PyResult<u32> {
    ms::spi_encode(&SpiFrame::new(channel, flags, sample).map_err(frame_err)?).map_err(frame_err)
}

/// Returns `(channel, flags, sample)`; raises ValueError on CRC or protocol errors.
#[pyfunction]
fn spi_decode(word: u32) -> PyResult<(u8, u8, u16)> {
    let f = ms::spi_decode(word).map_err(frame_err)?;
    Ok((f.channel, f.flags, f.sample))
}

/// Per-layer MACs of one timestep for a builtin name or spec JSON.
#[pyfunction]
fn count_macs(spec: &str) -> PyResult<Vec<u64>> {
    Ok(hw::count_macs(&spec_from(spec)?).map_err(py_err)?.per_layer)
}

fn paper_design(name: &str) -> PyResult<PaperDesign> {
    PaperDesign::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown reference design {name:?}")))
}

/// Performance report JSON of a shipped reference design (`bcu` or `fcu`).
#[pyfunction]
fn perf_report(design: &str) -> PyResult<String> {
    let d = paper_design(design)?;
    let r = hw::perf_report(&d.spec(), &d.cost(), &hw::fixtures::budget(), d.targets().accuracy).map_err(py_err)?;
    Ok(r.to_json())
}

/// Comparison table JSON of the shipped digital and mixed-signal designs.
#[pyfunction]
fn compare() -> PyResult<String> {
    Ok(hw::design_comparison(&hw::fixtures::design_points()).map_err(py_err)?.to_json())
}

#[pymodule]
#[pyo3(name = "neurosim")]
fn neurosim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Network>()?;
    m.add_function(wrap_pyfunction!(adc_quantize, m)?)?;
    m.add_function(wrap_pyfunction!(dac_reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(crc8, m)?)?;
    m.add_function(wrap_pyfunction!(spi_encode, m)?)?;
    m.add_function(wrap_pyfunction!(spi_decode, m)?)?;
    m.add_function(wrap_pyfunction!(count_macs, m)?)?;
    m.add_function(wrap_pyfunction!(perf_report, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    Ok(())
}
