use serde::{Deserialize, Serialize};

use crate::error::{config, contract, Result};
use crate::rng::{stream, SplitMix64};

pub const MIN_BITS: u32 = 4;
pub const MAX_BITS: u32 = 16;

fn check_range(bits: u32, v_min: f64, v_max: f64) -> Result<()> {
    if !(MIN_BITS..=MAX_BITS).contains(&bits) {
        return Err(config(format!("converter resolution {bits} bits not in {MIN_BITS}..={MAX_BITS}")));
    }
    if !(v_min.is_finite() && v_max.is_finite() && v_min < v_max) {
        return Err(config(format!("converter range [{v_min}, {v_max}] is empty or not finite")));
    }
    Ok(())
}

/// Uniform mid-tread quantizer onto `2^bits` codes, saturating outside
/// `[v_min, v_max]`, with optional input-referred Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdcModel {
    pub bits: u32,
    pub v_min: f64,
    pub v_max: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for AdcModel {
    fn default() -> Self {
        Self {
            bits: 12,
            v_min: -1.0,
            v_max: 1.0,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl AdcModel {
    pub fn new(bits: u32, v_min: f64, v_max: f64) -> Result<Self> {
        let m = Self {
            bits,
            v_min,
            v_max,
            ..Default::default()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(config(format!("noise sigma {sigma} must be >= 0")));
        }
        self.noise_sigma = sigma;
        self.seed = seed;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_range(self.bits, self.v_min, self.v_max)?;
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(config(format!("noise sigma {} must be >= 0", self.noise_sigma)));
        }
        Ok(())
    }

    pub fn max_code(&self) -> u32 {
        (1u32 << self.bits) - 1
    }

    /// Volts per code step.
    pub fn lsb(&self) -> f64 {
        (self.v_max - self.v_min) / self.max_code() as f64
    }

    /// Noiseless code for `v`, rounding half away from zero.
    pub fn quantize_exact(&self, v: f64) -> u32 {
        quantize(v, self.bits, self.v_min, self.v_max)
    }

    /// Converts a sequence of samples. Element `k` receives the `k`-th
    /// draw of the converter's seeded noise stream, so repeated calls with
    /// the same input are identical.
    pub fn convert(&self, values: &[f64]) -> Vec<u32> {
        if self.noise_sigma == 0.0 {
            return values.iter().map(|&v| self.quantize_exact(v)).collect();
        }
        let mut rng = SplitMix64::derive(self.seed, stream::ADC_NOISE);
        values
            .iter()
            .map(|&v| self.quantize_exact(v + rng.gaussian(0.0, self.noise_sigma)))
            .collect()
    }

    /// Voltage of a code's lattice point.
    pub fn code_voltage(&self, code: u32) -> f64 {
        self.v_min + code as f64 / self.max_code() as f64 * (self.v_max - self.v_min)
    }
}

fn quantize(v: f64, bits: u32, v_min: f64, v_max: f64) -> u32 {
    let max = ((1u32 << bits) - 1) as f64;
    let x = ((v - v_min) / (v_max - v_min) * max).round();
    if x.is_nan() {
        return 0;
    }
    x.clamp(0.0, max) as u32
}

/// `code = clamp(round((v + noise - v_min) / (v_max - v_min) * (2^n - 1)), 0, 2^n - 1)`.
pub fn adc_quantize(model: &AdcModel, v: f64) -> u32 {
    model.convert(&[v])[0]
}

/// Ideal reconstructor mapping codes back onto `[v_min, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DacModel {
    pub bits: u32,
    pub v_min: f64,
    pub v_max: f64,
}

impl Default for DacModel {
    fn default() -> Self {
        Self {
            bits: 12,
            v_min: -1.0,
            v_max: 1.0,
        }
    }
}

impl DacModel {
    pub fn new(bits: u32, v_min: f64, v_max: f64) -> Result<Self> {
        let m = Self { bits, v_min, v_max };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check_range(self.bits, self.v_min, self.v_max)
    }

    pub fn max_code(&self) -> u32 {
        (1u32 << self.bits) - 1
    }

    pub fn lsb(&self) -> f64 {
        (self.v_max - self.v_min) / self.max_code() as f64
    }

    /// Digital value to DAC code on this converter's lattice (saturating).
    pub fn encode(&self, v: f64) -> u32 {
        quantize(v, self.bits, self.v_min, self.v_max)
    }
}

/// `v = v_min + code / (2^n - 1) * (v_max - v_min)`.
pub fn dac_reconstruct(model: &DacModel, code: u32) -> Result<f64> {
    if code > model.max_code() {
        return Err(contract(format!("code {code} out of range for a {}-bit DAC", model.bits)));
    }
    Ok(model.v_min + code as f64 / model.max_code() as f64 * (model.v_max - model.v_min))
}
