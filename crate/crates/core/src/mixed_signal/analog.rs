use super::converter::{AdcModel, DacModel};
use super::spi::{spi_encode, SpiFrame, FLAG_DAC, FLAG_LAST};
use crate::error::{config, Result};
use crate::snn::{network_forward, NetworkSpec, WeightSet};
use crate::tensor::Tensor;

/// Result of one pass through the ADC -> network -> DAC chain.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogRun {
    /// Network output computed on the dequantized input.
    pub logits: Tensor,
    pub spike_counts: Vec<u64>,
    pub input_codes: Vec<u32>,
    pub output_codes: Vec<u32>,
    /// DAC output voltage per logit.
    pub output_volts: Vec<f64>,
    /// One frame per converted element: the ADC burst, then the DAC burst.
    pub frames: Vec<SpiFrame>,
}

impl AnalogRun {
    pub fn words(&self) -> Vec<u32> {
        self.frames
            .iter()
            .map(|f| spi_encode(f).expect("frames built valid"))
            .collect()
    }
}

fn burst(codes: &[u32], bits: u32, direction: u8) -> Result<Vec<SpiFrame>> {
    let last = codes.len().saturating_sub(1);
    codes
        .iter()
        .enumerate()
        .map(|(i, &code)| {
            let flags = direction | if i == last { FLAG_LAST } else { 0 };
            Ok(SpiFrame::from_code((i % 16) as u8, flags, code, bits)?)
        })
        .collect()
}

/// Quantizes `analog_input` element-wise, runs the network on the
/// dequantized values and drives each logit out through the DAC.
///
/// The frame log holds an ADC burst (one frame per input element, channel =
/// element index mod 16) followed by a DAC burst (one per logit, flag bit0
/// set). The final frame of each burst carries the last-in-burst flag.
pub fn analog_loop(
    spec: &NetworkSpec,
    weights: &WeightSet,
    analog_input: &Tensor,
    adc: &AdcModel,
    dac: &DacModel,
) -> Result<AnalogRun> {
    adc.validate()?;
    dac.validate()?;
    let expected: usize = spec.input_shape.iter().product();
    if analog_input.len() != expected {
        return Err(config(format!(
            "analog input has {} elements, spec {} expects {:?}",
            analog_input.len(),
            spec.name,
            spec.input_shape
        )));
    }
    let input_codes = adc.convert(analog_input.data());
    let digital: Vec<f64> = input_codes.iter().map(|&c| adc.code_voltage(c)).collect();
    let out = network_forward(spec, weights, &Tensor::from_vec(spec.input_shape.to_vec(), digital)?)?;

    let output_codes: Vec<u32> = out.logits.data().iter().map(|&z| dac.encode(z)).collect();
    let output_volts = output_codes
        .iter()
        .map(|&c| super::converter::dac_reconstruct(dac, c))
        .collect::<Result<Vec<_>>>()?;

    let mut frames = burst(&input_codes, adc.bits, 0)?;
    frames.extend(burst(&output_codes, dac.bits, FLAG_DAC)?);
    Ok(AnalogRun {
        logits: out.logits,
        spike_counts: out.spike_counts,
        input_codes,
        output_codes,
        output_volts,
        frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixed_signal::spi_decode;

    #[test]
    fn frame_counts_and_flags() {
        let spec = NetworkSpec::bcu_mini(4, 4);
        let w = WeightSet::init(&spec, 1);
        let x = Tensor::full(&[1, 4, 4], 0.25);
        let run = analog_loop(&spec, &w, &x, &AdcModel::default(), &DacModel::default()).unwrap();
        assert_eq!(run.frames.len(), 16 + 2);
        let last_flags: Vec<usize> = run.frames.iter().enumerate().filter(|(_, f)| f.is_last()).map(|(i, _)| i).collect();
        assert_eq!(last_flags, vec![15, 17]);
        assert!(run.frames[..16].iter().all(|f| !f.is_dac()));
        assert!(run.frames[16..].iter().all(SpiFrame::is_dac));
        assert_eq!(run.frames[16].channel, 0);
        assert_eq!(run.frames[17].channel, 1);
        for w in run.words() {
            spi_decode(w).unwrap();
        }
    }

    #[test]
    fn element_count_mismatch() {
        let spec = NetworkSpec::bcu_mini(4, 4);
        let w = WeightSet::zeros(&spec);
        let x = Tensor::zeros(&[1, 3, 3]);
        assert!(analog_loop(&spec, &w, &x, &AdcModel::default(), &DacModel::default()).is_err());
    }
}
