//! Bit-exact model of the converter boundary: ADC, DAC and the SPI link.

mod analog;
mod converter;
mod crc;
mod spi;

pub use analog::{analog_loop, AnalogRun};
pub use converter::{adc_quantize, dac_reconstruct, AdcModel, DacModel, MAX_BITS, MIN_BITS};
pub use crc::{crc8, crc8_payload};
pub use spi::{
    frames_from_bytes, frames_from_hex, frames_to_bytes, frames_to_hex, spi_decode, spi_encode, SpiFrame, FLAG_DAC,
    FLAG_LAST,
};
