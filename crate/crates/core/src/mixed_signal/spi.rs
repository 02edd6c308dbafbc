//! 32-bit SPI frame (mode 0, MSB first):
//!
//! ```text
//!  31    28 27  26 25  24 23                8 7       0
//! +--------+------+------+-------------------+---------+
//! |channel | flags| rsvd |  sample (16 bits) |  crc-8  |
//! +--------+------+------+-------------------+---------+
//! ```
//!
//! flags bit0 = DAC direction, bit1 = last frame in burst. The reserved bits
//! must be zero. Samples narrower than 16 bits are left-justified. The CRC
//! covers bits 31..8, taken as three bytes MSB first.

use serde::{Deserialize, Serialize};

use super::crc::crc8_payload;
use crate::error::{FrameError, Result};

pub const FLAG_DAC: u8 = 0b01;
pub const FLAG_LAST: u8 = 0b10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpiFrame {
    /// 4-bit channel number.
    pub channel: u8,
    /// 2-bit flag field.
    pub flags: u8,
    /// Left-justified converter code.
    pub sample: u16,
}

impl SpiFrame {
    pub fn new(channel: u8, flags: u8, sample: u16) -> Result<Self, FrameError> {
        let f = Self { channel, flags, sample };
        f.validate()?;
        Ok(f)
    }

    /// Frame carrying an `bits`-wide converter code, left-justified.
    pub fn from_code(channel: u8, flags: u8, code: u32, bits: u32) -> Result<Self, FrameError> {
        if !(1..=16).contains(&bits) || code >= (1u32 << bits) {
            return Err(FrameError::Field("code does not fit the converter width"));
        }
        Self::new(channel, flags, (code << (16 - bits)) as u16)
    }

    /// Right-justified converter code; fails if the low padding bits are set.
    pub fn code(&self, bits: u32) -> Result<u32, FrameError> {
        if !(1..=16).contains(&bits) {
            return Err(FrameError::Field("converter width must be 1..=16"));
        }
        let shift = 16 - bits;
        if shift > 0 && self.sample & ((1u16 << shift) - 1) != 0 {
            return Err(FrameError::Field("sample padding bits are not zero"));
        }
        Ok((self.sample >> shift) as u32)
    }

    pub fn is_dac(&self) -> bool {
        self.flags & FLAG_DAC != 0
    }

    pub fn is_last(&self) -> bool {
        self.flags & FLAG_LAST != 0
    }

    fn validate(&self) -> Result<(), FrameError> {
        if self.channel > 0xF {
            return Err(FrameError::Field("channel exceeds 4 bits"));
        }
        if self.flags > 0b11 {
            return Err(FrameError::Field("flags exceed 2 bits"));
        }
        Ok(())
    }

    fn header_bytes(&self) -> [u8; 3] {
        [(self.channel << 4) | (self.flags << 2), (self.sample >> 8) as u8, self.sample as u8]
    }

    pub fn crc(&self) -> u8 {
        crc8_payload(self.header_bytes())
    }
}

pub fn spi_encode(frame: &SpiFrame) -> Result<u32, FrameError> {
    frame.validate()?;
    let [b0, b1, b2] = frame.header_bytes();
    Ok(u32::from_be_bytes([b0, b1, b2, frame.crc()]))
}

/// Decodes a word; reserved bits are checked before the CRC.
pub fn spi_decode(word: u32) -> Result<SpiFrame, FrameError> {
    let [b0, b1, b2, crc] = word.to_be_bytes();
    let reserved = b0 & 0b11;
    if reserved != 0 {
        return Err(FrameError::Reserved(reserved));
    }
    let computed = crc8_payload([b0, b1, b2]);
    if computed != crc {
        return Err(FrameError::Crc { found: crc, computed });
    }
    Ok(SpiFrame {
        channel: b0 >> 4,
        flags: (b0 >> 2) & 0b11,
        sample: u16::from_be_bytes([b1, b2]),
    })
}

/// Frame log as consecutive big-endian words.
pub fn frames_to_bytes(words: &[u32]) -> Vec<u8> {
    words.iter().flat_map(|w| w.to_be_bytes()).collect()
}

pub fn frames_from_bytes(bytes: &[u8]) -> Result<Vec<u32>, FrameError> {
    if !bytes.len().is_multiple_of(4) {
        return Err(FrameError::Field("frame log length is not a multiple of 4"));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes(c.try_into().unwrap()))
        .collect())
}

/// Frame log as text, one lowercase 8-digit hex word per line.
pub fn frames_to_hex(words: &[u32]) -> String {
    words.iter().map(|w| format!("{w:08x}\n")).collect()
}

pub fn frames_from_hex(text: &str) -> Result<Vec<u32>, FrameError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| u32::from_str_radix(l.trim(), 16).map_err(|_| FrameError::Field("bad hex word")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_frame() {
        let f = SpiFrame::new(0, 0, 0).unwrap();
        assert_eq!(spi_encode(&f).unwrap(), 0);
        assert_eq!(spi_decode(0).unwrap(), f);
    }

    #[test]
    fn bit_layout() {
        let f = SpiFrame::new(0xA, FLAG_LAST | FLAG_DAC, 0xBEEF).unwrap();
        let w = spi_encode(&f).unwrap();
        assert_eq!(w >> 28, 0xA);
        assert_eq!((w >> 26) & 0b11, 0b11);
        assert_eq!((w >> 24) & 0b11, 0);
        assert_eq!((w >> 8) & 0xFFFF, 0xBEEF);
        assert_eq!(w & 0xFF, crate::mixed_signal::crc8(&[0xAC, 0xBE, 0xEF]) as u32);
    }

    #[test]
    fn reserved_bit_is_protocol_error() {
        let w = spi_encode(&SpiFrame::new(3, 1, 0x1230).unwrap()).unwrap();
        assert_eq!(spi_decode(w | (1 << 24)), Err(FrameError::Reserved(1)));
        assert_eq!(spi_decode(w | (1 << 25)), Err(FrameError::Reserved(2)));
    }

    #[test]
    fn corrupted_sample_is_integrity_error() {
        let w = spi_encode(&SpiFrame::new(3, 1, 0x1230).unwrap()).unwrap();
        assert!(matches!(spi_decode(w ^ (1 << 12)), Err(FrameError::Crc { .. })));
    }

    #[test]
    fn left_justified_codes() {
        let f = SpiFrame::from_code(1, 0, 0xABC, 12).unwrap();
        assert_eq!(f.sample, 0xABC0);
        assert_eq!(f.code(12).unwrap(), 0xABC);
        assert!(SpiFrame::from_code(1, 0, 0x1000, 12).is_err());
        assert!(SpiFrame::new(1, 0, 0xABC1).unwrap().code(12).is_err());
    }

    #[test]
    fn field_limits() {
        assert!(SpiFrame::new(16, 0, 0).is_err());
        assert!(SpiFrame::new(0, 4, 0).is_err());
    }

    #[test]
    fn log_formats() {
        let words = [0x0000_0000, 0xDEAD_BE00, 0x1234_5678];
        assert_eq!(frames_from_bytes(&frames_to_bytes(&words)).unwrap(), words);
        let hex = frames_to_hex(&words);
        assert_eq!(hex, "00000000\ndeadbe00\n12345678\n");
        assert_eq!(frames_from_hex(&hex).unwrap(), words);
        assert!(frames_from_bytes(&[0, 1, 2]).is_err());
    }
}
