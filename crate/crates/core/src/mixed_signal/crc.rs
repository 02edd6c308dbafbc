/// CRC-8 with polynomial 0x07, init 0x00, MSB first, no reflection, no final XOR.
pub fn crc8(bytes: &[u8]) -> u8 {
    let mut crc = 0u8;
    for &b in bytes {
        crc ^= b;
        for _ in 0..8 {
            crc = if crc & 0x80 != 0 { (crc << 1) ^ 0x07 } else { crc << 1 };
        }
    }
    crc
}

/// Checksum over the 24 header/sample bits of an SPI frame.
pub fn crc8_payload(payload: [u8; 3]) -> u8 {
    crc8(&payload)
}
