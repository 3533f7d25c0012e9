//! Binary amplitude dump.
//!
//! Layout (little endian): 8-byte magic `QETGS\0\0\0`, `u32` qubit count,
//! `u32` reserved (zero), then `2^N` pairs of `f64` (re, im).

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

pub const MAGIC: [u8; 8] = *b"QETGS\0\0\0";

pub fn write_amplitudes<T: Real, W: Write>(mut w: W, amplitudes: &[C<T>]) -> Result<()> {
    if !amplitudes.len().is_power_of_two() {
        return Err(Error::Dimension(format!("{} amplitudes is not a power of two", amplitudes.len())));
    }
    let n = amplitudes.len().trailing_zeros();
    w.write_all(&MAGIC)?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    for a in amplitudes {
        w.write_all(&a.re.to_f64_lossy().to_le_bytes())?;
        w.write_all(&a.im.to_f64_lossy().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_amplitudes<R: Read>(mut r: R) -> Result<(u32, Vec<C<f64>>)> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if header[..8] != MAGIC {
        return Err(Error::Invalid("not a ground-state dump (bad magic)".into()));
    }
    let n = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes"));
    if n > 40 {
        return Err(Error::Invalid(format!("implausible qubit count {n} in dump header")));
    }
    let mut out = Vec::with_capacity(1 << n);
    let mut buf = [0u8; 16];
    for _ in 0..(1u64 << n) {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
        out.push(C::new(re, im));
    }
    Ok((n, out))
}

pub fn save<T: Real>(path: &Path, amplitudes: &[C<T>]) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_amplitudes(file, amplitudes)
}

pub fn load(path: &Path) -> Result<(u32, Vec<C<f64>>)> {
    read_amplitudes(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_and_round_trip() {
        let amps = vec![C::new(0.5, -0.5), C::new(0.0, 0.5), C::new(0.5, 0.0), C::new(0.0, 0.0)];
        let mut bytes = Vec::new();
        write_amplitudes(&mut bytes, &amps).unwrap();
        assert_eq!(bytes.len(), 16 + 4 * 16);
        assert_eq!(&bytes[..8], b"QETGS\0\0\0");
        assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &[0, 0, 0, 0]);
        assert_eq!(&bytes[16..24], &0.5f64.to_le_bytes());
        let (n, back) = read_amplitudes(bytes.as_slice()).unwrap();
        assert_eq!(n, 2);
        assert_eq!(back, amps);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let bytes = [0u8; 32];
        assert!(read_amplitudes(&bytes[..]).is_err());
    }
}
