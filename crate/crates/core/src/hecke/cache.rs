//! Binary τ cache.
//!
//! Layout: a 16-byte header (the 5-byte magic `TAUV1`, three zero bytes, then
//! N as little-endian u64) followed by τ(1..=N). Each τ(n) is stored as two
//! little-endian 64-bit words, low word (u64) first then high word (i64), since
//! τ(n) leaves the 64-bit range once n passes a few thousand.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const TAU_CACHE_MAGIC: &[u8; 5] = b"TAUV1";

/// Writes τ(1..=N) from a table whose index 0 is τ(0) = 0.
pub fn write_tau_cache(path: &Path, tau: &[i128]) -> Result<()> {
    let n = tau.len().saturating_sub(1) as u64;
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("tau"),
        std::process::id()
    ));
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        let mut header = [0u8; 16];
        header[..5].copy_from_slice(TAU_CACHE_MAGIC);
        header[8..].copy_from_slice(&n.to_le_bytes());
        w.write_all(&header)?;
        for &t in tau.iter().skip(1) {
            w.write_all(&(t as u64).to_le_bytes())?;
            w.write_all(&((t >> 64) as i64).to_le_bytes())?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a cache back into a table with τ(0) = 0 prepended.
pub fn read_tau_cache(path: &Path) -> Result<Vec<i128>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[..5] != TAU_CACHE_MAGIC || header[5..8] != [0, 0, 0] {
        return Err(Error::CacheFormat("bad magic".into()));
    }
    let n = u64::from_le_bytes(header[8..].try_into().expect("8 bytes"));
    let expected = 16 + 16 * n;
    let actual = std::fs::metadata(path)?.len();
    if actual != expected {
        return Err(Error::CacheFormat(format!("expected {expected} bytes, found {actual}")));
    }
    let mut tau = Vec::with_capacity(n as usize + 1);
    tau.push(0i128);
    let mut word = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut word)?;
        let lo = u64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let hi = i64::from_le_bytes(word);
        tau.push(((hi as i128) << 64) | lo as i128);
    }
    Ok(tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_large_and_negative_values() {
        let dir = std::env::temp_dir().join(format!("tml-cache-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tau.bin");
        let tau = vec![0, 1, -24, i128::MAX / 3, -(1i128 << 100) - 7];
        write_tau_cache(&path, &tau).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..5], b"TAUV1");
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 4);
        assert_eq!(bytes.len(), 16 + 4 * 16);
        assert_eq!(read_tau_cache(&path).unwrap(), tau);
        std::fs::write(&path, b"NOTTAU__________").unwrap();
        assert!(matches!(read_tau_cache(&path), Err(Error::CacheFormat(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
