//! Binary field snapshots (`.nls2`).
//!
//! Layout, all integers and floats little-endian:
//!
//! | offset | size      | content                                        |
//! |--------|-----------|------------------------------------------------|
//! | 0      | 4         | magic `b"NLS2"`                                |
//! | 4      | 4         | format version, `u32` (currently 1)            |
//! | 8      | 4         | `N`, `u32`                                     |
//! | 12     | 16·N²     | coefficients `(re: f64, im: f64)`, natural order |
//!
//! Natural order is row-major over `(k₁, k₂)` with each index running
//! `-N/2 ..= N/2-1`.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

pub const MAGIC: &[u8; 4] = b"NLS2";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 12;

pub fn encode(field: &SpectralField) -> Vec<u8> {
    let n = field.n_modes();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * n * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for z in field.coeffs() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

/// Decodes a snapshot. The error carries `reason` only; callers that know
/// the file path wrap it via [`read`].
pub fn decode(bytes: &[u8]) -> std::result::Result<SpectralField, String> {
    if bytes.len() < HEADER_LEN {
        return Err(format!("truncated header ({} bytes)", bytes.len()));
    }
    if &bytes[0..4] != MAGIC {
        return Err("bad magic".into());
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = HEADER_LEN + 16 * n * n;
    if bytes.len() != expected {
        return Err(format!("expected {expected} bytes for N = {n}, found {}", bytes.len()));
    }
    let coeffs = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    SpectralField::from_coeffs(n, coeffs).map_err(|e| e.to_string())
}

/// Writes via a temporary sibling file and rename, so readers never see a
/// partially written snapshot.
pub fn write(path: &Path, field: &SpectralField) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension("nls2.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&encode(field))?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read(path: &Path) -> Result<SpectralField> {
    let bytes = fs::read(path)?;
    decode(&bytes).map_err(|reason| Error::Snapshot {
        path: path.to_path_buf(),
        reason,
    })
}

/// Checkpoint file name `{run_id}_{n}.nls2`.
pub fn checkpoint_name(run_id: &str, step: usize) -> String {
    format!("{run_id}_{step}.nls2")
}
