use std::io::Write;
use std::path::Path;

use pas::{PasError, Result};

/// Writes `bytes` to a temp file next to `path` and renames it into place,
/// so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| PasError::Io(e.error))?;
    Ok(())
}

pub fn exit_code(err: &PasError) -> i32 {
    match err {
        PasError::DimensionMismatch { .. } => 3,
        _ => 2,
    }
}
