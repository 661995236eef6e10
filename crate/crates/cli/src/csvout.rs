//! CSV emission: comma separators, one header row, `.` decimal marks,
//! 17 significant digits, LF line endings.

use std::io::Write;
use std::path::Path;

use tengauss_core::Result;

pub use tengauss_core::io::fmt17;

pub fn write_csv<R, I>(path: &Path, header: &str, rows: I) -> Result<()>
where
    R: AsRef<str>,
    I: IntoIterator<Item = R>,
{
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(header.as_bytes())?;
    out.write_all(b"\n")?;
    for row in rows {
        out.write_all(row.as_ref().as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
