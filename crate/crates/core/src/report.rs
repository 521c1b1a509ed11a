//! Output formatting shared by all reports.

use std::fs;
use std::io;
use std::path::Path;

/// 17 significant digits, `.` separator, exponent form.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `contents` to `path` through a sibling temporary file and a rename,
/// so readers never observe a partially written report.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let file_name = path.file_name().ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "report path has no file name")
    })?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}
