//! CSV tables and Matrix Market dumps. Floats use 12 significant digits so
//! identical runs give identical bytes.

use std::io::Write;
use std::path::Path;

use tubeq_core::linalg::Matrix;

use crate::error::CliError;

pub fn float(v: f64) -> String {
    format!("{v:.11e}")
}

/// Writes a header and rows of preformatted cells.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e.into()))?;
    w.write_record(header).map_err(|e| CliError::io(path, e.into()))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::io(path, e.into()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Coordinate-format Matrix Market, 1-based indices, entries in row order.
pub fn write_matrix_market(path: &Path, matrix: &Matrix<f64>) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let entries: Vec<(usize, usize, f64)> = matrix.triplets().into_iter().filter(|t| t.2 != 0.0).collect();
    let n = matrix.dim();
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{n} {n} {}", entries.len())?;
        for (i, j, v) in &entries {
            writeln!(w, "{} {} {}", i + 1, j + 1, float(*v))?;
        }
        w.flush()
    };
    body().map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(float(-0.25), "-2.50000000000e-1");
        assert_eq!(float(1.0 / 3.0), "3.33333333333e-1");
    }
}
