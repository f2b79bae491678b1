//! Sampled curves from CSV: one row per sample, `s, x, y[, z[, w]]`, with an
//! optional header row.

use std::path::Path;

use tubeq_core::geometry::{sampled_curve, Embedding};

use crate::error::CliError;

pub fn load_curve(path: &Path) -> Result<Embedding, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::config("shape.file", format!("{}: {e}", path.display())))?;
    parse_curve(file)
}

pub fn parse_curve<R: std::io::Read>(reader: R) -> Result<Embedding, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut s = Vec::new();
    let mut points = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::config("shape.file", e))?;
        let values: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match values {
            Ok(v) if v.len() >= 2 => {
                s.push(v[0]);
                points.push(v[1..].to_vec());
            }
            Ok(v) => {
                return Err(CliError::config("shape.file", format!("row {line} has {} columns, need s and coordinates", v.len())));
            }
            Err(_) if line == 0 => continue,
            Err(e) => return Err(CliError::config("shape.file", format!("row {line}: {e}"))),
        }
    }
    sampled_curve(&s, &points).map_err(|e| CliError::config("shape.file", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_skipped_and_closure_detected() {
        let mut text = String::from("s,x,y\n");
        for i in 0..=32 {
            let t = std::f64::consts::TAU * i as f64 / 32.0;
            text.push_str(&format!("{t},{},{}\n", t.cos(), t.sin()));
        }
        let e = parse_curve(text.as_bytes()).unwrap();
        assert!(e.is_closed());
        assert_eq!(e.ambient_dim(), 2);
    }

    #[test]
    fn decreasing_parameter_is_rejected() {
        let text = "0,0,0\n1,1,0\n0.5,2,0\n3,3,0\n4,4,0\n5,5,0\n";
        let err = parse_curve(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("not increasing") || err.to_string().contains("too few"), "{err}");
    }
}
