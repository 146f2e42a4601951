//! CSV exchange formats for matrices and vectors.
//!
//! Matrices are row-major ASCII decimal with '.' radix, one row per line,
//! comma-separated. Vectors are written as a single column (one value per
//! line); the readers also accept a single comma-separated row. Lines
//! starting with '#' and blank lines are skipped.

use ndarray::{Array1, Array2};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

fn parse_line(line: &str, line_no: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {line_no}: invalid number '{}'", tok.trim())))
        })
        .collect()
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_matrix(text: &str) -> Result<Array2<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in data_lines(text) {
        let row = parse_line(line, line_no)?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse(format!(
                    "line {line_no}: expected {} columns, found {}",
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no data rows found".into()));
    }
    let ncols = rows[0].len();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), ncols), flat)
        .map_err(|e| Error::Parse(format!("shape error: {e}")))
}

pub fn parse_vector(text: &str) -> Result<Array1<f64>> {
    let m = parse_matrix(text)?;
    let (r, c) = m.dim();
    if c == 1 {
        Ok(m.column(0).to_owned())
    } else if r == 1 {
        Ok(m.row(0).to_owned())
    } else {
        Err(Error::Parse(format!(
            "expected a vector, got a {r}x{c} matrix"
        )))
    }
}

pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn read_vector(path: &Path) -> Result<Array1<f64>> {
    parse_vector(&std::fs::read_to_string(path)?)
}

/// Shortest-roundtrip decimal formatting (Rust's default f64 display never
/// switches to scientific notation, keeping the files plain decimal).
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

pub fn matrix_to_csv(a: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in a.rows() {
        let line: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn vector_to_csv(v: &Array1<f64>) -> String {
    let mut out = String::new();
    for &x in v.iter() {
        out.push_str(&format_f64(x));
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, a: &Array2<f64>) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(matrix_to_csv(a).as_bytes())?;
    Ok(())
}

pub fn write_vector(path: &Path, v: &Array1<f64>) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(vector_to_csv(v).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_block_correlated_matrix, trial_rng};

    #[test]
    fn matrix_roundtrip_is_bit_exact() {
        let mut rng = trial_rng(100, 0);
        let a = generate_block_correlated_matrix(7, 5, 5, 0.6, &mut rng).unwrap();
        let text = matrix_to_csv(&a.entries);
        let back = parse_matrix(&text).unwrap();
        assert_eq!(back.dim(), (7, 5));
        for (x, y) in a.entries.iter().zip(back.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn vector_roundtrip_and_row_form() {
        let v = Array1::from_vec(vec![1.5, -2.25, 0.0, 1e-12]);
        let text = vector_to_csv(&v);
        let back = parse_vector(&text).unwrap();
        for (x, y) in v.iter().zip(back.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        let row = parse_vector("1.5, -2.25, 0.0\n").unwrap();
        assert_eq!(row.len(), 3);
    }

    #[test]
    fn parser_rejects_garbage() {
        assert!(parse_matrix("1.0,2.0\n3.0\n").is_err()); // ragged
        assert!(parse_matrix("a,b\n").is_err());
        assert!(parse_matrix("").is_err());
        assert!(parse_vector("1,2\n3,4\n").is_err()); // not a vector
    }

    #[test]
    fn parser_skips_comments_and_blanks() {
        let m = parse_matrix("# header\n\n1,2\n# mid\n3,4\n").unwrap();
        assert_eq!(m.dim(), (2, 2));
        assert_eq!(m[[1, 1]], 4.0);
    }

    #[test]
    fn formatting_stays_decimal() {
        assert_eq!(format_f64(0.1), "0.1");
        assert_eq!(format_f64(-3.0), "-3");
        assert_eq!(format_f64(f64::NAN), "nan");
        // tiny magnitudes stay decimal (no exponent marker)
        assert!(!format_f64(1e-8).contains('e'));
    }
}
