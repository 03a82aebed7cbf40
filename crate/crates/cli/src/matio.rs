//! Plain-text complex matrix files: one row per line, entries like
//! `0.6+0.8i` separated by whitespace. Chosen for diff-ability and hand
//! editing.

use beamquant_core::num_complex::Complex64;
use beamquant_core::{ComplexMatrix, Error};

/// Parses one `a`, `bi`, or `a+bi` token.
pub fn parse_entry(token: &str) -> Result<Complex64, Error> {
    let t = token.trim();
    if t.is_empty() {
        return Err(Error::Validation("empty matrix entry".into()));
    }
    if let Some(body) = t.strip_suffix(['i', 'j']) {
        // Split real and imaginary at the last +/- that is not a leading
        // sign or an exponent sign.
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            let c = bytes[i] as char;
            if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
                split = Some(i);
                break;
            }
        }
        let (re_str, im_str) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let re: f64 = parse_float(re_str, token)?;
        let im: f64 = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            s => parse_float(s, token)?,
        };
        Ok(Complex64::new(re, im))
    } else {
        Ok(Complex64::new(parse_float(t, token)?, 0.0))
    }
}

fn parse_float(s: &str, token: &str) -> Result<f64, Error> {
    s.parse::<f64>()
        .map_err(|_| Error::Validation(format!("bad complex entry {token:?}")))
}

/// Parses a whole matrix from text.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, Error> {
    let rows: Vec<Vec<Complex64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| line.split_whitespace().map(parse_entry).collect())
        .collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err(Error::Validation("no matrix rows found".into()));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Validation("ragged matrix rows".into()));
    }
    ComplexMatrix::new(rows.len(), cols, rows.into_iter().flatten().collect())
}

/// Formats one entry in the canonical `a+bi` form (shortest roundtrip
/// float text).
pub fn format_entry(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// Formats a matrix, one row per line.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| format_entry(m.get(i, j)))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_entry("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(parse_entry("-2").unwrap(), Complex64::new(-2.0, 0.0));
        assert_eq!(parse_entry("0.6+0.8i").unwrap(), Complex64::new(0.6, 0.8));
        assert_eq!(parse_entry("0.6-0.8i").unwrap(), Complex64::new(0.6, -0.8));
        assert_eq!(parse_entry("0.8i").unwrap(), Complex64::new(0.0, 0.8));
        assert_eq!(parse_entry("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(
            parse_entry("1e-3+2e-4i").unwrap(),
            Complex64::new(1e-3, 2e-4)
        );
        assert!(parse_entry("garbage").is_err());
        assert!(parse_entry("").is_err());
    }

    #[test]
    fn matrix_roundtrip() {
        let text = "0.6+0.8i 0i\n-0.5-0.5i 1\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 2);
        let back = parse_matrix(&format_matrix(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_ragged_and_empty() {
        assert!(parse_matrix("1 2\n3\n").is_err());
        assert!(parse_matrix("\n# comment only\n").is_err());
    }
}
