//! Plain-text complex matrix format.
//!
//! ```text
//! 2 2
//! 1.0000000000000000e0+0.0000000000000000e0j 0.0000000000000000e0+0.0000000000000000e0j
//! 0.0000000000000000e0+0.0000000000000000e0j 1.0000000000000000e0-2.5000000000000000e-1j
//! ```
//!
//! The header holds the row and column counts; each following line holds one
//! row of whitespace-separated `re±imj` entries with 17 significant digits,
//! which round-trips every finite `f64` exactly.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{}{:.16e}j", z.re, sign, z.im.abs())
}

pub fn parse_complex(token: &str) -> Option<Complex64> {
    let body = token.strip_suffix(['j', 'J'])?;
    // the imaginary sign is the last '+'/'-' that is neither leading nor an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&i| {
        (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E')
    })?;
    let re: f64 = body[..split].parse().ok()?;
    let im: f64 = body[split..].parse().ok()?;
    Some(Complex64::new(re, im))
}

pub fn write_matrix(m: &CMatrix) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|z| format_complex(*z)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn read_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: hline + 1,
            message: format!("bad header: {e}"),
        })?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse {
            line: hline + 1,
            message: "header must be `N_r N_t`".into(),
        });
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0;
    for (idx, line) in lines {
        if seen_rows == rows {
            return Err(Error::Parse {
                line: idx + 1,
                message: "more rows than declared".into(),
            });
        }
        let row: Vec<Complex64> = line
            .split_whitespace()
            .map(|t| {
                parse_complex(t).ok_or_else(|| Error::Parse {
                    line: idx + 1,
                    message: format!("bad complex entry `{t}`"),
                })
            })
            .collect::<Result<_>>()?;
        if row.len() != cols {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {cols} entries, found {}", row.len()),
            });
        }
        data.extend(row);
        seen_rows += 1;
    }
    if seen_rows != rows {
        return Err(Error::Parse {
            line: hline + 1,
            message: format!("declared {rows} rows, found {seen_rows}"),
        });
    }
    Ok(CMatrix::from_row_slice(rows, cols, &data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_python_style_entries() {
        assert_eq!(parse_complex("1+2j"), Some(Complex64::new(1.0, 2.0)));
        assert_eq!(parse_complex("-1.5e-3-2E+2j"), Some(Complex64::new(-1.5e-3, -200.0)));
        assert_eq!(parse_complex("1.0"), None);
        assert_eq!(parse_complex("abc+1j"), None);
    }

    #[test]
    fn rejects_shape_errors() {
        assert!(read_matrix("2 2\n1+0j 0+0j\n").is_err());
        assert!(read_matrix("1 2\n1+0j\n").is_err());
        assert!(read_matrix("1 1\n1+0j\n2+0j\n").is_err());
        assert!(read_matrix("").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(
            rows in 1usize..5,
            cols in 1usize..5,
            vals in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 50),
        ) {
            let m = CMatrix::from_fn(rows, cols, |i, j| {
                let k = 2 * (i * cols + j);
                Complex64::new(vals[k], vals[k + 1])
            });
            let back = read_matrix(&write_matrix(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
