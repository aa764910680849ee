//! Plain-text format for sparse functions.
//!
//! One data line per support point: `x1<TAB>...<TAB>xd<TAB>value`. Lines
//! starting with `#` and blank lines are ignored. The dimension is taken from
//! the first data line.

use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, SparseFunction};

pub fn parse_sparse_function(text: &str) -> Result<SparseFunction> {
    read_sparse_function(text.as_bytes())
}

pub fn read_sparse_function<R: BufRead>(reader: R) -> Result<SparseFunction> {
    let mut u: Option<SparseFunction> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(err("expected at least one coordinate and a value".into()));
        }
        let (coord_fields, value_field) = fields.split_at(fields.len() - 1);
        let coords = coord_fields
            .iter()
            .map(|f| {
                f.parse::<i64>()
                    .map_err(|_| err(format!("bad coordinate {f:?}")))
            })
            .collect::<Result<Vec<i64>>>()?;
        let value: f64 = value_field[0]
            .parse()
            .map_err(|_| err(format!("bad value {:?}", value_field[0])))?;
        if !(value.is_finite() && value > 0.0) {
            return Err(err(format!("value must be positive, got {value}")));
        }
        let f = u.get_or_insert(SparseFunction::zero(coords.len())?);
        if coords.len() != f.dim() {
            return Err(err(format!(
                "expected {} coordinates, found {}",
                f.dim(),
                coords.len()
            )));
        }
        let x = LatticePoint::from(coords);
        if f.contains(&x) {
            return Err(err(format!("duplicate point {x}")));
        }
        f.set(x, value)?;
    }
    u.ok_or_else(|| Error::Parse {
        line: 0,
        message: "no data lines; dimension unknown".into(),
    })
}

pub fn load_sparse_function(path: &Path) -> Result<SparseFunction> {
    let file = std::fs::File::open(path)?;
    read_sparse_function(std::io::BufReader::new(file))
}

/// Serializes in lexicographic point order. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn format_sparse_function(u: &SparseFunction) -> String {
    let mut out = String::new();
    for (x, v) in u.iter() {
        for c in x.coords() {
            write!(out, "{c}\t").unwrap();
        }
        writeln!(out, "{v}").unwrap();
    }
    out
}

pub fn save_sparse_function(u: &SparseFunction, path: &Path) -> Result<()> {
    std::fs::write(path, format_sparse_function(u))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_line() {
        let u = parse_sparse_function("0\t0\t1.5\n").unwrap();
        assert_eq!(u.dim(), 2);
        assert_eq!(u.get(&LatticePoint::new(&[0, 0])), 1.5);
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let u = parse_sparse_function("# header\n\n1\t2\n-3\t0.25\n").unwrap();
        assert_eq!(u.dim(), 1);
        assert_eq!(u.len(), 2);
    }

    #[test]
    fn duplicate_point_reports_line() {
        let e = parse_sparse_function("0\t0\t1\n# c\n0\t0\t2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
    }

    #[test]
    fn rejects_bad_lines() {
        for text in [
            "0\t0\t0\n",
            "0\t0\t-1\n",
            "0\tx\t1\n",
            "1\n",
            "0\t0\t1\n0\t1\n",
            "",
            "0\t0\tnan\n",
        ] {
            assert!(parse_sparse_function(text).is_err(), "{text:?}");
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let u = SparseFunction::from_entries(
            3,
            [
                (LatticePoint::new(&[0, -1, 4]), 0.1 + 0.2),
                (LatticePoint::new(&[2, 2, 2]), 1e-300),
                (LatticePoint::new(&[-9, 0, 0]), 12345.678901234567),
            ],
        )
        .unwrap();
        assert_eq!(
            parse_sparse_function(&format_sparse_function(&u)).unwrap(),
            u
        );
    }
}
