//! Reader and writer for the libsvm/svmlight text format.
//!
//! ```text
//! +1 1:0.5 3:1.0
//! -1 2:2.0
//! ```
//!
//! Each nonempty line is a label followed by `index:value` tokens with
//! 1-based, strictly increasing indices. The reader is strict: comments,
//! index 0, repeated or decreasing indices, and non-finite values are all
//! rejected with the offending line number. Indices are shifted to 0-based
//! on the way in and back to 1-based on the way out.
//!
//! Label mapping: if any label is `-1` the file is treated as sign-labelled
//! binary data (`-1 → 0`, `+1 → 1`); otherwise labels must be non-negative
//! integers, giving a binary dataset when all are in `{0, 1}` and a
//! multiclass dataset with `max + 1` classes otherwise.

use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};
use crate::vecmath::SparseVector;

use super::dataset::{Dataset, SparseExample};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_label(token: &str, line: usize) -> Result<i64> {
    let value: f64 = token
        .parse()
        .map_err(|_| parse_err(line, format!("label {token:?} is not a number")))?;
    if !value.is_finite() || value.fract() != 0.0 || value.abs() > i64::MAX as f64 / 2.0 {
        return Err(parse_err(line, format!("label {token:?} is not an integer")));
    }
    Ok(value as i64)
}

fn parse_line(text: &str, line: usize) -> Result<Option<(i64, SparseVector)>> {
    if text.contains('#') {
        return Err(parse_err(line, "comments are not supported"));
    }
    let mut tokens = text.split_ascii_whitespace();
    let Some(label_token) = tokens.next() else {
        return Ok(None);
    };
    let label = parse_label(label_token, line)?;

    let mut indices = Vec::new();
    let mut values = Vec::new();
    for token in tokens {
        let (idx, val) = token
            .split_once(':')
            .ok_or_else(|| parse_err(line, format!("feature {token:?} is missing ':'")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| parse_err(line, format!("bad feature index {idx:?}")))?;
        if idx == 0 {
            return Err(parse_err(line, "feature indices are 1-based; found 0"));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| parse_err(line, format!("bad feature value {val:?}")))?;
        if !val.is_finite() {
            return Err(parse_err(line, format!("non-finite feature value {val}")));
        }
        let zero_based = idx - 1;
        if let Some(&prev) = indices.last() {
            if zero_based <= prev {
                return Err(parse_err(
                    line,
                    format!("feature index {idx} does not increase (previous {})", prev + 1),
                ));
            }
        }
        indices.push(zero_based);
        values.push(val);
    }
    let features = SparseVector::new(indices, values).map_err(|e| parse_err(line, e.to_string()))?;
    Ok(Some((label, features)))
}

/// Parses a libsvm stream into a [`Dataset`].
///
/// `dim` is the largest index seen, or `expected_dim` when that is larger.
pub fn parse_libsvm<R: BufRead>(reader: R, expected_dim: Option<usize>) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut first_line = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let text = line?;
        if let Some(row) = parse_line(&text, line_no)? {
            first_line.push(line_no);
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no examples found"));
    }

    let max_dim = rows.iter().map(|(_, x)| x.min_dim()).max().unwrap_or(0);
    let dim = match expected_dim {
        Some(d) if d < max_dim => {
            return Err(parse_err(
                0,
                format!("feature index {max_dim} exceeds expected dimension {d}"),
            ))
        }
        Some(d) => d,
        None => max_dim,
    };

    let sign_labels = rows.iter().any(|(z, _)| *z == -1);
    let mut examples = Vec::with_capacity(rows.len());
    let mut max_label = 0usize;
    for ((raw, features), line) in rows.into_iter().zip(first_line) {
        let label = if sign_labels {
            match raw {
                -1 => 0,
                1 => 1,
                other => {
                    return Err(parse_err(
                        line,
                        format!("label {other} in a file with -1/+1 labels"),
                    ))
                }
            }
        } else if raw < 0 {
            return Err(parse_err(line, format!("negative class label {raw}")));
        } else {
            raw as usize
        };
        max_label = max_label.max(label);
        examples.push(SparseExample { features, label });
    }
    let num_classes = (max_label + 1).max(2);
    Dataset::new(examples, dim, num_classes)
}

pub fn parse_libsvm_str(text: &str, expected_dim: Option<usize>) -> Result<Dataset> {
    parse_libsvm(text.as_bytes(), expected_dim)
}

/// Writes `data` in libsvm format with integer labels and 1-based indices.
///
/// Values use Rust's shortest round-trip formatting, so parsing the output
/// reproduces every stored value bit for bit.
pub fn write_libsvm<W: Write>(data: &Dataset, mut out: W) -> io::Result<()> {
    for ex in data.examples() {
        write!(out, "{}", ex.label)?;
        for (i, v) in ex.features.iter() {
            write!(out, " {}:{:?}", i + 1, v)?;
        }
        writeln!(out)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_basic_file() {
        let d = parse_libsvm_str("1 1:0.5 3:1.0\n0 2:2.0", None).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.dim(), 3);
        assert!(d.is_binary());
        assert_eq!(d.example(0).label, 1);
        assert_eq!(d.example(1).label, 0);
        assert_eq!(d.example(0).features.indices(), &[0, 2]);
        assert_eq!(d.example(0).features.values(), &[0.5, 1.0]);
    }

    #[test]
    fn maps_sign_labels() {
        let d = parse_libsvm_str("+1 1:1\n-1 1:2", None).unwrap();
        let labels: Vec<_> = d.examples().iter().map(|e| e.label).collect();
        assert_eq!(labels, vec![1, 0]);
    }

    #[test]
    fn rejects_non_increasing_indices() {
        let err = parse_libsvm_str("1 3:1 2:1", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        assert!(parse_libsvm_str("1 2:1 2:1", None).is_err());
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_libsvm_str("1 1:1\n\n0 2:x\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn rejects_contract_violations() {
        for bad in [
            "1 0:1",
            "1 1:1 # trailing comment",
            "# header\n1 1:1",
            "1 1",
            "1 1:nan",
            "1 1:inf",
            "x 1:1",
            "1.5 1:1",
            "-1 1:1\n0 1:1",
            "-3 1:1",
            "1 -2:1",
            "",
            "\n  \n",
        ] {
            assert!(parse_libsvm_str(bad, None).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn expected_dim_pads_or_rejects() {
        assert_eq!(parse_libsvm_str("1 2:1", Some(10)).unwrap().dim(), 10);
        assert!(parse_libsvm_str("1 20:1", Some(10)).is_err());
    }

    #[test]
    fn multiclass_labels() {
        let d = parse_libsvm_str("0 1:1\n3 1:1\n2 2:1", None).unwrap();
        assert_eq!(d.num_classes(), 4);
        assert!(!d.is_binary());
    }

    #[test]
    fn empty_feature_lines_are_allowed() {
        let d = parse_libsvm_str("1\n0 1:1", None).unwrap();
        assert_eq!(d.example(0).features.nnz(), 0);
        assert!(parse_libsvm_str("1\n0\n", None).is_err());
    }

    fn line_strategy() -> impl Strategy<Value = (usize, Vec<(usize, f64)>)> {
        (
            0usize..2,
            prop::collection::btree_map(1usize..200, -1e6f64..1e6, 0..12),
        )
            .prop_map(|(z, m)| (z, m.into_iter().collect()))
    }

    proptest! {
        #[test]
        fn write_then_parse_round_trips(lines in prop::collection::vec(line_strategy(), 1..20)) {
            prop_assume!(lines.iter().any(|(_, f)| !f.is_empty()));
            let mut text = String::new();
            for (z, feats) in &lines {
                text.push_str(&z.to_string());
                for (i, v) in feats {
                    text.push_str(&format!(" {i}:{v:?}"));
                }
                text.push('\n');
            }
            let parsed = parse_libsvm_str(&text, None).unwrap();
            let mut out = Vec::new();
            write_libsvm(&parsed, &mut out).unwrap();
            let reparsed = parse_libsvm_str(std::str::from_utf8(&out).unwrap(), None).unwrap();
            prop_assert_eq!(&parsed, &reparsed);
            for (ex, (z, feats)) in parsed.examples().iter().zip(&lines) {
                prop_assert_eq!(ex.label, *z);
                let got: Vec<(usize, f64)> = ex.features.iter().map(|(i, v)| (i + 1, v)).collect();
                prop_assert_eq!(&got, feats);
            }
        }

        #[test]
        fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
            let _ = parse_libsvm_str(&text, None);
        }
    }
}
