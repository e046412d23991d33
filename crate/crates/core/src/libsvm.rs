//! LIBSVM / svmlight text format: `label idx:val idx:val ...` with 1-based,
//! strictly increasing feature indices.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, Dataset};

/// Reads a LIBSVM file. `n_cols` is the largest index seen, or `expect_dim`
/// when that is larger. Explicit zeros are dropped.
pub fn load_libsvm(path: impl AsRef<Path>, expect_dim: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_libsvm(BufReader::new(file), expect_dim, name).map_err(|e| match e {
        Error::Io { source, .. } => io_err(source),
        other => other,
    })
}

pub fn read_libsvm<R: BufRead>(reader: R, expect_dim: Option<usize>, name: impl Into<String>) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut row_offsets = vec![0usize];
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    let mut max_index = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|source| Error::Io {
            path: Default::default(),
            source,
        })?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_ascii_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a token");
        let label: f64 = label_tok.parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("invalid label `{label_tok}`"),
        })?;
        labels.push(label);

        let mut previous: Option<usize> = None;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("expected `index:value`, found `{tok}`"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid feature index in `{tok}`"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line: lineno,
                    message: "feature indices are 1-based; found 0".into(),
                });
            }
            let val: f64 = val.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid feature value in `{tok}`"),
            })?;
            if !val.is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("non-finite feature value in `{tok}`"),
                });
            }
            if let Some(prev) = previous {
                if idx <= prev {
                    return Err(Error::NonIncreasingIndex {
                        line: lineno,
                        previous: prev,
                        current: idx,
                    });
                }
            }
            previous = Some(idx);
            max_index = max_index.max(idx);
            if val != 0.0 {
                col_indices.push(idx - 1);
                values.push(val);
            }
        }
        row_offsets.push(values.len());
    }

    if labels.is_empty() {
        return Err(Error::NoRows);
    }
    let n_cols = match expect_dim {
        Some(d) if d < max_index => return Err(Error::DimensionTooSmall { expected: d, max_index }),
        Some(d) => d,
        None => max_index,
    };
    let features = CsrMatrix::from_parts(labels.len(), n_cols, row_offsets, col_indices, values)?;
    Dataset::new(features, labels, name)
}

/// Writes `data` in LIBSVM format using shortest round-trip float formatting.
pub fn write_libsvm<W: Write>(data: &Dataset, mut out: W) -> std::io::Result<()> {
    let m = data.features();
    for (i, &label) in data.labels().iter().enumerate() {
        write!(out, "{label}")?;
        for (j, v) in m.row(i).iter() {
            write!(out, " {}:{v}", j + 1)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
