//! File formats: the matrix JSON schema and the CSV state dump.
//!
//! Matrix JSON is `{"n": int, "re": [[..]], "im": [[..]]}`, row-major.
//!
//! A state dump is CSV: a header row `n,count,seed`, one row with those
//! values, a column row `re_0,im_0,...,re_{n-1},im_{n-1}`, then one row of
//! `2n` reals per state. Floats are written in shortest round-trip
//! exponent form, so reading a dump back reproduces every bit.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{Complex64, ComplexMatrix, HermitianMatrix};
use crate::sampler::PureState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            n: m.dim(),
            re: m.real_parts(),
            im: m.imag_parts(),
        }
    }

    pub fn from_hermitian(m: &HermitianMatrix) -> Self {
        Self::from_matrix(m.as_complex())
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.n == 0 {
            return Err(invalid("field `n`: must be at least 1"));
        }
        for (name, rows) in [("re", &self.re), ("im", &self.im)] {
            if rows.len() != self.n {
                return Err(invalid(&format!(
                    "field `{name}`: expected {} rows, got {}",
                    self.n,
                    rows.len()
                )));
            }
            for (i, row) in rows.iter().enumerate() {
                if row.len() != self.n {
                    return Err(invalid(&format!(
                        "field `{name}` row {i}: expected {} entries, got {}",
                        self.n,
                        row.len()
                    )));
                }
                if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                    return Err(invalid(&format!("field `{name}` row {i} column {j}: not finite")));
                }
            }
        }
        ComplexMatrix::from_parts(&self.re, &self.im)
    }
}

fn invalid(msg: &str) -> Error {
    Error::InvalidArgument(format!("matrix JSON: {msg}"))
}

pub fn parse_matrix_json(text: &str) -> Result<ComplexMatrix> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let parsed: MatrixJson = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            invalid(&e.inner().to_string())
        } else {
            invalid(&format!("field `{path}`: {}", e.inner()))
        }
    })?;
    parsed.to_matrix()
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateDump {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub states: Vec<PureState>,
}

pub fn write_state_dump<W: Write>(mut w: W, seed: u64, states: &[PureState]) -> std::io::Result<()> {
    let n = states.first().map_or(0, PureState::dim);
    writeln!(w, "n,count,seed")?;
    writeln!(w, "{n},{},{seed}", states.len())?;
    let columns: Vec<String> = (0..n).map(|k| format!("re_{k},im_{k}")).collect();
    writeln!(w, "{}", columns.join(","))?;
    let mut line = String::new();
    for state in states {
        line.clear();
        for (k, a) in state.amplitudes().iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:e},{:e}", a.re, a.im));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_state_dump<R: BufRead>(r: R) -> Result<StateDump> {
    let bad = |msg: String| Error::InvalidArgument(format!("state dump: {msg}"));
    let mut lines = r.lines();
    let mut next = |what: &str| -> Result<String> {
        lines
            .next()
            .ok_or_else(|| bad(format!("missing {what}")))?
            .map_err(|e| bad(e.to_string()))
    };
    if next("header")?.trim() != "n,count,seed" {
        return Err(bad("expected header `n,count,seed`".into()));
    }
    let meta = next("header values")?;
    let fields: Vec<&str> = meta.trim().split(',').collect();
    if fields.len() != 3 {
        return Err(bad(format!("expected 3 header values, got {}", fields.len())));
    }
    let n: usize = fields[0].parse().map_err(|_| bad(format!("bad n `{}`", fields[0])))?;
    let count: usize = fields[1]
        .parse()
        .map_err(|_| bad(format!("bad count `{}`", fields[1])))?;
    let seed: u64 = fields[2]
        .parse()
        .map_err(|_| bad(format!("bad seed `{}`", fields[2])))?;
    next("column names")?;

    let mut states = Vec::with_capacity(count);
    for idx in 0..count {
        let row = next(&format!("row {idx}"))?;
        let values: Vec<f64> = row
            .trim()
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| bad(format!("row {idx}: bad number `{v}`")))
            })
            .collect::<Result<_>>()?;
        if values.len() != 2 * n {
            return Err(bad(format!(
                "row {idx}: expected {} values, got {}",
                2 * n,
                values.len()
            )));
        }
        let amplitudes = values.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        states.push(PureState::new(amplitudes)?);
    }
    Ok(StateDump { n, count, seed, states })
}
