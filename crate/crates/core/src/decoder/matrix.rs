use serde_json::{json, Value};

use super::Scalar;
use crate::error::{Error, Result};

/// Row-sparse matrix; absent entries are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Vec::new(); rows],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Matrix::zeros(d, d);
        for i in 0..d {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        match self.data[i].binary_search_by_key(&j, |(c, _)| *c) {
            Ok(k) => self.data[i][k].1.clone(),
            Err(_) => S::zero(),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        assert!(i < self.rows && j < self.cols, "entry ({i},{j}) outside {}x{}", self.rows, self.cols);
        let row = &mut self.data[i];
        match row.binary_search_by_key(&j, |(c, _)| *c) {
            Ok(k) if v.is_zero() => {
                row.remove(k);
            }
            Ok(k) => row[k].1 = v,
            Err(_) if v.is_zero() => {}
            Err(k) => row.insert(k, (j, v)),
        }
    }

    /// `self[i][j] += v`
    pub fn add_to(&mut self, i: usize, j: usize, v: S) {
        let cur = self.get(i, j);
        self.set(i, j, cur.add(&v));
    }

    /// Non-zero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(j, v)| (i, *j, v)))
    }

    pub fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.cols {
            return Err(Error::invalid(format!(
                "vector of length {} against a {}x{} matrix",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(self
            .data
            .iter()
            .map(|row| {
                let mut acc = S::zero();
                for (j, v) in row {
                    S::mul_add_to(&mut acc, v, &x[*j]);
                }
                acc
            })
            .collect())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|row| row.iter().map(|(j, v)| (*j, f(v))).collect())
                .collect(),
        }
    }

    /// `{"rows": r, "cols": c, "entries": [[i, j, v], …]}`, row-major.
    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self.entries().map(|(i, j, v)| json!([i, j, v.to_json()])).collect();
        json!({"rows": self.rows, "cols": self.cols, "entries": entries})
    }

    /// Accepts the sparse form or a dense row-major `"data"` list.
    pub fn from_json(v: &Value) -> Result<Self> {
        let dim = |key: &str| -> Result<usize> {
            v.get(key)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::Parse(format!("matrix needs an integer {key:?}")))
        };
        let (rows, cols) = (dim("rows")?, dim("cols")?);
        let mut m = Matrix::zeros(rows, cols);
        if let Some(entries) = v.get("entries").and_then(Value::as_array) {
            for e in entries {
                let triple = e.as_array().filter(|a| a.len() == 3);
                let (i, j, x) = match triple {
                    Some(a) => (a[0].as_u64(), a[1].as_u64(), &a[2]),
                    None => return Err(Error::Parse(format!("bad matrix entry {e}"))),
                };
                let (i, j) = match (i, j) {
                    (Some(i), Some(j)) if (i as usize) < rows && (j as usize) < cols => (i as usize, j as usize),
                    _ => return Err(Error::Parse(format!("matrix entry {e} out of range"))),
                };
                m.set(i, j, S::from_json(x)?);
            }
        } else if let Some(data) = v.get("data").and_then(Value::as_array) {
            if data.len() != rows * cols {
                return Err(Error::Parse(format!("dense matrix needs {} values", rows * cols)));
            }
            for (k, x) in data.iter().enumerate() {
                m.set(k / cols.max(1), k % cols.max(1), S::from_json(x)?);
            }
        } else {
            return Err(Error::Parse("matrix needs \"entries\" or \"data\"".into()));
        }
        Ok(m)
    }
}
