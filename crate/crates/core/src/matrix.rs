//! Dense row-major matrices, binary support masks, and the CSV text format.
//!
//! Sparsity is tracked by explicit [`SupportMask`]s next to dense storage; the
//! matrices handled here are desk-scale (a few thousand rows at most).

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TessError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from a row-major buffer.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(TessError::ShapeMismatch {
                context: "Matrix::from_vec",
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(TessError::ShapeMismatch {
                    context: "Matrix::from_rows",
                    expected: format!("{cols} columns"),
                    found: format!("{} columns in row {i}", row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(TessError::ShapeMismatch {
                context: "matmul",
                expected: format!("{} rows on the right", self.cols),
                found: format!("{}", rhs.rows),
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(TessError::ShapeMismatch {
                context: "matvec",
                expected: format!("vector of length {}", self.cols),
                found: format!("{}", v.len()),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.shape() != rhs.shape() {
            return Err(TessError::ShapeMismatch {
                context: "sub",
                expected: format!("{}x{}", self.rows, self.cols),
                found: format!("{}x{}", rhs.rows, rhs.cols),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// Submatrix on the given row and column index lists, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Result<Matrix> {
        for &i in rows {
            if i >= self.rows {
                return Err(TessError::IndexOutOfBounds {
                    index: i,
                    bound: self.rows,
                });
            }
        }
        for &j in cols {
            if j >= self.cols {
                return Err(TessError::IndexOutOfBounds {
                    index: j,
                    bound: self.cols,
                });
            }
        }
        Ok(Matrix::from_fn(rows.len(), cols.len(), |a, b| {
            self[(rows[a], cols[b])]
        }))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|x| !x.is_finite())
            .map(|p| (p / self.cols, p % self.cols))
    }

    /// Mask of the entries that are exactly nonzero.
    pub fn nonzero_mask(&self) -> SupportMask {
        SupportMask {
            rows: self.rows,
            cols: self.cols,
            bits: self.data.iter().map(|&x| x != 0.0).collect(),
        }
    }

    pub fn max_abs_diff(&self, rhs: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Writes the CSV form: a `# rows cols` comment line, then one row per line.
    ///
    /// Values use Rust's shortest round-trip formatting, so reading the output
    /// back reproduces every entry bit for bit.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = format!("# {} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    buf.push(',');
                }
                let _ = write!(buf, "{v}");
            }
            buf.push('\n');
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("CSV output is ASCII")
    }

    /// Parses the CSV matrix format. The `# rows cols` line is optional; when
    /// present the body must agree with it.
    pub fn read_csv<R: Read>(mut input: R) -> Result<Matrix> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<Matrix> {
        let mut declared = None;
        let mut body_offset = 0;
        let mut line_offset = 0;
        if let Some(first) = text.lines().next() {
            if let Some(rest) = first.trim_start().strip_prefix('#') {
                declared = Some(parse_dims(rest)?);
                body_offset = first.len() + 1;
                line_offset = 1;
            }
        }
        let body = text.get(body_offset.min(text.len())..).unwrap_or("");

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(body.as_bytes());

        let mut rows: Vec<Vec<f64>> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| TessError::Parse {
                line: e.position().map_or(0, |p| p.line() as usize + line_offset),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize) + line_offset;
            if record.iter().all(str::is_empty) {
                continue;
            }
            let row = record
                .iter()
                .map(|field| {
                    field.parse::<f64>().map_err(|_| TessError::Parse {
                        line,
                        message: format!("not a number: {field:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(TessError::Parse {
                        line,
                        message: format!("expected {} values, found {}", first.len(), row.len()),
                    });
                }
            }
            rows.push(row);
        }

        let matrix = Matrix::from_rows(&rows)?;
        if let Some((r, c)) = declared {
            if matrix.rows != r || (r > 0 && matrix.cols != c) {
                return Err(TessError::Parse {
                    line: 1,
                    message: format!(
                        "header declares {r}x{c} but body is {}x{}",
                        matrix.rows, matrix.cols
                    ),
                });
            }
            if r == 0 {
                return Ok(Matrix::zeros(0, c));
            }
        }
        Ok(matrix)
    }
}

fn parse_dims(rest: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = rest.split_whitespace().collect();
    let bad = || TessError::Parse {
        line: 1,
        message: format!("malformed dimension comment: #{rest}"),
    };
    if parts.len() != 2 {
        return Err(bad());
    }
    let r = parts[0].parse().map_err(|_| bad())?;
    let c = parts[1].parse().map_err(|_| bad())?;
    Ok((r, c))
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Binary matrix marking the positions allowed to hold nonzero values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl SupportMask {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            bits: vec![false; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.bits[i * self.cols + j] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Row indices set in column `j`.
    pub fn column_support(&self, j: usize) -> Vec<usize> {
        (0..self.rows).filter(|&i| self.get(i, j)).collect()
    }

    /// Column indices set in row `i`.
    pub fn row_support(&self, i: usize) -> Vec<usize> {
        (0..self.cols).filter(|&j| self.get(i, j)).collect()
    }

    pub fn union(&self, other: &SupportMask) -> SupportMask {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        SupportMask {
            rows: self.rows,
            cols: self.cols,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| *a || *b)
                .collect(),
        }
    }

    /// True when every `true` bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &SupportMask) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }
}
