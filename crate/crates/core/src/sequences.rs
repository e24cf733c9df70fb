//! Dense finite sequences with an implicit zero tail.
//!
//! A [`SeqVec`] stores the first `dim` entries of a real sequence; every
//! entry beyond `dim` is zero. All public indexing is 1-based to match the
//! usual sequence-space conventions, and mixed-dimension arithmetic
//! zero-extends the shorter operand.

use crate::error::{Error, Result};

/// A finitely supported real sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqVec {
    values: Vec<f64>,
}

impl SeqVec {
    /// Wraps the given entries, rejecting non-finite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite entry {v} at position {}",
                    i + 1
                )));
            }
        }
        Ok(Self { values })
    }

    /// Internal constructor for entries already known to be finite.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// The zero sequence stored with `dim` explicit entries.
    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim],
        }
    }

    /// The canonical basis sequence with a one at position `k` (1-based).
    pub fn unit(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "basis index must be at least 1".into(),
            ));
        }
        let mut values = vec![0.0; k];
        values[k - 1] = 1.0;
        Ok(Self { values })
    }

    /// Number of explicitly stored entries.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Entry at 1-based position `k`; zero beyond the stored range.
    pub fn get(&self, k: usize) -> f64 {
        if k == 0 || k > self.values.len() {
            0.0
        } else {
            self.values[k - 1]
        }
    }

    /// The stored entries.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(‖x‖₁, ‖x‖₂, ‖x‖_∞)` in one pass.
    pub fn norms(&self) -> (f64, f64, f64) {
        let mut l1 = 0.0;
        let mut sq = 0.0;
        let mut sup = 0.0f64;
        for &v in &self.values {
            let a = v.abs();
            l1 += a;
            sq += v * v;
            sup = sup.max(a);
        }
        (l1, sq.sqrt(), sup)
    }

    pub fn norm_l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `Σ_{k>n} |x_k|`, accumulated from the smallest stored entries up.
    pub fn tail_l1(&self, n: usize) -> f64 {
        if n >= self.values.len() {
            return 0.0;
        }
        self.values[n..].iter().rev().map(|v| v.abs()).sum()
    }

    /// Splits into the projection onto the first `n` coordinates and the
    /// complementary tail. The head stores at most `n` entries; the tail
    /// keeps the original length with its first `n` entries zeroed, so
    /// `head + tail` reconstructs `self` exactly.
    pub fn head_tail_split(&self, n: usize) -> (SeqVec, SeqVec) {
        let cut = n.min(self.values.len());
        let head = Self::from_raw(self.values[..cut].to_vec());
        let mut tail = self.values.clone();
        for v in tail.iter_mut().take(cut) {
            *v = 0.0;
        }
        (head, Self::from_raw(tail))
    }

    /// The bilinear pairing `Σ_k x_k f_k` over the common support.
    pub fn duality_pair(&self, f: &SeqVec) -> f64 {
        self.values
            .iter()
            .zip(f.values.iter())
            .map(|(x, f)| x * f)
            .sum()
    }

    /// Entrywise sum with zero extension.
    pub fn add(&self, other: &SeqVec) -> SeqVec {
        let dim = self.dim().max(other.dim());
        let values = (1..=dim).map(|k| self.get(k) + other.get(k)).collect();
        Self::from_raw(values)
    }

    /// Entrywise difference with zero extension.
    pub fn sub(&self, other: &SeqVec) -> SeqVec {
        let dim = self.dim().max(other.dim());
        let values = (1..=dim).map(|k| self.get(k) - other.get(k)).collect();
        Self::from_raw(values)
    }

    /// Entrywise scaling.
    pub fn scale(&self, a: f64) -> SeqVec {
        Self::from_raw(self.values.iter().map(|v| a * v).collect())
    }

    /// Renders the sequence as CSV rows `index,value` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{v}\n", i + 1));
        }
        out
    }

    /// Parses either CSV rows `index,value` (optional header, 1-based
    /// indices, missing indices zero-filled) or a whitespace-separated list
    /// of entries.
    pub fn parse(text: &str) -> Result<Self> {
        let body = text.trim();
        if body.is_empty() {
            return Ok(Self::zeros(0));
        }
        if body.contains(',') {
            let mut pairs: Vec<(usize, f64)> = Vec::new();
            for (lineno, line) in body.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let mut fields = line.splitn(2, ',');
                let idx_field = fields.next().unwrap().trim();
                let val_field = fields.next().unwrap_or("").trim();
                if lineno == 0 && idx_field.parse::<usize>().is_err() {
                    continue; // header row
                }
                let idx: usize = idx_field.parse().map_err(|_| {
                    Error::InvalidInput(format!("bad index {idx_field:?} on line {}", lineno + 1))
                })?;
                let val: f64 = val_field.parse().map_err(|_| {
                    Error::InvalidInput(format!("bad value {val_field:?} on line {}", lineno + 1))
                })?;
                if idx == 0 {
                    return Err(Error::InvalidInput(
                        "sequence indices are 1-based; found index 0".into(),
                    ));
                }
                pairs.push((idx, val));
            }
            let dim = pairs.iter().map(|(i, _)| *i).max().unwrap_or(0);
            let mut values = vec![0.0; dim];
            for (i, v) in pairs {
                values[i - 1] = v;
            }
            Self::new(values)
        } else {
            let values = body
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("bad value {tok:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            Self::new(values)
        }
    }
}
