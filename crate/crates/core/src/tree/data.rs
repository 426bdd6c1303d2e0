use crate::error::{Error, Result};

/// Numeric covariates (stored by column) and integer responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    y: Vec<i64>,
}

impl Dataset {
    pub fn new(columns: Vec<Vec<f64>>, y: Vec<i64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Config("dataset has no observations".into()));
        }
        if columns.is_empty() {
            return Err(Error::Config("dataset has no covariates".into()));
        }
        if let Some(c) = columns.iter().position(|c| c.len() != y.len()) {
            return Err(Error::Validation(format!(
                "covariate {c} has {} rows, response has {}",
                columns[c].len(),
                y.len()
            )));
        }
        if columns.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Validation("non-finite covariate value".into()));
        }
        Ok(Self { columns, y })
    }

    /// Builds from row-major covariates.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<i64>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Validation("ragged covariate rows".into()));
        }
        let columns = (0..p)
            .map(|v| rows.iter().map(|r| r[v]).collect())
            .collect();
        Self::new(columns, y)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn x(&self, i: usize, v: usize) -> f64 {
        self.columns[v][i]
    }

    pub fn column(&self, v: usize) -> &[f64] {
        &self.columns[v]
    }

    pub fn y(&self) -> &[i64] {
        &self.y
    }
}
