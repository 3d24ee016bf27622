use crate::error::{FmanError, Result};

/// A single coordinate system of dimension `2n + s` with a box-shaped
/// sampling domain. Points are plain coordinate tuples in chart order.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    n: usize,
    s: usize,
    coords: Vec<String>,
    domain: Vec<(f64, f64)>,
}

impl Chart {
    pub fn new(n: usize, s: usize, coords: &[&str], domain: &[(f64, f64)]) -> Result<Chart> {
        if n < 1 || s < 1 {
            return Err(FmanError::Shape(format!(
                "chart requires n >= 1 and s >= 1, got n={n}, s={s}"
            )));
        }
        Self::build(n, s, coords, domain)
    }

    /// Chart of a 2n-dimensional almost Hermitian fiber (no structure
    /// directions). Only used for warped-product fibers.
    pub fn hermitian(n: usize, coords: &[&str], domain: &[(f64, f64)]) -> Result<Chart> {
        if n < 1 {
            return Err(FmanError::Shape("fiber chart requires n >= 1".into()));
        }
        Self::build(n, 0, coords, domain)
    }

    fn build(n: usize, s: usize, coords: &[&str], domain: &[(f64, f64)]) -> Result<Chart> {
        let m = 2 * n + s;
        if coords.len() != m {
            return Err(FmanError::Shape(format!(
                "expected {m} coordinate names (2*{n}+{s}), got {}",
                coords.len()
            )));
        }
        if domain.len() != m {
            return Err(FmanError::Shape(format!(
                "expected {m} domain intervals, got {}",
                domain.len()
            )));
        }
        for (i, name) in coords.iter().enumerate() {
            if coords[..i].contains(name) {
                return Err(FmanError::Shape(format!(
                    "duplicate coordinate name `{name}`"
                )));
            }
        }
        for (name, (lo, hi)) in coords.iter().zip(domain) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(FmanError::Shape(format!(
                    "invalid domain interval [{lo}, {hi}] for `{name}`"
                )));
            }
        }
        Ok(Chart {
            n,
            s,
            coords: coords.iter().map(|c| c.to_string()).collect(),
            domain: domain.to_vec(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn dim(&self) -> usize {
        2 * self.n + self.s
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coords
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(&self.domain)
                .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    pub fn center(&self) -> Vec<f64> {
        self.domain.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }
}
