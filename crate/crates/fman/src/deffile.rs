//! Manifold definition files: a TOML schema with expression strings for
//! every tensor component. The same schema serves metric f-manifolds
//! (s >= 1) and almost Hermitian warp fibers (s = 0, no xi/eta blocks).
//!
//! ```toml
//! n = 1
//! s = 1
//! coords = ["t", "u1", "u2"]
//! domain = [[-0.7, 0.7], [-1.0, 1.0], [-1.0, 1.0]]
//! g = [["1", "0", "0"], ["0", "exp(2*t)", "0"], ["0", "0", "exp(2*t)"]]
//! f = [["0", "0", "0"], ["0", "0", "-1"], ["0", "1", "0"]]
//! xi = [["1", "0", "0"]]
//! eta = [["1", "0", "0"]]
//!
//! [functions]        # optional declared characteristic functions
//! alpha = ["0"]
//! beta = ["1"]
//! ```
//!
//! Rows of `f` carry the upper index: `f[k][j]` is the k-th component of the
//! image of the j-th coordinate field.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::chart::Chart;
use crate::constructions::AlmostHermitian;
use crate::error::{FmanError, Result};
use crate::expr::{parse_expr, ScalarExpr};
use crate::fields::{MetricField, OneFormC, Tensor11Field, VectorFieldC};
use crate::manifold::MetricFManifold;
use crate::sample::sample_points;
use crate::trans_s::CfExprs;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionsBlock {
    pub alpha: Vec<String>,
    pub beta: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifoldDefinitionFile {
    pub n: usize,
    pub s: usize,
    pub coords: Vec<String>,
    pub domain: Vec<(f64, f64)>,
    pub g: Vec<Vec<String>>,
    pub f: Vec<Vec<String>>,
    #[serde(default)]
    pub xi: Vec<Vec<String>>,
    #[serde(default)]
    pub eta: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functions: Option<FunctionsBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// What a definition file denotes, depending on its `s`.
#[derive(Debug)]
pub enum LoadedDefinition {
    Manifold(MetricFManifold),
    Fiber(AlmostHermitian),
}

fn parse_matrix(
    rows: &[Vec<String>],
    m: usize,
    chart: &Chart,
    what: &str,
) -> Result<Vec<ScalarExpr>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(FmanError::Input(format!(
            "{what} must be a {m}x{m} matrix of expressions"
        )));
    }
    let mut out = Vec::with_capacity(m * m);
    for row in rows {
        for text in row {
            out.push(parse_expr(text, chart)?);
        }
    }
    Ok(out)
}

fn parse_rows(
    rows: &[Vec<String>],
    count: usize,
    m: usize,
    chart: &Chart,
    what: &str,
) -> Result<Vec<Vec<ScalarExpr>>> {
    if rows.len() != count || rows.iter().any(|r| r.len() != m) {
        return Err(FmanError::Input(format!(
            "{what} must hold {count} rows of {m} expressions"
        )));
    }
    rows.iter()
        .map(|row| row.iter().map(|t| parse_expr(t, chart)).collect())
        .collect()
}

impl ManifoldDefinitionFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| FmanError::Toml(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("definition serialization cannot fail")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }

    /// Validates shapes and expressions and builds the in-memory structure.
    /// Metric symmetry is probed at a few interior points here (bad input),
    /// while positive-definiteness is left to the verification checks.
    pub fn build(&self) -> Result<LoadedDefinition> {
        let m = 2 * self.n + self.s;
        let coord_refs: Vec<&str> = self.coords.iter().map(|c| c.as_str()).collect();
        let chart = if self.s == 0 {
            Chart::hermitian(self.n, &coord_refs, &self.domain)?
        } else {
            Chart::new(self.n, self.s, &coord_refs, &self.domain)?
        };
        let g = MetricField::new(m, parse_matrix(&self.g, m, &chart, "g")?)?;
        let f = Tensor11Field::new(m, parse_matrix(&self.f, m, &chart, "f")?)?;

        // Symmetry probe on a few interior points.
        let probe = sample_points(&chart, 4, 0);
        for p in probe.iter().take(4) {
            let mat = g.eval(p).map_err(|e| {
                FmanError::Input(format!("metric cannot be evaluated on its domain: {e}"))
            })?;
            for i in 0..m {
                for j in (i + 1)..m {
                    if (mat[(i, j)] - mat[(j, i)]).abs() > 1e-9 * (1.0 + mat.amax()) {
                        return Err(FmanError::Input(format!(
                            "metric expressions are not symmetric: g[{i}][{j}] != g[{j}][{i}]"
                        )));
                    }
                }
            }
        }

        if self.s == 0 {
            if !self.xi.is_empty() || !self.eta.is_empty() {
                return Err(FmanError::Input(
                    "a fiber definition (s = 0) must not declare xi or eta".into(),
                ));
            }
            return Ok(LoadedDefinition::Fiber(AlmostHermitian::new(chart, f, g)?));
        }

        let xi_rows = parse_rows(&self.xi, self.s, m, &chart, "xi")?;
        let eta_rows = parse_rows(&self.eta, self.s, m, &chart, "eta")?;
        let xi = xi_rows
            .into_iter()
            .map(|row| VectorFieldC::new(m, row))
            .collect::<Result<Vec<_>>>()?;
        let eta = eta_rows
            .into_iter()
            .map(|row| OneFormC::new(m, row))
            .collect::<Result<Vec<_>>>()?;
        let mut man = MetricFManifold::new(chart.clone(), f, xi, eta, g)?;
        if let Some(funcs) = &self.functions {
            if funcs.alpha.len() != self.s || funcs.beta.len() != self.s {
                return Err(FmanError::Input(format!(
                    "functions block must hold {} alpha and beta expressions",
                    self.s
                )));
            }
            let alpha = funcs
                .alpha
                .iter()
                .map(|t| parse_expr(t, &chart))
                .collect::<Result<Vec<_>>>()?;
            let beta = funcs
                .beta
                .iter()
                .map(|t| parse_expr(t, &chart))
                .collect::<Result<Vec<_>>>()?;
            man.set_declared_cf(CfExprs { alpha, beta });
        }
        for note in &self.notes {
            man.add_note(note.clone());
        }
        Ok(LoadedDefinition::Manifold(man))
    }

    /// Serializes an in-memory manifold back into the file schema.
    pub fn from_manifold(man: &MetricFManifold) -> Self {
        let m = man.dim();
        let row = |f: &dyn Fn(usize) -> String| (0..m).map(f).collect::<Vec<_>>();
        ManifoldDefinitionFile {
            n: man.n(),
            s: man.s(),
            coords: man.chart().coord_names().to_vec(),
            domain: man.chart().domain().to_vec(),
            g: (0..m)
                .map(|i| row(&|j| man.metric().at(i, j).to_string()))
                .collect(),
            f: (0..m)
                .map(|k| row(&|j| man.f().at(k, j).to_string()))
                .collect(),
            xi: man
                .xi()
                .iter()
                .map(|x| row(&|k| x.component(k).to_string()))
                .collect(),
            eta: man
                .eta()
                .iter()
                .map(|e| row(&|k| e.component(k).to_string()))
                .collect(),
            functions: man.declared_cf().map(|cf| FunctionsBlock {
                alpha: cf.alpha.iter().map(|e| e.to_string()).collect(),
                beta: cf.beta.iter().map(|e| e.to_string()).collect(),
            }),
            notes: man.notes().to_vec(),
        }
    }
}
