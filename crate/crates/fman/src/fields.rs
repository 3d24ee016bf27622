//! Component fields over a chart: metric, vectors, one-forms, (1,1)-tensors
//! and two-forms, all stored as `ScalarExpr` component arrays.
//!
//! Index conventions: vectors carry an upper index, forms a lower index, and
//! a (1,1)-tensor is stored as `comp[k][j] = f^k_j` (`k` upper, `j` lower),
//! i.e. column `j` holds the image of the coordinate field `j`.

use nalgebra::{DMatrix, DVector};

use crate::error::{FmanError, Result};
use crate::expr::ScalarExpr;

fn check_len(kind: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(FmanError::Shape(format!(
            "{kind}: expected {want} components, got {got}"
        )));
    }
    Ok(())
}

/// Symmetric metric components g_ij (symmetry is a sampled invariant, not a
/// storage constraint).
#[derive(Clone, Debug)]
pub struct MetricField {
    m: usize,
    comp: Vec<ScalarExpr>,
}

/// Vector field components X^k.
#[derive(Clone, Debug)]
pub struct VectorFieldC {
    comp: Vec<ScalarExpr>,
}

/// One-form components omega_j.
#[derive(Clone, Debug)]
pub struct OneFormC {
    comp: Vec<ScalarExpr>,
}

/// (1,1)-tensor field components f^k_j.
#[derive(Clone, Debug)]
pub struct Tensor11Field {
    m: usize,
    comp: Vec<ScalarExpr>,
}

/// Two-form components omega_ij (antisymmetric by construction of callers).
#[derive(Clone, Debug)]
pub struct TwoFormField {
    m: usize,
    comp: Vec<ScalarExpr>,
}

impl MetricField {
    pub fn new(m: usize, comp: Vec<ScalarExpr>) -> Result<Self> {
        check_len("metric", comp.len(), m * m)?;
        Ok(MetricField { m, comp })
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize) -> ScalarExpr) -> Self {
        let comp = (0..m * m).map(|idx| f(idx / m, idx % m)).collect();
        MetricField { m, comp }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn at(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.comp[i * self.m + j]
    }

    /// g(X, Y) as an expression.
    pub fn pair(&self, x: &VectorFieldC, y: &VectorFieldC) -> ScalarExpr {
        let mut acc = ScalarExpr::zero();
        for i in 0..self.m {
            for j in 0..self.m {
                acc = acc.add(&self.at(i, j).mul(&x.comp[i]).mul(&y.comp[j]));
            }
        }
        acc
    }

    pub fn eval(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(self.m, self.m);
        for i in 0..self.m {
            for j in 0..self.m {
                out[(i, j)] = self.at(i, j).eval_value(p)?;
            }
        }
        Ok(out)
    }
}

impl VectorFieldC {
    pub fn new(m: usize, comp: Vec<ScalarExpr>) -> Result<Self> {
        check_len("vector field", comp.len(), m)?;
        Ok(VectorFieldC { comp })
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize) -> ScalarExpr) -> Self {
        VectorFieldC {
            comp: (0..m).map(&mut f).collect(),
        }
    }

    /// The coordinate field for coordinate `i`.
    pub fn coordinate(m: usize, i: usize) -> Self {
        Self::from_fn(m, |k| {
            if k == i {
                ScalarExpr::one()
            } else {
                ScalarExpr::zero()
            }
        })
    }

    pub fn constant(values: &[f64]) -> Self {
        VectorFieldC {
            comp: values.iter().map(|v| ScalarExpr::constant(*v)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.comp.len()
    }

    pub fn component(&self, k: usize) -> &ScalarExpr {
        &self.comp[k]
    }

    pub fn scale_expr(&self, s: &ScalarExpr) -> Self {
        VectorFieldC {
            comp: self.comp.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        VectorFieldC {
            comp: self
                .comp
                .iter()
                .zip(&other.comp)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        VectorFieldC {
            comp: self
                .comp
                .iter()
                .zip(&other.comp)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn eval(&self, p: &[f64]) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(self.comp.len());
        for (k, c) in self.comp.iter().enumerate() {
            out[k] = c.eval_value(p)?;
        }
        Ok(out)
    }

    /// Values and Jacobian: `jac[(k, i)] = d_i X^k`.
    pub fn eval_with_jacobian(&self, p: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let m = p.len();
        let mut vals = DVector::zeros(self.comp.len());
        let mut jac = DMatrix::zeros(self.comp.len(), m);
        for (k, c) in self.comp.iter().enumerate() {
            let jet = c.eval_jet2(p)?;
            vals[k] = jet.value;
            for i in 0..m {
                jac[(k, i)] = jet.gradient[i];
            }
        }
        Ok((vals, jac))
    }

    /// Symbolic Lie bracket `[X, Y]^k = X^i d_i Y^k - Y^i d_i X^k`.
    pub fn bracket(&self, other: &Self) -> Self {
        let m = self.comp.len();
        Self::from_fn(m, |k| {
            let mut acc = ScalarExpr::zero();
            for i in 0..m {
                acc = acc.add(&self.comp[i].mul(&other.comp[k].diff(i)));
                acc = acc.sub(&other.comp[i].mul(&self.comp[k].diff(i)));
            }
            acc
        })
    }
}

impl OneFormC {
    pub fn new(m: usize, comp: Vec<ScalarExpr>) -> Result<Self> {
        check_len("one-form", comp.len(), m)?;
        Ok(OneFormC { comp })
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize) -> ScalarExpr) -> Self {
        OneFormC {
            comp: (0..m).map(&mut f).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.comp.len()
    }

    pub fn component(&self, j: usize) -> &ScalarExpr {
        &self.comp[j]
    }

    /// omega(X) as an expression.
    pub fn pair(&self, x: &VectorFieldC) -> ScalarExpr {
        let mut acc = ScalarExpr::zero();
        for j in 0..self.comp.len() {
            acc = acc.add(&self.comp[j].mul(x.component(j)));
        }
        acc
    }

    pub fn scale_expr(&self, s: &ScalarExpr) -> Self {
        OneFormC {
            comp: self.comp.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn eval(&self, p: &[f64]) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(self.comp.len());
        for (j, c) in self.comp.iter().enumerate() {
            out[j] = c.eval_value(p)?;
        }
        Ok(out)
    }

    pub fn eval_with_jacobian(&self, p: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let m = p.len();
        let mut vals = DVector::zeros(self.comp.len());
        let mut jac = DMatrix::zeros(self.comp.len(), m);
        for (j, c) in self.comp.iter().enumerate() {
            let jet = c.eval_jet2(p)?;
            vals[j] = jet.value;
            for i in 0..m {
                jac[(j, i)] = jet.gradient[i];
            }
        }
        Ok((vals, jac))
    }
}

impl Tensor11Field {
    pub fn new(m: usize, comp: Vec<ScalarExpr>) -> Result<Self> {
        check_len("(1,1) tensor field", comp.len(), m * m)?;
        Ok(Tensor11Field { m, comp })
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize) -> ScalarExpr) -> Self {
        let comp = (0..m * m).map(|idx| f(idx / m, idx % m)).collect();
        Tensor11Field { m, comp }
    }

    pub fn zero(m: usize) -> Self {
        Self::from_fn(m, |_, _| ScalarExpr::zero())
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn at(&self, k: usize, j: usize) -> &ScalarExpr {
        &self.comp[k * self.m + j]
    }

    /// fX as a vector field.
    pub fn apply_vec(&self, x: &VectorFieldC) -> VectorFieldC {
        VectorFieldC::from_fn(self.m, |k| {
            let mut acc = ScalarExpr::zero();
            for j in 0..self.m {
                acc = acc.add(&self.at(k, j).mul(x.component(j)));
            }
            acc
        })
    }

    /// f after g, i.e. (self . other)^k_j = f^k_a g^a_j.
    pub fn compose(&self, other: &Self) -> Self {
        Self::from_fn(self.m, |k, j| {
            let mut acc = ScalarExpr::zero();
            for a in 0..self.m {
                acc = acc.add(&self.at(k, a).mul(other.at(a, j)));
            }
            acc
        })
    }

    pub fn eval(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(self.m, self.m);
        for k in 0..self.m {
            for j in 0..self.m {
                out[(k, j)] = self.at(k, j).eval_value(p)?;
            }
        }
        Ok(out)
    }
}

impl TwoFormField {
    pub fn new(m: usize, comp: Vec<ScalarExpr>) -> Result<Self> {
        check_len("two-form", comp.len(), m * m)?;
        Ok(TwoFormField { m, comp })
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize) -> ScalarExpr) -> Self {
        let comp = (0..m * m).map(|idx| f(idx / m, idx % m)).collect();
        TwoFormField { m, comp }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn at(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.comp[i * self.m + j]
    }

    pub fn eval(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(self.m, self.m);
        for i in 0..self.m {
            for j in 0..self.m {
                out[(i, j)] = self.at(i, j).eval_value(p)?;
            }
        }
        Ok(out)
    }
}

/// The fundamental two-form F(X, Y) = g(X, fY) as an expression field,
/// F_ij = g_ik f^k_j.
pub fn fundamental_two_form_field(g: &MetricField, f: &Tensor11Field) -> TwoFormField {
    let m = g.dim();
    TwoFormField::from_fn(m, |i, j| {
        let mut acc = ScalarExpr::zero();
        for k in 0..m {
            acc = acc.add(&g.at(i, k).mul(f.at(k, j)));
        }
        acc
    })
}
