//! Pointwise tensor calculus on a chart: metric algebra, Levi-Civita
//! connection, covariant/Lie/exterior derivatives, codifferentials, the
//! Nijenhuis tensor and orthonormal frames.
//!
//! Everything here is a pure function of expression fields and a point;
//! derivatives of components come from jets, so results carry no truncation
//! error.

use nalgebra::{DMatrix, DVector};

use crate::error::{FmanError, Result};
use crate::fields::{MetricField, OneFormC, Tensor11Field, TwoFormField, VectorFieldC};

/// Rank-3 array of reals with uniform dimension `m` per axis.
#[derive(Clone, Debug)]
pub struct Tensor3 {
    m: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(m: usize) -> Self {
        Tensor3 {
            m,
            data: vec![0.0; m * m * m],
        }
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Tensor3::zeros(m);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    t.set(i, j, k, f(i, j, k));
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.m + j) * self.m + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.m + j) * self.m + k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Normalization convention for exterior derivatives. `Blair` carries the
/// 1/(p+1) factors (1/2 for one-forms, 1/3 for two-forms) matched to the
/// wedge with determinant normalization; `Plain` drops them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ExteriorConvention {
    #[default]
    Blair,
    Plain,
}

impl ExteriorConvention {
    pub fn oneform_factor(self) -> f64 {
        match self {
            ExteriorConvention::Blair => 0.5,
            ExteriorConvention::Plain => 1.0,
        }
    }

    pub fn twoform_factor(self) -> f64 {
        match self {
            ExteriorConvention::Blair => 1.0 / 3.0,
            ExteriorConvention::Plain => 1.0,
        }
    }
}

fn max_abs(mat: &DMatrix<f64>) -> f64 {
    mat.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Metric matrix and its inverse at `p`. Fails if the evaluated matrix is
/// not symmetric, not positive-definite, or if inversion is inaccurate
/// (residual above 1e-10).
pub fn metric_at(g: &MetricField, p: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let mat = g.eval(p)?;
    let m = mat.nrows();
    let scale = 1.0 + max_abs(&mat);
    for i in 0..m {
        for j in (i + 1)..m {
            if (mat[(i, j)] - mat[(j, i)]).abs() > 1e-9 * scale {
                return Err(FmanError::Degenerate(format!(
                    "metric not symmetric at sample point: g[{i}][{j}] = {} vs g[{j}][{i}] = {}",
                    mat[(i, j)],
                    mat[(j, i)]
                )));
            }
        }
    }
    if mat.clone().cholesky().is_none() {
        return Err(FmanError::Degenerate(
            "metric not positive-definite at sample point".into(),
        ));
    }
    let inv = mat
        .clone()
        .try_inverse()
        .ok_or_else(|| FmanError::Degenerate("metric not invertible at sample point".into()))?;
    let residual = max_abs(&(&mat * &inv - DMatrix::identity(m, m)));
    if residual > 1e-10 {
        return Err(FmanError::Degenerate(format!(
            "metric inversion residual {residual:.3e} exceeds 1e-10"
        )));
    }
    Ok((mat, inv))
}

/// Metric values and first derivatives: `dg.get(a, i, j) = d_a g_ij`.
pub fn metric_jets(g: &MetricField, p: &[f64]) -> Result<(DMatrix<f64>, Tensor3)> {
    let m = g.dim();
    let mut mat = DMatrix::zeros(m, m);
    let mut dg = Tensor3::zeros(m);
    for i in 0..m {
        for j in 0..m {
            let jet = g.at(i, j).eval_jet2(p)?;
            mat[(i, j)] = jet.value;
            for a in 0..m {
                dg.set(a, i, j, jet.gradient[a]);
            }
        }
    }
    Ok((mat, dg))
}

/// Christoffel symbols of the Levi-Civita connection,
/// `gamma.get(k, i, j) = Gamma^k_ij` (symmetric in i, j).
pub fn christoffel(g: &MetricField, p: &[f64]) -> Result<Tensor3> {
    let (_, ginv) = metric_at(g, p)?;
    let (_, dg) = metric_jets(g, p)?;
    Ok(christoffel_from_parts(&ginv, &dg))
}

pub fn christoffel_from_parts(ginv: &DMatrix<f64>, dg: &Tensor3) -> Tensor3 {
    let m = ginv.nrows();
    Tensor3::from_fn(m, |k, i, j| {
        let mut acc = 0.0;
        for l in 0..m {
            acc += ginv[(k, l)] * (dg.get(i, l, j) + dg.get(j, l, i) - dg.get(l, i, j));
        }
        0.5 * acc
    })
}

/// (nabla_X Y)^k = X^i (d_i Y^k + Gamma^k_ij Y^j) at `p`.
pub fn covariant_derivative_vector(
    g: &MetricField,
    x: &VectorFieldC,
    y: &VectorFieldC,
    p: &[f64],
) -> Result<DVector<f64>> {
    let gamma = christoffel(g, p)?;
    let xv = x.eval(p)?;
    let (yv, yjac) = y.eval_with_jacobian(p)?;
    let m = xv.len();
    let mut out = DVector::zeros(m);
    for k in 0..m {
        let mut acc = 0.0;
        for i in 0..m {
            acc += xv[i] * yjac[(k, i)];
            for j in 0..m {
                acc += xv[i] * gamma.get(k, i, j) * yv[j];
            }
        }
        out[k] = acc;
    }
    Ok(out)
}

/// Covariant derivative components of a vector field:
/// `out[(k, i)] = (nabla_i xi)^k = d_i xi^k + Gamma^k_ij xi^j`.
pub fn nabla_vector_components(
    gamma: &Tensor3,
    xi_vals: &DVector<f64>,
    xi_jac: &DMatrix<f64>,
) -> DMatrix<f64> {
    let m = xi_vals.len();
    DMatrix::from_fn(m, m, |k, i| {
        let mut acc = xi_jac[(k, i)];
        for j in 0..m {
            acc += gamma.get(k, i, j) * xi_vals[j];
        }
        acc
    })
}

/// ((nabla_X f))^k_j at `p` for a (1,1) tensor field.
pub fn covariant_derivative_t11(
    g: &MetricField,
    f: &Tensor11Field,
    x: &VectorFieldC,
    p: &[f64],
) -> Result<DMatrix<f64>> {
    let gamma = christoffel(g, p)?;
    let nabla = nabla_t11_components(&gamma, f, p)?;
    let xv = x.eval(p)?;
    let m = xv.len();
    Ok(DMatrix::from_fn(m, m, |k, j| {
        (0..m).map(|a| xv[a] * nabla.get(a, k, j)).sum()
    }))
}

/// Covariant derivative components of a (1,1) tensor:
/// `out.get(a, k, j) = (nabla_a f)^k_j
///                   = d_a f^k_j + Gamma^k_al f^l_j - Gamma^l_aj f^k_l`.
pub fn nabla_t11_components(gamma: &Tensor3, f: &Tensor11Field, p: &[f64]) -> Result<Tensor3> {
    let m = f.dim();
    let mut fv = DMatrix::zeros(m, m);
    let mut df = Tensor3::zeros(m);
    for k in 0..m {
        for j in 0..m {
            let jet = f.at(k, j).eval_jet2(p)?;
            fv[(k, j)] = jet.value;
            for a in 0..m {
                df.set(a, k, j, jet.gradient[a]);
            }
        }
    }
    Ok(nabla_t11_from_parts(gamma, &fv, &df))
}

pub fn nabla_t11_from_parts(gamma: &Tensor3, fv: &DMatrix<f64>, df: &Tensor3) -> Tensor3 {
    let m = fv.nrows();
    Tensor3::from_fn(m, |a, k, j| {
        let mut acc = df.get(a, k, j);
        for l in 0..m {
            acc += gamma.get(k, a, l) * fv[(l, j)];
            acc -= gamma.get(l, a, j) * fv[(k, l)];
        }
        acc
    })
}

/// `[X, Y]^k = X^i d_i Y^k - Y^i d_i X^k` at `p`.
pub fn lie_bracket(x: &VectorFieldC, y: &VectorFieldC, p: &[f64]) -> Result<DVector<f64>> {
    let (xv, xjac) = x.eval_with_jacobian(p)?;
    let (yv, yjac) = y.eval_with_jacobian(p)?;
    let m = xv.len();
    Ok(DVector::from_fn(m, |k, _| {
        (0..m)
            .map(|i| xv[i] * yjac[(k, i)] - yv[i] * xjac[(k, i)])
            .sum()
    }))
}

/// (L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k at `p`.
pub fn lie_derivative_metric(g: &MetricField, x: &VectorFieldC, p: &[f64]) -> Result<DMatrix<f64>> {
    let (gm, dg) = metric_jets(g, p)?;
    let (xv, xjac) = x.eval_with_jacobian(p)?;
    let m = xv.len();
    Ok(DMatrix::from_fn(m, m, |i, j| {
        let mut acc = 0.0;
        for k in 0..m {
            acc += xv[k] * dg.get(k, i, j);
            acc += gm[(k, j)] * xjac[(k, i)];
            acc += gm[(i, k)] * xjac[(k, j)];
        }
        acc
    }))
}

/// (d eta)_ij with the chosen convention (Blair: 1/2 factor).
pub fn exterior_d_oneform_with(
    eta: &OneFormC,
    p: &[f64],
    conv: ExteriorConvention,
) -> Result<DMatrix<f64>> {
    let (_, jac) = eta.eval_with_jacobian(p)?;
    let c = conv.oneform_factor();
    let m = jac.nrows();
    Ok(DMatrix::from_fn(m, m, |i, j| {
        c * (jac[(j, i)] - jac[(i, j)])
    }))
}

pub fn exterior_d_oneform(eta: &OneFormC, p: &[f64]) -> Result<DMatrix<f64>> {
    exterior_d_oneform_with(eta, p, ExteriorConvention::Blair)
}

/// (d omega)_ijk for a two-form field with the chosen convention
/// (Blair: 1/3 factor). The output is fully antisymmetric.
pub fn exterior_d_twoform_with(
    omega: &TwoFormField,
    p: &[f64],
    conv: ExteriorConvention,
) -> Result<Tensor3> {
    let m = omega.dim();
    let mut dw = Tensor3::zeros(m);
    for i in 0..m {
        for j in 0..m {
            let jet = omega.at(i, j).eval_jet2(p)?;
            for a in 0..m {
                dw.set(a, i, j, jet.gradient[a]);
            }
        }
    }
    let c = conv.twoform_factor();
    Ok(Tensor3::from_fn(m, |i, j, k| {
        c * (dw.get(i, j, k) - dw.get(j, i, k) + dw.get(k, i, j))
    }))
}

pub fn exterior_d_twoform(omega: &TwoFormField, p: &[f64]) -> Result<Tensor3> {
    exterior_d_twoform_with(omega, p, ExteriorConvention::Blair)
}

/// Exterior derivative of a two-form given pointwise values and first
/// derivatives (`dw.get(a, i, j) = d_a omega_ij`).
pub fn exterior_d_twoform_from_parts(dw: &Tensor3, conv: ExteriorConvention) -> Tensor3 {
    let c = conv.twoform_factor();
    Tensor3::from_fn(dw.dim(), |i, j, k| {
        c * (dw.get(i, j, k) - dw.get(j, i, k) + dw.get(k, i, j))
    })
}

/// (nabla_i eta)_j = d_i eta_j - Gamma^l_ij eta_l.
pub fn nabla_oneform_components(
    gamma: &Tensor3,
    eta_vals: &DVector<f64>,
    eta_jac: &DMatrix<f64>,
) -> DMatrix<f64> {
    let m = eta_vals.len();
    DMatrix::from_fn(m, m, |i, j| {
        let mut acc = eta_jac[(j, i)];
        for l in 0..m {
            acc -= gamma.get(l, i, j) * eta_vals[l];
        }
        acc
    })
}

/// (nabla_i omega)_jk = d_i omega_jk - Gamma^l_ij omega_lk - Gamma^l_ik omega_jl.
pub fn nabla_twoform_from_parts(gamma: &Tensor3, w: &DMatrix<f64>, dw: &Tensor3) -> Tensor3 {
    let m = w.nrows();
    Tensor3::from_fn(m, |i, j, k| {
        let mut acc = dw.get(i, j, k);
        for l in 0..m {
            acc -= gamma.get(l, i, j) * w[(l, k)];
            acc -= gamma.get(l, i, k) * w[(j, l)];
        }
        acc
    })
}

/// delta omega for a two-form: (delta omega)_k = -sum_a (nabla_{e_a} omega)(e_a, .)
/// over an orthonormal frame.
pub fn codifferential_2form_with_frame(nabla_w: &Tensor3, frame: &[DVector<f64>]) -> DVector<f64> {
    let m = nabla_w.dim();
    DVector::from_fn(m, |k, _| {
        let mut acc = 0.0;
        for e in frame {
            for i in 0..m {
                for j in 0..m {
                    acc -= e[i] * e[j] * nabla_w.get(i, j, k);
                }
            }
        }
        acc
    })
}

pub fn codifferential_2form(
    g: &MetricField,
    omega: &TwoFormField,
    p: &[f64],
) -> Result<DVector<f64>> {
    let (gm, _) = metric_at(g, p)?;
    let gamma = christoffel(g, p)?;
    let m = omega.dim();
    let mut w = DMatrix::zeros(m, m);
    let mut dw = Tensor3::zeros(m);
    for i in 0..m {
        for j in 0..m {
            let jet = omega.at(i, j).eval_jet2(p)?;
            w[(i, j)] = jet.value;
            for a in 0..m {
                dw.set(a, i, j, jet.gradient[a]);
            }
        }
    }
    let nabla_w = nabla_twoform_from_parts(&gamma, &w, &dw);
    let frame = orthonormal_frame(&gm)?;
    Ok(codifferential_2form_with_frame(&nabla_w, &frame))
}

/// delta eta = -sum_a (nabla_{e_a} eta)(e_a) over an orthonormal frame.
pub fn codifferential_1form_with_frame(nabla_eta: &DMatrix<f64>, frame: &[DVector<f64>]) -> f64 {
    let m = nabla_eta.nrows();
    let mut acc = 0.0;
    for e in frame {
        for i in 0..m {
            for j in 0..m {
                acc -= e[i] * e[j] * nabla_eta[(i, j)];
            }
        }
    }
    acc
}

pub fn codifferential_1form(g: &MetricField, eta: &OneFormC, p: &[f64]) -> Result<f64> {
    let (gm, _) = metric_at(g, p)?;
    let gamma = christoffel(g, p)?;
    let (vals, jac) = eta.eval_with_jacobian(p)?;
    let nabla_eta = nabla_oneform_components(&gamma, &vals, &jac);
    let frame = orthonormal_frame(&gm)?;
    Ok(codifferential_1form_with_frame(&nabla_eta, &frame))
}

/// Nijenhuis tensor `[f,f](X, Y) = f^2[X,Y] + [fX,fY] - f[fX,Y] - f[X,fY]`
/// evaluated at `p`, with the field compositions built symbolically so the
/// value is honest about the stated field extensions.
pub fn nijenhuis(
    f: &Tensor11Field,
    x: &VectorFieldC,
    y: &VectorFieldC,
    p: &[f64],
) -> Result<DVector<f64>> {
    let fx = f.apply_vec(x);
    let fy = f.apply_vec(y);
    let term1 = f.apply_vec(&f.apply_vec(&x.bracket(y)));
    let term2 = fx.bracket(&fy);
    let term3 = f.apply_vec(&fx.bracket(y));
    let term4 = f.apply_vec(&x.bracket(&fy));
    term1.add(&term2).sub(&term3).sub(&term4).eval(p)
}

/// Component form of the Nijenhuis tensor at `p`:
/// `out.get(k, i, j) = [f,f](d_i, d_j)^k`.
pub fn nijenhuis_components(f: &Tensor11Field, p: &[f64]) -> Result<Tensor3> {
    let m = f.dim();
    let mut fv = DMatrix::zeros(m, m);
    let mut df = Tensor3::zeros(m);
    for k in 0..m {
        for j in 0..m {
            let jet = f.at(k, j).eval_jet2(p)?;
            fv[(k, j)] = jet.value;
            for a in 0..m {
                df.set(a, k, j, jet.gradient[a]);
            }
        }
    }
    Ok(Tensor3::from_fn(m, |k, i, j| {
        let mut acc = 0.0;
        for a in 0..m {
            acc += fv[(a, i)] * df.get(a, k, j);
            acc -= fv[(a, j)] * df.get(a, k, i);
            acc += fv[(k, a)] * df.get(j, a, i);
            acc -= fv[(k, a)] * df.get(i, a, j);
        }
        acc
    }))
}

/// Gram-Schmidt orthonormal frame for the metric `gm`, seeded with the
/// coordinate basis in the given order. Columns satisfy g(e_a, e_b) = delta.
pub fn orthonormal_frame_ordered(gm: &DMatrix<f64>, order: &[usize]) -> Result<Vec<DVector<f64>>> {
    let m = gm.nrows();
    let scale = 1.0 + max_abs(gm);
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(m);
    for &idx in order {
        let mut v: DVector<f64> = DVector::zeros(m);
        v[idx] = 1.0;
        // Two passes of projection for numerical cleanliness.
        for _ in 0..2 {
            for e in &frame {
                let proj = (gm * &v).dot(e);
                v -= e * proj;
            }
        }
        let norm2 = (gm * &v).dot(&v);
        if !norm2.is_finite() || norm2 <= 1e-12 * scale {
            return Err(FmanError::Degenerate(format!(
                "orthonormal frame breakdown at basis vector {idx} (norm^2 = {norm2:.3e})"
            )));
        }
        frame.push(v / norm2.sqrt());
    }
    Ok(frame)
}

pub fn orthonormal_frame(gm: &DMatrix<f64>) -> Result<Vec<DVector<f64>>> {
    let order: Vec<usize> = (0..gm.nrows()).collect();
    orthonormal_frame_ordered(gm, &order)
}
