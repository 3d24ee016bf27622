//! Metric f-manifold bundles: the structure tensors over one chart, the
//! defining axiom checks, the fundamental two-form, the normality tensor and
//! the f-basis construction.

use nalgebra::{DMatrix, DVector};

use crate::chart::Chart;
use crate::error::{FmanError, Result};
use crate::expr::ScalarExpr;
use crate::fields::{
    fundamental_two_form_field, MetricField, OneFormC, Tensor11Field, TwoFormField, VectorFieldC,
};
use crate::report::{CheckEntry, ResidualTracker, VerificationReport};
use crate::tensor::{
    self, christoffel_from_parts, exterior_d_twoform_from_parts, nabla_oneform_components,
    nabla_t11_from_parts, nabla_twoform_from_parts, nabla_vector_components, ExteriorConvention,
    Tensor3,
};
use crate::trans_s::CfExprs;

/// A metric f-structure (f, xi_1..xi_s, eta_1..eta_s, g) over one chart.
#[derive(Clone, Debug)]
pub struct MetricFManifold {
    chart: Chart,
    f: Tensor11Field,
    xi: Vec<VectorFieldC>,
    eta: Vec<OneFormC>,
    g: MetricField,
    /// Characteristic functions supplied analytically (declared in a
    /// definition file or predicted by a construction).
    declared_cf: Option<CfExprs>,
    /// Free-form remarks carried into reports (e.g. sign conventions picked
    /// by a construction).
    notes: Vec<String>,
}

impl MetricFManifold {
    pub fn new(
        chart: Chart,
        f: Tensor11Field,
        xi: Vec<VectorFieldC>,
        eta: Vec<OneFormC>,
        g: MetricField,
    ) -> Result<Self> {
        let m = chart.dim();
        let s = chart.s();
        if s < 1 {
            return Err(FmanError::Shape("a metric f-manifold needs s >= 1".into()));
        }
        if f.dim() != m || g.dim() != m {
            return Err(FmanError::Shape(format!(
                "tensor dimensions must match chart dimension {m}"
            )));
        }
        if xi.len() != s || eta.len() != s {
            return Err(FmanError::Shape(format!(
                "expected {s} structure vector fields and dual one-forms, got {} and {}",
                xi.len(),
                eta.len()
            )));
        }
        for v in &xi {
            if v.dim() != m {
                return Err(FmanError::Shape(
                    "structure vector field has wrong length".into(),
                ));
            }
        }
        for e in &eta {
            if e.dim() != m {
                return Err(FmanError::Shape(
                    "structure one-form has wrong length".into(),
                ));
            }
        }
        Ok(MetricFManifold {
            chart,
            f,
            xi,
            eta,
            g,
            declared_cf: None,
            notes: Vec::new(),
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn n(&self) -> usize {
        self.chart.n()
    }

    pub fn s(&self) -> usize {
        self.chart.s()
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn f(&self) -> &Tensor11Field {
        &self.f
    }

    pub fn xi(&self) -> &[VectorFieldC] {
        &self.xi
    }

    pub fn eta(&self) -> &[OneFormC] {
        &self.eta
    }

    pub fn metric(&self) -> &MetricField {
        &self.g
    }

    pub fn declared_cf(&self) -> Option<&CfExprs> {
        self.declared_cf.as_ref()
    }

    pub fn set_declared_cf(&mut self, cf: CfExprs) {
        self.declared_cf = Some(cf);
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn add_note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Replaces the metric (used by negative tests: same structure tensors
    /// over a different metric).
    pub fn with_metric(mut self, g: MetricField) -> Self {
        self.g = g;
        self
    }

    /// F(X, Y) = g(X, fY) as an expression field.
    pub fn two_form_field(&self) -> TwoFormField {
        fundamental_two_form_field(&self.g, &self.f)
    }

    /// Everything the pointwise checks need at one sample point.
    pub fn point_ctx(&self, p: &[f64]) -> Result<PointCtx> {
        PointCtx::build(self, p, ExteriorConvention::Blair)
    }

    pub fn point_ctx_with(&self, p: &[f64], conv: ExteriorConvention) -> Result<PointCtx> {
        PointCtx::build(self, p, conv)
    }

    /// The fundamental two-form matrix at `p`, with its antisymmetry and
    /// F(xi_i, .) = 0 asserted to 1e-9.
    pub fn fundamental_two_form(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let ctx = self.point_ctx(p)?;
        let m = self.dim();
        for i in 0..m {
            for j in 0..m {
                if (ctx.big_f[(i, j)] + ctx.big_f[(j, i)]).abs() > 1e-9 {
                    return Err(FmanError::Degenerate(
                        "fundamental two-form is not antisymmetric (metric incompatible with f)"
                            .into(),
                    ));
                }
            }
        }
        for xi in &ctx.xi {
            if (xi.transpose() * &ctx.big_f).amax() > 1e-9 {
                return Err(FmanError::Degenerate(
                    "fundamental two-form does not annihilate a structure vector field".into(),
                ));
            }
        }
        Ok(ctx.big_f.clone())
    }

    /// Normality tensor `[f,f](X,Y) + 2 sum_i d eta_i(X,Y) xi_i` for general
    /// expression fields, with the exterior derivative built symbolically.
    pub fn normality_tensor(
        &self,
        x: &VectorFieldC,
        y: &VectorFieldC,
        p: &[f64],
    ) -> Result<DVector<f64>> {
        let m = self.dim();
        let mut out = tensor::nijenhuis(&self.f, x, y, p)?;
        for (xi, eta) in self.xi.iter().zip(&self.eta) {
            // d eta(X,Y) = 1/2 { X eta(Y) - Y eta(X) - eta([X,Y]) }
            let eta_y = eta.pair(y);
            let eta_x = eta.pair(x);
            let mut dxy = ScalarExpr::zero();
            for a in 0..m {
                dxy = dxy.add(&x.component(a).mul(&eta_y.diff(a)));
                dxy = dxy.sub(&y.component(a).mul(&eta_x.diff(a)));
            }
            dxy = dxy.sub(&eta.pair(&x.bracket(y))).scale(0.5);
            let val = 2.0 * dxy.eval_value(p)?;
            out += xi.eval(p)? * val;
        }
        Ok(out)
    }

    /// Pairwise structure brackets `[xi_i, xi_j]`; zero is a consequence of
    /// normality and is checked independently.
    pub fn check_normal_bracket(&self, points: &[Vec<f64>], tol: f64) -> CheckEntry {
        let mut tracker = ResidualTracker::new("brackets [xi_i, xi_j] = 0", tol);
        for p in points {
            let mut worst: f64 = 0.0;
            for i in 0..self.s() {
                for j in (i + 1)..self.s() {
                    match tensor::lie_bracket(&self.xi[i], &self.xi[j], p) {
                        Ok(b) => worst = worst.max(b.amax()),
                        Err(_) => worst = f64::INFINITY,
                    }
                }
            }
            tracker.update(worst, p);
        }
        tracker.entry()
    }

    /// Runs the defining axioms plus the kernel/volume certificates over the
    /// given sample points. Failures are report entries, never errors.
    pub fn check_axioms(&self, points: &[Vec<f64>], tol: f64) -> VerificationReport {
        let m = self.dim();
        let n = self.n();
        let s = self.s();
        let mut report = VerificationReport::default();
        let mut t_f3 = ResidualTracker::new("axiom: f^3 + f = 0", tol);
        let mut t_rank = ResidualTracker::new("axiom: rank(f) = 2n (sampled)", 0.0);
        let mut t_fxi = ResidualTracker::new("axiom: f(xi_i) = 0", tol);
        let mut t_etaf = ResidualTracker::new("axiom: eta_i o f = 0", tol);
        let mut t_f2 = ResidualTracker::new("axiom: f^2 = -I + sum eta_i(x)xi_i", tol);
        let mut t_compat =
            ResidualTracker::new("axiom: g(X,Y) = g(fX,fY) + sum eta_i(X)eta_i(Y)", tol);
        let mut t_dual = ResidualTracker::new("axiom: eta_i(xi_j) = delta_ij", tol);
        let mut t_kernel =
            ResidualTracker::new("structure: ker(f) = span(xi) (max principal angle)", 1e-6);
        let mut t_volume = ResidualTracker::new(
            "structure: eta_1^..^eta_s^F^n nonzero (volume deficiency)",
            0.0,
        );
        let mut eval_errors = 0usize;
        let mut first_error: Option<(Vec<f64>, String)> = None;

        for p in points {
            let ctx = match self.point_ctx(p) {
                Ok(ctx) => ctx,
                Err(err) => {
                    eval_errors += 1;
                    if first_error.is_none() {
                        first_error = Some((p.clone(), err.to_string()));
                    }
                    continue;
                }
            };
            let fm = &ctx.fmat;
            let f2 = fm * fm;
            let f3 = &f2 * fm;
            t_f3.update((&f3 + fm).amax(), p);

            let svd = fm.clone().svd(true, true);
            let smax = svd.singular_values.max();
            let rank = svd
                .singular_values
                .iter()
                .filter(|sv| **sv > 1e-8 * smax)
                .count();
            t_rank.update((rank as f64 - 2.0 * n as f64).abs(), p);

            let mut worst_fxi: f64 = 0.0;
            let mut worst_etaf: f64 = 0.0;
            let mut worst_dual: f64 = 0.0;
            let mut proj = DMatrix::zeros(m, m);
            for i in 0..s {
                worst_fxi = worst_fxi.max((fm * &ctx.xi[i]).amax());
                worst_etaf = worst_etaf.max((ctx.eta[i].transpose() * fm).amax());
                for j in 0..s {
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst_dual = worst_dual.max((ctx.eta[i].dot(&ctx.xi[j]) - want).abs());
                }
                proj += &ctx.xi[i] * ctx.eta[i].transpose();
            }
            t_fxi.update(worst_fxi, p);
            t_etaf.update(worst_etaf, p);
            t_dual.update(worst_dual, p);
            t_f2.update((&f2 + DMatrix::identity(m, m) - &proj).amax(), p);

            let mut compat = ctx.g.clone() - fm.transpose() * &ctx.g * fm;
            for i in 0..s {
                compat -= &ctx.eta[i] * ctx.eta[i].transpose();
            }
            t_compat.update(compat.amax(), p);

            t_kernel.update(self.kernel_angle(&ctx), p);
            t_volume.update((1e-10 - self.volume_det(&ctx).abs()).max(0.0), p);
        }

        report.push(t_f3.entry());
        report.push(t_rank.entry());
        report.push(t_fxi.entry());
        report.push(t_etaf.entry());
        report.push(t_f2.entry());
        report.push(t_compat.entry());
        report.push(t_dual.entry());
        report.push(t_kernel.entry());
        report.push(t_volume.entry());
        report.push(CheckEntry {
            name: match &first_error {
                Some((_, msg)) => format!("evaluation errors ({msg})"),
                None => "evaluation errors".into(),
            },
            max_residual: eval_errors as f64,
            tolerance: 0.0,
            pass: eval_errors == 0,
            witness: first_error.map(|(p, _)| p),
        });
        report.notes = self.notes.clone();
        report
    }

    /// Max principal angle between ker(f) and span(xi_i) at a point
    /// (Euclidean computation; the subspaces coincide or they don't).
    fn kernel_angle(&self, ctx: &PointCtx) -> f64 {
        let m = self.dim();
        let s = self.s();
        let svd = ctx.fmat.clone().svd(false, true);
        let smax = svd.singular_values.max();
        let v_t = svd.v_t.as_ref().expect("svd with v requested");
        let kernel_idx: Vec<usize> = (0..m)
            .filter(|i| svd.singular_values[*i] <= 1e-8 * smax)
            .collect();
        if kernel_idx.len() != s {
            return std::f64::consts::FRAC_PI_2;
        }
        let qk = DMatrix::from_fn(m, s, |r, c| v_t[(kernel_idx[c], r)]);
        let xi_mat = DMatrix::from_fn(m, s, |r, c| ctx.xi[c][r]);
        let qr = xi_mat.qr();
        let qx = qr.q();
        let overlap = qk.transpose() * qx;
        let sv = overlap.svd(false, false).singular_values;
        let cos_min = sv.min().clamp(-1.0, 1.0);
        cos_min.acos()
    }

    /// |det| of the matrix assembling the xi_i and an orthonormal basis of
    /// im(f); bounded away from zero iff eta_1^..^eta_s^F^n != 0 at the point.
    fn volume_det(&self, ctx: &PointCtx) -> f64 {
        let m = self.dim();
        let s = self.s();
        let svd = ctx.fmat.clone().svd(true, false);
        let smax = svd.singular_values.max();
        let u = svd.u.as_ref().expect("svd with u requested");
        let image_idx: Vec<usize> = (0..m)
            .filter(|i| svd.singular_values[*i] > 1e-8 * smax)
            .collect();
        let mut cols = DMatrix::zeros(m, m);
        for (c, xi) in ctx.xi.iter().enumerate() {
            cols.set_column(c, xi);
        }
        for (c, idx) in image_idx.iter().enumerate() {
            if s + c < m {
                cols.set_column(s + c, &u.column(*idx).into_owned());
            }
        }
        cols.determinant()
    }

    /// Normality tensor components at a point:
    /// `out.get(k, i, j) = ([f,f] + 2 sum_a d eta_a (x) xi_a)(d_i, d_j)^k`.
    pub fn normality_components(&self, ctx: &PointCtx) -> Tensor3 {
        let m = self.dim();
        Tensor3::from_fn(m, |k, i, j| {
            let mut acc = ctx.nijenhuis.get(k, i, j);
            for (xi, deta) in ctx.xi.iter().zip(&ctx.d_eta) {
                acc += 2.0 * deta[(i, j)] * xi[k];
            }
            acc
        })
    }

    /// The iterative f-basis {X_1..X_n, fX_1..fX_n, xi_1..xi_s} at a point.
    ///
    /// Each X_{k+1} is the coordinate direction with the largest orthogonal
    /// residual against everything chosen so far (ties by lowest coordinate
    /// index), normalized in g.
    pub fn build_f_basis(&self, ctx: &PointCtx) -> Result<Vec<DVector<f64>>> {
        let m = self.dim();
        let n = self.n();
        let gm = &ctx.g;
        let g_dot = |a: &DVector<f64>, b: &DVector<f64>| (gm * b).dot(a);

        let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(m);
        for xi in &ctx.xi {
            let mut v = xi.clone();
            for e in &chosen {
                let c = g_dot(&v, e);
                v -= e * c;
            }
            let norm2 = g_dot(&v, &v);
            if norm2 <= 1e-12 {
                return Err(FmanError::Degenerate(
                    "structure vector fields are g-degenerate at point".into(),
                ));
            }
            chosen.push(v / norm2.sqrt());
        }

        let mut xs: Vec<DVector<f64>> = Vec::with_capacity(n);
        let mut fxs: Vec<DVector<f64>> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut best: Option<(f64, DVector<f64>)> = None;
            for d in 0..m {
                let mut v: DVector<f64> = DVector::zeros(m);
                v[d] = 1.0;
                for _ in 0..2 {
                    for e in chosen.iter().chain(&xs).chain(&fxs) {
                        let c = g_dot(&v, e);
                        v -= e * c;
                    }
                }
                let norm2 = g_dot(&v, &v);
                if best.as_ref().is_none_or(|(b, _)| norm2 > *b) {
                    best = Some((norm2, v));
                }
            }
            let (norm2, v) = best.expect("m >= 1");
            if norm2 <= 1e-12 {
                return Err(FmanError::Degenerate(
                    "f-basis breakdown: no direction orthogonal to the span so far".into(),
                ));
            }
            let x = v / norm2.sqrt();
            let mut fx = &ctx.fmat * &x;
            for e in chosen.iter().chain(&xs).chain(&fxs).chain([&x]) {
                let c = g_dot(&fx, e);
                fx -= e * c;
            }
            let fx_norm2 = g_dot(&fx, &fx);
            if fx_norm2 <= 1e-12 {
                return Err(FmanError::Degenerate(
                    "f-basis breakdown: rank of f is less than 2n at point".into(),
                ));
            }
            fxs.push(&fx / fx_norm2.sqrt());
            xs.push(x);
        }

        let mut basis = xs;
        basis.extend(fxs);
        basis.extend(chosen);
        Ok(basis)
    }
}

/// All pointwise tensors the checks consume, evaluated once per point.
#[derive(Clone, Debug)]
pub struct PointCtx {
    pub p: Vec<f64>,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    pub gamma: Tensor3,
    /// f^k_j values.
    pub fmat: DMatrix<f64>,
    /// (nabla_a f)^k_j.
    pub nabla_f: Tensor3,
    /// Nijenhuis components `[f,f](d_i, d_j)^k`.
    pub nijenhuis: Tensor3,
    pub xi: Vec<DVector<f64>>,
    /// (nabla_i xi)^k at (k, i).
    pub nabla_xi: Vec<DMatrix<f64>>,
    pub eta: Vec<DVector<f64>>,
    /// (nabla_i eta)_j at (i, j).
    pub nabla_eta: Vec<DMatrix<f64>>,
    /// d eta_i matrices (convention-normalized).
    pub d_eta: Vec<DMatrix<f64>>,
    /// Fundamental two-form F_ij = g_ik f^k_j.
    pub big_f: DMatrix<f64>,
    /// Exterior derivative of F (convention-normalized), fully antisymmetric.
    pub d_big_f: Tensor3,
    /// (nabla_i F)_jk.
    pub nabla_big_f: Tensor3,
    /// Orthonormal frame in coordinate order.
    pub frame: Vec<DVector<f64>>,
}

impl PointCtx {
    fn build(man: &MetricFManifold, p: &[f64], conv: ExteriorConvention) -> Result<Self> {
        let m = man.dim();
        let (gm, dg) = tensor::metric_jets(man.metric(), p)?;
        let (_, ginv) = tensor::metric_at(man.metric(), p)?;
        let gamma = christoffel_from_parts(&ginv, &dg);

        let mut fmat = DMatrix::zeros(m, m);
        let mut df = Tensor3::zeros(m);
        for k in 0..m {
            for j in 0..m {
                let jet = man.f().at(k, j).eval_jet2(p)?;
                fmat[(k, j)] = jet.value;
                for a in 0..m {
                    df.set(a, k, j, jet.gradient[a]);
                }
            }
        }
        let nabla_f = nabla_t11_from_parts(&gamma, &fmat, &df);
        let nijenhuis = Tensor3::from_fn(m, |k, i, j| {
            let mut acc = 0.0;
            for a in 0..m {
                acc += fmat[(a, i)] * df.get(a, k, j);
                acc -= fmat[(a, j)] * df.get(a, k, i);
                acc += fmat[(k, a)] * df.get(j, a, i);
                acc -= fmat[(k, a)] * df.get(i, a, j);
            }
            acc
        });

        let mut xi = Vec::with_capacity(man.s());
        let mut nabla_xi = Vec::with_capacity(man.s());
        for field in man.xi() {
            let (vals, jac) = field.eval_with_jacobian(p)?;
            nabla_xi.push(nabla_vector_components(&gamma, &vals, &jac));
            xi.push(vals);
        }
        let mut eta = Vec::with_capacity(man.s());
        let mut nabla_eta = Vec::with_capacity(man.s());
        let mut d_eta = Vec::with_capacity(man.s());
        let c1 = conv.oneform_factor();
        for field in man.eta() {
            let (vals, jac) = field.eval_with_jacobian(p)?;
            nabla_eta.push(nabla_oneform_components(&gamma, &vals, &jac));
            d_eta.push(DMatrix::from_fn(m, m, |i, j| {
                c1 * (jac[(j, i)] - jac[(i, j)])
            }));
            eta.push(vals);
        }

        // F and its first derivatives by the product rule on g_ik f^k_j.
        let big_f = DMatrix::from_fn(m, m, |i, j| (0..m).map(|k| gm[(i, k)] * fmat[(k, j)]).sum());
        let dbig_f = Tensor3::from_fn(m, |a, i, j| {
            (0..m)
                .map(|k| dg.get(a, i, k) * fmat[(k, j)] + gm[(i, k)] * df.get(a, k, j))
                .sum()
        });
        let d_big_f = exterior_d_twoform_from_parts(&dbig_f, conv);
        let nabla_big_f = nabla_twoform_from_parts(&gamma, &big_f, &dbig_f);
        let frame = tensor::orthonormal_frame(&gm)?;

        Ok(PointCtx {
            p: p.to_vec(),
            g: gm,
            ginv,
            gamma,
            fmat,
            nabla_f,
            nijenhuis,
            xi,
            nabla_xi,
            eta,
            nabla_eta,
            d_eta,
            big_f,
            d_big_f,
            nabla_big_f,
            frame,
        })
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// g(x, y) at this point for coordinate-component vectors.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (&self.g * y).dot(x)
    }

    /// (nabla_x f) y contracted from the cached components.
    pub fn nabla_f_apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let m = self.dim();
        DVector::from_fn(m, |k, _| {
            let mut acc = 0.0;
            for a in 0..m {
                for j in 0..m {
                    acc += x[a] * self.nabla_f.get(a, k, j) * y[j];
                }
            }
            acc
        })
    }

    /// nabla_x xi_i contracted from the cached components.
    pub fn nabla_xi_apply(&self, i: usize, x: &DVector<f64>) -> DVector<f64> {
        let m = self.dim();
        DVector::from_fn(m, |k, _| {
            (0..m).map(|a| x[a] * self.nabla_xi[i][(k, a)]).sum()
        })
    }

    /// (nabla_x eta_i) y contracted from the cached components.
    pub fn nabla_eta_apply(&self, i: usize, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let m = self.dim();
        let mut acc = 0.0;
        for a in 0..m {
            for j in 0..m {
                acc += x[a] * self.nabla_eta[i][(a, j)] * y[j];
            }
        }
        acc
    }

    /// (nabla_x F)(y, z) contracted from the cached components.
    pub fn nabla_big_f_apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> f64 {
        let m = self.dim();
        let mut acc = 0.0;
        for a in 0..m {
            for i in 0..m {
                for j in 0..m {
                    acc += x[a] * y[i] * z[j] * self.nabla_big_f.get(a, i, j);
                }
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::gallery;
    use crate::sample::{random_vectors, sample_points};

    #[test]
    fn manifolds_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<MetricFManifold>();
        let man = std::sync::Arc::new(gallery::manifold("standard_S(1,1)").unwrap());
        let points = sample_points(man.chart(), 8, 0);
        let handles: Vec<_> = points
            .into_iter()
            .map(|p| {
                let man = man.clone();
                std::thread::spawn(move || man.point_ctx(&p).unwrap().big_f.amax())
            })
            .collect();
        for h in handles {
            assert!(h.join().unwrap() > 0.0);
        }
    }

    #[test]
    fn axioms_fail_with_incompatible_metric() {
        // Same structure tensors over the identity metric: compatibility and
        // duality break (eta(xi) = 1 still holds, but g(fX,fY) accounting
        // does not).
        let man = gallery::manifold("standard_S(1,1)").unwrap();
        let m = man.dim();
        let flat = MetricField::from_fn(m, |i, j| {
            if i == j {
                ScalarExpr::one()
            } else {
                ScalarExpr::zero()
            }
        });
        let broken = man.clone().with_metric(flat);
        let points = sample_points(broken.chart(), 16, 0);
        let report = broken.check_axioms(&points, 1e-8);
        assert!(!report.passed());
        let compat = report
            .entry("axiom: g(X,Y) = g(fX,fY) + sum eta_i(X)eta_i(Y)")
            .unwrap();
        assert!(!compat.pass && compat.max_residual > 0.1);
    }

    #[test]
    fn fundamental_form_is_antisymmetric_and_annihilates_xi() {
        for name in ["euclidean_C", "standard_S", "kenmotsu(1)"] {
            let man = gallery::manifold(name).unwrap();
            let p = man.chart().center();
            let f = man.fundamental_two_form(&p).unwrap();
            assert!((&f + f.transpose()).amax() < 1e-12, "{name}");
        }
    }

    #[test]
    fn fundamental_form_equals_d_eta_on_standard_s() {
        let man = gallery::manifold("standard_S(2,2)").unwrap();
        for p in sample_points(man.chart(), 8, 0) {
            let ctx = man.point_ctx(&p).unwrap();
            for deta in &ctx.d_eta {
                assert!((deta - &ctx.big_f).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn fundamental_form_of_warp_is_scaled_fiber_form() {
        // On the warp of flat C^n the fiber block of F is h^2 times the
        // constant Kaehler form of the fiber.
        let man = gallery::manifold("kenmotsu(1)").unwrap();
        let fiber = gallery::flat_kaehler(1).unwrap();
        let fiber_p = [0.0, 0.0];
        let fiber_form = {
            let g = fiber.metric().eval(&fiber_p).unwrap();
            let j = fiber.j().eval(&fiber_p).unwrap();
            g * j
        };
        for p in sample_points(man.chart(), 8, 0) {
            let h = p[0].exp();
            let ctx = man.point_ctx(&p).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let want = h * h * fiber_form[(i, j)];
                    let got = ctx.big_f[(1 + i, 1 + j)];
                    assert!((got - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn normality_field_version_matches_components() {
        let man = gallery::manifold("warped_almost").unwrap();
        let m = man.dim();
        let p = sample_points(man.chart(), 4, 0)[2].clone();
        let ctx = man.point_ctx(&p).unwrap();
        let comps = man.normality_components(&ctx);
        for i in 0..m {
            for j in 0..m {
                let x = VectorFieldC::coordinate(m, i);
                let y = VectorFieldC::coordinate(m, j);
                let via_field = man.normality_tensor(&x, &y, &p).unwrap();
                for k in 0..m {
                    assert!((via_field[k] - comps.get(k, i, j)).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn normality_zero_on_normal_gallery_and_nonzero_on_warp() {
        for (name, normal) in [
            ("standard_S", true),
            ("kenmotsu(1)", true),
            ("euclidean_C", true),
            ("warped_almost", false),
        ] {
            let man = gallery::manifold(name).unwrap();
            let worst = sample_points(man.chart(), 8, 0)
                .iter()
                .map(|p| {
                    let ctx = man.point_ctx(p).unwrap();
                    man.normality_components(&ctx).max_abs()
                })
                .fold(0.0f64, f64::max);
            if normal {
                assert!(worst < 1e-10, "{name}: normality {worst}");
            } else {
                assert!(worst > 1e-3, "{name}: normality {worst}");
            }
        }
    }

    #[test]
    fn bracket_vanishing_does_not_imply_normality() {
        // Single structure field: all pairwise brackets vanish trivially,
        // yet the structure is not normal.
        let man = gallery::manifold("warped_non_kaehler").unwrap();
        let points = sample_points(man.chart(), 8, 0);
        assert!(man.check_normal_bracket(&points, 1e-8).pass);
        let ctx = man.point_ctx(&points[1]).unwrap();
        assert!(man.normality_components(&ctx).max_abs() > 1e-3);
    }

    #[test]
    fn f_basis_on_flat_chart_is_coordinate_basis() {
        let man = gallery::manifold("euclidean_C(1,1)").unwrap();
        let p = man.chart().center();
        let ctx = man.point_ctx(&p).unwrap();
        let basis = man.build_f_basis(&ctx).unwrap();
        assert_eq!(basis.len(), 3);
        // X_1 = d/dx, fX_1 = -d/dy, xi = d/dz (up to sign conventions).
        assert!((basis[0][0].abs() - 1.0).abs() < 1e-12);
        assert!((basis[1][1].abs() - 1.0).abs() < 1e-12);
        assert!((basis[2][2].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f_basis_is_orthonormal_on_gallery() {
        for name in ["standard_S(1,2)", "kenmotsu(2)", "warped_almost"] {
            let man = gallery::manifold(name).unwrap();
            for p in sample_points(man.chart(), 6, 0) {
                let ctx = man.point_ctx(&p).unwrap();
                let basis = man.build_f_basis(&ctx).unwrap();
                assert_eq!(basis.len(), man.dim());
                for a in 0..basis.len() {
                    for b in 0..basis.len() {
                        let want = if a == b { 1.0 } else { 0.0 };
                        let got = ctx.inner(&basis[a], &basis[b]);
                        assert!((got - want).abs() < 1e-9, "{name}: g(e_{a}, e_{b}) = {got}");
                    }
                }
                // The middle block really is f applied to the first block.
                let n = man.n();
                for k in 0..n {
                    let fx = &ctx.fmat * &basis[k];
                    assert!((fx - &basis[n + k]).amax() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn f_basis_breaks_down_on_degenerate_f() {
        let man = gallery::manifold("euclidean_C(1,1)").unwrap();
        let m = man.dim();
        let degenerate = MetricFManifold::new(
            man.chart().clone(),
            Tensor11Field::zero(m),
            man.xi().to_vec(),
            man.eta().to_vec(),
            man.metric().clone(),
        )
        .unwrap();
        let p = degenerate.chart().center();
        let ctx = degenerate.point_ctx(&p).unwrap();
        assert!(matches!(
            degenerate.build_f_basis(&ctx),
            Err(FmanError::Degenerate(_))
        ));
    }

    #[test]
    fn kernel_of_f_is_xi_span_on_gallery() {
        for name in ["standard_S", "kenmotsu(1)", "warped_almost"] {
            let man = gallery::manifold(name).unwrap();
            let points = sample_points(man.chart(), 8, 0);
            let report = man.check_axioms(&points, 1e-8);
            let angle = report
                .entry("structure: ker(f) = span(xi) (max principal angle)")
                .unwrap();
            assert!(angle.pass, "{name}: angle {}", angle.max_residual);
            let vol = report
                .entry("structure: eta_1^..^eta_s^F^n nonzero (volume deficiency)")
                .unwrap();
            assert!(vol.pass, "{name}");
        }
    }

    #[test]
    fn exterior_df_routes_agree() {
        // The cached dF (product rule on g_ik f^k_j) against the generic
        // exterior derivative of the expression-level two-form field.
        for name in ["standard_S(1,1)", "kenmotsu(1)", "warped_almost"] {
            let man = gallery::manifold(name).unwrap();
            let field = man.two_form_field();
            for p in sample_points(man.chart(), 4, 0) {
                let ctx = man.point_ctx(&p).unwrap();
                let generic = crate::tensor::exterior_d_twoform(&field, &p).unwrap();
                let m = man.dim();
                for i in 0..m {
                    for j in 0..m {
                        for k in 0..m {
                            assert!(
                                (ctx.d_big_f.get(i, j, k) - generic.get(i, j, k)).abs() < 1e-11,
                                "{name}: dF routes disagree at ({i},{j},{k})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn plain_convention_rescales_exterior_derivatives() {
        let man = gallery::manifold("standard_S(1,1)").unwrap();
        let p = man.chart().center();
        let blair = man
            .point_ctx_with(&p, crate::tensor::ExteriorConvention::Blair)
            .unwrap();
        let plain = man
            .point_ctx_with(&p, crate::tensor::ExteriorConvention::Plain)
            .unwrap();
        assert!((&plain.d_eta[0] - &blair.d_eta[0] * 2.0).amax() < 1e-14);
        let m = man.dim();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let want = 3.0 * blair.d_big_f.get(i, j, k);
                    assert!((plain.d_big_f.get(i, j, k) - want).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn evaluation_errors_are_reported_per_point() {
        // A metric involving sqrt(x) fails on the negative-x half of the
        // domain; those points must surface as failing evaluation entries,
        // not as a crash.
        let chart = crate::chart::Chart::new(
            1,
            1,
            &["x", "y", "z"],
            &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
        )
        .unwrap();
        let g = MetricField::from_fn(3, |i, j| {
            if i == j {
                if i == 0 {
                    crate::expr::parse_expr("1 + sqrt(x)", &chart).unwrap()
                } else {
                    ScalarExpr::one()
                }
            } else {
                ScalarExpr::zero()
            }
        });
        let base = gallery::manifold("euclidean_C(1,1)").unwrap();
        let man = MetricFManifold::new(
            chart,
            base.f().clone(),
            base.xi().to_vec(),
            base.eta().to_vec(),
            g,
        )
        .unwrap();
        let points = sample_points(man.chart(), 32, 0);
        let report = man.check_axioms(&points, 1e-8);
        assert!(!report.passed());
        let entry = report
            .checks
            .iter()
            .find(|c| c.name.starts_with("evaluation errors"))
            .unwrap();
        assert!(!entry.pass);
        assert!(entry.max_residual >= 1.0, "count {}", entry.max_residual);
        assert!(entry.witness.is_some());
    }

    #[test]
    fn covariant_xi_derivative_examples() {
        // On the S-structure nabla_X xi_i = -fX for unit X in L; on kenmotsu
        // nabla_X xi = -f^2 X.
        let man = gallery::manifold("standard_S(1,1)").unwrap();
        for p in sample_points(man.chart(), 4, 0) {
            let ctx = man.point_ctx(&p).unwrap();
            let basis = man.build_f_basis(&ctx).unwrap();
            let x = &basis[0];
            let lhs = ctx.nabla_xi_apply(0, x);
            let rhs = -(&ctx.fmat * x);
            assert!((lhs - rhs).amax() < 1e-10);
        }
        let man = gallery::manifold("kenmotsu(1)").unwrap();
        for p in sample_points(man.chart(), 4, 0) {
            let ctx = man.point_ctx(&p).unwrap();
            for x in random_vectors(man.dim(), 3, 17) {
                let lhs = ctx.nabla_xi_apply(0, &x);
                let rhs = -(&ctx.fmat * (&ctx.fmat * &x));
                assert!((lhs - rhs).amax() < 1e-10);
            }
        }
    }
}
