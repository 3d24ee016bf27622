//! Structure-producing constructions: the generalized D-conformal deformation
//! and warped products of flat factors with almost Hermitian or metric
//! f-manifold fibers, each with predicted characteristic functions.

pub mod gallery;

use nalgebra::DVector;

use crate::chart::Chart;
use crate::error::{FmanError, Result};
use crate::expr::ScalarExpr;
use crate::fields::{MetricField, OneFormC, Tensor11Field, VectorFieldC};
use crate::manifold::MetricFManifold;
use crate::report::{CheckEntry, ResidualTracker};
use crate::sample::sample_points;
use crate::tensor;
use crate::trans_s::{self, CfExprs, CharacteristicFunctions};

/// Sample count used for construction preconditions (positivity, fiber
/// axioms); fixed so constructions are deterministic.
const PRECHECK_POINTS: usize = 32;

/// Parameters of the generalized D-conformal deformation: two positive
/// functions a, b on the manifold.
#[derive(Clone, Debug)]
pub struct DeformationParams {
    pub a: ScalarExpr,
    pub b: ScalarExpr,
}

impl DeformationParams {
    pub fn constant(a: f64, b: f64) -> Self {
        DeformationParams {
            a: ScalarExpr::constant(a),
            b: ScalarExpr::constant(b),
        }
    }
}

/// Which chart coordinates carry the structure vector fields: coordinate j
/// is a structure coordinate when some xi_i has a nonzero j-component at a
/// sample point.
pub fn structure_coordinates(man: &MetricFManifold, points: &[Vec<f64>]) -> Result<Vec<bool>> {
    let mut is_structure = vec![false; man.dim()];
    for p in points {
        for xi in man.xi() {
            let v = xi.eval(p)?;
            for (j, flag) in is_structure.iter_mut().enumerate() {
                if v[j].abs() > 1e-12 {
                    *flag = true;
                }
            }
        }
    }
    Ok(is_structure)
}

/// Max |d e / d x_j| over the non-structure coordinates x_j at the sample
/// points. Zero (up to tolerance) means `e` depends only on the coordinates
/// dual to the structure vector fields, the hypothesis for the predicted
/// deformed functions.
pub fn structure_direction_residual(
    man: &MetricFManifold,
    e: &ScalarExpr,
    points: &[Vec<f64>],
) -> Result<f64> {
    let is_structure = structure_coordinates(man, points)?;
    let mut worst: f64 = 0.0;
    for p in points {
        let jet = e.eval_jet2(p)?;
        for (j, is_struct) in is_structure.iter().enumerate() {
            if !is_struct {
                worst = worst.max(jet.gradient[j].abs());
            }
        }
    }
    Ok(worst)
}

fn check_positive_on(expr: &ScalarExpr, what: &str, points: &[Vec<f64>]) -> Result<()> {
    for p in points {
        let v = expr.eval_value(p)?;
        if v <= 0.0 {
            return Err(FmanError::Input(format!(
                "{what} must be positive on the domain; got {v} at {p:?}"
            )));
        }
    }
    Ok(())
}

/// The generalized D-conformal deformation
/// (f, xi_i, eta_i, g) -> (f, xi_i/a, a eta_i, b g + (a^2 - b) sum eta_i (x) eta_i).
///
/// Always constructs the deformed bundle (positivity of a, b is the only
/// precondition); predictions of the new characteristic functions live in
/// [`predicted_deformed_cf`] and require the structure-direction hypothesis.
pub fn d_conformal_deform(
    man: &MetricFManifold,
    params: &DeformationParams,
) -> Result<MetricFManifold> {
    let points = sample_points(man.chart(), PRECHECK_POINTS, 0);
    check_positive_on(&params.a, "deformation function a", &points)?;
    check_positive_on(&params.b, "deformation function b", &points)?;

    let m = man.dim();
    let inv_a = ScalarExpr::one().div(&params.a);
    let xi = man
        .xi()
        .iter()
        .map(|x| x.scale_expr(&inv_a))
        .collect::<Vec<_>>();
    let eta = man
        .eta()
        .iter()
        .map(|e| e.scale_expr(&params.a))
        .collect::<Vec<_>>();
    let a2_minus_b = params.a.mul(&params.a).sub(&params.b);
    let g = MetricField::from_fn(m, |i, j| {
        let mut acc = params.b.mul(man.metric().at(i, j));
        for e in man.eta() {
            acc = acc.add(&a2_minus_b.mul(&e.component(i).mul(e.component(j))));
        }
        acc
    });
    let mut out = MetricFManifold::new(man.chart().clone(), man.f().clone(), xi, eta, g)?;
    for note in man.notes() {
        out.add_note(note.clone());
    }
    Ok(out)
}

/// Predicted characteristic functions of the deformed structure as chart
/// expressions: alpha~_i = alpha_i a / b, beta~_i = (xi_i b)/(2ab) + beta_i/a.
///
/// Requires the base manifold's functions analytically and the
/// structure-direction hypothesis on a and b (coordinate partials along the
/// non-structure coordinates vanish on samples); refuses otherwise. The
/// hypothesis is a chart-level statement: the invariant condition
/// da = (xi a) eta is strictly stronger (on a contact-type base it forces
/// constants), and is not required -- predictions are always cross-checked
/// against re-extraction downstream rather than assumed.
pub fn predicted_deformed_cf(
    man: &MetricFManifold,
    base_cf: &CfExprs,
    params: &DeformationParams,
) -> Result<CfExprs> {
    let points = sample_points(man.chart(), PRECHECK_POINTS, 0);
    for (expr, what) in [(&params.a, "a"), (&params.b, "b")] {
        let residual = structure_direction_residual(man, expr, &points)?;
        if residual > 1e-8 {
            return Err(FmanError::Input(format!(
                "deformation function {what} depends on non-structure directions \
                 (residual {residual:.3e}); predictions require structure-direction dependence"
            )));
        }
    }
    let m = man.dim();
    let two_ab = params.a.mul(&params.b).scale(2.0);
    let mut alpha = Vec::with_capacity(man.s());
    let mut beta = Vec::with_capacity(man.s());
    for i in 0..man.s() {
        alpha.push(base_cf.alpha[i].mul(&params.a).div(&params.b));
        // Directional derivative xi_i b as an expression.
        let mut xi_b = ScalarExpr::zero();
        for k in 0..m {
            xi_b = xi_b.add(&man.xi()[i].component(k).mul(&params.b.diff(k)));
        }
        beta.push(xi_b.div(&two_ab).add(&base_cf.beta[i].div(&params.a)));
    }
    Ok(CfExprs { alpha, beta })
}

/// Pointwise form of the prediction, from numeric base functions at `p`.
pub fn predicted_deformed_at(
    man: &MetricFManifold,
    base_cf: &CharacteristicFunctions,
    params: &DeformationParams,
    p: &[f64],
) -> Result<CharacteristicFunctions> {
    let a = params.a.eval_value(p)?;
    let b = params.b.eval_value(p)?;
    let b_jet = params.b.eval_jet2(p)?;
    let mut alpha = Vec::with_capacity(man.s());
    let mut beta = Vec::with_capacity(man.s());
    for i in 0..man.s() {
        let xi = man.xi()[i].eval(p)?;
        let xi_b = xi.dot(&b_jet.gradient);
        alpha.push(base_cf.alpha[i] * a / b);
        beta.push(xi_b / (2.0 * a * b) + base_cf.beta[i] / a);
    }
    Ok(CharacteristicFunctions { alpha, beta })
}

/// Cross-check of the deformed Riemannian connection: the Christoffel route
/// on the deformed metric against the five-term closed form built from the
/// base connection, the base functions and a, b.
#[allow(clippy::needless_range_loop)] // several parallel s-indexed arrays
pub fn check_deformed_connection(
    man: &MetricFManifold,
    params: &DeformationParams,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<CheckEntry> {
    let deformed = d_conformal_deform(man, params)?;
    let mut tracker = ResidualTracker::new(
        "deformation: Christoffel of deformed metric matches closed form",
        tol,
    );
    let m = man.dim();
    let s = man.s();
    for p in points {
        let base = man.point_ctx(p)?;
        let def_ctx = deformed.point_ctx(p)?;
        let cf = match man.declared_cf() {
            Some(cf) => cf.eval(p)?,
            None => trans_s::extract_pointwise(man, &base)?.cf,
        };
        let a_jet = params.a.eval_jet2(p)?;
        let b_jet = params.b.eval_jet2(p)?;
        let a = a_jet.value;
        let b = b_jet.value;
        let a2 = a * a;
        // Directional derivatives of b and a^2 along the structure fields.
        let xi_b: Vec<f64> = base.xi.iter().map(|xi| xi.dot(&b_jet.gradient)).collect();
        let xi_a2: Vec<f64> = base
            .xi
            .iter()
            .map(|xi| 2.0 * a * xi.dot(&a_jet.gradient))
            .collect();

        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let ei = DVector::from_fn(m, |k, _| if k == i { 1.0 } else { 0.0 });
                let ej = DVector::from_fn(m, |k, _| if k == j { 1.0 } else { 0.0 });
                let f_ei = &base.fmat * &ei;
                let f_ej = &base.fmat * &ej;
                let f2_ei = &base.fmat * &f_ei;
                let f2_ej = &base.fmat * &f_ej;
                let g_f = base.inner(&f_ei, &f_ej);
                let xb = b_jet.gradient[i];
                let yb = b_jet.gradient[j];
                let xa2 = 2.0 * a * a_jet.gradient[i];
                let ya2 = 2.0 * a * a_jet.gradient[j];

                // Base connection term Gamma^k_ij.
                let mut rhs = DVector::from_fn(m, |k, _| base.gamma.get(k, i, j));
                for t in 0..s {
                    let coeff = (2.0 * (a2 - b) * cf.beta[t] - xi_b[t]) / (2.0 * a2);
                    rhs += &base.xi[t] * (coeff * g_f);
                }
                rhs -= (&f2_ej * xb + &f2_ei * yb) / (2.0 * b);
                for t in 0..s {
                    let eta_i = base.eta[t][i];
                    let eta_j = base.eta[t][j];
                    let mut coeff = xa2 * eta_j + ya2 * eta_i;
                    let mut eta_prod = 0.0;
                    for c in 0..s {
                        eta_prod += base.eta[c][i] * base.eta[c][j];
                    }
                    coeff -= xi_a2[t] * eta_prod;
                    rhs += &base.xi[t] * (coeff / (2.0 * a2));
                }
                for t in 0..s {
                    let coeff = (a2 - b) / b * cf.alpha[t];
                    rhs -= (&f_ei * base.eta[t][j] + &f_ej * base.eta[t][i]) * coeff;
                }

                let lhs = DVector::from_fn(m, |k, _| def_ctx.gamma.get(k, i, j));
                worst = worst.max((lhs - rhs).amax());
            }
        }
        tracker.update(worst, p);
    }
    Ok(tracker.entry())
}

/// An almost Hermitian fiber (J, G) on its own chart (no structure
/// directions), used by the warped product over a flat factor.
#[derive(Clone, Debug)]
pub struct AlmostHermitian {
    chart: Chart,
    j: Tensor11Field,
    g: MetricField,
}

impl AlmostHermitian {
    pub fn new(chart: Chart, j: Tensor11Field, g: MetricField) -> Result<Self> {
        if chart.s() != 0 {
            return Err(FmanError::Shape(
                "an almost Hermitian fiber chart has no structure coordinates".into(),
            ));
        }
        let m = chart.dim();
        if j.dim() != m || g.dim() != m {
            return Err(FmanError::Shape(
                "fiber tensor dimensions must match the fiber chart".into(),
            ));
        }
        Ok(AlmostHermitian { chart, j, g })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn j(&self) -> &Tensor11Field {
        &self.j
    }

    pub fn metric(&self) -> &MetricField {
        &self.g
    }

    pub fn n(&self) -> usize {
        self.chart.n()
    }

    /// Max residual of J^2 = -I and G(JX, JY) = G(X, Y) over sample points.
    pub fn hermitian_residual(&self, points: &[Vec<f64>]) -> Result<f64> {
        let m = self.chart.dim();
        let mut worst: f64 = 0.0;
        for p in points {
            let jm = self.j.eval(p)?;
            let (gm, _) = tensor::metric_at(&self.g, p)?;
            let r1 = (&jm * &jm + nalgebra::DMatrix::identity(m, m)).amax();
            let r2 = (jm.transpose() * &gm * &jm - &gm).amax();
            worst = worst.max(r1).max(r2);
        }
        Ok(worst)
    }

    /// Max |nabla J| over sample points; zero means the fiber is Kaehler.
    pub fn kaehler_residual(&self, points: &[Vec<f64>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in points {
            let gamma = tensor::christoffel(&self.g, p)?;
            let nabla_j = tensor::nabla_t11_components(&gamma, &self.j, p)?;
            worst = worst.max(nabla_j.max_abs());
        }
        Ok(worst)
    }
}

/// Output of a warped-product construction.
#[derive(Debug)]
pub struct WarpOutput {
    pub manifold: MetricFManifold,
    /// Max fiber Kaehler residual (almost Hermitian fibers only).
    pub fiber_kaehler_residual: Option<f64>,
}

const WARP_SIGN_NOTE: &str = "warped base metric uses the positive sign (+dt^2): \
the Robertson-Walker-style negative sign would make the assembled metric \
indefinite and fail the Riemannian axioms";

fn product_chart(
    s: usize,
    t_domain: &[(f64, f64)],
    fiber_chart: &Chart,
    fiber_n: usize,
    extra_s: usize,
) -> Result<(Chart, Vec<String>)> {
    if t_domain.len() != s || s == 0 {
        return Err(FmanError::Shape(format!(
            "expected {s} base intervals, got {}",
            t_domain.len()
        )));
    }
    let mut names: Vec<String> = (1..=s).map(|i| format!("t{i}")).collect();
    for name in fiber_chart.coord_names() {
        if names.contains(name) {
            names.push(format!("{name}_f"));
        } else {
            names.push(name.clone());
        }
    }
    let mut domain = t_domain.to_vec();
    domain.extend_from_slice(fiber_chart.domain());
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let chart = Chart::new(fiber_n, s + extra_s, &name_refs, &domain)?;
    Ok((chart, names))
}

fn validate_h(h: &ScalarExpr, s: usize, m: usize, points: &[Vec<f64>]) -> Result<()> {
    for k in s..m {
        if !h.diff(k).is_zero_const() {
            return Err(FmanError::Input(
                "warp function h must depend only on the flat-factor coordinates".into(),
            ));
        }
    }
    check_positive_on(h, "warp function h", points)
}

/// Warped product of flat R^s with an almost Hermitian fiber:
/// g_h = dt^2 + (h o pi)^2 G, f = lifted J, xi_i = d/dt_i, eta_i = dt_i.
///
/// `h` is an expression over the product chart (the t coordinates come
/// first). If the fiber is Kaehler on samples, the output carries the
/// predicted functions alpha_i = 0, beta_i = (d h / d t_i) / h.
pub fn warp_kaehler(
    s: usize,
    h_text: &str,
    t_domain: &[(f64, f64)],
    fiber: &AlmostHermitian,
) -> Result<WarpOutput> {
    let fiber_points = sample_points(fiber.chart(), PRECHECK_POINTS, 0);
    let hermitian_residual = fiber.hermitian_residual(&fiber_points)?;
    if hermitian_residual > 1e-8 {
        return Err(FmanError::Input(format!(
            "fiber is not almost Hermitian (residual {hermitian_residual:.3e})"
        )));
    }
    let (chart, names) = product_chart(s, t_domain, fiber.chart(), fiber.n(), 0)?;
    let m = chart.dim();
    let h = crate::expr::parse_expr(h_text, &chart)?;
    let points = sample_points(&chart, PRECHECK_POINTS, 0);
    validate_h(&h, s, m, &points)?;

    let fiber_map: Vec<usize> = (0..fiber.chart().dim()).map(|i| s + i).collect();
    let remap = |e: &ScalarExpr| e.remap(&fiber_map, &names);

    let f = Tensor11Field::from_fn(m, |k, j| {
        if k >= s && j >= s {
            remap(fiber.j().at(k - s, j - s))
        } else {
            ScalarExpr::zero()
        }
    });
    let h2 = h.mul(&h);
    let g = MetricField::from_fn(m, |i, j| {
        if i < s && j < s {
            if i == j {
                ScalarExpr::one()
            } else {
                ScalarExpr::zero()
            }
        } else if i >= s && j >= s {
            h2.mul(&remap(fiber.metric().at(i - s, j - s)))
        } else {
            ScalarExpr::zero()
        }
    });
    let xi = (0..s).map(|i| VectorFieldC::coordinate(m, i)).collect();
    let eta = (0..s)
        .map(|i| {
            OneFormC::from_fn(m, |j| {
                if j == i {
                    ScalarExpr::one()
                } else {
                    ScalarExpr::zero()
                }
            })
        })
        .collect();

    let mut out = MetricFManifold::new(chart, f, xi, eta, g)?;
    out.add_note(WARP_SIGN_NOTE);
    let kaehler_residual = fiber.kaehler_residual(&fiber_points)?;
    if kaehler_residual <= 1e-8 {
        let alpha = vec![ScalarExpr::zero(); s];
        let beta = (0..s).map(|i| h.diff(i).div(&h)).collect();
        out.set_declared_cf(CfExprs { alpha, beta });
    }
    Ok(WarpOutput {
        manifold: out,
        fiber_kaehler_residual: Some(kaehler_residual),
    })
}

/// Warped product of flat R^s with a metric f-manifold fiber. The fiber's
/// structure fields are rescaled: xi~_i = d/dt_i for i <= s and
/// xi~_{s+j} = xi_j / h, eta~_{s+j} = h eta_j; the fiber metric is scaled by
/// h^2. Predicted functions (when the fiber's are known): alpha~ = (0, alpha/h),
/// beta~ = ((d h/d t_i)/h, beta/h).
pub fn warp_trans_s(
    s: usize,
    h_text: &str,
    t_domain: &[(f64, f64)],
    fiber: &MetricFManifold,
) -> Result<WarpOutput> {
    let fiber_points = sample_points(fiber.chart(), PRECHECK_POINTS, 0);
    let fiber_axioms = fiber.check_axioms(&fiber_points, 1e-8);
    if !fiber_axioms.passed() {
        return Err(FmanError::Input(
            "warp fiber fails its own metric f-manifold axioms".into(),
        ));
    }
    let s1 = fiber.s();
    let (chart, names) = product_chart(s, t_domain, fiber.chart(), fiber.n(), s1)?;
    let m = chart.dim();
    let h = crate::expr::parse_expr(h_text, &chart)?;
    let points = sample_points(&chart, PRECHECK_POINTS, 0);
    validate_h(&h, s, m, &points)?;

    let fiber_map: Vec<usize> = (0..fiber.chart().dim()).map(|i| s + i).collect();
    let remap = |e: &ScalarExpr| e.remap(&fiber_map, &names);

    let f = Tensor11Field::from_fn(m, |k, j| {
        if k >= s && j >= s {
            remap(fiber.f().at(k - s, j - s))
        } else {
            ScalarExpr::zero()
        }
    });
    let h2 = h.mul(&h);
    let g = MetricField::from_fn(m, |i, j| {
        if i < s && j < s {
            if i == j {
                ScalarExpr::one()
            } else {
                ScalarExpr::zero()
            }
        } else if i >= s && j >= s {
            h2.mul(&remap(fiber.metric().at(i - s, j - s)))
        } else {
            ScalarExpr::zero()
        }
    });
    let inv_h = ScalarExpr::one().div(&h);
    let mut xi: Vec<VectorFieldC> = (0..s).map(|i| VectorFieldC::coordinate(m, i)).collect();
    for j in 0..s1 {
        let lifted = VectorFieldC::from_fn(m, |k| {
            if k >= s {
                remap(fiber.xi()[j].component(k - s))
            } else {
                ScalarExpr::zero()
            }
        });
        xi.push(lifted.scale_expr(&inv_h));
    }
    let mut eta: Vec<OneFormC> = (0..s)
        .map(|i| {
            OneFormC::from_fn(m, |j| {
                if j == i {
                    ScalarExpr::one()
                } else {
                    ScalarExpr::zero()
                }
            })
        })
        .collect();
    for j in 0..s1 {
        let lifted = OneFormC::from_fn(m, |k| {
            if k >= s {
                remap(fiber.eta()[j].component(k - s))
            } else {
                ScalarExpr::zero()
            }
        });
        eta.push(lifted.scale_expr(&h));
    }

    let mut out = MetricFManifold::new(chart, f, xi, eta, g)?;
    out.add_note(WARP_SIGN_NOTE);
    if let Some(fiber_cf) = fiber.declared_cf() {
        let mut alpha: Vec<ScalarExpr> = vec![ScalarExpr::zero(); s];
        let mut beta: Vec<ScalarExpr> = (0..s).map(|i| h.diff(i).div(&h)).collect();
        for j in 0..s1 {
            alpha.push(remap(&fiber_cf.alpha[j]).div(&h));
            beta.push(remap(&fiber_cf.beta[j]).div(&h));
        }
        out.set_declared_cf(CfExprs { alpha, beta });
    }
    Ok(WarpOutput {
        manifold: out,
        fiber_kaehler_residual: None,
    })
}

/// Data needed to evaluate the warped-product connection independently of
/// the assembled metric.
pub struct WarpSpec<'a> {
    pub s: usize,
    /// Warp function over the product chart.
    pub h: &'a ScalarExpr,
    /// Unwarped fiber metric on the fiber chart.
    pub fiber_g: &'a MetricField,
}

/// The warped connection nabla_X Y at a product point from the component
/// formulas: base-base is the flat lift, base-fiber scales by Xh/h, and
/// fiber-fiber adds -(g_h(V,W)/h) grad h to the fiber connection lift.
///
/// `x` and `y` must be pure lifts on the product chart: the first `s`
/// components depend only on the t coordinates and the rest only on the
/// fiber coordinates.
pub fn warped_connection(
    spec: &WarpSpec<'_>,
    x: &VectorFieldC,
    y: &VectorFieldC,
    p: &[f64],
) -> Result<DVector<f64>> {
    let s = spec.s;
    let m = x.dim();
    let fiber_dim = m - s;
    let p_fiber = &p[s..];

    let h_jet = spec.h.eval_jet2(p)?;
    let h = h_jet.value;
    let grad_h = &h_jet.gradient; // supported on the first s components

    let xv = x.eval(p)?;
    let (yv, yjac) = y.eval_with_jacobian(p)?;

    // Fiber-chart views of the fiber blocks (indices shifted by s).
    let to_fiber = |field: &VectorFieldC| -> VectorFieldC {
        let map: Vec<usize> = (0..m).map(|i| i.saturating_sub(s)).collect();
        let names: Vec<String> = (0..fiber_dim).map(|i| format!("c{i}")).collect();
        VectorFieldC::from_fn(fiber_dim, |k| x_component_remap(field, k + s, &map, &names))
    };
    let xf = to_fiber(x);
    let yf = to_fiber(y);
    let gamma_fiber = tensor::christoffel(spec.fiber_g, p_fiber)?;
    let (yf_vals, yf_jac) = yf.eval_with_jacobian(p_fiber)?;
    let xf_vals = xf.eval(p_fiber)?;

    let mut out = DVector::zeros(m);

    // (i) base-base: flat lift U^a d_a V^i.
    for k in 0..s {
        for a in 0..s {
            out[k] += xv[a] * yjac[(k, a)];
        }
    }
    // (ii) mixed terms: (Uh/h) Y_fiber + (Vh/h) X_fiber.
    let u_h: f64 = (0..s).map(|a| xv[a] * grad_h[a]).sum();
    let v_h: f64 = (0..s).map(|a| yv[a] * grad_h[a]).sum();
    for k in s..m {
        out[k] += u_h / h * yv[k] + v_h / h * xv[k];
    }
    // (iv) fiber-fiber tangential: lift of the fiber connection.
    for k in 0..fiber_dim {
        let mut acc = 0.0;
        for a in 0..fiber_dim {
            acc += xf_vals[a] * yf_jac[(k, a)];
            for j in 0..fiber_dim {
                acc += xf_vals[a] * gamma_fiber.get(k, a, j) * yf_vals[j];
            }
        }
        out[s + k] += acc;
    }
    // (iii) fiber-fiber normal: -(g_h(V,W)/h) grad h with g_h = h^2 g_F.
    let (gf, _) = tensor::metric_at(spec.fiber_g, p_fiber)?;
    let g_h_xy = h * h * (&gf * &yf_vals).dot(&xf_vals);
    for k in 0..s {
        out[k] -= g_h_xy / h * grad_h[k];
    }
    Ok(out)
}

// Helper for remapping one component expression of a product-chart field to
// the fiber chart.
fn x_component_remap(
    field: &VectorFieldC,
    index: usize,
    map: &[usize],
    names: &[String],
) -> ScalarExpr {
    field.component(index).remap(map, names)
}
