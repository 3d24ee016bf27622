//! Built-in example manifolds, each a regression fixture with known
//! classification and characteristic functions where applicable. Gallery
//! names are stable (part of the CLI contract); parametrized items accept
//! `name(args)` forms, e.g. `standard_S(2,1)`.

use crate::chart::Chart;
use crate::error::{FmanError, Result};
use crate::expr::ScalarExpr;
use crate::fields::{MetricField, OneFormC, Tensor11Field, VectorFieldC};
use crate::manifold::MetricFManifold;
use crate::trans_s::CfExprs;

use super::{
    d_conformal_deform, predicted_deformed_cf, warp_kaehler, warp_trans_s, AlmostHermitian,
    DeformationParams,
};

fn zero() -> ScalarExpr {
    ScalarExpr::zero()
}

fn con(v: f64) -> ScalarExpr {
    ScalarExpr::constant(v)
}

/// Flat R^{2n+s} with a constant f-structure: a C-manifold.
pub fn euclidean_c(n: usize, s: usize) -> Result<MetricFManifold> {
    let m = 2 * n + s;
    let names = structure_names(n, s);
    let name_refs: Vec<&str> = names.iter().map(|x| x.as_str()).collect();
    let chart = Chart::new(n, s, &name_refs, &vec![(-1.0, 1.0); m])?;
    let f = Tensor11Field::from_fn(m, |k, j| {
        if j < n && k == n + j {
            con(-1.0)
        } else if (n..2 * n).contains(&j) && k == j - n {
            con(1.0)
        } else {
            zero()
        }
    });
    let g = MetricField::from_fn(m, |i, j| if i == j { con(1.0) } else { zero() });
    let xi = (0..s)
        .map(|a| VectorFieldC::coordinate(m, 2 * n + a))
        .collect();
    let eta = (0..s)
        .map(|a| OneFormC::from_fn(m, |j| if j == 2 * n + a { con(1.0) } else { zero() }))
        .collect();
    let mut man = MetricFManifold::new(chart, f, xi, eta, g)?;
    man.set_declared_cf(CfExprs::constant(s, 0.0, 0.0));
    Ok(man)
}

fn structure_names(n: usize, s: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    names.extend((1..=n).map(|i| format!("y{i}")));
    names.extend((1..=s).map(|a| format!("z{a}")));
    names
}

/// R^{2n+s} with eta_a = (dz_a - sum y_i dx_i)/2, xi_a = 2 d/dz_a,
/// g = sum eta_a (x) eta_a + (dx^2 + dy^2)/4 and the standard f mapping the
/// horizontal lifts: an S-manifold.
pub fn standard_s(n: usize, s: usize) -> Result<MetricFManifold> {
    let m = 2 * n + s;
    let names = structure_names(n, s);
    let name_refs: Vec<&str> = names.iter().map(|x| x.as_str()).collect();
    let chart = Chart::new(n, s, &name_refs, &vec![(-0.8, 0.8); m])?;
    let y = |i: usize| ScalarExpr::coord(format!("y{}", i + 1), n + i);

    let f = Tensor11Field::from_fn(m, |k, j| {
        if j < n {
            // f(d/dx_i) = -d/dy_i
            if k == n + j {
                con(-1.0)
            } else {
                zero()
            }
        } else if j < 2 * n {
            // f(d/dy_i) = d/dx_i + y_i sum_a d/dz_a
            let i = j - n;
            if k == i {
                con(1.0)
            } else if k >= 2 * n {
                y(i)
            } else {
                zero()
            }
        } else {
            zero()
        }
    });

    let g = MetricField::from_fn(m, |i, j| {
        let quarter = 0.25;
        if i < n && j < n {
            let base = if i == j { con(quarter) } else { zero() };
            base.add(&y(i).mul(&y(j)).scale(s as f64 * quarter))
        } else if i < n && j >= 2 * n {
            y(i).scale(-quarter)
        } else if j < n && i >= 2 * n {
            y(j).scale(-quarter)
        } else if i >= n && i == j {
            con(quarter)
        } else {
            zero()
        }
    });

    let xi = (0..s)
        .map(|a| VectorFieldC::from_fn(m, |k| if k == 2 * n + a { con(2.0) } else { zero() }))
        .collect();
    let eta = (0..s)
        .map(|a| {
            OneFormC::from_fn(m, |j| {
                if j < n {
                    y(j).scale(-0.5)
                } else if j == 2 * n + a {
                    con(0.5)
                } else {
                    zero()
                }
            })
        })
        .collect();
    let mut man = MetricFManifold::new(chart, f, xi, eta, g)?;
    man.set_declared_cf(CfExprs::constant(s, 1.0, 0.0));
    Ok(man)
}

/// Flat C^n: the standard Kaehler fiber.
pub fn flat_kaehler(n: usize) -> Result<AlmostHermitian> {
    let m = 2 * n;
    let names: Vec<String> = (1..=m).map(|i| format!("u{i}")).collect();
    let name_refs: Vec<&str> = names.iter().map(|x| x.as_str()).collect();
    let chart = Chart::hermitian(n, &name_refs, &vec![(-1.0, 1.0); m])?;
    let j = Tensor11Field::from_fn(m, |k, c| {
        let pair = c / 2;
        if c % 2 == 0 && k == 2 * pair + 1 {
            con(1.0)
        } else if c % 2 == 1 && k == 2 * pair {
            con(-1.0)
        } else {
            zero()
        }
    });
    let g = MetricField::from_fn(m, |i, c| if i == c { con(1.0) } else { zero() });
    AlmostHermitian::new(chart, j, g)
}

/// R^4 with the rotating compatible complex structure
/// J(u) = cos(u1) I + sin(u1) J' (I, J' the standard anticommuting pair):
/// almost Hermitian with nabla J != 0, hence not Kaehler.
pub fn non_kaehler_r4() -> Result<AlmostHermitian> {
    let chart = Chart::hermitian(
        2,
        &["u1", "u2", "u3", "u4"],
        &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
    )?;
    let iq = [
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ];
    let jq = [
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ];
    let u1 = ScalarExpr::coord("u1", 0);
    let cos = u1.apply(crate::expr::Func::Cos);
    let sin = u1.apply(crate::expr::Func::Sin);
    let j = Tensor11Field::from_fn(4, |k, c| cos.scale(iq[k][c]).add(&sin.scale(jq[k][c])));
    let g = MetricField::from_fn(4, |i, c| if i == c { con(1.0) } else { zero() });
    AlmostHermitian::new(chart, j, g)
}

/// Riemannian product of flat C^1 and standard_S(1,1) with f = J + f_S:
/// a K-manifold that is not an almost trans-S-manifold.
pub fn kaehler_times_s() -> Result<MetricFManifold> {
    let fiber = standard_s(1, 1)?;
    let m = 5;
    let names = ["u1", "u2", "x1", "y1", "z1"];
    let mut domain = vec![(-1.0, 1.0); 2];
    domain.extend_from_slice(fiber.chart().domain());
    let chart = Chart::new(2, 1, &names, &domain)?;
    let names_own: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let map: Vec<usize> = vec![2, 3, 4];
    let remap = |e: &ScalarExpr| e.remap(&map, &names_own);

    let f = Tensor11Field::from_fn(m, |k, j| match (k, j) {
        (1, 0) => con(1.0),
        (0, 1) => con(-1.0),
        (k, j) if k >= 2 && j >= 2 => remap(fiber.f().at(k - 2, j - 2)),
        _ => zero(),
    });
    let g = MetricField::from_fn(m, |i, j| {
        if i < 2 && j < 2 {
            if i == j {
                con(1.0)
            } else {
                zero()
            }
        } else if i >= 2 && j >= 2 {
            remap(fiber.metric().at(i - 2, j - 2))
        } else {
            zero()
        }
    });
    let xi = vec![VectorFieldC::from_fn(m, |k| {
        if k >= 2 {
            remap(fiber.xi()[0].component(k - 2))
        } else {
            zero()
        }
    })];
    let eta = vec![OneFormC::from_fn(m, |j| {
        if j >= 2 {
            remap(fiber.eta()[0].component(j - 2))
        } else {
            zero()
        }
    })];
    MetricFManifold::new(chart, f, xi, eta, g)
}

/// Warp of flat C^n by h = e^t over one flat direction: the Kenmotsu-type
/// manifold with alpha = 0, beta = 1.
pub fn kenmotsu(n: usize) -> Result<MetricFManifold> {
    let fiber = flat_kaehler(n)?;
    Ok(warp_kaehler(1, "exp(t1)", &[(-0.7, 0.7)], &fiber)?.manifold)
}

/// D-conformal deformation of standard_S(1,2) with constants a=2, b=4:
/// trans-S with functions (1/2, 0).
pub fn deformed_s() -> Result<MetricFManifold> {
    let base = standard_s(1, 2)?;
    let params = DeformationParams::constant(2.0, 4.0);
    let mut out = d_conformal_deform(&base, &params)?;
    let cf = predicted_deformed_cf(&base, base.declared_cf().expect("gallery base"), &params)?;
    out.set_declared_cf(cf);
    Ok(out)
}

/// D-conformal deformation of kenmotsu(1) with a = b = e^{2t}: trans-S with
/// non-constant beta = (xi b)/(2ab) + 1/a.
pub fn deformed_kenmotsu() -> Result<MetricFManifold> {
    let base = kenmotsu(1)?;
    let a = crate::expr::parse_expr("exp(2*t1)", base.chart())?;
    let params = DeformationParams { a: a.clone(), b: a };
    let mut out = d_conformal_deform(&base, &params)?;
    let cf = predicted_deformed_cf(&base, base.declared_cf().expect("gallery base"), &params)?;
    out.set_declared_cf(cf);
    Ok(out)
}

/// Warp of the Sasakian fiber standard_S(1,1) by h = 1 + t^2: an almost
/// trans-S-manifold that is not normal (h non-constant).
pub fn warped_almost() -> Result<MetricFManifold> {
    let fiber = standard_s(1, 1)?;
    Ok(warp_trans_s(1, "1 + t1^2", &[(-0.8, 0.8)], &fiber)?.manifold)
}

/// Warp of the non-Kaehler R^4 fiber: a metric f-manifold that fails the
/// defining trans-S identity.
pub fn warped_non_kaehler() -> Result<MetricFManifold> {
    let fiber = non_kaehler_r4()?;
    Ok(warp_kaehler(1, "1 + t1^2", &[(-0.7, 0.7)], &fiber)?.manifold)
}

/// Warp of flat C^1 by h = 1 + t^2: a trans-Sasakian (s = 1) manifold with
/// alpha = 0 and non-constant beta = 2t/(1+t^2).
pub fn trans_sasakian() -> Result<MetricFManifold> {
    let fiber = flat_kaehler(1)?;
    Ok(warp_kaehler(1, "1 + t1^2", &[(-0.9, 0.9)], &fiber)?.manifold)
}

/// Stable gallery names with one-line descriptions.
pub fn list() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "euclidean_C",
            "flat R^{2n+s}, constant f: C-manifold (default n=1, s=2)",
        ),
        (
            "standard_S",
            "R^{2n+s} with the contact-type structure: S-manifold (default n=1, s=2)",
        ),
        (
            "kenmotsu",
            "warp of flat C^n by e^t: alpha=0, beta=1 (default n=2)",
        ),
        (
            "kaehler_times_S",
            "product of flat C^1 and standard_S(1,1): K, not almost trans-S",
        ),
        (
            "deformed_S",
            "standard_S(1,2) deformed with a=2, b=4: trans-S with (1/2, 0)",
        ),
        (
            "deformed_kenmotsu",
            "kenmotsu(1) deformed with a=b=e^{2t}: non-constant beta",
        ),
        (
            "warped_almost",
            "warp of standard_S(1,1) by 1+t^2: almost trans-S, not normal",
        ),
        (
            "warped_non_kaehler",
            "warp of a non-Kaehler Hermitian R^4: not almost trans-S",
        ),
        (
            "trans_sasakian",
            "warp of flat C^1 by 1+t^2: trans-Sasakian, beta=2t/(1+t^2)",
        ),
    ]
}

pub fn fiber_list() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "flat_kaehler",
            "flat C^n with the standard complex structure (default n=1)",
        ),
        (
            "non_kaehler_r4",
            "R^4 with a rotating compatible J: almost Hermitian, not Kaehler",
        ),
    ]
}

fn parse_name(name: &str) -> Result<(&str, Vec<usize>)> {
    match name.split_once('(') {
        None => Ok((name.trim(), Vec::new())),
        Some((base, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| FmanError::UnknownGallery(name.to_string()))?;
            let args = inner
                .split(',')
                .map(|a| a.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| FmanError::UnknownGallery(name.to_string()))?;
            Ok((base.trim(), args))
        }
    }
}

/// Looks up a gallery manifold by name, e.g. `standard_S` or `kenmotsu(1)`.
pub fn manifold(name: &str) -> Result<MetricFManifold> {
    let (base, args) = parse_name(name)?;
    let arg = |i: usize, default: usize| args.get(i).copied().unwrap_or(default);
    match base {
        "euclidean_C" => euclidean_c(arg(0, 1).max(1), arg(1, 2).max(1)),
        "standard_S" => standard_s(arg(0, 1).max(1), arg(1, 2).max(1)),
        "kenmotsu" => kenmotsu(arg(0, 2).max(1)),
        "kaehler_times_S" => kaehler_times_s(),
        "deformed_S" => deformed_s(),
        "deformed_kenmotsu" => deformed_kenmotsu(),
        "warped_almost" => warped_almost(),
        "warped_non_kaehler" => warped_non_kaehler(),
        "trans_sasakian" => trans_sasakian(),
        _ => Err(FmanError::UnknownGallery(name.to_string())),
    }
}

/// Looks up a gallery fiber by name, e.g. `flat_kaehler(2)`.
pub fn fiber(name: &str) -> Result<AlmostHermitian> {
    let (base, args) = parse_name(name)?;
    match base {
        "flat_kaehler" => flat_kaehler(args.first().copied().unwrap_or(1).max(1)),
        "non_kaehler_r4" => non_kaehler_r4(),
        _ => Err(FmanError::UnknownGallery(name.to_string())),
    }
}

/// Canonical iteration order over the whole gallery.
pub fn all_manifold_names() -> Vec<&'static str> {
    list().into_iter().map(|(name, _)| name).collect()
}
