//! Scalar coordinate expressions with exact first and second derivatives.
//!
//! Expressions are immutable trees shared through `Arc`; evaluation is pure,
//! so one expression may be evaluated from many threads. Derivatives are
//! obtained by forward propagation of order-2 jets ([`Jet2`]), never by
//! numerical differencing, so the only error is floating-point rounding.

mod jet;
mod parse;

pub use jet::Jet2;
pub use parse::parse_expr;

use std::fmt;
use std::sync::Arc;

use crate::error::{FmanError, Result};

/// Built-in univariate functions of the DSL.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, PartialEq)]
enum Node {
    Num(f64),
    /// A chart coordinate; `index` is its position in the owning chart.
    Coord {
        name: String,
        index: usize,
    },
    Add(ScalarExpr, ScalarExpr),
    Sub(ScalarExpr, ScalarExpr),
    Mul(ScalarExpr, ScalarExpr),
    Div(ScalarExpr, ScalarExpr),
    Neg(ScalarExpr),
    /// Integer power, computed exactly for any base.
    PowI(ScalarExpr, i32),
    /// Real power, restricted to positive base.
    PowF(ScalarExpr, f64),
    Apply(Func, ScalarExpr),
}

/// An immutable real-valued expression over chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarExpr(Arc<Node>);

impl ScalarExpr {
    fn new(node: Node) -> Self {
        ScalarExpr(Arc::new(node))
    }

    pub fn constant(value: f64) -> Self {
        ScalarExpr::new(Node::Num(value))
    }

    pub fn zero() -> Self {
        ScalarExpr::constant(0.0)
    }

    pub fn one() -> Self {
        ScalarExpr::constant(1.0)
    }

    pub fn coord(name: impl Into<String>, index: usize) -> Self {
        ScalarExpr::new(Node::Coord {
            name: name.into(),
            index,
        })
    }

    fn as_const(&self) -> Option<f64> {
        match &*self.0 {
            Node::Num(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero_const(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    // Smart constructors: fold additive/multiplicative identities so that
    // programmatically composed fields (deformations, warps, symbolic
    // derivatives) stay readable when serialized. Parsed text is never
    // folded, which keeps print/reparse round-trips exact.

    pub fn add(&self, other: &ScalarExpr) -> ScalarExpr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => ScalarExpr::constant(a + b),
            (Some(0.0), _) => other.clone(),
            (_, Some(0.0)) => self.clone(),
            _ => ScalarExpr::new(Node::Add(self.clone(), other.clone())),
        }
    }

    pub fn sub(&self, other: &ScalarExpr) -> ScalarExpr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => ScalarExpr::constant(a - b),
            (_, Some(0.0)) => self.clone(),
            (Some(0.0), _) => other.neg(),
            _ => ScalarExpr::new(Node::Sub(self.clone(), other.clone())),
        }
    }

    pub fn mul(&self, other: &ScalarExpr) -> ScalarExpr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => ScalarExpr::constant(a * b),
            (Some(0.0), _) | (_, Some(0.0)) => ScalarExpr::zero(),
            (Some(1.0), _) => other.clone(),
            (_, Some(1.0)) => self.clone(),
            _ => ScalarExpr::new(Node::Mul(self.clone(), other.clone())),
        }
    }

    pub fn div(&self, other: &ScalarExpr) -> ScalarExpr {
        match (self.as_const(), other.as_const()) {
            (Some(0.0), _) => ScalarExpr::zero(),
            (_, Some(1.0)) => self.clone(),
            _ => ScalarExpr::new(Node::Div(self.clone(), other.clone())),
        }
    }

    pub fn neg(&self) -> ScalarExpr {
        match &*self.0 {
            Node::Num(c) => ScalarExpr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => ScalarExpr::new(Node::Neg(self.clone())),
        }
    }

    pub fn powi(&self, k: i32) -> ScalarExpr {
        match k {
            0 => ScalarExpr::one(),
            1 => self.clone(),
            _ => ScalarExpr::new(Node::PowI(self.clone(), k)),
        }
    }

    pub fn powf(&self, r: f64) -> ScalarExpr {
        ScalarExpr::new(Node::PowF(self.clone(), r))
    }

    pub fn apply(&self, func: Func) -> ScalarExpr {
        ScalarExpr::new(Node::Apply(func, self.clone()))
    }

    pub fn scale(&self, c: f64) -> ScalarExpr {
        self.mul(&ScalarExpr::constant(c))
    }

    /// Rebuilds the tree with coordinate indices taken from `map[old_index]`,
    /// renaming to `names[new_index]`. Used when embedding a fiber expression
    /// into a product chart.
    pub fn remap(&self, map: &[usize], names: &[String]) -> ScalarExpr {
        match &*self.0 {
            Node::Num(c) => ScalarExpr::constant(*c),
            Node::Coord { index, .. } => {
                let new = map[*index];
                ScalarExpr::coord(names[new].clone(), new)
            }
            Node::Add(a, b) => ScalarExpr::new(Node::Add(a.remap(map, names), b.remap(map, names))),
            Node::Sub(a, b) => ScalarExpr::new(Node::Sub(a.remap(map, names), b.remap(map, names))),
            Node::Mul(a, b) => ScalarExpr::new(Node::Mul(a.remap(map, names), b.remap(map, names))),
            Node::Div(a, b) => ScalarExpr::new(Node::Div(a.remap(map, names), b.remap(map, names))),
            Node::Neg(a) => ScalarExpr::new(Node::Neg(a.remap(map, names))),
            Node::PowI(a, k) => ScalarExpr::new(Node::PowI(a.remap(map, names), *k)),
            Node::PowF(a, r) => ScalarExpr::new(Node::PowF(a.remap(map, names), *r)),
            Node::Apply(f, a) => ScalarExpr::new(Node::Apply(*f, a.remap(map, names))),
        }
    }

    /// Exact symbolic partial derivative with respect to coordinate `index`.
    ///
    /// Used to build derived component fields (gradient one-forms, exterior
    /// derivatives of constructed forms, predicted characteristic functions);
    /// pointwise evaluation still goes through jets.
    pub fn diff(&self, index: usize) -> ScalarExpr {
        match &*self.0 {
            Node::Num(_) => ScalarExpr::zero(),
            Node::Coord { index: i, .. } => {
                if *i == index {
                    ScalarExpr::one()
                } else {
                    ScalarExpr::zero()
                }
            }
            Node::Add(a, b) => a.diff(index).add(&b.diff(index)),
            Node::Sub(a, b) => a.diff(index).sub(&b.diff(index)),
            Node::Mul(a, b) => a.diff(index).mul(b).add(&a.mul(&b.diff(index))),
            Node::Div(a, b) => {
                let num = a.diff(index).mul(b).sub(&a.mul(&b.diff(index)));
                num.div(&b.mul(b))
            }
            Node::Neg(a) => a.diff(index).neg(),
            Node::PowI(a, k) => a.powi(k - 1).scale(f64::from(*k)).mul(&a.diff(index)),
            Node::PowF(a, r) => a.powf(r - 1.0).scale(*r).mul(&a.diff(index)),
            Node::Apply(f, a) => {
                let inner = a.diff(index);
                let outer = match f {
                    Func::Exp => a.apply(Func::Exp),
                    Func::Log => return inner.div(a),
                    Func::Sin => a.apply(Func::Cos),
                    Func::Cos => a.apply(Func::Sin).neg(),
                    Func::Tan => ScalarExpr::one().add(&a.apply(Func::Tan).powi(2)),
                    Func::Sinh => a.apply(Func::Cosh),
                    Func::Cosh => a.apply(Func::Sinh),
                    Func::Sqrt => {
                        return inner.div(&a.apply(Func::Sqrt).scale(2.0));
                    }
                };
                outer.mul(&inner)
            }
        }
    }

    /// Value-only evaluation (no derivative propagation).
    pub fn eval_value(&self, point: &[f64]) -> Result<f64> {
        let v = self.eval_value_inner(point)?;
        if !v.is_finite() {
            return Err(FmanError::Domain(format!("non-finite value in `{self}`")));
        }
        Ok(v)
    }

    fn eval_value_inner(&self, p: &[f64]) -> Result<f64> {
        let v = match &*self.0 {
            Node::Num(c) => *c,
            Node::Coord { index, name } => *p.get(*index).ok_or_else(|| {
                FmanError::Shape(format!("point has no coordinate {name} (index {index})"))
            })?,
            Node::Add(a, b) => a.eval_value_inner(p)? + b.eval_value_inner(p)?,
            Node::Sub(a, b) => a.eval_value_inner(p)? - b.eval_value_inner(p)?,
            Node::Mul(a, b) => a.eval_value_inner(p)? * b.eval_value_inner(p)?,
            Node::Div(a, b) => {
                let den = b.eval_value_inner(p)?;
                jet::check_divisor(den)?;
                a.eval_value_inner(p)? / den
            }
            Node::Neg(a) => -a.eval_value_inner(p)?,
            Node::PowI(a, k) => {
                let base = a.eval_value_inner(p)?;
                if *k < 0 {
                    jet::check_divisor(base)?;
                }
                base.powi(*k)
            }
            Node::PowF(a, r) => {
                let base = a.eval_value_inner(p)?;
                jet::check_positive(base, "pow with real exponent")?;
                base.powf(*r)
            }
            Node::Apply(f, a) => {
                let v = a.eval_value_inner(p)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => {
                        jet::check_positive(v, "log")?;
                        v.ln()
                    }
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Tan => v.tan(),
                    Func::Sinh => v.sinh(),
                    Func::Cosh => v.cosh(),
                    Func::Sqrt => {
                        jet::check_positive(v, "sqrt")?;
                        v.sqrt()
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(FmanError::Domain("non-finite intermediate value".into()))
        }
    }

    /// Evaluates value, gradient and Hessian at `point` (length = chart dim).
    pub fn eval_jet2(&self, point: &[f64]) -> Result<Jet2> {
        let jet = self.eval_jet2_inner(point)?;
        jet.check_finite()?;
        Ok(jet)
    }

    fn eval_jet2_inner(&self, p: &[f64]) -> Result<Jet2> {
        let m = p.len();
        match &*self.0 {
            Node::Num(c) => Ok(Jet2::constant(*c, m)),
            Node::Coord { index, name } => {
                let v = *p.get(*index).ok_or_else(|| {
                    FmanError::Shape(format!("point has no coordinate {name} (index {index})"))
                })?;
                Ok(Jet2::variable(v, *index, m))
            }
            Node::Add(a, b) => Ok(a.eval_jet2_inner(p)?.add(&b.eval_jet2_inner(p)?)),
            Node::Sub(a, b) => Ok(a.eval_jet2_inner(p)?.sub(&b.eval_jet2_inner(p)?)),
            Node::Mul(a, b) => Ok(a.eval_jet2_inner(p)?.mul(&b.eval_jet2_inner(p)?)),
            Node::Div(a, b) => a.eval_jet2_inner(p)?.div(&b.eval_jet2_inner(p)?),
            Node::Neg(a) => Ok(a.eval_jet2_inner(p)?.neg()),
            Node::PowI(a, k) => a.eval_jet2_inner(p)?.powi(*k),
            Node::PowF(a, r) => a.eval_jet2_inner(p)?.powf(*r),
            Node::Apply(f, a) => a.eval_jet2_inner(p)?.apply(*f),
        }
    }

    fn precedence(&self) -> u8 {
        match &*self.0 {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(..) => 3,
            Node::PowI(..) | Node::PowF(..) => 4,
            Node::Num(c) if *c < 0.0 => 3,
            Node::Num(_) | Node::Coord { .. } | Node::Apply(..) => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        let paren = prec < min;
        if paren {
            write!(f, "(")?;
        }
        match &*self.0 {
            Node::Num(c) => write!(f, "{c:?}")?,
            Node::Coord { name, .. } => write!(f, "{name}")?,
            Node::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Node::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Node::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Node::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)?;
            }
            Node::Neg(a) => {
                // The grammar binds `^` after unary minus, so any non-atomic
                // child needs parentheses to survive a reparse.
                write!(f, "-")?;
                a.fmt_prec(f, 5)?;
            }
            Node::PowI(a, k) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^{k}")?;
            }
            Node::PowF(a, r) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^{r:?}")?;
            }
            Node::Apply(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;

    fn chart3() -> Chart {
        Chart::new(1, 1, &["t1", "x1", "y1"], &[(-1.0, 1.0); 3]).unwrap()
    }

    #[test]
    fn expressions_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<ScalarExpr>();
        let c = chart3();
        let e = std::sync::Arc::new(parse_expr("exp(t1)*sin(x1) + y1^3", &c).unwrap());
        let handles: Vec<_> = (0..4)
            .map(|k| {
                let e = e.clone();
                std::thread::spawn(move || {
                    let p = [0.1 * k as f64, 0.2, -0.3];
                    e.eval_jet2(&p).unwrap().value
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
    }

    #[test]
    fn parse_constant_zero() {
        let c = chart3();
        let e = parse_expr("0", &c).unwrap();
        assert_eq!(e, ScalarExpr::constant(0.0));
    }

    #[test]
    fn parse_product_of_func_and_symbol() {
        let c = chart3();
        let e = parse_expr("exp(t1)*y1", &c).unwrap();
        match &*e.0 {
            Node::Mul(a, b) => {
                assert!(matches!(&*a.0, Node::Apply(Func::Exp, _)));
                assert!(matches!(&*b.0, Node::Coord { index: 2, .. }));
            }
            other => panic!("expected product node, got {other:?}"),
        }
    }

    #[test]
    fn division_by_zero_is_domain_error() {
        let c = chart3();
        let e = parse_expr("1/(x1-x1)", &c).unwrap();
        let err = e.eval_value(&[0.3, 0.5, -0.2]).unwrap_err();
        assert!(matches!(err, FmanError::Domain(_)));
        let err = e.eval_jet2(&[0.3, 0.5, -0.2]).unwrap_err();
        assert!(matches!(err, FmanError::Domain(_)));
    }

    #[test]
    fn jet_of_square() {
        let c = Chart::new(0, 1, &["x1"], &[(-4.0, 4.0)]).expect_err("n must be >= 1");
        drop(c);
        let chart = Chart::new(1, 1, &["x1", "a", "b"], &[(-4.0, 4.0); 3]).unwrap();
        let e = parse_expr("x1*x1", &chart).unwrap();
        let j = e.eval_jet2(&[3.0, 0.0, 0.0]).unwrap();
        assert_eq!(j.value, 9.0);
        assert_eq!(j.gradient[0], 6.0);
        assert_eq!(j.hessian[(0, 0)], 2.0);
    }

    #[test]
    fn jet_of_sin_at_zero() {
        let chart = Chart::new(1, 1, &["x1", "a", "b"], &[(-4.0, 4.0); 3]).unwrap();
        let e = parse_expr("sin(x1)", &chart).unwrap();
        let j = e.eval_jet2(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(j.value, 0.0);
        assert_eq!(j.gradient[0], 1.0);
        assert_eq!(j.hessian[(0, 0)], 0.0);
    }

    #[test]
    fn jet_of_exp_gradient() {
        let chart = chart3();
        let e = parse_expr("exp(2*t1)", &chart).unwrap();
        let j = e.eval_jet2(&[0.5, 0.0, 0.0]).unwrap();
        let expected = 2.0 * std::f64::consts::E;
        assert!((j.gradient[0] - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn diff_matches_jet_gradient() {
        let chart = chart3();
        let e = parse_expr("exp(t1)*sin(x1) + x1^3/cosh(y1)", &chart).unwrap();
        let p = [0.4, -0.7, 0.9];
        let j = e.eval_jet2(&p).unwrap();
        for i in 0..3 {
            let d = e.diff(i).eval_value(&p).unwrap();
            assert!(
                (d - j.gradient[i]).abs() <= 1e-12 * (1.0 + j.gradient[i].abs()),
                "coordinate {i}: symbolic {d} vs jet {}",
                j.gradient[i]
            );
        }
    }

    #[test]
    fn display_reparse_round_trip() {
        let chart = chart3();
        for text in [
            "1 + 2*t1 - x1/y1",
            "-t1^2",
            "exp(t1)*(x1 + y1)^3",
            "sqrt(2 + sinh(x1)^2)",
            "t1^-2 + y1^0.5",
            "1/(2*x1) - -y1",
            "tan(x1*0.25) + log(2 + t1)",
        ] {
            let e = parse_expr(text, &chart).unwrap();
            let printed = e.to_string();
            let back = parse_expr(&printed, &chart).unwrap();
            assert_eq!(e, back, "round trip failed for `{text}` -> `{printed}`");
        }
    }

    #[test]
    fn smart_constructor_round_trip() {
        let chart = chart3();
        let a = parse_expr("exp(t1)", &chart).unwrap();
        let b = parse_expr("x1 + 1", &chart).unwrap();
        let combos = [
            a.mul(&b),
            a.div(&b),
            a.sub(&b).neg(),
            a.add(&b.scale(-0.25)),
            a.powi(-3),
            b.powf(1.5),
            a.diff(0).mul(&b.diff(1)),
        ];
        for e in combos {
            let printed = e.to_string();
            let back = parse_expr(&printed, &chart).unwrap();
            assert_eq!(e, back, "round trip failed for `{printed}`");
        }
    }
}
