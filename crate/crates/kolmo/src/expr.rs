//! Closed-form data expressions such as `max(1 - x, 0)` or
//! `sin(pi*v1)*cos(x1)*exp(-t)`, over the variables `v1..vd`, `x1..xd`
//! and `t` (with `v`, `x` as aliases when `d = 1`).

use std::fmt;

type Evaluator = Box<dyn Fn(&[f64]) -> f64>;

const VARS_1D: [&str; 5] = ["v1", "x1", "t", "v", "x"];
const VARS_2D: [&str; 5] = ["v1", "v2", "x1", "x2", "t"];
const VARS_3D: [&str; 7] = ["v1", "v2", "v3", "x1", "x2", "x3", "t"];

pub const MAX_DIM: usize = 3;

pub struct Expression {
    source: String,
    dim: usize,
    eval: Evaluator,
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Expression").field("source", &self.source).field("dim", &self.dim).finish()
    }
}

impl Expression {
    pub fn parse(source: &str, dim: usize) -> Result<Self, String> {
        let vars: &'static [&'static str] = match dim {
            1 => &VARS_1D,
            2 => &VARS_2D,
            3 => &VARS_3D,
            _ => return Err(format!("expressions support dimensions 1..={MAX_DIM}, got {dim}")),
        };
        let parsed: meval::Expr = source.parse().map_err(|e| format!("cannot parse `{source}`: {e}"))?;
        let f = parsed.bindn(vars).map_err(|e| format!("in `{source}`: {e}"))?;
        Ok(Expression { source: source.to_string(), dim, eval: Box::new(f) })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, v: &[f64], x: &[f64], t: f64) -> f64 {
        match self.dim {
            1 => (self.eval)(&[v[0], x[0], t, v[0], x[0]]),
            2 => (self.eval)(&[v[0], v[1], x[0], x[1], t]),
            _ => (self.eval)(&[v[0], v[1], v[2], x[0], x[1], x[2], t]),
        }
    }
}
