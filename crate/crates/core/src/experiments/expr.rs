//! Closed-form data in `x` and `t`, e.g. `-10*sin(pi*x)` or `1 + exp(-t)`.
//!
//! Supports `+ - * / ^`, parentheses, numeric literals, `pi`, `e` and the
//! usual elementary functions (`sin`, `cos`, `exp`, ...).

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone)]
pub struct Expression {
    source: String,
    expr: meval::Expr,
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Expression").field(&self.source).finish()
    }
}

impl Expression {
    /// Parses `source` and checks that it mentions no variables besides `x` and `t`.
    pub fn parse(source: &str) -> Result<Self> {
        let fail = |message: String| Error::Expression {
            expr: source.to_string(),
            message,
        };
        let expr: meval::Expr = source
            .parse()
            .map_err(|e: meval::Error| fail(e.to_string()))?;
        // Binding resolves every identifier, so unknown names surface here.
        let _ = expr
            .clone()
            .bind2("x", "t")
            .map_err(|e| fail(e.to_string()))?;
        Ok(Self {
            source: source.to_string(),
            expr,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Evaluator `(x, t) -> value`.
    pub fn function(&self) -> impl Fn(f64, f64) -> f64 {
        self.expr
            .clone()
            .bind2("x", "t")
            .expect("variables checked at parse time")
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        (self.function())(x, t)
    }
}
