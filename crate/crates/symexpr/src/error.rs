use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("function `{name}` called with {found} argument(s) at byte {offset}, but it takes {expected}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        offset: usize,
    },
    #[error("exponent must be a rational constant")]
    NonConstantExponent,
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("no numeric implementation for `{0}`")]
    MissingFunction(String),
    #[error("pole: denominator magnitude {0:e} below 1e-300")]
    Pole(f64),
}
