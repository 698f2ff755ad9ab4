//! Identity expression language: AST, parser, printer, substitution and the
//! umbral generator for linear shift identities.
//!
//! ```text
//! identity := expr ("=" expr)+ [";" cond ("," cond)*]
//! cond     := var ">=" (lin | "max(" lin ("," lin)* ")")
//! expr     := term (("+"|"-") term)*
//! term     := unary ("*" unary)*
//! unary    := "-" unary | base ["^" (uint | var | "(" lin ")")]
//! base     := int ["/" int] | "F[" lin "]" | "L[" lin "]" | "Fk{" lin "}[" lin "]"
//!           | "H{" int "," int "}[" lin "]" | "C(" lin "," lin ")"
//!           | "Sum(" var "," lin "," lin "," expr ")" | "(" expr ")" | var
//! lin      := signed integer combination such as 3n+2, 2k-1, n-k or k*n+m
//! ```
//!
//! `(-1)^e` is written as an ordinary power and becomes a sign atom.

mod ast;
mod canon;
pub mod formal;
mod lexer;
mod lin;
mod parser;
mod render;
mod subst;
mod umbral;

use thiserror::Error;

pub use ast::{ClaimedClass, Condition, Expr, Identity, Meta, ParamDecl};
pub use canon::{binomial, canonicalize, canonicalize_identity};
pub use lin::LinForm;
pub use parser::{parse_expr, parse_identity, parse_with_params};
pub use render::{render, render_conditions, render_expr, render_sides};
pub use subst::{fold_constants, instances, param_grid, substitute};
pub use umbral::{expand_umbral, UmbralVariant};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unbound variable `{name}` at {line}:{col}")]
    UnboundVariable {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("summation variable `{name}` shadows an outer variable")]
    ShadowedSumVariable { name: String },
    #[error("condition on `{name}`, which does not occur in the identity")]
    UnknownConditionVar { name: String },
    #[error("more than one condition on `{name}`")]
    DuplicateCondition { name: String },
    #[error("negative exponent in `{expr}`")]
    NegativeExponent { expr: String },
    #[error("no binding for parameter `{name}`")]
    MissingBinding { name: String },
    #[error("`{name}` is not a declared parameter")]
    UnknownParam { name: String },
    #[error("{name} = {value} is outside its range {lo}..{hi}")]
    OutOfRange {
        name: String,
        value: i64,
        lo: i64,
        hi: i64,
    },
}
