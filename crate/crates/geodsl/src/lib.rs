//! A small plain-text language for declaring charts, metrics, almost-complex
//! structures and maps.
//!
//! ```text
//! dim = 2
//! domain x1 in [0.2, 2.9]
//! domain x2 in [-3, 3]
//! g[2][2] = sin(x1)^2      # round sphere in polar coordinates
//! map height : R1 = [cos(x1)]
//! ```
//!
//! Statements are one per line; brackets may span lines. Expressions use
//! `+ - * / ^`, unary minus, parentheses, the coordinates `x1..xd` and the
//! functions `sin cos tan exp log sqrt atan2`. `^` is right-associative and
//! binds tighter than unary minus, so `-x1^2` is `-(x1^2)`.

pub mod ast;
mod config;
pub mod error;
pub mod expr;
mod lexer;
mod parser;

pub use ast::{Field, Statement, Target};
pub use config::{parse, parse_bytes, parse_statements, GeoConfig, MapDef, Model, MAX_SOURCE, PROBES, STRUCTURE_TOLERANCE, SYMMETRY_WARNING};
pub use error::{DslError, ErrorKind, Pos, Result};
pub use expr::{BinOp, Expr, Func};
pub use parser::{parse_expr, MAX_DEPTH, MAX_DIM};
