use std::fmt;

use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Metric,
    Structure,
}

impl Field {
    fn name(self) -> &'static str {
        match self {
            Field::Metric => "g",
            Field::Structure => "J",
        }
    }
}

/// Where a map lands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// The chart declared by the same config.
    SelfChart,
    /// Flat `Rⁿ`; carries the standard structure when `n` is even.
    Euclidean(usize),
    /// `CPⁿ` in its affine chart with the Fubini–Study metric.
    Projective(usize),
}

impl Target {
    /// Number of real components a map into this target has.
    pub fn dim(self, source_dim: usize) -> usize {
        match self {
            Target::SelfChart => source_dim,
            Target::Euclidean(n) => n,
            Target::Projective(n) => 2 * n,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::SelfChart => write!(f, "self"),
            Target::Euclidean(n) => write!(f, "R{n}"),
            Target::Projective(n) => write!(f, "CP{n}"),
        }
    }
}

/// One line of a config file.
#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Dim(usize),
    Domain { axis: usize, lo: Expr, hi: Expr },
    Matrix { field: Field, rows: Vec<Vec<Expr>> },
    Entry { field: Field, i: usize, j: usize, expr: Expr },
    Map { name: String, target: Target, components: Vec<Expr> },
}

fn write_list(f: &mut fmt::Formatter<'_>, items: &[Expr]) -> fmt::Result {
    write!(f, "[")?;
    for (k, e) in items.iter().enumerate() {
        if k > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{e}")?;
    }
    write!(f, "]")
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Dim(d) => write!(f, "dim = {d}"),
            Statement::Domain { axis, lo, hi } => write!(f, "domain x{} in [{lo}, {hi}]", axis + 1),
            Statement::Matrix { field, rows } => {
                write!(f, "{} = [", field.name())?;
                for (k, row) in rows.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write_list(f, row)?;
                }
                write!(f, "]")
            }
            Statement::Entry { field, i, j, expr } => write!(f, "{}[{}][{}] = {expr}", field.name(), i + 1, j + 1),
            Statement::Map {
                name,
                target,
                components,
            } => {
                write!(f, "map {name} : {target} = ")?;
                write_list(f, components)
            }
        }
    }
}
