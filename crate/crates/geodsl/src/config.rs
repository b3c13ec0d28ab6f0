use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use hmorph::catalog;
use hmorph::hermitian::AlmostComplexField;
use hmorph::manifold::{Chart, Domain};
use hmorph::maps::MapSpec;
use hmorph::{GeoError, Point};
use nalgebra::{DMatrix, DVector};

use crate::ast::{Field, Statement, Target};
use crate::error::{DslError, Pos, Result};
use crate::expr::Expr;
use crate::parser::Parser;

/// Asymmetry above which the metric is reported as symmetrized.
pub const SYMMETRY_WARNING: f64 = 1e-12;
/// Tolerance for `J² = −I` and `g(JX, JY) = g(X, Y)` at load-time probes.
pub const STRUCTURE_TOLERANCE: f64 = 1e-9;
/// Number of load-time probe points.
pub const PROBES: usize = 8;
/// Fraction of each domain side excluded from sampling.
const SAMPLE_INSET: f64 = 0.05;
/// Largest accepted source, in bytes.
pub const MAX_SOURCE: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct MapDef {
    pub name: String,
    pub target: Target,
    pub components: Vec<Expr>,
}

/// A parsed and load-checked config.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoConfig {
    pub statements: Vec<Statement>,
    pub dim: usize,
    pub domain: Vec<(f64, f64)>,
    /// Metric entries as written; evaluation symmetrizes.
    pub metric: Vec<Vec<Expr>>,
    pub structure: Option<Vec<Vec<Expr>>>,
    pub maps: Vec<MapDef>,
    pub warnings: Vec<String>,
}

fn invalid(pos: Pos, message: impl Into<String>) -> DslError {
    DslError::Invalid {
        pos,
        message: message.into(),
    }
}

fn identity(d: usize) -> Vec<Vec<Expr>> {
    (0..d)
        .map(|i| (0..d).map(|j| Expr::Num(if i == j { 1.0 } else { 0.0 })).collect())
        .collect()
}

fn eval_matrix(m: &[Vec<Expr>], x: &[f64]) -> Result<DMatrix<f64>> {
    let d = m.len();
    let mut out = DMatrix::zeros(d, d);
    for (i, row) in m.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            out[(i, j)] = e.eval(x)?;
        }
    }
    Ok(out)
}

/// Parses UTF-8 bytes; invalid encodings are syntax errors at the offending byte.
pub fn parse_bytes(bytes: &[u8]) -> Result<GeoConfig> {
    match std::str::from_utf8(bytes) {
        Ok(s) => parse(s),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line = 1 + valid.iter().filter(|&&b| b == b'\n').count();
            let last = valid.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
            let col = 1 + std::str::from_utf8(&valid[last..]).map_or(0, |s| s.chars().count());
            Err(DslError::Syntax {
                pos: Pos { line, col },
                expected: "valid UTF-8".into(),
            })
        }
    }
}

fn statements_with_positions(src: &str) -> Result<(Vec<Statement>, Vec<Pos>, Option<usize>)> {
    if src.len() > MAX_SOURCE {
        return Err(DslError::Syntax {
            pos: Pos { line: 1, col: 1 },
            expected: format!("at most {MAX_SOURCE} bytes of input"),
        });
    }
    let mut p = Parser::new(src, None)?;
    let mut statements = Vec::new();
    let mut positions = Vec::new();
    while let Some((s, pos)) = p.statement()? {
        statements.push(s);
        positions.push(pos);
    }
    Ok((statements, positions, p.dim))
}

/// Syntax-level parse: statements only, without semantic or numerical checks.
pub fn parse_statements(src: &str) -> Result<Vec<Statement>> {
    Ok(statements_with_positions(src)?.0)
}

/// Parses and load-checks a config.
pub fn parse(src: &str) -> Result<GeoConfig> {
    let (statements, positions, dim) = statements_with_positions(src)?;
    let end = positions.last().copied().unwrap_or(Pos { line: 1, col: 1 });
    let dim = dim.ok_or_else(|| invalid(end, "missing `dim` declaration"))?;
    let mut domain: Vec<Option<(f64, f64)>> = vec![None; dim];
    let mut metric = identity(dim);
    let mut structure: Option<Vec<Vec<Expr>>> = None;
    let mut maps: Vec<MapDef> = Vec::new();
    let mut names = HashSet::new();
    for (s, &pos) in statements.iter().zip(&positions) {
        match s {
            Statement::Dim(_) => {}
            Statement::Domain { axis, lo, hi } => {
                if domain[*axis].is_some() {
                    return Err(invalid(pos, format!("domain of x{} declared twice", axis + 1)));
                }
                if lo.arity() > 0 || hi.arity() > 0 {
                    return Err(invalid(pos, "domain bounds must be constant"));
                }
                let (a, b) = (lo.eval(&[])?, hi.eval(&[])?);
                if a >= b {
                    return Err(invalid(pos, format!("empty domain [{a}, {b}]")));
                }
                domain[*axis] = Some((a, b));
            }
            Statement::Matrix { field, rows } => match field {
                Field::Metric => metric = rows.clone(),
                Field::Structure => structure = Some(rows.clone()),
            },
            Statement::Entry { field, i, j, expr } => {
                let m = match field {
                    Field::Metric => &mut metric,
                    Field::Structure => structure.get_or_insert_with(|| {
                        (0..dim).map(|_| vec![Expr::Num(0.0); dim]).collect()
                    }),
                };
                m[*i][*j] = expr.clone();
            }
            Statement::Map {
                name,
                target,
                components,
            } => {
                if !names.insert(name.clone()) {
                    return Err(invalid(pos, format!("map `{name}` declared twice")));
                }
                maps.push(MapDef {
                    name: name.clone(),
                    target: *target,
                    components: components.clone(),
                });
            }
        }
    }
    let domain = domain
        .into_iter()
        .enumerate()
        .map(|(k, b)| b.ok_or_else(|| invalid(end, format!("missing `domain x{}`", k + 1))))
        .collect::<Result<Vec<_>>>()?;
    let mut cfg = GeoConfig {
        statements,
        dim,
        domain,
        metric,
        structure,
        maps,
        warnings: Vec::new(),
    };
    cfg.load_checks()?;
    Ok(cfg)
}

impl GeoConfig {
    /// Deterministic interior probe points (a Kronecker sequence).
    pub fn probes(&self) -> Vec<Point> {
        (1..=PROBES)
            .map(|k| {
                DVector::from_iterator(
                    self.dim,
                    self.domain.iter().enumerate().map(|(i, &(lo, hi))| {
                        let alpha = ((i + 2) as f64).sqrt().fract();
                        let t = 0.1 + 0.8 * (k as f64 * alpha).fract();
                        lo + (hi - lo) * t
                    }),
                )
            })
            .collect()
    }

    pub fn sample_box(&self) -> Vec<(f64, f64)> {
        self.domain
            .iter()
            .map(|&(lo, hi)| (lo + SAMPLE_INSET * (hi - lo), hi - SAMPLE_INSET * (hi - lo)))
            .collect()
    }

    /// `(g + gᵀ)/2` at `x`.
    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = eval_matrix(&self.metric, x)?;
        Ok((&g + g.transpose()) * 0.5)
    }

    pub fn structure_at(&self, x: &[f64]) -> Result<Option<DMatrix<f64>>> {
        self.structure.as_ref().map(|m| eval_matrix(m, x)).transpose()
    }

    fn load_checks(&mut self) -> Result<()> {
        let d = self.dim;
        let mut worst_asym: f64 = 0.0;
        for x in self.probes() {
            let x = x.as_slice();
            let raw = eval_matrix(&self.metric, x)?;
            worst_asym = worst_asym.max((&raw - raw.transpose()).amax());
            let g = (&raw + raw.transpose()) * 0.5;
            let min_eig = g.clone().symmetric_eigen().eigenvalues.min();
            if min_eig.is_nan() || min_eig <= 0.0 {
                return Err(DslError::Evaluation(format!(
                    "metric is not positive definite at {x:?} (smallest eigenvalue {min_eig})"
                )));
            }
            if let Some(j) = self.structure_at(x)? {
                if !d.is_multiple_of(2) {
                    return Err(DslError::Evaluation(format!("J given in odd dimension {d}")));
                }
                let square = (&j * &j + DMatrix::identity(d, d)).amax();
                if square > STRUCTURE_TOLERANCE * (1.0 + j.amax() * j.amax()) {
                    return Err(DslError::Evaluation(format!("J² ≠ −I at {x:?} (defect {square:.3e})")));
                }
                let compat = (j.transpose() * &g * &j - &g).amax();
                if compat > STRUCTURE_TOLERANCE * (1.0 + g.amax()) * (1.0 + j.amax() * j.amax()) {
                    return Err(DslError::Evaluation(format!(
                        "J is not g-orthogonal at {x:?} (defect {compat:.3e})"
                    )));
                }
            }
            for m in &self.maps {
                for c in &m.components {
                    c.eval(x)?;
                }
            }
        }
        if worst_asym > SYMMETRY_WARNING {
            self.warnings.push(format!(
                "metric is not symmetric (asymmetry {worst_asym:.3e} at probes); using (g + gᵀ)/2"
            ));
        }
        Ok(())
    }

    /// Builds the chart, the structure (when `J` is given) and all maps.
    pub fn model(&self) -> Model {
        let me = Arc::new(self.clone());
        let metric_cfg = me.clone();
        let chart_on = |name: &str, domain: Domain| {
            let c = metric_cfg.clone();
            Arc::new(Chart::intrinsic(name, domain, self.sample_box(), move |x| {
                c.metric_at(x.as_slice()).map_err(to_geo)
            }))
        };
        let structure_on = |chart: &Arc<Chart>| {
            self.structure.as_ref().map(|_| {
                let c = me.clone();
                AlmostComplexField::intrinsic(chart.clone(), move |x| {
                    c.structure_at(x.as_slice())
                        .map_err(to_geo)?
                        .ok_or(GeoError::MissingStructure("config J"))
                })
            })
        };
        let chart = chart_on("config", Domain::boxed(self.domain.clone()));
        let structure = structure_on(&chart);
        // Images of `self` maps may leave the sampling box; the fields stay
        // defined wherever their expressions evaluate.
        let image = chart_on("config-image", Domain::unbounded(self.dim));
        let image_structure = structure_on(&image);
        let maps = self
            .maps
            .iter()
            .map(|def| {
                let (target, target_j) = match def.target {
                    Target::SelfChart => (image.clone(), image_structure.clone()),
                    Target::Euclidean(n) => {
                        let t = Arc::new(Chart::euclidean(
                            format!("R{n}"),
                            Domain::unbounded(n),
                            vec![(-1.0, 1.0); n],
                        ));
                        let j = (n % 2 == 0).then(|| AlmostComplexField::standard(t.clone()));
                        (t, j)
                    }
                    Target::Projective(n) => {
                        let e = catalog::complex_projective(n);
                        (e.chart, e.structure)
                    }
                };
                let comps = Arc::new(def.components.clone());
                let mut spec = MapSpec::new(def.name.clone(), chart.clone(), target, move |x| {
                    let v = comps
                        .iter()
                        .map(|c| c.eval(x.as_slice()))
                        .collect::<Result<Vec<f64>>>()
                        .map_err(to_geo)?;
                    Ok(DVector::from_vec(v))
                });
                if let Some(j) = &structure {
                    spec = spec.with_source_structure(j.clone());
                }
                if let Some(j) = target_j {
                    spec = spec.with_target_structure(j);
                }
                spec
            })
            .collect();
        Model { chart, structure, maps }
    }
}

fn to_geo(e: DslError) -> GeoError {
    GeoError::Evaluation(e.to_string())
}

/// Geometry objects built from a config.
#[derive(Clone)]
pub struct Model {
    pub chart: Arc<Chart>,
    pub structure: Option<AlmostComplexField>,
    pub maps: Vec<MapSpec>,
}

impl Model {
    pub fn map(&self, name: &str) -> Option<&MapSpec> {
        self.maps.iter().find(|m| m.name == name)
    }
}

impl fmt::Display for GeoConfig {
    /// Canonical form: one statement per line, comments dropped.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}
