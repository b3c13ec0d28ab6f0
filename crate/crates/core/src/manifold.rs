//! Charts, vector fields and the Levi-Civita connection in coordinates.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeoError, Result};
use crate::numdiff::{gradient_components, jacobian, DiffConfig, Point};

pub type Constraint = Arc<dyn Fn(&Point) -> bool + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Point) -> Result<DVector<f64>> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&Point) -> Result<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&Point) -> Result<DMatrix<f64>> + Send + Sync>;

/// Coordinate domain: an axis-aligned box (bounds may be infinite) with an
/// optional extra constraint.
#[derive(Clone)]
pub struct Domain {
    bounds: Vec<(f64, f64)>,
    constraint: Option<Constraint>,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("bounds", &self.bounds)
            .field("constrained", &self.constraint.is_some())
            .finish()
    }
}

impl Domain {
    pub fn unbounded(dim: usize) -> Self {
        Self {
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); dim],
            constraint: None,
        }
    }

    pub fn boxed(bounds: Vec<(f64, f64)>) -> Self {
        Self {
            bounds,
            constraint: None,
        }
    }

    pub fn with_constraint(mut self, constraint: impl Fn(&Point) -> bool + Send + Sync + 'static) -> Self {
        self.constraint = Some(Arc::new(constraint));
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.len() == self.bounds.len()
            && x.iter().zip(&self.bounds).all(|(v, (lo, hi))| v.is_finite() && *v > *lo && *v < *hi)
            && self.constraint.as_ref().is_none_or(|c| c(x))
    }
}

/// Where a chart's metric comes from.
#[derive(Clone)]
pub enum MetricSource {
    /// Metric supplied directly as a field of symmetric arrays.
    Intrinsic(MatrixFn),
    /// Parametrization into Euclidean space; the metric is `Dψᵀ·Dψ`.
    Embedded { ambient_dim: usize, param: VectorFn },
}

/// A coordinate chart carrying a Riemannian metric.
#[derive(Clone)]
pub struct Chart {
    pub name: String,
    pub dim: usize,
    pub domain: Domain,
    /// Finite box that sample plans draw from; always inside `domain`.
    pub sample_box: Vec<(f64, f64)>,
    pub source: MetricSource,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.source {
            MetricSource::Intrinsic(_) => "intrinsic".to_string(),
            MetricSource::Embedded { ambient_dim, .. } => format!("embedded in R^{ambient_dim}"),
        };
        f.debug_struct("Chart")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("source", &kind)
            .field("sample_box", &self.sample_box)
            .finish()
    }
}

impl Chart {
    pub fn intrinsic(
        name: impl Into<String>,
        domain: Domain,
        sample_box: Vec<(f64, f64)>,
        metric: impl Fn(&Point) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim: domain.dim(),
            domain,
            sample_box,
            source: MetricSource::Intrinsic(Arc::new(metric)),
        }
    }

    pub fn embedded(
        name: impl Into<String>,
        domain: Domain,
        sample_box: Vec<(f64, f64)>,
        ambient_dim: usize,
        param: impl Fn(&Point) -> Result<DVector<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim: domain.dim(),
            domain,
            sample_box,
            source: MetricSource::Embedded {
                ambient_dim,
                param: Arc::new(param),
            },
        }
    }

    /// Flat chart with the identity metric.
    pub fn euclidean(name: impl Into<String>, domain: Domain, sample_box: Vec<(f64, f64)>) -> Self {
        let dim = domain.dim();
        Self::intrinsic(name, domain, sample_box, move |_| Ok(DMatrix::identity(dim, dim)))
    }

    pub fn is_embedded(&self) -> bool {
        matches!(self.source, MetricSource::Embedded { .. })
    }

    pub fn metric(&self, x: &Point, cfg: &DiffConfig) -> Result<DMatrix<f64>> {
        match &self.source {
            MetricSource::Intrinsic(g) => g(x),
            MetricSource::Embedded { param, .. } => {
                let dpsi = jacobian(|y| param(y), &self.domain, x, cfg)?;
                Ok(dpsi.transpose() * &dpsi)
            }
        }
    }

    pub fn metric_inverse(&self, x: &Point, cfg: &DiffConfig) -> Result<DMatrix<f64>> {
        let g = self.metric(x, cfg)?;
        invert_spd(&g).ok_or_else(|| GeoError::SingularMetric {
            point: x.iter().copied().collect(),
        })
    }

    /// Ambient position of a point of an embedded chart.
    pub fn ambient_point(&self, x: &Point) -> Option<Result<DVector<f64>>> {
        match &self.source {
            MetricSource::Embedded { param, .. } => Some(param(x)),
            MetricSource::Intrinsic(_) => None,
        }
    }

    /// Checks the metric invariants at `x`: symmetric to 1e-12 (relative) and
    /// positive-definite.
    pub fn check_metric_at(&self, x: &Point, cfg: &DiffConfig) -> Result<()> {
        let g = self.metric(x, cfg)?;
        let asym = (&g - g.transpose()).amax();
        let singular = || GeoError::SingularMetric {
            point: x.iter().copied().collect(),
        };
        if asym > 1e-12 * g.amax().max(1.0) {
            return Err(singular());
        }
        let sym = (&g + g.transpose()) * 0.5;
        let eig = sym.symmetric_eigenvalues();
        if eig.min() <= 0.0 || !eig.iter().all(|v| v.is_finite()) {
            return Err(singular());
        }
        Ok(())
    }
}

pub(crate) fn invert_spd(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if !g.iter().all(|v| v.is_finite()) {
        return None;
    }
    let chol = g.clone().cholesky()?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    // condition number above 1e12 counts as singular
    if lo.is_nan() || lo <= hi * 1e-6 {
        return None;
    }
    Some(chol.inverse())
}

/// A vector field on a chart, in coordinate components.
#[derive(Clone)]
pub struct VectorField {
    pub chart: Arc<Chart>,
    eval: VectorFn,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField").field("chart", &self.chart.name).finish()
    }
}

impl VectorField {
    pub fn new(chart: Arc<Chart>, eval: impl Fn(&Point) -> Result<DVector<f64>> + Send + Sync + 'static) -> Self {
        Self {
            chart,
            eval: Arc::new(eval),
        }
    }

    /// Extension of a single vector by constant coordinate components.
    pub fn constant(chart: Arc<Chart>, v: DVector<f64>) -> Self {
        Self::new(chart, move |_| Ok(v.clone()))
    }

    /// The coordinate field `∂_axis`.
    pub fn coordinate(chart: Arc<Chart>, axis: usize) -> Self {
        let dim = chart.dim;
        Self::constant(chart, DVector::from_fn(dim, |k, _| if k == axis { 1.0 } else { 0.0 }))
    }

    pub fn at(&self, x: &Point) -> Result<DVector<f64>> {
        (self.eval)(x)
    }

    /// Pointwise product `f·X`.
    pub fn scaled(&self, f: ScalarFn) -> Self {
        let inner = self.eval.clone();
        Self::new(self.chart.clone(), move |x| Ok(inner(x)? * f(x)?))
    }
}

/// Christoffel symbols `Γ^k_{ij}` of the Levi-Civita connection at a point.
#[derive(Debug, Clone)]
pub struct Christoffel {
    pub point: Point,
    /// `symbols[k][(i, j)] = Γ^k_{ij}`.
    pub symbols: Vec<DMatrix<f64>>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.symbols.len()
    }

    /// `Γ(u, v)^k = Γ^k_{ij} u^i v^j`.
    pub fn contract(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.symbols.iter().map(|s| (u.transpose() * s * v)[(0, 0)]))
    }

    /// The matrix `(Γ_i)^k_j = Γ^k_{ij}` acting on a vector as `v ↦ Γ(∂_i, v)`.
    pub fn along(&self, i: usize) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |k, j| self.symbols[k][(i, j)])
    }

    /// Largest entry, used as a magnitude for scale-aware tolerances.
    pub fn magnitude(&self) -> f64 {
        self.symbols.iter().map(|s| s.amax()).fold(0.0, f64::max)
    }
}

/// Levi-Civita Christoffel symbols from finite differences of the metric.
pub fn christoffel(chart: &Chart, x: &Point, cfg: &DiffConfig) -> Result<Christoffel> {
    let d = chart.dim;
    let ginv = chart.metric_inverse(x, cfg)?;
    let dg: Vec<DMatrix<f64>> = gradient_components(|y| chart.metric(y, cfg), &chart.domain, x, cfg)?;
    // lowered[l][(i,j)] = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let lowered: Vec<DMatrix<f64>> = (0..d)
        .map(|l| DMatrix::from_fn(d, d, |i, j| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])))
        .collect();
    let symbols = (0..d)
        .map(|k| {
            let raw = DMatrix::from_fn(d, d, |i, j| (0..d).map(|l| ginv[(k, l)] * lowered[l][(i, j)]).sum::<f64>());
            (&raw + raw.transpose()) * 0.5
        })
        .collect();
    Ok(Christoffel {
        point: x.clone(),
        symbols,
    })
}

/// `Σ_i v^i ∂_i F` for a vector field `F` given as a closure.
pub(crate) fn directional<F>(f: F, chart: &Chart, x: &Point, v: &DVector<f64>, cfg: &DiffConfig) -> Result<DVector<f64>>
where
    F: Fn(&Point) -> Result<DVector<f64>>,
{
    let mut out: Option<DVector<f64>> = None;
    for (i, &vi) in v.iter().enumerate() {
        if vi == 0.0 {
            continue;
        }
        let di: DVector<f64> = crate::numdiff::partial(&f, &chart.domain, x, i, cfg)?;
        match out.as_mut() {
            Some(acc) => acc.axpy(vi, &di, 1.0),
            None => out = Some(di * vi),
        }
    }
    match out {
        Some(o) => Ok(o),
        None => Ok(DVector::zeros(f(x)?.len())),
    }
}

/// `(∇_X Y)^k = X^i ∂_i Y^k + Γ^k_{ij} X^i Y^j` at `x`.
pub fn covariant_derivative(xf: &VectorField, yf: &VectorField, x: &Point, cfg: &DiffConfig) -> Result<DVector<f64>> {
    let chart = &xf.chart;
    let xv = xf.at(x)?;
    let yv = yf.at(x)?;
    let gamma = christoffel(chart, x, cfg)?;
    let dy = directional(|p| yf.at(p), chart, x, &xv, cfg)?;
    Ok(dy + gamma.contract(&xv, &yv))
}

/// Covariant derivative of a field along a fixed vector, reusing precomputed symbols.
pub(crate) fn covariant_along(
    chart: &Chart,
    gamma: &Christoffel,
    field: impl Fn(&Point) -> Result<DVector<f64>>,
    x: &Point,
    v: &DVector<f64>,
    cfg: &DiffConfig,
) -> Result<DVector<f64>> {
    let y = field(x)?;
    let dy = directional(&field, chart, x, v, cfg)?;
    Ok(dy + gamma.contract(v, &y))
}

/// `[X,Y]^k = X^i ∂_i Y^k − Y^i ∂_i X^k` at `x`.
pub fn lie_bracket(xf: &VectorField, yf: &VectorField, x: &Point, cfg: &DiffConfig) -> Result<DVector<f64>> {
    let chart = &xf.chart;
    let xv = xf.at(x)?;
    let yv = yf.at(x)?;
    let dy = directional(|p| yf.at(p), chart, x, &xv, cfg)?;
    let dx = directional(|p| xf.at(p), chart, x, &yv, cfg)?;
    Ok(dy - dx)
}

/// Riemannian gradient `(grad f)^k = g^{kl} ∂_l f`.
pub fn gradient(chart: &Chart, f: impl Fn(&Point) -> Result<f64>, x: &Point, cfg: &DiffConfig) -> Result<DVector<f64>> {
    let ginv = chart.metric_inverse(x, cfg)?;
    let df: Vec<f64> = gradient_components(f, &chart.domain, x, cfg)?;
    Ok(ginv * DVector::from_vec(df))
}

/// Chart data derived from an embedding at one point.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub jacobian: DMatrix<f64>,
    pub metric: DMatrix<f64>,
    /// `(DψᵀDψ)⁻¹Dψᵀ`: ambient vectors to chart components.
    pub projection: DMatrix<f64>,
}

/// Metric and tangent projection of the parametrization `psi` at `x`.
pub fn embedded_pullbacks(
    psi: impl Fn(&Point) -> Result<DVector<f64>>,
    domain: &Domain,
    x: &Point,
    cfg: &DiffConfig,
) -> Result<Pullback> {
    let dpsi = jacobian(psi, domain, x, cfg)?;
    let metric = dpsi.transpose() * &dpsi;
    let d = metric.nrows();
    let ginv = invert_spd(&metric).ok_or(GeoError::RankDeficient {
        found: dpsi.clone().svd(false, false).rank(1e-9 * dpsi.amax()),
        required: d,
    })?;
    let projection = ginv * dpsi.transpose();
    Ok(Pullback {
        jacobian: dpsi,
        metric,
        projection,
    })
}

impl Chart {
    /// [`embedded_pullbacks`] of this chart's parametrization.
    pub fn pullback(&self, x: &Point, cfg: &DiffConfig) -> Result<Pullback> {
        match &self.source {
            MetricSource::Embedded { param, .. } => embedded_pullbacks(|y| param(y), &self.domain, x, cfg),
            MetricSource::Intrinsic(_) => Err(GeoError::InvalidConfig(format!(
                "chart `{}` is not embedded",
                self.name
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(v: &[f64]) -> Point {
        DVector::from_row_slice(v)
    }

    fn flat(dim: usize) -> Arc<Chart> {
        Arc::new(Chart::euclidean("flat", Domain::unbounded(dim), vec![(-1.0, 1.0); dim]))
    }

    fn round_sphere() -> Arc<Chart> {
        Arc::new(Chart::intrinsic(
            "S2",
            Domain::boxed(vec![(0.05, 3.09), (f64::NEG_INFINITY, f64::INFINITY)]),
            vec![(0.1, 3.04), (-3.0, 3.0)],
            |x| Ok(DMatrix::from_diagonal(&pt(&[1.0, x[0].sin().powi(2)]))),
        ))
    }

    #[test]
    fn flat_christoffels_vanish() {
        let cfg = DiffConfig::default();
        let g = christoffel(&flat(2), &pt(&[0.3, 0.4]), &cfg).unwrap();
        assert_eq!(g.magnitude(), 0.0);
    }

    #[test]
    fn sphere_christoffel_closed_form() {
        let cfg = DiffConfig::default();
        let g = christoffel(&round_sphere(), &pt(&[1.0, 0.5]), &cfg).unwrap();
        // Γ^θ_{φφ} = −sinθ cosθ, Γ^φ_{θφ} = cotθ
        assert_relative_eq!(g.symbols[0][(1, 1)], -(1.0f64.sin() * 1.0f64.cos()), epsilon = 1e-8);
        assert_relative_eq!(g.symbols[1][(0, 1)], 1.0 / 1.0f64.tan(), epsilon = 1e-8);
        assert_eq!(g.symbols[1][(0, 1)], g.symbols[1][(1, 0)]);
    }

    #[test]
    fn meridians_are_geodesics() {
        let cfg = DiffConfig::default();
        let s2 = round_sphere();
        let e_theta = VectorField::coordinate(s2.clone(), 0);
        let v = covariant_derivative(&e_theta, &e_theta, &pt(&[0.8, -0.2]), &cfg).unwrap();
        assert!(v.amax() < 1e-8);
    }

    #[test]
    fn bracket_of_rotation_field() {
        let cfg = DiffConfig::default();
        let plane = flat(2);
        let rot = VectorField::new(plane.clone(), |x| Ok(pt(&[-x[1], x[0]])));
        let e1 = VectorField::coordinate(plane.clone(), 0);
        let b = lie_bracket(&rot, &e1, &pt(&[0.4, -0.7]), &cfg).unwrap();
        assert_relative_eq!(b, pt(&[0.0, -1.0]), epsilon = 1e-9);
        let c = lie_bracket(&e1, &VectorField::coordinate(plane, 1), &pt(&[0.1, 0.1]), &cfg).unwrap();
        assert_eq!(c.amax(), 0.0);
    }

    #[test]
    fn gradients() {
        let cfg = DiffConfig::default();
        let g = gradient(&flat(3), |x| Ok(x[0]), &pt(&[0.1, 0.2, 0.3]), &cfg).unwrap();
        assert_relative_eq!(g, pt(&[1.0, 0.0, 0.0]), epsilon = 1e-12);
        let g = gradient(&round_sphere(), |x| Ok(x[0]), &pt(&[1.2, 0.0]), &cfg).unwrap();
        assert_relative_eq!(g, pt(&[1.0, 0.0]), epsilon = 1e-10);
        let g = gradient(&round_sphere(), |_| Ok(2.0), &pt(&[1.2, 0.0]), &cfg).unwrap();
        assert_eq!(g.amax(), 0.0);
    }

    #[test]
    fn circle_pullback() {
        let cfg = DiffConfig::default();
        let pb = embedded_pullbacks(|x| Ok(pt(&[x[0].cos(), x[0].sin()])), &Domain::unbounded(1), &pt(&[0.9]), &cfg).unwrap();
        assert_relative_eq!(pb.metric[(0, 0)], 1.0, epsilon = 1e-10);
        assert_relative_eq!((&pb.projection * &pb.jacobian)[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_pullback() {
        let cfg = DiffConfig::default();
        let pb = embedded_pullbacks(|x| Ok(x.clone()), &Domain::unbounded(2), &pt(&[0.2, 0.9]), &cfg).unwrap();
        assert_relative_eq!(pb.metric, DMatrix::identity(2, 2), epsilon = 1e-12);
        assert_relative_eq!(pb.projection, DMatrix::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn degenerate_embedding_is_rank_deficient() {
        let cfg = DiffConfig::default();
        let err = embedded_pullbacks(|x| Ok(pt(&[x[0] + x[1], x[0] + x[1]])), &Domain::unbounded(2), &pt(&[0.0, 0.0]), &cfg)
            .unwrap_err();
        assert!(matches!(err, GeoError::RankDeficient { .. }));
    }

    #[test]
    fn singular_metric_detected() {
        let chart = Chart::intrinsic("bad", Domain::unbounded(2), vec![(-1.0, 1.0); 2], |_| {
            Ok(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]))
        });
        let err = chart.metric_inverse(&pt(&[0.0, 0.0]), &DiffConfig::default()).unwrap_err();
        assert!(matches!(err, GeoError::SingularMetric { .. }));
    }
}
