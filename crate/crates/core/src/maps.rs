//! Smooth maps between charts: differential, holomorphy, horizontal
//! conformality, second fundamental form and tension, fibre geometry and
//! structures lifted from the target.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::hermitian::{hermitian_frame, hermitian_frame_with_axes, lee_vector, AlmostComplexField, CVector, NablaJ, StructureSource};
use crate::manifold::{christoffel, covariant_along, directional, gradient, invert_spd, Chart, VectorFn};
use crate::numdiff::{gradient_components, jacobian, norm, orthonormalize, second_partial, DiffConfig, Point};
use crate::sampling::SamplePlan;

/// Singular values below `largest * RANK_RATIO` count as zero.
pub const RANK_RATIO: f64 = 1e-6;
/// A differential whose largest singular value is below this is treated as zero.
pub const ZERO_DIFFERENTIAL: f64 = 1e-10;

/// A smooth map between two charts, optionally with almost-complex structures.
#[derive(Clone)]
pub struct MapSpec {
    pub name: String,
    pub source: Arc<Chart>,
    pub source_j: Option<AlmostComplexField>,
    pub target: Arc<Chart>,
    pub target_j: Option<AlmostComplexField>,
    eval: VectorFn,
    pub cfg: DiffConfig,
}

impl fmt::Debug for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapSpec")
            .field("name", &self.name)
            .field("source", &self.source.name)
            .field("target", &self.target.name)
            .field("source_j", &self.source_j.is_some())
            .field("target_j", &self.target_j.is_some())
            .finish()
    }
}

impl MapSpec {
    pub fn new(
        name: impl Into<String>,
        source: Arc<Chart>,
        target: Arc<Chart>,
        eval: impl Fn(&Point) -> Result<DVector<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            source,
            source_j: None,
            target,
            target_j: None,
            eval: Arc::new(eval),
            cfg: DiffConfig::default(),
        }
    }

    pub fn with_source_structure(mut self, j: AlmostComplexField) -> Self {
        self.source_j = Some(j);
        self
    }

    pub fn with_target_structure(mut self, j: AlmostComplexField) -> Self {
        self.target_j = Some(j);
        self
    }

    pub fn with_config(mut self, cfg: DiffConfig) -> Self {
        self.cfg = cfg;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Replaces the target chart (and its structure) keeping the same formula.
    pub fn retarget(mut self, target: Arc<Chart>, target_j: Option<AlmostComplexField>) -> Self {
        self.target = target;
        self.target_j = target_j;
        self
    }

    /// `ψ ∘ φ` for a chart map `ψ` from the current target into `target`.
    pub fn post_compose(
        &self,
        name: impl Into<String>,
        target: Arc<Chart>,
        target_j: Option<AlmostComplexField>,
        psi: impl Fn(&Point) -> Result<DVector<f64>> + Send + Sync + 'static,
    ) -> Self {
        let inner = self.eval.clone();
        Self {
            name: name.into(),
            source: self.source.clone(),
            source_j: self.source_j.clone(),
            target,
            target_j,
            eval: Arc::new(move |x| psi(&inner(x)?)),
            cfg: self.cfg,
        }
    }

    /// Evaluates the map, requiring the image to lie in the target domain.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        let y = (self.eval)(x)?;
        if !self.target.domain.contains(&y) {
            return Err(GeoError::EvaluationOutsideDomain {
                point: y.iter().copied().collect(),
            });
        }
        Ok(y)
    }
}

/// `dφ_x` as a `target_dim × source_dim` array.
pub fn differential(map: &MapSpec, x: &Point) -> Result<DMatrix<f64>> {
    jacobian(|y| map.apply(y), &map.source.domain, x, &map.cfg)
}

/// `‖dφ·J − J^N·dφ‖_F` at `x`.
pub fn holomorphy_residual(map: &MapSpec, x: &Point) -> Result<f64> {
    let js = map.source_j.as_ref().ok_or(GeoError::MissingStructure("source"))?;
    let jt = map.target_j.as_ref().ok_or(GeoError::MissingStructure("target"))?;
    let dphi = differential(map, x)?;
    let y = map.apply(x)?;
    Ok((&dphi * js.at(x, &map.cfg)? - jt.at(&y, &map.cfg)? * &dphi).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    /// `dφ = 0`.
    Critical,
    /// `dφ` has full rank onto the target.
    Regular,
    /// Rank strictly between 0 and the target dimension.
    PartialRank,
}

/// Horizontal conformality data of `φ` at a point.
#[derive(Debug, Clone)]
pub struct ConformalityData {
    pub kind: PointKind,
    pub dilation: f64,
    /// `‖G − λ²I‖_F` for the horizontal Gram form `G`.
    pub conformality_residual: f64,
    pub rank: usize,
    /// Singular values of `dφ` in orthonormal frames, descending.
    pub singular_values: Vec<f64>,
    pub vertical_basis: Vec<DVector<f64>>,
    pub horizontal_basis: Vec<DVector<f64>>,
    /// Smallest retained singular value is within 10× of the rank threshold.
    pub near_critical: bool,
    pub differential: DMatrix<f64>,
}

fn orthonormal_columns(g: &DMatrix<f64>, at: &Point) -> Result<DMatrix<f64>> {
    // E = L^{-T} has g-orthonormal columns when g = L Lᵀ
    let chol = g.clone().cholesky().ok_or_else(|| GeoError::SingularMetric {
        point: at.iter().copied().collect(),
    })?;
    let linv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| GeoError::SingularMetric {
            point: at.iter().copied().collect(),
        })?;
    Ok(linv.transpose())
}

/// Kernel/horizontal split of `dφ`, dilation and conformality residual.
pub fn conformality(map: &MapSpec, x: &Point) -> Result<ConformalityData> {
    let cfg = &map.cfg;
    let dphi = differential(map, x)?;
    let y = map.apply(x)?;
    let g = map.source.metric(x, cfg)?;
    let h = map.target.metric(&y, cfg)?;
    let (n, m) = dphi.shape();
    let e = orthonormal_columns(&g, x)?;
    let hchol = h.clone().cholesky().ok_or_else(|| GeoError::SingularMetric {
        point: y.iter().copied().collect(),
    })?;
    let a = hchol.l().transpose() * &dphi * &e;
    let eig = (a.transpose() * &a).symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()).collect();
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let threshold = smax * RANK_RATIO;
    let rank = if smax <= ZERO_DIFFERENTIAL {
        0
    } else {
        singular_values.iter().filter(|&&s| s > threshold).count()
    };
    let source_vec = |i: usize| &e * eig.eigenvectors.column(order[i]);
    let horizontal_basis: Vec<DVector<f64>> = (0..rank).map(source_vec).collect();
    let vertical_basis: Vec<DVector<f64>> = (rank..m).map(source_vec).collect();
    let kind = match rank {
        0 => PointKind::Critical,
        r if r == n => PointKind::Regular,
        _ => PointKind::PartialRank,
    };
    let gram = DMatrix::from_fn(n, n, |i, j| {
        if i < rank && j < rank {
            let (u, v) = (&dphi * &horizontal_basis[i], &dphi * &horizontal_basis[j]);
            (u.transpose() * &h * v)[(0, 0)]
        } else {
            0.0
        }
    });
    let (dilation, conformality_residual) = match kind {
        PointKind::Critical => (0.0, 0.0),
        _ => {
            let lambda2 = gram.trace() / n as f64;
            let resid = (&gram - DMatrix::identity(n, n) * lambda2).norm();
            let lambda = if kind == PointKind::Regular { lambda2.sqrt() } else { 0.0 };
            (lambda, resid)
        }
    };
    let near_critical = kind == PointKind::Regular && singular_values[rank - 1] < 10.0 * threshold;
    Ok(ConformalityData {
        kind,
        dilation,
        conformality_residual,
        rank,
        singular_values,
        vertical_basis,
        horizontal_basis,
        near_critical,
        differential: dphi,
    })
}

/// `∇dφ` in coordinates at a point: `components[i][j]` is a target vector.
#[derive(Debug, Clone)]
pub struct SecondFundamentalForm {
    pub components: Vec<Vec<DVector<f64>>>,
    /// Largest entry of any single term of the formula; sets the noise scale.
    pub magnitude: f64,
    /// Per-component version of `magnitude`.
    pub term_magnitudes: Vec<Vec<f64>>,
}

impl SecondFundamentalForm {
    /// `(∇dφ)(u, v)`.
    pub fn apply(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let n = self.components[0][0].len();
        let mut out = DVector::zeros(n);
        for (i, row) in self.components.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let w = u[i] * v[j];
                if w != 0.0 {
                    out.axpy(w, c, 1.0);
                }
            }
        }
        out
    }
}

/// `(∇dφ)^γ_{ij} = ∂_i∂_jφ^γ − Γ^k_{ij}(M) ∂_kφ^γ + Γ^γ_{αβ}(N) ∂_iφ^α ∂_jφ^β`, all `i, j`.
pub fn second_fundamental_form_all(map: &MapSpec, x: &Point) -> Result<SecondFundamentalForm> {
    let cfg = &map.cfg;
    let m = map.source.dim;
    let y = map.apply(x)?;
    let dphi = differential(map, x)?;
    let gm = christoffel(&map.source, x, cfg)?;
    let gn = christoffel(&map.target, &y, cfg)?;
    let mut components = vec![vec![DVector::zeros(map.target.dim); m]; m];
    let mut term_magnitudes = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            // second differences lose precision in proportion to |φ|
            let mut magnitude: f64 = y.amax();
            let d2: DVector<f64> = second_partial(|p| map.apply(p), &map.source.domain, x, i, j, cfg)?;
            magnitude = magnitude.max(d2.amax());
            let mut c = d2;
            for k in 0..m {
                let gk = gm.symbols[k][(i, j)];
                if gk != 0.0 {
                    let t = dphi.column(k).into_owned();
                    magnitude = magnitude.max((gk * &t).amax());
                    c.axpy(-gk, &t, 1.0);
                }
            }
            let t = gn.contract(&dphi.column(i).into_owned(), &dphi.column(j).into_owned());
            magnitude = magnitude.max(t.amax());
            c += t;
            components[i][j] = c.clone();
            components[j][i] = c;
            term_magnitudes[i][j] = magnitude;
            term_magnitudes[j][i] = magnitude;
        }
    }
    let magnitude = term_magnitudes.iter().flatten().copied().fold(0.0, f64::max);
    Ok(SecondFundamentalForm {
        components,
        magnitude,
        term_magnitudes,
    })
}

/// A single component `(∇dφ)_{ij}`.
pub fn second_fundamental_form(map: &MapSpec, x: &Point, i: usize, j: usize) -> Result<DVector<f64>> {
    Ok(second_fundamental_form_all(map, x)?.components[i][j].clone())
}

/// Tension field and, when the structures allow, the Lee push-forward.
#[derive(Debug, Clone, Serialize)]
pub struct TensionData {
    pub tension: Vec<f64>,
    pub tension_norm: f64,
    /// `dφ(JδJ)`; present when both charts carry structures.
    pub lee_pushforward: Option<Vec<f64>>,
    pub lee_pushforward_norm: Option<f64>,
    /// `‖τ + dφ(JδJ)‖`; present when the target is (1,2)-symplectic at `φ(x)`.
    pub lemma_residual: Option<f64>,
    /// Pointwise (1,2)-symplectic residual of the target at `φ(x)`.
    pub target_12sympl_residual: Option<f64>,
    /// Magnitude of the terms summed into `τ` and `dφ(JδJ)`, for tolerances.
    pub scale: f64,
}

/// Tension `τ = g^{ij}(∇dφ)_{ij}`, plus `dφ(JδJ)` and the residual
/// `‖τ + dφ(JδJ)‖` when the target is (1,2)-symplectic at the image point.
pub fn tension(map: &MapSpec, x: &Point) -> Result<TensionData> {
    let cfg = &map.cfg;
    let y = map.apply(x)?;
    let ginv = map.source.metric_inverse(x, cfg)?;
    let h = map.target.metric(&y, cfg)?;
    let sff = second_fundamental_form_all(map, x)?;
    let m = map.source.dim;
    let mut tau = DVector::zeros(map.target.dim);
    for i in 0..m {
        for j in 0..m {
            if ginv[(i, j)] != 0.0 {
                tau.axpy(ginv[(i, j)], &sff.components[i][j], 1.0);
            }
        }
    }
    let tension_norm = norm(&h, &tau);
    let mut data = TensionData {
        tension: tau.iter().copied().collect(),
        tension_norm,
        lee_pushforward: None,
        lee_pushforward_norm: None,
        lemma_residual: None,
        target_12sympl_residual: None,
        scale: 1.0
            + (0..m)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .map(|(i, j)| ginv[(i, j)].abs() * sff.term_magnitudes[i][j])
                .sum::<f64>(),
    };
    if let (Some(js), Some(jt)) = (&map.source_j, &map.target_j) {
        let dphi = differential(map, x)?;
        let lee = dphi * lee_vector(js, x, cfg)?;
        let s12 = sympl12_residual_at(jt, &y, cfg)?;
        data.lee_pushforward_norm = Some(norm(&h, &lee));
        data.scale += lee.amax();
        data.target_12sympl_residual = Some(s12);
        if s12 <= cfg.tolerance(1.0) {
            data.lemma_residual = Some(norm(&h, &(&tau + &lee)));
        }
        data.lee_pushforward = Some(lee.iter().copied().collect());
    }
    Ok(data)
}

/// Pointwise `max ‖(∇_X J)Y + (∇_{JX}J)JY‖` over a Hermitian frame.
pub fn sympl12_residual_at(j: &AlmostComplexField, x: &Point, cfg: &DiffConfig) -> Result<f64> {
    let nj = NablaJ::compute(j, x, cfg)?;
    let frame = hermitian_frame(j, x, cfg)?;
    let vs = &frame.real_frame.vectors;
    let mut worst: f64 = 0.0;
    for a in vs {
        let ja = &nj.j * a;
        for b in vs {
            let s = nj.apply(a, b) + nj.apply(&ja, &(&nj.j * b));
            worst = worst.max(norm(&nj.metric, &s));
        }
    }
    Ok(worst)
}

fn coordinate_frame(chart: &Chart, y: &Point, cfg: &DiffConfig) -> Result<Vec<DVector<f64>>> {
    let d = chart.dim;
    let g = chart.metric(y, cfg)?;
    let units: Vec<DVector<f64>> = (0..d).map(|a| DVector::from_fn(d, |k, _| if k == a { 1.0 } else { 0.0 })).collect();
    Ok(orthonormalize(&units, &g)?.vectors)
}

/// Tension from `Σ_j ∇^φ_{e_j} dφ(e_j) − dφ(∇_{e_j} e_j)` with `{e_j}` the
/// Gram-Schmidt frame field of the coordinate basis. Independent of the
/// coordinate formula used by [`tension`].
pub fn tension_frame_route(map: &MapSpec, x: &Point) -> Result<DVector<f64>> {
    let cfg = &map.cfg;
    let chart = &map.source;
    let m = chart.dim;
    let y = map.apply(x)?;
    let gm = christoffel(chart, x, cfg)?;
    let gn = christoffel(&map.target, &y, cfg)?;
    let dphi = differential(map, x)?;
    let frame = coordinate_frame(chart, x, cfg)?;
    let mut tau = DVector::zeros(map.target.dim);
    for (a, ea) in frame.iter().enumerate() {
        let pushed = |p: &Point| -> Result<DVector<f64>> {
            let fa = coordinate_frame(chart, p, cfg)?;
            Ok(differential(map, p)? * &fa[a])
        };
        let field = |p: &Point| -> Result<DVector<f64>> { Ok(coordinate_frame(chart, p, cfg)?[a].clone()) };
        let first = directional(pushed, chart, x, ea, cfg)? + gn.contract(&(&dphi * ea), &(&dphi * ea));
        let nabla_ee = covariant_along(chart, &gm, field, x, ea, cfg)?;
        tau += first - &dphi * nabla_ee;
    }
    debug_assert_eq!(frame.len(), m);
    Ok(tau)
}

/// Projector onto the horizontal space, `G⁻¹dφᵀ(dφG⁻¹dφᵀ)⁻¹dφ`, and the
/// horizontal lift `G⁻¹dφᵀ(dφG⁻¹dφᵀ)⁻¹`.
fn horizontal_operators(map: &MapSpec, p: &Point) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let cfg = &map.cfg;
    let dphi = differential(map, p)?;
    let ginv = map.source.metric_inverse(p, cfg)?;
    let gram = &dphi * &ginv * dphi.transpose();
    let inv = invert_spd(&gram).ok_or_else(|| GeoError::CriticalPoint {
        point: p.iter().copied().collect(),
    })?;
    let lift = &ginv * dphi.transpose() * inv;
    let proj = &lift * &dphi;
    Ok((proj, lift))
}

fn require_regular(data: &ConformalityData, x: &Point) -> Result<()> {
    if data.kind != PointKind::Regular {
        return Err(GeoError::CriticalPoint {
            point: x.iter().copied().collect(),
        });
    }
    Ok(())
}

fn unit(d: usize, a: usize) -> DVector<f64> {
    DVector::from_fn(d, |k, _| if k == a { 1.0 } else { 0.0 })
}

/// Coordinate axes whose vertical projections best span the fibre at `x`
/// (pivoted Gram-Schmidt).
fn vertical_axes(g: &DMatrix<f64>, pv: &DMatrix<f64>, k: usize) -> Vec<usize> {
    let d = g.nrows();
    let mut chosen = Vec::with_capacity(k);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for a in (0..d).filter(|a| !chosen.contains(a)) {
            let mut w = pv * unit(d, a);
            for b in &basis {
                let c = (b.transpose() * g * &w)[(0, 0)];
                w.axpy(-c, b, 1.0);
            }
            let n = norm(g, &w);
            if best.as_ref().is_none_or(|(_, _, bn)| n > *bn) {
                best = Some((a, w, n));
            }
        }
        if let Some((a, w, n)) = best {
            chosen.push(a);
            basis.push(w / n);
        }
    }
    chosen
}

/// Orthonormal vertical frame field built from fixed coordinate axes.
fn vertical_frame(map: &MapSpec, p: &Point, axes: &[usize]) -> Result<Vec<DVector<f64>>> {
    let d = map.source.dim;
    let (ph, _) = horizontal_operators(map, p)?;
    let pv = DMatrix::identity(d, d) - ph;
    let g = map.source.metric(p, &map.cfg)?;
    let raw: Vec<DVector<f64>> = axes.iter().map(|&a| &pv * unit(d, a)).collect();
    Ok(orthonormalize(&raw, &g)?.vectors)
}

/// Mean curvature vector of the fibre through a regular point.
#[derive(Debug, Clone)]
pub struct FibreCurvature {
    /// Horizontal part of `Σ_a ∇_{v_a} v_a` (source chart components).
    pub vector: DVector<f64>,
    pub norm: f64,
    pub fibre_dim: usize,
    /// Magnitude of the frame-field derivatives and connection terms.
    pub scale: f64,
}

/// Horizontal part of `Σ_a ∇_{v_a}v_a` over a vertical orthonormal frame
/// field; vanishes iff the fibre through `x` is minimal.
pub fn fibre_mean_curvature(map: &MapSpec, x: &Point) -> Result<FibreCurvature> {
    let cfg = &map.cfg;
    let chart = &map.source;
    let d = chart.dim;
    let conf = conformality(map, x)?;
    require_regular(&conf, x)?;
    let k = d - conf.rank;
    if k == 0 {
        return Ok(FibreCurvature {
            vector: DVector::zeros(d),
            norm: 0.0,
            fibre_dim: 0,
            scale: 1.0,
        });
    }
    let g = chart.metric(x, cfg)?;
    let (ph, _) = horizontal_operators(map, x)?;
    let pv = DMatrix::identity(d, d) - &ph;
    let axes = vertical_axes(&g, &pv, k);
    let frame = vertical_frame(map, x, &axes)?;
    let stacked = |p: &Point| -> Result<DVector<f64>> {
        let f = vertical_frame(map, p, &axes)?;
        Ok(DVector::from_iterator(k * d, f.iter().flat_map(|v| v.iter().copied())))
    };
    let gamma = christoffel(chart, x, cfg)?;
    let partials: Vec<DVector<f64>> = gradient_components(stacked, &chart.domain, x, cfg)?;
    let mut sum = DVector::zeros(d);
    for (a, va) in frame.iter().enumerate() {
        let mut nab = gamma.contract(va, va);
        for (i, di) in partials.iter().enumerate() {
            if va[i] != 0.0 {
                nab.axpy(va[i], &di.rows(a * d, d).into_owned(), 1.0);
            }
        }
        sum += nab;
    }
    let vector = ph * sum;
    let n = norm(&g, &vector);
    let scale = 1.0 + gamma.magnitude() + partials.iter().map(|p| p.amax()).fold(0.0, f64::max);
    Ok(FibreCurvature {
        vector,
        norm: n,
        fibre_dim: k,
        scale,
    })
}

/// `‖dφ(grad λ²)‖` at a regular point, with `λ²` taken from [`conformality`]
/// at the stencil points.
pub fn homothety_residual_at(map: &MapSpec, x: &Point) -> Result<f64> {
    Ok(homothety_at(map, x)?.0)
}

/// [`homothety_residual_at`] together with the scale `1 + ‖dφ‖·‖grad λ²‖`.
pub fn homothety_at(map: &MapSpec, x: &Point) -> Result<(f64, f64)> {
    let conf = conformality(map, x)?;
    require_regular(&conf, x)?;
    let lambda2 = |p: &Point| -> Result<f64> { Ok(conformality(map, p)?.dilation.powi(2)) };
    let grad = gradient(&map.source, lambda2, x, &map.cfg)?;
    let y = map.apply(x)?;
    let h = map.target.metric(&y, &map.cfg)?;
    let scale = 1.0 + conf.differential.norm() * grad.norm();
    Ok((norm(&h, &(conf.differential * grad)), scale))
}

/// Maximum of [`homothety_residual_at`] over the plan.
pub fn homothety_residual(map: &MapSpec, plan: &SamplePlan) -> Result<f64> {
    let pts = plan.points(&map.source)?;
    pts.iter()
        .map(|x| homothety_residual_at(map, x))
        .try_fold(0.0f64, |acc, r| Ok(acc.max(r?)))
}

/// `max ‖(∇_V J)Y‖` over a vertical orthonormal basis `V` and an orthonormal
/// probe frame `Y` at a regular point.
pub fn superminimality_residual(map: &MapSpec, j: &AlmostComplexField, x: &Point) -> Result<f64> {
    let cfg = &map.cfg;
    let conf = conformality(map, x)?;
    require_regular(&conf, x)?;
    let nj = NablaJ::compute(j, x, cfg)?;
    let probes = coordinate_frame(&map.source, x, cfg)?;
    let mut worst: f64 = 0.0;
    for v in &conf.vertical_basis {
        let nv = nj.along(v);
        for yv in &probes {
            worst = worst.max(norm(&nj.metric, &(&nv * yv)));
        }
    }
    Ok(worst)
}

/// Pfaffian of a skew-symmetric matrix by skew LTLᵀ elimination with pivoting.
pub fn pfaffian(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n % 2 == 1 {
        return 0.0;
    }
    let mut a = a.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        for r in k + 1..n {
            if a[(r, k)].abs() > a[(kp, k)].abs() {
                kp = r;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        if a[(k + 1, k)] == 0.0 {
            return 0.0;
        }
        let pivot = a[(k, k + 1)];
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|c| a[(k, c)] / pivot).collect();
            let col: Vec<f64> = (k + 2..n).map(|r| a[(r, k + 1)]).collect();
            for (ri, r) in (k + 2..n).enumerate() {
                for (ci, c) in (k + 2..n).enumerate() {
                    a[(r, c)] += tau[ri] * col[ci] - col[ri] * tau[ci];
                }
            }
        }
        k += 2;
    }
    pf
}

/// Lifts the target structure to the source of a horizontally conformal
/// submersion with 2-dimensional fibres.
///
/// On `H` the lift is `(dφ|_H)⁻¹ ∘ J^N ∘ dφ`; on `V` it is the rotation by a
/// quarter turn. `orientation = +1` picks the rotation for which the total
/// structure induces the coordinate orientation of the source chart, `−1`
/// the opposite one.
pub fn lift_structure(map: &MapSpec, orientation: i8) -> Result<AlmostComplexField> {
    if orientation != 1 && orientation != -1 {
        return Err(GeoError::InvalidConfig(format!("orientation must be ±1, got {orientation}")));
    }
    let jt = map.target_j.clone().ok_or(GeoError::MissingStructure("target"))?;
    let (m, n) = (map.source.dim, map.target.dim);
    if m < n || m - n != 2 {
        return Err(GeoError::FibreDimension {
            found: m.saturating_sub(n),
        });
    }
    let map = map.clone();
    let chart = map.source.clone();
    let reference = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(AlmostComplexField::from_fn(
        chart,
        StructureSource::Lifted { orientation },
        move |p, cfg| {
            let map = map.clone().with_config(*cfg);
            let (ph, lift) = horizontal_operators(&map, p)?;
            let dphi = differential(&map, p)?;
            let y = map.apply(p)?;
            let jh = &lift * jt.at(&y, cfg)? * &dphi;
            let g = map.source.metric(p, cfg)?;
            let pv = DMatrix::identity(m, m) - ph;
            let axes = vertical_axes(&g, &pv, 2);
            let raw: Vec<DVector<f64>> = axes.iter().map(|&a| &pv * unit(m, a)).collect();
            let vb = orthonormalize(&raw, &g)?.vectors;
            let (v1, v2) = (&vb[0], &vb[1]);
            let rot = v2 * (&g * v1).transpose() - v1 * (&g * v2).transpose();
            let candidate = &jh + &rot;
            let pf = pfaffian(&(&g * &candidate));
            let aligned = if pf.signum() == reference { 1.0 } else { -1.0 };
            Ok(jh + rot * (aligned * orientation as f64))
        },
    ))
}

/// `max ‖([Z*,W*]^V)^{0,1}‖` at `x` over pairs of horizontal lifts of a
/// target Hermitian frame, using the source structure `j` for types.
pub fn condition_ii_residual_at(map: &MapSpec, j: &AlmostComplexField, x: &Point) -> Result<f64> {
    let cfg = &map.cfg;
    let jt = map.target_j.as_ref().ok_or(GeoError::MissingStructure("target"))?;
    let conf = conformality(map, x)?;
    require_regular(&conf, x)?;
    let y = map.apply(x)?;
    let target_frame = hermitian_frame(jt, &y, cfg)?;
    let n = target_frame.complex_dim();
    if n < 2 {
        return Ok(0.0);
    }
    let axes = target_frame.axes.clone();
    let d = map.source.dim;
    // lifted re/im parts of Z'_1..Z'_n, stacked
    let lifted = |p: &Point| -> Result<DVector<f64>> {
        let (_, lift) = horizontal_operators(map, p)?;
        let yp = map.apply(p)?;
        let f = hermitian_frame_with_axes(jt, &yp, cfg, &axes)?;
        let mut out = Vec::with_capacity(2 * n * d);
        for z in &f.complex_frame {
            out.extend((&lift * &z.re).iter().copied());
            out.extend((&lift * &z.im).iter().copied());
        }
        Ok(DVector::from_vec(out))
    };
    let base = lifted(x)?;
    let partials: Vec<DVector<f64>> = gradient_components(lifted, &map.source.domain, x, cfg)?;
    let vec_at = |idx: usize| base.rows(idx * d, d).into_owned();
    // derivative of field `idx` along vector `v`
    let deriv = |idx: usize, v: &DVector<f64>| {
        let mut out = DVector::zeros(d);
        for (i, di) in partials.iter().enumerate() {
            if v[i] != 0.0 {
                out.axpy(v[i], &di.rows(idx * d, d).into_owned(), 1.0);
            }
        }
        out
    };
    let bracket = |a: usize, b: usize| deriv(b, &vec_at(a)) - deriv(a, &vec_at(b));
    let (ph, _) = horizontal_operators(map, x)?;
    let pv = DMatrix::identity(d, d) - ph;
    let jm = j.at(x, cfg)?;
    let g = map.source.metric(x, cfg)?;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for l in k + 1..n {
            let (a, b, c, e) = (2 * k, 2 * k + 1, 2 * l, 2 * l + 1);
            // [A+iB, C+iE] = [A,C] − [B,E] + i([A,E] + [B,C])
            let re = bracket(a, c) - bracket(b, e);
            let im = bracket(a, e) + bracket(b, c);
            let vert = CVector::new(&pv * re, &pv * im);
            worst = worst.max(vert.part_01(&jm).hermitian_norm(&g));
        }
    }
    Ok(worst)
}

/// Maximum of [`condition_ii_residual_at`] over the plan.
pub fn condition_ii_residual(map: &MapSpec, j: &AlmostComplexField, plan: &SamplePlan) -> Result<f64> {
    let pts = plan.points(&map.source)?;
    pts.iter()
        .map(|x| condition_ii_residual_at(map, j, x))
        .try_fold(0.0f64, |acc, r| Ok(acc.max(r?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Domain;
    use approx::assert_relative_eq;

    fn pt(v: &[f64]) -> Point {
        DVector::from_row_slice(v)
    }

    fn plane(name: &str, dim: usize) -> Arc<Chart> {
        Arc::new(Chart::euclidean(name, Domain::unbounded(dim), vec![(-1.0, 1.0); dim]))
    }

    fn pfaffian_expansion(a: &DMatrix<f64>) -> f64 {
        let n = a.nrows();
        if n == 0 {
            return 1.0;
        }
        let mut total = 0.0;
        for j in 1..n {
            let keep: Vec<usize> = (1..n).filter(|&r| r != j).collect();
            let minor = DMatrix::from_fn(n - 2, n - 2, |r, c| a[(keep[r], keep[c])]);
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            total += sign * a[(0, j)] * pfaffian_expansion(&minor);
        }
        total
    }

    #[test]
    fn pfaffian_matches_expansion() {
        let vals = [0.3, -1.2, 0.7, 2.0, -0.4, 1.1, 0.9, -0.6, 0.25, 1.7, -2.2, 0.05, 0.8, -1.0, 0.45];
        let mut a = DMatrix::zeros(6, 6);
        let mut it = vals.iter();
        for r in 0..6 {
            for c in r + 1..6 {
                let v = *it.next().unwrap();
                a[(r, c)] = v;
                a[(c, r)] = -v;
            }
        }
        assert_relative_eq!(pfaffian(&a), pfaffian_expansion(&a), epsilon = 1e-12);
        let pf = pfaffian(&a);
        assert_relative_eq!(pf * pf, a.determinant(), epsilon = 1e-10);
    }

    #[test]
    fn identity_and_constant_maps() {
        let src = plane("R2", 2);
        let id = MapSpec::new("id", src.clone(), src.clone(), |x| Ok(x.clone()));
        let x = pt(&[0.2, -0.4]);
        assert_relative_eq!(differential(&id, &x).unwrap(), DMatrix::identity(2, 2), epsilon = 1e-12);
        let t = tension(&id, &x).unwrap();
        assert!(t.tension_norm < 1e-6, "{}", t.tension_norm);
        let c = conformality(&id, &x).unwrap();
        assert_eq!(c.kind, PointKind::Regular);
        assert_relative_eq!(c.dilation, 1.0, epsilon = 1e-10);

        let constant = MapSpec::new("const", src.clone(), src, |_| Ok(pt(&[0.5, 0.5])));
        assert_eq!(differential(&constant, &x).unwrap().amax(), 0.0);
        let c = conformality(&constant, &x).unwrap();
        assert_eq!(c.kind, PointKind::Critical);
        assert_eq!(c.dilation, 0.0);
        assert!(matches!(fibre_mean_curvature(&constant, &x), Err(GeoError::CriticalPoint { .. })));
    }

    #[test]
    fn linear_maps_between_flat_charts_are_totally_geodesic() {
        let map = MapSpec::new("lin", plane("R3", 3), plane("R2", 2), |x| {
            Ok(pt(&[2.0 * x[0] - x[1] + 0.5 * x[2], x[1] + 3.0 * x[2]]))
        });
        let sff = second_fundamental_form_all(&map, &pt(&[0.1, 0.2, 0.3])).unwrap();
        for row in &sff.components {
            for c in row {
                assert!(c.amax() < 1e-6, "{}", c.amax());
            }
        }
    }

    #[test]
    fn conjugation_holomorphy_residual() {
        let t = plane("T2", 2);
        let j = AlmostComplexField::standard(t.clone());
        let conj = MapSpec::new("conj", t.clone(), t, |x| Ok(pt(&[x[0], -x[1]])))
            .with_source_structure(j.clone())
            .with_target_structure(j);
        let r = holomorphy_residual(&conj, &pt(&[0.3, 0.3])).unwrap();
        assert_relative_eq!(r, 8f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn partial_rank_is_reported_not_raised() {
        let map = MapSpec::new("fold", plane("R2a", 2), plane("R2b", 2), |x| Ok(pt(&[x[0] + x[1], x[0] + x[1]])));
        let c = conformality(&map, &pt(&[0.1, 0.1])).unwrap();
        assert_eq!(c.kind, PointKind::PartialRank);
        assert_eq!(c.dilation, 0.0);
        assert!(c.conformality_residual > 1.0);
    }

    #[test]
    fn radial_projection_of_annulus() {
        let annulus = Arc::new(Chart::euclidean(
            "annulus",
            Domain::boxed(vec![(-3.0, 3.0); 2]).with_constraint(|x| x.norm() > 0.5),
            vec![(-2.0, 2.0); 2],
        ));
        for radius in [1.0, 2.0] {
            let circle = Arc::new(Chart::intrinsic("S1", Domain::unbounded(1), vec![(-3.0, 3.0)], move |_| {
                Ok(DMatrix::from_element(1, 1, radius * radius))
            }));
            let map = MapSpec::new("radial", annulus.clone(), circle, |x| Ok(pt(&[x[1].atan2(x[0])])));
            let x = pt(&[1.2, 0.9]);
            let c = conformality(&map, &x).unwrap();
            assert_relative_eq!(c.dilation, radius / x.norm(), epsilon = 1e-8);
            let f = fibre_mean_curvature(&map, &x).unwrap();
            assert_eq!(f.fibre_dim, 1);
            assert!(f.norm < 1e-7, "radial fibres are straight: {}", f.norm);
        }
    }

    #[test]
    fn tension_routes_agree_on_curved_map() {
        let s2 = Arc::new(Chart::intrinsic(
            "S2",
            Domain::boxed(vec![(0.05, 3.09), (f64::NEG_INFINITY, f64::INFINITY)]),
            vec![(0.2, 2.9), (-3.0, 3.0)],
            |x| Ok(DMatrix::from_diagonal(&pt(&[1.0, x[0].sin().powi(2)]))),
        ));
        let map = MapSpec::new("warp", plane("R2", 2), s2, |x| Ok(pt(&[1.0 + 0.3 * x[0] * x[1], x[0] + x[1] * x[1]])));
        let x = pt(&[0.4, -0.3]);
        let a = DVector::from_vec(tension(&map, &x).unwrap().tension);
        let b = tension_frame_route(&map, &x).unwrap();
        assert!(a.norm() > 0.1);
        assert_relative_eq!(a, b, epsilon = 1e-6);
    }
}
