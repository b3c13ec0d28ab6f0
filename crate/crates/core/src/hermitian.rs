//! Almost-complex structures: Hermitian frames, `∇J`, the divergence `δJ`,
//! the Lee vector field, the Nijenhuis tensor and structure classification.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::manifold::{christoffel, lie_bracket, Chart, Christoffel, VectorField};
use crate::numdiff::{gradient_components, inner, norm, DiffConfig, FrameBasis, Point};
use crate::sampling::SamplePlan;

pub type StructureFn = Arc<dyn Fn(&Point, &DiffConfig) -> Result<DMatrix<f64>> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureSource {
    Intrinsic,
    Ambient,
    Lifted { orientation: i8 },
}

/// A field of endomorphisms `J` with `J² = −I` on an even-dimensional chart.
#[derive(Clone)]
pub struct AlmostComplexField {
    pub chart: Arc<Chart>,
    pub source: StructureSource,
    eval: StructureFn,
}

impl fmt::Debug for AlmostComplexField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlmostComplexField")
            .field("chart", &self.chart.name)
            .field("source", &self.source)
            .finish()
    }
}

/// The constant structure `∂_{2k} ↦ ∂_{2k+1}, ∂_{2k+1} ↦ −∂_{2k}` (multiplication
/// by `i` in interleaved real/imaginary coordinates).
pub fn standard_complex_matrix(dim: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(dim, dim);
    for k in 0..dim / 2 {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

impl AlmostComplexField {
    pub fn from_fn(
        chart: Arc<Chart>,
        source: StructureSource,
        eval: impl Fn(&Point, &DiffConfig) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            chart,
            source,
            eval: Arc::new(eval),
        }
    }

    pub fn intrinsic(chart: Arc<Chart>, eval: impl Fn(&Point) -> Result<DMatrix<f64>> + Send + Sync + 'static) -> Self {
        Self::from_fn(chart, StructureSource::Intrinsic, move |x, _| eval(x))
    }

    pub fn standard(chart: Arc<Chart>) -> Self {
        let j = standard_complex_matrix(chart.dim);
        Self::intrinsic(chart, move |_| Ok(j.clone()))
    }

    /// Pushes an ambient rule `p ↦ J_amb(p)` (acting on tangent vectors of the
    /// embedded image) to chart components: `J = P · J_amb · Dψ`.
    pub fn ambient(
        chart: Arc<Chart>,
        rule: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if !chart.is_embedded() {
            return Err(GeoError::InvalidConfig(format!("chart `{}` is not embedded", chart.name)));
        }
        let c = chart.clone();
        Ok(Self::from_fn(chart, StructureSource::Ambient, move |x, cfg| {
            let pb = c.pullback(x, cfg)?;
            let p = c.ambient_point(x).expect("embedded chart")?;
            Ok(&pb.projection * rule(&p) * &pb.jacobian)
        }))
    }

    pub fn at(&self, x: &Point, cfg: &DiffConfig) -> Result<DMatrix<f64>> {
        (self.eval)(x, cfg)
    }

    pub fn complex_dim(&self) -> usize {
        self.chart.dim / 2
    }

    /// `(max |J² + I|, max |JᵀgJ − g|)` at `x`.
    pub fn invariant_residuals(&self, x: &Point, cfg: &DiffConfig) -> Result<(f64, f64)> {
        let j = self.at(x, cfg)?;
        let g = self.chart.metric(x, cfg)?;
        let d = self.chart.dim;
        let square = (&j * &j + DMatrix::<f64>::identity(d, d)).amax();
        let compat = (j.transpose() * &g * &j - &g).amax() / g.amax().max(1.0);
        Ok((square, compat))
    }
}

/// A complex tangent vector stored as real and imaginary coordinate parts.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector {
    pub re: DVector<f64>,
    pub im: DVector<f64>,
}

impl CVector {
    pub fn new(re: DVector<f64>, im: DVector<f64>) -> Self {
        Self { re, im }
    }

    pub fn real(re: DVector<f64>) -> Self {
        let im = DVector::zeros(re.len());
        Self { re, im }
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.re + &other.re, &self.im + &other.im)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(&self.re * c, &self.im * c)
    }

    /// Multiplication by `i`.
    pub fn times_i(&self) -> Self {
        Self::new(-&self.im, self.re.clone())
    }

    /// Applies a real endomorphism componentwise.
    pub fn apply(&self, m: &DMatrix<f64>) -> Self {
        Self::new(m * &self.re, m * &self.im)
    }

    /// Complex-bilinear extension of `g`, returned as `(re, im)`.
    pub fn bilinear(&self, g: &DMatrix<f64>, other: &Self) -> (f64, f64) {
        (
            inner(g, &self.re, &other.re) - inner(g, &self.im, &other.im),
            inner(g, &self.re, &other.im) + inner(g, &self.im, &other.re),
        )
    }

    /// Norm in the Hermitian extension of `g`.
    pub fn hermitian_norm(&self, g: &DMatrix<f64>) -> f64 {
        (inner(g, &self.re, &self.re) + inner(g, &self.im, &self.im)).max(0.0).sqrt()
    }

    /// `V^{1,0} = ½(V − iJV)`.
    pub fn part_10(&self, j: &DMatrix<f64>) -> Self {
        self.add(&self.apply(j).times_i().scale(-1.0)).scale(0.5)
    }

    /// `V^{0,1} = ½(V + iJV)`.
    pub fn part_01(&self, j: &DMatrix<f64>) -> Self {
        self.add(&self.apply(j).times_i()).scale(0.5)
    }
}

/// Orthonormal frame `{e_1..e_m, Je_1..Je_m}` with `Z_k = (e_k − iJe_k)/√2`.
#[derive(Debug, Clone)]
pub struct HermitianFrame {
    pub real_frame: FrameBasis,
    pub complex_frame: Vec<CVector>,
    /// Coordinate axes that seeded `e_1..e_m`, in order.
    pub axes: Vec<usize>,
}

impl HermitianFrame {
    pub fn complex_dim(&self) -> usize {
        self.complex_frame.len()
    }

    pub fn e(&self, k: usize) -> &DVector<f64> {
        &self.real_frame.vectors[k]
    }

    pub fn je(&self, k: usize) -> &DVector<f64> {
        &self.real_frame.vectors[self.complex_dim() + k]
    }
}

fn build_frame(g: &DMatrix<f64>, j: &DMatrix<f64>, axes: Option<&[usize]>) -> Result<HermitianFrame> {
    let d = g.nrows();
    let m = d / 2;
    let unit = |a: usize| DVector::from_fn(d, |k, _| if k == a { 1.0 } else { 0.0 });
    let scale = (0..d).map(|a| g[(a, a)].sqrt()).fold(0.0, f64::max);
    let rank_tol = scale * 1e-9;
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(d);
    let mut es = Vec::with_capacity(m);
    let mut jes = Vec::with_capacity(m);
    let mut chosen = Vec::with_capacity(m);
    let residual = |basis: &[DVector<f64>], v: DVector<f64>| {
        let mut w = v;
        for b in basis {
            let c = inner(g, b, &w);
            w.axpy(-c, b, 1.0);
        }
        w
    };
    for step in 0..m {
        let (axis, w) = match axes {
            Some(a) => (a[step], residual(&basis, unit(a[step]))),
            None => {
                let mut best: Option<(usize, DVector<f64>, f64)> = None;
                for a in (0..d).filter(|a| !chosen.contains(a)) {
                    let w = residual(&basis, unit(a));
                    let n = norm(g, &w);
                    if best.as_ref().is_none_or(|(_, _, bn)| n > *bn) {
                        best = Some((a, w, n));
                    }
                }
                let (a, w, _) = best.ok_or(GeoError::RankDeficient {
                    found: 2 * step,
                    required: d,
                })?;
                (a, w)
            }
        };
        let n = norm(g, &w);
        if n.is_nan() || n <= rank_tol {
            return Err(GeoError::RankDeficient {
                found: 2 * step,
                required: d,
            });
        }
        let e = w / n;
        let je = j * &e;
        basis.push(e.clone());
        basis.push(je.clone());
        es.push(e);
        jes.push(je);
        chosen.push(axis);
    }
    let complex_frame = es
        .iter()
        .zip(&jes)
        .map(|(e, je)| CVector::new(e * FRAC_1_SQRT_2, je * -FRAC_1_SQRT_2))
        .collect();
    es.extend(jes);
    Ok(HermitianFrame {
        real_frame: FrameBasis {
            vectors: es,
            metric_at_point: g.clone(),
            dropped: Vec::new(),
        },
        complex_frame,
        axes: chosen,
    })
}

/// Greedy Hermitian frame at `x`: each `e_k` is the coordinate axis with the
/// largest residual after projecting out `span{e_l, Je_l}`, normalized.
pub fn hermitian_frame(j: &AlmostComplexField, x: &Point, cfg: &DiffConfig) -> Result<HermitianFrame> {
    let g = j.chart.metric(x, cfg)?;
    let jm = j.at(x, cfg)?;
    build_frame(&g, &jm, None)
}

/// Hermitian frame seeded by a fixed axis order; smooth in `x` wherever the
/// axes stay independent, so it can be differentiated as a frame field.
pub fn hermitian_frame_with_axes(
    j: &AlmostComplexField,
    x: &Point,
    cfg: &DiffConfig,
    axes: &[usize],
) -> Result<HermitianFrame> {
    let g = j.chart.metric(x, cfg)?;
    let jm = j.at(x, cfg)?;
    build_frame(&g, &jm, Some(axes))
}

/// `∇J` at a point, one matrix `∇_{∂_i}J` per coordinate axis.
#[derive(Debug, Clone)]
pub struct NablaJ {
    pub j: DMatrix<f64>,
    pub metric: DMatrix<f64>,
    /// Plain partials `∂_i J`.
    pub dj: Vec<DMatrix<f64>>,
    pub gamma: Christoffel,
    /// `∇_i J = ∂_i J + Γ_i J − J Γ_i`.
    pub cov: Vec<DMatrix<f64>>,
}

impl NablaJ {
    pub fn compute(j: &AlmostComplexField, x: &Point, cfg: &DiffConfig) -> Result<Self> {
        let chart = &j.chart;
        let jm = j.at(x, cfg)?;
        let metric = chart.metric(x, cfg)?;
        let dj: Vec<DMatrix<f64>> = gradient_components(|y| j.at(y, cfg), &chart.domain, x, cfg)?;
        let gamma = christoffel(chart, x, cfg)?;
        let cov = dj
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let gi = gamma.along(i);
                d + &gi * &jm - &jm * &gi
            })
            .collect();
        Ok(Self {
            j: jm,
            metric,
            dj,
            gamma,
            cov,
        })
    }

    /// `∇_X J` as a matrix.
    pub fn along(&self, xv: &DVector<f64>) -> DMatrix<f64> {
        let d = self.j.nrows();
        let mut out = DMatrix::zeros(d, d);
        for (i, c) in self.cov.iter().enumerate() {
            if xv[i] != 0.0 {
                out += c * xv[i];
            }
        }
        out
    }

    /// `(∇_X J)Y`.
    pub fn apply(&self, xv: &DVector<f64>, yv: &DVector<f64>) -> DVector<f64> {
        self.along(xv) * yv
    }

    fn partial_along(&self, xv: &DVector<f64>) -> DMatrix<f64> {
        let d = self.j.nrows();
        let mut out = DMatrix::zeros(d, d);
        for (i, c) in self.dj.iter().enumerate() {
            if xv[i] != 0.0 {
                out += c * xv[i];
            }
        }
        out
    }

    /// Nijenhuis tensor from the partials of `J`:
    /// `N(X,Y) = (∂_{JX}J)Y − (∂_{JY}J)X − J(∂_X J)Y + J(∂_Y J)X`.
    pub fn nijenhuis(&self, xv: &DVector<f64>, yv: &DVector<f64>) -> DVector<f64> {
        let jx = &self.j * xv;
        let jy = &self.j * yv;
        self.partial_along(&jx) * yv - self.partial_along(&jy) * xv - &self.j * (self.partial_along(xv) * yv)
            + &self.j * (self.partial_along(yv) * xv)
    }

    /// `Σ_a (∇_{E_a}J)E_a` over an orthonormal list `E`.
    pub fn divergence_in_frame(&self, frame: &[DVector<f64>]) -> DVector<f64> {
        let d = self.j.nrows();
        frame.iter().fold(DVector::zeros(d), |acc, e| acc + self.apply(e, e))
    }
}

/// `(∇_X J)Y` at `x`.
pub fn nabla_j(j: &AlmostComplexField, x: &Point, xv: &DVector<f64>, yv: &DVector<f64>, cfg: &DiffConfig) -> Result<DVector<f64>> {
    Ok(NablaJ::compute(j, x, cfg)?.apply(xv, yv))
}

/// `δJ = Σ_k (∇_{e_k}J)e_k + (∇_{Je_k}J)Je_k` in a Hermitian frame.
pub fn divergence_j(j: &AlmostComplexField, x: &Point, cfg: &DiffConfig) -> Result<DVector<f64>> {
    let frame = hermitian_frame(j, x, cfg)?;
    let nj = NablaJ::compute(j, x, cfg)?;
    Ok(nj.divergence_in_frame(&frame.real_frame.vectors))
}

/// Lee vector field `JδJ`.
pub fn lee_vector(j: &AlmostComplexField, x: &Point, cfg: &DiffConfig) -> Result<DVector<f64>> {
    let delta = divergence_j(j, x, cfg)?;
    Ok(j.at(x, cfg)? * delta)
}

/// `N(X,Y) = [JX,JY] − J[JX,Y] − J[X,JY] − [X,Y]` for vector fields.
pub fn nijenhuis_fields(j: &AlmostComplexField, xf: &VectorField, yf: &VectorField, x: &Point, cfg: &DiffConfig) -> Result<DVector<f64>> {
    let apply_j = |f: &VectorField| {
        let (j, f, cfg) = (j.clone(), f.clone(), *cfg);
        VectorField::new(f.chart.clone(), move |p| Ok(j.at(p, &cfg)? * f.at(p)?))
    };
    let jx = apply_j(xf);
    let jy = apply_j(yf);
    let jm = j.at(x, cfg)?;
    let a = lie_bracket(&jx, &jy, x, cfg)?;
    let b = lie_bracket(&jx, yf, x, cfg)?;
    let c = lie_bracket(xf, &jy, x, cfg)?;
    let d = lie_bracket(xf, yf, x, cfg)?;
    Ok(a - &jm * b - &jm * c - d)
}

/// Nijenhuis tensor on two vectors, extended as constant-coefficient fields.
pub fn nijenhuis(j: &AlmostComplexField, x: &Point, xv: &DVector<f64>, yv: &DVector<f64>, cfg: &DiffConfig) -> Result<DVector<f64>> {
    let chart = j.chart.clone();
    nijenhuis_fields(
        j,
        &VectorField::constant(chart.clone(), xv.clone()),
        &VectorField::constant(chart, yv.clone()),
        x,
        cfg,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureVerdicts {
    pub kahler: bool,
    pub symplectic_12: bool,
    pub cosymplectic: bool,
    pub integrable: bool,
}

/// Residuals and verdicts for the Kähler / (1,2)-symplectic / cosymplectic /
/// integrable classes over a sample plan.
#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub residual_kahler: f64,
    pub residual_12sympl: f64,
    pub residual_cosympl: f64,
    pub residual_integrable: f64,
    /// `max ‖(∇_{Z̄_k}Z_l)^{0,1}‖` over Hermitian frame fields.
    pub residual_12sympl_complex: f64,
    /// `max ‖(Σ_k ∇_{Z̄_k}Z_k)^{0,1}‖`.
    pub residual_cosympl_complex: f64,
    pub tolerance: f64,
    pub verdicts: StructureVerdicts,
    /// Kähler ⇒ (1,2)-symplectic ⇒ cosymplectic for verdicts with residuals under half tolerance.
    pub hierarchy_consistent: bool,
    /// Real-form and complex-form residuals vanish together (10× coupling).
    pub forms_agree: bool,
    #[serde(skip)]
    pub samples: Vec<Point>,
}

/// Pointwise residuals used by [`classify_structure`].
#[derive(Debug, Clone, Copy, Default)]
pub struct PointResiduals {
    pub kahler: f64,
    pub sympl12: f64,
    pub cosympl: f64,
    pub integrable: f64,
    pub sympl12_complex: f64,
    pub cosympl_complex: f64,
    pub scale: f64,
}

impl PointResiduals {
    fn max(self, o: Self) -> Self {
        Self {
            kahler: self.kahler.max(o.kahler),
            sympl12: self.sympl12.max(o.sympl12),
            cosympl: self.cosympl.max(o.cosympl),
            integrable: self.integrable.max(o.integrable),
            sympl12_complex: self.sympl12_complex.max(o.sympl12_complex),
            cosympl_complex: self.cosympl_complex.max(o.cosympl_complex),
            scale: self.scale.max(o.scale),
        }
    }
}

/// All structure residuals at a single point.
pub fn structure_residuals_at(j: &AlmostComplexField, x: &Point, cfg: &DiffConfig) -> Result<PointResiduals> {
    let chart = &j.chart;
    let nj = NablaJ::compute(j, x, cfg)?;
    let frame = hermitian_frame(j, x, cfg)?;
    let g = &nj.metric;
    let vs = &frame.real_frame.vectors;
    let mut r = PointResiduals {
        scale: 1.0 + nj.gamma.magnitude(),
        ..Default::default()
    };
    for (a, ea) in vs.iter().enumerate() {
        let jea = &nj.j * ea;
        for (b, eb) in vs.iter().enumerate() {
            let t = nj.apply(ea, eb);
            r.kahler = r.kahler.max(norm(g, &t));
            let s = &t + nj.apply(&jea, &(&nj.j * eb));
            r.sympl12 = r.sympl12.max(norm(g, &s));
            if a < b {
                r.integrable = r.integrable.max(norm(g, &nj.nijenhuis(ea, eb)));
            }
        }
    }
    r.cosympl = norm(g, &nj.divergence_in_frame(vs));

    // complex route: differentiate the Hermitian frame as a field
    let m = frame.complex_dim();
    let d = chart.dim;
    let axes = frame.axes.clone();
    let stacked = |y: &Point| -> Result<DVector<f64>> {
        let f = hermitian_frame_with_axes(j, y, cfg, &axes)?;
        Ok(DVector::from_iterator(2 * m * d, f.real_frame.vectors.iter().flat_map(|v| v.iter().copied())))
    };
    let dframe: Vec<DVector<f64>> = gradient_components(stacked, &chart.domain, x, cfg)?;
    // ∇_v E_a
    let cov = |v: &DVector<f64>, a: usize| -> DVector<f64> {
        let mut out = nj.gamma.contract(v, &vs[a]);
        for (i, di) in dframe.iter().enumerate() {
            if v[i] != 0.0 {
                out.axpy(v[i], &di.rows(a * d, d).into_owned(), 1.0);
            }
        }
        out
    };
    // ∇_{Z̄_k} Z_l with Z̄_k = (e_k + iJe_k)/√2, Z_l = (e_l − iJe_l)/√2
    let nabla_zbar_z = |k: usize, l: usize| -> CVector {
        let (ek, jek) = (&vs[k], &vs[m + k]);
        let re = cov(ek, l) + cov(jek, m + l);
        let im = cov(jek, l) - cov(ek, m + l);
        CVector::new(re * 0.5, im * 0.5)
    };
    let mut sum = CVector::real(DVector::zeros(d));
    for k in 0..m {
        for l in 0..m {
            let w = nabla_zbar_z(k, l);
            r.sympl12_complex = r.sympl12_complex.max(w.part_01(&nj.j).hermitian_norm(g));
            if k == l {
                sum = sum.add(&w);
            }
        }
    }
    r.cosympl_complex = sum.part_01(&nj.j).hermitian_norm(g);
    Ok(r)
}

/// Classifies `J` over the sample plan. Samples are evaluated in parallel and
/// reduced with an order-independent max.
pub fn classify_structure(j: &AlmostComplexField, plan: &SamplePlan, cfg: &DiffConfig) -> Result<StructureReport> {
    let samples = plan.points(&j.chart)?;
    classify_at(j, samples, cfg)
}

/// [`classify_structure`] on an explicit list of points.
pub fn classify_at(j: &AlmostComplexField, samples: Vec<Point>, cfg: &DiffConfig) -> Result<StructureReport> {
    let per_point: Vec<PointResiduals> = samples
        .par_iter()
        .map(|x| structure_residuals_at(j, x, cfg))
        .collect::<Result<_>>()?;
    let r = per_point.into_iter().fold(PointResiduals::default(), PointResiduals::max);
    let tol = cfg.tolerance(r.scale.max(1.0));
    let verdicts = StructureVerdicts {
        kahler: r.kahler <= tol,
        symplectic_12: r.sympl12 <= tol,
        cosymplectic: r.cosympl <= tol,
        integrable: r.integrable <= tol,
    };
    let hierarchy_consistent = !(r.kahler <= 0.5 * tol && !verdicts.symplectic_12)
        && !(r.sympl12 <= 0.5 * tol && !verdicts.cosymplectic);
    let agree = |a: f64, b: f64| (a > tol || b <= 10.0 * tol) && (b > tol || a <= 10.0 * tol);
    let forms_agree = agree(r.sympl12, r.sympl12_complex) && agree(r.cosympl, r.cosympl_complex);
    Ok(StructureReport {
        residual_kahler: r.kahler,
        residual_12sympl: r.sympl12,
        residual_cosympl: r.cosympl,
        residual_integrable: r.integrable,
        residual_12sympl_complex: r.sympl12_complex,
        residual_cosympl_complex: r.cosympl_complex,
        tolerance: tol,
        verdicts,
        hierarchy_consistent,
        forms_agree,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Domain;
    use approx::assert_relative_eq;

    fn pt(v: &[f64]) -> Point {
        DVector::from_row_slice(v)
    }

    fn torus() -> AlmostComplexField {
        let chart = Arc::new(Chart::euclidean("T2", Domain::unbounded(2), vec![(0.0, std::f64::consts::TAU); 2]));
        AlmostComplexField::standard(chart)
    }

    #[test]
    fn torus_frame_and_structure() {
        let cfg = DiffConfig::default();
        let j = torus();
        let f = hermitian_frame(&j, &pt(&[1.0, 2.0]), &cfg).unwrap();
        assert_eq!(f.complex_dim(), 1);
        assert_eq!(f.e(0), &pt(&[1.0, 0.0]));
        assert_eq!(f.je(0), &pt(&[0.0, 1.0]));
        let z = &f.complex_frame[0];
        let g = DMatrix::identity(2, 2);
        let (re, im) = z.bilinear(&g, &z.conj());
        assert_relative_eq!(re, 1.0);
        assert_eq!(im, 0.0);
        assert_eq!(z.bilinear(&g, z), (0.0, 0.0));
        assert_eq!(divergence_j(&j, &pt(&[1.0, 2.0]), &cfg).unwrap().amax(), 0.0);
        assert_eq!(lee_vector(&j, &pt(&[1.0, 2.0]), &cfg).unwrap().amax(), 0.0);
    }

    #[test]
    fn projectors_split_vectors() {
        let j = standard_complex_matrix(4);
        let v = CVector::real(pt(&[0.3, -1.0, 2.0, 0.5]));
        let sum = v.part_10(&j).add(&v.part_01(&j));
        assert_relative_eq!(sum.re, v.re, epsilon = 1e-15);
        assert_relative_eq!(sum.im, v.im, epsilon = 1e-15);
        let p = v.part_10(&j);
        let jp = p.apply(&j);
        let ip = p.times_i();
        assert_relative_eq!(jp.re, ip.re, epsilon = 1e-15);
        assert_relative_eq!(jp.im, ip.im, epsilon = 1e-15);
    }

    #[test]
    fn nijenhuis_routes_agree_on_nonintegrable_structure() {
        // J rotating with x1 in R^4 is not integrable
        let cfg = DiffConfig::default();
        let chart = Arc::new(Chart::euclidean("R4", Domain::unbounded(4), vec![(-1.0, 1.0); 4]));
        let j = AlmostComplexField::intrinsic(chart, |x| {
            let (c, s) = (x[0].cos(), x[0].sin());
            // conjugate the standard structure by a rotation in the (x3,x4) plane
            let mut r = DMatrix::identity(4, 4);
            r[(2, 2)] = c;
            r[(2, 3)] = -s;
            r[(3, 2)] = s;
            r[(3, 3)] = c;
            let j0 = standard_complex_matrix(4);
            let mut p = DMatrix::identity(4, 4);
            p[(1, 1)] = 0.0;
            p[(1, 2)] = 1.0;
            p[(2, 2)] = 0.0;
            p[(2, 1)] = 1.0;
            let j1 = &p * j0 * p.transpose();
            Ok(&r * j1 * r.transpose())
        });
        let x = pt(&[0.4, 0.1, -0.2, 0.3]);
        let nj = NablaJ::compute(&j, &x, &cfg).unwrap();
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let ea = DVector::from_fn(4, |k, _| if k == a { 1.0 } else { 0.0 });
                let eb = DVector::from_fn(4, |k, _| if k == b { 1.0 } else { 0.0 });
                let route1 = nijenhuis(&j, &x, &ea, &eb, &cfg).unwrap();
                let route2 = nj.nijenhuis(&ea, &eb);
                assert_relative_eq!(route1, route2, epsilon = 1e-8);
                worst = worst.max(route1.norm());
            }
        }
        assert!(worst > 1e-2, "structure should not be integrable: {worst}");
    }
}
