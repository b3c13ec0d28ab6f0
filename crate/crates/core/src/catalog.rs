//! Concrete manifolds, structures and maps in explicit chart coordinates.
//!
//! Complex coordinates are always interleaved: `z_k = x_{2k} + i x_{2k+1}`.
//! Odd spheres `S^{2r+1} ⊂ C^{r+1}` use Hopf coordinates
//! `(α_1..α_r, θ_0..θ_r)` with moduli `ρ_0 = cos α_1`,
//! `ρ_k = sin α_1⋯sin α_k cos α_{k+1}`, `ρ_r = sin α_1⋯sin α_r` and
//! `z_k = ρ_k e^{iθ_k}`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeoError, Result};
use crate::hermitian::{standard_complex_matrix, AlmostComplexField};
use crate::manifold::{Chart, Domain, VectorFn};
use crate::maps::MapSpec;
use crate::numdiff::{DiffConfig, Point};

/// Distance kept between sample boxes and coordinate degeneracies.
pub const DEGENERACY_MARGIN: f64 = 0.1;
const PHASE_BOX: (f64, f64) = (-3.0, 3.0);
const CP_CHART_RADIUS: f64 = 1e3;

/// A built-in construction: a chart, optionally a structure and a map.
#[derive(Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub description: String,
    /// Known analytic facts about the entry.
    pub notes: Vec<String>,
    pub chart: Arc<Chart>,
    pub structure: Option<AlmostComplexField>,
    pub map: Option<MapSpec>,
    /// Closed-form `δJ` in chart components, when known.
    pub reference_divergence: Option<VectorFn>,
}

impl fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("id", &self.id)
            .field("chart", &self.chart.name)
            .field("structure", &self.structure.is_some())
            .field("map", &self.map.as_ref().map(|m| m.name.clone()))
            .finish()
    }
}

impl CatalogEntry {
    fn new(id: impl Into<String>, description: impl Into<String>, chart: Arc<Chart>) -> Self {
        Self {
            id: id.into(),
            description: description.into(),
            notes: Vec::new(),
            chart,
            structure: None,
            map: None,
            reference_divergence: None,
        }
    }

    fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    /// The entry's map, or `MissingStructure` when it only builds a manifold.
    pub fn map(&self) -> Result<&MapSpec> {
        self.map.as_ref().ok_or(GeoError::MissingStructure("catalog map"))
    }

    pub fn structure(&self) -> Result<&AlmostComplexField> {
        self.structure.as_ref().ok_or(GeoError::MissingStructure("catalog structure"))
    }

    /// Applies a differentiation config to the entry's map.
    pub fn with_config(mut self, cfg: DiffConfig) -> Self {
        self.map = self.map.map(|m| m.with_config(cfg));
        self
    }
}

fn pt(v: &[f64]) -> Point {
    DVector::from_row_slice(v)
}

/// Moduli `ρ_0..ρ_r` from the angles `α_1..α_r`.
fn sphere_moduli(alpha: &[f64]) -> Vec<f64> {
    let r = alpha.len();
    let mut rho = Vec::with_capacity(r + 1);
    let mut prod = 1.0;
    for a in alpha {
        rho.push(prod * a.cos());
        prod *= a.sin();
    }
    rho.push(prod);
    rho
}

/// Point of `S^{2r+1} ⊂ R^{2r+2}` from Hopf coordinates.
pub fn sphere_point(params: &[f64], r: usize) -> DVector<f64> {
    let rho = sphere_moduli(&params[..r]);
    let theta = &params[r..2 * r + 1];
    let mut out = DVector::zeros(2 * r + 2);
    for k in 0..=r {
        out[2 * k] = rho[k] * theta[k].cos();
        out[2 * k + 1] = rho[k] * theta[k].sin();
    }
    out
}

type Bounds = Vec<(f64, f64)>;

/// Chart domain and sampling box for Hopf coordinates.
fn sphere_bounds(r: usize) -> (Bounds, Bounds) {
    let mut domain = vec![(0.0, FRAC_PI_2); r];
    let mut sample = vec![(DEGENERACY_MARGIN, FRAC_PI_2 - DEGENERACY_MARGIN); r];
    domain.extend(std::iter::repeat_n((f64::NEG_INFINITY, f64::INFINITY), r + 1));
    sample.extend(std::iter::repeat_n(PHASE_BOX, r + 1));
    (domain, sample)
}

/// Round unit sphere `S^{2r+1}` in Hopf coordinates.
pub fn odd_sphere(r: usize) -> Arc<Chart> {
    let (domain, sample) = sphere_bounds(r);
    Arc::new(Chart::embedded(
        format!("s{}", 2 * r + 1),
        Domain::boxed(domain),
        sample,
        2 * r + 2,
        move |x| Ok(sphere_point(x.as_slice(), r)),
    ))
}

/// Flat torus `T^{2m}` with the standard constant structure.
pub fn flat_torus_n(m: usize) -> CatalogEntry {
    let d = 2 * m;
    let chart = Arc::new(Chart::euclidean(
        format!("t{d}"),
        Domain::unbounded(d),
        vec![(0.0, std::f64::consts::TAU); d],
    ));
    let j = AlmostComplexField::standard(chart.clone());
    let mut e = CatalogEntry::new(format!("t{d}"), format!("flat torus T^{d}"), chart)
        .note("Kähler; δJ = 0");
    e.structure = Some(j);
    e
}

/// Flat 2-torus in `C²`, one periodic chart.
pub fn flat_torus() -> CatalogEntry {
    flat_torus_n(1)
}

/// Ambient structure on `S^{2r+1}×S^{2s+1} ⊂ C^{r+1}×C^{s+1}`:
/// `X ↦ J₁X₁ − bJ₁n₁ + J₂X₂ + aJ₂n₂` with `a = ⟨X,J₁n₁⟩`, `b = ⟨X,J₂n₂⟩`.
pub fn calabi_eckmann_ambient(p: &DVector<f64>, r: usize) -> DMatrix<f64> {
    let d = p.len();
    let d1 = 2 * r + 2;
    let j = standard_complex_matrix(d);
    let mut n1 = DVector::zeros(d);
    let mut n2 = DVector::zeros(d);
    n1.rows_mut(0, d1).copy_from(&p.rows(0, d1));
    n2.rows_mut(d1, d - d1).copy_from(&p.rows(d1, d - d1));
    let (j1n1, j2n2) = (&j * n1, &j * n2);
    &j - &j1n1 * j2n2.transpose() + &j2n2 * j1n1.transpose()
}

/// `S^{2r+1}×S^{2s+1}` with the round product metric and its Calabi–Eckmann
/// structure. `δJ = −2(rJ₁n₁ + sJ₂n₂)`, so it is cosymplectic iff `r = s = 0`.
pub fn calabi_eckmann(r: usize, s: usize) -> CatalogEntry {
    let (n1, n2) = (2 * r + 1, 2 * s + 1);
    let (mut domain, mut sample) = sphere_bounds(r);
    let (d2, s2) = sphere_bounds(s);
    domain.extend(d2);
    sample.extend(s2);
    let ambient = 2 * r + 2 + 2 * s + 2;
    let param = move |x: &Point| -> Result<DVector<f64>> {
        let a = sphere_point(&x.as_slice()[..n1], r);
        let b = sphere_point(&x.as_slice()[n1..n1 + n2], s);
        Ok(DVector::from_iterator(ambient, a.iter().chain(b.iter()).copied()))
    };
    let chart = Arc::new(Chart::embedded(
        format!("ce-{r}-{s}"),
        Domain::boxed(domain),
        sample,
        ambient,
        param,
    ));
    let j = AlmostComplexField::ambient(chart.clone(), move |p| calabi_eckmann_ambient(p, r))
        .expect("product of spheres is embedded");
    let c = chart.clone();
    let reference: VectorFn = Arc::new(move |x: &Point| {
        let p = c.ambient_point(x).expect("embedded chart")?;
        let d1 = 2 * r + 2;
        let jm = standard_complex_matrix(p.len());
        let mut v = DVector::zeros(p.len());
        v.rows_mut(0, d1).copy_from(&(p.rows(0, d1) * (-2.0 * r as f64)));
        v.rows_mut(d1, p.len() - d1).copy_from(&(p.rows(d1, p.len() - d1) * (-2.0 * s as f64)));
        let pb = c.pullback(x, &DiffConfig::default())?;
        Ok(&pb.projection * (jm * v))
    });
    let mut e = CatalogEntry::new(
        format!("ce-{r}-{s}"),
        format!("Calabi–Eckmann manifold S^{n1} x S^{n2}"),
        chart,
    )
    .note("δJ = −2(rJ₁n₁ + sJ₂n₂)")
    .note("integrable; cosymplectic iff r = s = 0");
    e.structure = Some(j);
    e.reference_divergence = Some(reference);
    e
}

/// Hopf surface `S³×S¹`.
pub fn hopf_surface() -> CatalogEntry {
    calabi_eckmann(1, 0)
}

/// Fubini–Study metric on the affine chart of `CPⁿ`, normalized so that the
/// Hopf map from the unit sphere is a Riemannian submersion.
///
/// Real form of `H = ((1+|w|²)I − w w^H)/(1+|w|²)²`.
pub fn fubini_study(w: &Point) -> DMatrix<f64> {
    let n = w.len() / 2;
    let s = 1.0 + w.norm_squared();
    let s2 = s * s;
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let (ak, bk) = (w[2 * k], w[2 * k + 1]);
        for l in 0..n {
            let (al, bl) = (w[2 * l], w[2 * l + 1]);
            let delta = if k == l { s } else { 0.0 };
            let a = (delta - (ak * al + bk * bl)) / s2;
            let b = -(bk * al - ak * bl) / s2;
            g[(2 * k, 2 * l)] = a;
            g[(2 * k + 1, 2 * l + 1)] = a;
            g[(2 * k, 2 * l + 1)] = -b;
            g[(2 * k + 1, 2 * l)] = b;
        }
    }
    g
}

fn cp_domain(d: usize) -> (Domain, Vec<(f64, f64)>) {
    (
        Domain::boxed(vec![(-CP_CHART_RADIUS, CP_CHART_RADIUS); d]),
        vec![(-1.5, 1.5); d],
    )
}

/// Block-diagonal product of Fubini–Study charts, with the metric multiplied
/// by a conformal factor `e^{2f}`.
fn cp_product_with(
    name: String,
    dims: Vec<usize>,
    log_factor: impl Fn(&Point) -> f64 + Send + Sync + 'static,
) -> Arc<Chart> {
    let d: usize = dims.iter().map(|n| 2 * n).sum();
    let (domain, sample) = cp_domain(d);
    Arc::new(Chart::intrinsic(name, domain, sample, move |w| {
        let mut g = DMatrix::zeros(d, d);
        let mut off = 0;
        for &n in &dims {
            let block = fubini_study(&w.rows(off, 2 * n).into_owned());
            g.view_mut((off, off), (2 * n, 2 * n)).copy_from(&block);
            off += 2 * n;
        }
        Ok(g * (2.0 * log_factor(w)).exp())
    }))
}

fn cp_product_name(dims: &[usize]) -> String {
    dims.iter().map(|n| format!("cp{n}")).collect::<Vec<_>>().join("x")
}

/// `CPⁿ` in the affine chart `w ∈ Cⁿ` with Fubini–Study metric and standard `J`.
pub fn complex_projective(n: usize) -> CatalogEntry {
    let chart = cp_product_with(format!("cp{n}"), vec![n], |_| 0.0);
    let j = AlmostComplexField::standard(chart.clone());
    let mut e = CatalogEntry::new(format!("cp{n}"), format!("complex projective space CP^{n}"), chart)
        .note("Kähler; Christoffel symbols vanish at the origin");
    e.structure = Some(j);
    e
}

/// `w_k = z_k / z_0` in Hopf coordinates of `S^{2r+1}`.
fn hopf_formula(params: &[f64], r: usize) -> DVector<f64> {
    let rho = sphere_moduli(&params[..r]);
    let theta = &params[r..2 * r + 1];
    let mut w = DVector::zeros(2 * r);
    for k in 1..=r {
        let (m, ph) = (rho[k] / rho[0], theta[k] - theta[0]);
        w[2 * (k - 1)] = m * ph.cos();
        w[2 * (k - 1) + 1] = m * ph.sin();
    }
    w
}

/// Hopf map `S^{2r+1} → CP^r`; a Riemannian submersion with great-circle fibres.
pub fn hopf_map(r: usize) -> Result<CatalogEntry> {
    if r == 0 {
        return Err(GeoError::DegenerateParameters("Hopf map needs r ≥ 1".into()));
    }
    let source = odd_sphere(r);
    let target = complex_projective(r);
    let map = MapSpec::new(format!("hopf-s{}", 2 * r + 1), source.clone(), target.chart.clone(), move |x| {
        Ok(hopf_formula(x.as_slice(), r))
    })
    .with_target_structure(target.structure.clone().expect("cp has J"));
    let mut e = CatalogEntry::new(
        format!("hopf-s{}", 2 * r + 1),
        format!("Hopf map S^{} -> CP^{r}", 2 * r + 1),
        source,
    )
    .note("Riemannian submersion (λ = 1) with geodesic fibres; harmonic morphism");
    e.map = Some(map);
    Ok(e)
}

/// Product of Hopf maps on the Calabi–Eckmann manifold,
/// `S^{2r+1}×S^{2s+1} → CP^r × CP^s`; factors with `r = 0` or `s = 0` are
/// points and are omitted from the target.
pub fn product_hopf(r: usize, s: usize) -> Result<CatalogEntry> {
    product_hopf_with(r, s, format!("product-hopf-{r}-{s}"), |_| 0.0)
}

/// [`product_hopf`] into the target metric scaled by `c²`.
pub fn product_hopf_scaled(r: usize, s: usize, c: f64) -> Result<CatalogEntry> {
    if !(c.is_finite() && c > 0.0) {
        return Err(GeoError::DegenerateParameters(format!("scale must be > 0, got {c}")));
    }
    let lf = c.ln();
    product_hopf_with(r, s, format!("product-hopf-{r}-{s}-scaled"), move |_| lf)
}

/// [`product_hopf`] into the target metric `e^{2f}h` with `f = ε·Re w_1`.
/// For `ε ≠ 0` and complex target dimension ≥ 2 the target is not cosymplectic.
pub fn product_hopf_perturbed(r: usize, s: usize, eps: f64) -> Result<CatalogEntry> {
    let mut e = product_hopf_with(r, s, format!("product-hopf-{r}-{s}-perturbed"), move |w| eps * w[0])?;
    e.notes = vec![format!("target metric e^(2f)·h with f = {eps}·Re w_1; target not cosymplectic")];
    Ok(e)
}

fn product_hopf_with(
    r: usize,
    s: usize,
    id: String,
    log_factor: impl Fn(&Point) -> f64 + Send + Sync + 'static,
) -> Result<CatalogEntry> {
    if r == 0 && s == 0 {
        return Err(GeoError::DegenerateParameters(
            "product of Hopf maps with r = s = 0 has a point as target".into(),
        ));
    }
    let ce = calabi_eckmann(r, s);
    let dims: Vec<usize> = [r, s].into_iter().filter(|&n| n > 0).collect();
    let target = cp_product_with(format!("{}@{id}", cp_product_name(&dims)), dims, log_factor);
    let tj = AlmostComplexField::standard(target.clone());
    let n1 = 2 * r + 1;
    let map = MapSpec::new(id.clone(), ce.chart.clone(), target, move |x| {
        let a = hopf_formula(&x.as_slice()[..n1], r);
        let b = hopf_formula(&x.as_slice()[n1..], s);
        Ok(DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied()))
    })
    .with_source_structure(ce.structure.clone().expect("ce has J"))
    .with_target_structure(tj);
    let mut e = CatalogEntry::new(
        id,
        format!("product of Hopf maps S^{} x S^{} -> CP^{r} x CP^{s}", 2 * r + 1, 2 * s + 1),
        ce.chart.clone(),
    )
    .note("holomorphic Riemannian submersion; ker dφ = span{J₁n₁, J₂n₂}; dφ(δJ) = 0");
    e.structure = ce.structure;
    e.reference_divergence = ce.reference_divergence;
    e.map = Some(map);
    Ok(e)
}

/// Hopf map on the first factor of `S^{2r+1}×S¹`, a holomorphic extension of
/// the Hopf map to an even-dimensional source.
pub fn hopf_extension(r: usize) -> Result<CatalogEntry> {
    let mut e = product_hopf(r, 0)?;
    e.id = format!("hopf-s{}xs1", 2 * r + 1);
    e.description = format!("Hopf map S^{} x S^1 -> CP^{r} through the first factor", 2 * r + 1);
    if let Some(m) = e.map.take() {
        e.map = Some(m.with_name(e.id.clone()));
    }
    Ok(e)
}

/// Holomorphic map `S³×S¹ → CP¹`, `w = c·e^{−ψ}z_0`, where `ψ` is the angle
/// on the circle factor; `e^{−ψ}z` is a local holomorphic coordinate of the
/// Hopf surface. Its fibres are not minimal and `dφ(JδJ) ≠ 0`.
pub fn hopf_surface_coordinate_map(c: f64) -> Result<CatalogEntry> {
    if !(c.is_finite() && c != 0.0) {
        return Err(GeoError::DegenerateParameters(format!("coefficient must be nonzero, got {c}")));
    }
    let ce = hopf_surface();
    let target = complex_projective(1);
    let map = MapSpec::new("hopf-surface-coordinate", ce.chart.clone(), target.chart.clone(), move |x| {
        // x = (α, θ_0, θ_1, ψ)
        let m = c * x[0].cos() * (-x[3]).exp();
        Ok(pt(&[m * x[1].cos(), m * x[1].sin()]))
    })
    .with_source_structure(ce.structure.clone().expect("ce has J"))
    .with_target_structure(target.structure.clone().expect("cp has J"));
    let mut e = CatalogEntry::new(
        "hopf-surface-coordinate",
        "coordinate map S^3 x S^1 -> CP^1, w = c·exp(-ψ)·z_0",
        ce.chart.clone(),
    )
    .note("holomorphic; dφ(JδJ) ≠ 0, so not harmonic");
    e.structure = ce.structure;
    e.reference_divergence = ce.reference_divergence;
    e.map = Some(map);
    Ok(e)
}

/// Hopf map `C^{n+1}∖{0} → CPⁿ`, `w_k = z_k/z_0`, on the flat chart with
/// a neighbourhood of `{z_0 = 0}` removed. Horizontally conformal with
/// `λ = 1/|z|` and complex-line fibres.
pub fn punctured_hopf(n: usize) -> Result<CatalogEntry> {
    if n == 0 {
        return Err(GeoError::DegenerateParameters("punctured Hopf map needs n ≥ 1".into()));
    }
    let d = 2 * n + 2;
    let domain = Domain::boxed(vec![(-3.0, 3.0); d]).with_constraint(|z| z.norm() > 0.3 && z[0].hypot(z[1]) > 0.2);
    let chart = Arc::new(Chart::euclidean(format!("c{}-punctured", n + 1), domain, vec![(-2.0, 2.0); d]));
    let target = complex_projective(n);
    let map = MapSpec::new(format!("punctured-hopf-{n}"), chart.clone(), target.chart.clone(), move |z| {
        let (a, b) = (z[0], z[1]);
        let den = a * a + b * b;
        let mut w = DVector::zeros(2 * n);
        for k in 1..=n {
            let (c, e) = (z[2 * k], z[2 * k + 1]);
            w[2 * (k - 1)] = (c * a + e * b) / den;
            w[2 * (k - 1) + 1] = (e * a - c * b) / den;
        }
        Ok(w)
    })
    .with_source_structure(AlmostComplexField::standard(chart.clone()))
    .with_target_structure(target.structure.clone().expect("cp has J"));
    let mut e = CatalogEntry::new(
        format!("punctured-hopf-{n}"),
        format!("Hopf map C^{} minus 0 -> CP^{n}", n + 1),
        chart.clone(),
    )
    .note("horizontally conformal, λ = 1/|z|; fibres are complex lines");
    e.structure = Some(AlmostComplexField::standard(chart));
    e.map = Some(map);
    Ok(e)
}

/// Coefficients of `w ↦ (aw + b)/(cw + d)`, each a complex number `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusParams {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub d: [f64; 2],
}

impl MobiusParams {
    pub const IDENTITY: Self = Self {
        a: [1.0, 0.0],
        b: [0.0, 0.0],
        c: [0.0, 0.0],
        d: [1.0, 0.0],
    };
}

fn cmul(x: [f64; 2], y: [f64; 2]) -> [f64; 2] {
    [x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0]]
}

fn cdiv(x: [f64; 2], y: [f64; 2]) -> [f64; 2] {
    let den = y[0] * y[0] + y[1] * y[1];
    [(x[0] * y[0] + x[1] * y[1]) / den, (x[1] * y[0] - x[0] * y[1]) / den]
}

/// Post-composes a map into `CP¹` with a fractional-linear map of the affine chart.
pub fn mobius_postcompose(entry: &CatalogEntry, p: MobiusParams, tag: &str) -> Result<CatalogEntry> {
    let map = entry.map()?;
    if map.target.dim != 2 {
        return Err(GeoError::WrongDimension {
            expected: 2,
            found: map.target.dim,
        });
    }
    let ad = cmul(p.a, p.d);
    let bc = cmul(p.b, p.c);
    let det = [ad[0] - bc[0], ad[1] - bc[1]];
    if det[0].hypot(det[1]) < 1e-12 {
        return Err(GeoError::DegenerateParameters(format!("ad − bc = 0 for {p:?}")));
    }
    let id = format!("{}-mobius-{tag}", entry.id);
    let composite = map.post_compose(id.clone(), map.target.clone(), map.target_j.clone(), move |w| {
        let z = [w[0], w[1]];
        let num = cmul(p.a, z);
        let den = cmul(p.c, z);
        let q = cdiv([num[0] + p.b[0], num[1] + p.b[1]], [den[0] + p.d[0], den[1] + p.d[1]]);
        if !(q[0].is_finite() && q[1].is_finite()) {
            return Err(GeoError::Evaluation(format!("Möbius pole hit at w = {z:?}")));
        }
        Ok(pt(&q))
    });
    let mut e = entry.clone();
    e.id = id;
    e.description = format!("{} post-composed with a Möbius map", entry.description);
    e.notes.push("conformal post-composition preserves harmonic morphisms".into());
    e.map = Some(composite);
    Ok(e)
}

fn torus_map(
    id: &str,
    description: &str,
    target: Arc<Chart>,
    target_j: AlmostComplexField,
    f: impl Fn(&Point) -> Result<DVector<f64>> + Send + Sync + 'static,
) -> CatalogEntry {
    let src = flat_torus();
    let map = MapSpec::new(id, src.chart.clone(), target, f)
        .with_source_structure(src.structure.clone().expect("torus has J"))
        .with_target_structure(target_j);
    let mut e = CatalogEntry::new(id, description, src.chart.clone());
    e.structure = src.structure;
    e.map = Some(map);
    e
}

/// Complex conjugation of the flat torus: anti-holomorphic isometry.
pub fn torus_conjugation() -> CatalogEntry {
    let t = flat_torus();
    torus_map(
        "torus-conjugation",
        "conjugation (x, y) -> (x, -y) of the flat torus",
        t.chart.clone(),
        t.structure.clone().expect("torus has J"),
        |x| Ok(pt(&[x[0], -x[1]])),
    )
    .note("anti-holomorphic isometry; harmonic morphism")
}

/// `(x, y) ↦ (x + 0.3y², y)`: neither horizontally conformal nor harmonic.
pub fn torus_quadratic() -> CatalogEntry {
    let t = flat_torus();
    torus_map(
        "torus-quadratic",
        "quadratic shear (x, y) -> (x + 0.3 y^2, y)",
        t.chart.clone(),
        t.structure.clone().expect("torus has J"),
        |x| Ok(pt(&[x[0] + 0.3 * x[1] * x[1], x[1]])),
    )
    .note("not conformal, tension (0.6, 0)")
}

/// Holomorphic chart map `w = 0.3·exp(z/2)` from the flat torus chart to `CP¹`.
pub fn torus_exp_to_cp1() -> CatalogEntry {
    let cp = complex_projective(1);
    torus_map(
        "torus-exp-cp1",
        "holomorphic map w = 0.3 exp(z/2) from the flat torus chart to CP^1",
        cp.chart.clone(),
        cp.structure.clone().expect("cp has J"),
        |x| {
            let m = 0.3 * (0.5 * x[0]).exp();
            Ok(pt(&[m * (0.5 * x[1]).cos(), m * (0.5 * x[1]).sin()]))
        },
    )
    .note("holomorphic from a Kähler source into a Kähler target, hence harmonic")
}

/// Linear projection `T⁴ → T²` onto the first complex factor.
pub fn torus_projection() -> CatalogEntry {
    let src = flat_torus_n(2);
    let tgt = flat_torus();
    let map = MapSpec::new("torus-projection", src.chart.clone(), tgt.chart.clone(), |x| Ok(pt(&[x[0], x[1]])))
        .with_source_structure(src.structure.clone().expect("torus has J"))
        .with_target_structure(tgt.structure.clone().expect("torus has J"));
    let mut e = CatalogEntry::new("torus-projection", "projection T^4 -> T^2", src.chart.clone())
        .note("holomorphic Riemannian submersion with totally geodesic fibres");
    e.structure = src.structure;
    e.map = Some(map);
    e
}

/// Radial projection of a flat annulus onto a circle of the given radius.
pub fn annulus_projection(radius: f64) -> Result<CatalogEntry> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(GeoError::DegenerateParameters(format!("radius must be > 0, got {radius}")));
    }
    let annulus = Arc::new(Chart::euclidean(
        "annulus",
        Domain::boxed(vec![(-3.0, 3.0); 2]).with_constraint(|x| x.norm() > 0.5),
        vec![(-2.0, 2.0); 2],
    ));
    let circle = Arc::new(Chart::intrinsic(
        format!("circle-{radius}"),
        Domain::boxed(vec![(-4.0, 4.0)]),
        vec![(-3.0, 3.0)],
        move |_| Ok(DMatrix::from_element(1, 1, radius * radius)),
    ));
    let map = MapSpec::new("annulus-projection", annulus.clone(), circle, |x| Ok(pt(&[x[1].atan2(x[0])])));
    let mut e = CatalogEntry::new(
        "annulus-projection",
        format!("radial projection of a flat annulus to a circle of radius {radius}"),
        annulus,
    )
    .note("λ = radius/|x|; radial fibres are straight");
    e.map = Some(map);
    Ok(e)
}

/// A constant map `T² → T²`: every point is critical.
pub fn torus_constant() -> CatalogEntry {
    let t = flat_torus();
    torus_map(
        "torus-constant",
        "constant map of the flat torus",
        t.chart.clone(),
        t.structure.clone().expect("torus has J"),
        |_| Ok(pt(&[1.0, 1.0])),
    )
}
