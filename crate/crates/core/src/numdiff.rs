//! Finite-difference differentiation and metric-aware orthonormalization.
//!
//! Every derivative in the crate goes through [`partial`] or
//! [`second_partial`]. Stencil points are checked against the chart
//! [`Domain`] before the field is evaluated, so a field never sees a point
//! outside its chart.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::manifold::Domain;

pub type Point = DVector<f64>;

/// Step and tolerance settings shared by all numerical checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffConfig {
    pub step: f64,
    pub richardson: bool,
    pub tolerance_abs: f64,
    pub tolerance_factor: f64,
}

impl Default for DiffConfig {
    fn default() -> Self {
        Self {
            step: 1e-4,
            richardson: true,
            tolerance_abs: 1e-6,
            tolerance_factor: 50.0,
        }
    }
}

impl DiffConfig {
    pub fn new(step: f64, richardson: bool, tolerance_abs: f64, tolerance_factor: f64) -> Result<Self> {
        let cfg = Self {
            step,
            richardson,
            tolerance_abs,
            tolerance_factor,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(GeoError::InvalidConfig(format!("step must be > 0, got {}", self.step)));
        }
        if !(self.tolerance_abs.is_finite() && self.tolerance_abs > 0.0) {
            return Err(GeoError::InvalidConfig(format!(
                "tolerance_abs must be > 0, got {}",
                self.tolerance_abs
            )));
        }
        if !(self.tolerance_factor.is_finite() && self.tolerance_factor > 0.0) {
            return Err(GeoError::InvalidConfig(format!(
                "tolerance_factor must be > 0, got {}",
                self.tolerance_factor
            )));
        }
        Ok(())
    }

    /// Scale-aware residual bound: `tolerance_abs + tolerance_factor * step^2 * scale`.
    pub fn tolerance(&self, scale: f64) -> f64 {
        self.tolerance_abs + self.tolerance_factor * self.step * self.step * scale.abs()
    }
}

/// Values that finite-difference formulas can combine linearly.
pub trait FdValue: Sized {
    fn combine(terms: &[(f64, &Self)]) -> Self;
}

impl FdValue for f64 {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        terms.iter().map(|(c, v)| c * **v).sum()
    }
}

impl FdValue for DVector<f64> {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        let mut out = DVector::zeros(terms[0].1.len());
        for (c, v) in terms {
            out.axpy(*c, v, 1.0);
        }
        out
    }
}

impl FdValue for DMatrix<f64> {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        let first = terms[0].1;
        let mut out = DMatrix::zeros(first.nrows(), first.ncols());
        for (c, v) in terms {
            out += *v * *c;
        }
        out
    }
}

fn shifted(x: &Point, offsets: &[(usize, f64)]) -> Point {
    let mut y = x.clone();
    for &(axis, delta) in offsets {
        y[axis] += delta;
    }
    y
}

fn eval_at<V, F>(f: &F, domain: &Domain, y: &Point) -> Result<V>
where
    F: Fn(&Point) -> Result<V>,
{
    if !domain.contains(y) {
        return Err(GeoError::EvaluationOutsideDomain {
            point: y.iter().copied().collect(),
        });
    }
    f(y)
}

fn central<V, F>(f: &F, domain: &Domain, x: &Point, axis: usize, h: f64) -> Result<V>
where
    V: FdValue,
    F: Fn(&Point) -> Result<V>,
{
    let plus = eval_at(f, domain, &shifted(x, &[(axis, h)]))?;
    let minus = eval_at(f, domain, &shifted(x, &[(axis, -h)]))?;
    let inv = 1.0 / (2.0 * h);
    Ok(V::combine(&[(inv, &plus), (-inv, &minus)]))
}

/// First partial derivative of `f` along `axis` at `x`.
///
/// Central differences; with `richardson` the steps `h` and `h/2` are
/// combined into a fourth-order estimate.
pub fn partial<V, F>(f: F, domain: &Domain, x: &Point, axis: usize, cfg: &DiffConfig) -> Result<V>
where
    V: FdValue,
    F: Fn(&Point) -> Result<V>,
{
    let h = cfg.step;
    let coarse = central(&f, domain, x, axis, h)?;
    if !cfg.richardson {
        return Ok(coarse);
    }
    let fine = central(&f, domain, x, axis, 0.5 * h)?;
    Ok(V::combine(&[(4.0 / 3.0, &fine), (-1.0 / 3.0, &coarse)]))
}

/// All first partials of `f` at `x`, one entry per axis.
pub fn gradient_components<V, F>(f: F, domain: &Domain, x: &Point, cfg: &DiffConfig) -> Result<Vec<V>>
where
    V: FdValue,
    F: Fn(&Point) -> Result<V>,
{
    (0..x.len()).map(|i| partial(&f, domain, x, i, cfg)).collect()
}

/// Jacobian of a vector-valued map: column `j` is the partial along axis `j`.
pub fn jacobian<F>(f: F, domain: &Domain, x: &Point, cfg: &DiffConfig) -> Result<DMatrix<f64>>
where
    F: Fn(&Point) -> Result<DVector<f64>>,
{
    let cols = gradient_components(&f, domain, x, cfg)?;
    let rows = cols.first().map_or(0, |c| c.len());
    Ok(DMatrix::from_fn(rows, x.len(), |r, c| cols[c][r]))
}

fn second_diff<V, F>(f: &F, domain: &Domain, x: &Point, i: usize, j: usize, h: f64) -> Result<V>
where
    V: FdValue,
    F: Fn(&Point) -> Result<V>,
{
    if i == j {
        let plus = eval_at(f, domain, &shifted(x, &[(i, h)]))?;
        let mid = eval_at(f, domain, x)?;
        let minus = eval_at(f, domain, &shifted(x, &[(i, -h)]))?;
        let inv = 1.0 / (h * h);
        Ok(V::combine(&[(inv, &plus), (-2.0 * inv, &mid), (inv, &minus)]))
    } else {
        let pp = eval_at(f, domain, &shifted(x, &[(i, h), (j, h)]))?;
        let pm = eval_at(f, domain, &shifted(x, &[(i, h), (j, -h)]))?;
        let mp = eval_at(f, domain, &shifted(x, &[(i, -h), (j, h)]))?;
        let mm = eval_at(f, domain, &shifted(x, &[(i, -h), (j, -h)]))?;
        let inv = 1.0 / (4.0 * h * h);
        Ok(V::combine(&[(inv, &pp), (-inv, &pm), (-inv, &mp), (inv, &mm)]))
    }
}

/// Second partial derivative along axes `i` and `j`.
///
/// The axes are sorted before the stencil is built, so the result is
/// bit-identical under `i <-> j`.
pub fn second_partial<V, F>(f: F, domain: &Domain, x: &Point, i: usize, j: usize, cfg: &DiffConfig) -> Result<V>
where
    V: FdValue,
    F: Fn(&Point) -> Result<V>,
{
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    let h = cfg.step;
    let coarse = second_diff(&f, domain, x, i, j, h)?;
    if !cfg.richardson {
        return Ok(coarse);
    }
    let fine = second_diff(&f, domain, x, i, j, 0.5 * h)?;
    Ok(V::combine(&[(4.0 / 3.0, &fine), (-1.0 / 3.0, &coarse)]))
}

/// A `g`-orthonormal list of vectors at a point.
#[derive(Debug, Clone)]
pub struct FrameBasis {
    pub vectors: Vec<DVector<f64>>,
    pub metric_at_point: DMatrix<f64>,
    /// Input indices removed by pivoting because they were dependent on earlier ones.
    pub dropped: Vec<usize>,
}

impl FrameBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = &self.metric_at_point;
        let mut worst: f64 = 0.0;
        for (a, u) in self.vectors.iter().enumerate() {
            for (b, v) in self.vectors.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((inner(g, u, v) - target).abs());
            }
        }
        worst
    }
}

pub fn inner(g: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (u.transpose() * g * v)[(0, 0)]
}

pub fn norm(g: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    inner(g, u, u).max(0.0).sqrt()
}

/// Modified Gram-Schmidt in the `g` inner product, requiring every input
/// vector to survive.
pub fn orthonormalize(vectors: &[DVector<f64>], g: &DMatrix<f64>) -> Result<FrameBasis> {
    orthonormalize_pivoted(vectors, g, vectors.len())
}

/// Modified Gram-Schmidt in the `g` inner product, processing vectors in
/// order and dropping those whose residual falls below the rank tolerance
/// (largest input norm times 1e-9).
pub fn orthonormalize_pivoted(vectors: &[DVector<f64>], g: &DMatrix<f64>, required: usize) -> Result<FrameBasis> {
    let scale = vectors.iter().map(|v| norm(g, v)).fold(0.0, f64::max);
    let rank_tol = scale * 1e-9;
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    let mut dropped = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        let mut w = v.clone();
        for b in &basis {
            let c = inner(g, b, &w);
            w.axpy(-c, b, 1.0);
        }
        let n = norm(g, &w);
        if n <= rank_tol || !n.is_finite() || scale == 0.0 {
            dropped.push(idx);
            continue;
        }
        basis.push(w / n);
    }
    if basis.len() < required {
        return Err(GeoError::RankDeficient {
            found: basis.len(),
            required,
        });
    }
    Ok(FrameBasis {
        vectors: basis,
        metric_at_point: g.clone(),
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(v: &[f64]) -> Point {
        DVector::from_row_slice(v)
    }

    fn scalar(f: impl Fn(&Point) -> f64) -> impl Fn(&Point) -> Result<f64> {
        move |x| Ok(f(x))
    }

    #[test]
    fn quadratic_is_exact_without_richardson() {
        let cfg = DiffConfig {
            richardson: false,
            ..Default::default()
        };
        let d = partial(scalar(|x| x[0] * x[0]), &Domain::unbounded(1), &pt(&[1.0]), 0, &cfg).unwrap();
        assert_relative_eq!(d, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn sine_derivative_at_origin() {
        let cfg = DiffConfig::default();
        let d = partial(scalar(|x| x[0].sin()), &Domain::unbounded(1), &pt(&[0.0]), 0, &cfg).unwrap();
        // analytic derivative cos(0) = 1, error bounded by h^2/6
        assert!((d - 1.0).abs() <= cfg.step * cfg.step / 6.0);
    }

    #[test]
    fn constant_has_zero_derivative() {
        let d = partial(scalar(|_| 3.5), &Domain::unbounded(2), &pt(&[0.2, 0.1]), 1, &DiffConfig::default()).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn second_partials() {
        let cfg = DiffConfig::default();
        let dom = Domain::unbounded(2);
        let p = pt(&[0.7, -1.3]);
        let xy: f64 = second_partial(scalar(|x| x[0] * x[1]), &dom, &p, 0, 1, &cfg).unwrap();
        assert_relative_eq!(xy, 1.0, epsilon = 1e-6);
        let xx: f64 = second_partial(scalar(|x| x[0] * x[0] + x[1] * x[1]), &dom, &p, 0, 0, &cfg).unwrap();
        assert_relative_eq!(xx, 2.0, epsilon = 1e-6);
        // d^2/dxdy sin(x)cos(y) = -cos(x)sin(y) = 0 at the origin
        let sc: f64 = second_partial(scalar(|x| x[0].sin() * x[1].cos()), &dom, &pt(&[0.0, 0.0]), 0, 1, &cfg).unwrap();
        assert!(sc.abs() <= cfg.tolerance(1.0));
    }

    #[test]
    fn mixed_partials_symmetric_bitwise() {
        let cfg = DiffConfig::default();
        let f = scalar(|x| (x[0] * x[1]).exp() + x[0].sin() * x[1] * x[1]);
        let dom = Domain::unbounded(2);
        let p = pt(&[0.31, -0.77]);
        let a: f64 = second_partial(&f, &dom, &p, 0, 1, &cfg).unwrap();
        let b: f64 = second_partial(&f, &dom, &p, 1, 0, &cfg).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn stencil_outside_domain_is_rejected() {
        let dom = Domain::boxed(vec![(0.0, 1.0)]);
        let err = partial(scalar(|x| x[0]), &dom, &pt(&[0.99995]), 0, &DiffConfig::default()).unwrap_err();
        assert!(matches!(err, GeoError::EvaluationOutsideDomain { .. }));
    }

    fn exp_error(step: f64, richardson: bool) -> f64 {
        let cfg = DiffConfig {
            step,
            richardson,
            ..Default::default()
        };
        let d = partial(scalar(|x| x[0].exp()), &Domain::unbounded(1), &pt(&[0.3]), 0, &cfg).unwrap();
        (d - 0.3f64.exp()).abs()
    }

    #[test]
    fn convergence_orders() {
        // truncation must dominate round-off, hence the coarse steps
        let ratio2 = exp_error(0.1, false) / exp_error(0.05, false);
        assert!((3.5..=4.5).contains(&ratio2), "second order ratio {ratio2}");
        let ratio4 = exp_error(0.2, true) / exp_error(0.1, true);
        assert!((14.0..=18.0).contains(&ratio4), "fourth order ratio {ratio4}");
    }

    #[test]
    fn orthonormalize_examples() {
        let id = DMatrix::identity(2, 2);
        let f = orthonormalize(&[pt(&[1.0, 0.0]), pt(&[0.0, 1.0])], &id).unwrap();
        assert_eq!(f.vectors[0], pt(&[1.0, 0.0]));
        assert_eq!(f.vectors[1], pt(&[0.0, 1.0]));

        let f = orthonormalize(&[pt(&[1.0, 0.0]), pt(&[1.0, 1.0])], &id).unwrap();
        assert_relative_eq!(f.vectors[1], pt(&[0.0, 1.0]), epsilon = 1e-15);

        let g = DMatrix::from_diagonal(&pt(&[4.0, 9.0]));
        let f = orthonormalize(&[pt(&[1.0, 0.0]), pt(&[0.0, 1.0])], &g).unwrap();
        assert_relative_eq!(f.vectors[0], pt(&[0.5, 0.0]), epsilon = 1e-15);
        assert_relative_eq!(f.vectors[1], pt(&[0.0, 1.0 / 3.0]), epsilon = 1e-15);
    }

    #[test]
    fn pivoting_drops_dependent_vectors() {
        let id = DMatrix::identity(2, 2);
        let input = [pt(&[1.0, 1.0]), pt(&[2.0, 2.0]), pt(&[0.0, 1.0])];
        let f = orthonormalize_pivoted(&input, &id, 2).unwrap();
        assert_eq!(f.dropped, vec![1]);
        assert_eq!(f.len(), 2);
        let err = orthonormalize(&input, &id).unwrap_err();
        assert_eq!(err, GeoError::RankDeficient { found: 2, required: 3 });
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(DiffConfig::new(0.0, true, 1e-6, 50.0).is_err());
        assert!(DiffConfig::new(1e-4, true, -1.0, 50.0).is_err());
        assert!(DiffConfig::new(1e-4, false, 1e-6, 50.0).is_ok());
    }
}
