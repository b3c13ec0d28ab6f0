//! Theorems about holomorphic maps and harmonic morphisms as numerical
//! predicates over sample plans.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{equivalence, implication, nan_max, Check, Side, VerificationReport};
use crate::error::{GeoError, Result};
use crate::hermitian::{classify_at, classify_structure, hermitian_frame, AlmostComplexField, NablaJ, StructureReport};
use crate::manifold::christoffel;
use crate::maps::{
    conformality, differential, fibre_mean_curvature, holomorphy_residual, homothety_at, lift_structure,
    superminimality_residual, condition_ii_residual_at, tension, ConformalityData, MapSpec, PointKind, TensionData,
};
use crate::numdiff::{norm, DiffConfig, Point};
use crate::sampling::SamplePlan;

/// Largest share of a plan that may be dropped as near-critical.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.1;

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, nan_max)
}

struct MapEval {
    x: Point,
    conf: ConformalityData,
    tension: TensionData,
    holomorphy: Option<f64>,
}

fn evaluate(map: &MapSpec, pts: &[Point]) -> Result<Vec<MapEval>> {
    pts.par_iter()
        .map(|x| {
            let holomorphy = match (&map.source_j, &map.target_j) {
                (Some(_), Some(_)) => Some(holomorphy_residual(map, x)?),
                _ => None,
            };
            Ok(MapEval {
                x: x.clone(),
                conf: conformality(map, x)?,
                tension: tension(map, x)?,
                holomorphy,
            })
        })
        .collect()
}

fn conformality_side(cfg: &DiffConfig, evals: &[MapEval]) -> Side {
    let residual = max_of(evals.iter().map(|e| e.conf.conformality_residual));
    let scale = max_of(evals.iter().map(|e| e.conf.singular_values.first().map_or(0.0, |s| s * s)));
    Side::new(residual, cfg.tolerance(scale.max(1.0)))
}

fn tension_side(cfg: &DiffConfig, evals: &[MapEval]) -> Side {
    let residual = max_of(evals.iter().map(|e| e.tension.tension_norm));
    Side::new(residual, cfg.tolerance(max_of(evals.iter().map(|e| e.tension.scale))))
}

fn holomorphy_side(map: &MapSpec, evals: &[MapEval]) -> Result<Side> {
    if map.source_j.is_none() {
        return Err(GeoError::MissingStructure("source"));
    }
    if map.target_j.is_none() {
        return Err(GeoError::MissingStructure("target"));
    }
    let residual = max_of(evals.iter().map(|e| e.holomorphy.unwrap_or(f64::NAN)));
    let scale = 1.0 + max_of(evals.iter().map(|e| e.conf.differential.amax()));
    Ok(Side::new(residual, map.cfg.tolerance(scale)))
}

fn lee_side(cfg: &DiffConfig, evals: &[MapEval]) -> Result<Side> {
    let mut residual: f64 = 0.0;
    for e in evals {
        let v = e.tension.lee_pushforward_norm.ok_or(GeoError::MissingStructure("source or target"))?;
        residual = nan_max(residual, v);
    }
    Ok(Side::new(residual, cfg.tolerance(max_of(evals.iter().map(|e| e.tension.scale)))))
}

/// Result of a fibre-geometry quantity over the regular samples of a plan.
struct RegularStats {
    residual: f64,
    scale: f64,
    used: usize,
    excluded: usize,
    critical: usize,
}

impl RegularStats {
    fn side(&self, cfg: &DiffConfig) -> Side {
        Side::new(self.residual, cfg.tolerance(self.scale))
    }
}

/// Evaluates `f` at regular samples, skipping near-critical ones (capped at
/// [`MAX_EXCLUDED_FRACTION`]) and critical ones.
fn over_regular(
    evals: &[MapEval],
    require_regular: bool,
    f: impl Fn(&Point) -> Result<(f64, f64)> + Sync,
) -> Result<RegularStats> {
    let total = evals.len();
    let critical = evals.iter().filter(|e| e.conf.kind != PointKind::Regular).count();
    if require_regular && critical > 0 {
        let e = evals.iter().find(|e| e.conf.kind != PointKind::Regular).expect("counted");
        return Err(GeoError::CriticalPoint {
            point: e.x.iter().copied().collect(),
        });
    }
    let excluded = evals
        .iter()
        .filter(|e| e.conf.kind == PointKind::Regular && e.conf.near_critical)
        .count();
    if excluded as f64 > MAX_EXCLUDED_FRACTION * total as f64 {
        return Err(GeoError::TooManyExcluded { excluded, total });
    }
    let used: Vec<&MapEval> = evals
        .iter()
        .filter(|e| e.conf.kind == PointKind::Regular && !e.conf.near_critical)
        .collect();
    let vals: Vec<(f64, f64)> = used.par_iter().map(|e| f(&e.x)).collect::<Result<_>>()?;
    Ok(RegularStats {
        residual: max_of(vals.iter().map(|v| v.0)),
        scale: max_of(vals.iter().map(|v| v.1)).max(1.0),
        used: used.len(),
        excluded,
        critical,
    })
}

fn fibre_stats(map: &MapSpec, evals: &[MapEval], require_regular: bool) -> Result<RegularStats> {
    over_regular(evals, require_regular, |x| {
        let f = fibre_mean_curvature(map, x)?;
        Ok((f.norm, f.scale))
    })
}

fn report_for(map: &MapSpec, plan: &SamplePlan, kind: &str) -> VerificationReport {
    VerificationReport::new(format!("{kind}:{}", map.name), plan, &map.cfg, map.name.clone())
}

fn observe_dilation(report: &mut VerificationReport, evals: &[MapEval]) {
    let regular: Vec<f64> = evals
        .iter()
        .filter(|e| e.conf.kind == PointKind::Regular)
        .map(|e| e.conf.dilation)
        .collect();
    if !regular.is_empty() {
        report.observe("dilation_min", regular.iter().copied().fold(f64::INFINITY, f64::min));
        report.observe("dilation_max", max_of(regular.iter().copied()));
    }
    report.observe("critical_samples", (evals.len() - regular.len()) as f64);
}

/// Harmonic morphism = horizontally weakly conformal + harmonic.
pub fn check_harmonic_morphism(map: &MapSpec, plan: &SamplePlan) -> Result<VerificationReport> {
    let cfg = map.cfg;
    let pts = plan.points(&map.source)?;
    let evals = evaluate(map, &pts)?;
    let mut report = report_for(map, plan, "harmonic-morphism");
    let conf = conformality_side(&cfg, &evals);
    let tens = tension_side(&cfg, &evals);
    report.push(Check::threshold("horizontal_conformality", conf.residual, conf.tolerance, pts.len()));
    report.push(Check::threshold("tension", tens.residual, tens.tolerance, pts.len()));
    observe_dilation(&mut report, &evals);
    Ok(report)
}

/// Adds `|λ − 1|` and fibre minimality to a harmonic-morphism report, for
/// Riemannian submersions.
pub fn check_riemannian_submersion(map: &MapSpec, plan: &SamplePlan) -> Result<VerificationReport> {
    let cfg = map.cfg;
    let pts = plan.points(&map.source)?;
    let evals = evaluate(map, &pts)?;
    let mut report = report_for(map, plan, "riemannian-submersion");
    let conf = conformality_side(&cfg, &evals);
    let tens = tension_side(&cfg, &evals);
    report.push(Check::threshold("horizontal_conformality", conf.residual, conf.tolerance, pts.len()));
    let deviation = max_of(evals.iter().map(|e| (e.conf.dilation - 1.0).abs()));
    report.push(Check::threshold("dilation_deviation", deviation, cfg.tolerance(1.0), pts.len()));
    report.push(Check::threshold("tension", tens.residual, tens.tolerance, pts.len()));
    let fib = fibre_stats(map, &evals, true)?;
    let fs = fib.side(&cfg);
    report.push(Check::threshold("fibre_mean_curvature", fs.residual, fs.tolerance, fib.used).excluding(fib.excluded));
    observe_dilation(&mut report, &evals);
    Ok(report)
}

/// Holomorphy of `map` as a single gating check.
pub fn check_holomorphy(map: &MapSpec, plan: &SamplePlan) -> Result<VerificationReport> {
    let pts = plan.points(&map.source)?;
    let evals = evaluate(map, &pts)?;
    let hol = holomorphy_side(map, &evals)?;
    let mut report = report_for(map, plan, "holomorphy");
    report.push(Check::threshold("holomorphy", hol.residual, hol.tolerance, pts.len()));
    Ok(report)
}

/// For targets of real dimension > 2: any two of {harmonic morphism,
/// minimal fibres, horizontally homothetic} imply the third.
pub fn check_two_of_three(map: &MapSpec, plan: &SamplePlan) -> Result<VerificationReport> {
    if map.target.dim <= 2 {
        return Err(GeoError::TargetDimensionTooSmall { dim: map.target.dim });
    }
    let cfg = map.cfg;
    let pts = plan.points(&map.source)?;
    let evals = evaluate(map, &pts)?;
    let mut report = report_for(map, plan, "two-of-three");
    let conf = conformality_side(&cfg, &evals);
    let tens = tension_side(&cfg, &evals);
    let fib = fibre_stats(map, &evals, true)?;
    let hom = over_regular(&evals, true, |x| homothety_at(map, x))?;
    let (a, b, c) = (conf.and(tens), fib.side(&cfg), hom.side(&cfg));
    report.observe_against("harmonic_morphism.conformality", conf.residual, conf.tolerance);
    report.observe_against("harmonic_morphism.tension", tens.residual, tens.tolerance);
    report.observe_against("fibre_mean_curvature", b.residual, b.tolerance);
    report.observe_against("homothety", c.residual, c.tolerance);
    report.push(
        implication("two_of_three", &[(&[a, b], c), (&[a, c], b), (&[b, c], a)], fib.used)
            .excluding(fib.excluded.max(hom.excluded)),
    );
    observe_dilation(&mut report, &evals);
    Ok(report)
}

/// [`check_two_of_three`], routed to [`check_surface_case`] for 2-dimensional targets.
pub fn check_two_of_three_or_surface(map: &MapSpec, plan: &SamplePlan) -> Result<VerificationReport> {
    match check_two_of_three(map, plan) {
        Err(GeoError::TargetDimensionTooSmall { .. }) => {
            let mut r = check_surface_case(map, plan)?;
            r.note("target is a surface: routed to the surface case");
            Ok(r)
        }
        other => other,
    }
}

fn require_surface_target(map: &MapSpec) -> Result<()> {
    if map.target.dim != 2 {
        return Err(GeoError::WrongDimension {
            expected: 2,
            found: map.target.dim,
        });
    }
    Ok(())
}

/// Holomorphic maps to a Riemann surface: harmonic iff `dφ(JδJ) = 0` iff
/// the fibres are minimal at regular points.
pub fn check_surface_case(map: &MapSpec, plan: &SamplePlan) -> Result<VerificationReport> {
    require_surface_target(map)?;
    let cfg = map.cfg;
    let pts = plan.points(&map.source)?;
    let evals = evaluate(map, &pts)?;
    let mut report = report_for(map, plan, "surface-case");
    let hol = holomorphy_side(map, &evals)?;
    report.push(Check::threshold("holomorphy", hol.residual, hol.tolerance, pts.len()));
    let lee = lee_side(&cfg, &evals)?;
    let tens = tension_side(&cfg, &evals);
    let fib = fibre_stats(map, &evals, false)?;
    let fs = fib.side(&cfg);
    report.push(equivalence("lee_pushforward_iff_tension", lee, tens, pts.len()));
    report.push(equivalence("tension_iff_fibre_minimal", tens, fs, fib.used).excluding(fib.excluded));
    report.observe_against("lee_pushforward", lee.residual, lee.tolerance);
    report.observe_against("tension", tens.residual, tens.tolerance);
    report.observe_against("fibre_mean_curvature", fs.residual, fs.tolerance);
    report.observe("critical_samples", fib.critical as f64);
    if fib.critical > 0 {
        report.note(format!("{} critical samples skipped for fibre geometry", fib.critical));
    }
    Ok(report)
}

/// Fraction of target samples that have a preimage, found by Gauss–Newton
/// from the nearest image of a seeded pool of source points.
pub fn image_coverage(map: &MapSpec, plan: &SamplePlan) -> Result<(usize, usize)> {
    let targets = plan.points(&map.target)?;
    let pool_plan = SamplePlan {
        seed: plan.seed ^ 0x5eed_c0fe,
        count: (10 * plan.count).max(200),
        margin: plan.margin,
    };
    let pool = pool_plan.points(&map.source)?;
    let images: Vec<Point> = pool.par_iter().map(|x| map.apply(x)).collect::<Result<_>>()?;
    let covered = targets
        .par_iter()
        .map(|y| {
            let start = images
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - y).norm().total_cmp(&(b.1 - y).norm()))
                .map(|(i, _)| pool[i].clone());
            start.is_some_and(|x0| newton_preimage(map, plan, x0, y))
        })
        .filter(|&ok| ok)
        .count();
    Ok((covered, targets.len()))
}

fn newton_preimage(map: &MapSpec, plan: &SamplePlan, mut x: Point, y: &Point) -> bool {
    let goal = 1e-8 * (1.0 + y.norm());
    let Ok(mut r) = map.apply(&x).map(|v| v - y) else {
        return false;
    };
    for _ in 0..50 {
        if r.norm() <= goal {
            return true;
        }
        let Ok(dphi) = differential(map, &x) else {
            return false;
        };
        let Ok(pinv) = dphi.pseudo_inverse(1e-12) else {
            return false;
        };
        let dx = -(pinv * &r);
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let cand = &x + &dx * t;
            if plan.keeps_margin(&map.source, &cand) {
                if let Ok(v) = map.apply(&cand) {
                    let rc = v - y;
                    if rc.norm() < r.norm() {
                        x = cand;
                        r = rc;
                        moved = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !moved {
            return false;
        }
    }
    r.norm() <= goal
}

/// For a surjective, horizontally weakly conformal holomorphic map with
/// `dφ(JδJ) = 0` (e.g. from a cosymplectic source): the target is
/// cosymplectic iff the map is a harmonic morphism.
pub fn check_cosymplectic_image(map: &MapSpec, plan: &SamplePlan) -> Result<VerificationReport> {
    let cfg = map.cfg;
    let jt = map.target_j.as_ref().ok_or(GeoError::MissingStructure("target"))?;
    let pts = plan.points(&map.source)?;
    let evals = evaluate(map, &pts)?;
    let mut report = report_for(map, plan, "cosymplectic-image");
    let hol = holomorphy_side(map, &evals)?;
    if !hol.passes() {
        return Err(GeoError::PreconditionFailed(format!(
            "map is not holomorphic (residual {:e} > {:e})",
            hol.residual, hol.tolerance
        )));
    }
    let conf = conformality_side(&cfg, &evals);
    if !conf.passes() {
        return Err(GeoError::PreconditionFailed(format!(
            "map is not horizontally weakly conformal (residual {:e} > {:e})",
            conf.residual, conf.tolerance
        )));
    }
    let lee = lee_side(&cfg, &evals)?;
    if lee.passes() {
        report.note("source condition: dφ(JδJ) = 0 at all samples");
    } else {
        let js = map.source_j.as_ref().ok_or(GeoError::MissingStructure("source"))?;
        let src = classify_structure(js, plan, &cfg)?;
        if !src.verdicts.cosymplectic {
            return Err(GeoError::PreconditionFailed(format!(
                "source is not cosymplectic (residual {:e}) and dφ(JδJ) ≠ 0 (residual {:e})",
                src.residual_cosympl, lee.residual
            )));
        }
        report.note("source condition: source is cosymplectic");
    }
    let (covered, total) = image_coverage(map, plan)?;
    report.observe("image_coverage", covered as f64 / total as f64);
    if covered < total {
        return Err(GeoError::PreconditionFailed(format!(
            "sampled image covers {covered} of {total} target samples"
        )));
    }
    report.note("surjectivity replaced by coverage of seeded target samples");
    let target = classify_structure(jt, plan, &cfg)?;
    let cos = Side::new(target.residual_cosympl, target.tolerance);
    let tens = tension_side(&cfg, &evals);
    let hm = conf.and(tens);
    report.observe_against("target_cosymplectic", cos.residual, cos.tolerance);
    report.observe_against("tension", tens.residual, tens.tolerance);
    report.observe_against("horizontal_conformality", conf.residual, conf.tolerance);
    report.push(equivalence("cosymplectic_iff_harmonic_morphism", cos, hm, pts.len()));
    Ok(report)
}

/// `τ(φ) = −dφ(JδJ)` for holomorphic maps into (1,2)-symplectic targets.
pub fn check_lemma_tension(map: &MapSpec, plan: &SamplePlan) -> Result<VerificationReport> {
    let cfg = map.cfg;
    let jt = map.target_j.as_ref().ok_or(GeoError::MissingStructure("target"))?;
    let pts = plan.points(&map.source)?;
    let evals = evaluate(map, &pts)?;
    let mut report = report_for(map, plan, "lemma-tension");
    let hol = holomorphy_side(map, &evals)?;
    if !hol.passes() {
        return Err(GeoError::PreconditionFailed(format!(
            "map is not holomorphic (residual {:e} > {:e})",
            hol.residual, hol.tolerance
        )));
    }
    let target = classify_structure(jt, plan, &cfg)?;
    if !target.verdicts.symplectic_12 {
        return Err(GeoError::PreconditionFailed(format!(
            "target is not (1,2)-symplectic (residual {:e})",
            target.residual_12sympl
        )));
    }
    let mut residual: f64 = 0.0;
    for e in &evals {
        let y = map.apply(&e.x)?;
        let h = map.target.metric(&y, &cfg)?;
        let tau = DVector::from_column_slice(&e.tension.tension);
        let lee = DVector::from_column_slice(e.tension.lee_pushforward.as_deref().unwrap_or_default());
        residual = nan_max(residual, norm(&h, &(tau + lee)));
    }
    let tol = cfg.tolerance(max_of(evals.iter().map(|e| e.tension.scale)));
    report.push(Check::threshold("lemma_residual", residual, tol, pts.len()));
    report.observe("tension_max", max_of(evals.iter().map(|e| e.tension.tension_norm)));
    report.observe(
        "lee_pushforward_max",
        max_of(evals.iter().map(|e| e.tension.lee_pushforward_norm.unwrap_or(0.0))),
    );
    report.observe_against("target_12sympl", target.residual_12sympl, target.tolerance);
    Ok(report)
}

/// For the structure lifted from the target of a horizontally conformal
/// submersion with 2-dimensional fibres: superminimal fibres and
/// `[H^{1,0},H^{1,0}]^V ⊂ V^{1,0}` imply integrability.
pub fn check_integrability_theorem(map: &MapSpec, orientation: i8, plan: &SamplePlan) -> Result<VerificationReport> {
    let cfg = map.cfg;
    let jt = map.target_j.as_ref().ok_or(GeoError::MissingStructure("target"))?;
    let j = lift_structure(map, orientation)?;
    let target = classify_structure(jt, plan, &cfg)?;
    if !target.verdicts.integrable {
        return Err(GeoError::PreconditionFailed(format!(
            "target structure is not integrable (residual {:e})",
            target.residual_integrable
        )));
    }
    let pts = plan.points(&map.source)?;
    let confs: Vec<ConformalityData> = pts.par_iter().map(|x| conformality(map, x)).collect::<Result<_>>()?;
    if let Some(i) = confs.iter().position(|c| c.kind != PointKind::Regular) {
        return Err(GeoError::CriticalPoint {
            point: pts[i].iter().copied().collect(),
        });
    }
    let excluded = confs.iter().filter(|c| c.near_critical).count();
    if excluded as f64 > MAX_EXCLUDED_FRACTION * pts.len() as f64 {
        return Err(GeoError::TooManyExcluded {
            excluded,
            total: pts.len(),
        });
    }
    let used: Vec<Point> = pts
        .iter()
        .zip(&confs)
        .filter(|(_, c)| !c.near_critical)
        .map(|(x, _)| x.clone())
        .collect();
    let mut report = report_for(map, plan, "integrability");
    report.note(format!("structure lifted with orientation {orientation:+}"));
    let invariants = max_of(
        used.par_iter()
            .map(|x| j.invariant_residuals(x, &cfg).map(|(a, b)| a.max(b)))
            .collect::<Result<Vec<_>>>()?,
    );
    report.push(Check::threshold("lifted_structure_invariants", invariants, 1e-9, used.len()).excluding(excluded));
    let lifted: StructureReport = classify_at(&j, used.clone(), &cfg)?;
    let sm = max_of(
        used.par_iter()
            .map(|x| superminimality_residual(map, &j, x))
            .collect::<Result<Vec<_>>>()?,
    );
    let c2 = max_of(
        used.par_iter()
            .map(|x| condition_ii_residual_at(map, &j, x))
            .collect::<Result<Vec<_>>>()?,
    );
    let tol = lifted.tolerance;
    let (s_sm, s_c2, s_nij) = (Side::new(sm, tol), Side::new(c2, tol), Side::new(lifted.residual_integrable, tol));
    report.observe_against("superminimality", sm, tol);
    report.observe_against("condition_ii", c2, tol);
    report.observe_against("nijenhuis", lifted.residual_integrable, tol);
    report.observe_against("nabla_j", lifted.residual_kahler, tol);
    report.push(implication("integrability_implication", &[(&[s_sm, s_c2], s_nij)], used.len()).excluding(excluded));
    Ok(report)
}

/// `∇_{δJ}J = ∇_{JδJ}J = 0` in complex dimension 2, probed on the Hermitian
/// frame and four seeded random unit vectors per sample.
pub fn check_gauduchon(j: &AlmostComplexField, plan: &SamplePlan, cfg: &DiffConfig) -> Result<VerificationReport> {
    if j.chart.dim != 4 {
        return Err(GeoError::WrongDimension {
            expected: 4,
            found: j.chart.dim,
        });
    }
    let pts = plan.points(&j.chart)?;
    let per_point: Vec<(f64, f64, f64, f64)> = pts
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let nj = NablaJ::compute(j, x, cfg)?;
            let frame = hermitian_frame(j, x, cfg)?;
            let g = &nj.metric;
            let mut probes = frame.real_frame.vectors.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ (0xa5a5_0000 + i as u64));
            for _ in 0..4 {
                let v = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
                let n = norm(g, &v);
                probes.push(v / n);
            }
            let dj = nj.divergence_in_frame(&frame.real_frame.vectors);
            let jdj = &nj.j * &dj;
            let (a, b) = (nj.along(&dj), nj.along(&jdj));
            let r1 = max_of(probes.iter().map(|y| norm(g, &(&a * y))));
            let r2 = max_of(probes.iter().map(|y| norm(g, &(&b * y))));
            let scale = (1.0 + nj.gamma.magnitude()) * (1.0 + dj.amax());
            Ok((r1, r2, norm(g, &dj), scale))
        })
        .collect::<Result<_>>()?;
    let mut report = VerificationReport::new(format!("gauduchon:{}", j.chart.name), plan, cfg, j.chart.name.clone());
    let tol = cfg.tolerance(max_of(per_point.iter().map(|p| p.3)));
    report.push(Check::threshold("nabla_deltaJ_J", max_of(per_point.iter().map(|p| p.0)), tol, pts.len()));
    report.push(Check::threshold("nabla_JdeltaJ_J", max_of(per_point.iter().map(|p| p.1)), tol, pts.len()));
    report.observe("delta_j_norm_min", per_point.iter().map(|p| p.2).fold(f64::INFINITY, f64::min));
    report.observe("delta_j_norm_max", max_of(per_point.iter().map(|p| p.2)));
    report.observe("probes_per_sample", 8.0);
    Ok(report)
}

/// Holomorphic map from a complex-dimension-2 source to a Riemann surface:
/// fibres superminimal at regular points iff `dφ(δJ) = 0`.
pub fn check_superminimal_fibres(map: &MapSpec, plan: &SamplePlan) -> Result<VerificationReport> {
    require_surface_target(map)?;
    let js = map.source_j.as_ref().ok_or(GeoError::MissingStructure("source"))?;
    if map.source.dim != 4 {
        return Err(GeoError::WrongDimension {
            expected: 4,
            found: map.source.dim,
        });
    }
    let cfg = map.cfg;
    let pts = plan.points(&map.source)?;
    let evals = evaluate(map, &pts)?;
    let mut report = report_for(map, plan, "superminimal-fibres");
    let hol = holomorphy_side(map, &evals)?;
    report.push(Check::threshold("holomorphy", hol.residual, hol.tolerance, pts.len()));
    let sm = over_regular(&evals, false, |x| {
        let r = superminimality_residual(map, js, x)?;
        Ok((r, 1.0 + christoffel(&map.source, x, &cfg)?.magnitude()))
    })?;
    let dd = over_regular(&evals, false, |x| {
        let nj = NablaJ::compute(js, x, &cfg)?;
        let frame = hermitian_frame(js, x, &cfg)?;
        let dj = nj.divergence_in_frame(&frame.real_frame.vectors);
        let dphi: DMatrix<f64> = differential(map, x)?;
        let y = map.apply(x)?;
        let h = map.target.metric(&y, &cfg)?;
        let v = &dphi * &dj;
        Ok((norm(&h, &v), (1.0 + nj.gamma.magnitude()) * (1.0 + dphi.amax())))
    })?;
    let (s_sm, s_dd) = (sm.side(&cfg), dd.side(&cfg));
    report.observe_against("superminimality", s_sm.residual, s_sm.tolerance);
    report.observe_against("dphi_deltaJ", s_dd.residual, s_dd.tolerance);
    report.observe("critical_samples", sm.critical as f64);
    report.push(equivalence("superminimal_iff_dphi_deltaJ_zero", s_sm, s_dd, sm.used).excluding(sm.excluded));
    Ok(report)
}

/// Structure classification with the Kähler ⇒ (1,2)-symplectic ⇒
/// cosymplectic hierarchy and real/complex-form agreement as checks.
pub fn check_classification(
    j: &AlmostComplexField,
    plan: &SamplePlan,
    cfg: &DiffConfig,
) -> Result<(VerificationReport, StructureReport)> {
    let rep = classify_structure(j, plan, cfg)?;
    let n = rep.samples.len();
    let mut report = VerificationReport::new(format!("classify:{}", j.chart.name), plan, cfg, j.chart.name.clone());
    let t = rep.tolerance;
    let k = Side::new(rep.residual_kahler, t);
    let s = Side::new(rep.residual_12sympl, t);
    let c = Side::new(rep.residual_cosympl, t);
    report.push(implication("hierarchy", &[(&[k], s), (&[s], c)], n));
    report.push(equivalence("forms_agree_12sympl", s, Side::new(rep.residual_12sympl_complex, t), n));
    report.push(equivalence("forms_agree_cosympl", c, Side::new(rep.residual_cosympl_complex, t), n));
    for (name, v) in [
        ("residual_kahler", rep.residual_kahler),
        ("residual_12sympl", rep.residual_12sympl),
        ("residual_cosympl", rep.residual_cosympl),
        ("residual_integrable", rep.residual_integrable),
        ("residual_12sympl_complex", rep.residual_12sympl_complex),
        ("residual_cosympl_complex", rep.residual_cosympl_complex),
    ] {
        report.observe_against(name, v, t);
    }
    Ok((report, rep))
}
