use serde::Serialize;

use super::checks::*;
use super::report::{Check, VerificationReport};
use crate::catalog::{self, CatalogEntry, MobiusParams};
use crate::error::{GeoError, Result};
use crate::hermitian::StructureVerdicts;
use crate::numdiff::DiffConfig;
use crate::sampling::SamplePlan;

/// A registered scenario and the overall verdict the theory predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScenarioInfo {
    pub id: &'static str,
    pub description: &'static str,
    pub expected: bool,
}

const fn info(id: &'static str, description: &'static str, expected: bool) -> ScenarioInfo {
    ScenarioInfo {
        id,
        description,
        expected,
    }
}

const SCENARIOS: &[ScenarioInfo] = &[
    info("torus-classify", "structure classes of the flat torus", true),
    info("cp1-classify", "structure classes of CP^1 (Fubini-Study)", true),
    info("cp2-classify", "structure classes of CP^2 (Fubini-Study)", true),
    info("ce-0-0-classify", "structure classes of S^1 x S^1", true),
    info("ce-1-0-classify", "structure classes of the Hopf surface S^3 x S^1", true),
    info("ce-0-1-classify", "structure classes of S^1 x S^3", true),
    info("ce-1-1-classify", "structure classes of S^3 x S^3", true),
    info("ce-2-1-classify", "structure classes of S^5 x S^3", true),
    info("ce-0-0-deltaJ", "δJ of S^1 x S^1 against the closed form", true),
    info("ce-1-0-deltaJ", "δJ of S^3 x S^1 against the closed form", true),
    info("ce-0-1-deltaJ", "δJ of S^1 x S^3 against the closed form", true),
    info("ce-1-1-deltaJ", "δJ of S^3 x S^3 against the closed form", true),
    info("ce-2-1-deltaJ", "δJ of S^5 x S^3 against the closed form", true),
    info("hopf-s3", "Hopf map S^3 -> CP^1 is a holomorphic Riemannian submersion with minimal fibres", true),
    info("hopf-s5", "Hopf map S^5 -> CP^2 is a harmonic morphism", true),
    info("hopf-mobius-a", "Hopf map followed by w -> 2w is a harmonic morphism", true),
    info("hopf-mobius-b", "Hopf map followed by a Möbius map is a harmonic morphism", true),
    info("hopf-surface-surface-case", "Hopf map S^3 x S^1 -> CP^1: surface-case equivalences", true),
    info("hopf-surface-coordinate-surface-case", "w = c e^(-ψ) z_0 on S^3 x S^1: surface-case equivalences", true),
    info("hopf-surface-coordinate-lemma", "tension lemma for w = c e^(-ψ) z_0 on S^3 x S^1", true),
    info("hopf-surface-gauduchon", "∇_{δJ}J = ∇_{JδJ}J = 0 on the Hopf surface", true),
    info("torus4-gauduchon", "∇_{δJ}J = ∇_{JδJ}J = 0 on the flat 4-torus", true),
    info("hopf-surface-superminimal", "Hopf map S^3 x S^1 -> CP^1: superminimal fibres iff dφ(δJ) = 0", true),
    info("hopf-surface-coordinate-superminimal", "w = c e^(-ψ) z_0: superminimal fibres iff dφ(δJ) = 0", true),
    info("product-hopf-1-1-harmonic", "product Hopf map S^3 x S^3 -> CP^1 x CP^1 is a harmonic morphism", true),
    info("product-hopf-2-1-harmonic", "product Hopf map S^5 x S^3 -> CP^2 x CP^1 is a harmonic morphism", true),
    info("product-hopf-1-1-two-of-three", "two-of-three theorem on the product Hopf map", true),
    info("product-hopf-1-1-scaled-two-of-three", "two-of-three theorem with a rescaled target metric", true),
    info("product-hopf-1-1-lemma", "tension lemma on the product Hopf map S^3 x S^3", true),
    info("product-hopf-2-1-lemma", "tension lemma on the product Hopf map S^5 x S^3", true),
    info("product-hopf-1-1-cosymplectic-image", "cosymplectic target iff harmonic morphism (product Hopf)", true),
    info(
        "product-hopf-1-1-perturbed-cosymplectic-image",
        "cosymplectic target iff harmonic morphism (conformally perturbed target)",
        true,
    ),
    info("torus-lemma", "tension lemma for a holomorphic map from the flat torus to CP^1", true),
    info("torus-identity-cosymplectic-image", "cosymplectic target iff harmonic morphism (torus identity)", true),
    info("torus-conjugation-harmonic", "conjugation of the flat torus is a harmonic morphism", true),
    info("torus-quadratic-harmonic", "a quadratic shear of the torus is not a harmonic morphism", false),
    info("torus-constant-surface-case", "constant map of the torus: surface case holds vacuously", true),
    info("torus-projection-two-of-three", "projection T^4 -> T^2 (routed to the surface case)", true),
    info("torus-projection-integrability", "lifted structure of T^4 -> T^2 is integrable", true),
    info("punctured-hopf-1-lift-plus", "C^2 minus 0 -> CP^1, lifted structure, orientation +1", true),
    info("punctured-hopf-1-lift-minus", "C^2 minus 0 -> CP^1, lifted structure, orientation -1", true),
    info("punctured-hopf-2-lift-plus", "C^3 minus 0 -> CP^2, lifted structure, orientation +1", true),
    info("punctured-hopf-2-lift-minus", "C^3 minus 0 -> CP^2, lifted structure, orientation -1", true),
    info("punctured-hopf-2-two-of-three", "two-of-three theorem on C^3 minus 0 -> CP^2", true),
];

/// All registered scenarios, in listing order.
pub fn scenarios() -> &'static [ScenarioInfo] {
    SCENARIOS
}

pub fn scenario_info(id: &str) -> Option<&'static ScenarioInfo> {
    SCENARIOS.iter().find(|s| s.id == id)
}

/// Second Möbius map used with the Hopf map; its pole `w = 50` lies far
/// outside the sampled image.
pub const MOBIUS_B: MobiusParams = MobiusParams {
    a: [1.0, 0.5],
    b: [0.3, 0.0],
    c: [-0.02, 0.0],
    d: [1.0, 0.0],
};

const MOBIUS_A: MobiusParams = MobiusParams {
    a: [2.0, 0.0],
    b: [0.0, 0.0],
    c: [0.0, 0.0],
    d: [1.0, 0.0],
};

fn parse_ce(id: &str, suffix: &str) -> Option<(usize, usize)> {
    let rest = id.strip_prefix("ce-")?.strip_suffix(suffix)?;
    let (r, s) = rest.split_once('-')?;
    Some((r.parse().ok()?, s.parse().ok()?))
}

fn expected_class(id: &str) -> Option<StructureVerdicts> {
    let all = StructureVerdicts {
        kahler: true,
        symplectic_12: true,
        cosymplectic: true,
        integrable: true,
    };
    match id {
        "torus-classify" | "cp1-classify" | "cp2-classify" | "ce-0-0-classify" => Some(all),
        _ if parse_ce(id, "-classify").is_some() => Some(StructureVerdicts {
            kahler: false,
            symplectic_12: false,
            cosymplectic: false,
            integrable: true,
        }),
        _ => None,
    }
}

fn classification(entry: CatalogEntry, id: &str, plan: &SamplePlan, cfg: &DiffConfig) -> Result<VerificationReport> {
    let (mut report, rep) = check_classification(entry.structure()?, plan, cfg)?;
    if let Some(expected) = expected_class(id) {
        let got = rep.verdicts;
        let mismatches = [
            got.kahler != expected.kahler,
            got.symplectic_12 != expected.symplectic_12,
            got.cosymplectic != expected.cosymplectic,
            got.integrable != expected.integrable,
        ]
        .iter()
        .filter(|&&m| m)
        .count();
        report.push(Check::threshold("expected_class", mismatches as f64, 0.0, rep.samples.len()));
    }
    for (name, v) in [
        ("kahler", rep.verdicts.kahler),
        ("symplectic_12", rep.verdicts.symplectic_12),
        ("cosymplectic", rep.verdicts.cosymplectic),
        ("integrable", rep.verdicts.integrable),
    ] {
        report.observe(format!("verdict.{name}"), if v { 1.0 } else { 0.0 });
    }
    Ok(report)
}

/// Componentwise `δJ` against the closed form `−2(rJ₁n₁ + sJ₂n₂)`.
pub fn check_divergence_reference(entry: &CatalogEntry, plan: &SamplePlan, cfg: &DiffConfig) -> Result<VerificationReport> {
    use crate::hermitian::{divergence_j, hermitian_frame};
    use crate::manifold::christoffel;
    use rayon::prelude::*;
    let j = entry.structure()?;
    let reference = entry
        .reference_divergence
        .as_ref()
        .ok_or(GeoError::MissingStructure("closed-form δJ"))?;
    let pts = plan.points(&entry.chart)?;
    let per_point: Vec<(f64, f64, f64)> = pts
        .par_iter()
        .map(|x| {
            let dj = divergence_j(j, x, cfg)?;
            let err = (&dj - reference(x)?).amax();
            let g = entry.chart.metric(x, cfg)?;
            let _ = hermitian_frame(j, x, cfg)?;
            let n = crate::numdiff::norm(&g, &dj);
            Ok((err, n, 1.0 + christoffel(&entry.chart, x, cfg)?.magnitude()))
        })
        .collect::<Result<_>>()?;
    let mut report = VerificationReport::new(entry.id.clone(), plan, cfg, entry.description.clone());
    let err = per_point.iter().map(|p| p.0).fold(0.0, f64::max);
    let tol = cfg.tolerance(per_point.iter().map(|p| p.2).fold(1.0, f64::max));
    report.push(Check::threshold("delta_j_reference", err, tol, pts.len()));
    report.observe("delta_j_norm_min", per_point.iter().map(|p| p.1).fold(f64::INFINITY, f64::min));
    report.observe("delta_j_norm_max", per_point.iter().map(|p| p.1).fold(0.0, f64::max));
    Ok(report)
}

fn submersion_with_holomorphy(
    entry: &CatalogEntry,
    holo: &CatalogEntry,
    plan: &SamplePlan,
    prefix: &str,
) -> Result<VerificationReport> {
    let mut report = check_riemannian_submersion(entry.map()?, plan)?;
    report.absorb(prefix, check_holomorphy(holo.map()?, plan)?);
    Ok(report)
}

/// Runs a registered scenario. Deterministic in `(id, plan, cfg)`.
pub fn run_scenario(id: &str, plan: &SamplePlan, cfg: &DiffConfig) -> Result<VerificationReport> {
    let info = scenario_info(id).ok_or_else(|| GeoError::UnknownScenario(id.to_string()))?;
    cfg.validate()?;
    plan.validate()?;
    let c = *cfg;
    let built = |e: Result<CatalogEntry>| e.map(|e| e.with_config(c));
    let mut provenance = String::new();
    let mut track = |e: CatalogEntry| {
        provenance = e.description.clone();
        e
    };
    let mut report = match id {
        "torus-classify" => classification(track(catalog::flat_torus()), id, plan, cfg)?,
        "cp1-classify" => classification(track(catalog::complex_projective(1)), id, plan, cfg)?,
        "cp2-classify" => classification(track(catalog::complex_projective(2)), id, plan, cfg)?,
        _ if parse_ce(id, "-classify").is_some() => {
            let (r, s) = parse_ce(id, "-classify").expect("checked");
            classification(track(catalog::calabi_eckmann(r, s)), id, plan, cfg)?
        }
        _ if parse_ce(id, "-deltaJ").is_some() => {
            let (r, s) = parse_ce(id, "-deltaJ").expect("checked");
            check_divergence_reference(&track(catalog::calabi_eckmann(r, s)), plan, cfg)?
        }
        "hopf-s3" => {
            let e = track(built(catalog::hopf_map(1))?);
            let ext = built(catalog::hopf_extension(1))?;
            let mut r = submersion_with_holomorphy(&e, &ext, plan, "extension.")?;
            r.note("S^3 carries no almost-complex structure; holomorphy is checked on the S^3 x S^1 extension");
            r
        }
        "hopf-s5" => {
            let e = track(built(catalog::hopf_map(2))?);
            let ext = built(catalog::hopf_extension(2))?;
            submersion_with_holomorphy(&e, &ext, plan, "extension.")?
        }
        "hopf-mobius-a" | "hopf-mobius-b" => {
            let (p, tag) = if id == "hopf-mobius-a" { (MOBIUS_A, "a") } else { (MOBIUS_B, "b") };
            let e = track(catalog::mobius_postcompose(&built(catalog::hopf_map(1))?, p, tag)?);
            check_harmonic_morphism(e.map()?, plan)?
        }
        "hopf-surface-surface-case" => check_surface_case(track(built(catalog::hopf_extension(1))?).map()?, plan)?,
        "hopf-surface-coordinate-surface-case" => {
            check_surface_case(track(built(catalog::hopf_surface_coordinate_map(0.5))?).map()?, plan)?
        }
        "hopf-surface-coordinate-lemma" => {
            check_lemma_tension(track(built(catalog::hopf_surface_coordinate_map(0.5))?).map()?, plan)?
        }
        "hopf-surface-gauduchon" => check_gauduchon(track(catalog::hopf_surface()).structure()?, plan, cfg)?,
        "torus4-gauduchon" => check_gauduchon(track(catalog::flat_torus_n(2)).structure()?, plan, cfg)?,
        "hopf-surface-superminimal" => {
            check_superminimal_fibres(track(built(catalog::hopf_extension(1))?).map()?, plan)?
        }
        "hopf-surface-coordinate-superminimal" => {
            check_superminimal_fibres(track(built(catalog::hopf_surface_coordinate_map(0.5))?).map()?, plan)?
        }
        "product-hopf-1-1-harmonic" | "product-hopf-2-1-harmonic" => {
            let r = if id.starts_with("product-hopf-1") { 1 } else { 2 };
            let e = track(built(catalog::product_hopf(r, 1))?);
            submersion_with_holomorphy(&e, &e, plan, "")?
        }
        "product-hopf-1-1-two-of-three" => check_two_of_three(track(built(catalog::product_hopf(1, 1))?).map()?, plan)?,
        "product-hopf-1-1-scaled-two-of-three" => {
            check_two_of_three(track(built(catalog::product_hopf_scaled(1, 1, 1.5))?).map()?, plan)?
        }
        "product-hopf-1-1-lemma" => check_lemma_tension(track(built(catalog::product_hopf(1, 1))?).map()?, plan)?,
        "product-hopf-2-1-lemma" => check_lemma_tension(track(built(catalog::product_hopf(2, 1))?).map()?, plan)?,
        "product-hopf-1-1-cosymplectic-image" => {
            check_cosymplectic_image(track(built(catalog::product_hopf(1, 1))?).map()?, plan)?
        }
        "product-hopf-1-1-perturbed-cosymplectic-image" => {
            check_cosymplectic_image(track(built(catalog::product_hopf_perturbed(1, 1, 0.5))?).map()?, plan)?
        }
        "torus-lemma" => check_lemma_tension(track(catalog::torus_exp_to_cp1().with_config(c)).map()?, plan)?,
        "torus-identity-cosymplectic-image" => {
            let t = track(catalog::flat_torus());
            let j = t.structure()?.clone();
            let map = crate::maps::MapSpec::new("torus-identity", t.chart.clone(), t.chart.clone(), |x| Ok(x.clone()))
                .with_source_structure(j.clone())
                .with_target_structure(j)
                .with_config(c);
            check_cosymplectic_image(&map, plan)?
        }
        "torus-conjugation-harmonic" => {
            check_harmonic_morphism(track(catalog::torus_conjugation().with_config(c)).map()?, plan)?
        }
        "torus-quadratic-harmonic" => check_harmonic_morphism(track(catalog::torus_quadratic().with_config(c)).map()?, plan)?,
        "torus-constant-surface-case" => check_surface_case(track(catalog::torus_constant().with_config(c)).map()?, plan)?,
        "torus-projection-two-of-three" => {
            check_two_of_three_or_surface(track(catalog::torus_projection().with_config(c)).map()?, plan)?
        }
        "torus-projection-integrability" => {
            check_integrability_theorem(track(catalog::torus_projection().with_config(c)).map()?, 1, plan)?
        }
        "punctured-hopf-1-lift-plus"
        | "punctured-hopf-1-lift-minus"
        | "punctured-hopf-2-lift-plus"
        | "punctured-hopf-2-lift-minus" => {
            let n = if id.starts_with("punctured-hopf-1") { 1 } else { 2 };
            let orientation = if id.ends_with("plus") { 1 } else { -1 };
            check_integrability_theorem(track(built(catalog::punctured_hopf(n))?).map()?, orientation, plan)?
        }
        "punctured-hopf-2-two-of-three" => check_two_of_three(track(built(catalog::punctured_hopf(2))?).map()?, plan)?,
        _ => return Err(GeoError::UnknownScenario(id.to_string())),
    };
    report.scenario_id = info.id.to_string();
    report.metadata.provenance = provenance;
    Ok(report)
}
