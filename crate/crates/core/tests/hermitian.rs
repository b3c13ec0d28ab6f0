use std::sync::Arc;

use hmorph::catalog;
use hmorph::hermitian::{
    classify_structure, divergence_j, hermitian_frame, nijenhuis_fields, standard_complex_matrix, AlmostComplexField,
    CVector, NablaJ,
};
use hmorph::manifold::{Chart, Domain, VectorField};
use hmorph::maps::lift_structure;
use hmorph::numdiff::norm;
use hmorph::{DiffConfig, Point, SamplePlan};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn pt(v: &[f64]) -> Point {
    DVector::from_row_slice(v)
}

fn catalog_structures() -> Vec<(String, AlmostComplexField)> {
    let mut out: Vec<(String, AlmostComplexField)> = Vec::new();
    let mut push = |e: catalog::CatalogEntry| out.push((e.id.clone(), e.structure().unwrap().clone()));
    push(catalog::flat_torus());
    push(catalog::flat_torus_n(2));
    push(catalog::complex_projective(1));
    push(catalog::complex_projective(2));
    for (r, s) in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1)] {
        push(catalog::calabi_eckmann(r, s));
    }
    for n in [1, 2] {
        let map = catalog::punctured_hopf(n).unwrap().map.unwrap();
        for o in [1, -1] {
            out.push((format!("punctured-hopf-{n}-lift{o:+}"), lift_structure(&map, o).unwrap()));
        }
    }
    out
}

/// `J` rotating with `x_1` inside `R⁴`; not integrable.
fn twisted_structure() -> AlmostComplexField {
    let chart = Arc::new(Chart::euclidean("R4", Domain::unbounded(4), vec![(-1.0, 1.0); 4]));
    AlmostComplexField::intrinsic(chart, |x| {
        let (c, s) = (x[0].cos(), x[0].sin());
        let mut r = DMatrix::identity(4, 4);
        r[(1, 1)] = c;
        r[(1, 2)] = -s;
        r[(2, 1)] = s;
        r[(2, 2)] = c;
        Ok(&r * standard_complex_matrix(4) * r.transpose())
    })
}

#[test]
fn catalog_structures_satisfy_type_invariants() {
    let cfg = DiffConfig::default();
    let plan = SamplePlan::for_config(5, 20, &cfg);
    for (id, j) in catalog_structures() {
        for x in plan.points(&j.chart).unwrap() {
            let (square, compat) = j.invariant_residuals(&x, &cfg).unwrap();
            assert!(square <= 1e-9 && compat <= 1e-9, "{id}: {square} {compat}");
        }
    }
}

#[test]
fn hermitian_frames_are_unitary_on_hopf_surface() {
    let cfg = DiffConfig::default();
    let j = catalog::hopf_surface().structure.unwrap();
    let plan = SamplePlan::for_config(21, 10, &cfg);
    for x in plan.points(&j.chart).unwrap() {
        let g = j.chart.metric(&x, &cfg).unwrap();
        let f = hermitian_frame(&j, &x, &cfg).unwrap();
        for (k, zk) in f.complex_frame.iter().enumerate() {
            for (l, zl) in f.complex_frame.iter().enumerate() {
                let (re, im) = zk.bilinear(&g, &zl.conj());
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((re - want).abs() <= 1e-12 && im.abs() <= 1e-12);
                let (re, im) = zk.bilinear(&g, zl);
                assert!(re.abs() <= 1e-12 && im.abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn classification_is_hierarchical_and_forms_agree() {
    let cfg = DiffConfig::default();
    let plan = SamplePlan::for_config(9, 20, &cfg);
    for (id, j) in catalog_structures() {
        let rep = classify_structure(&j, &plan, &cfg).unwrap();
        assert!(rep.hierarchy_consistent, "{id}: {rep:?}");
        assert!(rep.forms_agree, "{id}: {rep:?}");
        let v = rep.verdicts;
        assert!(!v.kahler || v.symplectic_12, "{id}");
        assert!(!v.symplectic_12 || v.cosymplectic, "{id}");
    }
}

#[test]
fn nijenhuis_is_tensorial() {
    let cfg = DiffConfig::default();
    let j = twisted_structure();
    let chart = j.chart.clone();
    fn xf_eval(p: &Point) -> DVector<f64> {
        pt(&[1.0, p[2], 0.0, p[0] * p[1]])
    }
    let xf = VectorField::new(chart.clone(), |p| Ok(xf_eval(p)));
    let yf = VectorField::new(chart.clone(), |p| Ok(pt(&[p[3].sin(), 0.5, 1.0, 0.0])));
    let f = |p: &Point| 1.0 + p[0] * p[0] + (p[1] * p[3]).cos();
    let fx = VectorField::new(chart, move |p| Ok(xf_eval(p) * f(p)));
    let plan = SamplePlan::for_config(2, 10, &cfg);
    for x in plan.points(&j.chart).unwrap() {
        let base = nijenhuis_fields(&j, &xf, &yf, &x, &cfg).unwrap();
        let scaled = nijenhuis_fields(&j, &fx, &yf, &x, &cfg).unwrap();
        let defect = (&scaled - &base * f(&x)).amax();
        assert!(base.amax() > 1e-2, "structure must be non-integrable");
        assert!(defect <= 1e-6, "tensoriality defect {defect} at {x}");
    }
}

fn orthogonal(entries: &[f64], d: usize) -> DMatrix<f64> {
    let a = DMatrix::from_row_slice(d, d, entries) + DMatrix::identity(d, d) * 3.0;
    a.qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn divergence_is_frame_independent(
        entries in proptest::collection::vec(-1.0f64..1.0, 36),
        seed in 0u64..1000,
    ) {
        let cfg = DiffConfig::default();
        let e = catalog::calabi_eckmann(1, 1);
        let j = e.structure.unwrap();
        let x = SamplePlan::for_config(seed, 1, &cfg).points(&j.chart).unwrap().remove(0);
        let frame = hermitian_frame(&j, &x, &cfg).unwrap();
        let q = orthogonal(&entries, 6);
        let cols = DMatrix::from_columns(&frame.real_frame.vectors) * q;
        let rotated: Vec<DVector<f64>> = cols.column_iter().map(|c| c.into_owned()).collect();
        let nj = NablaJ::compute(&j, &x, &cfg).unwrap();
        let a = divergence_j(&j, &x, &cfg).unwrap();
        let b = nj.divergence_in_frame(&rotated);
        let tol = 10.0 * cfg.tolerance(1.0 + nj.gamma.magnitude());
        prop_assert!((&a - &b).amax() <= tol, "{} > {tol}", (&a - &b).amax());
    }

    #[test]
    fn type_projectors_split_and_diagonalize(
        re in proptest::collection::vec(-3.0f64..3.0, 6),
        im in proptest::collection::vec(-3.0f64..3.0, 6),
        seed in 0u64..1000,
    ) {
        let cfg = DiffConfig::default();
        let j = catalog::calabi_eckmann(1, 1).structure.unwrap();
        let x = SamplePlan::for_config(seed, 1, &cfg).points(&j.chart).unwrap().remove(0);
        let jm = j.at(&x, &cfg).unwrap();
        let g = j.chart.metric(&x, &cfg).unwrap();
        let v = CVector::new(DVector::from_vec(re), DVector::from_vec(im));
        let p10 = v.part_10(&jm);
        let sum = p10.add(&v.part_01(&jm));
        prop_assert!((&sum.re - &v.re).amax() <= 1e-12 && (&sum.im - &v.im).amax() <= 1e-12);
        let jp = p10.apply(&jm);
        let ip = p10.times_i();
        let diff = CVector::new(&jp.re - &ip.re, &jp.im - &ip.im);
        prop_assert!(diff.hermitian_norm(&g) <= 1e-9 * (1.0 + norm(&g, &v.re) + norm(&g, &v.im)));
    }
}
