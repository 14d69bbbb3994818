mod common;

use common::*;
use hodge_currents::currents::*;
use hodge_currents::hefer::hefer_decompose;
use hodge_currents::operators::*;
use hodge_currents::polycore::{BaseGrid, ComplexRational, Variety};
use hodge_currents::residue::*;
use num_complex::Complex64 as C64;

fn setups(v: &Variety) -> (ProjectorSetup, SolverSetup) {
    let hs: Vec<_> = v
        .polys
        .iter()
        .map(|p| hefer_decompose(p).unwrap())
        .collect();
    (
        ProjectorSetup::new(v, &hs, PROJECTOR_SIGMA).unwrap(),
        SolverSetup::new(v, &hs, SOLVER_SIGMA).unwrap(),
    )
}

fn vq(v: &Variety, radial: usize, angular: usize) -> VQuadrature {
    VQuadrature::build(
        v,
        &VQuadratureConfig::global(v, BaseGrid::Plane { radial, angular }),
    )
    .unwrap()
}

/// z_i z̄_j / |z|².
fn mixed(nv: usize, i: usize, j: usize) -> GlobalFunction {
    GlobalFunction::new(BiPoly::var(nv, i).mul(&BiPoly::var_bar(nv, j)), 1)
}

fn linear(nv: usize, i: usize) -> hodge_currents::polycore::HomogeneousPolynomial {
    let mut e = vec![0u32; nv];
    e[i] = 1;
    poly(nv, &[(&e, 1)])
}

fn sphere(z: &[C64]) -> Vec<C64> {
    let n = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    z.iter().map(|v| v / n).collect()
}

#[test]
fn projector_reproduces_section_pairings() {
    for d in [3u32, 4] {
        let v = variety(vec![fermat(3, d)]);
        let (pr, _) = setups(&v);
        let g = projector_gram(&pr, &v, &vq(&v, 24, 32), 0.0, 0).unwrap();
        for (e, row) in g.iter().enumerate() {
            for (f, x) in row.iter().enumerate() {
                let want = if e == f { 1.0 } else { 0.0 };
                assert!((x - want).norm() < 1e-2, "d={d} G[{e}][{f}] = {x}");
            }
        }
    }
}

#[test]
fn factorized_projector_matches_phase_trapezoid() {
    let v = variety(vec![fermat(3, 4)]);
    let (pr, _) = setups(&v);
    let q = vq(&v, 6, 8);
    let phi = make_antiholomorphic(&v, Some(&linear(3, 1)), None, "anti z1").unwrap();
    let mu: Vec<C64> = projector_moments(&pr, &v, &phi, &q, 0.0, 0)
        .unwrap()
        .iter()
        .map(|r| r.extrapolated())
        .collect();
    for z in [
        vec![C64::new(0.5, 0.1), C64::new(-0.3, 0.4), C64::new(0.2, -0.6)],
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.7), C64::new(-0.1, 0.2)],
    ] {
        let z = sphere(&z);
        let a = hodge_project(&pr, &mu, &z);
        let b = hodge_project_literal(&pr, &phi, &q, &z, 0.0, 0).unwrap();
        let scale = a.iter().map(|p| p.1.norm()).fold(0.0, f64::max);
        for ((ka, va), (kb, vb)) in a.iter().zip(&b) {
            assert_eq!(ka, kb);
            assert!((va - vb).norm() < 1e-10 * scale);
        }
    }
}

#[test]
fn low_degree_projector_is_structural_zero() {
    for d in [1u32, 2] {
        let v = variety(vec![fermat(3, d)]);
        let (pr, _) = setups(&v);
        assert!(pr.is_structural_zero());
        let phi = make_antiholomorphic(&v, None, None, "anti").unwrap();
        let out = projector_output(
            &pr,
            &v,
            &phi,
            None,
            &[vec![C64::new(1.0, 0.0), C64::default(), C64::default()]],
            0.0,
            0,
        )
        .unwrap();
        assert!(out.structural_zero && out.points[0].value.is_empty());
        let ex = exactness_test(&v, &phi, None, 1.0, 1e-2, 0.0).unwrap();
        assert!(ex.exact && ex.structural);
    }
}

#[test]
fn solver_inverts_dbar_on_exact_currents() {
    let v = variety(vec![fermat(3, 3)]);
    let (_, so) = setups(&v);
    let q = vq(&v, 24, 36);
    let psi = mixed(3, 0, 1);
    let phi = make_exact_current(&v, &psi.as_form(), "dbar psi").unwrap();
    let picks = [35usize, 1400, 2939, 5439];
    let vals: Vec<(C64, C64)> = picks
        .iter()
        .map(|&i| {
            let z = &q.nodes[i % q.nodes.len()].zeta;
            let out = solve_dbar(&so, &phi, &q, z, 0.4, 3, 0.0).unwrap();
            (out.value().iter().map(|p| p.1).sum(), psi.num.eval(z))
        })
        .collect();
    let scale = vals.iter().map(|p| p.1.norm()).fold(0.0, f64::max);
    for k in 1..vals.len() {
        let got = vals[k].0 - vals[0].0;
        let want = vals[k].1 - vals[0].1;
        assert!((got - want).norm() < 2e-2 * scale, "{got} vs {want}");
    }
}

#[test]
fn solver_vanishes_on_ideal_currents() {
    let v = variety(vec![fermat(3, 3)]);
    let (_, so) = setups(&v);
    let q = vq(&v, 6, 8);
    let anti = make_antiholomorphic(&v, None, None, "anti").unwrap();
    let ideal = make_ideal_current(&v, 0, &anti, "F·anti").unwrap();
    let z = q.nodes[3].zeta.clone();
    let out = solve_dbar(&so, &ideal, &q, &z, 0.3, 2, 0.0).unwrap();
    assert!(out.norm() < 1e-12);
}

#[test]
fn homotopy_identity_with_holomorphic_section() {
    let v = variety(vec![fermat(3, 3)]);
    let (pr, so) = setups(&v);
    let ladder: Vec<VQuadrature> = [(8, 12), (16, 24), (24, 36)]
        .iter()
        .map(|&(r, a)| vq(&v, r, a))
        .collect();
    let gamma = DualizingSection::basis(&v).unwrap().remove(0);
    let anti = make_antiholomorphic(&v, None, None, "anti").unwrap();
    let exact = make_exact_current(&v, &mixed(3, 0, 1).as_form(), "exact").unwrap();
    let scale = pair_current(&anti, &gamma, ladder.last().unwrap(), 0.0, 0)
        .unwrap()
        .extrapolated()
        .norm();
    for phi in [&anti, &exact] {
        let h = homotopy_check(
            &v,
            &pr,
            Some(&so),
            phi,
            &gamma,
            &ladder,
            scale,
            5e-2,
            0.0,
            0.2,
        )
        .unwrap();
        assert!(
            h.pass,
            "{}: {:?}",
            phi.label,
            h.levels.iter().map(|l| l.relative).collect::<Vec<_>>()
        );
    }
}

#[test]
fn homotopy_identity_with_smooth_factor() {
    // ψ·f must carry the μ_3³ charge of γ, otherwise the pairing vanishes by symmetry
    let v = variety(vec![fermat(3, 3)]);
    let (pr, so) = setups(&v);
    let q = vq(&v, 12, 15);
    let gamma = DualizingSection::basis(&v)
        .unwrap()
        .remove(0)
        .with_factor(mixed(3, 0, 2))
        .unwrap();
    let phi = make_exact_current(&v, &mixed(3, 0, 1).as_form(), "exact").unwrap();
    let h = homotopy_check(
        &v,
        &pr,
        Some(&so),
        &phi,
        &gamma,
        std::slice::from_ref(&q),
        1.0,
        1.0,
        0.0,
        0.2,
    )
    .unwrap();
    let lvl = &h.levels[0];
    let pair = lvl.pairing.extrapolated();
    assert!(pair.norm() > 1.0);
    assert!(
        lvl.residual < 5e-2 * pair.norm(),
        "pair {pair} I {} L {}",
        lvl.solver_term.extrapolated(),
        lvl.projector_term.extrapolated()
    );
}

#[test]
fn rank_detects_genus() {
    for (d, genus) in [(3u32, 1usize), (4, 3)] {
        let v = variety(vec![fermat(3, d)]);
        let (pr, _) = setups(&v);
        let q = vq(&v, 12, 18);
        let mut currents = vec![];
        if d == 3 {
            currents.push(make_antiholomorphic(&v, None, None, "anti").unwrap());
        } else {
            for i in 0..3 {
                currents.push(
                    make_antiholomorphic(&v, Some(&linear(3, i)), None, &format!("anti z{i}"))
                        .unwrap(),
                );
            }
        }
        currents.push(make_exact_current(&v, &mixed(3, 0, 1).as_form(), "exact 01").unwrap());
        currents.push(make_exact_current(&v, &mixed(3, 1, 2).as_form(), "exact 12").unwrap());
        let comb = ResidualCurrent::combination(
            &[
                (ComplexRational::from_integer(2), &currents[0]),
                (ComplexRational::one(), &currents[currents.len() - 1]),
            ],
            "combination",
        )
        .unwrap();
        currents.push(comb);
        currents.push(make_ideal_current(&v, 0, &currents[0], "ideal").unwrap());
        let mut sections = vec![];
        for b in DualizingSection::basis(&v).unwrap() {
            for (i, j) in [(0, 0), (1, 1), (0, 1)] {
                sections.push(b.with_factor(mixed(3, i, j)).unwrap());
            }
            sections.push(b);
        }
        let refs: Vec<&ResidualCurrent> = currents.iter().collect();
        let r = pairing_rank(&v, &pr, &refs, &sections, &q, 1e-3, 0.0).unwrap();
        assert_eq!(r.rank, genus, "d={d} sv {:?}", r.singular_values);
        assert!(r.gap >= 10.0);
    }
}

#[test]
fn projector_kills_exact_currents() {
    let v = variety(vec![fermat(3, 3)]);
    let (_pr, _) = setups(&v);
    let q = vq(&v, 16, 24);
    let gamma = DualizingSection::basis(&v).unwrap().remove(0);
    let anti = make_antiholomorphic(&v, None, None, "anti").unwrap();
    let scale = pair_current(&anti, &gamma, &q, 0.0, 0)
        .unwrap()
        .extrapolated()
        .norm();
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        let ex = make_exact_current(&v, &mixed(3, i, j).as_form(), "exact").unwrap();
        let t = exactness_test(&v, &ex, Some(&q), scale, 1e-2, 0.0).unwrap();
        assert!(t.exact, "{:?}", t.pairings);
    }
    let t = exactness_test(&v, &anti, Some(&q), scale, 1e-2, 0.0).unwrap();
    assert!(!t.exact);
}

#[test]
fn bochner_martinelli_reproduces_holomorphic_functions() {
    let c = vec![C64::new(2.0, 0.0), C64::default(), C64::default()];
    let f1 = |z: &[C64]| z[1] / z[0];
    let f2 = |z: &[C64]| z[1] * z[2] / (z[0] * z[0]);
    let pts: Vec<Vec<C64>> = (0..10)
        .map(|k| {
            let t = k as f64;
            vec![
                C64::new(2.0 + 0.3 * t.cos(), 0.2 * (1.3 * t).sin()),
                C64::new(0.3 * (0.7 * t).sin(), 0.1),
                C64::new(-0.2, 0.3 * (0.4 * t).cos()),
            ]
        })
        .collect();
    let r = bm_reproduction_check(&[&f1, &f2], &c, 1.0, &pts, 1e-3);
    assert!(r.pass, "{}", r.max_relative_error);
}

#[test]
fn projector_output_is_smooth_and_phase_invariant() {
    let v = variety(vec![fermat(3, 4)]);
    let (pr, _) = setups(&v);
    let q = vq(&v, 6, 8);
    let phi = make_antiholomorphic(&v, Some(&linear(3, 0)), None, "anti").unwrap();
    let mu: Vec<C64> = projector_moments(&pr, &v, &phi, &q, 0.0, 0)
        .unwrap()
        .iter()
        .map(|r| r.extrapolated())
        .collect();
    let pts: Vec<Vec<C64>> = q.nodes.iter().step_by(97).map(|n| n.zeta.clone()).collect();
    let s = smoothness_probe(&pr, &mu, &pts, 1e-3, 7);
    assert!(s.phase_residual < 1e-12);
    assert!(s.curvature < 1e3);
}
