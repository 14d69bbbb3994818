mod common;

use std::f64::consts::PI;

use common::*;
use hodge_currents::polycore::BaseGrid;
use hodge_currents::residue::*;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn two_pi_i() -> C64 {
    C64::new(0.0, 2.0 * PI)
}

fn single(chart: usize, fiber: Vec<usize>, grid: BaseGrid) -> VQuadratureConfig {
    VQuadratureConfig {
        grid,
        charts: vec![chart],
        partition_of_unity: false,
        projection: ProjectionMode::Single { fiber },
    }
}

#[test]
fn cauchy_kernel() {
    let v = variety(vec![poly(2, &[(&[0, 1], 1)])]);
    let grid = BaseGrid::Points(vec![(vec![], 1.0)]);
    let vq = VQuadrature::build(&v, &single(0, vec![0], grid.clone())).unwrap();
    let one = |_: &VNode| vec![(0u64, C64::new(1.0, 0.0))];
    let r = fibered_residue(&vq, &one, 0.5, 2).unwrap();
    assert!((r.extrapolated() - two_pi_i()).norm() < 1e-12);

    let tg = TubeGrid {
        chart: 0,
        fiber: vec![0],
        base: grid,
        phase_nodes: 8,
        weight: TubeWeight::Unit,
    };
    let path = admissible_path(1, PathFamily::ExpTower).unwrap();
    let t = tube_integrate(
        &v,
        &tg,
        &|_: &[C64]| vec![(0u64, C64::new(1.0, 0.0))],
        &path,
        &[0.1, 0.05, 0.025],
    )
    .unwrap();
    assert!((t.extrapolated() - two_pi_i()).norm() < 1e-12);
}

#[test]
fn torus_codim_two() {
    let v = variety(vec![
        poly(3, &[(&[0, 1, 0], 1)]),
        poly(3, &[(&[0, 0, 1], 1)]),
    ]);
    let grid = BaseGrid::Points(vec![(vec![], 1.0)]);
    let vq = VQuadrature::build(&v, &single(0, vec![0, 1], grid.clone())).unwrap();
    let r = fibered_residue(&vq, &|_: &VNode| vec![(0u64, C64::new(1.0, 0.0))], 0.5, 1).unwrap();
    let want = two_pi_i() * two_pi_i();
    assert!((r.extrapolated() - want).norm() < 1e-10);

    let tg = TubeGrid {
        chart: 0,
        fiber: vec![0, 1],
        base: grid,
        phase_nodes: 8,
        weight: TubeWeight::Unit,
    };
    let path = admissible_path(2, PathFamily::ExpTower).unwrap();
    let t = tube_integrate(
        &v,
        &tg,
        &|_: &[C64]| vec![(0u64, C64::new(1.0, 0.0))],
        &path,
        &[0.5, 0.4, 0.3],
    )
    .unwrap();
    assert!(
        (t.extrapolated() - want).norm() < 1e-10,
        "{:?}",
        t.extrapolated()
    );
}

#[test]
fn higher_order_poles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let path = admissible_path(1, PathFamily::ExpTower).unwrap();
    for trial in 0..10 {
        let a = 1 + trial % 4;
        let mut e = vec![0u32; 2];
        e[1] = a as u32;
        let v = variety(vec![poly(2, &[(&e, 1)])]);
        let coeffs: Vec<C64> = (0..6).map(|_| rc(&mut rng)).collect();
        let want = two_pi_i() * coeffs[a - 1];
        let h = move |w: &[C64]| {
            coeffs
                .iter()
                .rev()
                .fold(C64::default(), |acc, c| acc * w[0] + c)
        };
        let tg = TubeGrid {
            chart: 0,
            fiber: vec![0],
            base: BaseGrid::Points(vec![(vec![], 1.0)]),
            phase_nodes: 16,
            weight: TubeWeight::Unit,
        };
        let num = |w: &[C64]| vec![(0u64, h(w))];
        let t = tube_integrate(&v, &tg, &num, &path, &[0.2, 0.1, 0.05]).unwrap();
        // 2πi h^{(a−1)}(0)/(a−1)! is 2πi times the coefficient of w^{a−1}.
        assert!(
            (t.extrapolated() - want).norm() < 1e-10 * want.norm().max(1.0),
            "a={a}"
        );
    }
}

fn cubic_patch() -> (hodge_currents::polycore::Variety, BaseGrid) {
    (
        variety(vec![fermat(3, 3)]),
        BaseGrid::Disc {
            radius: 0.6,
            radial: 12,
            angular: 16,
        },
    )
}

fn random_numerator(seed: u64) -> impl Fn(&[C64]) -> FormCoeffs + Sync {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<C64> = (0..8).map(|_| rc(&mut rng)).collect();
    move |w: &[C64]| {
        let (a, b) = (w[0], w[1]);
        vec![
            (1u64, c[0] + c[1] * a + c[2] * b.conj() + c[3] * a * b),
            (2u64, c[4] + c[5] * b + c[6] * a.conj() * b + c[7] * a * a),
        ]
    }
}

#[test]
fn tube_matches_fibered_on_cubic_patch() {
    let (v, grid) = cubic_patch();
    let vq = VQuadrature::build(&v, &single(0, vec![1], grid.clone())).unwrap();
    assert_eq!(vq.exclusions.excluded_roots, 0);
    let tg = TubeGrid {
        chart: 0,
        fiber: vec![1],
        base: grid,
        phase_nodes: 16,
        weight: TubeWeight::Unit,
    };
    let path = admissible_path(1, PathFamily::ExpTower).unwrap();
    for seed in 0..5 {
        let num = random_numerator(seed);
        let f = fibered_residue(&vq, &|n: &VNode| num(&n.w), 0.5, 1)
            .unwrap()
            .extrapolated();
        let t = tube_integrate(&v, &tg, &num, &path, &[0.04, 0.02, 0.01])
            .unwrap()
            .extrapolated();
        assert!((f - t).norm() <= 1e-3 * f.norm(), "seed {seed}: {f} vs {t}");
    }
}

#[test]
fn weighted_tube_limit_agrees() {
    let (v, grid) = cubic_patch();
    let tg = TubeGrid {
        chart: 0,
        fiber: vec![1],
        base: grid,
        phase_nodes: 16,
        weight: TubeWeight::Sphere { scale: 4.0 },
    };
    let path = admissible_path(1, PathFamily::ExpTower).unwrap();
    let num = random_numerator(7);
    let r = weighted_tube_equivalence(&v, &tg, &num, &path, &[0.04, 0.02, 0.01]).unwrap();
    assert!(r.relative_difference < 1e-3, "{}", r.relative_difference);
}

#[test]
fn limit_independent_of_path() {
    let (v, grid) = cubic_patch();
    let tg = TubeGrid {
        chart: 0,
        fiber: vec![1],
        base: grid,
        phase_nodes: 16,
        weight: TubeWeight::Unit,
    };
    let num = random_numerator(3);
    let p1 = admissible_path(1, PathFamily::ExpTower).unwrap();
    let p2 = admissible_path(1, PathFamily::Power { p: 2.0 }).unwrap();
    let a = tube_integrate(&v, &tg, &num, &p1, &[0.04, 0.02, 0.01])
        .unwrap()
        .extrapolated();
    let b = tube_integrate(&v, &tg, &num, &p2, &[0.2, 0.14, 0.1])
        .unwrap()
        .extrapolated();
    assert!((a - b).norm() <= 1e-3 * a.norm());
}
