//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use common::*;
use hodge_currents::cli::{run_scenario, OperationResult, RunOptions, RunReport, Scenario};
use hodge_currents::currents::*;
use hodge_currents::forms::{domega_residual, DomegaPoint};
use hodge_currents::hefer::{hefer_decompose, HeferCache};
use hodge_currents::operators::*;
use hodge_currents::polycore::{BaseGrid, ComplexRational, Variety};
use hodge_currents::residue::*;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

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

fn global(v: &Variety, radial: usize, angular: usize) -> VQuadrature {
    VQuadrature::build(
        v,
        &VQuadratureConfig::global(v, BaseGrid::Plane { radial, angular }),
    )
    .unwrap()
}

fn mixed(nv: usize, i: usize, j: usize) -> GlobalFunction {
    GlobalFunction::new(BiPoly::var(nv, i).mul(&BiPoly::var_bar(nv, j)), 1)
}

fn scenario(name: &str) -> Scenario {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"));
    Scenario::load(&p).unwrap()
}

fn run(name: &str, workers: usize, cache: &Path) -> RunReport {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .unwrap();
    let s = scenario(name);
    let opts = RunOptions {
        seed: None,
        tolerance_scale: 1.0,
        cache: HeferCache::new(cache),
    };
    pool.install(|| run_scenario(&s, &opts).unwrap())
}

fn c1_hefer() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = Instant::now();
    let mut ok = 0;
    for _ in 0..50 {
        let nv = rng.gen_range(2..=5);
        let d = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=10);
        let p = random_poly(&mut rng, nv, d, k);
        if hefer_decompose(&p).map(|h| h.verify()).unwrap_or(false) {
            ok += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    (
        ok == 50 && secs < 10.0,
        format!("{ok}/50 exact, {secs:.3}s (limit 10s)"),
    )
}

fn c2_residues() -> Outcome {
    let pt = BaseGrid::Points(vec![(vec![], 1.0)]);
    let one = |_: &VNode| vec![(0u64, C64::new(1.0, 0.0))];
    // (a) 1/w
    let v = variety(vec![poly(2, &[(&[0, 1], 1)])]);
    let vq = VQuadrature::build(&v, &single(0, vec![0], pt.clone())).unwrap();
    let ea = (fibered_residue(&vq, &one, 0.5, 2).unwrap().extrapolated() - two_pi_i()).norm();
    // (b) 1/(w1 w2)
    let v = variety(vec![
        poly(3, &[(&[0, 1, 0], 1)]),
        poly(3, &[(&[0, 0, 1], 1)]),
    ]);
    let vq = VQuadrature::build(&v, &single(0, vec![0, 1], pt.clone())).unwrap();
    let eb = (fibered_residue(&vq, &one, 0.5, 1).unwrap().extrapolated() - two_pi_i() * two_pi_i())
        .norm();
    // (c) h dw / w^a through the tube
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let path = admissible_path(1, PathFamily::ExpTower).unwrap();
    let mut ec: f64 = 0.0;
    for trial in 0..10 {
        let a = 1 + trial % 4;
        let v = variety(vec![poly(2, &[(&[0, a as u32], 1)])]);
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
            base: pt.clone(),
            phase_nodes: 16,
            weight: TubeWeight::Unit,
        };
        let num = |w: &[C64]| vec![(0u64, h(w))];
        let t = tube_integrate(&v, &tg, &num, &path, &[0.2, 0.1, 0.05]).unwrap();
        ec = ec.max((t.extrapolated() - want).norm() / want.norm().max(1.0));
    }
    (
        ea < 1e-12 && eb < 1e-10 && ec < 1e-10,
        format!("(a) {ea:.1e} < 1e-12, (b) {eb:.1e} < 1e-10, (c) {ec:.1e} < 1e-10"),
    )
}

fn cubic_patch() -> (Variety, BaseGrid) {
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

fn c3_tube_vs_fibered() -> Outcome {
    let (v, grid) = cubic_patch();
    let vq = VQuadrature::build(&v, &single(0, vec![1], grid.clone())).unwrap();
    let tg = TubeGrid {
        chart: 0,
        fiber: vec![1],
        base: grid,
        phase_nodes: 16,
        weight: TubeWeight::Unit,
    };
    let path = admissible_path(1, PathFamily::ExpTower).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let num = random_numerator(100 + seed);
        let f = fibered_residue(&vq, &|n: &VNode| num(&n.w), 0.5, 1)
            .unwrap()
            .extrapolated();
        let t = tube_integrate(&v, &tg, &num, &path, &[0.04, 0.02, 0.01])
            .unwrap()
            .extrapolated();
        worst = worst.max((f - t).norm() / f.norm());
    }
    (
        worst <= 1e-3,
        format!("max relative {worst:.2e} <= 1e-3 over 5 numerators"),
    )
}

fn c4_weighted() -> Outcome {
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
    (
        r.relative_difference <= 1e-3,
        format!("relative difference {:.2e} <= 1e-3", r.relative_difference),
    )
}

fn c5_domega() -> Outcome {
    let polys = [fermat(3, 3)];
    let hefer: Vec<_> = polys
        .iter()
        .map(|p| hefer_decompose(p).unwrap().compile())
        .collect();
    let num: Vec<_> = polys.iter().map(|p| p.compile()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let zeta: Vec<C64> = (0..3).map(|_| rc(&mut rng)).collect();
        let z: Vec<C64> = (0..3).map(|_| rc(&mut rng)).collect();
        let mu = vec![0.9 * rng.gen_range(0.05..0.3)];
        let pt = DomegaPoint {
            zeta_bar: zeta.iter().map(|v| v.conj()).collect(),
            z_bar: z.iter().map(|v| v.conj()).collect(),
            zeta,
            z,
            lambda: rng.gen_range(0.05..0.3),
            mu,
        };
        worst = worst.max(
            domega_residual(&pt, &hefer, &num, 1e-5)
                .unwrap()
                .relative_residual,
        );
    }
    (
        worst <= 1e-5,
        format!("100 points, worst relative residual {worst:.2e} <= 1e-5"),
    )
}

fn c6_bm() -> Outcome {
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
    (
        r.pass,
        format!(
            "2 functions x 10 points, max relative {:.2e} <= 1e-3",
            r.max_relative_error
        ),
    )
}

fn c7_low_degree(cache: &Path) -> Outcome {
    let mut notes = vec![];
    let mut ok = true;
    for name in ["line", "conic-structural-zero"] {
        let r = run(name, 1, cache);
        let v = &r.values;
        let mut exact_all = true;
        let mut structural = v.variety.structural_zero && v.quadrature.levels.is_empty();
        for op in &v.operations {
            match &op.result {
                Some(OperationResult::Exactness { report, .. }) => {
                    exact_all &= report.exact && report.structural
                }
                Some(OperationResult::Project { output, .. }) => {
                    structural &= output.structural_zero && output.moments.is_empty()
                }
                _ => {}
            }
        }
        ok &= r.pass() && exact_all && structural;
        notes.push(format!(
            "{name}: structural zero {structural}, all exact {exact_all}"
        ));
    }
    (ok, notes.join("; "))
}

fn c8_rank() -> Outcome {
    let v = variety(vec![fermat(3, 3)]);
    let hs: Vec<_> = v
        .polys
        .iter()
        .map(|p| hefer_decompose(p).unwrap())
        .collect();
    let pr = ProjectorSetup::new(&v, &hs, PROJECTOR_SIGMA).unwrap();
    let q = global(&v, 12, 18);
    let anti = make_antiholomorphic(&v, None, None, "anti").unwrap();
    let e01 = make_exact_current(&v, &mixed(3, 0, 1).as_form(), "exact 01").unwrap();
    let e12 = make_exact_current(&v, &mixed(3, 1, 2).as_form(), "exact 12").unwrap();
    let comb = ResidualCurrent::combination(
        &[
            (ComplexRational::from_integer(2), &anti),
            (ComplexRational::from_gaussian(0, 1), &e12),
        ],
        "combination",
    )
    .unwrap();
    let ideal = make_ideal_current(&v, 0, &anti, "ideal").unwrap();
    let cs = [&anti, &e01, &e12, &comb, &ideal];
    let basis = DualizingSection::basis(&v).unwrap();
    let r = pairing_rank(&v, &pr, &cs, &basis, &q, 1e-3, 0.0).unwrap();
    let row = |i: usize| {
        r.matrix[i]
            .iter()
            .map(|(a, b)| a * a + b * b)
            .sum::<f64>()
            .sqrt()
    };
    let scale = row(0);
    let kill = row(1).max(row(2)) / scale;
    // sections with smooth factors widen the matrix so the gap is finite
    let mut wide = vec![];
    for b in &basis {
        for (i, j) in [(0, 0), (1, 1), (0, 1)] {
            wide.push(b.with_factor(mixed(3, i, j)).unwrap());
        }
        wide.push(b.clone());
    }
    let rw = pairing_rank(&v, &pr, &cs, &wide, &q, 1e-3, 0.0).unwrap();
    let ok = r.rank == 1 && r.gap >= 10.0 && rw.rank == 1 && rw.gap >= 10.0 && kill <= 1e-2;
    (
        ok,
        format!(
            "5 currents: rank {} gap {:.1e}; with factor sections rank {} gap {:.1e}; exact/anti {kill:.1e} <= 1e-2",
            r.rank, r.gap, rw.rank, rw.gap
        ),
    )
}

fn c8_stretch() -> Outcome {
    let v = variety(vec![fermat(3, 4)]);
    let hs: Vec<_> = v
        .polys
        .iter()
        .map(|p| hefer_decompose(p).unwrap())
        .collect();
    let pr = ProjectorSetup::new(&v, &hs, PROJECTOR_SIGMA).unwrap();
    let q = global(&v, 12, 18);
    let mut cs = vec![];
    for i in 0..3 {
        let mut e = vec![0u32; 3];
        e[i] = 1;
        let h = poly(3, &[(&e, 1)]);
        cs.push(make_antiholomorphic(&v, Some(&h), None, &format!("anti z{i}")).unwrap());
    }
    cs.push(make_exact_current(&v, &mixed(3, 0, 1).as_form(), "exact").unwrap());
    let refs: Vec<&ResidualCurrent> = cs.iter().collect();
    let mut wide = vec![];
    for b in DualizingSection::basis(&v).unwrap() {
        for (i, j) in [(0, 0), (1, 1), (0, 1)] {
            wide.push(b.with_factor(mixed(3, i, j)).unwrap());
        }
        wide.push(b);
    }
    let r = pairing_rank(&v, &pr, &refs, &wide, &q, 1e-3, 0.0).unwrap();
    (
        r.rank == 3 && r.gap >= 10.0,
        format!("quartic rank {} gap {:.1e}", r.rank, r.gap),
    )
}

fn c9_homotopy(cache: &Path) -> Outcome {
    let r = run("fermat-cubic-homotopy", 1, cache);
    let mut notes = vec![];
    let mut ok = r.pass();
    for op in &r.values.operations {
        if let Some(OperationResult::Homotopy(h)) = &op.result {
            let rel: Vec<String> = h
                .levels
                .iter()
                .map(|l| format!("{:.1e}", l.relative))
                .collect();
            notes.push(format!(
                "{}: [{}] monotone {}",
                h.current,
                rel.join(", "),
                h.monotone
            ));
            ok &= h.pass;
        } else {
            ok = false;
        }
    }
    (ok, format!("residual/scale <= 5e-2; {}", notes.join("; ")))
}

fn c10_ideal() -> Outcome {
    let v = variety(vec![fermat(3, 3)]);
    let hs: Vec<_> = v
        .polys
        .iter()
        .map(|p| hefer_decompose(p).unwrap())
        .collect();
    let so = SolverSetup::new(&v, &hs, SOLVER_SIGMA).unwrap();
    let q = global(&v, 12, 18);
    let anti = make_antiholomorphic(&v, None, None, "anti").unwrap();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..2 {
        let ideal = make_ideal_current(&v, 0, &anti, "ideal").unwrap();
        let ideal = if k == 0 {
            ideal
        } else {
            // F·F̄·(anti + exact)
            let ex = make_exact_current(&v, &mixed(3, 2, 0).as_form(), "exact").unwrap();
            let base = ResidualCurrent::combination(
                &[
                    (ComplexRational::one(), &anti),
                    (ComplexRational::one(), &ex),
                ],
                "sum",
            )
            .unwrap();
            make_ideal_current(&v, 0, &base, "ideal 2").unwrap()
        };
        for i in [5usize, 301, 777] {
            let z = &q.nodes[i % q.nodes.len()].zeta;
            worst = worst.max(solve_dbar(&so, &ideal, &q, z, 0.4, 2, 0.0).unwrap().norm());
            scale = scale.max(solve_dbar(&so, &anti, &q, z, 0.4, 2, 0.0).unwrap().norm());
        }
    }
    (
        worst <= 1e-2 * scale,
        format!("max |I[ideal]| {worst:.1e} <= 1e-2 x {scale:.2e}"),
    )
}

fn c11_determinism(cache: &Path) -> Outcome {
    let mut notes = vec![];
    let mut ok = true;
    for name in ["fermat-cubic", "torus-cp3"] {
        let a = run(name, 1, cache).values_json();
        let b = run(name, 4, cache).values_json();
        let c = run(name, 1, cache).values_json();
        let same = a == b && a == c;
        ok &= same;
        notes.push(format!(
            "{name}: {}",
            if same { "identical" } else { "DIFFERENT" }
        ));
    }
    (ok, format!("workers 1 and 4; {}", notes.join(", ")))
}

fn main() {
    let cache = tempfile::tempdir().unwrap();
    let cache = cache.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 hefer exactness", Box::new(c1_hefer)),
        ("2 residue oracles", Box::new(c2_residues)),
        ("3 tube vs fibered", Box::new(c3_tube_vs_fibered)),
        ("4 weighted tube", Box::new(c4_weighted)),
        ("5 domega identity", Box::new(c5_domega)),
        ("6 bochner-martinelli", Box::new(c6_bm)),
        ("7 low degree", Box::new(|| c7_low_degree(cache))),
        ("8 cubic rank", Box::new(c8_rank)),
        ("8 quartic rank (stretch)", Box::new(c8_stretch)),
        ("9 homotopy", Box::new(|| c9_homotopy(cache))),
        ("10 ideal currents", Box::new(c10_ideal)),
        ("11 determinism", Box::new(|| c11_determinism(cache))),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let t = Instant::now();
        let (ok, detail) =
            catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| (false, "panicked".into()));
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({detail}) [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
