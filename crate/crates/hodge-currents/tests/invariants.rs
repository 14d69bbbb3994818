mod common;

use common::*;
use hodge_currents::currents::{BiPoly, ChartForm, ChartFormCoefficient, GlobalForm};
use hodge_currents::forms::exterior::{ExteriorForm, Generator};
use hodge_currents::hefer::hefer_decompose;
use hodge_currents::polycore::{
    chart_coords, chart_lift, partition_of_unity, ComplexRational, MultiIndex, Variety,
};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cx() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| C64::new(a, b))
}

fn point(nv: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(cx(), nv)
        .prop_filter("away from zero", |z| z.iter().all(|v| v.norm() > 1e-3))
}

/// Random BiPoly in `nv` variables with total degree ≤ 2 in each of x and x̄.
fn bipoly(nv: usize, seed: u64) -> BiPoly {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = BiPoly::zero(nv);
    for _ in 0..4 {
        let mut t = BiPoly::constant(
            nv,
            ComplexRational::from_gaussian(rng.gen_range(-3..=3), rng.gen_range(-3..=3)),
        );
        for _ in 0..rng.gen_range(0..=2) {
            t = t.mul(&BiPoly::var(nv, rng.gen_range(0..nv)));
        }
        for _ in 0..rng.gen_range(0..=2) {
            t = t.mul(&BiPoly::var_bar(nv, rng.gen_range(0..nv)));
        }
        p = p.add(&t);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn polynomials_are_homogeneous(seed in 0u64..1000, nv in 2usize..5, d in 1u32..6, z in point(4), t in cx()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_poly(&mut rng, nv, d, 4);
        let z = &z[..nv];
        let tz: Vec<C64> = z.iter().map(|v| v * t).collect();
        let lhs = p.eval(&tz).unwrap();
        let rhs = p.eval(z).unwrap() * t.powu(d);
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn chart_maps_are_consistent(z in point(4), alpha in 0usize..4, beta in 0usize..4) {
        let w = chart_coords(alpha, &z).unwrap();
        let back = chart_lift(alpha, &w);
        for (a, b) in back.iter().zip(&z) {
            prop_assert!((a * z[alpha] - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
        let v = Variety::new(vec![fermat(4, 3)], None).unwrap();
        let wb = v.change_chart(alpha, beta, &w).unwrap();
        let direct = chart_coords(beta, &z).unwrap();
        for (a, b) in wb.iter().zip(&direct) {
            prop_assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()));
        }
        let f = v.chart_eval(alpha, &w).0[0];
        let g = v.chart_eval(beta, &wb).0[0];
        // F^{(α)} = P/z_α^d
        let p = v.polys[0].eval(&z).unwrap();
        prop_assert!((f * z[alpha].powu(3) - p).norm() <= 1e-9 * (1.0 + p.norm()));
        prop_assert!((g * z[beta].powu(3) - p).norm() <= 1e-9 * (1.0 + p.norm()));
    }

    #[test]
    fn partition_of_unity_sums_to_one(z in point(5)) {
        let th = partition_of_unity(&z).unwrap();
        prop_assert!((th.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        prop_assert!(th.iter().all(|&t| (0.0..=1.0).contains(&t)));
    }

    #[test]
    fn hefer_identity_holds_exactly(seed in 0u64..10_000, nv in 2usize..6, d in 1u32..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_poly(&mut rng, nv, d, 5);
        prop_assert!(hefer_decompose(&p).unwrap().verify());
    }

    #[test]
    fn hefer_is_linear(seed in 0u64..10_000, a in -5i64..5, b in -5i64..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_poly(&mut rng, 3, 3, 4);
        let q = random_poly(&mut rng, 3, 3, 4);
        let c = ComplexRational::from_gaussian(a, b);
        let hs = hefer_decompose(&p.add(&q.scale(&c)).unwrap()).unwrap();
        let (hp, hq) = (hefer_decompose(&p).unwrap(), hefer_decompose(&q).unwrap());
        for i in 0..3 {
            prop_assert_eq!(&hp.coefficients[i].add(&hq.coefficients[i].scale(&c)).unwrap(), &hs.coefficients[i]);
        }
    }

    #[test]
    fn dbar_squares_to_zero(seed in 0u64..10_000, s in 0u32..3) {
        let n = 3;
        let mut f = ChartForm::zero(n, 1);
        for j in 0..n {
            f.insert(1 << j, ChartFormCoefficient::new(bipoly(n, seed * 7 + j as u64), s));
        }
        prop_assert!(f.dbar().dbar().is_zero());
        let g = ChartForm::function(ChartFormCoefficient::new(bipoly(n, seed), s));
        prop_assert!(g.dbar().dbar().is_zero());
    }

    #[test]
    fn dbar_commutes_with_chart_pullback(seed in 0u64..10_000, alpha in 0usize..3) {
        // ψ = N/|z|^2 with N of bidegree (1,1); ∂̄ in homogeneous coordinates then
        // pulled back equals ∂̄ of the pullback
        let nv = 3;
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (i, j) = (rng.gen_range(0..nv), rng.gen_range(0..nv));
        let num = BiPoly::var(nv, i).mul(&BiPoly::var_bar(nv, j));
        let psi = GlobalForm { nvars: nv, q: 0, s: 1, coeffs: [(0u64, num.clone())].into_iter().collect() };
        let chart = psi.to_chart(alpha).dbar();
        let v = Variety::new(vec![fermat(3, 3)], None).unwrap();
        let exact = hodge_currents::currents::make_exact_current(&v, &psi, "x").unwrap();
        prop_assert_eq!(&exact.charts[alpha], &chart);
    }

    #[test]
    fn wedge_of_one_forms_anticommutes(a in 0usize..9, b in 0usize..9, c in cx()) {
        let gen = |k: usize| match k / 3 {
            0 => Generator::DZeta(k % 3),
            1 => Generator::DZetaBar(k % 3),
            _ => Generator::DZBar(k % 3),
        };
        let x = ExteriorForm::generator(3, 0, gen(a)).unwrap().scale(c);
        let y = ExteriorForm::generator(3, 0, gen(b)).unwrap();
        let xy = x.wedge(&y);
        let yx = y.wedge(&x);
        prop_assert!(xy.add(&yx).is_zero());
        if a == b {
            prop_assert!(xy.is_zero());
        }
    }

    #[test]
    fn monomial_count_matches_binomial(nv in 1usize..6, d in 0u32..7) {
        let k = MultiIndex::all_of_degree(nv, d).len() as u64;
        let want = (1..nv as u64).fold(1u64, |acc, i| acc * (d as u64 + i) / i);
        prop_assert_eq!(k, want);
    }
}
