#![allow(dead_code)]

use hodge_currents::polycore::{ComplexRational, HomogeneousPolynomial, MultiIndex, Variety};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn poly(nv: usize, terms: &[(&[u32], i64)]) -> HomogeneousPolynomial {
    HomogeneousPolynomial::from_terms_infer(
        nv,
        terms
            .iter()
            .map(|(e, c)| (MultiIndex(e.to_vec()), ComplexRational::from_integer(*c)))
            .collect(),
    )
    .unwrap()
}

pub fn fermat(nv: usize, d: u32) -> HomogeneousPolynomial {
    HomogeneousPolynomial::from_terms(
        nv,
        d,
        (0..nv).map(|i| {
            let mut e = vec![0; nv];
            e[i] = d;
            (MultiIndex(e), ComplexRational::one())
        }),
    )
    .unwrap()
}

pub fn variety(polys: Vec<HomogeneousPolynomial>) -> Variety {
    Variety::new(polys, None).unwrap()
}

pub fn rc(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random homogeneous polynomial with small Gaussian-rational coefficients.
pub fn random_poly(rng: &mut ChaCha8Rng, nv: usize, d: u32, terms: usize) -> HomogeneousPolynomial {
    let all = MultiIndex::all_of_degree(nv, d);
    let picked: Vec<(MultiIndex, ComplexRational)> = (0..terms)
        .map(|_| {
            let e = all[rng.gen_range(0..all.len())].clone();
            let c = ComplexRational::from_fractions(
                (rng.gen_range(-9..=9), rng.gen_range(1..=5)),
                (rng.gen_range(-9..=9), rng.gen_range(1..=5)),
            )
            .unwrap();
            (e, c)
        })
        .collect();
    let mut p = HomogeneousPolynomial::zero(nv, d);
    for (e, c) in picked {
        let t = HomogeneousPolynomial::from_terms(nv, d, [(e, c)]).unwrap();
        p = p.add(&t).unwrap();
    }
    if p.is_zero() {
        fermat(nv, d)
    } else {
        p
    }
}
