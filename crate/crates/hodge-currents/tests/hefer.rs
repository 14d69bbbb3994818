mod common;

use common::*;
use hodge_currents::hefer::cache::CACHE_VERSION;
use hodge_currents::hefer::{hefer_decompose, HeferCache};
use hodge_currents::polycore::ComplexRational;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_polynomials_decompose_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let nv = rng.gen_range(2..=5);
        let d = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=8);
        let p = random_poly(&mut rng, nv, d, k);
        let h = hefer_decompose(&p).unwrap();
        assert!(h.verify(), "{p:?}");
        assert!(h.residual().is_zero());
        // and numerically at a random pair of points
        let zeta: Vec<C64> = (0..nv).map(|_| rc(&mut rng)).collect();
        let z: Vec<C64> = (0..nv).map(|_| rc(&mut rng)).collect();
        let q = h.compile().eval(&zeta, &z);
        let lhs = p.eval(&zeta).unwrap() - p.eval(&z).unwrap();
        let rhs: C64 = (0..nv).map(|i| q[i] * (zeta[i] - z[i])).sum();
        assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }
}

#[test]
fn decomposition_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = random_poly(&mut rng, 3, 4, 5);
    let q = random_poly(&mut rng, 3, 4, 5);
    let c = ComplexRational::from_gaussian(2, -3);
    let sum = p.add(&q.scale(&c)).unwrap();
    let (hp, hq, hs) = (
        hefer_decompose(&p).unwrap(),
        hefer_decompose(&q).unwrap(),
        hefer_decompose(&sum).unwrap(),
    );
    for i in 0..3 {
        let want = hp.coefficients[i]
            .add(&hq.coefficients[i].scale(&c))
            .unwrap();
        assert_eq!(want, hs.coefficients[i]);
    }
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = HeferCache::new(dir.path());
    let p = fermat(3, 5);
    let (cold, hit) = cache.load_or_compute(&p).unwrap();
    assert!(!hit);
    let (warm, hit) = cache.load_or_compute(&p).unwrap();
    assert!(hit);
    assert_eq!(cold, warm);
    let entries = cache.inspect().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0].version, Some(CACHE_VERSION));
    assert_eq!(entries[0].degree, Some(5));
    assert_eq!(cache.clear().unwrap(), 1);
    assert!(cache.inspect().unwrap().is_empty());
}

#[test]
fn stale_cache_records_are_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let cache = HeferCache::new(dir.path());
    let p = fermat(4, 3);
    cache.load_or_compute(&p).unwrap();
    let path = cache.inspect().unwrap()[0].path.clone();
    let text = std::fs::read_to_string(&path).unwrap();
    let bumped = text.replace(
        &format!("\"version\": {CACHE_VERSION}"),
        &format!("\"version\": {}", CACHE_VERSION + 1),
    );
    assert_ne!(bumped, text);
    std::fs::write(&path, bumped).unwrap();
    let (h, hit) = cache.load_or_compute(&p).unwrap();
    assert!(!hit && h.verify());

    // a tampered coefficient fails the identity and is not trusted
    std::fs::write(&path, "{ not json").unwrap();
    let (h, hit) = cache.load_or_compute(&p).unwrap();
    assert!(!hit && h.verify());
    let (_, hit) = cache.load_or_compute(&p).unwrap();
    assert!(hit);
}
