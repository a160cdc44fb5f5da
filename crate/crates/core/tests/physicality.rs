// SPDX-License-Identifier: Apache-2.0

use nalgebra::Matrix2;
use num_rational::Rational64;
use polarchan::analysis::{pauli_feasible, polar_decompose, ProcessMatrix};
use polarchan::bench::{BenchConfig, KrausSet, OpticalElement};
use polarchan::polar::{DensityMatrix, StokesVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_bench(rng: &mut ChaCha8Rng) -> BenchConfig {
    let n = rng.random_range(1..=7);
    let elements = (0..n)
        .map(|_| match rng.random_range(0..3) {
            0 => OpticalElement::crystal(
                Rational64::new(rng.random_range(1..=6), rng.random_range(1..=3)),
                rng.random_range(0.0..180.0),
            ),
            1 => OpticalElement::hwp(rng.random_range(-90.0..90.0)),
            _ => OpticalElement::qwp(rng.random_range(-90.0..90.0)),
        })
        .collect();
    BenchConfig::new(elements).unwrap()
}

fn unitality_error(k: &KrausSet) -> f64 {
    let sum: Matrix2<_> = k.operators().iter().map(|(_, m)| m * m.adjoint()).sum();
    (sum - Matrix2::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[test]
fn random_benches_are_physical() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let bench = random_bench(&mut rng);
        let k = bench.channel().unwrap();
        assert!(k.completeness_error() < 1e-12, "{bench}");
        assert!(unitality_error(&k) < 1e-12, "{bench}");

        let map = k.affine_map();
        assert!(map.translation.norm() < 1e-12, "{bench}");
        assert!(map.largest_singular_value() <= 1.0 + 1e-12, "{bench}");

        let report = polar_decompose(&map.matrix);
        assert!(
            pauli_feasible(report.radii).feasible,
            "{bench}: {:?}",
            report.radii
        );

        let chi = ProcessMatrix::from_kraus(&k);
        assert!(ProcessMatrix::new(*chi.matrix()).is_ok());
        assert!(chi.trace_preservation_deviation() < 1e-12);

        for _ in 0..3 {
            let dir = StokesVector::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let d = dir.degree_of_polarization();
            if d > 1.0 {
                continue;
            }
            let out = k.apply(&DensityMatrix::from_stokes(dir).unwrap());
            assert!(out.stokes().degree_of_polarization() <= d + 1e-12);
        }
    }
}
