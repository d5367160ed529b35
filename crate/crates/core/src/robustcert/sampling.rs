//! Monte Carlo lower estimates of worst-case values.
//!
//! Samples are generated in fixed batches of [`SAMPLE_BATCH`] triples;
//! batch `b` draws from a ChaCha stream seeded with `seed` on stream `b`.
//! The result therefore depends only on `(n, seed)`, never on how batches
//! are scheduled across threads.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::solvability::DiskBundle;
use crate::unbalance::{build_quadratic_forms, quadratic, VufKind};

pub const SAMPLE_BATCH: usize = 4096;

/// Maximum of `f` over `n` triples drawn uniformly on the boundary circles
/// (zero-radius phases stay at their centers).
pub fn boundary_sample_max<F>(disks: &DiskBundle, n: usize, seed: u64, f: F) -> f64
where
    F: Fn(&[Complex64; 3]) -> f64 + Sync,
{
    let batches = n.div_ceil(SAMPLE_BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = SAMPLE_BATCH.min(n - b * SAMPLE_BATCH);
            let mut best = f64::NEG_INFINITY;
            for _ in 0..count {
                let v: [Complex64; 3] = std::array::from_fn(|p| {
                    let theta = rng.random::<f64>() * TAU;
                    disks.centers[p] + Complex64::from_polar(disks.radii[p], theta)
                });
                best = best.max(f(&v));
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Sampled maximum of `J(V) = V^⊤(A_x - ε²A_p)V`, a lower estimate of the
/// true worst case.
pub fn sample_oracle(disks: &DiskBundle, eps: f64, which: VufKind, n: usize, seed: u64) -> f64 {
    let m = build_quadratic_forms().objective(eps, which);
    boundary_sample_max(disks, n, seed, |v| {
        quadratic(&m, &[v[0].re, v[0].im, v[1].re, v[1].im, v[2].re, v[2].im])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robustcert::vuf_objective;

    fn bundle(r: f64) -> DiskBundle {
        DiskBundle::new(
            [
                Complex64::new(1.2, 0.1),
                Complex64::new(-0.5, -0.8),
                Complex64::new(-0.4, 0.9),
            ],
            [r; 3],
        )
        .unwrap()
    }

    #[test]
    fn zero_radius_returns_point_value() {
        let d = bundle(0.0);
        let j = vuf_objective(&d.centers, 0.2, VufKind::Negative);
        for seed in [1, 2] {
            let s = sample_oracle(&d, 0.2, VufKind::Negative, 100, seed);
            assert!((s - j).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_value() {
        let d = bundle(0.3);
        let a = sample_oracle(&d, 0.2, VufKind::Negative, 10_000, 9);
        let b = sample_oracle(&d, 0.2, VufKind::Negative, 10_000, 9);
        assert_eq!(a.to_bits(), b.to_bits());
        let c = sample_oracle(&d, 0.2, VufKind::Negative, 10_000, 10);
        assert_ne!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn independent_of_thread_count() {
        let d = bundle(0.3);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_oracle(&d, 0.2, VufKind::Zero, 50_000, 3))
        };
        assert_eq!(run(1).to_bits(), run(4).to_bits());
    }
}
