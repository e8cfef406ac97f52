//! Random matrices and states for property tests and seeded scenarios.
//!
//! Everything takes a caller-supplied generator so that results are
//! reproducible from a seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::matrix::{c, CMatrix, RMatrix, C64};

/// A generator for `seed`, on an independent `stream` so that separate
/// consumers of one seed do not share draws.
pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) / std::f64::consts::SQRT_2
}

/// `n × m` matrix of independent standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = ginibre(rng, n, n).inner().clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let phases: Vec<C64> = (0..n)
        .map(|k| {
            let d = r[(k, k)];
            if d.norm() == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        })
        .collect();
    CMatrix::from_fn(n, n, |i, j| q[(i, j)] * phases[j])
}

/// Self-adjoint matrix with spectral norm drawn uniformly from
/// `[norm_bound / 10, norm_bound]`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, norm_bound: f64) -> CMatrix {
    let g = ginibre(rng, n, n);
    let h = (&g + &g.adjoint()).scale_re(0.5);
    let (values, _) = h.hermitian_eigen().expect("square");
    let spectral = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if spectral == 0.0 {
        return h;
    }
    let target = norm_bound * rng.random_range(0.1..=1.0);
    h.scale_re(target / spectral)
}

/// Unit vector drawn uniformly from the sphere.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Probability vector drawn uniformly from the simplex.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Column-stochastic matrix with independent uniform-simplex columns.
pub fn random_stochastic<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RMatrix {
    let cols: Vec<Vec<f64>> = (0..n).map(|_| random_distribution(rng, n)).collect();
    RMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Full-rank density matrix `G G† / tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = ginibre(rng, n, n);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    m.scale_re(1.0 / tr).hermitian_part()
}

/// Phases uniform in `[0, 2π)`.
pub fn random_phases<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RMatrix {
    RMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..std::f64::consts::TAU))
}

/// Generic (non-unitary) evolution operator: independent random unit
/// columns, so the column modulus-square sums are exactly 1.
pub fn random_theta<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let cols: Vec<Vec<C64>> = (0..n).map(|_| random_state(rng, n)).collect();
    CMatrix::from_columns(&cols).expect("square")
}

/// Kraus set from the first `n` columns of a Haar unitary of size `n·k`:
/// the blocks of that isometry satisfy `Σ K†K = I`.
pub fn random_kraus<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<CMatrix> {
    let u = haar_unitary(rng, n * k);
    (0..k)
        .map(|b| CMatrix::from_fn(n, n, |i, j| u[(b * n + i, j)]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::is_unitary;

    #[test]
    fn haar_is_unitary_and_seeded() {
        let u = haar_unitary(&mut seeded(7, 0), 5);
        assert!(is_unitary(&u, 1e-12).unwrap().holds);
        assert_eq!(u, haar_unitary(&mut seeded(7, 0), 5));
        assert_ne!(u, haar_unitary(&mut seeded(7, 1), 5));
    }

    #[test]
    fn hermitian_norm_bound() {
        let mut rng = seeded(1, 0);
        for _ in 0..20 {
            let h = random_hermitian(&mut rng, 4, 5.0);
            assert!(h.max_abs_diff(&h.adjoint()) == 0.0);
            let (vals, _) = h.hermitian_eigen().unwrap();
            assert!(vals.iter().all(|v| v.abs() <= 5.0 + 1e-12));
        }
    }

    #[test]
    fn stochastic_and_theta_columns() {
        let mut rng = seeded(2, 0);
        let g = random_stochastic(&mut rng, 6);
        assert!(g.column_sums().iter().all(|s| (s - 1.0).abs() < 1e-14));
        assert!(g.min_entry() >= 0.0);
        let t = random_theta(&mut rng, 4);
        for s in t.modulus_squared().column_sums() {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn kraus_blocks_complete() {
        let ops = random_kraus(&mut seeded(3, 0), 3, 2);
        let sum = ops
            .iter()
            .fold(CMatrix::zeros(3, 3), |acc, k| &acc + &(&k.adjoint() * k));
        assert!(sum.max_abs_diff(&CMatrix::identity(3)) < 1e-12);
    }
}
