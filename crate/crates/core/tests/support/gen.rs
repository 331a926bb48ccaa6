//! Random set instances shared by property and acceptance suites.

#![allow(dead_code)]

use nagumo_core::numerics::sym_eig;
use nagumo_core::sets::{ConvexSet, Ellipsoid, HPolyhedron, LorenzCone, VCone, VPolytope};
use nagumo_core::Matrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const FAMILIES: [&str; 5] = ["hpolyhedron", "vpolytope", "vcone", "ellipsoid", "lorenz"];

pub fn uniform(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-r..r)).collect()
}

pub fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v = uniform(rng, n, 1.0);
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 0.1 && nv <= 1.0 {
            return v.into_iter().map(|x| x / nv).collect();
        }
    }
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Matrix {
    Matrix::new(n, n, uniform(rng, n * n, r)).unwrap()
}

pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let b = random_matrix(rng, n, 1.0);
    b.transpose().matmul(&b).add(&Matrix::identity(n).scale(0.3))
}

/// Orthogonal matrix from the eigenvectors of a random symmetric matrix.
pub fn random_rotation(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let e = sym_eig(&random_matrix(rng, n, 1.0).symmetrized()).unwrap();
    Matrix::from_columns(&(0..n).map(|k| e.vector(k)).collect::<Vec<_>>()).unwrap()
}

pub fn random_hpolytope(rng: &mut ChaCha8Rng, n: usize) -> HPolyhedron {
    let lo: Vec<f64> = (0..n).map(|_| -rng.random_range(0.5..1.5)).collect();
    let hi: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let boxed = HPolyhedron::hyperrectangle(&lo, &hi).unwrap();
    let mut rows = boxed.g().to_rows();
    let mut b = boxed.b().to_vec();
    for _ in 0..rng.random_range(0..3) {
        rows.push(unit(rng, n));
        b.push(rng.random_range(0.3..1.0));
    }
    HPolyhedron::new(Matrix::from_rows(&rows).unwrap(), b).unwrap()
}

pub fn random_vpolytope(rng: &mut ChaCha8Rng, n: usize) -> VPolytope {
    let count = rng.random_range(n + 1..=n + 4);
    VPolytope::new((0..count).map(|_| uniform(rng, n, 1.5)).collect()).unwrap()
}

/// Pointed cone: rays in the open upper half space `x_n > 0`.
pub fn random_vcone(rng: &mut ChaCha8Rng, n: usize) -> VCone {
    let count = rng.random_range(n..=n + 2);
    let rays = (0..count)
        .map(|_| {
            let mut r = uniform(rng, n, 1.0);
            r[n - 1] = rng.random_range(0.3..1.0);
            r
        })
        .collect();
    VCone::new(rays).unwrap()
}

pub fn random_ellipsoid(rng: &mut ChaCha8Rng, n: usize) -> Ellipsoid {
    Ellipsoid::new(random_spd(rng, n)).unwrap()
}

/// Rotated `diag(a_1, ..., a_{n-1}, -c)` with positive `a_k` and `c`.
pub fn random_lorenz(rng: &mut ChaCha8Rng, n: usize) -> LorenzCone {
    let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    d[n - 1] = -d[n - 1];
    let v = random_rotation(rng, n);
    let q = v.matmul(&Matrix::diag(&d)).matmul(&v.transpose()).symmetrized();
    LorenzCone::new(q, None).unwrap()
}

pub fn random_set(rng: &mut ChaCha8Rng, family: usize, n: usize) -> ConvexSet {
    match family {
        0 => random_hpolytope(rng, n).into(),
        1 => random_vpolytope(rng, n).into(),
        2 => random_vcone(rng, n).into(),
        3 => random_ellipsoid(rng, n).into(),
        _ => random_lorenz(rng, n).into(),
    }
}

/// Finite-difference reading of the tangent-cone definition:
/// `Some(true)` when `dist(x + t y, S)/t ≤ 1e-4` for every probe `t`,
/// `Some(false)` when it stays `≥ 1e-2`, `None` in between.
pub fn limit_verdict(set: &ConvexSet, x: &[f64], y: &[f64]) -> Option<bool> {
    let quotients: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&t| {
            let p: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + t * b).collect();
            set.distance(&p).unwrap() / t
        })
        .collect();
    if quotients.iter().all(|&q| q <= 1e-4) {
        Some(true)
    } else if quotients.iter().all(|&q| q >= 1e-2) {
        Some(false)
    } else {
        None
    }
}
