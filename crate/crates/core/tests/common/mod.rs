//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls into the code paths it checks.
#![allow(dead_code)]

use std::collections::BTreeSet;

use nerve_recon::complex::{Simplex, SimplicialComplex, SimplicialMap};
use nerve_recon::homology::IntegerMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn d2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Circumcentre of `pts` within their affine hull, by solving the normal
/// equations with Gaussian elimination; `None` if degenerate.
fn circumcenter(pts: &[&[f64]]) -> Option<Vec<f64>> {
    let p0 = pts[0];
    let k = pts.len() - 1;
    if k == 0 {
        return Some(p0.to_vec());
    }
    let dir: Vec<Vec<f64>> = pts[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = 2.0 * dir[i].iter().zip(&dir[j]).map(|(x, y)| x * y).sum::<f64>();
        }
        a[i][k] = dir[i].iter().map(|x| x * x).sum();
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=k {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let lambda: Vec<f64> = (0..k).map(|i| a[i][k] / a[i][i]).collect();
    let mut c = p0.to_vec();
    for (l, d) in lambda.iter().zip(&dir) {
        for (ci, di) in c.iter_mut().zip(d) {
            *ci += l * di;
        }
    }
    Some(c)
}

/// Minimum enclosing ball radius by exhaustive search over support sets of
/// at most `dim + 1` points.
pub fn brute_meb_radius(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let dim = points[0].len();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size > dim + 1 {
            continue;
        }
        let sub: Vec<&[f64]> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| points[i].as_slice()).collect();
        let Some(c) = circumcenter(&sub) else { continue };
        let r2 = sub.iter().map(|p| d2(&c, p)).fold(0.0, f64::max);
        if points.iter().all(|p| d2(&c, p) <= r2 * (1.0 + 1e-12) + 1e-18) {
            best = best.min(r2.sqrt());
        }
    }
    best
}

/// Čech nerve by testing every vertex subset up to size `d_max + 1`.
pub fn subset_nerve(points: &[Vec<f64>], eps: f64, d_max: usize) -> Vec<BTreeSet<Vec<u32>>> {
    let n = points.len();
    let mut out = vec![BTreeSet::new(); d_max + 1];
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size > d_max + 1 {
            continue;
        }
        let idx: Vec<u32> = (0..n as u32).filter(|i| mask >> i & 1 == 1).collect();
        let sub: Vec<Vec<f64>> = idx.iter().map(|&i| points[i as usize].clone()).collect();
        if brute_meb_radius(&sub) < eps {
            out[size - 1].insert(idx);
        }
    }
    out
}

pub fn complex_sets(k: &SimplicialComplex) -> Vec<BTreeSet<Vec<u32>>> {
    (0..=k.d_max()).map(|d| k.iter(d).map(<[u32]>::to_vec).collect()).collect()
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn bareiss_det(m: &IntegerMatrix) -> BigInt {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        BigInt::one()
    } else {
        sign * &a[n - 1][n - 1]
    }
}

/// Rank over ℚ by fraction-free elimination.
pub fn bareiss_rank(m: &IntegerMatrix) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<BigInt>> = (0..rows).map(|i| m.row(i).to_vec()).collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, p);
        for r in rank + 1..rows {
            if !a[r][c].is_zero() {
                let (f, g) = (a[r][c].clone(), a[rank][c].clone());
                for j in c..cols {
                    a[r][j] = &a[r][j] * &g - &a[rank][j] * &f;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Dense boundary matrix built directly from the definition.
pub fn oracle_boundary(k: &SimplicialComplex, dim: usize) -> IntegerMatrix {
    let rows: Vec<Vec<u32>> = k.iter(dim - 1).map(<[u32]>::to_vec).collect();
    let mut m = IntegerMatrix::zeros(rows.len(), k.count(dim));
    for (j, s) in k.iter(dim).enumerate() {
        for skip in 0..s.len() {
            let face: Vec<u32> = s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
            let i = rows.iter().position(|r| *r == face).expect("closed complex");
            m.set(i, j, BigInt::from(if skip % 2 == 0 { 1 } else { -1 }));
        }
    }
    m
}

/// Betti numbers over ℚ from ranks of the oracle boundary matrices.
pub fn rational_betti(k: &SimplicialComplex, up_to: usize) -> Vec<usize> {
    let ranks: Vec<usize> = (0..=up_to + 1)
        .map(|d| if d == 0 || d > k.d_max() { 0 } else { bareiss_rank(&oracle_boundary(k, d)) })
        .collect();
    // Reduced in degree 0 is avoided by using the unaugmented complex.
    (0..=up_to).map(|q| k.count(q) - ranks[q] - ranks[q + 1]).collect()
}

/// Closure of `count` random simplices of dimension at most `d_max` on
/// `n` vertices.
pub fn random_complex(r: &mut ChaCha8Rng, n: usize, d_max: usize, count: usize) -> SimplicialComplex {
    let mut simplices = Vec::new();
    let verts: Vec<u32> = (0..n as u32).collect();
    for _ in 0..count {
        let size = r.random_range(2..=d_max + 1).min(n);
        let mut v: Vec<u32> = verts.choose_multiple(r, size).copied().collect();
        v.sort_unstable();
        simplices.push(Simplex::new(v).unwrap());
    }
    SimplicialComplex::closure(n, d_max, simplices).unwrap()
}

/// A random vertex map out of `k` onto `target_n` vertices (injective apart
/// from the forced merges) together with a target complex that contains
/// every image simplex plus some extra random simplices.
pub fn random_map(r: &mut ChaCha8Rng, k: &SimplicialComplex, target_n: usize, extra: usize) -> (SimplicialMap, SimplicialComplex) {
    let n = k.num_vertices();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(r);
    let mut assignment = vec![0u32; n];
    for (i, &v) in order.iter().enumerate() {
        assignment[v] = if i < target_n { i as u32 } else { r.random_range(0..target_n as u32) };
    }
    let phi = SimplicialMap::new(assignment);
    let mut simplices = Vec::new();
    let mut img = Vec::new();
    for d in 1..=k.d_max() {
        for s in k.iter(d) {
            phi.image(s, &mut img);
            if img.len() >= 2 {
                simplices.push(Simplex::new(img.clone()).unwrap());
            }
        }
    }
    let verts: Vec<u32> = (0..target_n as u32).collect();
    for _ in 0..extra {
        let size = r.random_range(2..=k.d_max() + 1).min(target_n);
        let mut v: Vec<u32> = verts.choose_multiple(r, size).copied().collect();
        v.sort_unstable();
        simplices.push(Simplex::new(v).unwrap());
    }
    (phi, SimplicialComplex::closure(target_n, k.d_max(), simplices).unwrap())
}

/// Random integer matrix with entries in `[lo, hi]`.
pub fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize, lo: i64, hi: i64) -> IntegerMatrix {
    let entries: Vec<i64> = (0..rows * cols).map(|_| r.random_range(lo..=hi)).collect();
    IntegerMatrix::from_i64(rows, cols, &entries)
}

/// `S` is diagonal with non-negative entries, each dividing the next
/// nonzero one, and zeros only at the end.
pub fn is_smith_form(s: &IntegerMatrix) -> bool {
    let mut diag = Vec::new();
    for i in 0..s.rows() {
        for j in 0..s.cols() {
            let e = s.get(i, j);
            if i != j && !e.is_zero() {
                return false;
            }
            if i == j {
                diag.push(e.clone());
            }
        }
    }
    if diag.iter().any(|d| d.is_negative()) {
        return false;
    }
    let nonzero = diag.iter().take_while(|d| !d.is_zero()).count();
    diag[nonzero..].iter().all(Zero::is_zero) && diag[..nonzero].windows(2).all(|w| (&w[1] % &w[0]).is_zero())
}

/// Uniform random points in the cube `[-1, 1]^dim`.
pub fn random_cloud(r: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| r.random_range(-1.0..1.0)).collect()).collect()
}

/// Volume of the `k`-ball of radius `r` for `k ≤ 3`, from the textbook
/// formulas.
pub fn ball_volume(k: usize, r: f64) -> f64 {
    match k {
        1 => 2.0 * r,
        2 => std::f64::consts::PI * r * r,
        3 => 4.0 / 3.0 * std::f64::consts::PI * r.powi(3),
        _ => unimplemented!("only dimensions 1 to 3 are used"),
    }
}

/// Uniform-sampling bound written out with `cos(asin x) = √(1 − x²)`.
pub fn beta_oracle(vol: f64, k: usize, tau: f64, eps: f64, delta: f64) -> f64 {
    let cos_k = |x: f64| (1.0 - x * x).sqrt().powi(k as i32);
    let b1 = vol / (cos_k(eps / (8.0 * tau)) * ball_volume(k, eps / 4.0));
    let b2 = vol / (cos_k(eps / (16.0 * tau)) * ball_volume(k, eps / 8.0));
    b1 * (b2.ln() - delta.ln())
}
