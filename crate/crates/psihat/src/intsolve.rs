//! Exact integer solutions of linear systems `A x = b` by unimodular column
//! reduction, with a lattice basis of the integer kernel.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A particular integer solution and a basis of the integer kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSolution {
    pub particular: Vec<i64>,
    pub kernel: Vec<Vec<i64>>,
}

/// Solves `a x = b` over the integers. `a` is given by rows, each of length `n`.
/// Returns `None` when no integer solution exists (including rational-only ones),
/// or when a coefficient of the answer does not fit in an `i64`.
pub fn solve_integer(a: &[Vec<i64>], b: &[i64], n: usize) -> Option<IntSolution> {
    assert_eq!(a.len(), b.len(), "one right-hand side per row");
    let m = a.len();
    let mut w: Vec<Vec<BigInt>> = a
        .iter()
        .map(|row| {
            assert_eq!(row.len(), n, "row length must equal the number of unknowns");
            row.iter().map(|&v| BigInt::from(v)).collect()
        })
        .collect();
    // u accumulates the column operations: a u = w.
    let mut u: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; m];
    let mut p = 0;
    for r in 0..m {
        if p == n {
            break;
        }
        for j in p + 1..n {
            if w[r][j].is_zero() {
                continue;
            }
            if w[r][p].is_zero() {
                swap_cols(&mut w, &mut u, p, j);
                continue;
            }
            let (x, y) = (w[r][p].clone(), w[r][j].clone());
            let e = x.extended_gcd(&y);
            let (g, s, t) = (e.gcd, e.x, e.y);
            let (xa, ya) = (&x / &g, &y / &g);
            // [col_p, col_j] <- [s col_p + t col_j, -ya col_p + xa col_j], determinant 1.
            combine_cols(&mut w, &mut u, p, j, &s, &t, &(-ya), &xa);
        }
        if !w[r][p].is_zero() {
            if w[r][p].is_negative() {
                negate_col(&mut w, &mut u, p);
            }
            pivot_of_row[r] = Some(p);
            p += 1;
        }
    }
    let rank = p;
    let mut y: Vec<BigInt> = vec![BigInt::zero(); n];
    for r in 0..m {
        let limit = pivot_of_row[r].unwrap_or(rank);
        let mut acc = BigInt::from(b[r]);
        for c in 0..limit {
            acc -= &w[r][c] * &y[c];
        }
        match pivot_of_row[r] {
            Some(pc) => {
                let (q, rem) = acc.div_rem(&w[r][pc]);
                if !rem.is_zero() {
                    return None;
                }
                y[pc] = q;
            }
            None => {
                if !acc.is_zero() {
                    return None;
                }
            }
        }
    }
    let particular = (0..n)
        .map(|i| (0..rank).fold(BigInt::zero(), |s, c| s + &u[i][c] * &y[c]).to_i64())
        .collect::<Option<Vec<i64>>>()?;
    let kernel = (rank..n)
        .map(|c| (0..n).map(|i| u[i][c].to_i64()).collect::<Option<Vec<i64>>>())
        .collect::<Option<Vec<Vec<i64>>>>()?;
    Some(IntSolution { particular, kernel })
}

fn swap_cols(w: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], a: usize, b: usize) {
    for row in w.iter_mut().chain(u.iter_mut()) {
        row.swap(a, b);
    }
}

fn negate_col(w: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], a: usize) {
    for row in w.iter_mut().chain(u.iter_mut()) {
        row[a] = -core::mem::take(&mut row[a]);
    }
}

#[allow(clippy::too_many_arguments)]
fn combine_cols(
    w: &mut [Vec<BigInt>],
    u: &mut [Vec<BigInt>],
    a: usize,
    b: usize,
    s: &BigInt,
    t: &BigInt,
    c: &BigInt,
    d: &BigInt,
) {
    for row in w.iter_mut().chain(u.iter_mut()) {
        let (x, y) = (row[a].clone(), row[b].clone());
        row[a] = s * &x + t * &y;
        row[b] = c * &x + d * &y;
    }
}

fn norm2(v: &[i64]) -> i128 {
    v.iter().map(|&x| (x as i128) * (x as i128)).sum()
}

fn add_scaled(v: &[i64], k: &[i64], t: i64) -> Vec<i64> {
    v.iter().zip(k).map(|(&a, &b)| a + t * b).collect()
}

/// Shrinks `x` by adding integer multiples of kernel vectors while the Euclidean
/// norm decreases. Deterministic: kernel vectors are tried in order.
pub fn reduce_norm(x: &[i64], kernel: &[Vec<i64>]) -> Vec<i64> {
    let mut best = x.to_vec();
    let mut improved = true;
    while improved {
        improved = false;
        for k in kernel {
            let kk = norm2(k);
            if kk == 0 {
                continue;
            }
            let dot: i128 = best.iter().zip(k).map(|(&a, &b)| a as i128 * b as i128).sum();
            // nearest integer to -dot / kk
            let t = (-(2 * dot) + kk).div_euclid(2 * kk) as i64;
            if t != 0 {
                let cand = add_scaled(&best, k, t);
                if norm2(&cand) < norm2(&best) {
                    best = cand;
                    improved = true;
                }
            }
        }
    }
    best
}

/// The minimal-norm point of `x + span_Z(kernel)` within `radius` steps of the
/// greedy reduction along each kernel direction; ties go to the lexicographically
/// smallest vector. Exhaustive when the kernel has at most `max_dim` vectors.
pub fn min_norm_solution(x: &[i64], kernel: &[Vec<i64>], radius: i64, max_dim: usize) -> Vec<i64> {
    let start = reduce_norm(x, kernel);
    if kernel.is_empty() || kernel.len() > max_dim {
        return start;
    }
    let d = kernel.len();
    let mut best = start.clone();
    let mut t = vec![-radius; d];
    loop {
        let mut cand = start.clone();
        for (k, &ti) in kernel.iter().zip(&t) {
            cand = add_scaled(&cand, k, ti);
        }
        let (nc, nb) = (norm2(&cand), norm2(&best));
        if nc < nb || (nc == nb && cand < best) {
            best = cand;
        }
        let mut i = 0;
        loop {
            if i == d {
                return best;
            }
            t[i] += 1;
            if t[i] <= radius {
                break;
            }
            t[i] = -radius;
            i += 1;
        }
    }
}
