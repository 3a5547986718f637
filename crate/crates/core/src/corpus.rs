//! Seeded random generators for exchange matrices and walks.
//!
//! Shared between the crate's own test suites and the CLI verifier so both
//! draw from the same distribution. Everything is deterministic for a fixed
//! seed.

use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::{ExchangeMatrix, IntMatrix};
use crate::pattern::Walk;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random skew-symmetrizable matrix: `B = diag(d) * Ω` with `Ω` skew-symmetric,
/// so `diag(d_i^-1) B` is skew-symmetric by construction.
pub fn random_exchange_matrix(rng: &mut impl Rng, n: usize, bound: i64) -> ExchangeMatrix {
    let d: Vec<i64> = (0..n).map(|_| *[1, 1, 1, 2, 3].get(rng.gen_range(0..5)).unwrap()).collect();
    let mut omega = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(-bound..=bound);
            omega[i][j] = v;
            omega[j][i] = -v;
        }
    }
    let b = IntMatrix::from_fn(n, |i, j| BigInt::from(d[i] * omega[i][j]));
    ExchangeMatrix::new(b).expect("constructed matrix is skew-symmetrizable")
}

/// Random nonsingular skew-symmetrizable matrix (resamples until det != 0).
pub fn random_nonsingular_exchange_matrix(
    rng: &mut impl Rng,
    n: usize,
    bound: i64,
) -> ExchangeMatrix {
    loop {
        let b = random_exchange_matrix(rng, n, bound);
        if b.is_nonsingular() {
            return b;
        }
    }
}

/// Random reduced walk: uniformly random directions avoiding immediate repeats.
pub fn random_walk(rng: &mut impl Rng, n: usize, len: usize) -> Walk {
    let mut dirs = Vec::with_capacity(len);
    let mut last = usize::MAX;
    for _ in 0..len {
        let mut k = rng.gen_range(0..n);
        while n > 1 && k == last {
            k = rng.gen_range(0..n);
        }
        dirs.push(k);
        last = k;
    }
    Walk::new(dirs)
}

/// A random `(B0, walk)` case whose intermediate exchange matrices stay within
/// `entry_cap` and whose F-polynomial total degrees stay within `deg_cap`.
///
/// Matrix entries grow doubly exponentially along adversarial walks and
/// F-polynomial term counts blow up with them, which would make any exact
/// computation infeasible; capped cases still cover finite and mildly
/// infinite types. The degree bound is computed from the C-matrix recursion
/// without building the polynomials.
pub fn random_bounded_case(
    rng: &mut impl Rng,
    max_rank: usize,
    max_depth: usize,
    entry_cap: i64,
    deg_cap: i64,
) -> (ExchangeMatrix, Walk) {
    let ecap = BigInt::from(entry_cap);
    let dcap = BigInt::from(deg_cap);
    'outer: loop {
        let n = rng.gen_range(2..=max_rank);
        let b0 = random_exchange_matrix(rng, n, 2);
        let len = rng.gen_range(0..=max_depth);
        let walk = random_walk(rng, n, len);
        let mut b = b0.clone();
        let mut c = IntMatrix::identity(n);
        let mut deg: Vec<BigInt> = vec![BigInt::from(0); n];
        let pos = |x: &BigInt| if num_traits::Signed::is_positive(x) { x.clone() } else { BigInt::from(0) };
        for &k in walk.directions() {
            // degree bound for the new F_k: deg M - deg F_k with
            // deg M <= max over the two monomial parts
            let mut d_plus = BigInt::from(0);
            let mut d_minus = BigInt::from(0);
            for j in 0..n {
                d_plus += pos(c.get(j, k)) + pos(b.get(j, k)) * &deg[j];
                d_minus += pos(&-c.get(j, k)) + pos(&-b.get(j, k)) * &deg[j];
            }
            let dm = d_plus.max(d_minus);
            deg[k] = dm - &deg[k];
            if deg[k] > dcap {
                continue 'outer;
            }
            // C-matrix step (definitional, ε = +1)
            let jk = IntMatrix::j_k(n, k);
            c = c
                .mul(&jk)
                .add(&c.mul(&b.matrix().plus_part().row_only(k)))
                .add(&c.neg().plus_part().col_only(k).mul(b.matrix()));
            b = b.mutate(k, 1).expect("direction in range");
            for i in 0..n {
                for j in 0..n {
                    if b.get(i, j).magnitude() > ecap.magnitude() {
                        continue 'outer;
                    }
                }
            }
        }
        return (b0, walk);
    }
}
