//! Exact linear algebra: rational row reduction for small systems, fraction-free
//! (Bareiss) elimination over the integers, and rank modulo word-sized primes.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::scalar::Rational;

/// Basis of the right nullspace of a small rational matrix, one vector per free
/// column (in column order) with a 1 in that column.
pub fn rational_nullspace(mut rows: Vec<Vec<Rational>>, ncols: usize) -> Vec<Vec<Rational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / &rows[r][c];
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[row][f].clone();
            }
            v
        })
        .collect()
}

/// Row echelon form produced by fraction-free elimination.
#[derive(Debug, Clone)]
pub struct Echelon {
    /// Non-zero rows; row `r` has its pivot in column `pivots[r]`.
    pub rows: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Bareiss elimination: every intermediate entry is a minor of the input, so the
/// divisions by the previous pivot are exact and no fractions appear.
pub fn bareiss_echelon(mut rows: Vec<Vec<BigInt>>, ncols: usize) -> Echelon {
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        // smallest non-zero entry keeps the growth a little lower
        let Some(p) = (r..rows.len())
            .filter(|&i| !rows[i][c].is_zero())
            .min_by_key(|&i| rows[i][c].bits())
        else {
            continue;
        };
        rows.swap(r, p);
        let (head, tail) = rows.split_at_mut(r + 1);
        let pivot_row = &head[r];
        let pv = &pivot_row[c];
        tail.par_iter_mut().for_each(|row| {
            let f = std::mem::take(&mut row[c]);
            for j in c + 1..ncols {
                let t = &row[j] * pv - &f * &pivot_row[j];
                row[j] = if prev.is_one() { t } else { t.div_floor(&prev) };
            }
        });
        prev = rows[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    Echelon { rows, pivots, ncols }
}

/// Integer basis of the nullspace of an integer matrix, each vector primitive
/// with its first non-zero entry positive.
pub fn bareiss_nullspace(rows: Vec<Vec<BigInt>>, ncols: usize) -> Vec<Vec<BigInt>> {
    let ech = bareiss_echelon(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !ech.pivots.contains(c)).collect();
    free.par_iter()
        .map(|&f| {
            // x_f = 1; integer back substitution, rescaling x whenever a division is inexact
            let mut x = vec![BigInt::zero(); ncols];
            x[f] = BigInt::one();
            for r in (0..ech.rank()).rev() {
                let pc = ech.pivots[r];
                if pc > f {
                    continue;
                }
                let row = &ech.rows[r];
                let s: BigInt = (pc + 1..ncols)
                    .filter(|&j| !row[j].is_zero() && !x[j].is_zero())
                    .map(|j| &row[j] * &x[j])
                    .sum();
                // d·x_pc + s = 0: scale x by d/g, then x_pc = −s/g
                let d = &row[pc];
                let g = s.gcd(d);
                let scale = d / &g;
                if !scale.is_one() {
                    for xi in x.iter_mut().filter(|xi| !xi.is_zero()) {
                        *xi *= &scale;
                    }
                }
                x[pc] = -(s / &g);
            }
            normalize_integer_vector(x)
        })
        .collect()
}

/// Clears denominators, divides by the content and makes the first non-zero entry positive.
pub fn primitive_integer_vector(v: &[Rational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let ints: Vec<BigInt> = v.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
    normalize_integer_vector(ints)
}

pub fn normalize_integer_vector(mut ints: Vec<BigInt>) -> Vec<BigInt> {
    let g = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_zero() {
        return ints;
    }
    let neg = ints.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative());
    for c in ints.iter_mut() {
        *c = &*c / &g;
        if neg {
            *c = -&*c;
        }
    }
    ints
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// The `count` largest primes below 2^62.
pub fn large_primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut n = (1u64 << 62) - 1;
    while out.len() < count {
        if is_prime_u64(n) {
            out.push(n);
        }
        n -= 2;
    }
    out
}

/// Reduces an integer modulo `p` into `[0, p)`.
pub fn reduce_mod(x: &BigInt, p: u64) -> u64 {
    let m = x.mod_floor(&BigInt::from(p));
    m.iter_u64_digits().next().unwrap_or(0)
}

/// Rank of a matrix over 𝔽_p. The rank over ℚ of an integer matrix is at least this value.
pub fn rank_mod_p(rows: &[Vec<u64>], ncols: usize, p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows.to_vec();
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, piv);
        let inv = pow_mod(m[r][c], p - 2, p);
        for x in m[r][c..].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let (head, tail) = m.split_at_mut(r + 1);
        let pr = &head[r];
        tail.par_iter_mut().for_each(|row| {
            let f = row[c];
            if f != 0 {
                for j in c..ncols {
                    let t = mul_mod(f, pr[j], p);
                    row[j] = (row[j] + p - t) % p;
                }
            }
        });
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Indices of a maximal set of rows independent over 𝔽_p, chosen greedily in order.
/// Rows independent modulo `p` are independent over ℚ.
pub fn independent_rows_mod_p(rows: &[Vec<u64>], ncols: usize, p: u64) -> Vec<usize> {
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut chosen = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut r = row.clone();
        for (c, b) in &basis {
            let f = r[*c];
            if f != 0 {
                for j in *c..ncols {
                    r[j] = (r[j] + p - mul_mod(f, b[j], p)) % p;
                }
            }
        }
        if let Some(c) = (0..ncols).find(|&c| r[c] != 0) {
            let inv = pow_mod(r[c], p - 2, p);
            for x in r[c..].iter_mut() {
                *x = mul_mod(*x, inv, p);
            }
            basis.push((c, r));
            chosen.push(i);
            if chosen.len() == ncols {
                break;
            }
        }
    }
    chosen
}
