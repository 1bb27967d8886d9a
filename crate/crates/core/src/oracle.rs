//! Randomized algebraic-matroid oracle.
//!
//! Entries `Omega` are independent in the algebraic matroid of rank-`r`
//! matrices iff the coordinate projection is dominant, which is detected by
//! the Jacobian of `x_ij = sum_k l_ik r_kj` (over `(i, j) in Omega`) with
//! respect to the entries of `L` and `R`, evaluated at a random point over
//! GF(p). A full-rank evaluation certifies independence up to the usual
//! Monte Carlo caveat for the characteristic; a deficient rank on every
//! trial is strong evidence of dependence.

use rand::Rng;
use serde::Serialize;

use crate::bits;
use crate::error::{Error, Result};
use crate::field::Fp;
use crate::matrix::Matrix;
use crate::pattern::SupportPattern;
use crate::rng::{substream, Stream};
use crate::slmf::{is_relaxed_slmf, RelaxedParams, ViolationWitness};

pub const DEFAULT_TRIALS: usize = 3;

/// Dense matrix over GF(p) for a prime chosen at run time.
#[derive(Clone, PartialEq, Eq)]
pub struct PrimeFieldMatrix {
    p: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Largest prime strictly below `n`.
pub fn prev_prime(n: u64) -> Option<u64> {
    (2..n).rev().find(|&k| is_prime(k))
}

/// `count` distinct primes: `p` and the primes just below it.
pub fn prime_ladder(p: u64, count: usize) -> Result<Vec<u64>> {
    if !is_prime(p) {
        return Err(Error::contract(format!("{p} is not prime")));
    }
    let mut out = vec![p];
    while out.len() < count {
        let next = prev_prime(*out.last().expect("nonempty"))
            .ok_or_else(|| Error::contract(format!("not enough primes below {p}")))?;
        out.push(next);
    }
    Ok(out)
}

impl PrimeFieldMatrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        PrimeFieldMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn random<R: Rng + ?Sized>(p: u64, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| rng.gen_range(0..p)).collect();
        PrimeFieldMatrix { p, rows, cols, data }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn mul(&self, rhs: &PrimeFieldMatrix) -> PrimeFieldMatrix {
        assert_eq!(self.p, rhs.p, "moduli differ");
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let mut out = PrimeFieldMatrix::zeros(self.p, self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc = (acc + mul_mod(self.get(i, k), rhs.get(k, j), self.p)) % self.p;
                }
                out.data[i * rhs.cols + j] = acc;
            }
        }
        out
    }

    /// Submatrix on the given rows, all columns.
    pub fn select_rows(&self, rows: &[usize]) -> PrimeFieldMatrix {
        let mut out = PrimeFieldMatrix::zeros(self.p, rows.len(), self.cols);
        for (a, &i) in rows.iter().enumerate() {
            out.data[a * self.cols..(a + 1) * self.cols]
                .copy_from_slice(&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        out
    }

    /// Rank by Gaussian elimination with partial pivoting.
    pub fn rank(&self) -> usize {
        let p = self.p;
        let mut a = self.data.clone();
        let cols = self.cols;
        let mut row = 0;
        for col in 0..cols {
            if row == self.rows {
                break;
            }
            let Some(piv) = (row..self.rows).find(|&i| a[i * cols + col] != 0) else {
                continue;
            };
            if piv != row {
                for k in 0..cols {
                    a.swap(piv * cols + k, row * cols + k);
                }
            }
            let inv = pow_mod(a[row * cols + col], p - 2, p);
            for i in row + 1..self.rows {
                let v = a[i * cols + col];
                if v == 0 {
                    continue;
                }
                let factor = mul_mod(v, inv, p);
                for k in col..cols {
                    let sub = mul_mod(a[row * cols + k], factor, p);
                    a[i * cols + k] = (a[i * cols + k] + p - sub) % p;
                }
            }
            row += 1;
        }
        row
    }

    /// Converts to a generic matrix over `Fp<P>`; the moduli must agree.
    pub fn to_matrix<const P: u64>(&self) -> Result<Matrix<Fp<P>>> {
        if self.p != P {
            return Err(Error::contract(format!(
                "matrix lives over GF({}), requested GF({P})",
                self.p
            )));
        }
        Ok(Matrix::from_fn(self.rows, self.cols, |i, j| {
            Fp::new(self.get(i, j))
        }))
    }
}

impl std::fmt::Debug for PrimeFieldMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "PrimeFieldMatrix {}x{} mod {} [", self.rows, self.cols, self.p)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

fn check_rank_args(m: usize, n: usize, r: usize, p: u64) -> Result<()> {
    if r > m.min(n) {
        return Err(Error::contract(format!(
            "r = {r} exceeds min(m, n) = {}",
            m.min(n)
        )));
    }
    if p < 2 * r as u64 || !is_prime(p) {
        return Err(Error::contract(format!("modulus {p} must be a prime >= 2r")));
    }
    Ok(())
}

fn random_factors(
    m: usize,
    n: usize,
    r: usize,
    p: u64,
    seed: u64,
    attempt: u64,
) -> (PrimeFieldMatrix, PrimeFieldMatrix) {
    let mut rng = substream(seed, Stream::RandomMatrix, attempt);
    let l = PrimeFieldMatrix::random(p, m, r, &mut rng);
    let rt = PrimeFieldMatrix::random(p, r, n, &mut rng);
    (l, rt)
}

/// `X = L R` with uniform `L` (m x r) and `R` (r x n), resampled until
/// `rank X = r`.
pub fn random_rank_r(m: usize, n: usize, r: usize, p: u64, seed: u64) -> Result<PrimeFieldMatrix> {
    check_rank_args(m, n, r, p)?;
    for attempt in 0.. {
        let (l, rt) = random_factors(m, n, r, p, seed, attempt);
        let x = l.mul(&rt);
        if x.rank() == r {
            return Ok(x);
        }
    }
    unreachable!()
}

/// Like [`random_rank_r`], additionally requiring that the column space
/// projects onto every set of `r` coordinates isomorphically.
pub fn random_rank_r_generic(m: usize, n: usize, r: usize, p: u64, seed: u64) -> Result<PrimeFieldMatrix> {
    check_rank_args(m, n, r, p)?;
    for attempt in 0.. {
        let (l, rt) = random_factors(m, n, r, p, seed, attempt);
        let x = l.mul(&rt);
        if x.rank() != r {
            continue;
        }
        let all_minors = bits::k_subsets(m, r).all(|rows| l.select_rows(&bits::members(rows)).rank() == r);
        if all_minors {
            return Ok(x);
        }
    }
    unreachable!()
}

/// Rank of the Jacobian of `(L, R) -> (LR)_Omega` at one random point.
pub fn jacobian_rank(pattern: &SupportPattern, r: usize, p: u64, seed: u64) -> Result<usize> {
    let (m, n) = (pattern.m(), pattern.n());
    check_rank_args(m, n, r, p)?;
    let mut rng = substream(seed, Stream::Jacobian, p);
    let l = PrimeFieldMatrix::random(p, m, r, &mut rng);
    let rt = PrimeFieldMatrix::random(p, r, n, &mut rng);
    Ok(jacobian_at(pattern, &l, &rt).rank())
}

fn jacobian_at(pattern: &SupportPattern, l: &PrimeFieldMatrix, rt: &PrimeFieldMatrix) -> PrimeFieldMatrix {
    let (m, n, r) = (pattern.m(), pattern.n(), l.cols());
    let mut jac = PrimeFieldMatrix::zeros(l.modulus(), pattern.size(), r * (m + n));
    let mut row = 0;
    for j in 0..n {
        for i in bits::members(pattern.column(j)) {
            for k in 0..r {
                jac.set(row, i * r + k, rt.get(k, j));
                jac.set(row, m * r + k * n + j, l.get(i, k));
            }
            row += 1;
        }
    }
    jac
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Independent,
    Dependent,
    Base,
    NotBase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleVerdict {
    pub verdict: Verdict,
    /// Trials actually evaluated; the run stops at the first full-rank one.
    pub trials: usize,
    /// Modulus of the trial that produced `rank_observed`.
    pub p: u64,
    pub rank_observed: usize,
    pub rank_required: usize,
}

/// Maximum Jacobian rank over up to `trials` evaluations at distinct primes
/// `p, prev_prime(p), ...`, stopping once `target` is reached.
fn max_rank(
    pattern: &SupportPattern,
    r: usize,
    p: u64,
    trials: usize,
    seed: u64,
    target: usize,
) -> Result<(usize, u64, usize)> {
    let primes = prime_ladder(p, trials.max(1))?;
    let (mut best, mut best_p, mut used) = (0, primes[0], 0);
    for (t, &q) in primes.iter().enumerate() {
        let rank = jacobian_rank(pattern, r, q, seed.wrapping_add(t as u64))?;
        used = t + 1;
        if rank > best {
            best = rank;
            best_p = q;
        }
        if rank >= target {
            break;
        }
    }
    Ok((best, best_p, used))
}

pub fn is_independent(
    pattern: &SupportPattern,
    r: usize,
    p: u64,
    trials: usize,
    seed: u64,
) -> Result<OracleVerdict> {
    let size = pattern.size();
    let (rank, q, used) = max_rank(pattern, r, p, trials, seed, size)?;
    Ok(OracleVerdict {
        verdict: if rank == size {
            Verdict::Independent
        } else {
            Verdict::Dependent
        },
        trials: used,
        p: q,
        rank_observed: rank,
        rank_required: size,
    })
}

pub fn is_base(
    pattern: &SupportPattern,
    r: usize,
    p: u64,
    trials: usize,
    seed: u64,
) -> Result<OracleVerdict> {
    let required = pattern.base_size(r);
    let size = pattern.size();
    let (rank, q, used) = max_rank(pattern, r, p, trials, seed, size.min(required))?;
    Ok(OracleVerdict {
        verdict: if size == required && rank == size {
            Verdict::Base
        } else {
            Verdict::NotBase
        },
        trials: used,
        p: q,
        rank_observed: rank,
        rank_required: required,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessityReport {
    pub oracle: OracleVerdict,
    pub relaxed: bool,
    pub witness: Option<ViolationWitness>,
    /// Base according to the oracle but not a relaxed `(r, r, m)`-SLMF.
    pub red_flag: bool,
}

/// Cross-checks the oracle against the necessary condition that every base
/// is a relaxed `(r, r, m)`-SLMF.
pub fn check_necessity(
    pattern: &SupportPattern,
    r: usize,
    p: u64,
    trials: usize,
    seed: u64,
) -> Result<NecessityReport> {
    let oracle = is_base(pattern, r, p, trials, seed)?;
    let witness = is_relaxed_slmf(pattern, &RelaxedParams::new(r, r))?;
    let relaxed = witness.is_none();
    Ok(NecessityReport {
        red_flag: oracle.verdict == Verdict::Base && !relaxed,
        oracle,
        relaxed,
        witness,
    })
}
