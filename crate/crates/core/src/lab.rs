//! Exhaustive small-grid experiments: canonical forms up to row/column
//! permutation, the combinatorial-versus-algebraic census, and cross-checks
//! against the classical rank-1 and corank-1 characterizations.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::{self, Mask};
use crate::error::{Error, Result};
use crate::oracle::{self, Verdict};
use crate::partition::{partition_search, SearchOptions};
use crate::pattern::{ReductionStep, SupportPattern};
use crate::slmf::{is_relaxed_slmf, RelaxedParams};

/// Exhaustive enumeration is limited to `m * n <= 36`.
pub const GRID_CEILING: usize = 36;

/// Raw (non-canonical) enumeration is limited to this many subsets.
pub const RAW_CEILING: usize = 2_000_000;

/// Number of oracle trials and distinct primes used to re-check a
/// counterexample candidate.
pub const REVERIFY_TRIALS: usize = 10;
pub const REVERIFY_PRIMES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Filter {
    /// Size `r(m + n - r)` and every row and column of degree `>= r + 1`.
    #[default]
    BaseSizeAndMinDegree,
    /// Size `r(m + n - r)` only.
    BaseSize,
    All,
}

fn code(mask: Mask, m: usize) -> u64 {
    // row 1 is the most significant bit
    bits::members(mask)
        .into_iter()
        .fold(0, |acc, i| acc | 1 << (m - 1 - i))
}

fn uncode(c: u64, m: usize) -> Mask {
    (0..m)
        .filter(|&i| c >> (m - 1 - i) & 1 == 1)
        .fold(0, |acc, i| acc | 1 << i)
}

fn permute_rows(mask: Mask, perm: &[usize]) -> Mask {
    bits::members(mask)
        .into_iter()
        .fold(0, |acc, i| acc | 1 << perm[i])
}

/// Least column-code sequence over all row and column permutations.
fn canonical_codes(m: usize, masks: &[Mask]) -> Vec<u64> {
    let n = masks.len();
    let mut best: Option<Vec<u64>> = None;
    if m <= n {
        for perm in (0..m).permutations(m) {
            let mut codes: Vec<u64> = masks.iter().map(|&c| code(permute_rows(c, &perm), m)).collect();
            codes.sort_unstable();
            if best.as_ref().is_none_or(|b| codes < *b) {
                best = Some(codes);
            }
        }
    } else {
        for perm in (0..n).permutations(n) {
            let cols: Vec<Mask> = perm.iter().map(|&k| masks[k]).collect();
            let tuple = |i: usize| -> u64 { cols.iter().fold(0u64, |acc, &c| acc << 1 | (c >> i & 1)) };
            let mut rows: Vec<usize> = (0..m).collect();
            rows.sort_by_key(|&i| tuple(i));
            let mut row_perm = vec![0; m];
            for (new, &old) in rows.iter().enumerate() {
                row_perm[old] = new;
            }
            let codes: Vec<u64> = cols
                .iter()
                .map(|&c| code(permute_rows(c, &row_perm), m))
                .collect();
            if best.as_ref().is_none_or(|b| codes < *b) {
                best = Some(codes);
            }
        }
    }
    best.unwrap_or_default()
}

/// The lexicographically least pattern (column-major reading, row 1 first)
/// in the row/column-permutation orbit of `p`.
pub fn canonical_form(p: &SupportPattern) -> SupportPattern {
    let m = p.m();
    let masks = canonical_codes(m, p.columns())
        .into_iter()
        .map(|c| uncode(c, m))
        .collect();
    SupportPattern::from_masks(m, masks).expect("permuted pattern is valid")
}

pub fn is_canonical(p: &SupportPattern) -> bool {
    canonical_form(p) == *p
}

fn check_grid(m: usize, n: usize) -> Result<()> {
    if m * n > GRID_CEILING {
        return Err(Error::Capacity {
            what: "m*n",
            value: m * n,
            ceiling: GRID_CEILING,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EnumOptions {
    pub filter: Filter,
    /// Only columns with exactly this many rows.
    pub col_size: Option<usize>,
}

/// One canonical representative per orbit, in increasing canonical order.
pub fn enumerate_patterns(m: usize, n: usize, r: usize, opts: EnumOptions) -> Result<Vec<SupportPattern>> {
    check_grid(m, n)?;
    let target = match opts.filter {
        Filter::All => None,
        _ => Some(r * (m + n).saturating_sub(r)),
    };
    let min_deg = match opts.filter {
        Filter::BaseSizeAndMinDegree => r + 1,
        _ => 0,
    };
    let allowed: Vec<u64> = (0u64..1 << m)
        .filter(|&c| {
            let k = c.count_ones() as usize;
            k >= min_deg && opts.col_size.is_none_or(|s| s == k)
        })
        .collect();
    let mut out = Vec::new();
    let mut codes = Vec::with_capacity(n);
    let ctx = EnumCtx {
        m,
        n,
        target,
        min_deg,
        allowed: &allowed,
        max_pop: allowed.iter().map(|c| c.count_ones() as usize).max().unwrap_or(0),
        min_pop: allowed.iter().map(|c| c.count_ones() as usize).min().unwrap_or(0),
    };
    if !allowed.is_empty() || n == 0 {
        ctx.extend(0, 0, &mut codes, &mut out);
    }
    Ok(out)
}

struct EnumCtx<'a> {
    m: usize,
    n: usize,
    target: Option<usize>,
    min_deg: usize,
    allowed: &'a [u64],
    max_pop: usize,
    min_pop: usize,
}

impl EnumCtx<'_> {
    fn extend(&self, start: usize, size: usize, codes: &mut Vec<u64>, out: &mut Vec<SupportPattern>) {
        let left = self.n - codes.len();
        if let Some(t) = self.target {
            if size + left * self.min_pop > t || size + left * self.max_pop < t {
                return;
            }
        }
        if left == 0 {
            let masks: Vec<Mask> = codes.iter().map(|&c| uncode(c, self.m)).collect();
            let p = SupportPattern::from_masks(self.m, masks).expect("valid codes");
            if p.degrees().0.iter().all(|&d| d >= self.min_deg)
                && canonical_codes(self.m, p.columns()) == *codes
            {
                out.push(p);
            }
            return;
        }
        for k in start..self.allowed.len() {
            let c = self.allowed[k];
            codes.push(c);
            self.extend(k, size + c.count_ones() as usize, codes, out);
            codes.pop();
        }
    }
}

/// Every pattern with exactly `size` entries on the `m x n` grid (no
/// symmetry reduction).
pub fn all_patterns_of_size(m: usize, n: usize, size: usize) -> Result<Vec<SupportPattern>> {
    check_grid(m, n)?;
    let cells = m * n;
    let count = bits::binomial(cells, size);
    if count > RAW_CEILING {
        return Err(Error::Capacity {
            what: "subsets",
            value: count,
            ceiling: RAW_CEILING,
        });
    }
    Ok(bits::k_subsets(cells, size)
        .map(|cellmask| {
            let cols = (0..n)
                .map(|j| {
                    (0..m)
                        .filter(|&i| bits::contains(cellmask, j * m + i))
                        .fold(0, |a, i| a | 1 << i)
                })
                .collect();
            SupportPattern::from_masks(m, cols).expect("valid pattern")
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct OracleParams {
    pub prime: u64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            prime: crate::DEFAULT_PRIME,
            trials: oracle::DEFAULT_TRIALS,
            seed: 0,
        }
    }
}

/// Seed for one pattern, independent of enumeration order.
fn pattern_seed(seed: u64, p: &SupportPattern) -> u64 {
    p.columns().iter().fold(seed ^ 0xcbf2_9ce4_8422_2325, |h, &c| {
        (h ^ c).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusRow {
    pub pattern: SupportPattern,
    pub reduction: Vec<ReductionStep>,
    pub reduced: SupportPattern,
    pub is_relaxed_rrm: bool,
    pub has_partition: bool,
    pub oracle_base: bool,
    pub oracle_rank: usize,
    /// Violated inequality or partition groups (1-based), when available.
    pub witness: Option<serde_json::Value>,
}

impl CensusRow {
    pub fn consistent(&self) -> bool {
        self.is_relaxed_rrm == self.has_partition
            && (!self.has_partition || self.oracle_base)
            && (!self.oracle_base || self.is_relaxed_rrm)
    }

    fn witness_text(&self) -> String {
        match &self.witness {
            None => String::new(),
            Some(w) if w.get("groups").is_some() => {
                let groups: Vec<String> = w["groups"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .map(|g| {
                        g.as_array()
                            .into_iter()
                            .flatten()
                            .map(|v| v.to_string())
                            .join(";")
                    })
                    .collect();
                format!("groups={}", groups.join("|"))
            }
            Some(w) => {
                let rows = w["I"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .map(|v| v.to_string())
                    .join(";");
                format!("I={rows}")
            }
        }
    }
}

pub const CENSUS_HEADER: &str =
    "pattern,m,n,reduced_m,reduced_n,is_relaxed_rrm,has_partition,oracle_base,oracle_rank,witness";

fn pattern_text(p: &SupportPattern) -> String {
    p.to_indicator_rows()
        .iter()
        .map(|row| row.iter().map(|b| b.to_string()).collect::<String>())
        .join(";")
}

impl CensusRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            pattern_text(&self.pattern),
            self.pattern.m(),
            self.pattern.n(),
            self.reduced.m(),
            self.reduced.n(),
            self.is_relaxed_rrm,
            self.has_partition,
            self.oracle_base,
            self.oracle_rank,
            self.witness_text()
        )
    }
}

/// With at most `r` rows left every matrix has rank `<= r`, so a pattern is a
/// base exactly when it is full. `None` when more than `r` rows remain.
pub fn trivial_base(reduced: &SupportPattern, r: usize) -> Option<bool> {
    (reduced.m() <= r).then(|| reduced.size() == reduced.m() * reduced.n())
}

/// Classifies one pattern. The combinatorial columns are computed on the
/// pattern after removing degree-`r` rows and size-`r` columns; the oracle
/// runs on the pattern as given.
pub fn classify(p: &SupportPattern, r: usize, params: &OracleParams) -> Result<CensusRow> {
    let (reduced, reduction) = p.reduce(r)?;
    let (is_relaxed_rrm, has_partition, witness) = if let Some(base) = trivial_base(&reduced, r) {
        (base, base, None)
    } else {
        let violation = is_relaxed_slmf(&reduced, &RelaxedParams::new(r, r))?;
        let search = partition_search(&reduced, r, &SearchOptions::default())?;
        let witness = match (&violation, search.certificate()) {
            (_, Some(cert)) => Some(serde_json::json!({
                "groups": cert.groups.iter().map(|g| g.iter().map(|j| j + 1).collect::<Vec<_>>()).collect::<Vec<_>>()
            })),
            (Some(v), None) => Some(serde_json::to_value(v).expect("witness serializes")),
            (None, None) => None,
        };
        (violation.is_none(), search.certificate().is_some(), witness)
    };
    let verdict = oracle::is_base(p, r, params.prime, params.trials, pattern_seed(params.seed, p))?;
    Ok(CensusRow {
        pattern: p.clone(),
        reduction,
        reduced,
        is_relaxed_rrm,
        has_partition,
        oracle_base: verdict.verdict == Verdict::Base,
        oracle_rank: verdict.rank_observed,
        witness,
    })
}

/// Repeats the oracle with more trials over several primes.
pub fn reverify_oracle(p: &SupportPattern, r: usize, params: &OracleParams) -> Result<(bool, usize)> {
    let primes = oracle::prime_ladder(params.prime, REVERIFY_PRIMES)?;
    let seed = pattern_seed(params.seed, p);
    let mut best = 0;
    for t in 0..REVERIFY_TRIALS {
        let q = primes[t % primes.len()];
        best = best.max(oracle::jacobian_rank(
            p,
            r,
            q,
            seed.wrapping_add(1000 + t as u64),
        )?);
    }
    Ok((p.size() == p.base_size(r) && best == p.size(), best))
}

#[derive(Debug, Clone, Serialize)]
pub struct Census {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub rows: Vec<CensusRow>,
    /// Rows that stayed inconsistent after re-verification.
    pub counterexamples: Vec<CensusRow>,
}

impl Census {
    pub fn consistent(&self) -> bool {
        self.counterexamples.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CENSUS_HEADER);
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.to_csv());
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Default)]
pub struct CensusOptions {
    pub enumeration: EnumOptions,
    pub oracle: OracleParams,
}

/// Runs the census over all canonical patterns. Rows come out in
/// enumeration order whatever the worker count.
pub fn verify_conjecture(m: usize, n: usize, r: usize, opts: &CensusOptions) -> Result<Census> {
    if r == 0 || r >= m.min(n) {
        return Err(Error::contract(format!(
            "need 1 <= r < min(m, n), got r = {r} for {m}x{n}"
        )));
    }
    let patterns = enumerate_patterns(m, n, r, opts.enumeration)?;
    let rows = patterns
        .par_iter()
        .map(|p| {
            let mut row = classify(p, r, &opts.oracle)?;
            if !row.consistent() {
                let (base, rank) = reverify_oracle(p, r, &opts.oracle)?;
                row.oracle_base = base;
                row.oracle_rank = rank;
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let counterexamples = rows.iter().filter(|row| !row.consistent()).cloned().collect();
    Ok(Census {
        m,
        n,
        r,
        rows,
        counterexamples,
    })
}

/// `G_Omega` is connected on all `m + n` vertices with exactly `m + n - 1`
/// edges.
pub fn is_spanning_tree(p: &SupportPattern) -> bool {
    let (m, n) = (p.m(), p.n());
    if p.size() + 1 != m + n {
        return false;
    }
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut merges = 0;
    for j in 0..n {
        for i in bits::members(p.column(j)) {
            let (a, b) = (find(&mut parent, i), find(&mut parent, m + j));
            if a != b {
                parent[a] = b;
                merges += 1;
            }
        }
    }
    merges + 1 == m + n
}

/// `G_Omega` contains `K_{k,k}` with `k = min(m, n)`.
pub fn contains_complete_bipartite(p: &SupportPattern) -> bool {
    let q = if p.m() <= p.n() { p.clone() } else { p.transpose() };
    let full = bits::full(q.m());
    q.columns().iter().filter(|&&c| c == full).count() >= q.m()
}

#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub checked: usize,
    pub bases: usize,
    pub disagreements: Vec<SupportPattern>,
}

/// Compares the oracle with the tree criterion (`r = 1`) or the
/// no-`K_{k,k}` criterion (`r = min(m, n) - 1`) over every pattern of base
/// size.
pub fn known_facts_crosscheck(
    m: usize,
    n: usize,
    r: usize,
    params: &OracleParams,
) -> Result<CrosscheckReport> {
    let k = m.min(n);
    if r != 1 && r + 1 != k {
        return Err(Error::contract(format!(
            "cross-check supports r = 1 or r = min(m, n) - 1 = {}, got {r}",
            k.saturating_sub(1)
        )));
    }
    let size = r * (m + n - r);
    let patterns = all_patterns_of_size(m, n, size)?;
    let verdicts = patterns
        .par_iter()
        .map(|p| {
            let oracle_base =
                oracle::is_base(p, r, params.prime, params.trials, pattern_seed(params.seed, p))?.verdict
                    == Verdict::Base;
            let known = if r == 1 {
                is_spanning_tree(p)
            } else {
                !contains_complete_bipartite(p)
            };
            Ok((oracle_base, known))
        })
        .collect::<Result<Vec<_>>>()?;
    let disagreements = patterns
        .iter()
        .zip(&verdicts)
        .filter(|(_, (a, b))| a != b)
        .map(|(p, _)| p.clone())
        .collect();
    Ok(CrosscheckReport {
        m,
        n,
        r,
        checked: patterns.len(),
        bases: verdicts.iter().filter(|(a, _)| *a).count(),
        disagreements,
    })
}
