//! Exact rank-`r` completion from the entries on a certified base.
//!
//! The column space `S` of the hidden matrix is recovered from normals of
//! the projections `pi_phi(S)` for `(r + 1)`-sets `phi` covered by `r`
//! observed columns, then each column is the unique vector of `S` matching
//! its observed entries.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::bits::{self, Mask};
use crate::error::{Error, Result};
use crate::field::{sign, Field};
use crate::matrix::Matrix;
use crate::partition::PartitionCertificate;
use crate::pattern::SupportPattern;

/// How many column combinations are tried per row set before moving on.
pub const DEFAULT_RETRY_BUDGET: usize = 20;

/// Observed entries keyed by 0-based `(row, column)`.
pub type Observations<F> = BTreeMap<(usize, usize), F>;

/// Parses `i,j,value` lines (1-based indices). Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_observations<F: Field>(text: &str) -> Result<Observations<F>> {
    let mut out = Observations::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let loc = || format!("line {}", ln + 1);
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [i, j, v] = fields[..] else {
            return Err(Error::parse(loc(), "expected i,j,value"));
        };
        let index = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .ok()
                .and_then(|k| k.checked_sub(1))
                .ok_or_else(|| Error::parse(loc(), format!("bad 1-based index {s:?}")))
        };
        let key = (index(i)?, index(j)?);
        let value = F::parse_scalar(v).ok_or_else(|| Error::parse(loc(), format!("bad value {v:?}")))?;
        if out.insert(key, value).is_some() {
            return Err(Error::parse(loc(), "duplicate entry"));
        }
    }
    Ok(out)
}

/// The entries of `x` on `pattern`.
pub fn project<F: Field>(x: &Matrix<F>, pattern: &SupportPattern) -> Observations<F> {
    let mut out = Observations::new();
    for j in 0..pattern.n() {
        for i in bits::members(pattern.column(j)) {
            out.insert((i, j), x[(i, j)].clone());
        }
    }
    out
}

/// Matrix as CSV, one row per line.
pub fn to_csv<F: Field>(x: &Matrix<F>) -> String {
    let mut s = String::new();
    for i in 0..x.rows() {
        let row: Vec<String> = (0..x.cols()).map(|j| x[(i, j)].to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn not_generic(stage: &'static str, phi: Mask) -> Error {
    Error::NotGeneric {
        stage,
        phi: bits::to_one_based(phi),
    }
}

/// Normal of `pi_phi(S)` inside `k^m` from observed columns whose
/// restrictions to `phi` span an `r`-space.
fn section_normal_from_columns<F: Field>(
    phi: Mask,
    cols: &[usize],
    observed: &Observations<F>,
) -> Option<Vec<F>> {
    let rows = bits::members(phi);
    let block = Matrix::from_fn(rows.len(), cols.len(), |a, b| {
        observed[&(rows[a], cols[b])].clone()
    });
    if block.rank() != cols.len() {
        return None;
    }
    let all: Vec<usize> = (0..cols.len()).collect();
    let m = 1 + *rows.last().expect("phi is nonempty");
    let mut normal = vec![F::zero(); m];
    for (pos, &i) in rows.iter().enumerate() {
        let minor: Vec<usize> = (0..rows.len()).filter(|&a| a != pos).collect();
        normal[i] = sign::<F>(pos) * block.select(&minor, &all).determinant();
    }
    Some(normal)
}

pub struct Completer<'a> {
    pattern: &'a SupportPattern,
    r: usize,
    cert: &'a PartitionCertificate,
    retry_budget: usize,
}

impl<'a> Completer<'a> {
    pub fn new(pattern: &'a SupportPattern, cert: &'a PartitionCertificate) -> Self {
        Completer {
            pattern,
            r: cert.r,
            cert,
            retry_budget: DEFAULT_RETRY_BUDGET,
        }
    }

    pub fn retry_budget(mut self, budget: usize) -> Self {
        self.retry_budget = budget.max(1);
        self
    }

    /// Row sets to take normals from: the certificate's SLMF columns first,
    /// then every other `(r + 1)`-set in lexicographic order.
    fn candidate_sets(&self) -> Vec<Mask> {
        let mut seen = std::collections::HashSet::new();
        let from_cert = self
            .cert
            .phis
            .iter()
            .flat_map(|phi| phi.columns().iter().copied());
        let rest = bits::k_subsets(self.pattern.m(), self.r + 1);
        from_cert.chain(rest).filter(|&phi| seen.insert(phi)).collect()
    }

    /// Recovers a basis (`m x r`) of the column space.
    pub fn column_space<F: Field>(&self, observed: &Observations<F>) -> Result<Matrix<F>> {
        let (m, r) = (self.pattern.m(), self.r);
        let mut normals: Vec<Vec<F>> = Vec::new();
        let mut rank = 0;
        let mut last_failure = None;
        for phi in self.candidate_sets() {
            if rank == m - r {
                break;
            }
            let eligible: Vec<usize> = (0..self.pattern.n())
                .filter(|&j| phi & !self.pattern.column(j) == 0)
                .collect();
            if eligible.len() < r {
                continue;
            }
            let normal = eligible
                .into_iter()
                .combinations(r)
                .take(self.retry_budget)
                .find_map(|cols| section_normal_from_columns(phi, &cols, observed));
            let Some(mut normal) = normal else {
                last_failure = Some(phi);
                continue;
            };
            normal.resize(m, F::zero());
            normals.push(normal);
            let stacked = Matrix::from_columns(m, &normals);
            let new_rank = stacked.rank();
            if new_rank == rank {
                normals.pop();
            }
            rank = new_rank;
        }
        if rank != m - r {
            return Err(not_generic("normals", last_failure.unwrap_or(0)));
        }
        let normal_matrix = Matrix::from_columns(m, &normals);
        let basis = normal_matrix.transpose().kernel();
        if basis.len() != r {
            return Err(not_generic("column_space", 0));
        }
        Ok(Matrix::from_columns(m, &basis))
    }

    pub fn complete<F: Field>(&self, observed: &Observations<F>) -> Result<Matrix<F>> {
        let (m, n, r) = (self.pattern.m(), self.pattern.n(), self.r);
        self.cert.validate(self.pattern)?;
        for &(i, j) in observed.keys() {
            if i >= m || j >= n || !self.pattern.contains(i, j) {
                return Err(Error::contract(format!(
                    "observed entry ({}, {}) is outside the pattern",
                    i + 1,
                    j + 1
                )));
            }
        }
        if observed.len() != self.pattern.size() {
            let (i, j) = (0..n)
                .flat_map(|j| {
                    bits::members(self.pattern.column(j))
                        .into_iter()
                        .map(move |i| (i, j))
                })
                .find(|k| !observed.contains_key(k))
                .expect("a pattern entry is missing");
            return Err(Error::contract(format!(
                "observed entry ({}, {}) is missing",
                i + 1,
                j + 1
            )));
        }
        let basis = self.column_space(observed)?;
        let all: Vec<usize> = (0..r).collect();
        let mut columns = Vec::with_capacity(n);
        for j in 0..n {
            let omega = self.pattern.column(j);
            let rows = bits::members(omega);
            let local = basis.select(&rows, &all);
            if local.rank() != r {
                return Err(not_generic("reconstruction", omega));
            }
            let rhs: Vec<F> = rows.iter().map(|&i| observed[&(i, j)].clone()).collect();
            let coeffs = local
                .solve(&rhs)
                .ok_or(Error::Inconsistent { r, column: j + 1 })?;
            columns.push(basis.mul_vec(&coeffs));
        }
        let x = Matrix::from_columns(m, &columns);
        if project(&x, self.pattern) != *observed {
            return Err(Error::Inconsistent { r, column: 0 });
        }
        Ok(x)
    }
}

/// Completes `observed` (the entries on `pattern`) to the unique rank-`r`
/// matrix, given a partition certificate for `pattern`. Fails with
/// [`Error::NotGeneric`] when the data do not pin down the column space,
/// either because the point is special or because too few `(r + 1)`-sets
/// of rows are covered by `r` columns.
pub fn complete_matrix<F: Field>(
    pattern: &SupportPattern,
    cert: &PartitionCertificate,
    observed: &Observations<F>,
) -> Result<Matrix<F>> {
    Completer::new(pattern, cert).complete(observed)
}
