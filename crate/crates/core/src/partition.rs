//! Partitions of the column set into relaxed `(1, r, m)`-SLMFs.
//!
//! A partition `[n] = J_1 ∪ ... ∪ J_r` with every `Omega_{J_l}` a relaxed
//! `(1, r, m)`-SLMF certifies (together with `#Omega = r(m + n - r)`) that
//! `Omega` is a base. Three routes produce one:
//!
//! * [`partition_search`]: exhaustive backtracking, any column sizes;
//! * [`TruncationMatroid::pack_bases`]: matroid partitioning when every
//!   column has exactly `r + 1` rows;
//! * [`partition_r_eq_m_minus_2`] / [`partition_r_eq_m_minus_1`]: direct
//!   constructions for the two largest ranks.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::bits::{self, Mask};
use crate::error::{Error, Result};
use crate::pattern::SupportPattern;
use crate::slmf::{self, induce_slmf, is_relaxed_slmf, RelaxedParams, Slmf};

/// Default ceiling on `#J` for set-partition enumeration in [`TruncationMatroid`].
pub const DILWORTH_CEILING: usize = 12;

/// Ceiling on `n` for [`TruncationMatroid::pack_bases`], whose failure path
/// tabulates the truncated rank on all `2^n` column subsets.
pub const PACKING_CEILING: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionCertificate {
    pub r: usize,
    /// Disjoint 0-based column groups covering `[n]`.
    pub groups: Vec<Vec<usize>>,
    /// One SLMF per group.
    pub phis: Vec<Slmf>,
    /// All groups induce the same SLMF (as a set of columns).
    pub same_phi: bool,
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    r: usize,
    groups: Vec<Vec<usize>>,
    phis: Vec<Vec<Vec<u8>>>,
    same_phi: bool,
}

fn same_phi(phis: &[Slmf]) -> bool {
    phis.windows(2).all(|w| w[0].column_set() == w[1].column_set())
}

impl PartitionCertificate {
    /// Builds a certificate from groups, inducing one SLMF per group.
    pub fn from_groups(p: &SupportPattern, r: usize, mut groups: Vec<Vec<usize>>) -> Result<Self> {
        for g in &mut groups {
            g.sort_unstable();
        }
        groups.sort_by_key(|g| g.first().copied().unwrap_or(usize::MAX));
        let phis = groups
            .iter()
            .map(|g| induce_slmf(p, g, r).map(|ind| ind.phi))
            .collect::<Result<Vec<_>>>()?;
        let cert = PartitionCertificate {
            r,
            same_phi: same_phi(&phis),
            groups,
            phis,
        };
        cert.validate(p)?;
        Ok(cert)
    }

    /// Checks every invariant of a certificate against `p`.
    pub fn validate(&self, p: &SupportPattern) -> Result<()> {
        let r = self.r;
        if self.groups.len() != r || self.phis.len() != r {
            return Err(Error::contract(format!(
                "certificate needs {r} groups and {r} SLMFs, found {} and {}",
                self.groups.len(),
                self.phis.len()
            )));
        }
        let mut seen = vec![false; p.n()];
        for g in &self.groups {
            for &j in g {
                if j >= p.n() || std::mem::replace(&mut seen[j], true) {
                    return Err(Error::contract(format!(
                        "column {} is out of range or in two groups",
                        j + 1
                    )));
                }
            }
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(Error::contract(format!("column {} is in no group", j + 1)));
        }
        for (g, phi) in self.groups.iter().zip(&self.phis) {
            let params = RelaxedParams::new(1, r).on_columns(g.clone());
            if let Some(witness) = is_relaxed_slmf(p, &params)? {
                return Err(Error::NotRelaxed { witness });
            }
            if phi.r() != r || phi.m() != p.m() {
                return Err(Error::contract("SLMF has the wrong shape"));
            }
            if let Some(js) = slmf::is_slmf(phi)? {
                return Err(Error::contract(format!(
                    "group SLMF violates the union condition on columns {:?}",
                    js.iter().map(|j| j + 1).collect::<Vec<_>>()
                )));
            }
            for &c in phi.columns() {
                if !g.iter().any(|&j| c & !p.column(j) == 0) {
                    return Err(Error::contract(format!(
                        "SLMF column {:?} is not inside any column of its group",
                        bits::to_one_based(c)
                    )));
                }
            }
        }
        if self.same_phi != same_phi(&self.phis) {
            return Err(Error::contract("same_phi flag does not match the SLMFs"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = CertificateJson {
            r: self.r,
            groups: self
                .groups
                .iter()
                .map(|g| g.iter().map(|j| j + 1).collect())
                .collect(),
            phis: self
                .phis
                .iter()
                .map(|phi| phi.pattern().to_indicator_rows())
                .collect(),
            same_phi: self.same_phi,
        };
        serde_json::to_value(doc).expect("certificate serializes")
    }

    /// Parses the JSON form. The result is not validated against a pattern.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CertificateJson = serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("certificate line {}", e.line()), e.to_string()))?;
        let groups = doc
            .groups
            .iter()
            .enumerate()
            .map(|(g, js)| {
                js.iter()
                    .enumerate()
                    .map(|(k, &j)| {
                        j.checked_sub(1)
                            .ok_or_else(|| Error::parse(format!("groups[{g}][{k}]"), "indices are 1-based"))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let phis = doc
            .phis
            .iter()
            .enumerate()
            .map(|(k, rows)| {
                SupportPattern::from_indicator(rows)
                    .and_then(|p| Slmf::new(doc.r, p))
                    .map_err(|e| Error::parse(format!("phis[{k}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PartitionCertificate {
            r: doc.r,
            groups,
            phis,
            same_phi: doc.same_phi,
        })
    }
}

/// The matroid on the columns whose rank is the Dilworth truncation of
/// `f(J) = #(U_{j in J} omega_j) - r`, `f(∅) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct TruncationMatroid<'a> {
    pattern: &'a SupportPattern,
    r: usize,
    ceiling: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Packing {
    /// `r` disjoint bases (0-based columns), together covering `[n]`.
    Bases(Vec<Vec<usize>>),
    /// A 0-based column set `J` with `#J < r(m - r) - r * rank([n] \ J)`.
    Obstruction(Vec<usize>),
}

impl<'a> TruncationMatroid<'a> {
    pub fn new(pattern: &'a SupportPattern, r: usize) -> Self {
        TruncationMatroid {
            pattern,
            r,
            ceiling: DILWORTH_CEILING,
        }
    }

    pub fn with_ceiling(mut self, ceiling: usize) -> Self {
        self.ceiling = ceiling;
        self
    }

    pub fn ground_size(&self) -> usize {
        self.pattern.n()
    }

    /// `f(J)` on a 0-based column mask.
    pub fn f(&self, cols: Mask) -> i64 {
        if cols == 0 {
            return 0;
        }
        bits::card(self.pattern.union_of(bits::members(cols))) as i64 - self.r as i64
    }

    fn check_ceiling(&self, cols: Mask) -> Result<()> {
        if bits::card(cols) > self.ceiling {
            return Err(Error::Capacity {
                what: "#J",
                value: bits::card(cols),
                ceiling: self.ceiling,
            });
        }
        if cols >> self.pattern.n() != 0 {
            return Err(Error::contract("column subset out of range"));
        }
        Ok(())
    }

    /// Truncated rank of every subset of `cols`, indexed by the compressed
    /// position of the subset inside `cols`.
    fn truncation_table(&self, cols: Mask) -> Vec<i64> {
        let members = bits::members(cols);
        let k = members.len();
        let expand = |s: usize| -> Mask {
            (0..k)
                .filter(|&b| s >> b & 1 == 1)
                .fold(0, |acc, b| acc | 1u64 << members[b])
        };
        let f: Vec<i64> = (0..1usize << k).map(|s| self.f(expand(s))).collect();
        let mut hat = vec![0i64; 1 << k];
        for s in 1usize..1 << k {
            let low = s & s.wrapping_neg();
            let rest = s ^ low;
            // parts containing the lowest element: low | sub for sub ⊆ rest
            let mut best = i64::MAX;
            let mut sub = rest;
            loop {
                let part = low | sub;
                best = best.min(f[part] + hat[s ^ part]);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            hat[s] = best;
        }
        hat
    }

    /// `f̂(J) = min` over set partitions of `J` of the summed `f` values.
    pub fn dilworth_rank(&self, cols: Mask) -> Result<i64> {
        self.check_ceiling(cols)?;
        let table = self.truncation_table(cols);
        Ok(table[table.len() - 1])
    }

    /// `#J' <= f(J')` for every nonempty `J' ⊆ J`.
    pub fn truncation_independent(&self, cols: Mask) -> Result<bool> {
        self.check_ceiling(cols)?;
        Ok(self.independent_unchecked(cols))
    }

    fn independent_unchecked(&self, cols: Mask) -> bool {
        bits::submasks(cols)
            .filter(|&s| s != 0)
            .all(|s| bits::card(s) as i64 <= self.f(s))
    }

    /// Packs `r` disjoint bases by matroid partitioning (shortest augmenting
    /// paths in the exchange graph). When this fails, every `J ⊆ [n]` is
    /// scanned for the packing inequality and the first violator (fewest
    /// columns, then lexicographic) is returned.
    pub fn pack_bases(&self) -> Result<Packing> {
        let (p, r) = (self.pattern, self.r);
        let (m, n) = (p.m(), p.n());
        if r == 0 || r >= m {
            return Err(Error::contract(format!("need 1 <= r < m, got r = {r}, m = {m}")));
        }
        if let Some(j) = p.columns().iter().position(|&c| bits::card(c) != r + 1) {
            return Err(Error::contract(format!(
                "column {} has {} rows; packing needs every column of size r + 1 = {}",
                j + 1,
                bits::card(p.column(j)),
                r + 1
            )));
        }
        if n != r * (m - r) {
            return Err(Error::contract(format!(
                "packing needs n = r(m - r) = {}, found {n}",
                r * (m - r)
            )));
        }
        if n > PACKING_CEILING {
            return Err(Error::Capacity {
                what: "n",
                value: n,
                ceiling: PACKING_CEILING,
            });
        }
        let mut sets: Vec<Mask> = vec![0; r];
        let mut home: Vec<Option<usize>> = vec![None; n];
        let mut stuck = false;
        for x in 0..n {
            if !self.insert(x, &mut sets, &mut home) {
                stuck = true;
                break;
            }
        }
        if !stuck && sets.iter().all(|&s| bits::card(s) == m - r) {
            return Ok(Packing::Bases(sets.into_iter().map(bits::members).collect()));
        }
        let table = self.truncation_table(bits::full(n));
        let target = (r * (m - r)) as i64;
        let all = bits::full(n);
        for size in 0..=n {
            for js in bits::k_subsets(n, size) {
                if (size as i64) < target - r as i64 * table[(all ^ js) as usize] {
                    return Ok(Packing::Obstruction(bits::members(js)));
                }
            }
        }
        Err(Error::contract(
            "packing failed but no obstruction exists; the truncation is not a matroid rank here",
        ))
    }

    /// Augments the partial packing with element `x`.
    fn insert(&self, x: usize, sets: &mut [Mask], home: &mut [Option<usize>]) -> bool {
        let n = home.len();
        // parent[z] = (y, k): y enters set k, evicting z
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut visited = vec![false; n];
        visited[x] = true;
        let mut queue = VecDeque::from([x]);
        while let Some(y) = queue.pop_front() {
            for k in 0..sets.len() {
                if home[y] == Some(k) {
                    continue;
                }
                let grown = sets[k] | 1u64 << y;
                if self.independent_unchecked(grown) {
                    // walk back along the path, applying each move
                    let (mut cur, mut target) = (y, k);
                    loop {
                        if let Some(old) = home[cur] {
                            sets[old] &= !(1u64 << cur);
                        }
                        sets[target] |= 1u64 << cur;
                        home[cur] = Some(target);
                        match parent[cur] {
                            Some((prev, prev_target)) => {
                                cur = prev;
                                target = prev_target;
                            }
                            None => return true,
                        }
                    }
                }
                for z in bits::members(sets[k]) {
                    if visited[z] {
                        continue;
                    }
                    let swapped = (sets[k] & !(1u64 << z)) | 1u64 << y;
                    if self.independent_unchecked(swapped) {
                        visited[z] = true;
                        parent[z] = Some((y, k));
                        queue.push_back(z);
                    }
                }
            }
        }
        false
    }
}

#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    /// Keep searching for a certificate whose groups all induce the same
    /// SLMF; fall back to the first certificate found.
    pub prefer_same_phi: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found {
        certificate: PartitionCertificate,
        nodes: u64,
        warnings: Vec<String>,
    },
    /// The whole search tree was explored without success.
    Exhausted {
        nodes: u64,
        reason: String,
        warnings: Vec<String>,
    },
}

impl SearchOutcome {
    pub fn certificate(&self) -> Option<&PartitionCertificate> {
        match self {
            SearchOutcome::Found { certificate, .. } => Some(certificate),
            SearchOutcome::Exhausted { .. } => None,
        }
    }
}

struct Search<'a> {
    p: &'a SupportPattern,
    r: usize,
    order: Vec<usize>,
    groups: Vec<Vec<usize>>,
    excess: Vec<usize>,
    nodes: u64,
    prefer_same_phi: bool,
    first: Option<PartitionCertificate>,
    found: Option<PartitionCertificate>,
}

impl Search<'_> {
    fn column_excess(&self, j: usize) -> usize {
        bits::card(self.p.column(j)).saturating_sub(self.r)
    }

    /// The relaxed inequalities for one group. Only row sets inside the
    /// group's union can bind.
    fn group_feasible(&self, g: usize) -> bool {
        let r = self.r;
        let cols: Vec<Mask> = self.groups[g].iter().map(|&j| self.p.column(j)).collect();
        let union = cols.iter().fold(0, |a, &c| a | c);
        bits::submasks(union).all(|rows| {
            let k = bits::card(rows);
            if k <= r {
                return true;
            }
            let lhs: usize = cols.iter().map(|&c| bits::card(c & rows).saturating_sub(r)).sum();
            lhs <= k - r
        })
    }

    fn run(&mut self, depth: usize) -> bool {
        self.nodes += 1;
        if depth == self.order.len() {
            let cert = PartitionCertificate::from_groups(self.p, self.r, self.groups.clone())
                .expect("search leaves satisfy the certificate invariants");
            if !self.prefer_same_phi || cert.same_phi {
                self.found = Some(cert);
                return true;
            }
            if self.first.is_none() {
                self.first = Some(cert);
            }
            return false;
        }
        let j = self.order[depth];
        let cap = self.p.m() - self.r;
        let used = self.groups.iter().filter(|g| !g.is_empty()).count();
        let e = self.column_excess(j);
        for g in 0..self.r.min(used + 1) {
            if self.excess[g] + e > cap {
                continue;
            }
            self.groups[g].push(j);
            self.excess[g] += e;
            if self.group_feasible(g) && self.run(depth + 1) {
                return true;
            }
            self.excess[g] -= e;
            self.groups[g].pop();
        }
        false
    }
}

/// Exhaustive backtracking over column-to-group assignments.
///
/// Columns are visited by decreasing size (ties by index); a new group is
/// only opened as the lowest-numbered empty one, so each unordered
/// partition is visited once. A partial group is pruned as soon as it
/// violates a relaxed `(1, r, m)` inequality, which only gets harder as
/// columns are added.
pub fn partition_search(p: &SupportPattern, r: usize, opts: &SearchOptions) -> Result<SearchOutcome> {
    let m = p.m();
    if m > slmf::DEFAULT_ROW_CEILING {
        return Err(Error::Capacity {
            what: "m",
            value: m,
            ceiling: slmf::DEFAULT_ROW_CEILING,
        });
    }
    if r == 0 || r >= m {
        return Err(Error::contract(format!("need 1 <= r < m, got r = {r}, m = {m}")));
    }
    let mut warnings = Vec::new();
    if p.size() != p.base_size(r) {
        warnings.push(format!(
            "size {} differs from r(m + n - r) = {}",
            p.size(),
            p.base_size(r)
        ));
    }
    let total: usize = p.columns().iter().map(|&c| bits::card(c).saturating_sub(r)).sum();
    if total != r * (m - r) {
        return Ok(SearchOutcome::Exhausted {
            nodes: 0,
            reason: format!(
                "total column excess {total} differs from r(m - r) = {}",
                r * (m - r)
            ),
            warnings,
        });
    }
    let mut order: Vec<usize> = (0..p.n()).collect();
    order.sort_by_key(|&j| std::cmp::Reverse(bits::card(p.column(j))));
    let mut search = Search {
        p,
        r,
        order,
        groups: vec![Vec::new(); r],
        excess: vec![0; r],
        nodes: 0,
        prefer_same_phi: opts.prefer_same_phi,
        first: None,
        found: None,
    };
    search.run(0);
    let nodes = search.nodes;
    match search.found.or(search.first) {
        Some(certificate) => Ok(SearchOutcome::Found {
            certificate,
            nodes,
            warnings,
        }),
        None => Ok(SearchOutcome::Exhausted {
            nodes,
            reason: format!("no partition into {r} relaxed (1,{r},{m})-SLMFs exists"),
            warnings,
        }),
    }
}

fn require_relaxed_rrm(p: &SupportPattern, r: usize) -> Result<()> {
    if let Some(witness) = is_relaxed_slmf(p, &RelaxedParams::new(r, r))? {
        return Err(Error::NotRelaxed { witness });
    }
    Ok(())
}

/// Direct construction for `r = m - 2` when every column has `m - 1` or
/// `m` rows: full columns become singleton groups, the remaining columns are
/// sorted so equal supports are adjacent and dealt round-robin into the
/// other groups.
pub fn partition_r_eq_m_minus_2(p: &SupportPattern) -> Result<PartitionCertificate> {
    let (m, n) = (p.m(), p.n());
    if m < 3 {
        return Err(Error::contract("r = m - 2 needs m >= 3"));
    }
    let r = m - 2;
    require_relaxed_rrm(p, r)?;
    let full = bits::full(m);
    if let Some(j) = p.columns().iter().position(|&c| bits::card(c) + 1 < m) {
        return Err(Error::contract(format!(
            "column {} has fewer than m - 1 = {} rows",
            j + 1,
            m - 1
        )));
    }
    let full_cols: Vec<usize> = (0..n).filter(|&j| p.column(j) == full).collect();
    let alpha = full_cols.len();
    if n + alpha != 2 * m - 4 {
        return Err(Error::contract(format!(
            "expected n = 2m - 4 - alpha = {}, found n = {n}",
            (2 * m - 4).saturating_sub(alpha)
        )));
    }
    if alpha >= r {
        return Err(Error::contract("too many full columns for r = m - 2"));
    }
    let cells = r - alpha;
    let mut rest: Vec<usize> = (0..n).filter(|&j| p.column(j) != full).collect();
    rest.sort_by_key(|&j| (p.column(j), j));
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); cells];
    for (pos, &j) in rest.iter().enumerate() {
        groups[pos % cells].push(j);
    }
    groups.extend(full_cols.into_iter().map(|j| vec![j]));
    PartitionCertificate::from_groups(p, r, groups)
}

/// Direct construction for `r = m - 1`: every column is `[m]`, `n = r`, and
/// each column is its own group.
pub fn partition_r_eq_m_minus_1(p: &SupportPattern) -> Result<PartitionCertificate> {
    let (m, n) = (p.m(), p.n());
    if m < 2 {
        return Err(Error::contract("r = m - 1 needs m >= 2"));
    }
    let r = m - 1;
    require_relaxed_rrm(p, r)?;
    if p.columns().iter().any(|&c| c != bits::full(m)) {
        return Err(Error::contract("r = m - 1 needs every column equal to [m]"));
    }
    if n != r {
        return Err(Error::contract(format!("expected n = m - 1 = {r}, found {n}")));
    }
    PartitionCertificate::from_groups(p, r, (0..n).map(|j| vec![j]).collect())
}
