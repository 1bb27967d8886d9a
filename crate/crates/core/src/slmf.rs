//! Linkage-matching-field supports and their relaxed counting condition.
//!
//! An `(r, m)`-SLMF is a pattern `Phi` with `m - r` columns of size `r + 1`
//! whose unions satisfy `#(U_{j in J} phi_j) >= #J + r`. The relaxed
//! `(nu, r, m)` condition generalises this to arbitrary column sizes:
//!
//! ```text
//! sum_j max(#(omega_j ∩ I) - r, 0) <= nu (#I - r)   for all #I >= r + 1,
//! ```
//!
//! with equality at `I = [m]`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{self, Mask};
use crate::error::{Error, Result};
use crate::matching;
use crate::pattern::SupportPattern;

/// Largest `m` accepted by the exhaustive `2^m` row-subset scan.
pub const DEFAULT_ROW_CEILING: usize = 24;

/// Row count above which the scan is split across rayon workers.
const PARALLEL_THRESHOLD: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaxedParams {
    pub nu: usize,
    pub r: usize,
    /// 0-based column subset `J`; `None` means all columns.
    pub restricted_to: Option<Vec<usize>>,
}

impl RelaxedParams {
    pub fn new(nu: usize, r: usize) -> Self {
        RelaxedParams {
            nu,
            r,
            restricted_to: None,
        }
    }

    pub fn on_columns(mut self, cols: Vec<usize>) -> Self {
        self.restricted_to = Some(cols);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    InequalityViolated,
    EqualityFailedAtFullSet,
}

/// A row set `I` on which the relaxed condition fails. `subset_i` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationWitness {
    #[serde(rename = "I")]
    pub subset_i: Vec<usize>,
    pub lhs: i64,
    pub rhs: i64,
    pub kind: WitnessKind,
}

impl fmt::Display for ViolationWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.kind {
            WitnessKind::InequalityViolated => ">",
            WitnessKind::EqualityFailedAtFullSet => "!=",
        };
        write!(f, "I = {:?}: {} {rel} {}", self.subset_i, self.lhs, self.rhs)
    }
}

fn excess(cols: &[Mask], rows: Mask, r: usize) -> i64 {
    cols.iter()
        .map(|&c| (bits::card(c & rows) as i64 - r as i64).max(0))
        .sum()
}

/// Picks the smaller witness: fewer rows first, then lexicographic.
fn better(a: Option<Mask>, b: Option<Mask>) -> Option<Mask> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            let (cx, cy) = (bits::card(x), bits::card(y));
            if cx < cy || (cx == cy && bits::lex_less(x, y)) {
                Some(x)
            } else {
                Some(y)
            }
        }
    }
}

fn scan_range(cols: &[Mask], r: usize, nu: usize, lo: Mask, hi: Mask) -> Option<Mask> {
    let mut best = None;
    for rows in lo..hi {
        let k = bits::card(rows);
        if k <= r {
            continue;
        }
        if let Some(b) = best {
            if k > bits::card(b) {
                continue;
            }
        }
        if excess(cols, rows, r) > (nu * (k - r)) as i64 {
            best = better(best, Some(rows));
        }
    }
    best
}

/// Smallest (then lex-least) row set violating the inequality part.
fn minimal_violation(cols: &[Mask], m: usize, r: usize, nu: usize) -> Option<Mask> {
    let total: Mask = 1u64 << m;
    if m < PARALLEL_THRESHOLD {
        return scan_range(cols, r, nu, 0, total);
    }
    let chunk_bits = m - 8;
    (0..(1u64 << 8))
        .into_par_iter()
        .map(|hi| scan_range(cols, r, nu, hi << chunk_bits, (hi + 1) << chunk_bits))
        .reduce(|| None, better)
}

fn check_rank_params(m: usize, r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::contract("rank r must be at least 1"));
    }
    if r >= m {
        return Err(Error::contract(format!("rank r = {r} must be below m = {m}")));
    }
    Ok(())
}

/// Decides the relaxed `(nu, r, m)`-SLMF condition on `Omega_J`.
///
/// Returns `None` when it holds, otherwise the minimal witness: the
/// smallest violating `I` (ties broken lexicographically), or `[m]` when
/// only the equality fails.
pub fn is_relaxed_slmf(p: &SupportPattern, params: &RelaxedParams) -> Result<Option<ViolationWitness>> {
    is_relaxed_slmf_with_ceiling(p, params, DEFAULT_ROW_CEILING)
}

pub fn is_relaxed_slmf_with_ceiling(
    p: &SupportPattern,
    params: &RelaxedParams,
    ceiling: usize,
) -> Result<Option<ViolationWitness>> {
    let m = p.m();
    let RelaxedParams { nu, r, .. } = *params;
    if m > ceiling {
        return Err(Error::Capacity {
            what: "m",
            value: m,
            ceiling,
        });
    }
    check_rank_params(m, r)?;
    if nu == 0 || nu > r {
        return Err(Error::contract(format!("nu = {nu} must lie in 1..={r}")));
    }
    let cols: Vec<Mask> = match &params.restricted_to {
        None => p.columns().to_vec(),
        Some(js) => {
            if let Some(&bad) = js.iter().find(|&&j| j >= p.n()) {
                return Err(Error::contract(format!("column {} out of range", bad + 1)));
            }
            js.iter().map(|&j| p.column(j)).collect()
        }
    };
    if let Some(rows) = minimal_violation(&cols, m, r, nu) {
        return Ok(Some(ViolationWitness {
            subset_i: bits::to_one_based(rows),
            lhs: excess(&cols, rows, r),
            rhs: (nu * (bits::card(rows) - r)) as i64,
            kind: WitnessKind::InequalityViolated,
        }));
    }
    let all = bits::full(m);
    let lhs = excess(&cols, all, r);
    let rhs = (nu * (m - r)) as i64;
    if lhs != rhs {
        return Ok(Some(ViolationWitness {
            subset_i: bits::to_one_based(all),
            lhs,
            rhs,
            kind: WitnessKind::EqualityFailedAtFullSet,
        }));
    }
    Ok(None)
}

/// A pattern with `m - r` columns, each of size exactly `r + 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Slmf {
    r: usize,
    base: SupportPattern,
}

impl Slmf {
    pub fn new(r: usize, base: SupportPattern) -> Result<Self> {
        let m = base.m();
        check_rank_params(m, r)?;
        if base.n() != m - r {
            return Err(Error::contract(format!(
                "an ({r},{m}) SLMF needs {} columns, found {}",
                m - r,
                base.n()
            )));
        }
        if let Some(j) = base.columns().iter().position(|&c| bits::card(c) != r + 1) {
            return Err(Error::contract(format!(
                "column {} has size {}, expected {}",
                j + 1,
                bits::card(base.column(j)),
                r + 1
            )));
        }
        Ok(Slmf { r, base })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn m(&self) -> usize {
        self.base.m()
    }

    pub fn pattern(&self) -> &SupportPattern {
        &self.base
    }

    pub fn columns(&self) -> &[Mask] {
        self.base.columns()
    }

    /// Column supports as a sorted multiset, for order-free comparison.
    pub fn column_set(&self) -> Vec<Mask> {
        let mut c = self.base.columns().to_vec();
        c.sort_unstable();
        c
    }
}

impl fmt::Debug for Slmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Slmf(r={}, {:?})", self.r, self.base)
    }
}

/// Decides the union condition directly over all column subsets.
/// Returns the smallest (then lex-least) violating 0-based `J`, or `None`.
pub fn is_slmf(phi: &Slmf) -> Result<Option<Vec<usize>>> {
    let k = phi.columns().len();
    if k > DEFAULT_ROW_CEILING {
        return Err(Error::Capacity {
            what: "m - r",
            value: k,
            ceiling: DEFAULT_ROW_CEILING,
        });
    }
    for size in 1..=k {
        for js in bits::k_subsets(k, size) {
            let union = bits::card(phi.pattern().union_of(bits::members(js)));
            if union < size + phi.r() {
                return Ok(Some(bits::members(js)));
            }
        }
    }
    Ok(None)
}

/// Hall form: for every `I` with `#I = m - r` the columns admit a system of
/// distinct representatives inside `I`.
pub fn is_slmf_via_matching(phi: &Slmf) -> Result<bool> {
    let m = phi.m();
    if m > DEFAULT_ROW_CEILING {
        return Err(Error::Capacity {
            what: "m",
            value: m,
            ceiling: DEFAULT_ROW_CEILING,
        });
    }
    let cols = phi.columns();
    Ok(bits::k_subsets(m, m - phi.r()).all(|rows| matching::has_sdr(cols, rows)))
}

/// An SLMF built from a group of pattern columns, with provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedSlmf {
    pub phi: Slmf,
    /// For each SLMF column, the 0-based pattern column it was cut from.
    pub sources: Vec<usize>,
}

/// Cuts an `(r, m)`-SLMF out of a relaxed `(1, r, m)`-SLMF group.
///
/// For each column `j` with `#omega_j > r`, `psi_j` is its `r` smallest rows
/// and the emitted columns are `psi_j ∪ {t}` for `t` in `omega_j \ psi_j`,
/// ascending; columns come out ordered by `(j, t)`.
pub fn induce_slmf(p: &SupportPattern, group: &[usize], r: usize) -> Result<InducedSlmf> {
    let params = RelaxedParams::new(1, r).on_columns(group.to_vec());
    if let Some(witness) = is_relaxed_slmf(p, &params)? {
        return Err(Error::NotRelaxed { witness });
    }
    let mut columns = Vec::new();
    let mut sources = Vec::new();
    for &j in group {
        let rows = bits::members(p.column(j));
        if rows.len() <= r {
            continue;
        }
        let psi = bits::from_zero_based(rows[..r].iter().copied());
        for &t in &rows[r..] {
            columns.push(psi | 1u64 << t);
            sources.push(j);
        }
    }
    let phi = Slmf::new(r, SupportPattern::from_masks(p.m(), columns)?)?;
    Ok(InducedSlmf { phi, sources })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn pattern(m: usize, cols: &[&[usize]]) -> SupportPattern {
        let cols: Vec<Vec<usize>> = cols.iter().map(|c| c.to_vec()).collect();
        SupportPattern::from_columns(m, &cols).unwrap()
    }

    #[test]
    fn degree_gap_pair_is_relaxed() {
        let p = fixtures::degree_gap_6x5();
        assert_eq!(is_relaxed_slmf(&p, &RelaxedParams::new(2, 2)).unwrap(), None);
        let q = fixtures::degree_gap_5x5();
        assert_eq!(is_relaxed_slmf(&q, &RelaxedParams::new(2, 2)).unwrap(), None);
    }

    #[test]
    fn full_columns_equality_case() {
        // [m] x [r] with nu = r: equality n(m-r) = r(m-r) at I = [m]
        let p = SupportPattern::full(5, 2).unwrap();
        assert_eq!(is_relaxed_slmf(&p, &RelaxedParams::new(2, 2)).unwrap(), None);
        let p = SupportPattern::full(5, 3).unwrap();
        let w = is_relaxed_slmf(&p, &RelaxedParams::new(2, 2)).unwrap().unwrap();
        assert_eq!(w.kind, WitnessKind::InequalityViolated);
        assert_eq!(w.subset_i, vec![1, 2, 3]);
        assert_eq!((w.lhs, w.rhs), (3, 2));
    }

    #[test]
    fn equality_failure_is_reported_at_full_set() {
        let p = pattern(4, &[&[1, 2]]);
        let w = is_relaxed_slmf(&p, &RelaxedParams::new(1, 1)).unwrap().unwrap();
        assert_eq!(w.kind, WitnessKind::EqualityFailedAtFullSet);
        assert_eq!(w.subset_i, vec![1, 2, 3, 4]);
        assert_eq!((w.lhs, w.rhs), (1, 3));
    }

    #[test]
    fn adding_an_isolated_row_breaks_equality() {
        let p = fixtures::degree_gap_5x5();
        let wider = SupportPattern::from_masks(6, p.columns().to_vec()).unwrap();
        let w = is_relaxed_slmf(&wider, &RelaxedParams::new(2, 2))
            .unwrap()
            .unwrap();
        assert_eq!(w.kind, WitnessKind::EqualityFailedAtFullSet);
    }

    #[test]
    fn parameter_contracts() {
        let p = fixtures::degree_gap_5x5();
        assert!(matches!(
            is_relaxed_slmf(&p, &RelaxedParams::new(3, 2)),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            is_relaxed_slmf(&p, &RelaxedParams::new(1, 5)),
            Err(Error::Contract(_))
        ));
        let wide = SupportPattern::full(25, 1).unwrap();
        assert!(matches!(
            is_relaxed_slmf(&wide, &RelaxedParams::new(1, 1)),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn witness_json_shape() {
        let w = ViolationWitness {
            subset_i: vec![1, 3],
            lhs: 2,
            rhs: 1,
            kind: WitnessKind::InequalityViolated,
        };
        assert_eq!(
            serde_json::to_string(&w).unwrap(),
            r#"{"I":[1,3],"lhs":2,"rhs":1,"kind":"inequality_violated"}"#
        );
    }

    #[test]
    fn printed_slmf_passes_both_checkers() {
        let phi = fixtures::slmf_r2_m6();
        assert_eq!(is_slmf(&phi).unwrap(), None);
        assert!(is_slmf_via_matching(&phi).unwrap());
    }

    #[test]
    fn repeated_pair_is_not_an_slmf() {
        let phi = Slmf::new(1, pattern(3, &[&[1, 2], &[1, 2]])).unwrap();
        assert_eq!(is_slmf(&phi).unwrap(), Some(vec![0, 1]));
        assert!(!is_slmf_via_matching(&phi).unwrap());
    }

    #[test]
    fn identical_columns_have_no_sdr() {
        let phi = Slmf::new(2, pattern(5, &[&[1, 2, 3], &[1, 2, 3], &[1, 2, 3]])).unwrap();
        assert!(!is_slmf_via_matching(&phi).unwrap());
    }

    #[test]
    fn slmf_shape_is_enforced() {
        assert!(Slmf::new(2, pattern(5, &[&[1, 2, 3], &[1, 2]])).is_err());
        assert!(Slmf::new(2, pattern(5, &[&[1, 2, 3], &[1, 2, 4]])).is_err());
    }

    #[test]
    fn induce_on_degree_gap_groups() {
        let p = fixtures::degree_gap_5x5();
        let ind = induce_slmf(&p, &[0, 2, 3], 2).unwrap();
        assert_eq!(is_slmf(&ind.phi).unwrap(), None);
        // tie-break: psi = two smallest rows, t ascending, (j, t) order
        let cols: Vec<Vec<usize>> = ind.phi.columns().iter().map(|&c| bits::to_one_based(c)).collect();
        assert_eq!(cols, vec![vec![1, 2, 3], vec![1, 2, 4], vec![3, 4, 5]]);
        assert_eq!(ind.sources, vec![0, 2, 3]);
    }

    #[test]
    fn induce_on_an_slmf_returns_it() {
        let phi = fixtures::slmf_r2_m6();
        let ind = induce_slmf(phi.pattern(), &[0, 1, 2, 3], 2).unwrap();
        assert_eq!(ind.phi, phi);
    }

    #[test]
    fn induce_rejects_non_relaxed_group() {
        let p = fixtures::degree_gap_5x5();
        assert!(matches!(
            induce_slmf(&p, &[3, 4], 2),
            Err(Error::NotRelaxed { .. })
        ));
    }
}
