//! Subsets of a small index set stored as `u64` bitmasks.
//!
//! Bit `k` stands for the 1-based index `k + 1`. Helpers here convert to and
//! from the sorted 1-based lists used by every external format.

pub type Mask = u64;

pub const MAX_BITS: usize = 64;

#[inline]
pub fn full(n: usize) -> Mask {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[inline]
pub fn card(mask: Mask) -> usize {
    mask.count_ones() as usize
}

#[inline]
pub fn contains(mask: Mask, idx0: usize) -> bool {
    mask >> idx0 & 1 == 1
}

/// Sorted 0-based members.
pub fn members(mask: Mask) -> Vec<usize> {
    let mut out = Vec::with_capacity(card(mask));
    let mut m = mask;
    while m != 0 {
        let k = m.trailing_zeros() as usize;
        out.push(k);
        m &= m - 1;
    }
    out
}

/// Sorted 1-based members.
pub fn to_one_based(mask: Mask) -> Vec<usize> {
    members(mask).into_iter().map(|k| k + 1).collect()
}

pub fn from_zero_based<I: IntoIterator<Item = usize>>(idx: I) -> Mask {
    idx.into_iter().fold(0, |acc, k| acc | 1u64 << k)
}

pub fn from_one_based<I: IntoIterator<Item = usize>>(idx: I) -> Mask {
    idx.into_iter().fold(0, |acc, k| acc | 1u64 << (k - 1))
}

/// `true` when `a` precedes `b` in lexicographic order of their sorted
/// member lists. Only meaningful for equal cardinalities.
#[inline]
pub fn lex_less(a: Mask, b: Mask) -> bool {
    let d = a ^ b;
    d != 0 && a & (d & d.wrapping_neg()) != 0
}

/// All submasks of `mask`, including 0 and `mask` itself.
pub fn submasks(mask: Mask) -> impl Iterator<Item = Mask> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// `k`-subsets of `{0..n}` in lexicographic order of member lists.
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = Mask> {
    use itertools::Itertools;
    (0..n).combinations(k).map(from_zero_based)
}

/// Position of `mask` (a `k`-subset of `{0..n}`) in the lexicographic
/// enumeration of [`k_subsets`].
pub fn lex_rank(mask: Mask, n: usize) -> usize {
    let k = card(mask);
    let mut rank = 0usize;
    let mut prev: isize = -1;
    for (pos, elem) in members(mask).into_iter().enumerate() {
        for skipped in (prev + 1) as usize..elem {
            rank += binomial(n - skipped - 1, k - pos - 1);
        }
        prev = elem as isize;
    }
    rank
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}
