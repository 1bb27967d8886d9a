//! Maximum bipartite matching between columns and rows (augmenting paths).

use crate::bits::{self, Mask};

/// Size of a maximum matching where left vertex `j` may be matched to any
/// row in `adj[j] & allowed`.
pub fn max_matching(adj: &[Mask], allowed: Mask) -> usize {
    let mut owner: [Option<usize>; 64] = [None; 64];
    let mut size = 0;
    for j in 0..adj.len() {
        let mut seen: Mask = 0;
        if augment(j, adj, allowed, &mut owner, &mut seen) {
            size += 1;
        }
    }
    size
}

/// `true` when every left vertex can be matched at once, i.e. the family
/// `{adj[j] & allowed}` has a system of distinct representatives.
pub fn has_sdr(adj: &[Mask], allowed: Mask) -> bool {
    max_matching(adj, allowed) == adj.len()
}

fn augment(j: usize, adj: &[Mask], allowed: Mask, owner: &mut [Option<usize>; 64], seen: &mut Mask) -> bool {
    for i in bits::members(adj[j] & allowed & !*seen) {
        *seen |= 1 << i;
        let free = match owner[i] {
            None => true,
            Some(k) => augment(k, adj, allowed, owner, seen),
        };
        if free {
            owner[i] = Some(j);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;

    /// Hall's condition checked directly over all subfamilies.
    fn hall(adj: &[Mask], allowed: Mask) -> bool {
        (1..=adj.len()).all(|k| {
            adj.iter()
                .combinations(k)
                .all(|fam| bits::card(fam.iter().fold(0, |a, &&c| a | c) & allowed) >= k)
        })
    }

    #[test]
    fn agrees_with_hall_on_small_families() {
        let cands: Vec<Mask> = (0u64..16).collect();
        for fam in cands.iter().copied().combinations_with_replacement(3) {
            assert_eq!(has_sdr(&fam, 0b1111), hall(&fam, 0b1111), "{fam:?}");
            assert_eq!(has_sdr(&fam, 0b0111), hall(&fam, 0b0111), "{fam:?}");
        }
    }

    #[test]
    fn needs_augmenting_path() {
        // greedy would give row 1 to column 1 and strand column 2
        let adj = [0b011, 0b001, 0b110];
        assert_eq!(max_matching(&adj, 0b111), 3);
    }
}
