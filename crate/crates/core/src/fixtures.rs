//! Small hand-checked patterns used by tests, the acceptance suite and the
//! CLI documentation.

use crate::pattern::SupportPattern;
use crate::slmf::Slmf;

fn from_rows(rows: &[&[u8]]) -> SupportPattern {
    let rows: Vec<Vec<u8>> = rows.iter().map(|r| r.to_vec()).collect();
    SupportPattern::from_indicator(&rows).expect("fixture is well formed")
}

/// A (2,6) linkage-matching-field support with columns
/// {2,4,6}, {1,2,4}, {1,2,5}, {1,3,5}.
pub fn slmf_r2_m6() -> Slmf {
    let p = SupportPattern::from_columns(6, &[vec![2, 4, 6], vec![1, 2, 4], vec![1, 2, 5], vec![1, 3, 5]])
        .expect("fixture is well formed");
    Slmf::new(2, p).expect("fixture has SLMF shape")
}

/// A 6x5 base for r = 2 of size 18 that splits as {1,2} | {3,4,5}.
pub fn two_group_base_6x5() -> SupportPattern {
    from_rows(&[
        &[1, 0, 0, 1, 1],
        &[1, 0, 1, 1, 0],
        &[1, 0, 0, 0, 1],
        &[1, 1, 1, 1, 0],
        &[1, 1, 0, 1, 1],
        &[0, 1, 0, 1, 0],
    ])
}

/// The two (2,6)-SLMFs printed alongside [`two_group_base_6x5`], one per group.
pub fn two_group_base_6x5_phis() -> [Slmf; 2] {
    let phi1 = from_rows(&[
        &[1, 1, 1, 0],
        &[1, 1, 1, 0],
        &[1, 0, 0, 0],
        &[0, 1, 0, 1],
        &[0, 0, 1, 1],
        &[0, 0, 0, 1],
    ]);
    let phi2 = from_rows(&[
        &[0, 1, 1, 1],
        &[1, 1, 1, 0],
        &[0, 0, 0, 1],
        &[1, 1, 0, 0],
        &[0, 0, 1, 1],
        &[1, 0, 0, 0],
    ]);
    [
        Slmf::new(2, phi1).expect("fixture has SLMF shape"),
        Slmf::new(2, phi2).expect("fixture has SLMF shape"),
    ]
}

/// A 6x8 base for r = 2 of size 24 whose generic fiber has several points.
pub fn multi_point_base_6x8() -> SupportPattern {
    from_rows(&[
        &[1, 0, 0, 1, 0, 1, 1, 1],
        &[1, 0, 1, 0, 1, 1, 0, 0],
        &[1, 0, 1, 0, 1, 0, 1, 0],
        &[0, 1, 1, 0, 0, 0, 0, 1],
        &[0, 1, 0, 1, 1, 0, 0, 0],
        &[0, 1, 0, 1, 0, 1, 1, 1],
    ])
}

/// A relaxed (2,2,6)-SLMF with a degree-2 row and no partition into two
/// relaxed (1,2,6)-SLMFs.
pub fn degree_gap_6x5() -> SupportPattern {
    from_rows(&[
        &[1, 1, 1, 0, 0],
        &[1, 0, 1, 0, 0],
        &[1, 1, 1, 0, 0],
        &[1, 0, 0, 1, 1],
        &[0, 1, 1, 1, 1],
        &[0, 1, 0, 1, 1],
    ])
}

/// [`degree_gap_6x5`] with its degree-2 row removed.
pub fn degree_gap_5x5() -> SupportPattern {
    from_rows(&[
        &[1, 1, 1, 0, 0],
        &[1, 1, 1, 0, 0],
        &[1, 0, 0, 1, 1],
        &[0, 1, 1, 1, 1],
        &[0, 1, 0, 1, 1],
    ])
}

/// The printed blocks of [`degree_gap_5x5`] on columns {1,3,4} and {2,5}.
pub fn degree_gap_5x5_blocks() -> [(Vec<usize>, SupportPattern); 2] {
    [
        (
            vec![1, 3, 4],
            from_rows(&[&[1, 1, 0], &[1, 1, 0], &[1, 0, 1], &[0, 1, 1], &[0, 0, 1]]),
        ),
        (
            vec![2, 5],
            from_rows(&[&[1, 0], &[1, 0], &[0, 1], &[1, 1], &[1, 1]]),
        ),
    ]
}
