use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use slmf_core::bits::{self, Mask};
use slmf_core::completion::{complete_matrix, project};
use slmf_core::field::Zero;
use slmf_core::grassmann::{section_form, sparse_perp, PluckerVector};
use slmf_core::partition::{partition_search, Packing, SearchOptions, TruncationMatroid};
use slmf_core::rng::{substream, Stream};
use slmf_core::slmf::{is_relaxed_slmf, is_slmf, is_slmf_via_matching};
use slmf_core::{fixtures, Field, Format, Gf, GfMatrix, RelaxedParams, Slmf, SupportPattern};

fn pattern_strategy(max_m: usize, max_n: usize) -> impl Strategy<Value = SupportPattern> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| {
        prop::collection::vec(0u64..(1 << m), n)
            .prop_map(move |cols| SupportPattern::from_masks(m, cols).unwrap())
    })
}

/// `n` random columns, each an `(r + 1)`-subset of `[m]`.
fn random_uniform_columns<R: Rng>(rng: &mut R, m: usize, n: usize, r: usize) -> SupportPattern {
    let subsets: Vec<Mask> = bits::k_subsets(m, r + 1).collect();
    let cols = (0..n).map(|_| *subsets.choose(rng).unwrap()).collect();
    SupportPattern::from_masks(m, cols).unwrap()
}

fn random_slmf_shape<R: Rng>(rng: &mut R, r: usize, m: usize) -> Slmf {
    Slmf::new(r, random_uniform_columns(rng, m, m - r, r)).unwrap()
}

/// Rejection-samples a relaxed `(r, r, m)`-SLMF with `r(m - r)` columns of
/// size `r + 1`.
fn random_relaxed_uniform<R: Rng>(rng: &mut R, r: usize, m: usize) -> SupportPattern {
    loop {
        let p = random_uniform_columns(rng, m, r * (m - r), r);
        if is_relaxed_slmf(&p, &RelaxedParams::new(r, r)).unwrap().is_none() {
            return p;
        }
    }
}

proptest! {
    #[test]
    fn indicator_and_json_round_trip(p in pattern_strategy(7, 7)) {
        for format in [Format::Indicator, Format::Json] {
            prop_assert_eq!(SupportPattern::parse(&p.emit(format)).unwrap(), p.clone());
        }
    }

    #[test]
    fn reduce_is_replayable_and_idempotent(p in pattern_strategy(7, 7), r in 1usize..3) {
        let (q, log) = p.reduce(r).unwrap();
        prop_assert_eq!(p.replay(&log).unwrap(), q.clone());
        let (q2, log2) = q.reduce(r).unwrap();
        prop_assert_eq!(q2, q.clone());
        prop_assert!(log2.is_empty());
        prop_assert_eq!(
            p.size() as i64 - p.base_size(r) as i64,
            q.size() as i64 - q.base_size(r) as i64
        );
    }

    #[test]
    fn two_slmf_checkers_agree(seed in any::<u64>(), r in 1usize..4, extra in 1usize..4) {
        let mut rng = substream(seed, Stream::Sampling, 0);
        let phi = random_slmf_shape(&mut rng, r, r + extra + 1);
        prop_assert_eq!(is_slmf(&phi).unwrap().is_none(), is_slmf_via_matching(&phi).unwrap());
    }
}

#[test]
fn slmf_matches_relaxed_with_unit_multiplicity() {
    let mut rng = substream(11, Stream::Sampling, 1);
    for (r, m) in [(1, 5), (2, 6), (3, 7)] {
        for _ in 0..200 {
            let phi = random_slmf_shape(&mut rng, r, m);
            let relaxed = is_relaxed_slmf(phi.pattern(), &RelaxedParams::new(1, r)).unwrap();
            assert_eq!(is_slmf(&phi).unwrap().is_none(), relaxed.is_none(), "{phi:?}");
        }
    }
}

#[test]
fn truncation_is_intersection_submodular() {
    let mut rng = substream(2, Stream::Sampling, 0);
    for _ in 0..20 {
        let p = random_uniform_columns(&mut rng, 6, 6, 2);
        let mat = TruncationMatroid::new(&p, 2);
        for a in 1..1u64 << 6 {
            for b in 1..1u64 << 6 {
                if a & b != 0 {
                    assert!(mat.f(a) + mat.f(b) >= mat.f(a | b) + mat.f(a & b));
                }
            }
        }
    }
}

#[test]
fn dilworth_rank_is_a_matroid_rank() {
    let mut rng = substream(3, Stream::Sampling, 0);
    for _ in 0..10 {
        let p = random_relaxed_uniform(&mut rng, 2, 5);
        let mat = TruncationMatroid::new(&p, 2);
        let n = p.n();
        let rank: Vec<i64> = (0..1u64 << n).map(|s| mat.dilworth_rank(s).unwrap()).collect();
        for a in 0..1usize << n {
            for j in 0..n {
                let b = a | 1 << j;
                assert!(rank[a] <= rank[b] && rank[b] <= rank[a] + 1);
            }
            for b in 0..1usize << n {
                assert!(rank[a] + rank[b] >= rank[a | b] + rank[a & b]);
            }
        }
    }
}

#[test]
fn independence_definitions_agree() {
    let mut rng = substream(4, Stream::Sampling, 0);
    for _ in 0..20 {
        let p = random_uniform_columns(&mut rng, 6, 8, 2);
        let mat = TruncationMatroid::new(&p, 2);
        for s in 0..1u64 << 8 {
            assert_eq!(
                mat.truncation_independent(s).unwrap(),
                mat.dilworth_rank(s).unwrap() == bits::card(s) as i64
            );
        }
    }
}

#[test]
fn matroid_bases_are_relaxed_unit_groups() {
    let mut rng = substream(5, Stream::Sampling, 0);
    for (r, m) in [(2, 5), (2, 6)] {
        for _ in 0..5 {
            let p = random_relaxed_uniform(&mut rng, r, m);
            let mat = TruncationMatroid::new(&p, r);
            assert_eq!(p.union_of(0..p.n()), bits::full(m));
            for s in bits::k_subsets(p.n(), m - r) {
                let members = bits::members(s);
                let base = mat.truncation_independent(s).unwrap();
                let relaxed = is_relaxed_slmf(&p, &RelaxedParams::new(1, r).on_columns(members))
                    .unwrap()
                    .is_none();
                assert_eq!(base, relaxed);
            }
        }
    }
}

#[test]
fn packing_implies_partition() {
    let mut rng = substream(6, Stream::Sampling, 0);
    for _ in 0..20 {
        let p = random_relaxed_uniform(&mut rng, 2, 5);
        let Packing::Bases(bases) = TruncationMatroid::new(&p, 2).pack_bases().unwrap() else {
            panic!("relaxed pattern must pack");
        };
        for b in &bases {
            let params = RelaxedParams::new(1, 2).on_columns(b.clone());
            assert!(is_relaxed_slmf(&p, &params).unwrap().is_none());
        }
        let out = partition_search(&p, 2, &SearchOptions::default()).unwrap();
        assert!(out.certificate().is_some());
    }
}

fn random_basis(m: usize, r: usize, seed: u64) -> GfMatrix {
    let mut rng = substream(seed, Stream::Subspace, 0);
    loop {
        let b = GfMatrix::random(m, r, &mut rng);
        if b.rank() == r {
            return b;
        }
    }
}

#[test]
fn sections_on_every_slmf_column_force_membership() {
    let phi = fixtures::slmf_r2_m6();
    for seed in 0..20 {
        let b = random_basis(6, 2, seed);
        let pl = PluckerVector::from_basis(&b).unwrap();
        let perp = sparse_perp(&phi, &pl).unwrap();
        // x in the kernel of all section forms is in S
        let forms = GfMatrix::from_columns(6, &(0..4).map(|j| perp.matrix.column(j)).collect::<Vec<_>>());
        for x in forms.transpose().kernel() {
            assert!(phi.columns().iter().all(|&c| section_form(&x, c, &pl).is_zero()));
            let aug = GfMatrix::from_fn(6, 3, |i, j| if j < 2 { b[(i, j)] } else { x[i] });
            assert_eq!(aug.rank(), 2);
        }
    }
}

#[test]
fn sparse_perp_depends_only_on_the_subspace() {
    let phi = fixtures::slmf_r2_m6();
    for seed in 0..10 {
        let b = random_basis(6, 2, seed);
        let g = random_basis(2, 2, seed + 100);
        let k1 = sparse_perp(&phi, &PluckerVector::from_basis(&b).unwrap()).unwrap();
        let k2 = sparse_perp(&phi, &PluckerVector::from_basis(&(&b * &g)).unwrap()).unwrap();
        let scale = g.determinant();
        for i in 0..6 {
            for j in 0..4 {
                assert_eq!(k1.matrix[(i, j)] * scale, k2.matrix[(i, j)]);
            }
        }
    }
}

#[test]
fn completion_ignores_column_scaling_of_the_factor() {
    let p = fixtures::two_group_base_6x5();
    let cert = partition_search(&p, 2, &SearchOptions::default())
        .unwrap()
        .certificate()
        .unwrap()
        .clone();
    let mut rng = substream(8, Stream::Completion, 0);
    let l = GfMatrix::random(6, 2, &mut rng);
    let rt = GfMatrix::random(2, 5, &mut rng);
    let c = Gf::sample(&mut rng);
    let mut l2 = l.clone();
    l2.scale_column(0, &c);
    let mut rt2 = rt.clone();
    for j in 0..5 {
        rt2[(0, j)] = rt2[(0, j)] * c.inv().unwrap();
    }
    let x = &l * &rt;
    assert_eq!(&l2 * &rt2, x);
    let y = complete_matrix(&p, &cert, &project(&x, &p)).unwrap();
    assert_eq!(y, x);
}
