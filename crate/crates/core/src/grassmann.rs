//! Plücker coordinates of `r`-subspaces of `k^m` and the sparse
//! orthogonal-complement basis attached to an SLMF.

use crate::bits::{self, Mask};
use crate::error::{Error, Result};
use crate::field::{sign, Field};
use crate::matrix::Matrix;
use crate::slmf::Slmf;

/// Plücker vector of an `r`-dimensional subspace `S ⊆ k^m`, one coordinate
/// per `r`-subset in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct PluckerVector<F> {
    r: usize,
    m: usize,
    coords: Vec<F>,
}

impl<F: Field> PluckerVector<F> {
    /// The `r`-minors of an `m x r` basis matrix.
    pub fn from_basis(b: &Matrix<F>) -> Result<Self> {
        let (m, r) = (b.rows(), b.cols());
        if m > bits::MAX_BITS {
            return Err(Error::Capacity {
                what: "m",
                value: m,
                ceiling: bits::MAX_BITS,
            });
        }
        if b.rank() != r {
            return Err(Error::contract(format!(
                "basis matrix has rank {} < r = {r}",
                b.rank()
            )));
        }
        let all: Vec<usize> = (0..r).collect();
        let coords = bits::k_subsets(m, r)
            .map(|psi| b.select(&bits::members(psi), &all).determinant())
            .collect();
        Ok(PluckerVector { r, m, coords })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coords(&self) -> &[F] {
        &self.coords
    }

    /// `[psi]` for a 0-based row mask of size `r`.
    pub fn get(&self, psi: Mask) -> F {
        assert_eq!(bits::card(psi), self.r, "Plücker index must have r elements");
        self.coords[bits::lex_rank(psi, self.m)].clone()
    }

    /// `[phi \ {i}]`, or zero when `i` is not in `phi`.
    fn minor_without(&self, phi: Mask, i: usize) -> F {
        if bits::contains(phi, i) {
            self.get(phi & !(1 << i))
        } else {
            F::zero()
        }
    }
}

/// `(-1)` raised to `#{(a, b) : a in psi, b in [m] \ psi, a > b}`.
pub fn dual_sign<F: Field>(psi: Mask, m: usize) -> F {
    let comp = bits::full(m) & !psi;
    let inversions: usize = bits::members(psi)
        .into_iter()
        .map(|a| bits::card(comp & bits::full(a)))
        .sum();
    sign(inversions)
}

/// `sum_alpha (-1)^(alpha - 1) x_{i_alpha} [phi \ {i_alpha}]` for an
/// `(r + 1)`-set `phi = {i_1 < ... < i_{r+1}}`. Vanishes exactly when
/// `pi_phi(x)` lies in `pi_phi(S)`, provided that projection is `r`-dimensional.
pub fn section_form<F: Field>(x: &[F], phi: Mask, pl: &PluckerVector<F>) -> F {
    assert_eq!(bits::card(phi), pl.r + 1, "section form needs an (r+1)-set");
    assert_eq!(x.len(), pl.m);
    bits::members(phi)
        .into_iter()
        .enumerate()
        .fold(F::zero(), |acc, (alpha, i)| {
            acc + sign::<F>(alpha) * x[i].clone() * pl.minor_without(phi, i)
        })
}

/// The signed maximal minors of `pi_phi(S)`: entry for `i in phi` is
/// `(-1)^(pos - 1) [phi \ {i}]`, the normal to `pi_phi(S)` inside `k^phi`.
pub fn section_normal<F: Field>(phi: Mask, pl: &PluckerVector<F>) -> Vec<F> {
    let mut col = vec![F::zero(); pl.m];
    for (pos, i) in bits::members(phi).into_iter().enumerate() {
        col[i] = sign::<F>(pos) * pl.get(phi & !(1 << i));
    }
    col
}

/// `p_Phi(S)`: determinant of the matrix with rows `alpha = 2, ..., m - r`,
/// columns `beta in [m] \ phi_1` (both ascending) and entries
/// `[phi_alpha \ {beta}]`, zero when `beta` is not in `phi_alpha`.
pub fn p_phi<F: Field>(phi: &Slmf, pl: &PluckerVector<F>) -> Result<F> {
    check_shapes(phi, pl)?;
    let cols = phi.columns();
    let betas = bits::members(bits::full(pl.m) & !cols[0]);
    let k = cols.len() - 1;
    let mat = Matrix::from_fn(k, k, |a, b| pl.minor_without(cols[a + 1], betas[b]));
    Ok(mat.determinant())
}

fn check_shapes<F>(phi: &Slmf, pl: &PluckerVector<F>) -> Result<()> {
    if phi.r() != pl.r || phi.m() != pl.m {
        return Err(Error::contract(format!(
            "SLMF is for (r, m) = ({}, {}), subspace is in Gr({}, {})",
            phi.r(),
            phi.m(),
            pl.r,
            pl.m
        )));
    }
    Ok(())
}

/// A basis of `S^⊥` supported on `Phi`, columns left unnormalized.
#[derive(Clone, PartialEq)]
pub struct SparsePerp<F> {
    pub phi: Slmf,
    pub matrix: Matrix<F>,
}

impl<F: Field> std::fmt::Debug for SparsePerp<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparsePerp")
            .field("phi", &self.phi)
            .field("matrix", &self.matrix)
            .finish()
    }
}

/// Column `j` has entry `(-1)^(i - 1) [phi_j \ {phi_ij}]` at row `phi_ij`.
/// Fails with [`Error::NotInOpenLocus`] when `p_Phi(S) = 0`.
pub fn sparse_perp<F: Field>(phi: &Slmf, pl: &PluckerVector<F>) -> Result<SparsePerp<F>> {
    if p_phi(phi, pl)?.is_zero() {
        return Err(Error::NotInOpenLocus);
    }
    let columns: Vec<Vec<F>> = phi.columns().iter().map(|&c| section_normal(c, pl)).collect();
    Ok(SparsePerp {
        phi: phi.clone(),
        matrix: Matrix::from_columns(pl.m, &columns),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Fp, One, Zero};
    use crate::fixtures;
    use crate::pattern::SupportPattern;
    use crate::rng::{substream, Stream};
    use crate::DEFAULT_PRIME;

    type F = Fp<DEFAULT_PRIME>;

    fn random_basis(m: usize, r: usize, seed: u64) -> Matrix<F> {
        let mut rng = substream(seed, Stream::Subspace, 0);
        loop {
            let b = Matrix::<F>::random(m, r, &mut rng);
            if b.rank() == r {
                return b;
            }
        }
    }

    fn idx(one_based: &[usize]) -> Mask {
        bits::from_one_based(one_based.iter().copied())
    }

    #[test]
    fn identity_basis() {
        let b = Matrix::<F>::from_fn(5, 2, |i, j| if i == j { F::one() } else { F::zero() });
        let pl = PluckerVector::from_basis(&b).unwrap();
        assert_eq!(pl.get(idx(&[1, 2])), F::one());
        assert_eq!(pl.coords().iter().filter(|c| c.is_nonzero()).count(), 1);
    }

    #[test]
    fn rank_deficient_basis_rejected() {
        let b = Matrix::<F>::zeros(4, 2);
        assert!(matches!(PluckerVector::from_basis(&b), Err(Error::Contract(_))));
    }

    #[test]
    fn change_of_basis_scales_by_determinant() {
        let b = random_basis(6, 3, 1);
        let g = random_basis(3, 3, 2);
        let pl = PluckerVector::from_basis(&b).unwrap();
        let pg = PluckerVector::from_basis(&(&b * &g)).unwrap();
        let det = g.determinant();
        for (a, c) in pl.coords().iter().zip(pg.coords()) {
            assert_eq!(*a * det, *c);
        }
    }

    #[test]
    fn three_term_plucker_relation() {
        for seed in 0..10 {
            let pl = PluckerVector::from_basis(&random_basis(4, 2, seed)).unwrap();
            let p = |a: usize, b: usize| pl.get(idx(&[a, b]));
            assert!((p(1, 2) * p(3, 4) - p(1, 3) * p(2, 4) + p(1, 4) * p(2, 3)).is_zero());
        }
    }

    #[test]
    fn lex_rank_agrees_with_enumeration_order() {
        for (k, psi) in bits::k_subsets(6, 3).enumerate() {
            assert_eq!(bits::lex_rank(psi, 6), k);
        }
    }

    #[test]
    fn dual_sign_small_cases() {
        assert_eq!(dual_sign::<F>(idx(&[1, 2]), 3), F::one());
        assert_eq!(dual_sign::<F>(idx(&[2]), 3), -F::one());
    }

    #[test]
    fn duality_reproduces_subspace_coordinates() {
        let (m, r) = (5, 2);
        for seed in 0..5 {
            let b = random_basis(m, r, seed);
            let perp = Matrix::from_columns(m, &b.transpose().kernel());
            assert_eq!(perp.cols(), m - r);
            let pl = PluckerVector::from_basis(&b).unwrap();
            let dual = PluckerVector::from_basis(&perp).unwrap();
            let mut scale = None;
            for psi in bits::k_subsets(m, m - r) {
                let lhs = dual.get(psi);
                let rhs = dual_sign::<F>(psi, m) * pl.get(bits::full(m) & !psi);
                match scale {
                    None if rhs.is_nonzero() => scale = Some(lhs * rhs.inv().unwrap()),
                    None => assert!(lhs.is_zero()),
                    Some(c) => assert_eq!(lhs, c * rhs),
                }
            }
        }
    }

    #[test]
    fn section_form_vanishes_on_subspace_and_is_linear() {
        let b = random_basis(6, 2, 3);
        let pl = PluckerVector::from_basis(&b).unwrap();
        let phi = idx(&[1, 3, 5]);
        for k in 0..2 {
            assert!(section_form(&b.column(k), phi, &pl).is_zero());
        }
        let mut rng = substream(9, Stream::Subspace, 1);
        let x: Vec<F> = (0..6).map(|_| F::sample(&mut rng)).collect();
        let y: Vec<F> = (0..6).map(|_| F::sample(&mut rng)).collect();
        let (a, c) = (F::sample(&mut rng), F::sample(&mut rng));
        let combo: Vec<F> = x.iter().zip(&y).map(|(u, v)| a * *u + c * *v).collect();
        assert_eq!(
            section_form(&combo, phi, &pl),
            a * section_form(&x, phi, &pl) + c * section_form(&y, phi, &pl)
        );
        // a random x is outside pi_phi(S) here
        assert!(section_form(&x, phi, &pl).is_nonzero());
    }

    #[test]
    fn sparse_perp_is_orthogonal_and_full_rank() {
        let phi = fixtures::slmf_r2_m6();
        for seed in 0..20 {
            let b = random_basis(6, 2, seed);
            let pl = PluckerVector::from_basis(&b).unwrap();
            let perp = sparse_perp(&phi, &pl).unwrap();
            let prod = &b.transpose() * &perp.matrix;
            assert!((0..2).all(|i| (0..4).all(|j| prod[(i, j)].is_zero())));
            assert_eq!(perp.matrix.rank(), 4);
            for j in 0..4 {
                for i in 0..6 {
                    if !bits::contains(phi.columns()[j], i) {
                        assert!(perp.matrix[(i, j)].is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn sparse_perp_matches_printed_matrix() {
        let phi = fixtures::slmf_r2_m6();
        let pl = PluckerVector::from_basis(&random_basis(6, 2, 8)).unwrap();
        let perp = sparse_perp(&phi, &pl).unwrap().matrix;
        let p = |a: usize, b: usize| pl.get(idx(&[a, b]));
        let z = F::zero();
        #[rustfmt::skip]
        let printed = [
            [z, p(2, 4), p(2, 5), p(3, 5)],
            [p(4, 6), -p(1, 4), -p(1, 5), z],
            [z, z, z, -p(1, 5)],
            [-p(2, 6), p(1, 2), z, z],
            [z, z, p(1, 2), p(1, 3)],
            [p(2, 4), z, z, z],
        ];
        for (i, row) in printed.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(perp[(i, j)], *v, "entry ({}, {})", i + 1, j + 1);
            }
        }
    }

    #[test]
    fn p_phi_is_product_of_three_coordinates() {
        let phi = fixtures::slmf_r2_m6();
        for seed in 0..20 {
            let pl = PluckerVector::from_basis(&random_basis(6, 2, seed)).unwrap();
            let p = |a: usize, b: usize| pl.get(idx(&[a, b]));
            assert_eq!(p_phi(&phi, &pl).unwrap(), -(p(1, 2) * p(2, 4) * p(1, 5)));
        }
    }

    #[test]
    fn p_phi_vanishes_off_slmf() {
        // {1,2,3} twice violates the union bound
        let bad = SupportPattern::from_columns(5, &[vec![1, 2, 3], vec![1, 2, 3], vec![3, 4, 5]]).unwrap();
        let bad = Slmf::new(2, bad).unwrap();
        for seed in 0..20 {
            let pl = PluckerVector::from_basis(&random_basis(5, 2, seed)).unwrap();
            assert!(p_phi(&bad, &pl).unwrap().is_zero());
            assert!(matches!(sparse_perp(&bad, &pl), Err(Error::NotInOpenLocus)));
        }
    }

    #[test]
    fn p_phi_corank_one_is_one() {
        let phi = Slmf::new(3, SupportPattern::full(4, 1).unwrap()).unwrap();
        let pl = PluckerVector::from_basis(&random_basis(4, 3, 0)).unwrap();
        assert_eq!(p_phi(&phi, &pl).unwrap(), F::one());
    }
}
