//! Gram-Schmidt data and LLL reduction that tracks the unimodular transform.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::dot;
use crate::scalar::Scalar;

/// Gram-Schmidt coefficients `mu[i][j]` (`j < i`) and squared lengths `b[i] = |b*_i|^2`.
#[derive(Debug, Clone)]
pub struct Gso<T> {
    pub mu: Vec<Vec<T>>,
    pub b: Vec<T>,
}

pub fn gso<T: Scalar>(basis: &[Vec<T>]) -> Result<Gso<T>> {
    let d = basis.len();
    let mut mu = vec![vec![T::zero(); d]; d];
    let mut b = vec![T::zero(); d];
    let mut r = vec![vec![T::zero(); d]; d];
    for i in 0..d {
        for j in 0..=i {
            let mut v = dot(&basis[i], &basis[j]);
            for l in 0..j {
                v = v - mu[j][l].clone() * r[i][l].clone();
            }
            r[i][j] = v;
            if j < i {
                mu[i][j] = r[i][j].clone() / b[j].clone();
            }
        }
        b[i] = r[i][i].clone();
        if !(b[i] > T::zero()) {
            return Err(Error::NumericalFailure("basis vectors are linearly dependent".into()));
        }
        mu[i][i] = T::one();
    }
    Ok(Gso { mu, b })
}

/// LLL reduction in place with parameter `delta`.
///
/// `coeffs[i]` holds the integer coordinates of `basis[i]` and receives the same row operations.
/// With `barrier = Some(k)` the vectors `b_{k-1}` and `b_k` are never swapped, so the span of the
/// first `k` vectors is preserved.
pub fn lll<T: Scalar>(
    basis: &mut [Vec<T>],
    coeffs: &mut [Vec<BigInt>],
    delta: &T,
    barrier: Option<usize>,
    max_swaps: u64,
) -> Result<()> {
    let d = basis.len();
    if d <= 1 {
        return Ok(());
    }
    let mut g = gso(basis)?;
    let mut k = 1;
    let mut swaps = 0u64;
    while k < d {
        size_reduce(basis, coeffs, &mut g, k);
        let lhs = g.b[k].clone();
        let m = g.mu[k][k - 1].clone();
        let rhs = (delta.clone() - m.clone() * m) * g.b[k - 1].clone();
        if lhs >= rhs || barrier == Some(k) {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            coeffs.swap(k, k - 1);
            swaps += 1;
            if swaps > max_swaps {
                return Err(Error::BudgetExceeded { budget: max_swaps, lower_bound: None });
            }
            g = gso(basis)?;
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
    Ok(())
}

/// Makes `|mu[k][j]| <= 1/2` for all `j < k`.
pub fn size_reduce<T: Scalar>(basis: &mut [Vec<T>], coeffs: &mut [Vec<BigInt>], g: &mut Gso<T>, k: usize) {
    for j in (0..k).rev() {
        let q = g.mu[k][j].round_int();
        if q.is_zero() {
            continue;
        }
        let qt = T::from_bigint(&q);
        let (head, tail) = basis.split_at_mut(k);
        for (x, y) in tail[0].iter_mut().zip(&head[j]) {
            *x = x.clone() - qt.clone() * y.clone();
        }
        let (head, tail) = coeffs.split_at_mut(k);
        for (x, y) in tail[0].iter_mut().zip(&head[j]) {
            *x -= &q * y;
        }
        for l in 0..j {
            g.mu[k][l] = g.mu[k][l].clone() - qt.clone() * g.mu[j][l].clone();
        }
        g.mu[k][j] = g.mu[k][j].clone() - qt;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::hnf::identity;
    use crate::matrix::norm_sq;
    use crate::scalar::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn reduces_a_skewed_basis() {
        let mut basis = vec![vec![q(1), q(0)], vec![q(1000), q(1)]];
        let mut coeffs = identity(2);
        lll(&mut basis, &mut coeffs, &(q(99) / q(100)), None, 1000).unwrap();
        assert_eq!(norm_sq(&basis[0]), q(1));
        assert_eq!(norm_sq(&basis[1]), q(1));
        for (v, c) in basis.iter().zip(&coeffs) {
            let rebuilt = crate::matrix::combine(&[vec![q(1), q(0)], vec![q(1000), q(1)]], c);
            assert_eq!(&rebuilt, v);
        }
    }

    #[test]
    fn barrier_keeps_the_leading_vector() {
        let mut basis = vec![vec![5.0, 0.0], vec![0.0, 1.0]];
        let mut coeffs = identity(2);
        lll(&mut basis, &mut coeffs, &0.99, Some(1), 1000).unwrap();
        assert_eq!(basis[0], vec![5.0, 0.0]);
        lll(&mut basis, &mut coeffs, &0.99, None, 1000).unwrap();
        assert_eq!(basis[0], vec![0.0, 1.0]);
    }
}
