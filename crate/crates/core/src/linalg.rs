//! Eigenvalues, singular values and characteristic polynomials for small matrices.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues ascending with matching unit eigenvectors (as columns of the second value).
pub fn symmetric_eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let d = m.dim();
    let mut a = m.clone();
    let mut v = Mat::<f64>::identity(d);
    let scale = m.frobenius().max(f64::MIN_POSITIVE);
    let mut converged = false;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..d {
            for j in 0..i {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if libm::sqrt(off) <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }
    if !converged {
        return Err(Error::NumericalFailure("Jacobi eigensolver did not converge".into()));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Mat::from_cols(&order.iter().map(|&i| v.col(i)).collect::<Vec<_>>());
    Ok((values, vectors))
}

/// Singular values, ascending, from the eigenvalues of `M^T M`.
///
/// Each eigenpair is checked against `||M^T M v - s^2 v|| <= 1e-10 ||M^T M||`. When the product
/// `prod s_i` drifts from `|det M|` by more than `1e-8` relative (severe ill-conditioning), the
/// values are recomputed from compound matrices, which keeps every singular value accurate.
pub fn singular_values(m: &Mat<f64>) -> Result<Vec<f64>> {
    let det = m.det();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::SingularMatrix);
    }
    let g = m.transpose().mul(m);
    let (vals, vecs) = symmetric_eigen(&g)?;
    let gnorm = g.frobenius();
    for (k, &lam) in vals.iter().enumerate() {
        let v = vecs.col(k);
        let gv = g.mul_vec(&v);
        let res: f64 = gv.iter().zip(&v).map(|(a, b)| (a - lam * b) * (a - lam * b)).sum();
        if libm::sqrt(res) > 1e-10 * gnorm {
            return Err(Error::NumericalFailure("eigenpair residual too large".into()));
        }
    }
    let sv: Vec<f64> = vals.iter().map(|&x| libm::sqrt(x.max(0.0))).collect();
    let prod: f64 = sv.iter().product();
    if (prod - det.abs()).abs() <= 1e-8 * det.abs() {
        return Ok(sv);
    }
    Ok(log_singular_values(m)?.into_iter().map(libm::exp).collect())
}

/// Natural logs of the singular values, ascending.
///
/// `ln(s_d s_{d-1} ... s_{d-k+1})` is the log of the top singular value of the `k`-th compound
/// matrix; differencing these recovers every `ln s_i` with absolute accuracy near machine
/// precision, independent of the spread between singular values. Exact inputs are rescaled by a
/// power of two before conversion so no entry overflows.
pub fn log_singular_values<T: Scalar>(m: &Mat<T>) -> Result<Vec<f64>> {
    let d = m.dim();
    let mut partial = vec![0.0f64; d + 1];
    for k in 1..=d {
        partial[k] = log_top_singular_of_compound(m, k)?;
    }
    let det_log = m.det();
    if det_log.vanishes() {
        return Err(Error::SingularMatrix);
    }
    partial[d] = det_log.ln_abs();
    // partial[k] - partial[k-1] = ln s_{d-k+1}
    let mut out: Vec<f64> = (1..=d).map(|k| partial[k] - partial[k - 1]).collect();
    out.reverse();
    // guard against last-bit disorder from rounding
    for i in 1..d {
        if out[i] < out[i - 1] {
            out[i] = out[i - 1];
        }
    }
    Ok(out)
}

fn log_top_singular_of_compound<T: Scalar>(m: &Mat<T>, k: usize) -> Result<f64> {
    let d = m.dim();
    let subsets = k_subsets(d, k);
    let size = subsets.len();
    let mut entries: Vec<T> = Vec::with_capacity(size * size);
    for rows in &subsets {
        for cols in &subsets {
            entries.push(minor(m, rows, cols));
        }
    }
    let (scaled, shift) = rescale(&entries);
    let c = Mat::from_rows((0..size).map(|i| scaled[i * size..(i + 1) * size].to_vec()).collect())?;
    let g = c.transpose().mul(&c);
    let (vals, _) = symmetric_eigen(&g)?;
    let top = *vals.last().expect("nonempty");
    if top <= 0.0 {
        return Err(Error::SingularMatrix);
    }
    Ok(0.5 * libm::log(top) + shift as f64 * core::f64::consts::LN_2)
}

/// Divides every entry by `2^shift` (chosen from the largest entry) and converts to `f64`.
fn rescale<T: Scalar>(entries: &[T]) -> (Vec<f64>, i64) {
    let shift = entries
        .iter()
        .filter(|x| !x.vanishes())
        .map(|x| x.log2_magnitude())
        .max()
        .unwrap_or(0);
    (entries.iter().map(|x| x.to_f64_scaled(shift)).collect(), shift)
}

fn minor<T: Scalar>(m: &Mat<T>, rows: &[usize], cols: &[usize]) -> T {
    let sub: Vec<Vec<T>> = rows.iter().map(|&r| cols.iter().map(|&c| m[(r, c)].clone()).collect()).collect();
    Mat::from_rows(sub).expect("square").det()
}

fn k_subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    rec(0, d, k, &mut cur, &mut out);
    out
}

/// Characteristic polynomial coefficients `c_0..c_d` (monic, `c_d = 1`) by Faddeev-LeVerrier.
pub fn char_poly<T: Scalar>(a: &Mat<T>) -> Vec<T> {
    let d = a.dim();
    let mut coeffs = vec![T::zero(); d + 1];
    coeffs[d] = T::one();
    let mut mk = Mat::<T>::zeros(d);
    for k in 1..=d {
        let prev = a.mul(&mk);
        let mut next = prev;
        for i in 0..d {
            next[(i, i)] = next[(i, i)].clone() + coeffs[d - k + 1].clone();
        }
        let am = a.mul(&next);
        let mut tr = T::zero();
        for i in 0..d {
            tr = tr + am[(i, i)].clone();
        }
        coeffs[d - k] = -tr / T::from_i64(k as i64);
        mk = next;
    }
    coeffs
}

/// Complex roots of a real polynomial given by coefficients `c_0..c_d` (Aberth-Ehrlich).
pub fn poly_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    if lead == 0.0 {
        return Err(Error::InvalidInput("leading coefficient is zero".into()));
    }
    let c: Vec<f64> = coeffs.iter().map(|x| x / lead).collect();
    if deg == 0 {
        return Ok(Vec::new());
    }
    let bound = 1.0 + c[..deg].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(bound * 0.5, 0.4 + 2.0 * core::f64::consts::PI * k as f64 / deg as f64))
        .collect();
    let eval = |x: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(1.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for i in (0..deg).rev() {
            dp = dp * x + p;
            p = p * x + c[i];
        }
        (p, dp)
    };
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..deg {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        s += Complex64::new(1.0, 0.0) / diff;
                    }
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[i] -= w;
            max_step = max_step.max(w.norm() / (1.0 + z[i].norm()));
        }
        if max_step < 1e-16 {
            break;
        }
    }
    Ok(z)
}

/// Moduli of the eigenvalues of `a`, ascending.
pub fn eigenvalue_moduli<T: Scalar>(a: &Mat<T>) -> Result<Vec<f64>> {
    if a.is_diagonal() {
        let mut v: Vec<f64> = (0..a.dim()).map(|i| libm::fabs(a[(i, i)].to_f64())).collect();
        v.sort_by(f64::total_cmp);
        return Ok(v);
    }
    let af = a.to_f64();
    if af.is_symmetric() {
        let (vals, _) = symmetric_eigen(&af)?;
        let mut v: Vec<f64> = vals.iter().map(|x| x.abs()).collect();
        v.sort_by(f64::total_cmp);
        return Ok(v);
    }
    let cp: Vec<f64> = char_poly(a).iter().map(|x| x.to_f64()).collect();
    let mut v: Vec<f64> = poly_roots(&cp)?.iter().map(|z| z.norm()).collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_values_of_symmetric() {
        let m = Mat::from_rows(vec![vec![10.0, 5.0], vec![5.0, 5.0]]).unwrap();
        let s = singular_values(&m).unwrap();
        let r5 = libm::sqrt(5.0);
        assert!((s[0] - 5.0 * (3.0 - r5) / 2.0).abs() < 1e-12);
        assert!((s[1] - 5.0 * (3.0 + r5) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn compound_route_handles_extreme_spread() {
        // (5A)^40 with A = [[2,1],[1,1]]: singular values 1.9098^40 and 13.09^40
        use crate::scalar::Rational;
        let a = Mat::from_rows(vec![
            vec![Rational::from_integer(10.into()), Rational::from_integer(5.into())],
            vec![Rational::from_integer(5.into()), Rational::from_integer(5.into())],
        ])
        .unwrap();
        let ls = log_singular_values(&a.pow(40)).unwrap();
        let r5 = libm::sqrt(5.0);
        assert!((ls[0] / 40.0 - libm::log(5.0 * (3.0 - r5) / 2.0)).abs() < 1e-12);
        assert!((ls[1] / 40.0 - libm::log(5.0 * (3.0 + r5) / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn char_poly_and_roots() {
        let a = Mat::from_rows(vec![vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let cp = char_poly(&a);
        assert!((cp[0] - 1.0).abs() < 1e-12 && (cp[1] + 3.0).abs() < 1e-12);
        let rot = Mat::from_rows(vec![vec![0.0, -2.0], vec![2.0, 0.0]]).unwrap();
        let m = eigenvalue_moduli(&rot).unwrap();
        assert!((m[0] - 2.0).abs() < 1e-10 && (m[1] - 2.0).abs() < 1e-10);
    }
}
