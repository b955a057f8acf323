//! Distance from integer points to a segment of quadratic-irrational slope, in exact `Q(sqrt D)`.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{rational_sqrt_exact, Rational, Scalar};

/// `a + b sqrt(D)` with rational `a, b` and squarefree-free radicand `D > 0` (not a square).
#[derive(Debug, Clone, PartialEq)]
pub struct Quad {
    pub a: Rational,
    pub b: Rational,
    pub d: BigInt,
}

impl Quad {
    pub fn rational(a: Rational, d: &BigInt) -> Self {
        Quad { a, b: <Rational as Zero>::zero(), d: d.clone() }
    }

    fn lift(&self, a: Rational) -> Self {
        Quad::rational(a, &self.d)
    }

    /// Sign, decided exactly.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&<Rational as Zero>::zero());
        let sb = self.b.cmp(&<Rational as Zero>::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // opposite signs: compare a^2 with b^2 D
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * Rational::from_integer(self.d.clone());
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Galois conjugate `a - b sqrt(D)`.
    pub fn conj(&self) -> Self {
        Quad { a: self.a.clone(), b: -self.b.clone(), d: self.d.clone() }
    }

    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * Rational::from_integer(self.d.clone())
    }

    pub fn inv(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::InvalidInput("division by zero in Q(sqrt D)".into()));
        }
        Ok(Quad { a: &self.a / &n, b: -&self.b / &n, d: self.d.clone() })
    }

    pub fn to_f64(&self) -> f64 {
        Scalar::to_f64(&self.a) + Scalar::to_f64(&self.b) * libm::sqrt(self.d.to_f64().unwrap_or(f64::INFINITY))
    }

    pub fn gt(&self, other: &Quad) -> bool {
        (self.clone() - other.clone()).signum() == Ordering::Greater
    }
}

impl Add for Quad {
    type Output = Quad;
    fn add(self, o: Quad) -> Quad {
        Quad { a: self.a + o.a, b: self.b + o.b, d: self.d }
    }
}

impl Sub for Quad {
    type Output = Quad;
    fn sub(self, o: Quad) -> Quad {
        Quad { a: self.a - o.a, b: self.b - o.b, d: self.d }
    }
}

impl Mul for Quad {
    type Output = Quad;
    fn mul(self, o: Quad) -> Quad {
        let d = Rational::from_integer(self.d.clone());
        Quad { a: &self.a * &o.a + &self.b * &o.b * d, b: &self.a * &o.b + &self.b * &o.a, d: self.d }
    }
}

impl Neg for Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        Quad { a: -self.a, b: -self.b, d: self.d }
    }
}

/// Real quadratic irrational `(p + q sqrt(D)) / r`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSlope {
    pub p: BigInt,
    pub q: BigInt,
    pub d: BigInt,
    pub r: BigInt,
}

impl QuadraticSlope {
    pub fn new(p: i64, q: i64, d: i64, r: i64) -> Result<Self> {
        let s = QuadraticSlope { p: p.into(), q: q.into(), d: d.into(), r: r.into() };
        s.value().map(|_| s)
    }

    /// Slope of the eigenvector `(1, lambda - a_11)` of a symmetric `2 x 2` integer matrix with
    /// `a_12 = 1`, for the eigenvalue with the given sign of the square root.
    pub fn symmetric_eigen_slope(a11: i64, a22: i64, plus: bool) -> Result<Self> {
        // lambda = (tr +- sqrt(disc)) / 2, slope = lambda - a11
        let tr = a11 + a22;
        let disc = (a11 - a22) * (a11 - a22) + 4;
        QuadraticSlope::new(tr - 2 * a11, if plus { 1 } else { -1 }, disc, 2)
    }

    pub fn value(&self) -> Result<Quad> {
        if self.r.is_zero() {
            return Err(Error::InvalidInput("slope denominator is zero".into()));
        }
        if !self.d.is_positive() || self.q.is_zero() || rational_sqrt_exact(&Rational::from_integer(self.d.clone())).is_some() {
            return Err(Error::InvalidInput("slope must be a real quadratic irrational".into()));
        }
        let r = Rational::from_integer(self.r.clone());
        Ok(Quad {
            a: Rational::from_integer(self.p.clone()) / &r,
            b: Rational::from_integer(self.q.clone()) / &r,
            d: self.d.clone(),
        })
    }

    /// Leading coefficient of the primitive integer minimal polynomial.
    pub fn leading_coefficient(&self) -> BigInt {
        // (r x - p)^2 = q^2 D
        let c2 = &self.r * &self.r;
        let c1 = BigInt::from(-2) * &self.p * &self.r;
        let c0 = &self.p * &self.p - &self.q * &self.q * &self.d;
        let g = c2.gcd(&c1).gcd(&c0);
        (c2 / g).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleConstants {
    /// `C_1` in `|beta p - q| > C_1/|p|`: `1/(|a| (|beta - beta'| + 1))`.
    pub c1: Quad,
    /// Segment half-length factor `C = C_1/2` (unit direction).
    pub c: Quad,
    /// `M_0^2 = 4 (1 + beta^2) / C_1^2`.
    pub m0_sq: Quad,
}

pub fn liouville_constants(slope: &QuadraticSlope) -> Result<LiouvilleConstants> {
    let beta = slope.value()?;
    let one = beta.lift(<Rational as One>::one());
    let spread = (beta.clone() - beta.conj()).abs();
    let a = Rational::from_integer(slope.leading_coefficient());
    let c1 = (beta.lift(a) * (spread + one.clone())).inv()?;
    let c = c1.clone() * beta.lift(Rational::new(1.into(), 2.into()));
    let m0_sq = beta.lift(Rational::from_integer(4.into())) * (one + beta.clone() * beta) * (c1.clone() * c1.clone()).inv()?;
    Ok(LiouvilleConstants { c1, c, m0_sq })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub holds: bool,
    /// Integer points examined.
    pub checked: u64,
    /// Smallest `dist(p, L) * M` seen (approximate, for reporting).
    pub min_scaled_distance: f64,
    pub m0: f64,
}

/// Checks `dist(p, L) > 1/M` for all integer `p != z`, where `L = {z + t u : |t| <= C M}` and `u`
/// is the unit vector of slope `beta`. Every comparison is exact in `Q(sqrt D)`.
pub fn liouville_gap_check(slope: &QuadraticSlope, m: u64, z: (i64, i64)) -> Result<GapReport> {
    // integer translations preserve the configuration, so only p - z matters
    let _ = z;
    let beta = slope.value()?;
    let k = liouville_constants(slope)?;
    let one = beta.lift(<Rational as One>::one());
    let mq = beta.lift(Rational::from_integer(m.into()));
    let m_sq = mq.clone() * mq.clone();
    let m0 = libm::sqrt(k.m0_sq.to_f64());
    if !m_sq.gt(&k.m0_sq) {
        return Err(Error::BelowThreshold { m: m as f64, m0 });
    }
    let norm_sq = one.clone() + beta.clone() * beta.clone();
    let inv_m_sq = m_sq.inv()?;
    let cm = k.c.clone() * mq.clone();
    let cm_sq = cm.clone() * cm.clone();
    // the segment stays inside |dx| <= C M / sqrt(1 + beta^2) and |dy| <= C M |beta| / sqrt(1 + beta^2)
    let bf = beta.to_f64();
    let half_x = cm.to_f64() / libm::sqrt(1.0 + bf * bf);
    let half_y = half_x * bf.abs();
    let (rx, ry) = (libm::ceil(half_x) as i64 + 2, libm::ceil(half_y) as i64 + 2);
    if (rx as f64) * (ry as f64) > 4e8 {
        return Err(Error::BudgetExceeded { budget: 400_000_000, lower_bound: None });
    }
    let mut checked = 0u64;
    let mut min_scaled = f64::INFINITY;
    for dx in -rx..=rx {
        // only points within distance 1 of the line can come within 1/M of it
        let centre = bf * dx as f64;
        let width = libm::sqrt(1.0 + bf * bf) + 1.0;
        let lo = (libm::floor(centre - width) as i64).max(-ry);
        let hi = (libm::ceil(centre + width) as i64).min(ry);
        for dy in lo..=hi {
            if dx == 0 && dy == 0 {
                continue;
            }
            checked += 1;
            let (qx, qy) = (beta.lift(Rational::from_integer(dx.into())), beta.lift(Rational::from_integer(dy.into())));
            // squared distance to the line: (beta dx - dy)^2 / (1 + beta^2)
            let cross = beta.clone() * qx.clone() - qy.clone();
            let line_sq = cross.clone() * cross.clone() * norm_sq.inv()?;
            min_scaled = min_scaled.min(libm::sqrt(line_sq.to_f64().max(0.0)) * m as f64);
            if line_sq.gt(&inv_m_sq) {
                continue;
            }
            // close to the line: the projection must fall outside the segment, and then the
            // endpoint distance decides. t = (dx + beta dy)/sqrt(1+beta^2).
            let along = qx.clone() + beta.clone() * qy.clone();
            let t_sq = along.clone() * along.clone() * norm_sq.inv()?;
            if !t_sq.gt(&cm_sq) {
                return Ok(GapReport { holds: false, checked, min_scaled_distance: min_scaled, m0 });
            }
            // |w|^2 + (CM)^2 - 1/M^2 > 2 CM |t|, squared on both sides
            let w_sq = qx.clone() * qx + qy.clone() * qy;
            let lhs = w_sq + cm_sq.clone() - inv_m_sq.clone();
            let rhs_sq = beta.lift(Rational::from_integer(4.into())) * cm_sq.clone() * t_sq;
            if lhs.signum() != Ordering::Greater || !(lhs.clone() * lhs).gt(&rhs_sq) {
                return Ok(GapReport { holds: false, checked, min_scaled_distance: min_scaled, m0 });
            }
        }
    }
    Ok(GapReport { holds: true, checked, min_scaled_distance: min_scaled, m0 })
}

/// Points `p` with `dist(p, line) * M <= 1` inside the box, by the same exact test (used to exhibit
/// failures below the threshold).
pub fn close_points(slope: &QuadraticSlope, m: u64, radius: i64) -> Result<Vec<(i64, i64)>> {
    let beta = slope.value()?;
    let one = beta.lift(<Rational as One>::one());
    let norm_sq = one + beta.clone() * beta.clone();
    let mq = beta.lift(Rational::from_integer(m.into()));
    let inv_m_sq = (mq.clone() * mq).inv()?;
    let mut out = Vec::new();
    for dx in -radius..=radius {
        for dy in -radius..=radius {
            if dx == 0 && dy == 0 {
                continue;
            }
            let cross = beta.clone() * beta.lift(Rational::from_integer(dx.into())) - beta.lift(Rational::from_integer(dy.into()));
            let line_sq = cross.clone() * cross * norm_sq.inv()?;
            if !line_sq.gt(&inv_m_sq) {
                out.push((dx, dy));
            }
        }
    }
    Ok(out)
}
