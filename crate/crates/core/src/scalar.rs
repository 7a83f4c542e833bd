//! Exact scalars: big rationals and the radical field Q(θ), θ^r = t/s.
//!
//! Every matrix entry and frequency coordinate of an instance lives in one
//! field Q(θ). Elements are stored as coefficient vectors over the power
//! basis 1, θ, …, θ^{r-1}; once the base is canonical (see
//! [`canonicalize_root`]) θ has degree exactly r, so coefficient equality is
//! value equality.

pub mod parse;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `(t/s)^(1/r)` with gcd(s, t) = 1 and r minimal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootBase {
    t: BigInt,
    s: BigInt,
    r: u32,
}

impl RootBase {
    /// The trivial base: Q itself.
    pub fn rational() -> Self {
        RootBase {
            t: BigInt::one(),
            s: BigInt::one(),
            r: 1,
        }
    }

    pub fn t(&self) -> &BigInt {
        &self.t
    }

    pub fn s(&self) -> &BigInt {
        &self.s
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// θ^r as a rational.
    pub fn radicand(&self) -> Rational {
        Rational::new(self.t.clone(), self.s.clone())
    }

    pub fn is_rational(&self) -> bool {
        self.r == 1
    }

    /// Two bases describe the same field (all r = 1 bases are Q).
    pub fn same_field(&self, other: &RootBase) -> bool {
        (self.r == 1 && other.r == 1) || self == other
    }
}

impl fmt::Display for RootBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}/{})^(1/{})", self.t, self.s, self.r)
    }
}

/// Returns `Some(root)` when `n >= 0` is a perfect m-th power.
pub fn perfect_power(n: &BigInt, m: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let root = n.nth_root(m);
    if num_traits::pow(root.clone(), m as usize) == *n {
        Some(root)
    } else {
        None
    }
}

/// Returns `Some(root)` when the positive rational `q` is a perfect m-th power.
pub fn rational_perfect_power(q: &Rational, m: u32) -> Option<Rational> {
    if !q.is_positive() {
        return None;
    }
    let n = perfect_power(q.numer(), m)?;
    let d = perfect_power(q.denom(), m)?;
    Some(Rational::new(n, d))
}

fn divisors_desc(r: u32) -> Vec<u32> {
    let mut v: Vec<u32> = (1..=r).filter(|m| r.is_multiple_of(*m)).collect();
    v.reverse();
    v
}

/// Normalize `(t/s)^(1/r)` to the unique base with minimal r.
///
/// Perfect powers collapse: `(4/9)^(1/2)` becomes the rational base `2/3`
/// with r = 1.
pub fn canonicalize_root(t: &BigInt, s: &BigInt, r: u32) -> Result<RootBase> {
    if !t.is_positive() || !s.is_positive() || r == 0 {
        return Err(Error::InvalidRoot(format!(
            "({t}/{s})^(1/{r}) needs t, s, r >= 1"
        )));
    }
    let g = t.gcd(s);
    let (t, s) = (t / &g, s / &g);
    if t == s {
        return Ok(RootBase::rational());
    }
    for m in divisors_desc(r) {
        if let (Some(tm), Some(sm)) = (perfect_power(&t, m), perfect_power(&s, m)) {
            return Ok(RootBase {
                t: tm,
                s: sm,
                r: r / m,
            });
        }
    }
    unreachable!("m = 1 always succeeds")
}

/// Certified enclosure `[lo, hi]` of a real number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn point(q: Rational) -> Self {
        Interval {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn mid_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / int(2))
            .to_f64()
            .unwrap_or(f64::NAN)
    }
}

/// `p^exponent * unit` with v_p(unit) = 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PValuation {
    pub p: u64,
    pub exponent: i64,
    pub unit: Rational,
}

/// v_p of an integer (n != 0).
pub fn int_valuation(n: &BigInt, p: u64) -> (i64, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut e = 0i64;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return (e, n);
        }
        n = q;
        e += 1;
    }
}

pub fn p_valuation(q: &Rational, p: u64) -> Result<PValuation> {
    if q.is_zero() {
        return Err(Error::ZeroValuation);
    }
    let (en, un) = int_valuation(q.numer(), p);
    let (ed, ud) = int_valuation(q.denom(), p);
    Ok(PValuation {
        p,
        exponent: en - ed,
        unit: Rational::new(un, ud),
    })
}

/// Element of Q(θ): Σ coeffs[i]·θ^i.
#[derive(Clone, Debug)]
pub struct AlgebraicScalar {
    base: Arc<RootBase>,
    coeffs: Vec<Rational>,
}

impl PartialEq for AlgebraicScalar {
    fn eq(&self, other: &Self) -> bool {
        if self.base.same_field(&other.base) {
            return self.coeffs == other.coeffs;
        }
        match (self.as_rational(), other.as_rational()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for AlgebraicScalar {}

impl Hash for AlgebraicScalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let last = self
            .coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .map_or(0, |i| i + 1);
        self.coeffs[..last].hash(state);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn field_arith(
    op: FieldOp,
    x: &AlgebraicScalar,
    y: &AlgebraicScalar,
) -> Result<AlgebraicScalar> {
    match op {
        FieldOp::Add => x.checked_add(y),
        FieldOp::Sub => x.checked_sub(y),
        FieldOp::Mul => x.checked_mul(y),
        FieldOp::Div => x.checked_div(y),
    }
}

impl AlgebraicScalar {
    pub fn from_rational(q: Rational) -> Self {
        AlgebraicScalar {
            base: Arc::new(RootBase::rational()),
            coeffs: vec![q],
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(int(n))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_rational(Rational::from_integer(n))
    }

    pub fn zero_in(base: &Arc<RootBase>) -> Self {
        AlgebraicScalar {
            base: base.clone(),
            coeffs: vec![Rational::zero(); base.r as usize],
        }
    }

    pub fn rational_in(base: &Arc<RootBase>, q: Rational) -> Self {
        let mut x = Self::zero_in(base);
        x.coeffs[0] = q;
        x
    }

    /// q·θ^k, reducing k modulo r.
    pub fn monomial(base: &Arc<RootBase>, q: Rational, k: u32) -> Self {
        let r = base.r;
        let mut x = Self::zero_in(base);
        let reps = k / r;
        let factor = num_traits::pow(base.radicand(), reps as usize);
        x.coeffs[(k % r) as usize] = q * factor;
        x
    }

    pub fn theta(base: &Arc<RootBase>) -> Self {
        Self::monomial(base, Rational::one(), 1)
    }

    pub fn from_coeffs(base: &Arc<RootBase>, coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.len() != base.r as usize {
            return Err(Error::InvalidRoot(format!(
                "expected {} coefficients, got {}",
                base.r,
                coeffs.len()
            )));
        }
        Ok(AlgebraicScalar {
            base: base.clone(),
            coeffs,
        })
    }

    pub fn base(&self) -> &Arc<RootBase> {
        &self.base
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|q| q.is_one())
    }

    /// The rational value when every non-constant coefficient vanishes.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational()
            .filter(|q| q.is_integer())
            .map(|q| q.to_integer())
    }

    /// Re-express in `base` (only rationals move between fields).
    pub fn lift_to(&self, base: &Arc<RootBase>) -> Result<Self> {
        if self.base.same_field(base) {
            let mut x = self.clone();
            x.base = base.clone();
            return Ok(x);
        }
        match self.as_rational() {
            Some(q) => Ok(Self::rational_in(base, q)),
            None => Err(Error::IncompatibleBase {
                left: self.base.to_string(),
                right: base.to_string(),
            }),
        }
    }

    fn unify(&self, other: &Self) -> Result<(Self, Self)> {
        if self.base.same_field(&other.base) {
            return Ok((self.clone(), other.lift_to(&self.base)?));
        }
        if self.base.r == 1 {
            return Ok((self.lift_to(&other.base)?, other.clone()));
        }
        if other.base.r == 1 {
            return Ok((self.clone(), other.lift_to(&self.base)?));
        }
        Err(Error::IncompatibleBase {
            left: self.base.to_string(),
            right: other.base.to_string(),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let (mut x, y) = self.unify(other)?;
        for (a, b) in x.coeffs.iter_mut().zip(&y.coeffs) {
            *a += b;
        }
        Ok(x)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let (mut x, y) = self.unify(other)?;
        for (a, b) in x.coeffs.iter_mut().zip(&y.coeffs) {
            *a -= b;
        }
        Ok(x)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let (x, y) = self.unify(other)?;
        let r = x.base.r as usize;
        if r == 1 {
            return Ok(AlgebraicScalar {
                base: x.base,
                coeffs: vec![&x.coeffs[0] * &y.coeffs[0]],
            });
        }
        let mut prod = vec![Rational::zero(); 2 * r - 1];
        for (i, a) in x.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let radicand = x.base.radicand();
        for i in (r..2 * r - 1).rev() {
            let hi = std::mem::take(&mut prod[i]);
            if !hi.is_zero() {
                prod[i - r] += hi * &radicand;
            }
        }
        prod.truncate(r);
        Ok(AlgebraicScalar {
            base: x.base,
            coeffs: prod,
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let r = self.base.r as usize;
        if r == 1 {
            return Ok(Self::from_rational(self.coeffs[0].recip()));
        }
        // Columns of the multiplication-by-self matrix are self·θ^j.
        let mut cols = Vec::with_capacity(r);
        for j in 0..r {
            let basis = Self::monomial(&self.base, Rational::one(), j as u32);
            cols.push(self.checked_mul(&basis)?.coeffs);
        }
        let mut a: Vec<Vec<Rational>> = (0..r)
            .map(|i| (0..r).map(|j| cols[j][i].clone()).collect())
            .collect();
        let mut rhs = vec![Rational::zero(); r];
        rhs[0] = Rational::one();
        let sol = solve_linear(&mut a, &mut rhs).ok_or(Error::DivisionByZero)?;
        Self::from_coeffs(&self.base, sol)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        let (x, y) = self.unify(other)?;
        x.checked_mul(&y.inverse()?)
    }

    pub fn neg(&self) -> Self {
        AlgebraicScalar {
            base: self.base.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        AlgebraicScalar {
            base: self.base.clone(),
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut result = Self::rational_in(&self.base, Rational::one());
        let mut b = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &b;
            }
            k >>= 1;
            if k > 0 {
                b = &b * &b;
            }
        }
        result
    }

    /// Signed power; negative exponents invert.
    pub fn powi(&self, k: i64) -> Result<Self> {
        if k >= 0 {
            Ok(self.pow(k as u64))
        } else {
            Ok(self.inverse()?.pow(k.unsigned_abs()))
        }
    }

    /// Index and value of the single nonzero coefficient, if there is one.
    pub fn as_monomial(&self) -> Option<(u32, Rational)> {
        let mut found = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                if found.is_some() {
                    return None;
                }
                found = Some((i as u32, c.clone()));
            }
        }
        found
    }

    /// Certified enclosure of width at most 10^-digits.
    pub fn approx(&self, digits: u32) -> Interval {
        if let Some(q) = self.as_rational() {
            return Interval::point(q);
        }
        let r = self.base.r;
        let mut mass = Rational::zero();
        for c in &self.coeffs[1..] {
            mass += c.abs();
        }
        let bound = mass.ceil().to_integer() + BigInt::one();
        let scale = num_traits::pow(BigInt::from(10), digits as usize) * bound;
        let scale_r = num_traits::pow(scale.clone(), r as usize);
        let mut lo = self.coeffs[0].clone();
        let mut hi = self.coeffs[0].clone();
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            if c.is_zero() {
                continue;
            }
            let num = num_traits::pow(self.base.t.clone(), i) * &scale_r;
            let den = num_traits::pow(self.base.s.clone(), i);
            let n = (num / den).nth_root(r);
            let below = Rational::new(n.clone(), scale.clone());
            let above = Rational::new(n + BigInt::one(), scale.clone());
            if c.is_positive() {
                lo += c * &below;
                hi += c * &above;
            } else {
                lo += c * &above;
                hi += c * &below;
            }
        }
        Interval { lo, hi }
    }

    /// Sign, decided by refining the enclosure until it excludes zero.
    pub fn signum(&self) -> Ordering {
        if let Some(q) = self.as_rational() {
            return q.cmp(&Rational::zero());
        }
        let zero = Rational::zero();
        let mut digits = 16;
        loop {
            let iv = self.approx(digits);
            if iv.lo > zero {
                return Ordering::Greater;
            }
            if iv.hi < zero {
                return Ordering::Less;
            }
            digits *= 2;
        }
    }

    pub fn cmp_value(&self, other: &Self) -> Result<Ordering> {
        Ok(self.checked_sub(other)?.signum())
    }

    pub fn to_f64(&self) -> f64 {
        if let Some(q) = self.as_rational() {
            return q.to_f64().unwrap_or(f64::NAN);
        }
        let mut digits = 20;
        loop {
            let iv = self.approx(digits);
            let w = iv.width().to_f64().unwrap_or(0.0);
            let lo = iv.lo.to_f64().unwrap_or(f64::NAN);
            if !lo.is_finite() || w <= lo.abs() * 1e-17 || digits > 2000 {
                return iv.mid_f64();
            }
            digits += 40;
        }
    }

    /// Fractional part in [0, 1), reduced exactly (or at 40 certified digits
    /// for irrational values) before conversion to f64.
    pub fn frac_f64(&self) -> f64 {
        let q = match self.as_rational() {
            Some(q) => q,
            None => self.approx(40).lo,
        };
        let f = &q - q.floor();
        f.to_f64().unwrap_or(0.0)
    }

    /// If self = q·θ^k > 0, returns the canonical base B with self = B's root.
    ///
    /// Non-monomials return `Ok(None)`: root-rationality is not decided there.
    pub fn monomial_root_form(&self) -> Result<Option<RootBase>> {
        if self.signum() != Ordering::Greater {
            return Err(Error::NotPositive(self.to_string()));
        }
        let Some((k, q)) = self.as_monomial() else {
            return Ok(None);
        };
        let r = self.base.r;
        let power =
            num_traits::pow(q, r as usize) * num_traits::pow(self.base.radicand(), k as usize);
        canonicalize_root(power.numer(), power.denom(), r).map(Some)
    }
}

/// Gaussian elimination over Q; returns None when singular.
pub(crate) fn solve_linear(a: &mut [Vec<Rational>], b: &mut [Rational]) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&row| !a[row][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in &mut a[col][col..n] {
            *x = &*x * &inv;
        }
        b[col] = &b[col] * &inv;
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let f = a[row][col].clone();
            let pivot_row = a[col].clone();
            for (x, y) in a[row][col..n].iter_mut().zip(&pivot_row[col..n]) {
                *x -= &f * y;
            }
            let delta = &f * &b[col];
            b[row] -= delta;
        }
    }
    Some(b.to_vec())
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl std::ops::$tr<&AlgebraicScalar> for &AlgebraicScalar {
            type Output = AlgebraicScalar;
            /// Panics when the operands live in incompatible radical fields.
            fn $method(self, rhs: &AlgebraicScalar) -> AlgebraicScalar {
                self.$checked(rhs)
                    .expect("scalar operands from incompatible fields")
            }
        }
        impl std::ops::$tr<AlgebraicScalar> for AlgebraicScalar {
            type Output = AlgebraicScalar;
            fn $method(self, rhs: AlgebraicScalar) -> AlgebraicScalar {
                (&self)
                    .$checked(&rhs)
                    .expect("scalar operands from incompatible fields")
            }
        }
        impl std::ops::$tr<&AlgebraicScalar> for AlgebraicScalar {
            type Output = AlgebraicScalar;
            fn $method(self, rhs: &AlgebraicScalar) -> AlgebraicScalar {
                (&self)
                    .$checked(rhs)
                    .expect("scalar operands from incompatible fields")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &AlgebraicScalar {
    type Output = AlgebraicScalar;
    fn neg(self) -> AlgebraicScalar {
        AlgebraicScalar::neg(self)
    }
}

impl std::ops::Neg for AlgebraicScalar {
    type Output = AlgebraicScalar;
    fn neg(self) -> AlgebraicScalar {
        AlgebraicScalar::neg(&self)
    }
}

impl From<Rational> for AlgebraicScalar {
    fn from(q: Rational) -> Self {
        AlgebraicScalar::from_rational(q)
    }
}

impl From<i64> for AlgebraicScalar {
    fn from(n: i64) -> Self {
        AlgebraicScalar::from_int(n)
    }
}

fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Formats in the scalar grammar, so the text parses back to the same value.
impl fmt::Display for AlgebraicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if i == 0 {
                f.write_str(&fmt_rational(&mag))?;
                continue;
            }
            if !mag.is_one() {
                write!(f, "{}*", fmt_rational(&mag))?;
            }
            write!(
                f,
                "({}/{})^({}/{})",
                self.base.t, self.base.s, i, self.base.r
            )?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Sign of a big integer as -1, 0, 1.
pub fn sign_of(n: &BigInt) -> i32 {
    match n.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(t: i64, s: i64, r: u32) -> Arc<RootBase> {
        Arc::new(canonicalize_root(&BigInt::from(t), &BigInt::from(s), r).unwrap())
    }

    #[test]
    fn canonicalize_examples() {
        let b = canonicalize_root(&5.into(), &1.into(), 2).unwrap();
        assert_eq!(
            (b.t().clone(), b.s().clone(), b.r()),
            (5.into(), 1.into(), 2)
        );
        let b = canonicalize_root(&4.into(), &9.into(), 2).unwrap();
        assert_eq!(
            (b.t().clone(), b.s().clone(), b.r()),
            (2.into(), 3.into(), 1)
        );
        let b = canonicalize_root(&7.into(), &1.into(), 1).unwrap();
        assert_eq!(b.r(), 1);
        assert_eq!(b.t(), &BigInt::from(7));
        // 64 = 2^6: (64)^(1/4) = 8^(1/2)... = (2^6)^(1/4) -> m = 2 -> (8)^(1/2)
        let b = canonicalize_root(&64.into(), &1.into(), 4).unwrap();
        assert_eq!((b.t().clone(), b.r()), (8.into(), 2));
        let b = canonicalize_root(&3.into(), &3.into(), 2).unwrap();
        assert_eq!(b, RootBase::rational());
        assert!(canonicalize_root(&0.into(), &1.into(), 2).is_err());
        assert!(canonicalize_root(&2.into(), &(-1).into(), 2).is_err());
        assert!(canonicalize_root(&2.into(), &1.into(), 0).is_err());
    }

    #[test]
    fn theta_squared_is_radicand() {
        let b = base(5, 1, 2);
        let th = AlgebraicScalar::theta(&b);
        assert_eq!((&th * &th).as_rational(), Some(int(5)));
    }

    #[test]
    fn example_kappa_product() {
        let b = base(5, 1, 2);
        let x = AlgebraicScalar::monomial(&b, rat(1, 25), 1);
        let y = AlgebraicScalar::monomial(&b, rat(1, 3), 1);
        let p = &x * &y;
        assert_eq!(p.coeffs(), &[rat(1, 15), int(0)]);
        assert_eq!(p.as_rational(), Some(rat(1, 15)));
    }

    #[test]
    fn inverse_of_one_plus_theta() {
        let b = base(5, 1, 2);
        let x = AlgebraicScalar::from_coeffs(&b, vec![int(1), int(1)]).unwrap();
        let inv = AlgebraicScalar::rational_in(&b, int(1))
            .checked_div(&x)
            .unwrap();
        assert_eq!(inv.coeffs(), &[rat(-1, 4), rat(1, 4)]);
        assert!((&inv * &x).is_one());
    }

    #[test]
    fn division_by_zero_and_mixed_bases() {
        let b = base(5, 1, 2);
        let zero = AlgebraicScalar::zero_in(&b);
        assert_eq!(
            AlgebraicScalar::theta(&b).checked_div(&zero),
            Err(Error::DivisionByZero)
        );
        let other = base(7, 1, 2);
        let e = AlgebraicScalar::theta(&b).checked_add(&AlgebraicScalar::theta(&other));
        assert!(matches!(e, Err(Error::IncompatibleBase { .. })));
        // rationals embed anywhere
        assert!(AlgebraicScalar::theta(&b)
            .checked_add(&AlgebraicScalar::from_int(3))
            .is_ok());
    }

    #[test]
    fn rationality() {
        assert_eq!(
            AlgebraicScalar::from_rational(rat(3, 4)).as_rational(),
            Some(rat(3, 4))
        );
        assert_eq!(AlgebraicScalar::theta(&base(5, 1, 2)).as_rational(), None);
    }

    #[test]
    fn monomial_root_forms() {
        let b = base(5, 1, 2);
        let f = AlgebraicScalar::theta(&b)
            .monomial_root_form()
            .unwrap()
            .unwrap();
        assert_eq!(
            (f.t().clone(), f.s().clone(), f.r()),
            (5.into(), 1.into(), 2)
        );
        let x = AlgebraicScalar::monomial(&b, rat(3, 5), 1);
        let f = x.monomial_root_form().unwrap().unwrap();
        assert_eq!(
            (f.t().clone(), f.s().clone(), f.r()),
            (9.into(), 5.into(), 2)
        );
        let y = AlgebraicScalar::from_coeffs(&b, vec![int(1), int(1)]).unwrap();
        assert_eq!(y.monomial_root_form().unwrap(), None);
        assert!(AlgebraicScalar::from_int(-2).monomial_root_form().is_err());
        let f = AlgebraicScalar::from_rational(rat(6, 1))
            .monomial_root_form()
            .unwrap()
            .unwrap();
        assert_eq!(
            (f.t().clone(), f.s().clone(), f.r()),
            (6.into(), 1.into(), 1)
        );
    }

    #[test]
    fn valuations() {
        let v = p_valuation(&rat(3, 4), 3).unwrap();
        assert_eq!((v.exponent, v.unit), (1, rat(1, 4)));
        let v = p_valuation(&rat(1, 9), 3).unwrap();
        assert_eq!((v.exponent, v.unit), (-2, int(1)));
        let v = p_valuation(&rat(10, 7), 5).unwrap();
        assert_eq!((v.exponent, v.unit), (1, rat(2, 7)));
        assert_eq!(p_valuation(&int(0), 5), Err(Error::ZeroValuation));
    }

    #[test]
    fn approx_brackets() {
        let b = base(5, 1, 2);
        let iv = AlgebraicScalar::theta(&b).approx(6);
        assert!(iv.width() <= rat(1, 1_000_000));
        assert!(iv.lo.to_f64().unwrap() <= 2.2360679775 && 2.2360679775 <= iv.hi.to_f64().unwrap());
        // (9/5)^(1/2): square the endpoints to bracket 9/5
        let x = AlgebraicScalar::theta(&base(9, 5, 2));
        let iv = x.approx(4);
        assert!(&iv.lo * &iv.lo <= rat(9, 5) && rat(9, 5) <= &iv.hi * &iv.hi);
        assert!((iv.mid_f64() - 1.3416).abs() < 1e-4);
        let q = AlgebraicScalar::from_rational(rat(3, 4)).approx(3);
        assert_eq!(q, Interval::point(rat(3, 4)));
    }

    #[test]
    fn display_round_trips_through_parser() {
        let b = base(5, 1, 2);
        let x = AlgebraicScalar::from_coeffs(&b, vec![rat(-1, 4), rat(-3, 5)]).unwrap();
        let text = x.to_string();
        assert_eq!(text, "-1/4 - 3/5*(5/1)^(1/2)");
        assert_eq!(parse::parse_scalar_expr(&text).unwrap(), x);
    }

    #[test]
    fn signs_and_floats() {
        let b = base(5, 1, 2);
        let x = AlgebraicScalar::from_coeffs(&b, vec![int(-2), int(1)]).unwrap(); // √5 - 2 > 0
        assert_eq!(x.signum(), Ordering::Greater);
        assert!((x.to_f64() - (5f64.sqrt() - 2.0)).abs() < 1e-15);
        let big = AlgebraicScalar::monomial(
            &b,
            Rational::from_integer(num_traits::pow(BigInt::from(5), 40)),
            1,
        );
        assert!(big.frac_f64() >= 0.0 && big.frac_f64() < 1.0);
    }
}
