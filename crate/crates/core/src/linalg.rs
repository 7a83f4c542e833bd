//! Exact 2-vectors and 2×2 matrices over one radical field.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{AlgebraicScalar, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vec2 {
    pub x: AlgebraicScalar,
    pub y: AlgebraicScalar,
}

impl Vec2 {
    pub fn new(x: AlgebraicScalar, y: AlgebraicScalar) -> Self {
        Vec2 { x, y }
    }

    pub fn zero() -> Self {
        Vec2::new(AlgebraicScalar::from_int(0), AlgebraicScalar::from_int(0))
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Vec2::new(x.into(), y.into())
    }

    pub fn from_rationals(x: Rational, y: Rational) -> Self {
        Vec2::new(x.into(), y.into())
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn add(&self, o: &Vec2) -> Vec2 {
        Vec2::new(&self.x + &o.x, &self.y + &o.y)
    }

    pub fn sub(&self, o: &Vec2) -> Vec2 {
        Vec2::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn scale(&self, k: &AlgebraicScalar) -> Vec2 {
        Vec2::new(k * &self.x, k * &self.y)
    }

    pub fn scale_rational(&self, q: &Rational) -> Vec2 {
        Vec2::new(self.x.scale(q), self.y.scale(q))
    }

    pub fn dot(&self, o: &Vec2) -> AlgebraicScalar {
        &self.x * &o.x + &self.y * &o.y
    }

    pub fn as_rationals(&self) -> Option<(Rational, Rational)> {
        Some((self.x.as_rational()?, self.y.as_rational()?))
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [self.x.to_f64(), self.y.to_f64()]
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// `[[a, b], [c, d]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: AlgebraicScalar,
    pub b: AlgebraicScalar,
    pub c: AlgebraicScalar,
    pub d: AlgebraicScalar,
}

impl Mat2 {
    pub fn new(
        a: AlgebraicScalar,
        b: AlgebraicScalar,
        c: AlgebraicScalar,
        d: AlgebraicScalar,
    ) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_ints(m: [[i64; 2]; 2]) -> Self {
        Mat2::new(
            m[0][0].into(),
            m[0][1].into(),
            m[1][0].into(),
            m[1][1].into(),
        )
    }

    pub fn from_rationals(m: [[Rational; 2]; 2]) -> Self {
        let [[a, b], [c, d]] = m;
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Mat2::from_ints([[1, 0], [0, 1]])
    }

    pub fn diag(x: AlgebraicScalar, y: AlgebraicScalar) -> Self {
        Mat2::new(
            x,
            AlgebraicScalar::from_int(0),
            AlgebraicScalar::from_int(0),
            y,
        )
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(
            self.a.clone(),
            self.c.clone(),
            self.b.clone(),
            self.d.clone(),
        )
    }

    pub fn det(&self) -> AlgebraicScalar {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            &self.a * &o.a + &self.b * &o.c,
            &self.a * &o.b + &self.b * &o.d,
            &self.c * &o.a + &self.d * &o.c,
            &self.c * &o.b + &self.d * &o.d,
        )
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        Vec2::new(
            &self.a * &v.x + &self.b * &v.y,
            &self.c * &v.x + &self.d * &v.y,
        )
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let inv = det.inverse()?;
        Ok(Mat2::new(
            &self.d * &inv,
            -(&self.b * &inv),
            -(&self.c * &inv),
            &self.a * &inv,
        ))
    }

    pub fn pow(&self, mut k: u64) -> Mat2 {
        let mut result = Mat2::identity();
        let mut b = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&b);
            }
            k >>= 1;
            if k > 0 {
                b = b.mul(&b);
            }
        }
        result
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_one()
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.c.is_zero()
    }

    pub fn as_rationals(&self) -> Option<[[Rational; 2]; 2]> {
        Some([
            [self.a.as_rational()?, self.b.as_rational()?],
            [self.c.as_rational()?, self.d.as_rational()?],
        ])
    }

    pub fn to_f64(&self) -> [[f64; 2]; 2] {
        [
            [self.a.to_f64(), self.b.to_f64()],
            [self.c.to_f64(), self.d.to_f64()],
        ]
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}
