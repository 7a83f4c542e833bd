//! Text form of scalars.
//!
//! ```text
//! scalar   := ['+'|'-'] term (('+'|'-') term)*
//! term     := rational ('*' radical)? | radical
//! radical  := '(' rational ')' '^' '(' int '/' int ')'
//! rational := int ('/' int)?
//! ```

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{canonicalize_root, rational_perfect_power, AlgebraicScalar, Rational, RootBase};
use crate::error::{Error, Result};

struct Cursor<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        let neg = self.text.get(self.pos) == Some(&b'-');
        if neg {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            self.pos = start;
            return self.err("expected integer");
        }
        let s = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii");
        Ok(s.parse().expect("validated digits"))
    }

    fn unsigned(&mut self) -> Result<BigInt> {
        if self.peek() == Some(b'-') {
            return self.err("unexpected sign");
        }
        self.integer()
    }

    fn rational(&mut self) -> Result<Rational> {
        let n = self.unsigned()?;
        if self.eat(b'/') {
            let at = self.pos;
            let d = self.unsigned()?;
            if d.is_zero() {
                return Err(Error::Parse {
                    pos: at,
                    msg: "zero denominator".into(),
                });
            }
            Ok(Rational::new(n, d))
        } else {
            Ok(Rational::from_integer(n))
        }
    }
}

/// A parsed radical a^(k/r): canonical base with θ = a^(1/r'), exponent k.
struct Radical {
    base: RootBase,
    k: u32,
}

fn radical(cur: &mut Cursor) -> Result<Radical> {
    cur.expect(b'(')?;
    let at = cur.pos;
    let a = cur.rational()?;
    if !a.is_positive() {
        return Err(Error::Parse {
            pos: at,
            msg: "radicand must be positive".into(),
        });
    }
    cur.expect(b')')?;
    cur.expect(b'^')?;
    cur.expect(b'(')?;
    let at = cur.pos;
    let k = cur.integer()?;
    cur.expect(b'/')?;
    let r = cur.unsigned()?;
    cur.expect(b')')?;
    if r.is_zero() {
        return Err(Error::Parse {
            pos: at,
            msg: "zero root index".into(),
        });
    }
    let g = k.gcd(&r);
    let (mut k, r) = if g.is_zero() {
        (k, r)
    } else {
        (&k / &g, &r / &g)
    };
    let (mut t, mut s) = (a.numer().clone(), a.denom().clone());
    if k.is_negative() {
        std::mem::swap(&mut t, &mut s);
        k = -k;
    }
    let too_big = || Error::Parse {
        pos: at,
        msg: "exponent out of range".into(),
    };
    let k: u32 = u32::try_from(&k).map_err(|_| too_big())?;
    let r: u32 = u32::try_from(&r).map_err(|_| too_big())?;
    if r > 64 {
        return Err(too_big());
    }
    let base = canonicalize_root(&t, &s, r)?;
    Ok(Radical { base, k })
}

/// Parses one scalar; perfect-power radicals collapse to rationals.
pub fn parse_scalar_expr(text: &str) -> Result<AlgebraicScalar> {
    let mut cur = Cursor {
        text: text.as_bytes(),
        pos: 0,
    };
    let mut terms: Vec<AlgebraicScalar> = Vec::new();
    let mut negative = if cur.eat(b'-') {
        true
    } else {
        cur.eat(b'+');
        false
    };
    loop {
        let term = if cur.peek() == Some(b'(') {
            let rad = radical(&mut cur)?;
            AlgebraicScalar::monomial(&Arc::new(rad.base), Rational::one(), rad.k)
        } else {
            let q = cur.rational()?;
            if cur.eat(b'*') {
                let rad = radical(&mut cur)?;
                AlgebraicScalar::monomial(&Arc::new(rad.base), q, rad.k)
            } else {
                AlgebraicScalar::from_rational(q)
            }
        };
        terms.push(if negative { -term } else { term });
        match cur.peek() {
            None => break,
            Some(b'+') => negative = false,
            Some(b'-') => negative = true,
            Some(c) => return cur.err(format!("unexpected '{}'", c as char)),
        }
        cur.pos += 1;
    }
    let terms = unify_scalars(&terms)?;
    let mut sum = terms[0].clone();
    for t in &terms[1..] {
        sum = sum.checked_add(t)?;
    }
    Ok(collapse(sum))
}

/// Moves rational values onto the trivial base.
pub fn collapse(x: AlgebraicScalar) -> AlgebraicScalar {
    match x.as_rational() {
        Some(q) => AlgebraicScalar::from_rational(q),
        None => x,
    }
}

/// Rational λ with θ_b^k = λ·θ_B^j, if it exists.
fn embed_power(b: &RootBase, k: u32, target: &RootBase, j: u32) -> Option<Rational> {
    let l = (b.r() as u64).lcm(&(target.r() as u64));
    let lhs = num_traits::pow(b.radicand(), (k as u64 * l / b.r() as u64) as usize);
    let rhs = num_traits::pow(
        target.radicand(),
        (j as u64 * l / target.r() as u64) as usize,
    );
    rational_perfect_power(&(lhs / rhs), l as u32)
}

fn embed(x: &AlgebraicScalar, target: &Arc<RootBase>) -> Option<AlgebraicScalar> {
    if x.base().same_field(target) {
        return x.lift_to(target).ok();
    }
    let mut out = AlgebraicScalar::zero_in(target);
    for (k, c) in x.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let (j, lambda) = (0..target.r())
            .find_map(|j| embed_power(x.base(), k as u32, target, j).map(|q| (j, q)))?;
        let term = AlgebraicScalar::monomial(target, c * lambda, j);
        out = out.checked_add(&term).ok()?;
    }
    Some(out)
}

/// Re-expresses all values over one common radical base.
///
/// Candidate bases are the bases of the inputs themselves, tried from the
/// largest degree down (integer radicands first); the first that represents
/// every input wins.
pub fn unify_scalars(xs: &[AlgebraicScalar]) -> Result<Vec<AlgebraicScalar>> {
    let mut candidates: Vec<Arc<RootBase>> = Vec::new();
    for x in xs {
        let x = collapse(x.clone());
        if !x.base().is_rational() && !candidates.iter().any(|c| c == x.base()) {
            candidates.push(x.base().clone());
        }
    }
    if candidates.is_empty() {
        return Ok(xs.iter().map(|x| collapse(x.clone())).collect());
    }
    candidates.sort_by(|a, b| {
        b.r()
            .cmp(&a.r())
            .then(a.s().cmp(b.s()))
            .then(a.t().cmp(b.t()))
    });
    for base in &candidates {
        let lifted: Option<Vec<_>> = xs.iter().map(|x| embed(x, base)).collect();
        if let Some(v) = lifted {
            return Ok(v);
        }
    }
    Err(Error::IncompatibleBase {
        left: candidates[0].to_string(),
        right: candidates[1..]
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(", "),
    })
}
