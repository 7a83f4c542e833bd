//! The pair (M, D), its derived shear parameters, conjugations, and exact
//! membership in the zero set of the Fourier transform.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::scalar::parse::unify_scalars;
use crate::scalar::{int_valuation, AlgebraicScalar, Rational, RootBase};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// p distinct integer digits, p prime.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitSet {
    p: u64,
    digits: Vec<(i64, i64)>,
}

impl DigitSet {
    pub fn new(digits: Vec<(i64, i64)>) -> Result<Self> {
        let p = digits.len() as u64;
        if !is_prime(p) {
            return Err(Error::InvalidDigits(format!(
                "{p} digits; the count must be prime"
            )));
        }
        for (i, d) in digits.iter().enumerate() {
            if digits[..i].contains(d) {
                return Err(Error::InvalidDigits(format!("repeated digit {d:?}")));
            }
        }
        Ok(DigitSet { p, digits })
    }

    /// Like [`DigitSet::new`] but also checks a declared prime.
    pub fn with_prime(p: u64, digits: Vec<(i64, i64)>) -> Result<Self> {
        let d = Self::new(digits)?;
        if d.p != p {
            return Err(Error::InvalidDigits(format!(
                "declared p = {p} but {} digits given",
                d.p
            )));
        }
        Ok(d)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn digits(&self) -> &[(i64, i64)] {
        &self.digits
    }

    pub fn as_vecs(&self) -> Vec<Vec2> {
        self.digits
            .iter()
            .map(|&(x, y)| Vec2::from_ints(x, y))
            .collect()
    }

    pub fn is_normalized(&self) -> bool {
        self.digits[0] == (0, 0) && self.digits[1].1 == 0 && self.digits[1].0 != 0
    }

    /// Back from exact vectors, when every entry is an integer.
    pub fn from_vecs(vs: &[Vec2]) -> Result<Self> {
        let mut out = Vec::with_capacity(vs.len());
        for v in vs {
            let (x, y) = v
                .as_rationals()
                .filter(|(x, y)| x.is_integer() && y.is_integer())
                .ok_or_else(|| Error::InvalidDigits(format!("non-integer digit {v}")))?;
            let conv = |q: Rational| {
                q.to_integer()
                    .to_i64()
                    .ok_or_else(|| Error::InvalidDigits("digit out of range".into()))
            };
            out.push((conv(x)?, conv(y)?));
        }
        DigitSet::new(out)
    }
}

impl fmt::Display for DigitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .digits
            .iter()
            .map(|(x, y)| format!("({x},{y})"))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `[[ρ₁⁻¹, c], [0, ρ₂⁻¹]]` with certified ρᵢ⁻¹ > 1, all entries over one base.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExpandingMatrix {
    rho1_inv: AlgebraicScalar,
    rho2_inv: AlgebraicScalar,
    c: AlgebraicScalar,
}

impl ExpandingMatrix {
    pub fn new(
        rho1_inv: AlgebraicScalar,
        c: AlgebraicScalar,
        rho2_inv: AlgebraicScalar,
    ) -> Result<Self> {
        let v = unify_scalars(&[rho1_inv, c, rho2_inv])?;
        let one = AlgebraicScalar::from_int(1);
        for (name, x) in [("rho1^-1", &v[0]), ("rho2^-1", &v[2])] {
            if x.cmp_value(&one)? != Ordering::Greater {
                return Err(Error::NotExpanding(format!("{name} = {x} is not > 1")));
            }
        }
        let [r1, c, r2]: [AlgebraicScalar; 3] = v.try_into().expect("three entries");
        Ok(ExpandingMatrix {
            rho1_inv: r1,
            rho2_inv: r2,
            c,
        })
    }

    pub fn from_rationals(rho1_inv: Rational, c: Rational, rho2_inv: Rational) -> Result<Self> {
        Self::new(rho1_inv.into(), c.into(), rho2_inv.into())
    }

    pub fn from_mat2(m: &Mat2) -> Result<Self> {
        if !m.c.is_zero() {
            return Err(Error::NotExpanding(
                "matrix must be upper triangular".into(),
            ));
        }
        Self::new(m.a.clone(), m.b.clone(), m.d.clone())
    }

    pub fn rho1_inv(&self) -> &AlgebraicScalar {
        &self.rho1_inv
    }

    pub fn rho2_inv(&self) -> &AlgebraicScalar {
        &self.rho2_inv
    }

    pub fn c(&self) -> &AlgebraicScalar {
        &self.c
    }

    pub fn rho1(&self) -> AlgebraicScalar {
        self.rho1_inv
            .inverse()
            .expect("expanding entries are nonzero")
    }

    pub fn rho2(&self) -> AlgebraicScalar {
        self.rho2_inv
            .inverse()
            .expect("expanding entries are nonzero")
    }

    pub fn base(&self) -> Arc<RootBase> {
        [&self.rho1_inv, &self.c, &self.rho2_inv]
            .iter()
            .map(|x| x.base().clone())
            .find(|b| !b.is_rational())
            .unwrap_or_else(|| self.rho1_inv.base().clone())
    }

    pub fn equal_rho(&self) -> bool {
        self.rho1_inv == self.rho2_inv
    }

    pub fn mat(&self) -> Mat2 {
        Mat2::new(
            self.rho1_inv.clone(),
            self.c.clone(),
            AlgebraicScalar::from_int(0),
            self.rho2_inv.clone(),
        )
    }

    /// M* = Mᵀ.
    pub fn adjoint(&self) -> Mat2 {
        self.mat().transpose()
    }
}

impl fmt::Display for ExpandingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.mat().fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MeasureInstance {
    pub m: ExpandingMatrix,
    pub d: DigitSet,
}

impl MeasureInstance {
    pub fn new(m: ExpandingMatrix, d: DigitSet) -> Self {
        MeasureInstance { m, d }
    }

    pub fn p(&self) -> u64 {
        self.d.p()
    }

    pub fn normalized(&self) -> bool {
        self.d.is_normalized()
    }
}

/// How [`normalize_digits`] moved the digits: `new[i] = old[permutation[i]] - translation`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalization {
    pub digits: DigitSet,
    pub translation: (i64, i64),
    pub permutation: Vec<usize>,
}

impl Normalization {
    pub fn is_identity(&self) -> bool {
        self.translation == (0, 0) && self.permutation.iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// Translate and reorder so that d₀ = 0 and d₁ = (k, 0), k ≠ 0.
///
/// Returns `None` when no translate has a second digit on the horizontal axis.
pub fn normalize_digits(d: &DigitSet) -> Option<Normalization> {
    let ds = d.digits();
    for (i, &origin) in ds.iter().enumerate() {
        let axis = ds
            .iter()
            .enumerate()
            .find(|&(j, &(x, y))| j != i && y == origin.1 && x != origin.0)
            .map(|(j, _)| j);
        let Some(j) = axis else { continue };
        let mut permutation = vec![i, j];
        permutation.extend((0..ds.len()).filter(|&m| m != i && m != j));
        let digits = permutation
            .iter()
            .map(|&m| (ds[m].0 - origin.0, ds[m].1 - origin.1))
            .collect();
        return Some(Normalization {
            digits: DigitSet::new(digits).expect("translate of a valid set"),
            translation: origin,
            permutation,
        });
    }
    None
}

/// (RMR⁻¹, RD).
pub fn conjugate(m: &Mat2, d: &[Vec2], r: &Mat2) -> Result<(Mat2, Vec<Vec2>)> {
    let r_inv = r.inverse()?;
    let m2 = r.mul(m).mul(&r_inv);
    let d2 = d.iter().map(|v| r.apply(v)).collect();
    Ok((m2, d2))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedQuantities {
    pub d11: i64,
    pub c_prime: Option<AlgebraicScalar>,
    pub c_double_prime: Option<AlgebraicScalar>,
    pub equal_rho: bool,
}

pub fn derive(inst: &MeasureInstance) -> Result<DerivedQuantities> {
    let m = &inst.m;
    if m.equal_rho() {
        return Ok(DerivedQuantities {
            d11: inst.d.digits()[1].0,
            c_prime: None,
            c_double_prime: None,
            equal_rho: true,
        });
    }
    if !inst.normalized() {
        return Err(Error::NotNormalized);
    }
    let d11 = inst.d.digits()[1].0;
    let gap = m.rho1_inv() - m.rho2_inv();
    let cpp = m.c().checked_div(&gap)?;
    let cp = cpp.scale(&Rational::new(BigInt::one(), BigInt::from(d11)));
    Ok(DerivedQuantities {
        d11,
        c_prime: Some(cp),
        c_double_prime: Some(cpp),
        equal_rho: false,
    })
}

/// ϑ_k, the upper-right entry of M⁻ᵏ.
fn theta_k(
    m: &ExpandingMatrix,
    k: u64,
    r1k: &AlgebraicScalar,
    r2k: &AlgebraicScalar,
) -> AlgebraicScalar {
    let (r1, r2) = (m.rho1(), m.rho2());
    if m.equal_rho() {
        let kk = Rational::from_integer(BigInt::from(k));
        -(m.c() * &r1k.scale(&kk) * &r1)
    } else {
        let num = m.c() * &r1 * &r2 * &(r1k - r2k);
        -(num.checked_div(&(&r1 - &r2)).expect("distinct rhos"))
    }
}

/// M⁻ᵏ = [[ρ₁ᵏ, ϑ_k], [0, ρ₂ᵏ]].
pub fn inverse_power(m: &ExpandingMatrix, k: u64) -> Mat2 {
    let r1k = m.rho1().pow(k);
    let r2k = m.rho2().pow(k);
    let th = theta_k(m, k, &r1k, &r2k);
    Mat2::new(r1k, th, AlgebraicScalar::from_int(0), r2k)
}

/// (M*)⁻ᵏξ = ja/p + n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroHit {
    pub k: u64,
    pub j: u64,
    pub n: (BigInt, BigInt),
}

#[derive(Clone, Debug)]
struct Powers {
    r1: AlgebraicScalar,
    r2: AlgebraicScalar,
    theta: AlgebraicScalar,
}

/// ρ₁ᵉ = R rational with its factorization, e minimal.
#[derive(Clone, Debug)]
struct Period {
    e: u64,
    primes: Vec<(u64, i64)>,
}

/// Exact membership in Z(μ̂) = ∪_k M*ᵏ ∪_j (ja/p + Z²).
///
/// Powers of M⁻¹ are cached, so one lattice serves many queries.
#[derive(Debug)]
pub struct ZeroLattice {
    m: ExpandingMatrix,
    p: u64,
    a: (i64, i64),
    a1_inv: u64,
    rho1: AlgebraicScalar,
    rho2: AlgebraicScalar,
    period: Option<Period>,
    cache: RwLock<Vec<Powers>>,
}

const TRIAL_BOUND: u64 = 1 << 20;

/// Trial-division factorization; `None` if a cofactor cannot be certified prime.
fn factor(n: &BigInt) -> Option<Vec<(u64, u32)>> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d: u64 = 2;
    while d < TRIAL_BOUND {
        let bd = BigInt::from(d);
        if &bd * &bd > n {
            break;
        }
        let (e, rest) = if n.is_multiple_of(&bd) {
            int_valuation(&n, d)
        } else {
            (0, n.clone())
        };
        if e > 0 {
            out.push((d, e as u32));
            n = rest;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > BigInt::one() {
        let bd = BigInt::from(TRIAL_BOUND);
        if &bd * &bd <= n {
            return None;
        }
        out.push((n.to_u64()?, 1));
    }
    Some(out)
}

fn rational_valuation(q: &Rational, p: u64) -> i64 {
    int_valuation(q.numer(), p).0 - int_valuation(q.denom(), p).0
}

fn inv_mod(a: u64, p: u64) -> u64 {
    (1..p)
        .find(|x| (a * x) % p == 1)
        .expect("p prime and a coprime to p")
}

impl ZeroLattice {
    pub fn new(inst: &MeasureInstance, a: (i64, i64)) -> Self {
        let p = inst.p();
        let m = inst.m.clone();
        let rho1 = m.rho1();
        let rho2 = m.rho2();
        let a1_inv = inv_mod(a.0.rem_euclid(p as i64) as u64, p);
        let period = Self::find_period(&rho1);
        let zero = AlgebraicScalar::from_int(0);
        let one = AlgebraicScalar::from_int(1);
        let cache = RwLock::new(vec![Powers {
            r1: one.clone(),
            r2: one,
            theta: zero,
        }]);
        ZeroLattice {
            m,
            p,
            a,
            a1_inv,
            rho1,
            rho2,
            period,
            cache,
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn a(&self) -> (i64, i64) {
        self.a
    }

    fn find_period(rho1: &AlgebraicScalar) -> Option<Period> {
        let r = rho1.base().r() as u64;
        let mut power = rho1.clone();
        for e in 1..=r {
            if let Some(ratio) = power.as_rational() {
                let mut primes = Vec::new();
                for (q, _) in factor(ratio.numer())?
                    .into_iter()
                    .chain(factor(ratio.denom())?)
                {
                    primes.push((q, rational_valuation(&ratio, q)));
                }
                return Some(Period { e, primes });
            }
            power = &power * rho1;
        }
        None
    }

    fn powers(&self, k: u64) -> Powers {
        {
            let cache = self.cache.read().expect("cache lock");
            if let Some(p) = cache.get(k as usize) {
                return p.clone();
            }
        }
        let mut cache = self.cache.write().expect("cache lock");
        while cache.len() <= k as usize {
            let last = cache.last().expect("seeded");
            let r1 = &last.r1 * &self.rho1;
            let r2 = &last.r2 * &self.rho2;
            let theta = &(&self.rho1 * &last.theta) - &(self.m.c() * &self.rho1 * &r2);
            cache.push(Powers { r1, r2, theta });
        }
        cache[k as usize].clone()
    }

    /// M⁻ᵏ from the cache.
    pub fn inverse_power(&self, k: u64) -> Mat2 {
        let pw = self.powers(k);
        Mat2::new(pw.r1, pw.theta, AlgebraicScalar::from_int(0), pw.r2)
    }

    /// (M*)⁻ᵏξ.
    pub fn pull_back(&self, xi: &Vec2, k: u64) -> Vec2 {
        let pw = self.powers(k);
        Vec2::new(&pw.r1 * &xi.x, &(&pw.theta * &xi.x) + &(&pw.r2 * &xi.y))
    }

    fn check_at(&self, xi: &Vec2, k: u64) -> Option<ZeroHit> {
        let pw = self.powers(k);
        let f = (&pw.r1 * &xi.x).as_rational()?;
        let pf = &f * Rational::from_integer(BigInt::from(self.p));
        if !pf.is_integer() {
            return None;
        }
        let pb = BigInt::from(self.p);
        let res = pf
            .to_integer()
            .mod_floor(&pb)
            .to_u64()
            .expect("residue below p");
        if res == 0 {
            return None;
        }
        let j = (res * self.a1_inv) % self.p;
        let g = (&(&pw.theta * &xi.x) + &(&pw.r2 * &xi.y)).as_rational()?;
        let jp = |ai: i64| Rational::new(BigInt::from(j as i64 * ai), pb.clone());
        let n1 = f - jp(self.a.0);
        let n2 = g - jp(self.a.1);
        if !n2.is_integer() {
            return None;
        }
        debug_assert!(n1.is_integer());
        Some(ZeroHit {
            k,
            j,
            n: (n1.to_integer(), n2.to_integer()),
        })
    }

    /// Depths k ≤ kmax at which the first coordinate can satisfy the
    /// valuation conditions, ascending; `None` means scan every depth.
    fn candidate_depths(&self, x1: &AlgebraicScalar, kmax: u64) -> Option<Vec<u64>> {
        let period = self.period.as_ref()?;
        let e = period.e;
        let mut ks = Vec::new();
        for b in 1..=e.min(kmax) {
            let Some(f) = (&self.powers(b).r1 * x1).as_rational() else {
                continue;
            };
            let mut den = f.denom().clone();
            for &(q, _) in period.primes.iter().chain(std::iter::once(&(self.p, 0))) {
                den = int_valuation(&den, q).1;
            }
            if !den.is_one() {
                continue;
            }
            let mut lo: i64 = 0;
            let mut hi: i64 = ((kmax - b) / e) as i64;
            let mut w_p = 0;
            for &(q, w) in &period.primes {
                if q == self.p {
                    w_p = w;
                    continue;
                }
                let v = rational_valuation(&f, q);
                // need v + m·w ≥ 0
                if w > 0 {
                    lo = lo.max(Integer::div_ceil(&-v, &w));
                } else if v < 0 {
                    hi = -1;
                } else {
                    hi = hi.min(Integer::div_floor(&v, &-w));
                }
            }
            // need v_p + m·w_p = -1
            let vp = rational_valuation(&f, self.p);
            if w_p == 0 {
                if vp != -1 {
                    continue;
                }
            } else {
                let need = -1 - vp;
                if need % w_p != 0 {
                    continue;
                }
                let m = need / w_p;
                lo = lo.max(m);
                hi = hi.min(m);
            }
            if lo <= hi {
                ks.extend((lo..=hi).map(|m| b + e * m as u64));
            }
        }
        ks.sort_unstable();
        Some(ks)
    }

    /// Least k ≤ kmax with (M*)⁻ᵏξ ∈ ja/p + Z², j ∈ {1..p-1}.
    pub fn member(&self, xi: &Vec2, kmax: u64) -> Option<ZeroHit> {
        if xi.x.is_zero() {
            return None;
        }
        match self.candidate_depths(&xi.x, kmax) {
            Some(ks) => ks.into_iter().find_map(|k| self.check_at(xi, k)),
            None => (1..=kmax).find_map(|k| self.check_at(xi, k)),
        }
    }
}

/// One-shot form of [`ZeroLattice::member`].
pub fn zero_lattice_member(
    xi: &Vec2,
    inst: &MeasureInstance,
    a: (i64, i64),
    kmax: u64,
) -> Option<ZeroHit> {
    ZeroLattice::new(inst, a).member(xi, kmax)
}
