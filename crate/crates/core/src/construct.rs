//! Explicit frequency families, Hadamard triples, spectrum truncations and
//! exact bi-zero verification.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::classify::{
    classify_orthogonality, classify_spectrality, Branch, OrthoOutcome, SpectralOutcome,
};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::model::{derive, is_prime, DigitSet, ExpandingMatrix, MeasureInstance, ZeroLattice};
use crate::numerics::FourierEvaluator;
use crate::scalar::{int_valuation, AlgebraicScalar, Rational};
use crate::zeros::ZeroStructureReport;

/// Largest point count any constructor will materialize.
pub const MAX_POINTS: usize = 1_000_000;

/// Largest common denominator the exact Hadamard check will reduce over.
pub const MAX_DENOMINATOR: u64 = 1 << 12;

fn show_points<S: Serializer>(points: &[Vec2], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(points.iter().map(|v| v.to_string()))
}

/// A finite exact frequency set with its origin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrequencySet {
    #[serde(serialize_with = "show_points")]
    pub points: Vec<Vec2>,
    pub provenance: String,
    /// (M*)-depth reached by the construction; bi-zero checks use depth + 2.
    pub depth: u64,
}

impl FrequencySet {
    pub fn new(points: Vec<Vec2>, provenance: impl Into<String>, depth: u64) -> Self {
        FrequencySet {
            points,
            provenance: provenance.into(),
            depth,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, v: &Vec2) -> bool {
        self.points.contains(v)
    }

    pub fn default_kmax(&self) -> u64 {
        self.depth + 2
    }
}

// ---------------------------------------------------------------------------
// Hadamard triples

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum HadamardMode {
    Exact,
    Numeric { tol: f64 },
}

/// One off-diagonal entry of HH*: Σ_ℓ e^{2πi⟨M⁻¹(b_i − b_j), ℓ⟩}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSum {
    pub rows: (usize, usize),
    /// Common denominator of the reduced exponents (exact mode).
    pub denominator: Option<u64>,
    pub modulus: f64,
    pub vanishes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HadamardCertificate {
    pub unitary: bool,
    pub mode: HadamardMode,
    pub pairs: Vec<PairSum>,
    /// ‖HH* − I‖_max.
    pub deviation: f64,
}

impl HadamardCertificate {
    pub fn first_failure(&self) -> Option<&PairSum> {
        self.pairs.iter().find(|p| !p.vanishes)
    }
}

fn frac(q: &Rational) -> Rational {
    q - q.floor()
}

fn mobius(mut n: u64) -> i32 {
    let mut sign = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

fn overflow() -> Error {
    Error::LimitExceeded("cyclotomic reduction overflowed i128".into())
}

/// Φ_N = Π_{d | N} (x^d − 1)^{μ(N/d)}, coefficients low to high.
fn cyclotomic(n: u64) -> Result<Vec<i128>> {
    let divisors: Vec<u64> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    let mut poly = vec![1i128];
    for &d in &divisors {
        if mobius(n / d) == 1 {
            let d = d as usize;
            let mut next = vec![0i128; poly.len() + d];
            for (i, &c) in poly.iter().enumerate() {
                next[i + d] = next[i + d].checked_add(c).ok_or_else(overflow)?;
                next[i] = next[i].checked_sub(c).ok_or_else(overflow)?;
            }
            poly = next;
        }
    }
    for &d in &divisors {
        if mobius(n / d) == -1 {
            // Exact division by x^d − 1.
            let d = d as usize;
            let mut rem = poly.clone();
            let mut q = vec![0i128; poly.len() - d];
            for i in (d..rem.len()).rev() {
                let c = rem[i];
                q[i - d] = c;
                rem[i - d] = rem[i - d].checked_add(c).ok_or_else(overflow)?;
                rem[i] = 0;
            }
            debug_assert!(rem.iter().all(|c| *c == 0));
            poly = q;
        }
    }
    Ok(poly)
}

/// Σ_i ζ_n^{e_i} = 0 exactly, ζ_n = e^{2πi/n}.
fn root_sum_vanishes(exps: &[u64], n: u64) -> Result<bool> {
    if n == 1 {
        return Ok(exps.is_empty());
    }
    if is_prime(n) {
        // 1 + ζ + … + ζ^{n−1} spans the only relation over a prime modulus.
        let mut counts = vec![0usize; n as usize];
        for &e in exps {
            counts[e as usize] += 1;
        }
        return Ok(counts.iter().all(|&c| c == counts[0]));
    }
    let phi = cyclotomic(n)?;
    let deg = phi.len() - 1;
    let mut rem = vec![0i128; n as usize];
    for &e in exps {
        rem[e as usize] += 1;
    }
    for i in (deg..rem.len()).rev() {
        let c = rem[i];
        if c == 0 {
            continue;
        }
        for (j, &f) in phi.iter().enumerate() {
            let v = c.checked_mul(f).ok_or_else(overflow)?;
            rem[i - deg + j] = rem[i - deg + j].checked_sub(v).ok_or_else(overflow)?;
        }
    }
    Ok(rem.iter().all(|c| *c == 0))
}

fn phase_sum(phases: &[f64]) -> (f64, f64) {
    phases.iter().fold((0.0, 0.0), |(re, im), t| {
        let a = std::f64::consts::TAU * t;
        (re + a.cos(), im + a.sin())
    })
}

/// Decide whether (1/√N)[e^{2πi⟨M⁻¹b, ℓ⟩}] is unitary.
pub fn hadamard_check(
    m: &Mat2,
    b: &[Vec2],
    l: &[Vec2],
    mode: HadamardMode,
) -> Result<HadamardCertificate> {
    if b.len() != l.len() || b.is_empty() {
        return Err(Error::InvalidDigits(format!(
            "#B = {} and #L = {} must agree and be positive",
            b.len(),
            l.len()
        )));
    }
    let m_inv = m.inverse()?;
    let n = l.len() as f64;
    let mut pairs = Vec::new();
    let mut deviation: f64 = 0.0;
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            let v = m_inv.apply(&b[i].sub(&b[j]));
            let exps: Vec<AlgebraicScalar> = l.iter().map(|ell| v.dot(ell)).collect();
            let pair = match mode {
                HadamardMode::Exact => {
                    let mut fr = Vec::with_capacity(exps.len());
                    for e in &exps {
                        let q = e
                            .as_rational()
                            .ok_or_else(|| Error::IrrationalExponent(e.to_string()))?;
                        fr.push(frac(&q));
                    }
                    let den = fr.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
                    let den = den
                        .to_u64()
                        .filter(|d| *d <= MAX_DENOMINATOR)
                        .ok_or_else(|| {
                            Error::LimitExceeded(format!(
                                "exponent denominator {den} > {MAX_DENOMINATOR}"
                            ))
                        })?;
                    let ints: Vec<u64> = fr
                        .iter()
                        .map(|q| {
                            (q * Rational::from_integer(BigInt::from(den)))
                                .to_integer()
                                .to_u64()
                                .expect("in range")
                        })
                        .collect();
                    let vanishes = root_sum_vanishes(&ints, den)?;
                    let phases: Vec<f64> = ints.iter().map(|k| *k as f64 / den as f64).collect();
                    let (re, im) = phase_sum(&phases);
                    let modulus = if vanishes { 0.0 } else { re.hypot(im) };
                    PairSum {
                        rows: (i, j),
                        denominator: Some(den),
                        modulus,
                        vanishes,
                    }
                }
                HadamardMode::Numeric { tol } => {
                    let phases: Vec<f64> = exps.iter().map(|e| e.frac_f64()).collect();
                    let (re, im) = phase_sum(&phases);
                    let modulus = re.hypot(im);
                    PairSum {
                        rows: (i, j),
                        denominator: None,
                        modulus,
                        vanishes: modulus / n <= tol,
                    }
                }
            };
            deviation = deviation.max(pair.modulus / n);
            pairs.push(pair);
        }
    }
    let unitary = pairs.iter().all(|p| p.vanishes);
    Ok(HadamardCertificate {
        unitary,
        mode,
        pairs,
        deviation,
    })
}

/// A conjugated integer model (M₁, D₁) with a spectrum generator L₁.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HadamardTriple {
    #[serde(serialize_with = "show_mat")]
    pub m: Mat2,
    pub b: Vec<(i64, i64)>,
    #[serde(serialize_with = "show_points")]
    pub l: Vec<Vec2>,
    /// R with M₁ = RMR⁻¹, D₁ = RD; spectra of μ_{M,D} are Rᵀ times spectra of μ_{M₁,D₁}.
    #[serde(serialize_with = "show_mat")]
    pub conjugation: Mat2,
    pub branch: Branch,
    pub verified: bool,
}

fn show_mat<S: Serializer>(m: &Mat2, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&m.to_string())
}

impl HadamardTriple {
    pub fn digit_vecs(&self) -> Vec<Vec2> {
        self.b.iter().map(|&(x, y)| Vec2::from_ints(x, y)).collect()
    }

    pub fn check(&self, mode: HadamardMode) -> Result<HadamardCertificate> {
        hadamard_check(&self.m, &self.digit_vecs(), &self.l, mode)
    }
}

fn spectral_branch(
    inst: &MeasureInstance,
    report: &ZeroStructureReport,
) -> Result<(Branch, (i64, i64))> {
    let verdict = classify_spectrality(inst, report);
    match verdict.outcome {
        SpectralOutcome::Spectral { branch } => {
            Ok((branch, report.a().expect("spectral verdict needs a")))
        }
        other => Err(Error::WrongBranch(format!(
            "instance is not spectral: {other:?}"
        ))),
    }
}

fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::LimitExceeded(format!("{x} does not fit in 64 bits")))
}

fn pow_big(p: u64, e: i64) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

fn branch_iii_triple(inst: &MeasureInstance, a: (i64, i64)) -> Result<HadamardTriple> {
    let p = inst.p();
    let t = inst
        .m
        .rho1_inv()
        .as_integer()
        .expect("branch iii has integer rho^-1");
    let c = inst.m.c().as_rational().expect("branch iii has rational c");
    let a_prime = &c / Rational::from_integer(t.clone());
    let (v, u) = (a_prime.numer().clone(), a_prime.denom().clone());
    let (l1, u_prime) = int_valuation(&u, p);
    let pl = pow_big(p, l1);
    let big = |x: &BigInt| AlgebraicScalar::from_bigint(x.clone());
    let conj = Mat2::diag(big(&u_prime), AlgebraicScalar::from_int(1));
    let m1 = Mat2::new(
        big(&t),
        AlgebraicScalar::from_rational(&c * Rational::from_integer(u_prime.clone())),
        AlgebraicScalar::from_int(0),
        big(&t),
    );
    let up = to_i64(&u_prime)?;
    let b: Vec<(i64, i64)> = inst
        .d
        .digits()
        .iter()
        .map(|&(x, y)| x.checked_mul(up).map(|x| (x, y)))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::LimitExceeded("conjugated digits overflow".into()))?;
    let (a1, a2) = (BigInt::from(a.0), BigInt::from(a.1));
    let pb = BigInt::from(p);
    let gen = Vec2::from_rationals(
        Rational::new(&t * &a1, pb.clone()),
        Rational::new(&v * &t * &a1 + &pl * &u_prime * &t * &a2, &pl * &pb),
    );
    let l = (0..p as i64)
        .map(|k| gen.scale_rational(&Rational::from_integer(BigInt::from(k))))
        .collect();
    let mut triple = HadamardTriple {
        m: m1,
        b,
        l,
        conjugation: conj,
        branch: Branch::III,
        verified: false,
    };
    triple.verified = triple.check(HadamardMode::Exact)?.unitary;
    Ok(triple)
}

fn branch_i_triple(inst: &MeasureInstance) -> Result<HadamardTriple> {
    let p = inst.p();
    let dq = derive(inst)?;
    let cpp = dq
        .c_double_prime
        .and_then(|x| x.as_rational())
        .expect("branch i has rational c''");
    let (c1, c2) = (to_i64(cpp.numer())?, to_i64(cpp.denom())?);
    let t = inst
        .m
        .rho1_inv()
        .as_integer()
        .expect("branch i has integer rho1^-1");
    let conj = Mat2::from_ints([[c2, c1], [0, 1]]);
    let m1 = Mat2::diag(
        AlgebraicScalar::from_bigint(t.clone()),
        inst.m.rho2_inv().clone(),
    );
    let b: Vec<(i64, i64)> = inst
        .d
        .digits()
        .iter()
        .map(|&(x, y)| {
            c2.checked_mul(x)
                .and_then(|u| c1.checked_mul(y).and_then(|w| u.checked_add(w)))
                .map(|u| (u, y))
        })
        .collect::<Option<_>>()
        .ok_or_else(|| Error::LimitExceeded("conjugated digits overflow".into()))?;
    let step = Rational::new(t, BigInt::from(p));
    let l = (0..p as i64)
        .map(|k| {
            Vec2::from_rationals(
                &step * Rational::from_integer(BigInt::from(k)),
                Rational::zero(),
            )
        })
        .collect();
    let mut triple = HadamardTriple {
        m: m1,
        b,
        l,
        conjugation: conj,
        branch: Branch::I,
        verified: false,
    };
    triple.verified = triple.check(HadamardMode::Exact)?.unitary;
    Ok(triple)
}

/// The explicit triple behind a Spectral verdict (branches i and iii).
pub fn spectral_hadamard_triple(
    inst: &MeasureInstance,
    report: &ZeroStructureReport,
) -> Result<HadamardTriple> {
    match spectral_branch(inst, report)? {
        (Branch::III, a) => branch_iii_triple(inst, a),
        (Branch::I, _) => branch_i_triple(inst),
        (Branch::II, _) => Err(Error::WrongBranch(
            "branch ii has no explicit Hadamard triple".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Orthogonal families

struct RootParams {
    t: BigInt,
    s: BigInt,
    r: u32,
    u: BigInt,
}

fn root_params(
    inst: &MeasureInstance,
    report: &ZeroStructureReport,
    want: OrthoOutcome,
) -> Result<RootParams> {
    let verdict = classify_orthogonality(inst, report);
    if verdict.outcome != want {
        return Err(Error::WrongBranch(format!(
            "needs {want:?}, instance is {:?}",
            verdict.outcome
        )));
    }
    let base = inst
        .m
        .rho1_inv()
        .monomial_root_form()?
        .expect("verdict implies a root form");
    let kappa = (inst.m.c() * &inst.m.rho1())
        .as_rational()
        .expect("verdict implies rational kappa");
    Ok(RootParams {
        t: base.t().clone(),
        s: base.s().clone(),
        r: base.r(),
        u: kappa.denom().clone(),
    })
}

fn a_over_p(a: (i64, i64), p: u64, scale: &Rational) -> Vec2 {
    let q = scale / Rational::from_integer(BigInt::from(p));
    Vec2::from_rationals(
        &q * Rational::from_integer(BigInt::from(a.0)),
        &q * Rational::from_integer(BigInt::from(a.1)),
    )
}

/// {0} ∪ {t^{puℓ} a/p : ℓ = 1..n}.
pub fn infinite_orthogonal_family(
    inst: &MeasureInstance,
    report: &ZeroStructureReport,
    n: u64,
) -> Result<FrequencySet> {
    let rp = root_params(inst, report, OrthoOutcome::InfiniteOrthogonalSet)?;
    let a = report.a().expect("verdict implies a");
    let p = inst.p();
    let pu = to_i64(&(&rp.u * BigInt::from(p)))? as u64;
    let step = num_traits::pow(rp.t.clone(), pu as usize);
    let mut points = vec![Vec2::zero()];
    let mut scale = BigInt::one();
    for _ in 0..n {
        scale *= &step;
        points.push(a_over_p(a, p, &Rational::from_integer(scale.clone())));
    }
    let depth = rp.r as u64 * pu * n;
    Ok(FrequencySet::new(
        points,
        format!("infinite_orthogonal_family(N={n}, pu={pu})"),
        depth,
    ))
}

/// (M*)^k {0, a/p, …, (p−1)a/p}.
pub fn p_element_family(inst: &MeasureInstance, a: (i64, i64), k: u64) -> FrequencySet {
    let p = inst.p();
    let mk = inst.m.adjoint().pow(k);
    let points = (0..p)
        .map(|j| mk.apply(&a_over_p(a, p, &Rational::from_integer(BigInt::from(j)))))
        .collect();
    FrequencySet::new(points, format!("p_element_family(k={k})"), k)
}

/// {(M*)^{purn} (t^{pu(N−n)} s₁^{pu(n−1)}/p) a : n = 1..N}, without 0.
pub fn graded_family(
    inst: &MeasureInstance,
    report: &ZeroStructureReport,
    n_level: u64,
) -> Result<FrequencySet> {
    let rp = root_params(inst, report, OrthoOutcome::ArbitraryFiniteNumbers)?;
    let a = report.a().expect("verdict implies a");
    let p = inst.p();
    let pu = to_i64(&(&rp.u * BigInt::from(p)))? as u64;
    let (_, s1) = int_valuation(&rp.s, p);
    let stride = pu * rp.r as u64;
    let mstar = inst.m.adjoint();
    let step = mstar.pow(stride);
    let mut mpow = step.clone();
    let mut points = Vec::with_capacity(n_level as usize);
    for n in 1..=n_level {
        let coeff = num_traits::pow(rp.t.clone(), (pu * (n_level - n)) as usize)
            * num_traits::pow(s1.clone(), (pu * (n - 1)) as usize);
        points.push(mpow.apply(&a_over_p(a, p, &Rational::from_integer(coeff))));
        mpow = mpow.mul(&step);
    }
    let depth = 2 * stride * n_level;
    Ok(FrequencySet::new(
        points,
        format!("graded_family(N={n_level}, pur={stride})"),
        depth,
    ))
}

// ---------------------------------------------------------------------------
// Spectrum truncations

/// Representative of ℓ + M₁*Z² maximizing |μ̂₁((M₁*)⁻¹ℓ′)|² in a box; ties by norm, then lexicographic.
fn best_representative(
    eval: &FourierEvaluator,
    m1s: [[i64; 2]; 2],
    m1s_inv: &Mat2,
    ell: (i64, i64),
) -> Vec2 {
    let t = m1s[0][0].abs().max(m1s[1][1].abs());
    let radius = 14.max(t);
    let mut best: Option<(f64, i64, (i64, i64))> = None;
    let z1_lo = (-radius - ell.0).div_euclid(m1s[0][0]) - 1;
    let z1_hi = (radius - ell.0).div_euclid(m1s[0][0]) + 1;
    for z1 in z1_lo..=z1_hi {
        let x = ell.0 + m1s[0][0] * z1;
        if x.abs() > radius {
            continue;
        }
        let base = ell.1 + m1s[1][0] * z1;
        let lo = (-radius - base).div_euclid(m1s[1][1]) - 1;
        let hi = (radius - base).div_euclid(m1s[1][1]) + 1;
        for z2 in lo..=hi {
            let y = base + m1s[1][1] * z2;
            if y.abs() > radius {
                continue;
            }
            let v = Vec2::from_ints(x, y);
            let val = eval.mu_hat(&m1s_inv.apply(&v), 1e-13).value.norm_sqr();
            let norm = x * x + y * y;
            let better = match &best {
                None => true,
                Some((bv, bn, bxy)) => {
                    if (val - bv).abs() > 1e-12 {
                        val > *bv
                    } else {
                        (norm, (x, y)).cmp(&(*bn, *bxy)) == Ordering::Less
                    }
                }
            };
            if better {
                best = Some((val, norm, (x, y)));
            }
        }
    }
    best.map(|(_, _, (x, y))| Vec2::from_ints(x, y))
        .unwrap_or_else(|| Vec2::from_ints(ell.0, ell.1))
}

fn int_pair(v: &Vec2) -> Option<(i64, i64)> {
    let (x, y) = v.as_rationals()?;
    if !x.is_integer() || !y.is_integer() {
        return None;
    }
    Some((x.to_integer().to_i64()?, y.to_integer().to_i64()?))
}

fn int_matrix(m: &Mat2) -> Option<[[i64; 2]; 2]> {
    let q = m.as_rationals()?;
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            if !q[i][j].is_integer() {
                return None;
            }
            out[i][j] = q[i][j].to_integer().to_i64()?;
        }
    }
    Some(out)
}

/// L′ for branch iii: 0 plus the δ-maximizing representative of each nonzero ℓ.
pub fn truncation_generators(triple: &HadamardTriple) -> Result<Vec<Vec2>> {
    let m1s = triple.m.transpose();
    let (Some(ints), true) = (int_matrix(&m1s), triple.branch == Branch::III) else {
        return Ok(triple.l.clone());
    };
    if ints[0][0] == 0 || ints[1][1] == 0 {
        return Ok(triple.l.clone());
    }
    let inst1 = MeasureInstance::new(
        ExpandingMatrix::from_mat2(&triple.m)?,
        DigitSet::new(triple.b.clone())?,
    );
    let eval = FourierEvaluator::new(&inst1, None);
    let m1s_inv = m1s.inverse()?;
    Ok(triple
        .l
        .iter()
        .map(|ell| match int_pair(ell) {
            Some((0, 0)) => Vec2::zero(),
            Some(e) => best_representative(&eval, ints, &m1s_inv, e),
            None => ell.clone(),
        })
        .collect())
}

fn check_count(p: u64, n: u64) -> Result<()> {
    let ok = (p as f64).powi(n as i32) <= MAX_POINTS as f64;
    if ok {
        Ok(())
    } else {
        Err(Error::LimitExceeded(format!(
            "{p}^{n} points exceed {MAX_POINTS}"
        )))
    }
}

/// Σ_{k<n} A^k G, ordered so that level n−1 is a prefix of level n.
fn digit_sums(a: &Mat2, gens: &[Vec2], n: u64) -> Vec<Vec2> {
    let mut out = vec![Vec2::zero()];
    let mut ak = Mat2::identity();
    for _ in 0..n {
        let shifted: Vec<Vec2> = gens.iter().map(|g| ak.apply(g)).collect();
        let prev = out.clone();
        for g in shifted.iter().skip(1) {
            out.extend(prev.iter().map(|x| x.add(g)));
        }
        ak = ak.mul(a);
    }
    out
}

/// A p^n-point spectrum of the level-n truncation μ_n, nested in n.
pub fn spectrum_truncation(
    inst: &MeasureInstance,
    report: &ZeroStructureReport,
    n: u64,
) -> Result<FrequencySet> {
    let triple = spectral_hadamard_triple(inst, report)?;
    check_count(inst.p(), n)?;
    let back = triple.conjugation.transpose();
    let points = match triple.branch {
        Branch::III => {
            let gens = truncation_generators(&triple)?;
            digit_sums(&triple.m.transpose(), &gens, n)
                .iter()
                .map(|v| back.apply(v))
                .collect()
        }
        Branch::I => {
            let t = triple.m.a.clone();
            let scalar = Mat2::diag(t.clone(), t);
            digit_sums(&scalar, &triple.l, n)
                .iter()
                .map(|v| back.apply(v))
                .collect()
        }
        Branch::II => unreachable!("no triple for branch ii"),
    };
    Ok(FrequencySet::new(
        points,
        format!("spectrum_truncation(n={n}, branch={:?})", triple.branch),
        n,
    ))
}

// ---------------------------------------------------------------------------
// Bi-zero verification

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FailingPair {
    pub i: usize,
    pub j: usize,
    pub difference: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BizeroReport {
    pub pass: bool,
    pub pairs_checked: usize,
    pub kmax: u64,
    pub failure: Option<FailingPair>,
}

/// (Λ − Λ) \ {0} ⊂ Z(μ̂), each difference located at some depth ≤ kmax.
pub fn verify_bizero(
    inst: &MeasureInstance,
    set: &FrequencySet,
    a: (i64, i64),
    kmax: u64,
) -> BizeroReport {
    let lattice = ZeroLattice::new(inst, a);
    verify_with(&lattice, &set.points, kmax)
}

pub fn verify_with(lattice: &ZeroLattice, points: &[Vec2], kmax: u64) -> BizeroReport {
    let pairs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|i| (i + 1..points.len()).map(move |j| (i, j)))
        .collect();
    let failure = pairs.par_iter().find_map_first(|&(i, j)| {
        let diff = points[j].sub(&points[i]);
        if diff.is_zero() {
            return Some(FailingPair {
                i,
                j,
                difference: diff.to_string(),
                reason: "repeated point".into(),
            });
        }
        match lattice.member(&diff, kmax) {
            Some(_) => None,
            None => Some(FailingPair {
                i,
                j,
                difference: diff.to_string(),
                reason: format!("not in (M*)^k(ja/p + Z^2) for any k <= {kmax}"),
            }),
        }
    });
    BizeroReport {
        pass: failure.is_none(),
        pairs_checked: pairs.len(),
        kmax,
        failure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{grid_scan, Window};
    use crate::scalar::parse::parse_scalar_expr;
    use crate::scalar::rat;
    use crate::zeros::{analyze_zero_structure, ScanConfig};

    fn d2() -> DigitSet {
        DigitSet::new(vec![(0, 0), (1, 0), (0, 1)]).unwrap()
    }

    fn d63() -> DigitSet {
        DigitSet::new(vec![(0, 0), (1, 0), (1, -1), (2, -1), (2, -2)]).unwrap()
    }

    fn inst(m: [&str; 3], d: DigitSet) -> MeasureInstance {
        let s = |x: &str| parse_scalar_expr(x).unwrap();
        MeasureInstance::new(ExpandingMatrix::new(s(m[0]), s(m[1]), s(m[2])).unwrap(), d)
    }

    fn report(i: &MeasureInstance) -> ZeroStructureReport {
        analyze_zero_structure(
            &i.d,
            &ScanConfig {
                resolution: 64,
                refinements: 3,
                tol: 1e-9,
            },
        )
    }

    fn q(n: i64, d: i64) -> Vec2 {
        Vec2::from_rationals(rat(n, d), rat(0, 1))
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic(1).unwrap(), vec![-1, 1]);
        assert_eq!(cyclotomic(4).unwrap(), vec![1, 0, 1]);
        assert_eq!(cyclotomic(6).unwrap(), vec![1, -1, 1]);
        assert_eq!(cyclotomic(12).unwrap(), vec![1, 0, -1, 0, 1]);
        let phi105 = cyclotomic(105).unwrap();
        assert_eq!(phi105.len(), 49);
        assert_eq!(phi105.iter().filter(|c| **c == -2).count(), 2);
    }

    #[test]
    fn vanishing_root_sums() {
        assert!(root_sum_vanishes(&[0, 1, 2], 3).unwrap());
        assert!(!root_sum_vanishes(&[0, 1, 1], 3).unwrap());
        assert!(root_sum_vanishes(&[0, 3], 6).unwrap());
        // 1 + ζ₆² + ζ₆⁴ and ζ₆ + ζ₆³ + ζ₆⁵ vanish; their mix does not.
        assert!(root_sum_vanishes(&[0, 2, 4, 1, 4], 6).unwrap());
        assert!(!root_sum_vanishes(&[0, 2, 5], 6).unwrap());
        assert!(root_sum_vanishes(&[0, 1, 2, 3], 4).unwrap());
        assert!(!root_sum_vanishes(&[0, 1], 4).unwrap());
    }

    #[test]
    fn hadamard_example_triple() {
        let m1 = Mat2::from_ints([[6, 6], [0, 6]]);
        let b = [(0, 0), (8, 0), (0, 1)].map(|(x, y)| Vec2::from_ints(x, y));
        let l = [(0, 0), (2, 34), (4, 68)].map(|(x, y)| Vec2::from_ints(x, y));
        let cert = hadamard_check(&m1, &b, &l, HadamardMode::Exact).unwrap();
        assert!(cert.unitary);
        assert!(cert.pairs.iter().all(|p| p.denominator == Some(3)));
        let num = hadamard_check(&m1, &b, &l, HadamardMode::Numeric { tol: 1e-12 }).unwrap();
        assert!(num.unitary && num.deviation < 1e-12);

        let bad = [(0, 0), (2, 33), (4, 68)].map(|(x, y)| Vec2::from_ints(x, y));
        let cert = hadamard_check(&m1, &b, &bad, HadamardMode::Exact).unwrap();
        assert!(!cert.unitary);
        assert!(cert.first_failure().is_some());
        assert!(
            !hadamard_check(&m1, &b, &bad, HadamardMode::Numeric { tol: 1e-9 })
                .unwrap()
                .unitary
        );

        let one = [Vec2::zero()];
        assert!(
            hadamard_check(
                &Mat2::from_ints([[2, 0], [0, 2]]),
                &one,
                &one,
                HadamardMode::Exact
            )
            .unwrap()
            .unitary
        );
        assert!(hadamard_check(&m1, &b, &one, HadamardMode::Exact).is_err());
    }

    #[test]
    fn hadamard_irrational_exponents_need_numeric_mode() {
        let m = Mat2::diag(
            parse_scalar_expr("(2)^(1/2)").unwrap(),
            AlgebraicScalar::from_int(2),
        );
        let b = [Vec2::zero(), Vec2::from_ints(1, 0)];
        let l = [Vec2::zero(), Vec2::from_ints(1, 0)];
        assert!(matches!(
            hadamard_check(&m, &b, &l, HadamardMode::Exact),
            Err(Error::IrrationalExponent(_))
        ));
        assert!(hadamard_check(&m, &b, &l, HadamardMode::Numeric { tol: 1e-9 }).is_ok());
    }

    #[test]
    fn triple_for_example_61() {
        let i = inst(["6", "3/4", "6"], d2());
        let t = spectral_hadamard_triple(&i, &report(&i)).unwrap();
        assert_eq!(t.m, Mat2::from_ints([[6, 6], [0, 6]]));
        assert_eq!(t.b, vec![(0, 0), (8, 0), (0, 1)]);
        assert_eq!(
            t.l,
            vec![
                Vec2::from_ints(0, 0),
                Vec2::from_ints(2, 34),
                Vec2::from_ints(4, 68)
            ]
        );
        assert_eq!(t.conjugation, Mat2::from_ints([[8, 0], [0, 1]]));
        assert!(t.verified);
        let (m1, d1) = crate::model::conjugate(&i.m.mat(), &i.d.as_vecs(), &t.conjugation).unwrap();
        assert_eq!(m1, t.m);
        assert_eq!(d1, t.digit_vecs());
    }

    #[test]
    fn triple_for_scalar_matrix() {
        let i = inst(["3", "0", "3"], d2());
        let t = spectral_hadamard_triple(&i, &report(&i)).unwrap();
        assert_eq!(
            t.l,
            vec![
                Vec2::from_ints(0, 0),
                Vec2::from_ints(1, 2),
                Vec2::from_ints(2, 4)
            ]
        );
        assert!(t.verified);
    }

    #[test]
    fn triple_branch_i_and_errors() {
        let i = inst(["3", "2", "2"], d2());
        let t = spectral_hadamard_triple(&i, &report(&i)).unwrap();
        assert_eq!(t.branch, Branch::I);
        assert_eq!(t.b, vec![(0, 0), (1, 0), (2, 1)]);
        assert_eq!(t.l, vec![q(0, 1), q(1, 1), q(2, 1)]);
        assert!(t.verified);

        let ii = inst(["3", "-3", "6"], d2());
        assert!(matches!(
            spectral_hadamard_triple(&ii, &report(&ii)),
            Err(Error::WrongBranch(_))
        ));
        let ns = inst(["3", "-1", "6"], d2());
        assert!(matches!(
            spectral_hadamard_triple(&ns, &report(&ns)),
            Err(Error::WrongBranch(_))
        ));
    }

    #[test]
    fn infinite_family_m1() {
        let i = inst(["(5)^(1/2)", "1/3*(5)^(1/2)", "(5)^(1/2)"], d63());
        let rep = report(&i);
        let f = infinite_orthogonal_family(&i, &rep, 2).unwrap();
        let p14 = num_traits::pow(BigInt::from(5), 14);
        let p29 = num_traits::pow(BigInt::from(5), 29);
        let pt = |k: &BigInt| {
            Vec2::from_rationals(
                Rational::from_integer(k.clone()),
                Rational::from_integer(k * BigInt::from(4)),
            )
        };
        assert_eq!(f.points, vec![Vec2::zero(), pt(&p14), pt(&p29)]);
        assert_eq!(f.depth, 60);
        assert!(verify_bizero(&i, &f, (1, 4), f.default_kmax()).pass);
        assert_eq!(
            infinite_orthogonal_family(&i, &rep, 0).unwrap().points,
            vec![Vec2::zero()]
        );

        let wrong = inst(["(7)^(1/2)", "(7)^(1/2)", "(7)^(1/2)"], d63());
        assert!(matches!(
            infinite_orthogonal_family(&wrong, &report(&wrong), 2),
            Err(Error::WrongBranch(_))
        ));
    }

    #[test]
    fn p_element_examples() {
        let i = inst(["6", "3/4", "6"], d2());
        let f = p_element_family(&i, (1, 2), 1);
        let expect = vec![
            Vec2::zero(),
            Vec2::from_rationals(rat(2, 1), rat(17, 4)),
            Vec2::from_rationals(rat(4, 1), rat(17, 2)),
        ];
        assert_eq!(f.points, expect);
        assert!(verify_bizero(&i, &f, (1, 2), f.default_kmax()).pass);

        let m4 = inst(["(7)^(1/2)", "(7)^(1/2)", "(7)^(1/2)"], d63());
        let f = p_element_family(&m4, (1, 4), 1);
        assert_eq!(f.len(), 5);
        assert!(verify_bizero(&m4, &f, (1, 4), f.default_kmax()).pass);
    }

    #[test]
    fn graded_family_m2() {
        let i = inst(["3/5*(5)^(1/2)", "1/25*(5)^(1/2)", "3/5*(5)^(1/2)"], d63());
        let rep = report(&i);
        for n in 1..=3 {
            let f = graded_family(&i, &rep, n).unwrap();
            assert_eq!(f.len(), n as usize);
            assert!(!f.contains(&Vec2::zero()));
            assert!(
                verify_bizero(&i, &f, (1, 4), f.default_kmax()).pass,
                "N = {n}"
            );
        }
        let m1 = inst(["(5)^(1/2)", "1/3*(5)^(1/2)", "(5)^(1/2)"], d63());
        assert!(graded_family(&m1, &report(&m1), 2).is_err());
    }

    #[test]
    fn bizero_failures() {
        let i = inst(["6", "3/4", "6"], d2());
        let bad = FrequencySet::new(vec![Vec2::zero(), Vec2::from_ints(1, 0)], "manual", 0);
        let r = verify_bizero(&i, &bad, (1, 2), 12);
        assert!(!r.pass);
        assert_eq!(r.failure.as_ref().map(|f| (f.i, f.j)), Some((0, 1)));
        let single = FrequencySet::new(vec![Vec2::zero()], "manual", 0);
        let r = verify_bizero(&i, &single, (1, 2), 2);
        assert!(r.pass && r.pairs_checked == 0);
    }

    #[test]
    fn truncation_example_61() {
        let i = inst(["6", "3/4", "6"], d2());
        let rep = report(&i);
        let t = spectral_hadamard_triple(&i, &rep).unwrap();
        let gens = truncation_generators(&t).unwrap();
        assert_eq!(
            gens,
            vec![Vec2::zero(), Vec2::from_ints(-4, -8), Vec2::from_ints(4, 8)]
        );
        assert_eq!(
            spectrum_truncation(&i, &rep, 0).unwrap().points,
            vec![Vec2::zero()]
        );
        let one = spectrum_truncation(&i, &rep, 1).unwrap();
        assert_eq!(
            one.points,
            vec![
                Vec2::zero(),
                Vec2::from_ints(-32, -8),
                Vec2::from_ints(32, 8)
            ]
        );
        let mut prev = one;
        for n in 2..=3 {
            let next = spectrum_truncation(&i, &rep, n).unwrap();
            assert_eq!(next.len(), 3usize.pow(n as u32));
            assert!(prev.points.iter().all(|v| next.contains(v)));
            assert!(verify_bizero(&i, &next, (1, 2), next.default_kmax()).pass);
            prev = next;
        }
    }

    #[test]
    fn truncation_branch_i() {
        let i = inst(["3", "2", "2"], d2());
        let rep = report(&i);
        let f = spectrum_truncation(&i, &rep, 2).unwrap();
        assert_eq!(f.len(), 9);
        let mut expect: Vec<Vec2> = (0..9).map(|k| Vec2::from_ints(k, 2 * k)).collect();
        let mut got = f.points.clone();
        let key = |v: &Vec2| v.x.to_f64();
        expect.sort_by(|a, b| key(a).total_cmp(&key(b)));
        got.sort_by(|a, b| key(a).total_cmp(&key(b)));
        assert_eq!(got, expect);
        assert!(verify_bizero(&i, &f, (1, 2), f.default_kmax()).pass);
        let eval = FourierEvaluator::new(&i, Some((1, 2)));
        let stats = grid_scan(&eval, &f.points, Window::unit(), 8, 1e-10);
        assert!(stats.max <= 1.0 + 1e-9);
    }
}
