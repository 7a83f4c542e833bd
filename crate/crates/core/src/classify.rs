//! Spectrality and orthogonal-exponential cardinality verdicts.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use crate::model::{derive, MeasureInstance};
use crate::scalar::{p_valuation, AlgebraicScalar};
use crate::zeros::{in_e_a, Exactness, ZeroStructureReport};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub condition: String,
    pub value: String,
    pub holds: bool,
}

fn ev(condition: impl Into<String>, value: impl fmt::Display, holds: bool) -> Evidence {
    Evidence {
        condition: condition.into(),
        value: value.to_string(),
        holds,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// ρ₁ ≠ ρ₂, c″ ∈ Q \ E_a, ρ₁⁻¹ ∈ pZ.
    I,
    /// ρ₁ ≠ ρ₂, c″ = c₁/c₂ ∈ E_a, ρᵢ⁻¹ ∈ pZ, p^{ℓ+1} | (ρ₁⁻¹ − ρ₂⁻¹).
    II,
    /// ρ₁ = ρ₂ ∈ pZ, c = 0 or c rational with p | numerator.
    III,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NotSpectralReason {
    /// ρ₁ = ρ₂ but ρ⁻¹ ∉ pZ or c is not of the form t/s with p | t.
    EqualRhoConditions,
    /// c″ is irrational.
    IrrationalShear,
    /// c″ ∈ Q \ E_a but ρ₁⁻¹ ∉ pZ.
    Rho1NotInPZ,
    /// c″ ∈ E_a but some ρᵢ⁻¹ ∉ pZ or p^{ℓ+1} ∤ (ρ₁⁻¹ − ρ₂⁻¹).
    DivisibilityFails,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum SpectralOutcome {
    Spectral { branch: Branch },
    NotSpectral { reason: NotSpectralReason },
    Unsupported { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectralVerdict {
    pub outcome: SpectralOutcome,
    pub evidence: Vec<Evidence>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum OrthoOutcome {
    InfiniteOrthogonalSet,
    ArbitraryFiniteNumbers,
    AtMostP { p: u64, attained: bool },
    NoInfiniteBoundUnknown,
    Unsupported { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrthoVerdict {
    pub outcome: OrthoOutcome,
    /// κ = cρ when ρ⁻¹ = (t/s)^{1/r}.
    pub kappa: Option<String>,
    pub kappa_rational: Option<bool>,
    pub root_form: Option<(String, String, u32)>,
    pub evidence: Vec<Evidence>,
}

/// ρ⁻¹ is a rational integer divisible by p (irrational values simply fail).
pub fn in_pz(x: &AlgebraicScalar, p: u64) -> bool {
    x.as_integer()
        .is_some_and(|n| n.is_multiple_of(&BigInt::from(p)))
}

fn structure_gate(
    report: &ZeroStructureReport,
    evidence: &mut Vec<Evidence>,
) -> Result<(i64, i64), String> {
    let Some(a) = report.a() else {
        return Err(format!("zero structure not established ({})", report.note));
    };
    evidence.push(ev("admissible a", format!("({}, {})", a.0, a.1), true));
    if report.exactness == Exactness::NumericallySupported {
        evidence.push(ev(
            "conditional on the zero-set structure",
            "numerically supported",
            true,
        ));
    }
    Ok(a)
}

pub fn classify_spectrality(
    inst: &MeasureInstance,
    report: &ZeroStructureReport,
) -> SpectralVerdict {
    let mut evidence = Vec::new();
    let unsupported = |reason: String, evidence| SpectralVerdict {
        outcome: SpectralOutcome::Unsupported { reason },
        evidence,
    };
    let a = match structure_gate(report, &mut evidence) {
        Ok(a) => a,
        Err(reason) => return unsupported(reason, evidence),
    };
    let p = inst.p();
    let m = &inst.m;
    let spectral = |branch, evidence| SpectralVerdict {
        outcome: SpectralOutcome::Spectral { branch },
        evidence,
    };
    let not = |reason, evidence| SpectralVerdict {
        outcome: SpectralOutcome::NotSpectral { reason },
        evidence,
    };

    if m.equal_rho() {
        let rho_ok = in_pz(m.rho1_inv(), p);
        evidence.push(ev(format!("rho^-1 in {p}Z"), m.rho1_inv(), rho_ok));
        let c_ok = if m.c().is_zero() {
            evidence.push(ev("c = 0", m.c(), true));
            true
        } else if let Some(c) = m.c().as_rational() {
            let v = p_valuation(&c, p).expect("nonzero").exponent;
            evidence.push(ev(
                format!("c rational with v_{p}(numerator) >= 1"),
                format!("c = {c}, v_{p} = {v}"),
                v >= 1,
            ));
            v >= 1
        } else {
            evidence.push(ev("c rational", m.c(), false));
            false
        };
        return if rho_ok && c_ok {
            spectral(Branch::III, evidence)
        } else {
            not(NotSpectralReason::EqualRhoConditions, evidence)
        };
    }

    if !inst.normalized() {
        return unsupported(
            "rho1 != rho2 requires digits normalized to d0 = 0, d1 = (k, 0)".into(),
            evidence,
        );
    }
    let dq = derive(inst).expect("normalized with distinct rhos");
    let cpp = dq.c_double_prime.expect("distinct rhos");
    let Some(q) = cpp.as_rational() else {
        evidence.push(ev("c'' rational", &cpp, false));
        return not(NotSpectralReason::IrrationalShear, evidence);
    };
    evidence.push(ev("c'' rational", &q, true));
    let r1_ok = in_pz(m.rho1_inv(), p);
    if !in_e_a(&q, a, p) {
        evidence.push(ev("c'' in E_a", &q, false));
        evidence.push(ev(format!("rho1^-1 in {p}Z"), m.rho1_inv(), r1_ok));
        return if r1_ok {
            spectral(Branch::I, evidence)
        } else {
            not(NotSpectralReason::Rho1NotInPZ, evidence)
        };
    }
    evidence.push(ev("c'' in E_a", &q, true));
    let ell = crate::scalar::int_valuation(q.denom(), p).0;
    evidence.push(ev(
        format!("l = v_{p}(c2)"),
        format!("c2 = {}, l = {ell}", q.denom()),
        true,
    ));
    let r2_ok = in_pz(m.rho2_inv(), p);
    evidence.push(ev(format!("rho1^-1 in {p}Z"), m.rho1_inv(), r1_ok));
    evidence.push(ev(format!("rho2^-1 in {p}Z"), m.rho2_inv(), r2_ok));
    let div_ok = r1_ok && r2_ok && {
        let diff = m.rho1_inv().as_integer().expect("integer")
            - m.rho2_inv().as_integer().expect("integer");
        let modulus = num_traits::pow(BigInt::from(p), (ell + 1) as usize);
        let ok = diff.is_multiple_of(&modulus);
        evidence.push(ev(
            format!("{p}^(l+1) | (rho1^-1 - rho2^-1)"),
            format!("{modulus} | {diff}"),
            ok,
        ));
        ok
    };
    if div_ok {
        spectral(Branch::II, evidence)
    } else {
        not(NotSpectralReason::DivisibilityFails, evidence)
    }
}

pub fn classify_orthogonality(
    inst: &MeasureInstance,
    report: &ZeroStructureReport,
) -> OrthoVerdict {
    let mut evidence = Vec::new();
    let verdict = |outcome, evidence| OrthoVerdict {
        outcome,
        kappa: None,
        kappa_rational: None,
        root_form: None,
        evidence,
    };
    if let Err(reason) = structure_gate(report, &mut evidence) {
        return verdict(OrthoOutcome::Unsupported { reason }, evidence);
    }
    let m = &inst.m;
    let p = inst.p();
    if !m.equal_rho() {
        return verdict(
            OrthoOutcome::Unsupported {
                reason: "rho1 != rho2".into(),
            },
            evidence,
        );
    }
    let form = m
        .rho1_inv()
        .monomial_root_form()
        .expect("expanding entries are positive");
    let Some(base) = form else {
        // Over a quadratic field x + y√D with x, y ≠ 0 has no rational power,
        // so no infinite family exists, but no bound is known either.
        let r = m.rho1_inv().base().r();
        evidence.push(ev("rho^-1 root-rational", m.rho1_inv(), false));
        let outcome = if r <= 2 {
            OrthoOutcome::NoInfiniteBoundUnknown
        } else {
            OrthoOutcome::Unsupported {
                reason: "root-rationality of a non-monomial rho^-1 is undecided".into(),
            }
        };
        return verdict(outcome, evidence);
    };
    let (t, s, r) = (base.t().clone(), base.s().clone(), base.r());
    evidence.push(ev(
        "rho^-1 = (t/s)^(1/r)",
        format!("t = {t}, s = {s}, r = {r}"),
        true,
    ));
    let kappa = m.c() * &m.rho1();
    let kq = kappa.as_rational();
    let pb = BigInt::from(p);
    let t_in = t.is_multiple_of(&pb);
    let s_in = s.is_multiple_of(&pb);
    evidence.push(ev("kappa = c*rho rational", &kappa, kq.is_some()));
    evidence.push(ev(format!("t in {p}Z"), &t, t_in));
    let outcome = match (kq.is_some(), t_in, s_in) {
        (true, true, _) => OrthoOutcome::InfiniteOrthogonalSet,
        (false, _, _) => OrthoOutcome::AtMostP { p, attained: true },
        (true, false, false) => {
            evidence.push(ev(format!("s in {p}Z"), &s, false));
            OrthoOutcome::AtMostP { p, attained: true }
        }
        (true, false, true) => {
            evidence.push(ev(format!("s in {p}Z"), &s, true));
            OrthoOutcome::ArbitraryFiniteNumbers
        }
    };
    OrthoVerdict {
        outcome,
        kappa: Some(kappa.to_string()),
        kappa_rational: Some(kq.is_some()),
        root_form: Some((t.to_string(), s.to_string(), r)),
        evidence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DigitSet, ExpandingMatrix};
    use crate::scalar::parse::parse_scalar_expr;
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

    fn spectral(m: [&str; 3], d: DigitSet) -> SpectralOutcome {
        let i = inst(m, d);
        let rep = analyze_zero_structure(
            &i.d,
            &ScanConfig {
                resolution: 64,
                refinements: 3,
                tol: 1e-9,
            },
        );
        classify_spectrality(&i, &rep).outcome
    }

    fn ortho(m: [&str; 3], d: DigitSet) -> OrthoVerdict {
        let i = inst(m, d);
        let rep = analyze_zero_structure(
            &i.d,
            &ScanConfig {
                resolution: 64,
                refinements: 3,
                tol: 1e-9,
            },
        );
        classify_orthogonality(&i, &rep)
    }

    #[test]
    fn spectrality_examples() {
        assert_eq!(
            spectral(["6", "3/4", "6"], d2()),
            SpectralOutcome::Spectral {
                branch: Branch::III
            }
        );
        assert_eq!(
            spectral(["3", "-3", "6"], d2()),
            SpectralOutcome::Spectral { branch: Branch::II }
        );
        assert_eq!(
            spectral(["3", "-1", "6"], d2()),
            SpectralOutcome::NotSpectral {
                reason: NotSpectralReason::DivisibilityFails
            }
        );
        assert_eq!(
            spectral(["3", "2", "2"], d2()),
            SpectralOutcome::Spectral { branch: Branch::I }
        );
        assert_eq!(
            spectral(["2", "4", "3"], d2()),
            SpectralOutcome::NotSpectral {
                reason: NotSpectralReason::Rho1NotInPZ
            }
        );
        assert_eq!(
            spectral(["3", "(2)^(1/2)", "6"], d2()),
            SpectralOutcome::NotSpectral {
                reason: NotSpectralReason::IrrationalShear
            }
        );
        assert_eq!(
            spectral(["6", "1/4", "6"], d2()),
            SpectralOutcome::NotSpectral {
                reason: NotSpectralReason::EqualRhoConditions
            }
        );
        assert_eq!(
            spectral(["3", "0", "3"], d2()),
            SpectralOutcome::Spectral {
                branch: Branch::III
            }
        );
        assert!(matches!(
            spectral(
                ["3", "0", "6"],
                DigitSet::new(vec![(0, 1), (1, 1), (0, 0)]).unwrap()
            ),
            SpectralOutcome::Unsupported { .. }
        ));
    }

    #[test]
    fn orthogonality_examples() {
        let v = ortho(["(5)^(1/2)", "1/3*(5)^(1/2)", "(5)^(1/2)"], d63());
        assert_eq!(v.outcome, OrthoOutcome::InfiniteOrthogonalSet);
        assert_eq!(v.kappa.as_deref(), Some("1/3"));
        let v = ortho(["3/5*(5)^(1/2)", "1/25*(5)^(1/2)", "3/5*(5)^(1/2)"], d63());
        assert_eq!(v.outcome, OrthoOutcome::ArbitraryFiniteNumbers);
        assert_eq!(v.kappa.as_deref(), Some("1/15"));
        assert_eq!(v.root_form, Some(("9".into(), "5".into(), 2)));
        let v = ortho(["3/5*(5)^(1/2)", "1", "3/5*(5)^(1/2)"], d63());
        assert_eq!(
            v.outcome,
            OrthoOutcome::AtMostP {
                p: 5,
                attained: true
            }
        );
        assert_eq!(v.kappa_rational, Some(false));
        let v = ortho(["(7)^(1/2)", "(7)^(1/2)", "(7)^(1/2)"], d63());
        assert_eq!(
            v.outcome,
            OrthoOutcome::AtMostP {
                p: 5,
                attained: true
            }
        );
        assert_eq!(v.kappa.as_deref(), Some("1"));
        let v = ortho(["2 + (2)^(1/2)", "1", "2 + (2)^(1/2)"], d63());
        assert_eq!(v.outcome, OrthoOutcome::NoInfiniteBoundUnknown);
        let v = ortho(["3", "1", "6"], d63());
        assert!(matches!(v.outcome, OrthoOutcome::Unsupported { .. }));
    }
}
