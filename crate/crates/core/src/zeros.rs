//! Zero structure of the mask: admissible vectors a ∈ E_p, exactness of
//! Z(m_D) = ∪_j (ja/p + Z²), the set E_a and residue profiles.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::model::DigitSet;
use crate::numerics::{cluster_boxes, refine_boxes, torus_distance, torus_zero_scan, ZeroBox};
use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdmissibleVector {
    pub a: (i64, i64),
    pub orbit: Vec<(i64, i64)>,
}

impl AdmissibleVector {
    /// The orbit {ka mod p}, represented by its lexicographically least member.
    pub fn from_vector(a: (i64, i64), p: u64) -> Self {
        let p = p as i64;
        let mut orbit: Vec<(i64, i64)> = (1..p)
            .map(|k| ((k * a.0).rem_euclid(p), (k * a.1).rem_euclid(p)))
            .collect();
        orbit.sort_unstable();
        orbit.dedup();
        AdmissibleVector { a: orbit[0], orbit }
    }
}

/// ⟨a, d⟩ mod p for each digit.
pub fn residues(d: &DigitSet, a: (i64, i64)) -> Vec<u64> {
    let p = d.p() as i64;
    d.digits()
        .iter()
        .map(|&(x, y)| (a.0 * x + a.1 * y).rem_euclid(p) as u64)
        .collect()
}

fn is_full_system(res: &[u64], p: u64) -> bool {
    let mut seen = vec![false; p as usize];
    for &r in res {
        seen[r as usize] = true;
    }
    res.len() as u64 == p && seen.iter().all(|&s| s)
}

/// Canonical admissible orbits: a ∈ [1, p-1]² whose residues ⟨a, d⟩ form a
/// full system mod p, equivalently Σ_d ω^{j⟨a,d⟩} = 0 for j = 1..p-1.
pub fn admissible_vectors(d: &DigitSet) -> Vec<AdmissibleVector> {
    let p = d.p() as i64;
    let mut out: Vec<AdmissibleVector> = Vec::new();
    for a1 in 1..p {
        for a2 in 1..p {
            if is_full_system(&residues(d, (a1, a2)), d.p()) {
                let v = AdmissibleVector::from_vector((a1, a2), d.p());
                if !out.iter().any(|o| o.a == v.a) {
                    out.push(v);
                }
            }
        }
    }
    out.sort_by_key(|v| v.a);
    out
}

/// h/l ∈ E_a iff l·a₂ − h·a₁ ∉ pZ; zero is always in E_a.
pub fn in_e_a(q: &Rational, a: (i64, i64), p: u64) -> bool {
    if q.is_zero() {
        return true;
    }
    let v = q.denom() * BigInt::from(a.1) - q.numer() * BigInt::from(a.0);
    !v.is_multiple_of(&BigInt::from(p))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueProfile {
    pub values: Vec<i64>,
    pub residues: Vec<u64>,
    pub full_system: bool,
    pub gcd: i64,
}

/// B = {c₂d_{i,1} + c₁d_{i,2}}, reduced mod p, with gcd(B).
pub fn residue_profile(d: &DigitSet, c1: i64, c2: i64) -> ResidueProfile {
    let p = d.p() as i64;
    let values: Vec<i64> = d.digits().iter().map(|&(x, y)| c2 * x + c1 * y).collect();
    let residues: Vec<u64> = values.iter().map(|v| v.rem_euclid(p) as u64).collect();
    let gcd = values.iter().fold(0i64, |g, v| g.gcd(v));
    ResidueProfile {
        full_system: is_full_system(&residues, d.p()),
        values,
        residues,
        gcd,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Exactness {
    ExactCertified,
    NumericallySupported,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroStructureReport {
    pub admissible: Vec<AdmissibleVector>,
    pub exactness: Exactness,
    pub extra_zeros: Vec<[f64; 2]>,
    pub note: String,
}

impl ZeroStructureReport {
    /// The single admissible vector, when the structure holds.
    pub fn a(&self) -> Option<(i64, i64)> {
        match (self.exactness, self.admissible.as_slice()) {
            (Exactness::Failed, _) => None,
            (_, [v]) => Some(v.a),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanConfig {
    pub resolution: usize,
    pub refinements: u32,
    pub tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            resolution: 512,
            refinements: 4,
            tol: 1e-9,
        }
    }
}

/// Predicted zeros ja/p mod 1.
pub fn predicted_zeros(a: (i64, i64), p: u64) -> Vec<[f64; 2]> {
    let p = p as i64;
    (1..p)
        .map(|j| {
            [
                (j * a.0).rem_euclid(p) as f64 / p as f64,
                (j * a.1).rem_euclid(p) as f64 / p as f64,
            ]
        })
        .collect()
}

/// For p = 3 the zeros are E⁻¹((1/3, 2/3) + Z²) ∪ E⁻¹((2/3, 1/3) + Z²) with
/// E the matrix of rows d₁−d₀, d₂−d₀; they coincide with the predicted
/// lattice exactly when |det E| = 1.
fn exactness_p3(d: &DigitSet, a: (i64, i64)) -> ZeroStructureReport {
    let ds = d.digits();
    let e = [
        [ds[1].0 - ds[0].0, ds[1].1 - ds[0].1],
        [ds[2].0 - ds[0].0, ds[2].1 - ds[0].1],
    ];
    let det = e[0][0] * e[1][1] - e[0][1] * e[1][0];
    let admissible = vec![AdmissibleVector::from_vector(a, 3)];
    if det == 0 {
        return ZeroStructureReport {
            admissible,
            exactness: Exactness::Failed,
            extra_zeros: Vec::new(),
            note: "digit differences are dependent: the mask vanishes on lines".into(),
        };
    }
    if det.abs() == 1 {
        return ZeroStructureReport {
            admissible,
            exactness: Exactness::ExactCertified,
            extra_zeros: Vec::new(),
            note: "p = 3 with unimodular digit differences".into(),
        };
    }
    // ξ = E⁻¹(w + n), n ranging over Z² mod det.
    let n = det.abs();
    let predicted = predicted_zeros(a, 3);
    let mut extra: Vec<(Rational, Rational)> = Vec::new();
    let r = |num: i64| Rational::new(BigInt::from(num), BigInt::from(3 * det));
    for w in [(1, 2), (2, 1)] {
        for n1 in 0..n {
            for n2 in 0..n {
                let (u, v) = (w.0 + 3 * n1, w.1 + 3 * n2);
                // adj(E)·(u, v)/(3 det)
                let x = r(e[1][1] * u - e[0][1] * v);
                let y = r(-e[1][0] * u + e[0][0] * v);
                let x = &x - x.floor();
                let y = &y - y.floor();
                let xf = [x.to_f64().unwrap_or(0.0), y.to_f64().unwrap_or(0.0)];
                if predicted.iter().any(|q| torus_distance(*q, xf) < 1e-12)
                    || extra.contains(&(x.clone(), y.clone()))
                {
                    continue;
                }
                extra.push((x, y));
            }
        }
    }
    ZeroStructureReport {
        admissible,
        exactness: Exactness::Failed,
        extra_zeros: extra
            .iter()
            .map(|(x, y)| [x.to_f64().unwrap_or(0.0), y.to_f64().unwrap_or(0.0)])
            .collect(),
        note: format!("|det| = {n} > 1: the zero set has extra cosets"),
    }
}

fn exactness_numeric(d: &DigitSet, a: (i64, i64), cfg: &ScanConfig) -> ZeroStructureReport {
    let boxes = torus_zero_scan(d, cfg.resolution, cfg.refinements, cfg.tol);
    let predicted = predicted_zeros(a, d.p());
    let lip = crate::numerics::mask_lipschitz(d);
    let mut extra = Vec::new();
    let mut found = vec![false; predicted.len()];
    for cl in cluster_boxes(&boxes) {
        let reach = cl.boxes.len() as f64 * 2.0 * cl.boxes[0].half * std::f64::consts::SQRT_2;
        if let Some(i) = predicted
            .iter()
            .position(|q| torus_distance(*q, cl.center) <= reach)
        {
            found[i] = true;
            continue;
        }
        // Keep refining an unexplained cluster until it dies out or its boxes
        // are so small that the Lipschitz slack falls under the tolerance.
        let mut survivors: Vec<ZeroBox> = cl.boxes.clone();
        while !survivors.is_empty() && lip * survivors[0].half * std::f64::consts::SQRT_2 > cfg.tol
        {
            survivors = refine_boxes(d, &survivors, 1, cfg.tol);
            if survivors.len() > 1 << 16 {
                break;
            }
        }
        if !survivors.is_empty() {
            extra.push(cl.center);
        }
    }
    let ok = extra.is_empty() && found.iter().all(|&f| f);
    ZeroStructureReport {
        admissible: vec![AdmissibleVector::from_vector(a, d.p())],
        exactness: if ok {
            Exactness::NumericallySupported
        } else {
            Exactness::Failed
        },
        extra_zeros: extra,
        note: format!(
            "subdivision scan {}x{} with {} refinements, tol {:e}",
            cfg.resolution, cfg.resolution, cfg.refinements, cfg.tol
        ),
    }
}

/// Decides whether Z(m_D) = ∪_j (ja/p + Z²): symbolically for p = 3,
/// by a subdivision scan for p ≥ 5; p = 2 never qualifies.
pub fn exactness_check(
    d: &DigitSet,
    a: &AdmissibleVector,
    cfg: &ScanConfig,
) -> ZeroStructureReport {
    match d.p() {
        2 => ZeroStructureReport {
            admissible: vec![a.clone()],
            exactness: Exactness::Failed,
            extra_zeros: Vec::new(),
            note: "p = 2: the mask vanishes on a line family".into(),
        },
        3 => exactness_p3(d, a.a),
        _ => exactness_numeric(d, a.a, cfg),
    }
}

/// Admissible orbits plus exactness; several orbits count as failure.
pub fn analyze_zero_structure(d: &DigitSet, cfg: &ScanConfig) -> ZeroStructureReport {
    let admissible = admissible_vectors(d);
    match admissible.len() {
        0 => ZeroStructureReport {
            admissible,
            exactness: Exactness::Failed,
            extra_zeros: Vec::new(),
            note: "no a in E_p gives a full residue system".into(),
        },
        1 => exactness_check(d, &admissible[0], cfg),
        n => ZeroStructureReport {
            admissible,
            exactness: Exactness::Failed,
            extra_zeros: Vec::new(),
            note: format!("{n} inequivalent admissible orbits"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn d2() -> DigitSet {
        DigitSet::new(vec![(0, 0), (1, 0), (0, 1)]).unwrap()
    }

    fn ex62() -> DigitSet {
        DigitSet::new(vec![(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)]).unwrap()
    }

    #[test]
    fn admissible_examples() {
        let v = admissible_vectors(&d2());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].a, (1, 2));
        assert_eq!(v[0].orbit, vec![(1, 2), (2, 1)]);
        let v = admissible_vectors(&ex62());
        assert_eq!(v.iter().map(|x| x.a).collect::<Vec<_>>(), vec![(1, 1)]);
        let col = DigitSet::new(vec![(0, 0), (1, 0), (2, 0)]).unwrap();
        let v = admissible_vectors(&col);
        assert_eq!(
            v.iter().map(|x| x.a).collect::<Vec<_>>(),
            vec![(1, 1), (1, 2)]
        );
    }

    #[test]
    fn e_a_membership() {
        assert!(in_e_a(&int(1), (1, 2), 3));
        assert!(!in_e_a(&int(2), (1, 2), 3));
        assert!(in_e_a(&int(0), (1, 2), 3));
        assert!(in_e_a(&rat(1, 3), (1, 2), 3));
    }

    #[test]
    fn residue_profiles() {
        let pr = residue_profile(&d2(), 1, 2);
        assert_eq!(pr.values, vec![0, 2, 1]);
        assert!(pr.full_system);
        assert_eq!(pr.gcd, 1);
        let pr = residue_profile(&d2(), 1, 1);
        assert_eq!(pr.residues, vec![0, 1, 1]);
        assert!(!pr.full_system);
        let pr = residue_profile(&ex62(), 0, 1);
        assert_eq!(pr.values, vec![0, 1, 1, 2, 2]);
    }

    #[test]
    fn exactness_p3_cases() {
        let cfg = ScanConfig::default();
        assert_eq!(
            analyze_zero_structure(&d2(), &cfg).exactness,
            Exactness::ExactCertified
        );
        let col = DigitSet::new(vec![(0, 0), (1, 0), (2, 0)]).unwrap();
        let a = AdmissibleVector::from_vector((1, 1), 3);
        assert_eq!(exactness_check(&col, &a, &cfg).exactness, Exactness::Failed);
        assert_eq!(
            analyze_zero_structure(&col, &cfg).exactness,
            Exactness::Failed
        );
        // |det| = 2: zeros at (1/6, 1/3)-type points besides the lattice
        let wide = DigitSet::new(vec![(0, 0), (2, 0), (0, 1)]).unwrap();
        let rep = analyze_zero_structure(&wide, &cfg);
        assert_eq!(rep.exactness, Exactness::Failed);
        assert_eq!(rep.extra_zeros.len(), 2);
        for z in &rep.extra_zeros {
            assert!(crate::numerics::mask_eval(&wide, *z).norm() < 1e-12);
        }
    }

    #[test]
    fn exactness_p5_scan() {
        let cfg = ScanConfig {
            resolution: 128,
            refinements: 3,
            tol: 1e-9,
        };
        let rep = analyze_zero_structure(&ex62(), &cfg);
        assert_eq!(rep.exactness, Exactness::NumericallySupported);
        assert!(rep.extra_zeros.is_empty());
        assert_eq!(rep.a(), Some((1, 1)));
    }

    #[test]
    fn p2_fails() {
        let d = DigitSet::new(vec![(0, 0), (1, 0)]).unwrap();
        let rep = analyze_zero_structure(&d, &ScanConfig::default());
        assert_eq!(rep.exactness, Exactness::Failed);
        assert_eq!(rep.a(), None);
    }
}
