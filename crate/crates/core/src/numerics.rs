//! Floating evaluation with certified truncation: the mask m_D, μ̂ as a
//! truncated infinite product, the Q-function and the torus zero scan.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::Vec2;
use crate::model::{DigitSet, MeasureInstance, ZeroLattice};
use crate::scalar::int;

/// (1/p) Σ_d e^{-2πi⟨ξ,d⟩}.
pub fn mask_eval(d: &DigitSet, xi: [f64; 2]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for &(a, b) in d.digits() {
        let ph = (xi[0] * a as f64 + xi[1] * b as f64).rem_euclid(1.0);
        s += Complex64::from_polar(1.0, -2.0 * PI * ph);
    }
    s / d.p() as f64
}

fn mask_from_phases(phases: impl Iterator<Item = f64>, p: f64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for ph in phases {
        s += Complex64::from_polar(1.0, -2.0 * PI * ph.rem_euclid(1.0));
    }
    s / p
}

/// 2π·mean‖d‖: Lipschitz constant of m_D.
pub fn mask_lipschitz(d: &DigitSet) -> f64 {
    let total: f64 = d
        .digits()
        .iter()
        .map(|&(a, b)| ((a * a + b * b) as f64).sqrt())
        .sum();
    2.0 * PI * total / d.p() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncatedValue {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub tail_bound: f64,
    pub depth: u64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// Exact phases of one frequency λ down to the depth where the float
/// iteration takes over.
#[derive(Clone, Debug)]
pub struct PhaseTable {
    exact: Vec<Vec<f64>>,
    eta: [f64; 2],
    exact_zero: bool,
}

impl PhaseTable {
    pub fn exact_zero(&self) -> bool {
        self.exact_zero
    }

    pub fn exact_depth(&self) -> usize {
        self.exact.len()
    }
}

/// μ̂ evaluator for one instance. Holds the float form of (M*)⁻¹ and the
/// tail constant S with ‖A^j‖ ≤ S summed over j ≥ 1.
#[derive(Debug)]
pub struct FourierEvaluator {
    inst: MeasureInstance,
    lattice: Option<ZeroLattice>,
    digits: Vec<[f64; 2]>,
    a_inv: [[f64; 2]; 2],
    lip: f64,
    sum_norm: f64,
}

const MAX_DEPTH: u64 = 100_000;

impl FourierEvaluator {
    /// With an admissible `a`, exact zeros of μ̂ short-circuit to 0.
    pub fn new(inst: &MeasureInstance, a: Option<(i64, i64)>) -> Self {
        let r1 = inst.m.rho1().to_f64();
        let r2 = inst.m.rho2().to_f64();
        let c = inst.m.c().to_f64();
        let th1 = -c * r1 * r2;
        let rmax = r1.max(r2);
        let sum_norm = (r1 / (1.0 - r1)
            + r2 / (1.0 - r2)
            + c.abs() * rmax * rmax / ((1.0 - rmax) * (1.0 - rmax)))
            * (1.0 + 1e-9);
        FourierEvaluator {
            inst: inst.clone(),
            lattice: a.map(|a| ZeroLattice::new(inst, a)),
            digits: inst
                .d
                .digits()
                .iter()
                .map(|&(x, y)| [x as f64, y as f64])
                .collect(),
            a_inv: [[r1, 0.0], [th1, r2]],
            lip: mask_lipschitz(&inst.d),
            sum_norm,
        }
    }

    pub fn instance(&self) -> &MeasureInstance {
        &self.inst
    }

    fn step(&self, v: [f64; 2]) -> [f64; 2] {
        let a = &self.a_inv;
        [
            a[0][0] * v[0] + a[0][1] * v[1],
            a[1][0] * v[0] + a[1][1] * v[1],
        ]
    }

    fn tail(&self, eta: [f64; 2]) -> f64 {
        self.lip * self.sum_norm * eta[0].hypot(eta[1])
    }

    pub fn phase_table(&self, lambda: &Vec2) -> PhaseTable {
        let p = self.inst.p() as f64;
        let mstar_inv = self.inst.m.adjoint().inverse().expect("expanding");
        let mut exact = Vec::new();
        let mut eta = lambda.clone();
        let mut eta_f = eta.to_f64();
        // Past this point no (M*)^{-k}λ can reach a lattice point (|η₁| ≥ 1/p there).
        while (1.0 + self.sum_norm) * eta_f[0].hypot(eta_f[1]) >= 1.0 / p
            && (exact.len() as u64) < MAX_DEPTH
        {
            eta = mstar_inv.apply(&eta);
            eta_f = eta.to_f64();
            let phases = self
                .inst
                .d
                .digits()
                .iter()
                .map(|&(a, b)| (&eta.x.scale(&int(a)) + &eta.y.scale(&int(b))).frac_f64())
                .collect();
            exact.push(phases);
        }
        let exact_zero = !lambda.is_zero()
            && self
                .lattice
                .as_ref()
                .is_some_and(|lat| lat.member(lambda, exact.len().max(1) as u64).is_some());
        PhaseTable {
            exact,
            eta: eta_f,
            exact_zero,
        }
    }

    /// μ̂(λ + ξ₀) with |error| ≤ tail_bound ≤ eps.
    pub fn eval_with(&self, table: &PhaseTable, xi0: [f64; 2], eps: f64) -> TruncatedValue {
        if table.exact_zero && xi0 == [0.0, 0.0] {
            return TruncatedValue {
                value: Complex64::new(0.0, 0.0),
                tail_bound: 0.0,
                depth: 0,
            };
        }
        let p = self.inst.p() as f64;
        let mut value = Complex64::new(1.0, 0.0);
        let mut off = xi0;
        let k0 = table.exact.len();
        for phases in &table.exact {
            off = self.step(off);
            let m = mask_from_phases(
                phases
                    .iter()
                    .zip(&self.digits)
                    .map(|(ph, d)| ph + off[0] * d[0] + off[1] * d[1]),
                p,
            );
            value *= m;
        }
        let mut eta_l = table.eta;
        let mut depth = k0 as u64;
        loop {
            let eta = [eta_l[0] + off[0], eta_l[1] + off[1]];
            let tail = self.tail(eta);
            if tail <= eps || depth >= MAX_DEPTH {
                return TruncatedValue {
                    value,
                    tail_bound: tail,
                    depth,
                };
            }
            eta_l = self.step(eta_l);
            off = self.step(off);
            let eta = [eta_l[0] + off[0], eta_l[1] + off[1]];
            value *= mask_from_phases(self.digits.iter().map(|d| eta[0] * d[0] + eta[1] * d[1]), p);
            depth += 1;
        }
    }

    pub fn mu_hat(&self, xi: &Vec2, eps: f64) -> TruncatedValue {
        self.eval_with(&self.phase_table(xi), [0.0, 0.0], eps)
    }

    pub fn mu_hat_f64(&self, xi: [f64; 2], eps: f64) -> TruncatedValue {
        self.eval_with(&self.phase_table(&Vec2::zero()), xi, eps)
    }
}

/// One-shot μ̂ at an exact point.
pub fn mu_hat(
    inst: &MeasureInstance,
    a: Option<(i64, i64)>,
    xi: &Vec2,
    eps: f64,
) -> TruncatedValue {
    FourierEvaluator::new(inst, a).mu_hat(xi, eps)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QValue {
    pub value: f64,
    pub error: f64,
}

/// Q(ξ) = Σ_λ |μ̂(ξ+λ)|² for a fixed family, phase tables built once.
pub struct QEvaluator<'a> {
    eval: &'a FourierEvaluator,
    tables: Vec<PhaseTable>,
}

impl<'a> QEvaluator<'a> {
    pub fn new(eval: &'a FourierEvaluator, lambda: &[Vec2]) -> Self {
        let tables = lambda.par_iter().map(|l| eval.phase_table(l)).collect();
        QEvaluator { eval, tables }
    }

    pub fn eval(&self, xi0: [f64; 2], eps: f64) -> QValue {
        let mut value = 0.0;
        let mut error = 0.0;
        for t in &self.tables {
            let v = self.eval.eval_with(t, xi0, eps);
            let m = v.value.norm();
            value += m * m;
            // |(m+δ)² - m²| ≤ 2δ + δ², plus rounding over the product
            error +=
                2.0 * v.tail_bound + v.tail_bound * v.tail_bound + 1e-14 * (v.depth as f64 + 1.0);
        }
        QValue { value, error }
    }
}

pub fn q_eval(
    inst: &MeasureInstance,
    a: Option<(i64, i64)>,
    lambda: &[Vec2],
    xi0: [f64; 2],
    eps: f64,
) -> QValue {
    let ev = FourierEvaluator::new(inst, a);
    QEvaluator::new(&ev, lambda).eval(xi0, eps)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn unit() -> Self {
        Window {
            x0: 0.0,
            x1: 1.0,
            y0: 0.0,
            y1: 1.0,
        }
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        Window {
            x0: lo,
            x1: hi,
            y0: lo,
            y1: hi,
        }
    }

    /// Half-open lattice: `res` points per axis starting at the lower corner.
    pub fn grid_point(&self, i: usize, j: usize, res: usize) -> [f64; 2] {
        [
            self.x0 + (self.x1 - self.x0) * i as f64 / res as f64,
            self.y0 + (self.y1 - self.y0) * j as f64 / res as f64,
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridStats {
    pub min: f64,
    pub max: f64,
    pub argmin: [f64; 2],
    pub argmax: [f64; 2],
    pub max_error: f64,
    pub points: usize,
}

pub fn grid_scan(
    eval: &FourierEvaluator,
    lambda: &[Vec2],
    window: Window,
    resolution: usize,
    eps: f64,
) -> GridStats {
    let q = QEvaluator::new(eval, lambda);
    let vals: Vec<([f64; 2], QValue)> = (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let xi = window.grid_point(idx % resolution, idx / resolution, resolution);
            (xi, q.eval(xi, eps))
        })
        .collect();
    let mut stats = GridStats {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        argmin: [0.0; 2],
        argmax: [0.0; 2],
        max_error: 0.0,
        points: vals.len(),
    };
    for (xi, v) in vals {
        if v.value < stats.min {
            stats.min = v.value;
            stats.argmin = xi;
        }
        if v.value > stats.max {
            stats.max = v.value;
            stats.argmax = xi;
        }
        stats.max_error = stats.max_error.max(v.error);
    }
    stats
}

/// Square box of half-width `half` on the torus [0,1)².
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZeroBox {
    pub center: [f64; 2],
    pub half: f64,
}

fn may_vanish(d: &DigitSet, lip: f64, b: &ZeroBox, tol: f64) -> bool {
    mask_eval(d, b.center).norm() - lip * b.half * std::f64::consts::SQRT_2 <= tol
}

fn quarter(b: &ZeroBox) -> [ZeroBox; 4] {
    let h = b.half / 2.0;
    let [x, y] = b.center;
    [
        ZeroBox {
            center: [x - h, y - h],
            half: h,
        },
        ZeroBox {
            center: [x + h, y - h],
            half: h,
        },
        ZeroBox {
            center: [x - h, y + h],
            half: h,
        },
        ZeroBox {
            center: [x + h, y + h],
            half: h,
        },
    ]
}

/// Quadrisects the surviving boxes `rounds` times.
pub fn refine_boxes(d: &DigitSet, boxes: &[ZeroBox], rounds: u32, tol: f64) -> Vec<ZeroBox> {
    let lip = mask_lipschitz(d);
    let mut cur = boxes.to_vec();
    for _ in 0..rounds {
        cur = cur
            .par_iter()
            .flat_map_iter(|b| {
                quarter(b)
                    .into_iter()
                    .filter(|q| may_vanish(d, lip, q, tol))
            })
            .collect();
    }
    cur
}

/// Boxes of [0,1)² on which |m_D| may vanish; a box is discarded once
/// |m_D(center)| minus the Lipschitz bound over the box exceeds `tol`.
pub fn torus_zero_scan(
    d: &DigitSet,
    resolution: usize,
    refinements: u32,
    tol: f64,
) -> Vec<ZeroBox> {
    let lip = mask_lipschitz(d);
    let half = 0.5 / resolution as f64;
    let initial: Vec<ZeroBox> = (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % resolution, idx / resolution);
            ZeroBox {
                center: [(2 * i + 1) as f64 * half, (2 * j + 1) as f64 * half],
                half,
            }
        })
        .filter(|b| may_vanish(d, lip, b, tol))
        .collect();
    refine_boxes(d, &initial, refinements, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroCluster {
    pub center: [f64; 2],
    pub boxes: Vec<ZeroBox>,
}

fn circular_mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for x in xs {
        s += (2.0 * PI * x).sin();
        c += (2.0 * PI * x).cos();
    }
    (s.atan2(c) / (2.0 * PI)).rem_euclid(1.0)
}

/// Groups touching boxes (all of equal size), with wrap-around on the torus.
pub fn cluster_boxes(boxes: &[ZeroBox]) -> Vec<ZeroCluster> {
    if boxes.is_empty() {
        return Vec::new();
    }
    let size = 2.0 * boxes[0].half;
    let n = (1.0 / size).round() as i64;
    let cell = |b: &ZeroBox| {
        (
            ((b.center[0] / size).floor() as i64).rem_euclid(n),
            ((b.center[1] / size).floor() as i64).rem_euclid(n),
        )
    };
    let index: HashMap<(i64, i64), usize> = boxes
        .iter()
        .enumerate()
        .map(|(i, b)| (cell(b), i))
        .collect();
    let mut parent: Vec<usize> = (0..boxes.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, b) in boxes.iter().enumerate() {
        let (cx, cy) = cell(b);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(&j) = index.get(&((cx + dx).rem_euclid(n), (cy + dy).rem_euclid(n))) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<ZeroBox>> = HashMap::new();
    for (i, b) in boxes.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(*b);
    }
    let mut out: Vec<ZeroCluster> = groups
        .into_values()
        .map(|bs| ZeroCluster {
            center: [
                circular_mean(bs.iter().map(|b| b.center[0])),
                circular_mean(bs.iter().map(|b| b.center[1])),
            ],
            boxes: bs,
        })
        .collect();
    out.sort_by(|a, b| a.center.partial_cmp(&b.center).expect("finite centers"));
    out
}

/// Distance on the torus R²/Z².
pub fn torus_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = |x: f64, y: f64| {
        let t = (x - y).rem_euclid(1.0);
        t.min(1.0 - t)
    };
    d(a[0], b[0]).hypot(d(a[1], b[1]))
}
