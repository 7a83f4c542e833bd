//! One report shape for every command: JSON for machines, text for people.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use spectral_core::classify::{OrthoVerdict, SpectralVerdict};
use spectral_core::construct::{BizeroReport, FrequencySet, HadamardCertificate, HadamardTriple};
use spectral_core::model::MeasureInstance;
use spectral_core::numerics::{GridStats, Window};
use spectral_core::search::CliqueResult;
use spectral_core::zeros::ZeroStructureReport;

#[derive(Clone, Debug, Default, Serialize)]
pub struct InstanceEcho {
    pub name: String,
    pub matrix: [[String; 2]; 2],
    pub digits: Vec<[i64; 2]>,
    pub p: u64,
    pub base: String,
}

impl InstanceEcho {
    pub fn new(name: &str, inst: &MeasureInstance) -> Self {
        let m = &inst.m;
        InstanceEcho {
            name: name.to_string(),
            matrix: [
                [m.rho1_inv().to_string(), m.c().to_string()],
                ["0".into(), m.rho2_inv().to_string()],
            ],
            digits: inst.d.digits().iter().map(|&(x, y)| [x, y]).collect(),
            p: inst.p(),
            base: m.base().to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionReport {
    pub family: FrequencySet,
    pub bizero: BizeroReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct HadamardReport {
    pub triple: HadamardTriple,
    pub certificate: HadamardCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct QScanReport {
    pub family: String,
    pub points: usize,
    pub grid: usize,
    pub window: Window,
    pub eps: f64,
    pub stats: GridStats,
    /// max ≤ 1 + error bar + 1e−9.
    pub orthogonal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RenderReport {
    pub points: usize,
    pub depth: u32,
    pub files: Vec<PathBuf>,
    pub zero_sites: usize,
    /// Largest |μ̂|² over pixels holding an exact zero site.
    pub max_site_value: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub command: String,
    pub instance: InstanceEcho,
    pub zero_structure: Option<ZeroStructureReport>,
    pub spectral: Option<SpectralVerdict>,
    pub orthogonality: Option<OrthoVerdict>,
    pub construction: Option<ConstructionReport>,
    pub hadamard: Option<HadamardReport>,
    pub qscan: Option<QScanReport>,
    pub clique: Option<CliqueResult>,
    pub render: Option<RenderReport>,
    pub errors: Vec<String>,
    pub exit_code: i32,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let i = &self.instance;
        let _ = writeln!(out, "{} :: {}", self.command, i.name);
        let _ = writeln!(
            out,
            "  M = [[{}, {}], [0, {}]]  over {}",
            i.matrix[0][0], i.matrix[0][1], i.matrix[1][1], i.base
        );
        let digits: Vec<String> = i
            .digits
            .iter()
            .map(|d| format!("({},{})", d[0], d[1]))
            .collect();
        let _ = writeln!(out, "  D = {{{}}}  p = {}", digits.join(", "), i.p);
        if let Some(z) = &self.zero_structure {
            let a: Vec<String> = z
                .admissible
                .iter()
                .map(|v| format!("({}, {})", v.a.0, v.a.1))
                .collect();
            let _ = writeln!(
                out,
                "zero structure: {:?}  a = [{}]",
                z.exactness,
                a.join(", ")
            );
            let _ = writeln!(out, "  {}", z.note);
            for e in &z.extra_zeros {
                let _ = writeln!(out, "  extra zero near ({:.6}, {:.6})", e[0], e[1]);
            }
        }
        if let Some(s) = &self.spectral {
            let _ = writeln!(out, "spectrality: {:?}", s.outcome);
            for e in &s.evidence {
                let _ = writeln!(
                    out,
                    "  [{}] {} : {}",
                    if e.holds { "x" } else { " " },
                    e.condition,
                    e.value
                );
            }
        }
        if let Some(o) = &self.orthogonality {
            let _ = writeln!(out, "orthogonal exponentials: {:?}", o.outcome);
            if let Some(k) = &o.kappa {
                let _ = writeln!(out, "  kappa = {k}");
            }
            for e in &o.evidence {
                let _ = writeln!(
                    out,
                    "  [{}] {} : {}",
                    if e.holds { "x" } else { " " },
                    e.condition,
                    e.value
                );
            }
        }
        if let Some(h) = &self.hadamard {
            let t = &h.triple;
            let _ = writeln!(
                out,
                "hadamard triple (branch {:?}), conjugation {}",
                t.branch, t.conjugation
            );
            let _ = writeln!(out, "  M1 = {}", t.m);
            let _ = writeln!(out, "  D1 = {:?}", t.b);
            let l: Vec<String> = t.l.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "  L1 = {{{}}}", l.join(", "));
            let _ = writeln!(
                out,
                "  unitary: {} ({:?}, max |HH* - I| = {:.3e})",
                h.certificate.unitary, h.certificate.mode, h.certificate.deviation
            );
        }
        if let Some(c) = &self.construction {
            let _ = writeln!(
                out,
                "family {} ({} points, depth {})",
                c.family.provenance,
                c.family.len(),
                c.family.depth
            );
            for v in c.family.points.iter().take(12) {
                let _ = writeln!(out, "  {v}");
            }
            if c.family.len() > 12 {
                let _ = writeln!(out, "  ... {} more", c.family.len() - 12);
            }
            bizero_line(&mut out, &c.bizero);
        }
        if let Some(q) = &self.qscan {
            let _ = writeln!(
                out,
                "Q scan of {} ({} points) on {}^2 grid",
                q.family, q.points, q.grid
            );
            let _ = writeln!(
                out,
                "  min {:.12} max {:.12} (error <= {:.1e}); orthogonal: {}",
                q.stats.min, q.stats.max, q.stats.max_error, q.orthogonal
            );
        }
        if let Some(c) = &self.clique {
            let _ = writeln!(
                out,
                "max orthogonal clique: {} (pool {}, {} edges, edge depth {})",
                c.size, c.pool_size, c.edges, c.edge_kmax
            );
            for v in &c.witness.points {
                let _ = writeln!(out, "  {v}");
            }
            bizero_line(&mut out, &c.verification);
        }
        if let Some(r) = &self.render {
            let _ = writeln!(out, "rendered {} points at depth {}", r.points, r.depth);
            for f in &r.files {
                let _ = writeln!(out, "  wrote {}", f.display());
            }
            if let Some(v) = r.max_site_value {
                let _ = writeln!(
                    out,
                    "  {} zero sites, max |mu^|^2 there {:.3e}",
                    r.zero_sites, v
                );
            }
        }
        for e in &self.errors {
            let _ = writeln!(out, "error: {e}");
        }
        out
    }
}

fn bizero_line(out: &mut String, b: &BizeroReport) {
    match &b.failure {
        None => {
            let _ = writeln!(
                out,
                "  bi-zero check: pass ({} pairs, kmax {})",
                b.pairs_checked, b.kmax
            );
        }
        Some(f) => {
            let _ = writeln!(
                out,
                "  bi-zero check: FAIL at ({}, {}): {} ({})",
                f.i, f.j, f.difference, f.reason
            );
        }
    }
}
