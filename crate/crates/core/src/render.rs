//! Attractor point clouds, |μ̂|² heat fields and binary PPM output.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::model::{inverse_power, MeasureInstance};
use crate::numerics::{FourierEvaluator, Window};
use crate::scalar::Rational;

pub const DEFAULT_POINT_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub points: Vec<[f64; 2]>,
    pub depth: u32,
}

/// All p^depth sums Σ_{k=1}^{depth} M^{−k} d_k, in base-p word order.
pub fn attractor_points(inst: &MeasureInstance, depth: u32, cap: usize) -> Result<PointCloud> {
    if depth == 0 {
        return Err(Error::LimitExceeded("depth must be at least 1".into()));
    }
    let p = inst.p() as usize;
    let total = (p as u128).checked_pow(depth).filter(|n| *n <= cap as u128);
    let Some(total) = total else {
        return Err(Error::LimitExceeded(format!(
            "{p}^{depth} points exceed the cap {cap}"
        )));
    };
    let mats: Vec<[[f64; 2]; 2]> = (1..=depth as u64)
        .map(|k| inverse_power(&inst.m, k).to_f64())
        .collect();
    let digits: Vec<[f64; 2]> = inst
        .d
        .digits()
        .iter()
        .map(|&(x, y)| [x as f64, y as f64])
        .collect();
    let points = (0..total as usize)
        .into_par_iter()
        .map(|mut w| {
            let mut acc = [0.0, 0.0];
            // Least significant base-p digit is d_depth.
            for m in mats.iter().rev() {
                let d = digits[w % p];
                w /= p;
                acc[0] += m[0][0] * d[0] + m[0][1] * d[1];
                acc[1] += m[1][0] * d[0] + m[1][1] * d[1];
            }
            acc
        })
        .collect();
    Ok(PointCloud { points, depth })
}

/// Samples of |μ̂|² on pixel centres, row 0 at the top of the window.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatField {
    pub width: usize,
    pub height: usize,
    pub window: Window,
    pub values: Vec<f64>,
    /// Exact zero sites folded into their pixels.
    pub sites: Vec<(usize, usize)>,
}

impl HeatField {
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

fn pixel_of(
    window: &Window,
    width: usize,
    height: usize,
    x: f64,
    y: f64,
) -> Option<(usize, usize)> {
    let fx = (x - window.x0) / (window.x1 - window.x0);
    let fy = (window.y1 - y) / (window.y1 - window.y0);
    if !(0.0..1.0).contains(&fx) || !(0.0..1.0).contains(&fy) {
        return None;
    }
    Some(((fx * width as f64) as usize, (fy * height as f64) as usize))
}

/// Exact points (M*)^k(ja/p + z) inside the window, 1 ≤ k ≤ kmax.
pub fn zero_sites(inst: &MeasureInstance, a: (i64, i64), window: &Window, kmax: u64) -> Vec<Vec2> {
    let p = inst.p() as i64;
    let mstar = inst.m.adjoint();
    let mut out = Vec::new();
    let mut mk = Mat2::identity();
    for k in 1..=kmax {
        mk = mk.mul(&mstar);
        let inv = inverse_power(&inst.m, k).transpose().to_f64();
        let corners = [
            [window.x0, window.y0],
            [window.x0, window.y1],
            [window.x1, window.y0],
            [window.x1, window.y1],
        ];
        let pre: Vec<[f64; 2]> = corners
            .iter()
            .map(|c| {
                [
                    inv[0][0] * c[0] + inv[0][1] * c[1],
                    inv[1][0] * c[0] + inv[1][1] * c[1],
                ]
            })
            .collect();
        let lo = |i: usize| {
            pre.iter()
                .map(|v| v[i])
                .fold(f64::INFINITY, f64::min)
                .floor() as i64
                - 1
        };
        let hi = |i: usize| {
            pre.iter()
                .map(|v| v[i])
                .fold(f64::NEG_INFINITY, f64::max)
                .ceil() as i64
                + 1
        };
        for j in 1..p {
            for z1 in lo(0)..=hi(0) {
                for z2 in lo(1)..=hi(1) {
                    let v = Vec2::from_rationals(
                        Rational::new(BigInt::from(j * a.0 + p * z1), BigInt::from(p)),
                        Rational::new(BigInt::from(j * a.1 + p * z2), BigInt::from(p)),
                    );
                    let w = mk.apply(&v);
                    let [x, y] = w.to_f64();
                    if x >= window.x0
                        && x < window.x1
                        && y > window.y0
                        && y <= window.y1
                        && !out.contains(&w)
                    {
                        out.push(w);
                    }
                }
            }
        }
    }
    out
}

/// |μ̂|² at each pixel centre, lowered to the exact value at any listed site inside the pixel.
pub fn heat_field(
    eval: &FourierEvaluator,
    window: Window,
    width: usize,
    height: usize,
    sites: &[Vec2],
    eps: f64,
) -> HeatField {
    let dx = (window.x1 - window.x0) / width as f64;
    let dy = (window.y1 - window.y0) / height as f64;
    let mut values: Vec<f64> = (0..width * height)
        .into_par_iter()
        .map(|idx| {
            let (col, row) = (idx % width, idx / width);
            let x = window.x0 + (col as f64 + 0.5) * dx;
            let y = window.y1 - (row as f64 + 0.5) * dy;
            eval.mu_hat_f64([x, y], eps).value.norm_sqr()
        })
        .collect();
    let mut hit = Vec::new();
    for s in sites {
        let [x, y] = s.to_f64();
        if let Some((col, row)) = pixel_of(&window, width, height, x, y) {
            let v = eval.mu_hat(s, eps).value.norm_sqr();
            let slot = &mut values[row * width + col];
            *slot = slot.min(v);
            hit.push((col, row));
        }
    }
    HeatField {
        width,
        height,
        window,
        values,
        sites: hit,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Image {
    pub fn blank(width: usize, height: usize) -> Self {
        Image {
            width,
            height,
            rgb: vec![255; width * height * 3],
        }
    }

    pub fn pixel(&self, col: usize, row: usize) -> [u8; 3] {
        let i = (row * self.width + col) * 3;
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    pub fn ppm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.ppm_bytes())?;
        Ok(())
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::LimitExceeded(
            "image dimensions must be positive".into(),
        ));
    }
    Ok(())
}

/// Black points on white; points outside the window are dropped.
pub fn rasterize_cloud(
    cloud: &PointCloud,
    width: usize,
    height: usize,
    window: &Window,
) -> Result<Image> {
    check_dims(width, height)?;
    let mut img = Image::blank(width, height);
    for &[x, y] in &cloud.points {
        if let Some((col, row)) = pixel_of(window, width, height, x, y) {
            let i = (row * width + col) * 3;
            img.rgb[i..i + 3].copy_from_slice(&[0, 0, 0]);
        }
    }
    Ok(img)
}

/// Fixed dark-to-light ramp over [0, 1].
fn palette(v: f64) -> [u8; 3] {
    let t = v.clamp(0.0, 1.0).sqrt();
    let ch = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    [ch(8.0, 255.0), ch(8.0, 224.0), ch(40.0, 96.0)]
}

pub fn rasterize_heat(field: &HeatField) -> Result<Image> {
    check_dims(field.width, field.height)?;
    let mut img = Image::blank(field.width, field.height);
    for (i, v) in field.values.iter().enumerate() {
        img.rgb[i * 3..i * 3 + 3].copy_from_slice(&palette(*v));
    }
    Ok(img)
}

/// Window containing a cloud, padded by 5% on each side.
pub fn bounding_window(cloud: &PointCloud) -> Window {
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &[x, y] in &cloud.points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
    Window {
        x0: x0 - pad,
        x1: x1 + pad,
        y0: y0 - pad,
        y1: y1 + pad,
    }
}

pub fn ppm_file_name(tag: &str, depth: u32, width: usize, height: usize) -> String {
    format!("{tag}_depth{depth}_{width}x{height}.ppm")
}

pub fn heat_file_name(tag: &str, width: usize, height: usize) -> String {
    format!("{tag}_heat_{width}x{height}.ppm")
}

pub fn output_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
