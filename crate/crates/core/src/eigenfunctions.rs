//! Normalized eigenfunctions, the biorthogonal system and their two-term
//! asymptotic approximants.
//!
//! `y_n = omega(., lambda_n) / ||omega||` with the positive norm, so its
//! phase is the one of `omega` (normalised by `omega^[1](0) = 1`). With
//! `D_n = int y_n^2`, the biorthogonal function is `v_n = conj(y_n) /
//! conj(D_n)`, which makes `(y_n, v_n) = int y_n conj(v_n) = 1`.
//!
//! The approximants evaluate
//!
//! ```text
//! sqrt(2/pi) [ sin(nx) G1(x) + x cos(nx) G2 + cos(nx) G3(x) ]
//! ```
//!
//! where for `y`:
//!
//! ```text
//! G1 = 1 + (1/pi) int (pi-t) u_R cos(2nt) + 1/(2 pi n) int (pi-t)(u_R^2 - u_I^2) sin(2nt)
//!        - a_2n(x) - B_2n(x)/(2n)
//! G2 = mu_n
//! G3 = b_2n(x) + U(x)/(2n) + 2 w_2n(x) - A_2n(x)/(2n)
//! ```
//!
//! and for `v` every functional uses `conj(u)` and the constant part of `G1`
//! carries the weights `u_R + 2i u_I` and `u_R^2 - u_I^2 + 4i u_R u_I`.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::odesolve::QuasiSolution;
use crate::oscint::{discrete, merge_grid, uniform, upsilon_sup, OscProfile, PiecewisePoly};
use crate::potential::PotentialPrimitive;
use crate::quad;
use crate::spectrum::Eigenpair;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Samples of a complex function on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub x: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Potential mesh merged with `max(512, 16 n)` uniform intervals.
pub fn evaluation_grid(p: &PotentialPrimitive, n: usize) -> Vec<f64> {
    evaluation_grid_scaled(p, n, 1.0)
}

/// As [`evaluation_grid`] with the uniform part scaled by `density`.
pub fn evaluation_grid_scaled(p: &PotentialPrimitive, n: usize, density: f64) -> Vec<f64> {
    let k = (density * 512.max(16 * n) as f64).round().max(1.0) as usize;
    merge_grid(&p.mesh(), &uniform(k))
}

/// Gauss–Legendre panels on every mesh segment, fine enough for a
/// function oscillating with angular frequency `freq`.
fn panels(p: &PotentialPrimitive, freq: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for s in p.segments() {
        let k = ((s.len() * (freq + 1.0) / 1.5).ceil() as usize).max(1);
        let h = s.len() / k as f64;
        for j in 0..k {
            let a = s.start + h * j as f64;
            let b = if j + 1 == k { s.end } else { a + h };
            out.extend(quad::mapped(quad::gl16(), a, b));
        }
    }
    out
}

/// A normalized eigenfunction together with its biorthogonal partner.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    pub n: usize,
    pub lambda: Complex64,
    /// `||omega(., lambda_n)||`
    pub norm: f64,
    /// `int omega^2`
    pub omega_sq: Complex64,
    /// `D_n = int y_n^2`
    pub d: Complex64,
    solution: QuasiSolution,
}

impl Eigenfunction {
    pub fn new(e: &Eigenpair) -> Result<Self> {
        if !e.simple {
            return Err(Error::NotSimple { n: e.n });
        }
        let sol = &e.solution;
        let nodes = panels(sol.potential(), 2.0 * e.sqrt_lambda.norm());
        let (mut nsq, mut sq) = (0.0, Complex64::new(0.0, 0.0));
        for (x, w) in nodes {
            let o = sol.omega(x);
            nsq += w * o.norm_sqr();
            sq += w * (o * o);
        }
        let d = sq / nsq;
        if d.norm() < 1e-8 {
            return Err(Error::NearJordan { n: e.n, value: d });
        }
        Ok(Self { n: e.n, lambda: e.lambda, norm: nsq.sqrt(), omega_sq: sq, d, solution: sol.clone() })
    }

    pub fn y(&self, x: f64) -> Complex64 {
        self.solution.omega(x) / self.norm
    }

    pub fn v(&self, x: f64) -> Complex64 {
        self.y(x).conj() / self.d.conj()
    }

    pub fn y_on(&self, xs: &[f64]) -> GridFunction {
        GridFunction { x: xs.to_vec(), values: xs.iter().map(|&x| self.y(x)).collect() }
    }

    pub fn v_on(&self, xs: &[f64]) -> GridFunction {
        GridFunction { x: xs.to_vec(), values: xs.iter().map(|&x| self.v(x)).collect() }
    }

    pub fn solution(&self) -> &QuasiSolution {
        &self.solution
    }
}

pub fn normalized_y(e: &Eigenpair, xs: &[f64]) -> Result<GridFunction> {
    Ok(Eigenfunction::new(e)?.y_on(xs))
}

pub fn biorthogonal_v(e: &Eigenpair, xs: &[f64]) -> Result<GridFunction> {
    Ok(Eigenfunction::new(e)?.v_on(xs))
}

/// Both sides of `int omega^2 = omega_lambda(pi) omega'(pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationCheck {
    pub integral: Complex64,
    pub product: Complex64,
}

impl NormalizationCheck {
    pub fn relative_error(&self) -> f64 {
        (self.integral - self.product).norm() / self.integral.norm()
    }
}

pub fn normalization_identity(f: &Eigenfunction) -> NormalizationCheck {
    let s = f.solution();
    NormalizationCheck { integral: f.omega_sq, product: s.at_pi()[2] * s.omega_x_at_pi() }
}

/// `G[i][j] = (y_i, v_j) = int y_i conj(v_j)`.
pub fn gram_matrix(fs: &[Eigenfunction]) -> Vec<Vec<Complex64>> {
    let Some(first) = fs.first() else {
        return Vec::new();
    };
    let freq = fs.iter().map(|f| f.lambda.sqrt().norm()).fold(0.0, f64::max) * 2.0;
    let nodes = panels(first.solution().potential(), freq);
    // conj(v_j) = y_j / d_j
    let samples: Vec<Vec<Complex64>> =
        fs.par_iter().map(|f| nodes.iter().map(|&(x, _)| f.y(x)).collect()).collect();
    samples
        .iter()
        .map(|yi| {
            samples
                .iter()
                .zip(fs)
                .map(|(yj, fj)| {
                    let s: Complex64 =
                        nodes.iter().zip(yi.iter().zip(yj)).map(|((_, w), (a, b))| w * a * b).sum();
                    s / fj.d
                })
                .collect()
        })
        .collect()
}

/// `max |G - Id|` over the matrix.
pub fn gram_residual(g: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Eigenfunction,
    Biorthogonal,
}

/// The three coefficient groups of the two-term formula on a grid.
#[derive(Debug, Clone)]
pub struct AsymptoticApproximant {
    pub n: usize,
    pub variant: Variant,
    pub x: Vec<f64>,
    /// Multiplies `sqrt(2/pi) sin(nx)`.
    pub sin_group: Vec<Complex64>,
    /// Multiplies `sqrt(2/pi) x cos(nx)`.
    pub xcos_group: Complex64,
    /// Multiplies `sqrt(2/pi) cos(nx)`.
    pub cos_group: Vec<Complex64>,
}

/// `(pi-t)`-weighted constants of the first group.
fn weighted_constants(p: &PotentialPrimitive, n: f64, variant: Variant) -> (Complex64, Complex64) {
    let u = PiecewisePoly::from_potential(p);
    let u2 = u.square();
    let omega = Complex64::from(2.0 * n);
    let (lin, quad): (PiecewisePoly, PiecewisePoly) = match variant {
        Variant::Eigenfunction => (u.map(|c| c.re.into()), u2.map(|c| c.re.into())),
        Variant::Biorthogonal => {
            (u.map(|c| c.re + 2.0 * I * c.im), u2.map(|c| c.re + 2.0 * I * c.im))
        }
    };
    (lin.times_pi_minus_t().total_cos(omega), quad.times_pi_minus_t().total_sin(omega))
}

impl AsymptoticApproximant {
    pub fn new(n: usize, p: &PotentialPrimitive, variant: Variant, xs: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        let nf = n as f64;
        let q = match variant {
            Variant::Eigenfunction => p.clone(),
            Variant::Biorthogonal => p.conj(),
        };
        let prof = OscProfile::compute(&q, nf.into(), xs)?;
        let mu = discrete(n as u32, &q)?.mu_n;
        let (c1, c2) = weighted_constants(p, nf, variant);
        let base = 1.0 + c1 / PI + c2 / (2.0 * PI * nf);
        let inv = 1.0 / (2.0 * nf);
        let sin_group =
            (0..xs.len()).map(|i| base - prof.a[i] - inv * prof.big_b[i]).collect();
        let cos_group = (0..xs.len())
            .map(|i| prof.b[i] + inv * prof.big_u[i] + 2.0 * prof.w[i] - inv * prof.big_a[i])
            .collect();
        Ok(Self { n, variant, x: xs.to_vec(), sin_group, xcos_group: mu, cos_group })
    }

    pub fn values(&self) -> GridFunction {
        let k = (2.0 / PI).sqrt();
        let nf = self.n as f64;
        let values = self
            .x
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let (s, c) = (nf * x).sin_cos();
                k * (s * self.sin_group[i] + x * c * self.xcos_group + c * self.cos_group[i])
            })
            .collect();
        GridFunction { x: self.x.clone(), values }
    }
}

pub fn approx_y(n: usize, p: &PotentialPrimitive, xs: &[f64]) -> Result<GridFunction> {
    Ok(AsymptoticApproximant::new(n, p, Variant::Eigenfunction, xs)?.values())
}

pub fn approx_v(n: usize, p: &PotentialPrimitive, xs: &[f64]) -> Result<GridFunction> {
    Ok(AsymptoticApproximant::new(n, p, Variant::Biorthogonal, xs)?.values())
}

/// Two-term predictions for `|lambda_n| ||omega||^2` and `D_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormExpansions {
    pub norm_sq: Complex64,
    pub d: Complex64,
}

pub fn norm_expansions(n: usize, p: &PotentialPrimitive) -> NormExpansions {
    let nf = n as f64;
    let omega = Complex64::from(2.0 * nf);
    let ur = PiecewisePoly::from_potential(&p.real_part());
    let ui = PiecewisePoly::from_potential(&p.imag_part());
    let u2 = PiecewisePoly::from_potential(p).square();
    let re_u2 = u2.map(|c| c.re.into());
    // u_R u_I = Im(u^2)/2
    let ruri = u2.map(|c| (0.5 * c.im).into());
    let norm_sq = PI / 2.0
        - ur.times_pi_minus_t().total_cos(omega)
        - re_u2.times_pi_minus_t().total_sin(omega) / (2.0 * nf);
    let d = 1.0
        - 2.0 * I / PI * ui.times_pi_minus_t().total_cos(omega)
        - 2.0 * I / (PI * nf) * ruri.times_pi_minus_t().total_sin(omega);
    NormExpansions { norm_sq, d }
}

/// One row of the remainder table.
#[derive(Debug, Clone, PartialEq)]
pub struct RemainderRecord {
    pub n: usize,
    pub lambda: Complex64,
    pub mu: Complex64,
    /// `sqrt(lambda_n) - n - mu_n`
    pub rho: Complex64,
    pub upsilon: f64,
    /// `|rho| / Upsilon^2`, `NaN` when `Upsilon = 0`.
    pub rho_ratio: f64,
    /// `sup |y_n - approx_y|`
    pub r_y: f64,
    /// `sup |v_n - approx_v|`
    pub r_v: f64,
    /// Running sums of `r_y`, `r_v` from the first row.
    pub partial_y: f64,
    pub partial_v: f64,
    /// `|lambda| ||omega||^2` minus its expansion.
    pub norm_rem: f64,
    /// `D_n` minus its expansion.
    pub d_rem: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainderTable {
    pub records: Vec<RemainderRecord>,
    /// Indices left out because the eigenvalue is not simple.
    pub skipped: Vec<usize>,
}

/// Grid sup of `|f - g|` followed by one refinement pass around the argmax.
fn refined_sup(
    xs: &[f64],
    diff: &[f64],
    local: impl Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<f64> {
    let (imax, mut best) =
        diff.iter().enumerate().fold((0, 0.0), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let lo = xs[imax.saturating_sub(1)];
    let hi = xs[(imax + 1).min(xs.len() - 1)];
    if hi > lo {
        let pts: Vec<f64> = (1..32).map(|k| lo + (hi - lo) * f64::from(k) / 32.0).collect();
        best = local(&pts)?.into_iter().fold(best, f64::max);
    }
    Ok(best)
}

fn remainder_row(e: &Eigenpair, p: &PotentialPrimitive) -> Result<RemainderRecord> {
    let f = Eigenfunction::new(e)?;
    let n = e.n;
    let xs = evaluation_grid(p, n);
    let mu = discrete(n as u32, p)?.mu_n;
    let rho = e.sqrt_lambda - n as f64 - mu;
    let ups = upsilon_sup(e.sqrt_lambda, p, 4.0)?.upsilon;
    let rho_ratio = if ups > 0.0 { rho.norm() / (ups * ups) } else { f64::NAN };

    let sup = |approx: &dyn Fn(&[f64]) -> Result<GridFunction>, exact: &dyn Fn(f64) -> Complex64| {
        let a = approx(&xs)?;
        let diff: Vec<f64> = xs.iter().zip(&a.values).map(|(&x, v)| (exact(x) - v).norm()).collect();
        refined_sup(&xs, &diff, |pts| {
            let a = approx(pts)?;
            Ok(pts.iter().zip(&a.values).map(|(&x, v)| (exact(x) - v).norm()).collect())
        })
    };
    let r_y = sup(&|g| approx_y(n, p, g), &|x| f.y(x))?;
    let r_v = sup(&|g| approx_v(n, p, g), &|x| f.v(x))?;

    let ex = norm_expansions(n, p);
    let norm_rem = (e.lambda.norm() * f.norm * f.norm - ex.norm_sq).norm();
    let d_rem = (f.d - ex.d).norm();
    Ok(RemainderRecord {
        n,
        lambda: e.lambda,
        mu,
        rho,
        upsilon: ups,
        rho_ratio,
        r_y,
        r_v,
        partial_y: 0.0,
        partial_v: 0.0,
        norm_rem,
        d_rem,
    })
}

/// Remainders for every eigenpair whose index lies in `range`.
pub fn remainders(
    pairs: &[Eigenpair],
    range: RangeInclusive<usize>,
    p: &PotentialPrimitive,
) -> Result<RemainderTable> {
    let chosen: Vec<&Eigenpair> = pairs.iter().filter(|e| range.contains(&e.n)).collect();
    let skipped = chosen.iter().filter(|e| !e.simple).map(|e| e.n).collect();
    let mut records = chosen
        .par_iter()
        .filter(|e| e.simple)
        .map(|e| remainder_row(e, p))
        .collect::<Result<Vec<_>>>()?;
    let (mut sy, mut sv) = (0.0, 0.0);
    for r in &mut records {
        sy += r.r_y;
        sv += r.r_v;
        r.partial_y = sy;
        r.partial_v = sv;
    }
    Ok(RemainderTable { records, skipped })
}
