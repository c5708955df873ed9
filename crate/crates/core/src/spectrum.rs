//! Zeros of `omega(pi, lambda)` and their certification.
//!
//! Eigenvalues are located in two ways. Those below a low cut are found by an
//! argument-principle sweep over subdivided boxes; the rest start from the
//! asymptotic seeds `(n + mu_n)^2` and are refined by Newton's method. The
//! final set is certified by counting zeros inside one rectangle that, by a
//! numerical-range bound, contains every eigenvalue with `Re lambda < X`.
//!
//! The bound: with `t = ||y'||`, `||y|| = 1` and `u` replaced by its
//! mean-zero gauge `u~`, `|int q |y|^2| <= 2 ||u~|| ||y||_inf t <= c t^{3/2}`
//! where `c = 2 sqrt(2) ||u~||` (a factor `sqrt 2` of slack). Hence
//! `Re lambda >= t^2 - c_R t^{3/2} >= -(27/256) c_R^4` and
//! `|Im lambda| <= c_I t^{3/2}`.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::odesolve::{characteristic_scaled, QuasiSolution};
use crate::oscint::discrete;
use crate::potential::PotentialPrimitive;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Newton stopping rule `|delta| <= tol (1 + |lambda|)`.
    pub tol: f64,
    /// Eigenvalues with index up to this are found by the box sweep.
    pub sweep_below: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { tol: 1e-12, sweep_below: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    /// 1-based position in the ordering by modulus, then argument.
    pub n: usize,
    pub lambda: Complex64,
    pub sqrt_lambda: Complex64,
    /// `omega_lambda(pi, lambda_n)`.
    pub char_deriv: Complex64,
    pub simple: bool,
    pub solution: QuasiSolution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rect {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.re_lo && z.re < self.re_hi && z.im > self.im_lo && z.im < self.im_hi
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_lo, self.im_lo),
            Complex64::new(self.re_hi, self.im_lo),
            Complex64::new(self.re_hi, self.im_hi),
            Complex64::new(self.re_lo, self.im_hi),
        ]
    }

    fn split(&self, frac: f64) -> (Rect, Rect) {
        if self.re_hi - self.re_lo >= self.im_hi - self.im_lo {
            let m = self.re_lo + frac * (self.re_hi - self.re_lo);
            (Rect { re_hi: m, ..*self }, Rect { re_lo: m, ..*self })
        } else {
            let m = self.im_lo + frac * (self.im_hi - self.im_lo);
            (Rect { im_hi: m, ..*self }, Rect { im_lo: m, ..*self })
        }
    }

    fn diameter(&self) -> f64 {
        (self.re_hi - self.re_lo).hypot(self.im_hi - self.im_lo)
    }

    fn completeness_error(&self, winding: usize, found: usize) -> Error {
        Error::Completeness {
            winding,
            found,
            re_lo: self.re_lo,
            re_hi: self.re_hi,
            im_lo: self.im_lo,
            im_hi: self.im_hi,
        }
    }
}

/// Result of the completeness check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub rect: Rect,
    pub winding: usize,
    pub found: usize,
    /// Whether a full recovery sweep was needed.
    pub recovered: bool,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub pairs: Vec<Eigenpair>,
    pub certificate: Certificate,
}

impl Spectrum {
    pub fn lambdas(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|e| e.lambda).collect()
    }
}

/// `(omega(pi, lambda), omega_lambda(pi, lambda))`.
pub fn characteristic(lambda: Complex64, p: &PotentialPrimitive) -> Result<(Complex64, Complex64)> {
    let s = QuasiSolution::new(lambda, p)?.at_pi();
    Ok((s[0], s[2]))
}

/// `(n + mu_n)^2`.
pub fn seed(n: usize, p: &PotentialPrimitive) -> Result<Complex64> {
    let n32 = u32::try_from(n).map_err(|_| Error::InvalidParameter(format!("n = {n} too large")))?;
    let d = discrete(n32, p)?;
    Ok((n as f64 + d.mu_n).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    pub lambda: Complex64,
    pub char_deriv: Complex64,
    pub iterations: usize,
    pub converged: bool,
    /// `omega_lambda` below the simplicity threshold.
    pub degenerate: bool,
}

/// Degeneracy threshold for `|omega_lambda(pi, lambda)|`; the unperturbed
/// value is `pi / (2 n^2)`.
pub fn simplicity_threshold(lambda: Complex64) -> f64 {
    1e-6 * PI / (2.0 * lambda.norm().max(1.0))
}

/// Newton's method on `omega(pi, .)`, with a secant step when the derivative
/// is unusable.
pub fn refine(lambda0: Complex64, p: &PotentialPrimitive, tol: f64) -> Result<Refined> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let mut lam = lambda0;
    let mut prev: Option<(Complex64, Complex64)> = None;
    let mut converged = false;
    let mut iterations = 0;
    let mut polish = false;
    while iterations < 50 {
        iterations += 1;
        let s = characteristic_scaled(lam, p);
        let f = s.omega * s.log_scale.exp();
        let mut delta = s.omega / s.omega_dl;
        if !(delta.re.is_finite() && delta.im.is_finite()) {
            delta = match prev {
                Some((l0, f0)) if f != f0 && f.is_finite() => f * (lam - l0) / (f - f0),
                _ => break,
            };
        }
        // Stay within roughly one eigenvalue spacing.
        let cap = 2.0 * lam.norm().sqrt() + 1.0;
        if delta.norm() > cap {
            delta *= cap / delta.norm();
        }
        prev = Some((lam, f));
        lam -= delta;
        if polish {
            converged = true;
            break;
        }
        if delta.norm() <= tol * (1.0 + lam.norm()) {
            polish = true;
        }
    }
    if !(lam.re.is_finite() && lam.im.is_finite()) {
        return Err(Error::NoConvergence { start: lambda0, last: lam });
    }
    let (_, dl) = characteristic(lam, p)?;
    Ok(Refined {
        lambda: lam,
        char_deriv: dl,
        iterations,
        converged,
        degenerate: dl.norm() <= simplicity_threshold(lam),
    })
}

/// Numerical-range enclosure of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub c_re: f64,
    pub c_im: f64,
}

impl SpectralBounds {
    pub fn new(p: &PotentialPrimitive) -> Self {
        let m = p.mean_zero();
        let k = 2.0 * 2f64.sqrt();
        Self { c_re: k * m.real_part().l2_norm(), c_im: k * m.imag_part().l2_norm() }
    }

    /// Every eigenvalue has `Re lambda > re_min()`.
    pub fn re_min(&self) -> f64 {
        -(27.0 / 256.0) * self.c_re.powi(4) - 1.0
    }

    /// `|Im lambda|` bound for eigenvalues with `Re lambda <= x`.
    pub fn im_max(&self, x: f64) -> f64 {
        // largest s with s^4 - c s^3 = x, t = s^2
        let c = self.c_re;
        let x = x.max(0.0);
        let mut s = c + x.powf(0.25) + 1.0;
        for _ in 0..100 {
            let f = s.powi(4) - c * s.powi(3) - x;
            let d = 4.0 * s.powi(3) - 3.0 * c * s * s;
            let next = s - f / d;
            if (s - next).abs() <= 1e-14 * s {
                s = next;
                break;
            }
            s = next;
        }
        self.c_im * s.powi(3) + 1.0
    }

    pub fn rect(&self, x: f64) -> Rect {
        let h = self.im_max(x);
        Rect { re_lo: self.re_min(), re_hi: x, im_lo: -h, im_hi: h }
    }
}

struct Sample {
    lam: Complex64,
    dir: Complex64,
    dlog: Complex64,
}

fn sample(p: &PotentialPrimitive, lam: Complex64) -> Result<Sample> {
    let s = characteristic_scaled(lam, p);
    let m = s.omega.norm();
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::ContourZero(lam));
    }
    Ok(Sample { lam, dir: s.omega / m, dlog: s.omega_dl / s.omega })
}

fn piece_arg(p: &PotentialPrimitive, a: &Sample, b: &Sample) -> Result<f64> {
    let delta = (b.dir / a.dir).arg();
    let pred = (0.5 * (a.dlog + b.dlog) * (b.lam - a.lam)).im;
    // Zeros are about one unit apart in sqrt(lambda); resolve that scale first.
    let resolved = (b.lam - a.lam).norm() <= 0.5 * a.lam.norm().min(b.lam.norm()).sqrt() + 0.25;
    if resolved && delta.abs() <= FRAC_PI_4 && (delta - pred).abs() <= FRAC_PI_8 {
        return Ok(delta);
    }
    if (b.lam - a.lam).norm() < 1e-13 * (1.0 + a.lam.norm()) {
        return Err(Error::ContourZero(a.lam));
    }
    let m = sample(p, 0.5 * (a.lam + b.lam))?;
    Ok(piece_arg(p, a, &m)? + piece_arg(p, &m, b)?)
}

fn edge_arg(p: &PotentialPrimitive, a: Complex64, b: Complex64) -> Result<f64> {
    const PIECES: usize = 16;
    let pts: Vec<Sample> = (0..=PIECES)
        .map(|k| sample(p, a + (b - a) * (k as f64 / PIECES as f64)))
        .collect::<Result<_>>()?;
    pts.windows(2).map(|w| piece_arg(p, &w[0], &w[1])).sum()
}

/// Number of zeros of `omega(pi, .)` inside `rect`, with multiplicity.
pub fn winding(p: &PotentialPrimitive, rect: &Rect) -> Result<usize> {
    let c = rect.corners();
    let total: f64 =
        (0..4).map(|k| edge_arg(p, c[k], c[(k + 1) % 4])).collect::<Result<Vec<_>>>()?.iter().sum();
    let turns = total / (2.0 * PI);
    let k = turns.round();
    if (turns - k).abs() > 0.25 || k < 0.0 {
        return Err(Error::NonFinite(format!("winding number {turns} is not a whole count")));
    }
    Ok(k as usize)
}

const SPLITS: [f64; 3] = [0.4871, 0.5313, 0.4429];

/// All zeros inside `rect`, given that it holds `count` of them.
fn sweep(
    p: &PotentialPrimitive,
    rect: Rect,
    count: usize,
    tol: f64,
    out: &mut Vec<Complex64>,
) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    if count == 1 {
        if let Ok(r) = refine(rect.center(), p, tol) {
            if r.converged && rect.contains(r.lambda) {
                out.push(r.lambda);
                return Ok(());
            }
        }
    }
    let c = rect.center();
    if rect.diameter() < 1e-7 * (1.0 + c.norm()) {
        let lam = refine(c, p, tol).map(|r| r.lambda).unwrap_or(c);
        out.extend(std::iter::repeat_n(lam, count));
        return Ok(());
    }
    for frac in SPLITS {
        let (r1, r2) = rect.split(frac);
        let (Ok(w1), Ok(w2)) = (winding(p, &r1), winding(p, &r2)) else {
            continue;
        };
        if w1 + w2 != count {
            continue;
        }
        sweep(p, r1, w1, tol, out)?;
        return sweep(p, r2, w2, tol, out);
    }
    Err(rect.completeness_error(count, 0))
}

/// Box sweep of `rect`: winding count followed by subdivision.
pub fn zeros_in(p: &PotentialPrimitive, rect: Rect, tol: f64) -> Result<Vec<Complex64>> {
    let w = winding(p, &rect)?;
    let mut out = Vec::with_capacity(w);
    sweep(p, rect, w, tol, &mut out)?;
    Ok(out)
}

fn order(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg()))
}

fn is_duplicate(list: &[Complex64], z: Complex64) -> bool {
    list.iter().any(|w| (w - z).norm() <= 1e-8 * (1.0 + z.norm()))
}

/// Sweeps `[re_min, x]` and retries with the cut moved if the contour runs
/// into a zero.
fn sweep_below(p: &PotentialPrimitive, b: &SpectralBounds, x: f64, tol: f64) -> Result<(Rect, Vec<Complex64>)> {
    let mut last = None;
    for shift in [0.0, 0.173, -0.291, 0.411] {
        let rect = b.rect(x + shift);
        match zeros_in(p, rect, tol) {
            Ok(z) => return Ok((rect, z)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// The first `count` eigenvalues, ordered by modulus and then argument in
/// `(-pi, pi]`, with a completeness certificate.
pub fn eigenvalues(count: usize, p: &PotentialPrimitive, opts: &SpectrumOptions) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::InvalidParameter("number of eigenvalues must be >= 1".into()));
    }
    let bounds = SpectralBounds::new(p);
    let low = opts.sweep_below.min(count);
    let x_low = (low as f64 + 0.5).powi(2);
    let (low_rect, mut found) = sweep_below(p, &bounds, x_low, opts.tol)?;

    let seeded: Vec<Result<Refined>> = (low + 1..=count + 2)
        .into_par_iter()
        .map(|n| seed(n, p).and_then(|s| refine(s, p, opts.tol)))
        .collect();
    for r in seeded.into_iter().flatten() {
        if r.converged && r.lambda.re >= low_rect.re_hi && !is_duplicate(&found, r.lambda) {
            found.push(r.lambda);
        }
    }

    let (rect, winding_count, recovered) = match certify(p, &bounds, &found, count) {
        Ok((rect, w)) if in_rect(&found, &rect) == w => (rect, w, false),
        _ => {
            // Recovery: sweep the whole rectangle.
            let guess = found.iter().map(|z| z.norm()).fold(x_low, f64::max) + 1.0;
            let (rect, all) = sweep_below(p, &bounds, guess, opts.tol)?;
            let mut all = all;
            all.sort_by(order);
            if all.len() < count {
                return Err(rect.completeness_error(all.len(), found.len()));
            }
            found = all;
            match certify(p, &bounds, &found, count) {
                Ok((rect, w)) if in_rect(&found, &rect) == w => (rect, w, true),
                Ok((rect, w)) => return Err(rect.completeness_error(w, in_rect(&found, &rect))),
                Err(e) => return Err(e),
            }
        }
    };

    found.sort_by(order);
    let pairs = found[..count]
        .par_iter()
        .enumerate()
        .map(|(i, &lam)| {
            let solution = QuasiSolution::new(lam, p)?;
            let char_deriv = solution.at_pi()[2];
            Ok(Eigenpair {
                n: i + 1,
                lambda: lam,
                sqrt_lambda: lam.sqrt(),
                char_deriv,
                simple: char_deriv.norm() > simplicity_threshold(lam),
                solution,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let found_in = in_rect(&found, &rect);
    Ok(Spectrum {
        pairs,
        certificate: Certificate { rect, winding: winding_count, found: found_in, recovered },
    })
}

fn in_rect(list: &[Complex64], rect: &Rect) -> usize {
    list.iter().filter(|z| rect.contains(**z)).count()
}

/// Chooses the right edge between the `count`-th eigenvalue (by modulus) and
/// the next one to the right, and counts zeros in the resulting rectangle.
fn certify(
    p: &PotentialPrimitive,
    bounds: &SpectralBounds,
    found: &[Complex64],
    count: usize,
) -> Result<(Rect, usize)> {
    let mut sorted = found.to_vec();
    sorted.sort_by(order);
    if sorted.len() <= count {
        let x = sorted.iter().map(|z| z.norm()).fold(0.0, f64::max) + 1.0;
        let rect = bounds.rect(x);
        return Err(rect.completeness_error(0, sorted.len()));
    }
    let r_a = sorted[..count].iter().map(|z| z.norm().max(z.re)).fold(f64::MIN, f64::max);
    let r_b = sorted.iter().map(|z| z.re).filter(|&re| re > r_a).fold(f64::INFINITY, f64::min);
    let x = if r_b.is_finite() { 0.5 * (r_a + r_b) } else { r_a + 1.0 };
    let mut last = None;
    for shift in [0.0, 0.01, -0.01, 0.03] {
        let rect = bounds.rect(x + shift * (r_b - r_a).min(1.0));
        match winding(p, &rect) {
            Ok(w) => return Ok((rect, w)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}
