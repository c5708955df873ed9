//! Oscillatory functionals of the antiderivative `u` at `z = lambda^{1/2}`.
//!
//! With `omega = 2z`:
//!
//! ```text
//! b(x) = int_0^x u   sin(omega t)      a(x) = int_0^x u   cos(omega t)
//! B(x) = int_0^x u^2 sin(omega t)      A(x) = int_0^x u^2 cos(omega t)
//! U(x) = int_0^x u^2
//! w(x) = int_0^x u(t) cos(omega t) int_0^t u(s) sin(omega s) ds dt
//! upsilon = b + U/(2z) + 2w - A/(2z)
//! ```
//!
//! `u^2` is the analytic square, not `|u|^2`. Because `u` is piecewise
//! linear every integrand is a low-degree polynomial times `e^{+-i omega t}`
//! on each segment, and all of them are integrated in closed form. The only
//! exception is `w` on short segments (`|omega| tau <= 6`), where a 20-point
//! Gauss–Legendre rule with the exact inner integral is already exact to
//! rounding and avoids the `1/omega^3` cancellation of the closed form.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::PotentialPrimitive;
use crate::quad;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `J_k = int_0^tau s^k e^{i beta s} ds` for `k = 0..=3`.
pub(crate) fn moments(beta: Complex64, tau: f64) -> [Complex64; 4] {
    let x = beta * tau;
    if x.norm() < 2.0 {
        let ix = I * x;
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = [ZERO; 4];
        for j in 0..60 {
            for (k, a) in acc.iter_mut().enumerate() {
                *a += term / (k + j + 1) as f64;
            }
            term = term * ix / (j + 1) as f64;
            if term.norm() < 1e-18 {
                break;
            }
        }
        let mut p = tau;
        for a in &mut acc {
            *a *= p;
            p *= tau;
        }
        acc
    } else {
        let ib = I * beta;
        let e = (ib * tau).exp();
        let j0 = (e - 1.0) / ib;
        let j1 = (e * tau - j0) / ib;
        let j2 = (e * (tau * tau) - 2.0 * j1) / ib;
        let j3 = (e * tau.powi(3) - 3.0 * j2) / ib;
        [j0, j1, j2, j3]
    }
}

/// A polynomial of degree <= 3 in the local variable `s = t - start`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PolyPiece {
    pub start: f64,
    pub end: f64,
    pub coef: [Complex64; 4],
}

impl PolyPiece {
    fn len(&self) -> f64 {
        self.end - self.start
    }

    /// `int_start^{start+tau} f(t) e^{i beta t} dt`.
    fn partial_exp(&self, beta: Complex64, tau: f64) -> Complex64 {
        let j = moments(beta, tau);
        let s: Complex64 = self.coef.iter().zip(j.iter()).map(|(c, j)| c * j).sum();
        (I * beta * self.start).exp() * s
    }

    fn partial_sin(&self, omega: Complex64, tau: f64) -> Complex64 {
        (self.partial_exp(omega, tau) - self.partial_exp(-omega, tau)) / (2.0 * I)
    }

    fn partial_cos(&self, omega: Complex64, tau: f64) -> Complex64 {
        0.5 * (self.partial_exp(omega, tau) + self.partial_exp(-omega, tau))
    }
}

/// Piecewise polynomial on the potential mesh.
#[derive(Debug, Clone)]
pub(crate) struct PiecewisePoly {
    pieces: Vec<PolyPiece>,
}

impl PiecewisePoly {
    pub fn from_potential(p: &PotentialPrimitive) -> Self {
        let pieces = p
            .segments()
            .iter()
            .map(|s| PolyPiece { start: s.start, end: s.end, coef: [s.value, s.slope, ZERO, ZERO] })
            .collect();
        Self { pieces }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| PolyPiece { coef: p.coef.map(&f), ..*p })
            .collect();
        Self { pieces }
    }

    pub fn square(&self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                debug_assert!(p.coef[2] == ZERO && p.coef[3] == ZERO);
                let (a, b) = (p.coef[0], p.coef[1]);
                PolyPiece { coef: [a * a, 2.0 * a * b, b * b, ZERO], ..*p }
            })
            .collect();
        Self { pieces }
    }

    /// Multiplies by the weight `(pi - t)`.
    pub fn times_pi_minus_t(&self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                debug_assert!(p.coef[3] == ZERO);
                let w0 = PI - p.start;
                let c = p.coef;
                PolyPiece {
                    coef: [w0 * c[0], w0 * c[1] - c[0], w0 * c[2] - c[1], -c[2]],
                    ..*p
                }
            })
            .collect();
        Self { pieces }
    }

    /// `int_0^x f(t) e^{i beta t} dt` at every (ascending) `x` in `xs`.
    pub fn cumulative_exp(&self, beta: Complex64, xs: &[f64]) -> Vec<Complex64> {
        sweep(&self.pieces, xs, |piece, tau| piece.partial_exp(beta, tau))
    }

    /// `int_0^pi f(t) e^{i beta t} dt`.
    pub fn total_exp(&self, beta: Complex64) -> Complex64 {
        self.pieces.iter().map(|p| p.partial_exp(beta, p.len())).sum()
    }

    pub fn total_sin(&self, omega: Complex64) -> Complex64 {
        (self.total_exp(omega) - self.total_exp(-omega)) / (2.0 * I)
    }

    pub fn total_cos(&self, omega: Complex64) -> Complex64 {
        0.5 * (self.total_exp(omega) + self.total_exp(-omega))
    }

    /// `w` at every `x` in `xs`; requires a piecewise-linear `self`.
    pub fn cumulative_w(&self, omega: Complex64, xs: &[f64]) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(xs.len());
        let mut i = 0;
        let mut b_acc = ZERO;
        let mut w_acc = ZERO;
        for &x in xs {
            while i + 1 < self.pieces.len() && x >= self.pieces[i].end {
                let p = &self.pieces[i];
                w_acc += w_partial(p, b_acc, omega, p.len());
                b_acc += p.partial_sin(omega, p.len());
                i += 1;
            }
            let p = &self.pieces[i];
            out.push(w_acc + w_partial(p, b_acc, omega, (x - p.start).max(0.0)));
        }
        out
    }
}

fn sweep(
    pieces: &[PolyPiece],
    xs: &[f64],
    partial: impl Fn(&PolyPiece, f64) -> Complex64,
) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut i = 0;
    let mut acc = ZERO;
    for &x in xs {
        while i + 1 < pieces.len() && x >= pieces[i].end {
            acc += partial(&pieces[i], pieces[i].len());
            i += 1;
        }
        out.push(acc + partial(&pieces[i], (x - pieces[i].start).max(0.0)));
    }
    out
}

/// Contribution of one linear piece to `w` over `[start, start + tau]`, given
/// the inner integral `b` accumulated up to `start`.
fn w_partial(piece: &PolyPiece, b_start: Complex64, omega: Complex64, tau: f64) -> Complex64 {
    if tau == 0.0 {
        return ZERO;
    }
    let (alpha, gamma) = (piece.coef[0], piece.coef[1]);
    let p = piece.start;
    if (omega * tau).norm() <= 6.0 {
        return quad::mapped(quad::gl20(), 0.0, tau)
            .map(|(s, wt)| {
                let u = alpha + gamma * s;
                let inner = b_start + piece.partial_sin(omega, s);
                wt * u * (omega * (p + s)).cos() * inner
            })
            .sum();
    }

    // Closed form: inner = int_0^s (alpha + gamma r) sin(omega (p + r)) dr is a
    // sum of (poly in s) e^{k i omega s}, k in {-1, 0, 1}; times the outer
    // factor (alpha + gamma s) cos(omega (p + s)) gives k in -2..=2, deg <= 2.
    let e = (I * omega * p).exp();
    let ei = 1.0 / e;
    let g = I * omega;
    let g2 = g * g;
    let half_i = 1.0 / (2.0 * I);
    // index k + 2, polynomial coefficients in s
    let mut inner = [[ZERO; 3]; 5];
    inner[3] = [e * half_i * (alpha / g - gamma / g2), e * half_i * (gamma / g), ZERO];
    inner[1] = [-ei * half_i * (-alpha / g - gamma / g2), -ei * half_i * (-gamma / g), ZERO];
    inner[2] = [half_i * (e * (-alpha / g + gamma / g2) - ei * (alpha / g + gamma / g2)), ZERO, ZERO];
    let mut outer = [[ZERO; 3]; 5];
    outer[3] = [0.5 * e * alpha, 0.5 * e * gamma, ZERO];
    outer[1] = [0.5 * ei * alpha, 0.5 * ei * gamma, ZERO];

    let mut prod = [[ZERO; 3]; 5];
    for (ki, pi) in inner.iter().enumerate() {
        for (ko, po) in outer.iter().enumerate() {
            if pi.iter().all(|c| *c == ZERO) || po.iter().all(|c| *c == ZERO) {
                continue;
            }
            let k = ki + ko - 2;
            for (a, ca) in pi.iter().enumerate().take(2) {
                for (b, cb) in po.iter().enumerate().take(2) {
                    prod[k][a + b] += ca * cb;
                }
            }
        }
    }

    let mut total = b_start * piece.partial_cos(omega, tau);
    for (idx, poly) in prod.iter().enumerate() {
        let k = idx as i32 - 2;
        if k == 0 {
            total += poly[0] * tau + poly[1] * (tau * tau / 2.0) + poly[2] * (tau.powi(3) / 3.0);
            continue;
        }
        let gk = I * omega * f64::from(k);
        // Q = P/g - P'/g^2 + P''/g^3, antiderivative e^{g s} Q(s).
        let q = |s: f64| {
            let pv = poly[0] + poly[1] * s + poly[2] * s * s;
            let dp = poly[1] + 2.0 * poly[2] * s;
            let ddp = 2.0 * poly[2];
            pv / gk - dp / (gk * gk) + ddp / (gk * gk * gk)
        };
        total += (gk * tau).exp() * q(tau) - q(0.0);
    }
    total
}

fn check_grid(xs: &[f64]) -> Result<()> {
    for (i, &x) in xs.iter().enumerate() {
        if !(0.0..=PI).contains(&x) {
            return Err(Error::OutOfRange(x));
        }
        if i > 0 && x < xs[i - 1] {
            return Err(Error::MalformedGrid("evaluation points must be ascending".into()));
        }
    }
    Ok(())
}

/// Values of every functional at one `(x, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscIntegrals {
    pub z: Complex64,
    pub x: f64,
    pub b: Complex64,
    pub a: Complex64,
    /// `A`
    pub big_a: Complex64,
    /// `B`
    pub big_b: Complex64,
    /// `U`
    pub big_u: Complex64,
    pub w: Complex64,
    /// `None` when `z = 0`.
    pub upsilon: Option<Complex64>,
}

/// All functionals on an ascending list of points, computed in one sweep.
#[derive(Debug, Clone)]
pub struct OscProfile {
    pub z: Complex64,
    pub x: Vec<f64>,
    pub b: Vec<Complex64>,
    pub a: Vec<Complex64>,
    pub big_a: Vec<Complex64>,
    pub big_b: Vec<Complex64>,
    pub big_u: Vec<Complex64>,
    pub w: Vec<Complex64>,
}

impl OscProfile {
    pub fn compute(p: &PotentialPrimitive, z: Complex64, xs: &[f64]) -> Result<Self> {
        check_grid(xs)?;
        let u = PiecewisePoly::from_potential(p);
        let u2 = u.square();
        let omega = 2.0 * z;
        let ip = u.cumulative_exp(omega, xs);
        let im = u.cumulative_exp(-omega, xs);
        let ip2 = u2.cumulative_exp(omega, xs);
        let im2 = u2.cumulative_exp(-omega, xs);
        let sin = |p: &[Complex64], m: &[Complex64]| -> Vec<Complex64> {
            p.iter().zip(m).map(|(p, m)| (p - m) / (2.0 * I)).collect()
        };
        let cos = |p: &[Complex64], m: &[Complex64]| -> Vec<Complex64> {
            p.iter().zip(m).map(|(p, m)| 0.5 * (p + m)).collect()
        };
        Ok(Self {
            z,
            x: xs.to_vec(),
            b: sin(&ip, &im),
            a: cos(&ip, &im),
            big_b: sin(&ip2, &im2),
            big_a: cos(&ip2, &im2),
            big_u: u2.cumulative_exp(ZERO, xs),
            w: u.cumulative_w(omega, xs),
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `upsilon` at point `i`; `None` when `z = 0`.
    pub fn upsilon(&self, i: usize) -> Option<Complex64> {
        if self.z == ZERO {
            return None;
        }
        let inv = 0.5 / self.z;
        Some(self.b[i] + inv * self.big_u[i] + 2.0 * self.w[i] - inv * self.big_a[i])
    }

    pub fn at(&self, i: usize) -> OscIntegrals {
        OscIntegrals {
            z: self.z,
            x: self.x[i],
            b: self.b[i],
            a: self.a[i],
            big_a: self.big_a[i],
            big_b: self.big_b[i],
            big_u: self.big_u[i],
            w: self.w[i],
            upsilon: self.upsilon(i),
        }
    }
}

impl OscIntegrals {
    pub fn compute(x: f64, z: Complex64, p: &PotentialPrimitive) -> Result<Self> {
        Ok(OscProfile::compute(p, z, &[x])?.at(0))
    }
}

/// `(b, a)` at `(x, z)`.
pub fn first_order(x: f64, z: Complex64, p: &PotentialPrimitive) -> Result<(Complex64, Complex64)> {
    check_grid(&[x])?;
    let u = PiecewisePoly::from_potential(p);
    let ip = u.cumulative_exp(2.0 * z, &[x])[0];
    let im = u.cumulative_exp(-2.0 * z, &[x])[0];
    Ok(((ip - im) / (2.0 * I), 0.5 * (ip + im)))
}

/// `(A, B, U)` at `(x, z)`.
pub fn second_order(
    x: f64,
    z: Complex64,
    p: &PotentialPrimitive,
) -> Result<(Complex64, Complex64, Complex64)> {
    check_grid(&[x])?;
    let u2 = PiecewisePoly::from_potential(p).square();
    let ip = u2.cumulative_exp(2.0 * z, &[x])[0];
    let im = u2.cumulative_exp(-2.0 * z, &[x])[0];
    let big_u = u2.cumulative_exp(ZERO, &[x])[0];
    Ok((0.5 * (ip + im), (ip - im) / (2.0 * I), big_u))
}

pub fn double_w(x: f64, z: Complex64, p: &PotentialPrimitive) -> Result<Complex64> {
    check_grid(&[x])?;
    Ok(PiecewisePoly::from_potential(p).cumulative_w(2.0 * z, &[x])[0])
}

pub fn upsilon(x: f64, z: Complex64, p: &PotentialPrimitive) -> Result<Complex64> {
    if z == ZERO {
        return Err(Error::ZeroSpectralParameter);
    }
    let prof = OscProfile::compute(p, z, &[x])?;
    Ok(prof.upsilon(0).expect("z is nonzero"))
}

/// Grid approximations of the sup-functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpsilonSup {
    /// `sup(|b| + |a| + 2|w| + |A|/(2|z|)) + ||u||^2/|z|`
    pub upsilon: f64,
    /// `sup(|b| + |a|) + ||u||^2/|z|`
    pub upsilon1: f64,
}

/// `Upsilon(lambda)` and `Upsilon_1(lambda)` at `z = lambda^{1/2}`.
///
/// The sup over `x` is taken on a uniform grid of `density * (1 + |z|)`
/// points plus the potential mesh, followed by one refinement pass around
/// each argmax. It therefore approximates the sup from below.
pub fn upsilon_sup(z: Complex64, p: &PotentialPrimitive, density: f64) -> Result<UpsilonSup> {
    if z == ZERO {
        return Err(Error::ZeroSpectralParameter);
    }
    let n = ((density * (1.0 + z.norm())).ceil() as usize).max(16);
    let grid = merge_grid(&p.mesh(), &uniform(n));
    let prof = OscProfile::compute(p, z, &grid)?;
    let zn = z.norm();
    let full = |pr: &OscProfile, i: usize| {
        pr.b[i].norm() + pr.a[i].norm() + 2.0 * pr.w[i].norm() + 0.5 * pr.big_a[i].norm() / zn
    };
    let first = |pr: &OscProfile, i: usize| pr.b[i].norm() + pr.a[i].norm();
    let argmax = |f: &dyn Fn(usize) -> f64| {
        (0..grid.len()).fold((0, f64::NEG_INFINITY), |(bi, bv), i| {
            let v = f(i);
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
    };
    let (i_full, mut sup_full) = argmax(&|i| full(&prof, i));
    let (i_first, mut sup_first) = argmax(&|i| first(&prof, i));

    let mut extra = Vec::new();
    for i in [i_full, i_first] {
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid.len() - 1)];
        extra.extend((1..32).map(|k| lo + (hi - lo) * f64::from(k) / 32.0));
    }
    extra.sort_by(f64::total_cmp);
    let refined = OscProfile::compute(p, z, &extra)?;
    for i in 0..extra.len() {
        sup_full = sup_full.max(full(&refined, i));
        sup_first = sup_first.max(first(&refined, i));
    }
    let tail = p.l2_norm().powi(2) / zn;
    Ok(UpsilonSup { upsilon: sup_full + tail, upsilon1: sup_first + tail })
}

/// The comparability constant `2 sqrt(pi) (1 + ||u||) cosh(2 pi alpha)`.
pub fn comparability_constant(p: &PotentialPrimitive, alpha: f64) -> f64 {
    2.0 * PI.sqrt() * (1.0 + p.l2_norm()) * (2.0 * PI * alpha).cosh()
}

/// Full-interval coefficients at `lambda = n^2`.
///
/// Fields ending in `2n` are the functionals at `z = n` (doubled frequency,
/// e.g. `b2n = int u sin(2nt)`); the single-frequency ones use `sin(nt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteCoefficients {
    pub n: u32,
    pub b2n: Complex64,
    pub a2n: Complex64,
    pub big_a2n: Complex64,
    pub big_b2n: Complex64,
    pub w2n: Complex64,
    pub bn: Complex64,
    pub an: Complex64,
    pub big_an: Complex64,
    pub big_bn: Complex64,
    pub u_pi: Complex64,
    pub mu_n: Complex64,
}

pub fn discrete(n: u32, p: &PotentialPrimitive) -> Result<DiscreteCoefficients> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let nf = f64::from(n);
    let prof = OscProfile::compute(p, nf.into(), &[PI])?;
    let u = PiecewisePoly::from_potential(p);
    let u2 = u.square();
    let omega = Complex64::from(nf);
    let (b2n, a2n, big_a2n, big_b2n, w2n, u_pi) =
        (prof.b[0], prof.a[0], prof.big_a[0], prof.big_b[0], prof.w[0], prof.big_u[0]);
    let mu_n = mu_from_parts(nf, b2n, big_a2n, w2n, u_pi);
    Ok(DiscreteCoefficients {
        n,
        b2n,
        a2n,
        big_a2n,
        big_b2n,
        w2n,
        bn: u.total_sin(omega),
        an: u.total_cos(omega),
        big_an: u2.total_cos(omega),
        big_bn: u2.total_sin(omega),
        u_pi,
        mu_n,
    })
}

/// `mu_n = -b2n/pi + A2n/(2 pi n) - 2 w2n/pi - U(pi)/(2 pi n)`.
pub(crate) fn mu_from_parts(
    n: f64,
    b2n: Complex64,
    big_a2n: Complex64,
    w2n: Complex64,
    u_pi: Complex64,
) -> Complex64 {
    -b2n / PI + big_a2n / (2.0 * PI * n) - 2.0 * w2n / PI - u_pi / (2.0 * PI * n)
}

pub(crate) fn uniform(n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { PI } else { PI * i as f64 / n as f64 }).collect()
}

/// Sorted union of two ascending grids, dropping near-duplicates.
pub(crate) fn merge_grid(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        if out.last().is_none_or(|&l| x - l > 1e-12) {
            out.push(x);
        } else if x == PI {
            *out.last_mut().unwrap() = PI;
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Brute-force quadrature that never touches the closed forms.

    use super::*;

    /// Panels of width <= `h` that never straddle a mesh point.
    pub fn panels(p: &PotentialPrimitive, x: f64, h: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for s in p.segments() {
            if s.start >= x {
                break;
            }
            let end = s.end.min(x);
            let k = ((end - s.start) / h).ceil().max(1.0) as usize;
            for j in 0..k {
                let a = s.start + (end - s.start) * j as f64 / k as f64;
                let b = s.start + (end - s.start) * (j + 1) as f64 / k as f64;
                out.push((a, b));
            }
        }
        out
    }

    /// `u` evaluated from inside the panel, so jumps are never sampled.
    fn u_at(p: &PotentialPrimitive, a: f64, t: f64) -> Complex64 {
        p.segments()[p.segment_index(a)].eval(t)
    }

    /// Iterated quadrature for `w`: the inner `b(t)` is accumulated node to
    /// node with its own Gauss rule.
    pub fn w(p: &PotentialPrimitive, x: f64, z: Complex64) -> Complex64 {
        let om = 2.0 * z;
        let h = 0.02 / (1.0 + z.norm());
        let mut total = ZERO;
        let mut inner = ZERO;
        let mut last = 0.0;
        for (a, b) in panels(p, x, h) {
            for (t, wt) in quad::mapped(quad::gl20(), a, b) {
                // inner integral from `last` to `t`, split at the panel start.
                for (lo, hi) in [(last, a.max(last)), (a.max(last), t)] {
                    if hi > lo {
                        let seg_at = if lo < a { lo } else { a };
                        inner += quad::mapped(quad::gl20(), lo, hi)
                            .map(|(s, ws)| ws * u_at(p, seg_at, s) * (om * s).sin())
                            .sum::<Complex64>();
                    }
                }
                last = t;
                total += wt * u_at(p, a, t) * (om * t).cos() * inner;
            }
        }
        total
    }

    pub fn all(p: &PotentialPrimitive, x: f64, z: Complex64) -> [Complex64; 6] {
        let om = 2.0 * z;
        let h = 0.02 / (1.0 + z.norm());
        let mut acc = [ZERO; 5];
        for (a, b) in panels(p, x, h) {
            for (t, wt) in quad::mapped(quad::gl20(), a, b) {
                let u = u_at(p, a, t);
                let (s, c) = ((om * t).sin(), (om * t).cos());
                acc[0] += wt * u * s;
                acc[1] += wt * u * c;
                acc[2] += wt * u * u * c;
                acc[3] += wt * u * u * s;
                acc[4] += wt * u * u;
            }
        }
        [acc[0], acc[1], acc[2], acc[3], acc[4], w(p, x, z)]
    }
}
