//! Initial-value problems for `omega(x, lambda)`.
//!
//! With `omega^[1] = omega' - u omega` the equation `-omega'' + u' omega =
//! lambda omega` becomes
//!
//! ```text
//! omega'     = u omega + omega^[1]
//! omega^[1]' = -(lambda + u^2) omega - u omega^[1]
//! ```
//!
//! with `omega(0) = 0`, `omega^[1](0) = 1`. On a mesh segment `u` is linear,
//! so `q = u'` is the constant slope and `omega'' = (slope - lambda) omega`
//! there. Each segment is therefore propagated exactly with cos/sin kernels;
//! across mesh points `omega` and `omega^[1]` are continuous, which is how
//! delta interactions enter. The lambda-derivative `omega_lambda` solves the
//! same system forced by `-omega` in the second row and is propagated the same
//! way.
//!
//! The nonlinear phase/amplitude system for `theta`, `r` (with
//! `r sin(theta) = sqrt(lambda) omega`) is integrated numerically by an
//! adaptive Dormand–Prince 5(4) pair.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oscint::{merge_grid, uniform};
use crate::potential::{PotentialPrimitive, Segment};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `(omega, omega^[1], omega_lambda, omega_lambda^[1])`.
pub type QuasiState = [Complex64; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Local error per unit step for the Pruefer integrator.
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10 }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if self.tol > 0.0 && self.tol.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)))
        }
    }
}

/// The half-strip `|Im sqrt(lambda)| < alpha` and the empirical threshold
/// above which the phase equation is known to be solvable on `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionParams {
    pub alpha: f64,
    pub re_threshold: f64,
}

impl RegionParams {
    pub fn new(alpha: f64, re_threshold: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(re_threshold >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "re_threshold must be >= 1, got {re_threshold}"
            )));
        }
        Ok(Self { alpha, re_threshold })
    }

    /// Probes the phase equation on the ladder `lambda = 1.25^j`, `Im z in
    /// {0, +-alpha/2}`, up to `|lambda| ~ 1e4`, plus any `extra` points, and
    /// returns the first rung above the largest failing `Re lambda`.
    ///
    /// The set where the phase blows up is a curve in the `lambda`-plane, so a
    /// ladder alone can step over it. Eigenvalues with symmetric eigenfunctions
    /// can sit exactly on it, which is why callers pass the computed spectrum.
    pub fn calibrate(p: &PotentialPrimitive, alpha: f64, opts: &SolverOptions, extra: &[Complex64]) -> Result<Self> {
        const RUNGS: i32 = 42;
        let grid = default_grid(p, 64);
        let fails = |lambda: Complex64| integrate_pruefer_on(lambda, p, opts, &grid).is_err();
        let mut worst = f64::NEG_INFINITY;
        for j in 0..RUNGS {
            let s = 1.25f64.powi(j).sqrt();
            for t in [0.0, 0.5 * alpha, -0.5 * alpha] {
                let z = Complex64::new(s, t);
                if fails(z * z) {
                    worst = worst.max((z * z).re);
                }
            }
        }
        for &lambda in extra {
            if lambda != Complex64::new(0.0, 0.0) && fails(lambda) {
                worst = worst.max(lambda.re);
            }
        }
        let rung = (0..RUNGS).map(|j| 1.25f64.powi(j)).find(|&r| r > worst);
        match rung {
            Some(r) => Self::new(alpha, r),
            None => Err(Error::ThetaExistence { lambda: worst.into(), x: 0.0 }),
        }
    }

    /// `z` in the half-strip `Re z > 1, |Im z| < alpha`.
    pub fn contains_z(&self, z: Complex64) -> bool {
        z.re > 1.0 && z.im.abs() < self.alpha
    }

    /// `lambda` in the parabola region, above the threshold.
    pub fn admits(&self, lambda: Complex64) -> bool {
        lambda.re >= self.re_threshold && self.contains_z(lambda.sqrt())
    }
}

/// Grid samples of one solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    pub lambda: Complex64,
    pub grid: Vec<f64>,
    pub omega: Vec<Complex64>,
    pub omega_q1: Vec<Complex64>,
    pub omega_dl: Option<Vec<Complex64>>,
    pub omega_dl_q1: Option<Vec<Complex64>>,
    pub theta: Option<Vec<Complex64>>,
    /// Amplitude with `r(0) = 1`, so `r sin(theta) = sqrt(lambda) omega`.
    pub r: Option<Vec<Complex64>>,
}

/// Mesh points merged with a uniform grid of `points` intervals.
pub fn default_grid(p: &PotentialPrimitive, points: usize) -> Vec<f64> {
    merge_grid(&p.mesh(), &uniform(points.max(1)))
}

/// `cos(k tau)`, `sin(k tau)/k` and their `mu`-derivatives, `k^2 = mu`.
#[derive(Debug, Clone, Copy)]
struct Kernels {
    c: Complex64,
    s: Complex64,
    c_mu: Complex64,
    s_mu: Complex64,
}

fn kernels(mu: Complex64, tau: f64) -> Kernels {
    let t2 = tau * tau;
    let x = -mu * t2;
    if x.norm() < 4.0 {
        // C = sum x^k/(2k)!, S = tau sum x^k/(2k+1)!, S_mu = -tau^3 sum k x^(k-1)/(2k+1)!
        let mut c = ZERO;
        let mut s = ZERO;
        let mut s_mu = ZERO;
        let mut pow = ONE; // x^k
        let mut fact_even = 1.0; // (2k)!
        for k in 0..40 {
            let kf = k as f64;
            let fact_odd = fact_even * (2.0 * kf + 1.0);
            c += pow / fact_even;
            s += pow / fact_odd;
            if k + 1 < 40 {
                // term k+1 of S_mu uses x^k/(2k+3)!
                s_mu += pow * (kf + 1.0) / (fact_odd * (2.0 * kf + 2.0) * (2.0 * kf + 3.0));
            }
            pow *= x;
            fact_even = fact_odd * (2.0 * kf + 2.0);
            if pow.norm() / fact_even < 1e-18 {
                break;
            }
        }
        let s = s * tau;
        Kernels { c, s, c_mu: -0.5 * tau * s, s_mu: -tau * t2 * s_mu }
    } else {
        let k = mu.sqrt();
        let c = (k * tau).cos();
        let s = (k * tau).sin() / k;
        Kernels { c, s, c_mu: -0.5 * tau * s, s_mu: (tau * c - s) / (2.0 * mu) }
    }
}

/// Propagates the quasi state from `x0` to `x0 + tau` inside `seg`.
fn propagate(state: QuasiState, seg: &Segment, lambda: Complex64, x0: f64, tau: f64) -> QuasiState {
    if tau == 0.0 {
        return state;
    }
    let mu = lambda - seg.slope;
    let k = kernels(mu, tau);
    let u0 = seg.eval(x0);
    let u1 = seg.eval(x0 + tau);
    let [w, w1, wl, wl1] = state;
    let d = w1 + u0 * w;
    let dl = wl1 + u0 * wl;
    let nw = k.c * w + k.s * d;
    let nd = -mu * k.s * w + k.c * d;
    let nwl = k.c * wl + k.s * dl + k.c_mu * w + k.s_mu * d;
    let ndl = -mu * k.s * wl + k.c * dl + (-k.s - mu * k.s_mu) * w + k.c_mu * d;
    [nw, nd - u1 * nw, nwl, ndl - u1 * nwl]
}

fn finite(s: &QuasiState) -> bool {
    s.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

const INITIAL: QuasiState = [ZERO, ONE, ZERO, ZERO];

/// Exact solution of the quasi-derivative and variational systems for one
/// `lambda`, stored as the state at every mesh point.
#[derive(Debug, Clone)]
pub struct QuasiSolution {
    lambda: Complex64,
    potential: PotentialPrimitive,
    starts: Vec<QuasiState>,
}

impl QuasiSolution {
    pub fn new(lambda: Complex64, p: &PotentialPrimitive) -> Result<Self> {
        let mut starts = Vec::with_capacity(p.segments().len() + 1);
        let mut state = INITIAL;
        starts.push(state);
        for seg in p.segments() {
            state = propagate(state, seg, lambda, seg.start, seg.len());
            if !finite(&state) {
                return Err(Error::NonFinite(format!(
                    "omega overflowed at x = {} for lambda = {lambda}",
                    seg.end
                )));
            }
            starts.push(state);
        }
        Ok(Self { lambda, potential: p.clone(), starts })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn potential(&self) -> &PotentialPrimitive {
        &self.potential
    }

    pub fn eval(&self, x: f64) -> QuasiState {
        let i = self.potential.segment_index(x);
        let seg = &self.potential.segments()[i];
        propagate(self.starts[i], seg, self.lambda, seg.start, (x - seg.start).max(0.0))
    }

    pub fn omega(&self, x: f64) -> Complex64 {
        self.eval(x)[0]
    }

    pub fn at_pi(&self) -> QuasiState {
        self.starts[self.starts.len() - 1]
    }

    /// `omega'(pi) = omega^[1](pi) + u(pi) omega(pi)`.
    pub fn omega_x_at_pi(&self) -> Complex64 {
        let s = self.at_pi();
        s[1] + self.potential.eval(PI) * s[0]
    }

    pub fn trace(&self, grid: &[f64], variational: bool) -> SolutionTrace {
        let states: Vec<QuasiState> = grid.iter().map(|&x| self.eval(x)).collect();
        let col = |k: usize| states.iter().map(|s| s[k]).collect::<Vec<_>>();
        SolutionTrace {
            lambda: self.lambda,
            grid: grid.to_vec(),
            omega: col(0),
            omega_q1: col(1),
            omega_dl: variational.then(|| col(2)),
            omega_dl_q1: variational.then(|| col(3)),
            theta: None,
            r: None,
        }
    }
}

/// `(omega(pi), omega_lambda(pi))` divided by `exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledCharacteristic {
    pub omega: Complex64,
    pub omega_dl: Complex64,
    pub log_scale: f64,
}

/// Characteristic values with per-panel renormalisation, so that `lambda`
/// far from the positive axis does not overflow.
pub fn characteristic_scaled(lambda: Complex64, p: &PotentialPrimitive) -> ScaledCharacteristic {
    let mut state = INITIAL;
    let mut log_scale = 0.0;
    for seg in p.segments() {
        let growth = (lambda - seg.slope).sqrt().im.abs();
        let panels = ((growth * seg.len() / 20.0).ceil() as usize).max(1);
        let h = seg.len() / panels as f64;
        for j in 0..panels {
            let x0 = seg.start + h * j as f64;
            state = propagate(state, seg, lambda, x0, h);
            let m = state.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if m > 1e50 || (m < 1e-50 && m > 0.0) {
                for v in &mut state {
                    *v /= m;
                }
                log_scale += m.ln();
            }
        }
    }
    ScaledCharacteristic { omega: state[0], omega_dl: state[2], log_scale }
}

pub fn integrate_quasi(
    lambda: Complex64,
    p: &PotentialPrimitive,
    opts: &SolverOptions,
) -> Result<SolutionTrace> {
    opts.validate()?;
    Ok(QuasiSolution::new(lambda, p)?.trace(&default_grid(p, 512), false))
}

pub fn integrate_variational(
    lambda: Complex64,
    p: &PotentialPrimitive,
    opts: &SolverOptions,
) -> Result<SolutionTrace> {
    opts.validate()?;
    Ok(QuasiSolution::new(lambda, p)?.trace(&default_grid(p, 512), true))
}

/// `theta`, `r` (and `omega` for comparison) on the default grid.
pub fn integrate_pruefer(
    lambda: Complex64,
    p: &PotentialPrimitive,
    opts: &SolverOptions,
) -> Result<SolutionTrace> {
    integrate_pruefer_on(lambda, p, opts, &default_grid(p, 512))
}

/// As [`integrate_pruefer`] on a caller-supplied ascending grid that must
/// contain every mesh point.
pub fn integrate_pruefer_on(
    lambda: Complex64,
    p: &PotentialPrimitive,
    opts: &SolverOptions,
    grid: &[f64],
) -> Result<SolutionTrace> {
    opts.validate()?;
    if lambda == ZERO {
        return Err(Error::ZeroSpectralParameter);
    }
    let z = lambda.sqrt();
    let mut y = [ZERO, ZERO]; // theta, ln r
    let mut theta = Vec::with_capacity(grid.len());
    let mut r = Vec::with_capacity(grid.len());
    let mut h = 0.01 / (1.0 + z.norm());
    let mut x = 0.0;
    for &target in grid {
        if target > x {
            let seg = &p.segments()[p.segment_index(0.5 * (x + target))];
            y = dp45_interval(y, x, target, &mut h, seg, z, opts.tol)
                .map_err(|x| Error::ThetaExistence { lambda, x })?;
            x = target;
        }
        theta.push(y[0]);
        r.push(y[1].exp());
    }
    let mut trace = QuasiSolution::new(lambda, p)?.trace(grid, false);
    trace.theta = Some(theta);
    trace.r = Some(r);
    Ok(trace)
}

fn pruefer_rhs(y: [Complex64; 2], u: Complex64, z: Complex64) -> [Complex64; 2] {
    let th = y[0];
    let s = th.sin();
    let s2 = (2.0 * th).sin();
    let c2 = (2.0 * th).cos();
    let u2 = u * u;
    [z + u2 * s * s / z + u * s2, -(u * c2 + 0.5 * u2 * s2 / z)]
}

// Dormand–Prince 5(4).
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates the phase system from `x0` to `x1` inside one segment. On
/// failure returns the `x` where the step size underflowed.
fn dp45_interval(
    mut y: [Complex64; 2],
    x0: f64,
    x1: f64,
    h: &mut f64,
    seg: &Segment,
    z: Complex64,
    tol: f64,
) -> std::result::Result<[Complex64; 2], f64> {
    let mut x = x0;
    let mut steps = 0usize;
    // keep h|z| inside the stability region, where the error estimate is meaningful
    let h_max = 1.0 / (1.0 + z.norm());
    while x < x1 {
        *h = h.min(h_max);
        // absorb a sliver left over from rounding into the final step
        let last = *h * (1.0 + 1e-9) >= x1 - x;
        let hh = if last { x1 - x } else { *h };
        if (!last && hh < 1e-14 * (1.0 + x.abs())) || steps > 2_000_000 {
            return Err(x);
        }
        steps += 1;
        let mut k = [[ZERO; 2]; 7];
        for i in 0..7 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(i) {
                for c in 0..2 {
                    yi[c] += hh * A[i][j] * kj[c];
                }
            }
            k[i] = pruefer_rhs(yi, seg.eval(x + C[i] * hh), z);
        }
        let y_new = [
            y[0] + hh * (0..6).map(|j| A[6][j] * k[j][0]).sum::<Complex64>(),
            y[1] + hh * (0..6).map(|j| A[6][j] * k[j][1]).sum::<Complex64>(),
        ];
        // error per unit step
        let err = (0..2)
            .map(|c| (0..7).map(|j| E[j] * k[j][c]).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
            / tol;
        let ok = err.is_finite() && y_new.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        if ok && err <= 1.0 {
            x = if last { x1 } else { x + hh };
            y = y_new;
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.25)).clamp(0.2, 5.0) };
            if !last {
                *h = hh * grow;
            } else {
                *h = (*h).max(hh * grow.min(1.0));
            }
        } else {
            let shrink = if ok { (0.9 * err.powf(-0.25)).clamp(0.1, 0.9) } else { 0.25 };
            *h = hh * shrink;
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn kernels_agree_across_the_switch() {
        for mu in [c(3.99, 0.0), c(4.01, 0.0), c(-3.0, 2.5), c(0.0, 0.0)] {
            let k = kernels(mu, 1.0);
            let h = 1e-6;
            let kp = kernels(mu + h, 1.0);
            let km = kernels(mu - h, 1.0);
            assert!(((kp.c - km.c) / (2.0 * h) - k.c_mu).norm() < 1e-8);
            assert!(((kp.s - km.s) / (2.0 * h) - k.s_mu).norm() < 1e-8);
            if mu != ZERO {
                let r = mu.sqrt();
                assert!((k.c - r.cos()).norm() < 1e-14);
                assert!((k.s - r.sin() / r).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_potential_closed_forms() {
        let p = PotentialPrimitive::zero();
        let t = integrate_variational(c(1.0, 0.0), &p, &SolverOptions { tol: 1e-12 }).unwrap();
        let sin: Vec<_> = t.grid.iter().map(|x| c(x.sin(), 0.0)).collect();
        let cos: Vec<_> = t.grid.iter().map(|x| c(x.cos(), 0.0)).collect();
        assert!(sup_diff(&t.omega, &sin) < 1e-10);
        assert!(sup_diff(&t.omega_q1, &cos) < 1e-10);
        assert_eq!(t.omega[0], ZERO);
        assert_eq!(t.omega_q1[0], ONE);

        let s = QuasiSolution::new(c(0.25, 0.0), &p).unwrap();
        assert!((s.at_pi()[0] - c(2.0, 0.0)).norm() < 1e-14);

        // omega_lambda(pi, n^2) = pi (-1)^n / (2 n^2)
        for n in 1..=6 {
            let nf = f64::from(n);
            let s = QuasiSolution::new(c(nf * nf, 0.0), &p).unwrap();
            let want = PI * (-1f64).powi(n) / (2.0 * nf * nf);
            assert!((s.at_pi()[2] - c(want, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn gauge_changes_only_the_quasi_derivative() {
        let p0 = PotentialPrimitive::zero();
        let pc = PotentialPrimitive::constant(c(0.7, -0.3));
        let lam = c(2.3, 0.1);
        let g = default_grid(&p0, 200);
        let t0 = QuasiSolution::new(lam, &p0).unwrap().trace(&g, false);
        let tc = QuasiSolution::new(lam, &pc).unwrap().trace(&g, false);
        assert!(sup_diff(&t0.omega, &tc.omega) < 1e-13);
        // omega^[1] = omega' - u omega, with omega' from finite differences.
        let sol = QuasiSolution::new(lam, &pc).unwrap();
        let h = 1e-5;
        for &x in &[0.4, 1.3, 2.9] {
            let d = (sol.omega(x + h) - sol.omega(x - h)) / (2.0 * h);
            let q1 = sol.eval(x)[1];
            assert!((q1 - (d - c(0.7, -0.3) * sol.omega(x))).norm() < 1e-8);
        }
    }

    #[test]
    fn variational_matches_finite_difference() {
        let pots = [
            PotentialPrimitive::step(c(2.0, 0.0), PI / 2.0).unwrap(),
            PotentialPrimitive::step(c(0.0, 2.0), PI / 2.0).unwrap(),
            PotentialPrimitive::rough_fourier(0.6, 16, 1).unwrap(),
            PotentialPrimitive::linear(c(5.0, 0.0)),
        ];
        for p in &pots {
            for lam in [c(3.3, 0.0), c(40.0, 5.0), c(-2.0, 1.0)] {
                let h = 1e-5 * (1.0 + lam.norm());
                let fp = QuasiSolution::new(lam + h, p).unwrap().at_pi()[0];
                let fm = QuasiSolution::new(lam - h, p).unwrap().at_pi()[0];
                let fd = (fp - fm) / (2.0 * h);
                let got = QuasiSolution::new(lam, p).unwrap().at_pi()[2];
                assert!((got - fd).norm() <= 1e-5 * fd.norm().max(1e-8), "{got} vs {fd}");
            }
        }
    }

    #[test]
    fn normalization_identity_zero_potential() {
        // int_0^pi sin^2 = pi/2 = omega_lambda(pi) * omega'(pi) at lambda = 1
        let s = QuasiSolution::new(ONE, &PotentialPrimitive::zero()).unwrap();
        let prod = s.at_pi()[2] * s.omega_x_at_pi();
        assert!((prod - c(PI / 2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn propagator_is_linear() {
        // the forced variational block too, since its forcing is linear in the state
        let p = PotentialPrimitive::step(c(1.0, 0.5), 1.0).unwrap();
        let seg = p.segments()[1];
        let lam = c(7.0, 0.3);
        let a = [c(0.3, 0.1), c(-1.0, 0.2), c(0.5, 0.0), c(0.0, 1.0)];
        let b = [c(1.0, 0.0), c(0.0, -0.4), c(0.2, 0.2), c(-0.3, 0.0)];
        let ab: QuasiState = std::array::from_fn(|i| 2.0 * a[i] + b[i]);
        let pa = propagate(a, &seg, lam, 1.0, 0.8);
        let pb = propagate(b, &seg, lam, 1.0, 0.8);
        let pab = propagate(ab, &seg, lam, 1.0, 0.8);
        for i in 0..4 {
            assert!((pab[i] - (2.0 * pa[i] + pb[i])).norm() < 1e-13);
        }
    }

    #[test]
    fn scaled_characteristic_matches_plain() {
        let p = PotentialPrimitive::rough_fourier(0.6, 8, 2).unwrap();
        for lam in [c(10.0, 0.0), c(-500.0, 30.0), c(2000.0, -3000.0)] {
            let s = characteristic_scaled(lam, &p);
            let plain = QuasiSolution::new(lam, &p).unwrap().at_pi();
            let f = s.log_scale.exp();
            assert!((s.omega * f - plain[0]).norm() <= 1e-10 * plain[0].norm());
            assert!((s.omega_dl * f - plain[2]).norm() <= 1e-10 * plain[2].norm());
        }
        // Far off axis the plain route overflows but the scaled one does not.
        let s = characteristic_scaled(c(-3.0e5, 0.0), &p);
        assert!(s.omega.norm().is_finite() && s.log_scale > 700.0);
    }

    #[test]
    fn pruefer_zero_potential() {
        let t = integrate_pruefer(c(9.0, 0.0), &PotentialPrimitive::zero(), &SolverOptions::default())
            .unwrap();
        let th = t.theta.as_ref().unwrap();
        let r = t.r.as_ref().unwrap();
        for (i, x) in t.grid.iter().enumerate() {
            assert!((th[i] - c(3.0 * x, 0.0)).norm() < 1e-9);
            assert!((r[i] - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn pruefer_reproduces_omega() {
        let pots = [
            PotentialPrimitive::step(c(2.0, 0.0), PI / 2.0).unwrap(),
            PotentialPrimitive::step(c(0.0, 2.0), PI / 2.0).unwrap(),
            PotentialPrimitive::rough_fourier(0.6, 32, 7).unwrap(),
        ];
        for p in &pots {
            for lam in [c(50.0, 0.0), c(400.0, 3.0)] {
                let t = integrate_pruefer(lam, p, &SolverOptions::default()).unwrap();
                let z = lam.sqrt();
                let th = t.theta.as_ref().unwrap();
                let r = t.r.as_ref().unwrap();
                let rec: Vec<_> = th.iter().zip(r).map(|(th, r)| r * th.sin() / z).collect();
                assert!(sup_diff(&rec, &t.omega) < 1e-8, "{}", sup_diff(&rec, &t.omega));
            }
        }
    }

    #[test]
    fn region_params() {
        assert!(RegionParams::new(0.0, 1.0).is_err());
        assert!(RegionParams::new(1.0, 0.5).is_err());
        let p = PotentialPrimitive::step(c(2.0, 0.0), PI / 2.0).unwrap();
        let r = RegionParams::calibrate(&p, 1.0, &SolverOptions::default(), &[]).unwrap();
        assert!(r.re_threshold >= 1.0);
        assert!(r.admits(c(100.0, 10.0)));
        assert!(!r.admits(c(100.0, 100.0)));
        assert!(integrate_quasi(ONE, &p, &SolverOptions { tol: 0.0 }).is_err());
    }

    #[test]
    fn calibration_sees_singular_eigenvalue() {
        // lambda = 4 is an eigenvalue whose amplitude vanishes at 3pi/4
        let p = PotentialPrimitive::step(c(0.0, 2.0), PI / 2.0).unwrap();
        assert!(integrate_pruefer(c(4.0, 0.0), &p, &SolverOptions::default()).is_err());
        let r = RegionParams::calibrate(&p, 1.0, &SolverOptions::default(), &[c(4.0, 0.0)]).unwrap();
        assert!(r.re_threshold > 4.0);
    }
}
