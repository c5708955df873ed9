//! The antiderivative `u` of a distributional potential `q = u'`.
//!
//! `u` is always stored as a piecewise-linear complex function on a mesh of
//! `[0, pi]`. Jumps are allowed at mesh points, and a jump of height `k` at
//! `x0` is the potential `q = k delta(x - x0)`. Everything downstream
//! (oscillatory integrals, propagators) integrates exactly per segment.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One linear piece `u(t) = value + slope * (t - start)` on `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    /// `u(start+)`.
    pub value: Complex64,
    pub slope: Complex64,
}

impl Segment {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.value + self.slope * (t - self.start)
    }

    /// `u(end-)`.
    pub fn end_value(&self) -> Complex64 {
        self.eval(self.end)
    }

    /// Coefficients `(c0, c1)` with `u(t) = c0 + c1 t` on this segment.
    pub fn global_coeffs(&self) -> (Complex64, Complex64) {
        (self.value - self.slope * self.start, self.slope)
    }

    /// `int |u|^2` over the segment, in closed form.
    fn l2_sq(&self) -> f64 {
        let h = self.len();
        let v = self.value;
        let s = self.slope;
        v.norm_sqr() * h + (v.conj() * s).re * h * h + s.norm_sqr() * h * h * h / 3.0
    }

    /// `int u` over the segment.
    fn integral(&self) -> Complex64 {
        let h = self.len();
        self.value * h + self.slope * (0.5 * h * h)
    }
}

/// Piecewise-linear antiderivative `u` on `[0, pi]`.
///
/// Cloning is cheap; the segment table is shared.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPrimitive {
    segments: Arc<[Segment]>,
    l2_norm: f64,
}

impl PotentialPrimitive {
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::MalformedGrid("no segments".into()));
        }
        if segments[0].start != 0.0 {
            return Err(Error::MalformedGrid("mesh must start at 0".into()));
        }
        let last = segments[segments.len() - 1].end;
        if (last - PI).abs() > 1e-12 {
            return Err(Error::MalformedGrid(format!("mesh must end at pi, got {last}")));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.end > s.start) {
                return Err(Error::MalformedGrid(format!("segment {i} has nonpositive length")));
            }
            if i > 0 && segments[i - 1].end != s.start {
                return Err(Error::MalformedGrid(format!("gap before segment {i}")));
            }
            if !(s.value.re.is_finite()
                && s.value.im.is_finite()
                && s.slope.re.is_finite()
                && s.slope.im.is_finite())
            {
                return Err(Error::NonFinite(format!("coefficients of segment {i}")));
            }
        }
        let mut segments = segments;
        let n = segments.len();
        segments[n - 1].end = PI;
        let l2_norm = segments.iter().map(Segment::l2_sq).sum::<f64>().max(0.0).sqrt();
        Ok(Self { segments: segments.into(), l2_norm })
    }

    /// Piecewise-linear interpolant of `values` on `grid`.
    pub fn from_samples(grid: &[f64], values: &[Complex64]) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::MalformedGrid(format!(
                "{} grid points but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::MalformedGrid("need at least two samples".into()));
        }
        if let Some(i) = grid.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("grid point {i}")));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(format!("sample {i}")));
        }
        if grid[0].abs() > 1e-12 || (grid[grid.len() - 1] - PI).abs() > 1e-9 {
            return Err(Error::MalformedGrid(format!(
                "grid must span [0, pi], got [{}, {}]",
                grid[0],
                grid[grid.len() - 1]
            )));
        }
        let mut segments = Vec::with_capacity(grid.len() - 1);
        for i in 0..grid.len() - 1 {
            let (a, b) = (grid[i], grid[i + 1]);
            if !(b > a) {
                return Err(Error::MalformedGrid(format!("grid not strictly increasing at {i}")));
            }
            segments.push(Segment {
                start: if i == 0 { 0.0 } else { a },
                end: b,
                value: values[i],
                slope: (values[i + 1] - values[i]) / (b - a),
            });
        }
        Self::from_segments(segments)
    }

    /// Reads a two- or three-column CSV `x, Re u[, Im u]`. A header row is
    /// detected by its first field failing to parse as a number.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.iter().all(str::is_empty) {
                continue;
            }
            let parse = |i: usize| -> Option<f64> { rec.get(i).and_then(|s| s.parse().ok()) };
            let Some(x) = parse(0) else {
                if line == 0 {
                    continue;
                }
                return Err(Error::MalformedGrid(format!("line {}: bad x", line + 1)));
            };
            if rec.len() < 2 || rec.len() > 3 {
                return Err(Error::MalformedGrid(format!(
                    "line {}: expected 2 or 3 columns, got {}",
                    line + 1,
                    rec.len()
                )));
            }
            let re = parse(1)
                .ok_or_else(|| Error::MalformedGrid(format!("line {}: bad Re u", line + 1)))?;
            let im = if rec.len() == 3 {
                parse(2)
                    .ok_or_else(|| Error::MalformedGrid(format!("line {}: bad Im u", line + 1)))?
            } else {
                0.0
            };
            grid.push(x);
            values.push(Complex64::new(re, im));
        }
        Self::from_samples(&grid, &values)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn from_catalogue(name: &str, params: &[Complex64]) -> Result<Self> {
        Catalogue::parse(name, params)?.build()
    }

    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_segments(vec![Segment { start: 0.0, end: PI, value: c, slope: 0.0.into() }])
            .expect("single segment is valid")
    }

    /// `u = c t`, i.e. `q = c`.
    pub fn linear(c: Complex64) -> Self {
        Self::from_segments(vec![Segment { start: 0.0, end: PI, value: 0.0.into(), slope: c }])
            .expect("single segment is valid")
    }

    /// `u = height * 1_{t >= at}`, i.e. `q = height * delta(t - at)`.
    pub fn step(height: Complex64, at: f64) -> Result<Self> {
        if !(at > 0.0 && at < PI) {
            return Err(Error::InvalidParameter(format!("step position {at} not in (0, pi)")));
        }
        Self::from_segments(vec![
            Segment { start: 0.0, end: at, value: 0.0.into(), slope: 0.0.into() },
            Segment { start: at, end: PI, value: height, slope: 0.0.into() },
        ])
    }

    /// `u(t) = amplitude * frac(teeth * t / pi)`.
    pub fn sawtooth(amplitude: Complex64, teeth: u32) -> Result<Self> {
        if teeth == 0 {
            return Err(Error::InvalidParameter("sawtooth needs at least one tooth".into()));
        }
        let h = PI / f64::from(teeth);
        let slope = amplitude / h;
        let segments = (0..teeth)
            .map(|j| Segment {
                start: f64::from(j) * h,
                end: if j + 1 == teeth { PI } else { f64::from(j + 1) * h },
                value: 0.0.into(),
                slope,
            })
            .collect();
        Self::from_segments(segments)
    }

    /// `u(t) = sum_{k <= modes} k^{-s} (xi_k cos kt + eta_k sin kt)` with
    /// `xi, eta` uniform on `[-1, 1]` from a seeded ChaCha stream, sampled on a
    /// uniform mesh fine enough to resolve the top mode.
    pub fn rough_fourier(smoothness: f64, modes: u32, seed: u64) -> Result<Self> {
        if !smoothness.is_finite() {
            return Err(Error::InvalidParameter("smoothness must be finite".into()));
        }
        if modes == 0 {
            return Err(Error::InvalidParameter("rough_fourier needs at least one mode".into()));
        }
        if smoothness <= 0.5 {
            log::warn!(
                "rough_fourier smoothness {smoothness} <= 1/2: the series is not L2-convergent \
                 as modes grow"
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<(f64, f64, f64)> = (1..=modes)
            .map(|k| {
                let xi: f64 = rng.random_range(-1.0..=1.0);
                let eta: f64 = rng.random_range(-1.0..=1.0);
                (f64::from(k), xi, eta)
            })
            .collect();
        let m = (16 * modes as usize).max(1024);
        let grid: Vec<f64> =
            (0..=m).map(|i| if i == m { PI } else { PI * i as f64 / m as f64 }).collect();
        let values: Vec<Complex64> = grid
            .iter()
            .map(|&x| {
                let v: f64 = coeffs
                    .iter()
                    .map(|&(k, xi, eta)| k.powf(-smoothness) * (xi * (k * x).cos() + eta * (k * x).sin()))
                    .sum();
                Complex64::new(v, 0.0)
            })
            .collect();
        Self::from_samples(&grid, &values)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Mesh points `0 = x_0 < ... < x_m = pi`.
    pub fn mesh(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.segments.iter().map(|s| s.end)).collect()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    /// Index of the segment containing `x`; at an interior mesh point this is
    /// the segment starting there.
    pub fn segment_index(&self, x: f64) -> usize {
        let i = self.segments.partition_point(|s| s.end <= x);
        i.min(self.segments.len() - 1)
    }

    /// `u(x)`, right-continuous at jumps (left limit at `pi`).
    pub fn eval(&self, x: f64) -> Complex64 {
        self.segments[self.segment_index(x)].eval(x)
    }

    /// `(1/pi) int_0^pi u`.
    pub fn mean(&self) -> Complex64 {
        self.segments.iter().map(Segment::integral).sum::<Complex64>() / PI
    }

    /// `u + c`. The operator depends only on `q = u'`, so the spectrum is unchanged.
    pub fn gauge_shift(&self, c: Complex64) -> Self {
        self.map_segments(|s| Segment { value: s.value + c, ..s })
    }

    /// The gauge with `int_0^pi u = 0`.
    pub fn mean_zero(&self) -> Self {
        self.gauge_shift(-self.mean())
    }

    pub fn conj(&self) -> Self {
        self.map_segments(|s| Segment { value: s.value.conj(), slope: s.slope.conj(), ..s })
    }

    /// `Re u` as a potential in its own right.
    pub fn real_part(&self) -> Self {
        self.map_segments(|s| Segment { value: s.value.re.into(), slope: s.slope.re.into(), ..s })
    }

    /// `Im u` as a (real) potential.
    pub fn imag_part(&self) -> Self {
        self.map_segments(|s| Segment { value: s.value.im.into(), slope: s.slope.im.into(), ..s })
    }

    pub fn is_real(&self) -> bool {
        self.segments.iter().all(|s| s.value.im == 0.0 && s.slope.im == 0.0)
    }

    fn map_segments(&self, f: impl Fn(Segment) -> Segment) -> Self {
        let segments: Vec<Segment> = self.segments.iter().copied().map(f).collect();
        let l2_norm = segments.iter().map(Segment::l2_sq).sum::<f64>().max(0.0).sqrt();
        Self { segments: segments.into(), l2_norm }
    }
}

/// Named test potentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Catalogue {
    Zero,
    Constant(Complex64),
    Linear(Complex64),
    Step { height: Complex64, at: f64 },
    Sawtooth { amplitude: Complex64, teeth: u32 },
    RoughFourier { smoothness: f64, modes: u32, seed: u64 },
}

impl Catalogue {
    pub const NAMES: [&'static str; 6] =
        ["zero", "constant", "linear", "step", "sawtooth", "rough_fourier"];

    pub fn parse(name: &str, params: &[Complex64]) -> Result<Self> {
        let want = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "`{name}` takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        let real = |i: usize, what: &str| -> Result<f64> {
            let v = params[i];
            if v.im != 0.0 {
                return Err(Error::InvalidParameter(format!("{what} must be real, got {v}")));
            }
            Ok(v.re)
        };
        let count = |i: usize, what: &str| -> Result<u32> {
            let v = real(i, what)?;
            if v < 0.0 || v.fract() != 0.0 || v > f64::from(u32::MAX) {
                return Err(Error::InvalidParameter(format!(
                    "{what} must be a nonnegative integer, got {v}"
                )));
            }
            Ok(v as u32)
        };
        Ok(match name {
            "zero" => {
                want(0)?;
                Catalogue::Zero
            }
            "constant" => {
                want(1)?;
                Catalogue::Constant(params[0])
            }
            "linear" => {
                want(1)?;
                Catalogue::Linear(params[0])
            }
            "step" => {
                want(2)?;
                Catalogue::Step { height: params[0], at: real(1, "step position")? }
            }
            "sawtooth" => {
                want(2)?;
                Catalogue::Sawtooth { amplitude: params[0], teeth: count(1, "teeth")? }
            }
            "rough_fourier" => {
                want(3)?;
                Catalogue::RoughFourier {
                    smoothness: real(0, "smoothness")?,
                    modes: count(1, "modes")?,
                    seed: u64::from(count(2, "seed")?),
                }
            }
            other => return Err(Error::UnknownPotential(other.to_string())),
        })
    }

    pub fn build(&self) -> Result<PotentialPrimitive> {
        match *self {
            Catalogue::Zero => Ok(PotentialPrimitive::zero()),
            Catalogue::Constant(c) => Ok(PotentialPrimitive::constant(c)),
            Catalogue::Linear(c) => Ok(PotentialPrimitive::linear(c)),
            Catalogue::Step { height, at } => PotentialPrimitive::step(height, at),
            Catalogue::Sawtooth { amplitude, teeth } => PotentialPrimitive::sawtooth(amplitude, teeth),
            Catalogue::RoughFourier { smoothness, modes, seed } => {
                PotentialPrimitive::rough_fourier(smoothness, modes, seed)
            }
        }
    }
}
