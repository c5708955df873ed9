//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use distsl::eigenfunctions::{
    evaluation_grid, gram_matrix, gram_residual, normalization_identity, remainders, Eigenfunction,
};
use distsl::odesolve::{RegionParams, SolverOptions};
use distsl::oscint::{discrete, upsilon_sup};
use distsl::spectrum::{eigenvalues, Spectrum, SpectrumOptions};
use distsl::verify::{
    comparability_samples, cross_solver_residual, loglog_slope, partial_sum_growth, pruefer_sample,
    spectrum_distance, upward_trend_statistic,
};
use distsl::{Complex64, PotentialPrimitive};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn catalogue() -> Vec<(&'static str, PotentialPrimitive)> {
    vec![
        ("zero", PotentialPrimitive::zero()),
        ("constant(1)", PotentialPrimitive::constant(c(1.0, 0.0))),
        ("linear(5)", PotentialPrimitive::linear(c(5.0, 0.0))),
        ("step(2,pi/2)", PotentialPrimitive::step(c(2.0, 0.0), PI / 2.0).unwrap()),
        ("step(2i,pi/2)", PotentialPrimitive::step(c(0.0, 2.0), PI / 2.0).unwrap()),
        ("sawtooth(1,3)", PotentialPrimitive::sawtooth(c(1.0, 0.0), 3).unwrap()),
        ("rough_fourier(0.6,64,7)", PotentialPrimitive::rough_fourier(0.6, 64, 7).unwrap()),
    ]
}

fn spectrum(p: &PotentialPrimitive, n: usize) -> Spectrum {
    eigenvalues(n, p, &SpectrumOptions::default()).expect("spectrum")
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Roots of `k sin(k pi) + kappa sin^2(k pi / 2)` by scanning and bisection.
fn delta_oracle(kappa: f64, count: usize) -> Vec<f64> {
    let f = |k: f64| k * (k * PI).sin() + kappa * (k * PI / 2.0).sin().powi(2);
    let mut roots = Vec::new();
    let h = 1e-3;
    let mut k = h;
    while roots.len() < count {
        let (a, b) = (k, k + h);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            roots.push(a * a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if f(lo) * f(m) <= 0.0 {
                    hi = m;
                } else {
                    lo = m;
                }
                if hi - lo <= 4.0 * f64::EPSILON * hi {
                    break;
                }
            }
            let r = 0.5 * (lo + hi);
            roots.push(r * r);
        }
        k = b;
    }
    roots
}

fn criterion_1() -> Outcome {
    let p = PotentialPrimitive::zero();
    let s = spectrum(&p, 50);
    let ev = s.pairs.iter().map(|e| (e.lambda - c((e.n * e.n) as f64, 0.0)).norm()).fold(0.0, f64::max);
    let mut ef: f64 = 0.0;
    for e in &s.pairs {
        let f = Eigenfunction::new(e).unwrap();
        let n = e.n as f64;
        for x in evaluation_grid(&p, e.n) {
            ef = ef.max((f.y(x) - (2.0 / PI).sqrt() * (n * x).sin()).norm());
        }
    }
    outcome(ev <= 1e-10 && ef <= 1e-8, format!("max|lambda_n - n^2| = {ev:.2e}, sup|y_n - sqrt(2/pi) sin nx| = {ef:.2e}"))
}

fn criterion_2() -> Outcome {
    let s = spectrum(&PotentialPrimitive::linear(c(5.0, 0.0)), 30);
    let err = s.pairs.iter().map(|e| (e.lambda - c((e.n * e.n) as f64 + 5.0, 0.0)).norm()).fold(0.0, f64::max);
    outcome(err <= 1e-8, format!("max|lambda_n - n^2 - 5| = {err:.2e}"))
}

fn criterion_3() -> Outcome {
    let s = spectrum(&PotentialPrimitive::step(c(2.0, 0.0), PI / 2.0).unwrap(), 30);
    let oracle = delta_oracle(2.0, 30);
    // independent high-precision roots
    let frozen = [(1, 1.948_184_623_026_224_7), (3, 10.196_576_918_778_546), (5, 26.242_364_029_756_243), (29, 842.272_255_212_961_6)];
    let frozen_err = frozen.iter().map(|&(n, v)| (oracle[n - 1] - v).abs() / v).fold(0.0, f64::max);
    let err = s.pairs.iter().zip(&oracle).map(|(e, o)| (e.lambda - c(*o, 0.0)).norm()).fold(0.0, f64::max);
    let even = s
        .pairs
        .iter()
        .filter(|e| e.n % 2 == 0)
        .map(|e| (e.lambda - c((e.n * e.n) as f64, 0.0)).norm())
        .fold(0.0, f64::max);
    outcome(
        err <= 1e-8 && even <= 1e-8 && frozen_err <= 1e-13,
        format!("max|lambda_n - bisection| = {err:.2e}, even max|lambda_n - n^2| = {even:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, p) in catalogue() {
        let s = spectrum(&p, 200);
        let mut ns = Vec::new();
        let mut ratios = Vec::new();
        for e in s.pairs.iter().filter(|e| e.n >= 10) {
            let mu = discrete(e.n as u32, &p).unwrap().mu_n;
            let rho = (e.sqrt_lambda - e.n as f64 - mu).norm();
            let ups = upsilon_sup(e.sqrt_lambda, &p, 4.0).unwrap().upsilon;
            if ups > 0.0 {
                ns.push(e.n as f64);
                ratios.push(rho / (ups * ups));
            }
        }
        if ratios.iter().all(|r| *r <= 1e-10) {
            parts.push(format!("{name}: degenerate"));
            continue;
        }
        let m = ratios.iter().copied().fold(0.0, f64::max);
        let t = upward_trend_statistic(&ns, &ratios);
        pass &= m.is_finite() && t <= 2.0;
        parts.push(format!("{name}: M={m:.2e} t={t:.1}"));
    }
    // q = 5: n^2 |mu_n - 5/(2n)| is a stable constant
    let p = PotentialPrimitive::linear(c(5.0, 0.0));
    let frozen = [(10, 0.009_375_f64), (40, 0.000_146_484_375)];
    let mut frozen_err: f64 = 0.0;
    for (n, v) in frozen {
        frozen_err = frozen_err.max((discrete(n, &p).unwrap().mu_n.re - (2.5 / n as f64 + v)).abs());
    }
    let (ns, cs): (Vec<f64>, Vec<f64>) = (10..=200)
        .map(|n| {
            let mu = discrete(n, &p).unwrap().mu_n;
            let nf = f64::from(n);
            (nf, nf * nf * (mu - 2.5 / nf).norm())
        })
        .unzip();
    let cmax = cs.iter().copied().fold(0.0, f64::max);
    let cmin = cs.iter().copied().fold(f64::INFINITY, f64::min);
    let t = upward_trend_statistic(&ns, &cs);
    pass &= t <= 2.0 && cmax.is_finite() && frozen_err <= 1e-12;
    parts.push(format!("q=5: C in [{cmin:.4}, {cmax:.4}] t={t:.1}"));
    outcome(pass, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let opts = SolverOptions::default();
    for (name, p) in [
        ("step(2,pi/2)", PotentialPrimitive::step(c(2.0, 0.0), PI / 2.0).unwrap()),
        ("step(2i,pi/2)", PotentialPrimitive::step(c(0.0, 2.0), PI / 2.0).unwrap()),
    ] {
        let mut ks = Vec::new();
        let mut th = Vec::new();
        let mut rr = Vec::new();
        for k in 10..=60 {
            let s = pruefer_sample(c((k as f64 + 0.25).powi(2), 0.0), &p, &opts).unwrap();
            let u2 = s.upsilon * s.upsilon;
            ks.push(k as f64);
            th.push(s.theta_rem / u2);
            rr.push(s.r_rem / u2);
        }
        let mt = th.iter().copied().fold(0.0, f64::max);
        let mr = rr.iter().copied().fold(0.0, f64::max);
        let (tt, tr) = (upward_trend_statistic(&ks, &th), upward_trend_statistic(&ks, &rr));
        pass &= mt.is_finite() && mr.is_finite() && tt <= 2.0 && tr <= 2.0;
        parts.push(format!("{name}: theta M={mt:.3} t={tt:.1}, r M={mr:.3} t={tr:.1}"));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut worst_lower = f64::NEG_INFINITY;
    let mut worst_upper: f64 = 0.0;
    let mut violations = 0;
    let mut total = 0;
    for (_, p) in catalogue() {
        for s in comparability_samples(&p, 1.0, 1.0, 120.0, 8).unwrap() {
            total += 1;
            if !(s.upsilon1 <= s.upsilon && s.upsilon <= s.bound) {
                violations += 1;
            }
            worst_lower = worst_lower.max(s.upsilon1 - s.upsilon);
            if s.bound > 0.0 {
                worst_upper = worst_upper.max(s.upsilon / s.bound);
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations}/{total} violations, max(U1 - U) = {worst_lower:.2e}, max U/(M U1) = {worst_upper:.3}"),
    )
}

fn criterion_7() -> Outcome {
    let p = PotentialPrimitive::step(c(0.0, 2.0), PI / 2.0).unwrap();
    let s = spectrum(&p, 150);
    let t = remainders(&s.pairs, 1..=150, &p).unwrap();
    let fit: Vec<_> = t.records.iter().filter(|r| r.n >= 20).collect();
    let ns: Vec<f64> = fit.iter().map(|r| r.n as f64).collect();
    let sy = loglog_slope(&ns, &fit.iter().map(|r| r.r_y).collect::<Vec<_>>());
    let sv = loglog_slope(&ns, &fit.iter().map(|r| r.r_v).collect::<Vec<_>>());
    let ry: Vec<(usize, f64)> = t.records.iter().map(|r| (r.n, r.r_y)).collect();
    let rv: Vec<(usize, f64)> = t.records.iter().map(|r| (r.n, r.r_v)).collect();
    let gy = partial_sum_growth(&ry, 100, 150);
    let gv = partial_sum_growth(&rv, 100, 150);
    outcome(
        sy < 0.0 && sv < 0.0 && gy < 0.05 && gv < 0.05 && t.skipped.is_empty(),
        format!("log-log slopes y {sy:.2}, v {sv:.2}; partial-sum growth y {:.3}%, v {:.3}%", 100.0 * gy, 100.0 * gv),
    )
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (_, p) in catalogue() {
        for e in spectrum(&p, 50).pairs {
            let f = Eigenfunction::new(&e).unwrap();
            worst = worst.max(normalization_identity(&f).relative_error());
            count += 1;
        }
    }
    outcome(worst <= 1e-6, format!("max relative error {worst:.2e} over {count} eigenvalues"))
}

fn criterion_9() -> Outcome {
    let p = PotentialPrimitive::step(c(0.0, 2.0), PI / 2.0).unwrap();
    let fs: Vec<_> = spectrum(&p, 40).pairs.iter().map(|e| Eigenfunction::new(e).unwrap()).collect();
    let r = gram_residual(&gram_matrix(&fs));
    outcome(r <= 1e-6, format!("max|(y_n, v_m) - delta_nm| = {r:.2e}"))
}

fn criterion_10() -> Outcome {
    let opts = SolverOptions::default();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, p) in [
        ("step(2,pi/2)", PotentialPrimitive::step(c(2.0, 0.0), PI / 2.0).unwrap()),
        ("step(2i,pi/2)", PotentialPrimitive::step(c(0.0, 2.0), PI / 2.0).unwrap()),
        ("rough_fourier(0.6,64,7)", PotentialPrimitive::rough_fourier(0.6, 64, 7).unwrap()),
    ] {
        let s = spectrum(&p, 30);
        let region = RegionParams::calibrate(&p, 1.0, &opts, &s.lambdas()).unwrap();
        let lambdas: Vec<Complex64> = s
            .pairs
            .iter()
            .map(|e| e.lambda)
            .chain([c(400.0, 0.0), c(900.0, 15.0)])
            .filter(|l| l.re >= region.re_threshold)
            .collect();
        let r = lambdas.iter().map(|&l| cross_solver_residual(l, &p, &opts).unwrap()).fold(0.0, f64::max);
        worst = worst.max(r);
        parts.push(format!("{name}: {r:.2e} (threshold {})", region.re_threshold));
    }
    outcome(worst <= 1e-7, parts.join("; "))
}

fn criterion_11() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [
        PotentialPrimitive::step(c(0.0, 2.0), PI / 2.0).unwrap(),
        PotentialPrimitive::sawtooth(c(1.0, 0.0), 3).unwrap(),
    ] {
        let base = spectrum(&p, 30);
        for shift in [c(1.0, 0.0), c(2.0, 1.0)] {
            worst = worst.max(spectrum_distance(&base, &spectrum(&p.gauge_shift(shift), 30)));
        }
    }
    outcome(worst <= 1e-8, format!("max|lambda_n(u) - lambda_n(u + c)| = {worst:.2e}"))
}

fn criterion_12() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, p) in catalogue() {
        let s = spectrum(&p, 50);
        let cert = s.certificate;
        pass &= cert.winding == cert.found && s.pairs.len() == 50;
        parts.push(format!("{name}: {}/{}", cert.winding, cert.found));
    }
    outcome(pass, format!("winding/found {}", parts.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("zero potential spectrum and eigenfunctions", criterion_1),
        ("constant q shift", criterion_2),
        ("delta interaction against bisection", criterion_3),
        ("eigenvalue remainders over Upsilon^2", criterion_4),
        ("phase and amplitude representations", criterion_5),
        ("Upsilon comparability", criterion_6),
        ("eigenfunction remainders, complex step", criterion_7),
        ("normalization identity", criterion_8),
        ("biorthogonality", criterion_9),
        ("cross-solver agreement", criterion_10),
        ("gauge invariance", criterion_11),
        ("completeness", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag}: {name}: {} [{:.1}s]", i + 1, o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 12 passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
