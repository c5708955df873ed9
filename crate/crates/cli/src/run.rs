use std::fs;
use std::path::PathBuf;

use distsl::eigenfunctions::{approx_v, approx_y, evaluation_grid_scaled, remainders, Eigenfunction};
use distsl::odesolve::SolverOptions;
use distsl::oscint::{discrete, upsilon_sup};
use distsl::spectrum::{eigenvalues, Eigenpair, SpectrumOptions};
use distsl::verify::{run_suite, Status, VerifyConfig};
use distsl::PotentialPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::value::RawValue;

use crate::{fmt_f, CliError, RunConfig};

pub const SPECTRUM_HEADER: [&str; 11] = [
    "n",
    "re_lambda",
    "im_lambda",
    "re_sqrt_lambda",
    "im_sqrt_lambda",
    "re_mu",
    "im_mu",
    "abs_rho",
    "upsilon",
    "rho_over_upsilon_sq",
    "simple",
];

pub const GRID_HEADER: [&str; 9] =
    ["x", "re_y", "im_y", "re_v", "im_v", "re_approx_y", "im_approx_y", "re_approx_v", "im_approx_v"];

pub const SUMMARY_HEADER: [&str; 14] = [
    "n",
    "re_lambda",
    "im_lambda",
    "re_mu",
    "im_mu",
    "abs_rho",
    "upsilon",
    "rho_over_upsilon_sq",
    "r_y",
    "r_v",
    "partial_y",
    "partial_v",
    "norm_rem",
    "d_rem",
];

fn spectrum_row(e: &Eigenpair, p: &PotentialPrimitive) -> distsl::Result<Vec<String>> {
    let mu = discrete(e.n as u32, p)?.mu_n;
    let rho = (e.sqrt_lambda - e.n as f64 - mu).norm();
    let ups = upsilon_sup(e.sqrt_lambda, p, 4.0)?.upsilon;
    let ratio = if ups > 0.0 { rho / (ups * ups) } else { f64::NAN };
    let mut row = vec![e.n.to_string()];
    row.extend(
        [e.lambda.re, e.lambda.im, e.sqrt_lambda.re, e.sqrt_lambda.im, mu.re, mu.im, rho, ups, ratio]
            .into_iter()
            .map(fmt_f),
    );
    row.push(e.simple.to_string());
    Ok(row)
}

/// Writes `spectrum.csv` and returns its path.
pub fn run_spectrum(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let p = cfg.build_potential()?;
    let sp = eigenvalues(cfg.n, &p, &SpectrumOptions::default())?;
    let rows = sp.pairs.par_iter().map(|e| spectrum_row(e, &p)).collect::<distsl::Result<Vec<_>>>()?;
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join("spectrum.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(SPECTRUM_HEADER)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(path)
}

fn grid_rows(e: &Eigenpair, p: &PotentialPrimitive, density: f64) -> distsl::Result<Vec<[f64; 9]>> {
    let f = Eigenfunction::new(e)?;
    let xs = evaluation_grid_scaled(p, e.n, density);
    let y = f.y_on(&xs);
    let v = f.v_on(&xs);
    let ay = approx_y(e.n, p, &xs)?;
    let av = approx_v(e.n, p, &xs)?;
    Ok((0..xs.len())
        .map(|i| {
            let (y, v, ay, av) = (y.values[i], v.values[i], ay.values[i], av.values[i]);
            [xs[i], y.re, y.im, v.re, v.im, ay.re, ay.im, av.re, av.im]
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenfunctionReport {
    pub written: Vec<usize>,
    pub skipped: Vec<usize>,
}

/// Writes `eigenfunctions/n_NNNN.csv` for every simple index in the range,
/// `remainders.csv` and `skipped.csv`.
pub fn run_eigenfunctions(cfg: &RunConfig) -> Result<EigenfunctionReport, CliError> {
    let p = cfg.build_potential()?;
    let sp = eigenvalues(cfg.n, &p, &SpectrumOptions::default())?;
    let (lo, hi) = cfg.range;
    let chosen: Vec<&Eigenpair> = sp.pairs[lo - 1..hi].iter().filter(|e| e.simple).collect();
    let grids = chosen
        .par_iter()
        .map(|e| grid_rows(e, &p, cfg.grid_density))
        .collect::<distsl::Result<Vec<_>>>()?;
    let table = remainders(&sp.pairs, lo..=hi, &p)?;

    let dir = cfg.out.join("eigenfunctions");
    fs::create_dir_all(&dir)?;
    for (e, rows) in chosen.iter().zip(&grids) {
        let mut w = csv::Writer::from_path(dir.join(format!("n_{:04}.csv", e.n)))?;
        w.write_record(GRID_HEADER)?;
        for r in rows {
            w.write_record(r.iter().map(|&x| fmt_f(x)))?;
        }
        w.flush()?;
    }

    let mut w = csv::Writer::from_path(cfg.out.join("remainders.csv"))?;
    w.write_record(SUMMARY_HEADER)?;
    for r in &table.records {
        let mut row = vec![r.n.to_string()];
        row.extend(
            [
                r.lambda.re,
                r.lambda.im,
                r.mu.re,
                r.mu.im,
                r.rho.norm(),
                r.upsilon,
                r.rho_ratio,
                r.r_y,
                r.r_v,
                r.partial_y,
                r.partial_v,
                r.norm_rem,
                r.d_rem,
            ]
            .into_iter()
            .map(fmt_f),
        );
        w.write_record(&row)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(cfg.out.join("skipped.csv"))?;
    w.write_record(["n"])?;
    for n in &table.skipped {
        w.write_record([n.to_string()])?;
    }
    w.flush()?;

    Ok(EigenfunctionReport { written: chosen.iter().map(|e| e.n).collect(), skipped: table.skipped })
}

#[derive(Serialize)]
struct CheckRow<'a> {
    name: &'a str,
    status: Status,
    measured: Box<RawValue>,
    threshold: Box<RawValue>,
}

// JSON has no inf or NaN
fn json_number(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { fmt_f(x) } else { "null".to_string() };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub path: PathBuf,
    pub total: usize,
    pub failed: usize,
}

/// Writes `verify.json`; returns a verification error after writing if any
/// check failed.
pub fn run_verify(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let p = cfg.build_potential()?;
    let vcfg = VerifyConfig { n: cfg.n, alpha: cfg.alpha, solver: SolverOptions { tol: cfg.tol }, ..VerifyConfig::default() };
    let mut checks = run_suite(&p, &vcfg)?;
    if let Some(keep) = &cfg.checks {
        if let Some(bad) = keep.iter().find(|k| !checks.iter().any(|c| &c.name == *k)) {
            return Err(CliError::Config(format!("field `checks`: unknown check `{bad}`")));
        }
        checks.retain(|c| keep.contains(&c.name));
    }
    let rows: Vec<CheckRow> = checks
        .iter()
        .map(|c| CheckRow {
            name: &c.name,
            status: c.status,
            measured: json_number(c.measured),
            threshold: json_number(c.threshold),
        })
        .collect();
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join("verify.json");
    let mut text = serde_json::to_string_pretty(&rows).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text)?;
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    if failed > 0 {
        return Err(CliError::Verification { failed, total: checks.len() });
    }
    Ok(VerifyReport { path, total: checks.len(), failed })
}
