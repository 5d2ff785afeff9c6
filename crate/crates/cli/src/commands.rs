use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use reslab_core::acceptance::{Acceptance, AcceptanceOptions};
use reslab_core::config::{Model, ModelSpec, Spec1D, Spec3D};
use reslab_core::density::{breit_wigner_scan, DensityField, SpectralPairing};
use reslab_core::dynamics::{sojourn_time, survival_amplitude};
use reslab_core::model::RankOneModel;
use reslab_core::model1d::verify_eigenpair;
use reslab_core::model3d::{cross_section_scan, r_hs_limit};
use reslab_core::resonance::{scaled_f_limits, scaled_f_targets, symmetric_detunings};
use reslab_core::scattering1d::{r_limit_scan, spectral_shift_scan};
use reslab_core::table::Table;
use reslab_core::Error;
use serde_json::json;

use crate::{RunArgs, ScanKind};

fn load_spec(run: &RunArgs) -> Result<ModelSpec> {
    let mut spec = match &run.model {
        Some(path) => ModelSpec::from_path(path)?,
        None => ModelSpec::OneD(Spec1D::p1()),
    };
    let grid = spec.grid_mut();
    if let Some(l) = run.grid_l {
        grid.half_width = l;
    }
    if let Some(n) = run.grid_n {
        grid.points = n;
    }
    Ok(spec)
}

fn load(run: &RunArgs) -> Result<Model> {
    Ok(load_spec(run)?.build()?)
}

fn as_model(model: &Model) -> &dyn RankOneModel {
    match model {
        Model::OneD(p) => p,
        Model::ThreeD(p) => p,
    }
}

fn eigenvector_pairing(model: &Model) -> Result<SpectralPairing> {
    Ok(match model {
        Model::OneD(p) => SpectralPairing::eigenvector(p)?,
        Model::ThreeD(p) => p.eigenvector_pairing()?,
    })
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| Error::Config(format!("{what}: {s:?} is not a number"))))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(Error::Config(format!("{what} list is empty")).into());
    }
    Ok(values)
}

/// Couplings from `--alphas` or `--alpha-exps`, with `α₀` itself removed.
fn alpha_sequence(run: &RunArgs, alpha0: f64) -> Result<Vec<f64>> {
    let alphas = match &run.alphas {
        Some(list) => parse_list(list, "--alphas")?,
        None => {
            let parts: Vec<&str> = run.alpha_exps.split(':').collect();
            if !(2..=3).contains(&parts.len()) {
                return Err(
                    Error::Config(format!("--alpha-exps expects start:stop[:base], got {:?}", run.alpha_exps)).into()
                );
            }
            let int = |s: &str| {
                s.trim().parse::<i32>().map_err(|_| Error::Config(format!("--alpha-exps: {s:?} is not an integer")))
            };
            let (start, stop) = (int(parts[0])?, int(parts[1])?);
            let base = match parts.get(2) {
                Some(b) => {
                    b.trim().parse::<f64>().map_err(|_| Error::Config(format!("--alpha-exps: bad base {b:?}")))?
                }
                None => 10.0,
            };
            if !(base > 0.0 && base != 1.0) {
                return Err(Error::Config(format!("--alpha-exps: base must be positive and not 1, got {base}")).into());
            }
            let exps: Vec<i32> = if start >= stop { (stop..=start).rev().collect() } else { (start..=stop).collect() };
            let deltas: Vec<f64> = exps.iter().map(|&e| base.powi(e)).collect();
            symmetric_detunings(alpha0, &deltas)
        }
    };
    // α₀ is itself computed, so a typed-in value matches it only to grid accuracy
    let near = 1e-9 * alpha0.abs().max(1.0);
    let kept: Vec<f64> = alphas.iter().copied().filter(|a| (a - alpha0).abs() > near).collect();
    if kept.len() < alphas.len() {
        log::warn!("dropped alpha0 = {alpha0} from the coupling sequence; the density is singular there");
    }
    if kept.is_empty() {
        bail!(Error::Config("coupling sequence is empty".into()));
    }
    Ok(kept)
}

fn emit_table(run: &RunArgs, stem: &str, table: &Table) -> Result<()> {
    match &run.out {
        Some(dir) => {
            let path = dir.join(format!("{stem}.csv"));
            write_file(&path, &table.to_csv_string())
        }
        None => {
            table.write_csv(std::io::stdout().lock())?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

pub fn solve(run: &RunArgs) -> Result<bool> {
    let model = load(run)?;
    let m = as_model(&model);
    let mut report = json!({
        "lambda0": m.lambda0(),
        "alpha0": m.alpha0(),
        "phi_norm_sq": m.phi_norm_sq(),
        "vanishing_order": m.vanishing_order(),
    });
    match &model {
        Model::OneD(p) => {
            let e = verify_eigenpair(p);
            report["dimension"] = json!(1);
            report["eigen_residual"] = json!(e.relative_residual);
            report["norm_check"] = json!(p.norm_check());
        }
        Model::ThreeD(p) => {
            report["dimension"] = json!(3);
            report["norm_check"] = json!(p.norm_check());
        }
    }
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &run.out {
        Some(dir) => {
            write_file(&dir.join("solve.json"), &text)?;
            write_file(&dir.join("profile.csv"), &profile_table(&model).to_csv_string())?;
        }
        None => print!("{text}"),
    }
    Ok(true)
}

/// `u` and `φ` on the grid; one column pair per channel in 3D.
fn profile_table(model: &Model) -> Table {
    let (grid, columns): (_, Vec<(String, Vec<f64>)>) = match model {
        Model::OneD(p) => (*p.grid(), vec![("u".into(), p.u().real_values()), ("phi".into(), p.phi().real_values())]),
        Model::ThreeD(p) => {
            let mut cols = Vec::new();
            for (k, c) in p.channels().iter().enumerate() {
                cols.push((format!("u_{}_{}", c.l, c.m), p.coeffs()[k].real_values()));
                cols.push((format!("phi_{}_{}", c.l, c.m), p.phi_coeffs()[k].real_values()));
            }
            (*p.grid(), cols)
        }
    };
    let mut t = Table::new(std::iter::once("x".to_string()).chain(columns.iter().map(|(n, _)| n.clone())));
    for (i, x) in grid.nodes().enumerate() {
        t.push(std::iter::once(x).chain(columns.iter().map(|(_, v)| v[i])).collect());
    }
    t
}

fn cx(z: reslab_core::Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn scan(run: &RunArgs, kind: ScanKind) -> Result<bool> {
    let hs = parse_list(&run.h, "--h")?;
    let model = load(run)?;
    let m = as_model(&model);
    let alphas = alpha_sequence(run, m.alpha0())?;
    let table = match kind {
        ScanKind::Bw => {
            let pairing = eigenvector_pairing(&model)?;
            let mut t = Table::new([
                "alpha",
                "h",
                "kappa",
                "lambda_h",
                "kappa_rho_re",
                "kappa_rho_im",
                "target_re",
                "target_im",
                "abs_error",
            ]);
            for r in breit_wigner_scan(m, &pairing, &hs, &alphas)? {
                let [a, b] = cx(r.kappa_rho);
                let [c, d] = cx(r.target);
                t.push(vec![r.alpha, r.h, r.kappa, r.lambda_h, a, b, c, d, r.abs_error]);
            }
            t
        }
        ScanKind::Rlimit => match &model {
            Model::OneD(p) => {
                let mut t = Table::new([
                    "alpha",
                    "h",
                    "kappa",
                    "r_re",
                    "r_im",
                    "r_target_re",
                    "r_target_im",
                    "abs2",
                    "abs2_target",
                    "r_error",
                    "abs2_error",
                ]);
                for &h in &hs {
                    for r in r_limit_scan(p, h, &alphas)? {
                        let [a, b] = cx(r.r);
                        let [c, d] = cx(r.r_target);
                        t.push(vec![r.alpha, r.h, r.kappa, a, b, c, d, r.abs2, r.abs2_target, r.r_error, r.abs2_error]);
                    }
                }
                t
            }
            Model::ThreeD(p) => {
                let mut t = Table::new(["alpha", "h", "kappa", "hs_error", "hs_norm"]);
                for &h in &hs {
                    for r in r_hs_limit(p, h, &alphas)? {
                        t.push(vec![r.alpha, r.h, r.kappa, r.hs_error, r.hs_norm]);
                    }
                }
                t
            }
        },
        ScanKind::Flimits => {
            let mut t = Table::new([
                "alpha",
                "h",
                "lambda",
                "kappa",
                "f1_over_kappa",
                "f2_over_kappa",
                "kappa_f1_over_abs2",
                "kappa_f2_over_abs2",
                "max_error",
            ]);
            for &h in &hs {
                let target = scaled_f_targets(m, h);
                for r in scaled_f_limits(m, h, &alphas)? {
                    t.push(vec![
                        r.alpha,
                        r.h,
                        r.lambda,
                        r.kappa,
                        r.f1_over_kappa,
                        r.f2_over_kappa,
                        r.kappa_f1_over_abs2,
                        r.kappa_f2_over_abs2,
                        r.max_error(&target),
                    ]);
                }
            }
            t
        }
        ScanKind::Ssf | ScanKind::Delay => {
            let delay = kind == ScanKind::Delay;
            let mut t = if delay {
                Table::new(["alpha", "h", "kappa", "kappa_delay", "target", "abs_error"])
            } else {
                Table::new(["alpha", "h", "kappa", "kappa_xi_prime", "target", "abs_error"])
            };
            for &h in &hs {
                for r in spectral_shift_scan(m, h, &alphas)? {
                    t.push(if delay {
                        vec![
                            r.alpha,
                            r.h,
                            r.kappa,
                            r.kappa_delay,
                            r.delay_target,
                            (r.kappa_delay - r.delay_target).abs(),
                        ]
                    } else {
                        vec![r.alpha, r.h, r.kappa, r.kappa_xi_prime, r.xi_prime_target, r.abs_error]
                    });
                }
            }
            t
        }
        ScanKind::Xsection => {
            let Model::ThreeD(p) = &model else {
                bail!(Error::Config("xsection needs a 3D model spec".into()));
            };
            let mut t = Table::new(["alpha", "h", "kappa", "sigma", "target", "abs_error"]);
            for &h in &hs {
                for r in cross_section_scan(p, h, &alphas)? {
                    t.push(vec![r.alpha, r.h, r.kappa, r.sigma, r.target, r.abs_error]);
                }
            }
            t
        }
    };
    emit_table(run, kind.file_stem(), &table)?;
    Ok(true)
}

pub fn survival(run: &RunArgs, alpha: Option<f64>, t_max: f64, steps: usize) -> Result<bool> {
    if !(t_max > 0.0) || steps == 0 {
        bail!(Error::Config("survival needs t-max > 0 and steps > 0".into()));
    }
    let model = load(run)?;
    let m = as_model(&model);
    let alpha = match alpha {
        Some(a) => a,
        None => alpha_sequence(run, m.alpha0())?[0],
    };
    let pairing = eigenvector_pairing(&model)?;
    let amp = survival_amplitude(&DensityField::new(m, &pairing, alpha)?, t_max, steps + 1)?;
    let mut t = Table::new(["t", "re", "im", "abs2"]);
    for (time, v) in amp.times.iter().zip(&amp.values) {
        t.push(vec![*time, v.re, v.im, v.norm_sqr()]);
    }
    emit_table(run, "survival", &t)?;
    Ok(true)
}

pub fn sojourn(run: &RunArgs) -> Result<bool> {
    let model = load(run)?;
    let m = as_model(&model);
    let pairing = eigenvector_pairing(&model)?;
    let mut t = Table::new(["alpha", "tau", "kappa", "lower_bound", "ratio"]);
    for alpha in alpha_sequence(run, m.alpha0())? {
        let r = sojourn_time(&DensityField::new(m, &pairing, alpha)?)?;
        let nan = f64::NAN;
        t.push(vec![r.alpha, r.tau, r.kappa.unwrap_or(nan), r.lower_bound.unwrap_or(nan), r.ratio.unwrap_or(nan)]);
    }
    emit_table(run, "sojourn", &t)?;
    Ok(true)
}

pub fn verify(run: &RunArgs, only: Vec<String>, tol: Option<f64>, oracle_points: usize) -> Result<bool> {
    if let Some(t) = tol {
        if !(t > 0.0) {
            bail!(Error::Config(format!("--tol must be positive, got {t}")));
        }
    }
    let (spec1d, spec3d) = match load_spec(run)? {
        ModelSpec::OneD(s) => (s, Spec3D::default_two_channel()),
        ModelSpec::ThreeD(s) => (Spec1D::p1(), s),
    };
    let opts = AcceptanceOptions { tol, only, seed: run.seed, oracle_points };
    let suite = Acceptance::new(&spec1d, &spec3d, opts)?;
    let mut lines = String::new();
    let mut all = true;
    for (id, _) in suite.selected() {
        let r = suite.run(id)?;
        eprintln!("{}", r.line());
        if !r.pass {
            eprintln!("  {}", r.detail);
        }
        all &= r.pass;
        lines.push_str(&serde_json::to_string(&r)?);
        lines.push('\n');
    }
    match &run.out {
        Some(dir) => write_file(&dir.join("verify.jsonl"), &lines)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(lines.as_bytes())?;
        }
    }
    Ok(all)
}
