use std::time::Instant;

use clap::ValueEnum;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qplane::eq2::TruncatedBasis;
use qplane::plane::{
    apply_function_numeric, apply_green_plane, green_at_eigenvalue, sector_spectrum,
    NumericSpectrum, PlaneBasis, PlaneVector,
};
use qplane::qcalc::lattice_point;
use qplane::qspecial::{
    bessel_j_at, bessel_j_order, estimate_c_q, neumann_n, spectral_green, Argument, CqEstimate,
    SeriesResult,
};
use qplane::verify::{
    plane_half_width, real_part_fit, run_suite, spectral_window, Suite, PLANE_PROBE_ROW,
};
use qplane::{GreenParams, QContext, QError, SpectralEvalParams};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::table::{Cell, Table};

/// Outcome of a command: the report and whether every row succeeded.
pub struct Outcome {
    pub table: Table,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Function {
    #[value(name = "J")]
    J,
    #[value(name = "Js")]
    Js,
    #[value(name = "N")]
    N,
    #[value(name = "G")]
    G,
    #[value(name = "spectral-G")]
    SpectralG,
}

impl Function {
    fn name(self) -> &'static str {
        match self {
            Function::J => "J",
            Function::Js => "Js",
            Function::N => "N",
            Function::G => "G",
            Function::SpectralG => "spectral-G",
        }
    }
}

/// `ε` for a spectral sum: the configured value where the sum has a pole
/// at `p`, zero elsewhere.
fn spectral_params(
    ctx: &QContext,
    cfg: &RunConfig,
    params: &GreenParams,
) -> qplane::Result<SpectralEvalParams> {
    let eps = if params.on_lattice || params.resonant(ctx) {
        cfg.epsilon
    } else {
        0.0
    };
    spectral_window(ctx, eps)
}

pub fn eval(
    cfg: &RunConfig,
    f: Function,
    s: i64,
    xs: &[f64],
    p: Option<f64>,
    rhos: &[f64],
) -> Result<Outcome, CliError> {
    let ctx = cfg.context()?;
    let mut table = Table::new(
        "eval",
        vec![
            "fn",
            "s",
            "x",
            "p",
            "rho",
            "re",
            "im",
            "terms_used",
            "error_bound",
            "error",
        ],
    );
    let mut ok = true;
    let mut emit =
        |x: Option<f64>, p: Option<f64>, rho: Option<f64>, r: qplane::Result<SeriesResult>| {
            let order = matches!(f, Function::Js).then_some(s);
            let head = vec![
                f.name().into(),
                Cell::from(order),
                x.into(),
                p.into(),
                rho.into(),
            ];
            let tail = match r {
                Ok(v) => vec![
                    v.value.re.into(),
                    v.value.im.into(),
                    v.terms_used.into(),
                    v.error_bound.into(),
                    Cell::Empty,
                ],
                Err(e) => {
                    ok = false;
                    vec![
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        e.to_string().into(),
                    ]
                }
            };
            table.push(head.into_iter().chain(tail).collect());
        };
    match f {
        Function::J | Function::Js => {
            if xs.is_empty() {
                return Err(CliError::Usage(format!(
                    "--fn {} needs at least one --x",
                    f.name()
                )));
            }
            let order = if f == Function::J { 0 } else { s };
            for &x in xs {
                emit(Some(x), None, None, bessel_j_order(&ctx, order, x));
            }
        }
        Function::N | Function::G | Function::SpectralG => {
            let p = p.ok_or_else(|| CliError::Usage(format!("--fn {} needs --p", f.name())))?;
            if rhos.is_empty() {
                return Err(CliError::Usage(format!(
                    "--fn {} needs at least one --rho",
                    f.name()
                )));
            }
            let params =
                GreenParams::new(&ctx, p, cfg.c_q).map_err(|e| CliError::Usage(e.to_string()))?;
            for &rho in rhos {
                let r = match f {
                    Function::N => neumann_n(&ctx, &params, rho),
                    Function::G => green_value(&ctx, &params, rho),
                    _ => spectral_params(&ctx, cfg, &params)
                        .and_then(|sp| spectral_green(&ctx, &params, &sp, rho)),
                };
                emit(None, Some(p), Some(rho), r);
            }
        }
    }
    Ok(Outcome { table, ok })
}

/// `𝒢 = 𝒩 − i𝒥` with the evaluation statistics of both parts.
fn green_value(ctx: &QContext, params: &GreenParams, rho: f64) -> qplane::Result<SeriesResult> {
    let n = neumann_n(ctx, params, rho)?;
    let j = bessel_j_at(ctx, 0, &Argument::Product { p: params.p, rho })?;
    Ok(SeriesResult {
        value: n.value - Complex64::i() * j.value,
        terms_used: n.terms_used.max(j.terms_used),
        cancellation_magnitude: n.cancellation_magnitude.max(j.cancellation_magnitude),
        error_bound: n.error_bound + j.error_bound,
        extended: n.extended || j.extended,
    })
}

pub fn verify(cfg: &RunConfig, suite: Suite, timings: bool) -> Result<Outcome, CliError> {
    let report = run_suite(&cfg.verify_config(), suite).map_err(|e| match e {
        QError::InvalidParameter(m) => CliError::Usage(m),
        other => CliError::Numeric(other),
    })?;
    let mut columns = vec!["suite", "check", "status", "max_residual", "tolerance"];
    if timings {
        columns.push("wall_time");
    }
    columns.push("detail");
    let mut table = Table::new("verify", columns);
    for c in &report.checks {
        let mut row: Vec<Cell> = vec![
            c.suite.to_string().into(),
            c.name.clone().into(),
            c.status.to_string().into(),
            c.max_residual.into(),
            c.tolerance.into(),
        ];
        if timings {
            row.push(c.wall_time.into());
        }
        row.push(c.detail.clone().into());
        table.push(row);
    }
    let failed = report
        .checks
        .iter()
        .filter(|c| c.status != qplane::verify::CheckStatus::Pass)
        .count();
    table.note("suite", suite.to_string());
    table.note("checks", report.checks.len());
    table.note("failed", failed);
    table.note("pass", report.pass);
    Ok(Outcome {
        table,
        ok: report.pass,
    })
}

pub fn spectrum(cfg: &RunConfig, s: i64) -> Result<Outcome, CliError> {
    let ctx = cfg.context()?;
    let basis =
        TruncatedBasis::new(cfg.half_width, 8).map_err(|e| CliError::Usage(e.to_string()))?;
    let rows = sector_spectrum(&ctx, basis, s)?;
    let tol = cfg.assert_tol;
    let mut table = Table::new(
        "spectrum",
        vec![
            "t",
            "s",
            "eigenvalue",
            "expected",
            "relative_error",
            "residual",
            "backward_error",
            "overlap",
            "pass",
        ],
    );
    let mut ok = true;
    for r in &rows {
        let pass = r.relative_error <= tol && r.residual.relative <= tol && 1.0 - r.overlap <= tol;
        ok &= pass;
        table.push(vec![
            r.t.into(),
            r.s.into(),
            r.eigenvalue.into(),
            r.expected.into(),
            r.relative_error.into(),
            r.residual.relative.into(),
            r.residual.backward.into(),
            r.overlap.into(),
            pass.into(),
        ]);
    }
    table.note("sector", s);
    table.note(
        "resolved_t",
        format!("{}..{}", rows[0].t, rows[rows.len() - 1].t),
    );
    table.note("pass", ok);
    Ok(Outcome { table, ok })
}

/// One `--entry a,b,re[,im]`: coefficient of `e_a⊗e_b`.
pub fn parse_entry(text: &str) -> Result<(i64, i64, Complex64), CliError> {
    let bad = || CliError::Usage(format!("--entry expects a,b,re[,im], got `{text}`"));
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let a = parts[0].parse().map_err(|_| bad())?;
    let b = parts[1].parse().map_err(|_| bad())?;
    let re = parts[2].parse().map_err(|_| bad())?;
    let im = if parts.len() == 4 {
        parts[3].parse().map_err(|_| bad())?
    } else {
        0.0
    };
    Ok((a, b, Complex64::new(re, im)))
}

/// A vector with `terms` random entries in sectors −3..3, on rows where
/// the Green operator is resolved.
fn random_vector(basis: TruncatedBasis, seed: u64, terms: usize) -> Result<PlaneVector, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = PlaneVector::zeros(basis);
    for _ in 0..terms {
        let s: i64 = rng.gen_range(-3..=3);
        let j = PLANE_PROBE_ROW + rng.gen_range(0..=8) - s.max(0);
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let old = v.get(s + j, j).unwrap_or_default();
        v.set(s + j, j, old + c)?;
    }
    Ok(v)
}

pub fn apply_green(
    cfg: &RunConfig,
    p: f64,
    entries: &[String],
    terms: usize,
    check: bool,
) -> Result<Outcome, CliError> {
    let ctx = cfg.context()?;
    let params = GreenParams::new(&ctx, p, cfg.c_q).map_err(|e| CliError::Usage(e.to_string()))?;
    let basis = TruncatedBasis::new(plane_half_width(&cfg.verify_config()), 8)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let v = if entries.is_empty() {
        random_vector(basis, cfg.seed, terms)?
    } else {
        let mut v = PlaneVector::zeros(basis);
        for e in entries {
            let (a, b, c) = parse_entry(e)?;
            v.set(a, b, c).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        v
    };
    let windows = PlaneBasis::for_vector(&ctx, &v)?;
    let out = apply_green_plane(&ctx, &params, &v, &windows, cfg.assert_tol)?;

    let mut table = Table::new(
        "apply-green",
        vec!["a", "b", "s", "in_re", "in_im", "out_re", "out_im"],
    );
    let keys: std::collections::BTreeSet<(i64, i64)> = out
        .support()
        .chain(v.support())
        .map(|(a, b, _)| (a, b))
        .collect();
    for (a, b) in keys {
        let x = v.get(a, b).unwrap_or_default();
        let y = out.get(a, b).unwrap_or_default();
        table.push(vec![
            a.into(),
            b.into(),
            (a - b).into(),
            x.re.into(),
            x.im.into(),
            y.re.into(),
            y.im.into(),
        ]);
    }
    table.note("p", p);
    table.note("window_L", basis.half_width());
    table.note("norm_in", v.norm());
    table.note("norm_out", out.norm());
    let mut ok = true;
    if check {
        let numeric = NumericSpectrum::new(&ctx, &windows)?;
        let other =
            apply_function_numeric(&v, &numeric, |t| green_at_eigenvalue(&ctx, &params, t))?;
        let diff = out.sub(&other)?.norm() / out.norm();
        ok = diff <= cfg.assert_tol;
        table.note("numeric_relative_difference", diff);
        table.note("pass", ok);
    }
    Ok(Outcome { table, ok })
}

fn cq_rho_grid(ctx: &QContext, rho: &[f64], rho_index: &[i64]) -> Vec<f64> {
    if rho.is_empty() {
        rho_index
            .iter()
            .map(|&i| lattice_point(ctx, 2 * i))
            .collect()
    } else {
        rho.to_vec()
    }
}

fn cq_fit(
    ctx: &QContext,
    cfg: &RunConfig,
    p: &[f64],
    rho: &[f64],
    threshold: f64,
) -> qplane::Result<CqEstimate> {
    // ε only matters when some p sits on a pole of the spectral sum.
    let mut eps = 0.0;
    for &pp in p {
        let params = GreenParams::new(ctx, pp, 0.0)?;
        if params.on_lattice || params.resonant(ctx) {
            eps = cfg.epsilon;
        }
    }
    estimate_c_q(ctx, p, rho, &spectral_window(ctx, eps)?, threshold)
}

fn cq_table(est: &CqEstimate, threshold: f64) -> Table {
    let mut table = Table::new(
        "estimate-cq",
        vec![
            "p",
            "rho",
            "spectral_re",
            "spectral_im",
            "model_re",
            "model_im",
            "residual",
        ],
    );
    for pt in &est.points {
        let model = pt.model_at_zero + est.c_q * pt.slope;
        table.push(vec![
            pt.p.into(),
            pt.rho.into(),
            pt.spectral.re.into(),
            pt.spectral.im.into(),
            model.re.into(),
            model.im.into(),
            pt.residual.into(),
        ]);
    }
    table.note("c_q_estimate", est.c_q);
    table.note("relative_residual", est.relative_residual);
    table.note("threshold", threshold);
    table.note("condition_number", est.condition_number);
    table.note("doubled_window_c_q", est.doubled_window_c_q);
    table.note("window_shift", est.window_shift);
    for &(p, c) in &est.per_p {
        table.note(format!("c_q(p={p})"), c);
    }
    let (c_re, r_re) = real_part_fit(&est.points);
    table.note("real_part_c_q", c_re);
    table.note("real_part_relative_residual", r_re);
    table
}

pub fn estimate_cq(
    cfg: &RunConfig,
    p: &[f64],
    rho: &[f64],
    rho_index: &[i64],
    threshold: f64,
) -> Result<Outcome, CliError> {
    if p.is_empty() {
        return Err(CliError::Usage("--p needs at least one value".into()));
    }
    let ctx = cfg.context()?;
    let grid = cq_rho_grid(&ctx, rho, rho_index);
    match cq_fit(&ctx, cfg, p, &grid, threshold) {
        Ok(est) => Ok(Outcome {
            table: cq_table(&est, threshold),
            ok: true,
        }),
        Err(QError::Calibration { report, .. }) => Ok(Outcome {
            table: cq_table(&report, threshold),
            ok: false,
        }),
        Err(e @ (QError::InvalidParameter(_) | QError::Domain(_))) => {
            Err(CliError::Usage(e.to_string()))
        }
        Err(e) => Err(e.into()),
    }
}

/// The same fit for each `q` of a schedule, one row per `q`.
pub fn estimate_cq_schedule(
    cfg: &RunConfig,
    qs: &[f64],
    p: &[f64],
    rho: &[f64],
    rho_index: &[i64],
    threshold: f64,
    timings: bool,
) -> Result<Outcome, CliError> {
    let mut columns = vec![
        "q",
        "c_q",
        "relative_residual",
        "window_shift",
        "real_part_c_q",
        "error",
    ];
    if timings {
        columns.push("wall_time");
    }
    let mut table = Table::new("estimate-cq", columns);
    let mut ok = true;
    for &q in qs {
        let run = RunConfig { q, ..cfg.clone() };
        run.validate()?;
        let ctx = run.context()?;
        let start = Instant::now();
        let grid = cq_rho_grid(&ctx, rho, rho_index);
        let est = match cq_fit(&ctx, &run, p, &grid, threshold) {
            Ok(e) => Ok(e),
            Err(QError::Calibration { report, .. }) => {
                ok = false;
                Ok(*report)
            }
            Err(e) => Err(e),
        };
        let mut row: Vec<Cell> = match est {
            Ok(e) => vec![
                q.into(),
                e.c_q.into(),
                e.relative_residual.into(),
                e.window_shift.into(),
                real_part_fit(&e.points).0.into(),
                Cell::Empty,
            ],
            Err(e) => {
                ok = false;
                vec![
                    q.into(),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    e.to_string().into(),
                ]
            }
        };
        if timings {
            row.push(start.elapsed().as_secs_f64().into());
        }
        table.push(row);
    }
    table.note("threshold", threshold);
    table.note("pass", ok);
    Ok(Outcome { table, ok })
}
