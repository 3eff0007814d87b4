//! One function per subcommand. Each builds what it needs, writes its
//! artifact and turns a failed tolerance into [`CliError::Audit`].

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use tml_core::characters::CharacterIndex;
use tml_core::hecke::{
    deligne_excess, lambda_square_identity_check, multiplicativity_residual, prime_power_residuals, HeckeTable,
    IdentityResidual,
};
use tml_core::mollifier::{
    build_schedule, build_schedule_log, check_estaj, check_length_constraint, lemma_majorization_audit, DeskConfig,
    EstAjReport, LengthCheck, LengthConstraint, MajorizationAudit, Mode, MollifierSchedule,
};
use tml_core::moments::{geometric_primes, growth_scan, isqrt, GrowthScan, XRule};
use tml_core::primes::{prime_sum_report, sieve, Constants, PrimeSumReport, PrimeWeight};
use tml_core::steinhaus::{
    euler_battery_cases, euler_product_battery, even_moment_battery, even_moment_check, orthogonality_transfer_check,
    parseval_check, EulerBatteryRow, EvenMomentReport, ParsevalReport, TransferReport,
};

use crate::output::{csv_bytes, emit, json_bytes, write_atomic, Cell, Envelope, Provenance};
use crate::plot::{read_points, render_svg, PlotSpec};
use crate::{
    Cli, CliError, Command, HeckeArgs, Lemma, ModeArg, MollifierArgs, MomentsArgs, PlotArgs, PrimesArgs, RmfArgs,
    TransferArgs, XRuleArg,
};

/// Absolute tolerance on exact coefficient identities.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Bound on the measured constant in R^{1/(k-1)} ≤ (1 + c e^{-J}) U.
pub const MAJORIZATION_C: f64 = 10.0;
/// Bound on the measured constant of the even-moment inequality.
pub const EVEN_MOMENT_C: f64 = 2.0;
pub const PARSEVAL_TOL: f64 = 0.01;

type Res<T> = Result<T, CliError>;

pub fn dispatch(cli: &Cli) -> Res<()> {
    let cache = cli.hecke_cache.as_deref();
    match &cli.command {
        Command::Hecke(a) => hecke(a, cache),
        Command::Primes(a) => primes(a, cache),
        Command::Moments(a) => moments(a, cache),
        Command::RmfVerify(a) => rmf_verify(a, cache),
        Command::MollifierCheck(a) => mollifier_check(a),
        Command::TransferCheck(a) => transfer_check(a, cache),
        Command::Plot(a) => plot(a),
    }
}

fn validate(ok: bool, msg: impl FnOnce() -> String) -> Res<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Validation(msg()))
    }
}

fn table(limit: usize, cache: Option<&Path>) -> Res<HeckeTable> {
    Ok(HeckeTable::load_or_build(limit, cache)?)
}

/// Write the envelope, then fail with `what` when `pass` is false.
fn finish<T: Serialize>(out: Option<&Path>, provenance: Provenance, pass: bool, report: T, what: &str) -> Res<()> {
    emit(out, &json_bytes(&Envelope { provenance, pass, report })?)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Audit(what.to_string()))
    }
}

/// `count` coprime pairs (m, n), m, n ≥ 2, mn ≤ max_product.
pub fn random_coprime_pairs(count: usize, max_product: u64, seed: u64) -> Vec<(u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = isqrt(max_product).max(2);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let m = rng.gen_range(2..=top);
        let n = rng.gen_range(2..=(max_product / m).max(2));
        if gcd(m, n) == 1 && m * n <= max_product {
            out.push((m, n));
        }
    }
    out
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Debug, Serialize)]
pub struct HeckeReport {
    pub prime_square_identity: IdentityResidual,
    pub multiplicativity: IdentityResidual,
    pub deligne_excess: IdentityResidual,
    pub prime_power_recursion: IdentityResidual,
    pub satake_closure: IdentityResidual,
    pub tolerance: f64,
}

impl HeckeReport {
    pub fn pass(&self) -> bool {
        [&self.prime_square_identity, &self.multiplicativity, &self.deligne_excess, &self.prime_power_recursion, &self.satake_closure]
            .iter()
            .all(|r| r.max_residual <= self.tolerance)
    }
}

pub fn hecke_report(t: &HeckeTable, deligne_bound: u64, pairs: usize, seed: u64) -> Res<HeckeReport> {
    let limit = t.limit() as u64;
    let (recursion, closure) = prime_power_residuals(t)?;
    Ok(HeckeReport {
        prime_square_identity: lambda_square_identity_check(t, isqrt(limit))?,
        multiplicativity: multiplicativity_residual(t, &random_coprime_pairs(pairs, limit, seed)),
        deligne_excess: deligne_excess(t, deligne_bound),
        prime_power_recursion: recursion,
        satake_closure: closure,
        tolerance: IDENTITY_TOL,
    })
}

fn hecke(a: &HeckeArgs, cache: Option<&Path>) -> Res<()> {
    validate(a.limit >= 16, || format!("--limit must be ≥ 16, got {}", a.limit))?;
    validate(a.deligne_bound as usize <= a.limit, || "--deligne-bound exceeds --limit".into())?;
    let t = table(a.limit, cache)?;
    let report = hecke_report(&t, a.deligne_bound, a.pairs, a.seed)?;
    let params = json!({"limit": a.limit, "deligne_bound": a.deligne_bound, "pairs": a.pairs});
    let pass = report.pass();
    finish(a.out.as_deref(), Provenance::new("exact", Some(a.seed), params), pass, report, "a coefficient identity exceeds 1e-9")
}

#[derive(Debug, Serialize)]
pub struct PrimesRow {
    pub weight: PrimeWeight,
    pub constant: f64,
    pub sum: PrimeSumReport,
    pub scaled_residual: f64,
}

pub fn prime_rows(xs: &[f64], constants: &Constants, cache: Option<&Path>) -> Res<Vec<PrimesRow>> {
    for &x in xs {
        validate(x >= 2.0 && x <= 1e9, || format!("x = {x} outside [2, 1e9]"))?;
    }
    let top = xs.iter().cloned().fold(2.0, f64::max).floor() as u64;
    let list = sieve(top)?;
    let t = table(top as usize, cache)?;
    let mut rows = Vec::new();
    for &x in xs {
        for (weight, c) in [(PrimeWeight::One, constants.b1.value), (PrimeWeight::LambdaSquared, constants.b2.value)] {
            let sum = prime_sum_report(&list, Some(&t), weight, x, c)?;
            rows.push(PrimesRow { weight, constant: c, scaled_residual: sum.scaled_residual(), sum });
        }
    }
    Ok(rows)
}

fn primes(a: &PrimesArgs, cache: Option<&Path>) -> Res<()> {
    let constants = match &a.constants {
        Some(p) => Constants::load(p)?,
        None => Constants::bundled(),
    };
    let rows = prime_rows(&a.x, &constants, cache)?;
    let pass = rows.iter().all(|r| r.scaled_residual <= a.c_max);
    let params = json!({"x": a.x, "c_max": a.c_max, "constants": constants});
    finish(a.out.as_deref(), Provenance::new("exact", None, params), pass, rows, "a prime-sum residual exceeds C/log x")
}

pub fn moment_q_list(lo: u64, hi: u64, count: Option<usize>) -> Res<Vec<u64>> {
    let q: Vec<u64> = match count {
        Some(0) => return Err(CliError::Validation("--count must be positive".into())),
        Some(c) => geometric_primes(lo, hi, c),
        None => sieve(hi)?.primes().iter().copied().filter(|&p| p >= lo).collect(),
    };
    validate(!q.is_empty(), || format!("no primes in [{lo}, {hi}]"))?;
    Ok(q)
}

pub const MOMENT_COLUMNS: [&str; 11] =
    ["q", "x", "k", "s_k", "normalized", "log_ratio", "loglog_q", "s_1", "diagonal_residual", "beyond_sqrt_q", "runtime_ms"];

pub fn moments_csv(scan: &GrowthScan, timing: bool) -> Res<Vec<u8>> {
    let rows: Vec<Vec<Cell>> = scan
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![
                Cell::Int(r.q as i64),
                Cell::Int(r.x as i64),
                Cell::Float(r.k),
                Cell::Float(r.s_k),
                Cell::Float(r.normalized),
                Cell::Float(r.log_ratio),
                Cell::Float(r.loglog_q),
                Cell::Float(r.s_1),
                Cell::Float(r.diagonal_residual),
                Cell::Bool(r.beyond_sqrt_q),
            ];
            if timing {
                row.push(Cell::Float(r.runtime_ms));
            }
            row
        })
        .collect();
    let n = if timing { MOMENT_COLUMNS.len() } else { MOMENT_COLUMNS.len() - 1 };
    csv_bytes(&MOMENT_COLUMNS[..n], &rows)
}

/// Positivity of the normalized moments and the k = 1 diagonal identity.
pub fn scan_passes(scan: &GrowthScan) -> bool {
    scan.rows.iter().all(|r| r.normalized > 0.0 && r.diagonal_residual < IDENTITY_TOL)
}

fn moments(a: &MomentsArgs, cache: Option<&Path>) -> Res<()> {
    let (lo, hi) = a.q_range;
    let q = moment_q_list(lo, hi, a.count)?;
    let rule = match a.x_rule {
        XRuleArg::Sqrt => XRule::Sqrt,
        XRuleArg::Fixed(x) => XRule::Fixed(x),
    };
    let x_max = q.iter().map(|&q| rule.length(q)).max().unwrap_or(1);
    let t = table((x_max as usize).max(16), cache)?;
    let scan = growth_scan(&q, a.k, rule, &t)?;
    emit(a.out.as_deref(), &moments_csv(&scan, !a.no_timing)?)?;
    let pass = scan_passes(&scan);
    if let Some(path) = &a.summary {
        let params = json!({"q_range": [lo, hi], "k": a.k, "x_rule": rule, "count": a.count});
        let summary = json!({
            "k": scan.k,
            "fit": scan.fit,
            "slope_ci95": scan.slope_ci95,
            "reference_slope": scan.reference_slope,
            "moduli": scan.rows.len(),
            "max_diagonal_residual": scan.rows.iter().map(|r| r.diagonal_residual).fold(0.0, f64::max),
        });
        write_atomic(path, &json_bytes(&Envelope { provenance: Provenance::new("exact", None, params), pass, report: summary })?)?;
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Audit("a normalized moment is not positive or the diagonal identity fails".into()))
    }
}

#[derive(Debug, Serialize)]
pub struct EvenMomentSummary {
    pub rows: Vec<EvenMomentReport>,
    /// max over cases of MC / bound.
    pub measured_constant: f64,
    pub measured_constant_std_error: f64,
    pub max_exact_ratio: f64,
    pub limit: f64,
}

pub fn even_moment_summary(cases: usize, max_j: u32, samples: usize, seed: u64) -> Res<EvenMomentSummary> {
    let list = sieve(1000)?;
    let rows = even_moment_battery(cases, max_j, seed)
        .iter()
        .enumerate()
        .map(|(i, c)| even_moment_check(&list, c, samples, seed.wrapping_add(i as u64 + 1)))
        .collect::<tml_core::Result<Vec<_>>>()?;
    let worst = rows.iter().max_by(|a, b| a.ratio_mc.total_cmp(&b.ratio_mc));
    Ok(EvenMomentSummary {
        measured_constant: worst.map_or(0.0, |r| r.ratio_mc),
        measured_constant_std_error: worst.map_or(0.0, |r| r.ratio_mc_std_error),
        max_exact_ratio: rows.iter().map(|r| r.ratio_exact).fold(0.0, f64::max),
        limit: EVEN_MOMENT_C,
        rows,
    })
}

#[derive(Debug, Serialize)]
pub struct ParsevalCase {
    pub name: &'static str,
    pub report: ParsevalReport,
}

pub fn parseval_battery(t: &HeckeTable) -> Res<Vec<ParsevalCase>> {
    let one = Complex64::new(1.0, 0.0);
    let cases: [(&'static str, Vec<(u64, Complex64)>, f64, f64); 3] = [
        ("delta", vec![(1, one)], 0.5, 2000.0),
        ("telescoping", vec![(1, one), (2, -one)], 0.3, 1000.0),
        ("hecke_50", (1..=50).map(|n| (n, Complex64::new(t.lambda(n), 0.0))).collect(), 0.3, 1000.0),
    ];
    cases
        .into_iter()
        .map(|(name, c, sigma, t_max)| {
            let x_max = c.last().map_or(1, |&(n, _)| n) as f64;
            Ok(ParsevalCase { name, report: parseval_check(&c, sigma, x_max.max(10.0), t_max)? })
        })
        .collect()
}

pub fn euler_rows(y: f64, samples: usize, seed: u64, cache: Option<&Path>) -> Res<Vec<EulerBatteryRow>> {
    validate((1000.0..=1e7).contains(&y), || format!("--y = {y} outside [1000, 1e7]"))?;
    let t = table(y as usize, cache)?;
    let list = sieve(y as u64)?;
    Ok(euler_product_battery(&t, &list, &euler_battery_cases(y), samples, seed)?)
}

fn rmf_verify(a: &RmfArgs, cache: Option<&Path>) -> Res<()> {
    let out = a.out.as_deref();
    match a.lemma {
        Lemma::EvenMoment => {
            let samples = a.samples.unwrap_or(10_000);
            validate(samples >= 2 && a.cases >= 1, || "need ≥ 2 samples and ≥ 1 case".into())?;
            let r = even_moment_summary(a.cases, a.max_j, samples, a.seed)?;
            let pass = r.measured_constant <= EVEN_MOMENT_C && r.max_exact_ratio <= EVEN_MOMENT_C;
            let params = json!({"lemma": "2.4", "samples": samples, "cases": a.cases, "max_j": a.max_j});
            finish(out, Provenance::new("monte_carlo", Some(a.seed), params), pass, r, "even-moment constant above 2")
        }
        Lemma::EulerProduct => {
            let samples = a.samples.unwrap_or(100_000);
            validate(samples >= 2, || "need ≥ 2 samples".into())?;
            let rows = euler_rows(a.y, samples, a.seed, cache)?;
            let pass = rows.iter().all(|r| r.closed_form_ok && r.mc_ok);
            let params = json!({"lemma": "2.5", "samples": samples, "y": a.y});
            finish(out, Provenance::new("monte_carlo", Some(a.seed), params), pass, rows, "Euler product battery outside tolerance")
        }
        Lemma::Parseval => {
            let rows = parseval_battery(&table(1000, cache)?)?;
            let pass = rows.iter().all(|r| r.report.relative_difference < PARSEVAL_TOL);
            let params = json!({"lemma": "2.6", "tolerance": PARSEVAL_TOL});
            finish(out, Provenance::new("quadrature", None, params), pass, rows, "Parseval sides differ by more than 1%")
        }
        Lemma::Transfer => transfer_check(
            &TransferArgs { q: 10_007, x: 10, y: 5.0, j: 1, k: 2.0, no_enforce: false, tolerance: 1e-8, out: a.out.clone() },
            cache,
        ),
    }
}

#[derive(Debug, Serialize)]
pub struct MollifierReport {
    pub schedule: MollifierSchedule,
    pub y: f64,
    pub short_polynomial: LengthCheck,
    /// With q = x².
    pub majorant_polynomial: LengthCheck,
    pub estaj: Option<EstAjReport>,
    pub prime_audits_skipped: bool,
    pub majorization: Vec<MajorizationAudit>,
}

impl MollifierReport {
    /// A_m within its bound, majorization constant below 10, case
    /// selection total. Length and J conditions are reported, not gated.
    pub fn pass(&self) -> bool {
        self.majorization.iter().all(|m| m.pass && m.cases_total)
            && self.estaj.as_ref().map_or(true, |e| e.rows.iter().all(|r| r.a_m_within_bound))
    }
}

pub fn mollifier_report(s: MollifierSchedule, draws: usize, seed: u64, sieve_limit: f64) -> Res<MollifierReport> {
    let y = s.y();
    let (estaj, skipped) = if y.is_finite() && y <= sieve_limit {
        (Some(check_estaj(&s, &sieve(y.floor() as u64)?)?), false)
    } else {
        (None, true)
    };
    let mut js = s.j_m.clone();
    js.sort_unstable();
    js.dedup();
    let majorization = js.iter().map(|&j| lemma_majorization_audit(s.k, j, draws, seed, MAJORIZATION_C)).collect();
    Ok(MollifierReport {
        short_polynomial: check_length_constraint(&s, LengthConstraint::ShortPolynomial),
        majorant_polynomial: check_length_constraint(&s, LengthConstraint::MajorantPolynomial { log_q: 2.0 * s.log_x, cap: None }),
        estaj,
        prime_audits_skipped: skipped,
        majorization,
        y,
        schedule: s,
    })
}

fn mollifier_check(a: &MollifierArgs) -> Res<()> {
    let mode = match a.mode {
        ModeArg::Desk => Mode::Desk,
        ModeArg::PaperFaithful => Mode::PaperFaithful,
    };
    let desk = DeskConfig { jm_divisor: a.jm_divisor, length_factor: a.length_factor, estaj_factor: a.estaj_factor };
    for (name, v) in [("jm-divisor", a.jm_divisor), ("length-factor", a.length_factor), ("estaj-factor", a.estaj_factor)] {
        validate(v > 0.0 && v.is_finite(), || format!("--{name} must be positive"))?;
    }
    validate(a.draws >= 1, || "--draws must be positive".into())?;
    let s = match (a.x, a.log_x) {
        (Some(x), _) => build_schedule(x, a.k, a.c0, mode, desk)?,
        (None, Some(l)) => build_schedule_log(l, a.k, a.c0, mode, desk)?,
        (None, None) => return Err(CliError::Validation("one of --x, --log-x is required".into())),
    };
    let report = mollifier_report(s, a.draws, a.seed, a.sieve_limit)?;
    let pass = report.pass();
    let params = json!({
        "x": a.x, "log_x": a.log_x, "k": a.k, "c0": a.c0, "desk": desk, "draws": a.draws, "sieve_limit": a.sieve_limit,
    });
    let mode_name = if mode == Mode::Desk { "desk" } else { "paper_faithful" };
    finish(a.out.as_deref(), Provenance::new(mode_name, Some(a.seed), params), pass, report, "a mollifier structural audit failed")
}

pub fn transfer_report(a: &TransferArgs, cache: Option<&Path>) -> Res<TransferReport> {
    validate(a.y >= 2.0 && a.y <= 1000.0, || format!("--y = {} outside [2, 1000]", a.y))?;
    validate(a.x >= 2, || "--x must be ≥ 2".into())?;
    let s = MollifierSchedule::from_parts((a.x as f64).ln(), a.k, &[a.y], &[a.j])?;
    let index = CharacterIndex::new(a.q)?;
    let limit = (a.x as usize).max((a.y * a.y) as usize).max(16);
    let t = table(limit, cache)?;
    let list = sieve(a.y as u64)?;
    Ok(orthogonality_transfer_check(&index, a.x, &s, &t, &list, !a.no_enforce)?)
}

fn transfer_check(a: &TransferArgs, cache: Option<&Path>) -> Res<()> {
    let r = transfer_report(a, cache)?;
    // Outside x·N < q a difference is the expected leakage, not a failure.
    let pass = !r.length_ok || r.relative_difference <= a.tolerance;
    let params = json!({"q": a.q, "x": a.x, "y": a.y, "j": a.j, "k": a.k, "enforce_length": !a.no_enforce, "tolerance": a.tolerance});
    finish(a.out.as_deref(), Provenance::new("exact", None, params), pass, r, "transfer sides differ beyond tolerance")
}

fn plot(a: &PlotArgs) -> Res<()> {
    validate(a.k.is_finite(), || "--k must be finite".into())?;
    let bytes = std::fs::read(&a.csv).map_err(|e| CliError::Validation(format!("{}: {e}", a.csv.display())))?;
    let spec = PlotSpec {
        x_column: a.x_col.clone(),
        y_column: a.y_col.clone(),
        k: a.k,
        title: format!("{} against {}, reference slope (k-1)^2", a.y_col, a.x_col),
    };
    let points = read_points(&bytes, &spec)?;
    write_atomic(&a.out, render_svg(&points, &spec).as_bytes())
}
