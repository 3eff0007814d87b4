//! The majorant U_{m,l} of R_{m,l}^{1/(k-1)} and its audits.
//!
//! [0, ∞) is split into I_0 = [0, J/(100k)] and the dyadic pieces
//! I_n = (J/(100k))·[2^{n-1}, 2^n]. A point on a shared endpoint is assigned
//! to the lower index. With W = inf I_n and a = 2⌈200kJ⌉:
//!
//! - n = 0: U = (Σ_{j ≤ J} (Re D)^j/j!)²,
//! - J/(100k) ≤ W ≤ 100kJ: U = e^{4W} |D/W|^a,
//! - W ≥ 100kJ: U = (2(k-1)^J (2W)^J / J!)^{2/(k-1)} |D/W|^a.
//!
//! The case is chosen from n first, so W = 0 never reaches a power case.
//! Values are handled in log scale because |D/W|^a overflows easily.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::hecke::HeckeTable;
use crate::numeric::{log_sum_exp, LinearFit, MeanEstimate};
use crate::primes::PrimeList;
use crate::quadrature::periodic_mean;
use crate::steinhaus::{sample_range, truncated_exp, DCoefficients};

use super::MollifierSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MajorantCase {
    Truncated,
    Middle,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajorantParams {
    pub m: usize,
    pub n_m: u32,
    /// inf I_{n_m}; zero for n_m = 0.
    pub w_m: f64,
    pub a_m: u64,
    pub j_m: u32,
    pub k: f64,
    pub case: MajorantCase,
}

/// J/(100k), the right end of I_0.
pub fn interval_base(k: f64, j: u32) -> f64 {
    j as f64 / (100.0 * k)
}

/// The n with v ∈ I_n, ties to the lower n.
pub fn interval_index(v: f64, k: f64, j: u32) -> u32 {
    let base = interval_base(k, j);
    if v <= base {
        return 0;
    }
    let mut n = 1;
    let mut hi = 2.0 * base;
    while v > hi {
        n += 1;
        hi *= 2.0;
    }
    n
}

impl MajorantParams {
    pub fn new(m: usize, n_m: u32, k: f64, j_m: u32) -> Self {
        let a_m = 2 * (200.0 * k * j_m as f64).ceil() as u64;
        let base = interval_base(k, j_m);
        let w_m = if n_m == 0 { 0.0 } else { base * 2f64.powi(n_m as i32 - 1) };
        let case = if n_m == 0 {
            MajorantCase::Truncated
        } else if w_m <= 100.0 * k * j_m as f64 {
            MajorantCase::Middle
        } else {
            MajorantCase::Power
        };
        MajorantParams { m, n_m, w_m, a_m, j_m, k, case }
    }

    pub fn from_schedule(s: &MollifierSchedule, m: usize, n_m: u32) -> Result<Self> {
        s.check_m(m)?;
        Ok(Self::new(m, n_m, s.k, s.j(m)))
    }

    /// Parameters of the interval containing |Re D|.
    pub fn for_value(m: usize, d: Complex64, k: f64, j_m: u32) -> Self {
        Self::new(m, interval_index(d.re.abs(), k, j_m), k, j_m)
    }
}

fn log_power_prefactor(k: f64, j: u32, w: f64) -> f64 {
    let jf = j as f64;
    2.0 / (k - 1.0) * (2f64.ln() + jf * (k - 1.0).ln() - ln_gamma(jf + 1.0) + jf * (2.0 * w).ln())
}

/// log U_{m,l}; -∞ when U = 0.
pub fn log_u_ml(p: &MajorantParams, d: Complex64) -> Result<f64> {
    match p.case {
        MajorantCase::Truncated => Ok(2.0 * truncated_exp(d.re, p.j_m).abs().ln()),
        case => {
            if p.w_m <= 0.0 {
                return Err(Error::domain("W_m = 0 in a power case"));
            }
            let power = p.a_m as f64 * (d.norm().ln() - p.w_m.ln());
            let pre = if case == MajorantCase::Middle { 4.0 * p.w_m } else { log_power_prefactor(p.k, p.j_m, p.w_m) };
            Ok(pre + power)
        }
    }
}

pub fn u_ml(p: &MajorantParams, d: Complex64) -> Result<f64> {
    log_u_ml(p, d).map(f64::exp)
}

/// log R^{1/(k-1)} = (2/(k-1)) log |Σ_{j ≤ J} ((k-1) Re D)^j / j!|.
pub fn log_r_root(d: Complex64, k: f64, j: u32) -> f64 {
    2.0 / (k - 1.0) * truncated_exp((k - 1.0) * d.re, j).abs().ln()
}

/// log(middle / power) at W = 100kJ, where both formulas apply; the two
/// cases are not claimed to agree there.
pub fn case_boundary_ratio(k: f64, j: u32) -> f64 {
    let w = 100.0 * k * j as f64;
    4.0 * w - log_power_prefactor(k, j, w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorizationAudit {
    pub k: f64,
    pub j: u32,
    pub draws: usize,
    /// Smallest c with R^{1/(k-1)} ≤ (1 + c e^{-J}) U on every draw.
    pub max_constant: f64,
    /// Draws per case: truncated, middle, power.
    pub case_counts: [usize; 3],
    /// Every draw landed in exactly one interval and one case.
    pub cases_total: bool,
    pub boundary_log_ratio: f64,
    pub pass: bool,
}

/// R^{1/(k-1)} ≤ (1 + c e^{-J}) U on random D: n uniform over enough
/// intervals to reach the power case, |Re D| uniform in I_n, Im D arbitrary.
pub fn lemma_majorization_audit(k: f64, j: u32, draws: usize, seed: u64, c_max: f64) -> MajorizationAudit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = interval_base(k, j);
    let n_max = interval_index(4.0 * 100.0 * k * j as f64, k, j);
    let mut max_constant = 0.0f64;
    let mut counts = [0usize; 3];
    let mut total = true;
    for _ in 0..draws {
        let n = rng.gen_range(0..=n_max);
        let (lo, hi) = if n == 0 { (0.0, base) } else { (base * 2f64.powi(n as i32 - 1), base * 2f64.powi(n as i32)) };
        let mut re = lo + (hi - lo) * rng.gen::<f64>();
        if n > 0 && re <= lo {
            re = hi;
        }
        let re = if rng.gen_bool(0.5) { -re } else { re };
        let im = (2.0 * re.abs() + 1.0) * (2.0 * rng.gen::<f64>() - 1.0);
        let d = Complex64::new(re, im);
        let p = MajorantParams::for_value(1, d, k, j);
        total &= p.n_m == interval_index(re.abs(), k, j);
        counts[p.case as usize] += 1;
        let lu = log_u_ml(&p, d).expect("case chosen from n");
        let diff = log_r_root(d, k, j) - lu;
        if diff > 0.0 {
            max_constant = max_constant.max(diff.exp_m1() * (j as f64).exp());
        }
    }
    MajorizationAudit {
        k,
        j,
        draws,
        max_constant,
        case_counts: counts,
        cases_total: total && counts.iter().sum::<usize>() == draws,
        boundary_log_ratio: case_boundary_ratio(k, j),
        pass: max_constant < c_max,
    }
}

fn block_draws(
    table: &HeckeTable,
    list: &PrimeList,
    s: &MollifierSchedule,
    m: usize,
    shifts: &[i64],
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<Complex64>>> {
    let coeffs: Vec<DCoefficients> =
        shifts.iter().map(|&l| DCoefficients::for_block(table, list, s, m, l)).collect::<Result<_>>()?;
    let (lo, hi) = s.interval(m)?;
    (0..samples as u64)
        .into_par_iter()
        .map(|d| {
            let f = sample_range(list, lo, hi, seed, d)?;
            Ok(coeffs.iter().map(|c| c.eval_phases(f.phases())).collect())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZerocaseReport {
    pub m: usize,
    pub l1: i64,
    pub l2: i64,
    pub j_m: u32,
    /// E |e^{2(k-1) Re D_{l₁} + 2 Re D_{l₂}} - R_{l₁} U_{l₂}| with U in its n = 0 form.
    pub estimate: MeanEstimate,
    pub bound: f64,
    /// mean / e^{-J}.
    pub measured_constant: f64,
    /// Rounding noise in e^{2(k-1) Re D_{l₁} + 2 Re D_{l₂}}, which dominates
    /// e^{-J} once J ≳ 35.
    pub rounding_floor: f64,
    /// Fraction of draws with |Re D_{l₂}| ∈ I_0.
    pub occupancy: f64,
    /// mean ≤ max(e^{-J}, rounding floor).
    pub pass: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn zerocase_audit(
    table: &HeckeTable,
    list: &PrimeList,
    s: &MollifierSchedule,
    m: usize,
    l1: i64,
    l2: i64,
    samples: usize,
    seed: u64,
) -> Result<ZerocaseReport> {
    let (k, j) = (s.k, s.j(m));
    let draws = block_draws(table, list, s, m, &[l1, l2], samples, seed)?;
    let p0 = MajorantParams::new(m, 0, k, j);
    let mut in_zero = 0usize;
    let mut lhs_sum = 0.0;
    let values: Vec<f64> = draws
        .iter()
        .map(|d| {
            if interval_index(d[1].re.abs(), k, j) == 0 {
                in_zero += 1;
            }
            let lhs = (2.0 * (k - 1.0) * d[0].re + 2.0 * d[1].re).exp();
            lhs_sum += lhs;
            let r = truncated_exp((k - 1.0) * d[0].re, j).powi(2);
            let u = u_ml(&p0, d[1]).expect("truncated case");
            (lhs - r * u).abs()
        })
        .collect();
    let estimate = MeanEstimate::from_values(&values);
    let bound = (-(j as f64)).exp();
    let rounding_floor = 64.0 * f64::EPSILON * lhs_sum / samples as f64;
    Ok(ZerocaseReport {
        m,
        l1,
        l2,
        j_m: j,
        estimate,
        bound,
        measured_constant: estimate.mean / bound,
        rounding_floor,
        occupancy: in_zero as f64 / samples as f64,
        pass: estimate.mean <= bound.max(rounding_floor),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub n: u32,
    pub w: f64,
    pub case: MajorantCase,
    /// log E R_{m,l₁} U_{m,l₂} with U in the form of interval n.
    pub log_mean: f64,
    pub relative_std_error: f64,
    /// Fraction of draws whose |Re D_{l₂}| lies in I_n.
    pub occupancy: f64,
    /// log (W + 1)^{-2}, the bound on E R U for n ≥ 1.
    pub log_reference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftRow {
    pub l1: i64,
    pub l2: i64,
    /// log E e^{2(k-1) Re D_{l₁} + 2 Re D_{l₂}} by Monte Carlo.
    pub log_mc: f64,
    pub mc_relative_std_error: f64,
    /// The same expectation by per-prime quadrature (exact up to quadrature error).
    pub log_exact: f64,
    /// Σ_p [(k-1)²λ² + λ² + 2(k-1)λ² cos((l₁-l₂) log p / log y)]/p over I_m.
    pub log_closed_form: f64,
    pub mc_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub m: usize,
    pub k: f64,
    pub j_m: u32,
    pub samples: usize,
    pub rows: Vec<DecayRow>,
    /// Fit of log_mean against log(W + 1) over n ≥ 1.
    pub w_fit: Option<LinearFit>,
    pub w_reference_slope: f64,
    pub shifts: Vec<ShiftRow>,
    /// Reference exponent of |l₁ - l₂| in the summed bound: -2(k-1).
    pub shift_reference_slope: f64,
    /// Envelope on |log_exact - log_closed_form|: k³ y_{m-1}^{-1/2} + k Σ p^{-3/2}.
    pub closed_form_envelope: f64,
}

fn log_mean_with_error(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let lm = log_sum_exp(v) - n.ln();
    if !lm.is_finite() {
        return (lm, f64::NAN);
    }
    let w: Vec<f64> = v.iter().map(|x| (x - lm).exp()).collect();
    let est = MeanEstimate::from_values(&w);
    (lm, est.std_error / est.mean)
}

#[allow(clippy::too_many_arguments)]
pub fn interval_decay_audit(
    table: &HeckeTable,
    list: &PrimeList,
    s: &MollifierSchedule,
    m: usize,
    l2: i64,
    n_max: u32,
    samples: usize,
    seed: u64,
) -> Result<DecayReport> {
    let (k, j) = (s.k, s.j(m));
    let shifts = s.shifts();
    s.check_l(l2)?;
    let l2_pos = shifts.iter().position(|&l| l == l2).expect("checked");
    let draws = block_draws(table, list, s, m, &shifts, samples, seed)?;

    let mut rows = Vec::new();
    for n in 0..=n_max {
        let p = MajorantParams::new(m, n, k, j);
        let vals: Vec<f64> = draws
            .iter()
            .map(|d| 2.0 * truncated_exp((k - 1.0) * d[l2_pos].re, j).abs().ln() + log_u_ml(&p, d[l2_pos]).expect("by n"))
            .collect();
        let (log_mean, relative_std_error) = log_mean_with_error(&vals);
        let occupancy =
            draws.iter().filter(|d| interval_index(d[l2_pos].re.abs(), k, j) == n).count() as f64 / samples as f64;
        rows.push(DecayRow {
            n,
            w: p.w_m,
            case: p.case,
            log_mean,
            relative_std_error,
            occupancy,
            log_reference: -2.0 * (p.w_m + 1.0).ln(),
        });
    }
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.n >= 1 && r.log_mean.is_finite()).map(|r| ((r.w + 1.0).ln(), r.log_mean)).collect();
    let w_fit = LinearFit::fit(&pts.iter().map(|p| p.0).collect::<Vec<_>>(), &pts.iter().map(|p| p.1).collect::<Vec<_>>());

    let (lo, hi) = s.interval(m)?;
    let primes = list.in_interval(lo, hi);
    let coeffs: Vec<DCoefficients> =
        shifts.iter().map(|&l| DCoefficients::for_block(table, list, s, m, l)).collect::<Result<_>>()?;
    let mut shift_rows = Vec::new();
    for (i1, &l1) in shifts.iter().enumerate() {
        let vals: Vec<f64> = draws.iter().map(|d| 2.0 * (k - 1.0) * d[i1].re + 2.0 * d[l2_pos].re).collect();
        let (log_mc, mc_relative_std_error) = log_mean_with_error(&vals);
        let mut log_exact = 0.0;
        for (i, &p) in primes.iter().enumerate() {
            let (a1, b1) = (coeffs[i1].c1[i], coeffs[i1].c2[i]);
            let (a2, b2) = (coeffs[l2_pos].c1[i], coeffs[l2_pos].c2[i]);
            let g = |t: f64| {
                let z = Complex64::from_polar(1.0, t);
                (2.0 * (k - 1.0) * (a1 * z + b1 * z * z).re + 2.0 * (a2 * z + b2 * z * z).re).exp()
            };
            let q = periodic_mean(g, 1e-14, 1 << 14)?;
            log_exact += q.value.ln();
            let _ = p;
        }
        let dl = (l1 - l2) as f64 / s.log_y;
        let log_closed_form: f64 = primes
            .iter()
            .map(|&p| {
                let (pf, l2v) = (p as f64, table.lambda(p).powi(2));
                ((k - 1.0).powi(2) * l2v + l2v + 2.0 * (k - 1.0) * l2v * (dl * pf.ln()).cos()) / pf
            })
            .sum();
        shift_rows.push(ShiftRow {
            l1,
            l2,
            log_mc,
            mc_relative_std_error,
            log_exact,
            log_closed_form,
            mc_z: (log_mc - log_exact).exp_m1().abs() / mc_relative_std_error,
        });
    }
    let envelope = k.powi(3) / lo.max(1.0).sqrt() + k * primes.iter().map(|&p| (p as f64).powf(-1.5)).sum::<f64>();
    Ok(DecayReport {
        m,
        k,
        j_m: j,
        samples,
        rows,
        w_fit,
        w_reference_slope: -2.0,
        shifts: shift_rows,
        shift_reference_slope: -2.0 * (k - 1.0),
        closed_form_envelope: envelope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::{build_schedule_log, DeskConfig, Mode};
    use crate::primes::sieve;
    use crate::steinhaus::r_from_d;

    #[test]
    fn intervals_partition_the_half_line() {
        let (k, j) = (2.0, 10);
        let b = interval_base(k, j);
        assert_eq!(interval_index(0.0, k, j), 0);
        assert_eq!(interval_index(b, k, j), 0);
        assert_eq!(interval_index(b * 1.0001, k, j), 1);
        assert_eq!(interval_index(2.0 * b, k, j), 1);
        assert_eq!(interval_index(8.0 * b, k, j), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let v: f64 = rng.gen::<f64>() * 1e4;
            let n = interval_index(v, k, j);
            let p = MajorantParams::new(1, n, k, j);
            if n == 0 {
                assert!(v <= b);
            } else {
                assert!(v > p.w_m && v <= 2.0 * p.w_m);
            }
        }
    }

    #[test]
    fn truncated_case_is_k_free() {
        let d = Complex64::new(0.03, 0.4);
        let j = 6;
        let p = MajorantParams::new(1, 0, 3.0, j);
        let s = truncated_exp(d.re, j);
        assert!((u_ml(&p, d).unwrap() - s * s).abs() < 1e-15);
        let k2 = MajorantParams::new(1, 0, 2.0, j);
        assert!((u_ml(&k2, d).unwrap() - r_from_d(d, 2.0, j)).abs() < 1e-15);
    }

    #[test]
    fn power_cases() {
        let p = MajorantParams::new(1, 3, 2.0, 10);
        assert_eq!(p.case, MajorantCase::Middle);
        assert_eq!(p.a_m, 2 * 4000);
        assert_eq!(u_ml(&p, Complex64::new(0.0, 0.0)).unwrap(), 0.0);
        let far = MajorantParams::new(1, 25, 2.0, 10);
        assert_eq!(far.case, MajorantCase::Power);
        assert!(far.w_m >= 100.0 * 2.0 * 10.0);
        let bad = MajorantParams { w_m: 0.0, ..p };
        assert!(log_u_ml(&bad, Complex64::new(1.0, 0.0)).is_err());
        assert!(case_boundary_ratio(2.0, 10).is_finite());
    }

    #[test]
    fn majorization_holds_on_random_draws() {
        for (k, j) in [(2.0, 5), (2.0, 20), (3.0, 10), (4.5, 8)] {
            let a = lemma_majorization_audit(k, j, 1000, 7, 10.0);
            assert!(a.pass && a.cases_total, "{a:?}");
            assert!(a.case_counts.iter().all(|&c| c > 0), "{a:?}");
        }
    }

    fn desk_schedule() -> MollifierSchedule {
        build_schedule_log(60.0, 2.0, 6.0, Mode::Desk, DeskConfig { jm_divisor: 0.1, ..DeskConfig::default() }).unwrap()
    }

    #[test]
    fn zerocase_is_tight() {
        let table = HeckeTable::build(30_000).unwrap();
        let list = sieve(30_000).unwrap();
        // A narrow block keeps (k-1)²A_m far below J.
        let s = MollifierSchedule::from_parts(60.0, 2.0, &[10_000.0, 10_200.0], &[40, 40]).unwrap();
        let r = zerocase_audit(&table, &list, &s, 2, 0, 0, 2000, 3).unwrap();
        assert!(r.estimate.mean < 1e-8 && r.pass, "{r:?}");
        let empty = MollifierSchedule::from_parts(60.0, 2.0, &[10_000.0, 10_005.0], &[3, 3]).unwrap();
        assert_eq!(zerocase_audit(&table, &list, &empty, 2, 0, 0, 10, 3).unwrap().estimate.mean, 0.0);
        let mut prev = f64::INFINITY;
        for j in [2, 4, 8] {
            let s = MollifierSchedule::from_parts(60.0, 2.0, &[10_000.0, 10_200.0], &[j, j]).unwrap();
            let r = zerocase_audit(&table, &list, &s, 2, 1, 0, 2000, 3).unwrap();
            assert!(r.estimate.mean < prev, "J = {j}: {r:?}");
            prev = r.estimate.mean;
        }
    }

    #[test]
    fn decay_in_w_and_shift_agreement() {
        let s = desk_schedule();
        let y = s.y();
        let table = HeckeTable::build(y as usize + 1).unwrap();
        let list = sieve(y as u64 + 1).unwrap();
        let m = s.m_count;
        let r = interval_decay_audit(&table, &list, &s, m, 0, 6, 4000, 9).unwrap();
        assert!(r.rows[0].log_mean.is_finite());
        let fit = r.w_fit.unwrap();
        assert!(fit.slope <= -1.0, "{fit:?}");
        for row in &r.shifts {
            assert!(row.mc_z < 4.0, "{row:?}");
            assert!((row.log_exact - row.log_closed_form).abs() <= row.log_exact.abs().max(1.0) * 0.5 + r.closed_form_envelope);
        }
    }
}
