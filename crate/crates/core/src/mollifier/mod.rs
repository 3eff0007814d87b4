//! The parameter apparatus of the mollified lower bound: the subdivision
//! 1 = y₀ < y₁ < … < y_M = y of [1, y], the truncation exponents J_m, the
//! length constraints, the prime masses A_m and the majorant U_{m,l}.
//!
//! Every schedule carries a [`Mode`]. The faithful constants (J_M ≥
//! exp(10⁴k²), exponents 10⁴k) are far beyond any computation, so desk mode
//! replaces them by configurable surrogates while keeping every structural
//! relation intact. Schedules are stored in log scale, which lets x be given
//! as large as f64 allows without overflow.

pub mod majorant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::PrimeList;

pub use majorant::{
    case_boundary_ratio, interval_decay_audit, interval_index, lemma_majorization_audit, u_ml,
    zerocase_audit, DecayReport, MajorantCase, MajorantParams, MajorizationAudit, ZerocaseReport,
};

/// Ratio between consecutive subdivision exponents: y_{m-1} = y_m^{1/20}.
pub const SUBDIVISION_RATIO: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    PaperFaithful,
    Desk,
}

/// Surrogates used in desk mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeskConfig {
    /// J_M = max(1, round(C0 / (jm_divisor · k))), replacing 10⁵.
    pub jm_divisor: f64,
    /// Replaces 10⁴ in ∏ y_m^{10⁴ k J_m} < x.
    pub length_factor: f64,
    /// Replaces 10⁴ in 10⁴ (k-1)² A_m ≤ J_m.
    pub estaj_factor: f64,
}

impl Default for DeskConfig {
    fn default() -> Self {
        DeskConfig { jm_divisor: 1.0, length_factor: 1.0, estaj_factor: 1.0 }
    }
}

/// Constants of the faithful schedule.
pub const PAPER_JM_DIVISOR: f64 = 1e5;
pub const PAPER_LENGTH_FACTOR: f64 = 1e4;
pub const PAPER_ESTAJ_FACTOR: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifierSchedule {
    pub mode: Mode,
    pub log_x: f64,
    pub k: f64,
    pub c0: f64,
    /// log y = log x / C0.
    pub log_y: f64,
    pub m_count: usize,
    /// log y_m for m = 1..=M (index m-1).
    pub log_y_m: Vec<f64>,
    /// J_m for m = 1..=M (index m-1).
    pub j_m: Vec<u32>,
    pub desk: Option<DeskConfig>,
    /// J_M ≥ exp(10⁴k²) fails (always, at any computable size).
    pub jm_infeasible: bool,
    /// J₁ < J₂: the two exponent rules disagree in order for this y.
    pub j_order_flag: bool,
}

/// Index M: the unique integer with 20^{M-1} ∈ [L², 20 L²], L = loglog y.
/// At L² an exact power of 20 both ends qualify and the smaller M is taken.
fn subdivision_count(loglog_y: f64) -> Result<usize> {
    let l2 = loglog_y * loglog_y;
    if !(loglog_y > 0.0) || l2 < 1.0 / SUBDIVISION_RATIO {
        return Err(Error::domain(format!(
            "loglog y = {loglog_y:.4} admits no subdivision (need loglog y ≥ 20^(-1/2)); increase x or lower C0"
        )));
    }
    let e = (l2.ln() / SUBDIVISION_RATIO.ln()).ceil().max(0.0);
    Ok(e as usize + 1)
}

pub fn build_schedule(x: f64, k: f64, c0: f64, mode: Mode, desk: DeskConfig) -> Result<MollifierSchedule> {
    if !(x.is_finite() && x >= 16.0) {
        return Err(Error::domain(format!("x = {x} must be a finite number ≥ 16")));
    }
    build_schedule_log(x.ln(), k, c0, mode, desk)
}

/// As [`build_schedule`] with log x supplied directly.
pub fn build_schedule_log(log_x: f64, k: f64, c0: f64, mode: Mode, desk: DeskConfig) -> Result<MollifierSchedule> {
    if !(log_x.is_finite() && log_x >= 16f64.ln()) {
        return Err(Error::domain(format!("log x = {log_x} must be ≥ log 16")));
    }
    if !(k.is_finite() && k >= 2.0) {
        return Err(Error::domain(format!("k = {k} must be ≥ 2")));
    }
    if !(c0.is_finite() && c0 > 1.0) {
        return Err(Error::domain(format!("C0 = {c0} must exceed 1")));
    }
    let log_y = log_x / c0;
    let loglog_y = log_y.ln();
    let m_count = subdivision_count(loglog_y)?;
    let log_y_m: Vec<f64> =
        (1..=m_count).map(|m| log_y / SUBDIVISION_RATIO.powi((m_count - m) as i32)).collect();

    let divisor = match mode {
        Mode::PaperFaithful => PAPER_JM_DIVISOR,
        Mode::Desk => desk.jm_divisor,
    };
    let j_last = (c0 / (divisor * k)).round().max(1.0) as u32;
    let j_first = loglog_y.powf(1.5).round().max(1.0) as u32;
    let j_m: Vec<u32> = (1..=m_count)
        .map(|m| {
            if m == 1 {
                j_first
            } else if m == m_count {
                j_last
            } else {
                j_last + (m_count - m) as u32
            }
        })
        .collect();
    // J_M ≥ exp(10⁴ k²) in log form.
    let jm_infeasible = (j_last as f64).ln() < 1e4 * k * k;
    let j_order_flag = m_count >= 2 && j_m[0] < j_m[1];
    Ok(MollifierSchedule {
        mode,
        log_x,
        k,
        c0,
        log_y,
        m_count,
        log_y_m,
        j_m,
        desk: (mode == Mode::Desk).then_some(desk),
        jm_infeasible,
        j_order_flag,
    })
}

impl MollifierSchedule {
    /// A hand-made desk schedule: arbitrary ascending y_m and exponents.
    /// Used for the tiny polynomials of the orthogonality transfer.
    pub fn from_parts(log_x: f64, k: f64, y_m: &[f64], j_m: &[u32]) -> Result<Self> {
        if y_m.is_empty() || y_m.len() != j_m.len() {
            return Err(Error::domain("need matching, non-empty y_m and J_m"));
        }
        if y_m[0] <= 1.0 || y_m.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain("y_m must be ascending and exceed 1"));
        }
        let log_y = y_m.last().unwrap().ln();
        Ok(MollifierSchedule {
            mode: Mode::Desk,
            log_x,
            k,
            c0: log_x / log_y,
            log_y,
            m_count: y_m.len(),
            log_y_m: y_m.iter().map(|y| y.ln()).collect(),
            j_m: j_m.to_vec(),
            desk: Some(DeskConfig::default()),
            jm_infeasible: true,
            j_order_flag: j_m.len() >= 2 && j_m[0] < j_m[1],
        })
    }

    pub fn y(&self) -> f64 {
        self.log_y.exp()
    }

    /// y_m for 0 ≤ m ≤ M, with y₀ = 1.
    pub fn y_at(&self, m: usize) -> f64 {
        if m == 0 {
            1.0
        } else {
            self.log_y_m[m - 1].exp()
        }
    }

    pub fn j(&self, m: usize) -> u32 {
        self.j_m[m - 1]
    }

    /// The interval I_m = (y_{m-1}, y_m].
    pub fn interval(&self, m: usize) -> Result<(f64, f64)> {
        self.check_m(m)?;
        Ok((self.y_at(m - 1), self.y_at(m)))
    }

    pub fn check_m(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.m_count {
            return Err(Error::domain(format!("m = {m} outside 1..={}", self.m_count)));
        }
        Ok(())
    }

    /// Integer shifts l with |l| ≤ (log y)/2.
    pub fn shifts(&self) -> Vec<i64> {
        let bound = (self.log_y / 2.0).floor() as i64;
        (-bound..=bound).collect()
    }

    pub fn check_l(&self, l: i64) -> Result<()> {
        if (l.unsigned_abs() as f64) > self.log_y / 2.0 {
            return Err(Error::domain(format!("|l| = {} exceeds (log y)/2 = {:.3}", l.abs(), self.log_y / 2.0)));
        }
        Ok(())
    }

    /// a_m = 2⌈200 k J_m⌉.
    pub fn a(&self, m: usize) -> u64 {
        2 * (200.0 * self.k * self.j(m) as f64).ceil() as u64
    }

    fn length_factor(&self) -> f64 {
        match (self.mode, self.desk) {
            (Mode::Desk, Some(d)) => d.length_factor,
            _ => PAPER_LENGTH_FACTOR,
        }
    }

    fn estaj_factor(&self) -> f64 {
        match (self.mode, self.desk) {
            (Mode::Desk, Some(d)) => d.estaj_factor,
            _ => PAPER_ESTAJ_FACTOR,
        }
    }
}

/// Which length condition to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthConstraint {
    /// ∏ y_m^{c k J_m} < x, with c = 10⁴ (faithful) or the desk factor.
    ShortPolynomial,
    /// ∏ y_m^{e_m} < q with e_m = 8J_m + 2a_m, optionally capped at `cap`.
    MajorantPolynomial { log_q: f64, cap: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthCheck {
    pub constraint: LengthConstraint,
    pub holds: bool,
    /// log(bound) - Σ e_m log y_m; positive when the constraint holds.
    pub margin: f64,
    pub mode: Mode,
}

pub fn check_length_constraint(s: &MollifierSchedule, constraint: LengthConstraint) -> LengthCheck {
    let (bound, used): (f64, f64) = match constraint {
        LengthConstraint::ShortPolynomial => {
            let c = s.length_factor();
            (s.log_x, (1..=s.m_count).map(|m| c * s.k * s.j(m) as f64 * s.log_y_m[m - 1]).sum())
        }
        LengthConstraint::MajorantPolynomial { log_q, cap } => (
            log_q,
            (1..=s.m_count)
                .map(|m| {
                    let e = 8.0 * s.j(m) as f64 + 2.0 * s.a(m) as f64;
                    cap.map_or(e, |c| e.min(c)) * s.log_y_m[m - 1]
                })
                .sum(),
        ),
    };
    let margin = bound - used;
    LengthCheck { constraint, holds: margin > 0.0, margin, mode: s.mode }
}

/// A_m = 4 Σ_{p ∈ I_m} (2/p + 3/p²), summed exactly over the primes.
pub fn a_m(s: &MollifierSchedule, m: usize, primes: &PrimeList) -> Result<f64> {
    let (lo, hi) = s.interval(m)?;
    if (primes.bound() as f64) < hi.floor() {
        return Err(Error::precondition(format!("prime list to {} does not reach y_{m} = {hi:.1}", primes.bound())));
    }
    let terms: Vec<f64> = primes
        .in_interval(lo, hi)
        .iter()
        .map(|&p| {
            let p = p as f64;
            2.0 / p + 3.0 / (p * p)
        })
        .collect();
    Ok(4.0 * crate::numeric::pairwise_sum(&terms))
}

/// The bound A_m ≤ 40 (m ≥ 2) or A₁ ≤ 12 loglog y.
pub fn a_m_bound(s: &MollifierSchedule, m: usize) -> f64 {
    if m >= 2 {
        40.0
    } else {
        12.0 * s.log_y.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstAjRow {
    pub m: usize,
    pub a_m: f64,
    pub a_m_bound: f64,
    pub a_m_within_bound: bool,
    /// c (k-1)² A_m with c = 10⁴ or the desk factor.
    pub lhs: f64,
    pub j_m: u32,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstAjReport {
    pub mode: Mode,
    pub rows: Vec<EstAjRow>,
    /// Every row satisfies c (k-1)² A_m ≤ J_m.
    pub all_hold: bool,
    /// Faithful mode demands `all_hold`; desk mode only reports.
    pub fatal: bool,
}

pub fn check_estaj(s: &MollifierSchedule, primes: &PrimeList) -> Result<EstAjReport> {
    let c = s.estaj_factor();
    let rows = (1..=s.m_count)
        .map(|m| {
            let a = a_m(s, m, primes)?;
            let bound = a_m_bound(s, m);
            let lhs = c * (s.k - 1.0).powi(2) * a;
            Ok(EstAjRow {
                m,
                a_m: a,
                a_m_bound: bound,
                a_m_within_bound: a <= bound,
                lhs,
                j_m: s.j(m),
                holds: lhs <= s.j(m) as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_hold = rows.iter().all(|r| r.holds);
    Ok(EstAjReport { mode: s.mode, fatal: s.mode == Mode::PaperFaithful && !all_hold, all_hold, rows })
}
