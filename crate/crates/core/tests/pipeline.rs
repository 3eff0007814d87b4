//! Cross-module consistency: the same quantity computed along different
//! paths through the crate.

use num_complex::Complex64;
use tml_core::characters::{all_twisted_sums, CharacterIndex};
use tml_core::hecke::HeckeTable;
use tml_core::moments::{growth_scan, moment, XRule};
use tml_core::mollifier::MollifierSchedule;
use tml_core::primes::sieve;
use tml_core::steinhaus::{d_ml, r_total, sample, DCoefficients};

#[test]
fn moment_at_k_one_is_the_diagonal_minus_the_principal_term() {
    let t = HeckeTable::build(200).unwrap();
    let idx = CharacterIndex::new(10_007).unwrap();
    let r = moment(&idx, &t, 100, 1.0).unwrap();
    let diag: f64 = (1..=100).map(|n| t.lambda(n).powi(2)).sum();
    assert!(((r.s_k + r.principal_square) / 10_006.0 - diag).abs() < 1e-9 * diag);
}

#[test]
fn growth_scan_rows_match_single_moments() {
    let t = HeckeTable::build(200).unwrap();
    let q = [1009u64, 2003, 4001];
    let scan = growth_scan(&q, 2.0, XRule::Sqrt, &t).unwrap();
    for row in &scan.rows {
        let single = moment(&CharacterIndex::new(row.q).unwrap(), &t, row.x, 2.0).unwrap();
        assert_eq!(row.s_k, single.s_k);
    }
    assert_eq!(scan.reference_slope, 1.0);
}

#[test]
fn character_and_steinhaus_evaluations_share_the_d_polynomial() {
    // A character and a Steinhaus sample are both unit-modulus completely
    // multiplicative evaluators; D evaluated through either path must agree
    // with the sparse all-characters transform.
    let t = HeckeTable::build(3000).unwrap();
    let list = sieve(3000).unwrap();
    let s = MollifierSchedule::from_parts(60.0, 2.0, &[7.0, 50.0], &[2, 2]).unwrap();
    let idx = CharacterIndex::new(10_007).unwrap();
    let co = DCoefficients::for_block(&t, &list, &s, 2, 1).unwrap();
    let mut terms = Vec::new();
    for ((&p, &c1), &c2) in co.primes.iter().zip(&co.c1).zip(&co.c2) {
        terms.push((p, c1));
        terms.push((p * p, c2));
    }
    let all = tml_core::characters::twisted_sums_sparse(&idx, &terms);
    for a in [0u64, 3, 777, 10_005] {
        let direct = d_ml(&idx.character(a), &t, &list, &s, 2, 1).unwrap();
        assert!((direct - all.values[a as usize]).norm() < 1e-12);
    }
    let f = sample(&list, 50.0, 9, 0).unwrap();
    let phases: Vec<Complex64> = co.primes.iter().map(|&p| f.phase(p).unwrap()).collect();
    assert!((co.eval_phases(&phases) - d_ml(&f, &t, &list, &s, 2, 1).unwrap()).norm() < 1e-14);
    assert!(r_total(&f, &t, &list, &s).unwrap() >= 0.0);
}

#[test]
fn principal_character_sum_is_the_plain_sum() {
    let t = HeckeTable::build(500).unwrap();
    let idx = CharacterIndex::new(1009).unwrap();
    let c = t.coefficients(500);
    let sums = all_twisted_sums(&idx, &c).unwrap();
    let plain: f64 = c.iter().sum();
    assert!((sums.values[0] - Complex64::new(plain, 0.0)).norm() < 1e-10);
}
