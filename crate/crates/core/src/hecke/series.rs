//! Exact q-expansion of Δ = q ∏(1 - q^m)^24.
//!
//! With E = ∏(1 - q^m), Jacobi's identity makes E³ a sparse series with
//! about √(2N) terms. E⁶ is its sparse square, and E²⁴ follows from two dense
//! squarings. Dense products use number-theoretic transforms modulo 62-bit
//! primes and Garner reconstruction into `i128`. Euler's pentagonal series
//! for E serves as the test oracle.

use crate::error::{Error, Result};

/// (prime, primitive root). Each p - 1 is divisible by at least 2^46.
const NTT_PRIMES: [(u64, u64); 3] = [
    (4_179_340_454_199_820_289, 3),
    (4_611_615_649_683_210_241, 11),
    (1_945_555_039_024_054_273, 5),
];

/// Largest transform length any of the primes supports.
const MAX_LOG_LEN: u32 = 46;

#[derive(Clone, Copy)]
struct Montgomery {
    modulus: u64,
    neg_inv: u64,
    r2: u64,
}

impl Montgomery {
    fn new(modulus: u64) -> Self {
        debug_assert!(modulus % 2 == 1 && modulus < (1 << 62));
        let mut inv = modulus;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(modulus.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % modulus as u128) as u64;
        let r2 = ((r as u128 * r as u128) % modulus as u128) as u64;
        Montgomery { modulus, neg_inv: inv.wrapping_neg(), r2 }
    }

    #[inline(always)]
    fn reduce(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.modulus as u128) >> 64) as u64;
        self.fold(u.wrapping_sub(self.modulus))
    }

    /// x + modulus when x is "negative" (top bit set), else x. Branch-free:
    /// every operand is below 2^63, so the top bit flags a wrapped difference.
    #[inline(always)]
    fn fold(&self, x: u64) -> u64 {
        x.wrapping_add(self.modulus & ((x as i64 >> 63) as u64))
    }

    #[inline(always)]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a as u128 * b as u128)
    }

    #[inline(always)]
    fn add(&self, a: u64, b: u64) -> u64 {
        self.fold((a + b).wrapping_sub(self.modulus))
    }

    #[inline(always)]
    fn sub(&self, a: u64, b: u64) -> u64 {
        self.fold(a.wrapping_sub(b))
    }

    fn to_mont(&self, a: u64) -> u64 {
        self.mul(a, self.r2)
    }

    fn from_mont(&self, a: u64) -> u64 {
        self.reduce(a as u128)
    }

    fn pow(&self, base: u64, mut exp: u64) -> u64 {
        let mut acc = self.to_mont(1);
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    fn residue(&self, c: i128) -> u64 {
        let m = self.modulus as i128;
        self.to_mont(c.rem_euclid(m) as u64)
    }
}

struct NttPlan {
    mont: Montgomery,
    len: usize,
    /// Montgomery-form twiddles grouped by stage: entries h..2h hold w_{2h}^j
    /// for j < h, where w_{2h} is a primitive 2h-th root of unity.
    forward: Vec<u64>,
    inverse: Vec<u64>,
    len_inv: u64,
}

impl NttPlan {
    fn new(modulus: u64, generator: u64, len: usize) -> Self {
        let mont = Montgomery::new(modulus);
        let g = mont.to_mont(generator);
        let w = mont.pow(g, (modulus - 1) / len as u64);
        let w_inv = mont.pow(w, modulus - 2);
        let staged = |root: u64| {
            // w^{j stride} at stage half-length h, stride = len / 2h.
            let half = len / 2;
            let mut flat = Vec::with_capacity(half);
            let mut acc = mont.to_mont(1);
            for _ in 0..half {
                flat.push(acc);
                acc = mont.mul(acc, root);
            }
            let mut out = vec![0u64; len.max(2)];
            let mut h = 1;
            while h <= half {
                let stride = half / h;
                for j in 0..h {
                    out[h + j] = flat[j * stride];
                }
                h <<= 1;
            }
            out
        };
        let len_inv = mont.pow(mont.to_mont(len as u64), modulus - 2);
        NttPlan { mont, len, forward: staged(w), inverse: staged(w_inv), len_inv }
    }

    /// Decimation-in-frequency transform: natural order in, bit-reversed out.
    fn forward(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.len);
        let m = &self.mont;
        let mut len = self.len;
        while len >= 2 {
            let half = len / 2;
            let tw = &self.forward[half..len];
            for block in a.chunks_exact_mut(len) {
                let (lo, hi) = block.split_at_mut(half);
                for ((x, y), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(tw) {
                    let (u, v) = (*x, *y);
                    *x = m.add(u, v);
                    *y = m.mul(m.sub(u, v), w);
                }
            }
            len /= 2;
        }
    }

    /// Decimation-in-time inverse: bit-reversed in, natural order out,
    /// scaled by 1/len.
    fn inverse(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.len);
        let m = &self.mont;
        let mut len = 2;
        while len <= self.len {
            let half = len / 2;
            let tw = &self.inverse[half..len];
            for block in a.chunks_exact_mut(len) {
                let (lo, hi) = block.split_at_mut(half);
                for ((x, y), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(tw) {
                    let u = *x;
                    let v = m.mul(*y, w);
                    *x = m.add(u, v);
                    *y = m.sub(u, v);
                }
            }
            len <<= 1;
        }
        for x in a.iter_mut() {
            *x = m.mul(*x, self.len_inv);
        }
    }

    fn load(&self, coeffs: &[i128]) -> Vec<u64> {
        let mut out = vec![0u64; self.len];
        for (dst, &c) in out.iter_mut().zip(coeffs) {
            *dst = self.mont.residue(c);
        }
        out
    }

    fn pointwise_mul(&self, a: &mut [u64], b: &[u64]) {
        for (x, y) in a.iter_mut().zip(b) {
            *x = self.mont.mul(*x, *y);
        }
    }

    /// Inverse transform, then zero everything from `keep` on.
    fn inverse_truncated(&self, a: &mut [u64], keep: usize) {
        self.inverse(a);
        a[keep.min(self.len)..].fill(0);
    }

    /// Leave Montgomery form, keeping the first `keep` coefficients.
    fn unload(&self, mut a: Vec<u64>, keep: usize) -> Vec<u64> {
        a.truncate(keep);
        for x in a.iter_mut() {
            *x = self.mont.from_mont(*x);
        }
        a
    }
}

fn transform_len(out_len: usize) -> Result<usize> {
    let len = (2 * out_len).saturating_sub(1).next_power_of_two().max(2);
    if len.trailing_zeros() > MAX_LOG_LEN {
        return Err(Error::Capacity(format!("transform length 2^{}", len.trailing_zeros())));
    }
    Ok(len)
}

fn reconstruct(residues: &[Vec<u64>], out_len: usize) -> Result<Vec<i128>> {
    let garner = Garner::new();
    let mut out = vec![0i128; out_len];
    let avail = residues[0].len();
    match residues {
        [r1, r2] => {
            for (i, slot) in out.iter_mut().enumerate().take(avail) {
                *slot = garner.combine2(r1[i], r2[i]);
            }
        }
        [r1, r2, r3] => {
            for (i, slot) in out.iter_mut().enumerate().take(avail) {
                *slot = garner.combine(r1[i], r2[i], r3[i])?;
            }
        }
        _ => unreachable!("two or three residue channels"),
    }
    Ok(out)
}

/// Exact product of two integer polynomials truncated to `out_len` terms.
#[cfg(test)]
pub(crate) fn convolve_exact(a: &[i128], b: &[i128], out_len: usize) -> Result<Vec<i128>> {
    if a.is_empty() || b.is_empty() || out_len == 0 {
        return Ok(vec![0; out_len]);
    }
    let a = &a[..a.len().min(out_len)];
    let b = &b[..b.len().min(out_len)];
    let full = a.len() + b.len() - 1;
    let keep = out_len.min(full);
    let len = transform_len(a.len().max(b.len()))?;
    let residues: Vec<Vec<u64>> = NTT_PRIMES
        .iter()
        .map(|&(p, g)| {
            let plan = NttPlan::new(p, g, len);
            let mut fa = plan.load(a);
            plan.forward(&mut fa);
            let mut fb = plan.load(b);
            plan.forward(&mut fb);
            plan.pointwise_mul(&mut fa, &fb);
            plan.inverse(&mut fa);
            plan.unload(fa, keep)
        })
        .collect();
    reconstruct(&residues, out_len)
}

/// Mixed-radix CRT over the three transform primes.
struct Garner {
    m2: Montgomery,
    m3: Montgomery,
    /// Montgomery form of p1^{-1} mod p2.
    inv_p1: u64,
    /// Montgomery form of (p1 p2)^{-1} mod p3.
    inv_p1p2: u64,
    /// Montgomery form of p1 mod p3.
    p1_mod_p3: u64,
}

impl Garner {
    fn new() -> Self {
        let (p1, p2, p3) = (NTT_PRIMES[0].0, NTT_PRIMES[1].0, NTT_PRIMES[2].0);
        let m2 = Montgomery::new(p2);
        let m3 = Montgomery::new(p3);
        let inv_p1 = m2.pow(m2.to_mont(p1 % p2), p2 - 2);
        let p1_mod_p3 = m3.to_mont(p1 % p3);
        let p1p2 = m3.mul(p1_mod_p3, m3.to_mont(p2 % p3));
        let inv_p1p2 = m3.pow(p1p2, p3 - 2);
        Garner { m2, m3, inv_p1, inv_p1p2, p1_mod_p3 }
    }

    /// The unique integer in (-p1p2/2, p1p2/2) with residues r1, r2.
    fn combine2(&self, r1: u64, r2: u64) -> i128 {
        let m2 = &self.m2;
        let (p1, p2) = (NTT_PRIMES[0].0 as i128, NTT_PRIMES[1].0 as i128);
        let t2 = m2.from_mont(m2.mul(m2.sub(m2.to_mont(r2), m2.to_mont(r1)), self.inv_p1));
        let low = r1 as i128 + p1 * t2 as i128;
        if low > p1 * p2 / 2 {
            low - p1 * p2
        } else {
            low
        }
    }

    /// The unique integer in (-p1p2p3/2, p1p2p3/2) with the given residues,
    /// provided it fits in i128.
    fn combine(&self, r1: u64, r2: u64, r3: u64) -> Result<i128> {
        let (m2, m3) = (&self.m2, &self.m3);
        let (p1, p2, p3) = (NTT_PRIMES[0].0, NTT_PRIMES[1].0, NTT_PRIMES[2].0);
        // r1 < p1 < p2, so r1 is already reduced mod p2.
        let t2 = m2.from_mont(m2.mul(m2.sub(m2.to_mont(r2), m2.to_mont(r1)), self.inv_p1));
        // low = r1 + p1 t2 < p1 p2; its residue mod p3:
        let low_mod_p3 = m3.add(m3.to_mont(r1 % p3), m3.mul(self.p1_mod_p3, m3.to_mont(t2 % p3)));
        let t3 = m3.from_mont(m3.mul(m3.sub(m3.to_mont(r3), low_mod_p3), self.inv_p1p2));
        let low = r1 as i128 + p1 as i128 * t2 as i128;
        let p1p2 = p1 as i128 * p2 as i128;
        let top = if t3 > p3 / 2 { t3 as i128 - p3 as i128 } else { t3 as i128 };
        top.checked_mul(p1p2)
            .and_then(|h| h.checked_add(low))
            .ok_or_else(|| Error::Capacity("coefficient exceeds 128-bit range".into()))
    }
}

/// Coefficients of ∏_{m≥1}(1 - q^m) up to q^{len-1} (Euler's pentagonal theorem).
#[cfg(test)]
fn pentagonal_series(len: usize) -> Vec<i128> {
    let mut out = vec![0i128; len];
    if len == 0 {
        return out;
    }
    out[0] = 1;
    let mut k: i64 = 1;
    loop {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let e1 = (k * (3 * k - 1) / 2) as usize;
        let e2 = (k * (3 * k + 1) / 2) as usize;
        if e1 >= len {
            break;
        }
        out[e1] += sign;
        if e2 < len {
            out[e2] += sign;
        }
        k += 1;
    }
    out
}

/// Square of a sparse series, computed directly over its nonzero terms.
fn sparse_square(series: &[i128]) -> Vec<i128> {
    let len = series.len();
    let support: Vec<(usize, i128)> =
        series.iter().enumerate().filter(|(_, c)| **c != 0).map(|(i, c)| (i, *c)).collect();
    let mut out = vec![0i128; len];
    for (a, &(i, ci)) in support.iter().enumerate() {
        for &(j, cj) in &support[a..] {
            let e = i + j;
            if e >= len {
                break;
            }
            out[e] += if i == j { ci * cj } else { 2 * ci * cj };
        }
    }
    out
}

/// Coefficients of ∏_{m≥1}(1 - q^m)³ = Σ_k (-1)^k (2k+1) q^{k(k+1)/2}.
pub(crate) fn jacobi_cube_series(len: usize) -> Vec<i128> {
    let mut out = vec![0i128; len];
    let mut k = 0usize;
    while k * (k + 1) / 2 < len {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        out[k * (k + 1) / 2] = sign * (2 * k as i128 + 1);
        k += 1;
    }
    out
}

/// Deligne gives |τ(n)| ≤ d(n) n^{11/2} ≤ 2n⁶; two primes suffice while that
/// stays below p1 p2 / 2.
fn primes_needed(limit: usize) -> usize {
    let bound = 2.0 * (limit as f64).powi(6);
    let half_product = NTT_PRIMES[0].0 as f64 * NTT_PRIMES[1].0 as f64 / 2.0;
    if bound < 0.5 * half_product {
        2
    } else {
        3
    }
}

/// τ(0..=limit) with τ(0) = 0: the q-expansion coefficients of Δ.
///
/// The intermediate power E¹² is kept as residues modulo each transform
/// prime; only E²⁴ is lifted back to the integers.
pub(crate) fn delta_coefficients(limit: usize) -> Result<Vec<i128>> {
    // Δ = q E^24, so τ(n) is the coefficient of q^{n-1} in E^24.
    let keep = limit;
    let e6 = sparse_square(&jacobi_cube_series(keep));
    let len = transform_len(keep)?;
    let residues: Vec<Vec<u64>> = NTT_PRIMES[..primes_needed(limit)]
        .iter()
        .map(|&(p, g)| {
            let plan = NttPlan::new(p, g, len);
            let mut e = plan.load(&e6);
            plan.forward(&mut e);
            let copy = e.clone();
            plan.pointwise_mul(&mut e, &copy);
            plan.inverse_truncated(&mut e, keep);
            plan.forward(&mut e);
            let copy = e.clone();
            plan.pointwise_mul(&mut e, &copy);
            plan.inverse(&mut e);
            plan.unload(e, keep)
        })
        .collect();
    let e24 = reconstruct(&residues, keep)?;
    let mut tau = Vec::with_capacity(limit + 1);
    tau.push(0);
    tau.extend_from_slice(&e24);
    Ok(tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schoolbook(a: &[i128], b: &[i128], out_len: usize) -> Vec<i128> {
        let mut out = vec![0i128; out_len];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                if i + j < out_len {
                    out[i + j] += x * y;
                }
            }
        }
        out
    }

    #[test]
    fn primes_have_stated_roots() {
        for &(p, g) in &NTT_PRIMES {
            let m = Montgomery::new(p);
            let one = m.to_mont(1);
            // g^{(p-1)/2} = -1 certifies g is a non-residue; enough for the 2-power part.
            let half = m.pow(m.to_mont(g), (p - 1) / 2);
            assert_eq!(m.from_mont(half), p - 1);
            assert_eq!(m.from_mont(m.pow(m.to_mont(g), p - 1)), m.from_mont(one));
            assert!((p - 1).trailing_zeros() >= MAX_LOG_LEN);
        }
    }

    #[test]
    fn convolution_matches_schoolbook_with_signs() {
        let a: Vec<i128> = (0..37).map(|i| (i * i) as i128 - 300).collect();
        let b: Vec<i128> = (0..23).map(|i| 1_000_000_007i128 * if i % 3 == 0 { -1 } else { 1 } + i).collect();
        let got = convolve_exact(&a, &b, 59).unwrap();
        assert_eq!(got, schoolbook(&a, &b, 59));
        let sq = convolve_exact(&a, &a, 40).unwrap();
        assert_eq!(sq, schoolbook(&a, &a, 40));
    }

    #[test]
    fn convolution_reconstructs_large_values() {
        let big = 3_000_000_000_000_000_000i128; // 3e18
        let a = vec![big, -big];
        let b = vec![big, big];
        let got = convolve_exact(&a, &b, 3).unwrap();
        assert_eq!(got, vec![big * big, 0, -big * big]);
    }

    #[test]
    fn pentagonal_prefix() {
        assert_eq!(pentagonal_series(13), vec![1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1]);
    }

    #[test]
    fn jacobi_series_is_cube_of_pentagonal() {
        let len = 2000;
        let e = pentagonal_series(len);
        let cube = schoolbook(&schoolbook(&e, &e, len), &e, len);
        assert_eq!(jacobi_cube_series(len), cube);
    }

    #[test]
    fn two_and_three_prime_paths_agree() {
        // Force the three-prime reconstruction on a small input and compare.
        let len = 3000;
        let e6 = sparse_square(&jacobi_cube_series(len));
        let e12 = convolve_exact(&e6, &e6, len).unwrap();
        let e24 = convolve_exact(&e12, &e12, len).unwrap();
        let tau = delta_coefficients(len).unwrap();
        assert_eq!(primes_needed(len), 2);
        assert_eq!(&tau[1..], &e24[..]);
        assert_eq!(primes_needed(2_000_000), 3);
    }

    #[test]
    fn delta_matches_direct_expansion() {
        // Oracle: multiply (1 - q^m) twenty-four times for each m.
        let len = 60;
        let mut poly = vec![0i128; len];
        poly[0] = 1;
        for m in 1..len {
            for _ in 0..24 {
                for e in (m..len).rev() {
                    poly[e] -= poly[e - m];
                }
            }
        }
        let tau = delta_coefficients(len).unwrap();
        assert_eq!(tau[0], 0);
        assert_eq!(&tau[1..], &poly[..]);
    }
}
