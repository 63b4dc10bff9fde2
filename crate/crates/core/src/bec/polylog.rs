//! `Li_{1/2}(e^{-t})` for `t > 0` and the zeta values it needs.
//!
//! For `t ≥ 1` the defining series `Σ_j e^{-jt}/√j` converges geometrically.
//! Below that the series is slow and the expansion about `t = 0`,
//!
//! ```text
//! Li_{1/2}(e^{-t}) = √(π/t) + Σ_{k≥0} ζ(1/2 − k) (−t)^k / k!,
//! ```
//!
//! is used instead; it converges for `t < 2π`.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// `B_2, B_4, …, B_14`
const BERNOULLI: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

const EXPANSION_TERMS: usize = 32;

/// Riemann zeta for real `s > 0`, `s ≠ 1`, by Euler–Maclaurin summation with 20 terms.
///
/// The remainder after the `B_14` correction is below `1e-20` for `s ≥ 1/2`.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 0.0 && s != 1.0, "zeta({s}) outside the supported range");
    const N: usize = 20;
    let n = N as f64;
    let mut sum: f64 = (1..N).rev().map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    let mut rising = s;
    let mut factorial = 2.0;
    let mut power = n.powf(-s - 1.0);
    for (j, b) in BERNOULLI.iter().enumerate() {
        sum += b / factorial * rising * power;
        let two_j = 2.0 * (j + 1) as f64;
        rising *= (s + two_j - 1.0) * (s + two_j);
        factorial *= (two_j + 1.0) * (two_j + 2.0);
        power /= n * n;
    }
    sum
}

/// `ζ(1/2 − k)` from the functional equation
/// `ζ(1 − s) = 2 (2π)^{−s} cos(πs/2) Γ(s) ζ(s)` with `s = k + 1/2`.
pub fn zeta_half_minus(k: usize) -> f64 {
    if k == 0 {
        return zeta(0.5);
    }
    let s = k as f64 + 0.5;
    let mut gamma = PI.sqrt();
    for i in 0..k {
        gamma *= i as f64 + 0.5;
    }
    2.0 * (2.0 * PI).powf(-s) * (0.5 * PI * s).cos() * gamma * zeta(s)
}

/// `ζ(1/2 − k) / k!` for the small-`t` expansion.
fn expansion_coefficients() -> &'static [f64; EXPANSION_TERMS] {
    static TABLE: OnceLock<[f64; EXPANSION_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut c = [0.0; EXPANSION_TERMS];
        let mut factorial = 1.0;
        for (k, ck) in c.iter_mut().enumerate() {
            if k > 0 {
                factorial *= k as f64;
            }
            *ck = zeta_half_minus(k) / factorial;
        }
        c
    })
}

/// `Li_{1/2}(e^{-t})` for `t > 0`.
///
/// For `t ≥ 1` the series is cut once its geometric tail bound drops below
/// `abs_tol`; for `t < 1` the truncation error of the expansion is below 1e-23.
pub fn li_half_exp(t: f64, abs_tol: f64) -> f64 {
    assert!(t > 0.0, "Li_1/2(e^-t) needs t > 0, got {t}");
    if t < 1.0 {
        let c = expansion_coefficients();
        let mut acc = 0.0;
        for &ck in c.iter().rev() {
            acc = acc * (-t) + ck;
        }
        return (PI / t).sqrt() + acc;
    }
    let q = (-t).exp();
    if q == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut qj = 1.0;
    let mut j = 1usize;
    loop {
        qj *= q;
        sum += qj / (j as f64).sqrt();
        let next = (j + 1) as f64;
        if qj * q / (next.sqrt() * (1.0 - q)) <= abs_tol || qj == 0.0 {
            return sum;
        }
        j += 1;
    }
}
