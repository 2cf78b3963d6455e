//! Modified Bessel functions of the first and second kind for real order
//! ν ≥ 0 and real argument z > 0, plus the Gamma function.
//!
//! The evaluation follows the classical Temme / Steed scheme: the ratio
//! `I_{ν+1}/I_ν` from a continued fraction, downward recurrence to an order
//! μ ∈ [−½, ½), `K_μ`, `K_{μ+1}` from Temme's series (z < 2) or Steed's
//! continued fraction (z ≥ 2), the Wronskian to normalize `I`, and upward
//! recurrence for `K`. Large arguments use the Hankel expansion.

use serde::Serialize;

use crate::error::{domain, Result};

pub const NU_MAX: f64 = 50.0;
pub const Z_MIN: f64 = 1e-12;
pub const Z_MAX: f64 = 1e4;

const EPS: f64 = 1e-16;

/// Values and first derivatives of `I_ν` and `K_ν` at one point.
///
/// Outside the double range the unscaled values saturate to `0` or `∞`;
/// use [`bessel_ik_scaled`] when that matters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselPair {
    pub nu: f64,
    pub z: f64,
    pub i_val: f64,
    pub k_val: f64,
    pub i_deriv: f64,
    pub k_deriv: f64,
}

/// Same content as [`BesselPair`] with `I` and `I′` multiplied by `e^{−z}` and
/// `K`, `K′` by `e^{z}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledBesselPair {
    pub nu: f64,
    pub z: f64,
    pub i_val: f64,
    pub k_val: f64,
    pub i_deriv: f64,
    pub k_deriv: f64,
}

fn check_args(nu: f64, z: f64) -> Result<()> {
    if !(0.0..=NU_MAX).contains(&nu) || nu.is_nan() {
        return domain(format!("Bessel order {nu} outside [0, {NU_MAX}]"));
    }
    if !(Z_MIN..=Z_MAX).contains(&z) || z.is_nan() {
        return domain(format!("Bessel argument {z} outside [{Z_MIN:e}, {Z_MAX:e}]"));
    }
    Ok(())
}

/// `I_ν(z)`, `K_ν(z)` and their derivatives.
pub fn bessel_ik(nu: f64, z: f64) -> Result<BesselPair> {
    let s = bessel_ik_scaled(nu, z)?;
    let up = z.exp();
    let down = (-z).exp();
    Ok(BesselPair {
        nu,
        z,
        i_val: s.i_val * up,
        k_val: s.k_val * down,
        i_deriv: s.i_deriv * up,
        k_deriv: s.k_deriv * down,
    })
}

/// Exponentially scaled `e^{−z}I_ν(z)`, `e^{z}K_ν(z)` and derivatives.
pub fn bessel_ik_scaled(nu: f64, z: f64) -> Result<ScaledBesselPair> {
    check_args(nu, z)?;
    Ok(ik_scaled(nu, z))
}

/// Logarithms of `(I_ν, I_{ν+1}, K_ν, K_{ν+1})` at `x`, with `I` scaled by
/// `e^{−x}` and `K` by `e^{x}`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Ladder {
    pub i0: f64,
    pub i1: f64,
    pub k0: f64,
    pub k1: f64,
}

/// Logarithmic magnitudes, representable far beyond the double range of the
/// values themselves. `ln_i` is `ln I_ν(z)` (unscaled), `ln_k` is `ln K_ν(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogBesselPair {
    pub nu: f64,
    pub z: f64,
    pub ln_i: f64,
    pub ln_k: f64,
    /// `I′_ν/I_ν`
    pub i_log_deriv: f64,
    /// `K′_ν/K_ν`
    pub k_log_deriv: f64,
}

/// `ln I_ν(z)`, `ln K_ν(z)` and logarithmic derivatives.
pub fn bessel_ik_log(nu: f64, z: f64) -> Result<LogBesselPair> {
    check_args(nu, z)?;
    Ok(ik_log(nu, z))
}

pub(crate) fn ik_log(nu: f64, z: f64) -> LogBesselPair {
    let l = ladder(nu, z);
    LogBesselPair {
        nu,
        z,
        ln_i: l.i0 + z,
        ln_k: l.k0 - z,
        i_log_deriv: (l.i1 - l.i0).exp() + nu / z,
        k_log_deriv: -(l.k1 - l.k0).exp() + nu / z,
    }
}

/// Unchecked evaluation for internal callers; requires `ν ≥ 0`, `0 < z < ∞`.
pub(crate) fn ik_scaled(nu: f64, z: f64) -> ScaledBesselPair {
    let l = ladder(nu, z);
    let (i0, i1, k0, k1) = (l.i0.exp(), l.i1.exp(), l.k0.exp(), l.k1.exp());
    ScaledBesselPair {
        nu,
        z,
        i_val: i0,
        k_val: k0,
        i_deriv: if i0 > 0.0 { i1 + nu / z * i0 } else { 0.0 },
        k_deriv: -k1 + nu / z * k0,
    }
}

pub(crate) fn ladder(nu: f64, x: f64) -> Ladder {
    debug_assert!(nu >= 0.0 && x > 0.0);
    if x >= 50.0f64.max(0.5 * (nu + 1.0) * (nu + 1.0)) {
        let (i0, k0) = hankel(nu, x);
        let (i1, k1) = hankel(nu + 1.0, x);
        return Ladder { i0: i0.ln(), i1: i1.ln(), k0: k0.ln(), k1: k1.ln() };
    }
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let nl = nl as usize;
    const BIG: f64 = 1e250;
    let ln_big = BIG.ln();

    let rho = cf1_ratio(nu, x);
    // Downward recurrence from (I_ν, I_{ν+1}) ∝ (1, ρ), rescaled on the way.
    let mut ri = 1.0f64;
    let mut ri1 = rho;
    let mut log_scale = 0.0f64;
    for l in (1..=nl).rev() {
        let k = mu + l as f64;
        let next = 2.0 * k / x * ri + ri1;
        ri1 = ri;
        ri = next;
        if ri.abs() > BIG {
            ri /= BIG;
            ri1 /= BIG;
            log_scale += ln_big;
        }
    }
    let ratio_mu = ri1 / ri;

    let (kmu, kmu1) = if x < 2.0 { temme(mu, x) } else { steed(mu, x) };
    let imu = 1.0 / (x * (kmu1 + ratio_mu * kmu));
    let i0 = imu.ln() - ri.ln() - log_scale;
    let i1 = i0 + rho.ln();

    let mut k0 = kmu;
    let mut k1 = kmu1;
    let mut k_scale = 0.0f64;
    for i in 1..=nl {
        let next = 2.0 * (mu + i as f64) / x * k1 + k0;
        k0 = k1;
        k1 = next;
        if k1 > BIG {
            k0 /= BIG;
            k1 /= BIG;
            k_scale += ln_big;
        }
    }
    Ladder { i0, i1, k0: k0.ln() + k_scale, k1: k1.ln() + k_scale }
}

/// `I_{ν+1}(x)/I_ν(x)` by the modified Lentz method.
fn cf1_ratio(nu: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let xi = 1.0 / x;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    let mut j = 1.0;
    loop {
        let b = 2.0 * (nu + j) * xi;
        d += b;
        if d == 0.0 {
            d = TINY;
        }
        c = b + 1.0 / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < EPS || j > 1e6 {
            break;
        }
        j += 1.0;
    }
    f
}

/// Coefficients of 1/Γ(z) = Σ c_k z^k, k = 1..26.
const RECIP_GAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Returns (gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ)) for |μ| ≤ ½.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mu2 = mu * mu;
    let mut even = 0.0;
    let mut odd = 0.0;
    for k in (0..13).rev() {
        even = even * mu2 + RECIP_GAMMA[2 * k];
        odd = odd * mu2 + RECIP_GAMMA[2 * k + 1];
    }
    let gam1 = -odd;
    let gam2 = even;
    (gam1, gam2, gam2 + mu * odd, gam2 - mu * odd)
}

/// Scaled K_μ, K_{μ+1} for x < 2 from Temme's series.
fn temme(mu: f64, x: f64) -> (f64, f64) {
    let x2 = 0.5 * x;
    let pimu = std::f64::consts::PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    let mut i = 1.0;
    loop {
        ff = (i * ff + p + q) / (i * i - mu * mu);
        c *= dd / i;
        p /= i - mu;
        q /= i + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - i * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS || i > 500.0 {
            break;
        }
        i += 1.0;
    }
    let scale = x.exp();
    (sum * scale, sum1 * 2.0 / x * scale)
}

/// Scaled K_μ, K_{μ+1} for x ≥ 2 from Steed's continued fraction.
fn steed(mu: f64, x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut c = a1;
    let mut q = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut i = 2.0;
    loop {
        a -= 2.0 * (i - 1.0);
        c = -a * c / i;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS || i > 1e5 {
            break;
        }
        i += 1.0;
    }
    h *= a1;
    let kmu = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let kmu1 = kmu * (mu + x + 0.5 - h) / x;
    (kmu, kmu1)
}

/// Scaled (e^{−x}I_ν, e^{x}K_ν) from the Hankel expansion; valid for x ≫ ν².
fn hankel(nu: f64, x: f64) -> (f64, f64) {
    let four_nu2 = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum_k = 1.0;
    let mut sum_i = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (four_nu2 - odd * odd) / (8.0 * k as f64 * x);
        if term == 0.0 || term.abs() > prev {
            break;
        }
        sum_k += term;
        sum_i += if k % 2 == 0 { term } else { -term };
        prev = term.abs();
        if term.abs() < 1e-17 {
            break;
        }
    }
    let pi = std::f64::consts::PI;
    (sum_i / (2.0 * pi * x).sqrt(), sum_k * (pi / (2.0 * x)).sqrt())
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for x in (0, 100].
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 100.0) {
        return domain(format!("gamma argument {x} outside (0, 100]"));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    let pi = std::f64::consts::PI;
    if x < 0.5 {
        return pi / ((pi * x).sin() * gamma_unchecked(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    // Split the power to stay finite near the top of the range.
    let half = t.powf(0.5 * (x + 0.5));
    (2.0 * pi).sqrt() * half * (-t).exp() * half * a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
        }
    }

    #[test]
    fn gamma_examples_and_recurrence() {
        assert!(rel(gamma_fn(1.0).unwrap(), 1.0) < 1e-14);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!(rel(gamma_fn(0.5).unwrap(), sqrt_pi) < 1e-14);
        assert!(rel(gamma_fn(2.5).unwrap(), 0.75 * sqrt_pi) < 1e-14);
        for &x in &[0.1, 0.7, 3.3, 12.9, 60.2, 98.5] {
            let lhs = gamma_fn(x + 1.0).unwrap();
            assert!(rel(lhs, x * gamma_fn(x).unwrap()) < 1e-13, "x={x}");
        }
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.0).is_err());
        assert!(gamma_fn(100.5).is_err());
    }

    #[test]
    fn reciprocal_gamma_series_matches_lanczos() {
        for &mu in &[-0.5, -0.31, -0.1, 0.0, 0.05, 0.25, 0.5] {
            let (_, _, gampl, gammi) = temme_gammas(mu);
            assert!(rel(gampl, 1.0 / gamma_unchecked(1.0 + mu)) < 1e-14, "mu={mu}");
            assert!(rel(gammi, 1.0 / gamma_unchecked(1.0 - mu)) < 1e-14, "mu={mu}");
        }
    }

    #[test]
    fn small_argument_limits() {
        let p = bessel_ik(0.0, 1e-10).unwrap();
        let c = p.k_val + 1e-10f64.ln();
        // K₀(z) + log z → log 2 − γ.
        assert!((c - (2f64.ln() - 0.577_215_664_901_532_9)).abs() < 1e-10);
        assert!((p.i_val - 1.0).abs() < 1e-15);
        let p = bessel_ik(1.0, 1e-9).unwrap();
        assert!(rel(1e-9 * p.k_val, 1.0) < 1e-12);
    }

    #[test]
    fn wronskian_at_one() {
        let a = bessel_ik(0.0, 1.0).unwrap();
        let b = bessel_ik(1.0, 1.0).unwrap();
        let w = a.i_val * b.k_val + a.k_val * b.i_val;
        assert!((w - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(bessel_ik(-0.1, 1.0).is_err());
        assert!(bessel_ik(50.5, 1.0).is_err());
        assert!(bessel_ik(1.0, 0.0).is_err());
        assert!(bessel_ik(1.0, 1e-13).is_err());
        assert!(bessel_ik(1.0, 2e4).is_err());
        assert!(bessel_ik(f64::NAN, 1.0).is_err());
    }
}
