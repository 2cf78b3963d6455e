//! Right-hand-side functionals of the counting bounds.
//!
//! Plane integrals are split into a core r ∈ [1e−6, 1e6], integrated in
//! t = log r, and two tails written in the doubly logarithmic variable
//! v = log log|log r| so that the singular and slowly decaying families stay
//! representable. A tail whose partial integrals pass [`DIVERGENCE_CAP`] or
//! keep growing at the end of the representable range is flagged divergent.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::field_models::{golden, softplus};
use crate::potential_models::PotentialModel;
use crate::quadrature::{gauss_legendre, integrate, integrate_pieces, Tolerance};
use crate::special_functions::gamma_fn;

pub const DIVERGENCE_CAP: f64 = 1e12;
const T_CORE: f64 = 13.815_510_557_964_274; // log 1e6
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
/// Largest v = log s reached by the far tails (s itself stays below e^690).
const V_FAR: f64 = 690.0;

/// A nonnegative quantity that may diverge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extended {
    /// The value, or the last partial value reached when divergent.
    pub value: f64,
    /// Quadrature error bar including the tail estimate.
    pub error: f64,
    pub divergent: bool,
}

impl Extended {
    pub fn finite(value: f64, error: f64) -> Self {
        Extended { value, error, divergent: false }
    }

    pub fn divergent(partial: f64) -> Self {
        Extended { value: partial, error: f64::INFINITY, divergent: true }
    }

    pub fn is_finite(&self) -> bool {
        !self.divergent
    }

    /// The value when finite, `None` otherwise.
    pub fn get(&self) -> Option<f64> {
        (!self.divergent).then_some(self.value)
    }
}

impl std::fmt::Display for Extended {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.divergent {
            write!(f, "divergent")
        } else {
            write!(f, "{:.17e}", self.value)
        }
    }
}

/// Integration region for the log-weighted integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Ball1,
    Plane,
    /// The complement of the unit disk.
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Weight {
    One,
    AbsLog,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Density {
    /// 2π·𝒱(r)
    Mean,
    /// (∫V(r,θ)^p dθ)^{1/p}
    Lp(f64),
}

fn density(v: &PotentialModel, d: Density, r: f64) -> f64 {
    match d {
        Density::Mean => TWO_PI * v.v_bar(r),
        Density::Lp(p) => v.angular_lp(r, p),
    }
}

/// ln of density/𝒱 near a tail boundary (constant in r for every built-in tail).
fn log_density_ratio(v: &PotentialModel, d: Density, r: f64) -> f64 {
    match d {
        Density::Mean => TWO_PI.ln(),
        Density::Lp(p) => {
            let vb = v.v_bar(r);
            if vb > 0.0 {
                (v.angular_lp(r, p) / vb).ln()
            } else {
                TWO_PI.powf(1.0 / p).ln()
            }
        }
    }
}

/// ∫ density(r)·g(r) r dr over the region.
fn radial_integral(v: &PotentialModel, d: Density, w: Weight, region: Region) -> Extended {
    if matches!(v, PotentialModel::Zero) || v.amplitude() == 0.0 {
        return Extended::finite(0.0, 0.0);
    }
    let (t_lo, t_hi) = match region {
        Region::Ball1 => (-T_CORE, 0.0),
        Region::Plane => (-T_CORE, T_CORE),
        Region::Exterior => (0.0, T_CORE),
    };
    let mut pts = vec![t_lo];
    let mut bps = v.t_breakpoints();
    bps.push(0.0);
    bps.sort_by(f64::total_cmp);
    pts.extend(bps.into_iter().filter(|&b| b > t_lo && b < t_hi));
    pts.push(t_hi);
    pts.dedup();
    let integrand = |t: f64| {
        let r = t.exp();
        let g = match w {
            Weight::One => 1.0,
            Weight::AbsLog => t.abs(),
        };
        density(v, d, r) * r * r * g
    };
    let core = match integrate_pieces(integrand, &pts, Tolerance::rel(1e-12).with_abs(1e-300)) {
        Ok(q) => q,
        Err(_) => return Extended::divergent(f64::NAN),
    };
    let zero = Extended::finite(0.0, 0.0);
    let inner = if region == Region::Exterior { zero } else { tail(v, d, w, -1.0) };
    let outer = if region == Region::Ball1 { zero } else { tail(v, d, w, 1.0) };
    let total = core.value + inner.value + outer.value;
    if inner.divergent || outer.divergent || total > DIVERGENCE_CAP {
        return Extended::divergent(total);
    }
    Extended::finite(total, core.error + inner.error + outer.error)
}

/// Tail beyond |log r| = T_CORE on the given side (−1 inner, +1 outer).
fn tail(v: &PotentialModel, d: Density, w: Weight, side: f64) -> Extended {
    let lratio = log_density_ratio(v, d, (side * T_CORE).exp());
    // t = side·e^s, s = e^v, dt = |t| s dv.
    let f = |vv: f64| {
        let s = vv.exp();
        let t = side * s.exp();
        // ln(𝒱r²) + ln g + ln|t| + ln s + v with the 2s of |t|² cancelled exactly.
        let l2 = v.log_vbar_r2_t2(t, s);
        if l2 == f64::NEG_INFINITY {
            return 0.0;
        }
        let lg = match w {
            Weight::One => -s,
            Weight::AbsLog => 0.0,
        };
        (l2 + lratio + lg + vv).exp()
    };
    let v0 = T_CORE.ln().ln();
    let mut total = 0.0;
    let mut err = 0.0;
    let mut lo = v0;
    let mut last_block = f64::INFINITY;
    while lo < V_FAR {
        let hi = (lo + 0.5).min(V_FAR);
        let q = match integrate(f, lo, hi, Tolerance::rel(1e-12).with_abs(1e-300)) {
            Ok(q) => q,
            Err(_) => return Extended::divergent(total),
        };
        total += q.value;
        err += q.error;
        if total > DIVERGENCE_CAP {
            return Extended::divergent(total);
        }
        if q.value <= 1e-17 * total.max(1e-300) && q.value <= last_block {
            return Extended::finite(total, err + q.value);
        }
        last_block = q.value;
        lo = hi;
    }
    if last_block > 1e-12 * total {
        Extended::divergent(total)
    } else {
        Extended::finite(total, err)
    }
}

/// ‖V‖₁,ₚ = ∫₀^∞ (∫₀^{2π} V(r,θ)^p dθ)^{1/p} r dr.
pub fn mixed_norm(v: &PotentialModel, p: f64) -> Result<Extended> {
    if !(p > 1.0) {
        return domain(format!("mixed norm needs p > 1, got {p}"));
    }
    Ok(radial_integral(v, Density::Lp(p), Weight::One, Region::Plane))
}

/// ∫V dx.
pub fn l1_norm(v: &PotentialModel) -> Extended {
    radial_integral(v, Density::Mean, Weight::One, Region::Plane)
}

/// ∫_region V(x)|log|x|| dx.
pub fn log_weighted_integral(v: &PotentialModel, region: Region) -> Extended {
    radial_integral(v, Density::Mean, Weight::AbsLog, region)
}

/// ∫_{|x|<1} V dx, used by the radial corollaries.
pub fn ball1_integral(v: &PotentialModel) -> Extended {
    radial_integral(v, Density::Mean, Weight::One, Region::Ball1)
}

/// (1/2π)∫V dx.
pub fn weyl_rhs(v: &PotentialModel) -> Extended {
    let l1 = l1_norm(v);
    Extended { value: l1.value / TWO_PI, error: l1.error / TWO_PI, divergent: l1.divergent }
}

/// w(r) = 1/(1 + r²(log r)²).
pub fn hardy_weight(r: f64) -> f64 {
    let l = r.ln();
    1.0 / (1.0 + r * r * l * l)
}

/// ln w(e^t) + 2t, finite for t = ±∞ given s = log|t|.
fn ln_w_plus_2t(t: f64, s: f64) -> f64 {
    if t == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let z = 2.0 * t + 2.0 * s;
    if z > 30.0 {
        -2.0 * s - (-z).exp().ln_1p()
    } else {
        2.0 * t - softplus(z)
    }
}

/// Γ(σ − ½)/(2√π Γ(σ)).
pub fn bl_constant(sigma: f64) -> Result<f64> {
    if !(sigma > 1.0) {
        return domain(format!("sigma must exceed 1, got {sigma}"));
    }
    Ok(gamma_fn(sigma - 0.5)? / (2.0 * std::f64::consts::PI.sqrt() * gamma_fn(sigma)?))
}

/// Result of the [V]_a supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    pub value: Extended,
    /// log of the level τ attaining the supremum (NaN when divergent or V ≡ 0).
    pub ln_tau_star: f64,
    /// Coarse and fine scans agree within 1e−3.
    pub scan_stable: bool,
}

/// ln(w(r) r² (log r)²), finite for t = ±∞ given s = log|t|.
fn ln_w_r2_t2(t: f64, s: f64) -> f64 {
    let z = 2.0 * t + 2.0 * s;
    if z > 30.0 {
        -(-z).exp().ln_1p()
    } else {
        z - softplus(z)
    }
}

/// Sample of the extended half-lines: ln q = ln(𝒱/w) and ln of the mass element.
struct LevelSample {
    ln_q: Vec<f64>,
    ln_mass: Vec<f64>,
}

fn level_samples(v: &PotentialModel, refine: usize) -> LevelSample {
    let (gx, gw) = gauss_legendre(4);
    let mut ln_q = Vec::new();
    let mut ln_mass = Vec::new();
    let mut push = |t: f64, s: f64, ln_jac: f64, wt: f64| {
        let lv = v.log_vbar_r2(t, s);
        if lv == f64::NEG_INFINITY {
            return;
        }
        let lw2t = ln_w_plus_2t(t, s);
        // q = 𝒱/w = (𝒱 r²)/(w r²); density w(1+|t|) r².
        ln_q.push(lv - lw2t);
        let ln_one_plus = if t.abs() > 1e300 { s } else { t.abs().ln_1p() };
        ln_mass.push(lw2t + ln_one_plus + ln_jac + wt.ln());
    };
    // Core in t, split at the potential's breakpoints.
    let mut pts = vec![-T_CORE];
    let mut bps = v.t_breakpoints();
    bps.push(0.0);
    bps.sort_by(f64::total_cmp);
    pts.extend(bps.into_iter().filter(|&b| b > -T_CORE && b < T_CORE));
    pts.push(T_CORE);
    pts.dedup();
    let step = 2e-3 / refine as f64;
    for w in pts.windows(2) {
        let n = ((w[1] - w[0]) / step).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / n as f64;
        for i in 0..n {
            let a = w[0] + i as f64 * h;
            for (x, wt) in gx.iter().zip(&gw) {
                let t = a + 0.5 * h * (1.0 + x);
                push(t, t.abs().ln(), 0.0, 0.5 * h * wt);
            }
        }
    }
    // Far sides in v = log s, t = ±e^s.
    let v0 = T_CORE.ln().ln();
    for side in [-1.0f64, 1.0] {
        let v_end = if side < 0.0 { 1e5f64.ln().ln() } else { V_FAR };
        let dv = 2e-3 / refine as f64;
        let n = ((v_end - v0) / dv).ceil() as usize;
        let h = (v_end - v0) / n as f64;
        for i in 0..n {
            let a = v0 + i as f64 * h;
            for (x, wt) in gx.iter().zip(&gw) {
                let vv = a + 0.5 * h * (1.0 + x);
                let s = vv.exp();
                let t = side * s.exp();
                let l2 = v.log_vbar_r2_t2(t, s);
                if l2 == f64::NEG_INFINITY {
                    continue;
                }
                // Mass w(1+|t|)r² dt with dt = |t| s dv, written around w r² t².
                let lw = ln_w_r2_t2(t, s);
                ln_q.push(l2 - lw);
                ln_mass.push(lw + (-s).exp().ln_1p() + vv + (0.5 * h * wt).ln());
            }
        }
    }
    LevelSample { ln_q, ln_mass }
}

/// Discrete sup of τ^{1+a}μ(τ): returns (ln F*, ln τ*, ln F at the two
/// ends of the level range, ln τ at those ends).
fn discrete_sup(sample: &LevelSample, a: f64) -> Option<(f64, f64, [f64; 2], [f64; 2])> {
    let n = sample.ln_q.len();
    if n == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sample.ln_q[j].total_cmp(&sample.ln_q[i]));
    let mut cum = f64::NEG_INFINITY;
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    let mut trail = Vec::with_capacity(n);
    for &i in &order {
        cum = log_add(cum, sample.ln_mass[i]);
        let lf = (1.0 + a) * sample.ln_q[i] + cum;
        trail.push((sample.ln_q[i], lf));
        if lf > best.0 {
            best = (lf, sample.ln_q[i]);
        }
    }
    // End behavior: F one decade of τ inside each end of the level range.
    let end_hi = trail[0];
    let end_lo = *trail.last().unwrap();
    // Growth over the last decade; zero when the level range is narrower.
    let growth = |end: (f64, f64), target: f64| {
        let near = trail
            .iter()
            .min_by(|x, y| (x.0 - target).abs().total_cmp(&(y.0 - target).abs()))
            .unwrap();
        if (near.0 - target).abs() < 0.5 { end.1 - near.1 } else { 0.0 }
    };
    let ln10 = std::f64::consts::LN_10;
    let growth_hi = growth(end_hi, end_hi.0 - ln10);
    let growth_lo = growth(end_lo, end_lo.0 + ln10);
    Some((best.0, best.1, [growth_lo, growth_hi], [end_lo.0, end_hi.0]))
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// μ(τ) = ∫_{𝒱/w > τ} w(1+|log r|) r dr restricted to the core, by adaptive
/// quadrature over the superlevel intervals.
fn core_level_measure(v: &PotentialModel, ln_tau: f64, sample_t: &[f64]) -> f64 {
    let ln_q = |t: f64| v.log_vbar_r2(t, t.abs().ln()) - ln_w_plus_2t(t, t.abs().ln());
    let above = |t: f64| ln_q(t) > ln_tau;
    let mut total = 0.0;
    let mut start: Option<f64> = None;
    let crossing = |mut a: f64, mut b: f64| {
        let fa = above(a);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if above(m) == fa {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let dens = |t: f64| (ln_w_plus_2t(t, t.abs().ln()) + t.abs().ln_1p()).exp();
    for w in sample_t.windows(2) {
        let (a, b) = (w[0], w[1]);
        match (above(a), above(b), start) {
            (false, true, None) => start = Some(crossing(a, b)),
            (true, false, Some(s0)) => {
                let e = crossing(a, b);
                total += integrate(dens, s0, e, Tolerance::rel(1e-12)).map(|q| q.value).unwrap_or(0.0);
                start = None;
            }
            (true, _, None) => start = Some(a),
            _ => {}
        }
    }
    if let Some(s0) = start {
        let e = *sample_t.last().unwrap();
        total += integrate(dens, s0, e, Tolerance::rel(1e-12)).map(|q| q.value).unwrap_or(0.0);
    }
    total
}

/// [V]_a = sup_τ τ^{1+a} ∫_{𝒱/w > τ} w(r)(1+|log r|) r dr.
pub fn bracket_a(v: &PotentialModel, a: f64) -> Result<BracketReport> {
    if !(a > 0.0) {
        return domain(format!("bracket exponent must be positive, got {a}"));
    }
    let zero = BracketReport { value: Extended::finite(0.0, 0.0), ln_tau_star: f64::NAN, scan_stable: true };
    if matches!(v, PotentialModel::Zero) || v.amplitude() == 0.0 {
        return Ok(zero);
    }
    let coarse = level_samples(v, 1);
    let fine = level_samples(v, 2);
    let (Some(c), Some(f)) = (discrete_sup(&coarse, a), discrete_sup(&fine, a)) else {
        return Ok(zero);
    };
    let cap = DIVERGENCE_CAP.ln();
    // Still growing by more than 1e−3 per decade of τ at an end of the range.
    let growing = f.2.iter().any(|&g| g > 1e-3);
    if f.0 > cap || growing {
        return Ok(BracketReport { value: Extended::divergent(f.0.exp().min(DIVERGENCE_CAP)), ln_tau_star: f64::NAN, scan_stable: true });
    }
    let scan_stable = (c.0 - f.0).abs() < 1e-3;
    let mut ln_best = f.0;
    let mut ln_tau = f.1;
    // Refine with exact superlevel measures when the maximizer sits in the core.
    let core_t: Vec<f64> = (0..=20_000).map(|k| -T_CORE + 2.0 * T_CORE * k as f64 / 20_000.0).collect();
    let core_only = v.log_vbar_r2(-T_CORE * 1.0001, (T_CORE * 1.0001).ln()) == f64::NEG_INFINITY
        && v.log_vbar_r2(T_CORE * 1.0001, (T_CORE * 1.0001).ln()) == f64::NEG_INFINITY;
    if core_only {
        let obj = |lt: f64| {
            let mu = core_level_measure(v, lt, &core_t);
            if mu > 0.0 {
                -((1.0 + a) * lt + mu.ln())
            } else {
                f64::INFINITY
            }
        };
        let lt = golden(obj, f.1 - 0.05, f.1 + 0.01);
        let val = -obj(lt);
        if val > ln_best {
            ln_best = val;
            ln_tau = lt;
        }
    }
    Ok(BracketReport { value: Extended::finite(ln_best.exp(), 1e-3 * ln_best.exp()), ln_tau_star: ln_tau, scan_stable })
}

/// All functionals of one potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub p: f64,
    pub a: f64,
    pub mixed_norm: Extended,
    pub log_local: Extended,
    pub log_global: Extended,
    pub bracket_a: Extended,
    pub l1_norm: Extended,
    pub ball1_l1: Extended,
    pub weyl: Extended,
}

pub fn functional_report(v: &PotentialModel, p: f64, a: f64) -> Result<FunctionalReport> {
    Ok(FunctionalReport {
        p,
        a,
        mixed_norm: mixed_norm(v, p)?,
        log_local: log_weighted_integral(v, Region::Ball1),
        log_global: log_weighted_integral(v, Region::Plane),
        bracket_a: bracket_a(v, a)?.value,
        l1_norm: l1_norm(v),
        ball1_l1: ball1_integral(v),
        weyl: weyl_rhs(v),
    })
}
