//! Radial magnetic fields and the scalar quantities derived from them: the
//! normalized flux α, the partial flux φ(r) = ∫₀^r B(s) s ds, the potential h
//! with h′ = φ/r, and the comparison constants μ±, m±, M±.
//!
//! Everything downstream works in the logarithmic variable t = log r, so the
//! ground-state table stores φ, h and B·r² on a uniform t-grid and
//! interpolates with cubic Hermite polynomials using the exact derivatives
//! dh/dt = φ and dφ/dt = B r².

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{gauss_legendre, integrate_pieces, integrate_to_infinity, Tolerance};

/// Integer-flux detection tolerance.
pub const INTEGER_ALPHA_TOL: f64 = 1e-9;

/// Built-in radial field profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FieldProfile {
    /// B ≡ 0.
    Zero,
    /// B(r) = a·exp(−(r/w)²), flux a w²/2.
    Gaussian { amplitude: f64, width: f64 },
    /// B(r) = a·(1 − r²/R²)² for r < R, flux a R²/6.
    CompactBump { amplitude: f64, radius: f64 },
}

impl FieldProfile {
    /// Gaussian of unit width with the given flux.
    pub fn gaussian_with_flux(alpha: f64) -> Self {
        FieldProfile::Gaussian { amplitude: 2.0 * alpha, width: 1.0 }
    }

    pub fn b(&self, r: f64) -> f64 {
        match *self {
            FieldProfile::Zero => 0.0,
            FieldProfile::Gaussian { amplitude, width } => {
                let x = r / width;
                amplitude * (-x * x).exp()
            }
            FieldProfile::CompactBump { amplitude, radius } => {
                if r >= radius {
                    0.0
                } else {
                    let q = 1.0 - (r / radius).powi(2);
                    amplitude * q * q
                }
            }
        }
    }

    /// B(e^t)·e^{2t}, evaluated without forming r when t is extreme.
    pub fn b_r2(&self, t: f64) -> f64 {
        match *self {
            FieldProfile::Zero => 0.0,
            FieldProfile::Gaussian { amplitude, width } => {
                if t == f64::NEG_INFINITY {
                    return 0.0;
                }
                let u = 2.0 * (t - width.ln());
                if u > 1400.0 {
                    return 0.0;
                }
                amplitude * (2.0 * t - u.exp()).exp()
            }
            FieldProfile::CompactBump { amplitude, radius } => {
                let lr = radius.ln();
                if t >= lr {
                    0.0
                } else {
                    let q = 1.0 - (2.0 * (t - lr)).exp();
                    amplitude * q * q * (2.0 * t).exp()
                }
            }
        }
    }

    /// Points where the profile is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            FieldProfile::CompactBump { radius, .. } => vec![radius],
            _ => Vec::new(),
        }
    }

    /// Radius beyond which |B| is below 1e−18 of its scale (or exactly zero).
    pub fn support_radius(&self) -> f64 {
        match *self {
            FieldProfile::Zero => 0.0,
            FieldProfile::Gaussian { amplitude, width } => {
                width * (41.5 + amplitude.abs().max(1.0).ln()).sqrt()
            }
            FieldProfile::CompactBump { radius, .. } => radius,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            FieldProfile::Zero => Ok(()),
            FieldProfile::Gaussian { amplitude, width } => {
                if !amplitude.is_finite() || !(width > 0.0 && width.is_finite()) {
                    return domain(format!("gaussian field needs finite amplitude and width > 0, got ({amplitude}, {width})"));
                }
                Ok(())
            }
            FieldProfile::CompactBump { amplitude, radius } => {
                if !amplitude.is_finite() || !(radius > 0.0 && radius.is_finite()) {
                    return domain(format!("compact bump needs finite amplitude and radius > 0, got ({amplitude}, {radius})"));
                }
                Ok(())
            }
        }
    }

    /// Parses `zero`, `gaussian:alpha=0.3`, `gaussian:amplitude=2,width=1`,
    /// `bump:alpha=1,radius=2` or `bump:amplitude=6,radius=1`.
    pub fn parse_inline(spec: &str) -> Result<Self> {
        let (name, args) = split_inline(spec)?;
        let get = |k: &str| args.iter().find(|(key, _)| key == k).map(|(_, v)| *v);
        let known = |allowed: &[&str]| -> Result<()> {
            for (k, _) in &args {
                if !allowed.contains(&k.as_str()) {
                    return Err(Error::Config(format!("unknown field parameter `{k}` in `{spec}`")));
                }
            }
            Ok(())
        };
        let profile = match name.as_str() {
            "zero" | "none" => {
                known(&[])?;
                FieldProfile::Zero
            }
            "gaussian" => {
                known(&["alpha", "amplitude", "width"])?;
                let width = get("width").unwrap_or(1.0);
                match (get("alpha"), get("amplitude")) {
                    (Some(a), None) => FieldProfile::Gaussian { amplitude: 2.0 * a / (width * width), width },
                    (None, Some(amp)) => FieldProfile::Gaussian { amplitude: amp, width },
                    _ => return Err(Error::Config(format!("`{spec}`: give exactly one of alpha, amplitude"))),
                }
            }
            "bump" | "compact_bump" => {
                known(&["alpha", "amplitude", "radius"])?;
                let radius = get("radius").unwrap_or(1.0);
                match (get("alpha"), get("amplitude")) {
                    (Some(a), None) => FieldProfile::CompactBump { amplitude: 6.0 * a / (radius * radius), radius },
                    (None, Some(amp)) => FieldProfile::CompactBump { amplitude: amp, radius },
                    _ => return Err(Error::Config(format!("`{spec}`: give exactly one of alpha, amplitude"))),
                }
            }
            other => return Err(Error::Config(format!("unknown field type `{other}`"))),
        };
        profile.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(profile)
    }
}

pub(crate) fn split_inline(spec: &str) -> Result<(String, Vec<(String, f64)>)> {
    let spec = spec.trim();
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n, r),
        None => (spec, ""),
    };
    let mut args = Vec::new();
    for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value in `{part}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("`{v}` is not a number in `{spec}`")))?;
        args.push((k.trim().to_string(), v));
    }
    Ok((name.trim().to_ascii_lowercase(), args))
}

/// A radial field with its flux.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldModel {
    pub profile: FieldProfile,
    pub r_support: f64,
    pub alpha: f64,
    pub is_integer_alpha: bool,
}

impl FieldModel {
    pub fn new(profile: FieldProfile) -> Result<Self> {
        profile.validate()?;
        let alpha = flux(&profile)?;
        let nearest = alpha.round();
        let is_integer_alpha = (alpha - nearest).abs() <= INTEGER_ALPHA_TOL;
        if !is_integer_alpha && (alpha - nearest).abs() < 1e-6 {
            log::warn!("flux {alpha} is within 1e-6 of an integer but treated as non-integer");
        }
        Ok(FieldModel { r_support: profile.support_radius(), profile, alpha, is_integer_alpha })
    }

    pub fn zero() -> Self {
        FieldModel { profile: FieldProfile::Zero, r_support: 0.0, alpha: 0.0, is_integer_alpha: true }
    }

    pub fn gaussian(alpha: f64) -> Result<Self> {
        FieldModel::new(FieldProfile::gaussian_with_flux(alpha))
    }

    /// Checks |B(r)|·r^{2+ε} ≤ bound on a geometric sample of [r_support, 1e8].
    pub fn satisfies_decay(&self, eps: f64, bound: f64) -> bool {
        let r0 = self.r_support.max(1e-6);
        (0..=200).all(|k| {
            let r = r0 * (1e8 / r0).powf(k as f64 / 200.0);
            self.profile.b(r).abs() * r.powf(2.0 + eps) <= bound
        })
    }
}

/// Normalized flux ∫₀^∞ B(r) r dr.
pub fn flux(profile: &FieldProfile) -> Result<f64> {
    if let FieldProfile::Zero = profile {
        return Ok(0.0);
    }
    let support = profile.support_radius();
    let mut pts = vec![0.0];
    for b in profile.breakpoints() {
        if b > 0.0 && b < support {
            pts.push(b);
        }
    }
    pts.push(support);
    let tol = Tolerance::rel(1e-11).with_abs(1e-300);
    let core = integrate_pieces(|r| profile.b(r) * r, &pts, tol)?;
    let tail = integrate_to_infinity(|r| profile.b(r) * r, support, Tolerance::rel(1e-9).with_abs(1e-30))?;
    Ok(core.value + tail.value)
}

/// m(α) = max{1 + ⌊α⌋, 2}.
pub fn m_alpha(alpha: f64) -> u32 {
    assert!(alpha >= 0.0, "m_alpha needs alpha >= 0");
    // A flux within the integer tolerance counts as that integer.
    (1 + (alpha + INTEGER_ALPHA_TOL).floor() as u32).max(2)
}

const TABLE_T_MIN: f64 = -23.025_850_929_940_457; // log 1e-10
const TABLE_T_MAX: f64 = 36.841_361_487_904_734; // log 1e16
const TABLE_PER_DECADE: f64 = 1000.0;

/// Tabulated φ, h, B r² in t = log r, plus the comparison constants.
#[derive(Debug, Clone)]
pub struct GroundStateData {
    pub field: FieldModel,
    pub alpha: f64,
    /// C in h(r) = ∫₀^r φ(s)/s ds − C.
    pub normalization: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub m_plus: f64,
    pub m_minus: f64,
    pub big_m_plus: f64,
    pub big_m_minus: f64,
    t0: f64,
    dt: f64,
    phi: Vec<f64>,
    h: Vec<f64>,
    br2: Vec<f64>,
    b0: f64,
}

/// Builds the ground-state table with the default comparison grid of 4000 points.
pub fn build_ground_state(field: &FieldModel) -> Result<GroundStateData> {
    build_ground_state_with(field, 4000)
}

pub fn build_ground_state_with(field: &FieldModel, ratio_points: usize) -> Result<GroundStateData> {
    let profile = &field.profile;
    let cells = ((TABLE_T_MAX - TABLE_T_MIN) / std::f64::consts::LN_10 * TABLE_PER_DECADE).ceil() as usize;
    let dt = (TABLE_T_MAX - TABLE_T_MIN) / cells as f64;
    let (gx, gw) = gauss_legendre(8);
    let breaks: Vec<f64> = profile.breakpoints().iter().map(|b| b.ln()).collect();

    let b0 = profile.b(0.0);
    let mut phi = Vec::with_capacity(cells + 1);
    let mut h = Vec::with_capacity(cells + 1);
    let mut br2 = Vec::with_capacity(cells + 1);
    // Below the table φ ≈ B(0) r²/2 and ∫φ dt ≈ φ/2.
    let r0sq = (2.0 * TABLE_T_MIN).exp();
    let mut cur_phi = 0.5 * b0 * r0sq;
    let mut cur_h = 0.5 * cur_phi;
    phi.push(cur_phi);
    h.push(cur_h);
    br2.push(profile.b_r2(TABLE_T_MIN));
    for i in 0..cells {
        let a = TABLE_T_MIN + i as f64 * dt;
        let b = a + dt;
        let mut pieces = vec![a];
        pieces.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
        pieces.push(b);
        let (mut d_phi, mut d_h) = (0.0, 0.0);
        for w in pieces.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, wt) in gx.iter().zip(&gw) {
                let tau = mid + half * x;
                let f = profile.b_r2(tau) * wt * half;
                d_phi += f;
                d_h += (b - tau) * f;
            }
        }
        cur_h += cur_phi * dt + d_h;
        cur_phi += d_phi;
        phi.push(cur_phi);
        h.push(cur_h);
        br2.push(profile.b_r2(b));
    }
    let alpha = field.alpha;
    // h(t) − α log(1 + e^t) → 0 fixes the constant; at the table end the
    // remainder α log(1 + e^{−t}) is below 1e−15 relative.
    let normalization = cur_h - alpha * softplus(TABLE_T_MAX);
    for v in &mut h {
        *v -= normalization;
    }
    let mut gs = GroundStateData {
        field: field.clone(),
        alpha,
        normalization,
        mu_plus: 1.0,
        mu_minus: 1.0,
        m_plus: 1.0,
        m_minus: 1.0,
        big_m_plus: 1.0,
        big_m_minus: 1.0,
        t0: TABLE_T_MIN,
        dt,
        phi,
        h,
        br2,
        b0,
    };
    if (cur_phi - alpha).abs() > 1e-8 * alpha.abs().max(1.0) {
        return Err(Error::Integration(format!(
            "cumulative flux {cur_phi} disagrees with quadrature flux {alpha}"
        )));
    }
    gs.compute_ratios(ratio_points);
    Ok(gs)
}

/// log(1 + e^t) without overflow.
pub fn softplus(t: f64) -> f64 {
    if t > 30.0 {
        t + (-t).exp()
    } else {
        t.exp().ln_1p()
    }
}

fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, dt: f64, u: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * y0
        + (u3 - 2.0 * u2 + u) * dt * d0
        + (-2.0 * u3 + 3.0 * u2) * y1
        + (u3 - u2) * dt * d1
}

impl GroundStateData {
    fn t_max(&self) -> f64 {
        self.t0 + self.dt * (self.phi.len() - 1) as f64
    }

    fn cell(&self, t: f64) -> (usize, f64) {
        let x = (t - self.t0) / self.dt;
        let i = (x.floor() as usize).min(self.phi.len() - 2);
        (i, x - i as f64)
    }

    /// B(e^t) e^{2t}, exact from the profile.
    pub fn b_r2(&self, t: f64) -> f64 {
        self.field.profile.b_r2(t)
    }

    /// φ at r = e^t.
    pub fn phi_t(&self, t: f64) -> f64 {
        if t <= self.t0 {
            if t == f64::NEG_INFINITY {
                return 0.0;
            }
            return 0.5 * self.b0 * (2.0 * t).exp();
        }
        if t >= self.t_max() {
            return self.alpha;
        }
        let (i, u) = self.cell(t);
        hermite(self.phi[i], self.br2[i], self.phi[i + 1], self.br2[i + 1], self.dt, u)
    }

    /// h at r = e^t.
    pub fn h_t(&self, t: f64) -> f64 {
        if t <= self.t0 {
            if t == f64::NEG_INFINITY {
                return -self.normalization;
            }
            return 0.25 * self.b0 * (2.0 * t).exp() - self.normalization;
        }
        if t >= self.t_max() {
            return self.alpha * softplus(t);
        }
        let (i, u) = self.cell(t);
        hermite(self.h[i], self.phi[i], self.h[i + 1], self.phi[i + 1], self.dt, u)
    }

    /// h(e^t) − α t, finite as t → +∞ (limit 0).
    pub fn h_minus_alpha_t(&self, t: f64) -> f64 {
        if t >= self.t_max() {
            if t == f64::INFINITY {
                return 0.0;
            }
            return self.alpha * (-t).exp().ln_1p();
        }
        self.h_t(t) - self.alpha * t
    }

    pub fn h(&self, r: f64) -> f64 {
        self.h_t(r.ln())
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.phi_t(r.ln())
    }

    /// log of the ground-state weight: 2mt − 2h for spin minus, −2mt + 2h for
    /// spin plus, stable for |t| up to ∞.
    pub fn log_gs_weight(&self, minus: bool, m: f64, t: f64) -> f64 {
        let sign = if minus { 1.0 } else { -1.0 };
        let v = if t <= 0.0 {
            2.0 * lin(m, t) - 2.0 * self.h_t(t)
        } else {
            2.0 * lin(m - self.alpha, t) - 2.0 * self.h_minus_alpha_t(t)
        };
        sign * v
    }

    /// log of the comparison weight r^{±2m}(1+r)^{∓2α} used in the sandwich test.
    pub fn log_comparison_weight(&self, minus: bool, m: f64, t: f64) -> f64 {
        let sign = if minus { 1.0 } else { -1.0 };
        let v = if t <= 0.0 {
            2.0 * lin(m, t) - 2.0 * self.alpha * softplus(t)
        } else {
            2.0 * lin(m - self.alpha, t) - 2.0 * self.alpha * (-t).exp().ln_1p()
        };
        sign * v
    }

    /// ln(e^{h}/(1+r)^α) at r = e^t.
    fn log_ratio(&self, t: f64) -> f64 {
        if t <= 0.0 {
            self.h_t(t) - self.alpha * softplus(t)
        } else {
            self.h_minus_alpha_t(t) - self.alpha * (-t).exp().ln_1p()
        }
    }

    fn compute_ratios(&mut self, points: usize) {
        let (lo, hi) = (1e-6f64.ln(), 1e6f64.ln());
        let step = (hi - lo) / (points - 1) as f64;
        let vals: Vec<f64> = (0..points).map(|k| self.log_ratio(lo + k as f64 * step)).collect();
        // Limits r → 0 and r → ∞ belong to the inf/sup as well.
        let mut min = self.log_ratio(f64::NEG_INFINITY).min(0.0);
        let mut max = self.log_ratio(f64::NEG_INFINITY).max(0.0);
        for k in 0..points {
            let v = vals[k];
            let interior = k > 0 && k + 1 < points;
            if interior && v <= vals[k - 1] && v <= vals[k + 1] {
                let t = golden(|t| self.log_ratio(t), lo + (k - 1) as f64 * step, lo + (k + 1) as f64 * step);
                min = min.min(self.log_ratio(t));
            }
            if interior && v >= vals[k - 1] && v >= vals[k + 1] {
                let t = golden(|t| -self.log_ratio(t), lo + (k - 1) as f64 * step, lo + (k + 1) as f64 * step);
                max = max.max(self.log_ratio(t));
            }
            min = min.min(v);
            max = max.max(v);
        }
        self.mu_plus = min.exp();
        self.m_plus = max.exp();
        self.mu_minus = (-max).exp();
        self.m_minus = (-min).exp();
        self.big_m_plus = self.m_plus / self.mu_plus;
        self.big_m_minus = self.m_minus / self.mu_minus;
    }
}

/// c·t with the convention 0·∞ = 0.
pub(crate) fn lin(c: f64, t: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * t
    }
}

/// Golden-section minimizer of a unimodal function on [a, b].
pub(crate) fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}
