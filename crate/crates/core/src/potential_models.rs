//! Nonnegative potentials: radial built-ins, the singular family V_σ, the
//! slowly decaying family W_σ, separable products f(r)g(θ) and an off-center
//! disk used to probe angular sensitivity.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::field_models::split_inline;
use crate::quadrature::{integrate, Tolerance};

const E2: f64 = 7.389_056_098_930_65;

/// r^{−2}|log r|^{−2}(log|log r|)^{−1/σ} for r < e^{−2}, else 0.
pub fn v_sigma(sigma: f64, r: f64) -> Result<f64> {
    if !(sigma > 1.0) {
        return domain(format!("sigma must exceed 1, got {sigma}"));
    }
    if !(r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    Ok(if r < 1.0 / E2 { (-2.0 * r.ln() + log_sigma_factor(sigma, (-r.ln()).ln())).exp() } else { 0.0 })
}

/// r^{−2}(log r)^{−2}(log log r)^{−1/σ} for r > e², else 0.
pub fn w_sigma(sigma: f64, r: f64) -> Result<f64> {
    if !(sigma > 1.0) {
        return domain(format!("sigma must exceed 1, got {sigma}"));
    }
    if !(r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    Ok(if r > E2 { (-2.0 * r.ln() + log_sigma_factor(sigma, r.ln().ln())).exp() } else { 0.0 })
}

/// ln(|t|^{−2}(log|t|)^{−1/σ}) with s = log|t|.
fn log_sigma_factor(sigma: f64, s: f64) -> f64 {
    -2.0 * s - s.ln() / sigma
}

/// Angular factor g(θ) = 1 + a·cos(kθ); unit mean by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularPart {
    pub amplitude: f64,
    pub harmonic: u32,
}

impl AngularPart {
    pub fn value(&self, theta: f64) -> f64 {
        1.0 + self.amplitude * (self.harmonic as f64 * theta).cos()
    }

    /// Mean over [0, 2π) by the periodic trapezoid rule.
    pub fn mean(&self) -> f64 {
        let n = 8 * (self.harmonic as usize + 2);
        let h = 2.0 * std::f64::consts::PI / n as f64;
        (0..n).map(|j| self.value(j as f64 * h)).sum::<f64>() / n as f64
    }

    /// (∫₀^{2π} g^p dθ)^{1/p}.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if self.amplitude == 0.0 || self.harmonic == 0 {
            return self.value(0.0) * (2.0 * std::f64::consts::PI).powf(1.0 / p);
        }
        // g is 2π/k periodic; integrate one period and multiply.
        let k = self.harmonic as f64;
        let period = 2.0 * std::f64::consts::PI / k;
        let q = integrate(|th| self.value(th).max(0.0).powf(p), 0.0, period, Tolerance::rel(1e-13).with_abs(1e-300))
            .map(|q| q.value)
            .unwrap_or(f64::NAN);
        (k * q).powf(1.0 / p)
    }
}

/// Where a potential lives, used for tail bounds and divergence detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum DecayClass {
    Zero,
    /// Supported in r ≤ radius.
    Compact { radius: f64 },
    /// Gaussian-type decay at infinity with the given length scale.
    Integrable { scale: f64 },
    VSigma { sigma: f64 },
    WSigma { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PotentialModel {
    Zero,
    IndicatorDisk {
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
    },
    VSigma {
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    WSigma {
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Separable {
        radial: Box<PotentialModel>,
        angular: AngularPart,
    },
    /// Indicator of the disk of radius `radius` centred at distance `offset` from the origin.
    OffsetDisk {
        offset: f64,
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl PotentialModel {
    pub fn disk(radius: f64) -> Self {
        PotentialModel::IndicatorDisk { radius, amplitude: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(m));
        match self {
            PotentialModel::Zero => Ok(()),
            PotentialModel::IndicatorDisk { radius, amplitude } => {
                if !(*radius > 0.0 && radius.is_finite()) || !(*amplitude >= 0.0 && amplitude.is_finite()) {
                    return bad(format!("disk needs radius > 0 and amplitude >= 0, got ({radius}, {amplitude})"));
                }
                Ok(())
            }
            PotentialModel::Gaussian { amplitude, width } => {
                if !(*width > 0.0 && width.is_finite()) || !(*amplitude >= 0.0 && amplitude.is_finite()) {
                    return bad(format!("gaussian potential needs width > 0 and amplitude >= 0, got ({width}, {amplitude})"));
                }
                Ok(())
            }
            PotentialModel::VSigma { sigma, amplitude } | PotentialModel::WSigma { sigma, amplitude } => {
                if !(*sigma > 1.0 && sigma.is_finite()) || !(*amplitude >= 0.0 && amplitude.is_finite()) {
                    return bad(format!("sigma must exceed 1 and amplitude be >= 0, got ({sigma}, {amplitude})"));
                }
                Ok(())
            }
            PotentialModel::Separable { radial, angular } => {
                if matches!(**radial, PotentialModel::Separable { .. } | PotentialModel::OffsetDisk { .. }) {
                    return bad("separable radial part must itself be radial".into());
                }
                if angular.amplitude.abs() > 1.0 || !angular.amplitude.is_finite() {
                    return bad(format!("angular amplitude {} would make V negative", angular.amplitude));
                }
                radial.validate()
            }
            PotentialModel::OffsetDisk { offset, radius, amplitude } => {
                if !(*offset >= 0.0 && *radius > 0.0 && *amplitude >= 0.0) || !(offset + radius).is_finite() {
                    return bad("offset disk needs offset >= 0, radius > 0, amplitude >= 0".into());
                }
                Ok(())
            }
        }
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self, PotentialModel::Separable { .. } | PotentialModel::OffsetDisk { .. })
    }

    pub fn singular_at_origin(&self) -> bool {
        match self {
            PotentialModel::VSigma { .. } => true,
            PotentialModel::Separable { radial, .. } => radial.singular_at_origin(),
            _ => false,
        }
    }

    pub fn decay_class(&self) -> DecayClass {
        match *self {
            PotentialModel::Zero => DecayClass::Zero,
            PotentialModel::IndicatorDisk { radius, amplitude } => {
                if amplitude == 0.0 {
                    DecayClass::Zero
                } else {
                    DecayClass::Compact { radius }
                }
            }
            PotentialModel::Gaussian { width, amplitude } => {
                if amplitude == 0.0 {
                    DecayClass::Zero
                } else {
                    DecayClass::Integrable { scale: width }
                }
            }
            PotentialModel::VSigma { sigma, .. } => DecayClass::VSigma { sigma },
            PotentialModel::WSigma { sigma, .. } => DecayClass::WSigma { sigma },
            PotentialModel::Separable { ref radial, .. } => radial.decay_class(),
            PotentialModel::OffsetDisk { offset, radius, .. } => DecayClass::Compact { radius: offset + radius },
        }
    }

    /// Overall multiplicative amplitude of the model.
    pub fn amplitude(&self) -> f64 {
        match self {
            PotentialModel::Zero => 0.0,
            PotentialModel::IndicatorDisk { amplitude, .. }
            | PotentialModel::Gaussian { amplitude, .. }
            | PotentialModel::VSigma { amplitude, .. }
            | PotentialModel::WSigma { amplitude, .. }
            | PotentialModel::OffsetDisk { amplitude, .. } => *amplitude,
            PotentialModel::Separable { radial, .. } => radial.amplitude(),
        }
    }

    /// The same model multiplied by `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            PotentialModel::Zero => {}
            PotentialModel::IndicatorDisk { amplitude, .. }
            | PotentialModel::Gaussian { amplitude, .. }
            | PotentialModel::VSigma { amplitude, .. }
            | PotentialModel::WSigma { amplitude, .. }
            | PotentialModel::OffsetDisk { amplitude, .. } => *amplitude *= c,
            PotentialModel::Separable { radial, .. } => **radial = radial.scaled(c),
        }
        out
    }

    /// V(r, θ).
    pub fn value(&self, r: f64, theta: f64) -> f64 {
        match self {
            PotentialModel::Separable { radial, angular } => radial.radial_value(r) * angular.value(theta),
            PotentialModel::OffsetDisk { offset, radius, amplitude } => {
                let (x, y) = (r * theta.cos() - offset, r * theta.sin());
                if x * x + y * y < radius * radius {
                    *amplitude
                } else {
                    0.0
                }
            }
            _ => self.radial_value(r),
        }
    }

    fn radial_value(&self, r: f64) -> f64 {
        match *self {
            PotentialModel::Zero => 0.0,
            PotentialModel::IndicatorDisk { radius, amplitude } => {
                if r < radius {
                    amplitude
                } else {
                    0.0
                }
            }
            PotentialModel::Gaussian { amplitude, width } => amplitude * (-(r / width).powi(2)).exp(),
            PotentialModel::VSigma { sigma, amplitude } => amplitude * v_sigma(sigma, r).unwrap_or(0.0),
            PotentialModel::WSigma { sigma, amplitude } => amplitude * w_sigma(sigma, r).unwrap_or(0.0),
            PotentialModel::Separable { .. } | PotentialModel::OffsetDisk { .. } => self.v_bar(r),
        }
    }

    /// Angular half-width of the off-center disk seen from radius r, in [0, π].
    fn offset_half_width(offset: f64, radius: f64, r: f64) -> f64 {
        if offset == 0.0 {
            return if r < radius { std::f64::consts::PI } else { 0.0 };
        }
        let c = (r * r + offset * offset - radius * radius) / (2.0 * r * offset);
        if c <= -1.0 {
            std::f64::consts::PI
        } else if c >= 1.0 {
            0.0
        } else {
            c.acos()
        }
    }

    /// Angular mean 𝒱(r) = (1/2π)∫V(r, θ)dθ.
    pub fn v_bar(&self, r: f64) -> f64 {
        match self {
            PotentialModel::Separable { radial, angular } => radial.radial_value(r) * angular.mean(),
            PotentialModel::OffsetDisk { offset, radius, amplitude } => {
                amplitude * Self::offset_half_width(*offset, *radius, r) / std::f64::consts::PI
            }
            _ => self.radial_value(r),
        }
    }

    /// (∫₀^{2π} V(r, θ)^p dθ)^{1/p}, exact for every built-in.
    pub fn angular_lp(&self, r: f64, p: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        match self {
            PotentialModel::Separable { radial, angular } => {
                let f = radial.radial_value(r);
                if f == 0.0 {
                    0.0
                } else {
                    f * angular.lp_norm(p)
                }
            }
            PotentialModel::OffsetDisk { offset, radius, amplitude } => {
                amplitude * (2.0 * Self::offset_half_width(*offset, *radius, r)).powf(1.0 / p)
            }
            _ => self.radial_value(r) * two_pi.powf(1.0 / p),
        }
    }

    /// ln(𝒱(r) r²) at a point given by t = log r and s = log|t|.
    ///
    /// `t` may be ±∞ when |log r| itself overflows; `s` then carries the
    /// position. Returns −∞ where 𝒱 vanishes.
    pub fn log_vbar_r2(&self, t: f64, s: f64) -> f64 {
        let neg = f64::NEG_INFINITY;
        match self {
            PotentialModel::Zero => neg,
            PotentialModel::IndicatorDisk { radius, amplitude } => {
                if t < radius.ln() && *amplitude > 0.0 {
                    amplitude.ln() + 2.0 * t
                } else {
                    neg
                }
            }
            PotentialModel::Gaussian { amplitude, width } => {
                if *amplitude == 0.0 || t > 350.0 {
                    return neg;
                }
                amplitude.ln() + 2.0 * t - (2.0 * (t - width.ln())).exp()
            }
            PotentialModel::VSigma { sigma, amplitude } => {
                if t < -2.0 && *amplitude > 0.0 {
                    amplitude.ln() + log_sigma_factor(*sigma, s)
                } else {
                    neg
                }
            }
            PotentialModel::WSigma { sigma, amplitude } => {
                if t > 2.0 && *amplitude > 0.0 {
                    amplitude.ln() + log_sigma_factor(*sigma, s)
                } else {
                    neg
                }
            }
            PotentialModel::Separable { radial, angular } => radial.log_vbar_r2(t, s) + angular.mean().ln(),
            PotentialModel::OffsetDisk { offset, radius, .. } => {
                if t > (offset + radius).ln() || t == neg {
                    return neg;
                }
                let r = t.exp();
                let v = self.v_bar(r);
                if v > 0.0 {
                    v.ln() + 2.0 * t
                } else {
                    neg
                }
            }
        }
    }

    /// ln(𝒱(r) r² (log r)²), exact for the logarithmic families when s is huge.
    pub fn log_vbar_r2_t2(&self, t: f64, s: f64) -> f64 {
        match self {
            PotentialModel::VSigma { sigma, amplitude } if t < -2.0 && *amplitude > 0.0 => {
                amplitude.ln() - s.ln() / sigma
            }
            PotentialModel::WSigma { sigma, amplitude } if t > 2.0 && *amplitude > 0.0 => {
                amplitude.ln() - s.ln() / sigma
            }
            PotentialModel::Separable { radial, angular } if matches!(**radial, PotentialModel::VSigma { .. } | PotentialModel::WSigma { .. }) => {
                radial.log_vbar_r2_t2(t, s) + angular.mean().ln()
            }
            _ => self.log_vbar_r2(t, s) + 2.0 * s,
        }
    }

    /// Points in t = log r where 𝒱 is not smooth.
    pub fn t_breakpoints(&self) -> Vec<f64> {
        match self {
            PotentialModel::IndicatorDisk { radius, .. } => vec![radius.ln()],
            PotentialModel::VSigma { .. } => vec![-2.0],
            PotentialModel::WSigma { .. } => vec![2.0],
            PotentialModel::Separable { radial, .. } => radial.t_breakpoints(),
            PotentialModel::OffsetDisk { offset, radius, .. } => {
                let mut v = Vec::new();
                if offset > radius {
                    v.push((offset - radius).ln());
                } else if radius > offset {
                    v.push((radius - offset).ln());
                }
                v.push((offset + radius).ln());
                v
            }
            _ => Vec::new(),
        }
    }

    /// Parses `zero`, `disk:r=1[,amp=1]`, `gaussian:amp=1,width=1`,
    /// `v_sigma:sigma=2[,amp=1]`, `w_sigma:sigma=2`,
    /// `offset_disk:d=2,r=1`, `separable:r=1,a=0.5,k=1` (disk times 1 + a cos kθ).
    pub fn parse_inline(spec: &str) -> Result<Self> {
        let (name, args) = split_inline(spec)?;
        let get = |keys: &[&str]| args.iter().find(|(k, _)| keys.contains(&k.as_str())).map(|(_, v)| *v);
        let allowed: &[&str] = match name.as_str() {
            "zero" | "none" => &[],
            "disk" | "indicator_disk" => &["r", "radius", "amp", "amplitude"],
            "gaussian" => &["amp", "amplitude", "width", "w"],
            "v_sigma" | "w_sigma" => &["sigma", "amp", "amplitude"],
            "offset_disk" => &["d", "offset", "r", "radius", "amp", "amplitude"],
            "separable" => &["r", "radius", "amp", "amplitude", "a", "k"],
            other => return Err(Error::Config(format!("unknown potential type `{other}`"))),
        };
        for (k, _) in &args {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown potential parameter `{k}` in `{spec}`")));
            }
        }
        let amp = get(&["amp", "amplitude"]).unwrap_or(1.0);
        let need = |keys: &[&str], what: &str| {
            get(keys).ok_or_else(|| Error::Config(format!("`{spec}` is missing `{what}`")))
        };
        let model = match name.as_str() {
            "zero" | "none" => PotentialModel::Zero,
            "disk" | "indicator_disk" => PotentialModel::IndicatorDisk { radius: get(&["r", "radius"]).unwrap_or(1.0), amplitude: amp },
            "gaussian" => PotentialModel::Gaussian { amplitude: amp, width: get(&["width", "w"]).unwrap_or(1.0) },
            "v_sigma" => PotentialModel::VSigma { sigma: need(&["sigma"], "sigma")?, amplitude: amp },
            "w_sigma" => PotentialModel::WSigma { sigma: need(&["sigma"], "sigma")?, amplitude: amp },
            "offset_disk" => PotentialModel::OffsetDisk {
                offset: need(&["d", "offset"], "d")?,
                radius: get(&["r", "radius"]).unwrap_or(1.0),
                amplitude: amp,
            },
            _ => {
                let k = get(&["k"]).unwrap_or(1.0);
                if k < 0.0 || k.fract() != 0.0 {
                    return Err(Error::Config(format!("harmonic k must be a nonnegative integer in `{spec}`")));
                }
                PotentialModel::Separable {
                    radial: Box::new(PotentialModel::IndicatorDisk { radius: get(&["r", "radius"]).unwrap_or(1.0), amplitude: amp }),
                    angular: AngularPart { amplitude: get(&["a"]).unwrap_or(0.0), harmonic: k as u32 },
                }
            }
        };
        model.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(model)
    }
}

/// The angular mean of a potential, as a radial function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularAverage {
    pub model: PotentialModel,
}

impl AngularAverage {
    pub fn v_bar(&self, r: f64) -> f64 {
        self.model.v_bar(r)
    }

    /// Radial indicator of (0, R) as an angular average, common in tests.
    pub fn indicator(radius: f64) -> Self {
        AngularAverage { model: PotentialModel::disk(radius) }
    }
}

pub fn angular_average(v: &PotentialModel) -> AngularAverage {
    AngularAverage { model: v.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn v_sigma_examples() {
        assert_eq!(v_sigma(2.0, (-2f64).exp()).unwrap(), 0.0);
        let e2: f64 = E2;
        let r = (-e2).exp();
        let expected = (2.0 * e2 - 4.0).exp() * 2f64.powf(-0.5);
        assert!((v_sigma(2.0, r).unwrap() / expected - 1.0).abs() < 1e-12);
        assert_eq!(v_sigma(1.5, 0.5).unwrap(), 0.0);
        assert!(v_sigma(1.0, 0.01).is_err());
    }

    #[test]
    fn w_sigma_examples() {
        assert_eq!(w_sigma(2.0, E2).unwrap(), 0.0);
        let r = E2.exp();
        let expected = (-2.0 * E2 - 4.0).exp() * 2f64.powf(-0.5);
        assert!((w_sigma(2.0, r).unwrap() / expected - 1.0).abs() < 1e-12);
        assert_eq!(w_sigma(3.0, 1.0).unwrap(), 0.0);
        assert!(w_sigma(0.5, 100.0).is_err());
    }

    #[test]
    fn angular_average_examples() {
        let disk = PotentialModel::disk(1.0);
        assert_eq!(angular_average(&disk).v_bar(0.5), 1.0);
        assert_eq!(angular_average(&disk).v_bar(1.5), 0.0);
        let sep = PotentialModel::Separable {
            radial: Box::new(PotentialModel::disk(1.0)),
            angular: AngularPart { amplitude: 1.0, harmonic: 1 },
        };
        assert!((angular_average(&sep).v_bar(0.5) - 1.0).abs() < 1e-12);
        assert_eq!(angular_average(&sep).v_bar(1.5), 0.0);
        assert_eq!(angular_average(&PotentialModel::Zero).v_bar(0.3), 0.0);
    }

    #[test]
    fn offset_disk_mean_matches_direct_angular_quadrature() {
        let v = PotentialModel::OffsetDisk { offset: 2.0, radius: 1.0, amplitude: 1.0 };
        for &r in &[0.5, 1.2, 2.0, 2.9, 3.5] {
            let n = 200_000;
            let h = 2.0 * std::f64::consts::PI / n as f64;
            let direct: f64 = (0..n).map(|j| v.value(r, (j as f64 + 0.5) * h)).sum::<f64>() / n as f64;
            assert!((direct - v.v_bar(r)).abs() < 1e-4, "r={r}");
        }
    }

    #[test]
    fn log_form_agrees_with_direct_values() {
        let models = [
            PotentialModel::disk(1.3),
            PotentialModel::Gaussian { amplitude: 2.0, width: 0.7 },
            PotentialModel::VSigma { sigma: 2.0, amplitude: 1.5 },
            PotentialModel::WSigma { sigma: 3.0, amplitude: 1.0 },
            PotentialModel::OffsetDisk { offset: 2.0, radius: 1.0, amplitude: 1.0 },
        ];
        for m in &models {
            for &t in &[-40.0, -5.0, -1.0, 0.1, 0.9, 3.0, 30.0] {
                let r: f64 = (t as f64).exp();
                let direct = m.v_bar(r) * r * r;
                let lf = m.log_vbar_r2(t, t.abs().ln()).exp();
                assert!((lf - direct).abs() <= 1e-12 * direct.max(1e-300), "{m:?} t={t}");
            }
        }
        // Far inner region: only the s coordinate is available.
        let v = PotentialModel::VSigma { sigma: 2.0, amplitude: 1.0 };
        let s = 5000.0;
        assert!((v.log_vbar_r2(f64::NEG_INFINITY, s) - (-2.0 * s - 0.5 * s.ln())).abs() < 1e-9);
    }

    #[test]
    fn inline_and_json() {
        assert_eq!(PotentialModel::parse_inline("disk:r=1").unwrap(), PotentialModel::disk(1.0));
        assert_eq!(
            PotentialModel::parse_inline("w_sigma:sigma=2").unwrap(),
            PotentialModel::WSigma { sigma: 2.0, amplitude: 1.0 }
        );
        assert!(PotentialModel::parse_inline("v_sigma:sigma=1").is_err());
        assert!(PotentialModel::parse_inline("v_sigma").is_err());
        assert!(PotentialModel::parse_inline("blob:r=1").is_err());
        let j: PotentialModel = serde_json::from_str(r#"{"type": "v_sigma", "sigma": 2}"#).unwrap();
        assert_eq!(j, PotentialModel::VSigma { sigma: 2.0, amplitude: 1.0 });
        let j: PotentialModel = serde_json::from_str(
            r#"{"type": "separable", "radial": {"type": "indicator_disk", "radius": 1}, "angular": {"amplitude": 0.5, "harmonic": 2}}"#,
        )
        .unwrap();
        assert!(!j.is_radial());
    }

    proptest! {
        #[test]
        fn averaging_is_linear(c in 0.0f64..50.0, r in 0.001f64..5.0) {
            let v = PotentialModel::Separable {
                radial: Box::new(PotentialModel::Gaussian { amplitude: 1.0, width: 1.0 }),
                angular: AngularPart { amplitude: 0.7, harmonic: 3 },
            };
            let a = angular_average(&v.scaled(c)).v_bar(r);
            let b = c * angular_average(&v).v_bar(r);
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
            prop_assert!(a >= 0.0);
        }

        #[test]
        fn lp_norm_nondecreasing_after_normalization(p in 1.05f64..6.0, a in 0.0f64..1.0) {
            // (1/2π)^{1/p}‖g‖_p is nondecreasing in p.
            let g = AngularPart { amplitude: a, harmonic: 2 };
            let two_pi = 2.0 * std::f64::consts::PI;
            let lo = g.lp_norm(p) / two_pi.powf(1.0 / p);
            let hi = g.lp_norm(p + 0.5) / two_pi.powf(1.0 / (p + 0.5));
            prop_assert!(hi >= lo - 1e-12);
        }
    }
}
