//! Birman–Schwinger kernels of the radial channel operators.
//!
//! Every kernel here acts on `L²(ℝ₊, dr)` in the reduced variable
//! `v = √r·u`, so the Birman–Schwinger operator is `√𝒱 K √𝒱` and its
//! eigenvalues above `1/λ` count the bound states of the matching channel.
//! The closed-form kernels are the `κ → 0` limits of resolvents; the
//! resolvent of the jump operator `T_m` is available at finite `κ` and as an
//! extrapolated limit.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::field_models::split_inline;
use crate::functionals::{l1_norm, log_weighted_integral, Extended, Region};
use crate::potential_models::AngularAverage;
use crate::quadrature::{gauss_legendre, integrate_pieces, Tolerance};
use crate::special_functions::{ik_log, NU_MAX};

/// Nyström and sampling window in `t = log r`.
const T_CORE: f64 = 13.815_510_557_964_274; // log 1e6
const KAPPA_MIN: f64 = 1e-6;
const KAPPA_MAX: f64 = 1e2;
const PANEL_POINTS: usize = 8;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// −√(rr′)·log max{r, r′} on (0, 1]².
    LogInterior,
    /// √(rr′)·log min{r, r′} on [1, ∞)².
    LogExterior,
    /// √(rr′)/(2α)·(min/max)^α on ℝ₊².
    MinPower { alpha: f64 },
    T0Limit { alpha: f64 },
    TAlphaLimit { alpha: f64 },
    /// (T_m + κ²)^{−1}.
    Resolvent { m: u32, alpha: f64, kappa: f64 },
}

impl KernelKind {
    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::LogInterior => "log_interior",
            KernelKind::LogExterior => "log_exterior",
            KernelKind::MinPower { .. } => "min_power",
            KernelKind::T0Limit { .. } => "t0_limit",
            KernelKind::TAlphaLimit { .. } => "t_alpha_limit",
            KernelKind::Resolvent { .. } => "resolvent",
        }
    }
}

/// A kernel together with the r-interval it lives on (the same interval in
/// both variables).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub domain: (f64, f64),
    #[serde(skip)]
    resolvent: Option<ResolventCoefs>,
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> Result<Self> {
        let check_alpha = |a: f64| {
            if a > 0.0 && a.is_finite() {
                Ok(())
            } else {
                domain(format!("kernel needs α > 0, got {a}"))
            }
        };
        let mut resolvent = None;
        let dom = match kind {
            KernelKind::LogInterior => (0.0, 1.0),
            KernelKind::LogExterior => (1.0, f64::INFINITY),
            KernelKind::MinPower { alpha } | KernelKind::T0Limit { alpha } | KernelKind::TAlphaLimit { alpha } => {
                check_alpha(alpha)?;
                (0.0, f64::INFINITY)
            }
            KernelKind::Resolvent { m, alpha, kappa } => {
                check_alpha(alpha)?;
                resolvent = Some(ResolventCoefs::new(m, alpha, kappa)?);
                (0.0, f64::INFINITY)
            }
        };
        Ok(KernelSpec { kind, domain: dom, resolvent })
    }

    pub fn symmetric(&self) -> bool {
        true
    }

    pub fn contains(&self, r: f64) -> bool {
        let (lo, hi) = self.domain;
        // (0, 1] and [1, ∞): the finite endpoint 1 belongs to the domain.
        r > 0.0 && r.is_finite() && r >= lo && r <= hi
    }

    /// The interval of `t = log r` used for discretization.
    fn t_window(&self) -> (f64, f64) {
        match self.kind {
            KernelKind::LogInterior => (-T_CORE, 0.0),
            KernelKind::LogExterior => (0.0, T_CORE),
            _ => (-T_CORE, T_CORE),
        }
    }

    pub fn eval(&self, r: f64, rp: f64) -> Result<f64> {
        if !self.contains(r) || !self.contains(rp) {
            return domain(format!(
                "({r}, {rp}) outside the {} domain ({}, {})",
                self.kind.name(),
                self.domain.0,
                self.domain.1
            ));
        }
        Ok(self.eval_unchecked(r, rp))
    }

    fn eval_unchecked(&self, r: f64, rp: f64) -> f64 {
        let (lo, hi) = if r <= rp { (r, rp) } else { (rp, r) };
        let root = (lo * hi).sqrt();
        match self.kind {
            KernelKind::LogInterior => -root * hi.ln(),
            KernelKind::LogExterior => root * lo.ln(),
            KernelKind::MinPower { alpha } => root / (2.0 * alpha) * (lo / hi).powf(alpha),
            KernelKind::T0Limit { alpha } => {
                let c = 1.0 / (2.0 * alpha);
                root * if hi <= 1.0 {
                    c - hi.ln()
                } else if lo > 1.0 {
                    c * (lo / hi).powf(alpha)
                } else {
                    c * hi.powf(-alpha)
                }
            }
            KernelKind::TAlphaLimit { alpha } => {
                let c = 1.0 / (2.0 * alpha);
                root * if hi <= 1.0 {
                    c * (lo / hi).powf(alpha)
                } else if lo > 1.0 {
                    c + lo.ln()
                } else {
                    c * lo.powf(alpha)
                }
            }
            KernelKind::Resolvent { .. } => {
                let c = self.resolvent.as_ref().expect("resolvent coefficients are built in new");
                c.eval(&c.point(lo), &c.point(hi))
            }
        }
    }

    /// K(r, r)/r, the diagonal density of the trace in `t`.
    fn diagonal_over_r(&self, r: f64) -> f64 {
        self.eval_unchecked(r, r) / r
    }

    /// Parses `log_interior`, `log_exterior`, `min_power:alpha=1`,
    /// `t0_limit:alpha=1`, `t_alpha_limit:alpha=2`,
    /// `resolvent:m=0,alpha=1,kappa=0.01`.
    pub fn parse_inline(spec: &str) -> Result<Self> {
        let (name, args) = split_inline(spec)?;
        let allowed: &[&str] = match name.as_str() {
            "log_interior" | "log_exterior" => &[],
            "min_power" | "t0_limit" | "t0" | "t_alpha_limit" | "t_alpha" => &["alpha"],
            "resolvent" => &["m", "alpha", "kappa"],
            other => return Err(Error::Config(format!("unknown kernel `{other}`"))),
        };
        for (k, _) in &args {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown kernel parameter `{k}` in `{spec}`")));
            }
        }
        let need = |key: &str| {
            args.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::Config(format!("`{spec}` is missing `{key}`")))
        };
        let kind = match name.as_str() {
            "log_interior" => KernelKind::LogInterior,
            "log_exterior" => KernelKind::LogExterior,
            "min_power" => KernelKind::MinPower { alpha: need("alpha")? },
            "t0_limit" | "t0" => KernelKind::T0Limit { alpha: need("alpha")? },
            "t_alpha_limit" | "t_alpha" => KernelKind::TAlphaLimit { alpha: need("alpha")? },
            _ => {
                let m = need("m")?;
                if m < 0.0 || m.fract() != 0.0 {
                    return Err(Error::Config(format!("m must be a nonnegative integer in `{spec}`")));
                }
                KernelKind::Resolvent { m: m as u32, alpha: need("alpha")?, kappa: need("kappa")? }
            }
        };
        KernelSpec::new(kind).map_err(|e| Error::Config(e.to_string()))
    }
}

pub fn kernel_eval(spec: &KernelSpec, r: f64, rp: f64) -> Result<f64> {
    spec.eval(r, rp)
}

/// Matching data of (T_m + κ²)^{−1}, stored as signed logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ResolventCoefs {
    m: f64,
    nu: f64,
    kappa: f64,
    ln_f: f64,
    sign_f: f64,
    ln_g: f64,
    sign_g: f64,
    ln_a: f64,
}

/// `ln I`, `ln K` of the order that applies on the side of 1 where `r` lies.
#[derive(Debug, Clone, Copy)]
struct ResolventPoint {
    r: f64,
    ln_i: f64,
    ln_k: f64,
}

impl ResolventCoefs {
    fn new(m: u32, alpha: f64, kappa: f64) -> Result<Self> {
        if !(KAPPA_MIN..=KAPPA_MAX).contains(&kappa) {
            return domain(format!("κ = {kappa} outside [{KAPPA_MIN:e}, {KAPPA_MAX:e}]"));
        }
        let mf = m as f64;
        let nu = (alpha - mf).abs();
        if mf > NU_MAX || nu > NU_MAX {
            return domain(format!("Bessel orders m = {m}, |α − m| = {nu} exceed {NU_MAX}"));
        }
        let pm = ik_log(mf, kappa);
        let pn = ik_log(nu, kappa);
        // A, B, D with the common Bessel magnitudes factored out.
        let ba = kappa * pm.i_log_deriv + alpha - kappa * pn.k_log_deriv;
        let bb = -kappa * pm.i_log_deriv - alpha + kappa * pn.i_log_deriv;
        let bd = -kappa * pm.k_log_deriv - alpha + kappa * pn.k_log_deriv;
        if !(ba > 0.0) || !ba.is_finite() {
            return Err(Error::Factorization(format!(
                "resolvent Wronskian A_{m}({kappa}) is not positive"
            )));
        }
        let ln_a = pm.ln_i + pn.ln_k + ba.ln();
        Ok(ResolventCoefs {
            m: mf,
            nu,
            kappa,
            ln_f: pm.ln_k + pn.ln_k + bd.abs().ln() - ln_a,
            sign_f: bd.signum(),
            ln_g: pm.ln_i + pn.ln_i + bb.abs().ln() - ln_a,
            sign_g: bb.signum(),
            ln_a,
        })
    }

    fn point(&self, r: f64) -> ResolventPoint {
        let order = if r <= 1.0 { self.m } else { self.nu };
        let p = ik_log(order, self.kappa * r);
        ResolventPoint { r, ln_i: p.ln_i, ln_k: p.ln_k }
    }

    /// Requires `a.r ≤ b.r`.
    fn eval(&self, a: &ResolventPoint, b: &ResolventPoint) -> f64 {
        let root = (a.r * b.r).sqrt();
        let v = if b.r <= 1.0 {
            (a.ln_i + b.ln_k).exp() + self.sign_f * (self.ln_f + a.ln_i + b.ln_i).exp()
        } else if a.r > 1.0 {
            (a.ln_i + b.ln_k).exp() + self.sign_g * (self.ln_g + a.ln_k + b.ln_k).exp()
        } else {
            (a.ln_i + b.ln_k - self.ln_a).exp()
        };
        root * v
    }
}

/// (T_m + κ²)^{−1}(r, r′) for the operator with the jump at r = 1.
pub fn resolvent_kernel(m: u32, alpha: f64, kappa: f64, r: f64, rp: f64) -> Result<f64> {
    KernelSpec::new(KernelKind::Resolvent { m, alpha, kappa })?.eval(r, rp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub error: f64,
}

/// Resolvent nodes for the κ → 0 extrapolation.
const LIMIT_KAPPAS: [f64; 4] = [1e-4, 2.154_434_690_031_884e-5, 4.641_588_833_612_779e-6, 1e-6];

/// lim_{κ→0} (T_m + κ²)^{−1}(r, r′), by cubic extrapolation over four κ.
///
/// With ν = |α − m| > 0 the corrections are powers of κ, led by κ^{min(2, 2ν)},
/// and that power is the extrapolation variable. When m = α the outer channel
/// has a zero-energy resonance and the resolvent approaches its limit only like
/// 1/log(1/κ); the variable is then ε = 1/K₀(κ).
pub fn resolvent_limit(m: u32, alpha: f64, r: f64, rp: f64) -> Result<LimitEstimate> {
    let nu = (alpha - m as f64).abs();
    let mut x = [0.0; 4];
    let mut val = [0.0; 4];
    for (j, &k) in LIMIT_KAPPAS.iter().enumerate() {
        x[j] = if nu <= RESONANCE_TOL { (-ik_log(0.0, k).ln_k).exp() } else { k.powf((2.0 * nu).min(2.0)) };
        val[j] = resolvent_kernel(m, alpha, k, r, rp)?;
    }
    let cubic = neville_at_zero(&x, &val);
    let quad = neville_at_zero(&x[1..], &val[1..]);
    Ok(LimitEstimate { value: cubic, error: (cubic - quad).abs() })
}

/// |α − m| below which the channel is treated as resonant.
const RESONANCE_TOL: f64 = 1e-9;

fn neville_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = x.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
        }
    }
    p[0]
}

/// ∫ 𝒱(r) K(r, r) dr.
pub fn bs_trace(spec: &KernelSpec, v_bar: &AngularAverage) -> Result<Extended> {
    let v = &v_bar.model;
    let scale = |e: Extended, c: f64| Extended { value: e.value * c, error: e.error * c, divergent: e.divergent };
    let combine = |a: Extended, b: Extended| Extended {
        value: a.value + b.value,
        error: a.error + b.error,
        divergent: a.divergent || b.divergent,
    };
    // ∫𝒱 r dr = ∫V dx/2π and likewise for the log-weighted pieces.
    let mass = || scale(l1_norm(v), 1.0 / TWO_PI);
    let log_mass = |region| scale(log_weighted_integral(v, region), 1.0 / TWO_PI);
    Ok(match spec.kind {
        KernelKind::LogInterior => log_mass(Region::Ball1),
        KernelKind::LogExterior => log_mass(Region::Exterior),
        KernelKind::MinPower { alpha } => scale(mass(), 1.0 / (2.0 * alpha)),
        KernelKind::T0Limit { alpha } => combine(scale(mass(), 1.0 / (2.0 * alpha)), log_mass(Region::Ball1)),
        KernelKind::TAlphaLimit { alpha } => combine(scale(mass(), 1.0 / (2.0 * alpha)), log_mass(Region::Exterior)),
        KernelKind::Resolvent { .. } => {
            // K(r, r) is bounded by the κ = 0 kernel, so the window carries
            // everything the closed forms above would.
            let (lo, hi) = spec.t_window();
            let mut pts = vec![lo];
            pts.extend(v.t_breakpoints().into_iter().chain([0.0]).filter(|&b| b > lo && b < hi));
            pts.push(hi);
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let q = integrate_pieces(
                |t| {
                    let r = t.exp();
                    v_bar.v_bar(r) * r * r * spec.diagonal_over_r(r)
                },
                &pts,
                Tolerance::rel(1e-10).with_abs(1e-300),
            )?;
            Extended::finite(q.value, q.error)
        }
    })
}

/// Nyström discretization of `√𝒱 K √𝒱` on Gauss–Legendre panels in log r.
#[derive(Debug, Clone)]
pub struct BsOperator {
    pub kernel: KernelSpec,
    pub v_bar: AngularAverage,
    pub quad_nodes: Vec<f64>,
    pub quad_weights: Vec<f64>,
    pub matrix: DMatrix<f64>,
    eigenvalues: Vec<f64>,
}

impl BsOperator {
    /// `nodes` is the requested number of quadrature points, rounded to
    /// whole panels of eight.
    pub fn build(kernel: &KernelSpec, v_bar: &AngularAverage, nodes: usize) -> Result<Self> {
        if nodes < 16 {
            return domain(format!("Nyström rule needs at least 16 nodes, got {nodes}"));
        }
        let scan = WeightScan::new(kernel, v_bar);
        let (t_nodes, t_weights) = match support_of(&scan, kernel, v_bar, 46.0) {
            Some((a, b)) => panel_rule(kernel, v_bar, &scan, a, b, nodes.div_ceil(PANEL_POINTS)),
            None => (Vec::new(), Vec::new()),
        };
        let r: Vec<f64> = t_nodes.iter().map(|t| t.exp()).collect();
        // dr = r dt
        let w: Vec<f64> = t_weights.iter().zip(&r).map(|(w, r)| w * r).collect();
        let s: Vec<f64> = r.iter().zip(&w).map(|(&r, &w)| (w * v_bar.v_bar(r)).sqrt()).collect();
        let n = r.len();
        let points: Option<Vec<ResolventPoint>> = kernel.resolvent.as_ref().map(|c| r.iter().map(|&x| c.point(x)).collect());
        let mut matrix = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let k = match (&points, &kernel.resolvent) {
                    // nodes ascend in r, so j ≤ i means r_j ≤ r_i
                    (Some(p), Some(c)) => c.eval(&p[j], &p[i]),
                    _ => kernel.eval_unchecked(r[i], r[j]),
                };
                let e = s[i] * s[j] * k;
                matrix[(i, j)] = e;
                matrix[(j, i)] = e;
            }
        }
        let mut eigenvalues: Vec<f64> = if n > 0 {
            SymmetricEigen::new(matrix.clone()).eigenvalues.iter().copied().collect()
        } else {
            Vec::new()
        };
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Ok(BsOperator {
            kernel: *kernel,
            v_bar: v_bar.clone(),
            quad_nodes: r,
            quad_weights: w,
            matrix,
            eigenvalues,
        })
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Number of eigenvalues of λ·K_N that are at least 1.
    pub fn count(&self, lambda: f64) -> u64 {
        if lambda <= 0.0 {
            return 0;
        }
        self.eigenvalues.iter().take_while(|&&mu| lambda * mu >= 1.0).count() as u64
    }
}

/// Birman–Schwinger count at coupling λ.
pub fn bs_count(spec: &KernelSpec, v_bar: &AngularAverage, lambda: f64, nodes: usize) -> Result<u64> {
    if !(lambda >= 0.0) {
        return domain(format!("coupling must be nonnegative, got {lambda}"));
    }
    Ok(BsOperator::build(spec, v_bar, nodes)?.count(lambda))
}

/// Scan of ln(𝒱r²(1 + |t|)) over the kernel window.
struct WeightScan {
    t0: f64,
    h: f64,
    level: Vec<f64>,
    peak: f64,
}

impl WeightScan {
    const CELLS: usize = 4000;

    fn new(kernel: &KernelSpec, v_bar: &AngularAverage) -> Self {
        let (lo, hi) = kernel.t_window();
        let h = (hi - lo) / Self::CELLS as f64;
        let level: Vec<f64> = (0..=Self::CELLS)
            .map(|k| {
                let t = lo + k as f64 * h;
                let v = v_bar.v_bar(t.exp());
                if v > 0.0 {
                    v.ln() + 2.0 * t + (1.0 + t.abs()).ln()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let peak = level.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        WeightScan { t0: lo, h, level, peak }
    }

    /// Node density for the Nyström panels. The kernels have a kink on the
    /// diagonal, so the error of a panel scales like h² times its weight and
    /// the density follows the weight to the power 1/3.
    fn density(&self, t: f64) -> f64 {
        let k = (((t - self.t0) / self.h).round().max(0.0) as usize).min(Self::CELLS);
        ((self.level[k] - self.peak) / 3.0).exp() + 1e-3
    }
}

/// The part of the kernel window where 𝒱 carries weight, as a t-interval.
fn support_window(kernel: &KernelSpec, v_bar: &AngularAverage) -> Option<(f64, f64)> {
    // Cells whose weight is below e^{−46} ≈ 1e−20 of the peak are dropped.
    const DROP: f64 = 46.0;
    let scan = WeightScan::new(kernel, v_bar);
    support_of(&scan, kernel, v_bar, DROP)
}

fn support_of(scan: &WeightScan, kernel: &KernelSpec, v_bar: &AngularAverage, drop: f64) -> Option<(f64, f64)> {
    if scan.peak == f64::NEG_INFINITY {
        return None;
    }
    let (lo, hi) = kernel.t_window();
    let h = scan.h;
    let first = scan.level.iter().position(|&l| l > scan.peak - drop)?;
    let last = scan.level.iter().rposition(|&l| l > scan.peak - drop)?;
    let mut a = lo + first.saturating_sub(1) as f64 * h;
    let mut b = lo + (last + 1).min(WeightScan::CELLS) as f64 * h;
    // Snap to a discontinuity just outside the scan cell.
    for bp in v_bar.model.t_breakpoints() {
        if bp < a && bp > a - 1.5 * h {
            a = bp.max(lo);
        }
        if bp > b && bp < b + 1.5 * h {
            b = bp.min(hi);
        }
    }
    Some((a, b))
}

/// Gauss–Legendre panels on [a, b], graded by the weight of 𝒱, with panel
/// edges at the breakpoints of 𝒱 and at t = 0, where the kernels switch branch.
fn panel_rule(kernel: &KernelSpec, v_bar: &AngularAverage, scan: &WeightScan, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    const SUB: usize = 64;
    let mut edges = vec![a];
    let mut inner: Vec<f64> = v_bar.model.t_breakpoints();
    if !matches!(kernel.kind, KernelKind::LogInterior | KernelKind::LogExterior) {
        inner.push(0.0);
    }
    edges.extend(inner.into_iter().filter(|&x| x > a && x < b));
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    // cumulative density on a fine sub-grid of each segment
    let cumulative: Vec<Vec<f64>> = edges
        .windows(2)
        .map(|seg| {
            let dh = (seg[1] - seg[0]) / SUB as f64;
            let mut c = vec![0.0];
            for j in 0..SUB {
                let mid = seg[0] + (j as f64 + 0.5) * dh;
                c.push(c[j] + scan.density(mid) * dh);
            }
            c
        })
        .collect();
    let total: f64 = cumulative.iter().map(|c| c[SUB]).sum();
    let (gx, gw) = gauss_legendre(PANEL_POINTS);
    let mut nodes = Vec::with_capacity(panels * PANEL_POINTS);
    let mut weights = Vec::with_capacity(panels * PANEL_POINTS);
    for (seg, c) in edges.windows(2).zip(&cumulative) {
        let p = ((panels as f64 * c[SUB] / total).round() as usize).max(1);
        let dh = (seg[1] - seg[0]) / SUB as f64;
        // inverse of the piecewise-linear cumulative density
        let at = |q: f64| {
            let j = c.partition_point(|&x| x < q).clamp(1, SUB);
            let frac = if c[j] > c[j - 1] { (q - c[j - 1]) / (c[j] - c[j - 1]) } else { 0.0 };
            seg[0] + (j as f64 - 1.0 + frac.clamp(0.0, 1.0)) * dh
        };
        let mut left = seg[0];
        for k in 1..=p {
            let right = if k == p { seg[1] } else { at(c[SUB] * k as f64 / p as f64) };
            let (mid, half) = (0.5 * (left + right), 0.5 * (right - left));
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
            left = right;
        }
    }
    (nodes, weights)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdReport {
    pub kernel: &'static str,
    pub samples: usize,
    pub min_eigenvalue: f64,
    pub max_diagonal: f64,
    pub pass: bool,
}

/// Gram-matrix positivity of `√𝒱 K √𝒱` on seeded log-uniform samples.
pub fn check_positive_definite(spec: &KernelSpec, v_bar: &AngularAverage, sample_count: usize) -> Result<PsdReport> {
    check_positive_definite_seeded(spec, v_bar, sample_count, crate::DEFAULT_SEED)
}

pub fn check_positive_definite_seeded(
    spec: &KernelSpec,
    v_bar: &AngularAverage,
    sample_count: usize,
    seed: u64,
) -> Result<PsdReport> {
    if !(1..=512).contains(&sample_count) {
        return domain(format!("sample count {sample_count} outside [1, 512]"));
    }
    let (a, b) = support_window(spec, v_bar).unwrap_or(spec.t_window());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (b - a) / sample_count as f64;
    let r: Vec<f64> = (0..sample_count)
        .map(|k| {
            let u: f64 = rng.random();
            (a + (k as f64 + u) * width).exp().clamp(spec.domain.0.max(f64::MIN_POSITIVE), spec.domain.1)
        })
        .collect();
    Ok(gram_report(spec, v_bar, &r))
}

/// Positivity report on caller-chosen sample points.
pub fn gram_report(spec: &KernelSpec, v_bar: &AngularAverage, r: &[f64]) -> PsdReport {
    let n = r.len();
    let s: Vec<f64> = r.iter().map(|&x| v_bar.v_bar(x).sqrt()).collect();
    let gram = DMatrix::from_fn(n, n, |i, j| s[i] * s[j] * spec.eval_unchecked(r[i], r[j]));
    let max_diagonal = (0..n).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    let min_eigenvalue = if n == 0 {
        0.0
    } else {
        SymmetricEigen::new(gram).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    };
    PsdReport {
        kernel: spec.kind.name(),
        samples: n,
        min_eigenvalue,
        max_diagonal,
        pass: min_eigenvalue >= -1e-10 * max_diagonal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential_models::PotentialModel;
    use rand::Rng;
    use crate::radial_spectra::{count_constant_channel, GridSpec};
    use proptest::prelude::*;

    fn spec(kind: KernelKind) -> KernelSpec {
        KernelSpec::new(kind).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    fn five_kinds(alpha: f64) -> Vec<KernelSpec> {
        vec![
            spec(KernelKind::LogInterior),
            spec(KernelKind::LogExterior),
            spec(KernelKind::MinPower { alpha }),
            spec(KernelKind::T0Limit { alpha }),
            spec(KernelKind::TAlphaLimit { alpha }),
        ]
    }

    #[test]
    fn closed_form_examples() {
        let t0 = spec(KernelKind::T0Limit { alpha: 1.0 });
        assert!((t0.eval(0.5, 0.5).unwrap() - 0.596_573_590_279_972_6).abs() < 1e-12);
        assert!((t0.eval(0.5, 2.0).unwrap() - 0.25).abs() < 1e-15);
        let li = spec(KernelKind::LogInterior);
        for r in [1e-3, 0.2, 0.9] {
            assert_eq!(li.eval(r, 1.0).unwrap(), 0.0);
        }
        let ta = spec(KernelKind::TAlphaLimit { alpha: 2.0 });
        assert!((ta.eval(1.0, 1.0).unwrap() - 0.25).abs() < 1e-15);
        // both neighbouring branches meet at r = r′ = 1
        let d = 1e-9;
        assert!((ta.eval(1.0 + d, 1.0 + d).unwrap() - 0.25).abs() < 1e-8);
        assert!((ta.eval(1.0 - d, 1.0 - d).unwrap() - 0.25).abs() < 1e-8);
        assert!((ta.eval(1.0 - d, 1.0 + d).unwrap() - 0.25).abs() < 1e-8);
    }

    #[test]
    fn domain_errors() {
        assert!(spec(KernelKind::LogInterior).eval(1.5, 0.5).is_err());
        assert!(spec(KernelKind::LogExterior).eval(0.5, 2.0).is_err());
        assert!(spec(KernelKind::MinPower { alpha: 1.0 }).eval(0.0, 1.0).is_err());
        assert!(KernelSpec::new(KernelKind::MinPower { alpha: 0.0 }).is_err());
        assert!(resolvent_kernel(0, 1.0, 1e-7, 1.0, 1.0).is_err());
        assert!(resolvent_kernel(0, 1.0, 200.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn kernels_are_symmetric_and_nonnegative() {
        let pts = [1e-4, 0.03, 0.3, 0.7, 1.0, 1.7, 5.0, 80.0];
        for alpha in [0.5, 1.0, 2.5] {
            let mut all = five_kinds(alpha);
            all.push(spec(KernelKind::Resolvent { m: 1, alpha, kappa: 0.3 }));
            for k in &all {
                for &r in &pts {
                    for &rp in &pts {
                        if !(k.contains(r) && k.contains(rp)) {
                            continue;
                        }
                        let a = k.eval(r, rp).unwrap();
                        let b = k.eval(rp, r).unwrap();
                        assert!(a >= 0.0, "{} at ({r}, {rp}) = {a}", k.kind.name());
                        assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
                    }
                }
            }
        }
    }

    #[test]
    fn t_alpha_is_inverted_t0() {
        for alpha in [0.5, 1.0, 2.5] {
            let k0 = spec(KernelKind::T0Limit { alpha });
            let ka = spec(KernelKind::TAlphaLimit { alpha });
            for &(r, rp) in &[(0.3, 0.6), (0.5, 2.0), (1.5, 4.0), (0.1, 9.0)] {
                let lhs = ka.eval(r, rp).unwrap();
                let rhs = r * rp * k0.eval(1.0 / r, 1.0 / rp).unwrap();
                assert!(close(lhs, rhs, 1e-13), "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn resolvent_matches_frozen_oracle() {
        // 40-digit evaluation of the three-piece Green's function.
        let cases = [
            (0, 1.0, 0.5, 0.3, 1.7, 0.133_273_870_142_492_33),
            (1, 2.5, 2.0, 0.4, 0.8, 0.050_148_116_986_572_943),
            (2, 2.0, 1e-3, 2.0, 3.0, 1.881_895_439_470_348_3),
            (3, 1.5, 0.1, 1.5, 4.0, 0.150_456_653_273_339_41),
            (0, 1.0, 1e-4, 0.5, 0.5, 0.596_573_576_555_349_83),
            (2, 2.0, 1e-4, 2.0, 3.0, 1.984_883_194_796_053_7),
            (1, 0.7, 30.0, 0.9, 1.1, 4.077_997_695_958_388_2e-5),
            (0, 1.3, 5.0, 2.0, 2.5, 8.042_062_089_844_534_3e-3),
        ];
        for (m, a, k, r, rp, want) in cases {
            let got = resolvent_kernel(m, a, k, r, rp).unwrap();
            assert!((got / want - 1.0).abs() < 1e-10, "m={m} α={a} κ={k}: {got} vs {want}");
            let swapped = resolvent_kernel(m, a, k, rp, r).unwrap();
            assert!((got - swapped).abs() <= 1e-12 * got.abs());
        }
    }

    #[test]
    fn resolvent_is_continuous_with_derivative_jump() {
        // v₂(r) ∝ T(r₀, r) for r > r₀; across r = 1, v₂′ jumps by α·v₂(1).
        let (m, alpha, kappa, r0) = (1, 1.7, 0.4, 0.2);
        let v = |r: f64| resolvent_kernel(m, alpha, kappa, r0, r).unwrap();
        let h = 1e-5;
        let (below, at, above) = (v(1.0 - 1e-12), v(1.0), v(1.0 + 1e-12));
        assert!(close(below, at, 1e-9) && close(above, at, 1e-9));
        let left = (v(1.0) - v(1.0 - h)) / h;
        let right = (v(1.0 + h) - v(1.0)) / h;
        assert!(((right - left) - alpha * at).abs() < 1e-4 * at.abs().max(1.0), "{left} {right} {at}");
    }

    #[test]
    fn resolvent_examples_near_zero() {
        let a = resolvent_kernel(0, 1.0, 1e-4, 0.5, 0.5).unwrap();
        assert!((a - 0.596_573_6).abs() < 1e-3);
        let lim = resolvent_limit(2, 2.0, 2.0, 3.0).unwrap();
        let want = 6f64.sqrt() * (0.25 + 2f64.ln());
        assert!((lim.value - want).abs() < 1e-3, "{lim:?} vs {want}");
    }

    #[test]
    fn resolvent_limits_match_closed_forms() {
        let panel = [(0.3, 0.6), (0.5, 2.0), (1.5, 4.0), (0.8, 0.8)];
        for alpha in [1.0, 2.0] {
            let t0 = spec(KernelKind::T0Limit { alpha });
            let ta = spec(KernelKind::TAlphaLimit { alpha });
            for &(r, rp) in &panel {
                let l0 = resolvent_limit(0, alpha, r, rp).unwrap();
                assert!(close(l0.value, t0.eval(r, rp).unwrap(), 1e-8), "T0 {alpha} ({r},{rp}) {l0:?}");
                let la = resolvent_limit(alpha as u32, alpha, r, rp).unwrap();
                assert!(close(la.value, ta.eval(r, rp).unwrap(), 1e-4), "Tα {alpha} ({r},{rp}) {la:?}");
            }
        }
    }

    #[test]
    fn resolvent_gap_shrinks_as_kappa_halves() {
        let cases = [
            (0u32, spec(KernelKind::T0Limit { alpha: 1.0 })),
            (1, spec(KernelKind::TAlphaLimit { alpha: 1.0 })),
        ];
        for (m, lim) in cases {
            for &(r, rp) in &[(0.5, 0.5), (0.4, 2.5), (2.0, 3.0)] {
                let target = lim.eval(r, rp).unwrap();
                let mut kappa = 1e-2;
                let mut last = f64::INFINITY;
                while kappa >= 1e-5 {
                    let gap = (resolvent_kernel(m, 1.0, kappa, r, rp).unwrap() - target).abs();
                    assert!(gap < last, "m={m} ({r},{rp}) κ={kappa}: {gap} ≥ {last}");
                    last = gap;
                    kappa *= 0.5;
                }
            }
        }
        // away from the logarithmic branch the gap is a power of κ
        let lim = spec(KernelKind::T0Limit { alpha: 1.0 });
        let gap = |k: f64| (resolvent_kernel(0, 1.0, k, 0.5, 0.5).unwrap() - lim.eval(0.5, 0.5).unwrap()).abs();
        let delta = (gap(1e-2) / gap(1e-3)).log10();
        assert!(delta > 1.0, "empirical order {delta}");
    }

    #[test]
    fn trace_examples() {
        let disk = AngularAverage::indicator(1.0);
        let t = bs_trace(&spec(KernelKind::MinPower { alpha: 1.0 }), &disk).unwrap();
        assert!((t.value - 0.25).abs() < 1e-10);
        let t = bs_trace(&spec(KernelKind::LogInterior), &disk).unwrap();
        assert!((t.value - 0.25).abs() < 1e-10);
        let zero = AngularAverage { model: PotentialModel::Zero };
        for k in five_kinds(1.0) {
            assert_eq!(bs_trace(&k, &zero).unwrap().value, 0.0);
        }
        // ∫₁² log r · r dr = 2 log 2 − 3/4
        let t = bs_trace(&spec(KernelKind::LogExterior), &AngularAverage::indicator(2.0)).unwrap();
        assert!((t.value - (2.0 * 2f64.ln() - 0.75)).abs() < 1e-10);
        // the resolvent trace at small κ approaches the T0 trace
        let r = bs_trace(&spec(KernelKind::Resolvent { m: 0, alpha: 1.0, kappa: 1e-4 }), &disk).unwrap();
        let l = bs_trace(&spec(KernelKind::T0Limit { alpha: 1.0 }), &disk).unwrap();
        assert!((r.value - l.value).abs() < 1e-3, "{} vs {}", r.value, l.value);
        let v2 = AngularAverage { model: PotentialModel::VSigma { sigma: 2.0, amplitude: 1.0 } };
        assert!(bs_trace(&spec(KernelKind::LogInterior), &v2).unwrap().divergent);
    }

    #[test]
    fn nystrom_trace_matches_closed_form() {
        for k in five_kinds(1.0) {
            let op = BsOperator::build(&k, &AngularAverage::indicator(2.0), 256).unwrap();
            let tr: f64 = op.matrix.diagonal().iter().sum();
            let exact = bs_trace(&k, &AngularAverage::indicator(2.0)).unwrap().value;
            assert!(close(tr, exact, 1e-8), "{}: {tr} vs {exact}", k.kind.name());
            let m = &op.matrix;
            assert!((m - m.transpose()).amax() <= 1e-12 * m.amax());
        }
    }

    #[test]
    fn count_examples() {
        let disk = AngularAverage::indicator(1.0);
        let li = spec(KernelKind::LogInterior);
        assert_eq!(bs_count(&li, &disk, 0.0, 64).unwrap(), 0);
        assert_eq!(bs_count(&li, &disk, 3.9, 64).unwrap(), 0);
        let tr = bs_trace(&li, &disk).unwrap().value;
        for lambda in [1.0, 10.0, 100.0] {
            let n = bs_count(&li, &disk, lambda, 256).unwrap();
            assert!(n as f64 <= lambda * tr, "λ={lambda}: {n}");
        }
        assert!(bs_count(&li, &disk, 1.0, 8).is_err());
    }

    #[test]
    fn interior_log_count_matches_dirichlet_channel() {
        // −v″ − v/(4r²) − λ𝒱 on (0, 1) with v(1) = 0: the zeros of J₀.
        let disk = AngularAverage::indicator(1.0);
        let op = BsOperator::build(&spec(KernelKind::LogInterior), &disk, 256).unwrap();
        let j0 = [2.404_825_557_695_773f64, 5.520_078_110_286_311, 8.653_727_912_911_013];
        for (k, z) in j0.iter().enumerate() {
            let lam = z * z;
            assert_eq!(op.count(lam * 0.999), k as u64);
            assert_eq!(op.count(lam * 1.001), k as u64 + 1);
        }
    }

    #[test]
    fn bs_count_agrees_with_channel_inertia() {
        let disk = PotentialModel::disk(1.0);
        let avg = AngularAverage { model: disk.clone() };
        let op = BsOperator::build(&spec(KernelKind::MinPower { alpha: 1.0 }), &avg, 384).unwrap();
        let grid = GridSpec { n: 4000, ..GridSpec::default() }.build().unwrap();
        for j in 0..20 {
            let lambda = 2.0 * 1.35f64.powi(j);
            let bs = op.count(lambda);
            let direct = count_constant_channel(1.0, &disk, lambda, &grid).unwrap();
            let near = op.eigenvalues().iter().any(|&mu| (lambda * mu - 1.0).abs() < 1e-8);
            let allowed = if near { 1 } else { 0 };
            assert!(bs.abs_diff(direct) <= allowed, "λ={lambda}: BS {bs} vs inertia {direct}");
        }
    }

    #[test]
    fn resolvent_nystrom_matches_direct_evaluation() {
        let k = spec(KernelKind::Resolvent { m: 1, alpha: 1.5, kappa: 0.2 });
        let op = BsOperator::build(&k, &AngularAverage::indicator(2.0), 64).unwrap();
        let (r, w) = (&op.quad_nodes, &op.quad_weights);
        for &(i, j) in &[(0, 5), (10, 40), (63, 2)] {
            let want = w[i].sqrt() * w[j].sqrt() * k.eval(r[i], r[j]).unwrap();
            assert!(close(op.matrix[(i, j)], want, 1e-12));
        }
    }

    #[test]
    fn positive_definite_on_all_kinds() {
        let v = AngularAverage { model: PotentialModel::Gaussian { amplitude: 1.0, width: 3.0 } };
        for alpha in [0.5, 1.0, 2.5] {
            for k in five_kinds(alpha) {
                let rep = check_positive_definite(&k, &v, 256).unwrap();
                assert!(rep.pass, "{rep:?}");
            }
        }
        let single = check_positive_definite(&spec(KernelKind::LogInterior), &v, 1).unwrap();
        assert!(single.min_eigenvalue >= 0.0 && single.pass);
        assert!(check_positive_definite(&spec(KernelKind::LogInterior), &v, 513).is_err());
    }

    #[test]
    fn inverted_samples_preserve_positivity() {
        let v = AngularAverage { model: PotentialModel::Gaussian { amplitude: 1.0, width: 3.0 } };
        let rep = check_positive_definite(&spec(KernelKind::T0Limit { alpha: 1.0 }), &v, 128).unwrap();
        assert!(rep.pass);
        let mut rng = ChaCha8Rng::seed_from_u64(crate::DEFAULT_SEED);
        let pts: Vec<f64> = (0..128).map(|_| (rng.random::<f64>() * 8.0 - 4.0).exp()).collect();
        let inv: Vec<f64> = pts.iter().map(|r| 1.0 / r).collect();
        let ones = AngularAverage { model: PotentialModel::disk(1e9) };
        let a = gram_report(&spec(KernelKind::TAlphaLimit { alpha: 1.0 }), &ones, &pts);
        let b = gram_report(&spec(KernelKind::T0Limit { alpha: 1.0 }), &ones, &inv);
        assert!(a.pass && b.pass, "{a:?} {b:?}");
    }

    #[test]
    fn parse_inline_kernels() {
        assert_eq!(KernelSpec::parse_inline("log_interior").unwrap().kind, KernelKind::LogInterior);
        assert_eq!(
            KernelSpec::parse_inline("t0_limit:alpha=2").unwrap().kind,
            KernelKind::T0Limit { alpha: 2.0 }
        );
        assert_eq!(
            KernelSpec::parse_inline("resolvent:m=1,alpha=1.5,kappa=0.01").unwrap().kind,
            KernelKind::Resolvent { m: 1, alpha: 1.5, kappa: 0.01 }
        );
        assert!(KernelSpec::parse_inline("min_power").is_err());
        assert!(KernelSpec::parse_inline("min_power:alpha=1,beta=2").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn trace_dominates_count(lambda in 0.5f64..200.0, radius in 0.3f64..3.0, alpha in 0.3f64..3.0) {
            let v = AngularAverage::indicator(radius);
            for k in [spec(KernelKind::MinPower { alpha }), spec(KernelKind::T0Limit { alpha }), spec(KernelKind::LogInterior)] {
                let tr = bs_trace(&k, &v).unwrap().value;
                let n = bs_count(&k, &v, lambda, 64).unwrap();
                prop_assert!(n as f64 <= lambda * tr + 1e-9);
            }
        }

        #[test]
        fn resolvent_symmetric(m in 0u32..4, alpha in 0.2f64..4.0, lk in -6.0f64..2.0, r in 0.01f64..10.0, rp in 0.01f64..10.0) {
            let k = 10f64.powf(lk);
            let a = resolvent_kernel(m, alpha, k, r, rp).unwrap();
            let b = resolvent_kernel(m, alpha, k, rp, r).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs());
            prop_assert!(a > 0.0);
        }
    }
}
