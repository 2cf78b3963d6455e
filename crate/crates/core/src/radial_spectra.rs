//! Channel-by-channel counting of negative eigenvalues.
//!
//! Each angular momentum channel is a one-dimensional quadratic form in
//! t = log r,
//!
//! ```text
//!   ∫ a(t)|v′|² dt + ∫ Q(t)|v|² dt,
//! ```
//!
//! discretized by linear elements on a uniform grid in a coordinate x that
//! equals t on the core [log r_min, log r_max] and stretches exponentially
//! beyond it, so that the far tails are uniform in log|t|. The form is stored
//! as springs κ between neighbors plus node potentials γ,
//! `Σ κ_e (v_a − v_b)² + Σ γ_i v_i²`, and its inertia is computed by an
//! elimination that never subtracts the stiffness from itself. All
//! coefficients are carried as signed logarithms because ground-state
//! weights such as r^{2m} span thousands of orders of magnitude.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::field_models::GroundStateData;
use crate::potential_models::PotentialModel;
use crate::quadrature::gauss_legendre;

/// Largest |m| examined before truncation is declared uncertifiable.
pub const M_MAX: i64 = 200;
const MAX_NODES: usize = 40_000_000;
const PIVOT_TOL: f64 = 1e-12;

/// Real number stored as sign and log-magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signed {
    pub sign: f64,
    pub ln: f64,
}

impl Signed {
    pub const ZERO: Signed = Signed { sign: 0.0, ln: f64::NEG_INFINITY };

    pub fn new(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Signed { sign: x.signum(), ln: x.abs().ln() }
        }
    }

    /// e^{ln}·sign, with ln = −∞ meaning zero.
    pub fn from_ln(sign: f64, ln: f64) -> Self {
        if ln == f64::NEG_INFINITY || sign == 0.0 {
            Self::ZERO
        } else {
            Signed { sign, ln }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0.0
    }

    pub fn value(&self) -> f64 {
        self.sign * self.ln.exp()
    }

    pub fn neg(self) -> Self {
        Signed { sign: -self.sign, ln: self.ln }
    }

    pub fn add(self, o: Signed) -> Signed {
        if o.is_zero() {
            return self;
        }
        if self.is_zero() {
            return o;
        }
        let (big, small) = if self.ln >= o.ln { (self, o) } else { (o, self) };
        let d = small.ln - big.ln;
        if big.sign == small.sign {
            Signed { sign: big.sign, ln: big.ln + d.exp().ln_1p() }
        } else if d == 0.0 {
            Self::ZERO
        } else {
            let l = if d < -std::f64::consts::LN_2 { (-d.exp()).ln_1p() } else { (-d.exp_m1()).ln() };
            Signed { sign: big.sign, ln: big.ln + l }
        }
    }

    pub fn sub(self, o: Signed) -> Signed {
        self.add(o.neg())
    }

    pub fn mul(self, o: Signed) -> Signed {
        Signed::from_ln(self.sign * o.sign, self.ln + o.ln)
    }

    pub fn div(self, o: Signed) -> Signed {
        Signed::from_ln(self.sign * o.sign, self.ln - o.ln)
    }

    pub fn scale_ln(self, l: f64) -> Signed {
        Signed::from_ln(self.sign, self.ln + l)
    }
}

/// Grid parameters: uniform spacing in t = log r on [r_min, r_max] with n
/// intervals, continued beyond by the exponential stretch of length `stretch`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    pub stretch: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { r_min: 1e-6, r_max: 1e6, n: 6000, stretch: 0.2 }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<RadialGrid> {
        if !(self.r_min > 0.0 && self.r_min < 1.0 && self.r_max > 1.0 && self.r_max.is_finite()) {
            return domain(format!("grid needs 0 < r_min < 1 < r_max, got [{}, {}]", self.r_min, self.r_max));
        }
        if self.n < 8 {
            return domain(format!("grid too coarse: {} intervals", self.n));
        }
        if !(self.stretch > 0.0) {
            return domain("stretch length must be positive");
        }
        let t_min = self.r_min.ln();
        let t_max = self.r_max.ln();
        Ok(RadialGrid { spec: *self, t_min, t_max, h: (t_max - t_min) / self.n as f64 })
    }
}

/// Position of a point of the x-grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodePos {
    pub x: f64,
    /// log r; ±∞ once |log r| overflows.
    pub t: f64,
    /// log|t|, always finite away from t = 0.
    pub s: f64,
    /// log(dt/dx).
    pub ln_dt: f64,
}

/// Nodes x_k = k·h for integer k; t(x) = x on the core.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub spec: GridSpec,
    pub t_min: f64,
    pub t_max: f64,
    pub h: f64,
}

impl RadialGrid {
    /// The grid with every interval halved; its nodes contain these.
    pub fn refined(&self) -> RadialGrid {
        RadialGrid { spec: GridSpec { n: 2 * self.spec.n, ..self.spec }, h: 0.5 * self.h, ..*self }
    }

    pub fn pos(&self, x: f64) -> NodePos {
        let l = self.spec.stretch;
        if x >= self.t_min && x <= self.t_max {
            return NodePos { x, t: x, s: x.abs().ln(), ln_dt: 0.0 };
        }
        let (side, edge) = if x > self.t_max { (1.0, self.t_max) } else { (-1.0, self.t_min) };
        let y = (x - edge).abs() / l;
        let e = edge.abs();
        let s = y + (l + (e - l) * (-y).exp()).ln();
        let t = if s < 700.0 { side * (e + l * y.exp_m1()) } else { side * f64::INFINITY };
        NodePos { x, t, s, ln_dt: y }
    }

    pub fn node(&self, k: i64) -> NodePos {
        self.pos(k as f64 * self.h)
    }

    /// Inverse of the stretch for a point given by (side, s = log|t|).
    pub fn x_of_s(&self, side: f64, s: f64) -> f64 {
        let edge = if side > 0.0 { self.t_max } else { self.t_min };
        let e = edge.abs();
        if s <= e.ln() {
            return side * s.exp();
        }
        let l = self.spec.stretch;
        // y = log(1 + (e^s − e)/L), computed without forming e^s.
        let y = if s > 30.0 { s + ((1.0 - e * (-s).exp()) / l + (-s).exp()).ln() } else { ((s.exp() - e) / l).ln_1p() };
        edge + side * l * y
    }

    pub fn x_of_t(&self, t: f64) -> f64 {
        if t >= self.t_min && t <= self.t_max {
            t
        } else {
            self.x_of_s(t.signum(), t.abs().ln())
        }
    }

    /// Core nodes k_min..=k_max.
    pub fn core_range(&self) -> (i64, i64) {
        ((self.t_min / self.h).ceil() as i64, (self.t_max / self.h).floor() as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    Plus,
    Minus,
    Schrodinger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Pauli,
    HPlus,
    HMinus,
    Schrodinger,
}

impl OperatorKind {
    pub fn spins(&self) -> &'static [Spin] {
        match self {
            OperatorKind::Pauli => &[Spin::Plus, Spin::Minus],
            OperatorKind::HPlus => &[Spin::Plus],
            OperatorKind::HMinus => &[Spin::Minus],
            OperatorKind::Schrodinger => &[Spin::Schrodinger],
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "pauli" => OperatorKind::Pauli,
            "h_plus" | "plus" => OperatorKind::HPlus,
            "h_minus" | "minus" => OperatorKind::HMinus,
            "schrodinger" => OperatorKind::Schrodinger,
            _ => return Err(Error::Config(format!("unknown operator '{s}'"))),
        })
    }
}

/// How the channel form is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    /// v = u/u₀ with the exact zero-energy solution u₀; weight e^{∓2h}r^{±2m}.
    GroundState,
    /// The form of the operator itself, B term explicit.
    Direct,
    /// Ground-state form with (1+r)^{∓2α} in place of e^{∓2h}.
    Comparison,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    WholeLine,
    /// Dirichlet condition forced at the inner truncation point.
    DirichletInner,
    /// Dirichlet node at r = 1, both sides counted.
    DirichletAt1,
    /// Only r ∈ (0, 1), Dirichlet at r = 1.
    DirichletAt1Inner,
    /// Only r ∈ (1, ∞), Dirichlet at r = 1.
    DirichletAt1Outer,
}

/// Options shared by every channel of a count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountOptions {
    pub form: FormKind,
    pub boundary: Boundary,
    /// Also count on the refined grid and report the change.
    pub grid_check: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { form: FormKind::GroundState, boundary: Boundary::WholeLine, grid_check: false }
    }
}

/// The (m − φ)² part of the channel form.
#[derive(Debug, Clone, Copy)]
pub enum Centrifugal<'a> {
    Field(&'a GroundStateData),
    /// Constant ν², no magnetic field.
    Constant(f64),
}

/// Everything needed to discretize one channel.
#[derive(Debug, Clone, Copy)]
pub struct ChannelSpec<'a> {
    pub m: i64,
    pub spin: Spin,
    pub form: FormKind,
    pub centrifugal: Centrifugal<'a>,
    pub potential: &'a PotentialModel,
    pub lambda: f64,
}

impl<'a> ChannelSpec<'a> {
    fn alpha(&self) -> f64 {
        match self.centrifugal {
            Centrifugal::Field(gs) => gs.alpha,
            Centrifugal::Constant(_) => 0.0,
        }
    }

    fn b_sign(&self) -> f64 {
        match self.spin {
            Spin::Plus => 1.0,
            Spin::Minus => -1.0,
            Spin::Schrodinger => 0.0,
        }
    }

    fn effective_form(&self) -> FormKind {
        match (self.spin, self.centrifugal) {
            (Spin::Schrodinger, _) | (_, Centrifugal::Constant(_)) => FormKind::Direct,
            _ => self.form,
        }
    }

    /// ν at the inner and outer ends.
    fn nu_ends(&self) -> (f64, f64) {
        match self.centrifugal {
            Centrifugal::Field(gs) => ((self.m as f64).abs(), (self.m as f64 - gs.alpha).abs()),
            Centrifugal::Constant(nu2) => (nu2.sqrt(), nu2.sqrt()),
        }
    }

    /// Whether each end carries the natural condition.
    fn natural_ends(&self) -> (bool, bool) {
        let m = self.m as f64;
        let a = self.alpha();
        let tol = 1e-12;
        match (self.effective_form(), self.spin) {
            (FormKind::Direct, _) | (_, Spin::Schrodinger) => {
                let (ni, no) = self.nu_ends();
                (ni < tol, no < tol)
            }
            (_, Spin::Minus) => (m >= 0.0, m <= a + tol),
            (_, Spin::Plus) => (m <= 0.0, m >= a - tol),
        }
    }

    fn centrifugal_term(&self, t: f64) -> f64 {
        match self.centrifugal {
            Centrifugal::Field(gs) => {
                let d = self.m as f64 - gs.phi_t(t);
                d * d
            }
            Centrifugal::Constant(nu2) => nu2,
        }
    }

    fn b_term(&self, t: f64) -> f64 {
        match self.centrifugal {
            Centrifugal::Field(gs) if self.spin != Spin::Schrodinger && t.is_finite() => {
                let b = gs.b_r2(t);
                if b.is_finite() {
                    self.b_sign() * b
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }

    fn ln_potential(&self, p: &NodePos) -> f64 {
        if self.lambda == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.lambda.ln() + self.potential.log_vbar_r2(p.t, p.s)
    }

    /// q = (m − φ)² ± B r² − λ𝒱r², the direct-form density in t.
    pub fn q_direct(&self, p: &NodePos) -> Signed {
        let c = Signed::new(self.centrifugal_term(p.t) + self.b_term(p.t));
        c.add(Signed::from_ln(-1.0, self.ln_potential(p)))
    }

    fn ln_weight(&self, t: f64) -> f64 {
        let minus = self.spin == Spin::Minus;
        match (self.effective_form(), self.centrifugal) {
            (FormKind::GroundState, Centrifugal::Field(gs)) => gs.log_gs_weight(minus, self.m as f64, t),
            (FormKind::Comparison, Centrifugal::Field(gs)) => gs.log_comparison_weight(minus, self.m as f64, t),
            _ => 0.0,
        }
    }

    /// (log of the stiffness density in x, potential density in x).
    fn densities(&self, p: &NodePos) -> Result<(f64, Signed)> {
        match self.effective_form() {
            FormKind::Direct => Ok((-p.ln_dt, self.q_direct(p).scale_ln(p.ln_dt))),
            _ => {
                let lw = self.ln_weight(p.t);
                if !lw.is_finite() {
                    return Err(Error::Factorization(format!(
                        "ground-state weight not representable at log r = {} (m = {})",
                        p.t, self.m
                    )));
                }
                Ok((lw - p.ln_dt, Signed::from_ln(-1.0, self.ln_potential(p) + lw + p.ln_dt)))
            }
        }
    }
}

/// Discretized channel form: springs κ_j between nodes j, j+1 and node
/// potentials γ_i, with optional Dirichlet conditions at the two end nodes.
#[derive(Debug, Clone)]
pub struct ChannelOperator {
    pub m: i64,
    pub spin: Spin,
    pub kappa: Vec<Signed>,
    pub gamma: Vec<Signed>,
    pub left_dirichlet: bool,
    pub right_dirichlet: bool,
    /// x-range covered.
    pub x_range: (f64, f64),
}

/// Inertia summary of a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Inertia {
    pub negative: u64,
    pub near_zero: u64,
    pub positive: u64,
}

impl ChannelOperator {
    /// Form ∫ a|u′|² + q|u|² on [lo, hi] with n linear elements and three-point
    /// Gauss rules; plain f64 coefficients (test harness and small problems).
    pub fn sturm_liouville<A, Q>(a: A, q: Q, lo: f64, hi: f64, n: usize, left_dirichlet: bool, right_dirichlet: bool) -> Result<Self>
    where
        A: Fn(f64) -> f64,
        Q: Fn(f64) -> f64,
    {
        if n < 8 {
            return domain(format!("grid too coarse: {n} intervals"));
        }
        let h = (hi - lo) / n as f64;
        let (gx, gw) = gauss_legendre(3);
        let mut kappa = Vec::with_capacity(n);
        let mut gamma = vec![Signed::ZERO; n + 1];
        for j in 0..n {
            let xa = lo + j as f64 * h;
            let (mut k, mut qab, mut qa, mut qb) = (0.0, 0.0, 0.0, 0.0);
            for (g, w) in gx.iter().zip(&gw) {
                let u = 0.5 * (1.0 + g);
                let x = xa + u * h;
                let wt = 0.5 * w * h;
                k += a(x) * wt;
                let qv = q(x) * wt;
                qab += qv * u * (1.0 - u);
                qa += qv * (1.0 - u);
                qb += qv * u;
            }
            kappa.push(Signed::new(k / (h * h) - qab));
            gamma[j] = gamma[j].add(Signed::new(qa));
            gamma[j + 1] = gamma[j + 1].add(Signed::new(qb));
        }
        Ok(ChannelOperator { m: 0, spin: Spin::Schrodinger, kappa, gamma, left_dirichlet, right_dirichlet, x_range: (lo, hi) })
    }

    /// Number of unknowns after Dirichlet rows are removed.
    pub fn dimension(&self) -> usize {
        self.gamma.len() - self.left_dirichlet as usize - self.right_dirichlet as usize
    }

    /// Tridiagonal matrix (diagonal, off-diagonal) of the form on the unknowns,
    /// when its entries are representable.
    pub fn tridiagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.gamma.len() - 1;
        let first = self.left_dirichlet as usize;
        let last = if self.right_dirichlet { n - 1 } else { n };
        let mut diag = Vec::new();
        let mut off = Vec::new();
        for i in first..=last {
            let mut d = self.gamma[i].value();
            if i > 0 {
                d += self.kappa[i - 1].value();
            }
            if i < n {
                d += self.kappa[i].value();
            }
            diag.push(d);
            if i < last {
                off.push(-self.kappa[i].value());
            }
        }
        (diag, off)
    }

    /// Inertia by spring-form elimination.
    pub fn inertia(&self) -> Inertia {
        let n = self.gamma.len() - 1;
        let first = self.left_dirichlet as usize;
        let last = if self.right_dirichlet { n - 1 } else { n };
        let mut out = Inertia::default();
        let mut e = self.gamma[first];
        if self.left_dirichlet {
            e = e.add(self.kappa[0]);
        }
        for i in first..=last {
            let spring = if i < n { self.kappa[i] } else { Signed::ZERO };
            let mut d = e.add(spring);
            let mut scale = self.gamma[i].ln.max(spring.ln);
            if i > 0 {
                scale = scale.max(self.kappa[i - 1].ln);
            }
            let thresh = scale + PIVOT_TOL.ln();
            if d.is_zero() || d.ln <= thresh {
                out.near_zero += 1;
                d = Signed::from_ln(1.0, thresh);
            } else if d.sign < 0.0 {
                out.negative += 1;
            } else {
                out.positive += 1;
            }
            if i < last {
                e = self.gamma[i + 1].add(spring.mul(e).div(d));
            }
        }
        out
    }

    pub fn count_negative(&self) -> u64 {
        self.inertia().negative
    }
}

/// Region of x to discretize for one channel, or `None` when certified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDomain {
    pub k_lo: i64,
    pub k_hi: i64,
    pub left_dirichlet: bool,
    pub right_dirichlet: bool,
}

/// log|t| up to which the far region on `side` may still be Hardy-critical.
fn far_extent(v: &PotentialModel, lambda: f64, side: f64) -> f64 {
    let (radial, ang) = match v {
        PotentialModel::Separable { radial, angular } => (radial.as_ref(), angular.mean()),
        other => (other, 1.0),
    };
    match radial {
        PotentialModel::VSigma { sigma, amplitude } if side < 0.0 => {
            (4.0 * lambda * amplitude * ang).max(0.0).powf(*sigma) * 1.05 + 3.0
        }
        PotentialModel::WSigma { sigma, amplitude } if side > 0.0 => {
            (4.0 * lambda * amplitude * ang).max(0.0).powf(*sigma) * 1.05 + 3.0
        }
        _ => 0.0,
    }
}

/// Decides the discretization domain of a channel, or certifies it empty:
/// `None` means q ≥ 0 at every scanned node, so the channel has no negative
/// spectrum.
pub fn channel_domain(spec: &ChannelSpec, grid: &RadialGrid, boundary: Boundary) -> Result<Option<ChannelDomain>> {
    let (kc_lo, kc_hi) = grid.core_range();
    let mut certified = true;
    let mut act_lo = f64::INFINITY;
    let mut act_hi = f64::NEG_INFINITY;
    for k in kc_lo..=kc_hi {
        let p = grid.node(k);
        let q = spec.q_direct(&p);
        if q.sign < 0.0 {
            certified = false;
            act_lo = act_lo.min(p.x);
            act_hi = act_hi.max(p.x);
        }
    }
    // Far regions: scan up to the analytic extent, flag Hardy-critical nodes.
    let mut far_active = [f64::NAN, f64::NAN];
    for (idx, side) in [-1.0f64, 1.0].into_iter().enumerate() {
        let s_end = far_extent(spec.potential, spec.lambda, side);
        let edge = if side < 0.0 { grid.t_min } else { grid.t_max };
        if s_end <= edge.abs().ln() {
            continue;
        }
        let x_end = grid.x_of_s(side, s_end);
        let k_end = if side < 0.0 { (x_end / grid.h).floor() as i64 } else { (x_end / grid.h).ceil() as i64 };
        if (k_end - if side < 0.0 { kc_lo } else { kc_hi }).unsigned_abs() as usize > MAX_NODES {
            return Err(Error::Config(format!("far region needs more than {MAX_NODES} nodes")));
        }
        let ks: Box<dyn Iterator<Item = i64>> =
            if side < 0.0 { Box::new((k_end..kc_lo).rev()) } else { Box::new(kc_hi + 1..=k_end) };
        for k in ks {
            let p = grid.node(k);
            let q = spec.q_direct(&p);
            if q.sign < 0.0 {
                certified = false;
                if q.scale_ln(2.0 * p.s).add(Signed::new(0.25)).sign < 0.0 {
                    far_active[idx] = p.s;
                }
            }
        }
    }
    if certified {
        return Ok(None);
    }
    let (nat_in, nat_out) = spec.natural_ends();
    let (nu_in, nu_out) = spec.nu_ends();
    let end_x = |side: f64, natural: bool, nu: f64, act_x: f64, far_s: f64| -> f64 {
        let edge_x = if side < 0.0 { grid.t_min } else { grid.t_max };
        // Natural ends stop one e-fold in |t| past the last critical point;
        // Dirichlet ends leave room for e^{−40} decay at rate ν.
        let from_far = if far_s.is_nan() { edge_x } else { grid.x_of_s(side, far_s + 1.0) };
        let dirichlet_pad = if natural {
            edge_x
        } else {
            let t_act = grid.pos(act_x).t;
            let t_need = t_act + side * (40.0 / nu.max(1e-3)).max(2.0);
            grid.x_of_t(t_need)
        };
        if side < 0.0 {
            edge_x.min(from_far).min(dirichlet_pad)
        } else {
            edge_x.max(from_far).max(dirichlet_pad)
        }
    };
    let a_lo = if act_lo.is_finite() { act_lo } else { grid.t_min };
    let a_hi = if act_hi.is_finite() { act_hi } else { grid.t_max };
    let x_lo = end_x(-1.0, nat_in, nu_in, a_lo, far_active[0]);
    let x_hi = end_x(1.0, nat_out, nu_out, a_hi, far_active[1]);
    let mut dom = ChannelDomain {
        k_lo: (x_lo / grid.h).floor() as i64,
        k_hi: (x_hi / grid.h).ceil() as i64,
        left_dirichlet: !nat_in,
        right_dirichlet: !nat_out,
    };
    match boundary {
        Boundary::WholeLine | Boundary::DirichletAt1 => {}
        Boundary::DirichletInner => dom.left_dirichlet = true,
        Boundary::DirichletAt1Inner => {
            dom.k_hi = 0;
            dom.right_dirichlet = true;
        }
        Boundary::DirichletAt1Outer => {
            dom.k_lo = 0;
            dom.left_dirichlet = true;
        }
    }
    if ((dom.k_hi - dom.k_lo) as usize) > MAX_NODES {
        return Err(Error::Config(format!("channel m = {} needs more than {MAX_NODES} nodes", spec.m)));
    }
    Ok(Some(dom))
}

/// Assembles the channel on the given node range.
pub fn assemble(spec: &ChannelSpec, grid: &RadialGrid, dom: &ChannelDomain) -> Result<ChannelOperator> {
    if spec.lambda < 0.0 || !spec.lambda.is_finite() {
        return domain(format!("coupling must be finite and nonnegative, got {}", spec.lambda));
    }
    let n = (dom.k_hi - dom.k_lo) as usize;
    if n < 8 {
        return domain(format!("grid too coarse: {n} intervals"));
    }
    let h = grid.h;
    let (gx, gw) = gauss_legendre(3);
    let mut breaks: Vec<f64> = spec.potential.t_breakpoints();
    if let Centrifugal::Field(gs) = spec.centrifugal {
        breaks.extend(gs.field.profile.breakpoints().iter().filter(|&&r| r > 0.0).map(|r| r.ln()));
    }
    let mut xb: Vec<f64> = breaks.into_iter().map(|t| grid.x_of_t(t)).collect();
    xb.push(grid.t_min);
    xb.push(grid.t_max);
    xb.sort_by(f64::total_cmp);

    let ln_h2 = 2.0 * h.ln();
    let elements: Vec<Result<(Signed, Signed, Signed)>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let xa = (dom.k_lo + j as i64) as f64 * h;
            let xbnd = xa + h;
            let mut pieces = vec![xa];
            pieces.extend(xb.iter().copied().filter(|&b| b > xa && b < xbnd));
            pieces.push(xbnd);
            let mut k = Signed::ZERO;
            let (mut qab, mut qa, mut qb) = (Signed::ZERO, Signed::ZERO, Signed::ZERO);
            for w in pieces.windows(2) {
                let half = 0.5 * (w[1] - w[0]);
                for (g, wt) in gx.iter().zip(&gw) {
                    let x = 0.5 * (w[0] + w[1]) + half * g;
                    let u = (x - xa) / h;
                    let p = grid.pos(x);
                    let (la, qd) = spec.densities(&p)?;
                    let lw = (wt * half).ln();
                    k = k.add(Signed::from_ln(1.0, la + lw));
                    let qw = qd.scale_ln(lw);
                    qab = qab.add(qw.scale_ln((u * (1.0 - u)).ln()));
                    qa = qa.add(qw.scale_ln((1.0 - u).ln()));
                    qb = qb.add(qw.scale_ln(u.ln()));
                }
            }
            Ok((k.scale_ln(-ln_h2).sub(qab), qa, qb))
        })
        .collect();
    let mut kappa = Vec::with_capacity(n);
    let mut gamma = vec![Signed::ZERO; n + 1];
    for (j, el) in elements.into_iter().enumerate() {
        let (kap, qa, qb) = el?;
        kappa.push(kap);
        gamma[j] = gamma[j].add(qa);
        gamma[j + 1] = gamma[j + 1].add(qb);
    }
    Ok(ChannelOperator {
        m: spec.m,
        spin: spec.spin,
        kappa,
        gamma,
        left_dirichlet: dom.left_dirichlet,
        right_dirichlet: dom.right_dirichlet,
        x_range: (dom.k_lo as f64 * h, dom.k_hi as f64 * h),
    })
}

/// Builds the channel operator on its automatically chosen domain. A channel
/// certified nonnegative gets a minimal Dirichlet stub with no negatives.
pub fn build_channel(spec: &ChannelSpec, grid: &RadialGrid, boundary: Boundary) -> Result<Option<ChannelOperator>> {
    match channel_domain(spec, grid, boundary)? {
        None => Ok(None),
        Some(dom) => assemble(spec, grid, &dom).map(Some),
    }
}

/// Negative eigenvalue count of one channel (0 when certified).
pub fn count_channel(spec: &ChannelSpec, grid: &RadialGrid, boundary: Boundary) -> Result<Inertia> {
    if boundary == Boundary::DirichletAt1 {
        let a = count_channel(spec, grid, Boundary::DirichletAt1Inner)?;
        let b = count_channel(spec, grid, Boundary::DirichletAt1Outer)?;
        return Ok(Inertia { negative: a.negative + b.negative, near_zero: a.near_zero + b.near_zero, positive: a.positive + b.positive });
    }
    Ok(build_channel(spec, grid, boundary)?.map(|op| op.inertia()).unwrap_or_default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelCount {
    pub m: i64,
    pub spin: Spin,
    pub count: u64,
    pub near_zero: u64,
}

/// Result of a full count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub operator: OperatorKind,
    pub lambda: f64,
    pub total: u64,
    /// Nonzero channels, ordered by spin then m.
    pub per_channel: Vec<ChannelCount>,
    pub m_max_used: i64,
    pub truncation_certified: bool,
    /// total(refined grid) − total, when requested.
    pub grid_delta: Option<i64>,
    pub near_zero: u64,
}

impl CountReport {
    pub fn spin_total(&self, spin: Spin) -> u64 {
        self.per_channel.iter().filter(|c| c.spin == spin).map(|c| c.count).sum()
    }
}

/// Shared data for counting one (field, potential) pair.
#[derive(Debug, Clone)]
pub struct Counter<'a> {
    pub gs: &'a GroundStateData,
    pub potential: &'a PotentialModel,
    pub grid: RadialGrid,
    pub options: CountOptions,
}

impl<'a> Counter<'a> {
    pub fn new(gs: &'a GroundStateData, potential: &'a PotentialModel, grid: RadialGrid) -> Self {
        Counter { gs, potential, grid, options: CountOptions::default() }
    }

    pub fn with_options(mut self, options: CountOptions) -> Self {
        self.options = options;
        self
    }

    fn spec(&self, m: i64, spin: Spin, lambda: f64) -> ChannelSpec<'a> {
        ChannelSpec {
            m,
            spin,
            form: self.options.form,
            centrifugal: Centrifugal::Field(self.gs),
            potential: self.potential,
            lambda,
        }
    }

    /// Channel list for one spin: m = 0..⌈α⌉, then outward on both sides until
    /// two consecutive channels are certified.
    fn channels(&self, spin: Spin, lambda: f64, grid: &RadialGrid) -> Result<(Vec<i64>, i64)> {
        let top = self.gs.alpha.ceil() as i64;
        let mut ms: Vec<i64> = (0..=top).collect();
        let mut m_max = top;
        for dir in [1i64, -1] {
            let mut m = if dir > 0 { top + 1 } else { -1 };
            let mut quiet = 0;
            while quiet < 2 {
                if m.abs() > M_MAX {
                    return Err(Error::Truncation(m));
                }
                let spec = self.spec(m, spin, lambda);
                if channel_domain(&spec, grid, Boundary::WholeLine)?.is_none() {
                    quiet += 1;
                } else {
                    quiet = 0;
                    ms.push(m);
                }
                m_max = m_max.max(m.abs());
                m += dir;
            }
        }
        ms.sort_unstable();
        Ok((ms, m_max))
    }

    fn count_on(&self, lambda: f64, op: OperatorKind, grid: &RadialGrid) -> Result<CountReport> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return domain(format!("coupling must be finite and nonnegative, got {lambda}"));
        }
        let mut per_channel = Vec::new();
        let mut m_max_used = 0;
        if lambda > 0.0 || op != OperatorKind::Schrodinger {
            for &spin in op.spins() {
                let (ms, m_max) = self.channels(spin, lambda, grid)?;
                m_max_used = m_max_used.max(m_max);
                let counts: Vec<Result<ChannelCount>> = ms
                    .par_iter()
                    .map(|&m| {
                        let inertia = count_channel(&self.spec(m, spin, lambda), grid, self.options.boundary)?;
                        Ok(ChannelCount { m, spin, count: inertia.negative, near_zero: inertia.near_zero })
                    })
                    .collect();
                for c in counts {
                    let c = c?;
                    if c.count > 0 || c.near_zero > 0 {
                        per_channel.push(c);
                    }
                }
            }
        }
        let total = per_channel.iter().map(|c| c.count).sum();
        let near_zero = per_channel.iter().map(|c| c.near_zero).sum();
        Ok(CountReport {
            operator: op,
            lambda,
            total,
            per_channel,
            m_max_used,
            truncation_certified: true,
            grid_delta: None,
            near_zero,
        })
    }

    /// N(H − λV) for the chosen operator.
    pub fn count(&self, lambda: f64, op: OperatorKind) -> Result<CountReport> {
        let mut rep = self.count_on(lambda, op, &self.grid)?;
        if self.options.grid_check {
            let fine = self.count_on(lambda, op, &self.grid.refined())?;
            rep.grid_delta = Some(fine.total as i64 - rep.total as i64);
        }
        Ok(rep)
    }

    /// Counts for each λ, in input order.
    pub fn sweep(&self, lambdas: &[f64], op: OperatorKind) -> Result<Vec<CountReport>> {
        lambdas.par_iter().map(|&l| self.count(l, op)).collect()
    }
}

/// Counting for −∂_t² + ν² − λ𝒱r² on the whole line: the channel of
/// −∂²_r + (ν² − 1/4)r^{−2} − λ𝒱 in the reduced radial variable.
pub fn count_constant_channel(nu2: f64, potential: &PotentialModel, lambda: f64, grid: &RadialGrid) -> Result<u64> {
    let spec = ChannelSpec {
        m: 0,
        spin: Spin::Schrodinger,
        form: FormKind::Direct,
        centrifugal: Centrifugal::Constant(nu2),
        potential,
        lambda,
    };
    Ok(count_channel(&spec, grid, Boundary::WholeLine)?.negative)
}
