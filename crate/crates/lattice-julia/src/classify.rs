//! Basin and parameter classification.
//!
//! Point verdicts follow the full basins of `U`. Depths and the quasicircle
//! conditions need the *immediate* basins `𝒜(1)` and `𝒜(∞)`, which are
//! decided by lifting a path from a trapped iterate back along the
//! `T`-orbit: `T` maps `𝒜(1)` onto `𝒜(∞)` and `𝒜(∞)` onto `𝒜(1)`, and
//! `T^{-1}(𝒜(∞)) = 𝒜(1)` because `1` is the only preimage of `∞`.

use crate::error::{Error, Result};
use crate::family::FamilyParams;
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinTestConfig {
    pub attract_eps: f64,
    pub escape_radius: f64,
    pub max_iter: u32,
}

impl Default for BasinTestConfig {
    fn default() -> Self {
        BasinTestConfig { attract_eps: 1e-8, escape_radius: 1e8, max_iter: 5000 }
    }
}

impl BasinTestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.attract_eps > 0.0 && self.attract_eps < 1.0) {
            return Err(Error::InvalidParameter("attract_eps must lie in (0, 1)".into()));
        }
        if !(self.escape_radius > 1.0 && self.escape_radius.is_finite()) {
            return Err(Error::InvalidParameter("escape_radius must be finite and > 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }

    pub fn with_max_iter(self, max_iter: u32) -> Self {
        BasinTestConfig { max_iter, ..self }
    }

    fn near_one(&self, z: &SpherePoint) -> bool {
        matches!(z, SpherePoint::Finite(w) if (w - 1.0).norm() < self.attract_eps)
    }

    fn near_infinity(&self, z: &SpherePoint) -> bool {
        z.modulus() > self.escape_radius
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasinVerdict {
    AttractedToOne,
    AttractedToInfinity,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointOutcome {
    pub verdict: BasinVerdict,
    /// `U`-iterations until the trap was entered (the budget if undetermined).
    pub iterations: u32,
    /// `|U^k(z)|` on escape, used for smooth shading; 0 otherwise.
    pub escape_modulus: f64,
}

/// Full-basin verdict for `z` under `U`. A trap entry only counts once the
/// following iterate is also inside the trap.
pub fn classify_point(p: &FamilyParams, z: SpherePoint, cfg: &BasinTestConfig) -> PointOutcome {
    let mut w = z;
    let mut next = p.eval_u(w);
    for k in 0..=cfg.max_iter {
        if cfg.near_infinity(&w) && cfg.near_infinity(&next) {
            return PointOutcome {
                verdict: BasinVerdict::AttractedToInfinity,
                iterations: k,
                escape_modulus: w.modulus().min(f64::MAX),
            };
        }
        if cfg.near_one(&w) && cfg.near_one(&next) {
            return PointOutcome { verdict: BasinVerdict::AttractedToOne, iterations: k, escape_modulus: 0.0 };
        }
        w = next;
        next = p.eval_u(w);
    }
    PointOutcome { verdict: BasinVerdict::Undetermined, iterations: cfg.max_iter, escape_modulus: 0.0 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamVerdict {
    /// `T^n(0) ∈ 𝒜(1)` with `n` minimal.
    CaptureDepth { depth: u32, iterations: u32 },
    NonEscapingWithinBudget { iterations: u32 },
    Degenerate,
}

impl ParamVerdict {
    pub fn depth(&self) -> Option<u32> {
        match self {
            ParamVerdict::CaptureDepth { depth, .. } => Some(*depth),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ParamVerdict::CaptureDepth { depth, .. } => format!("CaptureDepth({depth})"),
            ParamVerdict::NonEscapingWithinBudget { .. } => "NonEscapingWithinBudget".into(),
            ParamVerdict::Degenerate => "Degenerate".into(),
        }
    }
}

/// Membership of a point in the two immediate basins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    ImmediateOne,
    ImmediateInfinity,
    Elsewhere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Center {
    One,
    Infinity,
}

impl Center {
    fn point(self) -> SpherePoint {
        match self {
            Center::One => SpherePoint::ONE,
            Center::Infinity => SpherePoint::Infinity,
        }
    }
}

struct LiftOutcome {
    start: Membership,
    /// Smallest orbit index that lies in `𝒜(1)`.
    first_in_one: Option<usize>,
    orbit_len: usize,
}

const MAX_PATH_VERTICES: usize = 1 << 16;
const AMBIGUITY: f64 = 0.3;

/// Forward `T`-orbit of `z` until it is certified in one of the traps.
fn trapped_orbit(p: &FamilyParams, z: SpherePoint, cfg: &BasinTestConfig) -> Option<(Vec<SpherePoint>, Center)> {
    let budget = 2 * cfg.max_iter as usize + 2;
    let mut orbit = vec![z];
    orbit.push(p.t(z));
    orbit.push(p.t(orbit[1]));
    for k in 0..budget {
        if orbit.len() < k + 3 {
            let last = *orbit.last().unwrap();
            orbit.push(p.t(last));
        }
        let (x, y, w) = (orbit[k], orbit[k + 1], orbit[k + 2]);
        if cfg.near_one(&x) && cfg.near_infinity(&y) && cfg.near_one(&w) {
            orbit.truncate(k + 1);
            return Some((orbit, Center::One));
        }
        if cfg.near_infinity(&x) && cfg.near_one(&y) && cfg.near_infinity(&w) {
            orbit.truncate(k + 1);
            return Some((orbit, Center::Infinity));
        }
    }
    None
}

/// Lift the polyline `path` under `T^{-1}` starting from `start`, which must
/// be a preimage of `path[0]`. Segments are bisected while the nearest
/// preimage is not clearly separated from the next nearest.
fn lift_path(p: &FamilyParams, path: &[SpherePoint], start: SpherePoint) -> Option<Vec<SpherePoint>> {
    let mut out = vec![start];
    let mut cur = start;
    let mut prev = path[0];
    let mut stack: Vec<SpherePoint> = path[1..].iter().rev().copied().collect();
    while let Some(v) = stack.pop() {
        if out.len() + stack.len() > MAX_PATH_VERTICES {
            return None;
        }
        let cands = p.t_preimages(v);
        let mut dists: Vec<(f64, usize)> = cands.iter().enumerate().map(|(i, c)| (c.chordal(&cur), i)).collect();
        dists.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ambiguous = dists.len() > 1 && dists[0].0 > AMBIGUITY * dists[1].0;
        if ambiguous && !v.is_infinite() && prev.chordal(&v) > 1e-13 {
            stack.push(v);
            stack.push(prev.midpoint(&v));
            continue;
        }
        cur = cands[dists[0].1];
        out.push(cur);
        prev = v;
    }
    Some(out)
}

/// Walks the trapped `T`-orbit of `z` backwards. A lift of a path ending at
/// `1` ends at some `ξ_j`; only `ξ_0 = ∞` is taken to mean `𝒜(∞)`, which is
/// exact when `T` is univalent on `𝒜(∞)`, i.e. off `H_0`. A depth-0 answer
/// for the orbit of `0` is therefore always right; a positive depth could
/// only be wrong inside `H_0` after a lift wound around the critical value 0.
fn immediate_lift(p: &FamilyParams, z: SpherePoint, cfg: &BasinTestConfig) -> Option<LiftOutcome> {
    let (orbit, mut center) = trapped_orbit(p, z, cfg)?;
    let top = orbit.len() - 1;
    let mut first_in_one = (center == Center::One).then_some(top);
    let mut path = vec![orbit[top], center.point()];
    let xi: Vec<SpherePoint> = (0..p.d() as usize).map(|k| p.xi(k)).collect();
    for k in (0..top).rev() {
        let lifted = lift_path(p, &path, orbit[k])?;
        let end = *lifted.last().unwrap();
        let new_center = match center {
            Center::Infinity => Center::One,
            Center::One => {
                let nearest = (0..xi.len())
                    .min_by(|&a, &b| end.chordal(&xi[a]).total_cmp(&end.chordal(&xi[b])))
                    .unwrap();
                if nearest != 0 {
                    return Some(LiftOutcome { start: Membership::Elsewhere, first_in_one, orbit_len: orbit.len() });
                }
                Center::Infinity
            }
        };
        let mut next_path = Vec::with_capacity(lifted.len() + 1);
        for v in lifted {
            next_path.push(v);
            let inside = match new_center {
                Center::One => cfg.near_one(&v),
                Center::Infinity => cfg.near_infinity(&v),
            };
            if inside {
                break;
            }
        }
        next_path.push(new_center.point());
        path = next_path;
        center = new_center;
        if center == Center::One {
            first_in_one = Some(k);
        }
    }
    let start = match center {
        Center::One => Membership::ImmediateOne,
        Center::Infinity => Membership::ImmediateInfinity,
    };
    Some(LiftOutcome { start, first_in_one, orbit_len: orbit.len() })
}

/// Which immediate basin, if any, contains `z`. `None` when the orbit of `z`
/// is not trapped within the budget.
pub fn immediate_membership(p: &FamilyParams, z: SpherePoint, cfg: &BasinTestConfig) -> Result<Option<Membership>> {
    if p.is_degenerate() {
        return Err(Error::Degenerate);
    }
    Ok(membership_given(p, &classify_parameter(p, cfg), z, cfg))
}

/// Membership of `z` once the parameter verdict is known. Depth 0 means the
/// Fatou set is exactly the two basins, so full-basin verdicts are
/// immediate ones. Otherwise `T` is univalent on `𝒜(∞)`, which is what the
/// lifting endpoint test assumes.
fn membership_given(p: &FamilyParams, verdict: &ParamVerdict, z: SpherePoint, cfg: &BasinTestConfig) -> Option<Membership> {
    if verdict.depth() == Some(0) {
        return match classify_point(p, z, cfg).verdict {
            BasinVerdict::AttractedToOne => Some(Membership::ImmediateOne),
            BasinVerdict::AttractedToInfinity => Some(Membership::ImmediateInfinity),
            BasinVerdict::Undetermined => None,
        };
    }
    immediate_lift(p, z, cfg).map(|o| o.start)
}

pub fn classify_parameter(p: &FamilyParams, cfg: &BasinTestConfig) -> ParamVerdict {
    if p.is_degenerate() {
        return ParamVerdict::Degenerate;
    }
    match immediate_lift(p, SpherePoint::ZERO, cfg) {
        None => ParamVerdict::NonEscapingWithinBudget { iterations: cfg.max_iter },
        Some(o) => ParamVerdict::CaptureDepth {
            // 0 ∈ 𝒜(∞) puts T(0) in 𝒜(1).
            depth: o.first_in_one.unwrap_or(1) as u32,
            iterations: o.orbit_len as u32,
        },
    }
}

pub fn is_quasicircle(p: &FamilyParams, cfg: &BasinTestConfig) -> bool {
    classify_parameter(p, cfg).depth() == Some(0)
}

/// The five equivalent quasicircle conditions. `None` marks a sub-verdict
/// that could not be decided within the budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub verdict: ParamVerdict,
    pub quasicircle: Option<bool>,
    pub xi_in_infinity_basin: Option<bool>,
    pub omega_in_one_basin: Option<bool>,
    pub one_minus_lambda_in_infinity_basin: Option<bool>,
    pub zero_in_one_basin: Option<bool>,
}

impl LemmaReport {
    pub fn conditions(&self) -> [Option<bool>; 5] {
        [
            self.quasicircle,
            self.xi_in_infinity_basin,
            self.omega_in_one_basin,
            self.one_minus_lambda_in_infinity_basin,
            self.zero_in_one_basin,
        ]
    }

    pub fn determined(&self) -> bool {
        self.conditions().iter().all(Option::is_some)
    }

    /// `Some(true)` when every condition is decided and they agree.
    pub fn consistent(&self) -> Option<bool> {
        let c = self.conditions();
        if !self.determined() {
            return None;
        }
        Some(c.iter().all(|x| *x == c[0]))
    }
}

pub fn equiv_condition_check(p: &FamilyParams, cfg: &BasinTestConfig) -> Result<LemmaReport> {
    let cd = p.critical_data()?;
    let verdict = classify_parameter(p, cfg);
    let member = |z: SpherePoint| membership_given(p, &verdict, z, cfg);
    let all_in = |pts: &[SpherePoint], want: Membership| -> Option<bool> {
        let mut all = true;
        for z in pts {
            all &= member(*z)? == want;
        }
        Some(all)
    };
    Ok(LemmaReport {
        verdict,
        quasicircle: verdict.depth().map(|d| d == 0),
        xi_in_infinity_basin: all_in(&cd.xi, Membership::ImmediateInfinity),
        omega_in_one_basin: all_in(&cd.omega, Membership::ImmediateOne),
        one_minus_lambda_in_infinity_basin: member(cd.fixed_critical[1]).map(|m| m == Membership::ImmediateInfinity),
        zero_in_one_basin: member(SpherePoint::ZERO).map(|m| m == Membership::ImmediateOne),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GreenValue {
    /// `z` is (numerically) the center `1`, where `G = +∞`.
    Center,
    Value { g: f64, iterations: u32 },
}

/// One step of `e ↦ U(1+e) - 1`, computed without cancellation.
fn u_minus_one(lam: Complex64, d: u32, e: Complex64) -> Complex64 {
    let v = (e / (e + lam)).powu(d);
    let r = lam * v / (1.0 - v);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    let mut rp = Complex64::new(1.0, 0.0);
    for i in 1..=d {
        binom = binom * (d - i + 1) as f64 / i as f64;
        rp *= r;
        acc += binom * rp;
    }
    acc
}

/// Green function of the basin of `1` under `U`,
/// `G(z) = -lim d^{-k} log|U^k(z) - 1|`, with `G(U(z)) = d·G(z)`.
pub fn green_function(p: &FamilyParams, z: SpherePoint, k_max: u32, cfg: &BasinTestConfig) -> Result<GreenValue> {
    if p.is_degenerate() {
        return Err(Error::Degenerate);
    }
    if cfg.near_one(&z) {
        return Ok(GreenValue::Center);
    }
    let out = classify_point(p, z, cfg);
    if out.verdict != BasinVerdict::AttractedToOne {
        return Err(Error::NotAttracted);
    }
    let mut w = z;
    for _ in 0..out.iterations {
        w = p.eval_u(w);
    }
    let mut e = match w {
        SpherePoint::Finite(w) => w - 1.0,
        SpherePoint::Infinity => return Err(Error::NotAttracted),
    };
    if e == Complex64::new(0.0, 0.0) {
        return Ok(GreenValue::Center);
    }
    let d = p.d();
    let df = d as f64;
    let lam = p.lambda();
    let mut k = out.iterations as i32;
    let mut log_e = e.norm().ln();
    let mut g = -log_e / df.powi(k);
    let log_gain = df.ln() + lam.norm().ln() * (1.0 - df);
    let mut in_log_space = false;
    let mut delta = f64::INFINITY;
    loop {
        if k as u32 >= k_max {
            return if delta < 1e-6 {
                Ok(GreenValue::Value { g, iterations: k as u32 })
            } else {
                Err(Error::NonConvergence { residual: delta })
            };
        }
        if !in_log_space && e.norm() < 1e-100 {
            in_log_space = true;
        }
        if in_log_space {
            // U(1+e) - 1 ≈ d λ^{1-d} e^d once e is negligible next to λ.
            log_e = log_gain + df * log_e;
        } else {
            e = u_minus_one(lam, d, e);
            if e == Complex64::new(0.0, 0.0) {
                return Ok(GreenValue::Value { g, iterations: k as u32 });
            }
            log_e = e.norm().ln();
        }
        k += 1;
        let g_next = -log_e / df.powi(k);
        delta = (g_next - g).abs();
        g = g_next;
        if delta < 1e-13 * g.abs().max(1.0) {
            return Ok(GreenValue::Value { g, iterations: k as u32 });
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterResult {
    pub lambda: Complex64,
    pub residual: f64,
    pub newton_steps: u32,
    pub verdict: ParamVerdict,
}

/// Newton's method on `F(λ) = T_λ^n(0) - 1` from `seed`; a root is a center
/// of a depth-`n` capture component.
pub fn find_center(d: u32, n: u32, seed: Complex64, cfg: &BasinTestConfig) -> Result<CenterResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("center depth must be positive".into()));
    }
    let f = |lam: Complex64| -> Result<Complex64> {
        let p = FamilyParams::new(d, lam)?;
        let mut x = SpherePoint::ZERO;
        for _ in 0..n {
            x = p.t(x);
        }
        match x {
            SpherePoint::Finite(x) => Ok(x - 1.0),
            SpherePoint::Infinity => Err(Error::NonConvergence { residual: f64::INFINITY }),
        }
    };
    let h = 1e-7;
    let mut lam = seed;
    let mut fl = f(lam)?;
    for step in 0..100u32 {
        if fl.norm() < 1e-10 {
            let verdict = classify_parameter(&FamilyParams::new(d, lam)?, cfg);
            return Ok(CenterResult { lambda: lam, residual: fl.norm(), newton_steps: step, verdict });
        }
        let deriv = (f(lam + h)? - f(lam - h)?) / (2.0 * h);
        let mut delta = fl / deriv;
        // Damp wild steps so the iteration stays near the seed's component.
        let cap = 0.5 * (1.0 + lam.norm());
        if delta.norm() > cap {
            delta *= cap / delta.norm();
        }
        lam -= delta;
        fl = f(lam)?;
    }
    Err(Error::NonConvergence { residual: fl.norm() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Attracting,
    Parabolic,
    Repelling,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealFixedPoint {
    pub x: f64,
    pub multiplier: f64,
    pub stability: Stability,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealFixedPointReport {
    pub interval: (f64, f64),
    pub points: Vec<RealFixedPoint>,
    /// Set when sign changes in adjacent grid cells suggest roots closer
    /// than the grid spacing, so some may have merged.
    pub close_roots: bool,
}

const REAL_GRID: usize = 10_000;

/// Real fixed points of `U_λ` on `[a, b]` for real `λ`.
pub fn real_fixed_points(p: &FamilyParams, a: f64, b: f64) -> Result<RealFixedPointReport> {
    if p.lambda().im != 0.0 || p.is_degenerate() {
        return Err(Error::InvalidParameter("real fixed points need real, nonzero lambda".into()));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("bad interval [{a}, {b}]")));
    }
    let g = |x: f64| match p.eval_u(SpherePoint::new(x, 0.0)) {
        SpherePoint::Finite(u) => u.re - x,
        SpherePoint::Infinity => f64::INFINITY,
    };
    let xs: Vec<f64> = (0..=REAL_GRID).map(|i| a + (b - a) * i as f64 / REAL_GRID as f64).collect();
    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let mut points: Vec<RealFixedPoint> = Vec::new();
    let mut last_change: Option<usize> = None;
    let mut close_roots = false;
    let push = |x: f64, points: &mut Vec<RealFixedPoint>| {
        if points.last().is_some_and(|q| (q.x - x).abs() < 1e-9 * (1.0 + x.abs())) {
            return;
        }
        let m = p.eval_u_prime(SpherePoint::new(x, 0.0)).finite().map_or(f64::INFINITY, |c| c.re);
        let stability = if (m.abs() - 1.0).abs() <= 1e-9 {
            Stability::Parabolic
        } else if m.abs() < 1.0 {
            Stability::Attracting
        } else {
            Stability::Repelling
        };
        points.push(RealFixedPoint { x, multiplier: m, stability });
    };
    for i in 0..REAL_GRID {
        let (g0, g1) = (gs[i], gs[i + 1]);
        if g0 == 0.0 {
            push(xs[i], &mut points);
            continue;
        }
        if !(g0.is_finite() && g1.is_finite()) || g0.signum() == g1.signum() || g1 == 0.0 {
            continue;
        }
        if last_change == Some(i.wrapping_sub(1)) {
            close_roots = true;
        }
        last_change = Some(i);
        let (mut lo, mut hi) = (xs[i], xs[i + 1]);
        let slo = g0.signum();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid).signum() == slo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        // Sign changes across poles of U bisect to the pole, not to a root.
        if g(x).abs() <= 1e-6 * (1.0 + x.abs()) {
            push(x, &mut points);
        }
    }
    if gs[REAL_GRID] == 0.0 {
        push(xs[REAL_GRID], &mut points);
    }
    Ok(RealFixedPointReport { interval: (a, b), points, close_roots })
}
