//! Second-order holomorphic motion of the unit circle under `f_α`, the
//! series `u₁`, `u₂`, and the averaged identities they satisfy over the
//! period-`n` sample points.
//!
//! Powers `z^{q^k}` on the circle are carried as angles. For sample points
//! `σ = e^{2πi r/N}` the angle is an exact residue mod `N`; otherwise it is a
//! float in turns, multiplied by `q` and reduced each step. The float error
//! grows like `|q|^k` but the `k`-th term is weighted by `|q|^{-k}`.

use crate::error::{Error, Result};
use crate::family::RescaledMap;
use crate::periodic::{periodic_points, PeriodicConfig};
use crate::sum::{fit_line, pairwise_c};
use num_bigint::BigInt;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    k: usize,
    q: i64,
}

impl SeriesConfig {
    pub fn new(d: u32, k: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("degree must be at least 2, got {d}")));
        }
        if k < 20 {
            return Err(Error::InvalidParameter(format!("truncation index {k} is below 20")));
        }
        let cfg = SeriesConfig { k, q: -(d as i64) };
        if cfg.tail_bound() >= 1e-15 {
            return Err(Error::InvalidParameter(format!(
                "truncation K = {k} leaves a tail bound of {:e}",
                cfg.tail_bound()
            )));
        }
        Ok(cfg)
    }

    pub fn for_degree(d: u32) -> Result<Self> {
        Self::new(d, 60)
    }

    pub fn truncation(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn d(&self) -> u32 {
        (-self.q) as u32
    }

    /// `|q|^{-K} / (1 - 1/|q|)`.
    pub fn tail_bound(&self) -> f64 {
        let a = self.q.unsigned_abs() as f64;
        a.powi(-(self.k as i32)) / (1.0 - 1.0 / a)
    }

    /// Coefficient of `z²` in the source term of the `u₂` equation:
    /// `q(q+1)/2` for `d ≥ 3`, and 0 for `d = 2`, where `f_α` has no
    /// `α²` term.
    pub fn z2_source(&self) -> f64 {
        if self.q == -2 {
            0.0
        } else {
            let q = self.q as f64;
            q * (q + 1.0) / 2.0
        }
    }
}

/// A point of the unit circle tracked by its angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CirclePoint {
    /// `e^{2πi r/N}`.
    Root { residue: u64, modulus: u64 },
    /// `e^{2πi t}`, `t ∈ [0, 1)`.
    Turns(f64),
}

impl CirclePoint {
    pub fn from_complex(z: Complex64) -> Result<Self> {
        if ((z.norm() - 1.0).abs()) > 1e-12 {
            return Err(Error::Domain(format!("|z| = {} is off the unit circle", z.norm())));
        }
        Ok(CirclePoint::Turns((z.arg() / TAU).rem_euclid(1.0)))
    }

    pub fn value(&self) -> Complex64 {
        match *self {
            CirclePoint::Root { residue, modulus } => Complex64::from_polar(1.0, TAU * residue as f64 / modulus as f64),
            CirclePoint::Turns(t) => Complex64::from_polar(1.0, TAU * t),
        }
    }

    /// `z^k` for an integer `k`.
    pub fn pow(&self, k: i64) -> CirclePoint {
        match *self {
            CirclePoint::Root { residue, modulus } => {
                let m = modulus as i128;
                let r = (residue as i128 * (k as i128).rem_euclid(m)).rem_euclid(m);
                CirclePoint::Root { residue: r as u64, modulus }
            }
            CirclePoint::Turns(t) => CirclePoint::Turns((t * k as f64).rem_euclid(1.0)),
        }
    }
}

/// `z, z^q, z^{q²}, …` as complex values.
fn chain(z: CirclePoint, q: i64, len: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(len);
    let mut p = z;
    for _ in 0..len {
        out.push(p.value());
        p = p.pow(q);
    }
    out
}

fn inv_powers(q: i64, k: usize) -> Vec<f64> {
    (0..=k).map(|i| (q as f64).powi(-(i as i32))).collect()
}

/// `u₁` at `chain[at]`: `Σ_{l ≤ K} chain[at + l] / q^l`.
fn u1_in(chain: &[Complex64], at: usize, w: &[f64]) -> Complex64 {
    chain[at..at + w.len()].iter().zip(w).map(|(z, c)| z * c).sum()
}

/// `u₂` at `chain[at]`, needs `chain.len() ≥ at + 2K + 1`.
fn u2_in(chain: &[Complex64], at: usize, w: &[f64], cfg: &SeriesConfig) -> Complex64 {
    let q = cfg.q as f64;
    let c = cfg.z2_source();
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, wk) in w.iter().enumerate() {
        let z = chain[at + k];
        let u = u1_in(chain, at + k, w);
        let source = q * (q - 1.0) / 2.0 * u * u - q * (q + 1.0) * z * u + c * z * z;
        acc += -source / q * wk;
    }
    acc
}

pub fn u1_at(z: CirclePoint, cfg: &SeriesConfig) -> Complex64 {
    let ch = chain(z, cfg.q, cfg.k + 1);
    u1_in(&ch, 0, &inv_powers(cfg.q, cfg.k))
}

pub fn u2_at(z: CirclePoint, cfg: &SeriesConfig) -> Complex64 {
    let ch = chain(z, cfg.q, 2 * cfg.k + 1);
    u2_in(&ch, 0, &inv_powers(cfg.q, cfg.k), cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalResiduals {
    pub samples: usize,
    /// `max |u₁(z^q) - q u₁(z) + q z|`.
    pub first: f64,
    /// `max |u₂(z^q) - q u₂(z) - S(z)|` with `S` the second-order source.
    pub second: f64,
}

/// Residuals of the equations for `u₁` and `u₂` at `samples` equally spaced
/// points `e^{2πi(j+1/2)/samples}`.
pub fn functional_residuals(samples: usize, cfg: &SeriesConfig) -> FunctionalResiduals {
    let q = cfg.q as f64;
    let (mut first, mut second) = (0.0f64, 0.0f64);
    for j in 0..samples {
        let p = CirclePoint::Turns((j as f64 + 0.5) / samples as f64);
        let z = p.value();
        let u = u1_at(p, cfg);
        first = first.max((u1_at(p.pow(cfg.q), cfg) - q * u + q * z).norm());
        let source = q * (q - 1.0) / 2.0 * u * u - q * (q + 1.0) * z * u + cfg.z2_source() * z * z;
        second = second.max((u2_at(p.pow(cfg.q), cfg) - q * u2_at(p, cfg) - source).norm());
    }
    FunctionalResiduals { samples, first, second }
}

/// `u₁(z) = Σ_k z^{q^k} / q^k` on the unit circle. Off the circle the
/// negative powers make the series diverge, so such inputs are rejected.
pub fn u1(z: Complex64, cfg: &SeriesConfig) -> Result<Complex64> {
    Ok(u1_at(CirclePoint::from_complex(z)?, cfg))
}

/// Solution of `u₂(z^q) - q u₂(z) = q(q-1)/2 u₁² - q(q+1) z u₁ + c z²`.
pub fn u2(z: Complex64, cfg: &SeriesConfig) -> Result<Complex64> {
    Ok(u2_at(CirclePoint::from_complex(z)?, cfg))
}

/// `φ_α(z) = z (1 + u₁(z) α + u₂(z) α²)`.
pub fn phi_alpha(z: Complex64, alpha: Complex64, cfg: &SeriesConfig) -> Result<Complex64> {
    if alpha.norm() > 0.1 {
        return Err(Error::Domain(format!("|alpha| = {} exceeds 0.1", alpha.norm())));
    }
    let p = CirclePoint::from_complex(z)?;
    Ok(phi_at(p, alpha, cfg))
}

fn phi_at(p: CirclePoint, alpha: Complex64, cfg: &SeriesConfig) -> Complex64 {
    let z = p.value();
    z * (1.0 + u1_at(p, cfg) * alpha + u2_at(p, cfg) * alpha * alpha)
}

/// The sample `t_j = j / (q^n - 1)`, `j = 1..|q^n - 1|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageContext {
    pub q: i64,
    pub n: u32,
    modulus: u64,
    negative: bool,
}

impl AverageContext {
    pub fn new(q: i64, n: u32) -> Result<Self> {
        if n == 0 || q.unsigned_abs() < 2 {
            return Err(Error::InvalidParameter(format!("bad average context q = {q}, n = {n}")));
        }
        let qn = (q as i128).checked_pow(n).filter(|v| v.unsigned_abs() < 1 << 40);
        let qn = qn.ok_or_else(|| Error::Budget(format!("|q^n - 1| too large for q = {q}, n = {n}")))?;
        let m = qn - 1;
        Ok(AverageContext { q, n, modulus: m.unsigned_abs() as u64, negative: m < 0 })
    }

    pub fn len(&self) -> u64 {
        self.modulus
    }

    pub fn is_empty(&self) -> bool {
        self.modulus == 0
    }

    /// `σ(t_j) = e^{2πi j/(q^n-1)}`.
    pub fn sample(&self, j: u64) -> CirclePoint {
        let r = j % self.modulus;
        let residue = if self.negative { (self.modulus - r) % self.modulus } else { r };
        CirclePoint::Root { residue, modulus: self.modulus }
    }
}

/// `⟨G⟩_n = (1/|q^n-1|) Σ_j G(t_j)`, summed in a fixed pairwise order.
pub fn average<G>(g: G, ctx: &AverageContext) -> Complex64
where
    G: Fn(CirclePoint) -> Complex64 + Sync,
{
    let terms: Vec<Complex64> = (1..=ctx.len()).into_par_iter().map(|j| g(ctx.sample(j))).collect();
    pairwise_c(&terms) / ctx.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModularReport {
    pub q: i64,
    pub n: u32,
    pub modulus: String,
    pub no_power_vanishes: bool,
    pub no_sum_vanishes: bool,
    pub differences_match_period: bool,
    pub counterexamples: Vec<String>,
}

impl ModularReport {
    pub fn passed(&self) -> bool {
        self.no_power_vanishes && self.no_sum_vanishes && self.differences_match_period
    }
}

/// Exhaustive check, in exact integers modulo `q^n - 1`, that `q^m ≢ 0`,
/// `q^{m₁} + q^{m₂} ≢ 0`, and `q^{m₁} ≡ q^{m₂}` exactly when `n | m₁ - m₂`,
/// for `0 ≤ m, m₁, m₂ ≤ m_range`.
pub fn modular_lemma_check(q: i64, n: u32, m_range: u32) -> Result<ModularReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let modulus: BigInt = BigInt::from(q).pow(n) - BigInt::from(1);
    let zero = BigInt::from(0);
    let pows: Vec<BigInt> = (0..=m_range).map(|m| BigInt::from(q).pow(m) % &modulus).collect();
    let mut report = ModularReport {
        q,
        n,
        modulus: modulus.to_string(),
        no_power_vanishes: true,
        no_sum_vanishes: true,
        differences_match_period: true,
        counterexamples: Vec::new(),
    };
    for (m, p) in pows.iter().enumerate() {
        if *p == zero {
            report.no_power_vanishes = false;
            report.counterexamples.push(format!("q^{m} = 0"));
        }
    }
    for (m1, a) in pows.iter().enumerate() {
        for (m2, b) in pows.iter().enumerate() {
            if (a + b) % &modulus == zero {
                report.no_sum_vanishes = false;
                report.counterexamples.push(format!("q^{m1} + q^{m2} = 0"));
            }
            let congruent = (a - b) % &modulus == zero;
            if congruent != ((m1 as i64 - m2 as i64) % n as i64 == 0) {
                report.differences_match_period = false;
                report.counterexamples.push(format!("q^{m1} - q^{m2}: congruent = {congruent}"));
            }
        }
    }
    Ok(report)
}

/// One checked identity: a computed value against its closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub id: String,
    pub q: i64,
    pub n: u32,
    pub value: Complex64,
    pub closed_form: Complex64,
    pub abs_error: f64,
}

impl IdentityRecord {
    pub const HEADER: &'static str = "id\tq\tn\tvalue_re\tvalue_im\tclosed_re\tclosed_im\tabs_error";

    fn new(id: impl Into<String>, q: i64, n: u32, value: Complex64, closed_form: Complex64) -> Self {
        IdentityRecord { id: id.into(), q, n, value, closed_form, abs_error: (value - closed_form).norm() }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.abs_error < tol
    }

    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{:.15e}\t{:.15e}\t{:.15e}\t{:.15e}\t{:.3e}",
            self.id,
            self.q,
            self.n,
            self.value.re,
            self.value.im,
            self.closed_form.re,
            self.closed_form.im,
            self.abs_error
        )
    }
}

/// Per-sample quantities along `σ, σ^q, …, σ^{q^{n-1}}`.
struct SampleOrbit {
    s: Vec<Complex64>,
    u1: Vec<Complex64>,
    u2: Vec<Complex64>,
}

fn sample_orbit(p: CirclePoint, n: usize, cfg: &SeriesConfig, with_u2: bool) -> SampleOrbit {
    let w = inv_powers(cfg.q, cfg.k);
    let len = n + if with_u2 { 2 * cfg.k + 1 } else { cfg.k + 1 };
    let ch = chain(p, cfg.q, len);
    SampleOrbit {
        s: ch[..n].to_vec(),
        u1: (0..n).map(|m| u1_in(&ch, m, &w)).collect(),
        u2: if with_u2 { (0..n).map(|m| u2_in(&ch, m, &w, cfg)).collect() } else { Vec::new() },
    }
}

fn a_term(q: f64, s: Complex64, u1: Complex64) -> Complex64 {
    q * q * (q - 1.0) * u1 - q * q * (q + 1.0) * s
}

fn b_term(q: f64, s: Complex64, u1: Complex64, u2: Complex64) -> Complex64 {
    q * q * (q + 1.0) * (q + 2.0) / 2.0 * s * s + q * q * (q - 1.0) * (q - 2.0) / 2.0 * u1 * u1
        - q * q * q * (q + 1.0) * s * u1
        + q * q * (q - 1.0) * u2
}

fn check_budget(ctx: &AverageContext, min_n: u32) -> Result<()> {
    if ctx.n < min_n {
        return Err(Error::InvalidParameter(format!("n must be at least {min_n}")));
    }
    if ctx.len() > 100_000 {
        return Err(Error::Budget(format!("{} samples exceed the 1e5 budget", ctx.len())));
    }
    Ok(())
}

fn series_for(q: i64, cfg: &SeriesConfig) -> Result<()> {
    if q != cfg.q {
        return Err(Error::InvalidParameter(format!("config is for q = {}, not {q}", cfg.q)));
    }
    Ok(())
}

/// The four double sums over `0 ≤ m₁, m₂ < n` and their closed forms
/// `n`, `nq/(q-1)`, `nq²/(q-1)²`, `nq⁴`.
pub fn appendix_sums(q: i64, n: u32, cfg: &SeriesConfig) -> Result<Vec<IdentityRecord>> {
    series_for(q, cfg)?;
    let ctx = AverageContext::new(q, n)?;
    check_budget(&ctx, 2)?;
    let qf = q as f64;
    let nf = n as f64;
    let sums: Vec<[Complex64; 4]> = (1..=ctx.len())
        .into_par_iter()
        .map(|j| {
            let o = sample_orbit(ctx.sample(j), n as usize, cfg, false);
            let ss: Complex64 = o.s.iter().sum();
            let su: Complex64 = o.u1.iter().sum();
            let sa: Complex64 = o.s.iter().zip(&o.u1).map(|(s, u)| a_term(qf, *s, *u)).sum();
            [ss * ss.conj(), su * ss.conj(), su * su.conj(), sa * sa.conj()]
        })
        .collect();
    let mean = |i: usize| pairwise_c(&sums.iter().map(|v| v[i]).collect::<Vec<_>>()) / ctx.len() as f64;
    let c = |x: f64| Complex64::new(x, 0.0);
    Ok(vec![
        IdentityRecord::new("sigma_difference_sum", q, n, mean(0), c(nf)),
        IdentityRecord::new("u1_sigma_sum", q, n, mean(1), c(nf * qf / (qf - 1.0))),
        IdentityRecord::new("u1_u1_sum", q, n, mean(2), c(nf * qf * qf / ((qf - 1.0) * (qf - 1.0)))),
        IdentityRecord::new("a_a_sum", q, n, mean(3), c(nf * qf.powi(4))),
    ])
}

/// `⟨u₁(σ^{q^{m₁}}) σ^{-q^{m₂}}⟩_n`.
pub fn u1_sigma_closed_form(q: i64, n: u32, m1: u32, m2: u32) -> f64 {
    let (qf, qn) = (q as f64, (q as f64).powi(n as i32));
    let e = m1 as i32 - m2 as i32;
    if m1 > m2 {
        qf.powi(e) / (qn - 1.0)
    } else {
        qf.powi(e) * qn / (qn - 1.0)
    }
}

/// `⟨u₁(σ^{q^{m₁}}) conj u₁(σ^{q^{m₂}})⟩_n`.
pub fn u1_u1_closed_form(q: i64, n: u32, m1: u32, m2: u32) -> f64 {
    let (qf, qn) = (q as f64, (q as f64).powi(n as i32));
    let e = (m1 as i32 - m2 as i32).abs();
    qf.powi(2 + n as i32) * (qf.powi(e - n as i32) + qf.powi(-e)) / ((qf * qf - 1.0) * (qn - 1.0))
}

/// Entry-by-entry tables of `⟨σ^{q^{m₁} - q^{m₂}}⟩`, `⟨u₁ σ^{-q^{m₂}}⟩` and
/// `⟨u₁ conj u₁⟩`.
pub fn pointwise_tables(q: i64, n: u32, cfg: &SeriesConfig) -> Result<Vec<IdentityRecord>> {
    series_for(q, cfg)?;
    let ctx = AverageContext::new(q, n)?;
    check_budget(&ctx, 1)?;
    let nn = n as usize;
    let per: Vec<Vec<Complex64>> = (1..=ctx.len())
        .into_par_iter()
        .map(|j| {
            let o = sample_orbit(ctx.sample(j), nn, cfg, false);
            let mut row = Vec::with_capacity(3 * nn * nn);
            for a in 0..nn {
                for b in 0..nn {
                    row.push(o.s[a] * o.s[b].conj());
                    row.push(o.u1[a] * o.s[b].conj());
                    row.push(o.u1[a] * o.u1[b].conj());
                }
            }
            row
        })
        .collect();
    let mut out = Vec::new();
    for a in 0..nn {
        for b in 0..nn {
            let base = 3 * (a * nn + b);
            let mean = |i: usize| pairwise_c(&per.iter().map(|r| r[base + i]).collect::<Vec<_>>()) / ctx.len() as f64;
            let (m1, m2) = (a as u32, b as u32);
            let delta = if a == b { 1.0 } else { 0.0 };
            out.push(IdentityRecord::new(format!("sigma_difference[{a},{b}]"), q, n, mean(0), delta.into()));
            out.push(IdentityRecord::new(
                format!("u1_sigma[{a},{b}]"),
                q,
                n,
                mean(1),
                u1_sigma_closed_form(q, n, m1, m2).into(),
            ));
            out.push(IdentityRecord::new(
                format!("u1_u1[{a},{b}]"),
                q,
                n,
                mean(2),
                u1_u1_closed_form(q, n, m1, m2).into(),
            ));
        }
    }
    Ok(out)
}

/// `⟨A_m⟩`, `⟨B_m⟩` and `⟨A_{m₁} A_{m₂}⟩`, all of which vanish.
pub fn corollary_vanishing(q: i64, n: u32, cfg: &SeriesConfig) -> Result<Vec<IdentityRecord>> {
    series_for(q, cfg)?;
    let ctx = AverageContext::new(q, n)?;
    check_budget(&ctx, 1)?;
    let qf = q as f64;
    let nn = n as usize;
    let per: Vec<Vec<Complex64>> = (1..=ctx.len())
        .into_par_iter()
        .map(|j| {
            let o = sample_orbit(ctx.sample(j), nn, cfg, true);
            let a: Vec<Complex64> = (0..nn).map(|m| a_term(qf, o.s[m], o.u1[m])).collect();
            let mut row = a.clone();
            row.extend((0..nn).map(|m| b_term(qf, o.s[m], o.u1[m], o.u2[m])));
            for x in 0..nn {
                for y in 0..nn {
                    row.push(a[x] * a[y]);
                }
            }
            row
        })
        .collect();
    let mean = |i: usize| pairwise_c(&per.iter().map(|r| r[i]).collect::<Vec<_>>()) / ctx.len() as f64;
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::new();
    for m in 0..nn {
        out.push(IdentityRecord::new(format!("a_mean[{m}]"), q, n, mean(m), zero));
    }
    for m in 0..nn {
        out.push(IdentityRecord::new(format!("b_mean[{m}]"), q, n, mean(nn + m), zero));
    }
    for x in 0..nn {
        for y in 0..nn {
            out.push(IdentityRecord::new(format!("a_a_mean[{x},{y}]"), q, n, mean(2 * nn + x * nn + y), zero));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderReport {
    pub alpha: Complex64,
    /// Average built from the second-order motion `φ_α`.
    pub lhs_motion: f64,
    /// Average over the continued periodic points.
    pub lhs_periodic: f64,
    /// `|q|^{-nD} (1 + D² n |α|² / 4)`.
    pub rhs: f64,
    pub disc_motion: f64,
    pub disc_periodic: f64,
}

/// Both sides of `⟨Π_m |f_α'(φ_α(σ^{q^m}))|^{-D}⟩_n = |q|^{-nD}(1 + D²n|α|²/4 + O(α³))`.
pub fn second_order_average_check(d: u32, n: u32, dim: f64, alpha: Complex64) -> Result<SecondOrderReport> {
    if alpha.norm() > 0.05 {
        return Err(Error::Domain(format!("|alpha| = {} exceeds 0.05", alpha.norm())));
    }
    let cfg = SeriesConfig::for_degree(d)?;
    let ctx = AverageContext::new(cfg.q, n)?;
    check_budget(&ctx, 1)?;
    let f = RescaledMap::new(d, alpha)?;
    let nn = n as usize;
    let terms: Vec<Complex64> = (1..=ctx.len())
        .into_par_iter()
        .map(|j| {
            let o = sample_orbit(ctx.sample(j), nn, &cfg, true);
            let log: f64 = (0..nn)
                .map(|m| {
                    let phi = o.s[m] * (1.0 + o.u1[m] * alpha + o.u2[m] * alpha * alpha);
                    f.derivative_unchecked(phi).norm().ln()
                })
                .sum();
            Complex64::new((-dim * log).exp(), 0.0)
        })
        .collect();
    let lhs_motion = pairwise_c(&terms).re / ctx.len() as f64;
    let set = periodic_points(&f, n, &PeriodicConfig::default())?;
    let per: Vec<Complex64> = set.multipliers.iter().map(|m| Complex64::new(m.norm().powf(-dim), 0.0)).collect();
    let lhs_periodic = pairwise_c(&per).re / set.len() as f64;
    let qa = d as f64;
    let rhs = qa.powf(-(n as f64) * dim) * (1.0 + dim * dim * n as f64 * alpha.norm_sqr() / 4.0);
    Ok(SecondOrderReport {
        alpha,
        lhs_motion,
        lhs_periodic,
        rhs,
        disc_motion: (lhs_motion - rhs).abs(),
        disc_periodic: (lhs_periodic - rhs).abs(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderSweep {
    pub rows: Vec<SecondOrderReport>,
    /// Log-log slopes of the discrepancies against `|α|`.
    pub slope_motion: f64,
    pub slope_periodic: f64,
    /// Smallest `c` with `disc ≤ c |α|³` on every row.
    pub c_motion: f64,
    pub c_periodic: f64,
    /// Richardson extrapolation of `(lhs/|q|^{-nD} - 1)/|α|²` from the two
    /// smallest `|α|`, to compare with `D² n / 4`.
    pub coefficient_motion: f64,
    pub coefficient_periodic: f64,
    pub coefficient_expected: f64,
}

/// Runs [`second_order_average_check`] over real `α` values, which must be
/// sorted ascending with the second equal to twice the first.
pub fn second_order_sweep(d: u32, n: u32, dim: f64, alphas: &[f64]) -> Result<SecondOrderSweep> {
    if alphas.len() < 2 || (alphas[1] - 2.0 * alphas[0]).abs() > 1e-12 * alphas[1] {
        return Err(Error::InvalidParameter("sweep needs at least two alphas with a[1] = 2 a[0]".into()));
    }
    let rows: Vec<SecondOrderReport> = alphas
        .iter()
        .map(|&a| second_order_average_check(d, n, dim, Complex64::new(a, 0.0)))
        .collect::<Result<_>>()?;
    let lx: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
    let slope = |pick: fn(&SecondOrderReport) -> f64| {
        let ly: Vec<f64> = rows.iter().map(|r| pick(r).ln()).collect();
        fit_line(&lx, &ly).0
    };
    let c_fit = |pick: fn(&SecondOrderReport) -> f64| {
        rows.iter().zip(alphas).map(|(r, a)| pick(r) / a.powi(3)).fold(0.0, f64::max)
    };
    let base = (d as f64).powf(-(n as f64) * dim);
    let coeff = |pick: fn(&SecondOrderReport) -> f64| {
        let g = |i: usize| (pick(&rows[i]) / base - 1.0) / (alphas[i] * alphas[i]);
        2.0 * g(0) - g(1)
    };
    Ok(SecondOrderSweep {
        slope_motion: slope(|r| r.disc_motion),
        slope_periodic: slope(|r| r.disc_periodic),
        c_motion: c_fit(|r| r.disc_motion),
        c_periodic: c_fit(|r| r.disc_periodic),
        coefficient_motion: coeff(|r| r.lhs_motion),
        coefficient_periodic: coeff(|r| r.lhs_periodic),
        coefficient_expected: dim * dim * n as f64 / 4.0,
        rows,
    })
}
