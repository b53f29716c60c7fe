//! Repelling periodic points of `f_α` on its quasicircle Julia set and
//! dimension estimates from the pressure sum `Σ |(f^n)'(z)|^{-D}`.
//!
//! At `α = 0` the period-`n` points are the `N`-th roots of unity,
//! `N = |q^n - 1|`. They are followed to the target `α` along a straight
//! path in small steps; at each step every cycle is recomputed by pulling
//! back through the inverse branch nearest the previous estimate, which
//! contracts by `1/d` per application.

use crate::classify::{is_quasicircle, BasinTestConfig};
use crate::error::{Error, Result};
use crate::family::{FamilyParams, RescaledMap};
use crate::sum::pairwise;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicConfig {
    /// Largest `|Δα|` per continuation step.
    pub alpha_step: f64,
    pub alpha_ceiling: f64,
    pub max_sweeps: usize,
    pub residual_tol: f64,
    pub max_points: u64,
    /// Largest accepted period; `None` means [`default_n_max`].
    pub n_max: Option<u32>,
}

impl Default for PeriodicConfig {
    fn default() -> Self {
        PeriodicConfig { alpha_step: 0.02, alpha_ceiling: 0.25, max_sweeps: 64, residual_tol: 1e-10, max_points: 600_000, n_max: None }
    }
}

/// Default largest period: 14 for `d = 2`, 9 for `d = 3`, otherwise the
/// largest `n` with `d^n ≤ 2·10^5`.
pub fn default_n_max(d: u32) -> u32 {
    match d {
        2 => 14,
        3 => 9,
        _ => {
            let mut n = 1;
            while (d as f64).powi(n as i32 + 1) <= 2e5 {
                n += 1;
            }
            n
        }
    }
}

impl PeriodicConfig {
    pub fn n_max(&self, d: u32) -> u32 {
        self.n_max.unwrap_or_else(|| default_n_max(d))
    }
}

/// Period used for dimension estimates: 14 for `d = 2`, 9 for `d = 3`.
/// The finite-`n` bias is about `d^{-n}/(n log d)`; longer periods for
/// `d ≥ 3` push the forward residual of `f^n` past `10^{-10}` once `α ≠ 0`.
pub fn default_period(d: u32) -> u32 {
    match d {
        2 => 14,
        3 => 9,
        _ => default_n_max(d).min(7),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbitSet {
    pub d: u32,
    pub n: u32,
    pub alpha: Complex64,
    /// `points[r]` continues the root of unity `e^{2πi r/N}`.
    pub points: Vec<Complex64>,
    /// `(f^n)'` at each point.
    pub multipliers: Vec<Complex64>,
    /// Largest `|f^n(z) - z|`.
    pub residual: f64,
}

impl PeriodicOrbitSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn modulus_for(d: u32, n: u32) -> Result<u64> {
    let n_abs = (d as f64).powi(n as i32);
    if n_abs > 1e15 {
        return Err(Error::Budget(format!("|q^{n} - 1| is too large")));
    }
    let q = -(d as i128);
    Ok((q.pow(n) - 1).unsigned_abs() as u64)
}

/// Cycles of `r ↦ r·q mod N`, each listed from its smallest element.
fn index_cycles(d: u32, n: u32) -> Result<(u64, Vec<Vec<u64>>)> {
    let big_n = modulus_for(d, n)?;
    let qm = ((-(d as i128)).rem_euclid(big_n as i128)) as u128;
    let mut seen = vec![false; big_n as usize];
    let mut cycles = Vec::new();
    for r in 0..big_n {
        if seen[r as usize] {
            continue;
        }
        let mut cyc = vec![r];
        seen[r as usize] = true;
        let mut s = ((r as u128 * qm) % big_n as u128) as u64;
        while s != r {
            seen[s as usize] = true;
            cyc.push(s);
            s = ((s as u128 * qm) % big_n as u128) as u64;
        }
        cycles.push(cyc);
    }
    Ok((big_n, cycles))
}

fn iterate(f: &RescaledMap, z: Complex64, n: u32) -> Complex64 {
    (0..n).fold(z, |w, _| f.eval_unchecked(w))
}

/// Follow one cycle from `α = 0` to `target`.
fn continue_cycle(
    d: u32,
    target: Complex64,
    steps: usize,
    big_n: u64,
    cycle: &[u64],
    cfg: &PeriodicConfig,
) -> Result<Vec<Complex64>> {
    let p = cycle.len();
    let mut z: Vec<Complex64> =
        cycle.iter().map(|&r| Complex64::from_polar(1.0, TAU * r as f64 / big_n as f64)).collect();
    for step in 1..=steps {
        let f = RescaledMap { d, alpha: target * (step as f64 / steps as f64) };
        let mut converged = false;
        for _ in 0..cfg.max_sweeps {
            let mut change = 0.0f64;
            for m in (0..p).rev() {
                let w = f.preimage_near(z[(m + 1) % p], z[m]);
                change = change.max((w - z[m]).norm());
                z[m] = w;
            }
            if change <= 16.0 * f64::EPSILON {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Continuation { index: cycle[0], step });
        }
    }
    Ok(z)
}

/// All points of period dividing `n` for `f_α`, with their multipliers.
pub fn periodic_points(f: &RescaledMap, n: u32, cfg: &PeriodicConfig) -> Result<PeriodicOrbitSet> {
    let d = f.d;
    if n == 0 || n > cfg.n_max(d) {
        return Err(Error::InvalidParameter(format!("period {n} outside 1..={} for d = {d}", cfg.n_max(d))));
    }
    if f.alpha.norm() > cfg.alpha_ceiling {
        return Err(Error::InvalidParameter(format!(
            "|alpha| = {} is above the continuation ceiling {}",
            f.alpha.norm(),
            cfg.alpha_ceiling
        )));
    }
    let (big_n, cycles) = index_cycles(d, n)?;
    if big_n > cfg.max_points {
        return Err(Error::Budget(format!("{big_n} periodic points requested")));
    }
    let steps = ((f.alpha.norm() / cfg.alpha_step).ceil() as usize).max(1);
    let solved: Vec<(Vec<Complex64>, Complex64)> = cycles
        .par_iter()
        .map(|cyc| {
            let mut z = continue_cycle(d, f.alpha, steps, big_n, cyc, cfg)?;
            let mult: Complex64 = (0..n as usize).map(|m| f.derivative_unchecked(z[m % cyc.len()])).product();
            // One guarded Newton step on f^n(z) - z.
            for w in z.iter_mut() {
                let res = iterate(f, *w, n) - *w;
                let delta = res / (mult - 1.0);
                if delta.norm() > 1e-8 {
                    return Err(Error::Continuation { index: cyc[0], step: steps });
                }
                let polished = *w - delta;
                if (iterate(f, polished, n) - polished).norm() < res.norm() {
                    *w = polished;
                }
            }
            Ok((z, mult))
        })
        .collect::<Result<_>>()?;

    let mut points = vec![Complex64::new(0.0, 0.0); big_n as usize];
    let mut multipliers = points.clone();
    for (cyc, (z, mult)) in cycles.iter().zip(&solved) {
        for (&r, w) in cyc.iter().zip(z) {
            points[r as usize] = *w;
            multipliers[r as usize] = *mult;
        }
    }
    check_collisions(&points)?;
    let residual = points.par_iter().map(|&z| (iterate(f, z, n) - z).norm()).reduce(|| 0.0, f64::max);
    if residual >= cfg.residual_tol {
        return Err(Error::Residual { residual });
    }
    Ok(PeriodicOrbitSet { d, n, alpha: f.alpha, points, multipliers, residual })
}

/// As [`periodic_points`], after checking that `p` is in the quasicircle
/// regime.
pub fn periodic_points_for(
    p: &FamilyParams,
    n: u32,
    cfg: &PeriodicConfig,
    basin: &BasinTestConfig,
) -> Result<PeriodicOrbitSet> {
    if !is_quasicircle(p, basin) {
        return Err(Error::InvalidParameter(format!("lambda = {} is not in the quasicircle regime", p.lambda())));
    }
    periodic_points(&p.rescaled(), n, cfg)
}

fn check_collisions(points: &[Complex64]) -> Result<()> {
    if points.len() < 2 {
        return Ok(());
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].arg().total_cmp(&points[b].arg()));
    for k in 0..order.len() {
        let (a, b) = (order[k], order[(k + 1) % order.len()]);
        if (points[a] - points[b]).norm() < 1e-8 {
            return Err(Error::Collision { a: a as u64, b: b as u64 });
        }
    }
    Ok(())
}

fn log_moduli(orbits: &PeriodicOrbitSet) -> Vec<f64> {
    orbits.multipliers.par_iter().map(|m| m.norm().ln()).collect()
}

fn pressure_from_logs(logs: &[f64], dim: f64) -> f64 {
    let terms: Vec<f64> = logs.par_iter().map(|l| (-dim * l).exp()).collect();
    pairwise(&terms)
}

/// `A_n(D) = Σ |(f^n)'(z)|^{-D}` over the period-`n` points.
pub fn pressure_sum(orbits: &PeriodicOrbitSet, dim: f64) -> f64 {
    pressure_from_logs(&log_moduli(orbits), dim)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub dimension: f64,
    pub n: u32,
    /// `|A_n(D) - 1|` at the returned `D`.
    pub residual: f64,
    pub brackets: Vec<(f64, f64)>,
}

fn bisect_unit_level(mut g: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> Result<(f64, Vec<(f64, f64)>)> {
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo > 1.0 && ghi < 1.0) {
        return Err(Error::Bracket { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut brackets = vec![(lo, hi)];
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        brackets.push((lo, hi));
    }
    Ok((0.5 * (lo + hi), brackets))
}

/// Root of `A_n(D) = 1` by bisection on `[0.5, 2]`.
pub fn bowen_dimension(orbits: &PeriodicOrbitSet) -> Result<DimensionEstimate> {
    let logs = log_moduli(orbits);
    let (dimension, brackets) = bisect_unit_level(|s| pressure_from_logs(&logs, s), 0.5, 2.0)?;
    let residual = (pressure_from_logs(&logs, dimension) - 1.0).abs();
    Ok(DimensionEstimate { dimension, n: orbits.n, residual, brackets })
}

/// `1 + |λ|^{-2/(d+1)} / (4 log d)`.
pub fn asymptotic_dimension(p: &FamilyParams) -> f64 {
    asymptotic_dimension_alpha(p.d(), p.alpha())
}

/// `1 + |α|² / (4 log d)`, the same formula in the rescaled parameter.
pub fn asymptotic_dimension_alpha(d: u32, alpha: Complex64) -> f64 {
    1.0 + alpha.norm_sqr() / (4.0 * (d as f64).ln())
}

/// `log|q^n - 1| / (n log d)`, the exact value at `α = 0`.
pub fn unperturbed_dimension(d: u32, n: u32) -> f64 {
    let q = -(d as f64);
    (q.powi(n as i32) - 1.0).abs().ln() / (n as f64 * (d as f64).ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleDeviation {
    pub deviation: f64,
    pub n: u32,
    pub samples: u64,
}

/// `max ||z| - 1|` over the periodic points of the smallest period giving at
/// least `n_samples` points.
pub fn julia_circle_deviation(f: &RescaledMap, n_samples: u64, cfg: &PeriodicConfig) -> Result<CircleDeviation> {
    let mut n = 1;
    while modulus_for(f.d, n)? < n_samples {
        n += 1;
    }
    let orbits = periodic_points(f, n, cfg)?;
    Ok(CircleDeviation { deviation: circle_deviation_of(&orbits), n, samples: orbits.len() as u64 })
}

fn circle_deviation_of(orbits: &PeriodicOrbitSet) -> f64 {
    orbits.points.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IfsBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Similarity-dimension sandwich from the arcs between cyclically adjacent
/// periodic points: each arc's ratio is bounded by the reciprocal of the
/// larger and of the smaller endpoint multiplier.
pub fn ifs_bounds(orbits: &PeriodicOrbitSet) -> Result<IfsBounds> {
    let m: Vec<f64> = orbits.multipliers.iter().map(|m| m.norm()).collect();
    let len = m.len();
    let mut small = Vec::with_capacity(len);
    let mut large = Vec::with_capacity(len);
    for i in 0..len {
        let (a, b) = (m[i], m[(i + 1) % len]);
        small.push(-(a.max(b)).ln());
        large.push(-(a.min(b)).ln());
    }
    let level = |logs: &[f64], s: f64| {
        let terms: Vec<f64> = logs.iter().map(|l| (s * l).exp()).collect();
        pairwise(&terms)
    };
    let (lower, _) = bisect_unit_level(|s| level(&small, s), 0.25, 4.0)?;
    let (upper, _) = bisect_unit_level(|s| level(&large, s), 0.25, 4.0)?;
    Ok(IfsBounds { lower, upper })
}

/// One row of a dimension table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionRecord {
    pub d: u32,
    pub lambda: Complex64,
    pub alpha_modulus: f64,
    pub n: u32,
    pub dimension: f64,
    pub formula: f64,
    /// `max ||z| - 1|` over the period-`n` points.
    pub deviation: f64,
    pub residual: f64,
}

impl DimensionRecord {
    pub const HEADER: &'static str = "d\tlambda_re\tlambda_im\talpha_abs\tn\tdimension\tformula\tdifference\tdeviation\tresidual";

    pub fn new(p: &FamilyParams, orbits: &PeriodicOrbitSet, est: &DimensionEstimate) -> Self {
        DimensionRecord {
            d: p.d(),
            lambda: p.lambda(),
            alpha_modulus: p.alpha().norm(),
            n: est.n,
            dimension: est.dimension,
            formula: asymptotic_dimension(p),
            deviation: circle_deviation_of(orbits),
            residual: est.residual,
        }
    }

    pub fn to_line(&self) -> String {
        format!(
            "{}\t{:e}\t{:e}\t{:.12e}\t{}\t{:.12}\t{:.6}\t{:.6e}\t{:.6e}\t{:.3e}",
            self.d,
            self.lambda.re,
            self.lambda.im,
            self.alpha_modulus,
            self.n,
            self.dimension,
            self.formula,
            self.dimension - self.formula,
            self.deviation,
            self.residual
        )
    }
}
