//! Period function of the separating planar well and isochrony tests.
//!
//! The variation-like family contains the planar subsystem q̇ = p, ṗ = −g(q),
//! a particle in the well G(q) = ∫g with a local center at the origin.
//! Stability of the full four-dimensional equilibrium is equivalent to the
//! *isochrony* of that center: if nearby subsystem orbits have different
//! periods, the transverse variables ride the equations of variation and get
//! pumped without bound, while energy conservation in the subsystem keeps the
//! base orbit in a band — the signature of weak instability.
//!
//! Two independent period measurements are implemented:
//!
//! * [`period_return`] integrates the well symplectically and detects the
//!   return event of the momentum sign change at the launch amplitude;
//! * [`period_quadrature`] evaluates the exact energy integral, with the
//!   inverse-square-root turning-point singularities removed analytically by
//!   the substitutions q = qₘ + u² and q = a − u², so the integrand becomes a
//!   smooth function on a closed interval and Gauss–Legendre panels converge
//!   spectrally.
//!
//! Their agreement cross-validates both. The exact obstruction to isochrony
//! at cubic order, g‴(0) − 5g″(0)²/(3g′(0)), is computed in rational
//! arithmetic; a nonzero value decides instability without any integration.
//! Finally, [`transform_check`] verifies the linear symplectic change of
//! variables that rewrites the quadratic-g member of the family as a
//! resonant 1:(−1) oscillator with a cubic coupling, tying this family to
//! the cherry system.

use std::sync::OnceLock;

use num::{BigInt, BigRational, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::midpoint_step;
use crate::probe::sample_in_ball;
use crate::systems::{GFunction, HamiltonianSystem};

/// Nodes per Gauss–Legendre panel.
const GL_NODES: usize = 20;
/// Relative agreement between panel doublings that ends refinement.
const QUAD_REL_TOL: f64 = 1e-13;
/// Panel-count cap for the adaptive quadrature.
const MAX_PANELS: usize = 64;
/// Amplitudes whose energy comes within this relative margin of a barrier
/// level are rejected: on the separatrix the period diverges, and both the
/// quadrature substitution and the return detector lose meaning there.
const SEPARATRIX_MARGIN: f64 = 1e-9;
/// Default spread tolerance below which a measured period table counts as
/// isochronous.
pub const DEFAULT_SPREAD_TOL: f64 = 1e-6;

/// Potential barriers flanking the well: the nearest zeros of g on each side
/// of the origin (within the scanned window [-2, 2]).
#[derive(Clone, Copy, Debug)]
struct Barriers {
    left: Option<f64>,
    right: Option<f64>,
}

/// Scans for sign changes of g and refines each bracket by bisection.
fn find_barriers(g: &GFunction) -> Barriers {
    const SCAN: f64 = 2.0;
    const STEP: f64 = 1e-3;
    let mut left: Option<f64> = None;
    let mut right: Option<f64> = None;
    let n = (2.0 * SCAN / STEP) as usize;
    let mut prev_x = -SCAN;
    let mut prev_g = g.eval(prev_x);
    for k in 1..=n {
        let x = -SCAN + k as f64 * STEP;
        let gx = g.eval(x);
        // skip the structural zero at the origin itself
        let bracket_has_origin = prev_x < 1e-12 && x > -1e-12;
        if !bracket_has_origin && prev_g * gx <= 0.0 && (prev_g != 0.0 || gx != 0.0) {
            let root = bisect(|t| g.eval(t), prev_x, x, 100);
            if root < -1e-9 {
                left = Some(left.map_or(root, |r: f64| r.max(root)));
            } else if root > 1e-9 {
                right = Some(right.map_or(root, |r: f64| r.min(root)));
            }
        }
        prev_x = x;
        prev_g = gx;
    }
    Barriers { left, right }
}

/// Plain bisection for a sign-changing continuous function.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let flo = f(lo);
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (flo < 0.0) == (fm < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Checks that the amplitude launches a genuine periodic well orbit and
/// returns the left turning point qₘ < 0 with G(qₘ) = G(a).
pub fn validate_amplitude(g: &GFunction, a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::AmplitudeOutOfRange {
            amplitude: a,
            reason: "amplitude must be positive and finite".into(),
        });
    }
    // g'(0) > 0 is a construction invariant of GFunction, so the origin is
    // always a genuine well bottom here
    let barriers = find_barriers(g);
    if let Some(rp) = barriers.right {
        if a >= rp * (1.0 - SEPARATRIX_MARGIN) {
            return Err(Error::AmplitudeOutOfRange {
                amplitude: a,
                reason: format!("amplitude reaches the potential barrier at {rp:.6}"),
            });
        }
    }
    let energy = g.eval_potential(a);
    if let Some(rl) = barriers.left {
        let barrier_level = g.eval_potential(rl);
        if barrier_level - energy <= SEPARATRIX_MARGIN * barrier_level.abs().max(1.0) {
            return Err(Error::AmplitudeOutOfRange {
                amplitude: a,
                reason: format!(
                    "energy {energy:.6} reaches the barrier level {barrier_level:.6} at {rl:.6}: \
                     the orbit is on or outside the separatrix"
                ),
            });
        }
    }

    // G decreases strictly to the left of the origin down to the barrier, so
    // the turning point is the unique solution of G(q) = E there
    let mut lo = match barriers.left {
        Some(rl) => rl,
        None => {
            let mut lo = -a;
            let mut grow = 0;
            while g.eval_potential(lo) <= energy {
                lo *= 2.0;
                grow += 1;
                if grow > 60 {
                    return Err(Error::AmplitudeOutOfRange {
                        amplitude: a,
                        reason: "no left turning point: the potential never reaches the \
                                 launch energy on the left"
                            .into(),
                    });
                }
            }
            lo
        }
    };
    let mut hi = 0.0;
    let flo = g.eval_potential(lo) - energy;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let fm = g.eval_potential(mid) - energy;
        if (flo > 0.0) == (fm > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut qm = 0.5 * (lo + hi);
    // Newton polish on G(q) - E with G' = g
    for _ in 0..3 {
        let gq = g.eval(qm);
        if gq.abs() > 1e-300 {
            qm -= (g.eval_potential(qm) - energy) / gq;
        }
    }
    Ok(qm)
}

/// Coefficients (in powers of u²) of W(u) = (E − G(qₘ + u²))/u², the
/// left-branch factorization of the energy gap: W(u) =
/// −Σₖ cₖ/(k+1) Σⱼ C(k+1, j+1) qₘ^(k−j) u^(2j).
fn w_poly_left(g: &GFunction, qm: f64) -> Vec<f64> {
    let c = g.coefficients();
    let deg = c.len();
    let mut w = vec![0.0; deg + 1];
    for (idx, &ck) in c.iter().enumerate() {
        let k = idx + 1;
        let scale = -ck / (k as f64 + 1.0);
        for j in 0..=k {
            w[j] += scale * binomial(k + 1, j + 1) * qm.powi((k - j) as i32);
        }
    }
    w
}

/// Right-branch analogue for q = a − u²: W(u) =
/// Σₖ cₖ/(k+1) Σⱼ C(k+1, j+1) a^(k−j) (−1)ʲ u^(2j).
fn w_poly_right(g: &GFunction, a: f64) -> Vec<f64> {
    let c = g.coefficients();
    let deg = c.len();
    let mut w = vec![0.0; deg + 1];
    for (idx, &ck) in c.iter().enumerate() {
        let k = idx + 1;
        let scale = ck / (k as f64 + 1.0);
        let mut sign = 1.0;
        for j in 0..=k {
            w[j] += sign * scale * binomial(k + 1, j + 1) * a.powi((k - j) as i32);
            sign = -sign;
        }
    }
    w
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut out = 1.0;
    for i in 0..k.min(n - k) {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Evaluates the even polynomial with the given u²-power coefficients.
fn eval_even_poly(w: &[f64], u: f64) -> f64 {
    let s = u * u;
    w.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

/// 20-node Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration
/// on the Legendre recurrence.
fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CACHE.get_or_init(|| {
        let n = GL_NODES;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// ∫₀^upper 2/√W(u) du over `panels` equal Gauss–Legendre panels; None if W
/// fails to stay positive at a node.
fn branch_integral(w: &[f64], upper: f64, panels: usize) -> Option<f64> {
    let (nodes, weights) = gauss_legendre();
    let width = upper / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let left = p as f64 * width;
        for (x, wt) in nodes.iter().zip(weights) {
            let u = left + 0.5 * width * (x + 1.0);
            let val = eval_even_poly(w, u);
            if !(val > 0.0) {
                return None;
            }
            total += 0.5 * width * wt * 2.0 / val.sqrt();
        }
    }
    Some(total)
}

/// Period of the well orbit at amplitude `a` by the exact energy integral
/// T = √2 (∫ left branch + ∫ right branch), each branch desingularized by a
/// turning-point substitution. Doubles panels until successive values agree
/// to a relative 1e-13.
pub fn period_quadrature(g: &GFunction, a: f64) -> Result<f64> {
    let qm = validate_amplitude(g, a)?;
    let wl = w_poly_left(g, qm);
    let wr = w_poly_right(g, a);
    let ul = (-qm).sqrt();
    let ur = a.sqrt();
    let mut prev: Option<f64> = None;
    let mut panels = 1;
    while panels <= MAX_PANELS {
        let (l, r) = match (branch_integral(&wl, ul, panels), branch_integral(&wr, ur, panels)) {
            (Some(l), Some(r)) => (l, r),
            _ => {
                return Err(Error::QuadratureFailure(format!(
                    "energy-gap factorization lost positivity at amplitude {a}"
                )))
            }
        };
        let t = std::f64::consts::SQRT_2 * (l + r);
        if let Some(p) = prev {
            if (t - p).abs() <= QUAD_REL_TOL * t.abs() {
                return Ok(t);
            }
        }
        prev = Some(t);
        panels *= 2;
    }
    Err(Error::QuadratureFailure(format!(
        "period quadrature did not stabilize within {MAX_PANELS} panels at amplitude {a}"
    )))
}

/// Period of the well orbit at amplitude `a` by symplectic integration from
/// (a, 0) and detection of the next armed momentum sign change, refined with
/// a cubic Hermite interpolant (using ṗ = −g(q) at the bracket ends).
pub fn period_return(g: &GFunction, a: f64, step: f64) -> Result<f64> {
    validate_amplitude(g, a)?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter("step must be positive and finite".into()));
    }
    let sys = HamiltonianSystem::planar_well(g.clone());
    let omega = g.eval_deriv(0.0).sqrt();
    let t_cap = 10.0 * std::f64::consts::TAU / omega;
    let max_steps = (t_cap / step).ceil() as usize + 1;

    let mut x = vec![a, 0.0];
    let mut t = 0.0;
    let mut armed = false;
    for _ in 0..max_steps {
        let next = midpoint_step(&sys, &x, step).ok_or_else(|| {
            Error::EarlyTermination(format!("corrector breakdown at t = {t} in the well"))
        })?;
        let (p_prev, p_next) = (x[1], next[1]);
        if armed && p_prev > 0.0 && p_next <= 0.0 {
            let dp_prev = -g.eval(x[0]);
            let dp_next = -g.eval(next[0]);
            let s = hermite_root(p_prev, dp_prev * step, p_next, dp_next * step);
            return Ok(t + s * step);
        }
        if p_next < 0.0 {
            armed = true;
        }
        x = next;
        t += step;
    }
    Err(Error::NoReturn { t_cap })
}

/// Root in (0, 1] of the cubic Hermite interpolant with endpoint values v0,
/// v1 and endpoint slopes d0, d1 (already scaled by the interval length),
/// assuming v0 > 0 >= v1.
fn hermite_root(v0: f64, d0: f64, v1: f64, d1: f64) -> f64 {
    let eval = |s: f64| {
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * v0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * v1
            + (s3 - s2) * d1
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Period measurements over a ladder of amplitudes, by both methods.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodTable {
    pub amplitudes: Vec<f64>,
    /// Return-time measurements (integration).
    pub periods: Vec<f64>,
    /// Quadrature measurements (exact energy integral).
    pub oracle_periods: Vec<f64>,
    /// Max pairwise difference of the return-time periods. The integrator's
    /// period bias is amplitude-independent at leading order, so it cancels
    /// here and the spread isolates genuine anisochrony.
    pub max_spread: f64,
    /// Worst disagreement between the two methods at one amplitude.
    pub max_oracle_gap: f64,
    pub method: String,
}

/// Measures the period at each amplitude by integration and by quadrature.
pub fn period_scan(g: &GFunction, amplitudes: &[f64], step: f64) -> Result<PeriodTable> {
    if amplitudes.is_empty() {
        return Err(Error::InvalidParameter("amplitude ladder must be nonempty".into()));
    }
    for pair in amplitudes.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::InvalidParameter(
                "amplitudes must be strictly increasing".into(),
            ));
        }
    }
    let mut periods = Vec::with_capacity(amplitudes.len());
    let mut oracle = Vec::with_capacity(amplitudes.len());
    for &a in amplitudes {
        periods.push(period_return(g, a, step)?);
        oracle.push(period_quadrature(g, a)?);
    }
    let max_p = periods.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_p = periods.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_gap = periods
        .iter()
        .zip(&oracle)
        .map(|(p, o)| (p - o).abs())
        .fold(0.0, f64::max);
    Ok(PeriodTable {
        amplitudes: amplitudes.to_vec(),
        periods,
        oracle_periods: oracle,
        max_spread: max_p - min_p,
        max_oracle_gap: max_gap,
        method: "implicit_midpoint_return".into(),
    })
}

/// Exact cubic-order obstruction to isochrony of the well:
/// g‴(0) − 5 g″(0)²/(3 g′(0)), in rational arithmetic (the division is safe
/// because g'(0) > 0 is a construction invariant). Zero is necessary for
/// isochrony (hence for stability of the four-dimensional system); nonzero
/// decides instability outright.
pub fn isochrony_condition_residual(g: &GFunction) -> BigRational {
    let d1 = g.deriv1_at_zero();
    let d2 = g.deriv2_at_zero();
    let d3 = g.deriv3_at_zero();
    let five = BigRational::from_integer(BigInt::from(5));
    let three = BigRational::from_integer(BigInt::from(3));
    d3 - five * &d2 * &d2 / (three * d1)
}

/// How the period measurements bear on stability of the four-dimensional
/// equilibrium.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PeriodVerdict {
    /// The exact cubic obstruction is nonzero: anisochronous, unstable.
    UnstableNonzeroResidual,
    /// The obstruction vanishes but the measured periods still spread beyond
    /// tolerance: anisochronous at higher order, unstable.
    UnstableMeasuredAnisochrony,
    /// No anisochrony detected at this resolution; consistent with (but not
    /// proof of) stability.
    IsochronousWithinTolerance,
}

/// Combines the exact obstruction computed from g's coefficients with the
/// measured period spread.
pub fn stability_verdict(g: &GFunction, table: &PeriodTable, spread_tol: f64) -> PeriodVerdict {
    let residual = isochrony_condition_residual(g);
    if !residual.is_zero() {
        PeriodVerdict::UnstableNonzeroResidual
    } else if table.max_spread > spread_tol {
        PeriodVerdict::UnstableMeasuredAnisochrony
    } else {
        PeriodVerdict::IsochronousWithinTolerance
    }
}

/// Outcome of the symplectic-change-of-variables identity check.
#[derive(Clone, Debug, Serialize)]
pub struct TransformCheck {
    pub sigma: f64,
    pub samples: usize,
    pub seed: u64,
    /// Max |H(T(Q,P)) − K(Q,P)| over the sampled unit ball, where K is the
    /// resonant normal form with the cubic coupling.
    pub max_mismatch: f64,
    /// Max |(MᵀJM − J)| entry, computed in exact integer arithmetic times
    /// the exact scale 1/2.
    pub symplectic_defect: f64,
    pub exactly_symplectic: bool,
}

/// Verifies that composing the quadratic-g member of the family with the
/// linear change (q₁,q₂,p₁,p₂) = (Q₁+Q₂, Q₁−Q₂, P₁+P₂, P₁−P₂)/√2 yields
/// ½(Q₁²+P₁²) − ½(Q₂²+P₂²) + σ/(2√2)·(Q₁+Q₂)(Q₁²−Q₂²), and that the change
/// is exactly symplectic.
pub fn transform_check(sigma: f64, samples: usize, seed: u64) -> Result<TransformCheck> {
    if samples < 100 {
        return Err(Error::InvalidParameter(format!(
            "the identity check needs at least 100 samples, got {samples}"
        )));
    }
    let g = GFunction::with_quadratic(sigma)?;
    let sys = HamiltonianSystem::variation_like(g);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let cubic = sigma / (2.0 * std::f64::consts::SQRT_2);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let z = sample_in_ball(&mut rng, 4, 1.0);
        let (big_q1, big_q2, big_p1, big_p2) = (z[0], z[1], z[2], z[3]);
        let x = [
            s * (big_q1 + big_q2),
            s * (big_q1 - big_q2),
            s * (big_p1 + big_p2),
            s * (big_p1 - big_p2),
        ];
        let h = sys.hamiltonian(&x);
        let k = 0.5 * (big_q1 * big_q1 + big_p1 * big_p1)
            - 0.5 * (big_q2 * big_q2 + big_p2 * big_p2)
            + cubic * (big_q1 + big_q2) * (big_q1 * big_q1 - big_q2 * big_q2);
        worst = worst.max((h - k).abs());
    }

    // The change is (1/sqrt 2) N with integer N, so M^T J M = (1/2) N^T J N
    // evaluates exactly in floating point: integer products, then one
    // multiplication by the exact dyadic 1/2.
    let n = [
        [1.0, 1.0, 0.0, 0.0],
        [1.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 1.0],
        [0.0, 0.0, 1.0, -1.0],
    ];
    let mut j = [[0.0_f64; 4]; 4];
    j[0][2] = 1.0;
    j[1][3] = 1.0;
    j[2][0] = -1.0;
    j[3][1] = -1.0;
    let mut defect = 0.0_f64;
    let mut exact = true;
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = 0.0;
            for i in 0..4 {
                for jj in 0..4 {
                    acc += n[i][a] * j[i][jj] * n[jj][b];
                }
            }
            let entry = 0.5 * acc - j[a][b];
            defect = defect.max(entry.abs());
            if entry != 0.0 {
                exact = false;
            }
        }
    }

    Ok(TransformCheck {
        sigma,
        samples,
        seed,
        max_mismatch: worst,
        symplectic_defect: defect,
        exactly_symplectic: exact,
    })
}

/// Serializable view of the exact obstruction plus measured-table context.
#[derive(Clone, Debug, Serialize)]
pub struct IsochronyReport {
    pub g: Vec<String>,
    /// Exact rational obstruction, as a string.
    pub residual: String,
    pub residual_f64: f64,
    pub verdict: PeriodVerdict,
    pub spread_tol: f64,
    pub table: PeriodTable,
}

/// Runs the scan, evaluates the obstruction, and combines both verdicts.
pub fn isochrony_report(
    g: &GFunction,
    amplitudes: &[f64],
    step: f64,
    spread_tol: f64,
) -> Result<IsochronyReport> {
    let table = period_scan(g, amplitudes, step)?;
    let residual = isochrony_condition_residual(g);
    let verdict = stability_verdict(g, &table, spread_tol);
    Ok(IsochronyReport {
        g: g.coeff_strings(),
        residual: residual.to_string(),
        residual_f64: residual.to_f64().unwrap_or(f64::NAN),
        verdict,
        spread_tol,
        table,
    })
}
