//! Eigenstructure of small real matrices and the spectral stability verdict.
//!
//! Everything here is sized for linearisations of the catalog (dimension 2 or
//! 4), where dense textbook algorithms are exact enough and fully
//! deterministic: characteristic polynomial by the Faddeev–LeVerrier
//! recurrence, roots by simultaneous (Durand–Kerner) iteration polished with
//! guarded Newton steps, multiplicities by clustering, and Jordan block sizes
//! from the ranks of powers of `A - lambda I` under complex Gaussian
//! elimination.
//!
//! Double eigenvalues deserve a note: rounding in the polynomial coefficients
//! splits a double root into a pair a distance ~sqrt(machine epsilon) apart,
//! but the pair is symmetric about the true root to first order, so the
//! cluster *mean* reported here is accurate to ~machine epsilon, not to the
//! square root of it.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::systems::HamiltonianSystem;

/// Dense row-major real matrix, dimension 2 or 4 in practice.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "rows of a square matrix must have length {dim}");
            data.extend_from_slice(row);
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute entry.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Determinant by LU with partial pivoting (independent of the
    /// characteristic polynomial, so the two can cross-check each other).
    pub fn determinant(&self) -> f64 {
        let d = self.dim;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..d {
            let mut piv = col;
            for r in col + 1..d {
                if a[r * d + col].abs() > a[piv * d + col].abs() {
                    piv = r;
                }
            }
            if a[piv * d + col] == 0.0 {
                return 0.0;
            }
            if piv != col {
                for j in 0..d {
                    a.swap(col * d + j, piv * d + j);
                }
                det = -det;
            }
            det *= a[col * d + col];
            for r in col + 1..d {
                let f = a[r * d + col] / a[col * d + col];
                if f == 0.0 {
                    continue;
                }
                for j in col..d {
                    a[r * d + j] -= f * a[col * d + j];
                }
            }
        }
        det
    }

    /// Solves `self * x = rhs` by Gaussian elimination with partial pivoting.
    /// Returns `None` for a numerically singular system.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let d = self.dim;
        assert_eq!(rhs.len(), d);
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        for col in 0..d {
            let mut piv = col;
            for r in col + 1..d {
                if a[r * d + col].abs() > a[piv * d + col].abs() {
                    piv = r;
                }
            }
            if a[piv * d + col].abs() < f64::MIN_POSITIVE {
                return None;
            }
            if piv != col {
                for j in 0..d {
                    a.swap(col * d + j, piv * d + j);
                }
                b.swap(col, piv);
            }
            for r in col + 1..d {
                let f = a[r * d + col] / a[col * d + col];
                if f == 0.0 {
                    continue;
                }
                for j in col..d {
                    a[r * d + j] -= f * a[col * d + j];
                }
                b[r] -= f * b[col];
            }
        }
        let mut x = vec![0.0; d];
        for i in (0..d).rev() {
            let mut s = b[i];
            for j in i + 1..d {
                s -= a[i * d + j] * x[j];
            }
            x[i] = s / a[i * d + i];
        }
        Some(x)
    }
}

/// Monic characteristic polynomial of `a`, coefficients lowest power first
/// (`p(x) = c[0] + c[1] x + ... + x^d`), by the Faddeev–LeVerrier recurrence.
pub fn charpoly(a: &SquareMatrix) -> Vec<f64> {
    let d = a.dim();
    let mut coeffs = vec![0.0; d + 1];
    coeffs[d] = 1.0;
    let mut m = a.clone();
    coeffs[d - 1] = -m.trace();
    for k in 2..=d {
        // M <- A (M + c_{d-k+1} I)
        let mut shifted = m.clone();
        for i in 0..d {
            let v = shifted.get(i, i) + coeffs[d - k + 1];
            shifted.set(i, i, v);
        }
        m = a.matmul(&shifted);
        coeffs[d - k] = -m.trace() / k as f64;
    }
    coeffs
}

fn poly_eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

fn poly_eval_with_deriv(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of a monic real polynomial (coefficients lowest power first,
/// leading coefficient 1) by simultaneous iteration, then guarded Newton
/// polish. Deterministic: fixed starting configuration, fixed iteration caps.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    // Cauchy-style inclusion radius for the starting circle.
    let radius = 1.0 + coeffs[..n].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| seed.powu(k as u32) * radius)
        .collect();

    let mut last_update = f64::INFINITY;
    let mut converged = false;
    const MAX_ITERS: usize = 500;
    for _ in 0..MAX_ITERS {
        let mut max_step = 0.0_f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            if den.norm() == 0.0 {
                // coincident approximants: shear them apart and retry
                z[i] += Complex64::new(1e-8 * radius, 1e-8 * radius);
                max_step = f64::INFINITY;
                continue;
            }
            let step = poly_eval(coeffs, z[i]) / den;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        last_update = max_step;
        if max_step <= 1e-14 * radius {
            converged = true;
            break;
        }
    }
    // Near a multiple root the simultaneous iteration plateaus at the noise
    // floor of the polynomial evaluation instead of reaching the step
    // tolerance; that plateau is still far inside the clustering tolerance,
    // so it is accepted here and repaired in the cluster refinement.
    if !converged && last_update > 1e-8 * radius {
        return Err(Error::RootFinderDivergence {
            iters: MAX_ITERS,
            last_update,
        });
    }

    // Newton polish for well-separated roots; a step much larger than the
    // iteration's own scale signals a near-multiple root, where polishing
    // would wander, so it is skipped (the cluster mean handles those).
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = poly_eval_with_deriv(coeffs, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if step.norm() > 1e-6 * radius {
                break;
            }
            *zi -= step;
        }
    }
    Ok(z)
}

/// One eigenvalue with its multiplicities and Jordan block sizes.
#[derive(Clone, Debug, Serialize)]
pub struct EigenvalueInfo {
    pub re: f64,
    pub im: f64,
    #[serde(rename = "alg")]
    pub algebraic: usize,
    #[serde(rename = "geo")]
    pub geometric: usize,
    /// Jordan block sizes for this eigenvalue, largest first; their sum is
    /// the algebraic multiplicity, their count the geometric one.
    pub blocks: Vec<usize>,
}

impl EigenvalueInfo {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Full spectral data of a real matrix.
#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<EigenvalueInfo>,
    /// Max |charpoly(lambda)| over the reported eigenvalues.
    pub residual_bound: f64,
    /// Clustering tolerance the multiplicities were decided at.
    pub cluster_tol: f64,
}

impl Spectrum {
    /// Dimension of the underlying matrix.
    pub fn dim(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.algebraic).sum()
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(f64::NEG_INFINITY, |m, e| m.max(e.re))
    }

    /// True when every Jordan block is trivial.
    pub fn semisimple(&self) -> bool {
        self.eigenvalues
            .iter()
            .all(|e| e.blocks.iter().all(|&b| b == 1))
    }
}

/// Default tolerance for eigenvalue clustering and imaginary-axis tests.
///
/// A double root's location is conditioned like the square root of the
/// coefficient noise, so the attainable accuracy plateaus near
/// sqrt(machine epsilon) with a modest constant on top; 1e-6 (relative to the
/// spectral radius) covers that plateau, while distinct eigenvalues of the
/// catalog are separated by order one, far above it.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

/// Computes eigenvalues, multiplicities, and Jordan block sizes of a real
/// matrix. `tol` controls both root clustering and the pivot threshold of the
/// rank computations; [`DEFAULT_CLUSTER_TOL`] suits the catalog.
pub fn eigenstructure(a: &SquareMatrix, tol: f64) -> Result<Spectrum> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cluster tolerance must be positive, got {tol}"
        )));
    }
    let d = a.dim();
    let coeffs = charpoly(a);
    let mut roots = polynomial_roots(&coeffs)?;
    let scale = roots
        .iter()
        .fold(1.0_f64, |m, z| m.max(z.norm()));

    // The root iteration has no regard for conjugate symmetry, so a root and
    // its mirror can carry different noise and later cluster differently.
    // Symmetrise the multiset first: every root above the axis is averaged
    // with the reflection of its nearest partner below, making the geometry
    // seen by the clustering exactly mirror-symmetric.
    let n_roots = roots.len();
    let mut used = vec![false; n_roots];
    for i in 0..n_roots {
        if used[i] || roots[i].im <= 0.0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n_roots {
            if used[j] || roots[j].im >= 0.0 {
                continue;
            }
            let gap = (roots[i] - roots[j].conj()).norm();
            if best.map_or(true, |(_, g)| gap < g) {
                best = Some((j, gap));
            }
        }
        if let Some((j, _)) = best {
            let avg = (roots[i] + roots[j].conj()) * 0.5;
            roots[i] = avg;
            roots[j] = avg.conj();
            used[i] = true;
            used[j] = true;
        }
    }

    // Greedy transitive clustering; at most 4 roots, so passes are cheap.
    let mut cluster_of: Vec<usize> = (0..roots.len()).collect();
    loop {
        let mut changed = false;
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                if (roots[i] - roots[j]).norm() <= tol * scale
                    && cluster_of[i] != cluster_of[j]
                {
                    let (a_, b_) = (cluster_of[i].min(cluster_of[j]), cluster_of[i].max(cluster_of[j]));
                    for c in cluster_of.iter_mut() {
                        if *c == b_ {
                            *c = a_;
                        }
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut centers: Vec<(Complex64, usize)> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for label in cluster_of.iter() {
        if seen.contains(label) {
            continue;
        }
        seen.push(*label);
        let members: Vec<Complex64> = roots
            .iter()
            .zip(&cluster_of)
            .filter(|(_, l)| *l == label)
            .map(|(z, _)| *z)
            .collect();
        let mean = members.iter().sum::<Complex64>() / members.len() as f64;
        centers.push((mean, members.len()));
    }

    // A cluster mean of multiplicity m inherits the root finder's noise
    // plateau. A root of multiplicity m of p is a simple root of the
    // (m-1)-th derivative, where Newton converges quadratically, so refining
    // the center there recovers full precision. The refinement is only
    // trusted while it stays inside the cluster's own tolerance ball.
    for (c, mult) in centers.iter_mut() {
        if *mult < 2 {
            continue;
        }
        let mut dcoeffs = coeffs.clone();
        for _ in 0..*mult - 1 {
            dcoeffs = poly_derivative(&dcoeffs);
        }
        let mut z = *c;
        for _ in 0..60 {
            let (p, dp) = poly_eval_with_deriv(&dcoeffs, z);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            z -= step;
            if step.norm() <= 1e-16 * scale {
                break;
            }
        }
        if (z - *c).norm() <= tol * scale {
            *c = z;
        }
    }

    // Canonicalise against the real axis: flush near-real eigenvalues, then
    // enforce exact conjugate pairs (a real matrix guarantees the partner).
    for (c, _) in centers.iter_mut() {
        if c.im.abs() <= tol * scale {
            c.im = 0.0;
        }
    }
    let m = centers.len();
    let mut paired = vec![false; m];
    for i in 0..m {
        if paired[i] || centers[i].0.im <= 0.0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..m {
            if j == i || paired[j] || centers[j].0.im >= 0.0 {
                continue;
            }
            let gap = (centers[i].0 - centers[j].0.conj()).norm();
            if best.map_or(true, |(_, g)| gap < g) {
                best = Some((j, gap));
            }
        }
        if let Some((j, gap)) = best {
            if gap <= 10.0 * tol * scale && centers[i].1 == centers[j].1 {
                let avg = (centers[i].0 + centers[j].0.conj()) * 0.5;
                centers[i].0 = avg;
                centers[j].0 = avg.conj();
                paired[i] = true;
                paired[j] = true;
            }
        }
    }

    centers.sort_by(|(a_, _), (b_, _)| {
        a_.re
            .total_cmp(&b_.re)
            .then(b_.im.total_cmp(&a_.im))
    });

    let mut eigenvalues = Vec::with_capacity(centers.len());
    let mut residual_bound = 0.0_f64;
    for (value, alg) in centers {
        residual_bound = residual_bound.max(poly_eval(&coeffs, value).norm());
        let (geometric, blocks) = if alg == 1 {
            (1, vec![1])
        } else {
            jordan_blocks(a, value, alg, tol)?
        };
        eigenvalues.push(EigenvalueInfo {
            re: value.re,
            im: value.im,
            algebraic: alg,
            geometric,
            blocks,
        });
    }
    let _ = d;
    Ok(Spectrum {
        eigenvalues,
        residual_bound,
        cluster_tol: tol,
    })
}

/// Geometric multiplicity and Jordan block sizes from the rank filtration of
/// powers of `B = A - lambda I`: with `r_k = rank(B^k)`, the number of blocks
/// of size >= k is `r_{k-1} - r_k`.
fn jordan_blocks(
    a: &SquareMatrix,
    lambda: Complex64,
    alg: usize,
    tol: f64,
) -> Result<(usize, Vec<usize>)> {
    let d = a.dim();
    let b = complex_shift(a, lambda);
    let base = cmax_norm(&b);
    let mut ranks = Vec::with_capacity(alg + 1);
    ranks.push(d);
    let mut power = b.clone();
    for k in 1..=alg {
        let threshold = tol * base.max(base.powi(k as i32));
        ranks.push(complex_rank(&power, d, threshold));
        if k < alg {
            power = cmatmul(&power, &b, d);
        }
    }
    let blocks_ge: Vec<usize> = (1..=alg)
        .map(|k| ranks[k - 1].saturating_sub(ranks[k]))
        .collect();
    let geometric = blocks_ge[0];
    let mut blocks = Vec::new();
    for k in 1..=alg {
        let ge_k = blocks_ge[k - 1];
        let ge_k1 = if k < alg { blocks_ge[k] } else { 0 };
        for _ in 0..ge_k.saturating_sub(ge_k1) {
            blocks.push(k);
        }
    }
    blocks.sort_unstable_by(|x, y| y.cmp(x));
    let total: usize = blocks.iter().sum();
    if total != alg || blocks.len() != geometric || geometric == 0 {
        return Err(Error::Numerical(format!(
            "inconsistent Jordan structure at lambda = {lambda}: ranks {ranks:?} for algebraic multiplicity {alg}"
        )));
    }
    Ok((geometric, blocks))
}

fn complex_shift(a: &SquareMatrix, lambda: Complex64) -> Vec<Complex64> {
    let d = a.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            let mut v = Complex64::new(a.get(i, j), 0.0);
            if i == j {
                v -= lambda;
            }
            out[i * d + j] = v;
        }
    }
    out
}

fn cmatmul(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for k in 0..d {
            let v = a[i * d + k];
            if v.norm() == 0.0 {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += v * b[k * d + j];
            }
        }
    }
    out
}

fn cmax_norm(a: &[Complex64]) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Numerical rank by complex Gaussian elimination with partial pivoting;
/// pivots at or below `threshold` in modulus do not count.
fn complex_rank(a: &[Complex64], d: usize, threshold: f64) -> usize {
    let mut m = a.to_vec();
    let mut rank = 0;
    for col in 0..d {
        let mut piv = rank;
        let mut piv_norm = 0.0;
        for r in rank..d {
            let nrm = m[r * d + col].norm();
            if nrm > piv_norm {
                piv_norm = nrm;
                piv = r;
            }
        }
        if piv_norm <= threshold {
            continue;
        }
        if piv != rank {
            for j in 0..d {
                m.swap(rank * d + j, piv * d + j);
            }
        }
        for r in rank + 1..d {
            let f = m[r * d + col] / m[rank * d + col];
            if f.norm() == 0.0 {
                continue;
            }
            for j in col..d {
                let sub = f * m[rank * d + j];
                m[r * d + j] -= sub;
            }
        }
        rank += 1;
        if rank == d {
            break;
        }
    }
    rank
}

/// Outcome of the spectral test at an equilibrium.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpectralVerdict {
    /// Some eigenvalue has positive real part: the linearised flow already
    /// carries a motion converging to the equilibrium in the past.
    AsymptoticMotionExists,
    /// All eigenvalues purely imaginary and semisimple.
    LinearlyStable,
    /// All eigenvalues purely imaginary, but some Jordan block is nontrivial:
    /// the linear flow grows polynomially.
    LinearPolynomialGrowth,
    /// No positive real part, yet not purely imaginary either (not reachable
    /// from a Hamiltonian linearisation; reported honestly for general input).
    InconclusiveForNonlinear,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralClassification {
    pub verdict: SpectralVerdict,
    /// Set whenever no eigenvalue has positive real part: in that case the
    /// linearisation alone cannot decide stability of the nonlinear system.
    pub inconclusive_for_nonlinear: bool,
    /// Some eigenvalue has real part above the tolerance.
    pub has_positive_real_part: bool,
    /// Every eigenvalue is on the imaginary axis and every Jordan block is
    /// trivial: the linearisation is stable.
    pub all_imaginary_semisimple: bool,
    /// Every eigenvalue is on the imaginary axis but some Jordan block is
    /// nontrivial: the linearisation grows polynomially.
    pub imaginary_with_nontrivial_jordan: bool,
    pub max_real_part: f64,
}

/// Classifies a spectrum against the imaginary axis at tolerance `tol`
/// (scaled by the spectral radius).
pub fn classify(spectrum: &Spectrum, tol: f64) -> SpectralClassification {
    let scale = spectrum
        .eigenvalues
        .iter()
        .fold(1.0_f64, |m, e| m.max(e.value().norm()));
    let thresh = tol * scale;
    let max_re = spectrum.max_real_part();
    let has_positive = spectrum.eigenvalues.iter().any(|e| e.re > thresh);
    let all_imaginary = spectrum.eigenvalues.iter().all(|e| e.re.abs() <= thresh);
    let semisimple = spectrum.semisimple();
    let verdict = if has_positive {
        SpectralVerdict::AsymptoticMotionExists
    } else if all_imaginary {
        if semisimple {
            SpectralVerdict::LinearlyStable
        } else {
            SpectralVerdict::LinearPolynomialGrowth
        }
    } else {
        SpectralVerdict::InconclusiveForNonlinear
    };
    SpectralClassification {
        verdict,
        inconclusive_for_nonlinear: !has_positive,
        has_positive_real_part: has_positive,
        all_imaginary_semisimple: all_imaginary && semisimple,
        imaginary_with_nontrivial_jordan: all_imaginary && !semisimple,
        max_real_part: max_re,
    }
}

/// How [`jacobian_at`] obtains the matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianMethod {
    /// The system's analytic Jacobian (every catalog entry has one).
    Analytic,
    /// Central differences of the field with one Richardson extrapolation.
    CentralDifference,
}

/// Jacobian of the canonical field at `x`.
pub fn jacobian_at(
    sys: &HamiltonianSystem,
    x: &[f64],
    method: JacobianMethod,
) -> Result<SquareMatrix> {
    if x.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite state".into()));
    }
    match method {
        JacobianMethod::Analytic => Ok(sys.jacobian(x)),
        JacobianMethod::CentralDifference => {
            let coarse = central_difference_jacobian(sys, x, 1.0);
            let fine = central_difference_jacobian(sys, x, 0.5);
            let d = sys.dim();
            let mut out = SquareMatrix::zeros(d);
            for i in 0..d {
                for j in 0..d {
                    // Richardson: error h^2 -> (4 J(h/2) - J(h)) / 3
                    out.set(i, j, (4.0 * fine.get(i, j) - coarse.get(i, j)) / 3.0);
                }
            }
            Ok(out)
        }
    }
}

fn central_difference_jacobian(sys: &HamiltonianSystem, x: &[f64], h_factor: f64) -> SquareMatrix {
    let d = sys.dim();
    let base_h = f64::EPSILON.cbrt();
    let mut out = SquareMatrix::zeros(d);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    let mut fp = vec![0.0; d];
    let mut fm = vec![0.0; d];
    for j in 0..d {
        let h = h_factor * base_h * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        sys.field_into(&xp, &mut fp);
        sys.field_into(&xm, &mut fm);
        for i in 0..d {
            out.set(i, j, (fp[i] - fm[i]) / (2.0 * h));
        }
        xp[j] = x[j];
        xm[j] = x[j];
    }
    out
}
