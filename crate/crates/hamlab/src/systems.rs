//! The system catalog.
//!
//! Four named autonomous Hamiltonian systems, each with the origin as the
//! equilibrium under study, plus the planar reduced oscillator used by the
//! period-measurement machinery. States are flat `(q, p)` vectors, fields are
//! the canonical `(dH/dp, -dH/dq)`, and every catalog entry carries an
//! analytic Jacobian valid at any state (all fields are polynomial).

use std::fmt;

use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::phase::PhaseState;

const SQRT1_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Restoring function `g` of the variation-like system: a polynomial with
/// `g(0) = 0` and `g'(0) > 0`, held as exact rational coefficients so that
/// derivatives at the origin (and the isochrony obstruction built from them)
/// are computed without rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct GFunction {
    /// Coefficients `c_1, c_2, ...` of `g(x) = c_1 x + c_2 x^2 + ...`.
    coeffs: Vec<BigRational>,
    /// f64 images of `coeffs` for pointwise evaluation.
    fc: Vec<f64>,
    /// f64 coefficients of `g'`: `k * c_k`.
    dfc: Vec<f64>,
    /// f64 coefficients of the potential `G` with `G(x) = x^2 * horner(gc, x)`:
    /// `c_k / (k + 1)`.
    gc: Vec<f64>,
}

impl GFunction {
    /// Builds `g` from exact coefficients `c_1, c_2, ...`; requires `c_1 > 0`.
    pub fn new(coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "g needs at least a linear coefficient".into(),
            ));
        }
        if !coeffs[0].is_positive() {
            return Err(Error::InvalidParameter(format!(
                "g'(0) must be positive, got {}",
                coeffs[0]
            )));
        }
        let fc: Vec<f64> = coeffs.iter().map(|c| c.to_f64().unwrap()).collect();
        let dfc = fc
            .iter()
            .enumerate()
            .map(|(k, c)| (k as f64 + 1.0) * c)
            .collect();
        let gc = fc
            .iter()
            .enumerate()
            .map(|(k, c)| c / (k as f64 + 2.0))
            .collect();
        Ok(Self {
            coeffs,
            fc,
            dfc,
            gc,
        })
    }

    /// Parses a comma-separated coefficient list. Each entry is an integer,
    /// a ratio `p/q`, or a decimal (converted exactly as the dyadic rational
    /// the literal denotes in f64): `"1,1,10/9"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut coeffs = Vec::new();
        for raw in spec.split(',') {
            let tok = raw.trim();
            if tok.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "empty coefficient in `{spec}`"
                )));
            }
            let c = if let Ok(r) = tok.parse::<BigRational>() {
                r
            } else {
                let f: f64 = tok.parse().map_err(|_| {
                    Error::InvalidParameter(format!("cannot parse coefficient `{tok}`"))
                })?;
                BigRational::from_float(f).ok_or_else(|| {
                    Error::InvalidParameter(format!("coefficient `{tok}` is not finite"))
                })?
            };
            coeffs.push(c);
        }
        Self::new(coeffs)
    }

    /// `g(x) = x`.
    pub fn linear() -> Self {
        Self::new(vec![BigRational::from_integer(BigInt::from(1))]).unwrap()
    }

    /// `g(x) = x + sigma x^2` (sigma converted exactly from its f64 value).
    pub fn with_quadratic(sigma: f64) -> Result<Self> {
        let s = BigRational::from_float(sigma)
            .ok_or_else(|| Error::InvalidParameter(format!("sigma = {sigma} is not finite")))?;
        Self::new(vec![BigRational::from_integer(BigInt::from(1)), s])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// `g(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        x * horner(&self.fc, x)
    }

    /// `g'(x)`.
    pub fn eval_deriv(&self, x: f64) -> f64 {
        horner(&self.dfc, x)
    }

    /// Potential `G(x) = integral of g`, `G(0) = 0`.
    pub fn eval_potential(&self, x: f64) -> f64 {
        x * x * horner(&self.gc, x)
    }

    /// Exact `g'(0) = c_1`.
    pub fn deriv1_at_zero(&self) -> BigRational {
        self.coeffs[0].clone()
    }

    /// Exact `g''(0) = 2 c_2`.
    pub fn deriv2_at_zero(&self) -> BigRational {
        self.coeff(1) * BigRational::from_integer(BigInt::from(2))
    }

    /// Exact `g'''(0) = 6 c_3`.
    pub fn deriv3_at_zero(&self) -> BigRational {
        self.coeff(2) * BigRational::from_integer(BigInt::from(6))
    }

    fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    /// f64 views of the coefficients, lowest power (`x^1`) first.
    pub fn coefficients(&self) -> &[f64] {
        &self.fc
    }

    /// Coefficients rendered as exact rational strings, lowest power first.
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl fmt::Display for GFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let power = k + 1;
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let one = BigRational::from_integer(BigInt::from(1));
            if *c == one {
                // coefficient 1 is left implicit
            } else if c.denom() == &BigInt::from(1) {
                write!(f, "{}*", c)?;
            } else {
                write!(f, "({})*", c)?;
            }
            if power == 1 {
                write!(f, "x")?;
            } else {
                write!(f, "x^{power}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Serialize for GFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&c.to_string())?;
        }
        seq.end()
    }
}

/// Catalog parameters: `sigma` feeds the cubic coupling of `cherry` and the
/// default `g(x) = x + sigma x^2` of `variation_like`; an explicit `g`
/// overrides that default.
#[derive(Clone, Debug)]
pub struct SystemParams {
    pub sigma: f64,
    pub g: Option<GFunction>,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            g: None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum SystemKind {
    /// One degree of freedom, `H = p^2 / 2`: every equilibrium is unstable
    /// through uniform drift, yet nothing converges to it in the past.
    FreeParticle,
    /// Two degrees of freedom, `H = (p1 q2 - p2 q1)/sqrt(2) + (q1^2 + q2^2)/2`:
    /// a purely imaginary double spectrum with a nontrivial Jordan block, so
    /// the linear flow grows polynomially.
    L4Linear,
    /// Two degrees of freedom in 1:2 resonance,
    /// `H = (q1^2 + p1^2)/2 - (q2^2 + p2^2) + sigma (q2 (q1^2 - p1^2) - 2 q1 p1 p2)`:
    /// linearly stable, yet for `sigma != 0` it carries a closed-form motion
    /// that blows up in finite time and converges to the origin in the past.
    Cherry { sigma: f64 },
    /// Two degrees of freedom, `H = p1 p2 + g(q1) q2`: the `(q2, p1)` pair
    /// rides the variational equation of the planar `(q1, p2)` oscillator, so
    /// anisochrony of that oscillator pumps the transverse pair.
    VariationLike { g: GFunction },
    /// One degree of freedom, `H = p^2 / 2 + G(q)`: the planar oscillator the
    /// variation-like system is built around, used for period measurement.
    PlanarWell { g: GFunction },
}

/// A catalog system: Hamiltonian, canonical field, analytic Jacobian, and the
/// origin as its equilibrium.
#[derive(Clone, Debug)]
pub struct HamiltonianSystem {
    kind: SystemKind,
}

impl HamiltonianSystem {
    pub const CATALOG: [&'static str; 4] =
        ["free_particle", "l4_linear", "cherry", "variation_like"];

    /// Looks a system up by catalog name.
    pub fn from_catalog(name: &str, params: &SystemParams) -> Result<Self> {
        match name {
            "free_particle" => Ok(Self::free_particle()),
            "l4_linear" => Ok(Self::l4_linear()),
            "cherry" => Self::cherry(params.sigma),
            "variation_like" => {
                let g = match &params.g {
                    Some(g) => g.clone(),
                    None => GFunction::with_quadratic(params.sigma)?,
                };
                Ok(Self::variation_like(g))
            }
            other => Err(Error::UnknownSystem(other.to_string())),
        }
    }

    pub fn free_particle() -> Self {
        Self {
            kind: SystemKind::FreeParticle,
        }
    }

    pub fn l4_linear() -> Self {
        Self {
            kind: SystemKind::L4Linear,
        }
    }

    pub fn cherry(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma = {sigma} is not finite"
            )));
        }
        Ok(Self {
            kind: SystemKind::Cherry { sigma },
        })
    }

    pub fn variation_like(g: GFunction) -> Self {
        Self {
            kind: SystemKind::VariationLike { g },
        }
    }

    pub fn planar_well(g: GFunction) -> Self {
        Self {
            kind: SystemKind::PlanarWell { g },
        }
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SystemKind::FreeParticle => "free_particle",
            SystemKind::L4Linear => "l4_linear",
            SystemKind::Cherry { .. } => "cherry",
            SystemKind::VariationLike { .. } => "variation_like",
            SystemKind::PlanarWell { .. } => "planar_well",
        }
    }

    /// Degrees of freedom.
    pub fn dof(&self) -> usize {
        match self.kind {
            SystemKind::FreeParticle | SystemKind::PlanarWell { .. } => 1,
            _ => 2,
        }
    }

    /// Phase-space dimension `2n`.
    pub fn dim(&self) -> usize {
        2 * self.dof()
    }

    /// The equilibrium under study (the origin for every catalog entry).
    pub fn equilibrium(&self) -> PhaseState {
        PhaseState::zeros(self.dof())
    }

    /// `g` of the variation-like / planar-well kinds, if any.
    pub fn g(&self) -> Option<&GFunction> {
        match &self.kind {
            SystemKind::VariationLike { g } | SystemKind::PlanarWell { g } => Some(g),
            _ => None,
        }
    }

    /// `sigma` of the cherry kind, if any.
    pub fn sigma(&self) -> Option<f64> {
        match self.kind {
            SystemKind::Cherry { sigma } => Some(sigma),
            _ => None,
        }
    }

    /// Hamiltonian at a flat state.
    pub fn hamiltonian(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match &self.kind {
            SystemKind::FreeParticle => 0.5 * x[1] * x[1],
            SystemKind::L4Linear => {
                let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
                SQRT1_2 * (p1 * q2 - p2 * q1) + 0.5 * (q1 * q1 + q2 * q2)
            }
            SystemKind::Cherry { sigma } => {
                let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
                0.5 * (q1 * q1 + p1 * p1) - (q2 * q2 + p2 * p2)
                    + sigma * (q2 * (q1 * q1 - p1 * p1) - 2.0 * q1 * p1 * p2)
            }
            SystemKind::VariationLike { g } => {
                let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
                p1 * p2 + g.eval(q1) * q2
            }
            SystemKind::PlanarWell { g } => 0.5 * x[1] * x[1] + g.eval_potential(x[0]),
        }
    }

    /// Canonical vector field `(dH/dp, -dH/dq)` written into `out`.
    pub fn field_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        match &self.kind {
            SystemKind::FreeParticle => {
                out[0] = x[1];
                out[1] = 0.0;
            }
            SystemKind::L4Linear => {
                let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
                out[0] = q2 * SQRT1_2;
                out[1] = -q1 * SQRT1_2;
                out[2] = -q1 + p2 * SQRT1_2;
                out[3] = -q2 - p1 * SQRT1_2;
            }
            SystemKind::Cherry { sigma } => {
                let s = *sigma;
                let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
                out[0] = p1 - 2.0 * s * q2 * p1 - 2.0 * s * q1 * p2;
                out[1] = -2.0 * p2 - 2.0 * s * q1 * p1;
                out[2] = -q1 - 2.0 * s * q2 * q1 + 2.0 * s * p1 * p2;
                out[3] = 2.0 * q2 + s * p1 * p1 - s * q1 * q1;
            }
            SystemKind::VariationLike { g } => {
                let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
                out[0] = p2;
                out[1] = p1;
                out[2] = -g.eval_deriv(q1) * q2;
                out[3] = -g.eval(q1);
            }
            SystemKind::PlanarWell { g } => {
                out[0] = x[1];
                out[1] = -g.eval(x[0]);
            }
        }
    }

    /// Canonical vector field as a fresh vector.
    pub fn field(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.field_into(x, &mut out);
        out
    }

    /// Analytic Jacobian of the field at an arbitrary state.
    pub fn jacobian(&self, x: &[f64]) -> SquareMatrix {
        debug_assert_eq!(x.len(), self.dim());
        match &self.kind {
            SystemKind::FreeParticle => SquareMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]),
            SystemKind::L4Linear => SquareMatrix::from_rows(&[
                &[0.0, SQRT1_2, 0.0, 0.0],
                &[-SQRT1_2, 0.0, 0.0, 0.0],
                &[-1.0, 0.0, 0.0, SQRT1_2],
                &[0.0, -1.0, -SQRT1_2, 0.0],
            ]),
            SystemKind::Cherry { sigma } => {
                let s = *sigma;
                let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
                SquareMatrix::from_rows(&[
                    &[-2.0 * s * p2, -2.0 * s * p1, 1.0 - 2.0 * s * q2, -2.0 * s * q1],
                    &[-2.0 * s * p1, 0.0, -2.0 * s * q1, -2.0],
                    &[-1.0 - 2.0 * s * q2, -2.0 * s * q1, 2.0 * s * p2, 2.0 * s * p1],
                    &[-2.0 * s * q1, 2.0, 2.0 * s * p1, 0.0],
                ])
            }
            SystemKind::VariationLike { g } => {
                let (q1, q2) = (x[0], x[1]);
                // g''(q1) from the derivative polynomial's own derivative:
                // finite set of coefficients, evaluated directly.
                let d2 = second_deriv(g, q1);
                SquareMatrix::from_rows(&[
                    &[0.0, 0.0, 0.0, 1.0],
                    &[0.0, 0.0, 1.0, 0.0],
                    &[-d2 * q2, -g.eval_deriv(q1), 0.0, 0.0],
                    &[-g.eval_deriv(q1), 0.0, 0.0, 0.0],
                ])
            }
            SystemKind::PlanarWell { g } => {
                SquareMatrix::from_rows(&[&[0.0, 1.0], &[-g.eval_deriv(x[0]), 0.0]])
            }
        }
    }
}

/// `g''(x)` evaluated from the coefficient list:
/// `g = sum c_k x^k  =>  g'' = sum k (k-1) c_k x^{k-2}` for `k >= 2`.
fn second_deriv(g: &GFunction, x: f64) -> f64 {
    let fc = g.coeff_f64();
    let mut val = 0.0;
    for i in (1..fc.len()).rev() {
        let k = (i + 1) as f64;
        val = val * x + k * (k - 1.0) * fc[i];
    }
    val
}

impl GFunction {
    pub(crate) fn coeff_f64(&self) -> &[f64] {
        &self.fc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn catalog_resolves_all_four_names() {
        let params = SystemParams::default();
        for name in HamiltonianSystem::CATALOG {
            let sys = HamiltonianSystem::from_catalog(name, &params).unwrap();
            assert_eq!(sys.name(), name);
        }
        assert!(matches!(
            HamiltonianSystem::from_catalog("pendulum", &params),
            Err(Error::UnknownSystem(_))
        ));
    }

    #[test]
    fn l4_field_at_unit_momentum() {
        let sys = HamiltonianSystem::l4_linear();
        let f = sys.field(&[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(f[0], 0.0);
        assert_eq!(f[1], 0.0);
        assert_eq!(f[2], 0.0);
        assert_relative_eq!(f[3], -SQRT1_2, max_relative = 1e-15);
    }

    #[test]
    fn variation_field_matches_hand_value() {
        let g = GFunction::parse("1,1").unwrap();
        let sys = HamiltonianSystem::variation_like(g);
        let f = sys.field(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(f, vec![0.0, 0.0, 0.0, -2.0]);
    }

    #[test]
    fn fields_are_canonical_gradients() {
        // (dq, dp) = (dH/dp, -dH/dq) checked by central differences of H.
        let g = GFunction::parse("1,1,10/9").unwrap();
        let systems = [
            HamiltonianSystem::free_particle(),
            HamiltonianSystem::l4_linear(),
            HamiltonianSystem::cherry(0.7).unwrap(),
            HamiltonianSystem::variation_like(g.clone()),
            HamiltonianSystem::planar_well(g),
        ];
        for sys in &systems {
            let n = sys.dof();
            let x: Vec<f64> = (0..2 * n).map(|i| 0.1 + 0.07 * i as f64).collect();
            let f = sys.field(&x);
            let h = 1e-6;
            for i in 0..2 * n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let grad = (sys.hamiltonian(&xp) - sys.hamiltonian(&xm)) / (2.0 * h);
                // dH/dq_i ~ -dp_i/dt, dH/dp_i ~ dq_i/dt
                let expected = if i < n { -f[n + i] } else { f[i - n] };
                assert_relative_eq!(grad, expected, epsilon = 1e-8, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn jacobian_matches_field_differences() {
        let g = GFunction::parse("1,1").unwrap();
        let systems = [
            HamiltonianSystem::cherry(1.3).unwrap(),
            HamiltonianSystem::variation_like(g.clone()),
            HamiltonianSystem::planar_well(g),
            HamiltonianSystem::l4_linear(),
        ];
        for sys in &systems {
            let d = sys.dim();
            let x: Vec<f64> = (0..d).map(|i| -0.2 + 0.11 * i as f64).collect();
            let jac = sys.jacobian(&x);
            let h = 1e-6;
            for j in 0..d {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fp = sys.field(&xp);
                let fm = sys.field(&xm);
                for i in 0..d {
                    let fd = (fp[i] - fm[i]) / (2.0 * h);
                    assert_relative_eq!(jac.get(i, j), fd, epsilon = 1e-7, max_relative = 1e-5);
                }
            }
        }
    }

    #[test]
    fn g_rejects_bad_leading_coefficient() {
        assert!(GFunction::parse("").is_err());
        assert!(GFunction::parse("0,1").is_err());
        assert!(GFunction::parse("-1").is_err());
        assert!(GFunction::parse("1,abc").is_err());
    }

    #[test]
    fn g_derivatives_at_zero_are_exact() {
        let g = GFunction::parse("1,1,10/9").unwrap();
        assert_eq!(g.deriv1_at_zero(), BigRational::from_integer(BigInt::from(1)));
        assert_eq!(g.deriv2_at_zero(), BigRational::from_integer(BigInt::from(2)));
        assert_eq!(
            g.deriv3_at_zero(),
            BigRational::new(BigInt::from(20), BigInt::from(3))
        );
    }

    #[test]
    fn g_pointwise_values() {
        let g = GFunction::parse("1,1").unwrap();
        assert_eq!(g.eval(1.0), 2.0);
        assert_eq!(g.eval_deriv(1.0), 3.0);
        assert_relative_eq!(g.eval_potential(0.5), 0.125 + 1.0 / 24.0, epsilon = 1e-16);
        // G(0.5) = G(-1) = 1/6: the homoclinic level of this well.
        assert_relative_eq!(g.eval_potential(-1.0), 1.0 / 6.0, epsilon = 1e-16);
    }

    #[test]
    fn decimal_coefficients_convert_exactly() {
        let g = GFunction::parse("0.5").unwrap();
        assert_eq!(
            g.deriv1_at_zero(),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );
    }

    #[test]
    fn planar_well_energy_is_subsystem_energy() {
        let g = GFunction::parse("1,1").unwrap();
        let sys = HamiltonianSystem::planar_well(g);
        let h = sys.hamiltonian(&[0.5, 0.0]);
        assert_relative_eq!(h, 1.0 / 6.0, epsilon = 1e-15);
    }
}
