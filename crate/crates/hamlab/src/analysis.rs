//! Composite equilibrium analysis: one report combining every line of
//! evidence.
//!
//! The individual tools each answer a narrow question — the spectrum of the
//! linearization, whether shrinking perturbations keep escaping, whether a
//! conserved-quantity cascade rules out asymptotic motions, whether a known
//! closed-form orbit really converges to the equilibrium in the far past,
//! whether the separating well is isochronous. [`analyze`] runs all of them
//! and composes a single verdict:
//!
//! 1. an eigenvalue with positive real part → `LINEARLY_UNSTABLE`;
//! 2. a validated closed-form orbit decaying to the equilibrium in the far
//!    past → `UNSTABLE_WITH_ASYMPTOTIC_MOTION` (the escape is witnessed by
//!    the same orbit run forward);
//! 3. escape witnessed at every probed scale *and* a certified cascade →
//!    `WEAKLY_UNSTABLE`: motions leave every neighborhood, yet none can
//!    converge to the equilibrium — instability without asymptotic motions;
//! 4. otherwise → `STABLE_SUGGESTED`, a deliberately modest label: finite
//!    observations cannot prove stability.
//!
//! Every intermediate record is kept in the report so the composition can be
//! audited rather than trusted.

use serde::Serialize;

use crate::error::Result;
use crate::isochrony::{isochrony_report, IsochronyReport, DEFAULT_SPREAD_TOL};
use crate::linalg::{
    classify, eigenstructure, Spectrum, SpectralClassification, DEFAULT_CLUSTER_TOL,
};
use crate::phase::PhaseState;
use crate::probe::{
    asymptotic_residual, certify_no_asymptotic, default_cascade, instability_probe,
    past_decay_check, time_grid, CascadeCertificate, CertificateVerdict, ClosedFormMotion,
    ProbeConfig, ProbeReport, ProbeVerdict, Witness,
};
use crate::systems::{HamiltonianSystem, SystemKind};

/// Residual bound under which a closed-form orbit counts as an exact
/// solution of the equations.
pub const MOTION_RESIDUAL_TOL: f64 = 1e-9;
/// Cap on |t|·‖orbit(t)‖ under which far-past decay counts as verified.
pub const DECAY_PRODUCT_CAP: f64 = 1e3;

/// Tunable knobs of [`analyze`]; the defaults reproduce the reference runs.
#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub probe: ProbeConfig,
    pub certificate_samples: usize,
    pub certificate_tol: f64,
    pub seed: u64,
    /// Eigenvalue clustering and axis tolerance.
    pub spectral_tol: f64,
    /// Amplitude ladder for the isochrony scan of the separating well.
    pub amplitudes: Vec<f64>,
    pub period_step: f64,
    pub spread_tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            probe: ProbeConfig::default(),
            certificate_samples: 200,
            certificate_tol: 1e-8,
            seed: 42,
            spectral_tol: DEFAULT_CLUSTER_TOL,
            amplitudes: vec![0.1, 0.2, 0.3],
            period_step: 1e-3,
            spread_tol: DEFAULT_SPREAD_TOL,
        }
    }
}

/// The taxonomy position of an equilibrium, as far as numerics can place it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CompositeVerdict {
    /// The linearization alone forces instability.
    LinearlyUnstable,
    /// Unstable, and a verified orbit converges to the equilibrium in the
    /// far past.
    UnstableWithAsymptoticMotion,
    /// Unstable at every probed scale, with numerical evidence that no
    /// orbit converges to the equilibrium.
    WeaklyUnstable,
    /// Nothing diagnosed instability; not a proof of stability.
    StableSuggested,
}

/// Validation record for a registered closed-form orbit.
#[derive(Clone, Debug, Serialize)]
pub struct MotionEvidence {
    /// Worst defect of the orbit against the canonical equations.
    pub residual: f64,
    pub residual_tol: f64,
    /// Max |t|·‖orbit(t)‖ over the far-past grid; bounded means decay at
    /// rate 1/|t|.
    pub decay_product: f64,
    pub decay_cap: f64,
    pub grid_from: f64,
    pub grid_to: f64,
    pub grid_points: usize,
    pub validated: bool,
}

/// Everything [`analyze`] learned, plus the composed verdict.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub system: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<String>>,
    pub spectrum: Spectrum,
    pub classification: SpectralClassification,
    pub probe: ProbeReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CascadeCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asymptotic_motion: Option<MotionEvidence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isochrony: Option<IsochronyReport>,
    pub verdict: CompositeVerdict,
}

/// Runs every applicable check on the system's equilibrium at the origin
/// and composes the verdict chain documented at module level.
pub fn analyze(sys: &HamiltonianSystem, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    let origin = PhaseState::zeros(sys.dof());
    let jac = sys.jacobian(&origin.coords);
    let spectrum = eigenstructure(&jac, opts.spectral_tol)?;
    let classification = classify(&spectrum, opts.spectral_tol);

    let witness = Witness::for_system(sys);
    let probe = instability_probe(sys, &witness, &opts.probe)?;

    let certificate = match default_cascade(sys) {
        Some(stages) => Some(certify_no_asymptotic(
            sys,
            &stages,
            opts.certificate_samples,
            opts.certificate_tol,
            opts.seed,
        )?),
        None => None,
    };

    let asymptotic_motion = match sys.kind() {
        SystemKind::Cherry { sigma } if *sigma != 0.0 => {
            let motion = ClosedFormMotion::PastAsymptoticOrbit { sigma: *sigma };
            let (from, to, points) = (-100.0, -1.0, 1000);
            let grid = time_grid(from, to, points);
            let residual = asymptotic_residual(sys, &motion, &grid)?;
            let decay_product = past_decay_check(&motion, &grid)?;
            let validated =
                residual < MOTION_RESIDUAL_TOL && decay_product < DECAY_PRODUCT_CAP;
            Some(MotionEvidence {
                residual,
                residual_tol: MOTION_RESIDUAL_TOL,
                decay_product,
                decay_cap: DECAY_PRODUCT_CAP,
                grid_from: from,
                grid_to: to,
                grid_points: points,
                validated,
            })
        }
        _ => None,
    };

    let isochrony = match sys.kind() {
        SystemKind::VariationLike { g } => Some(isochrony_report(
            g,
            &opts.amplitudes,
            opts.period_step,
            opts.spread_tol,
        )?),
        _ => None,
    };

    let verdict = if classification.has_positive_real_part {
        CompositeVerdict::LinearlyUnstable
    } else if asymptotic_motion.as_ref().is_some_and(|m| m.validated) {
        CompositeVerdict::UnstableWithAsymptoticMotion
    } else if probe.verdict == ProbeVerdict::UnstableWitnessed
        && certificate
            .as_ref()
            .is_some_and(|c| c.verdict == CertificateVerdict::CertifiedNoAsymptoticMotion)
    {
        CompositeVerdict::WeaklyUnstable
    } else {
        CompositeVerdict::StableSuggested
    };

    let (sigma, g) = match sys.kind() {
        SystemKind::Cherry { sigma } => (Some(*sigma), None),
        SystemKind::VariationLike { g } | SystemKind::PlanarWell { g } => {
            (None, Some(g.coeff_strings()))
        }
        _ => (None, None),
    };

    Ok(AnalysisReport {
        system: sys.name().to_string(),
        sigma,
        g,
        spectrum,
        classification,
        probe,
        certificate,
        asymptotic_motion,
        isochrony,
        verdict,
    })
}
