//! Growth models for the quasilinear diffusion term.
//!
//! A model packages φ(t), its primitive Φ(t) = ∫₀^t sφ(s)ds, the flux
//! gauge Ψ(t) = tφ(t) = Φ'(t) with its numeric inverse, sampled growth
//! constants (l, m) bounding tΦ'/Φ and (a0, a1) bounding tΦ''/Φ', and the
//! power-type comparison envelopes θ̲/θ̄ built from those constants.
//!
//! The built-in families come from the standard quasilinear-physics
//! catalogue (nonlinear elasticity, plasticity, generalized Newtonian
//! fluids, plasma physics, power-law fluids); a custom family accepts a
//! φ expression over `t`.

use crate::expr::{EvalError, Expr};
use crate::quadrature::adaptive_simpson;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameter out of range for {family}: {detail}")]
    ParameterRange { family: &'static str, detail: String },
    #[error("phi must be evaluated at t > 0, got {0}")]
    NonPositiveArgument(f64),
    #[error("argument must be nonnegative, got {0}")]
    NegativeArgument(f64),
    #[error("custom phi evaluation failed at t={t}: {source}")]
    CustomEval { t: f64, source: EvalError },
    #[error("flux gauge inversion did not converge for s={0} (monotonicity assumption violated or value out of range)")]
    InversionFailed(f64),
    #[error("t·phi(t) is not strictly increasing near t={0}")]
    NotMonotone(f64),
    #[error("growth-constant estimation failed: {0}")]
    GrowthEstimation(String),
    #[error("sampled growth constants violate the required ranges: {0}")]
    GrowthRange(String),
    #[error("growth sampling needs 0 < t_lo < t_hi and at least 64 samples")]
    BadGrowthWindow,
}

/// Built-in growth families plus a custom φ expression over `t`.
#[derive(Debug, Clone)]
pub enum PhiFamily {
    /// Φ(t) = (1+t²)^p − 1, φ(t) = 2p(1+t²)^{p-1}, p > 1/2.
    Elasticity { p: f64 },
    /// Φ(t) = t^p·ln^q(1+t), p > 1, q > 0.
    Plasticity { p: f64, q: f64 },
    /// φ(t) = t^{-p}·asinh^q(t), 0 ≤ p ≤ 1, q > 0; Φ has no closed form.
    GeneralizedNewtonian { p: f64, q: f64 },
    /// Φ(t) = t^p/p + t^q/q, φ(t) = t^{p-2} + t^{q-2}, 1 < p < q.
    PlasmaPhysics { p: f64, q: f64 },
    /// Φ(t) = t^p/p, φ(t) = t^{p-2}, p > 1. φ ≡ 1 at p = 2.
    PowerLaw { p: f64 },
    Custom { phi: Expr },
}

impl PhiFamily {
    pub fn name(&self) -> &'static str {
        match self {
            PhiFamily::Elasticity { .. } => "elasticity",
            PhiFamily::Plasticity { .. } => "plasticity",
            PhiFamily::GeneralizedNewtonian { .. } => "generalized-newtonian",
            PhiFamily::PlasmaPhysics { .. } => "plasma-physics",
            PhiFamily::PowerLaw { .. } => "power-law",
            PhiFamily::Custom { .. } => "custom",
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        let fail = |detail: String| ModelError::ParameterRange {
            family: self.name(),
            detail,
        };
        match *self {
            PhiFamily::Elasticity { p } => {
                if !(p > 0.5) {
                    return Err(fail(format!("need p > 1/2, got p={p}")));
                }
            }
            PhiFamily::Plasticity { p, q } => {
                if !(p > 1.0 && q > 0.0) {
                    return Err(fail(format!("need p > 1 and q > 0, got p={p}, q={q}")));
                }
            }
            PhiFamily::GeneralizedNewtonian { p, q } => {
                if !((0.0..=1.0).contains(&p) && q > 0.0) {
                    return Err(fail(format!("need 0 <= p <= 1 and q > 0, got p={p}, q={q}")));
                }
            }
            PhiFamily::PlasmaPhysics { p, q } => {
                if !(1.0 < p && p < q) {
                    return Err(fail(format!("need 1 < p < q, got p={p}, q={q}")));
                }
            }
            PhiFamily::PowerLaw { p } => {
                if !(p > 1.0) {
                    return Err(fail(format!("need p > 1, got p={p}")));
                }
            }
            PhiFamily::Custom { .. } => {}
        }
        Ok(())
    }

    fn phi(&self, t: f64) -> Result<f64, ModelError> {
        if !(t > 0.0) {
            return Err(ModelError::NonPositiveArgument(t));
        }
        match self {
            PhiFamily::Elasticity { p } => Ok(2.0 * p * ((p - 1.0) * (t * t).ln_1p()).exp()),
            PhiFamily::Plasticity { p, q } => {
                let lg = t.ln_1p();
                Ok(lg.powf(q - 1.0) / (t + 1.0)
                    * ((p * t.powf(p - 1.0) + p * t.powf(p - 2.0)) * lg + q * t.powf(p - 1.0)))
            }
            PhiFamily::GeneralizedNewtonian { p, q } => Ok(t.powf(-p) * t.asinh().powf(*q)),
            PhiFamily::PlasmaPhysics { p, q } => Ok(t.powf(p - 2.0) + t.powf(q - 2.0)),
            PhiFamily::PowerLaw { p } => Ok(t.powf(p - 2.0)),
            PhiFamily::Custom { phi } => phi
                .eval(&[t])
                .map_err(|source| ModelError::CustomEval { t, source }),
        }
    }

    /// Ψ(t) = tφ(t), extended by continuity with Ψ(0) = 0.
    fn psi(&self, t: f64) -> Result<f64, ModelError> {
        if t < 0.0 {
            return Err(ModelError::NegativeArgument(t));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        match self {
            PhiFamily::Elasticity { p } => {
                Ok(2.0 * p * t * ((p - 1.0) * (t * t).ln_1p()).exp())
            }
            PhiFamily::Plasticity { p, q } => {
                let lg = t.ln_1p();
                Ok(lg.powf(q - 1.0) / (t + 1.0)
                    * ((p * t.powf(*p) + p * t.powf(p - 1.0)) * lg + q * t.powf(*p)))
            }
            PhiFamily::GeneralizedNewtonian { p, q } => {
                Ok(t.powf(1.0 - p) * t.asinh().powf(*q))
            }
            PhiFamily::PlasmaPhysics { p, q } => Ok(t.powf(p - 1.0) + t.powf(q - 1.0)),
            PhiFamily::PowerLaw { p } => Ok(t.powf(p - 1.0)),
            PhiFamily::Custom { .. } => Ok(t * self.phi(t)?),
        }
    }

    /// Φ(t) = ∫₀^t sφ(s)ds; closed form where available, quadrature otherwise.
    fn big_phi(&self, t: f64) -> Result<f64, ModelError> {
        if t < 0.0 {
            return Err(ModelError::NegativeArgument(t));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        match self {
            PhiFamily::Elasticity { p } => Ok((p * (t * t).ln_1p()).exp_m1()),
            PhiFamily::Plasticity { p, q } => Ok(t.powf(*p) * t.ln_1p().powf(*q)),
            PhiFamily::PlasmaPhysics { p, q } => Ok(t.powf(*p) / p + t.powf(*q) / q),
            PhiFamily::PowerLaw { p } => Ok(t.powf(*p) / p),
            PhiFamily::GeneralizedNewtonian { .. } | PhiFamily::Custom { .. } => {
                // integrate Ψ(s) = sφ(s); errors inside the integrand surface as NaN
                let val = adaptive_simpson(
                    &|s: f64| self.psi(s).unwrap_or(f64::NAN),
                    0.0,
                    t,
                    1e-12,
                );
                if val.is_finite() {
                    Ok(val)
                } else {
                    Err(ModelError::GrowthEstimation(format!(
                        "quadrature of s*phi(s) failed on [0, {t}]"
                    )))
                }
            }
        }
    }
}

/// Sampled bounds l ≤ tΦ'/Φ ≤ m and a0 ≤ tΦ''/Φ' ≤ a1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthConstants {
    pub l: f64,
    pub m: f64,
    pub a0: f64,
    pub a1: f64,
}

/// Raw extrema over the sampling window plus the 1%-widened constants
/// actually cached for the θ envelopes.
#[derive(Debug, Clone, Copy)]
pub struct GrowthEstimate {
    pub raw: GrowthConstants,
    pub widened: GrowthConstants,
}

/// Which ratio bounds feed the θ-envelope exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaMode {
    /// Exponents (a0, a1) from the tΦ''/Φ' bounds. Valid for Ψ^{-1}.
    #[default]
    O4,
    /// Exponents (l, m) from the tΦ'/Φ bounds; kept for comparison runs.
    O3,
}

impl std::str::FromStr for ThetaMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "o4" => Ok(ThetaMode::O4),
            "o3" => Ok(ThetaMode::O3),
            other => Err(format!("unknown theta mode `{other}` (expected `o4` or `o3`)")),
        }
    }
}

/// An immutable growth model with eagerly computed growth constants.
#[derive(Debug, Clone)]
pub struct PhiModel {
    family: PhiFamily,
    growth: GrowthEstimate,
    theta_mode: ThetaMode,
}

const O2_SAMPLES: usize = 160;
const GROWTH_SAMPLES: usize = 256;
const INVERSION_RTOL: f64 = 1e-13;

impl PhiModel {
    pub fn new(family: PhiFamily) -> Result<Self, ModelError> {
        Self::with_theta_mode(family, ThetaMode::default())
    }

    pub fn with_theta_mode(family: PhiFamily, theta_mode: ThetaMode) -> Result<Self, ModelError> {
        family.validate()?;
        check_monotone(&family)?;
        let (t_lo, t_hi) = default_growth_window(&family);
        let growth = estimate_growth_for(&family, t_lo, t_hi, GROWTH_SAMPLES)?;
        Ok(PhiModel {
            family,
            growth,
            theta_mode,
        })
    }

    pub fn family(&self) -> &PhiFamily {
        &self.family
    }

    pub fn theta_mode(&self) -> ThetaMode {
        self.theta_mode
    }

    /// Widened growth constants used by the θ envelopes.
    pub fn growth(&self) -> GrowthConstants {
        self.growth.widened
    }

    /// Raw window extrema of the two growth ratios, before widening.
    pub fn growth_raw(&self) -> GrowthConstants {
        self.growth.raw
    }

    pub fn phi(&self, t: f64) -> Result<f64, ModelError> {
        self.family.phi(t)
    }

    pub fn big_phi(&self, t: f64) -> Result<f64, ModelError> {
        self.family.big_phi(t)
    }

    pub fn psi(&self, t: f64) -> Result<f64, ModelError> {
        self.family.psi(t)
    }

    /// Solve Ψ(t) = s for t ≥ 0.
    ///
    /// Uses the closed form t = s^{1/(p-1)} for the power-law family and
    /// geometric bracketing plus bisection to ~1e-13 relative otherwise.
    pub fn psi_inverse(&self, s: f64) -> Result<f64, ModelError> {
        if s < 0.0 {
            return Err(ModelError::NegativeArgument(s));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        if let PhiFamily::PowerLaw { p } = self.family {
            return Ok(s.powf(1.0 / (p - 1.0)));
        }
        invert_psi(&self.family, s)
    }

    /// The cached exponent pair (e_lo, e_hi) feeding the θ envelopes under
    /// the active mode.
    pub fn theta_exponents(&self) -> (f64, f64) {
        match self.theta_mode {
            ThetaMode::O4 => (self.growth.widened.a0, self.growth.widened.a1),
            ThetaMode::O3 => (self.growth.widened.l, self.growth.widened.m),
        }
    }

    /// θ̲(t) = min{t^{1/e_hi}, t^{1/e_lo}} for the active exponent pair.
    pub fn theta_lower(&self, t: f64) -> Result<f64, ModelError> {
        if !(t > 0.0) {
            return Err(ModelError::NonPositiveArgument(t));
        }
        let (lo, hi) = self.theta_exponents();
        Ok(t.powf(1.0 / hi).min(t.powf(1.0 / lo)))
    }

    /// θ̄(t) = max{t^{1/e_hi}, t^{1/e_lo}} for the active exponent pair.
    pub fn theta_upper(&self, t: f64) -> Result<f64, ModelError> {
        if !(t > 0.0) {
            return Err(ModelError::NonPositiveArgument(t));
        }
        let (lo, hi) = self.theta_exponents();
        Ok(t.powf(1.0 / hi).max(t.powf(1.0 / lo)))
    }
}

/// Re-estimate growth constants over an explicit window.
///
/// Samples both ratios on a log-spaced grid, takes extrema, and widens the
/// interval by 1% on each side; Φ'' comes from a central difference of Ψ
/// with step h = t·1e-6.
pub fn estimate_growth(
    model: &PhiModel,
    t_lo: f64,
    t_hi: f64,
    samples: usize,
) -> Result<GrowthEstimate, ModelError> {
    estimate_growth_for(&model.family, t_lo, t_hi, samples)
}

fn estimate_growth_for(
    family: &PhiFamily,
    t_lo: f64,
    t_hi: f64,
    samples: usize,
) -> Result<GrowthEstimate, ModelError> {
    if !(t_lo > 0.0 && t_hi > t_lo) || samples < 64 {
        return Err(ModelError::BadGrowthWindow);
    }
    let ratio = (t_hi / t_lo).ln();
    let mut l = f64::INFINITY;
    let mut m = f64::NEG_INFINITY;
    let mut a0 = f64::INFINITY;
    let mut a1 = f64::NEG_INFINITY;
    for k in 0..samples {
        let t = t_lo * (ratio * k as f64 / (samples - 1) as f64).exp();
        let psi = family.psi(t)?;
        let phi_big = family.big_phi(t)?;
        if !(phi_big > 0.0) || !(psi > 0.0) {
            return Err(ModelError::GrowthEstimation(format!(
                "Phi or Psi vanished at sampled t={t}"
            )));
        }
        let r1 = t * psi / phi_big;
        let h = t * 1e-6;
        let dpsi = (family.psi(t + h)? - family.psi(t - h)?) / (2.0 * h);
        let r2 = t * dpsi / psi;
        if !r1.is_finite() || !r2.is_finite() {
            return Err(ModelError::GrowthEstimation(format!(
                "non-finite growth ratio at t={t}"
            )));
        }
        l = l.min(r1);
        m = m.max(r1);
        a0 = a0.min(r2);
        a1 = a1.max(r2);
    }
    let raw = GrowthConstants { l, m, a0, a1 };
    if !(raw.l > 1.0) {
        return Err(ModelError::GrowthRange(format!(
            "need l > 1, sampled l={l:.6}"
        )));
    }
    if !(raw.l <= raw.m) || !(raw.a0 > 0.0) || !(raw.a0 <= raw.a1) {
        return Err(ModelError::GrowthRange(format!(
            "sampled l={l:.6}, m={m:.6}, a0={a0:.6}, a1={a1:.6}"
        )));
    }
    let widened = GrowthConstants {
        l: raw.l * 0.99,
        m: raw.m * 1.01,
        a0: raw.a0 * 0.99,
        a1: raw.a1 * 1.01,
    };
    Ok(GrowthEstimate { raw, widened })
}

/// The sampling window must cover the range the θ-envelope comparison
/// actually visits, which for slowly growing Ψ sits far beyond Ψ's own
/// argument scale; anchor it on Ψ^{-1}(1e∓6) with two decades of slack.
fn default_growth_window(family: &PhiFamily) -> (f64, f64) {
    let hi = match invert_psi(family, 1e6) {
        Ok(t) => (t * 1e2).clamp(1e6, 1e120),
        Err(_) => 1e6,
    };
    let lo = match invert_psi(family, 1e-6) {
        Ok(t) if t > 0.0 => (t * 1e-2).clamp(1e-120, 1e-6),
        _ => 1e-6,
    };
    (lo, hi)
}

fn check_monotone(family: &PhiFamily) -> Result<(), ModelError> {
    let mut prev_t = 0.0;
    let mut prev = 0.0;
    for k in 0..=O2_SAMPLES {
        let t = 1e-6 * (1e12f64).powf(k as f64 / O2_SAMPLES as f64);
        let v = family.psi(t)?;
        if k > 0 && !(v > prev) {
            return Err(ModelError::NotMonotone(prev_t));
        }
        prev = v;
        prev_t = t;
    }
    Ok(())
}

fn invert_psi(family: &PhiFamily, s: f64) -> Result<f64, ModelError> {
    const MAX_EXPAND: usize = 1100;
    const MAX_BISECT: usize = 250;
    // geometric bracketing from a scale guess
    let mut hi = s.max(1.0);
    let mut steps = 0;
    while family.psi(hi)? < s {
        hi *= 2.0;
        steps += 1;
        if steps > MAX_EXPAND || !hi.is_finite() {
            return Err(ModelError::InversionFailed(s));
        }
    }
    let mut lo = hi / 2.0;
    steps = 0;
    while family.psi(lo)? > s {
        hi = lo;
        lo /= 2.0;
        steps += 1;
        if steps > MAX_EXPAND || lo == 0.0 {
            // root below representable scale: treat the interval as [0, hi]
            lo = 0.0;
            break;
        }
    }
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if family.psi(mid)? < s {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= INVERSION_RTOL * hi {
            break;
        }
    }
    let root = 0.5 * (lo + hi);
    let check = family.psi(root)?;
    if (check - s).abs() <= 1e-9 * s.max(1e-300) || (hi - lo) <= 1e-9 * hi {
        Ok(root)
    } else {
        Err(ModelError::InversionFailed(s))
    }
}
