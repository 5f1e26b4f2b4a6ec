//! Closed-form transport predictions for the cubic Lorentz gas: the
//! free-flight asymptote lim t·F(t), the superdiffusion matrix and its
//! scalar, the mean free time, the per-collision covariance, the
//! small-radius expansion, and the incipient-horizon analysis at r = 1/2.

use crate::error::{Error, Result};
use crate::horizons::{principal_horizons, HorizonRegime, HorizonSet};
use crate::lattice::primitive_vectors_below;
use crate::special::{ball_measure, g_factor, riemann_zeta, sphere_measure};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

/// Largest supported gas dimension (the flow uses fixed-size scratch
/// buffers; simulations in the literature stop around d = 10).
pub const MAX_DIM: usize = 16;

/// One Lorentz gas instance: the cubic lattice Z^d with a single spherical
/// scatterer of radius r centered in each unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasConfig {
    dim: usize,
    radius: f64,
}

impl GasConfig {
    /// 2 <= d <= 16 and 0 < r < 1. Radii at or above 1/2 describe
    /// touching or overlapping scatterers: the simulator supports them,
    /// the horizon formulas do not.
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall { min: 2, got: dim });
        }
        if dim > MAX_DIM {
            return Err(Error::OutOfDomain {
                name: "dim",
                value: dim as f64,
                domain: "2 <= d <= 16",
            });
        }
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::RadiusOutOfRange {
                radius,
                reason: "supported range is 0 < r < 1",
            });
        }
        Ok(GasConfig { dim, radius })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Nominal packing fraction P = V_d r^d of a single non-overlapping
    /// scatterer per unit cell (an upper bound once spheres overlap).
    pub fn packing(&self) -> f64 {
        ball_measure(self.dim) * self.radius.powi(self.dim as i32)
    }

    /// Covolume of the cubic unit cell.
    pub fn covolume(&self) -> f64 {
        1.0
    }

    pub fn horizons(&self) -> Result<HorizonSet> {
        principal_horizons(self.dim, self.radius)
    }
}

/// Symmetric d x d transport matrix with its trace-derived scalar
/// (units: length^2 / (time · ln time) for the superdiffusion matrix).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperdiffusionMatrix {
    pub dim: usize,
    /// Row-major d x d entries.
    pub entries: Vec<f64>,
    /// trace / d.
    pub scalar: f64,
}

impl SuperdiffusionMatrix {
    fn from_entries(dim: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        let trace: f64 = (0..dim).map(|i| entries[i * dim + i]).sum();
        SuperdiffusionMatrix {
            dim,
            entries,
            scalar: trace / dim as f64,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }
}

fn open_horizons(cfg: &GasConfig) -> Result<HorizonSet> {
    let set = cfg.horizons()?;
    if set.regime == HorizonRegime::IncipientOrClosed || set.horizons.is_empty() {
        return Err(Error::IncipientOrClosed { radius: cfg.radius });
    }
    Ok(set)
}

/// lim_{t->inf} t F(t): the coefficient of the 1/t free-flight tail,
///
/// ```text
/// C = G_d / (1 - V_d r^d) · Σ_l L (1/L - 2r)²
/// ```
///
/// summed over all signed primitive dual vectors with positive width (the
/// division by two for inversion symmetry lives inside G_d, so the sum
/// over stored representatives is doubled).
pub fn free_flight_asymptote(cfg: &GasConfig) -> Result<f64> {
    let set = open_horizons(cfg)?;
    let sum: f64 = set.horizons.iter().map(|h| h.norm() * h.width * h.width).sum();
    Ok(g_factor(cfg.dim)? / (1.0 - cfg.packing()) * 2.0 * sum)
}

/// The superdiffusion matrix
///
/// ```text
/// D_ij = V_{d-1} / (S_{d-1} (1 - P)) · Σ_H w_H² (δ_ij - n_i n_j) / V_H^⊥
/// ```
///
/// summed over horizons modulo inversion (the projector is inversion
/// invariant). Satisfies d·scalar = lim t F(t) exactly.
pub fn superdiffusion_matrix(cfg: &GasConfig) -> Result<SuperdiffusionMatrix> {
    let set = open_horizons(cfg)?;
    let d = cfg.dim;
    let factor = ball_measure(d - 1) / (sphere_measure(d - 1) * (1.0 - cfg.packing()));
    Ok(projector_sum(d, &set, factor))
}

/// Per-collision covariance of the limiting normal law,
///
/// ```text
/// Xi^disc_ij = 1 / (r^{d-1} S_{d-1}) · Σ_H w_H² (δ_ij - n_i n_j) / V_H^⊥,
/// ```
///
/// equal to τ · D entrywise.
pub fn discrete_covariance(cfg: &GasConfig) -> Result<SuperdiffusionMatrix> {
    let set = open_horizons(cfg)?;
    let d = cfg.dim;
    let factor = 1.0 / (cfg.radius.powi(d as i32 - 1) * sphere_measure(d - 1));
    Ok(projector_sum(d, &set, factor))
}

fn projector_sum(d: usize, set: &HorizonSet, factor: f64) -> SuperdiffusionMatrix {
    let mut entries = vec![0.0; d * d];
    for h in &set.horizons {
        let weight = factor * h.norm() * h.width * h.width; // w²/V_H^⊥ = L w²
        for i in 0..d {
            for j in 0..d {
                let delta = if i == j { 1.0 } else { 0.0 };
                entries[i * d + j] += weight * (delta - h.normal[i] * h.normal[j]);
            }
        }
    }
    SuperdiffusionMatrix::from_entries(d, entries)
}

/// Mean free time τ = (1 - V_d r^d) / (V_{d-1} r^{d-1}) for the
/// non-overlapping gas (the boundary measure S_{d-1} r^{d-1} is wrong once
/// spheres overlap, so r >= 1/2 is rejected).
pub fn mean_free_time(cfg: &GasConfig) -> Result<f64> {
    if cfg.radius >= 0.5 {
        return Err(Error::RadiusOutOfRange {
            radius: cfg.radius,
            reason: "mean free time formula requires non-overlapping scatterers (r < 1/2)",
        });
    }
    let d = cfg.dim;
    Ok((1.0 - cfg.packing()) / (ball_measure(d - 1) * cfg.radius.powi(d as i32 - 1)))
}

/// Leading small-r term of lim t F(t):
///
/// ```text
/// π^{(d-1)/2} / (2^d d Γ((d+3)/2) ζ(d) r^{d-1})
/// ```
pub fn small_r_leading(dim: usize, radius: f64) -> Result<f64> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: dim });
    }
    if !(radius > 0.0) {
        return Err(Error::RadiusOutOfRange {
            radius,
            reason: "radius must be positive",
        });
    }
    let d = dim as f64;
    Ok(PI.powf((d - 1.0) / 2.0)
        / (2f64.powi(dim as i32)
            * d
            * crate::special::gamma((d + 3.0) / 2.0)
            * riemann_zeta(d)?
            * radius.powi(dim as i32 - 1)))
}

/// Coefficient of the linear-in-r correction to the small-r expansion:
///
/// ```text
/// S_{d-2} V_d / (2^{d-1} (d³ - d) ζ(d)) - 8 G_d
/// ```
pub fn small_r_linear_correction(dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: dim });
    }
    let d = dim as f64;
    Ok(sphere_measure(dim - 2) * ball_measure(dim)
        / (2f64.powi(dim as i32 - 1) * (d * d * d - d) * riemann_zeta(d)?)
        - 8.0 * g_factor(dim)?)
}

// ---------------------------------------------------------------------------
// Incipient horizons (r = 1/2)
// ---------------------------------------------------------------------------

/// Monte Carlo estimate of the visibility integral over the limiting
/// parabola-bounded cross-section of a just-closed horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VisibilityEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Membership in the limiting cross-section {|η| < (|ξ|-1/2)², |ξ| < 1/2}.
pub(crate) fn region_contains(xi: f64, eta: f64) -> bool {
    let s = xi.abs() - 0.5;
    xi.abs() < 0.5 && eta.abs() < s * s
}

/// Exact segment-containment test. On each piece of constant sign(ξ) both
/// boundary margins (|ξ(t)|-1/2)² ∓ η(t) are convex quadratics in t, so
/// positivity at the endpoints plus at the interior vertex decides.
pub(crate) fn segment_visible(p: (f64, f64), q: (f64, f64)) -> bool {
    let (xi0, eta0) = p;
    let (dxi, deta) = (q.0 - xi0, q.1 - eta0);
    // pieces split where xi(t) = 0
    let mut cuts = vec![0.0, 1.0];
    if dxi != 0.0 {
        let t0 = -xi0 / dxi;
        if t0 > 0.0 && t0 < 1.0 {
            cuts.insert(1, t0);
        }
    }
    for w in cuts.windows(2) {
        let (ta, tb) = (w[0], w[1]);
        let mid_xi = xi0 + 0.5 * (ta + tb) * dxi;
        let sigma = if mid_xi >= 0.0 { 1.0 } else { -1.0 };
        // margin(t) = (σ ξ(t) - 1/2)² ∓ η(t) = A t² + B t + C, A >= 0
        let a = dxi * dxi;
        let base = sigma * xi0 - 0.5;
        for sign_eta in [-1.0, 1.0] {
            let b = 2.0 * base * sigma * dxi + sign_eta * deta;
            let c = base * base + sign_eta * eta0;
            let eval = |t: f64| (a * t + b) * t + c;
            if eval(ta) <= 0.0 || eval(tb) <= 0.0 {
                return false;
            }
            if a > 0.0 {
                let tv = -b / (2.0 * a);
                if tv > ta && tv < tb && eval(tv) <= 0.0 {
                    return false;
                }
            }
        }
    }
    true
}

/// The visibility constant: the double integral over pairs of points in
/// the region {|η| < (|ξ|-1/2)², |ξ| < 1/2} of the indicator that the
/// connecting segment stays inside. Stratified Monte Carlo (the first
/// point's ξ is stratified into 16 equal slices of the bounding box);
/// deterministic for a fixed seed.
pub fn incipient_visibility_constant(samples: u64, seed: u64) -> VisibilityEstimate {
    const STRATA: u64 = 16;
    // bounding box [-1/2,1/2] x [-1/4,1/4] has measure 1/2 per point
    const BOX_MEASURE_SQ: f64 = 0.25;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for i in 0..samples {
        let stratum = (i % STRATA) as f64;
        let xi_p = -0.5 + (stratum + rng.random::<f64>()) / STRATA as f64;
        let eta_p = 0.5 * rng.random::<f64>() - 0.25;
        let xi_q = rng.random::<f64>() - 0.5;
        let eta_q = 0.5 * rng.random::<f64>() - 0.25;
        if region_contains(xi_p, eta_p)
            && region_contains(xi_q, eta_q)
            && segment_visible((xi_p, eta_p), (xi_q, eta_q))
        {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    VisibilityEstimate {
        value: BOX_MEASURE_SQ * p,
        // conservative (unstratified) binomial error
        std_error: BOX_MEASURE_SQ * (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    }
}

/// Partial sum of L^{-5} over signed primitive vectors of Z^{d-1} with
/// L < l_max, and whether the full series diverges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncipientTail {
    pub partial_sum: f64,
    /// True for d >= 6: the critical dimension at which the lower-horizon
    /// sum E(5/2; Z^{d-1})/ζ(5) stops converging.
    pub diverges: bool,
}

/// For d <= 5 the full sum converges to E(5/2; Z^{d-1})/ζ(5) (Moebius
/// inversion restores primitivity); for d >= 6 successive partial sums
/// fail the Cauchy criterion.
pub fn incipient_tail_prediction(dim: usize, l_max: f64) -> Result<IncipientTail> {
    if dim < 3 {
        return Err(Error::DimensionTooSmall { min: 3, got: dim });
    }
    let partial_sum = primitive_vectors_below(dim - 1, l_max, false)?
        .iter()
        .map(|v| v.norm.powi(-5))
        .sum();
    Ok(IncipientTail {
        partial_sum,
        diverges: dim >= 6,
    })
}

/// Conjectured decay class of F(t) for the incipient cubic gas (r = 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IncipientExponent {
    /// d < 6: F(t) ≍ t^{-2}.
    InverseSquare,
    /// d = 6: F(t) ≍ t^{-2} ln t.
    InverseSquareLog,
    /// d > 6: F(t) ≍ t^{-α} with unknown α in (1, 2).
    Fractional,
}

impl IncipientExponent {
    /// (lower, upper) bounds on the decay exponent; equal when exact.
    pub fn exponent_bounds(&self) -> (f64, f64) {
        match self {
            IncipientExponent::InverseSquare | IncipientExponent::InverseSquareLog => (2.0, 2.0),
            IncipientExponent::Fractional => (1.0, 2.0),
        }
    }

    pub fn has_log(&self) -> bool {
        matches!(self, IncipientExponent::InverseSquareLog)
    }

    pub fn description(&self) -> &'static str {
        match self {
            IncipientExponent::InverseSquare => "t^-2",
            IncipientExponent::InverseSquareLog => "t^-2 log t",
            IncipientExponent::Fractional => "t^-alpha (1 < alpha < 2)",
        }
    }
}

/// The piecewise classification of Conjecture-level incipient decay:
/// exact 2 below the critical dimension 6, logarithmic correction at 6,
/// fractional unknown exponent above.
pub fn conjectured_incipient_exponent(dim: usize) -> Result<IncipientExponent> {
    if dim < 3 {
        return Err(Error::DimensionTooSmall { min: 3, got: dim });
    }
    Ok(match dim.cmp(&6) {
        std::cmp::Ordering::Less => IncipientExponent::InverseSquare,
        std::cmp::Ordering::Equal => IncipientExponent::InverseSquareLog,
        std::cmp::Ordering::Greater => IncipientExponent::Fractional,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{dirichlet_beta, epstein_zeta};
    use approx::assert_relative_eq;

    #[test]
    fn config_validation_and_packing() {
        assert!(GasConfig::new(1, 0.3).is_err());
        assert!(GasConfig::new(3, 0.0).is_err());
        assert!(GasConfig::new(3, 1.0).is_err());
        let cfg = GasConfig::new(3, 0.4).unwrap();
        assert_relative_eq!(
            cfg.packing(),
            4.0 * PI / 3.0 * 0.4f64.powi(3),
            max_relative = 1e-14
        );
        assert!(cfg.packing() < 1.0);
        assert_eq!(cfg.covolume(), 1.0);
    }

    #[test]
    fn square_gas_asymptote() {
        let cfg = GasConfig::new(2, 0.4).unwrap();
        let c = free_flight_asymptote(&cfg).unwrap();
        // four signed unit vectors: (1/2π) · 4 · 0.04 / (1 - 0.16π)
        let expect = 0.16 / (2.0 * PI * (1.0 - 0.16 * PI));
        assert_relative_eq!(c, expect, max_relative = 1e-14);
        assert!((c - 0.051202).abs() < 1e-6);
    }

    #[test]
    fn cubic_gas_asymptote_single_shell() {
        let cfg = GasConfig::new(3, 0.45).unwrap();
        let c = free_flight_asymptote(&cfg).unwrap();
        let expect = 0.25 * 6.0 * 0.01 / (1.0 - 4.0 * PI / 3.0 * 0.45f64.powi(3));
        assert_relative_eq!(c, expect, max_relative = 1e-14);
    }

    #[test]
    fn superdiffusion_square_gas() {
        let cfg = GasConfig::new(2, 0.4).unwrap();
        let m = superdiffusion_matrix(&cfg).unwrap();
        // (1-2r)²/(1-V r²) · Γ(d/2)/(√π Γ((d-1)/2)) with d = 2
        let expect = 0.04 / ((1.0 - 0.16 * PI) * PI);
        assert_relative_eq!(m.entry(0, 0), expect, max_relative = 1e-13);
        assert_relative_eq!(m.entry(1, 1), expect, max_relative = 1e-13);
        assert!(m.entry(0, 1).abs() < 1e-15);
        assert!((m.scalar - 0.025601).abs() < 1e-6);
    }

    #[test]
    fn closed_form_single_shell_matches_projector_sum() {
        // for 1/(2√2) < r < 1/2 only the d axis horizons survive and
        // D = (1-2r)²/(1-V_d r^d) · Γ(d/2)/(√π Γ((d-1)/2))
        for d in 2..=6 {
            let r = 0.4;
            let cfg = GasConfig::new(d, r).unwrap();
            let m = superdiffusion_matrix(&cfg).unwrap();
            let expect = (1.0 - 2.0 * r) * (1.0 - 2.0 * r) / (1.0 - cfg.packing())
                * crate::special::gamma(d as f64 / 2.0)
                / (PI.sqrt() * crate::special::gamma((d as f64 - 1.0) / 2.0));
            assert_relative_eq!(m.scalar, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn trace_identity_links_matrix_and_asymptote() {
        let cfg = GasConfig::new(3, 0.3).unwrap();
        let c = free_flight_asymptote(&cfg).unwrap();
        let m = superdiffusion_matrix(&cfg).unwrap();
        assert_relative_eq!(3.0 * m.scalar, c, max_relative = 1e-13);
    }

    #[test]
    fn matrix_is_isotropic_and_psd_for_cubic_gas() {
        let cfg = GasConfig::new(3, 0.3).unwrap();
        let m = superdiffusion_matrix(&cfg).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert_relative_eq!(m.entry(i, j), m.scalar, max_relative = 1e-13);
                } else {
                    assert!(m.entry(i, j).abs() < 1e-15 * m.scalar.max(1.0));
                }
            }
        }
        assert!(m.scalar > 0.0);
    }

    #[test]
    fn single_horizon_projector_is_degenerate() {
        // a lone horizon contributes w²L(δ - nn): the projector must
        // annihilate its own normal direction
        let n = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0];
        let d = 3;
        let mut entries = [0.0; 9];
        for i in 0..d {
            for j in 0..d {
                let delta = if i == j { 1.0 } else { 0.0 };
                entries[i * d + j] = delta - n[i] * n[j];
            }
        }
        let along: Vec<f64> = (0..d)
            .map(|i| (0..d).map(|j| entries[i * d + j] * n[j]).sum())
            .collect();
        for x in along {
            assert!(x.abs() < 1e-15);
        }
    }

    #[test]
    fn mean_free_time_values() {
        let cfg = GasConfig::new(3, 0.4).unwrap();
        let tau = mean_free_time(&cfg).unwrap();
        assert_relative_eq!(
            tau,
            (1.0 - 4.0 * PI / 3.0 * 0.064) / (PI * 0.16),
            max_relative = 1e-14
        );
        assert!((tau - 1.45610).abs() < 1e-5);
        let cfg2 = GasConfig::new(2, 0.4).unwrap();
        let tau2 = mean_free_time(&cfg2).unwrap();
        assert_relative_eq!(tau2, (1.0 - 0.16 * PI) / 0.8, max_relative = 1e-14);
        assert!((tau2 - 0.62168).abs() < 1e-5);
        assert!(mean_free_time(&GasConfig::new(2, 0.6).unwrap()).is_err());
    }

    #[test]
    fn discrete_covariance_square_lattice_benchmark() {
        let cfg = GasConfig::new(2, 0.4).unwrap();
        let xi = discrete_covariance(&cfg).unwrap();
        // w²/(2πr) with w = 0.2
        let expect = 0.04 / (2.0 * PI * 0.4);
        assert_relative_eq!(xi.entry(0, 0), expect, max_relative = 1e-14);
        assert!((xi.entry(0, 0) - 0.0159155).abs() < 1e-7);
        assert!(xi.entry(0, 1).abs() < 1e-16);
    }

    #[test]
    fn discrete_covariance_equals_tau_times_matrix() {
        for (d, r) in [(2, 0.4), (3, 0.45), (3, 0.22), (4, 0.3)] {
            let cfg = GasConfig::new(d, r).unwrap();
            let xi = discrete_covariance(&cfg).unwrap();
            let tau = mean_free_time(&cfg).unwrap();
            let m = superdiffusion_matrix(&cfg).unwrap();
            for i in 0..d {
                for j in 0..d {
                    assert_relative_eq!(
                        xi.entry(i, j),
                        tau * m.entry(i, j),
                        max_relative = 1e-12,
                        epsilon = 1e-15
                    );
                }
            }
        }
    }

    #[test]
    fn small_r_leading_values() {
        let lead = small_r_leading(3, 0.01).unwrap();
        let expect = PI / (24.0 * 2.0 * 1.202_056_903_159_594_3 * 1e-4);
        assert_relative_eq!(lead, expect, max_relative = 1e-12);
        assert!((lead - 544.48).abs() < 0.02);
        // value · r^{d-1} independent of r
        for d in 2..=5 {
            let a = small_r_leading(d, 0.01).unwrap() * 0.01f64.powi(d as i32 - 1);
            let b = small_r_leading(d, 0.17).unwrap() * 0.17f64.powi(d as i32 - 1);
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn small_r_linear_coefficients() {
        // d = 2 collapses to 1/π - 8/(2π) = -3/π
        assert_relative_eq!(
            small_r_linear_correction(2).unwrap(),
            -3.0 / PI,
            max_relative = 1e-12
        );
        let d3 = small_r_linear_correction(3).unwrap();
        let expect = (2.0 * PI) * (4.0 * PI / 3.0) / (4.0 * 24.0 * 1.202_056_903_159_594_3) - 2.0;
        assert_relative_eq!(d3, expect, max_relative = 1e-12);
    }

    #[test]
    fn asymptote_continuous_with_curvature_jump_at_threshold() {
        // a new horizon shell opens at r* = 1/(2√2); its width vanishes
        // quadratically, so C(r) stays C¹ there while the second
        // derivative jumps
        let r_star = 0.5 / 2f64.sqrt();
        let c = |r: f64| free_flight_asymptote(&GasConfig::new(2, r).unwrap()).unwrap();
        let eps = 1e-6;
        assert!((c(r_star - eps) - c(r_star + eps)).abs() < 1e-4);
        let eps = 1e-3;
        let curv_below = (c(r_star - 2.0 * eps) - 2.0 * c(r_star - eps) + c(r_star)) / (eps * eps);
        let curv_above = (c(r_star) - 2.0 * c(r_star + eps) + c(r_star + 2.0 * eps)) / (eps * eps);
        assert!(
            (curv_below - curv_above).abs() > 1.0,
            "no curvature jump: {curv_below} vs {curv_above}"
        );
    }

    #[test]
    fn visibility_region_area_matches_closed_form() {
        // quadrature of the region area against ∫ 2(|ξ|-1/2)² dξ = 1/6
        let n = 200_000;
        let mut area = 0.0;
        for i in 0..n {
            let xi = -0.5 + (i as f64 + 0.5) / n as f64;
            let s = xi.abs() - 0.5;
            area += 2.0 * s * s / n as f64;
        }
        assert_relative_eq!(area, 1.0 / 6.0, max_relative = 1e-6);
    }

    #[test]
    fn visibility_segment_test_cases() {
        // the region is non-convex: a bulge point sees the far cusp blocked
        assert!(region_contains(0.0, 0.2));
        assert!(region_contains(0.45, 0.0));
        assert!(!segment_visible((0.0, 0.2), (0.45, 0.0)));
        // the central rectangle |ξ| < 1/4, |η| < 1/16 is a convex subset:
        // every pair inside it is mutually visible
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let p = (0.5 * rng.random::<f64>() - 0.25, 0.125 * rng.random::<f64>() - 0.0625);
            let q = (0.5 * rng.random::<f64>() - 0.25, 0.125 * rng.random::<f64>() - 0.0625);
            assert!(region_contains(p.0, p.1) && region_contains(q.0, q.1));
            assert!(segment_visible(p, q), "blocked pair {p:?} {q:?} in convex core");
        }
        // symmetric pairs agree
        assert_eq!(
            segment_visible((0.1, 0.05), (-0.3, -0.01)),
            segment_visible((-0.1, -0.05), (0.3, 0.01))
        );
    }

    #[test]
    fn visibility_constant_near_reference() {
        let est = incipient_visibility_constant(400_000, 42);
        assert!(est.std_error < 5e-4);
        assert!(
            (est.value - 0.02746).abs() < 5e-4 + 3.0 * est.std_error,
            "visibility constant {} ± {}",
            est.value,
            est.std_error
        );
        // below the area² upper bound
        assert!(est.value < (1.0 / 6.0) * (1.0 / 6.0));
        // deterministic for a fixed seed
        let again = incipient_visibility_constant(400_000, 42);
        assert_eq!(est, again);
    }

    #[test]
    fn incipient_tail_converges_below_critical_dimension() {
        // d = 3: full sum is E(5/2; Z²)/ζ(5) = 4 ζ(5/2) β(5/2) / ζ(5)
        let full = 4.0 * riemann_zeta(2.5).unwrap() * dirichlet_beta(2.5).unwrap()
            / riemann_zeta(5.0).unwrap();
        let tail = incipient_tail_prediction(3, 40.0).unwrap();
        assert!(!tail.diverges);
        // integral-test bound on the remainder of the signed primitive sum
        let bound = sphere_measure(1) / (3.0 * 40.0f64.powi(3));
        assert!(
            (tail.partial_sum - full).abs() < bound,
            "partial {} vs full {} (bound {})",
            tail.partial_sum,
            full,
            bound
        );
        // agreement with epstein_zeta through the Moebius identity
        let via_epstein = epstein_zeta(2.5, 2).unwrap() / riemann_zeta(5.0).unwrap();
        assert_relative_eq!(full, via_epstein, max_relative = 1e-10);
    }

    #[test]
    fn incipient_tail_cauchy_criterion() {
        // increments over successive octaves shrink for d <= 5, not for d = 6
        let increment = |d: usize, l: f64| {
            incipient_tail_prediction(d, 2.0 * l).unwrap().partial_sum
                - incipient_tail_prediction(d, l).unwrap().partial_sum
        };
        for d in [4, 5] {
            let i1 = increment(d, 5.0);
            let i2 = increment(d, 10.0);
            assert!(i2 < 0.6 * i1, "d = {d}: increments {i1} -> {i2} not Cauchy");
        }
        let i1 = increment(6, 5.0);
        let i2 = increment(6, 10.0);
        assert!(i2 > 0.75 * i1, "d = 6: increments {i1} -> {i2} should stall");
        assert!(incipient_tail_prediction(6, 10.0).unwrap().diverges);
        assert!(!incipient_tail_prediction(5, 10.0).unwrap().diverges);
    }

    #[test]
    fn incipient_exponent_classification() {
        assert_eq!(
            conjectured_incipient_exponent(4).unwrap(),
            IncipientExponent::InverseSquare
        );
        assert_eq!(
            conjectured_incipient_exponent(6).unwrap(),
            IncipientExponent::InverseSquareLog
        );
        assert_eq!(
            conjectured_incipient_exponent(8).unwrap(),
            IncipientExponent::Fractional
        );
        assert_eq!(conjectured_incipient_exponent(6).unwrap().description(), "t^-2 log t");
        assert_eq!(conjectured_incipient_exponent(8).unwrap().exponent_bounds(), (1.0, 2.0));
        assert!(conjectured_incipient_exponent(2).is_err());
    }
}
