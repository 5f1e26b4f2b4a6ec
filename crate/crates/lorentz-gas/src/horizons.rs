//! Principal horizons of the cubic Lorentz gas with one spherical
//! scatterer of radius r per unit cell.
//!
//! A primitive dual vector l (taken modulo inversion) of length L indexes
//! a family of parallel lattice hyperplanes with spacing 1/L. The empty
//! slab between the scatterer rows has width w = 1/L - 2r; the horizon
//! exists while w > 0, so only vectors with L < 1/(2r) contribute and the
//! set is finite for every fixed r > 0.

use crate::error::{Error, Result};
use crate::lattice::{primitive_vectors_below, DualVector};
use serde::Serialize;

/// One principal horizon: an empty slab of width `width` normal to
/// `normal`, repeating with perpendicular spacing `perp_covolume` = 1/L.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Horizon {
    /// Inversion representative of the primitive dual vector.
    pub vector: DualVector,
    /// Slab width w = 1/L - 2r (strictly positive for every stored horizon).
    pub width: f64,
    /// Unit normal l/L to the slab.
    pub normal: Vec<f64>,
    /// Covolume of the perpendicular lattice, 1/L.
    pub perp_covolume: f64,
}

impl Horizon {
    /// Length L of the underlying dual vector.
    pub fn norm(&self) -> f64 {
        self.vector.norm
    }
}

/// Whether a radius admits principal horizons at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HorizonRegime {
    /// r < 1/2: at least the d axis horizons are open.
    Open,
    /// r >= 1/2: every principal slab has closed (touching scatterers at
    /// r = 1/2, overlapping beyond); the horizon list is empty.
    IncipientOrClosed,
}

/// The full set of principal horizons of one gas, modulo inversion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonSet {
    pub dim: usize,
    pub radius: f64,
    pub regime: HorizonRegime,
    /// Sorted by (L, lexicographic vector).
    pub horizons: Vec<Horizon>,
}

/// All principal horizons of the d-dimensional gas with scatterer radius
/// r, one per primitive dual vector modulo inversion with 1/L - 2r > 0.
///
/// For r >= 1/2 the returned set is empty and tagged
/// [`HorizonRegime::IncipientOrClosed`]; r <= 0 is rejected.
pub fn principal_horizons(dim: usize, radius: f64) -> Result<HorizonSet> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: dim });
    }
    if !(radius > 0.0) {
        return Err(Error::RadiusOutOfRange {
            radius,
            reason: "scatterer radius must be positive",
        });
    }
    if radius >= 0.5 {
        return Ok(HorizonSet {
            dim,
            radius,
            regime: HorizonRegime::IncipientOrClosed,
            horizons: Vec::new(),
        });
    }
    let l_max = 1.0 / (2.0 * radius);
    let horizons = primitive_vectors_below(dim, l_max, true)?
        .into_iter()
        .filter_map(|v| {
            let width = 1.0 / v.norm - 2.0 * radius;
            if width > 0.0 {
                let normal = v.coords.iter().map(|&c| c as f64 / v.norm).collect();
                let perp_covolume = 1.0 / v.norm;
                Some(Horizon {
                    vector: v,
                    width,
                    normal,
                    perp_covolume,
                })
            } else {
                None
            }
        })
        .collect();
    Ok(HorizonSet {
        dim,
        radius,
        regime: HorizonRegime::Open,
        horizons,
    })
}

/// Number of principal horizons (primitive vectors mod inversion with
/// L < 1/(2r)).
pub fn horizon_count_bound(dim: usize, radius: f64) -> Result<usize> {
    Ok(principal_horizons(dim, radius)?.horizons.len())
}
