//! Primitive dual-lattice vectors of the cubic lattice Z^d.
//!
//! Primitive vectors modulo inversion are in 1:1 correspondence with the
//! codimension-one sublattices, and hence index the candidate principal
//! horizons. The Moebius function removes the primitivity condition from
//! lattice sums.

use crate::error::{Error, Result};
use serde::Serialize;

/// A nonzero integer vector of the (self-dual) cubic lattice together with
/// its Euclidean length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualVector {
    pub coords: Vec<i64>,
    pub norm: f64,
}

impl DualVector {
    fn new(coords: Vec<i64>) -> Self {
        let norm2: i64 = coords.iter().map(|&c| c * c).sum();
        DualVector {
            coords,
            norm: (norm2 as f64).sqrt(),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// True iff v is nonzero and the gcd of its absolute entries is 1.
/// The zero vector is not primitive.
pub fn is_primitive(v: &[i64]) -> Result<bool> {
    if v.is_empty() {
        return Err(Error::EmptyVector);
    }
    let g = v.iter().fold(0u64, |acc, &x| gcd(acc, x.unsigned_abs()));
    Ok(g == 1)
}

/// All primitive vectors of Z^d with Euclidean length 0 < L < `l_max`.
///
/// With `modulo_inversion` exactly one of {v, -v} is kept, chosen so that
/// the first nonzero coordinate is positive. Output is sorted by
/// (L, lexicographic coordinates) so enumeration order is stable.
pub fn primitive_vectors_below(
    dim: usize,
    l_max: f64,
    modulo_inversion: bool,
) -> Result<Vec<DualVector>> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: dim });
    }
    if !(l_max > 0.0) {
        return Err(Error::OutOfDomain {
            name: "l_max",
            value: l_max,
            domain: "l_max > 0",
        });
    }
    let budget = l_max * l_max;
    let bound = l_max.ceil() as i64;
    let mut out = Vec::new();
    let mut coords = Vec::with_capacity(dim);
    enumerate(dim, bound, budget, 0.0, &mut coords, &mut out);
    let mut vectors: Vec<DualVector> = out
        .into_iter()
        .filter(|v| is_primitive(v).unwrap())
        .filter(|v| !modulo_inversion || first_nonzero_positive(v))
        .map(DualVector::new)
        .collect();
    vectors.sort_by(|a, b| {
        a.norm
            .partial_cmp(&b.norm)
            .unwrap()
            .then_with(|| a.coords.cmp(&b.coords))
    });
    Ok(vectors)
}

fn enumerate(
    dim: usize,
    bound: i64,
    budget: f64,
    norm2: f64,
    coords: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    if coords.len() == dim {
        if norm2 > 0.0 {
            out.push(coords.clone());
        }
        return;
    }
    for c in -bound..=bound {
        let n2 = norm2 + (c * c) as f64;
        if n2 < budget {
            coords.push(c);
            enumerate(dim, bound, budget, n2, coords, out);
            coords.pop();
        }
    }
}

fn first_nonzero_positive(v: &[i64]) -> bool {
    match v.iter().find(|&&c| c != 0) {
        Some(&c) => c > 0,
        None => false,
    }
}

/// Moebius function mu(n) for n >= 1.
pub fn moebius(n: u64) -> Result<i32> {
    if n == 0 {
        return Err(Error::OutOfDomain {
            name: "n",
            value: 0.0,
            domain: "n >= 1",
        });
    }
    let mut m = n;
    let mut factors = 0;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return Ok(0); // squared prime factor
            }
            factors += 1;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        factors += 1;
    }
    Ok(if factors % 2 == 0 { 1 } else { -1 })
}
