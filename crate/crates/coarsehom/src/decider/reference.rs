//! Exhaustive reference solver for small windows.
//!
//! Enumerates every nonempty region of the interior and computes the
//! demand-excess-per-cut ratio directly. Exponential in the interior size,
//! so capped, but entirely independent of the flow solver: it is the oracle
//! the parametric search is checked against.

use crate::chains::Chain0;
use crate::error::{Error, Result};
use crate::space::{Region, Window};

/// Largest interior this oracle will enumerate (2^24 regions).
pub const MAX_INTERIOR: usize = 24;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub c_star: f64,
    /// First region attaining the maximum in mask enumeration order;
    /// empty when the demand is zero.
    pub region: Region,
}

/// Max over nonempty interior regions of `|sum_R demand| / cut_r(R)`,
/// by direct enumeration.
pub fn exhaustive_min_capacity(w: &Window, demand: &Chain0, reach: u32) -> Result<OracleResult> {
    demand.check_window(w)?;
    let interior: Vec<u32> = w.interior_vertices().collect();
    let k = interior.len();
    if k > MAX_INTERIOR {
        return Err(Error::InvalidParameter(format!(
            "oracle limited to {MAX_INTERIOR} interior vertices, window has {k}"
        )));
    }
    if demand.is_zero() {
        return Ok(OracleResult {
            c_star: 0.0,
            region: Region::new(),
        });
    }
    let index_of: std::collections::HashMap<u32, usize> = interior
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    // each reach pair as (interior index or none, interior index or none)
    let pairs: Vec<(Option<usize>, Option<usize>)> = w
        .reach_pairs(reach)
        .into_iter()
        .map(|(x, y)| (index_of.get(&x).copied(), index_of.get(&y).copied()))
        .collect();
    let coeffs: Vec<f64> = interior.iter().map(|&v| demand.coeff(v)).collect();

    let mut best = 0.0f64;
    let mut best_mask = 0u32;
    for mask in 1u32..(1u32 << k) {
        let mut sum = 0.0;
        for (i, &c) in coeffs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                sum += c;
            }
        }
        let mut cut = 0usize;
        for &(a, b) in &pairs {
            let ina = a.is_some_and(|i| mask & (1 << i) != 0);
            let inb = b.is_some_and(|i| mask & (1 << i) != 0);
            if ina != inb {
                cut += 1;
            }
        }
        if cut == 0 {
            continue;
        }
        let ratio = sum.abs() / cut as f64;
        if ratio > best {
            best = ratio;
            best_mask = mask;
        }
    }
    let region: Region = interior
        .iter()
        .enumerate()
        .filter(|&(i, _)| best_mask & (1 << i) != 0)
        .map(|(_, &v)| v)
        .collect();
    Ok(OracleResult {
        c_star: best,
        region,
    })
}
