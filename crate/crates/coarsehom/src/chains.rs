//! Sparse 0- and 1-chains on a window, the boundary operator, and the
//! uniform-finiteness norms.
//!
//! Coefficients are real. A 1-chain coefficient on the ordered pair
//! `(x, y)` with `x < y` means flow from `x` toward `y` when positive; the
//! boundary convention is `boundary(x -> y) = delta_y - delta_x`, so the
//! boundary of a 1-chain at a vertex equals inflow minus outflow.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{ball, Region, Window};

/// Coefficients below this magnitude are pruned at construction.
pub const COEFF_PRUNE: f64 = 1e-15;

/// A 0-chain: a sparse real coefficient per vertex, supported in the
/// interior of its ambient window.
///
/// Serializes as `{"window": id, "coeffs": [[vertex, value], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Chain0Data", from = "Chain0Data")]
pub struct Chain0 {
    window: u64,
    coeffs: BTreeMap<u32, f64>,
}

#[derive(Serialize, Deserialize)]
struct Chain0Data {
    window: u64,
    coeffs: Vec<(u32, f64)>,
}

impl From<Chain0> for Chain0Data {
    fn from(c: Chain0) -> Self {
        Chain0Data {
            window: c.window,
            coeffs: c.coeffs.into_iter().collect(),
        }
    }
}

impl From<Chain0Data> for Chain0 {
    fn from(d: Chain0Data) -> Self {
        Chain0 {
            window: d.window,
            coeffs: d.coeffs.into_iter().collect(),
        }
    }
}

impl Chain0 {
    /// Builds a 0-chain, validating that every supported vertex is interior.
    pub fn new(w: &Window, coeffs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (v, c) in coeffs {
            w.check_vertex(v)?;
            if !w.is_interior(v) {
                return Err(Error::SupportOutsideInterior { vertex: v });
            }
            if c.abs() > COEFF_PRUNE {
                *map.entry(v).or_insert(0.0) += c;
            }
        }
        map.retain(|_, c| c.abs() > COEFF_PRUNE);
        Ok(Chain0 {
            window: w.id(),
            coeffs: map,
        })
    }

    pub fn zero(w: &Window) -> Self {
        Chain0 {
            window: w.id(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn delta(w: &Window, v: u32) -> Result<Self> {
        Self::new(w, [(v, 1.0)])
    }

    pub fn window_id(&self) -> u64 {
        self.window
    }

    pub fn coeff(&self, v: u32) -> f64 {
        self.coeffs.get(&v).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.coeffs.iter().map(|(&v, &c)| (v, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.coeffs.values().sum()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Chain0 {
            window: self.window,
            coeffs: self.coeffs.iter().map(|(&v, &c)| (v, c * t)).collect(),
        }
    }

    pub fn check_window(&self, w: &Window) -> Result<()> {
        if self.window == w.id() {
            Ok(())
        } else {
            Err(Error::WindowMismatch {
                chain: self.window,
                expected: w.id(),
            })
        }
    }
}

/// A 1-chain: sparse coefficients on unordered vertex pairs at graph
/// distance at most `span`, stored on the ordered pair with the smaller id
/// first. Adding weight on `(y, x)` subtracts it from `(x, y)`.
///
/// Serializes as `{"window": id, "span": r, "coeffs": [[x, y, value], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Chain1Data", from = "Chain1Data")]
pub struct Chain1 {
    window: u64,
    span: u32,
    coeffs: BTreeMap<(u32, u32), f64>,
}

#[derive(Serialize, Deserialize)]
struct Chain1Data {
    window: u64,
    span: u32,
    coeffs: Vec<(u32, u32, f64)>,
}

impl From<Chain1> for Chain1Data {
    fn from(c: Chain1) -> Self {
        Chain1Data {
            window: c.window,
            span: c.span,
            coeffs: c.coeffs.into_iter().map(|((x, y), v)| (x, y, v)).collect(),
        }
    }
}

impl From<Chain1Data> for Chain1 {
    fn from(d: Chain1Data) -> Self {
        Chain1 {
            window: d.window,
            span: d.span,
            coeffs: d.coeffs.into_iter().map(|(x, y, v)| ((x, y), v)).collect(),
        }
    }
}

impl Chain1 {
    /// Builds a 1-chain from oriented coefficients, normalising each pair to
    /// ascending vertex order and checking the span bound.
    pub fn new(
        w: &Window,
        span: u32,
        coeffs: impl IntoIterator<Item = (u32, u32, f64)>,
    ) -> Result<Self> {
        if span == 0 {
            return Err(Error::InvalidParameter("span must be >= 1".into()));
        }
        let mut map: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for (x, y, c) in coeffs {
            w.check_vertex(x)?;
            w.check_vertex(y)?;
            if x == y {
                return Err(Error::InvalidParameter(format!(
                    "degenerate pair ({x}, {x})"
                )));
            }
            let (key, signed) = if x < y { ((x, y), c) } else { ((y, x), -c) };
            *map.entry(key).or_insert(0.0) += signed;
        }
        map.retain(|_, c| c.abs() > COEFF_PRUNE);
        for &(x, y) in map.keys() {
            let dist = w.distance(x, y);
            if dist > span {
                return Err(Error::SpanExceeded { x, y, dist, span });
            }
        }
        Ok(Chain1 {
            window: w.id(),
            span,
            coeffs: map,
        })
    }

    pub fn zero(w: &Window, span: u32) -> Self {
        Chain1 {
            window: w.id(),
            span,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn window_id(&self) -> u64 {
        self.window
    }

    pub fn span(&self) -> u32 {
        self.span
    }

    /// Coefficient of the oriented pair `x -> y` (antisymmetric).
    pub fn coeff(&self, x: u32, y: u32) -> f64 {
        if x < y {
            self.coeffs.get(&(x, y)).copied().unwrap_or(0.0)
        } else {
            -self.coeffs.get(&(y, x)).copied().unwrap_or(0.0)
        }
    }

    /// Supported pairs in ascending order, with their stored coefficient.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.coeffs.iter().map(|(&(x, y), &c)| (x, y, c))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn check_window(&self, w: &Window) -> Result<()> {
        if self.window == w.id() {
            Ok(())
        } else {
            Err(Error::WindowMismatch {
                chain: self.window,
                expected: w.id(),
            })
        }
    }

    /// Negates every coefficient.
    pub fn negated(&self) -> Self {
        Chain1 {
            window: self.window,
            span: self.span,
            coeffs: self.coeffs.iter().map(|(&k, &c)| (k, -c)).collect(),
        }
    }
}

/// Result of applying the boundary operator: the interior part as a
/// 0-chain, and the divergence absorbed at each sink vertex (the mass that
/// escaped the window).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryImage {
    pub interior: Chain0,
    pub escaped: BTreeMap<u32, f64>,
}

impl BoundaryImage {
    pub fn escaped_total(&self) -> f64 {
        self.escaped.values().sum()
    }

    /// Sum of the boundary over every vertex, sinks included. Always zero
    /// up to rounding: each pair contributes +c and -c.
    pub fn total_mass(&self) -> f64 {
        self.interior.total_mass() + self.escaped_total()
    }
}

/// Boundary of a 1-chain: for each pair `(x, y)` with coefficient `c`, adds
/// `c` at `y` and `-c` at `x`. Contributions at sink vertices are reported
/// separately as escaped mass.
pub fn boundary(b: &Chain1, w: &Window) -> Result<BoundaryImage> {
    b.check_window(w)?;
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    for (x, y, c) in b.iter() {
        *acc.entry(y).or_insert(0.0) += c;
        *acc.entry(x).or_insert(0.0) -= c;
    }
    let mut interior = Vec::new();
    let mut escaped = BTreeMap::new();
    for (v, c) in acc {
        if c.abs() <= COEFF_PRUNE {
            continue;
        }
        if w.is_interior(v) {
            interior.push((v, c));
        } else {
            escaped.insert(v, c);
        }
    }
    Ok(BoundaryImage {
        interior: Chain0::new(w, interior)?,
        escaped,
    })
}

/// Divergence of a 1-chain at a vertex: outflow minus inflow. This is the
/// negative of the boundary at that vertex.
pub fn divergence(b: &Chain1) -> BTreeMap<u32, f64> {
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    for (x, y, c) in b.iter() {
        *acc.entry(x).or_insert(0.0) += c;
        *acc.entry(y).or_insert(0.0) -= c;
    }
    acc.retain(|_, c| c.abs() > COEFF_PRUNE);
    acc
}

/// The best uniform-finiteness constant of a 0-chain at radius `r`: the
/// maximum over all window vertices of the total absolute coefficient mass
/// meeting the r-ball around that vertex.
pub fn uf_norm0(c: &Chain0, w: &Window, r: u32) -> Result<f64> {
    c.check_window(w)?;
    if r == 0 {
        return Err(Error::InvalidParameter("uf-norm radius must be >= 1".into()));
    }
    let mut best: f64 = 0.0;
    for v in 0..w.len() as u32 {
        let b = ball(w, v, r)?;
        let sum: f64 = b.iter().map(|u| c.coeff(u).abs()).sum();
        best = best.max(sum);
    }
    Ok(best)
}

/// Per-vertex throughput of a 1-chain: the maximum over vertices of the
/// total absolute coefficient on pairs incident to it. On bounded-degree
/// windows this is equivalent to the per-radius uniform-finiteness norm
/// family up to a factor depending only on degree and span; see
/// [`throughput_equivalence_factor`].
pub fn throughput(b: &Chain1) -> f64 {
    let mut load: BTreeMap<u32, f64> = BTreeMap::new();
    for (x, y, c) in b.iter() {
        *load.entry(x).or_insert(0.0) += c.abs();
        *load.entry(y).or_insert(0.0) += c.abs();
    }
    load.values().fold(0.0, |a, &b| a.max(b))
}

/// The factor relating throughput to the radius-`r` uniform-finiteness
/// norm of a 1-chain on this window: the maximum number of vertices in any
/// (r + span)-ball. A pair meets the r-ball around `v` only if one of its
/// endpoints lies within r + span of `v`, so the norm at radius r is at
/// most this factor times the throughput.
pub fn throughput_equivalence_factor(w: &Window, r: u32, span: u32) -> Result<usize> {
    let mut best = 0;
    for v in 0..w.len() as u32 {
        best = best.max(ball(w, v, r + span)?.len());
    }
    Ok(best)
}

/// Exact sum of the chain's coefficients over a region.
pub fn window_sum(c: &Chain0, region: &Region) -> f64 {
    region.iter().map(|v| c.coeff(v)).sum()
}
