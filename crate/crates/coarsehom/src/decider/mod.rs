//! Vanishing decider for 0-chain classes on window families.
//!
//! The vanishing criterion on a window is uniform-capacity flow
//! feasibility: the class of a demand vanishes within capacity `C` at reach
//! `r` when a 1-chain on pairs of distance at most `r`, with per-pair load
//! at most `C`, has divergence equal to minus the demand on the interior
//! (sinks absorb whatever escapes). By min-cut duality the least such
//! capacity is
//!
//! ```text
//! C* = max over regions R inside the interior of  |sum_R demand| / cut_r(R)
//! ```
//!
//! where `cut_r(R)` counts pairs at distance <= r leaving R. Every solve
//! produces a certificate another program can re-check from raw data: a
//! [`TailSet`] (weighted escape paths) when feasible, an [`Obstruction`]
//! (region plus bounded potential) when not.

mod maxflow;
pub mod reference;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::{window_sum, Chain0, Chain1};
use crate::error::{Error, Result};
use crate::space::{build_window_with, BuildOptions, Region, SpaceSpec, Window};
use maxflow::FlowNetwork;

/// Absolute tolerance on flow conservation and certificate loads.
pub const FLOW_TOL: f64 = 1e-9;

/// Relative tolerance on the reported least capacity.
pub const CSTAR_TOL: f64 = 1e-6;

/// How the capacity of a flow problem is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Capacity {
    /// Fixed uniform per-pair capacity.
    Fixed(f64),
    /// Search for the least feasible uniform capacity.
    Minimize,
}

/// A demand to be routed off a window through pairs of bounded reach.
pub struct FlowProblem<'w> {
    window: &'w Window,
    demand: Chain0,
    reach: u32,
    pairs: Vec<(u32, u32)>,
    /// Number of sinks within reach of each vertex.
    sink_mult: Vec<u32>,
    /// Sinks within reach of each vertex, ascending.
    sink_targets: Vec<Vec<u32>>,
    positive_total: f64,
    negative_total: f64,
}

/// Solver counters for reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub maxflow_runs: usize,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
}

/// Result of capacity minimisation: the least uniform capacity and a flow
/// feasible at it whose divergence is minus the demand on the interior.
#[derive(Debug, Clone)]
pub struct MinCapacity {
    pub c_star: f64,
    pub flow: Chain1,
    pub diagnostics: SolveDiagnostics,
}

/// One weighted escape path. The vertex sequence starts at a supported
/// vertex of the demand and ends at a sink or at a vertex of opposite
/// demand sign; consecutive vertices are within the problem's reach.
///
/// As a 1-chain the tail is oriented by the demand sign at its first
/// vertex: positive start means the path carries mass away (the chain is
/// `-weight` along the sequence), negative start means mass arrives along
/// the reversed sequence (`+weight` along it). With that orientation the
/// superposition of all tails has divergence `-demand` on the interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub vertices: Vec<u32>,
    pub weight: f64,
}

/// Primal certificate: a path decomposition of a feasible flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSet {
    pub window: u64,
    pub reach: u32,
    pub capacity: f64,
    pub tails: Vec<Tail>,
    /// Set when the decomposition dropped a circulating part; cycles do not
    /// affect divergence.
    pub cycles_discarded: bool,
    /// Set when the instance is feasible at this capacity but infeasible at
    /// `capacity * (1 - 1e-6)`: the optimum equals the capacity within
    /// tolerance.
    pub boundary_case: bool,
}

/// Dual certificate: a region whose demand excess exceeds what the capacity
/// lets through its reach-cut, together with the matching bounded potential
/// (the indicator of the region, signed by the excess).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstruction {
    pub window: u64,
    pub reach: u32,
    pub capacity: f64,
    pub region: Region,
    #[serde(with = "potential_pairs")]
    pub potential: BTreeMap<u32, f64>,
    /// Amount by which `|sum_R demand|` exceeds `capacity * cut_r(R)`.
    pub violation: f64,
}

/// Serializes the potential as `[[vertex, value], ...]`, matching the
/// chain coefficient shape.
mod potential_pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<u32, f64>, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(u32, f64)> = map.iter().map(|(&k, &v)| (k, v)).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, f64>, D::Error> {
        let pairs: Vec<(u32, f64)> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().collect())
    }
}

/// Outcome of a fixed-capacity feasibility solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Certificate {
    Tails(TailSet),
    Obstruction(Obstruction),
}

impl<'w> FlowProblem<'w> {
    pub fn new(window: &'w Window, demand: Chain0, reach: u32) -> Result<Self> {
        demand.check_window(window)?;
        if reach == 0 {
            return Err(Error::InvalidParameter("reach must be >= 1".into()));
        }
        let pairs = window.reach_pairs(reach);
        let n = window.len();
        let mut sink_mult = vec![0u32; n];
        let mut sink_targets = vec![Vec::new(); n];
        for &(x, y) in &pairs {
            let xi = window.is_interior(x);
            let yi = window.is_interior(y);
            if xi && !yi {
                sink_mult[x as usize] += 1;
                sink_targets[x as usize].push(y);
            } else if !xi && yi {
                sink_mult[y as usize] += 1;
                sink_targets[y as usize].push(x);
            }
        }
        let positive_total = demand.iter().map(|(_, c)| c.max(0.0)).sum();
        let negative_total = demand.iter().map(|(_, c)| (-c).max(0.0)).sum();
        Ok(FlowProblem {
            window,
            demand,
            reach,
            pairs,
            sink_mult,
            sink_targets,
            positive_total,
            negative_total,
        })
    }

    pub fn window(&self) -> &Window {
        self.window
    }

    pub fn demand(&self) -> &Chain0 {
        &self.demand
    }

    pub fn reach(&self) -> u32 {
        self.reach
    }

    /// Pairs at distance <= reach, smaller id first.
    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    fn total(&self) -> f64 {
        self.positive_total - self.negative_total
    }

    fn required_flow(&self) -> f64 {
        self.positive_total.max(self.negative_total)
    }

    /// Number of reach-pairs with exactly one endpoint in the region.
    /// Sinks never belong to a region.
    pub fn cut_count(&self, region: &Region) -> usize {
        self.pairs
            .iter()
            .filter(|&&(x, y)| region.contains(x) != region.contains(y))
            .count()
    }

    /// Builds and runs the max-flow network at the given capacity.
    /// Node layout: window vertices, then ground (all sinks merged), then
    /// source and target.
    fn solve_raw(&self, capacity: f64) -> RawSolve {
        let n = self.window.len() as u32;
        let (ground, source, target) = (n, n + 1, n + 2);
        let mut net = FlowNetwork::new(n as usize + 3);
        let mut pipe_arcs = Vec::new();
        for &(x, y) in &self.pairs {
            if self.window.is_interior(x) && self.window.is_interior(y) {
                pipe_arcs.push((x, y, net.add_arc(x, y, capacity, capacity)));
            }
        }
        let mut ground_arcs = Vec::new();
        for x in 0..n {
            let m = self.sink_mult[x as usize];
            if m > 0 {
                let cap = m as f64 * capacity;
                ground_arcs.push((x, net.add_arc(x, ground, cap, cap)));
            }
        }
        for (v, c) in self.demand.iter() {
            if c > 0.0 {
                net.add_arc(source, v, c, 0.0);
            } else {
                net.add_arc(v, target, -c, 0.0);
            }
        }
        let total = self.total();
        if total > 0.0 {
            net.add_arc(ground, target, total, 0.0);
        } else if total < 0.0 {
            net.add_arc(source, ground, -total, 0.0);
        }
        let value = net.max_flow(source, target);
        RawSolve {
            feasible: value >= self.required_flow() - FLOW_TOL,
            net,
            pipe_arcs,
            ground_arcs,
            capacity,
        }
    }

    /// The violating region of a solved (infeasible) network, from the
    /// residual min-cut. When the ground node sits on the source side the
    /// excess demand is negative and lives on the target side, so the
    /// complement is returned. The residual cut is unique for a given arc
    /// order, hence deterministic.
    fn cut_region(&self, raw: &RawSolve) -> Region {
        let n = self.window.len() as u32;
        let side = raw.net.min_cut_side(n + 1);
        let ground_on_source_side = side[n as usize];
        (0..n)
            .filter(|&v| {
                self.window.is_interior(v) && (side[v as usize] != ground_on_source_side)
            })
            .collect()
    }

    /// Converts a solved network into the flow 1-chain with divergence
    /// `-demand` on the interior. Net pipe flows toward the merged ground
    /// are split over the concrete sink pairs in ascending sink order, each
    /// piece within capacity.
    fn flow_chain(&self, raw: &RawSolve) -> Result<Chain1> {
        let mut oriented: Vec<(u32, u32, f64)> = Vec::new();
        for &(x, y, arc) in &raw.pipe_arcs {
            let f = raw.net.net_flow(arc);
            if f.abs() > 1e-13 {
                // routing flow x -> y of f; the chain is its negation
                oriented.push((x, y, -f));
            }
        }
        for &(x, arc) in &raw.ground_arcs {
            let mut f = raw.net.net_flow(arc);
            if f.abs() <= 1e-13 {
                continue;
            }
            for &s in &self.sink_targets[x as usize] {
                if f.abs() <= 1e-13 {
                    break;
                }
                let piece = f.clamp(-raw.capacity, raw.capacity);
                oriented.push((x, s, -piece));
                f -= piece;
            }
            debug_assert!(f.abs() <= 1e-9, "ground flow exceeded sink pair capacity");
        }
        Chain1::new(self.window, self.reach, oriented)
    }

    /// Least uniform capacity at which the demand routes, found by
    /// parametric bisection on max-flow feasibility, with the exact value
    /// recovered from the limiting cut region. The returned flow is
    /// feasible at `c_star` within [`FLOW_TOL`].
    pub fn min_capacity(&self) -> Result<MinCapacity> {
        if self.demand.is_zero() {
            return Ok(MinCapacity {
                c_star: 0.0,
                flow: Chain1::zero(self.window, self.reach),
                diagnostics: SolveDiagnostics::default(),
            });
        }
        let total = self.total();
        let any_sink: u32 = self.sink_mult.iter().sum();
        if total.abs() > 1e-12 && any_sink == 0 {
            return Err(Error::NoEscape { total });
        }

        let mut runs = 0;
        let mut hi = self.required_flow();
        let mut hi_solve = self.solve_raw(hi);
        runs += 1;
        let mut grow = 0;
        while !hi_solve.feasible {
            grow += 1;
            if grow > 60 {
                return Err(Error::NonConvergence { lo: 0.0, hi });
            }
            hi *= 2.0;
            hi_solve = self.solve_raw(hi);
            runs += 1;
        }
        let mut lo = 0.0;
        let mut lo_solve: Option<RawSolve> = None;
        for _ in 0..200 {
            if hi - lo <= 1e-13 * (1.0 + hi) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let s = self.solve_raw(mid);
            runs += 1;
            if s.feasible {
                hi = mid;
                hi_solve = s;
            } else {
                lo = mid;
                lo_solve = Some(s);
            }
        }
        if hi - lo > CSTAR_TOL * (1.0 + hi) {
            return Err(Error::NonConvergence { lo, hi });
        }
        let lo_solve = match lo_solve {
            Some(s) => s,
            None => {
                runs += 1;
                self.solve_raw(lo)
            }
        };
        let region = self.cut_region(&lo_solve);
        let cut = self.cut_count(&region);
        let c_star = if region.is_empty() || cut == 0 {
            hi
        } else {
            window_sum(&self.demand, &region).abs() / cut as f64
        };
        // the deliverable flow is solved strictly above the optimum so the
        // demand saturates exactly instead of within the feasibility slack
        let final_solve = self.solve_raw(c_star + 0.5 * FLOW_TOL);
        runs += 1;
        let flow_solve = if final_solve.feasible {
            final_solve
        } else {
            hi_solve
        };
        Ok(MinCapacity {
            c_star,
            flow: self.flow_chain(&flow_solve)?,
            diagnostics: SolveDiagnostics {
                maxflow_runs: runs,
                bracket_lo: lo,
                bracket_hi: hi,
            },
        })
    }

    /// Fixed-capacity feasibility: a tail set when the demand routes, an
    /// obstruction region otherwise. Each certificate re-verifies from raw
    /// data via its `verify` method.
    pub fn solve_feasibility(&self, capacity: f64) -> Result<Certificate> {
        if !(capacity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "capacity must be positive, got {capacity}"
            )));
        }
        let raw = self.solve_raw(capacity);
        if raw.feasible {
            let flow = self.flow_chain(&raw)?;
            let mut tails = extract_tails(&flow, &self.demand, self.window, capacity)?;
            let probe = self.solve_raw(capacity * (1.0 - 1e-6));
            tails.boundary_case = !probe.feasible;
            Ok(Certificate::Tails(tails))
        } else {
            let region = self.cut_region(&raw);
            Ok(Certificate::Obstruction(self.obstruction_for(
                region, capacity,
            )?))
        }
    }

    /// Builds the dual certificate for a violating region: the signed
    /// indicator potential and the excess over the cut.
    fn obstruction_for(&self, region: Region, capacity: f64) -> Result<Obstruction> {
        if region.is_empty() {
            return Err(Error::CertificateInvalid(
                "min-cut produced an empty region".into(),
            ));
        }
        let sum = window_sum(&self.demand, &region);
        let cut = self.cut_count(&region);
        let violation = sum.abs() - capacity * cut as f64;
        let sign = if sum >= 0.0 { 1.0 } else { -1.0 };
        let potential: BTreeMap<u32, f64> = region.iter().map(|v| (v, sign)).collect();
        Ok(Obstruction {
            window: self.window.id(),
            reach: self.reach,
            capacity,
            region,
            potential,
            violation,
        })
    }
}

struct RawSolve {
    feasible: bool,
    net: FlowNetwork,
    pipe_arcs: Vec<(u32, u32, usize)>,
    ground_arcs: Vec<(u32, usize)>,
    capacity: f64,
}

impl TailSet {
    /// Rebuilds the routing flow (divergence `+demand`) from the tails.
    fn routing_loads(&self, demand: &Chain0) -> BTreeMap<(u32, u32), f64> {
        let mut loads: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for tail in &self.tails {
            let start = tail.vertices[0];
            let reversed = demand.coeff(start) < 0.0;
            for pair in tail.vertices.windows(2) {
                let (a, b) = if reversed {
                    (pair[1], pair[0])
                } else {
                    (pair[0], pair[1])
                };
                let (key, sign) = if a < b { ((a, b), 1.0) } else { ((b, a), -1.0) };
                *loads.entry(key).or_insert(0.0) += sign * tail.weight;
            }
        }
        loads
    }

    /// Re-checks every invariant from raw data: path endpoints, reach
    /// bounds, per-pair loads against the capacity, and that the
    /// superposition has divergence `-demand` on the interior.
    pub fn verify(&self, w: &Window, demand: &Chain0) -> Result<()> {
        if self.window != w.id() {
            return Err(Error::WindowMismatch {
                chain: self.window,
                expected: w.id(),
            });
        }
        demand.check_window(w)?;
        for (i, tail) in self.tails.iter().enumerate() {
            if tail.vertices.len() < 2 {
                return Err(Error::CertificateInvalid(format!(
                    "tail {i} has fewer than two vertices"
                )));
            }
            if !(tail.weight > 0.0) {
                return Err(Error::CertificateInvalid(format!(
                    "tail {i} has non-positive weight {}",
                    tail.weight
                )));
            }
            let start = *tail.vertices.first().unwrap();
            let end = *tail.vertices.last().unwrap();
            let c_start = demand.coeff(start);
            if c_start == 0.0 {
                return Err(Error::CertificateInvalid(format!(
                    "tail {i} starts at {start}, outside the demand support"
                )));
            }
            let c_end = demand.coeff(end);
            let ends_at_sink = !w.is_interior(end);
            let ends_at_opposite = c_start * c_end < 0.0;
            if !ends_at_sink && !ends_at_opposite {
                return Err(Error::CertificateInvalid(format!(
                    "tail {i} ends at {end}, which is neither a sink nor opposite-signed support"
                )));
            }
            for pair in tail.vertices.windows(2) {
                let d = w.distance(pair[0], pair[1]);
                if d > self.reach {
                    return Err(Error::CertificateInvalid(format!(
                        "tail {i} steps from {} to {} at distance {d} > reach {}",
                        pair[0], pair[1], self.reach
                    )));
                }
            }
        }
        let loads = self.routing_loads(demand);
        for (&(x, y), &load) in &loads {
            if load.abs() > self.capacity + FLOW_TOL {
                return Err(Error::CertificateInvalid(format!(
                    "pair ({x}, {y}) carries {load}, above capacity {}",
                    self.capacity
                )));
            }
        }
        // divergence of the routing flow must equal +demand on the interior
        let mut div: BTreeMap<u32, f64> = BTreeMap::new();
        for (&(x, y), &load) in &loads {
            *div.entry(x).or_insert(0.0) += load;
            *div.entry(y).or_insert(0.0) -= load;
        }
        for v in w.interior_vertices() {
            let got = div.get(&v).copied().unwrap_or(0.0);
            let expected = demand.coeff(v);
            if (got - expected).abs() > FLOW_TOL {
                return Err(Error::DivergenceMismatch {
                    vertex: v,
                    got: -got,
                    expected: -expected,
                    tol: FLOW_TOL,
                });
            }
        }
        Ok(())
    }

    /// Largest per-pair load carried by the tails.
    pub fn max_load(&self, demand: &Chain0) -> f64 {
        self.routing_loads(demand)
            .values()
            .fold(0.0, |a, &b| a.max(b.abs()))
    }
}

impl Obstruction {
    /// Re-checks the region inequality and the potential certificate from
    /// raw data: `|sum_R demand| > capacity * cut_r(R)`, the potential is
    /// 1-Lipschitz across reach pairs, vanishes off the interior, and pairs
    /// against the demand to more than the capacity times its total level
    /// crossings.
    pub fn verify(&self, w: &Window, demand: &Chain0) -> Result<()> {
        if self.window != w.id() {
            return Err(Error::WindowMismatch {
                chain: self.window,
                expected: w.id(),
            });
        }
        demand.check_window(w)?;
        if self.region.is_empty() {
            return Err(Error::EmptyRegion);
        }
        for v in self.region.iter() {
            w.check_vertex(v)?;
            if !w.is_interior(v) {
                return Err(Error::CertificateInvalid(format!(
                    "region contains sink vertex {v}"
                )));
            }
        }
        let pairs = w.reach_pairs(self.reach);
        let cut = pairs
            .iter()
            .filter(|&&(x, y)| self.region.contains(x) != self.region.contains(y))
            .count();
        let sum = window_sum(demand, &self.region);
        let violation = sum.abs() - self.capacity * cut as f64;
        if violation <= 0.0 {
            return Err(Error::CertificateInvalid(format!(
                "region satisfies the cut bound: |sum| = {}, capacity * cut = {}",
                sum.abs(),
                self.capacity * cut as f64
            )));
        }
        if (violation - self.violation).abs() > FLOW_TOL * (1.0 + violation.abs()) {
            return Err(Error::CertificateInvalid(format!(
                "recorded violation {} differs from recomputed {violation}",
                self.violation
            )));
        }
        // potential certificate
        let u = |v: u32| self.potential.get(&v).copied().unwrap_or(0.0);
        for (&v, &val) in &self.potential {
            if !w.is_interior(v) && val != 0.0 {
                return Err(Error::CertificateInvalid(format!(
                    "potential is {val} at sink {v}, must vanish"
                )));
            }
        }
        let mut crossings = 0.0;
        for &(x, y) in &pairs {
            let du = (u(x) - u(y)).abs();
            if du > 1.0 + 1e-12 {
                return Err(Error::CertificateInvalid(format!(
                    "potential differs by {du} across pair ({x}, {y})"
                )));
            }
            crossings += du;
        }
        let pairing: f64 = demand.iter().map(|(v, c)| c * u(v)).sum();
        if pairing <= self.capacity * crossings {
            return Err(Error::CertificateInvalid(format!(
                "potential pairing {pairing} does not exceed capacity * crossings = {}",
                self.capacity * crossings
            )));
        }
        Ok(())
    }
}

/// Weighted directed arcs with synchronized forward and reverse indexes.
struct ArcStore {
    out: BTreeMap<u32, BTreeMap<u32, f64>>,
    inc: BTreeMap<u32, BTreeMap<u32, f64>>,
}

impl ArcStore {
    const EPS_W: f64 = 1e-12;

    fn from_routing(routing: &Chain1) -> Self {
        let mut out: BTreeMap<u32, BTreeMap<u32, f64>> = BTreeMap::new();
        let mut inc: BTreeMap<u32, BTreeMap<u32, f64>> = BTreeMap::new();
        for (x, y, c) in routing.iter() {
            let (from, to, wgt) = if c > 0.0 { (x, y, c) } else { (y, x, -c) };
            if wgt > Self::EPS_W {
                out.entry(from).or_default().insert(to, wgt);
                inc.entry(to).or_default().insert(from, wgt);
            }
        }
        ArcStore { out, inc }
    }

    fn weight(&self, from: u32, to: u32) -> f64 {
        self.out
            .get(&from)
            .and_then(|m| m.get(&to))
            .copied()
            .unwrap_or(0.0)
    }

    fn first_out(&self, from: u32) -> Option<u32> {
        self.out.get(&from).and_then(|m| m.keys().next().copied())
    }

    fn first_in(&self, to: u32) -> Option<u32> {
        self.inc.get(&to).and_then(|m| m.keys().next().copied())
    }

    fn consume(&mut self, from: u32, to: u32, amount: f64) {
        let rem = {
            let slot = self
                .out
                .get_mut(&from)
                .and_then(|m| m.get_mut(&to))
                .expect("consuming a missing arc");
            *slot -= amount;
            *slot
        };
        if rem <= Self::EPS_W {
            let m = self.out.get_mut(&from).unwrap();
            m.remove(&to);
            if m.is_empty() {
                self.out.remove(&from);
            }
            let m = self.inc.get_mut(&to).unwrap();
            m.remove(&from);
            if m.is_empty() {
                self.inc.remove(&to);
            }
        } else {
            *self.inc.get_mut(&to).unwrap().get_mut(&from).unwrap() = rem;
        }
    }

    fn leftover(&self) -> f64 {
        self.out.values().flat_map(|m| m.values()).sum()
    }
}

enum EndKind {
    Sink,
    Negative,
}

/// Decomposes a flow with divergence `-demand` into weighted escape paths,
/// discarding any circulating part. Walks always follow the smallest-id
/// available continuation, so the decomposition is deterministic. The
/// number of paths is at most the number of supported pairs plus the size
/// of the demand support: each path exhausts an arc or a supply.
pub fn extract_tails(
    flow: &Chain1,
    demand: &Chain0,
    w: &Window,
    capacity: f64,
) -> Result<TailSet> {
    flow.check_window(w)?;
    demand.check_window(w)?;
    const EPS_W: f64 = ArcStore::EPS_W;

    // precondition: divergence of the flow is -demand on the interior
    let div = crate::chains::divergence(flow);
    for v in w.interior_vertices() {
        let got = div.get(&v).copied().unwrap_or(0.0);
        let expected = -demand.coeff(v);
        if (got - expected).abs() > 1e-7 {
            return Err(Error::DivergenceMismatch {
                vertex: v,
                got,
                expected,
                tol: 1e-7,
            });
        }
    }

    // decompose the routing flow (divergence +demand)
    let routing = flow.negated();
    let mut arcs = ArcStore::from_routing(&routing);

    let mut pos: BTreeMap<u32, f64> = demand.iter().filter(|&(_, c)| c > 0.0).collect();
    let mut neg: BTreeMap<u32, f64> = demand
        .iter()
        .filter(|&(_, c)| c < 0.0)
        .map(|(v, c)| (v, -c))
        .collect();

    let mut tails = Vec::new();
    let mut cycles_discarded = false;

    // remainders below this are rounding dust from the solver's feasibility
    // slack, not real mass; walks stop chasing them
    const DUST: f64 = 1e-8;

    // forward walks: positive supply runs to a sink or to negative support
    let sources: Vec<u32> = pos.keys().copied().collect();
    for start in sources {
        'walks: while pos.get(&start).copied().unwrap_or(0.0) > EPS_W {
            let supply = pos[&start];
            let mut path = vec![start];
            let mut seen: BTreeMap<u32, usize> = BTreeMap::from([(start, 0)]);
            let end_kind;
            loop {
                let cur = *path.last().unwrap();
                if !w.is_interior(cur) {
                    end_kind = EndKind::Sink;
                    break;
                }
                if cur != start && neg.get(&cur).copied().unwrap_or(0.0) > EPS_W {
                    end_kind = EndKind::Negative;
                    break;
                }
                let next = match arcs.first_out(cur) {
                    Some(n) => n,
                    None if supply <= DUST => break 'walks,
                    None => {
                        return Err(Error::CertificateInvalid(format!(
                            "flow decomposition stalled at vertex {cur}"
                        )))
                    }
                };
                if let Some(&at) = seen.get(&next) {
                    // strip the cycle path[at] -> ... -> cur -> path[at]
                    let mut bottleneck = arcs.weight(cur, next);
                    for i in at..path.len() - 1 {
                        bottleneck = bottleneck.min(arcs.weight(path[i], path[i + 1]));
                    }
                    for i in at..path.len() - 1 {
                        arcs.consume(path[i], path[i + 1], bottleneck);
                    }
                    arcs.consume(cur, next, bottleneck);
                    cycles_discarded = true;
                    for v in path.drain(at + 1..) {
                        seen.remove(&v);
                    }
                    continue;
                }
                seen.insert(next, path.len());
                path.push(next);
            }
            let mut weight = supply;
            for i in 0..path.len() - 1 {
                weight = weight.min(arcs.weight(path[i], path[i + 1]));
            }
            if let EndKind::Negative = end_kind {
                weight = weight.min(neg[path.last().unwrap()]);
            }
            if weight <= EPS_W {
                return Err(Error::CertificateInvalid(
                    "flow decomposition produced a zero-weight path".into(),
                ));
            }
            for i in 0..path.len() - 1 {
                arcs.consume(path[i], path[i + 1], weight);
            }
            *pos.get_mut(&start).unwrap() -= weight;
            if let EndKind::Negative = end_kind {
                *neg.get_mut(path.last().unwrap()).unwrap() -= weight;
            }
            tails.push(Tail {
                vertices: path,
                weight,
            });
        }
    }

    // backward walks: remaining negative demand is fed from sinks. The
    // recorded vertex sequence starts at the demand vertex and ends at the
    // sink; the underlying flow runs along the reversed sequence.
    let drains: Vec<u32> = neg.keys().copied().collect();
    for start in drains {
        'feeds: while neg.get(&start).copied().unwrap_or(0.0) > EPS_W {
            let need = neg[&start];
            let mut path = vec![start];
            let mut seen: BTreeMap<u32, usize> = BTreeMap::from([(start, 0)]);
            loop {
                let cur = *path.last().unwrap();
                if !w.is_interior(cur) {
                    break;
                }
                let prev = match arcs.first_in(cur) {
                    Some(p) => p,
                    None if need <= DUST => break 'feeds,
                    None => {
                        return Err(Error::CertificateInvalid(format!(
                            "flow decomposition stalled feeding vertex {cur}"
                        )))
                    }
                };
                if let Some(&at) = seen.get(&prev) {
                    // flow cycle: prev -> path[len-1] -> ... -> path[at] = prev
                    let mut bottleneck = arcs.weight(prev, cur);
                    for i in at..path.len() - 1 {
                        bottleneck = bottleneck.min(arcs.weight(path[i + 1], path[i]));
                    }
                    arcs.consume(prev, cur, bottleneck);
                    for i in at..path.len() - 1 {
                        arcs.consume(path[i + 1], path[i], bottleneck);
                    }
                    cycles_discarded = true;
                    for v in path.drain(at + 1..) {
                        seen.remove(&v);
                    }
                    continue;
                }
                seen.insert(prev, path.len());
                path.push(prev);
            }
            let mut weight = need;
            for i in 0..path.len() - 1 {
                weight = weight.min(arcs.weight(path[i + 1], path[i]));
            }
            if weight <= EPS_W {
                return Err(Error::CertificateInvalid(
                    "flow decomposition produced a zero-weight feed path".into(),
                ));
            }
            for i in 0..path.len() - 1 {
                arcs.consume(path[i + 1], path[i], weight);
            }
            *neg.get_mut(&start).unwrap() -= weight;
            tails.push(Tail {
                vertices: path,
                weight,
            });
        }
    }

    if arcs.leftover() > FLOW_TOL {
        cycles_discarded = true;
    }

    Ok(TailSet {
        window: w.id(),
        reach: flow.span(),
        capacity,
        tails,
        cycles_discarded,
        boundary_case: false,
    })
}

/// Deterministic rules generating one demand per window.
///
/// The sign and membership rules read the vertex coordinates, so the same
/// model point gets the same coefficient in every window that contains it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DemandFamily {
    /// +1 on every interior vertex.
    AllOnes,
    /// +1 or -1 by the parity of the coordinate sum.
    Alternating,
    /// +1 on vertices whose coordinate sum is divisible by the index.
    Sublattice { index: u32 },
    /// +1 at the basepoint.
    Delta,
}

impl std::fmt::Display for DemandFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DemandFamily::AllOnes => write!(f, "all-ones"),
            DemandFamily::Alternating => write!(f, "alternating"),
            DemandFamily::Sublattice { index } => write!(f, "sublattice:{index}"),
            DemandFamily::Delta => write!(f, "delta"),
        }
    }
}

impl std::str::FromStr for DemandFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-ones" => Ok(DemandFamily::AllOnes),
            "alternating" => Ok(DemandFamily::Alternating),
            "delta" => Ok(DemandFamily::Delta),
            other => {
                if let Some(k) = other.strip_prefix("sublattice:") {
                    let index: u32 = k.parse().map_err(|_| {
                        Error::InvalidParameter(format!("bad sublattice index in {other:?}"))
                    })?;
                    if index < 2 {
                        return Err(Error::InvalidParameter(
                            "sublattice index must be >= 2".into(),
                        ));
                    }
                    Ok(DemandFamily::Sublattice { index })
                } else {
                    Err(Error::InvalidParameter(format!(
                        "unknown demand family {other:?}; expected all-ones, alternating, sublattice:k, or delta"
                    )))
                }
            }
        }
    }
}

impl From<DemandFamily> for String {
    fn from(d: DemandFamily) -> String {
        d.to_string()
    }
}

impl TryFrom<String> for DemandFamily {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl DemandFamily {
    pub fn generate(&self, w: &Window) -> Result<Chain0> {
        match self {
            DemandFamily::AllOnes => {
                Chain0::new(w, w.interior_vertices().map(|v| (v, 1.0)))
            }
            DemandFamily::Alternating => Chain0::new(
                w,
                w.interior_vertices().map(|v| {
                    let s: i64 = w.coords(v).iter().sum();
                    (v, if s.rem_euclid(2) == 0 { 1.0 } else { -1.0 })
                }),
            ),
            DemandFamily::Sublattice { index } => Chain0::new(
                w,
                w.interior_vertices().filter_map(|v| {
                    let s: i64 = w.coords(v).iter().sum();
                    (s.rem_euclid(*index as i64) == 0).then_some((v, 1.0))
                }),
            ),
            DemandFamily::Delta => Chain0::delta(w, w.basepoint()),
        }
    }

    /// Whether every generated coefficient is positive: such demands encode
    /// a uniformly discrete subset with unit weights.
    pub fn is_all_positive(&self) -> bool {
        !matches!(self, DemandFamily::Alternating)
    }
}

/// Thresholds of the growth classifier. These are configuration, not baked
/// constants; the defaults separate square-lattice growth (slope near 1)
/// from tree behaviour (bounded) by a wide margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecideConfig {
    /// Log-log slope above which a well-fit sequence counts as growing.
    pub slope_threshold: f64,
    /// Minimum fit quality for the growth call.
    pub r2_threshold: f64,
    /// Relative spread of the trailing capacities below which the sequence
    /// counts as bounded.
    pub sup_stability: f64,
    /// The obstruction witness is extracted at this fraction of the largest
    /// window's least capacity.
    pub witness_capacity_fraction: f64,
    /// Window construction budget.
    pub vertex_budget: usize,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig {
            slope_threshold: 0.5,
            r2_threshold: 0.9,
            sup_stability: 0.10,
            witness_capacity_fraction: 0.9,
            vertex_budget: crate::space::DEFAULT_VERTEX_BUDGET,
        }
    }
}

/// Least-squares fit of `log C*` against `log size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Per-window solver outcome inside a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeResult {
    pub size: u32,
    pub c_star: f64,
    pub window_vertices: usize,
    pub interior_vertices: usize,
    pub maxflow_runs: usize,
}

/// The decision attached to a window family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Decision {
    /// Least capacities stay bounded across sizes: the class dies.
    Vanishes {
        c_sup_estimate: f64,
        low_confidence: bool,
    },
    /// Least capacities grow; no uniform capacity works on all windows.
    Obstructed {
        growth_fit: Option<GrowthFit>,
        witness: Obstruction,
    },
    /// Conflicting signals; raw capacities are in `per_size`.
    Undetermined { reason: String },
}

/// Output of [`decide`]: the per-size capacities and the classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub space: SpaceSpec,
    pub demand_family: DemandFamily,
    pub reach: u32,
    pub per_size: Vec<SizeResult>,
    pub decision: Decision,
}

/// Least-squares fit of `ln y` against `ln x` over the positive points;
/// `None` with fewer than two usable points.
pub fn log_log_fit(points: &[(f64, f64)]) -> Option<GrowthFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some(GrowthFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Decides vanishing of the family's class across a growing sequence of
/// windows: bounded least capacities mean the class vanishes with a uniform
/// constant, sustained power growth means no constant exists and an
/// explicit obstruction is extracted from the largest window.
pub fn decide(
    spec: &SpaceSpec,
    family: &DemandFamily,
    reach: u32,
    sizes: &[u32],
    cfg: &DecideConfig,
) -> Result<Verdict> {
    let mut sizes: Vec<u32> = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(Error::InvalidParameter(
            "decide needs at least two window sizes".into(),
        ));
    }
    let opts = BuildOptions {
        vertex_budget: cfg.vertex_budget,
    };
    let solved: Vec<Result<(SizeResult, Window, Chain0)>> = sizes
        .par_iter()
        .map(|&size| {
            let w = build_window_with(spec, size, &opts)?;
            let demand = family.generate(&w)?;
            let problem = FlowProblem::new(&w, demand.clone(), reach)?;
            let min = problem.min_capacity()?;
            Ok((
                SizeResult {
                    size,
                    c_star: min.c_star,
                    window_vertices: w.len(),
                    interior_vertices: w.interior_count(),
                    maxflow_runs: min.diagnostics.maxflow_runs,
                },
                w,
                demand,
            ))
        })
        .collect();
    let mut per_size = Vec::new();
    let mut largest: Option<(Window, Chain0)> = None;
    for item in solved {
        let (r, w, d) = item?;
        per_size.push(r);
        largest = Some((w, d));
    }
    let cs: Vec<f64> = per_size.iter().map(|r| r.c_star).collect();

    // bounded: the trailing half (at least two entries) is stable
    let tail_start = cs.len() - (cs.len() / 2).max(2).min(cs.len());
    let tail = &cs[tail_start..];
    let tmax = tail.iter().cloned().fold(f64::MIN, f64::max);
    let tmin = tail.iter().cloned().fold(f64::MAX, f64::min);
    let bounded = tmax <= 0.0 || (tmax - tmin) <= cfg.sup_stability * tmax;

    let fit = log_log_fit(
        &sizes
            .iter()
            .zip(&cs)
            .map(|(&s, &c)| (s as f64, c))
            .collect::<Vec<_>>(),
    );

    let decision = if bounded {
        Decision::Vanishes {
            c_sup_estimate: cs.iter().cloned().fold(0.0, f64::max),
            low_confidence: false,
        }
    } else if let Some(f) = fit
        .as_ref()
        .filter(|f| f.slope > cfg.slope_threshold && f.r_squared >= cfg.r2_threshold)
    {
        let (w, demand) = largest.as_ref().unwrap();
        let c_last = *cs.last().unwrap();
        let problem = FlowProblem::new(w, demand.clone(), reach)?;
        match problem.solve_feasibility(cfg.witness_capacity_fraction * c_last)? {
            Certificate::Obstruction(witness) => Decision::Obstructed {
                growth_fit: (sizes.len() >= 4).then(|| f.clone()),
                witness,
            },
            Certificate::Tails(_) => Decision::Undetermined {
                reason: format!(
                    "growth fit says obstructed but the largest window is feasible at {} of its least capacity",
                    cfg.witness_capacity_fraction
                ),
            },
        }
    } else {
        let slack = cfg.sup_stability / 2.0;
        let rises = cs.windows(2).any(|p| p[1] > p[0] * (1.0 + slack) + 1e-12);
        let falls = cs.windows(2).any(|p| p[1] < p[0] * (1.0 - slack) - 1e-12);
        if rises && falls {
            Decision::Undetermined {
                reason: "least capacities are non-monotone across sizes".into(),
            }
        } else {
            Decision::Vanishes {
                c_sup_estimate: cs.iter().cloned().fold(0.0, f64::max),
                low_confidence: true,
            }
        }
    };

    Ok(Verdict {
        space: spec.clone(),
        demand_family: family.clone(),
        reach,
        per_size,
        decision,
    })
}

/// Scalar-curvature verdict for an infinite connected sum along the set
/// encoded by the demand family, given the integer genus invariant of the
/// summand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PscVerdict {
    /// Nonzero invariant but the class vanishes: tails exist and the sum
    /// carries a uniformly positive scalar curvature metric.
    AdmitsUpsc,
    /// Nonzero invariant and the class is obstructed: not even nonnegative
    /// scalar curvature is possible.
    NoNonnegativeScalarCurvature,
    /// Zero invariant: the summands cancel by surgery regardless of the
    /// class.
    AdmitsUpscBySurgery,
    /// The underlying decision was undetermined.
    Undetermined,
}

/// Combines a vanishing decision with the summand invariant. The decision
/// must come from an all-positive unit demand family, which is what encodes
/// a uniformly discrete subset.
pub fn psc_verdict(decision: &Verdict, ahat: i64) -> Result<PscVerdict> {
    if !decision.demand_family.is_all_positive() {
        return Err(Error::InvalidParameter(format!(
            "demand family {} has mixed signs; the curvature verdict needs an all-positive unit family",
            decision.demand_family
        )));
    }
    if ahat == 0 {
        return Ok(PscVerdict::AdmitsUpscBySurgery);
    }
    Ok(match &decision.decision {
        Decision::Vanishes { .. } => PscVerdict::AdmitsUpsc,
        Decision::Obstructed { .. } => PscVerdict::NoNonnegativeScalarCurvature,
        Decision::Undetermined { .. } => PscVerdict::Undetermined,
    })
}
