//! Finite windows of model coarse spaces.
//!
//! A [`Window`] is a ball of a chosen radius around a basepoint of a model
//! space, with the outermost shell marked as non-interior. Non-interior
//! vertices act as escape-to-infinity sinks for the flow solver: mass that
//! reaches them has left the window. All edges have unit length and the
//! metric is the graph metric in edge units; physical scale is a free
//! parameter recorded on the spec but never used in distances.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on window size; `build_window` refuses anything larger.
pub const DEFAULT_VERTEX_BUDGET: usize = 500_000;

/// Maximum degree accepted for custom graphs.
pub const MAX_CUSTOM_DEGREE: usize = 64;

fn default_edge_length() -> f64 {
    1.0
}

fn is_unit(x: &f64) -> bool {
    *x == 1.0
}

/// Description of a model space from which windows are cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    #[serde(flatten)]
    pub family: Family,
    /// Physical length of one edge. The graph metric is always in edge
    /// units; this is bookkeeping for interpreting results at scale.
    #[serde(default = "default_edge_length", skip_serializing_if = "is_unit")]
    pub edge_length_unit: f64,
}

/// The model-space families.
///
/// Custom graphs list explicit vertices and edges; `volumes`, when present,
/// is parallel to `vertices`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Lattice {
        n: u32,
    },
    Tree {
        k: u32,
    },
    Product {
        a: Box<SpaceSpec>,
        b: Box<SpaceSpec>,
    },
    Custom {
        vertices: Vec<u32>,
        edges: Vec<(u32, u32)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        volumes: Option<Vec<f64>>,
    },
}

impl SpaceSpec {
    pub fn lattice(n: u32) -> Self {
        Self {
            family: Family::Lattice { n },
            edge_length_unit: 1.0,
        }
    }

    pub fn tree(k: u32) -> Self {
        Self {
            family: Family::Tree { k },
            edge_length_unit: 1.0,
        }
    }

    pub fn product(a: SpaceSpec, b: SpaceSpec) -> Self {
        Self {
            family: Family::Product {
                a: Box::new(a),
                b: Box::new(b),
            },
            edge_length_unit: 1.0,
        }
    }

    pub fn custom(vertices: Vec<u32>, edges: Vec<(u32, u32)>, volumes: Option<Vec<f64>>) -> Self {
        Self {
            family: Family::Custom {
                vertices,
                edges,
                volumes,
            },
            edge_length_unit: 1.0,
        }
    }

    /// Checks the documented parameter ranges: lattice dimension in [1, 4],
    /// tree branching in [2, 6], custom graphs connected with degree <= 64.
    pub fn validate(&self) -> Result<()> {
        if !(self.edge_length_unit > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "edge_length_unit must be positive, got {}",
                self.edge_length_unit
            )));
        }
        match &self.family {
            Family::Lattice { n } => {
                if !(1..=4).contains(n) {
                    return Err(Error::InvalidSpec(format!(
                        "lattice dimension must be in [1, 4], got {n}"
                    )));
                }
            }
            Family::Tree { k } => {
                if !(2..=6).contains(k) {
                    return Err(Error::InvalidSpec(format!(
                        "tree branching must be in [2, 6], got {k}"
                    )));
                }
            }
            Family::Product { a, b } => {
                a.validate()?;
                b.validate()?;
            }
            Family::Custom {
                vertices,
                edges,
                volumes,
            } => {
                validate_custom(vertices, edges, volumes.as_deref())?;
            }
        }
        Ok(())
    }

    /// Short human-readable tag, used in report descriptors.
    pub fn label(&self) -> String {
        match &self.family {
            Family::Lattice { n } => format!("lattice({n})"),
            Family::Tree { k } => format!("tree({k})"),
            Family::Product { a, b } => format!("product({}, {})", a.label(), b.label()),
            Family::Custom { vertices, .. } => format!("custom({} vertices)", vertices.len()),
        }
    }
}

fn validate_custom(vertices: &[u32], edges: &[(u32, u32)], volumes: Option<&[f64]>) -> Result<()> {
    if vertices.is_empty() {
        return Err(Error::InvalidSpec("custom graph has no vertices".into()));
    }
    let mut seen = BTreeSet::new();
    for &v in vertices {
        if !seen.insert(v) {
            return Err(Error::InvalidSpec(format!("duplicate vertex id {v}")));
        }
    }
    let index: HashMap<u32, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut degree = vec![0usize; vertices.len()];
    let mut adj = vec![Vec::new(); vertices.len()];
    let mut edge_set = BTreeSet::new();
    for &(u, v) in edges {
        let (iu, iv) = match (index.get(&u), index.get(&v)) {
            (Some(&iu), Some(&iv)) => (iu, iv),
            _ => {
                return Err(Error::InvalidSpec(format!(
                    "edge ({u}, {v}) references an unknown vertex"
                )))
            }
        };
        if iu == iv {
            return Err(Error::InvalidSpec(format!("self-loop at vertex {u}")));
        }
        let key = (iu.min(iv), iu.max(iv));
        if !edge_set.insert(key) {
            continue; // duplicate edge: tolerated, counted once
        }
        degree[iu] += 1;
        degree[iv] += 1;
        adj[iu].push(iv);
        adj[iv].push(iu);
    }
    if let Some(d) = degree.iter().position(|&d| d > MAX_CUSTOM_DEGREE) {
        return Err(Error::InvalidSpec(format!(
            "vertex {} has degree {} > {MAX_CUSTOM_DEGREE}",
            vertices[d], degree[d]
        )));
    }
    if let Some(vols) = volumes {
        if vols.len() != vertices.len() {
            return Err(Error::InvalidSpec(format!(
                "volumes has length {}, expected {}",
                vols.len(),
                vertices.len()
            )));
        }
        if let Some(i) = vols.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::InvalidSpec(format!(
                "volume of vertex {} must be positive, got {}",
                vertices[i], vols[i]
            )));
        }
    }
    // connectivity over the whole graph
    let mut visited = vec![false; vertices.len()];
    let mut queue = VecDeque::from([0usize]);
    visited[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !visited[v] {
                visited[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    if count != vertices.len() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

/// A subset of a window's vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Region(BTreeSet<u32>);

impl Region {
    pub fn new() -> Self {
        Region(BTreeSet::new())
    }

    pub fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        Region(iter.into_iter().collect())
    }

    pub fn contains(&self, v: u32) -> bool {
        self.0.contains(&v)
    }

    pub fn insert(&mut self, v: u32) -> bool {
        self.0.insert(v)
    }

    pub fn remove(&mut self, v: u32) -> bool {
        self.0.remove(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Total volume of the region in a window.
    pub fn volume(&self, w: &Window) -> f64 {
        self.iter().map(|v| w.volume(v)).sum()
    }
}

impl FromIterator<u32> for Region {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        Region(iter.into_iter().collect())
    }
}

/// A finite piece of a model space.
///
/// Vertices are indexed `0..len()`. The `coords` of a vertex are its
/// integer coordinates in the model space: lattice coordinates, `[depth]`
/// for trees, the concatenation for products, `[input id]` for custom
/// graphs. Coordinates drive deterministic demand families and let tests
/// identify the same model point across windows of different radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WindowData", into = "WindowData")]
pub struct Window {
    id: u64,
    coords: Vec<Vec<i64>>,
    edges: Vec<(u32, u32)>,
    interior: Vec<bool>,
    volumes: Vec<f64>,
    basepoint: u32,
    radius: u32,
    #[serde(skip)]
    adjacency: Vec<Vec<u32>>,
}

/// Serialized form of a window. Adjacency is rebuilt on load.
#[derive(Serialize, Deserialize)]
struct WindowData {
    id: u64,
    vertices: Vec<u32>,
    coords: Vec<Vec<i64>>,
    edges: Vec<(u32, u32)>,
    interior: Vec<bool>,
    volumes: Vec<f64>,
    basepoint: u32,
    radius: u32,
}

impl From<Window> for WindowData {
    fn from(w: Window) -> Self {
        WindowData {
            id: w.id,
            vertices: (0..w.len() as u32).collect(),
            coords: w.coords,
            edges: w.edges,
            interior: w.interior,
            volumes: w.volumes,
            basepoint: w.basepoint,
            radius: w.radius,
        }
    }
}

impl TryFrom<WindowData> for Window {
    type Error = Error;

    fn try_from(d: WindowData) -> Result<Self> {
        let n = d.vertices.len();
        if d.coords.len() != n || d.interior.len() != n || d.volumes.len() != n {
            return Err(Error::InvalidSpec(
                "window fields have inconsistent lengths".into(),
            ));
        }
        let mut w = Window {
            id: 0,
            coords: d.coords,
            edges: d.edges,
            interior: d.interior,
            volumes: d.volumes,
            basepoint: d.basepoint,
            radius: d.radius,
            adjacency: Vec::new(),
        };
        w.rebuild_adjacency()?;
        w.id = w.fingerprint();
        if d.id != 0 && d.id != w.id {
            return Err(Error::InvalidSpec(format!(
                "window id {:#018x} does not match its contents ({:#018x})",
                d.id, w.id
            )));
        }
        Ok(w)
    }
}

impl Window {
    fn rebuild_adjacency(&mut self) -> Result<()> {
        let n = self.coords.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::UnknownVertex(u.max(v)));
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        self.adjacency = adjacency;
        Ok(())
    }

    /// FNV-1a over the full structure; stable across runs and platforms.
    fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(&(self.coords.len() as u64).to_le_bytes());
        for c in &self.coords {
            eat(&(c.len() as u64).to_le_bytes());
            for &x in c {
                eat(&x.to_le_bytes());
            }
        }
        for &(u, v) in &self.edges {
            eat(&u.to_le_bytes());
            eat(&v.to_le_bytes());
        }
        for &b in &self.interior {
            eat(&[b as u8]);
        }
        for &v in &self.volumes {
            eat(&v.to_bits().to_le_bytes());
        }
        eat(&self.basepoint.to_le_bytes());
        eat(&self.radius.to_le_bytes());
        h
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn basepoint(&self) -> u32 {
        self.basepoint
    }

    pub fn coords(&self, v: u32) -> &[i64] {
        &self.coords[v as usize]
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn is_interior(&self, v: u32) -> bool {
        self.interior[v as usize]
    }

    pub fn volume(&self, v: u32) -> f64 {
        self.volumes[v as usize]
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len() as u32).filter(|&v| self.is_interior(v))
    }

    pub fn sink_vertices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len() as u32).filter(|&v| !self.is_interior(v))
    }

    pub fn interior_count(&self) -> usize {
        self.interior.iter().filter(|&&b| b).count()
    }

    pub fn check_vertex(&self, v: u32) -> Result<()> {
        if (v as usize) < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// BFS distances from `source` to every vertex, in edge units.
    pub fn distances_from(&self, source: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        dist[source as usize] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in self.neighbors(u) {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Graph distance between two vertices.
    pub fn distance(&self, u: u32, v: u32) -> u32 {
        if u == v {
            return 0;
        }
        // single-pair BFS with early exit
        let mut dist = vec![u32::MAX; self.len()];
        dist[u as usize] = 0;
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x as usize];
            for &y in self.neighbors(x) {
                if dist[y as usize] == u32::MAX {
                    if y == v {
                        return dx + 1;
                    }
                    dist[y as usize] = dx + 1;
                    queue.push_back(y);
                }
            }
        }
        u32::MAX
    }

    /// Multi-source BFS distances to the nearest member of `sources`.
    pub fn distances_to_set(&self, sources: impl IntoIterator<Item = u32>) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        let mut queue = VecDeque::new();
        for s in sources {
            if dist[s as usize] == u32::MAX {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in self.neighbors(u) {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// All unordered vertex pairs at graph distance between 1 and `reach`,
    /// each listed once with the smaller id first, sorted.
    pub fn reach_pairs(&self, reach: u32) -> Vec<(u32, u32)> {
        let mut pairs = Vec::new();
        for u in 0..self.len() as u32 {
            // truncated BFS of depth `reach`
            let mut dist = vec![u32::MAX; self.len()];
            dist[u as usize] = 0;
            let mut queue = VecDeque::from([u]);
            while let Some(x) = queue.pop_front() {
                let dx = dist[x as usize];
                if dx == reach {
                    continue;
                }
                for &y in self.neighbors(x) {
                    if dist[y as usize] == u32::MAX {
                        dist[y as usize] = dx + 1;
                        if y > u {
                            pairs.push((u, y));
                        }
                        queue.push_back(y);
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }
}

/// Options for window construction.
#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub vertex_budget: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            vertex_budget: DEFAULT_VERTEX_BUDGET,
        }
    }
}

/// Builds the ball of the given radius about the family basepoint, with the
/// outermost shell marked non-interior (the escape sink). Radius 0 yields
/// the degenerate single-vertex window whose one vertex is interior.
///
/// Ordering is deterministic: lexicographic coordinates for lattices and
/// products, BFS order for trees, ascending input id for custom graphs.
pub fn build_window(spec: &SpaceSpec, radius: u32) -> Result<Window> {
    build_window_with(spec, radius, &BuildOptions::default())
}

pub fn build_window_with(spec: &SpaceSpec, radius: u32, opts: &BuildOptions) -> Result<Window> {
    spec.validate()?;
    let (coords, edges, volumes, basepoint, dist) = match &spec.family {
        Family::Lattice { n } => lattice_ball(*n as usize, radius, opts)?,
        Family::Tree { k } => tree_ball(*k, radius, opts)?,
        Family::Product { a, b } => product_ball(a, b, radius, opts)?,
        Family::Custom {
            vertices,
            edges,
            volumes,
        } => custom_ball(vertices, edges, volumes.as_deref(), radius, opts)?,
    };
    let n = coords.len();
    let interior: Vec<bool> = if radius == 0 {
        vec![true; n]
    } else {
        dist.iter().map(|&d| d < radius).collect()
    };
    let mut w = Window {
        id: 0,
        coords,
        edges,
        interior,
        volumes,
        basepoint,
        radius,
        adjacency: Vec::new(),
    };
    w.rebuild_adjacency()?;
    w.id = w.fingerprint();
    debug_assert!(w.interior_count() > 0, "window interior must be nonempty");
    Ok(w)
}

type Raw = (Vec<Vec<i64>>, Vec<(u32, u32)>, Vec<f64>, u32, Vec<u32>);

fn budget_check(count: usize, opts: &BuildOptions) -> Result<()> {
    if count > opts.vertex_budget {
        Err(Error::BudgetExceeded {
            budget: opts.vertex_budget,
            attempted: count,
        })
    } else {
        Ok(())
    }
}

/// Points of the integer lattice with l1 norm <= radius, in lexicographic
/// order. The graph ball under nearest-neighbour adjacency is exactly the
/// l1 ball.
fn lattice_ball(n: usize, radius: u32, opts: &BuildOptions) -> Result<Raw> {
    let r = radius as i64;
    let mut coords: Vec<Vec<i64>> = Vec::new();
    let mut cur = vec![-r; n];
    // lexicographic enumeration with l1 pruning
    'outer: loop {
        let norm: i64 = cur.iter().map(|x| x.abs()).sum();
        if norm <= r {
            coords.push(cur.clone());
            budget_check(coords.len(), opts)?;
        }
        for d in (0..n).rev() {
            if cur[d] < r {
                cur[d] += 1;
                for c in cur.iter_mut().skip(d + 1) {
                    *c = -r;
                }
                continue 'outer;
            }
        }
        break;
    }
    let index: HashMap<&[i64], u32> = coords
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_slice(), i as u32))
        .collect();
    let mut edges = Vec::new();
    for (i, c) in coords.iter().enumerate() {
        for d in 0..n {
            let mut nb = c.clone();
            nb[d] += 1;
            if let Some(&j) = index.get(nb.as_slice()) {
                edges.push((i as u32, j));
            }
        }
    }
    edges.iter_mut().for_each(|e| {
        if e.0 > e.1 {
            *e = (e.1, e.0);
        }
    });
    edges.sort_unstable();
    let basepoint = index[vec![0i64; n].as_slice()];
    let dist: Vec<u32> = coords
        .iter()
        .map(|c| c.iter().map(|x| x.unsigned_abs() as u32).sum())
        .collect();
    let volumes = vec![1.0; coords.len()];
    Ok((coords, edges, volumes, basepoint, dist))
}

/// Regular tree of degree k: the root has k children, every other vertex
/// k - 1, out to the given depth. BFS order.
fn tree_ball(k: u32, radius: u32, opts: &BuildOptions) -> Result<Raw> {
    let mut coords: Vec<Vec<i64>> = vec![vec![0]];
    let mut edges = Vec::new();
    let mut dist = vec![0u32];
    let mut level: Vec<u32> = vec![0];
    for depth in 1..=radius {
        let mut next = Vec::new();
        for &parent in &level {
            let children = if depth == 1 { k } else { k - 1 };
            for _ in 0..children {
                let id = coords.len() as u32;
                budget_check(coords.len() + 1, opts)?;
                coords.push(vec![depth as i64]);
                dist.push(depth);
                edges.push((parent, id));
                next.push(id);
            }
        }
        level = next;
    }
    let volumes = vec![1.0; coords.len()];
    Ok((coords, edges, volumes, 0, dist))
}

/// Ball of the product space: pairs of component vertices whose distances
/// from the component basepoints sum to at most the radius. Ordered
/// lexicographically by the component pair (a first).
fn product_ball(a: &SpaceSpec, b: &SpaceSpec, radius: u32, opts: &BuildOptions) -> Result<Raw> {
    let wa = build_window_with(a, radius, opts)?;
    let wb = build_window_with(b, radius, opts)?;
    let da = wa.distances_from(wa.basepoint());
    let db = wb.distances_from(wb.basepoint());
    let mut coords = Vec::new();
    let mut dist = Vec::new();
    let mut volumes = Vec::new();
    let mut index = HashMap::new();
    for ia in 0..wa.len() as u32 {
        for ib in 0..wb.len() as u32 {
            let d = da[ia as usize] + db[ib as usize];
            if d <= radius {
                budget_check(coords.len() + 1, opts)?;
                index.insert((ia, ib), coords.len() as u32);
                let mut c = wa.coords(ia).to_vec();
                c.extend_from_slice(wb.coords(ib));
                coords.push(c);
                dist.push(d);
                volumes.push(wa.volume(ia) * wb.volume(ib));
            }
        }
    }
    let mut edges = Vec::new();
    for (&(ia, ib), &i) in &index {
        for &ja in wa.neighbors(ia) {
            if let Some(&j) = index.get(&(ja, ib)) {
                if i < j {
                    edges.push((i, j));
                }
            }
        }
        for &jb in wb.neighbors(ib) {
            if let Some(&j) = index.get(&(ia, jb)) {
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let basepoint = index[&(wa.basepoint(), wb.basepoint())];
    Ok((coords, edges, volumes, basepoint, dist))
}

/// Ball of the custom graph about its smallest-id vertex. Window vertices
/// keep the ascending order of their input ids.
fn custom_ball(
    vertices: &[u32],
    edges_in: &[(u32, u32)],
    volumes_in: Option<&[f64]>,
    radius: u32,
    opts: &BuildOptions,
) -> Result<Raw> {
    let mut order: Vec<u32> = vertices.to_vec();
    order.sort_unstable();
    let full_index: HashMap<u32, usize> =
        order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let input_pos: HashMap<u32, usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let mut adj = vec![Vec::new(); order.len()];
    for &(u, v) in edges_in {
        let iu = full_index[&u];
        let iv = full_index[&v];
        if iu != iv {
            adj[iu].push(iv);
            adj[iv].push(iu);
        }
    }
    // BFS from the smallest id over the full graph
    let mut dist_full = vec![u32::MAX; order.len()];
    dist_full[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist_full[v] == u32::MAX {
                dist_full[v] = dist_full[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let keep: Vec<usize> = (0..order.len())
        .filter(|&i| dist_full[i] <= radius)
        .collect();
    budget_check(keep.len(), opts)?;
    let new_index: HashMap<usize, u32> = keep
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new as u32))
        .collect();
    let coords: Vec<Vec<i64>> = keep.iter().map(|&i| vec![order[i] as i64]).collect();
    let dist: Vec<u32> = keep.iter().map(|&i| dist_full[i]).collect();
    let volumes: Vec<f64> = keep
        .iter()
        .map(|&i| match volumes_in {
            Some(vols) => vols[input_pos[&order[i]]],
            None => 1.0,
        })
        .collect();
    let mut edges = Vec::new();
    for (new_u, &old_u) in keep.iter().enumerate() {
        for &old_v in &adj[old_u] {
            if let Some(&new_v) = new_index.get(&old_v) {
                if (new_u as u32) < new_v {
                    edges.push((new_u as u32, new_v));
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Ok((coords, edges, volumes, 0, dist))
}

/// All vertices of the window at graph distance at most `radius` from
/// `center`.
pub fn ball(w: &Window, center: u32, radius: u32) -> Result<Region> {
    w.check_vertex(center)?;
    let mut dist = vec![u32::MAX; w.len()];
    dist[center as usize] = 0;
    let mut queue = VecDeque::from([center]);
    let mut members = vec![center];
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        if du == radius {
            continue;
        }
        for &v in w.neighbors(u) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = du + 1;
                members.push(v);
                queue.push_back(v);
            }
        }
    }
    Ok(Region::from_iter(members))
}

/// The symmetric r-collar of a region: vertices within distance `r` of both
/// the region and its complement in the window.
pub fn r_boundary(w: &Window, region: &Region, r: u32) -> Result<Region> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    for v in region.iter() {
        w.check_vertex(v)?;
    }
    if region.len() == w.len() {
        return Err(Error::RegionCoversWindow);
    }
    if r == 0 {
        return Err(Error::InvalidParameter("collar radius must be >= 1".into()));
    }
    let dist_in = w.distances_to_set(region.iter());
    let complement = (0..w.len() as u32).filter(|&v| !region.contains(v));
    let dist_out = w.distances_to_set(complement);
    Ok(Region::from_iter((0..w.len() as u32).filter(|&v| {
        dist_in[v as usize] <= r && dist_out[v as usize] <= r
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lattice2_window(radius: u32) -> Window {
        build_window(&SpaceSpec::lattice(2), radius).unwrap()
    }

    #[test]
    fn lattice2_radius2_is_13_vertices_with_8_sinks() {
        // oracle: enumerate the l1 ball by hand
        let mut expected = 0;
        let mut shell = 0;
        for x in -2i64..=2 {
            for y in -2i64..=2 {
                if x.abs() + y.abs() <= 2 {
                    expected += 1;
                    if x.abs() + y.abs() == 2 {
                        shell += 1;
                    }
                }
            }
        }
        assert_eq!(expected, 13);
        assert_eq!(shell, 8);
        let w = lattice2_window(2);
        assert_eq!(w.len(), 13);
        assert_eq!(w.len() - w.interior_count(), 8);
        assert_eq!(w.coords(w.basepoint()), &[0, 0]);
    }

    #[test]
    fn tree3_radius0_is_single_interior_vertex() {
        let w = build_window(&SpaceSpec::tree(3), 0).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.interior_count(), 1);
        assert!(w.edges().is_empty());
    }

    #[test]
    fn lattice1_radius3_is_path_of_7_with_endpoint_sinks() {
        let w = build_window(&SpaceSpec::lattice(1), 3).unwrap();
        assert_eq!(w.len(), 7);
        assert_eq!(w.interior_count(), 5);
        let sinks: Vec<u32> = w.sink_vertices().collect();
        assert_eq!(sinks.len(), 2);
        for s in sinks {
            assert_eq!(w.neighbors(s).len(), 1);
        }
    }

    #[test]
    fn tree3_level_counts() {
        let w = build_window(&SpaceSpec::tree(3), 3).unwrap();
        // levels 1, 3, 6, 12
        assert_eq!(w.len(), 22);
        assert_eq!(w.interior_count(), 10);
        let b = ball(&w, 0, 2).unwrap();
        assert_eq!(b.len(), 10);
    }

    #[test]
    fn lattice2_ball_radius1_has_5_vertices() {
        let w = lattice2_window(3);
        let b = ball(&w, w.basepoint(), 1).unwrap();
        assert_eq!(b.len(), 5);
        let b0 = ball(&w, w.basepoint(), 0).unwrap();
        assert_eq!(b0.len(), 1);
        assert!(b0.contains(w.basepoint()));
    }

    #[test]
    fn ball_rejects_unknown_vertex() {
        let w = lattice2_window(2);
        assert!(matches!(
            ball(&w, w.len() as u32, 1),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn r_boundary_of_half_path() {
        let w = build_window(&SpaceSpec::lattice(1), 3).unwrap();
        // coords are -3..3 in lex order, so ids 0,1,2 are the left 3 vertices
        let left: Region = (0..3).collect();
        let collar = r_boundary(&w, &left, 1).unwrap();
        assert_eq!(collar.len(), 2);
        assert!(collar.contains(2) && collar.contains(3));
    }

    #[test]
    fn r_boundary_of_point_is_closed_star() {
        let w = lattice2_window(3);
        let c = w.basepoint();
        let region = Region::from_iter([c]);
        let collar = r_boundary(&w, &region, 1).unwrap();
        let mut expected: Vec<u32> = w.neighbors(c).to_vec();
        expected.push(c);
        assert_eq!(collar, Region::from_iter(expected));
    }

    #[test]
    fn r_boundary_matches_brute_force_distance_scan() {
        let w = lattice2_window(6);
        let region = ball(&w, w.basepoint(), 3).unwrap();
        let collar = r_boundary(&w, &region, 1).unwrap();
        // brute force: distance to region and complement via direct scans
        let mut expected = Vec::new();
        for v in 0..w.len() as u32 {
            let d_in = region.iter().map(|u| w.distance(v, u)).min().unwrap();
            let d_out = (0..w.len() as u32)
                .filter(|u| !region.contains(*u))
                .map(|u| w.distance(v, u))
                .min()
                .unwrap();
            if d_in <= 1 && d_out <= 1 {
                expected.push(v);
            }
        }
        assert_eq!(collar, Region::from_iter(expected.clone()));
        // on the l1 lattice this is the spheres of radius 3 and 4
        for v in expected {
            let d = w.distance(v, w.basepoint());
            assert!(d == 3 || d == 4);
        }
    }

    #[test]
    fn r_boundary_rejects_empty_and_full_regions() {
        let w = lattice2_window(2);
        assert!(matches!(
            r_boundary(&w, &Region::new(), 1),
            Err(Error::EmptyRegion)
        ));
        let all: Region = (0..w.len() as u32).collect();
        assert!(matches!(
            r_boundary(&w, &all, 1),
            Err(Error::RegionCoversWindow)
        ));
    }

    #[test]
    fn collar_is_monotone_in_r_and_symmetric_in_complement() {
        let w = lattice2_window(5);
        let region = ball(&w, w.basepoint(), 2).unwrap();
        let c1 = r_boundary(&w, &region, 1).unwrap();
        let c2 = r_boundary(&w, &region, 2).unwrap();
        assert!(c1.is_subset(&c2));
        let complement: Region = (0..w.len() as u32).filter(|&v| !region.contains(v)).collect();
        let c1c = r_boundary(&w, &complement, 1).unwrap();
        assert_eq!(c1, c1c);
    }

    #[test]
    fn balls_nest_and_grow() {
        let w = build_window(&SpaceSpec::tree(3), 4).unwrap();
        let mut prev = 0;
        let mut prev_ball = Region::new();
        for r in 0..4 {
            let b = ball(&w, 0, r).unwrap();
            assert!(b.len() >= prev);
            if r > 0 {
                assert!(prev_ball.is_subset(&b));
            }
            prev = b.len();
            prev_ball = b;
        }
    }

    #[test]
    fn windows_are_deterministic() {
        let a = build_window(&SpaceSpec::lattice(3), 3).unwrap();
        let b = build_window(&SpaceSpec::lattice(3), 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.id(), b.id());
        let c = build_window(&SpaceSpec::lattice(3), 4).unwrap();
        assert_ne!(a.id(), c.id());
    }

    #[test]
    fn product_of_lines_matches_plane() {
        let line = SpaceSpec::lattice(1);
        let prod = SpaceSpec::product(line.clone(), line);
        let wp = build_window(&prod, 3).unwrap();
        let wl = build_window(&SpaceSpec::lattice(2), 3).unwrap();
        assert_eq!(wp.len(), wl.len());
        assert_eq!(wp.interior_count(), wl.interior_count());
        assert_eq!(wp.edges().len(), wl.edges().len());
        // identical coordinate sets
        let mut pc: Vec<_> = (0..wp.len() as u32).map(|v| wp.coords(v).to_vec()).collect();
        let mut lc: Vec<_> = (0..wl.len() as u32).map(|v| wl.coords(v).to_vec()).collect();
        pc.sort();
        lc.sort();
        assert_eq!(pc, lc);
    }

    #[test]
    fn custom_graph_validation() {
        // triangle with a tail: 0-1, 1-2, 2-0, 2-3
        let spec = SpaceSpec::custom(vec![0, 1, 2, 3], vec![(0, 1), (1, 2), (2, 0), (2, 3)], None);
        let w = build_window(&spec, 2).unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(w.interior_count(), 3); // vertex 3 is at distance 2

        let disconnected = SpaceSpec::custom(vec![0, 1, 2], vec![(0, 1)], None);
        assert!(matches!(
            build_window(&disconnected, 1),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn budget_is_enforced() {
        let opts = BuildOptions { vertex_budget: 10 };
        assert!(matches!(
            build_window_with(&SpaceSpec::lattice(2), 3, &opts),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn window_json_round_trip() {
        let w = build_window(&SpaceSpec::tree(3), 3).unwrap();
        let json = serde_json::to_string(&w).unwrap();
        let back: Window = serde_json::from_str(&json).unwrap();
        assert_eq!(w, back);
        assert_eq!(w.id(), back.id());
    }

    #[test]
    fn spec_json_matches_documented_shape() {
        let spec = SpaceSpec::lattice(2);
        assert_eq!(
            serde_json::to_value(&spec).unwrap(),
            serde_json::json!({"family": "lattice", "n": 2})
        );
        let tree: SpaceSpec = serde_json::from_str(r#"{"family":"tree","k":3}"#).unwrap();
        assert_eq!(tree, SpaceSpec::tree(3));
        let prod: SpaceSpec = serde_json::from_str(
            r#"{"family":"product","a":{"family":"lattice","n":1},"b":{"family":"tree","k":3}}"#,
        )
        .unwrap();
        prod.validate().unwrap();
    }

    proptest! {
        #[test]
        fn distance_is_a_metric_on_samples(
            radius in 1u32..4,
            seed in 0u64..500,
        ) {
            let w = build_window(&SpaceSpec::lattice(2), radius).unwrap();
            let n = w.len() as u64;
            let a = (seed % n) as u32;
            let b = ((seed / n) % n) as u32;
            let c = ((seed / (n * n)).wrapping_add(seed) % n) as u32;
            prop_assert_eq!(w.distance(a, a), 0);
            prop_assert_eq!(w.distance(a, b), w.distance(b, a));
            prop_assert!(w.distance(a, c) <= w.distance(a, b) + w.distance(b, c));
        }

        #[test]
        fn ball_size_nondecreasing_in_radius(radius in 1u32..5, r1 in 0u32..4, r2 in 0u32..4) {
            let w = build_window(&SpaceSpec::lattice(2), radius).unwrap();
            let (lo, hi) = (r1.min(r2), r1.max(r2));
            let b_lo = ball(&w, w.basepoint(), lo).unwrap();
            let b_hi = ball(&w, w.basepoint(), hi).unwrap();
            prop_assert!(b_lo.is_subset(&b_hi));
        }
    }
}
