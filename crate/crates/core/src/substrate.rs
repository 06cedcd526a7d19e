//! Graphs the walker moves on.
//!
//! A [`Substrate`] is an undirected simple graph stored in compressed
//! adjacency form. Every vertex numbers its incident edges with ports
//! `0..degree`; the coined walk uses those ports to decide which edge a coin
//! state selects.
//!
//! Lines and lattices additionally tag each port with a direction slot
//! (`2 * axis` for the negative direction, `2 * axis + 1` for the positive
//! one). The coin of a lattice walk is indexed by direction slot, so a
//! boundary vertex still carries the full `2 * axes` coin.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use alloc::{format, string};

use rand::Rng;

use crate::error::{Result, WalkError};
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Periodic,
}

/// How the vertex set is laid out, which decides how positions are labelled.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// Cartesian lattice with row-major vertex indexing (a line is `dims = [n]`).
    Lattice { dims: Vec<usize> },
    /// Arbitrary graph; vertices are labelled by index.
    General,
}

/// Generator name plus the parameters that produced a substrate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Provenance {
    pub generator: String,
    pub params: Vec<(String, String)>,
}

impl Provenance {
    fn new(generator: &str) -> Self {
        Self {
            generator: generator.to_string(),
            params: Vec::new(),
        }
    }

    fn with(mut self, key: &str, value: impl string::ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PercolationMode {
    Bond,
    Site,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercolationSpec {
    pub mode: PercolationMode,
    pub p: f64,
    pub seed: u64,
}

impl PercolationSpec {
    pub fn new(mode: PercolationMode, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(WalkError::InvalidParameter(format!(
                "percolation probability {p} outside [0, 1]"
            )));
        }
        Ok(Self { mode, p, seed })
    }
}

/// Undirected simple graph with port numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct Substrate {
    offsets: Vec<usize>,
    neighbours: Vec<usize>,
    /// Port index of the same edge at the far endpoint.
    reverse: Vec<usize>,
    /// Direction slot of each port (lattice substrates only).
    directions: Option<Vec<u8>>,
    coin_slots: usize,
    geometry: Geometry,
    boundary: Boundary,
    provenance: Provenance,
}

/// Path (`Open`) or cycle (`Periodic`) on `n_sites` vertices.
///
/// Port 0 is the left neighbour and port 1 the right neighbour at every
/// interior vertex.
pub fn make_line(n_sites: usize, boundary: Boundary) -> Result<Substrate> {
    let mut s = make_lattice(&[n_sites], boundary)?;
    s.provenance = Provenance::new("line")
        .with("n_sites", n_sites)
        .with("boundary", boundary_name(boundary));
    Ok(s)
}

/// Cartesian lattice in one to three dimensions.
///
/// Vertices are indexed row-major over `dims` (the last axis varies
/// fastest) and ports are ordered `(-axis0, +axis0, -axis1, +axis1, ...)`,
/// skipping directions that have no neighbour.
pub fn make_lattice(dims: &[usize], boundary: Boundary) -> Result<Substrate> {
    if dims.is_empty() || dims.len() > 3 {
        return Err(WalkError::InvalidSize(format!(
            "lattice needs 1 to 3 axes, got {}",
            dims.len()
        )));
    }
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(WalkError::InvalidSize(format!("lattice axis of length {d}")));
    }
    if boundary == Boundary::Periodic {
        if let Some(&d) = dims.iter().find(|&&d| d < 3) {
            return Err(WalkError::InvalidSize(format!(
                "periodic axis of length {d} would duplicate its wrap-around edge"
            )));
        }
    }
    let n: usize = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| WalkError::InvalidSize("lattice vertex count overflows".into()))?;

    let axes = dims.len();
    // strides for row-major indexing
    let mut strides = vec![1usize; axes];
    for a in (0..axes.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * dims[a + 1];
    }

    let mut offsets = Vec::with_capacity(n + 1);
    let mut neighbours = Vec::with_capacity(n * 2 * axes);
    let mut directions = Vec::with_capacity(n * 2 * axes);
    offsets.push(0);
    for v in 0..n {
        for a in 0..axes {
            let coord = (v / strides[a]) % dims[a];
            let minus = if coord > 0 {
                Some(v - strides[a])
            } else if boundary == Boundary::Periodic {
                Some(v + (dims[a] - 1) * strides[a])
            } else {
                None
            };
            let plus = if coord + 1 < dims[a] {
                Some(v + strides[a])
            } else if boundary == Boundary::Periodic {
                Some(v - (dims[a] - 1) * strides[a])
            } else {
                None
            };
            if let Some(u) = minus {
                neighbours.push(u);
                directions.push((2 * a) as u8);
            }
            if let Some(u) = plus {
                neighbours.push(u);
                directions.push((2 * a + 1) as u8);
            }
        }
        offsets.push(neighbours.len());
    }

    let mut provenance = Provenance::new("lattice").with("boundary", boundary_name(boundary));
    for (a, d) in dims.iter().enumerate() {
        provenance = provenance.with(&format!("dim{a}"), d);
    }
    Ok(Substrate::assemble(
        offsets,
        neighbours,
        Some(directions),
        2 * axes,
        Geometry::Lattice {
            dims: dims.to_vec(),
        },
        boundary,
        provenance,
    ))
}

/// Graph from an edge list; ports follow ascending neighbour index.
pub fn from_adjacency(edges: &[(usize, usize)], n_vertices: usize) -> Result<Substrate> {
    if n_vertices == 0 {
        return Err(WalkError::InvalidSize("graph needs at least one vertex".into()));
    }
    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n_vertices];
    for &(u, v) in edges {
        for x in [u, v] {
            if x >= n_vertices {
                return Err(WalkError::OutOfRange {
                    index: x,
                    len: n_vertices,
                });
            }
        }
        if u == v {
            return Err(WalkError::InvalidEdge {
                u,
                v,
                reason: "self-loop",
            });
        }
        lists[u].push(v);
        lists[v].push(u);
    }
    let mut offsets = Vec::with_capacity(n_vertices + 1);
    let mut neighbours = Vec::with_capacity(2 * edges.len());
    offsets.push(0);
    for (u, list) in lists.iter_mut().enumerate() {
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            let (a, b) = if u < w[0] { (u, w[0]) } else { (w[0], u) };
            return Err(WalkError::InvalidEdge {
                u: a,
                v: b,
                reason: "duplicate edge",
            });
        }
        neighbours.extend_from_slice(list);
        offsets.push(neighbours.len());
    }
    let max_degree = lists.iter().map(Vec::len).max().unwrap_or(0);
    Ok(Substrate::assemble(
        offsets,
        neighbours,
        None,
        max_degree.max(1),
        Geometry::General,
        Boundary::Open,
        Provenance::new("adjacency")
            .with("n_vertices", n_vertices)
            .with("n_edges", edges.len()),
    ))
}

/// Random bond or site dilution of `base`.
///
/// Bond mode draws one uniform variate per edge in lexicographic edge order
/// and keeps the edge when the draw is below `p`. Site mode draws one
/// variate per vertex in index order; removed vertices stay in place with
/// degree zero. Surviving ports keep their relative order and the coin
/// width of the base substrate is kept.
pub fn percolate(base: &Substrate, spec: &PercolationSpec) -> Substrate {
    let mut rng = rng_from_seed(spec.seed);
    let n = base.n_vertices();
    let keep_edge: Vec<bool> = match spec.mode {
        PercolationMode::Bond => bond_decisions(base, spec.p, &mut rng),
        PercolationMode::Site => {
            let alive: Vec<bool> = (0..n).map(|_| rng.gen::<f64>() < spec.p).collect();
            (0..n)
                .flat_map(|u| {
                    let alive = &alive;
                    (base.offsets[u]..base.offsets[u + 1])
                        .map(move |port| alive[u] && alive[base.neighbours[port]])
                })
                .collect()
        }
    };

    let mut offsets = Vec::with_capacity(n + 1);
    let mut neighbours = Vec::new();
    let mut directions = base.directions.as_ref().map(|_| Vec::new());
    offsets.push(0);
    for u in 0..n {
        for port in base.offsets[u]..base.offsets[u + 1] {
            if keep_edge[port] {
                neighbours.push(base.neighbours[port]);
                if let (Some(out), Some(src)) = (directions.as_mut(), base.directions.as_ref()) {
                    out.push(src[port]);
                }
            }
        }
        offsets.push(neighbours.len());
    }
    let mode = match spec.mode {
        PercolationMode::Bond => "bond",
        PercolationMode::Site => "site",
    };
    let mut provenance = base.provenance.clone();
    provenance.params.push(("percolation".into(), mode.into()));
    provenance.params.push(("p".into(), spec.p.to_string()));
    provenance.params.push(("seed".into(), spec.seed.to_string()));
    Substrate::assemble(
        offsets,
        neighbours,
        directions,
        base.coin_slots,
        base.geometry.clone(),
        base.boundary,
        provenance,
    )
}

/// One draw per undirected edge in lexicographic `(u, v)` order, recorded
/// on both of the edge's ports.
fn bond_decisions(base: &Substrate, p: f64, rng: &mut impl Rng) -> Vec<bool> {
    let mut keep = vec![false; base.neighbours.len()];
    for u in 0..base.n_vertices() {
        let mut ports: Vec<usize> = (base.offsets[u]..base.offsets[u + 1])
            .filter(|&port| base.neighbours[port] > u)
            .collect();
        ports.sort_unstable_by_key(|&port| base.neighbours[port]);
        for port in ports {
            let v = base.neighbours[port];
            let kept = rng.gen::<f64>() < p;
            keep[port] = kept;
            keep[base.offsets[v] + base.reverse[port]] = kept;
        }
    }
    keep
}

fn boundary_name(b: Boundary) -> &'static str {
    match b {
        Boundary::Open => "open",
        Boundary::Periodic => "periodic",
    }
}

impl Substrate {
    fn assemble(
        offsets: Vec<usize>,
        neighbours: Vec<usize>,
        directions: Option<Vec<u8>>,
        coin_slots: usize,
        geometry: Geometry,
        boundary: Boundary,
        provenance: Provenance,
    ) -> Self {
        let n = offsets.len() - 1;
        let mut reverse = vec![0usize; neighbours.len()];
        for u in 0..n {
            for port in offsets[u]..offsets[u + 1] {
                let v = neighbours[port];
                let back = neighbours[offsets[v]..offsets[v + 1]]
                    .iter()
                    .position(|&w| w == u)
                    .expect("adjacency must be symmetric");
                reverse[port] = back;
            }
        }
        Self {
            offsets,
            neighbours,
            reverse,
            directions,
            coin_slots,
            geometry,
            boundary,
            provenance,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.neighbours.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n_vertices())
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    /// Neighbours of `v` in port order.
    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.neighbours[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Far endpoint of port `port` at `v`, and the port of that edge at the far end.
    pub fn port(&self, v: usize, port: usize) -> Option<(usize, usize)> {
        if port >= self.degree(v) {
            return None;
        }
        let idx = self.offsets[v] + port;
        Some((self.neighbours[idx], self.reverse[idx]))
    }

    /// Direction slot of each port at `v`, for lattice substrates.
    pub fn port_directions(&self, v: usize) -> Option<&[u8]> {
        self.directions
            .as_ref()
            .map(|d| &d[self.offsets[v]..self.offsets[v + 1]])
    }

    /// Neighbour reached from `v` through direction slot `slot`.
    pub fn neighbour_in_direction(&self, v: usize, slot: usize) -> Option<usize> {
        let dirs = self.port_directions(v)?;
        dirs.iter()
            .position(|&d| d as usize == slot)
            .map(|k| self.neighbours[self.offsets[v] + k])
    }

    /// `true` when ports carry lattice directions.
    pub fn is_directional(&self) -> bool {
        self.directions.is_some()
    }

    /// Coin dimension a coined walk on this substrate must use: `2 * axes`
    /// for lattices, the maximum degree (at least one) for general graphs.
    /// Percolation keeps the value of the base substrate.
    pub fn coin_slots(&self) -> usize {
        self.coin_slots
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Edges as `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = (0..self.n_vertices())
            .flat_map(|u| {
                self.neighbours(u)
                    .iter()
                    .filter(move |&&v| v > u)
                    .map(move |&v| (u, v))
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Same vertices, edges and port numbering, ignoring provenance and coin layout.
    pub fn same_graph(&self, other: &Substrate) -> bool {
        self.offsets == other.offsets && self.neighbours == other.neighbours
    }

    /// Labelling of vertices used by distributions derived from walks on
    /// this substrate, with lattice coordinates measured from `origin`.
    pub fn labels(&self, origin: usize) -> VertexLabels {
        match &self.geometry {
            Geometry::Lattice { dims } if dims.len() == 1 => VertexLabels::Line {
                len: dims[0],
                origin,
            },
            Geometry::Lattice { dims } => VertexLabels::Lattice {
                dims: dims.clone(),
                origin: lattice_coords(dims, origin),
            },
            Geometry::General => VertexLabels::Vertices {
                len: self.n_vertices(),
            },
        }
    }

    /// Checks symmetry, simplicity and port completeness.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vertices();
        for u in 0..n {
            let nbrs = self.neighbours(u);
            for (k, &v) in nbrs.iter().enumerate() {
                if v >= n {
                    return Err(WalkError::OutOfRange { index: v, len: n });
                }
                if v == u {
                    return Err(WalkError::InvalidEdge {
                        u,
                        v,
                        reason: "self-loop",
                    });
                }
                if nbrs[..k].contains(&v) {
                    return Err(WalkError::InvalidEdge {
                        u,
                        v,
                        reason: "duplicate edge",
                    });
                }
                match self.port(v, self.reverse[self.offsets[u] + k]) {
                    Some((w, back)) if w == u && back == k => {}
                    _ => {
                        return Err(WalkError::InvalidEdge {
                            u,
                            v,
                            reason: "asymmetric adjacency",
                        })
                    }
                }
            }
            if let Some(dirs) = self.port_directions(u) {
                if dirs.iter().any(|&d| d as usize >= self.coin_slots) {
                    return Err(WalkError::InvalidDimension(format!(
                        "direction slot beyond coin width at vertex {u}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Row-major coordinates of vertex `v` in a lattice of shape `dims`.
pub fn lattice_coords(dims: &[usize], mut v: usize) -> Vec<usize> {
    let mut coords = vec![0; dims.len()];
    for a in (0..dims.len()).rev() {
        coords[a] = v % dims[a];
        v /= dims[a];
    }
    coords
}

/// How the entries of a position distribution are named.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VertexLabels {
    /// Plain vertex indices `0..len`.
    Vertices { len: usize },
    /// Integer positions `index - origin` along a line.
    Line { len: usize, origin: usize },
    /// Lattice coordinates relative to the `origin` vertex.
    Lattice { dims: Vec<usize>, origin: Vec<usize> },
    /// Joint configurations of `walkers` walkers on `sites` vertices,
    /// first walker most significant.
    Configurations { sites: usize, walkers: usize },
}

impl VertexLabels {
    pub fn len(&self) -> usize {
        match self {
            VertexLabels::Vertices { len } | VertexLabels::Line { len, .. } => *len,
            VertexLabels::Lattice { dims, .. } => dims.iter().product(),
            VertexLabels::Configurations { sites, walkers } => sites.pow(*walkers as u32),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Integer coordinate of entry `i` when the labelling is one-dimensional.
    pub fn position(&self, i: usize) -> Option<i64> {
        match self {
            VertexLabels::Line { origin, .. } => Some(i as i64 - *origin as i64),
            _ => None,
        }
    }

    /// Text form of entry `i`; lattice coordinates and configurations are joined by `:`.
    pub fn label(&self, i: usize) -> String {
        match self {
            VertexLabels::Vertices { .. } => i.to_string(),
            VertexLabels::Line { origin, .. } => (i as i64 - *origin as i64).to_string(),
            VertexLabels::Lattice { dims, origin } => lattice_coords(dims, i)
                .iter()
                .zip(origin)
                .map(|(&c, &o)| (c as i64 - o as i64).to_string())
                .collect::<Vec<_>>()
                .join(":"),
            VertexLabels::Configurations { sites, walkers } => {
                let mut parts = vec![String::new(); *walkers];
                let mut rest = i;
                for w in (0..*walkers).rev() {
                    parts[w] = (rest % sites).to_string();
                    rest /= sites;
                }
                parts.join(":")
            }
        }
    }
}
