//! Qubit connectivity graphs: the IBM heavy-hexagon devices, the 10-site
//! translation cell of the infinite lattice, and small test fixtures.
//!
//! Heavy-hex layouts are generated row by row. A layout has `main_rows`
//! rows of `cols` qubits joined by connector rows; connector qubits sit
//! every fourth column, with the column offset alternating between 0 and 2
//! on successive connector rows. Every vertex carries a `(y, x)` coordinate
//! (main rows at even `y`, connector rows at odd `y`) and labels are
//! assigned in row-major coordinate order, left to right and top to bottom,
//! starting at 0.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};

/// Simple, connected, undirected graph with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Validates and builds a graph. Edges may be given in either
    /// orientation; they are stored as `(min, max)` pairs, sorted.
    pub fn new(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if num_vertices == 0 {
            return invalid("graph needs at least one vertex");
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= num_vertices || v >= num_vertices {
                return invalid(format!("edge ({u}, {v}) out of range for {num_vertices} vertices"));
            }
            if u == v {
                return invalid(format!("self-loop at vertex {u}"));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return invalid(format!("duplicate edge ({u}, {v})"));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); num_vertices];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        adjacency.iter_mut().for_each(|n| n.sort_unstable());
        let g = Self { num_vertices, edges, adjacency };
        if !g.is_connected() {
            return invalid("graph is not connected");
        }
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(min, max)` pairs in ascending order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Position of the edge `{u, v}` in [`Graph::edges`].
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_vertices];
        let mut queue = VecDeque::from([source]);
        dist[source] = 0;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(|&d| d != usize::MAX)
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.num_vertices
    }

    pub fn eccentricity(&self, v: usize) -> usize {
        self.bfs_distances(v).into_iter().max().unwrap_or(0)
    }

    pub fn diameter(&self) -> usize {
        (0..self.num_vertices).map(|v| self.eccentricity(v)).max().unwrap_or(0)
    }

    /// Length of the shortest cycle, or `None` for a tree.
    pub fn girth(&self) -> Option<usize> {
        let mut best = usize::MAX;
        for s in 0..self.num_vertices {
            let mut dist = vec![usize::MAX; self.num_vertices];
            let mut parent = vec![usize::MAX; self.num_vertices];
            let mut queue = VecDeque::from([s]);
            dist[s] = 0;
            while let Some(u) = queue.pop_front() {
                if 2 * dist[u] + 1 >= best {
                    break;
                }
                for &w in &self.adjacency[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    } else if parent[u] != w {
                        best = best.min(dist[u] + dist[w] + 1);
                    }
                }
            }
        }
        (best != usize::MAX).then_some(best)
    }

    pub fn is_bipartite(&self) -> bool {
        let dist = self.bfs_distances(0);
        self.edges.iter().all(|&(u, v)| dist[u] % 2 != dist[v] % 2)
    }

    /// Induced subgraph on `keep` (relabelled in the given order). Fails if
    /// the result is disconnected.
    pub fn induced(&self, keep: &[usize]) -> Result<Graph> {
        let mut relabel = vec![usize::MAX; self.num_vertices];
        for (new, &old) in keep.iter().enumerate() {
            relabel[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| relabel[u] != usize::MAX && relabel[v] != usize::MAX)
            .map(|&(u, v)| (relabel[u], relabel[v]));
        Graph::new(keep.len(), edges)
    }

    /// Text export: `m <count>` header, then one sorted `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("m {}\n", self.num_vertices);
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Graph> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::InvalidArgument("empty edge list".into()))?;
        let m = header
            .strip_prefix("m ")
            .and_then(|s| s.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::InvalidArgument(format!("bad edge-list header {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                _ => return invalid(format!("bad edge line {line:?}")),
            }
        }
        Graph::new(m, edges)
    }

    /// SHA-256 of the edge-list export, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_edge_list().as_bytes()))
    }
}

/// Largest radius `r` such that the ball of radius `r` around `v` induces a
/// cycle-free subgraph. On a tree this is the eccentricity of `v`.
pub fn local_tree_radius(g: &Graph, v: usize) -> usize {
    let dist = g.bfs_distances(v);
    let ecc = dist.iter().copied().max().unwrap_or(0);
    for r in 1..=ecc {
        let vertices = dist.iter().filter(|&&d| d <= r).count();
        let edges = g.edges().iter().filter(|&&(a, b)| dist[a] <= r && dist[b] <= r).count();
        // a ball is connected, so it is a tree iff |E| = |V| - 1
        if edges >= vertices {
            return r - 1;
        }
    }
    ecc
}

/// Parameters of a rectangular heavy-hex layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeavyHexLayout {
    pub main_rows: usize,
    pub cols: usize,
    /// Drop the last qubit of the first row and the first qubit of the last
    /// row (they would otherwise hang off with degree 1).
    pub trim_corners: bool,
}

/// A graph with a planar coordinate `(y, x)` for every vertex.
#[derive(Clone, Debug)]
pub struct EmbeddedGraph {
    pub graph: Graph,
    pub coords: Vec<(usize, usize)>,
}

impl HeavyHexLayout {
    fn connector_offset(row: usize) -> usize {
        if row.is_multiple_of(2) { 0 } else { 2 }
    }

    pub fn build(&self) -> EmbeddedGraph {
        let (rows, cols) = (self.main_rows, self.cols);
        let has_main = |r: usize, x: usize| {
            x < cols && !(self.trim_corners && ((r == 0 && x == cols - 1) || (r == rows - 1 && x == 0)))
        };
        let mut sites = BTreeSet::new();
        for r in 0..rows {
            sites.extend((0..cols).filter(|&x| has_main(r, x)).map(|x| (2 * r, x)));
        }
        for r in 0..rows.saturating_sub(1) {
            let xs = (Self::connector_offset(r)..cols).step_by(4);
            sites.extend(xs.filter(|&x| has_main(r, x) && has_main(r + 1, x)).map(|x| (2 * r + 1, x)));
        }
        let coords: Vec<(usize, usize)> = sites.iter().copied().collect();
        let label = |c: (usize, usize)| coords.binary_search(&c).ok();

        let mut edges = Vec::new();
        for (i, &(y, x)) in coords.iter().enumerate() {
            if y % 2 == 0 {
                if let Some(j) = label((y, x + 1)) {
                    edges.push((i, j));
                }
            } else {
                edges.push((label((y - 1, x)).expect("connector above"), i));
                edges.push((i, label((y + 1, x)).expect("connector below")));
            }
        }
        let graph = Graph::new(coords.len(), edges).expect("heavy-hex layout is a valid graph");
        EmbeddedGraph { graph, coords }
    }
}

/// IBM heavy-hex processors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Device {
    Eagle127,
    Osprey433,
    Condor1121,
}

impl Device {
    pub const ALL: [Device; 3] = [Device::Eagle127, Device::Osprey433, Device::Condor1121];

    pub fn layout(self) -> HeavyHexLayout {
        let (main_rows, cols) = match self {
            Device::Eagle127 => (7, 15),
            Device::Osprey433 => (13, 27),
            Device::Condor1121 => (21, 43),
        };
        HeavyHexLayout { main_rows, cols, trim_corners: true }
    }

    pub fn num_qubits(self) -> usize {
        match self {
            Device::Eagle127 => 127,
            Device::Osprey433 => 433,
            Device::Condor1121 => 1121,
        }
    }
}

pub fn build_heavy_hex(device: Device) -> Graph {
    device.layout().build().graph
}

/// An edge of the unit cell whose far endpoint `b` lives in the cell
/// translated by `shift = (dx, dy)` cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterCellEdge {
    pub a: usize,
    pub b: usize,
    pub shift: (i32, i32),
}

/// Translation cell of the infinite heavy-hex lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitCellGraph {
    cell_size: usize,
    intra_edges: Vec<(usize, usize)>,
    inter_edges: Vec<InterCellEdge>,
    /// `(y, x)` of every site inside its cell.
    offsets: Vec<(usize, usize)>,
}

/// Cell period in coordinate units: two main rows (plus their connector
/// rows) tall, four columns wide.
const CELL_HEIGHT: usize = 4;
const CELL_WIDTH: usize = 4;

/// The 10-site cell: two main-row segments of four qubits and one connector
/// below each, labelled row-major inside the cell.
pub fn build_unit_cell() -> UnitCellGraph {
    let offsets = vec![
        (0, 0), (0, 1), (0, 2), (0, 3),
        (1, 0),
        (2, 0), (2, 1), (2, 2), (2, 3),
        (3, 2),
    ];
    let intra_edges = vec![(0, 1), (1, 2), (2, 3), (0, 4), (4, 5), (5, 6), (6, 7), (7, 8), (7, 9)];
    let inter_edges = vec![
        InterCellEdge { a: 3, b: 0, shift: (1, 0) },
        InterCellEdge { a: 8, b: 5, shift: (1, 0) },
        InterCellEdge { a: 9, b: 2, shift: (0, 1) },
    ];
    UnitCellGraph { cell_size: offsets.len(), intra_edges, inter_edges, offsets }
}

impl UnitCellGraph {
    pub fn cell_size(&self) -> usize {
        self.cell_size
    }

    pub fn intra_edges(&self) -> &[(usize, usize)] {
        &self.intra_edges
    }

    pub fn inter_edges(&self) -> &[InterCellEdge] {
        &self.inter_edges
    }

    /// Every edge class of the translation-invariant lattice, folded into the
    /// cell. Simple update on the infinite lattice runs on this graph.
    pub fn quotient_graph(&self) -> Graph {
        let edges = self
            .intra_edges
            .iter()
            .copied()
            .chain(self.inter_edges.iter().map(|e| (e.a, e.b)));
        Graph::new(self.cell_size, edges).expect("unit cell folds to a simple graph")
    }

    /// Open-boundary block of `nx × ny` cells. Inter-cell edges leaving the
    /// block are dropped.
    pub fn tile(&self, nx: usize, ny: usize) -> EmbeddedGraph {
        let n = self.cell_size;
        let id = |cx: usize, cy: usize, s: usize| (cy * nx + cx) * n + s;
        let mut edges = Vec::new();
        let mut coords = vec![(0, 0); nx * ny * n];
        for cy in 0..ny {
            for cx in 0..nx {
                for (s, &(oy, ox)) in self.offsets.iter().enumerate() {
                    coords[id(cx, cy, s)] = (CELL_HEIGHT * cy + oy, CELL_WIDTH * cx + ox);
                }
                edges.extend(self.intra_edges.iter().map(|&(a, b)| (id(cx, cy, a), id(cx, cy, b))));
                for e in &self.inter_edges {
                    let tx = cx as i64 + e.shift.0 as i64;
                    let ty = cy as i64 + e.shift.1 as i64;
                    if (0..nx as i64).contains(&tx) && (0..ny as i64).contains(&ty) {
                        edges.push((id(cx, cy, e.a), id(tx as usize, ty as usize, e.b)));
                    }
                }
            }
        }
        let graph = Graph::new(coords.len(), edges).expect("tiled block is a valid graph");
        EmbeddedGraph { graph, coords }
    }
}

/// Small graphs with exact statevector references.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fixture {
    Path8,
    Tree10,
    Ring12Hex,
    Patch20,
}

impl Fixture {
    pub const ALL: [Fixture; 4] = [Fixture::Path8, Fixture::Tree10, Fixture::Ring12Hex, Fixture::Patch20];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::Path8 => "path8",
            Fixture::Tree10 => "tree10",
            Fixture::Ring12Hex => "ring12hex",
            Fixture::Patch20 => "patch20",
        }
    }

    pub fn graph(self) -> Graph {
        let edges: Vec<(usize, usize)> = match self {
            Fixture::Path8 => (0..7).map(|i| (i, i + 1)).collect(),
            // junction-bridge tree, max degree 3
            Fixture::Tree10 => vec![(0, 1), (0, 2), (0, 3), (1, 4), (4, 5), (4, 6), (2, 7), (7, 8), (3, 9)],
            Fixture::Ring12Hex => (0..12).map(|i| (i, (i + 1) % 12)).collect(),
            // one heavy-hex ring, a bridge hanging off each junction (even
            // ring sites) and two of those extended by a further qubit
            Fixture::Patch20 => (0..12)
                .map(|i| (i, (i + 1) % 12))
                .chain((0..6).map(|k| (2 * k, 12 + k)))
                .chain([(12, 18), (14, 19)])
                .collect(),
        };
        let n = edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0) + 1;
        Graph::new(n, edges).expect("fixture graphs are valid")
    }
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Fixture::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown fixture {s:?}")))
    }
}

/// Which lattice a simulation runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemSize {
    Device(Device),
    Infinite,
    Fixture(Fixture),
}

impl SystemSize {
    pub const EAGLE: SystemSize = SystemSize::Device(Device::Eagle127);

    /// The graph simple update runs on (the folded cell for `Infinite`).
    pub fn graph(self) -> Graph {
        match self {
            SystemSize::Device(d) => build_heavy_hex(d),
            SystemSize::Infinite => build_unit_cell().quotient_graph(),
            SystemSize::Fixture(f) => f.graph(),
        }
    }
}

impl fmt::Display for SystemSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemSize::Device(Device::Eagle127) => f.write_str("eagle127"),
            SystemSize::Device(Device::Osprey433) => f.write_str("osprey433"),
            SystemSize::Device(Device::Condor1121) => f.write_str("condor1121"),
            SystemSize::Infinite => f.write_str("infinite"),
            SystemSize::Fixture(fx) => write!(f, "fixture:{}", fx.name()),
        }
    }
}

impl FromStr for SystemSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eagle127" => Ok(SystemSize::Device(Device::Eagle127)),
            "osprey433" => Ok(SystemSize::Device(Device::Osprey433)),
            "condor1121" => Ok(SystemSize::Device(Device::Condor1121)),
            "infinite" => Ok(SystemSize::Infinite),
            _ => match s.strip_prefix("fixture:") {
                Some(name) => Ok(SystemSize::Fixture(name.parse()?)),
                None => invalid(format!("unknown size {s:?}")),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device_counts() {
        assert_eq!(build_heavy_hex(Device::Eagle127).num_vertices(), 127);
        assert_eq!(build_heavy_hex(Device::Osprey433).num_vertices(), 433);
        assert_eq!(build_heavy_hex(Device::Condor1121).num_vertices(), 1121);
    }

    #[test]
    fn eagle_matches_device_numbering() {
        let g = build_heavy_hex(Device::Eagle127);
        // first connector row and the first qubits of the second row
        for (u, v) in [(0, 14), (14, 18), (4, 15), (15, 22), (12, 17), (17, 30), (20, 33), (33, 39), (96, 109), (109, 114)] {
            assert!(g.edge_index(u, v).is_some(), "missing edge {u}-{v}");
        }
        assert_eq!(g.neighbors(13), &[12]);
        assert_eq!(g.neighbors(126), &[112, 125]);
    }

    #[test]
    fn eagle_has_expected_degree_census() {
        let g = build_heavy_hex(Device::Eagle127);
        assert_eq!(g.num_edges(), 144);
        assert_eq!(g.max_degree(), 3);
        assert!((0..127).all(|v| g.degree(v) >= 1));
    }

    #[test]
    fn condor_girth_and_degree() {
        let g = build_heavy_hex(Device::Condor1121);
        assert_eq!(g.max_degree(), 3);
        assert_eq!(g.girth(), Some(12));
        assert!(g.is_bipartite());
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(build_heavy_hex(Device::Osprey433), build_heavy_hex(Device::Osprey433));
    }

    #[test]
    fn graph_rejects_bad_edges() {
        assert!(Graph::new(3, [(0, 0), (1, 2)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0), (1, 2)]).is_err());
        assert!(Graph::new(4, [(0, 1), (2, 3)]).is_err());
        assert!(Graph::new(2, [(0, 5)]).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Fixture::Patch20.graph();
        let text = g.to_edge_list();
        assert!(text.starts_with("m 20\n"));
        assert_eq!(Graph::from_edge_list(&text).unwrap(), g);
        assert!(Graph::from_edge_list("m x\n").is_err());
        assert!(Graph::from_edge_list("m 2\n0 1 2\n").is_err());
    }

    #[test]
    fn unit_cell_census() {
        let cell = build_unit_cell();
        assert_eq!(cell.cell_size(), 10);
        let q = cell.quotient_graph();
        assert_eq!(q.num_edges(), 12);
        let deg3 = (0..10).filter(|&v| q.degree(v) == 3).count();
        let deg2 = (0..10).filter(|&v| q.degree(v) == 2).count();
        assert_eq!((deg3, deg2), (4, 6));
        assert_eq!(q.degree(2), 3);
    }

    #[test]
    fn tiled_cell_has_girth_12() {
        let block = build_unit_cell().tile(6, 6);
        assert_eq!(block.graph.girth(), Some(12));
        assert_eq!(block.graph.max_degree(), 3);
    }

    /// Coordinate-labelled edge set, restricted to vertices above `max_y`.
    fn coord_edges(e: &EmbeddedGraph, max_y: usize) -> BTreeSet<((usize, usize), (usize, usize))> {
        e.graph
            .edges()
            .iter()
            .map(|&(u, v)| (e.coords[u], e.coords[v]))
            .filter(|(a, b)| a.0 < max_y && b.0 < max_y)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect()
    }

    #[test]
    fn tiled_cell_reproduces_device_bulk() {
        let block = build_unit_cell().tile(6, 6);
        // 12 main rows, 24 columns; the connector row hanging below the
        // block has no partner and is cut off
        let height = 4 * 6 - 1;
        let tiled = coord_edges(&block, height);
        let layout = HeavyHexLayout { main_rows: 12, cols: 24, trim_corners: false }.build();
        assert_eq!(tiled, coord_edges(&layout, height));

        // the same block sits inside Condor's top-left corner
        let condor = Device::Condor1121.layout().build();
        let corner: Vec<usize> = (0..condor.coords.len())
            .filter(|&i| condor.coords[i].0 < height && condor.coords[i].1 < 24)
            .collect();
        let sub = condor.graph.induced(&corner).unwrap();
        let sub = EmbeddedGraph { graph: sub, coords: corner.iter().map(|&i| condor.coords[i]).collect() };
        assert_eq!(coord_edges(&sub, height), tiled);
    }

    #[test]
    fn tree_radius_on_eagle_bulk() {
        let g = build_heavy_hex(Device::Eagle127);
        // junction at the centre of the chip, and its bridge neighbour
        assert_eq!(g.degree(62), 3);
        assert_eq!(local_tree_radius(&g, 62), 5);
        assert_eq!(local_tree_radius(&g, 61), 5);
    }

    #[test]
    fn tree_radius_on_fixtures() {
        let ring = Fixture::Ring12Hex.graph();
        assert!((0..12).all(|v| local_tree_radius(&ring, v) == 5));
        let tree = Fixture::Tree10.graph();
        for v in 0..10 {
            assert_eq!(local_tree_radius(&tree, v), tree.eccentricity(v));
        }
        let path = Fixture::Path8.graph();
        assert_eq!(local_tree_radius(&path, 0), 7);
    }

    #[test]
    fn fixtures_are_well_formed() {
        let sizes: Vec<usize> = Fixture::ALL.iter().map(|f| f.graph().num_vertices()).collect();
        assert_eq!(sizes, vec![8, 10, 12, 20]);
        assert!(Fixture::Tree10.graph().is_tree());
        assert_eq!(Fixture::Tree10.graph().max_degree(), 3);
        assert_eq!(Fixture::Patch20.graph().girth(), Some(12));
        assert_eq!(Fixture::Patch20.graph().max_degree(), 3);
    }

    #[test]
    fn size_tags_parse_and_print() {
        for tag in ["eagle127", "osprey433", "condor1121", "infinite", "fixture:path8", "fixture:patch20"] {
            assert_eq!(tag.parse::<SystemSize>().unwrap().to_string(), tag);
        }
        assert!("fixture:nope".parse::<SystemSize>().is_err());
        assert!("eagle".parse::<SystemSize>().is_err());
    }
}
