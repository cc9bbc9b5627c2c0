//! Graphs, graph lineages and the process matrices defined on them.
//!
//! Vertices of a product graph `G1 × G2` (either product) are flattened
//! row-major: vertex `(i, j)` has index `i * n2 + j`. The Kronecker identities
//! `A(G1 □ G2) = A(G1) ⊕ A(G2)` and `L(G1 □ G2) = L(G1) ⊕ L(G2)` hold exactly
//! under this convention.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Undirected, unweighted simple graph on vertices `0..n`.
///
/// Edges are stored as ordered pairs `(i, j)` with `i <= j`. A self-loop
/// `(0, 0)` only ever appears on [`Graph::lineage_root`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) are rejected, as are self-loops and out-of-range vertices.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("graph needs at least one vertex".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidSize(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            if a == b {
                return Err(Error::InvalidSize(format!("self-loop on vertex {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(Error::InvalidSize(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(Self { n, edges: set })
    }

    /// The one-vertex, one-self-loop graph that roots every lineage. Its
    /// Laplacian is `[[0]]` (the loop counts once in both A and D); it is not
    /// used in numerical experiments.
    pub fn lineage_root() -> Self {
        Self {
            n: 1,
            edges: BTreeSet::from([(0, 0)]),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(a, b) in &self.edges {
            if a == b {
                deg[a] += 1;
            } else {
                deg[a] += 1;
                deg[b] += 1;
            }
        }
        deg
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        adj
    }

    /// Symmetric {0,1} adjacency matrix.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }
}

/// Path graph `P_n` with edges `{i, i+1}`.
pub fn make_path(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidSize("path graph needs n >= 1".into()));
    }
    Graph::new(n, (1..n).map(|i| (i - 1, i)))
}

/// Cycle graph `C_n` with edges `{i, (i+1) mod n}`.
pub fn make_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidSize(format!("cycle graph needs n >= 3, got {n}")));
    }
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Cartesian (box) product. Vertex `(i, j)` maps to `i * n2 + j`.
pub fn box_product(g1: &Graph, g2: &Graph) -> Graph {
    let n2 = g2.n;
    let mut edges = BTreeSet::new();
    for i in 0..g1.n {
        for (a, b) in g2.edges().filter(|(a, b)| a != b) {
            edges.insert((i * n2 + a, i * n2 + b));
        }
    }
    for (a, b) in g1.edges().filter(|(a, b)| a != b) {
        for j in 0..n2 {
            edges.insert((a * n2 + j, b * n2 + j));
        }
    }
    Graph {
        n: g1.n * n2,
        edges,
    }
}

/// Tensor (cross) product: `(i1,j1) ~ (i2,j2)` iff `i1 ~ i2` and `j1 ~ j2`.
pub fn cross_product(g1: &Graph, g2: &Graph) -> Graph {
    let n2 = g2.n;
    let mut edges = BTreeSet::new();
    for (a, b) in g1.edges().filter(|(a, b)| a != b) {
        for (c, d) in g2.edges().filter(|(c, d)| c != d) {
            let (u1, v1) = (a * n2 + c, b * n2 + d);
            let (u2, v2) = (a * n2 + d, b * n2 + c);
            edges.insert((u1.min(v1), u1.max(v1)));
            edges.insert((u2.min(v2), u2.max(v2)));
        }
    }
    Graph {
        n: g1.n * n2,
        edges,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProcessKind {
    Laplacian,
    ManhattanDistance,
}

/// A dense `n × n` matrix describing a process on a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMatrix {
    pub kind: ProcessKind,
    pub data: DMatrix<f64>,
}

/// `L = A − D`. Negative semidefinite, zero row sums.
pub fn laplacian(g: &Graph) -> ProcessMatrix {
    let mut l = g.adjacency();
    for (i, d) in g.degrees().into_iter().enumerate() {
        l[(i, i)] -= d as f64;
    }
    ProcessMatrix {
        kind: ProcessKind::Laplacian,
        data: l,
    }
}

/// All-pairs shortest-path edge counts via one BFS per source vertex.
pub fn manhattan(g: &Graph) -> Result<ProcessMatrix> {
    let n = g.n;
    let adj = g.neighbors();
    let mut t = DMatrix::zeros(n, n);
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    for src in 0..n {
        dist.fill(usize::MAX);
        dist[src] = 0;
        queue.clear();
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (dst, &d) in dist.iter().enumerate() {
            if d == usize::MAX {
                return Err(Error::Disconnected(src, dst));
            }
            t[(src, dst)] = d as f64;
        }
    }
    Ok(ProcessMatrix {
        kind: ProcessKind::ManhattanDistance,
        data: t,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineageFamily {
    Path,
    Cycle,
    GridPeriodic,
    GridAperiodic,
    Custom,
}

impl LineageFamily {
    pub const BUILT_IN: [LineageFamily; 4] = [
        LineageFamily::Path,
        LineageFamily::Cycle,
        LineageFamily::GridPeriodic,
        LineageFamily::GridAperiodic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LineageFamily::Path => "path",
            LineageFamily::Cycle => "cycle",
            LineageFamily::GridPeriodic => "grid-periodic",
            LineageFamily::GridAperiodic => "grid-aperiodic",
            LineageFamily::Custom => "custom",
        }
    }

    pub fn is_2d(self) -> bool {
        matches!(self, LineageFamily::GridPeriodic | LineageFamily::GridAperiodic)
    }

    /// Builds the family member with the given side length (number of
    /// vertices for 1D families, grid side for 2D ones).
    pub fn member(self, side: usize) -> Result<Graph> {
        match self {
            LineageFamily::Path => make_path(side),
            LineageFamily::Cycle => make_cycle(side),
            LineageFamily::GridPeriodic => {
                let c = make_cycle(side)?;
                Ok(box_product(&c, &c))
            }
            LineageFamily::GridAperiodic => {
                let p = make_path(side)?;
                Ok(box_product(&p, &p))
            }
            LineageFamily::Custom => Err(Error::Config(
                "custom lineages are assembled with GraphLineage::custom".into(),
            )),
        }
    }
}

impl fmt::Display for LineageFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LineageFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(LineageFamily::Path),
            "cycle" => Ok(LineageFamily::Cycle),
            "grid-periodic" => Ok(LineageFamily::GridPeriodic),
            "grid-aperiodic" => Ok(LineageFamily::GridAperiodic),
            "custom" => Ok(LineageFamily::Custom),
            other => Err(Error::Config(format!(
                "unknown lineage family `{other}` (expected path, cycle, grid-periodic, grid-aperiodic)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GraphLineage {
    pub family: LineageFamily,
    pub members: Vec<Graph>,
}

impl GraphLineage {
    /// Wraps a caller-supplied sequence; sizes must be nondecreasing.
    pub fn custom(members: Vec<Graph>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Config("lineage needs at least one member".into()));
        }
        if members.windows(2).any(|w| w[1].n() < w[0].n()) {
            return Err(Error::Config("lineage member sizes must be nondecreasing".into()));
        }
        Ok(Self {
            family: LineageFamily::Custom,
            members,
        })
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Graph::n).collect()
    }
}

/// Member `l` (for `l < depth`) has side `base_size · 2^l`; 2D families are
/// box products of two 1D members of that side.
pub fn make_lineage(family: LineageFamily, depth: usize, base_size: usize) -> Result<GraphLineage> {
    if depth == 0 {
        return Err(Error::Config("lineage depth must be >= 1".into()));
    }
    if family == LineageFamily::Custom {
        return Err(Error::Config("custom lineages cannot be generated".into()));
    }
    let min_base = match family {
        LineageFamily::Cycle | LineageFamily::GridPeriodic => 3,
        _ => 1,
    };
    if base_size < min_base {
        return Err(Error::Config(format!(
            "base size {base_size} too small for {family} (minimum {min_base})"
        )));
    }
    let members = (0..depth)
        .map(|l| {
            let side = base_size
                .checked_mul(1usize << l)
                .ok_or_else(|| Error::Config("lineage size overflow".into()))?;
            family.member(side)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GraphLineage { family, members })
}
