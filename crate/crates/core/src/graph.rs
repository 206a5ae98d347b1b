//! Undirected binary graphs over a fixed node set.
//!
//! A [`Graph`] stores a dyad-indexed edge bitset (O(1) edge queries), sorted
//! neighbor lists (O(deg) iteration, linear-merge common neighbors), and is
//! maintained incrementally under single-dyad toggles. Node indices are
//! 0-based internally; the text formats in [`crate::formats`] are 1-based.

use crate::error::{Error, Result};

/// An unordered pair of distinct nodes, stored in canonical order `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dyad {
    i: u32,
    j: u32,
}

impl Dyad {
    /// Canonicalizes `(a, b)`; rejects self-loops.
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        Ok(Dyad {
            i: i as u32,
            j: j as u32,
        })
    }

    pub fn i(&self) -> usize {
        self.i as usize
    }

    pub fn j(&self) -> usize {
        self.j as usize
    }

    /// Linear index into the upper-triangular dyad enumeration:
    /// `(0,1) -> 0, (0,2) -> 1, (1,2) -> 2, (0,3) -> 3, ...`
    pub fn index(&self) -> usize {
        let j = self.j as usize;
        j * (j - 1) / 2 + self.i as usize
    }

    /// Inverse of [`Dyad::index`].
    pub fn from_index(idx: usize) -> Self {
        // Largest j with j(j-1)/2 <= idx.
        let mut j = ((2.0 * idx as f64 + 0.25).sqrt() + 0.5) as usize;
        while j * (j - 1) / 2 > idx {
            j -= 1;
        }
        while (j + 1) * j / 2 <= idx {
            j += 1;
        }
        let i = idx - j * (j - 1) / 2;
        Dyad {
            i: i as u32,
            j: j as u32,
        }
    }
}

/// Number of dyads on `n` nodes.
pub fn dyad_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Iterator over all dyads of an `n`-node graph in index order.
pub fn all_dyads(n: usize) -> impl Iterator<Item = Dyad> {
    (0..dyad_count(n)).map(Dyad::from_index)
}

/// Undirected simple binary graph with incremental degree/neighbor
/// bookkeeping. Cloning is cheap enough for snapshotting MCMC draws.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    bits: Vec<u64>,
    adj: Vec<Vec<u32>>,
    edge_count: usize,
}

impl Graph {
    /// Empty graph on `n >= 1` nodes.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("graph must have at least one node".into()));
        }
        let words = dyad_count(n).div_ceil(64).max(1);
        Ok(Graph {
            n,
            bits: vec![0; words],
            adj: vec![Vec::new(); n],
            edge_count: 0,
        })
    }

    /// Builds a graph from a dyad list. Endpoints are validated, duplicates
    /// are permitted and collapse to a single edge.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n)?;
        for (a, b) in edges {
            if a >= n {
                return Err(Error::NodeOutOfRange { index: a, n });
            }
            if b >= n {
                return Err(Error::NodeOutOfRange { index: b, n });
            }
            let d = Dyad::new(a, b)?;
            if !g.has_edge(d) {
                g.toggle(d);
            }
        }
        Ok(g)
    }

    /// Complete graph on `n` nodes.
    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        for d in all_dyads(n) {
            g.toggle(d);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn dyad_count(&self) -> usize {
        dyad_count(self.n)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Sorted neighbor list of `i`.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj[i]
    }

    pub fn check_dyad(&self, d: Dyad) -> Result<()> {
        if d.j() >= self.n {
            return Err(Error::NodeOutOfRange {
                index: d.j(),
                n: self.n,
            });
        }
        Ok(())
    }

    pub fn has_edge(&self, d: Dyad) -> bool {
        self.has_edge_index(d.index())
    }

    pub fn has_edge_between(&self, a: usize, b: usize) -> bool {
        a != b && self.has_edge_index(Dyad::new(a, b).expect("distinct").index())
    }

    #[inline]
    pub fn has_edge_index(&self, idx: usize) -> bool {
        self.bits[idx >> 6] & (1u64 << (idx & 63)) != 0
    }

    /// Flips the edge state of `d`, updating all bookkeeping.
    pub fn toggle(&mut self, d: Dyad) {
        let idx = d.index();
        debug_assert!(idx < self.dyad_count());
        let (i, j) = (d.i(), d.j());
        if self.has_edge_index(idx) {
            self.bits[idx >> 6] &= !(1u64 << (idx & 63));
            remove_sorted(&mut self.adj[i], j as u32);
            remove_sorted(&mut self.adj[j], i as u32);
            self.edge_count -= 1;
        } else {
            self.bits[idx >> 6] |= 1u64 << (idx & 63);
            insert_sorted(&mut self.adj[i], j as u32);
            insert_sorted(&mut self.adj[j], i as u32);
            self.edge_count += 1;
        }
    }

    /// Forces the edge state of `d` to `present`.
    pub fn set_edge(&mut self, d: Dyad, present: bool) {
        if self.has_edge(d) != present {
            self.toggle(d);
        }
    }

    /// Edges in dyad order.
    pub fn edges(&self) -> Vec<Dyad> {
        let mut out = Vec::with_capacity(self.edge_count);
        for j in 0..self.n {
            for &i in &self.adj[j] {
                if (i as usize) < j {
                    out.push(Dyad {
                        i,
                        j: j as u32,
                    });
                }
            }
        }
        out
    }

    /// `|N(i) ∩ N(j)|`, excluding `i` and `j` themselves (which cannot occur
    /// as their own neighbors in a simple graph).
    pub fn common_neighbors(&self, i: usize, j: usize) -> Result<usize> {
        self.check_pair(i, j)?;
        Ok(merge_count(&self.adj[i], &self.adj[j]))
    }

    /// Appends the common neighbors of `i` and `j` (sorted) to `out`.
    pub fn common_neighbors_into(&self, i: usize, j: usize, out: &mut Vec<u32>) {
        let (a, b) = (&self.adj[i], &self.adj[j]);
        let (mut x, mut y) = (0, 0);
        while x < a.len() && y < b.len() {
            match a[x].cmp(&b[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[x]);
                    x += 1;
                    y += 1;
                }
            }
        }
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::NodeOutOfRange { index: i, n: self.n });
        }
        if j >= self.n {
            return Err(Error::NodeOutOfRange { index: j, n: self.n });
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        Ok(())
    }

    /// Histogram of shortest-path lengths over all dyads, with a separate
    /// bin for unreachable pairs. Bin totals sum to `n(n-1)/2`.
    pub fn all_pairs_geodesics(&self) -> GeodesicHistogram {
        let n = self.n;
        let mut counts = vec![0u64; n.max(2)];
        let mut unreachable = 0u64;
        let mut dist = vec![u32::MAX; n];
        let mut queue = Vec::with_capacity(n);
        for src in 0..n {
            dist.iter_mut().for_each(|d| *d = u32::MAX);
            dist[src] = 0;
            queue.clear();
            queue.push(src as u32);
            let mut head = 0;
            while head < queue.len() {
                let v = queue[head] as usize;
                head += 1;
                for &w in &self.adj[v] {
                    if dist[w as usize] == u32::MAX {
                        dist[w as usize] = dist[v] + 1;
                        queue.push(w);
                    }
                }
            }
            for t in src + 1..n {
                match dist[t] {
                    u32::MAX => unreachable += 1,
                    d => counts[d as usize] += 1,
                }
            }
        }
        GeodesicHistogram { counts, unreachable }
    }
}

/// Shortest-path-length histogram over dyads. `counts[d]` is the number of
/// dyads at distance `d` (`counts[0]` is always zero).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeodesicHistogram {
    pub counts: Vec<u64>,
    pub unreachable: u64,
}

impl GeodesicHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.unreachable
    }
}

fn insert_sorted(v: &mut Vec<u32>, x: u32) {
    match v.binary_search(&x) {
        Ok(_) => {}
        Err(pos) => v.insert(pos, x),
    }
}

fn remove_sorted(v: &mut Vec<u32>, x: u32) {
    if let Ok(pos) = v.binary_search(&x) {
        v.remove(pos);
    }
}

fn merge_count(a: &[u32], b: &[u32]) -> usize {
    let (mut x, mut y, mut c) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                x += 1;
                y += 1;
            }
        }
    }
    c
}

/// A partition of the node set into `K` contiguous, non-empty blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStructure {
    assignment: Vec<u32>,
    members: Vec<Vec<u32>>,
}

impl BlockStructure {
    /// `assignment[i]` is the block id of node `i`; ids must be contiguous
    /// `0..K` and every block non-empty.
    pub fn new(assignment: Vec<u32>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::Invalid("block assignment is empty".into()));
        }
        let k = *assignment.iter().max().unwrap() as usize + 1;
        let mut members = vec![Vec::new(); k];
        for (node, &b) in assignment.iter().enumerate() {
            members[b as usize].push(node as u32);
        }
        if members.iter().any(|m| m.is_empty()) {
            return Err(Error::Invalid("every block must be non-empty".into()));
        }
        Ok(BlockStructure { assignment, members })
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.members.len()
    }

    pub fn block_of(&self, node: usize) -> usize {
        self.assignment[node] as usize
    }

    pub fn members(&self, block: usize) -> &[u32] {
        &self.members[block]
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.assignment[i] == self.assignment[j]
    }
}

/// Per-node attributes: categorical labels and real-valued columns.
/// Attribute names are unique across both kinds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NodeAttributes {
    n: usize,
    categorical: std::collections::BTreeMap<String, Vec<String>>,
    numeric: std::collections::BTreeMap<String, Vec<f64>>,
}

impl NodeAttributes {
    pub fn new(n: usize) -> Self {
        NodeAttributes {
            n,
            categorical: Default::default(),
            numeric: Default::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert_categorical(&mut self, name: &str, values: Vec<String>) -> Result<()> {
        self.check_insert(name, values.len())?;
        self.categorical.insert(name.to_string(), values);
        Ok(())
    }

    pub fn insert_numeric(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        self.check_insert(name, values.len())?;
        self.numeric.insert(name.to_string(), values);
        Ok(())
    }

    fn check_insert(&self, name: &str, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch(format!(
                "attribute `{name}` has {len} values for {} nodes",
                self.n
            )));
        }
        if self.categorical.contains_key(name) || self.numeric.contains_key(name) {
            return Err(Error::Invalid(format!("duplicate attribute name `{name}`")));
        }
        Ok(())
    }

    pub fn categorical(&self, name: &str) -> Result<&[String]> {
        self.categorical
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::MissingAttribute(name.to_string()))
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        self.numeric
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::MissingAttribute(name.to_string()))
    }

    pub fn categorical_names(&self) -> impl Iterator<Item = &str> {
        self.categorical.keys().map(|s| s.as_str())
    }

    pub fn numeric_names(&self) -> impl Iterator<Item = &str> {
        self.numeric.keys().map(|s| s.as_str())
    }
}
