//! Sufficient statistics and single-dyad change statistics.
//!
//! Each [`TermKind`] measures one scalar network statistic. Change
//! statistics return `s(y with dyad set) - s(y with dyad unset)` and are
//! computed incrementally: toggling a dyad touches only terms local to its
//! endpoints, which is what makes Metropolis-Hastings sampling and
//! pseudo-likelihood work cheap.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{Dyad, Graph, NodeAttributes, dyad_count};

/// Fixed per-dyad real coefficients, indexed by [`Dyad::index`].
#[derive(Clone, Debug, PartialEq)]
pub struct DyadTable {
    n: usize,
    values: Arc<Vec<f64>>,
}

impl DyadTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != dyad_count(n) {
            return Err(Error::DimensionMismatch(format!(
                "dyad table has {} entries, expected {}",
                values.len(),
                dyad_count(n)
            )));
        }
        Ok(DyadTable {
            n,
            values: Arc::new(values),
        })
    }

    pub fn constant(n: usize, value: f64) -> Self {
        DyadTable {
            n,
            values: Arc::new(vec![value; dyad_count(n)]),
        }
    }

    /// Builds a table from a function of the canonical dyad.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(dyad_count(n));
        for idx in 0..dyad_count(n) {
            let d = Dyad::from_index(idx);
            values.push(f(d.i(), d.j()));
        }
        DyadTable {
            n,
            values: Arc::new(values),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }
}

/// One scalar sufficient statistic.
#[derive(Clone, Debug, PartialEq)]
pub enum TermKind {
    /// Number of edges.
    Edges,
    /// Number of nodes with degree exactly `k`.
    DegreeCount(usize),
    /// Number of paths of length two: `sum_i C(deg(i), 2)`.
    TwoPaths,
    /// Number of triangles (unordered node triples).
    Triangles,
    /// Number of edges whose endpoints have exactly `m >= 1` shared partners.
    Esp(usize),
    /// Degree of a single node (node-propensity parameterization).
    NodeDegree(usize),
    /// Number of edges whose endpoints share the named categorical attribute.
    NodeMatch(String),
    /// `sum over edges of c_ij` for fixed per-dyad coefficients.
    DyadCovariate(DyadTable),
    /// Like `DyadCovariate` but always carried with natural weight 1; this
    /// is how non-counting reference measures (e.g. `-log n` per dyad) enter.
    Offset(DyadTable),
}

impl TermKind {
    /// Short stable name used in parameter tables and reports.
    pub fn name(&self) -> String {
        match self {
            TermKind::Edges => "edges".into(),
            TermKind::DegreeCount(k) => format!("degree{k}"),
            TermKind::TwoPaths => "twopaths".into(),
            TermKind::Triangles => "triangles".into(),
            TermKind::Esp(m) => format!("esp{m}"),
            TermKind::NodeDegree(i) => format!("nodedegree_{}", i + 1),
            TermKind::NodeMatch(a) => format!("nodematch_{a}"),
            TermKind::DyadCovariate(_) => "dyadcov".into(),
            TermKind::Offset(_) => "offset".into(),
        }
    }

    /// Validates the term against a graph size.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            TermKind::DegreeCount(k) if *k > n - 1 => Err(Error::TermOutOfRange(format!(
                "degree count k={k} outside [0, {}]",
                n - 1
            ))),
            TermKind::Esp(m) if *m < 1 || *m > n.saturating_sub(2) => Err(Error::TermOutOfRange(
                format!("esp m={m} outside [1, {}]", n.saturating_sub(2)),
            )),
            TermKind::NodeDegree(i) if *i >= n => Err(Error::NodeOutOfRange { index: *i, n }),
            TermKind::DyadCovariate(t) | TermKind::Offset(t) if t.n() != n => {
                Err(Error::DimensionMismatch(format!(
                    "dyad table built for n={}, graph has n={n}",
                    t.n()
                )))
            }
            _ => Ok(()),
        }
    }
}

fn choose2(d: usize) -> f64 {
    (d * d.saturating_sub(1) / 2) as f64
}

/// Value of a single term on a graph.
pub fn stat_value(term: &TermKind, g: &Graph, attrs: &NodeAttributes) -> Result<f64> {
    term.validate(g.n())?;
    let v = match term {
        TermKind::Edges => g.edge_count() as f64,
        TermKind::DegreeCount(k) => (0..g.n()).filter(|&i| g.degree(i) == *k).count() as f64,
        TermKind::TwoPaths => (0..g.n()).map(|i| choose2(g.degree(i))).sum(),
        TermKind::Triangles => {
            let mut closed = 0usize;
            for d in g.edges() {
                closed += g.common_neighbors(d.i(), d.j())?;
            }
            (closed / 3) as f64
        }
        TermKind::Esp(m) => {
            let mut c = 0usize;
            for d in g.edges() {
                if g.common_neighbors(d.i(), d.j())? == *m {
                    c += 1;
                }
            }
            c as f64
        }
        TermKind::NodeDegree(i) => g.degree(*i) as f64,
        TermKind::NodeMatch(attr) => {
            let col = attrs.categorical(attr)?;
            if col.len() != g.n() {
                return Err(Error::DimensionMismatch(format!(
                    "attribute `{attr}` has {} values for n={}",
                    col.len(),
                    g.n()
                )));
            }
            g.edges()
                .iter()
                .filter(|d| col[d.i()] == col[d.j()])
                .count() as f64
        }
        TermKind::DyadCovariate(t) | TermKind::Offset(t) => {
            g.edges().iter().map(|d| t.get(d.index())).sum()
        }
    };
    Ok(v)
}

/// Values of several terms, concatenated in declared order.
pub fn stat_vector(terms: &[TermKind], g: &Graph, attrs: &NodeAttributes) -> Result<Vec<f64>> {
    terms.iter().map(|t| stat_value(t, g, attrs)).collect()
}

/// Change statistic `s(y: dyad on) - s(y: dyad off)` for each term,
/// computed incrementally from the current graph state (the dyad itself may
/// currently be on or off).
pub fn change_vector(
    terms: &[TermKind],
    g: &Graph,
    attrs: &NodeAttributes,
    d: Dyad,
) -> Result<Vec<f64>> {
    g.check_dyad(d)?;
    for t in terms {
        t.validate(g.n())?;
    }
    let needs_shared = terms
        .iter()
        .any(|t| matches!(t, TermKind::Triangles | TermKind::Esp(_)));
    let mut wset = Vec::new();
    let mut esp_deltas: Vec<(usize, f64)> = Vec::new();
    if needs_shared {
        g.common_neighbors_into(d.i(), d.j(), &mut wset);
        esp_bin_changes(g, d, &wset, |bin, delta| esp_deltas.push((bin, delta)));
    }

    let y = g.has_edge(d) as usize;
    let di0 = g.degree(d.i()) - y;
    let dj0 = g.degree(d.j()) - y;

    let mut out = Vec::with_capacity(terms.len());
    for term in terms {
        let v = match term {
            TermKind::Edges => 1.0,
            TermKind::DegreeCount(k) => {
                let hit = |deg: usize| (deg == *k) as i64;
                (hit(di0 + 1) - hit(di0) + hit(dj0 + 1) - hit(dj0)) as f64
            }
            TermKind::TwoPaths => (di0 + dj0) as f64,
            TermKind::Triangles => wset.len() as f64,
            TermKind::Esp(m) => esp_deltas
                .iter()
                .filter(|(bin, _)| bin == m)
                .map(|(_, v)| v)
                .sum(),
            TermKind::NodeDegree(i) => (*i == d.i() || *i == d.j()) as i64 as f64,
            TermKind::NodeMatch(attr) => {
                let col = attrs.categorical(attr)?;
                (col[d.i()] == col[d.j()]) as i64 as f64
            }
            TermKind::DyadCovariate(t) | TermKind::Offset(t) => t.get(d.index()),
        };
        out.push(v);
    }
    Ok(out)
}

/// Emits every edgewise-shared-partner bin movement caused by setting the
/// dyad `d`: the dyad's own bin, plus the shift of each edge incident to a
/// common neighbor of the endpoints from bin `c` to `c + 1`. Only bins
/// `m >= 1` are emitted (the m = 0 class is not a tracked statistic).
pub(crate) fn esp_bin_changes(
    g: &Graph,
    d: Dyad,
    shared: &[u32],
    mut emit: impl FnMut(usize, f64),
) {
    if !shared.is_empty() {
        emit(shared.len(), 1.0);
    }
    let y = g.has_edge(d) as usize;
    for &w in shared {
        let w = w as usize;
        for v in [d.i(), d.j()] {
            // Shared partners of the existing edge {v, w} with `d` off: the
            // opposite endpoint of `d` is one of them exactly when `d` is on.
            let c0 = g.common_neighbors(v, w).expect("valid edge") - y;
            if c0 >= 1 {
                emit(c0, -1.0);
            }
            emit(c0 + 1, 1.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::all_dyads;

    fn no_attrs(n: usize) -> NodeAttributes {
        NodeAttributes::new(n)
    }

    #[test]
    fn stat_examples() {
        let k4 = Graph::complete(4).unwrap();
        let k3 = Graph::complete(3).unwrap();
        let a4 = no_attrs(4);
        let a3 = no_attrs(3);

        assert_eq!(stat_value(&TermKind::Triangles, &k4, &a4).unwrap(), 4.0);
        assert_eq!(stat_value(&TermKind::Esp(1), &k3, &a3).unwrap(), 3.0);
        assert_eq!(stat_value(&TermKind::Esp(2), &k4, &a4).unwrap(), 6.0);
        assert_eq!(stat_value(&TermKind::TwoPaths, &k3, &a3).unwrap(), 3.0);

        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(stat_value(&TermKind::TwoPaths, &star, &a4).unwrap(), 3.0);

        let empty = Graph::empty(4).unwrap();
        assert_eq!(stat_value(&TermKind::DegreeCount(0), &empty, &a4).unwrap(), 4.0);
    }

    #[test]
    fn stat_vector_examples() {
        let k3 = Graph::complete(3).unwrap();
        let k4 = Graph::complete(4).unwrap();
        assert_eq!(
            stat_vector(&[TermKind::Edges, TermKind::Triangles], &k3, &no_attrs(3)).unwrap(),
            vec![3.0, 1.0]
        );
        assert_eq!(
            stat_vector(
                &[TermKind::Edges, TermKind::Esp(1), TermKind::Esp(2)],
                &k4,
                &no_attrs(4)
            )
            .unwrap(),
            vec![6.0, 0.0, 6.0]
        );
        assert_eq!(
            stat_vector(&[TermKind::Edges], &Graph::empty(3).unwrap(), &no_attrs(3)).unwrap(),
            vec![0.0]
        );
    }

    #[test]
    fn change_examples() {
        let mut g = Graph::complete(4).unwrap();
        let d = Dyad::new(0, 1).unwrap();
        g.toggle(d); // K4 minus {0,1}
        let delta = change_vector(&[TermKind::Edges, TermKind::Triangles], &g, &no_attrs(4), d)
            .unwrap();
        assert_eq!(delta, vec![1.0, 2.0]);

        // Path 0-1-2, toggling {0,2} closes the triangle: the dyad itself
        // lands in bin 1 and both existing edges move from bin 0 to bin 1.
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let delta = change_vector(
            &[TermKind::Edges, TermKind::Esp(1)],
            &path,
            &no_attrs(3),
            Dyad::new(0, 2).unwrap(),
        )
        .unwrap();
        assert_eq!(delta, vec![1.0, 3.0]);
    }

    #[test]
    fn nodematch_and_covariates() {
        let mut attrs = no_attrs(3);
        attrs
            .insert_categorical("grp", vec!["a".into(), "a".into(), "b".into()])
            .unwrap();
        let g = Graph::complete(3).unwrap();
        assert_eq!(
            stat_value(&TermKind::NodeMatch("grp".into()), &g, &attrs).unwrap(),
            1.0
        );
        assert!(stat_value(&TermKind::NodeMatch("zz".into()), &g, &attrs).is_err());

        let tab = DyadTable::from_fn(3, |i, j| (i + j) as f64);
        assert_eq!(
            stat_value(&TermKind::DyadCovariate(tab.clone()), &g, &attrs).unwrap(),
            1.0 + 2.0 + 3.0
        );
        let off = TermKind::Offset(DyadTable::constant(3, -(3f64.ln())));
        assert!((stat_value(&off, &g, &attrs).unwrap() + 3.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn term_validation() {
        assert!(TermKind::Esp(0).validate(5).is_err());
        assert!(TermKind::Esp(4).validate(5).is_err());
        assert!(TermKind::Esp(3).validate(5).is_ok());
        assert!(TermKind::DegreeCount(5).validate(5).is_err());
        assert!(TermKind::NodeDegree(5).validate(5).is_err());
        assert!(TermKind::Offset(DyadTable::constant(4, 1.0)).validate(5).is_err());
    }

    fn random_graph(n: usize, fill: u64) -> Graph {
        let mut g = Graph::empty(n).unwrap();
        for (b, d) in all_dyads(n).enumerate() {
            if fill >> (b % 64) & 1 == 1 || (fill.wrapping_mul(b as u64 + 7) % 3) == 0 {
                g.toggle(d);
            }
        }
        g
    }

    fn all_count_terms(n: usize) -> Vec<TermKind> {
        let mut terms = vec![TermKind::Edges, TermKind::TwoPaths, TermKind::Triangles];
        for k in 0..n {
            terms.push(TermKind::DegreeCount(k));
        }
        for m in 1..=n - 2 {
            terms.push(TermKind::Esp(m));
        }
        terms.push(TermKind::NodeDegree(0));
        terms
    }

    #[test]
    fn change_matches_full_recount() {
        for n in [3usize, 5, 8, 10] {
            let attrs = no_attrs(n);
            let terms = all_count_terms(n);
            for seed in 0..20u64 {
                let mut g = random_graph(n, seed.wrapping_mul(0x9e3779b97f4a7c15));
                let d = Dyad::from_index((seed as usize * 13) % dyad_count(n));
                let before = stat_vector(&terms, &g, &attrs).unwrap();
                let delta = change_vector(&terms, &g, &attrs, d).unwrap();
                let was_edge = g.has_edge(d);
                g.toggle(d);
                let after = stat_vector(&terms, &g, &attrs).unwrap();
                let sign = if was_edge { -1.0 } else { 1.0 };
                for a in 0..terms.len() {
                    let expect = before[a] + sign * delta[a];
                    assert!(
                        (after[a] - expect).abs() < 1e-9,
                        "term {} (n={n}, seed={seed}): {} vs {}",
                        terms[a].name(),
                        after[a],
                        expect
                    );
                }
            }
        }
    }

    #[test]
    fn esp_triangle_and_degree_identities() {
        for n in [4usize, 6, 9] {
            let attrs = no_attrs(n);
            for seed in 0..15u64 {
                let g = random_graph(n, seed.wrapping_mul(0xa076_1d64_78bd_642f));
                let triangles = stat_value(&TermKind::Triangles, &g, &attrs).unwrap();
                let esp: Vec<f64> = (1..=n - 2)
                    .map(|m| stat_value(&TermKind::Esp(m), &g, &attrs).unwrap())
                    .collect();
                let weighted: f64 = esp.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum();
                assert_eq!(weighted, 3.0 * triangles);

                let edges = stat_value(&TermKind::Edges, &g, &attrs).unwrap();
                let esp_total: f64 = esp.iter().sum();
                assert!(edges - esp_total >= 0.0, "m=0 bin must be non-negative");

                let deg_counts: Vec<f64> = (0..n)
                    .map(|k| stat_value(&TermKind::DegreeCount(k), &g, &attrs).unwrap())
                    .collect();
                let total: f64 = deg_counts.iter().sum();
                let weighted_deg: f64 = deg_counts
                    .iter()
                    .enumerate()
                    .map(|(k, v)| k as f64 * v)
                    .sum();
                assert_eq!(total, n as f64);
                assert_eq!(weighted_deg, 2.0 * edges);
            }
        }
    }

    #[test]
    fn twopaths_matches_path_enumeration() {
        for n in [3usize, 5, 8] {
            let attrs = no_attrs(n);
            for seed in 0..10u64 {
                let g = random_graph(n, seed.wrapping_mul(31) + 1);
                // brute force: unordered paths a-b-c with a != c
                let mut paths = 0usize;
                for b in 0..n {
                    for a in 0..n {
                        for c in a + 1..n {
                            if a != b
                                && c != b
                                && g.has_edge_between(a, b)
                                && g.has_edge_between(b, c)
                            {
                                paths += 1;
                            }
                        }
                    }
                }
                assert_eq!(
                    stat_value(&TermKind::TwoPaths, &g, &attrs).unwrap(),
                    paths as f64
                );
            }
        }
    }
}
