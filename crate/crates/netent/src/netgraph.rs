//! Hypergraph network model and the graph parameters bounding communication
//! cost (edge radius) and round complexity (connected domination number).
//!
//! Distances and domination are taken on the 2-section of the hypergraph:
//! two nodes are adjacent iff some hyperedge contains both.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentinel for unreachable pairs.
pub const INF: usize = usize::MAX;

/// Practical ceiling for the exact connected-domination search.
pub const MAX_EXACT_NODES: usize = 16;

/// Node set {0..n-1} plus a list of hyperedges of size >= 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HypergraphJson", into = "HypergraphJson")]
pub struct Hypergraph {
    n: usize,
    edges: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct HypergraphJson {
    n: usize,
    edges: Vec<Vec<usize>>,
}

impl TryFrom<HypergraphJson> for Hypergraph {
    type Error = Error;
    fn try_from(j: HypergraphJson) -> Result<Self> {
        Hypergraph::new(j.n, j.edges)
    }
}

impl From<Hypergraph> for HypergraphJson {
    fn from(g: Hypergraph) -> Self {
        HypergraphJson { n: g.n, edges: g.edges }
    }
}

/// Graph parameters with machine-checkable witnesses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphParams {
    pub edge_radius: Option<usize>,
    pub connected_domination: Option<usize>,
    pub central_edge: Option<Vec<usize>>,
    pub dominating_set: Option<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut norm: Vec<Vec<usize>> = Vec::with_capacity(edges.len());
        for e in edges {
            let mut e: Vec<usize> = e;
            e.sort_unstable();
            e.dedup();
            if e.len() < 2 {
                return Err(Error::Graph("hyperedge has fewer than 2 nodes".into()));
            }
            if e.iter().any(|&v| v >= n) {
                return Err(Error::Graph(format!("hyperedge {e:?} out of range for n={n}")));
            }
            if norm.contains(&e) {
                return Err(Error::Graph(format!("duplicate hyperedge {e:?}")));
            }
            norm.push(e);
        }
        Ok(Hypergraph { n, edges: norm })
    }

    /// Simple graph convenience: 2-element edges.
    pub fn simple(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Hypergraph::new(n, pairs.iter().map(|&(a, b)| vec![a, b]).collect())
    }

    /// Line graph L_n: path 0-1-...-(n-1).
    pub fn line(n: usize) -> Result<Self> {
        Hypergraph::new(n, (0..n.saturating_sub(1)).map(|i| vec![i, i + 1]).collect())
    }

    /// Cycle C_n.
    pub fn cycle(n: usize) -> Result<Self> {
        let mut e: Vec<Vec<usize>> = (0..n - 1).map(|i| vec![i, i + 1]).collect();
        e.push(vec![0, n - 1]);
        Hypergraph::new(n, e)
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Largest hyperedge size; the `k` of the k-network bounds.
    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(|e| e.len()).max().unwrap_or(0)
    }

    /// 2-section adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            for (i, &u) in e.iter().enumerate() {
                for &v in &e[i + 1..] {
                    if !adj[u].contains(&v) {
                        adj[u].push(v);
                        adj[v].push(u);
                    }
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let d = bfs_from(&self.adjacency(), &[0]);
        d.iter().all(|&x| x != INF)
    }

    /// Edges incident to a node, by edge index.
    pub fn incident_edges(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.contains(&v))
            .map(|(i, _)| i)
            .collect()
    }
}

fn bfs_from(adj: &[Vec<usize>], sources: &[usize]) -> Vec<usize> {
    let mut dist = vec![INF; adj.len()];
    let mut queue = std::collections::VecDeque::new();
    for &s in sources {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == INF {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// All-pairs BFS distances on the 2-section, `INF` for disconnected pairs.
pub fn distance_matrix(g: &Hypergraph) -> Vec<Vec<usize>> {
    let adj = g.adjacency();
    (0..g.num_nodes()).map(|u| bfs_from(&adj, &[u])).collect()
}

/// BFS distances from a node set (distance to the nearest member).
pub fn distances_to_set(g: &Hypergraph, set: &[usize]) -> Vec<usize> {
    bfs_from(&g.adjacency(), set)
}

/// Edge radius r_c = min over edges of the eccentricity of the edge, with
/// the lowest-index achieving edge as witness. `None` when disconnected.
pub fn edge_radius(g: &Hypergraph) -> Option<(usize, Vec<usize>)> {
    let adj = g.adjacency();
    let mut best: Option<(usize, usize)> = None;
    for (ei, e) in g.edges().iter().enumerate() {
        let dist = bfs_from(&adj, e);
        let ecc = dist.iter().copied().max().unwrap_or(0);
        if ecc == INF {
            continue;
        }
        if best.map_or(true, |(b, _)| ecc < b) {
            best = Some((ecc, ei));
        }
    }
    best.map(|(v, ei)| (v, g.edges()[ei].clone()))
}

fn dominates(adj: &[Vec<usize>], set_mask: u32, n: usize) -> bool {
    for v in 0..n {
        if set_mask & (1 << v) != 0 {
            continue;
        }
        if !adj[v].iter().any(|&u| set_mask & (1 << u) != 0) {
            return false;
        }
    }
    true
}

fn induced_connected(adj: &[Vec<usize>], set_mask: u32, n: usize) -> bool {
    let members: Vec<usize> = (0..n).filter(|&v| set_mask & (1 << v) != 0).collect();
    if members.is_empty() {
        return false;
    }
    let mut seen = 1u32 << members[0];
    let mut stack = vec![members[0]];
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if set_mask & (1 << v) != 0 && seen & (1 << v) == 0 {
                seen |= 1 << v;
                stack.push(v);
            }
        }
    }
    seen == set_mask
}

/// Minimal connected dominating set by exhaustive search in increasing size;
/// ties broken by the lexicographically smallest witness. `None` when the
/// graph is disconnected.
pub fn connected_domination_number(g: &Hypergraph) -> Result<Option<(usize, Vec<usize>)>> {
    let n = g.num_nodes();
    if n > MAX_EXACT_NODES {
        return Err(Error::SearchLimit { n, limit: MAX_EXACT_NODES });
    }
    if !g.is_connected() {
        return Ok(None);
    }
    let adj = g.adjacency();
    if n == 1 {
        return Ok(Some((1, vec![0])));
    }
    for size in 1..=n {
        if let Some(mask) = first_feasible_subset(&adj, n, size) {
            let set: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
            return Ok(Some((size, set)));
        }
    }
    Ok(None)
}

/// Advance `combo` to the next k-subset of {0..n-1} in lexicographic order.
/// Returns false when exhausted.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn first_feasible_subset(adj: &[Vec<usize>], n: usize, size: usize) -> Option<u32> {
    // lexicographic enumeration of size-subsets; first hit is the witness
    let mut combo: Vec<usize> = (0..size).collect();
    loop {
        let mask = combo.iter().fold(0u32, |m, &v| m | (1 << v));
        if dominates(adj, mask, n) && induced_connected(adj, mask, n) {
            return Some(mask);
        }
        if !next_combination(&mut combo, n) {
            return None;
        }
    }
}

/// Edge radius recomputed through the domination-chain characterization:
/// the minimal k such that some chain G_0 <_d G_1 <_d ... <_d G_k covers V
/// with G_0 an edge. Grows BFS layers from each edge independently of
/// [`edge_radius`]; the two must agree on every connected graph.
pub fn domination_chain_radius(g: &Hypergraph) -> Option<usize> {
    if !g.is_connected() {
        return None;
    }
    let adj = g.adjacency();
    let n = g.num_nodes();
    let mut best: Option<usize> = None;
    for e in g.edges() {
        let mut covered = vec![false; n];
        for &v in e {
            covered[v] = true;
        }
        let mut k = 0usize;
        while covered.iter().any(|&c| !c) {
            // G_{k+1} = closed neighborhood of G_k
            let next: Vec<usize> = (0..n)
                .filter(|&v| !covered[v] && adj[v].iter().any(|&u| covered[u]))
                .collect();
            if next.is_empty() {
                k = INF;
                break;
            }
            for v in next {
                covered[v] = true;
            }
            k += 1;
        }
        if k != INF && best.map_or(true, |b| k < b) {
            best = Some(k);
        }
    }
    best
}

/// Complete k-uniform hypergraph on n nodes.
pub fn k_network(n: usize, k: usize) -> Result<Hypergraph> {
    if k < 2 || k > n {
        return Err(Error::Graph(format!("k={k} out of range for n={n}")));
    }
    let mut edges = Vec::new();
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        edges.push(combo.clone());
        if !next_combination(&mut combo, n) {
            return Hypergraph::new(n, edges);
        }
    }
}

/// All node pairs sharing no hyperedge; empty iff the network is complete.
pub fn non_adjacent_pairs(g: &Hypergraph) -> Vec<(usize, usize)> {
    let adj = g.adjacency();
    let mut out = Vec::new();
    for u in 0..g.num_nodes() {
        for v in u + 1..g.num_nodes() {
            if !adj[u].contains(&v) {
                out.push((u, v));
            }
        }
    }
    out
}

/// Full parameter report.
pub fn graph_params(g: &Hypergraph) -> Result<GraphParams> {
    let er = edge_radius(g);
    let dc = connected_domination_number(g)?;
    Ok(GraphParams {
        edge_radius: er.as_ref().map(|(v, _)| *v),
        central_edge: er.map(|(_, e)| e),
        connected_domination: dc.as_ref().map(|(v, _)| *v),
        dominating_set: dc.map(|(_, s)| s),
    })
}

/// 16-node tree in the spirit of a star of stars: one hub, five internal
/// spokes, two leaves per spoke. Reconstruction with edge radius 2 and
/// connected domination number 6; not taken from any published edge list.
pub fn tree16() -> Hypergraph {
    let mut edges: Vec<Vec<usize>> = (1..=5).map(|i| vec![0, i]).collect();
    for i in 1..=5usize {
        edges.push(vec![i, 2 * i + 4]);
        edges.push(vec![i, 2 * i + 5]);
    }
    Hypergraph::new(16, edges).expect("static tree is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances_on_line_and_hyperedge() {
        let l4 = Hypergraph::line(4).unwrap();
        let d = distance_matrix(&l4);
        assert_eq!(d[0][3], 3);
        let h = Hypergraph::new(3, vec![vec![0, 1, 2]]).unwrap();
        let d = distance_matrix(&h);
        assert_eq!(d[0][1], 1);
        assert_eq!(d[0][2], 1);
        assert_eq!(d[1][2], 1);
        let c5 = Hypergraph::cycle(5).unwrap();
        assert_eq!(distance_matrix(&c5)[0][2], 2);
    }

    #[test]
    fn edge_radius_values() {
        assert_eq!(edge_radius(&Hypergraph::line(4).unwrap()).unwrap().0, 1);
        for n in 2..=12usize {
            let v = edge_radius(&Hypergraph::line(n).unwrap()).unwrap().0;
            assert_eq!(v, n.div_ceil(2) - 1, "L_{n}");
        }
        assert_eq!(edge_radius(&Hypergraph::cycle(5).unwrap()).unwrap().0, 2);
        let full = Hypergraph::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(edge_radius(&full).unwrap().0, 0);
    }

    #[test]
    fn connected_domination_values() {
        let c4 = Hypergraph::cycle(4).unwrap();
        assert_eq!(connected_domination_number(&c4).unwrap().unwrap().0, 2);
        let full = Hypergraph::new(5, vec![vec![0, 1, 2, 3, 4]]).unwrap();
        assert_eq!(connected_domination_number(&full).unwrap().unwrap().0, 1);
        for n in 3..=10usize {
            let ln = Hypergraph::line(n).unwrap();
            assert_eq!(connected_domination_number(&ln).unwrap().unwrap().0, n - 2, "L_{n}");
        }
    }

    #[test]
    fn dominating_set_witness_verifies() {
        for g in [Hypergraph::cycle(6).unwrap(), k_network(5, 2).unwrap(), tree16()] {
            let (v, set) = connected_domination_number(&g).unwrap().unwrap();
            assert_eq!(set.len(), v);
            let adj = g.adjacency();
            let mask = set.iter().fold(0u32, |m, &x| m | (1 << x));
            assert!(dominates(&adj, mask, g.num_nodes()));
            assert!(induced_connected(&adj, mask, g.num_nodes()));
        }
    }

    #[test]
    fn chain_radius_matches_edge_radius() {
        for g in [
            Hypergraph::line(4).unwrap(),
            Hypergraph::cycle(5).unwrap(),
            Hypergraph::cycle(4).unwrap(),
            k_network(4, 3).unwrap(),
            tree16(),
        ] {
            assert_eq!(domination_chain_radius(&g), edge_radius(&g).map(|(v, _)| v));
        }
        assert_eq!(domination_chain_radius(&Hypergraph::line(4).unwrap()), Some(1));
        assert_eq!(domination_chain_radius(&Hypergraph::cycle(5).unwrap()), Some(2));
    }

    #[test]
    fn k_network_shapes() {
        let tri = k_network(3, 2).unwrap();
        assert_eq!(tri.edges().len(), 3);
        assert_eq!(k_network(4, 3).unwrap().edges().len(), 4);
        assert!(k_network(4, 1).is_err());
        for n in 3..=8usize {
            assert_eq!(edge_radius(&k_network(n, 2).unwrap()).unwrap().0, 1);
        }
    }

    #[test]
    fn non_adjacent_pairs_cases() {
        assert!(non_adjacent_pairs(&k_network(3, 2).unwrap()).is_empty());
        assert_eq!(
            non_adjacent_pairs(&Hypergraph::line(4).unwrap()),
            vec![(0, 2), (0, 3), (1, 3)]
        );
        assert!(non_adjacent_pairs(&k_network(4, 3).unwrap()).is_empty());
    }

    #[test]
    fn disconnected_graphs() {
        let g = Hypergraph::simple(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(!g.is_connected());
        assert!(edge_radius(&g).is_none());
        assert!(connected_domination_number(&g).unwrap().is_none());
        assert!(domination_chain_radius(&g).is_none());
    }

    #[test]
    fn search_limit_enforced() {
        let g = Hypergraph::line(17).unwrap();
        assert!(matches!(
            connected_domination_number(&g),
            Err(Error::SearchLimit { .. })
        ));
    }

    #[test]
    fn tree16_parameters() {
        let t = tree16();
        assert_eq!(t.num_nodes(), 16);
        assert_eq!(t.edges().len(), 15); // a tree
        assert_eq!(edge_radius(&t).unwrap().0, 2);
        assert_eq!(connected_domination_number(&t).unwrap().unwrap().0, 6);
    }

    #[test]
    fn invalid_graphs_rejected() {
        assert!(Hypergraph::new(3, vec![vec![0]]).is_err());
        assert!(Hypergraph::new(3, vec![vec![0, 5]]).is_err());
        assert!(Hypergraph::new(3, vec![vec![0, 1], vec![1, 0]]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = Hypergraph::new(4, vec![vec![0, 1], vec![1, 2, 3]]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: Hypergraph = serde_json::from_str(&s).unwrap();
        assert_eq!(g, back);
        assert!(serde_json::from_str::<Hypergraph>(r#"{"n":2,"edges":[[0]]}"#).is_err());
    }
}
