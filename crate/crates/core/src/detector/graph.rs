//! Graph construction over the surviving uncertain cells.
//!
//! Every uncertain cell plays two roles at once: it is a failure node (its
//! selector may have failed, which would threaten its diagonal partners) and a
//! path node (its own read may be sneak-corrupted by a diagonal partner's
//! failed selector). Cell `(u, v)` is a diagonal partner of `(i, j)` when both
//! are uncertain and the bridging cells `(u, j)` and `(i, v)` are uncertain as
//! well — exactly the geometry a sneak path needs. The relation is symmetric,
//! so the graph stores one undirected edge per partner pair with per-direction
//! message slots.
//!
//! Each node also carries a detection-aiding list: confidently-high cells
//! `(u, v)` whose bridging cells `(u, j)` and `(i, v)` are uncertain. Such a
//! clean high read is evidence against a failure at `(i, j)`.

use super::labels::Label;
use crate::grid::Grid;

/// One directed edge from a node to a diagonal partner, with the flat cell
/// indices needed by the message updates cached inline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// Target node id.
    pub nbr: u32,
    /// Index of the reverse edge in the global edge array.
    pub rev: u32,
    /// Flat cell index of the target `(u, v)`.
    pub nbr_cell: u32,
    /// Flat cell index of the row bridge `(i, v)` (source row, target column).
    pub row_bridge: u32,
    /// Flat cell index of the column bridge `(u, j)` (target row, source column).
    pub col_bridge: u32,
}

/// Tanner-style graph over the uncertain cells.
#[derive(Debug, Clone)]
pub struct DetectionGraph {
    rows: usize,
    cols: usize,
    /// Node cell coordinates in row-major order.
    nodes: Vec<(u32, u32)>,
    /// Node id per cell, -1 for decided cells.
    node_at: Grid<i32>,
    /// CSR offsets into `edges`, length `nodes + 1`.
    adj_off: Vec<u32>,
    edges: Vec<Edge>,
    /// CSR offsets into `aid_pairs`, length `nodes + 1`.
    aid_off: Vec<u32>,
    /// Detection-aiding entries: flat cell indices of the column bridge
    /// `(u, j)` and the row bridge `(i, v)` for each aiding cell `(u, v)`.
    aid_pairs: Vec<(u32, u32)>,
}

impl DetectionGraph {
    /// Build the graph from refined labels.
    pub fn build(labels: &Grid<Label>) -> Self {
        let rows = labels.rows();
        let cols = labels.cols();

        let mut nodes = Vec::new();
        let mut node_at = Grid::filled(rows, cols, -1i32);
        for ((i, j), &l) in labels.enumerate() {
            if l == Label::Uncertain {
                node_at[(i, j)] = nodes.len() as i32;
                nodes.push((i as u32, j as u32));
            }
        }

        // Uncertain cells per row and per column, ascending.
        let mut unc_in_row: Vec<Vec<u32>> = vec![Vec::new(); rows];
        let mut unc_in_col: Vec<Vec<u32>> = vec![Vec::new(); cols];
        for &(i, j) in &nodes {
            unc_in_row[i as usize].push(j);
            unc_in_col[j as usize].push(i);
        }

        let mut adj_off = Vec::with_capacity(nodes.len() + 1);
        let mut edges: Vec<Edge> = Vec::new();
        let mut aid_off = Vec::with_capacity(nodes.len() + 1);
        let mut aid_pairs: Vec<(u32, u32)> = Vec::new();
        adj_off.push(0);
        aid_off.push(0);

        let cell = |i: u32, j: u32| i * cols as u32 + j;

        for &(i, j) in &nodes {
            // Ascending (u, v) keeps neighbor lists sorted by node id.
            for &u in &unc_in_col[j as usize] {
                if u == i {
                    continue;
                }
                for &v in &unc_in_row[i as usize] {
                    if v == j {
                        continue;
                    }
                    let target = node_at[(u as usize, v as usize)];
                    if target >= 0 {
                        edges.push(Edge {
                            nbr: target as u32,
                            rev: u32::MAX, // patched below
                            nbr_cell: cell(u, v),
                            row_bridge: cell(i, v),
                            col_bridge: cell(u, j),
                        });
                    }
                    if labels[(u as usize, v as usize)] == Label::High {
                        aid_pairs.push((cell(u, j), cell(i, v)));
                    }
                }
            }
            adj_off.push(edges.len() as u32);
            aid_off.push(aid_pairs.len() as u32);
        }

        // Patch reverse-edge pointers: neighbor lists are sorted by node id,
        // so the reverse edge is found by binary search in the target's list.
        let mut graph = Self {
            rows,
            cols,
            nodes,
            node_at,
            adj_off,
            edges,
            aid_off,
            aid_pairs,
        };
        for a in 0..graph.nodes.len() {
            let (start, end) = graph.adj_range(a);
            for e in start..end {
                let b = graph.edges[e].nbr as usize;
                let (bs, be) = graph.adj_range(b);
                let pos = graph.edges[bs..be]
                    .binary_search_by_key(&(a as u32), |edge| edge.nbr)
                    .expect("diagonal relation must be symmetric");
                graph.edges[e].rev = (bs + pos) as u32;
            }
        }
        graph
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn node_cell(&self, node: usize) -> (usize, usize) {
        let (i, j) = self.nodes[node];
        (i as usize, j as usize)
    }

    /// Flat cell index of a node.
    #[inline]
    pub fn node_flat(&self, node: usize) -> usize {
        let (i, j) = self.nodes[node];
        i as usize * self.cols + j as usize
    }

    /// Node id at a cell, if the cell is uncertain.
    #[inline]
    pub fn node_id(&self, i: usize, j: usize) -> Option<usize> {
        let id = self.node_at[(i, j)];
        (id >= 0).then_some(id as usize)
    }

    #[inline]
    pub fn adj_range(&self, node: usize) -> (usize, usize) {
        (self.adj_off[node] as usize, self.adj_off[node + 1] as usize)
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Diagonal partners of a node.
    #[inline]
    pub fn partners(&self, node: usize) -> &[Edge] {
        let (s, e) = self.adj_range(node);
        &self.edges[s..e]
    }

    /// Detection-aiding bridge pairs of a node.
    #[inline]
    pub fn aiders(&self, node: usize) -> &[(u32, u32)] {
        let (s, e) = (self.aid_off[node] as usize, self.aid_off[node + 1] as usize);
        &self.aid_pairs[s..e]
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Diagonal set of a node as zero-based cell coordinates (for tests and
    /// diagnostics).
    pub fn diagonal_set(&self, node: usize) -> Vec<(usize, usize)> {
        self.partners(node)
            .iter()
            .map(|e| {
                let c = e.nbr_cell as usize;
                (c / self.cols, c % self.cols)
            })
            .collect()
    }

    /// Aiding set of a node as zero-based cell coordinates of the aiding
    /// (confident-high) cells.
    pub fn aiding_set(&self, node: usize) -> Vec<(usize, usize)> {
        let (i, _) = self.node_cell(node);
        self.aiders(node)
            .iter()
            .map(|&(col_bridge, row_bridge)| {
                // Aiding cell sits at (row of column bridge, col of row bridge).
                let u = col_bridge as usize / self.cols;
                let v = row_bridge as usize % self.cols;
                debug_assert_ne!(u, i);
                (u, v)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::labels::{pre_detect, refine_definite_low, Label};
    use super::*;
    use crate::channel::{ChannelParams, NoiseModel};
    use crate::rng::substream;
    use rand::Rng;

    /// The worked 5x5 example: eight uncertain cells survive refinement.
    /// One-based coordinates: (1,3),(1,5),(2,1),(2,3),(2,5),(4,1),(4,3),(4,5).
    fn worked_example_labels() -> Grid<Label> {
        let p = ChannelParams::standard(5, 5, 0.001, 40.0, NoiseModel::Gaussian).unwrap();
        let mut y = Grid::filled(5, 5, 1000.0f64);
        for &(i, j) in &[(0, 2), (0, 4), (1, 0), (1, 2), (1, 4), (3, 0), (3, 2), (3, 4)] {
            y[(i, j)] = 100.0;
        }
        refine_definite_low(&pre_detect(&y, &p), false)
    }

    #[test]
    fn worked_example_has_eight_uncertain_cells() {
        let labels = worked_example_labels();
        let count = labels.iter().filter(|&&l| l == Label::Uncertain).count();
        assert_eq!(count, 8);
    }

    #[test]
    fn worked_example_diagonal_sets() {
        let labels = worked_example_labels();
        let graph = DetectionGraph::build(&labels);
        assert_eq!(graph.node_count(), 8);

        // Node (4,5) one-based = (3,4) zero-based.
        let node = graph.node_id(3, 4).unwrap();
        let mut d = graph.diagonal_set(node);
        d.sort_unstable();
        // One-based {(1,3),(2,1),(2,3)} = zero-based {(0,2),(1,0),(1,2)}.
        assert_eq!(d, vec![(0, 2), (1, 0), (1, 2)]);

        // Node (1,3) one-based = (0,2) zero-based: partners (2,5) and (4,5).
        let node = graph.node_id(0, 2).unwrap();
        let mut d = graph.diagonal_set(node);
        d.sort_unstable();
        assert_eq!(d, vec![(1, 4), (3, 4)]);
    }

    #[test]
    fn no_uncertain_cells_empty_graph() {
        let labels = Grid::filled(4, 4, Label::High);
        let graph = DetectionGraph::build(&labels);
        assert_eq!(graph.node_count(), 0);
        assert_eq!(graph.edge_count(), 0);
    }

    fn random_labels(rng: &mut impl Rng, rows: usize, cols: usize) -> Grid<Label> {
        let mut labels = Grid::filled(rows, cols, Label::High);
        for l in labels.as_mut_slice() {
            let x: f64 = rng.gen();
            *l = if x < 0.45 {
                Label::Uncertain
            } else if x < 0.55 {
                Label::Low
            } else {
                Label::High
            };
        }
        labels
    }

    /// Brute-force diagonal set straight from the membership conditions.
    fn diagonal_brute(labels: &Grid<Label>, i: usize, j: usize) -> Vec<(usize, usize)> {
        let mut d = Vec::new();
        for u in 0..labels.rows() {
            for v in 0..labels.cols() {
                if u != i
                    && v != j
                    && labels[(u, v)] == Label::Uncertain
                    && labels[(u, j)] == Label::Uncertain
                    && labels[(i, v)] == Label::Uncertain
                {
                    d.push((u, v));
                }
            }
        }
        d
    }

    /// Brute-force aiding set: confident-high diagonals with uncertain bridges.
    fn aiding_brute(labels: &Grid<Label>, i: usize, j: usize) -> Vec<(usize, usize)> {
        let mut z = Vec::new();
        for u in 0..labels.rows() {
            for v in 0..labels.cols() {
                if u != i
                    && v != j
                    && labels[(u, v)] == Label::High
                    && labels[(u, j)] == Label::Uncertain
                    && labels[(i, v)] == Label::Uncertain
                {
                    z.push((u, v));
                }
            }
        }
        z
    }

    #[test]
    fn diagonal_and_aiding_sets_match_brute_force() {
        let mut rng = substream(31, &[0]);
        for _ in 0..50 {
            let labels = random_labels(&mut rng, 8, 8);
            let graph = DetectionGraph::build(&labels);
            for node in 0..graph.node_count() {
                let (i, j) = graph.node_cell(node);
                let mut d = graph.diagonal_set(node);
                d.sort_unstable();
                assert_eq!(d, diagonal_brute(&labels, i, j));
                let mut z = graph.aiding_set(node);
                z.sort_unstable();
                assert_eq!(z, aiding_brute(&labels, i, j));
            }
        }
    }

    #[test]
    fn edges_are_symmetric_with_consistent_reverses() {
        let mut rng = substream(32, &[0]);
        for _ in 0..50 {
            let labels = random_labels(&mut rng, 7, 9);
            let graph = DetectionGraph::build(&labels);
            for node in 0..graph.node_count() {
                let (s, e) = graph.adj_range(node);
                for idx in s..e {
                    let edge = graph.edges()[idx];
                    let back = graph.edges()[edge.rev as usize];
                    assert_eq!(back.nbr as usize, node, "reverse edge must point back");
                    assert_eq!(back.rev as usize, idx);
                    // The bridges swap roles across the reverse edge.
                    assert_eq!(back.row_bridge, edge.col_bridge);
                    assert_eq!(back.col_bridge, edge.row_bridge);
                }
            }
        }
    }
}
