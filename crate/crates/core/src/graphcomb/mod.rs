//! Simple graphs with bitset adjacency, subgraph counts, the triangle and
//! 4-clique union lemmas, exact independence number, and random-graph bounds.

mod random_graphs;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numkernel::size_error;

pub use random_graphs::{gnm_isolated_bound, gnm_triangles_bound, gnp_bound, gnp_constant, GnpKind};

/// Largest graph handled by [`independence_number`].
pub const MIS_MAX_N: usize = 30;

/// Undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Graph { n, words, adj: vec![0; n * words] }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.set_edge(u, v);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            g.set_edge(u, (u + 1) % n);
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            if !g.add_edge(u, v)? {
                return Err(Error::Domain(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(g)
    }

    /// Graph whose edges are the set bits of `mask` over the pairs `(u, v)`,
    /// `u < v`, in lexicographic order.
    pub fn from_pair_mask(n: usize, mask: u64) -> Self {
        let mut g = Graph::empty(n);
        let mut bit = 0;
        for u in 0..n {
            for v in u + 1..n {
                if mask >> bit & 1 == 1 {
                    g.set_edge(u, v);
                }
                bit += 1;
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn row(&self, u: usize) -> &[u64] {
        &self.adj[u * self.words..(u + 1) * self.words]
    }

    pub(crate) fn set_edge(&mut self, u: usize, v: usize) {
        self.adj[u * self.words + v / 64] |= 1 << (v % 64);
        self.adj[v * self.words + u / 64] |= 1 << (u % 64);
    }

    /// Adds an edge; returns false if it was already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        if u >= self.n || v >= self.n {
            return Err(Error::Domain(format!("edge ({u}, {v}) out of range for n = {}", self.n)));
        }
        if u == v {
            return Err(Error::Domain(format!("self-loop at {u}")));
        }
        let fresh = !self.has_edge(u, v);
        self.set_edge(u, v);
        Ok(fresh)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.has_edge(u, v))
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Number of common neighbours of `u` and `v` with index above `above`.
    fn common_above(&self, rows: &[&[u64]], above: usize) -> usize {
        let mut count = 0;
        for w in 0..self.words {
            let mut word = u64::MAX;
            for r in rows {
                word &= r[w];
            }
            let lo = w * 64;
            if above + 1 > lo {
                let skip = above + 1 - lo;
                word = if skip >= 64 { 0 } else { word & (u64::MAX << skip) };
            }
            count += word.count_ones() as usize;
        }
        count
    }

    fn has_common(&self, rows: &[&[u64]]) -> bool {
        (0..self.words).any(|w| rows.iter().fold(u64::MAX, |acc, r| acc & r[w]) != 0)
    }

    pub fn count_isolated(&self) -> usize {
        (0..self.n).filter(|&u| self.row(u).iter().all(|w| *w == 0)).count()
    }

    pub fn count_triangles(&self) -> usize {
        let mut total = 0;
        for (u, v) in self.edges() {
            total += self.common_above(&[self.row(u), self.row(v)], v);
        }
        total
    }

    pub fn count_4cliques(&self) -> usize {
        let mut total = 0;
        for (u, v) in self.edges() {
            for w in v + 1..self.n {
                if self.has_edge(u, w) && self.has_edge(v, w) {
                    total += self.common_above(&[self.row(u), self.row(v), self.row(w)], w);
                }
            }
        }
        total
    }

    /// Edge-list text: header `n <count>` then one `u v` per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("n {}\n", self.n);
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
        let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
        let n: usize = header
            .strip_prefix('n')
            .map(str::trim)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(hl, format!("expected `n <count>`, got `{header}`")))?;
        let mut g = Graph::empty(n);
        for (line, l) in lines {
            let mut it = l.split_whitespace().map(str::parse::<usize>);
            let (Some(Ok(u)), Some(Ok(v)), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err(line, format!("expected `u v`, got `{l}`")));
            };
            match g.add_edge(u, v) {
                Ok(true) => {}
                Ok(false) => return Err(parse_err(line, format!("duplicate edge ({u}, {v})"))),
                Err(e) => return Err(parse_err(line, e.to_string())),
            }
        }
        Ok(g)
    }
}

/// `(j, r)`: the number of triangles and the number of edges lying on at
/// least one triangle. Always `r (n-2) >= 3 j`.
pub fn triangle_union_edges(g: &Graph) -> (usize, usize) {
    let r = g
        .edges()
        .into_iter()
        .filter(|&(u, v)| g.has_common(&[g.row(u), g.row(v)]))
        .count();
    (g.count_triangles(), r)
}

/// `(k, r)`: the number of 4-cliques and the number of triangles lying in at
/// least one 4-clique. Always `r (n-3) >= 4 k`.
pub fn clique4_union_triangles(g: &Graph) -> (usize, usize) {
    let mut r = 0;
    for (u, v) in g.edges() {
        for w in v + 1..g.n {
            if g.has_edge(u, w) && g.has_edge(v, w) && g.has_common(&[g.row(u), g.row(v), g.row(w)]) {
                r += 1;
            }
        }
    }
    (g.count_4cliques(), r)
}

/// Exact size of a maximum independent set, by branch and bound.
pub fn independence_number(g: &Graph) -> Result<usize> {
    if g.n > MIS_MAX_N {
        return Err(size_error(g.n, MIS_MAX_N));
    }
    if g.n == 0 {
        return Ok(0);
    }
    let nb: Vec<u64> = (0..g.n).map(|u| g.row(u)[0]).collect();
    let all = if g.n == 64 { u64::MAX } else { (1u64 << g.n) - 1 };
    let mut best = greedy_independent(&nb, all);
    mis_branch(&nb, all, 0, &mut best);
    Ok(best)
}

fn greedy_independent(nb: &[u64], mut cand: u64) -> usize {
    let mut size = 0;
    while cand != 0 {
        let v = min_degree_vertex(nb, cand).0;
        cand &= !(nb[v] | 1 << v);
        size += 1;
    }
    size
}

fn min_degree_vertex(nb: &[u64], cand: u64) -> (usize, u32) {
    let mut best = (usize::MAX, u32::MAX);
    let mut rest = cand;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let d = (nb[v] & cand).count_ones();
        if d < best.1 {
            best = (v, d);
        }
    }
    best
}

fn mis_branch(nb: &[u64], cand: u64, size: usize, best: &mut usize) {
    if cand == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + cand.count_ones() as usize <= *best {
        return;
    }
    let (v, d) = min_degree_vertex(nb, cand);
    if d <= 1 {
        // some maximum independent set contains a vertex of degree <= 1
        mis_branch(nb, cand & !(nb[v] | 1 << v), size + 1, best);
        return;
    }
    // some maximum independent set contains v or one of its neighbours
    let mut choices = (nb[v] & cand) | 1 << v;
    while choices != 0 {
        let u = choices.trailing_zeros() as usize;
        choices &= choices - 1;
        mis_branch(nb, cand & !(nb[u] | 1 << u), size + 1, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_on_small_graphs() {
        let e = Graph::empty(7);
        assert_eq!((e.count_isolated(), e.count_triangles()), (7, 0));
        let k5 = Graph::complete(5);
        assert_eq!((k5.count_triangles(), k5.count_4cliques()), (10, 5));
        assert_eq!(k5.edge_count(), 10);
    }

    #[test]
    fn counts_cross_word_boundaries() {
        let k70 = Graph::complete(70);
        assert_eq!(k70.count_triangles(), 70 * 69 * 68 / 6);
        assert_eq!(k70.count_4cliques(), 70 * 69 * 68 * 67 / 24);
        let mut g = Graph::empty(130);
        g.add_edge(3, 100).unwrap();
        g.add_edge(100, 129).unwrap();
        g.add_edge(3, 129).unwrap();
        assert_eq!(g.count_triangles(), 1);
        assert_eq!(g.count_isolated(), 127);
    }

    #[test]
    fn union_lemmas_tight_cases() {
        assert_eq!(triangle_union_edges(&Graph::complete(4)), (4, 6));
        assert_eq!(clique4_union_triangles(&Graph::complete(5)), (5, 10));
        assert_eq!(triangle_union_edges(&Graph::cycle(6)), (0, 0));
        assert_eq!(clique4_union_triangles(&Graph::cycle(6)), (0, 0));
    }

    #[test]
    fn independence_numbers() {
        assert_eq!(independence_number(&Graph::empty(9)).unwrap(), 9);
        assert_eq!(independence_number(&Graph::complete(9)).unwrap(), 1);
        assert_eq!(independence_number(&Graph::cycle(7)).unwrap(), 3);
        assert!(independence_number(&Graph::empty(31)).is_err());
    }

    #[test]
    fn text_round_trip() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        assert_eq!(Graph::from_text(&g.to_text()).unwrap(), g);
        assert!(Graph::from_text("n 3\n0 0\n").is_err());
        assert!(Graph::from_text("n 3\n0 1\n1 0\n").is_err());
        assert!(matches!(Graph::from_text("x 3\n"), Err(Error::Parse { line: 1, .. })));
    }
}
