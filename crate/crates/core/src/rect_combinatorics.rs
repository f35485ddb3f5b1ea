//! Fixed-point and tree combinatorics on the rectangle R_{n,k}.
//!
//! Boxes are `(i, j)` with `1 ≤ i ≤ n−k` and `1 ≤ j ≤ k`; the content
//! (diagonal number) is `c = i − j + k`. A Young diagram λ is stored as
//! `parts[i−1] = λ_i`, the number of boxes `(i, 1), …, (i, λ_i)`, so
//! `λ_1 ≥ λ_2 ≥ … ≥ λ_{n−k}` and each `λ_i ≤ k`. The complement λ̄ is the set
//! of remaining boxes of the rectangle; rotated by 180° it is again a diagram.
//!
//! Fixed points of T*Gr(k,n) are k-subsets of {1..n}; the bijection [`bj`]
//! reads them off the boundary path of λ.

use crate::error::{Error, Result};
use crate::theta_core::Monomial;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GrassData {
    pub n: usize,
    pub k: usize,
}

impl GrassData {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || n < 2 * k {
            return Err(Error::InvalidNK { n, k });
        }
        Ok(GrassData { n, k })
    }

    /// Width n − k of the rectangle (the number of columns i).
    pub fn m(&self) -> usize {
        self.n - self.k
    }

    /// Number of fixed points, n choose k.
    pub fn num_fixed_points(&self) -> usize {
        let mut r = 1usize;
        for t in 0..self.k {
            r = r * (self.n - t) / (t + 1);
        }
        r
    }

    /// All boxes of R_{n,k}, ordered by i then j.
    pub fn cells(&self) -> Vec<Cell> {
        let mut v = Vec::with_capacity(self.m() * self.k);
        for i in 1..=self.m() {
            for j in 1..=self.k {
                v.push(Cell { i, j });
            }
        }
        v
    }

    /// Number of boxes on each diagonal c = 1..n−1 (index c−1).
    pub fn diagonal_dims(&self) -> Vec<usize> {
        let mut d = vec![0; self.n - 1];
        for c in self.cells() {
            d[c.content(self.k) as usize - 1] += 1;
        }
        d
    }

    /// k-subsets in lexicographic order.
    pub fn subsets(&self) -> Vec<Subset> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (1..=self.k).collect();
        loop {
            out.push(Subset(cur.clone()));
            let mut t = self.k;
            while t > 0 && cur[t - 1] == self.n - self.k + t {
                t -= 1;
            }
            if t == 0 {
                break;
            }
            cur[t - 1] += 1;
            for s in t..self.k {
                cur[s] = cur[s - 1] + 1;
            }
        }
        out
    }

    /// Diagrams in the order matching [`GrassData::subsets`] under the bijection.
    pub fn diagrams(&self) -> Vec<YoungDiagram> {
        self.subsets().iter().map(|p| bj_inv(p, self).expect("lexicographic subsets are valid")).collect()
    }
}

/// Strictly increasing k-subset of {1..n}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(pub Vec<usize>);

impl Subset {
    pub fn new(g: &GrassData, mut elems: Vec<usize>) -> Result<Self> {
        elems.sort_unstable();
        let ok = elems.len() == g.k
            && elems.windows(2).all(|w| w[0] < w[1])
            && elems.iter().all(|&e| e >= 1 && e <= g.n);
        if !ok {
            return Err(Error::InvalidSubset(elems));
        }
        Ok(Subset(elems))
    }

    pub fn elems(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn complement(&self, n: usize) -> Vec<usize> {
        (1..=n).filter(|i| !self.contains(*i)).collect()
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", s.join(","))
    }
}

/// A box `(i, j)` of the rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
}

impl Cell {
    pub const fn new(i: usize, j: usize) -> Self {
        Cell { i, j }
    }

    pub fn content(&self, k: usize) -> i64 {
        self.i as i64 - self.j as i64 + k as i64
    }

    pub fn is_adjacent(&self, o: &Cell) -> bool {
        self.i.abs_diff(o.i) + self.j.abs_diff(o.j) == 1
    }

    fn offset(&self, di: i64, dj: i64) -> Option<Cell> {
        let i = self.i as i64 + di;
        let j = self.j as i64 + dj;
        (i >= 1 && j >= 1).then(|| Cell { i: i as usize, j: j as usize })
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct YoungDiagram {
    parts: Vec<usize>,
}

impl YoungDiagram {
    /// Builds λ from `λ_1 ≥ λ_2 ≥ …`, padding with zeros to length n − k.
    pub fn new(g: &GrassData, parts: &[usize]) -> Result<Self> {
        let bad = parts.len() > g.m()
            || parts.windows(2).any(|w| w[0] < w[1])
            || parts.iter().any(|&p| p > g.k);
        if bad {
            return Err(Error::DiagramOutOfRectangle(parts.to_vec()));
        }
        let mut v = parts.to_vec();
        v.resize(g.m(), 0);
        Ok(YoungDiagram { parts: v })
    }

    pub fn empty(g: &GrassData) -> Self {
        YoungDiagram { parts: vec![0; g.m()] }
    }

    pub fn full(g: &GrassData) -> Self {
        YoungDiagram { parts: vec![g.k; g.m()] }
    }

    /// λ_i for i = 1..n−k, including trailing zeros.
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Nonzero parts only.
    pub fn trimmed(&self) -> Vec<usize> {
        self.parts.iter().copied().filter(|&p| p > 0).collect()
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    pub fn contains(&self, c: &Cell) -> bool {
        c.i >= 1 && c.i <= self.parts.len() && c.j >= 1 && c.j <= self.parts[c.i - 1]
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut v = Vec::new();
        for (i0, &p) in self.parts.iter().enumerate() {
            for j in 1..=p {
                v.push(Cell { i: i0 + 1, j });
            }
        }
        v
    }

    /// Boxes of λ̄ in rectangle coordinates, ordered by i then j.
    pub fn complement_cells(&self, g: &GrassData) -> Vec<Cell> {
        g.cells().into_iter().filter(|c| !self.contains(c)).collect()
    }

    /// λ̄ rotated by 180°, as a diagram in its own right.
    pub fn complement(&self, g: &GrassData) -> YoungDiagram {
        let m = g.m();
        YoungDiagram { parts: (0..m).map(|i| g.k - self.parts[m - 1 - i]).collect() }
    }

    /// λ ⊆ μ.
    pub fn is_subset_of(&self, mu: &YoungDiagram) -> bool {
        self.parts.iter().zip(&mu.parts).all(|(a, b)| a <= b)
    }

    /// A hook has at most one box with both neighbours (i+1, j) and (i, j+1).
    pub fn is_hook(&self) -> bool {
        self.parts.iter().skip(1).all(|&p| p <= 1)
    }
}

impl fmt::Display for YoungDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.trimmed();
        if t.is_empty() {
            return write!(f, "[]");
        }
        let s: Vec<String> = t.iter().map(|e| e.to_string()).collect();
        write!(f, "[{}]", s.join(","))
    }
}

/// Steps of the boundary path: `true` for a step "up" (one per column i),
/// `false` for a step "down" (one per row position j). There are n steps.
fn boundary_steps(lam: &YoungDiagram, g: &GrassData) -> Vec<bool> {
    let mut steps = Vec::with_capacity(g.n);
    let mut prev = g.k;
    for &p in lam.parts() {
        steps.extend(std::iter::repeat(false).take(prev - p));
        steps.push(true);
        prev = p;
    }
    steps.extend(std::iter::repeat(false).take(prev));
    steps
}

/// The bijection between diagrams and k-subsets: positions of the "down"
/// segments of the boundary path.
pub fn bj(lam: &YoungDiagram, g: &GrassData) -> Result<Subset> {
    if lam.parts.len() != g.m() || lam.parts.iter().any(|&p| p > g.k) {
        return Err(Error::DiagramOutOfRectangle(lam.parts.clone()));
    }
    let steps = boundary_steps(lam, g);
    Ok(Subset(steps.iter().enumerate().filter(|(_, up)| !**up).map(|(t, _)| t + 1).collect()))
}

pub fn bj_inv(p: &Subset, g: &GrassData) -> Result<YoungDiagram> {
    let p = Subset::new(g, p.0.clone())?;
    let mut parts = Vec::with_capacity(g.m());
    let mut downs = 0;
    for t in 1..=g.n {
        if p.contains(t) {
            downs += 1;
        } else {
            parts.push(g.k - downs);
        }
    }
    Ok(YoungDiagram { parts })
}

/// Symbol exponents `(a_1, a_2, ħ)` of the Chern root of a box at the fixed
/// point λ: `a_1 ħ^{j−1}` on λ, `a_2 ħ^{n−k−i+1}` on λ̄.
pub fn chern_exponents(lam: &YoungDiagram, g: &GrassData, c: &Cell) -> (i64, i64, i64) {
    if lam.contains(c) {
        (1, 0, c.j as i64 - 1)
    } else {
        (0, 1, (g.m() - c.i + 1) as i64)
    }
}

/// Chern roots at the fixed point λ as monomials in `a1`, `a2`, `hbar`.
pub fn chern_at_fixed_point(lam: &YoungDiagram, g: &GrassData) -> BTreeMap<Cell, Monomial> {
    g.cells()
        .into_iter()
        .map(|c| {
            let (e1, e2, eh) = chern_exponents(lam, g, &c);
            (c, Monomial::one().times("a1", e1).times("a2", e2).times("hbar", eh))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoxData {
    pub content: i64,
    pub rho: i64,
    pub beta1: i64,
    pub beta2: i64,
    pub v: i64,
}

/// Content, ρ, β⁽¹⁾, β⁽²⁾ and v = β⁽¹⁾ + β⁽²⁾ of a box relative to λ.
///
/// β⁽¹⁾ is +1 where the boundary path has a peak at the box's diagonal,
/// −1 at a valley, and is only nonzero for boxes of λ. β⁽²⁾ is +1 below
/// diagonal k, −1 above diagonal n−k.
pub fn box_functions(lam: &YoungDiagram, g: &GrassData, c: &Cell) -> BoxData {
    let content = c.content(g.k);
    let inside = lam.contains(c);
    let s = (c.i + c.j) as i64;
    let rho = if inside { s } else { -s };
    let beta2 = if content < g.k as i64 {
        1
    } else if content > (g.n - g.k) as i64 {
        -1
    } else {
        0
    };
    let mut beta1 = 0;
    if inside && content >= 1 && content <= g.n as i64 - 1 {
        let steps = boundary_steps(lam, g);
        let (a, b) = (steps[content as usize - 1], steps[content as usize]);
        beta1 = match (a, b) {
            (true, false) => 1,
            (false, true) => -1,
            _ => 0,
        };
    }
    BoxData { content, rho, beta1, beta2, v: beta1 + beta2 }
}

/// Comparison of subsets in the order p ≼ q ⟺ p_i ≤ q_i for all i.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Less,
    Greater,
    Equal,
    Incomparable,
}

pub fn partial_order(p: &Subset, q: &Subset) -> Order {
    let le = p.0.iter().zip(&q.0).all(|(a, b)| a <= b);
    let ge = p.0.iter().zip(&q.0).all(|(a, b)| a >= b);
    match (le, ge) {
        (true, true) => Order::Equal,
        (true, false) => Order::Less,
        (false, true) => Order::Greater,
        _ => Order::Incomparable,
    }
}

/// p ≼ q.
pub fn precedes_or_equal(p: &Subset, q: &Subset) -> bool {
    matches!(partial_order(p, q), Order::Less | Order::Equal)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// Trees on λ, rooted at (1, 1).
    Lambda,
    /// Trees on λ̄, rooted at (n−k, k).
    Complement,
}

/// Which edge pairs of each 2×2 square count as the L-shaped subgraph.
///
/// `Plain` uses `(i,j)–(i+1,j)–(i+1,j+1)` for the square with lower corner
/// `(i,j)` on either side. `Reflected` applies that definition in λ̄'s own
/// rotated coordinates, i.e. `(i+1,j+1)–(i,j+1)–(i,j)`. Both give 2^m trees
/// and the same envelope values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum LShapeRule {
    #[default]
    Plain,
    Reflected,
}

type Edge = (Cell, Cell);

fn undirected(a: Cell, b: Cell) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Spanning tree of a set of boxes, edges directed away from the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tree {
    pub side: Side,
    pub root: Option<Cell>,
    pub vertices: Vec<Cell>,
    /// `(tail, head)` in breadth-first order from the root.
    pub edges: Vec<Edge>,
}

impl Tree {
    pub fn empty(side: Side) -> Self {
        Tree { side, root: None, vertices: Vec::new(), edges: Vec::new() }
    }

    fn orient(side: Side, root: Cell, vertices: &[Cell], undirected_edges: &BTreeSet<Edge>) -> Option<Tree> {
        let mut adj: BTreeMap<Cell, Vec<Cell>> = vertices.iter().map(|c| (*c, Vec::new())).collect();
        for (a, b) in undirected_edges {
            adj.get_mut(a)?.push(*b);
            adj.get_mut(b)?.push(*a);
        }
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        let mut edges = Vec::with_capacity(vertices.len().saturating_sub(1));
        while let Some(c) = queue.pop_front() {
            for nb in &adj[&c] {
                if seen.insert(*nb) {
                    edges.push((c, *nb));
                    queue.push_back(*nb);
                }
            }
        }
        (seen.len() == vertices.len() && edges.len() + 1 == vertices.len() && undirected_edges.len() == edges.len())
            .then(|| Tree { side, root: Some(root), vertices: vertices.to_vec(), edges })
    }

    pub fn has_edge(&self, a: &Cell, b: &Cell) -> bool {
        self.edges.iter().any(|(t, h)| (t == a && h == b) || (t == b && h == a))
    }

    pub fn has_directed_edge(&self, tail: &Cell, head: &Cell) -> bool {
        self.edges.iter().any(|(t, h)| t == tail && h == head)
    }

    /// The boxes of the subtree `[c, t]` hanging from `c`.
    pub fn subtree(&self, c: &Cell) -> Result<Vec<Cell>> {
        if !self.vertices.contains(c) {
            return Err(Error::BoxNotInTree(c.i, c.j));
        }
        let mut out = vec![*c];
        let mut k = 0;
        while k < out.len() {
            let cur = out[k];
            for (t, h) in &self.edges {
                if *t == cur {
                    out.push(*h);
                }
            }
            k += 1;
        }
        Ok(out)
    }

    /// Number of edges with the "wrong" orientation: on λ, heads that step
    /// to smaller i or j; on λ̄, heads that step to larger i or j.
    pub fn kappa(&self) -> usize {
        self.edges
            .iter()
            .filter(|(t, h)| {
                let dec = h.i < t.i || h.j < t.j;
                match self.side {
                    Side::Lambda => dec,
                    Side::Complement => !dec,
                }
            })
            .count()
    }

    /// Checks the spanning-tree, adjacency and rooting invariants.
    pub fn validate(&self, g: &GrassData) -> bool {
        if self.vertices.is_empty() {
            return self.edges.is_empty() && self.root.is_none();
        }
        let want_root = match self.side {
            Side::Lambda => Cell::new(1, 1),
            Side::Complement => Cell::new(g.m(), g.k),
        };
        if self.root != Some(want_root) || !self.vertices.contains(&want_root) {
            return false;
        }
        let set: BTreeSet<Edge> = self.edges.iter().map(|(a, b)| undirected(*a, *b)).collect();
        if self.edges.iter().any(|(a, b)| !a.is_adjacent(b)) {
            return false;
        }
        Tree::orient(self.side, want_root, &self.vertices, &set).map(|t| t.edges == self.edges).unwrap_or(false)
    }
}

/// Pair (t, t̄) of a λ-tree and a λ̄-tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePair {
    pub t: Tree,
    pub tbar: Tree,
}

/// L-shaped subgraphs of a set of boxes: one pair of skeleton edges per
/// 2×2 square.
pub fn l_shapes(cells: &BTreeSet<Cell>, rule: LShapeRule) -> Vec<[Edge; 2]> {
    let mut out = Vec::new();
    for c in cells {
        let (i, j) = (c.i, c.j);
        let sq = [Cell::new(i + 1, j), Cell::new(i, j + 1), Cell::new(i + 1, j + 1)];
        if sq.iter().all(|s| cells.contains(s)) {
            let pair = match rule {
                LShapeRule::Plain => [
                    undirected(Cell::new(i, j), Cell::new(i + 1, j)),
                    undirected(Cell::new(i + 1, j), Cell::new(i + 1, j + 1)),
                ],
                LShapeRule::Reflected => [
                    undirected(Cell::new(i + 1, j + 1), Cell::new(i, j + 1)),
                    undirected(Cell::new(i, j + 1), Cell::new(i, j)),
                ],
            };
            out.push(pair);
        }
    }
    out
}

fn skeleton(cells: &BTreeSet<Cell>) -> BTreeSet<Edge> {
    let mut e = BTreeSet::new();
    for c in cells {
        for nb in [Cell::new(c.i + 1, c.j), Cell::new(c.i, c.j + 1)] {
            if cells.contains(&nb) {
                e.insert((*c, nb));
            }
        }
    }
    e
}

/// All trees obtained from the adjacency skeleton by deleting one edge of
/// every L-shaped subgraph, in canonical orientation. The first L-shape
/// varies slowest; within an L-shape the first listed edge is deleted first.
pub fn enumerate_trees(cells: &[Cell], side: Side, root: Cell, rule: LShapeRule) -> Vec<Tree> {
    if cells.is_empty() {
        return vec![Tree::empty(side)];
    }
    let set: BTreeSet<Cell> = cells.iter().copied().collect();
    let skel = skeleton(&set);
    let shapes = l_shapes(&set, rule);
    let m = shapes.len();
    let mut out = Vec::with_capacity(1 << m);
    for mask in 0..(1usize << m) {
        let mut e = skel.clone();
        for (l, pair) in shapes.iter().enumerate() {
            let bit = (mask >> (m - 1 - l)) & 1;
            e.remove(&pair[bit]);
        }
        let t = Tree::orient(side, root, cells, &e).expect("deleting one edge per L-shape leaves a spanning tree");
        out.push(t);
    }
    out
}

pub fn lambda_trees(lam: &YoungDiagram) -> Vec<Tree> {
    enumerate_trees(&lam.cells(), Side::Lambda, Cell::new(1, 1), LShapeRule::Plain)
}

pub fn complement_trees(lam: &YoungDiagram, g: &GrassData, rule: LShapeRule) -> Vec<Tree> {
    enumerate_trees(&lam.complement_cells(g), Side::Complement, Cell::new(g.m(), g.k), rule)
}

pub fn tree_pairs(lam: &YoungDiagram, g: &GrassData, rule: LShapeRule) -> Vec<TreePair> {
    let ts = lambda_trees(lam);
    let tbs = complement_trees(lam, g, rule);
    let mut out = Vec::with_capacity(ts.len() * tbs.len());
    for t in &ts {
        for tb in &tbs {
            out.push(TreePair { t: t.clone(), tbar: tb.clone() });
        }
    }
    out
}

/// Σ over diagonals of (number of boxes − 1), for a set of boxes.
pub fn l_shape_count_formula(cells: &[Cell], k: usize) -> usize {
    let mut per: BTreeMap<i64, usize> = BTreeMap::new();
    for c in cells {
        *per.entry(c.content(k)).or_insert(0) += 1;
    }
    per.values().map(|d| d - 1).sum()
}

/// Boxes of λ̄ whose lower-left neighbour (i−1, j−1) is not in λ̄.
pub fn on_boundary(lam: &YoungDiagram, g: &GrassData, c: &Cell) -> bool {
    match c.offset(-1, -1) {
        Some(d) => lam.contains(&d) || d.i > g.m() || d.j > g.k,
        None => true,
    }
}

/// Whether the involution of `tbar` at box `(c+1, d)` is defined.
///
/// Requires the box to lie off the top row j = k, the whole 2×2 square
/// `(c,d), (c+1,d), (c,d+1), (c+1,d+1)` to lie in λ̄, and exactly one of
/// δ₁ = (c+1,d+1)→(c+1,d), δ₂ = (c,d)→(c+1,d) to be an edge of the tree.
/// With `allow_boundary` the exclusion of boundary boxes is dropped.
pub fn involution_admissible(
    tbar: &Tree,
    at: &Cell,
    lam: &YoungDiagram,
    g: &GrassData,
    allow_boundary: bool,
) -> std::result::Result<(Cell, Cell), String> {
    if tbar.side != Side::Complement {
        return Err("involution acts on complement trees".into());
    }
    if at.i < 2 || at.j >= g.k {
        return Err("box is in the top row or the first column".into());
    }
    let (c, d) = (at.i - 1, at.j);
    let sq = [Cell::new(c, d), Cell::new(c + 1, d), Cell::new(c, d + 1), Cell::new(c + 1, d + 1)];
    if sq.iter().any(|s| lam.contains(s) || s.i > g.m() || s.j > g.k) {
        return Err("the 2×2 square is not contained in the complement".into());
    }
    if !allow_boundary && on_boundary(lam, g, at) {
        return Err("box lies on the boundary of the complement".into());
    }
    let d1 = tbar.has_directed_edge(&Cell::new(c + 1, d + 1), at);
    let d2 = tbar.has_directed_edge(&Cell::new(c, d), at);
    let d1u = tbar.has_edge(&Cell::new(c + 1, d + 1), at);
    let d2u = tbar.has_edge(&Cell::new(c, d), at);
    if d1 && !d2u {
        Ok((Cell::new(c + 1, d + 1), Cell::new(c, d)))
    } else if d2 && !d1u {
        Ok((Cell::new(c, d), Cell::new(c + 1, d + 1)))
    } else {
        Err("tree does not contain exactly one of the two edges into the box".into())
    }
}

/// The involution of a λ̄-tree at `(c+1, d)`: trade the edge
/// (c+1,d+1)→(c+1,d) for (c,d)→(c+1,d), or back.
pub fn involution(tbar: &Tree, at: &Cell, lam: &YoungDiagram, g: &GrassData, allow_boundary: bool) -> Result<Tree> {
    let (remove_tail, add_tail) = involution_admissible(tbar, at, lam, g, allow_boundary)
        .map_err(|why| Error::InvolutionUndefined(at.i, at.j, why))?;
    let mut e: BTreeSet<Edge> = tbar.edges.iter().map(|(a, b)| undirected(*a, *b)).collect();
    e.remove(&undirected(remove_tail, *at));
    e.insert(undirected(add_tail, *at));
    let root = tbar.root.expect("admissible trees are nonempty");
    Tree::orient(tbar.side, root, &tbar.vertices, &e)
        .ok_or_else(|| Error::InvolutionUndefined(at.i, at.j, "result is not a spanning tree".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, k: usize) -> GrassData {
        GrassData::new(n, k).unwrap()
    }

    #[test]
    fn rejects_small_n() {
        assert!(GrassData::new(3, 2).is_err());
        assert!(GrassData::new(4, 0).is_err());
    }

    #[test]
    fn bijection_on_large_example() {
        let g = g(10, 4);
        let lam = YoungDiagram::new(&g, &[4, 4, 4, 3, 3, 2]).unwrap();
        assert_eq!(bj(&lam, &g).unwrap().0, vec![4, 7, 9, 10]);
        assert_eq!(bj_inv(&Subset(vec![4, 7, 9, 10]), &g).unwrap(), lam);
    }

    #[test]
    fn ordered_lists_for_four_two() {
        let g = g(4, 2);
        let ds: Vec<Vec<usize>> = g.diagrams().iter().map(|d| d.trimmed()).collect();
        assert_eq!(ds, vec![vec![], vec![1], vec![1, 1], vec![2], vec![2, 1], vec![2, 2]]);
        let ss: Vec<Vec<usize>> = g.subsets().into_iter().map(|s| s.0).collect();
        assert_eq!(ss, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
    }

    #[test]
    fn empty_diagram_maps_to_initial_segment() {
        for (n, k) in [(2, 1), (5, 2), (8, 3)] {
            let g = g(n, k);
            assert_eq!(bj(&YoungDiagram::empty(&g), &g).unwrap().0, (1..=k).collect::<Vec<_>>());
        }
    }

    #[test]
    fn chern_roots() {
        let g8 = g(8, 3);
        let lam = YoungDiagram::new(&g8, &[3, 2]).unwrap();
        assert_eq!(chern_exponents(&lam, &g8, &Cell::new(1, 1)), (1, 0, 0));
        assert_eq!(chern_exponents(&lam, &g8, &Cell::new(3, 1)), (0, 1, 3));
        let full = YoungDiagram::full(&g8);
        for c in g8.cells() {
            assert_eq!(chern_exponents(&full, &g8, &c), (1, 0, c.j as i64 - 1));
        }
    }

    #[test]
    fn beta_worked_example() {
        let g = g(5, 2);
        let lam = YoungDiagram::new(&g, &[2, 2]).unwrap();
        let v = |i, j| box_functions(&lam, &g, &Cell::new(i, j)).v;
        assert_eq!([v(1, 1), v(1, 2), v(2, 1), v(2, 2), v(3, 1), v(3, 2)], [1, 1, 0, 1, -1, 0]);
        for c in lam.complement_cells(&g) {
            assert_eq!(box_functions(&lam, &g, &c).beta1, 0);
        }
        assert_eq!(Cell::new(1, 1).content(2), 2);
    }

    #[test]
    fn tree_counts_for_examples() {
        let g = g(5, 2);
        assert_eq!(lambda_trees(&YoungDiagram::new(&g, &[2, 2]).unwrap()).len(), 2);
        assert_eq!(lambda_trees(&YoungDiagram::new(&g, &[2, 1, 1]).unwrap()).len(), 1);
        let e = lambda_trees(&YoungDiagram::empty(&g));
        assert_eq!(e.len(), 1);
        assert!(e[0].vertices.is_empty());
    }

    #[test]
    fn worked_tree_edges() {
        let g = g(5, 2);
        let lam = YoungDiagram::new(&g, &[2, 2]).unwrap();
        let ts = lambda_trees(&lam);
        // One tree keeps (1,1)→(1,2), (1,1)→(2,1), (1,2)→(2,2); the other
        // keeps (2,1)→(2,2) instead of (1,2)→(2,2).
        let c = Cell::new;
        assert!(ts.iter().any(|t| t.has_directed_edge(&c(1, 1), &c(1, 2))
            && t.has_directed_edge(&c(1, 1), &c(2, 1))
            && t.has_directed_edge(&c(1, 2), &c(2, 2))));
        assert!(ts.iter().all(|t| t.validate(&g)));
        let t = &ts[0];
        assert_eq!(t.subtree(&c(1, 1)).unwrap().len(), 4);
        assert!(matches!(t.subtree(&c(3, 1)), Err(Error::BoxNotInTree(3, 1))));
    }

    #[test]
    fn kappa_orientation() {
        let g = g(4, 2);
        let lam = YoungDiagram::new(&g, &[1]).unwrap();
        assert_eq!(lambda_trees(&lam)[0].kappa(), 0);
        for t in complement_trees(&YoungDiagram::empty(&g), &g, LShapeRule::Plain) {
            // every λ̄-tree edge from the root (2,2) steps down or left
            assert_eq!(t.kappa(), t.edges.iter().filter(|(a, b)| b.i > a.i || b.j > a.j).count());
            assert!(t.validate(&g));
        }
    }

    #[test]
    fn order_examples() {
        assert_eq!(partial_order(&Subset(vec![3, 4]), &Subset(vec![1, 2])), Order::Greater);
        assert_eq!(partial_order(&Subset(vec![1, 4]), &Subset(vec![2, 3])), Order::Incomparable);
        assert_eq!(partial_order(&Subset(vec![2, 4]), &Subset(vec![2, 4])), Order::Equal);
    }

    #[test]
    fn complement_round_trip() {
        let g = g(7, 3);
        for d in g.diagrams() {
            let c = d.complement(&g);
            assert_eq!(c.complement(&g), d);
            assert_eq!(c.size() + d.size(), g.n * g.k - g.k * g.k);
        }
    }

    #[test]
    fn involution_on_three_by_three_rectangle() {
        let g = g(6, 3);
        let lam = YoungDiagram::empty(&g);
        let mut hits = 0;
        for t in complement_trees(&lam, &g, LShapeRule::Plain) {
            for at in lam.complement_cells(&g) {
                if let Ok(s) = involution(&t, &at, &lam, &g, false) {
                    hits += 1;
                    assert!(s.validate(&g));
                    assert_eq!(involution(&s, &at, &lam, &g, false).unwrap(), t);
                }
            }
        }
        assert!(hits > 0);
        let t0 = &complement_trees(&lam, &g, LShapeRule::Plain)[0];
        assert!(matches!(
            involution(t0, &Cell::new(2, 1), &lam, &g, false),
            Err(Error::InvolutionUndefined(2, 1, _))
        ));
    }
}
