//! The elliptic stable envelope of the dual variety X'.
//!
//! X' is the type-A quiver variety whose torus fixed points are Young
//! diagrams λ in the rectangle R_{n,k}. Chern roots `x_□` are attached to
//! the boxes of the rectangle; at the fixed point λ they restrict to
//! `a_1 ħ^{j−1}` on λ and `a_2 ħ^{n−k−i+1}` on λ̄.
//!
//! The envelope of λ is
//!
//! ```text
//! Stab'(λ) = Σ_{σ} σ·( S_λ(x) · Σ_{t} W(t) · Σ_{t̄} W(t̄) )
//! ```
//!
//! where σ permutes the Chern roots within each diagonal, S_λ is the
//! Kähler-independent product and W are the elliptic tree weights, with t
//! running over λ-trees and t̄ over λ̄-trees.
//!
//! Everything is evaluated on logarithms; box indices refer to
//! [`GrassData::cells`] order.

use crate::cx::{rel_diff, Cx};
use crate::envelope_x::{permutations, RestrictionMatrix};
use crate::error::{Error, Result};
use crate::limit::{stable_limit, LimitConfig, LimitValue};
use crate::rect_combinatorics::{
    bj, box_functions, enumerate_trees, lambda_trees, BoxData, Cell, GrassData, LShapeRule, Side, Subset, Tree,
    YoungDiagram,
};
use crate::sampling::LogSampler;
use crate::theta_core::{EllipticParams, Monomial, SymbolTable, VirtualChar};

/// Logarithms of the equivariant (a_1, a_2, ħ) and Kähler (z_1 … z_{n−1},
/// z_{a_1}, z_{a_2}) parameters of X'.
#[derive(Clone, Debug, PartialEq)]
pub struct XpParams {
    pub g: GrassData,
    pub a1: Cx,
    pub a2: Cx,
    pub hbar: Cx,
    /// log z_1 … log z_{n−1}.
    pub z: Vec<Cx>,
    /// Auxiliary log z_{a_1}, log z_{a_2}; zero by default.
    pub za: [Cx; 2],
}

impl XpParams {
    pub fn new(g: GrassData, a1: Cx, a2: Cx, hbar: Cx, z: Vec<Cx>) -> Self {
        assert_eq!(z.len(), g.n - 1);
        let p = hbar.prec();
        XpParams { g, a1, a2, hbar, z, za: [Cx::zero(p), Cx::zero(p)] }
    }

    pub fn random(g: GrassData, sampler: &mut LogSampler) -> Self {
        let a1 = sampler.next_cx();
        let a2 = sampler.next_cx();
        let hbar = sampler.next_cx();
        let z = sampler.next_vec(g.n - 1);
        XpParams::new(g, a1, a2, hbar, z)
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        XpParams {
            g: self.g,
            a1: self.a1.with_prec(prec),
            a2: self.a2.with_prec(prec),
            hbar: self.hbar.with_prec(prec),
            z: self.z.iter().map(|c| c.with_prec(prec)).collect(),
            za: [self.za[0].with_prec(prec), self.za[1].with_prec(prec)],
        }
    }

    /// log z_c for the diagonal c = 1..n−1.
    pub fn z(&self, c: i64) -> &Cx {
        &self.z[c as usize - 1]
    }

    pub fn symbol_table(&self) -> SymbolTable {
        let mut t = SymbolTable::new()
            .with("a1", self.a1.clone())
            .with("a2", self.a2.clone())
            .with("hbar", self.hbar.clone())
            .with("za1", self.za[0].clone())
            .with("za2", self.za[1].clone());
        for c in 1..self.g.n {
            t.set(format!("z{c}"), self.z[c - 1].clone());
        }
        t
    }

    /// log φ^λ_□: `a_1 + (j−1)ħ` on λ, `a_2 + (n−k−i+1)ħ` on λ̄.
    pub fn fixed_point_log(&self, lam: &YoungDiagram, c: &Cell) -> Cx {
        if lam.contains(c) {
            &self.a1 + &self.hbar.scale_int(c.j as i64 - 1)
        } else {
            &self.a2 + &self.hbar.scale_int((self.g.m() - c.i + 1) as i64)
        }
    }

    /// Chern-root logs of the fixed point λ, in cell order.
    pub fn fixed_point_logs(&self, lam: &YoungDiagram) -> Vec<Cx> {
        self.g.cells().iter().map(|c| self.fixed_point_log(lam, c)).collect()
    }
}

/// N'^− and N'^+ at λ:
/// `Σ_m (a_1/a_2) ħ^{2k−n+p_m−2m−1}` and `Σ_m (a_2/a_1) ħ^{−2k+n−p_m+2m}`, p = bj(λ).
pub fn normal_chars_xprime(g: &GrassData, lam: &YoungDiagram) -> Result<(VirtualChar, VirtualChar)> {
    let p = bj(lam, g)?;
    let (n, k) = (g.n as i64, g.k as i64);
    let mut minus = VirtualChar::new();
    let mut plus = VirtualChar::new();
    for (l0, &pm) in p.elems().iter().enumerate() {
        let (pm, m) = (pm as i64, l0 as i64 + 1);
        minus.push(1, Monomial::var("a1", 1).times("a2", -1).times("hbar", 2 * k - n + pm - 2 * m - 1));
        plus.push(1, Monomial::var("a2", 1).times("a1", -1).times("hbar", -2 * k + n - pm + 2 * m));
    }
    Ok((minus, plus))
}

/// Θ(N'^−_λ).
pub fn theta_normal_minus(g: &GrassData, lam: &YoungDiagram, prm: &XpParams, ell: &EllipticParams) -> Result<Cx> {
    let (minus, _) = normal_chars_xprime(g, lam)?;
    ell.theta_of_char(&minus, &prm.symbol_table())
}

/// Sign relating the diagonal entry T'_{λ,λ} to Θ(N'^−_λ): (−1)^{k(n−k)}.
pub fn diagonal_sign_xprime(g: &GrassData) -> i64 {
    if (g.k * g.m()) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Closed form of T'_{λ,λ}: (−1)^{k(n−k)} Θ(N'^−_λ).
pub fn diagonal_xprime(g: &GrassData, lam: &YoungDiagram, prm: &XpParams, ell: &EllipticParams) -> Result<Cx> {
    let t = theta_normal_minus(g, lam, prm, ell)?;
    Ok(if diagonal_sign_xprime(g) < 0 { -t } else { t })
}

/// `x[plus] − x[minus] + c`, with box indices taken through a permutation.
#[derive(Clone, Debug)]
struct Lin {
    plus: Option<usize>,
    minus: Option<usize>,
    c: Cx,
}

impl Lin {
    fn eval(&self, x: &[Cx], perm: &[usize]) -> Cx {
        let mut r = self.c.clone();
        if let Some(p) = self.plus {
            r += &x[perm[p]];
        }
        if let Some(m) = self.minus {
            r -= &x[perm[m]];
        }
        r
    }
}

/// Ratio of theta products with linear arguments.
#[derive(Clone, Debug, Default)]
struct ThetaRatio {
    num: Vec<Lin>,
    den: Vec<Lin>,
}

impl ThetaRatio {
    fn eval(&self, ell: &EllipticParams, x: &[Cx], perm: &[usize], what: &str) -> Result<Cx> {
        let mut num = ell.one();
        for l in &self.num {
            num *= ell.theta(&l.eval(x, perm));
        }
        let mut den = ell.one();
        for l in &self.den {
            den *= ell.theta(&l.eval(x, perm));
        }
        if den.abs_f64() < ell.pole_threshold() {
            return Err(Error::PoleAtArgument(what.to_string()));
        }
        Ok(&num / &den)
    }
}

/// A tree's weight factors `f(arg_e, Z_e)`, root first.
#[derive(Clone, Debug)]
struct TreeFactors {
    negative: bool,
    /// (argument, Z, θ(Z)).
    factors: Vec<(Lin, Cx, Cx)>,
}

impl TreeFactors {
    /// With `bare` false each factor is φ(arg, Z) and the κ sign is applied;
    /// with `bare` true each factor is θ(arg + Z)/θ(Z).
    fn eval(&self, ell: &EllipticParams, x: &[Cx], perm: &[usize], bare: bool) -> Result<Cx> {
        let mut r = ell.one();
        for (lin, z, tz) in &self.factors {
            let a = lin.eval(x, perm);
            let mut den = tz.clone();
            if !bare {
                den *= ell.theta(&a);
            }
            if den.abs_f64() < ell.pole_threshold() {
                return Err(Error::PoleAtArgument(format!("tree weight factor at {a}")));
            }
            r *= &ell.theta(&(&a + z)) / &den;
        }
        if self.negative && !bare {
            r = -r;
        }
        Ok(r)
    }
}

/// Per-λ data for evaluating Stab'(λ) and its refined form.
#[derive(Clone, Debug)]
pub struct XprimeEnvelope {
    g: GrassData,
    lam: YoungDiagram,
    prm: XpParams,
    ell: EllipticParams,
    rule: LShapeRule,
    cells: Vec<Cell>,
    info: Vec<BoxData>,
    inside: Vec<bool>,
    fixed: Vec<Cx>,
    perms: Vec<Vec<usize>>,
    bar_perms: Vec<Vec<usize>>,
    s_part: ThetaRatio,
    s_negative: bool,
    lam_trees: Vec<TreeFactors>,
    bar_trees: Vec<Tree>,
    bar_tree_factors: Vec<TreeFactors>,
}

/// Products over the diagonals of all within-diagonal permutations, as
/// full index maps. The first group varies slowest; each group in
/// lexicographic order.
fn product_permutations(len: usize, groups: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![(0..len).collect::<Vec<usize>>()];
    for grp in groups {
        let ps = permutations(grp.len());
        let mut next = Vec::with_capacity(out.len() * ps.len());
        for base in &out {
            for p in &ps {
                let mut m = base.clone();
                for (slot, &src) in grp.iter().zip(p) {
                    m[*slot] = grp[src];
                }
                next.push(m);
            }
        }
        out = next;
    }
    out
}

impl XprimeEnvelope {
    pub fn new(
        g: &GrassData,
        lam: &YoungDiagram,
        prm: &XpParams,
        ell: &EllipticParams,
        rule: LShapeRule,
    ) -> Result<Self> {
        let prec = ell.precision_bits();
        let prm = prm.with_prec(prec);
        let cells = g.cells();
        let info: Vec<BoxData> = cells.iter().map(|c| box_functions(lam, g, c)).collect();
        let inside: Vec<bool> = cells.iter().map(|c| lam.contains(c)).collect();
        let fixed = prm.fixed_point_logs(lam);

        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); g.n - 1];
        let mut bar_groups: Vec<Vec<usize>> = vec![Vec::new(); g.n - 1];
        for (idx, inf) in info.iter().enumerate() {
            groups[inf.content as usize - 1].push(idx);
            if !inside[idx] {
                bar_groups[inf.content as usize - 1].push(idx);
            }
        }
        let perms = product_permutations(cells.len(), &groups);
        let bar_perms = product_permutations(cells.len(), &bar_groups);

        let mut env = XprimeEnvelope {
            g: *g,
            lam: lam.clone(),
            prm,
            ell: ell.clone(),
            rule,
            cells,
            info,
            inside,
            fixed,
            perms,
            bar_perms,
            s_part: ThetaRatio::default(),
            s_negative: (g.k * g.m()) % 2 == 1,
            lam_trees: Vec::new(),
            bar_trees: Vec::new(),
            bar_tree_factors: Vec::new(),
        };
        env.s_part = env.build_s_part();
        env.lam_trees = lambda_trees(lam).iter().map(|t| env.tree_factors(t)).collect::<Result<_>>()?;
        env.bar_trees = enumerate_trees(&lam.complement_cells(g), Side::Complement, Cell::new(g.m(), g.k), rule);
        env.bar_tree_factors = env.bar_trees.iter().map(|t| env.tree_factors(t)).collect::<Result<_>>()?;
        Ok(env)
    }

    pub fn grass(&self) -> &GrassData {
        &self.g
    }

    pub fn diagram(&self) -> &YoungDiagram {
        &self.lam
    }

    pub fn params(&self) -> &XpParams {
        &self.prm
    }

    pub fn elliptic(&self) -> &EllipticParams {
        &self.ell
    }

    pub fn rule(&self) -> LShapeRule {
        self.rule
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Number of terms (permutations × tree pairs) in the full formula.
    pub fn term_count(&self) -> usize {
        self.perms.len() * self.lam_trees.len() * self.bar_tree_factors.len()
    }

    pub fn complement_trees(&self) -> &[Tree] {
        &self.bar_trees
    }

    fn index(&self, c: &Cell) -> usize {
        (c.i - 1) * self.g.k + (c.j - 1)
    }

    fn zero(&self) -> Cx {
        self.ell.zero()
    }

    fn lin(&self, plus: Option<usize>, minus: Option<usize>, c: Cx) -> Lin {
        Lin { plus, minus, c }
    }

    fn content(&self, i: usize) -> i64 {
        self.info[i].content
    }

    fn rho(&self, i: usize) -> i64 {
        self.info[i].rho
    }

    /// Z(S) = Σ_{□∈S} (−log z_{c_□} − v(□) log ħ).
    fn z_sum(&self, boxes: &[Cell]) -> Cx {
        let mut r = self.zero();
        for b in boxes {
            let i = self.index(b);
            r -= self.prm.z(self.content(i));
            r -= &self.prm.hbar.scale_int(self.info[i].v);
        }
        r
    }

    fn build_s_part(&self) -> ThetaRatio {
        let (n, k) = (self.g.n as i64, self.g.k as i64);
        let (a1, a2, h) = (&self.prm.a1, &self.prm.a2, &self.prm.hbar);
        let mut s = ThetaRatio::default();
        let nb = self.cells.len();
        for i in 0..nb {
            let c = self.content(i);
            if c == k {
                if self.inside[i] {
                    s.num.push(self.lin(Some(i), None, -a1));
                } else {
                    s.num.push(self.lin(None, Some(i), a1 - h));
                }
            }
            if c == n - k {
                s.num.push(self.lin(None, Some(i), a2 + h));
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                if self.content(i) + 1 == self.content(j) {
                    if self.rho(i) > self.rho(j) {
                        s.num.push(self.lin(Some(j), Some(i), h.clone()));
                    } else {
                        s.num.push(self.lin(Some(i), Some(j), self.zero()));
                    }
                }
                if self.content(i) == self.content(j) && self.rho(i) > self.rho(j) {
                    s.den.push(self.lin(Some(i), Some(j), self.zero()));
                    s.den.push(self.lin(Some(i), Some(j), -h));
                }
            }
        }
        s
    }

    fn tree_factors(&self, t: &Tree) -> Result<TreeFactors> {
        let Some(root) = t.root else {
            return Ok(TreeFactors { negative: false, factors: Vec::new() });
        };
        let mut factors = Vec::with_capacity(t.vertices.len());
        let mut push = |lin: Lin, z: Cx| -> Result<()> {
            let tz = self.ell.theta(&z);
            if tz.abs_f64() < self.ell.pole_threshold() {
                return Err(Error::NonGenericParameters(format!("Kähler sum {z} of a subtree is trivial")));
            }
            factors.push((lin, z, tz));
            Ok(())
        };
        let r = self.index(&root);
        push(self.lin(None, Some(r), self.fixed[r].clone()), self.z_sum(&t.vertices))?;
        for (tail, head) in &t.edges {
            let (a, b) = (self.index(tail), self.index(head));
            let sub = t.subtree(head)?;
            push(self.lin(Some(a), Some(b), &self.fixed[b] - &self.fixed[a]), self.z_sum(&sub))?;
        }
        Ok(TreeFactors { negative: t.kappa() % 2 == 1, factors })
    }

    /// S_λ at the Chern roots `x` (cell order).
    pub fn s_part(&self, x: &[Cx]) -> Result<Cx> {
        let id: Vec<usize> = (0..self.cells.len()).collect();
        self.s_part_perm(x, &id)
    }

    fn s_part_perm(&self, x: &[Cx], perm: &[usize]) -> Result<Cx> {
        let v = self.s_part.eval(&self.ell, x, perm, "S denominator")?;
        Ok(if self.s_negative { -v } else { v })
    }

    /// W(t)·W(t̄) for one tree pair at unpermuted `x`.
    pub fn tree_weight(&self, t: &Tree, tbar: &Tree, x: &[Cx]) -> Result<Cx> {
        let id: Vec<usize> = (0..self.cells.len()).collect();
        let w1 = self.tree_factors(t)?.eval(&self.ell, x, &id, false)?;
        let w2 = self.tree_factors(tbar)?.eval(&self.ell, x, &id, false)?;
        Ok(&w1 * &w2)
    }

    /// Stab'(λ) at the Chern roots `x` (cell order).
    pub fn eval(&self, x: &[Cx]) -> Result<Cx> {
        assert_eq!(x.len(), self.cells.len());
        let mut tot = self.zero();
        for perm in &self.perms {
            let s = self.s_part_perm(x, perm)?;
            let mut wl = self.zero();
            for t in &self.lam_trees {
                wl += t.eval(&self.ell, x, perm, false)?;
            }
            let mut wb = self.zero();
            for t in &self.bar_tree_factors {
                wb += t.eval(&self.ell, x, perm, false)?;
            }
            tot += &(&s * &wl) * &wb;
        }
        Ok(tot)
    }

    /// ε(λ) = (−1)^{m(λ)} · (−1)^{#pairs I,J∈λ with c_I+1=c_J, not adjacent}.
    pub fn epsilon_sign(&self) -> i64 {
        let lam_cells = self.lam.cells();
        let m = crate::rect_combinatorics::l_shape_count_formula(&lam_cells, self.g.k);
        let mut s = if m % 2 == 0 { 1 } else { -1 };
        for a in &lam_cells {
            for b in &lam_cells {
                if a.content(self.g.k) + 1 == b.content(self.g.k) && !a.is_adjacent(b) {
                    s = -s;
                }
            }
        }
        s
    }

    /// Θ(Ñ'^−_λ) with its sign (−1)^{k(n−k) − [λ ≠ ∅]}.
    pub fn theta_tilde_n(&self, x: &[Cx]) -> Result<Cx> {
        let (n, k) = (self.g.n as i64, self.g.k as i64);
        let (a1, a2, h) = (&self.prm.a1, &self.prm.a2, &self.prm.hbar);
        let nb = self.cells.len();
        let mut r = ThetaRatio::default();
        for i in 0..nb {
            let c = self.content(i);
            if c == k && !self.inside[i] {
                r.num.push(self.lin(None, Some(i), a1 - h));
            }
            if c == n - k && self.inside[i] {
                r.num.push(self.lin(None, Some(i), a2 + h));
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                if self.content(i) + 1 == self.content(j) {
                    if self.inside[i] && !self.inside[j] {
                        r.num.push(self.lin(Some(j), Some(i), h.clone()));
                    }
                    if !self.inside[i] && self.inside[j] {
                        r.num.push(self.lin(Some(i), Some(j), self.zero()));
                    }
                }
                if self.content(i) == self.content(j) && self.inside[i] && !self.inside[j] {
                    r.den.push(self.lin(Some(i), Some(j), self.zero()));
                    r.den.push(self.lin(Some(i), Some(j), -h));
                }
            }
        }
        let id: Vec<usize> = (0..nb).collect();
        let v = r.eval(&self.ell, x, &id, "Θ(Ñ) denominator")?;
        let odd = (self.g.k * self.g.m() + usize::from(!self.lam.is_empty())) % 2 == 1;
        Ok(if odd { -v } else { v })
    }

    /// N_{λ̄}/D_{λ̄} for the permutation `perm`.
    fn nd_bar(&self, x: &[Cx], perm: &[usize]) -> Result<Cx> {
        let n_k = self.g.m() as i64;
        let (a2, h) = (&self.prm.a2, &self.prm.hbar);
        let top = self.index(&Cell::new(self.g.m(), self.g.k));
        let bar: Vec<usize> = (0..self.cells.len()).filter(|&i| !self.inside[i]).collect();
        let mut r = ThetaRatio::default();
        for &i in &bar {
            if self.content(i) == n_k && i != top {
                r.num.push(self.lin(None, Some(i), a2 + h));
            }
            for &j in &bar {
                if self.content(i) + 1 == self.content(j) && !self.cells[i].is_adjacent(&self.cells[j]) {
                    if self.rho(i) > self.rho(j) {
                        r.num.push(self.lin(Some(j), Some(i), h.clone()));
                    } else {
                        r.num.push(self.lin(Some(i), Some(j), self.zero()));
                    }
                }
                if self.content(i) == self.content(j) && self.rho(i) > self.rho(j) {
                    r.den.push(self.lin(Some(i), Some(j), self.zero()));
                    if self.rho(i) > self.rho(j) + 2 {
                        r.den.push(self.lin(Some(i), Some(j), -h));
                    }
                }
            }
        }
        r.eval(&self.ell, x, perm, "D denominator")
    }

    fn r_block(&self, t: &Tree, x: &[Cx], perm: &[usize]) -> Result<Cx> {
        let h = &self.prm.hbar;
        let bar: Vec<usize> = (0..self.cells.len()).filter(|&i| !self.inside[i]).collect();
        let mut r = ThetaRatio::default();
        for &i in &bar {
            for &j in &bar {
                let (ci, cj) = (&self.cells[i], &self.cells[j]);
                if self.content(i) + 1 == self.content(j) && ci.is_adjacent(cj) && !t.has_edge(ci, cj) {
                    if self.rho(i) == self.rho(j) + 1 {
                        r.num.push(self.lin(Some(j), Some(i), h.clone()));
                    } else {
                        r.num.push(self.lin(Some(i), Some(j), self.zero()));
                    }
                }
                if self.content(i) == self.content(j) && self.rho(i) == self.rho(j) + 2 {
                    r.den.push(self.lin(Some(i), Some(j), -h));
                }
            }
        }
        r.eval(&self.ell, x, perm, "R denominator")
    }

    /// R(t̄)·W(t̄) of the refined formula at unpermuted `x`, for any λ̄-tree.
    pub fn refined_tree_term(&self, tbar: &Tree, x: &[Cx]) -> Result<Cx> {
        let id: Vec<usize> = (0..self.cells.len()).collect();
        let w = self.tree_factors(tbar)?.eval(&self.ell, x, &id, true)?;
        Ok(&self.r_block(tbar, x, &id)? * &w)
    }

    /// ε(λ) Θ(Ñ'^−_λ) Σ_{σ ∈ S_λ̄, t̄} (N^σ/D^σ) R^σ(t̄) W^σ(t̄).
    ///
    /// This agrees with [`Self::eval`] after restriction to fixed points
    /// (it is an identity of classes, not of functions of `x`).
    pub fn eval_refined(&self, x: &[Cx]) -> Result<Cx> {
        let mut tot = self.zero();
        for perm in &self.bar_perms {
            let nd = self.nd_bar(x, perm)?;
            let mut acc = self.zero();
            for (t, tf) in self.bar_trees.iter().zip(&self.bar_tree_factors) {
                let w = tf.eval(&self.ell, x, perm, true)?;
                acc += &self.r_block(t, x, perm)? * &w;
            }
            tot += &nd * &acc;
        }
        let mut r = &self.theta_tilde_n(x)? * &tot;
        if self.epsilon_sign() < 0 {
            r = -r;
        }
        Ok(r)
    }

    /// N_λ/D_λ, the λ-box analogue of the refined numerator and denominator.
    pub fn nd_lambda(&self, x: &[Cx]) -> Result<Cx> {
        let k = self.g.k as i64;
        let (a1, h) = (&self.prm.a1, &self.prm.hbar);
        let root = self.index(&Cell::new(1, 1));
        let ins: Vec<usize> = (0..self.cells.len()).filter(|&i| self.inside[i]).collect();
        let mut r = ThetaRatio::default();
        for &i in &ins {
            if self.content(i) == k && i != root {
                r.num.push(self.lin(Some(i), None, -a1));
            }
            for &j in &ins {
                if self.content(i) + 1 == self.content(j) && !self.cells[i].is_adjacent(&self.cells[j]) {
                    if self.rho(i) > self.rho(j) {
                        r.num.push(self.lin(Some(j), Some(i), h.clone()));
                    } else {
                        r.num.push(self.lin(Some(i), Some(j), self.zero()));
                    }
                }
                if self.content(i) == self.content(j) && self.rho(i) > self.rho(j) {
                    r.den.push(self.lin(Some(i), Some(j), self.zero()));
                    if self.rho(i) > self.rho(j) + 2 {
                        r.den.push(self.lin(Some(i), Some(j), -h));
                    }
                }
            }
        }
        let id: Vec<usize> = (0..self.cells.len()).collect();
        r.eval(&self.ell, x, &id, "D_λ denominator")
    }

    /// Number of pairs I, J ∈ λ with c_I + 1 = c_J that are not adjacent.
    pub fn nonadjacent_pairs(&self) -> usize {
        let lam_cells = self.lam.cells();
        let k = self.g.k;
        lam_cells
            .iter()
            .flat_map(|a| lam_cells.iter().map(move |b| (a, b)))
            .filter(|(a, b)| a.content(k) + 1 == b.content(k) && !a.is_adjacent(b))
            .count()
    }
}

/// Stab'(λ) at Chern roots `x` (cell order) with the default L-shape rule.
pub fn stab_xprime_eval(
    g: &GrassData,
    lam: &YoungDiagram,
    x: &[Cx],
    prm: &XpParams,
    ell: &EllipticParams,
) -> Result<Cx> {
    XprimeEnvelope::new(g, lam, prm, ell, LShapeRule::default())?.eval(x)
}

/// The refined form of Stab'(λ) at `x`.
pub fn stab_xprime_refined(
    g: &GrassData,
    lam: &YoungDiagram,
    x: &[Cx],
    prm: &XpParams,
    ell: &EllipticParams,
) -> Result<Cx> {
    XprimeEnvelope::new(g, lam, prm, ell, LShapeRule::default())?.eval_refined(x)
}

/// Which formula a restriction is computed from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Formula {
    #[default]
    Full,
    Refined,
}

fn generic_err<'a>(lam: &'a YoungDiagram, mu: &'a YoungDiagram) -> impl Fn(Error) -> Error + 'a {
    move |e| match e {
        Error::PoleAtArgument(s) => Error::NonGenericParameters(format!("T'_{{{lam},{mu}}}: {s}")),
        other => other,
    }
}

/// T'_{λ,μ} from a prepared envelope (already at working precision).
pub fn restrict_with(
    env: &XprimeEnvelope,
    mu: &YoungDiagram,
    formula: Formula,
    cfg: &LimitConfig,
) -> Result<LimitValue> {
    let base = env.params().fixed_point_logs(mu);
    let r = match formula {
        Formula::Full => stable_limit(|x| env.eval(x), &base, cfg),
        Formula::Refined => stable_limit(|x| env.eval_refined(x), &base, cfg),
    };
    r.map_err(generic_err(env.diagram(), mu))
}

/// The working-precision envelope used for restrictions.
pub fn envelope_for_limits(
    g: &GrassData,
    lam: &YoungDiagram,
    prm: &XpParams,
    ell: &EllipticParams,
    cfg: &LimitConfig,
) -> Result<XprimeEnvelope> {
    let ellg = ell.with_guard_bits(cfg.guard_bits);
    XprimeEnvelope::new(g, lam, prm, &ellg, LShapeRule::default())
}

/// T'_{λ,μ} = Stab'(λ)|_{x = φ^μ}, as a cross-validated limit.
pub fn restrict_xprime(
    g: &GrassData,
    lam: &YoungDiagram,
    mu: &YoungDiagram,
    prm: &XpParams,
    ell: &EllipticParams,
    cfg: &LimitConfig,
) -> Result<Cx> {
    let env = envelope_for_limits(g, lam, prm, ell, cfg)?;
    Ok(restrict_with(&env, mu, Formula::Full, cfg)?.value.with_prec(ell.precision_bits()))
}

/// log(u_j/u_i) in terms of the Kähler parameters of X', through the mirror
/// identification z_l = u_l/u_{l+1} · ħ_X^{s_l} with ħ_X = ħ^{-1} and
/// s_l = +1 (l < k), −1 (l > n−k), 0 otherwise.
pub fn u_ratio_log(prm: &XpParams, i: usize, j: usize) -> Cx {
    let g = &prm.g;
    let hx = -&prm.hbar;
    let (lo, hi, sign) = if i < j { (i, j, 1) } else { (j, i, -1) };
    let mut r = prm.hbar.scale_int(0);
    for l in lo..hi {
        let s = if l < g.k {
            1
        } else if l > g.m() {
            -1
        } else {
            0
        };
        // log(u_l/u_{l+1}) = z_l − s_l ħ_X
        r += &(prm.z(l as i64) - &hx.scale_int(s));
    }
    // r = log(u_lo/u_hi)
    if sign > 0 {
        -r
    } else {
        r
    }
}

/// Θ'_λ = ∏_{i∈p,j∉p,i<j} θ(u_j/u_i) ∏_{i∈p,j∉p,i>j} θ(u_j/(u_i ħ_X)), p = bj(λ),
/// written in the Kähler parameters of X'.
pub fn theta_prefactor_xprime(g: &GrassData, lam: &YoungDiagram, prm: &XpParams, ell: &EllipticParams) -> Result<Cx> {
    let p = bj(lam, g)?;
    let hx = -&prm.hbar;
    let mut r = ell.one();
    for &i in p.elems() {
        for j in p.complement(g.n) {
            let w = u_ratio_log(prm, i, j);
            r *= if i < j { ell.theta(&w) } else { ell.theta(&(&w - &hx)) };
        }
    }
    Ok(r)
}

/// Θ'_λ · T'_{λ,μ}.
pub fn bold_restrict_xprime(
    g: &GrassData,
    lam: &YoungDiagram,
    mu: &YoungDiagram,
    prm: &XpParams,
    ell: &EllipticParams,
    cfg: &LimitConfig,
) -> Result<Cx> {
    Ok(&theta_prefactor_xprime(g, lam, prm, ell)? * &restrict_xprime(g, lam, mu, prm, ell, cfg)?)
}

/// Θ'_λ · Stab'(λ) at arbitrary Chern roots.
pub fn bold_stab_xprime(
    g: &GrassData,
    lam: &YoungDiagram,
    x: &[Cx],
    prm: &XpParams,
    ell: &EllipticParams,
) -> Result<Cx> {
    Ok(&theta_prefactor_xprime(g, lam, prm, ell)? * &stab_xprime_eval(g, lam, x, prm, ell)?)
}

/// T^{1/2}X' at the fixed point μ:
/// `a_1^{-1} V_k + a_2 V*_{n−k} + Σ_{i=1}^{n−2} V_{i+1} V*_i − Σ_{i=1}^{n−1} V*_i V_i`,
/// with V_c the sum of the Chern roots on diagonal c.
pub fn polarization_xprime(g: &GrassData, mu: &YoungDiagram) -> VirtualChar {
    let roots = crate::rect_combinatorics::chern_at_fixed_point(mu, g);
    let mut diag: Vec<Vec<Monomial>> = vec![Vec::new(); g.n];
    for (c, m) in &roots {
        diag[c.content(g.k) as usize].push(m.clone());
    }
    let mut ch = VirtualChar::new();
    let a1inv = Monomial::var("a1", -1);
    let a2 = Monomial::var("a2", 1);
    for m in &diag[g.k] {
        ch.push(1, a1inv.mul(m));
    }
    for m in &diag[g.m()] {
        ch.push(1, a2.mul(&m.inv()));
    }
    for i in 1..=g.n - 2 {
        for a in &diag[i + 1] {
            for b in &diag[i] {
                ch.push(1, a.mul(&b.inv()));
            }
        }
    }
    for i in 1..g.n {
        for a in &diag[i] {
            for b in &diag[i] {
                ch.push(-1, b.inv().mul(a));
            }
        }
    }
    ch.simplified()
}

/// D^λ_1, D^λ_2: the a_1- and a_2-degrees of det ind_λ, where ind_λ is the
/// part of T^{1/2}X'|_λ with positive a_2-weight.
pub fn index_degrees_xprime(g: &GrassData, lam: &YoungDiagram) -> [i64; 2] {
    let d = polarization_xprime(g, lam).filter_by_exponent_sign("a2", 1).det();
    [d.exponent("a1"), d.exponent("a2")]
}

/// The reference function U'_{λ,μ} whose quasiperiods in a_1, a_2 match
/// those of T'_{λ,μ}.
///
/// Θ(T^{1/2}X'|_μ) · ∏_□ φ(φ^λ_□, z_{c_□}^{-1}) / φ(φ^μ_□, z_{c_□}^{-1}) · ∏_i φ(a_i, z_{a_i}^{-1} ħ^{D_i}) / φ(a_i, z_{a_i}^{-1}).
/// Characters of weight zero in the polarization are constants and are
/// dropped; for log z_{a_i} = 0 the last ratio is replaced by φ(a_i, ħ^{D_i})
/// (or 1 when D_i = 0), which has the same quasiperiods.
pub fn u_function_xprime(
    g: &GrassData,
    lam: &YoungDiagram,
    mu: &YoungDiagram,
    prm: &XpParams,
    ell: &EllipticParams,
) -> Result<Cx> {
    let tbl = prm.symbol_table();
    let pol = polarization_xprime(g, mu);
    let mut nontrivial = VirtualChar::new();
    for (s, m) in pol.terms() {
        if !m.is_one() {
            nontrivial.push(*s, m.clone());
        }
    }
    let mut r = ell.theta_of_char(&nontrivial, &tbl)?;
    for c in g.cells() {
        let mz = -prm.z(c.content(g.k));
        r *= ell.phi(&prm.fixed_point_log(lam, &c), &mz)?;
        r /= ell.phi(&prm.fixed_point_log(mu, &c), &mz)?;
    }
    let d = index_degrees_xprime(g, lam);
    for (ai, (a, za)) in [(&prm.a1, &prm.za[0]), (&prm.a2, &prm.za[1])].into_iter().enumerate() {
        let shifted = &prm.hbar.scale_int(d[ai]) - za;
        if za.is_zero() {
            if d[ai] != 0 {
                r *= ell.phi(a, &shifted)?;
            }
        } else {
            r *= ell.phi(a, &shifted)?;
            r /= ell.phi(a, &-za)?;
        }
    }
    Ok(r)
}

/// A parameter of X' shifted by q in quasiperiod checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XpVariable {
    A1,
    A2,
    /// z_c, 1 ≤ c ≤ n−1.
    Z(usize),
}

/// Relative mismatch between T'_{λ,μ}(v·q)/T'_{λ,μ}(v) and the same ratio of
/// U'_{λ,μ}, for the variable v. The fixed point moves with a_1, a_2.
pub fn quasiperiod_check_xprime(
    g: &GrassData,
    lam: &YoungDiagram,
    mu: &YoungDiagram,
    prm: &XpParams,
    ell: &EllipticParams,
    cfg: &LimitConfig,
    v: XpVariable,
) -> Result<f64> {
    let mut sh = prm.clone();
    match v {
        XpVariable::A1 => sh.a1 += ell.log_q(),
        XpVariable::A2 => sh.a2 += ell.log_q(),
        XpVariable::Z(c) => sh.z[c - 1] += ell.log_q(),
    }
    let t = &restrict_xprime(g, lam, mu, &sh, ell, cfg)? / &restrict_xprime(g, lam, mu, prm, ell, cfg)?;
    let u = &u_function_xprime(g, lam, mu, &sh, ell)? / &u_function_xprime(g, lam, mu, prm, ell)?;
    Ok(rel_diff(&t, &u, 1e-30))
}

/// The full matrix T'_{λ,μ} (or Θ'_λ T'_{λ,μ} when `bold`), rows and
/// columns in the diagram order of [`GrassData::diagrams`].
pub fn restriction_matrix_xprime(
    g: &GrassData,
    prm: &XpParams,
    ell: &EllipticParams,
    cfg: &LimitConfig,
    bold: bool,
) -> Result<RestrictionMatrix> {
    let pts = g.diagrams();
    let mut entries = Vec::with_capacity(pts.len());
    for lam in &pts {
        let env = envelope_for_limits(g, lam, prm, ell, cfg)?;
        let pre = if bold { theta_prefactor_xprime(g, lam, prm, ell)? } else { ell.one() };
        let mut row = Vec::with_capacity(pts.len());
        for mu in &pts {
            let v = restrict_with(&env, mu, Formula::Full, cfg)?.value.with_prec(ell.precision_bits());
            row.push(&pre * &v);
        }
        entries.push(row);
    }
    Ok(RestrictionMatrix {
        labels: pts.iter().map(|d| d.to_string()).collect(),
        entries,
        q: ell.q().clone(),
        precision_bits: ell.precision_bits(),
        seed: Some(cfg.seed),
        epsilon: Some(cfg.epsilon),
    })
}

/// The subset labelling λ under the bijection.
pub fn dual_label(g: &GrassData, lam: &YoungDiagram) -> Subset {
    bj(lam, g).expect("diagram fits the rectangle")
}
