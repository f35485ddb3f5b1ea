//! The mirror layer: the parameter identification κ between X and X', the
//! entrywise comparison of the two restriction matrices, the Mother function
//! (closed form for k = 1 and the general m̃ built from restriction data),
//! GKM gluing checks on both sides, and the tree-cancellation check.

use std::time::Instant;

use crate::cx::{rel_diff, Cx};
use crate::envelope_x::{bold_stab_x_eval, restrict_x, restriction_matrix_x, XParams};
use crate::envelope_xprime::{
    bold_restrict_xprime, bold_stab_xprime, restriction_matrix_xprime, u_ratio_log, XpParams, XprimeEnvelope,
};
use crate::error::{Error, Result};
use crate::limit::{limit_at_zero, LimitConfig};
use crate::rect_combinatorics::{
    bj, bj_inv, complement_trees, involution, involution_admissible, Cell, GrassData, LShapeRule, Subset, Tree,
    YoungDiagram,
};
use crate::sampling::LogSampler;
use crate::theta_core::{EllipticParams, SymbolTable};

/// s_l in z_l = u_l/u_{l+1} · ħ^{s_l}: +1 below k, −1 above n−k, 0 between.
fn hbar_shift(g: &GrassData, l: usize) -> i64 {
    if l < g.k {
        1
    } else if l > g.m() {
        -1
    } else {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KappaDirection {
    /// Equivariant and Kähler parameters of X to those of X'.
    XToXprime,
    XprimeToX,
}

/// The identification of the equivariant torus of one side with the Kähler
/// torus of the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KappaMap {
    pub g: GrassData,
    pub direction: KappaDirection,
}

impl KappaMap {
    pub fn new(g: GrassData, direction: KappaDirection) -> Self {
        KappaMap { g, direction }
    }

    /// Maps a fully assigned symbol table of the source side to the target
    /// side, log-additively.
    ///
    /// X → X': a_1 − a_2 = z + (k−1)ħ with a_2 = 0, ħ' = −ħ,
    /// z_l = u_l − u_{l+1} + s_l ħ, z_{a_i} = 0.
    /// X' → X: u_1 = 0 fixes the overall scale, then the same rules inverted;
    /// z_{u_i} = 0.
    pub fn apply(&self, tbl: &SymbolTable) -> Result<SymbolTable> {
        let g = &self.g;
        let mut out = SymbolTable::new();
        match self.direction {
            KappaDirection::XToXprime => {
                let h = tbl.get("hbar")?;
                let z = tbl.get("z")?;
                let u: Vec<&Cx> = (1..=g.n).map(|i| tbl.get(&format!("u{i}"))).collect::<Result<_>>()?;
                let zero = h.scale_int(0);
                out.set("a1", z + &h.scale_int(g.k as i64 - 1));
                out.set("a2", zero.clone());
                out.set("hbar", -h);
                out.set("za1", zero.clone());
                out.set("za2", zero);
                for l in 1..g.n {
                    out.set(format!("z{l}"), &(u[l - 1] - u[l]) + &h.scale_int(hbar_shift(g, l)));
                }
            }
            KappaDirection::XprimeToX => {
                let hp = tbl.get("hbar")?;
                let h = -hp;
                let a1 = tbl.get("a1")?;
                let a2 = tbl.get("a2")?;
                let mut u = h.scale_int(0);
                out.set("u1", u.clone());
                out.set("zu1", u.clone());
                for l in 1..g.n {
                    let zl = tbl.get(&format!("z{l}"))?;
                    u = &(&u - zl) + &h.scale_int(hbar_shift(g, l));
                    out.set(format!("u{}", l + 1), u.clone());
                    out.set(format!("zu{}", l + 1), h.scale_int(0));
                }
                out.set("z", &(a1 - a2) - &h.scale_int(g.k as i64 - 1));
                out.set("hbar", h);
            }
        }
        Ok(out)
    }
}

/// X' parameters matched to a draw of X parameters.
pub fn kappa_params(px: &XParams) -> XpParams {
    let g = px.g;
    let h = &px.hbar;
    let a1 = &px.z + &h.scale_int(g.k as i64 - 1);
    let a2 = Cx::zero(h.prec());
    let z = (1..g.n).map(|l| &(px.u(l) - px.u(l + 1)) + &h.scale_int(hbar_shift(&g, l))).collect();
    XpParams::new(g, a1, a2, -h, z)
}

/// X parameters matched to X' parameters, normalized by log u_1 = 0.
pub fn kappa_inverse(pp: &XpParams) -> XParams {
    let g = pp.g;
    let h = -&pp.hbar;
    let mut u = vec![h.scale_int(0)];
    for l in 1..g.n {
        let next = &(&u[l - 1] - pp.z(l as i64)) + &h.scale_int(hbar_shift(&g, l));
        u.push(next);
    }
    let z = &(&pp.a1 - &pp.a2) - &h.scale_int(g.k as i64 - 1);
    XParams::new(g, u, h, z)
}

/// Image of a cocharacter σ of the torus of X (u_i = t^{σ_i}) in the Kähler
/// torus of X': the exponents of z_1 … z_{n−1}.
pub fn chamber_image(sigma: &[i64]) -> Vec<i64> {
    sigma.windows(2).map(|w| w[0] - w[1]).collect()
}

/// The chamber σ = (1, 2, …, n) used for X.
pub fn standard_chamber(n: usize) -> Vec<i64> {
    (1..=n as i64).collect()
}

/// Shared parameter draw for both sides: X parameters from `seed`, X'
/// parameters through κ.
pub fn draw_params(g: GrassData, seed: u64, prec: u32) -> (XParams, XpParams) {
    let px = XParams::random(g, &mut LogSampler::new(seed, prec));
    let pp = kappa_params(&px);
    (px, pp)
}

#[derive(Clone, Debug)]
pub struct MirrorConfig {
    pub limit: LimitConfig,
    /// Largest accepted relative residual.
    pub tol: f64,
    /// Floor of the residual normalization.
    pub floor: f64,
}

impl Default for MirrorConfig {
    fn default() -> Self {
        MirrorConfig { limit: LimitConfig::default(), tol: 1e-10, floor: 1e-30 }
    }
}

#[derive(Clone, Debug)]
pub struct PairResidual {
    pub lambda: YoungDiagram,
    pub mu: YoungDiagram,
    pub p: Subset,
    pub q: Subset,
    /// T_{p,p} T'_{λ,μ}.
    pub lhs: Cx,
    /// T'_{μ,μ} T_{q,p}.
    pub rhs: Cx,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct MirrorReport {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub q: Cx,
    pub precision_bits: u32,
    pub limit: LimitConfig,
    pub tol: f64,
    pub x_params: XParams,
    pub xprime_params: XpParams,
    /// One entry per ordered pair (λ, μ), λ-major in diagram order.
    pub pairs: Vec<PairResidual>,
    pub max_residual: f64,
    pub pass: bool,
    pub seconds: f64,
}

/// Fills both restriction matrices at one shared draw and compares
/// T_{p,p} T'_{λ,μ} with T'_{μ,μ} T_{q,p} for every ordered pair, p = bj(λ),
/// q = bj(μ).
pub fn verify_mirror(g: GrassData, seed: u64, ell: &EllipticParams, cfg: &MirrorConfig) -> Result<MirrorReport> {
    let start = Instant::now();
    let (px, pp) = draw_params(g, seed, ell.precision_bits());
    let tx = restriction_matrix_x(&g, &px, ell, false)?;
    let tp = restriction_matrix_xprime(&g, &pp, ell, &cfg.limit, false)?;
    let subsets = g.subsets();
    let diagrams = g.diagrams();
    let sub_index: Vec<usize> = diagrams
        .iter()
        .map(|d| {
            let p = bj(d, &g)?;
            Ok(subsets.iter().position(|s| *s == p).expect("bj lands in the subsets"))
        })
        .collect::<Result<_>>()?;
    let mut pairs = Vec::with_capacity(diagrams.len() * diagrams.len());
    let mut max_residual: f64 = 0.0;
    for (a, lam) in diagrams.iter().enumerate() {
        for (b, mu) in diagrams.iter().enumerate() {
            let (ip, iq) = (sub_index[a], sub_index[b]);
            let lhs = &tx.entries[ip][ip] * &tp.entries[a][b];
            let rhs = &tp.entries[b][b] * &tx.entries[iq][ip];
            let residual = rel_diff(&lhs, &rhs, cfg.floor);
            max_residual = max_residual.max(residual);
            pairs.push(PairResidual {
                lambda: lam.clone(),
                mu: mu.clone(),
                p: subsets[ip].clone(),
                q: subsets[iq].clone(),
                lhs,
                rhs,
                residual,
                pass: residual <= cfg.tol,
            });
        }
    }
    Ok(MirrorReport {
        n: g.n,
        k: g.k,
        seed,
        q: ell.q().clone(),
        precision_bits: ell.precision_bits(),
        limit: cfg.limit.clone(),
        tol: cfg.tol,
        x_params: px,
        xprime_params: pp,
        pass: pairs.iter().all(|p| p.pass),
        pairs,
        max_residual,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn require_k1(g: &GrassData) -> Result<()> {
    if g.k != 1 {
        return Err(Error::InvalidParams(format!("the closed-form Mother function needs k = 1, got k = {}", g.k)));
    }
    Ok(())
}

/// The k = 1 Mother function
/// m = (−1)^n ∏_{i=1}^{n} θ(x_i ħ' / x_{i−1} · u_i · y), x_0 = a_1, x_n = a_2,
/// at the X Chern root log `y` and X' Chern root logs `x` (x_1 … x_{n−1});
/// ħ' = ħ^{-1} and a_1, a_2 come from κ.
pub fn mother_k1(px: &XParams, y: &Cx, x: &[Cx], ell: &EllipticParams) -> Result<Cx> {
    let g = px.g;
    require_k1(&g)?;
    if x.len() != g.n - 1 {
        return Err(Error::InvalidParams(format!("expected {} X' Chern roots, got {}", g.n - 1, x.len())));
    }
    let pp = kappa_params(px);
    let mut r = ell.one();
    for i in 1..=g.n {
        let prev = if i == 1 { &pp.a1 } else { &x[i - 2] };
        let cur = if i == g.n { &pp.a2 } else { &x[i - 1] };
        let w = &(&(cur + &pp.hbar) - prev) + &(px.u(i) + y);
        r *= ell.theta(&w);
    }
    Ok(if g.n % 2 == 1 { -r } else { r })
}

/// m restricted to the X fixed point {m} (y = u_m^{-1}), as a function of
/// the X' Chern roots.
pub fn mother_k1_at_x_point(px: &XParams, m: usize, x: &[Cx], ell: &EllipticParams) -> Result<Cx> {
    mother_k1(px, &-px.u(m), x, ell)
}

/// m restricted to the X' fixed point λ_m = bj⁻¹({m}), as a function of y.
pub fn mother_k1_at_xprime_point(px: &XParams, m: usize, y: &Cx, ell: &EllipticParams) -> Result<Cx> {
    let g = px.g;
    require_k1(&g)?;
    let lam = bj_inv(&Subset::new(&g, vec![m])?, &g)?;
    let x = kappa_params(px).fixed_point_logs(&lam);
    mother_k1(px, y, &x, ell)
}

/// Gaussian elimination with partial pivoting.
fn invert(a: &[Vec<Cx>], threshold: f64) -> Result<Vec<Vec<Cx>>> {
    let n = a.len();
    let prec = a[0][0].prec();
    let scale = a.iter().flatten().map(|c| c.abs_f64()).fold(0.0, f64::max);
    let mut m: Vec<Vec<Cx>> = a.to_vec();
    let mut inv: Vec<Vec<Cx>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Cx::one(prec) } else { Cx::zero(prec) }).collect()).collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs_f64().total_cmp(&m[j][col].abs_f64()))
            .expect("nonempty range");
        if !(m[piv][col].abs_f64() > threshold * scale) {
            return Err(Error::SingularRestrictionMatrix);
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = m[col][col].recip();
        for j in 0..n {
            m[col][j] = &m[col][j] * &d;
            inv[col][j] = &inv[col][j] * &d;
        }
        for i in 0..n {
            if i != col && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in 0..n {
                    let t = &f * &m[col][j];
                    m[i][j] -= &t;
                    let t = &f * &inv[col][j];
                    inv[i][j] -= &t;
                }
            }
        }
    }
    Ok(inv)
}

/// m̃ = Σ_{p,q} (T⁻¹)_{q,p} Stab(p) Stab'(bj⁻¹(q)), T the bold X-side
/// restriction matrix, evaluated at X Chern roots y and X' Chern roots x.
#[derive(Clone, Debug)]
pub struct MotherFunction {
    g: GrassData,
    px: XParams,
    pp: XpParams,
    ell: EllipticParams,
    subsets: Vec<Subset>,
    duals: Vec<YoungDiagram>,
    /// `tinv[q][p]`.
    tinv: Vec<Vec<Cx>>,
}

impl MotherFunction {
    pub fn new(g: GrassData, px: &XParams, ell: &EllipticParams) -> Result<Self> {
        let t = restriction_matrix_x(&g, px, ell, true)?;
        let tinv = invert(&t.entries, ell.pole_threshold())?;
        let subsets = g.subsets();
        let duals = subsets.iter().map(|p| bj_inv(p, &g)).collect::<Result<_>>()?;
        Ok(MotherFunction { g, px: px.clone(), pp: kappa_params(px), ell: ell.clone(), subsets, duals, tinv })
    }

    pub fn x_params(&self) -> &XParams {
        &self.px
    }

    pub fn xprime_params(&self) -> &XpParams {
        &self.pp
    }

    /// c_q(y) = Σ_p (T⁻¹)_{q,p} Stab(p)(y).
    fn coefficients(&self, y: &[Cx]) -> Result<Vec<Cx>> {
        let stabs: Vec<Cx> =
            self.subsets.iter().map(|p| bold_stab_x_eval(&self.g, p, y, &self.px, &self.ell)).collect::<Result<_>>()?;
        Ok(self
            .tinv
            .iter()
            .map(|row| row.iter().zip(&stabs).fold(self.ell.zero(), |acc, (a, s)| &acc + &(a * s)))
            .collect())
    }

    /// m̃ at X Chern root logs `y` (k of them) and X' Chern root logs `x`
    /// (cell order).
    pub fn eval(&self, y: &[Cx], x: &[Cx]) -> Result<Cx> {
        let c = self.coefficients(y)?;
        let mut r = self.ell.zero();
        for (cq, lam) in c.iter().zip(&self.duals) {
            r += &(cq * &bold_stab_xprime(&self.g, lam, x, &self.pp, &self.ell)?);
        }
        Ok(r)
    }

    /// m̃ at the X fixed point `p` as a function of x.
    pub fn at_x_point(&self, p: &Subset, x: &[Cx]) -> Result<Cx> {
        let y: Vec<Cx> = p.elems().iter().map(|&i| -self.px.u(i)).collect();
        self.eval(&y, x)
    }

    /// m̃ at the X' fixed point `mu` as a function of y; the X' envelopes are
    /// restricted by limits.
    pub fn at_xprime_point(&self, mu: &YoungDiagram, y: &[Cx], cfg: &LimitConfig) -> Result<Cx> {
        let c = self.coefficients(y)?;
        let mut r = self.ell.zero();
        for (cq, lam) in c.iter().zip(&self.duals) {
            if cq.is_zero() {
                continue;
            }
            r += &(cq * &bold_restrict_xprime(&self.g, lam, mu, &self.pp, &self.ell, cfg)?);
        }
        Ok(r)
    }
}

/// (i, j) with q = p ∖ {i} ∪ {j}, or `PairNotConnected`.
pub fn gkm_edge(p: &Subset, q: &Subset) -> Result<(usize, usize)> {
    let out: Vec<usize> = p.elems().iter().copied().filter(|i| !q.contains(*i)).collect();
    let inn: Vec<usize> = q.elems().iter().copied().filter(|j| !p.contains(*j)).collect();
    match (out.as_slice(), inn.as_slice()) {
        ([i], [j]) => Ok((*i, *j)),
        _ => Err(Error::PairNotConnected(format!("{p} and {q} differ in {} elements", out.len()))),
    }
}

/// X parameters with log u_i replaced by log u_j + δ·η.
fn glue(px: &XParams, i: usize, j: usize, delta: f64, eta: &Cx) -> XParams {
    let mut out = px.clone();
    out.u[i - 1] = px.u(j) + &eta.scale_f64(delta);
    out
}

#[derive(Clone, Debug)]
pub struct GkmColumn {
    pub nu: YoungDiagram,
    pub lambda_value: Cx,
    pub mu_value: Cx,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct GkmResult {
    pub lambda: YoungDiagram,
    pub mu: YoungDiagram,
    pub i: usize,
    pub j: usize,
    pub columns: Vec<GkmColumn>,
    pub residual: f64,
}

/// Compares the bold X' envelopes of λ and μ on the hyperplane u_i = u_j,
/// where bj(μ) = bj(λ) ∖ {i} ∪ {j}.
///
/// Each bold entry Θ'·T' is a product of a vanishing prefactor and a pole,
/// so its value on the hyperplane is itself a limit: u_i = u_j + δη is
/// imposed on the X side before κ, and δ → 0 is extrapolated around the
/// inner restriction limits. Columns ν containing neither λ nor μ vanish
/// identically by triangularity and are skipped.
pub fn gkm_check_pair(
    g: &GrassData,
    lam: &YoungDiagram,
    mu: &YoungDiagram,
    (i, j): (usize, usize),
    px: &XParams,
    ell: &EllipticParams,
    cfg: &LimitConfig,
    outer: &LimitConfig,
) -> Result<GkmResult> {
    let (p, q) = (bj(lam, g)?, bj(mu, g)?);
    let edge = gkm_edge(&p, &q)?;
    if edge != (i, j) && edge != (j, i) {
        return Err(Error::PairNotConnected(format!("{p} → {q} is not the ({i}, {j}) curve")));
    }
    let eta = LogSampler::new(outer.seed, ell.precision_bits()).next_cx();
    let hyper = glue(px, i, j, 0.0, &eta);
    let entry = |d: &YoungDiagram, nu: &YoungDiagram| {
        limit_at_zero(
            |delta| {
                let pp = kappa_params(&glue(&hyper, i, j, delta, &eta));
                bold_restrict_xprime(g, d, nu, &pp, ell, cfg)
            },
            outer,
        )
    };
    let mut columns = Vec::new();
    let mut worst: f64 = 0.0;
    for nu in g.diagrams() {
        if !lam.is_subset_of(&nu) && !mu.is_subset_of(&nu) {
            continue;
        }
        let a = entry(lam, &nu)?;
        let b = entry(mu, &nu)?;
        let norm = outer.floor.max(a.scale).max(b.scale);
        let residual = rel_diff(&a.value, &b.value, norm);
        worst = worst.max(residual);
        columns.push(GkmColumn { nu, lambda_value: a.value, mu_value: b.value, residual });
    }
    Ok(GkmResult { lambda: lam.clone(), mu: mu.clone(), i, j, columns, residual: worst })
}

/// The X-side gluing: T_{r,p} = T_{r,s} on u_i = u_j for every r, where
/// s = p ∖ {i} ∪ {j}. Returns the largest relative difference.
pub fn gkm_check_pair_x(g: &GrassData, p: &Subset, s: &Subset, px: &XParams, ell: &EllipticParams, floor: f64) -> Result<f64> {
    let (i, j) = gkm_edge(p, s)?;
    let mut prm = px.clone();
    prm.u[i - 1] = px.u(j).clone();
    let mut worst: f64 = 0.0;
    for r in g.subsets() {
        let a = restrict_x(g, &r, p, &prm, ell)?;
        let b = restrict_x(g, &r, s, &prm, ell)?;
        worst = worst.max(rel_diff(&a, &b, floor));
    }
    Ok(worst)
}

/// Connected pairs (λ, μ) with λ ⊂ μ and the (i, j) of their curve.
pub fn gkm_pairs(g: &GrassData) -> Result<Vec<(YoungDiagram, YoungDiagram, (usize, usize))>> {
    let ds = g.diagrams();
    let mut out = Vec::new();
    for lam in &ds {
        for mu in &ds {
            if lam == mu || !lam.is_subset_of(mu) {
                continue;
            }
            if let Ok(e) = gkm_edge(&bj(lam, g)?, &bj(mu, g)?) {
                out.push((lam.clone(), mu.clone(), e));
            }
        }
    }
    Ok(out)
}

/// A complement tree and a box at which its involution is defined.
#[derive(Clone, Debug)]
pub struct CancellationInstance {
    pub lambda: YoungDiagram,
    pub tree: Tree,
    pub at: Cell,
}

/// All (λ, t̄, box) with a defined involution. With `allow_boundary` boxes
/// on the boundary of λ̄ are included as well.
pub fn admissible_instances(g: &GrassData, allow_boundary: bool) -> Vec<CancellationInstance> {
    let mut out = Vec::new();
    for lam in g.diagrams() {
        let bar = lam.complement_cells(g);
        for t in complement_trees(&lam, g, LShapeRule::default()) {
            for at in &bar {
                if involution_admissible(&t, at, &lam, g, allow_boundary).is_ok() {
                    out.push(CancellationInstance { lambda: lam.clone(), tree: t.clone(), at: *at });
                }
            }
        }
    }
    out
}

/// log u(s̄) = Σ_{I ∈ s̄} log(u_{c_I+1}/u_{c_I}) in X' Kähler parameters.
pub fn log_u_of(cells: &[Cell], prm: &XpParams) -> Cx {
    let k = prm.g.k;
    cells.iter().fold(prm.hbar.scale_int(0), |acc, c| {
        let cc = c.content(k) as usize;
        &acc + &u_ratio_log(prm, cc, cc + 1)
    })
}

/// R(t̄)W(t̄) / R(inv t̄)W(inv t̄) on the hypersurface u(s̄) = 1, s̄ the
/// subtree of t̄ hanging at the box, at generic Chern roots.
///
/// The constraint is approached as log u(s̄) = τη by moving z_{c}, c the
/// content of the box, and τ → 0 is extrapolated (both terms have a pole on
/// the hypersurface).
#[allow(clippy::too_many_arguments)]
pub fn cancellation_check(
    g: &GrassData,
    lam: &YoungDiagram,
    tbar: &Tree,
    at: &Cell,
    prm: &XpParams,
    ell: &EllipticParams,
    cfg: &LimitConfig,
    allow_boundary: bool,
) -> Result<Cx> {
    let inv = involution(tbar, at, lam, g, allow_boundary)?;
    let sub = tbar.subtree(at)?;
    let c0 = at.content(g.k);
    let mult = sub.iter().filter(|c| c.content(g.k) == c0).count() as i64;
    let prec = ell.precision_bits() + cfg.guard_bits;
    let base = prm.with_prec(prec);
    let lu = log_u_of(&sub, &base);
    let mut sampler = LogSampler::new(cfg.seed, prec);
    let eta = sampler.next_cx();
    let x = sampler.next_vec(g.cells().len());
    let ellg = ell.with_guard_bits(cfg.guard_bits);
    let r = limit_at_zero(
        |tau| {
            // log u(s̄) moves by −mult·δ when z_{c0} moves by δ.
            let mut p = base.clone();
            let shift = (&lu - &eta.scale_f64(tau)).div_int(mult);
            p.z[(c0 - 1) as usize] += &shift;
            let env = XprimeEnvelope::new(g, lam, &p, &ellg, LShapeRule::default())?;
            Ok(&env.refined_tree_term(tbar, &x)? / &env.refined_tree_term(&inv, &x)?)
        },
        cfg,
    )?;
    Ok(r.value.with_prec(ell.precision_bits()))
}

/// |ratio + 1| for a cancellation instance.
pub fn cancellation_residual(
    g: &GrassData,
    inst: &CancellationInstance,
    prm: &XpParams,
    ell: &EllipticParams,
    cfg: &LimitConfig,
    allow_boundary: bool,
) -> Result<f64> {
    let r = cancellation_check(g, &inst.lambda, &inst.tree, &inst.at, prm, ell, cfg, allow_boundary)?;
    Ok((&r + &ell.one()).abs_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    const PREC: u32 = 256;

    fn ell() -> EllipticParams {
        EllipticParams::standard()
    }

    fn c(re: f64, im: f64) -> Cx {
        Cx::from_f64(PREC, re, im)
    }

    fn close(a: &Cx, b: &Cx) -> bool {
        rel_diff(a, b, 1e-30) < 1e-60
    }

    fn sample_x(g: GrassData) -> XParams {
        let u = (1..=g.n).map(|i| c(0.1 * i as f64, -0.05 * i as f64)).collect();
        XParams::new(g, u, c(0.3, 0.2), c(-0.4, 0.1))
    }

    #[test]
    fn kappa_on_gr_2_4() {
        let g = GrassData::new(4, 2).unwrap();
        let px = sample_x(g);
        let pp = kappa_params(&px);
        assert!(close(&pp.a1, &(&px.z + &px.hbar)));
        assert!(pp.a2.is_zero());
        assert!(close(&pp.hbar, &-&px.hbar));
        // z_1 carries +ħ, z_2 none, z_3 −ħ.
        assert!(close(pp.z(1), &(&(px.u(1) - px.u(2)) + &px.hbar)));
        assert!(close(pp.z(2), &(px.u(2) - px.u(3))));
        assert!(close(pp.z(3), &(&(px.u(3) - px.u(4)) - &px.hbar)));
    }

    #[test]
    fn kappa_on_projective_space() {
        let g = GrassData::new(3, 1).unwrap();
        let px = sample_x(g);
        let pp = kappa_params(&px);
        assert!(close(&pp.a1, &px.z));
        // k = 1 leaves no room below k or above n − k: no ħ shifts.
        assert!(close(pp.z(1), &(px.u(1) - px.u(2))));
        assert!(close(pp.z(2), &(px.u(2) - px.u(3))));
    }

    #[test]
    fn kappa_round_trip() {
        for (n, k) in [(2, 1), (4, 2), (5, 2), (6, 3)] {
            let g = GrassData::new(n, k).unwrap();
            let px = XParams::random(g, &mut LogSampler::new(11, PREC));
            let back = kappa_inverse(&kappa_params(&px));
            // The inverse normalizes u_1 = 0, so compare differences.
            for i in 2..=n {
                assert!(close(&(back.u(i) - back.u(1)), &(px.u(i) - px.u(1))));
            }
            assert!(close(&back.z, &px.z));
            assert!(close(&back.hbar, &px.hbar));
        }
    }

    #[test]
    fn kappa_map_matches_param_maps() {
        let g = GrassData::new(5, 2).unwrap();
        let px = XParams::random(g, &mut LogSampler::new(3, PREC));
        let fwd = KappaMap::new(g, KappaDirection::XToXprime).apply(&px.symbol_table()).unwrap();
        let pp = kappa_params(&px);
        for (name, v) in pp.symbol_table().iter() {
            assert!(close(fwd.get(name).unwrap(), v) || (v.is_zero() && fwd.get(name).unwrap().is_zero()), "{name}");
        }
        let back = KappaMap::new(g, KappaDirection::XprimeToX).apply(&fwd).unwrap();
        let inv = kappa_inverse(&pp);
        for i in 2..=g.n {
            assert!(close(back.get(&format!("u{i}")).unwrap(), inv.u(i)));
        }
        assert!(close(back.get("z").unwrap(), &px.z));
    }

    #[test]
    fn kappa_map_reports_missing_symbols() {
        let g = GrassData::new(4, 2).unwrap();
        let t = SymbolTable::new().with("hbar", c(0.1, 0.0)).with("z", c(0.2, 0.0));
        let e = KappaMap::new(g, KappaDirection::XToXprime).apply(&t).unwrap_err();
        assert_eq!(e, Error::UnassignedSymbol("u1".into()));
    }

    #[test]
    fn standard_chamber_maps_to_negative_chamber() {
        assert_eq!(chamber_image(&standard_chamber(5)), vec![-1; 4]);
        assert_eq!(chamber_image(&[3, 1, 2]), vec![2, -1]);
    }

    #[test]
    fn gkm_edges() {
        let g = GrassData::new(4, 2).unwrap();
        let p = Subset::new(&g, vec![1, 2]).unwrap();
        let q = Subset::new(&g, vec![1, 3]).unwrap();
        let far = Subset::new(&g, vec![3, 4]).unwrap();
        assert_eq!(gkm_edge(&p, &q).unwrap(), (2, 3));
        assert_eq!(gkm_edge(&q, &p).unwrap(), (3, 2));
        assert!(matches!(gkm_edge(&p, &far), Err(Error::PairNotConnected(_))));
        assert!(matches!(gkm_edge(&p, &p), Err(Error::PairNotConnected(_))));
        // ∅ and the full rectangle are bj-images of {1,2} and {3,4}.
        let empty = YoungDiagram::empty(&g);
        let full = YoungDiagram::full(&g);
        assert!(gkm_edge(&bj(&empty, &g).unwrap(), &bj(&full, &g).unwrap()).is_err());
    }

    #[test]
    fn gkm_pairs_are_nested_and_adjacent() {
        let g = GrassData::new(5, 2).unwrap();
        let pairs = gkm_pairs(&g).unwrap();
        // Each subset has k(n−k) neighbours; each edge is listed once.
        assert_eq!(pairs.len(), g.num_fixed_points() * g.k * g.m() / 2);
        for (lam, mu, e) in &pairs {
            assert!(lam.is_subset_of(mu) && lam != mu);
            assert_eq!(gkm_edge(&bj(lam, &g).unwrap(), &bj(mu, &g).unwrap()).unwrap(), *e);
        }
    }

    #[test]
    fn mother_on_p1_by_hand() {
        let g = GrassData::new(2, 1).unwrap();
        let ell = ell();
        let px = sample_x(g);
        let pp = kappa_params(&px);
        let (y, x1) = (c(0.21, -0.3), c(-0.17, 0.4));
        let hp = &pp.hbar;
        let f1 = ell.theta(&(&(&(&x1 + hp) - &pp.a1) + &(px.u(1) + &y)));
        let f2 = ell.theta(&(&(&(&pp.a2 + hp) - &x1) + &(px.u(2) + &y)));
        let m = mother_k1(&px, &y, std::slice::from_ref(&x1), &ell).unwrap();
        assert!(close(&m, &(&f1 * &f2)));
    }

    #[test]
    fn mother_rejects_bad_input() {
        let ell = ell();
        let g = GrassData::new(4, 2).unwrap();
        let px = sample_x(g);
        assert!(matches!(mother_k1(&px, &c(0.1, 0.0), &vec![c(0.0, 0.1); 3], &ell), Err(Error::InvalidParams(_))));
        let g = GrassData::new(3, 1).unwrap();
        let px = sample_x(g);
        assert!(matches!(mother_k1(&px, &c(0.1, 0.0), &[c(0.0, 0.1)], &ell), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn general_mother_agrees_with_closed_form() {
        let ell = ell();
        let g = GrassData::new(3, 1).unwrap();
        let px = XParams::random(g, &mut LogSampler::new(5, PREC));
        let mf = MotherFunction::new(g, &px, &ell).unwrap();
        let mut s = LogSampler::new(6, PREC);
        let (y, x) = (s.next_cx(), s.next_vec(2));
        let a = mf.eval(std::slice::from_ref(&y), &x).unwrap();
        let b = mother_k1(&px, &y, &x, &ell).unwrap();
        assert!(rel_diff(&a, &b, 1e-30) < 1e-40);
    }

    #[test]
    fn invert_small_matrix() {
        let a = vec![vec![c(2.0, 0.0), c(1.0, 1.0)], vec![c(0.0, -1.0), c(3.0, 0.5)]];
        let inv = invert(&a, 1e-60).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = Cx::zero(PREC);
                for l in 0..2 {
                    s += &(&a[i][l] * &inv[l][j]);
                }
                let want = if i == j { Cx::one(PREC) } else { Cx::zero(PREC) };
                assert!((&s - &want).abs_f64() < 1e-70);
            }
        }
        let sing = vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]];
        assert_eq!(invert(&sing, 1e-60).unwrap_err(), Error::SingularRestrictionMatrix);
    }

    #[test]
    fn gluing_on_the_x_side_is_exact() {
        let ell = ell();
        let g = GrassData::new(4, 2).unwrap();
        let (px, _) = draw_params(g, 2, PREC);
        let p = Subset::new(&g, vec![1, 2]).unwrap();
        let s = Subset::new(&g, vec![1, 4]).unwrap();
        assert!(gkm_check_pair_x(&g, &p, &s, &px, &ell, 1e-30).unwrap() < 1e-60);
    }

    #[test]
    fn cancellation_gives_minus_one() {
        let ell = ell();
        let g = GrassData::new(4, 2).unwrap();
        assert!(admissible_instances(&g, false).is_empty());
        let inst = admissible_instances(&g, true);
        assert_eq!(inst.len(), 2);
        let (_, pp) = draw_params(g, 9, PREC);
        for i in &inst {
            let r = cancellation_residual(&g, i, &pp, &ell, &LimitConfig::default(), true).unwrap();
            assert!(r < 1e-25, "{r}");
        }
    }
}
