//! The elliptic stable envelope of X = T*Gr(k,n).
//!
//! Fixed points are k-subsets p; Chern roots restrict as `y_l = u_{p_l}^{-1}`.
//! The envelope of p is the symmetrization over the k Chern roots of
//!
//! ```text
//! ∏_l [ ∏_{i<p_l} θ(y_l u_i/ħ) · θ(y_l u_{p_l} z^{-1} ħ^{e_l}) / θ(z^{-1} ħ^{e_l}) · ∏_{i>p_l} θ(y_l u_i) ]
//!   / ∏_{i<j} θ(y_i/y_j) θ(y_j/(y_i ħ)),            e_l = k − n + p_l − 2l.
//! ```
//!
//! Chamber σ = (1, …, n) and the negative stability condition are fixed.

use crate::cx::{rel_diff, Cx};
use crate::error::{Error, Result};
use crate::rect_combinatorics::{bj_inv, GrassData, Subset, YoungDiagram};
use crate::sampling::LogSampler;
use crate::theta_core::{EllipticParams, Monomial, SymbolTable, VirtualChar};

/// Logarithms of the equivariant (u_i, ħ) and Kähler (z, z_{u_i}) parameters of X.
#[derive(Clone, Debug, PartialEq)]
pub struct XParams {
    pub g: GrassData,
    /// log u_1 … log u_n.
    pub u: Vec<Cx>,
    pub hbar: Cx,
    pub z: Cx,
    /// Auxiliary log z_{u_i}; zero by default.
    pub zu: Vec<Cx>,
}

impl XParams {
    pub fn new(g: GrassData, u: Vec<Cx>, hbar: Cx, z: Cx) -> Self {
        assert_eq!(u.len(), g.n);
        let p = hbar.prec();
        XParams { g, u, hbar, z, zu: vec![Cx::zero(p); g.n] }
    }

    pub fn random(g: GrassData, sampler: &mut LogSampler) -> Self {
        let u = sampler.next_vec(g.n);
        let hbar = sampler.next_cx();
        let z = sampler.next_cx();
        XParams::new(g, u, hbar, z)
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        XParams {
            g: self.g,
            u: self.u.iter().map(|c| c.with_prec(prec)).collect(),
            hbar: self.hbar.with_prec(prec),
            z: self.z.with_prec(prec),
            zu: self.zu.iter().map(|c| c.with_prec(prec)).collect(),
        }
    }

    /// log u_i for 1-based i.
    pub fn u(&self, i: usize) -> &Cx {
        &self.u[i - 1]
    }

    pub fn symbol_table(&self) -> SymbolTable {
        let mut t = SymbolTable::new();
        for i in 1..=self.g.n {
            t.set(format!("u{i}"), self.u(i).clone());
            t.set(format!("zu{i}"), self.zu[i - 1].clone());
        }
        t.set("hbar", self.hbar.clone());
        t.set("z", self.z.clone());
        t
    }
}

fn u_sym(i: usize) -> String {
    format!("u{i}")
}

/// `u_a / u_b · ħ^e` as a monomial.
fn ratio(a: usize, b: usize, e: i64) -> Monomial {
    Monomial::var(&u_sym(a), 1).times(&u_sym(b), -1).times("hbar", e)
}

/// T_p X = Σ_{i∈p, j∉p} (u_i/u_j + ħ^{-1} u_j/u_i).
pub fn tangent_char_x(g: &GrassData, p: &Subset) -> VirtualChar {
    let mut c = VirtualChar::new();
    for &i in p.elems() {
        for j in p.complement(g.n) {
            c.push(1, ratio(i, j, 0));
            c.push(1, ratio(j, i, -1));
        }
    }
    c
}

/// Value of a monomial's weight on the chamber σ = (1, 2, …, n).
pub fn sigma_weight(g: &GrassData, m: &Monomial) -> i64 {
    (1..=g.n).map(|i| i as i64 * m.exponent(&u_sym(i))).sum()
}

/// Splits T_p X into (N⁺, N⁻) by the sign of the weight on σ.
pub fn normal_split_x(g: &GrassData, p: &Subset) -> (VirtualChar, VirtualChar) {
    let mut plus = VirtualChar::new();
    let mut minus = VirtualChar::new();
    for (s, m) in tangent_char_x(g, p).terms() {
        if sigma_weight(g, m) > 0 {
            plus.push(*s, m.clone());
        } else {
            minus.push(*s, m.clone());
        }
    }
    (plus, minus)
}

/// Polarization restricted to q: Σ_{i∈q, j∉q} u_j/(u_i ħ).
pub fn polarization_x(g: &GrassData, q: &Subset) -> VirtualChar {
    let mut c = VirtualChar::new();
    for &i in q.elems() {
        for j in q.complement(g.n) {
            c.push(1, ratio(j, i, -1));
        }
    }
    c
}

/// det ind_p = ∏_{i∈p, j∉p, j>i} u_j/(u_i ħ).
pub fn index_det_x(g: &GrassData, p: &Subset) -> Monomial {
    let mut m = Monomial::one();
    for &i in p.elems() {
        for j in p.complement(g.n) {
            if j > i {
                m = m.mul(&ratio(j, i, -1));
            }
        }
    }
    m
}

/// D^p_i: the u_i-degree of det ind_p, for i = 1..n.
pub fn index_degrees_x(g: &GrassData, p: &Subset) -> Vec<i64> {
    let d = index_det_x(g, p);
    (1..=g.n).map(|i| d.exponent(&u_sym(i))).collect()
}

fn check_den(ell: &EllipticParams, t: &Cx, what: impl FnOnce() -> String) -> Result<()> {
    if t.abs_f64() < ell.pole_threshold() {
        Err(Error::PoleAtArgument(what()))
    } else {
        Ok(())
    }
}

/// Exponent e_l = k − n + p_l − 2l of the z-dependent factor (l is 1-based).
fn zexp(g: &GrassData, pl: usize, l: usize) -> i64 {
    g.k as i64 - g.n as i64 + pl as i64 - 2 * l as i64
}

/// Unsymmetrized summand for a fixed ordering of the Chern roots.
fn stab_x_term(g: &GrassData, p: &Subset, y: &[&Cx], prm: &XParams, ell: &EllipticParams) -> Result<Cx> {
    let mut num = ell.one();
    let mut den = ell.one();
    for (l0, &pl) in p.elems().iter().enumerate() {
        let yl = y[l0];
        let e = zexp(g, pl, l0 + 1);
        let zh = &prm.hbar.scale_int(e) - &prm.z;
        for i in 1..=g.n {
            let w = yl + prm.u(i);
            if i < pl {
                num *= ell.theta(&(w - &prm.hbar));
            } else if i == pl {
                num *= ell.theta(&(w + &zh));
                den *= ell.theta(&zh);
            } else {
                num *= ell.theta(&w);
            }
        }
    }
    for a in 0..g.k {
        for b in a + 1..g.k {
            den *= ell.theta(&(y[a] - y[b]));
            den *= ell.theta(&(&(y[b] - y[a]) - &prm.hbar));
        }
    }
    check_den(ell, &den, || format!("Stab({p}) denominator"))?;
    Ok(&num / &den)
}

/// All permutations of 0..k in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..k).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}

/// Stab(p) evaluated at Chern roots with logs `ly` (symmetrized over all k! orderings).
pub fn stab_x_eval(g: &GrassData, p: &Subset, ly: &[Cx], prm: &XParams, ell: &EllipticParams) -> Result<Cx> {
    assert_eq!(ly.len(), g.k);
    let mut tot = ell.zero();
    for perm in permutations(g.k) {
        let y: Vec<&Cx> = perm.iter().map(|&s| &ly[s]).collect();
        tot += stab_x_term(g, p, &y, prm, ell)?;
    }
    Ok(tot)
}

/// T_{p,q}: Stab(p) at y_l = u_{q_l}^{-1}.
pub fn restrict_x(g: &GrassData, p: &Subset, q: &Subset, prm: &XParams, ell: &EllipticParams) -> Result<Cx> {
    let ly: Vec<Cx> = q.elems().iter().map(|&i| -prm.u(i)).collect();
    stab_x_eval(g, p, &ly, prm, ell).map_err(|e| match e {
        Error::PoleAtArgument(s) => Error::NonGenericParameters(format!("T_{{{p},{q}}}: {s}")),
        other => other,
    })
}

/// T_{p,p} = ∏_{i∈p,j∉p,i<j} θ(u_j/u_i) · ∏_{i∈p,j∉p,i>j} θ(u_j/(u_i ħ)).
pub fn diagonal_x(g: &GrassData, p: &Subset, prm: &XParams, ell: &EllipticParams) -> Cx {
    let mut r = ell.one();
    for &i in p.elems() {
        for j in p.complement(g.n) {
            let w = prm.u(j) - prm.u(i);
            r *= if i < j { ell.theta(&w) } else { ell.theta(&(w - &prm.hbar)) };
        }
    }
    r
}

/// ∏_{i∈q,j∉q,i>j} θ(u_j/(u_i ħ)), the factor every T_{p,q} is divisible by.
pub fn divisibility_factor_x(g: &GrassData, q: &Subset, prm: &XParams, ell: &EllipticParams) -> Cx {
    let mut r = ell.one();
    for &i in q.elems() {
        for j in q.complement(g.n) {
            if i > j {
                r *= ell.theta(&(&(prm.u(j) - prm.u(i)) - &prm.hbar));
            }
        }
    }
    r
}

/// Holomorphic normalization Θ_p = (−1)^{k(n−k)} ∏_m θ(z ħ^{n−k−p_m+2m}).
///
/// Under the mirror identification this is the diagonal entry T'_{λ,λ} of
/// the dual envelope (λ = bj⁻¹(p)); its factors cancel the z-denominators of
/// Stab(p).
pub fn theta_prefactor_x(g: &GrassData, p: &Subset, prm: &XParams, ell: &EllipticParams) -> Cx {
    let mut r = ell.one();
    for (l0, &pm) in p.elems().iter().enumerate() {
        let e = g.n as i64 - g.k as i64 - pm as i64 + 2 * (l0 as i64 + 1);
        r *= ell.theta(&(&prm.z + &prm.hbar.scale_int(e)));
    }
    if (g.k * (g.n - g.k)) % 2 == 1 {
        r = -r;
    }
    r
}

/// Θ_p · Stab(p) at arbitrary Chern roots.
pub fn bold_stab_x_eval(g: &GrassData, p: &Subset, ly: &[Cx], prm: &XParams, ell: &EllipticParams) -> Result<Cx> {
    Ok(&theta_prefactor_x(g, p, prm, ell) * &stab_x_eval(g, p, ly, prm, ell)?)
}

/// Θ_p · T_{p,q}.
pub fn bold_restrict_x(g: &GrassData, p: &Subset, q: &Subset, prm: &XParams, ell: &EllipticParams) -> Result<Cx> {
    Ok(&theta_prefactor_x(g, p, prm, ell) * &restrict_x(g, p, q, prm, ell)?)
}

/// The reference function U_{p,q} whose quasiperiods match those of T_{p,q}.
///
/// Θ(T^{1/2}|_q) · ∏_l φ(u_{p_l}, z^{-1}) / φ(u_{q_l}, z^{-1}) · ∏_i [φ(u_i, z_{u_i}^{-1} ħ^{D_i}) / φ(u_i, z_{u_i}^{-1})].
/// The first argument of the middle factor is u_{p_l}, not its inverse: this
/// is what the explicit envelope formula transforms like in both u and z.
/// When log z_{u_i} = 0 the last ratio has a pole in its denominator; its
/// quasiperiod in u_i is ħ^{−D_i} either way, so φ(u_i, ħ^{D_i}) (or 1 when
/// D_i = 0) is used in its place.
pub fn u_function_x(g: &GrassData, p: &Subset, q: &Subset, prm: &XParams, ell: &EllipticParams) -> Result<Cx> {
    let tbl = prm.symbol_table();
    let mut r = ell.theta_of_char(&polarization_x(g, q), &tbl)?;
    let mz = -&prm.z;
    for l in 0..g.k {
        r *= ell.phi(prm.u(p.elems()[l]), &mz)?;
        r /= ell.phi(prm.u(q.elems()[l]), &mz)?;
    }
    let d = index_degrees_x(g, p);
    for i in 1..=g.n {
        let zu = &prm.zu[i - 1];
        let shifted = &prm.hbar.scale_int(d[i - 1]) - zu;
        if zu.is_zero() {
            if d[i - 1] != 0 {
                r *= ell.phi(prm.u(i), &shifted)?;
            }
        } else {
            r *= ell.phi(prm.u(i), &shifted)?;
            r /= ell.phi(prm.u(i), &-zu)?;
        }
    }
    Ok(r)
}

/// A parameter of X shifted by q in quasiperiod checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XVariable {
    /// u_i, 1-based.
    U(usize),
    Z,
}

/// Relative mismatch between T_{p,q}(v·q)/T_{p,q}(v) and the same ratio of
/// U_{p,q}, for the variable v.
pub fn quasiperiod_check_x(
    g: &GrassData,
    p: &Subset,
    q: &Subset,
    prm: &XParams,
    ell: &EllipticParams,
    v: XVariable,
) -> Result<f64> {
    let mut sh = prm.clone();
    match v {
        XVariable::U(i) => sh.u[i - 1] += ell.log_q(),
        XVariable::Z => sh.z += ell.log_q(),
    }
    let t = &restrict_x(g, p, q, &sh, ell)? / &restrict_x(g, p, q, prm, ell)?;
    let u = &u_function_x(g, p, q, &sh, ell)? / &u_function_x(g, p, q, prm, ell)?;
    Ok(rel_diff(&t, &u, 1e-30))
}

/// Fixed-point-indexed table of restriction values.
#[derive(Clone, Debug)]
pub struct RestrictionMatrix {
    pub labels: Vec<String>,
    /// `entries[row][col]`: envelope of the row point restricted to the column point.
    pub entries: Vec<Vec<Cx>>,
    pub q: Cx,
    pub precision_bits: u32,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
}

impl RestrictionMatrix {
    pub fn size(&self) -> usize {
        self.labels.len()
    }
}

/// The full matrix T_{p,q} (or Θ_p T_{p,q} when `bold`), rows and columns in
/// lexicographic subset order.
pub fn restriction_matrix_x(g: &GrassData, prm: &XParams, ell: &EllipticParams, bold: bool) -> Result<RestrictionMatrix> {
    let pts = g.subsets();
    let mut entries = Vec::with_capacity(pts.len());
    for p in &pts {
        let mut row = Vec::with_capacity(pts.len());
        for q in &pts {
            row.push(if bold { bold_restrict_x(g, p, q, prm, ell)? } else { restrict_x(g, p, q, prm, ell)? });
        }
        entries.push(row);
    }
    Ok(RestrictionMatrix {
        labels: pts.iter().map(|p| p.to_string()).collect(),
        entries,
        q: ell.q().clone(),
        precision_bits: ell.precision_bits(),
        seed: None,
        epsilon: None,
    })
}

/// The diagram matching a subset under the bijection.
pub fn dual_label(g: &GrassData, p: &Subset) -> YoungDiagram {
    bj_inv(p, g).expect("valid subset")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::rel_diff;
    use crate::rect_combinatorics::precedes_or_equal;

    fn setup(n: usize, k: usize, seed: u64) -> (GrassData, XParams, EllipticParams) {
        let g = GrassData::new(n, k).unwrap();
        let ell = EllipticParams::new(0.1, 0.05, 192, 1e-50).unwrap();
        let prm = XParams::random(g, &mut LogSampler::new(seed, 192));
        (g, prm, ell)
    }

    #[test]
    fn tangent_character_small_case() {
        let g = GrassData::new(2, 1).unwrap();
        let t = tangent_char_x(&g, &Subset(vec![1]));
        assert_eq!(t.terms()[0].1, ratio(1, 2, 0));
        assert_eq!(t.terms()[1].1, ratio(2, 1, -1));
    }

    #[test]
    fn normal_split_halves() {
        let g = GrassData::new(4, 2).unwrap();
        let p = Subset(vec![1, 3]);
        let (plus, minus) = normal_split_x(&g, &p);
        assert_eq!(plus.len(), 4);
        assert_eq!(minus.len(), 4);
        // i<j: u_i/u_j is negative on σ; i>j: ħ^{-1} u_j/u_i is negative.
        let mut want = VirtualChar::new();
        want.push(1, ratio(1, 2, 0));
        want.push(1, ratio(1, 4, 0));
        want.push(1, ratio(3, 4, 0));
        want.push(1, ratio(2, 3, -1));
        assert_eq!(minus.simplified(), want.simplified());
    }

    #[test]
    fn index_degrees_example() {
        let g = GrassData::new(4, 2).unwrap();
        // det = (u2/(u1ħ))(u4/(u1ħ))(u4/(u3ħ))
        assert_eq!(index_degrees_x(&g, &Subset(vec![1, 3])), vec![-2, 1, -1, 2]);
    }

    #[test]
    fn k1_reduces_to_single_product() {
        let (g, prm, ell) = setup(4, 1, 3);
        let y = Cx::from_f64(192, 0.3, -0.2);
        for m in 1..=4 {
            let v = stab_x_eval(&g, &Subset(vec![m]), &[y.clone()], &prm, &ell).unwrap();
            let mut want = ell.one();
            for i in 1..m {
                want *= ell.theta(&(&(&y + prm.u(i)) - &prm.hbar));
            }
            let e = &prm.hbar.scale_int(m as i64 - 4 - 1) - &prm.z;
            want *= ell.theta(&(&(&y + prm.u(m)) + &e));
            want /= ell.theta(&e);
            for i in m + 1..=4 {
                want *= ell.theta(&(&y + prm.u(i)));
            }
            assert!(rel_diff(&v, &want, 1e-30) < 1e-50);
        }
    }

    #[test]
    fn symmetric_in_chern_roots() {
        let (g, prm, ell) = setup(5, 2, 4);
        let p = Subset(vec![2, 4]);
        let a = Cx::from_f64(192, 0.1, 0.4);
        let b = Cx::from_f64(192, -0.3, 0.2);
        let v1 = stab_x_eval(&g, &p, &[a.clone(), b.clone()], &prm, &ell).unwrap();
        let v2 = stab_x_eval(&g, &p, &[b, a], &prm, &ell).unwrap();
        assert!(rel_diff(&v1, &v2, 1e-30) < 1e-50);
    }

    #[test]
    fn diagonal_and_support() {
        let (g, prm, ell) = setup(4, 2, 5);
        for p in g.subsets() {
            for q in g.subsets() {
                let t = restrict_x(&g, &p, &q, &prm, &ell).unwrap();
                if p == q {
                    assert!(rel_diff(&t, &diagonal_x(&g, &p, &prm, &ell), 1e-30) < 1e-45);
                } else if !precedes_or_equal(&q, &p) {
                    assert!(t.abs_f64() < 1e-45, "T_{p},{q} = {t}");
                }
            }
        }
    }

    #[test]
    fn permutations_lexicographic() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
        assert_eq!(permutations(1), vec![vec![0]]);
    }
}
