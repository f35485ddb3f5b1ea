//! Odd Jacobi theta function, the Poincaré section φ, and theta classes of
//! virtual characters.
//!
//! Everything takes complex *logarithms*: `θ(w)` means θ evaluated at
//! `x = e^w`, with `x^{1/2} = e^{w/2}`. Shifting `w` by `log q` is then an
//! exact quasiperiod shift and half-integer powers never need a branch choice.
//!
//! ```text
//! θ(x) = (x^{1/2} − x^{−1/2}) · ∏_{i≥1} (1 − q^i x)(1 − q^i / x)
//! φ(x, y) = θ(xy) / (θ(x) θ(y))
//! ```

use crate::cx::Cx;
use crate::error::{Error, Result};
use rug::Float;
use std::collections::BTreeMap;
use std::fmt;

/// Default size below which a denominator is treated as a pole.
pub const POLE_THRESHOLD: f64 = 1e-20;

/// `|q|` at or above this bound is refused: the product converges too slowly.
pub const Q_ABS_MAX: f64 = 1.0 - 1e-3;

#[derive(Clone, Debug)]
pub struct EllipticParams {
    q: Cx,
    log_q: Cx,
    precision_bits: u32,
    truncation_tol: f64,
    pole_threshold: f64,
    ln_abs_q: f64,
    /// q^i and q^{2i} for i = 1..len, enough for |log x| = 0.
    qpow: Vec<(Cx, Cx)>,
}

impl EllipticParams {
    pub fn new(q_re: f64, q_im: f64, precision_bits: u32, truncation_tol: f64) -> Result<Self> {
        let q = Cx::from_f64(precision_bits, q_re, q_im);
        Self::from_q(q, precision_bits, truncation_tol)
    }

    pub fn from_q(q: Cx, precision_bits: u32, truncation_tol: f64) -> Result<Self> {
        if precision_bits < 64 {
            return Err(Error::InvalidParams(format!("precision {precision_bits} bits is below 64")));
        }
        if !(truncation_tol > 0.0 && truncation_tol < 1.0) {
            return Err(Error::InvalidParams(format!("truncation tolerance {truncation_tol} not in (0,1)")));
        }
        let q = q.with_prec(precision_bits);
        let a = q.abs_f64();
        if q.is_zero() || !(a < Q_ABS_MAX) {
            return Err(Error::InvalidParams(format!("|q| = {a} must lie in (0, {Q_ABS_MAX})")));
        }
        let log_q = q.ln();
        let mut p = EllipticParams {
            q,
            log_q,
            precision_bits,
            truncation_tol,
            pole_threshold: POLE_THRESHOLD,
            ln_abs_q: a.ln(),
            qpow: Vec::new(),
        };
        let n = p.terms_for(0.0);
        p.qpow = p.powers(n);
        Ok(p)
    }

    /// Default modular parameter q = 0.1 at 256 bits, tail cut at 1e-60.
    pub fn standard() -> Self {
        Self::new(0.1, 0.0, 256, 1e-60).expect("default parameters are valid")
    }

    /// The same modular parameter at a different working precision.
    pub fn with_precision(&self, precision_bits: u32) -> Self {
        let mut p = Self::from_q(self.q.clone(), precision_bits, self.truncation_tol).expect("already validated");
        p.pole_threshold = self.pole_threshold;
        p
    }

    /// The same modular parameter with `extra_bits` more precision, the
    /// truncation tolerance tightened by 2^{-extra_bits} and the pole
    /// threshold by 2^{-2·extra_bits}: near-cancelling denominators are
    /// legitimate when the extra bits absorb them.
    pub fn with_guard_bits(&self, extra_bits: u32) -> Self {
        let tol = self.truncation_tol * 2f64.powi(-(extra_bits as i32));
        let mut p = Self::from_q(self.q.clone(), self.precision_bits + extra_bits, tol.max(f64::MIN_POSITIVE))
            .expect("already validated");
        p.pole_threshold = (self.pole_threshold * 2f64.powi(-2 * extra_bits as i32)).max(f64::MIN_POSITIVE);
        p
    }

    /// Denominators below this size are reported as poles.
    pub fn pole_threshold(&self) -> f64 {
        self.pole_threshold
    }

    pub fn q(&self) -> &Cx {
        &self.q
    }

    pub fn log_q(&self) -> &Cx {
        &self.log_q
    }

    pub fn log_sqrt_q(&self) -> Cx {
        self.log_q.scale_f64(0.5)
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn truncation_tol(&self) -> f64 {
        self.truncation_tol
    }

    /// Number of product factors N with |q|^N · e^{|Re w|} below the tolerance.
    pub fn terms_for(&self, abs_re_w: f64) -> usize {
        let n = (self.truncation_tol.ln() - abs_re_w) / self.ln_abs_q;
        (n.ceil().max(1.0) as usize) + 1
    }

    fn powers(&self, n: usize) -> Vec<(Cx, Cx)> {
        let mut out = Vec::with_capacity(n);
        let mut qi = self.q.clone();
        for _ in 0..n {
            let q2i = &qi * &qi;
            out.push((qi.clone(), q2i));
            qi = &qi * &self.q;
        }
        out
    }

    pub fn cx(&self, re: f64, im: f64) -> Cx {
        Cx::from_f64(self.precision_bits, re, im)
    }

    pub fn zero(&self) -> Cx {
        Cx::zero(self.precision_bits)
    }

    pub fn one(&self) -> Cx {
        Cx::one(self.precision_bits)
    }

    /// θ at `x = e^w`.
    pub fn theta(&self, w: &Cx) -> Cx {
        let w = if w.prec() == self.precision_bits { w.clone() } else { w.with_prec(self.precision_bits) };
        let x = w.exp();
        let xi = x.recip();
        let s = &x + &xi;
        let h = w.scale_f64(0.5).exp();
        let mut r = &h - &h.recip();
        let need = self.terms_for(w.re.to_f64().abs());
        let extra;
        let pw: &[(Cx, Cx)] = if need <= self.qpow.len() {
            &self.qpow[..need]
        } else {
            extra = self.powers(need);
            &extra
        };
        let one = self.one();
        for (qi, q2i) in pw {
            // (1 − q^i x)(1 − q^i/x) = 1 − q^i (x + 1/x) + q^{2i}
            let mut f = &one - &(qi * &s);
            f += q2i;
            r *= &f;
        }
        r
    }

    /// θ(w), failing when it is too small to divide by.
    pub fn theta_nonzero(&self, w: &Cx, what: impl FnOnce() -> String) -> Result<Cx> {
        let t = self.theta(w);
        if t.abs_f64() < self.pole_threshold {
            return Err(Error::PoleAtArgument(what()));
        }
        Ok(t)
    }

    /// φ(x, y) = θ(xy) / (θ(x) θ(y)).
    pub fn phi(&self, wx: &Cx, wy: &Cx) -> Result<Cx> {
        let tx = self.theta_nonzero(wx, || format!("phi first argument {wx}"))?;
        let ty = self.theta_nonzero(wy, || format!("phi second argument {wy}"))?;
        Ok(&self.theta(&(wx + wy)) / &(&tx * &ty))
    }

    /// Θ of a virtual character: numerator thetas over denominator thetas.
    pub fn theta_of_char(&self, c: &VirtualChar, tbl: &SymbolTable) -> Result<Cx> {
        let mut num = self.one();
        let mut den = self.one();
        for (sign, m) in c.terms() {
            let w = m.eval(tbl)?;
            if *sign > 0 {
                num *= self.theta(&w);
            } else {
                let t = self.theta(&w);
                if t.abs_f64() < self.pole_threshold {
                    return Err(Error::PoleAtArgument(m.to_string()));
                }
                den *= t;
            }
        }
        Ok(&num / &den)
    }
}

/// Relative residual of the quasiperiod law θ(xq) = −θ(x)/(x√q).
pub fn quasiperiod_residual(ell: &EllipticParams, w: &Cx) -> f64 {
    let lhs = ell.theta(&(w + ell.log_q()));
    let t = ell.theta(w);
    let rhs = -(&t / &(w + &ell.log_sqrt_q()).exp());
    crate::cx::rel_diff(&lhs, &rhs, 1e-300)
}

/// Relative residual of θ(1/x) = −θ(x).
pub fn reflection_residual(ell: &EllipticParams, w: &Cx) -> f64 {
    let a = ell.theta(&-w);
    let b = -ell.theta(w);
    crate::cx::rel_diff(&a, &b, 1e-300)
}

/// Relative residual of the three-term relation
///
/// θ(ay₁/x)θ(hy₂/x)θ(hy₁/y₂)θ(a) = θ(ahy₁/x)θ(y₂/x)θ(y₁/y₂)θ(a/h) + θ(hy₁/x)θ(ay₂/x)θ(h)θ(ay₁/y₂)
///
/// with all arguments given as logs.
pub fn three_term_residual(ell: &EllipticParams, a: &Cx, h: &Cx, x: &Cx, y1: &Cx, y2: &Cx) -> f64 {
    let t = |w: Cx| ell.theta(&w);
    let lhs = t(a + y1 - x) * t(h + y2 - x) * t(h + y1 - y2) * t(a.clone());
    let r1 = t(&(a + h) + &(y1 - x)) * t(y2 - x) * t(y1 - y2) * t(a - h);
    let r2 = t(&(h + y1) - x) * t(&(a + y2) - x) * t(h.clone()) * t(&(a + y1) - y2);
    crate::cx::rel_diff(&lhs, &(r1 + r2), 1e-300)
}

/// Relative residual of the four-term relation in the seven variables
/// (h, a₁, a₂, x₁, x₂, y₁, y₂), all as logs.
pub fn four_term_residual(ell: &EllipticParams, v: [&Cx; 7]) -> f64 {
    let [h, a1, a2, x1, x2, y1, y2] = v;
    let t = |w: Cx| ell.theta(&w);
    let a12h = &(a1 + a2) + h;
    let a2h = a2 + h;
    let l1 = t(h.clone())
        * t(y1 - y2)
        * t(&(h + y1) - x1)
        * t(&(&a2h + y2) - x1)
        * t(&(&a12h + y1) - x2)
        * t(x2 - y2)
        * t(&(a1 + x2) - x1);
    let l2 = t(&(&a12h + y1) - x1)
        * t(x1 - y2)
        * t(&(h + y1) - x2)
        * t(&(&a2h + y2) - x2)
        * t(&(h + x2) - x1)
        * t(y1 - y2)
        * t(a1.clone());
    let r1 = t(h.clone())
        * t(x1 - x2)
        * t(&(&a12h + y2) - x1)
        * t(&(&a2h + y1) - x2)
        * t(&(a1 + y1) - y2)
        * t(&(h + y1) - x1)
        * t(x2 - y2);
    let r2 = t(&(h + y2) - x1)
        * t(x2 - y1)
        * t(x1 - x2)
        * t(&(h + y1) - y2)
        * t(&(&a12h + y1) - x1)
        * t(&(&a2h + y2) - x2)
        * t(a1.clone());
    crate::cx::rel_diff(&(l1 - l2), &(r2 - r1), 1e-300)
}

/// Assignment of complex logarithms to named symbols.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymbolTable {
    logs: BTreeMap<String, Cx>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: impl Into<String>, log: Cx) {
        self.logs.insert(name.into(), log);
    }

    pub fn with(mut self, name: impl Into<String>, log: Cx) -> Self {
        self.set(name, log);
        self
    }

    pub fn get(&self, name: &str) -> Result<&Cx> {
        self.logs.get(name).ok_or_else(|| Error::UnassignedSymbol(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.logs.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Cx)> {
        self.logs.iter()
    }

    pub fn len(&self) -> usize {
        self.logs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logs.is_empty()
    }
}

/// Laurent monomial with half-integer exponents, stored as twice the exponent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    halves: BTreeMap<String, i64>,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    /// `s^e` for an integer exponent.
    pub fn var(name: &str, e: i64) -> Self {
        Self::one().times(name, e)
    }

    /// Multiplies by `s^e`.
    pub fn times(self, name: &str, e: i64) -> Self {
        self.times_halves(name, 2 * e)
    }

    /// Multiplies by `s^{h/2}`.
    pub fn times_halves(mut self, name: &str, h: i64) -> Self {
        let v = self.halves.entry(name.to_string()).or_insert(0);
        *v += h;
        if *v == 0 {
            self.halves.remove(name);
        }
        self
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.clone();
        for (s, h) in &other.halves {
            out = out.times_halves(s, *h);
        }
        out
    }

    pub fn inv(&self) -> Monomial {
        Monomial { halves: self.halves.iter().map(|(s, h)| (s.clone(), -h)).collect() }
    }

    pub fn pow(&self, e: i64) -> Monomial {
        Monomial {
            halves: self.halves.iter().filter(|_| e != 0).map(|(s, h)| (s.clone(), h * e)).collect(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.halves.is_empty()
    }

    /// Exponent of a symbol, as `(numerator, 2)`-style half units.
    pub fn exponent_halves(&self, name: &str) -> i64 {
        self.halves.get(name).copied().unwrap_or(0)
    }

    /// Integer exponent of a symbol; panics on a genuine half-integer.
    pub fn exponent(&self, name: &str) -> i64 {
        let h = self.exponent_halves(name);
        assert!(h % 2 == 0, "exponent of {name} is not an integer");
        h / 2
    }

    pub fn symbols(&self) -> impl Iterator<Item = &String> {
        self.halves.keys()
    }

    /// Σ exponent(s) · log(s).
    pub fn eval(&self, tbl: &SymbolTable) -> Result<Cx> {
        let mut acc: Option<Cx> = None;
        for (s, h) in &self.halves {
            let l = tbl.get(s)?;
            let term = if h % 2 == 0 { l.scale_int(h / 2) } else { l.scale_f64(*h as f64 / 2.0) };
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        Ok(acc.unwrap_or_else(|| {
            let p = tbl.iter().next().map(|(_, v)| v.prec()).unwrap_or(64);
            Cx::zero(p)
        }))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.halves.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .halves
            .iter()
            .map(|(s, h)| match (h % 2 == 0, h / 2) {
                (true, 1) => s.clone(),
                (true, e) => format!("{s}^{e}"),
                (false, _) => format!("{s}^({h}/2)"),
            })
            .collect();
        write!(f, "{}", parts.join("·"))
    }
}

/// Signed multiset of monomials.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VirtualChar {
    terms: Vec<(i8, Monomial)>,
}

impl VirtualChar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, sign: i8, m: Monomial) {
        assert!(sign == 1 || sign == -1);
        self.terms.push((sign, m));
    }

    pub fn plus(mut self, m: Monomial) -> Self {
        self.push(1, m);
        self
    }

    pub fn minus(mut self, m: Monomial) -> Self {
        self.push(-1, m);
        self
    }

    pub fn terms(&self) -> &[(i8, Monomial)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn extend(&mut self, other: &VirtualChar) {
        self.terms.extend(other.terms.iter().cloned());
    }

    pub fn negate(&self) -> VirtualChar {
        VirtualChar { terms: self.terms.iter().map(|(s, m)| (-s, m.clone())).collect() }
    }

    /// Dual character: every monomial inverted.
    pub fn dual(&self) -> VirtualChar {
        VirtualChar { terms: self.terms.iter().map(|(s, m)| (*s, m.inv())).collect() }
    }

    /// Cancels equal monomials of opposite sign. The result is sorted.
    pub fn simplified(&self) -> VirtualChar {
        let mut mult: BTreeMap<Monomial, i64> = BTreeMap::new();
        for (s, m) in &self.terms {
            *mult.entry(m.clone()).or_insert(0) += *s as i64;
        }
        let mut terms = Vec::new();
        for (m, c) in mult {
            let s = if c > 0 { 1 } else { -1 };
            for _ in 0..c.abs() {
                terms.push((s, m.clone()));
            }
        }
        VirtualChar { terms }
    }

    /// Terms whose exponent of `name` has the given sign (+1 or −1).
    pub fn filter_by_exponent_sign(&self, name: &str, sign: i64) -> VirtualChar {
        VirtualChar {
            terms: self
                .terms
                .iter()
                .filter(|(_, m)| m.exponent_halves(name).signum() == sign)
                .cloned()
                .collect(),
        }
    }

    /// Determinant: product of monomials with multiplicity ±1.
    pub fn det(&self) -> Monomial {
        let mut out = Monomial::one();
        for (s, m) in &self.terms {
            out = out.mul(&m.pow(*s as i64));
        }
        out
    }
}

/// `max(|a|, |b|)` as a Float, used for scale-aware thresholds.
pub fn max_abs(a: &Cx, b: &Cx) -> Float {
    let x = a.abs();
    let y = b.abs();
    if x > y {
        x
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::rel_diff;

    fn ell() -> EllipticParams {
        EllipticParams::standard()
    }

    #[test]
    fn theta_vanishes_at_one() {
        assert!(ell().theta(&ell().zero()).is_zero());
    }

    #[test]
    fn theta_is_odd() {
        let e = ell();
        for (a, b) in [(0.3, 0.2), (-1.1, 2.5), (0.05, -3.0)] {
            assert!(reflection_residual(&e, &e.cx(a, b)) < 1e-70);
        }
    }

    #[test]
    fn theta_quasiperiod() {
        let e = ell();
        for (a, b) in [(0.3, 0.2), (-1.1, 2.5), (0.7, -0.4)] {
            assert!(quasiperiod_residual(&e, &e.cx(a, b)) < 1e-55);
        }
    }

    #[test]
    fn refuses_large_q() {
        assert!(EllipticParams::new(0.9995, 0.0, 128, 1e-30).is_err());
        assert!(EllipticParams::new(0.0, 0.0, 128, 1e-30).is_err());
        assert!(EllipticParams::new(0.5, 0.5, 128, 1e-30).is_ok());
    }

    #[test]
    fn truncation_index_meets_tolerance() {
        let e = ell();
        let n = e.terms_for(0.0);
        assert!(0.1f64.powi(n as i32) < 1e-60);
        assert!(e.terms_for(5.0) > n);
    }

    #[test]
    fn phi_symmetric_and_quasiperiodic() {
        let e = ell();
        let x = e.cx(0.2, 0.9);
        let y = e.cx(-0.4, 0.3);
        let a = e.phi(&x, &y).unwrap();
        assert!(rel_diff(&a, &e.phi(&y, &x).unwrap(), 1e-30) < 1e-70);
        // φ(xq, y) · y = φ(x, y)
        let shifted = &e.phi(&(&x + e.log_q()), &y).unwrap() * &y.exp();
        assert!(rel_diff(&shifted, &a, 1e-30) < 1e-55);
    }

    #[test]
    fn phi_pole_reported() {
        let e = ell();
        assert!(matches!(e.phi(&e.zero(), &e.cx(0.1, 0.0)), Err(Error::PoleAtArgument(_))));
    }

    #[test]
    fn monomial_eval_examples() {
        let p = 128;
        let tbl = SymbolTable::new()
            .with("u1", Cx::from_f64(p, 0.2, 0.1))
            .with("hbar", Cx::from_f64(p, 0.5, 0.0))
            .with("q", Cx::from_f64(p, -1.0, 0.0));
        assert!(Monomial::one().eval(&tbl).unwrap().is_zero());
        let m = Monomial::var("u1", 1).times("hbar", -1);
        let v = m.eval(&tbl).unwrap();
        assert!(rel_diff(&v, &Cx::from_f64(p, 0.2 - 0.5, 0.1), 1e-30) < 1e-30);
        let half = Monomial::one().times_halves("q", 1).eval(&tbl).unwrap();
        assert!(rel_diff(&half, &Cx::from_f64(p, -0.5, 0.0), 1e-30) < 1e-35);
        assert!(matches!(Monomial::var("z", 1).eval(&tbl), Err(Error::UnassignedSymbol(s)) if s == "z"));
    }

    #[test]
    fn monomial_group_laws() {
        let a = Monomial::var("u1", 2).times("hbar", -1);
        let b = Monomial::var("u2", 1).times("hbar", 1);
        assert!(a.mul(&a.inv()).is_one());
        assert_eq!(a.mul(&b), b.mul(&a));
        assert_eq!(a.mul(&b).exponent("hbar"), 0);
    }

    #[test]
    fn empty_and_single_characters() {
        let e = ell();
        let tbl = SymbolTable::new().with("u1", e.cx(0.3, 0.4));
        let v = e.theta_of_char(&VirtualChar::new(), &tbl).unwrap();
        assert_eq!(v, e.one());
        let c = VirtualChar::new().plus(Monomial::var("u1", 1));
        let v = e.theta_of_char(&c, &tbl).unwrap();
        assert_eq!(v, e.theta(&e.cx(0.3, 0.4)));
    }

    #[test]
    fn simplification_cancels_pairs() {
        let m = Monomial::var("a", 1);
        let c = VirtualChar::new().plus(m.clone()).minus(m.clone()).plus(Monomial::var("b", 1));
        let s = c.simplified();
        assert_eq!(s.len(), 1);
        assert_eq!(s.terms()[0].1, Monomial::var("b", 1));
    }
}
