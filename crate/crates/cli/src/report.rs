//! JSON encodings. Complex numbers are `{"re", "im"}` decimal strings carrying
//! the full working precision, so reports round-trip.

use serde_json::{json, Map, Value};
use stabenv::cx::Cx;
use stabenv::envelope_x::{RestrictionMatrix, XParams};
use stabenv::envelope_xprime::XpParams;
use stabenv::limit::LimitConfig;
use stabenv::rect_combinatorics::{Cell, Subset, Tree, YoungDiagram};
use stabenv::theta_core::{EllipticParams, SymbolTable};

pub fn cx(c: &Cx) -> Value {
    let (re, im) = c.to_strings(Cx::decimal_digits(c.prec()));
    json!({ "re": re, "im": im })
}

/// f64 residuals as short scientific strings: exact, stable across
/// platforms, and readable.
pub fn real(x: f64) -> Value {
    Value::String(format!("{x:.6e}"))
}

pub fn table(t: &SymbolTable) -> Value {
    let mut m = Map::new();
    for (name, log) in t.iter() {
        m.insert(name.clone(), cx(log));
    }
    Value::Object(m)
}

pub fn x_params(p: &XParams) -> Value {
    table(&p.symbol_table())
}

pub fn xprime_params(p: &XpParams) -> Value {
    table(&p.symbol_table())
}

pub fn elliptic(ell: &EllipticParams) -> Value {
    json!({
        "q": cx(ell.q()),
        "precision_bits": ell.precision_bits(),
        "truncation_tol": real(ell.truncation_tol()),
    })
}

pub fn limit(cfg: &LimitConfig) -> Value {
    json!({
        "epsilon": real(cfg.epsilon),
        "levels": cfg.levels,
        "schedule": (0..cfg.levels).map(|l| real(cfg.epsilon / 2f64.powi(l as i32))).collect::<Vec<_>>(),
        "guard_bits": cfg.guard_bits,
        "tol": real(cfg.tol),
        "seed": cfg.seed,
    })
}

pub fn subset(p: &Subset) -> Value {
    json!(p.elems())
}

pub fn diagram(d: &YoungDiagram) -> Value {
    json!(d.trimmed())
}

pub fn cell(c: &Cell) -> Value {
    json!([c.i, c.j])
}

pub fn tree(t: &Tree) -> Value {
    json!({
        "root": t.root.as_ref().map(cell),
        "edges": t.edges.iter().map(|(a, b)| json!([cell(a), cell(b)])).collect::<Vec<_>>(),
        "kappa": t.kappa(),
    })
}

pub fn matrix(m: &RestrictionMatrix) -> Value {
    json!({
        "labels": m.labels,
        "entries": m.entries.iter().map(|r| r.iter().map(cx).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}
