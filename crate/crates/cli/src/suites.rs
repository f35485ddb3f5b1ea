//! Verification suites behind `stabenv verify`.

use serde_json::{json, Value};
use stabenv::cx::rel_diff;
use stabenv::envelope_x::bold_stab_x_eval;
use stabenv::envelope_xprime::bold_stab_xprime;
use stabenv::error::{Error, Result};
use stabenv::limit::LimitConfig;
use stabenv::mirror::{
    admissible_instances, cancellation_residual, draw_params, gkm_check_pair, gkm_check_pair_x, gkm_edge, gkm_pairs,
    mother_k1_at_x_point, mother_k1_at_xprime_point, verify_mirror, MirrorConfig,
};
use stabenv::rect_combinatorics::{bj_inv, GrassData, Subset};
use stabenv::sampling::LogSampler;
use stabenv::theta_core::{
    four_term_residual, quasiperiod_residual, reflection_residual, three_term_residual, EllipticParams,
};

use crate::report;

pub const MIRROR_TOL: f64 = 1e-10;
pub const THETA_TOL: f64 = 1e-35;
pub const GKM_TOL: f64 = 1e-8;
pub const CANCELLATION_TOL: f64 = 1e-25;
pub const MOTHER_TOL: f64 = 1e-30;
/// Largest δ on the GKM hyperplane approach.
pub const GKM_OUTER_EPSILON: f64 = 1e-4;
pub const RESIDUAL_FLOOR: f64 = 1e-30;

pub struct Ctx {
    pub g: GrassData,
    pub ell: EllipticParams,
    pub limit: LimitConfig,
    pub seed: u64,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub allow_boundary: bool,
}

pub struct Outcome {
    pub report: Value,
    pub pass: bool,
}

fn header(ctx: &Ctx, suite: &str, tol: f64) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("suite".into(), json!(suite));
    m.insert("n".into(), json!(ctx.g.n));
    m.insert("k".into(), json!(ctx.g.k));
    m.insert("seed".into(), json!(ctx.seed));
    m.insert("elliptic".into(), report::elliptic(&ctx.ell));
    m.insert("tol".into(), report::real(tol));
    m
}

struct Stats {
    max: f64,
    sum: f64,
    count: usize,
}

impl Stats {
    fn new() -> Self {
        Stats { max: 0.0, sum: 0.0, count: 0 }
    }

    fn push(&mut self, r: f64) {
        self.max = self.max.max(r);
        self.sum += r;
        self.count += 1;
    }

    fn json(&self, tol: f64) -> Value {
        json!({
            "samples": self.count,
            "max": report::real(self.max),
            "mean": report::real(if self.count == 0 { 0.0 } else { self.sum / self.count as f64 }),
            "pass": self.max <= tol,
        })
    }
}

pub fn mirror(ctx: &Ctx) -> Result<Outcome> {
    let tol = ctx.tol.unwrap_or(MIRROR_TOL);
    let cfg = MirrorConfig { limit: ctx.limit.clone(), tol, floor: RESIDUAL_FLOOR };
    let r = verify_mirror(ctx.g, ctx.seed, &ctx.ell, &cfg)?;
    eprintln!("mirror n={} k={}: {} pairs in {:.1} s", r.n, r.k, r.pairs.len(), r.seconds);
    let mut m = header(ctx, "mirror", tol);
    m.insert("limit".into(), report::limit(&r.limit));
    m.insert("x_params".into(), report::x_params(&r.x_params));
    m.insert("xprime_params".into(), report::xprime_params(&r.xprime_params));
    let pairs: Vec<Value> = r
        .pairs
        .iter()
        .map(|p| {
            json!({
                "lambda": report::diagram(&p.lambda),
                "mu": report::diagram(&p.mu),
                "p": report::subset(&p.p),
                "q": report::subset(&p.q),
                "lhs": report::cx(&p.lhs),
                "rhs": report::cx(&p.rhs),
                "residual": report::real(p.residual),
                "pass": p.pass,
            })
        })
        .collect();
    m.insert("pairs".into(), Value::Array(pairs));
    m.insert("max_residual".into(), report::real(r.max_residual));
    m.insert("pass".into(), json!(r.pass));
    Ok(Outcome { report: Value::Object(m), pass: r.pass })
}

pub fn theta_identities(ctx: &Ctx) -> Result<Outcome> {
    let tol = ctx.tol.unwrap_or(THETA_TOL);
    let samples = ctx.samples.unwrap_or(100);
    let ell = &ctx.ell;
    let mut s = LogSampler::new(ctx.seed, ell.precision_bits());
    let (mut qp, mut refl, mut three, mut four) = (Stats::new(), Stats::new(), Stats::new(), Stats::new());
    for _ in 0..samples {
        let w = s.next_cx();
        qp.push(quasiperiod_residual(ell, &w));
        refl.push(reflection_residual(ell, &w));
        let v = s.next_vec(5);
        three.push(three_term_residual(ell, &v[0], &v[1], &v[2], &v[3], &v[4]));
        let v = s.next_vec(7);
        four.push(four_term_residual(ell, [&v[0], &v[1], &v[2], &v[3], &v[4], &v[5], &v[6]]));
    }
    let pass = [&qp, &refl, &three, &four].iter().all(|st| st.max <= tol);
    let mut m = header(ctx, "theta-identities", tol);
    m.insert("quasiperiod".into(), qp.json(tol));
    m.insert("reflection".into(), refl.json(tol));
    m.insert("three_term".into(), three.json(tol));
    m.insert("four_term".into(), four.json(tol));
    m.insert("pass".into(), json!(pass));
    Ok(Outcome { report: Value::Object(m), pass })
}

pub fn gkm(ctx: &Ctx) -> Result<Outcome> {
    let tol = ctx.tol.unwrap_or(GKM_TOL);
    let g = &ctx.g;
    let (px, pp) = draw_params(*g, ctx.seed, ctx.ell.precision_bits());
    let outer = ctx.limit.clone().with_epsilon(GKM_OUTER_EPSILON);
    let mut pass = true;
    let mut dual = Vec::new();
    for (lam, mu, e) in gkm_pairs(g)? {
        let r = gkm_check_pair(g, &lam, &mu, e, &px, &ctx.ell, &ctx.limit, &outer)?;
        let ok = r.residual <= tol;
        pass &= ok;
        dual.push(json!({
            "lambda": report::diagram(&lam),
            "mu": report::diagram(&mu),
            "i": e.0,
            "j": e.1,
            "columns": r.columns.iter().map(|c| json!({
                "nu": report::diagram(&c.nu),
                "lambda_value": report::cx(&c.lambda_value),
                "mu_value": report::cx(&c.mu_value),
                "residual": report::real(c.residual),
            })).collect::<Vec<_>>(),
            "residual": report::real(r.residual),
            "pass": ok,
        }));
    }
    let mut direct = Vec::new();
    let subsets = g.subsets();
    for (a, p) in subsets.iter().enumerate() {
        for s in &subsets[a + 1..] {
            if gkm_edge(p, s).is_err() {
                continue;
            }
            let r = gkm_check_pair_x(g, p, s, &px, &ctx.ell, RESIDUAL_FLOOR)?;
            let ok = r <= tol;
            pass &= ok;
            direct.push(json!({ "p": report::subset(p), "s": report::subset(s), "residual": report::real(r), "pass": ok }));
        }
    }
    let mut m = header(ctx, "gkm", tol);
    m.insert("limit".into(), report::limit(&ctx.limit));
    m.insert("outer_limit".into(), report::limit(&outer));
    m.insert("x_params".into(), report::x_params(&px));
    m.insert("xprime_params".into(), report::xprime_params(&pp));
    m.insert("xprime_pairs".into(), Value::Array(dual));
    m.insert("x_pairs".into(), Value::Array(direct));
    m.insert("pass".into(), json!(pass));
    Ok(Outcome { report: Value::Object(m), pass })
}

pub fn cancellation(ctx: &Ctx) -> Result<Outcome> {
    let tol = ctx.tol.unwrap_or(CANCELLATION_TOL);
    let g = &ctx.g;
    let (_, pp) = draw_params(*g, ctx.seed, ctx.ell.precision_bits());
    let inst = admissible_instances(g, ctx.allow_boundary);
    let mut pass = true;
    let mut rows = Vec::with_capacity(inst.len());
    for i in &inst {
        let r = cancellation_residual(g, i, &pp, &ctx.ell, &ctx.limit, ctx.allow_boundary)?;
        let ok = r <= tol;
        pass &= ok;
        rows.push(json!({
            "lambda": report::diagram(&i.lambda),
            "tree": report::tree(&i.tree),
            "box": report::cell(&i.at),
            "distance_from_minus_one": report::real(r),
            "pass": ok,
        }));
    }
    let mut m = header(ctx, "cancellation", tol);
    m.insert("allow_boundary".into(), json!(ctx.allow_boundary));
    m.insert("limit".into(), report::limit(&ctx.limit));
    m.insert("xprime_params".into(), report::xprime_params(&pp));
    m.insert("instances".into(), json!(inst.len()));
    m.insert("checks".into(), Value::Array(rows));
    m.insert("pass".into(), json!(pass));
    Ok(Outcome { report: Value::Object(m), pass })
}

pub fn mother_k1(ctx: &Ctx) -> Result<Outcome> {
    let tol = ctx.tol.unwrap_or(MOTHER_TOL);
    let g = ctx.g;
    if g.k != 1 {
        return Err(Error::InvalidParams(format!("mother-k1 needs k = 1, got k = {}", g.k)));
    }
    let draws = ctx.samples.unwrap_or(5);
    let ell = &ctx.ell;
    let prec = ell.precision_bits();
    let (mut xs, mut xps) = (Stats::new(), Stats::new());
    let mut params = Vec::with_capacity(draws);
    for d in 0..draws as u64 {
        let seed = ctx.seed.wrapping_add(d);
        let (px, pp) = draw_params(g, seed, prec);
        let mut s = LogSampler::new(seed ^ 0xa5a5, prec);
        let x = s.next_vec(g.n - 1);
        let y = s.next_cx();
        for m in 1..=g.n {
            let p = Subset::new(&g, vec![m])?;
            let lam = bj_inv(&p, &g)?;
            let a = mother_k1_at_x_point(&px, m, &x, ell)?;
            let b = bold_stab_xprime(&g, &lam, &x, &pp, ell)?;
            xs.push(rel_diff(&a, &b, RESIDUAL_FLOOR));
            let c = mother_k1_at_xprime_point(&px, m, &y, ell)?;
            let e = bold_stab_x_eval(&g, &p, std::slice::from_ref(&y), &px, ell)?;
            xps.push(rel_diff(&c, &e, RESIDUAL_FLOOR));
        }
        params.push(json!({ "seed": seed, "x_params": report::x_params(&px), "x": x.iter().map(report::cx).collect::<Vec<_>>(), "y": report::cx(&y) }));
    }
    let pass = xs.max <= tol && xps.max <= tol;
    let mut m = header(ctx, "mother-k1", tol);
    m.insert("draws".into(), Value::Array(params));
    m.insert("x_point_restrictions".into(), xs.json(tol));
    m.insert("xprime_point_restrictions".into(), xps.json(tol));
    m.insert("pass".into(), json!(pass));
    Ok(Outcome { report: Value::Object(m), pass })
}

/// Every suite at (n, k); the k = 1 Mother function runs at (n, 1).
pub fn all(ctx: &Ctx) -> Result<Outcome> {
    let k1 = Ctx {
        g: GrassData::new(ctx.g.n, 1)?,
        ell: ctx.ell.clone(),
        limit: ctx.limit.clone(),
        seed: ctx.seed,
        tol: ctx.tol,
        samples: None,
        allow_boundary: ctx.allow_boundary,
    };
    let mut reports = serde_json::Map::new();
    let mut pass = true;
    for (name, out) in [
        ("theta-identities", theta_identities(ctx)?),
        ("mother-k1", mother_k1(&k1)?),
        ("mirror", mirror(ctx)?),
        ("gkm", gkm(ctx)?),
        ("cancellation", cancellation(ctx)?),
    ] {
        pass &= out.pass;
        reports.insert(name.into(), out.report);
    }
    Ok(Outcome { report: json!({ "suite": "all", "reports": reports, "pass": pass }), pass })
}
