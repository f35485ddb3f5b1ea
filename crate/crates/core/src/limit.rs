//! Values of functions with removable singularities at a point.
//!
//! The function is sampled at `base ± t·ξ` for a geometric ladder
//! `t = ε, ε/2, ε/4, …`. The symmetric average removes odd powers of `t`,
//! and Richardson extrapolation in `t²` removes the even ones. Repeating with
//! a second random direction `ξ'` detects limits that depend on the
//! direction of approach.

use crate::cx::{rel_diff, Cx};
use crate::error::{Error, Result};
use crate::sampling::LogSampler;

#[derive(Clone, Debug, PartialEq)]
pub struct LimitConfig {
    /// Largest step ε, in (0, 1e-4].
    pub epsilon: f64,
    /// Number of steps in the ladder (at least 2).
    pub levels: usize,
    /// Extra working precision for the sampled evaluations.
    pub guard_bits: u32,
    /// Relative disagreement between directions that counts as unstable.
    pub tol: f64,
    /// Absolute floor for the relative comparison.
    pub floor: f64,
    /// Seed of the perturbation directions.
    pub seed: u64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig { epsilon: 1e-8, levels: 4, guard_bits: 128, tol: 1e-6, floor: 1e-30, seed: 0x5eed }
    }
}

impl LimitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1e-4) {
            return Err(Error::InvalidParams(format!("epsilon {} outside (0, 1e-4]", self.epsilon)));
        }
        if self.levels < 2 {
            return Err(Error::InvalidParams("need at least two extrapolation levels".into()));
        }
        Ok(())
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Extrapolates `g(0)` from samples `g(h_l)`, `h_l = h_0 / 2^l`, of an even
/// function of h. Returns the value and the last correction as an error
/// estimate.
pub fn richardson_even(samples: &[Cx]) -> (Cx, f64) {
    assert!(!samples.is_empty());
    let mut prev: Vec<Cx> = vec![samples[0].clone()];
    let mut err = f64::INFINITY;
    for (l, s) in samples.iter().enumerate().skip(1) {
        let mut row = vec![s.clone()];
        let mut factor: i64 = 1;
        for m in 1..=l {
            factor *= 4;
            let d = &row[m - 1] - &prev[m - 1];
            let next = &row[m - 1] + &d.div_int(factor - 1);
            row.push(next);
        }
        err = (&row[l] - &row[l - 1]).abs_f64();
        prev = row;
    }
    (prev.pop().unwrap(), err)
}

/// Extrapolated value, error estimate and the largest sampled magnitude.
#[derive(Clone, Debug)]
pub struct Extrapolation {
    pub value: Cx,
    pub error_estimate: f64,
    /// max |f(±t)| over the ladder: the size of the function near the point.
    pub scale: f64,
}

/// Limit of `f(t)` as `t → 0` from the symmetric ladder.
pub fn limit_at_zero<F>(mut f: F, cfg: &LimitConfig) -> Result<Extrapolation>
where
    F: FnMut(f64) -> Result<Cx>,
{
    cfg.validate()?;
    let mut samples = Vec::with_capacity(cfg.levels);
    let mut scale: f64 = 0.0;
    let mut t = cfg.epsilon;
    for _ in 0..cfg.levels {
        let (a, b) = (f(t)?, f(-t)?);
        scale = scale.max(a.abs_f64()).max(b.abs_f64());
        samples.push((a + b).scale_f64(0.5));
        t *= 0.5;
    }
    let (value, error_estimate) = richardson_even(&samples);
    Ok(Extrapolation { value, error_estimate, scale })
}

/// Limit of `f(base + t·dir)` as `t → 0`.
pub fn directional_limit<F>(mut f: F, base: &[Cx], dir: &[Cx], cfg: &LimitConfig) -> Result<Extrapolation>
where
    F: FnMut(&[Cx]) -> Result<Cx>,
{
    assert_eq!(base.len(), dir.len());
    let mut pt = base.to_vec();
    limit_at_zero(
        |t| {
            for ((p, b), d) in pt.iter_mut().zip(base).zip(dir) {
                *p = b + &d.scale_f64(t);
            }
            f(&pt)
        },
        cfg,
    )
}

/// Result of a cross-validated limit.
#[derive(Clone, Debug)]
pub struct LimitValue {
    pub value: Cx,
    /// Richardson correction at the last level, first direction.
    pub error_estimate: f64,
    /// Size of the function near the point (see [`Extrapolation::scale`]).
    pub scale: f64,
    /// Disagreement between the two directions, relative to
    /// max(|L₁|, |L₂|, scale, floor).
    pub disagreement: f64,
}

/// Limit of `f` at `base` along two seeded random directions; fails with
/// [`Error::LimitUnstable`] when they disagree beyond `cfg.tol`.
///
/// The disagreement is measured against the size of the function near the
/// point as well as the two limits, so vanishing limits (where f is
/// O(t) along every direction) compare as equal rather than as noise over
/// noise.
pub fn stable_limit<F>(mut f: F, base: &[Cx], cfg: &LimitConfig) -> Result<LimitValue>
where
    F: FnMut(&[Cx]) -> Result<Cx>,
{
    let prec = base.first().map(|c| c.prec()).unwrap_or(64);
    let d1 = LogSampler::new(cfg.seed, prec).next_vec(base.len());
    let d2 = LogSampler::new(cfg.seed ^ 0x9e37_79b9_7f4a_7c15, prec).next_vec(base.len());
    let e1 = directional_limit(&mut f, base, &d1, cfg)?;
    let e2 = directional_limit(&mut f, base, &d2, cfg)?;
    let scale = e1.scale.max(e2.scale);
    let disagreement = rel_diff(&e1.value, &e2.value, cfg.floor.max(scale));
    if disagreement > cfg.tol {
        return Err(Error::LimitUnstable { disagreement });
    }
    Ok(LimitValue { value: e1.value, error_estimate: e1.error_estimate, scale, disagreement })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_is_exact_on_even_polynomials() {
        let g = |h: f64| 3.0 + 2.0 * h * h - 5.0 * h.powi(4);
        let s: Vec<Cx> = (0..3).map(|l| Cx::from_f64(128, g(0.1 / 2f64.powi(l)), 0.0)).collect();
        let (v, _) = richardson_even(&s);
        assert!((v.re.to_f64() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn removable_singularity() {
        // (e^t − 1)/t → 1 at t = 0.
        let cfg = LimitConfig::default().with_epsilon(1e-4);
        let v = limit_at_zero(
            |t| {
                let w = Cx::from_f64(256, t, 0.0);
                Ok(&(&w.exp() - &Cx::one(256)) / &w)
            },
            &cfg,
        )
        .unwrap()
        .value;
        assert!(rel_diff(&v, &Cx::one(256), 1e-30) < 1e-25);
    }

    #[test]
    fn direction_dependent_limit_is_rejected() {
        // x/y has no limit at the origin.
        let base = vec![Cx::zero(256), Cx::zero(256)];
        let r = stable_limit(|x| Ok(&x[0] / &x[1]), &base, &LimitConfig::default());
        assert!(matches!(r, Err(Error::LimitUnstable { .. })));
    }

    #[test]
    fn rejects_large_epsilon() {
        let cfg = LimitConfig::default().with_epsilon(0.1);
        assert!(limit_at_zero(|_| Ok(Cx::zero(64)), &cfg).is_err());
    }
}
