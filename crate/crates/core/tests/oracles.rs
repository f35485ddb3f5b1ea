//! Checks against independently written reference computations.

use stabenv::cx::{rel_diff, Cx};
use stabenv::envelope_x::{restrict_x, stab_x_eval, XParams};
use stabenv::envelope_xprime::{stab_xprime_eval, XpParams};
use stabenv::rect_combinatorics::{bj_inv, GrassData, Subset, YoungDiagram};
use stabenv::sampling::LogSampler;
use stabenv::theta_core::EllipticParams;

const PREC: u32 = 256;

/// θ(x)·(q; q)_∞ = x^{1/2} Σ_n (−1)^n q^{n(n+1)/2} x^n (Jacobi triple product).
fn theta_series(q: &Cx, w: &Cx) -> Cx {
    let lq = q.ln();
    let mut sum = Cx::zero(PREC);
    for n in -60i64..=60 {
        let e = &lq.scale_int(n * (n + 1) / 2) + &w.scale_int(n);
        let t = e.exp();
        if n % 2 == 0 {
            sum += &t;
        } else {
            sum -= &t;
        }
    }
    let mut euler = Cx::one(PREC);
    let mut qi = q.clone();
    for _ in 0..400 {
        euler = &euler * &(&Cx::one(PREC) - &qi);
        qi = &qi * q;
    }
    &(&w.scale_f64(0.5).exp() * &sum) / &euler
}

#[test]
fn theta_matches_triple_product_series() {
    let mut s = LogSampler::new(17, PREC);
    for (qr, qi) in [(0.1, 0.0), (0.3, 0.2), (-0.45, 0.1), (0.05, -0.4)] {
        let ell = EllipticParams::new(qr, qi, PREC, 1e-60).unwrap();
        for _ in 0..10 {
            let w = s.next_cx();
            let d = rel_diff(&ell.theta(&w), &theta_series(ell.q(), &w), 1e-300);
            assert!(d < 1e-55, "q = ({qr}, {qi}): {d:e}");
        }
    }
}

#[test]
fn phi_is_the_theta_ratio() {
    let ell = EllipticParams::standard();
    let mut s = LogSampler::new(18, PREC);
    for _ in 0..10 {
        let (a, b) = (s.next_cx(), s.next_cx());
        let want = &theta_series(ell.q(), &(&a + &b)) / &(&theta_series(ell.q(), &a) * &theta_series(ell.q(), &b));
        assert!(rel_diff(&ell.phi(&a, &b).unwrap(), &want, 1e-300) < 1e-55);
    }
}

/// For k = 1 the envelope of {m} vanishes at every point after m and not
/// at m itself.
#[test]
fn projective_space_support() {
    let ell = EllipticParams::standard();
    for n in 2..=5 {
        let g = GrassData::new(n, 1).unwrap();
        let prm = XParams::random(g, &mut LogSampler::new(19 + n as u64, PREC));
        for m in 1..=n {
            let p = Subset::new(&g, vec![m]).unwrap();
            for j in 1..=n {
                let q = Subset::new(&g, vec![j]).unwrap();
                let v = restrict_x(&g, &p, &q, &prm, &ell).unwrap();
                if j > m {
                    assert!(v.abs_f64() < 1e-60, "T[{m}][{j}] = {v}");
                } else if j == m {
                    assert!(v.abs_f64() > 1e-10);
                }
            }
        }
    }
}

/// The X envelope is symmetric under permuting its Chern roots.
#[test]
fn x_envelope_symmetric() {
    let ell = EllipticParams::standard();
    let g = GrassData::new(5, 2).unwrap();
    let prm = XParams::random(g, &mut LogSampler::new(20, PREC));
    let mut s = LogSampler::new(21, PREC);
    let y = s.next_vec(2);
    let swapped = vec![y[1].clone(), y[0].clone()];
    for p in g.subsets() {
        let a = stab_x_eval(&g, &p, &y, &prm, &ell).unwrap();
        let b = stab_x_eval(&g, &p, &swapped, &prm, &ell).unwrap();
        assert!(rel_diff(&a, &b, 1e-30) < 1e-60);
    }
}

/// The X' envelope is symmetric in the Chern roots of each diagonal.
#[test]
fn xprime_envelope_symmetric_on_diagonals() {
    let ell = EllipticParams::standard();
    let g = GrassData::new(4, 2).unwrap();
    let prm = XpParams::random(g, &mut LogSampler::new(22, PREC));
    let cells = g.cells();
    let mut s = LogSampler::new(23, PREC);
    let x = s.next_vec(cells.len());
    // Boxes (1,1) and (2,2) share content 2.
    let a = cells.iter().position(|c| (c.i, c.j) == (1, 1)).unwrap();
    let b = cells.iter().position(|c| (c.i, c.j) == (2, 2)).unwrap();
    let mut y = x.clone();
    y.swap(a, b);
    for lam in g.diagrams() {
        let u = stab_xprime_eval(&g, &lam, &x, &prm, &ell).unwrap();
        let v = stab_xprime_eval(&g, &lam, &y, &prm, &ell).unwrap();
        assert!(rel_diff(&u, &v, 1e-30) < 1e-55, "{lam}");
    }
}

#[test]
fn bijection_weights() {
    for n in 2..=9 {
        for k in 1..=n / 2 {
            let g = GrassData::new(n, k).unwrap();
            for p in g.subsets() {
                let lam: YoungDiagram = bj_inv(&p, &g).unwrap();
                assert_eq!(lam.size() + k * (k + 1) / 2, p.elems().iter().sum::<usize>());
            }
        }
    }
}
