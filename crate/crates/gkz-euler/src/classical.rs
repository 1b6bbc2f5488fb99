//! Classical one- and two-variable hypergeometric series, truncated, and the
//! explicit bilinear identities they satisfy. These sit outside the GKZ
//! machinery and serve as independent cross-checks of it.

use crate::specfun::{pochhammer, SpecfunError};
use num_complex::Complex64;

type C = Complex64;

fn poch(a: C, n: i64) -> Result<C, SpecfunError> {
    pochhammer(a, C::new(n as f64, 0.0))
}

/// `₂F₁(a,b;c;x)` summed over `n < terms`.
pub fn hyp2f1(a: C, b: C, c: C, x: C, terms: usize) -> C {
    let mut t = C::new(1.0, 0.0);
    let mut s = t;
    for n in 0..terms.saturating_sub(1) {
        let n = n as f64;
        t *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x;
        s += t;
    }
    s
}

/// `₁F₁(a;c;x)` summed over `n < terms`.
pub fn hyp1f1(a: C, c: C, x: C, terms: usize) -> C {
    let mut t = C::new(1.0, 0.0);
    let mut s = t;
    for n in 0..terms.saturating_sub(1) {
        let n = n as f64;
        t *= (a + n) / ((c + n) * (n + 1.0)) * x;
        s += t;
    }
    s
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `Σ_{m+n<terms} coef(m,n) x^m y^n / (m! n!)`.
fn double_sum(
    x: C,
    y: C,
    terms: usize,
    coef: impl Fn(i64, i64) -> Result<C, SpecfunError>,
) -> Result<C, SpecfunError> {
    let mut s = C::new(0.0, 0.0);
    for m in 0..terms {
        for n in 0..terms - m {
            let w = x.powu(m as u32) * y.powu(n as u32) / (factorial(m) * factorial(n));
            s += coef(m as i64, n as i64)? * w;
        }
    }
    Ok(s)
}

/// Appell `F_1(a,b,b′;c;x,y) = Σ (a)_{m+n}(b)_m(b′)_n / ((c)_{m+n} m! n!) x^m y^n`.
pub fn appell_f1(a: C, b: C, bp: C, c: C, x: C, y: C, terms: usize) -> Result<C, SpecfunError> {
    double_sum(x, y, terms, |m, n| Ok(poch(a, m + n)? * poch(b, m)? * poch(bp, n)? / poch(c, m + n)?))
}

/// Horn `G_2(a,a′,b,b′;x,y) = Σ (a)_m(a′)_n(b)_{n−m}(b′)_{m−n} / (m! n!) x^m y^n`.
pub fn horn_g2(a: C, ap: C, b: C, bp: C, x: C, y: C, terms: usize) -> Result<C, SpecfunError> {
    double_sum(x, y, terms, |m, n| Ok(poch(a, m)? * poch(ap, n)? * poch(b, n - m)? * poch(bp, m - n)?))
}

/// Humbert `Φ_1(α,β;γ;x,y) = Σ (α)_{m+n}(β)_m / ((γ)_{m+n} m! n!) x^m y^n`.
pub fn humbert_phi1(al: C, be: C, ga: C, x: C, y: C, terms: usize) -> Result<C, SpecfunError> {
    double_sum(x, y, terms, |m, n| Ok(poch(al, m + n)? * poch(be, m)? / poch(ga, m + n)?))
}

/// Humbert `Φ_2(β_1,β_2;γ;x,y) = Σ (β_1)_m(β_2)_n / ((γ)_{m+n} m! n!) x^m y^n`.
pub fn humbert_phi2(b1: C, b2: C, ga: C, x: C, y: C, terms: usize) -> Result<C, SpecfunError> {
    double_sum(x, y, terms, |m, n| Ok(poch(b1, m)? * poch(b2, n)? / poch(ga, m + n)?))
}

/// Horn `Γ_1(α,β_1,β_2;x,y) = Σ (α)_m(β_1)_{n−m}(β_2)_{m−n} / (m! n!) x^m y^n`.
pub fn horn_gamma1(al: C, b1: C, b2: C, x: C, y: C, terms: usize) -> Result<C, SpecfunError> {
    double_sum(x, y, terms, |m, n| Ok(poch(al, m)? * poch(b1, n - m)? * poch(b2, m - n)?))
}

/// Both sides of an explicit identity.
#[derive(Clone, Copy, Debug)]
pub struct Sides {
    pub lhs: C,
    pub rhs: C,
}

impl Sides {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).norm() / self.rhs.norm().max(1.0)
    }
}

fn r(x: f64) -> C {
    C::new(x, 0.0)
}

/// `(1−γ+α)(1−γ+β) F(α,β;γ) F(−α,−β;2−γ) − αβ F(γ−α−1,γ−β−1;γ) F(1−γ+α,1−γ+β;2−γ)
/// = (1−γ+α+β)(1−γ)`.
pub fn gauss_identity(al: f64, be: f64, ga: f64, x: f64, terms: usize) -> Sides {
    let (a, b, g, x) = (r(al), r(be), r(ga), r(x));
    let one = r(1.0);
    let lhs = (one - g + a) * (one - g + b) * hyp2f1(a, b, g, x, terms) * hyp2f1(-a, -b, 2.0 - g, x, terms)
        - a * b * hyp2f1(g - a - 1.0, g - b - 1.0, g, x, terms) * hyp2f1(one - g + a, one - g + b, 2.0 - g, x, terms);
    Sides { lhs, rhs: (one - g + a + b) * (one - g) }
}

/// `(γ−α−1) M(α;γ;x) M(−α;2−γ;−x) + α M(1+α−γ;2−γ;x) M(γ−α−1;γ;−x) = γ−1`.
pub fn kummer_identity(al: f64, ga: f64, x: f64, terms: usize) -> Sides {
    let (a, g, x) = (r(al), r(ga), r(x));
    let lhs = (g - a - 1.0) * hyp1f1(a, g, x, terms) * hyp1f1(-a, 2.0 - g, -x, terms)
        + a * hyp1f1(1.0 + a - g, 2.0 - g, x, terms) * hyp1f1(g - a - 1.0, g, -x, terms);
    Sides { lhs, rhs: g - 1.0 }
}

/// Three-term bilinear identity for `F_1` and `G_2` on the slice
/// `z_2 = z_3 = z_4 = z_6 = 1`.
pub fn appell_f1_identity(c: [f64; 4], z1: f64, z5: f64, terms: usize) -> Result<Sides, SpecfunError> {
    let [c1, c2, c3, c4] = c.map(r);
    let (z1, z5) = (r(z1), r(z5));
    let one = r(1.0);
    let s = c1 + c2 + c3;
    let t1 = c1 / (c4 * (c1 - c4))
        * appell_f1(c4, c2, c3, one + c4 - c1, z1 * z5, z1, terms)?
        * appell_f1(-c4, -c2, -c3, one - c4 + c1, z1 * z5, z1, terms)?;
    let t2 = c3 / ((c1 + c3 - c4) * (c4 - c1))
        * horn_g2(c1, c2, c4 - c1, c1 + c3 - c4, -z1, -z5, terms)?
        * horn_g2(-c1, -c2, c1 - c4, c4 - c1 - c3, -z1, -z5, terms)?;
    let t3 = c2 / ((s - c4) * (c4 - c1 - c3))
        * appell_f1(s - c4, c1, c3, one + c1 + c3 - c4, z1 * z5, z5, terms)?
        * appell_f1(c4 - s, -c1, -c3, one + c4 - c1 - c3, z1 * z5, z5, terms)?;
    Ok(Sides { lhs: t1 + t2 + t3, rhs: s / (c4 * (s - c4)) })
}

/// Three-term bilinear identity for `Φ_1`, `Φ_2` and `Γ_1`.
pub fn humbert_phi1_identity(g1: f64, g2: f64, c: f64, z: f64, w: f64, terms: usize) -> Result<Sides, SpecfunError> {
    let (g1, g2, c, z, w) = (r(g1), r(g2), r(c), r(z), r(w));
    let one = r(1.0);
    let t1 = c * (g1 - c)
        * humbert_phi2(g1, g2, one + g1 + g2 - c, -z * w, -w, terms)?
        * humbert_phi2(-g1, -g2, one - g1 - g2 + c, z * w, w, terms)?;
    let t2 = g1 * (c - g1 - g2)
        * humbert_phi1(c, g2, one + c - g1, z, -z * w, terms)?
        * humbert_phi1(-c, -g2, one - c + g1, z, z * w, terms)?;
    let t3 = c * g2
        * horn_gamma1(g1, c - g1, g1 + g2 - c, -z, w, terms)?
        * horn_gamma1(-g1, -c + g1, -g1 - g2 + c, -z, -w, terms)?;
    Ok(Sides { lhs: t1 + t2 + t3, rhs: (c - g1 - g2) * (g1 - c) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_at_closed_forms() {
        // ₂F₁(1,1;2;x) = −ln(1−x)/x, ₁F₁(a;a;x) = e^x
        let x = 0.3;
        let f = hyp2f1(r(1.0), r(1.0), r(2.0), r(x), 200);
        assert!((f.re + (1.0f64 - x).ln() / x).abs() < 1e-14);
        let m = hyp1f1(r(0.7), r(0.7), r(0.4), 60);
        assert!((m.re - 0.4f64.exp()).abs() < 1e-14);
        // Φ_2(β_1,β_2;β_1+β_2;x,x) = ₁F₁(β_1+β_2;β_1+β_2;x)
        let p = humbert_phi2(r(0.3), r(0.4), r(0.7), r(0.2), r(0.2), 40).unwrap();
        assert!((p.re - 0.2f64.exp()).abs() < 1e-13);
        // F_1(a,b,b′;c;x,0) = ₂F₁(a,b;c;x)
        let f1 = appell_f1(r(0.3), r(0.5), r(0.2), r(0.9), r(0.25), r(0.0), 60).unwrap();
        assert!((f1 - hyp2f1(r(0.3), r(0.5), r(0.9), r(0.25), 60)).norm() < 1e-14);
    }

    #[test]
    fn gauss_identity_holds() {
        let s = gauss_identity(0.21, 0.47, 0.83, 0.3, 80);
        assert!(s.residual() < 1e-13, "{s:?}");
    }

    #[test]
    fn kummer_identity_holds() {
        let s = kummer_identity(0.23, 0.61, 0.7, 60);
        assert!(s.residual() < 1e-13, "{s:?}");
    }

    #[test]
    fn two_variable_identities_hold() {
        let f = appell_f1_identity([0.13, 0.27, 0.41, 0.33], 0.2, 0.25, 40).unwrap();
        assert!(f.residual() < 1e-11, "{f:?}");
        let p = humbert_phi1_identity(0.31, 0.47, 0.23, 0.2, 0.25, 40).unwrap();
        assert!(p.residual() < 1e-11, "{p:?}");
    }
}
