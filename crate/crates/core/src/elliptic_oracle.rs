//! Closed-form periodic Allen-Cahn solutions through Jacobi elliptic functions.
//!
//! Every periodic solution of u'' = u^3 - u with a zero at the origin is
//! g(t, k) = k sqrt(2/(1+k^2)) sn(t / sqrt(1+k^2) | k). Internally the family is
//! parameterised by the complementary modulus k' = sqrt(1 - k^2), which keeps
//! the conserved quantity lam = k'^4 / (4 (1+k^2)^2) accurate when it is tiny.

use crate::error::{Error, Result};
use crate::scalar_field::potential;
use std::f64::consts::PI;

const LANDEN_DEPTH: usize = 32;

/// Complete elliptic integral of the first kind K(k), by the AGM.
#[allow(non_snake_case)]
pub fn complete_K(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!("complete_K requires 0 <= k < 1, got {k}")));
    }
    Ok(complete_k_from_kp(((1.0 - k) * (1.0 + k)).sqrt()))
}

pub(crate) fn complete_k_from_kp(kp: f64) -> f64 {
    let (mut a, mut b) = (1.0_f64, kp);
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    PI / (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// sn, cn, dn at modulus k.
pub fn jacobi_sn(x: f64, k: f64) -> Jacobi {
    assert!((0.0..=1.0).contains(&k), "modulus must lie in [0, 1]");
    jacobi_from_mc(x, (1.0 - k) * (1.0 + k))
}

/// sn, cn, dn given the complementary parameter mc = 1 - k^2, by the
/// descending Landen (Gauss) transformation.
pub fn jacobi_from_mc(x: f64, mc: f64) -> Jacobi {
    if mc == 0.0 {
        let cn = 1.0 / x.cosh();
        return Jacobi { sn: x.tanh(), cn, dn: cn };
    }
    let mut em = [0.0; LANDEN_DEPTH];
    let mut en = [0.0; LANDEN_DEPTH];
    let mut a = 1.0_f64;
    let mut emc = mc;
    let mut c = 1.0;
    let mut last = 0;
    for i in 0..LANDEN_DEPTH {
        last = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() <= 1e-15 * a {
            break;
        }
        emc *= a;
        a = c;
    }
    let u = c * x;
    let mut sn = u.sin();
    let mut cn = u.cos();
    let mut dn = 1.0;
    if sn != 0.0 {
        let mut a = cn / sn;
        c *= a;
        for i in (0..=last).rev() {
            let b = em[i];
            a *= c;
            c *= dn;
            dn = (en[i] + a) / (b + a);
            a = c / b;
        }
        let s = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn >= 0.0 { s } else { -s };
        cn = c * sn;
    }
    Jacobi { sn, cn, dn }
}

/// The solution family g(x, k) = k sqrt(2/(1+k^2)) sn(x/sqrt(1+k^2) | k).
pub fn ac_family(x: f64, k: f64) -> f64 {
    assert!(k > 0.0 && k <= 1.0, "ac_family requires 0 < k <= 1");
    let s = 1.0 + k * k;
    k * (2.0 / s).sqrt() * jacobi_sn(x / s.sqrt(), k).sn
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    pub k: f64,
    /// Complementary modulus sqrt(1 - k^2), carried at full precision.
    pub kp: f64,
    /// Distance between consecutive zeros of the family, in rescaled units.
    pub zero_spacing: f64,
}

impl EllipticModulus {
    pub fn from_kp(kp: f64) -> Self {
        let k = ((1.0 - kp) * (1.0 + kp)).sqrt();
        Self {
            k,
            kp,
            zero_spacing: zero_spacing_from_kp(kp),
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.k * (2.0 / (1.0 + self.k * self.k)).sqrt()
    }

    /// lam = W(amplitude), evaluated as k'^4 / (4 (1+k^2)^2).
    pub fn lam(&self) -> f64 {
        let q = self.kp * self.kp / (1.0 + self.k * self.k);
        0.25 * q * q
    }

    /// The modulus whose conserved quantity equals lam, 0 < lam < 1/4.
    pub fn from_lam(lam: f64) -> Result<Self> {
        if !(lam > 0.0 && lam < 0.25) {
            return Err(Error::Domain(format!("lam must lie in (0, 1/4), got {lam}")));
        }
        let q = 2.0 * lam.sqrt();
        Ok(Self::from_kp((2.0 * q / (1.0 + q)).sqrt()))
    }

    /// The family member at rescaled position t.
    pub fn eval(&self, t: f64) -> f64 {
        let s = 1.0 + self.k * self.k;
        self.amplitude() * jacobi_from_mc(t / s.sqrt(), self.kp * self.kp).sn
    }

    /// d/dt of the family member at rescaled position t.
    pub fn eval_dt(&self, t: f64) -> f64 {
        let s = 1.0 + self.k * self.k;
        let j = jacobi_from_mc(t / s.sqrt(), self.kp * self.kp);
        self.amplitude() * j.cn * j.dn / s.sqrt()
    }
}

/// 2 K(k) sqrt(1+k^2).
pub fn zero_spacing(k: f64) -> Result<f64> {
    Ok(2.0 * complete_K(k)? * (1.0 + k * k).sqrt())
}

fn zero_spacing_from_kp(kp: f64) -> f64 {
    2.0 * complete_k_from_kp(kp) * (2.0 - kp * kp).sqrt()
}

/// The modulus whose zero spacing equals L/eps, so that ac_family(x/eps, k)
/// restricted to one arch is the positive Dirichlet solution on [0, L].
pub fn modulus_for(eps: f64, length: f64) -> Result<EllipticModulus> {
    let target = length / eps;
    if target.is_nan() || target <= PI {
        return Err(Error::NoPositiveSolution {
            eps,
            length,
            threshold: length / PI,
        });
    }
    let spacing = |s: f64| zero_spacing_from_kp(s.exp());
    let (mut lo, mut hi) = (-740.0_f64, 0.0_f64);
    if spacing(lo) < target {
        return Err(Error::Domain(format!(
            "L/eps = {target} is beyond the representable modulus range"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spacing(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(EllipticModulus::from_kp((0.5 * (lo + hi)).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEpsPair {
    pub eps: f64,
    pub lam: f64,
    pub amplitude: f64,
}

pub fn lambda_of_eps(eps: f64, length: f64) -> Result<LambdaEpsPair> {
    let m = modulus_for(eps, length)?;
    Ok(LambdaEpsPair {
        eps,
        lam: m.lam(),
        amplitude: m.amplitude(),
    })
}

/// lam computed directly as W(amplitude), for cross-checks.
pub fn lam_from_amplitude(pair: &LambdaEpsPair) -> f64 {
    potential(pair.amplitude)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson_k(k: f64) -> f64 {
        let n = 20000;
        let h = 0.5 * PI / n as f64;
        let f = |th: f64| 1.0 / (1.0 - k * k * th.sin().powi(2)).sqrt();
        let mut s = f(0.0) + f(0.5 * PI);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn complete_k_values() {
        assert!((complete_K(0.0).unwrap() - 0.5 * PI).abs() < 1e-15);
        assert!((complete_K(0.5).unwrap() - simpson_k(0.5)).abs() < 1e-10);
        let ks = [0.0, 0.3, 0.6, 0.9, 0.99];
        for w in ks.windows(2) {
            assert!(complete_K(w[1]).unwrap() > complete_K(w[0]).unwrap());
        }
        assert!(matches!(complete_K(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sn_degenerate_moduli() {
        for x in [0.3, 1.0, 2.5] {
            assert!((jacobi_sn(x, 0.0).sn - x.sin()).abs() < 1e-12);
            assert!((jacobi_sn(x, 1.0).sn - x.tanh()).abs() < 1e-12);
        }
        let j = jacobi_sn(0.7, 0.8);
        assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() < 1e-12);
        assert!((j.dn * j.dn + 0.64 * j.sn * j.sn - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sn_quarter_period_is_one() {
        for k in [0.2, 0.7, 0.99, 0.999999] {
            let kk = complete_K(k).unwrap();
            assert!((jacobi_sn(kk, k).sn - 1.0).abs() < 1e-12, "k = {k}");
            assert!(jacobi_sn(2.0 * kk, k).sn.abs() < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn family_ode_residual() {
        for k in [0.5, 0.9, 0.999] {
            let h = 2e-3;
            for i in 0..50 {
                let x = 0.1 + 0.37 * i as f64;
                let f = |y: f64| ac_family(y, k);
                let d2 = (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h)
                    - f(x - 2.0 * h))
                    / (12.0 * h * h);
                let g = f(x);
                assert!((d2 - (g * g * g - g)).abs() < 1e-9, "k = {k}, x = {x}, err = {:e}", d2 - (g * g * g - g));
            }
        }
    }

    #[test]
    fn family_limits() {
        assert_eq!(ac_family(0.0, 0.6), 0.0);
        for x in [0.2, 1.5, 4.0] {
            assert!((ac_family(x, 1.0) - (x / std::f64::consts::SQRT_2).tanh()).abs() < 1e-12);
        }
        let k = 0.9;
        let quarter = 0.5 * zero_spacing(k).unwrap();
        let amp = k * (2.0 / (1.0 + k * k)).sqrt();
        assert!((ac_family(quarter, k) - amp).abs() < 1e-10);
    }

    #[test]
    fn zero_spacing_matches_root_finding() {
        for k in [0.3, 0.8, 0.99] {
            let spacing = zero_spacing(k).unwrap();
            let (mut lo, mut hi) = (0.9 * spacing, 1.1 * spacing);
            let f = |x: f64| ac_family(x, k);
            assert!(f(lo) > 0.0 && f(hi) < 0.0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((0.5 * (lo + hi) - spacing).abs() < 1e-9, "k = {k}");
        }
    }

    #[test]
    fn modulus_for_properties() {
        assert!(modulus_for(0.001, 0.5).unwrap().k > 0.999);
        assert!(modulus_for(0.01, 0.5).unwrap().k > modulus_for(0.05, 0.5).unwrap().k);
        let m = modulus_for(0.02, 0.5).unwrap();
        assert!((zero_spacing(m.k).unwrap() - 25.0).abs() < 1e-9);
        assert!((m.zero_spacing - 25.0).abs() < 1e-10);
        assert!(matches!(
            modulus_for(0.2, 0.5),
            Err(Error::NoPositiveSolution { .. })
        ));
    }

    #[test]
    fn lambda_correspondence() {
        let a = lambda_of_eps(0.005, 0.5).unwrap();
        let b = lambda_of_eps(0.02, 0.5).unwrap();
        assert!(a.lam < b.lam);
        assert!((b.lam - lam_from_amplitude(&b)).abs() < 1e-10);
        let mut prev = 0.0;
        for i in 0..20 {
            let eps = 0.005 + 0.0072 * i as f64;
            let lam = lambda_of_eps(eps, 0.5).unwrap().lam;
            assert!(lam > prev);
            prev = lam;
        }
    }

    #[test]
    fn conserved_quantity_of_the_family() {
        let m = modulus_for(0.03, 0.5).unwrap();
        let lam = m.lam();
        for i in 0..40 {
            let t = 0.4 * i as f64;
            let u = m.eval(t);
            let ut = m.eval_dt(t);
            assert!((0.5 * ut * ut - potential(u) + lam).abs() < 1e-12);
        }
    }

    #[test]
    fn modulus_from_lam_round_trip() {
        for lam in [1e-30, 1e-12, 1e-5, 0.01, 0.2] {
            let m = EllipticModulus::from_lam(lam).unwrap();
            assert!((m.lam() / lam - 1.0).abs() < 1e-12, "lam = {lam}");
        }
        assert!(EllipticModulus::from_lam(0.25).is_err());
    }
}
