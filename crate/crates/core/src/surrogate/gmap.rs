use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Iteration count implied by the Elman estimate, `g(α) = ln ε / ln(2√α/(1+α))`,
/// together with its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GMap<T: Real> {
    pub tol: T,
}

impl<T: Real> GMap<T> {
    pub fn new(tol: T) -> Result<Self> {
        if !(tol > T::zero() && tol < T::one()) {
            return Err(Error::InvalidArgument("GMRES tolerance must lie in (0, 1)".into()));
        }
        Ok(Self { tol })
    }

    pub fn g_eval(&self, alpha: T) -> Result<T> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} outside (0, 1)")));
        }
        let rate = T::lit(2.0) * alpha.sqrt() / (T::one() + alpha);
        Ok(self.tol.ln() / rate.ln())
    }

    /// `α` with `g(α) = m`, from `√α = (1 − √(1 − c²)) / c`, `c = ε^{1/m}`.
    pub fn g_inv(&self, m: T) -> Result<T> {
        if !(m > T::zero()) {
            return Err(Error::InvalidArgument(format!("iteration count {m} must be positive")));
        }
        let c = self.tol.powf(T::one() / m);
        // 1 − √(1 − c²) rewritten to avoid cancellation for small c
        let s = c / (T::one() + (T::one() - c * c).sqrt());
        Ok(s * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gm() -> GMap<f64> {
        GMap::new(1e-5).unwrap()
    }

    #[test]
    fn forward_examples() {
        assert!((gm().g_eval(0.5).unwrap() - 195.49).abs() < 5e-3);
        assert!((gm().g_eval(0.1).unwrap() - 20.80).abs() < 5e-3);
        let small = gm().g_eval(1e-8).unwrap();
        assert!((small - 1.3517).abs() < 1e-4, "{small}");
        assert!(gm().g_eval(1e-12).unwrap() < small);
        assert!(gm().g_eval(0.0).is_err());
        assert!(gm().g_eval(1.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        let a1 = gm().g_inv(1.0).unwrap();
        assert!((a1 - 2.5e-11).abs() < 1e-15, "{a1}");
        assert!((gm().g_inv(20.80).unwrap() - 0.1).abs() < 1e-4);
        assert!((gm().g_inv(195.49).unwrap() - 0.5).abs() < 1e-4);
    }

    #[test]
    fn inverse_matches_bisection() {
        let g = gm();
        for m in [1.0, 3.0, 17.5, 400.0] {
            let (mut lo, mut hi) = (1e-300f64, 1.0 - 1e-16);
            for _ in 0..2000 {
                let mid = 0.5 * (lo + hi);
                if g.g_eval(mid).unwrap() < m {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 * hi {
                    break;
                }
            }
            let a = g.g_inv(m).unwrap();
            assert!((a - lo).abs() <= 1e-9 * lo.max(1e-12), "m={m}: {a} vs {lo}");
        }
    }

    proptest! {
        #[test]
        fn roundtrip(m in 1.0f64..1e4) {
            let g = gm();
            let back = g.g_eval(g.g_inv(m).unwrap()).unwrap();
            prop_assert!((back - m).abs() / m <= 1e-9);
        }

        #[test]
        fn strictly_increasing(a in 1e-10f64..0.99, b in 1e-10f64..0.99) {
            prop_assume!(a < b * (1.0 - 1e-9));
            prop_assert!(gm().g_eval(a).unwrap() < gm().g_eval(b).unwrap());
        }
    }
}
