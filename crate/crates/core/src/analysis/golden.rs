//! Golden-section maximization on a bracket.

use crate::scalar::Scalar;

const MAX_ITERS: usize = 200;

/// Maximizes `f` on `[lo, hi]` until the bracket is narrower than `tol`.
/// Ties keep the left point, so the smaller abscissa wins.
pub fn golden_max<T: Scalar>(mut f: impl FnMut(T) -> T, lo: T, hi: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::two();
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a) > tol && iters < MAX_ITERS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let (x, fx) = golden_max(|x: f64| -(x - 0.3) * (x - 0.3), -1.0, 2.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx.abs() < 1e-15);
    }

    #[test]
    fn kink_maximum() {
        let (x, _) = golden_max(|x: f64| -(x - 1.25).abs(), 0.0, 2.0, 1e-10);
        assert!((x - 1.25).abs() < 1e-9);
    }

    #[test]
    fn monotone_goes_to_edge() {
        let (x, _) = golden_max(|x: f64| x, 0.0, 1.0, 1e-8);
        assert!(x > 1.0 - 1e-7);
    }
}
