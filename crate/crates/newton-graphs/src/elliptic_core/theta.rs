//! First Jacobi theta function and the derivatives needed for sigma, zeta
//! and the Weierstrass p-function:
//!
//! theta1(u, q) = 2 * sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) u)
//!
//! Powers of the nome are always formed as exp(log_q * x) with
//! log_q = i*pi*tau, which avoids branch ambiguity for complex nomes.
//! Series are truncated once terms fall below 1e-16 of the running partial
//! sum; arguments are expected to be reduced into the fundamental cell
//! beforehand, which keeps |Im u| bounded and the series short.

use num_complex::Complex64;

const TRUNCATION: f64 = 1e-16;
const MAX_TERMS: usize = 64;

#[inline]
fn q_pow(log_q: Complex64, x: f64) -> Complex64 {
    (log_q * x).exp()
}

/// theta1 and its first two u-derivatives at `u`, with `log_q = i*pi*tau`.
pub fn theta1_with_derivs(
    u: Complex64,
    log_q: Complex64,
) -> (Complex64, Complex64, Complex64) {
    let mut t = Complex64::new(0.0, 0.0);
    let mut t1 = Complex64::new(0.0, 0.0);
    let mut t2 = Complex64::new(0.0, 0.0);
    let mut sign = 1.0f64;
    let mut below = 0usize;
    for n in 0..MAX_TERMS {
        let k = (2 * n + 1) as f64;
        let qpow = q_pow(log_q, (n as f64 + 0.5) * (n as f64 + 0.5));
        let s = (u * k).sin();
        let c = (u * k).cos();
        let term = 2.0 * sign * qpow * s;
        let term1 = 2.0 * sign * qpow * k * c;
        let term2 = -2.0 * sign * qpow * k * k * s;
        t += term;
        t1 += term1;
        t2 += term2;
        let scale = t.norm().max(t1.norm()).max(1e-300);
        if n >= 2 && term.norm().max(term1.norm() / k) < TRUNCATION * scale {
            below += 1;
            if below >= 2 {
                break;
            }
        } else {
            below = 0;
        }
        sign = -sign;
    }
    (t, t1, t2)
}

/// theta1'(0) and theta1'''(0), with `log_q = i*pi*tau`.
pub fn theta1_odd_derivs_at_zero(log_q: Complex64) -> (Complex64, Complex64) {
    let mut d1 = Complex64::new(0.0, 0.0);
    let mut d3 = Complex64::new(0.0, 0.0);
    let mut sign = 1.0f64;
    for n in 0..MAX_TERMS {
        let k = (2 * n + 1) as f64;
        let qpow = q_pow(log_q, (n as f64 + 0.5) * (n as f64 + 0.5));
        d1 += 2.0 * sign * qpow * k;
        d3 += -2.0 * sign * qpow * k * k * k;
        if n >= 2 && (qpow.norm() * k * k * k) < TRUNCATION * d3.norm().max(1e-300) {
            break;
        }
        sign = -sign;
    }
    (d1, d3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn log_q(tau: Complex64) -> Complex64 {
        Complex64::new(0.0, PI) * tau
    }

    #[test]
    fn theta1_is_odd_in_u() {
        let lq = log_q(Complex64::new(0.3, 1.0));
        let u = Complex64::new(0.37, 0.21);
        let (a, _, _) = theta1_with_derivs(u, lq);
        let (b, _, _) = theta1_with_derivs(-u, lq);
        assert!((a + b).norm() < 1e-14 * a.norm().max(1.0));
    }

    #[test]
    fn theta1_quasi_periodicity_in_pi() {
        let lq = log_q(Complex64::new(-0.2, 0.9));
        let u = Complex64::new(0.8, -0.4);
        let (a, _, _) = theta1_with_derivs(u + PI, lq);
        let (b, _, _) = theta1_with_derivs(u, lq);
        assert!((a + b).norm() < 1e-13 * b.norm().max(1.0));
    }

    #[test]
    fn theta1_quasi_periodicity_in_pi_tau() {
        // theta1(u + pi*tau) = -exp(-i*(2u + pi*tau)) * theta1(u).
        let tau = Complex64::new(0.3, 1.0);
        let lq = log_q(tau);
        let u = Complex64::new(0.5, 0.1);
        let (a, _, _) = theta1_with_derivs(u + PI * tau, lq);
        let (b, _, _) = theta1_with_derivs(u, lq);
        let factor = -(-Complex64::i() * (2.0 * u + PI * tau)).exp();
        assert!((a - factor * b).norm() < 1e-12 * a.norm().max(1.0));
    }
}
