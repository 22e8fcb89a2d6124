//! Adaptive Dormand–Prince 5(4) integration of a planar field given as a
//! complex-valued velocity, with torus wrapping and equilibrium capture.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("step size underflow near {z}")]
    StepSizeUnderflow { z: Complex64 },
}

#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub z: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Terminal {
    /// Captured by the equilibrium with this index in the caller's list.
    Equilibrium(usize),
    Horizon,
}

#[derive(Debug, Clone)]
pub struct Path {
    pub samples: Vec<Sample>,
    pub terminal: Terminal,
    pub steps: usize,
    pub rejected_steps: usize,
}

pub struct IntegrateOpts {
    pub rtol: f64,
    pub atol: f64,
    pub horizon: f64,
    pub capture_radius: f64,
    pub capture_speed: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOpts {
    fn default() -> Self {
        IntegrateOpts {
            rtol: 1e-9,
            atol: 1e-12,
            horizon: 1e3,
            capture_radius: 1e-6,
            capture_speed: 1e-10,
            max_steps: 1_000_000,
        }
    }
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Error weights: 5th-order minus embedded 4th-order.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `dz/dt = velocity(z)` from `z0`, wrapping the state through
/// `wrap` after every accepted step (torus reduction). `capture(z)` returns
/// the index and distance of the nearest listed equilibrium.
pub fn integrate<V, W, C>(
    velocity: V,
    wrap: W,
    capture: C,
    z0: Complex64,
    opts: &IntegrateOpts,
) -> Result<Path, IntegrateError>
where
    V: Fn(Complex64) -> Complex64,
    W: Fn(Complex64) -> Complex64,
    C: Fn(Complex64) -> Option<(usize, f64)>,
{
    let mut z = wrap(z0);
    let mut t = 0.0f64;
    let mut samples = vec![Sample { t, z }];
    // Immediate capture: starting at (or numerically on) an equilibrium.
    if let Some((idx, dist)) = capture(z) {
        if dist < 1e-12 {
            return Ok(Path {
                samples,
                terminal: Terminal::Equilibrium(idx),
                steps: 0,
                rejected_steps: 0,
            });
        }
    }

    let mut k1 = velocity(z);
    let mut dt = 1e-3 / (1.0 + k1.norm());
    let mut steps = 0usize;
    let mut rejected = 0usize;

    while t < opts.horizon {
        if steps + rejected > opts.max_steps {
            return Err(IntegrateError::StepSizeUnderflow { z });
        }
        let h = dt.min(opts.horizon - t);
        let k2 = velocity(z + h * (A21 * k1));
        let k3 = velocity(z + h * (A31 * k1 + A32 * k2));
        let k4 = velocity(z + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = velocity(z + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = velocity(z + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let znew = z + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = velocity(znew);
        let err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let tol = opts.atol + opts.rtol * z.norm().max(znew.norm());
        let ratio = err_vec.norm() / tol;

        if ratio <= 1.0 {
            t += h;
            z = wrap(znew);
            steps += 1;
            samples.push(Sample { t, z });
            k1 = velocity(z);
            if let Some((idx, dist)) = capture(z) {
                if dist < opts.capture_radius && k1.norm() < opts.capture_speed {
                    return Ok(Path {
                        samples,
                        terminal: Terminal::Equilibrium(idx),
                        steps,
                        rejected_steps: rejected,
                    });
                }
            }
        } else {
            rejected += 1;
        }

        let factor = if ratio > 0.0 {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        dt = h * factor;
        if dt < 1e-14 {
            return Err(IntegrateError::StepSizeUnderflow { z });
        }
    }
    Ok(Path {
        samples,
        terminal: Terminal::Horizon,
        steps,
        rejected_steps: rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_accurate() {
        // dz/dt = -z from 1: z(t) = e^{-t}.
        let path = integrate(
            |z| -z,
            |z| z,
            |_| None,
            Complex64::new(1.0, 0.0),
            &IntegrateOpts {
                horizon: 2.0,
                ..Default::default()
            },
        )
        .unwrap();
        let last = path.samples.last().unwrap();
        assert!((last.z.re - (-2.0f64).exp()).abs() < 1e-9);
        assert_eq!(path.terminal, Terminal::Horizon);
    }

    #[test]
    fn rotation_preserves_radius() {
        // dz/dt = i z: circle.
        let path = integrate(
            |z| Complex64::i() * z,
            |z| z,
            |_| None,
            Complex64::new(1.0, 0.0),
            &IntegrateOpts {
                horizon: 20.0,
                ..Default::default()
            },
        )
        .unwrap();
        for s in &path.samples {
            assert!((s.z.norm() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn capture_at_start() {
        let path = integrate(
            |z| -z,
            |z| z,
            |z| Some((0, z.norm())),
            Complex64::new(0.0, 0.0),
            &IntegrateOpts::default(),
        )
        .unwrap();
        assert_eq!(path.samples.len(), 1);
        assert_eq!(path.terminal, Terminal::Equilibrium(0));
    }
}
