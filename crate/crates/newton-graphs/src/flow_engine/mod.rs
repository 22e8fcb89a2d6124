//! The desingularized toroidal Newton flow of an elliptic function and its
//! rotated companion: equilibrium classification, separatrix tracing, and
//! extraction of the three embedded graphs the phase portrait carries.
//!
//! The Newton field is `-(1 + |f|^4)^{-1} |f'|^2 f/f'`, evaluated as
//! `-conj(L) / (|f|^2 + |f|^{-2})` with `L = f'/f`, which is continuous
//! through zeros and poles. The rotated field multiplies the ratio by `i`
//! before the same desingularization, so its trajectories are the level
//! lines of `|f|`.

mod integrate;

pub use integrate::{IntegrateOpts, Sample, Terminal};

use crate::elliptic_core::{EllipticError, EllipticFunction};
use crate::newton_props::{self, NewtonReport};
use crate::torus_graph::{EmbeddedGraph, GraphError};
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("step size underflow near {z}")]
    StepSizeUnderflow { z: Complex64 },
    #[error("saddle connection: separatrix from saddle {from} meets saddle {near}")]
    SaddleConnection { from: usize, near: usize },
    #[error("separatrix did not converge: {0}")]
    NonConvergence(String),
    #[error("degenerate function: {0}")]
    DegenerateFunction(String),
    #[error("angle collision: {0}")]
    AngleCollision(String),
    #[error("graph extraction failed: {0}")]
    ExtractionFailed(String),
}

impl From<integrate::IntegrateError> for FlowError {
    fn from(e: integrate::IntegrateError) -> Self {
        match e {
            integrate::IntegrateError::StepSizeUnderflow { z } => {
                FlowError::StepSizeUnderflow { z }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Newton,
    Rotated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSign {
    Forward,
    Reversed,
}

/// A flow field over one elliptic function. The desingularized form is the
/// C^1 field used for tracing; the raw form keeps the natural time
/// parametrization (useful for the `f(z(t)) e^{it}` diagnostic of the
/// rotated flow) and is singular at equilibria.
#[derive(Clone)]
pub struct FlowField<'f> {
    pub function: &'f EllipticFunction,
    pub variant: Variant,
    pub sign: TimeSign,
    pub desingularized: bool,
}

impl<'f> FlowField<'f> {
    pub fn newton(function: &'f EllipticFunction) -> Self {
        FlowField {
            function,
            variant: Variant::Newton,
            sign: TimeSign::Forward,
            desingularized: true,
        }
    }

    pub fn rotated(function: &'f EllipticFunction) -> Self {
        FlowField {
            function,
            variant: Variant::Rotated,
            sign: TimeSign::Forward,
            desingularized: true,
        }
    }

    pub fn rotated_raw(function: &'f EllipticFunction) -> Self {
        FlowField {
            function,
            variant: Variant::Rotated,
            sign: TimeSign::Forward,
            desingularized: false,
        }
    }

    pub fn reversed(mut self) -> Self {
        self.sign = match self.sign {
            TimeSign::Forward => TimeSign::Reversed,
            TimeSign::Reversed => TimeSign::Forward,
        };
        self
    }

    /// Velocity at `z`. Total for the desingularized form: zero exactly at
    /// zeros, poles and critical points of `f`.
    pub fn velocity(&self, z: Complex64) -> Complex64 {
        let f = self.function;
        let base = if self.desingularized {
            let l = match f.log_derivative(z) {
                Ok(l) => l,
                Err(_) => return Complex64::new(0.0, 0.0),
            };
            let (num, den) = f.eval_parts(z);
            let an = num.norm();
            let ad = den.norm();
            // |f|^2 + |f|^{-2}, infinite at zeros and poles.
            let a2 = (an / ad) * (an / ad);
            let weight = a2 + 1.0 / a2;
            let v = -l.conj() / weight;
            if v.is_finite() {
                v
            } else {
                Complex64::new(0.0, 0.0)
            }
        } else {
            match f.log_derivative(z) {
                Ok(l) => -1.0 / l,
                Err(_) => Complex64::new(0.0, 0.0),
            }
        };
        let turned = match self.variant {
            Variant::Newton => base,
            Variant::Rotated => Complex64::i() * base,
        };
        match self.sign {
            TimeSign::Forward => turned,
            TimeSign::Reversed => -turned,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqKind {
    Zero,
    Pole,
    Saddle,
}

/// Equilibria of the flow, in a fixed global indexing: zeros, then poles,
/// then saddles.
#[derive(Debug, Clone)]
pub struct Equilibria {
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
    pub saddles: Vec<Complex64>,
}

impl Equilibria {
    pub fn len(&self) -> usize {
        self.zeros.len() + self.poles.len() + self.saddles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, index: usize) -> Complex64 {
        let nz = self.zeros.len();
        let np = self.poles.len();
        if index < nz {
            self.zeros[index]
        } else if index < nz + np {
            self.poles[index - nz]
        } else {
            self.saddles[index - nz - np]
        }
    }

    pub fn kind(&self, index: usize) -> EqKind {
        let nz = self.zeros.len();
        let np = self.poles.len();
        if index < nz {
            EqKind::Zero
        } else if index < nz + np {
            EqKind::Pole
        } else {
            EqKind::Saddle
        }
    }

    pub fn nearest(&self, f: &EllipticFunction, z: Complex64) -> Option<(usize, f64)> {
        (0..self.len())
            .map(|i| (i, f.lattice().min_image_distance(z, self.position(i))))
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite distances"))
    }
}

/// A saddle with its linearization data.
#[derive(Debug, Clone)]
pub struct SaddleFrame {
    pub saddle: Complex64,
    /// (negative, positive) eigenvalue pair.
    pub eigenvalues: (f64, f64),
    pub stable_dirs: [Complex64; 2],
    pub unstable_dirs: [Complex64; 2],
    /// |cos| of the angle between stable and unstable directions.
    pub orthogonality_residual: f64,
}

/// Star-node check record for a zero or pole.
#[derive(Debug, Clone)]
pub struct StarCheck {
    pub point: Complex64,
    pub eigenvalues: (f64, f64),
    pub relative_gap: f64,
}

#[derive(Debug, Clone)]
pub struct Classified {
    pub equilibria: Equilibria,
    pub frames: Vec<SaddleFrame>,
    pub star_checks: Vec<StarCheck>,
}

fn jacobian<F: Fn(Complex64) -> Complex64>(field: F, z: Complex64, h: f64) -> [[f64; 2]; 2] {
    let fx1 = field(z + Complex64::new(h, 0.0));
    let fx0 = field(z - Complex64::new(h, 0.0));
    let fy1 = field(z + Complex64::new(0.0, h));
    let fy0 = field(z - Complex64::new(0.0, h));
    [
        [(fx1.re - fx0.re) / (2.0 * h), (fy1.re - fy0.re) / (2.0 * h)],
        [(fx1.im - fx0.im) / (2.0 * h), (fy1.im - fy0.im) / (2.0 * h)],
    ]
}

fn eigenvector(j: &[[f64; 2]; 2], lambda: f64) -> Complex64 {
    // (J - lambda I) v = 0; pick the better-conditioned row.
    let r1 = (j[0][0] - lambda, j[0][1]);
    let r2 = (j[1][0], j[1][1] - lambda);
    let v = if r1.0.hypot(r1.1) >= r2.0.hypot(r2.1) {
        Complex64::new(-r1.1, r1.0)
    } else {
        Complex64::new(-r2.1, r2.0)
    };
    v / v.norm()
}

const JACOBIAN_STEP: f64 = 1e-6;
const STAR_TOL: f64 = 1e-3;

/// Classifies all equilibria: zeros as attractors, poles as repellors,
/// critical points as orthogonal saddles with eigenframes from a central
/// difference Jacobian of the desingularized Newton field.
pub fn classify_equilibria(f: &EllipticFunction) -> Result<Classified, FlowError> {
    let crit = f.critical_points().map_err(|e| match e {
        EllipticError::DegenerateFunction(m) => FlowError::DegenerateFunction(m),
        other => FlowError::Elliptic(other),
    })?;
    let lat = f.lattice();
    let sort_key = |z: &Complex64| (z.re, z.im);
    let mut zeros: Vec<Complex64> = f.zeros().iter().map(|&z| lat.to_cell(z)).collect();
    zeros.sort_by(|a, b| sort_key(a).partial_cmp(&sort_key(b)).unwrap());
    let mut poles: Vec<Complex64> = f.poles().iter().map(|&z| lat.to_cell(z)).collect();
    poles.sort_by(|a, b| sort_key(a).partial_cmp(&sort_key(b)).unwrap());

    let field = FlowField::newton(f);
    let mut star_checks = Vec::new();
    for &p in zeros.iter().chain(poles.iter()) {
        let j = jacobian(|z| field.velocity(z), p, JACOBIAN_STEP);
        let tr = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let disc = tr * tr - 4.0 * det;
        let scale = tr.abs().max(1e-12);
        if disc > STAR_TOL * scale * scale {
            return Err(FlowError::DegenerateFunction(format!(
                "node at {p} has split eigenvalues"
            )));
        }
        let (l1, l2) = if disc > 0.0 {
            ((tr + disc.sqrt()) / 2.0, (tr - disc.sqrt()) / 2.0)
        } else {
            (tr / 2.0, tr / 2.0)
        };
        if l1 * l2 <= 0.0 || l1.abs().min(l2.abs()) < 1e-12 {
            return Err(FlowError::DegenerateFunction(format!(
                "node at {p} has non-star eigenvalues ({l1}, {l2})"
            )));
        }
        let gap = (l1.abs() - l2.abs()).abs() / l1.abs().max(l2.abs());
        if gap > STAR_TOL {
            return Err(FlowError::DegenerateFunction(format!(
                "node at {p} has eigenvalue gap {gap:.3e}"
            )));
        }
        star_checks.push(StarCheck {
            point: p,
            eigenvalues: (l1, l2),
            relative_gap: gap,
        });
    }

    let mut frames = Vec::new();
    for &c in &crit.points {
        frames.push(saddle_frame(|z| field.velocity(z), c)?);
    }

    Ok(Classified {
        equilibria: Equilibria {
            zeros,
            poles,
            saddles: crit.points,
        },
        frames,
        star_checks,
    })
}

fn saddle_frame<F: Fn(Complex64) -> Complex64>(
    field: F,
    c: Complex64,
) -> Result<SaddleFrame, FlowError> {
    let j = jacobian(&field, c, JACOBIAN_STEP);
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr - 4.0 * det;
    if det >= 0.0 || disc <= 0.0 {
        return Err(FlowError::DegenerateFunction(format!(
            "equilibrium at {c} is not a simple saddle (det {det:.3e})"
        )));
    }
    let l_pos = (tr + disc.sqrt()) / 2.0;
    let l_neg = (tr - disc.sqrt()) / 2.0;
    if l_pos.abs() < 1e-12 || l_neg.abs() < 1e-12 {
        return Err(FlowError::DegenerateFunction(format!(
            "near-zero saddle eigenvalue at {c}"
        )));
    }
    let u = eigenvector(&j, l_pos);
    let s = eigenvector(&j, l_neg);
    let dot = (u.re * s.re + u.im * s.im).abs();
    Ok(SaddleFrame {
        saddle: c,
        eigenvalues: (l_neg, l_pos),
        stable_dirs: [s, -s],
        unstable_dirs: [u, -u],
        orthogonality_residual: dot,
    })
}

/// One sample of a traced trajectory, with the flow diagnostics attached.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub t: f64,
    pub z: Complex64,
    pub abs_f: f64,
    pub arg_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryTerminal {
    Equilibrium { index: usize, kind: EqKind },
    Horizon,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub terminal: TrajectoryTerminal,
    pub steps: usize,
    /// Largest increase of |f| between consecutive samples (Newton
    /// variant; negative when strictly decreasing throughout).
    pub max_abs_increase: f64,
    /// Total spread of arg f over samples at distance > 1e-3 from every
    /// equilibrium.
    pub arg_drift: f64,
    /// Relative spread of |f| over the whole trajectory.
    pub abs_rel_drift: f64,
}

/// Integrates one trajectory of the field with equilibrium capture and
/// per-sample diagnostics.
pub fn integrate_flow(
    field: &FlowField,
    z0: Complex64,
    horizon: f64,
    equilibria: &Equilibria,
) -> Result<Trajectory, FlowError> {
    let f = field.function;
    let opts = IntegrateOpts {
        horizon,
        ..Default::default()
    };
    let path = integrate::integrate(
        |z| field.velocity(z),
        |z| f.lattice().to_cell(z),
        |z| equilibria.nearest(f, z),
        z0,
        &opts,
    )?;
    Ok(decorate_path(field, path, equilibria))
}

fn decorate_path(field: &FlowField, path: integrate::Path, eq: &Equilibria) -> Trajectory {
    let f = field.function;
    let mut samples = Vec::with_capacity(path.samples.len());
    let mut max_abs_increase = f64::NEG_INFINITY;
    let mut prev_abs: Option<f64> = None;
    let mut args = Vec::new();
    let mut abs_min = f64::INFINITY;
    let mut abs_max = 0.0f64;
    for s in &path.samples {
        let abs_f = f.abs(s.z);
        let arg_f = f.eval(s.z).arg();
        samples.push(TrajectorySample {
            t: s.t,
            z: s.z,
            abs_f,
            arg_f,
        });
        if let Some(p) = prev_abs {
            max_abs_increase = max_abs_increase.max(abs_f - p);
        }
        prev_abs = Some(abs_f);
        if abs_f.is_finite() {
            abs_min = abs_min.min(abs_f);
            abs_max = abs_max.max(abs_f);
        }
        let clear = eq
            .nearest(f, s.z)
            .map(|(_, d)| d)
            .unwrap_or(f64::INFINITY);
        if clear > 1e-3 && arg_f.is_finite() {
            args.push(arg_f);
        }
    }
    // Unwrap the angle sequence before measuring the spread.
    let mut drift = 0.0f64;
    if args.len() > 1 {
        let mut unwrapped = vec![args[0]];
        for w in args.windows(2) {
            let mut d = w[1] - w[0];
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            let last = *unwrapped.last().unwrap();
            unwrapped.push(last + d);
        }
        let lo = unwrapped.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = unwrapped.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        drift = hi - lo;
    }
    let terminal = match path.terminal {
        Terminal::Equilibrium(i) => TrajectoryTerminal::Equilibrium {
            index: i,
            kind: eq.kind(i),
        },
        Terminal::Horizon => TrajectoryTerminal::Horizon,
    };
    Trajectory {
        samples,
        terminal,
        steps: path.steps,
        max_abs_increase: if max_abs_increase.is_finite() {
            max_abs_increase
        } else {
            0.0
        },
        arg_drift: drift,
        abs_rel_drift: if abs_max > 0.0 {
            (abs_max - abs_min) / abs_max
        } else {
            0.0
        },
    }
}

/// One traced separatrix leg.
#[derive(Debug, Clone)]
pub struct Leg {
    pub saddle: usize,
    pub direction: usize,
    /// Index into the relevant terminal list (zeros, poles or saddles).
    pub terminal: usize,
    pub departure_angle: f64,
    pub arrival_angle: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub total_steps: usize,
    pub max_abs_increase_newton: f64,
    pub max_arg_drift_newton: f64,
    pub min_other_saddle_clearance: f64,
    pub max_rotated_abs_drift: f64,
}

/// Full separatrix structure of a non-degenerate function.
#[derive(Debug, Clone)]
pub struct TracedPortrait {
    pub classified: Classified,
    /// 2 legs per saddle, terminating at zeros.
    pub unstable_legs: Vec<Leg>,
    /// 2 legs per saddle, terminating at poles (reversed time).
    pub stable_legs: Vec<Leg>,
    /// 2 legs per saddle of the rotated flow, terminating at other saddles.
    pub rotated_legs: Vec<Leg>,
    pub diagnostics: Diagnostics,
}

const SEED_OFFSET: f64 = 1e-6;
const ANGLE_RADIUS: f64 = 1e-3;
const SADDLE_CLEARANCE: f64 = 1e-5;

/// Measures the direction of the path relative to `center` where it crosses
/// the circle of the given radius; `from_inside` picks the outgoing (first)
/// or incoming (last) crossing.
fn crossing_angle(
    f: &EllipticFunction,
    samples: &[Sample],
    center: Complex64,
    radius: f64,
    outgoing: bool,
) -> Option<f64> {
    let lat = f.lattice();
    let rel: Vec<Complex64> = samples
        .iter()
        .map(|s| lat.min_image_vector(s.z, center))
        .collect();
    let idx = if outgoing {
        // First index where the path leaves the circle.
        (1..rel.len()).find(|&i| rel[i].norm() >= radius && rel[i - 1].norm() < radius)?
    } else {
        // Last index where the path is still outside before final approach.
        (1..rel.len())
            .rev()
            .find(|&i| rel[i].norm() < radius && rel[i - 1].norm() >= radius)?
    };
    let (a, b) = (rel[idx - 1], rel[idx]);
    // Linear interpolation to |v| = radius.
    let d = b - a;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let inside = (a + mid * d).norm() < radius;
        // Outgoing: inside -> outside; incoming: outside -> inside.
        if outgoing == inside {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((a + 0.5 * (lo + hi) * d).arg())
}

fn trace_leg(
    f: &EllipticFunction,
    field: &FlowField,
    frame_pos: Complex64,
    dir: Complex64,
    equilibria: &Equilibria,
    horizon: f64,
) -> Result<integrate::Path, FlowError> {
    let z0 = frame_pos + SEED_OFFSET * dir;
    let source_pos = frame_pos;
    let opts = IntegrateOpts {
        horizon,
        ..Default::default()
    };
    let path = integrate::integrate(
        |z| field.velocity(z),
        |z| f.lattice().to_cell(z),
        |z| {
            // The source saddle must not capture its own outgoing leg.
            equilibria
                .nearest(f, z)
                .filter(|&(i, _)| {
                    f.lattice().min_image_distance(equilibria.position(i), source_pos) > 1e-9
                        || equilibria.kind(i) != EqKind::Saddle
                })
        },
        z0,
        &opts,
    )?;
    Ok(path)
}

/// Traces all separatrices: per saddle, the two unstable legs (to zeros),
/// the two stable legs (to poles, reversed time) and the two outgoing
/// rotated legs (to other saddles). Detects saddle connections.
pub fn trace_separatrices(f: &EllipticFunction) -> Result<TracedPortrait, FlowError> {
    let classified = classify_equilibria(f)?;
    trace_from_classified(f, classified)
}

pub fn trace_from_classified(
    f: &EllipticFunction,
    classified: Classified,
) -> Result<TracedPortrait, FlowError> {
    let eq = &classified.equilibria;
    let nz = eq.zeros.len();
    let np = eq.poles.len();
    let lat = f.lattice();
    let mut diagnostics = Diagnostics {
        min_other_saddle_clearance: f64::INFINITY,
        max_abs_increase_newton: f64::NEG_INFINITY,
        ..Default::default()
    };
    let horizon = 1e3;

    let mut unstable_legs = Vec::new();
    let mut stable_legs = Vec::new();
    let mut rotated_legs = Vec::new();

    for (k, frame) in classified.frames.iter().enumerate() {
        // Newton-variant legs: monitor clearance from every other saddle.
        let newton_specs = [
            (FlowField::newton(f), frame.unstable_dirs, EqKind::Zero),
            (
                FlowField::newton(f).reversed(),
                frame.stable_dirs,
                EqKind::Pole,
            ),
        ];
        for (field, dirs, want) in newton_specs {
            for (di, &dir) in dirs.iter().enumerate() {
                let path = trace_leg(f, &field, frame.saddle, dir, eq, horizon)?;
                diagnostics.total_steps += path.steps;
                for s in &path.samples {
                    for (j, &other) in eq.saddles.iter().enumerate() {
                        if j == k {
                            continue;
                        }
                        let d = lat.min_image_distance(s.z, other);
                        diagnostics.min_other_saddle_clearance =
                            diagnostics.min_other_saddle_clearance.min(d);
                        if d < SADDLE_CLEARANCE {
                            return Err(FlowError::SaddleConnection { from: k, near: j });
                        }
                    }
                }
                let terminal_idx = match path.terminal {
                    Terminal::Equilibrium(i) => i,
                    Terminal::Horizon => {
                        return Err(FlowError::NonConvergence(format!(
                            "leg from saddle {k} direction {di} hit the horizon"
                        )))
                    }
                };
                if eq.kind(terminal_idx) != want {
                    return Err(match eq.kind(terminal_idx) {
                        EqKind::Saddle => FlowError::SaddleConnection {
                            from: k,
                            near: terminal_idx - nz - np,
                        },
                        _ => FlowError::NonConvergence(format!(
                            "leg from saddle {k} ended at the wrong equilibrium kind"
                        )),
                    });
                }
                let terminal_pos = eq.position(terminal_idx);
                let arrival = crossing_angle(f, &path.samples, terminal_pos, ANGLE_RADIUS, false)
                    .ok_or_else(|| {
                        FlowError::NonConvergence("no arrival-circle crossing".into())
                    })?;
                let departure = crossing_angle(f, &path.samples, frame.saddle, ANGLE_RADIUS, true)
                    .ok_or_else(|| {
                        FlowError::NonConvergence("no departure-circle crossing".into())
                    })?;
                // |f| monotonicity and arg drift along Newton legs, sampled
                // away from equilibria.
                let decorated = decorate_path(
                    &field,
                    integrate::Path {
                        samples: path.samples.clone(),
                        terminal: path.terminal,
                        steps: path.steps,
                        rejected_steps: path.rejected_steps,
                    },
                    eq,
                );
                let increase = match field.sign {
                    TimeSign::Forward => decorated.max_abs_increase,
                    // Reversed legs climb |f|; flip to compare against the
                    // forward monotonicity budget.
                    TimeSign::Reversed => {
                        let mut worst = f64::NEG_INFINITY;
                        for w in decorated.samples.windows(2) {
                            worst = worst.max(w[0].abs_f - w[1].abs_f);
                        }
                        worst
                    }
                };
                diagnostics.max_abs_increase_newton =
                    diagnostics.max_abs_increase_newton.max(increase);
                diagnostics.max_arg_drift_newton =
                    diagnostics.max_arg_drift_newton.max(decorated.arg_drift);
                let leg = Leg {
                    saddle: k,
                    direction: di,
                    terminal: match want {
                        EqKind::Zero => terminal_idx,
                        EqKind::Pole => terminal_idx - nz,
                        EqKind::Saddle => unreachable!(),
                    },
                    departure_angle: departure,
                    arrival_angle: arrival,
                    steps: path.steps,
                };
                match want {
                    EqKind::Zero => unstable_legs.push(leg),
                    EqKind::Pole => stable_legs.push(leg),
                    EqKind::Saddle => unreachable!(),
                }
            }
        }

        // Rotated legs: eigenframe of the rotated field at the same saddle.
        let rot_field = FlowField::rotated(f);
        let rot_frame = saddle_frame(|z| rot_field.velocity(z), frame.saddle)?;
        for (di, &dir) in rot_frame.unstable_dirs.iter().enumerate() {
            let path = trace_leg(f, &rot_field, frame.saddle, dir, eq, horizon)?;
            diagnostics.total_steps += path.steps;
            let terminal_idx = match path.terminal {
                Terminal::Equilibrium(i) => i,
                Terminal::Horizon => {
                    return Err(FlowError::NonConvergence(format!(
                        "rotated leg from saddle {k} hit the horizon"
                    )))
                }
            };
            if eq.kind(terminal_idx) != EqKind::Saddle {
                return Err(FlowError::NonConvergence(format!(
                    "rotated leg from saddle {k} ended at a non-saddle"
                )));
            }
            let target = terminal_idx - nz - np;
            if target == k {
                return Err(FlowError::NonConvergence(format!(
                    "rotated leg from saddle {k} returned to its source"
                )));
            }
            let terminal_pos = eq.position(terminal_idx);
            let arrival = crossing_angle(f, &path.samples, terminal_pos, ANGLE_RADIUS, false)
                .ok_or_else(|| FlowError::NonConvergence("no arrival-circle crossing".into()))?;
            let departure = crossing_angle(f, &path.samples, frame.saddle, ANGLE_RADIUS, true)
                .ok_or_else(|| FlowError::NonConvergence("no departure-circle crossing".into()))?;
            // |f| is invariant along rotated trajectories.
            let abs_vals: Vec<f64> = path.samples.iter().map(|s| f.abs(s.z)).collect();
            let lo = abs_vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = abs_vals.iter().cloned().fold(0.0f64, f64::max);
            if hi > 0.0 {
                diagnostics.max_rotated_abs_drift =
                    diagnostics.max_rotated_abs_drift.max((hi - lo) / hi);
            }
            rotated_legs.push(Leg {
                saddle: k,
                direction: di,
                terminal: target,
                departure_angle: departure,
                arrival_angle: arrival,
                steps: path.steps,
            });
        }
    }

    Ok(TracedPortrait {
        classified,
        unstable_legs,
        stable_legs,
        rotated_legs,
        diagnostics,
    })
}

/// The extracted graphs plus the traced portrait behind them.
///
/// The attractor and repellor graphs always come out of a successful trace.
/// The saddle level-line graph additionally requires all critical points to
/// share one |f| level: when they do not (the generic situation), its
/// level-line components cannot join up into a connected toroidal map, and
/// the reason is reported instead.
#[derive(Debug, Clone)]
pub struct ExtractedPortrait {
    pub portrait: TracedPortrait,
    pub g: EmbeddedGraph,
    pub g_star: EmbeddedGraph,
    pub g_perp: Result<EmbeddedGraph, String>,
}

const ANGLE_GAP: f64 = 1e-4;

struct EndAtVertex {
    edge: usize,
    minus_end: bool,
    angle: f64,
}

fn build_from_angles(
    prefix: &str,
    edge_prefix: &str,
    n_vertices: usize,
    edges: &[(usize, usize)],
    ends: BTreeMap<usize, Vec<EndAtVertex>>,
) -> Result<EmbeddedGraph, FlowError> {
    let vertices: Vec<String> = (0..n_vertices).map(|v| format!("{prefix}{v}")).collect();
    let named_edges: Vec<(String, usize, usize)> = edges
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| (format!("{edge_prefix}{e}"), u, v))
        .collect();
    let mut rotation: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
    for (v, mut list) in ends {
        list.sort_by(|a, b| a.angle.partial_cmp(&b.angle).expect("finite angles"));
        for i in 0..list.len() {
            let next = (i + 1) % list.len();
            let gap = if next == 0 {
                list[next].angle + 2.0 * std::f64::consts::PI - list[i].angle
            } else {
                list[next].angle - list[i].angle
            };
            if gap.abs() < ANGLE_GAP {
                return Err(FlowError::AngleCollision(format!(
                    "two separatrix ends at vertex {prefix}{v} arrive within {gap:.3e} rad"
                )));
            }
        }
        rotation.insert(v, list.into_iter().map(|e| (e.edge, e.minus_end)).collect());
    }
    EmbeddedGraph::build(vertices, named_edges, &rotation)
        .map_err(|e: GraphError| FlowError::ExtractionFailed(e.to_string()))
}

/// Assembles the embedded graphs from a traced portrait: the attractor
/// graph from unstable legs at zeros, the repellor graph from stable legs
/// at poles (dual convention label), and the saddle level-line graph from
/// the rotated legs.
pub fn extract_graphs(portrait: TracedPortrait) -> Result<ExtractedPortrait, FlowError> {
    let eq = &portrait.classified.equilibria;
    let n_saddles = eq.saddles.len();

    // Attractor graph: one edge per saddle, ends at the terminal zeros of
    // its two unstable legs; direction 0 is the "+" end.
    let mut edges_g = vec![(usize::MAX, usize::MAX); n_saddles];
    let mut ends_g: BTreeMap<usize, Vec<EndAtVertex>> = BTreeMap::new();
    for leg in &portrait.unstable_legs {
        let slot = &mut edges_g[leg.saddle];
        if leg.direction == 0 {
            slot.0 = leg.terminal;
        } else {
            slot.1 = leg.terminal;
        }
        ends_g.entry(leg.terminal).or_default().push(EndAtVertex {
            edge: leg.saddle,
            minus_end: leg.direction == 1,
            angle: leg.arrival_angle,
        });
    }
    let g = build_from_angles("z", "e", eq.zeros.len(), &edges_g, ends_g)?;

    let mut edges_gs = vec![(usize::MAX, usize::MAX); n_saddles];
    let mut ends_gs: BTreeMap<usize, Vec<EndAtVertex>> = BTreeMap::new();
    for leg in &portrait.stable_legs {
        let slot = &mut edges_gs[leg.saddle];
        if leg.direction == 0 {
            slot.0 = leg.terminal;
        } else {
            slot.1 = leg.terminal;
        }
        ends_gs.entry(leg.terminal).or_default().push(EndAtVertex {
            edge: leg.saddle,
            minus_end: leg.direction == 1,
            angle: leg.arrival_angle,
        });
    }
    let g_star = build_from_angles("p", "e", eq.poles.len(), &edges_gs, ends_gs)?.minus();

    // Saddle level-line graph: one edge per rotated leg; the "+" end is the
    // departure at the source saddle.
    let mut edges_gp = Vec::with_capacity(portrait.rotated_legs.len());
    let mut ends_gp: BTreeMap<usize, Vec<EndAtVertex>> = BTreeMap::new();
    for (e, leg) in portrait.rotated_legs.iter().enumerate() {
        edges_gp.push((leg.saddle, leg.terminal));
        ends_gp.entry(leg.saddle).or_default().push(EndAtVertex {
            edge: e,
            minus_end: false,
            angle: leg.departure_angle,
        });
        ends_gp.entry(leg.terminal).or_default().push(EndAtVertex {
            edge: e,
            minus_end: true,
            angle: leg.arrival_angle,
        });
    }
    let mut end_count_issue = None;
    for (v, list) in &ends_gp {
        if list.len() != 4 {
            end_count_issue = Some(format!(
                "saddle c{v} has {} level-line ends, expected 4",
                list.len()
            ));
        }
    }
    let g_perp = match end_count_issue {
        Some(issue) => Err(issue),
        None => build_from_angles("c", "p", n_saddles, &edges_gp, ends_gp)
            .map_err(|e| e.to_string()),
    };

    Ok(ExtractedPortrait {
        portrait,
        g,
        g_star,
        g_perp,
    })
}

/// Traces and extracts in one call.
pub fn extract(f: &EllipticFunction) -> Result<ExtractedPortrait, FlowError> {
    extract_graphs(trace_separatrices(f)?)
}

/// Round trip: extract the attractor graph and decide Newton-graph
/// membership on it.
pub fn newton_roundtrip(f: &EllipticFunction) -> Result<(ExtractedPortrait, NewtonReport), FlowError> {
    let extracted = extract(f)?;
    let report = newton_props::is_newton_graph(&extracted.g);
    Ok((extracted, report))
}
