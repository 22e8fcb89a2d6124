//! Lattices, Weierstrass sigma/zeta evaluation, sigma-quotient elliptic
//! functions assembled from zero/pole data, and their critical points.
//!
//! An order-r function is represented as
//!
//! ```text
//! f(z) = scale * sigma(z - a_1) ... sigma(z - a_r)
//!              / (sigma(z - b_1) ... sigma(z - b_r))
//! ```
//!
//! where the last pole is the closing point `b_r = a_1 + ... + a_r - b_1 -
//! ... - b_{r-1}` (reduced into the fundamental cell), which makes the
//! quotient doubly periodic.

mod io;
mod theta;

pub use io::{function_from_json, function_to_json, FunctionSpec};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EllipticError {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("zero/pole collision: {0}")]
    ZeroPoleCollision(String),
    #[error("constraint unsatisfiable: {0}")]
    ConstraintUnsatisfiable(String),
    #[error("zeta/wp evaluated at a lattice point")]
    PoleAtLattice,
    #[error("evaluation too close to a zero or pole")]
    TooCloseToSingularity,
    #[error("degenerate function: {0}")]
    DegenerateFunction(String),
    #[error("periodicity self-test failed: {0}")]
    PeriodicityCheckFailed(String),
    #[error("bad function spec: {0}")]
    BadSpec(String),
}

/// Period lattice with the derived quantities needed for evaluation: the
/// half-period ratio, the log-nome, theta derivatives at zero and the two
/// zeta quasi-periods. Construction runs a Legendre-relation self-test.
#[derive(Debug, Clone)]
pub struct Lattice {
    omega1: Complex64,
    omega2: Complex64,
    tau: Complex64,
    log_q: Complex64,
    theta1_prime0: Complex64,
    eta1: Complex64,
    eta2: Complex64,
    /// Inverse of the real 2x2 period matrix, for cell reduction.
    inv: [[f64; 2]; 2],
}

impl Lattice {
    pub fn new(omega1: Complex64, omega2: Complex64) -> Result<Self, EllipticError> {
        let tau = omega2 / omega1;
        if !(tau.im > 1e-6) {
            return Err(EllipticError::InvalidLattice(format!(
                "Im(omega2/omega1) = {} must be positive",
                tau.im
            )));
        }
        let det = omega1.re * omega2.im - omega1.im * omega2.re;
        let inv = [
            [omega2.im / det, -omega2.re / det],
            [-omega1.im / det, omega1.re / det],
        ];
        let log_q = Complex64::new(0.0, PI) * tau;
        let (d1, d3) = theta::theta1_odd_derivs_at_zero(log_q);
        if d1.norm() < 1e-12 {
            return Err(EllipticError::InvalidLattice(
                "theta series degenerate for this tau".into(),
            ));
        }
        let eta1 = -PI * PI * d3 / (3.0 * omega1 * d1);
        let mut lattice = Lattice {
            omega1,
            omega2,
            tau,
            log_q,
            theta1_prime0: d1,
            eta1,
            eta2: Complex64::new(0.0, 0.0),
            inv,
        };
        // Second quasi-period through the zeta series itself; the Legendre
        // relation then cross-checks the whole evaluation chain.
        lattice.eta2 = 2.0 * lattice.zeta_reduced(omega2 / 2.0);
        let legendre = lattice.eta1 * omega2 - lattice.eta2 * omega1;
        let target = Complex64::new(0.0, 2.0 * PI);
        let residual = (legendre - target).norm() / target.norm();
        if residual > 1e-10 {
            return Err(EllipticError::InvalidLattice(format!(
                "Legendre relation residual {residual:.3e}"
            )));
        }
        Ok(lattice)
    }

    /// Square-ish default: periods `(1, tau)`.
    pub fn from_tau(tau: Complex64) -> Result<Self, EllipticError> {
        Lattice::new(Complex64::new(1.0, 0.0), tau)
    }

    pub fn omega1(&self) -> Complex64 {
        self.omega1
    }

    pub fn omega2(&self) -> Complex64 {
        self.omega2
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn eta1(&self) -> Complex64 {
        self.eta1
    }

    pub fn eta2(&self) -> Complex64 {
        self.eta2
    }

    /// Writes `z = t1*omega1 + t2*omega2` and splits off the integer parts:
    /// returns `(z0, m, n)` with `z0` in the fundamental cell. Coordinates
    /// within 1e-12 of an integer snap to it, so representatives do not
    /// flip across the cell boundary under floating-point jitter.
    pub fn reduce(&self, z: Complex64) -> (Complex64, i64, i64) {
        let snap_floor = |t: f64| {
            let r = t.round();
            if (t - r).abs() < 1e-12 {
                r as i64
            } else {
                t.floor() as i64
            }
        };
        let t1 = self.inv[0][0] * z.re + self.inv[0][1] * z.im;
        let t2 = self.inv[1][0] * z.re + self.inv[1][1] * z.im;
        let m = snap_floor(t1);
        let n = snap_floor(t2);
        let z0 = z - (m as f64) * self.omega1 - (n as f64) * self.omega2;
        (z0, m, n)
    }

    /// Representative of `z` in the fundamental cell.
    pub fn to_cell(&self, z: Complex64) -> Complex64 {
        self.reduce(z).0
    }

    /// Distance from `z` to the nearest lattice translate of `w`.
    pub fn min_image_distance(&self, z: Complex64, w: Complex64) -> f64 {
        let (d0, _, _) = self.reduce(z - w);
        let mut best = f64::INFINITY;
        for m in -1..=1 {
            for n in -1..=1 {
                let cand = d0 + (m as f64) * self.omega1 + (n as f64) * self.omega2;
                best = best.min(cand.norm());
            }
        }
        best
    }

    /// Minimal-norm representative of `z - w` modulo the lattice.
    pub fn min_image_vector(&self, z: Complex64, w: Complex64) -> Complex64 {
        let (d0, _, _) = self.reduce(z - w);
        let mut best = d0;
        for m in -1..=1 {
            for n in -1..=1 {
                let cand = d0 + (m as f64) * self.omega1 + (n as f64) * self.omega2;
                if cand.norm() < best.norm() {
                    best = cand;
                }
            }
        }
        best
    }

    fn theta_ratio(&self, z0: Complex64) -> (Complex64, Complex64, Complex64) {
        let u = PI * z0 / self.omega1;
        theta::theta1_with_derivs(u, self.log_q)
    }

    fn sigma_reduced(&self, z0: Complex64) -> Complex64 {
        let (t, _, _) = self.theta_ratio(z0);
        (self.omega1 / PI)
            * (self.eta1 * z0 * z0 / (2.0 * self.omega1)).exp()
            * t
            / self.theta1_prime0
    }

    fn zeta_reduced(&self, z0: Complex64) -> Complex64 {
        let (t, t1, _) = self.theta_ratio(z0);
        self.eta1 * z0 / self.omega1 + (PI / self.omega1) * t1 / t
    }

    /// Weierstrass sigma. Entire; the argument is reduced into the
    /// fundamental cell by quasi-periodicity before the theta series is
    /// summed.
    pub fn sigma(&self, z: Complex64) -> Complex64 {
        let (z0, m, n) = self.reduce(z);
        let base = self.sigma_reduced(z0);
        if m == 0 && n == 0 {
            return base;
        }
        let shift = (m as f64) * self.omega1 + (n as f64) * self.omega2;
        let eta = (m as f64) * self.eta1 + (n as f64) * self.eta2;
        let sign = if (m + n + m * n) % 2 == 0 { 1.0 } else { -1.0 };
        sign * base * (eta * (z0 + shift / 2.0)).exp()
    }

    /// Weierstrass zeta = sigma'/sigma, with `zeta(z + omega_k) = zeta(z) +
    /// eta_k`.
    pub fn zeta(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        if self.min_image_distance(z, Complex64::new(0.0, 0.0)) < 1e-12 {
            return Err(EllipticError::PoleAtLattice);
        }
        let (z0, m, n) = self.reduce(z);
        Ok(self.zeta_reduced(z0) + (m as f64) * self.eta1 + (n as f64) * self.eta2)
    }

    /// Weierstrass p-function, as -zeta'.
    pub fn wp(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        if self.min_image_distance(z, Complex64::new(0.0, 0.0)) < 1e-12 {
            return Err(EllipticError::PoleAtLattice);
        }
        let (z0, _, _) = self.reduce(z);
        let (t, t1, t2) = self.theta_ratio(z0);
        let s = PI / self.omega1;
        let zeta_prime = self.eta1 / self.omega1 + s * s * (t2 / t - (t1 / t) * (t1 / t));
        Ok(-zeta_prime)
    }
}

/// Zero/pole placement for an order-r function. With `auto_close` the last
/// pole is derived from the sum constraint; otherwise all `r` poles are
/// explicit and the constraint is verified.
#[derive(Debug, Clone)]
pub struct ZeroPoleData {
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
    pub auto_close: bool,
}

/// Minimum separation treated as a collision between zeros and poles.
const COLLISION_TOL: f64 = 1e-9;

/// A sigma-quotient elliptic function.
#[derive(Debug, Clone)]
pub struct EllipticFunction {
    lattice: Lattice,
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    scale: Complex64,
}

/// Critical points (zeros of f' that are not poles of f) and the values of
/// f there. Non-degenerate order-r functions have exactly 2r of them.
#[derive(Debug, Clone)]
pub struct CriticalSet {
    pub points: Vec<Complex64>,
    pub values: Vec<Complex64>,
}

impl EllipticFunction {
    /// Builds the canonical sigma-quotient for the given placement,
    /// applying the closing-point rule and verifying double periodicity
    /// numerically at 20 sample points.
    pub fn canonical(data: &ZeroPoleData, lattice: Lattice) -> Result<Self, EllipticError> {
        let r = data.zeros.len();
        if r < 2 {
            return Err(EllipticError::BadSpec(format!(
                "order must be at least 2, got {r} zeros"
            )));
        }
        let expected_poles = if data.auto_close { r - 1 } else { r };
        if data.poles.len() != expected_poles {
            return Err(EllipticError::BadSpec(format!(
                "expected {expected_poles} poles, got {}",
                data.poles.len()
            )));
        }
        let zeros: Vec<Complex64> = data.zeros.iter().map(|&z| lattice.to_cell(z)).collect();
        let mut poles: Vec<Complex64> = data.poles.iter().map(|&z| lattice.to_cell(z)).collect();
        let zero_sum: Complex64 = zeros.iter().sum();
        if !data.auto_close {
            // The stated final pole must already close the sum mod the
            // lattice; it is then replaced by the exact closing point (a
            // lattice translate of it), because the sigma quotient is only
            // doubly periodic when the sums agree exactly.
            let pole_sum: Complex64 = poles.iter().sum();
            let gap = lattice.min_image_distance(zero_sum, pole_sum);
            if gap > COLLISION_TOL {
                return Err(EllipticError::ConstraintUnsatisfiable(format!(
                    "zero and pole sums differ by {gap:.3e} mod the lattice"
                )));
            }
            poles.pop();
        }
        let partial: Complex64 = poles.iter().sum();
        poles.push(zero_sum - partial);
        for (i, &a) in zeros.iter().enumerate() {
            for (j, &b) in poles.iter().enumerate() {
                if lattice.min_image_distance(a, b) < COLLISION_TOL {
                    if data.auto_close && j == r - 1 {
                        return Err(EllipticError::ConstraintUnsatisfiable(format!(
                            "closing point collides with zero {i}"
                        )));
                    }
                    return Err(EllipticError::ZeroPoleCollision(format!(
                        "zero {i} coincides with pole {j} mod the lattice"
                    )));
                }
            }
        }
        let f = EllipticFunction {
            lattice,
            zeros,
            poles,
            scale: Complex64::new(1.0, 0.0),
        };
        f.check_periodicity()?;
        Ok(f)
    }

    fn check_periodicity(&self) -> Result<(), EllipticError> {
        let mut worst = 0.0f64;
        let mut checked = 0;
        let mut k = 0u32;
        while checked < 20 {
            // Deterministic low-discrepancy samples, skipping singular spots.
            let t1 = 0.5 * (1.0 + f64::from(k).sin());
            let t2 = 0.5 * (1.0 + (f64::from(k) * 1.7).cos());
            k += 1;
            let z =
                t1 * self.lattice.omega1 + t2 * self.lattice.omega2;
            if self.distance_to_singularity(z) < 0.05 {
                continue;
            }
            let fz = self.eval(z);
            for omega in [self.lattice.omega1, self.lattice.omega2] {
                let shifted = self.eval(z + omega);
                worst = worst.max((shifted - fz).norm() / (1.0 + fz.norm()));
            }
            checked += 1;
        }
        if worst > 1e-8 {
            return Err(EllipticError::PeriodicityCheckFailed(format!(
                "residual {worst:.3e} exceeds 1e-8"
            )));
        }
        Ok(())
    }

    pub fn with_scale(mut self, scale: Complex64) -> Result<Self, EllipticError> {
        if scale.norm() == 0.0 {
            return Err(EllipticError::BadSpec("scale must be nonzero".into()));
        }
        self.scale = scale;
        Ok(self)
    }

    /// Rescales so that |f| = 1 at the critical points (their common
    /// modulus). Returns the rescaled function and the modulus divided out.
    pub fn normalized(&self) -> Result<(Self, f64), EllipticError> {
        let crit = self.critical_points()?;
        let mean_log: f64 = crit
            .values
            .iter()
            .map(|v| v.norm().ln())
            .sum::<f64>()
            / crit.values.len() as f64;
        let modulus = mean_log.exp();
        let mut f = self.clone();
        f.scale /= modulus;
        Ok((f, modulus))
    }

    pub fn order(&self) -> usize {
        self.zeros.len()
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    /// The reciprocal function: zeros and poles swapped.
    pub fn reciprocal(&self) -> EllipticFunction {
        EllipticFunction {
            lattice: self.lattice.clone(),
            zeros: self.poles.clone(),
            poles: self.zeros.clone(),
            scale: 1.0 / self.scale,
        }
    }

    pub fn distance_to_singularity(&self, z: Complex64) -> f64 {
        self.zeros
            .iter()
            .chain(self.poles.iter())
            .map(|&p| self.lattice.min_image_distance(z, p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Numerator and denominator sigma products (scale folded into the
    /// numerator). Finite everywhere; the quotient may overflow at poles.
    pub fn eval_parts(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut num = self.scale;
        for &a in &self.zeros {
            num *= self.lattice.sigma(z - a);
        }
        let mut den = Complex64::new(1.0, 0.0);
        for &b in &self.poles {
            den *= self.lattice.sigma(z - b);
        }
        (num, den)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let (num, den) = self.eval_parts(z);
        num / den
    }

    /// |f(z)|, infinite at poles rather than NaN.
    pub fn abs(&self, z: Complex64) -> f64 {
        let (num, den) = self.eval_parts(z);
        if den.norm() == 0.0 {
            return f64::INFINITY;
        }
        num.norm() / den.norm()
    }

    /// f'/f as a zeta sum over zeros minus poles.
    pub fn log_derivative(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        if self.distance_to_singularity(z) < 1e-9 {
            return Err(EllipticError::TooCloseToSingularity);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for &a in &self.zeros {
            sum += self.lattice.zeta(z - a)?;
        }
        for &b in &self.poles {
            sum -= self.lattice.zeta(z - b)?;
        }
        Ok(sum)
    }

    /// Derivative of f'/f, a p-function sum.
    pub fn log_derivative_prime(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        let mut sum = Complex64::new(0.0, 0.0);
        for &a in &self.zeros {
            sum -= self.lattice.wp(z - a)?;
        }
        for &b in &self.poles {
            sum += self.lattice.wp(z - b)?;
        }
        Ok(sum)
    }

    /// All critical points in the fundamental cell: grid-seeded damped
    /// Newton iteration on f'/f, deduplicated modulo the lattice and sorted
    /// lexicographically. The grid is doubled once before the count
    /// mismatch is declared degenerate.
    pub fn critical_points(&self) -> Result<CriticalSet, EllipticError> {
        let r = self.order();
        let base = 40 * r;
        match self.critical_points_on_grid(base) {
            Ok(set) => Ok(set),
            Err(_) => self.critical_points_on_grid(2 * base),
        }
    }

    fn critical_points_on_grid(&self, n: usize) -> Result<CriticalSet, EllipticError> {
        let r = self.order();
        let lat = &self.lattice;
        let cell_scale = lat.omega1.norm().max(lat.omega2.norm());
        // |f'/f| on an offset grid; cells near zeros/poles hold poles of the
        // logarithmic derivative, never minima.
        let mut mag = vec![f64::INFINITY; n * n];
        let grid_point = |i: usize, j: usize| {
            ((i as f64 + 0.5) / n as f64) * lat.omega1
                + ((j as f64 + 0.5) / n as f64) * lat.omega2
        };
        let rows: Vec<usize> = (0..n).collect();
        let workers = crate::threads::worker_count();
        let ranges = crate::threads::chunk_ranges(n, workers);
        let compute_row = |j: usize, out: &mut [f64]| {
            for i in 0..n {
                let z = grid_point(i, j);
                if let Ok(l) = self.log_derivative(z) {
                    out[i] = l.norm();
                }
            }
        };
        if ranges.len() <= 1 {
            for &j in &rows {
                let (head, tail) = mag.split_at_mut(j * n);
                let _ = head;
                compute_row(j, &mut tail[..n]);
            }
        } else {
            let chunks: Vec<(usize, Vec<f64>)> = std::thread::scope(|scope| {
                let compute_row = &compute_row;
                let handles: Vec<_> = ranges
                    .into_iter()
                    .map(|range| {
                        scope.spawn(move || {
                            let mut out = Vec::new();
                            for j in range.clone() {
                                let mut row = vec![f64::INFINITY; n];
                                compute_row(j, &mut row);
                                out.extend(row);
                            }
                            (range.start, out)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().unwrap()).collect()
            });
            for (start, rows_flat) in chunks {
                mag[start * n..start * n + rows_flat.len()].copy_from_slice(&rows_flat);
            }
        }

        let at = |i: isize, j: isize| {
            let i = i.rem_euclid(n as isize) as usize;
            let j = j.rem_euclid(n as isize) as usize;
            mag[j * n + i]
        };
        let mut seeds = Vec::new();
        for j in 0..n as isize {
            for i in 0..n as isize {
                let c = at(i, j);
                if !c.is_finite() {
                    continue;
                }
                let mut minimal = true;
                for dj in -1..=1 {
                    for di in -1..=1 {
                        if (di, dj) != (0, 0) && at(i + di, j + dj) < c {
                            minimal = false;
                        }
                    }
                }
                if minimal {
                    seeds.push(grid_point(i as usize, j as usize));
                }
            }
        }

        let mut roots: Vec<Complex64> = Vec::new();
        for seed in seeds {
            if let Some(root) = self.polish_root(seed, cell_scale) {
                let reduced = lat.to_cell(root);
                if roots
                    .iter()
                    .all(|&r0| lat.min_image_distance(r0, reduced) > 1e-6)
                {
                    roots.push(reduced);
                }
            }
        }
        roots.sort_by(|a, b| {
            (a.re, a.im)
                .partial_cmp(&(b.re, b.im))
                .expect("finite coordinates")
        });

        if roots.len() != 2 * r {
            return Err(EllipticError::DegenerateFunction(format!(
                "found {} critical points, expected {}",
                roots.len(),
                2 * r
            )));
        }
        for &c in &roots {
            let lp = self
                .log_derivative_prime(c)
                .map_err(|_| EllipticError::DegenerateFunction("critical point at singularity".into()))?;
            if lp.norm() < 1e-8 {
                return Err(EllipticError::DegenerateFunction(
                    "multiple critical root detected".into(),
                ));
            }
        }
        let values: Vec<Complex64> = roots.iter().map(|&c| self.eval(c)).collect();
        Ok(CriticalSet {
            points: roots,
            values,
        })
    }

    fn polish_root(&self, seed: Complex64, cell_scale: f64) -> Option<Complex64> {
        let mut z = seed;
        let mut lz = self.log_derivative(z).ok()?;
        for _ in 0..60 {
            if self.distance_to_singularity(z) < 1e-7 {
                return None;
            }
            let lpz = self.log_derivative_prime(z).ok()?;
            if lpz.norm() < 1e-14 {
                return None;
            }
            let mut step = -lz / lpz;
            if step.norm() > 0.25 * cell_scale {
                step *= 0.25 * cell_scale / step.norm();
            }
            let mut accepted = false;
            for _ in 0..10 {
                let cand = z + step;
                match self.log_derivative(cand) {
                    Ok(lcand) if lcand.norm() <= lz.norm() || step.norm() < 1e-15 => {
                        z = cand;
                        lz = lcand;
                        accepted = true;
                        break;
                    }
                    _ => step *= 0.5,
                }
            }
            if !accepted {
                return None;
            }
            if lz.norm() < 1e-13 * (1.0 + cell_scale) {
                return Some(z);
            }
        }
        if lz.norm() < 1e-10 {
            Some(z)
        } else {
            None
        }
    }
}

/// Deterministic generic zero/pole placement for a given order and seed.
/// All points (including the derived closing point) are kept apart by a
/// separation margin so the resulting function is comfortably
/// non-degenerate.
pub fn random_configuration(r: usize, seed: u64, lattice: &Lattice) -> ZeroPoleData {
    assert!(r >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sep = 0.22 / (r as f64).sqrt();
    'attempt: for _ in 0..10_000 {
        let mut points: Vec<Complex64> = Vec::with_capacity(2 * r - 1);
        for _ in 0..2 * r - 1 {
            let t1: f64 = rng.gen_range(0.08..0.92);
            let t2: f64 = rng.gen_range(0.08..0.92);
            points.push(t1 * lattice.omega1() + t2 * lattice.omega2());
        }
        let zeros = points[..r].to_vec();
        let poles = points[r..].to_vec();
        let zero_sum: Complex64 = zeros.iter().sum();
        let pole_sum: Complex64 = poles.iter().sum();
        let closing = lattice.to_cell(zero_sum - pole_sum);
        let mut all = points.clone();
        all.push(closing);
        for i in 0..all.len() {
            for j in 0..i {
                if lattice.min_image_distance(all[i], all[j]) < sep {
                    continue 'attempt;
                }
            }
        }
        return ZeroPoleData {
            zeros,
            poles,
            auto_close: true,
        };
    }
    panic!("could not draw a separated configuration for order {r}, seed {seed}");
}
