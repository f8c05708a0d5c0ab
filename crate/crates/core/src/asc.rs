//! Angular scaling calibration.
//!
//! Similarities are moved into angle space (`theta = acos(s)`), remapped by a
//! positive affine map `theta' = w * theta + b`, clamped to `[0, pi]` and
//! mapped back with `cos`. The decision threshold is remapped by the same
//! function, so every pair keeps its side of the threshold as long as the
//! remapped threshold angle stays strictly inside `(0, pi)`.
//!
//! `(w, b)` are fitted by minimising the mean squared error between the
//! remapped similarities and the `{-1, +1}` labels. `w` is optimised as
//! `w = exp(u)` so the search is unconstrained.

use std::cmp::Ordering::Greater;

use serde::{Deserialize, Serialize};

use crate::error::{CalibError, Result};
use crate::measure::{Dataset, Threshold};
use crate::scalar::{clamp, Scalar};

/// `acos(s)` in `[0, pi]`. Inputs outside `[-1, 1]` are clamped first.
#[inline]
pub fn angle<T: Scalar>(s: T) -> T {
    clamp(s, -T::one(), T::one()).acos()
}

#[inline]
fn remap_angle<T: Scalar>(theta: T, w: T, b: T) -> T {
    clamp(theta * w + b, T::zero(), T::PI())
}

/// Remaps one similarity with gain `w` and offset `b`.
#[inline]
pub fn apply_angular<T: Scalar>(w: T, b: T, s: T) -> T {
    remap_angle(angle(s), w, b).cos()
}

/// Remaps the threshold with `(w, b)`. Fails when the result reaches `±1`.
pub fn calibrated_threshold<T: Scalar>(w: T, b: T, tau: Threshold<T>) -> Result<Threshold<T>> {
    let value = apply_angular(w, b, tau.value());
    Threshold::new(value).map_err(|_| CalibError::DegenerateThreshold {
        value: value.to_f64().unwrap_or(f64::NAN),
    })
}

/// Fitted calibration: angular gain, offset and both thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "AscParamsRepr<T>",
    into = "AscParamsRepr<T>",
    bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct AscParams<T: Scalar> {
    w: T,
    b: T,
    tau_raw: Threshold<T>,
    tau_calibrated: Threshold<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
struct AscParamsRepr<T: Scalar> {
    w: T,
    b: T,
    tau_raw: Threshold<T>,
    tau_calibrated: Threshold<T>,
}

impl<T: Scalar> TryFrom<AscParamsRepr<T>> for AscParams<T> {
    type Error = CalibError;

    fn try_from(r: AscParamsRepr<T>) -> Result<Self> {
        let params = AscParams::new(r.w, r.b, r.tau_raw)?;
        // stored values may be rounded by hand; the recomputed one is kept
        let (stored, recomputed) = (r.tau_calibrated.value(), params.tau_calibrated.value());
        if (stored - recomputed).abs() > T::lit(1e-9) {
            return Err(CalibError::InvalidArgument(format!(
                "stored calibrated threshold {} disagrees with recomputed {}",
                r.tau_calibrated, params.tau_calibrated
            )));
        }
        Ok(params)
    }
}

impl<T: Scalar> From<AscParams<T>> for AscParamsRepr<T> {
    fn from(p: AscParams<T>) -> Self {
        AscParamsRepr {
            w: p.w,
            b: p.b,
            tau_raw: p.tau_raw,
            tau_calibrated: p.tau_calibrated,
        }
    }
}

impl<T: Scalar> AscParams<T> {
    pub fn new(w: T, b: T, tau_raw: Threshold<T>) -> Result<Self> {
        if !(w > T::zero() && w.is_finite()) {
            return Err(CalibError::InvalidArgument(format!(
                "angular gain must be positive and finite, got {w}"
            )));
        }
        if !b.is_finite() {
            return Err(CalibError::InvalidArgument(format!(
                "angular offset must be finite, got {b}"
            )));
        }
        let tau_calibrated = calibrated_threshold(w, b, tau_raw)?;
        Ok(AscParams {
            w,
            b,
            tau_raw,
            tau_calibrated,
        })
    }

    /// The starting point `w = 1, b = 0`; leaves every similarity unchanged.
    pub fn identity(tau_raw: Threshold<T>) -> Self {
        AscParams {
            w: T::one(),
            b: T::zero(),
            tau_raw,
            tau_calibrated: tau_raw,
        }
    }

    pub fn w(&self) -> T {
        self.w
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn tau_raw(&self) -> Threshold<T> {
        self.tau_raw
    }

    pub fn tau_calibrated(&self) -> Threshold<T> {
        self.tau_calibrated
    }

    #[inline]
    pub fn apply(&self, s: T) -> T {
        apply_angular(self.w, self.b, s)
    }

    /// `true` when the threshold angle lands strictly inside `(0, pi)` before
    /// clamping, which is what guarantees decisions are preserved.
    pub fn threshold_angle_is_interior(&self) -> bool {
        let t = angle(self.tau_raw.value()) * self.w + self.b;
        t > T::zero() && t < T::PI()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Scale of the first trial step, taken along the normalised gradient.
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Stop once an iteration improves the loss by less than this.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            learning_rate: 0.01,
            max_iterations: 1000,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport<T> {
    /// Loss at `w = 1, b = 0`.
    pub initial_loss: T,
    pub final_loss: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Mean squared error between remapped similarities and labels, as a
/// function of `(w, b)`.
#[derive(Debug, Clone)]
pub struct AscObjective<T> {
    thetas: Vec<T>,
    targets: Vec<T>,
    theta_tau: T,
}

impl<T: Scalar> AscObjective<T> {
    pub fn new(dataset: &Dataset<T>, tau: Threshold<T>) -> Self {
        let (thetas, targets) = dataset
            .records()
            .iter()
            .map(|r| (angle(r.similarity), r.label.target::<T>()))
            .unzip();
        AscObjective {
            thetas,
            targets,
            theta_tau: angle(tau.value()),
        }
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn loss(&self, w: T, b: T) -> T {
        let sum: T = self
            .thetas
            .iter()
            .zip(&self.targets)
            .map(|(&theta, &y)| {
                let r = remap_angle(theta, w, b).cos() - y;
                r * r
            })
            .sum();
        sum / T::from_count(self.thetas.len())
    }

    /// Loss with its gradient with respect to `(w, b)`. Points whose remapped
    /// angle is clamped contribute no gradient.
    pub fn loss_and_gradient(&self, w: T, b: T) -> (T, [T; 2]) {
        let (zero, pi) = (T::zero(), T::PI());
        let mut loss = zero;
        let mut gw = zero;
        let mut gb = zero;
        for (&theta, &y) in self.thetas.iter().zip(&self.targets) {
            let t = theta * w + b;
            if t <= zero {
                let r = T::one() - y;
                loss = loss + r * r;
            } else if t >= pi {
                let r = -T::one() - y;
                loss = loss + r * r;
            } else {
                let (sin, cos) = t.sin_cos();
                let r = cos - y;
                loss = loss + r * r;
                let d = -(r + r) * sin;
                gw = gw + d * theta;
                gb = gb + d;
            }
        }
        let n = T::from_count(self.thetas.len());
        (loss / n, [gw / n, gb / n])
    }

    /// Whether `(w, b)` keeps the remapped threshold usable: its angle is
    /// strictly inside `(0, pi)` and its cosine strictly inside `(-1, 1)`.
    fn admissible(&self, w: T, b: T) -> bool {
        if !(w > T::zero() && w.is_finite() && b.is_finite()) {
            return false;
        }
        let t = self.theta_tau * w + b;
        let c = t.cos();
        t > T::zero() && t < T::PI() && c > -T::one() && c < T::one()
    }

    /// Loss and gradient in the `(u, b)` parameterisation, `w = exp(u)`.
    /// Inadmissible points report an infinite loss.
    fn unconstrained(&self, x: [T; 2]) -> (T, [T; 2]) {
        let w = x[0].exp();
        if !self.admissible(w, x[1]) {
            return (T::infinity(), [T::zero(); 2]);
        }
        let (l, [gw, gb]) = self.loss_and_gradient(w, x[1]);
        (l, [gw * w, gb])
    }
}

/// Fits `(w, b)` on a recalibration set, starting from `w = 1, b = 0`.
pub fn fit<T: Scalar>(
    dataset: &Dataset<T>,
    tau: Threshold<T>,
    config: &FitConfig,
) -> Result<(AscParams<T>, FitReport<T>)> {
    dataset.require_both_classes()?;
    let objective = AscObjective::new(dataset, tau);
    let tol = T::lit(config.tolerance);
    let c1 = T::lit(1e-4);

    let mut x = [T::zero(), T::zero()];
    let (mut f, mut g) = objective.unconstrained(x);
    let initial_loss = f;
    let mut h = identity2::<T>();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iterations {
        iterations += 1;
        if g[0] == T::zero() && g[1] == T::zero() {
            converged = true;
            break;
        }

        let mut d = neg(mat_vec(&h, g));
        if dot(g, d) >= T::zero() {
            h = identity2();
            d = neg(g);
        }
        let mut step = if iterations == 1 {
            let l1 = g[0].abs() + g[1].abs();
            T::lit(config.learning_rate) * T::one().min(T::one() / l1)
        } else {
            T::one()
        };

        let mut accepted = line_search(&objective, x, f, g, d, step, c1);
        if accepted.is_none() && h != identity2() {
            h = identity2();
            d = neg(g);
            step = T::one().min(T::one() / (g[0].abs() + g[1].abs()));
            accepted = line_search(&objective, x, f, g, d, step, c1);
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            // no descent is representable from here
            converged = true;
            break;
        };

        let s = [x_new[0] - x[0], x_new[1] - x[1]];
        let y = [g_new[0] - g[0], g_new[1] - g[1]];
        bfgs_update(&mut h, s, y);

        let improvement = f - f_new;
        x = x_new;
        f = f_new;
        g = g_new;
        if improvement < tol {
            converged = true;
            break;
        }
    }

    let w = x[0].exp();
    let params = AscParams::new(w, x[1], tau)?;
    Ok((
        params,
        FitReport {
            initial_loss,
            final_loss: f,
            iterations,
            converged,
        },
    ))
}

type Point<T> = ([T; 2], T, [T; 2]);

/// Backtracking line search under the Armijo condition.
fn line_search<T: Scalar>(
    objective: &AscObjective<T>,
    x: [T; 2],
    f: T,
    g: [T; 2],
    d: [T; 2],
    mut step: T,
    c1: T,
) -> Option<Point<T>> {
    let slope = dot(g, d);
    for _ in 0..64 {
        let candidate = [x[0] + step * d[0], x[1] + step * d[1]];
        let (fc, gc) = objective.unconstrained(candidate);
        if fc.is_finite() && fc <= f + c1 * step * slope && fc < f {
            return Some((candidate, fc, gc));
        }
        step = step * T::half();
    }
    None
}

type Mat2<T> = [[T; 2]; 2];

fn identity2<T: Scalar>() -> Mat2<T> {
    [[T::one(), T::zero()], [T::zero(), T::one()]]
}

fn dot<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[0] + a[1] * b[1]
}

fn neg<T: Scalar>(a: [T; 2]) -> [T; 2] {
    [-a[0], -a[1]]
}

fn mat_vec<T: Scalar>(m: &Mat2<T>, v: [T; 2]) -> [T; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Inverse-Hessian BFGS update; skipped when the curvature condition fails.
fn bfgs_update<T: Scalar>(h: &mut Mat2<T>, s: [T; 2], y: [T; 2]) {
    let sy = dot(s, y);
    let scale = (dot(s, s) * dot(y, y)).sqrt();
    if sy.partial_cmp(&(T::lit(1e-12) * scale)) != Some(Greater) {
        return;
    }
    let rho = T::one() / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, hy);
    for i in 0..2 {
        for j in 0..2 {
            h[i][j] = h[i][j] - rho * (hy[i] * s[j] + s[i] * hy[j])
                + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}
