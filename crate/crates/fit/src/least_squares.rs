//! Damped Gauss-Newton curve fitting over analytic Jacobians.

use crate::{FitError, FitResult, Param, Scalar};

/before/// Per-parameter coordinate transform used inside the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// Parameter enters the optimizer unchanged.
    Linear,
    /// Parameter is optimized as its natural logarithm, which enforces
    /// positivity without constraints.
    LogPositive,
}

/// A curve model `y = f(x; p)` with analytic partial derivatives.
pub trait CurveModel<F: Scalar> {
    fn names(&self) -> &'static [&'static str];
    fn transforms(&self) -> &'static [Transform];
    fn eval(&self, x: F, params: &[F]) -> F;
    /// Writes `d f / d params[j]` (natural parameters) into `out`.
    fn jacobian(&self, x: F, params: &[F], out: &mut [F]);

    fn n_params(&self) -> usize {
        self.names().len()
    }
}

/// Optimizer controls. Defaults follow the workbench-wide convergence
/// contract: relative parameter step below 1e-8 or 200 iterations.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions<F> {
    pub max_iterations: usize,
    pub step_tolerance: F,
    /// Orthogonality (cosine) tolerance on the weighted gradient; a fit is
    /// only flagged converged when the gradient also passes this.
    pub gradient_tolerance: F,
    pub initial_damping: F,
}

impl<F: Scalar> Default for FitOptions<F> {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: F::lit(1e-8),
            gradient_tolerance: F::lit(1e-6),
            initial_damping: F::lit(1e-3),
        }
    }
}

fn to_internal<F: Scalar>(value: F, transform: Transform) -> F {
    match transform {
        Transform::Linear => value,
        Transform::LogPositive => value.ln(),
    }
}

fn to_natural<F: Scalar>(theta: F, transform: Transform) -> F {
    match transform {
        Transform::Linear => theta,
        Transform::LogPositive => theta.exp(),
    }
}

/// Solves `A x = b` for a small symmetric positive system by Gaussian
/// elimination with partial pivoting. Returns `None` when singular.
fn solve_dense<F: Scalar>(a: &mut [Vec<F>], b: &mut [F]) -> Option<Vec<F>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[pivot_row][col].abs() <= F::lit(0.0) {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                let delta = factor * a[col][k];
                a[row][k] = a[row][k] - delta;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![F::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc = acc - a[row][k] * x[k];
        }
        if !a[row][row].is_normal() && a[row][row] == F::zero() {
            return None;
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

struct Workspace<F> {
    normal: Vec<Vec<F>>,
    gradient: Vec<F>,
    row: Vec<F>,
}

fn weighted_cost<F: Scalar, M: CurveModel<F>>(
    model: &M,
    x: &[F],
    y: &[F],
    weights: Option<&[F]>,
    params: &[F],
) -> F {
    x.iter()
        .zip(y)
        .enumerate()
        .map(|(i, (&xi, &yi))| {
            let r = yi - model.eval(xi, params);
            let w = weights.map_or(F::one(), |w| w[i]);
            w * r * r
        })
        .sum()
}

/// Fits `model` to `(x, y)` by weighted least squares starting from
/// `initial` (natural parameters).
///
/// Uncertainties are the square roots of the diagonal of the inverse normal
/// matrix at the optimum, scaled by the reduced chi-square, and mapped back
/// through any log transform by the delta method.
pub fn fit_curve<F: Scalar, M: CurveModel<F>>(
    model: &M,
    x: &[F],
    y: &[F],
    weights: Option<&[F]>,
    initial: &[F],
    options: &FitOptions<F>,
) -> Result<FitResult<F>, FitError> {
    let n = model.n_params();
    if x.len() != y.len() {
        return Err(FitError::ShapeMismatch(format!(
            "{} x values vs {} y values",
            x.len(),
            y.len()
        )));
    }
    if let Some(w) = weights {
        if w.len() != x.len() {
            return Err(FitError::ShapeMismatch(format!(
                "{} weights vs {} points",
                w.len(),
                x.len()
            )));
        }
    }
    if x.len() < n {
        return Err(FitError::Underdetermined(format!(
            "{} points for {n} parameters",
            x.len()
        )));
    }
    if initial.len() != n {
        return Err(FitError::ShapeMismatch(format!(
            "{} initial values for {n} parameters",
            initial.len()
        )));
    }
    let transforms = model.transforms();
    for (j, (&p0, &tr)) in initial.iter().zip(transforms).enumerate() {
        if tr == Transform::LogPositive && p0 <= F::zero() {
            return Err(FitError::InvalidInput(format!(
                "initial value for {} must be positive, got {p0:?}",
                model.names()[j]
            )));
        }
    }

    let mut theta: Vec<F> = initial
        .iter()
        .zip(transforms)
        .map(|(&p, &tr)| to_internal(p, tr))
        .collect();
    let mut params: Vec<F> = initial.to_vec();
    let mut cost = weighted_cost(model, x, y, weights, &params);
    let mut damping = options.initial_damping;
    let mut ws = Workspace {
        normal: vec![vec![F::zero(); n]; n],
        gradient: vec![F::zero(); n],
        row: vec![F::zero(); n],
    };

    let mut converged = false;
    let mut n_iterations = 0;
    for _ in 0..options.max_iterations {
        n_iterations += 1;

        for row in ws.normal.iter_mut() {
            row.iter_mut().for_each(|v| *v = F::zero());
        }
        ws.gradient.iter_mut().for_each(|v| *v = F::zero());

        for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
            let w = weights.map_or(F::one(), |w| w[i]);
            let residual = yi - model.eval(xi, &params);
            model.jacobian(xi, &params, &mut ws.row);
            // Chain rule for log-transformed coordinates: dp/dtheta = p.
            for j in 0..n {
                if transforms[j] == Transform::LogPositive {
                    ws.row[j] = ws.row[j] * params[j];
                }
            }
            for j in 0..n {
                ws.gradient[j] = ws.gradient[j] + w * ws.row[j] * residual;
                for k in j..n {
                    ws.normal[j][k] = ws.normal[j][k] + w * ws.row[j] * ws.row[k];
                }
            }
        }
        for j in 0..n {
            for k in 0..j {
                ws.normal[j][k] = ws.normal[k][j];
            }
        }

        // MINPACK-style orthogonality measure: cosine between the residual
        // vector and each Jacobian column.
        let mut max_cosine = F::zero();
        if cost > F::zero() {
            for j in 0..n {
                let denom = (ws.normal[j][j] * cost).sqrt();
                if denom > F::zero() {
                    let cosine = ws.gradient[j].abs() / denom;
                    if cosine > max_cosine {
                        max_cosine = cosine;
                    }
                }
            }
        }
        if max_cosine < options.gradient_tolerance {
            converged = true;
            break;
        }

        let diag_floor = ws
            .normal
            .iter()
            .enumerate()
            .map(|(j, row)| row[j])
            .fold(F::zero(), F::max)
            * F::lit(1e-14)
            + F::min_positive_value();

        let mut accepted = false;
        let mut step_size = F::zero();
        while damping < F::lit(1e14) {
            let mut a: Vec<Vec<F>> = ws.normal.clone();
            for j in 0..n {
                a[j][j] = a[j][j] + damping * a[j][j].max(diag_floor);
            }
            let mut g = ws.gradient.clone();
            let Some(delta) = solve_dense(&mut a, &mut g) else {
                damping = damping * F::lit(10.0);
                continue;
            };
            let trial_theta: Vec<F> = theta
                .iter()
                .zip(&delta)
                .map(|(&t, &d)| t + d)
                .collect();
            let trial_params: Vec<F> = trial_theta
                .iter()
                .zip(transforms)
                .map(|(&t, &tr)| to_natural(t, tr))
                .collect();
            if trial_params.iter().any(|p| !p.is_finite()) {
                damping = damping * F::lit(10.0);
                continue;
            }
            let trial_cost = weighted_cost(model, x, y, weights, &trial_params);
            if trial_cost.is_finite() && trial_cost <= cost {
                step_size = delta
                    .iter()
                    .zip(&theta)
                    .map(|(&d, &t)| d.abs() / t.abs().max(F::one()))
                    .fold(F::zero(), F::max);
                theta = trial_theta;
                params = trial_params;
                cost = trial_cost;
                damping = (damping / F::lit(3.0)).max(F::lit(1e-12));
                accepted = true;
                break;
            }
            damping = damping * F::lit(10.0);
        }

        if !accepted {
            // Damping exhausted without a downhill step; report the best
            // point found with the convergence checks as they stand.
            break;
        }
        if step_size < options.step_tolerance {
            // Re-check the gradient at the accepted point on the next pass;
            // a tiny step with a large gradient must not claim convergence.
            continue;
        }
    }

    // Final gradient check for the converged flag when the loop ran out of
    // iterations right after small steps.
    if !converged {
        converged = gradient_is_flat(model, x, y, weights, &params, transforms, options);
    }

    let dof = (x.len() - n).max(1);
    let reduced_chi2 = cost / F::from_usize(dof).unwrap();
    let sigmas = parameter_sigmas(model, x, weights, &params, transforms, reduced_chi2);

    let params_out = model
        .names()
        .iter()
        .zip(&params)
        .zip(&sigmas)
        .map(|((&name, &value), &sigma)| Param { name, value, sigma })
        .collect();
    Ok(FitResult {
        params: params_out,
        reduced_chi2,
        n_iterations,
        converged,
    })
}

fn gradient_is_flat<F: Scalar, M: CurveModel<F>>(
    model: &M,
    x: &[F],
    y: &[F],
    weights: Option<&[F]>,
    params: &[F],
    transforms: &[Transform],
    options: &FitOptions<F>,
) -> bool {
    let n = model.n_params();
    let mut gradient = vec![F::zero(); n];
    let mut diag = vec![F::zero(); n];
    let mut row = vec![F::zero(); n];
    let mut cost = F::zero();
    for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
        let w = weights.map_or(F::one(), |w| w[i]);
        let residual = yi - model.eval(xi, params);
        cost = cost + w * residual * residual;
        model.jacobian(xi, params, &mut row);
        for j in 0..n {
            let col = if transforms[j] == Transform::LogPositive {
                row[j] * params[j]
            } else {
                row[j]
            };
            gradient[j] = gradient[j] + w * col * residual;
            diag[j] = diag[j] + w * col * col;
        }
    }
    if cost == F::zero() {
        return true;
    }
    (0..n).all(|j| {
        let denom = (diag[j] * cost).sqrt();
        denom == F::zero() || gradient[j].abs() / denom < options.gradient_tolerance
    })
}

fn parameter_sigmas<F: Scalar, M: CurveModel<F>>(
    model: &M,
    x: &[F],
    weights: Option<&[F]>,
    params: &[F],
    transforms: &[Transform],
    reduced_chi2: F,
) -> Vec<F> {
    let n = model.n_params();
    let mut normal = vec![vec![F::zero(); n]; n];
    let mut row = vec![F::zero(); n];
    for (i, &xi) in x.iter().enumerate() {
        let w = weights.map_or(F::one(), |w| w[i]);
        model.jacobian(xi, params, &mut row);
        for j in 0..n {
            for k in j..n {
                normal[j][k] = normal[j][k] + w * row[j] * row[k];
            }
        }
    }
    for j in 0..n {
        for k in 0..j {
            normal[j][k] = normal[k][j];
        }
    }
    // Invert by solving against unit vectors; fall back to infinite sigma
    // for directions the data does not constrain.
    let mut sigmas = vec![F::infinity(); n];
    for j in 0..n {
        let mut a = normal.clone();
        let mut e = vec![F::zero(); n];
        e[j] = F::one();
        if let Some(col) = solve_dense(&mut a, &mut e) {
            let var = col[j] * reduced_chi2;
            if var >= F::zero() {
                sigmas[j] = var.sqrt();
            }
        }
    }
    // Note: sigmas computed in natural coordinates directly (the Jacobian
    // here is unchained), so no delta-method mapping is needed.
    let _ = transforms;
    sigmas
}
