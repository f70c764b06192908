//! Epsilon-insensitive support vector regression.
//!
//! The dual is solved by sequential two-variable optimization over the
//! paired (alpha, alpha*) box variables with maximal-violating-pair working
//! set selection. Training stops when the pairwise KKT violation falls below
//! the configured tolerance. Grid search sweeps the exponential C / epsilon
//! (and RBF gamma) ladders against a chronological validation tail.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::dataset::RegressionDataset;
use crate::scalar::Scalar;

/// Kernel function over input rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel<T> {
    Rbf { gamma: T },
    Polynomial { degree: u32, coef: T },
    Linear,
}

impl<T: Scalar> Kernel<T> {
    pub fn eval(&self, a: &[T], b: &[T]) -> T {
        match *self {
            Kernel::Rbf { gamma } => {
                let d2: T = a
                    .iter()
                    .zip(b)
                    .map(|(&x, &y)| (x - y) * (x - y))
                    .sum();
                (-gamma * d2).exp()
            }
            Kernel::Polynomial { degree, coef } => {
                let dot: T = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
                (dot + coef).powi(degree as i32)
            }
            Kernel::Linear => a.iter().zip(b).map(|(&x, &y)| x * y).sum(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Rbf { .. } => "rbf",
            Kernel::Polynomial { .. } => "polynomial",
            Kernel::Linear => "linear",
        }
    }
}

/// Training settings for one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrConfig<T> {
    pub c: T,
    pub epsilon: T,
    pub kernel: Kernel<T>,
    /// Pairwise KKT violation at which the solver stops.
    pub tolerance: T,
    /// Budget of two-variable optimization steps.
    pub max_passes: usize,
}

impl<T: Scalar> SvrConfig<T> {
    pub fn new(c: T, epsilon: T, kernel: Kernel<T>) -> Self {
        SvrConfig {
            c,
            epsilon,
            kernel,
            tolerance: T::from_f64_lit(1e-3),
            max_passes: 100_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.c <= T::zero() {
            return Err(Error::InvalidParameter {
                name: "C",
                reason: "must be positive".into(),
            });
        }
        if self.epsilon < T::zero() {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "must be non-negative".into(),
            });
        }
        if let Kernel::Rbf { gamma } = self.kernel {
            if gamma <= T::zero() {
                return Err(Error::InvalidParameter {
                    name: "gamma",
                    reason: "must be positive".into(),
                });
            }
        }
        if self.tolerance <= T::zero() {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Trained regressor: support vectors with their dual coefficients
/// `beta_i = alpha_i - alpha_i*`, the bias, and the kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel<T> {
    pub support_vectors: Vec<Vec<T>>,
    pub dual_coeffs: Vec<T>,
    pub bias: T,
    pub kernel: Kernel<T>,
}

/// Fit plus solver diagnostics used by tests and reports.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrTrainOutput<T> {
    pub model: SvrModel<T>,
    /// Per-training-row dual coefficient (zero rows included).
    pub betas: Vec<T>,
    /// Pairwise KKT violation at the final iterate.
    pub kkt_violation: T,
    pub iterations: usize,
}

/// Evaluates Eq-10-style objective at the trained point:
/// `0.5 * sum_ij beta_i beta_j K_ij + C * sum_i max(0, |y_i - f(x_i)| - eps)`.
pub fn primal_objective<T: Scalar>(
    out: &SvrTrainOutput<T>,
    data: &RegressionDataset<T>,
    cfg: &SvrConfig<T>,
) -> T {
    let mut structure = T::zero();
    for (i, &bi) in out.betas.iter().enumerate() {
        if bi == T::zero() {
            continue;
        }
        for (j, &bj) in out.betas.iter().enumerate() {
            if bj == T::zero() {
                continue;
            }
            structure = structure + bi * bj * cfg.kernel.eval(&data.inputs[i], &data.inputs[j]);
        }
    }
    let mut empirical = T::zero();
    for (x, &y) in data.inputs.iter().zip(&data.targets) {
        let r = (y - svr_predict(&out.model, x)).abs() - cfg.epsilon;
        if r > T::zero() {
            empirical = empirical + r;
        }
    }
    T::from_f64_lit(0.5) * structure + cfg.c * empirical
}

/// Dual-solver state over the stacked 2n box variables: slots `0..n` are the
/// alpha side (constraint sign +1), slots `n..2n` the alpha* side (sign -1).
struct Smo<'a, T> {
    gram: &'a [Vec<T>],
    c: T,
    n: usize,
    alpha: Vec<T>,
    grad: Vec<T>,
}

impl<'a, T: Scalar> Smo<'a, T> {
    fn new(gram: &'a [Vec<T>], targets: &[T], epsilon: T, c: T) -> Self {
        let n = targets.len();
        let mut grad = Vec::with_capacity(2 * n);
        for &y in targets {
            grad.push(epsilon - y);
        }
        for &y in targets {
            grad.push(epsilon + y);
        }
        Smo {
            gram,
            c,
            n,
            alpha: vec![T::zero(); 2 * n],
            grad,
        }
    }

    fn sign(&self, t: usize) -> T {
        if t < self.n {
            T::one()
        } else {
            -T::one()
        }
    }

    /// KKT value `-y_t * G_t` used for working-set selection.
    fn v(&self, t: usize) -> T {
        if t < self.n {
            -self.grad[t]
        } else {
            self.grad[t]
        }
    }

    fn in_up(&self, t: usize) -> bool {
        if t < self.n {
            self.alpha[t] < self.c
        } else {
            self.alpha[t] > T::zero()
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if t < self.n {
            self.alpha[t] > T::zero()
        } else {
            self.alpha[t] < self.c
        }
    }

    /// Maximal-violating pair with second-order selection of the partner.
    /// Returns (i, j, violation).
    fn select(&self) -> Option<(usize, usize, T)> {
        let tau = T::from_f64_lit(1e-12);
        let mut m_up = T::neg_infinity();
        let mut i = usize::MAX;
        for t in 0..2 * self.n {
            if self.in_up(t) && self.v(t) > m_up {
                m_up = self.v(t);
                i = t;
            }
        }
        if i == usize::MAX {
            return None;
        }
        let bi = i % self.n;
        let mut m_low = T::infinity();
        let mut j = usize::MAX;
        let mut best = T::infinity();
        for t in 0..2 * self.n {
            if !self.in_low(t) {
                continue;
            }
            let vt = self.v(t);
            if vt < m_low {
                m_low = vt;
            }
            if vt < m_up {
                let bt = t % self.n;
                let mut a = self.gram[bi][bi] + self.gram[bt][bt]
                    - T::from_f64_lit(2.0) * self.gram[bi][bt];
                if a <= T::zero() {
                    a = tau;
                }
                let b = m_up - vt;
                let obj = -(b * b) / a;
                if obj < best {
                    best = obj;
                    j = t;
                }
            }
        }
        if j == usize::MAX {
            return None;
        }
        Some((i, j, m_up - m_low))
    }

    /// Two-variable analytic solve on the selected pair, with box clipping
    /// that preserves the equality constraint.
    fn step(&mut self, i: usize, j: usize) {
        let tau = T::from_f64_lit(1e-12);
        let (bi, bj) = (i % self.n, j % self.n);
        let mut quad =
            self.gram[bi][bi] + self.gram[bj][bj] - T::from_f64_lit(2.0) * self.gram[bi][bj];
        if quad <= T::zero() {
            quad = tau;
        }
        let old_i = self.alpha[i];
        let old_j = self.alpha[j];
        let c = self.c;

        if self.sign(i) != self.sign(j) {
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = old_i - old_j;
            self.alpha[i] = old_i + delta;
            self.alpha[j] = old_j + delta;
            if diff > T::zero() {
                if self.alpha[j] < T::zero() {
                    self.alpha[j] = T::zero();
                    self.alpha[i] = diff;
                }
            } else if self.alpha[i] < T::zero() {
                self.alpha[i] = T::zero();
                self.alpha[j] = -diff;
            }
            if diff > T::zero() {
                if self.alpha[i] > c {
                    self.alpha[i] = c;
                    self.alpha[j] = c - diff;
                }
            } else if self.alpha[j] > c {
                self.alpha[j] = c;
                self.alpha[i] = c + diff;
            }
        } else {
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = old_i + old_j;
            self.alpha[i] = old_i - delta;
            self.alpha[j] = old_j + delta;
            if sum > c {
                if self.alpha[i] > c {
                    self.alpha[i] = c;
                    self.alpha[j] = sum - c;
                }
            } else if self.alpha[j] < T::zero() {
                self.alpha[j] = T::zero();
                self.alpha[i] = sum;
            }
            if sum > c {
                if self.alpha[j] > c {
                    self.alpha[j] = c;
                    self.alpha[i] = sum - c;
                }
            } else if self.alpha[i] < T::zero() {
                self.alpha[i] = T::zero();
                self.alpha[j] = sum;
            }
        }

        let d_i = self.alpha[i] - old_i;
        let d_j = self.alpha[j] - old_j;
        let si = self.sign(i);
        let sj = self.sign(j);
        for r in 0..self.n {
            let val = si * self.gram[r][bi] * d_i + sj * self.gram[r][bj] * d_j;
            self.grad[r] = self.grad[r] + val;
            self.grad[r + self.n] = self.grad[r + self.n] - val;
        }
    }

    /// Bias from free support vectors, falling back to the violation-interval
    /// midpoint when no variable is strictly inside the box.
    fn bias(&self) -> T {
        let mut acc = T::zero();
        let mut count = 0usize;
        for t in 0..2 * self.n {
            if self.alpha[t] > T::zero() && self.alpha[t] < self.c {
                acc = acc + self.v(t);
                count += 1;
            }
        }
        if count > 0 {
            return acc / T::from_usize_lit(count);
        }
        let mut m_up = T::neg_infinity();
        let mut m_low = T::infinity();
        for t in 0..2 * self.n {
            if self.in_up(t) {
                m_up = m_up.max(self.v(t));
            }
            if self.in_low(t) {
                m_low = m_low.min(self.v(t));
            }
        }
        (m_up + m_low) / T::from_f64_lit(2.0)
    }

    fn violation(&self) -> T {
        let mut m_up = T::neg_infinity();
        let mut m_low = T::infinity();
        for t in 0..2 * self.n {
            if self.in_up(t) {
                m_up = m_up.max(self.v(t));
            }
            if self.in_low(t) {
                m_low = m_low.min(self.v(t));
            }
        }
        m_up - m_low
    }
}

fn gram_matrix<T: Scalar>(data: &RegressionDataset<T>, kernel: &Kernel<T>) -> Vec<Vec<T>> {
    let n = data.len();
    let mut gram = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let k = kernel.eval(&data.inputs[i], &data.inputs[j]);
            gram[i][j] = k;
            gram[j][i] = k;
        }
    }
    gram
}

fn train_on_gram<T: Scalar>(
    gram: &[Vec<T>],
    data: &RegressionDataset<T>,
    cfg: &SvrConfig<T>,
) -> Result<SvrTrainOutput<T>> {
    let n = data.len();
    let mut smo = Smo::new(gram, &data.targets, cfg.epsilon, cfg.c);
    let mut iterations = 0;
    loop {
        match smo.select() {
            Some((_, _, violation)) if violation <= cfg.tolerance => break,
            Some((i, j, violation)) => {
                if iterations >= cfg.max_passes {
                    if violation <= cfg.tolerance * T::from_f64_lit(10.0) {
                        break;
                    }
                    return Err(Error::Convergence {
                        iterations,
                        reason: format!(
                            "KKT violation {violation} still above 10x tolerance {}",
                            cfg.tolerance
                        ),
                    });
                }
                smo.step(i, j);
                iterations += 1;
            }
            None => break,
        }
    }

    let bias = smo.bias();
    let betas: Vec<T> = (0..n).map(|r| smo.alpha[r] - smo.alpha[r + n]).collect();
    let mut support_vectors = Vec::new();
    let mut dual_coeffs = Vec::new();
    for (r, &beta) in betas.iter().enumerate() {
        if beta != T::zero() {
            support_vectors.push(data.inputs[r].clone());
            dual_coeffs.push(beta);
        }
    }
    Ok(SvrTrainOutput {
        model: SvrModel {
            support_vectors,
            dual_coeffs,
            bias,
            kernel: cfg.kernel.clone(),
        },
        betas,
        kkt_violation: smo.violation().max(T::zero()),
        iterations,
    })
}

/// Trains and returns solver diagnostics alongside the model.
pub fn svr_train_detailed<T: Scalar>(
    cfg: &SvrConfig<T>,
    data: &RegressionDataset<T>,
) -> Result<SvrTrainOutput<T>> {
    cfg.validate()?;
    if data.len() < 2 {
        return Err(Error::SeriesTooShort {
            need: 2,
            got: data.len(),
        });
    }
    let gram = gram_matrix(data, &cfg.kernel);
    train_on_gram(&gram, data, cfg)
}

/// Trains an epsilon-SVR on the dataset.
pub fn svr_train<T: Scalar>(cfg: &SvrConfig<T>, data: &RegressionDataset<T>) -> Result<SvrModel<T>> {
    Ok(svr_train_detailed(cfg, data)?.model)
}

/// Kernel expansion over the stored support vectors plus the bias.
pub fn svr_predict<T: Scalar>(model: &SvrModel<T>, x: &[T]) -> T {
    let mut acc = model.bias;
    for (sv, &beta) in model.support_vectors.iter().zip(&model.dual_coeffs) {
        acc = acc + beta * model.kernel.eval(x, sv);
    }
    acc
}

/// Kernel axis of the hyperparameter grid.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelGrid<T> {
    /// RBF with a ladder of gamma values.
    Rbf { gammas: Vec<T> },
    /// A single fixed kernel (linear or polynomial).
    Fixed(Kernel<T>),
}

/// Hyperparameter ladders swept by [`svr_grid_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    pub c_values: Vec<T>,
    pub epsilon_values: Vec<T>,
    pub kernel: KernelGrid<T>,
    pub tolerance: T,
    pub max_passes: usize,
}

fn pow2<T: Scalar>(e: i32) -> T {
    T::from_f64_lit(2f64.powi(e))
}

impl<T: Scalar> Default for GridSpec<T> {
    /// C at 2^-3, 2^-1, ..., 2^15; epsilon at 2^-8..2^-1; RBF gamma at
    /// 2^-4..2^2.
    fn default() -> Self {
        GridSpec {
            c_values: (-1..=8).map(|k| pow2(2 * k - 1)).collect(),
            epsilon_values: (-8..=-1).map(pow2).collect(),
            kernel: KernelGrid::Rbf {
                gammas: (-4..=2).map(pow2).collect(),
            },
            tolerance: T::from_f64_lit(1e-3),
            max_passes: 100_000,
        }
    }
}

/// Winning cell of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchOutcome<T> {
    pub config: SvrConfig<T>,
    pub validation_mse: T,
}

/// Sweeps the grid, scoring each cell by mean squared error on the
/// chronological tail of the dataset. Ties break toward smaller C, then
/// smaller epsilon, then smaller gamma.
pub fn svr_grid_search<T: Scalar>(
    data: &RegressionDataset<T>,
    grid: &GridSpec<T>,
    validation_fraction: f64,
) -> Result<GridSearchOutcome<T>> {
    if !(0.0 < validation_fraction && validation_fraction < 1.0) {
        return Err(Error::InvalidParameter {
            name: "validation_fraction",
            reason: format!("{validation_fraction} is outside (0, 1)"),
        });
    }
    if grid.c_values.is_empty() || grid.epsilon_values.is_empty() {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "empty C or epsilon ladder".into(),
        });
    }
    let n = data.len();
    let fit_rows = n - ((n as f64 * validation_fraction).floor() as usize).max(1);
    if fit_rows < 2 {
        return Err(Error::SeriesTooShort { need: 4, got: n });
    }
    let (fit, val) = data.split_at(fit_rows)?;

    let kernels: Vec<Kernel<T>> = match &grid.kernel {
        KernelGrid::Rbf { gammas } => {
            if gammas.is_empty() {
                return Err(Error::InvalidParameter {
                    name: "grid",
                    reason: "empty gamma ladder".into(),
                });
            }
            gammas.iter().map(|&gamma| Kernel::Rbf { gamma }).collect()
        }
        KernelGrid::Fixed(k) => vec![k.clone()],
    };

    // one Gram matrix per kernel, shared across every (C, epsilon) cell
    use rayon::prelude::*;
    let per_kernel: Vec<(usize, Result<(usize, usize, T)>)> = kernels
        .par_iter()
        .enumerate()
        .map(|(kernel_idx, kernel)| {
            let gram = gram_matrix(&fit, kernel);
            let mut best: Option<(usize, usize, T)> = None;
            let mut first_err: Option<Error> = None;
            for (ci, &c) in grid.c_values.iter().enumerate() {
                for (ei, &epsilon) in grid.epsilon_values.iter().enumerate() {
                    let cfg = SvrConfig {
                        c,
                        epsilon,
                        kernel: kernel.clone(),
                        tolerance: grid.tolerance,
                        max_passes: grid.max_passes,
                    };
                    match train_on_gram(&gram, &fit, &cfg) {
                        Ok(out) => {
                            let mse = val
                                .inputs
                                .iter()
                                .zip(&val.targets)
                                .map(|(x, &y)| {
                                    let e = svr_predict(&out.model, x) - y;
                                    e * e
                                })
                                .sum::<T>()
                                / T::from_usize_lit(val.len());
                            let better = match best {
                                None => true,
                                Some((bc, be, bm)) => {
                                    mse < bm || (mse == bm && (ci, ei) < (bc, be))
                                }
                            };
                            if better {
                                best = Some((ci, ei, mse));
                            }
                        }
                        Err(e) => {
                            if first_err.is_none() {
                                first_err = Some(e);
                            }
                        }
                    }
                }
            }
            let outcome = match best {
                Some(b) => Ok(b),
                None => Err(first_err.unwrap_or_else(|| {
                    Error::Numeric("no grid cell produced a model".into())
                })),
            };
            (kernel_idx, outcome)
        })
        .collect();

    let mut winner: Option<(usize, usize, usize, T)> = None;
    let mut diagnostics = Vec::new();
    for (kernel_idx, outcome) in per_kernel {
        match outcome {
            Ok((ci, ei, mse)) => {
                let better = match winner {
                    None => true,
                    // mse first, then C, then epsilon, then gamma order
                    Some((wc, we, wk, wm)) => {
                        mse < wm || (mse == wm && (ci, ei, kernel_idx) < (wc, we, wk))
                    }
                };
                if better {
                    winner = Some((ci, ei, kernel_idx, mse));
                }
            }
            Err(e) => diagnostics.push(format!("kernel[{kernel_idx}]: {e}")),
        }
    }

    match winner {
        Some((ci, ei, ki, mse)) => Ok(GridSearchOutcome {
            config: SvrConfig {
                c: grid.c_values[ci],
                epsilon: grid.epsilon_values[ei],
                kernel: kernels[ki].clone(),
                tolerance: grid.tolerance,
                max_passes: grid.max_passes,
            },
            validation_mse: mse,
        }),
        None => Err(Error::Numeric(format!(
            "every grid cell failed: {}",
            diagnostics.join("; ")
        ))),
    }
}
