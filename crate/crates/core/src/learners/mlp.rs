//! Single-hidden-layer network trained with resilient propagation.
//!
//! The forward map is `y = w0 + sum_j w_j * sigmoid(b_j + sum_i w_ij * x_i)`:
//! sigmoid hidden layer, linear output (a sigmoid output would clamp price
//! levels). Training is batch RPROP: per-weight step sizes adapt from
//! gradient sign agreement only, so no learning rate or momentum is needed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::dataset::RegressionDataset;
use crate::scalar::Scalar;

/// Network and training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig<T> {
    /// Input nodes; equals the selected lag order.
    pub n_input: usize,
    /// Hidden sigmoid units.
    pub n_hidden: usize,
    pub max_epochs: usize,
    /// Stop once the training mean squared error falls below this.
    pub target_mse: T,
    pub seed: u64,
}

impl<T: Scalar> MlpConfig<T> {
    pub fn new(n_input: usize) -> Self {
        MlpConfig {
            n_input,
            n_hidden: 10,
            max_epochs: 2000,
            target_mse: T::from_f64_lit(1e-5),
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_input == 0 {
            return Err(Error::InvalidParameter {
                name: "n_input",
                reason: "must be at least 1".into(),
            });
        }
        if self.n_hidden == 0 {
            return Err(Error::InvalidParameter {
                name: "n_hidden",
                reason: "must be at least 1".into(),
            });
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidParameter {
                name: "max_epochs",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Trained weights. `hidden_weights[j][i]` connects input `i` to hidden unit
/// `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel<T> {
    pub hidden_weights: Vec<Vec<T>>,
    pub hidden_bias: Vec<T>,
    pub output_weights: Vec<T>,
    pub output_bias: T,
}

impl<T: Scalar> MlpModel<T> {
    pub fn n_input(&self) -> usize {
        self.hidden_weights.first().map_or(0, Vec::len)
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden_weights.len()
    }

    fn param_count(&self) -> usize {
        self.n_hidden() * self.n_input() + 2 * self.n_hidden() + 1
    }

    /// Flat layout: hidden weights row-major, hidden biases, output weights,
    /// output bias. Gradients and RPROP state use the same order.
    #[cfg(test)]
    fn pack(&self) -> Vec<T> {
        let mut flat = Vec::with_capacity(self.param_count());
        for row in &self.hidden_weights {
            flat.extend_from_slice(row);
        }
        flat.extend_from_slice(&self.hidden_bias);
        flat.extend_from_slice(&self.output_weights);
        flat.push(self.output_bias);
        flat
    }

    fn unpack(flat: &[T], n_input: usize, n_hidden: usize) -> Self {
        let mut it = flat.iter().copied();
        let hidden_weights = (0..n_hidden)
            .map(|_| (0..n_input).map(|_| it.next().unwrap()).collect())
            .collect();
        let hidden_bias = (0..n_hidden).map(|_| it.next().unwrap()).collect();
        let output_weights = (0..n_hidden).map(|_| it.next().unwrap()).collect();
        let output_bias = it.next().unwrap();
        MlpModel {
            hidden_weights,
            hidden_bias,
            output_weights,
            output_bias,
        }
    }
}

fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

/// Network output for a single input vector.
pub fn mlp_forward<T: Scalar>(model: &MlpModel<T>, x: &[T]) -> T {
    debug_assert_eq!(x.len(), model.n_input());
    let mut y = model.output_bias;
    for j in 0..model.n_hidden() {
        let mut a = model.hidden_bias[j];
        for (w, &xi) in model.hidden_weights[j].iter().zip(x) {
            a = a + *w * xi;
        }
        y = y + model.output_weights[j] * sigmoid(a);
    }
    y
}

/// Half sum of squared residuals over the dataset, plus its gradient with
/// respect to every weight and bias (in the flat parameter layout).
pub fn mlp_loss_and_gradient<T: Scalar>(
    model: &MlpModel<T>,
    data: &RegressionDataset<T>,
) -> Result<(T, Vec<T>)> {
    if data.width() != model.n_input() {
        return Err(Error::Validation(format!(
            "dataset width {} does not match {} input nodes",
            data.width(),
            model.n_input()
        )));
    }
    let u = model.n_hidden();
    let v = model.n_input();
    let half = T::from_f64_lit(0.5);

    let mut loss = T::zero();
    let mut g_hw = vec![vec![T::zero(); v]; u];
    let mut g_hb = vec![T::zero(); u];
    let mut g_ow = vec![T::zero(); u];
    let mut g_ob = T::zero();

    let mut hidden = vec![T::zero(); u];
    for (x, &target) in data.inputs.iter().zip(&data.targets) {
        let mut y = model.output_bias;
        for j in 0..u {
            let mut a = model.hidden_bias[j];
            for (w, &xi) in model.hidden_weights[j].iter().zip(x) {
                a = a + *w * xi;
            }
            let h = sigmoid(a);
            hidden[j] = h;
            y = y + model.output_weights[j] * h;
        }
        let e = y - target;
        loss = loss + half * e * e;

        g_ob = g_ob + e;
        for j in 0..u {
            let h = hidden[j];
            g_ow[j] = g_ow[j] + e * h;
            let da = e * model.output_weights[j] * h * (T::one() - h);
            g_hb[j] = g_hb[j] + da;
            for (gw, &xi) in g_hw[j].iter_mut().zip(x) {
                *gw = *gw + da * xi;
            }
        }
    }

    let mut grad = Vec::with_capacity(model.param_count());
    for row in &g_hw {
        grad.extend_from_slice(row);
    }
    grad.extend_from_slice(&g_hb);
    grad.extend_from_slice(&g_ow);
    grad.push(g_ob);
    Ok((loss, grad))
}

/// Per-weight adaptive step sizes and previous gradient signs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpropState<T> {
    pub step: Vec<T>,
    pub prev_grad: Vec<T>,
    pub eta_plus: T,
    pub eta_minus: T,
    pub delta_max: T,
    pub delta_min: T,
}

impl<T: Scalar> RpropState<T> {
    pub fn new(n_params: usize) -> Self {
        RpropState {
            step: vec![T::from_f64_lit(0.1); n_params],
            prev_grad: vec![T::zero(); n_params],
            eta_plus: T::from_f64_lit(1.2),
            eta_minus: T::from_f64_lit(0.5),
            delta_max: T::from_f64_lit(50.0),
            delta_min: T::from_f64_lit(1e-6),
        }
    }

    /// One batch update. On sign agreement the step grows and the weight
    /// moves against the gradient; on a sign flip the step shrinks and the
    /// stored gradient is zeroed so the next epoch moves with a fresh sign.
    pub fn update(&mut self, params: &mut [T], grad: &[T]) {
        for k in 0..params.len() {
            let g = grad[k];
            let s = self.prev_grad[k] * g;
            if s > T::zero() {
                self.step[k] = (self.step[k] * self.eta_plus).min(self.delta_max);
                params[k] = params[k] - g.signum() * self.step[k];
                self.prev_grad[k] = g;
            } else if s < T::zero() {
                self.step[k] = (self.step[k] * self.eta_minus).max(self.delta_min);
                self.prev_grad[k] = T::zero();
            } else {
                if g != T::zero() {
                    params[k] = params[k] - g.signum() * self.step[k];
                }
                self.prev_grad[k] = g;
            }
        }
    }
}

/// Training outcome: the model plus the loss trace used for monitoring.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpTrainOutput<T> {
    pub model: MlpModel<T>,
    pub epochs_run: usize,
    pub final_mse: T,
    pub mse_history: Vec<T>,
}

/// Trains with batch RPROP from a seeded uniform [-0.5, 0.5] initialization.
/// Stops at `target_mse` or `max_epochs`, whichever comes first.
pub fn mlp_train_rprop<T: Scalar>(
    cfg: &MlpConfig<T>,
    data: &RegressionDataset<T>,
) -> Result<MlpTrainOutput<T>> {
    cfg.validate()?;
    if data.width() != cfg.n_input {
        return Err(Error::Validation(format!(
            "dataset width {} does not match configured {} input nodes",
            data.width(),
            cfg.n_input
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_params = cfg.n_hidden * cfg.n_input + 2 * cfg.n_hidden + 1;
    let mut params: Vec<T> = (0..n_params)
        .map(|_| T::from_f64_lit(rng.random_range(-0.5..0.5)))
        .collect();
    let mut state = RpropState::new(n_params);

    let n = T::from_usize_lit(data.len());
    let two = T::from_f64_lit(2.0);
    let mut history = Vec::new();
    let mut model = MlpModel::unpack(&params, cfg.n_input, cfg.n_hidden);
    let mut mse = T::infinity();

    let mut epochs_run = 0;
    for epoch in 0..cfg.max_epochs {
        let (loss, grad) = mlp_loss_and_gradient(&model, data)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        mse = two * loss / n;
        history.push(mse);
        epochs_run = epoch + 1;
        if mse <= cfg.target_mse {
            break;
        }
        state.update(&mut params, &grad);
        model = MlpModel::unpack(&params, cfg.n_input, cfg.n_hidden);
    }

    Ok(MlpTrainOutput {
        model,
        epochs_run,
        final_mse: mse,
        mse_history: history,
    })
}
