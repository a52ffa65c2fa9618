//! One-hidden-layer perceptron with biases: `softmax(ReLU(X·W0 + b0)·W1 + b1)`.
//!
//! Serves as the ensemble's attack model over stacked posteriors and as the
//! structure-free baseline over raw attributes.

use ndarray::{Array1, Array2, Axis, Zip};
use rand::Rng;

use super::adam::Adam;
use super::model::{glorot, logit_gradient, logit_loss, target_accuracy, DropoutMask, PredictionSet};
use super::train::TrainConfig;
use crate::error::{Error, Result};
use crate::rng;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub(crate) w0: Array2<f64>,
    pub(crate) b0: Array1<f64>,
    pub(crate) w1: Array2<f64>,
    pub(crate) b1: Array1<f64>,
    dropout_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub w0: Array2<f64>,
    pub b0: Array1<f64>,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
}

struct MlpPass {
    z1: Array2<f64>,
    hidden: Array2<f64>,
    logits: Array2<f64>,
    prediction: PredictionSet,
}

impl Mlp {
    pub fn init<R: Rng + ?Sized>(
        input_dim: usize,
        hidden_dim: usize,
        num_classes: usize,
        dropout_rate: f64,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        Self {
            w0: glorot(input_dim, hidden_dim, scale, rng),
            b0: Array1::zeros(hidden_dim),
            w1: glorot(hidden_dim, num_classes, scale, rng),
            b1: Array1::zeros(num_classes),
            dropout_rate,
        }
    }

    pub fn from_parts(
        w0: Array2<f64>,
        b0: Array1<f64>,
        w1: Array2<f64>,
        b1: Array1<f64>,
        dropout_rate: f64,
    ) -> Result<Self> {
        if w0.ncols() != b0.len() || w0.ncols() != w1.nrows() || w1.ncols() != b1.len() {
            return Err(Error::DimensionMismatch {
                what: "mlp parameter shapes",
                expected: w0.ncols(),
                found: w1.nrows(),
            });
        }
        Ok(Self {
            w0,
            b0,
            w1,
            b1,
            dropout_rate,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.w0.nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w0.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.w1.ncols()
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    fn pass(&self, x: &CsrMatrix, dropout: Option<&DropoutMask>) -> Result<MlpPass> {
        if x.cols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "mlp input dimension",
                expected: self.input_dim(),
                found: x.cols(),
            });
        }
        let mut z1 = x.spmm(&self.w0);
        z1 += &self.b0;
        let mut hidden = z1.mapv(|v| v.max(0.0));
        if let Some(mask) = dropout {
            hidden *= mask.scale();
        }
        let mut logits = hidden.dot(&self.w1);
        logits += &self.b1;
        let prediction = PredictionSet::from_logits(&logits);
        Ok(MlpPass {
            z1,
            hidden,
            logits,
            prediction,
        })
    }

    pub fn predict(&self, x: &CsrMatrix) -> Result<PredictionSet> {
        Ok(self.pass(x, None)?.prediction)
    }

    fn grads(
        &self,
        x_t: &CsrMatrix,
        pass: &MlpPass,
        targets: &[(usize, usize)],
        dropout: Option<&DropoutMask>,
    ) -> MlpGradients {
        let d_logits = logit_gradient(&pass.prediction, targets);
        let w1 = pass.hidden.t().dot(&d_logits);
        let b1 = d_logits.sum_axis(Axis(0));
        let mut d_hidden = d_logits.dot(&self.w1.t());
        if let Some(mask) = dropout {
            d_hidden *= mask.scale();
        }
        Zip::from(&mut d_hidden).and(&pass.z1).for_each(|g, &z| {
            if z <= 0.0 {
                *g = 0.0;
            }
        });
        let w0 = x_t.spmm(&d_hidden);
        let b0 = d_hidden.sum_axis(Axis(0));
        MlpGradients { w0, b0, w1, b1 }
    }

    /// Gradients of the mean NLL over `targets` (no dropout).
    pub fn backward(&self, x: &CsrMatrix, targets: &[(usize, usize)]) -> Result<MlpGradients> {
        let pass = self.pass(x, None)?;
        Ok(self.grads(&x.transpose(), &pass, targets, None))
    }

    pub fn objective(&self, x: &CsrMatrix, targets: &[(usize, usize)]) -> Result<f64> {
        Ok(logit_loss(&self.pass(x, None)?.logits, targets))
    }
}

/// Full-batch Adam training on rows `targets` of `x`.
pub fn train_mlp(
    x: &CsrMatrix,
    targets: &[(usize, usize)],
    num_classes: usize,
    cfg: &TrainConfig,
) -> Result<Mlp> {
    cfg.validate()?;
    if targets.is_empty() {
        return Err(Error::EmptyNodeSet("no labeled training rows"));
    }
    if let Some(&(r, c)) = targets
        .iter()
        .find(|&&(r, c)| r >= x.rows() || c >= num_classes)
    {
        return Err(Error::InvalidConfig(format!(
            "target ({r}, {c}) outside {} rows / {num_classes} classes",
            x.rows()
        )));
    }
    let mut init_rng = rng::stream(cfg.seed, rng::STREAM_WEIGHT_INIT);
    let mut dropout_rng = rng::stream(cfg.seed, rng::STREAM_DROPOUT);
    let mut mlp = Mlp::init(
        x.cols(),
        cfg.hidden_dim,
        num_classes,
        cfg.dropout_rate,
        cfg.weight_init_scale,
        &mut init_rng,
    );
    let x_t = x.transpose();
    let mut adam = Adam::new(
        cfg.learning_rate,
        cfg.adam_beta1,
        cfg.adam_beta2,
        cfg.adam_epsilon,
        &[
            mlp.w0.dim(),
            (1, mlp.b0.len()),
            mlp.w1.dim(),
            (1, mlp.b1.len()),
        ],
    );
    for epoch in 0..cfg.epochs {
        let mask = (cfg.dropout_rate > 0.0).then(|| {
            DropoutMask::sample(x.rows(), cfg.hidden_dim, cfg.dropout_rate, &mut dropout_rng)
        });
        let pass = mlp.pass(x, mask.as_ref())?;
        let loss = logit_loss(&pass.logits, targets);
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("mlp loss became {loss} at epoch {epoch}")));
        }
        let g = mlp.grads(&x_t, &pass, targets, mask.as_ref());
        let mut b0 = mlp.b0.clone().insert_axis(Axis(0));
        let mut b1 = mlp.b1.clone().insert_axis(Axis(0));
        let gb0 = g.b0.insert_axis(Axis(0));
        let gb1 = g.b1.insert_axis(Axis(0));
        adam.step(
            &mut [&mut mlp.w0, &mut b0, &mut mlp.w1, &mut b1],
            &[&g.w0, &gb0, &g.w1, &gb1],
        );
        mlp.b0 = b0.remove_axis(Axis(0));
        mlp.b1 = b1.remove_axis(Axis(0));
        log::trace!(
            "mlp epoch {epoch}: loss {loss:.4} acc {:.3}",
            target_accuracy(&pass.prediction, targets)
        );
    }
    Ok(mlp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn learns_xor_like_table() {
        let x = CsrMatrix::from_dense(&array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.0, 0.0]]);
        let targets = vec![(0, 1), (1, 1), (2, 0), (3, 0)];
        let cfg = TrainConfig {
            hidden_dim: 16,
            dropout_rate: 0.0,
            epochs: 400,
            seed: 4,
            ..TrainConfig::default()
        };
        let mlp = train_mlp(&x, &targets, 2, &cfg).unwrap();
        assert_eq!(mlp.predict(&x).unwrap().hard_labels(), &[1, 1, 0, 0]);
    }

    #[test]
    fn input_dimension_checked() {
        let mut r = rng::stream(0, 0);
        let mlp = Mlp::init(3, 4, 2, 0.0, 1.0, &mut r);
        assert!(mlp.predict(&CsrMatrix::zeros(2, 5)).is_err());
        assert!(train_mlp(&CsrMatrix::zeros(2, 3), &[], 2, &TrainConfig::default()).is_err());
    }
}
