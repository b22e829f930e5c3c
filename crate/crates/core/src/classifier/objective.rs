use super::{ClassifierError, Example, Label};
use crate::scalar::Scalar;

/// Regularized logistic loss over a fixed example set. Weight vectors have
/// `dim + 1` entries, the bias last.
pub struct Objective<'a, F> {
    examples: &'a [Example],
    dim: usize,
    c_negative: F,
    c_positive: F,
}

impl<'a, F: Scalar> Objective<'a, F> {
    pub fn new(examples: &'a [Example], dim: usize, c_negative: F, c_positive: F) -> Self {
        Objective {
            examples,
            dim,
            c_negative,
            c_positive,
        }
    }

    pub fn len(&self) -> usize {
        self.dim + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn cost(&self, label: Label) -> F {
        match label {
            Label::Positive => self.c_positive,
            Label::Negative => self.c_negative,
        }
    }

    fn dot(&self, w: &[F], ex: &Example) -> F {
        let mut z = w[self.dim];
        for &i in ex.indices.indices() {
            z = z + w[i as usize];
        }
        z
    }

    fn penalty(&self, w: &[F]) -> F {
        F::half() * w[..self.dim].iter().map(|&x| x * x).sum::<F>()
    }

    pub fn loss(&self, w: &[F]) -> F {
        let mut loss = self.penalty(w);
        for ex in self.examples {
            let yz = ex.label.sign::<F>() * self.dot(w, ex);
            loss = loss + self.cost(ex.label) * F::log1p_exp_neg(yz);
        }
        loss
    }

    /// Loss, gradient, and the per-example Hessian diagonal `Cᵢ σ (1 − σ)`.
    pub fn evaluate(&self, w: &[F]) -> Result<(F, Vec<F>, Vec<F>), ClassifierError> {
        let mut loss = self.penalty(w);
        let mut grad: Vec<F> = w.to_vec();
        grad[self.dim] = F::zero();
        let mut curvature = Vec::with_capacity(self.examples.len());
        for ex in self.examples {
            let y = ex.label.sign::<F>();
            let c = self.cost(ex.label);
            let yz = y * self.dot(w, ex);
            loss = loss + c * F::log1p_exp_neg(yz);
            let s = F::sigmoid(yz);
            let coef = c * (s - F::one()) * y;
            for &i in ex.indices.indices() {
                grad[i as usize] = grad[i as usize] + coef;
            }
            grad[self.dim] = grad[self.dim] + coef;
            curvature.push(c * s * (F::one() - s));
        }
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(ClassifierError::NonFinite);
        }
        Ok((loss, grad, curvature))
    }

    /// Diagonal of the Hessian.
    pub fn hessian_diag(&self, curvature: &[F]) -> Vec<F> {
        let mut out = vec![F::one(); self.dim + 1];
        out[self.dim] = F::zero();
        for (ex, &d) in self.examples.iter().zip(curvature) {
            for &i in ex.indices.indices() {
                out[i as usize] = out[i as usize] + d;
            }
            out[self.dim] = out[self.dim] + d;
        }
        out
    }

    /// `H v` with `H = I' + Xᵀ D X`, `I'` the identity without the bias.
    pub fn hessian_vec(&self, curvature: &[F], v: &[F]) -> Vec<F> {
        let mut out: Vec<F> = v.to_vec();
        out[self.dim] = F::zero();
        for (ex, &d) in self.examples.iter().zip(curvature) {
            let xv = self.dot(v, ex) * d;
            for &i in ex.indices.indices() {
                out[i as usize] = out[i as usize] + xv;
            }
            out[self.dim] = out[self.dim] + xv;
        }
        out
    }
}

/// Objective value and exact gradient at `weights` (bias last) for cost `c`.
pub fn loss_and_gradient<F: Scalar>(
    weights: &[F],
    examples: &[Example],
    c: F,
) -> Result<(F, Vec<F>), ClassifierError> {
    if !(c > F::zero()) {
        return Err(ClassifierError::InvalidC(c.to_f64().unwrap_or(f64::NAN)));
    }
    let dim = weights
        .len()
        .checked_sub(1)
        .ok_or(ClassifierError::DimensionMismatch { index: 0, dim: 0 })?;
    for ex in examples {
        if let Some(&i) = ex.indices.indices().iter().find(|&&i| i as usize >= dim) {
            return Err(ClassifierError::DimensionMismatch { index: i, dim });
        }
    }
    let (loss, grad, _) = Objective::new(examples, dim, c, c).evaluate(weights)?;
    Ok((loss, grad))
}
