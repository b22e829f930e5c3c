//! Trust-region Newton method with conjugate-gradient inner solves, in the
//! style of LIBLINEAR's TRON.

use super::{ClassifierError, Objective};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    IterationCap,
    Stalled,
}

pub struct Minimum<F> {
    pub weights: Vec<F>,
    pub loss: F,
    pub gradient_norm: F,
    pub iterations: usize,
    pub status: Status,
}

fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<F: Scalar>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

fn inf_norm<F: Scalar>(a: &[F]) -> F {
    a.iter().fold(F::zero(), |m, &x| m.max(x.abs()))
}

fn axpy<F: Scalar>(alpha: F, x: &[F], y: &mut [F]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

fn m_dot<F: Scalar>(a: &[F], m: &[F], b: &[F]) -> F {
    a.iter().zip(m).zip(b).map(|((&x, &w), &y)| x * w * y).sum()
}

/// Mixed diagonal preconditioner `(1 − α) I + α diag(H)`.
fn preconditioner<F: Scalar>(objective: &Objective<'_, F>, curvature: &[F]) -> Vec<F> {
    let alpha = F::of(0.01);
    objective
        .hessian_diag(curvature)
        .into_iter()
        .map(|h| (F::one() - alpha) + alpha * h)
        .collect()
}

/// Approximately solves `H s = −g` inside `‖s‖_M ≤ delta` by
/// preconditioned CG. Returns `(s, r)` with `r = −g − H s`.
fn trpcg<F: Scalar>(objective: &Objective<'_, F>, curvature: &[F], m: &[F], delta: F, g: &[F]) -> (Vec<F>, Vec<F>) {
    let n = g.len();
    let mut s = vec![F::zero(); n];
    let mut r: Vec<F> = g.iter().map(|&x| -x).collect();
    let mut z: Vec<F> = r.iter().zip(m).map(|(&a, &b)| a / b).collect();
    let mut d = z.clone();
    let mut z_r = dot(&z, &r);
    let cgtol = F::of(0.1) * z_r.sqrt();
    for _ in 0..(2 * n).max(50) {
        if z_r.sqrt() <= cgtol {
            break;
        }
        let hd = objective.hessian_vec(curvature, &d);
        let dhd = dot(&d, &hd);
        if !(dhd > F::zero()) {
            break;
        }
        let mut alpha = z_r / dhd;
        axpy(alpha, &d, &mut s);
        if m_dot(&s, m, &s).sqrt() > delta {
            // step back and move to the trust-region boundary
            axpy(-alpha, &d, &mut s);
            let std = m_dot(&s, m, &d);
            let sts = m_dot(&s, m, &s);
            let dtd = m_dot(&d, m, &d);
            let dsq = delta * delta;
            let rad = (std * std + dtd * (dsq - sts)).max(F::zero()).sqrt();
            alpha = if std >= F::zero() {
                (dsq - sts) / (std + rad)
            } else {
                (rad - std) / dtd
            };
            axpy(alpha, &d, &mut s);
            axpy(-alpha, &hd, &mut r);
            break;
        }
        axpy(-alpha, &hd, &mut r);
        for ((zi, &ri), &mi) in z.iter_mut().zip(&r).zip(m) {
            *zi = ri / mi;
        }
        let z_r_new = dot(&z, &r);
        let beta = z_r_new / z_r;
        for (di, &zi) in d.iter_mut().zip(&z) {
            *di = beta * *di + zi;
        }
        z_r = z_r_new;
    }
    (s, r)
}

pub fn minimize<F: Scalar>(
    objective: &Objective<'_, F>,
    tol: F,
    max_iter: usize,
) -> Result<Minimum<F>, ClassifierError> {
    let (eta0, eta1, eta2) = (F::of(1e-4), F::of(0.25), F::of(0.75));
    let (sigma1, sigma2, sigma3) = (F::of(0.25), F::of(0.5), F::of(4.0));

    let mut w = vec![F::zero(); objective.len()];
    let (mut f, mut g, mut curvature) = objective.evaluate(&w)?;
    let mut m = preconditioner(objective, &curvature);
    let mut delta = m_dot(&g, &m, &g).sqrt();
    let mut iterations = 0;
    let mut status = Status::IterationCap;
    let tiny = F::epsilon() * F::of(1e3);

    loop {
        if inf_norm(&g) <= tol {
            status = Status::Converged;
            break;
        }
        if iterations >= max_iter {
            break;
        }
        let (s, r) = trpcg(objective, &curvature, &m, delta, &g);
        let w_new: Vec<F> = w.iter().zip(&s).map(|(&a, &b)| a + b).collect();
        let gs = dot(&g, &s);
        let prered = -F::half() * (gs - dot(&s, &r));
        let f_new = objective.loss(&w_new);
        if !f_new.is_finite() {
            return Err(ClassifierError::NonFinite);
        }
        let actred = f - f_new;
        let snorm = m_dot(&s, &m, &s).sqrt();
        if iterations == 0 {
            delta = delta.min(snorm);
        }
        let alpha = if f_new - f - gs <= F::zero() {
            sigma3
        } else {
            sigma1.max(-F::half() * (gs / (f_new - f - gs)))
        };
        if actred < eta0 * prered {
            delta = (alpha.max(sigma1) * snorm).min(sigma2 * delta);
        } else if actred < eta1 * prered {
            delta = (sigma1 * delta).max((alpha * snorm).min(sigma2 * delta));
        } else if actred < eta2 * prered {
            delta = (sigma1 * delta).max((alpha * snorm).min(sigma3 * delta));
        } else {
            delta = delta.max((alpha * snorm).min(sigma3 * delta));
        }

        if actred > eta0 * prered {
            iterations += 1;
            w = w_new;
            let (nf, ng, nc) = objective.evaluate(&w)?;
            f = nf;
            g = ng;
            curvature = nc;
            m = preconditioner(objective, &curvature);
            continue;
        }
        if (actred <= F::zero() && prered <= F::zero())
            || (actred.abs() <= tiny * f.abs() && prered.abs() <= tiny * f.abs())
            || delta <= tiny * (F::one() + norm(&w))
        {
            status = Status::Stalled;
            break;
        }
    }
    Ok(Minimum {
        gradient_norm: inf_norm(&g),
        weights: w,
        loss: f,
        iterations,
        status,
    })
}
