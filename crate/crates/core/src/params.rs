//! Exponent bundles and their admissibility rules.

use crate::error::{FgnsError, Result};

/// Model exponents `(alpha, beta)` together with the spatial dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    alpha: f64,
    beta: f64,
    dim: usize,
}

impl ModelParams {
    /// Requires `alpha > 0`, `max(alpha, 1/2) < beta <= 1` and `alpha + beta >= 1`.
    pub fn new(alpha: f64, beta: f64, dim: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(FgnsError::param(format!("dim must be 2 or 3, got {dim}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(FgnsError::param(format!("alpha must be positive, got {alpha}")));
        }
        if !(beta > alpha.max(0.5) && beta <= 1.0) {
            return Err(FgnsError::param(format!(
                "beta must satisfy max(alpha, 1/2) < beta <= 1, got alpha = {alpha}, beta = {beta}"
            )));
        }
        if alpha + beta - 1.0 < 0.0 {
            return Err(FgnsError::param(format!(
                "alpha + beta - 1 must be nonnegative, got {}",
                alpha + beta - 1.0
            )));
        }
        Ok(Self { alpha, beta, dim })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Exponent of `r` in the Carleson normalization, `2 alpha - n + 2 beta - 2`.
    pub fn carleson_exponent(&self) -> f64 {
        2.0 * self.alpha - self.dim as f64 + 2.0 * self.beta - 2.0
    }

    /// Exponent of the time weight `t^(-alpha/beta)`.
    pub fn time_weight_exponent(&self) -> f64 {
        self.alpha / self.beta
    }

    /// Exponent of the sup-in-time weight `t^(1 - 1/(2 beta))`.
    pub fn sup_weight_exponent(&self) -> f64 {
        1.0 - 1.0 / (2.0 * self.beta)
    }
}

/// Space-time Lorentz exponents `(p, q)` tied to `beta` by
/// `beta - 1/2 = beta/p + n/(2q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzParams {
    p: f64,
    q: f64,
    beta: f64,
    dim: usize,
}

pub(crate) fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

impl LorentzParams {
    pub fn new(p: f64, q: f64, beta: f64, dim: usize) -> Result<Self> {
        if !(beta > 0.5 && beta <= 1.0) {
            return Err(FgnsError::param(format!("beta must lie in (1/2, 1], got {beta}")));
        }
        if dim != 2 && dim != 3 {
            return Err(FgnsError::param(format!("dim must be 2 or 3, got {dim}")));
        }
        let n = dim as f64;
        let p_min = 2.0 * beta / (2.0 * beta - 1.0);
        let q_min = n / (2.0 * beta - 1.0);
        if !(p > p_min) {
            return Err(FgnsError::param(format!("p must exceed {p_min}, got {p}")));
        }
        if !(q > q_min) {
            return Err(FgnsError::param(format!("q must exceed {q_min}, got {q}")));
        }
        let defect = beta - 0.5 - beta * recip(p) - n * recip(q) / 2.0;
        if defect.abs() > 1e-12 {
            return Err(FgnsError::param(format!(
                "(p, q) = ({p}, {q}) violates beta - 1/2 = beta/p + n/(2q) by {defect:e}"
            )));
        }
        Ok(Self { p, q, beta, dim })
    }

    /// Solves the scaling relation for `p` given `q`.
    pub fn from_q(q: f64, beta: f64, dim: usize) -> Result<Self> {
        let rest = beta - 0.5 - dim as f64 * recip(q) / 2.0;
        if rest <= 0.0 {
            return Err(FgnsError::param(format!(
                "q = {q} leaves no admissible p for beta = {beta}"
            )));
        }
        Self::new(beta / rest, q, beta, dim)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Exponent `gamma` of the singular kernel `(t - s)^(-gamma)` with
    /// `gamma = (1 + n/q) / (2 beta)`.
    pub fn kernel_exponent(&self) -> f64 {
        (1.0 + self.dim as f64 * recip(self.q)) / (2.0 * self.beta)
    }
}
