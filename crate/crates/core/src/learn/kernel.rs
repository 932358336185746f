//! Kernel functions for the SVM.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Poly,
    Rbf,
    Sigmoid,
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // report files mirror the uppercase spelling of the result tables
        match self {
            KernelKind::Linear => write!(f, "LINEAR"),
            KernelKind::Poly => write!(f, "POLY"),
            KernelKind::Rbf => write!(f, "RBF"),
            KernelKind::Sigmoid => write!(f, "SIGMOID"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec<T> {
    pub kind: KernelKind,
    /// Scale parameter; ignored by the linear kernel.
    pub gamma: T,
    /// Polynomial degree (poly only).
    pub degree: u32,
    /// Additive constant (poly and sigmoid).
    pub coef0: T,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn linear() -> Self {
        KernelSpec {
            kind: KernelKind::Linear,
            gamma: T::one(),
            degree: 3,
            coef0: T::zero(),
        }
    }

    pub fn poly(gamma: T, degree: u32, coef0: T) -> Self {
        KernelSpec {
            kind: KernelKind::Poly,
            gamma,
            degree,
            coef0,
        }
    }

    pub fn rbf(gamma: T) -> Self {
        KernelSpec {
            kind: KernelKind::Rbf,
            gamma,
            degree: 3,
            coef0: T::zero(),
        }
    }

    pub fn sigmoid(gamma: T, coef0: T) -> Self {
        KernelSpec {
            kind: KernelKind::Sigmoid,
            gamma,
            degree: 3,
            coef0,
        }
    }

    pub fn with_kind(kind: KernelKind, gamma: T) -> Self {
        match kind {
            KernelKind::Linear => KernelSpec::linear(),
            KernelKind::Poly => KernelSpec::poly(gamma, 3, T::zero()),
            KernelKind::Rbf => KernelSpec::rbf(gamma),
            KernelKind::Sigmoid => KernelSpec::sigmoid(gamma, T::zero()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != KernelKind::Linear && self.gamma <= T::zero() {
            return Err(Error::config("kernel gamma must be positive"));
        }
        if self.kind == KernelKind::Poly && self.degree == 0 {
            return Err(Error::config("poly kernel degree must be at least 1"));
        }
        Ok(())
    }
}

fn dot<T: Scalar>(x: &[T], z: &[T]) -> T {
    let mut acc = T::zero();
    for (a, b) in x.iter().zip(z) {
        acc = acc + *a * *b;
    }
    acc
}

/// Evaluate the kernel on two equal-length vectors.
pub fn kernel_eval<T: Scalar>(spec: &KernelSpec<T>, x: &[T], z: &[T]) -> Result<T> {
    if x.len() != z.len() {
        return Err(Error::dimension(format!(
            "kernel arguments of length {} and {}",
            x.len(),
            z.len()
        )));
    }
    Ok(kernel_eval_unchecked(spec, x, z))
}

pub(crate) fn kernel_eval_unchecked<T: Scalar>(spec: &KernelSpec<T>, x: &[T], z: &[T]) -> T {
    match spec.kind {
        KernelKind::Linear => dot(x, z),
        KernelKind::Poly => (spec.gamma * dot(x, z) + spec.coef0).powi(spec.degree as i32),
        KernelKind::Rbf => {
            let mut sq = T::zero();
            for (a, b) in x.iter().zip(z) {
                let d = *a - *b;
                sq = sq + d * d;
            }
            (-spec.gamma * sq).exp()
        }
        KernelKind::Sigmoid => (spec.gamma * dot(x, z) + spec.coef0).tanh(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        let x = vec![1.0f64, 0.0];
        assert_eq!(kernel_eval(&KernelSpec::linear(), &x, &x).unwrap(), 1.0);
        assert_eq!(kernel_eval(&KernelSpec::rbf(0.7), &x, &x).unwrap(), 1.0);
        // x . z = 2 with degree 3, gamma 1, coef0 0
        let a = vec![2.0f64, 0.0];
        let b = vec![1.0f64, 5.0];
        let spec = KernelSpec::poly(1.0, 3, 0.0);
        assert_eq!(kernel_eval(&spec, &a, &b).unwrap(), 8.0);
    }

    #[test]
    fn sigmoid_is_bounded() {
        let spec = KernelSpec::sigmoid(0.5f64, 1.0);
        let v = kernel_eval(&spec, &[3.0, -1.0], &[2.0, 4.0]).unwrap();
        assert!((-1.0..=1.0).contains(&v));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let spec = KernelSpec::linear();
        assert!(kernel_eval(&spec, &[1.0f64], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(KernelSpec::rbf(0.0f64).validate().is_err());
        assert!(KernelSpec::poly(0.1f64, 0, 0.0).validate().is_err());
        assert!(KernelSpec::<f64>::linear().validate().is_ok());
    }
}
