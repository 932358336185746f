//! Surrogate classifiers that imitate the exact solver's stage-1 allocation:
//! an SMO-trained SVM with one-vs-one multiclass voting and a softmax MLP,
//! plus cross-validated grid search and the factorial hyperparameter design.

mod cv;
mod doe;
mod kernel;
mod mlp;
mod svm;

pub use cv::{
    evaluate_models, fit_model, grid_search, kfold_cv, majority_class_share, CvReport,
    EvalSummary, GridSearchResult, ModelConfig, TrainedModel, UserModelReport,
};
pub use doe::{
    full_factorial_design, run_doe, DoeModeData, DoeReport, DoeRun, DoeRunResult, FactorInfluence,
    MainEffect, DOE_KERNEL_LEVELS,
};
pub use kernel::{kernel_eval, KernelKind, KernelSpec};
pub use mlp::{batch_gradients, batch_loss, softmax, train_mlp, Activation, MlpConfig, MlpModel};
pub use svm::{predict_ovo, train_svm_binary, train_svm_ovo, SvmBinary, SvmOvO, SvmTrainConfig};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Whether each user's classifier consumes the whole instance's features or
/// only that user's own block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureScope {
    /// All users' distances and requests (length U*(S+1)).
    FullInstance,
    /// One user's distances and request (length S+1).
    PerUser,
}

/// View of the feature rows appropriate for `user` under the given scope.
pub fn scoped_rows<T: Scalar>(
    rows: &[Vec<T>],
    scope: FeatureScope,
    user: usize,
    servers: usize,
) -> Vec<Vec<T>> {
    match scope {
        FeatureScope::FullInstance => rows.to_vec(),
        FeatureScope::PerUser => {
            let width = servers + 1;
            let start = user * width;
            rows.iter()
                .map(|r| r[start..start + width].to_vec())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_user_scope_slices_the_right_block() {
        let rows = vec![(0..12).map(|v| v as f64).collect::<Vec<_>>()];
        let sliced = scoped_rows(&rows, FeatureScope::PerUser, 1, 3);
        assert_eq!(sliced[0], vec![4.0, 5.0, 6.0, 7.0]);
        let full = scoped_rows(&rows, FeatureScope::FullInstance, 1, 3);
        assert_eq!(full, rows);
    }
}
