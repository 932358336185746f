//! Trained model bundle: one classifier per user plus the shared scaler,
//! persisted as a single JSON document.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use edge_placer_core::dataset::{featurize, Scaler};
use edge_placer_core::error::{Error, Result};
use edge_placer_core::learn::{scoped_rows, FeatureScope, TrainedModel};
use edge_placer_core::world::{Instance, SpatialMode};

pub const BUNDLE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelBundle {
    pub version: u32,
    /// "svm" or "mlp"; informational.
    pub family: String,
    pub users: usize,
    pub servers: usize,
    pub feature_scope: FeatureScope,
    pub trained_on_mode: SpatialMode,
    pub scaler: Scaler<f64>,
    pub per_user: Vec<TrainedModel<f64>>,
}

impl ModelBundle {
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        fs::write(path, serde_json::to_string(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let bundle: ModelBundle = serde_json::from_str(&text)?;
        if bundle.version != BUNDLE_SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported bundle schema version {}",
                bundle.version
            )));
        }
        if bundle.per_user.len() != bundle.users {
            return Err(Error::dimension(
                "bundle does not hold one classifier per user",
            ));
        }
        Ok(bundle)
    }

    /// Per-user server choices for one instance.
    pub fn predict_instance(&self, instance: &Instance<f64>) -> Result<Vec<u32>> {
        if instance.num_users() != self.users || instance.num_servers() != self.servers {
            return Err(Error::dimension(format!(
                "bundle is for {}x{}, instance is {}x{}",
                self.users,
                self.servers,
                instance.num_users(),
                instance.num_servers()
            )));
        }
        let features = featurize(instance);
        Ok(self.predict_features(&features))
    }

    /// Per-user server choices for one raw (unscaled) feature row.
    pub fn predict_features(&self, features: &[f64]) -> Vec<u32> {
        let scaled = self.scaler.transform_row(features);
        let rows = vec![scaled];
        self.per_user
            .iter()
            .enumerate()
            .map(|(user, model)| {
                let view = scoped_rows(&rows, self.feature_scope, user, self.servers);
                model.predict(&view[0])
            })
            .collect()
    }
}
