use edge_placer_core::dataset::{split, Dataset};
use edge_placer_core::learn::{
    fit_model, majority_class_share, scoped_rows, FeatureScope, KernelSpec, ModelConfig,
    SvmTrainConfig,
};
use edge_placer_core::dataset::fit_scaler;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let dir = std::path::Path::new(&args[1]);
    let name = &args[2];
    let dataset = Dataset::<f64>::load(dir, name).unwrap();
    let users = dataset.meta.users;
    let servers = dataset.meta.servers;
    let parts = split(dataset.records.len(), 0.8, 7).unwrap();
    let train_x: Vec<Vec<f64>> = parts.train.iter().map(|&i| dataset.records[i].features.clone()).collect();
    let test_x: Vec<Vec<f64>> = parts.test.iter().map(|&i| dataset.records[i].features.clone()).collect();

    for c in [1.0, 10.0, 100.0] {
        let config = ModelConfig::Svm(SvmTrainConfig::new(c, KernelSpec::linear()));
        for scope in [FeatureScope::FullInstance, FeatureScope::PerUser] {
            let mut total = 0.0;
            let mut baseline = 0.0;
            for u in 0..users {
                let tr_labels: Vec<u32> = parts.train.iter().map(|&i| dataset.records[i].labels[u]).collect();
                let te_labels: Vec<u32> = parts.test.iter().map(|&i| dataset.records[i].labels[u]).collect();
                let tr = scoped_rows(&train_x, scope, u, servers);
                let te = scoped_rows(&test_x, scope, u, servers);
                let scaler = fit_scaler(&tr).unwrap();
                let model = fit_model(&scaler.transform(&tr), &tr_labels, &config).unwrap();
                let correct = te.iter().zip(&te_labels)
                    .filter(|(row, &l)| model.predict(&scaler.transform_row(row)) == l)
                    .count();
                total += correct as f64 / te.len() as f64;
                baseline += majority_class_share(&te_labels);
            }
            println!(
                "C={c:<5} scope={scope:?}: avg accuracy {:.1}% (majority baseline {:.1}%)",
                100.0 * total / users as f64,
                100.0 * baseline / users as f64
            );
        }
    }
}
