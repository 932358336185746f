use tempfile::tempdir;

use super::*;
use crate::world::{Server, User};

fn tiny_spec(mode: SpatialMode, records: usize) -> DatasetSpec<f64> {
    let mut spec = DatasetSpec::new(mode, records, 4, 2, 3);
    spec.solver = SolveOptions::default();
    spec
}

#[test]
fn featurize_layout_matches_contract() {
    let spec = SampleSpec::<f64>::new(SpatialMode::Normal, 1, 1, 1);
    let mut instance = sample_instance(&spec, 1).unwrap();
    instance.users = vec![User {
        id: 0,
        pos: Position::new(0, 0),
        request: 5,
    }];
    instance.servers[0].pos = Position::new(0, 1);
    assert_eq!(featurize(&instance), vec![1.0, 5.0]);

    let spec = SampleSpec::<f64>::new(SpatialMode::Normal, 2, 2, 1);
    let instance = sample_instance(&spec, 2).unwrap();
    assert_eq!(featurize(&instance).len(), 6);
}

#[test]
fn features_ignore_scenarios() {
    let spec = SampleSpec::<f64>::new(SpatialMode::Normal, 4, 2, 3);
    let a = sample_instance(&spec, 3).unwrap();
    let mut b = a.clone();
    for scenario in &mut b.scenarios {
        for mv in &mut scenario.moves {
            mv.dx = 0;
            mv.dy = 0;
        }
    }
    assert_eq!(featurize(&a), featurize(&b));
}

#[test]
fn permuting_servers_permutes_feature_blocks() {
    let spec = SampleSpec::<f64>::new(SpatialMode::Normal, 3, 3, 1);
    let a = sample_instance(&spec, 9).unwrap();
    let mut b = a.clone();
    b.servers = vec![
        Server { id: 0, ..a.servers[2] },
        Server { id: 1, ..a.servers[0] },
        Server { id: 2, ..a.servers[1] },
    ];
    let fa = featurize(&a);
    let fb = featurize(&b);
    let s = 3usize;
    for i in 0..3 {
        let base = i * (s + 1);
        // server k of b is server perm(k) of a
        assert_eq!(fb[base], fa[base + 2]);
        assert_eq!(fb[base + 1], fa[base]);
        assert_eq!(fb[base + 2], fa[base + 1]);
        assert_eq!(fb[base + 3], fa[base + 3]); // request untouched
    }
}

#[test]
fn generation_is_reproducible_and_freezes_servers() {
    let spec = tiny_spec(SpatialMode::Normal, 6);
    let a = generate_dataset(&spec, 42).unwrap();
    let b = generate_dataset(&spec, 42).unwrap();
    assert_eq!(a.meta, b.meta);
    assert_eq!(a.records, b.records);
    // every record rebuilds to an instance with the frozen layout
    for (i, record) in a.records.iter().enumerate() {
        let instance = a.meta.rebuild_instance(i, record).unwrap();
        let layout: Vec<Position> = instance.servers.iter().map(|s| s.pos).collect();
        assert_eq!(layout, a.meta.server_layout);
    }
}

#[test]
fn mixed_datasets_concatenate_normal_and_special_halves() {
    let mut spec = tiny_spec(SpatialMode::Mixed, 8);
    spec.cluster = ClusterSpec {
        center: Some(Position::new(10, 10)),
        side: 6,
    };
    let dataset = generate_dataset(&spec, 5).unwrap();
    assert_eq!(dataset.meta.mode_of(0), SpatialMode::Normal);
    assert_eq!(dataset.meta.mode_of(3), SpatialMode::Normal);
    assert_eq!(dataset.meta.mode_of(4), SpatialMode::Special);
    assert_eq!(dataset.meta.mode_of(7), SpatialMode::Special);
    // special-half users really sit inside the cluster
    for i in 4..8 {
        let instance = dataset.meta.rebuild_instance(i, &dataset.records[i]).unwrap();
        for user in &instance.users {
            assert!((7..=12).contains(&user.pos.x));
            assert!((7..=12).contains(&user.pos.y));
        }
    }

    let odd = DatasetSpec::<f64> {
        records: 7,
        ..tiny_spec(SpatialMode::Mixed, 7)
    };
    assert!(matches!(generate_dataset(&odd, 5), Err(Error::Config(_))));
}

#[test]
fn labels_replay_feasibly() {
    let spec = tiny_spec(SpatialMode::Normal, 6);
    let dataset = generate_dataset(&spec, 17).unwrap();
    for (i, record) in dataset.records.iter().enumerate() {
        let instance = dataset.meta.rebuild_instance(i, record).unwrap();
        assert!(labels_feasible(&instance, &record.labels).unwrap());
        assert_eq!(record.gap, 0.0);
        assert_eq!(featurize(&instance), record.features);
    }
}

#[test]
fn dataset_files_round_trip_byte_identically() {
    let dir = tempdir().unwrap();
    let spec = tiny_spec(SpatialMode::Normal, 5);
    let dataset = generate_dataset(&spec, 23).unwrap();
    dataset.save(dir.path(), "d").unwrap();
    let loaded = Dataset::<f64>::load(dir.path(), "d").unwrap();
    assert_eq!(dataset, loaded);

    loaded.save(dir.path(), "d2").unwrap();
    let a = fs::read(dir.path().join("d.jsonl")).unwrap();
    let b = fs::read(dir.path().join("d2.jsonl")).unwrap();
    assert_eq!(a, b);
    let a = fs::read(dir.path().join("d.meta.json")).unwrap();
    let b = fs::read(dir.path().join("d2.meta.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn csv_export_has_one_row_per_record() {
    let dir = tempdir().unwrap();
    let spec = tiny_spec(SpatialMode::Normal, 4);
    let dataset = generate_dataset(&spec, 29).unwrap();
    let path = dir.path().join("d.csv");
    dataset.write_csv(&path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 5); // header + 4 records
    assert!(text.starts_with("f0,"));
    assert!(text.lines().next().unwrap().ends_with("y3"));
}

#[test]
fn split_examples() {
    let s = split(10, 0.8, 3).unwrap();
    assert_eq!(s.train.len(), 8);
    assert_eq!(s.test.len(), 2);
    assert_eq!(s, split(10, 0.8, 3).unwrap());

    let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..10).collect::<Vec<_>>());

    assert!(split(10, 0.0, 1).is_err());
    assert!(split(1, 0.5, 1).is_err());
}

#[test]
fn scaler_standardizes_training_columns() {
    let rows = vec![vec![0.0, 7.0], vec![2.0, 7.0]];
    let scaler = fit_scaler(&rows).unwrap();
    let scaled = scaler.transform(&rows);
    // two-point column {0, 2} maps to {-1, +1}
    assert_eq!(scaled[0][0], -1.0);
    assert_eq!(scaled[1][0], 1.0);
    // constant column collapses to zero via the epsilon floor
    assert_eq!(scaled[0][1], 0.0);
    assert_eq!(scaled[1][1], 0.0);

    assert!(fit_scaler::<f64>(&[vec![1.0]]).is_err());
}

#[test]
fn scaler_means_and_variances_are_standard() {
    let spec = tiny_spec(SpatialMode::Normal, 8);
    let dataset = generate_dataset(&spec, 31).unwrap();
    let rows = dataset.feature_rows();
    let scaler = fit_scaler(&rows).unwrap();
    let scaled = scaler.transform(&rows);
    let n = scaled.len() as f64;
    for k in 0..rows[0].len() {
        let mean: f64 = scaled.iter().map(|r| r[k]).sum::<f64>() / n;
        assert!(mean.abs() < 1e-9, "column {k} mean {mean}");
        let var: f64 = scaled.iter().map(|r| r[k] * r[k]).sum::<f64>() / n;
        let raw_var: f64 = rows.iter().map(|r| {
            let d = r[k] - rows.iter().map(|q| q[k]).sum::<f64>() / n;
            d * d
        }).sum::<f64>() / n;
        if raw_var > 1e-9 {
            assert!((var - 1.0).abs() < 1e-9, "column {k} variance {var}");
        }
    }
}

#[test]
fn derived_seeds_spread() {
    let a = derive_seed(1, 0);
    let b = derive_seed(1, 1);
    let c = derive_seed(2, 0);
    assert_ne!(a, b);
    assert_ne!(a, c);
    assert_eq!(a, derive_seed(1, 0));
}
