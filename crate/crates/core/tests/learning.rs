use errinject::kinematics::{joint_difference, DhTable, JointConfig, DOF};
use errinject::learning::{
    build_dataset, hyperparameter_search, mlp_train, Encoding, ErrorDataset, MlpModel, Role, SearchGrid, TrainConfig,
};
use errinject::phystwin::{generate_trajectory_with, run_collection, StepRecord, TrajectoryParams, TwinParams};

fn records() -> Vec<StepRecord> {
    let dh = DhTable::default();
    let traj = generate_trajectory_with(
        &dh,
        &TrajectoryParams {
            n_goals: 60,
            ..TrajectoryParams::training()
        },
        2,
    )
    .unwrap();
    run_collection(&TwinParams::default().build().unwrap(), &traj).unwrap().records
}

fn quick() -> TrainConfig {
    TrainConfig {
        epochs: 15,
        ..TrainConfig::default()
    }
}

#[test]
fn dataset_targets_are_layer_differences() {
    let dh = DhTable::default();
    let recs = records();
    let nn1 = build_dataset(&recs, Role::Controller, Encoding::OnlyCurrent, &dh).unwrap();
    let nn2 = build_dataset(&recs, Role::Mechanism, Encoding::CurrentPreviousEncoded, &dh).unwrap();
    assert_eq!(nn1.len(), recs.len());
    assert_eq!(nn2.len(), recs.len() - 1);
    let ms = joint_difference(&dh, &recs[3].measured_q, &recs[3].setpoint_q);
    for i in 0..DOF {
        assert_eq!(nn1.targets[3][i], ms[i]);
        assert_eq!(nn1.inputs[3][i], recs[3].setpoint_q[i]);
        let am = joint_difference(&dh, &recs[4].actual_q, &recs[4].measured_q);
        assert_eq!(nn2.targets[3][i], am[i]);
        assert_eq!(nn2.inputs[3][i], recs[4].measured_q[i]);
        let dir = nn2.inputs[3][DOF + i];
        assert!(dir == 1.0 || dir == -1.0);
    }
}

#[test]
fn single_cell_search_matches_direct_training() {
    let dh = DhTable::default();
    let recs = records();
    let cfg = quick();
    let grid = SearchGrid::single(32, 0.0064, &[16, 32], Encoding::CurrentPrevious);
    let results = hyperparameter_search(&recs, Role::Mechanism, &dh, &grid, &cfg, 1).unwrap();
    let ds = build_dataset(&recs, Role::Mechanism, Encoding::CurrentPrevious, &dh).unwrap();
    let (_, direct) = mlp_train(&ds, &[16, 32], &cfg).unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0].outcome.as_ref().unwrap(), &direct);
}

#[test]
fn search_ignores_worker_count() {
    let dh = DhTable::default();
    let recs = records();
    let grid = SearchGrid {
        batch_sizes: vec![32],
        learning_rates: vec![0.0064, 0.002],
        architectures: vec![vec![16]],
        encodings: Encoding::ALL.to_vec(),
    };
    let one = hyperparameter_search(&recs, Role::Controller, &dh, &grid, &quick(), 1).unwrap();
    let four = hyperparameter_search(&recs, Role::Controller, &dh, &grid, &quick(), 4).unwrap();
    assert_eq!(one.len(), 6);
    for (a, b) in one.iter().zip(&four) {
        assert_eq!(a.cell, b.cell);
        assert_eq!(a.rank, b.rank);
        assert_eq!(a.outcome, b.outcome);
    }
    let mut ranks: Vec<usize> = one.iter().map(|r| r.rank).collect();
    ranks.sort();
    assert_eq!(ranks, (1..=6).collect::<Vec<_>>());
}

#[test]
fn failed_cell_is_recorded_and_ranked_last() {
    let dh = DhTable::default();
    let recs = records();
    let grid = SearchGrid {
        batch_sizes: vec![32, 1_000_000],
        learning_rates: vec![0.0064],
        architectures: vec![vec![8]],
        encodings: vec![Encoding::OnlyCurrent],
    };
    let results = hyperparameter_search(&recs, Role::Controller, &dh, &grid, &quick(), 2).unwrap();
    let failed = results.iter().find(|r| r.cell.batch_size == 1_000_000).unwrap();
    assert!(failed.outcome.is_err());
    assert_eq!(failed.rank, 2);
}

#[test]
fn training_is_deterministic_and_reloadable() {
    let dh = DhTable::default();
    let ds = build_dataset(&records(), Role::Controller, Encoding::CurrentPreviousEncoded, &dh).unwrap();
    let (a, ha) = mlp_train(&ds, &[16, 32], &quick()).unwrap();
    let (b, hb) = mlp_train(&ds, &[16, 32], &quick()).unwrap();
    assert_eq!(a, b);
    assert_eq!(ha, hb);
    let json = errinject::io::to_json(&a);
    let back: MlpModel = serde_json::from_str(&json).unwrap();
    assert_eq!(back, a);
}

#[test]
fn learns_a_smooth_joint_offset() {
    let inputs: Vec<Vec<f64>> = (0..600)
        .map(|i| {
            let t = i as f64 * 0.01;
            vec![t.sin(), (1.3 * t).cos(), 0.1 + 0.05 * t.sin(), 0.4 * t.cos(), -0.2 * t.sin(), 0.3]
        })
        .collect();
    let targets: Vec<[f64; DOF]> = inputs
        .iter()
        .map(|x| std::array::from_fn(|i| 1e-3 * (x[i] + 0.5 * x[(i + 1) % DOF])))
        .collect();
    let ds = ErrorDataset {
        inputs,
        targets,
        encoding: Encoding::OnlyCurrent,
        role: Role::Controller,
    };
    let cfg = TrainConfig {
        epochs: 200,
        ..TrainConfig::default()
    };
    let (m, hist) = mlp_train(&ds, &[16, 32], &cfg).unwrap();
    assert!(hist.best_val_mse < 1e-3, "{}", hist.best_val_mse);
    let x = JointConfig([0.5, 0.2, 0.12, 0.1, -0.1, 0.3]);
    let y = m.predict(x.as_array()).unwrap();
    for i in 0..DOF {
        let expected = 1e-3 * (x[i] + 0.5 * x[(i + 1) % DOF]);
        assert!((y[i] - expected).abs() < 1e-4, "joint {i}: {} vs {expected}", y[i]);
    }
}
