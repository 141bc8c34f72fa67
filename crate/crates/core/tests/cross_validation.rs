use handcam_core::classify::{cross_validate, CrossValPlan, LabeledVideo};
use handcam_core::synth::{gen_dataset, SynthConfig};
use handcam_core::Error;

/// Three states whose transitions blend linearly over 6 frames on each side.
fn ramped_videos(seed: u64, count: usize) -> Vec<LabeledVideo> {
    let mut cfg = SynthConfig::random(seed, 3, 6, 200, 4.0);
    cfg.ramp_half_width = 6;
    gen_dataset(&cfg, count)
        .unwrap()
        .into_iter()
        .map(|(stream, truth)| LabeledVideo { stream, truth })
        .collect()
}

#[test]
fn single_cell_grid_is_chosen() {
    let plan = CrossValPlan {
        c_grid: vec![0.1],
        d_grid: vec![4],
        lambda_grid: vec![2.0],
        ..CrossValPlan::default()
    };
    let out = cross_validate(&ramped_videos(1, 5), &plan).unwrap();
    assert_eq!(out.table.len(), 1);
    assert_eq!(
        (out.chosen.c, out.chosen.d, out.chosen.lambda),
        (0.1, 4, 2.0)
    );
    assert!(out.table[0].score > 0.5);
}

#[test]
fn too_few_videos_is_an_error() {
    let err = cross_validate(&ramped_videos(1, 4), &CrossValPlan::default()).unwrap_err();
    assert_eq!(
        err,
        Error::NotEnoughVideos {
            needed: 5,
            found: 4
        }
    );
    assert!(err.to_string().contains("hyperparameters"));
}

#[test]
fn table_covers_the_grid_in_order() {
    let plan = CrossValPlan {
        c_grid: vec![1.0, 0.1],
        d_grid: vec![6, 3],
        lambda_grid: vec![1.0],
        epochs: 50,
        ..CrossValPlan::default()
    };
    let out = cross_validate(&ramped_videos(2, 5), &plan).unwrap();
    let cells: Vec<(f64, usize)> = out.table.iter().map(|c| (c.params.c, c.params.d)).collect();
    assert_eq!(cells, vec![(0.1, 3), (0.1, 6), (1.0, 3), (1.0, 6)]);
    assert!(out.table.iter().all(|c| (0.0..=1.0).contains(&c.score)));
}

#[test]
fn planted_half_width_is_selected() {
    let mut hits = 0;
    for seed in 0..20 {
        let plan = CrossValPlan {
            seed,
            ..CrossValPlan::default()
        };
        let out = cross_validate(&ramped_videos(seed, 10), &plan).unwrap();
        if out.chosen.d == 6 {
            hits += 1;
        }
    }
    assert!(hits >= 16, "d = 6 chosen for {hits} of 20 seeds");
}
