use handcam_core::change::{
    change_feature, detect_candidates, non_maximum_suppression, train_change_model, ChangeParams,
};
use handcam_core::classify::TrainConfig;
use handcam_core::synth::{gen_feature_stream, SynthConfig};
use handcam_core::{Camera, FeatureStream, StreamMeta};
use proptest::prelude::*;

fn meta() -> StreamMeta {
    StreamMeta {
        video_id: "p".into(),
        camera: Camera::LeftHand,
        fps: 6.0,
    }
}

fn track() -> impl Strategy<Value = (Vec<(usize, f64)>, usize)> {
    (1usize..60, 1usize..6).prop_flat_map(|(n, r)| {
        (
            proptest::collection::vec(-5.0..5.0f64, n)
                .prop_map(|c| c.into_iter().enumerate().collect::<Vec<_>>()),
            Just(r),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn nms_candidates_are_separated_local_maxima((t, r) in track()) {
        let set = non_maximum_suppression(&t, r);
        let idx = set.indices();
        prop_assert!(!idx.is_empty());
        for w in idx.windows(2) {
            prop_assert!(w[1] > w[0] + r);
        }
        for &(i, c) in set.entries() {
            for &(j, cj) in &t {
                if i.abs_diff(j) <= r {
                    prop_assert!(c >= cj);
                }
            }
        }
    }

    #[test]
    fn nms_ignores_constant_offsets((t, r) in track(), shift in -3.0..3.0f64) {
        let moved: Vec<(usize, f64)> = t.iter().map(|&(i, c)| (i, c + shift)).collect();
        prop_assert_eq!(
            non_maximum_suppression(&t, r).indices(),
            non_maximum_suppression(&moved, r).indices()
        );
    }

    #[test]
    fn change_feature_is_time_symmetric(
        rows in (5usize..30, 1usize..5).prop_flat_map(|(n, d)| {
            proptest::collection::vec(proptest::collection::vec(-100.0..100.0f64, d), n)
        }),
        d in 1usize..3,
    ) {
        let n = rows.len();
        let fwd = FeatureStream::from_rows(meta(), &rows).unwrap();
        let rev_rows: Vec<Vec<f64>> = rows.iter().rev().cloned().collect();
        let rev = FeatureStream::from_rows(meta(), &rev_rows).unwrap();
        for i in d..n - d {
            prop_assert_eq!(
                change_feature(&fwd, i, d).unwrap(),
                change_feature(&rev, n - 1 - i, d).unwrap()
            );
        }
    }
}

#[test]
fn high_snr_streams_have_full_recall() {
    let d = 3;
    let params = ChangeParams::new(d);
    let config = TrainConfig::default();
    for seed in 0..50 {
        let mut cfg = SynthConfig::random(seed, 3, 3, 240, 1.0);
        // one-hot centers 12σ apart
        cfg.centers = (0..3)
            .map(|k| (0..3).map(|j| if j == k { 12.0 } else { 0.0 }).collect())
            .collect();
        let train: Vec<_> = (1..4)
            .map(|v| gen_feature_stream(&cfg, v).unwrap())
            .collect();
        let samples: Vec<_> = train.iter().map(|(s, t)| (s, t)).collect();
        let model = train_change_model(&samples, &params, &config).unwrap();
        let (stream, truth) = gen_feature_stream(&cfg, 0).unwrap();
        let cands = detect_candidates(&stream, &model, &params)
            .unwrap()
            .indices();
        for t in truth.transitions() {
            assert!(
                cands.iter().any(|&c| c.abs_diff(t) <= d),
                "seed {seed}: transition {t} missed by {cands:?}"
            );
        }
    }
}

#[test]
fn short_streams_have_no_candidates() {
    let cfg = SynthConfig::random(1, 2, 2, 100, 5.0);
    let (s, t) = gen_feature_stream(&cfg, 0).unwrap();
    let model =
        train_change_model(&[(&s, &t)], &ChangeParams::new(2), &TrainConfig::default()).unwrap();
    let short = FeatureStream::from_rows(
        meta(),
        &[
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![2.0, 2.0],
            vec![0.0, 0.0],
        ],
    )
    .unwrap();
    assert!(detect_candidates(&short, &model, &ChangeParams::new(2))
        .unwrap()
        .is_empty());
}
