use std::path::Path;

use handcam::featfile::{decode_features, encode_features};
use handcam::modelfile::{decode_model, encode_model};
use handcam::ppm::{decode_ppm, encode_ppm};
use handcam::textfmt::{
    format_candidates, format_label_space, format_labels, parse_candidates, parse_label_space,
    parse_labels,
};
use handcam_core::change::CandidateSet;
use handcam_core::classify::{LinearModel, ModelTarget, TrainConfig};
use handcam_core::media::Image;
use handcam_core::{Camera, FeatureStream, LabelSpace, StateSequence, StreamMeta, Task};
use proptest::prelude::*;

fn camera() -> impl Strategy<Value = Camera> {
    prop_oneof![
        Just(Camera::LeftHand),
        Just(Camera::RightHand),
        Just(Camera::Head)
    ]
}

prop_compose! {
    fn stream()(n in 1usize..20, d in 1usize..10, cam in camera(), id in "[a-z0-9_]{0,12}",
                fps in 0.5f32..60.0)
               (data in prop::collection::vec(-1e6f32..1e6, n * d), n in Just(n), d in Just(d),
                cam in Just(cam), id in Just(id), fps in Just(fps)) -> FeatureStream {
        let meta = StreamMeta { video_id: id, camera: cam, fps };
        FeatureStream::new(meta, n, d, data.into_iter().map(f64::from).collect()).unwrap()
    }
}

prop_compose! {
    fn image()(w in 1usize..12, h in 1usize..12)
              (px in prop::collection::vec(any::<u8>(), w * h * 3), w in Just(w), h in Just(h))
              -> Image {
        Image::new(w, h, 3, px).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn feature_files_round_trip_byte_identical(s in stream()) {
        let bytes = encode_features(&s).unwrap();
        let back = decode_features(&bytes).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(encode_features(&back).unwrap(), bytes);
    }

    #[test]
    fn ppm_round_trip_byte_identical(img in image()) {
        let bytes = encode_ppm(&img);
        let back = decode_ppm(&bytes).unwrap();
        prop_assert_eq!(&back, &img);
        prop_assert_eq!(encode_ppm(&back), bytes);
    }

    #[test]
    fn truncated_feature_files_never_decode(s in stream(), cut in 1usize..64) {
        let bytes = encode_features(&s).unwrap();
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(decode_features(&bytes[..keep]).is_err());
    }

    #[test]
    fn models_round_trip(k in 2usize..6, d in 1usize..6, seed in any::<u64>(),
                         vals in prop::collection::vec(-1e3f64..1e3, 42)) {
        let weights: Vec<f64> = (0..k * d).map(|i| vals[i % vals.len()]).collect();
        let biases: Vec<f64> = (0..k).map(|i| vals[(i + 7) % vals.len()]).collect();
        let config = TrainConfig { c: 0.1, epochs: 9, seed };
        let m = LinearModel::new(
            ModelTarget::States(LabelSpace::standard(Task::Custom(k))), d, weights, biases, config,
        ).unwrap();
        let bytes = encode_model(&m).unwrap();
        prop_assert_eq!(&decode_model(&bytes).unwrap(), &m);
    }

    #[test]
    fn label_and_candidate_text_round_trip(states in prop::collection::vec(0usize..4, 1..60),
                                           cands in prop::collection::btree_map(0usize..500, -1e3f64..1e3, 0..20)) {
        let path = Path::new("mem");
        let space = LabelSpace::standard(Task::Custom(4));
        let space = parse_label_space(path, &format_label_space(&space)).unwrap();
        let seq = StateSequence::new(space.clone(), states).unwrap();
        prop_assert_eq!(parse_labels(path, &format_labels(&seq), &space).unwrap(), seq);
        let set = CandidateSet::from_entries(cands.into_iter().collect());
        prop_assert_eq!(parse_candidates(path, &format_candidates(&set)).unwrap(), set);
    }
}
