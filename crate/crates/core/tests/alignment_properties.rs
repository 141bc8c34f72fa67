use handcam_core::alignment::{
    align_videos, compute_pixel_stats, register_video, select_reference, stable_mask,
    AlignmentParams, DEFAULT_SCALES,
};
use handcam_core::media::Image;
use handcam_core::synth::{gen_video_set, synthetic_hand, VideoPlan, VideoSetConfig};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn series_frames(values: &[u8]) -> Vec<Image> {
    values
        .iter()
        .map(|&v| Image::new(1, 1, 1, vec![v]).unwrap())
        .collect()
}

fn l1(values: &[u8], m: f64) -> f64 {
    values.iter().map(|&v| (v as f64 - m).abs()).sum()
}

#[test]
fn median_minimizes_absolute_deviation() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10_000 {
        let len = rng.random_range(1..=16);
        let values: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        let stats = compute_pixel_stats(&series_frames(&values)).unwrap();
        let mu = stats.median()[0];
        let best = l1(&values, mu);
        for m in 0..=255u32 {
            assert!(best <= l1(&values, m as f64) + 1e-9);
        }
        assert!((stats.diversity()[0] - best / len as f64).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn statistics_ignore_frame_order(values in proptest::collection::vec(any::<u8>(), 1..20), seed: u64) {
        let mut shuffled = values.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(
            compute_pixel_stats(&series_frames(&values)).unwrap(),
            compute_pixel_stats(&series_frames(&shuffled)).unwrap()
        );
    }

    #[test]
    fn constant_videos_have_zero_diversity(px in proptest::collection::vec(any::<u8>(), 12), t in 1usize..8) {
        let frame = Image::new(2, 2, 3, px).unwrap();
        let stats = compute_pixel_stats(&vec![frame; t]).unwrap();
        prop_assert!(stats.diversity().iter().all(|&b| b == 0.0));
    }
}

const CANVAS: usize = 128;
const ORIGIN: usize = 44;

fn video_config(seed: u64) -> VideoSetConfig {
    VideoSetConfig {
        seed,
        width: CANVAS,
        height: CANVAS,
        frames: 9,
        origin: (ORIGIN, ORIGIN),
        noise: 120,
        jitter: 1,
    }
}

#[test]
fn planted_offsets_and_scales_are_recovered() {
    let params = AlignmentParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..12u64 {
        let hand = synthetic_hand(trial, 36, 36).unwrap();
        let scale = DEFAULT_SCALES[rng.random_range(0..DEFAULT_SCALES.len())];
        let (dx, dy) = (rng.random_range(-40..=40), rng.random_range(-40..=40));
        let plans = [
            VideoPlan {
                video_id: "ref".into(),
                dx: 0,
                dy: 0,
                scale: 1.0,
            },
            VideoPlan {
                video_id: "target".into(),
                dx,
                dy,
                scale,
            },
        ];
        let vids = gen_video_set(&hand, &video_config(trial), &plans).unwrap();
        let stats = compute_pixel_stats(&vids[0].frames).unwrap();
        let mask = stable_mask(&stats, &params).unwrap();
        let reference = select_reference(&[("ref", &stats, &mask)]).unwrap();
        let target = compute_pixel_stats(&vids[1].frames).unwrap().median_image();
        let entry = register_video("target", &target, &reference, &params).unwrap();

        let expect_x = (ORIGIN as i64 + dx) as f64 * scale - ORIGIN as f64;
        let expect_y = (ORIGIN as i64 + dy) as f64 * scale - ORIGIN as f64;
        assert_eq!(entry.scale, scale, "trial {trial}");
        assert!(
            (entry.dx as f64 - expect_x).abs() <= 2.0,
            "trial {trial}: dx {} vs {expect_x}",
            entry.dx
        );
        assert!(
            (entry.dy as f64 - expect_y).abs() <= 2.0,
            "trial {trial}: dy {} vs {expect_y}",
            entry.dy
        );
    }
}

#[test]
fn aligned_video_puts_the_hand_where_the_reference_has_it() {
    let hand = synthetic_hand(3, 36, 36).unwrap();
    let plans = [
        VideoPlan {
            video_id: "a".into(),
            dx: 0,
            dy: 0,
            scale: 1.0,
        },
        VideoPlan {
            video_id: "b".into(),
            dx: 12,
            dy: -7,
            scale: 0.9,
        },
    ];
    let vids = gen_video_set(&hand, &video_config(5), &plans).unwrap();
    let input: Vec<(&str, &[Image])> = vids
        .iter()
        .map(|v| (v.plan.video_id.as_str(), v.frames.as_slice()))
        .collect();
    let result = align_videos(&input, &AlignmentParams::default()).unwrap();
    assert_eq!(result.reference_video_id, "a");
    let b = &result.entries[1];
    assert_eq!(b.scale, 0.9);
    let expect_x = (ORIGIN + 12) as f64 * 0.9 - ORIGIN as f64;
    let expect_y = (ORIGIN - 7) as f64 * 0.9 - ORIGIN as f64;
    assert!((b.dx as f64 - expect_x).abs() <= 2.0);
    assert!((b.dy as f64 - expect_y).abs() <= 2.0);
    assert_eq!(result.entries[0].dx, 0);
}
