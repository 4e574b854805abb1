//! Property tests spanning the library's invariants.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sav_core::ambisonics::{encode_plane_wave, foa_to_stereo, rotate_foa_yaw};
use sav_core::dsp::{apply_gain_db, WaveBuffer};
use sav_core::geometry::{normalize_azimuth, pixel_to_direction, project_direction, CameraSpec, Direction, ViewAngle};
use sav_core::metrics::{
    pool_align, seld_masked_mse, spatial_av_align, AlignConfig, BoundingBox, DetectionTrack,
    LabelTrack, SeldTrack,
};
use sav_core::pipeline::{curate, CurationConfig, ProjectedLabel, TargetClass, Verdict};

proptest! {
    #[test]
    fn azimuth_always_normalizes_into_range(a in -100_000.0f64..100_000.0) {
        let n = normalize_azimuth(a);
        prop_assert!((-180.0..180.0).contains(&n));
        // The normalized angle differs from the input by a whole number
        // of turns.
        let turns = (a - n) / 360.0;
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn gain_roundtrip_is_identity(gain in -60.0f64..60.0, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let buf = WaveBuffer::mono(samples.clone(), 16000);
        let back = apply_gain_db(&apply_gain_db(&buf, gain), -gain);
        for (a, b) in back.channels()[0].iter().zip(&samples) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rotations_compose_additively(az in -180.0f64..180.0, a in -360.0f64..360.0, b in -360.0f64..360.0) {
        let signal: Vec<f64> = (0..32).map(|i| ((i * 7 % 13) as f64 - 6.0) / 8.0).collect();
        let foa = encode_plane_wave(&signal, Direction::new(az, 0.0), 24000);
        let two_step = rotate_foa_yaw(&rotate_foa_yaw(&foa, a), b);
        let one_step = rotate_foa_yaw(&foa, a + b);
        for c in 0..4 {
            for (x, y) in two_step.channels()[c].iter().zip(&one_step.channels()[c]) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn view_aligned_sources_collapse_to_center(az in -180.0f64..180.0) {
        let signal: Vec<f64> = (0..128).map(|i| (i as f64 * 0.37).sin() * 0.3).collect();
        let foa = encode_plane_wave(&signal, Direction::new(az, 0.0), 24000);
        let st = foa_to_stereo(&rotate_foa_yaw(&foa, az));
        for (l, r) in st.left.iter().zip(&st.right) {
            prop_assert!((l - r).abs() < 1e-9);
        }
    }

    #[test]
    fn onscreen_projections_roundtrip(rel in -49.9f64..49.9, el in -30.0f64..30.0, yaw in -360.0f64..360.0) {
        let cam = CameraSpec::default();
        let dir = Direction::new(yaw + rel, el);
        if let Some(p) = project_direction(dir, &cam, ViewAngle::new(yaw)) {
            let back = pixel_to_direction(p.x, p.y, &cam, ViewAngle::new(yaw));
            let daz = normalize_azimuth(back.azimuth_deg() - dir.azimuth_deg()).abs();
            prop_assert!(daz < 1e-6);
            prop_assert!((back.elevation_deg() - dir.elevation_deg()).abs() < 1e-6);
        }
    }
}

fn keepable_labels(frames: &[u32]) -> Vec<ProjectedLabel> {
    frames
        .iter()
        .map(|&f| ProjectedLabel {
            frame: f,
            class_id: 0,
            target: Some(TargetClass::Speech),
            source_id: 1,
            onscreen: true,
            x: Some(100.0),
            y: Some(70.0),
            norm_x: Some(100.0 / 256.0),
        })
        .collect()
}

#[test]
fn adding_active_frames_never_flips_keep_to_reject() {
    let cfg = CurationConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..300 {
        let mut frames: Vec<u32> = (0..50).filter(|_| rng.gen_bool(0.85)).collect();
        if curate(&keepable_labels(&frames), &cfg) != Verdict::Keep {
            continue;
        }
        checked += 1;
        let missing: Vec<u32> = (0..50).filter(|f| !frames.contains(f)).collect();
        for f in missing {
            frames.push(f);
            assert_eq!(
                curate(&keepable_labels(&frames), &cfg),
                Verdict::Keep,
                "adding frame {f} flipped the verdict"
            );
        }
    }
    assert!(checked > 50, "generator produced too few kept cases");
}

fn random_scene(rng: &mut ChaCha8Rng) -> (DetectionTrack, SeldTrack) {
    let mut det = DetectionTrack::new(20, 256.0, 256.0);
    for f in 0..20 {
        for _ in 0..rng.gen_range(0..3) {
            let x1 = rng.gen_range(0.0..220.0);
            let w = rng.gen_range(5.0..36.0);
            det.push_box(
                f,
                BoundingBox {
                    class: if rng.gen_bool(0.8) { "person" } else { "chair" }.into(),
                    x1,
                    y1: 40.0,
                    x2: x1 + w,
                    y2: 200.0,
                    score: rng.gen_range(0.3..1.0),
                },
            )
            .unwrap();
        }
    }
    let mut seld = SeldTrack::new(50);
    for k in 0..50 {
        if rng.gen_bool(0.4) {
            let class = if rng.gen_bool(0.5) { "speech" } else { "instrument" };
            seld.set(class, k, rng.gen_range(0.0..1.0), Some(rng.gen_range(0.0..1.0)))
                .unwrap();
        }
    }
    (det, seld)
}

#[test]
fn margin_and_adjacency_grow_scores_monotonically() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let (det, seld) = random_scene(&mut rng);
        let base = AlignConfig::default();
        let narrow = AlignConfig {
            margin: base.margin / 2.0,
            ..base.clone()
        };
        let tight = AlignConfig {
            adjacency: 0,
            ..base.clone()
        };
        let rb = spatial_av_align(&det, &seld, &base);
        let rn = spatial_av_align(&det, &seld, &narrow);
        let rt = spatial_av_align(&det, &seld, &tight);
        assert!(rn.true_positives <= rb.true_positives);
        assert!(rt.true_positives <= rb.true_positives);
        assert_eq!(
            rn.true_positives + rn.false_negatives,
            rb.true_positives + rb.false_negatives
        );
    }
}

#[test]
fn pooling_matches_a_concatenated_timeline() {
    // Active frames stay within [3, 44] so the adjacency window never
    // clamps at a clip edge; under that condition per-clip evaluation
    // and one long concatenated track agree exactly.
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let cfg = AlignConfig::default();
    for _ in 0..100 {
        let n_clips = rng.gen_range(2..5);
        let mut per_clip = Vec::new();
        let mut long_det = DetectionTrack::new(20 * n_clips, 256.0, 256.0);
        let mut long_seld = SeldTrack::new(50 * n_clips);
        for clip in 0..n_clips {
            let mut det = DetectionTrack::new(20, 256.0, 256.0);
            let mut seld = SeldTrack::new(50);
            for f in 0..20 {
                if rng.gen_bool(0.5) {
                    let x1 = rng.gen_range(0.0..200.0);
                    let b = BoundingBox {
                        class: "person".into(),
                        x1,
                        y1: 10.0,
                        x2: x1 + rng.gen_range(10.0..50.0),
                        y2: 240.0,
                        score: 1.0,
                    };
                    det.push_box(f, b.clone()).unwrap();
                    long_det.push_box(clip * 20 + f, b).unwrap();
                }
            }
            for k in 3..=44 {
                if rng.gen_bool(0.3) {
                    let (a, x) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
                    seld.set("speech", k, a, Some(x)).unwrap();
                    long_seld.set("speech", clip * 50 + k, a, Some(x)).unwrap();
                }
            }
            per_clip.push(spatial_av_align(&det, &seld, &cfg));
        }
        let pooled = pool_align(&per_clip);
        let whole = spatial_av_align(&long_det, &long_seld, &cfg);
        assert_eq!(pooled, whole);
    }
}

#[test]
fn masked_mse_ignores_predictions_on_inactive_frames() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..100 {
        let mut labels = LabelTrack::new(50);
        let mut active = Vec::new();
        for k in 0..50 {
            if rng.gen_bool(0.3) {
                labels.set_active("speech", k, rng.gen_range(0.0..1.0)).unwrap();
                active.push(k);
            }
        }
        let mut pred = SeldTrack::new(50);
        for k in 0..50 {
            pred.set("speech", k, rng.gen_range(0.0..1.0), Some(rng.gen_range(0.0..1.0)))
                .unwrap();
        }
        let base = seld_masked_mse(&pred, &labels).unwrap();
        // Scramble every inactive frame.
        let mut scrambled = pred.clone();
        for k in 0..50 {
            if !active.contains(&k) {
                scrambled
                    .set("speech", k, rng.gen_range(0.0..1.0), Some(rng.gen_range(0.0..1.0)))
                    .unwrap();
            }
        }
        assert_eq!(seld_masked_mse(&scrambled, &labels).unwrap(), base);
    }
}
