//! Acceptance suite. Each test checks one criterion at its pinned tolerance
//! and prints a single PASS/FAIL line. Tests take a shared lock so timing
//! criteria never compete with each other for the CPU.
//!
//! Run with `cargo test -p mlferns --test acceptance -- --nocapture`.

mod common;

use std::io::{self, Write};
use std::sync::Mutex;
use std::time::Instant;

use mlferns::audio::{frames, Featurizer, FEATURE_COUNT, FRAME_LEN};
use mlferns::bench::{frames_to_secs, time_predictions};
use mlferns::eval::{annotate_recording, rms_weighted_scores, truth_frames, FrameAnnotation};
use mlferns::ferns::{
    build_fern_structure, leaf_index, make_bag, train_battery, train_multilabel,
    train_single_label, FernsModel, LabelSet, Precision, SplitCriterion, TrainParams, TrainingSet,
    DEFAULT_PER_CLASS_CAP,
};
use mlferns::rng::substream;
use mlferns::synth::{build_training_set, InstrumentLibrary, DEFAULT_TRIM_THRESHOLD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{oracle_quotients, oracle_scores, polyphonic_track, random_dataset, recordings, FAMILIES};

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(id: u32, title: &str, pass: bool, detail: &str) {
    println!(
        "criterion {id} [{}] {title}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    io::stdout().flush().ok();
    assert!(pass, "criterion {id} failed: {detail}");
}

/// Counts bytes without keeping them.
#[derive(Default)]
struct ByteCounter(usize);

impl Write for ByteCounter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0 += buf.len();
        Ok(buf.len())
    }
    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

fn file_size(model: &FernsModel) -> usize {
    let mut counter = ByteCounter::default();
    model.write_to(&mut counter, Precision::F64).unwrap();
    assert_eq!(counter.0, model.serialized_len(Precision::F64));
    counter.0
}

// 1. Score-table oracle.
#[test]
fn criterion_1_score_table_oracle() {
    let _guard = serial();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut tables = 0usize;
    for dataset in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + dataset);
        let n = rng.gen_range(1..=30);
        let classes = rng.gen_range(1..=4);
        let features = rng.gen_range(1..=5);
        let depth = rng.gen_range(1..=4);
        let set = random_dataset(&mut rng, n, features, classes);
        let params = TrainParams::new(3, depth, dataset);

        let single = train_single_label(&set, params).unwrap();
        let multi = train_multilabel(&set, params).unwrap();
        for k in 0..params.ferns {
            // Fern k replays its documented stream: structure first, then bag.
            let mut stream = substream(params.seed, k as u64);
            let criteria = build_fern_structure(&mut stream, &set, depth).unwrap();
            let bag = make_bag(&mut stream, set.len()).unwrap();
            for (model, oracle) in [
                (&single, oracle_scores(&criteria, &bag, &set)),
                (&multi, oracle_quotients(&criteria, &bag, &set)),
            ] {
                let fern = &model.ferns()[k];
                assert_eq!(fern.criteria(), &criteria[..]);
                for (slot, expected) in oracle.iter().enumerate() {
                    for (got, want) in fern.leaf_row(slot).iter().zip(expected) {
                        worst = worst.max((got - want).abs());
                    }
                }
                tables += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        "score-table oracle",
        worst <= 1e-12 && secs < 10.0,
        &format!("{tables} tables over 50 datasets, max |err| = {worst:.3e} (tol 1e-12), {secs:.2}s (< 10s)"),
    );
}

// 2. Leaf algebra.
#[test]
fn criterion_2_leaf_algebra() {
    let _guard = serial();
    let start = Instant::now();
    let mut ok = true;
    for depth in 1..=12usize {
        let criteria: Vec<SplitCriterion> = (0..depth)
            .map(|i| SplitCriterion {
                feature_index: i,
                threshold: 0.0,
            })
            .collect();
        let mut seen = vec![false; 1 << depth];
        for pattern in 0..1usize << depth {
            let x: Vec<f64> = (0..depth)
                .map(|i| if pattern >> i & 1 == 1 { 1.0 } else { -1.0 })
                .collect();
            let leaf = leaf_index(&criteria, &x).unwrap();
            if !(1..=1 << depth).contains(&leaf) || seen[leaf - 1] {
                ok = false;
                continue;
            }
            seen[leaf - 1] = true;
        }
        ok &= seen.iter().all(|&s| s);
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        2,
        "leaf algebra",
        ok && secs < 1.0,
        &format!("all 2^D patterns map onto 1..=2^D bijectively for D = 1..=12, {secs:.3}s (< 1s)"),
    );
}

/// 5 labels, each a threshold test on its own feature among 20 uniform
/// features; the other 15 are noise. Empty label sets are redrawn.
fn separable_set(rng: &mut ChaCha8Rng, n: usize) -> TrainingSet {
    const FEATURES: usize = 20;
    const THRESHOLDS: [f64; 5] = [0.5, 0.4, 0.6, 0.45, 0.55];
    let catalog = (0..5).map(|c| format!("label{c}")).collect();
    let mut objects = Vec::with_capacity(n);
    while objects.len() < n {
        let x: Vec<f64> = (0..FEATURES).map(|_| rng.gen::<f64>()).collect();
        let y: LabelSet = (0..5).filter(|&c| x[c * 4] > THRESHOLDS[c]).collect();
        if !y.is_empty() {
            objects.push((x, y));
        }
    }
    TrainingSet::from_objects(catalog, objects).unwrap()
}

fn unit_weight(labels: LabelSet, i: usize) -> FrameAnnotation {
    FrameAnnotation {
        start_time: i as f64,
        rms: 1.0,
        labels,
    }
}

// 3. Separable recovery.
#[test]
fn criterion_3_separable_recovery() {
    let _guard = serial();
    let start = Instant::now();
    let mut scores = Vec::new();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let train = separable_set(&mut rng, 2000);
        let test = separable_set(&mut rng, 500);
        let model = train_multilabel(&train, TrainParams::new(1000, 10, seed)).unwrap();
        let (pred, truth): (Vec<_>, Vec<_>) = test
            .iter()
            .enumerate()
            .map(|(i, (x, y))| {
                (
                    unit_weight(model.predict_multilabel(x).unwrap(), i),
                    unit_weight(y.clone(), i),
                )
            })
            .unzip();
        let report = rms_weighted_scores(&pred, &truth, train.classes()).unwrap();
        scores.push(report.overall.f_score);
    }
    let secs = start.elapsed().as_secs_f64();
    let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
    verdict(
        3,
        "separable recovery",
        min >= 0.90 && secs < 120.0,
        &format!(
            "F per seed {:?}, min {min:.4} (>= 0.90), {secs:.1}s (< 120s)",
            scores.iter().map(|f| (f * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

// 4. Multi-label ferns versus the battery on a synthetic instrument pipeline.
#[test]
fn criterion_4_multilabel_beats_battery() {
    let _guard = serial();
    let start = Instant::now();
    let families = &FAMILIES[..4];
    let library = InstrumentLibrary::from_recordings(recordings(families, 12, 4), DEFAULT_TRIM_THRESHOLD).unwrap();
    let train = build_training_set(4, &library, 5000).unwrap();
    let (track, segments) = polyphonic_track(families, 60.0, 44);
    let truth = truth_frames(&track, &segments);
    let featurizer = Featurizer::new();

    let mut lines = Vec::new();
    let mut ok = true;
    for depth in [10, 11, 12] {
        let mut multi = Vec::new();
        let mut battery = Vec::new();
        for seed in 1..=10u64 {
            let params = TrainParams::new(1000, depth, seed);
            for (scores, model) in [
                (&mut multi, train_multilabel(&train, params).unwrap()),
                (&mut battery, train_battery(&train, params, DEFAULT_PER_CLASS_CAP).unwrap()),
            ] {
                let pred = annotate_recording(&model, &featurizer, &track).unwrap();
                let report = rms_weighted_scores(&pred, &truth, library.names()).unwrap();
                scores.push(report.overall.f_score);
            }
        }
        let (m_mean, m_std) = mean_std(&multi);
        let (b_mean, b_std) = mean_std(&battery);
        ok &= m_mean >= b_mean;
        if depth == 12 {
            ok &= m_std <= b_std;
        }
        lines.push(format!(
            "D={depth}: multi F {m_mean:.4}±{m_std:.4}, battery F {b_mean:.4}±{b_std:.4}"
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 1800.0;
    verdict(
        4,
        "multi-label F >= battery F, steadier at D=12",
        ok,
        &format!("{}; {secs:.0}s (< 1800s)", lines.join("; ")),
    );
}

/// Eight-instrument training mixes for the size and speed criteria.
fn eight_class_training_set() -> TrainingSet {
    let library = InstrumentLibrary::from_recordings(recordings(&FAMILIES, 6, 8), DEFAULT_TRIM_THRESHOLD).unwrap();
    build_training_set(8, &library, 2000).unwrap()
}

// 5. Model size trend.
#[test]
fn criterion_5_size_trend() {
    let _guard = serial();
    let train = eight_class_training_set();
    let multi_10 = file_size(&train_multilabel(&train, TrainParams::new(1000, 10, 5)).unwrap());
    let multi_12 = file_size(&train_multilabel(&train, TrainParams::new(1000, 12, 5)).unwrap());
    let battery_12 = file_size(&train_battery(&train, TrainParams::new(1000, 12, 5), DEFAULT_PER_CLASS_CAP).unwrap());
    let ratio = battery_12 as f64 / multi_12 as f64;
    let growth = multi_12 as f64 / multi_10 as f64;
    verdict(
        5,
        "model size trend",
        (1.5..=2.5).contains(&ratio) && (growth - 4.0).abs() <= 0.05 * 4.0,
        &format!(
            "D=12 battery {battery_12} B / multi {multi_12} B = {ratio:.3} (in [1.5, 2.5]); \
             multi D=10→12 growth ×{growth:.3} (4 ± 5%)"
        ),
    );
}

// 6. Prediction speed trend.
#[test]
fn criterion_6_speed_trend() {
    let _guard = serial();
    let train = eight_class_training_set();
    let (track, _) = polyphonic_track(&FAMILIES, 60.0, 66);
    let featurizer = Featurizer::new();
    let features: Vec<_> = frames(&track).iter().map(|f| featurizer.featurize(f)).collect();
    let views: Vec<&[f64]> = features.iter().map(|f| f.as_slice()).collect();
    assert_eq!(views[0].len(), FEATURE_COUNT);
    let audio_secs = track.duration_secs();
    assert!((frames_to_secs(views.len()) + (FRAME_LEN - 441) as f64 / 44100.0 - audio_secs).abs() < 0.011);

    let mut ok = true;
    let mut lines = Vec::new();
    for depth in [10, 12] {
        let params = TrainParams::new(1000, depth, 6);
        let multi_secs = {
            let model = train_multilabel(&train, params).unwrap();
            time_predictions(&model, &views, 3).unwrap()
        };
        let battery_secs = {
            let model = train_battery(&train, params, DEFAULT_PER_CLASS_CAP).unwrap();
            time_predictions(&model, &views, 3).unwrap()
        };
        let speedup = battery_secs / multi_secs;
        let rtf = audio_secs / multi_secs;
        ok &= speedup >= 3.0 && rtf >= 50.0;
        lines.push(format!(
            "D={depth}: multi {:.0}x real time, battery {:.0}x, throughput ratio {speedup:.2} (>= 3)",
            rtf,
            audio_secs / battery_secs
        ));
    }
    verdict(
        6,
        "prediction speed trend (single thread, features precomputed)",
        ok,
        &format!("{}; multi-label needs >= 50x real time", lines.join("; ")),
    );
}

// 7. Featurizer oracles.
#[test]
fn criterion_7_featurizer_oracles() {
    let _guard = serial();
    let start = Instant::now();
    let featurizer = Featurizer::new();
    let sine: Vec<f64> = (0..FRAME_LEN)
        .map(|i| (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / 44100.0).sin())
        .collect();
    let frame = mlferns::audio::Frame::new(&sine, 0.0);
    let f = featurizer.featurize(&frame);
    let lin_centroid = f.0[43];
    let zcr = f.0[41];
    let rolloff = f.0[42];
    let deltas_ok = f
        .deltas()
        .iter()
        .enumerate()
        .all(|(i, d)| d.abs() <= if i == 41 { 2.0 / 1323.0 } else { 1e-6 });
    let peak = featurizer.power_spectrum(&frame).power.iter().cloned().fold(0.0, f64::max);
    let flux_rel = f.flux() / peak;
    let silence = vec![0.0; FRAME_LEN];
    let silent = featurizer.featurize(&mlferns::audio::Frame::new(&silence, 0.0));
    let secs = start.elapsed().as_secs_f64();
    let ok = f.0.len() == 91
        && (lin_centroid - 1000.0).abs() <= 25.0
        && (zcr - 0.0454).abs() <= 0.001
        && (rolloff - 1000.0).abs() <= 25.0
        && deltas_ok
        && flux_rel < 1e-6
        && silent.0.iter().all(|v| v.is_finite())
        && secs < 5.0;
    verdict(
        7,
        "featurizer oracles",
        ok,
        &format!(
            "len {}, LinCentroid {lin_centroid:.2} Hz, ZCR {zcr:.5}, RollOff {rolloff:.1} Hz, \
             stationary deltas ok = {deltas_ok}, flux/peak {flux_rel:.2e}, silence finite, {secs:.2}s",
            f.0.len()
        ),
    );
}

// 8. Determinism, round trip, and perfect evaluation.
#[test]
fn criterion_8_determinism_and_round_trip() {
    let _guard = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let set = random_dataset(&mut rng, 300, 12, 4);
    let params = TrainParams::new(200, 8, 88);
    let mut ok = true;
    for (a, b) in [
        (train_multilabel(&set, params).unwrap(), train_multilabel(&set, params).unwrap()),
        (train_battery(&set, params, 100).unwrap(), train_battery(&set, params, 100).unwrap()),
    ] {
        let bytes = a.to_bytes(Precision::F64).unwrap();
        ok &= bytes == b.to_bytes(Precision::F64).unwrap();
        let loaded = FernsModel::from_bytes(&bytes).unwrap();
        for _ in 0..200 {
            let x: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let s1 = a.class_sums(&x).unwrap();
            let s2 = loaded.class_sums(&x).unwrap();
            ok &= s1.iter().zip(&s2).all(|(p, q)| p.to_bits() == q.to_bits());
            ok &= a.predict(&x).unwrap() == loaded.predict(&x).unwrap();
        }
    }

    let (track, segments) = polyphonic_track(&FAMILIES[..4], 5.0, 9);
    let truth = truth_frames(&track, &segments);
    let catalog: Vec<String> = FAMILIES[..4].iter().map(|f| f.name().to_string()).collect();
    let report = rms_weighted_scores(&truth, &truth, &catalog).unwrap();
    ok &= report.overall.f_score == 1.0;
    verdict(
        8,
        "determinism and round trip",
        ok,
        &format!(
            "identical model bytes for equal seeds, bit-identical sums after save/load, \
             perfect-prediction F = {}",
            report.overall.f_score
        ),
    );
}
