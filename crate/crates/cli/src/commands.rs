use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use mlferns::audio::{
    frame_stream, read_wav, AudioSignal, Featurizer, FEATURE_COUNT, FRAME_LEN, SAMPLE_RATE,
};
use mlferns::bench::{bench_model, render};
use mlferns::csvio;
use mlferns::eval::{project_segments, rms_weighted_scores, FrameAnnotation};
use mlferns::ferns::{
    train_battery, train_multilabel, train_single_label, FernsModel, LabelSet, Precision,
    TrainParams,
};
use mlferns::synth::{synthesize_examples, InstrumentLibrary, MAX_POLYPHONY};

use crate::{
    BenchArgs, Cli, Command, EvaluateArgs, FeaturesArgs, Framing, ModeArg, PredictArgs,
    ReportFormat, SynthArgs, TrainArgs,
};

pub fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        ensure!(threads >= 1, "--threads must be at least 1");
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring thread pool")?;
    }
    match cli.command {
        Command::Synth(args) => synth(args),
        Command::Features(args) => features(args),
        Command::Train(args) => train(args),
        Command::Predict(args) => predict(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Bench(args) => bench(args),
    }
}

fn input_file(path: &Path) -> Result<()> {
    ensure!(path.is_file(), "input file {} does not exist", path.display());
    Ok(())
}

fn input_dir(path: &Path) -> Result<()> {
    ensure!(path.is_dir(), "input directory {} does not exist", path.display());
    Ok(())
}

fn output_file(path: &Path) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        ensure!(dir.is_dir(), "output directory {} does not exist", dir.display());
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

/// The featurizer only understands 40 ms frames.
fn check_framing(framing: &Framing) -> Result<()> {
    let probe = AudioSignal::new(vec![0.0; FRAME_LEN + 2 * SAMPLE_RATE as usize]);
    let frames = frame_stream(&probe, framing.frame_ms, framing.hop_ms)?;
    ensure!(
        frames.first().is_some_and(|f| f.samples.len() == FRAME_LEN),
        "features are defined on 40 ms frames, got --frame-ms {}",
        framing.frame_ms
    );
    Ok(())
}

/// Unlabeled frame annotations (time and rms) with their feature vectors.
fn featurize_recording(path: &Path, framing: &Framing) -> Result<Vec<(FrameAnnotation, Vec<f64>)>> {
    check_framing(framing)?;
    let signal = read_wav(path).with_context(|| format!("reading {}", path.display()))?;
    let frames = frame_stream(&signal, framing.frame_ms, framing.hop_ms)?;
    let featurizer = Featurizer::new();
    let features = featurizer.featurize_all(&frames);
    Ok(frames
        .iter()
        .zip(features)
        .map(|(f, x)| {
            let ann = FrameAnnotation {
                start_time: f.start_time,
                rms: f.rms(),
                labels: LabelSet::empty(),
            };
            (ann, x.0.to_vec())
        })
        .collect())
}

fn synth(args: SynthArgs) -> Result<()> {
    input_file(&args.library)?;
    output_file(&args.out)?;
    ensure!(args.n >= 1, "--n must be at least 1");
    let library = InstrumentLibrary::load_manifest(&args.library, args.trim_threshold)
        .with_context(|| format!("loading library {}", args.library.display()))?;
    let polyphony = MAX_POLYPHONY.min(library.len());
    let examples = synthesize_examples(args.seed, &library, args.n, polyphony)?;
    let mut out = create(&args.out)?;
    csvio::write_training(
        &mut out,
        library.names(),
        examples.into_iter().map(|e| (e.features, e.labels)),
    )?;
    out.flush()?;
    Ok(())
}

fn features(args: FeaturesArgs) -> Result<()> {
    input_file(&args.wav)?;
    output_file(&args.out)?;
    let signal = read_wav(&args.wav).with_context(|| format!("reading {}", args.wav.display()))?;
    check_framing(&args.framing)?;
    let frames = frame_stream(&signal, args.framing.frame_ms, args.framing.hop_ms)?;
    let features = Featurizer::new().featurize_all(&frames);
    let rows: Vec<_> = frames.iter().map(|f| f.start_time).zip(features).collect();
    let mut out = create(&args.out)?;
    csvio::write_features(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    input_file(&args.data)?;
    output_file(&args.out)?;
    ensure!(args.depth >= 1, "--depth must be at least 1");
    ensure!(args.ferns >= 1, "--ferns must be at least 1");
    let (set, _) = csvio::read_training(open(&args.data)?)
        .with_context(|| format!("reading {}", args.data.display()))?;
    let params = TrainParams::new(args.ferns, args.depth, args.seed);
    let model = match args.mode {
        ModeArg::Multilabel => train_multilabel(&set, params)?,
        ModeArg::Battery => train_battery(&set, params, args.per_class_cap)?,
        ModeArg::Single => train_single_label(&set, params)?,
    };
    let precision = if args.f32 { Precision::F32 } else { Precision::F64 };
    model
        .save(&args.out, precision)
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    input_file(&args.model)?;
    output_file(&args.out)?;
    let model = FernsModel::load(&args.model)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let rows: Vec<(FrameAnnotation, Vec<f64>)> = match (&args.wav, &args.features) {
        (Some(wav), None) => {
            input_file(wav)?;
            featurize_recording(wav, &args.framing)?
        }
        (None, Some(csv)) => {
            input_file(csv)?;
            csvio::read_features(open(csv)?)?
                .into_iter()
                .map(|(t, x)| {
                    let ann = FrameAnnotation {
                        start_time: t,
                        rms: 0.0,
                        labels: LabelSet::empty(),
                    };
                    (ann, x)
                })
                .collect()
        }
        _ => bail!("exactly one of --wav and --features is required"),
    };
    if let Some((_, x)) = rows.first() {
        ensure!(
            x.len() == model.feature_count(),
            "model expects {} features per frame, input has {}",
            model.feature_count(),
            x.len()
        );
    }
    let frames = rows
        .into_iter()
        .map(|(mut ann, x)| {
            ann.labels = model.predict(&x)?;
            Ok(ann)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = create(&args.out)?;
    csvio::write_frame_dump(&mut out, &frames, model.classes())?;
    out.flush()?;
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    input_file(&args.pred)?;
    input_file(&args.truth)?;
    output_file(&args.out)?;
    let mut catalog: Vec<String> = Vec::new();
    let pred = csvio::read_frame_dump(open(&args.pred)?, &mut catalog)
        .with_context(|| format!("reading {}", args.pred.display()))?;
    let header = fs::read_to_string(&args.truth)?
        .lines()
        .next()
        .unwrap_or_default()
        .to_string();
    let truth: Vec<FrameAnnotation> = if csvio::is_frame_dump(&header) {
        csvio::read_frame_dump(open(&args.truth)?, &mut catalog)?
    } else {
        // Segments are projected onto the predicted frames, whose rms was
        // measured on the same recording.
        let segments = csvio::read_segments(open(&args.truth)?, &mut catalog)
            .with_context(|| format!("reading {}", args.truth.display()))?;
        let starts: Vec<f64> = pred.iter().map(|f| f.start_time).collect();
        let frame_secs = FRAME_LEN as f64 / SAMPLE_RATE as f64;
        pred.iter()
            .zip(project_segments(&segments, &starts, frame_secs))
            .map(|(p, labels)| FrameAnnotation {
                start_time: p.start_time,
                rms: p.rms,
                labels,
            })
            .collect()
    };
    let report = rms_weighted_scores(&pred, &truth, &catalog)?;
    let text = match args.format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Kv => report.to_key_value(),
    };
    fs::write(&args.out, text).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn sorted_files(dir: &Path, keep: impl Fn(&Path) -> bool) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.is_file() && keep(p));
    files.sort();
    Ok(files)
}

fn bench(args: BenchArgs) -> Result<()> {
    input_dir(&args.models)?;
    input_dir(&args.wav)?;
    output_file(&args.out)?;
    let is_wav = |p: &Path| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    let wavs = sorted_files(&args.wav, is_wav)?;
    ensure!(!wavs.is_empty(), "no WAV files in {}", args.wav.display());
    let signals = wavs
        .iter()
        .map(|p| read_wav(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let featurizer = Featurizer::new();
    let models = sorted_files(&args.models, |p| !is_wav(p))?;
    let mut rows = Vec::new();
    for path in &models {
        let Ok(model) = FernsModel::load(path) else {
            continue;
        };
        ensure!(
            model.feature_count() == FEATURE_COUNT,
            "{} expects {} features, audio gives {FEATURE_COUNT}",
            path.display(),
            model.feature_count()
        );
        let name = path.file_name().unwrap_or_default().to_string_lossy();
        rows.push(bench_model(&name, &model, &featurizer, &signals)?);
    }
    ensure!(!rows.is_empty(), "no models found in {}", args.models.display());
    rows.sort_by(|a, b| (a.mode.name(), a.depth).cmp(&(b.mode.name(), b.depth)));
    fs::write(&args.out, render(&rows)).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}
