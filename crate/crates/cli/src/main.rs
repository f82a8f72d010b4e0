use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use palmgest::auth::{enroll, roc_sweep, train, verify, Encoder, EnrollmentStore, FeatureDataset};
use palmgest::detect::{decode_keypoints, decode_predictions, BBox, ConfidenceMapRecord, PredictionRecord};
use palmgest::device::{
    centering_step, map_gesture, open_transport, Command, CommandMapping, TransportUri, TransportWorker,
};
use palmgest::gesture::{focal_point, GestureEngine};
use palmgest::harness::{evaluate, evaluate_events, synth_corpus, LabelledStream, SynthSpec};
use palmgest::model::{serialize_frame, FrameReader, HandFrame, Handedness};
use palmgest::{Error, Result};
use serde::Deserialize;

mod config;

use config::{load_registry, read_probe, CliEncoder, Config};

#[derive(Parser)]
#[command(name = "palmgest", version, about = "Hand-gesture and palm-verification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Table,
    Both,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a labelled synthetic landmark corpus (JSONL).
    Synth {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Registry file, or `default` for the built-in one.
        #[arg(long)]
        registry: Option<PathBuf>,
        #[arg(long, default_value_t = 150)]
        frames: usize,
        #[arg(long, default_value_t = 0.01)]
        jitter: f64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score a labelled corpus frame by frame.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        registry: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also report debounced event-level recall.
        #[arg(long)]
        events: bool,
        #[arg(long, value_enum, default_value_t = ReportFormat::Both)]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode raw detector predictions into boxes after NMS.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn per-region confidence maps into landmark frames.
    Keypoints {
        #[arg(long)]
        input: PathBuf,
        /// Hand region as `cx,cy,w,h` in normalized coordinates.
        #[arg(long, default_value = "0.5,0.5,1,1")]
        region: String,
        #[arg(long, default_value = "R")]
        hand: String,
        /// Milliseconds between consecutive output frames.
        #[arg(long, default_value_t = 40)]
        interval: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a frame stream through the gesture engine and print events.
    Replay {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        registry: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drive the camera mount and mapped devices from a frame stream.
    Track {
        #[arg(long)]
        frames: PathBuf,
        /// `tcp://host:port` or `serial:<path>`.
        #[arg(long)]
        to: String,
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long)]
        registry: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Add or replace a subject's anchors in an enrollment store.
    Enroll {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        subject: String,
        /// Feature JSONL; lines for other subjects are ignored.
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        threshold: f64,
        /// Unit-normalize raw features when no model is given.
        #[arg(long)]
        normalize: bool,
    },
    /// Check a probe feature vector against an enrolled subject.
    Verify {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        subject: String,
        #[arg(long)]
        probe: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Train the palm encoder with triplet loss.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// FAR/FRR sweep over genuine and impostor distances.
    Roc {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open_input(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| {
        Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_frames(path: &Path) -> Result<Vec<HandFrame>> {
    FrameReader::ignoring_labels(open_input(path)?).collect()
}

fn parse_region(text: &str) -> Result<BBox> {
    let vals: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(format!("region: {e}")))?;
    let [cx, cy, w, h] = vals[..] else {
        return Err(Error::Parse(format!("region: expected cx,cy,w,h, got {text:?}")));
    };
    Ok(BBox { cx, cy, w, h, score: 1.0 })
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Synth { out, seed, registry, frames, jitter, config } => {
            let cfg = Config::load(config.as_deref())?;
            let registry = load_registry(registry.as_deref())?;
            let spec = SynthSpec {
                frames_per_gesture: frames,
                jitter_sigma: jitter,
                ..SynthSpec::from_registry(&registry, seed)
            };
            let stream = synth_corpus(&spec, &cfg.finger_state)?;
            let mut w = open_output(out.as_deref())?;
            stream.write_jsonl(&mut w)?;
            w.flush()?;
        }
        Cmd::Eval { corpus, registry, config, events, format, out } => {
            let cfg = Config::load(config.as_deref())?;
            let registry = load_registry(registry.as_deref())?;
            let stream = LabelledStream::read_jsonl(open_input(&corpus)?)?;
            let report = evaluate(&stream, &registry, &cfg.finger_state)?;
            let mut w = open_output(out.as_deref())?;
            if format != ReportFormat::Table {
                writeln!(w, "{}", serde_json::to_string(&report)?)?;
                if events {
                    let ev = evaluate_events(&stream, &registry, &cfg.finger_state)?;
                    writeln!(w, "{}", serde_json::to_string(&ev)?)?;
                }
            }
            if format != ReportFormat::Json {
                write!(w, "{}", report.to_table())?;
                write!(w, "{}", report.confusion_table())?;
            }
            w.flush()?;
        }
        Cmd::Decode { input, config, out } => {
            let cfg = Config::load(config.as_deref())?;
            let mut w = open_output(out.as_deref())?;
            for (i, line) in open_input(&input)?.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let record: PredictionRecord = serde_json::from_str(&line)
                    .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
                let boxes = decode_predictions(&record, cfg.detect.iou_thresh, cfg.detect.score_thresh)?;
                writeln!(w, "{}", serde_json::to_string(&boxes)?)?;
            }
            w.flush()?;
        }
        Cmd::Keypoints { input, region, hand, interval, out } => {
            let region = parse_region(&region)?;
            let hand = Handedness::from_code(&hand).ok_or_else(|| Error::Validation {
                field: "hand".into(),
                message: format!("expected R or L, got {hand:?}"),
            })?;
            let mut w = open_output(out.as_deref())?;
            let mut t = 0;
            for (i, line) in open_input(&input)?.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let record: ConfidenceMapRecord = serde_json::from_str(&line)
                    .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
                let lms = decode_keypoints(&record.into_maps()?, &region, hand)?;
                writeln!(w, "{}", serialize_frame(&HandFrame { t_ms: t, hands: vec![lms] }))?;
                t += interval;
            }
            w.flush()?;
        }
        Cmd::Replay { frames, registry, config, out } => {
            let cfg = Config::load(config.as_deref())?;
            let mut engine = GestureEngine::new(load_registry(registry.as_deref())?, cfg.finger_state);
            let mut w = open_output(out.as_deref())?;
            for frame in FrameReader::ignoring_labels(open_input(&frames)?) {
                for event in engine.step(&frame?)? {
                    writeln!(w, "{}", serde_json::to_string(&event)?)?;
                }
            }
            w.flush()?;
        }
        Cmd::Track { frames, to, mapping, registry, config } => {
            let cfg = Config::load(config.as_deref())?;
            let uri: TransportUri = to.parse()?;
            let mapping = mapping.as_deref().map(CommandMapping::load).transpose()?;
            let frames = read_frames(&frames)?;
            let mut engine = GestureEngine::new(load_registry(registry.as_deref())?, cfg.finger_state);
            let worker = TransportWorker::spawn(open_transport(&uri)?);
            let (mut motor, mut device) = (0u64, 0u64);
            for frame in &frames {
                for event in engine.step(frame)? {
                    if let Some(cmd) = mapping.as_ref().and_then(|m| map_gesture(&event, m)) {
                        worker.send(Command::Device(cmd))?;
                        device += 1;
                    }
                }
                if let Some(hand) = frame.primary_hand() {
                    for cmd in centering_step(focal_point(hand), &cfg.controller) {
                        worker.send(Command::Motor(cmd))?;
                        motor += 1;
                    }
                }
            }
            let written = worker.finish()?;
            println!(
                "{}",
                serde_json::json!({"frames": frames.len(), "motor_commands": motor, "device_commands": device, "written": written})
            );
        }
        Cmd::Enroll { store, subject, samples, model, threshold, normalize } => {
            let dataset = FeatureDataset::read_jsonl(open_input(&samples)?)?;
            let features: Vec<Vec<f64>> = dataset.samples_of(&subject).map(|s| s.features.clone()).collect();
            if features.is_empty() {
                return Err(Error::Data(format!("no samples for subject {subject:?} in {}", samples.display())));
            }
            let encoder = CliEncoder::load(model.as_deref(), normalize)?;
            let record = enroll(&subject, &features, &encoder, threshold)?;
            let mut db = if store.exists() {
                EnrollmentStore::load(&store)?
            } else {
                EnrollmentStore::new(record.anchors[0].dim(), encoder.normalizes())
            };
            db.upsert(record)?;
            db.save(&store)?;
        }
        Cmd::Verify { store, subject, probe, model } => {
            let db = EnrollmentStore::load(&store)?;
            let record = db.get(&subject).ok_or_else(|| Error::Data(format!("subject {subject:?} is not enrolled")))?;
            let encoder = CliEncoder::load(model.as_deref(), db.normalize)?;
            let decision = verify(&read_probe(&probe)?, record, &encoder)?;
            println!("{}", serde_json::to_string(&decision)?);
        }
        Cmd::Train { data, out, epochs, seed, config } => {
            let mut cfg = Config::load(config.as_deref())?.train;
            if let Some(e) = epochs {
                cfg.epochs = e;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dataset = FeatureDataset::read_jsonl(open_input(&data)?)?;
            let outcome = train(&dataset, &cfg)?;
            std::fs::write(&out, serde_json::to_string(&outcome.params)?)?;
            println!("{}", serde_json::json!({"epochs": cfg.epochs, "loss_curve": outcome.loss_curve}));
        }
        Cmd::Roc { input, out } => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Distances {
                genuine: Vec<f64>,
                impostor: Vec<f64>,
            }
            let d: Distances = serde_json::from_reader(open_input(&input)?)?;
            let sweep = roc_sweep(&d.genuine, &d.impostor)?;
            let mut w = open_output(out.as_deref())?;
            writeln!(w, "{}", serde_json::to_string(&sweep)?)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
