use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::eval::LabelledStream;
use crate::error::{Error, Result};
use crate::gesture::{posture_array, FingerStateParams, GestureRegistry};
use crate::model::{HandFrame, Handedness, Landmark, LandmarkSet, Pattern, Point2, PostureArray};

const FRAME_INTERVAL_MS: u64 = 40;
const MCP_Y: f64 = 0.60;
const OPEN_RISE: f64 = 0.15;
const FOLD_DROP: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub gestures: Vec<(String, Pattern)>,
    pub frames_per_gesture: usize,
    pub jitter_sigma: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Every gesture of `registry`, 150 frames each, σ = 0.01.
    pub fn from_registry(registry: &GestureRegistry, seed: u64) -> Self {
        Self {
            gestures: registry
                .defs()
                .iter()
                .map(|d| (d.name.clone(), d.pattern))
                .collect(),
            frames_per_gesture: 150,
            jitter_sigma: 0.01,
            seed,
        }
    }
}

/// Canonical upright hand realizing `posture` with its middle MCP at
/// `(center_x, 0.6)`. Open fingers put the tip 0.15 above the MCP, folded
/// ones 0.10 below; an open thumb points sideways, a folded one straight up.
pub fn hand_template(posture: PostureArray, handedness: Handedness, center_x: f64) -> Vec<Point2> {
    // thumb side is -x for a right hand facing the camera
    let side = match handedness {
        Handedness::Right => -1.0,
        Handedness::Left => 1.0,
    };
    let mut pts = vec![Point2::default(); 21];
    pts[Landmark::Wrist.index()] = Point2::new(center_x, 0.85);

    let thumb_mcp = Point2::new(center_x + side * 0.10, 0.68);
    pts[Landmark::ThumbCmc.index()] = Point2::new(center_x + side * 0.07, 0.74);
    pts[Landmark::ThumbMcp.index()] = thumb_mcp;
    let (ip, tip) = if posture.thumb() {
        (
            Point2::new(thumb_mcp.x + side * 0.05, 0.67),
            Point2::new(thumb_mcp.x + side * 0.10, 0.66),
        )
    } else {
        (Point2::new(thumb_mcp.x, 0.62), Point2::new(thumb_mcp.x, 0.56))
    };
    pts[Landmark::ThumbIp.index()] = ip;
    pts[Landmark::ThumbTip.index()] = tip;

    let fingers = [
        (Landmark::IndexMcp, 0.04),
        (Landmark::MiddleMcp, 0.0),
        (Landmark::RingMcp, -0.035),
        (Landmark::PinkyMcp, -0.07),
    ];
    for (k, (mcp, offset)) in fingers.into_iter().enumerate() {
        let x = center_x + side * offset;
        let ys = if posture.0[k + 1] {
            [MCP_Y, MCP_Y - 0.05, MCP_Y - 0.10, MCP_Y - OPEN_RISE]
        } else {
            [MCP_Y, MCP_Y - 0.04, MCP_Y + 0.03, MCP_Y + FOLD_DROP]
        };
        for (j, y) in ys.into_iter().enumerate() {
            pts[mcp.index() + j] = Point2::new(x, y);
        }
    }
    pts
}

fn template_hands(pattern: &Pattern) -> Vec<(Handedness, PostureArray, f64)> {
    match *pattern {
        Pattern::Single(p) => vec![(Handedness::Right, p, 0.5)],
        Pattern::Double { right, left } => vec![
            (Handedness::Right, right, 0.30),
            (Handedness::Left, left, 0.70),
        ],
    }
}

/// Generates `frames_per_gesture` jittered frames per gesture, gestures in
/// listed order, 40 ms apart. Each template is checked against `params`
/// before any frame is produced.
pub fn synth_corpus(spec: &SynthSpec, params: &FingerStateParams) -> Result<LabelledStream> {
    if spec.frames_per_gesture == 0 {
        return Err(Error::Synth("frames_per_gesture must be at least 1".into()));
    }
    if !(spec.jitter_sigma >= 0.0 && spec.jitter_sigma.is_finite()) {
        return Err(Error::Synth(format!("jitter sigma {} must be ≥ 0", spec.jitter_sigma)));
    }
    let mut templates = Vec::with_capacity(spec.gestures.len());
    for (name, pattern) in &spec.gestures {
        let hands = template_hands(pattern);
        for (hd, posture, cx) in &hands {
            let lms = LandmarkSet::new(*hd, hand_template(*posture, *hd, *cx))?;
            let got = posture_array(&lms, params);
            if got != *posture {
                return Err(Error::Synth(format!(
                    "{name}: template for {posture} reads back as {got} under the current thresholds"
                )));
            }
        }
        templates.push((name.as_str(), hands));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sigma = spec.jitter_sigma;
    let mut stream = LabelledStream::default();
    let mut t_ms = 0;
    for (name, hands) in &templates {
        for _ in 0..spec.frames_per_gesture {
            let mut frame = HandFrame::empty(t_ms);
            for (hd, posture, cx) in hands {
                let points = hand_template(*posture, *hd, *cx)
                    .into_iter()
                    .map(|p| {
                        let nx: f64 = StandardNormal.sample(&mut rng);
                        let ny: f64 = StandardNormal.sample(&mut rng);
                        Point2::new(
                            (p.x + sigma * nx).clamp(0.0, 1.0),
                            (p.y + sigma * ny).clamp(0.0, 1.0),
                        )
                    })
                    .collect();
                frame.hands.push(LandmarkSet::new(*hd, points)?);
            }
            stream.push(frame, name.to_string())?;
            t_ms += FRAME_INTERVAL_MS;
        }
    }
    Ok(stream)
}
