use palmgest::auth::{euclidean_distance, roc_sweep, triplet_loss, verify, EmbeddedTriplet, Embedding, EnrollmentRecord, IdentityEncoder, Reduction};
use palmgest::detect::{decode_keypoints, generate_anchors, iou, AnchorConfig, AnchorLayer, BBox, ConfidenceMap};
use palmgest::device::{centering_step, decode_wire, encode_wire, Axis, Command, ControllerConfig, DeviceCommand, MotorCommand, MAX_WIRE_STEPS};
use palmgest::gesture::{classify, cursor_point, posture_array, FingerStateParams, GestureEngine, GestureRegistry, HandPostures};
use palmgest::harness::hand_template;
use palmgest::model::{parse_frame, serialize_frame, GestureDef, HandFrame, Handedness, Landmark, LandmarkSet, Point2, PostureArray};
use proptest::prelude::*;

const GRID: f64 = (1u64 << 20) as f64;

/// Coordinates on a dyadic grid so translation and scaling stay exact.
fn coord() -> impl Strategy<Value = f64> {
    (0u64..=(1 << 20)).prop_map(|k| k as f64 / GRID)
}

fn point() -> impl Strategy<Value = Point2> {
    (coord(), coord()).prop_map(|(x, y)| Point2::new(x, y))
}

fn hand(hd: Handedness) -> impl Strategy<Value = LandmarkSet> {
    (
        prop::collection::vec(point(), 21),
        prop::collection::vec(0.0f64..=1.0, 21),
    )
        .prop_map(move |(points, confidences)| LandmarkSet { points, confidences, handedness: hd })
}

fn frame() -> impl Strategy<Value = HandFrame> {
    (
        0u64..1_000_000_000,
        prop::option::of(hand(Handedness::Right)),
        prop::option::of(hand(Handedness::Left)),
    )
        .prop_map(|(t_ms, r, l)| HandFrame { t_ms, hands: r.into_iter().chain(l).collect() })
}

fn transform(lms: &LandmarkSet, f: impl Fn(f64, f64) -> (f64, f64)) -> LandmarkSet {
    let mut out = lms.clone();
    for p in &mut out.points {
        let (x, y) = f(p.x, p.y);
        *p = Point2::new(x, y);
    }
    out
}

fn thumb_dx(lms: &LandmarkSet) -> f64 {
    (lms.point(Landmark::ThumbTip).x - lms.point(Landmark::ThumbMcp).x).abs()
}

fn boxes() -> impl Strategy<Value = BBox> {
    (0.0f64..1.0, 0.0f64..1.0, 0.001f64..0.5, 0.001f64..0.5, 0.0f64..1.0)
        .prop_map(|(cx, cy, w, h, score)| BBox { cx, cy, w, h, score })
}

fn command() -> impl Strategy<Value = Command> {
    let motor = (any::<bool>(), 1i32..=MAX_WIRE_STEPS as i32, any::<bool>()).prop_map(|(x, s, neg)| {
        let axis = if x { Axis::X } else { Axis::Y };
        Command::Motor(MotorCommand::new(axis, if neg { -s } else { s }).unwrap())
    });
    let device = ("[A-Za-z0-9_]{1,16}", "[A-Za-z0-9_]{1,16}")
        .prop_map(|(d, a)| Command::Device(DeviceCommand::new(&d, &a).unwrap()));
    prop_oneof![motor, device]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn frame_round_trips(f in frame()) {
        let line = serialize_frame(&f);
        prop_assert_eq!(parse_frame(&line).unwrap(), f);
    }

    #[test]
    fn invalid_frames_rejected(f in frame().prop_filter("needs a hand", |f| !f.hands.is_empty()), which in 0usize..6, idx in 0usize..21) {
        let mut v: serde_json::Value = serde_json::from_str(&serialize_frame(&f)).unwrap();
        let h = &mut v["hands"][0];
        match which {
            0 => h["pts"][idx][0] = serde_json::json!(1.5),
            1 => h["pts"][idx][1] = serde_json::json!(-0.01),
            2 => h["conf"][idx] = serde_json::json!(1.01),
            3 => { h["pts"].as_array_mut().unwrap().remove(idx); }
            4 => h["hd"] = serde_json::json!("X"),
            _ => {
                let dup = v["hands"][0].clone();
                v["hands"].as_array_mut().unwrap().insert(0, dup);
                if v["hands"].as_array().unwrap().len() > 3 { v["hands"].as_array_mut().unwrap().pop(); }
            }
        }
        prop_assert!(parse_frame(&v.to_string()).is_err());
    }

    #[test]
    fn iou_symmetric_and_bounded(a in boxes(), b in boxes()) {
        let ab = iou(&a, &b);
        prop_assert_eq!(ab, iou(&b, &a));
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn anchor_count_matches_layer_product(layers in prop::collection::vec((1u32..12, 1u32..12, 1usize..4, 1usize..4), 1..4)) {
        let cfg = AnchorConfig::new(layers.iter().map(|&(w, h, s, r)| AnchorLayer {
            grid_w: w,
            grid_h: h,
            scales: (0..s).map(|i| 0.1 + 0.1 * i as f64).collect(),
            aspect_ratios: (0..r).map(|i| 0.5 + 0.5 * i as f64).collect(),
        }).collect());
        let expected: usize = layers.iter().map(|&(w, h, s, r)| (w * h) as usize * s * r).sum();
        let anchors = generate_anchors(&cfg).unwrap();
        prop_assert_eq!(anchors.len(), expected);
        prop_assert_eq!(cfg.anchor_count(), expected);
    }

    #[test]
    fn keypoints_follow_region_translation(
        cells in prop::collection::vec(0.0f64..1.0, 16),
        cx in 0.3f64..0.7, cy in 0.3f64..0.7, dx in -0.1f64..0.1, dy in -0.1f64..0.1,
    ) {
        let maps: Vec<_> = (0..21).map(|i| {
            let mut c = cells.clone();
            c.rotate_left(i % 16);
            ConfidenceMap::new(4, 4, c).unwrap()
        }).collect();
        let region = BBox { cx, cy, w: 0.2, h: 0.2, score: 1.0 };
        let moved = BBox { cx: cx + dx, cy: cy + dy, ..region };
        let a = decode_keypoints(&maps, &region, Handedness::Left).unwrap();
        let b = decode_keypoints(&maps, &moved, Handedness::Left).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            prop_assert!((q.x - p.x - dx).abs() <= 1e-12 && (q.y - p.y - dy).abs() <= 1e-12);
        }
        prop_assert_eq!(a.confidences, b.confidences);
    }

    #[test]
    fn posture_invariant_under_translation(lms in hand(Handedness::Right), tx in -512i64..512, ty in -512i64..512) {
        let params = FingerStateParams::default();
        let (dx, dy) = (tx as f64 / 1024.0, ty as f64 / 1024.0);
        let moved = transform(&lms, |x, y| (x + dx, y + dy));
        prop_assert_eq!(posture_array(&lms, &params), posture_array(&moved, &params));
    }

    /// The finger bits and thumb slope are scale-free; the thumb's minimum
    /// horizontal extent is an absolute length, so the thumb bit is only
    /// compared when that guard decides the same way before and after.
    #[test]
    fn posture_invariant_under_scaling(lms in hand(Handedness::Left), k in 1u32..64, c in point()) {
        let params = FingerStateParams::default();
        let s = k as f64 / 16.0;
        let scaled = transform(&lms, |x, y| (c.x + s * (x - c.x), c.y + s * (y - c.y)));
        let (a, b) = (posture_array(&lms, &params), posture_array(&scaled, &params));
        prop_assert_eq!(&a.0[1..], &b.0[1..]);
        let guard = |l: &LandmarkSet| thumb_dx(l) >= params.thumb_min_dx;
        if guard(&lms) == guard(&scaled) {
            prop_assert_eq!(a.0[0], b.0[0]);
        }
    }

    #[test]
    fn cursor_is_thumb_index_midpoint(lms in hand(Handedness::Right)) {
        let c = cursor_point(&lms);
        let (t, i) = (lms.point(Landmark::ThumbTip), lms.point(Landmark::IndexTip));
        prop_assert!((c.x - (t.x + i.x) / 2.0).abs() < 1e-15 && (c.y - (t.y + i.y) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn classify_ignores_non_matching_order(
        pats in prop::sample::subsequence((0u8..32).collect::<Vec<_>>(), 1..16),
        seed in any::<u64>(),
        right in prop::option::of(0u8..32),
        left in prop::option::of(0u8..32),
    ) {
        let to_bits = |p: u8| std::array::from_fn::<u8, 5, _>(|i| (p >> i) & 1);
        let defs: Vec<GestureDef> = pats.iter().map(|&p| GestureDef::single(format!("g{p}"), to_bits(p))).collect();
        let reg = GestureRegistry::new(defs.clone()).unwrap();
        let hands = HandPostures {
            right: right.map(|p| PostureArray::from_bits(to_bits(p))),
            left: left.map(|p| PostureArray::from_bits(to_bits(p))),
        };
        let expected = classify(&hands, &reg).map(|d| d.name.clone());
        // shuffle, then restore the relative order of matching definitions
        let mut shuffled = defs.clone();
        let mut x = seed | 1;
        for i in (1..shuffled.len()).rev() {
            x ^= x << 13; x ^= x >> 7; x ^= x << 17;
            shuffled.swap(i, (x % (i as u64 + 1)) as usize);
        }
        let matches = |d: &GestureDef| classify(&hands, &GestureRegistry::new(vec![d.clone()]).unwrap()).is_some();
        let mut matching = defs.iter().filter(|d| matches(d)).cloned();
        let reordered: Vec<_> = shuffled.into_iter().map(|d| if matches(&d) { matching.next().unwrap() } else { d }).collect();
        let reg2 = GestureRegistry::new(reordered).unwrap();
        prop_assert_eq!(classify(&hands, &reg2).map(|d| d.name.clone()), expected);
    }

    #[test]
    fn debounce_bounds_and_alternation(seq in prop::collection::vec(0usize..4, 1..200), holds in prop::array::uniform3(1u32..8)) {
        let pats: [[u8; 5]; 3] = [[0, 1, 0, 0, 0], [0, 1, 1, 0, 0], [1, 1, 1, 1, 1]];
        let reg = GestureRegistry::new(
            (0..3).map(|i| GestureDef::single(format!("g{i}"), pats[i]).with_hold_frames(holds[i])).collect(),
        ).unwrap();
        let h_min = *holds.iter().min().unwrap() as usize;
        let params = FingerStateParams::default();
        let mut engine = GestureEngine::new(reg, params);
        let mut onset_frames = Vec::new();
        let mut events = Vec::new();
        for (i, &c) in seq.iter().enumerate() {
            let posture = if c == 3 { [0, 0, 0, 1, 1] } else { pats[c] };
            let lms = LandmarkSet::new(Handedness::Right, hand_template(PostureArray::from_bits(posture), Handedness::Right, 0.5)).unwrap();
            let out = engine.step(&HandFrame { t_ms: i as u64 * 40, hands: vec![lms] }).unwrap();
            for e in out {
                if e.is_onset() { onset_frames.push(i); }
                events.push(e);
            }
        }
        for n in 1..=seq.len() {
            let prefix = onset_frames.iter().filter(|&&f| f < n).count();
            prop_assert!(prefix <= n / h_min);
            for start in 0..=seq.len() - n {
                let w = onset_frames.iter().filter(|&&f| f >= start && f < start + n).count();
                prop_assert!(w <= n.div_ceil(h_min));
            }
        }
        // onsets and offsets alternate, each offset closing the open onset
        let mut open: Option<(String, u64)> = None;
        for e in &events {
            match (&open, e.is_onset()) {
                (None, true) => open = Some((e.name.clone(), e.onset_ms)),
                (Some((name, t)), false) => {
                    prop_assert_eq!(&e.name, name);
                    prop_assert_eq!(e.onset_ms, *t);
                    prop_assert!(e.offset_ms.unwrap() > *t);
                    open = None;
                }
                _ => prop_assert!(false, "onset/offset out of order: {:?}", e),
            }
        }
    }

    #[test]
    fn distance_is_a_metric(a in prop::collection::vec(-5.0f64..5.0, 6), b in prop::collection::vec(-5.0f64..5.0, 6), c in prop::collection::vec(-5.0f64..5.0, 6)) {
        let (a, b, c) = (Embedding(a), Embedding(b), Embedding(c));
        let d = |x: &Embedding, y: &Embedding| euclidean_distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn triplet_loss_nonnegative(v in prop::collection::vec(-3.0f64..3.0, 9), alpha in 0.0f64..2.0) {
        let t = EmbeddedTriplet::new(v[0..3].to_vec(), v[3..6].to_vec(), v[6..9].to_vec());
        prop_assert!(triplet_loss(&[t], alpha, Reduction::Mean).unwrap() >= 0.0);
    }

    #[test]
    fn verify_monotone_in_threshold(probe in prop::collection::vec(-1.0f64..1.0, 4), anchor in prop::collection::vec(-1.0f64..1.0, 4), t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let enc = IdentityEncoder { normalize: false };
        let rec = |t| EnrollmentRecord { subject_id: "a".into(), threshold: t, anchors: vec![Embedding(anchor.clone())] };
        if verify(&probe, &rec(lo), &enc).unwrap().accepted {
            prop_assert!(verify(&probe, &rec(hi), &enc).unwrap().accepted);
        }
    }

    #[test]
    fn roc_rates_monotone(gen in prop::collection::vec(0.0f64..4.0, 1..30), imp in prop::collection::vec(0.0f64..4.0, 1..30)) {
        let roc = roc_sweep(&gen, &imp).unwrap();
        for w in roc.points.windows(2) {
            prop_assert!(w[0].threshold < w[1].threshold);
            prop_assert!(w[0].far <= w[1].far && w[0].frr >= w[1].frr);
        }
        let last = roc.points.last().unwrap();
        prop_assert_eq!((last.far, last.frr), (1.0, 0.0));
    }

    #[test]
    fn wire_round_trips(cmd in command()) {
        prop_assert_eq!(decode_wire(&encode_wire(&cmd), MAX_WIRE_STEPS).unwrap(), cmd);
    }

    #[test]
    fn wire_decode_is_canonical(bytes in prop::collection::vec(prop::sample::select(b"MDXY +-0123456789_az\n\r".to_vec()), 0..24)) {
        if let Ok(cmd) = decode_wire(&bytes, MAX_WIRE_STEPS) {
            prop_assert_eq!(encode_wire(&cmd), bytes);
        }
    }

    #[test]
    fn centering_moves_toward_center(x in 0.0f64..=1.0, y in 0.0f64..=1.0, dz in 0.0f64..0.2, gain in 5.0f64..200.0, max_steps in 1u32..50) {
        let cfg = ControllerConfig { deadzone: dz, gain, max_steps };
        for cmd in centering_step(Point2::new(x, y), &cfg) {
            let err = match cmd.axis() { Axis::X => x - 0.5, Axis::Y => y - 0.5 };
            prop_assert!(err.abs() > dz);
            prop_assert_eq!(cmd.steps().signum() as f64, err.signum());
            prop_assert!(cmd.steps().unsigned_abs() <= max_steps);
        }
    }
}
