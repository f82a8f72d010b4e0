use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fingers::{posture_array, FingerStateParams};
use crate::error::{Error, Result};
use crate::model::{GestureDef, HandFrame, Handedness, Pattern, PostureArray};

const DEFAULT_REGISTRY: &str = include_str!("../../data/default_registry.json");

/// Posture arrays observed in one frame, keyed by handedness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HandPostures {
    pub right: Option<PostureArray>,
    pub left: Option<PostureArray>,
}

impl HandPostures {
    pub fn get(&self, hand: Handedness) -> Option<PostureArray> {
        match hand {
            Handedness::Right => self.right,
            Handedness::Left => self.left,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.right.is_none() && self.left.is_none()
    }
}

pub fn frame_postures(frame: &HandFrame, params: &FingerStateParams) -> HandPostures {
    let posture = |hand| frame.hand(hand).map(|lms| posture_array(lms, params));
    HandPostures {
        right: posture(Handedness::Right),
        left: posture(Handedness::Left),
    }
}

/// Ordered gesture definitions; lookup returns the first match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<GestureDef>", into = "Vec<GestureDef>")]
pub struct GestureRegistry {
    defs: Vec<GestureDef>,
}

impl TryFrom<Vec<GestureDef>> for GestureRegistry {
    type Error = Error;

    fn try_from(defs: Vec<GestureDef>) -> Result<Self> {
        GestureRegistry::new(defs)
    }
}

impl From<GestureRegistry> for Vec<GestureDef> {
    fn from(registry: GestureRegistry) -> Self {
        registry.defs
    }
}

impl GestureRegistry {
    pub fn new(defs: Vec<GestureDef>) -> Result<Self> {
        let mut names = HashSet::new();
        let mut patterns = HashSet::new();
        for (i, def) in defs.iter().enumerate() {
            if def.name.is_empty() {
                return Err(Error::validation(format!("registry[{i}].name"), "empty name"));
            }
            if def.hold_frames == 0 {
                return Err(Error::validation(
                    format!("registry[{i}].hold_frames"),
                    "must be at least 1",
                ));
            }
            if !names.insert(def.name.as_str()) {
                return Err(Error::validation(
                    format!("registry[{i}].name"),
                    format!("duplicate gesture {:?}", def.name),
                ));
            }
            if !patterns.insert(def.pattern) {
                return Err(Error::validation(
                    format!("registry[{i}].pattern"),
                    format!("{:?} repeats an earlier pattern", def.name),
                ));
            }
        }
        Ok(Self { defs })
    }

    /// The bundled sixteen-gesture registry.
    pub fn default_registry() -> Self {
        Self::from_json(DEFAULT_REGISTRY).expect("bundled registry is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let defs: Vec<GestureDef> = serde_json::from_str(text)?;
        Self::new(defs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.defs).expect("registry serialization is infallible")
    }

    pub fn defs(&self) -> &[GestureDef] {
        &self.defs
    }

    pub fn get(&self, name: &str) -> Option<&GestureDef> {
        self.defs.iter().find(|d| d.name == name)
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn min_hold_frames(&self) -> u32 {
        self.defs.iter().map(|d| d.hold_frames).min().unwrap_or(1)
    }
}

fn matches(pattern: &Pattern, hands: &HandPostures) -> bool {
    match pattern {
        Pattern::Single(array) => hands.right == Some(*array) || hands.left == Some(*array),
        Pattern::Double { right, left } => {
            hands.right == Some(*right) && hands.left == Some(*left)
        }
    }
}

/// First definition in registry order whose pattern matches the frame.
pub fn classify<'r>(hands: &HandPostures, registry: &'r GestureRegistry) -> Option<&'r GestureDef> {
    if hands.is_empty() {
        return None;
    }
    registry.defs.iter().find(|def| matches(&def.pattern, hands))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pa(bits: [u8; 5]) -> PostureArray {
        PostureArray::from_bits(bits)
    }

    #[test]
    fn default_registry_has_sixteen_distinct_gestures() {
        let reg = GestureRegistry::default_registry();
        assert_eq!(reg.len(), 16);
        let doubles = reg
            .defs()
            .iter()
            .filter(|d| matches!(d.pattern, Pattern::Double { .. }))
            .count();
        assert_eq!(doubles, 4);
        assert_eq!(reg.get("One_VRF").unwrap().pattern, Pattern::Single(pa([0, 1, 0, 0, 0])));
        assert_eq!(reg.get("Five_VRF").unwrap().pattern, Pattern::Single(pa([1; 5])));
        assert_eq!(reg.get("Punch_VRF").unwrap().pattern, Pattern::Single(pa([0; 5])));
        let round = GestureRegistry::from_json(&reg.to_json_pretty()).unwrap();
        assert_eq!(round, reg);
    }

    #[test]
    fn lookup_single() {
        let reg = GestureRegistry::new(vec![GestureDef::single("One", [0, 1, 0, 0, 0])]).unwrap();
        let hands = HandPostures { right: Some(pa([0, 1, 0, 0, 0])), left: None };
        assert_eq!(classify(&hands, &reg).unwrap().name, "One");
        assert!(classify(&HandPostures::default(), &reg).is_none());
        let left_only = HandPostures { right: None, left: Some(pa([0, 1, 0, 0, 0])) };
        assert_eq!(classify(&left_only, &reg).unwrap().name, "One");
    }

    #[test]
    fn double_listed_first_wins() {
        let reg = GestureRegistry::new(vec![
            GestureDef::double("TimeOut", [1; 5], [1; 5]),
            GestureDef::single("Five", [1; 5]),
        ])
        .unwrap();
        let both = HandPostures { right: Some(pa([1; 5])), left: Some(pa([1; 5])) };
        assert_eq!(classify(&both, &reg).unwrap().name, "TimeOut");
        let one = HandPostures { right: Some(pa([1; 5])), left: None };
        assert_eq!(classify(&one, &reg).unwrap().name, "Five");
    }

    #[test]
    fn rejects_duplicates() {
        let dup_name = vec![
            GestureDef::single("A", [0; 5]),
            GestureDef::single("A", [1; 5]),
        ];
        assert!(GestureRegistry::new(dup_name).is_err());
        let dup_pattern = vec![
            GestureDef::single("A", [0; 5]),
            GestureDef::single("B", [0; 5]),
        ];
        assert!(GestureRegistry::new(dup_pattern).is_err());
        let zero_hold = vec![GestureDef::single("A", [0; 5]).with_hold_frames(0)];
        assert!(GestureRegistry::new(zero_hold).is_err());
        assert!(GestureRegistry::from_json(r#"[{"name":"A","pattern":{"single":[0,2,0,0,0]}}]"#).is_err());
    }

    #[test]
    fn file_format() {
        let reg = GestureRegistry::from_json(
            r#"[{"name":"X","pattern":{"double":{"R":[0,0,0,0,0],"L":[1,1,1,1,1]}},"hold_frames":2}]"#,
        )
        .unwrap();
        assert_eq!(reg.defs()[0].hold_frames, 2);
        assert_eq!(
            reg.defs()[0].pattern,
            Pattern::Double { right: pa([0; 5]), left: pa([1; 5]) }
        );
    }
}
