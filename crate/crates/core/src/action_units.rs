//! FACS Action Unit tables, geometric AU detection from key points and
//! rule-based basic-emotion classification.
//!
//! Only the eight AUs observable from the 24-point schema ("active" AUs)
//! are detected. Classification scores the detected set against the refined
//! (active-only) rule of each emotion with the Jaccard index.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::face_model::{ids, interocular_distance, FaceFrame};
use crate::geometry::Point2;
use crate::symmetry::{reconstruct_occluded, MidlineAxis};

/// Default activation threshold, in interocular-distance units.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivityClass {
    /// Measurable from the tracked key points.
    Active,
    Passive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActionUnit {
    pub number: u8,
    pub descriptor: &'static str,
    pub class: ActivityClass,
}

const fn au(number: u8, descriptor: &'static str, class: ActivityClass) -> ActionUnit {
    ActionUnit {
        number,
        descriptor,
        class,
    }
}

use ActivityClass::{Active, Passive};

static ACTION_UNITS: [ActionUnit; 13] = [
    au(1, "Inner Brow Raiser", Active),
    au(2, "Outer Brow Raiser", Active),
    au(4, "Brow Lowerer", Active),
    au(5, "Upper Lid Raiser", Passive),
    au(6, "Cheek Raiser", Passive),
    au(7, "Lid Tightener", Passive),
    au(9, "Nose Wrinkler", Passive),
    au(12, "Lip Corner Puller", Active),
    au(15, "Lip Corner Depressor", Active),
    au(16, "Lower Lip Depressor", Active),
    au(20, "Lip Stretcher", Active),
    au(23, "Lip Tightener", Active),
    au(26, "Jaw Drop", Passive),
];

/// The active AU list, in its published order.
static ACTIVE_LIST: [u8; 8] = [1, 2, 4, 12, 15, 16, 20, 23];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Emotion {
    Happiness,
    Sadness,
    Surprise,
    Fear,
    Anger,
    Disgust,
}

impl Emotion {
    /// Canonical order, also the default tie-break order.
    pub const ALL: [Emotion; 6] = [
        Emotion::Happiness,
        Emotion::Sadness,
        Emotion::Surprise,
        Emotion::Fear,
        Emotion::Anger,
        Emotion::Disgust,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Happiness => "Happiness",
            Emotion::Sadness => "Sadness",
            Emotion::Surprise => "Surprise",
            Emotion::Fear => "Fear",
            Emotion::Anger => "Anger",
            Emotion::Disgust => "Disgust",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Emotion::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown emotion {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmotionRule {
    pub emotion: Emotion,
    /// All AUs of the emotion.
    pub full_aus: &'static [u8],
    /// The active AUs only.
    pub refined_aus: &'static [u8],
}

static RULES: [EmotionRule; 6] = [
    EmotionRule {
        emotion: Emotion::Happiness,
        full_aus: &[6, 12],
        refined_aus: &[12],
    },
    EmotionRule {
        emotion: Emotion::Sadness,
        full_aus: &[1, 4, 15],
        refined_aus: &[1, 4, 15],
    },
    EmotionRule {
        emotion: Emotion::Surprise,
        full_aus: &[1, 2, 5, 26],
        refined_aus: &[1, 2],
    },
    EmotionRule {
        emotion: Emotion::Fear,
        full_aus: &[1, 2, 4, 5, 7, 20, 26],
        refined_aus: &[1, 2, 4, 20],
    },
    EmotionRule {
        emotion: Emotion::Anger,
        full_aus: &[4, 5, 7, 23],
        refined_aus: &[4, 23],
    },
    EmotionRule {
        emotion: Emotion::Disgust,
        full_aus: &[9, 15, 16],
        refined_aus: &[15, 16],
    },
];

/// AU descriptors, the active list and the emotion rules.
#[derive(Debug)]
pub struct ActionUnitRuleSet {
    action_units: &'static [ActionUnit],
    active_list: &'static [u8],
    rules: &'static [EmotionRule],
}

static RULE_SET: ActionUnitRuleSet = ActionUnitRuleSet {
    action_units: &ACTION_UNITS,
    active_list: &ACTIVE_LIST,
    rules: &RULES,
};

pub fn rule_tables() -> &'static ActionUnitRuleSet {
    &RULE_SET
}

impl ActionUnitRuleSet {
    pub fn action_units(&self) -> &'static [ActionUnit] {
        self.action_units
    }

    pub fn action_unit(&self, number: u8) -> Option<&'static ActionUnit> {
        self.action_units.iter().find(|a| a.number == number)
    }

    pub fn descriptor(&self, number: u8) -> Option<&'static str> {
        self.action_unit(number).map(|a| a.descriptor)
    }

    /// Active AU numbers in published order.
    pub fn active_list(&self) -> &'static [u8] {
        self.active_list
    }

    pub fn rules(&self) -> &'static [EmotionRule] {
        self.rules
    }

    pub fn rule(&self, emotion: Emotion) -> &'static EmotionRule {
        self.rules
            .iter()
            .find(|r| r.emotion == emotion)
            .expect("every emotion has a rule")
    }

    pub fn numbers_with_class(&self, class: ActivityClass) -> BTreeSet<u8> {
        self.action_units
            .iter()
            .filter(|a| a.class == class)
            .map(|a| a.number)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
    Bilateral,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bilateral => "bilateral",
        }
    }

    pub fn mirrored(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
            Side::Bilateral => Side::Bilateral,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Detector output for one AU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuActivation {
    pub au: u8,
    pub side: Side,
    /// Interocular-normalized strength, never negative.
    pub magnitude: f64,
    /// `magnitude > threshold`.
    pub active: bool,
}

/// Geometric detector for the eight active AUs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuDetector {
    pub threshold: f64,
}

impl Default for AuDetector {
    fn default() -> Self {
        AuDetector {
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

fn complete(frame: &FaceFrame, axis: &MidlineAxis) -> Result<FaceFrame> {
    if frame.present_mask().iter().all(|&p| p) {
        Ok(frame.clone())
    } else {
        reconstruct_occluded(frame, axis)
    }
}

fn pos(frame: &FaceFrame, id: usize) -> Point2 {
    frame
        .position(id)
        .expect("frame completed before measuring")
}

impl AuDetector {
    pub fn new(threshold: f64) -> Result<Self> {
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "AU threshold must be positive, got {threshold}"
            )));
        }
        Ok(AuDetector { threshold })
    }

    fn lateral(&self, au: u8, left: f64, right: f64) -> AuActivation {
        let (left, right) = (left.max(0.0), right.max(0.0));
        let (lf, rf) = (left > self.threshold, right > self.threshold);
        let (side, magnitude) = match (lf, rf) {
            (true, true) => (Side::Bilateral, 0.5 * (left + right)),
            (true, false) => (Side::Left, left),
            (false, true) => (Side::Right, right),
            (false, false) if left > right => (Side::Left, left),
            (false, false) if right > left => (Side::Right, right),
            (false, false) => (Side::Bilateral, left),
        };
        AuActivation {
            au,
            side,
            magnitude,
            active: lf || rf,
        }
    }

    fn central(&self, au: u8, value: f64) -> AuActivation {
        let magnitude = value.max(0.0);
        AuActivation {
            au,
            side: Side::Bilateral,
            magnitude,
            active: magnitude > self.threshold,
        }
    }

    /// Evaluates all eight active AUs, in ascending AU order.
    ///
    /// Displacements are measured along the axis direction ("up the face")
    /// and divided by the neutral frame's interocular distance. Occluded
    /// points are first reconstructed about `axis`.
    pub fn detect(
        &self,
        neutral: &FaceFrame,
        expr: &FaceFrame,
        axis: &MidlineAxis,
    ) -> Result<Vec<AuActivation>> {
        let neutral = complete(neutral, axis)?;
        let expr = complete(expr, axis)?;
        let iod = interocular_distance(&neutral)?;
        let up = axis.direction();
        let rise = |id: usize| (pos(&expr, id) - pos(&neutral, id)).dot(up) / iod;
        let mean_rise = |brow: [usize; 3]| brow.iter().map(|&id| rise(id)).sum::<f64>() / 3.0;
        let span = |f: &FaceFrame, a: usize, b: usize| pos(f, a).distance(pos(f, b)) / iod;

        let width_change = span(&expr, ids::LEFT_LIP_CORNER, ids::RIGHT_LIP_CORNER)
            - span(&neutral, ids::LEFT_LIP_CORNER, ids::RIGHT_LIP_CORNER);
        let height_change = span(&expr, ids::LIP_TOP, ids::LIP_BOTTOM)
            - span(&neutral, ids::LIP_TOP, ids::LIP_BOTTOM);

        Ok(vec![
            self.lateral(1, rise(ids::LEFT_BROW_INNER), rise(ids::RIGHT_BROW_INNER)),
            self.lateral(2, rise(ids::LEFT_BROW_OUTER), rise(ids::RIGHT_BROW_OUTER)),
            self.lateral(4, -mean_rise(ids::LEFT_BROW), -mean_rise(ids::RIGHT_BROW)),
            self.lateral(12, rise(ids::LEFT_LIP_CORNER), rise(ids::RIGHT_LIP_CORNER)),
            self.lateral(
                15,
                -rise(ids::LEFT_LIP_CORNER),
                -rise(ids::RIGHT_LIP_CORNER),
            ),
            self.central(16, -rise(ids::LIP_BOTTOM)),
            self.central(20, width_change),
            // fires only when the mouth narrows by τ and flattens by τ/2
            self.central(23, (-width_change).min(-2.0 * height_change)),
        ])
    }
}

/// [`AuDetector::detect`] with the default threshold.
pub fn detect_active_aus(
    neutral: &FaceFrame,
    expr: &FaceFrame,
    axis: &MidlineAxis,
) -> Result<Vec<AuActivation>> {
    AuDetector::default().detect(neutral, expr, axis)
}

pub fn activations_to_csv(activations: &[AuActivation]) -> String {
    let mut out = String::from("au,side,magnitude,active\n");
    for a in activations {
        out.push_str(&format!(
            "{},{},{},{}\n",
            a.au,
            a.side,
            crate::symmetry::format_score(a.magnitude),
            a.active as u8
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmotionScore {
    pub emotion: Emotion,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    /// No AU was active.
    Neutral,
    Ranked(Vec<EmotionScore>),
}

impl Classification {
    pub fn top(&self) -> Option<&EmotionScore> {
        match self {
            Classification::Neutral => None,
            Classification::Ranked(r) => r.first(),
        }
    }

    /// One `Emotion,score,rank=N` line per emotion, or `Neutral`.
    pub fn to_lines(&self) -> String {
        match self {
            Classification::Neutral => "Neutral\n".to_string(),
            Classification::Ranked(ranking) => ranking
                .iter()
                .map(|s| format!("{},{:.3},rank={}\n", s.emotion, s.score, s.rank))
                .collect(),
        }
    }
}

fn jaccard(a: &BTreeSet<u8>, b: &BTreeSet<u8>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Ranks the six emotions against the active AUs with the default tie order.
pub fn classify_emotion(activations: &[AuActivation]) -> Classification {
    classify_with_order(activations, &Emotion::ALL)
}

/// Ranks by Jaccard index between the detected set and each refined rule;
/// equal scores keep the order given by `tie_order`.
pub fn classify_with_order(
    activations: &[AuActivation],
    tie_order: &[Emotion; 6],
) -> Classification {
    let detected: BTreeSet<u8> = activations
        .iter()
        .filter(|a| a.active)
        .map(|a| a.au)
        .collect();
    classify_set(&detected, tie_order)
}

/// Classification of a bare AU set.
pub fn classify_set(detected: &BTreeSet<u8>, tie_order: &[Emotion; 6]) -> Classification {
    if detected.is_empty() {
        return Classification::Neutral;
    }
    let tables = rule_tables();
    let mut scored: Vec<(usize, Emotion, f64)> = tie_order
        .iter()
        .enumerate()
        .map(|(pos, &emotion)| {
            let rule: BTreeSet<u8> = tables.rule(emotion).refined_aus.iter().copied().collect();
            (pos, emotion, jaccard(detected, &rule))
        })
        .collect();
    scored.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    Classification::Ranked(
        scored
            .into_iter()
            .enumerate()
            .map(|(i, (_, emotion, score))| EmotionScore {
                emotion,
                score,
                rank: i + 1,
            })
            .collect(),
    )
}

/// Parses a comma-separated permutation of the six emotion names.
pub fn parse_tie_order(text: &str) -> Result<[Emotion; 6]> {
    let parsed = text
        .split(',')
        .map(str::parse)
        .collect::<Result<Vec<Emotion>>>()?;
    let distinct: BTreeSet<Emotion> = parsed.iter().copied().collect();
    if parsed.len() != 6 || distinct.len() != 6 {
        return Err(Error::InvalidParameter(
            "tie order must list each of the six emotions once".into(),
        ));
    }
    Ok(std::array::from_fn(|i| parsed[i]))
}
