use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Plain age/weight alternation.
    Base,
    /// One queue: positively classified clauses first, older first within a class.
    PriorityQueueOnly,
    /// One queue ordered by descending logit.
    LogitQueueOnly,
    /// Base alternated with the priority queue.
    BasePlusPriority,
    /// Base alternated with the logit queue.
    BasePlusLogit,
    /// Base alternated with base restricted to positively classified clauses.
    Layered,
}

impl Variant {
    pub fn uses_model(self) -> bool {
        self != Variant::Base
    }

    pub fn has_base_side(self) -> bool {
        matches!(self, Variant::Base | Variant::BasePlusPriority | Variant::BasePlusLogit | Variant::Layered)
    }

    pub fn orders_by_logit(self) -> bool {
        matches!(self, Variant::LogitQueueOnly | Variant::BasePlusLogit)
    }
}

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("invalid {name} ratio {ratio:?}")]
    Ratio { name: &'static str, ratio: [u32; 2] },
    #[error("threshold must not be NaN")]
    Threshold,
    #[error("lazy evaluation is incompatible with logit-ordered queues ({0:?})")]
    LazyWithLogits(Variant),
    #[error("variant {0:?} needs a model")]
    MissingModel(Variant),
    #[error("cannot read scheme: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad scheme file: {0}")]
    Json(#[from] serde_json::Error),
}

fn default_age_weight() -> [u32; 2] {
    [1, 10]
}

fn default_second_level() -> [u32; 2] {
    [1, 1]
}

fn default_true() -> bool {
    true
}

/// Clause-selection configuration.
///
/// `second_level` is written base:model; `threshold` overrides the one stored in the
/// model file when present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionScheme {
    pub variant: Variant,
    #[serde(default = "default_age_weight")]
    pub age_weight: [u32; 2],
    #[serde(default = "default_second_level")]
    pub second_level: [u32; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub lazy: bool,
    #[serde(default = "default_true")]
    pub cache: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
}

impl Default for SelectionScheme {
    fn default() -> Self {
        Self::base()
    }
}

impl SelectionScheme {
    pub fn base() -> Self {
        Self {
            variant: Variant::Base,
            age_weight: default_age_weight(),
            second_level: default_second_level(),
            threshold: None,
            lazy: false,
            cache: true,
            model: None,
        }
    }

    pub fn pure_age() -> Self {
        Self { age_weight: [1, 0], ..Self::base() }
    }

    /// `S ⊕ S[M¹]` with the given base:model ratio.
    pub fn layered(base: u32, model: u32) -> Self {
        Self { variant: Variant::Layered, second_level: [base, model], lazy: true, ..Self::base() }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_threshold(mut self, t: f64) -> Self {
        self.threshold = Some(t);
        self
    }

    pub fn with_lazy(mut self, lazy: bool) -> Self {
        self.lazy = lazy;
        self
    }

    pub fn with_cache(mut self, cache: bool) -> Self {
        self.cache = cache;
        self
    }

    pub fn with_second_level(mut self, base: u32, model: u32) -> Self {
        self.second_level = [base, model];
        self
    }

    pub fn with_age_weight(mut self, age: u32, weight: u32) -> Self {
        self.age_weight = [age, weight];
        self
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        // A zero age or weight share gives pure weight or pure age selection.
        if self.age_weight == [0, 0] {
            return Err(SchemeError::Ratio { name: "age_weight", ratio: self.age_weight });
        }
        if self.second_level.contains(&0) {
            return Err(SchemeError::Ratio { name: "second_level", ratio: self.second_level });
        }
        if self.threshold.is_some_and(f64::is_nan) {
            return Err(SchemeError::Threshold);
        }
        if self.lazy && self.variant.orders_by_logit() {
            return Err(SchemeError::LazyWithLogits(self.variant));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, SchemeError> {
        let scheme: Self = serde_json::from_str(text)?;
        scheme.validate()?;
        Ok(scheme)
    }

    /// Loads and validates a scheme file; a relative model path is resolved against
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SchemeError> {
        let path = path.as_ref();
        let mut scheme = Self::from_json(&fs::read_to_string(path)?)?;
        if let (Some(model), Some(dir)) = (scheme.model.as_mut(), path.parent()) {
            if model.is_relative() {
                *model = dir.join(&*model);
            }
        }
        Ok(scheme)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scheme serializes")
    }
}
