use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::numerics::Matrix;
use crate::{Error, Result};

/// Which knowledge source a feature vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Rgb,
    Depth,
    Semantic,
    Position,
}

impl Source {
    pub const ALL: [Source; 4] = [
        Source::Rgb,
        Source::Depth,
        Source::Semantic,
        Source::Position,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Rgb => "rgb",
            Source::Depth => "depth",
            Source::Semantic => "semantic",
            Source::Position => "position",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Source::ALL
            .into_iter()
            .find(|src| src.as_str() == s)
            .ok_or_else(|| Error::UnknownSource(s.to_string()))
    }
}

/// A 1×D feature row tagged with its source.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVec {
    source: Source,
    values: Vec<f64>,
}

impl FeatureVec {
    pub fn new(source: Source, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("feature vector"));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "{source} feature has a non-finite value at index {bad}"
            )));
        }
        Ok(Self { source, values })
    }

    pub fn zeros(source: Source, dim: usize) -> Self {
        Self {
            source,
            values: alloc::vec![0.0; dim],
        }
    }

    pub fn from_matrix(source: Source, m: &Matrix) -> Result<Self> {
        if m.rows() != 1 {
            return Err(Error::ShapeMismatch {
                op: "feature vector",
                left: (1, m.cols()),
                right: m.shape(),
            });
        }
        Self::new(source, m.as_slice().to_vec())
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::row(&self.values)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Speaker location in normalized image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeakerPosition {
    x: f64,
    y: f64,
}

impl SpeakerPosition {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return Err(Error::InvalidArgument(alloc::format!(
                "speaker position ({x}, {y}) outside [0, 1]^2"
            )));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_tags_round_trip() {
        for s in Source::ALL {
            assert_eq!(s.as_str().parse::<Source>().unwrap(), s);
        }
        assert_eq!(
            "banana".parse::<Source>(),
            Err(Error::UnknownSource("banana".into()))
        );
    }

    #[test]
    fn position_bounds() {
        assert!(SpeakerPosition::new(0.0, 1.0).is_ok());
        assert!(SpeakerPosition::new(1.5, 0.2).is_err());
        assert!(SpeakerPosition::new(0.5, -0.01).is_err());
        assert!(SpeakerPosition::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn feature_vec_rejects_non_finite() {
        assert!(FeatureVec::new(Source::Rgb, alloc::vec![1.0, f64::INFINITY]).is_err());
        assert!(FeatureVec::new(Source::Rgb, alloc::vec![]).is_err());
    }
}
