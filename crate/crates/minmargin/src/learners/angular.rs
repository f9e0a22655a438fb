//! Hard-margin linear separator through the origin for 2-D data on the unit
//! circle, parameterized purely by its boundary angle.
//!
//! With positive examples at angles θᵢ ∈ [0, π/2] and negatives at −θ̃ⱼ
//! (θ̃ⱼ ∈ [0, π/2]), the maximum-margin through-origin separator bisects the
//! gap between the two innermost points: boundary = (min θᵢ − min θ̃ⱼ)/2.

use super::{DiscriminantModel, ModelDump};
use crate::data::Row;
use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

pub(super) const KIND: &str = "angular-svm";

/// Through-origin linear separator: positive iff the point's angle exceeds
/// `boundary_angle`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularSvm {
    boundary_angle: f64,
}

impl AngularSvm {
    pub fn new(boundary_angle: f64) -> Result<AngularSvm> {
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&boundary_angle) {
            return Err(Error::InvalidData(format!(
                "boundary angle {boundary_angle} outside [-pi/2, pi/2]"
            )));
        }
        Ok(AngularSvm { boundary_angle })
    }

    pub fn boundary_angle(&self) -> f64 {
        self.boundary_angle
    }

    /// Classify a point given by its angle: positive iff above the boundary.
    pub fn classify_angle(&self, theta: f64) -> bool {
        theta > self.boundary_angle
    }

    pub(super) fn from_dump(dump: &ModelDump) -> Result<AngularSvm> {
        let angle = dump
            .weights
            .first()
            .and_then(|w| w.first())
            .copied()
            .ok_or_else(|| {
                Error::InvalidData(format!("bad {KIND} dump: missing boundary angle"))
            })?;
        AngularSvm::new(angle)
    }
}

impl DiscriminantModel for AngularSvm {
    fn num_classes(&self) -> usize {
        2
    }

    fn input_dim(&self) -> usize {
        2
    }

    /// Scores are ± the signed distance to the boundary line: class 1
    /// (positive side) gets sin(θ − boundary)·‖z‖, class 0 its negation.
    fn score_into(&self, z: Row<'_>, out: &mut [f64]) {
        let (x, y) = (z.get(0), z.get(1));
        let theta = y.atan2(x);
        let signed = (theta - self.boundary_angle).sin() * x.hypot(y);
        out[0] = -signed;
        out[1] = signed;
    }

    fn dump(&self) -> ModelDump {
        ModelDump {
            kind: KIND.to_string(),
            dims: vec![2, 2],
            weights: vec![vec![self.boundary_angle]],
        }
    }
}

/// Fit the angular separator.
///
/// `positives` are angles in [0, π/2]; `negatives` are the actual (signed)
/// angles of the negative class, in [−π/2, 0].
pub fn train_angular_svm(positives: &[f64], negatives: &[f64]) -> Result<AngularSvm> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::Train(
            "angular separator needs at least one example per class".into(),
        ));
    }
    if positives.iter().any(|&t| !(0.0..=FRAC_PI_2).contains(&t)) {
        return Err(Error::InvalidData(
            "positive angles must lie in [0, pi/2]".into(),
        ));
    }
    if negatives.iter().any(|&t| !(-FRAC_PI_2..=0.0).contains(&t)) {
        return Err(Error::InvalidData(
            "negative angles must lie in [-pi/2, 0]".into(),
        ));
    }
    let min_pos = positives.iter().cloned().fold(f64::INFINITY, f64::min);
    // Negative magnitudes θ̃ⱼ = −angle; the innermost negative has the
    // smallest magnitude, i.e. the largest signed angle.
    let min_neg_magnitude = -negatives.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    AngularSvm::new((min_pos - min_neg_magnitude) / 2.0)
}
