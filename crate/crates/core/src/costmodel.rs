//! Annotation cost arithmetic for crowd-sourced and expert labeling.
//!
//! Money is rounded half-up to whole currency units, and only by
//! [`estimate_cost`]. Instantiate with `Rational64` for exact results.
//!
//! Worked figures: 17,751 + 8,417 hours at $3.25/h is $85,046. 1.4M
//! images at 92.4 images/h is about 15,151.5 h for one pass; five times the
//! truncated 15,151 h is 75,755 h, which costs $246,203.75 at $3.25/h. An
//! even split of 66,039 expert images at $1 and $3 per image is $132,078;
//! a total of $165,100 would need 49,530.5 benthic images, so no integer
//! split of that count reaches it.

use crate::Scalar;

pub const CROWD_HOURLY_RATE: f64 = 3.25;
pub const EXPERT_HOURLY_RATE: f64 = 80.0;
pub const CATEGORY_LABELS_PER_HOUR: f64 = 92.4;
pub const MIDWATER_COST_PER_IMAGE: f64 = 1.0;
pub const BENTHIC_COST_PER_IMAGE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CostError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must not be negative, got {value}")]
    Negative { name: &'static str, value: f64 },
}

fn positive<T: Scalar>(name: &'static str, v: T) -> Result<T, CostError> {
    if v > T::zero() && v.is_finite_value() {
        Ok(v)
    } else {
        Err(CostError::NonPositive { name, value: v.to_f64() })
    }
}

fn non_negative<T: Scalar>(name: &'static str, v: T) -> Result<T, CostError> {
    if v >= T::zero() && v.is_finite_value() {
        Ok(v)
    } else {
        Err(CostError::Negative { name, value: v.to_f64() })
    }
}

/// Worker hours to label `images`, each seen by `redundancy` workers.
pub fn estimate_hours<T: Scalar>(images: T, images_per_hour: T, redundancy: T) -> Result<T, CostError> {
    let images = positive("images", images)?;
    let rate = positive("images per hour", images_per_hour)?;
    let redundancy = positive("redundancy", redundancy)?;
    Ok(images * redundancy / rate)
}

/// `hours * hourly_rate`, rounded half-up to whole units.
pub fn estimate_cost<T: Scalar>(hours: T, hourly_rate: T) -> Result<T, CostError> {
    let hours = positive("hours", hours)?;
    let rate = positive("hourly rate", hourly_rate)?;
    Ok((hours * rate).round_half_up())
}

/// Expert labeling priced per image for the two habitats. Not rounded.
pub fn expert_cost<T: Scalar>(
    midwater_images: T,
    benthic_images: T,
    midwater_rate_per_image: T,
    benthic_rate_per_image: T,
) -> Result<T, CostError> {
    Ok(non_negative("midwater images", midwater_images)? * non_negative("midwater rate", midwater_rate_per_image)?
        + non_negative("benthic images", benthic_images)? * non_negative("benthic rate", benthic_rate_per_image)?)
}

/// Inputs for a crowd or expert labor estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaborSpec<T> {
    Hours { hours: T, hourly_rate: T },
    Images { images: T, images_per_hour: T, redundancy: T, hourly_rate: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate<T> {
    pub hours: T,
    pub cost: T,
}

pub fn estimate<T: Scalar>(spec: LaborSpec<T>) -> Result<CostEstimate<T>, CostError> {
    let (hours, rate) = match spec {
        LaborSpec::Hours { hours, hourly_rate } => (positive("hours", hours)?, hourly_rate),
        LaborSpec::Images { images, images_per_hour, redundancy, hourly_rate } => {
            (estimate_hours(images, images_per_hour, redundancy)?, hourly_rate)
        }
    };
    Ok(CostEstimate { hours, cost: estimate_cost(hours, rate)? })
}
