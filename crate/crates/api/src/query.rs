//! Query-string parsing for `/images` and `/export`.

use seacat_core::catalog::{GeoBox, QueryFilter, VerificationState};

use crate::error::ApiError;

pub const FILTER_PARAMS: [&str; 12] = [
    "concept",
    "descendants",
    "minlat",
    "maxlat",
    "minlon",
    "maxlon",
    "mindepth",
    "maxdepth",
    "imaging_type",
    "state",
    "page",
    "page_size",
];

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ApiError> {
    v.trim().parse().map_err(|_| ApiError::bad_request(key, format!("{v:?} is not a number")))
}

fn finite(key: &str, v: &str) -> Result<f64, ApiError> {
    let x: f64 = number(key, v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ApiError::bad_request(key, "must be finite"))
    }
}

pub fn parse_bool(key: &str, v: &str) -> Result<bool, ApiError> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ApiError::bad_request(key, format!("{v:?} is not a boolean"))),
    }
}

/// Builds a filter from query pairs. Unknown and repeated keys are
/// rejected rather than ignored.
pub fn parse_filter(pairs: &[(String, String)], allowed: &[&str]) -> Result<QueryFilter, ApiError> {
    let mut f = QueryFilter::default();
    let mut seen: Vec<&str> = Vec::new();
    let (mut minlat, mut maxlat, mut minlon, mut maxlon) = (None, None, None, None);
    let (mut mindepth, mut maxdepth) = (None, None);
    for (k, v) in pairs {
        let Some(key) = allowed.iter().find(|a| **a == k.as_str()) else {
            return Err(ApiError::bad_request(k.as_str(), "unknown query parameter"));
        };
        if seen.contains(key) {
            return Err(ApiError::bad_request(*key, "given more than once"));
        }
        seen.push(key);
        match *key {
            "concept" => {
                if v.trim().is_empty() {
                    return Err(ApiError::bad_request("concept", "must not be empty"));
                }
                f.concept = Some(v.clone());
            }
            "descendants" => f.include_descendants = parse_bool(key, v)?,
            "minlat" => minlat = Some(finite(key, v)?),
            "maxlat" => maxlat = Some(finite(key, v)?),
            "minlon" => minlon = Some(finite(key, v)?),
            "maxlon" => maxlon = Some(finite(key, v)?),
            "mindepth" => mindepth = Some(finite(key, v)?),
            "maxdepth" => maxdepth = Some(finite(key, v)?),
            "imaging_type" => f.imaging_type = Some(v.clone()),
            "state" => {
                f.verification =
                    Some(v.parse::<VerificationState>().map_err(|m| ApiError::bad_request("state", m))?)
            }
            "page" => f.page = number(key, v)?,
            "page_size" => f.page_size = number(key, v)?,
            _ => unreachable!("allowed list and match arms agree"),
        }
    }
    if minlat.is_some() || maxlat.is_some() || minlon.is_some() || maxlon.is_some() {
        f.geo = Some(GeoBox {
            min_lat: minlat.unwrap_or(-90.0),
            max_lat: maxlat.unwrap_or(90.0),
            min_lon: minlon.unwrap_or(-180.0),
            max_lon: maxlon.unwrap_or(180.0),
        });
    }
    if mindepth.is_some() || maxdepth.is_some() {
        f.depth = Some((mindepth.unwrap_or(f64::NEG_INFINITY), maxdepth.unwrap_or(f64::INFINITY)));
    }
    seacat_core::catalog::validate_filter(&f)?;
    Ok(f)
}
