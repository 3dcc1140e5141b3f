//! Darwin Core-style uploads: a CSV of boxes plus a `.meta` sidecar of
//! collection fields.
//!
//! CSV columns, in export order:
//!
//! ```text
//! image_url,x,y,width,height,concept,altconcept,latitude,longitude,depth_m,
//! timestamp,imaging_type,observer,altitude_m,group_of,occluded,truncated,
//! width_px,height_px
//! ```
//!
//! `image_url`, `x`, `y`, `width`, `height` and `concept` are required.
//! Rows sharing an `image_url` become one image with several boxes. Boxes
//! use a top-left origin with y increasing downward. Numbers use `.` as the
//! decimal separator; booleans accept `true/false/1/0` in any case.
//!
//! The sidecar holds one `key=value` per line (`#` starts a comment). Keys
//! are the snake_case field names of [`Collection`].

use std::collections::HashMap;
use std::io::Write;

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, Utc};
use serde::Serialize;
use uuid::Uuid;

use crate::catalog::{
    validate_collection, Catalog, CatalogError, Collection, CollectionField, ImageEntry, ImageRecord, Localization,
    RECORD_TYPE_IMAGES,
};
use crate::{BoundingBox, Scalar};

pub const REQUIRED_COLUMNS: [&str; 6] = ["image_url", "x", "y", "width", "height", "concept"];
pub const RECOMMENDED_COLUMNS: [&str; 7] =
    ["latitude", "longitude", "depth_m", "timestamp", "imaging_type", "observer", "altitude_m"];
pub const SUGGESTED_COLUMNS: [&str; 4] = ["altconcept", "group_of", "occluded", "truncated"];

/// Canonical column order.
pub const COLUMNS: [&str; 17] = [
    "image_url",
    "x",
    "y",
    "width",
    "height",
    "concept",
    "altconcept",
    "latitude",
    "longitude",
    "depth_m",
    "timestamp",
    "imaging_type",
    "observer",
    "altitude_m",
    "group_of",
    "occluded",
    "truncated",
];

/// Image pixel dimensions, appended after the canonical columns.
pub const DIMENSION_COLUMNS: [&str; 2] = ["width_px", "height_px"];

const RECOMMENDED_META: [&str; 4] = ["bibliographic_citation", "access_rights", "basis_of_record", "dataset_language"];

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("input is not valid UTF-8")]
    NotUtf8,
    #[error("csv: {0}")]
    Csv(String),
    #[error("missing required column {0:?}")]
    MissingColumn(&'static str),
    #[error("duplicate column {0:?}")]
    DuplicateColumn(String),
    #[error("meta line {line}: {message}")]
    Meta { line: usize, message: String },
    #[error("missing required collection field: {0}")]
    MissingField(CollectionField),
    #[error("invalid collection field {field}: {message}")]
    InvalidField { field: String, message: String },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    pub row: u64,
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_accepted: usize,
    pub errors: Vec<RowError>,
    pub warnings: Vec<String>,
}

impl IngestReport {
    pub fn error_rows(&self) -> usize {
        let mut rows: Vec<u64> = self.errors.iter().map(|e| e.row).collect();
        rows.dedup();
        rows.len()
    }

    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ParsedCollection {
    pub collection: Collection,
    pub images: Vec<ImageEntry>,
    pub report: IngestReport,
}

/// Parses a `.meta` sidecar into a validated [`Collection`]. Missing
/// recommended fields are appended to `warnings`.
pub fn parse_meta(text: &str, warnings: &mut Vec<String>) -> Result<Collection, IngestError> {
    let mut values: HashMap<String, String> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| IngestError::Meta {
            line: i + 1,
            message: "expected key=value".into(),
        })?;
        let key = k.trim().to_ascii_lowercase();
        if values.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(IngestError::Meta { line: i + 1, message: format!("duplicate key {key:?}") });
        }
    }

    let mut take = |field: CollectionField| -> Result<String, IngestError> {
        values
            .remove(field.key())
            .filter(|v| !v.is_empty())
            .ok_or(IngestError::MissingField(field))
    };
    let owner = take(CollectionField::OwnerInstitution)?;
    let rights = take(CollectionField::RightsHolder)?;
    let email = take(CollectionField::ContributorEmail)?;
    let record_type = take(CollectionField::RecordType)?;
    let modified_raw = take(CollectionField::Modified)?;
    let uuid_raw = take(CollectionField::Uuid)?;
    let url = take(CollectionField::Url)?;
    let data_format = take(CollectionField::DataFormat)?;

    let invalid = |field: CollectionField, message: String| IngestError::InvalidField {
        field: field.label().to_string(),
        message,
    };
    let uuid = Uuid::parse_str(&uuid_raw).map_err(|e| invalid(CollectionField::Uuid, e.to_string()))?;
    let modified = parse_timestamp(&modified_raw).map_err(|e| invalid(CollectionField::Modified, e))?;
    if record_type != RECORD_TYPE_IMAGES {
        return Err(invalid(CollectionField::RecordType, format!("must be {RECORD_TYPE_IMAGES:?}")));
    }

    let mut c = Collection::new(uuid, owner, email, url);
    c.rights_holder = rights;
    c.record_type = record_type;
    c.modified = modified;
    c.data_format = data_format;

    let mut rest: Vec<(String, String)> = values.into_iter().collect();
    rest.sort();
    for (key, value) in rest {
        match c.optional_field_mut(&key) {
            Some(slot) => *slot = Some(value).filter(|v| !v.is_empty()),
            None => warnings.push(format!("meta: ignored unknown key {key:?}")),
        }
    }
    for key in RECOMMENDED_META {
        if c.optional_field_mut(key).is_some_and(|v| v.is_none()) {
            warnings.push(format!("meta: missing recommended field {key:?}"));
        }
    }
    validate_collection(&c).map_err(|e| match e {
        CatalogError::MissingField(f) => IngestError::MissingField(f),
        other => IngestError::Catalog(other),
    })?;
    Ok(c)
}

pub fn write_meta(c: &Collection) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: &str| {
        out.push_str(k);
        out.push('=');
        out.push_str(&v.replace(['\n', '\r'], " "));
        out.push('\n');
    };
    line("owner_institution", &c.owner_institution);
    line("rights_holder", &c.rights_holder);
    line("contributor_email", &c.contributor_email);
    line("record_type", &c.record_type);
    line("modified", &format_timestamp(&c.modified));
    line("uuid", &c.uuid.to_string());
    line("url", &c.url);
    line("data_format", &c.data_format);
    for (k, v) in c.optional_fields() {
        if let Some(v) = v {
            line(k, v);
        }
    }
    out
}

/// Accepts RFC 3339, a naive `YYYY-MM-DDTHH:MM:SS[.f]` (read as UTC), or a
/// bare date.
pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.and_utc());
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight").and_utc());
    }
    Err(format!("{s:?} is not an ISO 8601 timestamp"))
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(format!("{s:?} is not a boolean (true/false/1/0)")),
    }
}

/// One CSV row after field-level parsing.
struct Row {
    image: ImageRecord,
    loc: Localization,
}

struct Columns {
    index: HashMap<&'static str, usize>,
}

impl Columns {
    fn get<'r>(&self, rec: &'r csv::StringRecord, name: &str) -> Option<&'r str> {
        self.index.get(name).and_then(|&i| rec.get(i)).map(str::trim).filter(|v| !v.is_empty())
    }
}

fn parse_row(cols: &Columns, rec: &csv::StringRecord, errors: &mut Vec<(String, String)>) -> Option<Row> {
    let mut err = |f: &str, m: String| errors.push((f.to_string(), m));

    let mut required = |name: &str| {
        let v = cols.get(rec, name);
        if v.is_none() {
            err(name, "required value is empty".into());
        }
        v
    };
    let url = required("image_url");
    let raw_box = [required("x"), required("y"), required("width"), required("height")];
    let concept = required("concept");

    let mut num = |name: &str, raw: Option<&str>| -> Option<f64> {
        let v = raw?;
        match f64::parse_decimal(v) {
            Some(n) => Some(n),
            None => {
                errors.push((name.to_string(), format!("{v:?} is not a number")));
                None
            }
        }
    };
    let bx: Vec<Option<f64>> =
        ["x", "y", "width", "height"].iter().zip(raw_box).map(|(n, raw)| num(n, raw)).collect();
    let latitude = num("latitude", cols.get(rec, "latitude"));
    let longitude = num("longitude", cols.get(rec, "longitude"));
    let depth_m = num("depth_m", cols.get(rec, "depth_m"));
    let altitude_m = num("altitude_m", cols.get(rec, "altitude_m"));

    let mut dim = |name: &str| -> Option<u32> {
        let v = cols.get(rec, name)?;
        match v.parse::<u32>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                errors.push((name.to_string(), format!("{v:?} is not a positive integer")));
                None
            }
        }
    };
    let width_px = dim("width_px");
    let height_px = dim("height_px");

    let timestamp = cols.get(rec, "timestamp").and_then(|v| match parse_timestamp(v) {
        Ok(t) => Some(t),
        Err(m) => {
            errors.push(("timestamp".into(), m));
            None
        }
    });
    let mut flag = |name: &str| -> Option<bool> {
        let v = cols.get(rec, name)?;
        parse_bool(v).map_err(|m| errors.push((name.to_string(), m))).ok()
    };
    let group_of = flag("group_of");
    let occluded = flag("occluded");
    let truncated = flag("truncated");

    let mut image = ImageRecord::new(url.unwrap_or_default());
    image.width_px = width_px;
    image.height_px = height_px;
    image.latitude = latitude;
    image.longitude = longitude;
    image.depth_m = depth_m;
    image.timestamp = timestamp;
    image.imaging_type = cols.get(rec, "imaging_type").map(str::to_string);
    image.observer = cols.get(rec, "observer").map(str::to_string);
    image.altitude_m = altitude_m;
    if url.is_some() {
        if let Err((field, message)) = crate::catalog::validate_image(&image) {
            errors.push((field, message));
        }
    }

    let bbox = match bx.as_slice() {
        [Some(x), Some(y), Some(w), Some(h)] => {
            let b = BoundingBox::new(*x, *y, *w, *h);
            match b.validate(image.frame()) {
                Ok(()) => Some(b),
                Err(e) => {
                    errors.push(("bbox".into(), e.to_string()));
                    None
                }
            }
        }
        _ => None,
    };

    if !errors.is_empty() {
        return None;
    }
    let mut loc = Localization::new(concept?, bbox?);
    loc.alt_concept = cols.get(rec, "altconcept").map(str::to_string);
    loc.group_of = group_of;
    loc.occluded = occluded;
    loc.truncated = truncated;
    loc.observer = image.observer.clone();
    Some(Row { image, loc })
}

/// Fills unset image-level fields of `into` from `from`; a field set in
/// both with different values is a conflict and nothing is changed.
fn merge_image(into: &mut ImageRecord, from: &ImageRecord) -> Result<(), (String, String)> {
    fn check<T: PartialEq + std::fmt::Debug>(name: &str, a: &Option<T>, b: &Option<T>) -> Result<(), (String, String)> {
        match (a, b) {
            (Some(x), Some(y)) if x != y => {
                Err((name.to_string(), format!("conflicts with an earlier row for this image ({x:?} vs {y:?})")))
            }
            _ => Ok(()),
        }
    }
    check("width_px", &into.width_px, &from.width_px)?;
    check("height_px", &into.height_px, &from.height_px)?;
    check("latitude", &into.latitude, &from.latitude)?;
    check("longitude", &into.longitude, &from.longitude)?;
    check("depth_m", &into.depth_m, &from.depth_m)?;
    check("timestamp", &into.timestamp, &from.timestamp)?;
    check("imaging_type", &into.imaging_type, &from.imaging_type)?;
    check("altitude_m", &into.altitude_m, &from.altitude_m)?;
    fn fill<T: Clone>(a: &mut Option<T>, b: &Option<T>) {
        if a.is_none() {
            a.clone_from(b);
        }
    }
    fill(&mut into.width_px, &from.width_px);
    fill(&mut into.height_px, &from.height_px);
    fill(&mut into.latitude, &from.latitude);
    fill(&mut into.longitude, &from.longitude);
    fill(&mut into.depth_m, &from.depth_m);
    fill(&mut into.timestamp, &from.timestamp);
    fill(&mut into.imaging_type, &from.imaging_type);
    fill(&mut into.observer, &from.observer);
    fill(&mut into.altitude_m, &from.altitude_m);
    Ok(())
}

/// Parses an upload. File-level problems are errors; row-level problems
/// land in the report and the offending rows are dropped.
pub fn parse_collection_csv(meta: &str, csv_bytes: &[u8]) -> Result<ParsedCollection, IngestError> {
    let mut warnings = Vec::new();
    let collection = parse_meta(meta, &mut warnings)?;
    let (images, mut report) = parse_images_csv(csv_bytes)?;
    warnings.append(&mut report.warnings);
    report.warnings = warnings;
    Ok(ParsedCollection { collection, images, report })
}

/// Parses just the image CSV.
pub fn parse_images_csv(csv_bytes: &[u8]) -> Result<(Vec<ImageEntry>, IngestReport), IngestError> {
    let text = std::str::from_utf8(csv_bytes).map_err(|_| IngestError::NotUtf8)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| IngestError::Csv(e.to_string()))?.clone();

    let mut report = IngestReport::default();
    let mut index = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        let h = h.trim().to_ascii_lowercase();
        match COLUMNS.iter().chain(DIMENSION_COLUMNS.iter()).find(|c| **c == h) {
            Some(c) => {
                if index.insert(*c, i).is_some() {
                    return Err(IngestError::DuplicateColumn(h));
                }
            }
            None => report.warnings.push(format!("ignored unknown column {h:?}")),
        }
    }
    for col in REQUIRED_COLUMNS {
        if !index.contains_key(col) {
            return Err(IngestError::MissingColumn(col));
        }
    }
    for col in RECOMMENDED_COLUMNS {
        if !index.contains_key(col) {
            report.warnings.push(format!("missing recommended column {col:?}"));
        }
    }
    let cols = Columns { index };

    let mut images: Vec<ImageEntry> = Vec::new();
    let mut by_url: HashMap<String, usize> = HashMap::new();
    let mut loc_rows: Vec<Vec<u64>> = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(IngestError::Csv(e.to_string())),
        }
        let row = record.position().map_or(0, |p| p.line());
        report.rows_read += 1;
        let mut errs = Vec::new();
        let parsed = parse_row(&cols, &record, &mut errs);
        let outcome = match parsed {
            None => Err(errs),
            Some(Row { image, loc }) => match by_url.get(&image.image_url) {
                Some(&i) => match merge_image(&mut images[i].image, &image) {
                    Ok(()) => {
                        images[i].localizations.push(loc);
                        loc_rows[i].push(row);
                        Ok(())
                    }
                    Err(e) => Err(vec![e]),
                },
                None => {
                    by_url.insert(image.image_url.clone(), images.len());
                    images.push(ImageEntry { image, localizations: vec![loc] });
                    loc_rows.push(vec![row]);
                    Ok(())
                }
            },
        };
        match outcome {
            Ok(()) => report.rows_accepted += 1,
            Err(errs) => report
                .errors
                .extend(errs.into_iter().map(|(field, message)| RowError { row, field, message })),
        }
    }

    // Dimensions may arrive on a later row than a box; re-check every box
    // against the merged frame.
    for (entry, rows) in images.iter_mut().zip(&loc_rows) {
        let frame = entry.image.frame();
        let mut keep = Vec::with_capacity(entry.localizations.len());
        for (loc, row) in entry.localizations.drain(..).zip(rows) {
            match loc.bbox.validate(frame) {
                Ok(()) => keep.push(loc),
                Err(e) => {
                    report.rows_accepted -= 1;
                    report.errors.push(RowError { row: *row, field: "bbox".into(), message: e.to_string() });
                }
            }
        }
        entry.localizations = keep;
    }
    images.retain(|e| !e.localizations.is_empty());
    report.errors.sort_by_key(|e| e.row);
    Ok((images, report))
}

fn fmt_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// Writes images and their boxes in the canonical column order. Images
/// without boxes have no row to carry them and are skipped.
pub fn write_images_csv<W: Write>(entries: &[ImageEntry], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    write_header(&mut w)?;
    for e in entries {
        write_entry(&mut w, e)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_header() -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        write_header(&mut w).expect("write to Vec");
        w.flush().expect("write to Vec");
    }
    buf
}

/// CSV rows for one image, no header.
pub fn csv_rows(entry: &ImageEntry) -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut buf);
        write_entry(&mut w, entry).expect("write to Vec");
        w.flush().expect("write to Vec");
    }
    buf
}

fn write_header<W: Write>(w: &mut csv::Writer<W>) -> Result<(), csv::Error> {
    w.write_record(COLUMNS.iter().chain(DIMENSION_COLUMNS.iter()))
}

fn write_entry<W: Write>(w: &mut csv::Writer<W>, e: &ImageEntry) -> Result<(), csv::Error> {
    let img = &e.image;
    for loc in &e.localizations {
        let b = &loc.bbox;
        w.write_record([
            img.image_url.clone(),
            b.x.to_string(),
            b.y.to_string(),
            b.width.to_string(),
            b.height.to_string(),
            loc.concept.clone(),
            fmt_opt(&loc.alt_concept),
            fmt_opt(&img.latitude),
            fmt_opt(&img.longitude),
            fmt_opt(&img.depth_m),
            img.timestamp.as_ref().map(format_timestamp).unwrap_or_default(),
            fmt_opt(&img.imaging_type),
            fmt_opt(&loc.observer),
            fmt_opt(&img.altitude_m),
            fmt_opt(&loc.group_of),
            fmt_opt(&loc.occluded),
            fmt_opt(&loc.truncated),
            fmt_opt(&img.width_px),
            fmt_opt(&img.height_px),
        ])?;
    }
    Ok(())
}

/// CSV of one stored collection, images in upload order.
pub fn export_collection_csv(catalog: &Catalog, collection: Uuid) -> Result<Vec<u8>, IngestError> {
    let entries = catalog.collection_entries(collection)?;
    let mut buf = Vec::new();
    write_images_csv(&entries, &mut buf).map_err(|e| IngestError::Csv(e.to_string()))?;
    Ok(buf)
}

/// The `.meta` sidecar of one stored collection.
pub fn export_collection_meta(catalog: &Catalog, collection: Uuid) -> Result<String, IngestError> {
    let c = catalog.collection(collection).ok_or(CatalogError::UnknownCollection(collection))?;
    Ok(write_meta(&c))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const META: &str = "owner_institution=MBARI\nrights_holder=MBARI\ncontributor_email=a@mbari.org\n\
record_type=images\nmodified=2021-10-01T00:00:00Z\nuuid=6f1e1b0c-1a2b-4c3d-8e9f-0a1b2c3d4e5f\n\
url=https://example.org/c\ndata_format=CSV\n";

    fn header() -> String {
        COLUMNS.join(",")
    }

    #[test]
    fn single_row_minimal_columns() {
        let csv = "image_url,x,y,width,height,concept\nurl,10,20,30,40,Aegina\n";
        let p = parse_collection_csv(META, csv.as_bytes()).unwrap();
        assert_eq!(p.images.len(), 1);
        assert_eq!(p.images[0].localizations.len(), 1);
        let loc = &p.images[0].localizations[0];
        assert_eq!(loc.concept, "Aegina");
        assert_eq!(loc.bbox, BoundingBox::new(10.0, 20.0, 30.0, 40.0));
        assert_eq!((p.report.rows_read, p.report.rows_accepted), (1, 1));
        assert_eq!(
            p.report.warnings.iter().filter(|w| w.starts_with("missing recommended column")).count(),
            RECOMMENDED_COLUMNS.len()
        );
    }

    #[test]
    fn missing_concept_column_is_file_level() {
        let csv = "image_url,x,y,width,height\nurl,10,20,30,40\n";
        let err = parse_collection_csv(META, csv.as_bytes()).unwrap_err();
        assert!(matches!(err, IngestError::MissingColumn("concept")));
    }

    #[test]
    fn same_url_rows_merge() {
        let csv = "image_url,x,y,width,height,concept\nu,0,0,5,5,Aegina\nu,10,10,5,5,Medusae\n";
        let p = parse_collection_csv(META, csv.as_bytes()).unwrap();
        assert_eq!(p.images.len(), 1);
        assert_eq!(p.images[0].localizations.len(), 2);
    }

    #[test]
    fn row_errors_carry_row_and_field() {
        let csv = format!(
            "{}\n\
             a,1,1,5,5,Aegina,,,,,,,,,,,\n\
             b,x,1,5,5,Aegina,,,,,,,,,,,\n\
             c,1,1,0,5,Aegina,,,,,,,,,,,\n\
             d,1,1,5,5,Aegina,,95,0,,,,,,,,\n\
             e,1,1,5,5,Aegina,,,,,2021-13-45,,,,,,\n\
             f,1,1,5,5,Aegina,,,,,,,,,maybe,,\n\
             g,1,1,5,5,Aegina,,,,-3,,,,,,,\n",
            header()
        );
        let p = parse_collection_csv(META, csv.as_bytes()).unwrap();
        assert_eq!(p.report.rows_read, 7);
        assert_eq!(p.report.rows_accepted, 1);
        assert_eq!(p.report.rows_accepted + p.report.error_rows(), p.report.rows_read);
        let fields: Vec<(u64, &str)> = p.report.errors.iter().map(|e| (e.row, e.field.as_str())).collect();
        assert_eq!(
            fields,
            [(3, "x"), (4, "bbox"), (5, "latitude"), (6, "timestamp"), (7, "group_of"), (8, "depth_m")]
        );
        assert_eq!(p.images.len(), 1);
    }

    #[test]
    fn box_outside_known_frame_is_rejected_even_if_dims_come_later() {
        let csv = "image_url,x,y,width,height,concept,width_px,height_px\n\
                   u,90,0,20,5,Aegina,,\n\
                   u,0,0,5,5,Aegina,100,100\n";
        let p = parse_collection_csv(META, csv.as_bytes()).unwrap();
        assert_eq!(p.report.rows_accepted, 1);
        assert_eq!(p.report.errors[0].row, 2);
        assert_eq!(p.images[0].localizations.len(), 1);
    }

    #[test]
    fn conflicting_image_metadata_is_a_row_error() {
        let csv = "image_url,x,y,width,height,concept,depth_m\nu,0,0,5,5,Aegina,100\nu,0,0,5,5,Aegina,200\n";
        let p = parse_collection_csv(META, csv.as_bytes()).unwrap();
        assert_eq!(p.report.errors.len(), 1);
        assert_eq!(p.report.errors[0].field, "depth_m");
    }

    #[test]
    fn booleans_and_timestamps() {
        assert_eq!(parse_bool("TRUE"), Ok(true));
        assert_eq!(parse_bool("0"), Ok(false));
        assert!(parse_bool("yes").is_err());
        assert_eq!(parse_timestamp("2021-10-01").unwrap(), parse_timestamp("2021-10-01T00:00:00Z").unwrap());
        assert_eq!(
            parse_timestamp("2021-10-01T08:00:00-07:00").unwrap(),
            parse_timestamp("2021-10-01T15:00:00").unwrap()
        );
        assert!(parse_timestamp("01/10/2021").is_err());
    }

    #[test]
    fn every_required_meta_field_is_named_when_missing() {
        for field in CollectionField::REQUIRED {
            let meta: String = META
                .lines()
                .filter(|l| !l.starts_with(&format!("{}=", field.key())))
                .map(|l| format!("{l}\n"))
                .collect();
            let err = parse_meta(&meta, &mut Vec::new()).unwrap_err();
            assert!(matches!(err, IngestError::MissingField(f) if f == field), "{field}: {err}");
            assert!(err.to_string().contains(field.label()));
        }
    }

    #[test]
    fn meta_round_trip_and_warnings() {
        let mut warnings = Vec::new();
        let c = parse_meta(&format!("{META}dataset_name=test\nbogus=1\n"), &mut warnings).unwrap();
        assert_eq!(c.dataset_name.as_deref(), Some("test"));
        assert!(warnings.iter().any(|w| w.contains("bogus")));
        assert_eq!(warnings.iter().filter(|w| w.contains("missing recommended field")).count(), 4);
        let again = parse_meta(&write_meta(&c), &mut Vec::new()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn header_only_export() {
        let mut buf = Vec::new();
        write_images_csv(&[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.trim_end(), format!("{},width_px,height_px", COLUMNS.join(",")));
    }

    #[test]
    fn not_utf8() {
        assert!(matches!(parse_images_csv(&[0xff, 0xfe, 0x00]), Err(IngestError::NotUtf8)));
    }
}
