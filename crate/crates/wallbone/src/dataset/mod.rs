//! Specimen database: domain types, CSV ingestion, scope filtering, and
//! backbone polylines.
//!
//! The CSV schema is a header row of canonical column names with unit
//! suffixes (`fc_mpa`, `rho_l_frac`, `lw_mm`, `Vcr_kn`, ...), UTF-8, `.`
//! decimal separator. Reinforcement ratios are stored as fractions; a
//! `_pct` suffix in the header declares percent and is converted on load.
//! Backbone target columns are optional as a group so the same loader reads
//! training databases and bare prediction inputs. Rows that fail invariants
//! are reported with their line numbers and skipped rather than aborting
//! the load.

mod extract;
mod synthetic;

pub use extract::{
    averaged_envelope, extract_backbone, read_hysteresis_csv, ExtractConfig, ExtractError,
    HysteresisRecord, YieldStrategy,
};
pub use synthetic::{
    backbone_with_noise, feature_ranges, generate_synthetic_database, noise_free_backbone,
    wall_from_features, FeatureRange, DOMINANT_FEATURES,
};

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("csv schema: {0}")]
    SchemaMismatch(String),
    #[error("csv units: {0}")]
    UnitError(String),
    #[error("invalid backbone: {0}")]
    InvalidBackbone(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureMode {
    /// Reached shear strength before flexural yielding.
    Shear,
    /// Both damage types: shear-flexure interaction.
    ShearFlexure,
    /// Yielded in flexure first.
    Flexure,
}

impl FailureMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailureMode::Shear => "S",
            FailureMode::ShearFlexure => "SF",
            FailureMode::Flexure => "F",
        }
    }

    pub fn parse(s: &str) -> Option<FailureMode> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S" => Some(FailureMode::Shear),
            "SF" => Some(FailureMode::ShearFlexure),
            "F" => Some(FailureMode::Flexure),
            _ => None,
        }
    }
}

impl fmt::Display for FailureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectionShape {
    Rectangular,
    Barbell,
    Flanged,
}

impl SectionShape {
    pub fn as_str(&self) -> &'static str {
        match self {
            SectionShape::Rectangular => "rectangular",
            SectionShape::Barbell => "barbell",
            SectionShape::Flanged => "flanged",
        }
    }

    pub fn parse(s: &str) -> Option<SectionShape> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rectangular" => Some(SectionShape::Rectangular),
            "barbell" => Some(SectionShape::Barbell),
            "flanged" => Some(SectionShape::Flanged),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndCondition {
    Cantilever,
    FixedTop,
}

impl EndCondition {
    pub fn as_str(&self) -> &'static str {
        match self {
            EndCondition::Cantilever => "cantilever",
            EndCondition::FixedTop => "fixed_top",
        }
    }

    pub fn parse(s: &str) -> Option<EndCondition> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cantilever" => Some(EndCondition::Cantilever),
            "fixed_top" => Some(EndCondition::FixedTop),
            _ => None,
        }
    }
}

/// One tested wall: the twelve default design-property features, geometry,
/// and classification metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallSpecimen {
    pub id: String,
    /// Concrete compressive strength f'c [MPa].
    pub concrete_strength: f64,
    /// Longitudinal web reinforcement yield strength f_yl [MPa].
    pub web_long_yield: f64,
    /// Transverse web reinforcement yield strength f_yt [MPa].
    pub web_transv_yield: f64,
    /// Longitudinal boundary reinforcement yield strength f_ybl [MPa].
    pub boundary_long_yield: f64,
    /// Transverse boundary reinforcement yield strength f_ysh [MPa].
    pub boundary_transv_yield: f64,
    /// Longitudinal web reinforcement ratio rho_l [fraction].
    pub web_long_ratio: f64,
    /// Transverse web reinforcement ratio rho_t [fraction].
    pub web_transv_ratio: f64,
    /// Longitudinal boundary reinforcement ratio rho_bl [fraction].
    pub boundary_long_ratio: f64,
    /// Transverse boundary reinforcement ratio rho_sh [fraction].
    pub boundary_transv_ratio: f64,
    /// Axial load ratio P / (A_g * f'c).
    pub axial_load_ratio: f64,
    /// Aspect ratio h_w / l_w.
    pub aspect_ratio: f64,
    /// Shear span ratio M / (V * l_w).
    pub shear_span_ratio: f64,
    /// Wall length l_w [mm].
    pub wall_length: f64,
    /// Wall thickness t_w [mm].
    pub wall_thickness: f64,
    /// Wall height h_w [mm].
    pub wall_height: f64,
    /// Stirrup spacing s [mm], when reported.
    pub stirrup_spacing: Option<f64>,
    pub failure_mode: FailureMode,
    pub section_shape: SectionShape,
    pub end_condition: EndCondition,
}

/// Canonical identifiers of the twelve default features, in model order.
/// These double as the CSV column names.
pub const CANONICAL_FEATURES: [&str; 12] = [
    "fc_mpa",
    "fyl_mpa",
    "fyt_mpa",
    "fybl_mpa",
    "fysh_mpa",
    "rho_l_frac",
    "rho_t_frac",
    "rho_bl_frac",
    "rho_sh_frac",
    "alr",
    "ar",
    "ssr",
];

impl WallSpecimen {
    pub fn feature(&self, name: &str) -> Option<f64> {
        match name {
            "fc_mpa" => Some(self.concrete_strength),
            "fyl_mpa" => Some(self.web_long_yield),
            "fyt_mpa" => Some(self.web_transv_yield),
            "fybl_mpa" => Some(self.boundary_long_yield),
            "fysh_mpa" => Some(self.boundary_transv_yield),
            "rho_l_frac" => Some(self.web_long_ratio),
            "rho_t_frac" => Some(self.web_transv_ratio),
            "rho_bl_frac" => Some(self.boundary_long_ratio),
            "rho_sh_frac" => Some(self.boundary_transv_ratio),
            "alr" => Some(self.axial_load_ratio),
            "ar" => Some(self.aspect_ratio),
            "ssr" => Some(self.shear_span_ratio),
            _ => None,
        }
    }

    pub fn features(&self, names: &[String]) -> Result<Vec<f64>, DatasetError> {
        names
            .iter()
            .map(|n| {
                self.feature(n).ok_or_else(|| {
                    DatasetError::SchemaMismatch(format!("unknown feature '{n}'"))
                })
            })
            .collect()
    }

    /// Slenderness l_w / t_w used by the scope filter.
    pub fn length_thickness_ratio(&self) -> f64 {
        self.wall_length / self.wall_thickness
    }

    /// Geometric aspect ratio h_w / l_w (the scope filter uses geometry, not
    /// the feature column, as the source of truth).
    pub fn geometric_aspect_ratio(&self) -> f64 {
        self.wall_height / self.wall_length
    }

    pub fn validate(&self) -> Result<(), String> {
        let check_pos = |name: &str, v: f64| -> Result<(), String> {
            if !(v > 0.0 && v.is_finite()) {
                Err(format!("{name} must be > 0, got {v}"))
            } else {
                Ok(())
            }
        };
        check_pos("fc_mpa", self.concrete_strength)?;
        check_pos("fyl_mpa", self.web_long_yield)?;
        check_pos("fyt_mpa", self.web_transv_yield)?;
        check_pos("fybl_mpa", self.boundary_long_yield)?;
        check_pos("fysh_mpa", self.boundary_transv_yield)?;
        check_pos("lw_mm", self.wall_length)?;
        check_pos("tw_mm", self.wall_thickness)?;
        check_pos("hw_mm", self.wall_height)?;
        if let Some(s) = self.stirrup_spacing {
            check_pos("s_mm", s)?;
        }
        check_pos("ar", self.aspect_ratio)?;
        check_pos("ssr", self.shear_span_ratio)?;
        for (name, v) in [
            ("rho_l_frac", self.web_long_ratio),
            ("rho_t_frac", self.web_transv_ratio),
            ("rho_bl_frac", self.boundary_long_ratio),
            ("rho_sh_frac", self.boundary_transv_ratio),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be >= 0, got {v}"));
            }
        }
        if !(self.axial_load_ratio >= 0.0 && self.axial_load_ratio < 1.0) {
            return Err(format!(
                "alr must be in [0, 1), got {}",
                self.axial_load_ratio
            ));
        }
        Ok(())
    }
}

/// The seven backbone variables, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BackboneVar {
    VCr,
    VY,
    DeltaY,
    VMax,
    DeltaMax,
    VU,
    DeltaU,
}

impl BackboneVar {
    pub const ALL: [BackboneVar; 7] = [
        BackboneVar::VCr,
        BackboneVar::VY,
        BackboneVar::DeltaY,
        BackboneVar::VMax,
        BackboneVar::DeltaMax,
        BackboneVar::VU,
        BackboneVar::DeltaU,
    ];

    /// CSV column name (doubles as the model file identifier).
    pub fn column(&self) -> &'static str {
        match self {
            BackboneVar::VCr => "Vcr_kn",
            BackboneVar::VY => "Vy_kn",
            BackboneVar::DeltaY => "dy_mm",
            BackboneVar::VMax => "Vmax_kn",
            BackboneVar::DeltaMax => "dmax_mm",
            BackboneVar::VU => "Vu_kn",
            BackboneVar::DeltaU => "du_mm",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            BackboneVar::VCr => "V_cr",
            BackboneVar::VY => "V_y",
            BackboneVar::DeltaY => "d_y",
            BackboneVar::VMax => "V_max",
            BackboneVar::DeltaMax => "d_max",
            BackboneVar::VU => "V_u",
            BackboneVar::DeltaU => "d_u",
        }
    }

    pub fn is_force(&self) -> bool {
        matches!(self, BackboneVar::VCr | BackboneVar::VY | BackboneVar::VMax | BackboneVar::VU)
    }

    pub fn from_column(s: &str) -> Option<BackboneVar> {
        BackboneVar::ALL.iter().copied().find(|v| v.column() == s)
    }
}

impl fmt::Display for BackboneVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The seven target values defining a multilinear backbone curve, plus the
/// wall height for drift conversion. Forces in kN, displacements in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackbonePoints {
    pub v_cr: f64,
    pub v_y: f64,
    pub delta_y: f64,
    pub v_max: f64,
    pub delta_max: f64,
    pub v_u: f64,
    pub delta_u: f64,
    pub wall_height: f64,
}

impl BackbonePoints {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        v_cr: f64,
        v_y: f64,
        delta_y: f64,
        v_max: f64,
        delta_max: f64,
        v_u: f64,
        delta_u: f64,
        wall_height: f64,
    ) -> Result<BackbonePoints, DatasetError> {
        let b = BackbonePoints { v_cr, v_y, delta_y, v_max, delta_max, v_u, delta_u, wall_height };
        b.validate().map_err(DatasetError::InvalidBackbone)?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), String> {
        let vals = [
            self.v_cr,
            self.v_y,
            self.delta_y,
            self.v_max,
            self.delta_max,
            self.v_u,
            self.delta_u,
            self.wall_height,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err("non-finite backbone value".into());
        }
        if !(self.v_cr > 0.0) {
            return Err(format!("V_cr must be > 0, got {}", self.v_cr));
        }
        if self.v_cr > self.v_y {
            return Err(format!("V_cr ({}) must not exceed V_y ({})", self.v_cr, self.v_y));
        }
        if self.v_y > self.v_max {
            return Err(format!("V_y ({}) must not exceed V_max ({})", self.v_y, self.v_max));
        }
        if self.v_u < 0.0 || self.v_u > self.v_max {
            return Err(format!("V_u ({}) must be in [0, V_max]", self.v_u));
        }
        if !(self.delta_y > 0.0) {
            return Err(format!("d_y must be > 0, got {}", self.delta_y));
        }
        if self.delta_y > self.delta_max {
            return Err(format!("d_y ({}) must not exceed d_max ({})", self.delta_y, self.delta_max));
        }
        if self.delta_max > self.delta_u {
            return Err(format!("d_max ({}) must not exceed d_u ({})", self.delta_max, self.delta_u));
        }
        if !(self.wall_height > 0.0) {
            return Err("wall height must be > 0".into());
        }
        Ok(())
    }

    pub fn value(&self, var: BackboneVar) -> f64 {
        match var {
            BackboneVar::VCr => self.v_cr,
            BackboneVar::VY => self.v_y,
            BackboneVar::DeltaY => self.delta_y,
            BackboneVar::VMax => self.v_max,
            BackboneVar::DeltaMax => self.delta_max,
            BackboneVar::VU => self.v_u,
            BackboneVar::DeltaU => self.delta_u,
        }
    }

    /// Cracking displacement from the elastic slope: `V_cr * d_y / V_y`.
    pub fn cracking_displacement(&self) -> f64 {
        self.v_cr * self.delta_y / self.v_y
    }
}

/// Labels of the five polyline vertices, in drawing order.
pub const POLYLINE_LABELS: [&str; 5] = ["origin", "cracking", "yield", "peak", "ultimate"];

/// Plot-ready vertices of the multilinear curve, consecutive duplicates
/// merged (cracking coincides with yield when `V_cr = V_y`).
pub fn backbone_to_polyline(b: &BackbonePoints) -> Vec<(f64, f64)> {
    let mut pts = vec![(0.0, 0.0)];
    for (d, f) in [
        (b.cracking_displacement(), b.v_cr),
        (b.delta_y, b.v_y),
        (b.delta_max, b.v_max),
        (b.delta_u, b.v_u),
    ] {
        if pts.last() != Some(&(d, f)) {
            pts.push((d, f));
        }
    }
    pts
}

/// The five labeled vertices, duplicates kept so files round-trip exactly.
pub fn polyline_rows(b: &BackbonePoints) -> [(&'static str, f64, f64); 5] {
    [
        ("origin", 0.0, 0.0),
        ("cracking", b.cracking_displacement(), b.v_cr),
        ("yield", b.delta_y, b.v_y),
        ("peak", b.delta_max, b.v_max),
        ("ultimate", b.delta_u, b.v_u),
    ]
}

pub fn write_polyline_csv(b: &BackbonePoints, path: &Path) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["point", "disp_mm", "force_kn"])?;
    for (label, d, f) in polyline_rows(b) {
        w.write_record([label, &format!("{d}"), &format!("{f}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_polyline_csv(path: &Path) -> Result<Vec<(String, f64, f64)>, DatasetError> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["point", "disp_mm", "force_kn"] {
        return Err(DatasetError::SchemaMismatch(
            "polyline header must be point,disp_mm,force_kn".into(),
        ));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let d: f64 = rec[1]
            .parse()
            .map_err(|_| DatasetError::SchemaMismatch(format!("bad displacement '{}'", &rec[1])))?;
        let f: f64 = rec[2]
            .parse()
            .map_err(|_| DatasetError::SchemaMismatch(format!("bad force '{}'", &rec[2])))?;
        out.push((rec[0].to_string(), d, f));
    }
    Ok(out)
}

/// Recovers the seven backbone values from labeled polyline vertices.
pub fn backbone_from_polyline(
    rows: &[(String, f64, f64)],
    wall_height: f64,
) -> Result<BackbonePoints, DatasetError> {
    let find = |label: &str| -> Result<(f64, f64), DatasetError> {
        rows.iter()
            .find(|(l, _, _)| l == label)
            .map(|(_, d, f)| (*d, *f))
            .ok_or_else(|| DatasetError::SchemaMismatch(format!("polyline missing '{label}' vertex")))
    };
    let (_, v_cr) = find("cracking")?;
    let (d_y, v_y) = find("yield")?;
    let (d_max, v_max) = find("peak")?;
    let (d_u, v_u) = find("ultimate")?;
    BackbonePoints::new(v_cr, v_y, d_y, v_max, d_max, v_u, d_u, wall_height)
}

/// A specimen with its measured backbone targets, when available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallRecord {
    pub wall: WallSpecimen,
    pub backbone: Option<BackbonePoints>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowError {
    /// 1-based line number in the file (the header is line 1).
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct LoadOutcome {
    pub records: Vec<WallRecord>,
    pub row_errors: Vec<RowError>,
}

// Column layout shared by the reader and writer.
const CANONICAL_HEADER: [&str; 27] = [
    "id", "fc_mpa", "fyl_mpa", "fyt_mpa", "fybl_mpa", "fysh_mpa", "rho_l_frac", "rho_t_frac",
    "rho_bl_frac", "rho_sh_frac", "alr", "ar", "ssr", "lw_mm", "tw_mm", "hw_mm", "s_mm", "mode",
    "shape", "end", "Vcr_kn", "Vy_kn", "dy_mm", "Vmax_kn", "dmax_mm", "Vu_kn", "du_mm",
];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Column {
    Id,
    Numeric(&'static str, f64), // canonical name, multiplier applied on load
    Mode,
    Shape,
    End,
    Target(BackboneVar),
}

/// Stems with their accepted unit suffixes and load-time multipliers.
/// Ratios accept `frac` or `pct`; everything else is fixed.
const NUMERIC_STEMS: [(&str, &[(&str, f64)], &str); 23] = [
    ("fc", &[("mpa", 1.0)], "fc_mpa"),
    ("fyl", &[("mpa", 1.0)], "fyl_mpa"),
    ("fyt", &[("mpa", 1.0)], "fyt_mpa"),
    ("fybl", &[("mpa", 1.0)], "fybl_mpa"),
    ("fysh", &[("mpa", 1.0)], "fysh_mpa"),
    ("rho_l", &[("frac", 1.0), ("pct", 0.01)], "rho_l_frac"),
    ("rho_t", &[("frac", 1.0), ("pct", 0.01)], "rho_t_frac"),
    ("rho_bl", &[("frac", 1.0), ("pct", 0.01)], "rho_bl_frac"),
    ("rho_sh", &[("frac", 1.0), ("pct", 0.01)], "rho_sh_frac"),
    ("alr", &[("", 1.0)], "alr"),
    ("ar", &[("", 1.0)], "ar"),
    ("ssr", &[("", 1.0)], "ssr"),
    ("lw", &[("mm", 1.0)], "lw_mm"),
    ("tw", &[("mm", 1.0)], "tw_mm"),
    ("hw", &[("mm", 1.0)], "hw_mm"),
    ("s", &[("mm", 1.0)], "s_mm"),
    ("vcr", &[("kn", 1.0)], "Vcr_kn"),
    ("vy", &[("kn", 1.0)], "Vy_kn"),
    ("dy", &[("mm", 1.0)], "dy_mm"),
    ("vmax", &[("kn", 1.0)], "Vmax_kn"),
    ("dmax", &[("mm", 1.0)], "dmax_mm"),
    ("vu", &[("kn", 1.0)], "Vu_kn"),
    ("du", &[("mm", 1.0)], "du_mm"),
];

fn classify_header(header: &str) -> Result<Column, DatasetError> {
    let h = header.trim().to_ascii_lowercase();
    match h.as_str() {
        "id" => return Ok(Column::Id),
        "mode" => return Ok(Column::Mode),
        "shape" => return Ok(Column::Shape),
        "end" => return Ok(Column::End),
        _ => {}
    }
    // Unitless numeric columns.
    for (stem, units, canonical) in NUMERIC_STEMS {
        if units.iter().any(|(u, _)| u.is_empty()) && h == stem {
            return Ok(numeric_or_target(canonical, 1.0));
        }
    }
    // stem_unit columns: split at the last underscore.
    if let Some(pos) = h.rfind('_') {
        let (stem, unit) = (&h[..pos], &h[pos + 1..]);
        for (known_stem, units, canonical) in NUMERIC_STEMS {
            if stem == known_stem {
                if let Some((_, mult)) = units.iter().find(|(u, _)| *u == unit) {
                    return Ok(numeric_or_target(canonical, *mult));
                }
                return Err(DatasetError::UnitError(format!(
                    "column '{header}': unit '{unit}' is not supported for '{stem}'"
                )));
            }
        }
    }
    Err(DatasetError::SchemaMismatch(format!("unknown column '{header}'")))
}

fn numeric_or_target(canonical: &'static str, mult: f64) -> Column {
    match BackboneVar::from_column(canonical) {
        Some(var) => Column::Target(var),
        None => Column::Numeric(canonical, mult),
    }
}

/// Loads a specimen database. Header problems (unknown columns, bad units,
/// missing required columns) fail the whole load; per-row parse and
/// invariant failures are collected into [`LoadOutcome::row_errors`].
pub fn load_csv(path: &Path) -> Result<LoadOutcome, DatasetError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();

    let mut columns = Vec::with_capacity(headers.len());
    let mut seen = BTreeMap::new();
    for h in headers.iter() {
        let col = classify_header(h)?;
        let key = match col {
            Column::Id => "id",
            Column::Mode => "mode",
            Column::Shape => "shape",
            Column::End => "end",
            Column::Numeric(name, _) => name,
            Column::Target(var) => var.column(),
        };
        if let Some(prev) = seen.insert(key, h.to_string()) {
            return Err(DatasetError::SchemaMismatch(format!(
                "duplicate column: '{h}' repeats '{prev}'"
            )));
        }
        columns.push(col);
    }

    let required = [
        "fc_mpa", "fyl_mpa", "fyt_mpa", "fybl_mpa", "fysh_mpa", "rho_l_frac", "rho_t_frac",
        "rho_bl_frac", "rho_sh_frac", "alr", "ar", "ssr", "lw_mm", "tw_mm", "hw_mm",
    ];
    for name in required {
        let present = columns.iter().any(|c| matches!(c, Column::Numeric(n, _) if *n == name));
        if !present {
            return Err(DatasetError::SchemaMismatch(format!("missing required column '{name}'")));
        }
    }
    if !columns.contains(&Column::Mode) {
        return Err(DatasetError::SchemaMismatch("missing required column 'mode'".into()));
    }
    let target_count = columns.iter().filter(|c| matches!(c, Column::Target(_))).count();
    if target_count != 0 && target_count != 7 {
        return Err(DatasetError::SchemaMismatch(format!(
            "backbone columns must appear as a complete group of 7, found {target_count}"
        )));
    }

    let mut records = Vec::new();
    let mut row_errors = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let line = idx + 2;
        let rec = rec?;
        match parse_row(&rec, &columns, line, target_count == 7) {
            Ok(r) => records.push(r),
            Err(message) => row_errors.push(RowError { row: line, message }),
        }
    }
    Ok(LoadOutcome { records, row_errors })
}

fn parse_row(
    rec: &csv::StringRecord,
    columns: &[Column],
    line: usize,
    has_targets: bool,
) -> Result<WallRecord, String> {
    let mut numeric: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut targets: BTreeMap<BackboneVar, Option<f64>> = BTreeMap::new();
    let mut id = None;
    let mut mode = None;
    let mut shape = SectionShape::Rectangular;
    let mut end = EndCondition::Cantilever;

    for (i, col) in columns.iter().enumerate() {
        let cell = rec.get(i).unwrap_or("").trim();
        match col {
            Column::Id => {
                if !cell.is_empty() {
                    id = Some(cell.to_string());
                }
            }
            Column::Mode => {
                if cell.is_empty() {
                    return Err("failure mode is required".into());
                }
                mode = Some(
                    FailureMode::parse(cell)
                        .ok_or_else(|| format!("unknown failure mode '{cell}' (expected S, SF, or F)"))?,
                );
            }
            Column::Shape => {
                if !cell.is_empty() {
                    shape = SectionShape::parse(cell)
                        .ok_or_else(|| format!("unknown section shape '{cell}'"))?;
                }
            }
            Column::End => {
                if !cell.is_empty() {
                    end = EndCondition::parse(cell)
                        .ok_or_else(|| format!("unknown end condition '{cell}'"))?;
                }
            }
            Column::Numeric(name, mult) => {
                if cell.is_empty() {
                    if *name != "s_mm" {
                        return Err(format!("column '{name}' is empty"));
                    }
                } else {
                    let v: f64 =
                        cell.parse().map_err(|_| format!("column '{name}': cannot parse '{cell}'"))?;
                    numeric.insert(name, v * mult);
                }
            }
            Column::Target(var) => {
                if cell.is_empty() {
                    targets.insert(*var, None);
                } else {
                    let v: f64 = cell
                        .parse()
                        .map_err(|_| format!("column '{}': cannot parse '{cell}'", var.column()))?;
                    targets.insert(*var, Some(v));
                }
            }
        }
    }

    let get = |name: &str| -> f64 { numeric.get(name).copied().unwrap_or(f64::NAN) };
    let wall = WallSpecimen {
        id: id.unwrap_or_else(|| format!("row{line:04}")),
        concrete_strength: get("fc_mpa"),
        web_long_yield: get("fyl_mpa"),
        web_transv_yield: get("fyt_mpa"),
        boundary_long_yield: get("fybl_mpa"),
        boundary_transv_yield: get("fysh_mpa"),
        web_long_ratio: get("rho_l_frac"),
        web_transv_ratio: get("rho_t_frac"),
        boundary_long_ratio: get("rho_bl_frac"),
        boundary_transv_ratio: get("rho_sh_frac"),
        axial_load_ratio: get("alr"),
        aspect_ratio: get("ar"),
        shear_span_ratio: get("ssr"),
        wall_length: get("lw_mm"),
        wall_thickness: get("tw_mm"),
        wall_height: get("hw_mm"),
        stirrup_spacing: numeric.get("s_mm").copied(),
        failure_mode: mode.ok_or("failure mode is required")?,
        section_shape: shape,
        end_condition: end,
    };
    wall.validate()?;

    let backbone = if has_targets {
        let provided: Vec<_> = BackboneVar::ALL
            .iter()
            .filter(|v| targets.get(v).copied().flatten().is_some())
            .collect();
        if provided.is_empty() {
            None
        } else if provided.len() < 7 {
            return Err("incomplete backbone row: provide all 7 targets or none".into());
        } else {
            let v = |var: BackboneVar| targets[&var].unwrap();
            Some(
                BackbonePoints::new(
                    v(BackboneVar::VCr),
                    v(BackboneVar::VY),
                    v(BackboneVar::DeltaY),
                    v(BackboneVar::VMax),
                    v(BackboneVar::DeltaMax),
                    v(BackboneVar::VU),
                    v(BackboneVar::DeltaU),
                    wall.wall_height,
                )
                .map_err(|e| e.to_string())?,
            )
        }
    } else {
        None
    };

    Ok(WallRecord { wall, backbone })
}

/// Writes records in the canonical column layout. Floats are written in
/// shortest round-trip form, so `load_csv(write_csv(r))` preserves values
/// exactly.
pub fn write_csv(records: &[WallRecord], path: &Path) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CANONICAL_HEADER)?;
    for r in records {
        let wall = &r.wall;
        let num = |v: f64| format!("{v}");
        let mut row: Vec<String> = vec![
            wall.id.clone(),
            num(wall.concrete_strength),
            num(wall.web_long_yield),
            num(wall.web_transv_yield),
            num(wall.boundary_long_yield),
            num(wall.boundary_transv_yield),
            num(wall.web_long_ratio),
            num(wall.web_transv_ratio),
            num(wall.boundary_long_ratio),
            num(wall.boundary_transv_ratio),
            num(wall.axial_load_ratio),
            num(wall.aspect_ratio),
            num(wall.shear_span_ratio),
            num(wall.wall_length),
            num(wall.wall_thickness),
            num(wall.wall_height),
            wall.stirrup_spacing.map(|s| format!("{s}")).unwrap_or_default(),
            wall.failure_mode.as_str().to_string(),
            wall.section_shape.as_str().to_string(),
            wall.end_condition.as_str().to_string(),
        ];
        match &r.backbone {
            Some(b) => {
                for var in BackboneVar::ALL {
                    row.push(format!("{}", b.value(var)));
                }
            }
            None => row.extend(std::iter::repeat(String::new()).take(7)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Scope filter: which specimens the predictive models are meant for.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScopeCriteria {
    pub modes: Vec<FailureMode>,
    /// Maximum slenderness l_w / t_w.
    pub max_length_thickness: f64,
    /// Maximum aspect ratio h_w / l_w.
    pub max_aspect_ratio: f64,
}

impl Default for ScopeCriteria {
    fn default() -> Self {
        ScopeCriteria {
            modes: vec![FailureMode::Shear, FailureMode::ShearFlexure],
            max_length_thickness: 20.0,
            max_aspect_ratio: 3.0,
        }
    }
}

impl ScopeCriteria {
    /// No filtering on failure mode; geometry limits still apply.
    pub fn all_modes() -> Self {
        ScopeCriteria {
            modes: vec![FailureMode::Shear, FailureMode::ShearFlexure, FailureMode::Flexure],
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScopeExclusion {
    FailureMode,
    LengthThickness,
    AspectRatio,
}

impl fmt::Display for ScopeExclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScopeExclusion::FailureMode => write!(f, "failure_mode"),
            ScopeExclusion::LengthThickness => write!(f, "length_thickness_ratio"),
            ScopeExclusion::AspectRatio => write!(f, "aspect_ratio"),
        }
    }
}

/// Partitions records into in-scope and excluded (with the first violated
/// rule, checked in order: failure mode, l_w/t_w, h_w/l_w).
pub fn filter_scope(
    records: Vec<WallRecord>,
    criteria: &ScopeCriteria,
) -> (Vec<WallRecord>, Vec<(WallRecord, ScopeExclusion)>) {
    let mut in_scope = Vec::new();
    let mut excluded = Vec::new();
    for r in records {
        if !criteria.modes.contains(&r.wall.failure_mode) {
            excluded.push((r, ScopeExclusion::FailureMode));
        } else if r.wall.length_thickness_ratio() > criteria.max_length_thickness {
            excluded.push((r, ScopeExclusion::LengthThickness));
        } else if r.wall.geometric_aspect_ratio() > criteria.max_aspect_ratio {
            excluded.push((r, ScopeExclusion::AspectRatio));
        } else {
            in_scope.push(r);
        }
    }
    (in_scope, excluded)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_wall(id: &str) -> WallSpecimen {
        WallSpecimen {
            id: id.to_string(),
            concrete_strength: 30.0,
            web_long_yield: 420.0,
            web_transv_yield: 420.0,
            boundary_long_yield: 450.0,
            boundary_transv_yield: 400.0,
            web_long_ratio: 0.0025,
            web_transv_ratio: 0.0025,
            boundary_long_ratio: 0.02,
            boundary_transv_ratio: 0.008,
            axial_load_ratio: 0.1,
            aspect_ratio: 1.0,
            shear_span_ratio: 1.1,
            wall_length: 1200.0,
            wall_thickness: 120.0,
            wall_height: 1200.0,
            stirrup_spacing: Some(150.0),
            failure_mode: FailureMode::Shear,
            section_shape: SectionShape::Rectangular,
            end_condition: EndCondition::Cantilever,
        }
    }

    fn demo_backbone() -> BackbonePoints {
        BackbonePoints::new(300.0, 500.0, 5.0, 650.0, 12.0, 520.0, 20.0, 1200.0).unwrap()
    }

    #[test]
    fn backbone_invariants_enforced() {
        // V_cr > V_y
        assert!(BackbonePoints::new(600.0, 500.0, 5.0, 650.0, 12.0, 520.0, 20.0, 1200.0).is_err());
        // d_max > d_u
        assert!(BackbonePoints::new(300.0, 500.0, 5.0, 650.0, 25.0, 520.0, 20.0, 1200.0).is_err());
        // V_u > V_max
        assert!(BackbonePoints::new(300.0, 500.0, 5.0, 650.0, 12.0, 700.0, 20.0, 1200.0).is_err());
        // V_u = 0 is allowed (residual strength can vanish).
        assert!(BackbonePoints::new(300.0, 500.0, 5.0, 650.0, 12.0, 0.0, 20.0, 1200.0).is_ok());
    }

    #[test]
    fn polyline_shape_and_round_trip() {
        let b = demo_backbone();
        let pts = backbone_to_polyline(&b);
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0], (0.0, 0.0));
        assert_eq!(pts[1], (b.cracking_displacement(), 300.0));
        for w in pts.windows(2) {
            assert!(w[0].0 <= w[1].0, "displacements must be non-decreasing");
        }

        let rows: Vec<(String, f64, f64)> = polyline_rows(&b)
            .iter()
            .map(|(l, d, f)| (l.to_string(), *d, *f))
            .collect();
        let back = backbone_from_polyline(&rows, b.wall_height).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn polyline_merges_cracking_into_yield() {
        let b = BackbonePoints::new(500.0, 500.0, 5.0, 650.0, 12.0, 520.0, 20.0, 1200.0).unwrap();
        let pts = backbone_to_polyline(&b);
        assert_eq!(pts.len(), 4, "cracking vertex merges with yield");
    }

    #[test]
    fn csv_round_trip_preserves_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("db.csv");
        let records = vec![
            WallRecord { wall: demo_wall("w1"), backbone: Some(demo_backbone()) },
            WallRecord {
                wall: WallSpecimen {
                    stirrup_spacing: None,
                    axial_load_ratio: 0.123456789012345,
                    ..demo_wall("w2")
                },
                backbone: None,
            },
        ];
        write_csv(&records, &path).unwrap();
        let out = load_csv(&path).unwrap();
        assert!(out.row_errors.is_empty());
        assert_eq!(out.records, records);
    }

    #[test]
    fn empty_data_section_gives_empty_list() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, CANONICAL_HEADER.join(",") + "\n").unwrap();
        let out = load_csv(&path).unwrap();
        assert!(out.records.is_empty());
        assert!(out.row_errors.is_empty());
    }

    #[test]
    fn invalid_rows_are_collected_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("db.csv");
        let good = WallRecord { wall: demo_wall("ok"), backbone: None };
        write_csv(&[good.clone()], &path).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        // Append a row with negative concrete strength.
        let bad_line = text.lines().nth(1).unwrap().replace("ok,30", "bad,-5");
        text.push_str(&bad_line);
        text.push('\n');
        std::fs::write(&path, text).unwrap();

        let out = load_csv(&path).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.row_errors.len(), 1);
        assert_eq!(out.row_errors[0].row, 3);
        assert!(out.row_errors[0].message.contains("fc_mpa"));
    }

    #[test]
    fn percent_ratio_header_is_converted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("db.csv");
        write_csv(&[WallRecord { wall: demo_wall("w"), backbone: None }], &path).unwrap();
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replace("rho_l_frac", "rho_l_pct")
            .replace(",0.0025,0.0025,", ",0.25,0.0025,");
        std::fs::write(&path, text).unwrap();
        let out = load_csv(&path).unwrap();
        assert!(out.row_errors.is_empty());
        assert!((out.records[0].wall.web_long_ratio - 0.0025).abs() < 1e-15);
    }

    #[test]
    fn unknown_unit_and_column_are_schema_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("db.csv");
        write_csv(&[WallRecord { wall: demo_wall("w"), backbone: None }], &path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap().replace("fc_mpa", "fc_ksi");
        std::fs::write(&path, &text).unwrap();
        assert!(matches!(load_csv(&path), Err(DatasetError::UnitError(_))));

        let text = text.replace("fc_ksi", "banana");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(load_csv(&path), Err(DatasetError::SchemaMismatch(_))));
    }

    #[test]
    fn scope_filter_rules_and_partition() {
        let mut slender = demo_wall("slender");
        slender.wall_height = 4200.0; // h_w / l_w = 3.5
        let mut thin = demo_wall("thin");
        thin.wall_thickness = 50.0; // l_w / t_w = 24
        let mut flexure = demo_wall("flexure");
        flexure.failure_mode = FailureMode::Flexure;
        let typical = demo_wall("typical"); // l_w / t_w = 10, h_w / l_w = 1.0

        let records: Vec<WallRecord> = [slender, thin, flexure, typical]
            .into_iter()
            .map(|wall| WallRecord { wall, backbone: None })
            .collect();
        let n = records.len();
        let (in_scope, excluded) = filter_scope(records, &ScopeCriteria::default());
        assert_eq!(in_scope.len() + excluded.len(), n);
        assert_eq!(in_scope.len(), 1);
        assert_eq!(in_scope[0].wall.id, "typical");
        let reasons: BTreeMap<String, ScopeExclusion> = excluded
            .iter()
            .map(|(r, why)| (r.wall.id.clone(), *why))
            .collect();
        assert_eq!(reasons["slender"], ScopeExclusion::AspectRatio);
        assert_eq!(reasons["thin"], ScopeExclusion::LengthThickness);
        assert_eq!(reasons["flexure"], ScopeExclusion::FailureMode);
    }

    #[test]
    fn all_flexure_database_is_fully_excluded() {
        let records: Vec<WallRecord> = (0..5)
            .map(|i| {
                let mut w = demo_wall(&format!("f{i}"));
                w.failure_mode = FailureMode::Flexure;
                WallRecord { wall: w, backbone: None }
            })
            .collect();
        let (in_scope, excluded) = filter_scope(records, &ScopeCriteria::default());
        assert!(in_scope.is_empty());
        assert_eq!(excluded.len(), 5);
    }

    #[test]
    fn specimen_at_typical_slenderness_is_in_scope() {
        // l_w/t_w = 13.3 is the reported typical slenderness for shear walls.
        let mut w = demo_wall("typ");
        w.wall_thickness = w.wall_length / 13.3;
        let (in_scope, _) = filter_scope(
            vec![WallRecord { wall: w, backbone: None }],
            &ScopeCriteria::default(),
        );
        assert_eq!(in_scope.len(), 1);
    }
}
