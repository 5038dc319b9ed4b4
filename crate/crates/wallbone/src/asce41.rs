//! ASCE 41-17 baseline: tabulated force-deformation modeling parameters for
//! shear- and flexure-controlled walls, back-calculation into physical
//! backbone points, and a pluggable nominal shear strength.
//!
//! Table values live in `data/asce41_tables.toml` (embedded at compile time)
//! so the implementation and the fixtures share one source. Lookups are
//! boundary inclusive; flexure parameters interpolate linearly between the
//! tabulated axial (0.1 to 0.25) and shear-stress (4 to 6, psi convention)
//! bounds.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dataset::{BackbonePoints, WallSpecimen};

const TABLES_TOML: &str = include_str!("../data/asce41_tables.toml");

/// Ratio of a sqrt-psi stress unit to a sqrt-MPa one: sqrt(1 psi / 1 MPa).
/// Converts shear-stress metrics stated in MPa convention to the psi-based
/// table thresholds.
const SQRT_PSI_PER_SQRT_MPA: f64 = 0.083_045_479_853_739_59;

/// Normalized backbone parameters for shear-controlled walls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asce41ShearParams {
    /// V_cr / V_y.
    pub f: f64,
    /// V_u / V_max.
    pub c: f64,
    /// delta_max / h, percent.
    pub d: f64,
    /// delta_u / h, percent.
    pub e: f64,
    /// delta_y / h, percent.
    pub g: f64,
    /// V_max / V_y.
    pub strength_ratio: f64,
}

/// Normalized backbone parameters for flexure-controlled walls (rotations).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asce41FlexureParams {
    /// theta_max - theta_y, radians.
    pub a: f64,
    /// theta_u - theta_y, radians.
    pub b: f64,
    /// V_u / V_max.
    pub c: f64,
}

/// Units in which a [`WallState`] expresses its shear-stress metric
/// `V / (t_w * l_w * sqrt(f'c))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StressConvention {
    /// The ASCE table convention: f'c in psi. Table thresholds are 4 and 6.
    Psi,
    /// f'c in MPa; converted to the psi thresholds internally.
    Mpa,
}

/// The wall quantities the tables key on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallState {
    /// ((A_s - A_s') * f_yE + P) / (t_w * l_w * f_c).
    pub axial_metric: f64,
    /// V / (t_w * l_w * sqrt(f'c)) in `stress_convention` units.
    pub shear_stress_metric: f64,
    pub confined_boundary: bool,
    pub stress_convention: StressConvention,
}

impl WallState {
    pub fn new(axial_metric: f64, shear_stress_metric: f64, confined_boundary: bool) -> Self {
        WallState {
            axial_metric,
            shear_stress_metric,
            confined_boundary,
            stress_convention: StressConvention::Psi,
        }
    }

    pub fn with_convention(mut self, convention: StressConvention) -> Self {
        self.stress_convention = convention;
        self
    }

    fn shear_stress_psi(&self) -> f64 {
        match self.stress_convention {
            StressConvention::Psi => self.shear_stress_metric,
            StressConvention::Mpa => self.shear_stress_metric / SQRT_PSI_PER_SQRT_MPA,
        }
    }

    /// Builds the state from a specimen. With symmetric boundary
    /// reinforcement (A_s = A_s') the axial metric reduces to the axial load
    /// ratio. `v_n_kn` feeds the shear-stress metric; boundary confinement
    /// is inferred from the transverse boundary reinforcement ratio.
    pub fn from_specimen(wall: &WallSpecimen, v_n_kn: f64) -> WallState {
        let shear_stress_mpa =
            v_n_kn * 1000.0 / (wall.wall_thickness * wall.wall_length * wall.concrete_strength.sqrt());
        WallState {
            axial_metric: wall.axial_load_ratio,
            shear_stress_metric: shear_stress_mpa,
            confined_boundary: wall.boundary_transv_ratio >= CONFINED_RHO_SH,
            stress_convention: StressConvention::Mpa,
        }
    }
}

/// Transverse boundary reinforcement ratio treated as a confined boundary.
pub const CONFINED_RHO_SH: f64 = 0.005;

// ---------------------------------------------------------------------------
// Embedded table document.

#[derive(Debug, Deserialize)]
struct TablesDoc {
    #[allow(dead_code)]
    schema_version: u32,
    shear: ShearDoc,
    flexure: FlexureDoc,
}

#[derive(Debug, Deserialize)]
struct ShearDoc {
    low_axial: Asce41ShearParams,
    high_axial: Asce41ShearParams,
}

#[derive(Debug, Deserialize)]
struct FlexureDoc {
    rows: Vec<FlexureRow>,
}

#[derive(Debug, Deserialize)]
struct FlexureRow {
    axial: String,
    shear: String,
    confined: bool,
    a: f64,
    b: f64,
    c: f64,
}

fn tables() -> &'static TablesDoc {
    static TABLES: OnceLock<TablesDoc> = OnceLock::new();
    TABLES.get_or_init(|| toml::from_str(TABLES_TOML).expect("embedded ASCE 41 tables parse"))
}

fn flexure_corner(axial_high: bool, shear_high: bool, confined: bool) -> &'static FlexureRow {
    let axial = if axial_high { "high" } else { "low" };
    let shear = if shear_high { "high" } else { "low" };
    tables()
        .flexure
        .rows
        .iter()
        .find(|r| r.axial == axial && r.shear == shear && r.confined == confined)
        .expect("all 8 flexure corner rows are present")
}

/// Table lookup for shear-controlled walls; the 0.5 boundary is inclusive
/// on the low side.
pub fn shear_controlled_params(state: &WallState) -> Asce41ShearParams {
    if state.axial_metric <= 0.5 {
        tables().shear.low_axial
    } else {
        tables().shear.high_axial
    }
}

/// Flexure-controlled parameters with bilinear interpolation between the
/// tabulated axial bounds (0.1, 0.25) and shear-stress bounds (4, 6 in the
/// psi convention); clamped outside, exact at the corners.
pub fn flexure_controlled_params(state: &WallState) -> Asce41FlexureParams {
    let t_axial = ((state.axial_metric - 0.1) / (0.25 - 0.1)).clamp(0.0, 1.0);
    let shear_psi = state.shear_stress_psi();
    let t_shear = ((shear_psi - 4.0) / (6.0 - 4.0)).clamp(0.0, 1.0);

    let pick = |ah: bool, sh: bool| flexure_corner(ah, sh, state.confined_boundary);
    let (ll, lh, hl, hh) = (pick(false, false), pick(false, true), pick(true, false), pick(true, true));

    // Endpoint short-circuit keeps tabulated corners bit-exact.
    let lerp = |a: f64, b: f64, t: f64| -> f64 {
        if t == 0.0 {
            a
        } else if t == 1.0 {
            b
        } else {
            a + (b - a) * t
        }
    };
    let lerp2 = |f: fn(&FlexureRow) -> f64| -> f64 {
        let low = lerp(f(ll), f(lh), t_shear);
        let high = lerp(f(hl), f(hh), t_shear);
        lerp(low, high, t_axial)
    };
    Asce41FlexureParams {
        a: lerp2(|r| r.a),
        b: lerp2(|r| r.b),
        c: lerp2(|r| r.c),
    }
}

/// Physical backbone points from normalized shear-wall parameters:
/// `V_cr = f * V_y`, `V_max = strength_ratio * V_y`, `V_u = c * V_max`,
/// displacements from drift percentages of the wall height.
pub fn back_calculate_shear(params: &Asce41ShearParams, v_y_kn: f64, height_mm: f64) -> BackbonePoints {
    assert!(v_y_kn > 0.0 && height_mm > 0.0, "V_y and height must be positive");
    let v_y = v_y_kn;
    let v_max = params.strength_ratio * v_y;
    BackbonePoints {
        v_cr: params.f * v_y,
        v_y,
        delta_y: params.g / 100.0 * height_mm,
        v_max,
        delta_max: params.d / 100.0 * height_mm,
        v_u: params.c * v_max,
        delta_u: params.e / 100.0 * height_mm,
        wall_height: height_mm,
    }
}

/// Converts a plastic-hinge rotation to a top displacement, `delta = theta * h`.
pub fn rotation_to_displacement(theta: f64, height_mm: f64) -> f64 {
    theta * height_mm
}

/// Pluggable nominal shear strength V_n.
pub trait VnModel: Sync {
    fn nominal_shear_strength_kn(&self, wall: &WallSpecimen) -> f64;
    fn describe(&self) -> String;
}

/// Simplified ACI 318-style wall shear strength in MPa/mm units:
///
/// ```text
/// V_n [kN] = t_w * l_w * (alpha_c * sqrt(f'c) + rho_t * f_yt) / 1000
/// ```
///
/// with `alpha_c` = 0.25 for h_w/l_w <= 1.5, 0.17 for h_w/l_w >= 2.0, and
/// linear in between. No upper cap is applied, which keeps V_n strictly
/// increasing in f'c, rho_t, and f_yt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aci318Simplified {
    pub alpha_squat: f64,
    pub alpha_slender: f64,
}

impl Default for Aci318Simplified {
    fn default() -> Self {
        Aci318Simplified { alpha_squat: 0.25, alpha_slender: 0.17 }
    }
}

impl VnModel for Aci318Simplified {
    fn nominal_shear_strength_kn(&self, wall: &WallSpecimen) -> f64 {
        let hw_lw = wall.geometric_aspect_ratio();
        let alpha = if hw_lw <= 1.5 {
            self.alpha_squat
        } else if hw_lw >= 2.0 {
            self.alpha_slender
        } else {
            self.alpha_squat + (self.alpha_slender - self.alpha_squat) * (hw_lw - 1.5) / 0.5
        };
        let stress = alpha * wall.concrete_strength.sqrt()
            + wall.web_transv_ratio * wall.web_transv_yield;
        wall.wall_thickness * wall.wall_length * stress / 1000.0
    }

    fn describe(&self) -> String {
        format!(
            "aci318 (alpha_squat = {}, alpha_slender = {})",
            self.alpha_squat, self.alpha_slender
        )
    }
}

/// A user-supplied constant V_n, bypassing the formula entirely.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConstantVn(pub f64);

impl VnModel for ConstantVn {
    fn nominal_shear_strength_kn(&self, _wall: &WallSpecimen) -> f64 {
        self.0
    }

    fn describe(&self) -> String {
        format!("constant ({} kN)", self.0)
    }
}
