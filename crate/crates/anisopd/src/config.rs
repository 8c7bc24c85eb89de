//! Declarative scenario configuration: TOML schema with unit-aware
//! quantities, strict validation into SI, shipped presets for the three
//! reference problems, and dotted-path overrides.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::geometry::{Circle, Rect, Segment};
use crate::material::{MaterialRecord, Strengths};
use crate::{Error, Result};

/// A numeric field that accepts either a plain SI number or a string with a
/// unit suffix ("144.8 GPa", "125 mm", "30 deg"), converted by
/// multiplication at validation time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl Default for Quantity {
    fn default() -> Self {
        Quantity::Number(0.0)
    }
}

/// Physical dimension a quantity is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Unit {
    Pressure,
    Length,
    Time,
    Angle,
    Velocity,
    Density,
    Dimensionless,
}

fn unit_factor(unit: Unit, token: &str) -> Option<f64> {
    let table: &[(&str, f64)] = match unit {
        Unit::Pressure => &[("Pa", 1.0), ("kPa", 1e3), ("MPa", 1e6), ("GPa", 1e9)],
        Unit::Length => &[("m", 1.0), ("cm", 1e-2), ("mm", 1e-3), ("um", 1e-6)],
        Unit::Time => &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9)],
        Unit::Angle => &[("rad", 1.0), ("deg", std::f64::consts::PI / 180.0)],
        Unit::Velocity => &[("m/s", 1.0)],
        Unit::Density => &[("kg/m3", 1.0), ("kg/m^3", 1.0)],
        Unit::Dimensionless => &[],
    };
    table.iter().find(|(name, _)| *name == token).map(|&(_, f)| f)
}

fn quantity_si(q: &Quantity, unit: Unit, key: &str) -> Result<f64> {
    match q {
        Quantity::Number(x) => Ok(*x),
        Quantity::Text(s) => {
            let tokens: Vec<&str> = s.split_whitespace().collect();
            match tokens.as_slice() {
                [value] => value.parse::<f64>().map_err(|_| bad_quantity(key, s)),
                [value, suffix] => {
                    let v = value.parse::<f64>().map_err(|_| bad_quantity(key, s))?;
                    let f = unit_factor(unit, suffix).ok_or_else(|| {
                        Error::Config(format!(
                            "{key}: unknown unit {suffix:?} in {s:?} for this field"
                        ))
                    })?;
                    Ok(v * f)
                }
                _ => Err(bad_quantity(key, s)),
            }
        }
    }
}

fn bad_quantity(key: &str, s: &str) -> Error {
    Error::Config(format!("{key}: cannot parse quantity {s:?} (expected \"<value> [unit]\")"))
}

/// Displacement-update scheme selector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateScheme {
    #[default]
    SemiImplicit,
    Explicit,
}

impl From<UpdateScheme> for crate::integrator::DisplacementUpdate {
    fn from(s: UpdateScheme) -> Self {
        match s {
            UpdateScheme::SemiImplicit => Self::SemiImplicit,
            UpdateScheme::Explicit => Self::ExplicitEuler,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub width: Quantity,
    pub height: Quantity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: u32,
    pub ny: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrengthsConfig {
    pub sigma_lu: Quantity,
    pub sigma_tu: Quantity,
    pub tau_ltu: Quantity,
}

/// One material region. Either the four engineering constants or the direct
/// fibre-frame stiffness entries must be given, never both. A material
/// without its own `theta` inherits the scenario-level fibre angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e1: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e2: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g12: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu12: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c11: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c12: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c22: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c33: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c13: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c23: Option<Quantity>,
    pub rho: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strengths: Option<StrengthsConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub from: [Quantity; 2],
    pub to: [Quantity; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleConfig {
    pub center: [Quantity; 2],
    pub radius: Quantity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionConfig {
    pub center: [Quantity; 2],
    pub radius: Quantity,
    /// Index into `materials` for particles inside the circle.
    pub material: u16,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DsifConfig {
    /// Crack tip position (m, plate-centred coordinates).
    pub tip: [Quantity; 2],
    /// Unit propagation direction (mouth → tip).
    pub direction: [Quantity; 2],
    /// Sampling offset behind the tip; defaults to 3·Δx.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rbar: Option<Quantity>,
}

/// A complete scenario. Scalar keys precede the sub-tables so the
/// serialized echo is valid TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Horizon factor n in δ = n·Δx.
    pub horizon_factor: u32,
    /// Scenario-level fibre angle (rad), inherited by materials without
    /// their own.
    #[serde(default)]
    pub theta: Quantity,
    /// Amplitude V₀ of the initial velocity field v_y = V₀·y/height.
    #[serde(default)]
    pub initial_velocity_amplitude: Quantity,
    #[serde(default)]
    pub damage_enabled: bool,
    /// Physical duration to simulate; 0 requests a setup-only dry run.
    pub total_time: Quantity,
    /// Snapshot (and intensity-factor sampling) cadence in steps; 0 writes
    /// only the initial and final snapshots.
    #[serde(default)]
    pub snapshot_every: u64,
    /// Reserved zero-energy-mode stabilization switch; must stay off.
    #[serde(default)]
    pub stabilization: bool,
    #[serde(default)]
    pub displacement_update: UpdateScheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub domain: DomainConfig,
    pub grid: GridConfig,
    pub materials: Vec<MaterialConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cracks: Vec<SegmentConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holes: Vec<CircleConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inclusions: Vec<InclusionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dsif: Option<DsifConfig>,
}

impl ScenarioConfig {
    /// Parses a TOML scenario. Unknown keys and malformed values are
    /// rejected with the parser's line/key diagnostics.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Validates the scenario and returns its effective form — every
    /// quantity converted to a plain SI number, every default materialized —
    /// together with non-fatal warnings. Normalization is idempotent, so the
    /// echoed effective config reparses to exactly itself.
    pub fn normalize(&self) -> Result<(Self, Vec<String>)> {
        let mut warnings = Vec::new();
        let mut n = self.clone();

        if n.grid.nx < 2 || n.grid.ny < 2 {
            return Err(Error::Config(format!(
                "grid must be at least 2×2, got {}×{}",
                n.grid.nx, n.grid.ny
            )));
        }
        if n.horizon_factor < 1 {
            return Err(Error::Config("horizon_factor must be at least 1".to_string()));
        }
        if n.stabilization {
            return Err(Error::Config(
                "stabilization is a reserved switch and must stay off".to_string(),
            ));
        }

        let width = positive(quantity_si(&n.domain.width, Unit::Length, "domain.width")?, "domain.width")?;
        let height =
            positive(quantity_si(&n.domain.height, Unit::Length, "domain.height")?, "domain.height")?;
        n.domain.width = Quantity::Number(width);
        n.domain.height = Quantity::Number(height);
        let dx = width / n.grid.nx as f64;
        let dy = height / n.grid.ny as f64;
        if (dx - dy).abs() > 1e-9 * dx {
            return Err(Error::Config(format!(
                "grid cells must be square: width/nx = {dx:.9e} but height/ny = {dy:.9e}"
            )));
        }

        let theta = finite(quantity_si(&n.theta, Unit::Angle, "theta")?, "theta")?;
        n.theta = Quantity::Number(theta);
        let v0 = finite(
            quantity_si(&n.initial_velocity_amplitude, Unit::Velocity, "initial_velocity_amplitude")?,
            "initial_velocity_amplitude",
        )?;
        n.initial_velocity_amplitude = Quantity::Number(v0);
        let total = finite(quantity_si(&n.total_time, Unit::Time, "total_time")?, "total_time")?;
        if total < 0.0 {
            return Err(Error::Config(format!("total_time must be nonnegative, got {total}")));
        }
        n.total_time = Quantity::Number(total);

        if n.materials.is_empty() {
            return Err(Error::Config("at least one material is required".to_string()));
        }
        for (i, m) in n.materials.iter_mut().enumerate() {
            normalize_material(m, i, theta, n.damage_enabled)?;
        }
        // Constructing the records exercises the positivity and
        // definiteness checks.
        let _ = material_records_of(&n.materials)?;

        let rect = Rect::centred(width, height);
        for (i, c) in n.cracks.iter_mut().enumerate() {
            let key = format!("cracks[{i}]");
            let from = point_si(&c.from, &format!("{key}.from"))?;
            let to = point_si(&c.to, &format!("{key}.to"))?;
            if (from - to).norm() == 0.0 {
                return Err(Error::Config(format!("{key}: crack has zero length")));
            }
            c.from = [Quantity::Number(from.x), Quantity::Number(from.y)];
            c.to = [Quantity::Number(to.x), Quantity::Number(to.y)];
        }
        for (i, h) in n.holes.iter_mut().enumerate() {
            normalize_circle(&mut h.center, &mut h.radius, &rect, &format!("holes[{i}]"), &mut warnings)?;
        }
        let material_count = n.materials.len();
        for (i, inc) in n.inclusions.iter_mut().enumerate() {
            let key = format!("inclusions[{i}]");
            normalize_circle(&mut inc.center, &mut inc.radius, &rect, &key, &mut warnings)?;
            if inc.material as usize >= material_count {
                return Err(Error::Config(format!(
                    "{key}: material index {} out of range ({} materials)",
                    inc.material, material_count
                )));
            }
        }

        if let Some(d) = n.dsif.as_mut() {
            if n.cracks.is_empty() {
                return Err(Error::Config(
                    "dsif extraction requires at least one crack".to_string(),
                ));
            }
            let tip = point_si(&d.tip, "dsif.tip")?;
            let dir = point_si(&d.direction, "dsif.direction")?;
            if !(dir.norm() > 0.0) {
                return Err(Error::Config("dsif.direction must be nonzero".to_string()));
            }
            d.tip = [Quantity::Number(tip.x), Quantity::Number(tip.y)];
            d.direction = [Quantity::Number(dir.x), Quantity::Number(dir.y)];
            let rbar = match &d.rbar {
                Some(q) => positive(quantity_si(q, Unit::Length, "dsif.rbar")?, "dsif.rbar")?,
                None => 3.0 * dx,
            };
            d.rbar = Some(Quantity::Number(rbar));
        }

        Ok((n, warnings))
    }

    /// Serializes the scenario back to TOML (used for the effective-config
    /// echo).
    pub fn echo(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }

    /// Grid spacing (m). Valid on a normalized config.
    pub fn dx(&self) -> f64 {
        number(&self.domain.width) / self.grid.nx as f64
    }

    /// Horizon radius δ = n·Δx.
    pub fn delta(&self) -> f64 {
        self.horizon_factor as f64 * self.dx()
    }

    pub fn rect(&self) -> Rect {
        Rect::centred(number(&self.domain.width), number(&self.domain.height))
    }

    pub fn total_time_si(&self) -> f64 {
        number(&self.total_time)
    }

    pub fn velocity_amplitude(&self) -> f64 {
        number(&self.initial_velocity_amplitude)
    }

    pub fn material_records(&self) -> Result<Vec<MaterialRecord>> {
        material_records_of(&self.materials)
    }

    pub fn crack_segments(&self) -> Vec<Segment> {
        self.cracks
            .iter()
            .map(|c| Segment::new(point_unchecked(&c.from), point_unchecked(&c.to)))
            .collect()
    }

    pub fn hole_circles(&self) -> Vec<Circle> {
        self.holes
            .iter()
            .map(|h| Circle { center: point_unchecked(&h.center), radius: number(&h.radius) })
            .collect()
    }

    pub fn inclusion_circles(&self) -> Vec<(Circle, u16)> {
        self.inclusions
            .iter()
            .map(|i| {
                (Circle { center: point_unchecked(&i.center), radius: number(&i.radius) }, i.material)
            })
            .collect()
    }

    /// DSIF probe parameters (tip, direction, rbar) of a normalized config.
    pub fn dsif_probe(&self) -> Option<(Vector2<f64>, Vector2<f64>, f64)> {
        self.dsif.as_ref().map(|d| {
            (
                point_unchecked(&d.tip),
                point_unchecked(&d.direction),
                number(d.rbar.as_ref().expect("normalized config")),
            )
        })
    }
}

fn positive(x: f64, key: &str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Config(format!("{key} must be positive, got {x}")))
    }
}

fn finite(x: f64, key: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Config(format!("{key} must be finite, got {x}")))
    }
}

fn number(q: &Quantity) -> f64 {
    match q {
        Quantity::Number(x) => *x,
        Quantity::Text(s) => panic!("config not normalized: quantity {s:?} still textual"),
    }
}

fn point_si(p: &[Quantity; 2], key: &str) -> Result<Vector2<f64>> {
    let x = finite(quantity_si(&p[0], Unit::Length, key)?, key)?;
    let y = finite(quantity_si(&p[1], Unit::Length, key)?, key)?;
    Ok(Vector2::new(x, y))
}

fn point_unchecked(p: &[Quantity; 2]) -> Vector2<f64> {
    Vector2::new(number(&p[0]), number(&p[1]))
}

fn normalize_circle(
    center: &mut [Quantity; 2],
    radius: &mut Quantity,
    rect: &Rect,
    key: &str,
    warnings: &mut Vec<String>,
) -> Result<()> {
    let c = point_si(center, &format!("{key}.center"))?;
    let r = positive(quantity_si(radius, Unit::Length, &format!("{key}.radius"))?, &format!("{key}.radius"))?;
    *center = [Quantity::Number(c.x), Quantity::Number(c.y)];
    *radius = Quantity::Number(r);
    let circle = Circle { center: c, radius: r };
    if circle.outside(rect) {
        warnings.push(format!("{key} lies entirely outside the domain and has no effect"));
    } else if !circle.inside(rect) {
        return Err(Error::Config(format!("{key} overlaps the domain boundary")));
    }
    Ok(())
}

fn normalize_material(
    m: &mut MaterialConfig,
    index: usize,
    global_theta: f64,
    damage_enabled: bool,
) -> Result<()> {
    let key = format!("materials[{index}]");
    let engineering = [&m.e1, &m.e2, &m.g12, &m.nu12];
    let direct = [&m.c11, &m.c12, &m.c22, &m.c33];
    let eng_given = engineering.iter().filter(|q| q.is_some()).count();
    let dir_given = direct.iter().filter(|q| q.is_some()).count();
    match (eng_given, dir_given) {
        (4, 0) => {}
        (0, 4) => {}
        (0, 0) => {
            return Err(Error::Config(format!(
                "{key}: give either e1/e2/g12/nu12 or c11/c12/c22/c33"
            )))
        }
        (4, _) | (_, 4) => {
            return Err(Error::Config(format!(
                "{key}: engineering constants and direct stiffness entries are mutually exclusive"
            )))
        }
        _ => {
            return Err(Error::Config(format!(
                "{key}: incomplete material definition (need all of e1/e2/g12/nu12 or all of c11/c12/c22/c33)"
            )))
        }
    }
    if dir_given == 0 && (m.c13.is_some() || m.c23.is_some()) {
        return Err(Error::Config(format!(
            "{key}: c13/c23 are only meaningful with a direct stiffness"
        )));
    }

    let si = |q: &mut Option<Quantity>, unit: Unit, name: &str| -> Result<()> {
        if let Some(v) = q.as_mut() {
            let x = finite(quantity_si(v, unit, &format!("{key}.{name}"))?, &format!("{key}.{name}"))?;
            *v = Quantity::Number(x);
        }
        Ok(())
    };
    si(&mut m.e1, Unit::Pressure, "e1")?;
    si(&mut m.e2, Unit::Pressure, "e2")?;
    si(&mut m.g12, Unit::Pressure, "g12")?;
    si(&mut m.nu12, Unit::Dimensionless, "nu12")?;
    si(&mut m.c11, Unit::Pressure, "c11")?;
    si(&mut m.c12, Unit::Pressure, "c12")?;
    si(&mut m.c22, Unit::Pressure, "c22")?;
    si(&mut m.c33, Unit::Pressure, "c33")?;
    si(&mut m.c13, Unit::Pressure, "c13")?;
    si(&mut m.c23, Unit::Pressure, "c23")?;
    if dir_given == 4 {
        m.c13.get_or_insert(Quantity::Number(0.0));
        m.c23.get_or_insert(Quantity::Number(0.0));
    }

    let rho = positive(
        quantity_si(&m.rho, Unit::Density, &format!("{key}.rho"))?,
        &format!("{key}.rho"),
    )?;
    m.rho = Quantity::Number(rho);

    let theta = match &m.theta {
        Some(q) => finite(quantity_si(q, Unit::Angle, &format!("{key}.theta"))?, &format!("{key}.theta"))?,
        None => global_theta,
    };
    m.theta = Some(Quantity::Number(theta));

    if let Some(s) = m.strengths.as_mut() {
        let lu = positive(
            quantity_si(&s.sigma_lu, Unit::Pressure, &format!("{key}.strengths.sigma_lu"))?,
            &format!("{key}.strengths.sigma_lu"),
        )?;
        let tu = positive(
            quantity_si(&s.sigma_tu, Unit::Pressure, &format!("{key}.strengths.sigma_tu"))?,
            &format!("{key}.strengths.sigma_tu"),
        )?;
        let ltu = positive(
            quantity_si(&s.tau_ltu, Unit::Pressure, &format!("{key}.strengths.tau_ltu"))?,
            &format!("{key}.strengths.tau_ltu"),
        )?;
        s.sigma_lu = Quantity::Number(lu);
        s.sigma_tu = Quantity::Number(tu);
        s.tau_ltu = Quantity::Number(ltu);
    } else if damage_enabled {
        return Err(Error::Config(format!(
            "{key}: damage is enabled but no strengths are given"
        )));
    }
    Ok(())
}

fn material_records_of(materials: &[MaterialConfig]) -> Result<Vec<MaterialRecord>> {
    materials
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let key = format!("materials[{i}]");
            let theta = match &m.theta {
                Some(q) => quantity_si(q, Unit::Angle, &format!("{key}.theta"))?,
                None => 0.0,
            };
            let rho = quantity_si(&m.rho, Unit::Density, &format!("{key}.rho"))?;
            let strengths = m
                .strengths
                .as_ref()
                .map(|s| -> Result<Strengths> {
                    Ok(Strengths {
                        sigma_lu: quantity_si(&s.sigma_lu, Unit::Pressure, "sigma_lu")?,
                        sigma_tu: quantity_si(&s.sigma_tu, Unit::Pressure, "sigma_tu")?,
                        tau_ltu: quantity_si(&s.tau_ltu, Unit::Pressure, "tau_ltu")?,
                    })
                })
                .transpose()?;
            if let (Some(e1), Some(e2), Some(g12), Some(nu12)) = (&m.e1, &m.e2, &m.g12, &m.nu12) {
                MaterialRecord::from_engineering(
                    quantity_si(e1, Unit::Pressure, "e1")?,
                    quantity_si(e2, Unit::Pressure, "e2")?,
                    quantity_si(g12, Unit::Pressure, "g12")?,
                    quantity_si(nu12, Unit::Dimensionless, "nu12")?,
                    theta,
                    rho,
                    strengths,
                )
            } else if let (Some(c11), Some(c12), Some(c22), Some(c33)) =
                (&m.c11, &m.c12, &m.c22, &m.c33)
            {
                let c13 = m.c13.as_ref().map_or(Ok(0.0), |q| quantity_si(q, Unit::Pressure, "c13"))?;
                let c23 = m.c23.as_ref().map_or(Ok(0.0), |q| quantity_si(q, Unit::Pressure, "c23"))?;
                let c = nalgebra::Matrix3::new(
                    quantity_si(c11, Unit::Pressure, "c11")?,
                    quantity_si(c12, Unit::Pressure, "c12")?,
                    c13,
                    quantity_si(c12, Unit::Pressure, "c12")?,
                    quantity_si(c22, Unit::Pressure, "c22")?,
                    c23,
                    c13,
                    c23,
                    quantity_si(c33, Unit::Pressure, "c33")?,
                );
                MaterialRecord::from_stiffness(c, theta, rho, strengths)
            } else {
                Err(Error::Material(format!("{key}: incomplete material definition")))
            }
        })
        .collect()
}

/// Names of the shipped scenario presets.
pub const PRESET_NAMES: [&str; 4] =
    ["edge_crack", "centred_crack", "inclusion_hole", "inclusion_hole_damage"];

/// A plate 0.1 m square with a horizontal edge crack to its centre, fibres
/// at 30°, stretched by an initial linear velocity field; no bond failure;
/// intensity factors sampled at the tip.
const EDGE_CRACK: &str = r#"
horizon_factor = 2
theta = 0.5235987755982988
initial_velocity_amplitude = 50.0
damage_enabled = false
total_time = 6.0e-5
snapshot_every = 2000
output_dir = "runs/edge_crack"

[domain]
width = 0.1
height = 0.1

[grid]
nx = 400
ny = 400

[[materials]]
e1 = 144.8e9
e2 = 11.7e9
g12 = 9.66e9
nu12 = 0.21
rho = 2710.0

[[cracks]]
from = [-0.05, 0.0]
to = [0.0, 0.0]

[dsif]
tip = [0.0, 0.0]
direction = [1.0, 0.0]
"#;

/// A 2:1 plate with a centred horizontal crack a/w = 0.2, laminate fibres at
/// 45°, bond failure on: the crack kinks to follow the fibres.
const CENTRED_CRACK: &str = r#"
horizon_factor = 3
theta = 0.7853981633974483
initial_velocity_amplitude = 50.0
damage_enabled = true
total_time = 4.0e-5
snapshot_every = 1000
output_dir = "runs/centred_crack"

[domain]
width = 0.125
height = 0.25

[grid]
nx = 300
ny = 600

[[materials]]
e1 = 136.0e9
e2 = 8.75e9
g12 = 5.5e9
nu12 = 0.3
rho = 1586.0

[materials.strengths]
sigma_lu = 1.67e9
sigma_tu = 6.0e7
tau_ltu = 7.0e7

[[cracks]]
from = [-0.025, 0.0]
to = [0.025, 0.0]
"#;

/// A 20×40 mm plate with an edge crack, a stiff inclusion above the crack
/// plane and a hole of the same radius below it; no bond failure;
/// intensity factors sampled at the tip.
const INCLUSION_HOLE: &str = r#"
horizon_factor = 2
theta = 0.7853981633974483
initial_velocity_amplitude = 50.0
damage_enabled = false
total_time = 8.0e-6
snapshot_every = 5000
output_dir = "runs/inclusion_hole"

[domain]
width = 0.02
height = 0.04

[grid]
nx = 400
ny = 800

[[materials]]
c11 = 155.43e9
c12 = 3.72e9
c22 = 16.34e9
c33 = 7.48e9
rho = 1600.0

[[materials]]
c11 = 235.0e9
c12 = 3.69e9
c22 = 2.0e9
c33 = 28.2e9
rho = 5670.0
theta = 0.0

[[cracks]]
from = [-0.01, 0.0]
to = [-0.006, 0.0]

[[holes]]
center = [0.0, -0.008]
radius = 0.0045

[[inclusions]]
center = [0.0, 0.008]
radius = 0.0045
material = 1

[dsif]
tip = [-0.006, 0.0]
direction = [1.0, 0.0]
"#;

/// The inclusion/hole plate with bond failure on: laminate plate strengths
/// against a stronger inclusion, so interface bonds fail by the plate's
/// surface.
const INCLUSION_HOLE_DAMAGE: &str = r#"
horizon_factor = 2
theta = 0.7853981633974483
initial_velocity_amplitude = 50.0
damage_enabled = true
total_time = 8.0e-6
snapshot_every = 5000
output_dir = "runs/inclusion_hole_damage"

[domain]
width = 0.02
height = 0.04

[grid]
nx = 400
ny = 800

[[materials]]
e1 = 136.0e9
e2 = 8.75e9
g12 = 5.5e9
nu12 = 0.3
rho = 1586.0

[materials.strengths]
sigma_lu = 1.67e9
sigma_tu = 6.0e7
tau_ltu = 7.0e7

[[materials]]
c11 = 235.0e9
c12 = 3.69e9
c22 = 2.0e9
c33 = 28.2e9
rho = 5670.0
theta = 0.0

[materials.strengths]
sigma_lu = 2.1e9
sigma_tu = 1.2e8
tau_ltu = 1.35e8

[[cracks]]
from = [-0.01, 0.0]
to = [-0.006, 0.0]

[[holes]]
center = [0.0, -0.008]
radius = 0.0045

[[inclusions]]
center = [0.0, 0.008]
radius = 0.0045
material = 1
"#;

/// Raw TOML text of a shipped preset.
pub fn preset_text(name: &str) -> Result<&'static str> {
    match name {
        "edge_crack" => Ok(EDGE_CRACK),
        "centred_crack" => Ok(CENTRED_CRACK),
        "inclusion_hole" => Ok(INCLUSION_HOLE),
        "inclusion_hole_damage" => Ok(INCLUSION_HOLE_DAMAGE),
        _ => Err(Error::Config(format!(
            "unknown preset {name:?} (available: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Loads a preset, applies `key.path=value` overrides to its raw form, and
/// normalizes. Returns the effective config and any validation warnings.
pub fn load_preset(name: &str, overrides: &[String]) -> Result<(ScenarioConfig, Vec<String>)> {
    let mut value: toml::Value = preset_text(name)?
        .parse()
        .map_err(|e| Error::Config(format!("preset {name}: {e}")))?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let config: ScenarioConfig =
        value.try_into().map_err(|e| Error::Config(format!("after overrides: {e}")))?;
    config.normalize()
}

/// Applies one `dotted.path=value` override to a parsed TOML document.
/// Integer path segments index arrays; the final segment may create a new
/// key; the value is parsed as TOML and falls back to a plain string.
pub fn apply_override(root: &mut toml::Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {spec:?} is not of the form key=value")))?;
    let path = path.trim();
    let raw = raw.trim();
    if path.is_empty() {
        return Err(Error::Config(format!("override {spec:?} has an empty key path")));
    }
    let parsed: toml::Value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("just inserted"),
        Err(_) => toml::Value::String(raw.to_string()),
    };

    let segments: Vec<&str> = path.split('.').collect();
    let mut cur = root;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        if let Ok(idx) = seg.parse::<usize>() {
            let arr = cur.as_array_mut().ok_or_else(|| {
                Error::Config(format!("override {path}: {seg} indexes a non-array"))
            })?;
            let len = arr.len();
            let slot = arr.get_mut(idx).ok_or_else(|| {
                Error::Config(format!("override {path}: index {idx} out of range (len {len})"))
            })?;
            if last {
                *slot = parsed;
                return Ok(());
            }
            cur = slot;
        } else {
            let table = cur.as_table_mut().ok_or_else(|| {
                Error::Config(format!("override {path}: {seg} addresses a non-table"))
            })?;
            if last {
                table.insert(seg.to_string(), parsed);
                return Ok(());
            }
            cur = table
                .entry(seg.to_string())
                .or_insert(toml::Value::Table(toml::Table::new()));
        }
    }
    unreachable!("loop returns on the last segment");
}
