//! Mappings between data values and work-surface coordinates.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::dataset::{GeoRow, ScatterRow, SeriesMark, TimeSample};
use super::robot::{MotionLimits, Rgb, RobotPose, Surface};
use super::SwarmError;

/// Affine calibration between a value range and a millimetre range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub value: [f64; 2],
    pub mm: [f64; 2],
}

impl Axis {
    pub fn new(value: [f64; 2], mm: [f64; 2]) -> Self {
        Self { value, mm }
    }

    fn validate(&self, name: &'static str) -> Result<(), SwarmError> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        if ok(self.value) && ok(self.mm) {
            Ok(())
        } else {
            Err(SwarmError::DegenerateAxis(name))
        }
    }

    /// Value → mm, clamped to the calibrated range. The flag reports clamping.
    pub fn to_mm(&self, value: f64) -> (f64, bool) {
        let clamped = value.clamp(self.value[0], self.value[1]);
        (self.to_mm_unclamped(clamped), clamped != value)
    }

    pub fn to_mm_unclamped(&self, value: f64) -> f64 {
        let t = (value - self.value[0]) / (self.value[1] - self.value[0]);
        self.mm[0] + t * (self.mm[1] - self.mm[0])
    }

    pub fn to_value(&self, mm: f64) -> f64 {
        let t = (mm - self.mm[0]) / (self.mm[1] - self.mm[0]);
        self.value[0] + t * (self.value[1] - self.value[0])
    }

    pub fn value_span(&self) -> f64 {
        self.value[1] - self.value[0]
    }

    pub fn mm_span(&self) -> f64 {
        self.mm[1] - self.mm[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    IterationChart,
    TimeSeries,
    Scatter,
    GeoMap,
}

/// A layout and its calibration. Serialised as layout-calibration JSON
/// tagged by `"kind"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layout {
    /// Node robots stand in evenly spaced columns across `x_mm`; height
    /// encodes the node value.
    IterationChart { x_mm: [f64; 2], y: Axis },
    /// `x` maps time, `y` maps value.
    TimeSeries { x: Axis, y: Axis },
    Scatter {
        x: Axis,
        y: Axis,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scalar_range: Option<[f64; 2]>,
    },
    /// Equirectangular: `lon` maps to x, `lat` to y.
    GeoMap {
        lon: Axis,
        lat: Axis,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scalar_range: Option<[f64; 2]>,
    },
}

impl Default for Layout {
    fn default() -> Self {
        Layout::IterationChart {
            x_mm: [50.0, 950.0],
            y: Axis::new([0.0, 10.0], [50.0, 650.0]),
        }
    }
}

impl Layout {
    pub fn kind(&self) -> LayoutKind {
        match self {
            Layout::IterationChart { .. } => LayoutKind::IterationChart,
            Layout::TimeSeries { .. } => LayoutKind::TimeSeries,
            Layout::Scatter { .. } => LayoutKind::Scatter,
            Layout::GeoMap { .. } => LayoutKind::GeoMap,
        }
    }

    pub fn validate(&self) -> Result<(), SwarmError> {
        match self {
            Layout::IterationChart { x_mm, y } => {
                Axis::new([0.0, 1.0], *x_mm).validate("x")?;
                y.validate("y")
            }
            Layout::TimeSeries { x, y } | Layout::Scatter { x, y, .. } => {
                x.validate("x")?;
                y.validate("y")
            }
            Layout::GeoMap { lon, lat, .. } => {
                lon.validate("longitude")?;
                lat.validate("latitude")
            }
        }
    }

    fn expect(&self, kind: LayoutKind) -> Result<(), SwarmError> {
        if self.kind() == kind {
            Ok(())
        } else {
            Err(SwarmError::WrongLayout {
                expected: kind,
                actual: self.kind(),
            })
        }
    }

    /// How many node columns fit at one body diameter spacing.
    pub fn column_capacity(&self, limits: &MotionLimits) -> usize {
        match self {
            Layout::IterationChart { x_mm, .. } => ((x_mm[1] - x_mm[0]) / limits.body_diameter()).floor() as usize + 1,
            _ => 0,
        }
    }
}

/// A computed pose plus whether the input had to be clamped into range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub pose: RobotPose,
    pub clamped: bool,
}

/// Pose of node `node` out of `n` in an iteration chart.
pub fn value_to_pose(
    layout: &Layout,
    limits: &MotionLimits,
    node: usize,
    n: usize,
    value: f64,
) -> Result<Placement, SwarmError> {
    layout.expect(LayoutKind::IterationChart)?;
    layout.validate()?;
    let Layout::IterationChart { x_mm, y } = layout else { unreachable!() };
    let capacity = layout.column_capacity(limits);
    if n > capacity {
        return Err(SwarmError::ColumnCapacity { n, capacity });
    }
    if node >= n {
        return Err(SwarmError::NodeIndex { node, n });
    }
    let x = if n == 1 {
        0.5 * (x_mm[0] + x_mm[1])
    } else {
        x_mm[0] + node as f64 * (x_mm[1] - x_mm[0]) / (n - 1) as f64
    };
    let (y_mm, clamped) = y.to_mm(value);
    Ok(Placement {
        pose: RobotPose::at(x, y_mm),
        clamped,
    })
}

/// Value encoded by a node robot's height in an iteration chart.
pub fn pose_to_value(layout: &Layout, surface: &Surface, pose: &RobotPose) -> Result<f64, SwarmError> {
    layout.expect(LayoutKind::IterationChart)?;
    layout.validate()?;
    surface.check(pose.x, pose.y)?;
    let Layout::IterationChart { y, .. } = layout else { unreachable!() };
    Ok(y.to_value(pose.y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub t_min: f64,
    pub t_max: f64,
}

/// Time range selected by two slider widgets.
///
/// Endpoints follow the widgets' x positions through the layout's time axis;
/// order does not matter. Two bodies cannot stand closer than one diameter,
/// so a narrower window is widened to that width around its centre.
pub fn timeseries_window(
    a: &RobotPose,
    b: &RobotPose,
    layout: &Layout,
    limits: &MotionLimits,
) -> Result<TimeWindow, SwarmError> {
    layout.expect(LayoutKind::TimeSeries)?;
    layout.validate()?;
    let Layout::TimeSeries { x, .. } = layout else { unreachable!() };
    let ta = x.to_value(a.x).clamp(x.value[0], x.value[1]);
    let tb = x.to_value(b.x).clamp(x.value[0], x.value[1]);
    let (mut lo, mut hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
    let min_width = (limits.body_diameter() / x.mm_span() * x.value_span()).min(x.value_span());
    if hi - lo < min_width {
        let mid = 0.5 * (lo + hi);
        lo = (mid - 0.5 * min_width).max(x.value[0]);
        hi = (lo + min_width).min(x.value[1]);
        lo = hi - min_width;
    }
    Ok(TimeWindow { t_min: lo, t_max: hi })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesPlacement {
    /// `(sample index, pose)` for every sample shown.
    pub poses: Vec<(usize, RobotPose)>,
    /// More samples fell inside the window than robots were available.
    pub downsampled: bool,
    /// Some value fell outside the y calibration.
    pub clamped: bool,
}

/// Targets for data robots showing `samples` inside `window`, stretched
/// across the layout's x range.
pub fn place_timeseries(
    samples: &[TimeSample],
    window: TimeWindow,
    layout: &Layout,
    robots: usize,
) -> Result<TimeSeriesPlacement, SwarmError> {
    layout.expect(LayoutKind::TimeSeries)?;
    layout.validate()?;
    let Layout::TimeSeries { x, y } = layout else { unreachable!() };
    let view = Axis::new([window.t_min, window.t_max], x.mm);
    let inside: Vec<usize> = (0..samples.len())
        .filter(|&i| (window.t_min..=window.t_max).contains(&samples[i].t))
        .collect();
    let downsampled = inside.len() > robots;
    let chosen: Vec<usize> = if !downsampled {
        inside
    } else if robots == 0 {
        Vec::new()
    } else if robots == 1 {
        vec![inside[0]]
    } else {
        let last = (inside.len() - 1) as f64;
        (0..robots)
            .map(|k| inside[(k as f64 * last / (robots - 1) as f64).round() as usize])
            .collect()
    };
    let mut clamped = false;
    let poses = chosen
        .into_iter()
        .map(|i| {
            let (ym, c) = y.to_mm(samples[i].value);
            clamped |= c;
            (i, RobotPose::at(view.to_mm_unclamped(samples[i].t), ym))
        })
        .collect();
    Ok(TimeSeriesPlacement {
        poses,
        downsampled,
        clamped,
    })
}

/// Categorical LED colours for data series, in order of first appearance.
pub const PALETTE: [Rgb; 8] = [
    Rgb([31, 119, 180]),
    Rgb([255, 127, 14]),
    Rgb([44, 160, 44]),
    Rgb([214, 39, 40]),
    Rgb([148, 103, 189]),
    Rgb([140, 86, 75]),
    Rgb([227, 119, 194]),
    Rgb([127, 127, 127]),
];

/// Stops of the scalar colour ramp, low to high.
pub const RAMP: [Rgb; 5] = [
    Rgb([68, 1, 84]),
    Rgb([59, 82, 139]),
    Rgb([33, 145, 140]),
    Rgb([94, 201, 98]),
    Rgb([253, 231, 37]),
];

/// Linear interpolation along [`RAMP`]; `t` is clamped to `[0, 1]`.
pub fn ramp_color(t: f64) -> Rgb {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let segments = (RAMP.len() - 1) as f64;
    let pos = t * segments;
    let k = (pos.floor() as usize).min(RAMP.len() - 2);
    let f = pos - k as f64;
    let (a, b) = (RAMP[k].0, RAMP[k + 1].0);
    let mut out = [0u8; 3];
    for c in 0..3 {
        out[c] = (a[c] as f64 + f * (b[c] as f64 - a[c] as f64)).round() as u8;
    }
    Rgb(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Scatter(Vec<ScatterRow>),
    Geo(Vec<GeoRow>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placed {
    pub pose: RobotPose,
    pub color: Rgb,
    pub clamped: bool,
}

fn scalar_bounds(explicit: Option<[f64; 2]>, values: impl Iterator<Item = f64>) -> [f64; 2] {
    explicit.unwrap_or_else(|| {
        values.fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], v| [lo.min(v), hi.max(v)])
    })
}

fn scalar_t(v: f64, range: [f64; 2]) -> (f64, bool) {
    if !(range[1] > range[0]) {
        return (0.0, false);
    }
    let t = (v - range[0]) / (range[1] - range[0]);
    (t.clamp(0.0, 1.0), !(0.0..=1.0).contains(&t))
}

/// Poses and LED colours for scatterplot or map rows.
pub fn place_dataset(rows: &Dataset, layout: &Layout) -> Result<Vec<Placed>, SwarmError> {
    layout.validate()?;
    match (rows, layout) {
        (Dataset::Scatter(rows), Layout::Scatter { x, y, scalar_range }) => {
            let range = scalar_bounds(
                *scalar_range,
                rows.iter().filter_map(|r| match r.mark {
                    SeriesMark::Scalar(v) => Some(v),
                    SeriesMark::Series(_) => None,
                }),
            );
            let mut series: HashMap<&str, usize> = HashMap::new();
            Ok(rows
                .iter()
                .map(|r| {
                    let (xm, cx) = x.to_mm(r.x);
                    let (ym, cy) = y.to_mm(r.y);
                    let (color, cs) = match &r.mark {
                        SeriesMark::Series(name) => {
                            let next = series.len();
                            let k = *series.entry(name.as_str()).or_insert(next);
                            (PALETTE[k % PALETTE.len()], false)
                        }
                        SeriesMark::Scalar(v) => {
                            let (t, c) = scalar_t(*v, range);
                            (ramp_color(t), c)
                        }
                    };
                    Placed {
                        pose: RobotPose::at(xm, ym),
                        color,
                        clamped: cx || cy || cs,
                    }
                })
                .collect())
        }
        (Dataset::Geo(rows), Layout::GeoMap { lon, lat, scalar_range }) => {
            let range = scalar_bounds(*scalar_range, rows.iter().map(|r| r.scalar));
            Ok(rows
                .iter()
                .map(|r| {
                    let (xm, cx) = lon.to_mm(r.lon);
                    let (ym, cy) = lat.to_mm(r.lat);
                    let (t, cs) = scalar_t(r.scalar, range);
                    Placed {
                        pose: RobotPose::at(xm, ym),
                        color: ramp_color(t),
                        clamped: cx || cy || cs,
                    }
                })
                .collect())
        }
        (Dataset::Scatter(_), other) => Err(SwarmError::WrongLayout {
            expected: LayoutKind::Scatter,
            actual: other.kind(),
        }),
        (Dataset::Geo(_), other) => Err(SwarmError::WrongLayout {
            expected: LayoutKind::GeoMap,
            actual: other.kind(),
        }),
    }
}
