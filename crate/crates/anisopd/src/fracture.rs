//! Fracture post-processing: the near-tip crack-opening probe, conversion of
//! an opening into the stress-intensity pair, comparison of intensity-factor
//! time series, and extraction of crack paths from the damage field.

use nalgebra::Vector2;

use crate::grid::GridGeometry;
use crate::stroh::StrohData;
use crate::{Error, Result};

/// One stress-intensity measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DsifSample {
    pub time: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Relative displacement across the crack, `u(upper) − u(lower)` in global
/// axes, interpolated on the particle rows adjacent to the crack faces at
/// the point `tip − rbar·dir`.
///
/// `dir` is the propagation direction (unit vector from crack mouth towards
/// the tip), `crack_length` the distance from tip back to the mouth; the
/// probe refuses to sample beyond the crack or off the grid.
pub fn crack_opening(
    grid: &GridGeometry,
    u: &[Vector2<f64>],
    tip: Vector2<f64>,
    dir: Vector2<f64>,
    rbar: f64,
    crack_length: f64,
) -> Result<Vector2<f64>> {
    if !(rbar > 0.0) {
        return Err(Error::Measurement(format!(
            "sampling offset must be positive, got {rbar}"
        )));
    }
    if rbar > crack_length {
        return Err(Error::Measurement(format!(
            "sampling offset {rbar} reaches beyond the crack (length {crack_length})"
        )));
    }
    let norm = dir.norm();
    if !(norm > 0.0) {
        return Err(Error::Measurement("crack direction must be nonzero".to_string()));
    }
    let dir = dir / norm;
    let normal = Vector2::new(-dir.y, dir.x);
    let t_s = -rbar;
    let window = 3.0 * grid.dx;

    // Pass 1: per side, the offset of the particle row nearest the crack
    // line, among particles alongside the sampling point.
    let mut s_min = [f64::INFINITY; 2];
    for p in &grid.positions {
        let rel = p - tip;
        let t = dir.dot(&rel);
        if (t - t_s).abs() > window {
            continue;
        }
        let s = normal.dot(&rel);
        if s > 0.0 {
            s_min[0] = s_min[0].min(s);
        } else if s < 0.0 {
            s_min[1] = s_min[1].min(-s);
        }
    }
    if !(s_min[0].is_finite() && s_min[1].is_finite()) {
        return Err(Error::Measurement(format!(
            "no particle rows adjacent to the crack near ({:.6e}, {:.6e})",
            tip.x + t_s * dir.x,
            tip.y + t_s * dir.y
        )));
    }

    // Pass 2: on each nearest row, bracket the sampling station along the
    // crack and interpolate the displacement linearly.
    let mut opening = Vector2::zeros();
    for (side, sign) in [(0usize, 1.0f64), (1, -1.0)] {
        let limit = 1.5 * s_min[side];
        let mut lo: Option<(f64, Vector2<f64>)> = None;
        let mut hi: Option<(f64, Vector2<f64>)> = None;
        for (j, p) in grid.positions.iter().enumerate() {
            let rel = p - tip;
            let t = dir.dot(&rel);
            if (t - t_s).abs() > window {
                continue;
            }
            let s = sign * normal.dot(&rel);
            if s <= 0.0 || s > limit {
                continue;
            }
            if t <= t_s && lo.map_or(true, |(bt, _)| t > bt) {
                lo = Some((t, u[j]));
            }
            if t >= t_s && hi.map_or(true, |(bt, _)| t < bt) {
                hi = Some((t, u[j]));
            }
        }
        let (ul, uh, w) = match (lo, hi) {
            (Some((tl, ul)), Some((th, uh))) => {
                let w = if th > tl { (t_s - tl) / (th - tl) } else { 0.0 };
                (ul, uh, w)
            }
            _ => {
                return Err(Error::Measurement(format!(
                    "crack face row does not bracket the sampling station on the {} side",
                    if side == 0 { "upper" } else { "lower" }
                )))
            }
        };
        let us = ul * (1.0 - w) + uh * w;
        opening += us * sign;
    }
    Ok(opening)
}

/// Stress-intensity pair from a crack opening sampled `rbar` behind the tip:
/// [K_II, K_I]ᵀ = sqrt(π/(8·rbar)) · H⁻¹ · Δu. Returns (K_I, K_II).
pub fn dsif(opening: &Vector2<f64>, stroh: &StrohData, rbar: f64) -> Result<(f64, f64)> {
    if !(rbar > 0.0) {
        return Err(Error::Measurement(format!(
            "sampling offset must be positive, got {rbar}"
        )));
    }
    let k = stroh.h_inverse()? * opening * (std::f64::consts::PI / (8.0 * rbar)).sqrt();
    Ok((k.y, k.x))
}

/// Relative L2 distance between two time series sampled at possibly
/// different instants: the test series is linearly resampled (clamped at its
/// ends) onto the reference instants, and the result is
/// ‖test − reference‖₂ / ‖reference‖₂ over those instants.
pub fn l2_error(test: &[(f64, f64)], reference: &[(f64, f64)]) -> Result<f64> {
    if test.is_empty() || reference.is_empty() {
        return Err(Error::Measurement(
            "cannot compare empty intensity-factor series".to_string(),
        ));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &(t, r) in reference {
        let v = resample(test, t);
        num += (v - r) * (v - r);
        den += r * r;
    }
    if den == 0.0 {
        return Err(Error::Measurement(
            "reference intensity-factor series is identically zero".to_string(),
        ));
    }
    Ok((num / den).sqrt())
}

/// Linear interpolation of a time-sorted series, clamped at both ends.
fn resample(series: &[(f64, f64)], t: f64) -> f64 {
    let n = series.len();
    let idx = series.partition_point(|&(st, _)| st < t);
    if idx == 0 {
        return series[0].1;
    }
    if idx == n {
        return series[n - 1].1;
    }
    let (t0, v0) = series[idx - 1];
    let (t1, v1) = series[idx];
    if t1 > t0 {
        let w = (t - t0) / (t1 - t0);
        v0 * (1.0 - w) + v1 * w
    } else {
        v0
    }
}

/// A connected cluster of newly damaged particles.
#[derive(Clone, Debug)]
pub struct PathCluster {
    /// Particles in the cluster.
    pub count: usize,
    pub centroid: Vector2<f64>,
    /// Principal direction, degrees in [0, 180) counterclockwise from +x.
    pub angle_deg: f64,
    /// Axis-aligned bounding box.
    pub min: Vector2<f64>,
    pub max: Vector2<f64>,
    /// Mean particle positions binned along the principal direction.
    pub polyline: Vec<Vector2<f64>>,
}

/// Clusters the particles whose damage grew at least `threshold` above the
/// baseline (pre-cut crack faces subtract out), linking particles closer
/// than `link_radius`, and characterizes each cluster by its principal
/// direction. Clusters are ordered largest first.
pub fn crack_path(
    positions: &[Vector2<f64>],
    phi: &[f64],
    baseline: &[f64],
    threshold: f64,
    link_radius: f64,
) -> Vec<PathCluster> {
    assert_eq!(positions.len(), phi.len());
    assert_eq!(positions.len(), baseline.len());
    let damaged: Vec<usize> = (0..phi.len())
        .filter(|&j| phi[j] - baseline[j] >= threshold)
        .collect();
    if damaged.is_empty() {
        return Vec::new();
    }

    // Spatial hash with cells of the link radius: neighbours live in the
    // 3×3 cell block around a particle.
    let bin = |p: &Vector2<f64>| -> (i64, i64) {
        ((p.x / link_radius).floor() as i64, (p.y / link_radius).floor() as i64)
    };
    let mut cells: std::collections::HashMap<(i64, i64), Vec<usize>> =
        std::collections::HashMap::new();
    for &j in &damaged {
        cells.entry(bin(&positions[j])).or_default().push(j);
    }

    let mut visited: std::collections::HashSet<usize> = std::collections::HashSet::new();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let r2 = link_radius * link_radius;
    for &seed in &damaged {
        if !visited.insert(seed) {
            continue;
        }
        let mut members = vec![seed];
        let mut queue = std::collections::VecDeque::from([seed]);
        while let Some(j) = queue.pop_front() {
            let (cx, cy) = bin(&positions[j]);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let Some(bucket) = cells.get(&(cx + dx, cy + dy)) else {
                        continue;
                    };
                    for &k in bucket {
                        if (positions[k] - positions[j]).norm_squared() <= r2
                            && visited.insert(k)
                        {
                            members.push(k);
                            queue.push_back(k);
                        }
                    }
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }
    clusters.sort_by_key(|c| (std::cmp::Reverse(c.len()), c[0]));

    clusters
        .into_iter()
        .map(|members| {
            let n = members.len() as f64;
            let mut centroid = Vector2::zeros();
            let mut min = Vector2::new(f64::INFINITY, f64::INFINITY);
            let mut max = Vector2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
            for &j in &members {
                let p = positions[j];
                centroid += p;
                min.x = min.x.min(p.x);
                min.y = min.y.min(p.y);
                max.x = max.x.max(p.x);
                max.y = max.y.max(p.y);
            }
            centroid /= n;
            let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
            for &j in &members {
                let d = positions[j] - centroid;
                sxx += d.x * d.x;
                syy += d.y * d.y;
                sxy += d.x * d.y;
            }
            let mut angle_deg = 0.5 * (2.0 * sxy).atan2(sxx - syy) * 180.0
                / std::f64::consts::PI;
            if angle_deg < 0.0 {
                angle_deg += 180.0;
            }
            let axis_rad = angle_deg * std::f64::consts::PI / 180.0;
            let axis = Vector2::new(axis_rad.cos(), axis_rad.sin());
            let polyline = polyline_along(&members, positions, centroid, axis, link_radius);
            PathCluster { count: members.len(), centroid, angle_deg, min, max, polyline }
        })
        .collect()
}

fn polyline_along(
    members: &[usize],
    positions: &[Vector2<f64>],
    centroid: Vector2<f64>,
    axis: Vector2<f64>,
    bin_width: f64,
) -> Vec<Vector2<f64>> {
    let tau: Vec<f64> = members.iter().map(|&j| axis.dot(&(positions[j] - centroid))).collect();
    let lo = tau.iter().cloned().fold(f64::INFINITY, f64::min);
    let bins = |t: f64| ((t - lo) / bin_width).floor() as i64;
    let mut acc: std::collections::BTreeMap<i64, (Vector2<f64>, usize)> =
        std::collections::BTreeMap::new();
    for (&j, &t) in members.iter().zip(&tau) {
        let e = acc.entry(bins(t)).or_insert((Vector2::zeros(), 0));
        e.0 += positions[j];
        e.1 += 1;
    }
    acc.into_values().map(|(sum, n)| sum / n as f64).collect()
}

/// Distance between two undirected line directions, in degrees within
/// [0, 90].
pub fn angle_distance_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}
