//! Uniform particle discretisation of a rectangular plate and the bond
//! network connecting particles within each other's interaction radius.

use nalgebra::Vector2;

use crate::geometry::{segments_intersect, Circle, Rect, Segment};

/// Relative slack on δ² so lattice neighbors at exactly the interaction
/// radius survive floating rounding of their coordinates; their weight is
/// zero either way.
const BOND_RADIUS_SLACK: f64 = 1e-9;

/// Reference particle cloud: cell-centred positions on an nx×ny lattice,
/// with per-particle volume and material-region id. Plate thickness is 1 m,
/// so volumes are Δx·Δy·1.
#[derive(Clone, Debug)]
pub struct GridGeometry {
    pub positions: Vec<Vector2<f64>>,
    pub volumes: Vec<f64>,
    pub regions: Vec<u16>,
    pub rect: Rect,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GridGeometry {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Generates the cell-centred lattice over `rect`, omitting particles whose
/// centre falls strictly inside a hole and tagging particles strictly inside
/// an inclusion with that inclusion's region id (first matching inclusion
/// wins). Region 0 is the background plate.
pub fn generate_grid(
    rect: Rect,
    nx: usize,
    ny: usize,
    holes: &[Circle],
    inclusions: &[(Circle, u16)],
) -> GridGeometry {
    let dx = rect.width / nx as f64;
    let dy = rect.height / ny as f64;
    let volume = dx * dy; // unit thickness
    let mut positions = Vec::with_capacity(nx * ny);
    let mut regions = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        let y = rect.y0 + (iy as f64 + 0.5) * dy;
        for ix in 0..nx {
            let x = rect.x0 + (ix as f64 + 0.5) * dx;
            let p = Vector2::new(x, y);
            if holes.iter().any(|h| h.contains_strictly(p)) {
                continue;
            }
            let region = inclusions
                .iter()
                .find(|(c, _)| c.contains_strictly(p))
                .map(|&(_, r)| r)
                .unwrap_or(0);
            positions.push(p);
            regions.push(region);
        }
    }
    let volumes = vec![volume; positions.len()];
    GridGeometry { positions, volumes, regions, rect, nx, ny, dx, dy }
}

/// Bond network in compressed-row form. For particle `j`, the slots
/// `offsets[j]..offsets[j+1]` hold its neighbors: index, reference vector
/// ξ = x_n − x_j, weight ω = 1 − |ξ|/δ, neighbor volume, and activity flag μ.
/// `partner[s]` is the slot of the mirror record (n, j), so symmetric breaks
/// are O(1).
#[derive(Clone, Debug)]
pub struct BondSet {
    pub offsets: Vec<usize>,
    pub neighbor: Vec<u32>,
    pub xi: Vec<Vector2<f64>>,
    pub omega: Vec<f64>,
    pub volume: Vec<f64>,
    pub active: Vec<bool>,
    pub partner: Vec<u32>,
    pub delta: f64,
}

impl BondSet {
    pub fn particle_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Slot range of particle `j`'s bonds.
    pub fn row(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j + 1]
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
}

/// Construction statistics and non-fatal irregularities.
#[derive(Clone, Debug, Default)]
pub struct BuildReport {
    pub particle_count: usize,
    /// Directed bond records (each pair appears twice).
    pub bond_count: usize,
    /// Pairs deactivated by pre-crack cutting.
    pub precut_pairs: usize,
    pub min_neighbors: usize,
    pub max_neighbors: usize,
    pub warnings: Vec<String>,
}

/// Builds the bond network: all particle pairs with 0 < |ξ| ≤ δ are bonded,
/// and bonds whose segment crosses any pre-crack start inactive.
pub fn build_bonds(grid: &GridGeometry, delta: f64, cracks: &[Segment]) -> (BondSet, BuildReport) {
    let n = grid.len();
    let limit = delta * delta * (1.0 + BOND_RADIUS_SLACK);

    // Spatial bins of side delta over the bounding rectangle.
    let bx = ((grid.rect.width / delta).ceil() as usize).max(1);
    let by = ((grid.rect.height / delta).ceil() as usize).max(1);
    let bin_of = |p: Vector2<f64>| -> (usize, usize) {
        let ix = (((p.x - grid.rect.x0) / delta) as usize).min(bx - 1);
        let iy = (((p.y - grid.rect.y0) / delta) as usize).min(by - 1);
        (ix, iy)
    };
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); bx * by];
    for (j, &p) in grid.positions.iter().enumerate() {
        let (ix, iy) = bin_of(p);
        bins[iy * bx + ix].push(j as u32);
    }

    let mut offsets = Vec::with_capacity(n + 1);
    let mut neighbor: Vec<u32> = Vec::new();
    let mut scratch: Vec<u32> = Vec::new();
    offsets.push(0usize);
    for j in 0..n {
        let p = grid.positions[j];
        let (cx, cy) = bin_of(p);
        scratch.clear();
        for iy in cy.saturating_sub(1)..=(cy + 1).min(by - 1) {
            for ix in cx.saturating_sub(1)..=(cx + 1).min(bx - 1) {
                for &k in &bins[iy * bx + ix] {
                    if k as usize == j {
                        continue;
                    }
                    let d2 = (grid.positions[k as usize] - p).norm_squared();
                    if d2 <= limit && d2 > 0.0 {
                        scratch.push(k);
                    }
                }
            }
        }
        scratch.sort_unstable();
        neighbor.extend_from_slice(&scratch);
        offsets.push(neighbor.len());
    }

    let total = neighbor.len();
    let mut xi = Vec::with_capacity(total);
    let mut omega = Vec::with_capacity(total);
    let mut volume = Vec::with_capacity(total);
    let mut active = vec![true; total];
    let mut partner = vec![0u32; total];
    for j in 0..n {
        for s in offsets[j]..offsets[j + 1] {
            let k = neighbor[s] as usize;
            let v = grid.positions[k] - grid.positions[j];
            xi.push(v);
            omega.push((1.0 - v.norm() / delta).max(0.0));
            volume.push(grid.volumes[k]);
        }
    }
    for j in 0..n {
        for s in offsets[j]..offsets[j + 1] {
            let k = neighbor[s] as usize;
            let row = &neighbor[offsets[k]..offsets[k + 1]];
            let inner = row.binary_search(&(j as u32)).expect("mirror bond record");
            partner[s] = (offsets[k] + inner) as u32;
        }
    }

    let mut precut_pairs = 0usize;
    if !cracks.is_empty() {
        for j in 0..n {
            for s in offsets[j]..offsets[j + 1] {
                let k = neighbor[s] as usize;
                if k < j {
                    continue;
                }
                let bond = Segment::new(grid.positions[j], grid.positions[k]);
                if cracks.iter().any(|c| segments_intersect(&bond, c)) {
                    active[s] = false;
                    active[partner[s] as usize] = false;
                    precut_pairs += 1;
                }
            }
        }
    }

    let mut report = BuildReport {
        particle_count: n,
        bond_count: total,
        precut_pairs,
        min_neighbors: usize::MAX,
        max_neighbors: 0,
        ..Default::default()
    };
    for j in 0..n {
        let len = offsets[j + 1] - offsets[j];
        report.min_neighbors = report.min_neighbors.min(len);
        report.max_neighbors = report.max_neighbors.max(len);
    }
    if n == 0 {
        report.min_neighbors = 0;
        report.warnings.push("empty grid".to_string());
    } else if report.min_neighbors < 3 {
        report.warnings.push(format!(
            "particles with fewer than 3 neighbors exist (minimum {}); their \
             deformation state may be indeterminate",
            report.min_neighbors
        ));
    }

    (
        BondSet { offsets, neighbor, xi, omega, volume, active, partner, delta },
        report,
    )
}
