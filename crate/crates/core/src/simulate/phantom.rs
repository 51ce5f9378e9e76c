use std::f64::consts::PI;
use std::path::PathBuf;

use super::SimulateError;
use crate::grid::ImageGrid;

/// Smallest side length accepted by the 2D phantom generators.
pub const MIN_PHANTOM_SIDE: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub enum PhantomKind {
    Shape,
    VascularTree,
    Delta,
    /// Image read from a container file by the caller.
    Custom(PathBuf),
}

/// Regions of the piecewise-constant shape phantom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShapeRegion {
    Background,
    Triangle,
    Ellipse,
    Rectangle,
    Disk,
}

impl ShapeRegion {
    pub fn value(self) -> f64 {
        match self {
            ShapeRegion::Background => 0.0,
            ShapeRegion::Triangle => 0.75,
            ShapeRegion::Ellipse => 1.0,
            ShapeRegion::Rectangle => 0.5,
            ShapeRegion::Disk => 0.25,
        }
    }
}

fn check_2d(dims: &[usize], min: usize) -> Result<(), SimulateError> {
    if dims.len() != 2 {
        return Err(SimulateError::GridTooSmall {
            dims: dims.to_vec(),
            reason: "phantom needs a 2D grid".into(),
        });
    }
    if dims.iter().any(|&d| d < min) {
        return Err(SimulateError::GridTooSmall {
            dims: dims.to_vec(),
            reason: format!("every side must be at least {min}"),
        });
    }
    Ok(())
}

/// Which shape each pixel centre falls into. Coordinates are normalised to
/// the unit square with `u` along columns and `v` along rows; the shapes are
/// pairwise disjoint.
pub fn shape_phantom_regions(dims: &[usize]) -> Result<Vec<ShapeRegion>, SimulateError> {
    check_2d(dims, MIN_PHANTOM_SIDE)?;
    let (rows, cols) = (dims[0], dims[1]);
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let u = (c as f64 + 0.5) / cols as f64;
            let v = (r as f64 + 0.5) / rows as f64;
            out.push(classify(u, v));
        }
    }
    Ok(out)
}

fn classify(u: f64, v: f64) -> ShapeRegion {
    if in_triangle((u, v), (0.12, 0.88), (0.46, 0.88), (0.29, 0.52)) {
        ShapeRegion::Triangle
    } else if ((u - 0.70) / 0.17).powi(2) + ((v - 0.30) / 0.12).powi(2) <= 1.0 {
        ShapeRegion::Ellipse
    } else if (0.56..=0.88).contains(&u) && (0.58..=0.86).contains(&v) {
        ShapeRegion::Rectangle
    } else if (u - 0.25).powi(2) + (v - 0.25).powi(2) <= 0.1 * 0.1 {
        ShapeRegion::Disk
    } else {
        ShapeRegion::Background
    }
}

fn in_triangle(p: (f64, f64), a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> bool {
    let cross = |o: (f64, f64), s: (f64, f64), t: (f64, f64)| {
        (s.0 - o.0) * (t.1 - o.1) - (s.1 - o.1) * (t.0 - o.0)
    };
    let d1 = cross(a, b, p);
    let d2 = cross(b, c, p);
    let d3 = cross(c, a, p);
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}

/// Piecewise-constant phantom: a triangle at 0.75, an ellipse at 1.0, a
/// rectangle at 0.5 and a disk at 0.25 on a zero background.
pub fn make_shape_phantom(dims: &[usize]) -> Result<ImageGrid, SimulateError> {
    let values = shape_phantom_regions(dims)?
        .into_iter()
        .map(ShapeRegion::value)
        .collect();
    Ok(ImageGrid::new(dims, values)?)
}

/// Deterministic binary branching tree of 1-3 px wide vessels at intensity
/// 1.0, growing upwards from the bottom edge.
pub fn make_vascular_phantom(dims: &[usize]) -> Result<ImageGrid, SimulateError> {
    check_2d(dims, MIN_PHANTOM_SIDE)?;
    let (rows, cols) = (dims[0], dims[1]);
    let mut img = ImageGrid::zeros(dims)?;
    let start = (cols as f64 / 2.0 - 0.5, rows as f64 - 1.5);
    let trunk = 0.3 * rows as f64;
    grow_branch(&mut img, start, -PI / 2.0, trunk, 0);
    Ok(img)
}

const MAX_DEPTH: usize = 5;

fn grow_branch(img: &mut ImageGrid, start: (f64, f64), angle: f64, length: f64, depth: usize) {
    let (rows, cols) = (img.dims()[0] as f64, img.dims()[1] as f64);
    let end = (
        start.0 + length * angle.cos(),
        start.1 + length * angle.sin(),
    );
    let inside = |p: (f64, f64)| p.0 >= 0.5 && p.0 <= cols - 1.5 && p.1 >= 0.5 && p.1 <= rows - 1.5;
    if !inside(end) {
        return;
    }
    let width = match depth {
        0 => 3.0,
        1 | 2 => 2.0,
        _ => 1.0,
    };
    draw_segment(img, start, end, width);
    if depth + 1 > MAX_DEPTH || length * 0.72 < 2.0 {
        return;
    }
    // slightly asymmetric split so the two subtrees differ
    let spread = (26.0 + 4.0 * depth as f64).to_radians();
    grow_branch(img, end, angle - spread, length * 0.74, depth + 1);
    grow_branch(img, end, angle + 0.8 * spread, length * 0.66, depth + 1);
}

fn draw_segment(img: &mut ImageGrid, a: (f64, f64), b: (f64, f64), width: f64) {
    let (rows, cols) = (img.dims()[0] as isize, img.dims()[1] as isize);
    let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
    let steps = (len / 0.25).ceil().max(1.0) as usize;
    let radius = width / 2.0;
    let reach = radius.ceil() as isize;
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let (x, y) = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
        let (cx, cy) = (x.round() as isize, y.round() as isize);
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let (px, py) = (cx + dx, cy + dy);
                if px < 0 || py < 0 || px >= cols || py >= rows {
                    continue;
                }
                let d2 = (px as f64 - x).powi(2) + (py as f64 - y).powi(2);
                if (dx == 0 && dy == 0) || d2 <= radius * radius {
                    let off = (py * cols + px) as usize;
                    img.values_mut()[off] = 1.0;
                }
            }
        }
    }
}

/// A single unit voxel at the grid centre.
pub fn make_delta_phantom(dims: &[usize]) -> Result<ImageGrid, SimulateError> {
    let mut img = ImageGrid::zeros(dims)?;
    let centre: Vec<usize> = dims.iter().map(|d| d / 2).collect();
    let off = img.offset(&centre);
    img.values_mut()[off] = 1.0;
    Ok(img)
}

/// Generator dispatch for the built-in phantoms.
pub fn make_phantom(kind: &PhantomKind, dims: &[usize]) -> Result<ImageGrid, SimulateError> {
    match kind {
        PhantomKind::Shape => make_shape_phantom(dims),
        PhantomKind::VascularTree => make_vascular_phantom(dims),
        PhantomKind::Delta => make_delta_phantom(dims),
        PhantomKind::Custom(path) => Err(SimulateError::InvalidArgument(format!(
            "custom phantom {} must be loaded from its container file",
            path.display()
        ))),
    }
}
