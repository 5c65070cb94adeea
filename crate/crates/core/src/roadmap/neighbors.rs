//! Fixed-radius neighbor pairs.

use crate::geom::Vec2;

/// Node count above which [`NeighborSearch::Auto`] switches to bucketing.
pub const GRID_INDEX_THRESHOLD: usize = 2000;

/// Strategy for enumerating node pairs within the connection radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighborSearch {
    /// Brute force up to [`GRID_INDEX_THRESHOLD`] nodes, buckets beyond.
    #[default]
    Auto,
    BruteForce,
    Grid,
}

/// All pairs `(i, j)` with `i < j` and `|p_i - p_j|² <= radius²`, sorted.
pub fn radius_pairs(points: &[Vec2], radius: f64, search: NeighborSearch) -> Vec<(usize, usize)> {
    let use_grid = match search {
        NeighborSearch::Auto => points.len() > GRID_INDEX_THRESHOLD,
        NeighborSearch::BruteForce => false,
        NeighborSearch::Grid => true,
    };
    if use_grid && radius > 0.0 && radius.is_finite() {
        bucketed(points, radius)
    } else {
        brute_force(points, radius)
    }
}

fn within(a: Vec2, b: Vec2, r2: f64) -> bool {
    (a - b).norm_squared() <= r2
}

fn brute_force(points: &[Vec2], radius: f64) -> Vec<(usize, usize)> {
    let r2 = radius * radius;
    let mut pairs = Vec::new();
    for (i, &a) in points.iter().enumerate() {
        for (j, &b) in points.iter().enumerate().skip(i + 1) {
            if within(a, b, r2) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

fn bucketed(points: &[Vec2], radius: f64) -> Vec<(usize, usize)> {
    if points.is_empty() {
        return Vec::new();
    }
    let r2 = radius * radius;
    let min = points
        .iter()
        .fold(Vec2::new(f64::INFINITY, f64::INFINITY), |m, p| {
            Vec2::new(m.x.min(p.x), m.y.min(p.y))
        });
    let max = points
        .iter()
        .fold(Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, p| {
            Vec2::new(m.x.max(p.x), m.y.max(p.y))
        });
    let cols = (((max.x - min.x) / radius).floor() as usize + 1).max(1);
    let rows = (((max.y - min.y) / radius).floor() as usize + 1).max(1);
    let cell_of = |p: Vec2| {
        let cx = (((p.x - min.x) / radius).floor() as usize).min(cols - 1);
        let cy = (((p.y - min.y) / radius).floor() as usize).min(rows - 1);
        (cx, cy)
    };

    // Counting sort of point indices into cells; indices stay ascending per cell.
    let mut starts = vec![0usize; cols * rows + 1];
    let cells: Vec<(usize, usize)> = points.iter().map(|&p| cell_of(p)).collect();
    for &(cx, cy) in &cells {
        starts[cy * cols + cx + 1] += 1;
    }
    for k in 1..starts.len() {
        starts[k] += starts[k - 1];
    }
    let mut fill = starts.clone();
    let mut members = vec![0usize; points.len()];
    for (i, &(cx, cy)) in cells.iter().enumerate() {
        let c = cy * cols + cx;
        members[fill[c]] = i;
        fill[c] += 1;
    }

    let mut pairs = Vec::new();
    let mut row = Vec::new();
    for (i, &(cx, cy)) in cells.iter().enumerate() {
        row.clear();
        for ny in cy.saturating_sub(1)..=(cy + 1).min(rows - 1) {
            for nx in cx.saturating_sub(1)..=(cx + 1).min(cols - 1) {
                let c = ny * cols + nx;
                for &j in &members[starts[c]..starts[c + 1]] {
                    if j > i && within(points[i], points[j], r2) {
                        row.push(j);
                    }
                }
            }
        }
        row.sort_unstable();
        pairs.extend(row.iter().map(|&j| (i, j)));
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::roadmap::sampling::PointSampler;

    #[test]
    fn bucketed_matches_brute_force() {
        for seed in 0..5 {
            let mut s = PointSampler::new(Rect::from_coords(-3.0, 0.0, 17.0, 9.0), seed);
            let pts: Vec<_> = (0..700).map(|_| s.next_point()).collect();
            for r in [0.05, 0.7, 2.5, 40.0] {
                assert_eq!(
                    radius_pairs(&pts, r, NeighborSearch::Grid),
                    radius_pairs(&pts, r, NeighborSearch::BruteForce),
                    "seed {seed} radius {r}"
                );
            }
        }
    }

    #[test]
    fn exact_radius_is_included() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.5, 0.0),
        ];
        let expected = vec![(0, 1)];
        assert_eq!(
            radius_pairs(&pts, 1.0, NeighborSearch::BruteForce),
            expected
        );
        assert_eq!(radius_pairs(&pts, 1.0, NeighborSearch::Grid), expected);
    }
}
