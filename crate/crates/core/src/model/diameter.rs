//! Exact diameter of a planar point set.
//!
//! Andrew's monotone chain builds the hull, then rotating calipers walk the
//! antipodal vertex pairs. Distances are evaluated with the same function the
//! join uses so that the diameter pair normalizes to exactly `1.0`.

use super::euclid;

type Pt = (f64, f64);

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Counter-clockwise hull without collinear points. Returns the distinct
/// points unchanged when fewer than three remain.
pub fn convex_hull(points: &[Pt]) -> Vec<Pt> {
    let mut pts: Vec<Pt> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }

    let mut hull: Vec<Pt> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Largest pairwise Euclidean distance; `0.0` for fewer than two distinct points.
pub fn diameter(points: &[Pt]) -> f64 {
    let hull = convex_hull(points);
    let h = hull.len();
    match h {
        0 | 1 => return 0.0,
        2 => return euclid(hull[0], hull[1]),
        _ => {}
    }

    let mut best = 0.0f64;
    let mut j = 1;
    for i in 0..h {
        let a = hull[i];
        let b = hull[(i + 1) % h];
        // Advance j while the triangle (a, b, hull[j]) keeps growing.
        while cross(a, b, hull[(j + 1) % h]) > cross(a, b, hull[j]) {
            j = (j + 1) % h;
        }
        best = best
            .max(euclid(a, hull[j]))
            .max(euclid(b, hull[j]))
            .max(euclid(a, hull[(j + 1) % h]))
            .max(euclid(b, hull[(j + 1) % h]));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(points: &[Pt]) -> f64 {
        let mut best = 0.0f64;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                best = best.max(euclid(points[i], points[j]));
            }
        }
        best
    }

    #[test]
    fn three_points() {
        let pts = [(0.0, 0.0), (3.0, 4.0), (100.0, 0.0)];
        assert_eq!(diameter(&pts), 100.0);
        assert_eq!(diameter(&pts), brute(&pts));
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(diameter(&[]), 0.0);
        assert_eq!(diameter(&[(1.0, 1.0), (1.0, 1.0)]), 0.0);
        assert_eq!(diameter(&[(0.0, 0.0), (0.0, 2.0), (0.0, 1.0)]), 2.0);
    }

    #[test]
    fn matches_brute_force_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for round in 0..200 {
            let n = rng.random_range(2..=2000.min(20 + round * 10));
            let pts: Vec<Pt> = (0..n)
                .map(|_| (rng.random_range(-50.0..50.0), rng.random_range(-20.0..80.0)))
                .collect();
            assert_eq!(diameter(&pts), brute(&pts), "round {round}, n={n}");
        }
    }

    #[test]
    fn grid_points_with_collinear_hull_edges() {
        let pts: Vec<Pt> = (0..10)
            .flat_map(|i| (0..7).map(move |j| (i as f64, j as f64)))
            .collect();
        assert_eq!(diameter(&pts), brute(&pts));
    }
}
