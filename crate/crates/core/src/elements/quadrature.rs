//! Symmetric Gauss rules on triangles, in barycentric coordinates.
//! Weights sum to one; multiply by the triangle area.

use crate::mesh::Point;

pub struct Rule {
    pub points: &'static [[f64; 3]],
    pub weights: &'static [f64],
}

/// Exact for polynomials of degree 2.
pub const DEGREE_2: Rule = Rule {
    points: &[
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ],
    weights: &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
};

const A4: f64 = 0.445_948_490_915_965;
const B4: f64 = 0.091_576_213_509_771;
const WA4: f64 = 0.223_381_589_678_011;
const WB4: f64 = 0.109_951_743_655_322;

/// Dunavant's six-point rule, exact for degree 4.
pub const DEGREE_4: Rule = Rule {
    points: &[
        [1.0 - 2.0 * A4, A4, A4],
        [A4, 1.0 - 2.0 * A4, A4],
        [A4, A4, 1.0 - 2.0 * A4],
        [1.0 - 2.0 * B4, B4, B4],
        [B4, 1.0 - 2.0 * B4, B4],
        [B4, B4, 1.0 - 2.0 * B4],
    ],
    weights: &[WA4, WA4, WA4, WB4, WB4, WB4],
};

impl Rule {
    /// Physical points and weights (area included) on the triangle `tri`.
    pub fn on(&self, tri: &[Point; 3]) -> Vec<(Point, f64)> {
        let area = triangle_area(tri);
        self.points
            .iter()
            .zip(self.weights)
            .map(|(l, &w)| {
                let x = l[0] * tri[0][0] + l[1] * tri[1][0] + l[2] * tri[2][0];
                let y = l[0] * tri[0][1] + l[1] * tri[1][1] + l[2] * tri[2][1];
                ([x, y], w * area)
            })
            .collect()
    }
}

pub fn signed_area(tri: &[Point; 3]) -> f64 {
    let [a, b, c] = tri;
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

pub fn triangle_area(tri: &[Point; 3]) -> f64 {
    signed_area(tri).abs()
}

/// Barycentric coordinates of `p` with respect to `tri`.
pub fn barycentric(tri: &[Point; 3], p: Point) -> [f64; 3] {
    let total = signed_area(tri);
    let l0 = signed_area(&[p, tri[1], tri[2]]) / total;
    let l1 = signed_area(&[tri[0], p, tri[2]]) / total;
    [l0, l1, 1.0 - l0 - l1]
}
