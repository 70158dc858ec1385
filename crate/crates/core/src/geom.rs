//! Small fixed-size vector helpers shared by the geometry modules.

pub type Vec2 = [f64; 2];
pub type Vec3 = [f64; 3];

#[inline]
pub fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale3(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

#[inline]
pub fn dist3(a: Vec3, b: Vec3) -> f64 {
    norm3(sub3(a, b))
}

#[inline]
pub fn dist2_sq3(a: Vec3, b: Vec3) -> f64 {
    let d = sub3(a, b);
    dot3(d, d)
}

/// Returns `a / |a|`, or `a` unchanged when it has zero length.
#[inline]
pub fn normalize3(a: Vec3) -> Vec3 {
    let n = norm3(a);
    if n > 0.0 {
        scale3(a, 1.0 / n)
    } else {
        a
    }
}

#[inline]
pub fn sub2(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm2(a: Vec2) -> f64 {
    dot2(a, a).sqrt()
}

/// Twice the signed area of the 2D triangle `abc` (positive when counter-clockwise).
#[inline]
pub fn orient2(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    cross2(sub2(b, a), sub2(c, a))
}

pub fn triangle_area3(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    0.5 * norm3(cross3(sub3(b, a), sub3(c, a)))
}

/// Axis-aligned bounding box of a point set; `None` when empty.
pub fn bbox3(points: &[Vec3]) -> Option<(Vec3, Vec3)> {
    let first = *points.first()?;
    let mut lo = first;
    let mut hi = first;
    for p in &points[1..] {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    Some((lo, hi))
}
