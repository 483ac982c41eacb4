//! Collision shapes, workspace containment and signed distance.
//!
//! Disk pairs are handled in closed form. Every other pair goes through a
//! support-function distance query (GJK) on the shapes' cores, followed by
//! polytope expansion (EPA) when the cores overlap. Disks are a point core
//! with a radius margin; boxes are a four-vertex polygon with zero margin.

use serde::{Deserialize, Serialize};

use crate::dynamics::{RobotType, TRAILER_HITCH};
use crate::scalar::{wrap_angle, Scalar};

/// Iteration cap for GJK and EPA before the analytic fallback is used.
pub const MAX_ITERATIONS: usize = 64;

pub type Vec2<T> = [T; 2];

#[inline]
fn sub<T: Scalar>(a: Vec2<T>, b: Vec2<T>) -> Vec2<T> {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
fn add<T: Scalar>(a: Vec2<T>, b: Vec2<T>) -> Vec2<T> {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
fn scale<T: Scalar>(a: Vec2<T>, s: T) -> Vec2<T> {
    [a[0] * s, a[1] * s]
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: Vec2<T>, b: Vec2<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn cross<T: Scalar>(a: Vec2<T>, b: Vec2<T>) -> T {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn perp<T: Scalar>(a: Vec2<T>) -> Vec2<T> {
    [-a[1], a[0]]
}

#[inline]
fn norm<T: Scalar>(a: Vec2<T>) -> T {
    a[0].hypot(a[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape<T> {
    Disk { radius: T },
    OrientedBox { half_extents: [T; 2] },
}

impl<T: Scalar> Shape<T> {
    pub fn disk(radius: T) -> Self {
        Shape::Disk { radius }
    }

    /// Box from full side lengths.
    pub fn rect(length: T, width: T) -> Self {
        let half = T::lit(0.5);
        Shape::OrientedBox {
            half_extents: [length * half, width * half],
        }
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            Shape::Disk { radius } => radius > T::zero(),
            Shape::OrientedBox { half_extents } => {
                half_extents[0] > T::zero() && half_extents[1] > T::zero()
            }
        }
    }

    /// Radius of the smallest disk centered on the shape that contains it.
    pub fn bounding_radius(&self) -> T {
        match *self {
            Shape::Disk { radius } => radius,
            Shape::OrientedBox { half_extents } => half_extents[0].hypot(half_extents[1]),
        }
    }

    /// Same kind of shape with every extent multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        match *self {
            Shape::Disk { radius } => Shape::Disk {
                radius: radius * factor,
            },
            Shape::OrientedBox { half_extents } => Shape::OrientedBox {
                half_extents: [half_extents[0] * factor, half_extents[1] * factor],
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlacedShape<T> {
    pub shape: Shape<T>,
    pub position: Vec2<T>,
    pub orientation: T,
}

impl<T: Scalar> PlacedShape<T> {
    pub fn new(shape: Shape<T>, position: Vec2<T>, orientation: T) -> Self {
        Self {
            shape,
            position,
            orientation: wrap_angle(orientation),
        }
    }

    /// Axis-aligned box obstacle from center and full size.
    pub fn aabb(center: Vec2<T>, size: Vec2<T>) -> Self {
        Self::new(Shape::rect(size[0], size[1]), center, T::zero())
    }

    fn margin(&self) -> T {
        match self.shape {
            Shape::Disk { radius } => radius,
            Shape::OrientedBox { .. } => T::zero(),
        }
    }

    /// Polygon core vertices in counter-clockwise order (a single point for disks).
    fn core(&self) -> Core<T> {
        match self.shape {
            Shape::Disk { .. } => Core {
                verts: [self.position; 4],
                len: 1,
            },
            Shape::OrientedBox { half_extents: h } => {
                let (s, c) = self.orientation.sin_cos();
                let ax = [c * h[0], s * h[0]];
                let ay = [-s * h[1], c * h[1]];
                let p = self.position;
                Core {
                    verts: [
                        add(p, sub(scale(ax, -T::one()), ay)),
                        add(p, sub(ax, ay)),
                        add(p, add(ax, ay)),
                        add(p, sub(ay, ax)),
                    ],
                    len: 4,
                }
            }
        }
    }

    /// Farthest point of the shape in direction `dir` (need not be unit).
    pub fn support(&self, dir: Vec2<T>) -> Vec2<T> {
        let core = self.core();
        let p = core.support(dir);
        let m = self.margin();
        if m > T::zero() {
            let n = norm(dir);
            if n > T::zero() {
                return add(p, scale(dir, m / n));
            }
        }
        p
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn aabb_bounds(&self) -> (Vec2<T>, Vec2<T>) {
        let ext = match self.shape {
            Shape::Disk { radius } => [radius, radius],
            Shape::OrientedBox { half_extents: h } => {
                let (s, c) = self.orientation.sin_cos();
                [
                    c.abs() * h[0] + s.abs() * h[1],
                    s.abs() * h[0] + c.abs() * h[1],
                ]
            }
        };
        (sub(self.position, ext), add(self.position, ext))
    }
}

#[derive(Clone, Copy)]
struct Core<T> {
    verts: [Vec2<T>; 4],
    len: usize,
}

impl<T: Scalar> Core<T> {
    fn support(&self, dir: Vec2<T>) -> Vec2<T> {
        let mut best = self.verts[0];
        let mut best_dot = dot(best, dir);
        for &v in &self.verts[1..self.len] {
            let d = dot(v, dir);
            if d > best_dot {
                best = v;
                best_dot = d;
            }
        }
        best
    }
}

/// Collision footprint of one robot: one shape, or tractor plus trailer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Footprint<T> {
    parts: [PlacedShape<T>; 2],
    len: usize,
}

impl<T: Scalar> Footprint<T> {
    pub fn parts(&self) -> &[PlacedShape<T>] {
        &self.parts[..self.len]
    }
}

/// Maps a robot state to its collision footprint.
///
/// The shape sits at the state's planar position, rotated by its heading
/// (double integrators are never rotated). A car with trailer yields a
/// second copy of the shape centered `TRAILER_HITCH` behind the car along
/// the trailer angle.
pub fn place<T: Scalar>(robot: RobotType, shape: &Shape<T>, x: &[T]) -> Footprint<T> {
    let main = PlacedShape::new(*shape, [x[0], x[1]], robot.heading(x));
    match robot {
        RobotType::CarWithTrailer => {
            let l = T::lit(TRAILER_HITCH);
            let (s, c) = x[3].sin_cos();
            let trailer = PlacedShape::new(*shape, [x[0] - l * c, x[1] - l * s], x[3]);
            Footprint {
                parts: [main, trailer],
                len: 2,
            }
        }
        _ => Footprint {
            parts: [main, main],
            len: 1,
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Workspace<T> {
    pub lo: Vec2<T>,
    pub hi: Vec2<T>,
    /// Axis-aligned box obstacles.
    pub obstacles: Vec<PlacedShape<T>>,
}

impl<T: Scalar> Workspace<T> {
    pub fn new(lo: Vec2<T>, hi: Vec2<T>, obstacles: Vec<PlacedShape<T>>) -> Self {
        Self { lo, hi, obstacles }
    }

    pub fn empty(lo: Vec2<T>, hi: Vec2<T>) -> Self {
        Self::new(lo, hi, Vec::new())
    }

    pub fn is_valid(&self) -> bool {
        self.lo[0] < self.hi[0]
            && self.lo[1] < self.hi[1]
            && self.obstacles.iter().all(|o| o.shape.is_valid())
    }

    pub fn contains(&self, shape: &PlacedShape<T>) -> bool {
        let (lo, hi) = shape.aabb_bounds();
        lo[0] >= self.lo[0] && lo[1] >= self.lo[1] && hi[0] <= self.hi[0] && hi[1] <= self.hi[1]
    }
}

/// True iff every part lies inside the workspace bounds and touches no obstacle.
pub fn in_free_space<T: Scalar>(parts: &[PlacedShape<T>], ws: &Workspace<T>) -> bool {
    parts.iter().all(|p| {
        ws.contains(p) && ws.obstacles.iter().all(|o| signed_distance(p, o) > T::zero())
    })
}

/// Smallest signed distance between the shape and any obstacle or the
/// workspace boundary (positive when free).
pub fn clearance<T: Scalar>(shape: &PlacedShape<T>, ws: &Workspace<T>) -> T {
    let (lo, hi) = shape.aabb_bounds();
    let mut best = (lo[0] - ws.lo[0])
        .min(lo[1] - ws.lo[1])
        .min(ws.hi[0] - hi[0])
        .min(ws.hi[1] - hi[1]);
    for o in &ws.obstacles {
        best = best.min(signed_distance(shape, o));
    }
    best
}

/// Closest-feature information between two placed shapes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contact<T> {
    /// Separation when positive, negated penetration depth otherwise.
    pub distance: T,
    /// Unit direction along which `b` moves away from `a` to increase the distance.
    pub normal: Vec2<T>,
    /// Witness point on `a`.
    pub point_a: Vec2<T>,
    /// Witness point on `b`.
    pub point_b: Vec2<T>,
}

impl<T: Scalar> Contact<T> {
    /// Swaps the roles of `a` and `b`.
    pub fn flipped(self) -> Self {
        Self {
            distance: self.distance,
            normal: scale(self.normal, -T::one()),
            point_a: self.point_b,
            point_b: self.point_a,
        }
    }
}

pub fn signed_distance<T: Scalar>(a: &PlacedShape<T>, b: &PlacedShape<T>) -> T {
    contact(a, b).distance
}

/// Signed distance together with the separating direction and witness points.
///
/// The distance is differentiable almost everywhere; its gradient with respect
/// to `b`'s center is `normal`, with respect to `a`'s center `-normal`, and with
/// respect to `b`'s orientation `normal . perp(point_b - b.position)`.
pub fn contact<T: Scalar>(a: &PlacedShape<T>, b: &PlacedShape<T>) -> Contact<T> {
    if let (Shape::Disk { radius: ra }, Shape::Disk { radius: rb }) = (a.shape, b.shape) {
        let d = sub(b.position, a.position);
        let len = norm(d);
        let n = if len > T::zero() {
            scale(d, T::one() / len)
        } else {
            [T::one(), T::zero()]
        };
        return Contact {
            distance: len - ra - rb,
            normal: n,
            point_a: add(a.position, scale(n, ra)),
            point_b: sub(b.position, scale(n, rb)),
        };
    }
    let (ca, cb) = (a.core(), b.core());
    let (core, n) = core_contact(&ca, &cb, a, b);
    let (ma, mb) = (a.margin(), b.margin());
    Contact {
        distance: core.distance - ma - mb,
        normal: n,
        point_a: add(core.point_a, scale(n, ma)),
        point_b: sub(core.point_b, scale(n, mb)),
    }
}

/// A vertex of the Minkowski difference `B - A` with its generating points.
#[derive(Clone, Copy, Debug)]
struct SupportPoint<T> {
    w: Vec2<T>,
    a: Vec2<T>,
    b: Vec2<T>,
}

fn minkowski_support<T: Scalar>(ca: &Core<T>, cb: &Core<T>, dir: Vec2<T>) -> SupportPoint<T> {
    let b = cb.support(dir);
    let a = ca.support(scale(dir, -T::one()));
    SupportPoint { w: sub(b, a), a, b }
}

/// Result of GJK's closest-point step on a simplex: the closest point
/// as a convex combination of the retained vertices.
struct Closest<T> {
    point: Vec2<T>,
    weights: [T; 3],
}

/// Reduces `simplex` to the sub-simplex closest to the origin. Returns None
/// when the origin lies inside a triangle.
fn closest_on_simplex<T: Scalar>(simplex: &mut Vec<SupportPoint<T>>) -> Option<Closest<T>> {
    let zero = T::zero();
    let one = T::one();
    match simplex.len() {
        1 => Some(Closest {
            point: simplex[0].w,
            weights: [one, zero, zero],
        }),
        2 => {
            let (p, q) = (simplex[0].w, simplex[1].w);
            let e = sub(q, p);
            let ee = dot(e, e);
            let t = if ee > zero { -dot(p, e) / ee } else { zero };
            if t <= zero {
                simplex.truncate(1);
                Some(Closest {
                    point: p,
                    weights: [one, zero, zero],
                })
            } else if t >= one {
                simplex.swap(0, 1);
                simplex.truncate(1);
                Some(Closest {
                    point: q,
                    weights: [one, zero, zero],
                })
            } else {
                Some(Closest {
                    point: add(p, scale(e, t)),
                    weights: [one - t, t, zero],
                })
            }
        }
        3 => {
            let (p0, p1, p2) = (simplex[0].w, simplex[1].w, simplex[2].w);
            let area = cross(sub(p1, p0), sub(p2, p0));
            if area != zero {
                let s0 = cross(p1, p2) / area;
                let s1 = cross(p2, p0) / area;
                let s2 = cross(p0, p1) / area;
                if s0 >= zero && s1 >= zero && s2 >= zero {
                    return None;
                }
            }
            // closest point lies on one of the edges
            let mut best: Option<(T, [usize; 2], Closest<T>)> = None;
            for pair in [[0usize, 1usize], [1, 2], [0, 2]] {
                let mut sub_simplex = vec![simplex[pair[0]], simplex[pair[1]]];
                if let Some(c) = closest_on_simplex(&mut sub_simplex) {
                    let d = dot(c.point, c.point);
                    if best.as_ref().map_or(true, |(bd, _, _)| d < *bd) {
                        let kept = if sub_simplex.len() == 1 {
                            // find which endpoint survived
                            if sub_simplex[0].w == simplex[pair[0]].w {
                                [pair[0], usize::MAX]
                            } else {
                                [pair[1], usize::MAX]
                            }
                        } else {
                            pair
                        };
                        best = Some((d, kept, c));
                    }
                }
            }
            let (_, kept, c) = best.expect("triangle has edges");
            let reduced: Vec<_> = kept
                .iter()
                .filter(|&&i| i != usize::MAX)
                .map(|&i| simplex[i])
                .collect();
            *simplex = reduced;
            Some(c)
        }
        _ => unreachable!("2D simplex has at most three vertices"),
    }
}

struct CoreContact<T> {
    distance: T,
    point_a: Vec2<T>,
    point_b: Vec2<T>,
}

fn witness<T: Scalar>(simplex: &[SupportPoint<T>], weights: &[T; 3]) -> (Vec2<T>, Vec2<T>) {
    let mut pa = [T::zero(); 2];
    let mut pb = [T::zero(); 2];
    for (s, &w) in simplex.iter().zip(weights) {
        pa = add(pa, scale(s.a, w));
        pb = add(pb, scale(s.b, w));
    }
    (pa, pb)
}

/// Distance between cores with the unit normal pointing from `a` towards `b`.
fn core_contact<T: Scalar>(
    ca: &Core<T>,
    cb: &Core<T>,
    a: &PlacedShape<T>,
    b: &PlacedShape<T>,
) -> (CoreContact<T>, Vec2<T>) {
    let scale_ref = a.shape.bounding_radius() + b.shape.bounding_radius() + T::one();
    let eps = T::epsilon() * T::lit(64.0) * scale_ref;
    let mut dir = sub(b.position, a.position);
    if norm(dir) <= eps {
        dir = [T::one(), T::zero()];
    }
    let mut simplex = vec![minkowski_support(ca, cb, scale(dir, -T::one()))];
    for _ in 0..MAX_ITERATIONS {
        let closest = match closest_on_simplex(&mut simplex) {
            Some(c) => c,
            None => return epa(ca, cb, simplex, a, b),
        };
        let v = closest.point;
        let vv = dot(v, v);
        if vv.sqrt() <= eps {
            return epa(ca, cb, simplex, a, b);
        }
        let w = minkowski_support(ca, cb, scale(v, -T::one()));
        // no support point makes progress towards the origin
        if vv - dot(v, w.w) <= eps * vv.sqrt() || simplex.iter().any(|s| s.w == w.w) {
            let (pa, pb) = witness(&simplex, &closest.weights);
            let d = vv.sqrt();
            return (
                CoreContact {
                    distance: d,
                    point_a: pa,
                    point_b: pb,
                },
                scale(v, T::one() / d),
            );
        }
        simplex.push(w);
    }
    sat_fallback(ca, cb, a, b)
}

/// Expanding polytope: penetration depth of overlapping cores.
fn epa<T: Scalar>(
    ca: &Core<T>,
    cb: &Core<T>,
    mut poly: Vec<SupportPoint<T>>,
    a: &PlacedShape<T>,
    b: &PlacedShape<T>,
) -> (CoreContact<T>, Vec2<T>) {
    let scale_ref = a.shape.bounding_radius() + b.shape.bounding_radius() + T::one();
    let eps = T::epsilon() * T::lit(256.0) * scale_ref;
    // grow a degenerate simplex into a triangle around the origin
    let probes = [
        [T::one(), T::zero()],
        [T::zero(), T::one()],
        [-T::one(), T::zero()],
        [T::zero(), -T::one()],
        [T::one(), T::one()],
        [-T::one(), -T::one()],
    ];
    let mut pi = 0;
    while poly.len() < 3 && pi < probes.len() {
        let dir = if poly.len() == 2 {
            let e = sub(poly[1].w, poly[0].w);
            let n = perp(e);
            if pi % 2 == 0 {
                n
            } else {
                scale(n, -T::one())
            }
        } else {
            probes[pi]
        };
        pi += 1;
        let s = minkowski_support(ca, cb, dir);
        let fresh = poly.iter().all(|p| norm(sub(p.w, s.w)) > eps);
        let collinear = poly.len() == 2 && cross(sub(poly[1].w, poly[0].w), sub(s.w, poly[0].w)).abs() <= eps * eps;
        if fresh && !collinear {
            poly.push(s);
        }
    }
    if poly.len() < 3 {
        return sat_fallback(ca, cb, a, b);
    }
    if cross(sub(poly[1].w, poly[0].w), sub(poly[2].w, poly[0].w)) < T::zero() {
        poly.swap(1, 2);
    }
    for _ in 0..MAX_ITERATIONS {
        // edge closest to the origin, with outward normal
        let mut best_i = 0;
        let mut best_d = T::infinity();
        let mut best_n = [T::zero(); 2];
        for i in 0..poly.len() {
            let p = poly[i].w;
            let q = poly[(i + 1) % poly.len()].w;
            let e = sub(q, p);
            let len = norm(e);
            if len <= T::zero() {
                continue;
            }
            let n = [e[1] / len, -e[0] / len];
            let d = dot(n, p);
            if d < best_d {
                best_d = d;
                best_i = i;
                best_n = n;
            }
        }
        let s = minkowski_support(ca, cb, best_n);
        if dot(s.w, best_n) - best_d <= eps {
            let p = poly[best_i];
            let q = poly[(best_i + 1) % poly.len()];
            let e = sub(q.w, p.w);
            let ee = dot(e, e);
            let t = if ee > T::zero() {
                (-dot(p.w, e) / ee).max(T::zero()).min(T::one())
            } else {
                T::zero()
            };
            let pa = add(scale(p.a, T::one() - t), scale(q.a, t));
            let pb = add(scale(p.b, T::one() - t), scale(q.b, t));
            let depth = best_d.max(T::zero());
            // b separates from a by moving against the outward normal
            return (
                CoreContact {
                    distance: -depth,
                    point_a: pa,
                    point_b: pb,
                },
                scale(best_n, -T::one()),
            );
        }
        poly.insert(best_i + 1, s);
    }
    sat_fallback(ca, cb, a, b)
}

/// Separating-axis estimate over the cores' edge normals and the center line.
/// The result is exact for penetration between polygons and a lower bound on
/// separation otherwise; used only when the iterative queries stall.
fn sat_fallback<T: Scalar>(
    ca: &Core<T>,
    cb: &Core<T>,
    a: &PlacedShape<T>,
    b: &PlacedShape<T>,
) -> (CoreContact<T>, Vec2<T>) {
    let mut axes: Vec<Vec2<T>> = Vec::with_capacity(9);
    for core in [ca, cb] {
        for i in 0..core.len {
            let e = sub(core.verts[(i + 1) % core.len], core.verts[i]);
            let len = norm(e);
            if core.len > 1 && len > T::zero() {
                axes.push(scale(perp(e), T::one() / len));
            }
        }
    }
    let c = sub(b.position, a.position);
    if norm(c) > T::zero() {
        axes.push(scale(c, T::one() / norm(c)));
    }
    if axes.is_empty() {
        axes.push([T::one(), T::zero()]);
    }
    let mut best = -T::infinity();
    let mut best_n = axes[0];
    for n in axes {
        let n = if dot(n, c) < T::zero() { scale(n, -T::one()) } else { n };
        // gap along n between a's max and b's min
        let gap = dot(cb.support(scale(n, -T::one())), n) - dot(ca.support(n), n);
        if gap > best {
            best = gap;
            best_n = n;
        }
    }
    let pa = ca.support(best_n);
    let pb = cb.support(scale(best_n, -T::one()));
    (
        CoreContact {
            distance: best,
            point_a: pa,
            point_b: pb,
        },
        best_n,
    )
}

/// Minimum signed distance between two footprints.
pub fn footprint_distance<T: Scalar>(a: &Footprint<T>, b: &Footprint<T>) -> T {
    let mut best = T::infinity();
    for pa in a.parts() {
        for pb in b.parts() {
            best = best.min(signed_distance(pa, pb));
        }
    }
    best
}

/// Robot description needed for collision checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobotBody<T> {
    pub robot_type: RobotType,
    pub shape: Shape<T>,
}

/// First pair `(i, j)`, `i < j`, in lexicographic order whose footprints are
/// closer than `margin`, if any.
pub fn pairwise_clear<T: Scalar>(
    bodies: &[RobotBody<T>],
    states: &[&[T]],
    margin: T,
) -> Option<(usize, usize)> {
    assert_eq!(bodies.len(), states.len());
    let prints: Vec<_> = bodies
        .iter()
        .zip(states)
        .map(|(b, x)| place(b.robot_type, &b.shape, x))
        .collect();
    for i in 0..prints.len() {
        for j in i + 1..prints.len() {
            if footprint_distance(&prints[i], &prints[j]) < margin {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    fn disk(r: f64, p: [f64; 2]) -> PlacedShape<f64> {
        PlacedShape::new(Shape::disk(r), p, 0.0)
    }

    fn boxed(l: f64, w: f64, p: [f64; 2], th: f64) -> PlacedShape<f64> {
        PlacedShape::new(Shape::rect(l, w), p, th)
    }

    /// Boundary samples of a placed shape.
    fn boundary(s: &PlacedShape<f64>, n: usize) -> Vec<[f64; 2]> {
        match s.shape {
            Shape::Disk { radius } => (0..n)
                .map(|i| {
                    let a = i as f64 / n as f64 * std::f64::consts::TAU;
                    [s.position[0] + radius * a.cos(), s.position[1] + radius * a.sin()]
                })
                .collect(),
            Shape::OrientedBox { .. } => {
                let v = s.core().verts;
                let per = n / 4;
                (0..4)
                    .flat_map(|e| {
                        let (p, q) = (v[e], v[(e + 1) % 4]);
                        (0..per).map(move |k| {
                            let t = k as f64 / per as f64;
                            [p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t]
                        })
                    })
                    .collect()
            }
        }
    }

    fn inside(s: &PlacedShape<f64>, p: [f64; 2]) -> bool {
        match s.shape {
            Shape::Disk { radius } => norm(sub(p, s.position)) <= radius,
            Shape::OrientedBox { half_extents: h } => {
                let d = sub(p, s.position);
                let (sn, c) = s.orientation.sin_cos();
                let lx = c * d[0] + sn * d[1];
                let ly = -sn * d[0] + c * d[1];
                lx.abs() <= h[0] && ly.abs() <= h[1]
            }
        }
    }

    #[test]
    fn disk_pairs() {
        assert!((signed_distance(&disk(0.1, [0.0, 0.0]), &disk(0.1, [0.5, 0.0])) - 0.3).abs() < 1e-15);
        assert!((signed_distance(&disk(0.1, [0.0, 0.0]), &disk(0.1, [0.15, 0.0])) + 0.05).abs() < 1e-15);
    }

    #[test]
    fn disk_vs_rotated_box_matches_surface_sampling() {
        let b = boxed(0.6, 0.2, [0.0, 0.0], FRAC_PI_6);
        for (c, r) in [([0.5, 0.4], 0.1), ([0.1, 0.35], 0.15), ([-0.45, -0.05], 0.2)] {
            let d = disk(r, c);
            let sd = signed_distance(&d, &b);
            // oracle: distance from disk center to box surface minus radius,
            // negated when the center is inside the box
            let surf = boundary(&b, 40_000)
                .into_iter()
                .map(|p| norm(sub(p, c)))
                .fold(f64::INFINITY, f64::min);
            let center_d = if inside(&b, c) { -surf } else { surf };
            assert!((sd - (center_d - r)).abs() < 1e-3, "{sd} vs {}", center_d - r);
        }
    }

    #[test]
    fn box_box_separated_and_overlapping() {
        let a = boxed(1.0, 1.0, [0.0, 0.0], 0.0);
        let b = boxed(1.0, 1.0, [1.5, 0.0], 0.0);
        assert!((signed_distance(&a, &b) - 0.5).abs() < 1e-12);
        let b = boxed(1.0, 1.0, [0.8, 0.1], 0.0);
        assert!((signed_distance(&a, &b) + 0.2).abs() < 1e-12);
        // corner-to-face
        let b = boxed(1.0, 1.0, [0.5 + 0.5 * 2f64.sqrt() + 0.1, 0.0], std::f64::consts::FRAC_PI_4);
        assert!((signed_distance(&a, &b) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn contact_gradient_matches_finite_differences() {
        let a = boxed(0.5, 0.25, [0.1, -0.2], 0.3);
        for b in [
            boxed(0.4, 0.3, [0.9, 0.1], -0.7),
            boxed(0.4, 0.3, [0.4, -0.1], 1.1),
            disk(0.2, [0.35, 0.05]),
            disk(0.2, [0.8, -0.6]),
        ] {
            let c = contact(&a, &b);
            let h = 1e-7;
            for k in 0..2 {
                let mut bp = b;
                bp.position[k] += h;
                let mut bm = b;
                bm.position[k] -= h;
                let fd = (signed_distance(&a, &bp) - signed_distance(&a, &bm)) / (2.0 * h);
                assert!((fd - c.normal[k]).abs() < 1e-6, "{fd} vs {}", c.normal[k]);
            }
            let mut ap = a;
            ap.orientation += h;
            let mut am = a;
            am.orientation -= h;
            let fd = (signed_distance(&ap, &b) - signed_distance(&am, &b)) / (2.0 * h);
            let an = -dot(c.normal, perp(sub(c.point_a, a.position)));
            assert!((fd - an).abs() < 1e-6, "{fd} vs {an}");
        }
    }

    #[test]
    fn placement() {
        let f = place(RobotType::DoubleIntegrator2D, &Shape::disk(0.1f64), &[1.0, 2.0, 0.3, 0.0]);
        assert_eq!(f.parts().len(), 1);
        assert_eq!(f.parts()[0].position, [1.0, 2.0]);
        assert_eq!(f.parts()[0].orientation, 0.0);
        let f = place(RobotType::Unicycle1, &Shape::rect(0.5f64, 0.25), &[0.0, 0.0, FRAC_PI_2]);
        let (lo, hi) = f.parts()[0].aabb_bounds();
        assert!((hi[0] - 0.125).abs() < 1e-12 && (hi[1] - 0.25).abs() < 1e-12);
        assert!((lo[0] + 0.125).abs() < 1e-12);
        let f = place(RobotType::CarWithTrailer, &Shape::rect(0.5f64, 0.25), &[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(f.parts().len(), 2);
        assert!((f.parts()[1].position[0] + 0.5).abs() < 1e-15);
        assert_eq!(f.parts()[1].position[1], 0.0);
    }

    #[test]
    fn free_space_checks() {
        let ws = Workspace::empty([0.0, 0.0], [2.0, 2.0]);
        assert!(in_free_space(&[disk(0.1, [1.0, 1.0])], &ws));
        assert!(!in_free_space(&[disk(0.1, [0.05, 1.0])], &ws));
        let ws = Workspace::new([0.0, 0.0], [2.0, 2.0], vec![PlacedShape::aabb([1.0, 1.0], [0.4, 0.4])]);
        let robot = boxed(0.4, 0.2, [0.7, 0.7], 0.4);
        let free = in_free_space(&[robot], &ws);
        // sampling oracle: any robot boundary point inside the obstacle, or
        // any obstacle boundary point inside the robot
        let overlap = boundary(&robot, 10_000).iter().any(|&p| inside(&ws.obstacles[0], p))
            || boundary(&ws.obstacles[0], 10_000).iter().any(|&p| inside(&robot, p));
        assert_eq!(free, !overlap);
        assert!(!free);
    }

    #[test]
    fn pairwise() {
        let bodies = [RobotBody { robot_type: RobotType::DoubleIntegrator2D, shape: Shape::disk(0.1) }; 3];
        let s0 = [0.0, 0.0, 0.0, 0.0];
        let s1 = [1.0, 0.0, 0.0, 0.0];
        let s2 = [0.05, 0.0, 0.0, 0.0];
        assert_eq!(pairwise_clear(&bodies[..2], &[&s0, &s1], 0.0), None);
        assert_eq!(pairwise_clear(&bodies, &[&s0, &s1, &s2], 0.0), Some((0, 2)));
        let s3 = [0.22, 0.0, 0.0, 0.0];
        assert_eq!(pairwise_clear(&bodies[..2], &[&s0, &s3], 0.0), None);
        assert_eq!(pairwise_clear(&bodies[..2], &[&s0, &s3], 0.03), Some((0, 1)));
    }

    #[test]
    fn generic_over_f32() {
        let a = PlacedShape::new(Shape::rect(1.0f32, 1.0), [0.0, 0.0], 0.0);
        let b = PlacedShape::new(Shape::disk(0.25f32), [1.0, 0.0], 0.0);
        assert!((signed_distance(&a, &b) - 0.25).abs() < 1e-6);
    }
}
