use crate::entity::{DynamicObject, ObjectId};
use crate::math::{Aabb, Axis, Vec3};
use crate::meshing::StaticGeometry;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HitTarget {
    /// Index into [`StaticGeometry::boxes`].
    Static(usize),
    Object(ObjectId),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    pub target: HitTarget,
    pub distance: f64,
    /// Outward normal of the face that was entered.
    pub normal: Vec3,
}

impl RayHit {
    pub fn point(&self, origin: Vec3, dir: Vec3) -> Vec3 {
        origin + dir * self.distance
    }
}

/// Slab test. Returns entry distance and entry axis; `None` on a miss or when
/// `origin` is already inside the box.
pub fn ray_box(origin: Vec3, dir: Vec3, b: &Aabb) -> Option<(f64, Axis)> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    let mut axis = Axis::X;
    for a in Axis::ALL {
        let (o, d) = (origin[a], dir[a]);
        if d.abs() < 1e-12 {
            if o < b.min[a] || o > b.max[a] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d;
        let (mut t0, mut t1) = ((b.min[a] - o) * inv, (b.max[a] - o) * inv);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        if t0 > t_near {
            t_near = t0;
            axis = a;
        }
        t_far = t_far.min(t1);
        if t_near > t_far {
            return None;
        }
    }
    (t_near >= 0.0).then_some((t_near, axis))
}

fn face_normal(axis: Axis, dir: Vec3) -> Vec3 {
    let s = if dir[axis] > 0.0 { -1.0 } else { 1.0 };
    Vec3::ZERO.with_axis(axis, s)
}

/// Nearest hit among static boxes and the objects accepted by `filter`,
/// within `max_dist`. Ties go to static geometry, then to lower indices.
pub fn raycast(
    origin: Vec3,
    dir: Vec3,
    max_dist: f64,
    geom: &StaticGeometry,
    objects: &[DynamicObject],
    filter: impl Fn(&DynamicObject) -> bool,
) -> Option<RayHit> {
    debug_assert!((dir.length() - 1.0).abs() < 1e-6, "ray direction must be unit length");
    let end = origin + dir * max_dist;
    let mut best: Option<RayHit> = None;
    let consider = |target: HitTarget, b: &Aabb, best: &mut Option<RayHit>| {
        if let Some((t, axis)) = ray_box(origin, dir, b) {
            if t <= max_dist && best.is_none_or(|h| t < h.distance) {
                *best = Some(RayHit {
                    target,
                    distance: t,
                    normal: face_normal(axis, dir),
                });
            }
        }
    };

    let span = Aabb {
        min: origin.min(end) - Vec3::splat(1e-6),
        max: origin.max(end) + Vec3::splat(1e-6),
    };
    let mut cands: Vec<usize> = Vec::new();
    let boxes = geom.boxes();
    geom.for_each_candidate(&span, |i, _| cands.push(i));
    cands.sort_unstable();
    for i in cands {
        consider(HitTarget::Static(i), &boxes[i].aabb, &mut best);
    }
    for o in objects.iter().filter(|o| filter(o)) {
        consider(HitTarget::Object(o.id), &o.aabb, &mut best);
    }
    best
}
