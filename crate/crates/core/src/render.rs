//! Software rasterizer for the 128x72 egocentric RGB observation.
//!
//! Every scene element is an axis-aligned box drawn as flat-shaded faces with
//! a `1/z` depth buffer. Camera constants: eye 1.6 above the feet, horizontal
//! field of view 100 degrees, square pixels, near 0.1, far 100.

use crate::entity::{AgentState, Pose};
use crate::grid::TriggerKind;
use crate::material::{self, MaterialId, PALETTE};
use crate::math::{Aabb, Axis, Vec3};
use crate::meshing::StaticGeometry;
use crate::physics::World;

pub const OBS_WIDTH: usize = 128;
pub const OBS_HEIGHT: usize = 72;
pub const OBS_BYTES: usize = OBS_WIDTH * OBS_HEIGHT * 3;

pub const HORIZONTAL_FOV_DEG: f64 = 100.0;
pub const NEAR_PLANE: f64 = 0.1;
pub const FAR_PLANE: f64 = 100.0;

/// Thickness of the slab drawn for non-lava trigger cells.
pub const TRIGGER_SLAB: f64 = 0.02;

const SKY_TOP: [i32; 3] = [70, 130, 200];
const SKY_HORIZON: [i32; 3] = [190, 215, 240];

/// Brightness per face orientation.
pub const TOP_SHADE: f64 = 1.0;
pub const X_SHADE: f64 = 0.8;
pub const Z_SHADE: f64 = 0.65;
pub const BOTTOM_SHADE: f64 = 0.5;

/// Row-major RGB8 frame, top row first.
#[derive(Clone, PartialEq, Eq)]
pub struct Observation {
    pixels: Vec<u8>,
}

impl std::fmt::Debug for Observation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Observation({}x{})", OBS_WIDTH, OBS_HEIGHT)
    }
}

impl Default for Observation {
    fn default() -> Self {
        Self {
            pixels: vec![0; OBS_BYTES],
        }
    }
}

impl Observation {
    pub fn width(&self) -> usize {
        OBS_WIDTH
    }

    pub fn height(&self) -> usize {
        OBS_HEIGHT
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * OBS_WIDTH + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * OBS_WIDTH + x) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Binary PPM (P6) encoding.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", OBS_WIDTH, OBS_HEIGHT).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Background color of a row.
pub fn sky_color(row: usize) -> [u8; 3] {
    let r = row as i32;
    let span = OBS_HEIGHT as i32 - 1;
    let mut c = [0u8; 3];
    for k in 0..3 {
        c[k] = (SKY_TOP[k] + (SKY_HORIZON[k] - SKY_TOP[k]) * r / span) as u8;
    }
    c
}

/// Palette color scaled by `factor`, rounded half up.
pub fn shade(material: MaterialId, factor: f64) -> [u8; 3] {
    let base = PALETTE[material as usize % PALETTE.len()];
    base.map(|c| (c as f64 * factor + 0.5).floor().min(255.0) as u8)
}

/// Brightness of a face with the given outward normal.
pub fn face_shade(normal: Vec3) -> f64 {
    if normal.y > 0.5 {
        TOP_SHADE
    } else if normal.y < -0.5 {
        BOTTOM_SHADE
    } else if normal.x.abs() > 0.5 {
        X_SHADE
    } else {
        Z_SHADE
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub eye: Vec3,
    pub forward: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    /// Focal length in pixels.
    pub focal: f64,
}

impl Camera {
    pub fn from_pose(pose: &Pose) -> Self {
        let forward = pose.gaze_dir();
        let right = pose.right_flat();
        Self {
            eye: pose.eye(),
            forward,
            right,
            up: right.cross(forward),
            focal: focal_length(),
        }
    }

    /// Unit ray through the center of pixel `(x, y)`.
    pub fn pixel_ray(&self, x: usize, y: usize) -> Vec3 {
        let sx = (x as f64 + 0.5 - OBS_WIDTH as f64 / 2.0) / self.focal;
        let sy = (OBS_HEIGHT as f64 / 2.0 - (y as f64 + 0.5)) / self.focal;
        (self.forward + self.right * sx + self.up * sy).normalized()
    }

    fn to_view(&self, p: Vec3) -> [f32; 3] {
        let d = p - self.eye;
        [d.dot(self.right) as f32, d.dot(self.up) as f32, d.dot(self.forward) as f32]
    }
}

/// `(W/2) / tan(fov/2)`.
pub fn focal_length() -> f64 {
    OBS_WIDTH as f64 / 2.0 / (HORIZONTAL_FOV_DEG.to_radians() / 2.0).tan()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SceneBox {
    pub aabb: Aabb,
    pub material: MaterialId,
}

/// Render list for everything that does not move during an episode.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StaticScene {
    pub boxes: Vec<SceneBox>,
}

impl StaticScene {
    /// Merged geometry, trigger cells, and render-only decorations.
    pub fn new(geom: &StaticGeometry, decorations: &[SceneBox]) -> Self {
        let mut boxes: Vec<SceneBox> = geom
            .boxes()
            .iter()
            .map(|b| SceneBox {
                aabb: b.aabb,
                material: b.material,
            })
            .collect();
        for t in geom.triggers() {
            let (aabb, material) = match t.kind {
                TriggerKind::Lava => (t.aabb, material::LAVA),
                kind => {
                    let mut slab = t.aabb;
                    slab.max.y = slab.min.y + TRIGGER_SLAB;
                    let m = match kind {
                        TriggerKind::ExitPad => material::EXIT_PAD,
                        TriggerKind::BoxTarget => material::BOX_TARGET,
                        _ => material::BUILD_ZONE,
                    };
                    (slab, m)
                }
            };
            boxes.push(SceneBox { aabb, material });
        }
        boxes.extend_from_slice(decorations);
        Self { boxes }
    }
}

/// Reusable buffers; one per rendering thread.
#[derive(Clone, Debug)]
pub struct Renderer {
    depth: Vec<f32>,
    dynamic: Vec<SceneBox>,
}

impl Default for Renderer {
    fn default() -> Self {
        Self {
            depth: vec![0.0; OBS_WIDTH * OBS_HEIGHT],
            dynamic: Vec::new(),
        }
    }
}

impl Renderer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Renders the view of agent `viewer` (whose own body is not drawn), or a
    /// free camera when `viewer` is `None`.
    pub fn render_view(
        &mut self,
        scene: &StaticScene,
        world: &World,
        viewer: Option<usize>,
        cam: &Camera,
        out: &mut Observation,
    ) {
        self.dynamic.clear();
        for o in &world.objects {
            self.dynamic.push(SceneBox {
                aabb: o.aabb,
                material: o.kind.material(),
            });
        }
        for (j, a) in world.agents.iter().enumerate() {
            if Some(j) != viewer {
                self.dynamic.push(agent_box(j, a));
            }
        }
        let dynamic = std::mem::take(&mut self.dynamic);
        self.render_boxes(cam, scene.boxes.iter().chain(dynamic.iter()), out);
        self.dynamic = dynamic;
    }

    pub fn render_boxes<'a>(
        &mut self,
        cam: &Camera,
        boxes: impl Iterator<Item = &'a SceneBox>,
        out: &mut Observation,
    ) {
        for y in 0..OBS_HEIGHT {
            let c = sky_color(y);
            let row = &mut out.pixels[y * OBS_WIDTH * 3..(y + 1) * OBS_WIDTH * 3];
            for px in row.chunks_exact_mut(3) {
                px.copy_from_slice(&c);
            }
        }
        self.depth.fill((1.0 / FAR_PLANE) as f32);
        let f = cam.focal as f32;
        let tan_h = OBS_WIDTH as f32 / 2.0 / f;
        let tan_v = OBS_HEIGHT as f32 / 2.0 / f;
        for b in boxes {
            self.draw_box(cam, b, f, tan_h, tan_v, out);
        }
    }

    fn draw_box(&mut self, cam: &Camera, b: &SceneBox, f: f32, tan_h: f32, tan_v: f32, out: &mut Observation) {
        let a = &b.aabb;
        let corners = a.corners().map(|p| cam.to_view(p));
        let near = NEAR_PLANE as f32;
        let far = FAR_PLANE as f32;
        let all = |pred: &dyn Fn(&[f32; 3]) -> bool| corners.iter().all(pred);
        if all(&|c| c[2] < near)
            || all(&|c| c[2] > far)
            || all(&|c| c[0] > c[2] * tan_h)
            || all(&|c| c[0] < -c[2] * tan_h)
            || all(&|c| c[1] > c[2] * tan_v)
            || all(&|c| c[1] < -c[2] * tan_v)
        {
            return;
        }
        for (axis, positive, idx) in FACES {
            let visible = if positive {
                cam.eye[axis] > a.max[axis]
            } else {
                cam.eye[axis] < a.min[axis]
            };
            if !visible {
                continue;
            }
            let normal = Vec3::ZERO.with_axis(axis, if positive { 1.0 } else { -1.0 });
            let color = shade(b.material, face_shade(normal));
            let quad = idx.map(|k| corners[k]);
            self.draw_polygon(&quad, f, color, out);
        }
    }

    fn draw_polygon(&mut self, quad: &[[f32; 3]; 4], f: f32, color: [u8; 3], out: &mut Observation) {
        let near = NEAR_PLANE as f32;
        // Sutherland-Hodgman against z = near; a quad gains at most one vertex.
        let mut poly = [[0f32; 3]; 5];
        let mut n = 0;
        for i in 0..4 {
            let a = quad[i];
            let b = quad[(i + 1) % 4];
            let a_in = a[2] >= near;
            let b_in = b[2] >= near;
            if a_in {
                poly[n] = a;
                n += 1;
            }
            if a_in != b_in {
                let t = (near - a[2]) / (b[2] - a[2]);
                poly[n] = [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, near];
                n += 1;
            }
        }
        if n < 3 {
            return;
        }
        let cx = OBS_WIDTH as f32 / 2.0;
        let cy = OBS_HEIGHT as f32 / 2.0;
        let mut screen = [[0f32; 3]; 5];
        for i in 0..n {
            let [x, y, z] = poly[i];
            screen[i] = [cx + f * x / z, cy - f * y / z, 1.0 / z];
        }
        for i in 1..n - 1 {
            self.draw_triangle(screen[0], screen[i], screen[i + 1], color, out);
        }
    }

    fn draw_triangle(&mut self, p0: [f32; 3], p1: [f32; 3], p2: [f32; 3], color: [u8; 3], out: &mut Observation) {
        let (p1, p2) = if edge(p0, p1, p2) < 0.0 { (p2, p1) } else { (p1, p2) };
        let area = edge(p0, p1, p2);
        if area <= 0.0 {
            return;
        }
        let min_x = p0[0].min(p1[0]).min(p2[0]);
        let max_x = p0[0].max(p1[0]).max(p2[0]);
        let min_y = p0[1].min(p1[1]).min(p2[1]);
        let max_y = p0[1].max(p1[1]).max(p2[1]);
        let x0 = ((min_x - 0.5).ceil().max(0.0)) as usize;
        let y0 = ((min_y - 0.5).ceil().max(0.0)) as usize;
        let x1 = (max_x - 0.5).floor().min(OBS_WIDTH as f32 - 1.0);
        let y1 = (max_y - 0.5).floor().min(OBS_HEIGHT as f32 - 1.0);
        if x1 < 0.0 || y1 < 0.0 {
            return;
        }
        let (x1, y1) = (x1 as usize, y1 as usize);
        let tl = [top_left(p1, p2), top_left(p2, p0), top_left(p0, p1)];
        let inv_area = 1.0 / area;
        let edges = [(p1, p2), (p2, p0), (p0, p1)];
        'rows: for y in y0..=y1 {
            let py = y as f32 + 0.5;
            // Conservative span from each edge's crossing, widened by a pixel;
            // the exact test below still decides every pixel.
            let (mut lo, mut hi) = (x0 as f32, x1 as f32);
            for (a, b) in edges {
                let dy = b[1] - a[1];
                if dy == 0.0 {
                    if edge(a, b, [a[0], py, 0.0]) < 0.0 {
                        continue 'rows;
                    }
                    continue;
                }
                let cross = a[0] + (b[0] - a[0]) * (py - a[1]) / dy - 0.5;
                if dy > 0.0 {
                    hi = hi.min(cross.floor() + 1.0);
                } else {
                    lo = lo.max(cross.ceil() - 1.0);
                }
            }
            if hi < lo {
                continue;
            }
            for x in lo as usize..=hi as usize {
                let p = [x as f32 + 0.5, py, 0.0];
                let w = [edge(p1, p2, p), edge(p2, p0, p), edge(p0, p1, p)];
                if (0..3).any(|k| w[k] < 0.0 || (w[k] == 0.0 && !tl[k])) {
                    continue;
                }
                let inv_z = (w[0] * p0[2] + w[1] * p1[2] + w[2] * p2[2]) * inv_area;
                let i = y * OBS_WIDTH + x;
                if inv_z > self.depth[i] {
                    self.depth[i] = inv_z;
                    out.pixels[i * 3..i * 3 + 3].copy_from_slice(&color);
                }
            }
        }
    }
}

/// Corner indices per face (bit 0 = x, bit 1 = y, bit 2 = z), in cyclic order.
const FACES: [(Axis, bool, [usize; 4]); 6] = [
    (Axis::X, false, [0, 2, 6, 4]),
    (Axis::X, true, [1, 3, 7, 5]),
    (Axis::Y, false, [0, 1, 5, 4]),
    (Axis::Y, true, [2, 3, 7, 6]),
    (Axis::Z, false, [0, 1, 3, 2]),
    (Axis::Z, true, [4, 5, 7, 6]),
];

/// Positive when `p` is on the interior side of `a -> b` for a positively wound triangle.
fn edge(a: [f32; 3], b: [f32; 3], p: [f32; 3]) -> f32 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

/// Top edges (horizontal, pointing +x) and left edges (pointing up the screen).
fn top_left(a: [f32; 3], b: [f32; 3]) -> bool {
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    (dy == 0.0 && dx > 0.0) || dy < 0.0
}

pub fn agent_box(index: usize, agent: &AgentState) -> SceneBox {
    SceneBox {
        aabb: agent.aabb(),
        material: material::agent_material(index),
    }
}

/// Convenience wrapper allocating its own buffers.
pub fn render_view(scene: &StaticScene, world: &World, viewer: Option<usize>, cam: &Camera) -> Observation {
    let mut out = Observation::default();
    Renderer::new().render_view(scene, world, viewer, cam, &mut out);
    out
}

pub const HUD_ROWS: std::ops::RangeInclusive<usize> = 2..=4;
pub const HUD_LEFT: usize = 2;
pub const HUD_MAX_WIDTH: usize = 100;

/// Draws the remaining-time bar: rows 2..=4, columns `[2, 2 + round(frac * 100))`.
pub fn overlay_hud(obs: &mut Observation, remaining_fraction: f64) {
    let frac = remaining_fraction.clamp(0.0, 1.0);
    let width = (frac * HUD_MAX_WIDTH as f64).round() as usize;
    for y in HUD_ROWS {
        for x in HUD_LEFT..HUD_LEFT + width {
            obs.set_pixel(x, y, [255, 255, 255]);
        }
    }
}
