//! Agents and interactive objects. These live outside the voxel grid and are
//! owned by exactly one environment.

use std::f64::consts::{FRAC_PI_4, TAU};

use crate::grid::{world_to_voxel, VoxelCoord};
use crate::material::{self, MaterialId};
use crate::math::{Aabb, Vec3};

/// Collision proxy of an agent: 0.6 x 1.8 x 0.6, feet at `pose.position`.
pub const AGENT_SIZE: Vec3 = Vec3::new(0.6, 1.8, 0.6);
pub const EYE_HEIGHT: f64 = 1.6;
pub const PITCH_LIMIT: f64 = FRAC_PI_4;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Pose {
    /// Center of the agent's feet.
    pub position: Vec3,
    /// Radians in `[0, 2pi)`; zero faces +z, increasing turns left.
    pub yaw: f64,
    /// Radians in `[-pi/4, pi/4]`; positive looks up.
    pub pitch: f64,
}

impl Pose {
    pub fn new(position: Vec3, yaw: f64) -> Self {
        let mut p = Pose {
            position,
            yaw: 0.0,
            pitch: 0.0,
        };
        p.set_yaw(yaw);
        p
    }

    pub fn set_yaw(&mut self, yaw: f64) {
        let w = yaw.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        self.yaw = if w >= TAU { 0.0 } else { w };
    }

    pub fn set_pitch(&mut self, pitch: f64) {
        self.pitch = pitch.clamp(-PITCH_LIMIT, PITCH_LIMIT);
    }

    /// Horizontal unit vector the agent faces.
    pub fn forward_flat(&self) -> Vec3 {
        Vec3::new(self.yaw.sin(), 0.0, self.yaw.cos())
    }

    /// Horizontal unit vector to the agent's right.
    pub fn right_flat(&self) -> Vec3 {
        Vec3::new(-self.yaw.cos(), 0.0, self.yaw.sin())
    }

    /// Unit gaze direction including pitch.
    pub fn gaze_dir(&self) -> Vec3 {
        let (sp, cp) = self.pitch.sin_cos();
        let (sy, cy) = self.yaw.sin_cos();
        Vec3::new(sy * cp, sp, cy * cp)
    }

    pub fn eye(&self) -> Vec3 {
        self.position + Vec3::new(0.0, EYE_HEIGHT, 0.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId(pub u32);

pub type AgentId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct AgentState {
    pub pose: Pose,
    pub vertical_velocity: f64,
    pub grounded: bool,
    pub carrying: Option<ObjectId>,
    /// Bitmask of trigger kinds overlapped at the end of the previous step.
    pub touching: u8,
}

impl AgentState {
    pub fn new(pose: Pose) -> Self {
        Self {
            pose,
            vertical_velocity: 0.0,
            grounded: true,
            carrying: None,
            touching: 0,
        }
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_foot(self.pose.position, AGENT_SIZE)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObjectKind {
    MovableBox,
    GreenDiamond,
    RedDiamond,
    PinkDiamond,
    CollectibleShape { shape: u8, color: u8 },
    RearrangeItem { item: u8 },
}

/// Shapes available to collectibles; index is the `shape` id.
pub const SHAPE_SIZES: [Vec3; 3] = [
    Vec3::new(0.5, 0.5, 0.5),
    Vec3::new(0.3, 0.9, 0.3),
    Vec3::new(0.8, 0.25, 0.8),
];

impl ObjectKind {
    /// Solid, cell-sized objects that block movement and can be carried or pushed.
    pub fn is_block(self) -> bool {
        matches!(self, ObjectKind::MovableBox | ObjectKind::RearrangeItem { .. })
    }

    /// Small items collected by walking into them.
    pub fn is_pickup(self) -> bool {
        !self.is_block()
    }

    pub fn material(self) -> MaterialId {
        match self {
            ObjectKind::MovableBox => material::MOVABLE_BOX,
            ObjectKind::GreenDiamond => material::GREEN_DIAMOND,
            ObjectKind::RedDiamond => material::RED_DIAMOND,
            ObjectKind::PinkDiamond => material::PINK_DIAMOND,
            ObjectKind::CollectibleShape { color, .. } => {
                material::SHAPE_COLOR_BASE + color % material::NUM_SHAPE_COLORS
            }
            ObjectKind::RearrangeItem { item } => {
                material::ITEM_COLOR_BASE + item % material::NUM_ITEM_COLORS
            }
        }
    }

    /// Box for this kind resting in (blocks) or floating in (pickups) the given cell.
    pub fn aabb_in_cell(self, cell: VoxelCoord) -> Aabb {
        let base = Vec3::new(cell.x as f64 + 0.5, cell.y as f64, cell.z as f64 + 0.5);
        match self {
            ObjectKind::MovableBox | ObjectKind::RearrangeItem { .. } => cell.aabb(),
            ObjectKind::CollectibleShape { shape, .. } => {
                let size = SHAPE_SIZES[shape as usize % SHAPE_SIZES.len()];
                Aabb::from_foot(base + Vec3::new(0.0, 0.2, 0.0), size)
            }
            _ => Aabb::from_foot(base + Vec3::new(0.0, 0.2, 0.0), Vec3::new(0.4, 0.6, 0.4)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectState {
    Free,
    Carried(AgentId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicObject {
    pub id: ObjectId,
    pub kind: ObjectKind,
    pub aabb: Aabb,
    pub state: ObjectState,
}

impl DynamicObject {
    pub fn new(id: ObjectId, kind: ObjectKind, cell: VoxelCoord) -> Self {
        Self {
            id,
            kind,
            aabb: kind.aabb_in_cell(cell),
            state: ObjectState::Free,
        }
    }

    pub fn is_free(&self) -> bool {
        self.state == ObjectState::Free
    }

    /// Lattice cell containing the object's bottom-center.
    pub fn cell(&self) -> VoxelCoord {
        let c = self.aabb.center();
        world_to_voxel(Vec3::new(c.x, self.aabb.min.y + 1e-6, c.z))
    }
}
