//! Material ids and the RGB palette used by the renderer.
//!
//! Every renderable thing (static box, trigger, object, agent, decoration)
//! carries one of these ids; the renderer looks its base color up here.

pub type MaterialId = u8;

pub const FLOOR: MaterialId = 0;
pub const WALL: MaterialId = 1;
pub const HEX_WALL: MaterialId = 2;
pub const PLATFORM: MaterialId = 3;
pub const PILLAR: MaterialId = 4;
pub const PEDESTAL: MaterialId = 5;
pub const OBSTACLE: MaterialId = 6;

pub const LAVA: MaterialId = 8;
pub const EXIT_PAD: MaterialId = 9;
pub const BOX_TARGET: MaterialId = 10;
pub const BUILD_ZONE: MaterialId = 11;

pub const MOVABLE_BOX: MaterialId = 12;
pub const GREEN_DIAMOND: MaterialId = 13;
pub const RED_DIAMOND: MaterialId = 14;
pub const PINK_DIAMOND: MaterialId = 15;

/// First of the collectible-shape colors; color id `c` maps to `SHAPE_COLOR_BASE + c`.
pub const SHAPE_COLOR_BASE: MaterialId = 16;
pub const NUM_SHAPE_COLORS: u8 = 4;

/// First of the rearrangement item colors; item `i` maps to `ITEM_COLOR_BASE + i`.
pub const ITEM_COLOR_BASE: MaterialId = 20;
pub const NUM_ITEM_COLORS: u8 = 4;

/// First of the per-agent-index colors (wraps modulo [`NUM_AGENT_COLORS`]).
pub const AGENT_COLOR_BASE: MaterialId = 24;
pub const NUM_AGENT_COLORS: u8 = 8;

pub const PALETTE: [[u8; 3]; 32] = [
    [150, 150, 140], // floor
    [110, 100, 120], // wall
    [90, 120, 170],  // hex wall
    [160, 140, 100], // platform
    [120, 120, 120], // pillar
    [200, 200, 200], // pedestal
    [130, 90, 70],   // obstacle
    [0, 0, 0],
    [240, 90, 20],   // lava
    [60, 220, 240],  // exit pad
    [250, 230, 60],  // box target
    [80, 200, 90],   // build zone
    [170, 110, 50],  // movable box
    [30, 230, 60],   // green diamond
    [230, 30, 40],   // red diamond
    [250, 110, 220], // pink diamond
    [240, 240, 60],  // shape colors
    [60, 90, 250],
    [250, 140, 0],
    [170, 60, 230],
    [220, 40, 40],   // item colors
    [40, 200, 220],
    [230, 230, 230],
    [30, 120, 40],
    [255, 64, 64],   // agent colors
    [64, 128, 255],
    [64, 220, 64],
    [255, 200, 0],
    [200, 64, 255],
    [0, 220, 200],
    [255, 128, 192],
    [128, 80, 40],
];

pub fn agent_material(index: usize) -> MaterialId {
    AGENT_COLOR_BASE + (index % NUM_AGENT_COLORS as usize) as MaterialId
}
