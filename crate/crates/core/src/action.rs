//! The six-head discrete action space and its 324-value flat encoding.

use crate::error::SimError;

/// Arity of each head, most significant first.
pub const HEAD_ARITIES: [u16; 6] = [3, 3, 3, 3, 2, 2];

/// Product of [`HEAD_ARITIES`].
pub const NUM_ACTIONS: u16 = 324;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Move {
    #[default]
    NoOp,
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Strafe {
    #[default]
    NoOp,
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Turn {
    #[default]
    NoOp,
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Gaze {
    #[default]
    NoOp,
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Jump {
    #[default]
    NoOp,
    Jump,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Interact {
    #[default]
    NoOp,
    Interact,
}

/// One agent's choice for one step. `Action::default()` is the all-NoOp action.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Action {
    pub movement: Move,
    pub strafe: Strafe,
    pub turn: Turn,
    pub gaze: Gaze,
    pub jump: Jump,
    pub interact: Interact,
}

impl Action {
    pub const NOOP: Action = Action {
        movement: Move::NoOp,
        strafe: Strafe::NoOp,
        turn: Turn::NoOp,
        gaze: Gaze::NoOp,
        jump: Jump::NoOp,
        interact: Interact::NoOp,
    };

    pub fn forward() -> Action {
        Action {
            movement: Move::Forward,
            ..Action::NOOP
        }
    }

    /// Per-head indices in head order.
    pub fn heads(&self) -> [u8; 6] {
        [
            self.movement as u8,
            self.strafe as u8,
            self.turn as u8,
            self.gaze as u8,
            self.jump as u8,
            self.interact as u8,
        ]
    }

    /// Builds an action from per-head indices, rejecting out-of-arity values.
    pub fn from_heads(h: [u8; 6]) -> Result<Action, SimError> {
        for (i, (&v, &arity)) in h.iter().zip(HEAD_ARITIES.iter()).enumerate() {
            if v as u16 >= arity {
                return Err(SimError::InvalidAction(format!(
                    "head {i} value {v} exceeds arity {arity}"
                )));
            }
        }
        Ok(Action {
            movement: [Move::NoOp, Move::Forward, Move::Backward][h[0] as usize],
            strafe: [Strafe::NoOp, Strafe::Left, Strafe::Right][h[1] as usize],
            turn: [Turn::NoOp, Turn::Left, Turn::Right][h[2] as usize],
            gaze: [Gaze::NoOp, Gaze::Up, Gaze::Down][h[3] as usize],
            jump: [Jump::NoOp, Jump::Jump][h[4] as usize],
            interact: [Interact::NoOp, Interact::Interact][h[5] as usize],
        })
    }
}

/// Mixed-radix encoding with the movement head most significant.
pub fn flatten_action(a: &Action) -> u16 {
    a.heads()
        .iter()
        .zip(HEAD_ARITIES.iter())
        .fold(0u16, |acc, (&v, &r)| acc * r + v as u16)
}

pub fn unflatten_action(code: u16) -> Result<Action, SimError> {
    if code >= NUM_ACTIONS {
        return Err(SimError::InvalidAction(format!(
            "flat action {code} outside [0, {NUM_ACTIONS})"
        )));
    }
    let mut heads = [0u8; 6];
    let mut rest = code;
    for i in (0..6).rev() {
        heads[i] = (rest % HEAD_ARITIES[i]) as u8;
        rest /= HEAD_ARITIES[i];
    }
    Action::from_heads(heads)
}
