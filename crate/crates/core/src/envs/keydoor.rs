//! Gridworld where the door only opens after the key has been picked up.

use std::collections::BTreeMap;

use crate::config::Params;
use crate::error::{Error, Result};

use super::{EnvSpec, FiniteMdp, Transition};

pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const LEFT: usize = 2;
pub const RIGHT: usize = 3;
pub const NOOP: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct KeyDoorParams {
    pub rows: usize,
    pub cols: usize,
    pub key: (usize, usize),
    pub door: (usize, usize),
    pub start: (usize, usize),
    /// Start uniformly on any cell other than the key and the door.
    pub random_start: bool,
    pub step_penalty: f64,
    pub door_reward: f64,
}

impl Default for KeyDoorParams {
    fn default() -> Self {
        Self {
            rows: 5,
            cols: 5,
            key: (1, 3),
            door: (4, 4),
            start: (0, 0),
            random_start: false,
            step_penalty: -1.0,
            door_reward: 10.0,
        }
    }
}

impl KeyDoorParams {
    pub(crate) fn from_table(table: &BTreeMap<String, String>) -> Result<Self> {
        let d = Self::default();
        let mut p = Params::new("env_params", table);
        let out = Self {
            rows: p.get("rows", d.rows)?,
            cols: p.get("cols", d.cols)?,
            key: (p.get("key_row", d.key.0)?, p.get("key_col", d.key.1)?),
            door: (p.get("door_row", d.door.0)?, p.get("door_col", d.door.1)?),
            start: (p.get("start_row", d.start.0)?, p.get("start_col", d.start.1)?),
            random_start: p.get("random_start", d.random_start)?,
            step_penalty: p.get("step_penalty", d.step_penalty)?,
            door_reward: p.get("door_reward", d.door_reward)?,
        };
        p.finish()?;
        Ok(out)
    }
}

/// States are `(row, col, has_key)` packed as `has_key·R·C + row·C + col`,
/// plus one absorbing state `2·R·C`. Moving into the door without the key
/// leaves the agent in place; entering the key cell picks the key up;
/// entering the door with the key pays `door_reward` and terminates.
/// Every live step pays `step_penalty`.
#[derive(Clone, Debug)]
pub struct KeyDoor {
    params: KeyDoorParams,
    spec: EnvSpec,
    starts: Vec<(usize, f64)>,
}

impl KeyDoor {
    pub fn new(params: KeyDoorParams, horizon: usize) -> Result<Self> {
        let KeyDoorParams {
            rows,
            cols,
            key,
            door,
            start,
            ..
        } = params;
        let bad = |key: &str, msg: &str| Err(Error::config(format!("env_params.{key}"), msg));
        if rows == 0 || cols == 0 || rows * cols < 3 {
            return bad("rows", "grid needs at least three cells");
        }
        let inside = |(r, c): (usize, usize)| r < rows && c < cols;
        if !inside(key) {
            return bad("key_row", "key outside the grid");
        }
        if !inside(door) {
            return bad("door_row", "door outside the grid");
        }
        if key == door {
            return bad("key_row", "key and door share a cell");
        }
        if !params.random_start && (!inside(start) || start == key || start == door) {
            return bad("start_row", "start must be a free cell inside the grid");
        }
        if !params.step_penalty.is_finite() {
            return bad("step_penalty", "must be finite");
        }
        if !params.door_reward.is_finite() {
            return bad("door_reward", "must be finite");
        }

        let cell = |(r, c): (usize, usize)| r * cols + c;
        let starts = if params.random_start {
            let free: Vec<usize> = (0..rows * cols)
                .filter(|&s| s != cell(key) && s != cell(door))
                .collect();
            let p = 1.0 / free.len() as f64;
            free.into_iter().map(|s| (s, p)).collect()
        } else {
            vec![(cell(start), 1.0)]
        };
        let spec = EnvSpec {
            name: "keydoor".into(),
            state_count: 2 * rows * cols + 1,
            action_count: 5,
            horizon,
            deterministic: !params.random_start,
            params: vec![
                ("rows".into(), rows.to_string()),
                ("cols".into(), cols.to_string()),
                ("key".into(), format!("{},{}", key.0, key.1)),
                ("door".into(), format!("{},{}", door.0, door.1)),
                (
                    "start".into(),
                    if params.random_start {
                        "random".into()
                    } else {
                        format!("{},{}", start.0, start.1)
                    },
                ),
                ("step_penalty".into(), params.step_penalty.to_string()),
                ("door_reward".into(), params.door_reward.to_string()),
            ],
        };
        Ok(Self { params, spec, starts })
    }

    pub fn params(&self) -> &KeyDoorParams {
        &self.params
    }

    pub fn encode(&self, row: usize, col: usize, has_key: bool) -> usize {
        let p = &self.params;
        usize::from(has_key) * p.rows * p.cols + row * p.cols + col
    }

    /// `(row, col, has_key)`, or `None` for the absorbing state.
    pub fn decode(&self, state: usize) -> Option<(usize, usize, bool)> {
        let area = self.params.rows * self.params.cols;
        if state >= 2 * area {
            return None;
        }
        let has_key = state >= area;
        let cell = state % area;
        Some((cell / self.params.cols, cell % self.params.cols, has_key))
    }
}

impl FiniteMdp for KeyDoor {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn start_distribution(&self) -> &[(usize, f64)] {
        &self.starts
    }

    fn transition(&self, state: usize, action: usize) -> Transition {
        let absorbing = Transition {
            next_state: self.absorbing_state(),
            reward: 0.0,
            done: true,
        };
        let Some((r, c, has_key)) = self.decode(state) else {
            return absorbing;
        };
        let p = &self.params;
        let (mut nr, mut nc) = (r, c);
        match action {
            UP if r > 0 => nr -= 1,
            DOWN if r + 1 < p.rows => nr += 1,
            LEFT if c > 0 => nc -= 1,
            RIGHT if c + 1 < p.cols => nc += 1,
            _ => {}
        }
        if (nr, nc) == p.door {
            if has_key {
                return Transition {
                    next_state: self.absorbing_state(),
                    reward: p.step_penalty + p.door_reward,
                    done: true,
                };
            }
            (nr, nc) = (r, c);
        }
        let has_key = has_key || (nr, nc) == p.key;
        Transition {
            next_state: self.encode(nr, nc, has_key),
            reward: p.step_penalty,
            done: false,
        }
    }

    fn absorbing_state(&self) -> usize {
        2 * self.params.rows * self.params.cols
    }

    fn noop_action(&self) -> usize {
        NOOP
    }

    fn coords(&self, state: usize) -> Option<Vec<i64>> {
        let (r, c, k) = self.decode(state)?;
        // Key status dominates any positional distance.
        let key_weight = (self.params.rows + self.params.cols) as i64;
        Some(vec![r as i64, c as i64, i64::from(k) * key_weight])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> KeyDoor {
        KeyDoor::new(KeyDoorParams::default(), 20).unwrap()
    }

    #[test]
    fn door_is_locked_without_key() {
        let e = env();
        let s = e.encode(3, 4, false);
        let tr = e.transition(s, DOWN);
        assert_eq!(tr.next_state, s);
        assert!(!tr.done);
        let s = e.encode(3, 4, true);
        let tr = e.transition(s, DOWN);
        assert_eq!(
            (tr.next_state, tr.reward, tr.done),
            (e.absorbing_state(), 9.0, true)
        );
    }

    #[test]
    fn key_pickup_and_walls() {
        let e = env();
        let tr = e.transition(e.encode(1, 2, false), RIGHT);
        assert_eq!(e.decode(tr.next_state), Some((1, 3, true)));
        let tr = e.transition(e.encode(0, 0, false), UP);
        assert_eq!(tr.next_state, e.encode(0, 0, false));
        assert_eq!(tr.reward, -1.0);
    }

    #[test]
    fn random_start_excludes_key_and_door() {
        let e = KeyDoor::new(
            KeyDoorParams {
                random_start: true,
                ..KeyDoorParams::default()
            },
            20,
        )
        .unwrap();
        let starts = e.start_distribution();
        assert_eq!(starts.len(), 23);
        assert!(starts
            .iter()
            .all(|&(s, _)| s != e.encode(1, 3, false) && s != e.encode(4, 4, false)));
        assert!((starts.iter().map(|p| p.1).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(!e.spec().deterministic);
    }

    #[test]
    fn invalid_layouts() {
        let p = KeyDoorParams {
            key: (4, 4),
            ..KeyDoorParams::default()
        };
        assert!(KeyDoor::new(p, 20).is_err());
        let p = KeyDoorParams {
            start: (1, 3),
            ..KeyDoorParams::default()
        };
        assert!(KeyDoor::new(p, 20).is_err());
    }
}
