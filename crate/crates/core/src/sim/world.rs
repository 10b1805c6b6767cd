//! Line-oriented world description files.
//!
//! ```text
//! flownav-world-v1
//! floor_seed 17
//! background 190
//! obstacle 120 -4.5 40 35 9981
//! ```
//!
//! Lines starting with `#` are comments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Obstacle, SimError, World};

pub const WORLD_VERSION: &str = "flownav-world-v1";

pub fn world_to_text(world: &World, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(WORLD_VERSION);
    out.push('\n');
    out.push_str(&format!("floor_seed {}\n", world.floor_texture_seed));
    out.push_str(&format!("background {}\n", world.background_level));
    for o in &world.obstacles {
        out.push_str(&format!(
            "obstacle {} {} {} {} {}\n",
            o.center_x, o.center_y, o.width, o.height, o.texture_seed
        ));
    }
    out
}

pub fn parse_world(text: &str) -> Result<World, SimError> {
    let mut version_seen = false;
    let mut floor = None;
    let mut background = None;
    let mut obstacles = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let bad = |msg: String| SimError::BadWorld { line: line_no, msg };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !version_seen {
            if line != WORLD_VERSION {
                return Err(bad(format!("expected {WORLD_VERSION:?}, found {line:?}")));
            }
            version_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number {s:?}")));
        let int = |s: &str| s.parse::<u64>().map_err(|_| bad(format!("bad integer {s:?}")));
        match fields.as_slice() {
            ["floor_seed", v] => floor = Some(int(v)?),
            ["background", v] => background = Some(num(v)?),
            ["obstacle", x, y, w, h, s] => obstacles.push(Obstacle {
                center_x: num(x)?,
                center_y: num(y)?,
                width: num(w)?,
                height: num(h)?,
                texture_seed: int(s)?,
            }),
            _ => return Err(bad(format!("unrecognized line {line:?}"))),
        }
    }
    if !version_seen {
        return Err(SimError::BadWorld {
            line: 0,
            msg: "missing version line".into(),
        });
    }
    let world = World {
        floor_texture_seed: floor.ok_or(SimError::BadWorld {
            line: 0,
            msg: "missing floor_seed".into(),
        })?,
        background_level: background.unwrap_or(190.0),
        obstacles,
    };
    world.validate()?;
    Ok(world)
}

/// A navigation course along +x from the origin: `count` obstacles spaced
/// 110-140 cm apart starting around 120 cm, each within 20 cm of the line of
/// travel.
pub fn generate_world(seed: u64, count: usize) -> World {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let floor_texture_seed = rng.gen();
    let background_level = rng.gen_range(160.0..215.0f64).round();
    let mut x = 0.0;
    let mut obstacles = Vec::with_capacity(count);
    for _ in 0..count {
        x += rng.gen_range(110.0..140.0f64);
        obstacles.push(Obstacle {
            center_x: x.round(),
            center_y: rng.gen_range(-20.0..20.0f64).round(),
            width: rng.gen_range(30.0..60.0f64).round(),
            height: rng.gen_range(25.0..50.0f64).round(),
            texture_seed: rng.gen(),
        });
    }
    World {
        floor_texture_seed,
        background_level,
        obstacles,
    }
}
