//! Regenerates the swap and random fixtures under `scenarios/`.
//!
//! Usage: `cargo run --example gen_fixtures -- [out_dir]`

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;

use kino_cbs::geometry::{clearance, footprint_distance, place, Footprint, PlacedShape, Shape, Workspace};
use kino_cbs::scenario_io::{ProblemInstance, RobotSpec};
use kino_cbs::{RobotState, RobotType};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn shape_for(rt: RobotType) -> Shape<f64> {
    match rt {
        RobotType::DoubleIntegrator2D => Shape::disk(0.15),
        _ => Shape::rect(0.5, 0.25),
    }
}

/// Full state at rest at `(x, y)` facing `heading`.
fn rest_state(rt: RobotType, x: f64, y: f64, heading: f64) -> RobotState {
    RobotState::new(match rt {
        RobotType::Unicycle1 => vec![x, y, heading],
        RobotType::Unicycle2 => vec![x, y, heading, 0.0, 0.0],
        RobotType::DoubleIntegrator2D => vec![x, y, 0.0, 0.0],
        RobotType::CarWithTrailer => vec![x, y, heading, heading],
    })
}

fn swap(rt: RobotType, n: usize) -> ProblemInstance<f64> {
    let (c, r) = (2.0, 1.0);
    let pos: Vec<(f64, f64, f64)> = (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            (c + r * a.cos(), c + r * a.sin(), kino_cbs::scalar::wrap_angle(a + PI))
        })
        .collect();
    // Each robot drives to the start of the robot half way around the circle.
    let shift = n.div_ceil(2);
    let robots = (0..n)
        .map(|i| {
            let (x, y, h) = pos[i];
            let (gx, gy, _) = pos[(i + shift) % n];
            RobotSpec::new(rt, shape_for(rt), rest_state(rt, x, y, h), rest_state(rt, gx, gy, h))
        })
        .collect();
    ProblemInstance {
        name: format!("swap{n}_{}", rt.name()),
        workspace: Workspace::empty([0.0, 0.0], [4.0, 4.0]),
        robots,
    }
}

/// Samples uniformly and rounds to centimetres so the files stay readable.
fn draw(rng: &mut ChaCha8Rng, range: std::ops::Range<f64>) -> f64 {
    (rng.gen_range(range) * 100.0).round() / 100.0
}

fn footprint(rt: RobotType, x: &RobotState) -> Footprint<f64> {
    place(rt, &shape_for(rt), x.as_slice())
}

fn random(types: &[RobotType], seed: u64, name: &str) -> ProblemInstance<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obstacles = (0..3)
        .map(|_| {
            let c = [draw(&mut rng, 0.8..3.2), draw(&mut rng, 0.8..3.2)];
            let s = [draw(&mut rng, 0.3..0.7), draw(&mut rng, 0.3..0.7)];
            PlacedShape::aabb(c, s)
        })
        .collect();
    let ws = Workspace::new([0.0, 0.0], [4.0, 4.0], obstacles);
    let sample = |rng: &mut ChaCha8Rng, rt: RobotType, placed: &[(RobotType, RobotState)]| loop {
        let x = rest_state(rt, draw(rng, 0.3..3.7), draw(rng, 0.3..3.7), draw(rng, -3.14..3.14));
        let f = footprint(rt, &x);
        let free = f.parts().iter().all(|p| clearance(p, &ws) > 0.1);
        let apart = placed
            .iter()
            .all(|(ot, o)| footprint_distance(&f, &footprint(*ot, o)) > 0.2);
        if free && apart {
            return x;
        }
    };
    let mut starts: Vec<(RobotType, RobotState)> = Vec::new();
    let mut goals: Vec<(RobotType, RobotState)> = Vec::new();
    for &rt in types {
        let s = sample(&mut rng, rt, &starts);
        let g = loop {
            let g = sample(&mut rng, rt, &goals);
            let d = ((g.0[0] - s.0[0]).powi(2) + (g.0[1] - s.0[1]).powi(2)).sqrt();
            if d > 1.0 {
                break g;
            }
        };
        starts.push((rt, s));
        goals.push((rt, g));
    }
    let robots = starts
        .into_iter()
        .zip(goals)
        .map(|((rt, s), (_, g))| RobotSpec::new(rt, shape_for(rt), s, g))
        .collect();
    ProblemInstance {
        name: name.to_string(),
        workspace: ws,
        robots,
    }
}

fn write(dir: &Path, inst: &ProblemInstance<f64>, header: &str) {
    inst.validate().unwrap_or_else(|e| panic!("{}: {e}", inst.name));
    let text = format!("{header}\n{}", inst.to_yaml());
    // Round trip through the parser so a fixture never ships unreadable.
    let back = ProblemInstance::from_yaml(&text, &inst.name).expect("fixture parses");
    assert_eq!(back.robots.len(), inst.robots.len());
    fs::write(dir.join(format!("{}.yaml", inst.name)), text).expect("write fixture");
}

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "scenarios".into());
    let dir = Path::new(&out);
    fs::create_dir_all(dir).expect("create output dir");
    for rt in RobotType::ALL {
        for n in 2..=4 {
            let header = format!(
                "# Reconstruction: {n} {} robots on a circle of radius 1, each driving to the\n# start of the robot half way around.",
                rt.name()
            );
            write(dir, &swap(rt, n), &header);
        }
    }
    for (i, n) in [2usize, 4, 8].into_iter().enumerate() {
        let homogeneous = vec![RobotType::Unicycle1; n];
        let heterogeneous: Vec<_> = (0..n).map(|k| RobotType::ALL[k % 4]).collect();
        let seed = 100 + i as u64;
        // seeds 111..=114 for four robots emit nothing in 120 s; 115 is the first that does
        let het_seed = if n == 4 { 115 } else { seed + 10 };
        write(
            dir,
            &random(&homogeneous, seed, &format!("random{n}_homogeneous")),
            &format!("# Reconstruction: random scene, seed {seed}, {n} unicycle1 robots."),
        );
        write(
            dir,
            &random(&heterogeneous, het_seed, &format!("random{n}_heterogeneous")),
            &format!("# Reconstruction: random scene, seed {het_seed}, {n} robots of mixed types."),
        );
    }
}
