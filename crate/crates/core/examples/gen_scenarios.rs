//! Writes the built-in scenarios to `scenarios/` as JSON files.

use std::path::PathBuf;

use rearrange_core::scenarios::{overlap_world, packed_world, single_obstacle_world, walled_world};
use rearrange_core::{scenario_to_json, Shape, Vec2};

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios"));
    std::fs::create_dir_all(&dir)?;
    let square = Shape::Polygon {
        vertices: vec![
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
        ],
    };
    let disk = Shape::Disk {
        center: Vec2::new(0.0, 0.3),
        radius: 1.5,
    };
    let mut single_disk = single_obstacle_world(disk, Vec2::new(-7.0, 0.0), Vec2::new(7.0, 0.0), 0.1);
    single_disk.name = "single_disk".into();
    let mut single_square = single_obstacle_world(square, Vec2::new(-7.0, 0.2), Vec2::new(7.0, -0.2), 0.1);
    single_square.name = "single_square".into();
    for s in [packed_world(), walled_world(), overlap_world(), single_disk, single_square] {
        let path = dir.join(format!("{}.json", s.name));
        std::fs::write(&path, scenario_to_json(&s))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
