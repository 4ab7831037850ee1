// Distribution ratios around the jacket layout.
//
// Prints direction cosines, raw weights and normalized ratios for a few
// source positions, then shows how the sharpness exponent changes the split.

use std::error::Error;

use vibropan::io::load_layout_file;
use vibropan::localization::panning_weight;
use vibropan::{attenuation, PanningParams, Vec3};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let layout = load_layout_file(&vibropan::data_dir().join("jacket_layout.json"))?;
    let params = PanningParams::default();
    let o = layout.perceived_origin();
    println!("perceived origin: ({:.3}, {:.3}, {:.3})", o.x, o.y, o.z);

    let positions = [
        ("ahead", Vec3::new(0.0, 1.0, 0.0)),
        ("front-right", Vec3::new(0.5, 0.5, 0.0)),
        ("behind, low", Vec3::new(0.0, -0.6, -0.4)),
        ("at origin", o),
    ];
    for (label, p) in positions {
        let r = layout.distribute(p, &params);
        let d = attenuation(p, o, &params);
        println!("\n{label}: p = ({:.2}, {:.2}, {:.2}), d = {d:.4}", p.x, p.y, p.z);
        let u = layout.direction_cosines(p).ok();
        for (k, rk) in r.r.iter().enumerate() {
            match &u {
                Some(u) => println!(
                    "  ch{k}: u = {:+.4}  w = {:.4}  r = {rk:.4}",
                    u[k],
                    panning_weight(u[k], params.gamma)
                ),
                None => println!("  ch{k}: u = -        w = -       r = {rk:.4}"),
            }
        }
        println!("  sum r = {:.12}", r.sum());
    }

    println!("\nsharpness sweep, source at front-right:");
    for gamma in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let p = PanningParams { gamma, ..params };
        let r = layout.distribute(Vec3::new(0.5, 0.5, 0.0), &p);
        let max = r.r[r.argmax()];
        println!("  gamma {gamma:>3}: strongest ch{} takes {:.1}%", r.argmax(), 100.0 * max);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
