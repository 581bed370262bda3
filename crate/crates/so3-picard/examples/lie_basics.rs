//! Tour of the SO(3) primitives: Exp/Log maps, composition, inverse, and
//! geodesic distance.
//!
//! ```bash
//! cargo run --release -p so3-picard --example lie_basics
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use so3_picard::so3::{
    compose, exp_map, geodesic_distance, inverse, log_map, random_uniform, Rotation, Tangent,
};

fn main() -> so3_picard::Result<()> {
    // A quarter turn about the x-axis, as an axis-angle tangent vector.
    let quarter = Tangent::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0)?;
    let r = exp_map(&quarter);
    println!("Exp(pi/2, 0, 0) =\n{}", r.matrix());

    // Log inverts Exp, with the canonical representative ‖ω‖ ≤ π.
    let back = log_map(&r);
    println!("Log round-trip: {:?}", back.vector().as_slice());

    // Same-axis rotations add; composing two quarter turns gives a half turn.
    let half = compose(&r, &r);
    println!("angle of the composition: {:.6} rad", log_map(&half).norm());

    // The geodesic distance is the relative rotation angle.
    let identity = Rotation::identity();
    println!(
        "d(I, quarter turn) = {:.6} rad",
        geodesic_distance(&identity, &r)
    );
    println!(
        "d(R, R^-1 R R) = {:.3e} (exactly the identity)",
        geodesic_distance(&r, &compose(&r, &compose(&inverse(&r), &r)))
    );

    // Haar-uniform rotations from a seeded generator.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (a, b) = (random_uniform(&mut rng), random_uniform(&mut rng));
    let g = random_uniform(&mut rng);
    println!(
        "left invariance: d(a,b) = {:.12}, d(ga,gb) = {:.12}",
        geodesic_distance(&a, &b),
        geodesic_distance(&compose(&g, &a), &compose(&g, &b))
    );
    Ok(())
}
