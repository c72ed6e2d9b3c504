//! The existence regime and its mountain geometry: embedding constant
//! estimate, λ*, ρ, a, energies on the sphere ‖u‖_X = ρ, and the ray
//! I(tφ) down a plateau bump supported in Ω₀.
//!
//! ```bash
//! cargo run --release --example mountain_geometry
//! ```

use nonlocal_robin::config::Problem;
use nonlocal_robin::solver::{estimate_embedding_constant, existence_regime, mountain_geometry_check};

fn main() {
    let prob = Problem::preset_1d(64).unwrap();

    let est = estimate_embedding_constant(&prob, prob.spec.solver.restarts, prob.spec.seed).unwrap();
    println!("embedding constant estimate:");
    println!("  best sampled ratio  {:.6}", est.raw_max);
    println!("  safety factor       {}", est.safety_factor);
    println!("  alpha               {:.6}  (heuristic: sampled lower bound × safety)", est.alpha);

    let regime = existence_regime(&prob, est.alpha).unwrap();
    println!("\nregime constants:");
    println!("  ‖V‖_r        {:.6}", regime.v_norm);
    println!("  lambda*      {:.6e}", regime.lambda_star);
    println!("  lambda       {:.6e}  (auto = lambda*/2)", regime.lambda);
    println!("  rho          {:.6}", regime.rho);
    println!("  a            {:.6e}  (sphere bound rho^p⁺/(2p⁺3^(p⁺−1)))", regime.sphere_bound_a);

    let (mnt, _phi) =
        mountain_geometry_check(&prob, &regime, prob.spec.solver.sphere_samples, prob.spec.seed)
            .unwrap();
    println!("\nsphere ‖u‖_X = rho ({} samples):", mnt.sphere.len());
    println!("  min I        {:.6e}", mnt.sphere_min);
    println!("  positive?    {:?}", mnt.sphere_positive);
    println!("  above a?     {:?}", mnt.sphere_above_a);
    println!("  rescaling within 1e−6: {}", mnt.rescaling_ok);

    println!("\nray I(t·φ):");
    println!("  {:>14} {:>16}", "t", "I(t phi)");
    for &(t, e) in &mnt.ray {
        println!("  {t:>14.6e} {e:>16.8e}");
    }
    println!(
        "  negative at smallest t: {} (best t = {:.3e})",
        mnt.ray_negative_at_smallest, mnt.best_t
    );
}
