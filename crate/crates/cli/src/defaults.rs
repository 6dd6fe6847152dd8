//! The table of defaults printed by the `defaults` subcommand.

use std::fmt::Write;

use grassradon::affine_radon::PipelineConfig;
use grassradon::funk::FunkConfig;
use grassradon::radon_john::{RadonJohnConfig, RotationAverage};
use grassradon::tolerances::Tolerances;

fn average(a: &RotationAverage) -> String {
    match a {
        RotationAverage::MonteCarlo { samples } => format!("Haar Monte Carlo, {samples} rotations"),
        RotationAverage::Cubature(c) => format!("cubature, circle {} / sphere {} nodes", c.circle, c.sphere.len()),
        RotationAverage::Focused { cubature, .. } => format!("focused cubature, circle {}", cubature.circle),
    }
}

/// Human-readable defaults of every budget, grid and tolerance.
pub fn table() -> String {
    let mut out = String::new();
    let cfg = PipelineConfig::new(3, 1, 2, 0).expect("valid dimensions");
    let funk = FunkConfig::default();
    let rj = RadonJohnConfig::default();
    let tol = Tolerances::default();
    let mut line = |k: &str, v: String| writeln!(out, "{k:<40} {v}").expect("write to string");
    line("[pipeline]", String::new());
    line("outer cubature", format!("circle {} / sphere {} nodes", cfg.outer.circle, cfg.outer.sphere.len()));
    line("fibre line nodes", cfg.line_nodes.to_string());
    line("radial grid", format!("[0, {}] in {} intervals", cfg.radial.r_max, cfg.radial.intervals));
    line("pipeline Funk budget", format!(
        "circle {} / sphere {} nodes / {} radial intervals",
        cfg.funk.cubature.circle,
        cfg.funk.cubature.sphere.len(),
        cfg.funk.radial_intervals
    ));
    line("pipeline d-plane inversion", format!(
        "t ∈ [0, {}] in {} intervals, {}",
        cfg.radon_john.t_max,
        cfg.radon_john.intervals,
        average(&cfg.radon_john.average)
    ));
    line("memoisation", format!("{} (key rounding 1e-8)", cfg.memoize));
    line("ϰ", "smallest admissible value".into());
    line("[funk]", String::new());
    line("cubature", format!("circle {} / sphere {} nodes", funk.cubature.circle, funk.cubature.sphere.len()));
    line("radial intervals", funk.radial_intervals.to_string());
    line("boundary limit step", funk.limit_step.to_string());
    line("[radon_john]", String::new());
    line("t-grid", format!("[0, {}] in {} intervals", rj.t_max, rj.intervals));
    line("rotation average", average(&rj.average));
    line("[experiments]", String::new());
    line("seed", "0".into());
    line("sample points", "10 (2 subspaces for profile pipelines)".into());
    line("duality Monte Carlo samples", "1000000 per side".into());
    line("Erdélyi–Kober grid", "[0, 8] in 512 intervals, interior 80% checked".into());
    line("[tolerances]", String::new());
    line("remark values (abs)", tol.remark_values.to_string());
    line("Erdélyi–Kober identity (sup)", tol.ek_identity.to_string());
    line("radial reduction (rel)", tol.radial_reduction.to_string());
    line("Funk round trip (rel L²)", tol.funk_round_trip.to_string());
    line("quasi-radial profiles (rel L²)", tol.quasi_radial.to_string());
    line("general inversion (rel)", tol.general_inversion.to_string());
    line("dual identity (rel)", tol.dual_identity.to_string());
    line("dual reconstruction (rel)", tol.dual_reconstruction.to_string());
    line("duality (standard errors)", tol.duality_sigmas.to_string());
    line("limit resolution (rel error bar)", tol.limit_resolution.to_string());
    line("forward closed form (abs)", "1e-6".into());
    out
}
