//! Fixtures shared by the benchmarks.

use dol_core::orbit::{assemble_itinerary, build_orbit, build_target_list};
use dol_core::{CVec, GraphSample, Itinerary, OrbitRecord, TolerancePolicy};

/// Itinerary of the seeded target grid for `schedule`.
pub fn itinerary(m: usize, schedule: &[f64]) -> Itinerary {
    let policy = TolerancePolicy::default();
    let targets = build_target_list(m, schedule, &policy, 7).expect("targets");
    assemble_itinerary(&targets, &policy).expect("itinerary")
}

pub fn orbit(m: usize, schedule: &[f64]) -> OrbitRecord {
    let it = itinerary(m, schedule);
    build_orbit(&it, it.len(), &TolerancePolicy::default()).expect("orbit")
}

pub fn orbit_points(m: usize, schedule: &[f64]) -> Vec<CVec> {
    orbit(m, schedule).points
}

/// `n` samples of `r(v) = |sin 3v|` on `[-2, 2]`.
pub fn wavy_graph(n: usize) -> GraphSample {
    let pts = (0..n)
        .map(|i| vec![-2.0 + 4.0 * i as f64 / (n - 1) as f64])
        .collect();
    GraphSample::from_fn(1, pts, 3.0, |x| (3.0 * x[0]).sin().abs()).expect("graph")
}
