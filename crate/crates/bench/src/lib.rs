//! Scenes shared by the benchmarks in `benches/`.

use urbanview::{Building, BuildingRole, Cuboid, GeoOrigin, Point3, Scene};

fn boxed(id: &str, role: BuildingRole, lo: [f64; 3], hi: [f64; 3]) -> Building {
    let c = Cuboid::from_bounds(lo.into(), hi.into()).expect("valid bounds");
    Building::new(id, role, vec![c]).expect("valid building")
}

/// A landmark tower behind a candidate block, two static neighbours and a
/// straight observation path.
pub fn district() -> Scene {
    Scene::new(
        GeoOrigin {
            lat: 22.54,
            lon: 114.05,
        },
        vec![
            boxed("tower", BuildingRole::Landmark, [55.0, -5.0, 0.0], [65.0, 5.0, 60.0]),
            boxed("cand", BuildingRole::Candidate, [-5.0, -8.0, 0.0], [5.0, 8.0, 25.0]),
            boxed("west", BuildingRole::Static, [-30.0, -10.0, 0.0], [-15.0, 10.0, 12.0]),
            boxed("east", BuildingRole::Static, [15.0, -10.0, 0.0], [30.0, 10.0, 15.0]),
        ],
        vec![Point3::new(-40.0, -40.0, 0.0), Point3::new(100.0, -40.0, 0.0)],
    )
    .expect("valid scene")
}

/// A 10 m cube with a tall slab beside it.
pub fn slab() -> Scene {
    Scene::new(
        GeoOrigin {
            lat: 22.54,
            lon: 114.05,
        },
        vec![
            boxed("target", BuildingRole::Landmark, [-5.0, -5.0, 0.0], [5.0, 5.0, 10.0]),
            boxed("slab", BuildingRole::Static, [8.0, -20.0, 0.0], [10.0, 20.0, 30.0]),
        ],
        vec![],
    )
    .expect("valid scene")
}
