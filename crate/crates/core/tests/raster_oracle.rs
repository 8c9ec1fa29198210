//! The rasterizer against per-pixel ray casting.

use proptest::prelude::*;

use urbanview::raster::{observer_camera, render_classified, Camera, PixelClass, Projection};
use urbanview::{Building, BuildingRole, Cuboid, Point3};

const SIZE: usize = 100;

/// Ray through the centre of pixel `(i, j)`.
fn pixel_ray(cam: &Camera, i: usize, j: usize) -> (Point3, Point3) {
    let forward = (cam.look_at() - cam.position()).normalized().unwrap();
    let right = forward.cross(cam.up()).normalized().unwrap();
    let up = right.cross(forward);
    let nx = (i as f64 + 0.5) / SIZE as f64 * 2.0 - 1.0;
    let ny = 1.0 - (j as f64 + 0.5) / SIZE as f64 * 2.0;
    match cam.projection() {
        Projection::Perspective { fov_y } => {
            let t = (0.5 * fov_y).tan();
            (cam.position(), forward + right * (nx * t) + up * (ny * t))
        }
        Projection::Orthographic { half_height } => (
            cam.position() + right * (nx * half_height) + up * (ny * half_height),
            forward,
        ),
    }
}

/// Entry distance of a ray into a cuboid, by slab clipping in its frame.
fn hit(c: &Cuboid, origin: Point3, dir: Point3) -> Option<f64> {
    let o = c.to_local(origin);
    let d = c.to_local(origin + dir) - o;
    let h = c.half_extents();
    let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
    for (k, hk) in h.into_iter().enumerate() {
        let (ok, dk) = (o.component(k), d.component(k));
        if dk.abs() < 1e-15 {
            if ok.abs() > hk {
                return None;
            }
            continue;
        }
        let (a, b) = ((-hk - ok) / dk, (hk - ok) / dk);
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    (t0 <= t1).then_some(t0)
}

fn cast(buildings: &[(Building, PixelClass)], cam: &Camera) -> Vec<PixelClass> {
    let mut out = Vec::with_capacity(SIZE * SIZE);
    for j in 0..SIZE {
        for i in 0..SIZE {
            let (o, d) = pixel_ray(cam, i, j);
            let nearest = buildings
                .iter()
                .flat_map(|(b, class)| b.cuboids.iter().filter_map(move |c| hit(c, o, d).map(|t| (t, *class))))
                .min_by(|a, b| a.0.total_cmp(&b.0));
            out.push(nearest.map_or(PixelClass::Background, |(_, c)| c));
        }
    }
    out
}

fn cuboid() -> impl Strategy<Value = Cuboid> {
    (
        -15.0f64..15.0,
        -15.0f64..15.0,
        1.0f64..8.0,
        1.0f64..6.0,
        1.0f64..6.0,
        0.0f64..3.2,
    )
        .prop_map(|(x, y, hx, hy, hz, yaw)| Cuboid::new(Point3::new(x, y, hz), [hx, hy, hz], yaw).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classes_agree_with_ray_casting(
        target in cuboid(),
        others in prop::collection::vec(cuboid(), 0..4),
        az in 0.0f64..std::f64::consts::TAU,
        el in 0.2f64..1.2,
        ortho in any::<bool>(),
    ) {
        let t = Building::new("t", BuildingRole::Landmark, vec![target]).unwrap();
        let mut scene = vec![(t.clone(), PixelClass::Target)];
        for (k, c) in others.into_iter().enumerate() {
            scene.push((Building::new(format!("o{k}"), BuildingRole::Static, vec![c]).unwrap(), PixelClass::Other));
        }
        let eye = t.centroid() + Point3::new(az.cos() * el.cos(), az.sin() * el.cos(), el.sin()) * 60.0;
        let cam = if ortho {
            Camera::new(eye, t.centroid(), Point3::Z, Projection::Orthographic { half_height: 25.0 }).unwrap()
        } else {
            observer_camera(&t, eye, std::f64::consts::FRAC_PI_3).unwrap()
        };
        // skip views from inside an occluder
        prop_assume!(!scene.iter().any(|(b, _)| b.cuboids.iter().any(|c| c.contains_within(eye, 0.0))));

        let refs: Vec<&Building> = scene.iter().map(|(b, _)| b).collect();
        let mask = render_classified(&refs, &cam, SIZE, |b| {
            scene.iter().find(|(s, _)| s.id == b.id).map(|(_, c)| *c)
        })
        .unwrap();
        let expected = cast(&scene, &cam);
        let wrong = mask.pixels().iter().zip(&expected).filter(|(a, b)| a != b).count();
        // only silhouette and crease pixels may differ
        prop_assert!(wrong as f64 <= 0.02 * (SIZE * SIZE) as f64, "{wrong} pixels differ");
    }
}

#[test]
fn axis_aligned_face_matches_exactly() {
    // a face filling the middle half of an orthographic frame
    let c = Cuboid::from_bounds(Point3::new(-5.0, -5.0, -1.0), Point3::new(5.0, 5.0, 0.0)).unwrap();
    let b = Building::new("t", BuildingRole::Landmark, vec![c]).unwrap();
    let cam = Camera::new(
        Point3::new(0.0, 0.0, 50.0),
        Point3::ZERO,
        Point3::new(0.0, 1.0, 0.0),
        Projection::Orthographic { half_height: 10.0 },
    )
    .unwrap();
    let mask = render_classified(&[&b], &cam, SIZE, |_| Some(PixelClass::Target)).unwrap();
    assert_eq!(mask.count(PixelClass::Target), 50 * 50);
    assert_eq!(mask.pixels(), cast(&[(b, PixelClass::Target)], &cam).as_slice());
}
