mod common;

use common::*;
use gdtraj::sim::{level_sets, simulate, Policy, Trajectory};
use gdtraj::Matrix;
use rand::Rng;

#[test]
fn level_set_polylines_stay_near_the_ellipse() {
    let mut rng = rng(50);
    for _ in 0..50 {
        let p = random_spd(&mut rng, 2, 0.1);
        let c = rng.gen_range(0.1..10.0);
        let res = rng.gen_range(8..200);
        let bound = (std::f64::consts::TAU / res as f64).powi(2);
        let curve = &level_sets(&p, &[c], res).unwrap()[0];
        assert_eq!(curve.len(), res + 1);
        assert_eq!(curve.first(), curve.last());
        for w in curve.windows(2) {
            for t in [0.0, 0.25, 0.5] {
                let x = [w[0][0] + t * (w[1][0] - w[0][0]), w[0][1] + t * (w[1][1] - w[0][1])];
                let radial = (p.quad_form(&x) / c).sqrt();
                assert!((radial - 1.0).abs() <= bound, "deviation {}", (radial - 1.0).abs());
            }
        }
    }
}

#[test]
fn trajectories_round_trip_through_json() {
    let k = Matrix::from_rows(&[[-1.33, -7.76]]).unwrap();
    let p = Matrix::from_rows(&[[1.69, 5.65], [5.65, 32.95]]).unwrap();
    let traj = simulate(&steering(), &Policy::Static { k }, &[-1.0, -0.3], 40, Some(&p)).unwrap();
    let text = serde_json::to_string(&traj).unwrap();
    let back: Trajectory = serde_json::from_str(&text).unwrap();
    assert_eq!(back, traj);
}

#[test]
fn recursion_is_exact_per_step() {
    let mut rng = rng(51);
    for _ in 0..50 {
        let system = random_system(&mut rng, 4, 2);
        let k = random_matrix(&mut rng, system.inputs(), system.states(), 0.5);
        let x0 = random_vector(&mut rng, system.states());
        let Ok(traj) = simulate(&system, &Policy::Static { k: k.clone() }, &x0, 30, None) else {
            continue;
        };
        assert_eq!(traj.states.len(), 31);
        assert_eq!(traj.inputs.len(), 30);
        for (i, u) in traj.inputs.iter().enumerate() {
            assert_eq!(u, &k.matvec(&traj.states[i]));
            let ax = system.a().matvec(&traj.states[i]);
            let bu = system.b().matvec(u);
            for j in 0..system.states() {
                assert!((traj.states[i + 1][j] - (ax[j] + bu[j])).abs() <= 1e-12 * (ax[j].abs() + bu[j].abs()).max(1.0));
            }
        }
    }
}
