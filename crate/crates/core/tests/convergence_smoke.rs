//! Order-of-accuracy smoke test on the manufactured solution.

use polystokes::assembly::{assemble, compute_errors};
use polystokes::bench::{exact_pressure_s, exact_velocity_s, manufactured_problem};
use polystokes::mesh::generate_hex_mesh;
use polystokes::vem::{build_all_face_ops, build_dof_map};

#[test]
fn velocity_and_pressure_orders_near_two() {
    let mut errs = Vec::new();
    for n in [2usize, 4, 8] {
        let t0 = std::time::Instant::now();
        let mesh = generate_hex_mesh::<f64>(n, [0.0; 3], [1.0; 3]).unwrap();
        let dm = build_dof_map(&mesh, 2);
        let face_ops = build_all_face_ops(&mesh, 2).unwrap();
        let problem = manufactured_problem(&mesh);
        let sys = assemble(&mesh, &dm, &face_ops, &problem).unwrap();
        let t1 = std::time::Instant::now();
        let (u, p) = sys.direct_solve().unwrap();
        let t2 = std::time::Instant::now();
        let (eu, nu, ep, np_) = compute_errors(
            &mesh, &dm, &face_ops, &u, &p,
            &exact_velocity_s::<f64>, &exact_pressure_s::<f64>,
        )
        .unwrap();
        println!(
            "n={n}: rel H1 err {:.4e}, rel L2p err {:.4e} (assemble {:?}, solve {:?})",
            eu / nu, ep / np_, t1 - t0, t2 - t1
        );
        errs.push((eu / nu, ep / np_));
    }
    for w in errs.windows(2) {
        let rate_u = (w[0].0 / w[1].0).log2();
        let rate_p = (w[0].1 / w[1].1).log2();
        println!("rates: velocity {rate_u:.2}, pressure {rate_p:.2}");
        assert!(rate_u > 1.6, "velocity order {rate_u}");
        assert!(rate_p > 1.5, "pressure order {rate_p}");
    }
}
