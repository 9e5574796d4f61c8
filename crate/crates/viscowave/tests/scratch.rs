// temporary experiments; removed before finalizing
use viscowave::cli::{cmd_demo_damping, Config};
use viscowave::kernel::KernelSpec;
use viscowave::oracle::{modal_solve, ModalConfig};

#[test]
#[ignore]
fn singular_order_refinement() {
    let kernel = KernelSpec::gamma_type(0.4, 0.5, 1.0).unwrap();
    let run = |dt: f64| {
        let cfg = ModalConfig {
            n_modes: 1,
            dt_fine: dt,
            kernel: kernel.clone(),
            domain_length: 1.0,
            horizon: 1.0,
            initial_displacement: vec![1.0],
            initial_velocity: vec![0.0],
            modal_load: None,
        };
        let sol = modal_solve(&cfg).unwrap();
        sol.modes[0][sol.times.len() - 1]
    };
    let mut prev: Option<f64> = None;
    for p in 4..=12 {
        let dt = 1.0 / (1u32 << p) as f64;
        let v = run(dt);
        if let Some(pv) = prev {
            println!("dt=1/{:<6} u(T)={v:.12} diff={:.3e}", 1u32 << p, v - pv);
        }
        prev = Some(v);
    }
    let a = run(1.0 / 1024.0);
    let b = run(1.0 / 2048.0);
    let c = run(1.0 / 4096.0);
    println!("fine-triple order = {}", ((a - b).abs() / (b - c).abs()).log2());
}

#[test]
#[ignore]
fn demo_peak_refinement() {
    for (ne, ns) in [(32usize, 200usize), (64, 400), (128, 800), (256, 1600)] {
        let mut cfg = Config::demo_defaults();
        cfg.problem.horizon = 20.0;
        cfg.problem.n_steps = ns;
        cfg.problem.n_elems = Some(ne);
        let demo = cmd_demo_damping(&cfg, None).unwrap();
        let peaks = demo.peak_magnitudes(2);
        println!("ne={ne:>4} ns={ns:>5}: first peaks {:?}", &peaks[..peaks.len().min(8)]);
    }
}
