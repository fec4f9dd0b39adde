// bring-up probes (removed before finalization)
use diagrnn::activation::Activation;
use diagrnn::bounds::{bound_report, BoundInputs, NuBudget};
use diagrnn::init::InitConfig;
use diagrnn::teacher::{make_dataset, TeacherSpec, TransportMap};
use diagrnn::training::*;

#[test]
fn probe_criterion7_cost() {
    let t0 = std::time::Instant::now();
    let map = TransportMap::constant(0.5, 0.5);
    let teacher = TeacherSpec { map, alpha: 0.3, act: Activation::Tanh, mc_samples: 1_000_000, seed: 42 };
    let ds = make_dataset(&teacher, 32, 3, 6, 43).unwrap();
    println!("dataset: {:?}", t0.elapsed());
    let mut maxy: f64 = 0.0;
    for (_, y) in ds.samples() { for v in y { maxy = maxy.max(v.abs()); } }
    println!("max |label| = {maxy:.3e}");
    let nu = map.nu();
    let radii = ProjectionRadii { w: nu.w, u: nu.u, c: nu.c };
    let t1 = std::time::Instant::now();
    let tau = 64;
    let report = run_training(
        Variant::ProjectedGd, &ds,
        &InitConfig { m: 4096, d: 3, alpha: 0.3, seed: 1 },
        Some(radii), step_size_schedule(6, tau), tau, Activation::Tanh,
        &Monitors { record_every: tau, ..Monitors::default() },
    ).unwrap();
    let per_step = t1.elapsed().as_secs_f64() / tau as f64;
    println!("tau=64 run: {:?} ({:.1} ms/step) min_risk={:.3e} init_risk={:.3e}",
        t1.elapsed(), per_step * 1e3, report.min_risk, report.history[0].risk);
    println!("projected total for criterion 7: {:.1} min", per_step * 27200.0 / 60.0);
    let inputs = BoundInputs {
        sigma0: 1.0, sigma1: 1.0, sigma2: diagrnn::activation::TANH_SIGMA2,
        alpha: 0.3, rho: radii, nu: NuBudget { w: nu.w, u: nu.u, c: nu.c },
        m: 4096, d: 3, t_len: 6, n: 32, delta: 0.05, tau, epsilon: 0.1,
    };
    let rep = bound_report(&inputs).unwrap();
    println!("min_risk_bound(tau=64) = {:.3e}", rep.min_risk_bound);
}
