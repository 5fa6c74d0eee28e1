//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hsda_core::baselines::{gda_run, GdaConfig};
use hsda_core::homogeneous::{
    check_optimality, conditioning_report, homogenized_dense, lanczos_iteration_bound, lanczos_min_eigenpair,
    solve_exact, HomogenizedOperator, LanczosOptions,
};
use hsda_core::hsda::{hsda_run, HsdaConfig};
use hsda_core::ihsda::{estimate_b_g, ihsda_step, IhsdaConfig, Warm};
use hsda_core::inner_ascent::{run_ascent, AscentSchedule};
use hsda_core::linalg::sorted_symmetric_eigen;
use hsda_core::oracle::h_dense;
use hsda_core::problems::{make_quadratic, make_wtoy, QuadraticMinimaxParams, WToy, WToyParams};
use hsda_core::{IterateTrace, Matrix, MinimaxOracle, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Verdict {
    pass: bool,
    detail: String,
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn gaussian_sym(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let a = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    (&a + a.transpose()) * 0.5
}

fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let a = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    a.qr().q()
}

fn wtoy() -> WToy {
    make_wtoy(WToyParams::default()).unwrap()
}

fn hsda_w(eps: f64, x1: &Vector, y0: &Vector) -> IterateTrace {
    let w = wtoy();
    let cfg = HsdaConfig::new(eps, &w.constants()).unwrap();
    hsda_run(&w, &cfg, x1, y0).unwrap()
}

fn optimality_suite() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for i in 0..200 {
        let n = [2, 10, 50][i % 3];
        let h = gaussian_sym(&mut rng, n);
        let g = if i % 25 == 0 { Vector::zeros(n) } else { gaussian_vec(&mut rng, n) };
        let alpha = rng.random_range(0.01..2.0);
        let pair = solve_exact(&h, &g, alpha).unwrap();
        let rep = check_optimality(&pair, &h, &g, alpha).unwrap();
        worst = worst.max(rep.max_residual());
        let strict_ok = g.norm() <= 1e-12 || pair.delta > alpha;
        if !(rep.max_residual() <= 1e-8 && pair.delta >= alpha && strict_ok) {
            bad += 1;
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        pass: bad == 0 && elapsed < Duration::from_secs(10),
        detail: format!("{bad}/200 violations, max residual {worst:.2e}, {:.2}s", elapsed.as_secs_f64()),
    }
}

fn lanczos_vs_dense() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut close = 0;
    let mut invariant_bad = 0;
    let mut worst_gap = 0.0f64;
    for i in 0..200 {
        let n = rng.random_range(1..=50);
        let h = gaussian_sym(&mut rng, n);
        let g = gaussian_vec(&mut rng, n);
        let alpha = rng.random_range(0.01..1.0);
        let op = HomogenizedOperator::new(&h, g.clone(), alpha).unwrap();
        let pair = lanczos_min_eigenpair(&op, &LanczosOptions::new(1e-8, i as u64)).unwrap();
        let dense = solve_exact(&h, &g, alpha).unwrap();
        let err = (pair.zeta - dense.delta).abs();
        worst_gap = worst_gap.max(err);
        if err <= 1e-8 {
            close += 1;
        }
        let gm = homogenized_dense(&h, &g, alpha);
        let mut z = Vector::zeros(n + 1);
        z.rows_mut(0, n).copy_from(&pair.u_hat);
        z[n] = pair.v_hat;
        let r = &gm * &z + &z * pair.zeta;
        let identity = (r.rows(0, n) - &pair.k).amax().max((r[n] - pair.rho).abs());
        let orth = z.dot(&r).abs();
        let unit = (z.norm() - 1.0).abs();
        if !(identity <= 1e-10 && orth <= 1e-10 && unit <= 1e-10) {
            invariant_bad += 1;
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        pass: close >= 198 && invariant_bad == 0 && elapsed < Duration::from_secs(30),
        detail: format!(
            "{close}/200 within 1e-8 (max {worst_gap:.2e}), {invariant_bad} invariant failures, {:.2}s",
            elapsed.as_secs_f64()
        ),
    }
}

fn inner_ascent_accuracy() -> Verdict {
    let eps = 1e-2;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = 0;
    let (mut ry, mut rg, mut rh) = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..20u64 {
        let (n, m) = (rng.random_range(2..=20), rng.random_range(1..=15));
        let q = make_quadratic(QuadraticMinimaxParams::random(n, m, seed)).unwrap();
        let c = q.constants();
        let l2 = c.l2();
        let sched = AscentSchedule::new(&c, eps / 12.0, (l2 * eps).sqrt() / 12.0).unwrap();
        let x = gaussian_vec(&mut rng, n);
        let y0 = Vector::zeros(m);
        let warm = q.grad_y(&x, &y0).norm() / c.mu();
        let info = run_ascent(&q, &x, &y0, &sched, sched.iteration_count(true, warm)).unwrap();
        let cf = q.closed_form().unwrap();
        let dy = (&info.y - cf.y_star(&x)).norm() / sched.a;
        let dg = (cf.grad(&x) - &info.g).norm() / sched.eps1;
        let dh = (cf.hess(&x) - h_dense(&q, &x, &info.y).unwrap()).norm() / sched.eps2;
        ry = ry.max(dy);
        rg = rg.max(dg);
        rh = rh.max(dh);
        if !(dy <= 1.0 && dg <= 1.0 && dh <= 1.0) {
            bad += 1;
        }
    }
    Verdict {
        pass: bad == 0,
        detail: format!("{bad}/20 violations; worst ratios to the bounds y {ry:.2e}, grad {rg:.2e}, hess {rh:.2e}"),
    }
}

fn synthetic_reproduction() -> Verdict {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (i, (x1, y0)) in WToy::reference_starts().iter().enumerate() {
        let tr = hsda_w(1e-3, x1, y0);
        let gap = tr.final_f_gap.unwrap();
        let ok = tr.certified && tr.outer_iterations() <= 100 && gap <= 1e-4 && tr.final_grad_norm <= 1e-2;
        pass &= ok;
        parts.push(format!(
            "init{}: T={} gap {gap:.2e} grad {:.2e}",
            i + 1,
            tr.outer_iterations(),
            tr.final_grad_norm
        ));
    }
    let w = wtoy();
    let (x1, y0) = &WToy::reference_starts()[0];
    let tr = gda_run(&w, &GdaConfig::from_constants(&w.constants()), x1, y0).unwrap();
    let g0 = tr.records[0].f_gap.unwrap();
    let g_end = tr.final_f_gap.unwrap();
    let drop = (g0 - g_end) / g0;
    pass &= tr.outer_iterations() == 200 && drop < 0.10;
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    parts.push(format!("gda drop {:.1}% over {}", 100.0 * drop, tr.outer_iterations()));
    Verdict {
        pass,
        detail: format!("{}, {:.2}s", parts.join("; "), elapsed.as_secs_f64()),
    }
}

fn per_iteration_decrease() -> Verdict {
    let l2 = wtoy().constants().l2();
    let mut steps = 0;
    let mut bad = 0;
    let mut worst = f64::INFINITY;
    for eps in [1e-2f64, 1e-3] {
        let target = (5.0 / 24.0) * eps.powf(1.5) / l2.sqrt();
        let bound = -target + 1e-8;
        for (x1, y0) in WToy::reference_starts() {
            let tr = hsda_w(eps, &x1, &y0);
            let f: Vec<f64> = tr.records.iter().map(|r| r.f_value.unwrap()).collect();
            for d in f.windows(2).map(|w| w[1] - w[0]) {
                steps += 1;
                worst = worst.min(-d / target);
                if d > bound {
                    bad += 1;
                }
            }
        }
    }
    Verdict {
        pass: bad == 0 && steps > 0,
        detail: format!("{bad}/{steps} non-terminal steps above the bound; smallest decrease / guaranteed decrease {worst:.3}"),
    }
}

fn terminal_certification() -> Verdict {
    let c = wtoy().constants();
    let (l1, l2, lh, kappa) = (c.l1(), c.l2(), c.lh(), c.kappa());
    let mut parts = Vec::new();
    let mut pass = true;
    for eps in [1e-2f64, 1e-3] {
        let g_bound = (2f64.sqrt() * l1 / l2 + 17.0 / 6.0) * eps;
        let h_bound = -(2f64.sqrt() * l1 / l2.sqrt() + (13.0 / 6.0) * l2.sqrt() + lh * (1.0 + kappa) / l2.sqrt()) * eps.sqrt();
        for (i, (x1, y0)) in WToy::reference_starts().iter().enumerate() {
            let tr = hsda_w(eps, x1, y0);
            let lam = tr.final_lambda_min.unwrap();
            let ok = tr.certified && tr.final_grad_norm <= g_bound && lam >= h_bound;
            pass &= ok;
            parts.push(format!(
                "eps {eps:.0e} init{}: grad {:.2e}<={g_bound:.2e} lmin {lam:.2e}>={h_bound:.2e}",
                i + 1,
                tr.final_grad_norm
            ));
        }
    }
    Verdict {
        pass,
        detail: parts.join("; "),
    }
}

/// One IHSDA run driven step by step so that each Lanczos call can be
/// checked against the operator it ran on.
struct IhsdaRun {
    trace_len: usize,
    certified: bool,
    max_retries: usize,
    total_retries: usize,
    final_x: Vector,
    b_g: f64,
    total_hvp: usize,
    /// `(iterations, kappa_L bound)` per Lanczos call, when recorded.
    calls: Vec<(usize, usize)>,
}

fn ihsda_manual(oracle: &dyn MinimaxOracle, cfg: &IhsdaConfig, x1: &Vector, y0: &Vector, with_calls: bool) -> IhsdaRun {
    let c = oracle.constants();
    let sched = cfg.schedule(&c).unwrap();
    let b_g = estimate_b_g(oracle, &sched, x1, y0, cfg.seed).unwrap();
    let mut run = IhsdaRun {
        trace_len: 0,
        certified: false,
        max_retries: 0,
        total_retries: 0,
        final_x: x1.clone(),
        b_g,
        total_hvp: 0,
        calls: Vec::new(),
    };
    let mut x = x1.clone();
    let mut y = y0.clone();
    let mut warm = Warm::Initial(oracle.grad_y(x1, y0).norm() / c.mu());
    for t in 1..=cfg.max_outer {
        let out = match ihsda_step(oracle, cfg, &sched, b_g, t, &x, &y, warm) {
            Ok(o) => o,
            Err(_) => break,
        };
        run.trace_len = t;
        run.max_retries = run.max_retries.max(out.record.safeguard_retries);
        run.total_retries += out.record.safeguard_retries;
        run.total_hvp += out.hvp;
        if with_calls {
            let h = h_dense(oracle, &x, &out.y).unwrap();
            let g = oracle.grad_x(&x, &out.y);
            for call in &out.record.lanczos_calls {
                let rep = conditioning_report(&h, &g, call.alpha, 1e-8).unwrap();
                let bound = lanczos_iteration_bound(rep.kappa_l, g.len(), call.e_budget);
                run.calls.push((call.iters, bound));
            }
        }
        warm = Warm::Previous(out.record.step_norm);
        y = out.y;
        x = out.x_next;
        if out.terminal {
            run.certified = true;
            break;
        }
    }
    run.final_x = x;
    run
}

fn ihsda_certification(counts: &mut Vec<(usize, f64)>) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut good = 0;
    let mut certified = 0;
    let mut bound_bad = 0;
    let mut worst = 0.0f64;
    let mut most_retries = 0;
    for i in 0..50u64 {
        let (oracle, eps, x1, y0): (Box<dyn MinimaxOracle>, f64, Vector, Vector) = if i < 25 {
            let q = make_quadratic(QuadraticMinimaxParams::random(10, 5, 100 + i)).unwrap();
            let x1 = gaussian_vec(&mut rng, 10);
            (Box::new(q), 1e-2, x1, Vector::zeros(5))
        } else {
            let x1 = Vector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            (Box::new(wtoy()), 1e-3, x1, Vector::zeros(2))
        };
        let c = oracle.constants();
        let cfg = IhsdaConfig::new(eps, &c).unwrap().with_seed(i);
        let run = ihsda_manual(oracle.as_ref(), &cfg, &x1, &y0, false);
        let cf = oracle.closed_form().unwrap();
        most_retries = most_retries.max(run.total_retries);
        if run.certified {
            certified += 1;
            if run.max_retries <= 1 {
                good += 1;
            }
            let l2 = c.l2();
            let bound = (23.0 / 6.0 + run.b_g / l2 + 2f64.sqrt() / (16.0 * l2)) * eps;
            let gn = cf.grad(&run.final_x).norm();
            worst = worst.max(gn / bound);
            if gn > bound {
                bound_bad += 1;
            }
        }
        let delta_f = cf.value(&x1) - cf.f_inf();
        let k_eps = 1.0 + 6.0 * c.l2().sqrt() * delta_f * eps.powf(-1.5);
        counts.push((run.trace_len, k_eps));
    }
    Verdict {
        pass: good * 100 >= 95 * 50 && bound_bad == 0,
        detail: format!(
            "{good}/50 certified with <=1 retry per step ({certified} certified, at most {most_retries} retries in a run); gradient bound violated in {bound_bad}, worst ratio {worst:.3}"
        ),
    }
}

fn outer_iteration_bounds(ihsda_counts: &[(usize, f64)]) -> Verdict {
    let mut checked = 0;
    let mut bad = 0;
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut hsda_cases: Vec<(Box<dyn MinimaxOracle>, f64, Vector, Vector)> = Vec::new();
    for eps in [1e-2f64, 1e-3] {
        for (x1, y0) in WToy::reference_starts() {
            hsda_cases.push((Box::new(wtoy()), eps, x1, y0));
        }
    }
    for seed in 0..10u64 {
        let q = make_quadratic(QuadraticMinimaxParams::random(10, 5, 200 + seed)).unwrap();
        let x1 = gaussian_vec(&mut rng, 10);
        hsda_cases.push((Box::new(q), 1e-2, x1, Vector::zeros(5)));
    }
    for (oracle, eps, x1, y0) in &hsda_cases {
        let c = oracle.constants();
        let cf = oracle.closed_form().unwrap();
        let cfg = HsdaConfig::new(*eps, &c).unwrap();
        let tr = hsda_run(oracle.as_ref(), &cfg, x1, y0).unwrap();
        let bound = 1.0 + (24.0 * c.l2().sqrt() / 5.0) * (cf.value(x1) - cf.f_inf()) * eps.powf(-1.5);
        checked += 1;
        worst = worst.max(tr.outer_iterations() as f64 / bound);
        if tr.outer_iterations() as f64 > bound {
            bad += 1;
        }
    }
    let mut ihsda_bad = 0;
    let mut ihsda_worst = 0.0f64;
    for &(count, k_eps) in ihsda_counts {
        ihsda_worst = ihsda_worst.max(count as f64 / k_eps);
        if count as f64 > k_eps {
            ihsda_bad += 1;
        }
    }
    Verdict {
        pass: bad == 0 && ihsda_bad == 0 && !ihsda_counts.is_empty(),
        detail: format!(
            "HSDA {bad}/{checked} over bound (max T/bound {worst:.3}); IHSDA {ihsda_bad}/{} over K_eps (max {ihsda_worst:.3})",
            ihsda_counts.len()
        ),
    }
}

fn hvp_scaling() -> Verdict {
    let q = make_quadratic(QuadraticMinimaxParams::random(20, 10, 11)).unwrap();
    let c = q.constants();
    let x1 = gaussian_vec(&mut ChaCha8Rng::seed_from_u64(11), 20);
    let y0 = Vector::zeros(10);
    let mut pts = Vec::new();
    let mut calls = 0;
    let mut over = 0;
    let mut margin = i64::MIN;
    let mut all_certified = true;
    for eps in [3e-2f64, 1e-2, 3e-3] {
        let cfg = IhsdaConfig::new(eps, &c).unwrap().with_seed(11);
        let run = ihsda_manual(&q, &cfg, &x1, &y0, true);
        all_certified &= run.certified;
        pts.push(((1.0 / eps).ln(), (run.total_hvp as f64).ln()));
        for (iters, bound) in run.calls {
            calls += 1;
            margin = margin.max(iters as i64 - bound as i64);
            if iters > bound + 5 {
                over += 1;
            }
        }
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let hvps: Vec<String> = pts.iter().map(|p| format!("{:.0}", p.1.exp())).collect();
    Verdict {
        pass: all_certified && slope <= 2.05 && over == 0,
        detail: format!(
            "slope {slope:.3} (hvp {}); {over}/{calls} Lanczos calls over bound + 5, max iters - bound {margin}",
            hvps.join("/")
        ),
    }
}

fn conditioning_diagnostic() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut bad = 0;
    let mut worst = 0.0f64;
    let mut min_newton = f64::INFINITY;
    for _ in 0..100 {
        let n = rng.random_range(2..=30);
        let mut spec = Vector::from_fn(n, |_, _| rng.random_range(0.0..10.0));
        spec[0] = 0.0;
        let qm = orthogonal(&mut rng, n);
        let h = &qm * Matrix::from_diagonal(&spec) * qm.transpose();
        let h = (&h + h.transpose()) * 0.5;
        let g = gaussian_vec(&mut rng, n);
        let alpha = rng.random_range(1e-3..1e-1);
        let rep = conditioning_report(&h, &g, alpha, 1e-8).unwrap();
        let h_min = sorted_symmetric_eigen(&h).unwrap().0[0];
        debug_assert!(h_min.abs() < 1e-10);
        worst = worst.max(rep.kappa_l / rep.kappa_l_bound);
        min_newton = min_newton.min(rep.kappa_newton);
        let ok = rep.kappa_l.is_finite() && rep.kappa_l <= rep.kappa_l_bound * (1.0 + 1e-6) && rep.kappa_newton > 1e6;
        if !ok {
            bad += 1;
        }
    }
    Verdict {
        pass: bad == 0,
        detail: format!("{bad}/100 violations; max kappa_L/bound {worst:.4}, min kappa_newton {min_newton:.2e}"),
    }
}

fn main() -> ExitCode {
    let mut ihsda_counts = Vec::new();
    let mut results: Vec<(&str, Verdict)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        let v = f();
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((name, v));
    };
    run("optimality suite", &mut optimality_suite);
    run("lanczos vs dense", &mut lanczos_vs_dense);
    run("inner-ascent accuracy", &mut inner_ascent_accuracy);
    run("synthetic reproduction", &mut synthetic_reproduction);
    run("per-iteration decrease", &mut per_iteration_decrease);
    run("terminal certification", &mut terminal_certification);
    run("ihsda certification", &mut || ihsda_certification(&mut ihsda_counts));
    run("outer-iteration bounds", &mut || outer_iteration_bounds(&ihsda_counts));
    run("hvp scaling", &mut hvp_scaling);
    run("conditioning diagnostic", &mut conditioning_diagnostic);
    let failed = results.iter().filter(|(_, v)| !v.pass).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
