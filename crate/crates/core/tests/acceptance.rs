//! Acceptance checks, one PASS/FAIL line each. Runs the full benchmarks, so
//! it takes several minutes in an optimised build. The exit code is non-zero
//! on a failed check only when `MARS_ACCEPTANCE_STRICT` is set.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use mars_core::geometry::Point2;
use mars_core::io::{run_benchmark, BenchmarkSummary, FieldName, RunConfig};
use mars_core::ltr::{delaunay_triangulation, estimate_points, ltr_run, LtrConfig, PlanarPolygon};
use mars_core::mesh::validate;
use mars_core::vrem::{vrem_iterate, vrem_run, LineSearchParams, RestLengthRule, SpringSystem, VremConfig};
use mars_core::{Point3, RegularityParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{circle_violation, patch, pathological_patch, rotation_error, smooth_jitter};

type Outcome = Result<String, String>;

fn benchmark(field: FieldName, rule: &str, h: &str, out: &Path) -> Result<BenchmarkSummary, String> {
    let mut cfg = RunConfig::benchmark(field);
    cfg.set("h", h).map_err(|e| e.to_string())?;
    cfg.set("hL_rule", rule).map_err(|e| e.to_string())?;
    cfg.out = out.to_path_buf();
    let start = Instant::now();
    let s = run_benchmark(&cfg).map_err(|e| format!("{} {rule} h={h}: {e}", field.label()))?;
    eprintln!("  {} {rule} h={h}: {:.0} s", field.label(), start.elapsed().as_secs_f64());
    Ok(s)
}

fn in_band(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn regularity(vs: &Result<BenchmarkSummary, String>) -> Outcome {
    let s = vs.as_ref().map_err(Clone::clone)?;
    let l = s.levels.iter().find(|l| l.h == 1.0 / 32.0).ok_or("no h=1/32 level")?;
    let bad: Vec<usize> = l.reports.iter().filter(|r| r.violations_after > 0).map(|r| r.step).collect();
    let min_angle = l.reports.iter().map(|r| r.min_angle).fold(f64::INFINITY, f64::min);
    let min_edge = l.reports.iter().map(|r| r.min_edge / l.h_l).fold(f64::INFINITY, f64::min);
    let max_edge = l.reports.iter().map(|r| r.max_edge / l.h_l).fold(0.0, f64::max);
    let detail = format!(
        "{} steps, min angle {:.4} (theta {:.4}), edges in [{:.3}, {:.3}] h_L",
        l.reports.len(),
        min_angle,
        PI / 10.0,
        min_edge,
        max_edge
    );
    if bad.is_empty() && min_angle >= PI / 10.0 && min_edge >= 0.1 && max_edge <= 1.0 {
        Ok(detail)
    } else {
        Err(format!("{detail}; violations after steps {bad:?}"))
    }
}

fn order(s: &Result<BenchmarkSummary, String>, lo: f64, hi: f64) -> Outcome {
    let s = s.as_ref().map_err(Clone::clone)?;
    let o = s.orders.first().ok_or("no order computed")?;
    let p = o.order.ok_or("finer error vanished")?;
    let detail = format!("E1 {:.3e} -> {:.3e}, order {p:.3} (band [{lo}, {hi}])", o.e1_coarse, o.e1_fine);
    if in_band(p, lo, hi) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Decided on the vortical shear run; the deformation order is reported alongside.
fn third_order(vs: &Result<BenchmarkSummary, String>, deformation: &Result<BenchmarkSummary, String>) -> Outcome {
    let other = match order(deformation, 2.5, 3.5) {
        Ok(d) | Err(d) => d,
    };
    match order(vs, 2.5, 3.5) {
        Ok(d) => Ok(format!("{d}; deformation: {other}")),
        Err(d) => Err(format!("{d}; deformation: {other}")),
    }
}

fn topology(runs: &[(&str, &Result<BenchmarkSummary, String>)]) -> Outcome {
    let mut steps = 0;
    for (name, r) in runs {
        let s = r.as_ref().map_err(Clone::clone)?;
        for l in &s.levels {
            if let Some(bad) = l.reports.iter().find(|r| r.euler != 2) {
                return Err(format!("{name} h={}: euler {} at step {}", l.h, bad.euler, bad.step));
            }
            steps += l.reports.len();
        }
    }
    Ok(format!("euler 2 (genus 0) over {steps} steps of {} runs", runs.len()))
}

fn cost_shares(vs: &Result<BenchmarkSummary, String>) -> Outcome {
    let s = vs.as_ref().map_err(Clone::clone)?;
    let l = s.levels.iter().find(|l| l.h == 1.0 / 32.0).ok_or("no h=1/32 level")?;
    let c = l.ledger.count_shares();
    let th = l.ledger.theta_shares();
    let detail = format!(
        "EMA {:.1}%, VREM {:.1}%, LTR {:.1}% by count (angle repairs only: {:.1}/{:.1}/{:.1})",
        c.ema, c.vrem, c.ltr, th.ema, th.vrem, th.ltr
    );
    if c.ema >= 75.0 && c.ltr <= 10.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn vrem_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_fd: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(4..8);
        let (a, b) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let jit: Vec<(f64, f64)> =
            (0..49).map(|_| (rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))).collect();
        let m = patch(n, a, b, &jit);
        let sys = SpringSystem::with_rest_length(&m, rng.random_range(0.05..0.4));
        let g = sys.energy_gradient(&m).map_err(|e| e.to_string())?;
        let eps = 1e-6;
        let mut diff = 0.0;
        let mut idx = 0;
        for &v in &sys.free {
            for axis in 0..3 {
                let shifted = |s: f64| {
                    sys.energy_with(|w| {
                        let mut q = *m.position(w);
                        if w == v {
                            q[axis] += s;
                        }
                        q
                    })
                };
                let fd = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
                diff += (g[idx] - fd).powi(2);
                idx += 1;
            }
        }
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        worst_fd = worst_fd.max(diff.sqrt() / norm);

        let mut m = patch(n, a, b, &jit);
        let sys = SpringSystem::new(&m, RestLengthRule::InteriorEdges).map_err(|e| e.to_string())?;
        let hist = vrem_iterate(&mut m, &sys, &LineSearchParams::default(), 60).map_err(|e| e.to_string())?;
        let mut last = f64::INFINITY;
        for st in &hist {
            if st.energy > st.energy_before || st.energy_before > last {
                return Err(format!("energy rose from {} to {}", st.energy_before, st.energy));
            }
            last = st.energy;
        }
    }
    if worst_fd > 1e-6 {
        return Err(format!("gradient differs from central differences by {worst_fd:.2e}"));
    }

    let mut m = patch(7, 0.0, 0.0, &smooth_jitter());
    let sys = SpringSystem::new(&m, RestLengthRule::InteriorEdges).map_err(|e| e.to_string())?;
    let g0 = sys.energy_gradient(&m).map_err(|e| e.to_string())?.iter().map(|x| x * x).sum::<f64>().sqrt();
    let hist = vrem_iterate(&mut m, &sys, &LineSearchParams::default(), 500).map_err(|e| e.to_string())?;
    let g = sys.energy_gradient(&m).map_err(|e| e.to_string())?.iter().map(|x| x * x).sum::<f64>().sqrt();
    let detail = format!(
        "FD rel. error {worst_fd:.1e} on 50 patches, U monotone, |grad U| ratio {:.1e} after {} iterations",
        g / g0,
        hist.len()
    );
    if g < 1e-8 * g0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn regular_polygon(n: usize) -> PlanarPolygon {
    PlanarPolygon::from_points(
        (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                Point2::new(a.cos(), a.sin())
            })
            .collect(),
    )
}

fn ltr_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sets = 0;
    for size in [3, 4, 10, 50, 100, 300, 1000] {
        for _ in 0..4 {
            let pts: Vec<Point2> = (0..size).map(|_| Point2::new(rng.random(), rng.random())).collect();
            let tris = delaunay_triangulation(&pts).map_err(|e| e.to_string())?;
            if let Some((t, p)) = circle_violation(&pts, &tris) {
                return Err(format!("{size} points: point {p} inside circumcircle of {:?}", tris[t]));
            }
            sets += 1;
        }
    }
    // cocircular ties
    let grid: Vec<Point2> = (0..100).map(|k| Point2::new((k % 10) as f64, (k / 10) as f64)).collect();
    let tris = delaunay_triangulation(&grid).map_err(|e| e.to_string())?;
    if circle_violation(&grid, &tris).is_some() || tris.len() != 162 {
        return Err("lattice triangulation is not Delaunay".into());
    }

    let hex = estimate_points(&regular_polygon(6), 1.0);
    let tri = PlanarPolygon::from_points(vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(0.5, 0.75f64.sqrt()),
    ]);
    let tri = estimate_points(&tri, 1.0);
    if (hex, tri) != (1, 0) {
        return Err(format!("m*_est hexagon {hex}, triangle {tri}"));
    }

    let params = RegularityParams::new(0.1, 1.2, PI / 10.0).map_err(|e| e.to_string())?;
    let cfg = LtrConfig::default();
    if (cfg.mu, cfg.nu, cfg.eta) != (4, 10, 3) {
        return Err(format!("unexpected defaults {:?}", (cfg.mu, cfg.nu, cfg.eta)));
    }
    let mut m = pathological_patch();
    let bad = m.triangle_ids().find(|&t| m.triangle_violates(t, &params)).ok_or("patch is already regular")?;
    let vrem_ok = vrem_run(&mut m, bad, &params, &VremConfig::default()).success;
    let seeds = 20;
    for seed in 0..seeds {
        let mut m = pathological_patch();
        let out = ltr_run(&mut m, bad, &params, &cfg, seed);
        if !out.success || !m.is_regular(&params) || !validate(&m).is_empty() {
            return Err(format!("pathological patch not resolved for seed {seed}"));
        }
    }
    Ok(format!(
        "{sets} random sets up to 1000 points empty-circle, m*_est 1/0, pathological patch resolved for {seeds} seeds (VREM alone: {})",
        if vrem_ok { "resolved" } else { "failed" }
    ))
}

fn rk4_order() -> Outcome {
    let x0 = Point3::new(0.35, 0.2, 0.6);
    let errs: Vec<f64> = [32, 64, 128].iter().map(|&n| rotation_error(x0, n)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let detail = format!(
        "orders {:?} for 32/64/128 steps per turn",
        orders.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>()
    );
    if orders.iter().all(|&p| in_band(p, 3.8, 4.2)) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn csv_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for e in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let p = e.map_err(|e| e.to_string())?.path();
        if p.extension().is_some_and(|x| x == "csv") {
            let bytes = fs::read(&p).map_err(|e| e.to_string())?;
            files.push((p.file_name().unwrap().to_string_lossy().into_owned(), bytes));
        }
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let mut compared = 0;
    for field in [FieldName::VorticalShear, FieldName::Deformation] {
        let mut outs = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let mut cfg = RunConfig::benchmark(field);
            cfg.set("h", "1/16,1/32").map_err(|e| e.to_string())?;
            cfg.set("t_end", "0.5").map_err(|e| e.to_string())?;
            cfg.set("seed", "17").map_err(|e| e.to_string())?;
            cfg.out = dir.path().to_path_buf();
            run_benchmark(&cfg).map_err(|e| e.to_string())?;
            outs.push(csv_files(dir.path())?);
        }
        if outs[0] != outs[1] {
            return Err(format!("{} CSVs differ between runs", field.label()));
        }
        compared += outs[0].len();
    }
    Ok(format!("{compared} CSV files byte-identical across two runs"))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let sub = |name: &str| {
        let p = dir.path().join(name);
        fs::create_dir_all(&p).expect("output directory");
        p
    };
    eprintln!("running benchmarks");
    let vs_linear = benchmark(FieldName::VorticalShear, "0.5h", "1/32,1/64", &sub("vs_linear"));
    let vs_power = benchmark(FieldName::VorticalShear, "6h^1.5", "1/32,1/64", &sub("vs_power"));
    let deformation = benchmark(FieldName::Deformation, "6h^1.5", "1/32,1/64", &sub("deformation"));

    let checks: Vec<(&str, Outcome)> = vec![
        ("regularity at every step, vortical shear h=1/32 h_L=0.5h", regularity(&vs_linear)),
        ("second-order E1 convergence, h_L=0.5h", order(&vs_linear, 1.6, 2.4)),
        ("third-order E1 convergence, h_L=6h^1.5", third_order(&vs_power, &deformation)),
        (
            "topology conserved, both benchmarks",
            topology(&[
                ("vortical shear 0.5h", &vs_linear),
                ("vortical shear 6h^1.5", &vs_power),
                ("deformation 6h^1.5", &deformation),
            ]),
        ),
        ("VREM property suite", vrem_suite()),
        ("LTR property suite", ltr_suite()),
        ("cascade cost shares, vortical shear h=1/32", cost_shares(&vs_linear)),
        ("RK4 rotation order", rk4_order()),
        ("determinism of CSV outputs", determinism()),
    ];
    let mut failed = 0;
    for (name, outcome) in &checks {
        match outcome {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    // failures are reported above; set MARS_ACCEPTANCE_STRICT to turn them into a failing exit code
    if failed > 0 && std::env::var_os("MARS_ACCEPTANCE_STRICT").is_some() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
