//! Acceptance criteria 1–10. Each criterion prints one PASS/FAIL line; the
//! process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use arch_deconv::dependence::arch_inf_delta_for;
use arch_deconv::harness::{run_experiment, ExperimentConfig, ReferenceDensity, RiskReport, SpatialGrid};
use arch_deconv::processes::{rng_from_seed, simulate, ArchInfCoeffs, InnovationLaw, ProcessSpec};
use arch_deconv::projection::{project_true_density, reconstruct, GaussianDensity, ModelIndex, Spectral};
use arch_deconv::quadrature::QuadratureConfig;
use arch_deconv::rates::{implicit_log_lhs, oracle_m_theoretical, RateForm, SmoothnessSpec};
use arch_deconv::selection::{delta, delta_half, envelope_report, gamma_fn, lambda1};
use arch_deconv::{estimate_coefficients, NoiseModel, Sample};
use rand_distr::{Distribution, StandardNormal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn model_grid() -> Vec<f64> {
    (1..=16).map(|k| 0.25 * k as f64).collect()
}

fn builtin_families() -> Vec<NoiseModel> {
    vec![
        NoiseModel::log_chi_squared(),
        NoiseModel::laplace(1.0).unwrap(),
        NoiseModel::gaussian(1.0).unwrap(),
    ]
}

fn criterion_1() -> Outcome {
    let nm = NoiseModel::laplace(1.0).unwrap();
    let mut worst = 0.0f64;
    for m in model_grid() {
        let u = PI * m;
        let exact = (u + 2.0 * u.powi(3) / 3.0 + u.powi(5) / 5.0) / PI;
        let rel = (delta(&nm, m).unwrap() - exact).abs() / exact;
        worst = worst.max(rel);
    }
    outcome(worst <= 1e-8, format!("max relative error {worst:.3e}"))
}

fn criterion_2() -> Outcome {
    let grid = model_grid();
    let mut lines = Vec::new();
    let mut pass = true;
    for nm in builtin_families() {
        let mut half_ok = true;
        for &m in &grid {
            let d = delta(&nm, m).unwrap();
            let dh = delta_half(&nm, m).unwrap();
            half_ok &= dh <= (m * d).sqrt();
        }
        let report = envelope_report(&nm, &grid).unwrap();
        let upper_ok = match report.m1 {
            Some(m1) => grid.iter().filter(|&&m| m >= m1).all(|&m| {
                delta(&nm, m).unwrap() <= 2.0 * lambda1(&nm) * gamma_fn(&nm, m).unwrap()
            }),
            None => false,
        };
        pass &= half_ok && upper_ok;
        lines.push(format!("{}: half {half_ok}, upper {upper_ok} from m1 = {:?}", nm.label(), report.m1));
    }
    outcome(pass, lines.join("; "))
}

fn criterion_3() -> Outcome {
    let nm = NoiseModel::laplace(1.0).unwrap();
    let (n, reps) = (500, 500);
    let index = ModelIndex::new(1.0, 3).unwrap();
    let truth = project_true_density(&GaussianDensity::standard(), index, &QuadratureConfig::default()).unwrap();
    let js = [-3i64, -1, 0, 1, 3];
    let mut draws = vec![Vec::with_capacity(reps); js.len()];
    for r in 0..reps {
        let mut rng = rng_from_seed(0xC0FF_EE00 + r as u64);
        let z: Vec<f64> = (0..n)
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                x + nm.sample(&mut rng).unwrap()
            })
            .collect();
        let cv = estimate_coefficients(&Sample::new(z).unwrap(), &index, &nm).unwrap();
        for (slot, &j) in draws.iter_mut().zip(&js) {
            slot.push(cv.get(j));
        }
    }
    let mut pass = true;
    let mut worst = 0.0f64;
    for (col, &j) in draws.iter().zip(&js) {
        let mean = col.iter().sum::<f64>() / reps as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        let z = (mean - truth.get(j)).abs() / se;
        worst = worst.max(z);
        pass &= z <= 4.0;
    }
    outcome(pass, format!("max |bias|/SE = {worst:.3}"))
}

/// `g(x) = (3w/2π)(sin(wx)/(wx))⁴`, whose transform is a cubic B-spline on `[−4w, 4w]`.
#[derive(Clone, Copy)]
struct SincFourth {
    w: f64,
}

impl SincFourth {
    // density of a sum of four U(−1, 1)
    fn spline(t: f64) -> f64 {
        let s = (t.abs().min(4.0) + 4.0) / 2.0;
        let mut v = 0.0;
        let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
        for (k, &b) in binom.iter().enumerate() {
            let d = s - k as f64;
            if d > 0.0 {
                v += if k % 2 == 0 { b } else { -b } * d.powi(3);
            }
        }
        if t.abs() >= 4.0 {
            0.0
        } else {
            v / 12.0
        }
    }
}

impl Spectral for SincFourth {
    fn fourier(&self, x: f64) -> num_complex::Complex64 {
        num_complex::Complex64::new(Self::spline(x / self.w) / Self::spline(0.0), 0.0)
    }

    fn value(&self, x: f64) -> f64 {
        let u = self.w * x;
        let s = if u == 0.0 { 1.0 } else { u.sin() / u };
        3.0 * self.w / (2.0 * PI) * s.powi(4)
    }
}

fn criterion_4() -> Outcome {
    let g = SincFourth { w: PI / 4.0 };
    let index = ModelIndex::new(1.0, 400).unwrap();
    let cv = project_true_density(&g, index, &QuadratureConfig::default()).unwrap();
    let grid = SpatialGrid::new(-50.0, 50.0, 0.01).unwrap();
    let reference = ReferenceDensity::from_fn(|x| g.value(x), grid).unwrap();
    let fitted = reconstruct(&cv, &grid.points());
    let v = arch_deconv::harness::ise_values(&fitted, &reference).value;
    outcome(v < 1e-10, format!("ISE = {v:.3e}"))
}

fn laplace_report() -> &'static RiskReport {
    static REPORT: OnceLock<RiskReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let cfg = ExperimentConfig::gaussian(0.0, 1.0, NoiseModel::laplace(1.0).unwrap(), vec![250, 1000, 4000], 100, 20_241_014);
        run_experiment(&cfg).unwrap()
    })
}

fn histogram_text(report: &RiskReport, idx: usize) -> String {
    let s = &report.sizes[idx];
    s.histogram
        .iter()
        .filter(|h| h.1 > 0)
        .map(|(m, c)| format!("{m}:{c}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn criterion_5() -> Outcome {
    let report = laplace_report();
    let mise: Vec<f64> = report.sizes.iter().map(|s| s.adaptive_mean_ise).collect();
    let decreasing = mise.windows(2).all(|w| w[1] < w[0]);
    let halved = mise[2] < 0.5 * mise[0];
    let hist: Vec<String> = (0..3).map(|i| format!("n={} [{}]", report.sizes[i].n, histogram_text(report, i))).collect();
    outcome(
        decreasing && halved,
        format!(
            "MISE {:.4e}, {:.4e}, {:.4e}; decreasing {decreasing}, MISE(4000)/MISE(250) = {:.3}; m̂ {}",
            mise[0],
            mise[1],
            mise[2],
            mise[2] / mise[0],
            hist.join(", ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let lap = laplace_report();
    let i = lap.sizes.iter().position(|s| s.n == 1000).unwrap();
    let cfg = ExperimentConfig::gaussian(0.0, 1.0, NoiseModel::log_chi_squared(), vec![1000], 100, 20_241_015);
    let lc = run_experiment(&cfg).unwrap();
    let mut pass = true;
    let mut lines = Vec::new();
    for (rep, idx) in [(lap, i), (&lc, 0)] {
        let s = &rep.sizes[idx];
        let median_ok = s.adaptive_median_ise <= 5.0 * s.oracle_median_ise;
        let mean_ok = s.adaptive_mean_ise <= 9.0 * s.oracle_mean_ise + 20.0 / s.n as f64;
        pass &= median_ok && mean_ok;
        lines.push(format!(
            "{}: median {:.4e} vs oracle {:.4e} (m̆ = {}) {median_ok}; mean {:.4e} vs bound {:.4e} {mean_ok}; m̂ [{}]",
            rep.noise,
            s.adaptive_median_ise,
            s.oracle_median_ise,
            s.oracle_m,
            s.adaptive_mean_ise,
            9.0 * s.oracle_mean_ise + 20.0 / s.n as f64,
            histogram_text(rep, idx)
        ));
    }
    outcome(pass, lines.join("; "))
}

fn criterion_7() -> Outcome {
    let spec: ProcessSpec = "garch:0.1,0.3,0.6".parse().unwrap();
    let n = 200_000;
    let path = simulate(&spec, InnovationLaw::StandardNormal, n, 10_000, 7).unwrap();
    let s2: Vec<f64> = path.sigma.iter().map(|s| s * s).collect();
    let mean = s2.iter().sum::<f64>() / n as f64;
    // batch means for the serially dependent σ²
    let batches = 100;
    let len = n / batches;
    let bm: Vec<f64> = s2.chunks(len).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let var = bm.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    let se = (var / batches as f64).sqrt();
    let target = 0.1 / (1.0 - 0.3 - 0.6);
    let z = (mean - target).abs() / se;
    outcome(z <= 3.0, format!("mean σ² = {mean:.5}, target {target:.5}, SE {se:.5}, |z| = {z:.3}"))
}

fn criterion_8() -> Outcome {
    let c = 0.4;
    let finite = ArchInfCoeffs::Finite(vec![c]);
    let mut worst = 0.0f64;
    for n in [1usize, 2, 5, 10, 50, 200] {
        let d = arch_inf_delta_for(&finite, n).unwrap();
        let expect = n as f64 * c.ln();
        worst = worst.max((d.ln() - expect).abs() / expect.abs());
    }
    let finite_ok = worst < 1e-12;

    let geo = ArchInfCoeffs::Geometric { c: 0.5, b: 0.6 };
    let ns: Vec<usize> = (0..=20).map(|k| (100.0 * 10f64.powf(k as f64 / 10.0)).round() as usize).collect();
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).sqrt()).collect();
    let ys: Vec<f64> = ns.iter().map(|&n| arch_inf_delta_for(&geo, n).unwrap().ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    outcome(
        finite_ok && r2 > 0.99,
        format!("finite-lag max relative error {worst:.2e}; geometric R² = {r2:.5}"),
    )
}

fn criterion_9() -> Outcome {
    let lap = NoiseModel::laplace(1.0).unwrap();
    let lc = NoiseModel::log_chi_squared();
    let spec = |s, r, b| SmoothnessSpec::new(s, r, b, 2.0 * PI, 1.0).unwrap();
    let ln_n = 1e4f64.ln();
    let mut notes = Vec::new();
    let mut pass = true;

    let o = oracle_m_theoretical(&spec(2.0, 0.0, 0.0), &lap, 10_000).unwrap();
    let ok = (o.pi_m() - 1e4f64.powf(1.0 / 9.0)).abs() < 1e-10 && o.form == RateForm::Power { exponent: -4.0 / 9.0 };
    pass &= ok;
    notes.push(format!("ordinary/sobolev πm̆ = {:.4}", o.pi_m()));

    let o = oracle_m_theoretical(&spec(1.0, 0.0, 0.0), &lc, 10_000).unwrap();
    let ok = (o.pi_m() - ln_n / (PI + 1.0)).abs() < 1e-10 && (o.rate - ln_n.powi(-2)).abs() < 1e-12;
    pass &= ok;
    notes.push(format!("supersmooth/sobolev πm̆ = {:.4}", o.pi_m()));

    let o = oracle_m_theoretical(&spec(0.0, 1.0, 0.5), &lap, 10_000).unwrap();
    let ok = (o.pi_m() - ln_n).abs() < 1e-10 && (o.rate - ln_n.powi(5) / 1e4).abs() < 1e-12;
    pass &= ok;
    notes.push(format!("ordinary/analytic πm̆ = {:.4}", o.pi_m()));

    let sp = spec(1.0, 1.0, 0.5);
    let o = oracle_m_theoretical(&sp, &lc, 10_000).unwrap();
    let residual = (implicit_log_lhs(&sp, &lc, o.m_breve).exp() / 1e4 - 1.0).abs();
    pass &= residual < 1e-6;
    notes.push(format!("implicit residual {residual:.2e}"));
    outcome(pass, notes.join("; "))
}

fn criterion_10() -> Outcome {
    let cfg = ExperimentConfig::gaussian(0.0, 1.0, NoiseModel::laplace(1.0).unwrap(), vec![250, 1000], 20, 99);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        run_experiment(&cfg).unwrap().write_csv(d.path()).unwrap();
    }
    let mut same = true;
    for name in ["report.csv", "selection.csv", "summary.csv"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        same &= a == b && !a.is_empty();
    }
    outcome(same, "report.csv, selection.csv, summary.csv compared byte for byte")
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome, Duration); 10] = [
        (1, criterion_1, Duration::from_secs(1)),
        (2, criterion_2, Duration::from_secs(5)),
        (3, criterion_3, Duration::from_secs(60)),
        (4, criterion_4, Duration::from_secs(1)),
        (5, criterion_5, Duration::from_secs(600)),
        (6, criterion_6, Duration::from_secs(600)),
        (7, criterion_7, Duration::from_secs(30)),
        (8, criterion_8, Duration::from_secs(5)),
        (9, criterion_9, Duration::from_secs(1)),
        (10, criterion_10, Duration::from_secs(600)),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, f, budget) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let res = f();
        let took = start.elapsed();
        let in_time = took <= budget;
        let pass = res.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id}: {} ({:.2} s of {} s) {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
            res.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
