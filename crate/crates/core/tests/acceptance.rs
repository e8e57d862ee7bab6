//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wignerwalk::cli::main_with_args;
use wignerwalk::io::read_grid_csv;
use wignerwalk::model::realize;
use wignerwalk::wigner::wigner_at;
use wignerwalk::*;
use std::result::Result;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ring(n: usize) -> RingSize {
    RingSize::new(n).unwrap()
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let argv = std::iter::once("wignerwalk").chain(args.iter().copied());
    match main_with_args(argv) {
        0 => Ok(()),
        code => Err(format!("`{}` exited with {code}", args.join(" "))),
    }
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let mut csvs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    csvs.sort();
    Ok(csvs)
}

fn only_csv(dir: &Path) -> Result<PathBuf, String> {
    let csvs = csv_files(dir)?;
    match csvs.as_slice() {
        [one] => Ok(one.clone()),
        _ => Err(format!("expected one CSV in {}, found {}", dir.display(), csvs.len())),
    }
}

fn ensemble_longtime_grid(n: usize, kind: DisorderKind, delta: f64, r: usize) -> PhaseSpaceGrid {
    let spec = EnsembleSpec::new(ring(n), n / 2, kind, delta, r, 0);
    ensemble_longtime(&spec).unwrap().longtime().unwrap().clone()
}

fn bloch_equivalence() -> Verdict {
    let mut worst = 0.0f64;
    for n in [4, 5, 20, 21, 100, 101] {
        let es = eigendecompose(&build_h0(ring(n)), None).map_err(|e| e.to_string())?;
        for t in [0.0, 1.0, 10.0, 40.0] {
            let got = wigner_at(&es, n / 2, t).map_err(|e| e.to_string())?;
            let want = wigner_bloch(ring(n), n / 2, t).map_err(|e| e.to_string())?;
            worst = worst.max(got.max_abs_diff(&want));
        }
    }
    check(worst <= 1e-9, format!("max deviation {worst:.2e} (tol 1e-9)"))
}

fn limiting_grid_from_cli(n: usize) -> Result<PhaseSpaceGrid, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let n_arg = n.to_string();
    let out = dir.path().to_str().unwrap();
    run_cli(&["longtime", "--delta", "0", "--n", &n_arg, "--out", out, "--no-image", "--quiet"])?;
    read_grid_csv(&only_csv(dir.path())?).map_err(|e| e.to_string())
}

fn odd_limit() -> Verdict {
    let n = 101;
    let j = n / 2;
    let g = limiting_grid_from_cli(n)?;
    let nf = n as f64;
    let mut worst = 0.0f64;
    for x in 0..n {
        for k in 0..n {
            let want = if k != 0 {
                1.0 / (nf * nf)
            } else if x == j {
                1.0 / nf
            } else {
                0.0
            };
            worst = worst.max((g.get(x, k) - want).abs());
        }
    }
    let marginal = marginal_position(&g)[j];
    let marginal_dev = (marginal - 201.0 / 10201.0).abs();
    check(
        worst <= 1e-9 && marginal_dev <= 1e-12,
        format!("grid deviation {worst:.2e} (tol 1e-9), marginal deviation {marginal_dev:.2e} (tol 1e-12)"),
    )
}

fn even_limit() -> Verdict {
    let n = 100;
    let j = n / 2;
    let g = limiting_grid_from_cli(n)?;
    let nf = n as f64;
    let mut worst = 0.0f64;
    for x in 0..n {
        for k in 0..n {
            let want = if k == 0 {
                if x == j || x == (j + n / 2) % n {
                    1.0 / nf
                } else {
                    0.0
                }
            } else if k % 2 == 0 {
                2.0 / (nf * nf)
            } else {
                0.0
            };
            worst = worst.max((g.get(x, k) - want).abs());
        }
    }
    check(worst <= 1e-9, format!("grid deviation {worst:.2e} (tol 1e-9)"))
}

fn t0_signature() -> Verdict {
    let mut worst = 0.0f64;
    let mut worst_sum = 0.0f64;
    for n in [5, 20, 21, 100, 101] {
        let j = n / 2;
        let nf = n as f64;
        let h = realize(ring(n), DisorderKind::Dod, 0.5, 3, false).map_err(|e| e.to_string())?;
        let es = eigendecompose(&h, None).map_err(|e| e.to_string())?;
        let g = wigner_at(&es, j, 0.0).map_err(|e| e.to_string())?;
        for k in 0..n {
            worst = worst.max((g.get(j, k) - 1.0 / nf).abs());
        }
        if n % 2 == 0 {
            let xo = (j + n / 2) % n;
            for k in 0..n {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                worst = worst.max((g.get(xo, k) - sign / nf).abs());
            }
            worst_sum = worst_sum.max(g.row(xo).iter().sum::<f64>().abs());
        }
    }
    check(
        worst <= 1e-12 && worst_sum <= 1e-12,
        format!("max deviation {worst:.2e}, antipodal marginal {worst_sum:.2e} (tol 1e-12)"),
    )
}

fn marginal_chain() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let kinds = [
        DisorderKind::None,
        DisorderKind::Dd,
        DisorderKind::Dod,
        DisorderKind::ConstrainedDod,
    ];
    let (mut worst_marginal, mut worst_total) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let n = rng.random_range(3..=80);
        let kind = kinds[rng.random_range(0..kinds.len())];
        let delta = rng.random_range(0.0..=0.5);
        let seed = rng.random::<u64>();
        let t = rng.random_range(0.0..100.0);
        let j = rng.random_range(0..n);
        let h = realize(ring(n), kind, delta, seed, false).map_err(|e| e.to_string())?;
        let es = eigendecompose(&h, None).map_err(|e| e.to_string())?;
        let g = wigner_at(&es, j, t).map_err(|e| e.to_string())?;
        let p = transition_probability(&propagate(&es, j, t).map_err(|e| e.to_string())?);
        for (m, q) in marginal_position(&g).iter().zip(&p) {
            worst_marginal = worst_marginal.max((m - q).abs());
        }
        worst_total = worst_total.max((g.total() - 1.0).abs());
    }
    check(
        worst_marginal <= 1e-10 && worst_total <= 1e-9,
        format!("marginal deviation {worst_marginal:.2e} (tol 1e-10), total deviation {worst_total:.2e} (tol 1e-9)"),
    )
}

fn interchange() -> Verdict {
    let spec = EnsembleSpec::new(ring(21), 10, DisorderKind::Dd, 0.25, 20, 0);
    let report = verify_interchange(&spec, 100.0, 200).map_err(|e| e.to_string())?;
    check(report.max_dev <= 1e-12, format!("max_dev {:.2e} (tol 1e-12)", report.max_dev))
}

fn localization_trend() -> Verdict {
    let n = 101;
    let j = n / 2;
    let mut peaks = Vec::new();
    let mut background = 0.0;
    for delta in [1.0 / 40.0, 1.0 / 10.0, 1.0 / 4.0, 1.0 / 2.0] {
        let m = marginal_position(&ensemble_longtime_grid(n, DisorderKind::Dod, delta, 200));
        peaks.push(m[j]);
        if peaks.len() == 1 {
            background = median((0..n).filter(|&x| x != j).map(|x| m[x]).collect());
        }
    }
    let increasing = peaks.windows(2).all(|w| w[0] < w[1]);
    let ratio = peaks[3] / background;
    check(
        increasing && ratio > 10.0,
        format!(
            "peaks {:.4} < {:.4} < {:.4} < {:.4}: {increasing}; strong peak / weak background {ratio:.1} (need > 10)",
            peaks[0], peaks[1], peaks[2], peaks[3]
        ),
    )
}

fn even_peak_suppression() -> Verdict {
    let n = 100;
    let j = n / 2;
    let far = (j + n / 2) % n;
    let clean = marginal_position(&ensemble_longtime_grid(n, DisorderKind::Dod, 0.0, 1));
    let clean_dev = (clean[far] - clean[j]).abs();
    let m = marginal_position(&ensemble_longtime_grid(n, DisorderKind::Dod, 0.5, 200));
    let level = median((0..n).filter(|&x| x != j && x != far).map(|x| m[x]).collect());
    let ratio = m[far] / level;
    check(
        ratio < 1.2 && clean_dev <= 1e-12,
        format!("antipodal / median off-peak {ratio:.3} (need < 1.2); clean-ring peak mismatch {clean_dev:.2e}"),
    )
}

fn stripe_destruction() -> Verdict {
    let n = 100;
    let parity_mass = |g: &PhaseSpaceGrid| {
        let mut mass = [0.0f64; 2];
        for x in 0..n {
            for k in 1..n {
                mass[k % 2] += g.get(x, k).abs();
            }
        }
        mass
    };
    let [even0, odd0] = parity_mass(&ensemble_longtime_grid(n, DisorderKind::Dod, 0.0, 1));
    let [even, odd] = parity_mass(&ensemble_longtime_grid(n, DisorderKind::Dod, 0.5, 200));
    let ratio = odd / even;
    check(
        odd0 <= 1e-12 && even0 > 0.0 && (0.5..=2.0).contains(&ratio),
        format!("clean odd-kappa mass {odd0:.2e}; strong-disorder odd/even mass ratio {ratio:.3} (need [0.5, 2])"),
    )
}

fn determinism() -> Verdict {
    let mut outputs: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for threads in ["1", "2", "8"] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let out = dir.path().to_str().unwrap();
        run_cli(&[
            "ensemble", "--n", "31", "--kind", "dod", "--delta", "0.5", "--r", "64", "--seed", "5",
            "--times", "3.5", "--threads", threads, "--out", out, "--no-image", "--quiet",
        ])?;
        let mut files = Vec::new();
        for path in csv_files(dir.path())? {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            files.push((name, std::fs::read(&path).map_err(|e| e.to_string())?));
        }
        outputs.push(files);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    check(
        same && outputs[0].len() == 2,
        format!("{} CSVs byte-identical at 1, 2, 8 workers: {same}", outputs[0].len()),
    )
}

fn performance() -> Verdict {
    let n = 101;
    let j = n / 2;
    let times = [1.0, 10.0, 20.0, 40.0, 100.0, 500.0];
    let start = Instant::now();
    let h = realize(ring(n), DisorderKind::Dod, 0.5, 0, false).map_err(|e| e.to_string())?;
    let es = eigendecompose(&h, None).map_err(|e| e.to_string())?;
    for t in times {
        wigner_at(&es, j, t).map_err(|e| e.to_string())?;
    }
    wigner_longtime(&es, j).map_err(|e| e.to_string())?;
    let single = start.elapsed();

    let start = Instant::now();
    let spec = EnsembleSpec::new(ring(n), j, DisorderKind::Dod, 0.5, 1000, 0).with_times(times);
    EnsembleRunner::new().full(&spec).map_err(|e| e.to_string())?;
    let full = start.elapsed();
    let cores = std::thread::available_parallelism().map_or(1, |c| c.get());
    check(
        single <= Duration::from_secs(1) && full <= Duration::from_secs(600),
        format!(
            "one realization {:.3} s (limit 1 s); R=1000 ensemble {:.1} s on {cores} core(s) (limit 600 s)",
            single.as_secs_f64(),
            full.as_secs_f64()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("Bloch-oracle equivalence", bloch_equivalence),
        ("limiting grid, odd N", odd_limit),
        ("limiting grid, even N", even_limit),
        ("t = 0 phase-space signature", t0_signature),
        ("marginal chain", marginal_chain),
        ("interchange identity", interchange),
        ("localization trend", localization_trend),
        ("even-N second peak suppression", even_peak_suppression),
        ("stripe destruction", stripe_destruction),
        ("determinism across worker counts", determinism),
        ("performance envelope", performance),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2}. {name}: {detail} [{secs:.1} s]", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
