//! Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exits non-zero
//! if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use reach_cli::{run_bench, BenchConfig};
use reach_core::geo::{haversine_m, initial_bearing_deg, tile_centroid, TileCoord, TileWindow};
use reach_core::markov::{contribution, TransitionMatrix};
use reach_core::raster::{crm, hcrm, sc, DEFAULT_WINDOW};
use reach_core::summary::{brute_force_reference, build_reachability_map, read_rsum, write_rsum, ReachabilityMap};
use reach_core::tensor::{DType, Tensor};
use reach_core::trajectory::{synth_trajectories, write_generic_csv, SynthConfig, SynthModel, TrajectorySet};
use reach_core::transition::{Flag, SummaryParams, Weighting};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::*;

/// splitmix64, for payloads that need no distribution guarantees.
struct Mix(u64);

impl Mix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

const SIGMA_D: f64 = 100.0;
const SIGMA_T: f64 = 60.0;

/// Random set number `seed`: up to 50 trajectories of up to 20 records on a
/// 12x12 block of zoom-24 tiles.
fn random_set(seed: u64) -> TrajectorySet {
    let mut mix = Mix(seed);
    let cfg = SynthConfig {
        seed,
        count: 1 + mix.below(50) as usize,
        min_len: 1,
        max_len: 20,
        width: 12,
        height: 12,
        model: SynthModel::RandomWalk,
        ..SynthConfig::preset(0, seed)
    };
    synth_trajectories(&cfg).unwrap()
}

fn unit(delta_r: u32) -> SummaryParams {
    SummaryParams::unit(24, delta_r).unwrap()
}

fn gaussian(delta_r: u32) -> SummaryParams {
    SummaryParams::new(24, delta_r, Weighting::Gaussian { sigma_d: SIGMA_D, sigma_t: SIGMA_T }).unwrap()
}

fn entries(map: &ReachabilityMap) -> Vec<(TileCoord, Flag, u32, f64)> {
    let mut out = Vec::new();
    for (&tile, ch) in map.iter() {
        for flag in [Flag::Emission, Flag::Absorption] {
            out.extend(ch.channel(flag).iter().map(|(i, c)| (tile, flag, i, c)));
        }
    }
    out
}

fn close_per_entry(a: &ReachabilityMap, b: &ReachabilityMap, rel: f64) -> bool {
    let (ea, eb) = (entries(a), entries(b));
    ea.len() == eb.len()
        && ea.iter().zip(&eb).all(|(x, y)| {
            x.0 == y.0 && x.1 == y.1 && x.2 == y.2 && (x.3 - y.3).abs() <= rel * x.3.abs().max(y.3.abs())
        })
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    for seed in 0..200u64 {
        let set = random_set(seed);
        let delta_r = 1 + (seed % 3) as u32;
        let (pu, pg) = (unit(delta_r), gaussian(delta_r));
        let (ru, rg) = (brute_force_reference(&set, &pu), brute_force_reference(&set, &pg));
        for workers in [1, 2, 4, 8] {
            if build_reachability_map(&set, &pu, workers).unwrap() != ru {
                return Fail(format!("unit mismatch, seed {seed}, {workers} workers"));
            }
            if !close_per_entry(&build_reachability_map(&set, &pg, workers).unwrap(), &rg, 1e-9) {
                return Fail(format!("gaussian mismatch beyond 1e-9, seed {seed}, {workers} workers"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return Fail(format!("took {secs:.1} s, budget 60 s"));
    }
    Pass(format!("200 sets x workers {{1,2,4,8}}, unit exact, gaussian within 1e-9, {secs:.1} s"))
}

/// Weighted count of every valid record pair, straight from the records.
fn valid_pair_mass(set: &TrajectorySet, params: &SummaryParams) -> f64 {
    let g = |mu: f64, s: f64| (-mu * mu / (2.0 * s * s)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * s);
    let mut total = 0.0;
    for traj in &set.trajectories {
        let pts = &traj.points;
        let mut dist = vec![0.0];
        for w in pts.windows(2) {
            dist.push(dist.last().unwrap() + haversine_m(tile_centroid(w[0].tile), tile_centroid(w[1].tile)));
        }
        for k in 0..pts.len() {
            for l in k..pts.len() {
                let (a, b) = (pts[k].tile, pts[l].tile);
                if a.x.abs_diff(b.x) > params.delta_r || a.y.abs_diff(b.y) > params.delta_r {
                    continue;
                }
                total += match params.weighting {
                    Weighting::Unit => 1.0,
                    Weighting::Gaussian { sigma_d, sigma_t } => {
                        g(dist[l] - dist[k], sigma_d) * g((pts[l].t - pts[k].t) as f64, sigma_t)
                    }
                };
            }
        }
    }
    total
}

fn criterion_2() -> Outcome {
    for seed in 0..200u64 {
        let set = random_set(seed);
        let delta_r = 1 + (seed % 3) as u32;
        for (params, exact) in [(unit(delta_r), true), (gaussian(delta_r), false)] {
            let map = build_reachability_map(&set, &params, 4).unwrap();
            if let Err(e) = map.check_duality() {
                return Fail(format!("seed {seed}: {e}"));
            }
            let want = valid_pair_mass(&set, &params);
            for flag in [Flag::Emission, Flag::Absorption] {
                let got = map.total_mass(flag);
                let ok = if exact { got == want } else { (got - want).abs() <= 1e-9 * want };
                if !ok {
                    return Fail(format!("seed {seed}: {flag:?} mass {got} vs pair mass {want}"));
                }
            }
        }
    }
    Pass("duality and mass conservation on 200 sets, unit and gaussian".into())
}

fn criterion_3() -> Outcome {
    let mut nodes = 0;
    for seed in 0..200u64 {
        let set = random_set(seed);
        let delta_r = 1 + (seed % 3) as u32;
        for params in [unit(delta_r), gaussian(delta_r)] {
            let map = build_reachability_map(&set, &params, 2).unwrap();
            let d = delta_r as usize;
            for tile in map.active_tiles() {
                let dense = map.densify(tile).unwrap();
                if dense.get(d, d, 0) != dense.get(d, d, 1) {
                    return Fail(format!("seed {seed}: center entries differ at {tile}"));
                }
                nodes += 1;
            }
        }
    }
    Pass(format!("emission and absorption centers equal on {nodes} active nodes"))
}

fn reach(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_reach"))
        .args(args)
        .env_remove("REACH_WORKERS")
        .output()
        .expect("spawn reach");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn write_csv(set: &TrajectorySet, path: &Path) {
    let mut buf = Vec::new();
    write_generic_csv(set, &mut buf).unwrap();
    std::fs::write(path, buf).unwrap();
}

fn criterion_4(dir: &Path) -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let set = random_set(1000 + seed);
        let path = dir.join(format!("cke{seed}.csv"));
        write_csv(&set, &path);
        let (code, out) = reach(&["verify-cke", "--input", path.to_str().unwrap(), "--zoom", "24", "--workers", "2"]);
        let residual = out
            .lines()
            .find_map(|l| l.strip_prefix("residual="))
            .and_then(|v| v.parse::<f64>().ok());
        match residual {
            Some(r) if code == 0 && out.contains("status=pass") && out.contains("coverage=full") && r < 1e-9 => {
                worst = worst.max(r)
            }
            _ => return Fail(format!("instance {seed}: exit {code}\n{out}")),
        }
    }
    let mut mix = Mix(7);
    let mut worst7: f64 = 0.0;
    for _ in 0..200 {
        let p = TransitionMatrix::from_weights(5, (0..25).map(|_| mix.unit()).collect()).unwrap();
        let sq = p.square();
        for a in 0..5 {
            for b in 0..5 {
                let via: f64 = (0..5).map(|s| contribution(&p, s, a, b).unwrap()).sum();
                worst7 = worst7.max((via - sq[a * 5 + b]).abs());
            }
        }
    }
    if worst7 >= 1e-12 {
        return Fail(format!("two-step decomposition residual {worst7:e}"));
    }
    Pass(format!(
        "50 instances via verify-cke, max residual {worst:.2e} < 1e-9; 200 5-state matrices, max two-step residual {worst7:.2e} < 1e-12"
    ))
}

fn criterion_5(dir: &Path) -> Outcome {
    let csv = dir.join("det.csv");
    let (code, _) = reach(&["gen-synthetic", "--seed", "11", "--count", "400", "--output", csv.to_str().unwrap()]);
    if code != 0 {
        return Fail("gen-synthetic failed".into());
    }
    let mut outputs = Vec::new();
    for workers in ["1", "2", "4", "8"] {
        let out = dir.join(format!("det{workers}.rsum"));
        let (code, _) = reach(&[
            "summarize", "--input", csv.to_str().unwrap(), "--workers", workers, "--output", out.to_str().unwrap(),
        ]);
        if code != 0 {
            return Fail(format!("summarize with {workers} workers exited {code}"));
        }
        outputs.push(std::fs::read(&out).unwrap());
    }
    if outputs.windows(2).all(|w| w[0] == w[1]) {
        Pass(format!("RSUM byte-identical for workers 1,2,4,8 ({} bytes)", outputs[0].len()))
    } else {
        Fail("RSUM bytes differ between worker counts".into())
    }
}

fn criterion_6() -> Outcome {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    if cores < 4 {
        // still exercise the harness at small scale so regressions surface
        let set = synth_trajectories(&SynthConfig::preset(2000, 0)).unwrap();
        let report = run_bench(&BenchConfig {
            datasets: vec![("2000".into(), set)],
            workers: vec![1, 2, 4],
            repeats: 1,
            params: unit(12),
        })
        .unwrap();
        let shape: Vec<String> = report.rows().iter().map(|r| format!("{}w {:.3}s", r.workers, r.median_s)).collect();
        return Skip(format!(
            "needs a machine with at least 4 cores, found {cores}; smoke run on the 2000 preset: {}",
            shape.join(", ")
        ));
    }
    let start = Instant::now();
    let set = synth_trajectories(&SynthConfig::preset(64000, 0)).unwrap();
    let report = run_bench(&BenchConfig {
        datasets: vec![("64000".into(), set)],
        workers: vec![1, 2, 3, 4],
        repeats: 7,
        params: unit(12),
    })
    .unwrap();
    let medians: Vec<f64> = report.rows().iter().map(|r| r.median_s).collect();
    let secs = start.elapsed().as_secs_f64();
    let speedup = medians[0] / medians[3];
    let monotone = medians.windows(2).all(|w| w[1] <= w[0]);
    let detail = format!("medians {medians:.3?} s, speedup(4) {speedup:.2}, {secs:.0} s total");
    if speedup >= 2.0 && monotone && secs < 900.0 {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn criterion_7(dir: &Path) -> Outcome {
    let out = dir.join("tdrive.csv");
    let (code, text) = reach(&["preprocess-tdrive", "--input", fixture("tdrive").to_str().unwrap(), "--output", out.to_str().unwrap()]);
    let expect = ["taxis=3", "trajectories=6", "records=18", "duplicates_dropped=1", "malformed=1"];
    if code != 0 || !expect.iter().all(|e| text.lines().any(|l| l == *e)) {
        return Fail(format!("fixture counts: exit {code}\n{text}"));
    }
    let Some(full) = std::env::var_os("REACH_TDRIVE_DIR") else {
        return Pass("3-taxi fixture matches hand counts; full dataset not supplied (set REACH_TDRIVE_DIR)".into());
    };
    let out = dir.join("tdrive_full.csv");
    let (code, text) = reach(&["preprocess-tdrive", "--input", full.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    if code == 0 && text.lines().any(|l| l == "trajectories=68851") {
        Pass("fixture matches; full dataset yields 68851 trajectories".into())
    } else {
        Fail(format!("full dataset: exit {code}\n{text}"))
    }
}

/// Per-record recount: `[count, heading x12, speed x14]` per in-window tile.
fn recount(set: &TrajectorySet, w: &TileWindow) -> BTreeMap<(u32, u32), [f64; 27]> {
    let mut out: BTreeMap<(u32, u32), [f64; 27]> = BTreeMap::new();
    for traj in &set.trajectories {
        for (k, p) in traj.points.iter().enumerate() {
            let Some((row, col)) = w.locate(p.tile) else { continue };
            let cell = out.entry((row as u32, col as u32)).or_insert([0.0; 27]);
            cell[0] += 1.0;
            if k == 0 {
                continue;
            }
            let prev = &traj.points[k - 1];
            let (a, b) = (tile_centroid(prev.tile), tile_centroid(p.tile));
            if prev.tile != p.tile {
                let bearing = initial_bearing_deg(a, b);
                cell[1 + (bearing / 30.0).floor() as usize % 12] += 1.0;
            }
            let mph = haversine_m(a, b) / (p.t - prev.t) as f64 * 2.2369362921;
            cell[13 + ((mph / 5.0).floor() as usize).min(13)] += 1.0;
        }
    }
    out
}

fn criterion_8() -> Outcome {
    for seed in 0..100u64 {
        let set = random_set(5000 + seed);
        let origin = TileCoord::new(24, 13_813_000 + 2, 6_357_000 + 3).unwrap();
        let w = TileWindow::new(origin, 9, 8).unwrap();
        let expect = recount(&set, &w);
        let (c, h, s) = (crm(&set, &w).unwrap(), hcrm(&set, &w).unwrap(), sc(&set, &w).unwrap());
        for row in 0..8usize {
            for col in 0..9usize {
                let e = expect.get(&(row as u32, col as u32)).copied().unwrap_or([0.0; 27]);
                if c.pixel(row, col) != &e[..1] || h.pixel(row, col) != &e[1..13] || s.pixel(row, col) != &e[13..] {
                    return Fail(format!("seed {seed}: pixel ({row}, {col}) differs from recount"));
                }
            }
        }
    }
    let w = TileWindow::new(TileCoord::new(24, 13_813_000, 6_357_000).unwrap(), DEFAULT_WINDOW, DEFAULT_WINDOW).unwrap();
    let set = random_set(1);
    let dims = |r: reach_core::raster::RasterWindow| (r.height, r.width, r.channels);
    let got = (dims(crm(&set, &w).unwrap()), dims(hcrm(&set, &w).unwrap()), dims(sc(&set, &w).unwrap()));
    if got != ((256, 256, 1), (256, 256, 12), (256, 256, 14)) {
        return Fail(format!("default-window dims {got:?}"));
    }
    Pass("CRM/HCRM/SC equal per-record recounts on 100 sets; dims 256x256x{1,12,14}".into())
}

fn criterion_9(dir: &Path) -> Outcome {
    let mut mix = Mix(99);
    for i in 0..50u64 {
        let set = random_set(9000 + i);
        let params = if i % 2 == 0 { gaussian(1 + (i % 4) as u32) } else { unit(1 + (i % 4) as u32) };
        let map = build_reachability_map(&set, &params, 2).unwrap();
        let (a, b) = (dir.join("a.rsum"), dir.join("b.rsum"));
        write_rsum(&map, &a).unwrap();
        write_rsum(&read_rsum(&a).unwrap(), &b).unwrap();
        if std::fs::read(&a).unwrap() != std::fs::read(&b).unwrap() {
            return Fail(format!("RSUM payload {i} changed on rewrite"));
        }

        let rank = 1 + mix.below(4) as usize;
        let dims: Vec<u32> = (0..rank).map(|_| 1 + mix.below(6) as u32).collect();
        let n = dims.iter().product::<u32>() as usize;
        let dtype = if mix.below(2) == 0 { DType::F32 } else { DType::F64 };
        let data = (0..n).map(|_| (mix.unit() - 0.5) * 1e4).collect();
        let t = Tensor::new(dtype, dims, data).unwrap();
        let (a, b) = (dir.join("a.rten"), dir.join("b.rten"));
        t.write(&a).unwrap();
        Tensor::read(&a).unwrap().write(&b).unwrap();
        if std::fs::read(&a).unwrap() != std::fs::read(&b).unwrap() {
            return Fail(format!("RTEN payload {i} changed on rewrite"));
        }
    }
    Pass("50 RSUM and 50 RTEN random payloads byte-identical after write, read, write".into())
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, Check)> = vec![
        ("oracle equivalence", Box::new(criterion_1)),
        ("duality and conservation", Box::new(criterion_2)),
        ("center entry", Box::new(criterion_3)),
        ("Chapman-Kolmogorov check", Box::new(|| criterion_4(d))),
        ("summarize determinism", Box::new(|| criterion_5(d))),
        ("scaling shape", Box::new(criterion_6)),
        ("T-Drive preprocessing", Box::new(|| criterion_7(d))),
        ("LAR correctness", Box::new(criterion_8)),
        ("format round trips", Box::new(|| criterion_9(d))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match check() {
            Pass(m) => ("PASS", m),
            Skip(m) => ("SKIP", m),
            Fail(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {} {name}: {tag}: {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
