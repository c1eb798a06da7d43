//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Expected values come from oracles defined here,
//! independent of the solver code paths.

use std::process::Command;
use std::time::{Duration, Instant};

use linecov::approx::{solve, AtspMode, SolverConfig};
use linecov::cost::{effective_speed, WindModel};
use linecov::flow::{lp_solve, FlowArcRole};
use linecov::graph::{validate_tour, LineCoverageInstance};
use linecov::improve::{short_circuit, two_opt, DEFAULT_MOVE_CAP};
use linecov::mcf::{solve_min_cost_flow, verify_flow, Capacity, FlowNetwork};
use linecov::oracle::{brute_force_optimal, random_instance, GenCosts, GenParams, Profile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REL: f64 = 1e-9;

fn leq(a: f64, b: f64) -> bool {
    a <= b + REL * a.abs().max(b.abs()).max(1.0)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL * a.abs().max(b.abs()).max(1.0)
}

/// Shortest deadhead costs by Floyd-Warshall over the raw edge list.
fn floyd(inst: &LineCoverageInstance) -> Vec<Vec<f64>> {
    let n = inst.vertex_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0.0;
    }
    for e in inst.edges() {
        if e.u == e.v {
            continue;
        }
        for (a, b, c) in [(e.u.0, e.v.0, e.deadhead.fwd), (e.v.0, e.u.0, e.deadhead.rev)] {
            if c < 1e14 && c < d[a][b] {
                d[a][b] = c;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Optimal tour cost by dynamic programming over (serviced set, last
/// service arc), starting from the first required edge in either direction.
fn exact_optimum(inst: &LineCoverageInstance) -> f64 {
    let d = floyd(inst);
    let req: Vec<_> = inst.required_edge_ids().iter().map(|&e| inst.edge(e).clone()).collect();
    let m = req.len();
    // arc 2k = edge k forward, 2k+1 = reverse: (tail, head, service cost)
    let arc = |a: usize| {
        let e = &req[a / 2];
        let s = e.service.expect("required edge");
        if a % 2 == 0 {
            (e.u.0, e.v.0, s.fwd)
        } else {
            (e.v.0, e.u.0, s.rev)
        }
    };
    let full = (1usize << m) - 1;
    let mut best = f64::INFINITY;
    for first in [0, 1] {
        let mut dp = vec![vec![f64::INFINITY; 2 * m]; 1 << m];
        dp[1][first] = arc(first).2;
        for mask in 1..=full {
            if mask & 1 == 0 {
                continue;
            }
            for last in 0..2 * m {
                let cur = dp[mask][last];
                if cur == f64::INFINITY {
                    continue;
                }
                for next in 0..2 * m {
                    if mask & (1 << (next / 2)) != 0 {
                        continue;
                    }
                    let (t, _, s) = arc(next);
                    let c = cur + d[arc(last).1][t] + s;
                    let nm = mask | (1 << (next / 2));
                    if c < dp[nm][next] {
                        dp[nm][next] = c;
                    }
                }
            }
        }
        for last in 0..2 * m {
            let c = dp[full][last] + d[arc(last).1][arc(first).0];
            best = best.min(c);
        }
    }
    best
}

/// Minimum flow cost by enumerating every integral flow vector bounded by
/// total supply; `None` when no flow meets the demands.
fn enumerate_flow(net: &FlowNetwork<()>) -> Option<f64> {
    let supply: u64 = net.demands.iter().filter(|&&d| d > 0).map(|&d| d as u64).sum();
    let bound: Vec<u64> = net
        .arcs
        .iter()
        .map(|a| match a.capacity {
            Capacity::Finite(c) => c.min(supply),
            Capacity::Unbounded => supply,
        })
        .collect();
    let mut f = vec![0u64; net.arcs.len()];
    let mut best: Option<f64> = None;
    'outer: loop {
        let mut bal = vec![0i64; net.node_count];
        let mut cost = 0.0;
        for (a, &x) in net.arcs.iter().zip(&f) {
            bal[a.head] += x as i64;
            bal[a.tail] -= x as i64;
            cost += a.unit_cost * x as f64;
        }
        if bal == net.demands && best.is_none_or(|b| cost < b) {
            best = Some(cost);
        }
        for k in 0..f.len() {
            if f[k] < bound[k] {
                f[k] += 1;
                continue 'outer;
            }
            f[k] = 0;
        }
        return best;
    }
}

fn costs_for(i: u64) -> GenCosts {
    match i % 3 {
        0 => GenCosts::Wind(WindModel::default()),
        1 => GenCosts::Euclidean,
        _ => GenCosts::RandomAsymmetric { max: 10 },
    }
}

/// Small instances with 2..=7 (Eulerian) or 1..=7 required edges.
fn small_corpus(profile: Profile, count: u64, seed_base: u64) -> Vec<LineCoverageInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_base);
    let mut out = Vec::new();
    let mut seed = seed_base;
    while (out.len() as u64) < count {
        seed += 1;
        let min_req = match profile {
            Profile::EulerianRequired => 2,
            Profile::General { components } => components,
            Profile::ConnectedRequired => 1,
        };
        let p = GenParams {
            vertices: rng.gen_range(6..=10),
            required: rng.gen_range(min_req..=7),
            extra: rng.gen_range(0..=6),
            costs: costs_for(seed),
            profile,
            complete_nonrequired: false,
        };
        out.push(random_instance(seed, &p).expect("satisfiable parameters"));
    }
    out
}

struct Outcome {
    ok: bool,
    detail: String,
}

/// First failure formatted for a detail line, empty when there is none.
fn first_failure(failures: &[String]) -> String {
    failures.first().map(|f| format!("; first failure: {f}")).unwrap_or_default()
}

struct Suite {
    results: Vec<(String, Outcome)>,
    sandwich_checked: usize,
    sandwich_failures: Vec<String>,
    corpus: Vec<LineCoverageInstance>,
}

impl Suite {
    fn record(&mut self, name: &str, outcome: Outcome) {
        println!("{} {name}: {}", if outcome.ok { "PASS" } else { "FAIL" }, outcome.detail);
        self.results.push((name.to_string(), outcome));
    }

    /// Sandwich check shared by every criterion that runs solve (and the
    /// oracle when available).
    fn sandwich(&mut self, tag: &str, lb: f64, solved: f64, oracle: Option<f64>) {
        self.sandwich_checked += 1;
        if !leq(lb, solved) || oracle.is_some_and(|o| !leq(lb, o)) {
            self.sandwich_failures.push(format!("{tag}: lb {lb} solve {solved} oracle {oracle:?}"));
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let clock = Instant::now();
    let out = f();
    (out, clock.elapsed())
}

fn criterion_1(suite: &mut Suite) {
    let corpus = small_corpus(Profile::EulerianRequired, 200, 1_000);
    let cfg = SolverConfig::default();
    let (failures, took) = timed(|| {
        let mut failures = Vec::new();
        let mut checks = Vec::new();
        for (k, inst) in corpus.iter().enumerate() {
            let (tour, report) = solve(inst, &cfg).expect("solve");
            let best = exact_optimum(inst);
            let (_, brute) = brute_force_optimal(inst).expect("oracle");
            if !close(report.cost, best) || !close(brute, best) || !validate_tour(inst, &tour).is_valid() {
                failures.push(format!("#{k}: solve {} oracle {best} brute {brute}", report.cost));
            }
            checks.push((report.lower_bound, report.cost, best));
        }
        (failures, checks)
    });
    let (failures, checks) = failures;
    for (k, (lb, c, o)) in checks.into_iter().enumerate() {
        suite.sandwich(&format!("eulerian #{k}"), lb, c, Some(o));
    }
    let ok = failures.is_empty() && took < Duration::from_secs(10);
    suite.record(
        "1 eulerian optimality",
        Outcome { ok, detail: format!("{} instances, {} mismatches, {:.2?} (< 10 s){}", corpus.len(), failures.len(), took, first_failure(&failures)) },
    );
    suite.corpus.extend(corpus);
}

fn criterion_2(suite: &mut Suite) {
    let corpus = small_corpus(Profile::ConnectedRequired, 500, 2_000);
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2_500);
    let large: Vec<LineCoverageInstance> = (0..100u64)
        .map(|i| {
            let vertices = rng.gen_range(40..=200);
            let required = rng.gen_range(20..=300);
            let p = GenParams {
                vertices,
                required,
                // connectivity links add at most vertices - 1 edges
                extra: rng.gen_range(0..=500 - required - vertices),
                costs: costs_for(i),
                profile: Profile::ConnectedRequired,
                complete_nonrequired: false,
            };
            random_instance(3_000 + i, &p).expect("satisfiable parameters")
        })
        .collect();
    let (res, took) = timed(|| {
        let mut failures = Vec::new();
        let mut checks = Vec::new();
        let mut worst: f64 = 0.0;
        for (k, inst) in corpus.iter().enumerate() {
            let (_, report) = solve(inst, &cfg).expect("solve");
            let best = exact_optimum(inst);
            worst = worst.max(report.cost / best);
            if !leq(report.cost, 2.0 * best) {
                failures.push(format!("small #{k}: {} > 2 x {best}", report.cost));
            }
            checks.push((format!("connected #{k}"), report.lower_bound, report.cost, Some(best)));
        }
        let mut worst_lb: f64 = 0.0;
        for (k, inst) in large.iter().enumerate() {
            assert!(inst.edges().len() <= 500);
            let (_, report) = solve(inst, &cfg).expect("solve");
            worst_lb = worst_lb.max(report.ratio);
            if !leq(report.cost, 2.0 * report.lower_bound) {
                failures.push(format!("large #{k}: {} > 2 x lb {}", report.cost, report.lower_bound));
            }
            checks.push((format!("connected large #{k}"), report.lower_bound, report.cost, None));
        }
        (failures, checks, worst, worst_lb)
    });
    let (failures, checks, worst, worst_lb) = res;
    for (tag, lb, c, o) in checks {
        suite.sandwich(&tag, lb, c, o);
    }
    let ok = failures.is_empty() && took < Duration::from_secs(60);
    suite.record(
        "2 two-approximation",
        Outcome {
            ok,
            detail: format!(
                "{} small (worst cost/opt {worst:.4}), {} large (worst cost/lb {worst_lb:.4}), {:.2?} (< 60 s){}",
                corpus.len(),
                large.len(),
                took,
                first_failure(&failures)
            ),
        },
    );
    suite.corpus.extend(corpus);
    suite.corpus.extend(large.into_iter().take(20));
}

fn criterion_3(suite: &mut Suite) {
    let mut corpus = small_corpus(Profile::General { components: 2 }, 150, 4_000);
    corpus.extend(small_corpus(Profile::General { components: 3 }, 150, 5_000));
    let cfg = SolverConfig { atsp_mode: AtspMode::ExactDp, ..SolverConfig::default() };
    let (res, took) = timed(|| {
        let mut failures = Vec::new();
        let mut checks = Vec::new();
        let mut worst: f64 = 0.0;
        for (k, inst) in corpus.iter().enumerate() {
            let c = inst.required_components().len();
            assert!((2..=3).contains(&c));
            let (_, report) = solve(inst, &cfg).expect("solve");
            let best = exact_optimum(inst);
            worst = worst.max(report.cost / best);
            if !leq(report.cost, 3.0 * best) {
                failures.push(format!("#{k}: {} > 3 x {best}", report.cost));
            }
            checks.push((report.lower_bound, report.cost, best));
        }
        (failures, checks, worst)
    });
    let (failures, checks, worst) = res;
    for (k, (lb, c, o)) in checks.into_iter().enumerate() {
        suite.sandwich(&format!("general #{k}"), lb, c, Some(o));
    }
    let ok = failures.is_empty() && took < Duration::from_secs(60);
    suite.record(
        "3 three-approximation, C in 2..=3",
        Outcome {
            ok,
            detail: format!("{} instances, worst cost/opt {worst:.4}, {:.2?} (< 60 s){}", corpus.len(), took, first_failure(&failures)),
        },
    );
    suite.corpus.extend(corpus);
}

fn criterion_4(suite: &mut Suite) {
    let failures = std::mem::take(&mut suite.sandwich_failures);
    suite.record(
        "4 lower-bound sandwich",
        Outcome {
            ok: failures.is_empty() && suite.sandwich_checked > 0,
            detail: format!("{} instances checked, {} violations{}", suite.sandwich_checked, failures.len(), first_failure(&failures)),
        },
    );
}

fn random_network(rng: &mut ChaCha8Rng) -> FlowNetwork<()> {
    let nodes = rng.gen_range(2..=4);
    let mut demands: Vec<i64> = (0..nodes).map(|_| rng.gen_range(-3..=3)).collect();
    let mut sum: i64 = demands.iter().sum();
    for d in demands.iter_mut() {
        let step = if sum > 0 { (*d + 3).min(sum) } else { -((3 - *d).min(-sum)) };
        *d -= step;
        sum -= step;
    }
    let mut net = FlowNetwork::new(nodes);
    net.demands = demands;
    for _ in 0..rng.gen_range(1..=6) {
        let cap = if rng.gen_bool(0.3) { Capacity::Unbounded } else { Capacity::Finite(rng.gen_range(0..=3)) };
        let cost = rng.gen_range(0..=20) as f64 / 2.0;
        net.add_arc(rng.gen_range(0..nodes), rng.gen_range(0..nodes), cap, cost, ());
    }
    net
}

fn criterion_5(suite: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let (mut feasible, mut total) = (0, 0);
    while feasible < 1000 {
        let net = random_network(&mut rng);
        total += 1;
        let expected = enumerate_flow(&net);
        match (solve_min_cost_flow(&net), expected) {
            (Ok(sol), Some(best)) => {
                feasible += 1;
                if sol.total_cost != best || !verify_flow(&net, &sol) {
                    failures.push(format!("network {total}: solver {} vs {best}", sol.total_cost));
                }
            }
            (Err(linecov::Error::InfeasibleFlow), None) => {}
            (got, want) => failures.push(format!("network {total}: {got:?} vs {want:?}")),
        }
    }
    suite.record(
        "5 min-cost flow exactness",
        Outcome {
            ok: failures.is_empty() && feasible >= 1000,
            detail: format!("{total} networks ({feasible} feasible), {} mismatches{}", failures.len(), first_failure(&failures)),
        },
    );
}

fn criterion_6(suite: &mut Suite) {
    let mut checked = 0;
    let mut failures = Vec::new();
    let eulerian: Vec<&LineCoverageInstance> = suite
        .corpus
        .iter()
        .filter(|inst| {
            let mut deg = vec![0usize; inst.vertex_count()];
            for &e in inst.required_edge_ids() {
                deg[inst.edge(e).u.0] += 1;
                deg[inst.edge(e).v.0] += 1;
            }
            inst.required_components().len() == 1 && deg.iter().all(|d| d % 2 == 0)
        })
        .collect();
    for (k, inst) in eulerian.iter().enumerate() {
        let lp = lp_solve(inst).expect("lp");
        checked += 1;
        let odd = lp
            .network
            .arcs
            .iter()
            .zip(&lp.flow.flow)
            .filter(|(a, &f)| matches!(a.tag, FlowArcRole::Reversal { .. } | FlowArcRole::Deadhead { .. }) && f % 2 == 1)
            .count();
        if odd > 0 || !lp.ambiguous.is_empty() {
            failures.push(format!("#{k}: {odd} odd flows, {} ambiguous", lp.ambiguous.len()));
        }
    }
    suite.record(
        "6 flow parity on Eulerian instances",
        Outcome {
            ok: failures.is_empty() && checked >= 200,
            detail: format!("{checked} instances, {} violations{}", failures.len(), first_failure(&failures)),
        },
    );
}

fn criterion_7(suite: &mut Suite) {
    let raw_cfg = SolverConfig { short_circuit: false, two_opt: false, ..SolverConfig::default() };
    let mut failures = Vec::new();
    let (mut improved_sc, mut improved_2opt) = (0, 0);
    for (k, inst) in suite.corpus.iter().enumerate() {
        let (raw, _) = solve(inst, &raw_cfg).expect("solve");
        let sc = short_circuit(inst, &raw);
        let opt = two_opt(inst, &sc, DEFAULT_MOVE_CAP);
        let direct = two_opt(inst, &raw, DEFAULT_MOVE_CAP);
        improved_sc += (sc.total_cost < raw.total_cost) as usize;
        improved_2opt += (opt.total_cost < sc.total_cost) as usize;
        let valid = [&sc, &opt, &direct].iter().all(|t| validate_tour(inst, t).is_valid());
        if !valid || sc.total_cost > raw.total_cost || opt.total_cost > sc.total_cost || direct.total_cost > raw.total_cost {
            failures.push(format!("#{k}: raw {} sc {} 2opt {} direct {}", raw.total_cost, sc.total_cost, opt.total_cost, direct.total_cost));
        }
    }
    suite.record(
        "7 improvement monotonicity",
        Outcome {
            ok: failures.is_empty(),
            detail: format!(
                "{} tours, short-circuit improved {improved_sc}, 2-opt improved {improved_2opt}, {} violations{}",
                suite.corpus.len(),
                failures.len(),
                first_failure(&failures)
            ),
        },
    );
}

fn criterion_8(suite: &mut Suite) {
    let mut failures = Vec::new();
    let analytic = [(10.0, 0.0, 1.3, 10.0), (10.0, 2.0, 0.0, 12.0), (10.0, 2.0, std::f64::consts::PI, 8.0), (7.0, 2.0, 0.0, 9.0)];
    for (v, w, phi, want) in analytic {
        let got = effective_speed(v, w, phi).expect("valid wind");
        if (got - want).abs() > 1e-12 {
            failures.push(format!("v={v} w={w} phi={phi}: {got} vs {want}"));
        }
    }
    let model = WindModel::default();
    let (mut edges, mut asymmetric) = (0, 0);
    for seed in 0..50 {
        let p = GenParams { vertices: 30, required: 25, extra: 30, costs: GenCosts::Wind(model), ..GenParams::default() };
        let inst = random_instance(80_000 + seed, &p).expect("instance");
        let xy = inst.coordinates().expect("generated coordinates");
        for e in inst.edges() {
            edges += 1;
            let (dx, dy) = (xy[e.v.0].0 - xy[e.u.0].0, xy[e.v.0].1 - xy[e.u.0].1);
            // component of the travel vector along the wind
            let along = dx * model.wind_direction.cos() + dy * model.wind_direction.sin();
            let len = dx.hypot(dy);
            if let Some(s) = e.service {
                if s.fwd < e.deadhead.fwd || s.rev < e.deadhead.rev {
                    failures.push(format!("edge {} service below deadhead", e.id));
                }
            }
            if along.abs() > 1e-6 * len {
                let d = e.deadhead;
                // tailwind direction is the cheaper one
                if (along > 0.0 && d.fwd < d.rev) || (along < 0.0 && d.rev < d.fwd) {
                    asymmetric += 1;
                } else {
                    failures.push(format!("edge {} not asymmetric: {} / {}", e.id, d.fwd, d.rev));
                }
            }
        }
    }
    suite.record(
        "8 wind model",
        Outcome {
            ok: failures.is_empty() && asymmetric > 0,
            detail: format!("4 analytic cases, {edges} edges ({asymmetric} asymmetric), {} violations{}", failures.len(), first_failure(&failures)),
        },
    );
}

fn criterion_9(suite: &mut Suite) {
    let bin = env!("CARGO_BIN_EXE_linecov");
    let dir = tempfile::tempdir().expect("tempdir");
    let mut failures = Vec::new();
    let cases: [(&[&str], &[&str]); 4] = [
        (&["--profile", "connected", "--vertices", "40", "--required", "60"], &[]),
        (&["--profile", "general", "--components", "25", "--vertices", "120", "--required", "90"], &["--atsp", "heuristic"]),
        (&["--profile", "general", "--components", "4", "--vertices", "30", "--required", "20"], &["--stitch", "gtsp"]),
        (&["--profile", "eulerian", "--vertices", "30", "--required", "40", "--cost", "random"], &["--seed", "9"]),
    ];
    for (k, (gen, solve_args)) in cases.iter().enumerate() {
        let inst = dir.path().join(format!("i{k}.json"));
        let status = Command::new(bin)
            .args(["gen", "--seed", &(900 + k).to_string(), "--out"])
            .arg(&inst)
            .args(*gen)
            .status()
            .expect("run gen");
        if !status.success() {
            failures.push(format!("case {k}: gen failed"));
            continue;
        }
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("t{k}_{run}.json"));
            let status = Command::new(bin)
                .arg("solve")
                .arg(&inst)
                .args(*solve_args)
                .arg("--out")
                .arg(&out)
                .output()
                .expect("run solve");
            if !status.status.success() {
                failures.push(format!("case {k}: solve failed: {}", String::from_utf8_lossy(&status.stderr)));
            }
            let validate = Command::new(bin).arg("validate").arg(&inst).arg(&out).output().expect("run validate");
            if !validate.status.success() {
                failures.push(format!("case {k}: validate exited {}", validate.status));
            }
            outputs.push(std::fs::read(&out).unwrap_or_default());
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            failures.push(format!("case {k}: tour files differ"));
        }
    }
    suite.record(
        "9 deterministic tour files",
        Outcome { ok: failures.is_empty(), detail: format!("{} CLI cases run twice{}", cases.len(), first_failure(&failures)) },
    );
}

fn criterion_10(suite: &mut Suite) {
    let p = GenParams {
        vertices: 500,
        required: 600,
        extra: 0,
        costs: GenCosts::Wind(WindModel::default()),
        profile: Profile::General { components: 20 },
        complete_nonrequired: true,
    };
    let inst = random_instance(10, &p).expect("instance");
    let cfg = SolverConfig::default();
    let (res, took) = timed(|| solve(&inst, &cfg));
    let (ok, detail) = match res {
        Ok((tour, report)) => (
            took < Duration::from_secs(10) && validate_tour(&inst, &tour).is_valid() && report.lower_bound <= report.cost,
            format!(
                "{} edges, C = {}, cost/lb {:.4}, {:.2?} (< 10 s; lp {:.2} s, resolve {:.2} s, stitch {:.2} s, improve {:.2} s)",
                inst.edges().len(),
                report.components,
                report.ratio,
                took,
                report.phases.lp_seconds,
                report.phases.resolve_seconds,
                report.phases.stitch_seconds,
                report.phases.improve_seconds
            ),
        ),
        Err(e) => (false, format!("solve failed: {e}")),
    };
    suite.record("10 performance, 500 vertices / 600 required", Outcome { ok, detail });
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        // `cargo test -- --list` probes every test target
        println!("acceptance: test");
        return;
    }
    let mut suite = Suite { results: Vec::new(), sandwich_checked: 0, sandwich_failures: Vec::new(), corpus: Vec::new() };
    criterion_1(&mut suite);
    criterion_2(&mut suite);
    criterion_3(&mut suite);
    criterion_4(&mut suite);
    criterion_5(&mut suite);
    criterion_6(&mut suite);
    criterion_7(&mut suite);
    criterion_8(&mut suite);
    criterion_9(&mut suite);
    criterion_10(&mut suite);

    let failed: Vec<&str> = suite.results.iter().filter(|(_, o)| !o.ok).map(|(n, _)| n.as_str()).collect();
    println!("acceptance: {} of {} criteria passed", suite.results.len() - failed.len(), suite.results.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
