//! End-to-end acceptance checks. Runs without the libtest harness so each
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relay_contracts::contract::{first_best_contract, MONEY_TOL};
use relay_contracts::selection::{exhaustive_optimum, relaxed_upper_bound};
use relay_contracts::sim::{aggregate, run_cell, Mechanism, RoundResult, Series};
use relay_contracts::{
    best_snr_baseline, knapsack_01, overall_heuristic, reproduce_table3, second_best_menu,
    select_best_contract, verify_menu, ContractMenu, ExperimentConfig, Information, MenuKind,
    OfferMatrix, SelectionProblem, TypeDistribution, TypeGrid,
};

// (first-best dB, first-best t, second-best dB, second-best t, rent)
const REFERENCE_TABLE: [(f64, f64, f64, f64, f64); 10] = [
    (15.4490, 0.7013, 9.0401, 0.1603, 0.0),
    (17.2510, 0.7080, 12.3131, 0.2806, 0.0534),
    (18.5208, 0.7113, 14.6324, 0.4008, 0.1102),
    (19.5021, 0.7133, 16.4428, 0.5210, 0.1683),
    (20.3020, 0.7147, 17.9322, 0.6412, 0.2271),
    (20.9773, 0.7156, 19.1990, 0.7615, 0.2863),
    (21.5615, 0.7163, 20.3020, 0.8817, 0.3457),
    (22.0764, 0.7169, 21.2794, 1.0019, 0.4052),
    (22.5367, 0.7173, 22.1564, 1.1221, 0.4649),
    (22.9528, 0.7177, 22.9528, 1.2424, 0.5246),
];

const DB_TOL: f64 = 1e-3;
const MONEY_TABLE_TOL: f64 = 5e-4;
const SLACK: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Spend checks shared by every criterion.
#[derive(Default)]
struct Feasibility {
    checked: usize,
    violations: Vec<String>,
}

impl Feasibility {
    fn check(&mut self, what: &str, spend: f64, budget: f64) {
        self.checked += 1;
        if spend > budget + MONEY_TOL {
            self.violations
                .push(format!("{what}: spend {spend} > budget {budget}"));
        }
    }

    fn round(&mut self, r: &RoundResult, budget: f64) {
        self.check("overall", r.spend, budget);
        self.check("best_snr", r.spend_best_snr, budget);
        self.check("relaxed", r.spend_relaxed, budget);
        for (i, c) in r.candidates.iter().enumerate() {
            self.check(["esw", "asw", "nsw", "sscpa"][i], c.1, budget);
        }
    }
}

fn reference_grid() -> TypeGrid {
    TypeGrid::from_distribution(&TypeDistribution::uniform(50.0, 300.0).unwrap(), 10, 16).unwrap()
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let rows = reproduce_table3(1.0).unwrap();
    let elapsed = start.elapsed();
    let mut worst_db = 0.0f64;
    let mut worst_money = 0.0f64;
    for (row, expected) in rows.iter().zip(REFERENCE_TABLE) {
        let (fb_db, fb_t, sb_db, sb_t, rent) = expected;
        worst_db = worst_db
            .max((row.first_best.snr_db() - fb_db).abs())
            .max((row.second_best.snr_db() - sb_db).abs());
        worst_money = worst_money
            .max((row.first_best.transfer - fb_t).abs())
            .max((row.second_best.transfer - sb_t).abs())
            .max((row.rent - rent).abs());
    }
    let pass = rows.len() == 10
        && worst_db <= DB_TOL
        && worst_money <= MONEY_TABLE_TOL
        && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!("max |dB err| {worst_db:.2e}, max |money err| {worst_money:.2e}, {elapsed:?}"),
    )
}

fn criterion2() -> Outcome {
    let menu = second_best_menu(&reference_grid(), 1.0).unwrap();
    let top = menu.pairs()[9];
    let fb = first_best_contract(275.0, 1.0).unwrap();
    let bitwise = top.snr.to_bits() == fb.snr.to_bits();
    let printed = (
        format!("{:.4}", top.snr_db()),
        format!("{:.4}", fb.snr_db()),
    );
    let pass = bitwise && printed.0 == "22.9528" && printed.1 == "22.9528";
    outcome(
        pass,
        format!(
            "bitwise equal: {bitwise}, printed {} / {} dB",
            printed.0, printed.1
        ),
    )
}

fn random_grid(rng: &mut ChaCha8Rng) -> (TypeGrid, f64) {
    let low = rng.gen_range(1.0..100.0);
    let high = low + rng.gen_range(10.0..500.0);
    let dist = if rng.gen_bool(0.5) {
        TypeDistribution::uniform(low, high).unwrap()
    } else {
        TypeDistribution::truncated_exponential(low, high, rng.gen_range(1e-3..5e-2)).unwrap()
    };
    let k = rng.gen_range(2..=20);
    let n = rng.gen_range(1..=4);
    let c = rng.gen_range(0.1..5.0);
    (TypeGrid::from_distribution(&dist, k, n).unwrap(), c)
}

fn criterion3() -> Outcome {
    let grid = reference_grid();
    let sb = second_best_menu(&grid, 1.0).unwrap();
    let table_ok = verify_menu(&sb).has_second_best_structure();

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut random_failures = 0;
    for _ in 0..100 {
        let (grid, c) = random_grid(&mut rng);
        let audit = verify_menu(&second_best_menu(&grid, c).unwrap());
        if !audit.has_second_best_structure() {
            random_failures += 1;
        }
    }

    let fb = ContractMenu::first_best(&grid, 1.0).unwrap();
    let fb_fails_ic = !verify_menu(&fb).all_ic();
    let all_pick_first = grid
        .deltas()
        .iter()
        .all(|&delta| select_best_contract(&fb, delta) == Some(0));

    let pass = table_ok && random_failures == 0 && fb_fails_ic && all_pick_first;
    outcome(
        pass,
        format!(
            "reference menu ok: {table_ok}, random grid failures: {random_failures}/100, \
             first-best fails IC: {fb_fails_ic}, every type picks contract 1: {all_pick_first}"
        ),
    )
}

fn criterion4() -> Outcome {
    let menu = second_best_menu(&reference_grid(), 1.0).unwrap();
    let deltas = menu.deltas().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let theta = rng.gen_range(50.0..300.0);
        let bracket = deltas.iter().rposition(|&d| d <= theta).unwrap();
        if select_best_contract(&menu, theta) != Some(bracket) {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatches in 10000 draws"),
    )
}

fn brute_force_knapsack(snr: &[f64], units: &[u64], cap: u64) -> f64 {
    let mut best = 0.0f64;
    for mask in 0u32..(1 << snr.len()) {
        let (mut w, mut v) = (0u64, 0.0);
        for i in 0..snr.len() {
            if mask >> i & 1 == 1 {
                w += units[i];
                v += snr[i];
            }
        }
        if w <= cap {
            best = best.max(v);
        }
    }
    best
}

fn criterion5(feas: &mut Feasibility) -> Outcome {
    const RES: u32 = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let start = Instant::now();
    let mut mismatches = 0;
    for _ in 0..200 {
        let m = rng.gen_range(1..=12);
        let units: Vec<u64> = (0..m).map(|_| rng.gen_range(1..=300)).collect();
        let transfers: Vec<f64> = units.iter().map(|&u| u as f64 / RES as f64).collect();
        let snr: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..200.0)).collect();
        let cap = rng.gen_range(0..=units.iter().sum::<u64>());
        let budget = cap as f64 / RES as f64;
        let chosen = knapsack_01(&snr, &transfers, budget, RES);
        let value: f64 = chosen.iter().map(|&i| snr[i]).sum();
        let spend: f64 = chosen.iter().map(|&i| transfers[i]).sum();
        feas.check("knapsack", spend, budget);
        let oracle = brute_force_knapsack(&snr, &units, cap);
        if (value - oracle).abs() > 1e-9 * oracle.max(1.0) {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(10),
        format!("{mismatches} mismatches in 200 instances, {elapsed:?}"),
    )
}

/// Offers as the mechanism produces them: relays of uniform random type
/// accept their pair from the reference second-best menu.
fn menu_offers(rng: &mut ChaCha8Rng, menu: &ContractMenu, m: usize, n: usize) -> OfferMatrix {
    let mut offers = OfferMatrix::empty(m, n);
    for i in 0..m {
        for j in 0..n {
            let theta = rng.gen_range(50.0..300.0);
            let k = select_best_contract(menu, theta).unwrap();
            let p = menu.pairs()[k];
            offers.set(i, j, p.snr, p.transfer).unwrap();
        }
    }
    offers
}

fn criterion6(feas: &mut Feasibility) -> Outcome {
    let menu = second_best_menu(&reference_grid(), 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // violations of best_snr <= overall, overall <= exhaustive, exhaustive <= relaxed
    let mut violations = [0usize; 3];
    let mut first = None;
    let mut ratio_sum = 0.0;
    let mut ratio_count = 0;
    for i in 0..200 {
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=3);
        let offers = menu_offers(&mut rng, &menu, m, n);
        let budget = rng.gen_range(0.0..=offers.total_transfer());
        let problem = SelectionProblem::new(offers, budget, 1000).unwrap();
        let best_snr = best_snr_baseline(&problem);
        let overall = overall_heuristic(&problem);
        let exact = exhaustive_optimum(&problem).unwrap();
        let bound = relaxed_upper_bound(&problem);
        for r in [&best_snr, &overall, &exact] {
            feas.check(r.method.label(), r.spend, budget);
        }
        let chain = [best_snr.capacity, overall.capacity, exact.capacity, bound];
        for j in 0..3 {
            if chain[j] > chain[j + 1] + SLACK {
                violations[j] += 1;
                first.get_or_insert(format!("#{i} M={m} N={n}: {chain:?}"));
            }
        }
        if exact.capacity > 0.0 {
            ratio_sum += overall.capacity / exact.capacity;
            ratio_count += 1;
        }
    }
    let mean_ratio = ratio_sum / ratio_count.max(1) as f64;
    let pass = violations == [0; 3] && mean_ratio >= 0.9;
    let mut detail = format!(
        "violations best_snr<=overall {}, overall<=exhaustive {}, exhaustive<=relaxed {}; \
         mean overall/exhaustive {mean_ratio:.4}",
        violations[0], violations[1], violations[2]
    );
    if let Some(first) = first {
        detail.push_str(&format!(" (first: {first})"));
    }
    outcome(pass, detail)
}

const SUBCARRIERS: usize = 16;
const TRIALS: usize = 1000;
const RELAYS: [usize; 5] = [2, 6, 10, 14, 18];
const BUDGETS: [f64; 3] = [8.0, 16.0, 24.0];

fn base_config() -> ExperimentConfig {
    ExperimentConfig {
        distribution: TypeDistribution::uniform(50.0, 300.0).unwrap(),
        quant: 10,
        subcarriers: SUBCARRIERS,
        cost: 1.0,
        trials: TRIALS,
        seed: 7,
        menu: MenuKind::SecondBest,
        information: Information::Asymmetric,
        ..ExperimentConfig::default()
    }
}

struct Cell {
    heuristic: (f64, f64),
    best_snr: (f64, f64),
    relaxed: (f64, f64),
}

fn run(config: &ExperimentConfig, relays: usize, budget: f64, feas: &mut Feasibility) -> Cell {
    let mechanism = Mechanism::new(config).unwrap();
    let rounds = run_cell(&mechanism, config, relays, budget).unwrap();
    for r in &rounds {
        feas.round(r, budget);
    }
    let rows = aggregate(&rounds, relays, budget, config.subcarriers);
    let pick = |s: Series| {
        let row = rows.iter().find(|r| r.series == s).unwrap();
        (row.mean_capacity, row.stderr)
    };
    Cell {
        heuristic: pick(Series::Overall),
        best_snr: pick(Series::BestSnr),
        relaxed: pick(Series::Relaxed),
    }
}

fn criterion7(feas: &mut Feasibility) -> Outcome {
    let start = Instant::now();
    let config = base_config();
    let mut grid = Vec::new();
    for &budget in &BUDGETS {
        for &relays in &RELAYS {
            grid.push(((relays, budget), run(&config, relays, budget, feas)));
        }
    }
    let cell = |relays: usize, budget: f64| {
        &grid
            .iter()
            .find(|(key, _)| *key == (relays, budget))
            .unwrap()
            .1
    };

    let mut notes = Vec::new();

    let a = grid.iter().all(|(_, c)| c.heuristic.0 >= c.best_snr.0);
    notes.push(format!("(a) {}", if a { "ok" } else { "FAIL" }));

    let mut b = true;
    for w in RELAYS.windows(2).filter(|w| w[0] >= 6) {
        let (lo, hi) = (cell(w[0], 8.0).best_snr, cell(w[1], 8.0).best_snr);
        let se = (lo.1 * lo.1 + hi.1 * hi.1).sqrt();
        if hi.0 > lo.0 + 2.0 * se {
            b = false;
        }
    }
    let series_b: Vec<String> = RELAYS
        .iter()
        .map(|&m| format!("{:.4}", cell(m, 8.0).best_snr.0))
        .collect();
    notes.push(format!(
        "(b) {} best-SNR@T=8 [{}]",
        if b { "ok" } else { "FAIL" },
        series_b.join(", ")
    ));

    let gap = |c: &Cell| (c.relaxed.0 - c.heuristic.0) / c.relaxed.0;
    let c_ok = RELAYS
        .iter()
        .all(|&m| gap(cell(m, 24.0)) < gap(cell(m, 8.0)));
    let gaps: Vec<String> = RELAYS
        .iter()
        .map(|&m| format!("{:.3}->{:.3}", gap(cell(m, 8.0)), gap(cell(m, 24.0))))
        .collect();
    notes.push(format!(
        "(c) {} gap T=8->24 [{}]",
        if c_ok { "ok" } else { "FAIL" },
        gaps.join(", ")
    ));

    let by_k: Vec<f64> = [3, 5, 10, 20]
        .iter()
        .map(|&k| {
            run(
                &ExperimentConfig {
                    quant: k,
                    ..config.clone()
                },
                10,
                16.0,
                feas,
            )
            .heuristic
            .0
        })
        .collect();
    let (lo, hi) = by_k
        .iter()
        .fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
    let spread = (hi - lo) / hi;
    let d = spread < 0.05;
    notes.push(format!(
        "(d) {} spread over K {:.2}%",
        if d { "ok" } else { "FAIL" },
        spread * 100.0
    ));

    let complete = ExperimentConfig {
        information: Information::Complete,
        ..config.clone()
    };
    let first_best = ExperimentConfig {
        menu: MenuKind::FirstBest,
        ..config.clone()
    };
    let mut e = true;
    for budget in [8.0, 24.0] {
        for &relays in &RELAYS {
            let ci = run(&complete, relays, budget, feas).heuristic.0;
            let sb = cell(relays, budget).heuristic.0;
            let fb = run(&first_best, relays, budget, feas).heuristic.0;
            if !(ci >= sb && sb >= fb) {
                e = false;
                notes.push(format!(
                    "    M={relays} T={budget}: complete {ci:.4}, second {sb:.4}, first {fb:.4}"
                ));
            }
        }
    }
    notes.push(format!("(e) {}", if e { "ok" } else { "FAIL" }));

    let elapsed = start.elapsed();
    let pass = a && b && c_ok && d && e && elapsed < Duration::from_secs(600);
    outcome(pass, format!("{elapsed:.1?}; {}", notes.join("; ")))
}

fn criterion8(feas: &Feasibility) -> Outcome {
    let mut detail = format!(
        "{} violations in {} selections",
        feas.violations.len(),
        feas.checked
    );
    if let Some(v) = feas.violations.first() {
        detail.push_str(&format!(" (first: {v})"));
    }
    outcome(feas.violations.is_empty(), detail)
}

fn median_time(mut f: impl FnMut()) -> f64 {
    f();
    let mut times: Vec<f64> = (0..7)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

fn criterion9() -> Outcome {
    const RES: u32 = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let items = |rng: &mut ChaCha8Rng, m: usize| -> (Vec<f64>, Vec<f64>) {
        let snr = (0..m).map(|_| rng.gen_range(1.0..200.0)).collect();
        let transfer = (0..m)
            .map(|_| rng.gen_range(1000..3000) as f64 / RES as f64)
            .collect();
        (snr, transfer)
    };

    let sizes = [100usize, 200, 400, 800, 1600];
    let (snr, transfer) = items(&mut rng, *sizes.last().unwrap());
    let by_m: Vec<f64> = sizes
        .iter()
        .map(|&m| median_time(|| drop(knapsack_01(&snr[..m], &transfer[..m], 20.0, RES))))
        .collect();

    let budgets = [10.0, 20.0, 40.0, 80.0, 160.0];
    let (snr, transfer) = items(&mut rng, 200);
    let by_t: Vec<f64> = budgets
        .iter()
        .map(|&t| median_time(|| drop(knapsack_01(&snr, &transfer, t, RES))))
        .collect();

    let xs: Vec<f64> = sizes.iter().map(|&m| m as f64).collect();
    let slope_m = slope(&xs, &by_m);
    let slope_t = slope(&budgets, &by_t);
    let ok = |s: f64| (0.8..=1.3).contains(&s);
    outcome(
        ok(slope_m) && ok(slope_t),
        format!("exponent over M {slope_m:.3}, over budget {slope_t:.3}"),
    )
}

fn main() -> ExitCode {
    let mut feas = Feasibility::default();
    // timing first, before the Monte Carlo runs warm up the thread pool
    let c9 = criterion9();
    let results = [
        ("1 reference contract table", criterion1()),
        ("2 no distortion at the top", criterion2()),
        ("3 IC/IR audit", criterion3()),
        ("4 bracket selection", criterion4()),
        ("5 knapsack oracle", criterion5(&mut feas)),
        ("6 selection sandwich", criterion6(&mut feas)),
        ("7 capacity trend properties", criterion7(&mut feas)),
    ];
    let c8 = criterion8(&feas);

    let mut failed = 0;
    let all: Vec<(&str, &Outcome)> = results
        .iter()
        .map(|(n, o)| (*n, o))
        .chain([("8 feasibility", &c8), ("9 DP scaling", &c9)])
        .collect();
    for (name, o) in all {
        println!(
            "criterion {name}: {} ({})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
