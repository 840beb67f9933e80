//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if a criterion fails without its impossibility
//! certificate.

use std::process::Command;
use std::time::Instant;

use num_bigint::BigUint;
use zfx_core::bounds::*;
use zfx_core::combin::binomial;
use zfx_core::shiftlab::*;
use zfx_core::stepup::*;
use zfx_core::symfix::*;
use zfx_core::{Error, Exec, Mode};

enum Verdict {
    Pass(String),
    /// Fails, and the failure is certified unavoidable.
    CertifiedFail(String),
    Fail(String),
}

fn c1(ex: &Exec) -> Verdict {
    let mut notes = Vec::new();
    for (n, k) in [(16, 3), (16, 4), (32, 4), (64, 5)] {
        let s = verify_decompositions(n, k, DEFAULT_DELTA_HAT, Mode::Exhaustive, ex).unwrap();
        let ok = s.supports as u128 == binomial(n as u64, k as u64)
            && s.max_distance <= 1e-12
            && s.max_part_distance <= 1e-12
            && s.weights_exact;
        notes.push(format!("({n},{k}) supports={} dist={:.1e}", s.supports, s.max_distance));
        if !ok {
            return Verdict::Fail(notes.join("; "));
        }
    }
    Verdict::Pass(notes.join("; "))
}

fn c2(ex: &Exec) -> Verdict {
    let mut notes = Vec::new();
    for (n, k, l) in [(20, 6, 2), (24, 8, 2), (30, 7, 3)] {
        let params = ShiftParams::with_tower(n, k, l).unwrap();
        let mode = if binomial(n as u64, k as u64) <= 1_000_000 {
            Mode::Exhaustive
        } else {
            Mode::Sampled { count: 10_000, seed: 2024 }
        };
        let s = verify_shift_decompositions(&params, mode, ex).unwrap();
        notes.push(format!("({n},{k},{l}) {} supports={} dist={:.1e}", mode.name(), s.supports, s.max_distance));
        if !(s.max_distance <= 1e-12 && s.partition_exact && s.weights_exact) {
            return Verdict::Fail(notes.join("; "));
        }
    }
    Verdict::Pass(notes.join("; "))
}

fn c3(ex: &Exec) -> Verdict {
    let mut checked = 0;
    for n in 2..=12 {
        for l in 1..n {
            let c = color_tower(n, l).unwrap();
            let mono = verify_coloring(&c, &Mode::Exhaustive, ex).unwrap();
            if mono != 0 || c.color_count() as u64 != *tower_budgets(n, l).last().unwrap() {
                return Verdict::Fail(format!("S({n},{l}): {mono} monochromatic edges, {} colors", c.color_count()));
            }
            checked += 1;
        }
    }
    let mut notes = vec![format!("{checked} exhaustive instances with n <= 12")];
    for l in 2..=4 {
        let c = color_tower(10_000, l).unwrap();
        let mono = verify_coloring(&c, &Mode::Sampled { count: 1_000_000, seed: 3 }, ex).unwrap();
        let budget = *tower_budgets(10_000, l).last().unwrap();
        notes.push(format!("n=10^4 l={l}: {} colors (budget {budget}), {mono} mono of 10^6", c.color_count()));
        if mono != 0 || c.color_count() as u64 != budget {
            return Verdict::Fail(notes.join("; "));
        }
    }
    Verdict::Pass(notes.join("; "))
}

fn c4() -> Verdict {
    let (mut cycles, mut brute) = (0, 0);
    for l in 2..=5 {
        for n in 2 * l + 1..=2 * l + 6 {
            let cyc = odd_cycle(n, l).unwrap();
            let closed = (0..cyc.len()).all(|i| {
                let (a, b) = (&cyc[i], &cyc[(i + 1) % cyc.len()]);
                shift_edge(a, b).unwrap() || shift_edge(b, a).unwrap()
            });
            let distinct = cyc.iter().collect::<std::collections::HashSet<_>>().len() == cyc.len();
            if !(closed && distinct && cyc.len() % 2 == 1) {
                return Verdict::Fail(format!("odd_cycle({n},{l}) invalid"));
            }
            cycles += 1;
            if ShiftGraph::new(n, l).unwrap().vertex_count() <= 24 {
                if chromatic_bruteforce(n, l).unwrap() < 3 {
                    return Verdict::Fail(format!("chi(S({n},{l})) < 3"));
                }
                brute += 1;
            }
        }
    }
    Verdict::Pass(format!("{cycles} odd cycles valid; chi >= 3 confirmed on {brute} instances"))
}

/// No 3x3 0/1 matrix has exactly two ones in each of its nine 2x2
/// rectangles, so every `t = 2` source sees error at least 1/4.
fn no_balanced_slice() -> bool {
    (0u32..512).all(|m| {
        let at = |r: usize, c: usize| m >> (3 * r + c) & 1;
        let pairs = [(0, 1), (0, 2), (1, 2)];
        !pairs.iter().all(|&(r1, r2)| {
            pairs.iter().all(|&(c1, c2)| at(r1, c1) + at(r1, c2) + at(r2, c1) + at(r2, c2) == 2)
        })
    })
}

fn c5(ex: &Exec) -> Verdict {
    let search = |seed| {
        let config = SearchConfig { seed, max_candidates: 1000, target_eps: 0.2, m_out: 1 };
        search_f2(3, 2, 3, &config, ex)
    };
    let mut successes = 0;
    let mut best = f64::INFINITY;
    let mut first = String::new();
    for seed in 7..27 {
        match search(seed) {
            Ok(found) => {
                let again = verify_symbol_extractor(&found.table, 2, ex).unwrap();
                if again != found.eps {
                    return Verdict::Fail(format!("seed {seed}: eps {} not reproduced ({again})", found.eps));
                }
                successes += 1;
                if seed == 7 {
                    first = format!("seed 7 eps {} after {} candidates", found.eps, found.candidates);
                }
            }
            Err(Error::SearchFailure { best_eps, .. }) => {
                best = best.min(best_eps);
                if seed == 7 {
                    first = format!("seed 7 failed, best eps {best_eps}");
                }
            }
            Err(e) => return Verdict::Fail(e.to_string()),
        }
    }
    let detail = format!("{first}; {successes}/20 seeds succeed; best eps over failures {best}");
    if successes >= 18 && first.contains("after") {
        Verdict::Pass(detail)
    } else if no_balanced_slice() && best >= 0.25 {
        Verdict::CertifiedFail(format!("{detail}; certificate: error is a multiple of 1/4 on two-pair sources and no 3x3 slice is balanced, so min eps = 1/4 > 0.2"))
    } else {
        Verdict::Fail(detail)
    }
}

fn c6(ex: &Exec) -> Verdict {
    let parity = BitFixingExtractor::parity(StepUpParams::new(16, 4).unwrap().n).unwrap();
    let a = measure_stepup(16, 4, &parity, Mode::Exhaustive, DEFAULT_DELTA_HAT, ex).unwrap();
    let params = ShiftParams::with_tower(24, 8, 2).unwrap();
    let k_req = params.k_prime().min(params.p);
    // one output bit on d >= 3 symbols: some pair collides, so 1/2 is the best worst case
    let config = SearchConfig { seed: 7, max_candidates: 1000, target_eps: 0.5, m_out: 1 };
    let f2 = match search_f2(params.p, k_req, params.d, &config, ex) {
        Ok(f) => f,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    let b = measure_shift(&params, &f2.table, Mode::Exhaustive, ex).unwrap();
    let detail = format!(
        "(16,4) parity: worst {:.4} <= {:.4} + {:.4}; (24,8,2) searched: worst {:.4} <= {:.4} + {:.4} over {} supports",
        a.worst_eps, a.f2_eps, a.residual_max, b.worst_eps, b.f2_eps, b.residual_max, b.supports
    );
    let ok = a.worst_eps <= a.f2_eps + a.residual_max + 1e-12 && b.worst_eps <= b.f2_eps + b.residual_max + 1e-12;
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn c7(ex: &Exec) -> Verdict {
    let Some(col) = find_coloring(8, 2, 3).unwrap() else {
        return Verdict::Fail("no 3-coloring of S(8,2) found".into());
    };
    if verify_coloring(&col, &Mode::Exhaustive, ex).unwrap() != 0 {
        return Verdict::Fail("searched coloring of S(8,2) is improper".into());
    }
    let f = Disperser::with_coloring(2, col).unwrap();
    let small = verify_disperser_sized(&f, 5, Mode::Exhaustive, ex).unwrap();
    let mut detail = format!("n=8 l=2 k=2: {} sets, {} failures", small.checked, small.failures);
    if small.checked != 56 || small.failures != 0 {
        return Verdict::Fail(detail);
    }
    // larger instance: |V| = 2k + k/l = 10 forces n >= 10
    let mut larger = None;
    for n in 10..=64 {
        if let Ok(f) = Disperser::new(n, 4, 2) {
            larger = Some(verify_disperser_sized(&f, 10, Mode::Sampled { count: 10_000, seed: 5 }, ex).unwrap());
            break;
        }
    }
    match larger {
        Some(r) if r.failures == 0 => Verdict::Pass(format!("{detail}; n={} l=2 k=4: {} sampled, 0 failures", r.n, r.checked)),
        Some(r) => Verdict::Fail(format!("{detail}; n={} l=2 k=4: {} failures", r.n, r.failures)),
        None => {
            let certified = find_coloring(9, 2, 3).unwrap().is_none() && find_coloring(10, 2, 3).unwrap().is_none();
            detail.push_str("; no n in 10..=64 admits a 3-coloring of S(n,2), so the l=2, k=4 instance cannot be built");
            if certified {
                Verdict::CertifiedFail(format!("{detail}; certificate: exact search finds no 3-coloring of S(9,2) or S(10,2), and S(9,2) is an induced subgraph of every larger S(n,2)"))
            } else {
                Verdict::Fail(detail)
            }
        }
    }
}

fn c8(ex: &Exec) -> Verdict {
    let (mut triples, mut runs) = (0, 0);
    for n in 1..=16usize {
        for k in 1..=n {
            for m in 2..=16u32 {
                let min = min_n_derivative(n, k, m).unwrap();
                if min > BigUint::from(100_000u32) {
                    continue;
                }
                let big: u64 = (&min).try_into().unwrap();
                triples += 1;
                for seed in 0..100 {
                    let phi = ColoringOracle::seeded(big, k, m, seed).unwrap();
                    let ok = derivative_step(&phi, n, k, ex)
                        .map(|r| verify_partial_dependence(&phi, &r.v, k, 1).unwrap().holds)
                        .unwrap_or(false);
                    if !ok {
                        return Verdict::Fail(format!("(n,k,m)=({n},{k},{m}) seed {seed} at N={big}"));
                    }
                    runs += 1;
                }
            }
        }
    }
    let mut detail = format!("{triples} (n,k,m) triples x 100 seeds = {runs} guaranteed runs verified");
    for i in 1..=2u32 {
        let guaranteed = min_n_iterated(3, 2, i).ok().filter(|g| *g <= BigUint::from(1_000_000u32));
        let (n_ground, label) = match &guaranteed {
            Some(g) => (u64::try_from(g).unwrap(), "guaranteed"),
            None => (1_000_000, "reduced"),
        };
        let mut successes = 0;
        let mut worst = 0;
        for seed in 0..100 {
            let phi = ColoringOracle::seeded(n_ground, 3, 2, seed).unwrap();
            match iterated_derivative(&phi, 3, i as usize, ex) {
                Ok(r) => {
                    let dep = verify_partial_dependence(&phi, &r.v, 3, i as usize).unwrap();
                    let c = color_ceiling_check(&phi, &r.v, 3, i as usize).unwrap();
                    if !dep.holds || !c.pass {
                        return Verdict::Fail(format!("i={i} seed {seed}: dependence {} ceiling {}/{}", dep.holds, c.distinct, c.bound));
                    }
                    successes += 1;
                    worst = worst.max(c.distinct);
                }
                Err(Error::GuaranteeFailure { .. }) if guaranteed.is_none() => {}
                Err(e) => return Verdict::Fail(format!("i={i} seed {seed} at {label} N={n_ground}: {e}")),
            }
        }
        let bound = (1u64 << (3 - i)) + i as u64;
        detail.push_str(&format!("; k=3 m=2 i={i} {label} N={n_ground}: {successes}/100 succeed, max colors {worst} <= {bound}"));
        if successes == 0 {
            return Verdict::Fail(detail);
        }
    }
    Verdict::Pass(detail)
}

fn c9() -> Verdict {
    let (mut cases, mut exact, mut interval) = (0, 0, 0);
    for k in 2..=8u32 {
        for i in 1..=k {
            for m in 2..=(1u32 << k) {
                let c = theorem_chain(k, i, m).unwrap();
                if !c.holds {
                    return Verdict::Fail(format!("(k,i,m)=({k},{i},{m}): {:?}", c.links));
                }
                cases += 1;
                for l in &c.links {
                    match l.method {
                        CheckMethod::Exact => exact += 1,
                        CheckMethod::Interval => interval += 1,
                        CheckMethod::Undecided => return Verdict::Fail(format!("({k},{i},{m}) {} undecided", l.name)),
                    }
                }
            }
        }
    }
    for i in 1..=4 {
        for r in 2..=16u128 {
            for x in 1..=8u128 {
                let e = check_exp_inequality(i, r, x).unwrap();
                if !e.holds {
                    return Verdict::Fail(format!("exp inequality fails at i={i} r={r} x={x}"));
                }
            }
        }
    }
    Verdict::Pass(format!(
        "{cases} (k,i,m) chains hold; {exact} links by exact integers, {interval} by directed-rounding towers where values exceed 10^6 digits; exp inequality holds on i<=4, r<=16, x<=8"
    ))
}

fn c10() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_zfx");
    let cases: &[&[&str]] = &[
        &["verify-stepup", "--N", "16", "--k", "4", "--mode", "sampled", "--samples", "500", "--seed", "3"],
        &["verify-stepup", "--N", "16", "--k", "3", "--f2", "search", "--seed", "4"],
        &["verify-shift", "--N", "20", "--k", "6", "--l", "2", "--seed", "7", "--mode", "sampled", "--samples", "2000"],
        &["search-f2", "--p", "3", "--k", "2", "--d", "3", "--m", "1", "--eps", "0.25", "--seed", "7", "--max-candidates", "2000"],
        &["color-shift", "--N", "2000", "--l", "3", "--mode", "sampled", "--samples", "50000", "--seed", "1"],
        &["disperser-check", "--N", "8", "--k", "2", "--l", "2", "--mode", "sampled", "--samples", "50", "--seed", "2"],
        &["upper-bound", "--N", "48", "--k", "3", "--m", "2", "--seed", "5"],
        &["probcore-selftest", "--seed", "9"],
        &["sweep", "--template", "verify-shift", "--vary", "k=5..7", "--N", "14", "--l", "2", "--seed", "1"],
    ];
    for args in cases {
        let out = |workers: &str| {
            let o = Command::new(bin).args(*args).args(["--workers", workers]).output().unwrap();
            (o.status.code(), o.stdout)
        };
        let runs = [out("1"), out("1"), out("4"), out("4")];
        if runs[0].0 != Some(0) {
            return Verdict::Fail(format!("{} exited with {:?}", args[0], runs[0].0));
        }
        if runs.iter().any(|r| r != &runs[0]) {
            return Verdict::Fail(format!("{} reports differ across runs or worker counts", args.join(" ")));
        }
    }
    Verdict::Pass(format!("{} seeded invocations byte-identical over 2 runs x workers {{1,4}}", cases.len()))
}

fn main() {
    // `cargo test -- --list` and filters: this target has no sub-tests
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let ex = Exec::default();
    type Check<'a> = (u32, &'a str, Box<dyn Fn() -> Verdict + 'a>);
    let checks: Vec<Check> = vec![
        (1, "tree decomposition exactness", Box::new(|| c1(&ex))),
        (2, "shift decomposition exactness", Box::new(|| c2(&ex))),
        (3, "coloring tower soundness", Box::new(|| c3(&ex))),
        (4, "odd cycles", Box::new(c4)),
        (5, "symbol extractor search at eps 0.2", Box::new(|| c5(&ex))),
        (6, "end-to-end mixture bound", Box::new(|| c6(&ex))),
        (7, "disperser surjectivity", Box::new(|| c7(&ex))),
        (8, "greedy homogenization", Box::new(|| c8(&ex))),
        (9, "tower inequality chain", Box::new(c9)),
        (10, "report determinism", Box::new(c10)),
    ];
    let mut unexpected = 0;
    for (id, name, f) in &checks {
        let t = Instant::now();
        let v = f();
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match v {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::CertifiedFail(d) => ("FAIL", format!("{d} [expected: certified impossible]")),
            Verdict::Fail(d) => {
                unexpected += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {id:>2} {tag} {name} ({secs:.1}s): {detail}");
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed without an impossibility certificate");
        std::process::exit(1);
    }
}
