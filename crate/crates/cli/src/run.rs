use num_bigint::BigUint;
use serde_json::{json, Value};
use zfx_core::bounds::{
    color_ceiling_check, derivative_step, iterated_derivative, min_n_derivative, min_n_iterated, theorem_chain,
    verify_partial_dependence, ColoringOracle,
};
use zfx_core::probcore::{
    entropy, extractor_error, pushforward, source_distribution, stat_distance, symbol_code, symbols_of, Distribution,
    Source, Space, ZeroFixingSource,
};
use zfx_core::rng::{random_subset, rng_for};
use zfx_core::shiftlab::{color_tower, lambda_constructive, tower_budgets, verify_coloring, ShiftGraph};
use zfx_core::stepup::{
    measure_stepup, search_bitfixing_table, verify_decompositions, BitFixingExtractor, StepUpParams, DEFAULT_DELTA_HAT,
};
use zfx_core::symfix::{
    disperser_csv, measure_shift, search_f2, verify_disperser_sized, verify_shift_decompositions,
    verify_symbol_extractor, Disperser, SearchConfig, ShiftParams, SymbolTable,
};
use zfx_core::{Error, Mode};

use crate::config::{Command, F2Arg, Format, OracleArg, RunArgs, RunConfig};
use crate::report::{object, BoundRef, Report, Status};
use crate::RunError;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn big(v: &BigUint) -> Value {
    Value::String(v.to_string())
}

/// Dispatch one configuration. Guard violations and bad arguments are
/// errors; measured failures come back as a report with a failing status.
pub fn run(config: &RunConfig) -> Result<Report, RunError> {
    let start = std::time::Instant::now();
    let a = &config.args;
    let (status, bounds, result) = match config.command {
        Command::VerifyStepup => verify_stepup(a)?,
        Command::VerifyShift => verify_shift(a)?,
        Command::SearchF2 => search(a)?,
        Command::ColorShift => color_shift(a)?,
        Command::DisperserCheck => disperser_check(a)?,
        Command::UpperBound => upper_bound(a)?,
        Command::ProbcoreSelftest => selftest(a)?,
    };
    let mut report = Report::new(config.clone(), status, bounds, result);
    if a.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

/// Text to write for a report in the requested format.
pub fn render(report: &Report) -> String {
    match report.config.args.format {
        Format::Json => crate::report::to_json(report),
        Format::Csv => match (report.config.command, report.result.get("csv")) {
            (Command::DisperserCheck, Some(Value::String(s))) => s.clone(),
            _ => crate::report::to_csv(report),
        },
    }
}

type Outcome = Result<(Status, Vec<BoundRef>, Value), RunError>;

fn holds(ok: bool) -> Status {
    if ok {
        Status::Ok
    } else {
        Status::VerificationFailure
    }
}

fn verify_stepup(a: &RunArgs) -> Outcome {
    let (n_ground, k) = (a.n_ground_req()?, a.k_req()?);
    let p = StepUpParams::new(n_ground, k)?;
    let m = a.m.unwrap_or(1);
    let exec = a.exec();
    let delta_hat = a.delta_hat.unwrap_or(DEFAULT_DELTA_HAT);
    let f2 = match a.f2.unwrap_or(F2Arg::Parity) {
        F2Arg::Parity => BitFixingExtractor::parity(p.n)?,
        F2Arg::Interleaved => BitFixingExtractor::interleaved_parity(p.n, m)?,
        F2Arg::Prefix => BitFixingExtractor::prefix(p.n, m)?,
        F2Arg::Constant => BitFixingExtractor::constant(p.n, m, 0)?,
        F2Arg::Search => {
            let f2_k = ((delta_hat * k as f64).ceil() as usize).clamp(1, p.n);
            let target = a.eps.unwrap_or(0.5);
            let cands = a.max_candidates.unwrap_or(1000);
            search_bitfixing_table(p.n, f2_k, m, target, cands, a.seed_req()?, &exec)?.extractor
        }
    };
    let r = measure_stepup(n_ground, k, &f2, a.core_mode()?, delta_hat, &exec)?;
    let mut ok = r.bound_holds;
    let mut result = vec![("params", to_value(&p)), ("f2", to_value(&f2)), ("report", to_value(&r))];
    if a.decomposition {
        let s = verify_decompositions(n_ground, k, delta_hat, a.core_mode()?, &exec)?;
        ok &= s.max_distance <= 1e-12 && s.max_part_distance <= 1e-12 && s.weights_exact;
        result.push(("decomposition", to_value(&s)));
    }
    let bounds = vec![BoundRef {
        name: "bound_eps",
        value: json!(r.bound_eps),
        provenance: "verified error of F2 on bit-fixing sources with ceil(delta_hat k) stars plus the largest residual weight (mixture argument)",
    }];
    Ok((holds(ok), bounds, object(result)))
}

fn shift_table(a: &RunArgs, params: &ShiftParams) -> Result<Result<(SymbolTable, Value), (u64, f64)>, RunError> {
    let m = a.m.unwrap_or(1);
    let k_req = params.k_prime().min(params.p);
    match a.f2.unwrap_or(F2Arg::Search) {
        F2Arg::Constant => Ok(Ok((SymbolTable::constant(params.p, params.d, m, 0)?, json!({"kind": "constant"})))),
        F2Arg::Search => {
            let config = SearchConfig {
                seed: a.seed_req()?,
                max_candidates: a.max_candidates.unwrap_or(1000),
                target_eps: a.eps.unwrap_or(0.5),
                m_out: m,
            };
            match search_f2(params.p, k_req, params.d, &config, &a.exec()) {
                Ok(s) => {
                    let info = json!({"kind": "search", "k_req": k_req, "eps": s.eps, "candidates": s.candidates, "seed": s.seed, "lemma": s.lemma});
                    Ok(Ok((s.table, info)))
                }
                Err(Error::SearchFailure { candidates, best_eps }) => Ok(Err((candidates, best_eps))),
                Err(e) => Err(e.into()),
            }
        }
        other => Err(RunError::Usage(format!("--f2 {other:?} is not available for verify-shift"))),
    }
}

fn verify_shift(a: &RunArgs) -> Outcome {
    let params = ShiftParams::with_tower(a.n_ground_req()?, a.k_req()?, a.l_req()?)?;
    let exec = a.exec();
    let info = to_value(&params.info());
    let (table, f2_info) = match shift_table(a, &params)? {
        Ok(t) => t,
        Err((candidates, best_eps)) => {
            let r = object(vec![("params", info), ("f2", json!({"kind": "search", "candidates": candidates, "best_eps": best_eps}))]);
            return Ok((Status::SearchFailure, Vec::new(), r));
        }
    };
    let r = measure_shift(&params, &table, a.core_mode()?, &exec)?;
    let mut ok = r.bound_holds;
    let mut result = vec![("params", info), ("f2", f2_info), ("f2_table", to_value(&table)), ("report", to_value(&r))];
    if a.decomposition {
        let s = verify_shift_decompositions(&params, a.core_mode()?, &exec)?;
        ok &= s.max_distance <= 1e-12;
        result.push(("decomposition", to_value(&s)));
    }
    let bounds = vec![BoundRef {
        name: "bound_eps",
        value: json!(r.bound_eps),
        provenance: "verified error of F2 on special symbol-fixing sources with k' pairs plus the residual weight (mixture argument)",
    }];
    Ok((holds(ok), bounds, object(result)))
}

fn search(a: &RunArgs) -> Outcome {
    let (p, k_req, d) = (a.p_req()?, a.k_req()?, a.d_req()?);
    let exec = a.exec();
    let config = SearchConfig {
        seed: a.seed_req()?,
        max_candidates: a.max_candidates.unwrap_or(1000),
        target_eps: a.eps.unwrap_or(0.25),
        m_out: a.m.unwrap_or(1),
    };
    let lemma = zfx_core::symfix::lemma_bound(p, k_req, d, config.m_out, config.target_eps);
    let bounds = vec![BoundRef {
        name: "counting_condition",
        value: to_value(&lemma),
        provenance: "sufficient condition for a random table to work: log2 d <= ((log2 e)/3 eps^2 2^k - 2^m - 1)/(2p)",
    }];
    match search_f2(p, k_req, d, &config, &exec) {
        Ok(s) => {
            let again = verify_symbol_extractor(&s.table, k_req, &exec)?;
            let reproduced = again == s.eps;
            let r = object(vec![
                ("search", to_value(&s)),
                ("reverified_eps", json!(again)),
                ("reproduced", json!(reproduced)),
            ]);
            Ok((holds(reproduced), bounds, r))
        }
        Err(Error::SearchFailure { candidates, best_eps }) => {
            let r = json!({"candidates": candidates, "best_eps": best_eps, "target_eps": config.target_eps});
            Ok((Status::SearchFailure, bounds, r))
        }
        Err(e) => Err(e.into()),
    }
}

fn color_shift(a: &RunArgs) -> Outcome {
    let (n, l) = (a.n_ground_req()?, a.l_req()?);
    let c = color_tower(n, l)?;
    let mode = a.core_mode()?;
    let mono = verify_coloring(&c, &mode, &a.exec())?;
    let edges = match mode {
        Mode::Exhaustive => ShiftGraph::new(n, l)?.edge_count(),
        Mode::Sampled { count, .. } => count as u128,
    };
    let budgets = tower_budgets(n, l);
    let matches = c.color_count() as u64 == *budgets.last().unwrap();
    if let Some(path) = &a.export {
        let file = std::fs::File::create(path).map_err(|e| RunError::Io(format!("{path}: {e}")))?;
        c.tabulate()?.export(std::io::BufWriter::new(file))?;
    }
    let r = json!({
        "n": n,
        "l": l,
        "mode": mode,
        "provenance": c.provenance(),
        "color_count": c.color_count(),
        "budgets": budgets,
        "budget_matches": matches,
        "edges_checked": edges as u64,
        "monochromatic_edges": mono,
        "lambda_constructive": lambda_constructive(n),
    });
    let bounds = vec![BoundRef {
        name: "color_budget",
        value: json!(budgets.last()),
        provenance: "iterated blog budget of the coloring tower, starting from n colors on singletons",
    }];
    Ok((holds(mono == 0 && matches), bounds, r))
}

fn disperser_check(a: &RunArgs) -> Outcome {
    let (n, k, l) = (a.n_ground_req()?, a.k_req()?, a.l_req()?);
    let f = Disperser::new(n, k, l)?;
    let size = a.size.unwrap_or(f.guarantee_size());
    let r = verify_disperser_sized(&f, size, a.core_mode()?, &a.exec())?;
    let bounds = vec![BoundRef {
        name: "guarantee_size",
        value: json!(f.guarantee_size()),
        provenance: "restricted sets of size 2k + k/l must see every output value",
    }];
    let mut v = to_value(&r);
    v["csv"] = Value::String(disperser_csv(&r));
    Ok((holds(r.failures == 0), bounds, v))
}

fn oracle(a: &RunArgs, n_ground: u64, k: usize, m: u32) -> Result<ColoringOracle, RunError> {
    Ok(match a.oracle.unwrap_or(OracleArg::Seeded) {
        OracleArg::Seeded => ColoringOracle::seeded(n_ground, k, m, a.seed_req()?)?,
        OracleArg::Adversarial => ColoringOracle::adversarial(n_ground, k, m)?,
        OracleArg::File => {
            let path = a.oracle_file.as_ref().ok_or_else(|| RunError::Usage("missing --oracle-file".into()))?;
            let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{path}: {e}")))?;
            ColoringOracle::from_file_str(&text, n_ground, k, m)?
        }
    })
}

fn upper_bound(a: &RunArgs) -> Outcome {
    let (n_ground, k) = (a.n_ground_req()? as u64, a.k_req()?);
    let m = a.m.unwrap_or(2) as u32;
    let i = a.i.unwrap_or(1);
    let exec = a.exec();
    let phi = oracle(a, n_ground, k, m)?;
    let single = i == 1 && a.size.is_some();
    let target = if single { a.size.unwrap() } else { k };
    let guaranteed = if single || i == 1 {
        min_n_derivative(target, k, m).ok()
    } else {
        min_n_iterated(k as u32, m, i as u32).ok()
    };
    let is_guaranteed = guaranteed.as_ref().is_some_and(|g| BigUint::from(n_ground) >= *g);
    let mut bounds = vec![BoundRef {
        name: "guaranteed_N",
        value: guaranteed.as_ref().map_or(Value::Null, big),
        provenance: if i == 1 {
            "n m^(sum_{j <= k-1} C(n-1, j)) suffices for one derivative step"
        } else {
            "m^(exp^(i-1)_(m^k)(2^(k-i+1))) suffices for i iterated steps"
        },
    }];
    let run = if single {
        derivative_step(&phi, target, k, &exec).map(|r| (r.v.clone(), to_value(&r)))
    } else {
        iterated_derivative(&phi, k, i, &exec).map(|r| (r.v.clone(), to_value(&r)))
    };
    let mut result = vec![
        ("oracle", json!(phi.provenance())),
        ("guaranteed", json!(is_guaranteed)),
    ];
    if k >= 2 && k <= 16 && (m as u64) <= 1u64 << k && i >= 1 && i <= k {
        if let Ok(chain) = theorem_chain(k as u32, i as u32, m) {
            result.push(("chain", to_value(&chain)));
        }
    }
    let status = match run {
        Ok((v, details)) => {
            let dep = verify_partial_dependence(&phi, &v, k, i)?;
            let mut ok = dep.holds;
            result.push(("run", details));
            result.push(("dependence", to_value(&dep)));
            if v.len() == k {
                let c = color_ceiling_check(&phi, &v, k, i)?;
                ok &= c.pass;
                bounds.push(BoundRef {
                    name: "color_ceiling",
                    value: json!(c.bound),
                    provenance: "2^(k-i) + i distinct colors on the subsets of V",
                });
                result.push(("ceiling", to_value(&c)));
            }
            holds(ok)
        }
        Err(Error::GuaranteeFailure { stage, partial }) => {
            result.push(("failure", json!({"stage": stage, "partial": partial})));
            if is_guaranteed {
                Status::VerificationFailure
            } else {
                Status::FailedBelowGuarantee
            }
        }
        Err(e) => return Err(e.into()),
    };
    Ok((status, bounds, object(result)))
}

fn selftest(a: &RunArgs) -> Outcome {
    let seed = a.seed_req()?;
    let mut checks: Vec<Value> = Vec::new();
    let mut all = true;
    let mut check = |name: &str, pass: bool, detail: Value| {
        all &= pass;
        checks.push(json!({"name": name, "pass": pass, "detail": detail}));
    };
    for len in [1usize, 4, 10] {
        let u = Distribution::uniform(Space::Binary { len })?;
        check("entropy-of-uniform", (entropy(&u) - len as f64).abs() < 1e-9, json!({"len": len, "entropy": entropy(&u)}));
    }
    let a2 = Distribution::new(Space::Binary { len: 1 }, vec![(0, 1.0)])?;
    let b2 = Distribution::uniform(Space::Binary { len: 1 })?;
    let d = stat_distance(&a2, &b2)?;
    check("point-vs-uniform", d == 0.5, json!({"distance": d}));
    // seeded random probes
    let mut worst_gap = f64::NEG_INFINITY;
    let mut mix_gap = f64::NEG_INFINITY;
    for t in 0..200u64 {
        let mut r = rng_for(seed, t);
        let s1: Vec<usize> = random_subset(&mut r, 8, 3).into_iter().map(|x| x + 1).collect();
        let s2: Vec<usize> = random_subset(&mut r, 8, 4).into_iter().map(|x| x + 1).collect();
        let table: Vec<u64> = (0..256).map(|_| rand::Rng::random_range(&mut r, 0..4u64)).collect();
        let f = |c: u64| Some(table[c as usize]);
        let target = Space::Binary { len: 2 };
        let (x, y) = (
            source_distribution(&Source::ZeroFixing(ZeroFixingSource::new(8, &s1)?))?,
            source_distribution(&Source::ZeroFixing(ZeroFixingSource::new(8, &s2)?))?,
        );
        let gap = stat_distance(&pushforward(f, &x, target)?, &pushforward(f, &y, target)?)? - stat_distance(&x, &y)?;
        worst_gap = worst_gap.max(gap);
        let sources = [Source::ZeroFixing(ZeroFixingSource::new(8, &s1)?), Source::ZeroFixing(ZeroFixingSource::new(8, &s2)?)];
        let eps = extractor_error(f, &sources, target)?;
        let fx = pushforward(f, &x, target)?;
        let fy = pushforward(f, &y, target)?;
        let mixed = zfx_core::probcore::mix_distributions(target, &[(0.5, &fx), (0.5, &fy)])?;
        let e = stat_distance(&mixed, &Distribution::uniform(target)?)?;
        mix_gap = mix_gap.max(e - eps);
    }
    check("pushforward-contracts", worst_gap <= 1e-12, json!({"max_gap": worst_gap, "trials": 200}));
    check("mixture-error-at-most-max", mix_gap <= 1e-12, json!({"max_gap": mix_gap, "trials": 200}));
    let mut round_trip = true;
    for code in 0..81u64 {
        round_trip &= symbol_code(&symbols_of(code, 3, 4), 3) == code;
    }
    check("symbol-code-round-trip", round_trip, json!({"d": 3, "len": 4}));
    Ok((holds(all), Vec::new(), json!({"seed": seed, "checks": checks})))
}
