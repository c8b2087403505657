//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness: every criterion executes even when an
//! earlier one fails, and the process exits non-zero if any failed.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use randlab::bits::{decode_pair, decode_sd1, encode_sd1, encode_sd2, from_index, pair, BitCursor, BitString, LexIndex};
use randlab::chaos::{self, MicroState};
use randlab::complexity::{ComplexityKind, Estimator};
use randlab::dyadic::DyadicRational;
use randlab::machine::{Machine, Mode, PrefixProgram};
use randlab::measure::{Bernoulli, RecursiveMeasure, Uniform};
use randlab::mltests::{self, FiniteTest};
use randlab::omega::{halting_set_from_omega, Dovetailer};
use randlab::predictor::{self, ModelClass};
use randlab::selection::{self, Lifted, Rule, Script};
use randlab::seqstats::{self, DeficiencyFunction, DEFAULT_C};
use randlab::sources::{prng_stream, BitSource};
use randlab::tourney::{self, Tournament, TransitiveWitness};
use randlab::Error;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn all_up_to(max: usize) -> impl Iterator<Item = BitString> {
    (0..=max).flat_map(BitString::all_of_length)
}

fn bits_of(s: &str) -> BitString {
    s.parse().unwrap()
}

fn floor_log2_plus1(n: usize) -> usize {
    // ⌊log₂(n + 1)⌋ by repeated halving.
    let mut v = n + 1;
    let mut k = 0;
    while v > 1 {
        v /= 2;
        k += 1;
    }
    k
}

fn codes() -> Outcome {
    let strings: Vec<BitString> = all_up_to(12).collect();
    let mut failures = Vec::new();

    for (name, enc) in [("x'", encode_sd1 as fn(&BitString) -> BitString), ("x''", encode_sd2)] {
        let mut words: Vec<String> = strings.iter().map(|x| enc(x).to_string()).collect();
        words.sort();
        if words.windows(2).any(|w| w[1].starts_with(&w[0])) {
            failures.push(format!("{name} not prefix-free"));
        }
    }
    for x in &strings {
        let l = x.len();
        let d1 = encode_sd1(x);
        let d2 = encode_sd2(x);
        if d1.len() != 2 * l + 1 || d2.len() != l + 2 * floor_log2_plus1(l) + 1 {
            failures.push(format!("length law fails at {x}"));
        }
        let ones = d1.bits().iter().take_while(|&&b| b).count();
        if ones != l || d1.slice(l + 1, d1.len()) != *x {
            failures.push(format!("x' layout wrong at {x}"));
        }
        if decode_sd1(&d1.concat(x)).ok() != Some((x.clone(), x.clone())) {
            failures.push(format!("x' round trip fails at {x}"));
        }
        let mut cur = BitCursor::new(d2.bits());
        if cur.read_sd2().ok().as_ref() != Some(x) || cur.position() != d2.len() {
            failures.push(format!("x'' round trip fails at {x}"));
        }
    }
    let bad = strings
        .par_iter()
        .map(|x| {
            let head = encode_sd2(x);
            strings
                .iter()
                .filter(|y| {
                    let p = pair(x, y);
                    p.len() != head.len() + y.len() || decode_pair(&p).ok() != Some((x.clone(), (*y).clone()))
                })
                .count()
        })
        .sum::<usize>();
    if bad > 0 {
        failures.push(format!("{bad} pairs fail to round-trip"));
    }
    let n = strings.len();
    if failures.is_empty() {
        outcome(true, format!("{n} strings, {} pairs", n * n))
    } else {
        outcome(false, failures.into_iter().take(3).collect::<Vec<_>>().join("; "))
    }
}

fn counting_law() -> Outcome {
    let est = Estimator::default();
    let mut worst = String::new();
    for n in 0..=12usize {
        let table = est.table(ComplexityKind::C, n, &BitString::new());
        let values: Vec<usize> = BitString::all_of_length(n).map(|x| table.value(&x)).collect();
        for m in 0..=n {
            let count = values.iter().filter(|&&c| c < n - m).count();
            if count >= 1 << (n - m) {
                return outcome(false, format!("n={n} m={m}: {count} strings with C < {}", n - m));
            }
        }
        let below = values.iter().filter(|&&c| c < n).count();
        worst = format!("n=12: {below} of 4096 strings have C_upper < 12");
    }
    outcome(true, worst)
}

fn test_axiom() -> Outcome {
    let est = Estimator::default();
    let tests: Vec<Box<dyn FiniteTest>> = vec![
        Box::new(mltests::LeadingZeros),
        Box::new(mltests::Frequency),
        Box::new(mltests::OddPositions),
        Box::new(mltests::UniversalLower::new(est)),
    ];
    for t in &tests {
        for n in 0..=16 {
            let r = mltests::check_axiom(t.as_ref(), n);
            if !r.holds {
                return outcome(false, format!("{} violates the axiom at n={n}: {:?}", t.name(), r.counts));
            }
        }
    }
    let paper = [("01111", 0), ("10011", 1), ("11011", 1), ("10100", 2), ("11111", 3)];
    for (x, want) in paper {
        let got = mltests::OddPositions.level(&bits_of(x));
        if got != want {
            return outcome(false, format!("odd_positions({x}) = {got}, expected {want}"));
        }
    }
    outcome(true, "4 tests, n <= 16, odd-position examples exact")
}

fn direct_halting(machine: &Machine, n: usize, budget: u64) -> Vec<BitString> {
    all_up_to(n)
        .filter(|code| {
            let out = machine.run(&PrefixProgram::new(code.clone()), budget, Mode::Prefix).unwrap();
            out.halted() && out.bits_consumed == code.len()
        })
        .collect()
}

fn omega() -> Outcome {
    const L: usize = 12;
    const BUDGET: u64 = 100_000;
    let machine = Machine::new();
    let pool = |k| rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
    let d1 = pool(1).install(|| Dovetailer::new(&machine, L, BUDGET)).unwrap();
    let d8 = pool(8).install(|| Dovetailer::new(&machine, L, BUDGET)).unwrap();
    let horizon = d1.final_phase() + 10;
    let trace = d1.trace(horizon);
    if trace != d8.trace(horizon) {
        return outcome(false, "trace differs between 1 and 8 workers");
    }
    let mut last = DyadicRational::zero();
    for p in &trace {
        let v = DyadicRational::new(BigUint::parse_bytes(p.numerator_hex.as_bytes(), 16).unwrap(), p.exponent);
        if v < last {
            return outcome(false, format!("trace decreases at phase {}", p.phase));
        }
        if v != d1.approximation(p.phase).value {
            return outcome(false, format!("trace value at phase {} is not the exact sum", p.phase));
        }
        last = v;
    }
    let direct = direct_halting(&machine, L, BUDGET);
    let mut oracle = DyadicRational::zero();
    for p in &direct {
        oracle += &DyadicRational::pow2_neg(p.len() as u32);
    }
    if last != oracle || last.is_zero() || last >= DyadicRational::one() {
        return outcome(false, format!("final value {last} vs direct sum {oracle}"));
    }
    let approx = d1.approximation(horizon);
    for n in 0..=L {
        let got = halting_set_from_omega(&machine, &approx, n).unwrap();
        let mut want: Vec<BitString> = direct.iter().filter(|p| p.len() <= n).cloned().collect();
        want.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        if got != want {
            return outcome(false, format!("halting set for n={n} differs from direct enumeration"));
        }
    }
    outcome(true, format!("Omega_{L} = {last} ({:.6}), {} halting programs", last.to_f64(), direct.len()))
}

fn naive_largest(t: &Tournament) -> (usize, Vec<usize>) {
    fn orders(nodes: &[usize], t: &Tournament, acc: &mut Vec<usize>) -> bool {
        if acc.len() == nodes.len() {
            return true;
        }
        for &u in nodes {
            if !acc.contains(&u) && acc.iter().all(|&a| t.dominates(a, u)) {
                acc.push(u);
                if orders(nodes, t, acc) {
                    return true;
                }
                acc.pop();
            }
        }
        false
    }
    let n = t.n();
    let mut best = (0, vec![]);
    for mask in 0usize..1 << n {
        let nodes: Vec<usize> = (0..n).filter(|&u| mask >> u & 1 == 1).collect();
        if orders(&nodes, t, &mut Vec::new()) && (nodes.len() > best.0 || (nodes.len() == best.0 && nodes < best.1)) {
            best = (nodes.len(), nodes);
        }
    }
    best
}

fn tournament() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=12);
        let t = Tournament::random(n, &mut rng);
        let full = tourney::largest_transitive(&t).unwrap();
        let order: Vec<usize> = full.order.iter().copied().filter(|_| rng.gen_bool(0.7)).collect();
        let v = order.len() as i64;
        let s = TransitiveWitness { order };
        let e = t.encode();
        let ep = tourney::compress_with_witness(&t, &s).unwrap();
        let w = (n as f64).log2().ceil() as i64;
        if 2 * ep.len() as i64 != 2 * e.len() as i64 - v * (v - 1 - 2 * w) {
            return outcome(false, format!("savings identity fails at n={n}, v={v}"));
        }
        if tourney::reconstruct(&ep, n, s.len()).unwrap() != t {
            return outcome(false, format!("reconstruction fails at n={n}, v={v}"));
        }
    }
    let check = |t: &Tournament| {
        let w = tourney::largest_transitive(t).unwrap();
        let mut nodes = w.order.clone();
        nodes.sort();
        t.is_transitive_order(&w.order) && (w.len(), nodes) == naive_largest(t)
    };
    for n in 0..=5 {
        for bits in BitString::all_of_length(tourney::pair_count(n)) {
            if !check(&Tournament::decode(&bits, n).unwrap()) {
                return outcome(false, format!("exact search disagrees with brute force on {bits}"));
            }
        }
    }
    for _ in 0..100 {
        let t = Tournament::random(7, &mut rng);
        if !check(&t) {
            return outcome(false, format!("exact search disagrees with brute force on {}", t.encode()));
        }
    }
    let r = tourney::sample_and_check(8, 1000, 1).unwrap();
    let pass = r.fraction >= 1.0 - 1.0 / 8.0;
    outcome(
        pass,
        format!("fraction {:.3} with v <= {} (95% CI [{:.4}, {:.4}]), max v {}", r.fraction, r.bound, r.ci_low, r.ci_high, r.max_v),
    )
}

fn statistics() -> Outcome {
    let n = 1usize << 16;
    let delta = DeficiencyFunction::Log;
    let mut notes = Vec::new();
    let mut pass = true;

    let ones = seqstats::mc_ones(0..100, n, delta, DEFAULT_C);
    let ok = ones.iter().filter(|r| r.satisfied).count();
    pass &= ok >= 99;
    notes.push(format!("ones {ok}/100"));

    let est = Estimator::default();
    let cond = from_index(LexIndex(n as u64));
    let blocks = seqstats::mc_blocks(0..100, n, 3, delta, DEFAULT_C, |y| est.k_upper(y, &cond).value).unwrap();
    let ok = blocks.iter().filter(|r| r.satisfied).count();
    pass &= ok >= 99;
    notes.push(format!("blocks {ok}/100"));

    let grid: Vec<f64> = (0..=20).map(|k| 5.0 * k as f64).collect();
    let mut chernoff_ok = true;
    for p in [0.5, 0.25] {
        let pts = seqstats::mc_chernoff(1000, p, &grid, 10_000, 7).unwrap();
        chernoff_ok &= pts.iter().all(|q| q.satisfied);
    }
    pass &= chernoff_ok;
    notes.push(format!("chernoff {}", if chernoff_ok { "ok" } else { "exceeded" }));

    let runs = seqstats::mc_longest_zero_run(0..20, 1 << 20);
    let mean = runs.iter().map(|r| r.statistic).sum::<f64>() / runs.len() as f64;
    let center = seqstats::zero_run_center(1 << 20);
    let run_ok = (mean - center).abs() <= 2.0;
    pass &= run_ok;
    notes.push(format!("longest zero run mean {mean:.2} vs {center:.2} +/- 2"));
    outcome(pass, notes.join(", "))
}

fn chaos_criterion() -> Outcome {
    const STEPS: u64 = 1_000_000;
    let source = BitSource::prng(11);
    let reference = prng_stream(11, STEPS as usize + 64);
    let start = MicroState::new(source);
    if chaos::orbit_observables(&start, STEPS as usize) != reference.slice(0, STEPS as usize) {
        return outcome(false, "orbit observables differ from the initial expansion");
    }
    let mut s = start.clone();
    for t in 0..STEPS {
        if t % 9973 == 0 && s.observe().bit() != reference.bits()[t as usize] {
            return outcome(false, format!("observable at time {t} differs"));
        }
        s = s.step();
    }
    let tail = reference.slice(STEPS as usize, STEPS as usize + 64);
    if s.value(64) != DyadicRational::from_expansion(&tail) {
        return outcome(false, "state after 10^6 steps is not the shifted expansion");
    }
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let state = MicroState::new(BitSource::prng(1000 + seed));
        for mut p in chaos::predictor_library() {
            let e = chaos::evaluate_predictor(p.as_mut(), &state, 100_000);
            worst = worst.max((e.accuracy - 0.5).abs());
        }
    }
    outcome(worst <= 0.02, format!("shift exact over 10^6 steps; max |accuracy - 0.5| = {worst:.4}"))
}

fn prediction() -> Outcome {
    let class = ModelClass::uniform(vec![Arc::new(Uniform), Arc::new(Bernoulli::new(3, 2))]).unwrap();
    let traces = predictor::error_traces(&class, 1, 0..20, 10_000).unwrap();
    let mean = traces.iter().map(|t| t.total()).sum::<f64>() / 20.0;
    let half = traces.iter().map(|t| t.cumulative[4_999]).sum::<f64>() / 20.0;
    let reference = traces[0].reference;
    let monotone = traces.iter().all(|t| t.cumulative.windows(2).all(|w| w[0] <= w[1]));
    let sole = ModelClass::uniform(vec![Arc::new(Bernoulli::new(3, 2)) as Arc<dyn RecursiveMeasure>]).unwrap();
    let zero = (0..20).all(|s| {
        predictor::squared_error_trace(&sole, 0, s, 10_000).unwrap().cumulative.iter().all(|&e| e == 0.0)
    });
    let pass = monotone && zero && mean < reference + 1.0 && mean < 2.0 * half;
    outcome(pass, format!("mean cumulative error {mean:.4} (at half horizon {half:.4}) vs ln(1/w) + 1 = {:.4}", reference + 1.0))
}

fn selection_criterion() -> Outcome {
    let library = Rule::library();
    for x in all_up_to(12) {
        for rule in &library {
            let a = selection::select_mwc(rule, &x, 12);
            let b = selection::select_kl(&Lifted(rule), &x, 12).unwrap();
            if a.bits != b.bits || a.indices != b.selected_indices() {
                return outcome(false, format!("lifting of {rule} differs on {x}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let source = prng_stream(5, 64);
    for _ in 0..1000 {
        let len = rng.gen_range(2..=20);
        let mut pool: Vec<u64> = (1..=64).collect();
        let mut script: Vec<(u64, bool)> = (0..len)
            .map(|_| (pool.swap_remove(rng.gen_range(0..pool.len())), rng.gen()))
            .collect();
        let dup = script[rng.gen_range(0..len)].0;
        script.insert(rng.gen_range(0..=len), (dup, rng.gen()));
        let first_repeat = {
            let mut seen = HashSet::new();
            script.iter().find(|(i, _)| !seen.insert(*i)).unwrap().0
        };
        match selection::select_kl(&Script(script), &source, 100) {
            Err(Error::RepeatedIndex(i)) if i as u64 == first_repeat => {}
            other => return outcome(false, format!("duplicate index not detected: {other:?}")),
        }
    }
    let profile = selection::frequency_profile(&BitSource::champernowne(), 100_000);
    let r = selection::stability_report(&profile, 0.5, 0.05);
    let dev = (r.final_ratio - 0.5).abs();
    outcome(dev < 0.05, format!("lifting exhaustive l <= 12, 1000 duplicates caught, Champernowne |f_n/n - 1/2| = {dev:.4}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("codes", codes),
        ("counting law", counting_law),
        ("test axiom", test_axiom),
        ("halting probability", omega),
        ("tournaments", tournament),
        ("string statistics", statistics),
        ("doubling map", chaos_criterion),
        ("prediction", prediction),
        ("selection", selection_criterion),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let id = (k + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|a| *a == id || name.contains(a.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let took: Duration = start.elapsed();
        failed += usize::from(!o.pass);
        println!(
            "criterion {id} [{name}]: {} ({}) [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
