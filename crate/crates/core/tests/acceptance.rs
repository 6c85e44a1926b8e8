//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.
//!
//! Values are checked against oracles written here from first principles
//! (plain geometric series and base-3 arithmetic), not against the library's
//! own evaluation paths.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use salem_core::analysis::{
    collision_pair, derivative_ratio, expected_log_slope, fixed_point_scan, integral_bracket,
    integral_closed_form, integral_monte_carlo, jump_at, monotonicity_witness,
    one_sided_approximants, predicted_bracket_gap, CollisionFamily, FixedPointScan,
};
use salem_core::rational::{frac, int, ln_abs, to_f64};
use salem_core::sample::{random_expansion, random_p_rational, random_params, DigitSampler};
use salem_core::selfaffine::{deterministic_points, ifs_maps};
use salem_core::{DigitExpansion, DigitPermutation, PartitionParams, Rational, SalemSystem};

fn reference_sets() -> [(&'static str, PartitionParams); 3] {
    [
        (
            "1/3,1/3,1/3",
            PartitionParams::parse("1/3,1/3,1/3").unwrap(),
        ),
        (
            "1/2,1/4,1/4",
            PartitionParams::parse("1/2,1/4,1/4").unwrap(),
        ),
        (
            "1/2,1/3,1/6",
            PartitionParams::parse("1/2,1/3,1/6").unwrap(),
        ),
    ]
}

fn theta(params: &PartitionParams, m: usize) -> SalemSystem {
    SalemSystem::ternary(params.clone(), m).unwrap()
}

/// Value of `prefix (period)` under weights `p`, an empty period meaning
/// `(0)`: sum the prefix terms, then the periodic tail as a geometric series.
fn oracle_value(p: &[Rational], prefix: &[u8], period: &[u8]) -> Rational {
    let beta = |d: u8| p[..d as usize].iter().fold(Rational::zero(), |a, b| a + b);
    let mut value = Rational::zero();
    let mut scale = Rational::one();
    for &d in prefix {
        value += &scale * beta(d);
        scale *= &p[d as usize];
    }
    if period.is_empty() {
        return value;
    }
    let mut block = Rational::zero();
    let mut block_scale = Rational::one();
    for &d in period {
        block += &block_scale * beta(d);
        block_scale *= &p[d as usize];
    }
    value + scale * block / (Rational::one() - block_scale)
}

/// `f(e)` under permutation `table`: the oracle value of the mapped digits.
fn oracle_f(p: &[Rational], table: &[u8], e: &DigitExpansion) -> Rational {
    let map = |ds: &[u8]| ds.iter().map(|&d| table[d as usize]).collect::<Vec<_>>();
    let period = if e.period().is_empty() {
        vec![0]
    } else {
        e.period().to_vec()
    };
    oracle_value(p, &map(e.prefix()), &map(&period))
}

/// Base-3 value of `prefix (period)` as integer ratios.
fn ternary_value(prefix: &[u8], period: &[u8]) -> Rational {
    let as_int = |ds: &[u8]| ds.iter().fold(BigInt::zero(), |a, &d| a * 3 + d);
    let shift = BigInt::from(3).pow(prefix.len() as u32);
    let head = Rational::new(as_int(prefix), shift.clone());
    if period.is_empty() {
        return head;
    }
    let cycle = BigInt::from(3).pow(period.len() as u32) - 1;
    head + Rational::new(as_int(period), cycle * shift)
}

type Criterion = (&'static str, fn() -> Outcome);

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

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    for _ in 0..100 {
        let params = random_params(&mut rng, 3, 50);
        let p = params.weights();
        let printed = (&p[1] * &p[1] + &p[0] * &p[1] + &p[0] * &p[2])
            / (int(1) - &p[0] * &p[0] - int(2) * &p[1] * &p[2]);
        if integral_closed_form(&theta(&params, 2)) != printed {
            mismatches += 1;
        }
    }
    let equal = integral_closed_form(&theta(&reference_sets()[0].1, 2));
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && equal == frac(1, 2) && within(elapsed, 1),
        format!("100 random triples, {mismatches} mismatches; equal weights give {equal}; {elapsed:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let tolerances = [1e-6, 1e-6, 4e-6];
    let mut pass = true;
    let mut parts = Vec::new();
    for ((name, params), tol) in reference_sets().into_iter().zip(tolerances) {
        let sys = theta(&params, 2);
        let closed = integral_closed_form(&sys);
        let b = integral_bracket(&sys, 12).unwrap();
        let gap = b.gap();
        let ok = b.contains(&closed)
            && gap == predicted_bracket_gap(&sys, 12)
            && to_f64(&gap) <= tol
            && b.cylinders <= 531_441;
        pass &= ok;
        parts.push(format!(
            "p=({name}) gap {:.3e} (limit {tol:.0e}) contains {} {}",
            to_f64(&gap),
            b.contains(&closed),
            if ok { "ok" } else { "FAILED" }
        ));
    }
    let elapsed = start.elapsed();
    pass &= within(elapsed, 30);
    parts.push(format!("{elapsed:.2?}"));
    outcome(pass, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, params) in reference_sets() {
        let sys = theta(&params, 2);
        let closed = to_f64(&integral_closed_form(&sys));
        let mc = integral_monte_carlo(&sys, 1_000_000, 2024);
        let z = (mc.estimate - closed) / mc.std_error;
        pass &= z.abs() <= 4.0;
        parts.push(format!(
            "p=({name}) {:.6} vs {closed:.6}, z = {z:.2}",
            mc.estimate
        ));
    }
    let elapsed = start.elapsed();
    pass &= within(elapsed, 60);
    parts.push(format!("{elapsed:.2?}"));
    outcome(pass, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut nonzero = 0;
    let mut cases = 0;
    for perm in DigitPermutation::builtin_permutations() {
        for _ in 0..1000 {
            let params = random_params(&mut rng, 3, 30);
            let sys = SalemSystem::new(params, perm.clone()).unwrap();
            let e = random_expansion(&mut rng, 3, 6, 4);
            let n = rng.random_range(1..=10);
            cases += 1;
            if !sys.residual(&e, n).unwrap().is_zero() {
                nonzero += 1;
            }
        }
    }
    outcome(
        nonzero == 0,
        format!("{cases} cases over 6 permutations, {nonzero} nonzero residuals"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    for family in [CollisionFamily::G1, CollisionFamily::G2] {
        for _ in 0..500 {
            let params = random_params(&mut rng, 3, 30);
            let sys = theta(&params, 2);
            let len = rng.random_range(0..=10);
            let prefix: Vec<u8> = (0..len).map(|_| rng.random_range(0..3)).collect();
            let p = params.weights();
            let ok = collision_pair(&prefix, family, &sys).is_ok_and(|c| {
                let f1 = oracle_f(p, &[0, 2, 1], &c.x1);
                let f2 = oracle_f(p, &[0, 2, 1], &c.x2);
                let x1 = oracle_value(p, c.x1.prefix(), c.x1.period());
                let x2 = oracle_value(p, c.x2.prefix(), c.x2.period());
                f1 == f2 && f1 == c.fx && x1 != x2
            });
            if !ok {
                bad += 1;
            }
        }
    }
    outcome(
        bad == 0,
        format!("1000 pairs (500 per family), {bad} failures"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let k = 40;
    let mut bad = 0;
    let mut zero_jumps = 0;
    for _ in 0..100 {
        let params = random_params(&mut rng, 3, 30);
        let sys = theta(&params, 2);
        let p = params.weights();
        let x0 = random_p_rational(&mut rng, 3, 8);
        let r = jump_at(&x0, &sys).unwrap();
        let (left, right) = one_sided_approximants(&x0, k).unwrap();
        let bound = num_traits::pow(params.max_weight(), k);
        let fl = oracle_f(p, &[0, 2, 1], &left);
        let fr = oracle_f(p, &[0, 2, 1], &right);
        if (&fl - &r.left_limit).abs() > bound || (&fr - &r.right_limit).abs() > bound {
            bad += 1;
        }
        if r.jump.is_zero() {
            zero_jumps += 1;
        }
    }
    outcome(
        bad == 0 && zero_jumps == 0,
        format!(
            "100 points, K = {k}: {bad} limits off by more than max(p)^K, {zero_jumps} zero jumps"
        ),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut off_graph = 0;
    let mut count = 0;
    let params = reference_sets()[2].1.clone();
    let sys = theta(&params, 2);
    let pts = deterministic_points(&sys, 10).unwrap();
    for (x, y) in pts.exact().unwrap() {
        count += 1;
        let ev = sys.eval_at(x, 512).unwrap();
        if !ev.digits.is_exact() || &ev.value != y {
            off_graph += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = params.weights();
    let maps = ifs_maps(&sys);
    let mut closure_bad = 0;
    let mut images = 0;
    for _ in 0..1000 {
        let e = random_expansion(&mut rng, 3, 5, 4);
        let x = oracle_value(p, e.prefix(), e.period());
        let y = oracle_f(p, &[0, 2, 1], &e);
        for (t, map) in maps.iter().enumerate() {
            // the image of (1, f(1)) under ψ_0, ψ_1 is a one-sided limit
            if e.is_one() && t < 2 {
                continue;
            }
            images += 1;
            let (x2, y2) = map.apply((&x, &y));
            let ev = sys.eval_at(&x2, 512).unwrap();
            if !ev.digits.is_exact() || ev.value != y2 {
                closure_bad += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        off_graph == 0 && count == 59_049 && closure_bad == 0 && within(elapsed, 60),
        format!(
            "{count} depth-10 points, {off_graph} off the graph; {images} ψ-images of 1000 graph points, {closure_bad} off; {elapsed:.2?}"
        ),
    )
}

fn mean_log_slope(sys: &SalemSystem, streams: usize, len: usize, seed: u64) -> f64 {
    let sampler = DigitSampler::new(sys.params());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = (0..streams)
        .map(|_| {
            let digits = sampler.stream(&mut rng, len);
            ln_abs(&derivative_ratio(&digits, sys).unwrap()) / len as f64
        })
        .sum();
    total / streams as f64
}

fn criterion_8() -> Outcome {
    let expected = (1.0f64 / 6.0) * 0.5f64.ln();
    let sys = theta(&reference_sets()[2].1, 2);
    let mean = mean_log_slope(&sys, 200, 2000, 8);
    let formula = expected_log_slope(&sys);
    let symmetric = theta(&reference_sets()[1].1, 2);
    let reported = mean_log_slope(&symmetric, 200, 2000, 8);
    outcome(
        (mean - expected).abs() <= 0.01 && (formula - expected).abs() < 1e-12,
        format!(
            "mean {mean:.5} vs {expected:.5} (tolerance 0.01); p=(1/2,1/4,1/4) reported only: mean {reported:.5}, expected {:.5}",
            expected_log_slope(&symmetric)
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, params) in reference_sets() {
        let sys = theta(&params, 2);
        let p = params.weights();
        let witness = monotonicity_witness(&sys).unwrap().is_some_and(|(a, b)| {
            oracle_value(p, a.prefix(), a.period()) < oracle_value(p, b.prefix(), b.period())
                && oracle_f(p, &[0, 2, 1], &a) > oracle_f(p, &[0, 2, 1], &b)
        });
        let fixed = match fixed_point_scan(&sys, 8).unwrap() {
            FixedPointScan::Points(v) => v,
            FixedPointScan::Identity => Vec::new(),
        };
        let only_zero = fixed.len() == 1 && fixed[0].is_zero();
        pass &= witness && only_zero;
        parts.push(format!(
            "p=({name}) witness {witness}, fixed points {}",
            fixed.len()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let params = reference_sets()[0].1.clone();
    let f2 = theta(&params, 2);
    let f6 = theta(&params, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut bad2 = 0;
    let mut bad6 = 0;
    for _ in 0..1000 {
        let e = random_expansion(&mut rng, 3, 6, 4);
        let swap = |ds: &[u8]| {
            ds.iter()
                .map(|&d| [0, 2, 1][d as usize])
                .collect::<Vec<u8>>()
        };
        let period = if e.period().is_empty() {
            vec![0]
        } else {
            e.period().to_vec()
        };
        let x = ternary_value(e.prefix(), &period);
        if f2.eval(&e).unwrap() != ternary_value(&swap(e.prefix()), &swap(&period)) {
            bad2 += 1;
        }
        if f6.eval(&e).unwrap() != int(1) - x {
            bad6 += 1;
        }
    }
    outcome(
        bad2 == 0 && bad6 == 0,
        format!("1000 expansions: {bad2} ternary digit-swap mismatches, {bad6} where θ_6 differs from 1 - x"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("integral closed form", criterion_1),
        ("certified quadrature", criterion_2),
        ("Monte Carlo cross-check", criterion_3),
        ("functional equation residuals", criterion_4),
        ("collision pairs", criterion_5),
        ("one-sided limits and jumps", criterion_6),
        ("self-affine graph", criterion_7),
        ("derivative decay rate", criterion_8),
        ("non-monotonicity and fixed point", criterion_9),
        ("ternary regression", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!(
            "{} criterion {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
