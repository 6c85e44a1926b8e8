//! Invariant suites behind `salem verify`.

use std::io::Write;

use clap::ValueEnum;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use salem_core::analysis::{collision_pair, jump_at, one_sided_approximants, CollisionFamily};
use salem_core::numerals::value_of;
use salem_core::sample::{random_expansion, random_p_rational};
use salem_core::selfaffine::{deterministic_points, ifs_maps};
use salem_core::{DigitExpansion, SalemSystem};

use crate::{build_integral_report, CliResult, RunConfig};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Equations,
    Affine,
    Collisions,
    Jumps,
    Integral,
}

const EQUATION_CASES: usize = 1000;
const AFFINE_DEPTH: usize = 6;
const AFFINE_CLOSURE_POINTS: usize = 200;
const COLLISION_PREFIXES: usize = 500;
const JUMP_POINTS: usize = 100;
const JUMP_DEPTH: usize = 40;

#[derive(Default)]
struct Tally {
    cases: usize,
    failures: usize,
    first: Option<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(detail());
            }
        }
    }
}

/// Writes `suite,cases,failures` rows and returns whether every case held.
/// First failures go to standard error.
pub fn run(
    suite: Suite,
    cfg: &RunConfig,
    sys: &SalemSystem,
    out: &mut dyn Write,
) -> CliResult<bool> {
    let selected: Vec<Suite> = match suite {
        Suite::All => vec![
            Suite::Equations,
            Suite::Affine,
            Suite::Collisions,
            Suite::Jumps,
            Suite::Integral,
        ],
        s => vec![s],
    };
    writeln!(out, "suite,cases,failures")?;
    let mut ok = true;
    for s in selected {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let tally = match s {
            Suite::Equations => equations(sys, &mut rng)?,
            Suite::Affine => affine(sys, &mut rng)?,
            Suite::Collisions => collisions(sys, &mut rng)?,
            Suite::Jumps => jumps(sys, &mut rng)?,
            Suite::Integral => integral(cfg, sys)?,
            Suite::All => unreachable!(),
        };
        let name = format!("{s:?}").to_lowercase();
        writeln!(out, "{name},{},{}", tally.cases, tally.failures)?;
        if let Some(first) = tally.first {
            eprintln!("{name}: first failure: {first}");
        }
        ok &= tally.failures == 0;
    }
    Ok(ok)
}

fn equations(sys: &SalemSystem, rng: &mut ChaCha8Rng) -> CliResult<Tally> {
    let mut t = Tally::default();
    for _ in 0..EQUATION_CASES {
        let e = random_expansion(rng, sys.q(), 6, 4);
        let n = rng.random_range(1..=8);
        let r = sys.residual(&e, n)?;
        t.check(r.is_zero(), || format!("residual {r} at {e}, n = {n}"));
    }
    Ok(t)
}

fn affine(sys: &SalemSystem, rng: &mut ChaCha8Rng) -> CliResult<Tally> {
    let mut t = Tally::default();
    let pts = deterministic_points(sys, AFFINE_DEPTH)?;
    for (x, y) in pts.exact().expect("deterministic points are exact") {
        let fx = sys.eval_at(x, 256)?;
        t.check(fx.digits.is_exact() && &fx.value == y, || {
            format!("({x}, {y}) is off the graph, f(x) = {}", fx.value)
        });
    }
    let maps = ifs_maps(sys);
    let top = (sys.q() - 1) as u8;
    for _ in 0..AFFINE_CLOSURE_POINTS {
        let e = random_expansion(rng, sys.q(), 4, 3);
        let x = value_of(&e, sys.params())?;
        let y = sys.eval(&e)?;
        for (i, map) in maps.iter().enumerate() {
            // ψ_t(1, f(1)) is the left limit at β_{t+1}, not a graph point
            if e.is_one() && i < top as usize {
                continue;
            }
            let (x2, y2) = map.apply((&x, &y));
            let f2 = sys.eval_at(&x2, 256)?;
            t.check(f2.digits.is_exact() && f2.value == y2, || {
                format!("ψ_{i}({x}, {y}) = ({x2}, {y2}) is off the graph")
            });
        }
    }
    Ok(t)
}

fn collisions(sys: &SalemSystem, rng: &mut ChaCha8Rng) -> CliResult<Tally> {
    let mut t = Tally::default();
    if sys.q() != 3 || !sys.is_theta2() {
        eprintln!("collisions: skipped, the families are specific to q = 3 with θ = 0,2,1");
        return Ok(t);
    }
    for _ in 0..COLLISION_PREFIXES {
        let len = rng.random_range(0..=8);
        let prefix: Vec<u8> = (0..len).map(|_| rng.random_range(0..3)).collect();
        let mut held = true;
        let mut detail = String::new();
        for family in [CollisionFamily::G1, CollisionFamily::G2] {
            match collision_pair(&prefix, family, sys) {
                Ok(c) => {
                    let x1 = value_of(&c.x1, sys.params())?;
                    let x2 = value_of(&c.x2, sys.params())?;
                    if x1 == x2 {
                        held = false;
                        detail = format!("{family:?} preimages {} and {} coincide", c.x1, c.x2);
                    }
                }
                Err(e) => {
                    held = false;
                    detail = e.to_string();
                }
            }
        }
        t.check(held, || detail);
    }
    Ok(t)
}

fn jumps(sys: &SalemSystem, rng: &mut ChaCha8Rng) -> CliResult<Tally> {
    let mut t = Tally::default();
    let bound = num_traits::pow(sys.params().max_weight(), JUMP_DEPTH);
    for _ in 0..JUMP_POINTS {
        let x0: DigitExpansion = random_p_rational(rng, sys.q(), 6);
        let r = jump_at(&x0, sys)?;
        let (left, right) = one_sided_approximants(&x0, JUMP_DEPTH)?;
        let fl = sys.eval(&left)?;
        let fr = sys.eval(&right)?;
        let near = (&fl - &r.left_limit).abs() <= bound && (&fr - &r.right_limit).abs() <= bound;
        // θ_2 is discontinuous at every such point; other rows need not be
        let jumps = !sys.is_theta2() || !r.jump.is_zero();
        t.check(near && jumps, || {
            format!(
                "{x0}: limits {} / {}, approximants {fl} / {fr}",
                r.left_limit, r.right_limit
            )
        });
    }
    Ok(t)
}

fn integral(cfg: &RunConfig, sys: &SalemSystem) -> CliResult<Tally> {
    let report = build_integral_report(cfg, sys)?;
    let mut t = Tally::default();
    t.check(report.enclosure_ok(), || {
        format!(
            "closed form {} outside [{}, {}]",
            report.closed, report.enclosure.lower, report.enclosure.upper
        )
    });
    t.check(report.monte_carlo_ok(), || {
        format!(
            "Monte Carlo {} ± {} vs {}",
            report.mc.estimate, report.mc.std_error, report.closed
        )
    });
    Ok(t)
}
