//! Acceptance run: one PASS/FAIL line per criterion, with the pinned
//! budgets and tolerances. Exits non-zero when any criterion fails.

use std::time::{Duration, Instant};

use chern_core::blocks::check_block_lemmas;
use chern_core::decomposer::{so5_decomposition, theorem_bound, Engine};
use chern_core::oracle::{
    check_decomposition, check_pigeonhole_lemmas, verify_decomposition, verify_theorem, GoodSource,
};
use chern_core::{EnumerationCaps, Monomial, PowerProduct, VarId};
use chern_holonomy::matrix::{GROUP_TOL, STRUCTURE_TOL};
use chern_holonomy::{duality_check, kappa_homomorphism, stress_lemma, FormSpec, StressConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fixed seed of every randomized criterion.
const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Canonical ring symbols over `{1, …, n}`: `y+ij` for `i ≤ j`, `y-ij` for `i < j`.
fn symbols(n: u32) -> Vec<VarId> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in i..=n {
            out.push(VarId::plus(i, j));
            if i < j {
                out.push(VarId::minus(i, j));
            }
        }
    }
    out
}

fn random_monomial(n: u32, degree: u32, rng: &mut ChaCha8Rng) -> Monomial {
    let syms = symbols(n);
    Monomial::unit(PowerProduct::from_factors(
        (0..degree).map(|_| (syms[rng.random_range(0..syms.len())], 1)),
    ))
}

/// Every power product of the given degree in the symbols over `{1, …, n}`.
fn all_monomials(n: u32, degree: u32) -> Vec<Monomial> {
    fn go(syms: &[VarId], left: u32, acc: &mut Vec<(VarId, u32)>, out: &mut Vec<Monomial>) {
        match syms.split_first() {
            None if left == 0 => out.push(Monomial::unit(PowerProduct::from_factors(
                acc.iter().copied(),
            ))),
            None => {}
            Some((s, rest)) => {
                for e in 0..=left {
                    if e > 0 {
                        acc.push((*s, e));
                    }
                    go(rest, left - e, acc, out);
                    if e > 0 {
                        acc.pop();
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    go(&symbols(n), degree, &mut Vec::new(), &mut out);
    out
}

fn rank_one() -> Outcome {
    let mut checked = 0;
    for g in 1..=3 {
        for d in 2 * g..=2 * g + 4 {
            let r = verify_theorem(1, g, d, GoodSource::Enumerate(EnumerationCaps::default()))
                .map_err(|e| e.to_string())?;
            ensure(r.passed(), || {
                format!(
                    "g={g} d={d}: {}/{} certified",
                    r.certified(),
                    r.monomials.len()
                )
            })?;
            checked += r.monomials.len();
        }
    }
    Ok(format!(
        "g=1..3, degrees 2g..2g+4: {checked} monomials certified"
    ))
}

fn rank_two() -> Outcome {
    let mut details = Vec::new();
    for (g, expect) in [(1u32, 9usize), (2, 17)] {
        let r = verify_theorem(2, g, 8 * g, GoodSource::So5Basis).map_err(|e| e.to_string())?;
        ensure(r.passed() && r.monomials.len() == expect, || {
            format!(
                "g={g}: {}/{} certified (expected {expect})",
                r.certified(),
                r.monomials.len()
            )
        })?;
        let inputs = all_monomials(2, 8 * g);
        let mut engine = Engine::new(g);
        for m in &inputs {
            let so5 = so5_decomposition(m, g).map_err(|e| format!("so5 {m}: {e}"))?;
            ensure(verify_decomposition(&so5), || {
                format!("so5 certificate for {m} rejected")
            })?;
            let full = engine
                .decompose(m, 2)
                .map_err(|e| format!("full {m}: {e}"))?;
            ensure(verify_decomposition(&full), || {
                format!("full certificate for {m} rejected")
            })?;
        }
        details.push(format!(
            "g={g}: {expect}/{expect} certified, {} inputs decomposed both ways",
            inputs.len()
        ));
    }
    Ok(details.join("; "))
}

fn rank_three() -> Outcome {
    let caps = EnumerationCaps {
        depth: 3,
        blocks: 2,
    };
    let r = verify_theorem(3, 1, 19, GoodSource::Enumerate(caps)).map_err(|e| e.to_string())?;
    ensure(r.monomials.len() == 210, || {
        format!("{} monomials, expected 210", r.monomials.len())
    })?;
    ensure(r.passed(), || {
        format!(
            "{}/210 certified under caps {caps}; the rest are not certified under caps",
            r.certified()
        )
    })?;
    Ok(format!(
        "210/210 certified under caps {caps} (rank {} of {}, {} goods)",
        r.rank, r.dimension, r.goods
    ))
}

fn soundness() -> Outcome {
    let mut done = Vec::new();
    for (k, (n, g)) in [(2u32, 1u32), (2, 2), (3, 1)].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        rng.set_stream(k as u64);
        let degree = theorem_bound(g, n as usize) as u32;
        let inputs: Vec<Monomial> = (0..500)
            .map(|_| random_monomial(n, degree, &mut rng))
            .collect();
        // One engine per worker; each worker takes a contiguous slice of the inputs.
        let chunk = inputs.len().div_ceil(workers());
        let results: Vec<Result<(), String>> = std::thread::scope(|s| {
            let handles: Vec<_> = inputs
                .chunks(chunk)
                .map(|part| {
                    s.spawn(move || {
                        let mut engine = Engine::new(g);
                        for m in part {
                            let dec = engine
                                .decompose(m, n)
                                .map_err(|e| format!("(n={n}, g={g}) {m}: {e}"))?;
                            let check = check_decomposition(&dec).map_err(|e| e.to_string())?;
                            ensure(check.passed(), || format!("(n={n}, g={g}) {m}: {check:?}"))?;
                        }
                        Ok(())
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        });
        results.into_iter().collect::<Result<Vec<()>, String>>()?;
        done.push(format!("({n},{g}) d={degree}"));
    }
    Ok(format!(
        "500 random monomials each at {}, all re-verified by normal form",
        done.join(", ")
    ))
}

fn lemma_suites() -> Outcome {
    let blocks = check_block_lemmas(6);
    ensure(blocks.passed(), || {
        format!(
            "block rules: {} failures, e.g. {:?}",
            blocks.failures.len(),
            blocks.failures.first()
        )
    })?;
    let pig = check_pigeonhole_lemmas(8, 3);
    ensure(pig.passed(), || {
        let bad: Vec<_> = pig
            .lemmas
            .iter()
            .filter(|l| !l.failures.is_empty())
            .map(|l| l.lemma.clone())
            .collect();
        format!("degree-counting lemmas failing: {bad:?}")
    })?;
    let instances: usize = pig.lemmas.iter().map(|l| l.instances).sum();
    Ok(format!(
        "block rules |X| ≤ 6 ({} instances), degree-counting lemmas m ≤ 8, g ≤ 3 ({instances} instances)",
        blocks.sym_diff_instances + blocks.restrict_instances + blocks.extend_instances + blocks.combine_instances
    ))
}

fn stress_grid() -> Outcome {
    let mut runs = 0;
    let mut torus = 0;
    for (n, g) in [(1usize, 1usize), (2, 1), (2, 2), (3, 1)] {
        for form in FormSpec::grid(n).map_err(|e| e.to_string())? {
            let cfg = StressConfig {
                n,
                g,
                form,
                trials: 10_000,
                seed: SEED,
                tol: GROUP_TOL,
                jobs: workers(),
            };
            let r = stress_lemma(&cfg).map_err(|e| e.to_string())?;
            ensure(r.passed(), || {
                format!(
                    "{} n={n} g={g}: {} violations, e.g. {:?}",
                    r.form,
                    r.violations,
                    r.examples.first()
                )
            })?;
            runs += 1;
            torus += r.torus_products;
        }
    }
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        let k = kappa_homomorphism(n, 1000, SEED).map_err(|e| e.to_string())?;
        ensure(k.passed(), || format!("κ at n={n}: {k:?}"))?;
        worst = worst.max(k.max_homomorphism_residual);
    }
    Ok(format!(
        "{runs} (n,g,form) runs × 10⁴ trials, 0 generic torus products ({torus} torus-form), κ residual {worst:.1e} < {GROUP_TOL:e}"
    ))
}

fn duality() -> Outcome {
    let mut forms = 0;
    for n in 1..=3 {
        for spec in FormSpec::all(n).map_err(|e| e.to_string())? {
            let r = duality_check(&spec, n, 1000, SEED).map_err(|e| e.to_string())?;
            ensure(r.passed(), || format!("{} n={n}: {r:?}", r.form))?;
            forms += 1;
        }
    }
    Ok(format!("{forms} forms (n ≤ 3) × 10³ samples: associated sections ≤ {STRUCTURE_TOL:e}, others above, every 1e-3 perturbation breaks the zero"))
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "rank-one theorem",
            budget: Duration::from_secs(1),
            run: rank_one,
        },
        Criterion {
            id: 2,
            name: "rank-two theorem",
            budget: Duration::from_secs(60),
            run: rank_two,
        },
        Criterion {
            id: 3,
            name: "rank-three theorem at degree 19",
            budget: Duration::from_secs(30 * 60),
            run: rank_three,
        },
        Criterion {
            id: 4,
            name: "decomposer soundness",
            budget: Duration::from_secs(30 * 60),
            run: soundness,
        },
        Criterion {
            id: 5,
            name: "exhaustive lemma suites",
            budget: Duration::from_secs(5 * 60),
            run: lemma_suites,
        },
        Criterion {
            id: 6,
            name: "holonomy stress grid",
            budget: Duration::from_secs(10 * 60),
            run: stress_grid,
        },
        Criterion {
            id: 7,
            name: "form/section duality",
            budget: Duration::from_secs(30 * 60),
            run: duality,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => {
                Err(format!("{detail}; over budget {:?}", c.budget))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!(
                "PASS [{}] {} — {detail} ({:.2}s)",
                c.id,
                c.name,
                elapsed.as_secs_f64()
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "FAIL [{}] {} — {why} ({:.2}s)",
                    c.id,
                    c.name,
                    elapsed.as_secs_f64()
                );
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
