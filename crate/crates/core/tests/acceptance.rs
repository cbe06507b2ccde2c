//! Acceptance suite: one pass/fail line per criterion.
//!
//! Run with `cargo test -p fermat-descent --test acceptance`. Each criterion
//! runs in isolation; a panic or a missed time budget marks it failed and the
//! process exits nonzero after all lines are printed.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use fermat_descent::arith::{self, Triple};
use fermat_descent::cyclotomic::{self, CycInt};
use fermat_descent::density;
use fermat_descent::finite_field;
use fermat_descent::local_field::LocalField;
use fermat_descent::parity::{self, TripleSelection};
use fermat_descent::root_number::{self, Place};
use fermat_descent::selmer::{self, LocalImage, SelmerEngine};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5e1_4e2;
const SELMER_PRIMES: [u64; 4] = [5, 7, 11, 13];

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn all_triples(p: u64) -> Vec<Triple> {
    let mut out = Vec::new();
    for r in 1..p {
        for s in 1..p - r {
            out.push(Triple::new(r, s, p - r - s, p).unwrap());
        }
    }
    out
}

fn admissible_deltas(p: u64, max: i64) -> Vec<i64> {
    (1..=max)
        .filter(|&d| {
            let red = arith::reduce_delta(d, p).unwrap();
            red.delta == d && red.ord_p(p) == 0 && red.all_inert
        })
        .collect()
}

/// 1. ε_3 from the general formula equals the p = 3 rule.
fn c1_p3_rule() -> Outcome {
    let t = Triple::new(1, 1, 1, 3).unwrap();
    let mut n = 0;
    for delta in 1..=2000i64 {
        if arith::reduce_delta(delta, 3).unwrap().delta != delta {
            continue;
        }
        let general =
            root_number::epsilon_local(Place::Prime(3), &t, delta).map_err(|e| e.to_string())?;
        let rule = root_number::epsilon_p3(delta).map_err(|e| e.to_string())?;
        ensure!(
            general == rule,
            "δ = {delta}: formula {general}, rule {rule}"
        );
        n += 1;
    }
    Ok(format!("{n} cube-free δ ≤ 2000"))
}

/// 2. ε = (−1)^S over admissible δ ≤ 300.
fn c2_parity() -> Outcome {
    let mut summary = Vec::new();
    for p in SELMER_PRIMES {
        let scan = parity::parity_scan(p, 300, &TripleSelection::All).map_err(|e| e.to_string())?;
        parity::require_scan(&scan, 30).map_err(|e| e.to_string())?;
        summary.push(format!(
            "p={p}: {} δ/{} checks",
            scan.admissible,
            scan.checks()
        ));
    }
    Ok(summary.join(", "))
}

/// 3. Norms, congruences, inert values and Stickelberger for ℓ ≤ 53.
fn c3_jacobi() -> Outcome {
    let mut n = 0;
    let mut stick = 0;
    for p in [3u64, 5, 7] {
        for ell in (2..=53).filter(|&l| common::is_prime(l) && l != p) {
            let sd = arith::splitting_data(ell, p).unwrap();
            let field = finite_field::build_field(ell, sd.f as usize).unwrap();
            let chi = field.character(p).map_err(|e| e.to_string())?;
            let summer = cyclotomic::JacobiSummer::new(&field, &chi).map_err(|e| e.to_string())?;
            let q = BigInt::from(field.q());
            for t in all_triples(p) {
                let j = summer.sum(&t).map_err(|e| e.to_string())?;
                ensure!(
                    j.mul(&j.conj()).as_integer() == Some(q.clone()),
                    "p={p} ℓ={ell} {t}: j·j̄ ≠ q"
                );
                ensure!(
                    cyclotomic::jacobi_congruence(&j),
                    "p={p} ℓ={ell} {t}: j ≢ 1 mod Π²"
                );
                if sd.inert() {
                    let expect = CycInt::from_int(p, -BigInt::from(ell).pow((p as u32 - 1) / 2));
                    ensure!(j == expect, "p={p} ℓ={ell} {t}: inert value {j:?}");
                }
                if ell % p == 1 {
                    ensure!(
                        cyclotomic::stickelberger_check(&t, ell).map_err(|e| e.to_string())?,
                        "p={p} ℓ={ell} {t}: Stickelberger vanishing set differs from Φ"
                    );
                    stick += 1;
                }
                n += 1;
            }
        }
    }
    Ok(format!("{n} Jacobi sums, {stick} Stickelberger checks"))
}

/// 4. φ_ℓ = (ℓ/p) against the product over places.
fn c4_phi() -> Outcome {
    let mut n = 0;
    for p in [3u64, 5, 7] {
        for ell in (2..=53).filter(|&l| common::is_prime(l) && l != p) {
            let triples = all_triples(p);
            let phis = cyclotomic::phi_ell_all(&triples, ell).map_err(|e| e.to_string())?;
            for (t, phi) in triples.iter().zip(phis) {
                ensure!(phi.agree(), "p={p} ℓ={ell} {t}: {phi:?}");
                ensure!(
                    phi.formula == common::legendre_by_squares(ell as i64, p),
                    "p={p} ℓ={ell}: formula path differs from the square list"
                );
                n += 1;
            }
        }
    }
    Ok(format!("{n} (p, ℓ, triple)"))
}

/// 5. |I| = (p+1)/2 at Π and dimension 1 off p.
fn c5_local_images() -> Outcome {
    let mut n = 0;
    for p in SELMER_PRIMES {
        let deltas: Vec<i64> = (1..).filter(|d| d % p as i64 != 0).take(20).collect();
        for &delta in &deltas {
            for r in 1..=p - 2 {
                let img = selmer::local_image_at_p(r, delta, p).map_err(|e| e.to_string())?;
                ensure!(
                    img.dimension() == (p as usize).div_ceil(2),
                    "p={p} r={r} δ={delta}: {img:?}"
                );
            }
            for ell in (2..60).filter(|&l| common::is_prime(l) && l != p) {
                let img = selmer::local_image_off_p(ell, delta, p).map_err(|e| e.to_string())?;
                let divides = delta % ell as i64 == 0;
                ensure!(
                    img.dimension() == 1 && matches!(img, LocalImage::Delta { .. }) == divides,
                    "p={p} ℓ={ell} δ={delta}: {img:?}"
                );
            }
            n += 1;
        }
    }
    Ok(format!("{n} δ across p ∈ {SELMER_PRIMES:?}"))
}

/// 6. Direct kernel computation equals the closed form.
fn c6_selmer_cross() -> Outcome {
    let mut n = 0;
    for p in SELMER_PRIMES {
        let engine = SelmerEngine::new(p).map_err(|e| e.to_string())?;
        for delta in admissible_deltas(p, 100) {
            for r in 1..=p - 2 {
                let closed = selmer::selmer_closed_form(r, delta, p).map_err(|e| e.to_string())?;
                let direct = engine.selmer_direct(r, delta).map_err(|e| e.to_string())?;
                ensure!(
                    direct.dimension == closed.dimension && direct.same_group(&closed),
                    "p={p} r={r} δ={delta}: direct {:?} vs closed {:?}",
                    direct.basis,
                    closed.basis
                );
                n += 1;
            }
        }
    }
    Ok(format!("{n} (p, r, δ)"))
}

/// 7. δ = 1: dimension formula with k = 0, direct agreement and parity.
fn c7_delta_one() -> Outcome {
    let mut n = 0;
    for p in SELMER_PRIMES {
        let engine = SelmerEngine::new(p).map_err(|e| e.to_string())?;
        for r in 1..=p - 2 {
            let c = selmer::selmer_closed_form(r, 1, p).map_err(|e| e.to_string())?;
            let sym = c.b_symbol as i64;
            let formula = if p % 4 == 1 {
                (p as i64 - 3 + 2 * sym) / 4
            } else {
                (p as i64 - 5 - 2 * sym) / 4
            };
            ensure!(
                c.k == 0 && c.dimension as i64 == formula,
                "p={p} r={r}: {c:?}"
            );
            let d = engine.selmer_direct(r, 1).map_err(|e| e.to_string())?;
            ensure!(d.same_group(&c), "p={p} r={r}: direct differs");
        }
        for t in all_triples(p) {
            let case = parity::parity_check(&t, 1).map_err(|e| e.to_string())?;
            ensure!(
                case.holds,
                "p={p} {t}: ε = {}, S = {}",
                case.eps,
                case.s_rank
            );
            n += 1;
        }
    }
    Ok(format!("{n} triples"))
}

/// 8. Fraction of ε = +1 near 1/2 and α constant on classes.
fn c8_density() -> Outcome {
    let mut parts = Vec::new();
    for (t, x) in [
        (Triple::new(1, 1, 1, 3).unwrap(), 100_000),
        (Triple::new(1, 1, 3, 5).unwrap(), 50_000),
    ] {
        let rep = density::density_experiment(&t, x, false).map_err(|e| e.to_string())?;
        ensure!(
            (rep.fraction - 0.5).abs() <= 0.02,
            "p={} fraction {}",
            t.p,
            rep.fraction
        );
        ensure!(rep.alpha_constant, "p={}: α varies within a class", t.p);
        ensure!(
            rep.classes.iter().map(|c| c.n_plus).sum::<u64>() == rep.n_plus,
            "p={}: class counts do not add up",
            t.p
        );
        parts.push(format!("p={} X={x}: {:.4}", t.p, rep.fraction));
    }
    Ok(parts.join(", "))
}

/// 9. Generators independent, p-th power detection, round trips, precision stability.
fn c9_local_field() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for p in SELMER_PRIMES {
        let k4 = LocalField::new(p, 4).map_err(|e| e.to_string())?;
        let k5 = LocalField::new(p, 5).map_err(|e| e.to_string())?;
        let width = p as usize + 1;
        for i in 0..width {
            for k in [&k4, &k5] {
                let u = k.generator_u(i).unwrap();
                let class = k.unit_class(u).map_err(|e| e.to_string())?;
                let mut e = vec![0u64; width];
                e[i] = 1;
                ensure!(
                    class.0 == e,
                    "p={p} M={}: class of u_{i} is {:?}",
                    k.precision(),
                    class.0
                );
                ensure!(
                    !k.is_pth_power(u).map_err(|e| e.to_string())?,
                    "p={p}: u_{i} is a p-th power"
                );
            }
        }
        for _ in 0..100 {
            let (o, c) = common::random_integers(p, &mut rng);
            for k in [&k4, &k5] {
                let x = common::realize(k, o, &c);
                let xp = k.pow(&x, p);
                ensure!(
                    k.is_pth_power(&xp).map_err(|e| e.to_string())?,
                    "p={p}: x^p rejected"
                );
                let verdict = k.is_pth_power(&x).map_err(|e| e.to_string())?;
                let class = k.unit_class(&x).map_err(|e| e.to_string())?;
                ensure!(
                    verdict == class.is_zero(),
                    "p={p}: p-th power test disagrees with class {:?}",
                    class.0
                );
            }
        }
        for _ in 0..50 {
            let e: Vec<u64> = (0..width).map(|_| rng.gen_range(0..p)).collect();
            let (_, c) = common::random_integers(p, &mut rng);
            let mut classes = Vec::new();
            for k in [&k4, &k5] {
                let z = common::realize(k, 0, &c);
                let x = k.mul(&common::product_of_generators(k, &e), &k.pow(&z, p));
                let a = k.unit_class(&x).map_err(|e| e.to_string())?;
                let b = k.unit_class_filtration(&x).map_err(|e| e.to_string())?;
                ensure!(
                    a.0 == e && b.0 == e,
                    "p={p} M={}: {e:?} ↦ {:?} / {:?}",
                    k.precision(),
                    a.0,
                    b.0
                );
                classes.push(a);
            }
            ensure!(
                classes[0] == classes[1],
                "p={p}: class changes with precision"
            );
        }
    }
    Ok(format!("p ∈ {SELMER_PRIMES:?}, M ∈ {{4, 5}}"))
}

/// 10. Regularity against an independent Bernoulli oracle.
fn c10_regularity() -> Outcome {
    ensure!(
        common::bernoulli_oracle_self_check(),
        "oracle self-check failed"
    );
    for p in (3..=37).filter(|&p| common::is_prime(p)) {
        let irr = arith::irregularity_index(p).map_err(|e| e.to_string())?;
        let oracle = common::irregular_indices(p);
        ensure!(
            irr.irregular_indices == oracle,
            "p={p}: {irr:?} vs oracle {oracle:?}"
        );
        ensure!(irr.regular == (p < 37), "p={p}: regular = {}", irr.regular);
    }
    let i37 = arith::irregularity_index(37).unwrap();
    ensure!(
        i37.index == 1 && i37.irregular_indices == vec![32],
        "i(37) = {}",
        i37.index
    );
    Ok("p < 37 regular, i(37) = 1 (B_32)".into())
}

/// 11. ε is constant on h-orbits of triples.
fn c11_orbits() -> Outcome {
    let mut n = 0;
    for p in [3u64, 5, 7] {
        for t in all_triples(p) {
            for delta in 1..=50i64 {
                let base = root_number::epsilon_global(&t, delta)
                    .map_err(|e| e.to_string())?
                    .global;
                for (h, other) in t.orbit() {
                    let e = root_number::epsilon_global(&other, delta)
                        .map_err(|e| e.to_string())?
                        .global;
                    ensure!(
                        e == base,
                        "p={p} {t}·{h} = {other}, δ={delta}: {e} vs {base}"
                    );
                    n += 1;
                }
            }
        }
    }
    Ok(format!("{n} (triple, h, δ)"))
}

/// 12. Worked examples for p = 5, r = 1.
fn c12_pins() -> Outcome {
    let t = Triple::reduced_form(1, 5).unwrap();
    for (delta, b, dim, s, eps) in [(2i64, 0u64, 1usize, 0i64, 1i8), (3, 1, 2, 1, -1)] {
        let c = selmer::selmer_closed_form(1, delta, 5).map_err(|e| e.to_string())?;
        let d = selmer::selmer_direct(1, delta, 5).map_err(|e| e.to_string())?;
        let rn = root_number::epsilon_global(&t, delta).map_err(|e| e.to_string())?;
        ensure!(
            c.b == b
                && c.dimension == dim
                && d.dimension == dim
                && c.s_rank == s
                && rn.global == eps,
            "δ={delta}: B={} dim={}/{} S={} ε={}",
            c.b,
            c.dimension,
            d.dimension,
            c.s_rank,
            rn.global
        );
    }
    Ok("δ=2: B≡0 dim 1 S=0 ε=+1; δ=3: B≡1 dim 2 S=1 ε=−1".into())
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "p=3 rule consistency",
            budget: Some(Duration::from_secs(1)),
            run: c1_p3_rule,
        },
        Criterion {
            id: 2,
            name: "parity ε = (−1)^S",
            budget: Some(Duration::from_secs(60)),
            run: c2_parity,
        },
        Criterion {
            id: 3,
            name: "Jacobi-sum suite",
            budget: Some(Duration::from_secs(30)),
            run: c3_jacobi,
        },
        Criterion {
            id: 4,
            name: "φ_ℓ two-path agreement",
            budget: None,
            run: c4_phi,
        },
        Criterion {
            id: 5,
            name: "local image cardinalities",
            budget: None,
            run: c5_local_images,
        },
        Criterion {
            id: 6,
            name: "Selmer direct vs closed form",
            budget: Some(Duration::from_secs(300)),
            run: c6_selmer_cross,
        },
        Criterion {
            id: 7,
            name: "δ=1 regression",
            budget: None,
            run: c7_delta_one,
        },
        Criterion {
            id: 8,
            name: "root-number density",
            budget: Some(Duration::from_secs(60)),
            run: c8_density,
        },
        Criterion {
            id: 9,
            name: "local-field machinery",
            budget: None,
            run: c9_local_field,
        },
        Criterion {
            id: 10,
            name: "regularity",
            budget: None,
            run: c10_regularity,
        },
        Criterion {
            id: 11,
            name: "triple-orbit invariance",
            budget: None,
            run: c11_orbits,
        },
        Criterion {
            id: 12,
            name: "worked-example pins",
            budget: None,
            run: c12_pins,
        },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match (result, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("exceeded the {}s budget", b.as_secs())),
            (r, _) => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.clone()),
            Err(d) => {
                failed += 1;
                ("FAIL", d.clone())
            }
        };
        println!(
            "criterion {:>2} {tag} {:<30} {:>9.3}s  {detail}",
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
