//! Acceptance suite: one PASS/FAIL line per criterion, with runtime.
//!
//! Runs without the libtest harness so the lines are always printed.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use siegel_reduce::cone::{ConeSpec, Matrix, RealVector};
use siegel_reduce::liecond::{self, FailReason, LieVerdict};
use siegel_reduce::moment::{self, AffineGenerator, GeneratorSet};
use siegel_reduce::reduce::{check_admissible, ray_extent, MembershipStatus, QuotientDomain, Subspace, Verdict};
use siegel_reduce::sampling;
use siegel_reduce::seed::{rng_from_seed, Rng};
use siegel_reduce::tube::{self, Tangent, TubePoint};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gauss(n: usize, rng: &mut Rng) -> RealVector {
    RealVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

fn rel(a: &RealVector, b: &RealVector) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

/// Lorentz interior point drawn directly: ω₀ = ‖ω_r‖ + margin.
fn lorentz_point(d: usize, rng: &mut Rng) -> RealVector {
    let tail = gauss(d, rng) * rng.random_range(0.1..5.0);
    let mut w = RealVector::zeros(d + 1);
    w[0] = tail.norm() + rng.random_range(0.05..3.0);
    w.rows_mut(1, d).copy_from(&tail);
    w
}

fn fd_gradient(cone: &ConeSpec, w: &RealVector, h: f64) -> RealVector {
    let mut g = RealVector::zeros(w.len());
    for i in 0..w.len() {
        let mut p = w.clone();
        let mut m = w.clone();
        p[i] += h;
        m[i] -= h;
        g[i] = (cone.log_char(&p).unwrap() - cone.log_char(&m).unwrap()) / (2.0 * h);
    }
    g
}

fn criterion_1_2() -> (Outcome, Outcome) {
    let mut rng = rng_from_seed(101);
    let (mut worst_closed, mut worst_fd, mut worst_id) = (0.0f64, 0.0f64, 0.0f64);
    for d in 1..=6 {
        let cone = ConeSpec::lorentz(d);
        for _ in 0..1000 {
            let w = lorentz_point(d, &mut rng);
            let dual = cone.dual_map(&w).unwrap();
            let q = w[0] * w[0] - w.rows(1, d).norm_squared();
            let mut closed = w.clone() * ((d as f64 + 1.0) / q);
            for i in 1..=d {
                closed[i] = -closed[i];
            }
            let h = 1e-6 * w.amax().max(1.0);
            worst_closed = worst_closed.max(rel(&dual, &closed));
            worst_fd = worst_fd.max(rel(&dual, &(-fd_gradient(&cone, &w, h))));
            worst_id = worst_id.max((w.dot(&dual) - (d as f64 + 1.0)).abs());
        }
    }
    let c1 = ensure(worst_closed < 1e-6 && worst_fd < 1e-6, || {
        format!("closed-form error {worst_closed:e}, finite-difference error {worst_fd:e}")
    })
    .map(|_| format!("6000 points, closed-form rel err {worst_closed:.1e}, FD rel err {worst_fd:.1e}"));
    let c2 = ensure(worst_id < 1e-9, || format!("|g(w, w*) - dim| up to {worst_id:e}"))
        .map(|_| format!("6000 points, max |g(w, w*) - dim V| = {worst_id:.1e}"));
    (c1, c2)
}

fn random_family_cone(family: usize, n: usize, rng: &mut Rng) -> ConeSpec {
    match family {
        0 => ConeSpec::lorentz(n - 1),
        1 => ConeSpec::orthant(n),
        _ => {
            // Split n into two factors of random kinds.
            let a = rng.random_range(1..n);
            let leaf = |m: usize, rng: &mut Rng| {
                if m >= 2 && rng.random_bool(0.5) {
                    ConeSpec::lorentz(m - 1)
                } else {
                    ConeSpec::orthant(m)
                }
            };
            ConeSpec::product(vec![leaf(a, rng), leaf(n - a, rng)])
        }
    }
}

fn criterion_3() -> Outcome {
    let mut rng = rng_from_seed(303);
    let mut counts = [0usize; 3];
    for family in 0..3 {
        for i in 0..200 {
            let n = rng.random_range(2..=8);
            let cone = random_family_cone(family, n, &mut rng);
            let k = rng.random_range(1..n);
            let basis = Matrix::from_fn(n, k, |_, _| StandardNormal.sample(&mut rng));
            let h = Subspace::from_columns(&basis).map_err(|e| e.to_string())?;
            let cert = check_admissible(&cone, &h, i).map_err(|e| e.to_string())?;
            ensure(cert.verdict != Verdict::Undecided, || format!("undecided on {cone:?}, k = {k}"))?;
            ensure(cert.verify(&cone, &h, 1e-9), || format!("witness fails to verify on {cone:?}"))?;
            // The other side must be empty: a dual witness y ⊥ H pairs to zero
            // with all of H, and an h ∈ H ∩ Ω̄ pairs positively with all of Ω*.
            let w = cert.witness.as_ref().unwrap();
            match cert.verdict {
                Verdict::Admissible => {
                    for _ in 0..50 {
                        let v = h.basis() * gauss(k, &mut rng);
                        ensure(cone.margin(&v.normalize()).unwrap() < 1e-9, || "H meets the cone".into())?;
                    }
                    counts[0] += 1;
                }
                _ => {
                    for _ in 0..50 {
                        let v = h.complement() * gauss(n - k, &mut rng);
                        ensure(cone.dual_margin(&v.normalize()).unwrap() <= 1e-9, || "H⊥ meets the dual cone".into())?;
                    }
                    ensure(w.norm() > 0.5, || "zero witness".into())?;
                    counts[1] += 1;
                }
            }
        }
        counts[2] += 200;
    }
    Ok(format!("{} subspaces, {} admissible, {} inadmissible, 0 undecided", counts[2], counts[0], counts[1]))
}

fn random_cone(rng: &mut Rng) -> ConeSpec {
    if rng.random_bool(0.5) {
        ConeSpec::lorentz(rng.random_range(1..=6))
    } else {
        ConeSpec::orthant(rng.random_range(2..=8))
    }
}

fn random_instance(rng: &mut Rng) -> QuotientDomain {
    let cone = random_cone(rng);
    let n = cone.ambient_dim();
    let k = rng.random_range(1..n);
    let h = Subspace::from_columns(&sampling::admissible_subspace(&cone, k, rng)).unwrap();
    QuotientDomain::new(cone, h, rng.random()).unwrap()
}

fn random_point(cone: &ConeSpec, rng: &mut Rng) -> TubePoint {
    TubePoint::new(cone, gauss(cone.ambient_dim(), rng), sampling::interior_point(cone, rng)).unwrap()
}

fn criterion_4() -> Outcome {
    let mut rng = rng_from_seed(404);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let q = random_instance(&mut rng);
        let x = random_point(q.cone(), &mut rng);
        let r = q.orbit_agreement(&x, 100, i).map_err(|e| e.to_string())?;
        worst = worst.max(r);
    }
    ensure(worst <= 1e-6, || format!("orbit disagreement {worst:e}"))?;
    Ok(format!("50 instances x 100 trials, worst disagreement {worst:.1e}"))
}

fn criterion_5() -> Outcome {
    let mut rng = rng_from_seed(505);
    let (mut worst, mut max_iter, mut near) = (0.0f64, 0usize, 0usize);
    for i in 0..500 {
        let q = random_instance(&mut rng);
        let cone = q.cone().clone();
        let im = if i % 3 == 0 {
            near += 1;
            sampling::near_boundary_point(&cone, 10f64.powf(-rng.random_range(3.0..6.0)), &mut rng)
        } else {
            sampling::interior_point(&cone, &mut rng)
        };
        let x = TubePoint::new(&cone, gauss(cone.ambient_dim(), &mut rng), im).map_err(|e| e.to_string())?;
        let r = q.reduce_point(&x).map_err(|e| format!("{e} on {cone:?}"))?;
        worst = worst.max(r.residual);
        max_iter = max_iter.max(r.iterations);
    }
    ensure(worst <= 1e-8 && max_iter <= 200, || format!("residual {worst:e}, iterations {max_iter}"))?;
    Ok(format!("500 instances ({near} within margin 1e-3 of the boundary), worst residual {worst:.1e}, max {max_iter} Newton steps"))
}

fn criterion_6() -> Outcome {
    let mut rng = rng_from_seed(606);
    let (mut worst_rt, mut worst_tau, mut count) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..10 {
        let q = random_instance(&mut rng);
        let b = q.subspace().basis().clone();
        for _ in 0..200 {
            let s = q.sample_quotient_point(&mut rng);
            let m = q.quotient_membership(&s.im).map_err(|e| e.to_string())?;
            ensure(m.status == MembershipStatus::Member, || format!("sampled point not a member: {:?}", s.im))?;
            let neg = q.quotient_membership(&(-&s.im)).map_err(|e| e.to_string())?;
            ensure(neg.status == MembershipStatus::NonMember, || "-t accepted".into())?;
            let z = q.lift(&s).map_err(|e| e.to_string())?;
            let back = q.split_map(&z).map_err(|e| e.to_string())?.quotient;
            worst_rt = worst_rt.max((&back.re - &s.re).amax().max((&back.im - &s.im).amax()));
            // Move z along H^C and compare quotient coordinates.
            let mut c = gauss(b.ncols(), &mut rng);
            while q.cone().margin(&(&z.im + &b * &c)).unwrap() <= 1e-12 {
                c *= 0.5;
            }
            let moved = TubePoint { re: &z.re + &b * gauss(b.ncols(), &mut rng), im: &z.im + &b * c };
            let t2 = q.split_map(&moved).map_err(|e| e.to_string())?.quotient;
            let scale = 1.0 + z.norm() + moved.norm();
            worst_tau = worst_tau.max((&t2.re - &back.re).amax().max((&t2.im - &back.im).amax()) / scale);
            count += 1;
        }
    }
    ensure(worst_rt <= 1e-8, || format!("round trip {worst_rt:e}"))?;
    // Exact up to rounding of the orthonormal complement basis.
    ensure(worst_tau <= 1e-12, || format!("tau-invariance {worst_tau:e}"))?;
    Ok(format!(
        "{count} quotient points, round trip {worst_rt:.1e}, tau-invariance {worst_tau:.1e}, -t rejected on all"
    ))
}

fn criterion_7() -> Outcome {
    let mut rng = rng_from_seed(707);
    let families = [
        ConeSpec::lorentz(3),
        ConeSpec::orthant(4),
        ConeSpec::product(vec![ConeSpec::lorentz(2), ConeSpec::orthant(2)]),
    ];
    let mut worst = 0.0f64;
    for cone in &families {
        let n = cone.ambient_dim();
        for i in 0..100 {
            let xi = match i % 3 {
                0 => AffineGenerator::translation(gauss(n, &mut rng)),
                1 => AffineGenerator::linear(sampling::compatible_linear(cone, &mut rng)),
                _ => sampling::compatible_generator(cone, &mut rng),
            };
            let x = random_point(cone, &mut rng);
            let u = Tangent::new(gauss(n, &mut rng), gauss(n, &mut rng));
            let h = 1e-6 * (1.0 + x.norm()) / u.norm();
            let fd = (moment::momentum(cone, &xi, &x.offset(&u, h)).unwrap()
                - moment::momentum(cone, &xi, &x.offset(&u, -h)).unwrap())
                / (2.0 * h);
            let oracle = tube::kahler_form_oracle(cone, &x, &moment::vector_field(&xi, &x).unwrap(), &u).unwrap();
            worst = worst.max((fd - oracle).abs() / fd.abs().max(oracle.abs()));
        }
    }
    ensure(worst <= 1e-4, || format!("relative error {worst:e}"))?;
    Ok(format!("300 triples over 3 cone families, worst relative error {worst:.1e}"))
}

fn criterion_8() -> Outcome {
    let mut rng = rng_from_seed(808);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let q = random_instance(&mut rng);
        let y = q.dual_witness().clone();
        let omega = sampling::interior_point(q.cone(), &mut rng);
        let bound = q.slice_bound(omega.norm(), &y).map_err(|e| e.to_string())?;
        for _ in 0..200 {
            let p = q.sample_slice_point(&omega, &mut rng).map_err(|e| e.to_string())?;
            worst = worst.max(p.norm() - bound);
        }
    }
    ensure(worst <= 1e-9, || format!("slice point exceeds bound by {worst:e}"))?;

    let cone = ConeSpec::lorentz(1);
    let h = Subspace::from_columns(&Matrix::from_column_slice(2, 1, &[0.0, 1.0])).unwrap();
    let q = QuotientDomain::new(cone.clone(), h, 0).unwrap();
    let y = RealVector::from_column_slice(&[1.0, 0.0]);
    let p = cone.lower_bound_constant(&y).unwrap();
    ensure((p - 0.5f64.sqrt()).abs() <= 1e-9, || format!("p = {p}"))?;
    let w0 = 2.0;
    let omega = RealVector::from_column_slice(&[w0, 0.0]);
    let bound = q.slice_bound(w0, &y).unwrap();
    ensure((bound - 2f64.sqrt() * w0).abs() <= 1e-9, || format!("bound {bound}"))?;
    let dir = RealVector::from_column_slice(&[0.0, 1.0]);
    let corner = &omega + &dir * ray_extent(&cone, &omega, &dir).unwrap();
    ensure((corner.norm() - bound).abs() <= 1e-9, || format!("corner norm {} vs bound {bound}", corner.norm()))?;
    Ok(format!(
        "50 instances, max(norm - bound) = {worst:.1e}; worked case p = 1/sqrt2, bound sqrt2*w0 attained at corner"
    ))
}

fn criterion_9() -> Outcome {
    let cone = ConeSpec::lorentz(1);
    let v = |x: &[f64]| RealVector::from_column_slice(x);
    let h = GeneratorSet::new(vec![AffineGenerator::translation(v(&[0.0, 1.0]))]).unwrap();
    let x0 = TubePoint::new(&cone, v(&[0.0, 0.0]), v(&[1.0, 0.0])).unwrap();
    let pass = GeneratorSet::new(vec![
        AffineGenerator::translation(v(&[1.0, 0.0])),
        AffineGenerator::linear(Matrix::identity(2, 2)),
    ])
    .unwrap();
    let r = liecond::verify_lie_condition(&cone, &h, &x0, &pass, 100, 9).map_err(|e| e.to_string())?;
    ensure(r.verdict == LieVerdict::Pass, || format!("pass candidate failed: {:?}", r.reasons))?;
    let worst = r.span_residual.max(r.bracket_residual).max(r.orbit_residual);
    ensure(worst <= 1e-8, || format!("residual {worst:e}"))?;
    let fail = GeneratorSet::new(vec![
        AffineGenerator::translation(v(&[1.0, 0.0])),
        AffineGenerator::translation(v(&[0.0, 1.0])),
    ])
    .unwrap();
    let r = liecond::verify_lie_condition(&cone, &h, &x0, &fail, 100, 9).map_err(|e| e.to_string())?;
    ensure(r.verdict == LieVerdict::Fail && r.reasons.first() == Some(&FailReason::Span), || {
        format!("fail candidate: {:?} {:?}", r.verdict, r.reasons)
    })?;

    let mut rng = rng_from_seed(909);
    for _ in 0..100 {
        let q = random_instance(&mut rng);
        let (n, k) = (q.cone().ambient_dim(), q.subspace().dim());
        let m = q.reduce_point(&random_point(q.cone(), &mut rng)).map_err(|e| e.to_string())?.point;
        let hs = GeneratorSet::from_translations(q.subspace().basis());
        let kb = liecond::kernel_basis(q.cone(), &hs, &m).map_err(|e| e.to_string())?;
        let w = liecond::w_space(q.cone(), &hs, &m).map_err(|e| e.to_string())?;
        ensure(kb.ncols() == 2 * n - k && w.ncols() == 2 * n - 2 * k, || {
            format!("n = {n}, k = {k}: dim K = {}, dim W = {}", kb.ncols(), w.ncols())
        })?;
    }
    Ok(format!(
        "pass candidate residuals <= {worst:.1e}; fail candidate fails on span; dimension identities on 100 instances"
    ))
}

fn criterion_10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_siegel-reduce");
    let run = || {
        let start = Instant::now();
        let out =
            Command::new(bin).arg("verify").env_remove("SIEGEL_REDUCE_SEED").output().map_err(|e| e.to_string())?;
        Ok::<_, String>((out, start.elapsed()))
    };
    let (a, ta) = run()?;
    ensure(a.status.code() == Some(0), || {
        format!("exit {:?}: {}", a.status.code(), String::from_utf8_lossy(&a.stderr))
    })?;
    ensure(ta < Duration::from_secs(60), || format!("took {ta:?}"))?;
    let (b, _) = run()?;
    ensure(a.stdout == b.stdout, || "reports differ between runs".into())?;
    Ok(format!("exit 0 in {:.2} s, {} report bytes identical across runs", ta.as_secs_f64(), a.stdout.len()))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: &str, budget: u64, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let result = result.and_then(|msg| {
            if elapsed <= Duration::from_secs(budget) {
                Ok(msg)
            } else {
                Err(format!("over the {budget} s budget"))
            }
        });
        match result {
            Ok(msg) => println!("PASS criterion {n}: {msg} [{:.2} s]", elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {n}: {msg} [{:.2} s]", elapsed.as_secs_f64());
            }
        }
    };

    let c2 = std::cell::RefCell::new(Err::<String, String>("not run".into()));
    report("1 (Lorentz dual map)", 5, &|| {
        let (c1, second) = criterion_1_2();
        *c2.borrow_mut() = second;
        c1
    });
    report("2 (dual identity)", 5, &|| c2.borrow().clone());
    report("3 (admissibility alternative)", 30, &criterion_3);
    report("4 (slice and orbit uniqueness)", 30, &criterion_4);
    report("5 (reduction solver)", 30, &criterion_5);
    report("6 (quotient data)", 30, &criterion_6);
    report("7 (momentum defining property)", 10, &criterion_7);
    report("8 (compactness bound)", 10, &criterion_8);
    report("9 (Lie condition)", 10, &criterion_9);
    report("10 (end-to-end verify)", 60, &criterion_10);

    if failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
