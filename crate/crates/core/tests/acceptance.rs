//! Acceptance run. Each criterion prints one `[PASS]` or `[FAIL]` line with
//! the measured figure and the wall time; the process exits non-zero when
//! any criterion fails.

mod common;

use std::time::{Duration, Instant};

use jacobi_bc::connecting::{
    connecting_from_hankel, connecting_from_response, connecting_from_response_in, connecting_from_spectrum, gram_from_control,
    validate_response, ConnectingMatrix,
};
use jacobi_bc::debranges::{hb_function, kernel_polynomial_sum, krein_factor, krein_solve, measure_kernel_constant, KreinSolutionIn};
use jacobi_bc::determinacy::{
    circle_bound_connecting, connecting_max_eig_sequence, connecting_min_eig_from_coefficients, connecting_min_eig_sequence,
    deficiency_sums, hankel_min_eig_sequence,
};
use jacobi_bc::dynamics::{control_operator_in, response_vector, response_vector_in};
use jacobi_bc::inverse::{recover_from_moments_in, recover_from_response, recover_from_response_in};
use jacobi_bc::moments::{
    build_hankel, build_lambda, moments_to_response_in, response_to_moments_in, semicircle_moments,
};
use nalgebra::DMatrix;
use jacobi_bc::spectral::{chebyshev_values, p_values, spectral_data};
use jacobi_bc::{Complex64, JacobiCoefficients, MomentSequence, PrecisionMode, ResponseVector, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::RngExt;

use common::{max_abs_diff, random_coeffs, random_dyadic_coeffs, rng, tails};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn run(id: usize, title: &str, budget: Duration, f: fn() -> Outcome) -> bool {
    let start = Instant::now();
    let out = std::panic::catch_unwind(f).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        check(false, format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    println!(
        "[{}] criterion {id}: {title}: {}; {:.2}s (budget {}s{})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", exceeded" }
    );
    pass
}

fn c1_free_identity() -> Outcome {
    let free = JacobiCoefficients::free();
    let r = response_vector(&free, 2 * 64 - 1).unwrap();
    let mut worst = 0.0_f64;
    for t in 1..=64 {
        let c = connecting_from_response(&r, t).unwrap();
        let id = DMatrix::<f64>::identity(t, t);
        worst = worst.max((c.matrix() - id).abs().max());
    }
    let beta = connecting_min_eig_sequence(&r, 64, PrecisionMode::Double).unwrap();
    let gamma = connecting_max_eig_sequence(&r, 64, PrecisionMode::Double).unwrap();
    let dev = beta.values.iter().chain(&gamma.values).map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    check(
        worst < 1e-12 && dev < 1e-12,
        format!("max |C_T - I| = {worst:.1e} over T = 1..64, max |beta_T - 1|, |gamma_T - 1| = {dev:.1e}"),
    )
}

/// Moments of the spectral measure of `A^N` by direct quadrature.
fn quadrature_moments(coeffs: &JacobiCoefficients, n: usize, count: usize) -> MomentSequence {
    let data = spectral_data(coeffs, n).unwrap();
    MomentSequence((0..count).map(|k| data.integrate(|x| x.powi(k as i32))).collect())
}

fn c2_four_way() -> Outcome {
    let mut rng = rng(2);
    let (mut rel, mut abs) = (0.0_f64, 0.0_f64);
    for i in 0..50 {
        let t = 1 + i % 16;
        let coeffs = random_coeffs(&mut rng, t);
        let dynamic = connecting_from_response(&response_vector(&coeffs, 2 * t - 1).unwrap(), t).unwrap();
        let spectral = connecting_from_spectrum(&spectral_data(&coeffs, t).unwrap(), t).unwrap();
        let gram = gram_from_control(&coeffs, t).unwrap();
        let hankel = connecting_from_hankel(&build_hankel(&quadrature_moments(&coeffs, t, 2 * t - 1), t).unwrap()).unwrap();
        let scale = dynamic.matrix().abs().max();
        let all: [&ConnectingMatrix; 4] = [&dynamic, &spectral, &gram, &hankel];
        for x in 0..4 {
            for y in x + 1..4 {
                let d = all[x].max_abs_diff(all[y]);
                abs = abs.max(d);
                rel = rel.max(d / scale);
            }
        }
    }
    // Entries reach ~1e13 for a_k near 2, so agreement is measured relative
    // to the largest entry; the absolute figure is reported alongside.
    check(
        rel < 1e-9,
        format!("50 instances, T = N in 1..16: worst pairwise difference / max |c_ij| = {rel:.2e} (absolute {abs:.2e})"),
    )
}

fn c3_round_trip() -> Outcome {
    let mut rng = rng(3);
    let t = 15;
    let (mut err, mut agree) = (0.0_f64, 0.0_f64);
    let (mut double_ok, mut double_worst) = (0, 0.0_f64);
    for _ in 0..50 {
        let coeffs = random_coeffs(&mut rng, t);
        let (a, b) = tails(&coeffs, t);
        let error = |got: &jacobi_bc::inverse::RecoveryResult| max_abs_diff(&got.a, &a).max(max_abs_diff(&got.b, &b[..t - 1]));

        // Exact pipeline: response, moments and factorizations in rationals.
        let r = response_vector_in::<BigRational>(&coeffs, 2 * t - 1).unwrap();
        let got = recover_from_response_in(&r, t).unwrap();
        err = err.max(error(&got));
        let via = recover_from_moments_in(&response_to_moments_in(&r).unwrap(), t).unwrap();
        agree = agree.max(max_abs_diff(&via.a, &got.a)).max(max_abs_diff(&via.b, &got.b));

        // Same data rounded to double, for reference.
        let rd = response_vector(&coeffs, 2 * t - 1).unwrap();
        match recover_from_response(&rd, t, PrecisionMode::Double) {
            Ok(g) if error(&g) < 1e-6 => double_ok += 1,
            Ok(g) => double_worst = double_worst.max(error(&g)),
            Err(_) => {}
        }
    }
    check(
        err < 1e-6 && agree < 1e-8,
        format!(
            "T = 15, 50 instances, rational mode: max coefficient error {err:.2e}, moment path vs response path {agree:.2e}; \
             double mode on rounded data: {double_ok}/50 within 1e-6, worst miss {double_worst:.1e}"
        ),
    )
}

fn c4_characterization() -> Outcome {
    let mut rng = rng(3);
    let t = 15;
    let mut accepted = 0;
    let mut smallest = f64::INFINITY;
    for _ in 0..50 {
        let coeffs = random_coeffs(&mut rng, t);
        let v = validate_response(&response_vector(&coeffs, 2 * t - 1).unwrap(), t).unwrap();
        accepted += v.positive_definite as usize;
        smallest = smallest.min(v.min_eigenvalue);
    }
    let bad = validate_response(&ResponseVector(vec![1.0, 2.0, 0.0]), 2).unwrap();
    check(
        accepted == 50 && !bad.positive_definite && (bad.min_eigenvalue + 1.0).abs() < 1e-12,
        format!(
            "{accepted}/50 genuine responses accepted (smallest min eigenvalue {smallest:.2e}); r = (1, 2, 0) rejected with min eigenvalue {:.15}",
            bad.min_eigenvalue
        ),
    )
}

fn dyadic_c(rng: &mut rand::rngs::StdRng) -> Complex64 {
    Complex64::new(rng.random_range(-512..512) as f64 / 256.0, rng.random_range(-256..256) as f64 / 256.0)
}

fn rand_c(rng: &mut rand::rngs::StdRng) -> Complex64 {
    Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0))
}

/// `C_T conj(j)` in precision `S`; pairing it with the Chebyshev
/// coefficients `f` of `F` gives `[J_z, F] = f^T C_T conj(j)`.
fn gram_times_conj_j<S: Scalar>(c: &DMatrix<S>, sol: &KreinSolutionIn<S>) -> (Vec<S>, Vec<S>) {
    let t = sol.re.len();
    let row = |i: usize, x: &[S]| (0..t).fold(<S as Scalar>::from_f64(0.0), |acc, k| acc + c[(i, k)].clone() * x[k].clone());
    ((0..t).map(|i| row(i, &sol.re)).collect(), (0..t).map(|i| -row(i, &sol.im)).collect())
}

fn pair<S: Scalar>(f: &[S], g: &(Vec<S>, Vec<S>)) -> Complex64 {
    let dot = |x: &[S]| f.iter().zip(x).fold(<S as Scalar>::from_f64(0.0), |acc, (a, b)| acc + a.clone() * b.clone());
    Complex64::new(dot(&g.0).to_f64(), dot(&g.1).to_f64())
}

fn c5_kernels() -> Outcome {
    // C_T has condition number ~1e26 at T = 32 for these coefficients, and
    // the Chebyshev coefficients of z^m reach ~1e8, so even double-double
    // leaves visible error; the data, solve and sums run in rationals, with
    // coefficients and points on short dyadic grids to keep them fast.
    type S = BigRational;
    let mut rng = rng(5);
    let (mut kernel, mut repro, mut special) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut double_kernel = 0.0_f64;
    for t in [1, 2, 4, 8, 16, 24, 32] {
        let coeffs = random_dyadic_coeffs(&mut rng, t);
        let c = connecting_from_response_in(&response_vector_in::<S>(&coeffs, 2 * t - 1).unwrap(), t).unwrap();
        let w = control_operator_in::<S>(&coeffs, t).unwrap();
        let factor = krein_factor(&c).unwrap();
        let top = c.to_corner_top();
        let lambda = build_lambda(t).unwrap();
        // monomial z^m in the basis T_1..T_T is row m of Lambda^{-T}
        let basis: Vec<Vec<S>> = (0..t)
            .map(|m| {
                let mut mono = vec![BigRational::from_integer(BigInt::from(0)); t];
                mono[m] = BigRational::from_integer(BigInt::from(1));
                lambda.monomial_to_chebyshev(&mono).unwrap()
            })
            .collect();
        let gram = if t <= 8 { Some(gram_from_control(&coeffs, t).unwrap()) } else { None };
        for _ in 0..20 {
            let (z, l) = (dyadic_c(&mut rng), dyadic_c(&mut rng));
            let sol = factor.solve(z);
            let direct = kernel_polynomial_sum(&coeffs, t, z, l).unwrap();
            // Cauchy-Schwarz scale sqrt(J_z(z) J_l(l)).
            let scale = (kernel_polynomial_sum(&coeffs, t, z, z).unwrap().re
                * kernel_polynomial_sum(&coeffs, t, l, l).unwrap().re)
                .sqrt();
            kernel = kernel.max((sol.kernel_at(l) - direct).norm() / scale);
            if let Some(g) = &gram {
                double_kernel = double_kernel.max((krein_solve(g, z).unwrap().kernel_at(l) - direct).norm() / scale);
            }

            let g = gram_times_conj_j(top.matrix(), &sol);
            for (m, f) in basis.iter().enumerate() {
                let want = z.powu(m as u32);
                repro = repro.max((pair(f, &g) - want).norm() / want.norm().max(1.0));
            }

            let p = p_values(&coeffs, t, z).unwrap();
            let norm = p.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            for (i, pi) in p.iter().enumerate() {
                let (mut re, mut im) = (<S as Scalar>::from_f64(0.0), <S as Scalar>::from_f64(0.0));
                for k in 0..t {
                    re += w[(i, k)].clone() * sol.re[k].clone();
                    im += w[(i, k)].clone() * sol.im[k].clone();
                }
                special = special.max((Complex64::new(re.to_f64(), im.to_f64()) - pi.conj()).norm() / norm);
            }
        }
    }
    check(
        kernel < 1e-9 && repro < 1e-9 && special < 1e-9,
        format!(
            "T in 1..32, 20 (z, lambda) each, rational mode: Krein vs polynomial kernel {kernel:.1e}, \
             reproducing property {repro:.1e}, W_T j = conj(p(z)) {special:.1e} (relative); double-precision Krein for T <= 8: {double_kernel:.1e}"
        ),
    )
}

fn chebyshev_by_recurrence(t: usize) -> Vec<Vec<BigInt>> {
    // T_0 = 0, T_1 = 1, T_{k+1} = x T_k - T_{k-1}; coefficient lists, lowest first.
    let mut polys: Vec<Vec<BigInt>> = vec![vec![], vec![BigInt::from(1)]];
    for k in 1..t {
        let mut next = vec![BigInt::from(0); k + 1];
        for (i, c) in polys[k].iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in polys[k - 1].iter().enumerate() {
            next[i] -= c;
        }
        polys.push(next);
    }
    polys
}

fn c6_exactness() -> Outcome {
    let polys = chebyshev_by_recurrence(30);
    let mut rows_ok = true;
    for t in 1..=30 {
        let l = build_lambda(t).unwrap();
        for i in 0..t {
            let want = &polys[i + 1];
            rows_ok &= (0..t).all(|j| l.entry(i, j) == want.get(j).cloned().unwrap_or_default());
        }
    }

    let mut rng = rng(6);
    let mut round_trip = true;
    for len in [1, 2, 5, 12, 20, 30] {
        let s: Vec<BigRational> = (0..len)
            .map(|_| BigRational::new(BigInt::from(rng.random_range(-1000..1000)), BigInt::from(rng.random_range(1..97))))
            .collect();
        let r = moments_to_response_in(&s).unwrap();
        round_trip &= response_to_moments_in(&r).unwrap() == s;
        let back = moments_to_response_in(&response_to_moments_in(&r).unwrap()).unwrap();
        round_trip &= back == r;
    }

    let at_zero = chebyshev_values(61, 0.0_f64);
    let mut zero_ok = true;
    for n in 1..=30 {
        zero_ok &= at_zero[2 * n] == 0.0;
        zero_ok &= at_zero[2 * n - 1] == if n % 2 == 1 { 1.0 } else { -1.0 };
        // Constant terms of Lambda rows are the same values, exactly.
        let l = build_lambda(2 * n).unwrap();
        zero_ok &= l.entry(2 * n - 1, 0) == BigInt::from(0);
        zero_ok &= l.entry(2 * n - 2, 0) == BigInt::from(if n % 2 == 1 { 1 } else { -1 });
    }
    check(
        rows_ok && round_trip && zero_ok,
        format!("Lambda rows vs recurrence (T <= 30): {rows_ok}; rational round trip: {round_trip}; T_k(0) values: {zero_ok}"),
    )
}

fn c7_determinacy() -> Outcome {
    let sc = hankel_min_eig_sequence(&semicircle_moments(23), 12, PrecisionMode::Double).unwrap();
    let strict = sc.values.windows(2).skip(1).all(|w| w[1] < w[0]);

    let mut rng = rng(7);
    let mut worst_rise = f64::NEG_INFINITY;
    for i in 0..50 {
        let t = 1 + i % 16;
        let coeffs = random_coeffs(&mut rng, t);
        let r = response_vector(&coeffs, 2 * t - 1).unwrap();
        let beta = connecting_min_eig_sequence(&r, t, PrecisionMode::Double).unwrap();
        for w in beta.values.windows(2) {
            worst_rise = worst_rise.max(w[1] - w[0]);
        }
    }
    let monotone = worst_rise <= 1e-12;

    let geo = JacobiCoefficients::geometric(2.0, 0.0).unwrap();
    let def = deficiency_sums(&geo, Complex64::i(), 60).unwrap();
    let converged = def.converged_at.is_some_and(|n| n <= 60);
    let beta = connecting_min_eig_from_coefficients(&geo, 40).unwrap();
    let lim = *beta.last().unwrap();
    let bound = circle_bound_connecting(&geo, 60).unwrap();
    let bounded = lim >= bound.value - 1e-6;
    check(
        strict && monotone && converged && bounded,
        format!(
            "semicircle lambda_2 > ... > lambda_12: {strict} (lambda_12 = {:.3e}); beta_T largest rise {worst_rise:.1e} on 50 instances; \
             a_n = 2^n: deficiency tails {:.1e}/{:.1e} converged at n = {:?}, lim beta = {lim:.7} >= bound {:.7}",
            sc.values[11], def.p_tail, def.q_tail, def.converged_at, bound.value
        ),
    )
}

fn c8_hermite_biehler() -> Outcome {
    let mut rng = rng(8);
    let mut strict = true;
    let mut tightest = f64::INFINITY;
    for t in [1, 2, 4, 8, 16] {
        let coeffs = random_coeffs(&mut rng, t);
        let e = hb_function(&coeffs, t).unwrap();
        for _ in 0..100 {
            let z = Complex64::new(rng.random_range(-5.0..5.0), 5.0 - rng.random_range(0.0..5.0));
            let (up, down) = (e.eval(z).norm(), e.eval(z.conj()).norm());
            strict &= up > down;
            tightest = tightest.min(up / down);
        }
    }
    let e1 = hb_function(&JacobiCoefficients::free(), 1).unwrap();
    let mut closed = 0.0_f64;
    for _ in 0..100 {
        let z = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let want = (Complex64::new(1.0, 0.0) - Complex64::i() * z) * std::f64::consts::PI.sqrt();
        closed = closed.max((e1.eval(z) - want).norm() / want.norm().max(1.0));
    }

    let e5 = hb_function(&random_coeffs(&mut rng, 5), 5).unwrap();
    let pts: Vec<(Complex64, Complex64)> = (0..20).map(|_| (rand_c(&mut rng), rand_c(&mut rng))).collect();
    let k = measure_kernel_constant(&e5, &pts).unwrap();
    check(
        strict && closed < 1e-14,
        format!(
            "|E(z)| > |E(conj z)| on 500 samples: {strict} (smallest ratio {tightest:.4}); T = 1 closed form error {closed:.1e}; \
             measured E-kernel / J constant at T = 5: {:.12} + {:.1e}i (spread {:.1e})",
            k.mean.re, k.mean.im, k.spread
        ),
    )
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        run(1, "free chain connecting operator is the identity", s(5), c1_free_identity),
        run(2, "four constructions of the connecting operator agree", s(30), c2_four_way),
        run(3, "inverse round trip", s(30), c3_round_trip),
        run(4, "response vector characterization", s(30), c4_characterization),
        run(5, "kernel, Krein and reproducing identities", s(30), c5_kernels),
        run(6, "Chebyshev transform exactness", s(30), c6_exactness),
        run(7, "determinacy sequences and circle bound", s(60), c7_determinacy),
        run(8, "Hermite-Biehler inequality and closed form", s(30), c8_hermite_biehler),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
