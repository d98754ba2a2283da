//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use procsteer::fixtures::Fixture;
use procsteer::linalg::{eig_hermitian, kron, overlap_fidelity, uhlmann_fidelity};
use procsteer::metrics::{
    avg_state_fidelity, bloch_comparison, classical_fidelity_bounds, complementary_fidelity_chi,
    quantum_composition_alpha, quantum_robustness_beta, steerable_weight, DEFAULT_COMP_BASES,
    F_COMP_C_REFERENCE, F_SC_REFERENCE,
};
use procsteer::qstate::{
    derive_walkoff_state, fit_noise_intensity, geometric_discord, haar_unitary, make_noise_model_state,
    make_noisy_werner, make_walkoff_state, make_werner, random_density, random_two_qubit, singlet,
    singlet_projector, TwoQubitDensity,
};
use procsteer::rsp::{simulate_rsp_outputs, steered_assemblage, EXPERIMENT_PHIS};
use procsteer::sdp::{self, AffineExpr, LinearForm, SdpProblem, Sense};
use procsteer::tomo::{chi_from_unit_images, chi_target, process_tomography, sample_sextet, ProcessMatrix};
use procsteer::CMatrix;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn chi_of_state(rho: &TwoQubitDensity, phi: f64) -> ProcessMatrix {
    process_tomography(&simulate_rsp_outputs(rho, phi)).expect("tomography of a simulated sextet")
}

fn werner_chi(p: f64) -> ProcessMatrix {
    chi_of_state(&make_werner(p).unwrap(), 0.0)
}

fn criterion_1() -> Outcome {
    let mut worst_dev = 0.0_f64;
    let mut worst_time = 0.0_f64;
    let mut values = Vec::new();
    for phi in EXPERIMENT_PHIS {
        let start = Instant::now();
        let beta = quantum_robustness_beta(&chi_target(phi)).unwrap().value;
        worst_time = worst_time.max(start.elapsed().as_secs_f64());
        worst_dev = worst_dev.max((beta - 0.464).abs());
        values.push(format!("{beta:.6}"));
    }
    Outcome::new(
        worst_dev <= 0.005 && worst_time < 5.0,
        format!("beta = [{}], slowest {worst_time:.2} s", values.join(", ")),
    )
}

fn criterion_2() -> Outcome {
    let alphas: Vec<f64> = EXPERIMENT_PHIS
        .iter()
        .map(|&phi| quantum_composition_alpha(&chi_target(phi)).unwrap().value)
        .collect();
    let worst = alphas.iter().map(|a| (a - 1.0).abs()).fold(0.0, f64::max);
    Outcome::new(worst <= 1e-4, format!("max |alpha - 1| = {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let b = classical_fidelity_bounds(&chi_target(0.0)).unwrap();
    let pass = (0.78..=0.80).contains(&b.f_sc)
        && (0.83..=0.85).contains(&b.f_comp_c)
        && (b.f_sc - F_SC_REFERENCE).abs() < 1e-6
        && (b.f_comp_c - F_COMP_C_REFERENCE).abs() < 1e-6;
    Outcome::new(
        pass,
        format!("F_Ec = {:.10}, F_sc = {:.10}, F_comp_c = {:.10}", b.f_ec, b.f_sc, b.f_comp_c),
    )
}

/// Smallest p at which `value(p)` drops below `zero`, to about 1e-4.
fn zero_crossing(value: impl Fn(f64) -> f64, zero: f64) -> Option<f64> {
    let step = 0.01;
    let mut prev = 0.0;
    for k in 0..=100 {
        let p = k as f64 * step;
        if value(p) < zero {
            if k == 0 {
                return Some(0.0);
            }
            let (mut lo, mut hi) = (prev, p);
            while hi - lo > 1e-4 {
                let mid = 0.5 * (lo + hi);
                if value(mid) < zero {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        prev = p;
    }
    None
}

fn criterion_4() -> Outcome {
    let pc = 1.0 - 1.0 / 3f64.sqrt();
    let zero = 1e-5;
    let pa = zero_crossing(|p| quantum_composition_alpha(&werner_chi(p)).unwrap().value, zero);
    let pb = zero_crossing(|p| quantum_robustness_beta(&werner_chi(p)).unwrap().value, zero);
    let inside = |x: Option<f64>| x.is_some_and(|x| (x - pc).abs() <= 0.01);
    let w = make_werner(0.5).unwrap();
    let d = geometric_discord(&w);
    let chi = werner_chi(0.5);
    let a = quantum_composition_alpha(&chi).unwrap().value;
    let b = quantum_robustness_beta(&chi).unwrap().value;
    let pass = inside(pa) && inside(pb) && d > 0.05 && a < zero && b < zero;
    Outcome::new(
        pass,
        format!(
            "alpha zero at {pa:.4?}, beta zero at {pb:.4?} (expected {pc:.4}); p=0.5: D = {d:.4}, alpha = {a:.1e}, beta = {b:.1e}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let dw = geometric_discord(&make_noisy_werner(0.5).unwrap());
    let dn = geometric_discord(&make_noise_model_state(40.0, 0.06).unwrap());
    Outcome::new(
        (dw - 0.11).abs() <= 0.01 && (dn - 0.07).abs() <= 0.01,
        format!("D(noisy Werner 0.5) = {dw:.5}, D(noise model 40°, 0.06) = {dn:.5}"),
    )
}

fn criterion_6() -> Outcome {
    let theory = steerable_weight(&steered_assemblage(&make_noise_model_state(40.0, 0.06).unwrap()))
        .unwrap()
        .value;
    let expt = steerable_weight(&steered_assemblage(&Fixture::Expt40.state().unwrap()))
        .unwrap()
        .value;
    Outcome::new(
        (theory - 0.15).abs() <= 0.02 && (expt - 0.02).abs() <= 0.02,
        format!("SW(noise model 40°, 0.06) = {theory:.5}, SW(measured 40°) = {expt:.5}"),
    )
}

fn criterion_7() -> Outcome {
    let want = [0.94, 0.63, 0.59];
    let psi = singlet_projector();
    let mut overlaps = Vec::new();
    let mut pass = true;
    for (fx, w) in Fixture::ALL.iter().zip(want) {
        let f = overlap_fidelity(&fx.raw(), &psi);
        pass &= (f - w).abs() <= 0.02;
        overlaps.push(format!("{}: {f:.4}", fx.name()));
    }
    let fit = fit_noise_intensity(&Fixture::Expt90.state().unwrap()).unwrap();
    let fit_pass = (fit.p - 0.06).abs() <= 0.005 && fit.fidelity >= 0.985;
    Outcome::new(
        pass && fit_pass,
        format!(
            "overlaps [{}] {}; noise fit p = {:.4}, fidelity = {:.5} {}",
            overlaps.join(", "),
            if pass { "ok" } else { "out of range" },
            fit.p,
            fit.fidelity,
            if fit_pass { "ok" } else { "out of range" }
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut worst_fid = f64::INFINITY;
    let mut worst_margin = f64::INFINITY;
    for phi in EXPERIMENT_PHIS {
        let chi = chi_of_state(&singlet(), phi);
        worst_fid = worst_fid.min(chi.process_fidelity(&chi_target(phi)));
        let best = classical_fidelity_bounds(&chi_target(phi)).unwrap();
        let samples = bloch_comparison(&chi, &best.chi_c, 98, 2024);
        let min_r = samples.iter().map(|s| s.r_expt).fold(f64::INFINITY, f64::min);
        let max_rc = samples.iter().map(|s| s.r_classical).fold(0.0, f64::max);
        let all = samples.iter().all(|s| s.r_expt > s.r_classical);
        worst_margin = worst_margin.min(if all { min_r - max_rc } else { f64::NEG_INFINITY });
    }
    Outcome::new(
        worst_fid >= 1.0 - 1e-8 && worst_margin > 0.0,
        format!("min process fidelity = {worst_fid:.12}, min |r| - max |r_c| = {worst_margin:.4}"),
    )
}

fn criterion_9() -> Outcome {
    let exact = simulate_rsp_outputs(&singlet(), 0.0);
    let target = chi_target(0.0);
    let fs: Vec<f64> = (0..20u64)
        .map(|k| {
            let noisy = sample_sextet(&exact, 10_000, 1000 * k).unwrap();
            avg_state_fidelity(&process_tomography(&noisy).unwrap(), &target)
        })
        .collect();
    let mean = fs.iter().sum::<f64>() / fs.len() as f64;
    let var = fs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (fs.len() - 1) as f64;
    let sd = var.sqrt();
    Outcome::new(sd < 0.005, format!("mean F_s = {mean:.5}, sd = {sd:.5}"))
}

/// Stinespring dilation with a two-level environment.
fn random_channel(rng: &mut ChaCha8Rng) -> ProcessMatrix {
    let u = haar_unitary(4, rng);
    let kraus: Vec<CMatrix> = (0..2)
        .map(|e| {
            let mut k = CMatrix::zeros(2);
            for i in 0..2 {
                for j in 0..2 {
                    k[(i, j)] = u[(2 * i + e, 2 * j)];
                }
            }
            k
        })
        .collect();
    let images = [0, 1].map(|a| {
        [0, 1].map(|b| {
            let x = CMatrix::unit(2, a, b);
            kraus
                .iter()
                .fold(CMatrix::zeros(2), |acc, k| &acc + &(&(k * &x) * &k.adjoint()))
        })
    });
    ProcessMatrix::from_matrix(chi_from_unit_images(&images).hermitize()).unwrap()
}

fn lambda_min_sdp(h: &CMatrix) -> f64 {
    let mut p = SdpProblem::new(Sense::Maximize);
    let t = p.add_scalar("t");
    p.add_objective(LinearForm::new().scalar(t, 1.0));
    p.add_psd(
        "h - t",
        AffineExpr::constant(h.clone()).plus_scalar(t, CMatrix::identity(h.dim()).scale(-1.0)),
    );
    sdp::solve(&p).unwrap().objective_value
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failures = Vec::new();

    // singlet is invariant under U ⊗ U
    let psi = singlet_projector();
    let sym = (0..20)
        .map(|_| {
            let u = haar_unitary(2, &mut rng);
            psi.conjugate_by(&kron(&u, &u)).max_abs_diff(&psi)
        })
        .fold(0.0, f64::max);
    if sym > 1e-12 {
        failures.push(format!("rotational symmetry {sym:.1e}"));
    }

    let ns = (0..50)
        .map(|_| steered_assemblage(&random_two_qubit(&mut rng)).no_signaling_residual())
        .fold(0.0, f64::max);
    if ns > 1e-12 {
        failures.push(format!("no-signaling {ns:.1e}"));
    }

    let mut hofmann = f64::NEG_INFINITY;
    for k in 0..100 {
        let chi = random_channel(&mut rng);
        let phi = EXPERIMENT_PHIS[k % 4];
        let fs = avg_state_fidelity(&chi, &chi_target(phi));
        let fc = complementary_fidelity_chi(&chi, phi, DEFAULT_COMP_BASES).unwrap();
        hofmann = hofmann.max(fc - (3.0 * fs + 1.0) / 4.0);
    }
    if hofmann > 1e-9 {
        failures.push(format!("Hofmann excess {hofmann:.1e}"));
    }

    // 25 Werner states away from the threshold plus 25 random states
    let pc = 1.0 - 1.0 / 3f64.sqrt();
    let mut states: Vec<TwoQubitDensity> = (0..=26)
        .map(|k| k as f64 / 26.0)
        .filter(|p| (p - pc).abs() > 0.02)
        .take(25)
        .map(|p| make_werner(p).unwrap())
        .collect();
    states.extend((0..25).map(|_| random_two_qubit(&mut rng)));
    let mut inconsistent = 0;
    let mut fidelity_violations = 0;
    for rho in &states {
        let chi = chi_of_state(rho, 0.0);
        let a = quantum_composition_alpha(&chi).unwrap().value;
        let b = quantum_robustness_beta(&chi).unwrap().value;
        if (a < 1e-6) != (b < 1e-6) {
            inconsistent += 1;
        }
        if a < 1e-6 && avg_state_fidelity(&chi, &chi_target(0.0)) > F_SC_REFERENCE + 1e-6 {
            fidelity_violations += 1;
        }
    }
    if inconsistent + fidelity_violations > 0 {
        failures.push(format!(
            "alpha/beta disagree on {inconsistent} states, classical fidelity exceeded on {fidelity_violations}"
        ));
    }

    let mut lam = 0.0_f64;
    for _ in 0..100 {
        let h = &random_density(4, &mut rng) - &random_density(4, &mut rng);
        let want = eig_hermitian(&h).unwrap().min();
        lam = lam.max((lambda_min_sdp(&h) - want).abs());
    }
    if lam >= 1e-7 {
        failures.push(format!("lambda_min error {lam:.1e}"));
    }

    let mut walk = 0.0_f64;
    for deg in 0..=90 {
        let a = derive_walkoff_state(deg as f64).unwrap();
        let b = make_walkoff_state(deg as f64).unwrap();
        walk = walk.max(a.matrix().max_abs_diff(b.matrix()));
        walk = walk.max(1.0 - uhlmann_fidelity(a.matrix(), b.matrix()).unwrap());
    }
    if walk > 1e-9 {
        failures.push(format!("walk-off derivation {walk:.1e}"));
    }

    let detail = format!(
        "symmetry {sym:.1e}, no-signaling {ns:.1e}, Hofmann max excess {hofmann:.1e}, \
         {} consistency states, lambda_min error {lam:.1e}, walk-off {walk:.1e}",
        states.len()
    );
    if failures.is_empty() {
        Outcome::new(true, detail)
    } else {
        Outcome::new(false, format!("{detail}; failed: {}", failures.join("; ")))
    }
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags; listing must not run the suite
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("ideal robustness", criterion_1),
        ("ideal composition", criterion_2),
        ("classical bounds", criterion_3),
        ("Werner threshold", criterion_4),
        ("discord anchors", criterion_5),
        ("steerable weight anchors", criterion_6),
        ("fixture fidelities", criterion_7),
        ("ideal protocol identity", criterion_8),
        ("statistical floor", criterion_9),
        ("property suites", criterion_10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} [{:.1} s]",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
