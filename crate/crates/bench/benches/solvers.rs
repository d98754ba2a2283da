use criterion::{black_box, criterion_group, criterion_main, Criterion};

use procsteer::linalg::eig_hermitian;
use procsteer::metrics::{quantum_composition_alpha, quantum_robustness_beta, steerable_weight};
use procsteer::qstate::{make_noise_model_state, make_walkoff_state};
use procsteer::rsp::{simulate_rsp_outputs, steered_assemblage};
use procsteer::tomo::process_tomography;

fn eig(c: &mut Criterion) {
    let chi = process_tomography(&simulate_rsp_outputs(&make_walkoff_state(40.0).unwrap(), 0.0)).unwrap();
    c.bench_function("eig_hermitian 4x4", |b| b.iter(|| eig_hermitian(black_box(chi.matrix())).unwrap()));
}

fn programs(c: &mut Criterion) {
    let rho = make_noise_model_state(70.0, 0.06).unwrap();
    let chi = process_tomography(&simulate_rsp_outputs(&rho, 0.0)).unwrap();
    let assemblage = steered_assemblage(&rho);
    let mut g = c.benchmark_group("programs");
    g.sample_size(20);
    g.bench_function("beta", |b| b.iter(|| quantum_robustness_beta(black_box(&chi)).unwrap()));
    g.bench_function("alpha", |b| b.iter(|| quantum_composition_alpha(black_box(&chi)).unwrap()));
    g.bench_function("steerable_weight", |b| b.iter(|| steerable_weight(black_box(&assemblage)).unwrap()));
    g.finish();
}

fn sweep_point(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    g.bench_function("walkoff point", |b| {
        b.iter(|| {
            let rho = make_noise_model_state(black_box(55.0), 0.06).unwrap();
            let chi = process_tomography(&simulate_rsp_outputs(&rho, 0.0)).unwrap();
            (
                quantum_composition_alpha(&chi).unwrap().value,
                quantum_robustness_beta(&chi).unwrap().value,
                steerable_weight(&steered_assemblage(&rho)).unwrap().value,
            )
        })
    });
    g.finish();
}

criterion_group!(benches, eig, programs, sweep_point);
criterion_main!(benches);
