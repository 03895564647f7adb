//! Benchmarks of the hot paths: spectrum enumeration, the butterfly circuit,
//! the interference oracle, the per-reference covariance decomposition, the
//! mixture fit, and the Metropolis sampler. Sizes are picked so a full run
//! stays in seconds per benchmark while still exercising the 2^n scaling.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qaoatherm_core::ising::{generate_maxcut, generate_qubo, SpinConfiguration};
use qaoatherm_core::mcmc::{metropolis_sample, ChainConfig};
use qaoatherm_core::interference::brute_force_amplitude;
use qaoatherm_core::qaoa::{run_qaoa_with_spectrum, AngleSchedule};
use qaoatherm_core::stats::{fit_mixture2, sigma_eh_all};

fn full_spectrum(c: &mut Criterion) {
    let instance = generate_qubo(16, 1.0, 1).unwrap();
    c.bench_function("full_spectrum_n16", |b| {
        b.iter(|| black_box(instance.full_spectrum()))
    });
}

fn circuit(c: &mut Criterion) {
    let table = generate_qubo(14, 1.0, 2).unwrap().full_spectrum();
    let schedule = AngleSchedule::single(-0.11, 0.52);
    c.bench_function("run_qaoa_n14", |b| {
        b.iter(|| black_box(run_qaoa_with_spectrum(&table, &schedule).unwrap()))
    });
}

fn oracle(c: &mut Criterion) {
    let table = generate_qubo(12, 1.0, 3).unwrap().full_spectrum();
    c.bench_function("brute_force_amplitude_n12", |b| {
        b.iter(|| {
            black_box(
                brute_force_amplitude(&table, -0.11, 0.52, SpinConfiguration(0)).unwrap(),
            )
        })
    });
}

fn covariance_decomposition(c: &mut Criterion) {
    let table = generate_qubo(14, 1.0, 4).unwrap().full_spectrum();
    c.bench_function("sigma_eh_all_n14", |b| b.iter(|| black_box(sigma_eh_all(&table))));
}

fn mixture(c: &mut Criterion) {
    let table = generate_maxcut(10, 1.0, 5).unwrap().full_spectrum();
    let reference = table.ground_state();
    c.bench_function("fit_mixture2_n10", |b| {
        b.iter(|| black_box(fit_mixture2(&table, reference).unwrap()))
    });
}

fn sampler(c: &mut Criterion) {
    let instance = generate_qubo(10, 1.0, 6).unwrap();
    let config =
        ChainConfig { beta: 0.3, sweeps: 500, burn_in_sweeps: 100, chain_count: 1, seed: 7 };
    c.bench_function("metropolis_n10_500_sweeps", |b| {
        b.iter(|| black_box(metropolis_sample(&instance, &config).unwrap()))
    });
}

criterion_group!(
    benches,
    full_spectrum,
    circuit,
    oracle,
    covariance_decomposition,
    mixture,
    sampler
);
criterion_main!(benches);
