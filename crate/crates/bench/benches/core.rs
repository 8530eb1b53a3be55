use criterion::{black_box, criterion_group, criterion_main, Criterion};
use entex_core::channels::{extract_kraus, zero_discord_family};
use entex_core::entanglement::concurrence_2q;
use entex_core::linalg::herm_eig;
use entex_core::random::{random_density, random_hermitian, seeded_rng};
use entex_core::spin_star::{BruteForceOracle, LABEL_A, LABEL_B};
use entex_core::sweep::{run_sweep, SweepConfig};
use entex_core::{DimsSpec, EnvSize, SpinStarParams};

fn eigensolver(c: &mut Criterion) {
    let mut rng = seeded_rng(1, 0);
    for n in [4, 16, 64] {
        let h = random_hermitian(n, &mut rng);
        c.bench_function(&format!("herm_eig {n}x{n}"), |b| b.iter(|| herm_eig(black_box(&h), 1e-10).unwrap()));
    }
}

fn concurrence(c: &mut Criterion) {
    let rho = random_density(&DimsSpec::qubits_ab(), 4, &mut seeded_rng(2, 0));
    c.bench_function("wootters concurrence", |b| b.iter(|| concurrence_2q(black_box(&rho), (LABEL_A, LABEL_B))));
}

fn sweep(c: &mut Criterion) {
    let config = SweepConfig { steps: 200, ..SweepConfig::default() };
    c.bench_function("sweep 201 points large-N", |b| b.iter(|| run_sweep(black_box(&config)).unwrap()));
}

fn brute_force(c: &mut Criterion) {
    let params = SpinStarParams::balanced().with_env(EnvSize::Finite(8));
    c.bench_function("brute-force oracle setup N=8", |b| b.iter(|| BruteForceOracle::new(black_box(&params)).unwrap()));
    let oracle = BruteForceOracle::new(&params).unwrap();
    c.bench_function("brute-force reduced state N=8", |b| b.iter(|| oracle.reduced_state(black_box(1.3)).unwrap()));
}

fn kraus(c: &mut Criterion) {
    let params = SpinStarParams::balanced();
    let family = zero_discord_family(&params).unwrap();
    c.bench_function("kraus extraction", |b| b.iter(|| extract_kraus(&family, &params, black_box(2.0)).unwrap()));
}

criterion_group!(benches, eigensolver, concurrence, sweep, brute_force, kraus);
criterion_main!(benches);
