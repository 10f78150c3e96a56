use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qip_core::rng::{random_basis, random_density, stream_rng};
use qip_core::{eig_hermitian, i_projection, qmlp, qre, MixtureFamily, ModelClass};

fn bench_eig(c: &mut Criterion) {
    let mut group = c.benchmark_group("eig_hermitian");
    for d in [2usize, 4, 8, 16] {
        let mut rng = stream_rng(0xbe9c, &[d as u64]);
        let rho = random_density(d, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(d), &rho, |b, rho| {
            b.iter(|| eig_hermitian(rho.matrix()).unwrap())
        });
    }
    group.finish();
}

fn bench_qre(c: &mut Criterion) {
    let mut group = c.benchmark_group("qre");
    for d in [2usize, 4, 8, 16] {
        let mut rng = stream_rng(0xbe9d, &[d as u64]);
        let rho = random_density(d, &mut rng);
        let sigma = random_density(d, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(d), &(rho, sigma), |b, (r, s)| {
            b.iter(|| qre(r, s).unwrap())
        });
    }
    group.finish();
}

fn bench_qmlp(c: &mut Criterion) {
    let mut group = c.benchmark_group("qmlp_spectral_floor");
    group.sample_size(30);
    for d in [2usize, 4, 8] {
        let mut rng = stream_rng(0xbe9e, &[d as u64]);
        let rho = random_density(d, &mut rng);
        let model = ModelClass::spectral_floor(d, 0.25 / d as f64).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &(rho, model), |b, (r, m)| {
            b.iter(|| qmlp(r, m).unwrap())
        });
    }
    group.finish();
}

fn bench_i_projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("i_projection_diagonal");
    group.sample_size(30);
    for d in [2usize, 4, 8] {
        let mut rng = stream_rng(0xbe9f, &[d as u64]);
        let sigma = random_density(d, &mut rng);
        let basis = random_basis(d, &mut rng);
        let family = MixtureFamily::diagonal_in_basis(&basis).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &(sigma, family), |b, (s, f)| {
            b.iter(|| i_projection(s, f).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_eig, bench_qre, bench_qmlp, bench_i_projection);
criterion_main!(benches);
