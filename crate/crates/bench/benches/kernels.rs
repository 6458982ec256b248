use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;

use siasim_core::channel::{complex_gaussian_matrix, draw_channel};
use siasim_core::experiments::montecarlo::prepare_sst_user;
use siasim_core::outage::{area_a2, cdf_f_real_k2nr1};
use siasim_core::receivers::{post_sinr_mmse, weighted_gram, Eigensystem, PreparedSst};
use siasim_core::rng::substream;
use siasim_core::scheduler::build_streams;
use siasim_core::special::tricomi_u;
use siasim_core::{db_to_linear, Encoding, SystemConfig, C64};

fn sinr(c: &mut Criterion) {
    let mut g = c.benchmark_group("post_sinr");
    for nr in [2usize, 4, 8] {
        let mut rng = substream(7, nr as u64);
        let h = complex_gaussian_matrix(nr, 1, &mut rng).column(0).into_owned();
        let icm = weighted_gram(&complex_gaussian_matrix(nr, 2 * nr, &mut rng), &vec![1.0; 2 * nr]);
        let r = &icm + DMatrix::<C64>::identity(nr, nr).scale(0.01);
        g.bench_with_input(BenchmarkId::new("mmse_cholesky", nr), &nr, |b, _| {
            b.iter(|| post_sinr_mmse(black_box(&h), black_box(&r), 1.0).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("eigensystem", nr), &nr, |b, _| {
            b.iter(|| Eigensystem::new(black_box(&icm)).unwrap())
        });
        let prepared = PreparedSst::new(&h, &icm, 1.0).unwrap();
        g.bench_with_input(BenchmarkId::new("prepared_gamma", nr), &nr, |b, _| {
            b.iter(|| prepared.gamma(black_box(0.01)))
        });
    }
    g.finish();
}

fn special(c: &mut Criterion) {
    c.bench_function("tricomi_u(2.5, 0.5, 3)", |b| b.iter(|| tricomi_u(black_box(2.5), 0.5, black_box(3.0)).unwrap()));
    let even = SystemConfig::new(6, 2, 10).with_encoding(Encoding::Real);
    c.bench_function("area_a2 K=6 Nr=2", |b| b.iter(|| area_a2(black_box(db_to_linear(15.0)), &even).unwrap()));
    let odd = SystemConfig::new(5, 2, 10).with_encoding(Encoding::Real);
    c.bench_function("cdf_f_real_k2nr1 K=5 Nr=2", |b| {
        b.iter(|| cdf_f_real_k2nr1(black_box(db_to_linear(15.0)), &odd).unwrap())
    });
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("trial");
    let sst = SystemConfig::new(3, 2, 10);
    g.bench_function("sst complex K=3 Nr=2 L=10", |b| {
        let mut rng = substream(1, 0);
        b.iter(|| {
            (0..sst.l)
                .map(|_| prepare_sst_user(&draw_channel(&sst, &mut rng), &sst).unwrap().gamma_lb(0.01))
                .fold(0.0, f64::max)
        })
    });
    let sm = SystemConfig::new(3, 8, 100).with_nt(4).with_encoding(Encoding::Real);
    let plan = build_streams(&sm).unwrap();
    g.bench_function("sm real K=3 Nr=8 Nt=4 one user", |b| {
        let mut rng = substream(1, 1);
        b.iter(|| plan.prepare_user(&draw_channel(&sm, &mut rng), 1.0, 1.0).unwrap())
    });
    g.finish();
}

criterion_group!(benches, sinr, special, monte_carlo);
criterion_main!(benches);
