use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use plie_core::explog::{exp_chart, log_chart, second_kind_inverse, trotter_sum, LieBasis};
use plie_core::powermaps::{power_padic, pth_root, tau_p};
use plie_core::{ChartGroup, ZpInt};

const N: u32 = 24;
const M: u32 = 10;

fn groups() -> Vec<ChartGroup> {
    vec![ChartGroup::multiplicative(5).unwrap(), ChartGroup::gl(2, 5).unwrap(), ChartGroup::heisenberg(5).unwrap()]
}

fn powermaps(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for g in groups() {
        let x = g.random_element(&mut rng, N, 1);
        let t = tau_p(&g, &x).unwrap();
        let z = ZpInt::random(&mut rng, 5, N, 0);
        let name = g.kind().to_string();
        c.bench_function(&format!("tau_p/{name}"), |b| b.iter(|| tau_p(&g, black_box(&x))));
        c.bench_function(&format!("pth_root/{name}"), |b| b.iter(|| pth_root(&g, black_box(&t))));
        c.bench_function(&format!("power_padic/{name}"), |b| b.iter(|| power_padic(&g, black_box(&x), &z)));
    }
}

fn limits(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for g in groups() {
        let x = g.random_element(&mut rng, N, 1);
        let name = g.kind().to_string();
        c.bench_function(&format!("log/{name}"), |b| b.iter(|| log_chart(&g, black_box(&x), M)));
        c.bench_function(&format!("exp/{name}"), |b| b.iter(|| exp_chart(&g, black_box(&x), M)));
    }
    let heis = ChartGroup::heisenberg(5).unwrap();
    let (x, y) = (heis.random_element(&mut rng, N, 1), heis.random_element(&mut rng, N, 1));
    c.bench_function("trotter/heis", |b| b.iter(|| trotter_sum(&heis, black_box(&x), &y, 8, M)));
    let basis = LieBasis::standard(5, N, 3).unwrap();
    let target = heis.random_element(&mut rng, N, 1);
    c.bench_function("second_kind_inverse/heis", |b| {
        b.iter(|| second_kind_inverse(&heis, &basis, 0, black_box(&target), M))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = powermaps, limits
}
criterion_main!(benches);
