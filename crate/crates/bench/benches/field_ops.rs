use criterion::{black_box, criterion_group, criterion_main, Criterion};

use bfr_core::Field;

fn field_ops(c: &mut Criterion) {
    let f = Field::gf_default(8).unwrap();
    let a = f.element(0x53).unwrap();
    let b = f.element(0xca).unwrap();
    let mut group = c.benchmark_group("gf256");
    group.bench_function("mul", |bench| {
        bench.iter(|| f.mul(black_box(&a), black_box(&b)).unwrap())
    });
    group.bench_function("inv", |bench| bench.iter(|| f.inv(black_box(&a)).unwrap()));
    group.finish();

    let ext = Field::extension(8, 0x11d, 63).unwrap();
    let x = ext
        .from_words((0..63).map(|i| (i * 7 % 251) as u16).collect())
        .unwrap();
    let y = ext
        .from_words((0..63).map(|i| (i * 11 % 251 + 1) as u16).collect())
        .unwrap();
    let mut group = c.benchmark_group("gf256_ext63");
    group.bench_function("mul", |bench| {
        bench.iter(|| ext.mul(black_box(&x), black_box(&y)).unwrap())
    });
    group.bench_function("frobenius", |bench| {
        bench.iter(|| ext.frobenius(black_box(&x), 1).unwrap())
    });
    group.bench_function("inv", |bench| {
        bench.iter(|| ext.inv(black_box(&x)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, field_ops);
criterion_main!(benches);
