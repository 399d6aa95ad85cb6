use criterion::{black_box, criterion_group, criterion_main, Criterion};

use foldcrest_core::dynamics::{first_return, IntegratorConfig, SectionSpec};
use foldcrest_core::normalform::{nf_vector_field, MuQuadraticCoeffs, NormalFormCoeffs};
use foldcrest_core::systems::builtin_fhn_fast;

fn bench_returns(c: &mut Criterion) {
    let config = IntegratorConfig::default();

    let nf = nf_vector_field(NormalFormCoeffs::fhn(), MuQuadraticCoeffs::default(), 0.1, 0.9);
    let section = SectionSpec::nf_s_minus();
    let start = section.from_chart([-2.1, 1e-2]).unwrap();
    c.bench_function("first_return/normal form", |b| {
        b.iter(|| black_box(first_return(nf, &section, black_box(start), &config, 0).unwrap()))
    });

    let fhn = builtin_fhn_fast(1.0 - 0.992, 1e-2);
    let plane = SectionSpec::plane_x(0.0);
    let start = [0.0, 0.0036229, -0.0135672];
    c.bench_function("first_return/fhn fast time", |b| {
        b.iter(|| black_box(first_return(fhn, &plane, black_box(start), &config, 0).unwrap()))
    });
}

criterion_group!(benches, bench_returns);
criterion_main!(benches);
