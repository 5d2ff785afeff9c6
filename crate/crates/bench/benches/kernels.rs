use criterion::{black_box, criterion_group, criterion_main, Criterion};
use reslab_core::config::Spec1D;
use reslab_core::density::{DensityField, SpectralPairing};
use reslab_core::model::RankOneModel;
use reslab_core::oracle::build_oracle;
use reslab_core::pv::principal_value;
use reslab_core::resonance::solve_resonance;
use reslab_core::{SampledFunction, UniformGrid};

fn pv(c: &mut Criterion) {
    let f = SampledFunction::from_real_fn(UniformGrid::default(), |x| (-x * x / 2.0).exp()).unwrap();
    c.bench_function("pv 2^15", |b| b.iter(|| principal_value(black_box(&f)).unwrap()));
}

fn model_kernels(c: &mut Criterion) {
    let p = Spec1D::p1().build().unwrap();
    let pair = SpectralPairing::eigenvector(&p).unwrap();
    let alpha = p.alpha0() + 1e-2;
    let field = DensityField::new(&p, &pair, alpha).unwrap();
    c.bench_function("density point", |b| b.iter(|| field.density(black_box(1.003)).unwrap()));
    c.bench_function("resonance solve", |b| b.iter(|| solve_resonance(&p, black_box(alpha)).unwrap()));
    c.bench_function("oracle 512", |b| b.iter(|| build_oracle(&p, black_box(alpha), 512).unwrap()));
}

criterion_group!(benches, pv, model_kernels);
criterion_main!(benches);
