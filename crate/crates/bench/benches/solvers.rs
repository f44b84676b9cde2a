use std::hint::black_box;

use conestab::angular_spectrum::cap_eigenvalue;
use conestab::functionals::{distance_to_manifold, ConeProblem};
use conestab::radial_ode::find_radial_eigenvalues;
use conestab::{ConeDomain, RadialGrid};
use criterion::{criterion_group, criterion_main, Criterion};

fn radial(c: &mut Criterion) {
    c.bench_function("find_radial_eigenvalues N=3 lambda=6.5 x3", |b| {
        b.iter(|| find_radial_eigenvalues(black_box(3), black_box(6.5), 3, 1.0).unwrap())
    });
    c.bench_function("find_radial_eigenvalues N=6 lambda=20 x3", |b| {
        b.iter(|| find_radial_eigenvalues(black_box(6), black_box(20.0), 3, 1.0).unwrap())
    });
}

fn angular(c: &mut Criterion) {
    c.bench_function("cap_eigenvalue N=4 theta0=0.9 m=1", |b| {
        b.iter(|| cap_eigenvalue(black_box(4), black_box(0.9), 1, 1).unwrap())
    });
}

fn problems(c: &mut Criterion) {
    let cone = ConeDomain::cap(3, 0.5).unwrap();
    c.bench_function("ConeProblem::new cap N=3", |b| {
        b.iter(|| ConeProblem::new(black_box(cone), RadialGrid::default()).unwrap())
    });
    let p = ConeProblem::new(cone, RadialGrid::default()).unwrap();
    let phi = p.bubble_at(1.3).scaled(0.8);
    c.bench_function("distance_to_manifold cap N=3", |b| {
        b.iter(|| distance_to_manifold(black_box(&phi), &p).unwrap())
    });
}

criterion_group!(benches, radial, angular, problems);
criterion_main!(benches);
