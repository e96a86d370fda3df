use std::hint::black_box;

use bergman_lab::atomic::{Decomposer, DEFAULT_RIDGE};
use bergman_lab::estimates::i_ct;
use bergman_lab::kernels::kernel_norm;
use bergman_lab::operators::{berezin, KernelImage};
use bergman_lab::{DiskPoint, Lattice, OperatorSpec, QuadratureGrid, Sequence, Symbol};
use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

fn quadrature(c: &mut Criterion) {
    let z = DiskPoint::polar(0.9, 0.3).unwrap();
    let grid = QuadratureGrid::focused(0.0, 0.9).unwrap();
    c.bench_function("grid_focused_0.99", |b| {
        b.iter(|| QuadratureGrid::focused(0.0, black_box(0.99)).unwrap())
    });
    c.bench_function("kernel_norm_p3_0.9", |b| {
        b.iter(|| kernel_norm(black_box(z), 3.0, 0.0, &grid).unwrap())
    });
    c.bench_function("i_ct_2_1_0.9", |b| {
        b.iter(|| i_ct(black_box(z), 2.0, 1.0, 1e-10).unwrap())
    });
}

fn operators(c: &mut Criterion) {
    let z = DiskPoint::polar(0.9375, 1.0).unwrap();
    let grid = QuadratureGrid::focused(0.0, z.modulus()).unwrap();
    let toeplitz = OperatorSpec::Toeplitz(Symbol::one_minus_r2());
    let diagonal = OperatorSpec::diagonal(Sequence::inv_n());
    c.bench_function("berezin_toeplitz_0.9375", |b| {
        b.iter(|| berezin(&toeplitz, black_box(z), 0.0, &grid).unwrap())
    });
    c.bench_function("berezin_diagonal_0.9375", |b| {
        b.iter(|| berezin(&diagonal, black_box(z), 0.0, &grid).unwrap())
    });
    c.bench_function("s_z_one_norms_toeplitz", |b| {
        b.iter(|| {
            let img = KernelImage::compute(&toeplitz, black_box(z), 0.0, &grid).unwrap();
            img.berezin_and_norms(&[1.0, 2.5, 5.0]).unwrap()
        })
    });
}

fn lattice(c: &mut Criterion) {
    let mut g = c.benchmark_group("lattice");
    g.sample_size(10);
    g.bench_function("build_0.5_0.95", |b| {
        b.iter(|| Lattice::build(black_box(0.5), 0.95).unwrap())
    });
    let lat = Lattice::build(0.7, 0.95).unwrap();
    g.bench_function("decomposer_0.7_0.95", |b| {
        b.iter(|| Decomposer::new(&lat, 0.0, DEFAULT_RIDGE).unwrap())
    });
    let dec = Decomposer::new(&lat, 0.0, DEFAULT_RIDGE).unwrap();
    let a = Complex64::new(0.3, 0.0);
    g.bench_function("decompose_kernel", |b| {
        b.iter(|| {
            dec.decompose(|w| bergman_lab::kernels::kernel_c(a, w.value(), 0.0), 2.0)
                .unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, quadrature, operators, lattice);
criterion_main!(benches);
