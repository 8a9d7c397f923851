use super::*;
use crate::anisotropy::{Anisotropy, DecomposedAnisotropy};
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn grid_examples() {
    let g = TorusGrid::unit(&[64, 64]).unwrap();
    assert_eq!(g.len(), 4096);
    assert_eq!(g.cell_volume(), 1.0 / 4096.0);

    let g1 = TorusGrid::new(&[8], &[2.0]).unwrap();
    let ks: Vec<i64> = (0..8).map(|i| g1.frequency_indices(i)[0]).collect();
    assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
    assert!((g1.frequency(1)[0] - PI).abs() < 1e-15);

    assert!(matches!(TorusGrid::unit(&[6]), Err(Error::InvalidGrid(_))));
    assert!(TorusGrid::new(&[8], &[0.0]).is_err());
}

#[test]
fn index_round_trip() {
    let g = TorusGrid::unit(&[4, 8, 2]).unwrap();
    for i in 0..g.len() {
        assert_eq!(g.flat_index(&g.multi_index(i)), i);
    }
    assert_eq!(g.strides(), vec![16, 2, 1]);
}

#[test]
fn constant_and_exponential_spectra() {
    let g = TorusGrid::unit(&[16, 8]).unwrap();
    let one = GridFunction::constant(g.clone(), c(1.0, 0.0));
    let s = one.spectrum();
    assert!((s[0] - c(1.0, 0.0)).norm() < 1e-15);
    assert!(s[1..].iter().all(|v| v.norm() < 1e-15));

    let k = [3, -2];
    let direct = GridFunction::from_fn(g.clone(), |x| {
        let ph = 2.0 * PI * (3.0 * x[0] - 2.0 * x[1]);
        c(ph.cos(), ph.sin())
    });
    let spec = direct.spectrum();
    let at = g.flat_index(&[3, 6]);
    for (i, v) in spec.iter().enumerate() {
        let want = if i == at { 1.0 } else { 0.0 };
        assert!((v - c(want, 0.0)).norm() < 1e-13);
    }
    let built = GridFunction::exponential(g, &k).unwrap();
    assert!(built.max_abs_diff(&direct).unwrap() < 1e-13);
}

#[test]
fn round_trip_and_parseval() {
    let g = TorusGrid::new(&[32, 16], &[2.0, 0.5]).unwrap();
    for seed in 0..100 {
        let f = random_bandlimited(&g, seed, |k, _| k[0].abs() <= 10 && k[1].abs() <= 5, 2, false).unwrap();
        let back = GridFunction::new(g.clone(), 2, f.samples().to_vec()).unwrap();
        let again = GridFunction::from_spectrum(g.clone(), 2, back.spectrum().to_vec()).unwrap();
        let scale = f.sup_norm();
        assert!(again.max_abs_diff(&f).unwrap() <= 1e-12 * scale);

        let lhs = f.energy();
        let rhs: f64 = g.volume() * f.spectrum().iter().map(|v| v.norm_sqr()).sum::<f64>();
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }
}

#[test]
fn random_functions_are_deterministic_and_band_limited() {
    let g = TorusGrid::unit(&[32, 32]).unwrap();
    let va = DecomposedAnisotropy::single(Anisotropy::diagonal(&[1.0, 2.0]).unwrap());
    let rho = frequency_quasi_norm_field(&g, &va).unwrap();
    let band = |_: &[i64], xi: &[f64]| {
        let r = va.vector_quasi_norm(xi).unwrap();
        (2.0 * 2.0 * PI..=4.0 * 2.0 * PI).contains(&r)
    };
    let f = random_bandlimited(&g, 42, band, 1, true).unwrap();
    let f2 = random_bandlimited(&g, 42, band, 1, true).unwrap();
    assert_eq!(f.samples(), f2.samples());
    assert!(f.samples().iter().all(|v| v.im == 0.0));
    for (i, v) in f.spectrum().iter().enumerate() {
        if !(2.0 * 2.0 * PI..=4.0 * 2.0 * PI).contains(&rho[i]) {
            assert!(v.norm() < 1e-14, "leak at {:?}", g.frequency_indices(i));
        }
    }

    let constant = random_bandlimited(&g, 1, |k, _| k.iter().all(|&v| v == 0), 1, true).unwrap();
    let v0 = constant.samples()[0];
    assert!(constant.samples().iter().all(|v| (v - v0).norm() < 1e-14));

    assert!(matches!(random_bandlimited(&g, 1, |_, _| false, 1, true), Err(Error::EmptyBand)));
}

#[test]
fn random_functions_are_refinement_stable() {
    let g = TorusGrid::unit(&[16, 16]).unwrap();
    let band = |k: &[i64], _: &[f64]| k[0].abs() <= 5 && k[1].abs() <= 3;
    let coarse = random_bandlimited(&g, 9, band, 1, true).unwrap();
    let fine = random_bandlimited(&g.refined(), 9, band, 1, true).unwrap();
    let up = coarse.resample(&g.refined()).unwrap();
    assert!(up.max_abs_diff(&fine).unwrap() < 1e-12);
}

#[test]
fn quasi_norm_field_examples() {
    let g = TorusGrid::unit(&[16]).unwrap();
    let iso = DecomposedAnisotropy::isotropic(&[1]);
    let rho = frequency_quasi_norm_field(&g, &iso).unwrap();
    assert_eq!(rho[0], 0.0);
    for i in 0..16 {
        assert!((rho[i] - g.frequency(i)[0].abs()).abs() < 1e-12);
    }
    let g2 = TorusGrid::unit(&[8, 8]).unwrap();
    let va = DecomposedAnisotropy::diagonal_blocks(&[vec![1.0], vec![2.0]]).unwrap();
    let rho2 = frequency_quasi_norm_field(&g2, &va).unwrap();
    let at = g2.flat_index(&[0, 3]);
    assert!((rho2[at] - (6.0 * PI).sqrt()).abs() < 1e-12);
}

#[test]
fn dilate_sample_examples() {
    let g = TorusGrid::unit(&[32, 32]).unwrap();
    let iso = DecomposedAnisotropy::isotropic(&[2]);
    let f = GridFunction::exponential(g.clone(), &[3, -1]).unwrap();
    assert!(dilate_sample(&f, &iso, 0).unwrap().max_abs_diff(&f).unwrap() == 0.0);
    let d = dilate_sample(&f, &iso, 1).unwrap();
    let want = GridFunction::exponential(g.clone(), &[6, -2]).unwrap();
    assert!(d.max_abs_diff(&want).unwrap() < 1e-13);

    let va = DecomposedAnisotropy::diagonal_blocks(&[vec![1.0], vec![2.0]]).unwrap();
    let d2 = dilate_sample(&f, &va, 1).unwrap();
    let want2 = GridFunction::exponential(g.clone(), &[6, -4]).unwrap();
    assert!(d2.max_abs_diff(&want2).unwrap() < 1e-13);
    assert_eq!(d2.band_limit().unwrap().max_index, vec![6, 4]);

    let big = GridFunction::exponential(g.clone(), &[9, 0]).unwrap();
    assert!(matches!(dilate_sample(&big, &va, 1), Err(Error::BandOverflow(_))));
    let odd = GridFunction::exponential(g, &[3, 0]).unwrap();
    assert!(matches!(dilate_sample(&odd, &va, -1), Err(Error::NotLatticeCompatible(_))));
}

#[test]
fn dilate_sample_composes_exactly() {
    let g = TorusGrid::unit(&[64, 64]).unwrap();
    let va = DecomposedAnisotropy::diagonal_blocks(&[vec![1.0], vec![2.0]]).unwrap();
    let f = random_bandlimited(&g, 3, |k, _| k[0].abs() <= 3 && k[1].abs() <= 1, 1, false).unwrap();
    let twice = dilate_sample(&dilate_sample(&f, &va, 1).unwrap(), &va, 1).unwrap();
    let once = dilate_sample(&f, &va, 2).unwrap();
    assert_eq!(twice.spectrum(), once.spectrum());
}

#[test]
fn band_metadata_is_sound() {
    let g = TorusGrid::unit(&[32, 32]).unwrap();
    let f = random_bandlimited(&g, 5, |k, _| k[0].abs() <= 4 && k[1].abs() <= 2, 1, true).unwrap();
    let band = f.band_limit().unwrap().clone();
    let off: Vec<f64> = (0..g.len())
        .map(|i| if band.contains(&g.frequency_indices(i)) { 0.0 } else { 1.0 })
        .collect();
    assert!(f.multiply_spectrum(&off).unwrap().is_zero());
    assert!(f.clone().with_band_limit(BandLimit { max_index: vec![1, 1] }).is_err());
}

#[test]
fn shift_by_lattice_vector() {
    let g = TorusGrid::unit(&[8, 4]).unwrap();
    let f = GridFunction::from_fn(g.clone(), |x| c(x[0] + 10.0 * x[1], 0.0));
    let s = f.shift(&[1, -1]).unwrap();
    let i = g.flat_index(&[2, 0]);
    let j = g.flat_index(&[3, 3]);
    assert_eq!(s.samples()[i], f.samples()[j]);
}

#[test]
fn binary_and_csv_round_trip() {
    let g = TorusGrid::new(&[4, 8], &[1.0, 3.0]).unwrap();
    let f = random_bandlimited(&g, 2, |_, _| true, 2, false).unwrap();
    let mut buf = Vec::new();
    io::write_binary(&f, &mut buf).unwrap();
    let back = io::read_binary(&buf[..]).unwrap();
    assert_eq!(back.samples(), f.samples());
    assert_eq!(back.grid(), f.grid());
    assert!(io::read_binary(&buf[..buf.len() - 1]).is_err());
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(matches!(io::read_binary(&bad[..]), Err(Error::Format(_))));

    let mut csv = Vec::new();
    io::write_csv(&f, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("channel,i0,i1,re,im"));
    assert_eq!(text.lines().count(), 1 + 2 * 32);
}
