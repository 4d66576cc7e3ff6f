use std::sync::Arc;

use fire_core::degradations::{DegradationSpec, MaskSource, Range};
use fire_core::diagnostics::{fixed_point_trace, trace_variation};
use fire_core::engine::prior_residual;
use fire_core::restorers::{tv_denoise, ConvexSet, PriorTerm, Restorer};
use fire_core::tensor::synthetic::scene;
use fire_core::tensor::{Image, Rng};

fn random(rng: &mut Rng, lo: f64, hi: f64) -> Image {
    Image::from_fn(4, 4, 2, |_, _, _| rng.uniform(lo, hi))
}

fn box_sq_distance(x: &Image, lo: f64, hi: f64) -> f64 {
    x.data().iter().map(|v| (v - v.clamp(lo, hi)).powi(2)).sum()
}

fn ball_sq_distance(x: &Image, center: f64, radius: f64) -> f64 {
    let norm = x.data().iter().map(|v| (v - center).powi(2)).sum::<f64>().sqrt();
    (norm - radius).max(0.0).powi(2)
}

fn central_gradient(x: &Image, d2: &dyn Fn(&Image) -> f64) -> Image {
    let h = 1e-4;
    let mut g = Image::zeros(x.height(), x.width(), x.channels());
    for i in 0..x.len() {
        let mut plus = x.clone();
        plus.data_mut()[i] += h;
        let mut minus = x.clone();
        minus.data_mut()[i] -= h;
        g.data_mut()[i] = (d2(&plus) - d2(&minus)) / (2.0 * h);
    }
    g
}

type Case = (Restorer, Box<dyn Fn(&Image) -> f64>);

fn projection_cases() -> Vec<Case> {
    vec![
        (
            Restorer::from_id("proj:box:0.2:0.8").unwrap(),
            Box::new(|x: &Image| box_sq_distance(x, 0.2, 0.8)),
        ),
        (
            Restorer::from_id("proj:ball:0.5:0.6").unwrap(),
            Box::new(|x: &Image| ball_sq_distance(x, 0.5, 0.6)),
        ),
    ]
}

#[test]
fn projection_residual_is_half_gradient_of_squared_distance() {
    let mut rng = Rng::new(10);
    let context = fire_core::degradations::Degradation::identity();
    for (restorer, d2) in projection_cases() {
        for _ in 0..50 {
            let x = random(&mut rng, -0.5, 1.5);
            let residual = x.sub(&restorer.restore(&x, &context).unwrap()).unwrap();
            let half_grad = central_gradient(&x, d2.as_ref()).scale(0.5);
            let err = residual.sub(&half_grad).unwrap().l2_norm();
            assert!(err <= 1e-4, "{}: {err}", restorer.name());
        }
    }
}

#[test]
fn squared_distance_gradient_is_two_lipschitz() {
    let mut rng = Rng::new(11);
    let context = fire_core::degradations::Degradation::identity();
    for (restorer, _) in projection_cases() {
        let grad = |x: &Image| x.sub(&restorer.restore(x, &context).unwrap()).unwrap().scale(2.0);
        for _ in 0..50 {
            let x = random(&mut rng, -0.5, 1.5);
            let y = random(&mut rng, -0.5, 1.5);
            let lhs = grad(&x).sub(&grad(&y)).unwrap().l2_norm();
            let rhs = 2.0 * x.sub(&y).unwrap().l2_norm() + 1e-6;
            assert!(lhs <= rhs, "{}: {lhs} > {rhs}", restorer.name());
        }
    }
}

#[test]
fn box_finite_difference_matches_clamp() {
    let mut rng = Rng::new(12);
    let set = ConvexSet::Box { lo: 0.2, hi: 0.8 };
    for _ in 0..20 {
        let x = random(&mut rng, 0.0, 1.0);
        let p = set.project(&x).unwrap();
        assert_eq!(p, x.map(|v| v.clamp(0.2, 0.8)));
        let g = central_gradient(&x, &|z: &Image| box_sq_distance(z, 0.2, 0.8)).scale(0.5);
        assert!(x.sub(&p).unwrap().sub(&g).unwrap().max_abs() <= 1e-5);
    }
}

#[test]
fn projection_restorers_are_idempotent() {
    let mut rng = Rng::new(13);
    let context = fire_core::degradations::Degradation::identity();
    for id in ["proj:box:0.1:0.7", "proj:ball:0.4:0.5", "proj:mean:0.3"] {
        let r = Restorer::from_id(id).unwrap();
        for _ in 0..20 {
            let x = random(&mut rng, -1.0, 2.0);
            let once = r.restore(&x, &context).unwrap();
            assert_eq!(r.restore(&once, &context).unwrap(), once, "{id}");
        }
    }
}

fn shipped_pairs() -> Vec<(&'static str, DegradationSpec)> {
    let noise = Range::new(0.01, 0.05);
    vec![
        ("wiener", DegradationSpec::Blur { kernel_sigma: Range::new(1.0, 2.0), sigma: Range::new(0.0, 0.01) }),
        ("tv", DegradationSpec::AdditiveNoise { sigma: noise }),
        ("dct", DegradationSpec::AdditiveNoise { sigma: noise }),
        ("dct", DegradationSpec::JpegSurrogate { quality: (30, 70), sigma: Range::fixed(0.0) }),
        ("tv", DegradationSpec::JpegSurrogate { quality: (30, 70), sigma: Range::fixed(0.0) }),
        (
            "inpaint",
            DegradationSpec::Mask { source: MaskSource::Random { drop: Range::new(0.2, 0.5) }, sigma: Range::fixed(0.0) },
        ),
        ("sr2", DegradationSpec::Decimation { factor: 2, sigma: Range::new(0.0, 0.01) }),
        ("sr3", DegradationSpec::Decimation { factor: 3, sigma: Range::new(0.0, 0.01) }),
    ]
}

fn low_end(spec: &DegradationSpec) -> DegradationSpec {
    spec.with_noise(Range::fixed(spec.noise_range().lo))
}

fn smooth_image() -> Image {
    tv_denoise(&scene(48, 48, 3, 0), 0.2, 300)
}

fn term(id: &str, spec: DegradationSpec) -> PriorTerm {
    PriorTerm::new(Arc::new(Restorer::from_id(id).unwrap()), spec, 1.0).unwrap()
}

#[test]
fn shipped_pairs_nearly_fix_smooth_images() {
    let x = smooth_image();
    for (id, spec) in shipped_pairs() {
        let t = term(id, low_end(&spec));
        let r = prior_residual(&x, &t, &mut Rng::new(3)).unwrap();
        let rel = r.l2_norm() / x.l2_norm();
        assert!(rel <= 0.1, "{id} {spec:?}: relative residual {rel}");
    }
}

#[test]
fn shipped_pairs_stay_within_3db_over_20_iterations() {
    let x = smooth_image();
    let mut failures = Vec::new();
    for (id, spec) in shipped_pairs() {
        let t = term(id, low_end(&spec));
        let trace = fixed_point_trace(&x, &t, 20, true, &Rng::new(3)).unwrap();
        let spread = trace_variation(&trace);
        if spread > 3.0 {
            failures.push(format!("{id} ({:?}): {spread:.2} dB", spec.op_kind()));
        }
    }
    assert!(failures.is_empty(), "PSNR drift above 3 dB: {failures:?}");
}

#[test]
fn restoring_zero_gives_zero() {
    let zero = Image::zeros(12, 12, 1);
    let mut rng = Rng::new(4);
    for (id, spec) in shipped_pairs() {
        let d = low_end(&spec).with_noise(Range::fixed(0.0)).sample(&mut rng, 12, 12).unwrap();
        let y = d.op.forward(&zero).unwrap();
        let out = Restorer::from_id(id).unwrap().restore(&y, &d).unwrap();
        assert!(out.max_abs() < 1e-12, "{id}: {}", out.max_abs());
    }
}

#[test]
fn classical_restorers_clamp_to_unit_range() {
    let mut rng = Rng::new(5);
    let y = Image::from_fn(16, 16, 1, |_, _, _| rng.uniform(-0.5, 1.5));
    for (id, spec) in shipped_pairs() {
        if !matches!(spec, DegradationSpec::AdditiveNoise { .. } | DegradationSpec::Blur { .. }) {
            continue;
        }
        let d = spec.sample(&mut rng, 16, 16).unwrap();
        let out = Restorer::from_id(id).unwrap().restore(&y, &d).unwrap();
        assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)), "{id}");
    }
}
