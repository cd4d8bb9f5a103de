//! Closed-form distances against numeric integration of the hyperbolic
//! density along the geodesic of the half-plane cover.

use std::f64::consts::PI;

use hypifs::hypgeo::SurfaceModel;
use hypifs::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Nodes and weights of the 16-point Gauss-Legendre rule, by Newton's method
/// on the Legendre recurrence.
fn gauss_legendre() -> Vec<(f64, f64)> {
    const N: usize = 16;
    (0..N)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=N {
                    let kf = k as f64;
                    (p0, p1) = (p1, ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf);
                }
                dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite Gauss-Legendre, doubling the panel count until it settles.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let rule = gauss_legendre();
    let composite = |panels: usize| {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|j| {
                let mid = a + h * (j as f64 + 0.5);
                rule.iter().map(|&(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
            })
            .sum::<f64>()
    };
    let mut prev = composite(1);
    let mut panels = 2;
    loop {
        let next = composite(panels);
        if (next - prev).abs() <= 1e-13 * next.abs().max(1.0) || panels >= 1 << 12 {
            return next;
        }
        prev = next;
        panels *= 2;
    }
}

/// Length of the half-plane geodesic from `p` to `q` under the metric whose
/// density at a cover point `s` is `rho(s)`, per unit Euclidean `|ds|`.
fn geodesic_length(p: Complex64, q: Complex64, rho: &dyn Fn(Complex64) -> f64) -> f64 {
    if (p.re - q.re).abs() < 1e-9 * (p.norm() + q.norm()) {
        let x = 0.5 * (p.re + q.re);
        let (lo, hi) = (p.im.min(q.im), p.im.max(q.im));
        // y = e^t keeps the integrand tame over long vertical runs.
        return integrate(|t| rho(Complex64::new(x, t.exp())) * t.exp(), lo.ln(), hi.ln());
    }
    let c = (q.norm_sqr() - p.norm_sqr()) / (2.0 * (q.re - p.re));
    let r = (p - c).norm();
    // theta = 2 atan(e^u) spreads long arcs evenly; d theta = sin(theta) du.
    let u = |s: Complex64| ((s - c).arg() / 2.0).tan().ln();
    let (up, uq) = (u(p), u(q));
    integrate(
        |t| {
            let theta = 2.0 * t.exp().atan();
            rho(c + Complex64::from_polar(r, theta)) * r * theta.sin()
        },
        up.min(uq),
        up.max(uq),
    )
}

/// The surface density pulled back to the half-plane cover: `lambda_X(pi(s)) |pi'(s)|`.
fn pulled_back_density(surface: SurfaceModel) -> Box<dyn Fn(Complex64) -> f64> {
    match surface {
        SurfaceModel::Disk => Box::new(|s| {
            let u = (s - I) / (s + I);
            let du = 2.0 * I / ((s + I) * (s + I));
            du.norm() / (1.0 - u.norm_sqr())
        }),
        SurfaceModel::HalfPlane => Box::new(|s| 1.0 / (2.0 * s.im)),
        SurfaceModel::PuncturedDisk => Box::new(|s| {
            let z = (2.0 * PI * I * s).exp();
            let dz = (2.0 * PI * I * z).norm();
            let m = z.norm();
            dz / (2.0 * m * (1.0 / m).ln())
        }),
        SurfaceModel::Annulus { inner_radius } => {
            let h = (1.0 / inner_radius).ln();
            Box::new(move |s| {
                let z = (I * s.ln() * (h / PI)).exp();
                let dz = (z * I * (h / PI) / s).norm();
                let m = z.norm();
                let lambda = (PI / (2.0 * h)) / (m * (PI * (1.0 / m).ln() / h).sin());
                lambda * dz
            })
        }
    }
}

/// Lift to the half-plane, and the deck translate by `k`.
fn lift(surface: SurfaceModel, z: Complex64, k: i64) -> Complex64 {
    match surface {
        SurfaceModel::Disk => I * (1.0 + z) / (1.0 - z),
        SurfaceModel::HalfPlane => z,
        SurfaceModel::PuncturedDisk => z.ln() / (2.0 * PI * I) + k as f64,
        SurfaceModel::Annulus { inner_radius } => {
            let h = (1.0 / inner_radius).ln();
            let zeta = Complex64::new(z.arg() + 2.0 * PI * k as f64, (1.0 / z.norm()).ln());
            (zeta * (PI / h)).exp()
        }
    }
}

fn oracle(surface: SurfaceModel, z: Complex64, w: Complex64) -> f64 {
    let rho = pulled_back_density(surface);
    let ks: Vec<i64> = match surface {
        SurfaceModel::Disk | SurfaceModel::HalfPlane => vec![0],
        _ => (-3..=3).collect(),
    };
    ks.into_iter()
        .map(|k| geodesic_length(lift(surface, z, 0), lift(surface, w, k), &*rho))
        .fold(f64::INFINITY, f64::min)
}

fn random_point(surface: SurfaceModel, rng: &mut ChaCha8Rng) -> Complex64 {
    let angle = rng.gen_range(-PI..PI);
    match surface {
        SurfaceModel::Disk => Complex64::from_polar(rng.gen_range(0.0..0.95), angle),
        SurfaceModel::HalfPlane => Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..5.0)),
        SurfaceModel::PuncturedDisk => Complex64::from_polar(rng.gen_range(0.01..0.95), angle),
        SurfaceModel::Annulus { inner_radius } => {
            Complex64::from_polar(rng.gen_range(inner_radius * 1.05..0.97), angle)
        }
    }
}

fn agree(surface: SurfaceModel, pairs: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let (z, w) = (random_point(surface, &mut rng), random_point(surface, &mut rng));
        let closed = surface.dist(z, w).unwrap();
        let numeric = oracle(surface, z, w);
        worst = worst.max((closed - numeric).abs());
        assert!((closed - numeric).abs() < 1e-8, "{surface}: {z} {w}: {closed} vs {numeric}");
    }
    eprintln!("{surface}: worst |closed - quadrature| = {worst:e}");
}

#[test]
fn disk_distance_matches_quadrature() {
    agree(SurfaceModel::Disk, 200, 1);
}

#[test]
fn half_plane_distance_matches_quadrature() {
    agree(SurfaceModel::HalfPlane, 200, 2);
}

#[test]
fn punctured_disk_distance_matches_quadrature() {
    agree(SurfaceModel::PuncturedDisk, 100, 3);
}

#[test]
fn annulus_distance_matches_quadrature() {
    agree(SurfaceModel::annulus(0.1).unwrap(), 100, 4);
    // Thinner annuli stretch the lifted arcs over e^(2 pi^2 / h) in scale,
    // past what a double-precision quadrature of the arc resolves.
    agree(SurfaceModel::annulus(0.3).unwrap(), 50, 5);
}

#[test]
fn radial_disk_distance_is_artanh() {
    let numeric = integrate(|t| 1.0 / (1.0 - t * t), 0.0, 0.5);
    assert!((numeric - 0.5f64.atanh()).abs() < 1e-12);
    let d = SurfaceModel::Disk.dist(Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)).unwrap();
    assert!((d - numeric).abs() < 1e-12);
}

#[test]
fn vertical_half_plane_segment() {
    let numeric = integrate(|y| 1.0 / (2.0 * y), 1.0, 2.0);
    let d = SurfaceModel::HalfPlane.dist(I, 2.0 * I).unwrap();
    assert!((d - numeric).abs() < 1e-12);
    assert!((d - 0.5 * 2f64.ln()).abs() < 1e-15);
}

#[test]
fn annulus_deck_window_is_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for r in [0.05, 0.1, 0.5, 0.9] {
        let ann = SurfaceModel::annulus(r).unwrap();
        for _ in 0..200 {
            let (z, w) = (random_point(ann, &mut rng), random_point(ann, &mut rng));
            let base = ann.dist(z, w).unwrap();
            let wide = ann.dist_with_deck_window(z, w, 2).unwrap();
            assert!((base - wide).abs() < 1e-12, "{r}: {base} vs {wide}");
        }
    }
}
