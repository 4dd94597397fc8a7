//! Two-cloud atom-interferometer gradiometer.
//!
//! Each measurement yields a pair of normalized signals
//!
//! ```text
//! S0 = (1 + dN/N) sin(phi0 + phi_n)
//! S1 = (1 + dN'/N) sin(phi0 - dphi + phi_n + noise)
//! ```
//!
//! where `phi_n` is an unknown laser phase common to both clouds and
//! `dphi = k_eff * dz * T^2 * dg_z/dz`. As `phi_n` varies the pair traces an
//! ellipse whose shape depends on `dphi` alone; [`min_distance`] scores a
//! single pair against such a candidate ellipse.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct GradiometerConfig {
    /// Measurement rate (Hz).
    pub f_meas: f64,
    /// Atomic mass (kg).
    pub atom_mass: f64,
    /// Time between the first and second pulses (s).
    #[serde(rename = "T")]
    pub t: f64,
    /// Recoil velocity (m/s).
    pub v_rec: f64,
    /// Vertical separation of the two clouds (m).
    pub delta_z: f64,
    /// Mean atom number per cloud.
    pub n_bar: f64,
    /// Fringe contrast.
    pub eta: f64,
    /// Phase noise on the lower interferometer (rad, 1σ).
    pub sigma_phi: f64,
    /// Signal offsets in atom-count units.
    pub s0: f64,
    pub s1: f64,
    /// Probability that a measurement fails regardless of vibration.
    pub failure_probability: f64,
    /// Raman beam radius (m).
    pub beam_radius: f64,
    /// Cloud random-walk intensity per unit vibration level (m/√s).
    pub vibration_coupling: f64,
}

impl Default for GradiometerConfig {
    fn default() -> Self {
        Self {
            f_meas: 1.0,
            atom_mass: 2.206_939_25e-25,
            t: 0.16,
            v_rec: 7.0e-3,
            delta_z: 0.5,
            n_bar: 1e6,
            eta: 0.5,
            sigma_phi: 0.0,
            s0: 0.0,
            s1: 0.0,
            failure_probability: 0.0,
            beam_radius: 5e-3,
            vibration_coupling: 1.2e-3,
        }
    }
}

impl GradiometerConfig {
    /// Effective wave number m v_rec / ħ (1/m).
    pub fn k_eff(&self) -> f64 {
        self.atom_mass * self.v_rec / HBAR
    }

    /// Phase difference per unit gradient, k_eff Δz T² (rad per s⁻²).
    pub fn phase_scale(&self) -> f64 {
        self.k_eff() * self.delta_z * self.t * self.t
    }

    pub fn gradient_to_delta_phi(&self, gradient: f64) -> f64 {
        self.phase_scale() * gradient
    }

    pub fn delta_phi_to_gradient(&self, delta_phi: f64) -> f64 {
        delta_phi / self.phase_scale()
    }

    /// Closed-form noise scale √(1/N̄ + σ_φ²). Overstates the phase-noise
    /// contribution to the pair's distance from its ellipse.
    pub fn sigma_s_approx(&self) -> f64 {
        (1.0 / self.n_bar + self.sigma_phi * self.sigma_phi).sqrt()
    }

    /// RMS distance of a measured pair from its true ellipse, to first order
    /// in the noise, averaged over the uniformly distributed laser phase.
    pub fn expected_distance(&self, delta_phi: f64) -> f64 {
        const STEPS: usize = 720;
        let mut sum = 0.0;
        let mut count = 0;
        for k in 0..STEPS {
            let psi = (k as f64 + 0.5) * TAU / STEPS as f64;
            let (sa, ca) = psi.sin_cos();
            let (sb, cb) = (psi - delta_phi).sin_cos();
            let norm = ca * ca + cb * cb;
            if norm < 1e-12 {
                continue;
            }
            let shot = (cb * cb * sa * sa + ca * ca * sb * sb) / self.n_bar;
            let phase = ca * ca * cb * cb * self.sigma_phi * self.sigma_phi;
            sum += (shot + phase) / norm;
            count += 1;
        }
        (sum / count.max(1) as f64).sqrt()
    }

    /// Likelihood width for a pair: [`expected_distance`](Self::expected_distance)
    /// at the normal background gradient.
    pub fn sigma_s(&self) -> f64 {
        self.expected_distance(self.gradient_to_delta_phi(crate::gravmap::BACKGROUND_GRADIENT))
    }

    pub fn validate(&self) -> crate::Result<()> {
        let positive = [
            ("f_meas", self.f_meas),
            ("atom_mass", self.atom_mass),
            ("T", self.t),
            ("v_rec", self.v_rec),
            ("delta_z", self.delta_z),
            ("n_bar", self.n_bar),
            ("eta", self.eta),
            ("beam_radius", self.beam_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(crate::Error::Config(format!("gradiometer.{name} must be positive, got {v}")));
            }
        }
        if !(self.sigma_phi >= 0.0) || !(self.vibration_coupling >= 0.0) {
            return Err(crate::Error::Config("gradiometer noise parameters must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.failure_probability) {
            return Err(crate::Error::Config(format!(
                "gradiometer.failure_probability must lie in [0, 1], got {}",
                self.failure_probability
            )));
        }
        Ok(())
    }
}

pub fn k_eff(config: &GradiometerConfig) -> f64 {
    config.k_eff()
}

pub fn gradient_to_delta_phi(gradient: f64, config: &GradiometerConfig) -> f64 {
    config.gradient_to_delta_phi(gradient)
}

/// One normalized measurement pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairSample {
    pub s0_norm: f64,
    pub s1_norm: f64,
    pub valid: bool,
    pub timestamp: f64,
}

/// Noise-free signal curve for a given phase difference.
///
/// Values are reduced into [0, 2π); a value above π traces the mirror image
/// (x and y swapped) of its complement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateEllipse {
    pub delta_phi: f64,
    sin_d: f64,
    cos_d: f64,
}

impl CandidateEllipse {
    pub fn new(delta_phi: f64) -> Self {
        let d = delta_phi.rem_euclid(TAU);
        let (sin_d, cos_d) = d.sin_cos();
        Self {
            delta_phi: d,
            sin_d,
            cos_d,
        }
    }

    pub fn from_gradient(gradient: f64, config: &GradiometerConfig) -> Self {
        Self::new(config.gradient_to_delta_phi(gradient))
    }

    #[inline]
    fn point_sc(&self, s: f64, c: f64) -> (f64, f64) {
        (s, s * self.cos_d - c * self.sin_d)
    }
}

pub fn ellipse_point(ellipse: &CandidateEllipse, psi: f64) -> (f64, f64) {
    let (s, c) = psi.sin_cos();
    ellipse.point_sc(s, c)
}

const COARSE: usize = 64;

struct CoarseTable {
    sin: [f64; COARSE],
    cos: [f64; COARSE],
}

static TABLE: std::sync::LazyLock<CoarseTable> = std::sync::LazyLock::new(|| {
    let mut sin = [0.0; COARSE];
    let mut cos = [0.0; COARSE];
    for i in 0..COARSE {
        let (s, c) = (TAU * i as f64 / COARSE as f64).sin_cos();
        sin[i] = s;
        cos[i] = c;
    }
    CoarseTable { sin, cos }
});

/// Minimum Euclidean distance from a measured pair to a candidate ellipse.
///
/// A 64-point scan brackets every discrete local minimum; each bracket is
/// refined with a safeguarded Newton iteration on the derivative of the
/// squared distance.
pub fn min_distance(pair: &PairSample, ellipse: &CandidateEllipse) -> f64 {
    min_distance_xy(pair.s0_norm, pair.s1_norm, ellipse)
}

pub fn min_distance_xy(x: f64, y: f64, ellipse: &CandidateEllipse) -> f64 {
    let t = &*TABLE;
    let mut f = [0.0; COARSE];
    for i in 0..COARSE {
        let (ex, ey) = ellipse.point_sc(t.sin[i], t.cos[i]);
        let (dx, dy) = (ex - x, ey - y);
        f[i] = dx * dx + dy * dy;
    }
    let step = TAU / COARSE as f64;
    let mut best = f64::INFINITY;
    for i in 0..COARSE {
        let prev = f[(i + COARSE - 1) % COARSE];
        let next = f[(i + 1) % COARSE];
        if f[i] <= prev && f[i] <= next {
            let psi = step * i as f64;
            let d2 = refine(x, y, ellipse, psi - step, psi + step, f[i]);
            best = best.min(d2);
        }
    }
    best.max(0.0).sqrt()
}

#[inline]
fn dist2_and_derivs(x: f64, y: f64, e: &CandidateEllipse, psi: f64) -> (f64, f64, f64) {
    let (s, c) = psi.sin_cos();
    let ex = s;
    let ey = s * e.cos_d - c * e.sin_d;
    let dex = c;
    let dey = c * e.cos_d + s * e.sin_d;
    let (rx, ry) = (ex - x, ey - y);
    let f = rx * rx + ry * ry;
    let g = rx * dex + ry * dey;
    let h = dex * dex + dey * dey - (rx * ex + ry * ey);
    (f, g, h)
}

/// Squared distance minimum inside [a, b], starting from the coarse value.
fn refine(x: f64, y: f64, e: &CandidateEllipse, mut a: f64, mut b: f64, coarse: f64) -> f64 {
    let (_, ga, _) = dist2_and_derivs(x, y, e, a);
    let (_, gb, _) = dist2_and_derivs(x, y, e, b);
    let mut best = coarse;
    if !(ga <= 0.0 && gb >= 0.0) {
        return golden(x, y, e, a, b).min(best);
    }
    let mut psi = 0.5 * (a + b);
    for _ in 0..60 {
        let (f, g, h) = dist2_and_derivs(x, y, e, psi);
        best = best.min(f);
        if g < 0.0 {
            a = psi;
        } else {
            b = psi;
        }
        let newton = if h > 0.0 { psi - g / h } else { f64::NAN };
        let next = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
        let moved = (next - psi).abs();
        psi = next;
        if moved < 1e-13 || b - a < 1e-13 {
            break;
        }
    }
    let (f, _, _) = dist2_and_derivs(x, y, e, psi);
    best.min(f)
}

fn golden(x: f64, y: f64, e: &CandidateEllipse, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let eval = |p: f64| dist2_and_derivs(x, y, e, p).0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = eval(d);
        }
    }
    fc.min(fd)
}

/// Draws one pair of signals (always marked valid; see [`failure_model`]).
///
/// Random draws happen in a fixed order regardless of configuration so that
/// runs with different noise levels share their random numbers.
pub fn sample_pair<R: Rng + ?Sized>(gradient: f64, g_upper: f64, config: &GradiometerConfig, rng: &mut R) -> PairSample {
    let raman: f64 = rng.random::<f64>() * TAU;
    let z0: f64 = StandardNormal.sample(rng);
    let z1: f64 = StandardNormal.sample(rng);
    let zp: f64 = StandardNormal.sample(rng);
    let sigma_n = config.n_bar.sqrt();
    let phi0 = (config.k_eff() * g_upper * config.t * config.t).rem_euclid(TAU);
    let dphi = config.gradient_to_delta_phi(gradient);
    let norm = config.eta * config.n_bar;
    let s0 = (1.0 + z0 / sigma_n) * (phi0 + raman).sin() + config.s0 / norm;
    let s1 = (1.0 + z1 / sigma_n) * (phi0 - dphi + raman + config.sigma_phi * zp).sin() + config.s1 / norm;
    PairSample {
        s0_norm: s0,
        s1_norm: s1,
        valid: true,
        timestamp: 0.0,
    }
}

/// Whether a measurement survives. The cloud centroid performs a 2-D random
/// walk whose intensity scales with `vibration_level`; the measurement fails
/// if the centroid leaves the beam at either later pulse, or at random with
/// the configured probability.
pub fn failure_model<R: Rng + ?Sized>(config: &GradiometerConfig, vibration_level: f64, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    let steps: [f64; 4] = [
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    ];
    if u < config.failure_probability {
        return false;
    }
    let sd = config.vibration_coupling * vibration_level * config.t.sqrt();
    if sd == 0.0 {
        return true;
    }
    let r2 = config.beam_radius * config.beam_radius;
    let (x1, y1) = (steps[0] * sd, steps[1] * sd);
    let (x2, y2) = (x1 + steps[2] * sd, y1 + steps[3] * sd);
    x1 * x1 + y1 * y1 <= r2 && x2 * x2 + y2 * y2 <= r2
}

/// Phase difference of an ellipse within [0, π] folded from any angle.
pub fn fold_phase(delta_phi: f64) -> f64 {
    let d = delta_phi.rem_euclid(TAU);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn k_eff_and_phase_scale() {
        let c = GradiometerConfig::default();
        let k = c.k_eff();
        assert!((k - 1.4649e7).abs() / 1.4649e7 < 1e-4, "{k}");
        assert!((c.phase_scale() - 1.875e5).abs() / 1.875e5 < 1e-3);
        let doubled = GradiometerConfig { v_rec: 2.0 * c.v_rec, ..c };
        assert!((doubled.k_eff() - 2.0 * k).abs() < 1e-6);
        assert!((c.gradient_to_delta_phi(3.07e-6) - 0.5756).abs() < 1e-3);
        assert_eq!(c.gradient_to_delta_phi(0.0), 0.0);
        assert_eq!(c.gradient_to_delta_phi(2e-8), 2.0 * c.gradient_to_delta_phi(1e-8));
    }

    #[test]
    fn expected_distance_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for sigma_phi in [0.0, 5e-3, 10e-3, 15e-3] {
            let c = GradiometerConfig { sigma_phi, ..Default::default() };
            for g in [3.07e-6, c.delta_phi_to_gradient(PI / 2.0), c.delta_phi_to_gradient(2.5)] {
                let e = CandidateEllipse::new(c.gradient_to_delta_phi(g));
                let n = 20_000;
                let ms: f64 = (0..n).map(|_| min_distance(&sample_pair(g, 9.81, &c, &mut rng), &e).powi(2)).sum::<f64>() / n as f64;
                let expected = c.expected_distance(c.gradient_to_delta_phi(g));
                assert!((ms.sqrt() / expected - 1.0).abs() < 0.05, "{sigma_phi} {g}: {} vs {expected}", ms.sqrt());
            }
            assert!((c.sigma_s() / c.expected_distance(c.gradient_to_delta_phi(3.07e-6)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn expected_distance_at_quarter_wave() {
        let c = GradiometerConfig { sigma_phi: 15e-3, ..Default::default() };
        let d = c.expected_distance(PI / 2.0);
        assert!((d - (0.75 / c.n_bar + 0.125 * 15e-3 * 15e-3).sqrt()).abs() < 1e-12);
        assert!(d < c.sigma_s_approx());
    }

    #[test]
    fn ellipse_shapes() {
        let circle = CandidateEllipse::new(PI / 2.0);
        for k in 0..16 {
            let psi = k as f64 * 0.4;
            let (x, y) = ellipse_point(&circle, psi);
            assert!((x - psi.sin()).abs() < 1e-15 && (y + psi.cos()).abs() < 1e-15);
        }
        let segment = CandidateEllipse::new(0.0);
        for k in 0..16 {
            let (x, y) = ellipse_point(&segment, k as f64 * 0.4);
            assert_eq!(x, y);
        }
    }

    #[test]
    fn distance_examples() {
        let circle = CandidateEllipse::new(PI / 2.0);
        assert!((min_distance_xy(0.0, 0.0, &circle) - 1.0).abs() < 1e-12);
        let e = CandidateEllipse::new(0.7);
        for k in 0..100 {
            let (x, y) = ellipse_point(&e, k as f64 * 0.0631);
            assert!(min_distance_xy(x, y, &e) < 1e-9);
        }
    }

    fn brute(x: f64, y: f64, e: &CandidateEllipse) -> f64 {
        (0..1_000_000)
            .map(|i| {
                let (ex, ey) = ellipse_point(e, TAU * i as f64 / 1e6);
                (ex - x).hypot(ey - y)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn matches_dense_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..12 {
            let e = CandidateEllipse::new(rng.random::<f64>() * PI);
            let (x, y) = (rng.random::<f64>() * 3.0 - 1.5, rng.random::<f64>() * 3.0 - 1.5);
            let d = min_distance_xy(x, y, &e);
            let b = brute(x, y, &e);
            assert!((d - b).abs() < 1e-6 && d <= b + 1e-12, "{d} vs {b}");
        }
    }

    #[test]
    fn noise_free_pairs_on_true_ellipse() {
        let cfg = GradiometerConfig { n_bar: f64::INFINITY, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = 3.1e-6;
        let e = CandidateEllipse::from_gradient(g, &cfg);
        for _ in 0..2000 {
            let p = sample_pair(g, 9.81, &cfg, &mut rng);
            assert!(min_distance(&p, &e) < 1e-9);
        }
    }

    #[test]
    fn failure_probability_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let never = GradiometerConfig { failure_probability: 0.0, ..Default::default() };
        let always = GradiometerConfig { failure_probability: 1.0, ..Default::default() };
        for _ in 0..1000 {
            assert!(failure_model(&never, 0.0, &mut rng));
            assert!(!failure_model(&always, 0.0, &mut rng));
        }
        let fifth = GradiometerConfig { failure_probability: 0.2, ..Default::default() };
        let fails = (0..10_000).filter(|_| !failure_model(&fifth, 0.0, &mut rng)).count();
        assert!((fails as f64 / 1e4 - 0.2).abs() < 0.01, "{fails}");
    }

    #[test]
    fn baseline_vibration_failure_rate_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = GradiometerConfig::default();
        let n = 100_000;
        let fails = (0..n)
            .filter(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                !failure_model(&cfg, a.hypot(b), &mut rng)
            })
            .count();
        assert!((fails as f64) < 0.01 * n as f64, "{fails}");
    }

    proptest! {
        #[test]
        fn common_phase_shift_leaves_curve(d in 0.0f64..PI, shift in 0.0f64..TAU, psi in 0.0f64..TAU) {
            // A point generated with both phases shifted still lies on the curve.
            let e = CandidateEllipse::new(d);
            let (x, y) = ((psi + shift).sin(), (psi + shift - d).sin());
            prop_assert!(min_distance_xy(x, y, &e) < 1e-9);
        }

        #[test]
        fn swap_symmetry(d in 0.01f64..3.1, x in -1.5f64..1.5, y in -1.5f64..1.5) {
            let a = min_distance_xy(x, y, &CandidateEllipse::new(d));
            let b = min_distance_xy(y, x, &CandidateEllipse::new(TAU - d));
            let c = min_distance_xy(y, x, &CandidateEllipse::new(-d));
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!((a - c).abs() < 1e-9);
        }

        #[test]
        fn curve_bounded(d in 0.0f64..TAU, psi in -10.0f64..10.0) {
            let (x, y) = ellipse_point(&CandidateEllipse::new(d), psi);
            prop_assert!(x.abs() <= 1.0 && y.abs() <= 1.0);
        }
    }
}
