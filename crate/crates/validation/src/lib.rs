//! Independent numerical oracles: adaptive Gauss-Kronrod quadrature of the
//! classical action and time integrals, plus seeded sampling helpers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive 7/15-point Gauss-Kronrod with a relative tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let (whole, _) = kronrod(&f, a, b);
    let target = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let mut comp = 0.0;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = kronrod(&f, lo, hi);
        let share = target * (hi - lo) / (b - a);
        let floor = 64.0 * f64::EPSILON * val.abs();
        if err <= share.max(floor) || depth >= 60 {
            let y = val - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    total
}

/// sqrt(kc mu/a) int_0^{alpha/2} sqrt((2a - q)/q) dq with q = t^2.
pub fn bound_action_quad(alpha: f64, a: f64, mu: f64, kc: f64) -> f64 {
    let upper = (alpha / 2.0).sqrt();
    (kc * mu / a).sqrt() * integrate(|t| 2.0 * (2.0 * a - t * t).max(0.0).sqrt(), 0.0, upper, 1e-14)
}

/// sqrt(kc mu/a) int_0^{alpha/2} sqrt((2a + q)/q) dq with q = t^2.
pub fn attractive_scatter_quad(alpha: f64, a: f64, mu: f64, kc: f64) -> f64 {
    let upper = (alpha / 2.0).sqrt();
    (kc * mu / a).sqrt() * integrate(|t| 2.0 * (2.0 * a + t * t).sqrt(), 0.0, upper, 1e-14)
}

/// sqrt(kc mu/a) int_{2a}^{alpha/2} sqrt((q - 2a)/q) dq with q - 2a = t^2.
pub fn beyond_turning_quad(alpha: f64, a: f64, mu: f64, kc: f64) -> f64 {
    let upper = (alpha / 2.0 - 2.0 * a).max(0.0).sqrt();
    (kc * mu / a).sqrt() * integrate(|t| 2.0 * t * t / (2.0 * a + t * t).sqrt(), 0.0, upper, 1e-14)
}

/// sqrt(kc mu/a) int_{alpha/2}^{2a} sqrt((2a - q)/q) dq with 2a - q = t^2.
pub fn below_turning_quad(alpha: f64, a: f64, mu: f64, kc: f64) -> f64 {
    let upper = (2.0 * a - alpha / 2.0).max(0.0).sqrt();
    (kc * mu / a).sqrt() * integrate(|t| 2.0 * t * t / (2.0 * a - t * t).sqrt(), 0.0, upper, 1e-14)
}

/// Kepler time sqrt(mu a/kc) int r dr / sqrt(a^2 e^2 - (r - a)^2) between
/// radii on the outgoing branch, with r = a - a e cos(u).
pub fn kepler_time_quad(r0: f64, r1: f64, a: f64, eps: f64, mu: f64, kc: f64) -> f64 {
    let u = |r: f64| ((a - r) / (a * eps)).clamp(-1.0, 1.0).acos();
    (mu * a / kc).sqrt() * integrate(|t| a * (1.0 - eps * t.cos()), u(r0), u(r1), 1e-14)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

pub fn random_vector(rng: &mut ChaCha8Rng, ndim: usize, scale: f64) -> Vec<f64> {
    (0..ndim).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}
