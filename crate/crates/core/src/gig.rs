//! Generalized inverse Gaussian moments and log-scaled modified Bessel
//! functions of the second kind.
//!
//! The latent-scale updates of the quantile engine need `E(ν)` and `E(1/ν)`
//! for ν ~ GIG with order 1/2; the hierarchical prior updates need moments at
//! arbitrary real order. All moment ratios are formed in log space so that
//! extreme arguments (√(AB) anywhere in [1e-12, 1e12]) never produce
//! non-finite output.
//!
//! Convention: `GIG(p, a, b)` has density proportional to
//! `x^{p-1} exp(-(a x + b / x) / 2)` on x > 0, and
//! `E(x^j) = (b/a)^{j/2} · K_{p+j}(√(ab)) / K_p(√(ab))`.
//! With this reading, the latent-scale density, its `(A, B)` parameters, and
//! the half-order moment formula used throughout are mutually consistent
//! (confirmed against quadrature; see the acceptance suite).

const EULER_GAMMA: f64 = 0.5772156649015328606;
const MAX_SERIES_ITERS: usize = 800;

/// `ln K_ν(x)` for real order ν and x > 0.
///
/// Temme's series for x ≤ 2, Steed's continued fraction (CF2) for x > 2,
/// then a log-rescaled upward recurrence in the order. Accurate to ~1e-13
/// relative over the domain exercised here.
pub fn ln_bessel_k(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "ln_bessel_k requires x > 0");
    let nu = nu.abs(); // K_{-ν} = K_ν
    let n = (nu + 0.5).floor() as usize;
    let mu = nu - n as f64;

    // (ln K_mu, ln K_{mu+1})
    let (mut ln_lo, mut ln_hi) = if x <= 2.0 {
        ln_k_temme(mu, x)
    } else {
        ln_k_cf2(mu, x)
    };

    if n == 0 {
        return ln_lo;
    }
    // Upward recurrence K_{ν+1} = K_{ν-1} + (2ν/x) K_ν, carried as
    // (value, shared log offset) to dodge overflow at high order.
    let mut offset = ln_hi;
    let mut k_lo = (ln_lo - offset).exp();
    let mut k_hi = 1.0f64;
    let mut ord = mu + 1.0;
    for _ in 1..n {
        let k_next = k_lo + (2.0 * ord / x) * k_hi;
        k_lo = k_hi;
        k_hi = k_next;
        ord += 1.0;
        if k_hi > 1e250 {
            let s = k_hi;
            k_lo /= s;
            k_hi = 1.0;
            offset += s.ln();
        }
    }
    ln_lo = k_lo.ln() + offset;
    ln_hi = k_hi.ln() + offset;
    let _ = ln_lo;
    ln_hi
}

/// Temme series for small arguments: returns `(ln K_mu, ln K_{mu+1})`,
/// |mu| ≤ 1/2, 0 < x ≤ 2.
fn ln_k_temme(mu: f64, x: f64) -> (f64, f64) {
    let x2 = 0.5 * x;
    let mu2 = mu * mu;
    let pimu = std::f64::consts::PI * mu;
    let fact = if pimu.abs() < 1e-14 {
        1.0
    } else {
        pimu / pimu.sin()
    };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < 1e-14 { 1.0 } else { e.sinh() / e };

    // gam1 = (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ), gam2 = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2
    let (gam1, gam2, gampl, gammi) = if mu.abs() < 1e-7 {
        // Series limits: gam1 → -γ, gam2 → 1.
        (-EULER_GAMMA, 1.0, 1.0 + EULER_GAMMA * mu, 1.0 - EULER_GAMMA * mu)
    } else {
        let gampl = 1.0 / gamma_fn(1.0 + mu);
        let gammi = 1.0 / gamma_fn(1.0 - mu);
        ((gammi - gampl) / (2.0 * mu), (gammi + gampl) / 2.0, gampl, gammi)
    };

    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let e_exp = e.exp();
    let mut p = 0.5 * e_exp / gampl;
    let mut q = 0.5 / (e_exp * gammi);
    let mut c = 1.0;
    let dsq = x2 * x2;
    let mut sum1 = p;
    for i in 1..=MAX_SERIES_ITERS {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= dsq / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    (sum.ln(), (sum1 * 2.0 / x).ln())
}

/// Steed's CF2 for x > 2: returns `(ln K_mu, ln K_{mu+1})`, |mu| ≤ 1/2.
fn ln_k_cf2(mu: f64, x: f64) -> (f64, f64) {
    let mu2 = mu * mu;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = delh;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu2;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..=MAX_SERIES_ITERS {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-16 {
            break;
        }
    }
    let h = a1 * h;
    let ln_kmu = 0.5 * (std::f64::consts::PI / (2.0 * x)).ln() - x - s.ln();
    let ratio = (mu + x + 0.5 - h) / x;
    (ln_kmu, ln_kmu + ratio.ln())
}

fn gamma_fn(z: f64) -> f64 {
    statrs::function::gamma::gamma(z)
}

/// `E(X^j)` for `X ~ GIG(p, a, b)` at arbitrary real order and exponent.
pub fn gig_moment_general(p: f64, a: f64, b: f64, j: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "GIG parameters must be positive");
    let z = (a * b).sqrt();
    let ln_ratio = ln_bessel_k(p + j, z) - ln_bessel_k(p, z);
    ((j / 2.0) * (b.ln() - a.ln()) + ln_ratio).exp()
}

/// Moments of the latent-scale distribution: order-1/2 GIG with parameters
/// `(A, B)`, i.e. `E(ν^j) = (B/A)^{j/2} K_{1/2+j}(√(AB)) / K_{1/2}(√(AB))`.
///
/// `j = 0, ±1` use the closed forms of the half-integer Bessel ratios:
/// `K_{-1/2} = K_{1/2}` gives `E(1/ν) = √(A/B)`, and
/// `K_{3/2}(z) = K_{1/2}(z)(1 + 1/z)` gives `E(ν) = √(B/A) + 1/A`.
pub fn gig_moment(j: f64, a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "GIG parameters must be positive");
    if j == 0.0 {
        1.0
    } else if j == 1.0 {
        (b / a).sqrt() + 1.0 / a
    } else if j == -1.0 {
        (a / b).sqrt()
    } else {
        gig_moment_general(0.5, a, b, j)
    }
}

/// `E(ln X)` is not needed anywhere; moments of the *square-root global
/// scale* are. For `√λ ~ GIG(p, a, b)`, `E(λ^j) = E((√λ)^{2j})`.
pub fn gig_moment_of_square(p: f64, a: f64, b: f64, j: f64) -> f64 {
    gig_moment_general(p, a, b, 2.0 * j)
}
