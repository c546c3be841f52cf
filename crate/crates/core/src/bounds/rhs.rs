use serde::{Deserialize, Serialize};

use crate::info::Nats;
use crate::{Error, Result};

const LN_2: f64 = std::f64::consts::LN_2;
const GOLDEN_TOL: f64 = 1e-10;

/// Which expected-gap statement of the linear-loss bounds to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgnosticKind {
    /// `|E[gap]| ≤ √(2·CMI·E[Δ²]/n)`.
    Expected,
    /// `E[|gap|] ≤ √(2(CMI + log 2)·E[Δ²]/n)`.
    Absolute,
    /// `E[gap²] ≤ inf_u (2·CMI − log(1−u))·E[Δ²]/(u·n)`.
    Squared,
    /// `|E[gap]| ≤ √(8·CMI·E[sup ℓ²]/n)` for losses with no bounded range.
    Unbounded,
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite and nonnegative, got {v}")))
    }
}

fn check_n(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    Ok(n as f64)
}

/// Minimizes a unimodal function on `[a, b]` to the given width.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let u = (a + b) / 2.0;
    (u, f(u))
}

/// The squared-gap objective `(2·cmi − log(1−u))/u` at a fixed `u ∈ (0,1)`.
pub fn squared_objective(cmi: Nats, u: f64) -> f64 {
    (2.0 * cmi.0 - (-u).ln_1p()) / u
}

/// Right-hand side of the expected-gap bounds for a loss with sensitivity
/// scale `scale` (`E[Δ²]`, or `E[sup ℓ²]` for [`AgnosticKind::Unbounded`]).
///
/// ```
/// use cmi_lab::bounds::{bound_agnostic, AgnosticKind};
/// use cmi_lab::info::Nats;
///
/// let n = 10;
/// let cmi = Nats(n as f64 * 2f64.ln());
/// let b = bound_agnostic(AgnosticKind::Expected, cmi, n, 1.0).unwrap();
/// assert!((b - (2.0 * 2f64.ln()).sqrt()).abs() < 1e-12);
/// ```
pub fn bound_agnostic(kind: AgnosticKind, cmi: Nats, n: usize, scale: f64) -> Result<f64> {
    check_nonneg("cmi", cmi.0)?;
    check_nonneg("scale", scale)?;
    let n = check_n(n)?;
    let c = cmi.0;
    Ok(match kind {
        AgnosticKind::Expected => (2.0 * c * scale / n).sqrt(),
        AgnosticKind::Absolute => (2.0 * (c + LN_2) * scale / n).sqrt(),
        AgnosticKind::Unbounded => (8.0 * c * scale / n).sqrt(),
        AgnosticKind::Squared => {
            let (_, best) = golden_section(|u| squared_objective(cmi, u), 0.0, 1.0, GOLDEN_TOL);
            best.min(squared_objective(cmi, 2.0 / 3.0)) * scale / n
        }
    })
}

/// The closed-form squared-gap bound `(3·cmi + log 3)·scale/n` in its
/// commonly stated form.
///
/// This is not always an upper bound on the infimum in
/// [`bound_agnostic`]: for CMI roughly between 0.005 and 1.6 nats it is
/// smaller. Evaluating the objective at `u = 2/3` gives
/// `3·cmi + (3/2)·log 3`, which always dominates.
pub fn bound_squared_closed_form(cmi: Nats, n: usize, scale: f64) -> Result<f64> {
    check_nonneg("cmi", cmi.0)?;
    check_nonneg("scale", scale)?;
    Ok((3.0 * cmi.0 + 3f64.ln()) * scale / check_n(n)?)
}

/// Bound on the expected population 0-1 loss: `cmi/(n·log 2)` when the
/// empirical loss is always zero, else `2·empirical + 3·cmi/n`.
pub fn bound_realizable(empirical_mean: f64, cmi: Nats, n: usize) -> Result<f64> {
    check_nonneg("empirical loss", empirical_mean)?;
    check_nonneg("cmi", cmi.0)?;
    let n = check_n(n)?;
    Ok(if empirical_mean == 0.0 { cmi.0 / (n * LN_2) } else { 2.0 * empirical_mean + 3.0 * cmi.0 / n })
}

/// Bound on `P(|ℓ(A(Z̃_S), Z̃_S) − ℓ(A(Z̃_S), Z̃_S̄)| ≥ λ)` given that the
/// squared sensitivity exceeds `u` with probability `tail_prob`.
pub fn bound_nonlinear(lambda: f64, u: f64, cmi: Nats, tail_prob: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    check_nonneg("u", u)?;
    check_nonneg("cmi", cmi.0)?;
    if !(0.0..=1.0).contains(&tail_prob) {
        return Err(Error::invalid(format!("tail probability {tail_prob} is outside [0, 1]")));
    }
    Ok(2.0 * u / (lambda * lambda) * (cmi.0 + 2.0) + tail_prob)
}

/// Expectation-form bounds for a non-linear loss with `E[Δ(Z̃)²] =
/// e_delta_sq`. Only the uniform-sensitivity branch of the squared bound is
/// evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearExpectation {
    /// Bound on `E[|gap|]`: `√(2(cmi + log 2)·E[Δ²])`.
    pub absolute: f64,
    /// Bound on `E[gap²]`: `(8/3)(cmi + log 2)·E[Δ²]`.
    pub squared: f64,
}

pub fn bound_nonlinear_expectation(cmi: Nats, e_delta_sq: f64) -> Result<NonlinearExpectation> {
    check_nonneg("cmi", cmi.0)?;
    check_nonneg("E[delta^2]", e_delta_sq)?;
    let base = (cmi.0 + LN_2) * e_delta_sq;
    Ok(NonlinearExpectation { absolute: (2.0 * base).sqrt(), squared: 8.0 / 3.0 * base })
}

/// Bound on `P(|empirical AUROC − population AUROC| > ε)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AurocBound {
    /// `(48·cmi + 148)/v + exp(−n·min(p, 1−p)/7)` with `v = ε²p(1−p)n`,
    /// valid for every `n`.
    pub raw: f64,
    /// `(48·cmi + 149)/v`, valid once `v ≥ 25`.
    pub absorbed: f64,
    /// The smallest valid form, clamped to 1.
    pub reported: f64,
    /// The leading rate `cmi/v`.
    pub rate: f64,
    /// Whether `v ≥ 25`, so that the absorbed form applies.
    pub absorbed_valid: bool,
}

/// Evaluates the AUROC failure-probability bound.
///
/// ```
/// use cmi_lab::bounds::bound_auroc;
/// use cmi_lab::info::Nats;
///
/// let b = bound_auroc(0.3, 0.5, 100_000, Nats(2.0)).unwrap();
/// assert!((b.absorbed - 245.0 / 2250.0).abs() < 1e-12);
/// assert_eq!(b.reported, b.absorbed.min(b.raw));
/// ```
pub fn bound_auroc(epsilon: f64, p: f64, n: usize, cmi: Nats) -> Result<AurocBound> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("positive rate must lie in (0, 1), got {p}")));
    }
    check_nonneg("cmi", cmi.0)?;
    let nf = check_n(n)?;
    let v = epsilon * epsilon * p * (1.0 - p) * nf;
    let raw = (48.0 * cmi.0 + 148.0) / v + (-nf * p.min(1.0 - p) / 7.0).exp();
    let absorbed = (48.0 * cmi.0 + 149.0) / v;
    let absorbed_valid = v >= 25.0;
    let best = if absorbed_valid { raw.min(absorbed) } else { raw };
    Ok(AurocBound { raw, absorbed, reported: best.min(1.0), rate: cmi.0 / v, absorbed_valid })
}

/// Bound on `P(|gap| ≥ ε·Ψ(A(Z)))` for a loss normalized by `Ψ`:
/// `(3·cmi + log 3)·E[Δ²]/(ε²n)`. Carries the same caveat as
/// [`bound_squared_closed_form`]; the proof-backed version is the squared
/// infimum divided by `ε²`.
pub fn bound_normalized(epsilon: f64, cmi: Nats, n: usize, e_delta_sq: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(bound_squared_closed_form(cmi, n, e_delta_sq)? / (epsilon * epsilon))
}

/// The evaluated-CMI versions of the absolute-gap, squared-gap and
/// realizable bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcmiBounds {
    /// `√(2(ecmi + log 2)·E[Δ²]/n)`.
    pub absolute: f64,
    /// `(3·ecmi + log 3)·E[Δ²]/n`, see [`bound_squared_closed_form`].
    pub squared: f64,
    /// `1.5·ecmi/n`, for a 0-1 loss that is always zero on the training set.
    pub realizable: f64,
}

pub fn bound_ecmi(ecmi: Nats, n: usize, e_delta_sq: f64) -> Result<EcmiBounds> {
    let absolute = bound_agnostic(AgnosticKind::Absolute, ecmi, n, e_delta_sq)?;
    let squared = bound_squared_closed_form(ecmi, n, e_delta_sq)?;
    Ok(EcmiBounds { absolute, squared, realizable: 1.5 * ecmi.0 / n as f64 })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn worked_examples() {
        let n = 37;
        let full = Nats(n as f64 * LN_2);
        assert_eq!(bound_agnostic(AgnosticKind::Expected, Nats(0.0), 5, 1.0).unwrap(), 0.0);
        let e = bound_agnostic(AgnosticKind::Expected, full, n, 1.0).unwrap();
        assert!((e - 1.177_410_022_515_474_6).abs() < 1e-12);
        assert!((e - 1.177410).abs() < 1e-6);
        assert_eq!(bound_realizable(0.0, full, n).unwrap(), 1.0);
        assert_eq!(bound_realizable(0.0, Nats(0.0), n).unwrap(), 0.0);
        assert!((bound_realizable(0.05, Nats(2.0), 100).unwrap() - 0.16).abs() < 1e-12);
        assert_eq!(bound_nonlinear(1.0, 0.0, Nats(0.0), 0.25).unwrap(), 0.25);
        assert!((bound_nonlinear(0.5, 1.0, Nats(1.0), 0.0).unwrap() - 24.0).abs() < 1e-12);
        let auroc = bound_auroc(0.3, 0.5, 100_000, Nats(2.0)).unwrap();
        assert!((auroc.absorbed - 0.108_889).abs() < 1e-6);
        let zero = bound_auroc(0.3, 0.5, 100_000, Nats(0.0)).unwrap();
        assert!((zero.absorbed - 149.0 / 2250.0).abs() < 1e-12);
        assert!((bound_normalized(0.5, Nats(1.0), 100, 4.0).unwrap() - 0.655_778).abs() < 1e-6);
        assert_eq!(bound_normalized(0.5, Nats(0.0), 100, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn squared_at_two_thirds() {
        for i in 0..=4000 {
            let c = i as f64 * 0.025;
            let at = squared_objective(Nats(c), 2.0 / 3.0);
            assert!((at - (3.0 * c + 1.5 * 3f64.ln())).abs() < 1e-12);
            assert!(bound_agnostic(AgnosticKind::Squared, Nats(c), 1, 1.0).unwrap() <= at);
        }
        // The stated closed form sits below the infimum for small CMI and
        // above it for larger CMI.
        let inf = |c| bound_agnostic(AgnosticKind::Squared, Nats(c), 1, 1.0).unwrap();
        let closed = |c| bound_squared_closed_form(Nats(c), 1, 1.0).unwrap();
        assert!((inf(0.025) - 1.350_403_255_97).abs() < 1e-9);
        assert!(inf(0.025) > closed(0.025));
        assert!(inf(2.0) < closed(2.0));
        assert!((0..=200).all(|i| inf(2.0 + i as f64 * 0.5) <= closed(2.0 + i as f64 * 0.5)));
        // With zero CMI the infimum is approached as u → 0, where the
        // objective tends to 1.
        assert!((inf(0.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn squared_minimizer_beats_a_fine_scan() {
        for c in [0.01, 0.3, 1.0, 4.0, 50.0] {
            let scan = (1..100_000).map(|i| squared_objective(Nats(c), i as f64 / 100_000.0)).fold(f64::INFINITY, f64::min);
            let gs = bound_agnostic(AgnosticKind::Squared, Nats(c), 1, 1.0).unwrap();
            assert!(gs <= scan + 1e-9, "c = {c}: {gs} vs {scan}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(bound_agnostic(AgnosticKind::Expected, Nats(-1.0), 5, 1.0).is_err());
        assert!(bound_agnostic(AgnosticKind::Expected, Nats(1.0), 0, 1.0).is_err());
        assert!(bound_agnostic(AgnosticKind::Absolute, Nats(1.0), 5, -1.0).is_err());
        assert!(bound_realizable(-0.1, Nats(1.0), 5).is_err());
        assert!(bound_nonlinear(0.0, 1.0, Nats(1.0), 0.0).is_err());
        assert!(bound_nonlinear(1.0, 1.0, Nats(1.0), 1.5).is_err());
        assert!(bound_auroc(0.3, 0.0, 10, Nats(1.0)).is_err());
        assert!(bound_auroc(0.3, 1.0, 10, Nats(1.0)).is_err());
        assert!(bound_auroc(1.0, 0.5, 10, Nats(1.0)).is_err());
        assert!(bound_normalized(0.0, Nats(1.0), 10, 1.0).is_err());
    }

    #[test]
    fn auroc_forms() {
        // Small n: absorbed form is not valid, raw is reported (clamped).
        let small = bound_auroc(0.3, 0.5, 200, Nats(1.0)).unwrap();
        assert!(0.09 * 0.25 * 200.0 < 25.0);
        assert!(!small.absorbed_valid);
        assert_eq!(small.reported, 1.0);
        assert!(small.raw > 1.0);
        let big = bound_auroc(0.3, 0.5, 100_000, Nats(2.0)).unwrap();
        assert!(big.raw <= big.absorbed);
        assert_eq!(big.reported, big.raw);
        assert!((big.rate - 2.0 / 2250.0).abs() < 1e-15);
    }

    #[test]
    fn ecmi_constants() {
        let b = bound_ecmi(Nats(2.0), 100, 1.0).unwrap();
        assert!((b.realizable - 0.03).abs() < 1e-15);
        assert!((b.squared - (6.0 + 3f64.ln()) / 100.0).abs() < 1e-15);
        assert!((b.absolute - (2.0 * (2.0 + LN_2) / 100.0).sqrt()).abs() < 1e-15);
        let ne = bound_nonlinear_expectation(Nats(0.0), 1.0).unwrap();
        assert!((ne.absolute - (2.0 * LN_2).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn realizable_is_sharper_than_agnostic_for_small_cmi() {
        for n in [1usize, 2, 5, 10, 50, 100, 1000, 10_000] {
            for i in 0..=64 {
                let cmi = Nats(n as f64 / 8.0 * i as f64 / 64.0);
                let r = bound_realizable(0.0, cmi, n).unwrap();
                let a = bound_agnostic(AgnosticKind::Expected, cmi, n, 1.0).unwrap();
                assert!(r <= a + 1e-15, "n = {n}, cmi = {}", cmi.0);
            }
        }
    }

    fn all_bounds(cmi: f64, n: usize) -> Vec<f64> {
        let c = Nats(cmi);
        let mut v: Vec<f64> = [AgnosticKind::Expected, AgnosticKind::Absolute, AgnosticKind::Squared, AgnosticKind::Unbounded]
            .iter()
            .map(|&k| bound_agnostic(k, c, n, 1.7).unwrap())
            .collect();
        v.push(bound_squared_closed_form(c, n, 1.7).unwrap());
        v.push(bound_realizable(0.0, c, n).unwrap());
        v.push(bound_realizable(0.1, c, n).unwrap());
        v.push(bound_nonlinear(0.5, 2.0, c, 0.1).unwrap());
        let ne = bound_nonlinear_expectation(c, 2.0).unwrap();
        v.extend([ne.absolute, ne.squared]);
        let a = bound_auroc(0.3, 0.4, n, c).unwrap();
        v.extend([a.raw, a.absorbed, a.rate]);
        v.push(bound_normalized(0.5, c, n, 3.0).unwrap());
        let e = bound_ecmi(c, n, 1.0).unwrap();
        v.extend([e.absolute, e.squared, e.realizable]);
        v
    }

    #[test]
    fn monotone_on_a_grid() {
        let cmis: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let ns = [1usize, 2, 3, 5, 8, 13, 50, 100, 1000];
        for &n in &ns {
            for w in cmis.windows(2) {
                let (lo, hi) = (all_bounds(w[0], n), all_bounds(w[1], n));
                for (k, (a, b)) in lo.iter().zip(&hi).enumerate() {
                    assert!(a <= &(b + 1e-12), "bound {k} decreases in cmi at n = {n}");
                }
            }
        }
        for &c in &cmis {
            for w in ns.windows(2) {
                let (small, large) = (all_bounds(c, w[0]), all_bounds(c, w[1]));
                for (k, (a, b)) in small.iter().zip(&large).enumerate() {
                    // The raw AUROC form has a tail term that shrinks in n as well.
                    assert!(b <= &(a + 1e-12), "bound {k} increases in n at cmi = {c}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn normalized_scales_inversely_with_epsilon_squared(eps in 0.01f64..5.0, c in 0.0f64..10.0) {
            let one = bound_normalized(1.0, Nats(c), 20, 2.0).unwrap();
            let b = bound_normalized(eps, Nats(c), 20, 2.0).unwrap();
            prop_assert!((b * eps * eps - one).abs() <= 1e-12 * one.max(1.0));
        }
    }
}
