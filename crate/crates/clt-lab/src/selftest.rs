//! Built-in verification: reruns the dual-route and inequality suites on
//! fresh randomized instances and prints one line per check.

use clt_lab_core::bounds::{crude_bound_with_sigma, rectangle_bound_with_sigma};
use clt_lab_core::{
    epsilon_delta_certificate, exact_ks_iid_rademacher, fixtures, weights_direct, weights_fast,
    HClass, InnovationModel, Stream,
};

use crate::error::{LabError, Result};

const SEED_BASE: u64 = 0x5E1F_7E57;

/// Max relative cellwise gap between the direct and transform routes.
fn route_gap(instances: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..instances {
        let mut s = Stream::seeded(SEED_BASE ^ i);
        let (a, gamma) = fixtures::random_instance(&mut s, 32);
        let direct = weights_direct(&a, &gamma)?;
        let fast = weights_fast(&a, &gamma)?;
        let (r_lo, r_hi, s_lo, s_hi) = direct.grid().bounds();
        let mut max_abs = 0.0f64;
        for r in r_lo..=r_hi {
            for t in s_lo..=s_hi {
                max_abs = max_abs.max(direct.grid().get(r, t).abs());
            }
        }
        let scale = if max_abs > 0.0 { max_abs } else { 1.0 };
        for r in r_lo..=r_hi {
            for t in s_lo..=s_hi {
                let gap = (direct.grid().get(r, t) - fast.grid().get(r, t)).abs() / scale;
                if gap > worst {
                    worst = gap;
                }
                if gap > 1e-9 {
                    return Err(LabError::Invalid(format!(
                        "route mismatch on instance {i} at ({r},{t}): relative gap {gap:e}"
                    )));
                }
            }
        }
    }
    Ok(worst)
}

fn bound_soundness(instances: u64) -> Result<()> {
    for i in 0..instances {
        let mut s = Stream::seeded(SEED_BASE.wrapping_add(1).wrapping_mul(i + 1));
        let (a, gamma) = fixtures::random_instance(&mut s, 16);
        let b = weights_fast(&a, &gamma)?;
        let rho = b.rho();
        for p in [1.0, 2.0] {
            let bound = crude_bound_with_sigma(&a, &gamma, p, b.sigma())?;
            if bound < rho - 1e-12 {
                return Err(LabError::Soundness(format!(
                    "crude bound p={p} gives {bound} below rho {rho} on instance {i}"
                )));
            }
        }
        if gamma.is_rect_union() {
            let rb = rectangle_bound_with_sigma(&a, &gamma, b.sigma())?;
            if rb.value < rho - 1e-12 {
                return Err(LabError::Soundness(format!(
                    "rectangle bound gives {} below rho {rho} on instance {i}",
                    rb.value
                )));
            }
            // The closed form must also dominate its own certifying chain.
            if rb.value < rb.certifying_intermediate - 1e-9 {
                return Err(LabError::Soundness(format!(
                    "closed form {} below certifying chain {} on instance {i}",
                    rb.value, rb.certifying_intermediate
                )));
            }
        }
    }
    Ok(())
}

fn certificate_arithmetic() -> Result<()> {
    let eps = 0.1;
    let cert = epsilon_delta_certificate(eps, &HClass::singleton(InnovationModel::Rademacher))?;
    if cert.t != 960.0 {
        return Err(LabError::Invalid(format!("T for eps=0.1 is {}, not 960", cert.t)));
    }
    let eta_expected: f64 = 0.4 / 884_736_000.0;
    if cert.eta.to_bits() != eta_expected.to_bits() {
        return Err(LabError::Invalid(format!(
            "eta for eps=0.1 is {:e}, expected {:e}",
            cert.eta, eta_expected
        )));
    }
    let lhs = cert.eta * cert.t * cert.t * cert.t / 18.0 + 24.0 / cert.t;
    let rhs = 2.0 * eps / 9.0 + eps / 4.0;
    if (lhs - rhs).abs() > 1e-14 {
        return Err(LabError::Invalid(format!(
            "chain identity off by {:e}",
            (lhs - rhs).abs()
        )));
    }
    // Bounded unit-variance member: the envelope inverse floors at the
    // support edge, so delta reduces to eta itself.
    if cert.sharp != 1.0 || cert.delta != cert.eta {
        return Err(LabError::Invalid(
            "Rademacher class should invert to sharp=1, delta=eta".into(),
        ));
    }
    Ok(())
}

fn exact_oracle_anchors() -> Result<()> {
    let one = exact_ks_iid_rademacher(1)?;
    let expected = 0.34134474606854293;
    if (one - expected).abs() > 1e-12 {
        return Err(LabError::Invalid(format!(
            "exact oracle n=1 gives {one}, expected {expected}"
        )));
    }
    let two = exact_ks_iid_rademacher(2)?;
    if (two - 0.1875).abs() > 1e-13 {
        return Err(LabError::Invalid(format!(
            "exact oracle n=2 gives {two}, expected 0.1875"
        )));
    }
    let mut prev = f64::INFINITY;
    for n in [2u64, 4, 8, 16, 32] {
        let v = exact_ks_iid_rademacher(n)?;
        if v >= prev {
            return Err(LabError::Invalid(format!(
                "exact oracle not decreasing at n={n}: {v} >= {prev}"
            )));
        }
        prev = v;
    }
    Ok(())
}

/// Runs every check, printing one PASS line each; the first failure is
/// returned as an error (soundness failures map to exit code 3).
pub fn run(instances: u64) -> Result<()> {
    if instances == 0 {
        return Err(LabError::Invalid("selftest needs at least one instance".into()));
    }
    let worst = route_gap(instances)?;
    println!("PASS route-equivalence: {instances} instances, max relative gap {worst:.3e}");
    let sound_n = instances.min(300);
    bound_soundness(sound_n)?;
    println!("PASS bound-soundness: {sound_n} instances, crude p1/p2 and rectangle all above rho");
    certificate_arithmetic()?;
    println!("PASS certificate-arithmetic: T=960, eta=4e-1/884736000, chain identity to 1e-14");
    exact_oracle_anchors()?;
    println!("PASS exact-oracle: n=1,2 anchors and strict decrease over n=2..32");
    Ok(())
}
