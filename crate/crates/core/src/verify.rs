//! Independent re-checking of certificates with exact arithmetic.
//!
//! Nothing from the producing run is trusted: cached counts, closure sizes
//! and domain properties are recomputed, and FC weights are re-separated
//! either exhaustively or with the reverse branching order.

use num::{BigInt, One, Signed, Zero};
use thiserror::Error;

use crate::fcsolve::{Certificate, Domain, FcCertificate, NonFcCertificate};
use crate::ratlp::Rational;
use crate::sepip::{
    brute_separation, build_separation, solve_separation, BranchOrder, SearchMode, SolveOptions,
    MAX_BRUTE_DOMAIN, MAX_SEPARATION_GROUND,
};
use crate::setfam::{frequencies, union_closure, universe, uplus, Family, MemberSet, UCFamily};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("certificate ground size {0} is outside 1..=8")]
    GroundSize(usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub checks: Vec<(String, bool)>,
    pub failure: Option<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.checks.iter().all(|(_, ok)| *ok)
    }

    fn record(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) -> bool {
        self.checks.push((name.to_string(), ok));
        if !ok && self.failure.is_none() {
            self.failure = Some(format!("{name}: {}", detail()));
        }
        ok
    }
}

pub fn verify_certificate(cert: &Certificate) -> Result<VerificationReport, VerifyError> {
    match cert {
        Certificate::Fc(c) => verify_fc(c),
        Certificate::NonFc(c) => verify_nonfc(c),
    }
}

struct Base {
    closure: UCFamily,
    domain: Family,
}

fn check_base(
    report: &mut VerificationReport,
    family: &Family,
    closure_size: usize,
    domain: &Domain,
) -> Result<Option<Base>, VerifyError> {
    let n = family.ground_size();
    if n == 0 || n > MAX_SEPARATION_GROUND {
        return Err(VerifyError::GroundSize(n));
    }
    let u = universe(family);
    if !report.record("family universe is [n]", u == MemberSet::full(n), || {
        format!("universe {u} on ground {n}")
    }) {
        return Ok(None);
    }
    let closure = union_closure(family);
    report.record("closure size", closure.len() == closure_size, || {
        format!("recorded {closure_size}, actual {}", closure.len())
    });
    let domain = match domain {
        Domain::Full => Family::power_set(n).expect("ground size checked"),
        Domain::Explicit(v) => v.clone(),
    };
    let probe = crate::fcsolve::WeightVector::uniform(n);
    let valid = build_separation(&closure, &probe, &domain);
    if !report.record("domain is valid", valid.is_ok(), || {
        valid
            .as_ref()
            .err()
            .map(|e| e.to_string())
            .unwrap_or_default()
    }) {
        return Ok(None);
    }
    Ok(Some(Base { closure, domain }))
}

fn check_cuts(report: &mut VerificationReport, base: &Base, cuts: &[crate::fcsolve::Cut]) -> bool {
    let n = base.closure.ground_size();
    let bad_counts = cuts.iter().position(|c| {
        c.family.ground_size() != n
            || c.size != c.family.len()
            || c.freq.family_size != c.size
            || c.freq != frequencies(&c.family)
    });
    let ok_counts = report.record("cut counts match families", bad_counts.is_none(), || {
        format!("cut {}", bad_counts.unwrap_or(0))
    });
    let bad_closed = cuts.iter().position(|c| !c.family.is_union_closed());
    let ok_closed = report.record("cuts are union-closed", bad_closed.is_none(), || {
        format!("cut {}", bad_closed.unwrap_or(0))
    });
    let bad_absorb = cuts
        .iter()
        .position(|c| uplus(&base.closure, &c.family).map_or(true, |u| u != c.family));
    let ok_absorb = report.record("cuts absorb the closure", bad_absorb.is_none(), || {
        format!("cut {}", bad_absorb.unwrap_or(0))
    });
    let bad_domain = cuts
        .iter()
        .position(|c| !c.family.is_subfamily_of(&base.domain));
    let ok_domain = report.record("cuts lie in the domain", bad_domain.is_none(), || {
        format!("cut {}", bad_domain.unwrap_or(0))
    });
    ok_counts && ok_closed && ok_absorb && ok_domain
}

/// Checks (a) weights form a distribution, (b) every stored cut holds, and
/// (c) an independent separation solve finds no violated inequality.
pub fn verify_fc(cert: &FcCertificate) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::default();
    let Some(base) = check_base(&mut report, &cert.family, cert.closure_size, &cert.domain)? else {
        return Ok(report);
    };
    let n = cert.family.ground_size();
    let w = cert.weights.entries();
    let ok_len = report.record("weight count", w.len() == n, || {
        format!("{} weights for ground {n}", w.len())
    });
    let ok_nonneg = report.record(
        "weights nonnegative",
        w.iter().all(|c| !c.is_negative()),
        || "negative entry".into(),
    );
    let total: Rational = w.iter().sum();
    let ok_sum = report.record("weights sum to 1", total.is_one(), || {
        format!("sum is {total}")
    });
    let cuts_ok = check_cuts(&mut report, &base, &cert.cuts);
    if !(ok_len && ok_nonneg && ok_sum) {
        return Ok(report);
    }
    if cuts_ok {
        let two = Rational::from_integer(BigInt::from(2));
        let violated = cert.cuts.iter().position(|cut| {
            let lhs: Rational = cut
                .family
                .iter()
                .flat_map(|s| s.elements())
                .map(|e| w[e - 1].clone())
                .sum();
            lhs * &two < Rational::from_integer(BigInt::from(cut.family.len()))
        });
        report.record("cut inequalities hold", violated.is_none(), || {
            format!("cut {} is violated", violated.unwrap_or(0))
        });
    }
    let optimum = if base.domain.len() <= MAX_BRUTE_DOMAIN {
        brute_separation(&base.closure, &cert.weights, &base.domain).map(|r| r.optimum)
    } else {
        build_separation(&base.closure, &cert.weights, &base.domain).and_then(|p| {
            solve_separation(
                &p,
                SolveOptions {
                    mode: SearchMode::FirstViolation,
                    order: BranchOrder::Reverse,
                    ..Default::default()
                },
            )
            .map(|r| r.optimum)
        })
    };
    match optimum {
        Ok(v) => {
            report.record("separation optimum <= 0", !v.is_positive(), || {
                format!("found a family with value {v}")
            });
        }
        Err(e) => {
            report.record("separation optimum <= 0", false, || e.to_string());
        }
    }
    Ok(report)
}

/// Checks (a) cut caches and closure properties, and (b) the Farkas
/// combination: `y >= 0`, `Σ y = 1`, `λ = -max_i Σ_B y_B |B_i|`, every
/// combined coefficient `<= 0` and `Σ_B y_B |B| / 2 + λ > 0`.
pub fn verify_nonfc(cert: &NonFcCertificate) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::default();
    let Some(base) = check_base(&mut report, &cert.family, cert.closure_size, &cert.domain)? else {
        return Ok(report);
    };
    let n = cert.family.ground_size();
    let cuts_ok = check_cuts(&mut report, &base, &cert.cuts);
    let y = &cert.farkas.multipliers;
    let shape = y.len() == cert.cuts.len() && cert.farkas.lambda.len() == 1;
    if !report.record("multiplier count", shape, || {
        format!("{} multipliers for {} cuts", y.len(), cert.cuts.len())
    }) {
        return Ok(report);
    }
    let lambda = &cert.farkas.lambda[0];
    report.record(
        "multipliers nonnegative",
        y.iter().all(|v| !v.is_negative()),
        || "negative multiplier".into(),
    );
    let total: Rational = y.iter().sum();
    report.record("multipliers sum to 1", total.is_one(), || {
        format!("sum is {total}")
    });
    if !cuts_ok {
        return Ok(report);
    }
    let mut combined = vec![Rational::zero(); n];
    let mut rhs = lambda.clone();
    for (cut, yb) in cert.cuts.iter().zip(y) {
        for s in cut.family.iter() {
            for e in s.elements() {
                combined[e - 1] += yb;
            }
        }
        rhs += yb * Rational::new(BigInt::from(cut.family.len()), BigInt::from(2));
    }
    let max = combined
        .iter()
        .max()
        .cloned()
        .unwrap_or_else(Rational::zero);
    report.record(
        "lambda is -max combined coefficient",
        *lambda == -&max,
        || format!("lambda {lambda}, expected {}", -&max),
    );
    let worst = combined.iter().position(|c| (c + lambda).is_positive());
    report.record("combined coefficients <= 0", worst.is_none(), || {
        format!("element {}", worst.map_or(0, |i| i + 1))
    });
    report.record("combined right-hand side > 0", rhs.is_positive(), || {
        format!("right-hand side {rhs}")
    });
    Ok(report)
}
