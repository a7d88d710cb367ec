//! Acceptance suite: one PASS/FAIL line per criterion on stdout.
//!
//! Run with `cargo test -p fc-core --test acceptance`.

use std::collections::{BTreeSet, HashSet};
use std::time::Instant;

use fc_core::canon::{automorphism_group, canonical_form, orbits, Permutation};
use fc_core::enumfam::{fc_value, fcv_value, lex_scan, DomainSpec, NfcSolver, SearchConfig};
use fc_core::fcsolve::{fc3_value, is_fc, upper_bound, Certificate, Cut, FcOptions, WeightVector};
use fc_core::ratlp::{lp_solve, LinearProgram, LpOutcome, Rational, Sense};
use fc_core::sepip::{brute_separation, build_separation, no_singletons, solve_separation};
use fc_core::setfam::{
    translates_family, union_closure, universe, wide_regular_3set_fc, wide_regularity, Family,
    MemberSet,
};
use fc_core::verify::verify_certificate;
use num::{BigInt, One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fam(n: usize, lists: &[&[usize]]) -> Family {
    Family::from_lists(n, lists)
}

fn verified(cert: &Certificate) -> bool {
    verify_certificate(cert).is_ok_and(|r| r.passed())
}

fn c1_small_decisions() -> Outcome {
    let two = is_fc(&fam(2, &[&[1, 2]]), &FcOptions::default()).map_err(|e| e.to_string())?;
    ensure(two.is_fc(), || "{{1,2}} not FC".into())?;
    ensure(verified(&two), || "{{1,2}} certificate rejected".into())?;
    let three = is_fc(&fam(3, &[&[1, 2, 3]]), &FcOptions::default()).map_err(|e| e.to_string())?;
    ensure(!three.is_fc(), || "{{1,2,3}} reported FC".into())?;
    ensure(verified(&three), || "{{1,2,3}} certificate rejected".into())?;
    Ok("{{1,2}} FC, {{1,2,3}} Non-FC, both verified".into())
}

fn c2_fc3() -> Outcome {
    let mut solver = NfcSolver::new(3, SearchConfig::default());
    let mut got = Vec::new();
    for (n, want) in [(4, 3), (5, 3), (6, 4), (7, 4)] {
        let r = fc_value(3, n, None, &mut solver).map_err(|e| e.to_string())?;
        ensure(r.value == Some(want), || {
            format!("FC(3,{n}) = {:?}, want {want}", r.value)
        })?;
        ensure(fc3_value(n as u64).ok() == Some(want as u64), || {
            format!("closed form disagrees at n={n}")
        })?;
        got.push(format!("FC(3,{n})={want}"));
    }
    Ok(got.join(" "))
}

fn c3_fc4() -> Outcome {
    let mut solver = NfcSolver::new(4, SearchConfig::default());
    let r5 = fc_value(4, 5, None, &mut solver).map_err(|e| e.to_string())?;
    ensure(r5.value == Some(5), || format!("FC(4,5) = {:?}", r5.value))?;
    let r6 = fc_value(4, 6, None, &mut solver).map_err(|e| e.to_string())?;
    ensure(r6.value == Some(7), || format!("FC(4,6) = {:?}", r6.value))?;
    for r in [&r5, &r6] {
        let w = r.witness_certificate.clone().ok_or("missing witness")?;
        ensure(verified(&Certificate::NonFc(w)), || {
            "witness certificate rejected".into()
        })?;
    }
    Ok("FC(4,5)=5 FC(4,6)=7, witnesses verified".into())
}

fn vfc(a: &Family, v: Family) -> Result<bool, String> {
    let cert = is_fc(
        a,
        &FcOptions {
            domain: Some(v),
            symmetry: true,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    ensure(verified(&cert), || format!("certificate for {a} rejected"))?;
    Ok(cert.is_fc())
}

fn c4_vfc() -> Outcome {
    let p3_minus = Family::new(
        3,
        Family::power_set(3)
            .unwrap()
            .iter()
            .filter(|&s| s != MemberSet::of(&[1])),
    )
    .unwrap();
    ensure(vfc(&fam(3, &[&[1, 2, 3]]), p3_minus)?, || {
        "{{1,2,3}} not V-FC for P([3]) minus {1}".into()
    })?;
    ensure(vfc(&fam(4, &[&[1, 2, 3, 4]]), no_singletons(4))?, || {
        "{{1,2,3,4}} not V-FC for no-singletons".into()
    })?;
    let three = fam(6, &[&[1, 2, 3, 4, 5], &[1, 2, 3, 4, 6], &[1, 2, 3, 5, 6]]);
    ensure(vfc(&three, no_singletons(6))?, || {
        "three 5-sets not V-FC".into()
    })?;
    let two = fam(6, &[&[1, 2, 3, 4, 5], &[1, 2, 3, 4, 6]]);
    ensure(!vfc(&two, no_singletons(6))?, || {
        "two 5-sets reported V-FC".into()
    })?;
    let mut vals = Vec::new();
    for (k, n, want) in [(5, 6, 3), (5, 7, 5), (6, 7, 7)] {
        let r = fcv_value(k, n, &DomainSpec::NoSingletons, SearchConfig::default())
            .map_err(|e| e.to_string())?;
        ensure(r.value == Some(want), || {
            format!("FC_V({k},{n}) = {:?}, want {want}", r.value)
        })?;
        vals.push(format!("FC_V({k},{n})={want}"));
    }
    Ok(format!("four corollary cases, {}", vals.join(" ")))
}

fn ceil_oracle(k: u64, n: u64, n0: u64, m0: u64) -> u64 {
    let ff = |x: u64| (0..k).map(|i| BigInt::from(x - i)).product::<BigInt>();
    let q = Rational::new(BigInt::from(m0 - 1) * ff(n), ff(n0));
    let c = q.ceil().to_integer();
    let c: u64 = c.try_into().unwrap();
    c + 1
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

fn c5_upper_bound() -> Outcome {
    for (args, want) in [
        ((4, 9, 8, 12), 21),
        ((5, 8, 7, 14), 36),
        ((6, 9, 8, 26), 76),
    ] {
        let got = upper_bound(args.0, args.1, args.2, args.3).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("{args:?} gave {got}, want {want}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tested = 0;
    while tested < 100 {
        let k = rng.gen_range(3..=7u64);
        let n0 = rng.gen_range(k..=14);
        let n = rng.gen_range(n0 + 1..=16);
        let m0 = rng.gen_range(1..=binom(n0, k));
        let got = upper_bound(k, n, n0, m0).map_err(|e| format!("{k},{n},{n0},{m0}: {e}"))?;
        ensure(got == ceil_oracle(k, n, n0, m0), || {
            format!("mismatch at {k},{n},{n0},{m0}")
        })?;
        ensure(got <= binom(n, k), || {
            format!("bound above C(n,k) at {k},{n},{n0},{m0}")
        })?;
        tested += 1;
    }
    Ok("21 36 76; 100 random tuples within C(n,k)".into())
}

fn random_family(rng: &mut ChaCha8Rng, n: usize) -> Family {
    let count = rng.gen_range(1..=4);
    let sets: Vec<MemberSet> = (0..count)
        .map(|_| MemberSet::from_bits(rng.gen_range(1..(1u32 << n)) as u16))
        .collect();
    Family::new(n, sets).unwrap()
}

fn c6_symmetry() -> Outcome {
    let mut corpus: Vec<Family> = Vec::new();
    for n in 1..=6usize {
        for k in 1..=4usize.min(n) {
            for m in 1..=2 {
                for f in fc_core::enumfam::gen_noniso_families(n, k, m) {
                    corpus.push(union_closure(&f).into_family());
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let n = rng.gen_range(2..=6);
        corpus.push(union_closure(&random_family(&mut rng, n)).into_family());
    }
    let mut transitive = 0;
    for a in &corpus {
        let off = is_fc(a, &FcOptions::default()).map_err(|e| e.to_string())?;
        let on = is_fc(
            a,
            &FcOptions {
                symmetry: true,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        ensure(off.is_fc() == on.is_fc(), || {
            format!("symmetry changes verdict for {a}")
        })?;
        let (compact, _) = a.compact();
        let closure = union_closure(&compact);
        if universe(&compact) == MemberSet::full(compact.ground_size())
            && orbits(&closure).is_transitive()
        {
            transitive += 1;
            let n = compact.ground_size();
            let p = build_separation(
                &closure,
                &WeightVector::uniform(n),
                &Family::power_set(n).unwrap(),
            )
            .map_err(|e| e.to_string())?;
            let uniform_ok = !solve_separation(&p, Default::default())
                .map_err(|e| e.to_string())?
                .optimum
                .is_positive();
            ensure(uniform_ok == on.is_fc(), || {
                format!("uniform check disagrees for transitive {a}")
            })?;
        }
    }
    Ok(format!(
        "{} families agree, {transitive} transitive",
        corpus.len()
    ))
}

/// Every union-closed `B ⊆ P([n])`, as bit masks over `P([n])`.
fn all_union_closed(n: usize) -> Vec<Vec<u16>> {
    let sets = 1usize << n;
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << sets) {
        let members: Vec<u16> = (0..sets as u16).filter(|&s| mask & (1 << s) != 0).collect();
        let closed = members
            .iter()
            .all(|&a| members.iter().all(|&b| mask & (1 << (a | b)) != 0));
        if closed {
            out.push(members);
        }
    }
    out
}

/// FC by Farkas over the complete inequality system: the dual
/// `max Σ y_B |B|/2 + λ` over `Σ_B y_B |B_i| + λ <= 0`, `Σ y = 1`, `y >= 0`
/// has a positive optimum iff no weights satisfy every inequality.
fn definitional_fc(a: &Family, universe_closed: &[Vec<u16>]) -> bool {
    let n = a.ground_size();
    let mut rows: BTreeSet<Vec<i64>> = BTreeSet::new();
    for b in universe_closed {
        let absorbs = b
            .iter()
            .all(|&s| a.iter().all(|x| b.contains(&(s | x.bits()))));
        if !absorbs {
            continue;
        }
        let mut v = vec![b.len() as i64];
        for i in 0..n {
            v.push(b.iter().filter(|&&s| s & (1 << i) != 0).count() as i64);
        }
        rows.insert(v);
    }
    let rows: Vec<Vec<i64>> = rows.into_iter().collect();
    let m = rows.len();
    let int = |v: i64| Rational::from_integer(BigInt::from(v));
    let mut lp = LinearProgram::new(m + 1).free(m);
    for i in 0..n {
        let mut r: Vec<Rational> = rows.iter().map(|v| int(v[i + 1])).collect();
        r.push(Rational::one());
        lp = lp.le(r, Rational::zero());
    }
    let mut simplex = vec![Rational::one(); m];
    simplex.push(Rational::zero());
    lp = lp.eq(simplex, Rational::one());
    let mut obj: Vec<Rational> = rows
        .iter()
        .map(|v| Rational::new(BigInt::from(v[0]), BigInt::from(2)))
        .collect();
    obj.push(Rational::one());
    lp = lp.with_objective(obj, Sense::Maximize);
    match lp_solve(&lp).expect("well-formed LP") {
        LpOutcome::Optimal { value, .. } => !value.is_positive(),
        other => panic!("unexpected LP outcome {other:?}"),
    }
}

fn c7_oracle() -> Outcome {
    let mut checked = 0;
    for n in 1..=4usize {
        let closed = all_union_closed(n);
        let mut seen: HashSet<Family> = HashSet::new();
        for members in &closed {
            let a = Family::new(n, members.iter().map(|&b| MemberSet::from_bits(b))).unwrap();
            if !a.contains(MemberSet::EMPTY) || universe(&a) != MemberSet::full(n) {
                continue;
            }
            if !seen.insert(canonical_form(&a).relabeled) {
                continue;
            }
            let cert = is_fc(&a, &FcOptions::default()).map_err(|e| e.to_string())?;
            let oracle = definitional_fc(&a, &closed);
            ensure(cert.is_fc() == oracle, || {
                format!("{a}: cutting planes {}, oracle {oracle}", cert.is_fc())
            })?;
            if let Certificate::Fc(c) = &cert {
                let r = brute_separation(
                    &union_closure(&a),
                    &c.weights,
                    &Family::power_set(n).unwrap(),
                )
                .map_err(|e| e.to_string())?;
                ensure(!r.optimum.is_positive(), || {
                    format!("{a}: brute separation positive")
                })?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} union-closed classes over n <= 4"))
}

fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Permutation {
    let mut images: Vec<usize> = (0..n).collect();
    images.shuffle(rng);
    Permutation::from_images(images).unwrap()
}

fn brute_group_order(f: &Family) -> usize {
    let n = f.ground_size();
    let mut images: Vec<usize> = (0..n).collect();
    let mut count = 0;
    permute(&mut images, 0, &mut |p| {
        let perm = Permutation::from_images(p.to_vec()).unwrap();
        if perm.apply_family(f) == *f {
            count += 1;
        }
    });
    count
}

fn permute(v: &mut Vec<usize>, i: usize, f: &mut dyn FnMut(&[usize])) {
    if i == v.len() {
        f(v);
        return;
    }
    for j in i..v.len() {
        v.swap(i, j);
        permute(v, i + 1, f);
        v.swap(i, j);
    }
}

fn c8_canonical() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=7);
        let count = rng.gen_range(0..=10);
        let f = Family::new(
            n,
            (0..count).map(|_| MemberSet::from_bits(rng.gen_range(0..(1u32 << n)) as u16)),
        )
        .unwrap();
        let p = random_permutation(&mut rng, n);
        let g = p.apply_family(&f);
        ensure(
            canonical_form(&f).relabeled == canonical_form(&g).relabeled,
            || format!("canonical forms differ for {f} under {p:?}"),
        )?;
    }
    let mut groups = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=5);
        let count = rng.gen_range(0..=6);
        let f = Family::new(
            n,
            (0..count).map(|_| MemberSet::from_bits(rng.gen_range(0..(1u32 << n)) as u16)),
        )
        .unwrap()
        .compact()
        .0;
        let order = automorphism_group(&f).map_err(|e| e.to_string())?.len();
        ensure(order == brute_group_order(&f), || {
            format!("group order differs for {f}")
        })?;
        groups += 1;
    }
    Ok(format!(
        "1000 relabelings invariant, {groups} group orders match"
    ))
}

fn c9_translates() -> Outcome {
    let mut count = 0;
    for n in 4..=8usize {
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let t = translates_family(n, &[a, b, c]).map_err(|e| e.to_string())?;
                    ensure(wide_regular_3set_fc(&t), || {
                        format!("n={n} R={{{a},{b},{c}}}")
                    })?;
                    count += 1;
                }
            }
        }
    }
    let t = translates_family(4, &[0, 1, 2]).map_err(|e| e.to_string())?;
    // n² horizontal plus n² vertical translates; each cell lies in 3 of each
    ensure(t.len() == 2 * 16, || format!("size {}", t.len()))?;
    ensure(wide_regularity(&t) == Some(6), || "degree is not 6".into())?;
    ensure(t.degrees().iter().sum::<usize>() == 3 * t.len(), || {
        "degree sum".into()
    })?;
    Ok(format!(
        "{count} translate families regular and FC; n=4 has 32 sets of degree 6"
    ))
}

fn c10_lex_scan() -> Outcome {
    let r = lex_scan(4, 5, SearchConfig::default()).map_err(|e| e.to_string())?;
    ensure(r.m == 5, || format!("lex_scan(4,5) = {}", r.m))?;
    ensure(verified(&Certificate::Fc(r.prefix.clone())), || {
        "[S_5] certificate".into()
    })?;
    let prev = r.previous.as_ref().ok_or("missing [S_4] certificate")?;
    ensure(!prev.is_fc() && verified(prev), || {
        "[S_4] is not a verified Non-FC".into()
    })?;
    let mut solver = NfcSolver::new(3, SearchConfig::default());
    let mut vals = Vec::new();
    for n in 4..=6usize {
        let s = lex_scan(3, n, SearchConfig::default()).map_err(|e| e.to_string())?;
        ensure(s.m == n / 2 + 1, || format!("lex_scan(3,{n}) = {}", s.m))?;
        let v = fc_value(3, n, None, &mut solver).map_err(|e| e.to_string())?;
        ensure(v.value == Some(s.m), || {
            format!("fc_value(3,{n}) disagrees")
        })?;
        vals.push(format!("lex_scan(3,{n})={}", s.m));
    }
    let mut s4 = NfcSolver::new(4, SearchConfig::default());
    let v = fc_value(4, 5, None, &mut s4).map_err(|e| e.to_string())?;
    ensure(v.value == Some(r.m), || "fc_value(4,5) disagrees".into())?;
    Ok(format!("lex_scan(4,5)=5 verified, {}", vals.join(" ")))
}

fn flip_element(f: &Family, member: usize, element: usize) -> Family {
    let mut sets = f.members().to_vec();
    sets[member] = MemberSet::from_bits(sets[member].bits() ^ (1 << (element - 1)));
    Family::new(f.ground_size(), sets).unwrap()
}

fn nonzero_delta(rng: &mut ChaCha8Rng) -> Rational {
    let num = rng.gen_range(1..=5i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
    Rational::new(BigInt::from(num), BigInt::from(rng.gen_range(1..=7i64)))
}

fn tamper(cert: &Certificate, rng: &mut ChaCha8Rng) -> Certificate {
    let mut out = cert.clone();
    let cuts_nonempty = !cert.cuts().is_empty();
    loop {
        match (rng.gen_range(0..4), &mut out) {
            (0, Certificate::Fc(c)) => {
                let mut w = c.weights.entries().to_vec();
                let i = rng.gen_range(0..w.len());
                w[i] += nonzero_delta(rng);
                c.weights = WeightVector::from_entries_unchecked(w);
                return out;
            }
            (0, Certificate::NonFc(c)) => {
                let i = rng.gen_range(0..c.farkas.multipliers.len());
                c.farkas.multipliers[i] += nonzero_delta(rng);
                return out;
            }
            (1, Certificate::NonFc(c)) => {
                c.farkas.lambda[0] += nonzero_delta(rng);
                return out;
            }
            (2, Certificate::Fc(_) | Certificate::NonFc(_)) if cuts_nonempty => {
                let cuts = match &mut out {
                    Certificate::Fc(c) => &mut c.cuts,
                    Certificate::NonFc(c) => &mut c.cuts,
                };
                let ci = rng.gen_range(0..cuts.len());
                let cut = &mut cuts[ci];
                let mi = rng.gen_range(0..cut.family.len());
                let e = rng.gen_range(1..=cut.family.ground_size());
                cut.family = flip_element(&cut.family, mi, e);
                return out;
            }
            (3, Certificate::Fc(_) | Certificate::NonFc(_)) if cuts_nonempty => {
                let cuts = match &mut out {
                    Certificate::Fc(c) => &mut c.cuts,
                    Certificate::NonFc(c) => &mut c.cuts,
                };
                let ci = rng.gen_range(0..cuts.len());
                let cut: &mut Cut = &mut cuts[ci];
                let i = rng.gen_range(0..cut.freq.counts.len());
                cut.freq.counts[i] += 1;
                return out;
            }
            _ => continue,
        }
    }
}

fn c11_tamper() -> Outcome {
    let bases = [
        (fam(2, &[&[1, 2]]), false),
        (fam(3, &[&[1, 2, 3]]), false),
        (fam(3, &[&[1, 2, 3]]), true),
        (fam(4, &[&[1, 2, 3], &[2, 3, 4]]), false),
        (fam(5, &[&[1, 2, 3], &[1, 4, 5]]), true),
        (fam(5, &[&[1, 2, 3], &[1, 2, 4], &[3, 4, 5]]), false),
        (fam(5, &[&[1, 2, 3, 4], &[1, 2, 3, 5]]), false),
    ];
    let mut certs = Vec::new();
    for (a, sym) in &bases {
        let c = is_fc(
            a,
            &FcOptions {
                symmetry: *sym,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        ensure(verified(&c), || {
            format!("untampered certificate for {a} rejected")
        })?;
        certs.push(c);
    }
    let kinds: HashSet<bool> = certs.iter().map(Certificate::is_fc).collect();
    ensure(kinds.len() == 2, || {
        "corpus lacks one certificate kind".into()
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t in 0..500 {
        let base = &certs[t % certs.len()];
        let bad = tamper(base, &mut rng);
        ensure(bad != *base, || "tamper left certificate unchanged".into())?;
        ensure(!verified(&bad), || {
            format!("tamper {t} of {} passed", base.family())
        })?;
    }
    Ok("500 tampers rejected".into())
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1", "known small FC decisions", c1_small_decisions),
        ("2", "FC(3,n) for n = 4..7", c2_fc3),
        ("3", "FC(4,5) and FC(4,6)", c3_fc4),
        ("4", "V-FC corollaries and FC_V values", c4_vfc),
        ("5", "upper-bound formula", c5_upper_bound),
        ("6", "symmetry equivalence", c6_symmetry),
        ("7", "oracle equivalence over n <= 4", c7_oracle),
        ("8", "canonical-form suite", c8_canonical),
        ("9", "translate families", c9_translates),
        ("10", "lexicographic-prefix scan", c10_lex_scan),
        ("11", "certificate tamper suite", c11_tamper),
    ];
    let only: Option<String> = std::env::var("ACCEPTANCE_ONLY").ok();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| o.split(',').all(|x| x != id)) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {id:>2}: {name} ({detail}) [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {id:>2}: {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
