//! Acceptance harness. Runs every criterion at its stated tolerance and
//! prints one PASS/FAIL line per criterion, followed by the measured values.
//! Failing criteria do not abort the run; the process exits non-zero only
//! on panics, so known shortfalls stay visible without breaking the suite.

use std::time::Instant;

use num_complex::Complex64;

use prolong_core::cnls_sim::*;
use prolong_core::diffpoly::{CNLSSystem, Field};
use prolong_core::lax_numeric::{invariant_scan, relative_trace_drift, residual_fd};
use prolong_core::loop_algebra::{
    check_relations, jacobi_scan, standard_relations, Classification, KnownDiscrepancies, MappingTable,
};
use prolong_core::props::{diffpoly_props, loop_algebra_props, DEFAULT_CASES, DEFAULT_SEED};
use prolong_core::scalar::cq_int;
use prolong_core::zero_curvature::*;
use prolong_core::{Scalar, Symbol};

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        let msg = msg.into();
        self.details.push(format!("{} {msg}", if ok { "ok  " } else { "FAIL" }));
        self.pass &= ok;
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.details.push(format!("     {}", msg.into()));
    }
}

fn loop_algebra_soundness() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let rep = jacobi_scan(2);
    let secs = start.elapsed().as_secs_f64();
    o.check(rep.generators == 45, format!("{} generators", rep.generators));
    o.check(rep.triples == 45 * 45 * 45, format!("{} ordered triples", rep.triples));
    o.check(
        rep.violations.is_empty(),
        format!("{} violations, max residual {}", rep.violations.len(), rep.max_residual),
    );
    o.check(secs < 30.0, format!("runtime {secs:.2} s < 30 s"));
    o
}

fn homomorphism_report() -> Outcome {
    let mut o = Outcome::new();
    let known = KnownDiscrepancies::bundled();
    let start = Instant::now();
    let rep = check_relations(&MappingTable::standard(1, 1), &standard_relations()).expect("relations evaluate");
    let secs = start.elapsed().as_secs_f64();
    for c in known.check(&rep) {
        o.check(
            c.flagged,
            format!(
                "[{}] documented {}, measured {} (whitelisted)",
                c.tag, c.documented, c.measured
            ),
        );
    }

    let mut mu_values = Vec::new();
    for out in &rep.outcomes {
        if known.contains(&out.tag) {
            continue;
        }
        if let Classification::ExactWithParameters { values } = &out.classification {
            if let Some(mu) = values.get(&Symbol::Mu) {
                mu_values.push((out.tag.clone(), mu.clone()));
            }
        }
        if !out.classification.passes() {
            o.check(
                false,
                format!("[{}] {} is {}", out.tag, out.text, out.classification.name()),
            );
        }
    }
    let checked = rep.outcomes.iter().filter(|r| !known.contains(&r.tag)).count();
    o.note(format!("{checked} relations checked outside the whitelist"));
    let consistent = !mu_values.is_empty() && mu_values.iter().all(|(_, v)| v == "2");
    let tags: Vec<_> = mu_values.iter().map(|(t, v)| format!("{t}:{v}")).collect();
    o.check(
        consistent,
        format!("mu-diagonal relations infer mu = 2 at {}", tags.join(" ")),
    );
    o.note(format!(
        "counts: exact {}, exact_with_parameters {}, holds_after_rhs_swap {}, fails {}",
        rep.counts.exact, rep.counts.exact_with_parameters, rep.counts.holds_after_rhs_swap, rep.counts.fails
    ));
    o.check(secs < 5.0, format!("runtime {secs:.2} s < 5 s"));
    o
}

fn zero_curvature_derivation() -> (Outcome, Option<Derivation>) {
    let mut o = Outcome::new();
    let start = Instant::now();
    let lax = symbolic_lax(Family::L);
    let d = match derive_pde(&lax) {
        Ok(d) => d,
        Err(e) => {
            o.check(false, format!("derive_pde: {e}"));
            return (o, None);
        }
    };
    for out in &d.outcomes {
        o.note(format!(
            "{}: rank {}, leftover {}",
            out.convention, out.rank, out.leftover_terms
        ));
    }
    o.check(
        d.classes == 1 && d.closing.len() == 2 && d.closing.contains(&d.convention.negated()),
        format!(
            "closing conventions {:?} form one sign class (the negated residual closes with the same triple)",
            d.closing.iter().map(ToString::to_string).collect::<Vec<_>>()
        ),
    );
    o.check(
        d.is_unique(),
        format!(
            "coefficient triple unique by rank: (a, b, c) = ({}, {}, {})",
            d.coefficients[0], d.coefficients[1], d.coefficients[2]
        ),
    );
    o.check(
        d.coefficients == [cq_int(1), cq_int(1), cq_int(1)],
        "triple is (1, 1, 1)",
    );
    for fam in Family::ALL {
        let fl = symbolic_lax(fam);
        let sys = CNLSSystem::with_coefficients(
            &fam.symbolic_coupling(),
            Symbol::Epsilon.into(),
            Scalar::from_cq(d.coefficients[0].clone()),
            Scalar::from_cq(d.coefficients[1].clone()),
            Scalar::from_cq(d.coefficients[2].clone()),
        );
        let terms = verify_zero_curvature(&fl, &sys, d.convention).unwrap_or(usize::MAX);
        o.check(terms == 0, format!("family {fam:?}: {terms} surviving terms"));
    }
    let mut doubled = d.system.clone();
    doubled.eps = &doubled.eps * &Scalar::int(2);
    let control = verify_zero_curvature(&lax, &doubled, d.convention).unwrap_or(0);
    o.check(
        control > 0,
        format!("negative control eps -> 2 eps: {control} surviving terms"),
    );
    let secs = start.elapsed().as_secs_f64();
    o.check(secs < 60.0, format!("runtime {secs:.2} s < 60 s"));
    (o, Some(d))
}

fn family_specialization() -> Outcome {
    let mut o = Outcome::new();
    let (l, m, n) = (
        symbolic_lax(Family::L),
        symbolic_lax(Family::M),
        symbolic_lax(Family::N),
    );
    let mf: Scalar = Symbol::Mfrak.into();
    let lm = l.specialize(Symbol::M1, &mf).specialize(Symbol::M2, &-&mf);
    o.check(lm.l1 == m.l1 && lm.l2 == m.l2, "L with m1 = -m2 = mfrak equals M");
    let m0 = m.specialize(Symbol::Mfrak, &Scalar::zero());
    o.check(m0.l1 == n.l1 && m0.l2 == n.l2, "M with mfrak = 0 equals N");
    let l0 = l
        .specialize(Symbol::M1, &Scalar::zero())
        .specialize(Symbol::M2, &Scalar::zero());
    o.check(l0.l1 == n.l1 && l0.l2 == n.l2, "L with m1 = m2 = 0 equals N");
    o
}

fn proposition_round_trip_check(d: Option<&Derivation>) -> Outcome {
    let mut o = Outcome::new();
    let Some(d) = d else {
        o.check(false, "no derived system to compare against");
        return o;
    };
    let ansatz = ConnectionAnsatz::standard();
    match proposition_round_trip(&ansatz, &CoefficientSolution::printed(), &d.system) {
        Ok(rt) => {
            o.note(format!(
                "convention {}, eps normalization {}",
                rt.convention, rt.eps_normalization
            ));
            o.note(format!("measured coupling {:?}", rt.measured_coupling));
            o.note(format!("target coupling   {:?}", rt.target_coupling));
            for (g, k) in rt.per_generator.iter().filter(|(_, k)| *k > 0) {
                o.note(format!("{g}: {k} surviving terms"));
            }
            o.check(
                rt.mismatch == 0,
                format!("printed constants map: mismatch {}", rt.mismatch),
            );
        }
        Err(e) => o.check(false, format!("printed constants map: {e}")),
    }
    if let Ok(rt) = proposition_round_trip(&ansatz, &CoefficientSolution::corrected(), &d.system) {
        o.note(format!(
            "diagnostic: eta2 = mu1 = i kappa gives mismatch {}",
            rt.mismatch
        ));
    }
    let sol = CoefficientSolution::symbolic();
    let ansatz_system =
        AnsatzDerivation::admissible(&ansatz, &sol)
            .ok()
            .and_then(|mut v| if v.is_empty() { None } else { v.remove(0).system });
    if let Some(rep) = ansatz_system.and_then(|sys| verify_proposition(&sol, &sys).ok()) {
        o.note(format!(
            "diagnostic: printed constraint list {} with the computed ansatz",
            if rep.all_pass() { "agrees" } else { "disagrees" }
        ));
    }
    o
}

fn soliton_params(a: f64) -> SolitonParams {
    SolitonParams {
        eta: 1.0,
        a,
        c: [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
        t0: 0.0,
        eps: 2.0,
    }
}

fn soliton_run(n: usize, dx: f64, x_end: f64, snapshot_every: usize, a: f64) -> (SimConfig, SolitonParams, RunOutput) {
    let grid = Grid::new(40.0, n).expect("grid");
    let mut cfg = SimConfig::new(grid, NumericK::default(), 2.0, dx, x_end);
    cfg.snapshot_every = snapshot_every;
    let p = soliton_params(a);
    let init = manakov_soliton(&p, 0.0, &grid).expect("soliton");
    let out = run(&cfg, &init).expect("run");
    (cfg, p, out)
}

fn soliton_fidelity() -> Outcome {
    let mut o = Outcome::new();
    let c = [Scalar::rational(3, 5), &Scalar::rational(4, 5) * &Scalar::i()];
    match soliton_closed_form_residual(&Scalar::int(2), &Scalar::one(), c) {
        Ok(res) => {
            let left: usize = res.iter().map(|(_, k)| k).sum();
            let per: Vec<String> = res.iter().map(|(f, k)| format!("{}:{k}", field_name(*f))).collect();
            o.check(
                left == 0,
                format!("closed form in the symbolic system: residual terms {}", per.join(" ")),
            );
        }
        Err(e) => o.check(false, format!("closed form validation: {e}")),
    }
    let start = Instant::now();
    let (cfg, p, out) = soliton_run(512, 1e-3, 1.0, 0, 0.5);
    let secs = start.elapsed().as_secs_f64();
    let exact = manakov_soliton(&p, cfg.x_end, &cfg.grid).expect("soliton");
    let err = out.final_state().max_diff(&exact);
    o.check(
        err <= 1e-5,
        format!("max-norm error {err:.3e} <= 1e-5 after {} steps", out.steps),
    );
    let drift = out.diagnostics.power_drift();
    o.check(drift <= 1e-10, format!("relative power drift {drift:.3e} <= 1e-10"));
    o.check(secs < 60.0, format!("runtime {secs:.2} s < 60 s"));
    o
}

fn field_name(f: Field) -> String {
    match f {
        Field::Beta(k) => format!("b{k}"),
        Field::BetaConj(k) => format!("b{k}*"),
        Field::Coef(c, k) => format!("{c:?}{k}"),
    }
}

fn ratio_ok(r: f64) -> bool {
    (3.0..=5.0).contains(&r)
}

fn conservation_laws(convention: Option<Convention>) -> Outcome {
    let mut o = Outcome::new();
    let lambdas = [0.0, 0.3, -0.3];
    let (cfg, _, out) = soliton_run(512, 1e-3, 1.0, 100, 0.5);
    let rows = invariant_scan(&out.trajectory, &lambdas, &cfg).expect("scan");
    let mut coarse = Vec::new();
    for lam in lambdas {
        let d = relative_trace_drift(&rows, lam);
        coarse.push(d);
        o.check(
            d <= 1e-6,
            format!("lambda {lam:+}: relative trace drift {d:.3e} <= 1e-6"),
        );
    }
    let det_dev = rows
        .iter()
        .map(|r| (Complex64::new(r.det[0], r.det[1]) - 1.0).norm())
        .fold(0.0, f64::max);
    o.check(
        det_dev <= 1e-8,
        format!("max |det T - 1| = {det_dev:.3e} <= 1e-8 over {} rows", rows.len()),
    );

    let (fcfg, _, fine) = soliton_run(1024, 5e-4, 1.0, 200, 0.5);
    let frows = invariant_scan(&fine.trajectory, &lambdas, &fcfg).expect("scan");
    for (lam, c) in lambdas.iter().zip(&coarse) {
        let f = relative_trace_drift(&frows, *lam);
        let r = c / f;
        o.check(
            ratio_ok(r),
            format!("lambda {lam:+}: trace drift {c:.3e} -> {f:.3e}, ratio {r:.2} in [3, 5]"),
        );
    }

    let Some(conv) = convention else {
        o.check(false, "no derived convention for residual_fd");
        return o;
    };
    let residual = |n: usize, dx: f64, a: f64| {
        let (c, _, out) = soliton_run(n, dx, 0.01, 1, a);
        residual_fd(&out.trajectory, 0.3, &c, conv, Family::L).expect("residual")
    };
    let (rc, rf) = (residual(256, 1e-3, 0.5), residual(512, 5e-4, 0.5));
    o.check(
        ratio_ok(rc / rf),
        format!("residual_fd {rc:.3e} -> {rf:.3e}, ratio {:.2} in [3, 5]", rc / rf),
    );
    let a_periodic = 2.0 * std::f64::consts::PI * 3.0 / 40.0;
    let (pc, pf) = (residual(256, 1e-3, a_periodic), residual(512, 5e-4, a_periodic));
    o.note(format!(
        "diagnostic: with a = 2 pi 3 / 40 (phase periodic on the window) residual_fd {pc:.3e} -> {pf:.3e}, ratio {:.2}",
        pc / pf
    ));
    o
}

fn engine_properties() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for rep in [
        diffpoly_props(DEFAULT_SEED, DEFAULT_CASES),
        loop_algebra_props(DEFAULT_SEED, DEFAULT_CASES),
    ] {
        for p in &rep.outcomes {
            let extra = p
                .first_failure
                .as_deref()
                .map(|f| format!(" first: {f}"))
                .unwrap_or_default();
            o.check(
                p.failures == 0,
                format!("{}: {} cases, {} failures{extra}", p.name, p.cases, p.failures),
            );
        }
    }
    o.note(format!(
        "seed {DEFAULT_SEED:#x}, runtime {:.2} s",
        start.elapsed().as_secs_f64()
    ));
    o
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 loop-algebra soundness", loop_algebra_soundness()));
    results.push(("2 homomorphism report", homomorphism_report()));
    let (zc, derivation) = zero_curvature_derivation();
    let convention = derivation.as_ref().map(|d| d.convention);
    results.push(("3 zero-curvature derivation", zc));
    results.push(("4 family specialization", family_specialization()));
    results.push((
        "5 proposition round trip",
        proposition_round_trip_check(derivation.as_ref()),
    ));
    results.push(("6 soliton fidelity", soliton_fidelity()));
    results.push(("7 conservation laws", conservation_laws(convention)));
    results.push(("8 engine properties", engine_properties()));

    for (name, o) in &results {
        println!("{} criterion {name}", if o.pass { "PASS" } else { "FAIL" });
        for d in &o.details {
            println!("    {d}");
        }
    }
    let passed = results.iter().filter(|(_, o)| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
}
