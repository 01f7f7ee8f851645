//! End-to-end solver properties on small generated instances.

use ucgs_core::gug::{gug_run, GugOptions, GugRegime, GugSchedule, StopReason};
use ucgs_core::inner::{cgm_solve, AlphaRule, ProjSubproblem};
use ucgs_core::reference::ref_min_phi;
use ucgs_core::rng::seeded_rng;
use ucgs_core::ucgs::{ucgs_run, UcgsOptions, UcgsStatus};
use ucgs_core::{InstanceSpec, ObjectiveSpec, OracleCounters, ProblemInstance, SetSpec, Vector};

fn instance(objective: ObjectiveSpec, set: SetSpec, seed: u64) -> ProblemInstance {
    InstanceSpec { objective, set, dim: 12, rows: 8, seed }.build().unwrap()
}

fn instances() -> Vec<ProblemInstance> {
    let mut out = Vec::new();
    for (i, set) in [
        SetSpec::Simplex,
        SetSpec::L1Ball { radius: 0.5 },
        SetSpec::Box { lo: -1.0, hi: 1.0 },
        SetSpec::L2Ball { radius: 1.0 },
    ]
    .into_iter()
    .enumerate()
    {
        out.push(instance(ObjectiveSpec::Quadratic, set.clone(), 10 + i as u64));
        out.push(instance(ObjectiveSpec::PNorm { p: 1.5 }, set, 20 + i as u64));
    }
    out
}

#[test]
fn conditional_gradient_recurrence_and_counts() {
    for p in instances() {
        let schedule = GugSchedule::new(GugRegime::Cg, p.diameter()).unwrap();
        let counters = OracleCounters::new();
        let options = GugOptions { record_steps: true, ..Default::default() };
        let n = 200;
        let run = gug_run(&p, &schedule, n, &options, &counters).unwrap();
        assert_eq!(run.stop, StopReason::IterationLimit);
        let c = counters.snapshot();
        assert_eq!(c.lmo_calls, n as u64);
        assert_eq!(c.grad_evals, n as u64);
        run.trace.check_invariants(1e-9).unwrap();
        for st in &run.steps {
            let g = 2.0 / (st.k as f64 + 1.0);
            assert_eq!(st.gamma, g);
            let z = st.y_prev.scale(1.0 - g).add(&st.x_prev.scale(g));
            assert!(z.dist(&st.z) <= 1e-12);
            let y = st.y_prev.scale(1.0 - g).add(&st.x.scale(g));
            assert!(y.dist(&st.y) <= 1e-12);
            assert!(p.set.contains_within(&st.x, 1e-9) && p.set.contains_within(&st.y, 1e-9));
        }
        // duality certificate never undercuts the true gap
        for r in &run.trace.rows {
            assert!(r.certified_gap.unwrap() >= r.true_gap.unwrap() - 1e-9);
        }
    }
}

#[test]
fn sliding_steps_stay_feasible_and_within_lmo_budget() {
    for p in instances().into_iter().filter(|p| p.objective.smoothness().nu < 1.0) {
        let sm = p.objective.smoothness();
        let regime = GugRegime::Sliding { nu: sm.nu, m_nu: sm.m_nu };
        let schedule = GugSchedule::new(regime, p.diameter()).unwrap();
        let options = GugOptions { record_steps: true, ..Default::default() };
        let run = gug_run(&p, &schedule, 60, &options, &OracleCounters::new()).unwrap();
        let mut prev = 0;
        for (r, st) in run.trace.rows.iter().zip(&run.steps) {
            assert!(r.lmo_calls_cum - prev <= r.k + 1);
            prev = r.lmo_calls_cum;
            assert!(p.set.contains_within(&st.y, 1e-9));
        }
        let first = run.trace.rows[0].true_gap.unwrap();
        assert!(run.trace.last().unwrap().true_gap.unwrap() < first);
    }
}

#[test]
fn universal_method_certifies_and_is_deterministic() {
    for p in instances() {
        let options = UcgsOptions { record_steps: true, ..UcgsOptions::new(1e-3) };
        let run = ucgs_run(&p, &options, &OracleCounters::new()).unwrap();
        assert_eq!(run.status, UcgsStatus::Converged);
        assert!(run.certified_gap <= 1e-3);
        assert!(run.f_final - p.fstar.unwrap() <= run.certified_gap + 1e-12);
        run.trace.check_invariants(1e-9).unwrap();
        let mut prev_big = f64::INFINITY;
        for st in &run.steps {
            let a = &st.accepted;
            assert!(a.big_gamma <= prev_big);
            prev_big = a.big_gamma;
            assert!(p.set.contains_within(&a.x, 1e-9) && p.set.contains_within(&a.y, 1e-9));
            assert!(st.model.eval(p.minimizer.as_ref().unwrap()) <= 1e-9);
        }
        let again = ucgs_run(&p, &UcgsOptions::new(1e-3), &OracleCounters::new()).unwrap();
        assert_eq!(again.trace.to_csv(), run.trace.to_csv());
    }
}

#[test]
fn inner_solver_reaches_projection_value() {
    let mut rng = seeded_rng(99);
    for p in instances() {
        let set = &p.set;
        for _ in 0..5 {
            let anchor = set.sample(&mut rng);
            let g = p.objective.gradient(&set.sample(&mut rng));
            let beta = 2.0;
            let eta = 1e-4;
            let sub = ProjSubproblem::new(g, beta, anchor.clone(), set, eta, 0.0).unwrap();
            let exact = ref_min_phi(&sub).unwrap();
            for rule in [AlphaRule::ExactLinesearch, AlphaRule::FirstStepFull] {
                let r = cgm_solve(&sub, &anchor, rule, &OracleCounters::new()).unwrap();
                let excess = sub.phi(&r.u_plus) - exact.value;
                assert!(excess >= -1e-9 && excess <= eta + 1e-9, "excess {excess}");
                // strong convexity turns the value gap into a distance bound
                assert!(r.u_plus.dist(&exact.x) <= (2.0 * eta / beta).sqrt() + 1e-6);
                assert!(r.u_plus.dist(&exact.x) <= 1e-2);
            }
        }
    }
}

#[test]
fn rejects_bad_inputs() {
    let p = instance(ObjectiveSpec::Quadratic, SetSpec::Simplex, 1);
    assert!(GugSchedule::new(GugRegime::Sliding { nu: 1.0, m_nu: 1.0 }, 1.0).is_err());
    assert!(GugSchedule::new(GugRegime::Cg, 0.0).is_err());
    let schedule = GugSchedule::new(GugRegime::Cg, p.diameter()).unwrap();
    assert!(gug_run(&p, &schedule, 0, &GugOptions::default(), &OracleCounters::new()).is_err());
    assert!(ucgs_run(&p, &UcgsOptions::new(-1.0), &OracleCounters::new()).is_err());
    let sub = ProjSubproblem::new(Vector::zeros(3), -1.0, Vector::zeros(3), &p.set, 1.0, 0.0);
    assert!(sub.is_err());
}
