use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use smplab_core::channels::capacity;
use smplab_core::directsum::{compile, verify_compiled, CompileOptions};
use smplab_core::io::{read_channel, read_distribution, read_protocol_spec, read_relation_spec};
use smplab_core::probcore::relative_entropy;
use smplab_core::quantdm::{check_altchar, check_entropytrace, check_joint_convexity, check_lowinfent};
use smplab_core::smp::{
    measure_error, measure_error_on, nayak_certificate, rac_bruteforce, run, sample_inputs, EqualityFingerprint,
    EqualityFullDisclosure, EqualityRelation, ErrorMode, FOneWay, FRelation, FSmp, HOneWay, HRelation, HSmp,
    KFold, Party, Protocol, RelationSpec, SOneWay, SRelation,
};
use smplab_core::substate::{decompose, default_max_tries, simulate_distribution, SimulationParams};
use smplab_core::{Error, Result};

use crate::{
    Catalog, CapacityArgs, Command, CompileArgs, ErrorArgs, Fact, Mode, ProtocolCommand, QcheckArgs, RacArgs,
    RunArgs, Selection, Side, SimulateArgs, SubstateArgs,
};

type Outcome = Result<(bool, Value)>;

fn to_value(v: impl Serialize) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Parse(e.to_string()))
}

fn param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub fn dispatch(command: &Command) -> Outcome {
    match command {
        Command::Capacity(a) => run_capacity(a),
        Command::Substate(a) => run_substate(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Qcheck(a) => run_qcheck(a),
        Command::Protocol(ProtocolCommand::Run(a)) => run_protocol(a),
        Command::Protocol(ProtocolCommand::Error(a)) => run_error(a),
        Command::Compile(a) => run_compile(a),
        Command::Rac(a) => run_rac(a),
    }
}

fn run_capacity(a: &CapacityArgs) -> Outcome {
    if !(a.tol > 0.0) {
        return Err(param("tol must be positive"));
    }
    let w = read_channel(&a.channel)?;
    let c = capacity(&w, a.tol, a.max_iter)?;
    let pass = c.gap <= a.tol;
    Ok((
        pass,
        json!({
            "capacity": c.capacity,
            "upper_bound": c.upper_bound(),
            "gap": c.gap,
            "iterations": c.iterations,
            "input": c.input,
            "output": c.output,
        }),
    ))
}

fn run_substate(a: &SubstateArgs) -> Outcome {
    let p = read_distribution(&a.p)?;
    let q = read_distribution(&a.q)?;
    let dec = decompose(&p, &q, a.r)?;
    let checks = json!({
        "mixture_residual": dec.mixture_residual(),
        "domination_excess": dec.domination_excess(),
        "smoothing_distance": dec.smoothing_distance(),
        "smoothing_bound": 2.0 / a.r,
        "bad_mass": dec.bad_mass(),
        "bad_mass_bound": 1.0 / a.r,
    });
    let pass = dec.mixture_residual() <= 1e-12
        && dec.domination_excess() <= 1e-15
        && dec.smoothing_distance() <= 2.0 / a.r + 1e-12
        && dec.bad_mass() <= 1.0 / a.r + 1e-12;
    let accept: Vec<f64> = (0..p.len()).map(|x| dec.accept_probability(x)).collect();
    Ok((
        pass,
        json!({ "decomposition": to_value(&dec)?, "accept_probability": accept, "checks": checks }),
    ))
}

fn run_simulate(a: &SimulateArgs) -> Outcome {
    let p = read_distribution(&a.p)?;
    let q = read_distribution(&a.q)?;
    let params = match (a.r, a.max_tries) {
        (None, None) => SimulationParams::for_target(&p, &q, a.delta, a.seed)?,
        (r, tries) => {
            let r = r.unwrap_or(4.0 / a.delta);
            if !(r > 1.0) {
                return Err(param(format!("r = {r} must exceed 1")));
            }
            let tries = match tries {
                Some(t) => t,
                None => {
                    let d = relative_entropy(&p, &q)?;
                    if d.is_infinite() {
                        return Err(Error::InfiniteDivergence);
                    }
                    default_max_tries(r, d + 1.0)?
                }
            };
            SimulationParams::new(r, a.delta, tries, a.seed)?
        }
    };
    let report = simulate_distribution(&p, &q, &params, a.trials)?;
    let slack = 3.0 * (p.len() as f64 / a.trials as f64).sqrt();
    let pass = report.l1_to_target <= a.delta + slack && report.fail_rate <= a.delta / 2.0;
    Ok((
        pass,
        json!({
            "params": params,
            "report": to_value(&report)?,
            "l1_bound": a.delta + slack,
            "fail_bound": a.delta / 2.0,
        }),
    ))
}

fn run_qcheck(a: &QcheckArgs) -> Outcome {
    if a.trials == 0 {
        return Err(param("need at least one trial"));
    }
    let check = match a.fact {
        Fact::Lowinfent => check_lowinfent(a.trials, (a.dim, a.dim), a.seed)?,
        Fact::Entropytrace => check_entropytrace(a.trials, a.dim, a.seed)?,
        Fact::Altchar => check_altchar(a.trials, a.dim, a.seed)?,
        Fact::Jointconvexity => check_joint_convexity(a.trials, a.dim, a.seed)?,
    };
    Ok((check.passed(), to_value(&check)?))
}

fn party(s: Side) -> Party {
    match s {
        Side::Alice => Party::Alice,
        Side::Bob => Party::Bob,
    }
}

fn resolve(s: &Selection) -> Result<(Protocol, Arc<dyn RelationSpec>)> {
    if let (Some(p), Some(f)) = (&s.protocol, &s.relation) {
        return Ok((Protocol::Smp(read_protocol_spec(p)?.build()?), read_relation_spec(f)?.build()?));
    }
    let name = s.name.ok_or_else(|| param("either --name or --protocol/--relation is required"))?;
    let n = s.n.ok_or_else(|| param("--n is required for built-in protocols"))?;
    let t = || s.t.ok_or_else(|| param("--t is required for this protocol"));
    Ok(match name {
        Catalog::Eq => (Protocol::smp(EqualityFingerprint::new(n, t()?)?), Arc::new(EqualityRelation::new(n)?)),
        Catalog::EqFull => (Protocol::smp(EqualityFullDisclosure::new(n)?), Arc::new(EqualityRelation::new(n)?)),
        Catalog::H => (Protocol::smp(HSmp::new(n, t()?)?), Arc::new(HRelation::new(n, s.equal_promise)?)),
        Catalog::HOneWay => (
            Protocol::one_way(HOneWay::new(n, t()?)?),
            Arc::new(HRelation::new(n, s.equal_promise)?),
        ),
        Catalog::F => (Protocol::smp(FSmp::new(n, party(s.heavy))?), Arc::new(FRelation::new(n)?)),
        Catalog::FOneWay => (Protocol::one_way(FOneWay::new(n, party(s.sender))?), Arc::new(FRelation::new(n)?)),
        Catalog::S => (Protocol::one_way(SOneWay::new(n)?), Arc::new(SRelation::new(n)?)),
    })
}

fn run_protocol(a: &RunArgs) -> Outcome {
    let (p, f) = resolve(&a.selection)?;
    let out = run(&p, a.x, a.y, a.seed)?;
    let correct = f.holds(a.x, a.y, out.z);
    Ok((
        true,
        json!({ "protocol": p.name(), "outcome": to_value(out)?, "correct": correct }),
    ))
}

fn run_error(a: &ErrorArgs) -> Outcome {
    let (p, f) = resolve(&a.selection)?;
    let mode = match a.mode {
        Mode::Exhaustive => {
            if a.trials.is_some() {
                return Err(param("--trials only applies to mc mode"));
            }
            ErrorMode::Exhaustive
        }
        Mode::Mc => {
            let trials = a.trials.ok_or_else(|| param("mc mode needs --trials"))?;
            if trials == 0 {
                return Err(param("need at least one trial"));
            }
            ErrorMode::MonteCarlo { trials }
        }
    };
    let needs_seed = a.mode == Mode::Mc || a.sample_inputs.is_some();
    let seed = match (a.seed, needs_seed) {
        (Some(s), _) => s,
        (None, false) => 0,
        (None, true) => return Err(param("--seed is required for sampled measurements")),
    };
    let report = match a.sample_inputs {
        Some(count) => measure_error_on(&p, f.as_ref(), &sample_inputs(f.as_ref(), count, seed)?, mode, seed)?,
        None => measure_error(&p, f.as_ref(), mode, seed)?,
    };
    let pass = a.epsilon.map_or(true, |eps| report.max_error <= eps + report.slack);
    Ok((
        pass,
        json!({
            "protocol": p.name(),
            "relation": f.name(),
            "max_error": report.max_error,
            "comm_alice_bits": report.comm_alice_bits,
            "comm_bob_bits": report.comm_bob_bits,
            "slack": report.slack,
            "worst_input": report.worst_input,
            "per_input": report.per_input,
        }),
    ))
}

fn run_compile(a: &CompileArgs) -> Outcome {
    if a.k == 0 {
        return Err(param("k must be at least 1"));
    }
    if a.trials == 0 {
        return Err(param("need at least one trial"));
    }
    let base = read_protocol_spec(&a.protocol)?.build()?;
    let f = read_relation_spec(&a.relation)?.build()?;
    let kf = Arc::new(KFold::new(base, a.k)?);
    let mut options = CompileOptions::new(a.delta);
    options.tol = a.tol;
    let cp = compile(kf, f.as_ref(), &options)?;
    let v = verify_compiled(&cp, f.as_ref(), a.trials, a.seed)?;
    Ok((
        v.pass,
        json!({
            "k": cp.k,
            "coordinate": cp.coordinate,
            "capacities": {
                "alice": cp.alice.coordinate_capacities,
                "bob": cp.bob.coordinate_capacities,
            },
            "markov_bound": { "alice": cp.alice.markov_bound, "bob": cp.bob.markov_bound },
            "tau_a": cp.alice.tau(),
            "tau_b": cp.bob.tau(),
            "max_divergence": { "alice": cp.alice.max_divergence, "bob": cp.bob.max_divergence },
            "compression": {
                "alice": { "r": cp.alice.r, "max_tries": cp.alice.max_tries, "width": cp.alice.width, "delivered_l1": cp.alice.delivered_l1 },
                "bob": { "r": cp.bob.r, "max_tries": cp.bob.max_tries, "width": cp.bob.width, "delivered_l1": cp.bob.delivered_l1 },
            },
            "bits_kfold": { "alice": v.bits_alice, "bob": v.bits_bob },
            "bits_compiled": v.bits_compiled,
            "epsilon_base": v.epsilon_base,
            "epsilon_base_slack": v.epsilon_base_slack,
            "ideal_max_error": v.ideal_max_error,
            "delta": v.delta,
            "bound_epsilon_plus_2delta": v.bound,
            "max_error": v.max_error,
            "slack": v.slack,
            "trials": v.trials,
            "per_input_error": v.per_input,
            "pass": v.pass,
        }),
    ))
}

fn run_rac(a: &RacArgs) -> Outcome {
    let opt = rac_bruteforce(a.n, a.m)?;
    let cert = nayak_certificate(opt.error(), a.n, a.m)?;
    Ok((
        cert.satisfied,
        json!({
            "optimum": to_value(opt)?,
            "success": opt.success(),
            "error": opt.error(),
            "certificate": to_value(cert)?,
        }),
    ))
}
