use proptest::prelude::*;
use std::collections::BTreeMap;
use wsoe_core::fixtures::*;
use wsoe_core::selection::{map_input_parameters, map_output_parameters, EXHAUSTIVE_LIMIT};
use wsoe_core::*;

fn qos() -> impl Strategy<Value = QoSSpec> {
    (0u64..=1_000_000, 0u64..=1_000_000).prop_map(|(r, c)| QoSSpec::new(r, c))
}

// (activities, registry); every activity's ontology has candidates.
fn selection_case(
    acts: std::ops::RangeInclusive<usize>,
    cands: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = (Vec<ActivityDef>, Registry)> {
    (1..=6usize, acts).prop_flat_map(move |(onts, acts)| {
        let cands = prop::collection::vec(prop::collection::vec((1u64..200, 0u64..50), cands.clone()), onts);
        let owners = prop::collection::vec(0..onts, acts);
        (cands, owners).prop_map(|(cands, owners)| {
            let mut all = Vec::new();
            for (o, list) in cands.iter().enumerate() {
                for (k, (rt, cost)) in list.iter().enumerate() {
                    all.push(CandidateService {
                        candidate_id: format!("o{o}-{k}"),
                        ontology: format!("O{o}"),
                        qos: QoSSpec::new(*rt, *cost),
                    });
                }
            }
            let acts =
                owners.iter().enumerate().map(|(i, o)| ActivityDef::new(format!("a{i}"), format!("O{o}"))).collect();
            (acts, Registry::from_candidates(all).unwrap())
        })
    })
}

type Key = (u64, u64, Vec<String>);

// Best assignment by brute force: cheapest, then fastest, then smallest ids.
fn brute_best(bound: QoSSpec, acts: &[ActivityDef], reg: &Registry) -> Option<Key> {
    let lists: Vec<&[CandidateService]> = acts.iter().map(|a| reg.candidates(&a.ontology)).collect();
    let mut idx = vec![0usize; lists.len()];
    let mut best: Option<Key> = None;
    loop {
        let picks: Vec<&CandidateService> = idx.iter().zip(&lists).map(|(&i, l)| &l[i]).collect();
        let cost: u64 = picks.iter().map(|c| c.qos.cost_cents).sum();
        let rt = picks.iter().map(|c| c.qos.response_time_ms).max().unwrap_or(0);
        if cost <= bound.cost_cents && rt <= bound.response_time_ms {
            let key = (cost, rt, picks.iter().map(|c| c.candidate_id.clone()).collect());
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return best;
            }
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn check_against_brute(bound: QoSSpec, acts: &[ActivityDef], reg: &Registry) -> Result<(), TestCaseError> {
    let got = qos_allocate(bound, acts, reg).unwrap();
    match brute_best(bound, acts, reg) {
        None => prop_assert_eq!(got.decision, Decision::Denied),
        Some((cost, rt, ids)) => {
            prop_assert_eq!(got.decision, Decision::Granted);
            let picked: Vec<String> = acts.iter().map(|a| got.per_activity[&a.name].0.candidate_id.clone()).collect();
            let agg = got.aggregate();
            prop_assert!(agg.fits_within(&bound));
            prop_assert_eq!((agg.cost_cents, agg.response_time_ms, picked), (cost, rt, ids));
        }
    }
    Ok(())
}

proptest! {
    #[test]
    fn aggregate_is_max_of_times_and_sum_of_costs(qs in prop::collection::vec(qos(), 0..=8)) {
        let agg = aggregate_qos(qs.iter().copied());
        let mut rt = 0;
        let mut cost = 0;
        for q in &qs {
            if q.response_time_ms > rt { rt = q.response_time_ms; }
            cost += q.cost_cents;
        }
        prop_assert_eq!(agg, QoSSpec::new(rt, cost));
    }

    #[test]
    fn selector_matches_brute_force(
        (acts, reg) in selection_case(1..=6, 1..=4),
        rt in 0u64..250,
        cost in 0u64..200,
    ) {
        check_against_brute(QoSSpec::new(rt, cost), &acts, &reg)?;
    }

    #[test]
    fn aggregate_is_order_independent_and_monotone(q in qos(), mut qs in prop::collection::vec(qos(), 0..=8)) {
        let a = aggregate_qos(qs.iter().copied());
        qs.reverse();
        prop_assert_eq!(a, aggregate_qos(qs.iter().copied()));
        qs.push(q);
        prop_assert!(a.fits_within(&aggregate_qos(qs.iter().copied())));
    }

    #[test]
    fn equal_seeds_give_equal_traces(seed in any::<u64>(), feasible in any::<bool>()) {
        let e = Engine::new(bookstore_workflow(), bookstore_registry()).unwrap();
        let q = if feasible { BOOKSTORE_FEASIBLE } else { BOOKSTORE_INFEASIBLE };
        let reqs = [bookstore_request("c1", q), bookstore_request("c2", BOOKSTORE_TIGHT)];
        let a = e.run(&reqs, seed).unwrap();
        let b = e.run(&reqs, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn random_runs_conform(seed in any::<u64>(), rt in 0u64..400, cost in 0u64..80, n in 1usize..=3) {
        let e = Engine::new(bookstore_workflow(), bookstore_registry()).unwrap();
        let reqs: Vec<_> = (0..n).map(|i| bookstore_request(&format!("c{i}"), QoSSpec::new(rt, cost + i as u64 * 10))).collect();
        let t = e.run(&reqs, seed).unwrap();
        let r = check_pyramid(&e, std::slice::from_ref(&t));
        prop_assert!(r.passed(), "{:?}", r.verdict());
        for c in t.configurations() {
            for inst in c.instances() {
                prop_assert_eq!(inst.any_bound(), inst.state.admits_bindings() && inst.state != InstanceState::Waiting);
                prop_assert_eq!(inst.output_parameters.is_some(), inst.state == InstanceState::Completed);
            }
        }
    }

    #[test]
    fn output_names_are_injective(
        outs in prop::collection::btree_map("[A-Za-z ]{1,8}", prop::collection::btree_map("[a-z.]{1,6}", "[a-z]{0,4}", 0..4), 1..5)
    ) {
        let acts: BTreeMap<String, Option<ParamMap>> = outs.iter().map(|(k, v)| (k.clone(), Some(v.clone()))).collect();
        let merged = map_output_parameters(&acts).unwrap();
        prop_assert_eq!(merged.len(), outs.values().map(BTreeMap::len).sum::<usize>());
        for (k, v) in &merged {
            let (name, key) = k.split_once('.').unwrap();
            prop_assert_eq!(&outs[name][key], v);
        }
    }

    #[test]
    fn inputs_reach_every_activity_or_exactly_one(
        keys in prop::collection::btree_map("(a|b c|zz)?\\.?[a-z]{1,3}", "[0-9]{1,2}", 0..6)
    ) {
        let names = ["a", "b c"];
        let split = map_input_parameters(&keys, names);
        for (k, v) in &keys {
            let target = k.split_once('.').and_then(|(p, rest)| match p {
                "a" => Some(("a", rest)),
                "b c" | "bc" => Some(("b c", rest)),
                _ => None,
            });
            match target {
                Some((n, rest)) => prop_assert_eq!(split[n].get(rest), Some(v)),
                None => for n in names { prop_assert_eq!(split[n].get(k), Some(v)); },
            }
        }
    }

    #[test]
    fn registry_round_trips_through_jsonl((_, reg) in selection_case(1..=1, 1..=4)) {
        prop_assert_eq!(Registry::parse(&reg.to_jsonl()).unwrap(), reg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn greedy_regime_matches_brute_force(
        (acts, reg) in selection_case(7..=8, 3..=4).prop_filter("large product", |(a, r)| {
            a.iter().map(|x| r.candidates(&x.ontology).len()).product::<usize>() > EXHAUSTIVE_LIMIT as usize
        }),
        rt in 0u64..250,
        cost in 0u64..250,
    ) {
        check_against_brute(QoSSpec::new(rt, cost), &acts, &reg)?;
    }
}
