use std::collections::BTreeMap;
use std::sync::Arc;

use wsoe_core::fixtures::*;
use wsoe_core::model::{ActorChange, ActorSnapshot, Allocation};
use wsoe_core::*;

fn small(activities: usize) -> Engine {
    let wf = if activities == 1 { one_activity_workflow() } else { two_activity_workflow() };
    Engine::new(wf, small_registry()).unwrap()
}

#[test]
fn at_most_one_rule_matches_any_reachable_head() {
    let e = small(2);
    let full = ExploreLimits { commute_independent: false, ..Default::default() };
    let mut heads = 0;
    for t in e.explore(&[small_request("c1", SMALL_FEASIBLE)], &full).unwrap() {
        for c in t.configurations() {
            for m in c.channel_heads() {
                assert_eq!(e.matching_rules(c, m).len(), 1, "{m}");
                heads += 1;
            }
        }
    }
    let b = Engine::new(bookstore_workflow(), bookstore_registry()).unwrap();
    let reqs = [bookstore_request("a", BOOKSTORE_FEASIBLE), bookstore_request("b", BOOKSTORE_INFEASIBLE)];
    for seed in 0..20 {
        for c in b.run(&reqs, seed).unwrap().configurations() {
            for m in c.channel_heads() {
                assert_eq!(b.matching_rules(c, m).len(), 1, "{m}");
            }
        }
    }
    assert!(heads > 1000);
}

/// One-activity configuration whose instance `c1` is in `state`, with
/// `msg` in flight.
fn config_with(e: &Engine, state: InstanceState, msg: &Message) -> Configuration {
    let req = small_request("c1", SMALL_FEASIBLE);
    let init = e.initial_configuration(std::slice::from_ref(&req)).unwrap();
    let consumed = init.undelivered()[0].clone();
    let change = ActorChange {
        actor: Address::Wsoi("c1".into()),
        before: None,
        after: Some(ActorSnapshot::Wsoi {
            request: req,
            state,
            output_parameters: None,
            activities: vec!["step".into()],
        }),
    };
    init.apply_recorded(&consumed, std::slice::from_ref(msg), &[change]).unwrap()
}

#[test]
fn instance_rules_by_state_and_message() {
    use InstanceState::*;
    let e = small(1);
    let c1 = ClientId::from("c1");
    let wsoi = Address::Wsoi(c1.clone());
    let aa = Address::aa(&c1, "step");
    let grant = |cost| MessageBody::SelectReplyGranted {
        allocation: BTreeMap::from([(
            "step".to_owned(),
            Allocation { candidate_id: "s0-a".into(), qos: QoSSpec::new(50, cost) },
        )]),
    };
    let msgs = [
        ("grant", Message::new(Address::Ss, wsoi.clone(), grant(2))),
        ("overbudget", Message::new(Address::Ss, wsoi.clone(), grant(999))),
        ("deny", Message::new(Address::Ss, wsoi.clone(), MessageBody::SelectReplyDenied)),
        ("ack", Message::new(aa.clone(), wsoi.clone(), MessageBody::InvokeAck)),
        ("notify", Message::new(aa.clone(), wsoi.clone(), MessageBody::Notify { state: ActivityState::Returned })),
    ];
    // The only activity is still preparing, so a notification cannot be
    // the last one.
    let expected: [(InstanceState, [Option<RuleId>; 5]); 5] = [
        (Waiting, [Some(RuleId::R2bSelectGranted), None, Some(RuleId::R2aSelectDenied), None, None]),
        (Granted, [None, None, None, Some(RuleId::R3InvokeAck), None]),
        (Denied, [None, None, None, None, None]),
        (Servicing, [None, None, None, Some(RuleId::R3InvokeAck), Some(RuleId::R4bNotifySomePending)]),
        (Completed, [None, None, None, None, None]),
    ];
    for (state, row) in expected {
        for ((name, m), want) in msgs.iter().zip(row) {
            let cfg = config_with(&e, state, m);
            let got = e.matching_rules(&cfg, m);
            assert_eq!(got, want.into_iter().collect::<Vec<_>>(), "{state:?} x {name}");
        }
    }
}

#[test]
fn creation_yields_a_waiting_instance_and_a_select() {
    let e = small(2);
    let init = Arc::new(e.initial_configuration(&[small_request("c1", SMALL_FEASIBLE)]).unwrap());
    let req = init.undelivered()[0].clone();
    let t = e.step(&init, &req).unwrap();
    assert_eq!(t.label.rule, RuleId::R1WsoimCreate);
    let inst = t.target.get_wsoi(&"c1".into()).unwrap();
    assert_eq!(inst.state, InstanceState::Waiting);
    assert_eq!(inst.activity_names().collect::<Vec<_>>(), ["left", "right"]);
    assert!(inst.activities().all(ActivityActor::is_pristine));
    assert_eq!(t.emitted.len(), 1);
    assert_eq!(t.emitted[0].kind(), MessageKind::Select);
    // The same request cannot be delivered twice.
    assert!(matches!(e.step(&t.target, &req), Err(EngineError::Model(_))));
}

#[test]
fn unmatched_or_undeliverable_messages_are_errors() {
    let e = small(1);
    let init = Arc::new(e.initial_configuration(&[small_request("c1", SMALL_FEASIBLE)]).unwrap());
    let stray = Message::new(Address::Ss, Address::Wsoi("c1".into()), MessageBody::SelectReplyDenied);
    assert!(matches!(e.step(&init, &stray), Err(EngineError::Model(_))));
    let cfg = Arc::new(config_with(&e, InstanceState::Completed, &stray));
    assert!(matches!(e.step(&cfg, &stray), Err(EngineError::NoRuleApplies(_))));
}

#[test]
fn wrong_orchestration_is_refused_up_front() {
    let e = small(1);
    let req = WsoRequest::new(ClientId::from("c1"), "Other", ParamMap::new(), SMALL_FEASIBLE);
    assert!(matches!(e.initial_configuration(&[req]), Err(EngineError::UnknownWso { .. })));
    let dup = [small_request("c1", SMALL_FEASIBLE), small_request("c1", SMALL_FEASIBLE)];
    assert!(e.initial_configuration(&dup).is_err());
}

#[test]
fn granted_run_binds_the_selected_services_and_outputs_every_activity() {
    let e = Engine::new(bookstore_workflow(), bookstore_registry()).unwrap();
    let t = e.run(&[bookstore_request("c1", BOOKSTORE_FEASIBLE)], 7).unwrap();
    let inst = t.last().unwrap().get_wsoi(&"c1".into()).unwrap();
    assert_eq!(inst.state, InstanceState::Completed);
    let chosen = qos_allocate(BOOKSTORE_FEASIBLE, &bookstore_workflow().activities, &bookstore_registry()).unwrap();
    for aa in inst.activities() {
        let (cand, qos) = &chosen.per_activity[&aa.aa_name];
        assert_eq!(aa.ws.endpoint.as_deref(), Some(cand.candidate_id.as_str()));
        assert_eq!(aa.qos, Some(*qos));
        assert_eq!(aa.state, ActivityState::Returned);
    }
    let outs = inst.output_parameters.as_ref().unwrap();
    assert_eq!(outs.len(), 6);
    assert!(outs.keys().all(|k| k.ends_with(".result")));
    // Payment inputs are routed only to the payment activity.
    let pays = inst.get_aa("Get Pays").unwrap().input_parameters.as_ref().unwrap();
    assert_eq!(pays.get("amount").map(String::as_str), Some("120"));
    let ship = inst.get_aa("Ship by Train or Ship by Air").unwrap().input_parameters.as_ref().unwrap();
    assert!(!ship.contains_key("amount") && !ship.contains_key("GetPays.amount"));
    assert!(ship.contains_key("currency"));
}

#[test]
fn workflow_names_must_route_unambiguously() {
    let wf = |names: &[&str]| WorkflowDef::new("W", names.iter().map(|n| ActivityDef::new(*n, "S0")).collect());
    assert!(wf(&["Get Pays", "Ship"]).is_ok());
    assert!(wf(&[]).is_err());
    assert!(wf(&["a", "a"]).is_err());
    assert!(wf(&["Get Pays", "GetPays"]).is_err());
    assert!(wf(&["GetPays", "Get Pays"]).is_err());
    assert!(wf(&["a.b"]).is_err());
    assert!(wf(&["a/b"]).is_err());
    assert!(wf(&["  "]).is_err());
}
