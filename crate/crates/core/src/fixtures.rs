//! Ready-made workflows, registries and requests: the six-activity book
//! store and two small orchestrations sized for exhaustive exploration.

use crate::engine::WorkflowDef;
use crate::model::{ParamMap, QoSSpec, WsoRequest};
use crate::registry::Registry;
use crate::selection::{ActivityDef, CandidateService};

pub const BOOKSTORE: &str = "BookStore";

/// Activity names of the book store, in workflow order.
pub const BOOKSTORE_ACTIVITIES: [&str; 6] = [
    "Send List of Books",
    "Receive Selected Books",
    "Calculate the Price",
    "Send Price of Books",
    "Get Pays",
    "Ship by Train or Ship by Air",
];

const BOOKSTORE_ONTOLOGIES: [&str; 6] =
    ["BookList", "BookSelection", "PriceCalculation", "PriceNotice", "Payment", "Shipment"];

/// A comfortable budget: the cheapest assignment fits.
pub const BOOKSTORE_FEASIBLE: QoSSpec = QoSSpec::new(250, 40);
/// A tight budget that forces the fast shipper.
pub const BOOKSTORE_TIGHT: QoSSpec = QoSSpec::new(100, 60);
/// No assignment can meet this.
pub const BOOKSTORE_INFEASIBLE: QoSSpec = QoSSpec::new(1, 0);

pub fn bookstore_workflow() -> WorkflowDef {
    let activities =
        BOOKSTORE_ACTIVITIES.iter().zip(BOOKSTORE_ONTOLOGIES).map(|(n, o)| ActivityDef::new(*n, o)).collect();
    WorkflowDef::new(BOOKSTORE, activities).expect("fixture workflow is valid")
}

/// Two candidates per book store ontology: a cheap slow one and a fast
/// expensive one.
pub fn bookstore_registry() -> Registry {
    let rows: [(&str, &str, u64, u64); 12] = [
        ("list-a", "BookList", 40, 3),
        ("list-b", "BookList", 15, 6),
        ("select-a", "BookSelection", 60, 4),
        ("select-b", "BookSelection", 30, 7),
        ("price-a", "PriceCalculation", 25, 2),
        ("price-b", "PriceCalculation", 10, 5),
        ("notice-a", "PriceNotice", 35, 3),
        ("notice-b", "PriceNotice", 20, 4),
        ("pay-a", "Payment", 120, 8),
        ("pay-b", "Payment", 80, 12),
        ("ship-train", "Shipment", 240, 10),
        ("ship-air", "Shipment", 90, 25),
    ];
    registry_from(&rows)
}

pub fn bookstore_request(client: &str, qos: QoSSpec) -> WsoRequest {
    let inputs =
        ParamMap::from([("GetPays.amount".to_owned(), "120".to_owned()), ("currency".to_owned(), "USD".to_owned())]);
    WsoRequest::new(client, BOOKSTORE, inputs, qos)
}

pub const SMALL: &str = "Small";

/// One activity, `step`, on ontology `S0`.
pub fn one_activity_workflow() -> WorkflowDef {
    WorkflowDef::new(SMALL, vec![ActivityDef::new("step", "S0")]).expect("valid")
}

/// Two activities, `left` on `S0` and `right` on `S1`.
pub fn two_activity_workflow() -> WorkflowDef {
    WorkflowDef::new(SMALL, vec![ActivityDef::new("left", "S0"), ActivityDef::new("right", "S1")]).expect("valid")
}

/// Two candidates for each of `S0` and `S1`.
pub fn small_registry() -> Registry {
    registry_from(&[("s0-a", "S0", 50, 2), ("s0-b", "S0", 20, 6), ("s1-a", "S1", 70, 3), ("s1-b", "S1", 30, 5)])
}

pub const SMALL_FEASIBLE: QoSSpec = QoSSpec::new(100, 20);

pub fn small_request(client: &str, qos: QoSSpec) -> WsoRequest {
    WsoRequest::new(client, SMALL, ParamMap::from([("x".to_owned(), client.to_owned())]), qos)
}

fn registry_from(rows: &[(&str, &str, u64, u64)]) -> Registry {
    Registry::from_candidates(rows.iter().map(|(id, ont, rt, cost)| CandidateService {
        candidate_id: (*id).to_owned(),
        ontology: (*ont).to_owned(),
        qos: QoSSpec::new(*rt, *cost),
    }))
    .expect("fixture ids are unique")
}
