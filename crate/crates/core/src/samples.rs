//! Fixture processes and configs bundled into the library.

/// The blood-analysis process: six tasks, two of them in parallel, with
/// duration, role duration, cost, location, role and IT-service arguments.
pub const BLOOD_ANALYSIS: &str = include_str!("../fixtures/blood_analysis.xml");
/// Five attributes on one model: location and role lanes, three scalings
/// and three labelled faces.
pub const FIVE_ATTRIBUTE_CONFIG: &str = include_str!("../fixtures/five_attributes.cfg");
/// Roles as swim lanes along Z, nothing else.
pub const ROLE_LANES_CONFIG: &str = include_str!("../fixtures/role_lanes.cfg");
/// A parallel block whose first branch holds an xor, followed by a loop.
pub const ORDER_PROCESS: &str = include_str!("../fixtures/order_process.xml");
/// Start followed directly by end.
pub const EMPTY_PROCESS: &str = include_str!("../fixtures/empty_process.xml");
/// Eight nested blocks around one task.
pub const DEEP_NESTING: &str = include_str!("../fixtures/deep_nesting.xml");

/// Every bundled process as `(file name, xml)`.
pub const PROCESSES: [(&str, &str); 4] = [
    ("blood_analysis.xml", BLOOD_ANALYSIS),
    ("order_process.xml", ORDER_PROCESS),
    ("empty_process.xml", EMPTY_PROCESS),
    ("deep_nesting.xml", DEEP_NESTING),
];
