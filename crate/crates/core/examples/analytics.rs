//! Daily actives, sessions and conversion from the usage log.
//!
//!     cargo run -p lingkod-core --example analytics

use lingkod_core::domain::Role;
use lingkod_core::recruitment::NewProfile;
use lingkod_core::stats::{EventKind, UsageEvent};
use lingkod_core::{Platform, Timestamp};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let day = 1_714_550_400;
    let t = |s: i64| Timestamp::from_unix(day + s);
    let mut p = Platform::with_default_registry();
    let mut users = Vec::new();
    for (i, name) in ["ana", "ben", "carmela", "dado"].iter().enumerate() {
        users.push(p.create_profile(NewProfile::new(name, Role::Annotator, &["ceb"]), t(i as i64))?.user_id);
    }
    let events = [
        (0, EventKind::SessionPing, 600),
        (0, EventKind::JudgmentSubmitted, 1200),
        (1, EventKind::SessionPing, 1800),
        (0, EventKind::SessionPing, 4200),
        (1, EventKind::JudgmentSubmitted, 90_000),
    ];
    for (u, kind, at) in events {
        p.record_event(UsageEvent { user_id: users[u].clone(), kind, at: t(at) })?;
    }
    let report = p.analytics_report(t(0), t(2 * 86_400))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
