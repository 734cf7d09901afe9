//! Country statistics behind the world map.
//!
//!     cargo run -p lingkod-core --example country_map

use lingkod_core::domain::Role;
use lingkod_core::recruitment::NewProfile;
use lingkod_core::{Platform, Timestamp};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut p = Platform::with_default_registry();
    let t = Timestamp::from_unix(1_714_550_400);
    p.create_profile(NewProfile::new("ana", Role::Annotator, &["ceb", "fil"]), t)?;
    p.create_profile(NewProfile::new("ben", Role::Annotator, &["ceb"]), t)?;
    p.create_profile(NewProfile::new("amara", Role::Annotator, &["yo"]), t)?;

    for c in p.global_summary() {
        println!("{}  evaluators {:>2}  languages {:>2}  datasets {:>2}", c.country_code, c.evaluators, c.languages, c.datasets);
    }
    let ph = p.country_summary("PH")?;
    println!("\nPH breakdown:");
    for l in ph.breakdown {
        println!("  {:<10} {:<12} evaluators {}", l.code, l.display_name, l.evaluators);
    }
    println!("\n{}", serde_json::to_string_pretty(&p.country_summary("NG")?)?);
    Ok(())
}
