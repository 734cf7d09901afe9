//! Scarcity-weighted badge points and the leaderboard.
//!
//!     cargo run -p lingkod-core --example leaderboard

use lingkod_core::gamification::{badge_points, rank_totals, scarcity_weight, LanguageResources};

fn main() {
    for total in [0, 2, 6, 14, 30, 254] {
        let r = LanguageResources { datasets: total / 2, evaluators: total - total / 2 };
        println!("resources {total:>3}: weight {:.3}, points {}", scarcity_weight(r), badge_points(r));
    }
    let board = rank_totals([
        ("ben".to_string(), 100),
        ("ana".to_string(), 150),
        ("carmela".to_string(), 100),
        ("dado".to_string(), 25),
    ]);
    for e in board {
        println!("#{} {:<8} {}", e.rank, e.username, e.total_points);
    }
}
