//! Builds the full state space of the hotel-booking system with several
//! worker threads and shows the start of the exported LTS.

use std::time::Instant;

use abc_core::explorer::{explore, Limits};
use abc_core::parser::parse_spec;
use abc_core::Program;

fn main() {
    let program = Program::new(parse_spec(include_str!("../fixtures/travel_booking.abc")).unwrap());
    for workers in [1, 4] {
        let start = Instant::now();
        let lts = explore(
            &program,
            Limits {
                workers,
                ..Limits::default()
            },
        )
        .unwrap();
        println!(
            "workers={workers}: {} states, {} transitions in {:.2?}",
            lts.states.len(),
            lts.transitions.len(),
            start.elapsed()
        );
    }

    let lts = explore(&program, Limits::default()).unwrap();
    let deadlocks = lts.successors().iter().filter(|s| s.is_empty()).count();
    println!("terminal states: {deadlocks}");
    for line in lts.export(&program).lines().filter(|l| l.starts_with("TRANS")).take(8) {
        println!("{line}");
    }

    // A tight budget truncates the exploration instead of failing.
    let small = explore(
        &program,
        Limits {
            max_states: 25,
            ..Limits::default()
        },
    )
    .unwrap();
    println!(
        "with max_states=25: {} states, truncated={}",
        small.states.len(),
        small.truncated
    );
}
