//! Seeded simulation of the hotel-booking system, printed as text and as
//! JSON lines, then replayed against the semantics.

use abc_core::parser::parse_spec;
use abc_core::sim::{replay, simulate, trace_to_json, trace_to_text};
use abc_core::Program;

fn main() {
    let src = include_str!("../fixtures/travel_booking.abc");
    let program = Program::new(parse_spec(src).unwrap());
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);

    let trace = simulate(&program, seed, 200).unwrap();
    print!("{}", trace_to_text(&program, &trace));

    let json = trace_to_json(&program, &trace);
    println!("\nfirst JSON lines:");
    for line in json.lines().take(3) {
        println!("{line}");
    }

    let states = replay(&program, &trace).expect("every step is a real transition");
    println!("\nreplayed {} states", states.len());
}
