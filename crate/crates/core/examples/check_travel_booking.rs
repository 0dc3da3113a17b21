//! Checks every property declared in the hotel-booking specification.

use abc_core::explorer::{check_property, explore, render_trace, Limits, Outcome};
use abc_core::parser::{parse_spec, property_to_string};
use abc_core::Program;

fn main() {
    let program = Program::new(parse_spec(include_str!("../fixtures/travel_booking.abc")).unwrap());
    let lts = explore(&program, Limits::default()).unwrap();
    for decl in &program.spec.properties {
        let v = check_property(&program, &lts, decl);
        println!(
            "{:<8} {:<22} {}",
            format!("{:?}", v.outcome),
            decl.name,
            property_to_string(&decl.property)
        );
        if v.outcome == Outcome::Holds && !v.path.is_empty() {
            println!("         witness of {} steps", v.path.len());
        }
        if v.outcome == Outcome::Fails {
            print!("{}", render_trace(&program, &lts, &v));
        }
    }
}
