//! Parses a small specification, reports diagnostics for a broken one,
//! and prints the canonical rendering.
//!
//! ```text
//! cargo run --example parse_and_print
//! ```

use abc_core::parser::{parse_spec, pretty_print};

const GOOD: &str = r#"
proc Counter = <n < 3> ("tick", this.n)@(role = "listener").[n := n + 1] Counter

component Clock {
  attrs { n = 0; role = "clock"; }
  interface { role }
  run Counter
}

component Log {
  attrs { role = "listener"; last = -1; }
  interface { role }
  run Listen
}

proc Listen = (x = "tick")(x, v).[last := v] Listen
"#;

const BAD: &str = "proc A = B\ncomponent C { attrs { } interface { ghost } run A }";

fn main() {
    let spec = parse_spec(GOOD).expect("the example parses");
    print!("{}", pretty_print(&spec));

    println!("\n-- diagnostics for a broken spec --");
    for d in parse_spec(BAD).unwrap_err() {
        println!("{}", d.render("broken.abc", false));
    }
}
