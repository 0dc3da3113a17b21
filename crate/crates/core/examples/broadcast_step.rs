//! One broadcast in detail: who receives, who discards, and what each
//! receiver's state becomes.

use abc_core::parser::parse_spec;
use abc_core::semantics::{in_step, out_steps};
use abc_core::{system_steps, Program};

const SRC: &str = r#"
component Broker {
  attrs { id = "br1"; }
  interface { id }
  run ("acms", "c1", 5)@(type = "Hotel" && locality = "rome").0
}
component Rome {
  attrs { type = "Hotel"; locality = "rome"; }
  interface { type, locality }
  run (x = "acms")(x, c, d).[lastDay := d] 0 + (tt)(x, c, d).0
}
component Paris {
  attrs { type = "Hotel"; locality = "paris"; }
  interface { type, locality }
  run (x = "acms")(x, c, d).0
}
"#;

fn main() {
    let program = Program::new(parse_spec(SRC).unwrap());
    let state = program.initial_state().unwrap();

    let out = &out_steps(&program, &state, 0).unwrap()[0];
    let msg: Vec<String> = out.message.iter().map(ToString::to_string).collect();
    println!("Broker offers ({}) to ({})", msg.join(", "), out.predicate);
    for j in 1..state.len() {
        let r = in_step(&program, &state, j, &out.exposed, &out.predicate, &out.message).unwrap();
        let verdict = if r.is_receive() { "receives" } else { "discards" };
        println!("  {} {verdict}", program.components[j].name);
    }

    // Rome can consume the message with either input: two system steps.
    for (k, step) in system_steps(&program, &state).unwrap().iter().enumerate() {
        let rome = step.state.component(1);
        println!(
            "step {k}: receivers {:?}, Rome now runs `{}`",
            step.event.receivers, rome.proc
        );
        for (key, v) in rome.env.iter() {
            println!("    {key} = {v}");
        }
    }
}
