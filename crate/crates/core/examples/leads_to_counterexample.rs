//! A leads-to property that fails, with the counterexample the checker
//! produces. The server may answer a request or ignore it forever by
//! looping on keep-alive messages, so "request leads to reply" is false.

use abc_core::explorer::{check_property, explore, render_trace, Limits};
use abc_core::parser::parse_spec;
use abc_core::Program;

const SRC: &str = r#"
proc Serve = (x = "req")(x).Busy
proc Busy = ("reply")@(tt).Serve + ("alive")@(tt).Busy

component Client {
  attrs { }
  interface { }
  run ("req")@(tt).Wait
}
proc Wait = (x = "reply")(x).0 + (x = "alive")(x).Wait

component Server {
  attrs { }
  interface { }
  run Serve
}

property answered = sent(Client, "req") leadsto received(Client, "reply")
property reachable_reply = reachable received(Client, "reply")
"#;

fn main() {
    let program = Program::new(parse_spec(SRC).unwrap());
    let lts = explore(&program, Limits::default()).unwrap();
    for decl in &program.spec.properties {
        let v = check_property(&program, &lts, decl);
        println!("{}: {:?}", decl.name, v.outcome);
        print!("{}", render_trace(&program, &lts, &v));
    }
}
