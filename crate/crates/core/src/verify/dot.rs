//! Graphviz renderings of a synthesized system.

use std::fmt::Write;

use super::SynthesizedSystem;

/// Quotes an identifier for DOT.
fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Undirected hardware pseudograph: selected devices and connections, with
/// loopbacks drawn dashed.
pub fn hardware_dot(system: &SynthesizedSystem) -> String {
    let mut out = String::from("graph hardware {\n  node [shape=box];\n");
    for d in &system.hardware.devices {
        let _ = writeln!(out, "  {};", quote(d));
    }
    for c in &system.hardware.connections {
        let style = if c.is_loop { ", style=dashed" } else { "" };
        let _ = writeln!(out, "  {} -- {} [label={}{style}];", quote(&c.a), quote(&c.b), quote(&c.transport));
    }
    out.push_str("}\n");
    out
}

/// Directed software multigraph: active tasks grouped by host device, one
/// edge per active link labelled with its ports and message type.
pub fn software_dot(system: &SynthesizedSystem) -> String {
    let mut out = String::from("digraph software {\n  node [shape=ellipse];\n");
    for (i, device) in system.hardware.devices.iter().enumerate() {
        let hosted: Vec<&String> = system
            .software
            .tasks
            .iter()
            .filter(|t| system.assignment.get(*t) == Some(device))
            .collect();
        if hosted.is_empty() {
            continue;
        }
        let _ = writeln!(out, "  subgraph cluster_{i} {{\n    label={};", quote(device));
        for t in hosted {
            let _ = writeln!(out, "    {};", quote(t));
        }
        out.push_str("  }\n");
    }
    for l in &system.software.links {
        let label = format!("{}->{} ({})", l.src_port, l.dst_port, l.msg_type);
        let _ = writeln!(out, "  {} -> {} [label={}];", quote(&l.src_task), quote(&l.dst_task), quote(&label));
    }
    out.push_str("}\n");
    out
}
