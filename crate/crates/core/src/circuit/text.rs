//! Line-based circuit format.
//!
//! ```text
//! # comment
//! NAME X_Psi
//! QUBITS 2 2              # system wires, ancilla wires
//! H 0
//! CNOT 0 2
//! MZ 2
//! BRANCH 2 -> plus minus  # continuation for outcome 0, then outcome 1
//! PASS ALLZERO 3          # or PASS NOTALLZERO 2 3
//! [plus]
//! U1Q 1 re00 im00 re01 im01 re10 im10 re11 im11
//! ...
//! [minus]
//! ...
//! ```
//!
//! Other gates: `X q`, `S q`, `CCX c1 .. ck t`. `→` may replace `->`.
//! Several circuits can share one file, separated by a line `---`.
//! Floats are written in shortest round-trip form.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::C64;

use super::{Branch, Circuit, Gate, PassRule};

fn write_gate(out: &mut String, g: &Gate) {
    match g {
        Gate::H(q) => writeln!(out, "H {q}"),
        Gate::X(q) => writeln!(out, "X {q}"),
        Gate::S(q) => writeln!(out, "S {q}"),
        Gate::MeasureZ(q) => writeln!(out, "MZ {q}"),
        Gate::Cnot { control, target } => writeln!(out, "CNOT {control} {target}"),
        Gate::Toffoli { controls, target } => {
            let cs: Vec<String> = controls.iter().map(|c| c.to_string()).collect();
            writeln!(out, "CCX {} {target}", cs.join(" "))
        }
        Gate::U1q { qubit, matrix } => {
            let fs: Vec<String> = matrix.iter().flat_map(|z| [format!("{:?}", z.re), format!("{:?}", z.im)]).collect();
            writeln!(out, "U1Q {qubit} {}", fs.join(" "))
        }
    }
    .expect("writing to a String cannot fail");
}

pub fn to_text(c: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "NAME {}", c.label).unwrap();
    writeln!(out, "QUBITS {} {}", c.n_system(), c.n_ancilla()).unwrap();
    for g in c.gates() {
        write_gate(&mut out, g);
    }
    if let Some(b) = c.branch() {
        writeln!(out, "BRANCH {} -> {} {}", b.qubit, b.labels[0], b.labels[1]).unwrap();
    }
    let (kind, qs) = match c.pass_rule() {
        PassRule::AllZero(q) => ("ALLZERO", q),
        PassRule::NotAllZero(q) => ("NOTALLZERO", q),
    };
    let qs: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
    writeln!(out, "PASS {kind} {}", qs.join(" ")).unwrap();
    if let Some(b) = c.branch() {
        for (label, body) in b.labels.iter().zip([&b.on_zero, &b.on_one]) {
            writeln!(out, "[{label}]").unwrap();
            for g in body {
                write_gate(&mut out, g);
            }
        }
    }
    out
}

pub fn to_text_many(circuits: &[Circuit]) -> String {
    circuits.iter().map(to_text).collect::<Vec<_>>().join("---\n")
}

fn qubit(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| Error::parse(line, format!("expected a qubit index, found '{tok}'")))
}

fn parse_gate(words: &[&str], line: usize) -> Result<Gate> {
    let arity = |n: usize| -> Result<()> {
        if words.len() != n + 1 {
            return Err(Error::parse(line, format!("{} takes {n} operand(s), found {}", words[0], words.len() - 1)));
        }
        Ok(())
    };
    let head = words[0].to_ascii_uppercase();
    Ok(match head.as_str() {
        "H" | "X" | "S" | "MZ" => {
            arity(1)?;
            let q = qubit(words[1], line)?;
            match head.as_str() {
                "H" => Gate::H(q),
                "X" => Gate::X(q),
                "S" => Gate::S(q),
                _ => Gate::MeasureZ(q),
            }
        }
        "CNOT" | "CX" => {
            arity(2)?;
            Gate::Cnot { control: qubit(words[1], line)?, target: qubit(words[2], line)? }
        }
        "CCX" | "TOFFOLI" => {
            if words.len() < 3 {
                return Err(Error::parse(line, "CCX needs at least one control and a target"));
            }
            let qs = words[1..].iter().map(|w| qubit(w, line)).collect::<Result<Vec<_>>>()?;
            let (target, controls) = qs.split_last().expect("non-empty");
            Gate::Toffoli { controls: controls.to_vec(), target: *target }
        }
        "U1Q" => {
            arity(9)?;
            let q = qubit(words[1], line)?;
            let f = words[2..]
                .iter()
                .map(|w| w.parse::<f64>().map_err(|_| Error::parse(line, format!("expected a number, found '{w}'"))))
                .collect::<Result<Vec<_>>>()?;
            let m = [C64::new(f[0], f[1]), C64::new(f[2], f[3]), C64::new(f[4], f[5]), C64::new(f[6], f[7])];
            Gate::U1q { qubit: q, matrix: m }
        }
        other => return Err(Error::parse(line, format!("unknown instruction '{other}'"))),
    })
}

/// Parses one circuit. `offset` is added to reported line numbers.
fn parse_one(text: &str, offset: usize) -> Result<Circuit> {
    let mut name = String::from("circuit");
    let mut qubits: Option<(usize, usize, usize)> = None;
    let mut main = Vec::new();
    let mut branch: Option<(usize, [String; 2], usize)> = None;
    let mut pass: Option<PassRule> = None;
    let mut sections: Vec<(String, Vec<Gate>)> = Vec::new();
    let mut last_line = offset;

    for (i, raw) in text.lines().enumerate() {
        let line = offset + i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let label =
                rest.strip_suffix(']').ok_or_else(|| Error::parse(line, "section header must end with ']'"))?.trim();
            if sections.iter().any(|(l, _)| l == label) {
                return Err(Error::parse(line, format!("duplicate section '{label}'")));
            }
            sections.push((label.to_string(), Vec::new()));
            continue;
        }
        let normalized = content.replace('→', " -> ");
        let words: Vec<&str> = normalized.split_whitespace().collect();
        match words[0].to_ascii_uppercase().as_str() {
            "NAME" => {
                name = words[1..].join(" ");
            }
            "QUBITS" => {
                if words.len() != 3 {
                    return Err(Error::parse(line, "QUBITS takes the system and ancilla counts"));
                }
                qubits = Some((qubit(words[1], line)?, qubit(words[2], line)?, line));
            }
            "BRANCH" => {
                if words.len() != 5 || words[2] != "->" {
                    return Err(Error::parse(line, "expected 'BRANCH <qubit> -> <section0> <section1>'"));
                }
                if branch.is_some() {
                    return Err(Error::parse(line, "only one BRANCH is allowed"));
                }
                branch = Some((qubit(words[1], line)?, [words[3].to_string(), words[4].to_string()], line));
            }
            "PASS" => {
                if words.len() < 2 {
                    return Err(Error::parse(line, "PASS needs a rule"));
                }
                let qs = words[2..].iter().map(|w| qubit(w, line)).collect::<Result<Vec<_>>>()?;
                pass = Some(match words[1].to_ascii_uppercase().as_str() {
                    "ALLZERO" => PassRule::AllZero(qs),
                    "NOTALLZERO" => PassRule::NotAllZero(qs),
                    other => return Err(Error::parse(line, format!("unknown pass rule '{other}'"))),
                });
            }
            _ => {
                let g = parse_gate(&words, line)?;
                match sections.last_mut() {
                    Some((_, body)) => body.push(g),
                    None => main.push(g),
                }
            }
        }
    }

    let (ns, na, qline) = qubits.ok_or_else(|| Error::parse(offset + 1, "missing QUBITS line"))?;
    let branch = match branch {
        None => {
            if let Some((label, _)) = sections.first() {
                return Err(Error::parse(last_line, format!("section '{label}' is not referenced by a BRANCH")));
            }
            None
        }
        Some((q, labels, bline)) => {
            let take = |label: &str| {
                sections
                    .iter()
                    .position(|(l, _)| l == label)
                    .map(|i| sections[i].1.clone())
                    .ok_or_else(|| Error::parse(bline, format!("no section named '{label}'")))
            };
            let on_zero = take(&labels[0])?;
            let on_one = take(&labels[1])?;
            Some(Branch { qubit: q, on_zero, on_one, labels })
        }
    };
    let pass = pass.unwrap_or(PassRule::AllZero(vec![]));
    Circuit::new(name, ns, na, main, branch, pass).map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::parse(qline, other.to_string()),
    })
}

pub fn parse(text: &str) -> Result<Circuit> {
    let mut all = parse_many(text)?;
    if all.len() != 1 {
        return Err(Error::parse(1, format!("expected one circuit, found {}", all.len())));
    }
    Ok(all.remove(0))
}

pub fn parse_many(text: &str) -> Result<Vec<Circuit>> {
    let mut out = Vec::new();
    let mut chunk = String::new();
    let mut start = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim() == "---" {
            out.push(parse_one(&chunk, start)?);
            chunk.clear();
            start = i + 1;
        } else {
            chunk.push_str(line);
            chunk.push('\n');
        }
    }
    if !chunk.trim().is_empty() || out.is_empty() {
        out.push(parse_one(&chunk, start)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::compile::{self, TwoQubitVariant};

    #[test]
    fn compiled_circuits_round_trip() {
        let mut all = compile::compile_bell();
        all.extend(compile::compile_ghz());
        all.extend(compile::compile_two_qubit(0.3, TwoQubitVariant::Toffoli).unwrap());
        all.extend(compile::compile_two_qubit(0.3, TwoQubitVariant::CnotPair).unwrap());
        all.push(compile::compile_adaptive(0.3).unwrap());
        let text = to_text_many(&all);
        assert_eq!(parse_many(&text).unwrap(), all);
    }

    #[test]
    fn accepts_arrow_and_comments() {
        let text =
            "QUBITS 1 2\nH 0 # rotate\nCNOT 0 1\nMZ 1\nBRANCH 1 → a b\nPASS ALLZERO 2\n[a]\nMZ 2\n[b]\nX 2\nMZ 2\n";
        let c = parse(text).unwrap();
        assert_eq!(c.branch().unwrap().on_one.len(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("QUBITS 2 1\nH 0\nFOO 1\n", 3),
            ("QUBITS 2 1\nCNOT 0\n", 2),
            ("H 0\n", 1),
            ("QUBITS 2 1\nU1Q 0 1 0 0 0 0 0 1\n", 2),
            ("QUBITS 2 1\nH 0\n---\nQUBITS 1 1\nMZ 0\n", 4),
            ("QUBITS 1 1\nBRANCH 1 -> a b\n[a]\n", 2),
        ];
        for (text, want) in cases {
            match parse_many(text) {
                Err(Error::Parse { position, .. }) => assert_eq!(position, want, "{text:?}"),
                other => panic!("expected a parse error for {text:?}, got {other:?}"),
            }
        }
    }
}
