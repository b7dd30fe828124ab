use crate::arch::{bus_spec, Bus, Dest, PortError, Source};

use super::{InstructionWord, Program, ProgramError, Sections};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Setup,
    Prologue,
    Kernel,
    Epilogue,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ProgramError {
    ProgramError::Syntax { line, col, msg: msg.into() }
}

/// Byte column (1-based) of `part` inside `line`; `part` must be a subslice.
fn col_of(line: &str, part: &str) -> usize {
    part.as_ptr() as usize - line.as_ptr() as usize + 1
}

fn parse_move(word: &mut InstructionWord, lineno: usize, line: &str, text: &str) -> Result<(), ProgramError> {
    let trimmed = text.trim();
    let col = col_of(line, trimmed);
    let (bus_txt, rest) = trimmed
        .split_once(':')
        .ok_or_else(|| syntax(lineno, col, "expected `bus: src -> dst`"))?;
    let bus: Bus = bus_txt
        .trim()
        .parse()
        .map_err(|_| syntax(lineno, col, format!("unknown bus `{}`", bus_txt.trim())))?;
    let (src_txt, dst_txt) = rest
        .split_once("->")
        .ok_or_else(|| syntax(lineno, col_of(line, rest), "expected `->`"))?;
    let (src_txt, dst_txt) = (src_txt.trim(), dst_txt.trim());
    let port_err = |e: PortError, part: &str| -> ProgramError {
        match e {
            PortError::UnknownUnit(_) | PortError::UnknownPort(_) => ProgramError::Connectivity {
                line: lineno,
                bus: bus.to_string(),
                src: src_txt.to_string(),
                dst: dst_txt.to_string(),
            },
            PortError::Malformed(_) => syntax(lineno, col_of(line, part), e.to_string()),
        }
    };
    let src: Source = src_txt.parse().map_err(|e| port_err(e, src_txt))?;
    let dst: Dest = dst_txt.parse().map_err(|e| port_err(e, dst_txt))?;
    let spec = bus_spec(bus);
    if spec.find(src, dst).is_none() {
        return Err(ProgramError::Connectivity {
            line: lineno,
            bus: bus.to_string(),
            src: src_txt.to_string(),
            dst: dst_txt.to_string(),
        });
    }
    if let Source::Imm(v) = src {
        if !spec.imm_range().contains(&v) {
            return Err(syntax(
                lineno,
                col_of(line, src_txt),
                format!("immediate {v} outside {:?} on bus {bus}", spec.imm_range()),
            ));
        }
    }
    if word.slot(bus).is_some() {
        return Err(syntax(lineno, col, format!("bus {bus} used twice in one instruction")));
    }
    word.set(bus, src, dst)
}

/// Assemble move-program text.
///
/// One instruction per line, moves separated by `|`, `nop` for an empty
/// word, `;` to end-of-line is a comment. The directives `.setup`,
/// `.prologue`, `.kernel` and `.epilogue` delimit program phases and
/// `.iterations <n>` sets the kernel repeat count.
pub fn assemble(text: &str) -> Result<Program, ProgramError> {
    let mut words = Vec::new();
    let mut counts = [0usize; 4];
    let mut section = Section::Setup;
    let mut iterations = 0u32;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let body = raw.split(';').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(dir) = trimmed.strip_prefix('.') {
            let mut parts = dir.split_whitespace();
            let name = parts.next().unwrap_or("");
            let next = match name {
                "setup" => Some(Section::Setup),
                "prologue" => Some(Section::Prologue),
                "kernel" => Some(Section::Kernel),
                "epilogue" => Some(Section::Epilogue),
                "iterations" => {
                    let arg = parts.next().ok_or_else(|| syntax(lineno, col_of(raw, trimmed), "missing count"))?;
                    iterations = arg
                        .parse()
                        .map_err(|_| syntax(lineno, col_of(raw, arg), format!("bad count `{arg}`")))?;
                    None
                }
                _ => return Err(syntax(lineno, col_of(raw, trimmed), format!("unknown directive `.{name}`"))),
            };
            if let Some(next) = next {
                if next < section {
                    return Err(syntax(lineno, col_of(raw, trimmed), "sections out of order"));
                }
                section = next;
            }
            continue;
        }
        let mut word = InstructionWord::nop();
        if !trimmed.eq_ignore_ascii_case("nop") {
            for part in body.split('|') {
                parse_move(&mut word, lineno, raw, part)?;
            }
        }
        words.push(word);
        counts[section as usize] += 1;
    }
    let sections = Sections { setup: counts[0], prologue: counts[1], kernel: counts[2], epilogue: counts[3] };
    if sections.kernel > 1 {
        return Err(ProgramError::Schedule(format!(
            "kernel has {} words, the loop buffer holds one",
            sections.kernel
        )));
    }
    Ok(Program { words, sections, kernel_iterations: iterations })
}

/// Text form that [`assemble`] reads back to the same program.
pub fn disassemble(program: &Program) -> String {
    let s = program.sections;
    let mut out = String::new();
    if program.kernel_iterations != 0 {
        out.push_str(&format!(".iterations {}\n", program.kernel_iterations));
    }
    let marks = [
        (0, ".setup"),
        (s.setup, ".prologue"),
        (s.setup + s.prologue, ".kernel"),
        (s.setup + s.prologue + s.kernel, ".epilogue"),
    ];
    let structured = s.total() == program.len() && s.setup != program.len();
    for (i, w) in program.words.iter().enumerate() {
        if structured {
            for &(at, name) in &marks {
                if at == i {
                    out.push_str(name);
                    out.push('\n');
                }
            }
        }
        out.push_str(&w.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_assemble() {
        let p = assemble("B0: AG.r -> LSU0.t\nb: TFG.rx2 -> CADD.rx2\n").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.words[0].occupancy(), 1);
    }

    #[test]
    fn unknown_socket_is_connectivity_error() {
        let e = assemble("B9: CADD.r -> NOSUCH.t").unwrap_err();
        assert!(matches!(e, ProgramError::Connectivity { ref bus, .. } if bus == "B9"), "{e}");
        let e = assemble("nop\nB7: AG.r -> CADD.t").unwrap_err();
        assert!(matches!(e, ProgramError::Connectivity { line: 2, .. }), "{e}");
    }

    #[test]
    fn syntax_errors_have_positions() {
        match assemble("nop\n  B0 AG.r -> LSU0.t").unwrap_err() {
            ProgramError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 3)),
            e => panic!("{e}"),
        }
        match assemble("B0: #99 -> LSU0.t").unwrap_err() {
            ProgramError::Syntax { line: 1, col: 5, .. } => {}
            e => panic!("{e}"),
        }
        assert!(matches!(assemble(".bogus"), Err(ProgramError::Syntax { .. })));
        assert!(matches!(
            assemble("B0: AG.r -> LSU0.t | B0: #1 -> ADD.o"),
            Err(ProgramError::Syntax { .. })
        ));
    }

    #[test]
    fn comments_nops_and_sections() {
        let text = "; header\n.iterations 7\n.setup\nnop ; idle\n.kernel\nB7: CMUL.r -> CADD.t\n.epilogue\nnop\n";
        let p = assemble(text).unwrap();
        assert_eq!(p.kernel_iterations, 7);
        assert_eq!(p.sections, Sections { setup: 1, prologue: 0, kernel: 1, epilogue: 1 });
        assert_eq!(assemble(&disassemble(&p)).unwrap(), p);
    }
}
