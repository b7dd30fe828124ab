//! Binary program image: a 16-byte header followed by one little-endian
//! u64 per instruction word (51 significant bits, right-aligned).
//!
//! Header: magic `TTAF`, format version, word count, kernel iterations,
//! each a little-endian u32 after the magic. Section boundaries are not
//! stored; a loaded program is flat.

use std::io::{Read, Write};

use super::{InstructionWord, Program, ProgramError};

pub const BINARY_MAGIC: [u8; 4] = *b"TTAF";
pub const BINARY_VERSION: u32 = 1;

pub fn write_binary<W: Write>(program: &Program, mut out: W) -> Result<(), ProgramError> {
    let io = |e: std::io::Error| ProgramError::BadBinary(e.to_string());
    let words = program.encode()?;
    let mut buf = Vec::with_capacity(16 + 8 * words.len());
    buf.extend_from_slice(&BINARY_MAGIC);
    buf.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    buf.extend_from_slice(&(words.len() as u32).to_le_bytes());
    buf.extend_from_slice(&program.kernel_iterations.to_le_bytes());
    for w in words {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    out.write_all(&buf).map_err(io)
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Program, ProgramError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(|e| ProgramError::BadBinary(e.to_string()))?;
    if bytes.len() < 16 {
        return Err(ProgramError::BadBinary("truncated header".into()));
    }
    if bytes[..4] != BINARY_MAGIC {
        return Err(ProgramError::BadBinary("bad magic".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != BINARY_VERSION {
        return Err(ProgramError::BadBinary(format!("unsupported version {version}")));
    }
    let count = u32_at(8) as usize;
    let iterations = u32_at(12);
    let body = &bytes[16..];
    if body.len() != count * 8 {
        return Err(ProgramError::BadBinary(format!(
            "header declares {count} words but body holds {} bytes",
            body.len()
        )));
    }
    let words = body
        .chunks_exact(8)
        .map(|c| InstructionWord::decode(u64::from_le_bytes(c.try_into().unwrap())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut program = Program::flat(words);
    program.kernel_iterations = iterations;
    Ok(program)
}
