//! DIMACS CNF reading and writing, including a streaming writer for
//! formulas too large to hold in memory.

use std::io::{self, Write};

use thiserror::Error;

use crate::cnf::{Clause, ClauseSink, Cnf, Literal};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn at(line: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

/// Parses a DIMACS CNF. Clauses may span lines; a trailing clause without the
/// terminating 0 is rejected.
pub fn parse_dimacs(text: &str) -> Result<Cnf, ParseError> {
    let mut header: Option<(u32, usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut open_since = 0;

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::at(line_no, "duplicate header"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(ParseError::at(line_no, "expected 'p cnf <vars> <clauses>'"));
            }
            let vars = fields[2]
                .parse::<u32>()
                .map_err(|_| ParseError::at(line_no, "bad variable count"))?;
            let count = fields[3]
                .parse::<usize>()
                .map_err(|_| ParseError::at(line_no, "bad clause count"))?;
            header = Some((vars, count, line_no));
            continue;
        }
        let Some((num_vars, _, _)) = header else {
            return Err(ParseError::at(line_no, "clause before header"));
        };
        for token in line.split_whitespace() {
            let value = token
                .parse::<i64>()
                .map_err(|_| ParseError::at(line_no, format!("bad literal '{token}'")))?;
            if value == 0 {
                clauses.push(Clause::new(std::mem::take(&mut current)));
                continue;
            }
            let lit = Literal::from_dimacs(value)
                .ok_or_else(|| ParseError::at(line_no, format!("bad literal '{token}'")))?;
            if lit.var() > num_vars {
                return Err(ParseError::at(
                    line_no,
                    format!("variable {} exceeds declared {num_vars}", lit.var()),
                ));
            }
            if current.is_empty() {
                open_since = line_no;
            }
            current.push(lit);
        }
    }

    let Some((num_vars, count, header_line)) = header else {
        return Err(ParseError::at(
            text.lines().count().max(1),
            "missing header",
        ));
    };
    if !current.is_empty() {
        return Err(ParseError::at(open_since, "clause not terminated by 0"));
    }
    if clauses.len() != count {
        return Err(ParseError::at(
            header_line,
            format!("header declares {count} clauses, found {}", clauses.len()),
        ));
    }
    Ok(Cnf::new(num_vars, clauses).expect("variables were range-checked while parsing"))
}

pub fn emit_dimacs(f: &Cnf) -> String {
    emit_dimacs_with_comments(f, &[])
}

pub fn emit_dimacs_with_comments(f: &Cnf, comments: &[String]) -> String {
    let mut out = Vec::new();
    let mut writer = DimacsWriter::new(&mut out, f.num_vars(), f.len() as u64, comments)
        .expect("writing to memory");
    for c in f.clauses() {
        writer.push(c.clone());
    }
    writer.finish().expect("writing to memory");
    String::from_utf8(out).expect("DIMACS output is ASCII")
}

pub fn write_clause<W: Write>(w: &mut W, c: &Clause) -> io::Result<()> {
    for lit in c.iter() {
        write!(w, "{} ", lit.to_dimacs())?;
    }
    writeln!(w, "0")
}

/// Streaming DIMACS writer. The header is written up front, so the clause
/// count must be known in advance (callers typically run a counting pass).
///
/// I/O errors are latched and reported by [`DimacsWriter::finish`], which also
/// verifies that the announced count was met.
pub struct DimacsWriter<W: Write> {
    out: W,
    declared: u64,
    written: u64,
    error: Option<io::Error>,
}

impl<W: Write> DimacsWriter<W> {
    pub fn new(
        mut out: W,
        num_vars: u32,
        num_clauses: u64,
        comments: &[String],
    ) -> io::Result<Self> {
        for c in comments {
            for line in c.lines() {
                writeln!(out, "c {line}")?;
            }
        }
        writeln!(out, "p cnf {num_vars} {num_clauses}")?;
        Ok(DimacsWriter {
            out,
            declared: num_clauses,
            written: 0,
            error: None,
        })
    }

    pub fn finish(mut self) -> io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        if self.written != self.declared {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!(
                    "header declared {} clauses but {} were written",
                    self.declared, self.written
                ),
            ));
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> ClauseSink for DimacsWriter<W> {
    fn push(&mut self, clause: Clause) {
        if self.error.is_some() {
            return;
        }
        self.written += 1;
        if let Err(e) = write_clause(&mut self.out, &clause) {
            self.error = Some(e);
        }
    }
}
