//! On-disk formats.
//!
//! Election files (`.app`): optional `#` comment lines, a header `m n`, then
//! exactly `n` ballot lines of ascending space-separated 0-based candidate
//! indices. An empty line is an empty ballot.
//!
//! Instance files: a JSON document with fields `k`, `ell`, `committee`,
//! `before` and `after`, the last two holding `m` and `ballots`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::election::{Ballot, Committee, Election};
use crate::error::{Error, Result};
use crate::instance::RceInstance;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_election(text: &str) -> Result<Election> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (header_line, header) = loop {
        match lines.next() {
            Some((_, l)) if l.trim_start().starts_with('#') => continue,
            Some(found) => break found,
            None => return Err(parse_err(1, "missing header `m n`")),
        }
    };
    let mut fields = header.split_whitespace();
    let mut header_field = |name: &str| -> Result<usize> {
        fields
            .next()
            .ok_or_else(|| parse_err(header_line, format!("header lacks {name}")))?
            .parse()
            .map_err(|_| parse_err(header_line, format!("non-numeric {name}")))
    };
    let m = header_field("m")?;
    let n = header_field("n")?;
    if fields.next().is_some() {
        return Err(parse_err(header_line, "header has more than two fields"));
    }

    let mut ballots = Vec::with_capacity(n);
    let mut last_line = header_line;
    for (line_no, line) in lines {
        last_line = line_no;
        if line.trim_start().starts_with('#') {
            continue;
        }
        if ballots.len() == n {
            return Err(parse_err(line_no, format!("more than {n} ballot lines")));
        }
        let mut ids = Vec::new();
        for token in line.split_whitespace() {
            let c: usize = token
                .parse()
                .map_err(|_| parse_err(line_no, format!("non-numeric token `{token}`")))?;
            if c >= m {
                return Err(parse_err(
                    line_no,
                    format!("candidate {c} out of range for m = {m}"),
                ));
            }
            ids.push(c);
        }
        let ballot = Ballot::new(ids)
            .map_err(|_| parse_err(line_no, "duplicate candidate index in ballot"))?;
        ballots.push(ballot);
    }
    if ballots.len() != n {
        return Err(parse_err(
            last_line,
            format!("expected {n} ballots, found {}", ballots.len()),
        ));
    }
    let allow_empty = ballots.iter().any(Ballot::is_empty);
    let election = if allow_empty {
        Election::with_empty_ballots(m, ballots)
    } else {
        Election::new(m, ballots)
    };
    election.map_err(|e| parse_err(header_line, e.to_string()))
}

/// Canonical text form: header and one ballot per line, no comments.
pub fn format_election(e: &Election) -> String {
    let mut out = String::with_capacity(e.total_approvals() * 4 + 16);
    let _ = writeln!(out, "{} {}", e.num_candidates(), e.num_voters());
    for b in e.ballots() {
        for (j, c) in b.approved().iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{c}");
        }
        out.push('\n');
    }
    out
}

pub fn read_election(path: impl AsRef<Path>) -> Result<Election> {
    parse_election(&std::fs::read_to_string(path)?)
}

pub fn write_election(path: impl AsRef<Path>, e: &Election) -> Result<()> {
    std::fs::write(path, format_election(e))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ElectionDoc {
    m: usize,
    ballots: Vec<Vec<usize>>,
}

impl ElectionDoc {
    fn from_election(e: &Election) -> Self {
        ElectionDoc {
            m: e.num_candidates(),
            ballots: e
                .ballots()
                .iter()
                .map(|b| b.approved().iter().map(|c| c.index()).collect())
                .collect(),
        }
    }

    fn into_election(self) -> Result<Election> {
        Election::from_lists(self.m, &self.ballots)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    k: usize,
    ell: usize,
    committee: Vec<usize>,
    before: ElectionDoc,
    after: ElectionDoc,
}

pub fn parse_instance(text: &str) -> Result<RceInstance> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    let committee = Committee::from_indices(&doc.committee)?;
    if committee.len() != doc.k {
        return Err(crate::error::precondition(format!(
            "k = {} but the committee has {} members",
            doc.k,
            committee.len()
        )));
    }
    RceInstance::new(
        doc.before.into_election()?,
        doc.after.into_election()?,
        committee,
        doc.ell,
    )
}

pub fn format_instance(inst: &RceInstance) -> String {
    let doc = InstanceDoc {
        k: inst.k,
        ell: inst.ell,
        committee: inst.committee.indices(),
        before: ElectionDoc::from_election(&inst.before),
        after: ElectionDoc::from_election(&inst.after),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("instance serializes");
    out.push('\n');
    out
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<RceInstance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn write_instance(path: impl AsRef<Path>, inst: &RceInstance) -> Result<()> {
    std::fs::write(path, format_instance(inst))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::CandidateId;
    use proptest::prelude::*;

    #[test]
    fn parses_basic_file() {
        let e = parse_election("# sample\n3 2\n0 1\n1\n").unwrap();
        assert_eq!(e.num_candidates(), 3);
        assert_eq!(e.num_voters(), 2);
        assert_eq!(e.ballot(0).approved(), &[CandidateId(0), CandidateId(1)]);
        assert_eq!(e.ballot(1).approved(), &[CandidateId(1)]);
        assert!(!e.allows_empty());
    }

    #[test]
    fn empty_lines_are_empty_ballots() {
        let e = parse_election("2 3\n0\n\n1\n").unwrap();
        assert!(e.allows_empty());
        assert!(e.ballot(1).is_empty());
        assert_eq!(format_election(&e), "2 3\n0\n\n1\n");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_election("3 1\n1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_election("3 2\n0\n1 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_election("#c\n3 1\n3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(parse_election("3 2\n0\n").is_err());
        assert!(parse_election("3 1\n0\n1\n").is_err());
        assert!(parse_election("three 1\n0\n").is_err());
        assert!(parse_election("").is_err());
    }

    #[test]
    fn canonical_file_roundtrip() {
        let text = "4 3\n0 1 3\n2\n1 2\n";
        assert_eq!(format_election(&parse_election(text).unwrap()), text);
    }

    #[test]
    fn instance_roundtrip() {
        let before = Election::from_lists(3, &[vec![0, 1], vec![2]]).unwrap();
        let after = Election::from_lists(3, &[vec![0], vec![2]]).unwrap();
        let inst = RceInstance::new(before, after, Committee::from_indices(&[0, 2]).unwrap(), 1)
            .unwrap();
        let text = format_instance(&inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(format_instance(&back), text);
    }

    #[test]
    fn instance_rejects_bad_documents() {
        let bad_k = r#"{"k":3,"ell":0,"committee":[0,1],"before":{"m":2,"ballots":[[0]]},"after":{"m":2,"ballots":[[1]]}}"#;
        assert!(parse_instance(bad_k).is_err());
        let bad_m = r#"{"k":1,"ell":0,"committee":[0],"before":{"m":2,"ballots":[[0]]},"after":{"m":3,"ballots":[[1]]}}"#;
        assert!(parse_instance(bad_m).is_err());
        let bad_ell = r#"{"k":1,"ell":2,"committee":[0],"before":{"m":2,"ballots":[[0]]},"after":{"m":2,"ballots":[[1]]}}"#;
        assert!(parse_instance(bad_ell).is_err());
    }

    proptest! {
        #[test]
        fn election_roundtrip(m in 1usize..12, ballots in prop::collection::vec(prop::collection::btree_set(0usize..12, 0..6), 1..10)) {
            let ballots: Vec<Vec<usize>> = ballots
                .into_iter()
                .map(|b| b.into_iter().filter(|&c| c < m).collect())
                .collect();
            let e = Election::from_lists(m, &ballots).unwrap();
            let text = format_election(&e);
            let back = parse_election(&text).unwrap();
            prop_assert_eq!(&back, &e);
            prop_assert_eq!(format_election(&back), text);
        }
    }
}
