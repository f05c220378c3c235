//! Sweep records and their three output formats.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Undecided,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Undecided => "undecided",
        })
    }
}

/// One checked instance: the predicted value next to the independently computed one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub check: String,
    pub instance: String,
    pub predicted: String,
    pub oracle: String,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Human,
    JsonLines,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "human" => Ok(Format::Human),
            "json-lines" => Ok(Format::JsonLines),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format {s:?} (expected human, json-lines or csv)")),
        }
    }
}

/// Verdict counts for one check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub check: String,
    pub pass: usize,
    pub fail: usize,
    pub undecided: usize,
}

impl Summary {
    pub fn of(check: &str, records: &[Record]) -> Summary {
        let mut s = Summary { check: check.to_string(), ..Summary::default() };
        for r in records.iter().filter(|r| r.check == check) {
            match r.verdict {
                Verdict::Pass => s.pass += 1,
                Verdict::Fail => s.fail += 1,
                Verdict::Undecided => s.undecided += 1,
            }
        }
        s
    }

    pub fn total(&self) -> usize {
        self.pass + self.fail + self.undecided
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}/{} pass, {} failures, {} undecided",
            self.check,
            self.pass,
            self.total(),
            self.fail,
            self.undecided
        )
    }
}

pub const CSV_HEADER: &str = "check,instance,predicted,oracle,verdict";

/// Writes records in `format`. Human output lists only the records that did
/// not pass; summaries are the caller's business.
pub fn write_records(out: &mut impl Write, records: &[Record], format: Format) -> io::Result<()> {
    match format {
        Format::Human => {
            for r in records.iter().filter(|r| r.verdict != Verdict::Pass) {
                writeln!(out, "{} {} {}: predicted {}, oracle {}", r.verdict, r.check, r.instance, r.predicted, r.oracle)?;
            }
        }
        Format::JsonLines => {
            for r in records {
                serde_json::to_writer(&mut *out, r)?;
                out.write_all(b"\n")?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            if records.is_empty() {
                w.write_record(CSV_HEADER.split(','))?;
            }
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn parse_json_lines(text: &str) -> serde_json::Result<Vec<Record>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Record> {
        vec![
            Record {
                check: "scholz".into(),
                instance: "p=5 q=29".into(),
                predicted: "+1".into(),
                oracle: "+1".into(),
                verdict: Verdict::Pass,
            },
            Record {
                check: "candp".into(),
                instance: "m=5 n=3".into(),
                predicted: "even".into(),
                oracle: "d=6, \"D∩P\"={2,3}".into(),
                verdict: Verdict::Undecided,
            },
        ]
    }

    #[test]
    fn json_lines_round_trip() {
        let mut buf = Vec::new();
        write_records(&mut buf, &sample(), Format::JsonLines).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("{\"check\":\"scholz\",\"instance\":\"p=5 q=29\""));
        assert_eq!(parse_json_lines(&text).unwrap(), sample());
    }

    #[test]
    fn csv_quotes_fields() {
        let mut buf = Vec::new();
        write_records(&mut buf, &sample(), Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "scholz,p=5 q=29,+1,+1,pass");
        assert_eq!(lines[2], "candp,m=5 n=3,even,\"d=6, \"\"D∩P\"\"={2,3}\",undecided");
    }

    #[test]
    fn summary_counts() {
        let s = Summary::of("scholz", &sample());
        assert_eq!(s.to_string(), "scholz: 1/1 pass, 0 failures, 0 undecided");
    }
}
