//! Trace-log parsing and presence encoding.
//!
//! A log holds one API invocation per line: `ClassName.methodName`, optionally
//! followed by whitespace-separated fields (timestamps, arguments) that are ignored.

use std::fmt;
use std::io::BufRead;

use super::vocab::ApiVocabulary;
use crate::error::{Error, Result};

/// One intercepted invocation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ApiEvent {
    pub class_name: String,
    pub method_name: String,
}

impl ApiEvent {
    /// Parses a log line. Returns `None` for anything without a non-empty
    /// class and method separated by the last `.` of the first token.
    pub fn parse(line: &str) -> Option<Self> {
        let token = line.split_whitespace().next()?;
        let (class_name, method_name) = token.rsplit_once('.')?;
        if class_name.is_empty() || method_name.is_empty() {
            return None;
        }
        Some(Self {
            class_name: class_name.to_string(),
            method_name: method_name.to_string(),
        })
    }

    pub fn identity(&self) -> String {
        format!("{}.{}", self.class_name, self.method_name)
    }
}

impl fmt::Display for ApiEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.class_name, self.method_name)
    }
}

/// Binary presence vector over a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureVector {
    bits: Vec<u8>,
}

impl FeatureVector {
    pub fn zeros(d: usize) -> Self {
        Self { bits: vec![0; d] }
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Format(format!("feature bit {b} is not 0/1")));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| f64::from(b)).collect()
    }
}

/// Line accounting for one parsed log.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub parsed: usize,
    pub malformed: usize,
    /// Parsed records whose identity is not in the vocabulary.
    pub unknown: usize,
}

/// Encodes one trace as a presence vector. Multiplicity and order are discarded.
///
/// Blank lines are ignored; other unparseable lines are counted as malformed.
/// Fails only when no line parses.
pub fn parse_log<R: BufRead>(
    reader: R,
    vocabulary: &ApiVocabulary,
) -> Result<(FeatureVector, ParseStats)> {
    let mut vector = FeatureVector::zeros(vocabulary.len());
    let mut stats = ParseStats::default();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match ApiEvent::parse(&line) {
            Some(event) => {
                stats.parsed += 1;
                match vocabulary.position(&event.identity()) {
                    Some(i) => vector.bits[i] = 1,
                    None => stats.unknown += 1,
                }
            }
            None => stats.malformed += 1,
        }
    }
    if stats.parsed == 0 {
        return Err(Error::EmptyLog {
            malformed: stats.malformed,
        });
    }
    Ok((vector, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> ApiVocabulary {
        ApiVocabulary::new([
            "android.telephony.TelephonyManager.getDeviceId",
            "java.net.URL.openConnection",
        ])
        .unwrap()
    }

    #[test]
    fn event_parse_splits_on_last_dot_and_drops_suffix() {
        let e = ApiEvent::parse("java.net.URL.openConnection 1697040000 url=http://x").unwrap();
        assert_eq!(e.class_name, "java.net.URL");
        assert_eq!(e.method_name, "openConnection");
        assert_eq!(e.identity(), "java.net.URL.openConnection");
        assert!(ApiEvent::parse("noDotHere").is_none());
        assert!(ApiEvent::parse(".method").is_none());
        assert!(ApiEvent::parse("Class.").is_none());
    }

    #[test]
    fn multiplicity_is_discarded() {
        let log = "android.telephony.TelephonyManager.getDeviceId\n\
                   android.telephony.TelephonyManager.getDeviceId\n";
        let (v, stats) = parse_log(log.as_bytes(), &vocab()).unwrap();
        assert_eq!(v.bits(), &[1, 0]);
        assert_eq!(stats.parsed, 2);
    }

    #[test]
    fn both_apis_in_any_order() {
        let a = "java.net.URL.openConnection\nandroid.telephony.TelephonyManager.getDeviceId 12\n";
        let b = "android.telephony.TelephonyManager.getDeviceId\njava.net.URL.openConnection\n";
        assert_eq!(parse_log(a.as_bytes(), &vocab()).unwrap().0.bits(), &[1, 1]);
        assert_eq!(parse_log(b.as_bytes(), &vocab()).unwrap().0.bits(), &[1, 1]);
    }

    #[test]
    fn empty_log_is_an_error() {
        assert!(matches!(
            parse_log("".as_bytes(), &vocab()),
            Err(Error::EmptyLog { malformed: 0 })
        ));
        assert!(matches!(
            parse_log("garbage\n???\n".as_bytes(), &vocab()),
            Err(Error::EmptyLog { malformed: 2 })
        ));
    }

    #[test]
    fn malformed_and_unknown_lines_counted() {
        let log = "garbage\nfoo.Bar.baz\njava.net.URL.openConnection\n\n";
        let (v, stats) = parse_log(log.as_bytes(), &vocab()).unwrap();
        assert_eq!(v.bits(), &[0, 1]);
        assert_eq!(
            stats,
            ParseStats {
                parsed: 2,
                malformed: 1,
                unknown: 1
            }
        );
    }
}
