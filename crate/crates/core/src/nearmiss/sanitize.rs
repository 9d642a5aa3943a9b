use serde::Serialize;

/// One record of an external pair file: `pid1,bid1,pid2,bid2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ExternalPair {
    pub project_a: u64,
    pub block_a: u64,
    pub project_b: u64,
    pub block_b: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SanitizeReport {
    /// Surviving records in first-seen order.
    pub pairs: Vec<ExternalPair>,
    /// Bytes that were not a digit, a comma or a line feed.
    pub bytes_removed: usize,
    pub duplicates_dropped: usize,
    /// Lines that did not hold exactly four integers.
    pub malformed_dropped: usize,
    pub blank_lines: usize,
    /// Malformed lines after byte cleaning, for inspection.
    pub malformed_lines: Vec<String>,
}

/// Cleans a clone-pair file: strips every byte that is not a digit, `,` or
/// line feed; drops repeated lines keeping the first; drops lines that are
/// not exactly four comma-separated integers.
pub fn sanitize_pair_file(content: &[u8]) -> SanitizeReport {
    let mut report = SanitizeReport::default();
    let cleaned: Vec<u8> = content
        .iter()
        .copied()
        .filter(|b| b.is_ascii_digit() || *b == b',' || *b == b'\n')
        .collect();
    report.bytes_removed = content.len() - cleaned.len();
    let text = String::from_utf8(cleaned).expect("ASCII only");

    let mut seen = std::collections::HashSet::new();
    let mut lines: Vec<&str> = text.split('\n').collect();
    if text.ends_with('\n') {
        lines.pop();
    }
    for line in lines {
        if line.is_empty() {
            report.blank_lines += 1;
            continue;
        }
        if !seen.insert(line) {
            report.duplicates_dropped += 1;
            continue;
        }
        let fields: Option<Vec<u64>> = line.split(',').map(|f| f.parse().ok()).collect();
        match fields.as_deref() {
            Some(&[a, b, c, d]) => report.pairs.push(ExternalPair {
                project_a: a,
                block_a: b,
                project_b: c,
                block_b: d,
            }),
            _ => {
                report.malformed_dropped += 1;
                report.malformed_lines.push(line.to_owned());
            }
        }
    }
    report
}
