//! Line-level churn between two byte buffers.
//!
//! Counts added and deleted lines under a minimal (Myers) line diff with no
//! whitespace normalization and no rename detection, matching the totals of
//! `git diff --numstat --no-renames` for text files. Only the counts are
//! needed: every minimal edit script for a given pair has the same number of
//! insertions and deletions, so they can be derived from the edit distance
//! alone.

use std::collections::HashMap;

/// Added/deleted line counts for one file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LineChurn {
    pub added: u64,
    pub deleted: u64,
}

impl LineChurn {
    pub fn total(&self) -> u64 {
        self.added + self.deleted
    }
}

/// Number of physical lines in a buffer. A trailing fragment without a final
/// newline counts as a line, mirroring git's line accounting.
pub fn count_lines(content: &[u8]) -> u64 {
    if content.is_empty() {
        return 0;
    }
    let newlines = content.iter().filter(|&&b| b == b'\n').count() as u64;
    if content[content.len() - 1] == b'\n' {
        newlines
    } else {
        newlines + 1
    }
}

/// git treats a file as binary when a NUL byte appears in its first 8000
/// bytes; such files carry no line counts in numstat output.
pub fn looks_binary(content: &[u8]) -> bool {
    let probe = &content[..content.len().min(8000)];
    probe.contains(&0)
}

/// Split into lines keeping the terminator, so that a final line with and
/// without a trailing newline compare as different (as git does).
fn split_lines(content: &[u8]) -> Vec<&[u8]> {
    content.split_inclusive(|&b| b == b'\n').collect()
}

/// Line churn between two versions of a file.
///
/// Binary content (on either side) yields zero churn, the same contribution
/// an oracle summing numstat numbers would see for a `- -` row.
pub fn line_churn(old: &[u8], new: &[u8]) -> LineChurn {
    if old == new {
        return LineChurn::default();
    }
    if looks_binary(old) || looks_binary(new) {
        return LineChurn::default();
    }

    let old_lines = split_lines(old);
    let new_lines = split_lines(new);

    // Intern lines so the distance loop compares fixed-width ids.
    let mut ids: HashMap<&[u8], u32> = HashMap::new();
    let mut a = Vec::with_capacity(old_lines.len());
    for line in &old_lines {
        let next = ids.len() as u32;
        a.push(*ids.entry(line).or_insert(next));
    }
    let mut b = Vec::with_capacity(new_lines.len());
    for line in &new_lines {
        let next = ids.len() as u32;
        b.push(*ids.entry(line).or_insert(next));
    }

    // Trim common prefix/suffix before running the O(ND) loop.
    let mut lo = 0;
    while lo < a.len() && lo < b.len() && a[lo] == b[lo] {
        lo += 1;
    }
    let mut a_hi = a.len();
    let mut b_hi = b.len();
    while a_hi > lo && b_hi > lo && a[a_hi - 1] == b[b_hi - 1] {
        a_hi -= 1;
        b_hi -= 1;
    }
    let a = &a[lo..a_hi];
    let b = &b[lo..b_hi];

    let d = edit_distance(a, b) as i64;
    let n = a.len() as i64;
    let m = b.len() as i64;
    // d = added + deleted and added - deleted = m - n, so both are fixed.
    LineChurn {
        added: ((d + (m - n)) / 2) as u64,
        deleted: ((d + (n - m)) / 2) as u64,
    }
}

/// Myers' greedy forward algorithm; returns the minimal edit distance
/// (insertions plus deletions) in O((N+M)·D) time and O(N+M) space.
fn edit_distance(a: &[u32], b: &[u32]) -> usize {
    let n = a.len() as isize;
    let m = b.len() as isize;
    if n == 0 {
        return m as usize;
    }
    if m == 0 {
        return n as usize;
    }
    let max = n + m;
    let offset = max;
    let mut v = vec![0isize; (2 * max + 1) as usize];
    for d in 0..=max {
        let mut k = -d;
        while k <= d {
            let mut x = if k == -d || (k != d && v[(offset + k - 1) as usize] < v[(offset + k + 1) as usize])
            {
                v[(offset + k + 1) as usize]
            } else {
                v[(offset + k - 1) as usize] + 1
            };
            let mut y = x - k;
            while x < n && y < m && a[x as usize] == b[y as usize] {
                x += 1;
                y += 1;
            }
            v[(offset + k) as usize] = x;
            if x >= n && y >= m {
                return d as usize;
            }
            k += 2;
        }
    }
    max as usize
}
