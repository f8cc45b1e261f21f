//! Line-oriented reports with `== SECTION` headers, in a fixed order.

use std::fmt::Write;

pub const SECTIONS: [&str; 5] = ["VERDICT", "PATTERN", "TRACE", "WITNESS", "ORACLE"];

#[derive(Default)]
pub struct Report {
    lines: [Vec<String>; 5],
}

impl Report {
    fn slot(&mut self, section: &str) -> &mut Vec<String> {
        let i = SECTIONS.iter().position(|s| *s == section).expect("known section");
        &mut self.lines[i]
    }

    pub fn kv(&mut self, section: &str, key: &str, value: impl std::fmt::Display) {
        self.slot(section).push(format!("{key}: {value}"));
    }

    /// Appends raw lines, one per line of `text`.
    pub fn text(&mut self, section: &str, text: &str) {
        let slot = self.slot(section);
        slot.extend(text.lines().map(str::to_string));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, lines) in SECTIONS.iter().zip(&self.lines) {
            if lines.is_empty() {
                continue;
            }
            writeln!(out, "== {name}").unwrap();
            for l in lines {
                writeln!(out, "{l}").unwrap();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_render_in_fixed_order() {
        let mut r = Report::default();
        r.kv("ORACLE", "graph", "terminating");
        r.kv("VERDICT", "verdict", "proven");
        r.text("WITNESS", "a\nb");
        assert_eq!(r.render(), "== VERDICT\nverdict: proven\n== WITNESS\na\nb\n== ORACLE\ngraph: terminating\n");
    }

    #[test]
    fn empty_report_is_empty() {
        assert_eq!(Report::default().render(), "");
    }
}
