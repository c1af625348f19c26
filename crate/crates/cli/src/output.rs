//! Plain-text tables and optional ANSI colouring.

use cryptarg_core::Label;

/// Colour is used only on a terminal, and never when `NO_COLOR` is set to a
/// non-empty value.
pub fn color_enabled(is_terminal: bool, no_color: Option<&str>) -> bool {
    is_terminal && no_color.is_none_or(str::is_empty)
}

pub fn paint_label(label: Label, padded: &str, color: bool) -> String {
    if !color {
        return padded.to_owned();
    }
    let code = match label {
        Label::In => "32",
        Label::Out => "31",
        Label::Undec => "33",
    };
    format!("\x1b[{code}m{padded}\x1b[0m")
}

/// Left-aligned columns separated by two spaces. The first column of a row
/// tagged with a label is coloured after padding so widths stay correct.
pub fn table(rows: &[(Option<Label>, Vec<String>)], color: bool) -> String {
    let cols = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
    let mut widths = vec![0; cols];
    for (_, cells) in rows {
        for (i, c) in cells.iter().enumerate() {
            widths[i] = widths[i].max(c.chars().count());
        }
    }
    let mut out = String::new();
    for (label, cells) in rows {
        let mut line = String::new();
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            let padded = format!("{c:<w$}", w = widths[i]);
            match (i, label) {
                (0, Some(l)) => line.push_str(&paint_label(*l, &padded, color)),
                _ => line.push_str(&padded),
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
