//! Minimal CSV output: header row, comma delimiter, LF line endings.

/// Formats a float with 17 significant digits.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// A table of string cells rendered as CSV.
#[derive(Clone, Debug)]
pub struct Table {
    width: usize,
    out: String,
}

fn quote(cell: &str) -> std::borrow::Cow<'_, str> {
    if cell.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", cell.replace('"', "\"\"")).into()
    } else {
        cell.into()
    }
}

impl Table {
    pub fn new<const N: usize>(header: [&str; N]) -> Self {
        let mut table = Table {
            width: N,
            out: String::new(),
        };
        table.push(header.iter().copied());
        table
    }

    fn push<'a>(&mut self, cells: impl Iterator<Item = &'a str>) {
        let mut count = 0;
        for (i, cell) in cells.enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            self.out.push_str(&quote(cell));
            count += 1;
        }
        assert_eq!(count, self.width, "row width does not match header");
        self.out.push('\n');
    }

    pub fn row<S: AsRef<str>, const N: usize>(&mut self, cells: [S; N]) {
        self.push(cells.iter().map(|c| c.as_ref()));
    }

    pub fn render(self) -> String {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_digits() {
        for v in [0.1, 1.0 / 3.0, 0.29356, 1e-300, 6.02e23] {
            assert_eq!(float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn quoting() {
        let mut t = Table::new(["a", "b"]);
        t.row(["x,y", "plain"]);
        t.row(["say \"hi\"", ""]);
        assert_eq!(t.render(), "a,b\n\"x,y\",plain\n\"say \"\"hi\"\"\",\n");
    }

    #[test]
    #[should_panic]
    fn width_mismatch() {
        let mut t = Table::new(["a", "b"]);
        t.row(["only"]);
    }
}
