//! Text checkpoint format.
//!
//! ```text
//! marnet-v1
//! <activation kind>
//! <layer count>
//! <rows> <cols>        # then `rows` lines of `cols` floats, per layer
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so parsing a rendered
//! checkpoint reproduces every weight bit for bit.

use super::{ActivationKind, Network};
use crate::error::{Error, Result};
use crate::matrix::{format_float, ComponentMatrix};

pub const VERSION: &str = "marnet-v1";

pub fn render(net: &Network) -> String {
    let mut out = format!("{VERSION}\n{}\n{}\n", net.activation().kind(), net.layers().len());
    for layer in net.layers() {
        out.push_str(&format!("{} {}\n", layer.rows(), layer.cols()));
        for r in 0..layer.rows() {
            let row: Vec<String> = (0..layer.cols()).map(|c| format_float(layer.get(r, c))).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l.trim()))
            }
            None => Err(format_err(self.last + 1, format!("unexpected end of file, expected {what}"))),
        }
    }
}

fn parse_usize(line: usize, s: &str, what: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| format_err(line, format!("invalid {what} `{s}`")))
}

pub fn parse(text: &str) -> Result<Network> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (n, version) = lines.next("version")?;
    if version != VERSION {
        return Err(format_err(n, format!("unsupported version `{version}`")));
    }
    let (n, kind) = lines.next("activation")?;
    let kind: ActivationKind = kind
        .parse()
        .map_err(|_| format_err(n, format!("unknown activation `{kind}`")))?;
    let (n, count) = lines.next("layer count")?;
    let count = parse_usize(n, count, "layer count")?;

    let mut layers = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, dims) = lines.next("layer dimensions")?;
        let parts: Vec<&str> = dims.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(format_err(n, format!("expected `rows cols`, got `{dims}`")));
        }
        let rows = parse_usize(n, parts[0], "row count")?;
        let cols = parse_usize(n, parts[1], "column count")?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (n, row) = lines.next("weight row")?;
            let values: Vec<&str> = row.split_whitespace().collect();
            if values.len() != cols {
                return Err(format_err(n, format!("expected {cols} values, got {}", values.len())));
            }
            for v in values {
                data.push(
                    v.parse::<f64>()
                        .map_err(|_| format_err(n, format!("bad float `{v}`")))?,
                );
            }
        }
        layers.push(ComponentMatrix::from_row_major(rows, cols, &data)?);
    }
    if let Ok((n, extra)) = lines.next("end of file") {
        if !extra.is_empty() {
            return Err(format_err(n, "trailing content after last layer"));
        }
    }
    Network::new(layers, kind).map_err(|e| format_err(lines.last, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), hidden in 1usize..6, scale in -1e6f64..1e6) {
            let mut net = Network::init(&[3, hidden, 2], ActivationKind::Sigmoid, seed).unwrap();
            net.layers_mut()[0].scale(scale);
            let back = parse(&render(&net)).unwrap();
            for (a, b) in net.layers().iter().zip(back.layers()) {
                let bits_a: Vec<u64> = a.as_slice().iter().map(|x| x.to_bits()).collect();
                let bits_b: Vec<u64> = b.as_slice().iter().map(|x| x.to_bits()).collect();
                prop_assert_eq!(bits_a, bits_b);
            }
            prop_assert_eq!(back.activation(), net.activation());
        }
    }

    #[test]
    fn layout_is_row_per_input() {
        let net = Network::new(
            vec![
                ComponentMatrix::from_row_major(2, 3, &[1., 2., 3., 4., 5., 6.]).unwrap(),
                ComponentMatrix::from_row_major(3, 1, &[0.5, -0.25, 1e-300]).unwrap(),
            ],
            ActivationKind::Relu,
        )
        .unwrap();
        assert_eq!(
            render(&net),
            "marnet-v1\nrelu\n2\n2 3\n1 2 3\n4 5 6\n3 1\n0.5\n-0.25\n1e-300\n"
        );
    }

    #[test]
    fn truncated_file_names_line() {
        let text = render(&Network::init(&[2, 3, 1], ActivationKind::Tanh, 1).unwrap());
        let truncated: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        match parse(&truncated) {
            Err(Error::Format { line, message }) => {
                assert_eq!(line, 6);
                assert!(message.contains("unexpected end of file"), "{message}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn unsupported_version() {
        let err = parse("marnet-v2\nrelu\n0\n").unwrap_err();
        assert_eq!(err, Error::Format { line: 1, message: "unsupported version `marnet-v2`".into() });
        assert!(err.to_string().contains("unsupported version"));
    }

    #[test]
    fn malformed_values() {
        let err = parse("marnet-v1\nrelu\n2\n1 2\n1 x\n2 1\n1\n1\n").unwrap_err();
        assert_eq!(err, Error::Format { line: 5, message: "bad float `x`".into() });
        let err = parse("marnet-v1\nswish\n2\n").unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }));
    }
}
