//! Model file format: a `pasakit-model v1` header, `meta\t<key>\t<value>`
//! lines, `bias\t<decimal>`, then one `w\t<feature>\t<decimal>` line per
//! vocabulary entry in index order. Decimals carry 17 significant digits.

use std::io::{BufRead, Write};

use super::{ClassifierError, Model};
use crate::features::Vocabulary;
use crate::scalar::Scalar;

pub const MODEL_HEADER: &str = "pasakit-model v1";

pub(crate) fn format_decimal<F: Scalar>(x: F) -> String {
    format!("{x:.16e}")
}

pub fn write_model<F: Scalar, W: Write>(model: &Model<F>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{MODEL_HEADER}")?;
    for (k, v) in model.meta_entries() {
        writeln!(w, "meta\t{k}\t{v}")?;
    }
    writeln!(w, "bias\t{}", format_decimal(model.bias()))?;
    for (s, &x) in model.vocabulary().strings().iter().zip(model.weights()) {
        writeln!(w, "w\t{s}\t{}", format_decimal(x))?;
    }
    Ok(())
}

fn bad(line: usize, message: impl Into<String>) -> ClassifierError {
    ClassifierError::Format {
        line,
        message: message.into(),
    }
}

fn parse_decimal<F: Scalar>(line: usize, s: &str) -> Result<F, ClassifierError> {
    let x: F = s
        .parse()
        .map_err(|_| bad(line, format!("malformed decimal `{s}`")))?;
    if !x.is_finite() {
        return Err(bad(line, "non-finite weight"));
    }
    Ok(x)
}

pub fn read_model<F: Scalar, R: BufRead>(reader: R) -> Result<Model<F>, ClassifierError> {
    let mut lines = reader.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).transpose()?;
    if header.as_deref() != Some(MODEL_HEADER) {
        return Err(bad(1, format!("expected `{MODEL_HEADER}` header")));
    }
    let mut meta = Vec::new();
    let mut bias = None;
    let mut strings = Vec::new();
    let mut weights = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let line = line?;
        let fields: Vec<&str> = line.splitn(3, '\t').collect();
        match fields.as_slice() {
            ["meta", k, v] if bias.is_none() => meta.push((k.to_string(), v.to_string())),
            ["bias", v] if bias.is_none() => bias = Some(parse_decimal::<F>(n, v)?),
            ["w", _, _] if bias.is_some() => {
                // feature strings may not contain TAB, so the value is last
                let (feature, value) = line[2..]
                    .rsplit_once('\t')
                    .ok_or_else(|| bad(n, "malformed weight line"))?;
                strings.push(feature.to_string());
                weights.push(parse_decimal::<F>(n, value)?);
            }
            _ => return Err(bad(n, "unexpected line")),
        }
    }
    let bias = bias.ok_or_else(|| bad(0, "missing bias line"))?;
    let vocabulary = Vocabulary::from_strings(strings)
        .map_err(|s| bad(0, format!("duplicate feature `{s}`")))?;
    weights.push(bias);
    let mut model = Model::from_parts(vocabulary, weights)?;
    for (k, v) in meta {
        model.set_meta(k, v);
    }
    Ok(model)
}
