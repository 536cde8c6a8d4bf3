//! Sample containers and their CSV / JSON encodings.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::{GhParams, GigParams};
use crate::error::{Error, Result};
use crate::numerics::RandomStream;
use crate::scalar::{CompensatedSum, Real};

/// Values generated per block of the random stream.
pub const SAMPLE_CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
#[serde(bound = "")]
pub enum SampleSource<F: Real> {
    Gh(GhParams<F>),
    Gig(GigParams<F>),
    External,
}

/// Draws together with the law and stream that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<F: Real> {
    values: Vec<F>,
    source: SampleSource<F>,
    stream: Option<RandomStream>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct SampleDoc<F: Real> {
    params: SampleSource<F>,
    seed: Option<u64>,
    stream_id: Option<u64>,
    values: Vec<F>,
}

impl<F: Real> SampleSet<F> {
    pub fn new(values: Vec<F>, source: SampleSource<F>, stream: Option<RandomStream>) -> Self {
        Self {
            values,
            source,
            stream,
        }
    }

    /// Wrap externally supplied data.
    pub fn from_values(values: Vec<F>) -> Result<Self> {
        validate(&values)?;
        Ok(Self::new(values, SampleSource::External, None))
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn into_values(self) -> Vec<F> {
        self.values
    }

    pub fn source(&self) -> &SampleSource<F> {
        &self.source
    }

    pub fn stream(&self) -> Option<RandomStream> {
        self.stream
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The same data shifted by `-shift`; used to centre a location parameter.
    pub fn shifted(&self, shift: F) -> Self {
        Self {
            values: self.values.iter().map(|&v| v - shift).collect(),
            ..self.clone()
        }
    }

    pub fn mean(&self) -> F {
        let s: CompensatedSum<F> = self.values.iter().copied().collect();
        s.value() / F::of_usize(self.values.len())
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> F {
        let n = self.values.len();
        if n < 2 {
            return F::zero();
        }
        let m = self.mean();
        let s: CompensatedSum<F> = self.values.iter().map(|&v| (v - m) * (v - m)).collect();
        s.value() / F::of_usize(n - 1)
    }

    /// Sample skewness `m3 / m2^{3/2}` with population moments.
    pub fn skewness(&self) -> F {
        let n = F::of_usize(self.values.len());
        let m = self.mean();
        let m2: CompensatedSum<F> = self.values.iter().map(|&v| (v - m).powi(2)).collect();
        let m3: CompensatedSum<F> = self.values.iter().map(|&v| (v - m).powi(3)).collect();
        (m3.value() / n) / (m2.value() / n).powf(F::lit(1.5))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Data(e.to_string());
        writeln!(w, "value").map_err(io)?;
        for v in &self.values {
            writeln!(w, "{v}").map_err(io)?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        let doc = SampleDoc {
            params: self.source,
            seed: self.stream.map(|s| s.seed),
            stream_id: self.stream.map(|s| s.stream_id),
            values: self.values.clone(),
        };
        serde_json::to_writer(w, &doc).map_err(|e| Error::Data(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }

    pub fn to_json_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_json(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }

    /// Parse either encoding produced by this type, a bare JSON array, or
    /// a one-column CSV with an optional `value` header.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            let doc: SampleDoc<F> =
                serde_json::from_str(trimmed).map_err(|e| Error::Data(e.to_string()))?;
            validate(&doc.values)?;
            let stream = doc
                .seed
                .map(|seed| RandomStream::new(seed, doc.stream_id.unwrap_or(0)));
            return Ok(Self::new(doc.values, doc.params, stream));
        }
        Self::from_values(parse_values(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

fn validate<F: Real>(values: &[F]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Data("sample contains no values".into()));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("sample value {i} is not finite")));
    }
    Ok(())
}

/// Numeric values from a JSON array or a one-column CSV.
pub fn parse_values<F: Real>(text: &str) -> Result<Vec<F>> {
    let trimmed = text.trim();
    let values: Vec<F> = if trimmed.starts_with('[') {
        let raw: Vec<Option<f64>> =
            serde_json::from_str(trimmed).map_err(|e| Error::Data(e.to_string()))?;
        raw.into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.map(F::lit)
                    .ok_or_else(|| Error::Data(format!("entry {i} is null")))
            })
            .collect::<Result<_>>()?
    } else {
        let mut out = Vec::new();
        for (lineno, line) in trimmed.lines().enumerate() {
            let field = line.split(',').next().unwrap_or("").trim();
            if field.is_empty() || (out.is_empty() && field.eq_ignore_ascii_case("value")) {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| {
                Error::Data(format!(
                    "line {}: cannot parse {field:?} as a number",
                    lineno + 1
                ))
            })?;
            out.push(F::lit(v));
        }
        out
    };
    validate(&values)?;
    Ok(values)
}
