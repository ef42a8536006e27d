use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{IndexScheme, Instance, PlantedModel};
use crate::error::{Error, Result};

/// One-line JSON header preceding serialized instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceHeader {
    pub problem: String,
    pub n: usize,
    pub scheme: IndexScheme,
    pub params: PlantedModel,
}

impl InstanceHeader {
    pub fn for_model(model: &PlantedModel) -> Self {
        InstanceHeader {
            problem: model.name().to_string(),
            n: model.n(),
            scheme: model.scheme(),
            params: model.clone(),
        }
    }
}

/// Header line, then one CSV row of coordinates per instance.
pub fn write_instances_csv<W: Write>(
    mut out: W,
    header: &InstanceHeader,
    instances: &[Instance],
) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string(header)?)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for inst in instances {
        w.write_record(inst.coords.iter().map(|c| c.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Header line, then little-endian f64 coordinates back to back.
pub fn write_instances_binary<W: Write>(
    mut out: W,
    header: &InstanceHeader,
    instances: &[Instance],
) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string(header)?)?;
    for inst in instances {
        for c in &inst.coords {
            out.write_all(&c.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_instances_csv<R: BufRead>(mut input: R) -> Result<(InstanceHeader, Vec<Instance>)> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: InstanceHeader = serde_json::from_str(line.trim_end())?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(input);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let coords = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("bad coordinate {s:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(Instance::new(header.scheme.clone(), coords)?);
    }
    Ok((header, out))
}
