//! CSV writers and readers. Floats are written in Rust's shortest
//! round-trip form, so parsing a written file recovers every value exactly.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use pathdob_core::dstability::GainGrid;
use pathdob_core::robustness::StabilityReport;
use pathdob_core::scenario::VertexTable;
use pathdob_core::SimTrace;

pub const TRACE_HEADER: [&str; 7] = ["t", "y", "dpsi", "delta_f", "u_new", "d_hat", "r"];

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Writes the header and rows of a numeric table.
pub fn write_rows<W: Write>(
    w: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(w: W, trace: &SimTrace) -> Result<()> {
    let cols = [
        &trace.t,
        &trace.y,
        &trace.dpsi,
        &trace.delta_f,
        &trace.u_new,
        &trace.d_hat,
        &trace.r,
    ];
    let rows = (0..trace.len()).map(|k| cols.iter().map(|c| fmt_f64(c[k])).collect());
    write_rows(w, &TRACE_HEADER, rows)
}

/// Parses a trace written by [`write_trace`]. `e_hat` is not part of the file
/// and comes back empty.
pub fn read_trace<R: Read>(r: R) -> Result<SimTrace> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != TRACE_HEADER {
        bail!("unexpected trace header `{}`", header.join(","));
    }
    let mut cols: [Vec<f64>; 7] = Default::default();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        for (col, field) in cols.iter_mut().zip(rec.iter()) {
            col.push(
                field
                    .parse()
                    .with_context(|| format!("data row {}: bad number `{field}`", line + 1))?,
            );
        }
    }
    let [t, y, dpsi, delta_f, u_new, d_hat, r] = cols;
    Ok(SimTrace {
        t,
        y,
        dpsi,
        delta_f,
        u_new,
        d_hat,
        e_hat: Vec::new(),
        r,
    })
}

pub fn write_vertex_table<W: Write>(w: W, table: &VertexTable) -> Result<()> {
    let red = table.reduction_pct();
    let rows = table.vertices.iter().enumerate().map(|(i, v)| {
        vec![
            v.label.to_string(),
            fmt_f64(v.v_kmh),
            fmt_f64(v.virtual_mass),
            fmt_f64(table.rms_pd[i]),
            fmt_f64(table.rms_dob[i]),
            fmt_f64(red[i]),
        ]
    });
    write_rows(
        w,
        &[
            "vertex",
            "v_kmh",
            "virtual_mass",
            "rms_pd",
            "rms_pd_dob",
            "reduction_pct",
        ],
        rows,
    )
}

pub fn write_gain_grid<W: Write>(w: W, grid: &GainGrid) -> Result<()> {
    let rows = grid.kp.iter().enumerate().flat_map(|(i, kp)| {
        grid.kd.iter().enumerate().map(move |(j, kd)| {
            let c = grid.cell(i, j);
            let (re, im) = c.dominant.map_or((f64::NAN, f64::NAN), |p| (p.re, p.im));
            vec![
                fmt_f64(*kp),
                fmt_f64(*kd),
                u8::from(c.feasible).to_string(),
                fmt_f64(re),
                fmt_f64(im),
            ]
        })
    });
    write_rows(
        w,
        &[
            "K_p",
            "K_d",
            "feasible",
            "dominant_pole_re",
            "dominant_pole_im",
        ],
        rows,
    )
}

pub fn write_report<W: Write>(w: W, report: &StabilityReport) -> Result<()> {
    let rows = report.points.iter().map(|p| {
        vec![
            fmt_f64(p.omega),
            fmt_f64(p.test),
            fmt_f64(p.bound),
            fmt_f64(p.margin_db),
        ]
    });
    write_rows(w, &["omega", "test", "bound", "margin_db"], rows)
}
