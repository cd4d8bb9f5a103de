//! Trace CSV, SVG diagnostics and atomic file writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use hypifs::ifs::OrbitTrace;

pub const CSV_HEADER: [&str; 7] = ["nu", "probe", "re", "im", "diam", "step", "base_dist"];

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn trace_csv(trace: &OrbitTrace) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for (nu, rec) in trace.steps.iter().enumerate() {
        for (k, z) in rec.images.iter().enumerate() {
            w.write_record([
                nu.to_string(),
                k.to_string(),
                z.re.to_string(),
                z.im.to_string(),
                rec.diam.to_string(),
                rec.step_disp.to_string(),
                rec.base_dist.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    w.into_inner().expect("in-memory flush")
}

const PANEL: f64 = 440.0;
const PAD: f64 = 40.0;

struct Frame {
    x0: f64,
    lo: (f64, f64),
    hi: (f64, f64),
}

impl Frame {
    fn fit(x0: f64, pts: &[(f64, f64)]) -> Frame {
        let mut lo = (f64::INFINITY, f64::INFINITY);
        let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        if pts.is_empty() {
            lo = (0.0, 0.0);
            hi = (1.0, 1.0);
        }
        for (l, h) in [(&mut lo.0, &mut hi.0), (&mut lo.1, &mut hi.1)] {
            if *h - *l < 1e-12 {
                *l -= 0.5;
                *h += 0.5;
            }
        }
        Frame { x0, lo, hi }
    }

    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let inner = PANEL - 2.0 * PAD;
        (
            self.x0 + PAD + inner * (x - self.lo.0) / (self.hi.0 - self.lo.0),
            PAD + inner * (1.0 - (y - self.lo.1) / (self.hi.1 - self.lo.1)),
        )
    }

    fn draw(&self, svg: &mut String, title: &str, x_label: &str, y_label: &str, pts: &[(f64, f64)]) {
        let (l, b) = (self.x0 + PAD, PANEL - PAD);
        let (r, t) = (self.x0 + PANEL - PAD, PAD);
        let _ = writeln!(svg, r#"<text x="{}" y="20" font-size="14">{title}</text>"#, l);
        let _ = writeln!(svg, r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#);
        let _ = writeln!(svg, r#"<line x1="{l}" y1="{b}" x2="{l}" y2="{t}" stroke="black"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{r}" y="{}" font-size="11" text-anchor="end">{x_label} [{:.4}, {:.4}]</text>"#,
            b + 16.0,
            self.lo.0,
            self.hi.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{l}" y="{}" font-size="11">{y_label} [{:.4}, {:.4}]</text>"#,
            t - 6.0,
            self.lo.1,
            self.hi.1
        );
        let points: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="1.2" points="{}"/>"#,
            points.join(" ")
        );
    }
}

/// Probe-0 Euclidean path on the left, distance to base against `nu` on the right.
pub fn trace_svg(trace: &OrbitTrace) -> String {
    let finite = |p: &(f64, f64)| p.0.is_finite() && p.1.is_finite();
    let mut path = vec![(trace.probes[0].re, trace.probes[0].im)];
    path.extend(trace.path(0).iter().map(|z| (z.re, z.im)));
    path.retain(finite);
    let mut profile: Vec<(f64, f64)> = trace
        .steps
        .iter()
        .enumerate()
        .map(|(nu, r)| (nu as f64, r.base_dist))
        .collect();
    profile.retain(finite);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{PANEL}" font-family="sans-serif">"#,
        2.0 * PANEL
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    Frame::fit(0.0, &path).draw(&mut svg, "probe 0 path", "re", "im", &path);
    Frame::fit(PANEL, &profile).draw(&mut svg, "distance to base", "nu", "dist", &profile);
    svg.push_str("</svg>\n");
    svg
}

/// `x` to 15 significant digits with trailing zeros removed.
pub fn format_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (14 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
    }
    s
}
