//! Per-slice layouts, visual encodings and the exported animation.

mod layout;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use layout::{diameter, layout_sequence, seed_position, LayoutParams, Point, Positions};

use crate::network::Team;
use crate::paths::{escape_xml, OverlapClass};
use crate::temporal::{Day, SliceGraph, TemporalNetwork};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum AnimateError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid color `{0}`, expected #RRGGBB")]
    Color(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub fn hex(&self) -> String {
        format!("#{:02X}{:02X}{:02X}", self.0, self.1, self.2)
    }

    pub fn parse(s: &str) -> Result<Rgb, AnimateError> {
        let bad = || AnimateError::Color(s.to_string());
        let h = s.strip_prefix('#').ok_or_else(bad)?;
        if h.len() != 6 || !h.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(bad());
        }
        let c = |i: usize| u8::from_str_radix(&h[i..i + 2], 16).map_err(|_| bad());
        Ok(Rgb(c(0)?, c(2)?, c(4)?))
    }

    fn lerp(a: Rgb, b: Rgb, t: f64) -> Rgb {
        let ch = |x: u8, y: u8| (f64::from(x) + (f64::from(y) - f64::from(x)) * t).round() as u8;
        Rgb(ch(a.0, b.0), ch(a.1, b.1), ch(a.2, b.2))
    }
}

pub const RED: Rgb = Rgb(0xFF, 0x00, 0x00);
pub const YELLOW: Rgb = Rgb(0xFF, 0xFF, 0x00);
pub const GREEN: Rgb = Rgb(0x00, 0xFF, 0x00);
pub const BLUE: Rgb = Rgb(0x00, 0x00, 0xFF);
pub const PURPLE: Rgb = Rgb(0x80, 0x00, 0x80);
pub const GREY: Rgb = Rgb(0xBE, 0xBE, 0xBE);
const EDGE_GREY: Rgb = Rgb(0x99, 0x99, 0x99);

/// Three-stop diverging scale for sentiment in [-1, 1].
///
/// The default stops keep the red channel non-increasing and the green
/// channel non-decreasing along the scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    pub negative: Rgb,
    pub neutral: Rgb,
    pub positive: Rgb,
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            negative: RED,
            neutral: YELLOW,
            positive: GREEN,
        }
    }
}

impl Palette {
    /// Piecewise-linear interpolation; values outside [-1, 1] are clamped.
    pub fn sentiment(&self, s: f64) -> Rgb {
        let s = if s.is_nan() { 0.0 } else { s.clamp(-1.0, 1.0) };
        if s <= 0.0 {
            Rgb::lerp(self.negative, self.neutral, s + 1.0)
        } else {
            Rgb::lerp(self.neutral, self.positive, s)
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Sentiment,
    Keyword,
    Path,
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sentiment" => Ok(Scheme::Sentiment),
            "keyword" => Ok(Scheme::Keyword),
            "path" => Ok(Scheme::Path),
            other => Err(format!("unknown scheme `{other}` (sentiment|keyword|path)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Circle,
    Triangle,
    Square,
}

impl From<Team> for Shape {
    fn from(t: Team) -> Shape {
        match t {
            Team::Musk => Shape::Triangle,
            Team::OpenAi => Shape::Square,
            Team::None => Shape::Circle,
        }
    }
}

/// Maps interval degree to node size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SizeScale {
    pub min: f64,
    pub max: f64,
    /// Scale `ln(degree)` instead of degree.
    pub log: bool,
}

impl Default for SizeScale {
    fn default() -> Self {
        SizeScale {
            min: 0.3,
            max: 1.3,
            log: false,
        }
    }
}

impl SizeScale {
    /// Affine map of `degree` from `[lo, hi]` onto `[min, max]`, rounded to
    /// 4 decimals. A degenerate range gives `min`.
    pub fn size(&self, degree: u32, (lo, hi): (u32, u32)) -> f64 {
        if hi <= lo {
            return self.min;
        }
        let f = |d: u32| {
            let d = f64::from(d.max(1));
            if self.log {
                d.ln()
            } else {
                d
            }
        };
        let t = ((f(degree) - f(lo)) / (f(hi) - f(lo))).clamp(0.0, 1.0);
        ((self.min + (self.max - self.min) * t) * 1e4).round() / 1e4
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualStyle {
    pub scheme: Scheme,
    pub palette: Palette,
    pub size: SizeScale,
    /// Interval degree range the size scale spans.
    pub degree_range: (u32, u32),
}

impl VisualStyle {
    /// Style whose size scale spans every interval degree in `net`.
    pub fn for_network(net: &TemporalNetwork, scheme: Scheme) -> Self {
        let degrees = net.nodes.iter().flat_map(|n| n.intervals.iter().map(|i| i.degree));
        let range = degrees.fold(None, |acc: Option<(u32, u32)>, d| {
            Some(acc.map_or((d, d), |(lo, hi)| (lo.min(d), hi.max(d))))
        });
        VisualStyle {
            scheme,
            palette: Palette::default(),
            size: SizeScale::default(),
            degree_range: range.unwrap_or((0, 0)),
        }
    }

    fn class_color(class: OverlapClass) -> Rgb {
        match class {
            OverlapClass::AOnly => RED,
            OverlapClass::BOnly => BLUE,
            OverlapClass::Both => PURPLE,
            OverlapClass::Neither => GREY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimNode {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub size: f64,
    pub color: String,
    pub shape: Shape,
    pub tooltip: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimEdge {
    pub u: String,
    pub v: String,
    pub color: String,
    pub width: f64,
    pub tooltip: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimSlice {
    pub day: Day,
    pub date: NaiveDate,
    pub nodes: Vec<AnimNode>,
    pub edges: Vec<AnimEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encodings {
    pub scheme: Scheme,
    pub description: String,
    pub size_min: f64,
    pub size_max: f64,
    pub degree_min: u32,
    pub degree_max: u32,
    pub log_size: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimationMeta {
    pub epoch: NaiveDate,
    pub days: Vec<Day>,
    pub encodings: Encodings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimationDoc {
    pub version: u32,
    pub meta: AnimationMeta,
    pub slices: Vec<AnimSlice>,
}

fn describe(style: &VisualStyle) -> String {
    let color = match style.scheme {
        Scheme::Sentiment => format!(
            "color: mean sentiment, {} (-1) to {} (0) to {} (+1)",
            style.palette.negative.hex(),
            style.palette.neutral.hex(),
            style.palette.positive.hex()
        ),
        Scheme::Keyword => format!(
            "color: {} if any interaction in the interval used a keyword, else {}",
            RED.hex(),
            style.palette.neutral.hex()
        ),
        Scheme::Path => format!(
            "color: first path only {}, second path only {}, both {}, neither {}",
            RED.hex(),
            BLUE.hex(),
            PURPLE.hex(),
            GREY.hex()
        ),
    };
    format!(
        "{color}; shape: musk team triangle, openai team square, others circle; size: interval degree {} to {} mapped to {} to {}{}",
        style.degree_range.0,
        style.degree_range.1,
        style.size.min,
        style.size.max,
        if style.size.log { " (log scale)" } else { "" }
    )
}

fn node_tooltip(net: &TemporalNetwork, id: &str, degree: u32, sentiment: f64, keyword: u8) -> String {
    let mut s = String::new();
    if let Some(n) = net.node(id) {
        let p = &n.profile;
        let _ = write!(s, "@{}", p.handle);
        if !p.display_name.is_empty() {
            let _ = write!(s, " ({})", p.display_name);
        }
        if !p.description.is_empty() {
            let _ = write!(s, "\n{}", p.description);
        }
        let _ = write!(s, "\nteam: {}", p.team);
    } else {
        s.push_str(id);
    }
    let _ = write!(
        s,
        "\ndegree: {degree}\nsentiment: {sentiment:.3}\nkeyword: {}",
        if keyword == 1 { "yes" } else { "no" }
    );
    s
}

/// Styles one slice. `overlap` is only read by the path scheme; nodes with
/// no class there are drawn as in neither path.
pub fn encode_visuals(
    net: &TemporalNetwork,
    slice: &SliceGraph,
    style: &VisualStyle,
    positions: &Positions,
    overlap: Option<&BTreeMap<String, OverlapClass>>,
) -> AnimSlice {
    let nodes = slice
        .nodes
        .iter()
        .map(|n| {
            let color = match style.scheme {
                Scheme::Sentiment => style.palette.sentiment(n.mean_sentiment),
                Scheme::Keyword if n.keyword_any == 1 => RED,
                Scheme::Keyword => style.palette.neutral,
                Scheme::Path => VisualStyle::class_color(
                    overlap
                        .and_then(|o| o.get(&n.user_id).copied())
                        .unwrap_or(OverlapClass::Neither),
                ),
            };
            let p = positions.get(&n.user_id).copied().unwrap_or(Point { x: 0.0, y: 0.0 });
            AnimNode {
                id: n.user_id.clone(),
                x: p.x,
                y: p.y,
                size: style.size.size(n.degree, style.degree_range),
                color: color.hex(),
                shape: n.team.into(),
                tooltip: node_tooltip(net, &n.user_id, n.degree, n.mean_sentiment, n.keyword_any),
            }
        })
        .collect();
    let edges = slice
        .edges
        .iter()
        .map(|e| {
            let color = match style.scheme {
                Scheme::Keyword if e.keyword_flag == 1 => RED,
                _ => EDGE_GREY,
            };
            AnimEdge {
                u: e.u.clone(),
                v: e.v.clone(),
                color: color.hex(),
                width: 1.0,
                tooltip: format!(
                    "{} -> {} ({})\n{}\nsentiment: {:.3}",
                    e.from,
                    e.to,
                    e.edge_type,
                    e.text,
                    e.sentiment
                ),
            }
        })
        .collect();
    AnimSlice {
        day: slice.day,
        date: net.epoch + chrono::Duration::days(slice.day),
        nodes,
        edges,
    }
}

/// Lays out and styles every day in `days`.
pub fn build_animation(
    net: &TemporalNetwork,
    days: &[Day],
    style: &VisualStyle,
    seed: u64,
    params: &LayoutParams,
    overlap: Option<&BTreeMap<Day, BTreeMap<String, OverlapClass>>>,
) -> AnimationDoc {
    let layouts = layout_sequence(net, days, seed, params);
    let slices = days
        .iter()
        .map(|&d| {
            encode_visuals(
                net,
                &net.slice(d),
                style,
                &layouts[&d],
                overlap.and_then(|o| o.get(&d)),
            )
        })
        .collect();
    AnimationDoc {
        version: FORMAT_VERSION,
        meta: AnimationMeta {
            epoch: net.epoch,
            days: days.to_vec(),
            encodings: Encodings {
                scheme: style.scheme,
                description: describe(style),
                size_min: style.size.min,
                size_max: style.size.max,
                degree_min: style.degree_range.0,
                degree_max: style.degree_range.1,
                log_size: style.size.log,
            },
        },
        slices,
    }
}

/// Static SVG of one slice, for figures.
pub fn slice_svg(slice: &AnimSlice) -> String {
    const W: f64 = 800.0;
    const M: f64 = 40.0;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for n in &slice.nodes {
        x0 = x0.min(n.x);
        x1 = x1.max(n.x);
        y0 = y0.min(n.y);
        y1 = y1.max(n.y);
    }
    if slice.nodes.is_empty() {
        (x0, x1, y0, y1) = (-0.5, 0.5, -0.5, 0.5);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-3);
    let scale = (W - 2.0 * M) / span;
    let cx = |x: f64| M + (x - x0) * scale;
    let cy = |y: f64| M + (y - y0) * scale;
    let by_id: BTreeMap<&str, &AnimNode> = slice.nodes.iter().map(|n| (n.id.as_str(), n)).collect();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 800" width="800" height="800">"#
    );
    let _ = writeln!(s, r##"<rect width="800" height="800" fill="#FFFFFF"/>"##);
    let _ = writeln!(
        s,
        r#"<text x="400" y="24" text-anchor="middle" font-size="16">{} (day {})</text>"#,
        slice.date, slice.day
    );
    for e in &slice.edges {
        let (Some(a), Some(b)) = (by_id.get(e.u.as_str()), by_id.get(e.v.as_str())) else {
            continue;
        };
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="{}"><title>{}</title></line>"#,
            cx(a.x),
            cy(a.y),
            cx(b.x),
            cy(b.y),
            e.color,
            e.width,
            escape_xml(&e.tooltip)
        );
    }
    for n in &slice.nodes {
        let (x, y, r) = (cx(n.x), cy(n.y), 8.0 * n.size);
        let title = escape_xml(&n.tooltip);
        let shape = match n.shape {
            Shape::Circle => format!(r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r:.2}""#),
            Shape::Square => format!(
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}""#,
                x - r,
                y - r,
                2.0 * r,
                2.0 * r
            ),
            Shape::Triangle => format!(
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}""#,
                x,
                y - r,
                x - r,
                y + r,
                x + r,
                y + r
            ),
        };
        let _ = writeln!(
            s,
            r##"{shape} fill="{}" stroke="#333333" stroke-width="0.5"><title>{title}</title></{}>"##,
            n.color,
            match n.shape {
                Shape::Circle => "circle",
                Shape::Square => "rect",
                Shape::Triangle => "polygon",
            }
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Embeds the document and the player script in one page. `</` inside the
/// inline JSON is escaped so it cannot close the script element.
pub fn render_html(doc: &AnimationDoc, player: &str) -> Result<String, AnimateError> {
    let json = serde_json::to_string(doc)?.replace("</", "<\\/");
    let player = player.replace("</script", "<\\/script");
    let status = if doc.slices.is_empty() {
        "no data".to_string()
    } else {
        format!("{} slices", doc.slices.len())
    };
    Ok(format!(
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>Network animation</title>\n</head>\n<body>\n<div id=\"status\">{status}</div>\n<div id=\"player\"></div>\n<script type=\"application/json\" id=\"animation-data\">{json}</script>\n<script>\n{player}\n</script>\n</body>\n</html>\n"
    ))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExportReport {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

fn write_file(path: PathBuf, contents: &[u8], report: &mut ExportReport) -> Result<(), AnimateError> {
    std::fs::write(&path, contents).map_err(|source| AnimateError::Io {
        path: path.clone(),
        source,
    })?;
    report.files.push(path);
    Ok(())
}

/// Writes `animation.json`, one `slice_<day>.svg` per slice and, when a
/// player script is given, `index.html`. Without a player the page is
/// skipped and a warning is returned.
pub fn export_animation(
    doc: &AnimationDoc,
    out_dir: &Path,
    player: Option<&str>,
) -> Result<ExportReport, AnimateError> {
    std::fs::create_dir_all(out_dir).map_err(|source| AnimateError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut report = ExportReport::default();
    let mut json = serde_json::to_string_pretty(doc)?;
    json.push('\n');
    write_file(out_dir.join("animation.json"), json.as_bytes(), &mut report)?;
    for s in &doc.slices {
        write_file(
            out_dir.join(format!("slice_{}.svg", s.day)),
            slice_svg(s).as_bytes(),
            &mut report,
        )?;
    }
    match player {
        Some(p) => write_file(out_dir.join("index.html"), render_html(doc, p)?.as_bytes(), &mut report)?,
        None => report
            .warnings
            .push("player bundle not available; wrote animation.json and SVG slices only".into()),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::test_support::{epoch, inter};

    #[test]
    fn size_endpoints() {
        let s = SizeScale::default();
        assert_eq!(s.size(1, (1, 2879)), 0.3);
        assert_eq!(s.size(2879, (1, 2879)), 1.3);
        assert_eq!(s.size(1440, (1, 2879)), 0.8);
        assert_eq!(s.size(5, (5, 5)), 0.3);
        let log = SizeScale { log: true, ..s };
        assert_eq!(log.size(1, (1, 2879)), 0.3);
        assert_eq!(log.size(2879, (1, 2879)), 1.3);
        assert!(log.size(1440, (1, 2879)) > 0.8);
    }

    #[test]
    fn sentiment_colors() {
        let p = Palette::default();
        assert_eq!(p.sentiment(0.0).hex(), "#FFFF00");
        assert_eq!(p.sentiment(-1.0).hex(), "#FF0000");
        assert_eq!(p.sentiment(1.0).hex(), "#00FF00");
        assert_eq!(p.sentiment(5.0), p.sentiment(1.0));
        let mut prev = p.sentiment(-1.0);
        for k in -99..=100 {
            let c = p.sentiment(f64::from(k) / 100.0);
            assert!(c.0 <= prev.0 && c.1 >= prev.1);
            prev = c;
        }
    }

    #[test]
    fn color_parse() {
        assert_eq!(Rgb::parse("#D7191C").unwrap(), Rgb(0xD7, 0x19, 0x1C));
        assert!(Rgb::parse("D7191C").is_err());
        assert!(Rgb::parse("#D7191").is_err());
    }

    fn small_net() -> TemporalNetwork {
        let mut a = inter("1", "A", "B", 0, 0);
        a.sentiment = -0.5;
        a.keyword_flag = 1;
        a.text = "</script> & more".into();
        let b = inter("2", "B", "C", 1, 0);
        let mut profiles = vec![crate::network::NodeProfile::stub("A")];
        profiles[0].team = Team::Musk;
        profiles[0].description = "builds rockets".into();
        TemporalNetwork::build(&[a, b], &profiles, epoch(), 4, Default::default())
    }

    #[test]
    fn encodings_are_total() {
        let net = small_net();
        for scheme in [Scheme::Sentiment, Scheme::Keyword, Scheme::Path] {
            let style = VisualStyle::for_network(&net, scheme);
            let doc = build_animation(&net, &[0, 1, 2], &style, 9, &LayoutParams::default(), None);
            assert_eq!(doc.slices.len(), 3);
            for s in &doc.slices {
                for n in &s.nodes {
                    assert!(Rgb::parse(&n.color).is_ok());
                    assert!((0.3..=1.3).contains(&n.size));
                    assert!(n.x.is_finite() && n.y.is_finite());
                    assert!(net.contains(&n.id));
                }
            }
        }
        let style = VisualStyle::for_network(&net, Scheme::Keyword);
        let doc = build_animation(&net, &[0], &style, 9, &LayoutParams::default(), None);
        let a = &doc.slices[0].nodes[0];
        assert_eq!((a.id.as_str(), a.shape, a.color.as_str()), ("A", Shape::Triangle, "#FF0000"));
        assert!(a.tooltip.contains("builds rockets"));
        assert!(doc.slices[0].edges[0].tooltip.contains("</script> & more"));
    }

    #[test]
    fn export_with_and_without_player() {
        let net = small_net();
        let style = VisualStyle::for_network(&net, Scheme::Sentiment);
        let doc = build_animation(&net, &[0, 1], &style, 9, &LayoutParams::default(), None);
        let dir = tempfile::tempdir().unwrap();
        let rep = export_animation(&doc, dir.path(), None).unwrap();
        assert_eq!(rep.warnings.len(), 1);
        assert!(!dir.path().join("index.html").exists());
        assert!(dir.path().join("slice_1.svg").exists());
        let text = std::fs::read_to_string(dir.path().join("animation.json")).unwrap();
        let back: AnimationDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(serde_json::to_string_pretty(&back).unwrap() + "\n", text);

        let rep = export_animation(&doc, dir.path(), Some("/* player */")).unwrap();
        assert!(rep.warnings.is_empty());
        let html = std::fs::read_to_string(dir.path().join("index.html")).unwrap();
        assert!(html.contains("<\\/script> & more"));
        assert_eq!(html.matches("</script>").count(), 2);
    }

    #[test]
    fn empty_doc_exports() {
        let net = TemporalNetwork::build(&[], &[], epoch(), 4, Default::default());
        let style = VisualStyle::for_network(&net, Scheme::Sentiment);
        let doc = build_animation(&net, &[], &style, 0, &LayoutParams::default(), None);
        let dir = tempfile::tempdir().unwrap();
        export_animation(&doc, dir.path(), Some("")).unwrap();
        let html = std::fs::read_to_string(dir.path().join("index.html")).unwrap();
        assert!(html.contains("no data"));
        let text = std::fs::read_to_string(dir.path().join("animation.json")).unwrap();
        let back: AnimationDoc = serde_json::from_str(&text).unwrap();
        assert!(back.slices.is_empty());
    }
}
