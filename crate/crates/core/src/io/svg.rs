use crate::error::{Error, Result};
use crate::io::json::PatternDocument;
use crate::patterns::image_triangles;
use num_complex::Complex64;
use std::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    pub show_circles: bool,
    pub show_points: bool,
    pub show_triangles: bool,
    pub stroke_width: f64,
    /// Margin around the bounding box, relative to its larger side.
    pub padding: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { show_circles: true, show_points: true, show_triangles: false, stroke_width: 0.01, padding: 0.05 }
    }
}

const COLORS: [&str; 3] = ["#1f5fa8", "#b0392b", "#2d8a4e"];

struct Bbox {
    lo: Complex64,
    hi: Complex64,
}

impl Bbox {
    fn new() -> Self {
        Bbox { lo: Complex64::new(f64::INFINITY, f64::INFINITY), hi: Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY) }
    }

    fn add(&mut self, z: Complex64, r: f64) {
        self.lo = Complex64::new(self.lo.re.min(z.re - r), self.lo.im.min(z.im - r));
        self.hi = Complex64::new(self.hi.re.max(z.re + r), self.hi.im.max(z.im + r));
    }

    fn is_empty(&self) -> bool {
        !(self.lo.re <= self.hi.re)
    }
}

/// An SVG drawing of the document; the y axis points up.
///
/// One `<circle>` per stored circle, one `<rect>` marker per finite vertex that is
/// not a center of its field's circles, optionally the image triangles. The view
/// box covers every finite vertex, drawn or not.
pub fn render_svg(doc: &PatternDocument, opts: &RenderOptions) -> Result<String> {
    let fields = doc.fields();
    let mut points = Vec::new();
    let mut bb = Bbox::new();
    for ((tag, _), f) in &fields {
        for p in f.points() {
            let Some(z) = f.finite(p) else { continue };
            bb.add(z, 0.0);
            if p.sublattice_index() != tag.center_index() {
                points.push((*tag, z));
            }
        }
    }
    let circles: Vec<_> = if opts.show_circles { doc.circles.iter().collect() } else { vec![] };
    let points: Vec<_> = if opts.show_points { points } else { vec![] };
    let triangles: Vec<_> = if opts.show_triangles {
        fields.iter().flat_map(|((tag, _), f)| image_triangles(f).into_iter().map(move |(_, t)| (*tag, t))).collect()
    } else {
        vec![]
    };
    for c in &circles {
        bb.add(Complex64::new(c.center_re, c.center_im), c.radius);
    }
    for (_, t) in &triangles {
        for z in t {
            bb.add(*z, 0.0);
        }
    }
    if bb.is_empty() {
        return Err(Error::NothingToRender);
    }
    let size = (bb.hi.re - bb.lo.re).max(bb.hi.im - bb.lo.im).max(1e-9);
    let pad = opts.padding * size;
    let (x0, y0) = (bb.lo.re - pad, -bb.hi.im - pad);
    let (w, h) = (bb.hi.re - bb.lo.re + 2.0 * pad, bb.hi.im - bb.lo.im + 2.0 * pad);
    let sw = opts.stroke_width * size / 10.0;
    let marker = 2.0 * sw;

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{x0:.6} {y0:.6} {w:.6} {h:.6}\">"
    );
    let color = |t: crate::fgh::FieldTag| COLORS[match t.base() {
        crate::fgh::FieldTag::U => 0,
        crate::fgh::FieldTag::V => 1,
        _ => 2,
    }];
    if !triangles.is_empty() {
        let _ = writeln!(s, "<g fill=\"none\" stroke-width=\"{:.6}\" stroke-opacity=\"0.4\">", sw / 2.0);
        for (tag, t) in &triangles {
            let _ = writeln!(
                s,
                "<polygon stroke=\"{}\" points=\"{:.6},{:.6} {:.6},{:.6} {:.6},{:.6}\"/>",
                color(*tag),
                t[0].re,
                -t[0].im,
                t[1].re,
                -t[1].im,
                t[2].re,
                -t[2].im
            );
        }
        s.push_str("</g>\n");
    }
    if !circles.is_empty() {
        let _ = writeln!(s, "<g fill=\"none\" stroke-width=\"{sw:.6}\">");
        for c in &circles {
            let _ = writeln!(
                s,
                "<circle stroke=\"{}\" cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\"/>",
                color(c.field),
                c.center_re,
                -c.center_im,
                c.radius
            );
        }
        s.push_str("</g>\n");
    }
    if !points.is_empty() {
        s.push_str("<g stroke=\"none\">\n");
        for (tag, z) in &points {
            let _ = writeln!(
                s,
                "<rect fill=\"{}\" x=\"{:.6}\" y=\"{:.6}\" width=\"{marker:.6}\" height=\"{marker:.6}\"/>",
                color(*tag),
                z.re - marker / 2.0,
                -z.im - marker / 2.0
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}
