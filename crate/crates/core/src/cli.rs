//! The `hexcircles` command line.

use crate::fgh::{FieldTag, VertexField};
use crate::io::{load_json, render_svg, save_json, PatternDocument, RenderOptions};
use crate::isomonodromic::{
    audit_iso_equations, axis_solve, closed_form_axis, Axis, AxisSequences, ConstraintParams, LimitCase,
};
use crate::lattice::{sector_points, Triangle};
use crate::lax::{quadratic_forms, sym_extract, triangle_triples, wave_field, zero_curvature_at};
use crate::patterns::{
    assemble_full_plane, generate_limit_pattern, generate_zalpha, generate_zalpha_theta, verify_pattern, PatternKind,
};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "hexcircles", about = "Hexagonal circle patterns with multi-ratio -1")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    U,
    V,
    W,
    All,
}

impl FieldArg {
    fn tags(self) -> Vec<FieldTag> {
        match self {
            FieldArg::U => vec![FieldTag::U],
            FieldArg::V => vec![FieldTag::V],
            FieldArg::W => vec![FieldTag::W],
            FieldArg::All => vec![FieldTag::U, FieldTag::V, FieldTag::W],
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a pattern and write it as JSON and/or SVG.
    Generate {
        #[arg(long)]
        pattern: PatternKind,
        #[arg(long)]
        alpha: Option<f64>,
        /// Defaults to 2 pi alpha.
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = 12)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = FieldArg::All)]
        field: FieldArg,
        /// Attach rotated copies of the sector (rational alpha only).
        #[arg(long)]
        assemble: bool,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Recheck a saved pattern.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Also run the quadratic embedding check.
        #[arg(long)]
        embedding: bool,
    },
    /// Solve the constrained recurrence along the k-axis.
    Axis {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 30)]
        kmax: usize,
        #[arg(long)]
        compare_closed_form: bool,
    },
    /// Zero curvature, Sym formula and isomonodromy residuals of a generated solution.
    Laxcheck {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 8)]
        levels: usize,
    },
    /// Draw a saved pattern.
    Render {
        file: PathBuf,
        #[arg(long)]
        svg: PathBuf,
        #[arg(long)]
        no_circles: bool,
        #[arg(long)]
        no_points: bool,
        #[arg(long)]
        triangles: bool,
        #[arg(long, default_value_t = 0.01)]
        stroke_width: f64,
        #[arg(long, default_value_t = 0.05)]
        padding: f64,
    },
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::AlphaOutOfRange(_) | crate::Error::NotRational(_) | crate::Error::SectorTooSmall(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::Check(format!("cannot write {}: {e}", path.display())))
}

fn read_doc(path: &PathBuf) -> Result<PatternDocument, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    load_json(&bytes).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Runs the command line `argv` (program name first) and returns the exit code:
/// 0 on success, 1 when a check fails, 2 on a usage error.
pub fn cli_main(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Generate { pattern, alpha, theta, levels, field, assemble, json, svg, tol } => {
            let g = match pattern {
                PatternKind::Zalpha => {
                    let alpha = alpha.ok_or_else(|| Failure::Usage("--alpha is required for zalpha".into()))?;
                    match theta {
                        Some(t) => generate_zalpha_theta(alpha, t, levels)?,
                        None => generate_zalpha(alpha, levels)?,
                    }
                }
                PatternKind::Z32Log => generate_limit_pattern(LimitCase::Half, levels)?,
                PatternKind::LogZ3 => generate_limit_pattern(LimitCase::Zero, levels)?,
            };
            let tags = field.tags();
            let doc = if assemble {
                let asm = tags.iter().map(|t| assemble_full_plane(&g, *t)).collect::<crate::Result<Vec<_>>>()?;
                PatternDocument::from_assemblies(&g, &asm)
            } else {
                PatternDocument::from_generated(&g, &tags)
            };
            if let Some(p) = &json {
                write_file(p, &save_json(&doc))?;
            }
            if let Some(p) = &svg {
                write_file(p, render_svg(&doc, &RenderOptions::default())?.as_bytes())?;
            }
            let report = doc.report.as_ref().expect("generated documents carry a report");
            println!("pattern {} n={} fields={}", pattern.as_str(), levels, tags.len());
            println!("vertices {} circles {} copies {}", doc.vertices.len(), doc.circles.len(), doc.metadata.copies);
            println!("max |MR + 1| {:e}", report.max_mr);
            println!("max circularity deviation {:e}", report.max_circularity);
            println!("immersed {}", report.immersed);
            if report.max_mr > tol || report.max_circularity > tol {
                return Err(Failure::Check(format!("verification above tolerance {tol:e}")));
            }
            Ok(())
        }
        Command::Verify { file, tol, embedding } => {
            let doc = read_doc(&file)?;
            let fields = doc.fields();
            let refs: Vec<&VertexField> = fields.values().collect();
            let report = verify_pattern(&refs, embedding);
            let stored = doc.stored_circle_deviation();
            for f in &report.fields {
                println!(
                    "field {} hexagons {} max |MR + 1| {:e} circles {} circularity {:e} immersed {}",
                    f.tag,
                    f.mr.hexagons,
                    f.mr.max(),
                    f.circles,
                    f.circularity,
                    f.immersion.ok
                );
            }
            println!("stored circles deviation {stored:e}");
            if let Some(e) = report.embedded {
                println!("embedded {e}");
            }
            let ok = report.max_mr <= tol && report.max_circularity <= tol && stored <= tol;
            println!("{}", if ok { "OK" } else { "FAILED" });
            if ok {
                Ok(())
            } else {
                Err(Failure::Check(format!("verification above tolerance {tol:e}")))
            }
        }
        Command::Axis { alpha, beta, kmax, compare_closed_form } => {
            let beta = beta.unwrap_or(alpha);
            let one = Complex64::new(1.0, 0.0);
            let s = axis_solve(&ConstraintParams::real(alpha, beta), one, one, kmax, Axis::K)?;
            println!("{:>4} {:>24} {:>24} {:>24}", "k", "u", "v", "w");
            for k in 0..=kmax {
                println!("{k:>4} {:>24.16e} {:>24.16e} {:>24.16e}", s.u[k].re, s.v[k].re, s.w[k].re);
            }
            if compare_closed_form {
                if beta != alpha {
                    return Err(Failure::Usage("--compare-closed-form needs beta = alpha".into()));
                }
                let cf = closed_form_axis(alpha, kmax)?;
                let err = max_relative_error(&s, &cf);
                println!("max relative error {err:e}");
                if err >= 1e-10 {
                    return Err(Failure::Check("closed form disagrees with the recurrence".into()));
                }
            }
            Ok(())
        }
        Command::Laxcheck { alpha, levels } => {
            let g = generate_zalpha(alpha, levels)?;
            let mus = [Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(-0.3, 0.2)];
            let mut zc: f64 = 0.0;
            for p in sector_points(levels) {
                for tri in [Triangle::up(p), Triangle::down(p)] {
                    if let Ok(t) = triangle_triples(&g.u, &g.v, &tri) {
                        zc = zc.max(zero_curvature_at(t, &mus));
                    }
                }
            }
            let psi = wave_field(&g.u, &g.v, crate::lattice::LatticePoint::ORIGIN)?;
            let (su, sv, sw) = sym_extract(&psi)?;
            let sym = su.max_difference(&g.u).max(sv.max_difference(&g.v)).max(sw.max_difference(&g.w));
            let forms = quadratic_forms(&g.u, &g.v, &g.w, crate::lattice::LatticePoint::ORIGIN)?;
            let window: Vec<_> = sector_points(levels).into_iter().filter(|p| p.k >= 2 && p.l >= 2).collect();
            let audit = audit_iso_equations(&g.u, &g.v, &forms, &ConstraintParams::symmetric(alpha), &window);
            println!("zero curvature {zc:e}");
            println!("sym formula {sym:e}");
            println!("quadratic forms closure {:e}", forms.closure);
            println!("isomonodromy audit {:e} over {} points", audit.max(), audit.points);
            if zc > 1e-10 || sym > 1e-9 || forms.closure > 1e-9 || audit.max() > 1e-8 {
                return Err(Failure::Check("Lax residuals above tolerance".into()));
            }
            Ok(())
        }
        Command::Render { file, svg, no_circles, no_points, triangles, stroke_width, padding } => {
            let doc = read_doc(&file)?;
            let opts = RenderOptions { show_circles: !no_circles, show_points: !no_points, show_triangles: triangles, stroke_width, padding };
            write_file(&svg, render_svg(&doc, &opts)?.as_bytes())
        }
    }
}

fn max_relative_error(a: &AxisSequences, b: &AxisSequences) -> f64 {
    let pairs = [(&a.u, &b.u), (&a.v, &b.v), (&a.w, &b.w), (&a.f, &b.f), (&a.g, &b.g), (&a.h, &b.h)];
    pairs
        .iter()
        .flat_map(|(x, y)| x.iter().zip(y.iter()).map(|(p, q)| (p - q).norm() / q.norm().max(1e-300)))
        .filter(|e| !e.is_nan())
        .fold(0.0, f64::max)
}
