use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use carpet_dim::boxcount::{self, BoxCountEstimate};
use carpet_dim::conditions::{condition_report, ConditionOptions, ConditionReport, SeparationCheck};
use carpet_dim::dimension::{dimension_report, DimensionReport, Equality};
use carpet_dim::gallery::{self, GalleryBuild};
use carpet_dim::json::to_stable_string;
use carpet_dim::render::{self, ChunkPlan, RasterInput, DEFAULT_CHUNK};
use carpet_dim::uplift::{uplift_dimension, uplift_skew_bounds, UpliftSpec, UpliftSystem};
use carpet_dim::{Error, SystemSpec, TglSystem};

/// Like `std::println!`, but a closed stdout (e.g. `| head`) ends the
/// process quietly instead of panicking.
macro_rules! println {
    ($($t:tt)*) => {{
        use std::io::Write;
        if writeln!(std::io::stdout(), $($t)*).is_err() {
            std::process::exit(0);
        }
    }};
}

/// Dimensions, separation conditions and renderings of triangular
/// Gatzouras–Lalley-type self-affine carpets.
///
/// Exit codes: 0 success, 2 validation failure, 3 numeric failure,
/// 4 I/O failure, 64 usage error. The worker count can be capped with
/// CARPET_DIM_THREADS.
#[derive(Parser, Debug)]
#[command(name = "carpet-dim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the structural axioms of a system file.
    Validate {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Hausdorff, box and affinity dimension quantities.
    Dims {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Separation and overlap conditions.
    Check {
        file: PathBuf,
        /// Depth of the exact-overlap scan of the column IFS.
        #[arg(long, value_name = "N")]
        overlap_scan: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Render the attractor to a PGM (or PPM, by extension) image.
    Render(RenderArgs),
    /// Empirical box-counting dimension.
    Estimate(EstimateArgs),
    /// Build a gallery example.
    Example(ExampleArgs),
    /// Dimensions, conditions and an empirical estimate as one JSON document.
    Report {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        kmin: u32,
        #[arg(long, default_value_t = 10)]
        kmax: u32,
    },
    /// Dimension and skew bounds of a three-dimensional uplift file.
    Uplift {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct RenderArgs {
    file: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 512)]
    res: usize,
    #[arg(long, default_value_t = 1_000_000)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of chaos-game chunks; fixes the output independently of the
    /// thread count.
    #[arg(long)]
    chunks: Option<usize>,
    /// Render the cylinders of this depth instead of a point cloud.
    #[arg(long, value_name = "DEPTH")]
    cover: Option<usize>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 4)]
    kmin: u32,
    #[arg(long, default_value_t = 10)]
    kmax: u32,
    /// Estimate the dimension of the horizontal projection instead.
    #[arg(long)]
    projection: bool,
    /// Count cells hit by this many chaos-game points instead of cylinders.
    #[arg(long, value_name = "P")]
    points: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-scale counts as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ExampleArgs {
    /// One of: smiley, fm_carpet, fm_overlap, x_equiv_x, zipper, uplift_demo, mcmullen.
    name: String,
    #[arg(long = "param", value_name = "V", allow_negative_numbers = true)]
    params: Vec<f64>,
    /// Write the system (or uplift) in the JSON file format.
    #[arg(long, value_name = "FILE")]
    export: Option<PathBuf>,
    /// Compute dimensions, conditions and an estimate and compare with the
    /// reference values.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 64 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|()| run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("CARPET_DIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Usage(format!("CARPET_DIM_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Usage(e.to_string()))
}

fn load(file: &PathBuf) -> Result<TglSystem, Error> {
    Ok(SystemSpec::load(file)?.validate()?)
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Validate { file, json } => validate(&file, json),
        Command::Dims { file, json } => {
            let r = dimension_report(&load(&file)?)?;
            if json {
                println!("{}", to_stable_string(&r));
            } else {
                print_dims(&r);
            }
            Ok(())
        }
        Command::Check { file, overlap_scan, json } => {
            let r = condition_report(&load(&file)?, &ConditionOptions { overlap_scan })?;
            if json {
                println!("{}", to_stable_string(&r));
            } else {
                print_conditions(&r);
            }
            Ok(())
        }
        Command::Render(args) => render_cmd(args),
        Command::Estimate(args) => estimate_cmd(args),
        Command::Example(args) => example_cmd(args),
        Command::Report { file, kmin, kmax } => {
            let sys = load(&file)?;
            let doc = json!({
                "dimensions": dimension_report(&sys)?,
                "conditions": condition_report(&sys, &ConditionOptions::default())?,
                "estimate": boxcount::empirical_box_dimension(&sys, kmin, kmax)?,
            });
            println!("{}", to_stable_string(&doc));
            Ok(())
        }
        Command::Uplift { file, json } => {
            let u = UpliftSpec::load(&file)?.validate()?;
            uplift_cmd(&u, json)
        }
    }
}

fn validate(file: &PathBuf, json: bool) -> Result<(), Error> {
    let sys = load(file)?;
    let f = sys.flags();
    if json {
        let doc = json!({
            "valid": true,
            "class": sys.class(),
            "maps": sys.len(),
            "columns": sys.partition().sizes(),
            "flags": f,
            "warnings": sys.warnings(),
        });
        println!("{}", to_stable_string(&doc));
    } else {
        println!("valid {} system: {} maps in {} columns {:?}", sys.class(), sys.len(), sys.columns(), sys.partition().sizes());
        println!("diagonally_homogeneous = {}", f.diagonally_homogeneous);
        println!("uniform_vertical_fibres = {}", f.uniform_vertical_fibres);
        println!("has_negative_entries = {}", f.has_negative_entries);
        for w in sys.warnings() {
            println!("warning: {w}");
        }
    }
    Ok(())
}

/// Six decimals, truncated rather than rounded, so that printed digits
/// are digits of the value. Values within 1e-9 of the next step count as
/// reaching it.
struct D(f64);

impl std::fmt::Display for D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let x = self.0;
        if !x.is_finite() {
            return write!(f, "{x}");
        }
        let t = (x * 1e6 + 1e-3 * x.signum()).trunc() / 1e6;
        write!(f, "{:.6}", if t == 0.0 { 0.0 } else { t })
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{}", D(*x))).collect();
    format!("[{}]", parts.join(", "))
}

/// Tolerance in `1e-06` style.
fn fmt_tol(t: f64) -> String {
    let s = format!("{t:e}");
    match s.split_once('e') {
        Some((m, e)) => {
            let (sign, digits) = e.strip_prefix('-').map_or(("+", e), |d| ("-", d));
            format!("{m}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

fn print_dims(r: &DimensionReport) {
    println!("alpha_star = {}", D(r.alpha_star));
    println!("p_star = {}", fmt_vec(&r.p_star));
    println!("s = {}", D(r.s));
    println!("s_A = {}", D(r.s_a));
    println!("s_H = {}", D(r.s_h));
    println!("s_x = {}", D(r.s_x));
    println!("s_tilde_x = {}", D(r.s_tilde_x));
    println!("h = {}, chi1 = {}, chi2 = {}", D(r.h), D(r.chi1), D(r.chi2));
    println!("uniform_vertical_fibres = {}", r.uniform_vertical_fibres);
    println!("equal_HB = {}", r.equal_hb);
    println!("equal_B_Aff = {}", r.equal_b_aff);
    for a in &r.assumptions {
        println!("assumption: {a}");
    }
}

fn sep(c: &SeparationCheck) -> String {
    match c.witness {
        Some([i, j]) => format!("{} (maps {i}, {j})", c.verdict),
        None => c.verdict.to_string(),
    }
}

fn print_conditions(r: &ConditionReport) {
    println!("rosc = {}", sep(&r.rosc));
    println!("columnwise_rosc = {}", sep(&r.columnwise_rosc));
    let t = &r.transversality;
    match t.margin {
        Some(m) => println!("transversality_sufficient = {} (margin {})", t.verdict, D(m)),
        None => println!("transversality_sufficient = {} (no overlapping pairs)", t.verdict),
    }
    for (name, c) in [("cond_main", &r.cond_main), ("cond_box", &r.cond_box)] {
        println!("{name} = {} (lhs {}, rhs {}, margin {})", c.holds, D(c.lhs), D(c.rhs), D(c.margin));
    }
    if let Some(x0) = r.x0 {
        println!("x0 = {}", D(x0));
    }
    if let Some(scan) = &r.exact_overlap {
        match &scan.found {
            Some(o) => println!("exact_overlap = found at n = {}: {:?} = {:?}", o.n, o.words[0], o.words[1]),
            None => println!("exact_overlap = none up to n = {}", scan.n_max),
        }
    }
    let pairs: Vec<String> = r
        .overlap_pairs
        .iter()
        .enumerate()
        .flat_map(|(c, ps)| ps.iter().map(move |[i, j]| format!("col {}: ({i}, {j})", c + 1)))
        .collect();
    println!("overlap_pairs = [{}]", pairs.join(", "));
}

fn render_cmd(a: RenderArgs) -> Result<(), Error> {
    let sys = load(&a.file)?;
    let grid = match a.cover {
        Some(depth) => {
            let cyl = render::cylinder_cover_depth(&sys, depth)?;
            render::rasterize(RasterInput::Cylinders(&cyl), a.res)?
        }
        None => {
            render::check_resolution(a.res)?;
            let plan = match a.chunks {
                Some(c) => ChunkPlan::with_chunks(a.points, c),
                None => ChunkPlan::for_points(a.points, DEFAULT_CHUNK),
            };
            let pc = render::chaos_game_chunked(&sys, a.points, a.seed, None, plan)?;
            render::rasterize(RasterInput::Points(&pc.points), a.res)?
        }
    };
    render::write_image(&grid, &a.out)?;
    println!("wrote {} ({}x{}, {} occupied cells)", a.out.display(), a.res, a.res, grid.occupied());
    Ok(())
}

fn estimate_cmd(a: EstimateArgs) -> Result<(), Error> {
    let sys = load(&a.file)?;
    let e = if a.projection {
        boxcount::empirical_projection_dimension(&sys, a.kmin, a.kmax)?
    } else if let Some(n) = a.points {
        let pc = render::chaos_game(&sys, n, a.seed, None)?;
        boxcount::point_cloud_box_dimension(&pc.points, a.kmin, a.kmax)?
    } else {
        boxcount::empirical_box_dimension(&sys, a.kmin, a.kmax)?
    };
    if let Some(path) = &a.csv {
        std::fs::write(path, e.to_csv()).map_err(|err| Error::Io(format!("{}: {err}", path.display())))?;
    }
    if a.json {
        println!("{}", to_stable_string(&e));
    } else {
        print_estimate(&e);
    }
    Ok(())
}

fn print_estimate(e: &BoxCountEstimate) {
    for ((k, d), n) in e.k.iter().zip(&e.scales).zip(&e.counts) {
        println!("k = {k:>2}  delta = {d:.6e}  count = {n}");
    }
    println!("slope = {}, r2 = {}", D(e.slope), D(e.r2));
}

fn uplift_cmd(u: &UpliftSystem, json: bool) -> Result<(), Error> {
    let dim = uplift_dimension(u);
    let bounds = uplift_skew_bounds(u);
    if json {
        let doc = json!({
            "rosc3d": u.rosc3d(),
            "dimension": dim.as_ref().ok(),
            "dimension_error": dim.as_ref().err().map(|e| e.to_string()),
            "skew_bounds": bounds.as_ref().ok(),
            "skew_bounds_error": bounds.as_ref().err().map(|e| e.to_string()),
        });
        println!("{}", to_stable_string(&doc));
        return Ok(());
    }
    println!("rosc3d = {}", sep(u.rosc3d()));
    match dim {
        Ok(d) => {
            println!("dim = {}", D(d.value));
            println!("conditions_met = {}", d.conditions_met);
            if let Some(c) = d.caveat {
                println!("caveat: {c}");
            }
        }
        Err(e) => println!("dim: not available ({e})"),
    }
    match bounds {
        Ok(b) => println!(
            "K_x = {}, K_y = {}, K_z = {} (c = {}, r = {})",
            D(b.k_x),
            D(b.k_y),
            D(b.k_z),
            D(b.c),
            D(b.r)
        ),
        Err(e) => println!("skew bounds: not available ({e})"),
    }
    Ok(())
}

fn compare(g: &GalleryBuild, quantity: &str, value: f64) {
    if let Some(e) = g.expected(quantity) {
        let ok = (value - e.value).abs() <= e.tolerance;
        let verdict = if ok { "PASS: matches expected" } else { "FAIL: differs from expected" };
        println!("{quantity} = {} (expected {}) {verdict} within {}", D(value), D(e.value), fmt_tol(e.tolerance));
    }
}

fn example_cmd(a: ExampleArgs) -> Result<(), Error> {
    let g = gallery::build(&a.name, &a.params)?;
    if let Some(path) = &a.export {
        let text = match &g.uplift {
            Some(u) => u.to_json(),
            None => g.system.to_json(),
        };
        std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    if a.json {
        println!("{}", to_stable_string(&g));
    } else {
        println!("{} {:?}: {} maps, columns {:?}", g.name, g.params, g.system.maps.len(), g.system.columns);
        for n in &g.notes {
            println!("note: {n}");
        }
        for e in &g.expected {
            println!("expected {} = {} (tolerance {})", e.quantity, D(e.value), fmt_tol(e.tolerance));
        }
        if let Some(t) = &g.transversality {
            println!("transversality bound: K1 < {} (valid for a < {})", D(t.k1_bound), t.valid_below);
        }
    }
    if a.full {
        full_example(&g)?;
    }
    Ok(())
}

fn full_example(g: &GalleryBuild) -> Result<(), Error> {
    if let Some(spec) = &g.uplift {
        let u = spec.validate()?;
        println!("== uplift ==");
        uplift_cmd(&u, false)?;
        println!("== comparison ==");
        compare(g, "dim_uplift", uplift_dimension(&u)?.value);
        return Ok(());
    }
    if g.bespoke {
        println!("== comparison ==");
        println!("dimensions come from closed forms; the general pipeline does not apply");
        for e in &g.expected {
            println!("{} = {} (closed form)", e.quantity, D(e.value));
        }
        return Ok(());
    }
    let sys = g.system.validate()?;
    let dims = dimension_report(&sys)?;
    println!("== dimensions ==");
    print_dims(&dims);
    println!("== conditions ==");
    print_conditions(&condition_report(&sys, &ConditionOptions::default())?);
    println!("== empirical box counting ==");
    print_estimate(&boxcount::empirical_box_dimension(&sys, 4, 10)?);
    println!("== comparison ==");
    compare(g, "dim_H", dims.alpha_star);
    compare(g, "dim_B", dims.s);
    compare(g, "dim_Aff", dims.s_a);
    if dims.equal_hb == Equality::Unknown {
        println!("note: equalities with the true dimensions are not certified for these parameters");
    }
    Ok(())
}
