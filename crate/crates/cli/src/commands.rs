use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use polyagglo::agglomeration::{
    build_polytopal_mesh, build_rtree_hierarchy, extract_leaves, graph_partition_baseline, hierarchy_from_partition,
    import_partition, load_hierarchy, serialize_hierarchy, AgglomerateHierarchy, Partition, Strategy,
};
use polyagglo::dg::{
    assemble, build_space, compute_errors, error_table_csv, observed_order, solve_direct, solve_on_partition,
    ConstantData, ErrorRow, Family, ManufacturedCase,
};
use polyagglo::mesh::{write_vtk, BackgroundMesh};
use polyagglo::metrics::{metrics_report, sig6};
use polyagglo::multigrid::{build_mg, build_mg_levels, cg, mg_study_csv, CgOptions, MgParams, MgStudyRow};
use polyagglo::spatial_index::{build_mesh_tree, TreeOrder};

use crate::args::{DiscOpts, LevelOpts, MeshOpts, Order, SolverKind, SolverOpts};
use crate::source::{GenSpec, MeshSource};

pub struct Built {
    pub mesh: BackgroundMesh,
    pub hierarchy: AgglomerateHierarchy,
    /// Named phases with their wall-clock time.
    pub phases: Vec<(&'static str, Duration)>,
}

fn tree_order(order: Option<Order>, dim: usize) -> Result<TreeOrder> {
    Ok(match order {
        Some(o) => TreeOrder::new(o.min, o.max)?,
        None => TreeOrder::default_for_dim(dim),
    })
}

pub fn load_mesh(opts: &MeshOpts) -> Result<BackgroundMesh> {
    let source = match (&opts.gen, &opts.mesh) {
        (Some(g), None) => MeshSource::Gen(g.clone()),
        (None, Some(p)) => MeshSource::File(p.clone()),
        _ => bail!("give exactly one of --gen or --mesh"),
    };
    source.load()
}

/// R-tree agglomeration split into the three timed phases: tree build,
/// hierarchy visit and element flagging.
fn rtree_phases(mesh: &BackgroundMesh, order: TreeOrder) -> Result<(AgglomerateHierarchy, Vec<(&'static str, Duration)>)> {
    let t = Instant::now();
    let tree = build_mesh_tree(mesh, order)?;
    let build = t.elapsed();
    let t = Instant::now();
    let nodes = (0..tree.height()).map(|d| tree.nodes_at_depth(d)).collect::<polyagglo::Result<Vec<_>>>()?;
    let visit = t.elapsed();
    let t = Instant::now();
    let mut levels = Vec::with_capacity(nodes.len());
    for depth in nodes.iter().rev() {
        let groups: Vec<Vec<usize>> = depth.iter().map(|&n| extract_leaves(&tree, n)).collect();
        levels.push(Partition::from_groups(&groups, mesh.n_cells())?);
    }
    let hierarchy = AgglomerateHierarchy::from_levels(levels, Strategy::Rtree)?;
    let flag = t.elapsed();
    Ok((hierarchy, vec![("build_tree", build), ("visit_hierarchy", visit), ("flag_elements", flag)]))
}

pub fn build(opts: &MeshOpts) -> Result<Built> {
    let mesh = load_mesh(opts)?;
    let hierarchy_and_phases = agglomerate(&mesh, opts)?;
    Ok(Built {
        mesh,
        hierarchy: hierarchy_and_phases.0,
        phases: hierarchy_and_phases.1,
    })
}

fn agglomerate(mesh: &BackgroundMesh, opts: &MeshOpts) -> Result<(AgglomerateHierarchy, Vec<(&'static str, Duration)>)> {
    let t = Instant::now();
    if let Some(path) = &opts.hierarchy {
        let h = load_hierarchy(path, mesh).with_context(|| format!("cannot load hierarchy {}", path.display()))?;
        return Ok((h, vec![("load", t.elapsed())]));
    }
    match opts.strategy {
        Strategy::Rtree if opts.by_material => {
            let h = build_rtree_hierarchy(mesh, tree_order(opts.order, mesh.dim())?, true)?;
            Ok((h, vec![("agglomerate_by_material", t.elapsed())]))
        }
        Strategy::Rtree => rtree_phases(mesh, tree_order(opts.order, mesh.dim())?),
        Strategy::Graph => {
            let parts = opts.parts.ok_or_else(|| anyhow!("the graph strategy needs --parts"))?;
            let p = graph_partition_baseline(mesh, parts, opts.seed)?;
            Ok((hierarchy_from_partition(p, Strategy::Graph)?, vec![("partition", t.elapsed())]))
        }
        Strategy::External => {
            let path = opts.partition.as_ref().ok_or_else(|| anyhow!("the external strategy needs --partition"))?;
            let p = import_partition(path, mesh.n_cells(), opts.parts)
                .with_context(|| format!("cannot import partition {}", path.display()))?;
            Ok((hierarchy_from_partition(p, Strategy::External)?, vec![("import", t.elapsed())]))
        }
    }
}

pub fn select_level(h: &AgglomerateHierarchy, opts: &LevelOpts) -> Result<usize> {
    match (opts.level, opts.agglomerates) {
        (Some(l), _) if l >= h.n_levels() => bail!("level {l} out of range (hierarchy has {} levels)", h.n_levels()),
        (Some(l), _) => Ok(l),
        (None, Some(n)) => h
            .sizes()
            .iter()
            .position(|&s| s == n)
            .ok_or_else(|| anyhow!("no level with {n} agglomerates (sizes {:?})", h.sizes())),
        (None, None) => Ok(usize::from(h.n_levels() > 1)),
    }
}

fn write_file(out: &Path, name: &str, contents: &str) -> Result<()> {
    let path = out.join(name);
    std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))
}

fn ids_as_f64(p: &Partition) -> Vec<f64> {
    p.assignment().iter().map(|&a| a as f64).collect()
}

pub fn cmd_agglomerate(opts: &MeshOpts, no_vtk: bool, out: &Path) -> Result<()> {
    let b = build(opts)?;
    ensure_dir(out)?;
    serialize_hierarchy(&b.hierarchy, &b.mesh, &out.join("hierarchy.json"))?;
    println!("strategy {}  cells {}", b.hierarchy.strategy(), b.mesh.n_cells());
    println!("level  agglomerates");
    for (l, n) in b.hierarchy.sizes().iter().enumerate() {
        println!("{l:>5}  {n}");
    }
    for (name, d) in &b.phases {
        println!("{name}: {} s", sig6(d.as_secs_f64()));
    }
    if !no_vtk {
        let material: Option<Vec<f64>> = b.mesh.material().map(|m| m.iter().map(|&x| x as f64).collect());
        for l in 0..b.hierarchy.n_levels() {
            let ids = ids_as_f64(b.hierarchy.level(l));
            let mut arrays: Vec<(&str, &[f64])> = vec![("agglomerate", &ids)];
            if let Some(m) = &material {
                arrays.push(("material", m));
            }
            write_vtk(&b.mesh, &arrays, out.join(format!("level_{l}.vtk")))?;
        }
    }
    Ok(())
}

pub fn cmd_metrics(opts: &MeshOpts, level: &LevelOpts, out: &Path) -> Result<()> {
    let b = build(opts)?;
    let l = select_level(&b.hierarchy, level)?;
    let poly = build_polytopal_mesh(&b.mesh, b.hierarchy.level(l))?;
    let report = metrics_report(&b.mesh, &poly)?;
    ensure_dir(out)?;
    let name = format!("metrics_{}_level{l}.csv", b.hierarchy.strategy());
    write_file(out, &name, &report.to_csv())?;
    println!("level {l}: {} agglomerates", report.n_agglomerates);
    if report.n_disconnected > 0 {
        println!("disconnected agglomerates: {}", report.n_disconnected);
    }
    println!(
        "min  UF {} CR {} BR {}",
        sig6(report.uf.min),
        sig6(report.cr.min),
        sig6(report.br.min)
    );
    println!(
        "max  UF {} CR {} BR {}",
        sig6(report.uf.max),
        sig6(report.cr.max),
        sig6(report.br.max)
    );
    println!("{}", report.summary_line());
    Ok(())
}

pub fn cmd_solve(opts: &MeshOpts, level: &LevelOpts, disc: &DiscOpts, p: usize, solver: &SolverOpts, out: &Path) -> Result<()> {
    let b = build(opts)?;
    let l = select_level(&b.hierarchy, level)?;
    let case = ManufacturedCase::new(b.mesh.dim())?;
    let family: Family = disc.family.into();
    let report = |space: &polyagglo::dg::DgSpace, x: &[f64]| -> Result<Vec<f64>> {
        let (l2, h1) = compute_errors(&b.mesh, space, x, &case)?;
        println!("level {l}: {} agglomerates, {family} p={p}", space.n_agglomerates());
        println!("dofs {}", space.n_dofs());
        println!("l2 {}", sig6(l2));
        println!("h1semi {}", sig6(h1));
        Ok(space.cell_center_values(&b.mesh, x))
    };
    let uh = match solver.solver {
        SolverKind::Direct => {
            let space = build_space(&b.mesh, build_polytopal_mesh(&b.mesh, b.hierarchy.level(l))?, p, family)?;
            let system = assemble(&b.mesh, &space, &case, disc.c_sigma)?;
            let x = solve_direct(&system)?;
            report(&space, &x)?
        }
        SolverKind::R3mg => {
            let last = (l + solver.mg_levels.max(1)).min(b.hierarchy.n_levels()) - 1;
            let levels: Vec<usize> = (l..=last).collect();
            let mg = build_mg_levels(&b.mesh, &b.hierarchy, &levels, p, family, &case, disc.c_sigma, &MgParams::default())?;
            let outcome = mg.solve(&CgOptions::default())?;
            println!("pcg iterations {} (level dofs {:?})", outcome.iterations, mg.level_dofs());
            report(&mg.finest().space, &outcome.x)?
        }
    };
    ensure_dir(out)?;
    let ids = ids_as_f64(b.hierarchy.level(l));
    write_vtk(&b.mesh, &[("uh", &uh), ("agglomerate", &ids)], out.join("solution.vtk"))?;
    Ok(())
}

pub fn study_p_convergence(opts: &MeshOpts, level: &LevelOpts, disc: &DiscOpts, degrees: &[usize], out: &Path) -> Result<()> {
    let b = build(opts)?;
    let l = select_level(&b.hierarchy, level)?;
    let case = ManufacturedCase::new(b.mesh.dim())?;
    let mut rows = Vec::new();
    for &p in degrees {
        let (space, x) = solve_on_partition(&b.mesh, b.hierarchy.level(l), p, disc.family.into(), &case, disc.c_sigma)?;
        let (l2, h1semi) = compute_errors(&b.mesh, &space, &x, &case)?;
        println!("p {p}  dofs {}  l2 {}  h1semi {}", space.n_dofs(), sig6(l2), sig6(h1semi));
        rows.push(ErrorRow {
            p,
            dofs: space.n_dofs(),
            l2,
            h1semi,
        });
    }
    ensure_dir(out)?;
    write_file(out, "p_convergence.csv", &error_table_csv(&rows))
}

#[allow(clippy::too_many_arguments)]
pub fn study_h_convergence(
    gen: &GenSpec,
    refinements: usize,
    cells_per_agglomerate: usize,
    order: Option<Order>,
    disc: &DiscOpts,
    degrees: &[usize],
    out: &Path,
) -> Result<()> {
    if refinements < 2 {
        bail!("at least two meshes are needed for an observed order");
    }
    let mut meshes = Vec::new();
    let mut spec = gen.clone();
    for _ in 0..refinements {
        let mesh = spec.generate()?;
        let h = build_rtree_hierarchy(&mesh, tree_order(order, mesh.dim())?, false)?;
        let target = mesh.n_cells() / cells_per_agglomerate.max(1);
        let l = h
            .sizes()
            .iter()
            .position(|&s| s == target && mesh.n_cells() % cells_per_agglomerate == 0)
            .ok_or_else(|| anyhow!("{spec}: no level with {cells_per_agglomerate} cells per agglomerate (sizes {:?})", h.sizes()))?;
        meshes.push((mesh, h.level(l).clone()));
        spec = spec.refined();
    }
    let mut csv = String::from("p,h,dofs,l2,h1semi\n");
    let mut orders = String::from("p,order_l2,order_h1semi\n");
    for &p in degrees {
        let (mut hs, mut l2s, mut h1s) = (Vec::new(), Vec::new(), Vec::new());
        for (mesh, part) in &meshes {
            let case = ManufacturedCase::new(mesh.dim())?;
            let (space, x) = solve_on_partition(mesh, part, p, disc.family.into(), &case, disc.c_sigma)?;
            let (l2, h1) = compute_errors(mesh, &space, &x, &case)?;
            let h = space.poly().h_max();
            let _ = writeln!(csv, "{p},{h},{},{l2},{h1}", space.n_dofs());
            hs.push(h);
            l2s.push(l2);
            h1s.push(h1);
        }
        let (ol2, oh1) = (observed_order(&hs, &l2s), observed_order(&hs, &h1s));
        println!("p {p}  L2 order {}  H1 order {}", sig6(ol2), sig6(oh1));
        let _ = writeln!(orders, "{p},{ol2},{oh1}");
    }
    ensure_dir(out)?;
    write_file(out, "h_convergence.csv", &csv)?;
    write_file(out, "h_convergence_orders.csv", &orders)
}

pub fn study_mg_levels(opts: &MeshOpts, disc: &DiscOpts, p: usize, levels: &[usize], plain_cg: bool, out: &Path) -> Result<()> {
    let b = build(opts)?;
    let data = ConstantData { f: 1.0, g: 0.0 };
    let cg_opts = CgOptions::default();
    let mut rows = Vec::new();
    let mut plain = None;
    for &n in levels {
        let mg = build_mg(&b.mesh, &b.hierarchy, p, disc.family.into(), &data, disc.c_sigma, n, &MgParams::default())?;
        let iters = mg.solve(&cg_opts)?.iterations;
        if plain.is_none() {
            plain = Some(if plain_cg {
                cg(&mg.finest().matrix, mg.rhs(), &cg_opts)?.iterations
            } else {
                0
            });
        }
        let row = MgStudyRow {
            levels: n,
            p,
            dofs_finest: mg.finest().n_dofs(),
            iters_pcg: iters,
            iters_plain_cg: plain.unwrap(),
        };
        println!("levels {n}  dofs {:?}  pcg {iters}  cg {}", mg.level_dofs(), row.iters_plain_cg);
        rows.push(row);
    }
    ensure_dir(out)?;
    write_file(out, "mg_levels.csv", &mg_study_csv(&rows))
}

pub fn study_timing(opts: &MeshOpts, repeat: usize, out: &Path) -> Result<()> {
    let mesh = load_mesh(opts)?;
    let mut csv = String::from("strategy,n_cells,run,phase,seconds\n");
    for run in 0..repeat.max(1) {
        let (h, phases) = agglomerate(&mesh, opts)?;
        let total: f64 = phases.iter().map(|(_, d)| d.as_secs_f64()).sum();
        for (name, d) in &phases {
            let _ = writeln!(csv, "{},{},{run},{name},{}", h.strategy(), mesh.n_cells(), d.as_secs_f64());
        }
        println!("run {run}: {} s ({} levels)", sig6(total), h.n_levels());
    }
    ensure_dir(out)?;
    write_file(out, "timing.csv", &csv)
}
