// Command-line front end: network generation, partitioning, assumption
// diagnostics, single solves and the convergence/localization studies.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "netlod/harness.hpp"
#include "netlod/rng.hpp"

using namespace netlod;
using nlohmann::json;

namespace {

struct OperatorFlags {
  std::string kind = "wlap"; // wlap | stiffness | fem
  double alpha = 1.0;
  double weight_min = 0.1;
  double weight_max = 1.0;
  std::uint64_t weight_seed = 0;
  std::string kmat_path;
};

void add_operator_flags(CLI::App* cmd, OperatorFlags& op) {
  cmd->add_option("--operator", op.kind, "Operator kind: wlap | stiffness | fem")
      ->check(CLI::IsMember({"wlap", "stiffness", "fem"}));
  cmd->add_option("--alpha", op.alpha, "Length-scaling exponent in [0,2]");
  cmd->add_option("--weight-min", op.weight_min, "Lower bound of random edge weights");
  cmd->add_option("--weight-max", op.weight_max, "Upper bound of random edge weights");
  cmd->add_option("--weight-seed", op.weight_seed, "Seed for random edge weights");
  cmd->add_option("--kmat", op.kmat_path, "Matrix file for --operator fem");
}

SparseSymOperator make_operator(const SpatialNetwork& net, const OperatorFlags& op) {
  if (op.kind == "stiffness") return assemble_stiffness(net, op.alpha);
  if (op.kind == "wlap") {
    auto w = random_edge_weights(net, op.weight_min, op.weight_max, op.weight_seed);
    return assemble_weighted_laplacian(net, op.alpha, w);
  }
  if (op.kmat_path.empty())
    throw CLI::ValidationError("--operator fem requires --kmat");
  return SparseSymOperator(OperatorKind::FemAssembled, op.alpha, import_matrix(op.kmat_path));
}

json operator_json(const OperatorFlags& op) {
  json j;
  j["kind"] = op.kind;
  j["alpha"] = op.alpha;
  if (op.kind == "wlap") {
    j["weight_min"] = op.weight_min;
    j["weight_max"] = op.weight_max;
    j["weight_seed"] = op.weight_seed;
  }
  if (op.kind == "fem") j["kmat"] = op.kmat_path;
  return j;
}

json tolerances_json(const SolveTolerances& tol) {
  return json{{"corrector_rel", tol.corrector_rel},
              {"reference_rel", tol.reference_rel},
              {"spectral_rel", tol.spectral_rel},
              {"max_power_iterations", tol.max_power_iterations}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

json stats_json(const GeneratorStats& s) {
  json j;
  j["kind"] = s.kind;
  j["seed"] = s.seed;
  j["nodes"] = s.nodes;
  j["edges"] = s.edges;
  j["isoperimetric_dim"] = s.iso_dim;
  j["dropped_lines"] = s.dropped_lines;
  j["resampled_lines"] = s.resampled_lines;
  j["rng"] = s.rng_id;
  return j;
}

int cmd_generate(const std::string& kind, const FiberConfig& fiber, const CardboardConfig& cb,
                 const FemGridConfig& fem, const std::string& out_prefix) {
  json manifest;
  manifest["generator_version"] = "1";
  if (kind == "fiber") {
    FiberResult r = gen_fiber_network(fiber);
    r.net.save(out_prefix + ".net");
    manifest["config"] = {{"kind", "fiber"},
                          {"lines", fiber.n_lines},
                          {"length", fiber.line_length},
                          {"midpoint_min", fiber.midpoint_min},
                          {"midpoint_max", fiber.midpoint_max},
                          {"seed", fiber.seed},
                          {"subdivide_max_len", fiber.subdivide_max_len}};
    manifest["stats"] = stats_json(r.stats);
  } else if (kind == "cardboard") {
    FiberResult r = gen_cardboard(cb);
    r.net.save(out_prefix + ".net");
    manifest["config"] = {{"kind", "cardboard"},
                          {"lines", cb.layer.n_lines},
                          {"length", cb.layer.line_length},
                          {"seed", cb.layer.seed},
                          {"delta", cb.delta},
                          {"connect_radius", cb.connect_radius}};
    manifest["stats"] = stats_json(r.stats);
  } else {
    FemGridResult r = gen_fem_grid(fem);
    r.net.save(out_prefix + ".net");
    export_matrix(r.K.matrix(), out_prefix + ".kmat");
    manifest["config"] = {{"kind", "femgrid"},
                          {"m", fem.m},
                          {"seed", fem.seed},
                          {"coeff_min", fem.coeff_min},
                          {"coeff_max", fem.coeff_max},
                          {"unit_coefficient", fem.unit_coefficient}};
    manifest["stats"] = stats_json(r.stats);
    manifest["kmat"] = out_prefix + ".kmat";
  }
  write_text(out_prefix + ".manifest.json", manifest.dump(2) + "\n");
  std::cout << manifest["stats"].dump() << "\n";
  return 0;
}

int cmd_partition(const std::string& net_path, const std::vector<int>& counts, int iso_dim,
                  double alpha, std::optional<int> start, const std::string& out_prefix) {
  SpatialNetwork net = SpatialNetwork::load(net_path);
  SparseSymOperator mass = assemble_mass(net, alpha);
  SparseSymOperator stiff = assemble_stiffness(net, alpha);
  PartitionHierarchy h = build_hierarchy(net, counts, iso_dim, 0, start);
  for (const Partition& p : h.levels) {
    std::string base = out_prefix + ".N" + std::to_string(p.num_elements());
    {
      std::ofstream out(base + ".part");
      for (int x = 0; x < net.num_nodes(); ++x) out << x << ' ' << p.elem_of[x] << '\n';
    }
    PartitionDiagnostics d = diagnostics(net, p, mass, stiff);
    std::ofstream out(base + ".diag.csv");
    out << "element,H_T,mass,vol,C_po\n";
    char buf[128];
    for (int t = 0; t < p.num_elements(); ++t) {
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", t, p.H_T[t],
                    d.element_mass[t], d.vol[t], d.C_po[t]);
      out << buf;
    }
    std::printf("N=%d H=%.6g H_nominal=%.6g sigma=%.6g\n", p.num_elements(), p.H, p.H_nominal,
                d.sigma);
  }
  return 0;
}

int cmd_diagnose(const std::string& net_path, const std::vector<int>& counts, int iso_dim,
                 const OperatorFlags& op) {
  SpatialNetwork net = SpatialNetwork::load(net_path);
  SparseSymOperator mass = assemble_mass(net, op.alpha);
  SparseSymOperator stiff = assemble_stiffness(net, op.alpha);
  SparseSymOperator K = make_operator(net, op);

  double max_edge = 0.0;
  for (const auto& e : net.edges()) max_edge = std::max(max_edge, e.length);
  std::printf("nodes %d, edges %d, dirichlet %d, max edge length %.6g\n", net.num_nodes(),
              net.num_edges(), net.dirichlet_nodes().size(), max_edge);

  SpectralBounds sb = spectral_bounds_estimate(K, stiff, net.dirichlet_nodes());
  std::printf("spectral bounds vs stiffness: gamma=%.6g gamma'=%.6g%s\n", sb.gamma,
              sb.gamma_prime, sb.converged ? "" : " (not converged)");

  PartitionHierarchy h = build_hierarchy(net, counts, iso_dim, 0);
  double H_min = kInfiniteDistance;
  for (const Partition& p : h.levels) H_min = std::min(H_min, p.H);
  std::printf("hierarchy H_min (measured) = %.6g; locality max_edge <= H_min: %s\n", H_min,
              max_edge <= H_min ? "yes" : "NO");
  for (const Partition& p : h.levels) {
    PartitionDiagnostics d = diagnostics(net, p, mass, stiff);
    double cpo_max = 0.0;
    bool cpo_all = true;
    for (int t = 0; t < p.num_elements(); ++t) {
      if (d.C_po_ok[t])
        cpo_max = std::max(cpo_max, d.C_po[t]);
      else
        cpo_all = false;
    }
    std::printf("N=%4d H=%.6g H_nominal=%.6g sigma=%.6g max C_po=%.6g%s C_po/H=%.6g\n",
                p.num_elements(), p.H, p.H_nominal, d.sigma, cpo_max,
                cpo_all ? "" : " (some unavailable)", cpo_max / p.H_nominal);
  }
  return 0;
}

struct StudyFlags {
  std::string net_path;
  std::vector<int> counts;
  std::vector<int> ells{1, 2, 3};
  std::vector<std::string> variants{"stabilized"};
  std::string source = "g1";
  int iso_dim = 2;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_dir = ".";
  bool no_timings = false;
  OperatorFlags op;
  SolveTolerances tol;
};

void add_study_flags(CLI::App* cmd, StudyFlags& f) {
  cmd->add_option("--net", f.net_path, "Network file")->required();
  cmd->add_option("--counts", f.counts, "Partition sizes N")->required();
  cmd->add_option("--ell", f.ells, "Localization parameters");
  cmd->add_option("--variant", f.variants, "Basis variants: ideal | naive | stabilized");
  cmd->add_option("--source", f.source, "Source term: g1 | g2")
      ->check(CLI::IsMember({"g1", "g2"}));
  cmd->add_option("--d", f.iso_dim, "Isoperimetric dimension");
  cmd->add_option("--seed", f.seed, "Seed echoed into outputs");
  cmd->add_option("--workers", f.workers, "Worker threads for corrector solves");
  cmd->add_option("--out", f.out_dir, "Output directory");
  cmd->add_flag("--no-timings", f.no_timings, "Write zeros into the seconds column");
  cmd->add_option("--tol-corrector", f.tol.corrector_rel, "Corrector residual tolerance");
  cmd->add_option("--tol-reference", f.tol.reference_rel, "Reference-solve tolerance");
  cmd->add_option("--tol-spectral", f.tol.spectral_rel, "Spectral-estimate tolerance");
  add_operator_flags(cmd, f.op);
}

StudyConfig to_config(const StudyFlags& f) {
  StudyConfig cfg;
  cfg.counts = f.counts;
  cfg.ells = f.ells;
  for (const auto& v : f.variants) cfg.variants.push_back(variant_from_name(v));
  cfg.source = source_from_name(f.source);
  cfg.iso_dim = f.iso_dim;
  cfg.seed = f.seed;
  cfg.workers = f.workers;
  cfg.report_timings = !f.no_timings;
  cfg.tol = f.tol;
  return cfg;
}

json study_manifest(const StudyFlags& f, const SpatialNetwork& net, const char* study) {
  json j;
  j["study"] = study;
  j["net"] = f.net_path;
  j["nodes"] = net.num_nodes();
  j["edges"] = net.num_edges();
  j["counts"] = f.counts;
  j["ell"] = f.ells;
  j["variants"] = f.variants;
  j["source"] = f.source;
  j["isoperimetric_dim"] = f.iso_dim;
  j["seed"] = f.seed;
  j["workers"] = f.workers;
  j["operator"] = operator_json(f.op);
  j["tolerances"] = tolerances_json(f.tol);
  j["rng"] = Rng::kGeneratorId;
  return j;
}

int cmd_study(const StudyFlags& f, bool localization) {
  SpatialNetwork net = SpatialNetwork::load(f.net_path);
  SparseSymOperator K = make_operator(net, f.op);
  StudyConfig cfg = to_config(f);
  StudyResult result =
      localization ? run_localization_study(net, K, cfg) : run_convergence_study(net, K, cfg);

  std::filesystem::create_directories(f.out_dir);
  const char* name = localization ? "localization" : "convergence";
  std::string csv_path = f.out_dir + "/" + name + ".csv";
  write_study_csv(result, csv_path);

  json manifest = study_manifest(f, net, name);
  if (!localization) {
    json fits = json::array();
    for (const auto& fit : result.conv_fits)
      fits.push_back({{"ell", fit.ell},
                      {"variant", variant_name(fit.variant)},
                      {"slope", fit.slope},
                      {"points", fit.points_used}});
    manifest["slopes"] = fits;
  } else {
    json fits = json::array();
    for (const auto& fit : result.loc_fits)
      fits.push_back({{"N", fit.N},
                      {"variant", variant_name(fit.variant)},
                      {"mean_ratio", fit.mean_ratio},
                      {"points", fit.points_used}});
    manifest["decay"] = fits;
  }
  write_text(f.out_dir + "/" + name + ".manifest.json", manifest.dump(2) + "\n");

  std::cout << study_csv(result);
  for (const auto& row : result.rows)
    if (row.failed)
      std::cerr << "cell N=" << row.N << " ell=" << row.ell << " "
                << variant_name(row.variant) << " failed: " << row.note << "\n";
  std::cout << "wrote " << csv_path << "\n";
  return 0;
}

int cmd_solve(const StudyFlags& f, int N, int ell, const std::string& variant,
              const std::string& dump_dir) {
  SpatialNetwork net = SpatialNetwork::load(f.net_path);
  SparseSymOperator K = make_operator(net, f.op);
  SparseSymOperator mass = assemble_mass(net, K.alpha());
  Vec fvec = source_vector(net, mass, source_from_name(f.source));
  Vec u = reference_solve(K, fvec, net.dirichlet_nodes(), f.tol);

  int start = default_gonzalez_start(net);
  Partition partition = assign_to_centers(net, gonzalez_centers(net, N, start), f.iso_dim);
  CoarseSpace cs = build_coarse_space(net, partition, mass);
  BasisVariant var = variant_from_name(variant);
  int eff_ell = (var == BasisVariant::Ideal) ? kGlobalPatch : ell;
  MultiscaleBasis basis = build_basis(net, K, cs, var, eff_ell, f.tol, f.workers);
  GalerkinResult g = galerkin_solve(K, fvec, basis);
  double err = relative_error_K(K, u, g.u_H);
  std::printf("N=%d ell=%d variant=%s rel_err_K=%.12g coarse_dim=%d corrector_solves=%ld\n", N,
              eff_ell, variant.c_str(), err, N, basis.corrector_solves);
  if (!dump_dir.empty()) {
    std::filesystem::create_directories(dump_dir);
    dump_basis(basis, dump_dir + "/basis");
    char name[64];
    for (int t = 0; t < cs.num_elements(); ++t) {
      std::snprintf(name, sizeof(name), "%s/bubble_%03d.txt", dump_dir.c_str(), t);
      dump_local_vector(cs.bubbles[t], name);
      if (cs.pu) {
        std::snprintf(name, sizeof(name), "%s/lambda_%03d.txt", dump_dir.c_str(), t);
        dump_local_vector(cs.pu->lambda[t], name);
      }
    }
    std::printf("dumped coarse space and basis under %s\n", dump_dir.c_str());
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Algebraic multiscale solver for spatial network models"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a network file");
  std::string gen_kind = "fiber";
  FiberConfig fiber;
  CardboardConfig cardboard;
  FemGridConfig fem;
  std::string gen_out = "network";
  gen->add_option("--kind", gen_kind, "fiber | cardboard | femgrid")
      ->check(CLI::IsMember({"fiber", "cardboard", "femgrid"}));
  gen->add_option("--lines", fiber.n_lines, "Number of sampled lines");
  gen->add_option("--length", fiber.line_length, "Line length");
  gen->add_option("--seed", fiber.seed, "Generator seed");
  gen->add_option("--subdivide", fiber.subdivide_max_len,
                  "Split edges longer than this (0 = off)");
  gen->add_option("--delta", cardboard.delta, "Cardboard layer offset");
  gen->add_option("--connect-radius", cardboard.connect_radius,
                  "Cardboard inter-layer connection radius");
  gen->add_option("--m", fem.m, "FEM grid cells per side");
  gen->add_option("--coeff-min", fem.coeff_min, "FEM coefficient lower bound");
  gen->add_option("--coeff-max", fem.coeff_max, "FEM coefficient upper bound");
  gen->add_flag("--unit-coeff", fem.unit_coefficient, "Use a == 1 instead of random draws");
  gen->add_option("--out", gen_out, "Output prefix");

  // partition
  auto* part = app.add_subcommand("partition", "Partition a network and write diagnostics");
  std::string part_net, part_out = "partition";
  std::vector<int> part_counts;
  int part_d = 2;
  double part_alpha = 1.0;
  int part_start = -1;
  part->add_option("--net", part_net, "Network file")->required();
  part->add_option("--counts", part_counts, "Partition sizes")->required();
  part->add_option("--d", part_d, "Isoperimetric dimension");
  part->add_option("--alpha", part_alpha, "Alpha for the diagnostic operators");
  part->add_option("--start", part_start, "Gonzalez start node (default: policy)");
  part->add_option("--out", part_out, "Output prefix");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "Assumption diagnostics for a network");
  std::string diag_net;
  std::vector<int> diag_counts{25, 50, 100};
  int diag_d = 2;
  OperatorFlags diag_op;
  diag->add_option("--net", diag_net, "Network file")->required();
  diag->add_option("--counts", diag_counts, "Partition sizes");
  diag->add_option("--d", diag_d, "Isoperimetric dimension");
  add_operator_flags(diag, diag_op);

  // solve
  auto* solve = app.add_subcommand("solve", "Single coarse solve, prints the relative error");
  StudyFlags solve_flags;
  int solve_N = 64, solve_ell = 2;
  std::string solve_variant = "stabilized";
  std::string solve_dump;
  solve->add_option("--net", solve_flags.net_path, "Network file")->required();
  solve->add_option("--N", solve_N, "Partition size")->required();
  solve->add_option("--ell", solve_ell, "Localization parameter");
  solve->add_option("--variant", solve_variant, "ideal | naive | stabilized");
  solve->add_option("--source", solve_flags.source, "g1 | g2");
  solve->add_option("--d", solve_flags.iso_dim, "Isoperimetric dimension");
  solve->add_option("--workers", solve_flags.workers, "Worker threads");
  solve->add_option("--dump", solve_dump, "Directory for bubble/PU/basis dumps");
  add_operator_flags(solve, solve_flags.op);

  // convergence / localization
  auto* conv = app.add_subcommand("convergence", "Error-vs-H study, writes CSV + manifest");
  StudyFlags conv_flags;
  add_study_flags(conv, conv_flags);
  auto* loc = app.add_subcommand("localization", "Error-vs-ell study, writes CSV + manifest");
  StudyFlags loc_flags;
  add_study_flags(loc, loc_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      cardboard.layer = fiber;
      return cmd_generate(gen_kind, fiber, cardboard, fem, gen_out);
    }
    if (part->parsed())
      return cmd_partition(part_net, part_counts, part_d, part_alpha,
                           part_start >= 0 ? std::optional<int>(part_start) : std::nullopt,
                           part_out);
    if (diag->parsed()) return cmd_diagnose(diag_net, diag_counts, diag_d, diag_op);
    if (solve->parsed()) return cmd_solve(solve_flags, solve_N, solve_ell, solve_variant, solve_dump);
    if (conv->parsed()) return cmd_study(conv_flags, false);
    if (loc->parsed()) return cmd_study(loc_flags, true);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
