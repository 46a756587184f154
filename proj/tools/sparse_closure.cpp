// sparse_closure command-line tool.
//
// Exit codes (all subcommands):
//   0  success; for `check` the pattern is Closed
//   1  `check`: NotClosed
//   2  `check`: Unknown (a QE sentence was emitted)
//   3  unreadable or malformed input (pattern, matrix, polyhedron, flags)
//   4  Fourier-Motzkin row cap exceeded (raise SPARSE_CLOSURE_ROW_CAP)
//   5  precondition not met (no known witness, grid above the point cap, ...)
//   6  output could not be written

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparse_closure/sparse_closure.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sparse_closure;

namespace {

enum Exit : int { kOk = 0, kNotClosed = 1, kUnknown = 2, kBadInput = 3, kRowCap = 4, kPrecondition = 5, kIo = 6 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

SupportPattern read_pattern(const std::string& path) {
  try {
    return validate_pattern(read_json(path));
  } catch (const PatternError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// --- check ---------------------------------------------------------------

struct CheckArgs {
  std::string pattern;
  std::string emit_smt;
  std::size_t max_hidden = 16;
};

int cmd_check(const CheckArgs& args) {
  const SupportPattern p = read_pattern(args.pattern);
  VerdictOptions opts;
  opts.emit_path = args.emit_smt.empty() ? fs::path(fs::path(args.pattern).stem().string() + ".smt2") : fs::path(args.emit_smt);
  const ClosednessVerdict v = closedness_verdict(p, opts);
  json out{{"pattern", pattern_to_json(p)}, {"verdict", verdict_to_json(v)}};
  if (p.depth() == 2) {
    try {
      out["hidden_subsets"] = report_to_json(check_hidden_subset_conditions(p, args.max_hidden));
    } catch (const EnumerationCapExceeded& e) {
      out["hidden_subsets"] = {{"skipped", e.what()}};
    }
  }
  std::cout << out.dump(2) << "\n";
  switch (v.status) {
    case Closedness::Closed: return kOk;
    case Closedness::NotClosed: return kNotClosed;
    case Closedness::Unknown: return kUnknown;
  }
  return kUnknown;
}

// --- emit-smt ------------------------------------------------------------

int cmd_emit_smt(const std::string& pattern, const std::string& out_path) {
  const SupportPattern p = read_pattern(pattern);
  const fs::path path = out_path.empty() ? fs::path(fs::path(pattern).stem().string() + ".smt2") : fs::path(out_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  QeSentenceStats stats;
  try {
    stats = emit_qe_sentence(p, path);
  } catch (const std::ios_base::failure& e) {
    throw IoError(e.what());
  }
  std::cout << json{{"sentence_path", path.string()},
                    {"num_polynomials", stats.num_polynomials},
                    {"max_degree", stats.max_degree},
                    {"num_variables", stats.num_variables}}
                   .dump(2)
            << "\n";
  return kOk;
}

// --- gen-dataset -----------------------------------------------------------

struct DatasetArgs {
  std::string pattern;
  std::string matrix;
  std::optional<std::size_t> resolution;
  std::size_t point_cap = kDefaultPointCap;
  std::string out = "dataset";
};

int cmd_gen_dataset(const DatasetArgs& args) {
  const SupportPattern p = read_pattern(args.pattern);
  RationalMatrix a;
  if (!args.matrix.empty()) {
    try {
      const json j = read_json(args.matrix);
      a = matrix_from_json(j.is_object() ? j.at("A") : j);
    } catch (const std::invalid_argument& e) {
      throw InputError(args.matrix + ": " + e.what());
    } catch (const json::exception& e) {
      throw InputError(args.matrix + ": " + e.what());
    }
  } else {
    const auto v = closedness_verdict(p);
    if (!v.witness)
      throw PreconditionError("no gap witness is known for this pattern (only the LU family has one); pass --matrix with an "
                              "explicit N_L x N_0 target");
    a = *v.witness;
  }
  LabeledDataset ds;
  try {
    ds = build_bad_dataset(a, p, args.resolution, args.point_cap);
  } catch (const std::length_error& e) {
    throw PreconditionError(e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const fs::path csv = args.out + ".csv";
  const fs::path header = args.out + ".json";
  {
    auto out = open_out(csv);
    write_dataset_csv(ds, out);
  }
  {
    auto out = open_out(header);
    out << dataset_header(ds, a, p).dump(2) << "\n";
  }
  std::cout << json{{"csv", csv.string()}, {"header", header.string()}, {"p", ds.resolution}, {"num_points", ds.inputs.size()}}.dump(2)
            << "\n";
  return kOk;
}

// --- project ---------------------------------------------------------------

int cmd_project(const std::string& in_path, const std::vector<std::size_t>& keep_one_based, const std::string& out_path) {
  std::optional<RationalPolyhedron> parsed;
  try {
    parsed = polyhedron_from_json(read_json(in_path));
  } catch (const std::invalid_argument& e) {
    throw InputError(in_path + ": " + e.what());
  } catch (const json::exception& e) {
    throw InputError(in_path + ": " + e.what());
  }
  const RationalPolyhedron& poly = *parsed;
  std::vector<std::size_t> keep;
  for (auto k : keep_one_based) {
    if (k < 1 || k > poly.num_vars()) throw InputError("--keep index " + std::to_string(k) + " out of range 1.." + std::to_string(poly.num_vars()));
    keep.push_back(k - 1);
  }
  const RationalPolyhedron projected = project_onto(poly, keep, row_cap_from_env());
  const json result = polyhedron_to_json(projected);
  if (out_path.empty()) {
    std::cout << result.dump(2) << "\n";
  } else {
    auto out = open_out(out_path);
    out << result.dump(2) << "\n";
  }
  std::cerr << "rows before: " << poly.rows().size() << ", rows after: " << projected.rows().size() << "\n";
  return kOk;
}

// --- train-lu --------------------------------------------------------------

struct TrainArgs {
  std::optional<std::size_t> d, samples, epochs;
  std::optional<double> lr, momentum;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  std::size_t runs = 10;
  std::size_t batch_size = 3000;
  std::string reduction = "per-element";
  std::string out = "lu_run";
  bool paper_scale = false;
};

int cmd_train_lu(const TrainArgs& args) {
  ExperimentSpec spec = args.paper_scale ? ExperimentSpec::paper_scale() : ExperimentSpec{};
  if (args.d) spec.dimension = *args.d;
  if (args.samples) spec.num_samples = *args.samples;
  if (args.epochs) spec.config.epochs = *args.epochs;
  if (args.lr) spec.config.learning_rate = *args.lr;
  if (args.momentum) spec.config.momentum = *args.momentum;
  spec.config.weight_decay = args.weight_decay;
  spec.config.seed = args.seed;
  spec.config.batch_size = args.batch_size;
  spec.config.reduction = args.reduction == "per-sample" ? LossReduction::PerSample : LossReduction::PerElement;
  spec.runs = args.runs;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }

  const auto results = run_lu_experiment(spec);
  const fs::path dir(args.out);
  fs::create_directories(dir);
  for (const auto& r : results) {
    auto out = open_out(dir / ("trace_seed" + std::to_string(r.seed) + ".csv"));
    write_trace_csv(r.trace, out);
  }
  {
    auto out = open_out(dir / "aggregate.csv");
    write_aggregate_csv(aggregate(results), out);
  }
  const auto s = summarize(results);
  const json summary{{"d", spec.dimension},
                     {"samples", spec.num_samples},
                     {"epochs", spec.config.epochs},
                     {"runs", spec.runs},
                     {"learning_rate", spec.config.learning_rate},
                     {"momentum", spec.config.momentum},
                     {"weight_decay", spec.config.weight_decay},
                     {"regularized", spec.regularized()},
                     {"reduction", args.reduction},
                     {"seed", spec.config.seed},
                     {"final_rel_jacobian_mean", s.final_rel_jacobian},
                     {"final_rel_empirical_mean", s.final_rel_empirical},
                     {"norm_growth_mean", s.norm_growth},
                     {"max_norm_ratio_W1", s.max_norm_ratio_w1},
                     {"max_norm_ratio_W2", s.max_norm_ratio_w2},
                     {"diverged_runs", s.diverged_runs}};
  {
    auto out = open_out(dir / "summary.json");
    out << summary.dump(2) << "\n";
  }
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closedness checks and pathological training experiments for fixed-support networks"};
  app.require_subcommand(1);

  CheckArgs check;
  auto* sc_check = app.add_subcommand("check", "Decide whether the linear function space of a pattern is closed");
  sc_check->add_option("--pattern", check.pattern, "Pattern JSON file")->required();
  sc_check->add_option("--emit-smt", check.emit_smt, "Where to write the QE sentence if no rule applies (default <pattern stem>.smt2)");
  sc_check->add_option("--max-hidden-enum", check.max_hidden, "Largest N_1 for hidden-subset enumeration")->capture_default_str();

  std::string smt_pattern, smt_out;
  auto* sc_smt = app.add_subcommand("emit-smt", "Write the SMT-LIB closedness sentence for a pattern");
  sc_smt->add_option("--pattern", smt_pattern, "Pattern JSON file")->required();
  sc_smt->add_option("--out", smt_out, "Output .smt2 path (default <pattern stem>.smt2)");

  DatasetArgs ds;
  auto* sc_ds = app.add_subcommand("gen-dataset", "Write a grid dataset labelled by a non-attainable linear map");
  sc_ds->add_option("--pattern", ds.pattern, "Pattern JSON file")->required();
  sc_ds->add_option("--matrix", ds.matrix, "JSON file with the target matrix (array of rows, or {\"A\": ...})");
  sc_ds->add_option("--p", ds.resolution, "Grid resolution override");
  sc_ds->add_option("--point-cap", ds.point_cap, "Refuse grids with more points than this")->capture_default_str();
  sc_ds->add_option("--out", ds.out, "Output prefix; writes <out>.csv and <out>.json")->capture_default_str();

  std::string poly_in, poly_out;
  std::vector<std::size_t> keep;
  auto* sc_proj = app.add_subcommand("project", "Project a rational polyhedron by Fourier-Motzkin elimination");
  sc_proj->add_option("--polyhedron", poly_in, "Polyhedron JSON {num_vars, C, y} for C x <= y")->required();
  sc_proj->add_option("--keep", keep, "1-based variables to keep")->required()->delimiter(',');
  sc_proj->add_option("--out", poly_out, "Output JSON path (default stdout)");

  TrainArgs tr;
  auto* sc_train = app.add_subcommand("train-lu", "Train the LU network on the anti-diagonal target over several seeds");
  sc_train->add_option("--d", tr.d, "Dimension (default 20, or 100 with --paper-scale)");
  sc_train->add_option("--samples", tr.samples, "Training samples (default 10000, or 100000 with --paper-scale)");
  sc_train->add_option("--epochs", tr.epochs, "Epochs (default 200)");
  sc_train->add_option("--lr", tr.lr, "Learning rate (default 0.1)");
  sc_train->add_option("--momentum", tr.momentum, "Momentum (default 0.9)");
  sc_train->add_option("--weight-decay", tr.weight_decay, "L2 weight decay")->capture_default_str();
  sc_train->add_option("--seed", tr.seed, "Base seed; run r uses seed + r")->capture_default_str();
  sc_train->add_option("--runs", tr.runs, "Number of seeds")->capture_default_str();
  sc_train->add_option("--batch-size", tr.batch_size, "Mini-batch size")->capture_default_str();
  sc_train->add_option("--reduction", tr.reduction, "Loss averaging: per-element or per-sample")
      ->check(CLI::IsMember({"per-element", "per-sample"}))
      ->capture_default_str();
  sc_train->add_option("--out", tr.out, "Output directory")->capture_default_str();
  sc_train->add_flag("--paper-scale", tr.paper_scale, "Use d=100 and 100000 samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*sc_check) return cmd_check(check);
    if (*sc_smt) return cmd_emit_smt(smt_pattern, smt_out);
    if (*sc_ds) return cmd_gen_dataset(ds);
    if (*sc_proj) return cmd_project(poly_in, keep, poly_out);
    if (*sc_train) return cmd_train_lu(tr);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const RowCapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRowCap;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}
