#ifndef SPARSE_CLOSURE_LINEAR_CLOSURE_HPP
#define SPARSE_CLOSURE_LINEAR_CLOSURE_HPP

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparse_closure/matrix.hpp"
#include "sparse_closure/qe_sentence.hpp"
#include "sparse_closure/support_pattern.hpp"

namespace sparse_closure {

/*
 * Exact test for A = L U with L lower- and U upper-triangular (no
 * pivoting). Uses the rank characterization
 *
 *   rank A[:k,:k] + k >= rank A[:k,:] + rank A[:,:k]   for k = 1..n
 *
 * with ranks computed over the rationals.
 */
inline bool lu_membership(const RationalMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("lu_membership needs a square matrix");
  const std::size_t n = a.rows();
  for (std::size_t k = 1; k <= n; ++k) {
    const auto lead = exact_rank(a.block(0, 0, k, k));
    const auto top = exact_rank(a.block(0, 0, k, n));
    const auto left = exact_rank(a.block(0, 0, n, k));
    if (lead + k < top + left) return false;
  }
  return true;
}

// The d x d anti-diagonal identity: in closure(L_I) but not L_I for the LU pattern.
inline RationalMatrix closure_gap_witness_lu(std::size_t d) {
  if (d < 2) throw std::invalid_argument("LU gap witness needs d >= 2");
  return RationalMatrix::anti_identity(d);
}

enum class Closedness { Closed, NotClosed, Unknown };

inline std::string to_string(Closedness c) {
  switch (c) {
    case Closedness::Closed: return "Closed";
    case Closedness::NotClosed: return "NotClosed";
    case Closedness::Unknown: return "Unknown";
  }
  return "Unknown";
}

namespace rules {
inline constexpr const char* kScalarOutput = "scalar-output-shallow";   // L_I isomorphic to R^|H|
inline constexpr const char* kDenseShallow = "dense-shallow-bounded-rank";  // matrices of rank <= N_1
inline constexpr const char* kLuTriangular = "lu-triangular";           // anti-diagonal identity witness
inline constexpr const char* kSingleLayer = "single-layer-coordinate-subspace";
inline constexpr const char* kNone = "none";
}  // namespace rules

struct ClosednessVerdict {
  Closedness status = Closedness::Unknown;
  std::string rule = rules::kNone;
  std::optional<RationalMatrix> witness;
  std::optional<std::string> sentence_path;
  std::optional<QeSentenceStats> sentence_stats;
};

struct VerdictOptions {
  // Where to write the QE sentence when no structural rule applies.
  std::optional<std::filesystem::path> emit_path;
};

/*
 * Rule dispatch, first match wins:
 *   L = 2, N_L = 1          -> Closed
 *   L = 2, both masks full  -> Closed
 *   triangular LU, d >= 2   -> NotClosed, anti-diagonal witness
 *   L = 1                   -> Closed
 *   otherwise               -> Unknown, with the QE sentence
 */
inline ClosednessVerdict closedness_verdict(const SupportPattern& p, const VerdictOptions& opts = {}) {
  ClosednessVerdict v;
  if (p.depth() == 2 && p.output_dim() == 1) {
    v.status = Closedness::Closed;
    v.rule = rules::kScalarOutput;
    return v;
  }
  if (p.depth() == 2 && p.is_full(1) && p.is_full(2)) {
    v.status = Closedness::Closed;
    v.rule = rules::kDenseShallow;
    return v;
  }
  if (is_lu_pattern(p) && p.input_dim() >= 2) {
    v.status = Closedness::NotClosed;
    v.rule = rules::kLuTriangular;
    v.witness = closure_gap_witness_lu(p.input_dim());
    return v;
  }
  if (p.depth() == 1) {
    v.status = Closedness::Closed;
    v.rule = rules::kSingleLayer;
    return v;
  }
  v.status = Closedness::Unknown;
  v.rule = rules::kNone;
  if (opts.emit_path) {
    v.sentence_stats = emit_qe_sentence(p, *opts.emit_path);
    v.sentence_path = opts.emit_path->string();
  } else {
    std::ostringstream sink;
    v.sentence_stats = emit_qe_sentence(p, sink);
  }
  return v;
}

class EnumerationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HiddenSubsetVerdict {
  std::vector<std::size_t> subset;  // 0-based hidden neurons, ascending
  ClosednessVerdict verdict;
};

struct HiddenClosureReport {
  bool second_layer_full = false;
  std::vector<HiddenSubsetVerdict> subsets;  // sorted lexicographically
  bool all_subsets_closed = false;
  bool sufficient_condition_holds = false;
};

/*
 * Checks the two structural conditions for closedness of a shallow
 * network's function space on a cube: W_2 unconstrained, and L_{I_S}
 * closed for every nonempty hidden subset S. Enumerates 2^{N_1} - 1
 * subsets, so N_1 is capped.
 */
inline HiddenClosureReport check_hidden_subset_conditions(const SupportPattern& p, std::size_t max_hidden = 16) {
  if (p.depth() != 2) throw PatternError("hidden-subset conditions need a two-layer pattern");
  const std::size_t hidden = p.dim(1);
  if (hidden > max_hidden || hidden >= 63)
    throw EnumerationCapExceeded("N_1 = " + std::to_string(hidden) + " exceeds the subset enumeration cap of " +
                                 std::to_string(max_hidden) + " (2^N_1 subsets)");
  HiddenClosureReport report;
  report.second_layer_full = p.is_full(2);
  const std::uint64_t count = std::uint64_t{1} << hidden;
  for (std::uint64_t bits = 1; bits < count; ++bits) {
    std::set<std::size_t> s;
    for (std::size_t h = 0; h < hidden; ++h)
      if (bits & (std::uint64_t{1} << h)) s.insert(h);
    HiddenSubsetVerdict entry;
    entry.subset.assign(s.begin(), s.end());
    entry.verdict = closedness_verdict(compact_hidden(restrict_to_hidden(p, s), s));
    report.subsets.push_back(std::move(entry));
  }
  std::sort(report.subsets.begin(), report.subsets.end(),
            [](const auto& x, const auto& y) { return x.subset < y.subset; });
  report.all_subsets_closed = std::all_of(report.subsets.begin(), report.subsets.end(),
                                          [](const auto& e) { return e.verdict.status == Closedness::Closed; });
  report.sufficient_condition_holds = report.second_layer_full && report.all_subsets_closed;
  return report;
}

inline nlohmann::json matrix_to_json(const RationalMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(format_rational(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline RationalMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) throw std::invalid_argument("matrix JSON must be a nonempty array of rows");
  RationalMatrix m(j.size(), j.front().size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != m.cols()) throw std::invalid_argument("ragged matrix JSON");
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const auto& e = j[r][c];
      if (e.is_string()) m(r, c) = parse_rational(e.get<std::string>());
      else if (e.is_number_integer()) m(r, c) = Rational(e.get<long>());
      else if (e.is_number()) m(r, c) = Rational(e.get<double>());
      else throw std::invalid_argument("matrix entries must be numbers or \"p/q\" strings");
    }
  }
  return m;
}

inline nlohmann::json verdict_to_json(const ClosednessVerdict& v) {
  nlohmann::json j{{"status", to_string(v.status)}, {"rule", v.rule}};
  j["witness"] = v.witness ? matrix_to_json(*v.witness) : nlohmann::json(nullptr);
  j["sentence_path"] = v.sentence_path ? nlohmann::json(*v.sentence_path) : nlohmann::json(nullptr);
  if (v.sentence_stats)
    j["sentence_stats"] = {{"num_polynomials", v.sentence_stats->num_polynomials},
                           {"max_degree", v.sentence_stats->max_degree},
                           {"num_variables", v.sentence_stats->num_variables}};
  else
    j["sentence_stats"] = nullptr;
  return j;
}

inline nlohmann::json report_to_json(const HiddenClosureReport& r) {
  nlohmann::json subsets = nlohmann::json::array();
  for (const auto& e : r.subsets) {
    std::vector<std::size_t> one_based;
    for (auto h : e.subset) one_based.push_back(h + 1);
    subsets.push_back({{"subset", one_based}, {"status", to_string(e.verdict.status)}, {"rule", e.verdict.rule}});
  }
  return {{"second_layer_full", r.second_layer_full},
          {"all_subsets_closed", r.all_subsets_closed},
          {"sufficient_condition_holds", r.sufficient_condition_holds},
          {"subsets", std::move(subsets)}};
}

}  // namespace sparse_closure

#endif  // SPARSE_CLOSURE_LINEAR_CLOSURE_HPP
