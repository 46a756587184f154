#ifndef SPARSE_CLOSURE_SUPPORT_PATTERN_HPP
#define SPARSE_CLOSURE_SUPPORT_PATTERN_HPP

#include <nlohmann/json.hpp>

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sparse_closure/matrix.hpp"

namespace sparse_closure {

class PatternError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// (row, col), 0-based.
using IndexPair = std::pair<std::size_t, std::size_t>;
using Mask = std::set<IndexPair>;

/*
 * Fixed support of an L-layer network: dims (N_0, ..., N_L) and one mask
 * per layer, layer 1 first. Mask k constrains the N_k x N_{k-1} weight of
 * layer k. Immutable once constructed; the constructor enforces bounds.
 */
class SupportPattern {
 public:
  SupportPattern(std::vector<std::size_t> dims, std::vector<Mask> masks)
      : dims_(std::move(dims)), masks_(std::move(masks)) {
    if (dims_.size() < 2) throw PatternError("pattern needs at least two dimensions (N_0 and N_L)");
    if (masks_.size() + 1 != dims_.size())
      throw PatternError("dims has " + std::to_string(dims_.size()) + " entries but masks has " +
                         std::to_string(masks_.size()) + " layers");
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (dims_[i] == 0) throw PatternError("dimension N_" + std::to_string(i) + " must be positive");
    for (std::size_t k = 0; k < masks_.size(); ++k)
      for (const auto& [r, c] : masks_[k])
        if (r >= dims_[k + 1] || c >= dims_[k])
          throw PatternError("mask entry (" + std::to_string(r + 1) + "," + std::to_string(c + 1) +
                             ") out of bounds for layer " + std::to_string(k + 1));
  }

  [[nodiscard]] std::size_t depth() const { return masks_.size(); }
  [[nodiscard]] const std::vector<std::size_t>& dims() const { return dims_; }
  [[nodiscard]] std::size_t dim(std::size_t i) const { return dims_.at(i); }
  [[nodiscard]] std::size_t input_dim() const { return dims_.front(); }
  [[nodiscard]] std::size_t output_dim() const { return dims_.back(); }

  // layer is 1-based, matching W_1 ... W_L.
  [[nodiscard]] const Mask& mask(std::size_t layer) const { return masks_.at(layer - 1); }
  [[nodiscard]] const std::vector<Mask>& masks() const { return masks_; }
  [[nodiscard]] std::size_t rows(std::size_t layer) const { return dims_.at(layer); }
  [[nodiscard]] std::size_t cols(std::size_t layer) const { return dims_.at(layer - 1); }

  [[nodiscard]] bool allows(std::size_t layer, std::size_t r, std::size_t c) const {
    return mask(layer).count({r, c}) != 0;
  }

  [[nodiscard]] bool is_full(std::size_t layer) const { return mask(layer).size() == rows(layer) * cols(layer); }

  // Sum of |I_i| over layers.
  [[nodiscard]] std::size_t total_support() const {
    std::size_t n = 0;
    for (const auto& m : masks_) n += m.size();
    return n;
  }

  friend bool operator==(const SupportPattern& a, const SupportPattern& b) {
    return a.dims_ == b.dims_ && a.masks_ == b.masks_;
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<Mask> masks_;
};

inline Mask full_mask(std::size_t rows, std::size_t cols) {
  Mask m;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m.insert({r, c});
  return m;
}

inline Mask upper_triangular_mask(std::size_t n) {
  Mask m;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r; c < n; ++c) m.insert({r, c});
  return m;
}

inline Mask lower_triangular_mask(std::size_t n) {
  Mask m;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c <= r; ++c) m.insert({r, c});
  return m;
}

inline SupportPattern dense_pattern(const std::vector<std::size_t>& dims) {
  std::vector<Mask> masks;
  for (std::size_t k = 1; k < dims.size(); ++k) masks.push_back(full_mask(dims[k], dims[k - 1]));
  return SupportPattern(dims, std::move(masks));
}

// Upper-triangular first factor, lower-triangular second: L_I is the set of
// d x d matrices with an exact LU factorization.
inline SupportPattern lu_pattern(std::size_t d) {
  return SupportPattern({d, d, d}, {upper_triangular_mask(d), lower_triangular_mask(d)});
}

inline bool is_lu_pattern(const SupportPattern& p) {
  if (p.depth() != 2) return false;
  const std::size_t d = p.input_dim();
  if (p.dim(1) != d || p.dim(2) != d) return false;
  return p.mask(1) == upper_triangular_mask(d) && p.mask(2) == lower_triangular_mask(d);
}

// Parses {"dims":[N0..NL],"masks":[[[r,c],...],...]} with 1-based indices.
inline SupportPattern validate_pattern(const nlohmann::json& raw) {
  if (!raw.is_object() || !raw.contains("dims") || !raw.contains("masks"))
    throw PatternError("pattern JSON needs \"dims\" and \"masks\"");
  const auto& jd = raw.at("dims");
  const auto& jm = raw.at("masks");
  if (!jd.is_array() || !jm.is_array()) throw PatternError("\"dims\" and \"masks\" must be arrays");
  std::vector<std::size_t> dims;
  for (const auto& v : jd) {
    if (!v.is_number_integer() || v.get<long long>() <= 0) throw PatternError("dimensions must be positive integers");
    dims.push_back(v.get<std::size_t>());
  }
  std::vector<Mask> masks;
  for (const auto& layer : jm) {
    if (!layer.is_array()) throw PatternError("each mask must be an array of [row, col] pairs");
    Mask m;
    for (const auto& e : layer) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
        throw PatternError("mask entries must be [row, col] integer pairs");
      const auto r = e[0].get<long long>();
      const auto c = e[1].get<long long>();
      if (r < 1 || c < 1) throw PatternError("mask indices are 1-based; got (" + std::to_string(r) + "," + std::to_string(c) + ")");
      m.insert({static_cast<std::size_t>(r - 1), static_cast<std::size_t>(c - 1)});
    }
    masks.push_back(std::move(m));
  }
  return SupportPattern(std::move(dims), std::move(masks));
}

inline nlohmann::json pattern_to_json(const SupportPattern& p) {
  nlohmann::json masks = nlohmann::json::array();
  for (const auto& m : p.masks()) {
    nlohmann::json layer = nlohmann::json::array();
    for (const auto& [r, c] : m) layer.push_back({r + 1, c + 1});
    masks.push_back(std::move(layer));
  }
  return {{"dims", p.dims()}, {"masks", std::move(masks)}};
}

/*
 * I_S = (I_2[:, S], I_1[S, :]) for a two-layer pattern. Hidden neurons
 * outside S lose all their connections; dims are kept.
 */
inline SupportPattern restrict_to_hidden(const SupportPattern& p, const std::set<std::size_t>& hidden) {
  if (p.depth() != 2) throw PatternError("restrict_to_hidden needs a two-layer pattern");
  if (hidden.empty()) throw PatternError("hidden subset must be nonempty");
  if (*hidden.rbegin() >= p.dim(1)) throw PatternError("hidden subset index out of bounds");
  Mask first, second;
  for (const auto& e : p.mask(1))
    if (hidden.count(e.first)) first.insert(e);
  for (const auto& e : p.mask(2))
    if (hidden.count(e.second)) second.insert(e);
  return SupportPattern(p.dims(), {std::move(first), std::move(second)});
}

// Drops hidden neurons outside `hidden` entirely, relabelling the rest in order.
inline SupportPattern compact_hidden(const SupportPattern& p, const std::set<std::size_t>& hidden) {
  if (p.depth() != 2) throw PatternError("compact_hidden needs a two-layer pattern");
  std::vector<std::size_t> relabel(p.dim(1), p.dim(1));
  std::size_t next = 0;
  for (auto h : hidden) relabel.at(h) = next++;
  Mask first, second;
  for (const auto& [r, c] : p.mask(1))
    if (relabel[r] < next) first.insert({relabel[r], c});
  for (const auto& [r, c] : p.mask(2))
    if (relabel[c] < next) second.insert({r, relabel[c]});
  return SupportPattern({p.dim(0), next, p.dim(2)}, {std::move(first), std::move(second)});
}

// H = union over hidden i connected in I_2 of the row support I_1[i, :].
inline std::set<std::size_t> row_support_union(const SupportPattern& p) {
  if (p.depth() != 2) throw PatternError("row_support_union needs a two-layer pattern");
  std::set<std::size_t> connected;
  for (const auto& [r, c] : p.mask(2)) connected.insert(c);
  std::set<std::size_t> h;
  for (const auto& [r, c] : p.mask(1))
    if (connected.count(r)) h.insert(c);
  return h;
}

/*
 * L factors X_1..X_L (layer 1 first) whose supports lie in a pattern.
 * Construction checks shapes and that every off-mask entry is exactly zero.
 */
template <typename T>
class SparseFactors {
 public:
  SparseFactors(SupportPattern pattern, std::vector<Matrix<T>> factors)
      : pattern_(std::move(pattern)), factors_(std::move(factors)) {
    if (factors_.size() != pattern_.depth()) throw PatternError("factor count does not match pattern depth");
    for (std::size_t k = 1; k <= factors_.size(); ++k) {
      const auto& x = factors_[k - 1];
      if (x.rows() != pattern_.rows(k) || x.cols() != pattern_.cols(k))
        throw PatternError("factor " + std::to_string(k) + " has wrong shape");
      for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c)
          if (x(r, c) != T(0) && !pattern_.allows(k, r, c))
            throw PatternError("factor " + std::to_string(k) + " has an off-mask nonzero");
    }
  }

  // Zeroes off-mask entries, then wraps.
  static SparseFactors masked(const SupportPattern& pattern, std::vector<Matrix<T>> factors) {
    for (std::size_t k = 1; k <= factors.size() && k <= pattern.depth(); ++k) {
      auto& x = factors[k - 1];
      for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c)
          if (!pattern.allows(k, r, c)) x(r, c) = T(0);
    }
    return SparseFactors(pattern, std::move(factors));
  }

  [[nodiscard]] const SupportPattern& pattern() const { return pattern_; }
  [[nodiscard]] const std::vector<Matrix<T>>& factors() const { return factors_; }
  [[nodiscard]] const Matrix<T>& factor(std::size_t layer) const { return factors_.at(layer - 1); }

 private:
  SupportPattern pattern_;
  std::vector<Matrix<T>> factors_;
};

// X_L ... X_1; exact for rational payloads.
template <typename T>
Matrix<T> product(const SparseFactors<T>& f) {
  Matrix<T> acc = f.factors().front();
  for (std::size_t k = 1; k < f.factors().size(); ++k) acc = f.factors()[k] * acc;
  return acc;
}

}  // namespace sparse_closure

#endif  // SPARSE_CLOSURE_SUPPORT_PATTERN_HPP
