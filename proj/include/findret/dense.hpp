#pragma once

// Per-finding embedding vectors and cosine similarity.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "findret/detail/binary_io.hpp"
#include "findret/error.hpp"
#include "findret/parallel.hpp"
#include "findret/similarity_matrix.hpp"

namespace findret {

/// Row-major set of d-dimensional vectors keyed by finding id. Values are held
/// as double even though files carry float32.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;

  EmbeddingSet(std::size_t dim, std::vector<std::string> ids, std::vector<double> data, bool normalized = false)
      : dim_(dim), ids_(std::move(ids)), data_(std::move(data)), normalized_(normalized) {
    if (dim_ == 0) throw ValidationError("embedding dimension must be positive");
    if (data_.size() != dim_ * ids_.size()) throw ValidationError("embedding data size does not match dim x count");
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (!index_.emplace(ids_[i], i).second) throw ValidationError("duplicate embedding id '" + ids_[i] + "'");
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool normalized() const noexcept { return normalized_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const double> data() const noexcept { return data_; }

  std::span<const double> vector(std::size_t row) const { return {data_.data() + row * dim_, dim_}; }

  std::span<const double> vector(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw ValidationError("no embedding for id '" + id + "'");
    return vector(it->second);
  }

  bool contains(const std::string& id) const { return index_.contains(id); }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  bool normalized_ = false;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

inline void check_finite(double v, const std::string& id, const std::string& path) {
  if (!std::isfinite(v)) throw ValidationError(path + ": non-finite value in vector for '" + id + "'");
}

}  // namespace detail

/// Reads every record of an embedding file (EMB1 binary, or JSONL when the
/// file starts with '{') in file order.
inline EmbeddingSet read_embedding_file(const std::string& path) {
  auto in = detail::open_input(path, std::ios::in | std::ios::binary);
  const int first = in.peek();
  std::vector<std::string> ids;
  std::vector<double> data;
  std::size_t dim = 0;
  if (first == '{') {
    in.close();
    detail::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line_no) {
      const auto id = detail::require_string(j, "id");
      const auto& vec = detail::require_key(j, "vector");
      if (!vec.is_array() || vec.empty()) throw ParseError("'vector' must be a non-empty array");
      if (dim == 0) dim = vec.size();
      if (vec.size() != dim) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": dimension mismatch for '" + id +
                              "' (expected " + std::to_string(dim) + ", got " + std::to_string(vec.size()) + ")");
      }
      for (const auto& v : vec) {
        if (!v.is_number()) throw ParseError("'vector' must contain numbers");
        const double x = v.get<double>();
        detail::check_finite(x, id, path);
        data.push_back(x);
      }
      ids.push_back(id);
    });
    if (ids.empty()) throw ValidationError(path + ": embedding file is empty");
    return EmbeddingSet(dim, std::move(ids), std::move(data));
  }
  const auto magic = detail::read_bytes(in, 4, "magic");
  if (magic != "EMB1") throw ParseError(path + ": not an embedding file (bad magic)");
  dim = detail::read_le<std::uint32_t>(in, "dim");
  const auto count = detail::read_le<std::uint32_t>(in, "count");
  if (dim == 0) throw ValidationError(path + ": dimension must be positive");
  ids.reserve(count);
  data.reserve(static_cast<std::size_t>(count) * dim);
  for (std::uint32_t r = 0; r < count; ++r) {
    const auto len = detail::read_le<std::uint16_t>(in, "id length");
    auto id = detail::read_bytes(in, len, "id");
    for (std::size_t k = 0; k < dim; ++k) {
      const double x = detail::read_le<float>(in, "vector component");
      detail::check_finite(x, id, path);
      data.push_back(x);
    }
    ids.push_back(std::move(id));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError(path + ": trailing bytes after last record");
  return EmbeddingSet(dim, std::move(ids), std::move(data));
}

/// Loads embeddings and keeps exactly `expected_ids`, in that order. Every
/// expected id must be present; extra ids in the file are ignored.
inline EmbeddingSet load_embeddings(const std::string& path, std::span<const std::string> expected_ids) {
  const auto all = read_embedding_file(path);
  std::vector<double> data;
  data.reserve(expected_ids.size() * all.dim());
  for (const auto& id : expected_ids) {
    if (!all.contains(id)) throw ValidationError(path + ": missing embedding for id '" + id + "'");
    const auto v = all.vector(id);
    data.insert(data.end(), v.begin(), v.end());
  }
  return EmbeddingSet(all.dim(), {expected_ids.begin(), expected_ids.end()}, std::move(data));
}

/// Writes the EMB1 binary format:
///   "EMB1"  u32 dim  u32 count, then per record: u16 id_len, id bytes, dim x f32
/// (all little-endian).
inline void write_embeddings(const EmbeddingSet& e, const std::string& path) {
  auto out = detail::open_output(path, std::ios::out | std::ios::binary);
  out.write("EMB1", 4);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.dim()));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.size()));
  for (std::size_t r = 0; r < e.size(); ++r) {
    const auto& id = e.ids()[r];
    if (id.size() > 0xffff) throw ValidationError("embedding id too long: " + id.substr(0, 32));
    detail::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (double x : e.vector(r)) detail::write_le<float>(out, static_cast<float>(x));
  }
  if (!out) throw IoError("failed writing " + path);
}

/// Divides every vector by its L2 norm. Zero vectors are rejected.
inline EmbeddingSet normalize(const EmbeddingSet& e) {
  std::vector<double> data(e.data().begin(), e.data().end());
  const std::size_t d = e.dim();
  for (std::size_t r = 0; r < e.size(); ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < d; ++k) sum += data[r * d + k] * data[r * d + k];
    const double norm = std::sqrt(sum);
    if (!(norm > 0.0)) throw ValidationError("cannot normalize zero vector for id '" + e.ids()[r] + "'");
    for (std::size_t k = 0; k < d; ++k) data[r * d + k] /= norm;
  }
  return EmbeddingSet(d, e.ids(), std::move(data), true);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

/// Query-by-corpus cosine matrix as the product of the normalized matrices.
inline SimilarityMatrix cosine_matrix(const EmbeddingSet& queries, const EmbeddingSet& corpus, std::size_t threads = 1) {
  if (!queries.normalized() || !corpus.normalized()) throw ValidationError("cosine_matrix requires normalized inputs");
  if (queries.dim() != corpus.dim()) {
    throw ValidationError("embedding dimension mismatch: " + std::to_string(queries.dim()) + " vs " +
                          std::to_string(corpus.dim()));
  }
  SimilarityMatrix m;
  m.row_ids = queries.ids();
  m.col_ids = corpus.ids();
  m.values.assign(queries.size() * corpus.size(), 0.0);
  parallel_for(queries.size(), threads, [&](std::size_t q) {
    const auto qv = queries.vector(q);
    auto row = m.row(q);
    for (std::size_t i = 0; i < corpus.size(); ++i) row[i] = dot(qv, corpus.vector(i));
  });
  return m;
}

}  // namespace findret
