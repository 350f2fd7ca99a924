#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace trapline::reid {

inline constexpr int kEmbeddingDim = 32;

template <typename Scalar>
using EmbeddingT = Eigen::Matrix<Scalar, kEmbeddingDim, 1>;
using Embedding = EmbeddingT<double>;

enum class Metric { Euclidean, Cosine };

Metric parse_metric(const std::string& name);

/// Distance between two embeddings (or any equally sized vectors).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar distance(const Eigen::MatrixBase<DerivedA>& a,
                                   const Eigen::MatrixBase<DerivedB>& b, Metric metric) {
  using Scalar = typename DerivedA::Scalar;
  if (metric == Metric::Euclidean) return (a - b).norm();
  const Scalar denom = a.norm() * b.norm();
  if (denom <= Scalar(0)) return Scalar(1);
  return Scalar(1) - a.dot(b) / denom;
}

struct LibraryEntry {
  Embedding embedding;
  std::string image_ref;
};

/// Labelled reference embeddings, grouped by individual. Every individual
/// holds at least one embedding.
class ReferenceLibrary {
 public:
  using Entries = std::map<std::string, std::vector<LibraryEntry>>;

  /// Throws ValidationError for an empty or comma-bearing id or a
  /// non-finite embedding.
  void add(const std::string& individual_id, const Embedding& embedding, std::string image_ref = {});

  /// Removes one embedding. Refuses (returns false) to remove an
  /// individual's last embedding.
  bool remove(const std::string& individual_id, std::size_t index);

  const Entries& entries() const { return entries_; }
  bool contains(const std::string& individual_id) const { return entries_.count(individual_id) != 0; }
  bool empty() const { return entries_.empty(); }
  std::size_t individuals() const { return entries_.size(); }
  /// Total number of embeddings.
  std::size_t size() const;

  /// CSV `individual_id,image_ref,e00,...,e31`; values print with 17
  /// significant digits so a round trip is exact.
  void write_csv(std::ostream& out) const;
  static ReferenceLibrary read_csv(std::istream& in);
  static ReferenceLibrary read_csv_file(const std::filesystem::path& path);
  void write_csv_file(const std::filesystem::path& path) const;

  bool operator==(const ReferenceLibrary& other) const;

 private:
  Entries entries_;
};

/// Column-stacked view of a library for vectorised distance scans.
struct LibraryIndex {
  Eigen::Matrix<double, kEmbeddingDim, Eigen::Dynamic> embeddings;
  std::vector<std::size_t> owner;  // column -> position in `ids`
  std::vector<std::string> ids;    // sorted individual ids

  explicit LibraryIndex(const ReferenceLibrary& library);
};

/// Names of the 32 embedding columns, `e00` .. `e31`.
std::vector<std::string> embedding_columns();

}  // namespace trapline::reid
