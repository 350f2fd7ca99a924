#include "trapline/reid/library.hpp"

#include <cstdio>
#include <fstream>

#include "trapline/csv.hpp"
#include "trapline/error.hpp"

namespace trapline::reid {

Metric parse_metric(const std::string& name) {
  if (name == "euclidean" || name == "l2") return Metric::Euclidean;
  if (name == "cosine") return Metric::Cosine;
  throw ParseError("unknown distance metric '" + name + "'");
}

std::vector<std::string> embedding_columns() {
  std::vector<std::string> names;
  for (int i = 0; i < kEmbeddingDim; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "e%02d", i);
    names.emplace_back(buf);
  }
  return names;
}

void ReferenceLibrary::add(const std::string& individual_id, const Embedding& embedding,
                           std::string image_ref) {
  if (individual_id.empty()) throw ValidationError("empty individual id");
  if (individual_id.find_first_of(",;\n") != std::string::npos) {
    throw ValidationError("individual id '" + individual_id + "' contains a separator");
  }
  if (!embedding.allFinite()) throw ValidationError("non-finite embedding for " + individual_id);
  entries_[individual_id].push_back({embedding, std::move(image_ref)});
}

bool ReferenceLibrary::remove(const std::string& individual_id, std::size_t index) {
  auto it = entries_.find(individual_id);
  if (it == entries_.end() || index >= it->second.size() || it->second.size() <= 1) return false;
  it->second.erase(it->second.begin() + static_cast<std::ptrdiff_t>(index));
  return true;
}

std::size_t ReferenceLibrary::size() const {
  std::size_t n = 0;
  for (const auto& [id, list] : entries_) n += list.size();
  return n;
}

void ReferenceLibrary::write_csv(std::ostream& out) const {
  csv::Writer writer(out);
  csv::Row header{"individual_id", "image_ref"};
  for (auto& name : embedding_columns()) header.push_back(name);
  writer.write(header);
  for (const auto& [id, list] : entries_) {
    for (const auto& entry : list) {
      csv::Row row{id, entry.image_ref};
      for (int i = 0; i < kEmbeddingDim; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", entry.embedding[i]);
        row.emplace_back(buf);
      }
      writer.write(row);
    }
  }
}

ReferenceLibrary ReferenceLibrary::read_csv(std::istream& in) {
  csv::Reader reader(in);
  auto columns = embedding_columns();
  std::vector<std::string> required{"individual_id", "image_ref"};
  required.insert(required.end(), columns.begin(), columns.end());
  reader.expect_header(required);
  ReferenceLibrary library;
  while (auto row = reader.next()) {
    auto line = reader.line();
    if (row->size() != reader.header().size()) {
      throw ParseError("expected " + std::to_string(reader.header().size()) + " columns", line);
    }
    Embedding e;
    for (int i = 0; i < kEmbeddingDim; ++i) {
      e[i] = csv::to_real(reader.field(*row, columns[i]), columns[i], line);
    }
    try {
      library.add(reader.field(*row, "individual_id"), e, reader.field(*row, "image_ref"));
    } catch (const ValidationError& err) {
      throw ParseError(err.what(), line);
    }
  }
  return library;
}

ReferenceLibrary ReferenceLibrary::read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open library " + path.string());
  return read_csv(in);
}

void ReferenceLibrary::write_csv_file(const std::filesystem::path& path) const {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(out);
}

bool ReferenceLibrary::operator==(const ReferenceLibrary& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (auto a = entries_.begin(), b = other.entries_.begin(); a != entries_.end(); ++a, ++b) {
    if (a->first != b->first || a->second.size() != b->second.size()) return false;
    for (std::size_t i = 0; i < a->second.size(); ++i) {
      if (a->second[i].image_ref != b->second[i].image_ref ||
          a->second[i].embedding != b->second[i].embedding) {
        return false;
      }
    }
  }
  return true;
}

LibraryIndex::LibraryIndex(const ReferenceLibrary& library) {
  embeddings.resize(kEmbeddingDim, static_cast<Eigen::Index>(library.size()));
  Eigen::Index col = 0;
  for (const auto& [id, list] : library.entries()) {
    ids.push_back(id);
    for (const auto& entry : list) {
      embeddings.col(col++) = entry.embedding;
      owner.push_back(ids.size() - 1);
    }
  }
}

}  // namespace trapline::reid
