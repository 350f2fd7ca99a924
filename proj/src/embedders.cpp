#include "trapline/reid/embedder.hpp"

#include <unistd.h>

#include <cstdint>
#include <fstream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>

#include "trapline/csv.hpp"
#include "trapline/error.hpp"
#include "trapline/subprocess.hpp"

namespace trapline::reid {

namespace {

std::uint64_t fnv1a(const cv::Mat& image) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const std::uint8_t* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= data[i];
      h *= 1099511628211ull;
    }
  };
  const int header[3] = {image.rows, image.cols, image.type()};
  mix(reinterpret_cast<const std::uint8_t*>(header), sizeof header);
  const std::size_t row_bytes = image.cols * image.elemSize();
  for (int r = 0; r < image.rows; ++r) mix(image.ptr<std::uint8_t>(r), row_bytes);
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Embedding SyntheticEmbedder::embed(const cv::Mat& image, const std::string&) {
  std::uint64_t state = fnv1a(image);
  Embedding e;
  for (int i = 0; i < kEmbeddingDim; ++i) {
    e[i] = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }
  return e;
}

CsvEmbedder::CsvEmbedder(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProviderError("cannot open embeddings file " + path.string());
  csv::Reader reader(in);
  auto columns = embedding_columns();
  std::vector<std::string> required{"image_ref"};
  required.insert(required.end(), columns.begin(), columns.end());
  try {
    reader.expect_header(required);
    while (auto row = reader.next()) {
      Embedding e;
      for (int i = 0; i < kEmbeddingDim; ++i) {
        e[i] = csv::to_real(reader.field(*row, columns[i]), columns[i], reader.line());
      }
      table_[reader.field(*row, "image_ref")] = e;
    }
  } catch (const ParseError& e) {
    throw ProviderError(path.string() + ": " + e.what());
  }
}

Embedding CsvEmbedder::embed(const cv::Mat&, const std::string& ref) {
  auto it = table_.find(ref);
  if (it == table_.end()) throw ProviderError("no precomputed embedding for '" + ref + "'");
  return it->second;
}

SubprocessEmbedder::SubprocessEmbedder(std::vector<std::string> argv) {
  try {
    child_ = std::make_unique<Subprocess>(argv);
  } catch (const Error& e) {
    throw ProviderError(std::string("embedding provider unavailable: ") + e.what());
  }
  scratch_ = std::filesystem::temp_directory_path() /
             ("trapline-embed-" + std::to_string(::getpid()) + "-" +
              std::to_string(reinterpret_cast<std::uintptr_t>(this)) + ".png");
}

SubprocessEmbedder::~SubprocessEmbedder() {
  std::error_code ec;
  std::filesystem::remove(scratch_, ec);
}

Embedding SubprocessEmbedder::embed(const cv::Mat& image, const std::string&) {
  std::lock_guard lock(mutex_);
  if (!cv::imwrite(scratch_.string(), image)) throw ProviderError("cannot write scratch image");
  try {
    child_->write("EMBED " + scratch_.string() + "\n");
  } catch (const Error& e) {
    throw ProviderError(std::string("embedder exited: ") + e.what());
  }
  auto line = child_->read_line();
  if (!line) throw ProviderError("embedder closed its output");
  if (line->rfind("ERR", 0) == 0) throw ProviderError(line->size() > 4 ? line->substr(4) : "embedder error");
  std::istringstream ss(*line);
  std::string ok;
  ss >> ok;
  if (ok != "OK") throw ProviderError("malformed embedder response '" + *line + "'");
  Embedding e;
  for (int i = 0; i < kEmbeddingDim; ++i) {
    if (!(ss >> e[i])) throw ProviderError("embedder returned fewer than 32 components");
  }
  std::string extra;
  if (ss >> extra) throw ProviderError("embedder returned more than 32 components");
  if (!e.allFinite()) throw ProviderError("embedder returned a non-finite component");
  return e;
}

}  // namespace trapline::reid
