#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "trapline/reid/library.hpp"

namespace trapline {
class Subprocess;
}

namespace trapline::reid {

/// Maps a mugshot image to an identity embedding. `ref` names the image
/// (used by lookup-style providers). Throws ProviderError on failure.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Embedding embed(const cv::Mat& image, const std::string& ref) = 0;
  virtual bool concurrent() const { return true; }
};

/// Deterministic pseudo-embedding: a hash of the pixel bytes seeds 32
/// components in [-1, 1]. Equal images embed equally.
class SyntheticEmbedder : public EmbeddingProvider {
 public:
  Embedding embed(const cv::Mat& image, const std::string& ref) override;
};

/// Precomputed embeddings from CSV `image_ref,e00,...,e31`, keyed by ref.
class CsvEmbedder : public EmbeddingProvider {
 public:
  explicit CsvEmbedder(const std::filesystem::path& csv);
  explicit CsvEmbedder(std::map<std::string, Embedding> table) : table_(std::move(table)) {}

  Embedding embed(const cv::Mat& image, const std::string& ref) override;

 private:
  std::map<std::string, Embedding> table_;
};

/// Line-protocol bridge: `EMBED <image path>` -> `OK e00 ... e31` or
/// `ERR <message>`. Images are written to a scratch PNG first.
class SubprocessEmbedder : public EmbeddingProvider {
 public:
  explicit SubprocessEmbedder(std::vector<std::string> argv);
  ~SubprocessEmbedder() override;

  Embedding embed(const cv::Mat& image, const std::string& ref) override;
  bool concurrent() const override { return false; }

 private:
  std::unique_ptr<Subprocess> child_;
  std::filesystem::path scratch_;
  std::mutex mutex_;
};

}  // namespace trapline::reid
