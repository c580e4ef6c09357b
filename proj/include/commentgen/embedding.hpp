#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "commentgen/error.hpp"

namespace commentgen {

class EmbedderError : public Error {
 public:
  using Error::Error;
};

/// Produces one row vector per input token.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string name() const = 0;
  virtual Eigen::MatrixXd embed_tokens(const std::vector<std::string>& tokens) = 0;
};

/// NOT a semantic model. Each token maps to a fixed pseudo-random unit
/// vector derived from its hash, so equal tokens get equal vectors and
/// distinct tokens get nearly orthogonal ones. For tests and dry runs.
class HashedTokenEmbedder final : public Embedder {
 public:
  explicit HashedTokenEmbedder(std::size_t dim = 64) : dim_(dim) {}
  std::string name() const override { return "hashed"; }
  Eigen::MatrixXd embed_tokens(const std::vector<std::string>& tokens) override;

 private:
  std::size_t dim_;
};

/// Calls an OpenAI-compatible `/v1/embeddings` endpoint with every token as
/// one input. The API key is read from `auth_env` at request time.
class ServiceEmbedder final : public Embedder {
 public:
  ServiceEmbedder(std::string endpoint, std::string model, std::string auth_env)
      : endpoint_(std::move(endpoint)), model_(std::move(model)), auth_env_(std::move(auth_env)) {}
  std::string name() const override { return model_; }
  Eigen::MatrixXd embed_tokens(const std::vector<std::string>& tokens) override;

 private:
  std::string endpoint_;
  std::string model_;
  std::string auth_env_;
};

/// Row-normalizes; all-zero rows stay zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> normalized_rows(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    Scalar norm = out.row(i).norm();
    if (norm > Scalar(0)) out.row(i) /= norm;
  }
  return out;
}

/// Greedy token matching F1 between candidate and reference token
/// embeddings (rows). Precision averages each candidate token's best cosine
/// against the reference, recall the converse. Clamped to [0, 1]; zero when
/// either side is empty.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar greedy_match_f1(const Eigen::MatrixBase<DerivedA>& candidate,
                                          const Eigen::MatrixBase<DerivedB>& reference) {
  using Scalar = typename DerivedA::Scalar;
  if (candidate.rows() == 0 || reference.rows() == 0) return Scalar(0);
  const auto sim = (normalized_rows(candidate) * normalized_rows(reference).transpose()).eval();
  const Scalar precision = sim.rowwise().maxCoeff().mean();
  const Scalar recall = sim.colwise().maxCoeff().mean();
  if (precision + recall <= Scalar(0)) return Scalar(0);
  Scalar f = Scalar(2) * precision * recall / (precision + recall);
  return std::clamp(f, Scalar(0), Scalar(1));
}

/// Mean of the row-normalized token vectors, itself normalized.
Eigen::VectorXd sentence_vector(const Eigen::MatrixXd& token_vectors);

}  // namespace commentgen
