#include "commentgen/embedding.hpp"

#include <cstdint>
#include <cstdlib>
#include <random>

#include "http_util.hpp"
#include "httplib.h"
#include "json.hpp"

namespace commentgen {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

Eigen::MatrixXd HashedTokenEmbedder::embed_tokens(const std::vector<std::string>& tokens) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(tokens.size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::mt19937_64 engine(fnv1a(tokens[i]));
    for (std::size_t d = 0; d < dim_; ++d) {
      // uniform in [-1, 1) from the top 53 bits; portable across standard libraries
      double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = 2.0 * u - 1.0;
    }
  }
  return normalized_rows(out);
}

Eigen::MatrixXd ServiceEmbedder::embed_tokens(const std::vector<std::string>& tokens) {
  if (tokens.empty()) return Eigen::MatrixXd(0, 0);
  const char* key = std::getenv(auth_env_.c_str());
  if (!key || !*key) throw EmbedderError("embedding service key variable " + auth_env_ + " is not set");
  auto url = detail::split_url(endpoint_);
  httplib::Client client(url.origin);
  client.set_read_timeout(60, 0);
  nlohmann::json body = {{"model", model_}, {"input", tokens}};
  httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};
  auto res = client.Post(url.path, headers, body.dump(), "application/json");
  if (!res) throw EmbedderError("embedding request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw EmbedderError("embedding service returned HTTP " + std::to_string(res->status));
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
    const auto& data = reply.at("data");
    if (data.size() != tokens.size()) throw EmbedderError("embedding service returned a wrong vector count");
    Eigen::Index dim = static_cast<Eigen::Index>(data.at(0).at("embedding").size());
    Eigen::MatrixXd out(static_cast<Eigen::Index>(tokens.size()), dim);
    for (const auto& item : data) {
      auto row = static_cast<Eigen::Index>(item.value("index", std::size_t{0}));
      const auto& vec = item.at("embedding");
      if (static_cast<Eigen::Index>(vec.size()) != dim || row >= out.rows())
        throw EmbedderError("embedding service returned ragged vectors");
      for (Eigen::Index d = 0; d < dim; ++d) out(row, d) = vec.at(static_cast<std::size_t>(d)).get<double>();
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw EmbedderError(std::string("malformed embedding reply: ") + e.what());
  }
}

Eigen::VectorXd sentence_vector(const Eigen::MatrixXd& token_vectors) {
  if (token_vectors.rows() == 0) return Eigen::VectorXd::Zero(token_vectors.cols());
  Eigen::VectorXd mean = normalized_rows(token_vectors).colwise().mean().transpose();
  double norm = mean.norm();
  if (norm > 0) mean /= norm;
  return mean;
}

}  // namespace commentgen
