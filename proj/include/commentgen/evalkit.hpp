#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "commentgen/classify.hpp"
#include "commentgen/embedding.hpp"
#include "commentgen/llmclient.hpp"
#include "commentgen/promptgen.hpp"

namespace commentgen {

/// Lowercased runs of letters, digits and '_', plus every other
/// non-space character as its own token.
std::vector<std::string> metric_tokens(std::string_view text);

/// LCS F-measure. Throws PreconditionError on an empty reference.
double rouge_l(std::string_view candidate, std::string_view reference);

inline constexpr double kBleuEpsilon = 1e-9;

/// Geometric mean of clipped n-gram precisions over the orders the candidate
/// can form (up to 4); a zero match count becomes kBleuEpsilon. Brevity
/// penalty exp(1 - |ref|/|cand|) when the candidate is shorter. An empty
/// candidate scores 0.
double bleu_4(std::string_view candidate, std::string_view reference);

/// A score, or the reason there is none.
struct Score {
  std::optional<double> value;
  std::string diagnostic;
  std::string raw;  // judge reply, kept for audit

  bool available() const { return value.has_value(); }
};

/// Greedy token matching F over embedder vectors. Unavailable without an
/// embedder or when it fails.
Score embed_similarity(std::string_view candidate, std::string_view reference, Embedder* embedder);

std::string judge_prompt(std::string_view candidate, std::string_view code);
/// First number in the reply, 0..100, divided by 100.
std::optional<double> parse_judge_reply(std::string_view reply);
/// Unavailable without a judge, on provider failure, or on an unparseable reply.
Score judge_score(std::string_view candidate, std::string_view code, LlmClient* client, const ModelSpec* judge);

/// Bytes of the generated file over bytes of the original after removing
/// comments and all whitespace. Throws PreconditionError when the original
/// normalizes to nothing.
double completeness_ratio(std::string_view generated_file, std::string_view original_file);
std::string completeness_normal_form(std::string_view file);

inline constexpr double kBiasThreshold = 0.95;

class UnavailableError : public Error {
 public:
  using Error::Error;
};

struct VariantCheck {
  double similarity = 0.0;
  bool pass = false;
};

struct BiasGateResult {
  double fraction_passing = 0.0;
  std::vector<VariantCheck> per_variant;
};

/// Throws UnavailableError when no similarity can be computed.
BiasGateResult bias_gate(const GeneratedComment& base, const std::vector<GeneratedComment>& variants,
                         Embedder* embedder);

struct MetricReport {
  std::string unit_id;
  std::string model;
  Setup setup = Setup::Code;
  std::optional<double> rouge_l;
  std::optional<double> bleu_4;
  Score embed_sim;
  Score judge;
  std::optional<double> completeness;
  std::vector<Category> categories;
  std::size_t original_size = 0;  // bytes of the code given to the model
  bool empty_comment = false;
};

struct EvalOptions {
  Embedder* embedder = nullptr;
  LlmClient* judge_client = nullptr;
  const ModelSpec* judge_model = nullptr;
};

/// Reference is the unit's own leading comment; similarity scores stay
/// unset when it has none.
MetricReport evaluate(const GeneratedComment& generated, const CodeUnit& unit, const EvalOptions& options);

/// Columns: unit_id, model, setup, rouge_l, bleu_4, embed_sim, judge_score,
/// completeness, original_size, empty_comment, categories. Missing values are
/// empty cells; categories are ';'-separated.
std::string metric_csv(const std::vector<MetricReport>& reports);
std::string csv_escape(std::string_view field);

}  // namespace commentgen
