#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace commentgen {

class LlmClient;
struct ModelSpec;

enum class Category : std::uint8_t {
  Consistency,
  Irrelevance,
  DomainMapping,
  PossibleExceptions,
  AlternativeSolutions,
  Links,
  AlgorithmicDetails,
  Complexity,
};

inline constexpr std::array<Category, 8> kAllCategories = {
    Category::Consistency,          Category::Irrelevance, Category::DomainMapping,      Category::PossibleExceptions,
    Category::AlternativeSolutions, Category::Links,       Category::AlgorithmicDetails, Category::Complexity};

std::string_view to_string(Category c);
Category category_from_string(std::string_view s);

/// Share of useful human comments in each category, as published.
double reference_useful_percent(Category c);

enum class CommentSource : std::uint8_t { Original, Generated };
enum class ClassifyMethod : std::uint8_t { Rules, Judge };
std::string_view to_string(CommentSource s);
std::string_view to_string(ClassifyMethod m);
ClassifyMethod classify_method_from_string(std::string_view s);

struct CategoryLabel {
  std::string unit_id;
  CommentSource source = CommentSource::Generated;
  std::vector<Category> categories;  // ascending, no duplicates
  ClassifyMethod method = ClassifyMethod::Rules;
  std::string group;  // setup name, "original", ...

  bool has(Category c) const;
};

/// Deterministic keyword and overlap detectors; multi-label.
std::vector<Category> classify_rules(std::string_view comment, std::string_view code);

struct JudgeConfig {
  LlmClient* client = nullptr;
  const ModelSpec* model = nullptr;
};

/// Throws PreconditionError on an empty comment, ConfigError for Judge
/// without a configured judge.
CategoryLabel classify_comment(std::string_view comment, std::string_view code, ClassifyMethod method,
                               const JudgeConfig& judge = {});

std::string judge_classification_prompt(std::string_view comment, std::string_view code);
/// Category names found in a judge reply; "none" gives an empty set.
std::vector<Category> parse_judge_categories(std::string_view reply);

struct DistributionRow {
  std::string group;
  ClassifyMethod method = ClassifyMethod::Rules;
  std::size_t comments = 0;
  std::array<double, 8> percent{};  // indexed like kAllCategories
};

/// Per (group, method) share of comments carrying each category. Rows are
/// ordered by group then method; labels are never pooled across methods.
std::vector<DistributionRow> category_distribution(const std::vector<CategoryLabel>& labels);

std::string render_distribution(const std::vector<DistributionRow>& rows);
std::string render_reference_distribution();

}  // namespace commentgen
