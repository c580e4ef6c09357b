#include "commentgen/evalkit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "commentgen/lexer.hpp"
#include "commentgen/text.hpp"

namespace commentgen {

std::vector<std::string> metric_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (std::isalnum(c) || c == '_' || c >= 0x80) {
      std::size_t b = i;
      while (i < text.size()) {
        unsigned char d = static_cast<unsigned char>(text[i]);
        if (!(std::isalnum(d) || d == '_' || d >= 0x80)) break;
        ++i;
      }
      out.push_back(to_lower(text.substr(b, i - b)));
    } else {
      out.emplace_back(1, text[i]);
      ++i;
    }
  }
  return out;
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  auto ref = metric_tokens(reference);
  if (ref.empty()) throw PreconditionError("ROUGE-L needs a non-empty reference");
  auto cand = metric_tokens(candidate);
  if (cand.empty()) return 0.0;
  // rolling LCS table over the reference
  std::vector<std::size_t> prev(ref.size() + 1, 0), cur(ref.size() + 1, 0);
  for (const auto& c : cand) {
    for (std::size_t j = 1; j <= ref.size(); ++j)
      cur[j] = c == ref[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  double lcs = static_cast<double>(prev[ref.size()]);
  double p = lcs / static_cast<double>(cand.size());
  double r = lcs / static_cast<double>(ref.size());
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

double bleu_4(std::string_view candidate, std::string_view reference) {
  auto cand = metric_tokens(candidate);
  auto ref = metric_tokens(reference);
  if (cand.empty()) return 0.0;
  if (ref.empty()) return 0.0;
  std::size_t orders = std::min<std::size_t>(4, cand.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= orders; ++n) {
    std::map<std::vector<std::string>, std::size_t> ref_counts, cand_counts;
    for (std::size_t i = 0; i + n <= ref.size(); ++i) ++ref_counts[{ref.begin() + i, ref.begin() + i + n}];
    for (std::size_t i = 0; i + n <= cand.size(); ++i) ++cand_counts[{cand.begin() + i, cand.begin() + i + n}];
    std::size_t matched = 0;
    for (const auto& [gram, count] : cand_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    double total = static_cast<double>(cand.size() - n + 1);
    double num = matched > 0 ? static_cast<double>(matched) : kBleuEpsilon;
    log_sum += std::log(num / total);
  }
  double geo = std::exp(log_sum / static_cast<double>(orders));
  double bp = cand.size() < ref.size()
                  ? std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(cand.size()))
                  : 1.0;
  return std::clamp(geo * bp, 0.0, 1.0);
}

Score embed_similarity(std::string_view candidate, std::string_view reference, Embedder* embedder) {
  Score s;
  if (!embedder) {
    s.diagnostic = "no embedder configured";
    return s;
  }
  auto cand = metric_tokens(candidate);
  auto ref = metric_tokens(reference);
  if (cand.empty() || ref.empty()) {
    s.diagnostic = "empty text";
    return s;
  }
  try {
    Eigen::MatrixXd a = embedder->embed_tokens(cand);
    Eigen::MatrixXd b = embedder->embed_tokens(ref);
    if (a.cols() != b.cols()) throw EmbedderError("embedder returned vectors of different widths");
    s.value = greedy_match_f1(a, b);
  } catch (const Error& e) {
    s.diagnostic = std::string("embedder failed: ") + e.what();
  }
  return s;
}

std::string judge_prompt(std::string_view candidate, std::string_view code) {
  std::string p =
      "Rate how useful the following comment is to a developer who has to maintain the code. Consider whether it "
      "is correct, whether it explains intent and behaviour beyond what the code already says, and whether it "
      "warns about limitations. Answer with a single integer from 0 (useless) to 100 (very useful).\n\nComment:\n";
  p += candidate;
  p += "\n\nCode:\n";
  p += code;
  p += '\n';
  return p;
}

std::optional<double> parse_judge_reply(std::string_view reply) {
  for (std::size_t i = 0; i < reply.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(reply[i]))) continue;
    std::size_t j = i;
    while (j < reply.size() && (std::isdigit(static_cast<unsigned char>(reply[j])) || reply[j] == '.')) ++j;
    double v = std::strtod(std::string(reply.substr(i, j - i)).c_str(), nullptr);
    if (v < 0.0 || v > 100.0) return std::nullopt;
    return v / 100.0;
  }
  return std::nullopt;
}

Score judge_score(std::string_view candidate, std::string_view code, LlmClient* client, const ModelSpec* judge) {
  Score s;
  if (!client || !judge) {
    s.diagnostic = "no judge configured";
    return s;
  }
  ChatRequest req;
  req.kind = RequestKind::Judge;
  req.user = judge_prompt(candidate, code);
  try {
    ChatResult r = client->chat(*judge, req, GenerationParams{0.0, 16});
    s.raw = r.text;
    s.value = parse_judge_reply(r.text);
    if (!s.value) s.diagnostic = "judge reply has no score in 0..100";
  } catch (const Error& e) {
    s.diagnostic = std::string("judge failed: ") + e.what();
  }
  return s;
}

std::string completeness_normal_form(std::string_view file) {
  std::string stripped = strip_comments(file);
  stripped.erase(std::remove_if(stripped.begin(), stripped.end(),
                                [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }),
                 stripped.end());
  return stripped;
}

double completeness_ratio(std::string_view generated_file, std::string_view original_file) {
  std::string original = completeness_normal_form(original_file);
  if (original.empty()) throw PreconditionError("original file is empty after removing comments and whitespace");
  std::string generated = completeness_normal_form(generated_file);
  return static_cast<double>(generated.size()) / static_cast<double>(original.size());
}

BiasGateResult bias_gate(const GeneratedComment& base, const std::vector<GeneratedComment>& variants,
                         Embedder* embedder) {
  if (variants.empty()) throw PreconditionError("bias gate needs at least one variant");
  if (!embedder) throw UnavailableError("bias gate needs an embedder");
  BiasGateResult out;
  std::size_t passing = 0;
  for (const auto& v : variants) {
    Score s = embed_similarity(base.text, v.text, embedder);
    if (!s.value) throw UnavailableError("bias gate: " + s.diagnostic);
    VariantCheck check{*s.value, *s.value >= kBiasThreshold};
    passing += check.pass;
    out.per_variant.push_back(check);
  }
  out.fraction_passing = static_cast<double>(passing) / static_cast<double>(variants.size());
  return out;
}

MetricReport evaluate(const GeneratedComment& generated, const CodeUnit& unit, const EvalOptions& options) {
  MetricReport r;
  r.unit_id = generated.unit_id;
  r.model = generated.model;
  r.setup = generated.setup;
  r.empty_comment = generated.empty;
  const std::string& original = generated.original_code.empty() ? unit.code : generated.original_code;
  r.original_size = original.size();
  bool has_reference = unit.leading_comment && !metric_tokens(unit.leading_comment->text).empty();
  if (has_reference) {
    const std::string& ref = unit.leading_comment->text;
    r.rouge_l = rouge_l(generated.text, ref);
    r.bleu_4 = bleu_4(generated.text, ref);
    r.embed_sim = embed_similarity(generated.text, ref, options.embedder);
  } else {
    r.embed_sim.diagnostic = "unit has no reference comment";
  }
  if (!generated.empty) r.judge = judge_score(generated.text, original, options.judge_client, options.judge_model);
  else r.judge.diagnostic = "no comment generated";
  if (generated.annotated_file && !completeness_normal_form(original).empty())
    r.completeness = completeness_ratio(*generated.annotated_file, original);
  if (!generated.empty) r.categories = classify_rules(generated.text, original);
  return r;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {
std::string cell(const std::optional<double>& v) { return v ? format_fixed(*v, 6) : ""; }
}  // namespace

std::string metric_csv(const std::vector<MetricReport>& reports) {
  std::string out =
      "unit_id,model,setup,rouge_l,bleu_4,embed_sim,judge_score,completeness,original_size,empty_comment,categories\n";
  for (const auto& r : reports) {
    std::string cats;
    for (Category c : r.categories) cats += (cats.empty() ? "" : ";") + std::string(to_string(c));
    out += csv_escape(r.unit_id) + "," + csv_escape(r.model) + "," + std::string(to_string(r.setup)) + "," +
           cell(r.rouge_l) + "," + cell(r.bleu_4) + "," + cell(r.embed_sim.value) + "," + cell(r.judge.value) + "," +
           cell(r.completeness) + "," + std::to_string(r.original_size) + "," + (r.empty_comment ? "1" : "0") + "," +
           cats + "\n";
  }
  return out;
}

}  // namespace commentgen
