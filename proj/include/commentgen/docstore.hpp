#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "commentgen/corpus.hpp"
#include "commentgen/embedding.hpp"

namespace commentgen {

/// Project and user documentation types.
enum class DocType : std::uint8_t {
  Requirements,
  Architecture,
  DetailedDesign,
  Implementation,
  Test,
  ProjectManagement,
  ConfigurationManagement,
  ProjectInfrastructure,
  UserSoftware,
};

inline constexpr std::array<DocType, 9> kAllDocTypes = {
    DocType::Requirements,      DocType::Architecture,           DocType::DetailedDesign,
    DocType::Implementation,    DocType::Test,                   DocType::ProjectManagement,
    DocType::ConfigurationManagement, DocType::ProjectInfrastructure, DocType::UserSoftware};

std::string_view to_string(DocType type);
DocType doc_type_from_string(std::string_view s);

/// Share (%) of mined repositories that ship the document type; the
/// tie-break prior for classification and retrieval.
int frequency_prior(DocType type);

/// Weighted keyword rules over the path (weight 3 per matching word) and
/// content (weight 1 per occurrence, at most 3 per cue). Ties go to the type
/// with the larger frequency prior. Throws PreconditionError on empty content.
DocType classify_doc(std::string_view path, std::string_view content);

struct DesignDoc {
  std::string doc_id;
  std::string path;
  DocType doc_type = DocType::UserSoftware;
  std::string title;
  std::string content;
};

/// Markdown and plain text pass through; HTML loses tags, scripts and the
/// common entities.
std::string extract_plain_text(std::string_view path, std::string_view raw);

/// Builds a classified document; throws PreconditionError when the extracted
/// content is empty.
DesignDoc make_design_doc(std::string doc_id, std::string_view path, std::string_view raw);

/// Every .md/.markdown/.txt/.rst/.html/.htm file (and extension-less README,
/// INSTALL, ... files) below `dir`, ordered by relative path. Empty files are
/// skipped.
std::vector<DesignDoc> load_design_docs(const std::filesystem::path& dir);

struct DocChunk {
  std::string chunk_id;  // "<doc_id>#<ordinal, 4 digits>"
  std::string doc_id;
  DocType doc_type = DocType::UserSoftware;
  std::uint32_t ordinal = 0;
  std::uint64_t start_offset = 0;
  std::string text;
  std::vector<std::string> terms;

  bool operator==(const DocChunk&) const = default;
};

inline constexpr std::size_t kDefaultChunkSize = 1600;
inline constexpr std::size_t kDefaultChunkOverlap = 200;

/// Sliding-window chunks of at most `chunk_size` characters. Consecutive
/// chunks overlap by exactly `overlap` characters; windows end after a
/// paragraph break, else a sentence end, else whitespace, else hard.
/// Throws PreconditionError unless 0 <= overlap < chunk_size.
std::vector<DocChunk> chunk_doc(const DesignDoc& doc, std::size_t chunk_size = kDefaultChunkSize,
                                std::size_t overlap = kDefaultChunkOverlap);

struct OkapiParams {
  double k1 = 1.2;
  double b = 0.75;
};

struct Posting {
  std::uint32_t chunk;  // index into Index::chunks
  std::uint32_t tf;
};

/// Inverted index. Chunks are held in chunk_id order so the index, and every
/// score, is independent of insertion order.
struct Index {
  std::vector<DocChunk> chunks;
  std::map<std::string, std::vector<Posting>> postings;
  std::map<std::string, std::uint32_t> doc_freq;
  std::vector<std::uint32_t> chunk_len;
  double avg_len = 0.0;
  OkapiParams params;
};

/// Throws PreconditionError on an empty chunk list.
Index build_index(std::vector<DocChunk> chunks, OkapiParams params = {});

/// ln((N - df + 0.5) / (df + 0.5) + 1)
double okapi_idf(std::size_t n_chunks, std::size_t df);

struct Hit {
  std::size_t chunk;  // index into Index::chunks
  double score;
};

/// Top-k chunks by Okapi score over the distinct query terms. Only chunks
/// sharing a term with the query are candidates. Ties: larger doc-type
/// prior first, then chunk_id. Empty query terms give an empty result.
std::vector<Hit> retrieve(const Index& index, std::string_view query, std::size_t k,
                          std::optional<DocType> only_type = std::nullopt);

/// Binary format: "CGIX", format version byte, then little-endian fields.
void save_index(const Index& index, const std::filesystem::path& out);
Index load_index(const std::filesystem::path& in);

inline constexpr std::uint8_t kIndexFormatVersion = 1;

/// Retrieval backend behind the retrieve contract.
class Retriever {
 public:
  virtual ~Retriever() = default;
  virtual std::vector<Hit> retrieve(std::string_view query, std::size_t k) const = 0;
  virtual const Index& index() const = 0;
};

class OkapiRetriever final : public Retriever {
 public:
  explicit OkapiRetriever(Index index, std::optional<DocType> only_type = std::nullopt)
      : index_(std::move(index)), only_type_(only_type) {}
  std::vector<Hit> retrieve(std::string_view query, std::size_t k) const override;
  const Index& index() const override { return index_; }

 private:
  Index index_;
  std::optional<DocType> only_type_;
};

/// Cosine between mean token vectors of the query and each chunk.
class EmbeddingRetriever final : public Retriever {
 public:
  EmbeddingRetriever(Index index, std::shared_ptr<Embedder> embedder);
  std::vector<Hit> retrieve(std::string_view query, std::size_t k) const override;
  const Index& index() const override { return index_; }

 private:
  Index index_;
  std::shared_ptr<Embedder> embedder_;
  std::vector<Eigen::VectorXd> chunk_vectors_;
};

/// Query for a unit: its signature, the identifiers used in its body and the
/// enclosing file name.
std::string build_unit_query(const CodeUnit& unit);

}  // namespace commentgen
