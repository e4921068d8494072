#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "groundrec/ingest.hpp"
#include "groundrec/popularity.hpp"
#include "groundrec/tokenize.hpp"

namespace groundrec {

struct GeneratedText {
    Tokens tokens;
    std::string source;

    std::string text() const { return join_tokens(tokens); }
};

/// Stand-in for the fine-tuned language model: maps a user history to a
/// (possibly hypothetical) item description. Must be deterministic and
/// callable concurrently.
class Generator {
public:
    virtual ~Generator() = default;
    virtual GeneratedText generate(const SequenceSample& sample) const = 0;
    virtual std::string name() const = 0;
};

/// Echoes the target title. Throws DataError if the target is not in the catalog.
class OracleEchoGenerator final : public Generator {
public:
    explicit OracleEchoGenerator(const ItemCatalog& catalog) : catalog_(catalog) {}
    GeneratedText generate(const SequenceSample& sample) const override;
    std::string name() const override { return "oracle"; }

private:
    const ItemCatalog& catalog_;
};

/// Title of the most popular item the user has not seen yet.
class PopTitleGenerator final : public Generator {
public:
    PopTitleGenerator(const PopularityTable& table, const ItemCatalog& catalog);
    GeneratedText generate(const SequenceSample& sample) const override;
    std::string name() const override { return "pop"; }

private:
    const ItemCatalog& catalog_;
    std::vector<ItemIndex> order_;
};

inline constexpr const char* kEndOfText = "</s>";
inline constexpr std::size_t kMaxGeneratedTokens = 16;

/// Token n-gram transition table: context of `order` tokens -> next-token
/// counts. End of text is recorded as the successor kEndOfText.
struct NGramModel {
    std::size_t order = 1;
    std::map<Tokens, std::map<std::string, double>> transitions;
    std::string corpus_id;

    bool empty() const { return transitions.empty(); }
};

/// Throws UsageError if order < 1.
NGramModel train_ngram(const std::vector<Tokens>& titles, std::size_t order);

/// Greedy walk from `prefix` (its first `order` tokens). Ties among equally
/// weighted successors are broken by a seeded hash over the candidates in
/// lexicographic order. Stops at end of text or kMaxGeneratedTokens tokens.
/// Throws DataError on an empty model.
Tokens ngram_walk(const NGramModel& model, const Tokens& prefix, std::uint64_t seed);

/// Seeds the walk from the leading tokens of the most recent history title.
class NGramGenerator final : public Generator {
public:
    NGramGenerator(NGramModel model, const ItemCatalog& catalog, std::uint64_t seed);
    GeneratedText generate(const SequenceSample& sample) const override;
    std::string name() const override { return "ngram"; }
    const NGramModel& model() const { return model_; }

private:
    NGramModel model_;
    const ItemCatalog& catalog_;
    std::uint64_t seed_;
};

/// gen.tsv: sample index \t generated text \t source.
struct GeneratedRow {
    std::size_t sample_index = 0;
    std::string text;
    std::string source;
};

void write_generated(const std::filesystem::path& path, const std::vector<GeneratedRow>& rows);
std::vector<GeneratedRow> read_generated(const std::filesystem::path& path);

}  // namespace groundrec
